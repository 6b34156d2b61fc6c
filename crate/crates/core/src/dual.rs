//! Forward-mode dual numbers with three partial derivatives.
//!
//! `Dual<T>` implements `num_traits::Float`, so every generic routine in the
//! crate (formula evaluation, the elliptic kernel, chart solves) can be
//! differentiated exactly by instantiating it at `Dual<f64>`.

use crate::scalar::Scalar;
use num_traits::{Float, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual<T> {
    pub v: T,
    pub d: [T; 3],
}

impl<T: Float> Dual<T> {
    pub fn constant(v: T) -> Self {
        Dual { v, d: [T::zero(); 3] }
    }

    /// The i-th independent variable with value `v`.
    pub fn var(v: T, i: usize) -> Self {
        let mut d = [T::zero(); 3];
        d[i] = T::one();
        Dual { v, d }
    }

    /// Apply f with f(v) = fv and f'(v) = dfv (chain rule).
    #[inline]
    fn chain(self, fv: T, dfv: T) -> Self {
        Dual {
            v: fv,
            d: [self.d[0] * dfv, self.d[1] * dfv, self.d[2] * dfv],
        }
    }
}

impl<T: Float> PartialOrd for Dual<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

impl<T: Float> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { v: -self.v, d: [-self.d[0], -self.d[1], -self.d[2]] }
    }
}

impl<T: Float> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }
}

impl<T: Float> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]],
        }
    }
}

impl<T: Float> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut d = [T::zero(); 3];
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = self.d[k] * o.v + self.v * o.d[k];
        }
        Dual { v: self.v * o.v, d }
    }
}

impl<T: Float> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.v;
        let v = self.v * inv;
        let mut d = [T::zero(); 3];
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = (self.d[k] - v * o.d[k]) * inv;
        }
        Dual { v, d }
    }
}

impl<T: Float> Rem for Dual<T> {
    type Output = Self;
    // a % b = a - b*trunc(a/b); the truncation is locally constant.
    fn rem(self, o: Self) -> Self {
        let q = (self.v / o.v).trunc();
        self - o * Dual::constant(q)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl<T: Float> $tr for Dual<T> {
            fn $m(&mut self, o: Self) { *self = *self $op o; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl<T: Float> Zero for Dual<T> {
    fn zero() -> Self {
        Dual::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.v.is_zero() && self.d.iter().all(|x| x.is_zero())
    }
}

impl<T: Float> One for Dual<T> {
    fn one() -> Self {
        Dual::constant(T::one())
    }
}

impl<T: Float> Num for Dual<T> {
    type FromStrRadixErr = T::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Dual::constant)
    }
}

impl<T: Float> ToPrimitive for Dual<T> {
    fn to_i64(&self) -> Option<i64> {
        self.v.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.v.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.v.to_f64()
    }
}

impl<T: Float> NumCast for Dual<T> {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        T::from(n).map(Dual::constant)
    }
}

impl<T: Float + FromPrimitive> FromPrimitive for Dual<T> {
    fn from_i64(n: i64) -> Option<Self> {
        T::from_i64(n).map(Dual::constant)
    }
    fn from_u64(n: u64) -> Option<Self> {
        T::from_u64(n).map(Dual::constant)
    }
    fn from_f64(n: f64) -> Option<Self> {
        T::from_f64(n).map(Dual::constant)
    }
}

impl<T: Float> Float for Dual<T> {
    fn nan() -> Self {
        Dual::constant(T::nan())
    }
    fn infinity() -> Self {
        Dual::constant(T::infinity())
    }
    fn neg_infinity() -> Self {
        Dual::constant(T::neg_infinity())
    }
    fn neg_zero() -> Self {
        Dual::constant(T::neg_zero())
    }
    fn min_value() -> Self {
        Dual::constant(T::min_value())
    }
    fn min_positive_value() -> Self {
        Dual::constant(T::min_positive_value())
    }
    fn max_value() -> Self {
        Dual::constant(T::max_value())
    }
    fn epsilon() -> Self {
        Dual::constant(T::epsilon())
    }
    fn is_nan(self) -> bool {
        self.v.is_nan() || self.d.iter().any(|x| x.is_nan())
    }
    fn is_infinite(self) -> bool {
        self.v.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.v.is_finite() && self.d.iter().all(|x| x.is_finite())
    }
    fn is_normal(self) -> bool {
        self.v.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.v.classify()
    }
    fn floor(self) -> Self {
        Dual::constant(self.v.floor())
    }
    fn ceil(self) -> Self {
        Dual::constant(self.v.ceil())
    }
    fn round(self) -> Self {
        Dual::constant(self.v.round())
    }
    fn trunc(self) -> Self {
        Dual::constant(self.v.trunc())
    }
    fn fract(self) -> Self {
        Dual { v: self.v.fract(), d: self.d }
    }
    fn abs(self) -> Self {
        if self.v < T::zero() {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Dual::constant(self.v.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.v.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.v.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let p = self.v.powi(n - 1);
        self.chain(p * self.v, T::from(n).unwrap() * p)
    }
    fn powf(self, n: Self) -> Self {
        // x^y = exp(y ln x); the constant-exponent case keeps x <= 0 usable
        if n.d.iter().all(|x| x.is_zero()) {
            let p = self.v.powf(n.v - T::one());
            return self.chain(p * self.v, n.v * p);
        }
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, T::one() / (s + s))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn exp2(self) -> Self {
        let e = self.v.exp2();
        self.chain(e, e * T::from(std::f64::consts::LN_2).unwrap())
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), self.v.recip())
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / Dual::constant(T::from(std::f64::consts::LN_2).unwrap())
    }
    fn log10(self) -> Self {
        self.ln() / Dual::constant(T::from(std::f64::consts::LN_10).unwrap())
    }
    fn max(self, o: Self) -> Self {
        if self.v >= o.v {
            self
        } else {
            o
        }
    }
    fn min(self, o: Self) -> Self {
        if self.v <= o.v {
            self
        } else {
            o
        }
    }
    fn abs_sub(self, o: Self) -> Self {
        if self.v > o.v {
            self - o
        } else {
            Self::zero()
        }
    }
    fn cbrt(self) -> Self {
        let c = self.v.cbrt();
        self.chain(c, T::one() / (T::from(3.0).unwrap() * c * c))
    }
    fn hypot(self, o: Self) -> Self {
        (self * self + o * o).sqrt()
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s)
    }
    fn tan(self) -> Self {
        let t = self.v.tan();
        self.chain(t, T::one() + t * t)
    }
    fn asin(self) -> Self {
        self.chain(self.v.asin(), (T::one() - self.v * self.v).sqrt().recip())
    }
    fn acos(self) -> Self {
        self.chain(self.v.acos(), -(T::one() - self.v * self.v).sqrt().recip())
    }
    fn atan(self) -> Self {
        self.chain(self.v.atan(), (T::one() + self.v * self.v).recip())
    }
    fn atan2(self, x: Self) -> Self {
        // d atan2(y,x) = (x dy - y dx)/(x^2+y^2)
        let r2 = self.v * self.v + x.v * x.v;
        let mut d = [T::zero(); 3];
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = (x.v * self.d[k] - self.v * x.d[k]) / r2;
        }
        Dual { v: self.v.atan2(x.v), d }
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        self.chain(self.v.exp_m1(), self.v.exp())
    }
    fn ln_1p(self) -> Self {
        self.chain(self.v.ln_1p(), (T::one() + self.v).recip())
    }
    fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.chain(t, T::one() - t * t)
    }
    fn asinh(self) -> Self {
        self.chain(self.v.asinh(), (self.v * self.v + T::one()).sqrt().recip())
    }
    fn acosh(self) -> Self {
        self.chain(self.v.acosh(), (self.v * self.v - T::one()).sqrt().recip())
    }
    fn atanh(self) -> Self {
        self.chain(self.v.atanh(), (T::one() - self.v * self.v).recip())
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.v.integer_decode()
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn value(self) -> f64 {
        self.v.value()
    }
    fn pi() -> Self {
        Dual::constant(T::pi())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Dual<f64>;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn product_rule_x_sin_x() {
        for i in 0..100 {
            let x = -5.0 + 0.1 * i as f64;
            let d = D::var(x, 0);
            let y = d * d.sin();
            assert!((y.v - x * x.sin()).abs() < 1e-15);
            assert!((y.d[0] - fd(|x| x * x.sin(), x)).abs() < 1e-6);
        }
    }

    #[test]
    fn quotient_and_chain() {
        let x = D::var(0.7, 1);
        let y = (x.exp() / (x * x + D::one())).sqrt();
        let f = |x: f64| (x.exp() / (x * x + 1.0)).sqrt();
        assert!((y.d[1] - fd(f, 0.7)).abs() < 1e-8);
        assert_eq!(y.d[0], 0.0);
    }

    #[test]
    fn atan2_and_abs() {
        let y = D::var(1.0, 0);
        let x = D::var(-2.0, 1);
        let a = y.atan2(x);
        assert!((a.d[0] - (-2.0 / 5.0)).abs() < 1e-15);
        assert!((a.d[1] - (-1.0 / 5.0)).abs() < 1e-15);
        assert_eq!(x.abs().d[1], -1.0);
    }

    #[test]
    fn inverse_hyperbolics() {
        for &x in &[0.1, 0.5, 0.9] {
            let d = D::var(x, 2);
            assert!((d.atanh().d[2] - fd(f64::atanh, x)).abs() < 1e-6);
            assert!((d.asinh().d[2] - fd(f64::asinh, x)).abs() < 1e-6);
            assert!((d.acos().d[2] - fd(f64::acos, x)).abs() < 1e-6);
        }
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = D::var(1.3, 0);
        let p = x.powi(4);
        let q = x * x * x * x;
        assert!((p.v - q.v).abs() < 1e-14 && (p.d[0] - q.d[0]).abs() < 1e-13);
    }
}
