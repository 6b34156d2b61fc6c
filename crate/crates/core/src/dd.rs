//! Double-double arithmetic (an unevaluated sum hi + lo of two f64).
//!
//! Used where f64 cancellation would swamp a certificate: pulling the flat
//! metric back through a chart whose Jacobian entries are many orders larger
//! than the metric itself. Transcendentals are seeded in f64 and polished by a
//! Newton step or evaluated by short Taylor series after argument reduction;
//! relative accuracy is around 1e-30 on the arguments the catalog produces.

use crate::scalar::Scalar;
use num_traits::{Float, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };
const LN10: Dd = Dd { hi: 2.302585092994046, lo: -2.1707562233822494e-16 };
const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
const FRAC_PI_2: Dd = Dd { hi: std::f64::consts::FRAC_PI_2, lo: 6.123233995736766e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    if !s.is_finite() {
        return Dd::of(s);
    }
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn of(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn ldexp(self, k: i32) -> Dd {
        // two steps keep 2^k representable for |k| up to 2046
        let h = k / 2;
        let f1 = 2f64.powi(h);
        let f2 = 2f64.powi(k - h);
        Dd { hi: self.hi * f1 * f2, lo: self.lo * f1 * f2 }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        quick_two_sum(p, e + self.lo * b)
    }

    /// Σ x^k/k! for k ≥ `start`, stepping by `step` with alternating sign if `alt`.
    fn series(x: Dd, start: i32, step: i32, alt: bool) -> Dd {
        let x2 = if step == 2 { x * x } else { x };
        let mut term = x.powi(start);
        for k in 2..=start {
            term = term / Dd::of(k as f64);
        }
        let mut sum = term;
        let mut k = start;
        for _ in 0..60 {
            let d = ((k + 1)..=(k + step)).fold(1.0, |a, j| a * j as f64);
            term = term * x2 / Dd::of(d);
            if alt {
                term = -term;
            }
            k += step;
            sum = sum + term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() {
                break;
            }
        }
        sum
    }

    /// sin and cos of |r| ≤ π/4.
    fn sin_cos_reduced(r: Dd) -> (Dd, Dd) {
        if r.hi == 0.0 {
            return (r, Dd::one());
        }
        let s = Dd::series(r, 1, 2, true);
        let c = Dd::one() - Dd::series(r, 2, 2, true);
        (s, c)
    }

    fn expm1_small(x: Dd) -> Dd {
        Dd::series(x, 1, 1, false)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::of(x)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            r => r,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        if !s.is_finite() {
            return Dd::of(s);
        }
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        if !p.is_finite() {
            return Dd::of(p);
        }
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        if !q1.is_finite() || o.hi == 0.0 {
            return Dd::of(q1);
        }
        let r = self - o.mul_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o.mul_f64(q2);
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2) + Dd::of(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, o: Dd) -> Dd {
        self - (self / o).trunc() * o
    }
}

macro_rules! assign_ops {
    ($($tr:ident $f:ident $op:tt),*) => {$(
        impl $tr for Dd {
            fn $f(&mut self, o: Dd) {
                *self = *self $op o;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl Zero for Dd {
    fn zero() -> Dd {
        Dd::of(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Dd {
        Dd::of(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Dd, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::of)
    }
}

impl ToPrimitive for Dd {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        Some(t.hi.to_i64()? + t.lo.to_i64()?)
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_i64().and_then(|v| u64::try_from(v).ok())
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl NumCast for Dd {
    fn from<N: ToPrimitive>(n: N) -> Option<Dd> {
        n.to_f64().map(Dd::of)
    }
}

impl FromPrimitive for Dd {
    fn from_i64(n: i64) -> Option<Dd> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(quick_two_sum(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Dd> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(quick_two_sum(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Dd> {
        Some(Dd::of(x))
    }
}

impl Float for Dd {
    fn nan() -> Dd {
        Dd::of(f64::NAN)
    }
    fn infinity() -> Dd {
        Dd::of(f64::INFINITY)
    }
    fn neg_infinity() -> Dd {
        Dd::of(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Dd {
        Dd::of(-0.0)
    }
    fn min_value() -> Dd {
        Dd::of(f64::MIN)
    }
    fn min_positive_value() -> Dd {
        Dd::of(f64::MIN_POSITIVE)
    }
    fn max_value() -> Dd {
        Dd::of(f64::MAX)
    }
    fn epsilon() -> Dd {
        Dd::of(2f64.powi(-104))
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f == self.hi {
            quick_two_sum(f, self.lo.floor())
        } else {
            Dd::of(f)
        }
    }
    fn ceil(self) -> Dd {
        -(-self).floor()
    }
    fn round(self) -> Dd {
        if self.hi < 0.0 {
            -(-self).round()
        } else {
            (self + Dd::of(0.5)).floor()
        }
    }
    fn trunc(self) -> Dd {
        if self.hi < 0.0 {
            self.ceil()
        } else {
            self.floor()
        }
    }
    fn fract(self) -> Dd {
        self - self.trunc()
    }
    fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Dd {
        Dd::of(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Dd, b: Dd) -> Dd {
        self * a + b
    }
    fn recip(self) -> Dd {
        Dd::one() / self
    }
    fn powi(self, n: i32) -> Dd {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
    fn powf(self, p: Dd) -> Dd {
        if p.lo == 0.0 && p.hi.fract() == 0.0 && p.hi.abs() < 1e9 {
            return self.powi(p.hi as i32);
        }
        (p * self.ln()).exp()
    }
    fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::of(self.hi.sqrt());
        }
        if !self.hi.is_finite() {
            return self;
        }
        let y = Dd::of(self.hi.sqrt());
        y + (self - y * y) / (y + y)
    }
    fn exp(self) -> Dd {
        if self.hi > 709.8 {
            return Dd::infinity();
        }
        if self.hi < -745.2 {
            return Dd::zero();
        }
        if self.hi.is_nan() {
            return self;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-9);
        // e^r − 1 squared back up through (1+s)² − 1 = 2s + s²
        let mut s = Dd::expm1_small(r);
        for _ in 0..9 {
            s = s + s + s * s;
        }
        (s + Dd::one()).ldexp(k as i32)
    }
    fn exp2(self) -> Dd {
        (self * LN2).exp()
    }
    fn ln(self) -> Dd {
        if self.hi <= 0.0 || !self.hi.is_finite() {
            return Dd::of(self.hi.ln());
        }
        let y = Dd::of(self.hi.ln());
        y + self * (-y).exp() - Dd::one()
    }
    fn log(self, base: Dd) -> Dd {
        self.ln() / base.ln()
    }
    fn log2(self) -> Dd {
        self.ln() / LN2
    }
    fn log10(self) -> Dd {
        self.ln() / LN10
    }
    fn max(self, o: Dd) -> Dd {
        if self >= o || o.is_nan() {
            self
        } else {
            o
        }
    }
    fn min(self, o: Dd) -> Dd {
        if self <= o || o.is_nan() {
            self
        } else {
            o
        }
    }
    fn abs_sub(self, o: Dd) -> Dd {
        if self > o {
            self - o
        } else {
            Dd::zero()
        }
    }
    fn cbrt(self) -> Dd {
        if self.hi == 0.0 || !self.hi.is_finite() {
            return self;
        }
        let y = Dd::of(self.hi.cbrt());
        y - (y * y * y - self) / (Dd::of(3.0) * y * y)
    }
    fn hypot(self, o: Dd) -> Dd {
        (self * self + o * o).sqrt()
    }
    fn sin(self) -> Dd {
        self.sin_cos().0
    }
    fn cos(self) -> Dd {
        self.sin_cos().1
    }
    fn tan(self) -> Dd {
        let (s, c) = self.sin_cos();
        s / c
    }
    fn asin(self) -> Dd {
        if self.hi.abs() > 1.0 {
            return Dd::nan();
        }
        self.atan2(((Dd::one() - self) * (Dd::one() + self)).sqrt())
    }
    fn acos(self) -> Dd {
        if self.hi.abs() > 1.0 {
            return Dd::nan();
        }
        ((Dd::one() - self) * (Dd::one() + self)).sqrt().atan2(self)
    }
    fn atan(self) -> Dd {
        self.atan2(Dd::one())
    }
    fn atan2(self, x: Dd) -> Dd {
        let y = self;
        let t0 = y.hi.atan2(x.hi);
        if !y.is_finite() || !x.is_finite() || (y.hi == 0.0 && x.hi == 0.0) {
            return Dd::of(t0);
        }
        // one Newton step on y·cos θ − x·sin θ = 0
        let t = Dd::of(t0);
        let (s, c) = t.sin_cos();
        t + (y * c - x * s) / (x * c + y * s)
    }
    fn sin_cos(self) -> (Dd, Dd) {
        if !self.hi.is_finite() {
            return (Dd::nan(), Dd::nan());
        }
        let k = (self.hi / FRAC_PI_2.hi).round();
        let r = self - FRAC_PI_2.mul_f64(k);
        let (s, c) = Dd::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
    fn exp_m1(self) -> Dd {
        if self.hi.abs() < 0.5 {
            Dd::expm1_small(self)
        } else {
            self.exp() - Dd::one()
        }
    }
    fn ln_1p(self) -> Dd {
        (Dd::one() + self).ln()
    }
    fn sinh(self) -> Dd {
        if self.hi.abs() < 0.5 {
            return Dd::series(self, 1, 2, false);
        }
        let e = self.exp();
        (e - e.recip()) * Dd::of(0.5)
    }
    fn cosh(self) -> Dd {
        let e = self.abs().exp();
        (e + e.recip()) * Dd::of(0.5)
    }
    fn tanh(self) -> Dd {
        if self.hi.abs() > 40.0 {
            return self.signum();
        }
        self.sinh() / self.cosh()
    }
    fn asinh(self) -> Dd {
        let y0 = self.hi.asinh();
        if y0 == 0.0 || !y0.is_finite() || y0.abs() > 700.0 {
            return Dd::of(y0);
        }
        let y = Dd::of(y0);
        y - (y.sinh() - self) / y.cosh()
    }
    fn acosh(self) -> Dd {
        let y0 = self.hi.acosh();
        if y0 == 0.0 || !y0.is_finite() || y0 > 700.0 {
            return Dd::of(y0);
        }
        let y = Dd::of(y0);
        y - (y.cosh() - self) / y.sinh()
    }
    fn atanh(self) -> Dd {
        if self.hi.abs() >= 1.0 {
            return Dd::of(self.hi.atanh());
        }
        let one = Dd::one();
        ((self + self) / (one - self)).ln_1p() * Dd::of(0.5)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}

impl Scalar for Dd {
    fn value(self) -> f64 {
        self.hi + self.lo
    }
    fn pi() -> Self {
        PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Dd, b: Dd) -> f64 {
        ((a - b) / b).abs().value()
    }

    #[test]
    fn arithmetic_is_exact_beyond_f64() {
        let third = Dd::one() / Dd::of(3.0);
        let back = third * Dd::of(3.0) - Dd::one();
        assert!(back.abs().value() < 1e-31);
        let big = Dd::of(1e16) + Dd::one() - Dd::of(1e16);
        assert_eq!(big.value(), 1.0);
        let r = Dd::of(2.0).sqrt();
        assert!(((r * r) - Dd::of(2.0)).abs().value() < 1e-31);
    }

    #[test]
    fn transcendentals_against_references() {
        // (hi, lo) splits of 50-digit values
        let x = Dd::of(0.7345);
        let cases = [
            ("sin", x.sin(), 0.6702161564532647, 6.529951947878375e-18),
            ("cos", x.cos(), 0.7421659542373343, -3.527381401927939e-17),
            ("exp", x.exp(), 2.0844395121505825, -1.9659342719781892e-16),
            ("ln", x.ln(), -0.308565283368205, -9.968608037957003e-18),
            ("atan", x.atan(), 0.6335070835190999, -4.609922408713373e-17),
            ("sinh", x.sinh(), 0.8023471202490138, -2.386262917141975e-17),
            ("cosh", x.cosh(), 1.2820923919015685, 4.931380689863214e-17),
            ("tanh", x.tanh(), 0.6258106867469916, 3.4466009846199425e-17),
            ("asin", x.asin(), 0.8249295852404336, 3.7622384604741537e-17),
            ("acos", x.acos(), 0.745866741554463, 2.3609955352626124e-17),
            ("atanh", x.atanh(), 0.9384298128639055, 5.17652841386842e-17),
            ("asinh", x.asinh(), 0.6807010292900978, 1.1054956798355549e-17),
            ("cbrt", x.cbrt(), 0.9022577061530199, -4.628858136287776e-18),
            ("sin20", Dd::of(20.0).sin(), 0.9129452507276277, -1.1889007125365703e-17),
            ("exp-5.25", Dd::of(-5.25).exp(), 0.005247518399181385, -3.461602049984131e-19),
        ];
        for (name, v, hi, lo) in cases {
            let r = rel(v, Dd { hi, lo });
            assert!(r < 1e-29, "{name}: {r:e}");
        }
    }

    #[test]
    fn identities() {
        for &x in &[0.1, 1.3, 2.9, -4.2, 11.0] {
            let x = Dd::of(x);
            let (s, c) = x.sin_cos();
            assert!((s * s + c * c - Dd::one()).abs().value() < 1e-30);
            assert!(rel(x.exp().ln(), x) < 1e-30);
            let ch = x.cosh();
            let sh = x.sinh();
            assert!((ch * ch - sh * sh - Dd::one()).abs().value() < 1e-30 * (ch * ch).value());
        }
    }
}
