//! Roots of real monic cubics z³ + c2 z² + c1 z + c0.

use crate::scalar::{c, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CubicRoots<T> {
    /// Three real roots, sorted descending.
    Real([T; 3]),
    /// One real root and a conjugate pair re ± i·im (im > 0).
    Complex { real: T, re: T, im: T },
}

impl<T: Scalar> CubicRoots<T> {
    pub fn is_real(&self) -> bool {
        matches!(self, CubicRoots::Real(_))
    }

    pub fn sum(&self) -> T {
        match *self {
            CubicRoots::Real(r) => r[0] + r[1] + r[2],
            CubicRoots::Complex { real, re, .. } => real + re + re,
        }
    }
}

fn eval<T: Scalar>(cf: &[T; 3], z: T) -> (T, T) {
    let f = ((z + cf[0]) * z + cf[1]) * z + cf[2];
    let df = (c::<T>(3.0) * z + c::<T>(2.0) * cf[0]) * z + cf[1];
    (f, df)
}

fn polish<T: Scalar>(cf: &[T; 3], z: T) -> T {
    let (f, df) = eval(cf, z);
    if df.value() == 0.0 {
        return z;
    }
    let z1 = z - f / df;
    if eval(cf, z1).0.abs() <= f.abs() {
        z1
    } else {
        z
    }
}

/// Closed-form (trigonometric / Cardano) roots with one Newton polish step.
pub fn cubic_roots<T: Scalar>(cf: [T; 3]) -> CubicRoots<T> {
    let [c2, c1, c0] = cf;
    let third: T = c(1.0 / 3.0);
    let shift = c2 * third;
    let p = c1 - c2 * c2 * third;
    let q = c::<T>(2.0 / 27.0) * c2 * c2 * c2 - c2 * c1 * third + c0;
    let disc = q * q * c(0.25) + p * p * p * c(1.0 / 27.0);
    let scale = c2.abs().max(c1.abs().sqrt()).max(c0.abs().cbrt()).max(T::one());
    let eps = scale.powi(6) * c(1e-28);

    let three_real = |p: T, q: T| -> [T; 3] {
        if p.value() >= 0.0 {
            // p ≈ 0 and q ≈ 0: triple root
            return [-shift, -shift, -shift];
        }
        let m = c::<T>(2.0) * (-p * third).sqrt();
        let arg = (c::<T>(3.0) * q / (p * m)).max(c(-1.0)).min(T::one());
        let th = arg.acos() * third;
        let tau: T = c(2.0 * std::f64::consts::PI / 3.0);
        let mut r = [m * th.cos() - shift, m * (th - tau).cos() - shift, m * (th + tau).cos() - shift];
        for z in r.iter_mut() {
            *z = polish(&cf, *z);
        }
        sort_desc(&mut r);
        r
    };

    if disc.value() <= eps.value() {
        return CubicRoots::Real(three_real(p, q));
    }
    // one real root via Cardano, then deflate
    let sd = disc.sqrt();
    let u = (-q * c(0.5) + sd).cbrt();
    let v = (-q * c(0.5) - sd).cbrt();
    let r = polish(&cf, u + v - shift);
    let b = c2 + r;
    let cc = c1 + r * b;
    let qd = b * b - c::<T>(4.0) * cc;
    if qd.value() >= 0.0 {
        let s = qd.sqrt();
        let mut roots = [r, polish(&cf, (-b + s) * c(0.5)), polish(&cf, (-b - s) * c(0.5))];
        sort_desc(&mut roots);
        return CubicRoots::Real(roots);
    }
    CubicRoots::Complex { real: r, re: -b * c(0.5), im: (-qd).sqrt() * c(0.5) }
}

/// Descending sort by value.
pub fn sort_desc<T: Scalar>(r: &mut [T; 3]) {
    r.sort_by(|a, b| b.value().partial_cmp(&a.value()).unwrap_or(std::cmp::Ordering::Equal));
}

/// Quadratic roots of z² + b z + c, descending; `None` when complex.
pub fn quadratic_roots<T: Scalar>(b: T, cc: T) -> Option<[T; 2]> {
    let d = b * b - c::<T>(4.0) * cc;
    if d.value() < 0.0 {
        return None;
    }
    let s = d.sqrt();
    // stable form
    let q = if b.value() >= 0.0 { -(b + s) * c(0.5) } else { (-b + s) * c(0.5) };
    let (r1, r2) = if q.value() == 0.0 { (T::zero(), T::zero()) } else { (q, cc / q) };
    Some(if r1 >= r2 { [r1, r2] } else { [r2, r1] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(r: [f64; 3]) -> [f64; 3] {
        [-(r[0] + r[1] + r[2]), r[0] * r[1] + r[0] * r[2] + r[1] * r[2], -r[0] * r[1] * r[2]]
    }

    #[test]
    fn distinct_real() {
        match cubic_roots(from_roots([3.0, 1.5, -1.0])) {
            CubicRoots::Real(r) => {
                for (a, b) in r.iter().zip([3.0, 1.5, -1.0]) {
                    assert!((a - b).abs() < 1e-13);
                }
            }
            _ => panic!("expected real"),
        }
    }

    #[test]
    fn repeated_and_triple() {
        if let CubicRoots::Real(r) = cubic_roots(from_roots([2.0, 2.0, -1.0])) {
            assert!((r[0] - 2.0).abs() < 1e-7 && (r[2] + 1.0).abs() < 1e-12);
        } else {
            panic!()
        }
        if let CubicRoots::Real(r) = cubic_roots(from_roots([0.5, 0.5, 0.5])) {
            assert!(r.iter().all(|z| (z - 0.5).abs() < 1e-5));
        } else {
            panic!()
        }
    }

    #[test]
    fn complex_pair() {
        // (z-2)(z²+1)
        match cubic_roots::<f64>([-2.0, 1.0, -2.0]) {
            CubicRoots::Complex { real, re, im } => {
                assert!((real - 2.0).abs() < 1e-13);
                assert!(re.abs() < 1e-13);
                assert!((im - 1.0).abs() < 1e-13);
            }
            _ => panic!("expected complex"),
        }
    }

    #[test]
    fn reference_char_poly() {
        // z³ − 5z² + 6.75z − 0.75 has one real root and a conjugate pair
        let r = cubic_roots::<f64>([-5.0, 6.75, -0.75]);
        assert!((r.sum() - 5.0).abs() < 1e-12);
        if let CubicRoots::Complex { real, .. } = r {
            assert!((((real - 5.0) * real + 6.75) * real - 0.75).abs() < 1e-12);
        } else {
            panic!("expected a complex pair")
        }
    }

    #[test]
    fn quadratic() {
        assert_eq!(quadratic_roots(-3.0, 2.0), Some([2.0, 1.0]));
        assert_eq!(quadratic_roots(0.0, 1.0), None);
    }
}
