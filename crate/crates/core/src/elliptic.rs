//! Jacobi elliptic functions and the complete elliptic integral K, by the
//! arithmetic-geometric mean. Modulus convention: `a` is the modulus k (not the
//! parameter m = k²).

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

const MAX_STEPS: usize = 40;

/// AGM(x, y) for positive arguments.
pub fn agm<T: Scalar>(mut x: T, mut y: T) -> T {
    for _ in 0..MAX_STEPS {
        if (x - y).abs() <= T::epsilon() * x.abs() {
            break;
        }
        let nx = (x + y) * c(0.5);
        y = (x * y).sqrt();
        x = nx;
    }
    (x + y) * c(0.5)
}

/// K(a) = π / (2·AGM(1, √(1−a²))), 0 ≤ a < 1.
pub fn elliptic_k<T: Scalar>(a: T) -> Result<T> {
    let av = a.value();
    if !(0.0..1.0).contains(&av.abs()) || av.is_nan() {
        return Err(Error::ModulusOutOfRange);
    }
    let b = (T::one() - a * a).sqrt();
    Ok(T::pi() * c(0.5) / agm(T::one(), b))
}

/// (sn, cn, dn)(u | modulus a), 0 ≤ a ≤ 1.
pub fn jacobi<T: Scalar>(u: T, a: T) -> Result<(T, T, T)> {
    let av = a.value().abs();
    if av > 1.0 || av.is_nan() {
        return Err(Error::ModulusOutOfRange);
    }
    if av == 1.0 {
        let sech = T::one() / u.cosh();
        return Ok((u.tanh(), sech, sech));
    }
    let m = a * a;
    if m.value() < 1e-300 {
        return Ok((u.sin(), u.cos(), T::one()));
    }
    // descending Landen sequence
    let mut an = vec![T::one()];
    let mut cn = vec![a];
    let mut bn = (T::one() - m).sqrt();
    let mut n = 0;
    while n < MAX_STEPS {
        let ai = an[n];
        let cc = (ai - bn) * c(0.5);
        let na = (ai + bn) * c(0.5);
        bn = (ai * bn).sqrt();
        an.push(na);
        cn.push(cc);
        n += 1;
        if cc.abs() <= T::epsilon() * na {
            break;
        }
    }
    let mut phi = u * an[n] * c::<T>(2f64.powi(n as i32));
    for i in (1..=n).rev() {
        phi = (phi + (cn[i] / an[i] * phi.sin()).asin()) * c(0.5);
    }
    let sn = phi.sin();
    let cnv = phi.cos();
    let dn = (T::one() - m * sn * sn).sqrt();
    Ok((sn, cnv, dn))
}

/// Glaisher quotient by name: two letters from {s, c, d, n}, e.g. "sc" = sn/cn.
pub fn jacobi_named<T: Scalar>(name: &'static str, u: T, a: T) -> Result<T> {
    let (s, cc, d) = jacobi(u, a)?;
    let pick = |ch: u8| -> Option<T> {
        match ch {
            b's' => Some(s),
            b'c' => Some(cc),
            b'd' => Some(d),
            b'n' => Some(T::one()),
            _ => None,
        }
    };
    let b = name.as_bytes();
    if b.len() != 2 {
        return Err(Error::Unsupported(format!("Jacobi function {name}")));
    }
    let num = pick(b[0]).ok_or_else(|| Error::Unsupported(format!("Jacobi function {name}")))?;
    let den = pick(b[1]).ok_or_else(|| Error::Unsupported(format!("Jacobi function {name}")))?;
    if den.value().abs() <= 1e-15 {
        return Err(Error::PoleEncountered(name));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn origin_and_limits() {
        let (s, c, d) = jacobi(0.0f64, 0.6).unwrap();
        assert_eq!((s, c, d), (0.0, 1.0, 1.0));
        let (s, _, _) = jacobi(std::f64::consts::FRAC_PI_2, 0.0f64).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        let (s, _, _) = jacobi(1.0f64, 1.0).unwrap();
        assert!((s - 0.761594).abs() < 1e-6);
        assert!((s - 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn identities_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(-10.0..10.0);
            let a: f64 = rng.gen_range(0.0..1.0);
            let (s, c, d) = jacobi(u, a).unwrap();
            assert!((s * s + c * c - 1.0).abs() <= 1e-12);
            assert!((d * d + a * a * s * s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn against_near_limit_series() {
        // small modulus: sn ≈ sin u − m/4 (u − sin u cos u) cos u
        let (u, a) = (0.7f64, 0.01f64);
        let m = a * a;
        let approx = u.sin() - m / 4.0 * (u - u.sin() * u.cos()) * u.cos();
        assert!((jacobi(u, a).unwrap().0 - approx).abs() < 1e-8);
    }

    #[test]
    fn complete_integral() {
        assert!((elliptic_k(0.0f64).unwrap() - std::f64::consts::FRAC_PI_2).abs() <= 1e-13);
        let a = 0.5f64.sqrt();
        // trapezoid rule on the periodic integrand converges geometrically
        let n = 200;
        let h = std::f64::consts::FRAC_PI_2 / n as f64;
        let f = |t: f64| 1.0 / (1.0 - a * a * t.sin().powi(2)).sqrt();
        let mut q = 0.5 * (f(0.0) + f(std::f64::consts::FRAC_PI_2));
        for i in 1..n {
            q += f(i as f64 * h);
        }
        q *= h;
        let k = elliptic_k(a).unwrap();
        assert!((k - q).abs() <= 1e-10);
        assert!((k - 1.854075).abs() < 1e-6);
        assert_eq!(elliptic_k(1.0f64), Err(Error::ModulusOutOfRange));
    }

    #[test]
    fn quarter_period() {
        for a in [0.1f64, 0.6, 0.8, 0.99] {
            let k = elliptic_k(a).unwrap();
            assert!((jacobi(k, a).unwrap().0 - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn poles_and_quotients() {
        assert_eq!(jacobi_named("ns", 0.0f64, 0.5), Err(Error::PoleEncountered("ns")));
        let (s, c, d) = jacobi(0.3f64, 0.5).unwrap();
        assert!((jacobi_named("sc", 0.3f64, 0.5).unwrap() - s / c).abs() < 1e-15);
        assert!((jacobi_named("nd", 0.3f64, 0.5).unwrap() - 1.0 / d).abs() < 1e-15);
        assert!((jacobi_named("cd", 0.3f64, 0.5).unwrap() - c / d).abs() < 1e-15);
    }

    #[test]
    fn derivative_is_cn_dn() {
        let (u, a) = (0.9f64, 0.6f64);
        let (s, _, _) = jacobi(Dual::var(u, 0), Dual::constant(a)).unwrap();
        let (_, c, d) = jacobi(u, a).unwrap();
        assert!((s.d[0] - c * d).abs() < 1e-12);
    }
}
