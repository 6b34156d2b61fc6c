//! Separable coordinates of irreducible concircular tensors.
//!
//! Forward maps take eigenvalue triples u > v > w of the canonical tensor and
//! return the canonical Cartesian point; `ict_invert` goes back through the
//! point eigenvalues.

use crate::concircular::{
    char_polys, classify_ct, monic_real_roots, point_eigenvalues, CTClass, CanonicalCT, ConcircularTensor,
};
use crate::error::{Error, Result};
use crate::jordan::{Eigen, MetricJordanForm};
use crate::minkowski::Vec3M;
use crate::scalar::{c, Scalar};

type V = Vec3M<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IctKind {
    Central,
    Axial,
}

/// Nilpotent part of A_c: skew-normal vectors e₁..e_k with eigenvalue `eigen`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainBlock {
    pub sign: i8,
    pub eigen: f64,
    pub vectors: Vec<V>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalICTData {
    pub kind: IctKind,
    /// Axial skew-normal sequence (w = e₁); empty for central tensors.
    pub axis: Vec<V>,
    /// ε₀ = ⟨e₁, e_k⟩ of the axial sequence.
    pub eps0: i8,
    /// Sign of L in the metric formula.
    pub eps: i8,
    pub block: Option<ChainBlock>,
    pub lambdas: Vec<f64>,
    pub signs: Vec<i8>,
    pub axes: Vec<V>,
    pub complex_pair: Option<(f64, f64)>,
    /// B(z), monic, highest degree first.
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparableTriple(pub [f64; 3]);

impl SeparableTriple {
    pub fn new(u: f64, v: f64, w: f64) -> Result<Self> {
        if !(u > v && v > w) {
            return Err(Error::DegenerateTriple);
        }
        Ok(SeparableTriple([u, v, w]))
    }
}

fn poly_from_roots(r: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &x in r {
        let mut q = p.clone();
        q.push(0.0);
        for i in 1..q.len() {
            q[i] -= x * p[i - 1];
        }
        p = q;
    }
    p
}

fn poly_eval<T: Scalar>(p: &[T], z: T) -> T {
    p.iter().fold(T::zero(), |acc, &c| acc * z + c)
}

/// Quotient of p by a monic divisor (both highest degree first).
fn poly_div<T: Scalar>(p: &[T], d: &[f64]) -> Vec<T> {
    let n = p.len();
    let m = d.len();
    if m > n {
        return vec![];
    }
    let mut r = p.to_vec();
    let mut q = vec![T::zero(); n - m + 1];
    for i in 0..q.len() {
        q[i] = r[i];
        for j in 0..m {
            r[i + j] = r[i + j] - q[i] * c(d[j]);
        }
    }
    q
}

/// Taylor coefficients at z0, lowest order first.
fn taylor<T: Scalar>(p: &[T], z0: T) -> Vec<T> {
    // repeated synthetic division
    let mut a = p.to_vec();
    let mut out = Vec::new();
    while !a.is_empty() {
        let mut b = Vec::with_capacity(a.len());
        let mut acc = T::zero();
        for &x in &a {
            acc = acc * z0 + x;
            b.push(acc);
        }
        out.push(*b.last().unwrap());
        b.pop();
        a = b;
    }
    out
}

fn series_div<T: Scalar>(num: &[T], den: &[T], n: usize) -> Vec<T> {
    let mut q = vec![T::zero(); n];
    for i in 0..n {
        let mut s = if i < num.len() { num[i] } else { T::zero() };
        for j in 1..=i {
            if j < den.len() {
                s = s - den[j] * q[i - j];
            }
        }
        q[i] = s / den[0];
    }
    q
}

impl CanonicalICTData {
    /// Builds the coordinate data of an irreducible canonical tensor.
    pub fn from_canonical(c: &CanonicalCT) -> Result<Self> {
        let (kind, axis, eps0, eps) = match c.class {
            CTClass::Central => (IctKind::Central, vec![], 1, 1),
            CTClass::NonNullAxial { eps } => (IctKind::Axial, vec![c.canonical_w], eps, eps),
            CTClass::NullAxial { k: 2, eps } => {
                let e1 = c.canonical_w;
                (IctKind::Axial, vec![e1, c.canonical_a.apply(&e1)], eps, eps)
            }
            CTClass::NullAxial { .. } => {
                let e1 = c.canonical_w;
                let e2 = c.canonical_a.apply(&e1);
                (IctKind::Axial, vec![e1, e2, c.canonical_a.apply(&e2)], 1, 1)
            }
            CTClass::Cartesian => return Err(Error::NotReducible),
        };
        let mut d = CanonicalICTData {
            kind,
            axis,
            eps0,
            eps,
            block: None,
            lambdas: vec![],
            signs: vec![],
            axes: vec![],
            complex_pair: None,
            b: vec![1.0],
        };
        let form = match &c.jordan {
            None => return Ok(d),
            Some(f) => f,
        };
        // standard realizing vectors of the complement blocks, in canonical coordinates
        let std = std_vectors(form, &c.class)?;
        let mut roots = Vec::new();
        let mut i = 0;
        let mut k = 0;
        while k < form.blocks.len() {
            let b = form.blocks[k];
            match b.eigen {
                Eigen::Complex(re, im) => {
                    d.complex_pair = Some((re, im.abs()));
                    i += 2;
                    k += 2;
                    continue;
                }
                Eigen::Real(l) => {
                    for _ in 0..b.size {
                        roots.push(l);
                    }
                    if b.size == 1 {
                        d.lambdas.push(l);
                        d.signs.push(b.sign);
                        d.axes.push(std[i]);
                    } else {
                        d.block = Some(ChainBlock { sign: b.sign, eigen: l, vectors: std[i..i + b.size].to_vec() });
                    }
                    i += b.size;
                }
            }
            k += 1;
        }
        let mut bp = poly_from_roots(&roots);
        if let Some((re, im)) = d.complex_pair {
            // multiply by z² − 2re z + re² + im²
            let q = [1.0, -2.0 * re, re * re + im * im];
            let mut out = vec![0.0; bp.len() + 2];
            for (i, x) in bp.iter().enumerate() {
                for (j, y) in q.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            bp = out;
        }
        d.b = bp;
        Ok(d)
    }

    pub fn k(&self) -> usize {
        if self.kind == IctKind::Axial {
            self.axis.len()
        } else {
            self.block.as_ref().map_or(0, |b| b.vectors.len())
        }
    }

    /// Lambdas of all real roots of B with the J_k block root repeated.
    fn kappa(&self) -> f64 {
        if self.kind == IctKind::Axial {
            self.eps0 as f64
        } else {
            1.0
        }
    }

    fn check_triple(&self, s: &[f64; 3]) -> Result<()> {
        let sc = 1.0 + s.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !(s[0] - s[1] > 1e-12 * sc && s[1] - s[2] > 1e-12 * sc) {
            return Err(Error::DegenerateTriple);
        }
        let bs = 1.0 + self.b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for &u in s {
            if self.b.len() > 1 && poly_eval(&self.b, u).abs() <= 1e-12 * bs * sc.powi(self.b.len() as i32 - 1) {
                return Err(Error::DegenerateTriple);
            }
        }
        Ok(())
    }
}

/// Unit/skew-normal vectors of the complement blocks in canonical coordinates.
fn std_vectors(form: &MetricJordanForm, class: &CTClass) -> Result<Vec<V>> {
    match class {
        CTClass::Central => Ok(MetricJordanForm::from_blocks(form.blocks.clone())?.basis.to_vec()),
        CTClass::NonNullAxial { eps } => {
            // the axis sits on e_t (ε = −1) or e_y (ε = +1); complement uses the rest
            let rest: Vec<V> = if *eps < 0 { vec![V::unit(1), V::unit(2)] } else { vec![V::unit(0), V::unit(1)] };
            let b = &form.blocks;
            if b.iter().any(|b| b.size == 2) {
                let e = b[0].sign as f64;
                let (eta, xi) = if *eps > 0 {
                    (crate::jordan::d_eta(), crate::jordan::d_xi())
                } else {
                    return Err(Error::Unsupported("null block beside a timelike axis".into()));
                };
                return Ok(vec![eta, xi.scale(e)]);
            }
            if matches!(b[0].eigen, Eigen::Complex(..)) {
                return Ok(rest);
            }
            if *eps < 0 {
                return Ok(rest);
            }
            // Lorentzian complement: timelike block first
            let mut out = vec![V::zero(); 2];
            let mut sp = 1;
            for (i, blk) in b.iter().enumerate() {
                if blk.sign < 0 {
                    out[i] = V::unit(0);
                } else {
                    out[i] = V::unit(sp);
                    sp += 1;
                }
            }
            Ok(out)
        }
        _ => Ok(vec![V::unit(2)]),
    }
}

fn sqrt_nonneg<T: Scalar>(z: T, what: &str) -> Result<T> {
    if z.value() < -1e-12 {
        return Err(Error::RangeViolation(format!("{what} squared is {:.3e}", z.value())));
    }
    Ok(if z.value() <= 0.0 { T::zero() } else { z.sqrt() })
}

/// Coordinates on a skew-normal chain from its Taylor data: Σ x^i x^{l+2−i} = rhs_l.
fn solve_chain<T: Scalar>(rhs: &[T]) -> Result<Vec<T>> {
    let x1 = sqrt_nonneg(rhs[0], "chain coordinate")?;
    if rhs.len() == 1 {
        return Ok(vec![x1]);
    }
    if x1.value() <= 1e-300 {
        return Err(Error::RangeViolation("chain coordinate vanishes".into()));
    }
    let two: T = c(2.0);
    let x2 = rhs[1] / (two * x1);
    if rhs.len() == 2 {
        return Ok(vec![x1, x2]);
    }
    let x3 = (rhs[2] - x2 * x2) / (two * x1);
    Ok(vec![x1, x2, x3])
}

fn char_poly_of<T: Scalar>(s: &[T; 3]) -> Vec<T> {
    vec![T::one(), -(s[0] + s[1] + s[2]), s[0] * s[1] + s[0] * s[2] + s[1] * s[2], -(s[0] * s[1] * s[2])]
}

/// Complement (central-style) coordinates; returns the point contribution.
fn complement<T: Scalar>(d: &CanonicalICTData, p: &[T]) -> Result<Vec3M<T>> {
    let kappa: T = c(d.kappa());
    let mut out = Vec3M::<T>::zero();
    let bd: Vec<T> = d.b.iter().map(|&x| c(x)).collect();
    for ((&l, &sg), ax) in d.lambdas.iter().zip(&d.signs).zip(&d.axes) {
        // B'(λ) from the derivative of B
        let n = bd.len() - 1;
        let db: Vec<T> = bd[..n].iter().enumerate().map(|(i, &x)| x * c((n - i) as f64)).collect();
        let val = -kappa * c::<T>(sg as f64) * poly_eval(p, c(l)) / poly_eval(&db, c(l));
        let x = sqrt_nonneg(val, "diagonal coordinate")?;
        out = out + Vec3M::from_f64(ax.0).scale(x);
    }
    if let Some(blk) = &d.block {
        let k = blk.vectors.len();
        // B_{U⊥}: the factors of B away from the block
        let bu: Vec<f64> = poly_from_roots(&d.lambdas);
        let z0: T = c(blk.eigen);
        let tp = taylor(p, z0);
        let tb: Vec<T> = taylor(&bu.iter().map(|&x| c::<T>(x)).collect::<Vec<_>>(), z0);
        let t = series_div(&tp, &tb, k);
        let f: T = -kappa * c::<T>(blk.sign as f64);
        let rhs: Vec<T> = t.iter().map(|&x| f * x).collect();
        let xs = solve_chain(&rhs)?;
        for (x, e) in xs.iter().zip(&blk.vectors) {
            out = out + Vec3M::from_f64(e.0).scale(*x);
        }
    }
    Ok(out)
}

/// Central forward map (canonical coordinates).
pub fn central_forward<T: Scalar>(d: &CanonicalICTData, s: &[T; 3]) -> Result<Vec3M<T>> {
    if d.kind != IctKind::Central {
        return Err(Error::Unsupported("central_forward on an axial tensor".into()));
    }
    if d.complex_pair.is_some() {
        return Err(Error::Unsupported("complex-eigenvalue forward map".into()));
    }
    d.check_triple(&s.map(|x| x.value()))?;
    complement(d, &char_poly_of(s))
}

/// Axial forward map (canonical coordinates).
pub fn axial_forward<T: Scalar>(d: &CanonicalICTData, s: &[T; 3]) -> Result<Vec3M<T>> {
    if d.kind != IctKind::Axial {
        return Err(Error::Unsupported("axial_forward on a central tensor".into()));
    }
    if d.complex_pair.is_some() {
        return Err(Error::Unsupported("complex-eigenvalue forward map".into()));
    }
    d.check_triple(&s.map(|x| x.value()))?;
    let p = char_poly_of(s);
    let pd = poly_div(&p, &d.b);
    let e0: T = c(d.eps0 as f64);
    let two: T = c(2.0);
    // p_d is triangular in the axial coordinates
    let xs: Vec<T> = match d.axis.len() {
        1 => vec![pd[1] / (-two * e0)],
        2 => {
            let x2 = -e0 * pd[1] / two;
            vec![e0 * (x2 * x2 - pd[2]) / two, x2]
        }
        _ => {
            let x3 = -e0 * pd[1] / two;
            let x2 = e0 * (x3 * x3 - pd[2]) / two;
            vec![e0 * (two * x2 * x3 - pd[3]) / two, x2, x3]
        }
    };
    let mut out = complement(d, &p)?;
    for (x, e) in xs.iter().zip(&d.axis) {
        out = out + Vec3M::from_f64(e.0).scale(*x);
    }
    Ok(out)
}

/// Dispatches on the kind.
pub fn ict_forward<T: Scalar>(d: &CanonicalICTData, s: &[T; 3]) -> Result<Vec3M<T>> {
    match d.kind {
        IctKind::Central => central_forward(d, s),
        IctKind::Axial => axial_forward(d, s),
    }
}

/// g_ii = (ε/4)·Π_{j≠i}(u_i − u_j)/B(u_i).
pub fn ict_metric<T: Scalar>(d: &CanonicalICTData, s: &[T; 3]) -> Result<[T; 3]> {
    d.check_triple(&s.map(|x| x.value()))?;
    let b: Vec<T> = d.b.iter().map(|&x| c(x)).collect();
    let e: T = c(d.eps as f64 / 4.0);
    let mut g = [T::zero(); 3];
    for i in 0..3 {
        let mut num = T::one();
        for j in 0..3 {
            if j != i {
                num = num * (s[i] - s[j]);
            }
        }
        g[i] = e * num / poly_eval(&b, s[i]);
    }
    Ok(g)
}

/// Eigenvalues of L at p + offset, descending and simple. Points whose
/// eigenvalues meet a root of B lie on a coordinate surface of the web and are
/// rejected as well.
pub fn ict_invert(l: &ConcircularTensor<f64>, p: &V, offset: &V) -> Result<SeparableTriple> {
    let e = point_eigenvalues(l, &(*p + *offset))?;
    let sc = 1.0 + e[0].abs().max(e[2].abs());
    if e[0] - e[1] <= 1e-7 * sc || e[1] - e[2] <= 1e-7 * sc {
        return Err(Error::DegenerateSpectrum);
    }
    if let Ok(c) = classify_ct(l) {
        let cp = char_polys(&c, &V::zero());
        if let Some(roots) = monic_real_roots(&cp.b) {
            for x in e {
                let y = c.scale * x + c.metric_shift;
                if roots.iter().any(|r| (y - r).abs() <= 1e-9 * (1.0 + r.abs())) {
                    return Err(Error::DegenerateSpectrum);
                }
            }
        }
    }
    Ok(SeparableTriple(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::Operator3;

    fn ct(a: [[f64; 3]; 3], w: [f64; 3], m: f64) -> ConcircularTensor<f64> {
        ConcircularTensor::new(Operator3::new(a), V::new(w[0], w[1], w[2]), m).unwrap()
    }

    fn central_diag() -> CanonicalICTData {
        CanonicalICTData {
            kind: IctKind::Central,
            axis: vec![],
            eps0: 1,
            eps: 1,
            block: None,
            lambdas: vec![0.0, 1.0, 2.0],
            signs: vec![-1, 1, 1],
            axes: vec![V::unit(0), V::unit(1), V::unit(2)],
            complex_pair: None,
            b: poly_from_roots(&[0.0, 1.0, 2.0]),
        }
    }

    #[test]
    fn central_diagonal_example() {
        let d = central_diag();
        let p = central_forward::<f64>(&d, &[3.0, 1.5, -1.0]).unwrap();
        assert!((p[0] * p[0] - 2.25).abs() < 1e-12);
        assert!((p[1] * p[1] - 2.0).abs() < 1e-12);
        assert!((p[2] * p[2] - 0.75).abs() < 1e-12);
        let g = ict_metric::<f64>(&d, &[3.0, 1.5, -1.0]).unwrap();
        assert!((g[0] - 0.25).abs() < 1e-14);
        assert!(g[0] > 0.0 && g[1] > 0.0 && g[2] < 0.0);
        // u approaching λ from above sends the matching coordinate to zero
        let p = central_forward::<f64>(&d, &[2.0 + 1e-9, 1.5, -1.0]).unwrap();
        assert!(p[2].abs() < 1e-4);
        assert_eq!(central_forward::<f64>(&d, &[3.0, 1.0, -1.0]), Err(Error::DegenerateTriple));
    }

    #[test]
    fn central_lightcone_example() {
        let l = ct([[-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3], 1.0);
        let c = classify_ct(&l).unwrap();
        let d = CanonicalICTData::from_canonical(&c).unwrap();
        assert_eq!(d.k(), 2);
        let p = central_forward::<f64>(&d, &[2.0, 0.5, -1.0]).unwrap();
        let q = c.frame.inverse().unwrap().apply(&p) + c.origin_shift;
        assert!((q - V::new(0.75, 0.25, 1.0)).max_abs() < 1e-12, "{q:?}");
    }

    #[test]
    fn axial_examples() {
        let l = ct([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 2.0]], [1.0, 0.0, 0.0], 0.0);
        let c = classify_ct(&l).unwrap();
        let d = CanonicalICTData::from_canonical(&c).unwrap();
        let s = [1.5, 1.0, 0.5].map(|x| c.scale * x + c.metric_shift);
        let p = axial_forward::<f64>(&d, &s).unwrap();
        let q = c.frame.inverse().unwrap().apply(&p) + c.origin_shift;
        // the canonical origin sits at t = a/2 relative to the printed web-39 chart
        assert!((q[0] + 0.5).abs() < 1e-12, "{q:?}");
        assert!((q[1] * q[1] - 0.375).abs() < 1e-12);
        assert!((q[2] * q[2] - 0.375).abs() < 1e-12);

        let l = ct([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]], [0.5, 0.5, 0.0], 0.0);
        let c = classify_ct(&l).unwrap();
        let d = CanonicalICTData::from_canonical(&c).unwrap();
        let p = axial_forward::<f64>(&d, &[3.0, 2.0, 1.0]).unwrap();
        let q = c.frame.inverse().unwrap().apply(&p) + c.origin_shift;
        assert!((q[1] - q[0] - 6.0).abs() < 1e-12);
        let g = ict_metric::<f64>(&d, &[3.0, 2.0, 1.0]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-14);
        assert_eq!(axial_forward::<f64>(&d, &[3.0, 3.0, 1.0]), Err(Error::DegenerateTriple));
    }

    #[test]
    fn invert_examples() {
        let l = ct([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]], [0.0; 3], 1.0);
        let s = ict_invert(&l, &V::new(1.5, 2f64.sqrt(), 0.75f64.sqrt()), &V::zero()).unwrap();
        for (x, y) in s.0.iter().zip([3.0, 1.5, -1.0]) {
            assert!((x - y).abs() < 1e-9);
        }
        // y = 0 lies on the coordinate surface u = b
        let r = ict_invert(&l, &V::new(1.5, 2f64.sqrt(), 0.0), &V::zero());
        assert_eq!(r, Err(Error::DegenerateSpectrum));
    }

    #[test]
    fn polynomial_helpers() {
        assert_eq!(poly_from_roots(&[1.0, 2.0]), vec![1.0, -3.0, 2.0]);
        assert_eq!(poly_div(&[1.0, -6.0, 11.0, -6.0], &[1.0, -1.0]), vec![1.0, -5.0, 6.0]);
        // z² at z0 = 1: 1 + 2(z−1) + (z−1)²
        assert_eq!(taylor(&[1.0, 0.0, 0.0], 1.0), vec![1.0, 2.0, 1.0]);
        assert_eq!(series_div(&[1.0, 0.0], &[1.0, -1.0], 3), vec![1.0, 1.0, 1.0]);
    }
}
