//! Metric-Jordan canonical forms of self-adjoint operators on E³₁.
//!
//! A self-adjoint A is brought, together with g, into a block form
//! ⊕ J_{εk}(λ): in the returned basis A is the block-diagonal matrix of
//! transposed Jordan blocks and the Gram matrix is ⊕ εS_k.  A conjugate pair
//! of complex eigenvalues α ± iβ is realized on a real orthonormal Lorentzian
//! frame (Gram diag(−1,1)) on which A acts as [[α, β], [−β, α]].
//!
//! Classification decisions are discrete, so this module works in f64.

use crate::cubic::{cubic_roots, quadratic_roots, CubicRoots};
use crate::error::{Error, Result};
use crate::minkowski::{dot, is_pseudo_orthogonal, Operator3, Vec3M};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type V = Vec3M<f64>;
type Op = Operator3<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eigen {
    Real(f64),
    /// α + iβ
    Complex(f64, f64),
}

impl Eigen {
    pub fn re(&self) -> f64 {
        match *self {
            Eigen::Real(l) => l,
            Eigen::Complex(a, _) => a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JordanBlockSpec {
    pub size: usize,
    pub sign: i8,
    pub eigen: Eigen,
}

impl JordanBlockSpec {
    pub fn real(size: usize, sign: i8, l: f64) -> Self {
        JordanBlockSpec { size, sign, eigen: Eigen::Real(l) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricJordanForm {
    pub blocks: Vec<JordanBlockSpec>,
    /// Basis vectors (columns) realizing the form, consumed block by block.
    pub basis: [V; 3],
}

/// Null vectors ∂η and ∂ξ of the lightcone frame (η = x+t, ξ = (x−t)/2).
pub fn d_eta() -> V {
    V::new(0.5, 0.5, 0.0)
}
pub fn d_xi() -> V {
    V::new(-1.0, 1.0, 0.0)
}

impl MetricJordanForm {
    /// Form with the standard realizing basis built from lightcone/Cartesian vectors.
    pub fn from_blocks(blocks: Vec<JordanBlockSpec>) -> Result<Self> {
        let basis = standard_basis(&blocks)?;
        Ok(MetricJordanForm { blocks, basis })
    }

    /// Matrix of A in `basis`.
    pub fn canonical_matrix(&self) -> Op {
        let mut m = [[0.0; 3]; 3];
        let mut i = 0;
        let mut k = 0;
        while k < self.blocks.len() {
            let b = self.blocks[k];
            match b.eigen {
                Eigen::Complex(a, bt) => {
                    m[i][i] = a;
                    m[i + 1][i + 1] = a;
                    m[i][i + 1] = bt;
                    m[i + 1][i] = -bt;
                    i += 2;
                    k += 2;
                }
                Eigen::Real(l) => {
                    for j in 0..b.size {
                        m[i + j][i + j] = l;
                        if j > 0 {
                            m[i + j][i + j - 1] = 1.0;
                        }
                    }
                    i += b.size;
                    k += 1;
                }
            }
        }
        Op::new(m)
    }

    /// Target Gram matrix ⊕ εS_k (diag(−1,1) on a complex pair).
    pub fn gram_target(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        let mut i = 0;
        let mut k = 0;
        while k < self.blocks.len() {
            let b = self.blocks[k];
            if let Eigen::Complex(..) = b.eigen {
                m[i][i] = -1.0;
                m[i + 1][i + 1] = 1.0;
                i += 2;
                k += 2;
                continue;
            }
            for j in 0..b.size {
                m[i + j][i + b.size - 1 - j] = b.sign as f64;
            }
            i += b.size;
            k += 1;
        }
        m
    }

    pub fn basis_matrix(&self) -> Op {
        Op::from_cols(self.basis)
    }

    /// B C B⁻¹.
    pub fn reassemble(&self) -> Op {
        let b = self.basis_matrix();
        b.mul(&self.canonical_matrix()).mul(&b.inverse().expect("basis is invertible"))
    }

    pub fn gram(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = dot(&self.basis[i], &self.basis[j]);
            }
        }
        m
    }

    pub fn has_j_minus_3(&self) -> bool {
        self.blocks.iter().any(|b| b.size == 3 && b.sign < 0)
    }
}

fn standard_basis(blocks: &[JordanBlockSpec]) -> Result<[V; 3]> {
    let bad = || Error::Unsupported("block list does not describe a metric-Jordan form on E³₁".into());
    if blocks.iter().any(|b| b.size == 3) {
        let b = blocks[0];
        if blocks.len() != 1 || b.sign != 1 {
            return Err(bad());
        }
        return Ok([d_eta(), V::unit(2), d_xi()]);
    }
    if let Some(b) = blocks.iter().find(|b| b.size == 2) {
        if blocks.len() != 2 || blocks[0].size != 2 || blocks[1].sign != 1 {
            return Err(bad());
        }
        let v2 = d_xi().scale(b.sign as f64);
        return Ok([d_eta(), v2, V::unit(2)]);
    }
    if matches!(blocks.first().map(|b| b.eigen), Some(Eigen::Complex(..))) {
        if blocks.len() != 3 {
            return Err(bad());
        }
        return Ok([V::unit(0), V::unit(1), V::unit(2)]);
    }
    if blocks.len() != 3 || blocks.iter().filter(|b| b.sign < 0).count() != 1 {
        return Err(bad());
    }
    let mut next_space = 1;
    let mut out = [V::zero(); 3];
    for (i, b) in blocks.iter().enumerate() {
        if b.sign < 0 {
            out[i] = V::unit(0);
        } else {
            out[i] = V::unit(next_space);
            next_space += 1;
        }
    }
    Ok(out)
}

fn cross(u: &V, v: &V) -> V {
    V::new(u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
}

/// A vector Minkowski-orthogonal to u and v.
pub fn pseudo_cross(u: &V, v: &V) -> V {
    let w = cross(u, v);
    V::new(-w[0], w[1], w[2])
}

/// Kernel direction of a rank-2 matrix (largest row cross product).
fn kernel_vector(n: &Op) -> V {
    let rows = [Vec3M(n.m[0]), Vec3M(n.m[1]), Vec3M(n.m[2])];
    let mut best = V::zero();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = cross(&rows[i], &rows[j]);
        if c.enorm() > best.enorm() {
            best = c;
        }
    }
    best.scale(1.0 / best.enorm())
}

fn normalize(v: V) -> Result<(V, i8)> {
    let n = dot(&v, &v);
    let e = v.enorm();
    if n.abs() <= 1e-10 * e * e {
        return Err(Error::DegenerateAmbiguity("null eigenvector of a diagonal block".into()));
    }
    Ok((v.scale(1.0 / n.abs().sqrt()), if n < 0.0 { -1 } else { 1 }))
}

/// Two vectors spanning the Minkowski-orthogonal complement of a non-null v,
/// orthonormalized.
fn complement_frame(v: &V) -> Result<[(V, i8); 2]> {
    let vl = V::new(-v[0], v[1], v[2]);
    // Euclidean complement of v♭
    let seed = if vl[0].abs() <= vl[1].abs() && vl[0].abs() <= vl[2].abs() {
        V::unit(0)
    } else if vl[1].abs() <= vl[2].abs() {
        V::unit(1)
    } else {
        V::unit(2)
    };
    let w1 = cross(&vl, &seed);
    let w2 = cross(&vl, &w1);
    let (a, b) = if dot(&w1, &w1).abs() / w1.edot(&w1) >= dot(&w2, &w2).abs() / w2.edot(&w2) {
        (w1, w2)
    } else {
        (w2, w1)
    };
    let (e1, s1) = normalize(a)?;
    let b = b - e1.scale(dot(&b, &e1) * s1 as f64);
    let (e2, s2) = normalize(b)?;
    Ok([(e1, s1), (e2, s2)])
}

enum Spectrum {
    Simple([f64; 3]),
    Complex { real: f64, re: f64, im: f64 },
    Double { l: f64, mu: f64 },
    Triple(f64),
}

fn spectrum(a: &Op, tol: f64) -> Result<(Spectrum, f64)> {
    let s = 1.0 + a.max_abs();
    let an = a.scale(1.0 / s);
    let cf = an.char_poly();
    let p = |z: f64| ((z + cf[0]) * z + cf[1]) * z + cf[2];
    let dp = |z: f64| (3.0 * z + 2.0 * cf[0]) * z + cf[1];
    let z3 = -cf[0] / 3.0;
    let spread = p(z3).abs().max(dp(z3).abs());
    if spread <= tol {
        return Ok((Spectrum::Triple(z3 * s), s));
    }
    if spread <= 10.0 * tol {
        return Err(Error::DegenerateAmbiguity(format!("triple-root residual {spread:.3e}")));
    }
    if let Some(crit) = quadratic_roots(2.0 * cf[0] / 3.0, cf[1] / 3.0) {
        for z in crit {
            let r = p(z).abs();
            if r <= tol {
                let mu = -cf[0] - 2.0 * z;
                return Ok((Spectrum::Double { l: z * s, mu: mu * s }, s));
            }
            if r <= 10.0 * tol {
                return Err(Error::DegenerateAmbiguity(format!("double-root residual {r:.3e}")));
            }
        }
    }
    Ok((
        match cubic_roots(cf) {
            CubicRoots::Real(r) => Spectrum::Simple([r[0] * s, r[1] * s, r[2] * s]),
            CubicRoots::Complex { real, re, im } => Spectrum::Complex { real: real * s, re: re * s, im: im * s },
        },
        s,
    ))
}

/// Numerical rank (0..=2 for the cases that occur) of N at relative threshold rt.
fn rank(n: &Op, s: f64, rt: f64) -> usize {
    if n.max_abs() <= rt * s {
        return 0;
    }
    let mut minor: f64 = 0.0;
    for (i, k) in [(0, 1), (0, 2), (1, 2)] {
        for (j, l) in [(0, 1), (0, 2), (1, 2)] {
            minor = minor.max((n.m[i][j] * n.m[k][l] - n.m[i][l] * n.m[k][j]).abs());
        }
    }
    if minor <= rt * s * s {
        1
    } else {
        2
    }
}

fn shifted(a: &Op, l: f64) -> Op {
    a.sub(&Op::identity().scale(l))
}

/// 2-cycle (v1, v2 = N v1) normalized to Gram εS₂; returns (v1, v2, ε).
fn two_cycle(n: &Op, v1: V) -> Result<(V, V, i8)> {
    let v2 = n.apply(&v1);
    let p = dot(&v1, &v2);
    if p.abs() <= 1e-12 * v1.enorm() * v2.enorm() {
        return Err(Error::DegenerateAmbiguity("2-cycle with vanishing pairing".into()));
    }
    let v1 = v1 - v2.scale(dot(&v1, &v1) / (2.0 * p));
    let mu = 1.0 / p.abs().sqrt();
    Ok((v1.scale(mu), v2.scale(mu), if p < 0.0 { -1 } else { 1 }))
}

fn by_sign_then_desc(mut v: Vec<(V, i8, f64)>) -> Vec<(V, i8, f64)> {
    v.sort_by(|a, b| a.1.cmp(&b.1).then(b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal)));
    v
}

fn diagonal_form(v: Vec<(V, i8, f64)>) -> Result<MetricJordanForm> {
    let v = by_sign_then_desc(v);
    if v.iter().filter(|x| x.1 < 0).count() != 1 {
        return Err(Error::DegenerateAmbiguity("eigenframe does not have Lorentzian signature".into()));
    }
    Ok(MetricJordanForm {
        blocks: v.iter().map(|x| JordanBlockSpec::real(1, x.1, x.2)).collect(),
        basis: [v[0].0, v[1].0, v[2].0],
    })
}

/// Metric-Jordan form of a self-adjoint operator.
pub fn metric_jordan_form(a: &Op, tol: f64) -> Result<MetricJordanForm> {
    if !a.is_self_adjoint(tol.max(1e-10)) {
        return Err(Error::NotSelfAdjoint);
    }
    // nilpotent-rank threshold; structured cases sit far from it
    let rt = tol.sqrt().max(1e-7);
    let (spec, s) = spectrum(a, tol)?;
    match spec {
        Spectrum::Simple(r) => {
            let mut v = Vec::new();
            for l in r {
                let (e, sg) = normalize(kernel_vector(&shifted(a, l)))?;
                v.push((e, sg, l));
            }
            diagonal_form(v)
        }
        Spectrum::Complex { real, re, im } => {
            let (vm, sg) = normalize(kernel_vector(&shifted(a, real)))?;
            if sg < 0 {
                return Err(Error::DegenerateAmbiguity("timelike real eigenvector beside a complex pair".into()));
            }
            let [(f0, s0), (f1, _)] = complement_frame(&vm)?;
            let (e0, e1) = if s0 < 0 { (f0, f1) } else { (f1, f0) };
            let ae0 = a.apply(&e0);
            let ae1 = a.apply(&e1);
            let (aa, bb, dd) = (-dot(&ae0, &e0), -dot(&ae1, &e0), dot(&ae1, &e1));
            let phi = 0.5 * (-(aa - dd) / (2.0 * bb)).clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh();
            let (ch, sh) = (phi.cosh(), phi.sinh());
            let g0 = e0.scale(ch) + e1.scale(sh);
            let mut g1 = e0.scale(sh) + e1.scale(ch);
            if -dot(&a.apply(&g1), &g0) < 0.0 {
                g1 = -g1;
            }
            Ok(MetricJordanForm {
                blocks: vec![
                    JordanBlockSpec { size: 1, sign: 1, eigen: Eigen::Complex(re, im) },
                    JordanBlockSpec { size: 1, sign: 1, eigen: Eigen::Complex(re, -im) },
                    JordanBlockSpec::real(1, 1, real),
                ],
                basis: [g0, g1, vm],
            })
        }
        Spectrum::Double { l, mu } => {
            let n = shifted(a, l);
            let vm = kernel_vector(&shifted(a, mu));
            match rank(&n, s, rt) {
                1 => {
                    let (vm, sm) = normalize(vm)?;
                    let [(e1, s1), (e2, s2)] = complement_frame(&vm)?;
                    diagonal_form(vec![(vm, sm, mu), (e1, s1, l), (e2, s2, l)])
                }
                _ => {
                    let (vm, sm) = normalize(vm)?;
                    if sm < 0 {
                        return Err(Error::DegenerateAmbiguity("timelike vector beside a 2-block".into()));
                    }
                    let [(w1, _), (w2, _)] = complement_frame(&vm)?;
                    let v1 = if n.apply(&w1).enorm() >= n.apply(&w2).enorm() { w1 } else { w2 };
                    let (v1, v2, eps) = two_cycle(&n, v1)?;
                    Ok(MetricJordanForm {
                        blocks: vec![JordanBlockSpec::real(2, eps, l), JordanBlockSpec::real(1, 1, mu)],
                        basis: [v1, v2, vm],
                    })
                }
            }
        }
        Spectrum::Triple(l) => {
            let n = shifted(a, l);
            match rank(&n, s, rt) {
                0 => Ok(MetricJordanForm {
                    blocks: vec![
                        JordanBlockSpec::real(1, -1, l),
                        JordanBlockSpec::real(1, 1, l),
                        JordanBlockSpec::real(1, 1, l),
                    ],
                    basis: [V::unit(0), V::unit(1), V::unit(2)],
                }),
                1 => {
                    let v1 = (0..3).map(|j| V::unit(j)).max_by(|x, y| {
                        n.apply(x).enorm().partial_cmp(&n.apply(y).enorm()).unwrap()
                    });
                    let (v1, v2, eps) = two_cycle(&n, v1.unwrap())?;
                    let (u, su) = normalize(pseudo_cross(&v1, &v2))?;
                    if su < 0 {
                        return Err(Error::DegenerateAmbiguity("timelike vector beside a 2-block".into()));
                    }
                    Ok(MetricJordanForm {
                        blocks: vec![JordanBlockSpec::real(2, eps, l), JordanBlockSpec::real(1, 1, l)],
                        basis: [v1, v2, u],
                    })
                }
                _ => {
                    let n2 = n.mul(&n);
                    let v1 = (0..3)
                        .map(|j| V::unit(j))
                        .max_by(|x, y| n2.apply(x).enorm().partial_cmp(&n2.apply(y).enorm()).unwrap())
                        .unwrap();
                    let v2 = n.apply(&v1);
                    let v3 = n.apply(&v2);
                    let sq = dot(&v2, &v2);
                    if sq <= 0.0 {
                        // J₋₃ cannot occur on E³₁
                        return Err(Error::DegenerateAmbiguity("3-cycle with non-positive middle vector".into()));
                    }
                    let al = -dot(&v1, &v2) / (2.0 * sq);
                    let v1 = v1 + v2.scale(al);
                    let bt = -dot(&v1, &v1) / (2.0 * sq);
                    let v1 = v1 + v3.scale(bt);
                    let mu = 1.0 / sq.sqrt();
                    let (v1, v2, v3) = (v1.scale(mu), v2.scale(mu), v3.scale(mu));
                    Ok(MetricJordanForm { blocks: vec![JordanBlockSpec::real(3, 1, l)], basis: [v1, v2, v3] })
                }
            }
        }
    }
}

/// q · (canonical matrix in the standard realizing basis) · q⁻¹.
pub fn synthesize_operator(form: &MetricJordanForm, q: &Op) -> Result<Op> {
    if !is_pseudo_orthogonal(q, 1e-10 * (1.0 + q.max_abs()).powi(2)) {
        return Err(Error::NotPseudoOrthogonal);
    }
    let std = MetricJordanForm::from_blocks(form.blocks.clone())?;
    let qi = q.inverse().ok_or(Error::NotPseudoOrthogonal)?;
    Ok(q.mul(&std.reassemble()).mul(&qi))
}

/// Boost of rapidity `phi` in the t–x plane, then rotation by `theta` in the
/// x–y plane, then optional reflections of t and x.
pub fn pseudo_orthogonal(phi: f64, theta: f64, flip_t: bool, flip_x: bool) -> Op {
    let (ch, sh) = (phi.cosh(), phi.sinh());
    let boost = Op::new([[ch, sh, 0.0], [sh, ch, 0.0], [0.0, 0.0, 1.0]]);
    let (c, s) = (theta.cos(), theta.sin());
    let rot = Op::new([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]);
    let refl = Op::diag([if flip_t { -1.0 } else { 1.0 }, if flip_x { -1.0 } else { 1.0 }, 1.0]);
    refl.mul(&rot).mul(&boost)
}

/// Deterministic random element of O(2,1).
pub fn random_pseudo_orthogonal(seed: u64) -> Op {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pseudo_orthogonal_rng(&mut rng)
}

pub fn random_pseudo_orthogonal_rng<R: Rng>(rng: &mut R) -> Op {
    let phi = rng.gen_range(-1.2..1.2);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    pseudo_orthogonal(phi, theta, rng.gen_bool(0.25), rng.gen_bool(0.25))
}

/// A random admissible block structure (used by the round-trip suites).
pub fn random_form<R: Rng>(rng: &mut R) -> MetricJordanForm {
    fn distinct<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| (rng.gen_range(-30..=30) as f64) / 10.0).collect();
            if (0..n).all(|i| (0..i).all(|j| (v[i] - v[j]).abs() >= 0.2)) {
                return v;
            }
        }
    }
    let kind = rng.gen_range(0..8);
    let blocks = match kind {
        0 | 1 => {
            let v = distinct(rng, 3);
            vec![JordanBlockSpec::real(1, -1, v[0]), JordanBlockSpec::real(1, 1, v[1]), JordanBlockSpec::real(1, 1, v[2])]
        }
        2 => {
            let v = distinct(rng, 2);
            // repeated eigenvalue on the timelike or on the spacelike pair
            if rng.gen_bool(0.5) {
                vec![JordanBlockSpec::real(1, -1, v[0]), JordanBlockSpec::real(1, 1, v[0]), JordanBlockSpec::real(1, 1, v[1])]
            } else {
                vec![JordanBlockSpec::real(1, -1, v[1]), JordanBlockSpec::real(1, 1, v[0]), JordanBlockSpec::real(1, 1, v[0])]
            }
        }
        3 => {
            let v = distinct(rng, 1);
            vec![JordanBlockSpec::real(1, -1, v[0]), JordanBlockSpec::real(1, 1, v[0]), JordanBlockSpec::real(1, 1, v[0])]
        }
        4 => {
            let v = distinct(rng, 2);
            let im = rng.gen_range(0.3..2.0);
            vec![
                JordanBlockSpec { size: 1, sign: 1, eigen: Eigen::Complex(v[0], im) },
                JordanBlockSpec { size: 1, sign: 1, eigen: Eigen::Complex(v[0], -im) },
                JordanBlockSpec::real(1, 1, v[1]),
            ]
        }
        5 => {
            let v = distinct(rng, 2);
            let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
            vec![JordanBlockSpec::real(2, eps, v[0]), JordanBlockSpec::real(1, 1, v[1])]
        }
        6 => {
            let v = distinct(rng, 1);
            let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
            vec![JordanBlockSpec::real(2, eps, v[0]), JordanBlockSpec::real(1, 1, v[0])]
        }
        _ => vec![JordanBlockSpec::real(3, 1, distinct(rng, 1)[0])],
    };
    MetricJordanForm::from_blocks(blocks).expect("generated forms are admissible")
}

/// Block multiset comparison: sizes and signs exactly, eigenvalues within `tol`.
pub fn same_structure(a: &[JordanBlockSpec], b: &[JordanBlockSpec], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for x in a {
        for (j, y) in b.iter().enumerate() {
            if used[j] || x.size != y.size || x.sign != y.sign {
                continue;
            }
            let close = match (x.eigen, y.eigen) {
                (Eigen::Real(p), Eigen::Real(q)) => (p - q).abs() <= tol,
                (Eigen::Complex(p, q), Eigen::Complex(r, s)) => (p - r).abs() <= tol && (q - s).abs() <= tol,
                _ => false,
            };
            if close {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_form(a: &Op, f: &MetricJordanForm) {
        let g = f.gram();
        let t = f.gram_target();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[i][j] - t[i][j]).abs() < 1e-8, "gram {g:?} vs {t:?}");
            }
        }
        let r = f.reassemble();
        assert!(r.sub(a).max_abs() < 1e-8 * (1.0 + a.max_abs()), "reassembly {r:?} vs {a:?}");
    }

    #[test]
    fn identity_form() {
        let a = Op::identity();
        let f = metric_jordan_form(&a, 1e-8).unwrap();
        assert_eq!(
            f.blocks,
            vec![JordanBlockSpec::real(1, -1, 1.0), JordanBlockSpec::real(1, 1, 1.0), JordanBlockSpec::real(1, 1, 1.0)]
        );
        check_form(&a, &f);
    }

    #[test]
    fn null_rank_one_is_plus_two_block() {
        let k = V::new(1.0, 1.0, 0.0);
        let a = Op::outer(&k, &k);
        assert_eq!(a, Op::from_f64([[-1., 1., 0.], [-1., 1., 0.], [0., 0., 0.]]));
        let f = metric_jordan_form(&a, 1e-8).unwrap();
        assert_eq!(f.blocks, vec![JordanBlockSpec::real(2, 1, 0.0), JordanBlockSpec::real(1, 1, 0.0)]);
        check_form(&a, &f);
        let f = metric_jordan_form(&a.scale(-1.0), 1e-8).unwrap();
        assert_eq!(f.blocks[0], JordanBlockSpec::real(2, -1, 0.0));
    }

    #[test]
    fn complex_pair() {
        let a = Op::from_f64([[0., 1., 0.], [-1., 0., 0.], [0., 0., 2.]]);
        let f = metric_jordan_form(&a, 1e-8).unwrap();
        assert_eq!(f.blocks.len(), 3);
        assert_eq!(f.blocks[0].eigen, Eigen::Complex(0.0, 1.0));
        assert_eq!(f.blocks[1].eigen, Eigen::Complex(0.0, -1.0));
        assert_eq!(f.blocks[2], JordanBlockSpec::real(1, 1, 2.0));
        check_form(&a, &f);
    }

    #[test]
    fn three_block() {
        let a = Op::from_f64([[0., 0., -1.], [0., 0., 1.], [1., 1., 0.]]);
        let f = metric_jordan_form(&a, 1e-8).unwrap();
        assert_eq!(f.blocks, vec![JordanBlockSpec::real(3, 1, 0.0)]);
        check_form(&a, &f);
    }

    #[test]
    fn not_self_adjoint() {
        let boost = Op::from_f64([[0., 1., 0.], [1., 0., 0.], [0., 0., 0.]]);
        assert_eq!(metric_jordan_form(&boost, 1e-8), Err(Error::NotSelfAdjoint));
    }

    #[test]
    fn synthesize_identity_q_gives_canonical() {
        let f = MetricJordanForm::from_blocks(vec![
            JordanBlockSpec::real(1, -1, 1.0),
            JordanBlockSpec::real(1, 1, 2.0),
            JordanBlockSpec::real(1, 1, 3.0),
        ])
        .unwrap();
        let a = synthesize_operator(&f, &Op::identity()).unwrap();
        assert_eq!(a, Op::diag([1.0, 2.0, 3.0]));
        let b = synthesize_operator(&f, &pseudo_orthogonal(0.5, 0.0, false, false)).unwrap();
        if let CubicRoots::Real(r) = cubic_roots(b.char_poly()) {
            for (x, y) in r.iter().zip([3.0, 2.0, 1.0]) {
                assert!((x - y).abs() < 1e-12);
            }
        } else {
            panic!()
        }
        assert!(synthesize_operator(&f, &Op::diag([2.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn pseudo_orthogonal_properties() {
        assert_eq!(pseudo_orthogonal(0.0, 0.0, false, false), Op::identity());
        for seed in 0..20 {
            let q = random_pseudo_orthogonal(seed);
            assert!(is_pseudo_orthogonal(&q, 1e-12));
            assert!((q.det().abs() - 1.0).abs() < 1e-10);
            assert_eq!(q, random_pseudo_orthogonal(seed));
        }
    }

    #[test]
    fn round_trip_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let f = random_form(&mut rng);
            let q = random_pseudo_orthogonal_rng(&mut rng);
            let a = synthesize_operator(&f, &q).unwrap();
            let g = metric_jordan_form(&a, 1e-8).unwrap();
            assert!(same_structure(&f.blocks, &g.blocks, 1e-6), "{:?} vs {:?}", f.blocks, g.blocks);
            check_form(&a, &g);
        }
    }
}
