//! Concircular tensors L = A + 2w⊙r + m r⊙r and their canonical forms.

use crate::cubic::{cubic_roots, quadratic_roots, CubicRoots};
use crate::error::{Error, Result};
use crate::jordan::{d_eta, d_xi, metric_jordan_form, pseudo_cross, Eigen, MetricJordanForm};
use crate::minkowski::{dot, Operator3, SymBilinear, Vec3M};
use crate::scalar::{c, Scalar};

type V = Vec3M<f64>;
type Op = Operator3<f64>;

/// Clustering threshold for eigenvalue multiplicities.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcircularTensor<T> {
    /// Mixed-index constant part.
    pub a: Operator3<T>,
    pub w: Vec3M<T>,
    pub m: T,
}

impl<T: Scalar> ConcircularTensor<T> {
    /// Validating constructor.
    pub fn new(a: Operator3<T>, w: Vec3M<T>, m: T) -> Result<Self> {
        if !a.is_self_adjoint(1e-10) {
            return Err(Error::NotSelfAdjoint);
        }
        Ok(ConcircularTensor { a, w, m })
    }

    pub fn constant(a: Operator3<T>) -> Self {
        ConcircularTensor { a, w: Vec3M::zero(), m: T::zero() }
    }

    /// Mixed operator A + w⊗p♭ + p⊗w♭ + m p⊗p♭.
    pub fn evaluate(&self, p: &Vec3M<T>) -> Operator3<T> {
        self.a
            .add(&Operator3::outer(&self.w, p))
            .add(&Operator3::outer(p, &self.w))
            .add(&Operator3::outer(p, p).scale(self.m))
    }

    /// Covariant components at p.
    pub fn covariant(&self, p: &Vec3M<T>) -> SymBilinear<T> {
        self.evaluate(p).lower()
    }

    /// The same tensor field written around the new origin o: L'(p') = L(p' + o).
    pub fn translated(&self, o: &Vec3M<T>) -> Self {
        let a = self
            .a
            .add(&Operator3::outer(&self.w, o))
            .add(&Operator3::outer(o, &self.w))
            .add(&Operator3::outer(o, o).scale(self.m));
        ConcircularTensor { a, w: self.w + o.scale(self.m), m: self.m }
    }

    /// a·L + b·g.
    pub fn affine(&self, a: T, b: T) -> Self {
        ConcircularTensor {
            a: self.a.scale(a).add(&Operator3::identity().scale(b)),
            w: self.w.scale(a),
            m: self.m * a,
        }
    }

    /// Push-forward by a linear isometry Λ: (Λ⁻¹)*L.
    pub fn transformed(&self, lam: &Operator3<T>) -> Self {
        let inv = lam.inverse().expect("isometries are invertible");
        ConcircularTensor { a: lam.mul(&self.a).mul(&inv), w: lam.apply(&self.w), m: self.m }
    }

    pub fn to_f64(&self) -> ConcircularTensor<f64> {
        ConcircularTensor { a: self.a.to_f64(), w: self.w.to_f64(), m: self.m.value() }
    }

    pub fn from_f64(l: &ConcircularTensor<f64>) -> Self {
        ConcircularTensor { a: Operator3::from_f64(l.a.m), w: Vec3M::from_f64(l.w.0), m: T::cst(l.m) }
    }

    fn scale_f64(&self) -> f64 {
        1.0 + self.a.max_abs().value().max(self.w.max_abs().value()).max(self.m.abs().value())
    }
}

pub fn evaluate_ct<T: Scalar>(l: &ConcircularTensor<T>, p: &Vec3M<T>) -> Operator3<T> {
    l.evaluate(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CTClass {
    Cartesian,
    Central,
    NonNullAxial { eps: i8 },
    NullAxial { k: u8, eps: i8 },
}

impl CTClass {
    pub fn tag(&self) -> &'static str {
        match self {
            CTClass::Cartesian => "cartesian",
            CTClass::Central => "central",
            CTClass::NonNullAxial { .. } => "non_null_axial",
            CTClass::NullAxial { .. } => "null_axial",
        }
    }
    pub fn eps(&self) -> i8 {
        match *self {
            CTClass::NonNullAxial { eps } | CTClass::NullAxial { eps, .. } => eps,
            _ => 1,
        }
    }
    pub fn k(&self) -> u8 {
        match *self {
            CTClass::NonNullAxial { .. } => 1,
            CTClass::NullAxial { k, .. } => k,
            _ => 0,
        }
    }
}

/// Classification result. The canonical tensor is
/// `scale·Λ_*(L translated to origin_shift) + metric_shift·g`, Λ = `frame`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalCT {
    pub class: CTClass,
    pub canonical_a: Op,
    pub canonical_w: V,
    pub canonical_m: f64,
    pub origin_shift: V,
    pub scale: f64,
    pub metric_shift: f64,
    pub frame: Op,
    pub trivial: bool,
    /// Metric-Jordan form of A restricted to D⊥ (absent for the 3-block null case).
    pub jordan: Option<MetricJordanForm>,
}

impl CanonicalCT {
    pub fn tensor(&self) -> ConcircularTensor<f64> {
        ConcircularTensor { a: self.canonical_a, w: self.canonical_w, m: self.canonical_m }
    }

    /// Applies the recorded equivalence to `l`.
    pub fn apply(&self, l: &ConcircularTensor<f64>) -> ConcircularTensor<f64> {
        l.translated(&self.origin_shift).affine(self.scale, self.metric_shift).transformed(&self.frame)
    }

    /// Maps an original point to canonical coordinates.
    pub fn to_canonical(&self, p: &V) -> V {
        self.frame.apply(&(*p - self.origin_shift))
    }
}

fn frame_for(form: &MetricJordanForm) -> Result<Op> {
    let std = MetricJordanForm::from_blocks(form.blocks.clone())?;
    let b = form.basis_matrix().inverse().ok_or(Error::DegenerateSubspace)?;
    Ok(std.basis_matrix().mul(&b))
}

fn reflect_onto(frame: Op, img: V, axis: usize) -> Op {
    if img[axis] < 0.0 {
        let mut d = [1.0; 3];
        d[axis] = -1.0;
        Op::diag(d).mul(&frame)
    } else {
        frame
    }
}

/// Gram matrix solve: the vector o in span(n) with ⟨o, n_j⟩ = rhs_j.
fn from_pairings(n: [V; 3], rhs: [f64; 3]) -> Result<V> {
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = dot(&n[i], &n[j]);
        }
    }
    let gi = Op::new(g).inverse().ok_or(Error::DegenerateAmbiguity("degenerate skew-normal span".into()))?;
    let c = gi.apply(&V::new(rhs[0], rhs[1], rhs[2]));
    Ok(n[0].scale(c[0]) + n[1].scale(c[1]) + n[2].scale(c[2]))
}

/// Classifies a concircular tensor into its canonical form.
pub fn classify_ct(l: &ConcircularTensor<f64>) -> Result<CanonicalCT> {
    classify_ct_tol(l, CLUSTER_TOL)
}

pub fn classify_ct_tol(l: &ConcircularTensor<f64>, tol: f64) -> Result<CanonicalCT> {
    if !l.a.is_self_adjoint(1e-10) {
        return Err(Error::NotSelfAdjoint);
    }
    let s = l.scale_f64();
    let small = |x: f64| x.abs() <= 1e-10 * s;
    let w_zero = l.w.max_abs() <= 1e-10 * s;

    if !small(l.m) {
        let o = l.w.scale(-1.0 / l.m);
        let a = 1.0 / l.m;
        let shifted = l.translated(&o).affine(a, 0.0);
        let form = metric_jordan_form(&shifted.a, tol)?;
        let frame = frame_for(&form)?;
        let canon = shifted.transformed(&frame);
        return Ok(CanonicalCT {
            class: CTClass::Central,
            canonical_a: canon.a,
            canonical_w: V::zero(),
            canonical_m: 1.0,
            origin_shift: o,
            scale: a,
            metric_shift: 0.0,
            frame,
            trivial: false,
            jordan: Some(form),
        });
    }

    if w_zero {
        let form = metric_jordan_form(&l.a, tol)?;
        let frame = frame_for(&form)?;
        let canon = l.transformed(&frame);
        let tr = l.a.trace() / 3.0;
        let trivial = l.a.sub(&Op::identity().scale(tr)).max_abs() <= 1e-10 * s;
        return Ok(CanonicalCT {
            class: CTClass::Cartesian,
            canonical_a: canon.a,
            canonical_w: V::zero(),
            canonical_m: 0.0,
            origin_shift: V::zero(),
            scale: 1.0,
            metric_shift: 0.0,
            frame,
            trivial,
            jordan: Some(form),
        });
    }

    let ww = dot(&l.w, &l.w);
    if ww.abs() > 1e-10 * l.w.edot(&l.w) {
        // non-null axis: normalize w, then translate/shift so that A e₁ = 0
        let eps: i8 = if ww < 0.0 { -1 } else { 1 };
        let a = 1.0 / ww.abs().sqrt();
        let ls = l.affine(a, 0.0);
        let e1 = ls.w;
        let ae1 = ls.a.apply(&e1);
        let o = ae1.scale(-(eps as f64));
        let b = eps as f64 * dot(&ae1, &e1);
        let shifted = ls.translated(&o).affine(1.0, b);
        // separate the axis eigenvalue from the complement spectrum
        let mu = -(1.0 + 10.0 * shifted.a.max_abs());
        let aux = shifted.a.add(&Op::outer(&e1, &e1).scale(mu * eps as f64));
        let form = metric_jordan_form(&aux, tol)?;
        let axis = if eps < 0 { 0 } else { 2 };
        let frame = frame_for(&form)?;
        let frame = reflect_onto(frame, frame.apply(&e1), axis);
        let canon = shifted.transformed(&frame);
        // complement form without the auxiliary axis block
        let comp = restrict_form(&form, mu);
        return Ok(CanonicalCT {
            class: CTClass::NonNullAxial { eps },
            canonical_a: canon.a,
            canonical_w: canon.w,
            canonical_m: 0.0,
            origin_shift: o,
            scale: a,
            metric_shift: b,
            frame,
            trivial: false,
            jordan: Some(comp),
        });
    }

    // null axis
    let w = l.w;
    let aw = l.a.apply(&w);
    let q = dot(&w, &aw);
    let rel = w.edot(&w) * (1.0 + l.a.max_abs());
    if q.abs() > 1e-8 * rel {
        // k = 2: chain (w, A'w) and an eigenvector n of the complement
        let a2w = l.a.apply(&aw);
        let n = pseudo_cross(&w, &aw);
        let nn = dot(&n, &n);
        if nn <= 0.0 {
            return Err(Error::DegenerateAmbiguity("null axis with non-spacelike complement".into()));
        }
        let lam_n = dot(&l.a.apply(&n), &n) / nn;
        // A²w = αw + βAw
        let beta = dot(&a2w, &w) / q;
        let alpha = (dot(&a2w, &aw) - beta * dot(&aw, &aw)) / q;
        let r = dot(&aw, &aw);
        let b = -lam_n;
        let sigma = -beta / 2.0;
        let y = (sigma - b) / q;
        let x = (-beta * beta / 4.0 - alpha - y * r) / (2.0 * q);
        let o = w.scale(x) + aw.scale(y);
        let shifted = l.translated(&o).affine(1.0, b);
        let sc = q.signum() * q.abs().powf(-1.0 / 3.0);
        let canon0 = shifted.affine(sc, 0.0);
        let e1 = canon0.w;
        let e2 = canon0.a.apply(&e1);
        let n_hat = n.scale(1.0 / nn.sqrt());
        let src = Op::from_cols([e1, e2, n_hat]);
        let dst = Op::from_cols([d_eta(), d_xi(), V::unit(2)]);
        let frame = dst.mul(&src.inverse().ok_or(Error::DegenerateAmbiguity("null 2-chain".into()))?);
        let canon = canon0.transformed(&frame);
        return Ok(CanonicalCT {
            class: CTClass::NullAxial { k: 2, eps: 1 },
            canonical_a: canon.a,
            canonical_w: canon.w,
            canonical_m: 0.0,
            origin_shift: o,
            scale: sc,
            metric_shift: b * sc,
            frame,
            trivial: false,
            jordan: Some(MetricJordanForm {
                blocks: vec![crate::jordan::JordanBlockSpec::real(1, 1, 0.0)],
                basis: [V::unit(2), V::zero(), V::zero()],
            }),
        });
    }

    // k = 3: ⟨w,Aw⟩ = 0 and r = ⟨Aw,Aw⟩ > 0
    let a2w = l.a.apply(&aw);
    let r = dot(&aw, &aw);
    if r <= 1e-8 * rel * (1.0 + l.a.max_abs()) {
        return Err(Error::DegenerateAmbiguity("null axis without a skew-normal 3-chain".into()));
    }
    let c3 = dot(&aw, &a2w);
    let c4 = dot(&a2w, &a2w);
    let sigma = -c3 / (2.0 * r);
    let tau = -(c4 + 2.0 * sigma * c3 + sigma * sigma * r) / (2.0 * r);
    let basis = [w, aw, a2w];
    let mu5 = |zeta: f64| -> Result<(f64, V)> {
        let o = from_pairings(basis, [sigma, tau - sigma * sigma, zeta])?;
        let ap = l.translated(&o).a;
        let v1 = ap.apply(&w);
        let v2 = ap.apply(&v1);
        Ok((dot(&v2, &ap.apply(&v2)), o))
    };
    let (f0, _) = mu5(0.0)?;
    let (f1, _) = mu5(1.0)?;
    let zeta = -f0 / (f1 - f0);
    let (_, o) = mu5(zeta)?;
    let shifted = l.translated(&o);
    let sc = r.powf(-0.25);
    let canon0 = shifted.affine(sc, 0.0);
    let e1 = canon0.w;
    let e2 = canon0.a.apply(&e1);
    let e3 = canon0.a.apply(&e2);
    let src = Op::from_cols([e1, e2, e3]);
    let dst = Op::from_cols([d_eta(), V::unit(2), d_xi()]);
    let frame = dst.mul(&src.inverse().ok_or(Error::DegenerateAmbiguity("null 3-chain".into()))?);
    let canon = canon0.transformed(&frame);
    Ok(CanonicalCT {
        class: CTClass::NullAxial { k: 3, eps: 1 },
        canonical_a: canon.a,
        canonical_w: canon.w,
        canonical_m: 0.0,
        origin_shift: o,
        scale: sc,
        metric_shift: 0.0,
        frame,
        trivial: false,
        jordan: None,
    })
}

/// Drops the auxiliary axis block (eigenvalue `mu`) from a non-null axial form.
fn restrict_form(form: &MetricJordanForm, mu: f64) -> MetricJordanForm {
    let mut blocks = Vec::new();
    let mut basis = Vec::new();
    let mut i = 0;
    for b in &form.blocks {
        let n = if matches!(b.eigen, Eigen::Complex(..)) { 1 } else { b.size };
        let skip = b.size == 1 && matches!(b.eigen, Eigen::Real(l) if (l - mu).abs() < 1e-6 * (1.0 + mu.abs()));
        if !skip {
            blocks.push(*b);
            basis.extend_from_slice(&form.basis[i..i + n]);
        }
        i += n;
    }
    basis.resize(3, V::zero());
    MetricJordanForm { blocks, basis: [basis[0], basis[1], basis[2]] }
}

/// Whether A_c has an eigenvalue with a multidimensional eigenspace.
pub fn is_reducible(l: &ConcircularTensor<f64>) -> Result<bool> {
    let s = l.scale_f64();
    if l.m.abs() <= 1e-10 * s && l.w.max_abs() <= 1e-10 * s {
        return Ok(true);
    }
    let c = classify_ct(l)?;
    Ok(match c.class {
        CTClass::NullAxial { .. } => false,
        CTClass::NonNullAxial { .. } => {
            let f = c.jordan.as_ref().expect("axial form");
            f.blocks.len() == 2 && f.blocks.iter().all(|b| b.size == 1 && b.eigen == f.blocks[0].eigen)
        }
        _ => repeated_geometric(c.jordan.as_ref().expect("central form")),
    })
}

fn repeated_geometric(f: &MetricJordanForm) -> bool {
    let reals: Vec<f64> = f
        .blocks
        .iter()
        .filter_map(|b| match b.eigen {
            Eigen::Real(l) => Some(l),
            _ => None,
        })
        .collect();
    (0..reals.len()).any(|i| (0..i).any(|j| (reals[i] - reals[j]).abs() <= 1e-9 * (1.0 + reals[i].abs())))
}

/// Characteristic polynomials attached to a canonical CT.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPolySet {
    /// Monic coefficients, highest degree first (leading 1 included).
    pub b: Vec<f64>,
    /// (c2, c1, c0) of det(zI − L_p).
    pub p_at_point: [f64; 3],
    pub d_dim: usize,
}

impl CharPolySet {
    pub fn eval_b(&self, z: f64) -> f64 {
        self.b.iter().fold(0.0, |acc, c| acc * z + c)
    }
    pub fn eval_p(&self, z: f64) -> f64 {
        let c = self.p_at_point;
        ((z + c[0]) * z + c[1]) * z + c[2]
    }
}

/// D = span{w, Aw, A²w} and B(z) = det(zI − A|D⊥), evaluated on the canonical tensor.
pub fn char_polys(c: &CanonicalCT, p: &V) -> CharPolySet {
    let l = c.tensor();
    let p_at_point = char_poly_at(&l, p);
    let w = l.w;
    let mut d: Vec<V> = Vec::new();
    let mut v = w;
    for _ in 0..3 {
        let mut r = v;
        for e in &d {
            r = r - e.scale(r.edot(e));
        }
        if r.enorm() > 1e-9 * (1.0 + v.enorm()) {
            d.push(r.scale(1.0 / r.enorm()));
        }
        v = l.a.apply(&v);
    }
    let d_dim = d.len();
    // Euclidean basis of D⊥ = (g D)^⊥E
    let mut span: Vec<V> = Vec::new();
    let mut perp: Vec<V> = Vec::new();
    let cands = d.iter().map(|e| (V::new(-e[0], e[1], e[2]), true)).chain((0..3).map(|k| (V::unit(k), false)));
    for (v, in_gd) in cands {
        let mut r = v;
        for e in span.iter().chain(perp.iter()) {
            r = r - e.scale(r.edot(e));
        }
        if r.enorm() > 1e-6 && span.len() + perp.len() < 3 {
            let r = r.scale(1.0 / r.enorm());
            if in_gd {
                span.push(r);
            } else {
                perp.push(r);
            }
        }
    }
    let b = match perp.len() {
        0 => vec![1.0],
        1 => {
            let f = perp[0];
            let lam = dot(&l.a.apply(&f), &f) / dot(&f, &f);
            vec![1.0, -lam]
        }
        2 => {
            // matrix of A on span(f1,f2) via the induced Gram matrix
            let f = [perp[0], perp[1]];
            let g = [[dot(&f[0], &f[0]), dot(&f[0], &f[1])], [dot(&f[1], &f[0]), dot(&f[1], &f[1])]];
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let gi = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
            let mut h = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] = dot(&f[i], &l.a.apply(&f[j]));
                }
            }
            let mut m = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = gi[i][0] * h[0][j] + gi[i][1] * h[1][j];
                }
            }
            vec![1.0, -(m[0][0] + m[1][1]), m[0][0] * m[1][1] - m[0][1] * m[1][0]]
        }
        _ => {
            let cp = l.a.char_poly();
            vec![1.0, cp[0], cp[1], cp[2]]
        }
    };
    CharPolySet { b, p_at_point, d_dim }
}

/// Coefficients [c₂, c₁, c₀] of det(zI − L_p).
///
/// They are quadratic in p (the rank-two part of L has vanishing determinant),
/// so they are interpolated from unit-scale evaluations and then evaluated at
/// p. Forming L_p first loses ~|p|⁶·ε in the determinant once |p| is large;
/// this way the error stays at ~|p|²·ε.
pub fn char_poly_at<T: Scalar>(l: &ConcircularTensor<T>, p: &Vec3M<T>) -> [T; 3] {
    let at = |q: [f64; 3]| l.evaluate(&Vec3M::from_f64(q)).char_poly();
    let c0 = at([0.0; 3]);
    let mut plus = [[T::zero(); 3]; 3];
    let mut minus = [[T::zero(); 3]; 3];
    for i in 0..3 {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        plus[i] = at(e);
        e[i] = -1.0;
        minus[i] = at(e);
    }
    let half: T = c(0.5);
    let mut out = c0;
    for k in 0..3 {
        let mut v = c0[k];
        for i in 0..3 {
            let lin = (plus[i][k] - minus[i][k]) * half;
            let quad = (plus[i][k] + minus[i][k]) * half - c0[k];
            v = v + lin * p[i] + quad * p[i] * p[i];
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let mut e = [0.0; 3];
                e[i] = 1.0;
                e[j] = 1.0;
                let cross = at(e)[k] - plus[i][k] - plus[j][k] + c0[k];
                v = v + cross * p[i] * p[j];
            }
        }
        out[k] = v;
    }
    out
}

/// Eigenvalues of L at p, descending.
pub fn point_eigenvalues<T: Scalar>(l: &ConcircularTensor<T>, p: &Vec3M<T>) -> Result<[T; 3]> {
    match cubic_roots(char_poly_at(l, p)) {
        CubicRoots::Real(r) => Ok(r),
        CubicRoots::Complex { .. } => Err(Error::ComplexSpectrum),
    }
}

/// Real roots of a monic polynomial of degree ≤ 3 (coefficients highest first).
pub fn monic_real_roots(b: &[f64]) -> Option<Vec<f64>> {
    match b.len() {
        1 => Some(vec![]),
        2 => Some(vec![-b[1]]),
        3 => quadratic_roots(b[1], b[2]).map(|r| r.to_vec()),
        _ => match cubic_roots([b[1], b[2], b[3]]) {
            CubicRoots::Real(r) => Some(r.to_vec()),
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // exact integer characteristic polynomial of an integer matrix
    fn exact_char_poly(m: [[i128; 3]; 3]) -> [i128; 3] {
        let tr = m[0][0] + m[1][1] + m[2][2];
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        [-tr, minors, -det]
    }

    #[test]
    fn char_poly_far_from_origin() {
        // integer data, so the exact polynomial is available in i128
        let a = [[0i128, 0, -1], [0, 0, 1], [1, 1, 0]];
        let w = [1i128, 2, -1];
        let p = [123_457i128, -123_001, 9_876];
        let g = [-1i128, 1, 1];
        let wl: Vec<i128> = (0..3).map(|i| g[i] * w[i]).collect();
        let pl: Vec<i128> = (0..3).map(|i| g[i] * p[i]).collect();
        let mut m = a;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w[i] * pl[j] + p[i] * wl[j] + 3 * p[i] * pl[j];
            }
        }
        let exact = exact_char_poly(m);
        let l = ConcircularTensor::new(
            Operator3::from_f64(a.map(|r| r.map(|x| x as f64))),
            V::from_f64(w.map(|x| x as f64)),
            3.0,
        )
        .unwrap();
        let cp = char_poly_at(&l, &V::from_f64(p.map(|x| x as f64)));
        for k in 0..3 {
            let e = exact[k] as f64;
            assert!((cp[k] - e).abs() <= 1e-12 * e.abs().max(1.0), "{k}: {} vs {e}", cp[k]);
        }
        // near the origin both routes agree
        let q = V::new(0.3, -0.7, 1.1);
        let naive = l.evaluate(&q).char_poly();
        let cp = char_poly_at(&l, &q);
        for k in 0..3 {
            assert!((cp[k] - naive[k]).abs() < 1e-12);
        }
    }

    fn ct(a: [[f64; 3]; 3], w: [f64; 3], m: f64) -> ConcircularTensor<f64> {
        ConcircularTensor::new(Op::new(a), V::new(w[0], w[1], w[2]), m).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let l = ct([[0.0; 3]; 3], [0.0; 3], 1.0);
        let e = l.evaluate(&V::new(1.0, 0.0, 0.0));
        assert_eq!(e, Op::new([[-1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]));
        let l = ct([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]], [0.0; 3], 0.0);
        assert_eq!(l.evaluate(&V::new(3.0, -1.0, 0.2)), Op::diag([0.0, 1.0, 2.0]));
        let s = 0.375f64.sqrt();
        let l = ct([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 2.0]], [1.0, 0.0, 0.0], 0.0);
        let e = l.evaluate(&V::new(-1.5, s, s));
        let want = Op::new([[3.0, s, s], [-s, 0.0, 0.0], [-s, 0.0, 2.0]]);
        assert!(e.sub(&want).max_abs() < 1e-15);
        let cp = e.char_poly();
        for (x, y) in cp.iter().zip([-5.0, 6.75, -0.75]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify_ct(&ct([[0.0; 3]; 3], [0.0; 3], 1.0)).unwrap();
        assert_eq!(c.class, CTClass::Central);
        assert_eq!(c.class.eps(), 1);
        let c = classify_ct(&ct([[0.0; 3]; 3], [0.0, 0.0, 1.0], 0.0)).unwrap();
        assert_eq!(c.class, CTClass::NonNullAxial { eps: 1 });
        let c = classify_ct(&ct(Op::identity().scale(2.5).m, [0.0; 3], 0.0)).unwrap();
        assert_eq!(c.class, CTClass::Cartesian);
        assert!(c.trivial);
        let c = classify_ct(&ct([[0.0; 3]; 3], [0.0, 0.0, 1.0], 1.0)).unwrap();
        assert_eq!(c.class, CTClass::Central);
        assert_eq!(c.origin_shift, V::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn null_axial_forms() {
        let l44 = ct([[-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [0.0; 3]], [0.5, 0.5, 0.0], 0.0);
        let c = classify_ct(&l44).unwrap();
        assert_eq!(c.class, CTClass::NullAxial { k: 2, eps: 1 });
        assert!(c.apply(&l44).a.sub(&c.canonical_a).max_abs() < 1e-12);
        let l45 = ct([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]], [0.5, 0.5, 0.0], 0.0);
        let c = classify_ct(&l45).unwrap();
        assert_eq!(c.class, CTClass::NullAxial { k: 3, eps: 1 });
        assert!(c.canonical_a.sub(&l45.a).max_abs() < 1e-10, "{:?}", c.canonical_a);
        assert!((c.canonical_w - l45.w).max_abs() < 1e-10);
    }

    #[test]
    fn reducibility() {
        assert!(!is_reducible(&ct([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]], [0.0; 3], 1.0)).unwrap());
        assert!(is_reducible(&ct([[0.0; 3]; 3], [0.0; 3], 1.0)).unwrap());
        assert!(is_reducible(&ct([[0.0; 3]; 3], [0.0, 0.0, 1.0], 0.0)).unwrap());
        assert!(is_reducible(&ct(Op::diag([1.0, 0.0, 0.0]).m, [0.0; 3], 0.0)).unwrap());
    }

    #[test]
    fn char_poly_examples() {
        let c = classify_ct(&ct([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]], [0.0; 3], 1.0)).unwrap();
        let cp = char_polys(&c, &V::new(0.3, 0.1, 0.2));
        assert_eq!(cp.d_dim, 0);
        assert!(cp.b.iter().zip([1.0, -3.0, 2.0, 0.0]).all(|(x, y)| (x - y).abs() < 1e-12));
        let c = classify_ct(&ct([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 2.0]], [1.0, 0.0, 0.0], 0.0)).unwrap();
        let cp = char_polys(&c, &V::new(0.3, 0.1, 0.2));
        assert_eq!(cp.d_dim, 1);
        assert!(cp.b.iter().zip([1.0, -2.0, 0.0]).all(|(x, y)| (x - y).abs() < 1e-12), "{:?}", cp.b);
    }

    #[test]
    fn eigenvalue_examples() {
        let l = ct([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]], [0.0; 3], 1.0);
        let e = point_eigenvalues(&l, &V::new(1.5, 2f64.sqrt(), 0.75f64.sqrt())).unwrap();
        for (x, y) in e.iter().zip([3.0, 1.5, -1.0]) {
            assert!((x - y).abs() < 1e-9);
        }
        let l = ct([[0.0; 3]; 3], [0.0; 3], 1.0);
        let p = V::new(0.4, 1.0, -0.3);
        let e = point_eigenvalues(&l, &p).unwrap();
        assert!((e[0] - dot(&p, &p)).abs() < 1e-12 && e[1].abs() < 1e-7 && e[2].abs() < 1e-7);
    }
}
