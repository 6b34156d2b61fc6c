//! Warped products of E³₁ and the decomposition of reducible concircular
//! tensors into them.
//!
//! Only two-factor products occur in three dimensions, apart from Cartesian
//! products of eigenspaces of a constant tensor, which may have three flat
//! factors. All vectors live in the original Cartesian frame; `origin` is the
//! affine point the canonical-form warped product is built around.

use crate::concircular::{classify_ct, CTClass, ConcircularTensor};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::minkowski::{dot, lower, Operator3, SymBilinear, Vec3M};
use crate::scalar::{c, Scalar};

type V = Vec3M<f64>;

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub basis: Vec<V>,
    pub a: V,
}

/// (p̄; V₀ ⊥ V₁ ⊥ …; a₁, …) in canonical form, around `origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub origin: V,
    pub pbar: V,
    pub v0: Vec<V>,
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SphereSpec {
    Flat { base: V, basis: Vec<V> },
    ConstCurv { center: V, curvature: f64, a: V, basis: Vec<V> },
    Parabolic { base: V, a: V, basis: Vec<V> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapForm {
    Cartesian,
    NonNull,
    Null,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarpedProduct {
    pub data: InitialData,
    pub spheres: Vec<SphereSpec>,
    pub form: MapForm,
    /// Orthonormal-ish basis of W₀ (empty when W₀ = 0).
    pub w0: Vec<V>,
    /// Null companion b with ⟨a₁, b⟩ = 1, for the null form.
    pub b: Option<V>,
}

/// L restricted to the geodesic factor: the tensor (about `origin`) acting on V₀.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedCT {
    pub basis: Vec<V>,
    pub tensor: ConcircularTensor<f64>,
}

fn scale_of(vs: &[V]) -> f64 {
    vs.iter().fold(1.0f64, |m, v| m.max(v.max_abs()))
}

fn gram<T: Scalar>(b: &[Vec3M<T>]) -> Vec<Vec<T>> {
    b.iter().map(|x| b.iter().map(|y| dot(x, y)).collect()).collect()
}

/// Gaussian elimination with partial pivoting on a tiny system.
fn solve_small<T: Scalar>(mut m: Vec<Vec<T>>, mut r: Vec<T>) -> Option<Vec<T>> {
    let n = r.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.value().abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].value().abs().total_cmp(&m[j][col].value().abs()))?;
        if m[piv][col].value().abs() <= 1e-12 * scale.max(1e-300) {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for i in col + 1..n {
            let f = m[i][col] / m[col][col];
            for j in col..n {
                m[i][j] = m[i][j] - f * m[col][j];
            }
            r[i] = r[i] - f * r[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = r[i];
        for j in i + 1..n {
            s = s - m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

fn cross(a: &V, b: &V) -> V {
    V::new(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
}

fn normalize_e(v: V) -> V {
    v.scale(1.0 / v.enorm())
}

/// Euclidean rank-revealing reduction of a spanning list.
fn independent(vs: &[V]) -> Vec<V> {
    let mut out: Vec<V> = Vec::new();
    for v in vs {
        let mut u = *v;
        for o in &out {
            u = u - o.scale(u.edot(o));
        }
        if u.enorm() > TOL * (1.0 + v.enorm()) {
            out.push(normalize_e(u));
        }
    }
    out
}

/// Metric-orthogonal complement of span(vs), as a Euclidean-orthonormal basis.
pub fn perp(vs: &[V]) -> Vec<V> {
    let rows: Vec<V> = independent(&vs.iter().map(|v| V::from_f64(lower(v))).collect::<Vec<_>>());
    match rows.len() {
        0 => vec![V::unit(0), V::unit(1), V::unit(2)],
        1 => {
            let r = rows[0];
            let k = (0..3).min_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs())).unwrap();
            let u = normalize_e(cross(&r, &V::unit(k)));
            vec![u, normalize_e(cross(&r, &u))]
        }
        2 => vec![normalize_e(cross(&rows[0], &rows[1]))],
        _ => vec![],
    }
}

fn is_degenerate(b: &[V]) -> bool {
    if b.is_empty() {
        return false;
    }
    let g = gram(b);
    let s = scale_of(b).powi(2);
    match b.len() {
        1 => g[0][0].abs() <= TOL * s,
        2 => (g[0][0] * g[1][1] - g[0][1] * g[1][0]).abs() <= TOL * s * s,
        _ => Operator3::new([
            [g[0][0], g[0][1], g[0][2]],
            [g[1][0], g[1][1], g[1][2]],
            [g[2][0], g[2][1], g[2][2]],
        ])
        .det()
        .abs()
            <= TOL * s * s * s,
    }
}

/// Metric-orthogonal projection onto span(b), b non-degenerate.
pub fn project<T: Scalar>(b: &[V], v: &Vec3M<T>) -> Result<Vec3M<T>> {
    if b.is_empty() {
        return Ok(Vec3M::zero());
    }
    let bt: Vec<Vec3M<T>> = b.iter().map(|x| Vec3M::from_f64(x.0)).collect();
    let g = gram(&bt);
    let r: Vec<T> = bt.iter().map(|x| dot(x, v)).collect();
    let k = solve_small(g, r).ok_or(Error::DegenerateSubspace)?;
    Ok(bt.iter().zip(&k).fold(Vec3M::zero(), |acc, (x, s)| acc + x.scale(*s)))
}

/// The sphere N determined by (p̄; V; a).
pub fn sphere_from_triple(pbar: &V, basis: &[V], a: &V) -> Result<SphereSpec> {
    if basis.is_empty() || is_degenerate(basis) {
        return Err(Error::DegenerateSubspace);
    }
    let sc = scale_of(&[*a]);
    if a.max_abs() <= TOL {
        return Ok(SphereSpec::Flat { base: *pbar, basis: basis.to_vec() });
    }
    let k = dot(a, a);
    if k.abs() <= TOL * sc * sc {
        return Ok(SphereSpec::Parabolic { base: *pbar, a: *a, basis: basis.to_vec() });
    }
    Ok(SphereSpec::ConstCurv { center: *pbar - a.scale(1.0 / k), curvature: k, a: *a, basis: basis.to_vec() })
}

impl SphereSpec {
    pub fn dim(&self) -> usize {
        match self {
            SphereSpec::Flat { basis, .. } | SphereSpec::ConstCurv { basis, .. } | SphereSpec::Parabolic { basis, .. } => {
                basis.len()
            }
        }
    }

    /// Standard chart around p̄: σ ↦ p̄ + Σσ_j v_j for flat factors, the
    /// parabolic lift v − ½⟨v,v⟩a, and the graph over V for spheres.
    pub fn embed<T: Scalar>(&self, sigma: &[T]) -> Result<Vec3M<T>> {
        let lin = |basis: &[V]| {
            basis.iter().zip(sigma).fold(Vec3M::<T>::zero(), |acc, (b, s)| acc + Vec3M::from_f64(b.0).scale(*s))
        };
        match self {
            SphereSpec::Flat { base, basis } => Ok(Vec3M::from_f64(base.0) + lin(basis)),
            SphereSpec::Parabolic { base, a, basis } => {
                let v = lin(basis);
                let q = dot(&v, &v) * c(0.5);
                Ok(Vec3M::from_f64(base.0) + v - Vec3M::from_f64(a.0).scale(q))
            }
            SphereSpec::ConstCurv { center, curvature: k, a, basis } => {
                let v = lin(basis);
                let kk: T = c(*k);
                let rad = (T::one() / kk - dot(&v, &v)) / kk;
                if rad.value() <= 0.0 {
                    return Err(Error::RangeViolation("outside the graph chart of the sphere".into()));
                }
                let f = rad.sqrt() * c(k.signum());
                Ok(Vec3M::from_f64(center.0) + v + Vec3M::from_f64(a.0).scale(f))
            }
        }
    }

    /// Whether the factor has two components (hyperbolic spaces, and the
    /// one-dimensional de Sitter space).
    fn disconnected(&self) -> bool {
        match self {
            SphereSpec::ConstCurv { curvature, basis, .. } => {
                *curvature < 0.0 || (basis.len() == 1 && dot(&basis[0], &basis[0]) < 0.0)
            }
            _ => false,
        }
    }
}

impl WarpedProduct {
    pub fn new(data: InitialData) -> Result<Self> {
        if data.factors.is_empty() || is_degenerate(&data.v0) {
            return Err(Error::DegenerateSubspace);
        }
        let spheres = data
            .factors
            .iter()
            .map(|f| sphere_from_triple(&data.pbar, &f.basis, &f.a))
            .collect::<Result<Vec<_>>>()?;
        let flat = spheres.iter().all(|s| matches!(s, SphereSpec::Flat { .. }));
        if flat {
            return Ok(WarpedProduct { data, spheres, form: MapForm::Cartesian, w0: vec![], b: None });
        }
        if data.factors.len() != 1 {
            return Err(Error::Unsupported("warped products with more than two factors".into()));
        }
        let f = &data.factors[0];
        let a = f.a;
        match spheres[0] {
            SphereSpec::ConstCurv { .. } => {
                let mut span = vec![a];
                span.extend_from_slice(&f.basis);
                let w0 = perp(&span);
                Ok(WarpedProduct { data, spheres, form: MapForm::NonNull, w0, b: None })
            }
            _ => {
                // the other null direction of V₀
                let u = data
                    .v0
                    .iter()
                    .copied()
                    .max_by(|x, y| dot(x, &a).abs().total_cmp(&dot(y, &a).abs()))
                    .ok_or(Error::DegenerateSubspace)?;
                let au = dot(&a, &u);
                if au.abs() <= TOL {
                    return Err(Error::DegenerateSubspace);
                }
                let u = u.scale(1.0 / au);
                let b = u - a.scale(0.5 * dot(&u, &u));
                let mut span = vec![a, b];
                span.extend_from_slice(&f.basis);
                let w0 = perp(&span);
                Ok(WarpedProduct { data, spheres, form: MapForm::Null, w0, b: Some(b) })
            }
        }
    }

    /// ρ_i(p₀) for each factor.
    pub fn rho<T: Scalar>(&self, p0: &Vec3M<T>) -> Vec<T> {
        self.data
            .factors
            .iter()
            .map(|f| if f.a.max_abs() <= TOL { T::one() } else { dot(p0, &Vec3M::from_f64(f.a.0)) })
            .collect()
    }

    pub fn factor_dims(&self) -> (usize, Vec<usize>) {
        (self.data.v0.len(), self.spheres.iter().map(|s| s.dim()).collect())
    }
}

/// ψ(p₀, p₁), both relative to `origin`; the result is in original coordinates.
/// For Cartesian products with several flat factors, p₁ is the sum of the
/// factor points.
pub fn wp_map<T: Scalar>(wp: &WarpedProduct, p0: &Vec3M<T>, p1: &Vec3M<T>) -> Result<Vec3M<T>> {
    let p0v = p0.to_f64();
    let inside = project(&wp.data.v0, &p0v)?;
    if (inside - p0v).max_abs() > 1e-9 * (1.0 + p0v.max_abs()) || wp.rho(p0).iter().any(|r| r.value() <= 0.0) {
        return Err(Error::OutsideGeodesicFactor);
    }
    let origin: Vec3M<T> = Vec3M::from_f64(wp.data.origin.0);
    let local = match wp.form {
        MapForm::Cartesian => *p0 + *p1,
        MapForm::NonNull => {
            let SphereSpec::ConstCurv { center, .. } = &wp.spheres[0] else { unreachable!() };
            let rho = wp.rho(p0)[0];
            project(&wp.w0, p0)? + (*p1 - Vec3M::from_f64(center.0)).scale(rho)
        }
        MapForm::Null => {
            let a: Vec3M<T> = Vec3M::from_f64(wp.data.factors[0].a.0);
            let b: Vec3M<T> = Vec3M::from_f64(wp.b.expect("null form").0);
            let rho = dot(&a, p0);
            let q = project(&wp.data.factors[0].basis, p1)?;
            let coef = dot(&b, p0) - rho * dot(&q, &q) * c(0.5);
            project(&wp.w0, p0)? + a.scale(coef) + b.scale(rho) + q.scale(rho)
        }
    };
    Ok(origin + local)
}

/// Image of ψ: the sign conditions for non-null products (with the branch
/// condition on disconnected factors) and ⟨a₁, p⟩ > 0 for null ones.
pub fn wp_image_contains(wp: &WarpedProduct, p: &V) -> bool {
    let q = *p - wp.data.origin;
    match wp.form {
        MapForm::Cartesian => true,
        MapForm::NonNull => {
            let f = &wp.data.factors[0];
            let mut span = vec![f.a];
            span.extend_from_slice(&f.basis);
            let Ok(p1) = project(&span, &q) else { return false };
            let k = dot(&f.a, &f.a);
            let n = dot(&p1, &p1);
            let sc = q.max_abs().powi(2).max(1e-300);
            if n.abs() <= 1e-14 * sc || n.signum() != k.signum() {
                return false;
            }
            !wp.spheres[0].disconnected() || dot(&f.a, &p1) > 0.0
        }
        MapForm::Null => dot(&wp.data.factors[0].a, &q) > 0.0,
    }
}

impl RestrictedCT {
    /// Eigenvalues of L̃(p₀) on V₀, descending; p₀ relative to the origin.
    pub fn eigenvalues_at(&self, p0: &V) -> Result<Vec<f64>> {
        let l = self.tensor.evaluate(p0);
        let b = &self.basis;
        let g = gram(b);
        // matrix of L̃ in the basis: G⁻¹ [⟨b_i, L b_j⟩]
        let n = b.len();
        let mut m = vec![vec![0.0; n]; n];
        for j in 0..n {
            let lb = l.apply(&b[j]);
            let r: Vec<f64> = b.iter().map(|x| dot(x, &lb)).collect();
            let col = solve_small(g.clone(), r).ok_or(Error::DegenerateSubspace)?;
            for i in 0..n {
                m[i][j] = col[i];
            }
        }
        let mut ev = match n {
            1 => vec![m[0][0]],
            2 => {
                let tr = m[0][0] + m[1][1];
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                let disc = tr * tr / 4.0 - det;
                if disc < -1e-12 * (1.0 + tr * tr) {
                    return Err(Error::ComplexSpectrum);
                }
                let s = disc.max(0.0).sqrt();
                vec![tr / 2.0 + s, tr / 2.0 - s]
            }
            _ => return Err(Error::Unsupported("restricted tensor of dimension 3".into())),
        };
        ev.sort_by(|x, y| y.total_cmp(x));
        Ok(ev)
    }
}

/// Kernel of a 3×3 operator of rank ≤ 1 (empty if the rank is higher).
fn kernel_rank1(n: &Operator3<f64>, scale: f64) -> Vec<V> {
    let rows: Vec<V> = (0..3).map(|i| V::new(n.m[i][0], n.m[i][1], n.m[i][2])).collect();
    let big = rows.iter().fold(0.0f64, |m, r| m.max(r.max_abs()));
    if big <= TOL * scale {
        return vec![V::unit(0), V::unit(1), V::unit(2)];
    }
    let ind = independent(&rows.iter().map(|r| r.scale(1.0 / big)).collect::<Vec<_>>());
    if ind.len() > 1 {
        return vec![];
    }
    let r = ind[0];
    let k = (0..3).min_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs())).unwrap();
    let u = normalize_e(cross(&r, &V::unit(k)));
    vec![u, normalize_e(cross(&r, &u))]
}

/// Unit vector of E consistent with the hint direction: ⟨d, a⟩ > 0.
fn unit_from_hint(e: &[V], d: &V) -> Result<V> {
    let h = project(e, d)?;
    let n = dot(&h, &h);
    if n.abs() <= 1e-12 * (1.0 + d.max_abs().powi(2)) {
        // null (or orthogonal) hint: fall back to a basis vector of E
        let v = e
            .iter()
            .copied()
            .find(|v| dot(v, v).abs() > TOL)
            .ok_or(Error::DegenerateSubspace)?;
        return Ok(v.scale(1.0 / dot(&v, &v).abs().sqrt()));
    }
    Ok(h.scale(n.signum() / n.abs().sqrt()))
}

/// Minimum Euclidean norm p̄ ∈ V₀ with ⟨p̄, a_i⟩ = 1 for the nonzero a_i.
fn canonical_point(v0: &[V], factors: &[Factor]) -> Result<V> {
    let act: Vec<&V> = factors.iter().map(|f| &f.a).filter(|a| a.max_abs() > TOL).collect();
    if act.is_empty() {
        return Ok(V::zero());
    }
    // p̄ = B c; constraints R c = 1 with R_ij = ⟨a_i, b_j⟩; c = Mᵀ(R Mᵀ... ) via normal equations
    let n = v0.len();
    let r: Vec<Vec<f64>> = act.iter().map(|a| v0.iter().map(|b| dot(a, b)).collect()).collect();
    // v0 is Euclidean-orthonormal here, so min |Bc| = min |c|: c = Rᵀ (R Rᵀ)⁻¹ 1
    let rr: Vec<Vec<f64>> =
        r.iter().map(|x| r.iter().map(|y| x.iter().zip(y).map(|(p, q)| p * q).sum()).collect()).collect();
    let lam = solve_small(rr, vec![1.0; act.len()]).ok_or(Error::NoCanonicalPoint)?;
    let mut coef = vec![0.0; n];
    for (i, row) in r.iter().enumerate() {
        for j in 0..n {
            coef[j] += row[j] * lam[i];
        }
    }
    let p = v0.iter().zip(&coef).fold(V::zero(), |acc, (b, s)| acc + b.scale(*s));
    for a in act {
        if (dot(&p, a) - 1.0).abs() > 1e-9 {
            return Err(Error::NoCanonicalPoint);
        }
    }
    Ok(p)
}

/// Algorithm 1: warped-product initial data adapted to a reducible L, and L
/// restricted to the geodesic factor. `hint` is a point of the region of
/// interest and fixes the causal character of the unit vectors chosen.
pub fn decompose_reducible(l: &ConcircularTensor<f64>, hint: &V) -> Result<(InitialData, RestrictedCT)> {
    let s = 1.0 + l.a.max_abs().max(l.w.max_abs()).max(l.m.abs());
    let constant = l.w.max_abs() <= 1e-10 * s && l.m.abs() <= 1e-10 * s;
    if constant {
        return decompose_constant(l);
    }
    let cl = classify_ct(l)?;
    if matches!(cl.class, CTClass::NullAxial { .. } | CTClass::Cartesian) {
        return Err(Error::NotReducible);
    }
    let origin = cl.origin_shift;
    let lt = l.translated(&origin);
    let d = *hint - origin;
    // D = span{w, Aw, A²w}; the complement carries A_c
    let mut dsp = Vec::new();
    let mut v = lt.w;
    for _ in 0..3 {
        if v.max_abs() > 1e-10 * s {
            dsp.push(v);
        }
        v = lt.a.apply(&v);
    }
    let dsp = independent(&dsp);
    let comp = perp(&dsp);
    let (e, lambda) = multidim_eigenspace(&lt.a, &comp, s)?;
    let factor = if is_degenerate(&e) {
        // cycle v₁ → v_r = (A − λ)v₁ ending in the null direction of E
        let n = lt.a.sub(&Operator3::identity().scale(lambda));
        let v1 = (0..3)
            .map(V::unit)
            .max_by(|x, y| n.apply(x).max_abs().total_cmp(&n.apply(y).max_abs()))
            .unwrap();
        let vr = n.apply(&v1);
        let g = dot(&v1, &vr);
        if g.abs() <= TOL {
            return Err(Error::DegenerateSubspace);
        }
        let k = 1.0 / g.abs().sqrt();
        let sign = if dot(&d, &vr) < 0.0 { -1.0 } else { 1.0 };
        let (v1, vr) = (v1.scale(k * sign), vr.scale(k * sign));
        let vi = intersect_perp(&e, &v1);
        Factor { basis: vi, a: vr }
    } else {
        let a = unit_from_hint(&e, &d)?;
        Factor { basis: intersect_perp(&e, &a), a }
    };
    if factor.basis.is_empty() {
        return Err(Error::DegenerateSubspace);
    }
    let v0 = perp(&factor.basis);
    let factors = vec![factor];
    let pbar = canonical_point(&v0, &factors)?;
    let data = InitialData { origin, pbar, v0: v0.clone(), factors };
    Ok((data, RestrictedCT { basis: v0, tensor: lt }))
}

/// E ∩ x⊥ inside span(e).
fn intersect_perp(e: &[V], x: &V) -> Vec<V> {
    match e.len() {
        3 => perp(&[*x]),
        2 => {
            let v = e[0].scale(dot(x, &e[1])) - e[1].scale(dot(x, &e[0]));
            if v.max_abs() <= TOL {
                vec![]
            } else {
                vec![normalize_e(v)]
            }
        }
        _ => vec![],
    }
}

/// The multidimensional eigenspace of A restricted to span(comp).
fn multidim_eigenspace(a: &Operator3<f64>, comp: &[V], s: f64) -> Result<(Vec<V>, f64)> {
    match comp.len() {
        3 => {
            let form = crate::jordan::metric_jordan_form(a, crate::concircular::CLUSTER_TOL)?;
            let mut cands: Vec<f64> = form
                .blocks
                .iter()
                .filter_map(|b| match b.eigen {
                    crate::jordan::Eigen::Real(x) => Some(x),
                    _ => None,
                })
                .collect();
            cands.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * (1.0 + x.abs()));
            for lam in cands {
                let k = kernel_rank1(&a.sub(&Operator3::identity().scale(lam)), s);
                if k.len() >= 2 {
                    return Ok((k, lam));
                }
            }
            Err(Error::NotReducible)
        }
        2 => {
            // A_c = λ·id on the complement
            let mut lam = None;
            for v in comp {
                let n = dot(v, v);
                if n.abs() > TOL {
                    lam = Some(dot(v, &a.apply(v)) / n);
                    break;
                }
            }
            let lam = lam.ok_or(Error::DegenerateSubspace)?;
            for v in comp {
                let r = a.apply(v) - v.scale(lam);
                // the D-component of A v is allowed; only the complement part must vanish
                let rc = project(comp, &r)?;
                if rc.max_abs() > 1e-9 * s {
                    return Err(Error::NotReducible);
                }
            }
            Ok((comp.to_vec(), lam))
        }
        _ => Err(Error::NotReducible),
    }
}

/// Constant tensors: the Cartesian product of the eigenspaces of A.
fn decompose_constant(l: &ConcircularTensor<f64>) -> Result<(InitialData, RestrictedCT)> {
    let form = crate::jordan::metric_jordan_form(&l.a, crate::concircular::CLUSTER_TOL)?;
    if form.blocks.iter().any(|b| b.size > 1 || !matches!(b.eigen, crate::jordan::Eigen::Real(_))) {
        return Err(Error::Unsupported("constant tensor that is not diagonalizable over the reals".into()));
    }
    let mut groups: Vec<(f64, Vec<V>)> = Vec::new();
    for (blk, v) in form.blocks.iter().zip(form.basis.iter()) {
        let lam = blk.eigen.re();
        match groups.iter_mut().find(|(x, _)| (x - lam).abs() <= 1e-9 * (1.0 + lam.abs())) {
            Some(g) => g.1.push(*v),
            None => groups.push((lam, vec![*v])),
        }
    }
    if groups.len() < 2 {
        return Err(Error::NotReducible);
    }
    // the smallest eigenspace is the geodesic factor
    let i0 = (0..groups.len()).min_by_key(|&i| groups[i].1.len()).unwrap();
    let v0 = groups[i0].1.clone();
    let factors = groups
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != i0)
        .map(|(_, g)| Factor { basis: g.1.clone(), a: V::zero() })
        .collect();
    let data = InitialData { origin: V::zero(), pbar: V::zero(), v0: v0.clone(), factors };
    Ok((data, RestrictedCT { basis: v0, tensor: *l }))
}

/// Samples used by the isometry check: coordinates on V₀ (around p̄) and on
/// each sphere factor (around p̄).
#[derive(Clone, Debug)]
pub struct FactorPoint {
    pub s0: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

impl WarpedProduct {
    fn p0_of<T: Scalar>(&self, s0: &[T]) -> Vec3M<T> {
        let base: Vec3M<T> = Vec3M::from_f64(self.data.pbar.0);
        self.data.v0.iter().zip(s0).fold(base, |acc, (b, s)| acc + Vec3M::from_f64(b.0).scale(*s))
    }

    /// ψ at factor coordinates; the combined point for Cartesian products
    /// relative to p̄ = 0.
    pub fn map_coords<T: Scalar>(&self, s0: &[T], sigma: &[Vec<T>]) -> Result<Vec3M<T>> {
        let p0 = self.p0_of(s0);
        let mut p1 = Vec3M::<T>::zero();
        for (sp, sg) in self.spheres.iter().zip(sigma) {
            p1 = p1 + sp.embed(sg)?;
        }
        if self.form == MapForm::Cartesian {
            // each flat factor is p̄ + V_i; the sum counts p̄ once per factor
            p1 = p1 - Vec3M::from_f64(self.data.pbar.0).scale(c((self.spheres.len()) as f64));
        }
        wp_map(self, &p0, &p1)
    }

    /// Relative isometry defect at a sample: pullback of g through ψ against
    /// g₀ ⊕ ρ²g₁ ⊕ …, each g_i the metric the embedding induces on its factor.
    pub fn isometry_defect(&self, pt: &FactorPoint) -> Result<f64> {
        let (n0, dims) = self.factor_dims();
        let total = n0 + dims.iter().sum::<usize>();
        if total != 3 {
            return Err(Error::DegenerateSubspace);
        }
        let mut vars = [0.0; 3];
        vars[..n0].copy_from_slice(&pt.s0);
        let mut k = n0;
        for s in &pt.sigma {
            vars[k..k + s.len()].copy_from_slice(s);
            k += s.len();
        }
        let dv: [Dual<f64>; 3] = [Dual::var(vars[0], 0), Dual::var(vars[1], 1), Dual::var(vars[2], 2)];
        let s0 = dv[..n0].to_vec();
        let mut sig = Vec::new();
        let mut k = n0;
        for d in &dims {
            sig.push(dv[k..k + d].to_vec());
            k += d;
        }
        let p = self.map_coords(&s0, &sig)?;
        let jac = [p[0].d, p[1].d, p[2].d];
        let pb = SymBilinear::<f64>::metric().pullback(&jac);

        let mut want = [[0.0; 3]; 3];
        let g0 = gram(&self.data.v0);
        for i in 0..n0 {
            for j in 0..n0 {
                want[i][j] = g0[i][j];
            }
        }
        let rho = self.rho(&self.p0_of(&pt.s0));
        let mut k = n0;
        for (idx, (sp, d)) in self.spheres.iter().zip(&dims).enumerate() {
            let mut local = [Dual::constant(0.0); 3];
            for j in 0..*d {
                local[j] = Dual::var(pt.sigma[idx][j], j);
            }
            let q = sp.embed(&local[..*d])?;
            let gi = SymBilinear::<f64>::metric().pullback(&[q[0].d, q[1].d, q[2].d]);
            for i in 0..*d {
                for j in 0..*d {
                    want[k + i][k + j] = rho[idx] * rho[idx] * gi[i][j];
                }
            }
            k += d;
        }
        let scale = want.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut r = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                r = r.max((pb[i][j] - want[i][j]).abs());
            }
        }
        Ok(r / scale.max(1e-300))
    }

    /// Random factor point with all ρ positive and the sphere charts defined.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> FactorPoint {
        let (n0, dims) = self.factor_dims();
        loop {
            let s0: Vec<f64> = (0..n0).map(|_| rng.gen_range(-0.9..0.9)).collect();
            let sigma: Vec<Vec<f64>> = dims.iter().map(|&d| (0..d).map(|_| rng.gen_range(-0.9..0.9)).collect()).collect();
            let pt = FactorPoint { s0, sigma };
            if self.rho(&self.p0_of(&pt.s0)).iter().all(|r| *r > 1e-3) && self.map_coords(&pt.s0, &pt.sigma).is_ok() {
                return pt;
            }
        }
    }

    /// Tangent vectors of the sphere factors at a sample, pushed forward by ψ.
    pub fn sphere_tangents(&self, pt: &FactorPoint) -> Result<(V, Vec<Vec<V>>)> {
        let (n0, dims) = self.factor_dims();
        let mut out = Vec::new();
        let mut pos = V::zero();
        for f in 0..dims.len() {
            let mut tang = Vec::new();
            for j in 0..dims[f] {
                let s0: Vec<Dual<f64>> = pt.s0.iter().map(|x| Dual::constant(*x)).collect();
                let sig: Vec<Vec<Dual<f64>>> = pt
                    .sigma
                    .iter()
                    .enumerate()
                    .map(|(g, s)| {
                        s.iter()
                            .enumerate()
                            .map(|(i, x)| if g == f && i == j { Dual::var(*x, 0) } else { Dual::constant(*x) })
                            .collect()
                    })
                    .collect();
                let p = self.map_coords(&s0, &sig)?;
                pos = V::new(p[0].v, p[1].v, p[2].v);
                tang.push(V::new(p[0].d[0], p[1].d[0], p[2].d[0]));
            }
            out.push(tang);
        }
        let _ = n0;
        Ok((pos, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concircular::point_eigenvalues;

    fn v(t: f64, x: f64, y: f64) -> V {
        V::new(t, x, y)
    }

    #[test]
    fn spheres_from_triples() {
        let s = sphere_from_triple(&V::zero(), &[V::unit(1), V::unit(2)], &V::zero()).unwrap();
        assert!(matches!(s, SphereSpec::Flat { .. }));
        let s = sphere_from_triple(&V::unit(1), &[V::unit(2)], &V::unit(1)).unwrap();
        match s {
            SphereSpec::ConstCurv { center, curvature, .. } => {
                assert!(center.max_abs() < 1e-15);
                assert_eq!(curvature, 1.0);
            }
            _ => panic!("{s:?}"),
        }
        let s = sphere_from_triple(&V::zero(), &[V::unit(2)], &v(1.0, 1.0, 0.0)).unwrap();
        assert!(matches!(s, SphereSpec::Parabolic { .. }));
        let e = sphere_from_triple(&V::zero(), &[v(1.0, 1.0, 0.0)], &V::zero());
        assert_eq!(e, Err(Error::DegenerateSubspace));
    }

    #[test]
    fn map_examples() {
        let cart = WarpedProduct::new(InitialData {
            origin: V::zero(),
            pbar: V::zero(),
            v0: vec![V::unit(0)],
            factors: vec![Factor { basis: vec![V::unit(1), V::unit(2)], a: V::zero() }],
        })
        .unwrap();
        assert_eq!(wp_map(&cart, &v(1.0, 0.0, 0.0), &v(0.0, 2.0, 3.0)).unwrap(), v(1.0, 2.0, 3.0));

        let nonnull = WarpedProduct::new(InitialData {
            origin: V::zero(),
            pbar: V::unit(1),
            v0: vec![V::unit(0), V::unit(1)],
            factors: vec![Factor { basis: vec![V::unit(2)], a: V::unit(1) }],
        })
        .unwrap();
        assert_eq!(nonnull.form, MapForm::NonNull);
        let p = wp_map(&nonnull, &v(2.0, 3.0, 0.0), &v(0.0, 1.0, 0.0)).unwrap();
        assert!((p - v(2.0, 3.0, 0.0)).max_abs() < 1e-15);
        assert_eq!(wp_map(&nonnull, &v(2.0, -3.0, 0.0), &v(0.0, 1.0, 0.0)), Err(Error::OutsideGeodesicFactor));

        let a = v(1.0, 1.0, 0.0);
        let b = v(-0.5, 0.5, 0.0);
        let null = WarpedProduct::new(InitialData {
            origin: V::zero(),
            pbar: b,
            v0: vec![normalize_e(a), normalize_e(b)],
            factors: vec![Factor { basis: vec![V::unit(2)], a }],
        })
        .unwrap();
        assert_eq!(null.form, MapForm::Null);
        assert!((null.b.unwrap() - b).max_abs() < 1e-15);
        let p = wp_map(&null, &b, &V::unit(2)).unwrap();
        assert!((p - v(-1.0, 0.0, 1.0)).max_abs() < 1e-15, "{p:?}");
        assert!(wp_image_contains(&null, &p));
        assert!(!wp_image_contains(&null, &v(1.0, 0.0, 0.0)));

        assert!(wp_image_contains(&nonnull, &v(0.5, 1.0, 0.2)));
        // spacelike a over a timelike fiber: timelike projections are outside
        let ds1 = WarpedProduct::new(InitialData {
            origin: V::zero(),
            pbar: V::unit(1),
            v0: vec![V::unit(1), V::unit(2)],
            factors: vec![Factor { basis: vec![V::unit(0)], a: V::unit(1) }],
        })
        .unwrap();
        assert!(!wp_image_contains(&ds1, &v(3.0, 1.0, 0.0)));
        assert!(wp_image_contains(&ds1, &v(1.0, 3.0, 0.0)));
        assert!(!wp_image_contains(&ds1, &v(1.0, -3.0, 0.0)));
    }

    #[test]
    fn decompose_central_regions() {
        let l = ConcircularTensor::new(Operator3::zero(), V::zero(), 1.0).unwrap();
        let (d, r) = decompose_reducible(&l, &v(2.0, 0.0, 0.0)).unwrap();
        let wp = WarpedProduct::new(d.clone()).unwrap();
        assert_eq!(d.v0.len(), 1);
        assert!(d.v0[0][1].abs() < 1e-12 && d.v0[0][2].abs() < 1e-12);
        match &wp.spheres[0] {
            SphereSpec::ConstCurv { curvature, .. } => assert!(*curvature < 0.0),
            s => panic!("{s:?}"),
        }
        assert!(wp_image_contains(&wp, &v(2.0, 0.3, 0.1)));
        assert!(!wp_image_contains(&wp, &v(-2.0, 0.3, 0.1)));
        assert_eq!(r.basis.len(), 1);
        let (d, _) = decompose_reducible(&l, &v(0.1, 2.0, 0.0)).unwrap();
        let wp = WarpedProduct::new(d).unwrap();
        match &wp.spheres[0] {
            SphereSpec::ConstCurv { curvature, .. } => assert!(*curvature > 0.0),
            s => panic!("{s:?}"),
        }
        assert!(wp_image_contains(&wp, &v(0.1, 2.0, 0.0)));
    }

    #[test]
    fn decompose_cartesian_product() {
        let l = ConcircularTensor::constant(Operator3::outer(&V::unit(0), &V::unit(0)));
        let (d, _) = decompose_reducible(&l, &V::zero()).unwrap();
        assert_eq!(d.v0.len(), 1);
        assert!((d.v0[0][0].abs() - 1.0).abs() < 1e-12);
        assert_eq!(d.factors.len(), 1);
        assert_eq!(d.factors[0].basis.len(), 2);
        assert_eq!(WarpedProduct::new(d).unwrap().form, MapForm::Cartesian);
    }

    #[test]
    fn decompose_null_product() {
        let k = v(1.0, 1.0, 0.0);
        let a = Operator3::outer(&k, &k);
        let l = ConcircularTensor::new(a, V::zero(), 1.0).unwrap();
        let hint = v(-1.0, 0.5, 0.3);
        let (d, r) = decompose_reducible(&l, &hint).unwrap();
        let wp = WarpedProduct::new(d.clone()).unwrap();
        assert_eq!(wp.form, MapForm::Null);
        let a1 = d.factors[0].a;
        assert!(dot(&a1, &a1).abs() < 1e-12);
        assert!(cross(&a1, &k).max_abs() < 1e-12, "a₁ ∥ k");
        assert!(wp_image_contains(&wp, &hint));
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        for _ in 0..20 {
            let pt = wp.sample(&mut rng);
            assert!(wp.isometry_defect(&pt).unwrap() < 1e-12);
            let p0 = wp.p0_of(&pt.s0);
            let q = wp.map_coords(&pt.s0, &pt.sigma).unwrap();
            let ev = point_eigenvalues(&l, &q).unwrap();
            for e in r.eigenvalues_at(&p0).unwrap() {
                assert!(ev.iter().any(|x| (x - e).abs() < 1e-8 * (1.0 + e.abs())), "{e} in {ev:?}");
            }
        }
    }

    #[test]
    fn not_reducible() {
        let l = ConcircularTensor::new(Operator3::diag([1.0, 2.0, 3.0]), V::zero(), 1.0).unwrap();
        assert_eq!(decompose_reducible(&l, &v(0.0, 1.0, 0.0)), Err(Error::NotReducible));
    }
}
