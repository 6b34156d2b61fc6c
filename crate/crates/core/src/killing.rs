//! Killing tensors generated by a concircular tensor: K₁ = tr(L)g − L and
//! K₂ = ½tr(K₁L)g − K₁L, stored as exact polynomials of degree ≤ 4.
//!
//! The connection of E³₁ is flat in pseudo-Cartesian components, so the
//! Killing equation is checked with plain partial derivatives taken on the
//! coefficients.

use crate::catalog::ChartRecord;
use crate::catalog::Params;
use crate::concircular::ConcircularTensor;
use crate::error::Result;
use crate::minkowski::{SymBilinear, Vec3M};
use crate::scalar::{c, Scalar};
use crate::Wide;

pub const MAX_DEGREE: usize = 4;
/// Monomials tᵃxᵇyᶜ with a+b+c ≤ 4.
pub const N_MONO: usize = 35;

const fn monomials() -> [[u8; 3]; N_MONO] {
    let mut out = [[0u8; 3]; N_MONO];
    let mut n = 0;
    let mut d = 0;
    while d <= MAX_DEGREE {
        let mut a = d as i32;
        while a >= 0 {
            let mut b = d as i32 - a;
            while b >= 0 {
                out[n] = [a as u8, b as u8, (d as i32 - a - b) as u8];
                n += 1;
                b -= 1;
            }
            a -= 1;
        }
        d += 1;
    }
    out
}

const fn index_table() -> [[[u8; 5]; 5]; 5] {
    let mut t = [[[u8::MAX; 5]; 5]; 5];
    let mono = monomials();
    let mut n = 0;
    while n < N_MONO {
        let e = mono[n];
        t[e[0] as usize][e[1] as usize][e[2] as usize] = n as u8;
        n += 1;
    }
    t
}

pub const MONOMIALS: [[u8; 3]; N_MONO] = monomials();
const INDEX: [[[u8; 5]; 5]; 5] = index_table();

fn index_of(e: [usize; 3]) -> Option<usize> {
    if e[0] + e[1] + e[2] > MAX_DEGREE {
        return None;
    }
    Some(INDEX[e[0]][e[1]][e[2]] as usize)
}

/// Dense polynomial in (t, x, y) of total degree ≤ 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly<T> {
    pub coef: [T; N_MONO],
}

impl<T: Scalar> Poly<T> {
    pub fn zero() -> Self {
        Poly { coef: [T::zero(); N_MONO] }
    }

    pub fn constant(v: T) -> Self {
        let mut p = Self::zero();
        p.coef[0] = v;
        p
    }

    /// The coordinate function tᵢ (i = 0, 1, 2).
    pub fn coordinate(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        let mut p = Self::zero();
        p.coef[index_of(e).unwrap()] = T::one();
        p
    }

    pub fn degree(&self) -> Option<usize> {
        (0..N_MONO)
            .filter(|&n| self.coef[n] != T::zero())
            .map(|n| MONOMIALS[n].iter().map(|&e| e as usize).sum())
            .max()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = *self;
        for (a, b) in p.coef.iter_mut().zip(&o.coef) {
            *a = *a + *b;
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-T::one()))
    }

    pub fn scale(&self, s: T) -> Self {
        let mut p = *self;
        for a in p.coef.iter_mut() {
            *a = *a * s;
        }
        p
    }

    /// Product; panics if the result would exceed degree 4, which the
    /// concircular constructions never do.
    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero();
        for (i, a) in self.coef.iter().enumerate() {
            if *a == T::zero() {
                continue;
            }
            for (j, b) in o.coef.iter().enumerate() {
                if *b == T::zero() {
                    continue;
                }
                let (ea, eb) = (MONOMIALS[i], MONOMIALS[j]);
                let e = [0, 1, 2].map(|k| (ea[k] + eb[k]) as usize);
                let n = index_of(e).expect("polynomial degree exceeds 4");
                p.coef[n] = p.coef[n] + *a * *b;
            }
        }
        p
    }

    /// Partial derivative in coordinate `var`.
    pub fn diff(&self, var: usize) -> Self {
        let mut p = Self::zero();
        for (n, a) in self.coef.iter().enumerate() {
            let mut e = MONOMIALS[n].map(|x| x as usize);
            if e[var] == 0 {
                continue;
            }
            let k = e[var];
            e[var] -= 1;
            let m = index_of(e).unwrap();
            p.coef[m] = p.coef[m] + *a * c(k as f64);
        }
        p
    }

    pub fn eval(&self, p: &Vec3M<T>) -> T {
        let mut pw = [[T::one(); MAX_DEGREE + 1]; 3];
        for k in 0..3 {
            for d in 1..=MAX_DEGREE {
                pw[k][d] = pw[k][d - 1] * p[k];
            }
        }
        let mut s = T::zero();
        for (n, a) in self.coef.iter().enumerate() {
            let e = MONOMIALS[n];
            s = s + *a * pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize];
        }
        s
    }

    /// Sum of |term| at p, the scale against which cancellation is judged.
    pub fn eval_abs(&self, p: &Vec3M<T>) -> T {
        let q = Vec3M::new(p[0].abs(), p[1].abs(), p[2].abs());
        let mut a = *self;
        for x in a.coef.iter_mut() {
            *x = x.abs();
        }
        a.eval(&q)
    }
}

/// η_ii.
fn eta<T: Scalar>(i: usize) -> T {
    if i == 0 {
        -T::one()
    } else {
        T::one()
    }
}

/// Mixed-index polynomial operator field.
#[derive(Clone, Copy, Debug)]
struct PolyOp<T> {
    m: [[Poly<T>; 3]; 3],
}

impl<T: Scalar> PolyOp<T> {
    fn identity() -> Self {
        let mut m = [[Poly::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Poly::constant(T::one());
        }
        PolyOp { m }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut m = [[Poly::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m[i][j] = m[i][j].add(&self.m[i][k].mul(&o.m[k][j]));
                }
            }
        }
        PolyOp { m }
    }

    fn trace(&self) -> Poly<T> {
        self.m[0][0].add(&self.m[1][1]).add(&self.m[2][2])
    }

    /// f·id − self.
    fn shifted_neg(&self, f: &Poly<T>) -> Self {
        let mut m = self.m;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = if i == j { f.sub(x) } else { x.scale(-T::one()) };
            }
        }
        PolyOp { m }
    }

    fn lower(&self) -> PolySymTensor<T> {
        let mut k = self.m;
        for (i, row) in k.iter_mut().enumerate() {
            for x in row.iter_mut() {
                *x = x.scale(eta(i));
            }
        }
        PolySymTensor { k }
    }

    fn of_ct(l: &ConcircularTensor<T>) -> Self {
        let p = [0, 1, 2].map(Poly::<T>::coordinate);
        let mut m = [[Poly::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // A + w⊗p♭ + p⊗w♭ + m p⊗p♭
                let e: T = eta(j);
                m[i][j] = Poly::constant(l.a.m[i][j])
                    .add(&p[j].scale(l.w[i] * e))
                    .add(&p[i].scale(l.w[j] * e))
                    .add(&p[i].mul(&p[j]).scale(l.m * e));
            }
        }
        PolyOp { m }
    }
}

/// Covariant symmetric 2-tensor field with polynomial components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolySymTensor<T> {
    pub k: [[Poly<T>; 3]; 3],
}

impl<T: Scalar> PolySymTensor<T> {
    pub fn zero() -> Self {
        PolySymTensor { k: [[Poly::zero(); 3]; 3] }
    }

    pub fn metric() -> Self {
        PolyOp::identity().lower()
    }

    /// Covariant components of a concircular tensor.
    pub fn from_ct(l: &ConcircularTensor<T>) -> Self {
        PolyOp::of_ct(l).lower()
    }

    pub fn scale(&self, s: T) -> Self {
        PolySymTensor { k: self.k.map(|r| r.map(|p| p.scale(s))) }
    }

    pub fn eval(&self, p: &Vec3M<T>) -> SymBilinear<T> {
        SymBilinear::new(self.k.map(|r| r.map(|q| q.eval(p))))
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.k.iter().flatten().filter_map(|p| p.degree()).max()
    }

    /// Upper-triangle coefficients, 6 × 35 entries.
    pub fn coefficients(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(6 * N_MONO);
        for i in 0..3 {
            for j in i..3 {
                v.extend_from_slice(&self.k[i][j].coef);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(|x| *x == T::zero())
    }

    /// K(v, v) along the line x₀ + s·v.
    pub fn along_line(&self, x0: &Vec3M<T>, v: &Vec3M<T>, s: T) -> T {
        self.eval(&(*x0 + v.scale(s))).eval(v, v)
    }
}

/// (g, K₁, K₂).
#[derive(Clone, Copy, Debug)]
pub struct KSAlgebra<T> {
    pub g: PolySymTensor<T>,
    pub k1: PolySymTensor<T>,
    pub k2: PolySymTensor<T>,
}

impl<T: Scalar> KSAlgebra<T> {
    pub fn members(&self) -> [&PolySymTensor<T>; 3] {
        [&self.g, &self.k1, &self.k2]
    }
}

/// K₁ = tr(L)g − L.
pub fn kbdt<T: Scalar>(l: &ConcircularTensor<T>) -> PolySymTensor<T> {
    let lm = PolyOp::of_ct(l);
    lm.shifted_neg(&lm.trace()).lower()
}

pub fn ks_algebra<T: Scalar>(l: &ConcircularTensor<T>) -> KSAlgebra<T> {
    let lm = PolyOp::of_ct(l);
    let k1 = lm.shifted_neg(&lm.trace());
    let k1l = k1.mul(&lm);
    let k2 = k1l.shifted_neg(&k1l.trace().scale(c(0.5)));
    KSAlgebra { g: PolySymTensor::metric(), k1: k1.lower(), k2: k2.lower() }
}

/// max |∂ᵢK_jk + ∂ⱼK_ki + ∂ₖK_ij| at p.
pub fn killing_residual<T: Scalar>(k: &PolySymTensor<T>, p: &Vec3M<T>) -> f64 {
    let d: [[[Poly<T>; 3]; 3]; 3] = [0, 1, 2].map(|i| k.k.map(|r| r.map(|q| q.diff(i))));
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                let s = d[i][j][l].add(&d[j][l][i]).add(&d[l][i][j]);
                worst = worst.max(s.eval(p).value().abs());
            }
        }
    }
    worst
}

/// Largest off-diagonal entry of K pulled back through a chart.
///
/// Evaluated in double-double like the metric certificate; `k` is usually
/// built with `ks_algebra` from `generator_ct_in::<Wide>`.
pub fn diagonality_residual(k: &PolySymTensor<Wide>, chart: &ChartRecord, params: &Params, s: &[f64; 3]) -> Result<f64> {
    chart.require_in_ranges(params, s)?;
    let pb = chart.pullback_of::<Wide>(params, s, |p| k.eval(p))?;
    let mut r = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                r = r.max(pb[i][j].value().abs());
            }
        }
    }
    Ok(r)
}

/// Smallest singular value of the coefficient matrix with rows (g, K₁, K₂),
/// each row scaled to unit length. Zero when any member vanishes.
pub fn independence(alg: &KSAlgebra<f64>) -> f64 {
    let rows: Vec<Vec<f64>> = alg.members().iter().map(|k| k.coefficients()).collect();
    let mut m = nalgebra::DMatrix::<f64>::zeros(3, rows[0].len());
    for (i, r) in rows.iter().enumerate() {
        let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = x / n;
        }
    }
    m.singular_values().min()
}

/// Relative spread of K(v, v) over the line parameters `ss`.
pub fn conserved_defect<T: Scalar>(k: &PolySymTensor<T>, x0: &Vec3M<T>, v: &Vec3M<T>, ss: &[T]) -> f64 {
    let vals: Vec<T> = ss.iter().map(|s| k.along_line(x0, v, *s)).collect();
    let mut scale = 0.0f64;
    for s in ss {
        let p = *x0 + v.scale(*s);
        for i in 0..3 {
            for j in 0..3 {
                scale = scale.max((k.k[i][j].eval_abs(&p) * v[i].abs() * v[j].abs()).value());
            }
        }
    }
    let spread = vals.iter().map(|q| (*q - vals[0]).value().abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        spread / scale
    } else {
        spread
    }
}
