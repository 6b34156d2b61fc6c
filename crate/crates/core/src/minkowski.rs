//! Vectors, bilinear forms and operators on E³₁, signature (−,+,+), order (t,x,y).

use crate::scalar::{c, Scalar};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Metric signs g_ii.
pub const SIGNS: [f64; 3] = [-1.0, 1.0, 1.0];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3M<T>(pub [T; 3]);

impl<T: Scalar> Vec3M<T> {
    pub fn new(t: T, x: T, y: T) -> Self {
        Vec3M([t, x, y])
    }
    pub fn zero() -> Self {
        Vec3M([T::zero(); 3])
    }
    pub fn from_f64(v: [f64; 3]) -> Self {
        Vec3M([c(v[0]), c(v[1]), c(v[2])])
    }
    pub fn to_f64(self) -> Vec3M<f64> {
        Vec3M([self.0[0].value(), self.0[1].value(), self.0[2].value()])
    }
    pub fn unit(i: usize) -> Self {
        let mut v = [T::zero(); 3];
        v[i] = T::one();
        Vec3M(v)
    }
    pub fn t(&self) -> T {
        self.0[0]
    }
    pub fn x(&self) -> T {
        self.0[1]
    }
    pub fn y(&self) -> T {
        self.0[2]
    }
    pub fn scale(self, s: T) -> Self {
        Vec3M([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
    /// Euclidean max-norm of the components.
    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
    /// Euclidean (component) dot product, used only for numerics.
    pub fn edot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }
    pub fn enorm(&self) -> T {
        self.edot(self).sqrt()
    }
}

impl<T> Index<usize> for Vec3M<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3M<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> Add for Vec3M<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3M([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Scalar> Sub for Vec3M<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3M([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Scalar> Neg for Vec3M<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3M([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T: Scalar> Mul<T> for Vec3M<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// ⟨u,v⟩ = −u_t v_t + u_x v_x + u_y v_y.
pub fn dot<T: Scalar>(u: &Vec3M<T>, v: &Vec3M<T>) -> T {
    -u.0[0] * v.0[0] + u.0[1] * v.0[1] + u.0[2] * v.0[2]
}

/// Covariant components v♭ (negated t entry).
pub fn lower<T: Scalar>(v: &Vec3M<T>) -> [T; 3] {
    [-v.0[0], v.0[1], v.0[2]]
}

/// Symmetric bilinear form, covariant components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymBilinear<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> SymBilinear<T> {
    /// Symmetrizes its input.
    pub fn new(m: [[T; 3]; 3]) -> Self {
        let mut s = m;
        let half: T = c(0.5);
        for i in 0..3 {
            for j in 0..i {
                let a = (m[i][j] + m[j][i]) * half;
                s[i][j] = a;
                s[j][i] = a;
            }
        }
        SymBilinear { m: s }
    }
    pub fn metric() -> Self {
        SymBilinear::diag([c(-1.0), T::one(), T::one()])
    }
    pub fn diag(d: [T; 3]) -> Self {
        let z = T::zero();
        SymBilinear { m: [[d[0], z, z], [z, d[1], z], [z, z, d[2]]] }
    }
    pub fn zero() -> Self {
        SymBilinear { m: [[T::zero(); 3]; 3] }
    }
    /// B(u, v).
    pub fn eval(&self, u: &Vec3M<T>, v: &Vec3M<T>) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = s + self.m[i][j] * u.0[i] * v.0[j];
            }
        }
        s
    }
    /// Mixed operator: multiply rows by (−1,1,1).
    pub fn raise(&self) -> Operator3<T> {
        let mut m = self.m;
        for x in m[0].iter_mut() {
            *x = -*x;
        }
        Operator3 { m }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.m;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = *x + o.m[i][j];
            }
        }
        SymBilinear { m }
    }
    pub fn scale(&self, s: T) -> Self {
        let mut m = self.m;
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x = *x * s;
            }
        }
        SymBilinear { m }
    }
    /// Pullback J^T B J, J the Jacobian (rows: Cartesian, cols: new coordinates).
    pub fn pullback(&self, j: &[[T; 3]; 3]) -> [[T; 3]; 3] {
        let mut out = [[T::zero(); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let mut s = T::zero();
                for i in 0..3 {
                    for k in 0..3 {
                        s = s + j[i][a] * self.m[i][k] * j[k][b];
                    }
                }
                out[a][b] = s;
            }
        }
        out
    }
}

/// ½(u♭⊗v♭ + v♭⊗u♭).
pub fn sym_outer<T: Scalar>(u: &Vec3M<T>, v: &Vec3M<T>) -> SymBilinear<T> {
    let (ul, vl) = (lower(u), lower(v));
    let half: T = c(0.5);
    let mut m = [[T::zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (ul[i] * vl[j] + vl[i] * ul[j]) * half;
        }
    }
    SymBilinear { m }
}

/// Linear operator with mixed (1,1) components, `m[i][j] = A^i_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Operator3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> Operator3<T> {
    pub fn new(m: [[T; 3]; 3]) -> Self {
        Operator3 { m }
    }
    pub fn from_f64(m: [[f64; 3]; 3]) -> Self {
        Operator3 { m: m.map(|r| r.map(c)) }
    }
    pub fn to_f64(&self) -> Operator3<f64> {
        Operator3 { m: self.m.map(|r| r.map(|x| x.value())) }
    }
    pub fn zero() -> Self {
        Operator3 { m: [[T::zero(); 3]; 3] }
    }
    pub fn identity() -> Self {
        Self::diag([T::one(); 3])
    }
    pub fn diag(d: [T; 3]) -> Self {
        let z = T::zero();
        Operator3 { m: [[d[0], z, z], [z, d[1], z], [z, z, d[2]]] }
    }
    /// Columns given as vectors.
    pub fn from_cols(cols: [Vec3M<T>; 3]) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (j, col) in cols.iter().enumerate() {
            for (i, row) in m.iter_mut().enumerate() {
                row[j] = col.0[i];
            }
        }
        Operator3 { m }
    }
    pub fn col(&self, j: usize) -> Vec3M<T> {
        Vec3M([self.m[0][j], self.m[1][j], self.m[2][j]])
    }
    /// u ⊗ v♭.
    pub fn outer(u: &Vec3M<T>, v: &Vec3M<T>) -> Self {
        let vl = lower(v);
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = u.0[i] * vl[j];
            }
        }
        Operator3 { m }
    }
    pub fn apply(&self, v: &Vec3M<T>) -> Vec3M<T> {
        let mut out = [T::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.m[i][0] * v.0[0] + self.m[i][1] * v.0[1] + self.m[i][2] * v.0[2];
        }
        Vec3M(out)
    }
    pub fn mul(&self, o: &Self) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        Operator3 { m }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.m;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = *x + o.m[i][j];
            }
        }
        Operator3 { m }
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-T::one()))
    }
    pub fn scale(&self, s: T) -> Self {
        Operator3 { m: self.m.map(|r| r.map(|x| x * s)) }
    }
    pub fn transpose(&self) -> Self {
        let mut m = self.m;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.m[j][i];
            }
        }
        Operator3 { m }
    }
    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }
    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        let scale = self.max_abs();
        if d.abs() <= c::<T>(1e-300).max(scale * scale * scale * c(1e-14)) {
            return None;
        }
        let m = &self.m;
        let mut inv = [[T::zero(); 3]; 3];
        for (i, row) in inv.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                let (p, q) = ((i + 1) % 3, (i + 2) % 3);
                *x = (m[a][p] * m[b][q] - m[a][q] * m[b][p]) / d;
            }
        }
        Some(Operator3 { m: inv })
    }
    pub fn max_abs(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |a, x| a.max(x.abs()))
    }
    /// Covariant form g_ik A^k_j.
    pub fn lower(&self) -> SymBilinear<T> {
        let mut m = self.m;
        for x in m[0].iter_mut() {
            *x = -*x;
        }
        SymBilinear { m }
    }
    /// Coefficients (c2, c1, c0) of det(zI − A) = z³ + c2 z² + c1 z + c0.
    pub fn char_poly(&self) -> [T; 3] {
        let m = &self.m;
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        [-self.trace(), minors, -self.det()]
    }
    /// max|g_ik A^k_j − g_jk A^k_i| ≤ tol·max(1, |A|).
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        let l = self.lower();
        let scale = self.max_abs().value().max(1.0);
        (0..3).all(|i| (0..3).all(|j| (l.m[i][j] - l.m[j][i]).abs().value() <= tol * scale))
    }
}

/// Pseudo-orthogonality check q^T g q = g.
pub fn is_pseudo_orthogonal<T: Scalar>(q: &Operator3<T>, tol: f64) -> bool {
    let g = SymBilinear::<T>::metric();
    let p = g.pullback(&q.m);
    (0..3).all(|i| (0..3).all(|j| (p[i][j] - g.m[i][j]).abs().value() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = Vec3M<f64>;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&V::new(1., 0., 0.), &V::new(1., 0., 0.)), -1.0);
        assert_eq!(dot(&V::new(1., 1., 0.), &V::new(1., 1., 0.)), 0.0);
        assert_eq!(dot(&V::new(1., 2., 3.), &V::new(4., 5., 6.)), 24.0);
    }

    #[test]
    fn lower_raise_examples() {
        assert_eq!(lower(&V::new(1., 0., 0.)), [-1., 0., 0.]);
        assert_eq!(SymBilinear::<f64>::metric().raise(), Operator3::identity());
        assert_eq!(SymBilinear::diag([1., 0., 0.]).raise(), Operator3::diag([-1., 0., 0.]));
    }

    #[test]
    fn sym_outer_examples() {
        let s = sym_outer(&V::unit(0), &V::unit(2));
        assert_eq!(s.m[0][2], -0.5);
        assert_eq!(s.m[2][0], -0.5);
        assert_eq!(s.m[1][1], 0.0);
        let v = V::new(1., 2., -3.);
        let vl = lower(&v);
        let s = sym_outer(&v, &v);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.m[i][j], vl[i] * vl[j]);
            }
        }
        assert_eq!(sym_outer(&V::unit(1), &V::zero()), SymBilinear::zero());
    }

    #[test]
    fn self_adjoint_examples() {
        assert!(Operator3::<f64>::identity().is_self_adjoint(1e-12));
        let boost = Operator3::<f64>::from_f64([[0., 1., 0.], [1., 0., 0.], [0., 0., 0.]]);
        assert!(!boost.is_self_adjoint(1e-12));
        let a = Operator3::<f64>::from_f64([[0., 1., 0.], [-1., 0., 0.], [0., 0., 2.]]);
        assert!(a.is_self_adjoint(1e-12));
    }

    #[test]
    fn inverse_and_char_poly() {
        let a = Operator3::<f64>::from_f64([[2., 1., 0.], [0., 3., 1.], [1., 0., 1.]]);
        let i = a.mul(&a.inverse().unwrap());
        assert!(i.sub(&Operator3::identity()).max_abs() < 1e-14);
        let cp = Operator3::<f64>::diag([0., 1., 2.]).char_poly();
        assert_eq!(cp, [-3., 2., 0.]);
    }
}
