//! gl(n,C) and sl(n,C): bases, trace form, adjoint action, split Casimir,
//! and elements of g⊗g stored as 4-index arrays.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest `‖g‖_F·‖g⁻¹‖_F` accepted before a group element counts as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Gl,
    Sl,
}

/// A matrix Lie algebra with a basis and its trace-dual basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct AlgebraSpec {
    n: usize,
    kind: AlgebraKind,
    basis: Vec<CMatrix>,
    dual: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n: usize,
    kind: AlgebraKind,
}

impl TryFrom<RawSpec> for AlgebraSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        AlgebraSpec::new(r.n, r.kind)
    }
}

impl From<AlgebraSpec> for RawSpec {
    fn from(a: AlgebraSpec) -> Self {
        RawSpec { n: a.n, kind: a.kind }
    }
}

impl PartialEq for AlgebraSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.kind == other.kind
    }
}

pub fn elementary(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// `tr(x·y)` without forming the product.
pub fn trace_pairing(x: &CMatrix, y: &CMatrix) -> Complex64 {
    let n = x.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += x[(i, j)] * y[(j, i)];
        }
    }
    s
}

pub fn commutator(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x * y - y * x
}

impl AlgebraSpec {
    pub fn new(n: usize, kind: AlgebraKind) -> Result<Self> {
        if n == 0 || (kind == AlgebraKind::Sl && n < 2) {
            return Err(Error::InvalidInput(format!("no {kind:?} algebra of size {n}")));
        }
        let mut basis = Vec::new();
        match kind {
            AlgebraKind::Gl => {
                for i in 0..n {
                    for j in 0..n {
                        basis.push(elementary(n, i, j));
                    }
                }
            }
            AlgebraKind::Sl => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            basis.push(elementary(n, i, j));
                        }
                    }
                }
                for k in 0..n - 1 {
                    basis.push(elementary(n, k, k) - elementary(n, k + 1, k + 1));
                }
            }
        }
        let dim = basis.len();
        let gram = DMatrix::from_fn(dim, dim, |a, b| trace_pairing(&basis[a], &basis[b]));
        let inv = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("trace form is degenerate on the basis".into()))?;
        // e^a = Σ_b (G⁻¹)_{ab} e_b gives tr(e_a e^b) = δ_a^b since G is symmetric.
        let dual = (0..dim)
            .map(|a| {
                let mut m = CMatrix::zeros(n, n);
                for b in 0..dim {
                    m += &basis[b] * inv[(a, b)];
                }
                m
            })
            .collect();
        Ok(AlgebraSpec { n, kind, basis, dual })
    }

    pub fn gl(n: usize) -> Self {
        Self::new(n, AlgebraKind::Gl).expect("gl(n) for n ≥ 1")
    }

    pub fn sl(n: usize) -> Self {
        Self::new(n, AlgebraKind::Sl).expect("sl(n) for n ≥ 2")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn dual_basis(&self) -> &[CMatrix] {
        &self.dual
    }

    /// Coordinates `tr(x·e^a)`.
    pub fn coords(&self, x: &CMatrix) -> Vec<Complex64> {
        self.dual.iter().map(|d| trace_pairing(x, d)).collect()
    }

    pub fn from_coords(&self, c: &[Complex64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for (e, &ca) in self.basis.iter().zip(c) {
            m += e * ca;
        }
        m
    }

    /// Orthogonal projection of an arbitrary matrix onto the algebra.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        match self.kind {
            AlgebraKind::Gl => x.clone(),
            AlgebraKind::Sl => {
                let t = x.trace() / self.n as f64;
                x - CMatrix::identity(self.n, self.n) * t
            }
        }
    }

    pub fn contains(&self, x: &CMatrix, tol: f64) -> bool {
        x.nrows() == self.n
            && x.ncols() == self.n
            && match self.kind {
                AlgebraKind::Gl => true,
                AlgebraKind::Sl => x.trace().norm() <= tol,
            }
    }

    /// Split Casimir `Σ_a e_a ⊗ e^a`.
    pub fn casimir(&self) -> TensorElement {
        let mut p = TensorElement::zeros(self.n);
        for (e, d) in self.basis.iter().zip(&self.dual) {
            p.add_outer(e, d, Complex64::new(1.0, 0.0));
        }
        p
    }

    /// Basis orthonormal for the Hermitian Frobenius product.
    fn orthonormal_basis(&self) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = Vec::new();
        for e in &self.basis {
            let mut v = e.clone();
            for u in &out {
                let c = u.dotc(&v);
                v -= u * c;
            }
            let nv = v.norm();
            out.push(v / Complex64::new(nv, 0.0));
        }
        out
    }
}

/// Inverse with a condition-number guard.
pub fn checked_inverse(g: &CMatrix) -> Result<CMatrix> {
    let inv = g
        .clone()
        .try_inverse()
        .ok_or(Error::SingularGroupElement { condition: f64::INFINITY })?;
    let cond = g.norm() * inv.norm();
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::SingularGroupElement { condition: cond });
    }
    Ok(inv)
}

/// `g·x·g⁻¹`.
pub fn adjoint(g: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    let inv = checked_inverse(g)?;
    Ok(g * x * inv)
}

/// Operator norm of `Ad g` on the algebra, induced by the Frobenius norm.
pub fn adjoint_operator_norm(spec: &AlgebraSpec, g: &CMatrix) -> Result<f64> {
    let inv = checked_inverse(g)?;
    let ortho = spec.orthonormal_basis();
    let dim = ortho.len();
    let images: Vec<CMatrix> = ortho.iter().map(|e| g * e * &inv).collect();
    let m = DMatrix::from_fn(dim, dim, |a, b| ortho[a].dotc(&images[b]));
    Ok(m.singular_values().max())
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let norm = x.norm();
    let mut s = 0;
    if norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as i32;
    }
    let scaled = x / Complex64::new(2f64.powi(s), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=20 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Which factor of `g⊗g` an operation touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// `Σ T[i][j][k][l] E_ij ⊗ E_kl`, flattened row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorElement {
    n: usize,
    data: Vec<Complex64>,
}

impl TensorElement {
    pub fn zeros(n: usize) -> Self {
        TensorElement { n, data: vec![Complex64::new(0.0, 0.0); n * n * n * n] }
    }

    pub fn from_vec(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n * n * n {
            return Err(Error::Shape(format!("tensor of size {n} needs {} entries, got {}", n.pow(4), data.len())));
        }
        Ok(TensorElement { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: Complex64) {
        let ix = self.idx(i, j, k, l);
        self.data[ix] = v;
    }

    pub fn outer(x: &CMatrix, y: &CMatrix) -> Self {
        let mut t = TensorElement::zeros(x.nrows());
        t.add_outer(x, y, Complex64::new(1.0, 0.0));
        t
    }

    /// `self += c·(x ⊗ y)`.
    pub fn add_outer(&mut self, x: &CMatrix, y: &CMatrix, c: Complex64) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let xij = x[(i, j)] * c;
                if xij == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        let ix = self.idx(i, j, k, l);
                        self.data[ix] += xij * y[(k, l)];
                    }
                }
            }
        }
    }

    /// Frobenius norm over all four indices.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Factor swap `T^{(21)}`.
    pub fn swap(&self) -> Self {
        let n = self.n;
        let mut out = TensorElement::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out.set(k, l, i, j, self.get(i, j, k, l));
                    }
                }
            }
        }
        out
    }

    /// Operator product on `Cⁿ⊗Cⁿ`.
    pub fn compose(&self, other: &TensorElement) -> Self {
        let n = self.n;
        let mut out = TensorElement::zeros(n);
        for i in 0..n {
            for m in 0..n {
                for k in 0..n {
                    for o in 0..n {
                        let t = self.get(i, m, k, o);
                        if t == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for j in 0..n {
                            for l in 0..n {
                                let ix = out.idx(i, j, k, l);
                                out.data[ix] += t * other.get(m, j, o, l);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &TensorElement) -> Self {
        &self.compose(other) - &other.compose(self)
    }

    /// `(m⊗1)·T` or `(1⊗m)·T`.
    pub fn left_mul(&self, side: Side, m: &CMatrix) -> Self {
        let n = self.n;
        let mut out = TensorElement::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = Complex64::new(0.0, 0.0);
                        for q in 0..n {
                            s += match side {
                                Side::First => m[(i, q)] * self.get(q, j, k, l),
                                Side::Second => m[(k, q)] * self.get(i, j, q, l),
                            };
                        }
                        out.set(i, j, k, l, s);
                    }
                }
            }
        }
        out
    }

    /// `T·(m⊗1)` or `T·(1⊗m)`.
    pub fn right_mul(&self, side: Side, m: &CMatrix) -> Self {
        let n = self.n;
        let mut out = TensorElement::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = Complex64::new(0.0, 0.0);
                        for q in 0..n {
                            s += match side {
                                Side::First => self.get(i, q, k, l) * m[(q, j)],
                                Side::Second => self.get(i, j, k, q) * m[(q, l)],
                            };
                        }
                        out.set(i, j, k, l, s);
                    }
                }
            }
        }
        out
    }

    /// `Ad g` on one factor.
    pub fn act(&self, side: Side, g: &CMatrix) -> Result<Self> {
        let inv = checked_inverse(g)?;
        Ok(self.left_mul(side, g).right_mul(side, &inv))
    }

    /// `[T, x⊗1]` or `[T, 1⊗x]`.
    pub fn commutator_with(&self, x: &CMatrix, side: Side) -> Self {
        &self.right_mul(side, x) - &self.left_mul(side, x)
    }

    /// Contraction `Σ T[i][j][k][l]·x[j][i]·y[l][k] = (tr⊗tr)(T·(x⊗y))`.
    pub fn pair(&self, x: &CMatrix, y: &CMatrix) -> Complex64 {
        let n = self.n;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        s += self.get(i, j, k, l) * x[(j, i)] * y[(l, k)];
                    }
                }
            }
        }
        s
    }

    /// Realisation as an `n²×n²` matrix with rows `(i,k)` and columns `(j,l)`.
    pub fn to_operator(&self) -> CMatrix {
        let n = self.n;
        DMatrix::from_fn(n * n, n * n, |r, c| self.get(r / n, c / n, r % n, c % n))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        TensorElement { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }
}

impl Add for &TensorElement {
    type Output = TensorElement;
    fn add(self, rhs: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &TensorElement {
    type Output = TensorElement;
    fn sub(self, rhs: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&TensorElement> for TensorElement {
    fn add_assign(&mut self, rhs: &TensorElement) {
        assert_eq!(self.n, rhs.n, "tensor size mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&TensorElement> for TensorElement {
    fn sub_assign(&mut self, rhs: &TensorElement) {
        assert_eq!(self.n, rhs.n, "tensor size mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &TensorElement {
    type Output = TensorElement;
    fn neg(self) -> TensorElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &TensorElement {
    type Output = TensorElement;
    fn mul(self, c: Complex64) -> TensorElement {
        self.scale(c)
    }
}
