//! Row-major `n×n` kernels on flat slices for the series inner loops.

use num_complex::Complex64;

use crate::liealg::CMatrix;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn to_flat(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub(crate) fn from_flat(n: usize, v: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

#[inline(always)]
fn mul2(a: &[Complex64], b: &[Complex64]) -> [Complex64; 4] {
    let (a, b) = (&a[..4], &b[..4]);
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// `out = a·b`.
#[inline]
pub(crate) fn matmul(n: usize, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    if n == 2 {
        out[..4].copy_from_slice(&mul2(a, b));
        return;
    }
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
}

/// `out += a·b`.
#[inline]
pub(crate) fn matmul_add(n: usize, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    if n == 2 {
        for (o, v) in out[..4].iter_mut().zip(mul2(a, b)) {
            *o += v;
        }
        return;
    }
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] += s;
        }
    }
}

/// `out = a·x·b`, using `tmp` as scratch.
#[inline]
pub(crate) fn sandwich(n: usize, a: &[Complex64], x: &[Complex64], b: &[Complex64], tmp: &mut [Complex64], out: &mut [Complex64]) {
    matmul(n, a, x, tmp);
    matmul(n, tmp, b, out);
}

/// `out += c·(a·b − b·a)`.
#[inline]
pub(crate) fn commutator_add(n: usize, a: &[Complex64], b: &[Complex64], c: Complex64, out: &mut [Complex64]) {
    if n == 2 {
        let (ab, ba) = (mul2(a, b), mul2(b, a));
        for k in 0..4 {
            out[k] += c * (ab[k] - ba[k]);
        }
        return;
    }
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j] - b[i * n + k] * a[k * n + j];
            }
            out[i * n + j] += c * s;
        }
    }
}

/// Nonzero entries of a matrix, for sparse basis elements.
pub(crate) fn sparse_entries(m: &CMatrix) -> Vec<(usize, usize, Complex64)> {
    let n = m.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] != ZERO {
                out.push((i, j, m[(i, j)]));
            }
        }
    }
    out
}

/// Neumaier-compensated running sum of a vector.
#[derive(Clone, Debug)]
pub(crate) struct CompensatedSum {
    sum: Vec<Complex64>,
    comp: Vec<Complex64>,
}

#[inline]
fn two_sum(s: f64, x: f64, c: &mut f64) -> f64 {
    let t = s + x;
    if s.abs() >= x.abs() {
        *c += (s - t) + x;
    } else {
        *c += (x - t) + s;
    }
    t
}

impl CompensatedSum {
    pub(crate) fn new(len: usize) -> Self {
        CompensatedSum { sum: vec![ZERO; len], comp: vec![ZERO; len] }
    }

    #[inline]
    pub(crate) fn add(&mut self, v: &[Complex64]) {
        for ((s, c), x) in self.sum.iter_mut().zip(self.comp.iter_mut()).zip(v) {
            s.re = two_sum(s.re, x.re, &mut c.re);
            s.im = two_sum(s.im, x.im, &mut c.im);
        }
    }

    pub(crate) fn total(&self) -> Vec<Complex64> {
        self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect()
    }
}
