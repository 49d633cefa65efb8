//! Polynomial observables in the entries of `g_i` and `ξ_i`, with a symbolic
//! bracket for `gl_n` built from the fundamental relations. They give an
//! oracle for the bracket engine that shares no derivative code with it.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Observable, PhasePoint};
use crate::error::Result;
use crate::liealg::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    G { factor: usize, row: usize, col: usize },
    Xi { factor: usize, row: usize, col: usize },
}

impl Var {
    fn eval(self, p: &PhasePoint) -> Complex64 {
        match self {
            Var::G { factor, row, col } => p.g[factor][(row, col)],
            Var::Xi { factor, row, col } => p.xi[factor][(row, col)],
        }
    }
}

/// Sorted `(variable, exponent)` pairs with positive exponents.
type Monomial = Vec<(Var, u32)>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Complex64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![(v, 1)], Complex64::new(1.0, 0.0));
        p
    }

    pub fn g(factor: usize, row: usize, col: usize) -> Self {
        Self::var(Var::G { factor, row, col })
    }

    pub fn xi(factor: usize, row: usize, col: usize) -> Self {
        Self::var(Var::Xi { factor, row, col })
    }

    fn add_term(&mut self, m: Monomial, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, &v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let mut merged: BTreeMap<Var, u32> = ma.iter().copied().collect();
                for &(v, e) in mb {
                    *merged.entry(v).or_insert(0) += e;
                }
                out.add_term(merged.into_iter().collect(), ca * cb);
            }
        }
        out
    }

    pub fn partial(&self, v: Var) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, &c) in &self.terms {
            if let Some(pos) = m.iter().position(|&(w, _)| w == v) {
                let e = m[pos].1;
                let mut dm = m.clone();
                if e == 1 {
                    dm.remove(pos);
                } else {
                    dm[pos].1 = e - 1;
                }
                out.add_term(dm, c * e as f64);
            }
        }
        out
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.terms.keys().flat_map(|m| m.iter().map(|&(v, _)| v)).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn eval(&self, p: &PhasePoint) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, &c)| m.iter().fold(c, |acc, &(v, e)| acc * v.eval(p).powu(e)))
            .sum()
    }
}

impl Observable for Polynomial {
    fn value(&self, p: &PhasePoint) -> Result<Complex64> {
        Ok(self.eval(p))
    }

    fn g_derivative(&self, p: &PhasePoint, i: usize, x: &CMatrix) -> Result<Complex64> {
        let gx = &p.g[i] * x;
        let mut s = Complex64::new(0.0, 0.0);
        for v in self.variables() {
            if let Var::G { factor, row, col } = v {
                if factor == i {
                    s += self.partial(v).eval(p) * gx[(row, col)];
                }
            }
        }
        Ok(s)
    }

    fn xi_gradient(&self, p: &PhasePoint, i: usize) -> Result<CMatrix> {
        let mut b = CMatrix::zeros(p.n(), p.n());
        for v in self.variables() {
            if let Var::Xi { factor, row, col } = v {
                if factor == i {
                    b[(col, row)] += self.partial(v).eval(p);
                }
            }
        }
        Ok(b)
    }
}

/// `{u, v}` for two coordinate functions on `T*GL_n^l`:
/// `{g_ab, ξ_cd} = δ_bc g_ad` and `{ξ_ab, ξ_cd} = δ_bc ξ_ad − δ_ad ξ_cb`
/// on a common factor, zero otherwise.
fn fundamental(u: Var, v: Var) -> Polynomial {
    match (u, v) {
        (Var::G { factor: f1, row: a, col: b }, Var::Xi { factor: f2, row: c, col: d }) if f1 == f2 => {
            if b == c {
                Polynomial::g(f1, a, d)
            } else {
                Polynomial::zero()
            }
        }
        (Var::Xi { .. }, Var::G { .. }) => fundamental(v, u).scale(Complex64::new(-1.0, 0.0)),
        (Var::Xi { factor: f1, row: a, col: b }, Var::Xi { factor: f2, row: c, col: d }) if f1 == f2 => {
            let mut out = Polynomial::zero();
            if b == c {
                out = out.add(&Polynomial::xi(f1, a, d));
            }
            if a == d {
                out = out.add(&Polynomial::xi(f1, c, b).scale(Complex64::new(-1.0, 0.0)));
            }
            out
        }
        _ => Polynomial::zero(),
    }
}

/// Symbolic bracket on `gl_n` by the Leibniz rule over coordinate functions.
pub fn symbolic_bracket(f: &Polynomial, h: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero();
    let fv = f.variables();
    let hv = h.variables();
    for &u in &fv {
        let du = f.partial(u);
        for &v in &hv {
            let b = fundamental(u, v);
            if b.num_terms() == 0 {
                continue;
            }
            out = out.add(&du.mul(&h.partial(v)).mul(&b));
        }
    }
    out
}
