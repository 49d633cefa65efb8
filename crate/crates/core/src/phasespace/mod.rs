//! Points `(g_i, ξ_i)` of `T*G^l` in left trivialisation, the holonomy
//! homomorphism `γ ↦ g_γ` with exact derivatives, the moment map, and the
//! contraction factor that gates convergence of every Poincaré series.

mod bracket;
pub mod poly;

pub use bracket::{
    poisson_bracket, poisson_bracket_fd, Constant, GEntry, Observable, Tabulated, XiPairing,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{adjoint_operator_norm, checked_inverse, expm, AlgebraKind, AlgebraSpec, CMatrix};
use crate::moebius::{SchottkyData, Word};
use crate::serde_util;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    #[serde(with = "serde_util::matrix_list")]
    pub g: Vec<CMatrix>,
    #[serde(with = "serde_util::matrix_list")]
    pub xi: Vec<CMatrix>,
}

impl PhasePoint {
    pub fn new(g: Vec<CMatrix>, xi: Vec<CMatrix>) -> Self {
        PhasePoint { g, xi }
    }

    /// All `g_i = 1`.
    pub fn at_identity(xi: Vec<CMatrix>) -> Self {
        let n = xi.first().map_or(1, |x| x.nrows());
        let g = vec![CMatrix::identity(n, n); xi.len()];
        PhasePoint { g, xi }
    }

    pub fn genus(&self) -> usize {
        self.g.len()
    }

    pub fn n(&self) -> usize {
        self.g.first().map_or(0, |g| g.nrows())
    }

    pub fn validate(&self, spec: &AlgebraSpec) -> Result<()> {
        if self.g.len() != self.xi.len() || self.g.is_empty() {
            return Err(Error::Shape(format!("{} group elements but {} covectors", self.g.len(), self.xi.len())));
        }
        let n = spec.n();
        for (i, (g, x)) in self.g.iter().zip(&self.xi).enumerate() {
            if g.shape() != (n, n) || x.shape() != (n, n) {
                return Err(Error::Shape(format!("factor {} is not {n}×{n}", i + 1)));
            }
            checked_inverse(g)?;
            if spec.kind() == AlgebraKind::Sl {
                if (g.determinant() - 1.0).norm() > 1e-10 {
                    return Err(Error::InvalidInput(format!("det g_{} ≠ 1", i + 1)));
                }
                if x.trace().norm() > 1e-12 {
                    return Err(Error::InvalidInput(format!("tr ξ_{} ≠ 0", i + 1)));
                }
            }
        }
        Ok(())
    }

    /// Copy with `g_i ↦ g_i·exp(t·x)`.
    pub fn translate_g(&self, i: usize, x: &CMatrix, t: f64) -> Self {
        let mut q = self.clone();
        q.g[i] = &self.g[i] * expm(&(x * Complex64::new(t, 0.0)));
        q
    }

    /// Copy with `ξ_i ↦ ξ_i + t·x`.
    pub fn shift_xi(&self, i: usize, x: &CMatrix, t: f64) -> Self {
        let mut q = self.clone();
        q.xi[i] = &self.xi[i] + x * Complex64::new(t, 0.0);
        q
    }
}

fn letter_element(p: &PhasePoint, gen: usize, inverse: bool) -> Result<CMatrix> {
    let g = p.g.get(gen).ok_or(Error::IndexOutOfRange { index: gen, len: p.g.len() })?;
    if inverse {
        checked_inverse(g)
    } else {
        Ok(g.clone())
    }
}

/// `g_w`, the product of `g_i^{±1}` in letter order.
pub fn holonomy(w: &Word, p: &PhasePoint) -> Result<CMatrix> {
    let n = p.n();
    let mut m = CMatrix::identity(n, n);
    for x in w.letters() {
        m = &m * letter_element(p, x.generator, x.inverse)?;
    }
    Ok(m)
}

/// Derivative of `g_w` under `g_j ↦ g_j·exp(t·x)` at `t = 0`.
pub fn holonomy_derivative(w: &Word, p: &PhasePoint, j: usize, x: &CMatrix) -> Result<CMatrix> {
    if j >= p.genus() {
        return Err(Error::IndexOutOfRange { index: j, len: p.genus() });
    }
    let n = p.n();
    let mut g = CMatrix::identity(n, n);
    let mut dg = CMatrix::zeros(n, n);
    for l in w.letters() {
        let h = letter_element(p, l.generator, l.inverse)?;
        let dh = if l.generator != j {
            None
        } else if l.inverse {
            Some(-(x * &h))
        } else {
            Some(&h * x)
        };
        dg = &dg * &h;
        if let Some(dh) = dh {
            dg += &g * dh;
        }
        g = &g * &h;
    }
    Ok(dg)
}

/// `Σ_i (Ad(g_i)ξ_i − ξ_i)`.
pub fn moment_map(p: &PhasePoint) -> Result<CMatrix> {
    let n = p.n();
    let mut m = CMatrix::zeros(n, n);
    for (g, x) in p.g.iter().zip(&p.xi) {
        let gi = checked_inverse(g)?;
        m += g * x * gi - x;
    }
    Ok(m)
}

/// `κ = Σ_i |q_i|·(‖Ad g_i‖ + ‖Ad g_i⁻¹‖)`.
pub fn contraction_factor(spec: &AlgebraSpec, p: &PhasePoint, s: &SchottkyData) -> Result<f64> {
    if p.genus() != s.genus() {
        return Err(Error::Shape(format!("{} group elements for genus {}", p.genus(), s.genus())));
    }
    let mut kappa = 0.0;
    for (g, pair) in p.g.iter().zip(&s.pairs) {
        let q = pair.gamma.multiplier()?.norm();
        let gi = checked_inverse(g)?;
        kappa += q * (adjoint_operator_norm(spec, g)? + adjoint_operator_norm(spec, &gi)?);
    }
    Ok(kappa)
}

/// Least-norm change of the `ξ_i` that makes the moment map vanish.
pub fn project_to_zero_level(spec: &AlgebraSpec, p: &PhasePoint) -> Result<PhasePoint> {
    let l = p.genus();
    let dim = spec.dim();
    let mut a = DMatrix::<Complex64>::zeros(dim, l * dim);
    for i in 0..l {
        let gi = checked_inverse(&p.g[i])?;
        for (al, e) in spec.basis().iter().enumerate() {
            let img = &p.g[i] * e * &gi - e;
            for (row, v) in spec.coords(&img).into_iter().enumerate() {
                a[(row, i * dim + al)] = v;
            }
        }
    }
    let m = nalgebra::DVector::from_vec(spec.coords(&moment_map(p)?));
    let pinv = a
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::InvalidInput(format!("pseudo-inverse failed: {e}")))?;
    let delta = pinv * m;
    let mut q = p.clone();
    for i in 0..l {
        let c: Vec<Complex64> = (0..dim).map(|al| delta[i * dim + al]).collect();
        q.xi[i] -= spec.from_coords(&c);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{Letter, MoebiusMap, SchottkyPair};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mat(v: [f64; 8]) -> CMatrix {
        DMatrix::from_fn(2, 2, |i, j| c(v[2 * (2 * i + j)], v[2 * (2 * i + j) + 1]))
    }

    fn sample_point() -> PhasePoint {
        let g1 = expm(&mat([0.2, 0.1, -0.3, 0.05, 0.15, -0.2, 0.1, 0.3]));
        let g2 = expm(&mat([-0.1, 0.2, 0.25, 0.0, -0.3, 0.1, 0.05, -0.15]));
        let x1 = mat([0.5, -0.2, 0.1, 0.3, -0.4, 0.2, 0.7, 0.0]);
        let x2 = mat([-0.3, 0.1, 0.6, -0.5, 0.2, 0.2, 0.1, 0.4]);
        PhasePoint::new(vec![g1, g2], vec![x1, x2])
    }

    fn word(idx: &[usize]) -> Word {
        Word::new(idx.iter().map(|&k| Letter::from_index(k)).collect()).unwrap()
    }

    #[test]
    fn holonomy_examples() {
        let p = sample_point();
        assert_eq!(holonomy(&Word::identity(), &p).unwrap(), CMatrix::identity(2, 2));
        assert!((holonomy(&word(&[0]), &p).unwrap() - &p.g[0]).norm() < 1e-15);
        let w = holonomy(&word(&[0, 3]), &p).unwrap();
        let want = holonomy(&word(&[0]), &p).unwrap() * holonomy(&word(&[3]), &p).unwrap();
        assert!((w - want).norm() < 1e-12);
    }

    #[test]
    fn single_letter_derivatives() {
        let p = sample_point();
        let x = mat([0.1, 0.2, -0.3, 0.0, 0.4, 0.1, 0.0, -0.2]);
        let d = holonomy_derivative(&word(&[0]), &p, 0, &x).unwrap();
        assert!((d - &p.g[0] * &x).norm() < 1e-15);
        let d = holonomy_derivative(&word(&[1]), &p, 0, &x).unwrap();
        let gi = checked_inverse(&p.g[0]).unwrap();
        assert!((d + &x * gi).norm() < 1e-14);
        assert!(holonomy_derivative(&word(&[2, 2]), &p, 0, &x).unwrap().norm() == 0.0);
    }

    #[test]
    fn moment_map_examples() {
        let x = mat([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = PhasePoint::at_identity(vec![x.clone()]);
        assert!(moment_map(&p).unwrap().norm() == 0.0);
        let d = mat([2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0]);
        let p = PhasePoint::new(vec![d], vec![x.clone()]);
        assert!((moment_map(&p).unwrap() - x * c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_level_projection() {
        for spec in [AlgebraSpec::gl(2), AlgebraSpec::sl(2)] {
            let mut p = sample_point();
            for x in p.xi.iter_mut() {
                *x = spec.project(x);
            }
            let q = project_to_zero_level(&spec, &p).unwrap();
            assert!(moment_map(&q).unwrap().norm() < 1e-10);
            assert!(moment_map(&p).unwrap().norm() > 1e-2);
        }
    }

    #[test]
    fn contraction_factor_examples() {
        let spec = AlgebraSpec::gl(2);
        let gamma = MoebiusMap::loxodromic(c(1.0, 0.0), c(-1.0, 0.0), c(0.16, 0.0)).unwrap();
        let s = SchottkyData { pairs: vec![SchottkyPair::from_generator(gamma).unwrap()] };
        let x = CMatrix::zeros(2, 2);
        let p = PhasePoint::at_identity(vec![x.clone()]);
        assert!((contraction_factor(&spec, &p, &s).unwrap() - 0.32).abs() < 1e-12);
        let th: f64 = 1.1;
        let u = mat([th.cos(), 0.0, -th.sin(), 0.0, th.sin(), 0.0, th.cos(), 0.0]);
        let p = PhasePoint::new(vec![u], vec![x.clone()]);
        assert!((contraction_factor(&spec, &p, &s).unwrap() - 0.32).abs() < 1e-12);
        let gamma = MoebiusMap::loxodromic(c(1.0, 0.0), c(-1.0, 0.0), c(0.1, 0.0)).unwrap();
        let s = SchottkyData { pairs: vec![SchottkyPair::from_generator(gamma).unwrap()] };
        let d = mat([2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0]);
        let p = PhasePoint::new(vec![d], vec![x]);
        assert!((contraction_factor(&spec, &p, &s).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn phase_point_json_round_trip() {
        let p = sample_point();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"g\":[[[["));
        let q: PhasePoint = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    proptest! {
        #[test]
        fn holonomy_derivative_matches_central_difference(
            idx in prop::collection::vec(0usize..4, 0..6),
            j in 0usize..2,
            v in prop::array::uniform8(-1.0f64..1.0),
        ) {
            let p = sample_point();
            let w = Word::identity().concat(&Word::new(vec![]).unwrap());
            let w = idx.iter().fold(w, |acc, &k| acc.concat(&word(&[k])));
            let x = mat(v);
            let h = 1e-6;
            let plus = holonomy(&w, &p.translate_g(j, &x, h)).unwrap();
            let minus = holonomy(&w, &p.translate_g(j, &x, -h)).unwrap();
            let fd = (plus - minus) / c(2.0 * h, 0.0);
            let an = holonomy_derivative(&w, &p, j, &x).unwrap();
            prop_assert!((&fd - &an).norm() <= 1e-6 * an.norm().max(1e-3));
        }
    }
}
