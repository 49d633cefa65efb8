//! Trapezoidal rule on circles, `(1/2πi)∮ f(z) dz`.
//!
//! For integrands analytic on an annulus around the circle the error decays
//! geometrically in the node count. The error estimate compares `N` nodes
//! with the even-indexed `N/2`, so refinement reuses every evaluation.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liealg::{CMatrix, TensorElement};
use crate::moebius::{Circle, SchottkyData};

/// Values the rule can integrate.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    /// `self += c·x`.
    fn axpy(&mut self, c: Complex64, x: &Self);
    fn distance(&self, other: &Self) -> f64;
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, c: Complex64, x: &Self) {
        *self += c * x;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl QuadValue for CMatrix {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
    fn axpy(&mut self, c: Complex64, x: &Self) {
        *self += x * c;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl QuadValue for TensorElement {
    fn zero_like(&self) -> Self {
        TensorElement::zeros(self.n())
    }
    fn axpy(&mut self, c: Complex64, x: &Self) {
        for (a, b) in self.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *a += c * b;
        }
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl QuadValue for Vec<CMatrix> {
    fn zero_like(&self) -> Self {
        self.iter().map(|m| m.zero_like()).collect()
    }
    fn axpy(&mut self, c: Complex64, x: &Self) {
        for (a, b) in self.iter_mut().zip(x) {
            a.axpy(c, b);
        }
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a.distance(b).powi(2)).sum::<f64>().sqrt()
    }
}

impl QuadValue for Vec<TensorElement> {
    fn zero_like(&self) -> Self {
        self.iter().map(|m| m.zero_like()).collect()
    }
    fn axpy(&mut self, c: Complex64, x: &Self) {
        for (a, b) in self.iter_mut().zip(x) {
            a.axpy(c, b);
        }
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a.distance(b).powi(2)).sum::<f64>().sqrt()
    }
}

/// A circle traversed counterclockwise unless `clockwise` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec {
    pub circle: Circle,
    pub nodes: usize,
    pub clockwise: bool,
}

impl ContourSpec {
    /// `nodes` must be a power of two, at least 16.
    pub fn new(circle: Circle, nodes: usize) -> Result<Self> {
        if nodes < 16 || !nodes.is_power_of_two() {
            return Err(Error::InvalidInput(format!("node count {nodes} must be a power of two ≥ 16")));
        }
        if !(circle.radius > 0.0) {
            return Err(Error::InvalidInput("contour radius must be positive".into()));
        }
        Ok(ContourSpec { circle, nodes, clockwise: false })
    }

    pub fn reversed(mut self) -> Self {
        self.clockwise = !self.clockwise;
        self
    }

    fn sign(&self) -> f64 {
        if self.clockwise {
            -1.0
        } else {
            1.0
        }
    }

    /// Node `k` of `m` and its weight `(z_k − c)/m`.
    fn node(&self, k: usize, m: usize) -> (Complex64, Complex64) {
        let off = Complex64::from_polar(self.circle.radius, TAU * k as f64 / m as f64);
        (self.circle.center + off, off / m as f64)
    }
}

/// Stopping rule for adaptive refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Accept once `|I_N − I_{N/2}|` is at most this.
    pub tolerance: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { tolerance: 1e-11, max_nodes: 1024 }
    }
}

#[derive(Clone, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    /// `|I_N − I_{N/2}|`.
    pub error_estimate: f64,
    pub nodes: usize,
}

fn collision(e: Error) -> Error {
    match e {
        Error::NearPole { z, .. } | Error::PoleAtZ { z } => Error::PoleCollision { z },
        other => other,
    }
}

/// Trapezoid sums with `m` and `m/2` nodes from values at the `m` nodes.
fn trapezoid<T: QuadValue>(c: &ContourSpec, vals: &[T]) -> (T, T) {
    let m = vals.len();
    let mut full = vals[0].zero_like();
    let mut half = vals[0].zero_like();
    for (k, v) in vals.iter().enumerate() {
        let (_, w) = c.node(k, m);
        full.axpy(w * c.sign(), v);
        if k % 2 == 0 {
            half.axpy(w * 2.0 * c.sign(), v);
        }
    }
    (full, half)
}

/// `(1/2πi)∮ f dz` with exactly `c.nodes` nodes; no convergence test.
pub fn contour_integral_fixed<T: QuadValue>(c: &ContourSpec, mut f: impl FnMut(Complex64) -> Result<T>) -> Result<Quadrature<T>> {
    let vals = (0..c.nodes)
        .map(|k| f(c.node(k, c.nodes).0).map_err(collision))
        .collect::<Result<Vec<T>>>()?;
    let (full, half) = trapezoid(c, &vals);
    Ok(Quadrature { error_estimate: full.distance(&half), value: full, nodes: c.nodes })
}

/// `(1/2πi)∮ f dz`, doubling the node count from `c.nodes` until the
/// `N`/`N/2` discrepancy is within tolerance.
pub fn contour_integral<T: QuadValue>(
    c: &ContourSpec,
    opts: QuadratureOptions,
    mut f: impl FnMut(Complex64) -> Result<T>,
) -> Result<Quadrature<T>> {
    let mut m = c.nodes;
    let mut vals = (0..m).map(|k| f(c.node(k, m).0).map_err(collision)).collect::<Result<Vec<T>>>()?;
    loop {
        let (full, half) = trapezoid(c, &vals);
        let err = full.distance(&half);
        if err <= opts.tolerance {
            return Ok(Quadrature { value: full, error_estimate: err, nodes: m });
        }
        if 2 * m > opts.max_nodes {
            return Err(Error::QuadratureNotConverged { discrepancy: err, nodes: m });
        }
        let mut next = Vec::with_capacity(2 * m);
        for (k, v) in vals.into_iter().enumerate() {
            next.push(v);
            next.push(f(c.node(2 * k + 1, 2 * m).0).map_err(collision)?);
        }
        vals = next;
        m *= 2;
    }
}

/// Iterated `(1/2πi)² ∮_{ci}∮_{cj} K(z,w) dw dz` on a product grid; both
/// node counts double together.
pub fn double_contour_integral<T: QuadValue>(
    ci: &ContourSpec,
    cj: &ContourSpec,
    opts: QuadratureOptions,
    mut k: impl FnMut(Complex64, Complex64) -> Result<T>,
) -> Result<Quadrature<T>> {
    let mut m = ci.nodes.max(cj.nodes);
    let mut grid: Vec<Option<T>> = vec![None; m * m];
    loop {
        for a in 0..m {
            for b in 0..m {
                if grid[a * m + b].is_none() {
                    let z = ci.node(a, m).0;
                    let w = cj.node(b, m).0;
                    grid[a * m + b] = Some(k(z, w).map_err(collision)?);
                }
            }
        }
        let first = grid[0].as_ref().expect("filled");
        let mut full = first.zero_like();
        let mut half = first.zero_like();
        let sign = ci.sign() * cj.sign();
        for a in 0..m {
            let (_, wa) = ci.node(a, m);
            for b in 0..m {
                let (_, wb) = cj.node(b, m);
                let v = grid[a * m + b].as_ref().expect("filled");
                full.axpy(wa * wb * sign, v);
                if a % 2 == 0 && b % 2 == 0 {
                    half.axpy(wa * wb * 4.0 * sign, v);
                }
            }
        }
        let err = full.distance(&half);
        if err <= opts.tolerance {
            return Ok(Quadrature { value: full, error_estimate: err, nodes: m });
        }
        if 2 * m > opts.max_nodes {
            return Err(Error::QuadratureNotConverged { discrepancy: err, nodes: m });
        }
        let mut next: Vec<Option<T>> = vec![None; 4 * m * m];
        for a in 0..m {
            for b in 0..m {
                next[(2 * a) * (2 * m) + 2 * b] = grid[a * m + b].take();
            }
        }
        grid = next;
        m *= 2;
    }
}

/// Concentric circle of radius `(1+ε)·r` around disc `index` of `s`
/// (inner circles first, then outer), checked against every other disc.
pub fn deformed_circle(s: &SchottkyData, index: usize, epsilon: f64) -> Result<Circle> {
    let discs: Vec<Circle> = s.circles().copied().collect();
    let c = *discs.get(index).ok_or(Error::IndexOutOfRange { index, len: discs.len() })?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("deformation must strictly enlarge the circle".into()));
    }
    let out = Circle::new(c.center, c.radius * (1.0 + epsilon));
    let clearance = discs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != index)
        .map(|(_, d)| (d.center - out.center).norm() - d.radius - out.radius)
        .fold(f64::INFINITY, f64::min);
    if clearance <= s.default_margin() {
        return Err(Error::LeavesFundamentalDomain { clearance });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::AlgebraSpec;
    use crate::moebius::{MoebiusMap, SchottkyPair};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(nodes: usize) -> ContourSpec {
        ContourSpec::new(Circle::new(c(0.0, 0.0), 1.0), nodes).unwrap()
    }

    #[test]
    fn classic_residues() {
        let o = QuadratureOptions::default();
        let r = contour_integral(&unit(16), o, |z| Ok(z.inv())).unwrap();
        assert!((r.value - 1.0).norm() < 1e-14);
        let r = contour_integral(&unit(16), o, Ok).unwrap();
        assert!(r.value.norm() < 1e-14);
        let r = contour_integral(&unit(16), o, |z| Ok(z.exp() / (z * z))).unwrap();
        assert!((r.value - 1.0).norm() < 1e-13);
    }

    #[test]
    fn reversal_flips_sign() {
        let o = QuadratureOptions::default();
        let f = |z: Complex64| Ok((z - 0.3).inv() * c(2.0, 1.0) + z * z);
        let a = contour_integral(&unit(32), o, f).unwrap().value;
        let b = contour_integral(&unit(32).reversed(), o, f).unwrap().value;
        assert!((a + b).norm() < 1e-14);
        assert!((a - c(2.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn refinement_and_failure() {
        // Pole close to the contour forces refinement.
        let f = |z: Complex64| Ok((z - 0.9).inv());
        let r = contour_integral(&unit(16), QuadratureOptions { tolerance: 1e-12, max_nodes: 4096 }, f).unwrap();
        assert!(r.nodes > 16);
        assert!((r.value - 1.0).norm() < 1e-12);
        let e = contour_integral(&unit(16), QuadratureOptions { tolerance: 1e-14, max_nodes: 32 }, f);
        assert!(matches!(e, Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn node_count_validated() {
        assert!(ContourSpec::new(Circle::new(c(0.0, 0.0), 1.0), 8).is_err());
        assert!(ContourSpec::new(Circle::new(c(0.0, 0.0), 1.0), 100).is_err());
    }

    #[test]
    fn double_integral_of_product_of_poles() {
        let spec = AlgebraSpec::gl(2);
        let p = spec.casimir();
        let ci = ContourSpec::new(Circle::new(c(0.0, 0.0), 1.0), 16).unwrap();
        let cj = ContourSpec::new(Circle::new(c(3.0, 0.0), 0.5), 16).unwrap();
        let (a, b) = (c(0.2, 0.1), c(3.1, -0.2));
        let r = double_contour_integral(&ci, &cj, QuadratureOptions::default(), |z, w| {
            Ok(p.scale(((z - a) * (w - b)).inv()))
        })
        .unwrap();
        assert!((&r.value - &p).norm() < 1e-12);
        let r = double_contour_integral(&ci, &cj, QuadratureOptions::default(), |z, w| Ok(p.scale(z * (w - b).inv())))
            .unwrap();
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn deformation_rules() {
        let g = MoebiusMap::loxodromic(c(1.0, 0.0), c(-1.0, 0.0), c(0.16, 0.0)).unwrap();
        let s = SchottkyData { pairs: vec![SchottkyPair::from_generator(g).unwrap()] };
        let d = deformed_circle(&s, 0, 0.05).unwrap();
        assert!((d.radius - s.pairs[0].inner.radius * 1.05).abs() < 1e-15);
        assert!(matches!(deformed_circle(&s, 0, 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(deformed_circle(&s, 0, 2.0), Err(Error::LeavesFundamentalDomain { .. })));
    }

    #[test]
    fn geometric_convergence_in_n() {
        // Pole at distance 0.5 outside: error ~ (1/1.5)^N.
        let f = |z: Complex64| Ok((z - 1.5).inv() * z.exp());
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| contour_integral_fixed(&unit(n), f).unwrap().value.norm())
            .collect();
        assert!(errs[1] < errs[0] * 1e-2 && errs[2] < 1e-10);
    }

    proptest! {
        #[test]
        fn linearity(a in -2.0f64..2.0, b in -2.0f64..2.0, p in -0.5f64..0.5) {
            let f = |z: Complex64| Ok((z - p).inv() + z.sin());
            let g = |z: Complex64| Ok((z * z - 0.1).inv());
            let o = QuadratureOptions::default();
            let lhs = contour_integral(&unit(64), o, |z| Ok(f(z)? * a + g(z)? * b)).unwrap().value;
            let rhs = contour_integral(&unit(64), o, f).unwrap().value * a + contour_integral(&unit(64), o, g).unwrap().value * b;
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
