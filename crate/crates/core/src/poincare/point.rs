//! `ξ` at one point together with everything the bracket engine needs.

use num_complex::Complex64;

use super::{matrix_power, PoincareSeries, SeriesValue};
use crate::dense;
use crate::liealg::{trace_pairing, AlgebraSpec, CMatrix};
use crate::phasespace::{PhasePoint, Tabulated};

/// Value of `ξ(z)`, the kernel operators `x ↦ K_i(z, x)` and the
/// derivatives of `ξ(z)` along `g_j ↦ g_j·exp(t e_α)`.
#[derive(Clone, Debug)]
pub struct PointData {
    pub z: Complex64,
    pub value: CMatrix,
    /// Operator on `n×n` matrices; row `a·n+b`, column `c·n+d`.
    kernels: Vec<CMatrix>,
    /// `[j][α]`.
    g_dirs: Vec<Vec<CMatrix>>,
    pub tail_estimate: f64,
    pub shells_used: usize,
    pub measured_ratio: f64,
    pub converged: bool,
    pub shell_norms: Vec<f64>,
    point: PhasePoint,
    spec: AlgebraSpec,
}

impl PointData {
    pub(super) fn from_flat(series: &PoincareSeries, z: Complex64, sv: SeriesValue<Vec<Complex64>>) -> Self {
        let n = series.n();
        let nn = n * n;
        let n4 = nn * nn;
        let l = series.genus();
        let dim = series.algebra().dim();
        let v = &sv.value;
        let value = dense::from_flat(n, &v[..nn]);
        let kernels = (0..l)
            .map(|i| {
                let blk = &v[nn + i * n4..nn + (i + 1) * n4];
                CMatrix::from_fn(nn, nn, |r, c| blk[r * nn + c])
            })
            .collect();
        let base = nn + l * n4;
        let g_dirs = (0..l)
            .map(|j| {
                (0..dim)
                    .map(|a| {
                        let d = j * dim + a;
                        dense::from_flat(n, &v[base + d * nn..base + (d + 1) * nn])
                    })
                    .collect()
            })
            .collect();
        PointData {
            z,
            value,
            kernels,
            g_dirs,
            tail_estimate: sv.tail_estimate,
            shells_used: sv.shells_used,
            measured_ratio: sv.measured_ratio,
            converged: sv.converged,
            shell_norms: sv.shell_norms,
            point: series.phase().clone(),
            spec: series.algebra().clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.value.nrows()
    }

    pub fn genus(&self) -> usize {
        self.kernels.len()
    }

    /// `K_i(z, x) = Σ_γ Ad(g_γ⁻¹)x·k_{γ,i}(z)`.
    pub fn kernel(&self, i: usize, x: &CMatrix) -> CMatrix {
        let n = self.n();
        let v = &self.kernels[i] * nalgebra::DVector::from_vec(dense::to_flat(x));
        dense::from_flat(n, v.as_slice())
    }

    /// Derivatives of `ξ(z)` along `e_α` on factor `j`.
    pub fn g_direction_derivatives(&self, j: usize) -> &[CMatrix] {
        &self.g_dirs[j]
    }

    /// Derivative of `ξ(z)` along an arbitrary `x ∈ g` on factor `j`.
    pub fn g_derivative(&self, j: usize, x: &CMatrix) -> CMatrix {
        let n = self.n();
        let mut out = CMatrix::zeros(n, n);
        for (c, d) in self.spec.coords(x).iter().zip(&self.g_dirs[j]) {
            out += d * *c;
        }
        out
    }

    /// Gradient `B` with `d tr(Y·ξ(z)) = Σ_i tr(δξ_i·B_i)`.
    fn pulled_back(&self, y: &CMatrix, i: usize) -> CMatrix {
        let n = self.n();
        let k = &self.kernels[i];
        CMatrix::from_fn(n, n, |d, c| {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    s += y[(b, a)] * k[(a * n + b, c * n + d)];
                }
            }
            s
        })
    }

    fn tabulate(&self, value: Complex64, y: &CMatrix) -> Tabulated {
        let l = self.genus();
        let g_dirs = (0..l)
            .map(|j| self.g_dirs[j].iter().map(|d| trace_pairing(y, d)).collect())
            .collect();
        let xi_grad = (0..l).map(|i| self.pulled_back(y, i)).collect();
        Tabulated { point: self.point.clone(), spec: self.spec.clone(), value, g_dirs, xi_grad }
    }

    /// The observable `ξ(z)_{ab}` with analytic derivatives.
    pub fn entry(&self, a: usize, b: usize) -> Tabulated {
        let y = crate::liealg::elementary(self.n(), b, a);
        self.tabulate(self.value[(a, b)], &y)
    }

    /// The observable `tr ξ(z)^k` with analytic derivatives.
    pub fn trace_power(&self, k: u32) -> Tabulated {
        let y = if k == 0 {
            CMatrix::zeros(self.n(), self.n())
        } else {
            matrix_power(&self.value, k - 1) * Complex64::new(k as f64, 0.0)
        };
        self.tabulate(matrix_power(&self.value, k).trace(), &y)
    }

    pub fn phase(&self) -> &PhasePoint {
        &self.point
    }
}
