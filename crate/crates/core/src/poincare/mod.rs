//! Poincaré series over the Schottky group: the Lax form `ξ(z)`, its
//! kernels, the `r`/`s` matrices, the basepoint variant, and analytic
//! derivatives in the group variables.
//!
//! Every series is a sum over reduced words `γ` taken shell by shell (words
//! of equal length). A [`TruncationPolicy`] caps the word length and sets the
//! tail target; the tail of a partial sum is estimated from the measured
//! ratio of consecutive shell norms. All values are coefficients of `dz`
//! (and `dw`).

mod point;
mod residue;
mod walker;

pub use point::PointData;
pub use residue::{residue_at_circle, residue_at_infinity};
pub use walker::Depth;

use std::sync::atomic::AtomicUsize;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{self, ZERO};
use crate::error::{Error, Result};
use crate::liealg::{AlgebraSpec, CMatrix, TensorElement};
use crate::moebius::{word_to_map, Point, SchottkyData, Word};
use crate::phasespace::{contraction_factor, moment_map, PhasePoint};
use walker::{Directions, Driver, Letters, Node, RawSeries};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TruncationPolicy {
    pub max_word_length: usize,
    pub target_tail: f64,
    pub capacity: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { max_word_length: 16, target_tail: 1e-9, capacity: 4_000_000 }
    }
}

/// A truncated series and what is known about the part left out.
#[derive(Clone, Debug)]
pub struct SeriesValue<T> {
    pub value: T,
    /// `s_p·ρ/(1−ρ)` for the last kept shell norm `s_p` and measured ratio `ρ`.
    pub tail_estimate: f64,
    pub shells_used: usize,
    pub measured_ratio: f64,
    pub converged: bool,
    /// Sum of term norms over each kept shell.
    pub shell_norms: Vec<f64>,
}

impl<T> SeriesValue<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> SeriesValue<U> {
        SeriesValue {
            value: f(self.value),
            tail_estimate: self.tail_estimate,
            shells_used: self.shells_used,
            measured_ratio: self.measured_ratio,
            converged: self.converged,
            shell_norms: self.shell_norms,
        }
    }

    /// Longest word length summed.
    pub fn word_length(&self) -> usize {
        self.shells_used - 1
    }
}

fn from_raw(raw: RawSeries) -> SeriesValue<Vec<Complex64>> {
    SeriesValue {
        value: raw.value,
        tail_estimate: raw.tail_estimate,
        shells_used: raw.shells_used,
        measured_ratio: raw.measured_ratio,
        converged: raw.converged,
        shell_norms: raw.shell_norms,
    }
}

/// `γ'(z)/(γ(z) − γ_i⁻¹(∞))` for `γ = word_to_map(w)`.
pub fn kernel_weight(w: &Word, i: usize, z: Complex64, s: &SchottkyData) -> Result<Complex64> {
    let gamma = word_to_map(w, s)?;
    let pole = match s.generator(i)?.pole() {
        Point::Finite(c) => c,
        Point::Infinity => return Err(Error::InvalidInput(format!("generator {} is affine", i + 1))),
    };
    let gz = gamma.apply_finite(z)?;
    let den = gz - pole;
    let thr = 1e-8 * s.pairs[i].inner.radius;
    if den.norm() < thr {
        return Err(Error::NearPole { z, distance: den.norm() });
    }
    Ok(gamma.derivative(z)? / den)
}

/// Series with distinct convergence depth, for the per-kind depth hint.
#[derive(Clone, Copy)]
enum Series {
    Xi,
    Kernel,
    PointData,
    R,
    S,
    SInhomogeneous,
    RDerivative,
    Based,
    BaseDerivative,
}

const SERIES_KINDS: usize = 9;

/// Evaluator for every series attached to one phase point.
pub struct PoincareSeries {
    algebra: AlgebraSpec,
    schottky: SchottkyData,
    phase: PhasePoint,
    policy: TruncationPolicy,
    kappa: f64,
    letters: Letters,
    poles: Vec<Complex64>,
    xi: Vec<Vec<Complex64>>,
    basis_sparse: Vec<Vec<(usize, usize, Complex64)>>,
    dual_flat: Vec<Vec<Complex64>>,
    basis_dirs: Directions,
    /// Squared distance below which a term counts as sitting on its pole.
    pole_threshold2: f64,
    /// Last converged depth per series kind; only a starting guess.
    hints: [AtomicUsize; SERIES_KINDS],
}

impl PoincareSeries {
    /// Fails with `ConvergenceCriterionViolated` unless `κ < 1`.
    pub fn new(algebra: AlgebraSpec, schottky: SchottkyData, phase: PhasePoint, policy: TruncationPolicy) -> Result<Self> {
        phase.validate(&algebra)?;
        let kappa = contraction_factor(&algebra, &phase, &schottky)?;
        if !(kappa < 1.0) {
            return Err(Error::ConvergenceCriterionViolated { kappa });
        }
        if !(policy.target_tail > 0.0) {
            return Err(Error::InvalidInput("targetTail must be positive".into()));
        }
        let n = algebra.n();
        let l = schottky.genus();
        let mut maps = Vec::with_capacity(2 * l);
        let mut g = Vec::with_capacity(2 * l);
        for (i, pair) in schottky.pairs.iter().enumerate() {
            maps.push(pair.gamma);
            maps.push(pair.gamma.inverse());
            g.push(dense::to_flat(&phase.g[i]));
            g.push(dense::to_flat(&crate::liealg::checked_inverse(&phase.g[i])?));
        }
        let letters = Letters { n, maps, g };
        let poles = schottky
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| p.gamma.pole().finite().ok_or_else(|| Error::InvalidInput(format!("generator {} is affine", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        let xi = phase.xi.iter().map(dense::to_flat).collect();
        let basis_sparse = algebra.basis().iter().map(dense::sparse_entries).collect();
        let dual_flat = algebra.dual_basis().iter().map(dense::to_flat).collect();
        let dirs: Vec<(usize, Vec<Complex64>)> = (0..l)
            .flat_map(|j| algebra.basis().iter().map(move |e| (j, dense::to_flat(e))))
            .collect();
        let basis_dirs = Directions::new(&letters, &dirs);
        let pole_threshold2 = (1e-8 * schottky.min_radius()).powi(2);
        Ok(PoincareSeries {
            algebra,
            schottky,
            phase,
            policy,
            kappa,
            letters,
            poles,
            xi,
            basis_sparse,
            dual_flat,
            basis_dirs,
            pole_threshold2,
            hints: Default::default(),
        })
    }

    /// Same curve and truncation at another phase point.
    pub fn at_phase(&self, phase: PhasePoint) -> Result<Self> {
        PoincareSeries::new(self.algebra.clone(), self.schottky.clone(), phase, self.policy)
    }

    /// Same data with a different truncation policy.
    pub fn with_policy(&self, policy: TruncationPolicy) -> Result<Self> {
        PoincareSeries::new(self.algebra.clone(), self.schottky.clone(), self.phase.clone(), policy)
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        &self.algebra
    }

    pub fn schottky(&self) -> &SchottkyData {
        &self.schottky
    }

    pub fn phase(&self) -> &PhasePoint {
        &self.phase
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn genus(&self) -> usize {
        self.schottky.genus()
    }

    pub fn n(&self) -> usize {
        self.algebra.n()
    }

    /// Centre `γ_i⁻¹(∞)` of the `i`-th inner circle's isometric disc.
    pub fn pole(&self, i: usize) -> Complex64 {
        self.poles[i]
    }

    fn driver(&self, kind: Series) -> Driver<'_> {
        Driver {
            letters: &self.letters,
            max_word_length: self.policy.max_word_length,
            target_tail: self.policy.target_tail,
            capacity: self.policy.capacity,
            hint: &self.hints[kind as usize],
        }
    }

    fn run(&self, kind: Series, depth: Depth, derivs: bool, len: usize, visit: &mut walker::Visitor) -> Result<SeriesValue<Vec<Complex64>>> {
        let dirs = derivs.then_some(&self.basis_dirs);
        self.driver(kind).run(depth, dirs, len, visit).map(from_raw)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.genus() {
            return Err(Error::IndexOutOfRange { index: i, len: self.genus() });
        }
        Ok(())
    }

    /// `(γ z, γ'(z))` with a guard against the Möbius pole.
    #[inline]
    fn image(&self, node: &Node, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (gz, dz) = node.map.apply_with_derivative(z);
        if !gz.is_finite() || !dz.is_finite() {
            return Err(Error::NearPole { z, distance: 0.0 });
        }
        Ok((gz, dz))
    }

    /// `k_{γ,i}(z)` for every `i`, written into `k`.
    #[inline]
    fn weights(&self, node: &Node, z: Complex64, k: &mut [Complex64]) -> Result<()> {
        let (gz, dz) = self.image(node, z)?;
        for (i, pole) in self.poles.iter().enumerate() {
            let den = gz - pole;
            if den.norm_sqr() < self.pole_threshold2 {
                return Err(Error::NearPole { z, distance: den.norm() });
            }
            k[i] = dz / den;
        }
        Ok(())
    }

    /// `ξ(z) = Σ_{γ,i} Ad(g_γ⁻¹)ξ_i·γ'(z)/(γ(z) − γ_i⁻¹(∞))`.
    pub fn xi(&self, z: Complex64) -> Result<SeriesValue<CMatrix>> {
        self.xi_with(z, Depth::Adaptive)
    }

    pub fn xi_with(&self, z: Complex64, depth: Depth) -> Result<SeriesValue<CMatrix>> {
        let n = self.n();
        let nn = n * n;
        let l = self.genus();
        let mut k = vec![ZERO; l];
        let mut a = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            self.weights(node, z, &mut k)?;
            a.iter_mut().for_each(|v| *v = ZERO);
            for i in 0..l {
                for (av, xv) in a.iter_mut().zip(&self.xi[i]) {
                    *av += k[i] * xv;
                }
            }
            dense::sandwich(n, node.ginv, &a, node.g, &mut tmp, out);
            Ok(())
        };
        Ok(self.run(Series::Xi, depth, false, nn, &mut visit)?.map(|v| dense::from_flat(n, &v)))
    }

    /// `Σ_γ Ad(g_γ⁻¹)x·k_{γ,i}(z)`; linear in `x`, and `ξ(z) = Σ_i K_i(z, ξ_i)`.
    pub fn poincare_kernel(&self, z: Complex64, i: usize, x: &CMatrix) -> Result<SeriesValue<CMatrix>> {
        self.check_index(i)?;
        let n = self.n();
        let nn = n * n;
        let xf = dense::to_flat(x);
        let mut k = vec![ZERO; self.genus()];
        let mut a = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            self.weights(node, z, &mut k)?;
            for (av, xv) in a.iter_mut().zip(&xf) {
                *av = k[i] * xv;
            }
            dense::sandwich(n, node.ginv, &a, node.g, &mut tmp, out);
            Ok(())
        };
        Ok(self.run(Series::Kernel, Depth::Adaptive, false, nn, &mut visit)?.map(|v| dense::from_flat(n, &v)))
    }

    /// `∂ξ(z)/∂(ξ_i)^a`, the kernel applied to the basis element `e_a`.
    pub fn xi_derivative_xi(&self, z: Complex64, i: usize, a: usize) -> Result<SeriesValue<CMatrix>> {
        self.check_index(i)?;
        let e = self
            .algebra
            .basis()
            .get(a)
            .ok_or(Error::IndexOutOfRange { index: a, len: self.algebra.dim() })?
            .clone();
        self.poincare_kernel(z, i, &e)
    }

    /// Derivative of `ξ(z)` under `g_j ↦ g_j·exp(t x)`; each term is
    /// `[Ad(g_γ⁻¹)ξ_i, g_γ⁻¹δg_γ]·k_{γ,i}(z)`.
    pub fn xi_derivative_g(&self, z: Complex64, j: usize, x: &CMatrix) -> Result<SeriesValue<CMatrix>> {
        self.check_index(j)?;
        let pd = self.point_data(z)?;
        let coords = self.algebra.coords(x);
        let n = self.n();
        let mut out = CMatrix::zeros(n, n);
        for (c, d) in coords.iter().zip(pd.g_direction_derivatives(j)) {
            out += d * *c;
        }
        Ok(SeriesValue {
            value: out,
            tail_estimate: pd.tail_estimate,
            shells_used: pd.shells_used,
            measured_ratio: pd.measured_ratio,
            converged: pd.converged,
            shell_norms: pd.shell_norms.clone(),
        })
    }

    /// Value, kernel operators and all basis-direction `g`-derivatives of
    /// `ξ` at `z`, from a single walk.
    pub fn point_data(&self, z: Complex64) -> Result<PointData> {
        self.point_data_with(z, Depth::Adaptive)
    }

    pub fn point_data_with(&self, z: Complex64, depth: Depth) -> Result<PointData> {
        let n = self.n();
        let nn = n * n;
        let n4 = nn * nn;
        let l = self.genus();
        let ndir = self.basis_dirs.count();
        let len = nn + l * n4 + ndir * nn;
        let mut k = vec![ZERO; l];
        let mut a = vec![ZERO; nn];
        let mut b = vec![ZERO; nn];
        let mut u = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut prod = vec![ZERO; n4];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            self.weights(node, z, &mut k)?;
            a.iter_mut().for_each(|v| *v = ZERO);
            for i in 0..l {
                for (av, xv) in a.iter_mut().zip(&self.xi[i]) {
                    *av += k[i] * xv;
                }
            }
            dense::sandwich(n, node.ginv, &a, node.g, &mut tmp, &mut b);
            out[..nn].copy_from_slice(&b);
            // K[(a,b),(c,d)] += k_i·g⁻¹[a,c]·g[d,b]
            for ra in 0..n {
                for rb in 0..n {
                    for rc in 0..n {
                        for rd in 0..n {
                            prod[((ra * n + rb) * n + rc) * n + rd] = node.ginv[ra * n + rc] * node.g[rd * n + rb];
                        }
                    }
                }
            }
            for i in 0..l {
                let blk = &mut out[nn + i * n4..nn + (i + 1) * n4];
                for (o, p) in blk.iter_mut().zip(&prod) {
                    *o = k[i] * p;
                }
            }
            let base = nn + l * n4;
            for d in 0..ndir {
                dense::matmul(n, node.ginv, &node.dg[d * nn..(d + 1) * nn], &mut u);
                dense::commutator_add(n, &b, &u, Complex64::new(1.0, 0.0), &mut out[base + d * nn..base + (d + 1) * nn]);
            }
            Ok(())
        };
        let sv = self.run(Series::PointData, depth, true, len, &mut visit)?;
        Ok(PointData::from_flat(self, z, sv))
    }

    /// `r(z,w) = Σ_γ Ad g_γ^{(2)}P·γ'(z)/(γ(z) − w)`.
    pub fn r_matrix(&self, z: Complex64, w: Complex64) -> Result<SeriesValue<TensorElement>> {
        self.r_matrix_with(z, w, Depth::Adaptive)
    }

    pub fn r_matrix_with(&self, z: Complex64, w: Complex64, depth: Depth) -> Result<SeriesValue<TensorElement>> {
        let n = self.n();
        let nn = n * n;
        let mut m = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            let (gz, dz) = self.image(node, z)?;
            let den = gz - w;
            if den.norm_sqr() < self.pole_threshold2 {
                return Err(Error::NearPole { z, distance: den.norm() });
            }
            let kk = dz / den;
            // Σ_a e_a ⊗ g e^a g⁻¹
            for (ea, da) in self.basis_sparse.iter().zip(&self.dual_flat) {
                dense::sandwich(n, node.g, da, node.ginv, &mut tmp, &mut m);
                for &(i, j, c) in ea {
                    let s = kk * c;
                    let row = &mut out[(i * n + j) * nn..(i * n + j + 1) * nn];
                    for (o, mv) in row.iter_mut().zip(&m) {
                        *o += s * mv;
                    }
                }
            }
            Ok(())
        };
        let sv = self.run(Series::R, depth, false, nn * nn, &mut visit)?;
        Ok(sv.map(|v| TensorElement::from_vec(n, v).expect("n⁴ entries")))
    }

    /// `s(z,w) = Σ_γ Ad g_γ^{(1)}P·γ'(w)/(z − γ(w))`, written term by term as
    /// `−r(w,z)^{(21)}`.
    pub fn s_matrix(&self, z: Complex64, w: Complex64) -> Result<SeriesValue<TensorElement>> {
        self.s_matrix_with(z, w, Depth::Adaptive)
    }

    pub fn s_matrix_with(&self, z: Complex64, w: Complex64, depth: Depth) -> Result<SeriesValue<TensorElement>> {
        let n = self.n();
        let nn = n * n;
        let mut m = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            let (gw, dw) = self.image(node, w)?;
            let den = z - gw;
            if den.norm_sqr() < self.pole_threshold2 {
                return Err(Error::NearPole { z, distance: den.norm() });
            }
            let kk = dw / den;
            // Σ_a g e^a g⁻¹ ⊗ e_a
            for (ea, da) in self.basis_sparse.iter().zip(&self.dual_flat) {
                dense::sandwich(n, node.g, da, node.ginv, &mut tmp, &mut m);
                for &(k, l, c) in ea {
                    let s = kk * c;
                    for i in 0..n {
                        for j in 0..n {
                            out[((i * n + j) * n + k) * n + l] += s * m[i * n + j];
                        }
                    }
                }
            }
            Ok(())
        };
        let sv = self.run(Series::S, depth, false, nn * nn, &mut visit)?;
        Ok(sv.map(|v| TensorElement::from_vec(n, v).expect("n⁴ entries")))
    }

    /// `Σ_γ Ad g_{γ_i γ}^{(1)}P·k_{γ,i}(w)`, the inhomogeneous term in the
    /// transformation law of `s` in its first argument.
    pub fn s_inhomogeneous(&self, i: usize, w: Complex64) -> Result<SeriesValue<TensorElement>> {
        self.check_index(i)?;
        let n = self.n();
        let nn = n * n;
        let mut k = vec![ZERO; self.genus()];
        let mut m = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut gg = vec![ZERO; nn];
        let mut gginv = vec![ZERO; nn];
        let gi = &self.letters.g[2 * i];
        let gi_inv = &self.letters.g[2 * i + 1];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            self.weights(node, w, &mut k)?;
            dense::matmul(n, gi, node.g, &mut gg);
            dense::matmul(n, node.ginv, gi_inv, &mut gginv);
            for (ea, da) in self.basis_sparse.iter().zip(&self.dual_flat) {
                dense::sandwich(n, &gg, da, &gginv, &mut tmp, &mut m);
                for &(kk, l, c) in ea {
                    let s = k[i] * c;
                    for a in 0..n {
                        for b in 0..n {
                            out[((a * n + b) * n + kk) * n + l] += s * m[a * n + b];
                        }
                    }
                }
            }
            Ok(())
        };
        let sv = self.run(Series::SInhomogeneous, Depth::Adaptive, false, nn * nn, &mut visit)?;
        Ok(sv.map(|v| TensorElement::from_vec(n, v).expect("n⁴ entries")))
    }

    /// Derivative of `r(z,w)` under `g_j ↦ g_j·exp(t x)`; each term is
    /// `k·[1⊗δg_γ g_γ⁻¹, Ad g_γ^{(2)}P]`.
    pub fn r_derivative_g(&self, z: Complex64, w: Complex64, j: usize, x: &CMatrix) -> Result<SeriesValue<TensorElement>> {
        self.check_index(j)?;
        let all = self.r_derivative_basis(z, w, Depth::Adaptive)?;
        let coords = self.algebra.coords(x);
        let mut out = TensorElement::zeros(self.n());
        for (c, t) in coords.iter().zip(&all.value[j]) {
            out += &t.scale(*c);
        }
        Ok(all.map(|_| out))
    }

    /// `∂r(z,w)` along `e_α` on factor `j`, indexed `[j][α]`.
    pub fn r_derivative_basis(&self, z: Complex64, w: Complex64, depth: Depth) -> Result<SeriesValue<Vec<Vec<TensorElement>>>> {
        let n = self.n();
        let nn = n * n;
        let n4 = nn * nn;
        let ndir = self.basis_dirs.count();
        let dim = self.algebra.dim();
        let mut ms: Vec<Vec<Complex64>> = vec![vec![ZERO; nn]; dim];
        let mut tmp = vec![ZERO; nn];
        let mut v = vec![ZERO; nn];
        let mut c = vec![ZERO; nn];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            let (gz, dz) = self.image(node, z)?;
            let den = gz - w;
            if den.norm_sqr() < self.pole_threshold2 {
                return Err(Error::NearPole { z, distance: den.norm() });
            }
            let kk = dz / den;
            for (a, da) in self.dual_flat.iter().enumerate() {
                dense::sandwich(n, node.g, da, node.ginv, &mut tmp, &mut ms[a]);
            }
            for d in 0..ndir {
                dense::matmul(n, &node.dg[d * nn..(d + 1) * nn], node.ginv, &mut v);
                let blk = &mut out[d * n4..(d + 1) * n4];
                for (ea, m) in self.basis_sparse.iter().zip(&ms) {
                    c.iter_mut().for_each(|x| *x = ZERO);
                    dense::commutator_add(n, &v, m, kk, &mut c);
                    for &(i, j, coef) in ea {
                        let row = &mut blk[(i * n + j) * nn..(i * n + j + 1) * nn];
                        for (o, cv) in row.iter_mut().zip(&c) {
                            *o += coef * cv;
                        }
                    }
                }
            }
            Ok(())
        };
        let sv = self.run(Series::RDerivative, depth, true, ndir * n4, &mut visit)?;
        let l = self.genus();
        Ok(sv.map(|flat| {
            (0..l)
                .map(|j| {
                    (0..dim)
                        .map(|a| {
                            let d = j * dim + a;
                            TensorElement::from_vec(n, flat[d * n4..(d + 1) * n4].to_vec()).expect("n⁴ entries")
                        })
                        .collect()
                })
                .collect()
        }))
    }

    /// `Σ_{γ,i} Ad(g_γ⁻¹)ξ_i·γ'(z)[1/(γz − γ_i⁻¹(z0)) − 1/(γz − z0)]`.
    pub fn xi_based_at(&self, z: Complex64, z0: Complex64) -> Result<SeriesValue<CMatrix>> {
        let n = self.n();
        let nn = n * n;
        let l = self.genus();
        let shifted = self
            .schottky
            .pairs
            .iter()
            .map(|p| p.gamma.inverse().apply_finite(z0))
            .collect::<Result<Vec<_>>>()?;
        let mut a = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            let (gz, dz) = self.image(node, z)?;
            let d0 = gz - z0;
            if d0.norm_sqr() < self.pole_threshold2 {
                return Err(Error::NearPole { z, distance: d0.norm() });
            }
            a.iter_mut().for_each(|v| *v = ZERO);
            for i in 0..l {
                let di = gz - shifted[i];
                if di.norm_sqr() < self.pole_threshold2 {
                    return Err(Error::NearPole { z, distance: di.norm() });
                }
                let k = dz * (di.inv() - d0.inv());
                for (av, xv) in a.iter_mut().zip(&self.xi[i]) {
                    *av += k * xv;
                }
            }
            dense::sandwich(n, node.ginv, &a, node.g, &mut tmp, out);
            Ok(())
        };
        Ok(self.run(Series::Based, Depth::Adaptive, false, nn, &mut visit)?.map(|v| dense::from_flat(n, &v)))
    }

    /// `Σ_γ Ad(g_γ⁻¹)(M)·(γ⁻¹)'(z0)/(z − γ⁻¹(z0))²` with `M` the moment map:
    /// the `z0`-derivative of [`Self::xi_based_at`].
    pub fn basepoint_derivative(&self, z: Complex64, z0: Complex64) -> Result<SeriesValue<CMatrix>> {
        let n = self.n();
        let nn = n * n;
        let m = dense::to_flat(&moment_map(&self.phase)?);
        let mut a = vec![ZERO; nn];
        let mut tmp = vec![ZERO; nn];
        let mut visit = |node: &Node, out: &mut [Complex64]| -> Result<()> {
            let inv = node.map.inverse();
            let (w, dw) = inv.apply_with_derivative(z0);
            let den = z - w;
            if !w.is_finite() || den.norm_sqr() < self.pole_threshold2 {
                return Err(Error::NearPole { z, distance: den.norm() });
            }
            let k = dw / (den * den);
            for (av, mv) in a.iter_mut().zip(&m) {
                *av = k * mv;
            }
            dense::sandwich(n, node.ginv, &a, node.g, &mut tmp, out);
            Ok(())
        };
        Ok(self.run(Series::BaseDerivative, Depth::Adaptive, false, nn, &mut visit)?.map(|v| dense::from_flat(n, &v)))
    }

    /// `tr ξ(z)^k`.
    pub fn spectral_invariant(&self, z: Complex64, k: u32) -> Result<SeriesValue<Complex64>> {
        let xi = self.xi(z)?;
        Ok(xi.map(|m| matrix_power(&m, k).trace()))
    }
}

pub(crate) fn matrix_power(m: &CMatrix, k: u32) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::identity(n, n);
    for _ in 0..k {
        out = &out * m;
    }
    out
}
