//! The bracket `{ξ(z)^{(1)}, ξ(w)^{(2)}}` and its r-matrix defect.

use num_complex::Complex64;

use crate::error::Result;
use crate::liealg::{commutator, trace_pairing, AlgebraSpec, CMatrix, Side, TensorElement};
use crate::phasespace::{poisson_bracket, Observable, PhasePoint};
use crate::poincare::{Depth, PoincareSeries, PointData};

/// Basis images of the two derivative maps at one point.
#[derive(Clone, Debug)]
pub struct PointFrame {
    /// `[i][α]`: `K_i(z, e_α)`, the derivative of `ξ(z)` along `ξ_i ↦ ξ_i + t e_α`.
    pub kernel: Vec<Vec<CMatrix>>,
    /// `[i][β]`: derivative of `ξ(z)` along `g_i ↦ g_i·exp(t e^β)`.
    pub g_dual: Vec<Vec<CMatrix>>,
    pub value: CMatrix,
    pub tail: f64,
}

impl PointFrame {
    pub fn new(spec: &AlgebraSpec, pd: &PointData) -> Self {
        let l = pd.genus();
        let kernel = (0..l).map(|i| spec.basis().iter().map(|e| pd.kernel(i, e)).collect()).collect();
        let g_dual = (0..l).map(|i| spec.dual_basis().iter().map(|e| pd.g_derivative(i, e)).collect()).collect();
        PointFrame { kernel, g_dual, value: pd.value.clone(), tail: pd.tail_estimate }
    }

    /// Largest Frobenius norm among the frame matrices.
    pub fn scale(&self) -> f64 {
        self.kernel.iter().chain(&self.g_dual).flatten().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

/// `c[α][β] = tr(ξ_i[e^α, e^β])`.
pub(crate) fn structure(spec: &AlgebraSpec, xi: &CMatrix) -> Vec<Vec<Complex64>> {
    let dual = spec.dual_basis();
    dual.iter().map(|a| dual.iter().map(|b| trace_pairing(xi, &commutator(a, b))).collect()).collect()
}

/// The bracket tensor assembled from two frames:
/// `Σ_i Σ_β [G_z(e^β)⊗X_w(e_β) − X_z(e_β)⊗G_w(e^β)] − Σ_{αβ} c_i^{αβ} X_z(e_α)⊗X_w(e_β)`.
pub fn lax_bracket(spec: &AlgebraSpec, phase: &PhasePoint, fz: &PointFrame, fw: &PointFrame) -> TensorElement {
    let n = spec.n();
    let dim = spec.dim();
    let one = Complex64::new(1.0, 0.0);
    let mut a = TensorElement::zeros(n);
    for (i, xi) in phase.xi.iter().enumerate() {
        let c = structure(spec, xi);
        for b in 0..dim {
            a.add_outer(&fz.g_dual[i][b], &fw.kernel[i][b], one);
            a.add_outer(&fz.kernel[i][b], &fw.g_dual[i][b], -one);
            for (al, row) in c.iter().enumerate() {
                if row[b] != Complex64::new(0.0, 0.0) {
                    a.add_outer(&fz.kernel[i][al], &fw.kernel[i][b], -row[b]);
                }
            }
        }
    }
    a
}

/// The same tensor, one `poisson_bracket` call per entry pair.
pub fn lax_bracket_entrywise(spec: &AlgebraSpec, pz: &PointData, pw: &PointData) -> Result<TensorElement> {
    let n = pz.n();
    let mut out = TensorElement::zeros(n);
    let fw: Vec<_> = (0..n * n).map(|k| pw.entry(k / n, k % n)).collect();
    for a in 0..n {
        for b in 0..n {
            let f = pz.entry(a, b);
            for (k, h) in fw.iter().enumerate() {
                out.set(a, b, k / n, k % n, poisson_bracket(spec, &f, h, pz.phase())?);
            }
        }
    }
    Ok(out)
}

/// `C = A − [r, ξ(w)^{(2)}] − [s, ξ(z)^{(1)}]` with its pieces.
#[derive(Clone, Debug)]
pub struct Defect {
    pub defect: TensorElement,
    pub bracket: TensorElement,
    pub r_term: TensorElement,
    pub s_term: TensorElement,
    /// Truncation error bound propagated through the bilinear pieces.
    pub tail_budget: f64,
    pub word_length: usize,
}

pub(crate) fn assemble_defect(
    bracket: TensorElement,
    r: &TensorElement,
    s: &TensorElement,
    xi_z: &CMatrix,
    xi_w: &CMatrix,
) -> (TensorElement, TensorElement, TensorElement, TensorElement) {
    let r_term = r.commutator_with(xi_w, Side::Second);
    let s_term = s.commutator_with(xi_z, Side::First);
    let defect = &(&bracket - &r_term) - &s_term;
    (defect, bracket, r_term, s_term)
}

/// `‖δ(a·b)‖` for a bilinear product with `‖δa‖ ≤ ta`, `‖δb‖ ≤ tb`.
pub(crate) fn product_budget(ta: f64, na: f64, tb: f64, nb: f64) -> f64 {
    // An unbounded tail stays unbounded even against a zero factor.
    if !(ta.is_finite() && tb.is_finite()) {
        return f64::INFINITY;
    }
    ta * nb + na * tb + ta * tb
}

/// The defect of the r-matrix bracket at `(z, w)`, with the bracket taken
/// entry by entry through the Poisson engine.
pub fn bracket_defect(series: &PoincareSeries, z: Complex64, w: Complex64) -> Result<Defect> {
    bracket_defect_with(series, z, w, Depth::Adaptive)
}

pub fn bracket_defect_with(series: &PoincareSeries, z: Complex64, w: Complex64, depth: Depth) -> Result<Defect> {
    let spec = series.algebra();
    let pz = series.point_data_with(z, depth)?;
    let pw = series.point_data_with(w, depth)?;
    let r = series.r_matrix_with(z, w, depth)?;
    let s = series.s_matrix_with(z, w, depth)?;
    let bracket = lax_bracket_entrywise(spec, &pz, &pw)?;
    let budget = defect_budget(spec, &PointFrame::new(spec, &pz), &PointFrame::new(spec, &pw), (r.tail_estimate, r.value.norm()), (s.tail_estimate, s.value.norm()));
    let word_length = pz.shells_used.max(pw.shells_used).max(r.shells_used).max(s.shells_used) - 1;
    let (defect, bracket, r_term, s_term) = assemble_defect(bracket, &r.value, &s.value, &pz.value, &pw.value);
    Ok(Defect { defect, bracket, r_term, s_term, tail_budget: budget, word_length })
}

pub(crate) fn defect_budget(spec: &AlgebraSpec, fz: &PointFrame, fw: &PointFrame, r: (f64, f64), s: (f64, f64)) -> f64 {
    let l = fz.kernel.len() as f64;
    let dim = spec.dim() as f64;
    // Each frame entry inherits at most the tail of the whole point series.
    let a = 2.0 * l * dim * (1.0 + dim) * product_budget(fz.tail, fz.scale(), fw.tail, fw.scale());
    let rt = 2.0 * product_budget(r.0, r.1, fw.tail, fw.value.norm());
    let st = 2.0 * product_budget(s.0, s.1, fz.tail, fz.value.norm());
    a + rt + st
}

/// `ξ(z)_{ab}` re-evaluated at whatever phase point it is asked about.
pub struct XiEntryAt<'a> {
    pub series: &'a PoincareSeries,
    pub z: Complex64,
    pub depth: Depth,
    pub row: usize,
    pub col: usize,
}

impl Observable for XiEntryAt<'_> {
    fn value(&self, p: &PhasePoint) -> Result<Complex64> {
        Ok(self.series.at_phase(p.clone())?.xi_with(self.z, self.depth)?.value[(self.row, self.col)])
    }
}

/// `tr ξ(z)^k` re-evaluated at whatever phase point it is asked about.
pub struct TracePowerAt<'a> {
    pub series: &'a PoincareSeries,
    pub z: Complex64,
    pub depth: Depth,
    pub k: u32,
}

impl Observable for TracePowerAt<'_> {
    fn value(&self, p: &PhasePoint) -> Result<Complex64> {
        let xi = self.series.at_phase(p.clone())?.xi_with(self.z, self.depth)?.value;
        Ok(crate::poincare::matrix_power(&xi, self.k).trace())
    }
}
