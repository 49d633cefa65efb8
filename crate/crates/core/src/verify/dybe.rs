//! The dynamical Yang–Baxter equation for `r`, and the Jacobi identity of
//! the Poisson engine on three copies of `ξ`.
//!
//! Three-slot tensors are stored as operators on `Cⁿ⊗Cⁿ⊗Cⁿ`, with slot `k`
//! carrying the spectral parameter `z_{k+1}`.

use std::time::Instant;

use num_complex::Complex64;

use super::checks::FD_STEP;
use super::lax::{lax_bracket, product_budget, structure, PointFrame};
use super::{CheckGroup, CheckReport, Verifier};
use crate::error::Result;
use crate::liealg::{AlgebraSpec, CMatrix, TensorElement};
use crate::phasespace::PhasePoint;
use crate::poincare::{Depth, PoincareSeries};

fn digits(n: usize, k: usize) -> [usize; 3] {
    [k / (n * n), (k / n) % n, k % n]
}

fn index(n: usize, a: [usize; 3]) -> usize {
    (a[0] * n + a[1]) * n + a[2]
}

/// `T` placed with its first factor in slot `p` and second in slot `q`.
pub(crate) fn embed2(t: &TensorElement, p: usize, q: usize) -> CMatrix {
    let n = t.n();
    let r = 3 - p - q;
    let m = n * n * n;
    CMatrix::from_fn(m, m, |row, col| {
        let (a, b) = (digits(n, row), digits(n, col));
        if a[r] != b[r] {
            Complex64::new(0.0, 0.0)
        } else {
            t.get(a[p], b[p], a[q], b[q])
        }
    })
}

/// `x` acting in slot `p`.
pub(crate) fn embed1(x: &CMatrix, p: usize) -> CMatrix {
    let n = x.nrows();
    let m = n * n * n;
    CMatrix::from_fn(m, m, |row, col| {
        let (a, b) = (digits(n, row), digits(n, col));
        if (0..3).any(|k| k != p && a[k] != b[k]) {
            Complex64::new(0.0, 0.0)
        } else {
            x[(a[p], b[p])]
        }
    })
}

/// Relabels slots: output slot `k` carries what input slot `from[k]` did.
pub(crate) fn permute_slots(m: &CMatrix, n: usize, from: [usize; 3]) -> CMatrix {
    let size = n * n * n;
    let mut out = CMatrix::zeros(size, size);
    for row in 0..size {
        let a = digits(n, row);
        let src_row = {
            let mut s = [0; 3];
            for k in 0..3 {
                s[from[k]] = a[k];
            }
            index(n, s)
        };
        for col in 0..size {
            let b = digits(n, col);
            let mut s = [0; 3];
            for k in 0..3 {
                s[from[k]] = b[k];
            }
            out[(row, col)] = m[(src_row, index(n, s))];
        }
    }
    out
}

fn bracket(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Signs of `[r32,r21]`, `[r23,r31]`, `[r31,r21]`, `D_3 r21`, `D_2 r31`.
pub type SignPattern = [i8; 5];

/// The combination that vanishes for this crate's conventions.
pub const RESOLVED_SIGNS: SignPattern = [1, -1, 1, 1, -1];

/// Every term with a plus sign, as the equation is usually written.
pub const ALL_PLUS_SIGNS: SignPattern = [1, 1, 1, 1, 1];

pub fn pattern_name(s: &SignPattern) -> String {
    s.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect()
}

/// The 16 patterns with the first term positive.
pub fn all_patterns() -> Vec<SignPattern> {
    (0..16u8)
        .map(|bits| {
            let mut s = [1i8; 5];
            for k in 0..4 {
                if bits & (1 << k) != 0 {
                    s[k + 1] = -1;
                }
            }
            s
        })
        .collect()
}

/// The five Yang–Baxter terms at one triple, `r_{jk} = r(z_j, z_k)` in
/// slots `(j,k)`, with `D_k = Σ_{i,α} K_i(z_k, e^α)^{(k)} ∂_{g_i, e_α}`.
#[derive(Clone, Debug)]
pub struct DybeTerms {
    pub terms: [CMatrix; 5],
    pub tail_budget: f64,
    pub word_length: usize,
}

impl DybeTerms {
    pub fn combine(&self, signs: &SignPattern) -> CMatrix {
        let mut out = self.terms[0].zero_like();
        for (t, &s) in self.terms.iter().zip(signs) {
            out += t * Complex64::new(s as f64, 0.0);
        }
        out
    }

    pub fn residual(&self, signs: &SignPattern) -> f64 {
        self.combine(signs).norm()
    }
}

trait ZeroLike {
    fn zero_like(&self) -> Self;
}

impl ZeroLike for CMatrix {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
}

pub fn dybe_terms(series: &PoincareSeries, z: [Complex64; 3], depth: Depth) -> Result<DybeTerms> {
    let spec = series.algebra();
    let n = spec.n();
    let root_n = (n as f64).sqrt();
    let [z1, z2, z3] = z;
    let r32 = series.r_matrix_with(z3, z2, depth)?;
    let r21 = series.r_matrix_with(z2, z1, depth)?;
    let r23 = series.r_matrix_with(z2, z3, depth)?;
    let r31 = series.r_matrix_with(z3, z1, depth)?;
    let dr21 = series.r_derivative_basis(z2, z1, depth)?;
    let dr31 = series.r_derivative_basis(z3, z1, depth)?;
    let p2 = series.point_data_with(z2, depth)?;
    let p3 = series.point_data_with(z3, depth)?;
    let (e32, e21, e23, e31) = (embed2(&r32.value, 2, 1), embed2(&r21.value, 1, 0), embed2(&r23.value, 1, 2), embed2(&r31.value, 2, 0));
    let mut budget = 0.0;
    for (a, ea, b, eb) in [(&r32, &e32, &r21, &e21), (&r23, &e23, &r31, &e31), (&r31, &e31, &r21, &e21)] {
        budget += 2.0 * product_budget(root_n * a.tail_estimate, ea.norm(), root_n * b.tail_estimate, eb.norm());
    }
    let mut derivative_term = |dr: &crate::poincare::SeriesValue<Vec<Vec<TensorElement>>>, slots: (usize, usize), pd: &crate::poincare::PointData, k: usize| {
        let size = n * n * n;
        let mut out = CMatrix::zeros(size, size);
        for (i, per_dir) in dr.value.iter().enumerate() {
            for (t, dual) in per_dir.iter().zip(spec.dual_basis()) {
                let et = embed2(t, slots.0, slots.1);
                let ek = embed1(&pd.kernel(i, dual), k);
                budget += product_budget(root_n * dr.tail_estimate, et.norm(), n as f64 * pd.tail_estimate * dual.norm(), ek.norm());
                out += &et * &ek;
            }
        }
        out
    };
    let t4 = derivative_term(&dr21, (1, 0), &p3, 2);
    let t5 = derivative_term(&dr31, (2, 0), &p2, 1);
    let word_length = [r32.shells_used, r21.shells_used, r23.shells_used, r31.shells_used, dr21.shells_used, dr31.shells_used, p2.shells_used, p3.shells_used]
        .into_iter()
        .max()
        .expect("nonempty")
        - 1;
    Ok(DybeTerms {
        terms: [bracket(&e32, &e21), bracket(&e23, &e31), bracket(&e31, &e21), t4, t5],
        tail_budget: budget,
        word_length,
    })
}

fn frame_at(series: &PoincareSeries, p: &PhasePoint, z: Complex64, depth: Depth) -> Result<PointFrame> {
    Ok(PointFrame::new(series.algebra(), &series.at_phase(p.clone())?.point_data_with(z, depth)?))
}

/// `{ξ(a)^{(1)}, {ξ(b)^{(2)}, ξ(c)^{(3)}}}` with the inner bracket from the
/// fast tensor formula and its phase-space derivatives by differences.
fn nested_bracket(series: &PoincareSeries, a: Complex64, b: Complex64, c: Complex64, depth: Depth) -> Result<CMatrix> {
    let spec: &AlgebraSpec = series.algebra();
    let phase = series.phase();
    let inner = |p: &PhasePoint| -> Result<TensorElement> { Ok(lax_bracket(spec, p, &frame_at(series, p, b, depth)?, &frame_at(series, p, c, depth)?)) };
    let base = inner(phase)?;
    let fa = frame_at(series, phase, a, depth)?;
    let n = spec.n();
    let size = n * n * n;
    let mut out = CMatrix::zeros(size, size);
    let one = Complex64::new(1.0, 0.0);
    for i in 0..phase.genus() {
        let mut dg = Vec::new();
        let mut dxi = Vec::new();
        for e in spec.basis() {
            let plus = inner(&phase.translate_g(i, e, FD_STEP))?;
            let minus = inner(&phase.translate_g(i, e, -FD_STEP))?;
            dg.push((&plus - &minus).scale(one / (2.0 * FD_STEP)));
            // The inner bracket is affine in each ξ_i.
            dxi.push(&inner(&phase.shift_xi(i, e, 1.0))? - &base);
        }
        let c = structure(spec, &phase.xi[i]);
        for (beta, dual) in spec.dual_basis().iter().enumerate() {
            let mut dg_dual = TensorElement::zeros(n);
            for (coef, d) in spec.coords(dual).iter().zip(&dg) {
                dg_dual += &d.scale(*coef);
            }
            let mut t = embed1(&fa.g_dual[i][beta], 0) * embed2(&dxi[beta], 1, 2);
            t -= embed1(&fa.kernel[i][beta], 0) * embed2(&dg_dual, 1, 2);
            for (alpha, row) in c.iter().enumerate() {
                if row[beta] != Complex64::new(0.0, 0.0) {
                    t -= embed1(&fa.kernel[i][alpha], 0) * embed2(&dxi[beta], 1, 2) * row[beta];
                }
            }
            out += t;
        }
    }
    Ok(out)
}

/// Norm of the cyclic sum `{ξ1,{ξ2,ξ3}} + {ξ2,{ξ3,ξ1}} + {ξ3,{ξ1,ξ2}}`
/// and the norm of its largest term.
pub fn jacobi_defect(series: &PoincareSeries, z: [Complex64; 3], depth: Depth) -> Result<(f64, f64)> {
    let n = series.n();
    let [z1, z2, z3] = z;
    let j1 = nested_bracket(series, z1, z2, z3, depth)?;
    let j2 = permute_slots(&nested_bracket(series, z2, z3, z1, depth)?, n, [2, 0, 1]);
    let j3 = permute_slots(&nested_bracket(series, z3, z1, z2, depth)?, n, [1, 2, 0]);
    let scale = j1.norm().max(j2.norm()).max(j3.norm());
    Ok(((j1 + j2 + j3).norm(), scale))
}

/// Word length used for the Jacobi oracle; the identity holds for any
/// truncation, so a short one keeps the finite differences cheap.
const JACOBI_WORD_LENGTH: usize = 3;

/// Longest fixed word length in the convergence scan.
const SCAN_LIMIT: usize = 8;

impl Verifier {
    pub(super) fn check_dybe(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let mut sampler = self.sampler(CheckGroup::Dybe);
        let triples: Vec<[Complex64; 3]> = (0..self.samples.triples.max(1)).map(|_| sampler.triple()).collect();
        let patterns = all_patterns();
        let mut per_pattern = vec![0.0f64; patterns.len()];
        let (mut budget, mut word_length) = (0.0f64, 0usize);
        for t in &triples {
            let terms = dybe_terms(&self.series, *t, Depth::Adaptive)?;
            for (acc, p) in per_pattern.iter_mut().zip(&patterns) {
                *acc = acc.max(terms.residual(p));
            }
            budget = budget.max(terms.tail_budget);
            word_length = word_length.max(terms.word_length);
        }
        let at = |p: &SignPattern| per_pattern[patterns.iter().position(|q| q == p).expect("listed")];
        let resolved = at(&RESOLVED_SIGNS);
        let mut report = CheckReport::new("dybe", resolved, self.tolerances.get("dybe"), budget, started)
            .with_samples(&triples.iter().map(|t| t.to_vec()).collect::<Vec<_>>())
            .detail("wordLength", word_length as f64);
        for (p, r) in patterns.iter().zip(&per_pattern) {
            report = report.detail(format!("signs{}", pattern_name(p)), *r);
        }
        report = report.note(format!("all-plus form residual {:.3e}; resolved signs {}", at(&ALL_PLUS_SIGNS), pattern_name(&RESOLVED_SIGNS)));

        // The residual must shrink as longer words are kept.
        let mut previous = f64::INFINITY;
        let mut monotone = true;
        for len in 1..=word_length.min(SCAN_LIMIT) {
            let r = dybe_terms(&self.series, triples[0], Depth::Fixed(len))?.residual(&RESOLVED_SIGNS);
            report = report.detail(format!("residualAtLength{len:02}"), r);
            if r > previous {
                monotone = false;
            }
            previous = r;
        }
        if !monotone {
            report = report.fail("residual does not decrease monotonically with word length");
        }
        let jacobi_depth = self.fixed_depth(JACOBI_WORD_LENGTH);
        let (jacobi, scale) = jacobi_defect(&self.series, triples[0], jacobi_depth)?;
        report = report
            .detail("jacobiLargestTerm", scale)
            .detail("jacobiWordLength", JACOBI_WORD_LENGTH.min(self.series.policy().max_word_length) as f64)
            .with_oracle("dybe-jacobi", jacobi, self.tolerances.get("dybe-jacobi"));
        report.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        Ok(vec![report])
    }
}
