//! Single-point and two-point checks.

use std::time::Instant;

use num_complex::Complex64;

use super::lax::{assemble_defect, defect_budget, lax_bracket, lax_bracket_entrywise, product_budget, PointFrame, TracePowerAt};
use super::{CheckGroup, CheckReport, Verifier};
use crate::error::{Error, Result};
use crate::liealg::{adjoint_operator_norm, checked_inverse, CMatrix, TensorElement};
use crate::phasespace::{holonomy, holonomy_derivative, moment_map, poisson_bracket, poisson_bracket_fd, project_to_zero_level, PhasePoint};
use crate::poincare::{residue_at_circle, Depth, PoincareSeries, TruncationPolicy};

/// Central-difference step for derivative oracles.
pub(crate) const FD_STEP: f64 = 1e-5;

/// Relative error with a floor on the reference magnitude.
pub(crate) fn relative(err: f64, reference: f64) -> f64 {
    err / reference.max(1e-8)
}

fn word_samples(points: usize) -> usize {
    (points / 5).max(1)
}

impl Verifier {
    fn probe_depth(&self) -> Depth {
        self.fixed_depth(self.samples.probe_word_length)
    }

    pub(super) fn check_convergence(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let mut sampler = self.sampler(CheckGroup::Convergence);
        let pts: Vec<Complex64> = (0..self.samples.points).map(|_| sampler.point()).collect();
        let (mut ratio, mut tail, mut shells) = (0.0f64, 0.0f64, 0usize);
        let mut unconverged = 0;
        for &z in &pts {
            let v = self.series.xi(z)?;
            // NaN (a single shell, no ratio to measure) must not be skipped by `max`.
            ratio = if ratio.is_nan() || v.measured_ratio.is_nan() { f64::NAN } else { ratio.max(v.measured_ratio) };
            tail = tail.max(v.tail_estimate);
            shells = shells.max(v.shells_used);
            if !v.converged {
                unconverged += 1;
            }
        }
        let kappa = self.series.kappa();
        let samples: Vec<Vec<Complex64>> = pts.iter().map(|&z| vec![z]).collect();
        let ratio_report = CheckReport::new("shell-ratio", ratio, kappa + self.tolerances.get("shell-ratio"), 0.0, started)
            .with_samples(&samples)
            .detail("kappa", kappa)
            .detail("maxShells", shells as f64);
        let mut tail_report = CheckReport::new("tail", tail, self.tolerances.get("tail"), 0.0, started)
            .with_samples(&samples)
            .detail("maxShells", shells as f64)
            .detail("unconverged", unconverged as f64);
        if unconverged > 0 {
            tail_report = tail_report.fail(format!("{unconverged} points stopped at the word-length cap before reaching the target tail"));
        }
        Ok(vec![ratio_report, tail_report])
    }

    /// `ξ(γz)γ'(z) = Ad g_γ ξ(z)` on each `Γ_j` for the generators, and at
    /// free points for random words of length two.
    pub(super) fn check_twist(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let s = self.series.schottky();
        let spec = self.series.algebra();
        let phase = self.series.phase();
        let mut sampler = self.sampler(CheckGroup::Twist);
        let mut cases = Vec::new();
        for (j, pair) in s.pairs.iter().enumerate() {
            for _ in 0..self.samples.points {
                cases.push((sampler.on_circle(&pair.inner), pair.gamma, phase.g[j].clone()));
            }
        }
        if s.genus() > 0 {
            for _ in 0..word_samples(self.samples.points) {
                let w = sampler.word(s.genus(), 2);
                // The last letter carries this circle onto the boundary of the
                // fundamental domain, so γz sits only one level deep.
                let last = w.last().expect("length two");
                let pair = &s.pairs[last.generator];
                let z = sampler.on_circle(if last.inverse { &pair.outer } else { &pair.inner });
                cases.push((z, crate::moebius::word_to_map(&w, s)?, holonomy(&w, phase)?));
            }
        }
        let (mut worst, mut budget) = (0.0f64, 0.0f64);
        let mut samples = Vec::new();
        for (z, gamma, g) in cases {
            let gz = gamma.apply_finite(z)?;
            let d = gamma.derivative(z)?;
            let at_z = self.series.xi(z)?;
            // ξ(γz) enters multiplied by γ'(z), so its tail target scales by 1/|γ'(z)|.
            let policy = self.series.policy();
            let relaxed = TruncationPolicy { target_tail: policy.target_tail / d.norm().min(1.0), ..*policy };
            let at_gz = self.series.with_policy(relaxed)?.xi(gz)?;
            let lhs = &at_gz.value * d;
            let rhs = &g * &at_z.value * checked_inverse(&g)?;
            worst = worst.max((lhs - rhs).norm());
            budget = budget.max(d.norm() * at_gz.tail_estimate + adjoint_operator_norm(spec, &g)? * at_z.tail_estimate);
            samples.push(vec![z, gz]);
        }
        Ok(vec![CheckReport::new("twist", worst, self.tolerances.get("twist"), budget, started).with_samples(&samples)])
    }

    /// `(1/2πi)∮_{Γ_i} ξ(z) dz = ξ_i`.
    pub(super) fn check_pairing(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let tol = self.tolerances.get("pairing");
        let opts = self.quadrature(tol, usize::MAX);
        let s = self.series.schottky();
        let mut report_details = Vec::new();
        let (mut worst, mut budget) = (0.0f64, 0.0f64);
        for i in 0..s.genus() {
            let mut tail = 0.0f64;
            let q = residue_at_circle(s, i, self.samples.quadrature_nodes, opts, |z| {
                let v = self.series.xi(z)?;
                tail = tail.max(v.tail_estimate);
                Ok(v.value)
            })?;
            worst = worst.max((&q.value - &self.series.phase().xi[i]).norm());
            budget = budget.max(s.pairs[i].inner.radius * tail + q.error_estimate);
            report_details.push((format!("nodes{}", i + 1), q.nodes as f64));
            report_details.push((format!("quadratureError{}", i + 1), q.error_estimate));
        }
        let mut r = CheckReport::new("pairing", worst, tol, budget, started);
        for (k, v) in report_details {
            r = r.detail(k, v);
        }
        Ok(vec![r])
    }

    /// `r(w,z)^{(21)} = −s(z,w)` at equal truncation.
    pub(super) fn check_antisymmetry(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let mut sampler = self.sampler(CheckGroup::Antisymmetry);
        let mut worst = 0.0f64;
        let mut samples = Vec::new();
        for _ in 0..self.samples.pairs {
            let (z, w) = sampler.pair();
            let r = self.series.r_matrix(w, z)?;
            let s = self.series.s_matrix_with(z, w, Depth::Fixed(r.word_length()))?;
            worst = worst.max((&r.value.swap() + &s.value).norm());
            samples.push(vec![z, w]);
        }
        Ok(vec![CheckReport::new("antisymmetry", worst, self.tolerances.get("antisymmetry"), 0.0, started).with_samples(&samples)])
    }

    /// The r-matrix bracket at random pairs, plus finite differences of
    /// every derivative the bracket is assembled from.
    pub(super) fn check_rmatrix(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let spec = self.series.algebra();
        let mut sampler = self.sampler(CheckGroup::RMatrix);
        let pairs: Vec<(Complex64, Complex64)> = (0..self.samples.pairs).map(|_| sampler.pair()).collect();
        let (mut worst, mut budget, mut fast_gap) = (0.0f64, 0.0f64, 0.0f64);
        let mut cache: Vec<(Complex64, crate::poincare::PointData)> = Vec::new();
        for &(z, w) in &pairs {
            for p in [z, w] {
                if !cache.iter().any(|(q, _)| *q == p) {
                    cache.push((p, self.series.point_data(p)?));
                }
            }
            let pz = &cache.iter().find(|(q, _)| *q == z).expect("cached").1;
            let pw = &cache.iter().find(|(q, _)| *q == w).expect("cached").1;
            let r = self.series.r_matrix(z, w)?;
            let s = self.series.s_matrix(z, w)?;
            let entrywise = lax_bracket_entrywise(spec, pz, pw)?;
            let (fz, fw) = (PointFrame::new(spec, pz), PointFrame::new(spec, pw));
            let fast = lax_bracket(spec, self.series.phase(), &fz, &fw);
            fast_gap = fast_gap.max((&fast - &entrywise).norm());
            let (defect, ..) = assemble_defect(entrywise, &r.value, &s.value, &pz.value, &pw.value);
            worst = worst.max(defect.norm());
            budget = budget.max(defect_budget(spec, &fz, &fw, (r.tail_estimate, r.value.norm()), (s.tail_estimate, s.value.norm())));
        }
        let oracle_points: Vec<Complex64> = pairs.iter().take(3).flat_map(|&(z, w)| [z, w]).collect();
        let mut oracle = 0.0f64;
        for &z in &oracle_points {
            oracle = oracle.max(self.derivative_oracle(z)?);
        }
        let samples: Vec<Vec<Complex64>> = pairs.iter().map(|&(z, w)| vec![z, w]).collect();
        let report = CheckReport::new("rmatrix", worst, self.tolerances.get("rmatrix"), budget, started)
            .with_samples(&samples)
            .detail("fastVsEntrywise", fast_gap)
            .detail("oracleWordLength", self.samples.probe_word_length as f64)
            .with_oracle("rmatrix-oracle", oracle, self.tolerances.get("rmatrix-oracle"));
        Ok(vec![report])
    }

    /// Largest relative gap between the analytic kernel and `g`-derivative
    /// blocks of `ξ(z)` and their finite-difference counterparts.
    fn derivative_oracle(&self, z: Complex64) -> Result<f64> {
        let spec = self.series.algebra();
        let depth = self.probe_depth();
        let pd = self.series.point_data_with(z, depth)?;
        let phase = self.series.phase();
        let xi_at = |p: &PhasePoint| -> Result<CMatrix> { Ok(self.series.at_phase(p.clone())?.xi_with(z, depth)?.value) };
        let base = xi_at(phase)?;
        let mut worst = 0.0f64;
        for i in 0..phase.genus() {
            for (a, e) in spec.basis().iter().enumerate() {
                let fd = (xi_at(&phase.translate_g(i, e, FD_STEP))? - xi_at(&phase.translate_g(i, e, -FD_STEP))?) / Complex64::new(2.0 * FD_STEP, 0.0);
                let an = &pd.g_direction_derivatives(i)[a];
                worst = worst.max(relative((an - fd).norm(), an.norm()));
                // ξ(z) is affine in each ξ_i, so a unit forward step is exact.
                let fd = xi_at(&phase.shift_xi(i, e, 1.0))? - &base;
                let an = pd.kernel(i, e);
                worst = worst.max(relative((&an - fd).norm(), an.norm()));
            }
        }
        Ok(worst)
    }

    /// `{tr ξ(z)², tr ξ(w)²} = 0`, cross-checked against a finite-difference
    /// bracket at fixed truncation.
    pub(super) fn check_involution(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let spec = self.series.algebra();
        let phase = self.series.phase();
        let mut sampler = self.sampler(CheckGroup::Involution);
        let pairs: Vec<(Complex64, Complex64)> = (0..self.samples.pairs.min(5)).map(|_| sampler.pair()).collect();
        let (mut worst, mut budget) = (0.0f64, 0.0f64);
        for &(z, w) in &pairs {
            let pz = self.series.point_data(z)?;
            let pw = self.series.point_data(w)?;
            let v = poisson_bracket(spec, &pz.trace_power(2), &pw.trace_power(2), phase)?;
            worst = worst.max(v.norm());
            let (fz, fw) = (PointFrame::new(spec, &pz), PointFrame::new(spec, &pw));
            let l = phase.genus() as f64;
            let dim = spec.dim() as f64;
            // d tr ξ² = 2 tr(ξ dξ): value and frame errors enter linearly on each side.
            let side = |f: &PointFrame| (2.0 * (f.tail * f.scale() + f.value.norm() * f.tail), 2.0 * f.value.norm() * f.scale());
            let (tz, nz) = side(&fz);
            let (tw, nw) = side(&fw);
            budget = budget.max(l * dim * (2.0 + dim) * product_budget(tz, nz, tw, nw));
        }
        let depth = self.probe_depth();
        let mut gap = 0.0f64;
        for &(z, w) in pairs.iter().take(2) {
            let an = poisson_bracket(
                spec,
                &self.series.point_data_with(z, depth)?.trace_power(2),
                &self.series.point_data_with(w, depth)?.trace_power(2),
                phase,
            )?;
            let f = TracePowerAt { series: &self.series, z, depth, k: 2 };
            let h = TracePowerAt { series: &self.series, z: w, depth, k: 2 };
            let fd = poisson_bracket_fd(spec, &f, &h, phase, FD_STEP)?;
            gap = gap.max((an - fd).norm());
        }
        let samples: Vec<Vec<Complex64>> = pairs.iter().map(|&(z, w)| vec![z, w]).collect();
        let report = CheckReport::new("involution", worst, self.tolerances.get("involution"), budget, started)
            .with_samples(&samples)
            .detail("oracleWordLength", self.samples.probe_word_length as f64)
            .with_oracle("involution-oracle", gap, self.tolerances.get("involution-oracle"));
        Ok(vec![report])
    }

    /// Basepoint independence on the zero level of the moment map, and the
    /// `z0`-derivative series against the based form it differentiates.
    pub(super) fn check_basepoint(&self) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        let spec = self.series.algebra();
        let s = self.series.schottky();
        let mut sampler = self.sampler(CheckGroup::Basepoint);
        let level = project_to_zero_level(spec, self.series.phase())?;
        let m = moment_map(&level)?.norm();
        if m > 1e-10 {
            return Err(Error::MomentNotZero { norm: m });
        }
        let zero = self.series.at_phase(level)?;
        let count = self.samples.pairs.min(5);
        let (mut worst, mut budget) = (0.0f64, 0.0f64);
        let mut samples = Vec::new();
        for _ in 0..count {
            let [z, a, b] = sampler.triple();
            let va = zero.xi_based_at(z, a)?;
            let vb = zero.xi_based_at(z, b)?;
            worst = worst.max((&va.value - &vb.value).norm());
            budget = budget.max(va.tail_estimate + vb.tail_estimate);
            samples.push(vec![z, a, b]);
        }
        let independence = CheckReport::new("basepoint", worst, self.tolerances.get("basepoint"), budget, started)
            .with_samples(&samples)
            .detail("momentNorm", m);

        let started = Instant::now();
        let step = 0.3 * s.min_radius();
        let (mut rel, mut budget) = (0.0f64, 0.0f64);
        let mut samples = Vec::new();
        for _ in 0..count {
            let (z, a) = sampler.pair();
            let b = sampler.near(a, step);
            if (z - b).norm() <= sampler.separation || !segment_clear(&self.series, a, b, sampler.clearance) {
                continue;
            }
            let (gap, scale, tail) = path_integral_gap(&self.series, z, a, b)?;
            rel = rel.max(relative(gap, scale));
            budget = budget.max(relative(tail, scale));
            samples.push(vec![z, a, b]);
        }
        if samples.is_empty() {
            return Err(Error::InvalidInput("no basepoint segment stayed inside the fundamental domain".into()));
        }
        let derivative = CheckReport::new("basepoint-derivative", rel, self.tolerances.get("basepoint-derivative"), budget, started)
            .with_samples(&samples)
            .detail("momentNorm", moment_map(self.series.phase())?.norm());
        Ok(vec![independence, derivative])
    }

    /// Analytic derivatives of holonomies, `ξ` and `r` along random
    /// directions against central differences, cycling through the three.
    pub(super) fn check_derivatives(&self) -> Result<Vec<CheckReport>> {
        const PROBES: usize = 50;
        let started = Instant::now();
        let spec = self.series.algebra();
        let phase = self.series.phase();
        let l = phase.genus();
        let depth = self.probe_depth();
        let mut sampler = self.sampler(CheckGroup::Derivatives);
        let mut worst = [0.0f64; 3];
        let mut samples = Vec::new();
        let two_h = Complex64::new(2.0 * FD_STEP, 0.0);
        for k in 0..PROBES {
            let j = sampler.index(l);
            let x = sampler.direction(spec);
            let (plus, minus) = (phase.translate_g(j, &x, FD_STEP), phase.translate_g(j, &x, -FD_STEP));
            let err = match k % 3 {
                0 => {
                    let len = 1 + sampler.index(4);
                    let w = sampler.word(l, len);
                    let an = holonomy_derivative(&w, phase, j, &x)?;
                    let fd = (holonomy(&w, &plus)? - holonomy(&w, &minus)?) / two_h;
                    relative((&an - fd).norm(), an.norm())
                }
                1 => {
                    let z = sampler.point();
                    samples.push(vec![z]);
                    let an = self.series.point_data_with(z, depth)?.g_derivative(j, &x);
                    let at = |p: &PhasePoint| -> Result<CMatrix> { Ok(self.series.at_phase(p.clone())?.xi_with(z, depth)?.value) };
                    let fd = (at(&plus)? - at(&minus)?) / two_h;
                    relative((&an - fd).norm(), an.norm())
                }
                _ => {
                    let (z, w) = sampler.pair();
                    samples.push(vec![z, w]);
                    let basis = self.series.r_derivative_basis(z, w, depth)?;
                    let mut an = TensorElement::zeros(spec.n());
                    for (c, t) in spec.coords(&x).iter().zip(&basis.value[j]) {
                        an += &t.scale(*c);
                    }
                    let at = |p: &PhasePoint| -> Result<TensorElement> { Ok(self.series.at_phase(p.clone())?.r_matrix_with(z, w, depth)?.value) };
                    let fd = (&at(&plus)? - &at(&minus)?).scale(Complex64::new(1.0, 0.0) / two_h);
                    relative((&an - &fd).norm(), an.norm())
                }
            };
            worst[k % 3] = worst[k % 3].max(err);
        }
        let residual = worst.iter().copied().fold(0.0, f64::max);
        Ok(vec![CheckReport::new("derivatives", residual, self.tolerances.get("derivatives"), 0.0, started)
            .with_samples(&samples)
            .detail("probes", PROBES as f64)
            .detail("holonomy", worst[0])
            .detail("xi", worst[1])
            .detail("r", worst[2])])
    }
}

/// Every point of `[a, b]` keeps the given clearance from the discs.
fn segment_clear(series: &PoincareSeries, a: Complex64, b: Complex64, clearance: f64) -> bool {
    (0..=16).all(|k| series.schottky().clearance(a + (b - a) * (k as f64 / 16.0)) >= clearance)
}

/// `‖∫_a^b ∂_{z0} ξ dz0 − (ξ_b(z) − ξ_a(z))‖` by composite Simpson on the
/// segment, with the size of the difference and a truncation bound.
fn path_integral_gap(series: &PoincareSeries, z: Complex64, a: Complex64, b: Complex64) -> Result<(f64, f64, f64)> {
    const INTERVALS: usize = 32;
    let h = (b - a) / INTERVALS as f64;
    let n = series.n();
    let mut integral = CMatrix::zeros(n, n);
    let mut tail = 0.0f64;
    for k in 0..=INTERVALS {
        let weight = if k == 0 || k == INTERVALS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let d = series.basepoint_derivative(z, a + h * k as f64)?;
        tail = tail.max(d.tail_estimate);
        integral += &d.value * (h * weight / 3.0);
    }
    let va = series.xi_based_at(z, a)?;
    let vb = series.xi_based_at(z, b)?;
    let diff = &vb.value - &va.value;
    let budget = tail * (b - a).norm() + va.tail_estimate + vb.tail_estimate;
    Ok(((integral - &diff).norm(), diff.norm(), budget))
}
