//! Acceptance suite: one PASS/FAIL line per criterion, on both shipped
//! reference configurations, with every tolerance pinned here rather than
//! read from the config.
//!
//! Runs without the libtest harness so the lines reach the terminal.
//! The process fails when the set of failing criteria differs from
//! `KNOWN_FAILURES`; a criterion listed there still prints FAIL.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use schottky_lax::config::RunConfig;
use schottky_lax::verify::{CheckGroup, CheckReport, Verifier};

/// Tolerances as the criteria state them.
const PINNED: &[(&str, f64)] = &[
    ("tail", 1e-9),
    ("twist", 1e-7),
    ("pairing", 1e-8),
    ("antisymmetry", 1e-12),
    ("rmatrix", 1e-6),
    ("rmatrix-oracle", 1e-5),
    ("lemma3", 1e-6),
    ("lemma3-intermediate", 1e-7),
    ("involution", 1e-6),
    ("dybe", 1e-5),
    ("dybe-jacobi", 1e-5),
    ("basepoint", 1e-7),
    ("basepoint-derivative", 1e-5),
    ("derivatives", 1e-5),
];

const SHELL_RATIO_SLACK: f64 = 0.05;
const CONVERGENCE_BUDGET: Duration = Duration::from_secs(30);
const SUITE_BUDGET: Duration = Duration::from_secs(300);

/// Criterion 6 asks for `∫∫{ξ⁽¹⁾, ξ⁽²⁾} = +[P, ξ_i⁽¹⁾]` on the diagonal
/// blocks. With the bracket that makes the r-matrix defect vanish, the
/// integral is `−[P, ξ_i⁽¹⁾]` to round-off; the `+` form misses by
/// `2‖[P, ξ_i]‖`. `lemma3_sign` below pins that diagnosis.
const KNOWN_FAILURES: &[usize] = &[6];

struct Run {
    label: &'static str,
    cfg: RunConfig,
    reports: BTreeMap<String, CheckReport>,
    group_time: BTreeMap<CheckGroup, Duration>,
}

impl Run {
    fn report(&self, name: &str) -> &CheckReport {
        self.reports.get(name).unwrap_or_else(|| panic!("{}: no {name} report", self.label))
    }
}

fn load(label: &'static str, file: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(file);
    let mut cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    cfg.truncation.target_tail = 1e-9;
    cfg.tolerances = PINNED.iter().filter(|(k, _)| *k != "tail").map(|&(k, v)| (k.to_string(), v)).collect();
    assert_eq!(cfg.samples.points, 20, "{label}: twist needs 20 points per generator");
    assert_eq!(cfg.samples.pairs, 10, "{label}: pair checks need 10 pairs");
    cfg
}

fn execute(label: &'static str, file: &str) -> Run {
    let cfg = load(label, file);
    let verifier = Verifier::new(&cfg).expect("reference config is valid");
    let mut reports = BTreeMap::new();
    let mut group_time = BTreeMap::new();
    for g in CheckGroup::ALL {
        let t = Instant::now();
        for r in verifier.run(g).unwrap_or_else(|e| panic!("{label} {g}: {e}")) {
            reports.insert(r.check_name.clone(), r);
        }
        group_time.insert(g, t.elapsed());
    }
    Run { label, cfg, reports, group_time }
}

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict { pass: true, lines: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
    }

    /// The report passes, its tolerance is the pinned one, and the residual
    /// sits inside it outright.
    fn report(&mut self, run: &Run, name: &str) {
        let r = run.report(name);
        let pinned = PINNED.iter().find(|(k, _)| *k == name).map(|p| p.1);
        if let Some(p) = pinned {
            self.require(r.tolerance == p, format!("{}/{name}: tolerance pinned at {p:.0e}", run.label));
        }
        let mut what = format!("{}/{name}: residual {:.2e} tol {:.0e} tail {:.1e}", run.label, r.residual, r.tolerance, r.tail_budget);
        for (k, v) in &r.details {
            if k.ends_with("Residual") {
                what.push_str(&format!(" {k} {v:.2e}"));
            }
        }
        if !r.pass {
            what.push_str(&format!(" [{}]", r.notes.join("; ")));
        }
        self.require(r.pass, what);
    }
}

fn criterion(n: usize, title: &str, runs: &[Run], body: impl Fn(&mut Verdict, &Run), filter: impl Fn(&Run) -> bool) -> bool {
    let mut v = Verdict::new();
    for run in runs.iter().filter(|r| filter(r)) {
        body(&mut v, run);
    }
    println!("criterion {n:>2} {}: {title}", if v.pass { "PASS" } else { "FAIL" });
    for l in &v.lines {
        println!("    {l}");
    }
    v.pass
}

fn both(_: &Run) -> bool {
    true
}

/// The stated sign misses and the opposite sign holds, on every config.
fn lemma3_sign(runs: &[Run]) -> bool {
    runs.iter().all(|run| {
        let r = run.report("lemma3-intermediate");
        let flipped = r.details["bracketIntegralOppositeSign"].max(r.details["sTermIntegralOppositeSign"]);
        r.residual > 1.0 && flipped <= r.tolerance
    })
}

fn main() {
    let suite = Instant::now();
    let runs = [execute("genus1", "genus1.json"), execute("genus2", "genus2.json")];
    let suite_time = suite.elapsed();

    let mut results = Vec::new();
    results.push(criterion(1, "shell ratio within κ + 0.05, tail 1e-9 within capacity, under 30 s", &runs, |v, run| {
        let r = run.report("shell-ratio");
        let kappa = run.cfg.kappa().unwrap();
        v.require(
            r.residual <= kappa + SHELL_RATIO_SLACK,
            format!("{}/shell-ratio: measured {:.3} ≤ κ + {SHELL_RATIO_SLACK} = {:.3}", run.label, r.residual, kappa + SHELL_RATIO_SLACK),
        );
        v.require(kappa <= 0.5, format!("{}: κ = {kappa:.3} ≤ 0.5", run.label));
        v.report(run, "tail");
        let t = run.group_time[&CheckGroup::Convergence];
        v.require(t < CONVERGENCE_BUDGET, format!("{}: convergence ran in {:.2} s", run.label, t.as_secs_f64()));
    }, both));
    results.push(criterion(2, "twist equivariance to 1e-7 at 20 points per generator", &runs, |v, run| {
        let r = run.report("twist");
        let need = 20 * run.cfg.genus();
        v.require(r.samples.len() >= need, format!("{}/twist: {} samples ≥ {need}", run.label, r.samples.len()));
        v.report(run, "twist");
    }, both));
    results.push(criterion(3, "residue pairing to 1e-8 with at most 1024 nodes", &runs, |v, run| {
        let r = run.report("pairing");
        for i in 1..=run.cfg.genus() {
            let nodes = r.details[&format!("nodes{i}")];
            v.require(nodes <= 1024.0, format!("{}/pairing: circle {i} used {nodes} nodes", run.label));
        }
        v.report(run, "pairing");
    }, both));
    results.push(criterion(4, "antisymmetry to 1e-12 at 10 pairs", &runs, |v, run| {
        v.require(run.report("antisymmetry").samples.len() == 10, format!("{}/antisymmetry: 10 pairs", run.label));
        v.report(run, "antisymmetry");
    }, both));
    results.push(criterion(5, "r-matrix bracket defect to 1e-6 at 10 pairs, finite-difference oracle to 1e-5", &runs, |v, run| {
        v.require(run.report("rmatrix").samples.len() == 10, format!("{}/rmatrix: 10 pairs", run.label));
        v.report(run, "rmatrix");
    }, both));
    results.push(criterion(6, "contour blocks C_ij to 1e-6 and intermediate identities to 1e-7", &runs, |v, run| {
        v.report(run, "lemma3");
        v.report(run, "lemma3-intermediate");
    }, both));
    results.push(criterion(7, "involution to 1e-6 at 5 pairs, genus 2", &runs, |v, run| {
        v.require(run.report("involution").samples.len() == 5, format!("{}/involution: 5 pairs", run.label));
        v.report(run, "involution");
    }, |r| r.cfg.genus() == 2));
    results.push(criterion(8, "dynamical Yang-Baxter to 1e-5, monotone in word length, Jacobi oracle agrees", &runs, |v, run| {
        let r = run.report("dybe");
        let scan: Vec<f64> = r.details.iter().filter(|(k, _)| k.starts_with("residualAtLength")).map(|(_, &x)| x).collect();
        v.require(scan.len() >= 3 && scan.windows(2).all(|w| w[1] <= w[0]), format!("{}/dybe: {} word lengths, monotone", run.label, scan.len()));
        v.require(r.details.contains_key("dybe-jacobiResidual"), format!("{}/dybe: Jacobi oracle ran", run.label));
        v.report(run, "dybe");
    }, both));
    results.push(criterion(9, "basepoint independence to 1e-7, basepoint derivative to 1e-5", &runs, |v, run| {
        v.report(run, "basepoint");
        v.report(run, "basepoint-derivative");
    }, both));
    results.push(criterion(10, "50 finite-difference probes to relative 1e-5, full suite under 5 min", &runs, |v, run| {
        let r = run.report("derivatives");
        v.require(r.details["probes"] >= 50.0, format!("{}/derivatives: {} probes", run.label, r.details["probes"]));
        v.report(run, "derivatives");
        if run.label == "genus2" {
            v.require(suite_time < SUITE_BUDGET, format!("suite ran in {:.1} s", suite_time.as_secs_f64()));
        }
    }, both));

    let failing: Vec<usize> = results.iter().enumerate().filter(|(_, &p)| !p).map(|(i, _)| i + 1).collect();
    println!("{} of {} criteria pass; failing: {failing:?}", results.len() - failing.len(), results.len());
    let sign = lemma3_sign(&runs);
    println!(
        "criterion 6 diagnosis: intermediate integrals match -[P, xi_i] to tolerance on both configs: {}",
        if sign { "yes" } else { "no" }
    );

    if failing != KNOWN_FAILURES || !sign {
        eprintln!("failing criteria {failing:?} differ from the recorded set {KNOWN_FAILURES:?}, or the sign diagnosis no longer holds");
        std::process::exit(1);
    }
}
