//! Numerical certificates for the structural identities of the Lax form.
//!
//! Every check produces one or more [`CheckReport`]s. A report passes when
//! its residual is within `tolerance + tailBudget` and the truncation budget
//! is itself no larger than the tolerance, so a series cut off too early
//! cannot pass by inflating its own error bar.

mod checks;
mod dybe;
mod lax;
mod lemma3;
mod sampling;

pub use dybe::{all_patterns, dybe_terms, jacobi_defect, pattern_name, DybeTerms, SignPattern, RESOLVED_SIGNS, ALL_PLUS_SIGNS};
pub use lax::{bracket_defect, bracket_defect_with, lax_bracket, lax_bracket_entrywise, Defect, PointFrame, TracePowerAt, XiEntryAt};
pub use sampling::Sampler;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SampleSpec};
use crate::error::{Error, Result};
use crate::poincare::{Depth, PoincareSeries};
use crate::quadrature::QuadratureOptions;

/// Outcome of one numerical check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub check_name: String,
    /// `null` in JSON when unbounded.
    #[serde(with = "crate::serde_util::unbounded")]
    pub residual: f64,
    pub tolerance: f64,
    /// `null` in JSON when the truncation tail cannot be bounded.
    #[serde(with = "crate::serde_util::unbounded")]
    pub tail_budget: f64,
    /// The evaluation points, one list per sample.
    pub samples: Vec<Vec<[f64; 2]>>,
    pub pass: bool,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, residual: f64, tolerance: f64, tail_budget: f64, started: Instant) -> Self {
        let mut notes = Vec::new();
        if !(tail_budget <= tolerance) {
            notes.push(if tail_budget.is_finite() {
                format!("tail budget {tail_budget:.3e} exceeds the tolerance; truncation dominates")
            } else {
                "tail budget unbounded (shell ratio not below 1 at this word length); truncation dominates".to_string()
            });
        }
        CheckReport {
            check_name: name.to_string(),
            residual,
            tolerance,
            tail_budget,
            samples: Vec::new(),
            pass: Self::judge(residual, tolerance, tail_budget),
            runtime_ms: started.elapsed().as_secs_f64() * 1e3,
            details: BTreeMap::new(),
            notes,
        }
    }

    /// `residual ≤ tolerance + tail_budget` with `tail_budget ≤ tolerance`.
    pub fn judge(residual: f64, tolerance: f64, tail_budget: f64) -> bool {
        residual.is_finite() && tail_budget <= tolerance && residual <= tolerance + tail_budget
    }

    /// A failed report for a check that could not be carried out.
    pub fn aborted(name: &str, tolerance: f64, err: &Error, started: Instant) -> Self {
        let mut r = Self::new(name, f64::INFINITY, tolerance, 0.0, started);
        r.notes.push(format!("aborted: {err}"));
        r
    }

    pub fn with_samples(mut self, samples: &[Vec<Complex64>]) -> Self {
        self.samples = samples.iter().map(|s| s.iter().map(|z| [z.re, z.im]).collect()).collect();
        self
    }

    pub fn detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Records an independent cross-check; the report fails if it disagrees.
    pub fn with_oracle(mut self, name: &str, residual: f64, tolerance: f64) -> Self {
        self.details.insert(format!("{name}Residual"), residual);
        self.details.insert(format!("{name}Tolerance"), tolerance);
        if !(residual <= tolerance) {
            self = self.fail(format!("{name} cross-check disagrees: {residual:.3e} > {tolerance:.1e}"));
        }
        self
    }

    /// Marks the report failed for a reason other than the residual.
    pub fn fail(mut self, note: impl Into<String>) -> Self {
        self.pass = false;
        self.notes.push(note.into());
        self
    }
}

/// Default tolerance per report or cross-check name. `tail` defaults to the
/// truncation target and `shell-ratio` is the slack allowed above `κ`.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("shell-ratio", 0.05),
    ("twist", 1e-7),
    ("pairing", 1e-8),
    ("antisymmetry", 1e-12),
    ("rmatrix", 1e-6),
    ("rmatrix-oracle", 1e-5),
    ("lemma3", 1e-6),
    ("lemma3-intermediate", 1e-7),
    ("lemma3-engine", 1e-7),
    ("involution", 1e-6),
    ("involution-oracle", 1e-6),
    ("dybe", 1e-5),
    ("dybe-jacobi", 1e-5),
    ("basepoint", 1e-7),
    ("basepoint-derivative", 1e-5),
    ("derivatives", 1e-5),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    /// Defaults overridden by `overrides`; unknown names are rejected.
    pub fn new(target_tail: f64, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut map: BTreeMap<String, f64> = DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        map.insert("tail".into(), target_tail);
        for (k, &v) in overrides {
            if !map.contains_key(k) {
                return Err(Error::Config(format!("unknown tolerance name {k:?}")));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("tolerance {k} must be a non-negative number")));
            }
            map.insert(k.clone(), v);
        }
        Ok(Tolerances(map))
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// A group of related reports, selectable on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckGroup {
    Convergence,
    Twist,
    Pairing,
    Antisymmetry,
    RMatrix,
    Lemma3,
    Involution,
    Dybe,
    Basepoint,
    Derivatives,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 10] = [
        CheckGroup::Convergence,
        CheckGroup::Twist,
        CheckGroup::Pairing,
        CheckGroup::Antisymmetry,
        CheckGroup::RMatrix,
        CheckGroup::Lemma3,
        CheckGroup::Involution,
        CheckGroup::Dybe,
        CheckGroup::Basepoint,
        CheckGroup::Derivatives,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Convergence => "convergence",
            CheckGroup::Twist => "twist",
            CheckGroup::Pairing => "pairing",
            CheckGroup::Antisymmetry => "antisymmetry",
            CheckGroup::RMatrix => "rmatrix",
            CheckGroup::Lemma3 => "lemma3",
            CheckGroup::Involution => "involution",
            CheckGroup::Dybe => "dybe",
            CheckGroup::Basepoint => "basepoint",
            CheckGroup::Derivatives => "derivatives",
        }
    }

    /// Names of the reports this group emits, in order.
    pub fn report_names(self) -> &'static [&'static str] {
        match self {
            CheckGroup::Convergence => &["shell-ratio", "tail"],
            CheckGroup::Twist => &["twist"],
            CheckGroup::Pairing => &["pairing"],
            CheckGroup::Antisymmetry => &["antisymmetry"],
            CheckGroup::RMatrix => &["rmatrix"],
            CheckGroup::Lemma3 => &["lemma3", "lemma3-intermediate", "lemma3-engine"],
            CheckGroup::Involution => &["involution"],
            CheckGroup::Dybe => &["dybe"],
            CheckGroup::Basepoint => &["basepoint", "basepoint-derivative"],
            CheckGroup::Derivatives => &["derivatives"],
        }
    }

    /// Comma-separated group names; `all` selects every group.
    pub fn parse_list(s: &str) -> Result<Vec<CheckGroup>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(CheckGroup::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("empty check list".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| {
            let known: Vec<_> = CheckGroup::ALL.iter().map(|g| g.name()).collect();
            Error::Config(format!("unknown check {s:?} (known: {})", known.join(", ")))
        })
    }
}

/// Sampler stream per group, so adding samples to one check leaves the
/// others unchanged.
fn stream(group: CheckGroup) -> u64 {
    group as u64 + 1
}

/// Runs checks against one configuration.
pub struct Verifier {
    series: PoincareSeries,
    samples: SampleSpec,
    tolerances: Tolerances,
}

impl Verifier {
    /// A fixed word length, capped by the truncation policy. Oracles built on
    /// truncated series stay exact at any length, so capping is harmless.
    pub(super) fn fixed_depth(&self, len: usize) -> Depth {
        Depth::Fixed(len.min(self.series.policy().max_word_length))
    }

    /// Fails with a precondition error if the configuration is unusable.
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let series = cfg.series()?;
        let tolerances = Tolerances::new(cfg.truncation.target_tail, &cfg.tolerances)?;
        Ok(Verifier { series, samples: cfg.samples.clone(), tolerances })
    }

    pub fn series(&self) -> &PoincareSeries {
        &self.series
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Doubling rule stopping at `0.1·tolerance`; when the starting node
    /// count already reaches `cap` the rule is applied once, and its
    /// `N`/`N/2` discrepancy lands in the tail budget.
    fn quadrature(&self, tolerance: f64, cap: usize) -> QuadratureOptions {
        let max_nodes = self.samples.max_quadrature_nodes.min(cap);
        if self.samples.quadrature_nodes >= max_nodes {
            QuadratureOptions { tolerance: f64::INFINITY, max_nodes: self.samples.quadrature_nodes }
        } else {
            QuadratureOptions { tolerance: 0.1 * tolerance, max_nodes }
        }
    }

    fn sampler(&self, group: CheckGroup) -> Sampler<'_> {
        Sampler::new(self.series.schottky(), self.samples.seed, stream(group))
    }

    /// Precondition failures propagate; any other error becomes a failed
    /// report for each name the group would have produced.
    pub fn run(&self, group: CheckGroup) -> Result<Vec<CheckReport>> {
        let started = Instant::now();
        log::info!("running {group}");
        let out = match group {
            CheckGroup::Convergence => self.check_convergence(),
            CheckGroup::Twist => self.check_twist(),
            CheckGroup::Pairing => self.check_pairing(),
            CheckGroup::Antisymmetry => self.check_antisymmetry(),
            CheckGroup::RMatrix => self.check_rmatrix(),
            CheckGroup::Lemma3 => self.check_lemma3(),
            CheckGroup::Involution => self.check_involution(),
            CheckGroup::Dybe => self.check_dybe(),
            CheckGroup::Basepoint => self.check_basepoint(),
            CheckGroup::Derivatives => self.check_derivatives(),
        };
        match out {
            Ok(reports) => {
                for r in &reports {
                    log::info!("{}: residual {:.3e} tolerance {:.1e} pass {}", r.check_name, r.residual, r.tolerance, r.pass);
                }
                Ok(reports)
            }
            Err(e) if e.is_precondition() => Err(e),
            Err(e) => {
                log::warn!("{group} aborted: {e}");
                Ok(group.report_names().iter().map(|n| CheckReport::aborted(n, self.tolerances.get(n), &e, started)).collect())
            }
        }
    }

    pub fn run_all(&self, groups: &[CheckGroup]) -> Result<Vec<CheckReport>> {
        let mut out = Vec::new();
        for &g in groups {
            out.extend(self.run(g)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(CheckReport::judge(1e-7, 1e-6, 0.0));
        assert!(CheckReport::judge(1.5e-6, 1e-6, 6e-7));
        assert!(!CheckReport::judge(2e-6, 1e-6, 6e-7));
        // A budget larger than the tolerance certifies nothing.
        assert!(!CheckReport::judge(1e-3, 1e-6, 1e-2));
        assert!(!CheckReport::judge(f64::NAN, 1.0, 0.0));
    }

    #[test]
    fn tolerance_overrides() {
        let mut o = BTreeMap::new();
        o.insert("twist".to_string(), 1e-5);
        let t = Tolerances::new(1e-9, &o).unwrap();
        assert_eq!(t.get("twist"), 1e-5);
        assert_eq!(t.get("tail"), 1e-9);
        o.insert("nonsense".to_string(), 1.0);
        assert!(Tolerances::new(1e-9, &o).is_err());
    }

    #[test]
    fn every_report_has_a_tolerance() {
        let t = Tolerances::new(1e-9, &BTreeMap::new()).unwrap();
        for g in CheckGroup::ALL {
            for n in g.report_names() {
                assert!(t.names().any(|k| k == *n), "{n}");
            }
        }
    }

    #[test]
    fn group_lists_parse() {
        assert_eq!(CheckGroup::parse_list("twist, pairing,twist").unwrap(), vec![CheckGroup::Twist, CheckGroup::Pairing]);
        assert_eq!(CheckGroup::parse_list("all").unwrap().len(), 10);
        assert!(CheckGroup::parse_list("bogus").is_err());
        assert!(CheckGroup::parse_list("").is_err());
    }

    #[test]
    fn report_json_uses_camel_case() {
        let r = CheckReport::new("twist", 1e-9, 1e-7, 1e-10, Instant::now());
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for k in ["checkName", "residual", "tolerance", "tailBudget", "samples", "pass", "runtimeMs"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }
}
