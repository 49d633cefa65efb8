//! Structural identities of the series at arbitrary points, as properties.

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use schottky_lax::config::{make_reference, ReferenceKind, RunConfig, DEFAULT_SEED};
use schottky_lax::liealg::adjoint;
use schottky_lax::phasespace::project_to_zero_level;
use schottky_lax::poincare::{Depth, PoincareSeries};
use schottky_lax::verify::{bracket_defect_with, dybe_terms, RESOLVED_SIGNS};

fn genus2() -> &'static (RunConfig, PoincareSeries) {
    static CELL: OnceLock<(RunConfig, PoincareSeries)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = make_reference(ReferenceKind::Genus2, DEFAULT_SEED).unwrap();
        let series = cfg.series().unwrap();
        (cfg, series)
    })
}

/// A point of the fundamental domain with clearance at least `margin`.
fn domain_point(margin: f64) -> impl Strategy<Value = Complex64> {
    (-4.5f64..4.5, -3.0f64..3.0)
        .prop_map(|(x, y)| Complex64::new(x, y))
        .prop_filter("outside every disc", move |&z| genus2().0.schottky.clearance(z) > margin)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn twist_holds_on_every_circle(theta in 0.0f64..std::f64::consts::TAU, i in 0usize..2) {
        let (cfg, series) = genus2();
        let pair = &cfg.schottky.pairs[i];
        let z = pair.inner.point_at(theta);
        let gz = pair.gamma.apply_finite(z).unwrap();
        let lhs = series.xi(gz).unwrap().value * pair.gamma.derivative(z).unwrap();
        let rhs = adjoint(&cfg.phase.g[i], &series.xi(z).unwrap().value).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-7);
    }

    #[test]
    fn s_is_r_with_factors_exchanged(z in domain_point(0.1), w in domain_point(0.1), len in 0usize..6) {
        prop_assume!((z - w).norm() > 0.05);
        let (_, series) = genus2();
        let r = series.r_matrix_with(w, z, Depth::Fixed(len)).unwrap();
        let s = series.s_matrix_with(z, w, Depth::Fixed(len)).unwrap();
        prop_assert!((&r.value.swap() + &s.value).norm() <= 1e-12);
    }

    #[test]
    fn bracket_defect_decays_with_word_length(z in domain_point(0.1), w in domain_point(0.1), len in 1usize..4) {
        prop_assume!((z - w).norm() > 0.05);
        let (_, series) = genus2();
        let d = bracket_defect_with(series, z, w, Depth::Fixed(len)).unwrap();
        // The defect is quadratic in truncation error, never zero, but it
        // must shrink by orders of magnitude from L to L + 4.
        let deeper = bracket_defect_with(series, z, w, Depth::Fixed(len + 4)).unwrap();
        prop_assert!(deeper.defect.norm() < 0.05 * d.defect.norm().max(1e-12) || deeper.defect.norm() < 1e-9);
    }

    #[test]
    fn basepoint_drops_out_on_the_zero_level(z in domain_point(0.2), a in domain_point(0.2), b in domain_point(0.2)) {
        prop_assume!((z - a).norm() > 0.1 && (z - b).norm() > 0.1);
        let (_, series) = genus2();
        let level = series.at_phase(project_to_zero_level(series.algebra(), series.phase()).unwrap()).unwrap();
        let gap = (level.xi_based_at(z, a).unwrap().value - level.xi_based_at(z, b).unwrap().value).norm();
        prop_assert!(gap < 1e-7, "gap {gap:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn yang_baxter_holds_at_random_triples(z1 in domain_point(0.15), z2 in domain_point(0.15), z3 in domain_point(0.15)) {
        prop_assume!((z1 - z2).norm() > 0.1 && (z2 - z3).norm() > 0.1 && (z1 - z3).norm() > 0.1);
        let (_, series) = genus2();
        let t = dybe_terms(series, [z1, z2, z3], Depth::Adaptive).unwrap();
        prop_assert!(t.residual(&RESOLVED_SIGNS) <= 1e-5 + t.tail_budget);
    }
}
