//! The dynamical Yang-Baxter combination: every sign choice, the decay with
//! word length, and the Jacobi identity of the Lax bracket as a cross-check.

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::poincare::Depth;
use schottky_lax::verify::{all_patterns, dybe_terms, jacobi_defect, pattern_name, Sampler, RESOLVED_SIGNS, ALL_PLUS_SIGNS};

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus1, DEFAULT_SEED)?;
    let series = cfg.series()?;
    let z = Sampler::new(&cfg.schottky, 11, 0).triple();
    let terms = dybe_terms(&series, z, Depth::Adaptive)?;
    println!("triple {:.3}, {:.3}, {:.3}; word length {}, tail budget {:.1e}", z[0], z[1], z[2], terms.word_length, terms.tail_budget);
    let mut ranked: Vec<_> = all_patterns().into_iter().map(|p| (terms.residual(&p), p)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (r, p) in ranked.iter().take(4) {
        println!("  signs {}: residual {r:.2e}", pattern_name(p));
    }
    println!("  all plus {}: residual {:.3}", pattern_name(&ALL_PLUS_SIGNS), terms.residual(&ALL_PLUS_SIGNS));

    for len in 1..=8 {
        let r = dybe_terms(&series, z, Depth::Fixed(len))?.residual(&RESOLVED_SIGNS);
        println!("L = {len}: residual {r:.3e}");
    }
    let (jacobi, scale) = jacobi_defect(&series, z, Depth::Fixed(3))?;
    println!("Jacobi defect {jacobi:.2e} against terms of size {scale:.2e}");
    Ok(())
}
