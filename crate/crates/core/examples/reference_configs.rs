//! Generate the seeded reference configurations and screen them.
//!
//! `cargo run --example reference_configs [seed]`

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::moebius::validate;

fn main() -> schottky_lax::Result<()> {
    let seed = std::env::args().nth(1).map_or(DEFAULT_SEED, |s| s.parse().expect("seed is an integer"));
    for kind in [ReferenceKind::Genus1, ReferenceKind::Genus2] {
        let cfg = make_reference(kind, seed)?;
        println!("{kind:?} (seed {seed}): genus {}, κ = {:.4}", cfg.genus(), cfg.kappa()?);
        for (i, pair) in cfg.schottky.pairs.iter().enumerate() {
            println!(
                "  γ{}: multiplier {:.4}, inner disc {:.4} r {:.4}, outer disc {:.4} r {:.4}",
                i + 1,
                pair.gamma.multiplier()?,
                pair.inner.center,
                pair.inner.radius,
                pair.outer.center,
                pair.outer.radius
            );
        }
        for check in validate(&cfg.schottky).checks {
            let margin = check.margin.map_or(String::new(), |m| format!(" (margin {m:.3e})"));
            println!("  {:<18} {}{margin}", check.name, if check.pass { "ok" } else { "FAILED" });
        }
        println!("  {} bytes of JSON", cfg.to_json()?.len());
    }
    Ok(())
}
