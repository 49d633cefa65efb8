//! Spectral invariants Poisson-commute: {tr ξ(z)^j, tr ξ(w)^k} = 0.

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::phasespace::{poisson_bracket, XiPairing};
use schottky_lax::verify::Sampler;

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus2, DEFAULT_SEED)?;
    let series = cfg.series()?;
    let spec = series.algebra();
    let phase = series.phase();
    let mut sampler = Sampler::new(&cfg.schottky, 5, 0);
    for _ in 0..3 {
        let (z, w) = sampler.pair();
        let (pz, pw) = (series.point_data(z)?, series.point_data(w)?);
        for (j, k) in [(1, 2), (2, 2)] {
            let v = poisson_bracket(spec, &pz.trace_power(j), &pw.trace_power(k), phase)?;
            println!("z = {z:.3}, w = {w:.3}: {{tr ξ^{j}, tr ξ^{k}}} = {:.2e}", v.norm());
        }
        // Single entries do not commute; only the invariants do.
        let e = poisson_bracket(spec, &pz.entry(0, 1), &pw.entry(1, 0), phase)?;
        println!("  for contrast {{ξ(z)₁₂, ξ(w)₂₁}} = {e:.3e}");
    }
    let a = poisson_bracket(spec, &XiPairing::entry(2, 0, 0, 1), &XiPairing::entry(2, 0, 1, 0), phase)?;
    println!("{{(ξ₁)₁₂, (ξ₁)₂₁}} = {a:.4}");
    Ok(())
}
