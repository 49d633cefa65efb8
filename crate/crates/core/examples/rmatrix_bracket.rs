//! The bracket of two Lax matrices is a commutator with the r- and s-kernels:
//! {ξ(z) ⊗ ξ(w)} = [r(z,w), 1 ⊗ ξ(w)] + [s(z,w), ξ(z) ⊗ 1].

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::poincare::Depth;
use schottky_lax::verify::{bracket_defect, Sampler};

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus1, DEFAULT_SEED)?;
    let series = cfg.series()?;
    let mut sampler = Sampler::new(&cfg.schottky, 3, 0);
    for _ in 0..4 {
        let (z, w) = sampler.pair();
        let d = bracket_defect(&series, z, w)?;
        println!(
            "z = {z:.3}, w = {w:.3}: ‖bracket‖ {:.3e}, ‖defect‖ {:.2e} (tail budget {:.1e}, L = {})",
            d.bracket.norm(),
            d.defect.norm(),
            d.tail_budget,
            d.word_length
        );
        // s(z,w) is r(w,z) with its tensor factors exchanged and negated.
        let r = series.r_matrix(w, z)?;
        let s = series.s_matrix_with(z, w, Depth::Fixed(r.word_length()))?;
        println!("  antisymmetry ‖r(w,z)²¹ + s(z,w)‖ = {:.1e}", (&r.value.swap() + &s.value).norm());
    }
    Ok(())
}
