//! Loxodromic generators, reduced words and the maps they spell.

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::moebius::{enumerate_words, word_count, word_to_map, Point};
use schottky_lax::Complex64;

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus2, DEFAULT_SEED)?;
    let s = &cfg.schottky;
    for (i, pair) in s.pairs.iter().enumerate() {
        let (attracting, repelling) = pair.gamma.fixed_points()?;
        let show = |p: Point| p.finite().map_or("∞".to_string(), |z| format!("{z:.4}"));
        println!("γ{}: trace {:.4}, fixed points {} / {}", i + 1, pair.gamma.trace(), show(attracting), show(repelling));
    }

    // Reduced words of length ≤ L number 1 + 2l·((2l−1)^L − 1)/(2l − 2).
    for len in 0..=4 {
        let words = enumerate_words(s.genus(), len, 1 << 20)?;
        assert_eq!(words.len() as u128, word_count(s.genus(), len));
        println!("words of length ≤ {len}: {}", words.len());
    }

    // A word pushes a point outside every disc into the disc of its first letter.
    let z = Complex64::new(0.05, 0.4);
    println!("clearance of z = {z}: {:.3}", s.clearance(z));
    for w in enumerate_words(s.genus(), 2, 1 << 10)?.iter().filter(|w| w.len() == 2).take(6) {
        let gz = word_to_map(w, s)?.apply_finite(z)?;
        let letters: Vec<String> = w.letters().iter().map(|l| format!("{}{}", l.generator + 1, if l.inverse { "⁻" } else { "" })).collect();
        println!("  γ[{}] z = {gz:.4}", letters.join(" "));
    }
    Ok(())
}
