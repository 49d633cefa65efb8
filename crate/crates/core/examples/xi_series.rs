//! Evaluate the Lax form ξ(z) as a Poincaré series and watch its shells decay.

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::poincare::Depth;
use schottky_lax::Complex64;

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus1, DEFAULT_SEED)?;
    let series = cfg.series()?;
    let z = Complex64::new(0.1, 0.5);

    let v = series.xi(z)?;
    println!("ξ({z}) =\n{:.6}", v.value);
    println!("κ = {:.4}, measured shell ratio {:.4}", series.kappa(), v.measured_ratio);
    println!("word length {}, tail estimate {:.2e}, converged {}", v.word_length(), v.tail_estimate, v.converged);
    for (len, norm) in v.shell_norms.iter().enumerate() {
        println!("  shell {len:>2}: {norm:.3e}");
    }

    // Fixed truncations approach the adaptive value geometrically.
    for len in [2, 4, 6, 8] {
        let fixed = series.xi_with(z, Depth::Fixed(len))?;
        println!("L = {len}: ‖ξ_L − ξ‖ = {:.3e}", (&fixed.value - &v.value).norm());
    }
    println!("tr ξ(z)² = {:.6}", series.spectral_invariant(z, 2)?.value);
    Ok(())
}
