//! Twist equivariance: ξ(γz)·γ'(z) = g_γ ξ(z) g_γ⁻¹ on each generator circle.

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::liealg::adjoint;

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus2, DEFAULT_SEED)?;
    let series = cfg.series()?;
    for (i, pair) in cfg.schottky.pairs.iter().enumerate() {
        let mut worst = 0.0f64;
        for k in 0..8 {
            let z = pair.inner.point_at(k as f64 * std::f64::consts::TAU / 8.0);
            let gz = pair.gamma.apply_finite(z)?;
            let lhs = series.xi(gz)?.value * pair.gamma.derivative(z)?;
            let rhs = adjoint(&cfg.phase.g[i], &series.xi(z)?.value)?;
            worst = worst.max((lhs - rhs).norm());
        }
        println!("generator {}: max residual over 8 circle points {worst:.2e}", i + 1);
    }
    Ok(())
}
