//! On the zero level of the moment map the Lax form does not depend on the
//! basepoint z0; off it, the z0-derivative is an explicit series.

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::phasespace::{moment_map, project_to_zero_level};
use schottky_lax::Complex64;

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus2, DEFAULT_SEED)?;
    let series = cfg.series()?;
    println!("moment map at the reference point: {:.3e}", moment_map(series.phase())?.norm());
    let level = project_to_zero_level(series.algebra(), series.phase())?;
    let on_level = series.at_phase(level)?;
    println!("after projection: {:.1e}", moment_map(on_level.phase())?.norm());

    let z = Complex64::new(0.1, 0.6);
    let (a, b) = (Complex64::new(-0.2, -0.5), Complex64::new(0.3, -0.55));
    let gap = |s: &schottky_lax::poincare::PoincareSeries| -> schottky_lax::Result<f64> {
        Ok((s.xi_based_at(z, a)?.value - s.xi_based_at(z, b)?.value).norm())
    };
    println!("‖ξ_a(z) − ξ_b(z)‖ off the level {:.3e}, on the level {:.1e}", gap(&series)?, gap(&on_level)?);

    let h = 1e-4;
    let fd = (series.xi_based_at(z, a + h)?.value - series.xi_based_at(z, a - h)?.value) / Complex64::new(2.0 * h, 0.0);
    let an = series.basepoint_derivative(z, a)?.value;
    println!("∂ξ/∂z0: analytic vs central difference {:.1e}", (fd - an).norm());
    Ok(())
}
