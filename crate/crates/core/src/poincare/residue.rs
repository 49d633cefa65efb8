use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liealg::CMatrix;
use crate::moebius::{Circle, SchottkyData};
use crate::quadrature::{contour_integral, ContourSpec, Quadrature, QuadratureOptions, QuadValue};

/// `(1/2πi)∮_{Γ_i} f(z) dz` over the `i`-th inner circle, counterclockwise.
pub fn residue_at_circle<T: QuadValue>(
    s: &SchottkyData,
    i: usize,
    nodes: usize,
    opts: QuadratureOptions,
    f: impl FnMut(Complex64) -> Result<T>,
) -> Result<Quadrature<T>> {
    let pair = s.pairs.get(i).ok_or(Error::IndexOutOfRange { index: i, len: s.genus() })?;
    contour_integral(&ContourSpec::new(pair.inner, nodes)?, opts, f)
}

/// `−(1/2πi)∮_{|z−c|=R} f(z) dz` on a circle enclosing every disc.
pub fn residue_at_infinity(
    s: &SchottkyData,
    radius: f64,
    nodes: usize,
    opts: QuadratureOptions,
    f: impl FnMut(Complex64) -> Result<CMatrix>,
) -> Result<Quadrature<CMatrix>> {
    let reach = s.circles().map(|c| c.center.norm() + c.radius).fold(0.0, f64::max);
    if radius <= reach {
        return Err(Error::InvalidInput(format!("radius {radius} does not enclose all discs (need > {reach})")));
    }
    let c = ContourSpec::new(Circle::new(Complex64::new(0.0, 0.0), radius), nodes)?.reversed();
    contour_integral(&c, opts, f)
}
