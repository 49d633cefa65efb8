//! The Poisson bracket of `T*G^l` and the observables it acts on.

use num_complex::Complex64;

use super::PhasePoint;
use crate::error::{Error, Result};
use crate::liealg::{commutator, elementary, trace_pairing, AlgebraSpec, CMatrix};

/// A function on phase space, optionally with analytic derivatives.
///
/// `g_derivative(p, i, x)` is `d/dt F(…, g_i·exp(t x), …)` at `t = 0`.
/// `xi_gradient(p, i)` is the matrix `B` with `dF = tr(δξ_i·B)`.
pub trait Observable {
    fn value(&self, p: &PhasePoint) -> Result<Complex64>;

    fn g_derivative(&self, _p: &PhasePoint, _i: usize, _x: &CMatrix) -> Result<Complex64> {
        Err(Error::DerivativeUnavailable)
    }

    fn xi_gradient(&self, _p: &PhasePoint, _i: usize) -> Result<CMatrix> {
        Err(Error::DerivativeUnavailable)
    }
}

/// `{F,H} = Σ_i [∂_{B_H}F − ∂_{B_F}H − tr(ξ_i [B_F, B_H])]` with
/// `B = xi_gradient` projected onto the algebra and `∂_x` the
/// left-invariant derivative on factor `i`.
///
/// With this sign `{g_i^{(1)}, ξ_i^{(2)}} = g_i^{(1)}P` and
/// `{ξ_i^{(1)}, ξ_i^{(2)}} = −[P, ξ_i^{(1)}]`; the relative sign is forced by
/// the Jacobi identity.
pub fn poisson_bracket(spec: &AlgebraSpec, f: &dyn Observable, h: &dyn Observable, p: &PhasePoint) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..p.genus() {
        let bf = spec.project(&f.xi_gradient(p, i)?);
        let bh = spec.project(&h.xi_gradient(p, i)?);
        total += f.g_derivative(p, i, &bh)?;
        total -= h.g_derivative(p, i, &bf)?;
        total -= trace_pairing(&p.xi[i], &commutator(&bf, &bh));
    }
    Ok(total)
}

/// Coordinate derivatives of `F` at `p` by central differences.
struct FdDerivatives {
    /// `[i][α]`: derivative along `g_i ↦ g_i·exp(t e_α)`.
    g: Vec<Vec<Complex64>>,
    /// `[i][α]`: derivative along `ξ_i ↦ ξ_i + t e_α`.
    xi: Vec<Vec<Complex64>>,
}

fn fd_derivatives(spec: &AlgebraSpec, f: &dyn Observable, p: &PhasePoint, step: f64) -> Result<FdDerivatives> {
    let mut g = Vec::new();
    let mut xi = Vec::new();
    for i in 0..p.genus() {
        let mut gi = Vec::new();
        let mut xii = Vec::new();
        for e in spec.basis() {
            let fp = f.value(&p.translate_g(i, e, step))?;
            let fm = f.value(&p.translate_g(i, e, -step))?;
            gi.push((fp - fm) / (2.0 * step));
            let fp = f.value(&p.shift_xi(i, e, step))?;
            let fm = f.value(&p.shift_xi(i, e, -step))?;
            xii.push((fp - fm) / (2.0 * step));
        }
        g.push(gi);
        xi.push(xii);
    }
    Ok(FdDerivatives { g, xi })
}

/// The same bracket with every derivative replaced by a central difference.
pub fn poisson_bracket_fd(spec: &AlgebraSpec, f: &dyn Observable, h: &dyn Observable, p: &PhasePoint, step: f64) -> Result<Complex64> {
    if step <= 0.0 {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let df = fd_derivatives(spec, f, p, step)?;
    let dh = fd_derivatives(spec, h, p, step)?;
    Ok(bracket_from_coordinates(spec, p, &df.g, &df.xi, &dh.g, &dh.xi))
}

/// Bracket from basis-direction derivatives: `B = Σ_β xd[β]·e^β` and
/// `∂_{e^β} = Σ_α tr(e^β e^α)·∂_{e_α}`.
pub(crate) fn bracket_from_coordinates(
    spec: &AlgebraSpec,
    p: &PhasePoint,
    gf: &[Vec<Complex64>],
    xf: &[Vec<Complex64>],
    gh: &[Vec<Complex64>],
    xh: &[Vec<Complex64>],
) -> Complex64 {
    let dual = spec.dual_basis();
    let dim = spec.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..p.genus() {
        for b in 0..dim {
            for a in 0..dim {
                let gram = trace_pairing(&dual[b], &dual[a]);
                total += gram * (xh[i][b] * gf[i][a] - xf[i][b] * gh[i][a]);
                let lie = trace_pairing(&p.xi[i], &commutator(&dual[a], &dual[b]));
                total -= lie * xf[i][a] * xh[i][b];
            }
        }
    }
    total
}

/// Entry `(g_i)_{row,col}`.
#[derive(Clone, Copy, Debug)]
pub struct GEntry {
    pub factor: usize,
    pub row: usize,
    pub col: usize,
}

impl Observable for GEntry {
    fn value(&self, p: &PhasePoint) -> Result<Complex64> {
        Ok(p.g[self.factor][(self.row, self.col)])
    }

    fn g_derivative(&self, p: &PhasePoint, i: usize, x: &CMatrix) -> Result<Complex64> {
        if i != self.factor {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok((&p.g[i] * x)[(self.row, self.col)])
    }

    fn xi_gradient(&self, p: &PhasePoint, _i: usize) -> Result<CMatrix> {
        Ok(CMatrix::zeros(p.n(), p.n()))
    }
}

/// `tr(ξ_i·x)`.
#[derive(Clone, Debug)]
pub struct XiPairing {
    pub factor: usize,
    pub x: CMatrix,
}

impl XiPairing {
    /// `(ξ_i)_{row,col} = tr(ξ_i·E_{col,row})`.
    pub fn entry(n: usize, factor: usize, row: usize, col: usize) -> Self {
        XiPairing { factor, x: elementary(n, col, row) }
    }
}

impl Observable for XiPairing {
    fn value(&self, p: &PhasePoint) -> Result<Complex64> {
        Ok(trace_pairing(&p.xi[self.factor], &self.x))
    }

    fn g_derivative(&self, _p: &PhasePoint, _i: usize, _x: &CMatrix) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }

    fn xi_gradient(&self, p: &PhasePoint, i: usize) -> Result<CMatrix> {
        Ok(if i == self.factor { self.x.clone() } else { CMatrix::zeros(p.n(), p.n()) })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Constant(pub Complex64);

impl Observable for Constant {
    fn value(&self, _p: &PhasePoint) -> Result<Complex64> {
        Ok(self.0)
    }

    fn g_derivative(&self, _p: &PhasePoint, _i: usize, _x: &CMatrix) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }

    fn xi_gradient(&self, p: &PhasePoint, _i: usize) -> Result<CMatrix> {
        Ok(CMatrix::zeros(p.n(), p.n()))
    }
}

/// Value and first derivatives of some function, frozen at one phase point.
///
/// `g_dirs[i][α]` is the derivative along `e_α` on factor `i`; any other
/// direction is resolved through the dual basis.
#[derive(Clone, Debug)]
pub struct Tabulated {
    pub point: PhasePoint,
    pub spec: AlgebraSpec,
    pub value: Complex64,
    pub g_dirs: Vec<Vec<Complex64>>,
    pub xi_grad: Vec<CMatrix>,
}

impl Tabulated {
    fn check_point(&self, p: &PhasePoint) -> Result<()> {
        if p != &self.point {
            return Err(Error::InvalidInput("observable is bound to a different phase point".into()));
        }
        Ok(())
    }
}

impl Observable for Tabulated {
    fn value(&self, p: &PhasePoint) -> Result<Complex64> {
        self.check_point(p)?;
        Ok(self.value)
    }

    fn g_derivative(&self, p: &PhasePoint, i: usize, x: &CMatrix) -> Result<Complex64> {
        self.check_point(p)?;
        let dirs = self.g_dirs.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.g_dirs.len() })?;
        Ok(self.spec.coords(x).iter().zip(dirs).map(|(c, d)| c * d).sum())
    }

    fn xi_gradient(&self, p: &PhasePoint, i: usize) -> Result<CMatrix> {
        self.check_point(p)?;
        self.xi_grad.get(i).cloned().ok_or(Error::IndexOutOfRange { index: i, len: self.xi_grad.len() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{expm, Side};
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn point(spec: &AlgebraSpec) -> PhasePoint {
        let m = |s: f64| DMatrix::from_fn(2, 2, |i, j| c((i as f64 + 1.3 * j as f64 + s).sin(), (s * (i + 2 * j) as f64).cos() * 0.5));
        let g = vec![expm(&spec.project(&(m(0.3) * c(0.4, 0.0)))), expm(&spec.project(&(m(1.7) * c(0.3, 0.0))))];
        let xi = vec![spec.project(&m(2.1)), spec.project(&m(-0.6))];
        PhasePoint::new(g, xi)
    }

    #[test]
    fn g_xi_relation_and_fd_agreement() {
        for spec in [AlgebraSpec::gl(2), AlgebraSpec::sl(2)] {
            let p = point(&spec);
            let p_cas = spec.casimir();
            for (ci, e) in spec.basis().iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        let f = GEntry { factor: 0, row: a, col: b };
                        let h = XiPairing { factor: 0, x: e.clone() };
                        let got = poisson_bracket(&spec, &f, &h, &p).unwrap();
                        assert!((got - (&p.g[0] * e)[(a, b)]).norm() < 1e-12, "{ci}");
                        let fd = poisson_bracket_fd(&spec, &f, &h, &p, 1e-5).unwrap();
                        assert!((fd - got).norm() < 1e-5);
                        let other = XiPairing { factor: 1, x: e.clone() };
                        assert_eq!(poisson_bracket(&spec, &f, &other, &p).unwrap(), c(0.0, 0.0));
                    }
                }
            }
            // Tensor form: {g^{(1)}, ξ^{(2)}}_{ab,cd} = (g^{(1)}P)_{ab,cd}.
            let gp = p_cas.left_mul(Side::First, &p.g[0]);
            for a in 0..2 {
                for b in 0..2 {
                    for cc in 0..2 {
                        for d in 0..2 {
                            let f = GEntry { factor: 0, row: a, col: b };
                            let h = XiPairing::entry(2, 0, cc, d);
                            let got = poisson_bracket(&spec, &f, &h, &p).unwrap();
                            if spec.kind() == crate::liealg::AlgebraKind::Gl {
                                assert!((got - gp.get(a, b, cc, d)).norm() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn xi_xi_relation_is_minus_casimir_commutator() {
        let spec = AlgebraSpec::gl(2);
        let p = point(&spec);
        // [P, ξ⊗1]
        let want = spec.casimir().commutator_with(&p.xi[0], Side::First);
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let f = XiPairing::entry(2, 0, a, b);
                        let h = XiPairing::entry(2, 0, cc, d);
                        let got = poisson_bracket(&spec, &f, &h, &p).unwrap();
                        assert!((got + want.get(a, b, cc, d)).norm() < 1e-12);
                        let fd = poisson_bracket_fd(&spec, &f, &h, &p, 1e-5).unwrap();
                        assert!((fd - got).norm() < 1e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn antisymmetry_and_constants_fd() {
        let spec = AlgebraSpec::gl(2);
        let p = point(&spec);
        let f = GEntry { factor: 1, row: 0, col: 1 };
        assert!(poisson_bracket_fd(&spec, &f, &f, &p, 1e-5).unwrap().norm() < 1e-8);
        assert!(poisson_bracket_fd(&spec, &f, &Constant(c(2.0, 1.0)), &p, 1e-5).unwrap().norm() < 1e-8);
        assert!(matches!(poisson_bracket_fd(&spec, &f, &f, &p, 0.0), Err(Error::InvalidInput(_))));
    }

    struct ValueOnly;
    impl Observable for ValueOnly {
        fn value(&self, p: &PhasePoint) -> Result<Complex64> {
            Ok(p.g[0][(0, 0)])
        }
    }

    #[test]
    fn missing_derivatives_are_reported() {
        let spec = AlgebraSpec::gl(2);
        let p = point(&spec);
        let r = poisson_bracket(&spec, &ValueOnly, &Constant(c(1.0, 0.0)), &p);
        assert!(matches!(r, Err(Error::DerivativeUnavailable)));
    }
}
