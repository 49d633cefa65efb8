//! Möbius maps in SL(2,C), Schottky data, and reduced words in the free group.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_util;

const DET_FLOOR: f64 = 1e-14;
const LOXODROMIC_TOL: f64 = 1e-10;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

/// `z ↦ (a z + b)/(c z + d)` with `ad − bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMoebius", into = "RawMoebius")]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawMoebius {
    #[serde(with = "serde_util::complex")]
    a: Complex64,
    #[serde(with = "serde_util::complex")]
    b: Complex64,
    #[serde(with = "serde_util::complex")]
    c: Complex64,
    #[serde(with = "serde_util::complex")]
    d: Complex64,
}

impl TryFrom<RawMoebius> for MoebiusMap {
    type Error = Error;
    fn try_from(r: RawMoebius) -> Result<Self> {
        MoebiusMap::new(r.a, r.b, r.c, r.d)
    }
}

impl From<MoebiusMap> for RawMoebius {
    fn from(m: MoebiusMap) -> Self {
        RawMoebius { a: m.a, b: m.b, c: m.c, d: m.d }
    }
}

impl MoebiusMap {
    /// Builds the map and rescales it to determinant one. Entries already
    /// normalised to rounding are kept bit for bit, so serialisation
    /// round-trips exactly.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !det.is_finite() || det.norm() <= DET_FLOOR * scale * scale || scale == 0.0 {
            return Err(Error::DegenerateMap { det });
        }
        if (det - 1.0).norm() <= 1e-13 * scale * scale {
            return Ok(MoebiusMap { a, b, c, d });
        }
        let s = det.sqrt();
        Ok(MoebiusMap { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MoebiusMap { a: one, b: zero, c: zero, d: one }
    }

    /// Map with attracting fixed point `attracting`, repelling fixed point
    /// `repelling` and multiplier `q` (`0 < |q| < 1`).
    pub fn loxodromic(attracting: Complex64, repelling: Complex64, q: Complex64) -> Result<Self> {
        if !(q.norm() > 0.0 && q.norm() < 1.0) {
            return Err(Error::NotLoxodromic { modulus: q.norm() });
        }
        let lam = q.sqrt();
        let one = Complex64::new(1.0, 0.0);
        // h sends 0 to the attracting point and ∞ to the repelling one.
        let h = MoebiusMap::new(repelling, attracting, one, one)?;
        let diag = MoebiusMap::new(lam, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), one / lam)?;
        Ok(diag.conjugate_by(&h))
    }

    pub fn apply(&self, p: Point) -> Point {
        match p {
            Point::Infinity => {
                if self.c == Complex64::new(0.0, 0.0) {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.c)
                }
            }
            Point::Finite(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::new(0.0, 0.0) {
                    Point::Infinity
                } else {
                    Point::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Image of a finite point that must not be the pole.
    pub fn apply_finite(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        let w = (self.a * z + self.b) / den;
        if den == Complex64::new(0.0, 0.0) || !w.is_finite() {
            return Err(Error::PoleAtZ { z });
        }
        Ok(w)
    }

    /// `γ'(z) = (c z + d)^{-2}`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        let v = (den * den).inv();
        if den == Complex64::new(0.0, 0.0) || !v.is_finite() {
            return Err(Error::PoleAtZ { z });
        }
        Ok(v)
    }

    /// Image and derivative without pole checks, for inner loops.
    #[inline]
    pub(crate) fn apply_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let inv = (self.c * z + self.d).inv();
        ((self.a * z + self.b) * inv, inv * inv)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `h ∘ self ∘ h⁻¹`.
    pub fn conjugate_by(&self, h: &MoebiusMap) -> MoebiusMap {
        h.compose(self).compose(&h.inverse())
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Centre of the isometric circle, `γ⁻¹(∞) = −d/c`.
    pub fn pole(&self) -> Point {
        self.inverse().apply(Point::Infinity)
    }

    /// Eigenvalues `(μ_large, μ_small)` of the matrix, `|μ_large| ≥ |μ_small|`.
    fn eigenvalues(&self) -> Result<(Complex64, Complex64)> {
        let t = self.trace();
        let disc = t * t - 4.0;
        if disc.norm() <= 1e-12 {
            return Err(Error::ParabolicOrIdentity { trace_sq: t * t });
        }
        let s = disc.sqrt();
        let (m1, m2) = ((t + s) / 2.0, (t - s) / 2.0);
        let (big, small) = if m1.norm() >= m2.norm() { (m1, m2) } else { (m2, m1) };
        // Recompute the small root from the product to avoid cancellation.
        let small = if big.norm() > 0.0 { big.inv() } else { small };
        if (small / big).norm() >= 1.0 - LOXODROMIC_TOL {
            return Err(Error::NotLoxodromic { modulus: (small / big).norm() });
        }
        Ok((big, small))
    }

    /// Fixed point belonging to eigenvalue `mu` (where `c z + d = mu`).
    fn fixed_point_for(&self, mu: Complex64) -> Point {
        let den_b = mu - self.a;
        if self.c.norm() >= den_b.norm() {
            if self.c == Complex64::new(0.0, 0.0) {
                return Point::Infinity;
            }
            Point::Finite((mu - self.d) / self.c)
        } else {
            Point::Finite(self.b / den_b)
        }
    }

    /// `(attracting, repelling)` fixed points.
    pub fn fixed_points(&self) -> Result<(Point, Point)> {
        let (big, small) = self.eigenvalues()?;
        Ok((self.fixed_point_for(big), self.fixed_point_for(small)))
    }

    /// Derivative at the attracting fixed point, `μ_small / μ_large`.
    pub fn multiplier(&self) -> Result<Complex64> {
        let (big, small) = self.eigenvalues()?;
        Ok(small / big)
    }
}

/// Closed disc boundary in the finite plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    #[serde(with = "serde_util::complex")]
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Circle { center, radius }
    }

    /// Signed distance from `z` to the circle, positive outside the disc.
    pub fn clearance(&self, z: Complex64) -> f64 {
        (z - self.center).norm() - self.radius
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.clearance(z) <= 0.0
    }

    pub fn point_at(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }

    /// Isometric circle of `m`: centre `m⁻¹(∞)`, radius `1/|c|`.
    pub fn isometric(m: &MoebiusMap) -> Result<Self> {
        match m.pole() {
            Point::Finite(center) => Ok(Circle { center, radius: 1.0 / m.c.norm() }),
            Point::Infinity => Err(Error::InvalidInput("affine map has no isometric circle".into())),
        }
    }
}

/// One generator with the circle it maps from (`inner`) and onto (`outer`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchottkyPair {
    pub gamma: MoebiusMap,
    pub inner: Circle,
    pub outer: Circle,
}

impl SchottkyPair {
    /// Pairs a generator with its two isometric circles.
    pub fn from_generator(gamma: MoebiusMap) -> Result<Self> {
        Ok(SchottkyPair {
            gamma,
            inner: Circle::isometric(&gamma)?,
            outer: Circle::isometric(&gamma.inverse())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchottkyData {
    pub pairs: Vec<SchottkyPair>,
}

impl SchottkyData {
    pub fn genus(&self) -> usize {
        self.pairs.len()
    }

    pub fn generator(&self, i: usize) -> Result<&MoebiusMap> {
        self.pairs
            .get(i)
            .map(|p| &p.gamma)
            .ok_or(Error::IndexOutOfRange { index: i, len: self.pairs.len() })
    }

    /// All `2l` discs: inner circles first, then outer circles.
    pub fn circles(&self) -> impl Iterator<Item = &Circle> {
        self.pairs.iter().map(|p| &p.inner).chain(self.pairs.iter().map(|p| &p.outer))
    }

    /// Smallest signed distance from `z` to any disc.
    pub fn clearance(&self, z: Complex64) -> f64 {
        self.circles().map(|c| c.clearance(z)).fold(f64::INFINITY, f64::min)
    }

    pub fn min_radius(&self) -> f64 {
        self.circles().map(|c| c.radius).fold(f64::INFINITY, f64::min)
    }

    /// Default geometric margin used by [`validate`].
    pub fn default_margin(&self) -> f64 {
        1e-6 * self.min_radius()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub pass: bool,
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks disjointness, pairing and loxodromy with the default margin.
pub fn validate(s: &SchottkyData) -> ValidationReport {
    validate_with_margin(s, s.default_margin())
}

pub fn validate_with_margin(s: &SchottkyData, margin: f64) -> ValidationReport {
    let mut checks = Vec::new();
    let l = s.genus();
    checks.push(ValidationCheck {
        name: "generators".into(),
        pass: l >= 1,
        margin: None,
        detail: format!("{l} generator(s)"),
    });

    let discs: Vec<Circle> = s.circles().copied().collect();
    let mut gap = f64::INFINITY;
    let mut worst = String::new();
    for (i, c1) in discs.iter().enumerate() {
        if !(c1.radius > 0.0 && c1.radius.is_finite()) {
            gap = f64::NEG_INFINITY;
            worst = format!("disc {i} has radius {}", c1.radius);
        }
        for (j, c2) in discs.iter().enumerate().skip(i + 1) {
            let g = (c1.center - c2.center).norm() - c1.radius - c2.radius;
            if g < gap {
                gap = g;
                worst = format!("discs {i} and {j}");
            }
        }
    }
    checks.push(ValidationCheck {
        name: "disjoint".into(),
        pass: gap >= margin,
        margin: gap.is_finite().then_some(gap),
        detail: format!("closest pair: {worst}"),
    });

    // Discs are bounded, so ∞ is never inside one.
    checks.push(ValidationCheck {
        name: "infinity-outside".into(),
        pass: discs.iter().all(|c| c.radius.is_finite()),
        margin: None,
        detail: "all discs are bounded".into(),
    });

    let mut lox_margin = f64::INFINITY;
    let mut lox_detail = String::from("all generators loxodromic");
    for (i, p) in s.pairs.iter().enumerate() {
        match p.gamma.multiplier() {
            Ok(q) => lox_margin = lox_margin.min(1.0 - q.norm()),
            Err(e) => {
                lox_margin = f64::NEG_INFINITY;
                lox_detail = format!("generator {}: {e}", i + 1);
            }
        }
    }
    checks.push(ValidationCheck {
        name: "loxodromic".into(),
        pass: lox_margin > 0.0,
        margin: lox_margin.is_finite().then_some(lox_margin),
        detail: lox_detail,
    });

    let mut pair_res: f64 = 0.0;
    let mut pole_margin = f64::INFINITY;
    for p in &s.pairs {
        for k in 0..64 {
            let z = p.inner.point_at(std::f64::consts::TAU * k as f64 / 64.0);
            let r = match p.gamma.apply(Point::Finite(z)) {
                Point::Finite(w) => ((w - p.outer.center).norm() - p.outer.radius).abs() / p.outer.radius.max(1.0),
                Point::Infinity => f64::INFINITY,
            };
            pair_res = pair_res.max(r);
        }
        pole_margin = pole_margin.min(match p.gamma.pole() {
            Point::Finite(c) => -p.inner.clearance(c),
            Point::Infinity => f64::NEG_INFINITY,
        });
    }
    checks.push(ValidationCheck {
        name: "pairing".into(),
        pass: pair_res <= 1e-9,
        margin: pair_res.is_finite().then_some(1e-9 - pair_res),
        detail: format!("max circle-image residual {pair_res:.3e}"),
    });
    checks.push(ValidationCheck {
        name: "pole-inside".into(),
        pass: pole_margin > 0.0,
        margin: pole_margin.is_finite().then_some(pole_margin),
        detail: "each generator's pole lies inside its inner disc".into(),
    });

    ValidationReport { checks }
}

/// `γ_i` or `γ_i⁻¹`, with `generator` counted from zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    /// Dense index `2·generator + inverse`.
    pub fn index(self) -> usize {
        2 * self.generator + self.inverse as usize
    }

    pub fn from_index(k: usize) -> Self {
        Letter { generator: k / 2, inverse: k % 2 == 1 }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    /// The `2l` letters in enumeration order: `γ_1, γ_1⁻¹, γ_2, …`.
    pub fn all(l: usize) -> impl Iterator<Item = Letter> {
        (0..2 * l).map(Letter::from_index)
    }

    pub fn map(self, s: &SchottkyData) -> Result<MoebiusMap> {
        let g = s.generator(self.generator)?;
        Ok(if self.inverse { g.inverse() } else { *g })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "g{}^-1", self.generator + 1)
        } else {
            write!(f, "g{}", self.generator + 1)
        }
    }
}

/// Reduced word `x_1 x_2 … x_p`, read as the product `γ_{x_1} ∘ … ∘ γ_{x_p}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        for (k, w) in letters.windows(2).enumerate() {
            if w[1] == w[0].inv() {
                return Err(Error::NonReducedWord { position: k + 1 });
            }
        }
        Ok(Word { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.letters.clone();
        for &x in &other.letters {
            if out.last() == Some(&x.inv()) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Word { letters: out }
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|x| x.inv()).collect() }
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (k, x) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Number of reduced words of length at most `max_len` in `l` generators.
pub fn word_count(l: usize, max_len: usize) -> u128 {
    if l == 0 {
        return 1;
    }
    let mut total: u128 = 1;
    let mut shell: u128 = 2 * l as u128;
    for _ in 0..max_len {
        total = total.saturating_add(shell);
        shell = shell.saturating_mul(2 * l as u128 - 1);
    }
    total
}

/// All reduced words up to `max_len`, grouped by length, each shell in
/// lexicographic order of letter indices.
pub fn enumerate_words(l: usize, max_len: usize, capacity: usize) -> Result<Vec<Word>> {
    let needed = word_count(l, max_len);
    if needed > capacity as u128 {
        return Err(Error::CapacityExceeded { needed, capacity });
    }
    let mut out = vec![Word::identity()];
    let mut shell_start = 0;
    for _ in 0..max_len {
        let shell_end = out.len();
        for k in shell_start..shell_end {
            for x in Letter::all(l) {
                if out[k].last() == Some(x.inv()) {
                    continue;
                }
                let mut letters = out[k].letters.clone();
                letters.push(x);
                out.push(Word { letters });
            }
        }
        shell_start = shell_end;
    }
    Ok(out)
}

pub fn word_to_map(w: &Word, s: &SchottkyData) -> Result<MoebiusMap> {
    let mut m = MoebiusMap::identity();
    for &x in w.letters() {
        m = m.compose(&x.map(s)?);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn genus1() -> SchottkyData {
        let g = MoebiusMap::loxodromic(c(1.0, 0.0), c(-1.0, 0.0), c(0.16, 0.0)).unwrap();
        SchottkyData { pairs: vec![SchottkyPair::from_generator(g).unwrap()] }
    }

    #[test]
    fn diagonal_map_fixed_points_and_multiplier() {
        let m = MoebiusMap::new(c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        let (att, rep) = m.fixed_points().unwrap();
        assert_eq!(att, Point::Finite(c(0.0, 0.0)));
        assert_eq!(rep, Point::Infinity);
        assert!((m.multiplier().unwrap() - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normalisation_rescales_determinant() {
        let m = MoebiusMap::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!((m.a * m.d - m.b * m.c - 1.0).norm() < 1e-15);
        assert!(MoebiusMap::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn parabolic_and_elliptic_rejected() {
        let par = MoebiusMap::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(par.multiplier(), Err(Error::ParabolicOrIdentity { .. })));
        let th: f64 = 0.3;
        let ell = MoebiusMap::new(c(th.cos(), 0.0), c(-th.sin(), 0.0), c(th.sin(), 0.0), c(th.cos(), 0.0)).unwrap();
        assert!(matches!(ell.multiplier(), Err(Error::NotLoxodromic { .. })));
    }

    #[test]
    fn pole_is_an_error() {
        let m = MoebiusMap::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(matches!(m.apply_finite(c(0.0, 0.0)), Err(Error::PoleAtZ { .. })));
        assert_eq!(m.apply(Point::Finite(c(0.0, 0.0))), Point::Infinity);
    }

    #[test]
    fn loxodromic_constructor_round_trips() {
        let m = MoebiusMap::loxodromic(c(1.0, 0.5), c(-2.0, 0.1), c(0.1, 0.05)).unwrap();
        let (att, rep) = m.fixed_points().unwrap();
        assert!((att.finite().unwrap() - c(1.0, 0.5)).norm() < 1e-12);
        assert!((rep.finite().unwrap() - c(-2.0, 0.1)).norm() < 1e-12);
        assert!((m.multiplier().unwrap() - c(0.1, 0.05)).norm() < 1e-12);
        assert!((m.derivative(att.finite().unwrap()).unwrap() - c(0.1, 0.05)).norm() < 1e-12);
    }

    #[test]
    fn genus1_words() {
        let words = enumerate_words(1, 2, 100).unwrap();
        let shown: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, ["e", "g1", "g1^-1", "g1 g1", "g1^-1 g1^-1"]);
        let s = genus1();
        let m = word_to_map(&words[4], &s).unwrap();
        let g = s.pairs[0].gamma;
        let want = g.inverse().compose(&g.inverse());
        assert!((m.a - want.a).norm() + (m.c - want.c).norm() < 1e-14);
    }

    #[test]
    fn word_counts_and_capacity() {
        assert_eq!(word_count(2, 3), 1 + 4 + 12 + 36);
        assert_eq!(enumerate_words(2, 3, 1000).unwrap().len(), 53);
        assert!(matches!(enumerate_words(2, 3, 52), Err(Error::CapacityExceeded { needed: 53, .. })));
        assert_eq!(enumerate_words(3, 0, 1).unwrap(), vec![Word::identity()]);
    }

    #[test]
    fn non_reduced_word_rejected() {
        let x = Letter::new(0, false);
        assert!(matches!(Word::new(vec![x, x.inv()]), Err(Error::NonReducedWord { position: 1 })));
    }

    #[test]
    fn validation_flags_overlap() {
        let s = genus1();
        assert!(validate(&s).passed());
        let mut bad = s.clone();
        bad.pairs[0].outer.center = bad.pairs[0].inner.center + 0.1;
        let rep = validate(&bad);
        assert!(!rep.passed());
        assert!(!rep.checks.iter().find(|c| c.name == "disjoint").unwrap().pass);
    }

    #[test]
    fn isometric_circles_are_paired() {
        let s = genus1();
        let p = &s.pairs[0];
        for k in 0..16 {
            let z = p.inner.point_at(k as f64 * 0.4);
            let w = p.gamma.apply_finite(z).unwrap();
            assert!((p.outer.clearance(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_normalises() {
        let json = r#"{"a":[2,0],"b":[0,0],"c":[0,0],"d":[2,0]}"#;
        let m: MoebiusMap = serde_json::from_str(json).unwrap();
        assert!((m.a - c(1.0, 0.0)).norm() < 1e-15);
        let back: MoebiusMap = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
    }

    fn arb_map() -> impl Strategy<Value = MoebiusMap> {
        prop::array::uniform8(-2.0f64..2.0).prop_filter_map("degenerate", |v| {
            MoebiusMap::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])).ok()
        })
    }

    proptest! {
        #[test]
        fn word_map_is_a_homomorphism(a in prop::collection::vec(0usize..4, 0..5),
                                      b in prop::collection::vec(0usize..4, 0..5)) {
            let s = SchottkyData { pairs: vec![
                SchottkyPair::from_generator(MoebiusMap::loxodromic(c(1.0,0.0), c(2.2,0.0), c(0.1,0.0)).unwrap()).unwrap(),
                SchottkyPair::from_generator(MoebiusMap::loxodromic(c(-1.0,0.0), c(-2.2,0.0), c(0.12,0.0)).unwrap()).unwrap(),
            ]};
            let mk = |v: &Vec<usize>| Word::identity().concat(&Word { letters: v.iter().map(|&k| Letter::from_index(k)).collect() });
            let (u, v) = (mk(&a), mk(&b));
            let lhs = word_to_map(&u.concat(&v), &s).unwrap();
            let rhs = word_to_map(&u, &s).unwrap().compose(&word_to_map(&v, &s).unwrap());
            let z = c(0.3, 1.7);
            let (x, y) = (lhs.apply_finite(z).unwrap(), rhs.apply_finite(z).unwrap());
            prop_assert!((x - y).norm() <= 1e-9 * (1.0 + x.norm()));
        }

        #[test]
        fn multiplier_is_conjugation_invariant(h in arb_map(), re in 0.05f64..0.6, im in -0.3f64..0.3) {
            let m = MoebiusMap::loxodromic(c(0.7, 0.2), c(-1.3, 0.4), c(re, im)).unwrap();
            let q1 = m.multiplier().unwrap();
            let q2 = m.conjugate_by(&h).multiplier().unwrap();
            prop_assert!((q1 - q2).norm() < 1e-8);
        }
    }
}
