//! Seeded sample points for the checks.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::liealg::{AlgebraSpec, CMatrix};
use crate::moebius::{Circle, Letter, SchottkyData, Word};

/// Draws points of the fundamental domain, pairs, triples, directions and
/// words from one ChaCha stream. Streams with the same seed are independent.
pub struct Sampler<'a> {
    rng: ChaCha8Rng,
    schottky: &'a SchottkyData,
    half_width: f64,
    /// Minimum distance from every disc.
    pub clearance: f64,
    /// Minimum distance between the points of a pair or triple.
    pub separation: f64,
}

impl<'a> Sampler<'a> {
    pub fn new(schottky: &'a SchottkyData, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let reach = schottky.circles().map(|c| c.center.norm() + c.radius).fold(0.0, f64::max);
        let r = schottky.min_radius();
        Sampler { rng, schottky, half_width: 1.1 * reach, clearance: 0.1 * r, separation: 0.2 * r }
    }

    /// A point at distance at least `clearance` from every disc.
    pub fn point(&mut self) -> Complex64 {
        let h = self.half_width;
        loop {
            let z = Complex64::new(self.rng.random_range(-h..h), self.rng.random_range(-h..h));
            if self.schottky.clearance(z) >= self.clearance {
                return z;
            }
        }
    }

    fn separated(&self, z: Complex64, others: &[Complex64]) -> bool {
        others.iter().all(|w| (z - w).norm() > self.separation)
    }

    pub fn pair(&mut self) -> (Complex64, Complex64) {
        let z = self.point();
        loop {
            let w = self.point();
            if self.separated(w, &[z]) {
                return (z, w);
            }
        }
    }

    pub fn triple(&mut self) -> [Complex64; 3] {
        let (a, b) = self.pair();
        loop {
            let c = self.point();
            if self.separated(c, &[a, b]) {
                return [a, b, c];
            }
        }
    }

    /// A point within `radius` of `z`, still in the fundamental domain.
    pub fn near(&mut self, z: Complex64, radius: f64) -> Complex64 {
        loop {
            let w = z + Complex64::from_polar(radius * self.rng.random_range(0.5..1.0), self.rng.random_range(0.0..TAU));
            if self.schottky.clearance(w) >= self.clearance {
                return w;
            }
        }
    }

    pub fn on_circle(&mut self, c: &Circle) -> Complex64 {
        c.point_at(self.rng.random_range(0.0..TAU))
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    /// A unit-norm element of the algebra.
    pub fn direction(&mut self, spec: &AlgebraSpec) -> CMatrix {
        let c: Vec<Complex64> = (0..spec.dim())
            .map(|_| Complex64::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0)))
            .collect();
        let x = spec.from_coords(&c);
        let nx = x.norm();
        x / Complex64::new(nx, 0.0)
    }

    /// A reduced word of length exactly `len` in `genus` generators.
    pub fn word(&mut self, genus: usize, len: usize) -> Word {
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let x = Letter::from_index(self.rng.random_range(0..2 * genus));
            if letters.last().is_some_and(|&p| p.inv() == x) {
                continue;
            }
            letters.push(x);
        }
        Word::new(letters).expect("reduced by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{make_reference, ReferenceKind};

    #[test]
    fn samples_respect_clearance_and_separation() {
        let cfg = make_reference(ReferenceKind::Genus2, 5).unwrap();
        let mut s = Sampler::new(&cfg.schottky, 5, 1);
        for _ in 0..50 {
            let [a, b, c] = s.triple();
            for z in [a, b, c] {
                assert!(cfg.schottky.clearance(z) >= s.clearance);
            }
            assert!((a - b).norm() > s.separation && (a - c).norm() > s.separation && (b - c).norm() > s.separation);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let cfg = make_reference(ReferenceKind::Genus1, 5).unwrap();
        let a: Vec<_> = { let mut s = Sampler::new(&cfg.schottky, 9, 2); (0..5).map(|_| s.point()).collect() };
        let b: Vec<_> = { let mut s = Sampler::new(&cfg.schottky, 9, 2); (0..5).map(|_| s.point()).collect() };
        let c: Vec<_> = { let mut s = Sampler::new(&cfg.schottky, 9, 3); (0..5).map(|_| s.point()).collect() };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn words_are_reduced_with_requested_length() {
        let cfg = make_reference(ReferenceKind::Genus2, 5).unwrap();
        let mut s = Sampler::new(&cfg.schottky, 1, 0);
        for len in 1..6 {
            assert_eq!(s.word(2, len).len(), len);
        }
    }
}
