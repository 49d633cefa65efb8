//! Depth-first traversal of the reduced-word tree with per-shell sums.
//!
//! Words are never stored: each depth owns one preallocated node buffer and
//! a child is built from its parent by appending one letter on the right,
//! `map ← map∘γ_x`, `g ← g·g_x`, `g⁻¹ ← g_x⁻¹·g⁻¹`,
//! `δg ← δg·g_x + g·δg_x`.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::dense::{self, CompensatedSum, ZERO};
use crate::error::{Error, Result};
use crate::moebius::{word_count, MoebiusMap};

/// One group element seen during the walk.
pub(crate) struct Node<'a> {
    pub map: &'a MoebiusMap,
    pub g: &'a [Complex64],
    pub ginv: &'a [Complex64],
    /// `δg` for each derivative direction, `n²` entries each.
    pub dg: &'a [Complex64],
}

struct Buf {
    map: MoebiusMap,
    g: Vec<Complex64>,
    ginv: Vec<Complex64>,
    dg: Vec<Complex64>,
}

/// Letter data shared by every walk over one phase point.
pub(crate) struct Letters {
    pub n: usize,
    pub maps: Vec<MoebiusMap>,
    pub g: Vec<Vec<Complex64>>,
}

/// Left-translation directions `(factor j, x)` and the per-letter `δg_x`.
pub(crate) struct Directions {
    count: usize,
    /// `[direction][letter]`.
    dh: Vec<Vec<Option<Vec<Complex64>>>>,
}

impl Directions {
    pub(crate) fn new(letters: &Letters, dirs: &[(usize, Vec<Complex64>)]) -> Self {
        let n = letters.n;
        let nl = letters.maps.len();
        let dh = dirs
            .iter()
            .map(|(j, x)| {
                (0..nl)
                    .map(|k| {
                        if k / 2 != *j {
                            return None;
                        }
                        let mut out = vec![ZERO; n * n];
                        if k % 2 == 0 {
                            dense::matmul(n, &letters.g[k], x, &mut out);
                        } else {
                            dense::matmul(n, x, &letters.g[k], &mut out);
                            out.iter_mut().for_each(|v| *v = -*v);
                        }
                        Some(out)
                    })
                    .collect()
            })
            .collect();
        Directions { count: dirs.len(), dh }
    }

    pub(crate) fn count(&self) -> usize {
        self.count
    }
}

/// Per-shell compensated sums and absolute norms.
pub(crate) struct Shells {
    pub sums: Vec<CompensatedSum>,
    pub norms: Vec<f64>,
}

pub(crate) type Visitor<'v> = dyn FnMut(&Node, &mut [Complex64]) -> Result<()> + 'v;

fn walk_rec(
    letters: &Letters,
    dirs: Option<&Directions>,
    bufs: &mut [Buf],
    d: usize,
    last: Option<usize>,
    max_depth: usize,
    scratch: &mut [Complex64],
    shells: &mut Shells,
    visit: &mut Visitor,
) -> Result<()> {
    {
        let b = &bufs[d];
        scratch.iter_mut().for_each(|v| *v = ZERO);
        visit(&Node { map: &b.map, g: &b.g, ginv: &b.ginv, dg: &b.dg }, scratch)?;
        shells.norms[d] += scratch.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        shells.sums[d].add(scratch);
    }
    if d == max_depth {
        return Ok(());
    }
    let n = letters.n;
    let nn = n * n;
    for x in 0..letters.maps.len() {
        if last == Some(x ^ 1) {
            continue;
        }
        {
            let (head, tail) = bufs.split_at_mut(d + 1);
            let p = &head[d];
            let c = &mut tail[0];
            c.map = p.map.compose(&letters.maps[x]);
            dense::matmul(n, &p.g, &letters.g[x], &mut c.g);
            dense::matmul(n, &letters.g[x ^ 1], &p.ginv, &mut c.ginv);
            if let Some(dirs) = dirs {
                for k in 0..dirs.count {
                    let out = &mut c.dg[k * nn..(k + 1) * nn];
                    dense::matmul(n, &p.dg[k * nn..(k + 1) * nn], &letters.g[x], out);
                    if let Some(dh) = &dirs.dh[k][x] {
                        dense::matmul_add(n, &p.g, dh, out);
                    }
                }
            }
        }
        walk_rec(letters, dirs, bufs, d + 1, Some(x), max_depth, scratch, shells, visit)?;
    }
    Ok(())
}

/// Visits every reduced word of length `≤ max_depth` once.
pub(crate) fn walk(letters: &Letters, dirs: Option<&Directions>, max_depth: usize, len: usize, visit: &mut Visitor) -> Result<Shells> {
    let n = letters.n;
    let ndir = dirs.map_or(0, |d| d.count);
    let mut id = vec![ZERO; n * n];
    for i in 0..n {
        id[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let mut bufs: Vec<Buf> = (0..=max_depth)
        .map(|_| Buf { map: MoebiusMap::identity(), g: id.clone(), ginv: id.clone(), dg: vec![ZERO; ndir * n * n] })
        .collect();
    let mut shells = Shells {
        sums: (0..=max_depth).map(|_| CompensatedSum::new(len)).collect(),
        norms: vec![0.0; max_depth + 1],
    };
    let mut scratch = vec![ZERO; len];
    walk_rec(letters, dirs, &mut bufs, 0, None, max_depth, &mut scratch, &mut shells, visit)?;
    Ok(shells)
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// `(measured ratio, tail estimate)` after keeping shells `0..=p`.
pub(crate) fn tail_at(norms: &[f64], p: usize) -> (f64, f64) {
    if p == 0 {
        return (f64::NAN, if norms[0] == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let mut r = ratio(norms[p], norms[p - 1]);
    if p >= 2 {
        r = r.max(ratio(norms[p - 1], norms[p - 2]));
    }
    if norms[p] == 0.0 {
        return (r, 0.0);
    }
    if !(r < 1.0) {
        return (r, f64::INFINITY);
    }
    (r, norms[p] * r / (1.0 - r))
}

/// How deep a series evaluation goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    /// Stop at the first shell whose tail estimate meets the target.
    Adaptive,
    /// Sum exactly the words of length `≤ L`.
    Fixed(usize),
}

pub(crate) struct RawSeries {
    pub value: Vec<Complex64>,
    pub tail_estimate: f64,
    pub shells_used: usize,
    pub measured_ratio: f64,
    pub converged: bool,
    pub shell_norms: Vec<f64>,
}

const MAX_JUMP: usize = 3;

pub(crate) struct Driver<'a> {
    pub letters: &'a Letters,
    pub max_word_length: usize,
    pub target_tail: f64,
    pub capacity: usize,
    pub hint: &'a AtomicUsize,
}

fn assemble(shells: &Shells, p: usize, target: f64) -> RawSeries {
    let len = shells.sums[0].total().len();
    let mut acc = CompensatedSum::new(len);
    for s in &shells.sums[..=p] {
        acc.add(&s.total());
    }
    let (r, tail) = tail_at(&shells.norms, p);
    RawSeries {
        value: acc.total(),
        tail_estimate: tail,
        shells_used: p + 1,
        measured_ratio: r,
        converged: r < 1.0 && tail <= target || tail == 0.0,
        shell_norms: shells.norms[..=p].to_vec(),
    }
}

impl Driver<'_> {
    fn capacity_depth(&self) -> Result<usize> {
        let l = self.letters.maps.len() / 2;
        if self.capacity == 0 {
            return Err(Error::CapacityExceeded { needed: 1, capacity: 0 });
        }
        let mut d = 0;
        while d < self.max_word_length && word_count(l, d + 1) <= self.capacity as u128 {
            d += 1;
        }
        Ok(d)
    }

    pub(crate) fn run(&self, depth: Depth, dirs: Option<&Directions>, len: usize, visit: &mut Visitor) -> Result<RawSeries> {
        let cap = self.capacity_depth()?;
        if let Depth::Fixed(l) = depth {
            if l > cap {
                let words = self.letters.maps.len() / 2;
                return Err(Error::CapacityExceeded { needed: word_count(words, l), capacity: self.capacity });
            }
            let shells = walk(self.letters, dirs, l, len, visit)?;
            return Ok(assemble(&shells, l, self.target_tail));
        }
        let min_p = self.max_word_length.min(2);
        let mut d = self.hint.load(Ordering::Relaxed).max(min_p).min(cap);
        loop {
            let shells = walk(self.letters, dirs, d, len, visit)?;
            for p in min_p..=d {
                let (r, tail) = tail_at(&shells.norms, p);
                if tail == 0.0 || (r < 1.0 && tail <= self.target_tail) {
                    self.hint.store(p, Ordering::Relaxed);
                    return Ok(assemble(&shells, p, self.target_tail));
                }
            }
            if d >= cap {
                let out = assemble(&shells, d, self.target_tail);
                if cap < self.max_word_length {
                    return Err(Error::TailNotMet { tail: out.tail_estimate, target: self.target_tail, shells: d + 1 });
                }
                return Ok(out);
            }
            let (r, tail) = tail_at(&shells.norms, d);
            let mut step = 1;
            // Each extra shell multiplies the walk cost by `2l − 1`, so the
            // predicted jump is capped rather than trusted.
            if r < 1.0 && r > 0.0 && tail.is_finite() {
                let k = (self.target_tail / tail).ln() / r.ln();
                if k.is_finite() && k > 1.0 {
                    step = (k.floor() as usize).min(MAX_JUMP);
                }
            }
            d = (d + step).min(cap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_formula() {
        let norms = [1.0, 0.1, 0.01, 0.001];
        let (r, t) = tail_at(&norms, 3);
        assert!((r - 0.1).abs() < 1e-12);
        assert!((t - 0.001 * 0.1 / 0.9).abs() < 1e-15);
        let (r, t) = tail_at(&[1.0, 0.5, 0.1], 2);
        assert!((r - 0.5).abs() < 1e-12);
        assert!((t - 0.1).abs() < 1e-12);
        assert_eq!(tail_at(&[1.0, 2.0], 1).1, f64::INFINITY);
        assert_eq!(tail_at(&[0.0, 0.0, 0.0], 2), (0.0, 0.0));
    }
}
