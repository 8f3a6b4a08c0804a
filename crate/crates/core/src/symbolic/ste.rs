//! Plug-in symbolic transfer entropy and its significance tests.
//!
//! With `a = x[i + delta]`, `b = x[i]` (target) and `c = y[i]` (source),
//!
//! ```text
//! T = 1/N sum n_abc log2(n_abc n_b / (n_bc n_ab))
//! ```
//!
//! which is the conditional mutual information `I(a; c | b)` of the empirical
//! triple distribution.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::SymbolSequence;
use crate::error::{Error, Result};
use crate::special::chi2_sf;

/// Fewest surrogates that can reach a p-value of 0.05.
pub const MIN_SURROGATES: usize = 19;

/// Alphabets up to this size are counted in dense tables (m <= 4).
const DENSE_ALPHABET: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TripleCount {
    /// Target symbol `delta` steps ahead.
    pub next: u16,
    /// Target symbol now.
    pub current: u16,
    /// Source symbol now.
    pub source: u16,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SteEstimate {
    /// Bits, nonnegative.
    pub value: f64,
    pub delta: usize,
    /// Observed triples sorted by `(current, source, next)`.
    pub counts: Vec<TripleCount>,
    /// Number of usable triples `N`.
    pub triples: usize,
    /// Distinct target symbols among the aligned samples.
    pub target_alphabet: usize,
    /// Distinct source symbols among the aligned samples.
    pub source_alphabet: usize,
}

fn validate(source: &SymbolSequence, target: &SymbolSequence, delta: usize) -> Result<usize> {
    if source.len() != target.len() {
        return Err(Error::Dimension(alloc::format!(
            "source has {} symbols, target has {}",
            source.len(),
            target.len()
        )));
    }
    if source.m != target.m {
        return Err(Error::Dimension(alloc::format!("embedding dimensions differ ({} vs {})", source.m, target.m)));
    }
    if delta == 0 {
        return Err(Error::InvalidParameter("delta must be at least 1".into()));
    }
    if source.len() <= delta {
        return Err(Error::EmptyTriples);
    }
    Ok(source.len() - delta)
}

fn distinct(symbols: &[u16], alphabet: usize) -> usize {
    let mut seen = vec![false; alphabet];
    symbols.iter().filter(|&&s| !core::mem::replace(&mut seen[s as usize], true)).count()
}

/// Reusable counting buffers.
#[derive(Debug, Default)]
pub(crate) struct Counter {
    abc: Vec<u32>,
    ab: Vec<u32>,
    keys: Vec<u64>,
    pairs: Vec<u64>,
}

impl Counter {
    /// Triple counts in `(current, source, next)` order, handed to `visit`
    /// together with `n_b`, `n_bc` and `n_ab`.
    fn for_each<F>(&mut self, target: &[u16], source: &[u16], delta: usize, alphabet: usize, mut visit: F)
    where
        F: FnMut(TripleCount, u32, u32, u32),
    {
        let n = target.len() - delta;
        let m = alphabet;
        if m <= DENSE_ALPHABET {
            self.abc.clear();
            self.abc.resize(m * m * m, 0);
            self.ab.clear();
            self.ab.resize(m * m, 0);
            for i in 0..n {
                let (a, b, c) = (target[i + delta] as usize, target[i] as usize, source[i] as usize);
                self.abc[(b * m + c) * m + a] += 1;
                self.ab[b * m + a] += 1;
            }
            for b in 0..m {
                let nb: u32 = self.ab[b * m..(b + 1) * m].iter().sum();
                if nb == 0 {
                    continue;
                }
                for c in 0..m {
                    let row = &self.abc[(b * m + c) * m..(b * m + c + 1) * m];
                    let nbc: u32 = row.iter().sum();
                    if nbc == 0 {
                        continue;
                    }
                    for (a, &nabc) in row.iter().enumerate() {
                        if nabc > 0 {
                            let t = TripleCount { next: a as u16, current: b as u16, source: c as u16, count: nabc };
                            visit(t, nb, nbc, self.ab[b * m + a]);
                        }
                    }
                }
            }
            return;
        }

        let mm = m as u64;
        self.keys.clear();
        self.pairs.clear();
        for i in 0..n {
            let (a, b, c) = (target[i + delta] as u64, target[i] as u64, source[i] as u64);
            self.keys.push((b * mm + c) * mm + a);
            self.pairs.push(b * mm + a);
        }
        self.keys.sort_unstable();
        self.pairs.sort_unstable();
        let count_pair = |pairs: &[u64], key: u64| {
            let lo = pairs.partition_point(|&k| k < key);
            let hi = pairs.partition_point(|&k| k <= key);
            (hi - lo) as u32
        };
        let keys = &self.keys;
        let mut i = 0;
        while i < keys.len() {
            let b = keys[i] / (mm * mm);
            let b_end = keys.partition_point(|&k| k / (mm * mm) <= b);
            let nb = (b_end - i) as u32;
            while i < b_end {
                let bc = keys[i] / mm;
                let bc_end = i + keys[i..b_end].partition_point(|&k| k / mm <= bc);
                let nbc = (bc_end - i) as u32;
                while i < bc_end {
                    let key = keys[i];
                    let run_end = i + keys[i..bc_end].partition_point(|&k| k <= key);
                    let a = key % mm;
                    let c = (key / mm) % mm;
                    let t = TripleCount {
                        next: a as u16,
                        current: b as u16,
                        source: c as u16,
                        count: (run_end - i) as u32,
                    };
                    visit(t, nb, nbc, count_pair(&self.pairs, b * mm + a));
                    i = run_end;
                }
            }
        }
    }

    pub(crate) fn value(&mut self, target: &[u16], source: &[u16], delta: usize, alphabet: usize) -> f64 {
        let n = (target.len() - delta) as f64;
        let mut acc = 0.0;
        self.for_each(target, source, delta, alphabet, |t, nb, nbc, nab| {
            acc += term(t.count, nb, nbc, nab);
        });
        (acc / n).max(0.0)
    }
}

fn term(nabc: u32, nb: u32, nbc: u32, nab: u32) -> f64 {
    let num = nabc as f64 * nb as f64;
    let den = nbc as f64 * nab as f64;
    nabc as f64 * (num / den).log2()
}

/// Transfer entropy from `source` to `target` in bits.
pub fn ste(source: &SymbolSequence, target: &SymbolSequence, delta: usize) -> Result<SteEstimate> {
    let n = validate(source, target, delta)?;
    let alphabet = target.alphabet_size();
    let mut counts = Vec::new();
    let mut acc = 0.0;
    Counter::default().for_each(&target.symbols, &source.symbols, delta, alphabet, |t, nb, nbc, nab| {
        acc += term(t.count, nb, nbc, nab);
        counts.push(t);
    });
    Ok(SteEstimate {
        value: (acc / n as f64).max(0.0),
        delta,
        counts,
        triples: n,
        target_alphabet: distinct(&target.symbols, alphabet),
        source_alphabet: distinct(&source.symbols[..n], alphabet),
    })
}

/// Upper tail of `chi2(D)` at `2 N ln(2) T`, `D = S_x (S_x - 1) (S_y - 1)`.
///
/// `alphabets` is `(S_x, S_y)`: target and source alphabet sizes.
pub fn chi2_pvalue(est: &SteEstimate, alphabets: (usize, usize), triples: usize) -> Result<f64> {
    let (sx, sy) = alphabets;
    if sx == 0 || sy == 0 || triples == 0 {
        return Err(Error::InvalidParameter("alphabet sizes and triple count must be positive".into()));
    }
    let dof = sx * (sx - 1) * (sy - 1);
    if dof == 0 || est.value <= 0.0 {
        return Ok(1.0);
    }
    let statistic = 2.0 * triples as f64 * LN_2 * est.value;
    Ok(chi2_sf(statistic, dof as f64).clamp(0.0, 1.0))
}

/// Permutation test: the source symbols are shuffled, which keeps the target's
/// own transition law and destroys any coupling.
///
/// Returns `(1 + #{T_surrogate >= T}) / (1 + count)`.
pub fn surrogate_pvalue(
    source: &SymbolSequence,
    target: &SymbolSequence,
    delta: usize,
    count: usize,
    seed: u64,
) -> Result<f64> {
    surrogate_pvalue_with_rng(source, target, delta, count, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn surrogate_pvalue_with_rng<R: Rng + ?Sized>(
    source: &SymbolSequence,
    target: &SymbolSequence,
    delta: usize,
    count: usize,
    rng: &mut R,
) -> Result<f64> {
    validate(source, target, delta)?;
    if count < MIN_SURROGATES {
        return Err(Error::InvalidParameter(alloc::format!("need at least {MIN_SURROGATES} surrogates, got {count}")));
    }
    let alphabet = target.alphabet_size();
    let mut counter = Counter::default();
    let observed = counter.value(&target.symbols, &source.symbols, delta, alphabet);
    Ok(surrogate_exceedances(&mut counter, &target.symbols, &source.symbols, delta, alphabet, observed, count, rng))
}

/// Shared with the pairwise matrix so it can reuse one counter per pair.
#[allow(clippy::too_many_arguments)]
pub(crate) fn surrogate_exceedances<R: Rng + ?Sized>(
    counter: &mut Counter,
    target: &[u16],
    source: &[u16],
    delta: usize,
    alphabet: usize,
    observed: f64,
    count: usize,
    rng: &mut R,
) -> f64 {
    let mut shuffled = source.to_vec();
    let mut exceed = 0usize;
    for _ in 0..count {
        shuffled.shuffle(rng);
        if counter.value(target, &shuffled, delta, alphabet) + 1e-12 >= observed {
            exceed += 1;
        }
    }
    (1 + exceed) as f64 / (1 + count) as f64
}
