//! Ordinal symbolization, permutation entropy and symbolic transfer entropy.

mod matrix;
mod ste;

pub use matrix::{
    grid_scan, pairwise_ste_matrix, select_cell, GridRow, GridScanReport, PairwiseSte, SignificanceMethod, SteMatrix,
    SteParams, DEFAULT_SELECTION_TAU,
};
pub use ste::{
    chi2_pvalue, ste, surrogate_pvalue, surrogate_pvalue_with_rng, SteEstimate, TripleCount, MIN_SURROGATES,
};

use alloc::vec::Vec;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_EMBEDDING: usize = 2;
pub const MAX_EMBEDDING: usize = 7;

/// Ordinal patterns of a series, each stored as the Lehmer code of the
/// permutation that sorts its window in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SymbolSequence {
    pub symbols: Vec<u16>,
    pub m: usize,
    pub delay: usize,
}

impl SymbolSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of possible patterns, `m!`.
    pub fn alphabet_size(&self) -> usize {
        factorial(self.m)
    }

    /// The window offsets (1-based) listed in ascending order of value.
    pub fn ranks(&self, i: usize) -> Vec<u8> {
        decode_lehmer(self.symbols[i], self.m)
    }

    /// Contiguous slice of the sequence, e.g. to align two series.
    pub fn window(&self, start: usize, len: usize) -> SymbolSequence {
        SymbolSequence { symbols: self.symbols[start..start + len].to_vec(), m: self.m, delay: self.delay }
    }

    pub fn from_codes(symbols: Vec<u16>, m: usize, delay: usize) -> Result<Self> {
        check_embedding(m, delay)?;
        let limit = factorial(m);
        if let Some(bad) = symbols.iter().find(|&&s| s as usize >= limit) {
            return Err(Error::InvalidParameter(alloc::format!("symbol {bad} out of range for m = {m}")));
        }
        Ok(Self { symbols, m, delay })
    }
}

fn check_embedding(m: usize, delay: usize) -> Result<()> {
    if !(MIN_EMBEDDING..=MAX_EMBEDDING).contains(&m) {
        return Err(Error::InvalidParameter(alloc::format!(
            "embedding dimension {m} outside {MIN_EMBEDDING}..={MAX_EMBEDDING}"
        )));
    }
    if delay == 0 {
        return Err(Error::InvalidParameter("delay must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn factorial(m: usize) -> usize {
    (1..=m).product()
}

fn encode_lehmer(perm: &[u8]) -> u16 {
    let m = perm.len();
    let mut code = 0usize;
    for i in 0..m {
        let smaller = perm[i + 1..].iter().filter(|&&p| p < perm[i]).count();
        code = code * (m - i) + smaller;
    }
    code as u16
}

fn decode_lehmer(code: u16, m: usize) -> Vec<u8> {
    let mut digits = alloc::vec![0usize; m];
    let mut c = code as usize;
    for i in (0..m).rev() {
        let base = m - i;
        digits[i] = c % base;
        c /= base;
    }
    let mut pool: Vec<u8> = (1..=m as u8).collect();
    digits.iter().map(|&d| pool.remove(d)).collect()
}

/// Ordinal pattern of every window `x[i], x[i + l], ..., x[i + (m - 1) l]`.
///
/// Equal values are ordered by time, earlier first.
pub fn symbolize(x: &[f64], m: usize, delay: usize) -> Result<SymbolSequence> {
    check_embedding(m, delay)?;
    let span = (m - 1) * delay;
    if x.len() < span + 1 {
        return Err(Error::SeriesTooShort { need: span + 1, got: x.len() });
    }
    if let Some(row) = x.iter().position(|v| v.is_nan()) {
        return Err(Error::NonFinite { row, column: 0 });
    }
    let count = x.len() - span;
    let mut symbols = Vec::with_capacity(count);
    let mut order = [0u8; MAX_EMBEDDING];
    for i in 0..count {
        let perm = &mut order[..m];
        for (k, slot) in perm.iter_mut().enumerate() {
            *slot = k as u8;
        }
        // stable sort keeps temporal order among ties
        perm.sort_by(|&a, &b| x[i + a as usize * delay].total_cmp(&x[i + b as usize * delay]));
        for slot in perm.iter_mut() {
            *slot += 1;
        }
        symbols.push(encode_lehmer(perm));
    }
    Ok(SymbolSequence { symbols, m, delay })
}

/// Shannon entropy (bits) of the pattern frequencies.
pub fn permutation_entropy(s: &SymbolSequence) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::SeriesTooShort { need: 1, got: 0 });
    }
    let mut counts = alloc::vec![0usize; s.alphabet_size()];
    for &sym in &s.symbols {
        counts[sym as usize] += 1;
    }
    let n = s.len() as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n;
            -f * f.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_example_patterns() {
        let s = symbolize(&[1.0, 2.0, 3.0, 6.0, 5.0, 4.0], 2, 1).unwrap();
        let up = s.symbols.iter().filter(|&&c| c == s.symbols[0]).count();
        assert_eq!(s.ranks(0), alloc::vec![1, 2]);
        assert_eq!(s.ranks(4), alloc::vec![2, 1]);
        assert_eq!((up, s.len() - up), (3, 2));
        let h = permutation_entropy(&s).unwrap();
        assert!((h - 0.971).abs() < 1e-3, "{h}");
    }

    #[test]
    fn ties_follow_time() {
        let s = symbolize(&[5.0, 5.0], 2, 1).unwrap();
        assert_eq!(s.ranks(0), alloc::vec![1, 2]);
    }

    #[test]
    fn monotone_series_is_single_symbol() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        for m in 2..=5 {
            let s = symbolize(&x, m, 2).unwrap();
            assert!(s.symbols.iter().all(|&c| c == s.symbols[0]));
            assert_eq!(s.ranks(0), (1..=m as u8).collect::<Vec<_>>());
            assert_eq!(permutation_entropy(&s).unwrap(), 0.0);
        }
    }

    #[test]
    fn balanced_binary_is_one_bit() {
        let s = SymbolSequence::from_codes(alloc::vec![0, 1, 1, 0], 2, 1).unwrap();
        assert_eq!(permutation_entropy(&s).unwrap(), 1.0);
    }

    #[test]
    fn length_and_parameter_checks() {
        assert!(matches!(symbolize(&[1.0, 2.0], 3, 1), Err(Error::SeriesTooShort { need: 3, got: 2 })));
        assert!(symbolize(&[1.0; 20], 8, 1).is_err());
        assert!(symbolize(&[1.0; 20], 3, 0).is_err());
        assert_eq!(symbolize(&[0.0; 20], 3, 2).unwrap().len(), 16);
    }

    #[test]
    fn lehmer_round_trip() {
        for m in 2..=5 {
            for code in 0..factorial(m) as u16 {
                assert_eq!(encode_lehmer(&decode_lehmer(code, m)), code);
            }
        }
    }

    proptest! {
        #[test]
        fn invariant_under_increasing_transform(x in prop::collection::vec(-5.0f64..5.0, 10..80), m in 2usize..=5, l in 1usize..=2) {
            prop_assume!(x.len() > (m - 1) * l);
            let y: Vec<f64> = x.iter().map(|v| v.exp() * 3.0 + 1.0).collect();
            prop_assert_eq!(symbolize(&x, m, l).unwrap(), symbolize(&y, m, l).unwrap());
        }

        #[test]
        fn entropy_bounded(x in prop::collection::vec(-5.0f64..5.0, 10..80), m in 2usize..=4) {
            let s = symbolize(&x, m, 1).unwrap();
            let h = permutation_entropy(&s).unwrap();
            prop_assert!(h >= 0.0 && h <= (factorial(m) as f64).log2() + 1e-12);
            prop_assert!(s.symbols.iter().all(|&c| (c as usize) < factorial(m)));
        }
    }
}
