//! Empirical entropy and structured test inputs.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::Symbol;

/// Symbol counts over an alphabet of size `sigma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn from_symbols(symbols: &[Symbol], sigma: usize) -> Result<Self> {
        let mut counts = vec![0u64; sigma];
        for &s in symbols {
            let slot = counts
                .get_mut(s as usize)
                .ok_or(Error::SymbolOutOfRange {
                    symbol: s,
                    sigma: sigma as u32,
                })?;
            *slot += 1;
        }
        Ok(Self::from_counts(counts))
    }

    pub fn sigma(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of symbols with a nonzero count.
    pub fn used_symbols(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn h0(&self) -> Result<f64> {
        h0(self)
    }
}

/// Zeroth-order empirical entropy in bits per symbol.
pub fn h0(table: &FrequencyTable) -> Result<f64> {
    if table.total == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(entropy_of_counts(&table.counts, table.total) / table.total as f64)
}

/// `sum c * log2(total / c)`, i.e. total self-information of a count vector.
pub(crate) fn entropy_of_counts(counts: &[u64], total: u64) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (n / c as f64).log2())
        .sum()
}

/// Order-`k` context statistics: for each k-tuple, counts of the symbols following it.
#[derive(Clone, Debug)]
pub struct ContextTable {
    k: usize,
    n: usize,
    contexts: HashMap<Vec<Symbol>, HashMap<Symbol, u64>>,
}

impl ContextTable {
    pub fn build(s: &[Symbol], k: usize) -> Result<Self> {
        if k >= s.len() {
            return Err(Error::OrderTooLarge { k, n: s.len() });
        }
        let mut contexts: HashMap<Vec<Symbol>, HashMap<Symbol, u64>> = HashMap::new();
        for i in k..s.len() {
            *contexts
                .entry(s[i - k..i].to_vec())
                .or_default()
                .entry(s[i])
                .or_default() += 1;
        }
        Ok(Self {
            k,
            n: s.len(),
            contexts,
        })
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn distinct_contexts(&self) -> usize {
        self.contexts.len()
    }

    /// Total length of all successor strings; equals `n - k`.
    pub fn covered(&self) -> u64 {
        self.contexts.values().flat_map(|m| m.values()).sum()
    }

    /// `(1/n) * sum_w |w_s| H_0(w_s)`.
    pub fn hk(&self) -> f64 {
        let total: f64 = self
            .contexts
            .values()
            .map(|m| {
                let counts: Vec<u64> = m.values().copied().collect();
                let len = counts.iter().sum();
                entropy_of_counts(&counts, len)
            })
            .sum();
        total / self.n as f64
    }

    /// Largest number of distinct successors of any context.
    pub fn max_successors(&self) -> usize {
        self.contexts.values().map(|m| m.len()).max().unwrap_or(0)
    }
}

/// Order-`k` empirical entropy in bits per symbol.
pub fn hk(s: &[Symbol], k: usize) -> Result<f64> {
    Ok(ContextTable::build(s, k)?.hk())
}

/// Checks `H_k(s1)|s1| + H_k(s2)|s2| <= H_k(s1 s2)|s1 s2|` within 1e-9.
pub fn subadditivity_check(s1: &[Symbol], s2: &[Symbol], k: usize) -> bool {
    let cost = |s: &[Symbol]| hk(s, k).map(|h| h * s.len() as f64);
    let joined: Vec<Symbol> = s1.iter().chain(s2).copied().collect();
    match (cost(s1), cost(s2), cost(&joined)) {
        (Ok(a), Ok(b), Ok(c)) => a + b <= c + 1e-9,
        _ => false,
    }
}

pub const MAX_DEBRUIJN_ORDER: u32 = 24;

/// The lexicographically least binary De Bruijn cycle of order `k`.
///
/// Concatenates, in lexicographic order, the binary Lyndon words whose
/// length divides `k` (Fredricksen-Kessler-Maiorana).
pub fn gen_debruijn(k: u32) -> Result<Vec<u8>> {
    if !(1..=MAX_DEBRUIJN_ORDER).contains(&k) {
        return Err(Error::DebruijnOrder(k));
    }
    let k = k as usize;
    let mut out = Vec::with_capacity(1 << k);
    let mut word = vec![0u8; k + 1];
    let mut t = 1usize;
    // iterative form of db(t, p)
    let mut p = 1usize;
    loop {
        if t > k {
            if k % p == 0 {
                out.extend_from_slice(&word[1..=p]);
            }
            // advance to the next prenecklace
            let mut i = k;
            while i > 0 && word[i] == 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            word[i] += 1;
            p = i;
            t = i + 1;
            continue;
        }
        word[t] = word[t - p];
        t += 1;
    }
    Ok(out)
}

/// `t` repeated to exactly `n` symbols: `t^(n / |t|)` followed by a proper prefix.
pub fn gen_periodic<T: Clone>(t: &[T], n: usize) -> Vec<T> {
    assert!(!t.is_empty(), "period must be nonempty");
    t.iter().cycle().take(n).cloned().collect()
}
