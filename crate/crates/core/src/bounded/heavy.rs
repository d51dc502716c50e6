use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::Symbol;

/// Misra-Gries summary with a fixed number of counters.
#[derive(Clone, Debug)]
pub struct MisraGries {
    capacity: usize,
    counters: HashMap<Symbol, u64>,
    seen: u64,
}

impl MisraGries {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            counters: HashMap::with_capacity(capacity.max(1) + 1),
            seen: 0,
        }
    }

    /// Counters sufficient to catch every symbol of frequency at least `theta`.
    pub fn for_threshold(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("threshold {theta}")));
        }
        Ok(Self::new((1.0 / theta).ceil() as usize))
    }

    pub fn push(&mut self, symbol: Symbol) {
        self.seen += 1;
        if let Some(c) = self.counters.get_mut(&symbol) {
            *c += 1;
        } else if self.counters.len() < self.capacity {
            self.counters.insert(symbol, 1);
        } else {
            self.counters.retain(|_, c| {
                *c -= 1;
                *c > 0
            });
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Symbols that may reach the threshold, in increasing order.
    pub fn candidates(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.counters.keys().copied().collect();
        out.sort_unstable();
        out
    }
}

/// Symbols occurring at least `theta * len` times in `stream`.
///
/// One Misra-Gries pass proposes candidates, a second pass counts them exactly.
pub fn heavy_hitters(stream: &[Symbol], theta: f64) -> Result<Vec<Symbol>> {
    let mut mg = MisraGries::for_threshold(theta)?;
    for &s in stream {
        mg.push(s);
    }
    let candidates = mg.candidates();
    let mut exact: HashMap<Symbol, u64> = candidates.iter().map(|&s| (s, 0)).collect();
    for s in stream {
        if let Some(c) = exact.get_mut(s) {
            *c += 1;
        }
    }
    let need = theta * stream.len() as f64;
    Ok(candidates
        .into_iter()
        .filter(|s| exact[s] as f64 >= need && exact[s] > 0)
        .collect())
}
