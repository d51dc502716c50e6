//! Canonical Shannon codes answered by predecessor search.
//!
//! A canonical code is stored as four small tables instead of an explicit
//! codeword list:
//!
//! * `A1`: symbol -> rank of its codeword in lexicographic order,
//! * `A2`: rank -> symbol,
//! * `D1`: rank of the first codeword of each length -> that codeword,
//! * `D2`: first codeword of each length, left-aligned -> its rank.
//!
//! Because codewords of equal length are consecutive binary numbers, the
//! codeword of rank `r` is `c0 + (r - r0)` where `(r0, c0)` is the
//! predecessor of `r` in `D1`; decoding runs the same arithmetic through
//! `D2`. Both dictionaries hold one entry per distinct length, so a sorted
//! array with binary search is all the predecessor structure needed.
//!
//! Ranks are 0-based throughout.

use crate::bitio::{BitSink, BitSource};
use crate::error::{Error, Result};
use crate::Symbol;

/// Longest codeword the fixed 64-bit windows can carry.
pub const MAX_CODEWORD_LEN: u32 = 64;

/// Codeword lengths listed in rank order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodewordLengths(pub Vec<u32>);

impl CodewordLengths {
    /// `sum 2^-len <= 1`, evaluated exactly.
    pub fn satisfies_kraft(&self) -> bool {
        let max = match self.0.iter().max() {
            Some(&m) if m <= MAX_CODEWORD_LEN => m,
            Some(_) => return false,
            None => return true,
        };
        let sum: u128 = self.0.iter().map(|&l| 1u128 << (max - l)).sum();
        sum <= 1u128 << max
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// Smallest `L` with `count * 2^L >= total`, i.e. `ceil(log2(total / count))`.
pub fn shannon_length(total: u64, count: u64) -> u32 {
    debug_assert!(count > 0 && count <= total);
    let mut len = 0u32;
    while (count as u128) << len < total as u128 {
        len += 1;
    }
    len
}

/// Shannon lengths `ceil(log2(1/p))` for a probability vector sorted nonincreasing.
///
/// A lone symbol with probability one is given length 1, the shortest
/// codeword a prefix code can use.
pub fn shannon_lengths(probs: &[f64]) -> Result<CodewordLengths> {
    if probs.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::ZeroProbability);
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized);
    }
    if probs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::NotSorted);
    }
    let lengths = probs
        .iter()
        .map(|&p| {
            let x = -p.log2();
            let near = x.round();
            let len = if (x - near).abs() < 1e-9 { near } else { x.ceil() };
            (len as u32).max(1)
        })
        .collect();
    Ok(CodewordLengths(lengths))
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct FirstCodeword {
    rank: u32,
    codeword: u64,
    len: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct AlignedFirst {
    key: u64,
    rank: u32,
    len: u32,
}

/// An immutable canonical prefix code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalCode {
    rank_of: Vec<u32>,
    symbol_at: Vec<Symbol>,
    d1: Vec<FirstCodeword>,
    d2: Vec<AlignedFirst>,
    max_len: u32,
}

/// Builds the canonical code whose rank `i` codeword belongs to symbol `i`.
pub fn build_canonical(lengths: &CodewordLengths) -> Result<CanonicalCode> {
    let symbols = (0..lengths.0.len() as Symbol).collect();
    CanonicalCode::from_ranked(&lengths.0, symbols)
}

impl CanonicalCode {
    /// Builds a code from lengths in rank order and the symbol holding each rank.
    ///
    /// `symbols_by_rank` must be a permutation of `0..sigma`.
    pub fn from_ranked(lengths_by_rank: &[u32], symbols_by_rank: Vec<Symbol>) -> Result<Self> {
        let sigma = lengths_by_rank.len();
        assert_eq!(symbols_by_rank.len(), sigma, "one symbol per rank");
        if sigma == 0 {
            return Err(Error::InvalidParameter("empty alphabet".into()));
        }
        if let Some(&bad) = lengths_by_rank
            .iter()
            .find(|&&l| l == 0 || l > MAX_CODEWORD_LEN)
        {
            return Err(Error::InvalidLength(bad));
        }
        if lengths_by_rank.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::LengthsNotSorted);
        }
        if !CodewordLengths(lengths_by_rank.to_vec()).satisfies_kraft() {
            return Err(Error::KraftViolation);
        }
        let max_len = *lengths_by_rank.last().unwrap();

        let mut d1 = Vec::new();
        let mut codeword: u128 = 0;
        let mut prev_len = lengths_by_rank[0];
        for (rank, &len) in lengths_by_rank.iter().enumerate() {
            if rank > 0 {
                codeword = (codeword + 1) << (len - prev_len);
            }
            if rank == 0 || len != prev_len {
                d1.push(FirstCodeword {
                    rank: rank as u32,
                    codeword: codeword as u64,
                    len,
                });
            }
            prev_len = len;
        }
        let d2 = d1
            .iter()
            .map(|f| AlignedFirst {
                key: left_align(f.codeword, f.len, max_len),
                rank: f.rank,
                len: f.len,
            })
            .collect();

        let mut rank_of = vec![u32::MAX; sigma];
        for (rank, &sym) in symbols_by_rank.iter().enumerate() {
            let slot = rank_of
                .get_mut(sym as usize)
                .ok_or(Error::UnknownSymbol(sym))?;
            assert_eq!(*slot, u32::MAX, "symbol {sym} appears twice");
            *slot = rank as u32;
        }
        Ok(Self {
            rank_of,
            symbol_at: symbols_by_rank,
            d1,
            d2,
            max_len,
        })
    }

    /// Builds a code from per-symbol lengths; ranks follow (length, symbol).
    pub fn from_symbol_lengths(lengths_by_symbol: &[u32]) -> Result<Self> {
        let mut order: Vec<Symbol> = (0..lengths_by_symbol.len() as Symbol).collect();
        order.sort_by_key(|&s| (lengths_by_symbol[s as usize], s));
        let lengths: Vec<u32> = order
            .iter()
            .map(|&s| lengths_by_symbol[s as usize])
            .collect();
        Self::from_ranked(&lengths, order)
    }

    /// Shannon code for an arbitrary (unsorted) distribution; ties go to the lower symbol.
    pub fn shannon(probs: &[f64]) -> Result<Self> {
        let mut order: Vec<Symbol> = (0..probs.len() as Symbol).collect();
        order.sort_by(|&a, &b| {
            probs[b as usize]
                .partial_cmp(&probs[a as usize])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let sorted: Vec<f64> = order.iter().map(|&s| probs[s as usize]).collect();
        let lengths = shannon_lengths(&sorted)?;
        Self::from_ranked(&lengths.0, order)
    }

    pub fn sigma(&self) -> usize {
        self.symbol_at.len()
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    pub fn rank_of(&self, symbol: Symbol) -> Option<u32> {
        self.rank_of.get(symbol as usize).copied()
    }

    pub fn symbol_at(&self, rank: u32) -> Option<Symbol> {
        self.symbol_at.get(rank as usize).copied()
    }

    /// Number of entries in each predecessor dictionary (one per distinct length).
    pub fn dictionary_size(&self) -> usize {
        self.d1.len()
    }

    /// `D1` entries as `(first rank, first codeword, length)`.
    pub fn first_codewords(&self) -> impl Iterator<Item = (u32, u64, u32)> + '_ {
        self.d1.iter().map(|f| (f.rank, f.codeword, f.len))
    }

    /// `D2` entries as `(left-aligned first codeword, rank, length)`.
    pub fn aligned_firsts(&self) -> impl Iterator<Item = (u64, u32, u32)> + '_ {
        self.d2.iter().map(|f| (f.key, f.rank, f.len))
    }

    pub fn length_of_rank(&self, rank: u32) -> u32 {
        self.d1[pred_by(&self.d1, |f| f.rank <= rank)].len
    }

    /// Codeword of `symbol` as `(value, length)`.
    pub fn encode_symbol(&self, symbol: Symbol) -> Result<(u64, u32)> {
        let rank = self.rank_of(symbol).ok_or(Error::UnknownSymbol(symbol))?;
        let first = &self.d1[pred_by(&self.d1, |f| f.rank <= rank)];
        Ok((first.codeword + (rank - first.rank) as u64, first.len))
    }

    /// Decodes the codeword at the front of a `max_len`-bit window (zero-padded).
    ///
    /// Returns the symbol and the number of bits its codeword occupies.
    pub fn decode_symbol(&self, window: u64) -> Result<(Symbol, u32)> {
        let idx = self.d2.partition_point(|f| f.key <= window);
        if idx == 0 {
            return Err(Error::InvalidPrefix);
        }
        let first = &self.d2[idx - 1];
        let prefix = window >> (self.max_len - first.len);
        let offset = prefix - (first.key >> (self.max_len - first.len));
        let group_end = self
            .d2
            .get(idx)
            .map_or(self.symbol_at.len() as u64, |next| next.rank as u64);
        let rank = first.rank as u64 + offset;
        if rank >= group_end {
            return Err(Error::InvalidPrefix);
        }
        Ok((self.symbol_at[rank as usize], first.len))
    }

    pub fn write_symbol(&self, symbol: Symbol, sink: &mut BitSink) -> Result<u32> {
        let (code, len) = self.encode_symbol(symbol)?;
        sink.push_bits(code, len);
        Ok(len)
    }

    pub fn read_symbol(&self, src: &mut BitSource<'_>) -> Result<Symbol> {
        let window = src.peek_padded(self.max_len);
        let (symbol, len) = self.decode_symbol(window)?;
        src.skip(len as u64)?;
        Ok(symbol)
    }

    /// Per-symbol codeword lengths, indexed by symbol.
    pub fn symbol_lengths(&self) -> Vec<u32> {
        (0..self.sigma() as Symbol)
            .map(|s| self.length_of_rank(self.rank_of[s as usize]))
            .collect()
    }

    /// Serializes as `gamma(sigma)` followed by `gamma(length)` per symbol.
    pub fn write_table(&self, sink: &mut BitSink) -> Result<()> {
        sink.write_gamma(self.sigma() as u64)?;
        for len in self.symbol_lengths() {
            sink.write_gamma(len as u64)?;
        }
        Ok(())
    }

    /// Rebuilds a code written by [`write_table`](Self::write_table).
    ///
    /// The rebuilt code ranks symbols by (length, symbol), which gives
    /// every symbol the same codeword whenever the original did too.
    pub fn read_table(src: &mut BitSource<'_>) -> Result<Self> {
        let sigma = src.read_gamma()?;
        if sigma > u32::MAX as u64 || sigma > src.remaining() {
            return Err(Error::corrupt("code table alphabet size"));
        }
        let lengths = (0..sigma)
            .map(|_| {
                let l = src.read_gamma()?;
                u32::try_from(l).map_err(|_| Error::InvalidLength(u32::MAX))
            })
            .collect::<Result<Vec<u32>>>()?;
        Self::from_symbol_lengths(&lengths)
    }
}

fn left_align(codeword: u64, len: u32, width: u32) -> u64 {
    if width == len {
        codeword
    } else {
        codeword << (width - len)
    }
}

/// Index of the last entry satisfying `le` (entries are sorted; the first always does).
fn pred_by<T>(entries: &[T], le: impl Fn(&T) -> bool) -> usize {
    entries.partition_point(le) - 1
}
