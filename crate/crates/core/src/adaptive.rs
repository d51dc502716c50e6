//! Adaptive prefix coding with periodically rebuilt canonical Shannon codes.
//!
//! Every symbol starts with a count of one. The coder keeps the symbols in
//! nonincreasing count order with Gallager's leader swap, and every
//! `period` symbols it rebuilds a canonical code from the current counts.
//! The decoder performs exactly the same updates, so both sides always
//! agree on the code in use.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::bitio::{BitSink, BitSource};
use crate::canonical::{shannon_length, CanonicalCode};
use crate::error::{Error, Result};
use crate::Symbol;

/// Whether the encoder knows the input length up front.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LengthHint {
    /// Rebuild every `floor(log2^2 n)` symbols.
    Known(u64),
    /// Recompute the period as `floor(log2^2 (i + sigma))` at each rebuild.
    Unknown,
}

/// `max(1, floor(log2(x)^2))`.
pub fn rebuild_period(x: u64) -> u64 {
    if x < 2 {
        return 1;
    }
    let l = (x as f64).log2();
    ((l * l).floor() as u64).max(1)
}

/// Length bound for the codeword of the `i`-th symbol (1-based).
///
/// `occ` counts occurrences of that symbol in the first `i` positions,
/// including position `i` itself.
pub fn position_bound(i: u64, sigma: u64, occ: u64, period: u64) -> u32 {
    let denom = occ.saturating_sub(period).max(1);
    shannon_length(i + sigma, denom).max(1)
}

/// Symbols kept in nonincreasing count order under unit increments.
#[derive(Clone, Debug)]
pub struct GallagerOrder {
    counts: Vec<u64>,
    order: Vec<Symbol>,
    position: Vec<u32>,
    block_start: HashMap<u64, u32>,
}

impl GallagerOrder {
    pub fn new(sigma: usize) -> Self {
        Self::with_counts(vec![1; sigma])
    }

    /// Starts from arbitrary positive counts; ties are ordered by symbol.
    pub fn with_counts(counts: Vec<u64>) -> Self {
        let mut order: Vec<Symbol> = (0..counts.len() as Symbol).collect();
        order.sort_by_key(|&s| (std::cmp::Reverse(counts[s as usize]), s));
        let mut position = vec![0; counts.len()];
        let mut block_start = HashMap::new();
        for (p, &s) in order.iter().enumerate() {
            position[s as usize] = p as u32;
            block_start.entry(counts[s as usize]).or_insert(p as u32);
        }
        Self {
            counts,
            order,
            position,
            block_start,
        }
    }

    pub fn sigma(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, symbol: Symbol) -> u64 {
        self.counts[symbol as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Symbols by position, highest count first.
    pub fn order(&self) -> &[Symbol] {
        &self.order
    }

    pub fn position_of(&self, symbol: Symbol) -> u32 {
        self.position[symbol as usize]
    }

    /// Increments the count of `symbol`, swapping it to the front of its block first.
    pub fn bump(&mut self, symbol: Symbol) {
        let c = self.counts[symbol as usize];
        let leader = self.block_start[&c];
        let here = self.position[symbol as usize];
        if here != leader {
            let other = self.order[leader as usize];
            self.order.swap(leader as usize, here as usize);
            self.position[other as usize] = here;
            self.position[symbol as usize] = leader;
        }
        self.counts[symbol as usize] = c + 1;

        let next = leader as usize + 1;
        if next < self.order.len() && self.counts[self.order[next] as usize] == c {
            self.block_start.insert(c, next as u32);
        } else {
            self.block_start.remove(&c);
        }
        self.block_start.entry(c + 1).or_insert(leader);
    }
}

/// Coder state shared by the encoder and the decoder.
#[derive(Clone, Debug)]
pub struct AdaptiveModel {
    freq: GallagerOrder,
    hint: LengthHint,
    processed: u64,
    period: u64,
    last_rebuild: u64,
    next_rebuild: u64,
    code: CanonicalCode,
}

impl AdaptiveModel {
    pub fn new(sigma: usize, hint: LengthHint) -> Result<Self> {
        if sigma == 0 || sigma > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("alphabet size {sigma}")));
        }
        let freq = GallagerOrder::new(sigma);
        let period = match hint {
            LengthHint::Known(n) => rebuild_period(n),
            LengthHint::Unknown => rebuild_period(sigma as u64),
        };
        let code = build_code(&freq, sigma as u64)?;
        Ok(Self {
            freq,
            hint,
            processed: 0,
            period,
            last_rebuild: 0,
            next_rebuild: period,
            code,
        })
    }

    pub fn sigma(&self) -> usize {
        self.freq.sigma()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// Number of symbols the active code was built from.
    pub fn last_rebuild(&self) -> u64 {
        self.last_rebuild
    }

    pub fn code(&self) -> &CanonicalCode {
        &self.code
    }

    pub fn frequencies(&self) -> &GallagerOrder {
        &self.freq
    }

    fn check(&self, symbol: Symbol) -> Result<()> {
        if (symbol as usize) < self.sigma() {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                sigma: self.sigma() as u32,
            })
        }
    }

    /// Records `symbol` and rebuilds the code when the schedule says so.
    pub fn update(&mut self, symbol: Symbol) -> Result<()> {
        self.freq.bump(symbol);
        self.processed += 1;
        if self.processed == self.next_rebuild {
            let sigma = self.sigma() as u64;
            self.code = build_code(&self.freq, self.processed + sigma)?;
            self.last_rebuild = self.processed;
            if self.hint == LengthHint::Unknown {
                self.period = rebuild_period(self.processed + sigma);
            }
            self.next_rebuild = self.processed + self.period;
        }
        Ok(())
    }

    /// Hash of everything that influences future codewords.
    pub fn state_digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.freq.counts.hash(&mut h);
        self.freq.order.hash(&mut h);
        self.processed.hash(&mut h);
        self.period.hash(&mut h);
        self.next_rebuild.hash(&mut h);
        self.code.symbol_lengths().hash(&mut h);
        for s in 0..self.sigma() as Symbol {
            self.code.rank_of(s).hash(&mut h);
        }
        h.finish()
    }

    /// Bits held by the model: counts, order tables, code tables and registers.
    pub fn state_size_bits(&self) -> u64 {
        let sigma = self.sigma() as u64;
        let word = 64;
        // counts, A1/A2 of the order, A1/A2 of the code, one length per symbol
        let per_symbol = 5 * sigma * word;
        let dictionaries = 2 * self.code.dictionary_size() as u64 * 3 * word;
        let blocks = self.freq.block_start.len() as u64 * 2 * word;
        per_symbol + dictionaries + blocks + 6 * word
    }
}

fn build_code(freq: &GallagerOrder, total: u64) -> Result<CanonicalCode> {
    let lengths: Vec<u32> = freq
        .order
        .iter()
        .map(|&s| shannon_length(total, freq.count(s)).max(1))
        .collect();
    CanonicalCode::from_ranked(&lengths, freq.order.clone())
}

#[derive(Clone, Debug)]
pub struct AdaptiveEncoder {
    model: AdaptiveModel,
}

impl AdaptiveEncoder {
    pub fn new(sigma: usize, hint: LengthHint) -> Result<Self> {
        Ok(Self {
            model: AdaptiveModel::new(sigma, hint)?,
        })
    }

    pub fn model(&self) -> &AdaptiveModel {
        &self.model
    }

    /// Writes the codeword for `symbol` and returns its length.
    pub fn encode_symbol(&mut self, symbol: Symbol, sink: &mut BitSink) -> Result<u32> {
        self.model.check(symbol)?;
        let len = self.model.code.write_symbol(symbol, sink)?;
        self.model.update(symbol)?;
        Ok(len)
    }

    pub fn state_digest(&self) -> u64 {
        self.model.state_digest()
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveDecoder {
    model: AdaptiveModel,
}

impl AdaptiveDecoder {
    pub fn new(sigma: usize, hint: LengthHint) -> Result<Self> {
        Ok(Self {
            model: AdaptiveModel::new(sigma, hint)?,
        })
    }

    pub fn model(&self) -> &AdaptiveModel {
        &self.model
    }

    pub fn decode_symbol(&mut self, src: &mut BitSource<'_>) -> Result<Symbol> {
        if src.remaining() == 0 {
            return Err(Error::Truncated);
        }
        let window = src.peek_padded(self.model.code.max_len());
        let (symbol, len) = self
            .model
            .code
            .decode_symbol(window)
            .map_err(|_| Error::corrupt("no codeword matches the input"))?;
        if (len as u64) > src.remaining() {
            return Err(Error::Truncated);
        }
        src.skip(len as u64)?;
        self.model.update(symbol)?;
        Ok(symbol)
    }

    pub fn state_digest(&self) -> u64 {
        self.model.state_digest()
    }
}

/// Encodes `s` and returns the bits along with each codeword's length.
pub fn encode_with_lengths(
    s: &[Symbol],
    sigma: usize,
    hint: LengthHint,
) -> Result<(BitSink, Vec<u32>)> {
    let mut enc = AdaptiveEncoder::new(sigma, hint)?;
    let mut sink = BitSink::new();
    let lengths = s
        .iter()
        .map(|&sym| enc.encode_symbol(sym, &mut sink))
        .collect::<Result<Vec<u32>>>()?;
    Ok((sink, lengths))
}

pub fn encode_stream(s: &[Symbol], sigma: usize, hint: LengthHint) -> Result<BitSink> {
    encode_with_lengths(s, sigma, hint).map(|(bits, _)| bits)
}

/// Decodes `n` symbols from the front of `src`.
pub fn decode_from(
    src: &mut BitSource<'_>,
    sigma: usize,
    n: u64,
    hint: LengthHint,
) -> Result<Vec<Symbol>> {
    let mut dec = AdaptiveDecoder::new(sigma, hint)?;
    let mut out = Vec::with_capacity(n.min(src.remaining()) as usize);
    for _ in 0..n {
        out.push(dec.decode_symbol(src)?);
    }
    Ok(out)
}

/// Decodes exactly `n` symbols; leftover bits are an error.
pub fn decode_stream(bits: &BitSink, sigma: usize, n: u64, hint: LengthHint) -> Result<Vec<Symbol>> {
    let mut src = bits.reader();
    let out = decode_from(&mut src, sigma, n, hint)?;
    if src.remaining() != 0 {
        return Err(Error::corrupt("trailing bits after the last codeword"));
    }
    Ok(out)
}
