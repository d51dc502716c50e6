//! Burrows-Wheeler transform, move-to-front and zero-run coding in front of
//! the adaptive coder.
//!
//! The sentinel is the out-of-band symbol `sigma`, which sorts below every
//! alphabet symbol.

use crate::adaptive::{AdaptiveDecoder, AdaptiveEncoder, LengthHint};
use crate::bitio::{BitSink, BitSource};
use crate::error::{Error, Result};
use crate::Symbol;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BwtString {
    symbols: Vec<Symbol>,
    sigma: u32,
}

impl BwtString {
    /// Wraps a transformed string, checking that it holds exactly one sentinel.
    pub fn new(symbols: Vec<Symbol>, sigma: u32) -> Result<Self> {
        let mut sentinels = 0;
        for &c in &symbols {
            if c > sigma {
                return Err(Error::MalformedTransform("symbol above the sentinel"));
            }
            sentinels += (c == sigma) as usize;
        }
        match sentinels {
            1 => Ok(Self { symbols, sigma }),
            0 => Err(Error::MalformedTransform("no sentinel")),
            _ => Err(Error::MalformedTransform("more than one sentinel")),
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn sentinel(&self) -> Symbol {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Row holding the sentinel, i.e. the row of the whole string.
    pub fn primary_index(&self) -> usize {
        self.symbols.iter().position(|&c| c == self.sigma).unwrap()
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }
}

fn check_input(s: &[Symbol], sigma: u32) -> Result<()> {
    for &c in s {
        if c == sigma {
            return Err(Error::SentinelInInput);
        }
        if c > sigma {
            return Err(Error::SymbolOutOfRange { symbol: c, sigma });
        }
    }
    Ok(())
}

/// Suffix array of `s` followed by the sentinel, by prefix doubling.
///
/// With a unique smallest sentinel, sorting cyclic shifts sorts suffixes.
/// Each round is one stable counting sort on the first half's class; the
/// order by second half comes for free from the previous round.
pub fn suffix_array(s: &[Symbol], sigma: u32) -> Result<Vec<usize>> {
    check_input(s, sigma)?;
    let m = s.len() + 1;
    let key = |i: usize| if i == s.len() { 0 } else { s[i] as usize + 1 };
    let buckets = (sigma as usize + 2).max(m);

    let mut count = vec![0usize; buckets];
    for i in 0..m {
        count[key(i)] += 1;
    }
    for b in 1..buckets {
        count[b] += count[b - 1];
    }
    let mut sa = vec![0usize; m];
    for i in (0..m).rev() {
        count[key(i)] -= 1;
        sa[count[key(i)]] = i;
    }
    let mut class = vec![0usize; m];
    let mut classes = 1;
    for r in 1..m {
        if key(sa[r]) != key(sa[r - 1]) {
            classes += 1;
        }
        class[sa[r]] = classes - 1;
    }

    let mut shifted = vec![0usize; m];
    let mut next = vec![0usize; m];
    let mut h = 1;
    while h < m && classes < m {
        for r in 0..m {
            shifted[r] = (sa[r] + m - h) % m;
        }
        count[..classes].iter_mut().for_each(|c| *c = 0);
        for &i in &shifted {
            count[class[i]] += 1;
        }
        for b in 1..classes {
            count[b] += count[b - 1];
        }
        for &i in shifted.iter().rev() {
            count[class[i]] -= 1;
            sa[count[class[i]]] = i;
        }
        next[sa[0]] = 0;
        classes = 1;
        for r in 1..m {
            let (a, b) = (sa[r], sa[r - 1]);
            if class[a] != class[b] || class[(a + h) % m] != class[(b + h) % m] {
                classes += 1;
            }
            next[a] = classes - 1;
        }
        std::mem::swap(&mut class, &mut next);
        h *= 2;
    }
    Ok(sa)
}

pub fn bwt(s: &[Symbol], sigma: u32) -> Result<BwtString> {
    let sa = suffix_array(s, sigma)?;
    let symbols = sa
        .iter()
        .map(|&i| if i == 0 { sigma } else { s[i - 1] })
        .collect();
    Ok(BwtString { symbols, sigma })
}

/// Inverts the transform by walking the LF mapping from the sentinel row.
pub fn ibwt(t: &BwtString) -> Result<Vec<Symbol>> {
    let sigma = t.sigma as usize;
    let l = &t.symbols;
    let m = l.len();
    // sentinel ranks first
    let rank = |c: Symbol| if c == t.sigma { 0 } else { c as usize + 1 };
    let mut first = vec![0usize; sigma + 2];
    for &c in l {
        first[rank(c)] += 1;
    }
    let mut acc = 0;
    for f in first.iter_mut() {
        let here = *f;
        *f = acc;
        acc += here;
    }
    let mut seen = vec![0usize; sigma + 2];
    let lf: Vec<usize> = l
        .iter()
        .map(|&c| {
            let r = rank(c);
            seen[r] += 1;
            first[r] + seen[r] - 1
        })
        .collect();

    // row 0 is the sentinel suffix; its preceding symbol is the last one of s
    let mut out = vec![0; m - 1];
    let mut row = 0;
    for slot in out.iter_mut().rev() {
        let c = l[row];
        if c == t.sigma {
            return Err(Error::MalformedTransform("LF walk does not visit every position"));
        }
        *slot = c;
        row = lf[row];
    }
    if l[row] != t.sigma {
        return Err(Error::MalformedTransform("LF walk does not visit every position"));
    }
    Ok(out)
}

/// Recency list for move-to-front coding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtfState {
    list: Vec<Symbol>,
}

impl MtfState {
    pub fn new(sigma: u32) -> Self {
        Self {
            list: (0..sigma).collect(),
        }
    }

    pub fn list(&self) -> &[Symbol] {
        &self.list
    }

    pub fn encode(&mut self, symbol: Symbol) -> Result<u32> {
        let pos = self
            .list
            .iter()
            .position(|&c| c == symbol)
            .ok_or(Error::SymbolOutOfRange {
                symbol,
                sigma: self.list.len() as u32,
            })?;
        self.list[..=pos].rotate_right(1);
        Ok(pos as u32)
    }

    pub fn decode(&mut self, index: u32) -> Result<Symbol> {
        let pos = index as usize;
        if pos >= self.list.len() {
            return Err(Error::corrupt("move-to-front index outside the list"));
        }
        let symbol = self.list[pos];
        self.list[..=pos].rotate_right(1);
        Ok(symbol)
    }
}

pub fn mtf_encode(s: &[Symbol], sigma: u32) -> Result<Vec<u32>> {
    let mut state = MtfState::new(sigma);
    s.iter().map(|&c| state.encode(c)).collect()
}

pub fn mtf_decode(indices: &[u32], sigma: u32) -> Result<Vec<Symbol>> {
    let mut state = MtfState::new(sigma);
    indices.iter().map(|&i| state.decode(i)).collect()
}

/// Output of zero-run coding: a maximal run of zero indices, or a nonzero index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Run(u64),
    Index(u32),
}

impl Token {
    /// Symbol in the token alphabet: 0 for runs, the index itself otherwise.
    pub fn id(self) -> Symbol {
        match self {
            Token::Run(_) => 0,
            Token::Index(i) => i,
        }
    }
}

pub fn rle0_encode(indices: &[u32]) -> Vec<Token> {
    let mut out = Vec::new();
    let mut run = 0u64;
    for &i in indices {
        if i == 0 {
            run += 1;
            continue;
        }
        if run > 0 {
            out.push(Token::Run(run));
            run = 0;
        }
        out.push(Token::Index(i));
    }
    if run > 0 {
        out.push(Token::Run(run));
    }
    out
}

pub fn rle0_decode(tokens: &[Token]) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    let mut after_run = false;
    for &t in tokens {
        match t {
            Token::Run(0) => return Err(Error::MalformedToken("empty run")),
            Token::Run(_) if after_run => return Err(Error::MalformedToken("adjacent runs")),
            Token::Run(len) => {
                out.extend(std::iter::repeat_n(0, len as usize));
                after_run = true;
            }
            Token::Index(0) => return Err(Error::MalformedToken("zero index outside a run")),
            Token::Index(i) => {
                out.push(i);
                after_run = false;
            }
        }
    }
    Ok(out)
}

/// Intermediate results of each stage, for inspection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stages {
    pub bwt: BwtString,
    pub mtf: Vec<u32>,
    pub tokens: Vec<Token>,
}

pub fn pipeline_stages(s: &[Symbol], sigma: u32) -> Result<Stages> {
    let t = bwt(s, sigma).map_err(|e| e.in_stage("bwt"))?;
    let mtf = mtf_encode(t.symbols(), sigma + 1).map_err(|e| e.in_stage("mtf"))?;
    let tokens = rle0_encode(&mtf);
    Ok(Stages { bwt: t, mtf, tokens })
}

/// Compresses `s`; the token alphabet has `sigma + 1` symbols.
///
/// Layout: `gamma(tokens + 1)`, then per token its adaptive codeword,
/// followed by `gamma(len)` for run tokens.
pub fn pipeline_compress(s: &[Symbol], sigma: u32) -> Result<BitSink> {
    let stages = pipeline_stages(s, sigma)?;
    let mut sink = BitSink::new();
    write_tokens(&stages.tokens, sigma, &mut sink).map_err(|e| e.in_stage("entropy"))?;
    Ok(sink)
}

fn write_tokens(tokens: &[Token], sigma: u32, sink: &mut BitSink) -> Result<()> {
    let count = tokens.len() as u64;
    sink.write_gamma(count + 1)?;
    let mut enc = AdaptiveEncoder::new(sigma as usize + 1, LengthHint::Known(count))?;
    for &t in tokens {
        enc.encode_symbol(t.id(), sink)?;
        if let Token::Run(len) = t {
            sink.write_gamma(len)?;
        }
    }
    Ok(())
}

/// Reads tokens whose runs and indices expand to exactly `expected` MTF indices.
fn read_tokens(src: &mut BitSource<'_>, sigma: u32, expected: u64) -> Result<Vec<Token>> {
    let count = src.read_gamma()? - 1;
    // every token costs at least one bit
    if count > src.remaining() || count > expected {
        return Err(Error::corrupt("token count exceeds the stream"));
    }
    let mut dec = AdaptiveDecoder::new(sigma as usize + 1, LengthHint::Known(count))?;
    let mut tokens = Vec::with_capacity(count as usize);
    let mut covered = 0u64;
    for _ in 0..count {
        let id = dec.decode_symbol(src)?;
        let t = if id == 0 {
            Token::Run(src.read_gamma()?)
        } else {
            Token::Index(id)
        };
        covered = covered.saturating_add(match t {
            Token::Run(len) => len,
            Token::Index(_) => 1,
        });
        if covered > expected {
            return Err(Error::corrupt("tokens expand past the input length"));
        }
        tokens.push(t);
    }
    if covered != expected {
        return Err(Error::corrupt("tokens do not cover the input length"));
    }
    Ok(tokens)
}

/// Decodes an `n`-symbol input from the front of `src`.
pub fn pipeline_decompress_from(src: &mut BitSource<'_>, sigma: u32, n: u64) -> Result<Vec<Symbol>> {
    let tokens = read_tokens(src, sigma, n + 1).map_err(|e| e.in_stage("entropy"))?;
    let mtf = rle0_decode(&tokens).map_err(|e| e.in_stage("rle0"))?;
    let symbols = mtf_decode(&mtf, sigma + 1).map_err(|e| e.in_stage("mtf"))?;
    let t = BwtString::new(symbols, sigma).map_err(|e| e.in_stage("bwt"))?;
    ibwt(&t).map_err(|e| e.in_stage("bwt"))
}

/// Decodes exactly the bits in `bits`; leftover bits are an error.
pub fn pipeline_decompress(bits: &BitSink, sigma: u32, n: u64) -> Result<Vec<Symbol>> {
    let mut src = bits.reader();
    let out = pipeline_decompress_from(&mut src, sigma, n)?;
    if src.remaining() != 0 {
        return Err(Error::corrupt("trailing bits after the token stream").in_stage("entropy"));
    }
    Ok(out)
}
