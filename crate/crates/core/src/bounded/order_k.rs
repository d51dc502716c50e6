use super::quantize::{quantize, Lambda, QuantizedDistribution, Slack};
use super::sfe;
use crate::bitio::{bits_for, BitSink, BitSource};
use crate::error::{Error, Result};
use crate::Symbol;

/// Default cap on the number of order-k contexts.
pub const DEFAULT_CONTEXT_BUDGET: u64 = 1 << 20;

/// `sigma^k`, or an error when it exceeds `budget`.
pub fn context_count(sigma: u32, k: u32, budget: u64) -> Result<usize> {
    let contexts = (sigma as u128).checked_pow(k).unwrap_or(u128::MAX);
    if contexts > budget as u128 {
        return Err(Error::ContextSpace { contexts, budget });
    }
    Ok(contexts as usize)
}

fn check_symbols(s: &[Symbol], sigma: u32) -> Result<()> {
    match s.iter().find(|&&c| c >= sigma) {
        Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, sigma }),
        None => Ok(()),
    }
}

/// Codes `x` with one quantized distribution; the decoder must know `x.len()`.
///
/// `Q` is built with slack `mu/2` and full inner blocks have length
/// `ceil(4/mu)`, so the two-bit block overhead costs at most `mu/2` per
/// symbol. A short final block is written raw.
pub fn encode_order0(
    x: &[Symbol],
    sigma: u32,
    lambda: Lambda,
    mu: Slack,
    sink: &mut BitSink,
) -> Result<()> {
    if x.is_empty() {
        return Ok(());
    }
    check_symbols(x, sigma)?;
    let mut counts = vec![0u64; sigma as usize];
    for &c in x {
        counts[c as usize] += 1;
    }
    let q = quantize(&counts, lambda, mu.half())?;
    q.write_header(sink)?;
    let block_len = mu.inner_block_len();
    let raw = bits_for(sigma as u64);
    for block in x.chunks(block_len) {
        if block.len() == block_len {
            sfe::encode_block(&q, block, sink)?;
        } else {
            for &c in block {
                sink.write_fixed(c as u64, raw)?;
            }
        }
    }
    Ok(())
}

pub fn decode_order0(src: &mut BitSource<'_>, len: usize, sigma: u32, mu: Slack) -> Result<Vec<Symbol>> {
    if len == 0 {
        return Ok(Vec::new());
    }
    let q = QuantizedDistribution::read_header(src, sigma as usize, mu.half().r_fixed())?;
    let block_len = mu.inner_block_len();
    let raw = bits_for(sigma as u64);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let left = len - out.len();
        if left >= block_len {
            out.extend(sfe::decode_block(&q, block_len, src)?);
        } else {
            for _ in 0..left {
                let c = src.read_fixed(raw)?;
                if c >= sigma as u64 {
                    return Err(Error::corrupt("raw symbol outside the alphabet"));
                }
                out.push(c as Symbol);
            }
        }
    }
    Ok(out)
}

/// Codes `s` by applying the order-0 scheme to each context's successors.
///
/// Layout: the first `k` symbols raw, then for every context in
/// lexicographic order `gamma(len + 1)` followed by its order-0 code.
pub fn encode_order_k(
    s: &[Symbol],
    sigma: u32,
    lambda: Lambda,
    k: u32,
    mu: Slack,
    budget: u64,
    sink: &mut BitSink,
) -> Result<()> {
    let contexts = context_count(sigma, k, budget)?;
    check_symbols(s, sigma)?;
    let raw = bits_for(sigma as u64);
    let head = s.len().min(k as usize);
    for &c in &s[..head] {
        sink.write_fixed(c as u64, raw)?;
    }
    if s.len() <= k as usize {
        return Ok(());
    }
    let mut buckets: Vec<Vec<Symbol>> = vec![Vec::new(); contexts];
    let mut ctx = s[..head]
        .iter()
        .fold(0usize, |acc, &c| acc * sigma as usize + c as usize);
    for &c in &s[head..] {
        buckets[ctx].push(c);
        if contexts > 1 {
            ctx = (ctx * sigma as usize + c as usize) % contexts;
        }
    }
    for bucket in &buckets {
        sink.write_gamma(bucket.len() as u64 + 1)?;
        encode_order0(bucket, sigma, lambda, mu, sink)?;
    }
    Ok(())
}

pub fn decode_order_k(
    src: &mut BitSource<'_>,
    n: usize,
    sigma: u32,
    k: u32,
    mu: Slack,
    budget: u64,
) -> Result<Vec<Symbol>> {
    let contexts = context_count(sigma, k, budget)?;
    let raw = bits_for(sigma as u64);
    let head = n.min(k as usize);
    let mut out = Vec::with_capacity(n);
    for _ in 0..head {
        let c = src.read_fixed(raw)?;
        if c >= sigma as u64 {
            return Err(Error::corrupt("raw symbol outside the alphabet"));
        }
        out.push(c as Symbol);
    }
    if n <= k as usize {
        return Ok(out);
    }
    let mut buckets = Vec::with_capacity(contexts);
    let mut total = 0usize;
    for _ in 0..contexts {
        let len = src.read_gamma()? - 1;
        if len > (n - head - total) as u64 {
            return Err(Error::corrupt("context lengths exceed the block length"));
        }
        total += len as usize;
        buckets.push(decode_order0(src, len as usize, sigma, mu)?.into_iter());
    }
    if total != n - head {
        return Err(Error::corrupt("context lengths do not cover the block"));
    }
    let mut ctx = out.iter().fold(0usize, |acc, &c| acc * sigma as usize + c as usize);
    while out.len() < n {
        let c = buckets[ctx]
            .next()
            .ok_or_else(|| Error::corrupt("context ran out of symbols"))?;
        out.push(c);
        if contexts > 1 {
            ctx = (ctx * sigma as usize + c as usize) % contexts;
        }
    }
    Ok(out)
}
