//! Shannon-Fano-Elias coding of fixed-length blocks in exact arithmetic.
//!
//! A block `x` of `L` symbols owns the interval `[Pr[X < x], Pr[X <= x])`
//! under the product distribution `Q^L`. Its codeword is the first
//! `ceil(log2(2 / Pr[X = x]))` bits of the interval midpoint. Every
//! probability is a multiple of `2^-(wL)`, so big integers carry the
//! computation without rounding.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::quantize::QuantizedDistribution;
use crate::bitio::{BitSink, BitSource};
use crate::error::{Error, Result};
use crate::Symbol;

/// Interval of `block` scaled by `2^(wL)`: `(low, width)`.
fn interval(q: &QuantizedDistribution, block: &[Symbol]) -> Result<(BigUint, BigUint)> {
    let w = q.precision_bits() as u64;
    let mut low = BigUint::zero();
    let mut width = BigUint::one() << (w * block.len() as u64);
    for &s in block {
        if s >= q.sigma() {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                sigma: q.sigma(),
            });
        }
        if q.q(s) == 0 {
            return Err(Error::ZeroProbability);
        }
        low += (&width * q.cum(s)) >> w;
        width = (&width * q.q(s)) >> w;
    }
    Ok((low, width))
}

/// Codeword value and length, given the final interval.
fn codeword_of(low: &BigUint, width: &BigUint) -> (BigUint, u64) {
    let shift = width.bits() - 1;
    let mid: BigUint = (low << 1u32) + width;
    (mid >> shift, shift)
}

/// Codeword for `block` as `(value, length in bits)`.
pub fn block_codeword(q: &QuantizedDistribution, block: &[Symbol]) -> Result<(BigUint, u64)> {
    let (low, width) = interval(q, block)?;
    let (code, shift) = codeword_of(&low, &width);
    let scale_bits = q.precision_bits() as u64 * block.len() as u64 + 1;
    Ok((code, scale_bits - shift))
}

fn write_big(sink: &mut BitSink, value: &BigUint, len: u64) {
    for i in (0..len).rev() {
        sink.push_bit(value.bit(i));
    }
}

/// Appends the codeword for `block`; returns its length.
pub fn encode_block(q: &QuantizedDistribution, block: &[Symbol], sink: &mut BitSink) -> Result<u64> {
    let (code, len) = block_codeword(q, block)?;
    write_big(sink, &code, len);
    Ok(len)
}

fn peek_big(src: &BitSource<'_>, width: u64) -> BigUint {
    let mut v = BigUint::zero();
    let mut off = 0;
    while off < width {
        let take = (width - off).min(64) as u32;
        v = (v << take) + src.peek_padded_at(off, take);
        off += take as u64;
    }
    v
}

/// Decodes one block of `len` symbols by descending through the intervals.
pub fn decode_block(q: &QuantizedDistribution, len: usize, src: &mut BitSource<'_>) -> Result<Vec<Symbol>> {
    let w = q.precision_bits() as u64;
    let scale_bits = w * len as u64 + 1;
    let window = peek_big(src, scale_bits);
    let mut low = BigUint::zero();
    let mut width = BigUint::one() << (w * len as u64);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let twice_low: BigUint = &low << 1u32;
        if window < twice_low {
            return Err(Error::corrupt("block codeword below its interval"));
        }
        let t = ((&window - twice_low) << w) / (&width << 1u32);
        let t = t
            .to_u64()
            .ok_or_else(|| Error::corrupt("block codeword above its interval"))?;
        let s = q
            .locate(t)
            .ok_or_else(|| Error::corrupt("block codeword in unassigned probability mass"))?;
        low += (&width * q.cum(s)) >> w;
        width = (&width * q.q(s)) >> w;
        out.push(s);
    }
    let (code, shift) = codeword_of(&low, &width);
    let code_len = scale_bits - shift;
    if window >> shift != code {
        return Err(Error::corrupt("block codeword does not match its decoding"));
    }
    src.skip(code_len)?;
    Ok(out)
}
