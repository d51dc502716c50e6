use super::order_k::{context_count, decode_order_k, encode_order_k, DEFAULT_CONTEXT_BUDGET};
use super::quantize::{Lambda, QuantizedDistribution, Slack, MAX_SIGMA};
use crate::bitio::{bits_for, BitSink, BitSource};
use crate::error::{Error, Result};
use crate::Symbol;

/// Outer-block constant, chosen so that every block's fixed overhead is at
/// most `CALIBRATED_C * sigma^(k + 1/lambda) * log2(sigma)` bits on the
/// calibration grid (see the `calibration` test).
pub const CALIBRATED_C: u32 = 16;

/// Parameters shared by the one-pass encoder and decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundedParams {
    pub sigma: u32,
    pub lambda: Lambda,
    pub k: u32,
    pub mu: Slack,
    pub c: u32,
}

impl BoundedParams {
    pub fn new(sigma: u32, lambda: f64, k: u32, mu: f64) -> Result<Self> {
        Self::from_parts(sigma, Lambda::from_f64(lambda)?, k, Slack::from_f64(mu)?, CALIBRATED_C)
    }

    pub fn from_parts(sigma: u32, lambda: Lambda, k: u32, mu: Slack, c: u32) -> Result<Self> {
        if sigma == 0 || sigma > MAX_SIGMA {
            return Err(Error::InvalidParameter(format!("alphabet size {sigma}")));
        }
        if c == 0 {
            return Err(Error::InvalidParameter("block constant must be positive".into()));
        }
        context_count(sigma, k, DEFAULT_CONTEXT_BUDGET)?;
        Ok(Self {
            sigma,
            lambda,
            k,
            mu,
            c,
        })
    }

    /// `sigma^(k + 1/lambda) * log2(sigma)`, the per-block overhead scale.
    pub fn overhead_scale(&self) -> f64 {
        let s = self.sigma as f64;
        s.powf(self.k as f64 + 1.0 / self.lambda.value()) * s.log2()
    }

    /// Outer block length `ceil((2c/mu) sigma^(k+1/lambda) log2 sigma)`, at least `k + 1`.
    pub fn outer_block_len(&self) -> usize {
        let b = (2.0 * self.c as f64 / self.mu.value() * self.overhead_scale()).ceil();
        (b as usize).max(self.k as usize + 1)
    }

    /// Slack handed to each block's order-k coder.
    pub fn block_slack(&self) -> Slack {
        self.mu.half()
    }

    /// Fraction bits used by the block code's probabilities.
    pub fn precision_bits(&self) -> u32 {
        let q = QuantizedDistribution::from_heavy(self.sigma as usize, self.block_slack().half().r_fixed(), vec![])
            .expect("valid parameters");
        q.precision_bits()
    }

    /// Working state of the encoder in bits, excluding the resident block.
    ///
    /// Depends on the parameters only.
    pub fn state_size_bits(&self) -> u64 {
        let word = 64u64;
        let sym = 32u64;
        let b = self.outer_block_len() as u64;
        let sigma = self.sigma as u64;
        let contexts = (self.sigma as u64).pow(self.k);
        let buckets = b * sym + contexts * 3 * word;
        let counts = sigma * word;
        let tables = (2 * sigma + 1) * word + sigma * (sym + word);
        let l = self.block_slack().inner_block_len() as u64;
        let register = self.precision_bits() as u64 * l + 1 + word;
        buckets + counts + tables + 4 * register + 8 * word
    }
}

/// Streams symbols into outer blocks and codes each block independently.
#[derive(Debug)]
pub struct OnePassEncoder {
    params: BoundedParams,
    block_len: usize,
    buffer: Vec<Symbol>,
    sink: BitSink,
    blocks: u64,
}

impl OnePassEncoder {
    pub fn new(params: BoundedParams) -> Self {
        let block_len = params.outer_block_len();
        Self {
            params,
            block_len,
            buffer: Vec::with_capacity(block_len),
            sink: BitSink::new(),
            blocks: 0,
        }
    }

    pub fn params(&self) -> &BoundedParams {
        &self.params
    }

    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    pub fn push(&mut self, symbol: Symbol) -> Result<()> {
        if symbol >= self.params.sigma {
            return Err(Error::SymbolOutOfRange {
                symbol,
                sigma: self.params.sigma,
            });
        }
        self.buffer.push(symbol);
        if self.buffer.len() == self.block_len {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        let p = &self.params;
        self.sink.write_gamma(self.buffer.len() as u64)?;
        encode_order_k(
            &self.buffer,
            p.sigma,
            p.lambda,
            p.k,
            p.block_slack(),
            DEFAULT_CONTEXT_BUDGET,
            &mut self.sink,
        )?;
        self.buffer.clear();
        self.blocks += 1;
        Ok(())
    }

    /// Symbols currently held in the block buffer, in bits.
    pub fn resident_block_bits(&self) -> u64 {
        self.buffer.len() as u64 * bits_for(self.params.sigma as u64) as u64
    }

    pub fn state_size_bits(&self) -> u64 {
        self.params.state_size_bits()
    }

    /// Output produced so far (complete blocks only).
    pub fn output_bits(&self) -> u64 {
        self.sink.len()
    }

    pub fn finish(mut self) -> Result<BitSink> {
        self.flush()?;
        Ok(self.sink)
    }
}

pub fn one_pass_encode(s: &[Symbol], params: BoundedParams) -> Result<BitSink> {
    let mut enc = OnePassEncoder::new(params);
    for &c in s {
        enc.push(c)?;
    }
    enc.finish()
}

/// Decodes `n` symbols block by block from the front of `src`.
pub fn one_pass_decode(src: &mut BitSource<'_>, params: BoundedParams, n: u64) -> Result<Vec<Symbol>> {
    let block_len = params.outer_block_len() as u64;
    let mut out = Vec::with_capacity(n.min(1 << 24) as usize);
    while (out.len() as u64) < n {
        let len = src.read_gamma()?;
        let left = n - out.len() as u64;
        if len > block_len || len > left || (len < block_len && len != left) {
            return Err(Error::corrupt("outer block length out of place"));
        }
        let block = decode_order_k(
            src,
            len as usize,
            params.sigma,
            params.k,
            params.block_slack(),
            DEFAULT_CONTEXT_BUDGET,
        )?;
        out.extend(block);
    }
    Ok(out)
}
