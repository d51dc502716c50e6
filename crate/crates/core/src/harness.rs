//! One-pass driver with working-state accounting.
//!
//! A processor sees each symbol exactly once, in order. The driver polls the
//! processor's self-reported state size every `ceil(n/1024)` symbols and once
//! more after the last symbol.

use serde::{Deserialize, Serialize};

use crate::adaptive::{AdaptiveEncoder, LengthHint};
use crate::bitio::BitSink;
use crate::bounded::{BoundedParams, OnePassEncoder};
use crate::comparison_sorter::WeightedTree;
use crate::error::Result;
use crate::online_sorter::{FinalizedLists, GapListSet};
use crate::Symbol;

/// A consumer of a single forward scan.
pub trait StreamProcessor {
    type Output;

    /// Short name used in reports.
    fn name(&self) -> &'static str;

    fn on_symbol(&mut self, symbol: Symbol) -> Result<()>;

    /// Working state in bits, excluding any resident outer block.
    fn state_size_bits(&self) -> u64;

    /// Size of the currently loaded input block, for block-resident codecs.
    fn resident_block_bits(&self) -> Option<u64> {
        None
    }

    fn finish(self) -> Result<Self::Output>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamAccount {
    pub codec: String,
    pub n: u64,
    pub passes: u32,
    pub polls: u64,
    pub peak_state_bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_resident_block_bits: Option<u64>,
}

impl StreamAccount {
    fn poll<P: StreamProcessor>(&mut self, p: &P) {
        self.polls += 1;
        self.peak_state_bits = self.peak_state_bits.max(p.state_size_bits());
        if let Some(r) = p.resident_block_bits() {
            let peak = self.peak_resident_block_bits.get_or_insert(0);
            *peak = (*peak).max(r);
        }
    }
}

/// Polling interval `max(1, ceil(n / 1024))`.
pub fn poll_interval(n: u64) -> u64 {
    n.div_ceil(1024).max(1)
}

/// Feeds `input` to `processor` once and returns its output with the account.
pub fn run_one_pass<P, I>(mut processor: P, input: I) -> Result<(P::Output, StreamAccount)>
where
    P: StreamProcessor,
    I: IntoIterator<Item = Symbol>,
    I::IntoIter: ExactSizeIterator,
{
    let input = input.into_iter();
    let n = input.len() as u64;
    let every = poll_interval(n);
    let mut account = StreamAccount {
        codec: processor.name().to_string(),
        n,
        passes: 1,
        polls: 0,
        peak_state_bits: 0,
        peak_resident_block_bits: None,
    };
    let mut seen = 0u64;
    for symbol in input {
        processor.on_symbol(symbol)?;
        seen += 1;
        if seen % every == 0 {
            account.poll(&processor);
        }
    }
    if seen % every != 0 || seen == 0 {
        account.poll(&processor);
    }
    Ok((processor.finish()?, account))
}

pub struct AdaptiveProcessor {
    encoder: AdaptiveEncoder,
    sink: BitSink,
}

impl AdaptiveProcessor {
    pub fn new(sigma: usize, hint: LengthHint) -> Result<Self> {
        Ok(Self {
            encoder: AdaptiveEncoder::new(sigma, hint)?,
            sink: BitSink::new(),
        })
    }
}

impl StreamProcessor for AdaptiveProcessor {
    type Output = BitSink;

    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn on_symbol(&mut self, symbol: Symbol) -> Result<()> {
        self.encoder.encode_symbol(symbol, &mut self.sink).map(|_| ())
    }

    fn state_size_bits(&self) -> u64 {
        self.encoder.model().state_size_bits()
    }

    fn finish(self) -> Result<BitSink> {
        Ok(self.sink)
    }
}

#[derive(Default)]
pub struct GapListProcessor {
    set: GapListSet,
}

impl GapListProcessor {
    pub fn new() -> Self {
        Self::default()
    }
}

impl StreamProcessor for GapListProcessor {
    type Output = FinalizedLists;

    fn name(&self) -> &'static str {
        "gaplists"
    }

    fn on_symbol(&mut self, symbol: Symbol) -> Result<()> {
        self.set.push(symbol)
    }

    fn state_size_bits(&self) -> u64 {
        self.set.state_size_bits()
    }

    fn finish(self) -> Result<FinalizedLists> {
        self.set.finalize()
    }
}

pub struct BoundedProcessor {
    encoder: OnePassEncoder,
}

impl BoundedProcessor {
    pub fn new(params: BoundedParams) -> Self {
        Self {
            encoder: OnePassEncoder::new(params),
        }
    }
}

impl StreamProcessor for BoundedProcessor {
    type Output = BitSink;

    fn name(&self) -> &'static str {
        "bounded"
    }

    fn on_symbol(&mut self, symbol: Symbol) -> Result<()> {
        self.encoder.push(symbol)
    }

    fn state_size_bits(&self) -> u64 {
        self.encoder.state_size_bits()
    }

    fn resident_block_bits(&self) -> Option<u64> {
        Some(self.encoder.resident_block_bits())
    }

    fn finish(self) -> Result<BitSink> {
        self.encoder.finish()
    }
}

#[derive(Default)]
pub struct ComparisonProcessor {
    tree: WeightedTree<Symbol>,
}

impl ComparisonProcessor {
    pub fn new() -> Self {
        Self::default()
    }
}

impl StreamProcessor for ComparisonProcessor {
    type Output = WeightedTree<Symbol>;

    fn name(&self) -> &'static str {
        "sortcmp"
    }

    fn on_symbol(&mut self, symbol: Symbol) -> Result<()> {
        self.tree.push(symbol);
        Ok(())
    }

    fn state_size_bits(&self) -> u64 {
        self.tree.state_size_bits()
    }

    fn finish(self) -> Result<WeightedTree<Symbol>> {
        Ok(self.tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::encode_stream;
    use crate::bounded::one_pass_encode;
    use crate::online_sorter::sort_permutation;

    #[derive(Default)]
    struct Recorder {
        seen: Vec<Symbol>,
    }

    impl StreamProcessor for Recorder {
        type Output = Vec<Symbol>;

        fn name(&self) -> &'static str {
            "recorder"
        }

        fn on_symbol(&mut self, symbol: Symbol) -> Result<()> {
            self.seen.push(symbol);
            Ok(())
        }

        fn state_size_bits(&self) -> u64 {
            self.seen.len() as u64
        }

        fn finish(self) -> Result<Vec<Symbol>> {
            Ok(self.seen)
        }
    }

    #[test]
    fn poll_schedule() {
        assert_eq!(poll_interval(0), 1);
        assert_eq!(poll_interval(1024), 1);
        assert_eq!(poll_interval(1025), 2);
        let (seen, account) = run_one_pass(Recorder::default(), 0..3000u32).unwrap();
        assert_eq!(seen, (0..3000).collect::<Vec<_>>());
        // every 3 symbols: 1000 polls, the last one on symbol 3000
        assert_eq!(account.polls, 1000);
        assert_eq!(account.peak_state_bits, 3000);
        assert_eq!(account.passes, 1);
        let (_, account) = run_one_pass(Recorder::default(), 0..3001u32).unwrap();
        assert_eq!(account.polls, 1001);
        assert_eq!(account.peak_state_bits, 3001);
    }

    #[test]
    fn outputs_match_the_direct_encoders() {
        let s: Vec<Symbol> = (0..5000u32).map(|i| (i * i % 7) % 5).collect();
        let (bits, acc) =
            run_one_pass(AdaptiveProcessor::new(5, LengthHint::Known(5000)).unwrap(), s.clone()).unwrap();
        assert_eq!(bits, encode_stream(&s, 5, LengthHint::Known(5000)).unwrap());
        assert!(acc.peak_resident_block_bits.is_none());

        let params = BoundedParams::new(5, 1.0, 1, 1.0).unwrap();
        let (bits, acc) = run_one_pass(BoundedProcessor::new(params), s.clone()).unwrap();
        assert_eq!(bits, one_pass_encode(&s, params).unwrap());
        assert_eq!(acc.peak_state_bits, params.state_size_bits());
        assert!(acc.peak_resident_block_bits.unwrap() > 0);

        let (lists, _) = run_one_pass(GapListProcessor::new(), s.clone()).unwrap();
        assert_eq!(lists, sort_permutation(&s).unwrap());
    }

    #[test]
    fn account_serializes_as_one_json_object() {
        let (_, acc) = run_one_pass(GapListProcessor::new(), vec![1, 2, 1]).unwrap();
        let json = serde_json::to_string(&acc).unwrap();
        assert!(!json.contains('\n'));
        let back: StreamAccount = serde_json::from_str(&json).unwrap();
        assert_eq!(back, acc);
    }
}
