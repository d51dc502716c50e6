//! One-pass computation of the stable-sort permutation.
//!
//! Each distinct symbol owns a list of the positions where it occurs,
//! stored as gamma-coded gaps. A run of gaps equal to one is written as a
//! single `γ(1)` followed by `γ(run length)`. The lists hang off a splay
//! tree keyed by symbol, so reading them in key order yields the
//! permutation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::bitio::{bits_for, BitSink, BitSource};
use crate::error::{Error, Result};
use crate::splay::SplayTree;
use crate::Symbol;

#[derive(Clone, Debug)]
pub struct GapList {
    bits: BitSink,
    last_pos: u64,
    run_pending: u64,
    count: u64,
}

impl GapList {
    fn start(pos: u64) -> Self {
        let mut bits = BitSink::new();
        bits.write_gamma(pos).expect("positions are positive");
        Self {
            bits,
            last_pos: pos,
            run_pending: 0,
            count: 1,
        }
    }

    fn append(&mut self, pos: u64) -> Result<()> {
        let gap = pos - self.last_pos;
        if gap == 1 {
            if self.run_pending > 0 {
                self.run_pending += 1;
            } else {
                self.bits.write_gamma(1)?;
                self.run_pending = 1;
            }
        } else {
            self.flush()?;
            self.bits.write_gamma(gap)?;
        }
        self.last_pos = pos;
        self.count += 1;
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        if self.run_pending > 0 {
            self.bits.write_gamma(self.run_pending)?;
            self.run_pending = 0;
        }
        Ok(())
    }

    /// Encoded bits written so far (an open run's length is not yet included).
    pub fn bits(&self) -> &BitSink {
        &self.bits
    }

    pub fn last_position(&self) -> u64 {
        self.last_pos
    }

    pub fn run_pending(&self) -> u64 {
        self.run_pending
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Decodes the positions stored so far, including an open run.
    pub fn positions(&self) -> Result<Vec<u64>> {
        let mut dec = GapDecoder::new(self.bits.reader(), self.count, u64::MAX);
        dec.open_run = Some(self.run_pending);
        (0..self.count).map(|_| dec.next_position()).collect()
    }
}

/// Streams positions out of one encoded list.
struct GapDecoder<'a> {
    src: BitSource<'a>,
    remaining: u64,
    last: u64,
    run_left: u64,
    max_pos: u64,
    // length of a run whose terminating gamma has not been written yet
    open_run: Option<u64>,
}

impl<'a> GapDecoder<'a> {
    fn new(src: BitSource<'a>, count: u64, max_pos: u64) -> Self {
        Self {
            src,
            remaining: count,
            last: 0,
            run_left: 0,
            max_pos,
            open_run: None,
        }
    }

    fn next_position(&mut self) -> Result<u64> {
        if self.remaining == 0 {
            return Err(Error::corrupt("gap list exhausted"));
        }
        self.remaining -= 1;
        let pos = if self.run_left > 0 {
            self.run_left -= 1;
            self.last + 1
        } else if self.last == 0 {
            self.src.read_gamma()?
        } else {
            let gap = self.src.read_gamma()?;
            if gap == 1 {
                let run = if self.src.remaining() == 0 {
                    self.open_run.ok_or(Error::Truncated)?
                } else {
                    self.src.read_gamma()?
                };
                self.run_left = run - 1;
            }
            self.last
                .checked_add(gap)
                .ok_or_else(|| Error::corrupt("position overflow"))?
        };
        if pos > self.max_pos {
            return Err(Error::corrupt("position beyond the input length"));
        }
        self.last = pos;
        Ok(pos)
    }

    fn next(&mut self) -> Result<Option<u64>> {
        if self.remaining == 0 {
            Ok(None)
        } else {
            self.next_position().map(Some)
        }
    }
}

/// Gap lists under construction, one per distinct symbol seen.
#[derive(Clone, Debug, Default)]
pub struct GapListSet {
    tree: SplayTree<Symbol, GapList>,
    processed: u64,
}

impl GapListSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn distinct(&self) -> usize {
        self.tree.len()
    }

    /// Records that `symbol` occurs at 1-based position `j`.
    pub fn process(&mut self, j: u64, symbol: Symbol) -> Result<()> {
        if j <= self.processed {
            return Err(Error::NonMonotonePosition {
                last: self.processed,
                got: j,
            });
        }
        let (list, fresh) = self.tree.entry(symbol, || GapList::start(j));
        if !fresh {
            list.append(j)?;
        }
        self.processed = j;
        Ok(())
    }

    /// Records `symbol` at the next position.
    pub fn push(&mut self, symbol: Symbol) -> Result<()> {
        self.process(self.processed + 1, symbol)
    }

    pub fn list(&mut self, symbol: Symbol) -> Option<&GapList> {
        self.tree.get_mut(&symbol).map(|l| &*l)
    }

    pub fn tree(&self) -> &SplayTree<Symbol, GapList> {
        &self.tree
    }

    /// Bits currently held: list encodings plus last position and open run per symbol.
    pub fn state_size_bits(&self) -> u64 {
        let word = bits_for(self.processed + 1) as u64;
        self.tree
            .iter()
            .map(|(_, l)| l.bits.capacity_bits() + 2 * word + 32)
            .sum()
    }

    pub fn finalize(self) -> Result<FinalizedLists> {
        let n = self.processed;
        let lists = self
            .tree
            .into_sorted()
            .into_iter()
            .map(|(symbol, mut list)| {
                list.flush()?;
                Ok(EncodedList {
                    symbol,
                    count: list.count,
                    bits: list.bits,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FinalizedLists { lists, n })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedList {
    pub symbol: Symbol,
    pub count: u64,
    pub bits: BitSink,
}

/// Completed lists in increasing symbol order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalizedLists {
    lists: Vec<EncodedList>,
    n: u64,
}

impl FinalizedLists {
    pub fn lists(&self) -> &[EncodedList] {
        &self.lists
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn decoders(&self) -> Vec<GapDecoder<'_>> {
        self.lists
            .iter()
            .map(|l| GapDecoder::new(l.bits.reader(), l.count, self.n))
            .collect()
    }

    /// The stable-sort permutation, 1-based.
    pub fn permutation(&self) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(self.n as usize);
        for mut dec in self.decoders() {
            while let Some(p) = dec.next()? {
                out.push(p);
            }
            if dec.src.remaining() != 0 {
                return Err(Error::corrupt("bits left over in a gap list"));
            }
        }
        Ok(out)
    }

    /// Replays the input by merging the lists on their next positions.
    pub fn recover_input(&self) -> Result<Vec<Symbol>> {
        let mut decoders = self.decoders();
        let mut heap = BinaryHeap::with_capacity(decoders.len());
        for (i, dec) in decoders.iter_mut().enumerate() {
            if let Some(p) = dec.next()? {
                heap.push(Reverse((p, i)));
            }
        }
        let mut out = Vec::with_capacity(self.n as usize);
        while let Some(Reverse((pos, i))) = heap.pop() {
            if pos != out.len() as u64 + 1 {
                return Err(Error::corrupt("gap lists do not cover every position once"));
            }
            out.push(self.lists[i].symbol);
            if let Some(next) = decoders[i].next()? {
                heap.push(Reverse((next, i)));
            }
        }
        if out.len() as u64 != self.n || decoders.iter().any(|d| d.src.remaining() != 0) {
            return Err(Error::corrupt("gap lists do not cover every position once"));
        }
        Ok(out)
    }

    /// Bits in the list encodings alone.
    pub fn encoded_bits(&self) -> u64 {
        self.lists.iter().map(|l| l.bits.len()).sum()
    }

    /// List encodings plus a key and a count of `ceil(log2(n+1))` bits per list.
    pub fn encoding_size_bits(&self) -> u64 {
        let word = bits_for(self.n + 1) as u64;
        self.encoded_bits() + self.lists.len() as u64 * 2 * word
    }

    /// `gamma(lists+1)`, then per list: key, `gamma(count)`, `gamma(bit length)`, bits.
    pub fn write_to(&self, sink: &mut BitSink, key_width: u32) -> Result<()> {
        sink.write_gamma(self.lists.len() as u64 + 1)?;
        for l in &self.lists {
            sink.write_fixed(l.symbol as u64, key_width)?;
            sink.write_gamma(l.count)?;
            sink.write_gamma(l.bits.len())?;
            sink.append(&l.bits);
        }
        Ok(())
    }

    /// Reads lists written by [`write_to`](Self::write_to) for an input of length `n`.
    pub fn read_from(src: &mut BitSource<'_>, key_width: u32, n: u64) -> Result<Self> {
        let count = src.read_gamma()? - 1;
        if count > n {
            return Err(Error::corrupt("more lists than positions"));
        }
        let mut lists = Vec::with_capacity(count as usize);
        let mut total = 0u64;
        for _ in 0..count {
            let symbol = src.read_fixed(key_width)?;
            if let Some(prev) = lists.last().map(|l: &EncodedList| l.symbol) {
                if symbol <= prev as u64 {
                    return Err(Error::corrupt("list keys out of order"));
                }
            }
            let items = src.read_gamma()?;
            total = total.saturating_add(items);
            let len = src.read_gamma()?;
            if len > src.remaining() {
                return Err(Error::Truncated);
            }
            let mut bits = BitSink::new();
            for _ in 0..len {
                bits.push_bit(src.read_bit()?);
            }
            lists.push(EncodedList {
                symbol: u32::try_from(symbol).map_err(|_| Error::corrupt("list key"))?,
                count: items,
                bits,
            });
        }
        if total != n {
            return Err(Error::corrupt("list sizes do not add up to the input length"));
        }
        Ok(Self { lists, n })
    }
}

/// Runs the whole pass over `s` and returns the finalized lists.
pub fn sort_permutation(s: &[Symbol]) -> Result<FinalizedLists> {
    let mut set = GapListSet::new();
    for &c in s {
        set.push(c)?;
    }
    set.finalize()
}
