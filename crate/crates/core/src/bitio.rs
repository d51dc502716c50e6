//! Bit-level I/O and the Elias gamma code.
//!
//! Every field is written most-significant bit first, so comparing two
//! codewords lexicographically is the same as comparing them as numbers.

use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of leading zeroes `read_gamma` accepts.
pub const DEFAULT_GAMMA_GUARD: u32 = 64;

/// A growable bit buffer.
///
/// Capacity is tracked in bits and doubles on overflow starting from a
/// single bit, so appending is amortized constant time and the buffer is
/// never more than twice the size of its contents.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSink {
    words: Vec<u64>,
    len: u64,
    capacity: u64,
}

impl BitSink {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a sink from `bit_len` bits stored MSB-first in `bytes`.
    pub fn from_bytes(bytes: &[u8], bit_len: u64) -> Result<Self> {
        if bit_len > bytes.len() as u64 * 8 {
            return Err(Error::Truncated);
        }
        let mut sink = BitSink::new();
        let full = (bit_len / 8) as usize;
        for &b in &bytes[..full] {
            sink.push_bits(b as u64, 8);
        }
        let rest = (bit_len % 8) as u32;
        if rest > 0 {
            sink.push_bits((bytes[full] >> (8 - rest)) as u64, rest);
        }
        Ok(sink)
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Logical capacity in bits (1, 2, 4, ...; 0 before the first append).
    pub fn capacity_bits(&self) -> u64 {
        self.capacity
    }

    fn grow_for(&mut self, extra: u64) {
        let need = self.len + extra;
        if need > self.capacity {
            let mut cap = self.capacity.max(1);
            while cap < need {
                cap *= 2;
            }
            self.capacity = cap;
            let words = cap.div_ceil(64) as usize;
            if words > self.words.capacity() {
                self.words.reserve_exact(words - self.words.len());
            }
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.push_bits(bit as u64, 1);
    }

    /// Appends the low `width` bits of `value`, MSB first. Higher bits are ignored.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        if width == 0 {
            return;
        }
        self.grow_for(width as u64);
        let value = if width == 64 {
            value
        } else {
            value & ((1u64 << width) - 1)
        };
        let offset = (self.len % 64) as u32;
        if offset == 0 {
            self.words.push(0);
        }
        let free = 64 - offset;
        let last = self.words.len() - 1;
        if width <= free {
            self.words[last] |= value << (free - width);
        } else {
            let spill = width - free;
            self.words[last] |= value >> spill;
            self.words.push(value << (64 - spill));
        }
        self.len += width as u64;
    }

    /// Writes `value` as exactly `width` bits; fails if it does not fit.
    pub fn write_fixed(&mut self, value: u64, width: u32) -> Result<()> {
        if width > 64 || (width < 64 && value >> width != 0) {
            return Err(Error::Overflow { value, width });
        }
        self.push_bits(value, width);
        Ok(())
    }

    pub fn write_gamma(&mut self, x: u64) -> Result<()> {
        if x == 0 {
            return Err(Error::GammaZero);
        }
        let bits = 64 - x.leading_zeros();
        self.push_bits(0, bits - 1);
        self.push_bits(x, bits);
        Ok(())
    }

    pub fn append(&mut self, other: &BitSink) {
        let mut src = other.reader();
        while src.remaining() >= 64 {
            let w = src.read_fixed(64).expect("length checked");
            self.push_bits(w, 64);
        }
        let rest = src.remaining() as u32;
        if rest > 0 {
            let w = src.read_fixed(rest).expect("length checked");
            self.push_bits(w, rest);
        }
    }

    pub fn get(&self, index: u64) -> Option<bool> {
        if index >= self.len {
            return None;
        }
        let word = self.words[(index / 64) as usize];
        Some((word >> (63 - index % 64)) & 1 == 1)
    }

    /// Packs the bits MSB-first into bytes, zero-padding the last byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8) as usize;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let word = self.words[i / 8];
            out.push((word >> (56 - 8 * (i % 8))) as u8);
        }
        out
    }

    pub fn reader(&self) -> BitSource<'_> {
        BitSource {
            words: &self.words,
            len: self.len,
            cursor: 0,
        }
    }
}

impl fmt::Display for BitSink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) == Some(true) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitSink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSink({} bits: {})", self.len, self)
    }
}

impl std::str::FromStr for BitSink {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut sink = BitSink::new();
        for c in s.chars() {
            match c {
                '0' => sink.push_bit(false),
                '1' => sink.push_bit(true),
                c if c.is_whitespace() => {}
                _ => return Err(Error::corrupt(format!("not a bit: {c:?}"))),
            }
        }
        Ok(sink)
    }
}

/// Read cursor over an immutable bit sequence.
#[derive(Clone, Debug)]
pub struct BitSource<'a> {
    words: &'a [u64],
    len: u64,
    cursor: u64,
}

impl<'a> BitSource<'a> {
    pub fn position(&self) -> u64 {
        self.cursor
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn remaining(&self) -> u64 {
        self.len - self.cursor
    }

    fn bits_at(&self, start: u64, width: u32) -> u64 {
        // caller guarantees start + width <= words.len() * 64 or pads
        if width == 0 {
            return 0;
        }
        let wi = (start / 64) as usize;
        let off = (start % 64) as u32;
        let hi = self.words.get(wi).copied().unwrap_or(0) << off;
        let combined = if off == 0 {
            hi
        } else {
            hi | (self.words.get(wi + 1).copied().unwrap_or(0) >> (64 - off))
        };
        combined >> (64 - width)
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.cursor >= self.len {
            return Err(Error::Truncated);
        }
        let bit = self.bits_at(self.cursor, 1) == 1;
        self.cursor += 1;
        Ok(bit)
    }

    /// Reads exactly `width` bits (at most 64), MSB first.
    pub fn read_fixed(&mut self, width: u32) -> Result<u64> {
        assert!(width <= 64, "read_fixed width {width} exceeds 64");
        if self.remaining() < width as u64 {
            return Err(Error::Truncated);
        }
        let v = self.bits_at(self.cursor, width);
        self.cursor += width as u64;
        Ok(v)
    }

    /// Returns the next `width` bits without advancing; bits past the end read as zero.
    pub fn peek_padded(&self, width: u32) -> u64 {
        self.peek_padded_at(0, width)
    }

    /// Like [`peek_padded`](Self::peek_padded), starting `offset` bits past the cursor.
    pub fn peek_padded_at(&self, offset: u64, width: u32) -> u64 {
        assert!(width <= 64, "peek width {width} exceeds 64");
        let start = self.cursor.saturating_add(offset);
        if width == 0 || start >= self.len {
            return 0;
        }
        let avail = self.len - start;
        if avail >= width as u64 {
            self.bits_at(start, width)
        } else {
            let got = avail as u32;
            self.bits_at(start, got) << (width - got)
        }
    }

    pub fn skip(&mut self, bits: u64) -> Result<()> {
        if self.remaining() < bits {
            return Err(Error::Truncated);
        }
        self.cursor += bits;
        Ok(())
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        self.read_gamma_guarded(DEFAULT_GAMMA_GUARD)
    }

    /// Reads one gamma codeword, rejecting runs of `max_zeros` or more zeroes.
    pub fn read_gamma_guarded(&mut self, max_zeros: u32) -> Result<u64> {
        let max_zeros = max_zeros.min(64);
        let mut zeros = 0u32;
        loop {
            if self.cursor >= self.len {
                return Err(Error::Truncated);
            }
            if self.bits_at(self.cursor, 1) == 1 {
                break;
            }
            self.cursor += 1;
            zeros += 1;
            if zeros >= max_zeros {
                return Err(Error::MalformedGamma { zeros });
            }
        }
        // the terminating 1 is the leading bit of the value
        self.read_fixed(zeros + 1)
    }
}

/// Length in bits of the gamma codeword for `x` (`x >= 1`).
pub fn gamma_len(x: u64) -> u32 {
    debug_assert!(x > 0);
    2 * (63 - x.leading_zeros()) + 1
}

pub fn gamma_encode(x: u64) -> Result<BitSink> {
    let mut sink = BitSink::new();
    sink.write_gamma(x)?;
    Ok(sink)
}

pub fn gamma_decode(src: &mut BitSource<'_>) -> Result<u64> {
    src.read_gamma()
}

/// Number of bits needed to write any value in `0..count` (0 when `count <= 1`).
pub fn bits_for(count: u64) -> u32 {
    if count <= 1 {
        0
    } else {
        64 - (count - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitSink {
        s.parse().unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_encode(1).unwrap().to_string(), "1");
        assert_eq!(gamma_encode(3).unwrap().to_string(), "011");
        assert_eq!(gamma_encode(2).unwrap().to_string(), "010");
        assert_eq!(gamma_encode(7).unwrap().to_string(), "00111");
        let mut list = BitSink::new();
        for x in [1, 3, 2, 2, 3] {
            list.write_gamma(x).unwrap();
        }
        assert_eq!(list.to_string(), "1011010010011");
    }

    #[test]
    fn gamma_rejects_zero() {
        assert_eq!(gamma_encode(0), Err(Error::GammaZero));
    }

    #[test]
    fn gamma_decode_consumes_exact_prefix() {
        let b = bits("1011");
        let mut src = b.reader();
        assert_eq!(gamma_decode(&mut src).unwrap(), 1);
        assert_eq!(src.position(), 1);

        let b = bits("00111010");
        let mut src = b.reader();
        assert_eq!(gamma_decode(&mut src).unwrap(), 7);
        assert_eq!(src.position(), 5);
    }

    #[test]
    fn gamma_decode_truncated_and_malformed() {
        let b = bits("0001");
        assert_eq!(b.reader().read_gamma(), Err(Error::Truncated));
        let b = bits("000");
        assert_eq!(b.reader().read_gamma(), Err(Error::Truncated));
        let b = bits("00000000");
        assert_eq!(
            b.reader().read_gamma_guarded(4),
            Err(Error::MalformedGamma { zeros: 4 })
        );
        let mut long = BitSink::new();
        long.push_bits(0, 64);
        long.push_bits(1, 1);
        assert!(matches!(
            long.reader().read_gamma(),
            Err(Error::MalformedGamma { .. })
        ));
    }

    #[test]
    fn gamma_round_trip_dense_range() {
        let mut sink = BitSink::new();
        for x in 1..(1u64 << 20) {
            sink.write_gamma(x).unwrap();
        }
        let mut src = sink.reader();
        for x in 1..(1u64 << 20) {
            let before = src.position();
            assert_eq!(src.read_gamma().unwrap(), x);
            assert_eq!(src.position() - before, gamma_len(x) as u64);
        }
        assert_eq!(src.remaining(), 0);
    }

    #[test]
    fn gamma_is_prefix_free_exhaustive() {
        let limit = 1u64 << 12;
        let codes: Vec<String> = (1..=limit)
            .map(|x| gamma_encode(x).unwrap().to_string())
            .collect();
        // sorted order puts any prefix directly before some extension of it
        let mut sorted = codes.clone();
        sorted.sort();
        for w in sorted.windows(2) {
            assert!(!w[1].starts_with(&w[0]), "{} prefixes {}", w[0], w[1]);
        }
        for (i, c) in codes.iter().enumerate() {
            let x = i as u64 + 1;
            assert_eq!(c.len() as u32, 2 * (63 - x.leading_zeros()) + 1);
        }
    }

    #[test]
    fn gamma_large_values() {
        for x in [u64::MAX, 1 << 63, (1 << 40) + 12345] {
            let code = gamma_encode(x).unwrap();
            assert_eq!(code.len(), gamma_len(x) as u64);
            assert_eq!(code.reader().read_gamma().unwrap(), x);
        }
    }

    #[test]
    fn fixed_width_fields() {
        let mut s = BitSink::new();
        s.write_fixed(5, 4).unwrap();
        assert_eq!(s.to_string(), "0101");
        assert_eq!(s.reader().read_fixed(4).unwrap(), 5);

        let mut s = BitSink::new();
        s.write_fixed(0, 1).unwrap();
        assert_eq!(s.to_string(), "0");

        assert_eq!(
            BitSink::new().write_fixed(16, 4),
            Err(Error::Overflow { value: 16, width: 4 })
        );
        assert_eq!(bits("010").reader().read_fixed(4), Err(Error::Truncated));
    }

    #[test]
    fn capacity_doubles_from_one_bit() {
        let mut s = BitSink::new();
        assert_eq!(s.capacity_bits(), 0);
        s.push_bit(true);
        assert_eq!(s.capacity_bits(), 1);
        s.push_bits(0b011, 3);
        assert_eq!(s.capacity_bits(), 4);
        s.push_bits(0b00111, 5);
        assert_eq!(s.capacity_bits(), 16);
        for _ in 0..100 {
            s.push_bit(false);
            assert!(s.capacity_bits() < 2 * s.len());
        }
    }

    #[test]
    fn bytes_round_trip_and_padding() {
        let s = bits("1011001110001");
        let bytes = s.to_bytes();
        assert_eq!(bytes, vec![0b1011_0011, 0b1000_1000]);
        assert_eq!(BitSink::from_bytes(&bytes, 13).unwrap(), s);
        assert!(BitSink::from_bytes(&bytes, 17).is_err());
    }

    #[test]
    fn peek_pads_with_zeroes() {
        let s = bits("101");
        let src = s.reader();
        assert_eq!(src.peek_padded(6), 0b101000);
        assert_eq!(src.position(), 0);
    }

    #[test]
    fn append_crosses_word_boundaries() {
        let mut a = BitSink::new();
        a.push_bits(0x5, 3);
        let mut b = BitSink::new();
        for i in 0..150u64 {
            b.push_bit(i % 3 == 0);
        }
        a.append(&b);
        assert_eq!(a.len(), 153);
        assert_eq!(&a.to_string()[3..], b.to_string());
    }

    #[test]
    fn bits_for_widths() {
        assert_eq!(bits_for(1), 0);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(4), 2);
        assert_eq!(bits_for(5), 3);
        assert_eq!(bits_for(256), 8);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gamma_concatenation_decodes(xs in proptest::collection::vec(1u64..u64::MAX, 0..200)) {
                let mut sink = BitSink::new();
                for &x in &xs {
                    sink.write_gamma(x).unwrap();
                }
                let mut src = sink.reader();
                let back: Vec<u64> = (0..xs.len()).map(|_| src.read_gamma().unwrap()).collect();
                prop_assert_eq!(back, xs);
                prop_assert_eq!(src.remaining(), 0);
            }

            #[test]
            fn fixed_fields_round_trip(fields in proptest::collection::vec((any::<u64>(), 0u32..=64), 0..100)) {
                let mut sink = BitSink::new();
                let mut expect = Vec::new();
                for &(v, w) in &fields {
                    let v = if w == 64 { v } else if w == 0 { 0 } else { v & ((1 << w) - 1) };
                    sink.write_fixed(v, w).unwrap();
                    expect.push((v, w));
                }
                let mut src = sink.reader();
                for (v, w) in expect {
                    prop_assert_eq!(src.read_fixed(w).unwrap(), v);
                }
            }
        }
    }
}
