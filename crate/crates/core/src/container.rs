//! File container shared by all codecs.
//!
//! ```text
//! "SQZ1" | version u8 | codec u8 | sigma u32 | n u64 | param_len u32 | params
//!        | payload (bit stream, zero-padded to a byte) | crc32 u32
//! ```
//!
//! Integers are little-endian. The checksum covers every byte before it.

use crate::adaptive::{decode_from, encode_stream, LengthHint};
use crate::bitio::{bits_for, BitSink, BitSource};
use crate::bounded::{one_pass_decode, one_pass_encode, BoundedParams, Lambda, Slack};
use crate::bwt::{pipeline_compress, pipeline_decompress_from};
use crate::error::{Error, Result};
use crate::online_sorter::{sort_permutation, FinalizedLists};
use crate::Symbol;

pub const MAGIC: [u8; 4] = *b"SQZ1";
pub const VERSION: u8 = 1;
/// Largest alphabet a container may declare.
pub const MAX_SIGMA: u32 = 1 << 24;
const FIXED_HEADER: usize = 4 + 1 + 1 + 4 + 8 + 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CodecId {
    Adaptive = 1,
    Bounded = 2,
    Bwt = 3,
    GapLists = 4,
}

impl CodecId {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            1 => Ok(CodecId::Adaptive),
            2 => Ok(CodecId::Bounded),
            3 => Ok(CodecId::Bwt),
            4 => Ok(CodecId::GapLists),
            _ => Err(Error::UnknownCodec(b)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecId::Adaptive => "adaptive",
            CodecId::Bounded => "bounded",
            CodecId::Bwt => "bwt",
            CodecId::GapLists => "gaplists",
        }
    }
}

/// A codec together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Codec {
    /// `unknown_length` selects the rebuild schedule that does not use `n`.
    Adaptive { unknown_length: bool },
    Bounded(BoundedParams),
    Bwt,
    GapLists,
}

impl Codec {
    pub fn id(&self) -> CodecId {
        match self {
            Codec::Adaptive { .. } => CodecId::Adaptive,
            Codec::Bounded(_) => CodecId::Bounded,
            Codec::Bwt => CodecId::Bwt,
            Codec::GapLists => CodecId::GapLists,
        }
    }

    fn params(&self) -> Result<Vec<u8>> {
        Ok(match self {
            Codec::Adaptive { unknown_length } => vec![*unknown_length as u8],
            Codec::Bounded(p) => {
                let mu = p
                    .mu
                    .to_fixed()
                    .ok_or_else(|| Error::InvalidParameter("slack has no 16.16 form".into()))?;
                let mut v = Vec::with_capacity(17);
                v.extend(p.lambda.to_fixed().to_le_bytes());
                v.extend(p.k.to_le_bytes());
                v.extend(mu.to_le_bytes());
                v.extend(p.c.to_le_bytes());
                v.push(p.precision_bits() as u8);
                v
            }
            Codec::Bwt | Codec::GapLists => Vec::new(),
        })
    }

    fn parse(id: CodecId, sigma: u32, raw: &[u8]) -> Result<Self> {
        let word = |i: usize| u32::from_le_bytes(raw[4 * i..4 * i + 4].try_into().unwrap());
        match id {
            CodecId::Adaptive => match raw {
                [0] => Ok(Codec::Adaptive { unknown_length: false }),
                [1] => Ok(Codec::Adaptive { unknown_length: true }),
                _ => Err(Error::ParameterMismatch("adaptive flags".into())),
            },
            CodecId::Bounded => {
                if raw.len() != 17 {
                    return Err(Error::ParameterMismatch(format!("{} parameter bytes", raw.len())));
                }
                let bad = |e: Error| Error::ParameterMismatch(e.to_string());
                let lambda = Lambda::from_fixed(word(0)).map_err(bad)?;
                let mu = Slack::from_fixed(word(2)).map_err(bad)?;
                let p = BoundedParams::from_parts(sigma, lambda, word(1), mu, word(3)).map_err(bad)?;
                if p.precision_bits() != raw[16] as u32 {
                    return Err(Error::ParameterMismatch(format!(
                        "precision {} recorded, {} derived",
                        raw[16],
                        p.precision_bits()
                    )));
                }
                Ok(Codec::Bounded(p))
            }
            CodecId::Bwt | CodecId::GapLists => {
                if !raw.is_empty() {
                    return Err(Error::ParameterMismatch("unexpected parameters".into()));
                }
                Ok(if id == CodecId::Bwt { Codec::Bwt } else { Codec::GapLists })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub codec: Codec,
    pub sigma: u32,
    pub n: u64,
}

fn check_symbols(s: &[Symbol], sigma: u32) -> Result<()> {
    match s.iter().find(|&&c| c >= sigma) {
        Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, sigma }),
        None => Ok(()),
    }
}

fn payload(codec: &Codec, s: &[Symbol], sigma: u32) -> Result<BitSink> {
    let n = s.len() as u64;
    match codec {
        Codec::Adaptive { unknown_length } => {
            let hint = if *unknown_length { LengthHint::Unknown } else { LengthHint::Known(n) };
            encode_stream(s, sigma as usize, hint)
        }
        Codec::Bounded(p) => {
            if p.sigma != sigma {
                return Err(Error::InvalidParameter("bounded parameters use another alphabet".into()));
            }
            one_pass_encode(s, *p)
        }
        Codec::Bwt => pipeline_compress(s, sigma),
        Codec::GapLists => {
            let mut sink = BitSink::new();
            sort_permutation(s)?.write_to(&mut sink, bits_for(sigma as u64))?;
            Ok(sink)
        }
    }
}

/// Encodes `s` over the alphabet `0..sigma` into a container.
pub fn encode_container(codec: Codec, s: &[Symbol], sigma: u32) -> Result<Vec<u8>> {
    if sigma == 0 || sigma > MAX_SIGMA {
        return Err(Error::InvalidParameter(format!("alphabet size {sigma}")));
    }
    check_symbols(s, sigma)?;
    let params = codec.params()?;
    let bits = payload(&codec, s, sigma)?;
    let mut out = Vec::with_capacity(FIXED_HEADER + params.len() + bits.len().div_ceil(8) as usize + 4);
    out.extend(MAGIC);
    out.push(VERSION);
    out.push(codec.id() as u8);
    out.extend(sigma.to_le_bytes());
    out.extend((s.len() as u64).to_le_bytes());
    out.extend((params.len() as u32).to_le_bytes());
    out.extend(params);
    out.extend(bits.to_bytes());
    let crc = crc32fast::hash(&out);
    out.extend(crc.to_le_bytes());
    Ok(out)
}

/// Parses and checks the header; returns it with the payload bytes.
pub fn read_header(bytes: &[u8]) -> Result<(Header, &[u8])> {
    if bytes.len() < 6 {
        return Err(if bytes.len() >= 4 && bytes[..4] != MAGIC { Error::BadMagic } else { Error::Truncated });
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let id = CodecId::from_byte(bytes[5])?;
    if bytes.len() < FIXED_HEADER + 4 {
        return Err(Error::Truncated);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(trailer.try_into().unwrap()) {
        return Err(Error::ChecksumMismatch);
    }
    let sigma = u32::from_le_bytes(body[6..10].try_into().unwrap());
    let n = u64::from_le_bytes(body[10..18].try_into().unwrap());
    let param_len = u32::from_le_bytes(body[18..22].try_into().unwrap()) as usize;
    if sigma == 0 || sigma > MAX_SIGMA {
        return Err(Error::ParameterMismatch(format!("alphabet size {sigma}")));
    }
    let rest = &body[FIXED_HEADER..];
    if param_len > rest.len() {
        return Err(Error::Truncated);
    }
    let (raw, payload) = rest.split_at(param_len);
    let codec = Codec::parse(id, sigma, raw)?;
    Ok((Header { codec, sigma, n }, payload))
}

/// Checks that only zero padding follows the decoded payload.
fn finish_payload(src: &BitSource<'_>) -> Result<()> {
    if src.remaining() >= 8 {
        return Err(Error::corrupt("payload continues past the decoded data"));
    }
    if src.peek_padded(src.remaining() as u32) != 0 {
        return Err(Error::corrupt("nonzero padding"));
    }
    Ok(())
}

pub fn decode_container(bytes: &[u8]) -> Result<(Header, Vec<Symbol>)> {
    let (header, payload) = read_header(bytes)?;
    let bits = BitSink::from_bytes(payload, payload.len() as u64 * 8)?;
    let mut src = bits.reader();
    let Header { codec, sigma, n } = header;
    let out = match codec {
        Codec::Adaptive { unknown_length } => {
            let hint = if unknown_length { LengthHint::Unknown } else { LengthHint::Known(n) };
            decode_from(&mut src, sigma as usize, n, hint)?
        }
        Codec::Bounded(p) => one_pass_decode(&mut src, p, n)?,
        Codec::Bwt => pipeline_decompress_from(&mut src, sigma, n)?,
        Codec::GapLists => FinalizedLists::read_from(&mut src, bits_for(sigma as u64), n)?.recover_input()?,
    };
    finish_payload(&src)?;
    if out.len() as u64 != n {
        return Err(Error::corrupt("decoded length differs from the header"));
    }
    check_symbols(&out, sigma).map_err(|_| Error::corrupt("decoded symbol outside the alphabet"))?;
    Ok((header, out))
}
