//! Memory-bounded one-pass block coding.
//!
//! The input is cut into outer blocks whose length depends only on the
//! parameters. Each block is split by order-k context; each context's
//! symbols are coded against a quantized distribution with Shannon-Fano-Elias
//! codes over short inner blocks.

pub mod heavy;
pub mod one_pass;
pub mod order_k;
pub mod quantize;
pub mod sfe;

pub use heavy::{heavy_hitters, MisraGries};
pub use one_pass::{one_pass_decode, one_pass_encode, BoundedParams, OnePassEncoder, CALIBRATED_C};
pub use order_k::{decode_order0, decode_order_k, encode_order0, encode_order_k, DEFAULT_CONTEXT_BUDGET};
pub use quantize::{quantize, Lambda, QuantizedDistribution, Slack};
pub use sfe::{block_codeword, decode_block, encode_block};
