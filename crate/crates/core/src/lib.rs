pub mod adaptive;
pub mod bitio;
pub mod bounded;
pub mod bwt;
pub mod canonical;
pub mod comparison_sorter;
pub mod container;
pub mod error;
pub mod harness;
pub mod online_sorter;
pub mod splay;
pub mod text_stats;

pub use error::{Error, Result};

/// Symbols are dense integers `0..sigma`.
pub type Symbol = u32;
