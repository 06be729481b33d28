//! Symbolic digit sequences and the tools for studying their normality.
//! Each module covers one concern; shared types are re-exported here.
//!
//! Positions are 1-based throughout. Frequencies are exact ratios.

pub mod algsys;
pub mod analysis;
pub mod bitarith;
pub mod error;
pub mod generators;
pub mod grayorder;
pub mod nseq;
pub mod pnormal;
pub mod seqcore;

pub use error::{Error, Result};
pub use seqcore::{
    Alphabet, Block, DigitString, Frequency, Horizon, IndexSet, SeqRef, SymbolicSequence, Window,
};
