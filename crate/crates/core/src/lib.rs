//! Expander-based Tanner codes: graphs, inner codes, bit-flipping decoders
//! and the size-expansion trade-off.

pub mod det_decoder;
pub mod error;
pub mod gf2;
pub mod graph;
pub mod harness;
pub mod index_list;
pub mod inner_code;
pub mod rand_decoder;
pub mod rational;
pub mod size_expansion;
pub mod tanner;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec};
pub use graph::BipartiteGraph;
pub use inner_code::InnerCode;
pub use rational::Rational;
pub use tanner::TannerCode;
