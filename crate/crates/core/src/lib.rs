//! Bounds on the number of maximal near perfect matchings in quasirandom and
//! dense graphs.

pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod lp;
pub mod matching;
pub mod pipeline;
pub mod quasicount;
pub mod quotient_lp;
pub mod regularity;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
