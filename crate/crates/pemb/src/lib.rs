//! Succinct planar graph embeddings.
//!
//! A connected planar embedding with n vertices and m edges is stored in
//! roughly 4 bits per edge as three interleaved sequences: a bitvector A
//! marking which traversal steps consume spanning tree edges, a parenthesis
//! sequence B describing the tree, and a parenthesis sequence B* describing
//! the co-tree of the dual. Navigation (first/next arc, mate, source vertex,
//! degree, neighbour, face walks) runs in constant or output-sensitive time
//! on top of rank/select and parenthesis-matching directories.
//!
//! Construction is a single Euler-tour pass over the rotation system; the
//! parallel builder produces byte-identical structures for any thread count.

pub mod bits;
pub mod embedding;
pub mod error;
pub mod generate;
pub mod index;
pub mod navigate;
pub mod oracle;
pub mod parbuild;
pub mod parens;
pub mod rng;
pub mod rotation;
pub mod sparse;
pub mod spanning;
pub mod stats;

pub use bits::BitVector;
pub use embedding::{build_sequential, PembStructure};
pub use error::{Error, Result};
pub use index::{
    build_degree_index, build_neighbour_index, default_degree_threshold,
    default_neighbour_threshold, DegreeIndex, NeighbourIndex,
};
pub use navigate::Order;
pub use parbuild::{
    list_ranking, par_build, par_build_counted, par_build_directories, prefix_sum_exclusive,
    prefix_sum_inclusive, worker_threads, EulerEntry, WorkStats,
};
pub use parens::BalancedParens;
pub use rotation::RotationSystem;
pub use sparse::SparseBitVector;
pub use spanning::{spanning_tree_dfs, spanning_tree_parallel, SpanningTree};
pub use stats::{stats, symbols_string, StatsReport};
