//! Scan-path generation for laser powder bed fusion.
//!
//! The crate is `no_std` and only needs an allocator. It holds the pure
//! algorithmic parts of the toolkit:
//!
//! * [`geometry`]: printing domains, lattice sampling, segment predicates,
//!   islands and Voronoi cells.
//! * [`thermal`]: superposition of Gaussian surface sources and melt-pool
//!   depth extraction.
//! * [`env`]: the scanning environment the agent moves in (actions,
//!   constraints, rewards, sensitive regions).
//! * [`learner`]: a small deep Q-network with replay and a target network.
//! * [`baselines`]: zigzag, chessboard and greedy adaptive patterns.
//! * [`pathplan`]: island/Voronoi assembly and G-code fine tuning.
//!
//! File formats, plotting and the command line live in the `lpbf-toolkit`
//! crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod env;
pub mod geometry;
pub mod learner;
pub mod pathplan;
pub mod thermal;
pub mod toolpath;

mod math;

pub use geometry::{Point2, PolygonDomain, SampleGrid, Segment};
pub use toolpath::{Move, MoveKind, Toolpath};
