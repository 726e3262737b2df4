//! Random stabilizer tensor networks over prime-dimensional qudits.
//!
//! The crate builds random stabilizer tensor-network states, measures their
//! bi-, tri- and four-partite entanglement exactly in the stabilizer
//! formalism, and checks the structural results behind them (third moments of
//! stabilizer ensembles, the GHZ spin model, min-cut entropy bounds) against
//! brute-force oracles in [`dense`].

pub mod dense;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod moments;
pub mod network;
pub mod spin;
pub mod tableau;
pub mod weyl;

pub use entropy::{fourpartite_report, ghz_content, pt_moment3, FourpartiteReport, GhzContent};
pub use error::{Error, Result};
pub use field::{beta_form, FpMatrix, PrimeField};
pub use geometry::{min_cut, CutReport};
pub use network::{build_network_with_tensors, build_random_network, NetworkGraph, NetworkState};
pub use spin::{build_sigma3, SpinModel, SubspaceT};
pub use tableau::{enumerate_all, Projected, StabilizerTableau};
pub use weyl::WeylOperator;
