//! Symbolic situated reasoning over video situations.
//!
//! A situation is a [`SituationHypergraph`]: frame-level subgraphs of person
//! and object nodes with spatial relation triplets, plus action hyperedges that
//! span intervals of frames. Questions are functional programs
//! ([`program`]) executed over those graphs; [`qagen`] generates four kinds
//! of multiple-choice questions with controlled distractors, [`balance`]
//! removes answer-distribution shortcuts, and [`harness`] carries the
//! baselines, the brute-force oracle and the degradation simulator.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel scheduling live in the `situ` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod balance;
pub mod harness;
pub mod hypergraph;
pub mod ontology;
pub mod program;
pub mod qagen;
pub mod rng;
pub mod synth;

#[cfg(test)]
mod testutil;

pub use hypergraph::SituationHypergraph;
pub use ontology::Vocabulary;
pub use program::FunctionalProgram;
pub use qagen::QAItem;

