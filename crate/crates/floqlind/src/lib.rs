//! Markovianity analysis for periodically driven open quantum systems.
//!
//! A time-periodic Lindbladian generates a one-period propagator, the
//! Floquet map. This crate decides whether that map could equally have come
//! from some time-independent Lindbladian: it integrates the map
//! ([`floquet`]), walks the branches of its matrix logarithm ([`spectral`]),
//! and tests each candidate generator for conditional complete positivity
//! ([`choi`], [`markov`]). Maps that fail get a distance from Markovianity,
//! the least depolarizing noise that would repair them.
//!
//! On top of the decision sit the learning tools: Choi-matrix feature
//! encodings ([`features`]), labeled parameter sweeps ([`dataset`]),
//! classifiers with deterministic training ([`ml`]), and partition plots of
//! the driving plane ([`diagram`]). The `floqlind` binary exposes the same
//! pipeline as subcommands; the `examples/` directory walks each capability.
//!
//! ```no_run
//! use floqlind::{decide_markovianity, floquet_map, ModelSpec};
//!
//! let model = ModelSpec::problem_i(1.8, 0.45, 0.0);
//! let report = decide_markovianity(&floquet_map(&model)?)?;
//! assert!(report.answer, "this point admits a constant generator");
//! # Ok::<(), floqlind::Error>(())
//! ```

pub mod choi;
pub mod cli;
pub mod dataset;
pub mod diagram;
pub mod error;
pub mod features;
pub mod floquet;
pub mod linalg;
pub mod lindblad;
pub mod markov;
pub mod ml;
pub mod spectral;

#[cfg(test)]
pub(crate) mod test_support;

pub use error::{Error, Result};
pub use features::{feature_vector, Scheme};
pub use floquet::{floquet_map, FloquetMap};
pub use linalg::C64;
pub use lindblad::{ModelSpec, Problem};
pub use markov::{decide_markovianity, LabelReport};
