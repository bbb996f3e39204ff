//! Qualitative reachability for open interval Markov chains.
//!
//! An interval Markov chain (IMC) labels every transition with an interval
//! of admissible probabilities, where each endpoint may be open or closed.
//! This crate decides, for a target set `T`, which states reach `T` with
//! probability exactly 0 or exactly 1, for some or for all resolutions of the
//! intervals, under both the uncertain-Markov-chain (UMC) semantics and the
//! interval-MDP (IMDP) semantics.
//!
//! All analysis is done in exact rational arithmetic. Floating point only
//! appears in [`sim`], the Monte Carlo scheduler simulator.
//!
//! ```
//! use openimc::{parse_model, analyze};
//!
//! let doc = parse_model("states: s0 s1\ns0 -> s0 (0,1)\ns0 -> s1 (0,1)\ns1 -> s1 [1,1]\n").unwrap();
//! let imc = doc.to_imc().unwrap();
//! let target = imc.state_set(["s1"]).unwrap();
//! let report = analyze(&imc, &target).unwrap();
//! assert_eq!(imc.names(&report.umc.aq1), vec!["s0", "s1"]);
//! assert_eq!(imc.names(&report.imdp.aq1), vec!["s1"]);
//! ```

pub mod analysis;
pub mod edges;
pub mod error;
pub mod graph;
pub mod imdp;
pub mod interval;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod rational;
pub mod report;
pub mod sim;
pub mod stateset;
pub mod umc;

pub use analysis::{analyze, AnalysisReport, SemanticsSets};
pub use edges::{Assignment, Edge, EdgeSet};
pub use error::{Error, Result};
pub use graph::Digraph;
pub use imdp::{IlecReport, IlecViolation};
pub use interval::{Bracket, Interval, IntervalClass, LeftClass};
pub use model::{Imc, WellFormednessReport};
pub use parser::{emit_model, parse_model, ModelDocument, ParseError};
pub use rational::Rational;
pub use report::emit_report;
pub use stateset::StateSet;
