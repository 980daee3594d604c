//! First-order model checking on sparse relational structures via
//! locality.
//!
//! A sentence in Gaifman normal form is a Boolean combination of basic
//! local sentences. The [`engine`] decides each one by covering the
//! structure with small pieces ([`covers`]), evaluating the local formula
//! inside the pieces ([`logic`]) and testing for a scattered set of
//! witnesses. [`logic::eval_gnf_naive`] is the brute-force reference.

pub mod covers;
pub mod engine;
pub mod gaifman;
pub mod generate;
pub mod io;
pub mod logic;
pub mod structure;
pub mod treewidth;

pub use covers::{Cover, CoverKind};
pub use engine::{check_sentence, EngineConfig, EvalReport, Strategy};
pub use gaifman::GaifmanGraph;
pub use logic::{Formula, GaifmanSentence, Var};
pub use structure::{Element, Structure, Vocabulary};
