//! First-order logic: syntax, parsing, locality, Gaifman normal form and
//! evaluation.

mod eval;
mod formula;
mod gnf;
mod locality;
mod parse;
pub mod random;

use thiserror::Error;

pub use eval::{eval_local, eval_naive, Assignment, CompiledFormula, EvalContext, Quantification};
pub use formula::{Formula, Var};
pub use gnf::{
    center_var, eval_gnf_naive, eval_leaf_naive, BasicLocalSentence, GaifmanSentence, GnfError,
};
pub use locality::{check_r_local, expand_distance_atom, expand_distance_atoms, relativize};
pub use parse::{
    parse_formula, parse_formula_with_free, parse_sentence, ParseError, ParseErrorKind, Position,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("relation `{symbol}` has arity {expected} but is applied to {found} variables")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` has no value")]
    UnassignedVariable(Var),
    #[error("element {0} is not in the structure")]
    NoSuchElement(usize),
    #[error("variable `{0}` is quantified inside the formula being relativized to it")]
    VariableCapture(Var),
    #[error("distance atom `{atom}` does not involve the center `{center}`")]
    NonLocalDistance { atom: String, center: Var },
    #[error("formula is not {radius}-local around `{center}`: {formula}")]
    NotLocal {
        formula: String,
        radius: usize,
        center: Var,
    },
    #[error("local formula may only have `{center}` free, found `{found}`")]
    ExtraFreeVariable { center: Var, found: Var },
    #[error("basic local sentences need radius >= 1 and count >= 1, got r={radius} m={count}")]
    BadLeafParameters { radius: usize, count: usize },
}
