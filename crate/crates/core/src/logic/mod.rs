//! The epistemic language: syntax, parsing, and evaluation.

mod eval;
mod formula;
mod parser;

pub use eval::{
    ck_via_closure, eval, extension, gfp_extension, iterated_everyone, stabilized_everyone,
    Checker, Extension, Mode,
};
pub(crate) use eval::{runs_covering, windows_covering};
pub use formula::{format_formula, Formula, Group};
pub use parser::{parse_formula, ParseError};
