//! Problem input and report output.

mod expr;
mod problem;

pub use expr::{parse_polynomial, ParseError, MAX_DEGREE};
pub use problem::{default_names, parse_problem, BoundDatum, PopProblem, ProblemError, DEFAULT_FEAS_TOL};
