//! Problem files.
//!
//! ```text
//! # Example: minimize x1^2 + 1 on { 1 - x2^2 >= 0, x2^2 - 1/4 >= 0 }
//! vars: x1 x2
//! obj: x1^2 + 1
//! ineq: 1 - x2^2 >= 0
//! ineq: x2^2 - 1/4
//! c: 2
//! ```
//!
//! `vars:` must be the first record. `ineq:` accepts `e`, `e >= r` and
//! `e <= r`, all normalized to `g >= 0`; `eq:` accepts `e` or `e = r`.
//! Exactly one of `c:` and `x0:` is required; with `x0:` the bound is
//! `c = f(x0) + margin` where `margin:` defaults to 1.

use num_traits::{One, Signed};
use thiserror::Error;

use super::expr::{parse_polynomial_at, ParseError};
use crate::poly::{Coeff, Polynomial, Rational};

/// Default feasibility tolerance for a supplied point `x0`.
pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Expression(#[from] ParseError),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("missing `vars:` record")]
    MissingVariables,
    #[error("missing `obj:` record")]
    MissingObjective,
    #[error("neither `c:` nor `x0:` was given")]
    MissingBound,
    #[error("x0 has {found} coordinates but there are {expected} variables")]
    PointDimension { expected: usize, found: usize },
    #[error("x0 is infeasible: {constraint} evaluates to {value}")]
    InfeasiblePoint { constraint: String, value: f64 },
    #[error("margin must be positive, got {0}")]
    NonPositiveMargin(String),
}

/// How the bound `c` of the extra generator `c - f` is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundDatum {
    /// Explicit `c`.
    Value(Rational),
    /// A feasible point; `c = f(x0) + margin`.
    Point { x0: Vec<Rational>, margin: Rational },
}

/// Polynomial optimization problem `min f(x)  s.t.  g_j(x) >= 0, h_l(x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopProblem {
    pub variables: Vec<String>,
    pub objective: Polynomial<Rational>,
    pub inequalities: Vec<Polynomial<Rational>>,
    pub equalities: Vec<Polynomial<Rational>>,
    pub bound: BoundDatum,
}

impl PopProblem {
    /// Builds and validates a problem; with a point datum the point must be
    /// feasible within [`DEFAULT_FEAS_TOL`].
    pub fn new(
        variables: Vec<String>,
        objective: Polynomial<Rational>,
        inequalities: Vec<Polynomial<Rational>>,
        equalities: Vec<Polynomial<Rational>>,
        bound: BoundDatum,
    ) -> Result<Self, ProblemError> {
        let p = Self {
            variables,
            objective,
            inequalities,
            equalities,
            bound,
        };
        p.validate(DEFAULT_FEAS_TOL)?;
        Ok(p)
    }

    /// Unconstrained problem with an explicit bound.
    pub fn unconstrained(objective: Polynomial<Rational>, c: Rational) -> Self {
        let n = objective.num_vars();
        Self {
            variables: default_names(n),
            objective,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            bound: BoundDatum::Value(c),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// The resolved bound `c`.
    pub fn c(&self) -> Rational {
        match &self.bound {
            BoundDatum::Value(c) => c.clone(),
            BoundDatum::Point { x0, margin } => {
                self.objective.evaluate_exact(x0).expect("validated point dimension") + margin.clone()
            }
        }
    }

    /// `c - f`, the generator appended to the quadratic module.
    pub fn c_minus_f(&self) -> Polynomial<Rational> {
        &Polynomial::constant(self.num_vars(), self.c()) - &self.objective
    }

    pub fn with_c(mut self, c: Rational) -> Self {
        self.bound = BoundDatum::Value(c);
        self
    }

    /// Replaces the margin of a point datum. Has no effect on an explicit `c`.
    pub fn with_margin(mut self, margin: Rational) -> Result<Self, ProblemError> {
        if !margin.is_positive() {
            return Err(ProblemError::NonPositiveMargin(margin.format()));
        }
        if let BoundDatum::Point { margin: m, .. } = &mut self.bound {
            *m = margin;
        }
        Ok(self)
    }

    pub fn validate(&self, feas_tol: f64) -> Result<(), ProblemError> {
        let n = self.num_vars();
        let polys = std::iter::once(&self.objective)
            .chain(&self.inequalities)
            .chain(&self.equalities);
        for p in polys {
            if p.num_vars() != n {
                return Err(ProblemError::Format {
                    line: 0,
                    message: format!("polynomial over {} variables, expected {n}", p.num_vars()),
                });
            }
        }
        if let BoundDatum::Point { x0, margin } = &self.bound {
            if x0.len() != n {
                return Err(ProblemError::PointDimension {
                    expected: n,
                    found: x0.len(),
                });
            }
            if !margin.is_positive() {
                return Err(ProblemError::NonPositiveMargin(margin.format()));
            }
            for (j, g) in self.inequalities.iter().enumerate() {
                let v = g.evaluate_exact(x0).expect("dimension checked").to_f64();
                if v < -feas_tol {
                    return Err(ProblemError::InfeasiblePoint {
                        constraint: format!("ineq {} ({})", j + 1, g.display_with(&self.variables)),
                        value: v,
                    });
                }
            }
            for (l, h) in self.equalities.iter().enumerate() {
                let v = h.evaluate_exact(x0).expect("dimension checked").to_f64();
                if v.abs() > feas_tol {
                    return Err(ProblemError::InfeasiblePoint {
                        constraint: format!("eq {} ({})", l + 1, h.display_with(&self.variables)),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Canonical problem-file text; parses back to an equal problem.
    pub fn to_text(&self) -> String {
        let names = &self.variables;
        let mut out = format!("vars: {}\n", names.join(" "));
        out.push_str(&format!("obj: {}\n", self.objective.display_with(names)));
        for g in &self.inequalities {
            out.push_str(&format!("ineq: {} >= 0\n", g.display_with(names)));
        }
        for h in &self.equalities {
            out.push_str(&format!("eq: {}\n", h.display_with(names)));
        }
        match &self.bound {
            BoundDatum::Value(c) => out.push_str(&format!("c: {}\n", signed(c))),
            BoundDatum::Point { x0, margin } => {
                let pts: Vec<String> = x0.iter().map(signed).collect();
                out.push_str(&format!("x0: {}\n", pts.join(", ")));
                out.push_str(&format!("margin: {}\n", signed(margin)));
            }
        }
        out
    }
}

fn signed(v: &Rational) -> String {
    if v.is_negative() {
        format!("-{}", v.abs().format())
    } else {
        v.format()
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn format_err(line: usize, message: impl Into<String>) -> ProblemError {
    ProblemError::Format {
        line,
        message: message.into(),
    }
}

/// Parses a signed rational number such as `-1/2` or `0.25`.
fn parse_number(text: &str, line: usize, column: usize) -> Result<Rational, ProblemError> {
    let p: Polynomial<Rational> = parse_polynomial_at(text, &[], line, column)?;
    Ok(p.constant_term())
}

fn parse_relation(
    text: &str,
    vars: &[String],
    line: usize,
    column: usize,
    ops: &[(&str, bool)],
) -> Result<Polynomial<Rational>, ProblemError> {
    for &(op, flip) in ops {
        if let Some(i) = text.find(op) {
            let lhs = parse_polynomial_at::<Rational>(&text[..i], vars, line, column)?;
            let rhs_col = column + text[..i + op.len()].chars().count();
            let rhs = parse_polynomial_at::<Rational>(&text[i + op.len()..], vars, line, rhs_col)?;
            return Ok(if flip { &rhs - &lhs } else { &lhs - &rhs });
        }
    }
    Ok(parse_polynomial_at(text, vars, line, column)?)
}

/// Parses and validates a problem document.
pub fn parse_problem(document: &str) -> Result<PopProblem, ProblemError> {
    let mut vars: Option<Vec<String>> = None;
    let mut objective = None;
    let mut inequalities = Vec::new();
    let mut equalities = Vec::new();
    let mut c: Option<Rational> = None;
    let mut x0: Option<Vec<Rational>> = None;
    let mut margin: Option<Rational> = None;

    for (idx, raw) in document.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some((raw_key, value)) = content.split_once(':') else {
            return Err(format_err(line, "expected `key: value`"));
        };
        let key = raw_key.trim();
        // 1-based column of the first character after the colon
        let col = raw_key.chars().count() + 2;
        if vars.is_none() && key != "vars" {
            return Err(format_err(line, "the first record must be `vars:`"));
        }
        match key {
            "vars" => {
                if vars.is_some() {
                    return Err(format_err(line, "duplicate `vars:` record"));
                }
                let names: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(format_err(line, "no variables declared"));
                }
                for (i, name) in names.iter().enumerate() {
                    let valid = name.chars().next().is_some_and(|ch| ch.is_alphabetic() || ch == '_')
                        && name.chars().all(|ch| ch.is_alphanumeric() || ch == '_');
                    if !valid {
                        return Err(format_err(line, format!("invalid variable name `{name}`")));
                    }
                    if names[..i].contains(name) {
                        return Err(format_err(line, format!("duplicate variable `{name}`")));
                    }
                }
                vars = Some(names);
            }
            "obj" => {
                if objective.is_some() {
                    return Err(format_err(line, "duplicate `obj:` record"));
                }
                objective = Some(parse_polynomial_at::<Rational>(
                    value,
                    vars.as_ref().unwrap(),
                    line,
                    col,
                )?);
            }
            "ineq" => {
                let g = parse_relation(value, vars.as_ref().unwrap(), line, col, &[(">=", false), ("<=", true)])?;
                inequalities.push(g);
            }
            "eq" => {
                let ops: &[(&str, bool)] = if value.contains("==") {
                    &[("==", false)]
                } else {
                    &[("=", false)]
                };
                equalities.push(parse_relation(value, vars.as_ref().unwrap(), line, col, ops)?);
            }
            "c" => {
                if c.is_some() {
                    return Err(format_err(line, "duplicate `c:` record"));
                }
                c = Some(parse_number(value, line, col)?);
            }
            "x0" => {
                if x0.is_some() {
                    return Err(format_err(line, "duplicate `x0:` record"));
                }
                let inner = value.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
                let parts: Vec<&str> = if inner.contains(',') {
                    inner.split(',').collect()
                } else {
                    inner.split_whitespace().collect()
                };
                let pts = parts
                    .into_iter()
                    .map(|s| parse_number(s, line, col))
                    .collect::<Result<Vec<_>, _>>()?;
                x0 = Some(pts);
            }
            "margin" => {
                if margin.is_some() {
                    return Err(format_err(line, "duplicate `margin:` record"));
                }
                let m = parse_number(value, line, col)?;
                if !m.is_positive() {
                    return Err(ProblemError::NonPositiveMargin(signed(&m)));
                }
                margin = Some(m);
            }
            other => return Err(format_err(line, format!("unknown record `{other}`"))),
        }
    }

    let variables = vars.ok_or(ProblemError::MissingVariables)?;
    let objective = objective.ok_or(ProblemError::MissingObjective)?;
    let bound = match (c, x0) {
        (Some(_), Some(_)) => {
            return Err(format_err(0, "give either `c:` or `x0:`, not both"));
        }
        (Some(c), None) => BoundDatum::Value(c),
        (None, Some(x0)) => BoundDatum::Point {
            x0,
            margin: margin.unwrap_or_else(Rational::one),
        },
        (None, None) => return Err(ProblemError::MissingBound),
    };
    PopProblem::new(variables, objective, inequalities, equalities, bound)
}
