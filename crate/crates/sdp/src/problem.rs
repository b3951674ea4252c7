//! Block-diagonal standard-form semidefinite programs.
//!
//! The primal program is
//!
//! ```text
//! minimize    <C, X> + c_f' u
//! subject to  <A_i, X> + f_i' u = b_i      i = 1..m
//!             X = diag(X_1, ..., X_p),  X_j PSD
//!             u free
//! ```
//!
//! and its dual is `maximize b'y  s.t.  C - sum_i y_i A_i = S PSD,  F'y = c_f`.
//! Matrix data is given as upper-triangle triplets; an off-diagonal entry
//! `(r, c, v)` stands for both `A[r][c]` and `A[c][r]`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::SdpError;

/// One upper-triangle entry of a symmetric block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Linear functional over the PSD blocks and the free variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LinearForm {
    pub psd: Vec<MatEntry>,
    pub free: Vec<(usize, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `(row, col)` of `block`; the pair is normalized to the
    /// upper triangle.
    pub fn push_psd(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        self.psd.push(MatEntry { block, row, col, value });
    }

    pub fn push_free(&mut self, index: usize, value: f64) {
        self.free.push((index, value));
    }

    pub fn is_empty(&self) -> bool {
        self.psd.is_empty() && self.free.is_empty()
    }
}

/// A single equality constraint `<A, X> + f'u = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub form: LinearForm,
    pub rhs: f64,
}

/// Standard-form block SDP (minimization).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpProblem {
    block_dims: Vec<usize>,
    num_free: usize,
    objective: LinearForm,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>, num_free: usize) -> Self {
        Self {
            block_dims,
            num_free,
            objective: LinearForm::new(),
            constraints: Vec::new(),
        }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Total order of the PSD cone, i.e. the sum of block dimensions.
    pub fn cone_order(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn set_objective(&mut self, objective: LinearForm) {
        self.objective = objective;
    }

    pub fn add_constraint(&mut self, form: LinearForm, rhs: f64) -> usize {
        self.constraints.push(Constraint { form, rhs });
        self.constraints.len() - 1
    }

    /// Checks that every index refers to an existing block entry or free
    /// variable and that all data is finite.
    pub fn validate(&self) -> Result<(), SdpError> {
        if let Some(j) = self.block_dims.iter().position(|&d| d == 0) {
            return Err(SdpError::Structure(format!("block {j} has dimension 0")));
        }
        self.check_form(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            self.check_form(&c.form, &format!("constraint {i}"))?;
            if !c.rhs.is_finite() {
                return Err(SdpError::Structure(format!(
                    "constraint {i} has a non-finite right-hand side"
                )));
            }
        }
        Ok(())
    }

    fn check_form(&self, form: &LinearForm, what: &str) -> Result<(), SdpError> {
        for e in &form.psd {
            let dim = *self
                .block_dims
                .get(e.block)
                .ok_or_else(|| SdpError::Structure(format!("{what}: block index {} out of range", e.block)))?;
            if e.row >= dim || e.col >= dim {
                return Err(SdpError::Structure(format!(
                    "{what}: entry ({}, {}) outside block {} of dimension {dim}",
                    e.row, e.col, e.block
                )));
            }
            if e.row > e.col {
                return Err(SdpError::Structure(format!(
                    "{what}: entry ({}, {}) is below the diagonal",
                    e.row, e.col
                )));
            }
            if !e.value.is_finite() {
                return Err(SdpError::Structure(format!("{what}: non-finite coefficient")));
            }
        }
        for &(k, v) in &form.free {
            if k >= self.num_free {
                return Err(SdpError::Structure(format!(
                    "{what}: free variable {k} out of range ({} declared)",
                    self.num_free
                )));
            }
            if !v.is_finite() {
                return Err(SdpError::Structure(format!("{what}: non-finite coefficient")));
            }
        }
        Ok(())
    }

    /// Plain-text dump for cross-checking against external solvers.
    ///
    /// ```text
    /// popnc-sdp 1
    /// blocks <p> <d_1> ... <d_p>
    /// free <n_f>
    /// constraints <m>
    /// obj psd <block> <row> <col> <value>
    /// obj free <index> <value>
    /// con <i> rhs <value>
    /// con <i> psd <block> <row> <col> <value>
    /// con <i> free <index> <value>
    /// end
    /// ```
    ///
    /// Indices are 0-based, matrix entries upper-triangular, values printed
    /// with round-trip precision. The program is a minimization.
    pub fn to_debug_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "popnc-sdp 1");
        let dims: Vec<String> = self.block_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "blocks {} {}", self.block_dims.len(), dims.join(" "));
        let _ = writeln!(out, "free {}", self.num_free);
        let _ = writeln!(out, "constraints {}", self.constraints.len());
        for e in &self.objective.psd {
            let _ = writeln!(out, "obj psd {} {} {} {:e}", e.block, e.row, e.col, e.value);
        }
        for (k, v) in &self.objective.free {
            let _ = writeln!(out, "obj free {k} {v:e}");
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = writeln!(out, "con {i} rhs {:e}", c.rhs);
            for e in &c.form.psd {
                let _ = writeln!(out, "con {i} psd {} {} {} {:e}", e.block, e.row, e.col, e.value);
            }
            for (k, v) in &c.form.free {
                let _ = writeln!(out, "con {i} free {k} {v:e}");
            }
        }
        out.push_str("end\n");
        out
    }

    /// Parses the format written by [`SdpProblem::to_debug_text`].
    pub fn from_debug_text(text: &str) -> Result<Self, SdpError> {
        let bad = |line: usize, msg: &str| SdpError::Parse {
            line: line + 1,
            message: msg.to_string(),
        };
        let mut problem: Option<SdpProblem> = None;
        let mut declared = 0usize;
        let mut rhs: Vec<f64> = Vec::new();
        let mut forms: Vec<LinearForm> = Vec::new();
        let mut ended = false;
        for (ln, raw) in text.lines().enumerate() {
            let tok: Vec<&str> = raw.split_whitespace().collect();
            if tok.is_empty() {
                continue;
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
            let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad index"));
            match tok[0] {
                "popnc-sdp" => {}
                "blocks" => {
                    let p = idx(tok.get(1).ok_or_else(|| bad(ln, "missing count"))?)?;
                    if tok.len() != p + 2 {
                        return Err(bad(ln, "block count mismatch"));
                    }
                    let dims = tok[2..].iter().map(|s| idx(s)).collect::<Result<_, _>>()?;
                    problem = Some(SdpProblem::new(dims, 0));
                }
                "free" => {
                    let p = problem.as_mut().ok_or_else(|| bad(ln, "free before blocks"))?;
                    p.num_free = idx(tok.get(1).ok_or_else(|| bad(ln, "missing count"))?)?;
                }
                "constraints" => {
                    declared = idx(tok.get(1).ok_or_else(|| bad(ln, "missing count"))?)?;
                    rhs = vec![0.0; declared];
                    forms = vec![LinearForm::new(); declared];
                }
                "obj" => {
                    let p = problem.as_mut().ok_or_else(|| bad(ln, "obj before blocks"))?;
                    parse_entry(&tok[1..], &mut p.objective).map_err(|m| bad(ln, m))?;
                }
                "con" => {
                    let i = idx(tok.get(1).ok_or_else(|| bad(ln, "missing index"))?)?;
                    if i >= declared {
                        return Err(bad(ln, "constraint index out of range"));
                    }
                    if tok.get(2) == Some(&"rhs") {
                        rhs[i] = num(tok.get(3).ok_or_else(|| bad(ln, "missing rhs"))?)?;
                    } else {
                        parse_entry(&tok[2..], &mut forms[i]).map_err(|m| bad(ln, m))?;
                    }
                }
                "end" => {
                    ended = true;
                    break;
                }
                _ => return Err(bad(ln, "unknown record")),
            }
        }
        if !ended {
            return Err(SdpError::Parse {
                line: text.lines().count(),
                message: "missing end record".into(),
            });
        }
        let mut problem = problem.ok_or_else(|| SdpError::Parse {
            line: 1,
            message: "missing blocks record".into(),
        })?;
        for (form, r) in forms.into_iter().zip(rhs) {
            problem.add_constraint(form, r);
        }
        problem.validate()?;
        Ok(problem)
    }
}

fn parse_entry(tok: &[&str], form: &mut LinearForm) -> Result<(), &'static str> {
    let idx = |s: Option<&&str>| s.ok_or("missing field")?.parse::<usize>().map_err(|_| "bad index");
    let num = |s: Option<&&str>| s.ok_or("missing field")?.parse::<f64>().map_err(|_| "bad number");
    match tok.first() {
        Some(&"psd") => {
            let (b, r, c) = (idx(tok.get(1))?, idx(tok.get(2))?, idx(tok.get(3))?);
            form.push_psd(b, r, c, num(tok.get(4))?);
            Ok(())
        }
        Some(&"free") => {
            form.push_free(idx(tok.get(1))?, num(tok.get(2))?);
            Ok(())
        }
        _ => Err("expected psd or free entry"),
    }
}
