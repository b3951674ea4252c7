use serde::Serialize;

use crate::problem::SdpProblem;

/// Size and scaling summary of a program.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub block_dims: Vec<usize>,
    pub num_free: usize,
    pub num_constraints: usize,
    pub nonzeros: usize,
    /// Smallest and largest absolute nonzero constraint coefficient, if any.
    pub coefficient_range: Option<(f64, f64)>,
    /// Smallest and largest absolute nonzero right-hand side, if any.
    pub rhs_range: Option<(f64, f64)>,
}

fn widen(range: &mut Option<(f64, f64)>, v: f64) {
    let a = v.abs();
    if a == 0.0 {
        return;
    }
    *range = Some(match *range {
        None => (a, a),
        Some((lo, hi)) => (lo.min(a), hi.max(a)),
    });
}

pub fn condition_report(problem: &SdpProblem) -> ConditionReport {
    let mut coefficient_range = None;
    let mut rhs_range = None;
    let mut nonzeros = 0;
    for c in problem.constraints() {
        for e in &c.form.psd {
            widen(&mut coefficient_range, e.value);
        }
        for &(_, v) in &c.form.free {
            widen(&mut coefficient_range, v);
        }
        nonzeros += c.form.psd.len() + c.form.free.len();
        widen(&mut rhs_range, c.rhs);
    }
    ConditionReport {
        block_dims: problem.block_dims().to_vec(),
        num_free: problem.num_free(),
        num_constraints: problem.num_constraints(),
        nonzeros,
        coefficient_range,
        rhs_range,
    }
}
