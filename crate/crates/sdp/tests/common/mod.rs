//! Hand-built programs with known status and value.

#![allow(dead_code)]

use popnc_sdp::{LinearForm, SdpProblem, SdpStatus};

pub fn form(psd: &[(usize, usize, usize, f64)], free: &[(usize, f64)]) -> LinearForm {
    let mut f = LinearForm::new();
    for &(b, r, c, v) in psd {
        f.push_psd(b, r, c, v);
    }
    for &(k, v) in free {
        f.push_free(k, v);
    }
    f
}

/// minimize x  s.t. [[x, 1], [1, x]] PSD
pub fn arrow() -> SdpProblem {
    let mut p = SdpProblem::new(vec![2], 1);
    p.set_objective(form(&[], &[(0, 1.0)]));
    p.add_constraint(form(&[(0, 0, 0, 1.0)], &[(0, -1.0)]), 0.0);
    p.add_constraint(form(&[(0, 1, 1, 1.0)], &[(0, -1.0)]), 0.0);
    p.add_constraint(form(&[(0, 0, 1, 0.5)], &[]), 1.0);
    p
}

/// <I, X> = -1
pub fn negative_trace() -> SdpProblem {
    let mut p = SdpProblem::new(vec![3], 0);
    p.add_constraint(form(&[(0, 0, 0, 1.0), (0, 1, 1, 1.0), (0, 2, 2, 1.0)], &[]), -1.0);
    p
}

/// maximize l  s.t. 1 - l = X >= 0 (1x1)
pub fn scalar_bound() -> SdpProblem {
    let mut p = SdpProblem::new(vec![1], 1);
    p.set_objective(form(&[], &[(0, -1.0)]));
    p.add_constraint(form(&[(0, 0, 0, 1.0)], &[(0, 1.0)]), 1.0);
    p
}

/// maximize u  s.t. X = u, X >= 0: unbounded
pub fn unbounded() -> SdpProblem {
    let mut p = SdpProblem::new(vec![1], 1);
    p.set_objective(form(&[], &[(0, -1.0)]));
    p.add_constraint(form(&[(0, 0, 0, 1.0)], &[(0, -1.0)]), 0.0);
    p
}

/// minimize tr X  s.t. X_00 = 1
pub fn trace_min() -> SdpProblem {
    let mut p = SdpProblem::new(vec![2], 0);
    p.set_objective(form(&[(0, 0, 0, 1.0), (0, 1, 1, 1.0)], &[]));
    p.add_constraint(form(&[(0, 0, 0, 1.0)], &[]), 1.0);
    p
}

/// LP: minimize x1 - x2  s.t. x1 + x2 = 1, x >= 0
pub fn lp_simplex() -> SdpProblem {
    let mut p = SdpProblem::new(vec![1, 1], 0);
    p.set_objective(form(&[(0, 0, 0, 1.0), (1, 0, 0, -1.0)], &[]));
    p.add_constraint(form(&[(0, 0, 0, 1.0), (1, 0, 0, 1.0)], &[]), 1.0);
    p
}

/// LP: x1 + x2 = -1, x >= 0
pub fn lp_infeasible() -> SdpProblem {
    let mut p = SdpProblem::new(vec![1, 1], 0);
    p.add_constraint(form(&[(0, 0, 0, 1.0), (1, 0, 0, 1.0)], &[]), -1.0);
    p
}

/// LP: minimize -x1  s.t. x1 - x2 = 0, x >= 0
pub fn lp_unbounded() -> SdpProblem {
    let mut p = SdpProblem::new(vec![1, 1], 0);
    p.set_objective(form(&[(0, 0, 0, -1.0)], &[]));
    p.add_constraint(form(&[(0, 0, 0, 1.0), (1, 0, 0, -1.0)], &[]), 0.0);
    p
}

/// minimize u  s.t. u - X = 2
pub fn free_shift() -> SdpProblem {
    let mut p = SdpProblem::new(vec![1], 1);
    p.set_objective(form(&[], &[(0, 1.0)]));
    p.add_constraint(form(&[(0, 0, 0, -1.0)], &[(0, 1.0)]), 2.0);
    p
}

/// Lovasz theta of the 5-cycle: maximize <J, X>  s.t. tr X = 1, X_ij = 0 on edges.
pub fn theta_c5() -> SdpProblem {
    let mut p = SdpProblem::new(vec![5], 0);
    let mut obj = LinearForm::new();
    for i in 0..5 {
        for j in i..5 {
            obj.push_psd(0, i, j, -1.0);
        }
    }
    p.set_objective(obj);
    p.add_constraint(form(&(0..5).map(|i| (0, i, i, 1.0)).collect::<Vec<_>>(), &[]), 1.0);
    for i in 0..5 {
        p.add_constraint(form(&[(0, i, (i + 1) % 5, 1.0)], &[]), 0.0);
    }
    p
}

/// Two free variables pinned by a PSD coupling and an equality: u0 + u1 = 3,
/// [[u0, 0], [0, u1 - 1]] PSD, minimize u0.
pub fn free_pair() -> SdpProblem {
    let mut p = SdpProblem::new(vec![2], 2);
    p.set_objective(form(&[], &[(0, 1.0)]));
    p.add_constraint(form(&[(0, 0, 0, 1.0)], &[(0, -1.0)]), 0.0);
    p.add_constraint(form(&[(0, 1, 1, 1.0)], &[(1, -1.0)]), -1.0);
    p.add_constraint(form(&[(0, 0, 1, 1.0)], &[]), 0.0);
    p.add_constraint(form(&[], &[(0, 1.0), (1, 1.0)]), 3.0);
    p
}

/// [[x, 1], [1, x]] PSD with x = -1 (dual certificate exists).
pub fn arrow_pinned_negative() -> SdpProblem {
    let mut p = arrow();
    p.add_constraint(form(&[], &[(0, 1.0)]), -1.0);
    p
}

/// Name, program, expected status and, for optimal cases, the optimal value.
pub fn suite() -> Vec<(&'static str, SdpProblem, SdpStatus, Option<f64>)> {
    vec![
        ("arrow", arrow(), SdpStatus::Optimal, Some(1.0)),
        ("negative_trace", negative_trace(), SdpStatus::PrimalInfeasible, None),
        ("scalar_bound", scalar_bound(), SdpStatus::Optimal, Some(-1.0)),
        ("unbounded", unbounded(), SdpStatus::DualInfeasible, None),
        ("trace_min", trace_min(), SdpStatus::Optimal, Some(1.0)),
        ("lp_simplex", lp_simplex(), SdpStatus::Optimal, Some(-1.0)),
        ("lp_infeasible", lp_infeasible(), SdpStatus::PrimalInfeasible, None),
        ("lp_unbounded", lp_unbounded(), SdpStatus::DualInfeasible, None),
        ("free_shift", free_shift(), SdpStatus::Optimal, Some(2.0)),
        ("theta_c5", theta_c5(), SdpStatus::Optimal, Some(-(5f64).sqrt())),
        ("free_pair", free_pair(), SdpStatus::Optimal, Some(0.0)),
        (
            "arrow_pinned_negative",
            arrow_pinned_negative(),
            SdpStatus::PrimalInfeasible,
            None,
        ),
    ]
}
