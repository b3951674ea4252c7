//! Hierarchies over increasing relaxation order with stopping rules.

use std::path::PathBuf;
use std::time::Instant;

use num_traits::Signed;
use popnc_sdp::{solve, SdpError, SdpStatus, Settings};
use serde::Serialize;
use thiserror::Error;

use crate::certificate::{
    extract_certificate, tagged_generators, verify_certificate, ModuleCertificate, Verification, DEFAULT_EIG_TOL,
    DEFAULT_RESIDUAL_TOL,
};
use crate::io::PopProblem;
use crate::poly::{Coeff, Polynomial, Rational};
use crate::sos::{
    build_archimedean_check, build_coercivity_check, build_hierarchy_step, BuildError, GeneratorSet, MembershipProgram,
};

pub const DEFAULT_K_MAX: u32 = 6;
pub const DEFAULT_STAB_TOL: f64 = 1e-6;
pub const DEFAULT_POS_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("solver failure: {0}")]
    Solver(#[from] SdpError),
    #[error("cannot write SDP dump: {0}")]
    Dump(#[from] std::io::Error),
    #[error("invalid multipliers: {0}")]
    Multipliers(String),
}

#[derive(Debug, Clone)]
pub struct DriverOptions {
    /// First order to solve; raised to the minimal order when lower.
    pub k_start: Option<u32>,
    pub k_max: u32,
    pub stab_tol: f64,
    pub pos_tol: f64,
    /// Relative residual tolerance for certificate verification.
    pub verify_tol: f64,
    pub eig_tol: f64,
    pub settings: Settings,
    /// Write each order's SDP in the solver debug format into this directory.
    pub dump_sdp: Option<PathBuf>,
}

impl Default for DriverOptions {
    fn default() -> Self {
        Self {
            k_start: None,
            k_max: DEFAULT_K_MAX,
            stab_tol: DEFAULT_STAB_TOL,
            pos_tol: DEFAULT_POS_TOL,
            verify_tol: DEFAULT_RESIDUAL_TOL,
            eig_tol: DEFAULT_EIG_TOL,
            settings: Settings::default(),
            dump_sdp: None,
        }
    }
}

/// One solved order.
#[derive(Debug, Clone, Serialize)]
pub struct OrderRecord {
    pub order: u32,
    pub status: SdpStatus,
    /// The optimal bound (`f_k` or `rho_k`), present only for optimal solves.
    pub value: Option<f64>,
    pub iterations: usize,
    pub seconds: f64,
    pub block_dims: Vec<usize>,
    pub num_free: usize,
    pub num_constraints: usize,
    pub verification: Option<Verification>,
}

impl OrderRecord {
    pub fn verified(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.passed)
    }
}

struct Solved {
    record: OrderRecord,
    certificate: Option<ModuleCertificate<f64>>,
}

fn run_order(program: &MembershipProgram, name: &str, opts: &DriverOptions) -> Result<Solved, DriverError> {
    let k = program.order;
    if let Some(dir) = &opts.dump_sdp {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{name}_k{k}.sdp")), program.sdp.to_debug_text())?;
    }
    let mut record = OrderRecord {
        order: k,
        status: SdpStatus::PrimalInfeasible,
        value: None,
        iterations: 0,
        seconds: 0.0,
        block_dims: program.sdp.block_dims().to_vec(),
        num_free: program.sdp.num_free(),
        num_constraints: program.sdp.num_constraints(),
        verification: None,
    };
    if program.is_trivially_infeasible() {
        return Ok(Solved {
            record,
            certificate: None,
        });
    }
    let start = Instant::now();
    let solution = solve(&program.sdp, &opts.settings)?;
    record.seconds = start.elapsed().as_secs_f64();
    record.status = solution.status;
    record.iterations = solution.iterations;
    let certificate = match extract_certificate(&solution, program) {
        Ok(cert) => {
            let gens = tagged_generators(&program.generators);
            record.value = Some(cert.bound);
            record.verification = Some(verify_certificate(&cert, &gens, opts.verify_tol, opts.eig_tol));
            Some(cert)
        }
        Err(_) => None,
    };
    Ok(Solved { record, certificate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceVerdict {
    Stabilized,
    ReachedMaxOrder,
    InfeasibleAtAllOrders,
}

#[derive(Debug, Clone)]
pub struct MinimizeReport {
    pub orders: Vec<OrderRecord>,
    /// Bound from the last order with an optimal solve.
    pub final_bound: Option<f64>,
    pub final_order: Option<u32>,
    pub verdict: ConvergenceVerdict,
    pub certificate: Option<ModuleCertificate<f64>>,
    pub caveats: Vec<String>,
}

impl MinimizeReport {
    /// `(k, f_k)` for the optimal orders.
    pub fn bounds(&self) -> Vec<(u32, f64)> {
        self.orders
            .iter()
            .filter_map(|r| r.value.map(|v| (r.order, v)))
            .collect()
    }
}

/// Lower bounds `f_k = sup { lambda : f - lambda in M_k(g; h; c - f) }`.
///
/// Stops once two consecutive optimal orders agree within
/// `stab_tol * (1 + |f_k|)`.
pub fn minimize(problem: &PopProblem, opts: &DriverOptions) -> Result<MinimizeReport, DriverError> {
    let gens = GeneratorSet::from_problem(problem);
    let k_min = gens.min_order(&problem.objective.to_f64());
    let k_start = opts.k_start.unwrap_or(k_min).max(k_min);
    let mut orders = Vec::new();
    let mut certificate = None;
    let mut stabilized = false;
    let mut previous: Option<f64> = None;
    for k in k_start..=opts.k_max.max(k_start) {
        let program = build_hierarchy_step(problem, k)?;
        let solved = run_order(&program, "minimize", opts)?;
        let value = solved.record.value;
        orders.push(solved.record);
        if let Some(v) = value {
            certificate = solved.certificate;
            if previous.is_some_and(|p| (v - p).abs() <= opts.stab_tol * (1.0 + v.abs())) {
                stabilized = true;
                break;
            }
        }
        // an order without a bound breaks the run of agreeing orders
        previous = value;
    }
    let last = orders.iter().rev().find(|r| r.value.is_some());
    let verdict = if stabilized {
        ConvergenceVerdict::Stabilized
    } else if orders.iter().all(|r| r.status == SdpStatus::PrimalInfeasible) {
        ConvergenceVerdict::InfeasibleAtAllOrders
    } else {
        ConvergenceVerdict::ReachedMaxOrder
    };
    let mut caveats = vec![
        "each f_k is a lower bound on the infimum of f over K; convergence to the minimum is guaranteed only when M(g; h; c - f) is Archimedean, which this command does not check".to_string(),
        "the minimum is assumed to be attained; this is not checked".to_string(),
    ];
    if stabilized {
        caveats.push(
            "stabilization of two consecutive orders is a heuristic stopping rule, not a proof of convergence"
                .to_string(),
        );
    }
    Ok(MinimizeReport {
        final_bound: last.and_then(|r| r.value),
        final_order: last.map(|r| r.order),
        orders,
        verdict,
        certificate,
        caveats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ArchimedeanVerdict {
    /// `radius - ||x||^2` lies in `M_k(g; h; c - f)`.
    Certified {
        radius: f64,
        order: u32,
    },
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct ArchimedeanReport {
    pub orders: Vec<OrderRecord>,
    pub verdict: ArchimedeanVerdict,
    pub certificate: Option<ModuleCertificate<f64>>,
}

/// Looks for the first order with finite `rho_k = inf { lambda : lambda - ||x||^2 in M_k }`
/// and a certificate that verifies.
pub fn check_archimedean(problem: &PopProblem, opts: &DriverOptions) -> Result<ArchimedeanReport, DriverError> {
    let gens = GeneratorSet::from_problem(problem);
    let n = problem.num_vars();
    let k_min = gens.min_order(&(-Polynomial::<f64>::norm_squared(n)));
    let k_start = opts.k_start.unwrap_or(k_min).max(k_min);
    let mut orders = Vec::new();
    for k in k_start..=opts.k_max {
        let program = build_archimedean_check(problem, k)?;
        let solved = run_order(&program, "arch", opts)?;
        let certified = solved.record.verified();
        let value = solved.record.value;
        orders.push(solved.record);
        if certified {
            return Ok(ArchimedeanReport {
                orders,
                verdict: ArchimedeanVerdict::Certified {
                    radius: value.expect("verified solves carry a value"),
                    order: k,
                },
                certificate: solved.certificate,
            });
        }
    }
    Ok(ArchimedeanReport {
        orders,
        verdict: ArchimedeanVerdict::Inconclusive,
        certificate: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CoercivityVerdict {
    /// `f_d >= delta` on the unit sphere, so `f_d(x) >= delta ||x||^d`.
    Certified {
        delta: f64,
        order: u32,
    },
    Inconclusive,
    NotApplicable {
        reason: String,
    },
}

#[derive(Debug, Clone)]
pub struct CoercivityReport {
    pub degree: u32,
    pub leading_form: Polynomial<f64>,
    /// Every top-degree pure power `x_i^d` has a positive coefficient.
    pub diagonal_hint: bool,
    pub orders: Vec<OrderRecord>,
    pub verdict: CoercivityVerdict,
    pub certificate: Option<ModuleCertificate<f64>>,
}

/// Whether `f_d` contains `a_i x_i^d` with `a_i > 0` for every variable.
pub fn diagonal_hint(f: &Polynomial<f64>) -> bool {
    let d = f.degree();
    let n = f.num_vars();
    d > 0
        && d.is_multiple_of(2)
        && (0..n).all(|i| {
            let m = crate::poly::Monomial::var(n, i).pow(d);
            f.coeff(&m) > 0.0
        })
}

/// Sufficient test for coercivity: `sup { mu : f_d - mu in M_k(||x||^2 - 1) } > pos_tol`.
pub fn check_coercive(f: &Polynomial<f64>, opts: &DriverOptions) -> Result<CoercivityReport, DriverError> {
    let d = f.degree();
    let not_applicable = |reason: &str| CoercivityReport {
        degree: d,
        leading_form: f.leading_form().unwrap_or_else(|_| Polynomial::zero(f.num_vars())),
        diagonal_hint: false,
        orders: Vec::new(),
        verdict: CoercivityVerdict::NotApplicable {
            reason: reason.to_string(),
        },
        certificate: None,
    };
    if f.is_zero() {
        return Ok(not_applicable("the zero polynomial is not coercive"));
    }
    if d == 0 {
        return Ok(not_applicable("a constant polynomial is not coercive"));
    }
    if d % 2 == 1 {
        return Ok(not_applicable("a coercive polynomial must have even degree"));
    }
    let k_min = d / 2;
    let k_start = opts.k_start.unwrap_or(k_min).max(k_min);
    let mut orders = Vec::new();
    let mut verdict = CoercivityVerdict::Inconclusive;
    let mut certificate = None;
    for k in k_start..=opts.k_max {
        let program = build_coercivity_check(f, k)?;
        let solved = run_order(&program, "coercive", opts)?;
        let rec = solved.record;
        if rec.verified() && rec.value.is_some_and(|v| v > opts.pos_tol) {
            verdict = CoercivityVerdict::Certified {
                delta: rec.value.expect("checked"),
                order: k,
            };
            certificate = solved.certificate;
            orders.push(rec);
            break;
        }
        orders.push(rec);
    }
    Ok(CoercivityReport {
        degree: d,
        leading_form: f.leading_form().expect("nonzero"),
        diagonal_hint: diagonal_hint(f),
        orders,
        verdict,
        certificate,
    })
}

/// Multipliers for `alpha0 f - sum lambda_j g_j - sum mu_l h_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationMultipliers {
    pub alpha0: Rational,
    pub lambdas: Vec<Rational>,
    pub mus: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct SufficientReport {
    pub combination: Polynomial<Rational>,
    pub coercivity: CoercivityReport,
    /// A certified coercive combination makes `M(g; h; c - f)` Archimedean.
    pub archimedean: bool,
}

/// Archimedean test through coercivity of a nonnegative combination.
pub fn check_archimedean_sufficient(
    problem: &PopProblem,
    multipliers: &CombinationMultipliers,
    opts: &DriverOptions,
) -> Result<SufficientReport, DriverError> {
    let m = &multipliers;
    if m.lambdas.len() != problem.inequalities.len() {
        return Err(DriverError::Multipliers(format!(
            "{} inequality multipliers for {} inequalities",
            m.lambdas.len(),
            problem.inequalities.len()
        )));
    }
    if m.mus.len() != problem.equalities.len() {
        return Err(DriverError::Multipliers(format!(
            "{} equality multipliers for {} equalities",
            m.mus.len(),
            problem.equalities.len()
        )));
    }
    if m.alpha0.is_negative() {
        return Err(DriverError::Multipliers(format!(
            "alpha0 = {} is negative",
            m.alpha0.format()
        )));
    }
    if let Some((j, l)) = m.lambdas.iter().enumerate().find(|(_, l)| l.is_negative()) {
        return Err(DriverError::Multipliers(format!(
            "lambda{} = {} is negative",
            j + 1,
            l.format()
        )));
    }
    let mut combination = problem.objective.scale(&m.alpha0);
    for (g, l) in problem.inequalities.iter().zip(&m.lambdas) {
        combination = &combination - &g.scale(l);
    }
    for (h, mu) in problem.equalities.iter().zip(&m.mus) {
        combination = &combination - &h.scale(mu);
    }
    let coercivity = check_coercive(&combination.to_f64(), opts)?;
    let archimedean = matches!(coercivity.verdict, CoercivityVerdict::Certified { .. });
    Ok(SufficientReport {
        combination,
        coercivity,
        archimedean,
    })
}
