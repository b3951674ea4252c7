//! Positivity certificates: extraction from solver output, verification,
//! the `(1 + psi) f = q'` transformation and square extraction.

mod decompose;
mod psd;
mod transform;

pub use decompose::{sos_decompose, SosDecomposition, CLIP_RELATIVE};
pub use psd::GramScalar;
pub use transform::{corollary_transform, TransformedCertificate};

use nalgebra::DMatrix;
use popnc_sdp::{SdpSolution, SdpStatus};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::PopProblem;
use crate::poly::{Coeff, Monomial, Polynomial, Rational};
use crate::sos::{Direction, GeneratorSet, GeneratorTag, MembershipProgram};

/// Default relative residual tolerance for [`verify_certificate`].
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-5;
/// Default eigenvalue tolerance for Gram matrices.
pub const DEFAULT_EIG_TOL: f64 = 1e-9;
/// Gram blocks with Frobenius norm below this are left out of printed output.
pub const PRINT_DROP_NORM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("cannot extract a certificate from a solve with status {0}")]
    NotOptimal(SdpStatus),
    #[error("Gram matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("no generator tagged `{0}`")]
    MissingGenerator(String),
    #[error("bound c + s*lambda = {0} is negative, the transformed weight would not be SOS")]
    NegativeBound(f64),
    #[error("transformed identity does not hold (residual {0:e})")]
    TransformFailed(f64),
}

/// Which term of the quadratic module a weight multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "generator")]
pub enum WeightTag {
    /// The free SOS term `sigma_0`.
    Constant,
    Generator(GeneratorTag),
}

impl WeightTag {
    pub fn label(&self) -> String {
        match self {
            WeightTag::Constant => "sigma0".to_string(),
            WeightTag::Generator(t) => t.label(),
        }
    }
}

/// `sigma = v' G v` with `v` the listed monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct SosWeight<C = f64> {
    pub tag: WeightTag,
    pub basis: Vec<Monomial>,
    /// Row-major symmetric Gram matrix.
    pub gram: Vec<Vec<C>>,
}

impl<C: Coeff> SosWeight<C> {
    pub fn polynomial(&self, num_vars: usize) -> Polynomial<C> {
        let mut p = Polynomial::zero(num_vars);
        for (a, ma) in self.basis.iter().enumerate() {
            for (b, mb) in self.basis.iter().enumerate() {
                p.add_term(ma.mul(mb), self.gram[a][b].clone());
            }
        }
        p
    }

    pub fn gram_f64(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, n, |i, j| self.gram[i][j].to_f64())
    }
}

/// `phi_l`, the free multiplier of an equality generator.
#[derive(Debug, Clone, PartialEq)]
pub struct EqMultiplier<C = f64> {
    pub tag: GeneratorTag,
    pub poly: Polynomial<C>,
}

/// Witness that `target + s*bound` lies in a truncated quadratic module:
///
/// ```text
/// target + s*bound = sigma_0 + sum_j sigma_j g_j + sum_l phi_l h_l
/// ```
///
/// with `s` given by `direction` (`-1` for a maximized bound, `+1` for a
/// minimized one, `0` for plain membership).
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleCertificate<C = f64> {
    pub order: u32,
    pub direction: Direction,
    pub target: Polynomial<C>,
    pub bound: C,
    pub sos_weights: Vec<SosWeight<C>>,
    pub eq_multipliers: Vec<EqMultiplier<C>>,
    /// l1 norm of the identity mismatch, recomputed when the certificate is
    /// built.
    pub residual: f64,
}

impl<C: GramScalar> ModuleCertificate<C> {
    /// Assembles a certificate and computes its residual against `gens`.
    pub fn new(
        order: u32,
        direction: Direction,
        target: Polynomial<C>,
        bound: C,
        sos_weights: Vec<SosWeight<C>>,
        eq_multipliers: Vec<EqMultiplier<C>>,
        gens: &[(GeneratorTag, Polynomial<C>)],
    ) -> Result<Self, CertificateError> {
        let mut cert = Self {
            order,
            direction,
            target,
            bound,
            sos_weights,
            eq_multipliers,
            residual: 0.0,
        };
        cert.residual = cert.mismatch(gens)?.l1_norm().to_f64();
        Ok(cert)
    }

    pub fn num_vars(&self) -> usize {
        self.target.num_vars()
    }

    /// `target + s*bound`
    pub fn shifted_target(&self) -> Polynomial<C> {
        let n = self.num_vars();
        let shift = match self.direction {
            Direction::MaximizeLambda => -self.bound.clone(),
            Direction::MinimizeLambda => self.bound.clone(),
            Direction::Feasibility => C::zero(),
        };
        &self.target + &Polynomial::constant(n, shift)
    }

    /// `sigma_0 + sum sigma_j g_j + sum phi_l h_l - (target + s*bound)`
    pub fn mismatch(&self, gens: &[(GeneratorTag, Polynomial<C>)]) -> Result<Polynomial<C>, CertificateError> {
        let n = self.num_vars();
        let lookup = |tag: GeneratorTag| {
            gens.iter()
                .find(|(t, _)| *t == tag)
                .map(|(_, p)| p)
                .ok_or_else(|| CertificateError::MissingGenerator(tag.label()))
        };
        let mut acc = -self.shifted_target();
        for w in &self.sos_weights {
            let sigma = w.polynomial(n);
            acc = match w.tag {
                WeightTag::Constant => &acc + &sigma,
                WeightTag::Generator(tag) => &acc + &(&sigma * lookup(tag)?),
            };
        }
        for m in &self.eq_multipliers {
            acc = &acc + &(&m.poly * lookup(m.tag)?);
        }
        Ok(acc)
    }

    pub fn weight(&self, tag: WeightTag) -> Option<&SosWeight<C>> {
        self.sos_weights.iter().find(|w| w.tag == tag)
    }
}

impl ModuleCertificate<f64> {
    /// Human-readable form with 6 significant digits, omitting near-zero
    /// weights.
    pub fn pretty(&self, names: &[String]) -> String {
        let n = self.num_vars();
        let mut out = String::new();
        let lhs = match self.direction {
            Direction::MaximizeLambda => format!("({}) - {}", self.target.display_with(names), sig6(self.bound)),
            Direction::MinimizeLambda => format!("{} + ({})", sig6(self.bound), self.target.display_with(names)),
            Direction::Feasibility => self.target.display_with(names),
        };
        out.push_str(&format!("{lhs} = sum of the terms below (order {})\n", self.order));
        for w in &self.sos_weights {
            if w.gram_f64().norm() < PRINT_DROP_NORM {
                continue;
            }
            let p = round_poly(&w.polynomial(n));
            out.push_str(&format!("  {} = {}\n", w.tag.label(), p.display_with(names)));
        }
        for m in &self.eq_multipliers {
            if m.poly.l1_norm() < PRINT_DROP_NORM {
                continue;
            }
            out.push_str(&format!(
                "  phi[{}] = {}\n",
                m.tag.label(),
                round_poly(&m.poly).display_with(names)
            ));
        }
        out.push_str(&format!("  residual = {:e}\n", self.residual));
        out
    }

    /// Exact rational image (each float coefficient converted exactly).
    pub fn to_rational(&self) -> ModuleCertificate<Rational> {
        let q = crate::poly::rational_from_f64;
        ModuleCertificate {
            order: self.order,
            direction: self.direction,
            target: self.target.to_rational(),
            bound: q(self.bound),
            sos_weights: self
                .sos_weights
                .iter()
                .map(|w| SosWeight {
                    tag: w.tag,
                    basis: w.basis.clone(),
                    gram: w.gram.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect(),
                })
                .collect(),
            eq_multipliers: self
                .eq_multipliers
                .iter()
                .map(|m| EqMultiplier {
                    tag: m.tag,
                    poly: m.poly.to_rational(),
                })
                .collect(),
            residual: self.residual,
        }
    }
}

fn sig6(v: f64) -> String {
    let r: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    format!("{r}")
}

fn round_poly(p: &Polynomial<f64>) -> Polynomial<f64> {
    p.map_coeffs(|&c| format!("{c:.5e}").parse().unwrap_or(c))
}

/// The generators of a problem's module `M(g; h; c - f)` with exact
/// coefficients.
pub fn problem_generators(problem: &PopProblem) -> Vec<(GeneratorTag, Polynomial<Rational>)> {
    let mut out: Vec<_> = problem
        .inequalities
        .iter()
        .enumerate()
        .map(|(j, g)| (GeneratorTag::Inequality(j), g.clone()))
        .collect();
    out.push((GeneratorTag::BoundGap, problem.c_minus_f()));
    out.extend(
        problem
            .equalities
            .iter()
            .enumerate()
            .map(|(l, h)| (GeneratorTag::Equality(l), h.clone())),
    );
    out
}

/// Unscaled generators of a set, tagged.
pub fn tagged_generators(gens: &GeneratorSet) -> Vec<(GeneratorTag, Polynomial<f64>)> {
    gens.inequalities()
        .iter()
        .chain(gens.equalities())
        .map(|g| (g.tag, g.poly.clone()))
        .collect()
}

/// Reads the certificate out of an optimal solve of `program`.
pub fn extract_certificate(
    solution: &SdpSolution,
    program: &MembershipProgram,
) -> Result<ModuleCertificate<f64>, CertificateError> {
    if solution.status != SdpStatus::Optimal {
        return Err(CertificateError::NotOptimal(solution.status));
    }
    let n = program.num_vars();
    let ts = program.target_scale;
    let gens = &program.generators;
    let sos_weights = program
        .blocks
        .iter()
        .zip(&solution.x)
        .map(|(block, x)| {
            let (tag, scale) = match block.generator {
                None => (WeightTag::Constant, 1.0),
                Some(j) => {
                    let g = &gens.inequalities()[j];
                    (WeightTag::Generator(g.tag), g.scale)
                }
            };
            let f = ts / scale;
            let d = block.basis.len();
            SosWeight {
                tag,
                basis: block.basis.clone(),
                gram: (0..d)
                    .map(|i| (0..d).map(|j| 0.5 * (x[(i, j)] + x[(j, i)]) * f).collect())
                    .collect(),
            }
        })
        .collect();
    let eq_multipliers = program
        .multipliers
        .iter()
        .map(|fb| {
            let g = &gens.equalities()[fb.generator];
            let f = ts / g.scale;
            let terms = fb
                .basis
                .iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), solution.free[fb.offset + i] * f));
            EqMultiplier {
                tag: g.tag,
                poly: Polynomial::from_terms(n, terms).expect("basis arity"),
            }
        })
        .collect();
    let bound = program.lambda_index.map_or(0.0, |i| solution.free[i] * ts);
    ModuleCertificate::new(
        program.order,
        program.direction,
        program.target.clone(),
        bound,
        sos_weights,
        eq_multipliers,
        &tagged_generators(gens),
    )
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    /// l1 norm of the identity mismatch.
    pub residual: f64,
    /// `tol * (1 + ||target||_1)`
    pub threshold: f64,
    /// Smallest Gram eigenvalue over all weights (`+inf` when there are none).
    pub min_eigenvalue: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Recomputes the identity and checks every Gram matrix.
///
/// Passes iff the l1 residual is at most `tol * (1 + ||target||_1)` and all
/// Gram matrices are PSD up to `eig_tol` (exactly PSD in rational mode).
pub fn verify_certificate<C: GramScalar>(
    cert: &ModuleCertificate<C>,
    gens: &[(GeneratorTag, Polynomial<C>)],
    tol: f64,
    eig_tol: f64,
) -> Verification {
    let mut failures = Vec::new();
    let residual = match cert.mismatch(gens) {
        Ok(p) => p.l1_norm().to_f64(),
        Err(e) => {
            failures.push(e.to_string());
            f64::INFINITY
        }
    };
    let threshold = tol * (1.0 + cert.target.l1_norm().to_f64());
    // NaN residuals fail
    let within = residual <= threshold;
    if !within {
        failures.push(format!("identity residual {residual:e} exceeds {threshold:e}"));
    }
    let mut min_eigenvalue = f64::INFINITY;
    for w in &cert.sos_weights {
        let symmetric = w
            .gram
            .iter()
            .enumerate()
            .all(|(i, row)| row.len() == w.basis.len() && row.iter().enumerate().all(|(j, v)| *v == w.gram[j][i]));
        if w.gram.len() != w.basis.len() || !symmetric {
            failures.push(format!("{}: Gram matrix is not symmetric", w.tag.label()));
            continue;
        }
        let (ok, lmin) = C::psd_check(&w.gram, eig_tol);
        min_eigenvalue = min_eigenvalue.min(lmin);
        if !ok {
            failures.push(format!(
                "{}: Gram matrix not PSD (min eigenvalue {lmin:e})",
                w.tag.label()
            ));
        }
    }
    Verification {
        residual,
        threshold,
        min_eigenvalue,
        passed: failures.is_empty(),
        failures,
    }
}
