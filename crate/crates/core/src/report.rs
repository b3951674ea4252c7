//! JSON report documents and the certificate payload.
//!
//! Objects are emitted with sorted keys, so the same run always produces the
//! same document apart from the `seconds` fields.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::certificate::{EqMultiplier, ModuleCertificate, SosWeight, WeightTag, PRINT_DROP_NORM};
use crate::driver::{ArchimedeanReport, CoercivityReport, MinimizeReport, OrderRecord, SufficientReport};
use crate::io::PopProblem;
use crate::poly::{Coeff, Monomial, Polynomial};
use crate::sos::{Direction, GeneratorTag};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed certificate: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed certificate: {0}")]
    Shape(String),
}

/// Which program a certificate answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramKind {
    /// `f - lambda` in `M_k(g; h; c - f)`
    Minimize,
    /// `lambda - ||x||^2` in `M_k(g; h; c - f)`
    Archimedean,
    /// `f_d - mu` in `M_k(||x||^2 - 1)`
    Coercivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermPayload {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPayload {
    pub tag: WeightTag,
    pub label: String,
    /// Exponent vectors of the basis monomials.
    pub basis: Vec<Vec<u32>>,
    pub gram: Vec<Vec<f64>>,
    /// `v' G v`, 6 significant digits.
    #[serde(default)]
    pub polynomial: String,
    #[serde(default)]
    pub negligible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierPayload {
    pub tag: GeneratorTag,
    pub label: String,
    pub terms: Vec<TermPayload>,
    #[serde(default)]
    pub polynomial: String,
}

/// Full-precision certificate as stored in reports and read by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificatePayload {
    pub program: ProgramKind,
    pub variables: Vec<String>,
    pub order: u32,
    pub direction: Direction,
    pub bound: f64,
    pub target: Vec<TermPayload>,
    pub residual: f64,
    pub sos_weights: Vec<WeightPayload>,
    pub eq_multipliers: Vec<MultiplierPayload>,
}

fn terms(p: &Polynomial<f64>) -> Vec<TermPayload> {
    p.terms()
        .map(|(m, c)| TermPayload {
            exponents: m.exponents().to_vec(),
            coeff: *c,
        })
        .collect()
}

fn from_terms(n: usize, terms: &[TermPayload]) -> Result<Polynomial<f64>, ReportError> {
    Polynomial::from_terms(n, terms.iter().map(|t| (Monomial::new(t.exponents.clone()), t.coeff)))
        .map_err(|e| ReportError::Shape(e.to_string()))
}

fn rounded(p: &Polynomial<f64>, names: &[String]) -> String {
    p.map_coeffs(|&c| format!("{c:.5e}").parse().unwrap_or(c))
        .display_with(names)
}

impl CertificatePayload {
    pub fn new(program: ProgramKind, cert: &ModuleCertificate<f64>, names: &[String]) -> Self {
        let n = cert.num_vars();
        Self {
            program,
            variables: names.to_vec(),
            order: cert.order,
            direction: cert.direction,
            bound: cert.bound,
            target: terms(&cert.target),
            residual: cert.residual,
            sos_weights: cert
                .sos_weights
                .iter()
                .map(|w| WeightPayload {
                    tag: w.tag,
                    label: w.tag.label(),
                    basis: w.basis.iter().map(|m| m.exponents().to_vec()).collect(),
                    gram: w.gram.clone(),
                    polynomial: rounded(&w.polynomial(n), names),
                    negligible: w.gram_f64().norm() < PRINT_DROP_NORM,
                })
                .collect(),
            eq_multipliers: cert
                .eq_multipliers
                .iter()
                .map(|m| MultiplierPayload {
                    tag: m.tag,
                    label: m.tag.label(),
                    terms: terms(&m.poly),
                    polynomial: rounded(&m.poly, names),
                })
                .collect(),
        }
    }

    /// Rebuilds the certificate. The residual is left as stored; recompute it
    /// with `verify_certificate`.
    pub fn to_certificate(&self) -> Result<ModuleCertificate<f64>, ReportError> {
        let n = self.variables.len();
        let arity = |e: &Vec<u32>| {
            if e.len() == n {
                Ok(Monomial::new(e.clone()))
            } else {
                Err(ReportError::Shape(format!(
                    "exponent vector of length {} for {n} variables",
                    e.len()
                )))
            }
        };
        let mut sos_weights = Vec::new();
        for w in &self.sos_weights {
            let d = w.basis.len();
            if w.gram.len() != d || w.gram.iter().any(|r| r.len() != d) {
                return Err(ReportError::Shape(format!("{}: Gram matrix is not {d}x{d}", w.label)));
            }
            sos_weights.push(SosWeight {
                tag: w.tag,
                basis: w.basis.iter().map(arity).collect::<Result<_, _>>()?,
                gram: w.gram.clone(),
            });
        }
        let mut eq_multipliers = Vec::new();
        for m in &self.eq_multipliers {
            eq_multipliers.push(EqMultiplier {
                tag: m.tag,
                poly: from_terms(n, &m.terms)?,
            });
        }
        Ok(ModuleCertificate {
            order: self.order,
            direction: self.direction,
            target: from_terms(n, &self.target)?,
            bound: self.bound,
            sos_weights,
            eq_multipliers,
            residual: self.residual,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn problem_json(problem: &PopProblem) -> Value {
    let names = &problem.variables;
    json!({
        "variables": names,
        "objective": problem.objective.display_with(names),
        "inequalities": problem.inequalities.iter().map(|g| g.display_with(names)).collect::<Vec<_>>(),
        "equalities": problem.equalities.iter().map(|h| h.display_with(names)).collect::<Vec<_>>(),
        "c": problem.c().to_f64(),
        "c_exact": problem.c().format(),
    })
}

fn orders_json(orders: &[OrderRecord]) -> Value {
    serde_json::to_value(orders).expect("plain data")
}

fn total_seconds(orders: &[OrderRecord]) -> f64 {
    orders.iter().map(|o| o.seconds).sum()
}

fn certificate_json(program: ProgramKind, cert: Option<&ModuleCertificate<f64>>, names: &[String]) -> Value {
    match cert {
        Some(c) => json!({
            "payload": CertificatePayload::new(program, c, names),
            "text": c.pretty(names),
        }),
        None => Value::Null,
    }
}

pub fn minimize_json(problem: &PopProblem, report: &MinimizeReport) -> Value {
    json!({
        "command": "minimize",
        "problem": problem_json(problem),
        "orders": orders_json(&report.orders),
        "final_bound": report.final_bound,
        "final_order": report.final_order,
        "verdict": report.verdict,
        "caveats": report.caveats,
        "certificate": certificate_json(ProgramKind::Minimize, report.certificate.as_ref(), &problem.variables),
        "seconds": total_seconds(&report.orders),
    })
}

pub fn archimedean_json(problem: &PopProblem, report: &ArchimedeanReport) -> Value {
    json!({
        "command": "arch-check",
        "problem": problem_json(problem),
        "orders": orders_json(&report.orders),
        "verdict": report.verdict,
        "certificate": certificate_json(ProgramKind::Archimedean, report.certificate.as_ref(), &problem.variables),
        "seconds": total_seconds(&report.orders),
    })
}

pub fn coercivity_json(names: &[String], f: &Polynomial<f64>, report: &CoercivityReport) -> Value {
    json!({
        "command": "coercive-check",
        "polynomial": f.display_with(names),
        "degree": report.degree,
        "leading_form": report.leading_form.display_with(names),
        "diagonal_hint": report.diagonal_hint,
        "orders": orders_json(&report.orders),
        "verdict": report.verdict,
        "certificate": certificate_json(ProgramKind::Coercivity, report.certificate.as_ref(), names),
        "seconds": total_seconds(&report.orders),
    })
}

pub fn sufficient_json(problem: &PopProblem, report: &SufficientReport) -> Value {
    let names = &problem.variables;
    let f = report.combination.to_f64();
    json!({
        "command": "coercive-check",
        "problem": problem_json(problem),
        "combination": report.combination.display_with(names),
        "archimedean": report.archimedean,
        "coercivity": coercivity_json(names, &f, &report.coercivity),
    })
}

/// Pretty-printed JSON text.
pub fn emit_report(doc: &Value) -> String {
    serde_json::to_string_pretty(doc).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{tagged_generators, verify_certificate};
    use crate::driver::{check_archimedean, DriverOptions};
    use crate::io::parse_problem;
    use crate::sos::GeneratorSet;

    #[test]
    fn payload_round_trips_through_json() {
        let p = parse_problem("vars: x\nobj: x\nineq: 1 - x^2\nc: 2\n").unwrap();
        let r = check_archimedean(&p, &DriverOptions::default()).unwrap();
        let cert = r.certificate.unwrap();
        let payload = CertificatePayload::new(ProgramKind::Archimedean, &cert, &p.variables);
        let text = serde_json::to_string(&payload).unwrap();
        let back = CertificatePayload::from_json(&text).unwrap();
        assert_eq!(back, payload);
        let rebuilt = back.to_certificate().unwrap();
        assert_eq!(rebuilt, cert);
        let gens = tagged_generators(&GeneratorSet::from_problem(&p));
        assert!(verify_certificate(&rebuilt, &gens, 1e-5, 1e-9).passed);
    }

    #[test]
    fn report_is_deterministic() {
        let p = parse_problem("vars: x\nobj: x\nineq: 1 - x^2\nc: 2\n").unwrap();
        let mut a = archimedean_json(&p, &check_archimedean(&p, &DriverOptions::default()).unwrap());
        let mut b = archimedean_json(&p, &check_archimedean(&p, &DriverOptions::default()).unwrap());
        for doc in [&mut a, &mut b] {
            doc["seconds"] = Value::Null;
            for o in doc["orders"].as_array_mut().unwrap() {
                o["seconds"] = Value::Null;
            }
        }
        assert_eq!(emit_report(&a), emit_report(&b));
        assert_eq!(a["verdict"]["kind"], "certified");
    }

    #[test]
    fn bad_shapes_are_rejected() {
        let p = parse_problem("vars: x\nobj: x\nineq: 1 - x^2\nc: 2\n").unwrap();
        let cert = check_archimedean(&p, &DriverOptions::default())
            .unwrap()
            .certificate
            .unwrap();
        let mut payload = CertificatePayload::new(ProgramKind::Archimedean, &cert, &p.variables);
        payload.sos_weights[0].gram.pop();
        assert!(matches!(payload.to_certificate(), Err(ReportError::Shape(_))));
        assert!(CertificatePayload::from_json("{").is_err());
    }
}
