use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use popnc_core::certificate::{problem_generators, tagged_generators, verify_certificate, DEFAULT_EIG_TOL};
use popnc_core::driver::{
    check_archimedean, check_archimedean_sufficient, check_coercive, minimize, ArchimedeanVerdict, CoercivityVerdict,
    CombinationMultipliers, ConvergenceVerdict, DriverError, DriverOptions,
};
use popnc_core::io::{parse_polynomial, parse_problem, PopProblem, ProblemError};
use popnc_core::poly::{Coeff, Polynomial, Rational};
use popnc_core::report::{
    archimedean_json, coercivity_json, emit_report, minimize_json, sufficient_json, CertificatePayload, ProgramKind,
};
use popnc_core::sos::{Direction, GeneratorSet};
use popnc_sdp::SdpStatus;

const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

/// Certificates of polynomial nonnegativity, Archimedean modules and coercivity.
#[derive(Parser)]
#[command(name = "popnc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower bounds on the minimum of the objective over the feasible set.
    Minimize {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Stabilization tolerance between consecutive orders.
        #[arg(long, default_value_t = popnc_core::driver::DEFAULT_STAB_TOL)]
        stab_tol: f64,
    },
    /// Search for N with N - ||x||^2 in the truncated quadratic module.
    ArchCheck {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Certify coercivity of the objective, or of alpha0 f - sum lambda_j g_j - sum mu_l h_l.
    CoerciveCheck {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Smallest sphere bound accepted as positive.
        #[arg(long, default_value_t = popnc_core::driver::DEFAULT_POS_TOL)]
        pos_tol: f64,
        /// Weight on the objective; enables the combination test.
        #[arg(long)]
        alpha0: Option<String>,
        /// Comma-separated weights on the inequalities.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<String>,
        /// Comma-separated weights on the equalities.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<String>,
    },
    /// Check a certificate from a JSON report against a problem file.
    Verify {
        certificate: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Validate a problem file and print it in canonical form.
    Parse {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    k_start: Option<u32>,
    #[arg(long, default_value_t = popnc_core::driver::DEFAULT_K_MAX)]
    k_max: u32,
    /// Relative residual tolerance for certificate verification.
    #[arg(long, default_value_t = popnc_core::certificate::DEFAULT_RESIDUAL_TOL)]
    tol: f64,
    /// Override the bound c.
    #[arg(long)]
    c: Option<String>,
    /// Override the margin added to f(x0).
    #[arg(long)]
    margin: Option<String>,
    /// Print the JSON report on stdout.
    #[arg(long)]
    json: bool,
    /// Write the SDP of every order to this directory.
    #[arg(long)]
    dump_sdp: Option<PathBuf>,
}

impl Common {
    fn options(&self) -> DriverOptions {
        DriverOptions {
            k_start: self.k_start,
            k_max: self.k_max,
            verify_tol: self.tol,
            dump_sdp: self.dump_sdp.clone(),
            ..DriverOptions::default()
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        let code = match e {
            DriverError::Solver(_) => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// A number given as a constant expression such as `2`, `-0.5` or `1/4`.
fn number(text: &str, what: &str) -> Result<Rational, Failure> {
    parse_polynomial::<Rational>(text, &[])
        .ok()
        .filter(|p| p.degree() == 0)
        .map(|p| p.constant_term())
        .ok_or_else(|| input_error(format!("{what}: `{text}` is not a number")))
}

/// Reads a problem file. Without `need_bound` a missing `c:`/`x0:` record is
/// replaced by `c = 0`.
fn load_problem(path: &Path, common: &Common, need_bound: bool) -> Result<PopProblem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let parsed = match parse_problem(&text) {
        Err(ProblemError::MissingBound) if !need_bound || common.c.is_some() => {
            parse_problem(&format!("{text}\nc: 0\n"))
        }
        other => other,
    };
    let mut problem = parsed.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    if let Some(m) = &common.margin {
        problem = problem
            .with_margin(number(m, "--margin")?)
            .map_err(|e| input_error(e.to_string()))?;
    }
    if let Some(c) = &common.c {
        problem = problem.with_c(number(c, "--c")?);
    }
    Ok(problem)
}

fn print(common: &Common, doc: &Value, text: String) {
    let out = if common.json { emit_report(doc) + "\n" } else { text };
    // a closed pipe (`| head`) is not an error worth a panic
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn describe_orders(doc: &Value) -> String {
    let mut out = String::new();
    for o in doc["orders"].as_array().into_iter().flatten() {
        let value = o["value"].as_f64().map_or("-".to_string(), |v| format!("{v:.10}"));
        out.push_str(&format!(
            "  k={} status={} value={}\n",
            o["order"],
            o["status"].as_str().unwrap_or("?"),
            value
        ));
    }
    out
}

fn certificate_text(doc: &Value) -> String {
    doc["certificate"]["text"]
        .as_str()
        .map(|t| format!("certificate:\n{t}"))
        .unwrap_or_default()
}

fn run_minimize(path: &Path, common: &Common, stab_tol: f64) -> Result<u8, Failure> {
    let problem = load_problem(path, common, true)?;
    let opts = DriverOptions {
        stab_tol,
        ..common.options()
    };
    let report = minimize(&problem, &opts)?;
    let doc = minimize_json(&problem, &report);
    let mut text = format!("minimize {}\n", path.display());
    text.push_str(&describe_orders(&doc));
    text.push_str(&format!("verdict: {}\n", doc["verdict"].as_str().unwrap_or("?")));
    if let Some(b) = report.final_bound {
        text.push_str(&format!("lower bound: {b:.10}\n"));
    }
    text.push_str(&certificate_text(&doc));
    print(common, &doc, text);
    let all_unknown = !report.orders.is_empty() && report.orders.iter().all(|o| o.status == SdpStatus::Unknown);
    Ok(match report.verdict {
        _ if all_unknown => EXIT_NUMERICAL,
        ConvergenceVerdict::Stabilized => 0,
        _ => EXIT_INCONCLUSIVE,
    })
}

fn run_arch_check(path: &Path, common: &Common) -> Result<u8, Failure> {
    let problem = load_problem(path, common, true)?;
    let report = check_archimedean(&problem, &common.options())?;
    let doc = archimedean_json(&problem, &report);
    let mut text = format!("arch-check {}\n", path.display());
    text.push_str(&describe_orders(&doc));
    let code = match report.verdict {
        ArchimedeanVerdict::Certified { radius, order } => {
            text.push_str(&format!(
                "certified: N - ||x||^2 is in the module with N = {radius:.10} (order {order})\n"
            ));
            0
        }
        ArchimedeanVerdict::Inconclusive => {
            text.push_str("inconclusive: no order up to the maximum gave a certificate\n");
            EXIT_INCONCLUSIVE
        }
    };
    text.push_str(&certificate_text(&doc));
    print(common, &doc, text);
    Ok(code)
}

fn coercivity_summary(verdict: &CoercivityVerdict) -> (String, u8) {
    match verdict {
        CoercivityVerdict::Certified { delta, order } => (
            format!("certified: leading form >= {delta:.10} * ||x||^d (order {order})\n"),
            0,
        ),
        CoercivityVerdict::Inconclusive => (
            "inconclusive: no positive sphere bound up to the maximum order\n".to_string(),
            EXIT_INCONCLUSIVE,
        ),
        CoercivityVerdict::NotApplicable { reason } => (format!("not applicable: {reason}\n"), EXIT_INCONCLUSIVE),
    }
}

fn run_coercive_check(
    path: &Path,
    common: &Common,
    pos_tol: f64,
    alpha0: &Option<String>,
    lambda: &[String],
    mu: &[String],
) -> Result<u8, Failure> {
    let problem = load_problem(path, common, false)?;
    let opts = DriverOptions {
        pos_tol,
        ..common.options()
    };
    let Some(alpha0) = alpha0 else {
        if !lambda.is_empty() || !mu.is_empty() {
            return Err(input_error("--lambda and --mu need --alpha0"));
        }
        let f = problem.objective.to_f64();
        let report = check_coercive(&f, &opts)?;
        let doc = coercivity_json(&problem.variables, &f, &report);
        let (summary, code) = coercivity_summary(&report.verdict);
        let mut text = format!("coercive-check {}\n", path.display());
        text.push_str(&describe_orders(&doc));
        text.push_str(&summary);
        text.push_str(&certificate_text(&doc));
        print(common, &doc, text);
        return Ok(code);
    };
    // missing weights default to zero
    let weights = |given: &[String], len: usize, what: &str| -> Result<Vec<Rational>, Failure> {
        if given.len() > len {
            return Err(input_error(format!(
                "{what}: {} weights for {len} constraints",
                given.len()
            )));
        }
        let mut out: Vec<Rational> = given.iter().map(|s| number(s, what)).collect::<Result<_, _>>()?;
        out.resize(len, Rational::from_integer(0.into()));
        Ok(out)
    };
    let multipliers = CombinationMultipliers {
        alpha0: number(alpha0, "--alpha0")?,
        lambdas: weights(lambda, problem.inequalities.len(), "--lambda")?,
        mus: weights(mu, problem.equalities.len(), "--mu")?,
    };
    let report = check_archimedean_sufficient(&problem, &multipliers, &opts)?;
    let doc = sufficient_json(&problem, &report);
    let (summary, code) = coercivity_summary(&report.coercivity.verdict);
    let mut text = format!(
        "coercive-check {} on {}\n",
        path.display(),
        report.combination.display_with(&problem.variables)
    );
    text.push_str(&describe_orders(&doc["coercivity"]));
    text.push_str(&summary);
    if report.archimedean {
        text.push_str("the module M(g; h; c - f) is Archimedean\n");
    }
    text.push_str(&certificate_text(&doc["coercivity"]));
    print(common, &doc, text);
    Ok(code)
}

fn run_verify(cert_path: &Path, path: &Path, common: &Common) -> Result<u8, Failure> {
    let raw = std::fs::read_to_string(cert_path).map_err(|e| input_error(format!("{}: {e}", cert_path.display())))?;
    let value: Value = serde_json::from_str(&raw).map_err(|e| input_error(format!("{}: {e}", cert_path.display())))?;
    // accept a bare payload or a full report
    let payload_value = if value.get("program").is_some() {
        value
    } else {
        let inner = value.get("coercivity").unwrap_or(&value);
        inner["certificate"]["payload"].clone()
    };
    let payload: CertificatePayload = serde_json::from_value(payload_value)
        .map_err(|e| input_error(format!("{}: no certificate payload ({e})", cert_path.display())))?;
    let problem = load_problem(path, common, payload.program != ProgramKind::Coercivity)?;
    if payload.variables != problem.variables {
        return Err(input_error(format!(
            "certificate variables {:?} differ from problem variables {:?}",
            payload.variables, problem.variables
        )));
    }
    let mut cert = payload.to_certificate().map_err(|e| input_error(e.to_string()))?;
    let n = problem.num_vars();
    let f = problem.objective.to_f64();
    let (target, gens, direction) = match payload.program {
        ProgramKind::Minimize => (
            f,
            tagged_generators(&GeneratorSet::from_problem(&problem)),
            Direction::MaximizeLambda,
        ),
        ProgramKind::Archimedean => (
            -Polynomial::<f64>::norm_squared(n),
            tagged_generators(&GeneratorSet::from_problem(&problem)),
            Direction::MinimizeLambda,
        ),
        ProgramKind::Coercivity => {
            let lead = f.leading_form().map_err(|e| input_error(e.to_string()))?;
            (
                lead,
                tagged_generators(&GeneratorSet::sphere(n)),
                Direction::MaximizeLambda,
            )
        }
    };
    let mut failures = Vec::new();
    if cert.direction != direction {
        failures.push("certificate direction does not match its program".to_string());
    }
    if cert.target != target {
        failures.push("certificate target differs from the problem; verifying against the problem".to_string());
    }
    cert.target = target;
    let check = verify_certificate(&cert, &gens, common.tol, DEFAULT_EIG_TOL);
    let passed = check.passed && cert.direction == direction;
    failures.extend(check.failures.iter().cloned());
    // exact-coefficient view of the module used, for the record
    let generator_count = if payload.program == ProgramKind::Coercivity {
        1
    } else {
        problem_generators(&problem).len()
    };
    let doc = json!({
        "command": "verify",
        "program": payload.program,
        "bound": cert.bound,
        "generators": generator_count,
        "residual": check.residual,
        "threshold": check.threshold,
        "min_eigenvalue": check.min_eigenvalue,
        "passed": passed,
        "failures": failures,
    });
    let mut text = format!(
        "verify {} against {}\nresidual {:e} (threshold {:e}), min Gram eigenvalue {:e}\n",
        cert_path.display(),
        path.display(),
        check.residual,
        check.threshold,
        check.min_eigenvalue
    );
    for f in &failures {
        text.push_str(&format!("  {f}\n"));
    }
    text.push_str(if passed { "PASS\n" } else { "FAIL\n" });
    print(common, &doc, text);
    Ok(if passed { 0 } else { EXIT_INCONCLUSIVE })
}

fn run_parse(path: &Path, common: &Common) -> Result<u8, Failure> {
    let problem = load_problem(path, common, true)?;
    let names = &problem.variables;
    let doc = json!({
        "command": "parse",
        "variables": names,
        "objective": problem.objective.display_with(names),
        "degree": problem.objective.degree(),
        "inequalities": problem.inequalities.iter().map(|g| g.display_with(names)).collect::<Vec<_>>(),
        "equalities": problem.equalities.iter().map(|h| h.display_with(names)).collect::<Vec<_>>(),
        "c": problem.c().format(),
        "generators": problem_generators(&problem)
            .iter()
            .map(|(t, _)| t.label())
            .collect::<Vec<_>>(),
        "canonical": problem.to_text(),
    });
    print(common, &doc, problem.to_text());
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Minimize {
            problem,
            common,
            stab_tol,
        } => run_minimize(problem, common, *stab_tol),
        Command::ArchCheck { problem, common } => run_arch_check(problem, common),
        Command::CoerciveCheck {
            problem,
            common,
            pos_tol,
            alpha0,
            lambda,
            mu,
        } => run_coercive_check(problem, common, *pos_tol, alpha0, lambda, mu),
        Command::Verify {
            certificate,
            problem,
            common,
        } => run_verify(certificate, problem, common),
        Command::Parse { problem, common } => run_parse(problem, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("popnc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
