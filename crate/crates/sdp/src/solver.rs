//! Homogeneous self-dual interior-point method.
//!
//! The program of [`SdpProblem`] is embedded as
//!
//! ```text
//!  A(X) + F u - b tau                  = 0
//! -A*(y)        + C tau - S            = 0
//! -F'y          + c_f tau              = 0
//!  b'y - <C,X> - c_f'u          - kappa = 0
//! ```
//!
//! with `X, S` PSD and `tau, kappa >= 0`, started from `X = S = I`,
//! `tau = kappa = 1`. Each iteration takes a Mehrotra predictor-corrector
//! step along the HKM direction (`dX = mu S^-1 - X - sym(X dS S^-1)`), so the
//! linearized system reduces to the Schur complement
//! `M_ij = tr(A_i X A_j S^-1)` bordered by the free-variable columns `F`.
//! Residuals of the embedding shrink at the same rate as the complementarity
//! gap. Whichever of `tau` and `kappa` survives decides the status.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::problem::SdpProblem;
use crate::SdpError;

/// Solver tolerances and limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    /// Relative duality gap accepted for an optimal solution.
    pub gap_tol: f64,
    /// Relative primal/dual residual accepted for an optimal solution.
    pub feas_tol: f64,
    /// Smallest eigenvalue tolerated in returned PSD blocks.
    pub eig_tol: f64,
    pub max_iter: usize,
    /// Residual (relative to the objective of the ray) accepted for an
    /// infeasibility certificate.
    pub infeas_tol: f64,
    /// Minimum `kappa / tau` before an infeasibility certificate is accepted.
    pub infeas_ratio: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            eig_tol: 1e-9,
            max_iter: 200,
            infeas_tol: 1e-8,
            infeas_ratio: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Unknown,
}

impl SdpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::PrimalInfeasible => "primal_infeasible",
            SdpStatus::DualInfeasible => "dual_infeasible",
            SdpStatus::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative residuals of a candidate primal-dual pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    /// `||A(X) + F u - b|| / (1 + ||b||)`
    pub primal: f64,
    /// `max(||A*(y) + S - C|| / (1 + ||C||), ||F'y - c_f|| / (1 + ||c_f||))`
    pub dual: f64,
    /// `|p - d| / (1 + |p| + |d|)`
    pub gap: f64,
}

/// One row of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateInfo {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub tau: f64,
    pub kappa: f64,
    pub mu: f64,
}

/// Solver output.
///
/// For [`SdpStatus::Optimal`] the blocks hold the (unscaled) primal-dual
/// solution. For [`SdpStatus::PrimalInfeasible`] `y` and `s` hold a Farkas
/// ray normalized to `b'y = 1`; for [`SdpStatus::DualInfeasible`] `x` and
/// `free` hold a primal ray normalized to `<C,X> + c_f'u = -1`. For
/// [`SdpStatus::Unknown`] they hold the last iterate divided by `tau`.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    pub free: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub tau: f64,
    pub kappa: f64,
    pub history: Vec<IterateInfo>,
}

type Blocks = Vec<DMatrix<f64>>;
/// `(row, col, value)` entries of one constraint matrix in one block.
type Entries = Vec<(usize, usize, f64)>;

/// Sparse constraint data expanded to both triangles, grouped by block.
struct Data {
    dims: Vec<usize>,
    nf: usize,
    m: usize,
    /// `by_block[b]` lists `(i, entries of A_i restricted to block b)`.
    by_block: Vec<Vec<(usize, Entries)>>,
    f: DMatrix<f64>,
    b: DVector<f64>,
    c: Blocks,
    cf: DVector<f64>,
}

impl Data {
    fn new(problem: &SdpProblem) -> Self {
        let dims = problem.block_dims().to_vec();
        let nf = problem.num_free();
        let m = problem.num_constraints();
        let mut by_block: Vec<Vec<(usize, Entries)>> = vec![Vec::new(); dims.len()];
        let mut f = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        for (i, con) in problem.constraints().iter().enumerate() {
            b[i] = con.rhs;
            let mut per_block: Vec<Entries> = vec![Vec::new(); dims.len()];
            for e in &con.form.psd {
                per_block[e.block].push((e.row, e.col, e.value));
                if e.row != e.col {
                    per_block[e.block].push((e.col, e.row, e.value));
                }
            }
            for (blk, entries) in per_block.into_iter().enumerate() {
                if !entries.is_empty() {
                    by_block[blk].push((i, entries));
                }
            }
            for &(k, v) in &con.form.free {
                f[(i, k)] += v;
            }
        }
        let mut c: Blocks = dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        for e in &problem.objective().psd {
            c[e.block][(e.row, e.col)] += e.value;
            if e.row != e.col {
                c[e.block][(e.col, e.row)] += e.value;
            }
        }
        let mut cf = DVector::zeros(nf);
        for &(k, v) in &problem.objective().free {
            cf[k] += v;
        }
        Self {
            dims,
            nf,
            m,
            by_block,
            f,
            b,
            c,
            cf,
        }
    }

    fn zeros(&self) -> Blocks {
        self.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect()
    }

    fn identity(&self) -> Blocks {
        self.dims.iter().map(|&d| DMatrix::identity(d, d)).collect()
    }

    /// `A(X)`
    fn apply(&self, x: &Blocks) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (blk, list) in self.by_block.iter().enumerate() {
            for (i, entries) in list {
                out[*i] += entries.iter().map(|&(p, q, v)| v * x[blk][(p, q)]).sum::<f64>();
            }
        }
        out
    }

    /// `A*(y)`
    fn adjoint(&self, y: &DVector<f64>) -> Blocks {
        let mut out = self.zeros();
        for (blk, list) in self.by_block.iter().enumerate() {
            for (i, entries) in list {
                for &(p, q, v) in entries {
                    out[blk][(p, q)] += v * y[*i];
                }
            }
        }
        out
    }

    /// `M_ij = sum_b tr(A_i X A_j S^-1)`
    fn schur(&self, x: &Blocks, sinv: &Blocks) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.m, self.m);
        for (blk, list) in self.by_block.iter().enumerate() {
            let xb = &x[blk];
            let sb = &sinv[blk];
            for (a, (i, ai)) in list.iter().enumerate() {
                for (j, aj) in list[a..].iter() {
                    let mut acc = 0.0;
                    for &(p, q, v) in ai {
                        for &(r, s, w) in aj {
                            acc += v * w * xb[(q, r)] * sb[(s, p)];
                        }
                    }
                    m[(*i, *j)] += acc;
                    if i != j {
                        m[(*j, *i)] += acc;
                    }
                }
            }
        }
        m
    }
}

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn axpy(a: &Blocks, alpha: f64, b: &Blocks) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x + y * alpha).collect()
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| {
        let inv = c.inverse();
        sym(&inv)
    })
}

/// Largest `alpha` with `x + alpha d` PSD (infinite when `d` keeps it PSD).
fn max_step(x: &DMatrix<f64>, d: &DMatrix<f64>) -> Option<f64> {
    let l = x.clone().cholesky()?.l();
    let w = l.solve_lower_triangular(d)?;
    let w = l.solve_lower_triangular(&w.transpose())?;
    let lmin = sym(&w).symmetric_eigenvalues().min();
    Some(if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY })
}

fn max_step_scalar(x: f64, d: f64) -> f64 {
    if d < 0.0 {
        -x / d
    } else {
        f64::INFINITY
    }
}

struct Iterate {
    x: Blocks,
    u: DVector<f64>,
    y: DVector<f64>,
    s: Blocks,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Blocks,
    du: DVector<f64>,
    dy: DVector<f64>,
    ds: Blocks,
    dtau: f64,
    dkappa: f64,
}

/// Residuals of the embedding at the current iterate.
struct EmbeddingResiduals {
    rp: DVector<f64>,
    rd: Blocks,
    rf: DVector<f64>,
    rg: f64,
}

/// Factored Newton system for one iterate.
struct Newton<'a> {
    data: &'a Data,
    it: &'a Iterate,
    sinv: Blocks,
    kkt: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    /// Solution for the `dtau` column.
    col_tau: DVector<f64>,
    d_vec: DVector<f64>,
    e_scal: f64,
}

impl<'a> Newton<'a> {
    fn new(data: &'a Data, it: &'a Iterate) -> Option<Self> {
        let sinv: Blocks = it.s.iter().map(inverse_spd).collect::<Option<_>>()?;
        let schur = data.schur(&it.x, &sinv);
        let n = data.m + data.nf;
        let mut kkt = DMatrix::zeros(n, n);
        kkt.view_mut((0, 0), (data.m, data.m)).copy_from(&schur);
        kkt.view_mut((0, data.m), (data.m, data.nf)).copy_from(&data.f);
        kkt.view_mut((data.m, 0), (data.nf, data.m))
            .copy_from(&data.f.transpose());
        let kkt = kkt.lu();
        let xcs: Blocks =
            it.x.iter()
                .zip(&data.c)
                .zip(&sinv)
                .map(|((x, c), si)| x * c * si)
                .collect();
        let d_vec = data.apply(&xcs);
        let e_scal = inner(&data.c, &xcs);
        let mut rhs = DVector::zeros(n);
        rhs.rows_mut(0, data.m).copy_from(&(&data.b + &d_vec));
        rhs.rows_mut(data.m, data.nf).copy_from(&data.cf);
        let col_tau = kkt.solve(&rhs)?;
        if col_tau.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Self {
            data,
            it,
            sinv,
            kkt,
            col_tau,
            d_vec,
            e_scal,
        })
    }

    /// Solves the linearized embedding with residual weight `eta`, target
    /// complementarity `rc` (one matrix per block, `X dS + dX S = rc`) and
    /// `tau dkappa + kappa dtau = rtk`.
    fn solve(&self, res: &EmbeddingResiduals, eta: f64, rc: &Blocks, rtk: f64) -> Option<Direction> {
        let data = self.data;
        let it = self.it;
        let m = data.m;
        let nf = data.nf;
        // P = sym(rc S^-1); X R_d S^-1 enters through the dS substitution.
        let p: Blocks = rc.iter().zip(&self.sinv).map(|(r, si)| sym(&(r * si))).collect();
        let xrs: Blocks =
            it.x.iter()
                .zip(&res.rd)
                .zip(&self.sinv)
                .map(|((x, r), si)| x * r * si)
                .collect();
        let mut rhs = DVector::zeros(m + nf);
        let top = &res.rp * eta - data.apply(&p) - data.apply(&xrs) * eta;
        rhs.rows_mut(0, m).copy_from(&top);
        rhs.rows_mut(m, nf).copy_from(&(&res.rf * -eta));
        let sol1 = self.kkt.solve(&rhs)?;
        let (dy1, du1) = (sol1.rows(0, m), sol1.rows(m, nf));
        let (dy2, du2) = (self.col_tau.rows(0, m), self.col_tau.rows(m, nf));

        let gap_const = inner(&data.c, &p) + eta * inner(&data.c, &xrs) + self.d_vec.dot(&dy1) + data.cf.dot(&du1)
            - data.b.dot(&dy1)
            + rtk / it.tau
            + eta * res.rg;
        let gap_lin = self.d_vec.dot(&dy2) - self.e_scal + data.cf.dot(&du2) - data.b.dot(&dy2) - it.kappa / it.tau;
        if gap_lin == 0.0 || !gap_lin.is_finite() {
            return None;
        }
        let dtau = -gap_const / gap_lin;
        let dy: DVector<f64> = dy1 + dy2 * dtau;
        let du: DVector<f64> = du1 + du2 * dtau;
        let aty = data.adjoint(&dy);
        let ds: Blocks = res
            .rd
            .iter()
            .zip(&aty)
            .zip(&data.c)
            .map(|((r, a), c)| -(r * eta) - a + c * dtau)
            .collect();
        let dx: Blocks = p
            .iter()
            .zip(&it.x)
            .zip(&ds)
            .zip(&self.sinv)
            .map(|(((p, x), d), si)| p - sym(&(x * d * si)))
            .collect();
        let dkappa = (rtk - it.kappa * dtau) / it.tau;
        let ok =
            dtau.is_finite() && dkappa.is_finite() && dx.iter().chain(&ds).all(|b| b.iter().all(|v| v.is_finite()));
        ok.then_some(Direction {
            dx,
            du,
            dy,
            ds,
            dtau,
            dkappa,
        })
    }
}

fn step_length(it: &Iterate, d: &Direction) -> Option<f64> {
    let mut alpha = max_step_scalar(it.tau, d.dtau).min(max_step_scalar(it.kappa, d.dkappa));
    for (x, dx) in it.x.iter().zip(&d.dx) {
        alpha = alpha.min(max_step(x, dx)?);
    }
    for (s, ds) in it.s.iter().zip(&d.ds) {
        alpha = alpha.min(max_step(s, ds)?);
    }
    Some(alpha)
}

/// Relative residuals of `(X, u, y, S)` taken as a candidate solution.
pub fn residuals(problem: &SdpProblem, x: &[DMatrix<f64>], free: &[f64], y: &[f64], s: &[DMatrix<f64>]) -> Residuals {
    let data = Data::new(problem);
    let x = x.to_vec();
    let s = s.to_vec();
    let u = DVector::from_column_slice(free);
    let y = DVector::from_column_slice(y);
    raw_residuals(&data, &x, &u, &y, &s)
}

fn raw_residuals(data: &Data, x: &Blocks, u: &DVector<f64>, y: &DVector<f64>, s: &Blocks) -> Residuals {
    let rp = data.apply(x) + &data.f * u - &data.b;
    let aty = data.adjoint(y);
    let rd: Blocks = aty.iter().zip(s).zip(&data.c).map(|((a, s), c)| a + s - c).collect();
    let rf = data.f.transpose() * y - &data.cf;
    let pobj = inner(&data.c, x) + data.cf.dot(u);
    let dobj = data.b.dot(y);
    Residuals {
        primal: rp.norm() / (1.0 + data.b.norm()),
        dual: (frob(&rd) / (1.0 + frob(&data.c))).max(rf.norm() / (1.0 + data.cf.norm())),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    }
}

/// Solves `problem` with the given settings.
///
/// Only structural problems are reported as errors; numerical trouble and
/// iteration limits produce [`SdpStatus::Unknown`].
pub fn solve(problem: &SdpProblem, settings: &Settings) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    let data = Data::new(problem);
    let order = problem.cone_order() as f64;

    let mut it = Iterate {
        x: data.identity(),
        u: DVector::zeros(data.nf),
        y: DVector::zeros(data.m),
        s: data.identity(),
        tau: 1.0,
        kappa: 1.0,
    };
    let mut history = Vec::new();

    let finish = |it: &Iterate, status: SdpStatus, iterations: usize, history: Vec<IterateInfo>| {
        build_solution(&data, it, status, iterations, history)
    };

    for iter in 0..=settings.max_iter {
        let res = embedding_residuals(&data, &it);
        let mu = (inner(&it.x, &it.s) + it.tau * it.kappa) / (order + 1.0);

        let scaled = raw_residuals(
            &data,
            &scale(&it.x, 1.0 / it.tau),
            &(&it.u / it.tau),
            &(&it.y / it.tau),
            &scale(&it.s, 1.0 / it.tau),
        );
        let pobj = (inner(&data.c, &it.x) + data.cf.dot(&it.u)) / it.tau;
        let dobj = data.b.dot(&it.y) / it.tau;
        history.push(IterateInfo {
            iteration: iter,
            primal_objective: pobj,
            dual_objective: dobj,
            residuals: scaled,
            tau: it.tau,
            kappa: it.kappa,
            mu,
        });

        if scaled.primal <= settings.feas_tol && scaled.dual <= settings.feas_tol && scaled.gap <= settings.gap_tol {
            return Ok(finish(&it, SdpStatus::Optimal, iter, history));
        }
        if let Some(status) = infeasibility(&data, &it, settings) {
            return Ok(finish(&it, status, iter, history));
        }
        if iter == settings.max_iter {
            break;
        }

        let Some(newton) = Newton::new(&data, &it) else {
            break;
        };

        // Predictor.
        let rc_aff: Blocks = it.x.iter().zip(&it.s).map(|(x, s)| -(x * s)).collect();
        let rtk_aff = -it.tau * it.kappa;
        let Some(aff) = newton.solve(&res, 1.0, &rc_aff, rtk_aff) else {
            break;
        };
        let Some(alpha_aff) = step_length(&it, &aff) else {
            break;
        };
        let alpha_aff = alpha_aff.min(1.0);
        let mu_aff = (inner(&axpy(&it.x, alpha_aff, &aff.dx), &axpy(&it.s, alpha_aff, &aff.ds))
            + (it.tau + alpha_aff * aff.dtau) * (it.kappa + alpha_aff * aff.dkappa))
            / (order + 1.0);
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let rc: Blocks =
            it.x.iter()
                .zip(&it.s)
                .zip(aff.dx.iter().zip(&aff.ds))
                .map(|((x, s), (dx, ds))| {
                    let mut r = -(x * s) - dx * ds;
                    for k in 0..r.nrows() {
                        r[(k, k)] += sigma * mu;
                    }
                    r
                })
                .collect();
        let rtk = sigma * mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
        let Some(dir) = newton.solve(&res, 1.0 - sigma, &rc, rtk) else {
            break;
        };
        let Some(alpha_max) = step_length(&it, &dir) else {
            break;
        };
        let alpha = (0.98 * alpha_max).min(1.0);
        if alpha < 1e-12 {
            break;
        }
        drop(newton);
        it.x = axpy(&it.x, alpha, &dir.dx);
        it.s = axpy(&it.s, alpha, &dir.ds);
        it.u += &dir.du * alpha;
        it.y += &dir.dy * alpha;
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
        for b in it.x.iter_mut().chain(it.s.iter_mut()) {
            *b = sym(b);
        }
    }
    let iterations = history.len().saturating_sub(1);
    Ok(finish(&it, SdpStatus::Unknown, iterations, history))
}

fn scale(a: &Blocks, f: f64) -> Blocks {
    a.iter().map(|m| m * f).collect()
}

fn embedding_residuals(data: &Data, it: &Iterate) -> EmbeddingResiduals {
    let rp = &data.b * it.tau - data.apply(&it.x) - &data.f * &it.u;
    let aty = data.adjoint(&it.y);
    let rd = aty
        .iter()
        .zip(&it.s)
        .zip(&data.c)
        .map(|((a, s), c)| a + s - c * it.tau)
        .collect();
    let rf = data.f.transpose() * &it.y - &data.cf * it.tau;
    let rg = it.kappa + inner(&data.c, &it.x) + data.cf.dot(&it.u) - data.b.dot(&it.y);
    EmbeddingResiduals { rp, rd, rf, rg }
}

/// Farkas tests on the unnormalized iterate.
fn infeasibility(data: &Data, it: &Iterate, settings: &Settings) -> Option<SdpStatus> {
    if it.kappa < settings.infeas_ratio * it.tau {
        return None;
    }
    let by = data.b.dot(&it.y);
    if by > 0.0 {
        let aty = data.adjoint(&it.y);
        let ray: Blocks = aty.iter().zip(&it.s).map(|(a, s)| a + s).collect();
        let fty = data.f.transpose() * &it.y;
        if frob(&ray) <= settings.infeas_tol * by && fty.norm() <= settings.infeas_tol * by {
            return Some(SdpStatus::PrimalInfeasible);
        }
    }
    let cx = inner(&data.c, &it.x) + data.cf.dot(&it.u);
    if cx < 0.0 {
        let ax = data.apply(&it.x) + &data.f * &it.u;
        if ax.norm() <= settings.infeas_tol * -cx {
            return Some(SdpStatus::DualInfeasible);
        }
    }
    None
}

fn build_solution(
    data: &Data,
    it: &Iterate,
    status: SdpStatus,
    iterations: usize,
    history: Vec<IterateInfo>,
) -> SdpSolution {
    let norm = match status {
        SdpStatus::PrimalInfeasible => data.b.dot(&it.y),
        SdpStatus::DualInfeasible => -(inner(&data.c, &it.x) + data.cf.dot(&it.u)),
        _ => it.tau,
    };
    let x = scale(&it.x, 1.0 / norm);
    let s = scale(&it.s, 1.0 / norm);
    let u = &it.u / norm;
    let y = &it.y / norm;
    let residuals = raw_residuals(data, &x, &u, &y, &s);
    SdpSolution {
        status,
        primal_objective: inner(&data.c, &x) + data.cf.dot(&u),
        dual_objective: data.b.dot(&y),
        x,
        free: u.iter().copied().collect(),
        y: y.iter().copied().collect(),
        s,
        residuals,
        iterations,
        tau: it.tau,
        kappa: it.kappa,
        history,
    }
}
