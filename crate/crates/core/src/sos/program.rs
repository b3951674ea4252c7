//! Coefficient-matching programs for truncated quadratic module membership.
//!
//! For an order `k`, a target `p` and generators `(g; h)` the program asks
//! for Gram matrices `Q_0, Q_j` and coefficient vectors `u_l` with
//!
//! ```text
//! p + s*lambda = v_0' Q_0 v_0 + sum_j (v_j' Q_j v_j) g_j + sum_l (u_l' w_l) h_l
//! ```
//!
//! where `v_j` lists the monomials of degree `<= k - ceil(deg g_j / 2)`,
//! `w_l` those of degree `<= 2k - deg h_l`, and `s` is `-1` when `lambda` is
//! maximized, `+1` when it is minimized. One equation is emitted per
//! reachable monomial. Generators are assembled at unit l1 norm and the target
//! is normalized the same way; [`MembershipProgram`] keeps both scales so
//! extracted multipliers refer to the original polynomials.

use std::collections::{BTreeMap, HashMap};

use popnc_sdp::{LinearForm, SdpProblem};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::generators::{GeneratorSet, GeneratorTag};
use crate::io::PopProblem;
use crate::poly::{basis_size, monomial_basis, Monomial, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("order {k} is below the minimal order {k_min}")]
    OrderTooLow { k: u32, k_min: u32 },
    #[error("target has {found} variables, generators have {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coercivity test needs a polynomial of even degree >= 2 (degree {0})")]
    OddOrSmallDegree(u32),
    #[error("coercivity test is undefined for the zero polynomial")]
    ZeroPolynomial,
}

/// How the scalar `lambda` enters the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `sup { lambda : target - lambda in M_k }`
    MaximizeLambda,
    /// `inf { lambda : lambda + target in M_k }`
    MinimizeLambda,
    /// `target in M_k`
    Feasibility,
}

impl Direction {
    /// Sign `s` with which `lambda` is added to the target.
    pub fn lambda_sign(&self) -> f64 {
        match self {
            Direction::MaximizeLambda => -1.0,
            Direction::MinimizeLambda => 1.0,
            Direction::Feasibility => 0.0,
        }
    }
}

/// One SOS weight: `sigma = v' Q v`, multiplying `generator` (`None` for
/// the free term `sigma_0`).
#[derive(Debug, Clone, PartialEq)]
pub struct SosBlock {
    pub generator: Option<usize>,
    pub basis: Vec<Monomial>,
}

/// One free multiplier `phi_l = sum_i u_i w_i` of an equality generator.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBlock {
    pub generator: usize,
    pub basis: Vec<Monomial>,
    /// Index of `u_0` among the program's free variables.
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub struct MembershipProgram {
    pub order: u32,
    pub target: Polynomial<f64>,
    /// The target is assembled as `target / target_scale`.
    pub target_scale: f64,
    pub direction: Direction,
    pub generators: GeneratorSet,
    /// `blocks[0]` is `sigma_0`; `blocks[1 + j]` multiplies inequality `j`.
    pub blocks: Vec<SosBlock>,
    pub multipliers: Vec<FreeBlock>,
    /// Free-variable index of `lambda`, if the direction uses it.
    pub lambda_index: Option<usize>,
    /// Monomials indexing the equations, ascending.
    pub constraint_index: Vec<Monomial>,
    /// Target monomials no product can reach; non-empty means infeasible.
    pub unreachable: Vec<Monomial>,
    pub sdp: SdpProblem,
}

impl MembershipProgram {
    /// True when the coefficient matching fails before any solve.
    pub fn is_trivially_infeasible(&self) -> bool {
        !self.unreachable.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.generators.num_vars()
    }

    pub fn block_label(&self, b: usize) -> String {
        match self.blocks[b].generator {
            None => "sigma0".to_string(),
            Some(j) => self.generators.inequalities()[j].tag.label(),
        }
    }

    pub fn block_tag(&self, b: usize) -> Option<GeneratorTag> {
        self.blocks[b].generator.map(|j| self.generators.inequalities()[j].tag)
    }
}

/// Builds the membership program of `target` in `M_k(gens)`.
pub fn build_membership_program(
    target: &Polynomial<f64>,
    gens: &GeneratorSet,
    k: u32,
    direction: Direction,
) -> Result<MembershipProgram, BuildError> {
    let n = gens.num_vars();
    if target.num_vars() != n {
        return Err(BuildError::DimensionMismatch {
            expected: n,
            found: target.num_vars(),
        });
    }
    let k_min = gens.min_order(target);
    if k < k_min {
        return Err(BuildError::OrderTooLow { k, k_min });
    }

    let mut blocks = vec![SosBlock {
        generator: None,
        basis: monomial_basis(n, k),
    }];
    for (j, v) in gens.half_degrees().into_iter().enumerate() {
        blocks.push(SosBlock {
            generator: Some(j),
            basis: monomial_basis(n, k - v),
        });
    }
    let mut multipliers = Vec::new();
    let mut num_free = 0;
    for (l, w) in gens.eq_degrees().into_iter().enumerate() {
        let basis = monomial_basis(n, 2 * k - w);
        let len = basis.len();
        multipliers.push(FreeBlock {
            generator: l,
            basis,
            offset: num_free,
        });
        num_free += len;
    }
    let lambda_index = match direction {
        Direction::Feasibility => None,
        _ => {
            num_free += 1;
            Some(num_free - 1)
        }
    };

    // Row contents keyed by monomial: PSD entries (block, row, col) and free entries.
    let mut psd_rows: BTreeMap<Monomial, BTreeMap<(usize, usize, usize), f64>> = BTreeMap::new();
    let mut free_rows: BTreeMap<Monomial, BTreeMap<usize, f64>> = BTreeMap::new();
    let one = Polynomial::one(n);
    for (b, block) in blocks.iter().enumerate() {
        let g = match block.generator {
            None => &one,
            Some(j) => &gens.inequalities()[j].scaled,
        };
        for (a, ma) in block.basis.iter().enumerate() {
            for (c, mc) in block.basis.iter().enumerate().skip(a) {
                let prod = ma.mul(mc);
                for (gm, gc) in g.terms() {
                    *psd_rows
                        .entry(prod.mul(gm))
                        .or_default()
                        .entry((b, a, c))
                        .or_insert(0.0) += *gc;
                }
            }
        }
    }
    for fb in &multipliers {
        let h = &gens.equalities()[fb.generator].scaled;
        for (i, m) in fb.basis.iter().enumerate() {
            for (hm, hc) in h.terms() {
                *free_rows
                    .entry(m.mul(hm))
                    .or_default()
                    .entry(fb.offset + i)
                    .or_insert(0.0) += *hc;
            }
        }
    }
    if let Some(li) = lambda_index {
        free_rows
            .entry(Monomial::one(n))
            .or_default()
            .insert(li, -direction.lambda_sign());
    }

    let norm = target.l1_norm();
    let target_scale = if norm > 0.0 { norm } else { 1.0 };
    let scaled_target = target.scale(&(1.0 / target_scale));

    let mut reachable: BTreeMap<Monomial, ()> = BTreeMap::new();
    for (m, row) in &psd_rows {
        if row.values().any(|v| *v != 0.0) {
            reachable.insert(m.clone(), ());
        }
    }
    for (m, row) in &free_rows {
        if row.values().any(|v| *v != 0.0) {
            reachable.insert(m.clone(), ());
        }
    }
    let unreachable: Vec<Monomial> = scaled_target
        .terms()
        .filter(|(m, _)| !reachable.contains_key(*m))
        .map(|(m, _)| m.clone())
        .collect();

    let block_dims = blocks.iter().map(|b| b.basis.len()).collect();
    let mut sdp = SdpProblem::new(block_dims, num_free);
    let mut objective = LinearForm::new();
    if let Some(li) = lambda_index {
        let sense = if direction == Direction::MaximizeLambda {
            -1.0
        } else {
            1.0
        };
        objective.push_free(li, sense);
    }
    sdp.set_objective(objective);

    let mut constraint_index = Vec::with_capacity(reachable.len());
    for m in reachable.keys() {
        let mut form = LinearForm::new();
        if let Some(row) = psd_rows.get(m) {
            for (&(b, r, c), &v) in row {
                if v != 0.0 {
                    form.push_psd(b, r, c, v);
                }
            }
        }
        if let Some(row) = free_rows.get(m) {
            for (&i, &v) in row {
                if v != 0.0 {
                    form.push_free(i, v);
                }
            }
        }
        sdp.add_constraint(form, scaled_target.coeff(m));
        constraint_index.push(m.clone());
    }

    debug_assert!(blocks.iter().enumerate().all(|(b, blk)| {
        let v = blk.generator.map_or(0, |j| gens.half_degrees()[j]);
        blk.basis.len() == basis_size(n, k - v) && (b > 0 || blk.generator.is_none())
    }));

    Ok(MembershipProgram {
        order: k,
        target: target.clone(),
        target_scale,
        direction,
        generators: gens.clone(),
        blocks,
        multipliers,
        lambda_index,
        constraint_index,
        unreachable,
        sdp,
    })
}

/// `sup { lambda : f - lambda in M_k(g; h; c - f) }`
pub fn build_hierarchy_step(problem: &PopProblem, k: u32) -> Result<MembershipProgram, BuildError> {
    let gens = GeneratorSet::from_problem(problem);
    build_membership_program(&problem.objective.to_f64(), &gens, k, Direction::MaximizeLambda)
}

/// `inf { lambda : lambda - ||x||^2 in M_k(g; h; c - f) }`
pub fn build_archimedean_check(problem: &PopProblem, k: u32) -> Result<MembershipProgram, BuildError> {
    let gens = GeneratorSet::from_problem(problem);
    let target = -Polynomial::<f64>::norm_squared(problem.num_vars());
    build_membership_program(&target, &gens, k, Direction::MinimizeLambda)
}

/// `sup { mu : f_d - mu = sigma + phi (||x||^2 - 1) }` with `sigma` of degree
/// `2k` and `phi` of degree `2k - 2`, where `f_d` is the leading form of `f`.
pub fn build_coercivity_check(f: &Polynomial<f64>, k: u32) -> Result<MembershipProgram, BuildError> {
    let fd = f.leading_form().map_err(|_| BuildError::ZeroPolynomial)?;
    let d = fd.degree();
    if d < 2 || d % 2 == 1 {
        return Err(BuildError::OddOrSmallDegree(d));
    }
    let gens = GeneratorSet::sphere(f.num_vars());
    build_membership_program(&fd, &gens, k, Direction::MaximizeLambda)
}

/// Reconstructs `sum_b sigma_b g_b + sum_l phi_l h_l - s*lambda` from raw
/// (scaled) program variables, in units of the original generators and target.
pub fn reconstruct_identity(
    program: &MembershipProgram,
    grams: &[nalgebra::DMatrix<f64>],
    free: &[f64],
) -> Polynomial<f64> {
    let n = program.num_vars();
    let mut acc: HashMap<Monomial, f64> = HashMap::new();
    let one = Polynomial::one(n);
    for (b, block) in program.blocks.iter().enumerate() {
        let g = match block.generator {
            None => &one,
            Some(j) => &program.generators.inequalities()[j].scaled,
        };
        for (a, ma) in block.basis.iter().enumerate() {
            for (c, mc) in block.basis.iter().enumerate() {
                let q = grams[b][(a, c)];
                if q == 0.0 {
                    continue;
                }
                let prod = ma.mul(mc);
                for (gm, gc) in g.terms() {
                    *acc.entry(prod.mul(gm)).or_insert(0.0) += q * gc;
                }
            }
        }
    }
    for fb in &program.multipliers {
        let h = &program.generators.equalities()[fb.generator].scaled;
        for (i, m) in fb.basis.iter().enumerate() {
            for (hm, hc) in h.terms() {
                *acc.entry(m.mul(hm)).or_insert(0.0) += free[fb.offset + i] * hc;
            }
        }
    }
    if let Some(li) = program.lambda_index {
        *acc.entry(Monomial::one(n)).or_insert(0.0) -= program.direction.lambda_sign() * free[li];
    }
    Polynomial::from_terms(n, acc.into_iter().map(|(m, c)| (m, c * program.target_scale))).expect("arity checked")
}
