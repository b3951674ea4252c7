use serde::{Deserialize, Serialize};

use crate::io::PopProblem;
use crate::poly::Polynomial;

/// What a generator stands for in the original problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum GeneratorTag {
    /// The `j`-th inequality `g_j >= 0` (0-based).
    Inequality(usize),
    /// The `l`-th equality `h_l = 0` (0-based).
    Equality(usize),
    /// The bound gap `c - f`.
    BoundGap,
    /// The unit sphere `||x||^2 - 1`.
    Sphere,
}

impl GeneratorTag {
    pub fn label(&self) -> String {
        match self {
            GeneratorTag::Inequality(j) => format!("g{}", j + 1),
            GeneratorTag::Equality(l) => format!("h{}", l + 1),
            GeneratorTag::BoundGap => "c-f".to_string(),
            GeneratorTag::Sphere => "theta".to_string(),
        }
    }
}

/// A generator together with the scaled copy used to assemble programs.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub tag: GeneratorTag,
    /// The generator as given.
    pub poly: Polynomial<f64>,
    /// `poly / scale`, unit l1 norm unless `poly` is zero.
    pub scaled: Polynomial<f64>,
    pub scale: f64,
}

impl Generator {
    pub fn new(tag: GeneratorTag, poly: Polynomial<f64>) -> Self {
        let norm = poly.l1_norm();
        let scale = if norm > 0.0 { norm } else { 1.0 };
        let scaled = poly.scale(&(1.0 / scale));
        Self {
            tag,
            poly,
            scaled,
            scale,
        }
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }
}

/// Inequality and equality generators of a truncated quadratic module
/// `M_k(g; h)`. Degree data is always derived from the polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    num_vars: usize,
    ineq: Vec<Generator>,
    eq: Vec<Generator>,
}

impl GeneratorSet {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ineq: Vec::new(),
            eq: Vec::new(),
        }
    }

    /// `(g_1, ..., g_m, c - f; h_1, ..., h_r)` for a problem.
    pub fn from_problem(problem: &PopProblem) -> Self {
        let mut set = Self::new(problem.num_vars());
        for (j, g) in problem.inequalities.iter().enumerate() {
            set.push_inequality(GeneratorTag::Inequality(j), g.to_f64());
        }
        set.push_inequality(GeneratorTag::BoundGap, problem.c_minus_f().to_f64());
        for (l, h) in problem.equalities.iter().enumerate() {
            set.push_equality(GeneratorTag::Equality(l), h.to_f64());
        }
        set
    }

    /// The single equality generator `||x||^2 - 1`.
    pub fn sphere(num_vars: usize) -> Self {
        let mut set = Self::new(num_vars);
        let theta = &Polynomial::norm_squared(num_vars) - &Polynomial::one(num_vars);
        set.push_equality(GeneratorTag::Sphere, theta);
        set
    }

    pub fn push_inequality(&mut self, tag: GeneratorTag, g: Polynomial<f64>) {
        assert_eq!(g.num_vars(), self.num_vars, "generator arity");
        self.ineq.push(Generator::new(tag, g));
    }

    pub fn push_equality(&mut self, tag: GeneratorTag, h: Polynomial<f64>) {
        assert_eq!(h.num_vars(), self.num_vars, "generator arity");
        self.eq.push(Generator::new(tag, h));
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn inequalities(&self) -> &[Generator] {
        &self.ineq
    }

    pub fn equalities(&self) -> &[Generator] {
        &self.eq
    }

    /// `v_j = ceil(deg(g_j) / 2)`
    pub fn half_degrees(&self) -> Vec<u32> {
        self.ineq.iter().map(|g| g.degree().div_ceil(2)).collect()
    }

    /// `w_l = deg(h_l)`
    pub fn eq_degrees(&self) -> Vec<u32> {
        self.eq.iter().map(Generator::degree).collect()
    }

    /// Smallest order `k` at which `target` can be represented:
    /// `max(ceil(deg(target)/2), max_j v_j, max_l ceil(w_l/2), 1)`.
    pub fn min_order(&self, target: &Polynomial<f64>) -> u32 {
        let v = self.half_degrees().into_iter().max().unwrap_or(0);
        let w = self.eq_degrees().into_iter().map(|w| w.div_ceil(2)).max().unwrap_or(0);
        target.degree().div_ceil(2).max(v).max(w).max(1)
    }
}
