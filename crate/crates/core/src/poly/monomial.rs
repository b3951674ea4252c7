use std::cmp::Ordering;

/// Exponent vector `x^alpha`, ordered graded-lexicographically.
///
/// Within a degree the monomial with the larger exponent on the first
/// differing variable comes first, so for two variables the ascending order
/// is `1, x1, x2, x1^2, x1*x2, x2^2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
    degree: u32,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        let degree = exps.iter().sum();
        Self { exps, degree }
    }

    pub fn one(num_vars: usize) -> Self {
        Self::new(vec![0; num_vars])
    }

    /// The variable `x_i` (0-based).
    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut exps = vec![0; num_vars];
        exps[i] = 1;
        Self::new(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn num_vars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
            degree: self.degree + other.degree,
        }
    }

    pub fn pow(&self, e: u32) -> Monomial {
        Monomial {
            exps: self.exps.iter().map(|a| a * e).collect(),
            degree: self.degree * e,
        }
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(point)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            for (a, b) in self.exps.iter().zip(&other.exps) {
                match b.cmp(a) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            self.exps.len().cmp(&other.exps.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `num_vars` variables of total degree at most `max_degree`,
/// ascending in graded-lex order. The length is `C(num_vars + max_degree, num_vars)`.
pub fn monomial_basis(num_vars: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut exps = vec![0u32; num_vars];
        push_degree(&mut out, &mut exps, 0, d);
    }
    out
}

fn push_degree(out: &mut Vec<Monomial>, exps: &mut [u32], var: usize, remaining: u32) {
    if var + 1 >= exps.len() {
        if let Some(last) = exps.len().checked_sub(1) {
            exps[last] = remaining;
            out.push(Monomial::new(exps.to_vec()));
            exps[last] = 0;
        } else if remaining == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return;
    }
    for e in (0..=remaining).rev() {
        exps[var] = e;
        push_degree(out, exps, var + 1, remaining - e);
    }
    exps[var] = 0;
}

/// `C(n + d, n)`, the number of monomials of degree at most `d` in `n` variables.
pub fn basis_size(num_vars: usize, max_degree: u32) -> usize {
    let (n, d) = (num_vars as u128, max_degree as u128);
    let mut acc: u128 = 1;
    for i in 1..=n {
        acc = acc * (d + i) / i;
    }
    acc as usize
}
