use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use super::coeff::{rational_from_f64, Coeff, Rational};
use super::monomial::Monomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the zero polynomial has no highest-degree term")]
    ZeroPolynomial,
}

/// Sparse multivariate polynomial with coefficients in `C`.
///
/// Terms are kept in a map keyed by graded-lex monomials and never store a
/// zero coefficient. The zero polynomial has degree 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<C = f64> {
    num_vars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: C) -> Self {
        Self::term(num_vars, Monomial::one(num_vars), c)
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, C::one())
    }

    /// The variable `x_i` (0-based).
    pub fn var(num_vars: usize, i: usize) -> Self {
        Self::term(num_vars, Monomial::var(num_vars, i), C::one())
    }

    pub fn term(num_vars: usize, monomial: Monomial, c: C) -> Self {
        assert_eq!(monomial.num_vars(), num_vars, "monomial arity");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(monomial, c);
        }
        Self { num_vars, terms }
    }

    /// Collects terms, summing repeated monomials and dropping zeros.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        let mut p = Self::zero(num_vars);
        for (m, c) in terms {
            if m.num_vars() != num_vars {
                return Err(PolyError::DimensionMismatch {
                    expected: num_vars,
                    found: m.num_vars(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// `||x||^2 = x_1^2 + ... + x_n^2`
    pub fn norm_squared(num_vars: usize) -> Self {
        let mut p = Self::zero(num_vars);
        for i in 0..num_vars {
            p.add_term(Monomial::var(num_vars, i).pow(2), C::one());
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one(self.num_vars))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.keys().all(|m| m.degree() == d)
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), PolyError> {
        if self.num_vars == other.num_vars {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = Self::zero(self.num_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.num_vars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c.clone() * s.clone()))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Self {
            num_vars: self.num_vars,
            terms,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.num_vars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `sum_alpha |f_alpha|`
    pub fn l1_norm(&self) -> C {
        self.terms.values().fold(C::zero(), |acc, c| acc + c.abs())
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                found: point.len(),
            });
        }
        Ok(self.terms.iter().map(|(m, c)| c.to_f64() * m.evaluate(point)).sum())
    }

    /// Evaluation in the coefficient field itself (exact for rationals).
    pub fn evaluate_exact(&self, point: &[C]) -> Result<C, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                found: point.len(),
            });
        }
        let mut total = C::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (&e, x) in m.exponents().iter().zip(point) {
                for _ in 0..e {
                    v = v * x.clone();
                }
            }
            total = total + v;
        }
        Ok(total)
    }

    /// Splits into homogeneous parts `f = f_0 + f_1 + ... + f_d`, ascending in
    /// degree, omitting zero parts.
    pub fn homogeneous_components(&self) -> Vec<(u32, Polynomial<C>)> {
        let mut parts: BTreeMap<u32, Polynomial<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts
                .entry(m.degree())
                .or_insert_with(|| Self::zero(self.num_vars))
                .terms
                .insert(m.clone(), c.clone());
        }
        parts.into_iter().collect()
    }

    /// The highest-degree homogeneous part.
    pub fn leading_form(&self) -> Result<Polynomial<C>, PolyError> {
        self.homogeneous_components()
            .pop()
            .map(|(_, p)| p)
            .ok_or(PolyError::ZeroPolynomial)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut out = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Renders with the given variable names, highest-degree terms first.
    ///
    /// The output re-parses to the same polynomial.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let a = c.abs();
            let factors: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    let name = names.get(v).cloned().unwrap_or_else(|| format!("x{}", v + 1));
                    if e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            if factors.is_empty() {
                out.push_str(&a.format());
            } else {
                if !a.is_one() {
                    out.push_str(&a.format());
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

impl Polynomial<f64> {
    /// Exact rational image of the float coefficients.
    pub fn to_rational(&self) -> Polynomial<Rational> {
        self.map_coeffs(|&c| rational_from_f64(c))
    }
}

impl<C: Coeff> std::fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<C: Coeff> $tr<&Polynomial<C>> for &Polynomial<C> {
            type Output = Polynomial<C>;

            /// Panics when the operands have different variable counts; use
            /// the `checked_*` methods to get an error instead.
            fn $method(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                self.$checked(rhs).expect("polynomial arity mismatch")
            }
        }

        impl<C: Coeff> $tr<Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;

            fn $method(self, rhs: Polynomial<C>) -> Polynomial<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl<C: Coeff> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn neg(self) -> Polynomial<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> Neg for Polynomial<C> {
    type Output = Polynomial<C>;

    fn neg(self) -> Polynomial<C> {
        -&self
    }
}
