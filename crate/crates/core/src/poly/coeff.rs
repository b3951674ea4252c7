use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational coefficients.
pub type Rational = BigRational;

/// Coefficient field of a [`Polynomial`](super::Polynomial).
///
/// Implemented for `f64` (solver-facing) and [`Rational`] (exact identity
/// checks).
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + Signed + 'static {
    fn to_f64(&self) -> f64;

    /// Parses an unsigned decimal literal such as `12`, `0.25` or `1.5e-3`.
    fn parse_literal(text: &str) -> Option<Self>;

    /// Canonical text for a non-negative coefficient, re-readable by
    /// [`Coeff::parse_literal`] (optionally followed by `/q`).
    fn format(&self) -> String;
}

impl Coeff for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_literal(text: &str) -> Option<Self> {
        let v: f64 = text.parse().ok()?;
        v.is_finite().then_some(v)
    }

    fn format(&self) -> String {
        let a = self.abs();
        if a == 0.0 || (1e-4..1e15).contains(&a) {
            format!("{self}")
        } else {
            format!("{self:e}")
        }
    }
}

impl Coeff for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_literal(text: &str) -> Option<Self> {
        let (mantissa, exp) = match text.find(['e', 'E']) {
            Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
            None => (text, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((a, b)) => (a, b),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = digits.parse().ok()?;
        let shift = exp.checked_sub(frac_part.len() as i32)?;
        if shift.unsigned_abs() > 4096 {
            return None;
        }
        let ten = BigInt::from(10);
        let pow = num_traits::pow(ten, shift.unsigned_abs() as usize);
        Some(if shift >= 0 {
            Rational::from_integer(num * pow)
        } else {
            Rational::new(num, pow)
        })
    }

    fn format(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Exact conversion of a finite float; non-finite values map to zero.
pub fn rational_from_f64(v: f64) -> Rational {
    Rational::from_float(v).unwrap_or_else(Rational::zero)
}
