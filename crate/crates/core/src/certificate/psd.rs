use nalgebra::DMatrix;
use num_traits::{Signed, Zero};

use crate::poly::{Coeff, Rational};

/// Coefficient types whose Gram matrices can be checked for
/// positive semidefiniteness.
pub trait GramScalar: Coeff {
    /// Returns `(is_psd, smallest eigenvalue)`. `eig_tol` is the allowed
    /// negative slack for floating point; exact types ignore it.
    fn psd_check(gram: &[Vec<Self>], eig_tol: f64) -> (bool, f64);
}

fn min_eigenvalue(gram: &[Vec<f64>]) -> f64 {
    let n = gram.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let m = DMatrix::from_fn(n, n, |i, j| gram[i][j]);
    m.symmetric_eigenvalues().min()
}

impl GramScalar for f64 {
    fn psd_check(gram: &[Vec<f64>], eig_tol: f64) -> (bool, f64) {
        let lmin = min_eigenvalue(gram);
        (lmin >= -eig_tol, lmin)
    }
}

impl GramScalar for Rational {
    fn psd_check(gram: &[Vec<Rational>], _eig_tol: f64) -> (bool, f64) {
        let approx: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(Coeff::to_f64).collect()).collect();
        (is_psd_exact(gram), min_eigenvalue(&approx))
    }
}

/// Exact PSD test by symmetric Gaussian elimination.
///
/// Pivots on the largest remaining diagonal entry; a zero pivot requires the
/// whole remaining row to vanish.
pub fn is_psd_exact(gram: &[Vec<Rational>]) -> bool {
    let mut a: Vec<Vec<Rational>> = gram.to_vec();
    let mut active: Vec<usize> = (0..a.len()).collect();
    while !active.is_empty() {
        let (pos, &p) = active
            .iter()
            .enumerate()
            .max_by(|(_, &i), (_, &j)| a[i][i].cmp(&a[j][j]))
            .expect("non-empty");
        let pivot = a[p][p].clone();
        if pivot.is_negative() {
            return false;
        }
        active.swap_remove(pos);
        if pivot.is_zero() {
            // every diagonal entry left is zero, so the rest must be zero too
            return active.iter().all(|&i| active.iter().all(|&j| a[i][j].is_zero()));
        }
        for &i in &active {
            if a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] / &pivot;
            for &j in &active {
                let d = &f * &a[p][j];
                a[i][j] -= d;
            }
        }
    }
    true
}
