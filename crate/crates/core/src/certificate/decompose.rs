use nalgebra::DMatrix;

use super::CertificateError;
use crate::poly::{Monomial, Polynomial};

/// Eigenvalues below this fraction of the largest one are dropped.
pub const CLIP_RELATIVE: f64 = 1e-7;

/// `v' G v ~ sum_i p_i^2`
#[derive(Debug, Clone, PartialEq)]
pub struct SosDecomposition {
    pub squares: Vec<Polynomial<f64>>,
    /// Eigenvalues kept, in the order of `squares`.
    pub kept: Vec<f64>,
    /// Eigenvalues discarded by clipping.
    pub clipped: Vec<f64>,
    /// Upper bound on the l1 distance between `v' G v` and `sum p_i^2`:
    /// the larger of the measured distance and the clipped contribution
    /// `sum |lambda_i| * ||(u_i . v)^2||_1`.
    pub truncation_error: f64,
}

impl SosDecomposition {
    pub fn sum(&self, num_vars: usize) -> Polynomial<f64> {
        self.squares
            .iter()
            .fold(Polynomial::zero(num_vars), |acc, p| &acc + &(p * p))
    }
}

fn eigvec_poly(num_vars: usize, basis: &[Monomial], v: impl Iterator<Item = f64>, scale: f64) -> Polynomial<f64> {
    let mut p = Polynomial::zero(num_vars);
    for (m, c) in basis.iter().zip(v) {
        p.add_term(m.clone(), c * scale);
    }
    p
}

/// Splits a Gram form into a sum of squares via its eigendecomposition.
pub fn sos_decompose(
    gram: &DMatrix<f64>,
    basis: &[Monomial],
    num_vars: usize,
    eig_tol: f64,
) -> Result<SosDecomposition, CertificateError> {
    assert_eq!(gram.nrows(), basis.len(), "Gram size");
    let n = basis.len();
    if n == 0 {
        return Ok(SosDecomposition {
            squares: Vec::new(),
            kept: Vec::new(),
            clipped: Vec::new(),
            truncation_error: 0.0,
        });
    }
    let sym = (gram + gram.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let lmin = eig.eigenvalues.min();
    if lmin < -eig_tol {
        return Err(CertificateError::NotPsd(lmin));
    }
    let lmax = eig.eigenvalues.max().max(0.0);
    let cut = CLIP_RELATIVE * lmax;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = SosDecomposition {
        squares: Vec::new(),
        kept: Vec::new(),
        clipped: Vec::new(),
        truncation_error: 0.0,
    };
    let mut clipped_bound = 0.0;
    for i in order {
        let lambda = eig.eigenvalues[i];
        let col = eig.eigenvectors.column(i);
        if lambda > cut && lambda > 0.0 {
            out.squares
                .push(eigvec_poly(num_vars, basis, col.iter().copied(), lambda.sqrt()));
            out.kept.push(lambda);
        } else {
            let u = eigvec_poly(num_vars, basis, col.iter().copied(), 1.0);
            clipped_bound += lambda.abs() * (&u * &u).l1_norm();
            out.clipped.push(lambda);
        }
    }
    let mut form = Polynomial::zero(num_vars);
    for a in 0..n {
        for b in 0..n {
            form.add_term(basis[a].mul(&basis[b]), sym[(a, b)]);
        }
    }
    let measured = (&form - &out.sum(num_vars)).l1_norm();
    out.truncation_error = measured.max(clipped_bound);
    Ok(out)
}
