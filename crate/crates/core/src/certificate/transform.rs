use super::{CertificateError, GramScalar, ModuleCertificate, SosWeight, WeightTag};
use crate::poly::{Coeff, Monomial, Polynomial};
use crate::sos::{Direction, GeneratorTag};

/// `(1 + psi) * F = q'` with `q'` a certificate over the module without the
/// bound gap generator.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedCertificate<C = f64> {
    pub one_plus_psi: Polynomial<C>,
    /// Certifies membership of `(1 + psi) * F` in `M(g; h)`.
    pub certificate: ModuleCertificate<C>,
}

/// Removes the bound gap term from a certificate.
///
/// If `cert` shows `F = q + psi (c - f)` where `F = f + s*lambda` is its
/// shifted target, then `(1 + psi) F = q + (c + s*lambda) psi` and the last
/// term is folded into the constant SOS weight. Requires
/// `c + s*lambda >= 0`. `gens` must hold every generator of `cert`, the
/// result is checked against them.
pub fn corollary_transform<C: GramScalar + PartialOrd>(
    cert: &ModuleCertificate<C>,
    c: &C,
    gens: &[(GeneratorTag, Polynomial<C>)],
    tol: f64,
) -> Result<TransformedCertificate<C>, CertificateError> {
    let n = cert.num_vars();
    let shifted = cert.shifted_target();
    let c_eff = c.clone() + (shifted.constant_term() - cert.target.constant_term());
    if c_eff < C::zero() {
        return Err(CertificateError::NegativeBound(c_eff.to_f64()));
    }
    let gap_tag = WeightTag::Generator(GeneratorTag::BoundGap);
    let psi = cert.weight(gap_tag);
    let psi_poly = psi.map_or_else(|| Polynomial::zero(n), |w| w.polynomial(n));
    let one_plus_psi = &Polynomial::one(n) + &psi_poly;

    let mut weights: Vec<SosWeight<C>> = cert.sos_weights.iter().filter(|w| w.tag != gap_tag).cloned().collect();
    if let Some(psi) = psi {
        let pos = match weights.iter().position(|w| w.tag == WeightTag::Constant) {
            Some(p) => p,
            None => {
                weights.insert(
                    0,
                    SosWeight {
                        tag: WeightTag::Constant,
                        basis: Vec::new(),
                        gram: Vec::new(),
                    },
                );
                0
            }
        };
        fold_into(&mut weights[pos], psi, &c_eff);
    }

    let kept: Vec<_> = gens
        .iter()
        .filter(|(t, _)| *t != GeneratorTag::BoundGap)
        .cloned()
        .collect();
    let transformed = ModuleCertificate::new(
        cert.order,
        Direction::Feasibility,
        &one_plus_psi * &shifted,
        C::zero(),
        weights,
        cert.eq_multipliers.clone(),
        &kept,
    )?;
    let before = cert.mismatch(gens)?.l1_norm().to_f64();
    let allowed = before + tol * (1.0 + transformed.target.l1_norm().to_f64());
    let within = transformed.residual <= allowed;
    if !within {
        return Err(CertificateError::TransformFailed(transformed.residual));
    }
    Ok(TransformedCertificate {
        one_plus_psi,
        certificate: transformed,
    })
}

/// `sigma += factor * psi` on the Gram level, growing the basis if needed.
fn fold_into<C: Coeff>(sigma: &mut SosWeight<C>, psi: &SosWeight<C>, factor: &C) {
    let index = |sigma: &mut SosWeight<C>, m: &Monomial| -> usize {
        if let Some(i) = sigma.basis.iter().position(|b| b == m) {
            return i;
        }
        for row in &mut sigma.gram {
            row.push(C::zero());
        }
        sigma.basis.push(m.clone());
        sigma.gram.push(vec![C::zero(); sigma.basis.len()]);
        sigma.basis.len() - 1
    };
    let map: Vec<usize> = psi.basis.iter().map(|m| index(sigma, m)).collect();
    for (a, &ia) in map.iter().enumerate() {
        for (b, &ib) in map.iter().enumerate() {
            let add = factor.clone() * psi.gram[a][b].clone();
            sigma.gram[ia][ib] = sigma.gram[ia][ib].clone() + add;
        }
    }
}
