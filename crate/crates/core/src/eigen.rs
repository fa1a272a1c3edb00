//! Exact monic eigenpolynomials by back-substitution.
//!
//! `T` never raises degree, so in the monomial basis it is upper triangular
//! with diagonal `lambda_m`. Fixing `c_n = 1` and walking `m = n-1, ..., 0`:
//!
//! `(lambda_m - lambda_n) c_m = -sum_{m' > m} M[m][m'] c_{m'}`
//!
//! where `M[m][m']` is the `z^m` coefficient of `T(z^{m'})`. Only
//! `m' <= m + k` contribute.

use rug::Rational;

use crate::error::{Error, Result};
use crate::operator::DifferentialOperator;
use crate::poly::ExactPolynomial;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenPair {
    pub n: usize,
    /// Monic, degree `n`.
    pub p: ExactPolynomial,
    pub lambda: Rational,
}

/// The unique monic degree-`n` eigenpolynomial of a degenerate operator.
///
/// Fails with [`Error::SpectralCollision`] if `lambda_m == lambda_n` for some
/// `m < n`; the system is then singular and no particular solution is chosen.
pub fn eigenpolynomial(op: &DifferentialOperator, n: usize) -> Result<EigenPair> {
    op.degeneracy()?;
    if n == 0 {
        return Err(Error::PreconditionViolation("degree must be at least 1".into()));
    }
    let k = op.order();
    let lambdas: Vec<Rational> = (0..=n).map(|m| op.eigenvalue(m)).collect();
    let lambda_n = lambdas[n].clone();

    let mut c = vec![Rational::new(); n + 1];
    c[n] = Rational::from(1);
    for m in (0..n).rev() {
        let diag = Rational::from(&lambdas[m] - &lambda_n);
        if diag == 0 {
            return Err(Error::SpectralCollision { m, n });
        }
        let mut rhs = Rational::new();
        for mp in m + 1..=(m + k).min(n) {
            if c[mp] == 0 {
                continue;
            }
            let entry = op.matrix_entry(m, mp);
            if entry != 0 {
                rhs -= entry * &c[mp];
            }
        }
        c[m] = rhs / diag;
    }
    Ok(EigenPair {
        n,
        p: ExactPolynomial::new(c),
        lambda: lambda_n,
    })
}

/// `T(p) - lambda p`; zero exactly when `pair` is an eigenpair of `op`.
pub fn verify_eigen(op: &DifferentialOperator, pair: &EigenPair) -> ExactPolynomial {
    &op.apply(&pair.p) - &pair.p.scale(&pair.lambda)
}
