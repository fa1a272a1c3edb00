//! Differential operators `T = sum_j Q_j(z) D^j` with polynomial coefficients,
//! and their classification as exactly-solvable (degenerate or not).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rug::Rational;

use crate::error::{Error, Result};
use crate::poly::{falling_factorial, ExactPolynomial};

/// `T = sum_{j=1}^{k} Q_j D^j`, keyed by derivative order.
///
/// Structurally any map from orders `j >= 1` to polynomials is accepted,
/// including explicit zero coefficients; whether the result is an
/// exactly-solvable operator is decided by [`DifferentialOperator::classify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialOperator {
    terms: BTreeMap<usize, ExactPolynomial>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvalidReason {
    /// `deg Q_j > j`
    DegreeTooHigh { j: usize, degree: usize },
    /// no order attains `deg Q_j = j`
    NoEqualityIndex,
    /// the highest stored order has `Q_k = 0`
    ZeroLeadingTerm { k: usize },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DegreeTooHigh { j, degree } => {
                write!(f, "deg Q_{j} = {degree} exceeds the derivative order {j}")
            }
            Self::NoEqualityIndex => f.write_str("no order j has deg Q_j = j"),
            Self::ZeroLeadingTerm { k } => write!(f, "leading coefficient Q_{k} is zero"),
        }
    }
}

/// Growth data of a degenerate operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Degeneracy {
    /// Largest `j` with `deg Q_j = j`.
    pub j0: usize,
    /// `max_{j0 < j <= k} (j - j0) / (j - deg Q_j)`, exact.
    pub d: Rational,
    /// The orders attaining `d` (also called `J`).
    pub attaining: BTreeSet<usize>,
    /// `max(attaining)`.
    pub jm: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Degenerate(Degeneracy),
    NonDegenerate { j0: usize },
    Invalid(InvalidReason),
}

impl Classification {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Degenerate(_) => "degenerate",
            Self::NonDegenerate { .. } => "non-degenerate",
            Self::Invalid(_) => "invalid",
        }
    }

    pub fn degeneracy(&self) -> Option<&Degeneracy> {
        match self {
            Self::Degenerate(d) => Some(d),
            _ => None,
        }
    }
}

impl DifferentialOperator {
    /// Collects `(j, Q_j)` pairs; repeated orders are summed. Fails on an
    /// empty term list or an order of zero.
    pub fn new(terms: impl IntoIterator<Item = (usize, ExactPolynomial)>) -> Result<Self> {
        let mut map: BTreeMap<usize, ExactPolynomial> = BTreeMap::new();
        for (j, q) in terms {
            if j == 0 {
                return Err(Error::PreconditionViolation(
                    "derivative orders start at 1".into(),
                ));
            }
            let entry = map.entry(j).or_default();
            *entry = &*entry + &q;
        }
        if map.is_empty() {
            return Err(Error::PreconditionViolation("operator has no terms".into()));
        }
        Ok(Self { terms: map })
    }

    /// Shorthand for operators with integer coefficients:
    /// `from_integer_terms(&[(1, &[0, 1]), (2, &[1])])` is `zD + D^2`.
    pub fn from_integer_terms(terms: &[(usize, &[i64])]) -> Result<Self> {
        Self::new(
            terms
                .iter()
                .map(|(j, cs)| (*j, ExactPolynomial::from_integers(cs))),
        )
    }

    pub fn order(&self) -> usize {
        *self.terms.keys().next_back().expect("nonempty by construction")
    }

    pub fn terms(&self) -> &BTreeMap<usize, ExactPolynomial> {
        &self.terms
    }

    /// `Q_j`, if stored.
    pub fn coefficient(&self, j: usize) -> Option<&ExactPolynomial> {
        self.terms.get(&j)
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        Self {
            terms: self.terms.iter().map(|(j, q)| (*j, q.scale(c))).collect(),
        }
    }

    pub fn classify(&self) -> Classification {
        let k = self.order();
        let mut j0 = None;
        for (&j, q) in &self.terms {
            match q.degree() {
                Some(deg) if deg > j => {
                    return Classification::Invalid(InvalidReason::DegreeTooHigh { j, degree: deg })
                }
                Some(deg) if deg == j => j0 = Some(j),
                _ => {}
            }
        }
        if self.terms[&k].is_zero() {
            return Classification::Invalid(InvalidReason::ZeroLeadingTerm { k });
        }
        let Some(j0) = j0 else {
            return Classification::Invalid(InvalidReason::NoEqualityIndex);
        };
        if j0 == k {
            return Classification::NonDegenerate { j0 };
        }

        // zero or absent Q_j never attain d, which is positive here
        let ratios: Vec<(usize, Rational)> = self
            .terms
            .range(j0 + 1..)
            .filter_map(|(&j, q)| {
                let deg = q.degree()?;
                Some((j, Rational::from(((j - j0) as u64, (j - deg) as u64))))
            })
            .collect();
        let d = ratios
            .iter()
            .map(|(_, r)| r)
            .max()
            .cloned()
            .expect("Q_k is nonzero with k > j0");
        let attaining: BTreeSet<usize> = ratios
            .iter()
            .filter(|(_, r)| *r == d)
            .map(|(j, _)| *j)
            .collect();
        let jm = *attaining.iter().next_back().expect("max is attained");
        Classification::Degenerate(Degeneracy {
            j0,
            d,
            attaining,
            jm,
        })
    }

    /// Classification data, or an error when `T` is not degenerate.
    pub fn degeneracy(&self) -> Result<Degeneracy> {
        match self.classify() {
            Classification::Degenerate(d) => Ok(d),
            Classification::NonDegenerate { .. } => Err(Error::NotDegenerate(
                "deg Q_k = k (non-degenerate)".into(),
            )),
            Classification::Invalid(reason) => Err(Error::NotDegenerate(reason.to_string())),
        }
    }

    /// `lambda_n = sum_j q_{j,j} n!/(n-j)!`: the diagonal of `T` on `z^n`.
    pub fn eigenvalue(&self, n: usize) -> Rational {
        let mut lambda = Rational::new();
        for (&j, q) in &self.terms {
            if let Some(c) = q.coeff(j) {
                lambda += Rational::from(c * falling_factorial(n, j));
            }
        }
        lambda
    }

    /// Exact `sum_j Q_j p^{(j)}`.
    pub fn apply(&self, p: &ExactPolynomial) -> ExactPolynomial {
        self.terms
            .iter()
            .fold(ExactPolynomial::zero(), |acc, (&j, q)| {
                &acc + &(q * &p.differentiate(j))
            })
    }

    /// Coefficient of `z^m` in `T(z^{m'})`, i.e. `sum_j q_{j, m-m'+j} * m'!/(m'-j)!`.
    pub fn matrix_entry(&self, m: usize, m_prime: usize) -> Rational {
        let mut acc = Rational::new();
        for (&j, q) in &self.terms {
            if j > m_prime {
                break;
            }
            // i = m - m' + j must lie in [0, deg Q_j]
            let Some(i) = (m + j).checked_sub(m_prime) else {
                continue;
            };
            if let Some(c) = q.coeff(i) {
                if *c != 0 {
                    acc += Rational::from(c * falling_factorial(m_prime, j));
                }
            }
        }
        acc
    }
}

/// The operators used throughout the experiments and tests.
pub mod fleet {
    use super::DifferentialOperator;

    /// `zD + zD^2 + zD^3 + zD^4 + zD^5`
    pub fn t1() -> DifferentialOperator {
        DifferentialOperator::from_integer_terms(&[
            (1, &[0, 1]),
            (2, &[0, 1]),
            (3, &[0, 1]),
            (4, &[0, 1]),
            (5, &[0, 1]),
        ])
        .expect("well-formed")
    }

    /// `z^2 D^2 + D^7`
    pub fn t2() -> DifferentialOperator {
        DifferentialOperator::from_integer_terms(&[(2, &[0, 0, 1]), (7, &[1])]).expect("well-formed")
    }

    /// `z^3 D^3 + z^2 D^4 + z D^5`
    pub fn t3() -> DifferentialOperator {
        DifferentialOperator::from_integer_terms(&[
            (3, &[0, 0, 0, 1]),
            (4, &[0, 0, 1]),
            (5, &[0, 1]),
        ])
        .expect("well-formed")
    }

    /// `zD + D^2`, whose eigenpolynomials are rotated Hermite polynomials.
    pub fn hermite() -> DifferentialOperator {
        DifferentialOperator::from_integer_terms(&[(1, &[0, 1]), (2, &[1])]).expect("well-formed")
    }

    /// `-2zD + z^2 D^2 + D^3`: `lambda_1 = lambda_2 = -2`.
    pub fn colliding() -> DifferentialOperator {
        DifferentialOperator::from_integer_terms(&[(1, &[0, -2]), (2, &[0, 0, 1]), (3, &[1])])
            .expect("well-formed")
    }
}

#[cfg(test)]
mod tests {
    use super::fleet::*;
    use super::*;
    use proptest::prelude::*;

    fn degeneracy(t: &DifferentialOperator) -> Degeneracy {
        t.classify().degeneracy().cloned().expect("degenerate")
    }

    #[test]
    fn classify_paper_operators() {
        let d = degeneracy(&t1());
        assert_eq!((d.j0, d.d.clone(), d.jm), (1, Rational::from(1), 5));
        assert_eq!(d.attaining, BTreeSet::from([2, 3, 4, 5]));

        let d = degeneracy(&t2());
        assert_eq!((d.j0, d.d.clone(), d.jm), (2, Rational::from((5, 7)), 7));
        assert_eq!(d.attaining, BTreeSet::from([7]));

        let d = degeneracy(&t3());
        assert_eq!((d.j0, d.d.clone(), d.jm), (3, Rational::from((1, 2)), 5));
        assert_eq!(d.attaining, BTreeSet::from([4, 5]));
    }

    #[test]
    fn classify_rejects_invalid() {
        let pure = DifferentialOperator::from_integer_terms(&[(2, &[1])]).unwrap();
        assert_eq!(
            pure.classify(),
            Classification::Invalid(InvalidReason::NoEqualityIndex)
        );
        let high = DifferentialOperator::from_integer_terms(&[(2, &[0, 0, 0, 1])]).unwrap();
        assert!(matches!(
            high.classify(),
            Classification::Invalid(InvalidReason::DegreeTooHigh { j: 2, degree: 3 })
        ));
        let zero_lead =
            DifferentialOperator::from_integer_terms(&[(1, &[0, 1]), (3, &[0])]).unwrap();
        assert!(matches!(
            zero_lead.classify(),
            Classification::Invalid(InvalidReason::ZeroLeadingTerm { k: 3 })
        ));
        let nondeg = DifferentialOperator::from_integer_terms(&[(1, &[0, 1]), (2, &[0, 0, 1])])
            .unwrap();
        assert_eq!(nondeg.classify(), Classification::NonDegenerate { j0: 2 });
        assert!(DifferentialOperator::new(Vec::new()).is_err());
        assert!(DifferentialOperator::from_integer_terms(&[(0, &[1])]).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(t1().eigenvalue(100), 100);
        assert_eq!(t2().eigenvalue(7), 42);
        assert_eq!(t3().eigenvalue(3), 6);
        assert_eq!(t3().eigenvalue(2), 0);
    }

    #[test]
    fn apply_examples() {
        let p = ExactPolynomial::from_integers(&[1, 0, 1]);
        assert_eq!(
            hermite().apply(&p),
            ExactPolynomial::from_integers(&[2, 0, 2])
        );
        let c = ExactPolynomial::from_integers(&[7]);
        for t in [t1(), t2(), t3(), hermite()] {
            assert!(t.apply(&c).is_zero());
        }
        assert_eq!(t1().apply(&ExactPolynomial::x()), ExactPolynomial::x());
    }

    #[test]
    fn repeated_orders_accumulate() {
        let t = DifferentialOperator::from_integer_terms(&[(1, &[0, 1]), (1, &[1])]).unwrap();
        assert_eq!(t.coefficient(1), Some(&ExactPolynomial::from_integers(&[1, 1])));
    }

    #[test]
    fn leading_coefficient_matches_eigenvalue() {
        for t in [t1(), t2(), t3(), hermite()] {
            for n in 0..=50 {
                let image = t.apply(&ExactPolynomial::monomial(Rational::from(1), n));
                assert_eq!(image.coeff_or_zero(n), t.eigenvalue(n), "n = {n}");
                assert_eq!(t.matrix_entry(n, n), t.eigenvalue(n));
            }
        }
    }

    fn rational() -> impl Strategy<Value = Rational> {
        (-12i64..=12, 1i64..=5).prop_map(|(n, d)| Rational::from((n, d)))
    }

    fn poly(max_deg: usize) -> impl Strategy<Value = ExactPolynomial> {
        prop::collection::vec(rational(), 0..=max_deg + 1).prop_map(ExactPolynomial::new)
    }

    /// Random operators satisfying `deg Q_j <= j` with `Q_1 = z` guaranteeing
    /// an equality index.
    fn operator() -> impl Strategy<Value = DifferentialOperator> {
        (1usize..=5).prop_flat_map(|k| {
            prop::collection::vec((0usize..=4).prop_flat_map(poly), k).prop_map(move |qs| {
                let mut terms = vec![(1, ExactPolynomial::x())];
                for (idx, q) in qs.into_iter().enumerate() {
                    let j = idx + 1;
                    let trimmed = ExactPolynomial::new(q.coeffs().iter().take(j + 1).cloned().collect());
                    terms.push((j, trimmed));
                }
                DifferentialOperator::new(terms).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn apply_is_linear(t in operator(), p in poly(10), r in poly(10), a in rational(), b in rational()) {
            let lhs = t.apply(&(&p.scale(&a) + &r.scale(&b)));
            let rhs = &t.apply(&p).scale(&a) + &t.apply(&r).scale(&b);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn apply_never_raises_degree(t in operator(), p in poly(12)) {
            let image = t.apply(&p);
            match (p.degree(), image.degree()) {
                (_, None) => {}
                (Some(dp), Some(di)) => prop_assert!(di <= dp),
                (None, Some(_)) => prop_assert!(false, "zero mapped to nonzero"),
            }
        }

        #[test]
        fn classification_is_scale_invariant(t in operator(), c in rational()) {
            prop_assume!(c != 0);
            prop_assert_eq!(t.classify(), t.scaled(&c).classify());
        }
    }
}
