//! The algebraic curve satisfied by the limiting Cauchy transform,
//!
//! `F(z, y) = q_{j0,j0} z^{j0} y^{j0} + sum_{j in A} q_{j,deg Q_j} z^{deg Q_j} y^j - q_{j0,j0}`,
//!
//! its discriminant locus, and the branch `y ~ 1/z` at infinity.

use std::fmt;

use rug::{Assign, Complex, Float, Rational};

use crate::error::{Error, Result};
use crate::operator::DifferentialOperator;
use crate::poly::{ApproxPolynomial, ComplexApprox, ExactPolynomial};
use crate::roots::{find_roots_approx, find_roots_with, RootOptions};

/// Working precision for continuation.
pub const BRANCH_PRECISION: u32 = 128;
/// Targets closer than this to a locus point are refused.
pub const LOCUS_EXCLUSION: f64 = 1e-6;
const LOCUS_DIGITS: u32 = 20;

const INITIAL_SEGMENTS: u32 = 8;
const MIN_STEP_LOG2: i32 = -20;
const NEWTON_MAX_ITER: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveTerm {
    /// Power of `y`.
    pub j: usize,
    pub coeff: Rational,
    /// Power of `z`.
    pub z_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    pub j0: usize,
    /// `q_{j0,j0}`, the leading coefficient of `Q_{j0}`.
    pub lead: Rational,
    /// One entry per order attaining the growth exponent, ascending in `j`.
    pub terms: Vec<CurveTerm>,
}

impl CurveSpec {
    pub fn from_operator(op: &DifferentialOperator) -> Result<Self> {
        let deg = op.degeneracy()?;
        let q0 = op.coefficient(deg.j0).expect("j0 is a stored order");
        let lead = q0.leading().expect("deg Q_j0 = j0").clone();
        let terms = deg
            .attaining
            .iter()
            .map(|&j| {
                let q = op.coefficient(j).expect("attaining orders are stored");
                CurveTerm {
                    j,
                    coeff: q.leading().expect("attaining Q_j is nonzero").clone(),
                    z_degree: q.degree().expect("nonzero"),
                }
            })
            .collect();
        Ok(Self {
            j0: deg.j0,
            lead,
            terms,
        })
    }

    pub fn jm(&self) -> usize {
        self.terms.iter().map(|t| t.j).max().unwrap_or(self.j0)
    }

    pub fn polynomial(&self) -> BivariatePolynomial {
        let mut coeffs = vec![ExactPolynomial::zero(); self.jm().max(self.j0) + 1];
        let mut add = |j: usize, c: Rational, zd: usize| {
            coeffs[j] = &coeffs[j] + &ExactPolynomial::monomial(c, zd);
        };
        add(self.j0, self.lead.clone(), self.j0);
        for t in &self.terms {
            add(t.j, t.coeff.clone(), t.z_degree);
        }
        add(0, Rational::from(-&self.lead), 0);
        BivariatePolynomial::new(coeffs)
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.polynomial().fmt(f)
    }
}

/// `sum_k a_k(z) y^k` with exact coefficients, indexed by the power of `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariatePolynomial {
    coeffs: Vec<ExactPolynomial>,
}

impl BivariatePolynomial {
    pub fn new(mut coeffs: Vec<ExactPolynomial>) -> Self {
        while coeffs.last().is_some_and(ExactPolynomial::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[ExactPolynomial] {
        &self.coeffs
    }

    pub fn y_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&ExactPolynomial> {
        self.coeffs.last()
    }

    pub fn derivative_y(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a.scale(&Rational::from(k)))
                .collect(),
        )
    }

    pub fn derivative_z(&self) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.differentiate(1)).collect())
    }

    /// The univariate polynomial in `y` at a fixed `z`.
    pub fn at_z(&self, z: &Complex) -> Vec<Complex> {
        let prec = z.prec().0;
        self.coeffs
            .iter()
            .map(|a| {
                let mut acc = Complex::new(prec);
                for c in a.coeffs().iter().rev() {
                    acc *= z;
                    acc += c;
                }
                acc
            })
            .collect()
    }

    pub fn at_rational_z(&self, z: &Rational) -> ExactPolynomial {
        ExactPolynomial::new(self.coeffs.iter().map(|a| a.evaluate_rational(z)).collect())
    }

    pub fn evaluate(&self, z: &Complex, y: &Complex) -> Complex {
        horner(&self.at_z(z), y)
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, a) in self.coeffs.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let ypart = match k {
                0 => String::new(),
                1 => "y".to_string(),
                _ => format!("y^{k}"),
            };
            let monomial = a.coeffs().iter().filter(|c| **c != 0).count() == 1;
            let mut coeff = a.to_string();
            let negative = monomial && coeff.starts_with('-');
            if negative {
                coeff.remove(0);
            }
            let body = match (ypart.is_empty(), coeff.as_str()) {
                (true, _) => coeff.clone(),
                (false, "1") => ypart,
                (false, _) if monomial => format!("{coeff}*{ypart}"),
                (false, _) => format!("({coeff})*{ypart}"),
            };
            let sep = match (first, negative) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            write!(f, "{sep}{body}")?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn horner(coeffs: &[Complex], y: &Complex) -> Complex {
    let prec = y.prec().0;
    let mut acc = Complex::new(prec);
    for c in coeffs.iter().rev() {
        acc *= y;
        acc += c;
    }
    acc
}

/// `det` of the Sylvester matrix of `f` and `g` in `y`, as a polynomial in
/// `z`, by fraction-free Bareiss elimination: every division is exact.
pub fn resultant_y(f: &BivariatePolynomial, g: &BivariatePolynomial) -> ExactPolynomial {
    let (Some(m), Some(n)) = (f.y_degree(), g.y_degree()) else {
        return ExactPolynomial::zero();
    };
    let size = m + n;
    if size == 0 {
        return ExactPolynomial::one();
    }
    let mut mat = vec![vec![ExactPolynomial::zero(); size]; size];
    for i in 0..n {
        for (k, a) in f.coeffs().iter().rev().enumerate() {
            mat[i][i + k] = a.clone();
        }
    }
    for i in 0..m {
        for (k, b) in g.coeffs().iter().rev().enumerate() {
            mat[n + i][i + k] = b.clone();
        }
    }
    bareiss_determinant(mat)
}

fn bareiss_determinant(mut mat: Vec<Vec<ExactPolynomial>>) -> ExactPolynomial {
    let size = mat.len();
    let mut negate = false;
    let mut prev = ExactPolynomial::one();
    for k in 0..size - 1 {
        if mat[k][k].is_zero() {
            let Some(pivot) = (k + 1..size).find(|&i| !mat[i][k].is_zero()) else {
                return ExactPolynomial::zero();
            };
            mat.swap(k, pivot);
            negate = !negate;
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &(&mat[k][k] * &mat[i][j]) - &(&mat[i][k] * &mat[k][j]);
                let (q, r) = num.div_rem(&prev).expect("pivots are nonzero");
                debug_assert!(r.is_zero(), "Bareiss division is exact");
                mat[i][j] = q;
            }
            mat[i][k] = ExactPolynomial::zero();
        }
        prev = mat[k][k].clone();
    }
    let det = mat[size - 1][size - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

#[derive(Clone, Debug)]
pub struct DiscriminantLocus {
    /// `Res_y(F, F_y)` exactly.
    pub resultant: ExactPolynomial,
    /// Branch points: roots of the resultant away from the zeros of the
    /// leading `y`-coefficient.
    pub points: Vec<ComplexApprox>,
    /// Zeros of the leading `y`-coefficient, kept apart from `points`.
    pub degeneration: Vec<ComplexApprox>,
}

impl DiscriminantLocus {
    fn all_points(&self) -> impl Iterator<Item = &ComplexApprox> {
        self.points.iter().chain(&self.degeneration)
    }

    /// Distance from `z` to the nearest point of either list.
    pub fn distance(&self, z: &Complex) -> Option<f64> {
        let z = ComplexApprox::from_complex(z.clone());
        self.all_points()
            .map(|p| (p - &z).abs().to_f64())
            .min_by(f64::total_cmp)
    }

    pub fn max_modulus(&self) -> f64 {
        self.all_points()
            .map(|p| p.abs().to_f64())
            .fold(0.0, f64::max)
    }
}

pub fn discriminant_locus(curve: &CurveSpec) -> Result<DiscriminantLocus> {
    discriminant_locus_of(&curve.polynomial())
}

pub fn discriminant_locus_of(f: &BivariatePolynomial) -> Result<DiscriminantLocus> {
    if f.y_degree().unwrap_or(0) < 2 {
        return Err(Error::PreconditionViolation(
            "discriminant needs y-degree at least 2".into(),
        ));
    }
    let resultant = resultant_y(f, &f.derivative_y());
    if resultant.is_zero() {
        return Err(Error::PreconditionViolation(
            "resultant vanishes identically: the curve has a repeated factor".into(),
        ));
    }
    let lead = f.leading().expect("nonzero").clone();
    let mut core = resultant.squarefree_part();
    loop {
        let g = ExactPolynomial::gcd(&core, &lead);
        if g.degree().unwrap_or(0) == 0 {
            break;
        }
        core = core.div_rem(&g).expect("nonzero").0;
    }
    let opts = RootOptions::with_digits(LOCUS_DIGITS);
    let roots_of = |p: &ExactPolynomial| -> Result<Vec<ComplexApprox>> {
        if p.degree().unwrap_or(0) == 0 {
            Ok(Vec::new())
        } else {
            Ok(find_roots_with(p, &opts)?.roots)
        }
    };
    Ok(DiscriminantLocus {
        points: roots_of(&core)?,
        degeneration: roots_of(&lead.squarefree_part())?,
        resultant,
    })
}

#[derive(Clone, Debug)]
pub struct BranchValue {
    pub z: ComplexApprox,
    pub y: ComplexApprox,
    /// `|F(z, y)|`.
    pub residual: Float,
    /// `sum_k |a_k(z)| |y|^k`, the size of the terms that cancel.
    pub scale: Float,
}

/// Continues the branch `y ~ 1/z` from infinity along straight segments.
#[derive(Clone, Debug)]
pub struct BranchTracker {
    f: BivariatePolynomial,
    fy: BivariatePolynomial,
    fz: BivariatePolynomial,
    locus: DiscriminantLocus,
    start_radius: f64,
}

impl BranchTracker {
    pub fn new(curve: &CurveSpec) -> Result<Self> {
        let f = curve.polynomial();
        let locus = discriminant_locus_of(&f)?;
        Ok(Self::with_locus(f, locus))
    }

    fn with_locus(f: BivariatePolynomial, locus: DiscriminantLocus) -> Self {
        let start_radius = 10.0 * (1.0 + locus.max_modulus());
        Self {
            fy: f.derivative_y(),
            fz: f.derivative_z(),
            f,
            locus,
            start_radius,
        }
    }

    pub fn locus(&self) -> &DiscriminantLocus {
        &self.locus
    }

    /// Continues along the ray from `R z/|z|` to `z`, with `R` beyond every
    /// locus point.
    pub fn branch_at(&self, z: &ComplexApprox) -> Result<BranchValue> {
        self.branch_along(std::slice::from_ref(z))
    }

    /// Enters from infinity on the ray through the first waypoint, then
    /// follows the polyline through the remaining waypoints.
    pub fn branch_along(&self, waypoints: &[ComplexApprox]) -> Result<BranchValue> {
        let prec = BRANCH_PRECISION;
        let Some(first) = waypoints.first() else {
            return Err(Error::PreconditionViolation("empty path".into()));
        };
        let target = Complex::with_val(prec, waypoints.last().expect("nonempty").as_complex());
        if let Some(dist) = self.locus.distance(&target) {
            if dist <= LOCUS_EXCLUSION {
                return Err(Error::NearDiscriminant { distance: dist });
            }
        }
        let first = Complex::with_val(prec, first.as_complex());
        let modulus = Float::with_val(prec, first.abs_ref());
        if modulus.is_zero() {
            return Err(Error::PreconditionViolation("path starts at the origin".into()));
        }
        let start = if modulus.to_f64() >= self.start_radius {
            first.clone()
        } else {
            Complex::with_val(prec, &first * (Float::with_val(prec, self.start_radius) / &modulus))
        };
        let seed = Complex::with_val(prec, start.recip_ref());
        let mut y = self
            .newton(&start, seed.clone(), &seed)
            .ok_or(Error::ContinuationStall { t: 0.0 })?;

        let mut from = start;
        let mut path: Vec<Complex> = vec![first];
        path.extend(
            waypoints[1..]
                .iter()
                .map(|w| Complex::with_val(prec, w.as_complex())),
        );
        for to in path {
            y = self.segment(&from, &to, y)?;
            from = to;
        }
        let (residual, scale) = self.residual(&from, &y);
        Ok(BranchValue {
            z: ComplexApprox::from_complex(from),
            y: ComplexApprox::from_complex(y),
            residual,
            scale,
        })
    }

    fn segment(&self, from: &Complex, to: &Complex, mut y: Complex) -> Result<Complex> {
        let prec = BRANCH_PRECISION;
        let delta = Complex::with_val(prec, to - from);
        if delta.is_zero() {
            return Ok(y);
        }
        let max_step = 1.0 / f64::from(INITIAL_SEGMENTS);
        let min_step = 2f64.powi(MIN_STEP_LOG2);
        let mut t = 0.0f64;
        let mut h = max_step;
        while t < 1.0 {
            h = h.min(1.0 - t);
            let z_cur = Complex::with_val(prec, from + Complex::with_val(prec, &delta * t));
            let z_next = if t + h >= 1.0 {
                to.clone()
            } else {
                Complex::with_val(prec, from + Complex::with_val(prec, &delta * (t + h)))
            };
            // tangent predictor dy/dz = -F_z / F_y
            let fz = self.fz.evaluate(&z_cur, &y);
            let fy = self.fy.evaluate(&z_cur, &y);
            let slope = -Complex::with_val(prec, &fz / &fy);
            let dz = Complex::with_val(prec, &z_next - &z_cur);
            let pred = Complex::with_val(prec, &y + slope * dz);
            let corrected = if pred.real().is_finite() && pred.imag().is_finite() {
                self.newton(&z_next, pred.clone(), &pred)
            } else {
                None
            };
            match corrected {
                Some(next) => {
                    y = next;
                    t += h;
                    h = (2.0 * h).min(max_step);
                }
                None => {
                    h /= 2.0;
                    if h < min_step {
                        return Err(Error::ContinuationStall { t });
                    }
                }
            }
        }
        Ok(y)
    }

    /// Newton on `F(z, .)` from `y`; `None` when it leaves the basin of the
    /// predicted value or fails to settle.
    fn newton(&self, z: &Complex, mut y: Complex, anchor: &Complex) -> Option<Complex> {
        let prec = BRANCH_PRECISION;
        let f = self.f.at_z(z);
        let fy = self.fy.at_z(z);
        let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 16));
        let anchor_size = Float::with_val(prec, anchor.abs_ref());
        let mut step = Complex::new(prec);
        let mut size = Float::new(prec);
        for _ in 0..NEWTON_MAX_ITER {
            let v = horner(&f, &y);
            let d = horner(&fy, &y);
            if d.is_zero() {
                return None;
            }
            step.assign(&v / &d);
            y -= &step;
            size.assign(step.abs_ref());
            let drift = Float::with_val(prec, Complex::with_val(prec, &y - anchor).abs_ref());
            if !drift.is_finite() || drift > Float::with_val(prec, &anchor_size * 0.25) {
                return None;
            }
            let y_abs = Float::with_val(prec, y.abs_ref());
            if size <= Float::with_val(prec, &tol * (y_abs + 1u32)) {
                return Some(y);
            }
        }
        None
    }

    fn residual(&self, z: &Complex, y: &Complex) -> (Float, Float) {
        let prec = BRANCH_PRECISION;
        let coeffs = self.f.at_z(z);
        let value = horner(&coeffs, y);
        let y_abs = Float::with_val(prec, y.abs_ref());
        let mut scale = Float::new(prec);
        for a in coeffs.iter().rev() {
            scale *= &y_abs;
            scale += Float::with_val(prec, a.abs_ref());
        }
        (Float::with_val(prec, value.abs_ref()), scale)
    }

    /// All roots of `F(z, .)` at a fixed `z`.
    pub fn y_roots(&self, z: &ComplexApprox) -> Result<Vec<ComplexApprox>> {
        let z = Complex::with_val(BRANCH_PRECISION, z.as_complex());
        let coeffs = self
            .f
            .at_z(&z)
            .into_iter()
            .map(ComplexApprox::from_complex)
            .collect();
        Ok(find_roots_approx(&ApproxPolynomial::new(coeffs), &RootOptions::default())?.roots)
    }

    pub fn polynomial(&self) -> &BivariatePolynomial {
        &self.f
    }
}

/// Branch value for a one-off query; builds the locus each time.
pub fn branch_at(curve: &CurveSpec, z: &ComplexApprox) -> Result<BranchValue> {
    BranchTracker::new(curve)?.branch_at(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::fleet::*;

    fn bi(rows: &[&[i64]]) -> BivariatePolynomial {
        BivariatePolynomial::new(rows.iter().map(|r| ExactPolynomial::from_integers(r)).collect())
    }

    fn c(prec: u32, re: f64, im: f64) -> ComplexApprox {
        ComplexApprox::new(prec, re, im)
    }

    /// Sylvester determinant at a rational `z` by plain Gaussian
    /// elimination over the rationals.
    fn sylvester_at(f: &BivariatePolynomial, g: &BivariatePolynomial, z: &Rational) -> Rational {
        let fz = f.at_rational_z(z);
        let gz = g.at_rational_z(z);
        let (m, n) = (fz.degree().unwrap(), gz.degree().unwrap());
        let size = m + n;
        let mut mat = vec![vec![Rational::new(); size]; size];
        for i in 0..n {
            for (k, a) in fz.coeffs().iter().rev().enumerate() {
                mat[i][i + k] = a.clone();
            }
        }
        for i in 0..m {
            for (k, b) in gz.coeffs().iter().rev().enumerate() {
                mat[n + i][i + k] = b.clone();
            }
        }
        let mut det = Rational::from(1);
        for k in 0..size {
            let Some(p) = (k..size).find(|&i| mat[i][k] != 0) else {
                return Rational::new();
            };
            if p != k {
                mat.swap(p, k);
                det = -det;
            }
            det *= &mat[k][k];
            for i in k + 1..size {
                let factor = Rational::from(&mat[i][k] / &mat[k][k]);
                for j in k..size {
                    let t = Rational::from(&factor * &mat[k][j]);
                    mat[i][j] -= t;
                }
            }
        }
        det
    }

    #[test]
    fn curves_of_the_fleet() {
        let h = CurveSpec::from_operator(&hermite()).unwrap();
        assert_eq!(h.polynomial(), bi(&[&[-1], &[0, 1], &[1]]));
        assert_eq!(h.to_string(), "y^2 + z*y - 1");
        let c2 = CurveSpec::from_operator(&t2()).unwrap();
        assert_eq!(c2.polynomial(), bi(&[&[-1], &[], &[0, 0, 1], &[], &[], &[], &[], &[1]]));
        let c3 = CurveSpec::from_operator(&t3()).unwrap();
        assert_eq!(
            c3.polynomial(),
            bi(&[&[-1], &[], &[], &[0, 0, 0, 1], &[0, 0, 1], &[0, 1]])
        );
        assert_eq!(c3.jm(), 5);
        assert_eq!(c3.to_string(), "z*y^5 + z^2*y^4 + z^3*y^3 - 1");
        assert_eq!(
            bi(&[&[1, 2], &[], &[-1, 1]]).to_string(),
            "(z - 1)*y^2 + 2*z + 1"
        );
    }

    #[test]
    fn general_leading_coefficient() {
        // 2 z D + 3 D^2: F = 2 z y + 3 y^2 - 2
        let op = DifferentialOperator::from_integer_terms(&[(1, &[0, 2]), (2, &[3])]).unwrap();
        let curve = CurveSpec::from_operator(&op).unwrap();
        assert_eq!(curve.polynomial(), bi(&[&[-2], &[0, 2], &[3]]));
    }

    #[test]
    fn hermite_locus() {
        let curve = CurveSpec::from_operator(&hermite()).unwrap();
        let locus = discriminant_locus(&curve).unwrap();
        // Res = -(z^2 + 4)
        assert_eq!(locus.resultant, ExactPolynomial::from_integers(&[-4, 0, -1]));
        assert!(locus.degeneration.is_empty());
        let mut pts: Vec<_> = locus.points.iter().map(ComplexApprox::to_f64).collect();
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        assert!(pts[0].0.abs() < 1e-10 && (pts[0].1 + 2.0).abs() < 1e-10);
        assert!(pts[1].0.abs() < 1e-10 && (pts[1].1 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn constant_curve_has_empty_locus() {
        let locus = discriminant_locus_of(&bi(&[&[-1], &[], &[1]])).unwrap();
        assert!(locus.points.is_empty() && locus.degeneration.is_empty());
        assert_eq!(locus.resultant.degree(), Some(0));
    }

    #[test]
    fn repeated_factor_is_rejected() {
        // (y - z)^2
        let f = bi(&[&[0, 0, 1], &[0, -2], &[1]]);
        assert!(matches!(
            discriminant_locus_of(&f),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn resultant_matches_sylvester_oracle() {
        let curves = [
            CurveSpec::from_operator(&hermite()).unwrap().polynomial(),
            CurveSpec::from_operator(&t2()).unwrap().polynomial(),
            CurveSpec::from_operator(&t3()).unwrap().polynomial(),
            bi(&[&[1, 2], &[0, 0, -3], &[5, 1], &[0, 1]]),
        ];
        for f in &curves {
            let fy = f.derivative_y();
            let res = resultant_y(f, &fy);
            for z in [(3, 2), (-7, 5), (1, 1), (11, 3)] {
                let z = Rational::from(z);
                assert_eq!(res.evaluate_rational(&z), sylvester_at(f, &fy, &z), "{f} at {z}");
            }
        }
    }

    #[test]
    fn t2_locus_is_quasi_homogeneous() {
        let curve = CurveSpec::from_operator(&t2()).unwrap();
        let locus = discriminant_locus(&curve).unwrap();
        assert_eq!(locus.degeneration.len(), 0);
        assert_eq!(locus.points.len(), 14);
        assert!(locus.points.len() <= locus.resultant.degree().unwrap());
        // F(w z, w^{-2/5}... ) symmetry: the point set is invariant under
        // multiplication by exp(i pi / 7)
        let rot = c(128, (std::f64::consts::PI / 7.0).cos(), (std::f64::consts::PI / 7.0).sin());
        for p in &locus.points {
            let q = p * &rot;
            let nearest = locus
                .points
                .iter()
                .map(|s| (s - &q).abs().to_f64())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-10);
        }
        let modulus = locus.points[0].abs().to_f64();
        // |z|^7 = (7/2)(7/5)^{5/2}
        let expected = (3.5f64 * 1.4f64.powf(2.5)).powf(1.0 / 7.0);
        assert!((modulus - expected).abs() < 1e-10);
    }

    #[test]
    fn t3_reports_degeneration_at_origin() {
        let curve = CurveSpec::from_operator(&t3()).unwrap();
        let locus = discriminant_locus(&curve).unwrap();
        assert_eq!(locus.degeneration.len(), 1);
        assert!(locus.degeneration[0].abs().to_f64() < 1e-15);
        assert!(locus.points.iter().all(|p| p.abs().to_f64() > 1e-6));
    }

    #[test]
    fn hermite_branch_closed_form() {
        let curve = CurveSpec::from_operator(&hermite()).unwrap();
        let tracker = BranchTracker::new(&curve).unwrap();
        let b = tracker.branch_at(&c(128, 3.0, 0.0)).unwrap();
        let expected = (-3.0 + 13f64.sqrt()) / 2.0;
        let (re, im) = b.y.to_f64();
        assert!((re - expected).abs() < 1e-14 && im.abs() < 1e-14);
        assert!(b.residual.to_f64() <= 1e-10 * (1.0 + b.scale.to_f64()));

        let far = tracker.branch_at(&c(128, 1e4, 0.0)).unwrap();
        let zy = &far.z * &far.y;
        assert!((zy.to_c64() - 1.0).norm() <= 1e-3);
        // inside the support segment's complement, off the real axis
        let b = tracker.branch_at(&c(128, 0.5, 0.5)).unwrap();
        let z = b.z.to_c64();
        let y = b.y.to_c64();
        let exact = (-z + (z * z + 4.0).sqrt()) / 2.0;
        let other = (-z - (z * z + 4.0).sqrt()) / 2.0;
        // pick whichever sign of the square root is continuous from infinity
        let d = (y - exact).norm().min((y - other).norm());
        assert!(d < 1e-12);
    }

    #[test]
    fn t2_branch_far_out() {
        let curve = CurveSpec::from_operator(&t2()).unwrap();
        let b = branch_at(&curve, &c(128, 1e4, 0.0)).unwrap();
        let zy = (&b.z * &b.y).to_c64();
        assert!((zy - 1.0).norm() < 1e-3);
        assert!((b.y.to_f64().0 - 1e-4).abs() < 1e-6);
    }

    #[test]
    fn near_locus_is_refused() {
        let curve = CurveSpec::from_operator(&hermite()).unwrap();
        let err = branch_at(&curve, &c(128, 0.0, 2.0 + 1e-8)).unwrap_err();
        assert!(matches!(err, Error::NearDiscriminant { .. }));
    }

    #[test]
    fn branch_residual_and_detours() {
        use rand::{Rng, SeedableRng};
        for op in [hermite(), t2(), t3()] {
            let curve = CurveSpec::from_operator(&op).unwrap();
            let tracker = BranchTracker::new(&curve).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            let mut checked = 0;
            while checked < 100 {
                let r: f64 = rng.random_range(5.0..1e3);
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let z = c(128, r * theta.cos(), r * theta.sin());
                let b = tracker.branch_at(&z).unwrap();
                assert!(b.residual.to_f64() <= 1e-10 * (1.0 + b.scale.to_f64()));
                checked += 1;
                if checked % 10 == 0 {
                    // two-segment detour: out along a rotated ray, then across;
                    // both endpoints lie outside every locus point by a wide margin
                    let rot = theta + 0.3;
                    let via = c(128, 1.5 * r * rot.cos(), 1.5 * r * rot.sin());
                    let d = tracker.branch_along(&[via, z.clone()]).unwrap();
                    assert!((&d.y - &b.y).abs().to_f64() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn y_roots_satisfy_vieta() {
        for op in [hermite(), t2(), t3()] {
            let curve = CurveSpec::from_operator(&op).unwrap();
            let tracker = BranchTracker::new(&curve).unwrap();
            for (re, im) in [(3.0, 0.0), (2.0, 2.0), (-1.0, -3.0)] {
                let z = c(128, re, im);
                let roots = tracker.y_roots(&z).unwrap();
                let coeffs = tracker.polynomial().at_z(z.as_complex());
                let m = coeffs.len() - 1;
                assert_eq!(roots.len(), m);
                let sum = roots.iter().fold(c(128, 0.0, 0.0), |a, r| &a + r);
                let expected = -Complex::with_val(128, &coeffs[m - 1] / &coeffs[m]);
                let err = (&sum - &ComplexApprox::from_complex(expected)).abs().to_f64();
                assert!(err < 1e-12, "{err}");
                // the branch is one of them
                let b = tracker.branch_at(&z).unwrap();
                assert!(roots.iter().any(|r| (r - &b.y).abs().to_f64() < 1e-12));
            }
        }
    }
}
