//! All complex roots of a polynomial by Aberth–Ehrlich simultaneous
//! iteration in big-float arithmetic, with precision doubling on failure.
//!
//! The contract is the certificate, not per-root error: on return the
//! relative backward residual is bounded and the first and last Vieta
//! relations hold at the requested number of digits.

use rug::ops::{CompleteRound, NegAssign, Pow};
use rug::{Assign, Complex, Float, Rational};

use crate::error::{Error, Result};
use crate::poly::{ApproxPolynomial, ComplexApprox, ExactPolynomial, MIN_PRECISION};

pub const DEFAULT_TARGET_DIGITS: u32 = 12;
pub const DEFAULT_PRECISION_CEILING: u32 = 8192;
/// Environment variable read by [`RootOptions::from_env`]: a global floor on
/// the working precision in bits.
pub const PRECISION_ENV: &str = "EIGENROOT_PRECISION_BITS";

/// Angular offset of the first initial point on each circle, in radians.
const START_ANGLE: f64 = 0.376;

#[derive(Clone, Debug, PartialEq)]
pub struct RootOptions {
    pub target_digits: u32,
    /// Overrides the default starting precision `max(256, 4n)`.
    pub initial_precision: Option<u32>,
    /// Lower bound applied to every working precision.
    pub precision_floor: u32,
    pub precision_ceiling: u32,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            target_digits: DEFAULT_TARGET_DIGITS,
            initial_precision: None,
            precision_floor: MIN_PRECISION,
            precision_ceiling: DEFAULT_PRECISION_CEILING,
        }
    }
}

impl RootOptions {
    pub fn with_digits(target_digits: u32) -> Self {
        Self {
            target_digits,
            ..Self::default()
        }
    }

    /// Defaults, with the precision floor taken from `EIGENROOT_PRECISION_BITS`
    /// when it is set to a positive integer.
    pub fn from_env() -> Self {
        let mut opts = Self::default();
        if let Some(bits) = std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
        {
            opts.precision_floor = bits.max(MIN_PRECISION);
        }
        opts
    }

    fn starting_precision(&self, degree: usize) -> u32 {
        let default = 256.max(4 * degree as u32);
        self.initial_precision
            .unwrap_or(default)
            .max(self.precision_floor)
            .max(MIN_PRECISION)
    }
}

#[derive(Clone, Debug)]
pub struct RootSet {
    pub n: usize,
    /// With multiplicity, in no particular order.
    pub roots: Vec<ComplexApprox>,
    /// `max_i |p(root_i)| / sum_k |c_k| |root_i|^k`.
    pub residual_bound: Float,
    pub precision_used: u32,
    /// Largest root modulus.
    pub r: Float,
}

pub fn max_modulus(rs: &RootSet) -> Float {
    let prec = rs
        .roots
        .iter()
        .map(ComplexApprox::precision)
        .min()
        .unwrap_or(MIN_PRECISION);
    rs.roots
        .iter()
        .map(ComplexApprox::abs)
        .fold(Float::with_val(prec, 0), |acc, a| if a > acc { a } else { acc })
}

/// Roots of an exact polynomial of degree at least one.
pub fn find_roots(p: &ExactPolynomial, target_digits: u32) -> Result<RootSet> {
    find_roots_with(p, &RootOptions::with_digits(target_digits))
}

pub fn find_roots_with(p: &ExactPolynomial, opts: &RootOptions) -> Result<RootSet> {
    let n = match p.degree() {
        Some(n) if n >= 1 => n,
        _ => {
            return Err(Error::PreconditionViolation(
                "root finding needs degree at least 1".into(),
            ))
        }
    };
    let monic = p.monic().expect("nonzero");
    // exact zero roots are split off; they would only slow the iteration
    let zeros = monic.coeffs().iter().take_while(|c| **c == 0).count();
    let reduced = ExactPolynomial::new(monic.coeffs()[zeros..].to_vec());
    let source = CoefficientSource::Exact(&reduced);
    let mut found = solve(&source, n, opts)?;
    if zeros > 0 {
        let prec = found.precision_used;
        found
            .roots
            .extend((0..zeros).map(|_| ComplexApprox::zero(prec)));
    }
    Ok(finish(found, n))
}

/// Roots of a polynomial with big-float coefficients; the leading
/// coefficient must be nonzero. Precision escalation cannot recover digits
/// the coefficients do not carry.
pub fn find_roots_approx(p: &ApproxPolynomial, opts: &RootOptions) -> Result<RootSet> {
    let n = p.degree();
    let lead = p.coeffs().last().filter(|c| !c.as_complex().is_zero());
    let (n, lead) = match (n, lead) {
        (n, Some(lead)) if n >= 1 => (n, lead),
        _ => {
            return Err(Error::PreconditionViolation(
                "root finding needs degree at least 1 and a nonzero leading coefficient".into(),
            ))
        }
    };
    let monic = ApproxPolynomial::new(p.coeffs().iter().map(|c| c / lead).collect());
    let found = solve(&CoefficientSource::Approx(&monic), n, opts)?;
    Ok(finish(found, n))
}

struct Found {
    roots: Vec<ComplexApprox>,
    residual_bound: Float,
    precision_used: u32,
}

fn finish(found: Found, n: usize) -> RootSet {
    let mut rs = RootSet {
        n,
        roots: found.roots,
        residual_bound: found.residual_bound,
        precision_used: found.precision_used,
        r: Float::new(MIN_PRECISION),
    };
    rs.r = max_modulus(&rs);
    rs
}

enum CoefficientSource<'a> {
    Exact(&'a ExactPolynomial),
    Approx(&'a ApproxPolynomial),
}

impl CoefficientSource<'_> {
    /// Monic coefficients, ascending, rounded to `prec`.
    fn at_precision(&self, prec: u32) -> Vec<Complex> {
        match self {
            Self::Exact(p) => p
                .coeffs()
                .iter()
                .map(|c| Complex::with_val(prec, (c, &Rational::new())))
                .collect(),
            Self::Approx(p) => p
                .coeffs()
                .iter()
                .map(|c| Complex::with_val(prec, c.as_complex()))
                .collect(),
        }
    }

    fn degree(&self) -> usize {
        match self {
            Self::Exact(p) => p.degree().unwrap_or(0),
            Self::Approx(p) => p.degree(),
        }
    }
}

fn solve(source: &CoefficientSource<'_>, full_degree: usize, opts: &RootOptions) -> Result<Found> {
    let degree = source.degree();
    let mut prec = opts.starting_precision(full_degree);
    if degree == 0 {
        return Ok(Found {
            roots: Vec::new(),
            residual_bound: Float::new(prec),
            precision_used: prec,
        });
    }
    let coeffs = source.at_precision(prec);
    let mut z = initial_points(&coeffs, prec);
    let tol = Float::with_val(prec, 10u32).pow(-(opts.target_digits as i32));

    loop {
        let coeffs = source.at_precision(prec);
        let converged = iterate(&coeffs, &mut z, &tol, max_iterations(degree));
        if converged {
            if let Some(residual_bound) = certify(&coeffs, &z, opts.target_digits) {
                return Ok(Found {
                    roots: z.into_iter().map(ComplexApprox::from_complex).collect(),
                    residual_bound,
                    precision_used: prec,
                });
            }
        }
        let next = prec.saturating_mul(2);
        if next > opts.precision_ceiling {
            return Err(Error::NoConvergence {
                degree: full_degree,
                precision: prec,
            });
        }
        prec = next;
        for zi in &mut z {
            let mut wider = Complex::new(prec);
            wider.assign(&*zi);
            *zi = wider;
        }
    }
}

fn max_iterations(degree: usize) -> usize {
    50 + 10 * degree
}

/// Starting points from the Newton polygon of the coefficient moduli: each
/// edge `(i, j)` of the upper convex hull of `(k, log|c_k|)` contributes
/// `j - i` points on a circle of radius `(|c_i| / |c_j|)^{1/(j-i)}`, which
/// is where that many roots typically sit. A single enclosing circle is
/// far too loose for eigenpolynomials and costs O(n) extra sweeps.
fn initial_points(coeffs: &[Complex], prec: u32) -> Vec<Complex> {
    let n = coeffs.len() - 1;
    let logs: Vec<Option<f64>> = coeffs
        .iter()
        .map(|c| {
            let a = Float::with_val(MIN_PRECISION, c.abs_ref());
            (!a.is_zero()).then(|| a.ln().to_f64())
        })
        .collect();
    let hull = upper_hull(&logs);
    let two_pi = std::f64::consts::TAU;
    let mut points = Vec::with_capacity(n);
    for (edge, w) in hull.windows(2).enumerate() {
        let (i, j) = (w[0], w[1]);
        let count = j - i;
        let log_radius = (logs[i].unwrap() - logs[j].unwrap()) / count as f64;
        let radius = Float::with_val(prec, log_radius).exp();
        let offset = START_ANGLE + edge as f64 * two_pi / (n as f64 + 1.0);
        for k in 0..count {
            let angle = Float::with_val(prec, two_pi * k as f64 / count as f64 + offset);
            let (s, c) = angle.sin_cos(Float::new(prec));
            points.push(Complex::with_val(prec, (c * &radius, s * &radius)));
        }
    }
    points
}

/// Indices of the upper convex hull of `(k, logs[k])` over nonzero entries,
/// always from the first to the last nonzero index.
fn upper_hull(logs: &[Option<f64>]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (k, v) in logs.iter().enumerate() {
        let Some(y) = *v else { continue };
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let (ya, yb) = (logs[a].unwrap(), logs[b].unwrap());
            // drop b if it lies on or below the chord a-k
            let cross = (b - a) as f64 * (y - ya) - (k - a) as f64 * (yb - ya);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Gauss–Seidel Aberth sweeps until every correction is below
/// `tol * (1 + |z_i|)`; converged roots are frozen.
fn iterate(coeffs: &[Complex], z: &mut [Complex], tol: &Float, max_iter: usize) -> bool {
    let n = z.len();
    let prec = coeffs[0].prec().0;
    let mut frozen = vec![false; n];
    let mut remaining = n;
    let mut pv = Complex::new(prec);
    let mut dpv = Complex::new(prec);
    let mut sum = Complex::new(prec);
    let mut t = Complex::new(prec);
    let mut w = Complex::new(prec);
    let mut mag = Float::new(prec);
    let mut bound = Float::new(prec);

    for _ in 0..max_iter {
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            horner(coeffs, &z[i], &mut pv, &mut dpv);
            if pv.is_zero() {
                frozen[i] = true;
                remaining -= 1;
                continue;
            }
            sum.assign(0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    t.assign(&z[i] - zj);
                    t.recip_mut();
                    sum += &t;
                }
            }
            if dpv.is_zero() {
                // flat spot: nudge outward rather than divide by zero
                w.assign(&z[i] * tol);
                w += tol;
            } else {
                // w = N / (1 - N S), N = p / p'
                pv /= &dpv;
                t.assign(&pv * &sum);
                t -= 1;
                t.neg_assign();
                w.assign(&pv / &t);
            }
            z[i] -= &w;
            if !z[i].real().is_finite() || !z[i].imag().is_finite() {
                return false;
            }
            mag.assign(w.abs_ref());
            bound.assign(z[i].abs_ref());
            bound += 1u32;
            bound *= tol;
            if mag <= bound {
                frozen[i] = true;
                remaining -= 1;
            }
        }
        if remaining == 0 {
            return true;
        }
    }
    false
}

fn horner(coeffs: &[Complex], z: &Complex, pv: &mut Complex, dpv: &mut Complex) {
    let n = coeffs.len() - 1;
    pv.assign(&coeffs[n]);
    dpv.assign(0);
    for c in coeffs[..n].iter().rev() {
        *dpv *= z;
        *dpv += &*pv;
        *pv *= z;
        *pv += c;
    }
}

/// Backward residual and Vieta checks; the residual bound on success.
fn certify(coeffs: &[Complex], z: &[Complex], target_digits: u32) -> Option<Float> {
    let n = z.len();
    let prec = coeffs[0].prec().0;
    let tol = Float::with_val(prec, 10u32).pow(-(target_digits as i32));
    let vieta_tol = Float::with_val(prec, 10u32).pow(2 - target_digits as i32);

    let abs_coeffs: Vec<Float> = coeffs
        .iter()
        .map(|c| Float::with_val(prec, c.abs_ref()))
        .collect();
    let mut residual_bound = Float::new(prec);
    let mut pv = Complex::new(prec);
    let mut dpv = Complex::new(prec);
    for zi in z {
        horner(coeffs, zi, &mut pv, &mut dpv);
        let r = Float::with_val(prec, zi.abs_ref());
        let mut scale = Float::new(prec);
        for a in abs_coeffs.iter().rev() {
            scale *= &r;
            scale += a;
        }
        let rel = Float::with_val(prec, pv.abs_ref()) / scale;
        if rel > residual_bound {
            residual_bound = rel;
        }
    }
    if residual_bound > tol {
        return None;
    }

    // sum of roots = -c_{n-1}
    let mut sum = Complex::with_val(prec, &coeffs[n - 1]);
    let mut abs_sum = Float::new(prec);
    for zi in z {
        sum += zi;
        abs_sum += Float::with_val(prec, zi.abs_ref());
    }
    let err = Float::with_val(prec, sum.abs_ref());
    if err > Float::with_val(prec, &abs_sum * &vieta_tol) {
        return None;
    }

    // product of roots = (-1)^n c_0
    let mut prod = Complex::with_val(prec, 1);
    let mut abs_prod = Float::with_val(prec, 1);
    for zi in z {
        prod *= zi;
        abs_prod *= Float::with_val(prec, zi.abs_ref());
    }
    let target = if n.is_multiple_of(2) {
        coeffs[0].clone()
    } else {
        Complex::with_val(prec, -&coeffs[0])
    };
    let err = Float::with_val(prec, (&prod - &target).complete((prec, prec)).abs_ref());
    let scale = Float::with_val(prec, target.abs_ref()).max(&abs_prod);
    if err > scale * &vieta_tol {
        return None;
    }
    Some(residual_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigenpolynomial;
    use crate::operator::fleet::*;

    fn sorted_f64(rs: &RootSet) -> Vec<(f64, f64)> {
        let mut v: Vec<_> = rs.roots.iter().map(ComplexApprox::to_f64).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn quadratic_roots() {
        let rs = find_roots(&ExactPolynomial::from_integers(&[1, 0, 1]), 12).unwrap();
        let v = sorted_f64(&rs);
        assert!((v[0].0).abs() < 1e-14 && (v[0].1 + 1.0).abs() < 1e-14);
        assert!((v[1].0).abs() < 1e-14 && (v[1].1 - 1.0).abs() < 1e-14);
        assert!((rs.r.to_f64() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cube_roots_of_unity() {
        let rs = find_roots(&ExactPolynomial::from_integers(&[-1, 0, 0, 1]), 12).unwrap();
        assert_eq!(rs.roots.len(), 3);
        for root in &rs.roots {
            let cube = &(root * root) * root;
            let (re, im) = cube.to_f64();
            assert!((re - 1.0).abs() < 1e-14 && im.abs() < 1e-14);
        }
        assert!((rs.r.to_f64() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_constants() {
        assert!(find_roots(&ExactPolynomial::from_integers(&[3]), 12).is_err());
        assert!(find_roots(&ExactPolynomial::zero(), 12).is_err());
    }

    #[test]
    fn exact_zero_roots_are_kept() {
        // z^3 (z - 2)
        let rs = find_roots(&ExactPolynomial::from_integers(&[0, 0, 0, -2, 1]), 12).unwrap();
        assert_eq!(rs.roots.len(), 4);
        assert_eq!(rs.roots.iter().filter(|r| r.abs().is_zero()).count(), 3);
        assert!((rs.r.to_f64() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn max_modulus_examples() {
        let set = |pts: &[(f64, f64)]| RootSet {
            n: pts.len(),
            roots: pts.iter().map(|&(a, b)| ComplexApprox::new(64, a, b)).collect(),
            residual_bound: Float::new(64),
            precision_used: 64,
            r: Float::new(64),
        };
        assert_eq!(max_modulus(&set(&[(0.0, 1.0), (0.0, -1.0)])).to_f64(), 1.0);
        assert_eq!(max_modulus(&set(&[(0.0, 0.0)])).to_f64(), 0.0);
        assert_eq!(max_modulus(&set(&[(3.0, 0.0), (0.0, -4.0)])).to_f64(), 4.0);
    }

    #[test]
    fn rotated_hermite_roots_are_imaginary_and_symmetric() {
        let pair = eigenpolynomial(&hermite(), 10).unwrap();
        let rs = find_roots(&pair.p, 12).unwrap();
        let mut ims: Vec<f64> = rs
            .roots
            .iter()
            .map(|r| {
                let (re, im) = r.to_f64();
                assert!(re.abs() < 1e-12, "root off the imaginary axis: {re}");
                im
            })
            .collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ims.iter().zip(ims.iter().rev()) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_coefficients() {
        // (z - i)(z - 2) = z^2 - (2 + i) z + 2i
        let p = ApproxPolynomial::new(vec![
            ComplexApprox::new(128, 0.0, 2.0),
            ComplexApprox::new(128, -2.0, -1.0),
            ComplexApprox::new(128, 1.0, 0.0),
        ]);
        let rs = find_roots_approx(&p, &RootOptions::default()).unwrap();
        let v = sorted_f64(&rs);
        assert!((v[0].0).abs() < 1e-14 && (v[0].1 - 1.0).abs() < 1e-14);
        assert!((v[1].0 - 2.0).abs() < 1e-14 && v[1].1.abs() < 1e-14);
    }

    #[test]
    fn fleet_round_trip_and_vieta() {
        for op in [hermite(), t1(), t2(), t3()] {
            for n in [12usize, 25, 40] {
                let pair = eigenpolynomial(&op, n).unwrap();
                let rs = find_roots(&pair.p, 12).unwrap();
                assert_eq!(rs.roots.len(), n);
                // expand back and compare, relative to the largest coefficient
                let back = ApproxPolynomial::from_roots(&rs.roots);
                let prec = back.precision();
                let scale = pair
                    .p
                    .coeffs()
                    .iter()
                    .map(|c| Float::with_val(prec, c).abs())
                    .fold(Float::new(prec), |a, b| if b > a { b } else { a });
                for (k, c) in pair.p.coeffs().iter().enumerate() {
                    let exact = ComplexApprox::from_rationals(c, &Rational::new(), prec);
                    let err = (&back.coeffs()[k] - &exact).abs() / &scale;
                    assert!(err.to_f64() <= 1e-6, "op coefficient {k} n={n} err={err}");
                }
                // real coefficients: conjugate-closed root set
                for root in &rs.roots {
                    let c = root.conj();
                    let nearest = rs
                        .roots
                        .iter()
                        .map(|s| (s - &c).abs().to_f64())
                        .fold(f64::INFINITY, f64::min);
                    assert!(nearest <= 1e-10 * (1.0 + root.abs().to_f64()));
                }
            }
        }
    }
}
