//! Sweeps over the degree `n`: largest root modulus `r_n`, the ratio
//! `r_n / n^d`, root measures rescaled by `n^d`, their Cauchy transforms,
//! and how well those satisfy the limiting curve equation.

use rug::{Complex, Float, Integer, Rational};

use crate::curve::CurveSpec;
use crate::eigen::eigenpolynomial;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::operator::DifferentialOperator;
use crate::poly::ComplexApprox;
use crate::roots::{find_roots_with, RootOptions};

/// Precision floor for `n^d`.
const POWER_PRECISION: u32 = 128;
/// Relative distance below which a Cauchy transform point counts as an atom.
const POLE_TOLERANCE: f64 = 1e-9;
/// Sample points must lie outside the atoms' convex hull scaled by this
/// factor about its centroid.
const HULL_INFLATION: f64 = 1.2;

/// Default evaluation points for the curve residual, as `(re, im)`.
pub const DEFAULT_RESIDUAL_POINTS: [(f64, f64); 3] = [(3.0, 0.0), (2.0, 2.0), (-1.0, -3.0)];

#[derive(Clone, Debug, PartialEq)]
pub enum ScalingOutcome {
    Measured {
        r: Float,
        /// `r / n^d`.
        ratio: Float,
        precision_used: u32,
    },
    /// `lambda_m == lambda_n`; no eigenpolynomial to measure.
    Collision { m: usize },
    /// The root finder gave up; the sweep carries on.
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRecord {
    pub n: usize,
    pub outcome: ScalingOutcome,
}

impl ScalingRecord {
    pub fn is_collision(&self) -> bool {
        matches!(self.outcome, ScalingOutcome::Collision { .. })
    }

    pub fn r(&self) -> Option<&Float> {
        match &self.outcome {
            ScalingOutcome::Measured { r, .. } => Some(r),
            _ => None,
        }
    }

    pub fn ratio(&self) -> Option<&Float> {
        match &self.outcome {
            ScalingOutcome::Measured { ratio, .. } => Some(ratio),
            _ => None,
        }
    }

    pub fn precision_used(&self) -> Option<u32> {
        match &self.outcome {
            ScalingOutcome::Measured { precision_used, .. } => Some(*precision_used),
            _ => None,
        }
    }
}

/// `n^d` for a rational exponent `d = p/q >= 0`, as `(n^p)^{1/q}`.
pub fn n_pow_d(n: usize, d: &Rational, prec: u32) -> Float {
    let prec = prec.max(POWER_PRECISION);
    let (p, q) = (d.numer(), d.denom());
    let p = p.to_u32().expect("exponent numerator fits u32");
    let q = q.to_u32().expect("exponent denominator fits u32");
    let base = Integer::from(Integer::u_pow_u(n as u32, p));
    Float::with_val(prec, base).root(q)
}

fn measure_one(op: &DifferentialOperator, d: &Rational, n: usize, opts: &RootOptions) -> ScalingRecord {
    let outcome = match eigenpolynomial(op, n) {
        Err(Error::SpectralCollision { m, .. }) => ScalingOutcome::Collision { m },
        Err(e) => ScalingOutcome::Failed {
            reason: e.to_string(),
        },
        Ok(pair) => match find_roots_with(&pair.p, opts) {
            Ok(rs) => {
                let scale = n_pow_d(n, d, rs.precision_used);
                let ratio = Float::with_val(rs.r.prec(), &rs.r / &scale);
                ScalingOutcome::Measured {
                    r: rs.r,
                    ratio,
                    precision_used: rs.precision_used,
                }
            }
            Err(e) => ScalingOutcome::Failed {
                reason: e.to_string(),
            },
        },
    };
    ScalingRecord { n, outcome }
}

/// One record per `n` in `n_from..=n_to` by `step`, in increasing `n`.
pub fn scan(
    op: &DifferentialOperator,
    n_from: usize,
    n_to: usize,
    step: usize,
    opts: &RootOptions,
    exec: Execution,
) -> Result<Vec<ScalingRecord>> {
    let deg = op.degeneracy()?;
    if n_from < 1 || n_from > n_to || step == 0 {
        return Err(Error::PreconditionViolation(format!(
            "need 1 <= n_from <= n_to and step >= 1, got {n_from}..{n_to} step {step}"
        )));
    }
    let ns: Vec<usize> = (n_from..=n_to).step_by(step).collect();
    Ok(exec::map(exec, &ns, |&n| measure_one(op, &deg.d, n, opts)))
}

/// The root measure of `p_n` pushed forward by `z -> z / n^d`; every atom
/// has mass `1/n`.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    pub n: usize,
    pub atoms: Vec<ComplexApprox>,
}

impl EmpiricalMeasure {
    pub fn mass(&self) -> Rational {
        Rational::from((1, self.n as u64))
    }

    pub fn total_mass(&self) -> Rational {
        self.mass() * Rational::from(self.atoms.len())
    }

    pub fn max_modulus(&self) -> f64 {
        self.atoms.iter().map(|a| a.abs().to_f64()).fold(0.0, f64::max)
    }
}

pub fn scaled_measure(
    op: &DifferentialOperator,
    n: usize,
    opts: &RootOptions,
) -> Result<EmpiricalMeasure> {
    let deg = op.degeneracy()?;
    let pair = eigenpolynomial(op, n)?;
    let rs = find_roots_with(&pair.p, opts)?;
    let scale = n_pow_d(n, &deg.d, rs.precision_used);
    let atoms = rs
        .roots
        .into_iter()
        .map(|r| {
            let prec = r.precision();
            ComplexApprox::from_complex(Complex::with_val(prec, r.as_complex() / &scale))
        })
        .collect();
    Ok(EmpiricalMeasure { n, atoms })
}

/// `(1/n) sum 1 / (z - atom)`.
pub fn empirical_cauchy(m: &EmpiricalMeasure, z: &ComplexApprox) -> Result<ComplexApprox> {
    let prec = m
        .atoms
        .iter()
        .map(ComplexApprox::precision)
        .min()
        .unwrap_or(z.precision())
        .min(z.precision());
    let z = Complex::with_val(prec, z.as_complex());
    let tol = POLE_TOLERANCE * (1.0 + Float::with_val(64, z.abs_ref()).to_f64());
    let mut sum = Complex::new(prec);
    for a in &m.atoms {
        let diff = Complex::with_val(prec, &z - a.as_complex());
        let dist = Float::with_val(prec, diff.abs_ref()).to_f64();
        if dist <= tol {
            return Err(Error::PoleProximity { distance: dist });
        }
        sum += diff.recip();
    }
    sum /= m.n as u32;
    Ok(ComplexApprox::from_complex(sum))
}

/// `|F(z, C_n(z))|` at each point, with `C_n` the Cauchy transform of the
/// scaled measure and `F` the limiting curve.
pub fn conjecture_residual(
    op: &DifferentialOperator,
    n: usize,
    points: &[ComplexApprox],
    opts: &RootOptions,
) -> Result<Vec<Float>> {
    let curve = CurveSpec::from_operator(op)?;
    let measure = scaled_measure(op, n, opts)?;
    curve_residual(&curve, &measure, points)
}

pub fn curve_residual(
    curve: &CurveSpec,
    measure: &EmpiricalMeasure,
    points: &[ComplexApprox],
) -> Result<Vec<Float>> {
    let hull = ConvexHull::new(&measure.atoms.iter().map(ComplexApprox::to_f64).collect::<Vec<_>>());
    let f = curve.polynomial();
    points
        .iter()
        .map(|z| {
            if hull.contains_inflated(z.to_f64(), HULL_INFLATION) {
                return Err(Error::PreconditionViolation(format!(
                    "sample point {z} is inside the inflated hull of the atoms"
                )));
            }
            let c = empirical_cauchy(measure, z)?;
            let prec = c.precision();
            let z = Complex::with_val(prec, z.as_complex());
            let v = f.evaluate(&z, c.as_complex());
            Ok(Float::with_val(prec, v.abs_ref()))
        })
        .collect()
}

/// Convex hull of planar points, counter-clockwise.
#[derive(Clone, Debug)]
struct ConvexHull {
    vertices: Vec<(f64, f64)>,
    centroid: (f64, f64),
}

impl ConvexHull {
    fn new(points: &[(f64, f64)]) -> Self {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup();
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        let mut vertices: Vec<(f64, f64)> = Vec::new();
        if pts.len() <= 2 {
            vertices = pts.clone();
        } else {
            for pass in 0..2 {
                let start = vertices.len();
                let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
                    Box::new(pts.iter())
                } else {
                    Box::new(pts.iter().rev())
                };
                for &p in iter {
                    while vertices.len() >= start + 2
                        && cross(vertices[vertices.len() - 2], vertices[vertices.len() - 1], p) <= 0.0
                    {
                        vertices.pop();
                    }
                    vertices.push(p);
                }
                vertices.pop();
            }
        }
        let k = vertices.len().max(1) as f64;
        let centroid = vertices
            .iter()
            .fold((0.0, 0.0), |acc, v| (acc.0 + v.0 / k, acc.1 + v.1 / k));
        Self { vertices, centroid }
    }

    /// Whether `p` lies in the hull scaled by `factor` about its vertex
    /// centroid. Degenerate hulls (a point or a segment) contain only the
    /// points on them, up to rounding.
    fn contains_inflated(&self, p: (f64, f64), factor: f64) -> bool {
        let c = self.centroid;
        let v: Vec<(f64, f64)> = self
            .vertices
            .iter()
            .map(|&(x, y)| (c.0 + factor * (x - c.0), c.1 + factor * (y - c.1)))
            .collect();
        let eps = 1e-12 * (1.0 + v.iter().map(|q| q.0.hypot(q.1)).fold(0.0, f64::max));
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        match v.len() {
            0 => false,
            1 => (p.0 - v[0].0).hypot(p.1 - v[0].1) <= eps,
            2 => {
                let (a, b) = (v[0], v[1]);
                let len = (b.0 - a.0).hypot(b.1 - a.1);
                let t = ((p.0 - a.0) * (b.0 - a.0) + (p.1 - a.1) * (b.1 - a.1)) / (len * len);
                cross(a, b, p).abs() <= eps * len && (-1e-12..=1.0 + 1e-12).contains(&t)
            }
            k => (0..k).all(|i| cross(v[i], v[(i + 1) % k], p) >= -eps),
        }
    }
}

/// `(c_hat, spread)`: median ratio over the measured records in the upper
/// half of the `n` range, and `(max - min) / median` over the same window.
pub fn estimate_c0(records: &[ScalingRecord]) -> Result<(Float, Float)> {
    let mut measured: Vec<(usize, &Float)> = records
        .iter()
        .filter_map(|r| r.ratio().map(|x| (r.n, x)))
        .collect();
    if measured.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: measured.len(),
        });
    }
    measured.sort_by_key(|(n, _)| *n);
    let window = measured.len().div_ceil(2);
    let mut ratios: Vec<Float> = measured[measured.len() - window..]
        .iter()
        .map(|(_, x)| (*x).clone())
        .collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    let prec = ratios.iter().map(Float::prec).min().expect("nonempty");
    let mid = ratios.len() / 2;
    let median = if ratios.len() % 2 == 1 {
        ratios[mid].clone()
    } else {
        Float::with_val(prec, &ratios[mid - 1] + &ratios[mid]) / 2u32
    };
    let spread = Float::with_val(prec, &ratios[ratios.len() - 1] - &ratios[0]) / &median;
    Ok((median, spread))
}

/// Extremes and median of the measured ratios with `n` in `lo..=hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSummary {
    pub count: usize,
    pub collisions: usize,
    pub failures: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

impl RatioSummary {
    pub fn over(records: &[ScalingRecord], lo: usize, hi: usize) -> Option<Self> {
        let window: Vec<&ScalingRecord> =
            records.iter().filter(|r| (lo..=hi).contains(&r.n)).collect();
        let mut ratios: Vec<f64> = window.iter().filter_map(|r| r.ratio()).map(Float::to_f64).collect();
        if ratios.is_empty() {
            return None;
        }
        ratios.sort_by(f64::total_cmp);
        let mid = ratios.len() / 2;
        let median = if ratios.len() % 2 == 1 {
            ratios[mid]
        } else {
            (ratios[mid - 1] + ratios[mid]) / 2.0
        };
        Some(Self {
            count: ratios.len(),
            collisions: window.iter().filter(|r| r.is_collision()).count(),
            failures: window
                .iter()
                .filter(|r| matches!(r.outcome, ScalingOutcome::Failed { .. }))
                .count(),
            min: ratios[0],
            max: ratios[ratios.len() - 1],
            median,
        })
    }

    /// `max / min`.
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}
