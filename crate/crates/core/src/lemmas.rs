//! Numerical checks of the max-norm inequalities for `p^{(j)} / p` on the
//! circle `|z| = 2A`, for monic `p` with every root in the disc `|z| <= A`.
//!
//! On that circle every root is at distance at least `A` from `z`, so
//! `p^{(j)}/p` is evaluated in double precision from the roots through the
//! power sums `g_m(z) = sum_i (z - a_i)^{-m}`:
//!
//! `R_j = sum_{m=0}^{j-1} C(j-1, m) R_{j-1-m} (-1)^m m! g_{m+1}`, `R_0 = 1`.
//!
//! [`ratio_by_expansion`] is the independent route through big-float
//! coefficients.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Rational};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::poly::{falling_factorial, ApproxPolynomial, ComplexApprox, ExactPolynomial};

pub const DEFAULT_MARGIN: f64 = 1.05;
pub const MIN_CIRCLE_SAMPLES: usize = 4096;
/// Per unit of degree.
pub const CIRCLE_SAMPLES_PER_DEGREE: usize = 64;
/// Lemma 2 needs a large disc.
pub const LEMMA2_MIN_RADIUS: f64 = 10.0;
const REFINED_PEAKS: usize = 8;
const GOLDEN_ITERATIONS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SampleKind {
    Uniform,
    AllEqual,
    Boundary,
    ConjugatePairs,
    Explicit,
}

/// A monic polynomial given by its roots, all inside `|z| <= radius_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscSample {
    pub n: usize,
    /// The disc radius `A >= 1`.
    pub radius_bound: f64,
    pub roots: Vec<Complex64>,
    pub seed: u64,
    pub kind: SampleKind,
}

impl DiscSample {
    /// Reproducible from `(n, a, seed)`. `seed % 25` selects a boundary
    /// case: 0 all roots equal, 1 roots on the circle `|z| = a`, 2 conjugate
    /// pairs; anything else draws roots uniformly from the disc.
    pub fn random(n: usize, a: f64, seed: u64) -> Self {
        assert!(n >= 2 && a >= 1.0, "need n >= 2 and A >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let in_disc = |rng: &mut ChaCha8Rng| {
            let r = a * rng.random::<f64>().sqrt();
            Complex64::from_polar(r, rng.random_range(0.0..TAU))
        };
        let (kind, roots) = match seed % 25 {
            0 => {
                let c = in_disc(&mut rng);
                (SampleKind::AllEqual, vec![c; n])
            }
            1 => (
                SampleKind::Boundary,
                (0..n)
                    .map(|_| Complex64::from_polar(a, rng.random_range(0.0..TAU)))
                    .collect(),
            ),
            2 => {
                let mut roots = Vec::with_capacity(n);
                for _ in 0..n / 2 {
                    let c = in_disc(&mut rng);
                    roots.push(c);
                    roots.push(c.conj());
                }
                if n % 2 == 1 {
                    roots.push(Complex64::new(rng.random_range(-a..=a), 0.0));
                }
                (SampleKind::ConjugatePairs, roots)
            }
            _ => (SampleKind::Uniform, (0..n).map(|_| in_disc(&mut rng)).collect()),
        };
        Self {
            n,
            radius_bound: a,
            roots,
            seed,
            kind,
        }
    }

    pub fn from_roots(roots: Vec<Complex64>, a: f64) -> Result<Self> {
        if roots.len() < 2 || a < 1.0 {
            return Err(Error::PreconditionViolation("need n >= 2 and A >= 1".into()));
        }
        if let Some(r) = roots.iter().find(|r| r.norm() > a) {
            return Err(Error::PreconditionViolation(format!("root {r} lies outside |z| <= {a}")));
        }
        Ok(Self {
            n: roots.len(),
            radius_bound: a,
            roots,
            seed: 0,
            kind: SampleKind::Explicit,
        })
    }

    /// `z^n` in the unit disc.
    pub fn power(n: usize) -> Self {
        Self::from_roots(vec![Complex64::new(0.0, 0.0); n], 1.0).expect("valid")
    }

    /// Roots and disc radius multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            roots: self.roots.iter().map(|r| r * t).collect(),
            radius_bound: self.radius_bound * t,
            ..self.clone()
        }
    }

    pub fn default_samples(&self) -> usize {
        MIN_CIRCLE_SAMPLES.max(CIRCLE_SAMPLES_PER_DEGREE * self.n)
    }
}

/// `[R_0, R_1, ..., R_jmax]` with `R_j = p^{(j)}(z) / p(z)`.
pub fn ratios_at(roots: &[Complex64], z: Complex64, jmax: usize) -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0); jmax + 1];
    for r in roots {
        let inv = (z - r).inv();
        let mut pw = inv;
        for gm in g.iter_mut().skip(1) {
            *gm += pw;
            pw *= inv;
        }
    }
    let mut ratios = Vec::with_capacity(jmax + 1);
    ratios.push(Complex64::new(1.0, 0.0));
    for j in 1..=jmax {
        if j > roots.len() {
            // derivatives beyond the degree vanish identically
            ratios.push(Complex64::new(0.0, 0.0));
            continue;
        }
        // C(j-1, m) (-1)^m m!, built incrementally
        let mut weight = 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..j {
            acc += ratios[j - 1 - m] * g[m + 1] * weight;
            weight *= -((j - 1 - m) as f64);
        }
        ratios.push(acc);
    }
    ratios
}

/// `p^{(j)}(z) / p(z)` through the expanded coefficients of `p` in big-float
/// arithmetic at `prec` bits.
pub fn ratio_by_expansion(sample: &DiscSample, j: usize, z: Complex64, prec: u32) -> Complex64 {
    let roots: Vec<ComplexApprox> = sample
        .roots
        .iter()
        .map(|r| ComplexApprox::new(prec, r.re, r.im))
        .collect();
    let p = ApproxPolynomial::from_roots(&roots);
    let base: Vec<Complex> = p.coeffs().iter().map(|c| c.as_complex().clone()).collect();
    let mut deriv = base.clone();
    for _ in 0..j {
        deriv = deriv
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| Complex::with_val(prec, c * k as u32))
            .collect();
    }
    let z = Complex::with_val(prec, (z.re, z.im));
    let eval = |coeffs: &[Complex]| {
        let mut acc = Complex::new(prec);
        for c in coeffs.iter().rev() {
            acc *= &z;
            acc += c;
        }
        acc
    };
    let v = Complex::with_val(prec, eval(&deriv) / eval(&base));
    Complex64::new(v.real().to_f64(), v.imag().to_f64())
}

/// Maximum of `f` on `|z| = radius`: `samples` equispaced points, then a
/// golden-section search in the two cells around each of the best few. The
/// result never exceeds the true maximum.
pub fn circle_max_by(radius: f64, samples: usize, f: impl Fn(Complex64) -> f64) -> f64 {
    let at = |theta: f64| f(Complex64::from_polar(radius, theta));
    let cell = TAU / samples as f64;
    let values: Vec<f64> = (0..samples).map(|k| at(cell * k as f64)).collect();
    let mut order: Vec<usize> = (0..samples).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut best = values[order[0]];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for &k in order.iter().take(REFINED_PEAKS) {
        let (mut lo, mut hi) = (cell * (k as f64 - 1.0), cell * (k as f64 + 1.0));
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (at(x1), at(x2));
        for _ in 0..GOLDEN_ITERATIONS {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = at(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = at(x2);
            }
        }
        best = best.max(f1).max(f2);
    }
    best
}

/// `max |p^{(j)} / p|` on `|z| = radius`; `samples` is raised to `64 n`
/// when smaller.
pub fn circle_max(sample: &DiscSample, j: usize, radius: f64, samples: usize) -> f64 {
    assert!(radius > sample.radius_bound, "circle must enclose the roots");
    let m = samples.max(CIRCLE_SAMPLES_PER_DEGREE * sample.n);
    circle_max_by(radius, m, |z| ratios_at(&sample.roots, z, j)[j].norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaId {
    /// `||p^{(j)}/p|| <= n(n-1)...(n-j+1) / A^j`
    Rhs,
    /// `||p'/p|| >= n / (3A)`
    LogDerivativeLower,
    /// `||p^{(j)}/p - (p'/p)^j|| <= C'_j n^{j-1} / A^j`
    RatioGap,
    /// `||(p^{(j)}/p)'|| <= j n^j / A^{j+1}`
    DerivativeOfRatio,
    /// Two-sided growth of `||Q p^{(j)}/p||` for discs of radius `s n^d`.
    Growth,
}

impl LemmaId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rhs => "rhs",
            Self::LogDerivativeLower => "logderiv_lower",
            Self::RatioGap => "ratio_gap",
            Self::DerivativeOfRatio => "derivative_of_ratio",
            Self::Growth => "lemma2",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Orientation {
    /// `lhs <= rhs`
    AtMost,
    /// `lhs >= rhs`
    AtLeast,
    /// `1/rhs <= lhs <= rhs`
    Within,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// A proven inequality failed: an implementation bug.
    InequalityViolated,
    /// The explicitly chosen constant of the growth check is too small.
    ConstantTooTight,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub n: usize,
    pub radius_bound: f64,
    pub j: usize,
    pub lhs: f64,
    /// Includes the sampling margin for upper bounds.
    pub rhs: f64,
    pub orientation: Orientation,
    pub holds: bool,
    pub sample_count: usize,
    pub seed: u64,
}

impl LemmaReport {
    fn new(
        lemma: LemmaId,
        sample: &DiscSample,
        j: usize,
        lhs: f64,
        rhs: f64,
        orientation: Orientation,
        sample_count: usize,
    ) -> Self {
        let holds = match orientation {
            Orientation::AtMost => lhs <= rhs,
            Orientation::AtLeast => lhs >= rhs,
            Orientation::Within => lhs <= rhs && lhs * rhs >= 1.0,
        };
        Self {
            lemma,
            n: sample.n,
            radius_bound: sample.radius_bound,
            j,
            lhs,
            rhs,
            orientation,
            holds,
            sample_count,
            seed: sample.seed,
        }
    }

    pub fn failure(&self) -> Option<FailureKind> {
        match (self.holds, self.lemma) {
            (true, _) => None,
            (false, LemmaId::Growth) => Some(FailureKind::ConstantTooTight),
            (false, _) => Some(FailureKind::InequalityViolated),
        }
    }
}

/// Shared settings for the circle estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    /// Multiplier on the right-hand side of upper bounds.
    pub margin: f64,
    /// Overrides `max(4096, 64 n)`; never below `64 n`.
    pub samples: Option<usize>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            samples: None,
        }
    }
}

impl CheckOptions {
    fn samples_for(&self, sample: &DiscSample) -> usize {
        self.samples
            .unwrap_or_else(|| sample.default_samples())
            .max(CIRCLE_SAMPLES_PER_DEGREE * sample.n)
    }
}

fn max_on_circle(
    sample: &DiscSample,
    opts: &CheckOptions,
    jmax: usize,
    f: impl Fn(Complex64, &[Complex64]) -> f64,
) -> (f64, usize) {
    let m = opts.samples_for(sample);
    let radius = 2.0 * sample.radius_bound;
    let v = circle_max_by(radius, m, |z| f(z, &ratios_at(&sample.roots, z, jmax)));
    (v, m)
}

fn falling(n: usize, j: usize) -> f64 {
    falling_factorial(n, j).to_f64()
}

pub fn check_rhs(sample: &DiscSample, j: usize, opts: &CheckOptions) -> LemmaReport {
    assert!(j >= 1);
    let (lhs, m) = max_on_circle(sample, opts, j, |_, r| r[j].norm());
    let rhs = falling(sample.n, j) / sample.radius_bound.powi(j as i32) * opts.margin;
    LemmaReport::new(LemmaId::Rhs, sample, j, lhs, rhs, Orientation::AtMost, m)
}

pub fn check_logderiv_lower(sample: &DiscSample, opts: &CheckOptions) -> LemmaReport {
    let (lhs, m) = max_on_circle(sample, opts, 1, |_, r| r[1].norm());
    let rhs = sample.n as f64 / (3.0 * sample.radius_bound);
    LemmaReport::new(LemmaId::LogDerivativeLower, sample, 1, lhs, rhs, Orientation::AtLeast, m)
}

/// The constant from the recursion `C'_{j+1} = j + C'_j`, `C'_1 = 0`.
pub fn ratio_gap_constant(j: usize) -> f64 {
    (j * j.saturating_sub(1) / 2) as f64
}

pub fn check_ratio_gap(sample: &DiscSample, j: usize, opts: &CheckOptions) -> LemmaReport {
    assert!(j >= 1);
    let (lhs, m) = max_on_circle(sample, opts, j, |_, r| {
        if j == 1 {
            0.0
        } else {
            (r[j] - r[1].powu(j as u32)).norm()
        }
    });
    let n = sample.n as f64;
    let rhs = ratio_gap_constant(j) * n.powi(j as i32 - 1) / sample.radius_bound.powi(j as i32)
        * opts.margin;
    LemmaReport::new(LemmaId::RatioGap, sample, j, lhs, rhs, Orientation::AtMost, m)
}

/// `(p^{(j)}/p)' = p^{(j+1)}/p - (p^{(j)}/p)(p'/p)`.
pub fn check_derivative_of_ratio(sample: &DiscSample, j: usize, opts: &CheckOptions) -> LemmaReport {
    assert!(j >= 1);
    let (lhs, m) = max_on_circle(sample, opts, j + 1, |_, r| (r[j + 1] - r[j] * r[1]).norm());
    let n = sample.n as f64;
    let rhs = j as f64 * n.powi(j as i32) / sample.radius_bound.powi(j as i32 + 1) * opts.margin;
    LemmaReport::new(LemmaId::DerivativeOfRatio, sample, j, lhs, rhs, Orientation::AtMost, m)
}

/// `K_j = 4^{deg Q + 1} (1 + sum |q_i|) 3^j n^j / (n (n-1) ... (n-j+1))`.
pub fn growth_constant(q: &ExactPolynomial, n: usize, j: usize) -> f64 {
    let deg = q.degree().unwrap_or(0) as i32;
    let l1: f64 = q.coeffs().iter().map(|c| c.to_f64().abs()).sum();
    4f64.powi(deg + 1) * (1.0 + l1) * 3f64.powi(j as i32) * (n as f64).powi(j as i32)
        / falling(n, j)
}

/// `rho = ||Q p^{(j)}/p|| / (n^{d (deg Q - j) + j} s^{deg Q - j})` must lie in
/// `[1/K_j, K_j]` for samples drawn in the disc of radius `A = s n^d`.
pub fn check_lemma2(
    q: &ExactPolynomial,
    sample: &DiscSample,
    s: f64,
    d: &Rational,
    j: usize,
    opts: &CheckOptions,
) -> Result<LemmaReport> {
    let deg = q
        .degree()
        .ok_or_else(|| Error::PreconditionViolation("Q must be nonzero".into()))?;
    if !(0.0 < s && s < 1.0) || *d <= 0 || j == 0 {
        return Err(Error::PreconditionViolation(
            "need 0 < s < 1, d > 0 and j >= 1".into(),
        ));
    }
    let n = sample.n as f64;
    let a = s * n.powf(d.to_f64());
    if (a - sample.radius_bound).abs() > 1e-9 * a {
        return Err(Error::PreconditionViolation(format!(
            "disc radius {} differs from s n^d = {a}",
            sample.radius_bound
        )));
    }
    if a < LEMMA2_MIN_RADIUS {
        return Err(Error::PreconditionViolation(format!(
            "disc radius s n^d = {a:.3} is below {LEMMA2_MIN_RADIUS}"
        )));
    }
    let qc: Vec<Complex64> = q.coeffs().iter().map(|c| Complex64::new(c.to_f64(), 0.0)).collect();
    let q_at = |z: Complex64| qc.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let (max, m) = max_on_circle(sample, opts, j, |z, r| (q_at(z) * r[j]).norm());
    let shift = deg as f64 - j as f64;
    let scale = n.powf(d.to_f64() * shift + j as f64) * s.powf(shift);
    let k = growth_constant(q, sample.n, j);
    Ok(LemmaReport::new(LemmaId::Growth, sample, j, max / scale, k, Orientation::Within, m))
}

/// The configuration grid of a fleet run.
#[derive(Clone, Debug, PartialEq)]
pub struct FleetConfig {
    pub degrees: Vec<usize>,
    pub radii: Vec<f64>,
    pub orders: Vec<usize>,
    pub seeds: u64,
    pub growth_degrees: Vec<usize>,
    /// `(s, d)` pairs; those giving `s n^d < 10` are skipped.
    pub growth_discs: Vec<(f64, Rational)>,
    pub growth_coefficients: Vec<ExactPolynomial>,
    pub options: CheckOptions,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            degrees: vec![10, 20, 40, 60],
            radii: vec![1.0, 2.0, 5.0, 20.0],
            orders: (1..=5).collect(),
            seeds: 100,
            growth_degrees: vec![20, 40, 60],
            growth_discs: vec![
                (0.5, Rational::from(1)),
                (0.9, Rational::from(1)),
                (0.9, Rational::from((5, 7))),
            ],
            growth_coefficients: vec![
                ExactPolynomial::one(),
                ExactPolynomial::x(),
                ExactPolynomial::from_integers(&[2, -1, 3]),
            ],
            options: CheckOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FleetOutcome {
    pub reports: Vec<LemmaReport>,
}

impl FleetOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &LemmaReport> {
        self.reports.iter().filter(|r| !r.holds)
    }

    pub fn all_hold(&self) -> bool {
        self.reports.iter().all(|r| r.holds)
    }

    pub fn count(&self, lemma: LemmaId) -> usize {
        self.reports.iter().filter(|r| r.lemma == lemma).count()
    }
}

enum Job {
    Bounds { n: usize, a: f64, seed: u64 },
    Growth { n: usize, s: f64, d: Rational, seed: u64 },
}

/// Every check over the grid, ordered by configuration and then seed.
pub fn run_fleet(cfg: &FleetConfig, exec: Execution) -> FleetOutcome {
    let mut jobs = Vec::new();
    for &n in &cfg.degrees {
        for &a in &cfg.radii {
            for seed in 0..cfg.seeds {
                jobs.push(Job::Bounds { n, a, seed });
            }
        }
    }
    for &n in &cfg.growth_degrees {
        for (s, d) in &cfg.growth_discs {
            if s * (n as f64).powf(d.to_f64()) < LEMMA2_MIN_RADIUS {
                continue;
            }
            for seed in 0..cfg.seeds {
                jobs.push(Job::Growth { n, s: *s, d: d.clone(), seed });
            }
        }
    }
    let opts = &cfg.options;
    let batches = exec::map(exec, &jobs, |job| match job {
        Job::Bounds { n, a, seed } => {
            let sample = DiscSample::random(*n, *a, *seed);
            let mut out = vec![check_logderiv_lower(&sample, opts)];
            for &j in &cfg.orders {
                out.push(check_rhs(&sample, j, opts));
                out.push(check_ratio_gap(&sample, j, opts));
                out.push(check_derivative_of_ratio(&sample, j, opts));
            }
            out
        }
        Job::Growth { n, s, d, seed } => {
            let a = s * (*n as f64).powf(d.to_f64());
            let sample = DiscSample::random(*n, a, *seed);
            let mut out = Vec::new();
            for q in &cfg.growth_coefficients {
                for &j in &cfg.orders {
                    out.push(check_lemma2(q, &sample, *s, d, j, opts).expect("grid is filtered"));
                }
            }
            out
        }
    });
    FleetOutcome {
        reports: batches.into_iter().flatten().collect(),
    }
}
