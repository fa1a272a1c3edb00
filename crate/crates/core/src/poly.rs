//! Dense univariate polynomials over exact rationals, and big-float complex
//! values to evaluate them at.
//!
//! Coefficients are stored in ascending powers of `z`. The zero polynomial is
//! the empty coefficient vector and has no degree: [`ExactPolynomial::degree`]
//! returns `None` for it, so every caller has to branch on it explicitly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Smallest working precision, in bits, that any [`ComplexApprox`] carries.
pub const MIN_PRECISION: u32 = 64;

/// `n (n-1) ... (n-j+1)`; zero when `j > n`, one when `j == 0`.
pub fn falling_factorial(n: usize, j: usize) -> Integer {
    if j > n {
        return Integer::ZERO;
    }
    let mut acc = Integer::from(1);
    for i in 0..j {
        acc *= (n - i) as u64;
    }
    acc
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExactPolynomial {
    coeffs: Vec<Rational>,
}

impl ExactPolynomial {
    /// Builds a polynomial from ascending coefficients, dropping trailing zeros.
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `c * z^k`
    pub fn monomial(c: Rational, k: usize) -> Self {
        if c == 0 {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::new(); k];
        coeffs.push(c);
        Self { coeffs }
    }

    pub fn x() -> Self {
        Self::monomial(Rational::from(1), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `z^i`, or `None` beyond the degree.
    pub fn coeff(&self, i: usize) -> Option<&Rational> {
        self.coeffs.get(i)
    }

    /// Coefficient of `z^i` as an owned value, zero beyond the degree.
    pub fn coeff_or_zero(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| *c == 1)
    }

    /// Divides through by the leading coefficient.
    pub fn monic(&self) -> Option<Self> {
        let lead = self.leading()?.clone();
        Some(self.scale(&lead.recip()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if *c == 0 {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|a| Rational::from(a * c)).collect(),
        }
    }

    /// Exact `j`-th derivative.
    pub fn differentiate(&self, j: usize) -> Self {
        if j == 0 {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(j)
            .map(|(i, c)| Rational::from(c * falling_factorial(i, j)))
            .collect();
        Self::new(coeffs)
    }

    /// Euclidean division over the rationals. `None` for a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> Option<(Self, Self)> {
        let dd = divisor.degree()?;
        let lead_inv = divisor.coeffs[dd].clone().recip();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return Some((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut quot = vec![Rational::new(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = Rational::from(&rem[k + dd] * &lead_inv);
            if q != 0 {
                for (i, dc) in divisor.coeffs.iter().enumerate() {
                    rem[k + i] -= Rational::from(&q * dc);
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        Some((Self::new(quot), Self::new(rem)))
    }

    /// Monic greatest common divisor; zero only when both inputs are zero.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic().unwrap_or_default()
    }

    /// Product of the distinct irreducible factors, made monic.
    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic().unwrap_or_default();
        }
        let g = Self::gcd(self, &self.differentiate(1));
        let (q, _) = self.div_rem(&g).expect("gcd of a nonzero polynomial is nonzero");
        q.monic().unwrap_or_default()
    }

    /// True when every nonzero term has exponent congruent to `parity` mod 2.
    pub fn has_parity(&self, parity: usize) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| *c == 0 || i % 2 == parity % 2)
    }

    pub fn evaluate_rational(&self, z: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// Exact evaluation at the Gaussian rational `re + i*im`.
    pub fn evaluate_gaussian(&self, re: &Rational, im: &Rational) -> (Rational, Rational) {
        let (mut ar, mut ai) = (Rational::new(), Rational::new());
        for c in self.coeffs.iter().rev() {
            let nr = Rational::from(&ar * re) - Rational::from(&ai * im) + c;
            let ni = Rational::from(&ar * im) + Rational::from(&ai * re);
            ar = nr;
            ai = ni;
        }
        (ar, ai)
    }

    /// Horner evaluation at `z`'s working precision.
    pub fn evaluate(&self, z: &ComplexApprox) -> Result<ComplexApprox> {
        let prec = z.precision();
        let mut acc = Complex::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= &z.0;
            acc += Float::with_val(prec, c);
        }
        ComplexApprox::checked(acc)
    }

    /// Rounds every coefficient to a complex big float of `prec` bits.
    pub fn to_approx(&self, prec: u32) -> ApproxPolynomial {
        ApproxPolynomial {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| ComplexApprox::from_rationals(c, &Rational::new(), prec))
                .collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::new();
        let coeffs = (0..len)
            .map(|i| {
                f(
                    self.coeffs.get(i).unwrap_or(&zero),
                    other.coeffs.get(i).unwrap_or(&zero),
                )
            })
            .collect();
        Self::new(coeffs)
    }
}

impl Add for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn add(self, rhs: Self) -> ExactPolynomial {
        self.zip_with(rhs, |a, b| Rational::from(a + b))
    }
}

impl Sub for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn sub(self, rhs: Self) -> ExactPolynomial {
        self.zip_with(rhs, |a, b| Rational::from(a - b))
    }
}

impl Mul for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn mul(self, rhs: Self) -> ExactPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ExactPolynomial::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        ExactPolynomial::new(out)
    }
}

impl Neg for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn neg(self) -> ExactPolynomial {
        ExactPolynomial {
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactPolynomial {
            type Output = ExactPolynomial;
            fn $m(self, rhs: Self) -> ExactPolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

/// Prints in descending powers, e.g. `3/2*z^2 - z + 1`. The output is valid
/// input for the polynomial part of the operator grammar.
impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let negative = *c < 0;
            let mag = Rational::from(c.abs_ref());
            match (first, negative) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            let zpart = match i {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{i}"),
            };
            if zpart.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                f.write_str(&zpart)?;
            } else {
                write!(f, "{mag}*{zpart}")?;
            }
        }
        Ok(())
    }
}

/// A complex number held as two big floats of a common precision.
///
/// Binary operations run at the smaller of the two operand precisions.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexApprox(Complex);

impl ComplexApprox {
    pub fn new(prec: u32, re: f64, im: f64) -> Self {
        Self(Complex::with_val(prec.max(MIN_PRECISION), (re, im)))
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(prec, 0.0, 0.0)
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        let prec = re.prec().min(im.prec()).max(MIN_PRECISION);
        Self(Complex::with_val(prec, (re, im)))
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: u32) -> Self {
        Self(Complex::with_val(prec.max(MIN_PRECISION), (re, im)))
    }

    pub fn from_complex(c: Complex) -> Self {
        let (pr, pi) = c.prec();
        let prec = pr.min(pi).max(MIN_PRECISION);
        if pr == prec && pi == prec {
            Self(c)
        } else {
            Self(Complex::with_val(prec, c))
        }
    }

    /// Wraps a computed value, mapping NaN or infinity to an escalation
    /// request.
    pub(crate) fn checked(c: Complex) -> Result<Self> {
        let v = Self::from_complex(c);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::PrecisionEscalation {
                precision: v.precision(),
            })
        }
    }

    pub fn precision(&self) -> u32 {
        let (a, b) = self.0.prec();
        a.min(b)
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Self(Complex::with_val(prec.max(MIN_PRECISION), &self.0))
    }

    pub fn re(&self) -> &Float {
        self.0.real()
    }

    pub fn im(&self) -> &Float {
        self.0.imag()
    }

    pub fn as_complex(&self) -> &Complex {
        &self.0
    }

    pub fn into_complex(self) -> Complex {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }

    /// Modulus at this value's precision.
    pub fn abs(&self) -> Float {
        Float::with_val(self.precision(), self.0.abs_ref())
    }

    pub fn conj(&self) -> Self {
        Self(Complex::with_val(self.precision(), self.0.conj_ref()))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re().to_f64(), self.im().to_f64())
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        let (re, im) = self.to_f64();
        num_complex::Complex64::new(re, im)
    }

    /// Exact real and imaginary parts; every finite binary float is a
    /// dyadic rational.
    pub fn exact_parts(&self) -> Option<(Rational, Rational)> {
        Some((self.re().to_rational()?, self.im().to_rational()?))
    }

    pub fn recip(&self) -> Self {
        Self(Complex::with_val(self.precision(), self.0.recip_ref()))
    }
}

impl fmt::Display for ComplexApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        if im < 0.0 {
            write!(f, "{re}-{}i", -im)
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

macro_rules! complex_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for &ComplexApprox {
            type Output = ComplexApprox;
            fn $m(self, rhs: Self) -> ComplexApprox {
                let prec = self.precision().min(rhs.precision());
                ComplexApprox(Complex::with_val(prec, &self.0 $op &rhs.0))
            }
        }
    };
}
complex_binop!(Add, add, +);
complex_binop!(Sub, sub, -);
complex_binop!(Mul, mul, *);

impl std::ops::Div for &ComplexApprox {
    type Output = ComplexApprox;
    fn div(self, rhs: Self) -> ComplexApprox {
        let prec = self.precision().min(rhs.precision());
        ComplexApprox(Complex::with_val(prec, &self.0 / &rhs.0))
    }
}

impl Neg for &ComplexApprox {
    type Output = ComplexApprox;
    fn neg(self) -> ComplexApprox {
        ComplexApprox(Complex::with_val(self.precision(), -&self.0))
    }
}

/// Polynomial with big-float complex coefficients, ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxPolynomial {
    coeffs: Vec<ComplexApprox>,
}

impl ApproxPolynomial {
    pub fn new(coeffs: Vec<ComplexApprox>) -> Self {
        Self { coeffs }
    }

    /// Expands `prod (z - r)` at the smallest precision among the roots.
    pub fn from_roots(roots: &[ComplexApprox]) -> Self {
        let prec = roots
            .iter()
            .map(ComplexApprox::precision)
            .min()
            .unwrap_or(MIN_PRECISION);
        let mut coeffs = vec![Complex::with_val(prec, 1)];
        for r in roots {
            coeffs.push(Complex::with_val(prec, 1));
            // multiply by (z - r) in place, from the top down
            for k in (1..coeffs.len() - 1).rev() {
                let t = Complex::with_val(prec, &coeffs[k] * &r.0);
                let prev = coeffs[k - 1].clone();
                coeffs[k] = prev - t;
            }
            coeffs[0] *= &r.0;
            coeffs[0] = -coeffs[0].clone();
        }
        Self {
            coeffs: coeffs.into_iter().map(ComplexApprox).collect(),
        }
    }

    pub fn coeffs(&self) -> &[ComplexApprox] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn precision(&self) -> u32 {
        self.coeffs
            .iter()
            .map(ComplexApprox::precision)
            .min()
            .unwrap_or(MIN_PRECISION)
    }

    pub fn evaluate(&self, z: &ComplexApprox) -> Result<ComplexApprox> {
        let prec = z.precision().min(self.precision());
        let mut acc = Complex::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= &z.0;
            acc += &c.0;
        }
        ComplexApprox::checked(acc)
    }

    /// `(p(z), p'(z))` by a single Horner sweep.
    pub fn evaluate_with_derivative(&self, z: &ComplexApprox) -> (Complex, Complex) {
        let prec = z.precision().min(self.precision());
        let mut p = Complex::new(prec);
        let mut dp = Complex::new(prec);
        for c in self.coeffs.iter().rev() {
            dp *= &z.0;
            dp += &p;
            p *= &z.0;
            p += &c.0;
        }
        (p, dp)
    }
}
