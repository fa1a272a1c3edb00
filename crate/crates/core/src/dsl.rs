//! Text syntax for operators.
//!
//! ```text
//! operator := ['-'] term (('+' | '-') term)*
//! term     := [rational] ['*'] [zpart] ['*'] dpart
//! zpart    := 'z' ['^' uint] | '(' polynomial ')'
//! dpart    := 'D' ['^' uint]
//! rational := ['-'] uint ['/' uint]
//! ```
//!
//! Whitespace between tokens is ignored; terms with the same derivative
//! order are added together. A term may also open with a bare sign, as in
//! `z*D + -z*D^2`.

use std::collections::BTreeMap;

use rug::{Integer, Rational};
use thiserror::Error;

use crate::operator::{Classification, DifferentialOperator, InvalidReason};
use crate::poly::ExactPolynomial;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DslError {
    /// `position` is the byte offset of the first offending character.
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("invalid operator: {0}")]
    Validation(InvalidReason),
}

type ParseResult<T> = std::result::Result<T, DslError>;

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&mut self, expected: &str) -> ParseResult<T> {
        self.skip_ws();
        Err(DslError::Syntax {
            position: self.pos,
            expected: expected.to_string(),
        })
    }

    fn expect(&mut self, c: u8, expected: &str) -> ParseResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(expected)
        }
    }

    fn at_digit(&mut self) -> bool {
        self.peek().is_some_and(|c| c.is_ascii_digit())
    }

    fn uint(&mut self) -> ParseResult<Integer> {
        if !self.at_digit() {
            return self.fail("unsigned integer");
        }
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(digits.parse::<Integer>().expect("digits"))
    }

    fn small_uint(&mut self) -> ParseResult<(usize, usize)> {
        self.skip_ws();
        let at = self.pos;
        let v = self.uint()?;
        match v.to_usize() {
            Some(v) if v <= 10_000 => Ok((v, at)),
            _ => Err(DslError::Syntax {
                position: at,
                expected: "exponent at most 10000".into(),
            }),
        }
    }

    /// `uint ['/' uint]`, sign handled by the caller.
    fn unsigned_rational(&mut self) -> ParseResult<Rational> {
        let num = self.uint()?;
        if self.eat(b'/') {
            self.skip_ws();
            let at = self.pos;
            let den = self.uint()?;
            if den == 0 {
                return Err(DslError::Syntax {
                    position: at,
                    expected: "nonzero denominator".into(),
                });
            }
            Ok(Rational::from((num, den)))
        } else {
            Ok(Rational::from(num))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// `['^' uint]` after `z`.
fn z_power(cur: &mut Cursor<'_>) -> ParseResult<usize> {
    if cur.eat(b'^') {
        Ok(cur.small_uint()?.0)
    } else {
        Ok(1)
    }
}

/// Polynomial in `z` with rational coefficients, e.g. `3/2*z^2 - z + 1`.
fn polynomial(cur: &mut Cursor<'_>) -> ParseResult<ExactPolynomial> {
    let mut acc = ExactPolynomial::zero();
    let mut negative = cur.eat(b'-');
    loop {
        let mut coeff = None;
        if cur.at_digit() {
            coeff = Some(cur.unsigned_rational()?);
        }
        let starred = coeff.is_some() && cur.eat(b'*');
        let power = if cur.eat(b'z') {
            z_power(cur)?
        } else if coeff.is_none() || starred {
            return cur.fail("number or 'z'");
        } else {
            0
        };
        let mut c = coeff.unwrap_or_else(|| Rational::from(1));
        if negative {
            c = -c;
        }
        acc = &acc + &ExactPolynomial::monomial(c, power);
        negative = match cur.peek() {
            Some(b'+') => false,
            Some(b'-') => true,
            _ => return Ok(acc),
        };
        cur.pos += 1;
    }
}

/// One term, returning `(order, coefficient)`.
fn term(cur: &mut Cursor<'_>) -> ParseResult<(usize, ExactPolynomial)> {
    let mut scale = Rational::from(1);
    let mut has_number = false;
    if cur.eat(b'-') {
        scale = -scale;
    }
    if cur.at_digit() {
        scale *= cur.unsigned_rational()?;
        has_number = true;
    }
    let mut starred = has_number && cur.eat(b'*');
    let mut zpart = ExactPolynomial::one();
    match cur.peek() {
        Some(b'z') => {
            cur.pos += 1;
            zpart = ExactPolynomial::monomial(Rational::from(1), z_power(cur)?);
            starred = cur.eat(b'*');
        }
        Some(b'(') => {
            cur.pos += 1;
            zpart = polynomial(cur)?;
            cur.expect(b')', "')'")?;
            starred = cur.eat(b'*');
        }
        _ => {}
    }
    if !cur.eat(b'D') {
        return cur.fail(if starred || has_number { "'D'" } else { "term" });
    }
    let order = if cur.eat(b'^') {
        let (j, at) = cur.small_uint()?;
        if j == 0 {
            return Err(DslError::Syntax {
                position: at,
                expected: "derivative order at least 1".into(),
            });
        }
        j
    } else {
        1
    };
    Ok((order, zpart.scale(&scale)))
}

/// Parses without classifying; any structurally well-formed operator.
pub fn parse_unchecked(text: &str) -> ParseResult<DifferentialOperator> {
    let mut cur = Cursor::new(text);
    let mut terms: BTreeMap<usize, ExactPolynomial> = BTreeMap::new();
    let mut negative = cur.eat(b'-');
    loop {
        let (j, mut q) = term(&mut cur)?;
        if negative {
            q = -&q;
        }
        let entry = terms.entry(j).or_insert_with(ExactPolynomial::zero);
        *entry = &*entry + &q;
        negative = match cur.peek() {
            Some(b'+') => false,
            Some(b'-') => true,
            None => break,
            Some(_) => return cur.fail("'+', '-' or end of input"),
        };
        cur.pos += 1;
    }
    debug_assert!(cur.at_end());
    Ok(DifferentialOperator::new(terms).expect("orders are at least 1 and the map is nonempty"))
}

/// Parses and rejects operators that are not exactly solvable.
pub fn parse_operator(text: &str) -> ParseResult<DifferentialOperator> {
    let op = parse_unchecked(text)?;
    match op.classify() {
        Classification::Invalid(reason) => Err(DslError::Validation(reason)),
        _ => Ok(op),
    }
}

pub fn parse_polynomial(text: &str) -> ParseResult<ExactPolynomial> {
    let mut cur = Cursor::new(text);
    let p = polynomial(&mut cur)?;
    if !cur.at_end() {
        return cur.fail("end of input");
    }
    Ok(p)
}

/// Prints in increasing order of `j`; the output parses back to an equal
/// operator.
pub fn print_operator(op: &DifferentialOperator) -> String {
    let mut out = String::new();
    for (i, (&j, q)) in op.terms().iter().enumerate() {
        let dpart = if j == 1 { "D".to_string() } else { format!("D^{j}") };
        let monomial = q.coeffs().iter().filter(|c| **c != 0).count() <= 1;
        let coeff = q.to_string();
        let body = if !monomial {
            format!("({coeff})*{dpart}")
        } else if coeff == "1" {
            dpart
        } else if coeff == "-1" {
            format!("-{dpart}")
        } else {
            format!("{coeff}*{dpart}")
        };
        match (i, body.strip_prefix('-')) {
            (0, _) => out.push_str(&body),
            (_, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (_, None) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
        }
    }
    out
}

/// Complex literals for the command line: `3`, `-1.5`, `2i`, `-i`,
/// `2+2i`, `-1-3i`, `1e3-2.5i`.
pub fn parse_complex(text: &str) -> Option<(f64, f64)> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| (re, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(k) => Some((body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some((0.0, imag(body)?)),
    }
}
