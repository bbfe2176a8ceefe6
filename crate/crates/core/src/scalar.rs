//! Exact arithmetic over ℚ(√2, i).
//!
//! Every amplitude and probability in the crate is a [`Scalar`], an element
//! `(a + b√2) + (c + d√2)·i` with rational `a, b, c, d`. The field is small
//! enough that equality and ordering are decidable, which is what lets the
//! normalization and orthogonality checks be exact. A floating image
//! ([`num_complex::Complex64`]) is available through the [`Amplitude`] trait
//! for the approximate backend.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default tolerance of the floating backend.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Amplitudes with modulus below this are pruned by the floating backend.
pub const FLOAT_PRUNE_THRESHOLD: f64 = 1e-12;

/// A real number `a + b·√2` with rational coefficients.
///
/// `BigRational` keeps both coefficients in lowest terms with a positive
/// denominator, so derived equality is exact value equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QReal {
    a: BigRational,
    b: BigRational,
}

impl QReal {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QReal { a, b }
    }

    /// The rational `num/den`.
    ///
    /// Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        QReal::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    /// `num/den · √2`.
    pub fn ratio_sqrt2(num: i64, den: i64) -> Self {
        QReal::new(BigRational::zero(), BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(n: i64) -> Self {
        QReal::ratio(n, 1)
    }

    pub fn from_rational(r: BigRational) -> Self {
        QReal::new(r, BigRational::zero())
    }

    pub fn sqrt2() -> Self {
        QReal::ratio_sqrt2(1, 1)
    }

    pub fn zero() -> Self {
        QReal::default()
    }

    pub fn one() -> Self {
        QReal::from_integer(1)
    }

    /// Rational part.
    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    /// Coefficient of √2.
    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Sign of `a + b√2` as -1, 0 or 1.
    pub fn signum(&self) -> i8 {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with 2b². They are never equal unless
        // both vanish, because √2 is irrational.
        let a2 = &self.a * &self.a;
        let two_b2 = &self.b * &self.b * BigRational::from_integer(BigInt::from(2));
        if a2 > two_b2 {
            sa
        } else {
            sb
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> QReal {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    /// Number of terms printed by the canonical form (0, 1 or 2).
    fn term_count(&self) -> usize {
        usize::from(!self.a.is_zero()) + usize::from(!self.b.is_zero())
    }
}

fn rational_sign(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl PartialOrd for QReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QReal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl<'a> Add<&'a QReal> for &'a QReal {
    type Output = QReal;
    fn add(self, rhs: &QReal) -> QReal {
        QReal::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a QReal> for &'a QReal {
    type Output = QReal;
    fn sub(self, rhs: &QReal) -> QReal {
        QReal::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a QReal> for &'a QReal {
    type Output = QReal;
    fn mul(self, rhs: &QReal) -> QReal {
        // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
        let two = BigRational::from_integer(BigInt::from(2));
        let a = &self.a * &rhs.a + &self.b * &rhs.b * two;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        QReal::new(a, b)
    }
}

impl Neg for &QReal {
    type Output = QReal;
    fn neg(self) -> QReal {
        QReal::new(-&self.a, -&self.b)
    }
}

impl Neg for QReal {
    type Output = QReal;
    fn neg(self) -> QReal {
        QReal::new(-self.a, -self.b)
    }
}

macro_rules! forward_owned_binop {
    ($ty:ty, $trait:ident, $method:ident) => {
        impl $trait for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                <&$ty as $trait<&$ty>>::$method(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a $ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: &'a $ty) -> $ty {
                <&$ty as $trait<&$ty>>::$method(&self, rhs)
            }
        }
    };
}

forward_owned_binop!(QReal, Add, add);
forward_owned_binop!(QReal, Sub, sub);
forward_owned_binop!(QReal, Mul, mul);

impl std::iter::Sum for QReal {
    fn sum<I: Iterator<Item = QReal>>(iter: I) -> QReal {
        iter.fold(QReal::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for QReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => f.write_str("0"),
            (false, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt2", self.b),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{} - {}*sqrt2", self.a, -&self.b)
                } else {
                    write!(f, "{} + {}*sqrt2", self.a, self.b)
                }
            }
        }
    }
}

impl fmt::Debug for QReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QReal({self})")
    }
}

impl FromStr for QReal {
    type Err = ScalarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: Scalar = s.parse()?;
        if !value.im.is_zero() {
            return Err(ScalarParseError {
                offset: 0,
                message: "expected a real number, found an imaginary part".into(),
            });
        }
        Ok(value.re)
    }
}

/// An element of ℚ(√2, i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    pub re: QReal,
    pub im: QReal,
}

impl Scalar {
    pub fn new(re: QReal, im: QReal) -> Self {
        Scalar { re, im }
    }

    pub fn real(re: QReal) -> Self {
        Scalar::new(re, QReal::zero())
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::real(QReal::one())
    }

    pub fn i() -> Self {
        Scalar::new(QReal::zero(), QReal::one())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::real(QReal::ratio(num, den))
    }

    /// `1/√2`, stored as `(1/2)·√2`.
    pub fn frac_1_sqrt2() -> Self {
        Scalar::real(QReal::ratio_sqrt2(1, 2))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Scalar {
        Scalar::new(self.re.clone(), -&self.im)
    }

    /// `|s|² = re² + im²`.
    pub fn abs2(&self) -> QReal {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Componentwise comparison of the floating images of `s` and `t`.
pub fn approx_eq(s: &Scalar, t: &Scalar, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    let (x, y) = (s.to_complex64(), t.to_complex64());
    (x.re - y.re).abs() <= tol && (x.im - y.im).abs() <= tol
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Scalar::new(re, im)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-&self.re, -&self.im)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.re, -self.im)
    }
}

forward_owned_binop!(Scalar, Add, add);
forward_owned_binop!(Scalar, Sub, sub);
forward_owned_binop!(Scalar, Mul, mul);

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl From<QReal> for Scalar {
    fn from(re: QReal) -> Self {
        Scalar::real(re)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        let (sign, im) = if self.im.is_negative() && self.im.term_count() == 1 {
            ("-", -&self.im)
        } else {
            ("+", self.im.clone())
        };
        let im_text = if im.term_count() == 2 {
            format!("({im}) i")
        } else {
            format!("{im} i")
        };
        if self.re.is_zero() {
            if sign == "-" {
                write!(f, "-{im_text}")
            } else {
                f.write_str(&im_text)
            }
        } else {
            write!(f, "{} {sign} {im_text}", self.re)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

/// Error from the scalar text parser. `offset` is a byte offset into the
/// parsed text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (at byte {offset})")]
pub struct ScalarParseError {
    pub offset: usize,
    pub message: String,
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScalarParser::new(s)?.parse_all()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigInt),
    Sqrt2,
    Imag,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

/// Recursive-descent parser for scalar text.
///
/// Grammar (whitespace between factors means multiplication):
///
/// ```text
/// expr   := ['+'|'-'] term (('+'|'-') term)*
/// term   := factor (['*'|'/'] factor)*
/// factor := number | 'sqrt2' | 'i' | '(' expr ')'
/// ```
///
/// Division is only accepted by a nonzero rational or by `sqrt2`; both have
/// inverses inside the field. Any other identifier (`sqrt3`, `pi`, ...) is
/// rejected as lying outside ℚ(√2, i).
struct ScalarParser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    len: usize,
}

impl ScalarParser {
    fn new(text: &str) -> Result<Self, ScalarParseError> {
        let mut tokens = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            match c {
                b' ' | b'\t' => {
                    i += 1;
                    continue;
                }
                b'+' => tokens.push((Token::Plus, start)),
                b'-' => tokens.push((Token::Minus, start)),
                b'*' => tokens.push((Token::Star, start)),
                b'/' => tokens.push((Token::Slash, start)),
                b'(' => tokens.push((Token::LParen, start)),
                b')' => tokens.push((Token::RParen, start)),
                b'0'..=b'9' => {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i < bytes.len() && (bytes[i] == b'.' || bytes[i] == b'e') {
                        return Err(ScalarParseError {
                            offset: i,
                            message: "decimal literals are not supported; write p/q".into(),
                        });
                    }
                    let n: BigInt = text[start..i].parse().expect("digits");
                    tokens.push((Token::Number(n), start));
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    let word = &text[start..i];
                    let tok = match word {
                        "sqrt2" => Token::Sqrt2,
                        "i" => Token::Imag,
                        // `sqrt2i` reads as sqrt2 * i.
                        "sqrt2i" => {
                            tokens.push((Token::Sqrt2, start));
                            Token::Imag
                        }
                        _ => {
                            return Err(ScalarParseError {
                                offset: start,
                                message: format!(
                                    "`{word}` is outside the amplitude field Q(sqrt2, i)"
                                ),
                            })
                        }
                    };
                    tokens.push((tok, start));
                    continue;
                }
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(ScalarParseError {
                        offset: start,
                        message: format!("unexpected character `{ch}` in scalar"),
                    });
                }
            }
            i += 1;
        }
        Ok(ScalarParser { tokens, pos: 0, len: text.len() })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(_, o)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ScalarParseError> {
        Err(ScalarParseError { offset: self.offset(), message: message.into() })
    }

    fn parse_all(mut self) -> Result<Scalar, ScalarParseError> {
        if self.tokens.is_empty() {
            return self.error("empty scalar");
        }
        let value = self.expr()?;
        if self.pos != self.tokens.len() {
            return self.error("unexpected trailing input in scalar");
        }
        Ok(value)
    }

    fn expr(&mut self) -> Result<Scalar, ScalarParseError> {
        let mut negate = false;
        match self.peek() {
            Some(Token::Minus) => {
                negate = true;
                self.pos += 1;
            }
            Some(Token::Plus) => self.pos += 1,
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, ScalarParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    acc = acc * self.inverse_factor()?;
                }
                Some(Token::Number(_) | Token::Sqrt2 | Token::Imag | Token::LParen) => {
                    acc = acc * self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn inverse_factor(&mut self) -> Result<Scalar, ScalarParseError> {
        match self.peek().cloned() {
            Some(Token::Number(n)) => {
                if n.is_zero() {
                    return self.error("division by zero");
                }
                self.pos += 1;
                let r = BigRational::new(BigInt::one(), n);
                Ok(Scalar::real(QReal::from_rational(r)))
            }
            Some(Token::Sqrt2) => {
                self.pos += 1;
                Ok(Scalar::frac_1_sqrt2())
            }
            _ => self.error("only division by a nonzero integer or by sqrt2 is supported"),
        }
    }

    fn factor(&mut self) -> Result<Scalar, ScalarParseError> {
        match self.peek().cloned() {
            Some(Token::Number(n)) => {
                self.pos += 1;
                Ok(Scalar::real(QReal::from_rational(BigRational::from_integer(n))))
            }
            Some(Token::Sqrt2) => {
                self.pos += 1;
                Ok(Scalar::real(QReal::sqrt2()))
            }
            Some(Token::Imag) => {
                self.pos += 1;
                Ok(Scalar::i())
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Token::RParen) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => self.error("expected a number, `sqrt2`, `i` or `(`"),
            None => self.error("unexpected end of scalar"),
        }
    }
}

/// Numeric backend used for state vectors: exact [`Scalar`] or floating
/// [`Complex64`].
pub trait Amplitude: Clone + fmt::Debug + Send + Sync + 'static {
    /// Name used by `TMKIT_BACKEND`.
    const BACKEND: &'static str;

    fn zero() -> Self;
    fn from_scalar(s: &Scalar) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn conj(&self) -> Self;
    /// Whether the value is dropped from a sparse vector.
    fn is_negligible(&self) -> bool;
    fn abs2_f64(&self) -> f64;
    /// Real and imaginary parts as text; canonical field syntax for exact values.
    fn text_parts(&self) -> (String, String);
}

impl Amplitude for Scalar {
    const BACKEND: &'static str = "exact";

    fn zero() -> Self {
        Scalar::zero()
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn conj(&self) -> Self {
        Scalar::conj(self)
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn abs2_f64(&self) -> f64 {
        self.abs2().to_f64()
    }
    fn text_parts(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }
}

impl Amplitude for Complex64 {
    const BACKEND: &'static str = "float";

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.to_complex64()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_negligible(&self) -> bool {
        self.norm() < FLOAT_PRUNE_THRESHOLD
    }
    fn abs2_f64(&self) -> f64 {
        self.norm_sqr()
    }
    fn text_parts(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }
}
