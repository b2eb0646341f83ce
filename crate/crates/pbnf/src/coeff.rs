//! Dual-mode complex coefficients: exact rationals and double precision.
//!
//! Every divisor arising in the cohomological equations is a nonzero
//! integer, so rational mode stays exact end to end. Float mode exists for
//! large experiments and uses a global zero threshold when canonicalizing
//! term maps after cancellation.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Coefficient arithmetic mode, as declared in `VFAM/1` headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Rational,
    Float,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

static FLOAT_ZERO_TOL: AtomicU64 = AtomicU64::new(0);

const DEFAULT_FLOAT_ZERO_TOL: f64 = 1e-12;

/// Threshold below which float-mode coefficients are canonicalized to zero.
pub fn float_zero_tol() -> f64 {
    let bits = FLOAT_ZERO_TOL.load(Ordering::Relaxed);
    if bits == 0 {
        DEFAULT_FLOAT_ZERO_TOL
    } else {
        f64::from_bits(bits)
    }
}

/// Set the float-mode zero threshold for the whole process.
pub fn set_float_zero_tol(tol: f64) {
    assert!(tol > 0.0, "zero threshold must be positive");
    FLOAT_ZERO_TOL.store(tol.to_bits(), Ordering::Relaxed);
}

/// Complex coefficient operations needed by the term-map algebra.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn from_int(v: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Division by a nonzero integer (divisors, factorials).
    fn div_int(&self, v: i64) -> Self;
    /// Canonicalization test; exact in rational mode, thresholded in float mode.
    fn is_zero(&self) -> bool;
    /// Complex modulus as a double (majorant entries, norm evaluation).
    fn abs_f64(&self) -> f64;
    fn re_im_f64(&self) -> (f64, f64);
    /// Canonical text form of the real and imaginary parts.
    fn format_parts(&self) -> (String, String);
    fn parse_parts(re: &str, im: &str) -> std::result::Result<Self, String>;
}

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rat {
    pub re: BigRational,
    pub im: BigRational,
}

impl Rat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Rat { re, im }
    }

    /// `p/q` as a real coefficient.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0);
        Rat {
            re: BigRational::new(p.into(), q.into()),
            im: BigRational::zero(),
        }
    }
}

impl Coeff for Rat {
    const MODE: Mode = Mode::Rational;

    fn zero() -> Self {
        Rat::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Rat::new(BigRational::from_integer(1.into()), BigRational::zero())
    }

    fn i() -> Self {
        Rat::new(BigRational::zero(), BigRational::from_integer(1.into()))
    }

    fn from_int(v: i64) -> Self {
        Rat::new(BigRational::from_integer(v.into()), BigRational::zero())
    }

    fn add(&self, other: &Self) -> Self {
        Rat::new(&self.re + &other.re, &self.im + &other.im)
    }

    fn sub(&self, other: &Self) -> Self {
        Rat::new(&self.re - &other.re, &self.im - &other.im)
    }

    fn mul(&self, other: &Self) -> Self {
        Rat::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    fn neg(&self) -> Self {
        Rat::new(-self.re.clone(), -self.im.clone())
    }

    fn div_int(&self, v: i64) -> Self {
        assert!(v != 0, "division by zero integer");
        let d = BigRational::from_integer(v.into());
        Rat::new(&self.re / &d, &self.im / &d)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn abs_f64(&self) -> f64 {
        let (re, im) = self.re_im_f64();
        re.hypot(im)
    }

    fn re_im_f64(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn format_parts(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }

    fn parse_parts(re: &str, im: &str) -> std::result::Result<Self, String> {
        let parse = |s: &str| -> std::result::Result<BigRational, String> {
            BigRational::from_str(s).map_err(|e| format!("bad rational `{s}`: {e}"))
        };
        Ok(Rat::new(parse(re)?, parse(im)?))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Complex double-precision coefficient.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }
}

impl Coeff for C64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }

    fn one() -> Self {
        C64::new(1.0, 0.0)
    }

    fn i() -> Self {
        C64::new(0.0, 1.0)
    }

    fn from_int(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }

    fn add(&self, other: &Self) -> Self {
        C64::new(self.re + other.re, self.im + other.im)
    }

    fn sub(&self, other: &Self) -> Self {
        C64::new(self.re - other.re, self.im - other.im)
    }

    fn mul(&self, other: &Self) -> Self {
        C64::new(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )
    }

    fn neg(&self) -> Self {
        C64::new(-self.re, -self.im)
    }

    fn div_int(&self, v: i64) -> Self {
        assert!(v != 0, "division by zero integer");
        C64::new(self.re / v as f64, self.im / v as f64)
    }

    fn is_zero(&self) -> bool {
        let tol = float_zero_tol();
        self.re.abs() <= tol && self.im.abs() <= tol
    }

    fn abs_f64(&self) -> f64 {
        self.re.hypot(self.im)
    }

    fn re_im_f64(&self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn format_parts(&self) -> (String, String) {
        (format!("{}", self.re), format!("{}", self.im))
    }

    fn parse_parts(re: &str, im: &str) -> std::result::Result<Self, String> {
        let parse =
            |s: &str| -> std::result::Result<f64, String> { s.parse().map_err(|e| format!("bad float `{s}`: {e}")) };
        Ok(C64::new(parse(re)?, parse(im)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_exact() {
        let third = Rat::from_ratio(1, 3);
        let sum = third.add(&third).add(&third);
        assert_eq!(sum, Rat::one());
    }

    #[test]
    fn complex_product() {
        // (1+i)(1-i) = 2
        let a = Rat::one().add(&Rat::i());
        let b = Rat::one().sub(&Rat::i());
        assert_eq!(a.mul(&b), Rat::from_int(2));
    }

    #[test]
    fn modulus_of_one_plus_i() {
        let a = Rat::one().add(&Rat::i());
        assert!((a.abs_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn float_zero_threshold() {
        let tiny = C64::new(1e-13, -1e-14);
        assert!(tiny.is_zero());
        let not_tiny = C64::new(1e-11, 0.0);
        assert!(!not_tiny.is_zero());
    }

    #[test]
    fn rational_round_trip_text() {
        let c = Rat::from_ratio(-7, 12);
        let (re, im) = c.format_parts();
        assert_eq!(re, "-7/12");
        assert_eq!(im, "0");
        let back = Rat::parse_parts(&re, &im).unwrap();
        assert_eq!(back, c);
    }
}
