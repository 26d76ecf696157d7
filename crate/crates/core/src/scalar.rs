use std::cmp::Ordering;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arithmetic regime: exact rational coefficients, or hardware floats.
///
/// The two regimes never mix inside one computation.  Public entry points
/// check operand modes up front and return [`Error::ModeMismatch`]; internal
/// arithmetic on already-validated data panics on a mix, since reaching that
/// state means a checked API was bypassed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarMode {
    Exact,
    Approx,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::Exact => write!(f, "exact"),
            ScalarMode::Approx => write!(f, "approx"),
        }
    }
}

/// A coefficient: an arbitrary-precision rational or an `f64`, tagged by mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Approx(f64),
}

impl Scalar {
    pub fn mode(&self) -> ScalarMode {
        match self {
            Scalar::Exact(_) => ScalarMode::Exact,
            Scalar::Approx(_) => ScalarMode::Approx,
        }
    }

    pub fn zero(mode: ScalarMode) -> Scalar {
        match mode {
            ScalarMode::Exact => Scalar::Exact(BigRational::zero()),
            ScalarMode::Approx => Scalar::Approx(0.0),
        }
    }

    pub fn one(mode: ScalarMode) -> Scalar {
        match mode {
            ScalarMode::Exact => Scalar::Exact(BigRational::one()),
            ScalarMode::Approx => Scalar::Approx(1.0),
        }
    }

    pub fn from_integer(n: i64, mode: ScalarMode) -> Scalar {
        match mode {
            ScalarMode::Exact => Scalar::Exact(BigRational::from_integer(BigInt::from(n))),
            ScalarMode::Approx => Scalar::Approx(n as f64),
        }
    }

    pub fn from_ratio(num: i64, den: i64, mode: ScalarMode) -> Scalar {
        assert!(den != 0, "zero denominator");
        match mode {
            ScalarMode::Exact => {
                Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
            ScalarMode::Approx => Scalar::Approx(num as f64 / den as f64),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(x) => *x == 0.0,
        }
    }

    /// Magnitude as an `f64`, for tolerance checks and reporting.
    pub fn abs_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.abs().to_f64().unwrap_or(f64::INFINITY),
            Scalar::Approx(x) => x.abs(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(x) => *x,
        }
    }

    /// The value as an exact rational, if in exact mode.
    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn checked_same_mode(&self, other: &Scalar) -> Result<()> {
        if self.mode() == other.mode() {
            Ok(())
        } else {
            Err(Error::ModeMismatch)
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a + b),
            _ => panic!("scalar mode mixed in arithmetic"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a - b),
            _ => panic!("scalar mode mixed in arithmetic"),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a * b),
            _ => panic!("scalar mode mixed in arithmetic"),
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        assert!(!other.is_zero(), "division by zero scalar");
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a / b),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a / b),
            _ => panic!("scalar mode mixed in arithmetic"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(x) => Scalar::Approx(-x),
        }
    }

    pub fn scale_int(&self, k: i64) -> Scalar {
        self.mul(&Scalar::from_integer(k, self.mode()))
    }

    pub fn pow_u32(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one(self.mode());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exponential: exact only for argument zero.
    pub fn exp(&self) -> Result<Scalar> {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    Ok(Scalar::one(ScalarMode::Exact))
                } else {
                    Err(Error::ExactnessUnavailable {
                        reason: format!("e^({r}) is irrational"),
                    })
                }
            }
            Scalar::Approx(x) => Ok(Scalar::Approx(x.exp())),
        }
    }

    /// Total order within a mode, for canonical tie-breaking.  Approximate
    /// NaNs sort last so ordering stays total.
    pub fn cmp_same_mode(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Approx(a), Scalar::Approx(b)) => a.partial_cmp(b).unwrap_or_else(|| {
                match (a.is_nan(), b.is_nan()) {
                    (true, true) => Ordering::Equal,
                    (true, false) => Ordering::Greater,
                    (false, true) => Ordering::Less,
                    (false, false) => unreachable!(),
                }
            }),
            _ => panic!("scalar mode mixed in comparison"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // BigRational prints `n` for integers and `n/d` otherwise,
            // which is exactly the canonical coefficient syntax.
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Factorial as an exact scalar (used by composition coefficients).
pub fn factorial(n: u32, mode: ScalarMode) -> Scalar {
    let mut acc = Scalar::one(mode);
    for k in 2..=n as i64 {
        acc = acc.scale_int(k);
    }
    acc
}

/// Binomial coefficient C(n, k) as a scalar in the given mode.
pub fn binomial(n: u32, k: u32, mode: ScalarMode) -> Scalar {
    if k > n {
        return Scalar::zero(mode);
    }
    // Multiplicative form keeps intermediate values integral.
    let mut num = Scalar::one(mode);
    let mut den = Scalar::one(mode);
    for j in 0..k {
        num = num.scale_int((n - j) as i64);
        den = den.scale_int((j + 1) as i64);
    }
    num.div(&den)
}

/// Falling factorial n·(n−1)···(n−k+1) as a scalar.
pub fn falling(n: u32, k: u32, mode: ScalarMode) -> Scalar {
    if k > n {
        return Scalar::zero(mode);
    }
    let mut acc = Scalar::one(mode);
    for j in 0..k {
        acc = acc.scale_int((n - j) as i64);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_display_matches_canonical_syntax() {
        assert_eq!(Scalar::from_ratio(3, 2, ScalarMode::Exact).to_string(), "3/2");
        assert_eq!(Scalar::from_ratio(-4, 2, ScalarMode::Exact).to_string(), "-2");
        assert_eq!(Scalar::from_integer(7, ScalarMode::Exact).to_string(), "7");
        assert_eq!(Scalar::from_ratio(2, -4, ScalarMode::Exact).to_string(), "-1/2");
    }

    #[test]
    fn binomial_and_falling() {
        let m = ScalarMode::Exact;
        assert_eq!(binomial(5, 2, m), Scalar::from_integer(10, m));
        assert_eq!(binomial(3, 0, m), Scalar::one(m));
        assert_eq!(binomial(2, 5, m), Scalar::zero(m));
        assert_eq!(falling(5, 2, m), Scalar::from_integer(20, m));
        assert_eq!(falling(3, 3, m), Scalar::from_integer(6, m));
        assert_eq!(falling(2, 3, m), Scalar::zero(m));
        assert_eq!(factorial(5, m), Scalar::from_integer(120, m));
    }

    #[test]
    fn mode_mixing_is_rejected() {
        let a = Scalar::from_integer(1, ScalarMode::Exact);
        let b = Scalar::Approx(1.0);
        assert_eq!(a.checked_same_mode(&b), Err(Error::ModeMismatch));
    }

    #[test]
    fn exact_exp_only_at_zero() {
        assert_eq!(
            Scalar::zero(ScalarMode::Exact).exp().unwrap(),
            Scalar::one(ScalarMode::Exact)
        );
        assert!(Scalar::from_integer(1, ScalarMode::Exact).exp().is_err());
        let e = Scalar::Approx(1.0).exp().unwrap();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
    }
}
