//! Exact helpers: rational growth rates, floors of their powers, logs of
//! big integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A positive growth rate held as an exact rational.
///
/// Decimal strings are exact rationals (`"2.5"` is `5/2`), and so is every
/// finite `f64`, so `floor(gamma^n)` is always computed without rounding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gamma {
    exact: BigRational,
    text: String,
}

impl Gamma {
    pub fn from_ratio(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("gamma", "zero denominator"));
        }
        let exact = BigRational::new(BigInt::from(p), BigInt::from(q));
        Ok(Self {
            text: format!("{p}/{q}"),
            exact,
        })
    }

    /// Exact value of the binary double `x`.
    pub fn from_f64(x: f64) -> Result<Self> {
        let exact = BigRational::from_float(x)
            .filter(|r| r.is_positive())
            .ok_or_else(|| Error::domain("gamma", format!("{x} is not a positive finite number")))?;
        Ok(Self {
            exact,
            text: format!("{x:?}"),
        })
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.exact)
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// `gamma > 1` checked exactly.
    pub fn exceeds(&self, bound: u64) -> bool {
        self.exact > BigRational::from_integer(BigInt::from(bound))
    }

    /// Iterator over `floor(gamma^n)` for `n = 1, 2, ...`.
    pub fn floor_powers(&self) -> FloorPowers {
        FloorPowers {
            num: self.exact.numer().magnitude().clone(),
            den: self.exact.denom().magnitude().clone(),
            num_pow: BigUint::one(),
            den_pow: BigUint::one(),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for Gamma {
    type Err = Error;

    /// Accepts `"p/q"`, an integer, or a plain decimal such as `"2.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::domain("gamma", format!("cannot parse {s:?} as a decimal or p/q rational"));
        let exact = if let Some((p, q)) = t.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            BigRational::new(p, q)
        } else {
            let (int, frac) = t.split_once('.').unwrap_or((t, ""));
            if int.is_empty() && frac.is_empty() {
                return Err(bad());
            }
            if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let digits = format!("{int}{frac}");
            let num = BigInt::from_str(&digits).map_err(|_| bad())?;
            let den = num_traits::pow(BigInt::from(10u32), frac.len());
            BigRational::new(num, den)
        };
        if !exact.is_positive() {
            return Err(Error::domain("gamma", "must be positive"));
        }
        Ok(Self {
            exact,
            text: t.to_string(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct FloorPowers {
    num: BigUint,
    den: BigUint,
    num_pow: BigUint,
    den_pow: BigUint,
}

impl Iterator for FloorPowers {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        self.num_pow *= &self.num;
        self.den_pow *= &self.den;
        Some(self.num_pow.div_floor(&self.den_pow))
    }
}

/// Natural log of a big integer, accurate to double precision for any size.
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let ln = big_ln(r.numer().magnitude()) - big_ln(r.denom().magnitude());
    sign * ln.exp()
}
