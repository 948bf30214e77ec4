//! Exact-enough reduction of `N * phi` modulo `2 pi` for astronomically
//! large `N`.
//!
//! Between two bumps the EFGP phase rotates by `phi` per site, and the gaps
//! of a geometric tree reach thousands of bits. `phi / 2pi` is therefore
//! held as a binary fixed-point fraction whose precision exceeds the bit
//! length of the largest multiplier by a wide margin; the product is reduced
//! modulo one by truncating to the fractional bits.

use std::f64::consts::TAU;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Fractional bits kept beyond the largest supported multiplier.
const HEADROOM_BITS: u64 = 256;
/// Fractional bits that must survive a reduction at full capacity.
const RESIDUAL_BITS: u64 = 128;
const MIN_BITS: u64 = 320;

/// `floor(pi * 2^bits)` by Machin's formula, `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi_fixed(bits: u64) -> BigUint {
    let guard = 32;
    let scale = BigInt::one() << (bits + guard);
    let pi = atan_inv(&scale, 5) * 16u32 - atan_inv(&scale, 239) * 4u32;
    (pi >> guard).to_biguint().expect("pi is positive")
}

/// `atan(1/x) * scale` by its alternating Taylor series; truncation errors
/// accumulate to a few units, absorbed by the caller's guard bits.
fn atan_inv(scale: &BigInt, x: u32) -> BigInt {
    let x2 = BigInt::from(x) * x;
    let mut power = scale / x;
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power /= &x2;
        if power.is_zero() {
            return sum;
        }
        let term = &power / (2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
}

/// `phi / 2pi mod 1` in fixed point, with an exact-rational fast path for
/// rational multiples of `pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseReducer {
    turns: BigUint,
    bits: u64,
    phi: f64,
}

impl PhaseReducer {
    /// `phi` taken as the exact dyadic rational its `f64` encodes; supports
    /// multipliers up to `max_multiplier_bits` bits.
    pub fn from_radians(phi: f64, max_multiplier_bits: u64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::domain("phi", "must be finite"));
        }
        let bits = Self::precision_for(max_multiplier_bits);
        if phi == 0.0 {
            return Ok(Self {
                turns: BigUint::zero(),
                bits,
                phi,
            });
        }
        let (mantissa, exp, sign) = num_traits::float::FloatCore::integer_decode(phi);
        let exp = i64::from(exp);
        // pi needs enough bits that its relative error, scaled by |phi| / 2pi
        // times 2^bits, stays below one unit.
        let q = bits + 64 + (exp + 53).max(0) as u64;
        let two_pi = pi_fixed(q) << 1u32;
        let shift = exp + (bits + q) as i64;
        let numerator = BigUint::from(mantissa);
        let mut turns = if shift >= 0 {
            (numerator << shift as u64) / two_pi
        } else {
            numerator / (two_pi << (-shift) as u64)
        };
        turns = Self::wrap(turns, bits);
        if sign < 0 && !turns.is_zero() {
            turns = (BigUint::one() << bits) - turns;
        }
        Ok(Self { turns, bits, phi })
    }

    /// `phi = p * pi / q`, held exactly up to the final truncation.
    pub fn from_pi_fraction(p: i64, q: u64, max_multiplier_bits: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("phi", "denominator must be positive"));
        }
        let bits = Self::precision_for(max_multiplier_bits);
        let period = BigInt::from(2 * q);
        let num = BigInt::from(p).mod_floor(&period);
        let turns = (num.to_biguint().expect("nonnegative") << bits) / (2 * q);
        let phi = p as f64 * std::f64::consts::PI / q as f64;
        Ok(Self { turns, bits, phi })
    }

    fn precision_for(max_multiplier_bits: u64) -> u64 {
        (max_multiplier_bits + HEADROOM_BITS).max(MIN_BITS)
    }

    fn wrap(x: BigUint, bits: u64) -> BigUint {
        if x.bits() <= bits {
            x
        } else {
            x & ((BigUint::one() << bits) - 1u32)
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn precision_bits(&self) -> u64 {
        self.bits
    }

    /// Largest multiplier bit length reduced with full headroom.
    pub fn capacity_bits(&self) -> u64 {
        self.bits - RESIDUAL_BITS
    }

    /// `n * phi / 2pi mod 1` as a fixed-point fraction with
    /// [`precision_bits`](Self::precision_bits) fractional bits.
    pub fn reduce_turns(&self, n: &BigUint) -> Result<BigUint> {
        if n.bits() > self.capacity_bits() {
            return Err(Error::domain(
                "multiplier",
                format!("{} bits exceeds reducer capacity {}", n.bits(), self.capacity_bits()),
            ));
        }
        Ok(Self::wrap(n * &self.turns, self.bits))
    }

    /// `n * phi mod 2pi`, in `[0, 2pi)`.
    pub fn reduce_angle(&self, n: &BigUint) -> Result<f64> {
        let frac = self.reduce_turns(n)?;
        let top = (frac >> (self.bits - 64)).to_u64().expect("64 bits");
        let angle = top as f64 / 2f64.powi(64) * TAU;
        Ok(if angle >= TAU { 0.0 } else { angle })
    }

    /// `theta + n * phi`, reduced to `[0, 2pi)`.
    pub fn advance(&self, theta: f64, n: &BigUint) -> Result<f64> {
        Ok(reduce_2pi(theta + self.reduce_angle(n)?))
    }
}

/// Reduces an ordinary-sized angle to `[0, 2pi)`.
pub fn reduce_2pi(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}
