//! Closed-form predictions for random sparse trees and the classifiers
//! built on them.
//!
//! For `Γ^ω_{k,γ}` at `E = 2 cos(phi)` each bump multiplies the EFGP radius
//! by `exp(f(theta))` with `theta` effectively uniform, so `log r` grows by
//! `Z = mean f` per bump while the generation grows by a factor `γ`. This
//! gives the exact local dimension
//! `alpha(E) = 1 - 2 Z / log γ = 1 - log((4V - E^2) / (4 - E^2)) / log γ`,
//! with `V(k) = (1 + k)^2 / (4k)`, and the singular continuous window `I`
//! where `alpha > 0`.

use num_bigint::BigUint;
use serde::Serialize;

use crate::bigmath::big_ln;
use crate::efgp::{bump_coefficients, efgp_run, EfgpInit};
use crate::eigen::tridiagonal_eigenvalues;
use crate::error::{Error, Result};
use crate::jacobi::{block_coefficients, Variant};
use crate::scalar::Scalar;
use crate::tree::{theoretical_dimension, TreeSpec};

fn check_k(k: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::domain("k", "must be at least 2"));
    }
    Ok(())
}

fn check_gamma<T: Scalar>(gamma: T) -> Result<()> {
    if !(gamma > T::of(2.0)) {
        return Err(Error::domain("gamma", "must exceed 2"));
    }
    Ok(())
}

/// `(1 + k)^2 / (4k)`.
pub fn v_of_k<T: Scalar>(k: u64) -> T {
    let k = T::of_u64(k);
    (T::one() + k) * (T::one() + k) / (k * T::of(4.0))
}

/// Right endpoint `sqrt(4 (γ - V) / (γ - 1))` of the symmetric window `I`,
/// or `None` when `γ <= V(k)` and `I` is empty.
pub fn interval_i<T: Scalar>(k: u64, gamma: T) -> Result<Option<T>> {
    check_k(k)?;
    check_gamma(gamma)?;
    let v = v_of_k::<T>(k);
    Ok((gamma > v).then(|| ((gamma - v) * T::of(4.0) / (gamma - T::one())).sqrt()))
}

/// `1 - log((4V - E^2) / (4 - E^2)) / log γ`, defined for `|E| < 2`. Only
/// meaningful inside `I`; negative beyond it.
pub fn local_dimension<T: Scalar>(energy: T, k: u64, gamma: T) -> Result<T> {
    check_k(k)?;
    check_gamma(gamma)?;
    if !(energy.abs() < T::of(2.0)) {
        return Err(Error::domain("E", "must lie in (-2, 2)"));
    }
    let e2 = energy * energy;
    let four = T::of(4.0);
    Ok(T::one() - ((four * v_of_k::<T>(k) - e2) / (four - e2)).ln() / gamma.ln())
}

/// `A(phi) = ((1 + k^2) / (2k) - cos^2 phi) / sin^2 phi`.
pub fn a_of_phi<T: Scalar>(k: u64, phi: T) -> T {
    let kk = T::of_u64(k);
    let (s, c) = phi.sin_cos();
    ((T::one() + kk * kk) / (kk * T::of(2.0)) - c * c) / (s * s)
}

/// Mean log growth per bump, `Z = log((A + 1) / 2) / 2`.
pub fn z_exponent<T: Scalar>(phi: T, k: u64) -> Result<T> {
    check_k(k)?;
    if !(phi > T::zero() && phi < T::PI()) {
        return Err(Error::domain("phi", "must lie in (0, pi)"));
    }
    Ok(((a_of_phi::<T>(k, phi) + T::one()) * T::of(0.5)).ln() * T::of(0.5))
}

/// Log growth of the EFGP radius across one bump entered at phase `theta`.
pub fn f_theta<T: Scalar>(theta: T, k: u64, phi: T) -> Result<T> {
    let abc = bump_coefficients(k, phi)?;
    let arg = abc.ratio_sq(theta);
    assert!(arg > T::zero(), "A >= sqrt(1 + B^2 + C^2) keeps the argument positive");
    Ok(arg.ln() * T::of(0.5))
}

/// `f - Z`, which integrates to zero over a period.
pub fn ftilde<T: Scalar>(theta: T, k: u64, phi: T) -> Result<T> {
    Ok(f_theta(theta, k, phi)? - z_exponent(phi, k)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseClass {
    /// Singular continuous, inside `I`.
    Sc,
    /// Dense pure point, in `[-2, 2]` outside the closure of `I`.
    Pp,
    /// Outside `[-2, 2]`.
    Outside,
    /// An endpoint of `I`, where nothing is predicted.
    Boundary,
}

impl PhaseClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseClass::Sc => "sc",
            PhaseClass::Pp => "pp",
            PhaseClass::Outside => "outside",
            PhaseClass::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePoint<T> {
    pub energy: T,
    pub k: u64,
    pub gamma: T,
    pub class: PhaseClass,
    pub alpha: Option<T>,
}

/// Relative distance to an endpoint treated as lying on it.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

pub fn classify<T: Scalar>(energy: T, k: u64, gamma: T) -> Result<PhasePoint<T>> {
    let endpoint = interval_i(k, gamma)?;
    let abs_e = energy.abs();
    let (class, alpha) = if abs_e > T::of(2.0) {
        (PhaseClass::Outside, None)
    } else {
        match endpoint {
            Some(ep) if (abs_e - ep).abs() <= T::of(BOUNDARY_TOLERANCE) * ep => (PhaseClass::Boundary, None),
            Some(ep) if abs_e < ep => (PhaseClass::Sc, Some(local_dimension(energy, k, gamma)?)),
            _ => (PhaseClass::Pp, None),
        }
    };
    Ok(PhasePoint {
        energy,
        k,
        gamma,
        class,
        alpha,
    })
}

/// Whether `dim Γ_{k,γ} >= 3` forces `I` to be empty for this `(k, γ)`.
pub fn corollary_check<T: Scalar>(k: u64, gamma: T) -> Result<bool> {
    if !(gamma >= T::of(4.0)) {
        return Err(Error::domain("gamma", "the corollary concerns gamma >= 4"));
    }
    let dim = theoretical_dimension(k, gamma)?;
    Ok(dim < T::of(3.0) || interval_i(k, gamma)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifierRow {
    pub n: usize,
    pub l: String,
    pub k: u64,
    /// `L_{n+1} - L_n`.
    pub gap: String,
    /// Largest `eps` with `gap_n >= A_n^(1 + eps)`, `A_n = k_1 ... k_n`.
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub horizon: usize,
    /// Branching numbers keep growing over the horizon.
    pub k_growing: bool,
    /// Largest `eps` over the last half of the horizon; the gap condition
    /// holds with any `eps` below it.
    pub epsilon_witness: Option<f64>,
    pub gap_condition: bool,
    /// The dominating sequence in the continuity condition.
    pub beta: &'static str,
    pub prediction: &'static str,
    pub rows: Vec<ClassifierRow>,
}

/// Checks, over the horizon of `spec`, the two hypotheses behind purely
/// singular continuous spectrum for unbounded branching: `k_n` growing, and
/// `limsup (L_{n+1} - L_n) / A_n^(1 + eps) > 0` for some `eps > 0`.
pub fn theorem_classifier(spec: &TreeSpec) -> TheoremReport {
    let k = spec.k();
    let n = k.len();
    let half = n / 2;
    let k_growing =
        n >= 2 && k[half..].windows(2).all(|w| w[0] <= w[1]) && k[half..].iter().max() > k[..half.max(1)].iter().max();
    let mut log_a = 0.0f64;
    let mut rows = Vec::with_capacity(n.saturating_sub(1));
    for (i, &ki) in k.iter().enumerate().take(n.saturating_sub(1)) {
        log_a += (ki as f64).ln();
        let gap: BigUint = &spec.l()[i + 1] - &spec.l()[i];
        let epsilon = big_ln(&gap) / log_a - 1.0;
        rows.push(ClassifierRow {
            n: i + 1,
            l: spec.l()[i].to_string(),
            k: ki,
            gap: gap.to_string(),
            epsilon,
        });
    }
    let epsilon_witness = rows[rows.len() / 2..]
        .iter()
        .map(|r| r.epsilon)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
    let gap_condition = epsilon_witness.is_some_and(|e| e > 0.0);
    let prediction = if !k_growing {
        "bounded branching: governed by the random sparse-tree window I"
    } else if gap_condition {
        "purely singular continuous on (-2, 2)"
    } else {
        "undetermined: gaps too short for the continuity condition"
    };
    TheoremReport {
        horizon: n,
        k_growing,
        epsilon_witness,
        gap_condition,
        beta: "k_m",
        prediction,
        rows,
    }
}

/// `∫ r_phi(L_n + 3)^-2 dphi` over `[phi_lo, phi_hi]` by composite Simpson
/// on `nodes` points (made odd), one EFGP run per node.
pub fn pearson_density_proxy<T: Scalar>(spec: &TreeSpec, phi_lo: T, phi_hi: T, n: usize, nodes: usize) -> Result<T> {
    if !(T::zero() < phi_lo && phi_lo < phi_hi && phi_hi < T::PI()) {
        return Err(Error::domain("phi", "interval must satisfy 0 < lo < hi < pi"));
    }
    let m = (nodes.max(3) - 1) / 2 * 2;
    let h = (phi_hi - phi_lo) / T::of_u64(m as u64);
    let mut sum = T::zero();
    for i in 0..=m {
        let phi = phi_lo + h * T::of_u64(i as u64);
        let run = efgp_run(spec, phi, EfgpInit::Phase(T::zero()), n)?;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum = sum + T::of(w) * (-(run.final_log_r() * T::of(2.0))).exp();
    }
    Ok(sum * h / T::of(3.0))
}

/// Largest denominator `q` of the excluded phases `p pi / q`.
pub const EXCLUDED_DENOMINATOR: u64 = 64;

/// Distance from `phi` to the nearest `p pi / q` with `q <= max_q`, and that
/// denominator.
pub fn nearest_rational_phase(phi: f64, max_q: u64) -> (f64, u64) {
    let x = phi / std::f64::consts::PI;
    (1..=max_q)
        .map(|q| {
            let p = (x * q as f64).round();
            ((x - p / q as f64).abs() * std::f64::consts::PI, q)
        })
        .fold((f64::INFINITY, 0), |best, c| if c.0 < best.0 { c } else { best })
}

/// `count` phases in `[lo, hi] ⊂ (0, pi)` from the golden-ratio Kronecker
/// sequence, skipping points within `margin` of a rational multiple of `pi`
/// with denominator at most [`EXCLUDED_DENOMINATOR`].
///
/// The statements about mean EFGP growth hold for almost every phase but
/// fail on resonant ones such as `pi/2` exactly; this is the stand-in for
/// "a generic phase".
pub fn generic_phases(count: usize, lo: f64, hi: f64, margin: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi < std::f64::consts::PI && lo < hi) {
        return Err(Error::domain("phi", "need 0 < lo < hi < pi"));
    }
    if !(margin >= 0.0) {
        return Err(Error::domain("margin", "must be non-negative"));
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        i += 1;
        if i > 1000 * (count as u64 + 1) {
            return Err(Error::domain("margin", "excludes almost every phase in the interval"));
        }
        let phi = lo + (hi - lo) * (i as f64 * golden).fract();
        if nearest_rational_phase(phi, EXCLUDED_DENOMINATOR).0 > margin {
            out.push(phi);
        }
    }
    Ok(out)
}

/// Largest truncation depth accepted by [`essential_spectrum_coverage`].
pub const COVERAGE_DEPTH_GUARD: u64 = 20_000;

/// Fraction of a 1000-point grid on `[-2, 2]` lying within `eps` of an
/// eigenvalue of the root-sector Jacobi matrix truncated at depth `depth`.
pub fn essential_spectrum_coverage<T: Scalar>(spec: &TreeSpec, depth: u64, eps: T) -> Result<T> {
    if depth > COVERAGE_DEPTH_GUARD {
        return Err(Error::SizeGuard {
            what: "root block depth",
            actual: depth.to_string(),
            limit: COVERAGE_DEPTH_GUARD,
        });
    }
    let block = block_coefficients::<T>(spec, 0, Variant::Adjacency)?.truncate(depth + 1)?;
    let off: Vec<T> = block.upper().iter().map(|e| e.2).collect();
    let eigs = tridiagonal_eigenvalues(block.diag(), &off)?;
    let grid = 1000usize;
    let hits = (0..grid)
        .filter(|&i| {
            let x = T::of(-2.0) + T::of(4.0) * T::of_u64(i as u64) / T::of_u64(grid as u64 - 1);
            let p = eigs.partition_point(|&v| v < x);
            let near = |idx: usize| eigs.get(idx).is_some_and(|&v| (v - x).abs() <= eps);
            near(p) || (p > 0 && near(p - 1))
        })
        .count();
    Ok(T::of_u64(hits as u64) / T::of_u64(grid as u64))
}
