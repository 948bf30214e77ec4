//! EFGP (modified Prüfer) variables and the fast bump-to-bump dynamics.
//!
//! At energy `E = 2 cos(phi)` a solution is described at site `j` by
//! `r cos(theta) = u(j) - cos(phi) u(j-1)` and `r sin(theta) = sin(phi) u(j-1)`.
//! Where the recursion is free, `r` is constant and `theta` advances by
//! `phi` per site, so a gap of any size costs one phase reduction. A
//! branching of degree `k` at generation `L` puts `a(L + 1) = sqrt(k)` into
//! the root sector, and the two steps across it are the bump matrix.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};

use crate::error::{Error, Result};
use crate::phase::{reduce_2pi, PhaseReducer};
use crate::scalar::Scalar;
use crate::transfer::{bump_matrix, Mat2, ScaledMat2};
use crate::tree::TreeSpec;

fn check_phi<T: Scalar>(phi: T) -> Result<()> {
    if phi > T::zero() && phi < T::PI() {
        Ok(())
    } else {
        Err(Error::domain("phi", "must lie in (0, pi)"))
    }
}

/// `(r, theta)` of the pair `(u(j), u(j-1))`, `theta` in `[0, 2pi)`.
pub fn efgp_frame<T: Scalar>(uj: T, uprev: T, phi: T) -> (T, T) {
    let x = uj - phi.cos() * uprev;
    let y = phi.sin() * uprev;
    let theta = T::of(reduce_2pi(y.atan2(x).as_f64()));
    (x.hypot(y), theta)
}

/// `(u(j), u(j-1))` from `(r, theta)`.
pub fn efgp_inverse<T: Scalar>(r: T, theta: T, phi: T) -> (T, T) {
    let s = phi.sin();
    (r * (phi + theta).sin() / s, r * theta.sin() / s)
}

/// EFGP variables of a sampled solution; index `j` of each vector is site
/// `j` (entry 0 is unused and set to `NaN`).
#[derive(Clone, Debug, PartialEq)]
pub struct EfgpSeries<T> {
    pub r: Vec<T>,
    pub theta: Vec<T>,
}

pub fn efgp_transform<T: Scalar>(u: &[T], phi: T) -> Result<EfgpSeries<T>> {
    check_phi(phi)?;
    let mut r = vec![T::nan()];
    let mut theta = vec![T::nan()];
    for j in 1..u.len() {
        if u[j] == T::zero() && u[j - 1] == T::zero() {
            return Err(Error::domain("u", format!("vanishes at sites {} and {j}", j - 1)));
        }
        let (rj, tj) = efgp_frame(u[j], u[j - 1], phi);
        r.push(rj);
        theta.push(tj);
    }
    Ok(EfgpSeries { r, theta })
}

/// `r(after)^2 / r(before)^2 = A + B cos(2 theta) + C sin(2 theta)` across a
/// bump of degree `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpABC<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> BumpABC<T> {
    pub fn ratio_sq(&self, theta: T) -> T {
        let t2 = theta * T::of(2.0);
        self.a + self.b * t2.cos() + self.c * t2.sin()
    }

    /// `A^2 - B^2 - C^2`, identically 1.
    pub fn unimodularity(&self) -> T {
        self.a * self.a - self.b * self.b - self.c * self.c
    }
}

/// Applies the bump matrix to the unit-`r` frame at phase `theta`; returns
/// `(r, theta)` after the bump.
fn cross_bump<T: Scalar>(bump: &Mat2<T>, theta: T, phi: T) -> (T, T) {
    let (uj, uprev) = efgp_inverse(T::one(), theta, phi);
    let [x, y] = bump.apply([uj, uprev]);
    efgp_frame(x, y, phi)
}

/// `A` in closed form, `B` and `C` fitted from the bump map at phases
/// `0`, `pi/4`, `pi/2`.
pub fn bump_coefficients<T: Scalar>(k: u64, phi: T) -> Result<BumpABC<T>> {
    check_phi(phi)?;
    if k < 2 {
        return Err(Error::domain("k", "must be at least 2"));
    }
    let kk = T::of_u64(k);
    let (s, c) = phi.sin_cos();
    let a = ((T::one() + kk * kk) / (kk * T::of(2.0)) - c * c) / (s * s);
    let bump = bump_matrix(kk.sqrt(), c * T::of(2.0))?;
    let f = |theta: T| {
        let r = cross_bump(&bump, theta, phi).0;
        r * r
    };
    let f0 = f(T::zero());
    let f45 = f(T::FRAC_PI_4());
    let f90 = f(T::FRAC_PI_2());
    let b = (f0 - f90) * T::of(0.5);
    let cc = f45 - (f0 + f90) * T::of(0.5);
    Ok(BumpABC { a, b, c: cc })
}

/// Starting point of an EFGP run at site 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EfgpInit<T> {
    /// `r(1) = 1`, `theta(1) = theta0`. `theta0 = 0` is Dirichlet data.
    Phase(T),
    /// Dirichlet solution of the operator with root boundary condition
    /// `rho`; equivalent to `u(0) = -tan(rho)`, `u(1) = 1`.
    Boundary(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<T> {
    pub n: usize,
    /// `L_n`; the start of the run is recorded as `n = 0` with `L_0 = -2`,
    /// so that `L_0 + 3` is site 1.
    pub l: BigInt,
    /// `log r(L_n + 1)` and `theta(L_n + 1)`, just before the bump.
    pub log_r_entry: T,
    pub theta_entry: T,
    /// `log r(L_n + 3)` and `theta(L_n + 3)`, just after it.
    pub log_r: T,
    pub theta: T,
    /// `Y_n = log r(L_n + 3) - log r(L_n + 1)`.
    pub y: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfgpTrajectory<T> {
    pub phi: T,
    pub k: Vec<u64>,
    pub checkpoints: Vec<Checkpoint<T>>,
}

/// Formats a float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl<T: Scalar> EfgpTrajectory<T> {
    pub const CSV_HEADER: &'static str = "n,L_n,log_r,theta,Y_n";

    pub fn ys(&self) -> impl Iterator<Item = T> + '_ {
        self.checkpoints.iter().skip(1).map(|c| c.y)
    }

    pub fn final_log_r(&self) -> T {
        self.checkpoints.last().map_or(T::zero(), |c| c.log_r)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for c in &self.checkpoints {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.n,
                c.l,
                fmt_float(c.log_r.as_f64()),
                fmt_float(c.theta.as_f64()),
                fmt_float(c.y.as_f64())
            );
        }
        out
    }
}

/// Free-run lengths between bumps: `L_1`, then `L_n - L_{n-1} - 2`.
pub fn free_runs(spec: &TreeSpec, n_bumps: usize) -> Result<Vec<BigUint>> {
    if n_bumps > spec.horizon() {
        return Err(Error::domain(
            "N",
            format!("{n_bumps} bumps requested, tree has {}", spec.horizon()),
        ));
    }
    let l = spec.l();
    let mut runs = Vec::with_capacity(n_bumps);
    for n in 0..n_bumps {
        if n == 0 {
            runs.push(l[0].clone());
        } else {
            let gap = &l[n] - &l[n - 1];
            if gap < BigUint::from(2u32) {
                return Err(Error::domain(
                    "L",
                    format!("gap L_{} - L_{} < 2 makes consecutive bumps overlap", n + 1, n),
                ));
            }
            runs.push(gap - 2u32);
        }
    }
    Ok(runs)
}

/// A phase reducer able to advance across every run of the first `n_bumps`.
pub fn reducer_for<T: Scalar>(spec: &TreeSpec, phi: T, n_bumps: usize) -> Result<PhaseReducer> {
    let bits = free_runs(spec, n_bumps)?.iter().map(BigUint::bits).max().unwrap_or(0);
    PhaseReducer::from_radians(phi.as_f64(), bits + 1)
}

/// Runs the EFGP dynamics of the root-sector solution across the first
/// `n_bumps` bumps. Cost is linear in `n_bumps` and independent of `L_N`.
pub fn efgp_run<T: Scalar>(spec: &TreeSpec, phi: T, init: EfgpInit<T>, n_bumps: usize) -> Result<EfgpTrajectory<T>> {
    check_phi(phi)?;
    let reducer = reducer_for(spec, phi, n_bumps)?;
    efgp_run_with(spec, &reducer, init, n_bumps)
}

/// As [`efgp_run`] with a caller-supplied reducer; its `phi` is used.
pub fn efgp_run_with<T: Scalar>(
    spec: &TreeSpec,
    reducer: &PhaseReducer,
    init: EfgpInit<T>,
    n_bumps: usize,
) -> Result<EfgpTrajectory<T>> {
    let phi = T::of(reducer.phi());
    check_phi(phi)?;
    let runs = free_runs(spec, n_bumps)?;
    let energy = phi.cos() * T::of(2.0);

    let (log_r0, theta0) = match init {
        EfgpInit::Phase(t) => (T::zero(), T::of(reduce_2pi(t.as_f64()))),
        EfgpInit::Boundary(rho) => {
            if !(rho.abs() < T::FRAC_PI_2()) {
                return Err(Error::domain("rho", "must lie in (-pi/2, pi/2)"));
            }
            let (r, t) = efgp_frame(T::one(), -rho.tan(), phi);
            (r.ln(), t)
        }
    };
    let mut checkpoints = Vec::with_capacity(n_bumps + 1);
    checkpoints.push(Checkpoint {
        n: 0,
        l: BigInt::from(-2),
        log_r_entry: log_r0,
        theta_entry: theta0,
        log_r: log_r0,
        theta: theta0,
        y: T::zero(),
    });
    let (mut log_r, mut theta) = (log_r0, theta0);
    let mut bumps: Vec<(u64, Mat2<T>)> = Vec::new();
    for (n, run) in runs.iter().enumerate() {
        let k = spec.k()[n];
        let bump = match bumps.iter().find(|b| b.0 == k) {
            Some(b) => b.1,
            None => {
                let m = bump_matrix(T::of_u64(k).sqrt(), energy)?;
                bumps.push((k, m));
                m
            }
        };
        theta = T::of(reducer.advance(theta.as_f64(), run)?);
        let (log_entry, theta_entry) = (log_r, theta);
        let (r, t) = cross_bump(&bump, theta, phi);
        let y = r.ln();
        log_r = log_r + y;
        theta = t;
        checkpoints.push(Checkpoint {
            n: n + 1,
            l: BigInt::from(spec.l()[n].clone()),
            log_r_entry: log_entry,
            theta_entry,
            log_r,
            theta,
            y,
        });
    }
    Ok(EfgpTrajectory {
        phi,
        k: spec.k()[..n_bumps].to_vec(),
        checkpoints,
    })
}

/// `S^G` for the free step `S = [[E, -1], [1, 0]]` with `E = 2 cos(phi)`:
/// `[[U_G, -U_{G-1}], [U_{G-1}, -U_{G-2}]]`, `U_m = sin((m+1) phi) / sin(phi)`.
pub fn free_power<T: Scalar>(reducer: &PhaseReducer, g: &BigUint) -> Result<Mat2<T>> {
    let phi = T::of(reducer.phi());
    let alpha = T::of(reducer.reduce_angle(g)?);
    let s = phi.sin();
    let u_g = (alpha + phi).sin() / s;
    let u_g1 = alpha.sin() / s;
    let u_g2 = (alpha - phi).sin() / s;
    Ok(Mat2::with_det(u_g, -u_g1, u_g1, -u_g2, T::one()))
}

/// `T_{L_n + 2}(E)` of the root sector for `n = 1..=n_bumps`, built from
/// free powers and bump matrices without visiting individual sites.
pub fn sparse_transfer<T: Scalar>(
    spec: &TreeSpec,
    reducer: &PhaseReducer,
    n_bumps: usize,
) -> Result<Vec<ScaledMat2<T>>> {
    let phi = T::of(reducer.phi());
    check_phi(phi)?;
    let energy = phi.cos() * T::of(2.0);
    let runs = free_runs(spec, n_bumps)?;
    let mut t = ScaledMat2::identity();
    let mut out = Vec::with_capacity(n_bumps);
    for (n, run) in runs.iter().enumerate() {
        t.push(&free_power(reducer, run)?);
        t.push(&bump_matrix(T::of_u64(spec.k()[n]).sqrt(), energy)?);
        out.push(t);
    }
    Ok(out)
}

/// `log` of the EFGP radius of `T v`, for a scaled matrix `T`.
pub fn log_efgp_radius<T: Scalar>(t: &ScaledMat2<T>, v: [T; 2], phi: T) -> T {
    let [x, y] = t.mat.apply(v);
    efgp_frame(x, y, phi).0.ln() + t.log_scale
}

/// Sites of a spec that are all below `limit`; used by site-by-site oracles.
pub fn max_site(spec: &TreeSpec, n_bumps: usize) -> Option<u64> {
    if n_bumps == 0 {
        return Some(1);
    }
    spec.l_u64(n_bumps)?.checked_add(3)
}
