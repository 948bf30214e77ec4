//! Transfer matrices of the three-term recursion
//! `a(j) u(j+1) + a(j-1) u(j-1) + b(j) u(j) = E u(j)`.
//!
//! `S_j` maps `(u(j), u(j-1))` to `(u(j+1), u(j))`; `T_j = S_j ... S_1`.
//! Long products are carried as a normalized matrix plus a log scale so that
//! thousands of bumps never overflow.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::scalar::Scalar;
use crate::tree::TreeSpec;

/// Real 2x2 matrix `[[a, b], [c, d]]` carrying its determinant.
///
/// Products multiply the tracked determinants instead of recomputing them,
/// so unimodularity survives cancellation in the entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
    det: T,
}

impl<T: Scalar> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self {
            m: [[a, b], [c, d]],
            det: a * d - b * c,
        }
    }

    /// A matrix whose determinant is known in closed form.
    pub fn with_det(a: T, b: T, c: T, d: T, det: T) -> Self {
        Self {
            m: [[a, b], [c, d]],
            det,
        }
    }

    pub fn identity() -> Self {
        Self::with_det(T::one(), T::zero(), T::zero(), T::one(), T::one())
    }

    pub fn det(&self) -> T {
        self.det
    }

    /// Determinant recomputed from the entries.
    pub fn computed_det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        let s = self.det.recip();
        Self::with_det(d * s, -b * s, -c * s, a * s, s)
    }

    pub fn scaled(&self, s: T) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::with_det(a * s, b * s, c * s, d * s, self.det * s * s)
    }

    pub fn max_abs(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    /// `(sigma_max, sigma_min)` from the closed 2x2 formula
    /// `sigma = |Q +- R|`; `sigma_min` is the difference, not `|det| / sigma_max`.
    pub fn singular_values(&self) -> (T, T) {
        let [[a, b], [c, d]] = self.m;
        let half = T::of(0.5);
        let q = ((a + d) * half).hypot((c - b) * half);
        let r = ((a - d) * half).hypot((c + b) * half);
        (q + r, (q - r).abs())
    }

    /// Operator 2-norm.
    pub fn norm(&self) -> T {
        self.singular_values().0
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Mat2<T>;

    fn mul(self, o: Mat2<T>) -> Mat2<T> {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = o.m;
        Mat2::with_det(
            a * e + b * g,
            a * f + b * h,
            c * e + d * g,
            c * f + d * h,
            self.det * o.det,
        )
    }
}

/// `exp(log_scale) * mat`, with `mat` renormalized whenever its entries
/// leave a safe window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMat2<T> {
    pub mat: Mat2<T>,
    pub log_scale: T,
}

impl<T: Scalar> ScaledMat2<T> {
    pub fn identity() -> Self {
        Self::from(Mat2::identity())
    }

    /// Entries beyond this magnitude trigger renormalization: `1e100`, or
    /// less for narrow scalar types.
    fn threshold() -> T {
        T::of(1e100).min(T::max_value().cbrt())
    }

    fn renormalize(&mut self) {
        let m = self.mat.max_abs();
        let t = Self::threshold();
        if m > t || (m > T::zero() && m < t.recip()) {
            self.mat = self.mat.scaled(m.recip());
            self.log_scale = self.log_scale + m.ln();
        }
    }

    /// `self <- s * self`.
    pub fn push(&mut self, s: &Mat2<T>) {
        self.mat = *s * self.mat;
        self.renormalize();
    }

    /// `log |det|`.
    pub fn log_abs_det(&self) -> T {
        self.mat.det().abs().ln() + self.log_scale * T::of(2.0)
    }

    pub fn log_norm(&self) -> T {
        self.mat.norm().ln() + self.log_scale
    }

    /// `(log sigma_max, log sigma_min)`.
    pub fn log_singular_values(&self) -> (T, T) {
        let (hi, lo) = self.mat.singular_values();
        (hi.ln() + self.log_scale, lo.ln() + self.log_scale)
    }

    /// The plain matrix, if representable.
    pub fn to_mat2(&self) -> Mat2<T> {
        self.mat.scaled(self.log_scale.exp())
    }
}

impl<T: Scalar> From<Mat2<T>> for ScaledMat2<T> {
    fn from(mat: Mat2<T>) -> Self {
        let mut s = Self {
            mat,
            log_scale: T::zero(),
        };
        s.renormalize();
        s
    }
}

/// `S_j(E)`, `j >= 1`.
pub fn step_matrix<T: Scalar>(jac: &JacobiCoefficients<T>, j: u64, energy: T) -> Mat2<T> {
    let (a, a_prev) = (jac.a(j), jac.a(j - 1));
    Mat2::with_det((energy - jac.b(j)) / a, -a_prev / a, T::one(), T::zero(), a_prev / a)
}

/// `T_{j1} T_{j2}^{-1} = S_{j1} ... S_{j2+1}`; the identity when `j1 == j2`.
pub fn transfer_product<T: Scalar>(jac: &JacobiCoefficients<T>, j1: u64, j2: u64, energy: T) -> Result<ScaledMat2<T>> {
    if j1 < j2 {
        return Err(Error::domain("j1", "must not be below j2"));
    }
    let mut t = ScaledMat2::identity();
    for j in j2 + 1..=j1 {
        t.push(&step_matrix(jac, j, energy));
    }
    Ok(t)
}

/// `T_j(E) = S_j ... S_1`.
pub fn transfer_matrix<T: Scalar>(jac: &JacobiCoefficients<T>, j: u64, energy: T) -> ScaledMat2<T> {
    transfer_product(jac, j, 0, energy).expect("j >= 0")
}

/// The two-step transfer across a bump of height `rho`:
/// `[[E^2/rho - rho, -E/rho], [E/rho, -1/rho]]`, unimodular.
pub fn bump_matrix<T: Scalar>(rho: T, energy: T) -> Result<Mat2<T>> {
    if !(rho > T::zero()) {
        return Err(Error::domain("rho", "bump height must be positive"));
    }
    let e = energy;
    Ok(Mat2::with_det(
        e * e / rho - rho,
        -e / rho,
        e / rho,
        -rho.recip(),
        T::one(),
    ))
}

/// Initial data at sites 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData<T> {
    /// `u(0) = 0`, `u(1) = 1`.
    Dirichlet,
    /// `u(0) = 1`, `u(1) = 0`.
    Neumann,
    /// `(u(0), u(1))`.
    Values(T, T),
}

/// `u(0), ..., u(len - 1)` by the three-term recursion.
pub fn solve_u<T: Scalar>(jac: &JacobiCoefficients<T>, energy: T, len: usize, init: InitialData<T>) -> Result<Vec<T>> {
    if len < 2 {
        return Err(Error::domain("len", "need at least two sites"));
    }
    let (u0, u1) = match init {
        InitialData::Dirichlet => (T::zero(), T::one()),
        InitialData::Neumann => (T::one(), T::zero()),
        InitialData::Values(u0, u1) => (u0, u1),
    };
    let mut u = Vec::with_capacity(len);
    u.push(u0);
    u.push(u1);
    for j in 1..len as u64 - 1 {
        let j_us = j as usize;
        let next = ((energy - jac.b(j)) * u[j_us] - jac.a(j - 1) * u[j_us - 1]) / jac.a(j);
        u.push(next);
    }
    Ok(u)
}

/// Interpolated norm `(sum_{j <= [L]} u(j)^2 + (L - [L]) u([L] + 1)^2)^(1/2)`;
/// `u[j]` holds `u(j)`, `u[0]` is ignored.
pub fn norm_l<T: Scalar>(u: &[T], length: T) -> Result<T> {
    masked_norm(u, length, |_| true)
}

/// As [`norm_l`] but skipping every site `L_n + 2`.
pub fn norm_l_script<T: Scalar>(u: &[T], length: T, spec: &TreeSpec) -> Result<T> {
    let skip: Vec<u64> = spec.l_small().iter().filter_map(|l| l.checked_add(2)).collect();
    masked_norm(u, length, |j| skip.binary_search(&j).is_err())
}

fn masked_norm<T: Scalar>(u: &[T], length: T, keep: impl Fn(u64) -> bool) -> Result<T> {
    if !(length >= T::one()) {
        return Err(Error::domain("L", "must be at least 1"));
    }
    let whole = length.floor();
    let n = whole.to_usize().ok_or_else(|| Error::domain("L", "too large"))?;
    let frac = length - whole;
    let needed = if frac > T::zero() { n + 2 } else { n + 1 };
    if u.len() < needed {
        return Err(Error::DimensionMismatch(format!(
            "norm to L needs {needed} sites, have {}",
            u.len()
        )));
    }
    let mut sum = (1..=n)
        .filter(|&j| keep(j as u64))
        .map(|j| u[j] * u[j])
        .fold(T::zero(), |s, x| s + x);
    if frac > T::zero() && keep(n as u64 + 1) {
        sum = sum + frac * u[n + 1] * u[n + 1];
    }
    Ok(sum.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimonStolz<T> {
    /// `sum_{j <= Jmax, a(j) = 1} ||T_j||^-2`.
    pub sum: T,
    pub terms: u64,
    /// Log-log slope of the partial sums over `[Jmax/10, Jmax]`; 1 for linear
    /// growth, near 0 when the series converges. `None` for `Jmax < 20`.
    pub growth_exponent: Option<T>,
}

pub fn simon_stolz_sum<T: Scalar>(jac: &JacobiCoefficients<T>, energy: T, jmax: u64) -> Result<SimonStolz<T>> {
    if jmax < 1 {
        return Err(Error::domain("Jmax", "must be at least 1"));
    }
    let mut t = ScaledMat2::identity();
    let mut sum = T::zero();
    let mut terms = 0;
    let mut partial = Vec::with_capacity(jmax as usize);
    for j in 1..=jmax {
        t.push(&step_matrix(jac, j, energy));
        if jac.a(j) == T::one() {
            sum = sum + (-(t.log_norm() * T::of(2.0))).exp();
            terms += 1;
        }
        partial.push(sum);
    }
    let growth_exponent = (jmax >= 20).then(|| {
        let lo = (jmax / 10).max(1);
        let pts: Vec<(T, T)> = (0..=50u64)
            .map(|i| lo + (jmax - lo) * i / 50)
            .filter(|&j| partial[j as usize - 1] > T::zero())
            .map(|j| (T::of_u64(j).ln(), partial[j as usize - 1].ln()))
            .collect();
        ols_slope(&pts)
    });
    Ok(SimonStolz {
        sum,
        terms,
        growth_exponent,
    })
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope<T: Scalar>(pts: &[(T, T)]) -> T {
    let n = T::of_u64(pts.len() as u64);
    let mx = pts.iter().map(|p| p.0).fold(T::zero(), |a, b| a + b) / n;
    let my = pts.iter().map(|p| p.1).fold(T::zero(), |a, b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for &(x, y) in pts {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// `min_i ||T_{m_i, l_i}(E)|| / a(l_i)`, a finite stand-in for the liminf
/// whose finiteness locates the absolutely continuous support.
pub fn last_simon_indicator<T: Scalar>(
    jac: &JacobiCoefficients<T>,
    energy: T,
    checkpoints: &[(u64, u64)],
) -> Result<T> {
    if checkpoints.is_empty() {
        return Err(Error::domain("checkpoints", "need at least one (m, l) pair"));
    }
    let mut best = T::infinity();
    for &(m, l) in checkpoints {
        if m <= l {
            return Err(Error::domain("checkpoints", "need m > l"));
        }
        let t = transfer_product(jac, m, l, energy)?;
        best = best.min((t.log_norm() - jac.a(l).ln()).exp());
    }
    Ok(best)
}

/// Initial direction generating the solution that grows least up to a
/// checkpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubordinateDirection<T> {
    /// Unit right singular vector of the minimal singular value, as
    /// `(u(1), u(0))`.
    pub vector: [T; 2],
    pub log_sigma_max: T,
    pub log_sigma_min: T,
    /// The singular values coincide; `vector` is then arbitrary.
    pub isotropic: bool,
}

impl<T: Scalar> SubordinateDirection<T> {
    pub fn sigma_product(&self) -> T {
        (self.log_sigma_max + self.log_sigma_min).exp()
    }
}

pub fn subordinate_direction<T: Scalar>(t: &ScaledMat2<T>) -> SubordinateDirection<T> {
    let m = t.mat.scaled(t.mat.max_abs().recip());
    let (hi, lo) = m.singular_values();
    let [[a, b], [c, d]] = m.m;
    // Principal axis of M^T M: angle of the largest eigenvector.
    let p = a * a + c * c;
    let s = b * b + d * d;
    let q = a * b + c * d;
    let angle = (q * T::of(2.0)).atan2(p - s) * T::of(0.5);
    let isotropic = hi - lo <= T::epsilon() * T::of(64.0) * hi;
    let shift = (t.mat.max_abs()).ln() + t.log_scale;
    SubordinateDirection {
        vector: [-angle.sin(), angle.cos()],
        log_sigma_max: hi.ln() + shift,
        log_sigma_min: lo.ln() + shift,
        isotropic,
    }
}
