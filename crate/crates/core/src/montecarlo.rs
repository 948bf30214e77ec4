//! Monte Carlo estimate of the EFGP growth exponent over the random
//! ensemble `Γ^ω_{k,γ}`.
//!
//! Trial `t` samples its tree from the ChaCha stream `t` of the run seed, so
//! results do not depend on how trials are scheduled across threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::bigmath::Gamma;
use crate::efgp::{efgp_run, EfgpInit};
use crate::error::{Error, Result};
use crate::spectral::z_exponent;
use crate::transfer::ols_slope;
use crate::tree::sample_omega_tree_stream;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    pub k: u64,
    pub gamma: String,
    pub phi: f64,
    pub trials: usize,
    pub n_bumps: usize,
    /// Mean of `Y_n` over all trials and bumps.
    pub mean_y: f64,
    /// `sd(Y) / sqrt(trials * N)`; `None` with fewer than two samples.
    pub stderr: Option<f64>,
    /// Closed-form prediction for the mean.
    pub z: f64,
    /// `(mean_y - z) / stderr`.
    pub z_score: Option<f64>,
    /// Least-squares slope of `log r(L_n + 3)` on `n log γ`, fitted on the
    /// whole run and averaged over trials.
    pub slope: f64,
    /// `z / log γ`, the slope's target.
    pub slope_target: f64,
    /// Spread of the per-trial slopes, over `sqrt(trials)`.
    pub slope_stderr: Option<f64>,
    /// Root-mean-square residual of the per-trial fits, averaged.
    pub residual: f64,
    /// Omega redraws spent on small-n repairs, summed over trials.
    pub redraws: u64,
}

impl ExponentReport {
    /// `|mean - Z| <= sigmas * stderr`.
    pub fn mean_within(&self, sigmas: f64) -> bool {
        self.stderr.is_some_and(|s| (self.mean_y - self.z).abs() <= sigmas * s)
    }

    /// `|slope / target - 1| <= rel`.
    pub fn slope_within(&self, rel: f64) -> bool {
        (self.slope / self.slope_target - 1.0).abs() <= rel
    }
}

struct Trial {
    ys: Vec<f64>,
    slope: f64,
    residual: f64,
    redraws: u64,
}

fn fit(log_r: &[(f64, f64)]) -> (f64, f64) {
    if log_r.len() < 2 {
        return (f64::NAN, 0.0);
    }
    let slope = ols_slope(log_r);
    let n = log_r.len() as f64;
    let (mx, my) = (
        log_r.iter().map(|p| p.0).sum::<f64>() / n,
        log_r.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let rms = (log_r
        .iter()
        .map(|&(x, y)| {
            let e = y - my - slope * (x - mx);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

fn sd(xs: impl Iterator<Item = f64> + Clone) -> Option<f64> {
    let n = xs.clone().count();
    if n < 2 {
        return None;
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    Some((xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt())
}

pub fn mc_exponent(
    k: u64,
    gamma: &Gamma,
    phi: f64,
    n_bumps: usize,
    trials: usize,
    seed: u64,
) -> Result<ExponentReport> {
    if !gamma.exceeds(2) {
        return Err(Error::domain("gamma", "must exceed 2"));
    }
    if trials == 0 || n_bumps == 0 {
        return Err(Error::domain("trials", "need at least one trial and one bump"));
    }
    let z = z_exponent(phi, k)?;
    let log_gamma = gamma.to_f64().ln();
    let runs: Vec<Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (sample, spec) = sample_omega_tree_stream(k, gamma, n_bumps, seed, t)?;
            let run = efgp_run(&spec, phi, EfgpInit::Phase(0.0), n_bumps)?;
            let pts: Vec<(f64, f64)> = run.checkpoints[1..]
                .iter()
                .map(|c| (c.n as f64 * log_gamma, c.log_r))
                .collect();
            let (slope, residual) = fit(&pts);
            Ok(Trial {
                ys: run.ys().collect(),
                slope,
                residual,
                redraws: sample.redraws,
            })
        })
        .collect::<Result<_>>()?;

    let all = runs.iter().flat_map(|t| t.ys.iter().copied());
    let count = runs.iter().map(|t| t.ys.len()).sum::<usize>();
    let mean_y = all.clone().sum::<f64>() / count as f64;
    let stderr = sd(all).map(|s| s / (count as f64).sqrt());
    let slopes = runs.iter().map(|t| t.slope).filter(|s| s.is_finite());
    let slope = slopes.clone().sum::<f64>() / slopes.clone().count().max(1) as f64;
    let slope_stderr = sd(slopes).map(|s| s / (trials as f64).sqrt());
    Ok(ExponentReport {
        k,
        gamma: gamma.to_string(),
        phi,
        trials,
        n_bumps,
        mean_y,
        stderr,
        z,
        z_score: stderr.map(|s| (mean_y - z) / s),
        slope: if n_bumps >= 2 { slope } else { f64::NAN },
        slope_target: z / log_gamma,
        slope_stderr,
        residual: runs.iter().map(|t| t.residual).sum::<f64>() / trials as f64,
        redraws: runs.iter().map(|t| t.redraws).sum(),
    })
}
