//! Subcommand dispatch.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bigmath::{big_ln, Gamma};
use crate::efgp::{efgp_run, fmt_float, EfgpInit, EfgpTrajectory};
use crate::jacobi::{verify_decomposition, DecompositionPlan, DecompositionReport, Variant};
use crate::montecarlo::{mc_exponent, ExponentReport};
use crate::operator::{apply_root_boundary, assemble_delta, assemble_delta_tilde, eigenvalues_sym, SymOperator};
use crate::spectral::{classify, interval_i, theorem_classifier, PhasePoint, TheoremReport};
use crate::tree::{ball_count, sample_omega_tree, theoretical_dimension, validate, Family, FamilyTag, TreeSpec};

use super::config::{missing, Format, RunConfig, Subcommand, VariantChoice};
use super::emit::{csv_bytes, to_json_bytes};
use super::CliError;

/// A finished run: the validated config and the subcommand's payload.
#[derive(Clone, Debug)]
pub struct Report {
    pub subcommand: Subcommand,
    pub config: RunConfig,
    pub payload: Payload,
}

#[derive(Clone, Debug)]
pub enum Payload {
    TreeStats(TreeStats),
    Decompose(Decomposition),
    Spectrum(Spectrum),
    EfgpRun(EfgpTrajectory<f64>),
    PhaseDiagram(PhaseDiagram),
    McExponent(Vec<ExponentReport>),
    ClassifyTheorems(TheoremReport),
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeRow {
    pub n: usize,
    #[serde(rename = "L_n")]
    pub l: String,
    pub k_n: u64,
    /// `L_{n+1} - L_n`; absent for the last branching.
    pub gap: Option<String>,
    /// `#S(L_n)`, when `L_n` fits in 64 bits.
    pub ball_count: Option<String>,
    /// `log #S(L_n) / log L_n`.
    pub dimension_estimate: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeStats {
    pub family: FamilyTag,
    pub horizon: usize,
    pub sparse: bool,
    pub normal: bool,
    pub monotone: bool,
    pub theoretical_dimension: Option<f64>,
    pub omega: Option<Vec<i64>>,
    /// `gamma > 2` for the random family.
    pub hypothesis_holds: Option<bool>,
    pub rows: Vec<TreeRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub reports: Vec<DecompositionReport>,
    pub plan: crate::jacobi::PlanSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub variant: Variant,
    #[serde(rename = "D")]
    pub depth: u64,
    pub rho: f64,
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseDiagram {
    pub k: u64,
    pub gamma: String,
    /// Right endpoint of the singular continuous window, if nonempty.
    pub endpoint: Option<f64>,
    pub points: Vec<PhasePoint<f64>>,
}

fn tree_spec(cfg: &RunConfig) -> Result<TreeSpec, CliError> {
    Ok(cfg.tree_record()?.to_spec()?)
}

fn gamma(cfg: &RunConfig) -> Result<Gamma, CliError> {
    Ok(cfg.gamma.as_deref().ok_or_else(|| missing("gamma"))?.parse()?)
}

fn finite(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Validation(format!("invalid {field}: must be finite")))
    }
}

fn tree_stats(cfg: &RunConfig) -> Result<TreeStats, CliError> {
    let record = cfg.tree_record()?;
    let (spec, omega) = if record.family == FamilyTag::Omega {
        let n = cfg.n.ok_or_else(|| missing("N"))?;
        let seed = cfg.seed.ok_or_else(|| missing("seed"))?;
        let (sample, spec) = sample_omega_tree(cfg.constant_k()?, &gamma(cfg)?, n, seed)?;
        (spec, Some(sample))
    } else {
        (record.to_spec()?, None)
    };
    let v = validate(&spec);
    let theoretical = match spec.family() {
        Family::Gamma { k, gamma } | Family::Omega { k, gamma, .. } => Some(theoretical_dimension(*k, gamma.to_f64())?),
        Family::Explicit => None,
    };
    let gaps = spec.gaps();
    let rows = (0..spec.horizon())
        .map(|i| {
            let l = &spec.l()[i];
            let ball = l.to_u64().map(|r| ball_count(&spec, r).count);
            let dimension_estimate = match (&ball, l.to_u64()) {
                (Some(c), Some(r)) if r >= 2 => Some(big_ln(c) / (r as f64).ln()),
                _ => None,
            };
            TreeRow {
                n: i + 1,
                l: l.to_string(),
                k_n: spec.k()[i],
                gap: gaps.get(i).map(BigUint::to_string),
                ball_count: ball.map(|c| c.to_string()),
                dimension_estimate,
            }
        })
        .collect();
    Ok(TreeStats {
        family: record.family,
        horizon: v.horizon,
        sparse: v.sparse,
        normal: v.normal,
        monotone: v.monotone,
        theoretical_dimension: theoretical,
        hypothesis_holds: omega.as_ref().map(|o| o.hypothesis_holds),
        omega: omega.map(|o| o.omega),
        rows,
    })
}

fn decompose(cfg: &RunConfig) -> Result<Decomposition, CliError> {
    let spec = tree_spec(cfg)?;
    let depth = cfg.depth.ok_or_else(|| missing("D"))?;
    let variants = cfg.variant.unwrap_or(VariantChoice::Both).variants();
    let reports = variants
        .iter()
        .map(|&v| verify_decomposition(&spec, depth, v))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = DecompositionPlan::new(&spec, depth, variants[0])?.summary();
    Ok(Decomposition { reports, plan })
}

fn spectrum(cfg: &RunConfig) -> Result<Spectrum, CliError> {
    let spec = tree_spec(cfg)?;
    let depth = cfg.depth.ok_or_else(|| missing("D"))?;
    let variant = match cfg.variant.unwrap_or(VariantChoice::Delta) {
        VariantChoice::Delta => Variant::Adjacency,
        VariantChoice::DeltaTilde => Variant::Laplacian,
        VariantChoice::Both => {
            return Err(CliError::Validation(
                "invalid variant: spectrum needs delta or delta-tilde".into(),
            ))
        }
    };
    let op: SymOperator<f64> = match variant {
        Variant::Adjacency => assemble_delta(&spec, depth)?,
        Variant::Laplacian => assemble_delta_tilde(&spec, depth)?,
    };
    let rho = finite("rho", cfg.rho.unwrap_or(0.0))?;
    let op = apply_root_boundary(&op, rho)?;
    if op.dimension() > crate::eigen::DENSE_GUARD && !op.is_tridiagonal() {
        return Err(CliError::Guard(format!(
            "dense eigensolve dimension = {} > {}",
            op.dimension(),
            crate::eigen::DENSE_GUARD
        )));
    }
    Ok(Spectrum {
        variant,
        depth,
        rho,
        dimension: op.dimension(),
        eigenvalues: eigenvalues_sym(&op)?,
    })
}

fn efgp(cfg: &RunConfig) -> Result<EfgpTrajectory<f64>, CliError> {
    let spec = tree_spec(cfg)?;
    let phi = finite("phi", cfg.phi.ok_or_else(|| missing("phi"))?)?;
    let init = match (cfg.rho, cfg.theta0) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "invalid rho: give either rho or theta0, not both".into(),
            ))
        }
        (Some(rho), None) => EfgpInit::Boundary(finite("rho", rho)?),
        (None, t) => EfgpInit::Phase(finite("theta0", t.unwrap_or(0.0))?),
    };
    let bumps = cfg.bumps.unwrap_or(spec.horizon());
    Ok(efgp_run(&spec, phi, init, bumps)?)
}

fn phase_diagram(cfg: &RunConfig) -> Result<PhaseDiagram, CliError> {
    let k = cfg.constant_k()?;
    let g = gamma(cfg)?;
    let grid = cfg.e_grid.ok_or_else(|| missing("E_grid"))?;
    if grid.points == 0 || !grid.min.is_finite() || !grid.max.is_finite() || grid.min > grid.max {
        return Err(CliError::Validation(
            "invalid E_grid: need min <= max and points >= 1".into(),
        ));
    }
    let gf = g.to_f64();
    let points = grid
        .values()
        .into_iter()
        .map(|e| classify(e, k, gf))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhaseDiagram {
        k,
        gamma: g.to_string(),
        endpoint: interval_i(k, gf)?,
        points,
    })
}

fn mc(cfg: &RunConfig) -> Result<Vec<ExponentReport>, CliError> {
    if let Some(f) = cfg.family {
        if f != FamilyTag::Omega {
            return Err(CliError::Validation(
                "invalid family: mc-exponent samples the omega family".into(),
            ));
        }
    }
    let k = cfg.constant_k()?;
    let g = gamma(cfg)?;
    let phis = match (&cfg.phis, cfg.phi) {
        (Some(p), _) if !p.is_empty() => p.clone(),
        (_, Some(p)) => vec![p],
        _ => return Err(missing("phi")),
    };
    let bumps = cfg.bumps.unwrap_or(2000);
    let trials = cfg.trials.unwrap_or(20);
    let seed = cfg.seed.unwrap_or(0);
    phis.iter()
        .map(|&phi| Ok(mc_exponent(k, &g, finite("phi", phi)?, bumps, trials, seed)?))
        .collect()
}

/// Validates `cfg` and runs its subcommand.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let subcommand = cfg.subcommand.ok_or_else(|| missing("subcommand"))?;
    let payload = match subcommand {
        Subcommand::TreeStats => Payload::TreeStats(tree_stats(cfg)?),
        Subcommand::Decompose => Payload::Decompose(decompose(cfg)?),
        Subcommand::Spectrum => Payload::Spectrum(spectrum(cfg)?),
        Subcommand::EfgpRun => Payload::EfgpRun(efgp(cfg)?),
        Subcommand::PhaseDiagram => Payload::PhaseDiagram(phase_diagram(cfg)?),
        Subcommand::McExponent => Payload::McExponent(mc(cfg)?),
        Subcommand::ClassifyTheorems => Payload::ClassifyTheorems(theorem_classifier(&tree_spec(cfg)?)),
    };
    Ok(Report {
        subcommand,
        config: cfg.clone(),
        payload,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

impl Payload {
    pub fn to_json(&self) -> Value {
        let v = match self {
            Payload::TreeStats(p) => serde_json::to_value(p),
            Payload::Decompose(p) => serde_json::to_value(p),
            Payload::Spectrum(p) => serde_json::to_value(p),
            Payload::EfgpRun(t) => Ok(json!({
                "phi": t.phi,
                "k": t.k,
                "checkpoints": t.checkpoints.iter().map(|c| json!({
                    "n": c.n,
                    "L_n": c.l.to_string(),
                    "log_r_entry": c.log_r_entry,
                    "theta_entry": c.theta_entry,
                    "log_r": c.log_r,
                    "theta": c.theta,
                    "Y_n": c.y,
                })).collect::<Vec<_>>(),
            })),
            Payload::PhaseDiagram(p) => serde_json::to_value(p),
            Payload::McExponent(p) => serde_json::to_value(p),
            Payload::ClassifyTheorems(p) => serde_json::to_value(p),
        };
        v.expect("payloads are serializable")
    }

    pub fn to_csv(&self) -> Vec<u8> {
        match self {
            Payload::TreeStats(p) => csv_bytes(
                &["n", "L_n", "k_n", "gap", "ball_count", "dimension_estimate"],
                p.rows.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        r.l.clone(),
                        r.k_n.to_string(),
                        r.gap.clone().unwrap_or_default(),
                        r.ball_count.clone().unwrap_or_default(),
                        opt(r.dimension_estimate),
                    ]
                }),
            ),
            Payload::Decompose(p) => csv_bytes(
                &[
                    "variant",
                    "D",
                    "vertices",
                    "max_deviation",
                    "tolerance",
                    "count_identity",
                    "pass",
                ],
                p.reports.iter().map(|r| {
                    vec![
                        r.variant.to_string(),
                        r.depth.to_string(),
                        r.vertices.to_string(),
                        fmt_float(r.max_deviation),
                        fmt_float(r.tolerance),
                        r.count_identity.to_string(),
                        r.pass.to_string(),
                    ]
                }),
            ),
            Payload::Spectrum(p) => csv_bytes(
                &["index", "eigenvalue"],
                p.eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(i, e)| vec![i.to_string(), fmt_float(*e)]),
            ),
            Payload::EfgpRun(t) => t.to_csv().into_bytes(),
            Payload::PhaseDiagram(p) => csv_bytes(
                &["E", "k", "gamma", "class", "alpha"],
                p.points.iter().map(|pt| {
                    vec![
                        fmt_float(pt.energy),
                        pt.k.to_string(),
                        p.gamma.clone(),
                        pt.class.as_str().to_string(),
                        opt(pt.alpha),
                    ]
                }),
            ),
            Payload::McExponent(rs) => csv_bytes(
                &["phi", "mean_Y", "stderr", "Z", "slope", "slope_target", "trials", "N"],
                rs.iter().map(|r| {
                    vec![
                        fmt_float(r.phi),
                        fmt_float(r.mean_y),
                        opt(r.stderr),
                        fmt_float(r.z),
                        fmt_float(r.slope),
                        fmt_float(r.slope_target),
                        r.trials.to_string(),
                        r.n_bumps.to_string(),
                    ]
                }),
            ),
            Payload::ClassifyTheorems(p) => csv_bytes(
                &["n", "L_n", "k_n", "gap", "epsilon_witness"],
                p.rows.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        r.l.clone(),
                        r.k.to_string(),
                        r.gap.clone(),
                        fmt_float(r.epsilon),
                    ]
                }),
            ),
        }
    }
}

impl Report {
    /// The JSON envelope: tool, version, config echo, payload, and timing
    /// only when requested.
    pub fn envelope(&self, timing_ms: Option<f64>) -> Value {
        let mut env = json!({
            "tool": "sparsetree",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand.to_string(),
            "config": self.config.to_json(),
            "payload": self.payload.to_json(),
        });
        if let (Some(t), true) = (timing_ms, self.config.include_timing.unwrap_or(false)) {
            env["timing_ms"] = json!(t);
        }
        env
    }

    pub fn emit(&self, format: Format, timing_ms: Option<f64>) -> Vec<u8> {
        match format {
            Format::Json => to_json_bytes(&self.envelope(timing_ms)),
            Format::Csv => self.payload.to_csv(),
        }
    }
}
