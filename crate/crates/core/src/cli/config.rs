//! Run configuration: a flat JSON object holding the tree description and
//! the numeric parameters of one subcommand.

use std::fmt;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::jacobi::Variant;
use crate::tree::{FamilyTag, KField, TreeRecord};

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    TreeStats,
    Decompose,
    Spectrum,
    EfgpRun,
    PhaseDiagram,
    McExponent,
    ClassifyTheorems,
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariantChoice {
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "delta-tilde")]
    DeltaTilde,
    #[serde(rename = "both")]
    Both,
}

impl VariantChoice {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantChoice::Delta => vec![Variant::Adjacency],
            VariantChoice::DeltaTilde => vec![Variant::Laplacian],
            VariantChoice::Both => vec![Variant::Adjacency, Variant::Laplacian],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<KField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<u64>>,

    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<VariantChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phis: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bumps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(rename = "E_grid", default, skip_serializing_if = "Option::is_none")]
    pub e_grid: Option<Grid>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Adds wall-clock timing to JSON reports (which makes them differ
    /// between runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_timing: Option<bool>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Canonical JSON form; parsing it yields an equal config.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is always serializable")
    }

    pub fn tree_record(&self) -> Result<TreeRecord, CliError> {
        Ok(TreeRecord {
            family: self.family.ok_or_else(|| missing("family"))?,
            k: self.k.clone().ok_or_else(|| missing("k"))?,
            gamma: self.gamma.clone(),
            n: self.n,
            seed: self.seed,
            l: self.l.clone(),
        })
    }

    pub fn constant_k(&self) -> Result<u64, CliError> {
        match &self.k {
            Some(KField::Constant(k)) => Ok(*k),
            Some(KField::List(_)) => Err(CliError::Validation(
                "invalid k: a single branching number is required".into(),
            )),
            None => Err(missing("k")),
        }
    }
}

pub(crate) fn missing(field: &str) -> CliError {
    CliError::Validation(format!("missing {field}: required by this subcommand"))
}
