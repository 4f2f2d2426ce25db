//! Experiment configuration files.
//!
//! A config is a TOML document. Top-level values describe the full-size
//! experiment; an optional `[desk]` table holds overrides merged on top of
//! them when running with `--scale desk`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use scarhunt::ansatz::{AnsatzKind, AnsatzSpec};
use scarhunt::operators::{EdgeConfig, H1Params, H2Params};
use scarhunt::scan::{EnergyGrid, ModelConfig};
use scarhunt::vqe::{CostWeights, TrainConfig};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Full,
    Desk,
}

fn default_alpha() -> f64 {
    -2.5
}
fn default_disorder() -> f64 {
    0.5
}
fn default_disorder_seed() -> u64 {
    1
}
fn one() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_edge() -> EdgeConfig {
    EdgeConfig::AllZero
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSection {
    H1 {
        num_sites: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_disorder")]
        disorder_strength: f64,
        /// Seed of the site-offset draw.
        #[serde(default = "default_disorder_seed")]
        disorder_seed: u64,
        /// Defaults to half filling.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_b: Option<usize>,
    },
    H2 {
        num_sites: usize,
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "one")]
        coupling: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_dw: Option<usize>,
        #[serde(default = "default_edge")]
        edge: EdgeConfig,
    },
}

impl ModelSection {
    pub fn num_sites(&self) -> usize {
        match self {
            ModelSection::H1 { num_sites, .. } | ModelSection::H2 { num_sites, .. } => *num_sites,
        }
    }

    /// Core model description; H2 needs `n_dw` here.
    pub fn resolve(&self) -> Result<ModelConfig, CliError> {
        match self {
            ModelSection::H1 {
                num_sites,
                alpha,
                disorder_strength,
                disorder_seed,
                n_b,
            } => Ok(ModelConfig::H1 {
                params: H1Params::new(*num_sites, *alpha, *disorder_strength, *disorder_seed)
                    .map_err(CliError::config)?,
                n_b: *n_b,
            }),
            ModelSection::H2 {
                n_dw: None, ..
            } => Err(CliError::Config("model.n_dw is required for H2 here".into())),
            ModelSection::H2 {
                n_dw: Some(n_dw),
                edge,
                ..
            } => Ok(ModelConfig::H2 {
                params: self.h2_params()?.expect("H2 section"),
                n_dw: *n_dw,
                edge: *edge,
            }),
        }
    }

    pub fn h1_params(&self) -> Result<Option<H1Params>, CliError> {
        match self {
            ModelSection::H1 {
                num_sites,
                alpha,
                disorder_strength,
                disorder_seed,
                ..
            } => H1Params::new(*num_sites, *alpha, *disorder_strength, *disorder_seed)
                .map(Some)
                .map_err(CliError::config),
            ModelSection::H2 { .. } => Ok(None),
        }
    }

    pub fn h2_params(&self) -> Result<Option<H2Params>, CliError> {
        match self {
            ModelSection::H2 {
                num_sites,
                lambda,
                delta,
                coupling,
                ..
            } => H2Params::new(*num_sites, *lambda, *delta, *coupling)
                .map(Some)
                .map_err(CliError::config),
            ModelSection::H1 { .. } => Ok(None),
        }
    }
}

/// The circuit; its width follows from the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub kind: AnsatzKind,
    pub depth: usize,
}

fn default_points() -> usize {
    41
}
fn default_seeds() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(default = "default_seeds")]
    pub seeds_per_point: usize,
    /// Explicit `{ min, max, step }`; spans the ED spectrum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_grid: Option<EnergyGrid>,
}

fn default_step() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_step")]
    pub step: f64,
    /// Defaults to the scar energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_energy: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// The weighted energy/variance/symmetry cost.
    #[default]
    VqeS,
    /// `1 - |<scar|psi>|^2`.
    Infidelity,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub objective: ObjectiveKind,
    /// Defaults to the scar energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_energy: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// The analytic scar of the model's sector.
    Scar,
    /// A computational basis state of the sector with diagonal energy in `fock_window`.
    RandomFock,
    /// The state prepared by a VQE-S run (uses `[ansatz]`, `[train]`, `[weights]`, `[run]`).
    Vqe,
}

fn default_t_max() -> f64 {
    50.0
}
fn default_time_points() -> usize {
    400
}
fn default_window() -> (f64, f64) {
    (-20.0, 20.0)
}
fn default_haar() -> usize {
    20
}
fn default_late() -> f64 {
    25.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub initial: InitialKind,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_time_points")]
    pub points: usize,
    #[serde(default = "default_window")]
    pub fock_window: (f64, f64),
    #[serde(default = "default_haar")]
    pub haar_samples: usize,
    /// Late-time averages use `t >= late_from`.
    #[serde(default = "default_late")]
    pub late_from: f64,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagSection {
    /// Restrict to the model's symmetry sector (needs `n_b` / `n_dw` for H2).
    #[serde(default = "yes")]
    pub use_sector: bool,
    #[serde(default = "yes")]
    pub entropies: bool,
}

/// A whole experiment: model plus the sections its command needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Base seed of every random choice of the experiment.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<AnsatzSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<CostWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<DiagSection>,
}

/// Recursively overwrites `base` with `over`.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, scale: Scale) -> Result<Self, CliError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        let desk = match table.remove("desk") {
            None => None,
            Some(toml::Value::Table(t)) => Some(t),
            Some(_) => return Err(CliError::Config("`desk` must be a table".into())),
        };
        if scale == Scale::Desk {
            if let Some(d) = desk {
                merge(&mut table, d);
            }
        }
        if let Some(toml::Value::Table(t)) = table.get("train") {
            if t.contains_key("rng_seed") {
                return Err(CliError::Config(
                    "train.rng_seed is derived from the top-level `seed`; remove it".into(),
                ));
            }
        }
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        if let Some(w) = &cfg.weights {
            w.validate().map_err(CliError::config)?;
        }
        if let Some(t) = &cfg.train {
            t.validate().map_err(CliError::config)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, scale: Scale) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, scale)
    }

    pub fn ansatz_spec(&self) -> Result<AnsatzSpec, CliError> {
        let a = self.ansatz.ok_or_else(|| CliError::missing("ansatz"))?;
        let width = match &self.model {
            ModelSection::H1 { num_sites, .. } => *num_sites,
            ModelSection::H2 { num_sites, .. } => num_sites.saturating_sub(2),
        };
        AnsatzSpec::new(a.kind, width, a.depth).map_err(CliError::config)
    }

    pub fn train_config(&self) -> TrainConfig {
        self.train.unwrap_or_default().with_seed(self.seed)
    }

    pub fn weights(&self) -> CostWeights {
        self.weights.unwrap_or_else(CostWeights::standard)
    }

    /// `<out>/<name>_s<seed><suffix>`.
    pub fn output_path(&self, out: &Path, suffix: &str) -> PathBuf {
        out.join(format!("{}_s{}{suffix}", self.name, self.seed))
    }

    /// The resolved configuration as one line of JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
seed = 4
[model]
model = "h1"
num_sites = 12
[ansatz]
kind = "HE"
depth = 2
[desk.model]
num_sites = 8
"#;

    #[test]
    fn desk_overrides_merge() {
        let full = ExperimentConfig::parse(BASE, Scale::Full).unwrap();
        let desk = ExperimentConfig::parse(BASE, Scale::Desk).unwrap();
        assert_eq!(full.model.num_sites(), 12);
        assert_eq!(desk.model.num_sites(), 8);
        assert_eq!(desk.ansatz_spec().unwrap().num_qubits, 8);
        match desk.model {
            ModelSection::H1 { alpha, .. } => assert_eq!(alpha, -2.5),
            _ => panic!("wrong model"),
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = BASE.replace("depth = 2", "depth = 2\nwidth = 3");
        let err = ExperimentConfig::parse(&bad, Scale::Full).unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
        let bad = BASE.replace("num_sites = 12", "num_sites = 12\nalhpa = 1.0");
        assert!(ExperimentConfig::parse(&bad, Scale::Full)
            .unwrap_err()
            .to_string()
            .contains("alhpa"));
    }

    #[test]
    fn seeds_come_from_the_top_level() {
        let cfg = ExperimentConfig::parse(BASE, Scale::Full).unwrap();
        assert_eq!(cfg.train_config().rng_seed, 4);
        let bad = format!("{BASE}\n[train]\nrng_seed = 3\n");
        assert!(ExperimentConfig::parse(&bad, Scale::Full).is_err());
    }

    #[test]
    fn h2_ansatz_acts_on_the_bulk() {
        let text = r#"
name = "h2"
[model]
model = "h2"
num_sites = 10
n_dw = 4
[ansatz]
kind = "AA"
depth = 5
"#;
        let cfg = ExperimentConfig::parse(text, Scale::Full).unwrap();
        assert_eq!(cfg.ansatz_spec().unwrap().num_qubits, 8);
        assert!(matches!(cfg.model.resolve().unwrap(), ModelConfig::H2 { n_dw: 4, .. }));
    }
}
