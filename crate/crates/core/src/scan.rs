//! Experiment drivers: target-energy scans, cost-weight sweeps, ansatz
//! comparisons and infidelity baselines.
//!
//! Every job (one training run) gets its seed from [`derive_seed`], so any
//! single point can be rerun in isolation and partial reruns match full ones.
//! Jobs run on a rayon pool; results are always ordered by grid index.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzSpec, Circuit};
use crate::error::{Error, Result};
use crate::exactdiag::{diagonalize, scarless_h1, SpectrumResult};
use crate::operators::{
    build_h1, build_h2, scar_state_h1, scar_tower_h2, symmetry_operator, EdgeConfig, H1Params,
    H2Params, PauliOperator, SectorSpec, Tower,
};
use crate::statevector::Statevector;
use crate::vqe::{
    train_objective, CostConfig, CostWeights, InfidelityObjective, RunRecord, TrainConfig,
};

/// Version tag echoed in every record.
pub const LEDGER_VERSION: &str = concat!("scarhunt-", env!("CARGO_PKG_VERSION"));

/// `1/C` is reported as this value (and flagged) when `C < 1/INVERSE_COST_CAP`.
pub const INVERSE_COST_CAP: f64 = 1e15;

/// Number of eigenstate fidelities kept per run.
pub const TOP_FIDELITIES: usize = 4;

/// Eigenstate whose overlap with the analytic scar exceeds this is the scar.
const SCAR_MATCH: f64 = 0.99;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of replica `replica` at grid point `point`:
/// `splitmix64(splitmix64(base + point) + replica)`.
pub fn derive_seed(base: u64, point: usize, replica: usize) -> u64 {
    splitmix64(splitmix64(base.wrapping_add(point as u64)).wrapping_add(replica as u64))
}

/// `(1/C, capped)`.
pub fn inverse_cost(cost: f64) -> (f64, bool) {
    if cost < 1.0 / INVERSE_COST_CAP {
        (INVERSE_COST_CAP, true)
    } else {
        (1.0 / cost, false)
    }
}

fn default_edge() -> EdgeConfig {
    EdgeConfig::AllZero
}

/// Hamiltonian and symmetry sector of an experiment.
///
/// H1 defaults to half filling. H2 fixes both edge spins (default `|0>`) and
/// is simulated on the `N - 2` bulk qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    H1 {
        params: H1Params,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_b: Option<usize>,
    },
    H2 {
        params: H2Params,
        n_dw: usize,
        #[serde(default = "default_edge")]
        edge: EdgeConfig,
    },
}

impl ModelConfig {
    pub fn num_sites(&self) -> usize {
        match self {
            ModelConfig::H1 { params, .. } => params.num_sites,
            ModelConfig::H2 { params, .. } => params.num_sites,
        }
    }

    pub fn sector(&self) -> SectorSpec {
        match self {
            ModelConfig::H1 { params, n_b } => {
                SectorSpec::bosons(n_b.unwrap_or(params.num_sites / 2))
            }
            ModelConfig::H2 { n_dw, edge, .. } => SectorSpec::domain_walls(*n_dw, Some(*edge)),
        }
    }

    /// Qubits the variational circuit acts on.
    pub fn register_size(&self) -> usize {
        match self {
            ModelConfig::H1 { params, .. } => params.num_sites,
            ModelConfig::H2 { params, .. } => params.num_sites - 2,
        }
    }

    /// The same disorder realization with `alpha = 0`; H2 is returned as is.
    pub fn scarless(&self) -> Result<Self> {
        match self {
            ModelConfig::H1 { params, n_b } => Ok(ModelConfig::H1 {
                params: scarless_h1::<f64>(params)?.0,
                n_b: *n_b,
            }),
            other => Ok(other.clone()),
        }
    }

    pub fn hamiltonian(&self) -> Result<PauliOperator> {
        match self {
            ModelConfig::H1 { params, .. } => build_h1(params),
            ModelConfig::H2 { params, .. } => build_h2(params),
        }
    }

    /// Analytic scar living in the sector, if the model has one there.
    pub fn scar_state(&self) -> Result<Option<Statevector>> {
        match self {
            ModelConfig::H1 { params, n_b } => {
                let half = params.num_sites / 2;
                if n_b.unwrap_or(half) == half {
                    Ok(Some(scar_state_h1(params)?))
                } else {
                    Ok(None)
                }
            }
            ModelConfig::H2 { params, n_dw, edge } => {
                let tower = match edge {
                    EdgeConfig::AllZero => Tower::Zero,
                    EdgeConfig::AllOne => Tower::One,
                };
                if n_dw % 2 == 0 && n_dw / 2 <= params.max_tower_index() {
                    Ok(Some(scar_tower_h2(params, n_dw / 2, tower)?))
                } else {
                    Ok(None)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::H1 { params, .. } => params.validate()?,
            ModelConfig::H2 { params, .. } => params.validate()?,
        }
        self.sector().validate(self.num_sites())
    }
}

/// One eigenstate's overlap with a trained state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOverlap {
    pub index: usize,
    pub energy: f64,
    pub fidelity: f64,
    pub is_scar: bool,
}

/// Everything needed to train and evaluate at one model/ansatz/weights
/// combination: operators on the simulated register, the circuit, the ED
/// oracle (when feasible) and the analytic scar.
#[derive(Clone, Debug)]
pub struct ScanSetup {
    model: ModelConfig,
    circuit: Circuit,
    cost: CostConfig,
    initial: Statevector,
    spectrum: Option<SpectrumResult>,
    scar: Option<Statevector>,
    scar_index: Option<usize>,
}

impl ScanSetup {
    pub fn new(model: &ModelConfig, ansatz: &AnsatzSpec, weights: CostWeights) -> Result<Self> {
        model.validate()?;
        ansatz.validate()?;
        let register = model.register_size();
        if ansatz.num_qubits != register {
            return Err(Error::InvalidScan(format!(
                "ansatz acts on {} qubits but the model needs {register}",
                ansatz.num_qubits
            )));
        }
        let n = model.num_sites();
        let sector = model.sector();
        let h = model.hamiltonian()?;
        let s = symmetry_operator::<f64>(&sector, n)?;
        let (h_reg, s_reg) = match model {
            ModelConfig::H1 { .. } => (h.clone(), s),
            ModelConfig::H2 { edge, .. } => {
                let bit = edge.bit() == 1;
                let fixed = [(0, bit), (n - 1, bit)];
                (h.restrict(&fixed)?, s.restrict(&fixed)?)
            }
        };
        let cost = CostConfig::new(weights, 0.0, h_reg, s_reg, sector.quantum_number as f64)?;
        let circuit = build_ansatz(ansatz)?;
        let spectrum = match diagonalize(&h, Some(&sector)) {
            Ok(spec) => Some(spec),
            Err(Error::DimensionTooLarge { .. }) => None,
            Err(e) => return Err(e),
        };
        let scar = model.scar_state()?;
        let scar_index = match (&spectrum, &scar) {
            (Some(spec), Some(psi)) => {
                let (f, _) = spec.fidelities(psi)?;
                let (j, &best) = f
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .expect("sector is non-empty");
                (best > SCAR_MATCH).then_some(j)
            }
            _ => None,
        };
        Ok(ScanSetup {
            model: model.clone(),
            circuit,
            cost,
            initial: Statevector::zero(register),
            spectrum,
            scar,
            scar_index,
        })
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn cost_config(&self) -> &CostConfig {
        &self.cost
    }

    pub fn spectrum(&self) -> Option<&SpectrumResult> {
        self.spectrum.as_ref()
    }

    /// Analytic scar on the full register.
    pub fn scar(&self) -> Option<&Statevector> {
        self.scar.as_ref()
    }

    /// ED index of the analytic scar.
    pub fn scar_index(&self) -> Option<usize> {
        self.scar_index
    }

    pub fn scar_energy(&self) -> Option<f64> {
        Some(self.spectrum.as_ref()?.eigenvalues()[self.scar_index?])
    }

    /// `(lambda_min, lambda_max)` of the sector.
    pub fn spectrum_range(&self) -> Option<(f64, f64)> {
        let e = self.spectrum.as_ref()?.eigenvalues();
        Some((e[0], e[e.len() - 1]))
    }

    fn edge_mask(&self) -> usize {
        match &self.model {
            ModelConfig::H1 { .. } => 0,
            ModelConfig::H2 { edge, params, .. } => {
                if edge.bit() == 1 {
                    1 | 1 << (params.num_sites - 1)
                } else {
                    0
                }
            }
        }
    }

    /// Full-register state from a simulated-register state.
    pub fn lift(&self, state: &Statevector) -> Statevector {
        match &self.model {
            ModelConfig::H1 { .. } => state.clone(),
            ModelConfig::H2 { params, .. } => {
                let mask = self.edge_mask();
                let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << params.num_sites];
                for (b, &a) in state.amplitudes().iter().enumerate() {
                    amps[(b << 1) | mask] = a;
                }
                Statevector::from_amplitudes(amps).expect("power-of-two length")
            }
        }
    }

    /// Simulated-register component of a full-register state (amplitudes
    /// with the wrong edge values are dropped).
    pub fn reduce(&self, state: &Statevector) -> Result<Statevector> {
        match &self.model {
            ModelConfig::H1 { .. } => Ok(state.clone()),
            ModelConfig::H2 { params, .. } => {
                let n = params.num_sites;
                if state.num_qubits() != n {
                    return Err(Error::SizeMismatch {
                        expected: n,
                        found: state.num_qubits(),
                    });
                }
                let mask = self.edge_mask();
                let amps = (0..1usize << (n - 2))
                    .map(|b| state.amplitudes()[(b << 1) | mask])
                    .collect();
                Statevector::from_amplitudes(amps)
            }
        }
    }

    /// Trains the scar-targeting cost at `target`. The fidelity series tracks
    /// the analytic scar when there is one.
    pub fn train(&self, target: f64, tcfg: &TrainConfig) -> Result<RunRecord, Error> {
        let cost = self.cost.with_target(target);
        let probe = self.scar.as_ref().map(|s| self.reduce(s)).transpose()?;
        train_objective(&self.circuit, &cost, tcfg, &self.initial, probe.as_ref())
            .map_err(|f| f.error)
    }

    /// Trains `1 - |<scar|psi>|^2` directly.
    pub fn train_infidelity(&self, tcfg: &TrainConfig) -> Result<RunRecord> {
        let scar = self
            .scar
            .as_ref()
            .ok_or_else(|| Error::InvalidScan("model has no analytic scar in this sector".into()))?;
        let target = self.reduce(scar)?;
        let objective = InfidelityObjective::new(target.clone());
        train_objective(&self.circuit, &objective, tcfg, &self.initial, Some(&target))
            .map_err(|f| f.error)
    }

    /// Largest eigenstate fidelities of a full-register state, descending.
    pub fn top_fidelities(&self, state: &Statevector, k: usize) -> Result<Vec<EigenOverlap>> {
        let Some(spec) = &self.spectrum else {
            return Ok(Vec::new());
        };
        let (f, _) = spec.fidelities(state)?;
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&i, &j| f[j].total_cmp(&f[i]).then(i.cmp(&j)));
        Ok(order
            .into_iter()
            .take(k)
            .map(|j| EigenOverlap {
                index: j,
                energy: spec.eigenvalues()[j],
                fidelity: f[j],
                is_scar: Some(j) == self.scar_index,
            })
            .collect())
    }

    fn summarize(&self, run: &RunRecord) -> Result<RunSummary> {
        let cost = run.final_cost();
        let (inverse, capped) = inverse_cost(cost);
        let full = self.lift(&run.final_state);
        Ok(RunSummary {
            cost,
            inverse_cost: inverse,
            capped,
            energy: run.final_energy().unwrap_or(f64::NAN),
            variance: run.variance.last().copied().unwrap_or(f64::NAN),
            f_symm: run.f_symm.last().copied().unwrap_or(f64::NAN),
            top_fidelities: self.top_fidelities(&full, TOP_FIDELITIES)?,
            scar_fidelity: run.final_fidelity(),
        })
    }
}

fn run_jobs<J, R, F>(jobs: &[J], workers: usize, f: F) -> Result<Vec<R>>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> R + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidScan(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(&f).collect()))
}

/// Energy grid `min, min + step, ...` up to and including `max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl EnergyGrid {
    /// `points` evenly spaced targets on `[lo, hi]`.
    pub fn spanning(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 || !(hi > lo) {
            return Err(Error::InvalidScan(format!(
                "cannot span [{lo}, {hi}] with {points} points"
            )));
        }
        Ok(EnergyGrid {
            min: lo,
            max: hi,
            step: (hi - lo) / (points - 1) as f64,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidScan(format!("grid step must be positive, got {}", self.step)));
        }
        if !(self.max >= self.min) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidScan(format!(
                "grid bounds [{}, {}] are not an interval",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn targets(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.min + k as f64 * self.step).collect()
    }
}

fn default_points() -> usize {
    41
}

fn default_seeds() -> usize {
    3
}

/// A target-energy scan.
///
/// Without an explicit `energy_grid` the targets span the ED spectrum of the
/// sector with `grid_points` points. `train.rng_seed` is ignored: every run
/// is seeded by [`derive_seed`] from `base_seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub name: String,
    pub model: ModelConfig,
    pub ansatz: AnsatzSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_grid: Option<EnergyGrid>,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(default = "default_seeds")]
    pub seeds_per_point: usize,
    #[serde(default = "CostWeights::standard")]
    pub weights: CostWeights,
    #[serde(default)]
    pub base_seed: u64,
}

impl ScanConfig {
    pub fn new(name: &str, model: ModelConfig, ansatz: AnsatzSpec, train: TrainConfig) -> Self {
        ScanConfig {
            name: name.to_string(),
            model,
            ansatz,
            train,
            energy_grid: None,
            grid_points: default_points(),
            seeds_per_point: default_seeds(),
            weights: CostWeights::standard(),
            base_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds_per_point == 0 {
            return Err(Error::InvalidScan("seeds_per_point must be at least 1".into()));
        }
        if let Some(g) = &self.energy_grid {
            g.validate()?;
        }
        self.weights.validate()?;
        self.train.validate()?;
        self.model.validate()?;
        self.ansatz.validate()
    }

    /// Targets of the scan; needs the ED range when no grid is given.
    pub fn targets(&self, setup: &ScanSetup) -> Result<Vec<f64>> {
        let grid = match self.energy_grid {
            Some(g) => g,
            None => {
                let (lo, hi) = setup.spectrum_range().ok_or_else(|| {
                    Error::InvalidScan("no ED spectrum at this size; give energy_grid".into())
                })?;
                EnergyGrid::spanning(lo, hi, self.grid_points)?
            }
        };
        Ok(grid.targets())
    }

    /// Training settings of one job.
    pub fn job_train_config(&self, point: usize, replica: usize) -> TrainConfig {
        self.train.with_seed(derive_seed(self.base_seed, point, replica))
    }
}

/// Final diagnostics of one finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub cost: f64,
    pub inverse_cost: f64,
    /// Whether `inverse_cost` hit [`INVERSE_COST_CAP`].
    pub capped: bool,
    pub energy: f64,
    pub variance: f64,
    pub f_symm: f64,
    /// Largest ED eigenstate fidelities (empty without an ED oracle).
    pub top_fidelities: Vec<EigenOverlap>,
    /// Fidelity with the analytic scar, when the sector has one.
    pub scar_fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Finished(RunSummary),
    Failed { error: String },
}

impl RunOutcome {
    pub fn summary(&self) -> Option<&RunSummary> {
        match self {
            RunOutcome::Finished(s) => Some(s),
            RunOutcome::Failed { .. } => None,
        }
    }
}

/// One training run of a scan point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub replica: usize,
    pub seed: u64,
    pub outcome: RunOutcome,
}

/// Configuration echo sufficient to rerun any point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub ledger_version: String,
    pub config: ScanConfig,
}

/// All seeds at one target energy plus the best-of-seeds aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub experiment: String,
    pub point_index: usize,
    pub target_energy: f64,
    /// Whether fidelity columns come from an ED oracle.
    pub ed_oracle: bool,
    pub runs: Vec<SeedRun>,
    /// Replica with the largest `1/C`; `None` if every seed failed.
    pub best_replica: Option<usize>,
    pub provenance: Provenance,
}

impl ScanRecord {
    pub fn best(&self) -> Option<&RunSummary> {
        self.runs[self.best_replica?].outcome.summary()
    }

    /// Best-of-seeds `1/C`, 0 when every seed failed.
    pub fn best_inverse_cost(&self) -> f64 {
        self.best().map_or(0.0, |s| s.inverse_cost)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scan records always serialize")
    }
}

/// Scan records plus the wall time of each point (summed over seeds).
#[derive(Clone, Debug)]
pub struct ScanOutput {
    pub records: Vec<ScanRecord>,
    pub wall_seconds: Vec<f64>,
    pub scar_energy: Option<f64>,
}

impl ScanOutput {
    /// One record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_json());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> ScanSummary {
        ScanSummary::of(&self.records)
    }
}

fn best_replica(runs: &[SeedRun]) -> Option<usize> {
    runs.iter()
        .filter_map(|r| r.outcome.summary().map(|s| (r.replica, s.inverse_cost)))
        .fold(None, |best: Option<(usize, f64)>, (k, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((k, v)),
        })
        .map(|(k, _)| k)
}

/// Runs one training per (target, seed); training failures are recorded in
/// the point's record.
pub fn energy_scan(cfg: &ScanConfig, workers: usize) -> Result<ScanOutput> {
    cfg.validate()?;
    let setup = ScanSetup::new(&cfg.model, &cfg.ansatz, cfg.weights)?;
    energy_scan_with(cfg, &setup, workers)
}

/// As [`energy_scan`] with a prepared setup (reused across scans of the same
/// model and ansatz).
pub fn energy_scan_with(cfg: &ScanConfig, setup: &ScanSetup, workers: usize) -> Result<ScanOutput> {
    let all: Vec<usize> = (0..cfg.targets(setup)?.len()).collect();
    scan_points(cfg, setup, &all, workers)
}

/// The records of the given grid points only; identical to the matching
/// records of a full scan.
pub fn scan_points(
    cfg: &ScanConfig,
    setup: &ScanSetup,
    points: &[usize],
    workers: usize,
) -> Result<ScanOutput> {
    cfg.validate()?;
    let targets = cfg.targets(setup)?;
    if let Some(&p) = points.iter().find(|&&p| p >= targets.len()) {
        return Err(Error::InvalidScan(format!(
            "point {p} outside a grid of {} targets",
            targets.len()
        )));
    }
    let jobs: Vec<(usize, usize)> = points
        .iter()
        .flat_map(|&p| (0..cfg.seeds_per_point).map(move |r| (p, r)))
        .collect();
    let results = run_jobs(&jobs, workers, |&(p, r)| {
        let tcfg = cfg.job_train_config(p, r);
        let start = Instant::now();
        let outcome = match setup.train(targets[p], &tcfg).and_then(|run| setup.summarize(&run)) {
            Ok(s) => RunOutcome::Finished(s),
            Err(e) => RunOutcome::Failed {
                error: e.to_string(),
            },
        };
        let run = SeedRun {
            replica: r,
            seed: tcfg.rng_seed,
            outcome,
        };
        (run, start.elapsed().as_secs_f64())
    })?;
    let provenance = Provenance {
        ledger_version: LEDGER_VERSION.to_string(),
        config: cfg.clone(),
    };
    let mut records = Vec::with_capacity(points.len());
    let mut wall_seconds = Vec::with_capacity(points.len());
    for (&p, chunk) in points.iter().zip(results.chunks(cfg.seeds_per_point)) {
        let runs: Vec<SeedRun> = chunk.iter().map(|(r, _)| r.clone()).collect();
        wall_seconds.push(chunk.iter().map(|(_, t)| t).sum());
        records.push(ScanRecord {
            experiment: cfg.name.clone(),
            point_index: p,
            target_energy: targets[p],
            ed_oracle: setup.spectrum.is_some(),
            best_replica: best_replica(&runs),
            runs,
            provenance: provenance.clone(),
        });
    }
    Ok(ScanOutput {
        records,
        wall_seconds,
        scar_energy: setup.scar_energy(),
    })
}

/// Peak location and contrast of a scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub peak_index: usize,
    pub peak_energy: f64,
    pub peak_inverse_cost: f64,
    pub median_inverse_cost: f64,
    /// `max(1/C) / median(1/C)` over best-of-seeds values.
    pub peak_ratio: f64,
    /// Mean over points of the sample std of `log10(1/C)` across seeds.
    pub seed_dispersion: f64,
}

impl ScanSummary {
    pub fn of(records: &[ScanRecord]) -> Self {
        let best: Vec<f64> = records.iter().map(ScanRecord::best_inverse_cost).collect();
        let (peak_index, &peak) = best
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, &f64)>, (i, v)| match acc {
                Some((_, b)) if b >= v => acc,
                _ => Some((i, v)),
            })
            .unwrap_or((0, &0.0));
        let median = median(&best);
        let spreads: Vec<f64> = records
            .iter()
            .filter_map(|r| {
                let logs: Vec<f64> = r
                    .runs
                    .iter()
                    .filter_map(|s| s.outcome.summary())
                    .map(|s| s.inverse_cost.log10())
                    .collect();
                sample_std(&logs)
            })
            .collect();
        let seed_dispersion = if spreads.is_empty() {
            0.0
        } else {
            spreads.iter().sum::<f64>() / spreads.len() as f64
        };
        ScanSummary {
            peak_index,
            peak_energy: records.get(peak_index).map_or(f64::NAN, |r| r.target_energy),
            peak_inverse_cost: peak,
            median_inverse_cost: median,
            peak_ratio: if median > 0.0 { peak / median } else { f64::INFINITY },
            seed_dispersion,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(var.sqrt())
}

/// Longest run of consecutive grid points whose best-of-seeds final `<H>`
/// lies within `tol` of `energy`.
pub fn plateau_length(records: &[ScanRecord], energy: f64, tol: f64) -> usize {
    let mut longest = 0;
    let mut current = 0;
    for r in records {
        if r.best().is_some_and(|s| (s.energy - energy).abs() <= tol) {
            current += 1;
            longest = longest.max(current);
        } else {
            current = 0;
        }
    }
    longest
}

/// Best-of-seeds projection: one row per target energy.
pub fn scan_csv(records: &[ScanRecord]) -> String {
    let mut out = String::from(
        "target_energy,best_inverse_cost,best_cost,energy,variance,f_symm,top_fidelity,top_is_scar,scar_fidelity\n",
    );
    for r in records {
        match r.best() {
            Some(s) => {
                let top = s.top_fidelities.first();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.target_energy,
                    s.inverse_cost,
                    s.cost,
                    s.energy,
                    s.variance,
                    s.f_symm,
                    top.map_or(String::new(), |t| t.fidelity.to_string()),
                    top.map_or(String::new(), |t| t.is_scar.to_string()),
                    s.scar_fidelity.map_or(String::new(), |f| f.to_string()),
                );
            }
            None => {
                let _ = writeln!(out, "{},0,,,,,,,", r.target_energy);
            }
        }
    }
    out
}

/// Per-seed projection: one row per training run.
pub fn scan_runs_csv(records: &[ScanRecord]) -> String {
    let mut out = String::from("target_energy,replica,seed,cost,inverse_cost,energy,f_symm,error\n");
    for r in records {
        for s in &r.runs {
            match &s.outcome {
                RunOutcome::Finished(m) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},",
                        r.target_energy, s.replica, s.seed, m.cost, m.inverse_cost, m.energy, m.f_symm
                    );
                }
                RunOutcome::Failed { error } => {
                    let _ = writeln!(
                        out,
                        "{},{},{},,,,,\"{}\"",
                        r.target_energy,
                        s.replica,
                        s.seed,
                        error.replace('"', "'")
                    );
                }
            }
        }
    }
    out
}

fn default_pareto_step() -> f64 {
    0.05
}

/// A sweep over the `(a, b, c)` simplex at fixed target energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoConfig {
    pub name: String,
    pub model: ModelConfig,
    pub ansatz: AnsatzSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_pareto_step")]
    pub step: f64,
    /// Defaults to the ED energy of the analytic scar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_energy: Option<f64>,
    #[serde(default)]
    pub base_seed: u64,
}

impl ParetoConfig {
    /// Number of weight levels `L = 1/step`.
    pub fn levels(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::InvalidScan(format!("step must lie in (0, 1], got {}", self.step)));
        }
        let l = (1.0 / self.step).round();
        if (l * self.step - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScan(format!("step {} does not divide 1", self.step)));
        }
        Ok(l as usize)
    }

    /// Simplex points `(a, b, c)` with `a` outer, `b` inner, `c = 1 - a - b`.
    pub fn grid(&self) -> Result<Vec<CostWeights>> {
        let l = self.levels()?;
        let mut out = Vec::with_capacity((l + 1) * (l + 2) / 2);
        for i in 0..=l {
            for j in 0..=l - i {
                let a = i as f64 / l as f64;
                let b = j as f64 / l as f64;
                let c = (l - i - j) as f64 / l as f64;
                out.push(CostWeights { a, b, c });
            }
        }
        Ok(out)
    }
}

/// One simplex point of a Pareto sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub index: usize,
    pub weights: CostWeights,
    pub seed: u64,
    pub outcome: RunOutcome,
}

impl ParetoPoint {
    pub fn inverse_cost(&self) -> f64 {
        self.outcome.summary().map_or(0.0, |s| s.inverse_cost)
    }

    pub fn scar_fidelity(&self) -> f64 {
        self.outcome
            .summary()
            .and_then(|s| s.scar_fidelity)
            .unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct ParetoOutput {
    pub config: ParetoConfig,
    pub target_energy: f64,
    pub points: Vec<ParetoPoint>,
    pub wall_seconds: Vec<f64>,
}

impl ParetoOutput {
    /// The point whose weights match `w` to 1e-9.
    pub fn at(&self, w: CostWeights) -> Option<&ParetoPoint> {
        self.points.iter().find(|p| {
            (p.weights.a - w.a).abs() < 1e-9
                && (p.weights.b - w.b).abs() < 1e-9
                && (p.weights.c - w.c).abs() < 1e-9
        })
    }

    /// Fraction of grid points with scar fidelity strictly above `w`'s.
    pub fn fidelity_rank_fraction(&self, w: CostWeights) -> Option<f64> {
        let f = self.at(w)?.scar_fidelity();
        let above = self.points.iter().filter(|p| p.scar_fidelity() > f).count();
        Some(above as f64 / self.points.len() as f64)
    }

    pub fn to_jsonl(&self) -> String {
        let provenance = serde_json::json!({
            "ledger_version": LEDGER_VERSION,
            "config": self.config,
            "target_energy": self.target_energy,
        });
        let mut out = String::new();
        for p in &self.points {
            let mut v = serde_json::to_value(p).expect("pareto points serialize");
            v["provenance"] = provenance.clone();
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    /// Contour-ready projection `a,b,c,cost,inverse_cost,capped,fidelity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,c,cost,inverse_cost,capped,fidelity\n");
        for p in &self.points {
            let w = p.weights;
            match p.outcome.summary() {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        w.a,
                        w.b,
                        w.c,
                        s.cost,
                        s.inverse_cost,
                        s.capped,
                        s.scar_fidelity.map_or(String::new(), |f| f.to_string())
                    );
                }
                None => {
                    let _ = writeln!(out, "{},{},{},,,,", w.a, w.b, w.c);
                }
            }
        }
        out
    }
}

/// Trains once per simplex point; the seed of point `k` is
/// `derive_seed(base_seed, k, 0)`.
pub fn pareto_sweep(cfg: &ParetoConfig, workers: usize) -> Result<ParetoOutput> {
    cfg.train.validate()?;
    let grid = cfg.grid()?;
    // Operators, circuit and ED oracle do not depend on the weights.
    let base = ScanSetup::new(&cfg.model, &cfg.ansatz, CostWeights::standard())?;
    let target = match cfg.target_energy {
        Some(e) => e,
        None => base.scar_energy().ok_or_else(|| {
            Error::InvalidScan("no scar energy available; give target_energy".into())
        })?,
    };
    let jobs: Vec<usize> = (0..grid.len()).collect();
    let results = run_jobs(&jobs, workers, |&k| {
        let tcfg = cfg.train.with_seed(derive_seed(cfg.base_seed, k, 0));
        let start = Instant::now();
        let outcome = CostConfig::new(
            grid[k],
            target,
            base.cost.hamiltonian().clone(),
            base.cost.symmetry_op().clone(),
            base.cost.symmetry_value(),
        )
        .and_then(|cost| {
            let setup = ScanSetup { cost, ..base.clone() };
            setup.train(target, &tcfg).and_then(|run| setup.summarize(&run))
        });
        let outcome = match outcome {
            Ok(s) => RunOutcome::Finished(s),
            Err(e) => RunOutcome::Failed {
                error: e.to_string(),
            },
        };
        let point = ParetoPoint {
            index: k,
            weights: grid[k],
            seed: tcfg.rng_seed,
            outcome,
        };
        (point, start.elapsed().as_secs_f64())
    })?;
    let (points, wall_seconds) = results.into_iter().unzip();
    Ok(ParetoOutput {
        config: cfg.clone(),
        target_energy: target,
        points,
        wall_seconds,
    })
}

/// Scan summary of one ansatz in a comparison.
#[derive(Clone, Debug)]
pub struct AnsatzSummary {
    pub ansatz: AnsatzSpec,
    pub num_params: usize,
    pub iterations: usize,
    pub summary: ScanSummary,
    pub output: ScanOutput,
}

/// Runs `base` once per `(ansatz, train config)` variant.
pub fn ansatz_comparison(
    base: &ScanConfig,
    variants: &[(AnsatzSpec, TrainConfig)],
    workers: usize,
) -> Result<Vec<AnsatzSummary>> {
    variants
        .iter()
        .map(|(spec, tcfg)| {
            let cfg = ScanConfig {
                name: format!("{}-{}{}", base.name, spec.kind, spec.depth),
                ansatz: *spec,
                train: *tcfg,
                ..base.clone()
            };
            let output = energy_scan(&cfg, workers)?;
            Ok(AnsatzSummary {
                ansatz: *spec,
                num_params: spec.num_params(),
                iterations: tcfg.iterations,
                summary: output.summary(),
                output,
            })
        })
        .collect()
}

/// Which cost a learning curve was trained on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineObjective {
    /// The scar-agnostic weighted cost.
    Agnostic,
    /// `1 - |<scar|psi>|^2`.
    Infidelity,
}

/// Infidelity to the analytic scar at every iteration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub depth: usize,
    pub objective: BaselineObjective,
    pub seed: u64,
    pub infidelity: Vec<f64>,
}

impl LearningCurve {
    pub fn final_infidelity(&self) -> f64 {
        *self.infidelity.last().expect("curves hold the initial point")
    }
}

/// Per depth, trains the agnostic cost at the scar energy with `agnostic`
/// and the infidelity cost with `infidelity`. Uses `ansatz` with its depth
/// replaced.
///
/// The infidelity cost needs a wide parameter initialization: from the
/// vacuum with angles of order `eps`, the overlap with a half-filled scar is
/// `O(eps^(N/2))` and so is its gradient.
pub fn infidelity_baseline(
    model: &ModelConfig,
    ansatz: &AnsatzSpec,
    depths: &[usize],
    weights: CostWeights,
    agnostic: &TrainConfig,
    infidelity: &TrainConfig,
    workers: usize,
) -> Result<Vec<LearningCurve>> {
    let jobs: Vec<(usize, BaselineObjective)> = depths
        .iter()
        .flat_map(|&d| [(d, BaselineObjective::Agnostic), (d, BaselineObjective::Infidelity)])
        .collect();
    let curves = run_jobs(&jobs, workers, |&(depth, objective)| -> Result<LearningCurve> {
        let spec = AnsatzSpec { depth, ..*ansatz };
        let setup = ScanSetup::new(model, &spec, weights)?;
        let (run, seed) = match objective {
            BaselineObjective::Agnostic => {
                let target = setup
                    .scar_energy()
                    .ok_or_else(|| Error::InvalidScan("scar energy unavailable".into()))?;
                (setup.train(target, agnostic)?, agnostic.rng_seed)
            }
            BaselineObjective::Infidelity => {
                (setup.train_infidelity(infidelity)?, infidelity.rng_seed)
            }
        };
        Ok(LearningCurve {
            depth,
            objective,
            seed,
            infidelity: run.fidelity.iter().map(|f| 1.0 - f).collect(),
        })
    })?;
    curves.into_iter().collect()
}

/// Columns `iteration,<objective>_d<depth>...` for a set of curves.
pub fn learning_curves_csv(curves: &[LearningCurve]) -> String {
    let mut out = String::from("iteration");
    for c in curves {
        let tag = match c.objective {
            BaselineObjective::Agnostic => "agnostic",
            BaselineObjective::Infidelity => "infidelity",
        };
        let _ = write!(out, ",{tag}_d{}", c.depth);
    }
    out.push('\n');
    let len = curves.iter().map(|c| c.infidelity.len()).max().unwrap_or(0);
    for i in 0..len {
        let _ = write!(out, "{i}");
        for c in curves {
            match c.infidelity.get(i) {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}
