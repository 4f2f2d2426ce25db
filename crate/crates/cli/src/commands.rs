use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use scarhunt::dynamics::{
    haar_entropy_band, late_time_average, random_fock_state, revival_trace, time_grid, trace_csv,
    EvolutionPlan,
};
use scarhunt::exactdiag::{
    all_sectors, check_scar, detect_scars, diagonalize, diagonalize_sectors, spectrum_csv,
    ScarCheck,
};
use scarhunt::operators::{build_h1, build_h2, scar_state_h1, scar_tower_h2, SectorSpec, Tower};
use scarhunt::scan::{
    energy_scan, pareto_sweep, scan_csv, scan_runs_csv, ModelConfig, ParetoConfig, ScanConfig,
    ScanSetup, TOP_FIDELITIES,
};
use scarhunt::statevector::{BipartitionSpec, Statevector};
use scarhunt::vqe::{CostWeights, RunRecord};

use crate::config::{ExperimentConfig, InitialKind, ModelSection, ObjectiveKind};
use crate::CliError;

/// Residual bound for an analytic scar to count as an eigenstate.
const SCAR_TOL: f64 = 1e-8;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub workers: usize,
}

impl Context {
    fn write(&self, suffix: &str, contents: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out).map_err(io_error(&self.out))?;
        let path = self.cfg.output_path(&self.out, suffix);
        std::fs::write(&path, contents).map_err(io_error(&path))?;
        Ok(path)
    }

    /// CSV prefixed with a `# config` comment line.
    fn write_csv(&self, suffix: &str, csv: &str) -> Result<PathBuf, CliError> {
        self.write(suffix, &format!("# config {}\n{csv}", self.cfg.to_json()))
    }

    fn write_timing(&self, seconds: f64) -> Result<(), CliError> {
        let v = json!({ "name": self.cfg.name, "seed": self.cfg.seed, "wall_seconds": seconds });
        self.write("_timing.json", &format!("{v}\n")).map(|_| ())
    }

    fn model(&self) -> Result<ModelConfig, CliError> {
        let m = self.cfg.model.resolve()?;
        m.validate().map_err(CliError::config)?;
        Ok(m)
    }

    fn setup(&self, model: &ModelConfig) -> Result<ScanSetup, CliError> {
        let ansatz = self.cfg.ansatz_spec()?;
        ScanSetup::new(model, &ansatz, self.cfg.weights()).map_err(|e| match e {
            scarhunt::error::Error::SizeMismatch { .. } => CliError::config(e),
            e => e.into(),
        })
    }

    /// Trains with the configured objective; returns the target energy too.
    fn train(&self, setup: &ScanSetup) -> Result<(Option<f64>, RunRecord), CliError> {
        let run = self.cfg.run.clone().unwrap_or_default();
        let tcfg = self.cfg.train_config();
        match run.objective {
            ObjectiveKind::VqeS => {
                let target = run.target_energy.or(setup.scar_energy()).ok_or_else(|| {
                    CliError::Config("run.target_energy is required without an ED scar".into())
                })?;
                Ok((Some(target), setup.train(target, &tcfg)?))
            }
            ObjectiveKind::Infidelity => Ok((None, setup.train_infidelity(&tcfg)?)),
        }
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Compute(format!("{}: {e}", path.display()))
}

fn half_chain(n: usize) -> BipartitionSpec {
    BipartitionSpec::half_chain(n)
}

pub fn diag(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let opts = ctx.cfg.diag.clone().unwrap_or(crate::config::DiagSection {
        use_sector: true,
        entropies: true,
    });
    let n = ctx.cfg.model.num_sites();
    let (h, sector, scar) = match &ctx.cfg.model {
        ModelSection::H2 { n_dw: None, .. } => {
            if opts.use_sector {
                return Err(CliError::Config(
                    "model.n_dw is required when diag.use_sector is set".into(),
                ));
            }
            let p = ctx.cfg.model.h2_params()?.expect("H2 section");
            (build_h2::<f64>(&p)?, None, None)
        }
        _ => {
            let model = ctx.model()?;
            let sector = opts.use_sector.then(|| model.sector());
            let scar = if opts.use_sector { model.scar_state()? } else { None };
            (model.hamiltonian()?, sector, scar)
        }
    };
    let spec = diagonalize(&h, sector.as_ref())?;
    let entropies = if opts.entropies {
        spec.entropies(&half_chain(n))?
    } else {
        vec![f64::NAN; spec.dim()]
    };
    let fidelities = scar.map(|s| spec.fidelities(&s)).transpose()?.map(|f| f.0);
    let path = ctx.write_csv(
        "_spectrum.csv",
        &spectrum_csv(spec.eigenvalues(), &entropies, fidelities.as_deref()),
    )?;
    ctx.write_timing(start.elapsed().as_secs_f64())?;
    let scars = if opts.entropies {
        detect_scars(spec.eigenvalues(), &entropies)
    } else {
        Vec::new()
    };
    let energies: Vec<String> = scars
        .iter()
        .map(|&j| format!("{:.6}", spec.eigenvalues()[j]))
        .collect();
    let e = spec.eigenvalues();
    println!(
        "dim {} energies [{:.4}, {:.4}] low-entropy bulk states {} at E = [{}] -> {}",
        spec.dim(),
        e[0],
        e[e.len() - 1],
        scars.len(),
        energies.join(", "),
        path.display()
    );
    Ok(())
}

struct Candidate {
    label: String,
    check: ScarCheck,
}

pub fn validate_scar(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let n = ctx.cfg.model.num_sites();
    let cut = half_chain(n);
    let mut candidates = Vec::new();
    let mut detected = None;
    match &ctx.cfg.model {
        ModelSection::H1 { .. } => {
            let p = ctx.cfg.model.h1_params()?.expect("H1 section");
            let h = build_h1::<f64>(&p)?;
            let sector = SectorSpec::bosons(n / 2);
            let scar: Statevector = scar_state_h1(&p)?;
            let check = check_scar(&h, &scar, &sector, &cut)?;
            let spec = diagonalize(&h, Some(&sector))?;
            let found = detect_scars(spec.eigenvalues(), &spec.entropies(&cut)?);
            detected = Some(json!({
                "indices": found,
                "energies": found.iter().map(|&j| spec.eigenvalues()[j]).collect::<Vec<_>>(),
                "includes_analytic": found.contains(&check.rank),
            }));
            candidates.push(Candidate {
                label: format!("h1 n_b={}", n / 2),
                check,
            });
        }
        ModelSection::H2 { .. } => {
            let p = ctx.cfg.model.h2_params()?.expect("H2 section");
            let h = build_h2::<f64>(&p)?;
            for tower in [Tower::Zero, Tower::One] {
                for k in 0..=p.max_tower_index() {
                    let sector = SectorSpec::domain_walls(2 * k, Some(tower.edge_config()));
                    let scar: Statevector = scar_tower_h2(&p, k, tower)?;
                    candidates.push(Candidate {
                        label: format!("h2 tower={tower:?} k={k}").to_lowercase(),
                        check: check_scar(&h, &scar, &sector, &cut)?,
                    });
                }
            }
        }
    }

    let mut report = String::new();
    for c in &candidates {
        let line = json!({
            "scar": c.label,
            "check": c.check,
            "config": ctx.cfg,
        });
        let _ = writeln!(report, "{line}");
    }
    if let Some(d) = &detected {
        let _ = writeln!(report, "{}", json!({ "detected": d, "config": ctx.cfg }));
    }
    let path = ctx.write("_scars.jsonl", &report)?;
    ctx.write_timing(start.elapsed().as_secs_f64())?;

    for c in &candidates {
        let k = &c.check;
        println!(
            "{}: E = {:.10} (rank {}/{}) residual {:.2e} symmetry {:.6} (residual {:.2e}) S = {:.4}",
            c.label, k.ed_energy, k.rank, k.dim, k.residual, k.symmetry, k.symmetry_residual, k.entropy
        );
    }
    if let Some(d) = &detected {
        println!("low-entropy bulk eigenstates: {}", d["indices"]);
    }
    println!("report -> {}", path.display());

    for c in &candidates {
        if !(c.check.residual < SCAR_TOL) {
            return Err(CliError::Compute(format!(
                "{}: eigen-residual {:e} exceeds {SCAR_TOL:e}",
                c.label, c.check.residual
            )));
        }
        if !(c.check.symmetry_residual < SCAR_TOL) {
            return Err(CliError::Compute(format!(
                "{}: symmetry residual {:e} exceeds {SCAR_TOL:e}",
                c.label, c.check.symmetry_residual
            )));
        }
    }
    Ok(())
}

fn curve_csv(r: &RunRecord) -> String {
    let cell = |v: &[f64], i: usize| v.get(i).map_or(String::new(), |x| x.to_string());
    let mut out = String::from("iteration,cost,energy,variance,f_symm,fidelity\n");
    for i in 0..r.cost.len() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{}",
            r.cost[i],
            cell(&r.energy, i),
            cell(&r.variance, i),
            cell(&r.f_symm, i),
            cell(&r.fidelity, i)
        );
    }
    out
}

pub fn train(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let model = ctx.model()?;
    let setup = ctx.setup(&model)?;
    let (target, record) = ctx.train(&setup)?;
    let top = match setup.spectrum() {
        Some(_) => setup.top_fidelities(&record.final_state, TOP_FIDELITIES)?,
        None => Vec::new(),
    };
    let scar_fidelity = setup
        .scar()
        .map(|s| s.fidelity(&record.final_state))
        .transpose()?;
    let result = json!({
        "config": ctx.cfg,
        "target_energy": target,
        "scar_fidelity": scar_fidelity,
        "top_fidelities": top,
        "record": record,
    });
    let path = ctx.write("_train.json", &format!("{result}\n"))?;
    ctx.write_csv("_curve.csv", &curve_csv(&record))?;
    ctx.write_timing(start.elapsed().as_secs_f64())?;
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
    println!(
        "final cost {:.6e} <H> {} scar fidelity {} -> {}",
        record.final_cost(),
        fmt(record.final_energy()),
        fmt(scar_fidelity),
        path.display()
    );
    Ok(())
}

pub fn scan(ctx: &Context) -> Result<(), CliError> {
    let model = ctx.model()?;
    let section = ctx.cfg.scan.clone().ok_or_else(|| CliError::missing("scan"))?;
    let mut sc = ScanConfig::new(
        &ctx.cfg.name,
        model,
        ctx.cfg.ansatz_spec()?,
        ctx.cfg.train_config(),
    );
    sc.grid_points = section.grid_points;
    sc.seeds_per_point = section.seeds_per_point;
    sc.energy_grid = section.energy_grid;
    sc.weights = ctx.cfg.weights();
    sc.base_seed = ctx.cfg.seed;
    sc.validate().map_err(CliError::config)?;
    let out = energy_scan(&sc, ctx.workers)?;
    let path = ctx.write("_scan.jsonl", &out.to_jsonl())?;
    ctx.write_csv("_scan.csv", &scan_csv(&out.records))?;
    ctx.write_csv("_runs.csv", &scan_runs_csv(&out.records))?;
    ctx.write_timing(out.wall_seconds.iter().sum())?;
    let s = out.summary();
    println!(
        "peak 1/C {:.4e} at E = {:.4} (scar at {}) peak/median {:.3} -> {}",
        s.peak_inverse_cost,
        s.peak_energy,
        out.scar_energy.map_or("n/a".into(), |e| format!("{e:.4}")),
        s.peak_ratio,
        path.display()
    );
    Ok(())
}

pub fn sweep(ctx: &Context) -> Result<(), CliError> {
    let model = ctx.model()?;
    let section = ctx.cfg.sweep.clone().ok_or_else(|| CliError::missing("sweep"))?;
    let pc = ParetoConfig {
        name: ctx.cfg.name.clone(),
        model,
        ansatz: ctx.cfg.ansatz_spec()?,
        train: ctx.cfg.train_config(),
        step: section.step,
        target_energy: section.target_energy,
        base_seed: ctx.cfg.seed,
    };
    pc.levels().map_err(CliError::config)?;
    let out = pareto_sweep(&pc, ctx.workers)?;
    let path = ctx.write("_pareto.jsonl", &out.to_jsonl())?;
    ctx.write_csv("_pareto.csv", &out.to_csv())?;
    ctx.write_timing(out.wall_seconds.iter().sum())?;
    let standard = CostWeights::standard();
    let best = out
        .points
        .iter()
        .max_by(|a, b| a.scar_fidelity().total_cmp(&b.scar_fidelity()));
    println!(
        "{} points, best scar fidelity {:.4}; standard weights: fidelity {:.4}, fraction above {} -> {}",
        out.points.len(),
        best.map_or(0.0, |p| p.scar_fidelity()),
        out.at(standard).map_or(f64::NAN, |p| p.scar_fidelity()),
        out.fidelity_rank_fraction(standard)
            .map_or("n/a".into(), |f| format!("{f:.3}")),
        path.display()
    );
    Ok(())
}

pub fn dynamics(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let section = ctx
        .cfg
        .dynamics
        .clone()
        .ok_or_else(|| CliError::missing("dynamics"))?;
    let times = time_grid::<f64>(section.t_max, section.points);
    let model = ctx.model()?;
    let n = model.num_sites();
    let cut = half_chain(n);
    let h = model.hamiltonian()?;
    let sector = model.sector();
    let spec = diagonalize(&h, Some(&sector))?;

    let mut extra = json!({});
    let blocks;
    let plan = match section.initial {
        InitialKind::Scar => {
            let scar = model
                .scar_state()?
                .ok_or_else(|| CliError::Config("the model's sector has no analytic scar".into()))?;
            EvolutionPlan::new(&spec, scar, times)?
        }
        InitialKind::RandomFock => {
            let fock = random_fock_state(&spec, section.fock_window, ctx.cfg.seed)?;
            EvolutionPlan::new(&spec, fock, times)?
        }
        InitialKind::Vqe => {
            let setup = ctx.setup(&model)?;
            let (target, record) = ctx.train(&setup)?;
            extra = json!({
                "target_energy": target,
                "final_cost": record.final_cost(),
                "final_energy": record.final_energy(),
            });
            let state = setup.lift(&record.final_state);
            blocks = diagonalize_sectors(&h, &all_sectors(sector.model, n))?;
            EvolutionPlan::over_sectors(&blocks, state, times)?
        }
    };
    let trace = revival_trace(&plan, &cut)?;
    let (late_f, late_s) = late_time_average(&trace, section.late_from)
        .ok_or_else(|| CliError::Config("dynamics.late_from is beyond t_max".into()))?;
    let band = haar_entropy_band(&spec, &cut, section.haar_samples, ctx.cfg.seed)?;
    let summary = json!({
        "config": ctx.cfg,
        "energy": plan.energy(),
        "leakage": plan.leakage(),
        "late_fidelity": late_f,
        "late_entropy": late_s,
        "haar_entropy": band,
        "training": extra,
    });
    ctx.write_csv("_dynamics.csv", &trace_csv(&trace))?;
    let path = ctx.write("_dynamics.json", &format!("{summary}\n"))?;
    ctx.write_timing(start.elapsed().as_secs_f64())?;
    println!(
        "late-time F {:.4e} S {:.4} (Haar {:.4} +- {:.4}) -> {}",
        late_f,
        late_s,
        band.mean,
        band.std,
        path.display()
    );
    Ok(())
}
