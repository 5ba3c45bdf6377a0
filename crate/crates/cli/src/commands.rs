use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use fch_core::diagnostics::{cdep_experiment, dispersion_experiment};
use fch_core::initdata::{generate, regularize_initial};
use fch_core::stepper::StepInfo;
use fch_core::{
    advance, snapshot, verify, Grid, PotentialParams, RunLedger, ScalarField, SolverConfig, StepObserver,
    TruncationLevel,
};

use crate::config::{hash_hex, Loaded, OutputBlock};
use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub final_time: f64,
    pub steps: u64,
    pub rejections: u64,
    pub final_energy: f64,
    pub final_delta_sep: f64,
    pub mass_drift: f64,
}

#[derive(Serialize)]
struct OutputRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Provenance<'a> {
    command: &'a str,
    version: &'static str,
    config: String,
    config_sha256: &'a str,
    seed: u64,
    threads: Option<usize>,
    started_unix: f64,
    finished_unix: f64,
    outputs: Vec<OutputRecord>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}

/// Writes `provenance.json` next to the outputs, hashing each of them.
fn finish(command: &str, loaded: &Loaded, opts: &Options, started: f64, files: &[PathBuf]) -> Result<(), CliError> {
    let mut outputs = Vec::with_capacity(files.len());
    for f in files {
        let rel = f.strip_prefix(&opts.out).unwrap_or(f);
        outputs.push(OutputRecord { path: rel.display().to_string(), sha256: hash_hex(&fs::read(f)?) });
    }
    let prov = Provenance {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: loaded.path.display().to_string(),
        config_sha256: &loaded.hash,
        seed: loaded.config.initial.seed,
        threads: opts.threads,
        started_unix: started,
        finished_unix: unix_now(),
        outputs,
    };
    write_json(&opts.out.join("provenance.json"), &prov)?;
    Ok(())
}

/// Generated initial data, regularized when a truncation level is set.
fn initial_state(loaded: &Loaded) -> Result<ScalarField, CliError> {
    let u0 = generate(&loaded.config.initial, &loaded.grid)?;
    Ok(match loaded.solver.truncation {
        Some(lvl) => regularize_initial(&u0, lvl)?,
        None => u0,
    })
}

struct RunObserver {
    ledger: RunLedger,
    every: u64,
    seen: u64,
    dir: PathBuf,
    written: Vec<PathBuf>,
    last_snapshot: Option<u64>,
}

impl RunObserver {
    fn snapshot(&mut self, u: &ScalarField, t: f64, step: u64) -> fch_core::Result<()> {
        let stem = self.dir.join(format!("state_{step:06}"));
        let (bin, json) = snapshot::write(&stem, u, t, &format!("step {step}"))?;
        self.written.extend([bin, json]);
        self.last_snapshot = Some(step);
        Ok(())
    }
}

impl StepObserver for RunObserver {
    fn observe(&mut self, info: &StepInfo<'_>) -> fch_core::Result<()> {
        self.ledger.observe(info)?;
        let step = self.seen;
        self.seen += 1;
        if self.every > 0 && step.is_multiple_of(self.every) {
            self.snapshot(info.u, info.t, step)?;
        }
        Ok(())
    }
}

/// Runs one trajectory into `dir`: ledger CSV, snapshots at the cadence
/// (plus the final state), and `summary.json`. The ledger is written even
/// when the solver fails.
pub fn simulate(
    u0: &ScalarField,
    params: &PotentialParams,
    solver: &SolverConfig,
    t_end: f64,
    output: &OutputBlock,
    dir: &Path,
) -> Result<(RunSummary, Vec<PathBuf>), CliError> {
    fs::create_dir_all(dir)?;
    let snap_dir = dir.join(&output.snapshot_dir);
    if output.snapshot_every > 0 {
        fs::create_dir_all(&snap_dir)?;
    }
    let mut obs = RunObserver {
        ledger: RunLedger::new(),
        every: output.snapshot_every,
        seen: 0,
        dir: snap_dir,
        written: Vec::new(),
        last_snapshot: None,
    };
    let result = advance(u0, t_end, params, solver, &mut obs);
    let ledger_path = dir.join(&output.ledger);
    let mut file = std::io::BufWriter::new(fs::File::create(&ledger_path)?);
    obs.ledger.write_csv(&mut file)?;
    drop(file);
    let summary = result?;
    if obs.every > 0 && obs.last_snapshot != Some(summary.steps) {
        obs.snapshot(&summary.field, summary.t, summary.steps)?;
    }
    let last = obs.ledger.rows.last().expect("advance records the initial state");
    let rs = RunSummary {
        final_time: summary.t,
        steps: summary.steps,
        rejections: summary.rejections,
        final_energy: summary.energy.total,
        final_delta_sep: last.delta_sep,
        mass_drift: obs.ledger.mass_drift(),
    };
    let mut files = vec![ledger_path];
    files.append(&mut obs.written);
    files.push(write_json(&dir.join("summary.json"), &rs)?);
    Ok((rs, files))
}

pub fn cmd_run(loaded: &Loaded, opts: &Options) -> Result<RunSummary, CliError> {
    let started = unix_now();
    fs::create_dir_all(&opts.out)?;
    let u0 = initial_state(loaded)?;
    let c = &loaded.config;
    let outcome = simulate(&u0, &loaded.params, &loaded.solver, c.run.t_end, &c.output, &opts.out);
    let (summary, files) = match outcome {
        Ok(v) => v,
        Err(e) => {
            let ledger = opts.out.join(&c.output.ledger);
            finish("run", loaded, opts, started, &[ledger])?;
            return Err(e);
        }
    };
    finish("run", loaded, opts, started, &files)?;
    println!(
        "t = {} after {} steps ({} rejected); energy {:.9e}, delta_sep {:.4}, mass drift {:.1e}",
        summary.final_time,
        summary.steps,
        summary.rejections,
        summary.final_energy,
        summary.final_delta_sep,
        summary.mass_drift
    );
    Ok(summary)
}

/// Steps of the energy-law run inside `verify`.
pub const VERIFY_RUN_STEPS: u64 = 200;

pub fn cmd_verify(loaded: &Loaded, opts: &Options) -> Result<Vec<verify::Check>, CliError> {
    let started = unix_now();
    fs::create_dir_all(&opts.out)?;
    let u0 = generate(&loaded.config.initial, &loaded.grid)?;
    let seed = loaded.config.initial.seed;
    let checks = verify::run_suite(&loaded.grid, loaded.params, &u0, seed, VERIFY_RUN_STEPS)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!("{:<width$}  {mark}  {}", c.name, c.detail);
    }
    let report = write_json(&opts.out.join("verify.json"), &checks)?;
    finish("verify", loaded, opts, started, &[report])?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    if failed.is_empty() {
        Ok(checks)
    } else {
        Err(CliError::Verify(failed))
    }
}

pub fn cmd_dispersion(loaded: &Loaded, opts: &Options) -> Result<f64, CliError> {
    let started = unix_now();
    fs::create_dir_all(&opts.out)?;
    let d = &loaded.config.dispersion;
    let rows = dispersion_experiment(&loaded.grid, &loaded.params, &d.modes, d.amplitude)?;
    let mut csv = String::from("mode,wavenumber,sigma_closed,sigma_measured,rel_error\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.mode, r.wavenumber, r.sigma_closed, r.sigma_measured, r.rel_error
        ));
    }
    let csv_path = opts.out.join("dispersion.csv");
    fs::write(&csv_path, csv)?;
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Report<'a> {
        rows: &'a [fch_core::diagnostics::DispersionRow],
        max_rel_error: f64,
    }
    let json = write_json(&opts.out.join("dispersion.json"), &Report { rows: &rows, max_rel_error: worst })?;
    finish("dispersion", loaded, opts, started, &[csv_path, json])?;
    println!("{} modes, max relative rate error {worst:.3e}", rows.len());
    Ok(worst)
}

/// `amplitude · cos(2π mode x₀ / L₀)`, mean-free on both boundary modes.
pub fn perturbation(grid: &Arc<Grid>, amplitude: f64, mode: u32) -> ScalarField {
    let k = 2.0 * PI * f64::from(mode) / grid.lengths()[0];
    ScalarField::from_fn(grid, |x| amplitude * (k * x[0]).cos())
}

pub fn cmd_cdep(loaded: &Loaded, opts: &Options) -> Result<fch_core::diagnostics::CdepReport, CliError> {
    let started = unix_now();
    fs::create_dir_all(&opts.out)?;
    let c = &loaded.config.cdep;
    if 2 * c.mode as usize >= loaded.grid.counts()[0] {
        return Err(CliError::Config(format!("cdep: mode {} is not resolved", c.mode)));
    }
    let u01 = initial_state(loaded)?;
    let u02 = u01.add(&perturbation(&loaded.grid, c.amplitude, c.mode))?;
    let t_end = c.t_end.unwrap_or(loaded.config.run.t_end);
    let solver = match c.dt {
        Some(dt) => SolverConfig { dt0: dt, dt_max: dt, dt_min: loaded.solver.dt_min.min(dt), ..loaded.solver },
        None => loaded.solver,
    };
    let report = cdep_experiment(&u01, &u02, &loaded.params, &solver, t_end)?;
    let mut csv = String::from("t,dual_distance\n");
    for (t, d) in report.times.iter().zip(&report.dual_distance) {
        csv.push_str(&format!("{t},{d}\n"));
    }
    let csv_path = opts.out.join("cdep.csv");
    fs::write(&csv_path, csv)?;
    let json = write_json(&opts.out.join("cdep.json"), &report)?;
    finish("cdep", loaded, opts, started, &[csv_path, json])?;
    println!("fitted C = {:.6}, envelope_ok = {}", report.fitted_c, report.envelope_ok);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub eta: f64,
    pub level: Option<u32>,
    pub dir: String,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

pub fn cmd_sweep(loaded: &Loaded, opts: &Options) -> Result<Vec<SweepEntry>, CliError> {
    let started = unix_now();
    let sweep = loaded
        .config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep: missing [sweep] block".into()))?;
    let levels: Vec<Option<u32>> =
        if sweep.levels.is_empty() { vec![None] } else { sweep.levels.iter().map(|&n| Some(n)).collect() };
    let mut jobs = Vec::new();
    for &lambda in &sweep.lambdas {
        for &eta in &sweep.etas {
            for &level in &levels {
                jobs.push((lambda, eta, level));
            }
        }
    }
    let u_raw = generate(&loaded.config.initial, &loaded.grid)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = opts.threads {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let base = opts.out.join("sweep");
    let cfg = &loaded.config;
    // each job owns its own directory, so nothing is shared between workers
    let results: Vec<(SweepEntry, Vec<PathBuf>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(lambda, eta, level)| {
                let tag = match level {
                    Some(n) => format!("lambda{lambda}_eta{eta}_n{n}"),
                    None => format!("lambda{lambda}_eta{eta}_exact"),
                };
                let dir = base.join(&tag);
                let outcome = (|| -> Result<(RunSummary, Vec<PathBuf>), CliError> {
                    let params = PotentialParams::new(lambda, eta)?;
                    let mut solver = loaded.solver;
                    solver.truncation = match level {
                        Some(n) => Some(TruncationLevel::new(n)?),
                        None => loaded.solver.truncation,
                    };
                    solver.validate()?;
                    let u0 = match solver.truncation {
                        Some(lvl) => regularize_initial(&u_raw, lvl)?,
                        None => u_raw.clone(),
                    };
                    simulate(&u0, &params, &solver, cfg.run.t_end, &cfg.output, &dir)
                })();
                let (summary, error, files) = match outcome {
                    Ok((s, f)) => (Some(s), None, f),
                    Err(e) => (None, Some(e.to_string()), Vec::new()),
                };
                (SweepEntry { lambda, eta, level, dir: format!("sweep/{tag}"), summary, error }, files)
            })
            .collect()
    });
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (entry, mut f) in results {
        files.append(&mut f);
        entries.push(entry);
    }
    files.push(write_json(&opts.out.join("sweep.json"), &entries)?);
    finish("sweep", loaded, opts, started, &files)?;
    let failed: Vec<&SweepEntry> = entries.iter().filter(|e| e.error.is_some()).collect();
    println!("{} runs, {} failed", entries.len(), failed.len());
    for e in &failed {
        println!("  {}: {}", e.dir, e.error.as_deref().unwrap_or_default());
    }
    if !failed.is_empty() {
        let msgs = failed.iter().map(|e| format!("{}: {}", e.dir, e.error.as_deref().unwrap_or_default()));
        return Err(CliError::Sweep(msgs.collect()));
    }
    Ok(entries)
}

pub fn cmd_init(loaded: &Loaded, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let started = unix_now();
    fs::create_dir_all(&opts.out)?;
    let u0 = generate(&loaded.config.initial, &loaded.grid)?;
    let (bin, json) = snapshot::write(&opts.out.join("initial"), &u0, 0.0, "initial")?;
    let mut files = vec![bin, json];
    if let Some(lvl) = loaded.solver.truncation {
        let un = regularize_initial(&u0, lvl)?;
        let (bin, json) =
            snapshot::write(&opts.out.join(format!("initial_n{}", lvl.n())), &un, 0.0, "regularized initial")?;
        files.extend([bin, json]);
    }
    finish("init", loaded, opts, started, &files)?;
    println!("wrote {} files to {}", files.len(), opts.out.display());
    Ok(files)
}
