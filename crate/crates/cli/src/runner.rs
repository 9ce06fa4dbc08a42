//! `run`, `diagnose` and `spectrum`.
//!
//! A run directory holds:
//!
//! ```text
//! resolved_config.toml   every parameter used, defaults filled in
//! snapshots/             snap_<step>.bin (initial, every snapshot_every, final)
//! invariants.csv radius.csv ledger.csv steps.csv [probes.csv]
//! report.json            T₀, C_user, outcome, ledger margins, invariant drifts
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use ionflow::diagnostics::{
    gevrey_energy, npd_radius_bound, shell_spectrum, species_gevrey_sum, state_radius_estimate, GronwallLedger,
    InvariantTracker, LedgerRow, RadiusRecord, T0Calibrator, DEFAULT_NOISE_FLOOR,
};
use ionflow::{run, Outcome, SimState};
use serde::Serialize;

use crate::config::{load_config, ModelKind, RunConfig};
use crate::error::{CliError, Result};
use crate::init::initial_state;
use crate::snapshot::{list_snapshots, read_snapshot, snapshot_name, write_snapshot};
use crate::timeseries::{SeriesWriter, TimeseriesRow, LEDGER_HEADER, RADIUS_HEADER, STEPS_HEADER};

pub const RESOLVED_CONFIG: &str = "resolved_config.toml";
pub const REPORT: &str = "report.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct T0Report {
    pub value: f64,
    /// `config` or `calibrated`.
    pub source: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum OutcomeReport {
    Completed,
    Diverged { step: usize, time: f64, detail: String },
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InvariantSummary {
    pub max_relative_mass_drift: Vec<f64>,
    pub max_abs_mean_velocity: f64,
    /// `max |∫ρ∇Φ| / ‖ρ‖²` over samples with nonzero charge.
    pub max_force_mean_ratio: f64,
    pub min_concentration: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RadiusSummary {
    pub samples: usize,
    pub failed_fits: usize,
    /// Samples with `tau_est < tau_theory`.
    pub below_theory: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LedgerSummary {
    pub rows: usize,
    pub min_margin: f64,
    pub negative_margins: usize,
    pub exponent_monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub model: ModelKind,
    pub n: usize,
    pub seed: u64,
    pub c_user: f64,
    pub norm_order: f64,
    pub tau0: f64,
    pub t0: Option<T0Report>,
    pub outcome: OutcomeReport,
    pub steps: usize,
    pub final_time: f64,
    pub snapshots: usize,
    pub invariants: InvariantSummary,
    pub radius: RadiusSummary,
    pub ledger: LedgerSummary,
}

impl RunReport {
    pub fn diverged(&self) -> bool {
        matches!(self.outcome, OutcomeReport::Diverged { .. })
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

struct RadiusSample {
    time: f64,
    tau_est: f64,
    fit_r2: f64,
    gevrey_norm: f64,
    /// NPE budget radius at this time.
    tau_budget: Option<f64>,
}

/// Everything computed per sampled state, shared by `run` and `diagnose`.
struct DiagnosticsSink {
    cfg: RunConfig,
    initial_mass: Vec<f64>,
    tracker: InvariantTracker,
    ledger: Option<GronwallLedger>,
    ledger_error: Option<String>,
    ledger_rows: Vec<LedgerRow>,
    calibrator: T0Calibrator,
    radius: Vec<RadiusSample>,
    invariants: SeriesWriter,
    ledger_csv: SeriesWriter,
    probes: Option<SeriesWriter>,
    summary: InvariantSummary,
}

impl DiagnosticsSink {
    fn new(dir: &Path, cfg: &RunConfig, initial: &SimState) -> Result<Self> {
        let m = cfg.diagnostics.norm_order;
        let tracker = InvariantTracker::new(m);
        let header = ionflow::diagnostics::invariant_report(initial, m)?.header();
        let strings = |h: &[&str]| h.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let probes = if cfg.diagnostics.gevrey_probes.is_empty() {
            None
        } else {
            let mut h = vec!["time".to_string()];
            h.extend((0..cfg.diagnostics.gevrey_probes.len()).map(|j| format!("gevrey_{j}")));
            Some(SeriesWriter::create(&dir.join("probes.csv"), &h)?)
        };
        let (ledger, ledger_error) = match GronwallLedger::new(initial, cfg.diagnostics.c_user, m, cfg.diagnostics.tau0) {
            Ok(l) => (Some(l), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let species = initial.species().len();
        Ok(Self {
            cfg: cfg.clone(),
            initial_mass: initial.species().iter().map(|s| s.mass()).collect(),
            tracker,
            ledger,
            ledger_error,
            ledger_rows: Vec::new(),
            calibrator: T0Calibrator::new(m),
            radius: Vec::new(),
            invariants: SeriesWriter::create(&dir.join("invariants.csv"), &header)?,
            ledger_csv: SeriesWriter::create(&dir.join("ledger.csv"), &strings(&LEDGER_HEADER))?,
            probes,
            summary: InvariantSummary {
                max_relative_mass_drift: vec![0.0; species],
                max_abs_mean_velocity: 0.0,
                max_force_mean_ratio: 0.0,
                min_concentration: vec![f64::INFINITY; species],
            },
        })
    }

    fn sample(&mut self, s: &SimState) -> Result<()> {
        let m = self.cfg.diagnostics.norm_order;
        let r = self.tracker.report(s)?;
        self.invariants.append(&r.values())?;
        let sm = &mut self.summary;
        for (i, (&mass, &m0)) in r.mass_per_species.iter().zip(&self.initial_mass).enumerate() {
            let drift = if m0 != 0.0 { ((mass - m0) / m0).abs() } else { mass.abs() };
            sm.max_relative_mass_drift[i] = sm.max_relative_mass_drift[i].max(drift);
            sm.min_concentration[i] = sm.min_concentration[i].min(r.min_concentration_per_species[i]);
        }
        sm.max_abs_mean_velocity = sm.max_abs_mean_velocity.max(r.mean_velocity[0].abs().max(r.mean_velocity[1].abs()));
        if r.rho_l2_squared > 0.0 {
            let f = r.force_mean[0].abs().max(r.force_mean[1].abs()) / r.rho_l2_squared;
            sm.max_force_mean_ratio = sm.max_force_mean_ratio.max(f);
        }

        let mut tau_budget = None;
        if let Some(ledger) = &mut self.ledger {
            match ledger.push(s) {
                Ok(row) => {
                    self.ledger_csv.append(&row.values())?;
                    tau_budget = row.tau;
                    self.ledger_rows.push(row);
                }
                Err(e) => {
                    log::warn!("ledger stopped at t = {}: {e}", s.time());
                    self.ledger_error = Some(e.to_string());
                    self.ledger = None;
                }
            }
        }

        if let Err(e) = self.calibrator.push(s) {
            log::warn!("T0 calibration sample skipped at t = {}: {e}", s.time());
        }
        let fit = state_radius_estimate(s, self.cfg.radius_band(), DEFAULT_NOISE_FLOOR);
        let (tau_est, fit_r2, gevrey_norm) = match fit {
            Ok(f) => {
                let g = species_gevrey_sum(s, f.tau, m).map(f64::sqrt).unwrap_or(f64::NAN);
                (f.tau, f.fit_quality, g)
            }
            Err(e) => {
                log::debug!("radius fit failed at t = {}: {e}", s.time());
                (f64::NAN, f64::NAN, f64::NAN)
            }
        };
        self.radius.push(RadiusSample {
            time: s.time(),
            tau_est,
            fit_r2,
            gevrey_norm,
            tau_budget,
        });

        if let Some(w) = &mut self.probes {
            let mut row = vec![s.time()];
            for p in &self.cfg.diagnostics.gevrey_probes {
                row.push(gevrey_energy(s, p.tau, p.m).unwrap_or(f64::NAN));
            }
            w.append(&row)?;
        }
        Ok(())
    }

    /// Writes `radius.csv` once T₀ is known and returns the summaries.
    fn finish(mut self, dir: &Path) -> Result<(Option<T0Report>, RadiusSummary, LedgerSummary, InvariantSummary)> {
        self.invariants.flush()?;
        self.ledger_csv.flush()?;
        if let Some(w) = &mut self.probes {
            w.flush()?;
        }
        let d = &self.cfg.diagnostics;
        let diffusivities: Vec<f64> = self.cfg.species.iter().map(|s| s.d).collect();
        let t0 = match (self.cfg.model, d.t0) {
            (ModelKind::Npe, _) => None,
            (ModelKind::Npd, Some(v)) => Some(T0Report {
                value: v,
                source: "config".into(),
            }),
            (ModelKind::Npd, None) => self.calibrator.t0().ok().map(|v| T0Report {
                value: v,
                source: "calibrated".into(),
            }),
        };
        let strings: Vec<String> = RADIUS_HEADER.iter().map(|s| s.to_string()).collect();
        let mut w = SeriesWriter::create(&dir.join("radius.csv"), &strings)?;
        let mut summary = RadiusSummary {
            samples: self.radius.len(),
            failed_fits: 0,
            below_theory: 0,
        };
        for r in &self.radius {
            let tau_theory = match self.cfg.model {
                ModelKind::Npe => r.tau_budget.unwrap_or(f64::NAN),
                ModelKind::Npd => t0
                    .as_ref()
                    .and_then(|t0| npd_radius_bound(r.time, &diffusivities, t0.value).ok())
                    .unwrap_or(f64::NAN),
            };
            let rec = RadiusRecord {
                time: r.time,
                tau_estimated: r.tau_est,
                tau_theory,
                fit_quality: r.fit_r2,
                gevrey_norm_at_tau: r.gevrey_norm,
            };
            if r.tau_est.is_nan() {
                summary.failed_fits += 1;
            } else if r.tau_est < tau_theory {
                summary.below_theory += 1;
            }
            w.append(&rec.values())?;
        }
        w.flush()?;
        let rows = &self.ledger_rows;
        let ledger = LedgerSummary {
            rows: rows.len(),
            min_margin: rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
            negative_margins: rows.iter().filter(|r| r.margin < 0.0).count(),
            exponent_monotone: rows.windows(2).all(|w| w[1].exponent >= w[0].exponent),
            error: self.ledger_error,
        };
        Ok((t0, summary, ledger, self.summary))
    }
}

/// Options that override or complement the config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; the config's `output_dir` when absent.
    pub out: Option<PathBuf>,
    pub cadence: Option<usize>,
    /// Base for relative paths inside the config (file initial conditions).
    pub base_dir: PathBuf,
}

/// Executes a validated config end to end. Divergence is not an error here:
/// it is recorded in the returned report (and in `report.json`).
pub fn run_config(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport> {
    let mut cfg = cfg.clone();
    if let Some(k) = opts.cadence {
        cfg.diagnostics.cadence = k;
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    let dir = PathBuf::from(&cfg.output_dir);
    let snaps = dir.join(SNAPSHOT_DIR);
    create_dir(&snaps)?;
    for old in list_snapshots(&snaps)? {
        fs::remove_file(&old).map_err(|e| CliError::io(&old, e))?;
    }
    write_text(&dir.join(RESOLVED_CONFIG), &cfg.to_toml())?;

    let initial = initial_state(&cfg, &opts.base_dir)?;
    let stepper = cfg.stepper_config();
    let cadence = cfg.diagnostics.cadence;
    let snapshot_every = cfg.diagnostics.snapshot_every;
    let t_end = stepper.t_end;
    let mut sink = DiagnosticsSink::new(&dir, &cfg, &initial)?;
    let mut failure: Option<CliError> = None;
    let mut written = 0usize;
    let mut last_written = None;
    let mut last_state = initial.clone();
    let traj = {
        let mut hook = |step: usize, s: &SimState| -> ionflow::Result<()> {
            let is_final = s.time() >= t_end;
            if step > 0 {
                last_state = s.clone();
            }
            let mut go = || -> Result<()> {
                if step == 0 || is_final || (snapshot_every > 0 && step.is_multiple_of(snapshot_every)) {
                    write_snapshot(s, &snaps.join(snapshot_name(step)))?;
                    written += 1;
                    last_written = Some(step);
                }
                if step.is_multiple_of(cadence) || is_final {
                    sink.sample(s)?;
                }
                Ok(())
            };
            go().map_err(|e| {
                let msg = e.to_string();
                failure = Some(e);
                ionflow::Error::Data(msg)
            })
        };
        run(&initial, &stepper, &mut [&mut hook])
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let traj = traj?;
    let outcome = match &traj.outcome {
        Outcome::Completed => OutcomeReport::Completed,
        Outcome::Diverged { step, time, detail } => {
            log::error!("diverged at step {step} (t = {time}): {detail}");
            // keep the last good state for inspection
            let last = traj.steps();
            if last_written != Some(last) {
                write_snapshot(&last_state, &snaps.join(snapshot_name(last)))?;
                written += 1;
            }
            OutcomeReport::Diverged {
                step: *step,
                time: *time,
                detail: detail.clone(),
            }
        }
    };

    let strings: Vec<String> = STEPS_HEADER.iter().map(|s| s.to_string()).collect();
    let mut steps = SeriesWriter::create(&dir.join("steps.csv"), &strings)?;
    for (i, h) in traj.step_sizes.iter().enumerate() {
        steps.append(&[(i + 1) as f64, traj.times[i + 1], *h])?;
    }
    steps.flush()?;

    let (t0, radius, ledger, invariants) = sink.finish(&dir)?;
    let report = RunReport {
        model: cfg.model,
        n: cfg.n,
        seed: cfg.seed,
        c_user: cfg.diagnostics.c_user,
        norm_order: cfg.diagnostics.norm_order,
        tau0: cfg.diagnostics.tau0,
        t0,
        outcome,
        steps: traj.steps(),
        final_time: last_state.time(),
        snapshots: written,
        invariants,
        radius,
        ledger,
    };
    write_report(&dir.join(REPORT), &report)?;
    Ok(report)
}

fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    write_text(path, &text)
}

/// Loads `path`, runs it and resolves relative paths against its directory.
pub fn run_file(path: &Path, out: Option<PathBuf>, cadence: Option<usize>) -> Result<RunReport> {
    let cfg = load_config(path)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    run_config(&cfg, &RunOptions { out, cadence, base_dir })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DiagnoseReport {
    pub snapshots: usize,
    pub t0: Option<T0Report>,
    pub invariants: InvariantSummary,
    pub radius: RadiusSummary,
    pub ledger: LedgerSummary,
}

fn run_dir_config(run_dir: &Path) -> Result<RunConfig> {
    load_config(&run_dir.join(RESOLVED_CONFIG))
}

fn load_snapshots(run_dir: &Path) -> Result<Vec<SimState>> {
    let files = list_snapshots(&run_dir.join(SNAPSHOT_DIR))?;
    if files.is_empty() {
        return Err(CliError::Data {
            path: run_dir.join(SNAPSHOT_DIR),
            detail: "no snapshots found".into(),
        });
    }
    files.iter().map(|p| read_snapshot(p).map_err(CliError::from)).collect()
}

/// Recomputes the time series of a run directory from its stored snapshots
/// into `<run_dir>/diagnose/`. Time integrals (dissipation, ledger
/// exponents) use the snapshot times, so they are coarser than the run's.
pub fn diagnose(run_dir: &Path) -> Result<DiagnoseReport> {
    let cfg = run_dir_config(run_dir)?;
    let states = load_snapshots(run_dir)?;
    let out = run_dir.join("diagnose");
    create_dir(&out)?;
    let mut sink = DiagnosticsSink::new(&out, &cfg, &states[0])?;
    for s in &states {
        sink.sample(s)?;
    }
    let (t0, radius, ledger, invariants) = sink.finish(&out)?;
    let report = DiagnoseReport {
        snapshots: states.len(),
        t0,
        invariants,
        radius,
        ledger,
    };
    write_report(&out.join(REPORT), &report)?;
    Ok(report)
}

fn field_list(s: &SimState) -> Vec<(String, &ionflow::SpectralField)> {
    let mut v: Vec<(String, &ionflow::SpectralField)> = s
        .species()
        .iter()
        .enumerate()
        .map(|(i, sp)| (format!("c{i}"), &sp.concentration))
        .collect();
    if let Some(w) = s.vorticity() {
        v.push(("omega".into(), w));
    }
    v
}

/// Dumps shell spectra and radius fits into `<run_dir>/spectrum/`.
///
/// `shells.csv`: `time, field, shell, modes, k_at_max, max_amplitude, energy`
/// (mean excluded; `energy` is `Σ|f_k|²` over the shell).
/// `fits.csv`: `time, field, tau, fit_r2, algebraic_exponent, shells_used`;
/// field `state` is the combined estimate over all components.
pub fn spectrum(run_dir: &Path, snapshot: Option<&Path>) -> Result<PathBuf> {
    let cfg = run_dir_config(run_dir)?;
    let states = match snapshot {
        Some(p) => vec![read_snapshot(p)?],
        None => load_snapshots(run_dir)?,
    };
    let out = run_dir.join("spectrum");
    create_dir(&out)?;
    let shells_path = out.join("shells.csv");
    let fits_path = out.join("fits.csv");
    let csv_err = |p: &Path| {
        let p = p.to_path_buf();
        move |e: csv::Error| CliError::io(&p, std::io::Error::other(e))
    };
    let mut shells = csv::Writer::from_path(&shells_path).map_err(csv_err(&shells_path))?;
    let mut fits = csv::Writer::from_path(&fits_path).map_err(csv_err(&fits_path))?;
    shells
        .write_record(["time", "field", "shell", "modes", "k_at_max", "max_amplitude", "energy"])
        .map_err(csv_err(&shells_path))?;
    fits.write_record(["time", "field", "tau", "fit_r2", "algebraic_exponent", "shells_used"])
        .map_err(csv_err(&fits_path))?;
    let band = cfg.radius_band();
    let fmt = crate::timeseries::format_value;
    for s in &states {
        let t = fmt(s.time());
        let mut fit_rows = Vec::new();
        for (name, f) in field_list(s) {
            for st in shell_spectrum(f) {
                shells
                    .write_record([
                        t.clone(),
                        name.clone(),
                        st.shell.to_string(),
                        st.modes.to_string(),
                        fmt(st.k_at_max),
                        fmt(st.max_amplitude),
                        fmt(st.energy),
                    ])
                    .map_err(csv_err(&shells_path))?;
            }
            fit_rows.push((name, ionflow::diagnostics::radius_estimate(f, band)));
        }
        fit_rows.push(("state".into(), state_radius_estimate(s, band, DEFAULT_NOISE_FLOOR)));
        for (name, fit) in fit_rows {
            let (tau, r2, beta, used) = match fit {
                Ok(f) => (f.tau, f.fit_quality, f.algebraic_exponent, f.shells_used.to_string()),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN, "0".into()),
            };
            fits.write_record([t.clone(), name, fmt(tau), fmt(r2), fmt(beta), used])
                .map_err(csv_err(&fits_path))?;
        }
    }
    shells.flush().map_err(|e| CliError::io(&shells_path, e))?;
    fits.flush().map_err(|e| CliError::io(&fits_path, e))?;
    Ok(out)
}
