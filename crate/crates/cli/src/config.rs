//! Run configuration: a strict TOML document.
//!
//! Unknown keys are rejected everywhere. Defaults that depend on other keys
//! (the radius fit band depends on `n`) are filled in after parsing, so the
//! resolved document written next to a run contains every value used.
//!
//! ```toml
//! model = "npd"
//! n = 32
//! seed = 7
//!
//! [stepper]
//! dt = 0.01
//! t_end = 1.0
//!
//! [[species]]
//! z = 1.0
//! D = 0.5
//! initial = { kind = "constant", value = 1.0 }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Npd,
    Npe,
}

impl From<ModelKind> for ionflow::Model {
    fn from(m: ModelKind) -> Self {
        match m {
            ModelKind::Npd => ionflow::Model::Npd,
            ModelKind::Npe => ionflow::Model::Npe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Ifrk2,
    Ifrk4,
}

impl From<SchemeName> for ionflow::Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Ifrk2 => ionflow::Scheme::IfRk2,
            SchemeName::Ifrk4 => ionflow::Scheme::IfRk4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    pub species: Vec<SpeciesConfig>,
    /// Initial vorticity; NPE only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vorticity: Option<InitialSpec>,
}

fn default_output_dir() -> String {
    "ionflow_out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub scheme: SchemeName,
    pub dt: f64,
    pub adaptive: bool,
    pub cfl: f64,
    pub t_end: f64,
    pub positivity_clip: bool,
    pub positivity_tol: f64,
}

impl Default for StepperSection {
    fn default() -> Self {
        let d = ionflow::StepperConfig::default();
        Self {
            scheme: SchemeName::Ifrk4,
            dt: d.dt,
            adaptive: d.adaptive,
            cfl: d.cfl,
            t_end: d.t_end,
            positivity_clip: d.positivity_clip,
            positivity_tol: d.positivity_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyProbe {
    pub tau: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Steps between reports.
    pub cadence: usize,
    /// Steps between snapshots; 0 keeps the initial and final states only.
    pub snapshot_every: usize,
    /// Sobolev/Gevrey index `m` for the norm columns, ledgers and T₀.
    pub norm_order: f64,
    /// Shell range `[lo, hi]` for the radius fit; defaults to `[2, cutoff]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_band: Option<[i64; 2]>,
    pub c_user: f64,
    pub tau0: f64,
    /// Fixed T₀; calibrated from the run when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    pub gevrey_probes: Vec<GevreyProbe>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            cadence: 1,
            snapshot_every: 0,
            norm_order: 3.0,
            radius_band: None,
            c_user: 1.0,
            tau0: 0.1,
            t0: None,
            gevrey_probes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub z: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub initial: InitialSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudeLaw {
    /// Same amplitude on every shell.
    #[default]
    Flat,
    /// `|k|^{−decay}`.
    Power,
    /// `e^{−decay·|k|}`.
    Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: [i64; 2],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Initial-condition generator. Every kind produces a band-limited field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant {
        value: f64,
    },
    /// `mean + Σ amplitude·cos(k·x + phase)`.
    Modes {
        #[serde(default)]
        mean: f64,
        modes: Vec<ModeSpec>,
    },
    /// Random phases on every band mode with `lo ≤ |k| ≤ hi`, amplitude
    /// shaped by `law`. Seeded from the run seed.
    RandomBand {
        #[serde(default)]
        mean: f64,
        shells: [i64; 2],
        amplitude: f64,
        #[serde(default)]
        law: AmplitudeLaw,
        #[serde(default)]
        decay: f64,
    },
    /// Coefficients `amplitude·e^{−sigma|k|}·e^{−ik·center}` on the band.
    AnalyticBump {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        sigma: f64,
        #[serde(default = "default_center")]
        center: [f64; 2],
    },
    /// Periodic Gaussian `amplitude·exp((cos(x−x₀)+cos(y−y₀)−2)/width²)`.
    Gaussian {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        width: f64,
        #[serde(default = "default_center")]
        center: [f64; 2],
    },
    /// One field of a stored snapshot: `c0`, `c1`, ... or `omega`.
    File {
        path: String,
        field: String,
    },
}

fn default_center() -> [f64; 2] {
    [std::f64::consts::PI, std::f64::consts::PI]
}

/// Largest `k` with `3k < n`.
pub fn band_cutoff(n: usize) -> i64 {
    (n as i64 - 1) / 3
}

impl RunConfig {
    pub fn radius_band(&self) -> (i64, i64) {
        let [lo, hi] = self.diagnostics.radius_band.unwrap_or_else(|| default_band(self.n));
        (lo, hi)
    }

    pub fn stepper_config(&self) -> ionflow::StepperConfig {
        let s = &self.stepper;
        ionflow::StepperConfig {
            scheme: s.scheme.into(),
            dt: s.dt,
            adaptive: s.adaptive,
            cfl: s.cfl,
            t_end: s.t_end,
            positivity_clip: s.positivity_clip,
            positivity_tol: s.positivity_tol,
            cadence: 1,
            snapshot_every: 0,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn fill_defaults(&mut self) {
        if self.diagnostics.radius_band.is_none() && self.n.is_multiple_of(2) && self.n >= 4 {
            self.diagnostics.radius_band = Some(default_band(self.n));
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, msg: String| Err(CliError::validation(path, msg));
        if !self.n.is_multiple_of(2) {
            return bad("n", "n must be even".into());
        }
        if !(4..=4096).contains(&self.n) {
            return bad("n", format!("n must lie in [4, 4096], got {}", self.n));
        }
        if self.output_dir.is_empty() {
            return bad("output_dir", "must not be empty".into());
        }
        if self.species.is_empty() {
            return bad("species", "at least one species is required".into());
        }
        match (self.model, &self.vorticity) {
            (ModelKind::Npd, Some(_)) => return bad("vorticity", "NPE-only key in an NPD config".into()),
            (ModelKind::Npe, None) => return bad("vorticity", "NPE config needs an initial vorticity".into()),
            _ => {}
        }
        let s = &self.stepper;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return bad("stepper.dt", format!("must be positive and finite, got {}", s.dt));
        }
        if !(s.cfl > 0.0 && s.cfl <= 1.0) {
            return bad("stepper.cfl", format!("must lie in (0, 1], got {}", s.cfl));
        }
        if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
            return bad("stepper.t_end", format!("must be finite and >= 0, got {}", s.t_end));
        }
        if !(s.positivity_tol >= 0.0 && s.positivity_tol.is_finite()) {
            return bad("stepper.positivity_tol", format!("must be finite and >= 0, got {}", s.positivity_tol));
        }
        let d = &self.diagnostics;
        if d.cadence == 0 {
            return bad("diagnostics.cadence", "must be at least 1".into());
        }
        if !(d.norm_order >= 0.0 && d.norm_order.is_finite()) {
            return bad("diagnostics.norm_order", format!("must be finite and >= 0, got {}", d.norm_order));
        }
        let cutoff = band_cutoff(self.n);
        let (lo, hi) = self.radius_band();
        if !(lo >= 1 && lo < hi && hi <= cutoff) {
            return bad(
                "diagnostics.radius_band",
                format!("need 1 <= lo < hi <= {cutoff} for n = {}, got [{lo}, {hi}]", self.n),
            );
        }
        if !(d.c_user > 0.0 && d.c_user.is_finite()) {
            return bad("diagnostics.c_user", format!("must be positive, got {}", d.c_user));
        }
        if !(d.tau0 > 0.0 && d.tau0.is_finite()) {
            return bad("diagnostics.tau0", format!("must be positive, got {}", d.tau0));
        }
        if let Some(t0) = d.t0 {
            if !(t0 > 0.0 && t0.is_finite()) {
                return bad("diagnostics.t0", format!("must be positive, got {t0}"));
            }
        }
        for (i, p) in d.gevrey_probes.iter().enumerate() {
            if !(p.tau >= 0.0 && p.tau.is_finite()) {
                return bad(&format!("diagnostics.gevrey_probes[{i}].tau"), format!("must be >= 0, got {}", p.tau));
            }
            if !p.m.is_finite() {
                return bad(&format!("diagnostics.gevrey_probes[{i}].m"), "must be finite".into());
            }
        }
        for (i, sp) in self.species.iter().enumerate() {
            if !sp.z.is_finite() {
                return bad(&format!("species[{i}].z"), "must be finite".into());
            }
            if !(sp.d > 0.0 && sp.d.is_finite()) {
                return bad(&format!("species[{i}].D"), format!("diffusivity must be positive, got {}", sp.d));
            }
            sp.initial.validate(&format!("species[{i}].initial"), self.n)?;
        }
        if let Some(v) = &self.vorticity {
            v.validate("vorticity", self.n)?;
        }
        Ok(())
    }
}

fn default_band(n: usize) -> [i64; 2] {
    let cutoff = band_cutoff(n);
    [if cutoff > 3 { 2 } else { 1 }, cutoff]
}

impl InitialSpec {
    fn validate(&self, path: &str, n: usize) -> Result<()> {
        let bad = |key: &str, msg: String| Err(CliError::validation(format!("{path}.{key}"), msg));
        let finite = |key: &str, v: f64| if v.is_finite() { Ok(()) } else { bad(key, "must be finite".into()) };
        let cutoff = band_cutoff(n);
        match self {
            InitialSpec::Constant { value } => finite("value", *value),
            InitialSpec::Modes { mean, modes } => {
                finite("mean", *mean)?;
                if modes.is_empty() {
                    return bad("modes", "mode list is empty".into());
                }
                for (j, m) in modes.iter().enumerate() {
                    let [k1, k2] = m.k;
                    if k1.abs().max(k2.abs()) > cutoff {
                        return bad(
                            &format!("modes[{j}].k"),
                            format!("mode ({k1}, {k2}) is outside the dealiased band |k_i| <= {cutoff}"),
                        );
                    }
                    finite(&format!("modes[{j}].amplitude"), m.amplitude)?;
                    finite(&format!("modes[{j}].phase"), m.phase)?;
                }
                Ok(())
            }
            InitialSpec::RandomBand {
                mean,
                shells,
                amplitude,
                decay,
                ..
            } => {
                finite("mean", *mean)?;
                let [lo, hi] = *shells;
                if !(lo >= 1 && lo <= hi && hi <= cutoff) {
                    return bad("shells", format!("need 1 <= lo <= hi <= {cutoff}, got [{lo}, {hi}]"));
                }
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return bad("amplitude", format!("must be finite and >= 0, got {amplitude}"));
                }
                if !(*decay >= 0.0 && decay.is_finite()) {
                    return bad("decay", format!("must be finite and >= 0, got {decay}"));
                }
                Ok(())
            }
            InitialSpec::AnalyticBump {
                mean,
                amplitude,
                sigma,
                center,
            } => {
                finite("mean", *mean)?;
                finite("amplitude", *amplitude)?;
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return bad("sigma", format!("must be positive, got {sigma}"));
                }
                finite("center", center[0] + center[1])
            }
            InitialSpec::Gaussian {
                mean,
                amplitude,
                width,
                center,
            } => {
                finite("mean", *mean)?;
                finite("amplitude", *amplitude)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return bad("width", format!("must be positive, got {width}"));
                }
                finite("center", center[0] + center[1])
            }
            InitialSpec::File { path: file, field } => {
                if file.is_empty() {
                    return bad("path", "must not be empty".into());
                }
                if parse_field_name(field).is_none() {
                    return bad("field", format!("expected `c<index>` or `omega`, got `{field}`"));
                }
                Ok(())
            }
        }
    }
}

/// Field selector in a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldName {
    Species(usize),
    Omega,
}

pub fn parse_field_name(s: &str) -> Option<FieldName> {
    if s == "omega" {
        return Some(FieldName::Omega);
    }
    let idx = s.strip_prefix('c')?;
    if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    idx.parse().ok().map(FieldName::Species)
}

/// Parses, fills dependent defaults and validates.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::validation("<document>", e.message()))?;
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let message = e.inner().message().to_string();
        let mut path = e.path().to_string();
        // missing keys, and unknown keys inside tagged tables, are reported
        // at the parent table; name the key itself
        if let Some(key) = quoted_key(&message) {
            let names_key = path == key || path.ends_with(&format!(".{key}"));
            if message.starts_with("missing field") || (message.starts_with("unknown field") && !names_key) {
                path = if path == "." { key.to_string() } else { format!("{path}.{key}") };
            }
        }
        CliError::validation(path, message)
    })?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

fn quoted_key(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}
