//! Run configuration: a TOML file plus command-line flags, merged with
//! defaults into one fully resolved description that is echoed back out as
//! the run manifest. Unknown keys anywhere in the file are errors.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gatom_core::disorder::DisorderSpec;
use gatom_core::EmitterConfig;
use serde::{Deserialize, Serialize};

use crate::CommonArgs;

/// Environment variable consulted for the output directory when `--out` is
/// not given.
pub const OUT_ENV: &str = "GATOM_OUT";

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    /// Written by manifests; accepted and ignored when a manifest is fed
    /// back in as a config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    /// Keys that were supplied by more than one source, with the winner.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<OverrideRecord>,
    pub emitter: EmitterSection,
    pub dfi: DfiSection,
    pub disorder: DisorderSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub window: WindowSection,
    pub output: OutputSection,
    pub fit: FitSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub version: String,
    pub kind: String,
}

/// One configuration key that arrived from several sources. `used` is the
/// value the run actually took; precedence is flag > environment > file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OverrideRecord {
    pub key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env: Option<String>,
    pub used: String,
}

/// Coupling-point geometry in user units: frequencies are quoted divided by
/// 2 pi and positions in units of the nominal inter-point delay tau.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitterSection {
    /// Number of coupling points.
    pub n: usize,
    /// Carrier detuning, Omega tau / 2 pi.
    pub omega_tau_2pi: f64,
    /// Coupling rate, gamma tau / 2 pi.
    pub gamma_tau_2pi: f64,
    /// Relative strengths G_m; all ones when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strengths: Option<Vec<f64>>,
    /// Positions in units of tau; the grid 0, 1, .., n-1 when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
}

impl Default for EmitterSection {
    fn default() -> Self {
        EmitterSection {
            n: 3,
            omega_tau_2pi: 2.22,
            gamma_tau_2pi: 0.13,
            strengths: None,
            positions: None,
        }
    }
}

impl EmitterSection {
    pub fn build(&self) -> Result<EmitterConfig> {
        let mut cfg =
            EmitterConfig::nominal(self.n, TAU * self.omega_tau_2pi, TAU * self.gamma_tau_2pi);
        if let Some(s) = &self.strengths {
            cfg.strengths = s.clone();
        }
        if let Some(x) = &self.positions {
            cfg.positions = x.clone();
        }
        cfg.validate().context("emitter section")?;
        Ok(cfg)
    }

    /// Fills the optional arrays with their nominal values so the manifest
    /// records every parameter explicitly.
    pub fn resolve(&mut self) {
        self.strengths.get_or_insert_with(|| vec![1.0; self.n]);
        self.positions
            .get_or_insert_with(|| (0..self.n).map(|m| m as f64).collect());
    }
}

/// Braided two-atom parameters. Rates and detunings share one unit system;
/// phases are in radians.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DfiSection {
    /// Common coupling rate gamma_0.
    pub gamma0: f64,
    /// Common propagation phase phi_0 in radians.
    pub phi0: f64,
    /// Qubit detunings.
    pub omega_a: f64,
    pub omega_b: f64,
}

impl Default for DfiSection {
    fn default() -> Self {
        DfiSection {
            gamma0: 4.78e-4,
            phi0: std::f64::consts::FRAC_PI_2,
            omega_a: 0.0,
            omega_b: 0.0,
        }
    }
}

impl DfiSection {
    pub fn build(&self) -> gatom_core::dfi::BraidedConfig {
        let mut cfg = gatom_core::dfi::BraidedConfig::symmetric(self.gamma0, self.phi0);
        cfg.omega_a = self.omega_a;
        cfg.omega_b = self.omega_b;
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSection {
    /// Relative strength deviation.
    pub sigma_g: f64,
    /// Position deviation in units of tau (phase deviation for the braided
    /// pair).
    pub sigma_x: f64,
    /// Ensemble size.
    pub samples: usize,
    /// Ensemble seed.
    pub seed: u64,
}

impl Default for DisorderSection {
    fn default() -> Self {
        DisorderSection {
            sigma_g: 0.0,
            sigma_x: 0.0,
            samples: 100,
            seed: 1,
        }
    }
}

impl DisorderSection {
    pub fn spec(&self, sigma_g: f64, sigma_x: f64) -> DisorderSpec {
        DisorderSpec {
            sigma_g,
            sigma_x,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for GridAxis {
    fn default() -> Self {
        GridAxis {
            min: 0.0,
            max: 0.05,
            count: 11,
            spacing: Spacing::Linear,
        }
    }
}

/// The phase axis of the phi sweep. A separate type so that a partially
/// written `[grid.phi]` section backfills from the phase defaults, not the
/// deviation defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for PhiAxis {
    fn default() -> Self {
        PhiAxis {
            min: 0.0,
            max: std::f64::consts::PI,
            count: 512,
            spacing: Spacing::Linear,
        }
    }
}

impl PhiAxis {
    pub fn axis(&self) -> GridAxis {
        GridAxis {
            min: self.min,
            max: self.max,
            count: self.count,
            spacing: self.spacing,
        }
    }
}

/// Sweep axes: `g` and `x` are the disorder deviations for the 2D sweeps,
/// `phi` is the phase axis of the phi sweep.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub g: GridAxis,
    pub x: GridAxis,
    pub phi: PhiAxis,
}

/// Per-sample rate extractor used by `sweep-dark`. `auto` picks `markov`
/// when N^2 gamma tau < 0.1 and `poles` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extractor {
    Auto,
    Markov,
    Poles,
    Dde,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Integration horizon in units of tau; a rate-based default when
    /// omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Integrator step; the library default when omitted. One shared step
    /// is used for every curve of a run so a manifest reruns identically.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Keep every stride-th trajectory sample in `emit` output.
    pub stride: usize,
    /// Field snapshot time; the horizon when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    /// Field snapshot grid; the full light cone when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    pub x_count: usize,
    pub extractor: Extractor,
    /// Newton seed grid for pole searches; 0 picks a per-command default.
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_max: None,
            dt: None,
            stride: 1,
            time: None,
            x_min: None,
            x_max: None,
            x_count: 801,
            extractor: Extractor::Auto,
            n_re: 0,
            n_im: 0,
        }
    }
}

/// Pole search window overrides; unset edges fall back to the default
/// window for the configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_max: Option<f64>,
}

impl WindowSection {
    pub fn to_window(&self, cfg: &EmitterConfig) -> gatom_core::spectral::Window {
        let mut w = gatom_core::spectral::default_window(cfg);
        if let Some(v) = self.re_min {
            w.re_min = v;
        }
        if let Some(v) = self.re_max {
            w.re_max = v;
        }
        if let Some(v) = self.im_min {
            w.im_min = v;
        }
        if let Some(v) = self.im_max {
            w.im_max = v;
        }
        w
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Output directory; overridden by GATOM_OUT and by --out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File name stem; the subcommand name when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Power,
    Debye2,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    /// Sweep CSV to fit; required for the `fit` subcommand.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub model: ModelChoice,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            input: None,
            model: ModelChoice::Both,
        }
    }
}

/// A fully resolved run: the manifest-ready configuration plus the output
/// location.
pub struct Run {
    pub cfg: ConfigFile,
    pub out_dir: PathBuf,
    pub stem: String,
    pub threads: Option<usize>,
}

impl Run {
    /// Path of an output artifact, `<dir>/<stem><suffix>`.
    pub fn path(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}{}", self.stem, suffix))
    }

    pub fn write_manifest(&self) -> Result<()> {
        let text = toml::to_string_pretty(&self.cfg).context("serializing manifest")?;
        let path = self.path("_manifest.toml");
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn toml_display(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn lookup<'a>(raw: Option<&'a toml::Value>, path: &[&str]) -> Option<&'a toml::Value> {
    let mut v = raw?;
    for key in path {
        v = v.get(key)?;
    }
    Some(v)
}

/// Merges the config file (if any) with the common flags and the
/// environment. Flags win over the environment, which wins over the file;
/// any key supplied by more than one source is recorded in the manifest's
/// provenance block.
pub fn resolve(kind: &str, args: &CommonArgs) -> Result<Run> {
    let (mut cfg, raw) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let cfg: ConfigFile = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            let raw: toml::Value = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            (cfg, Some(raw))
        }
        None => (ConfigFile::default(), None),
    };

    let mut provenance = Vec::new();
    let mut record = |key: &str,
                      file: Option<String>,
                      flag: Option<String>,
                      env: Option<String>,
                      used: String| {
        let sources = usize::from(file.is_some()) + usize::from(flag.is_some()) + usize::from(env.is_some());
        if sources >= 2 {
            provenance.push(OverrideRecord {
                key: key.to_string(),
                file,
                flag,
                env,
                used,
            });
        }
    };

    if let Some(seed) = args.seed {
        record(
            "disorder.seed",
            lookup(raw.as_ref(), &["disorder", "seed"]).map(toml_display),
            Some(seed.to_string()),
            None,
            seed.to_string(),
        );
        cfg.disorder.seed = seed;
    }
    if let Some(samples) = args.samples {
        record(
            "disorder.samples",
            lookup(raw.as_ref(), &["disorder", "samples"]).map(toml_display),
            Some(samples.to_string()),
            None,
            samples.to_string(),
        );
        cfg.disorder.samples = samples;
    }

    let flag_out = args.out.as_ref().map(|p| p.display().to_string());
    let env_out = std::env::var(OUT_ENV).ok();
    let file_out = cfg.output.dir.clone();
    let used_out = flag_out
        .clone()
        .or_else(|| env_out.clone())
        .or_else(|| file_out.clone())
        .unwrap_or_else(|| "out".to_string());
    record("output.dir", file_out, flag_out, env_out, used_out.clone());
    cfg.output.dir = Some(used_out.clone());

    let stem = cfg.output.stem.clone().unwrap_or_else(|| kind.to_string());
    cfg.output.stem = Some(stem.clone());
    cfg.run.stride = cfg.run.stride.max(1);
    cfg.emitter.resolve();
    cfg.meta = Some(Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: kind.to_string(),
    });
    cfg.provenance = provenance;

    Ok(Run {
        cfg,
        out_dir: PathBuf::from(used_out),
        stem,
        threads: args.threads,
    })
}

/// Records a flag/file conflict discovered after `resolve`, for keys owned
/// by individual subcommands.
pub fn record_override(run: &mut Run, key: &str, file: Option<String>, flag: Option<String>, used: String) {
    if file.is_some() && flag.is_some() {
        run.cfg.provenance.push(OverrideRecord {
            key: key.to_string(),
            file,
            flag,
            env: None,
            used,
        });
    }
}

pub fn ensure_out_dir(run: &Run) -> Result<()> {
    std::fs::create_dir_all(&run.out_dir)
        .with_context(|| format!("creating output directory {}", run.out_dir.display()))
}

/// Path helper for inputs named in the config: relative paths are taken as
/// given (relative to the working directory).
pub fn input_path(s: &str) -> PathBuf {
    Path::new(s).to_path_buf()
}
