use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::Args;
use serde::Serialize;
use wlab_core::ensemble::{EnsembleConfig, EntryLaw, TabulatedDensity};
use wlab_core::spectral::GoodConfigParams;
use wlab_core::{Error, Result};

/// Every key accepted in a config file, spelled as its flag.
pub const KEYS: &[&str] = &[
    "N",
    "samples",
    "seed",
    "ensemble",
    "entry_law",
    "density_file",
    "beta_exponent",
    "E0",
    "delta",
    "eps_grid",
    "band",
    "K_grid",
    "n",
    "L",
    "B",
    "rho0",
    "cap",
    "gamma",
    "epsilon",
    "kappa",
    "eta",
    "t",
    "dt",
    "method",
    "archive",
    "output",
    "threads",
    "label",
];

/// Settings shared by all subcommands. Values given here override the
/// config file, which overrides the built-in defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Flat `key = value` file; keys are the flag names without dashes,
    /// `#` starts a comment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Take settings from a previous run's manifest (as if it were a config
    /// file).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Matrix dimension.
    #[arg(long = "N")]
    pub n_dim: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// `gue` or `wigner`.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// gaussian, rademacher-smoothed, uniform or custom-density.
    #[arg(long = "entry_law")]
    pub entry_law: Option<String>,
    /// Two-column `x,density` table for the custom-density law.
    #[arg(long = "density_file")]
    pub density_file: Option<String>,
    /// Gaussian component exponent: s² = N^(−3/4+β).
    #[arg(long = "beta_exponent")]
    pub beta_exponent: Option<String>,
    #[arg(long = "E0")]
    pub e0: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Comma-separated, increasing, in (0, 1].
    #[arg(long = "eps_grid")]
    pub eps_grid: Option<String>,
    /// Half-width of the band of window centers pooled by repulsion.
    #[arg(long)]
    pub band: Option<String>,
    /// Comma-separated gap thresholds in units of 1/N.
    #[arg(long = "K_grid")]
    pub k_grid: Option<String>,
    /// Window size or polynomial order.
    #[arg(long)]
    pub n: Option<String>,
    /// Window start index.
    #[arg(long = "L")]
    pub l_index: Option<String>,
    /// External cutoff exponent.
    #[arg(long = "B")]
    pub b: Option<String>,
    /// Rescaled density of the equispaced external profile.
    #[arg(long)]
    pub rho0: Option<String>,
    /// Largest number of external points kept per side.
    #[arg(long)]
    pub cap: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    /// Flow time.
    #[arg(long)]
    pub t: Option<String>,
    /// Euler–Maruyama step.
    #[arg(long)]
    pub dt: Option<String>,
    /// `dbm` or `ou`.
    #[arg(long)]
    pub method: Option<String>,
    /// Input eigenvalue archive (CSV, or binary with a .bin extension).
    #[arg(long)]
    pub archive: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
    /// Worker threads; WLAB_THREADS is used when this is absent.
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long)]
    pub label: Option<String>,
}

impl Flags {
    fn pairs(&self) -> [(&'static str, &Option<String>); 28] {
        [
            ("N", &self.n_dim),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("ensemble", &self.ensemble),
            ("entry_law", &self.entry_law),
            ("density_file", &self.density_file),
            ("beta_exponent", &self.beta_exponent),
            ("E0", &self.e0),
            ("delta", &self.delta),
            ("eps_grid", &self.eps_grid),
            ("band", &self.band),
            ("K_grid", &self.k_grid),
            ("n", &self.n),
            ("L", &self.l_index),
            ("B", &self.b),
            ("rho0", &self.rho0),
            ("cap", &self.cap),
            ("gamma", &self.gamma),
            ("epsilon", &self.epsilon),
            ("kappa", &self.kappa),
            ("eta", &self.eta),
            ("t", &self.t),
            ("dt", &self.dt),
            ("method", &self.method),
            ("archive", &self.archive),
            ("output", &self.output),
            ("threads", &self.threads),
            ("label", &self.label),
        ]
    }
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
            line: i + 1,
            message: format!("expected key = value, got {line:?}"),
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::Format {
                line: i + 1,
                message: format!("unknown key {k:?}"),
            });
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Merged settings: manifest, then config file, then flags.
pub fn merged_settings(flags: &Flags) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    if let Some(path) = &flags.manifest {
        let text = fs::read_to_string(path)?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Format {
            line: e.line(),
            message: e.to_string(),
        })?;
        let settings = v
            .get("settings")
            .and_then(|s| s.as_object())
            .ok_or_else(|| Error::InvalidConfig("manifest has no settings table".into()))?;
        for (k, val) in settings {
            if let Some(s) = val.as_str() {
                map.insert(k.clone(), s.to_string());
            }
        }
    }
    if let Some(path) = &flags.config {
        map.extend(parse_config_text(&fs::read_to_string(path)?)?);
    }
    for (k, v) in flags.pairs() {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    Ok(map)
}

/// Fully resolved and validated settings of one run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(rename = "N")]
    pub n_dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub ensemble: String,
    pub entry_law: String,
    pub density_file: Option<PathBuf>,
    pub beta_exponent: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub delta: f64,
    pub eps_grid: Vec<f64>,
    pub band: f64,
    #[serde(rename = "K_grid")]
    pub k_grid: Vec<f64>,
    pub n: usize,
    #[serde(rename = "L")]
    pub l_index: Option<usize>,
    #[serde(rename = "B")]
    pub b: f64,
    pub rho0: f64,
    pub cap: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub eta: Option<f64>,
    pub t: f64,
    pub dt: f64,
    pub method: String,
    pub archive: Option<PathBuf>,
    pub output: PathBuf,
    pub threads: Option<usize>,
    pub label: String,
    #[serde(skip)]
    pub settings: BTreeMap<String, String>,
}

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = {s:?}"))),
    }
}

fn get_opt<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = {s:?}")))
        })
        .transpose()
}

fn get_list(map: &BTreeMap<String, String>, key: &str, default: &[f64]) -> Result<Vec<f64>> {
    match map.get(key) {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("cannot parse {key} entry {t:?}")))
            })
            .collect(),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

pub fn default_eps_grid() -> Vec<f64> {
    (0..9).map(|i| 0.2 * 5f64.powf(i as f64 / 8.0)).collect()
}

impl ExperimentConfig {
    pub fn resolve(command: &str, map: BTreeMap<String, String>) -> Result<Self> {
        let output_default = match command {
            "sample" | "evolve" => "archive.csv".to_string(),
            c => format!("{c}.json"),
        };
        let threads_env = std::env::var("WLAB_THREADS").ok();
        let threads = match (map.get("threads"), threads_env) {
            (Some(_), _) => get_opt(&map, "threads")?,
            (None, Some(env)) => Some(
                env.parse()
                    .map_err(|_| invalid(format!("cannot parse WLAB_THREADS = {env:?}")))?,
            ),
            (None, None) => None,
        };
        let cfg = Self {
            command: command.to_string(),
            n_dim: get(&map, "N", 200)?,
            samples: get(&map, "samples", 10)?,
            seed: get(&map, "seed", 0)?,
            ensemble: get(&map, "ensemble", "gue".to_string())?,
            entry_law: get(&map, "entry_law", "gaussian".to_string())?,
            density_file: get_opt(&map, "density_file")?,
            beta_exponent: get(&map, "beta_exponent", 0.5)?,
            e0: get(&map, "E0", 0.0)?,
            delta: get(&map, "delta", 0.2)?,
            eps_grid: get_list(&map, "eps_grid", &default_eps_grid())?,
            band: get(&map, "band", 0.5)?,
            k_grid: get_list(&map, "K_grid", &[0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0])?,
            n: get(&map, "n", 64)?,
            l_index: get_opt(&map, "L")?,
            b: get(&map, "B", 2.0)?,
            rho0: get(&map, "rho0", 0.5)?,
            cap: get(&map, "cap", wlab_core::localwindow::DEFAULT_ROOT_CAP)?,
            gamma: get(&map, "gamma", 0.1)?,
            epsilon: get(&map, "epsilon", 0.1)?,
            kappa: get(&map, "kappa", 0.1)?,
            eta: get_opt(&map, "eta")?,
            t: get(&map, "t", 0.5)?,
            dt: get(&map, "dt", 1e-3)?,
            method: get(&map, "method", "dbm".to_string())?,
            archive: get_opt(&map, "archive")?,
            output: get(&map, "output", PathBuf::from(output_default))?,
            threads,
            label: get(&map, "label", String::new())?,
            settings: map,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if self.samples == 0 {
            return Err(invalid("samples must be positive"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be positive"));
        }
        if !matches!(self.ensemble.as_str(), "gue" | "wigner") {
            return Err(invalid(format!("unknown ensemble {:?}", self.ensemble)));
        }
        if self.ensemble == "wigner" {
            self.ensemble_config()?.validate()?;
        }
        if self.label.contains([',', '\n', '\r']) {
            return Err(invalid("label may not contain ',' or newlines"));
        }
        self.good_config_params().validate()?;
        match self.command.as_str() {
            "evolve" => {
                if !(self.t >= 0.0 && self.t.is_finite()) {
                    return Err(invalid("t must be nonnegative"));
                }
                if !(self.dt > 0.0 && self.dt.is_finite()) {
                    return Err(invalid("dt must be positive"));
                }
                if !matches!(self.method.as_str(), "dbm" | "ou") {
                    return Err(invalid(format!("unknown method {:?}", self.method)));
                }
            }
            "semicircle" => {
                if let Some(eta) = self.eta {
                    if !(eta > 0.0) {
                        return Err(invalid("eta must be positive"));
                    }
                }
            }
            "vandermonde" => {
                if let Some(eta) = self.eta {
                    if !(eta >= 0.0) {
                        return Err(invalid("eta must be nonnegative"));
                    }
                }
            }
            "window" => {
                if self.n.is_multiple_of(2) {
                    return Err(invalid("window size n must be odd"));
                }
                self.check_b()?;
            }
            "oplocal" | "equilibrium" => {
                if self.n == 0 {
                    return Err(Error::ZeroDimension);
                }
                self.check_b()?;
                if !(self.rho0 > 0.0) {
                    return Err(invalid("rho0 must be positive"));
                }
                if self.cap == 0 {
                    return Err(invalid("cap must be positive"));
                }
            }
            "sine" => {
                if self.archive.is_none() && self.samples < 2 {
                    return Err(invalid("the estimator needs at least two samples"));
                }
                if !(self.delta > 0.0) {
                    return Err(invalid("delta must be positive"));
                }
                if !(self.e0.abs() + self.delta < 2.0) {
                    return Err(invalid("E0 ± delta must stay inside (−2, 2)"));
                }
            }
            "repulsion" => {
                if self.eps_grid.is_empty()
                    || self.eps_grid.iter().any(|e| !(*e > 0.0 && *e <= 1.0))
                    || self.eps_grid.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(invalid("eps_grid must be increasing and inside (0, 1]"));
                }
                if !(self.band >= 0.0) {
                    return Err(invalid("band must be nonnegative"));
                }
                if !(self.e0.abs() < 2.0) {
                    return Err(invalid("E0 must lie inside (−2, 2)"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn check_b(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(invalid("B must be positive"));
        }
        Ok(())
    }

    pub fn good_config_params(&self) -> GoodConfigParams {
        GoodConfigParams {
            epsilon: self.epsilon,
            gamma: self.gamma,
            kappa: self.kappa,
            ..GoodConfigParams::default()
        }
    }

    pub fn entry_law_value(&self) -> Result<EntryLaw> {
        if self.entry_law == "custom-density" {
            let path = self
                .density_file
                .as_ref()
                .ok_or_else(|| invalid("custom-density needs density_file"))?;
            return Ok(EntryLaw::CustomDensity(Arc::new(read_density_table(path)?)));
        }
        self.entry_law.parse()
    }

    pub fn ensemble_config(&self) -> Result<EnsembleConfig> {
        Ok(EnsembleConfig {
            n: self.n_dim,
            beta_exponent: self.beta_exponent,
            entry_law: self.entry_law_value()?,
            seed: self.seed,
            sample_count: self.samples,
        })
    }
}

/// Lines `x,density`; blank lines and `#` comments are skipped.
fn read_density_table(path: &Path) -> Result<TabulatedDensity> {
    let text = fs::read_to_string(path)?;
    let (mut xs, mut ds) = (Vec::new(), Vec::new());
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Format {
            line: i + 1,
            message: format!("expected x,density, got {line:?}"),
        };
        let (x, d) = line.split_once(',').ok_or_else(bad)?;
        xs.push(x.trim().parse().map_err(|_| bad())?);
        ds.push(d.trim().parse().map_err(|_| bad())?);
    }
    TabulatedDensity::new(&xs, &ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text("# comment\nN = 50\n\nseed=3 # trailing\n").unwrap();
        assert_eq!(m["N"], "50");
        assert_eq!(m["seed"], "3");
        assert!(matches!(
            parse_config_text("bogus = 1"),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(matches!(parse_config_text("N 50"), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        fs::write(&path, "N = 50\nsamples = 4\n").unwrap();
        let flags = Flags {
            config: Some(path),
            n_dim: Some("70".into()),
            ..Flags::default()
        };
        let cfg = ExperimentConfig::resolve("sample", merged_settings(&flags).unwrap()).unwrap();
        assert_eq!((cfg.n_dim, cfg.samples, cfg.seed), (70, 4, 0));
    }

    #[test]
    fn validation_happens_up_front() {
        let bad = |cmd: &str, k: &str, v: &str| {
            let mut m = BTreeMap::new();
            m.insert(k.to_string(), v.to_string());
            ExperimentConfig::resolve(cmd, m).is_err()
        };
        assert!(bad("sample", "N", "0"));
        assert!(bad("sample", "N", "ten"));
        assert!(bad("window", "n", "64"));
        assert!(bad("repulsion", "eps_grid", "0.5,0.2"));
        assert!(bad("sample", "ensemble", "goe"));
        assert!(bad("evolve", "dt", "0"));
        assert!(bad("sine", "delta", "2.5"));
    }
}
