//! Run settings: defaults, a `key = value` config file, then command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use npeskin::evolution::{Scheme, SolverConfig};
use serde::Serialize;

use crate::CliError;

/// Flags shared by every subcommand. Unset flags fall back to the config file,
/// then to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Plain-text `key = value` config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Viscosity; `sweep` takes a comma-separated descending list.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// `if-rk4` or `explicit-rk4`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Expression in `s` (e.g. `0.01*cos(2*s)`) or a mode list `n:amp:phase,...`.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// Verification suite: lemmas, decomposition, klein-gordon, toy-energy, stationarity or all.
    #[arg(long)]
    pub suite: Option<String>,
    /// `W^{1,∞}` size of generated data.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long = "snapshot-stride")]
    pub snapshot_stride: Option<usize>,
    /// Heat-mollify the initial data at time epsilon.
    #[arg(long)]
    pub mollify: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub epsilon: Vec<f64>,
    pub scheme: String,
    pub init: Option<String>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub suite: String,
    pub amplitude: f64,
    pub snapshot_stride: usize,
    pub mollify: bool,
}

impl Settings {
    pub fn defaults(command: &str) -> Self {
        let mut s = Settings {
            n: 128,
            dt: 1e-2,
            t_end: 5.0,
            epsilon: vec![0.0],
            scheme: Scheme::IfRk4.to_string(),
            init: None,
            seed: 0,
            out_dir: PathBuf::from("npeskin-out"),
            suite: "all".into(),
            amplitude: 0.01,
            snapshot_stride: 10,
            mollify: false,
        };
        match command {
            "linear" => s.amplitude = 1e-4,
            "sweep" => {
                s.epsilon = vec![0.1, 0.05, 0.025, 0.0125];
                s.t_end = 3.0;
                s.mollify = true;
            }
            "oracle" => {
                s.n = 512;
                s.amplitude = 0.1;
            }
            _ => {}
        }
        s
    }

    pub fn resolve(command: &str, o: &Overrides) -> Result<Self, CliError> {
        let mut s = Self::defaults(command);
        if let Some(path) = &o.config {
            for (key, value) in read_config(path)? {
                s.set(&key, &value)?;
            }
        }
        let flags: [(&str, Option<String>); 11] = [
            ("n", o.n.map(|v| v.to_string())),
            ("dt", o.dt.map(|v| v.to_string())),
            ("t-end", o.t_end.map(|v| v.to_string())),
            ("epsilon", o.epsilon.clone()),
            ("scheme", o.scheme.clone()),
            ("init", o.init.clone()),
            ("seed", o.seed.map(|v| v.to_string())),
            ("out-dir", o.out_dir.as_ref().map(|p| p.display().to_string())),
            ("suite", o.suite.clone()),
            ("amplitude", o.amplitude.map(|v| v.to_string())),
            ("snapshot-stride", o.snapshot_stride.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, &v)?;
            }
        }
        if o.mollify {
            s.mollify = true;
        }
        s.scheme()?;
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("invalid {what} value `{value}`"));
        let key = key.replace('_', "-");
        match key.as_str() {
            "n" => self.n = value.parse().map_err(|_| bad("n"))?,
            "dt" => self.dt = value.parse().map_err(|_| bad("dt"))?,
            "t-end" => self.t_end = value.parse().map_err(|_| bad("t-end"))?,
            "epsilon" => {
                self.epsilon = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("epsilon"))?;
                if self.epsilon.is_empty() || self.epsilon.iter().any(|e| !(*e >= 0.0)) {
                    return Err(bad("epsilon"));
                }
            }
            "scheme" => self.scheme = value.to_string(),
            "init" => self.init = Some(value.to_string()),
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "out-dir" => self.out_dir = PathBuf::from(value),
            "suite" => self.suite = value.to_string(),
            "amplitude" => self.amplitude = value.parse().map_err(|_| bad("amplitude"))?,
            "snapshot-stride" => self.snapshot_stride = value.parse().map_err(|_| bad("snapshot-stride"))?,
            "mollify" => self.mollify = value.parse().map_err(|_| bad("mollify"))?,
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn scheme(&self) -> Result<Scheme, CliError> {
        self.scheme.parse().map_err(|_| CliError::Config(format!("unknown scheme `{}`", self.scheme)))
    }

    /// Solver configuration for a single viscosity.
    pub fn solver(&self, epsilon: f64) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            n_points: self.n,
            dt: self.dt,
            t_end: self.t_end,
            epsilon,
            scheme: self.scheme()?,
            mollify_init: self.mollify,
            snapshot_stride: self.snapshot_stride,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", lineno + 1)));
        }
        out.insert(key.to_string(), value.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
