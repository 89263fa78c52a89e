//! Experiment specifications from flags and key-value files.
//!
//! A config file holds `key = value` lines using the long flag names
//! (`rho = 0.5, 0.8`). Blank lines and `#` comments are ignored. Flags
//! override file values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CRGEN_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "crgen-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    CapacitySweep,
    ProtocolMc,
    LemmaCheck,
    PerfectDemo,
}

impl Kind {
    pub fn stem(&self) -> &'static str {
        match self {
            Kind::CapacitySweep => "capacity",
            Kind::ProtocolMc => "protocol",
            Kind::LemmaCheck => "lemmas",
            Kind::PerfectDemo => "perfect",
        }
    }
}

/// Flags shared by every subcommand. Lists are comma-separated.
#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    /// Key-value file providing defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Correlation coefficients.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Channel capacities C(W) in bits per symbol.
    #[arg(long, allow_hyphen_values = true)]
    pub cw: Option<String>,
    /// Block lengths.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Typicality slack in bits per symbol.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub trials: Option<String>,
    /// Master seed.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Output directory (defaults to $CRGEN_OUT_DIR, then ./crgen-out).
    #[arg(long, allow_hyphen_values = true)]
    pub out: Option<String>,
    /// Codebook budget in stored scalars.
    #[arg(long, allow_hyphen_values = true)]
    pub budget: Option<String>,
    /// Named protocol configuration.
    #[arg(long, allow_hyphen_values = true)]
    pub preset: Option<String>,
    /// Test-channel noise variance (protocol); defaults to the capacity optimizer.
    #[arg(long = "noise-var", allow_hyphen_values = true)]
    pub noise_var: Option<String>,
    /// Residual error probability of the index channel (protocol).
    #[arg(long = "error-prob", allow_hyphen_values = true)]
    pub error_prob: Option<String>,
    /// Bin rate log2(N1)/n, overriding the default sizing (protocol).
    #[arg(long = "bin-rate", allow_hyphen_values = true)]
    pub bin_rate: Option<String>,
    /// Column rate log2(N2)/n, overriding the default sizing (protocol).
    #[arg(long = "column-rate", allow_hyphen_values = true)]
    pub column_rate: Option<String>,
    /// Key size in bits (perfect).
    #[arg(long = "key-bits", allow_hyphen_values = true)]
    pub key_bits: Option<String>,
}

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub rho: Vec<f64>,
    pub cw: Vec<f64>,
    pub n: Vec<usize>,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub budget: u64,
    pub preset: Option<String>,
    pub noise_var: Option<f64>,
    pub error_prob: f64,
    pub bin_rate: Option<f64>,
    pub column_rate: Option<f64>,
    pub key_bits: u32,
    /// Keys set explicitly by the file or a flag.
    pub explicit: Vec<String>,
}

const KEYS: [&str; 14] = [
    "rho",
    "cw",
    "n",
    "delta",
    "trials",
    "seed",
    "out",
    "budget",
    "preset",
    "noise-var",
    "error-prob",
    "bin-rate",
    "column-rate",
    "key-bits",
];

/// Parses `key = value` lines.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{key}: cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Usage(format!("--{key}: grid is empty")));
    }
    items.into_iter().map(|s| parse_one(key, s)).collect()
}

impl ExperimentArgs {
    fn flag_values(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("rho", &self.rho),
            ("cw", &self.cw),
            ("n", &self.n),
            ("delta", &self.delta),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
            ("budget", &self.budget),
            ("preset", &self.preset),
            ("noise-var", &self.noise_var),
            ("error-prob", &self.error_prob),
            ("bin-rate", &self.bin_rate),
            ("column-rate", &self.column_rate),
            ("key-bits", &self.key_bits),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    /// Merges file values, flags and per-kind defaults.
    pub fn resolve(&self, kind: Kind, env_out: Option<String>) -> Result<ExperimentSpec, CliError> {
        let mut values = match &self.config {
            Some(path) => load_config(path)?,
            None => BTreeMap::new(),
        };
        values.extend(self.flag_values());
        ExperimentSpec::from_values(kind, &values, env_out)
    }
}

impl ExperimentSpec {
    pub fn from_values(
        kind: Kind,
        values: &BTreeMap<String, String>,
        env_out: Option<String>,
    ) -> Result<Self, CliError> {
        let get = |k: &str| values.get(k).map(String::as_str);
        let list_f64 = |k: &str, default: &[f64]| -> Result<Vec<f64>, CliError> {
            match get(k) {
                Some(v) => parse_list(k, v),
                None => Ok(default.to_vec()),
            }
        };
        let (rho_d, cw_d, n_d, delta_d, trials_d): (&[f64], &[f64], &[usize], f64, u64) = match kind {
            Kind::CapacitySweep => (&[0.0, 0.5, 0.8, 0.95, 1.0], &[0.25, 0.5, 1.0, 2.0, 3.0], &[16], 0.25, 1),
            Kind::ProtocolMc => (&[0.8], &[1.0], &[16], 0.25, 2_000),
            Kind::LemmaCheck => (&[0.8], &[1.0], &[5, 10, 15], 0.3, 10_000),
            Kind::PerfectDemo => (&[1.0], &[0.0], &[1], 0.25, 100_000),
        };
        let n = match get("n") {
            Some(v) => parse_list("n", v)?,
            None => n_d.to_vec(),
        };
        let opt = |k: &str| -> Result<Option<f64>, CliError> { get(k).map(|v| parse_one(k, v)).transpose() };
        let out = get("out")
            .map(str::to_string)
            .or(env_out)
            .unwrap_or_else(|| FALLBACK_OUT_DIR.to_string());
        let spec = Self {
            kind,
            rho: list_f64("rho", rho_d)?,
            cw: list_f64("cw", cw_d)?,
            n,
            delta: opt("delta")?.unwrap_or(delta_d),
            trials: get("trials").map(|v| parse_one("trials", v)).transpose()?.unwrap_or(trials_d),
            seed: get("seed").map(|v| parse_one("seed", v)).transpose()?.unwrap_or(1),
            out: PathBuf::from(out),
            budget: get("budget")
                .map(|v| parse_one("budget", v))
                .transpose()?
                .unwrap_or(crgen_core::codebook::DEFAULT_BUDGET),
            preset: get("preset").map(str::to_string),
            noise_var: opt("noise-var")?,
            error_prob: opt("error-prob")?.unwrap_or(0.0),
            bin_rate: opt("bin-rate")?,
            column_rate: opt("column-rate")?,
            key_bits: get("key-bits").map(|v| parse_one("key-bits", v)).transpose()?.unwrap_or(8),
            explicit: values.keys().cloned().collect(),
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.iter().any(|k| k == key)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.n.contains(&0) {
            return Err(CliError::Usage("--n: block lengths must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(CliError::Usage("--trials: must be at least 1".into()));
        }
        if self.bin_rate.is_some() != self.column_rate.is_some() {
            return Err(CliError::Usage(
                "--bin-rate and --column-rate must be given together".into(),
            ));
        }
        if self.preset.is_some() {
            for key in ["rho", "cw", "delta", "noise-var", "bin-rate", "column-rate"] {
                if self.is_explicit(key) {
                    return Err(CliError::Usage(format!(
                        "--{key} conflicts with --preset, which fixes the source, channel and sizing"
                    )));
                }
            }
        }
        Ok(())
    }
}
