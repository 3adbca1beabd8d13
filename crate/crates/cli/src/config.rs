use std::path::{Path, PathBuf};

use bohrlab_core::group::GroupDescriptor;
use bohrlab_core::homs::GroupMapData;
use bohrlab_core::nets::Target;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Every input a command can take. The JSON config file uses these names;
/// flags of the same name (with dashes) override it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<GroupMapData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rep: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    /// A number, or an ε function object for the Bogolyubov commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hom_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<RepSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ReductionMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triple_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RepSource {
    Catalog,
    Characters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMode {
    Auto,
    Abelian,
    Torsion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Group descriptor, inline JSON or a file path
    #[arg(long, global = true)]
    pub group: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Map as {group?, dim, images}, inline JSON or a file path
    #[arg(long, global = true)]
    pub map: Option<String>,
    /// Name of a catalog representation, e.g. `standard` or `chi[1]`
    #[arg(long, global = true)]
    pub rep: Option<String>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// `torus:N`, `u:N`, `su2`, or the JSON form
    #[arg(long, global = true)]
    pub target: Option<String>,
    /// A radius, or an ε function as JSON
    #[arg(long, global = true)]
    pub eps: Option<String>,
    #[arg(long, global = true)]
    pub net_eps: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub hom_tol: Option<f64>,
    #[arg(long, global = true)]
    pub eps_k: Option<f64>,
    /// Comma-separated element indices
    #[arg(long, global = true)]
    pub set: Option<String>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Comma-separated radii
    #[arg(long, global = true)]
    pub deltas: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub reps: Option<RepSource>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ReductionMode>,
    #[arg(long, global = true)]
    pub u: Option<String>,
    #[arg(long, global = true)]
    pub v: Option<String>,
    #[arg(long, global = true)]
    pub w: Option<String>,
    #[arg(long, global = true)]
    pub random_size: Option<usize>,
    #[arg(long, global = true)]
    pub triple_size: Option<usize>,
    /// Comma-separated primes
    #[arg(long, global = true)]
    pub primes: Option<String>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

/// Inline JSON when the argument starts like JSON, otherwise a file.
fn json_arg<T: serde::de::DeserializeOwned>(name: &str, raw: &str) -> Result<T, CliError> {
    let trimmed = raw.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') || trimmed.starts_with('"') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw).map_err(|e| schema(format!("--{name}: cannot read {raw}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| schema(format!("--{name}: {e}")))
}

fn list_arg<T: std::str::FromStr>(name: &str, raw: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| schema(format!("--{name}: cannot parse {s:?}"))))
        .collect()
}

pub fn parse_target(raw: &str) -> Result<Target, CliError> {
    let raw = raw.trim();
    if raw.starts_with('{') {
        return serde_json::from_str(raw).map_err(|e| schema(format!("--target: {e}")));
    }
    let dim = |s: &str| s.parse::<usize>().map_err(|_| schema(format!("--target: bad dimension in {raw:?}")));
    match raw.split_once(':') {
        None if raw == "su2" => Ok(Target::Su2),
        Some(("torus", n)) => Ok(Target::Torus { n: dim(n)? }),
        Some(("u", n)) => Ok(Target::Unitary { n: dim(n)? }),
        _ => Err(schema(format!("--target: expected torus:N, u:N or su2, got {raw:?}"))),
    }
}

fn eps_arg(raw: &str) -> Result<Value, CliError> {
    serde_json::from_str(raw).map_err(|e| schema(format!("--eps: {e}")))
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| schema(format!("--config: cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| schema(format!("--config: {e}")))
    }

    /// Overrides entries with the flags that were given.
    pub fn merge(mut self, f: &Flags) -> Result<Config, CliError> {
        macro_rules! plain {
            ($($field:ident),*) => {$(
                if let Some(v) = &f.$field {
                    self.$field = Some(v.clone());
                }
            )*};
        }
        plain!(
            seed,
            rep,
            delta,
            net_eps,
            samples,
            cap,
            max_iters,
            hom_tol,
            eps_k,
            alpha,
            reps,
            c,
            mode,
            random_size,
            triple_size,
            grid,
            format
        );
        if let Some(raw) = &f.group {
            self.group = Some(json_arg("group", raw)?);
        }
        if let Some(raw) = &f.map {
            self.map = Some(json_arg("map", raw)?);
        }
        if let Some(raw) = &f.target {
            self.target = Some(parse_target(raw)?);
        }
        if let Some(raw) = &f.eps {
            self.eps = Some(eps_arg(raw)?);
        }
        if let Some(raw) = &f.deltas {
            self.deltas = Some(list_arg("deltas", raw)?);
        }
        if let Some(raw) = &f.primes {
            self.primes = Some(list_arg("primes", raw)?);
        }
        for (name, src, dst) in [
            ("set", &f.set, &mut self.set),
            ("u", &f.u, &mut self.u),
            ("v", &f.v, &mut self.v),
            ("w", &f.w, &mut self.w),
        ] {
            if let Some(raw) = src {
                *dst = Some(list_arg(name, raw)?);
            }
        }
        Ok(self)
    }

    /// Names of the entries that are set.
    pub fn present(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Rejects entries the command does not read.
    pub fn restrict(&self, allowed: &[&str]) -> Result<(), CliError> {
        let extra: Vec<String> =
            self.present().into_iter().filter(|k| k != "format" && !allowed.contains(&k.as_str())).collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(schema(format!("options not used by this command: {}", extra.join(", "))))
        }
    }
}

pub fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| schema(format!("missing required option --{}", name.replace('_', "-"))))
}
