//! Command-line surface. Every command option can also come from `--config <file.json>`;
//! flags given on the command line win over the file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "kolab", version, about = "Keller-Osserman laboratory for radial Hessian-type problems")]
pub struct Cli {
    /// JSON file with option values for the chosen command
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for written artifacts
    #[arg(long, global = true, env = "KOLAB_OUT_DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the Cauchy problem and write profile.csv and status.json
    Solve(SolveArgs),
    /// Keller-Osserman verdicts for a nonlinearity
    CheckKo(CheckKoArgs),
    /// Reduce a PDE specification to Cauchy parameters
    Map(PdeArgs),
    /// Regularity class at the origin
    Classify(ClassifyArgs),
    /// Check a radial profile as a subsolution
    Verify(VerifyArgs),
    /// Existence verdicts and confirming solves over a parameter grid
    Sweep(SweepArgs),
    /// The parameter dictionary for the eight standard equations
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    /// k-Hessian
    Kh,
    /// Π_k-Hessian
    Pik,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SolveArgs {
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// const:<g0> | pow:<d> | exp:<c> | table:<path>
    #[arg(long)]
    pub g: Option<String>,
    /// Initial value v(0)
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CheckKoArgs {
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// With --q, also evaluate the κ-modified condition
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PdeArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Right-hand side f; defaults to const:1
    #[arg(long)]
    pub f: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
}

// flattened structs cannot deny unknown keys
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Built-in worked example 1..=6
    #[arg(long)]
    pub example: Option<u32>,
    /// Coefficient multiple of the example threshold
    #[arg(long)]
    pub margin: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub pde: PdeArgs,
    /// quadratic:<a>[:<j>] | quartic:<a>[:<j>] | three-halves:<a>[:<j>] | expq:<A>
    #[arg(long)]
    pub profile: Option<String>,
    /// Log-spaced grid <lo>:<hi>:<count>
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated α values
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Comma-separated β values
    #[arg(long, allow_hyphen_values = true)]
    pub betas: Option<String>,
    /// Power exponents as multiples of p − β − 1
    #[arg(long)]
    pub d_factors: Option<String>,
    /// Absolute power exponents
    #[arg(long)]
    pub ds: Option<String>,
    /// Exponential rates
    #[arg(long)]
    pub cs: Option<String>,
    /// Horizon of the confirming solves
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TableArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Overlays the flags given on the command line onto the config file values.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Value>) -> Result<T, CliError> {
    let Some(config) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(flags).expect("options serialise"))
            .expect("options round-trip"));
    };
    let mut base = match config {
        Value::Object(m) => m.clone(),
        _ => return Err(CliError::config("config file must hold a JSON object")),
    };
    if let Value::Object(m) = serde_json::to_value(flags).expect("options serialise") {
        for (key, v) in m {
            if !v.is_null() {
                base.insert(key, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::config(format!("config file: {e}")))
}

/// Unwraps a required option, naming it in the error.
pub fn need<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::config(format!("missing required option --{name}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flags_override_config() {
        let flags = SolveArgs { q: Some(2.0), ..Default::default() };
        let cfg = json!({"C": 3.0, "q": 1.0, "g": "pow:2"});
        let m = merge(&flags, Some(&cfg)).unwrap();
        assert_eq!(m.c, Some(3.0));
        assert_eq!(m.q, Some(2.0));
        assert_eq!(m.g.as_deref(), Some("pow:2"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let cfg = json!({"bogus": 1});
        assert!(merge(&SolveArgs::default(), Some(&cfg)).is_err());
    }

    #[test]
    fn flattened_pde_options() {
        let cfg = json!({"example": 3, "family": "pik", "n": 4});
        let m: VerifyArgs = merge(&VerifyArgs::default(), Some(&cfg)).unwrap();
        assert_eq!(m.example, Some(3));
        assert_eq!(m.pde.family, Some(FamilyArg::Pik));
        assert_eq!(m.pde.n, Some(4));
    }
}
