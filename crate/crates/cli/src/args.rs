use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[command(
    name = "qwalk",
    version,
    about = "Character moments of deformed Fourier matrix models"
)]
pub struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "QWALK_THREADS")]
    pub threads: Option<usize>,

    /// Directory for result files and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Emit tables as CSV instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Build a model and report magic, duality, wreath and positivity checks.
    Model(ModelArgs),
    /// Transfer-matrix moments: Haar (spectral, Cesàro), truncated, duality, tensor formula and bound.
    Moments(MomentsArgs),
    /// Exact walk counts by multisets or by group words.
    Walk(WalkArgs),
    /// Sweep K and compare exact counts with the Narayana predictor and the limiting law.
    Asympt(AsymptArgs),
    /// Monte Carlo moments or spectra of torus Gram matrices.
    Mc(McArgs),
    /// Run the invariant and cross-oracle suite.
    Verify(VerifyArgs),
    /// Re-run a recorded manifest and compare with its stored result.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ModelSource {
    /// First group, e.g. Z2 or Z2xZ3.
    #[arg(long)]
    pub x: String,

    /// Second group; when given, the deformed product of the two Fourier models is built.
    #[arg(long)]
    pub y: Option<String>,

    /// Parameter matrix: `random`, `ones`, or a JSON file.
    #[arg(long, default_value = "random")]
    pub q: String,

    /// Seed for `--q random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = SideArg::Right)]
    pub side: SideArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SideArg {
    Right,
    Left,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ModelArgs {
    #[command(flatten)]
    pub source: ModelSource,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Largest word length for the positivity check.
    #[arg(long, default_value_t = 2)]
    pub positivity_p: usize,

    /// Write the model blocks as JSON.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentMethod {
    Spectral,
    Cesaro,
    Truncated,
    Reciprocity,
    TensorFormula,
    Bound,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub source: ModelSource,

    /// Moment orders: `3`, `1,2,3` or `1:3`.
    #[arg(long)]
    pub p: String,

    /// Truncation orders for truncated, reciprocity, tensor-formula and bound.
    #[arg(long, default_value = "1")]
    pub r: String,

    #[arg(long, value_enum, default_value_t = MomentMethod::Spectral)]
    pub method: MomentMethod,

    /// Number of Cesàro terms.
    #[arg(long, default_value_t = 2000)]
    pub terms: usize,

    /// Eigenvalue-1 threshold for the spectral method.
    #[arg(long, default_value_t = 1e-6)]
    pub spectral_tol: f64,

    /// Cap on transfer-matrix rows.
    #[arg(long, default_value_t = 20_000)]
    pub max_rows: usize,

    /// Cap on enumerated configurations.
    #[arg(long, default_value_t = 100_000_000)]
    pub max_enumeration: u128,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WalkMethodArg {
    Multiset,
    Group,
    Both,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WalkArgs {
    #[arg(long)]
    pub x: String,

    #[arg(long)]
    pub y: String,

    /// Moment orders: `3`, `1,2,3` or `1:3`.
    #[arg(long)]
    pub p: String,

    #[arg(long, value_enum, default_value_t = WalkMethodArg::Both)]
    pub method: WalkMethodArg,

    #[arg(long, default_value_t = 100_000_000)]
    pub max_enumeration: u128,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AsymptArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    /// Values of K: `4`, `2,3,5` or `2:6`.
    #[arg(long)]
    pub k: String,

    /// Moment orders.
    #[arg(long, default_value = "2,3")]
    pub p: String,

    /// Also write the limiting law at the largest K as CSV.
    #[arg(long)]
    pub law_csv: Option<PathBuf>,

    #[arg(long, default_value_t = 100_000_000)]
    pub max_enumeration: u128,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct McArgs {
    /// Number of rows M of the phase matrix.
    #[arg(long)]
    pub m: usize,

    /// Number of columns N of the phase matrix.
    #[arg(long)]
    pub n: usize,

    /// Moment orders (ignored with --spectrum).
    #[arg(long, default_value = "1:3")]
    pub p: String,

    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Report the pooled eigenvalue histogram of A/N instead of moments.
    #[arg(long)]
    pub spectrum: bool,

    #[arg(long, default_value_t = 40)]
    pub bins: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    pub level: LevelArg,

    #[arg(long, default_value_t = 2024)]
    pub seed: u64,

    /// Plant a sign error in θ to confirm the representation checks catch it.
    #[arg(long)]
    pub mutate_theta: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Path to a manifest.json written by an earlier run with --out.
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Parses `3`, `1,2,5` or `2:6` (inclusive) into a list.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid list {s:?}; use 3, 1,2,3 or 1:3");
    if let Some((a, b)) = s.split_once(':') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("3").unwrap(), vec![3]);
        assert_eq!(parse_list("1, 2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_list("2:6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert!(parse_list("6:2").is_err());
        assert!(parse_list("a").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
