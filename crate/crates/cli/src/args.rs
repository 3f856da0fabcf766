//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use soliton_lab::canonical::FormKind;

#[derive(Debug, Parser)]
#[command(name = "soliton-lab", version, about = "Ricci soliton checks for hypersurfaces of Minkowski 4-space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyse a catalog entry or an immersion file.
    Analyze(AnalyzeArgs),
    /// Solve the case systems over a parameter sample and write a CSV table.
    CaseSweep(SweepArgs),
    /// List catalog entries with parameters and expectations.
    List(ListArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Corrected,
    #[value(name = "paper_form", alias = "paper-form")]
    PaperForm,
    Both,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["entry", "file"])))]
pub struct AnalyzeArgs {
    /// Catalog entry name (see `list`).
    #[arg(long)]
    pub entry: Option<String>,
    /// TOML file with the four coordinate expressions.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Parameter override, repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Samples per chart axis, each at least 2.
    #[arg(long, value_name = "N,N,N", value_parser = parse_grid)]
    pub grid: Option<[usize; 3]>,
    #[arg(long, value_enum, default_value = "both")]
    pub ricci_mode: ModeArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_form)]
    pub form: FormKind,
    /// Causal character of the normal; only the diagonalizable form admits -1.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true, value_parser = parse_epsilon)]
    pub epsilon: f64,
    /// Gauss form used in the system (`both` is treated as corrected).
    #[arg(long, value_enum, default_value = "corrected")]
    pub mode: ModeArg,
    /// Parameter range.
    #[arg(long, value_name = "LO,HI", default_value = "-3,3", allow_hyphen_values = true, value_parser = parse_range)]
    pub range: [f64; 2],
    #[arg(long, default_value_t = 1000, conflicts_with = "grid")]
    pub draws: usize,
    #[arg(long, default_value_t = 0, conflicts_with = "grid")]
    pub seed: u64,
    /// Fraction of random draws moved onto the solvable branch.
    #[arg(long, default_value_t = 0.3, conflicts_with = "grid")]
    pub branch_fraction: f64,
    /// Regular grid with this many values per parameter instead of random draws.
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err("empty parameter name".into());
    }
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{k}` must be finite"));
    }
    Ok((k.to_string(), v))
}

pub fn parse_grid(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three counts N,N,N, got `{s}`"));
    }
    let mut out = [0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("`{p}` is not a count"))?;
        if *slot < 2 {
            return Err(format!("grid counts must be at least 2, got {slot}"));
        }
    }
    Ok(out)
}

pub fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("`{hi}` is not a number"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("range [{lo}, {hi}] is not a finite interval"));
    }
    Ok([lo, hi])
}

pub fn parse_form(s: &str) -> Result<FormKind, String> {
    s.parse().map_err(|e: soliton_lab::canonical::CaseError| e.to_string())
}

pub fn parse_epsilon(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(e) if e == 1.0 || e == -1.0 => Ok(e),
        _ => Err(format!("epsilon must be 1 or -1, got `{s}`")),
    }
}
