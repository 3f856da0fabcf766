//! Command-line front end: analyse catalog entries or expression files,
//! sweep the canonical-form case systems, list the catalog.

pub mod args;
pub mod render;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use soliton_lab::analysis::{analyze_entry, analyze_immersion, AnalysisReport};
use soliton_lab::canonical::{sweep, CaseError, Sampler, SweepConfig};
use soliton_lab::catalog::{self, CatalogError, Params};
use soliton_lab::expr::{ExprError, ImmersionFile};
use soliton_lab::hypersurface::{Grid, HypersurfaceError};
use soliton_lab::soliton::RicciMode;

use args::{AnalyzeArgs, Cli, Command, ListArgs, ModeArg, OutputFormat, SweepArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IDENTITY: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("analysis failed: {0}")]
    Analysis(#[from] HypersurfaceError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write report: {0}")]
    ReportWrite(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::ReportWrite(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::ReportWrite(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::ReportWrite(e.to_string())
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::CaseSweep(a) => cmd_case_sweep(&a, out, err),
        Command::List(a) => cmd_list(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn params_of(pairs: &[(String, f64)]) -> Params {
    pairs.iter().cloned().collect()
}

/// Run the analysis described by `a` without writing anything.
pub fn analyze(a: &AnalyzeArgs) -> Result<AnalysisReport, CliError> {
    let overrides = params_of(&a.params);
    let mut report = if let Some(name) = &a.entry {
        let built = catalog::build(name, &overrides)?;
        let grid = a.grid.map(|counts| Grid::uniform(built.immersion.domain, counts));
        analyze_entry(&built, grid.as_ref())?
    } else {
        let path = a.file.as_ref().expect("clap requires --entry or --file");
        let src = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.clone(),
            source,
        })?;
        let file = ImmersionFile::from_toml_str(&src)?;
        let imm = file.to_immersion(&overrides)?;
        let mut params = file.parameters.clone();
        params.extend(overrides);
        let grid = Grid::uniform(imm.domain, a.grid.unwrap_or([5, 5, 5]));
        analyze_immersion(&imm, &grid, params, &[], None)?
    };
    match a.ricci_mode {
        ModeArg::Both => {}
        ModeArg::Corrected => report.soliton_paper_form = None,
        ModeArg::PaperForm => {
            let paper = report.soliton_paper_form.take().expect("analysis fills both modes");
            report.soliton = paper;
        }
    }
    Ok(report)
}

fn emit(path: Option<&PathBuf>, out: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::ReportWrite(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(bytes)?),
    }
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let report = analyze(a)?;
    let bytes = match a.format {
        OutputFormat::Json => render::report_json(&report)?.into_bytes(),
        OutputFormat::Csv => render::points_csv(&report)?,
        OutputFormat::Text => render::report_text(&report).into_bytes(),
    };
    emit(a.out.as_ref(), out, &bytes)?;
    Ok(exit_code(&report))
}

/// The report is always written; a failing identity suite only changes the
/// exit code.
pub fn exit_code(report: &AnalysisReport) -> i32 {
    if report.identities_passed() {
        EXIT_OK
    } else {
        EXIT_IDENTITY
    }
}

fn cmd_case_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let sampler = match a.grid {
        Some(per_axis) => Sampler::Grid { per_axis },
        None => Sampler::Random {
            draws: a.draws,
            seed: a.seed,
            branch_fraction: a.branch_fraction,
        },
    };
    let cfg = SweepConfig {
        form: a.form,
        epsilon: a.epsilon,
        mode: match a.mode {
            ModeArg::PaperForm => RicciMode::PaperForm,
            _ => RicciMode::Corrected,
        },
        range: a.range,
        sampler,
    };
    let summary = sweep(&cfg)?;
    emit(a.out.as_ref(), out, &render::sweep_csv(&summary)?)?;
    let _ = writeln!(
        err,
        "{}: {} solvable, {} infeasible, {} misclassified, max residual {:.3e}",
        cfg.form.label(),
        summary.solvable,
        summary.infeasible,
        summary.misclassified,
        summary.max_residual
    );
    Ok(EXIT_OK)
}

fn cmd_list(a: &ListArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let manifest = render::manifest()?;
    let bytes = match a.format {
        OutputFormat::Json => render::round_json(&manifest)?.into_bytes(),
        _ => render::manifest_text(&manifest).into_bytes(),
    };
    out.write_all(&bytes)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analyze_args(entry: &str) -> AnalyzeArgs {
        AnalyzeArgs {
            entry: Some(entry.into()),
            file: None,
            params: vec![],
            grid: Some([3, 3, 3]),
            ricci_mode: ModeArg::Both,
            format: OutputFormat::Json,
            out: None,
        }
    }

    #[test]
    fn identity_failure_exit_code() {
        let mut report = analyze(&analyze_args("de_sitter")).unwrap();
        assert_eq!(exit_code(&report), EXIT_OK);
        report.identities.passed = false;
        assert_eq!(exit_code(&report), EXIT_IDENTITY);
    }

    #[test]
    fn run_writes_help_to_stdout() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["soliton-lab", "help"], &mut out, &mut err), EXIT_OK);
        assert!(!out.is_empty() && err.is_empty());
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["soliton-lab", "analyze", "--entry", "x"], &mut out, &mut err), EXIT_USAGE);
        assert!(String::from_utf8(err).unwrap().contains("unknown catalog entry"));
    }
}
