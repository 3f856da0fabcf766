//! Report rendering: rounded JSON, pointwise CSV, plain text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use soliton_lab::analysis::AnalysisReport;
use soliton_lab::canonical::{CaseSolution, SweepSummary};
use soliton_lab::catalog::{Expectation, CATALOG};
use soliton_lab::hypersurface::Construction;
use soliton_lab::soliton::{RicciMode, SolitonReport};

use crate::CliError;

/// Significant digits kept in JSON output.
pub const JSON_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", JSON_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to [`JSON_DIGITS`] significant
/// digits. Rounding is idempotent, so parsing the output and rendering
/// again gives the same bytes.
pub fn round_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn report_json(report: &AnalysisReport) -> Result<String, CliError> {
    round_json(report)
}

/// One row per grid point.
pub fn points_csv(report: &AnalysisReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &report.points {
        w.serialize(p)?;
    }
    w.into_inner().map_err(|e| CliError::ReportWrite(e.to_string()))
}

fn cells(solution: &CaseSolution) -> [String; 4] {
    let free = || "free".to_string();
    match solution {
        CaseSolution::Unique { lambda, rho } => ["true".into(), lambda.to_string(), rho.to_string(), String::new()],
        CaseSolution::RhoFree { lambda0, slope } => {
            ["true".into(), format!("{lambda0}{slope:+}*rho"), free(), String::new()]
        }
        CaseSolution::LambdaFree { rho } => ["true".into(), free(), rho.to_string(), String::new()],
        CaseSolution::Unconstrained => ["true".into(), free(), free(), String::new()],
        CaseSolution::Infeasible { witness } => [
            "false".into(),
            String::new(),
            String::new(),
            format!("{} (value {})", witness.relation, witness.value),
        ],
    }
}

/// Columns: parameters..., solvable, lambda, rho, witness.
pub fn sweep_csv(summary: &SweepSummary) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = summary.config.form.parameter_names().to_vec();
    header.extend(["solvable", "lambda", "rho", "witness"]);
    w.write_record(&header)?;
    for row in &summary.rows {
        let mut rec: Vec<String> = row.parameters.iter().map(|x| x.to_string()).collect();
        rec.extend(cells(&row.solution));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| CliError::ReportWrite(e.to_string()))
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub summary: String,
    pub parameters: BTreeMap<String, f64>,
    /// Chart box the entry is regular on.
    pub domain: [[f64; 2]; 3],
    pub construction: Construction,
    pub expectations: Vec<Expectation>,
}

pub fn manifest() -> Result<Vec<ManifestEntry>, CliError> {
    CATALOG
        .iter()
        .map(|e| {
            let built = e.build_default()?;
            Ok(ManifestEntry {
                name: e.name.to_string(),
                summary: e.summary.to_string(),
                parameters: built.parameters,
                domain: built.immersion.domain,
                construction: built.immersion.construction,
                expectations: built.expectations,
            })
        })
        .collect()
}

fn fmt_params(p: &BTreeMap<String, f64>) -> String {
    if p.is_empty() {
        return "-".into();
    }
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

pub fn manifest_text(entries: &[ManifestEntry]) -> String {
    let mut s = String::new();
    for e in entries {
        let dom: Vec<String> = e.domain.iter().map(|[a, b]| format!("[{a}, {b}]")).collect();
        let _ = writeln!(s, "{}  ({})  {}", e.name, fmt_params(&e.parameters), e.summary);
        let _ = writeln!(s, "    domain {}", dom.join(" x "));
        for x in &e.expectations {
            let _ = writeln!(s, "    [{}] {}  ({})", x.provenance.label(), x.claim.describe(), x.source);
        }
    }
    s
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn construction_label(c: Construction) -> &'static str {
    match c {
        Construction::ClosedForm => "closed form",
        Construction::Integrated => "integrated frame",
    }
}

fn soliton_block(s: &mut String, title: &str, r: &SolitonReport) {
    let _ = writeln!(s, "\n{title}");
    let _ = writeln!(s, "  verdict            {:?}", r.verdict);
    let _ = writeln!(s, "  lambda_fit         {:.12}", r.lambda_fit);
    let _ = writeln!(s, "  lambda_spread      {}   (tolerance {})", sci(r.lambda_spread), sci(r.tolerance));
    let _ = writeln!(s, "  residual_sup       {}", sci(r.residual_sup));
    let _ = writeln!(s, "  ricci_condition    {}", sci(r.ricci_condition_sup));
    let _ = writeln!(s, "  gradient_check     {}", sci(r.gradient_check));
    let _ = writeln!(s, "  lemma1             {}  {}", sci(r.lemma1[0]), sci(r.lemma1[1]));
    let _ = writeln!(s, "  route_agreement    {}", sci(r.route_agreement));
}

fn table(s: &mut String, rows: &[Vec<String>]) {
    let n = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..n)
        .map(|i| rows.iter().filter_map(|r| r.get(i)).map(|c| c.chars().count()).max().unwrap_or(0))
        .collect();
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(s, "  {}", line.join("  ").trim_end());
    }
}

pub fn report_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let total: usize = r.grid.iter().product();
    let _ = writeln!(s, "entry              {}", r.entry);
    let _ = writeln!(s, "parameters         {}", fmt_params(&r.parameters));
    let _ = writeln!(
        s,
        "grid               {}x{}x{} ({total} points), {}, orientation {:+}",
        r.grid[0],
        r.grid[1],
        r.grid[2],
        construction_label(r.construction),
        r.orientation
    );
    let _ = writeln!(s, "epsilon            {:+}", r.classification.epsilon);

    let _ = writeln!(s, "\nidentities         {}", pass(r.identities.passed));
    let rows: Vec<Vec<String>> = r
        .identities
        .checks
        .iter()
        .map(|c| vec![c.name.clone(), sci(c.value), format!("< {}", sci(c.tolerance)), pass(c.passed).into()])
        .collect();
    table(&mut s, &rows);
    if let Some(c) = r.constraint_residual {
        let _ = writeln!(s, "  image equation residual {}", sci(c));
    }

    let st = &r.classification.structure;
    let forms: Vec<String> = st.form_histogram.iter().map(|(f, n)| format!("{f} x{n}")).collect();
    let _ = writeln!(s, "\nclassification");
    let _ = writeln!(s, "  forms              {}", forms.join(", "));
    let _ = writeln!(s, "  totally umbilical  {}  (defect {})", st.totally_umbilical, sci(st.umbilicity_defect));
    let _ = writeln!(s, "  isoparametric      {}  (spread {})", st.isoparametric, sci(st.curvature_spread));
    let _ = writeln!(s, "  constant ratio     {}  (defect {})", st.generalized_constant_ratio, sci(st.gcr_defect));
    let _ = writeln!(s, "  constant H         {}  (spread {})", st.constant_mean_curvature, sci(st.mean_curvature_spread));

    let cv = &r.ricci_cross_validation;
    let _ = writeln!(s, "\nricci cross-check");
    let _ = writeln!(s, "  corrected vs intrinsic   {}", sci(cv.corrected_vs_intrinsic));
    let _ = writeln!(s, "  paper form vs intrinsic  {}", sci(cv.paper_form_vs_intrinsic));
    match cv.paper_form_factor {
        Some(k) => {
            let _ = writeln!(s, "  paper form / intrinsic   {k:.6}");
        }
        None => {
            let _ = writeln!(s, "  paper form / intrinsic   n/a (Ric = 0)");
        }
    }

    soliton_block(&mut s, &format!("soliton ({} Ricci)", r.soliton.ricci_mode.label()), &r.soliton);
    if r.soliton.ricci_mode == RicciMode::Corrected {
        let case = r.case_consistency.map(sci).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(s, "  case_system        {case}");
    }
    if let Some(p) = &r.soliton_paper_form {
        soliton_block(&mut s, "soliton (paper_form Ricci)", p);
    }

    if !r.expectations.is_empty() {
        let _ = writeln!(s, "\nexpectations");
        let mut rows = vec![vec![
            "provenance".to_string(),
            "claim".into(),
            "claimed".into(),
            "computed".into(),
            "agrees".into(),
            "paper form".into(),
            "source".into(),
        ]];
        for e in &r.expectations {
            let paper = match (&e.computed_paper_form, e.agrees_paper_form) {
                (Some(c), Some(a)) => format!("{c} ({})", if a { "agrees" } else { "differs" }),
                _ => "-".into(),
            };
            rows.push(vec![
                e.provenance.label().into(),
                e.claim.describe(),
                e.claimed.clone(),
                e.computed.clone(),
                if e.agrees { "yes".into() } else { "NO".into() },
                paper,
                e.source.clone(),
            ]);
        }
        table(&mut s, &rows);
    }
    s
}
