//! One-call analysis of an immersion: identity suite, classification,
//! soliton fits in both Ricci modes, and the comparison of expectations
//! with computed values.

use serde::{Deserialize, Serialize};

use crate::canonical::consistency_residual;
use crate::catalog::{BuiltEntry, Claim, Expectation, Params, Provenance};
use crate::hypersurface::{
    classify_structure_from, Construction, Grid, HypersurfaceSample, Immersion, Result, StructureVerdicts,
};
use crate::lorentz::{
    characteristic_coefficients, classify_shape_operator_with, eigenvalues, poly_from_roots, ClassifyTolerances, FormVariant,
    ShapeOperatorForm, Spectrum,
};
use crate::soliton::{
    fit_lambda_samples, lie_derivative_coordinate, pointwise_lambda, point_residual, LieRoute, RicciMode,
    SolitonReport, Verdict,
};
use crate::tolerances::{TAU_ALG, TAU_CLUSTER, TAU_RANK, TAU_SOL_CLOSED, TAU_SOL_INTEGRATED};

/// Thresholds that depend on how the immersion was produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub soliton: f64,
    pub rank: f64,
}

impl Tolerances {
    pub fn for_construction(c: Construction) -> Self {
        match c {
            Construction::ClosedForm => Self {
                identity: 1e-7,
                soliton: TAU_SOL_CLOSED,
                rank: TAU_RANK,
            },
            Construction::Integrated => Self {
                identity: 1e-5,
                soliton: TAU_SOL_INTEGRATED,
                rank: 1e-5,
            },
        }
    }

    pub fn classify(&self) -> ClassifyTolerances {
        ClassifyTolerances {
            self_adjoint: self.identity,
            rank: self.rank,
            cluster: TAU_CLUSTER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySuite {
    pub passed: bool,
    pub checks: Vec<IdentityCheck>,
}

impl IdentitySuite {
    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Gauss-equation Ricci against the intrinsic Ricci of the induced metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciCrossValidation {
    pub corrected_vs_intrinsic: f64,
    pub paper_form_vs_intrinsic: f64,
    /// Least-squares `k` in `Ric_paper_form ≈ k·Ric_intrinsic`; `None`
    /// when the intrinsic Ricci vanishes.
    pub paper_form_factor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub epsilon: f64,
    pub structure: StructureVerdicts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub claim: Claim,
    pub provenance: Provenance,
    pub source: String,
    pub claimed: String,
    /// Computed with the corrected Ricci tensor.
    pub computed: String,
    pub agrees: bool,
    /// The same comparison with the Gauss form that omits `ε`, for claims
    /// that depend on the Ricci tensor.
    pub computed_paper_form: Option<String>,
    pub agrees_paper_form: Option<bool>,
}

/// Pointwise scalars, one row per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub epsilon: f64,
    pub support: f64,
    pub mean_curvature: f64,
    pub lambda_corrected: f64,
    pub lambda_paper_form: f64,
    pub residual_corrected: f64,
    pub residual_paper_form: f64,
    pub identity_worst: f64,
    pub form: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub entry: String,
    pub parameters: Params,
    pub grid: [usize; 3],
    pub orientation: f64,
    pub construction: Construction,
    pub tolerances: Tolerances,
    pub identities: IdentitySuite,
    pub ricci_cross_validation: RicciCrossValidation,
    pub classification: Classification,
    /// Headline report, corrected Ricci tensor.
    pub soliton: SolitonReport,
    /// Second report with the Gauss form that omits `ε`; dropped when only
    /// one mode is requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soliton_paper_form: Option<SolitonReport>,
    /// `sup` of the case-system residual at the fitted `λ` and measured `ρ`.
    pub case_consistency: Option<f64>,
    pub constraint_residual: Option<f64>,
    pub expectations: Vec<ExpectationOutcome>,
    pub points: Vec<PointRecord>,
}

impl AnalysisReport {
    pub fn identities_passed(&self) -> bool {
        self.identities.passed
    }
}

fn sup(samples: &[HypersurfaceSample], f: impl Fn(&HypersurfaceSample) -> f64) -> f64 {
    samples.iter().map(f).fold(0.0, f64::max)
}

pub fn identity_suite(samples: &[HypersurfaceSample], corrected: &SolitonReport, tol: Tolerances) -> IdentitySuite {
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, tolerance: f64| {
        checks.push(IdentityCheck {
            name: name.to_string(),
            value,
            tolerance,
            passed: value < tolerance,
        })
    };
    let t = tol.identity;
    push("normal_orthogonality", sup(samples, |s| s.diagnostics.normal_orthogonality), t);
    push("normal_norm", sup(samples, |s| s.diagnostics.normal_norm), t);
    push("position_decomposition", sup(samples, |s| s.diagnostics.position_decomposition), t);
    push("self_adjointness", sup(samples, |s| s.diagnostics.self_adjointness), t);
    push("weingarten", sup(samples, |s| s.diagnostics.weingarten), t);
    push("codazzi", sup(samples, |s| s.diagnostics.codazzi), t);
    push("lemma1_covariant_derivative", corrected.lemma1[0], t);
    push("lemma1_support_gradient", corrected.lemma1[1], t);
    push("gradient_potential", corrected.gradient_check, t);
    push("lie_route_agreement", corrected.route_agreement, t);
    push(
        "ricci_condition_equivalence",
        (corrected.residual_sup - corrected.ricci_condition_sup).abs(),
        TAU_ALG,
    );
    push(
        "ricci_gauss_vs_intrinsic",
        sup(samples, |s| (s.ricci_extrinsic - s.ricci_intrinsic).max_abs()),
        t,
    );
    let passed = checks.iter().all(|c| c.passed);
    IdentitySuite { passed, checks }
}

pub fn ricci_cross_validation(samples: &[HypersurfaceSample]) -> RicciCrossValidation {
    let (mut num, mut den) = (0.0, 0.0);
    for s in samples {
        for (p, i) in s.ricci_paper_form.upper_entries().iter().zip(s.ricci_intrinsic.upper_entries()) {
            num += p * i;
            den += i * i;
        }
    }
    RicciCrossValidation {
        corrected_vs_intrinsic: sup(samples, |s| (s.ricci_extrinsic - s.ricci_intrinsic).max_abs()),
        paper_form_vs_intrinsic: sup(samples, |s| (s.ricci_paper_form - s.ricci_intrinsic).max_abs()),
        paper_form_factor: (den > TAU_ALG).then(|| num / den),
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:.12}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

fn fmt_list(xs: &[f64]) -> String {
    format!("[{}]", xs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", "))
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Shrinking => "shrinking",
        Verdict::Steady => "steady",
        Verdict::Expanding => "expanding",
        Verdict::NotASoliton => "not_a_soliton",
    }
}

struct Context<'a> {
    samples: &'a [HypersurfaceSample],
    corrected: &'a SolitonReport,
    paper: &'a SolitonReport,
    structure: &'a StructureVerdicts,
    tol: Tolerances,
}

fn evaluate(exp: &Expectation, cx: &Context) -> ExpectationOutcome {
    let tol = cx.tol;
    let mean_eps_rho =
        cx.samples.iter().map(|s| s.epsilon * s.support).sum::<f64>() / cx.samples.len() as f64;
    let lambda_match = |lambda: f64, targets: &[f64]| targets.iter().any(|t| (lambda - t).abs() < tol.soliton);
    let flag = |b: bool| b.to_string();
    let (claimed, computed, agrees, paper): (String, String, bool, Option<(String, bool)>) = match &exp.claim {
        Claim::LambdaOneOf { values } => (
            fmt_list(values),
            fmt_num(cx.corrected.lambda_fit),
            lambda_match(cx.corrected.lambda_fit, values),
            Some((fmt_num(cx.paper.lambda_fit), lambda_match(cx.paper.lambda_fit, values))),
        ),
        Claim::LambdaAffine {
            label,
            constant,
            eps_rho_coefficient,
        } => {
            let target = constant + eps_rho_coefficient * mean_eps_rho;
            (
                format!("{label} = {}", fmt_num(target)),
                fmt_num(cx.corrected.lambda_fit),
                lambda_match(cx.corrected.lambda_fit, &[target]),
                Some((fmt_num(cx.paper.lambda_fit), lambda_match(cx.paper.lambda_fit, &[target]))),
            )
        }
        Claim::Verdict { verdict } => (
            verdict_label(*verdict).into(),
            verdict_label(cx.corrected.verdict).into(),
            cx.corrected.verdict == *verdict,
            Some((verdict_label(cx.paper.verdict).into(), cx.paper.verdict == *verdict)),
        ),
        Claim::Epsilon { value } => {
            let worst = sup(cx.samples, |s| (s.epsilon - value).abs());
            let eps = cx.samples[0].epsilon;
            (fmt_num(*value), fmt_num(eps), worst == 0.0, None)
        }
        Claim::PrincipalCurvatures { values, up_to_sign } => {
            // compare characteristic polynomials: a repeated root is only
            // determined to about the cube root of the coefficient error
            let mut want = *values;
            want.sort_by(f64::total_cmp);
            let target = |sign: f64| {
                let p = poly_from_roots(&want.map(|x| sign * x));
                [p[0], p[1], p[2]]
            };
            let (plus, minus) = (target(1.0), target(-1.0));
            let mut dev: f64 = 0.0;
            for s in cx.samples {
                let c = characteristic_coefficients(&s.shape);
                let d = |t: &[f64; 3]| (0..3).map(|i| (c[i] - t[i]).abs()).fold(0.0, f64::max);
                let here = if *up_to_sign { d(&plus).min(d(&minus)) } else { d(&plus) };
                dev = dev.max(here);
            }
            let first = &cx.samples[0];
            let shown = match classify_shape_operator_with(&first.shape, &first.metric, tol.classify()) {
                Ok(ShapeOperatorForm {
                    variant: FormVariant::Diagonalizable { mut a },
                    ..
                }) => {
                    a.sort_by(f64::total_cmp);
                    fmt_list(&a)
                }
                _ => match eigenvalues(&first.shape) {
                    Spectrum::Real(got) => fmt_list(&got),
                    Spectrum::Complex { real, re, im } => {
                        format!("[{}, {} ± {}i]", fmt_num(real), fmt_num(re), fmt_num(im))
                    }
                },
            };
            let claimed = if *up_to_sign {
                format!("±{}", fmt_list(&want))
            } else {
                fmt_list(&want)
            };
            (claimed, shown, dev < tol.soliton, None)
        }
        Claim::MinimalPolynomial { coefficients } => {
            let mut dev: f64 = 0.0;
            let mut shown = String::from("unclassified");
            for (k, s) in cx.samples.iter().enumerate() {
                match classify_shape_operator_with(&s.shape, &s.metric, tol.classify()) {
                    Ok(form) => {
                        if k == 0 {
                            shown = fmt_list(&form.minimal_polynomial);
                        }
                        if form.minimal_polynomial.len() != coefficients.len() {
                            dev = f64::INFINITY;
                        } else {
                            for (a, b) in form.minimal_polynomial.iter().zip(coefficients) {
                                dev = dev.max((a - b).abs());
                            }
                        }
                    }
                    Err(_) => dev = f64::INFINITY,
                }
            }
            (fmt_list(coefficients), shown, dev < tol.soliton, None)
        }
        Claim::RicciVanishes => {
            let corrected = sup(cx.samples, |s| s.ricci_extrinsic.max_abs());
            let intrinsic = sup(cx.samples, |s| s.ricci_intrinsic.max_abs());
            (
                "0".into(),
                format!("sup|Ric| = {}", fmt_num(corrected.max(intrinsic))),
                corrected.max(intrinsic) < tol.identity * 1e2,
                None,
            )
        }
        Claim::LieDerivativeEqualsMetric { half } => {
            let dev = |k: f64| sup(cx.samples, |s| (lie_derivative_coordinate(s).scale(k) - s.metric).max_abs());
            let (full, halved) = (dev(1.0), dev(0.5));
            let claimed = if *half { "½ L g = g" } else { "L g = g" };
            (
                claimed.into(),
                format!("sup|L g - g| = {}, sup|½ L g - g| = {}", fmt_num(full), fmt_num(halved)),
                if *half { halved } else { full } < tol.soliton,
                None,
            )
        }
        Claim::TangentPositionVanishes => {
            let dev = sup(cx.samples, |s| s.tangent_position.iter().fold(0.0, |m, x| m.max(x.abs())));
            ("0".into(), format!("sup|x^T| = {}", fmt_num(dev)), dev < tol.identity, None)
        }
        Claim::TotallyUmbilical { value } => {
            (flag(*value), flag(cx.structure.totally_umbilical), cx.structure.totally_umbilical == *value, None)
        }
        Claim::Isoparametric { value } => {
            (flag(*value), flag(cx.structure.isoparametric), cx.structure.isoparametric == *value, None)
        }
        Claim::GeneralizedConstantRatio { value } => (
            flag(*value),
            flag(cx.structure.generalized_constant_ratio),
            cx.structure.generalized_constant_ratio == *value,
            None,
        ),
    };
    ExpectationOutcome {
        claim: exp.claim.clone(),
        provenance: exp.provenance,
        source: exp.source.clone(),
        claimed,
        computed,
        agrees,
        computed_paper_form: paper.as_ref().map(|p| p.0.clone()),
        agrees_paper_form: paper.map(|p| p.1),
    }
}

fn form_label(s: &HypersurfaceSample, tol: Tolerances) -> String {
    match classify_shape_operator_with(&s.shape, &s.metric, tol.classify()) {
        Ok(f) => f.variant.tag().to_string(),
        Err(_) => "unclassified".into(),
    }
}

/// `sup` over the grid of the case-system residual for the form found at
/// each point, using the fitted `λ` and the sampled `ρ`.
pub fn case_consistency(samples: &[HypersurfaceSample], lambda: f64, mode: RicciMode, tol: Tolerances) -> Option<f64> {
    let mut worst: f64 = 0.0;
    for s in samples {
        let form = classify_shape_operator_with(&s.shape, &s.metric, tol.classify()).ok()?;
        let r = consistency_residual(form.variant, s.epsilon, mode, lambda, s.support).ok()?;
        worst = worst.max(r);
    }
    Some(worst)
}

/// Analyse `imm` on `grid`, attaching `expectations`.
pub fn analyze_immersion(
    imm: &Immersion,
    grid: &Grid,
    parameters: Params,
    expectations: &[Expectation],
    constraint_residual: Option<f64>,
) -> Result<AnalysisReport> {
    let tol = Tolerances::for_construction(imm.construction);
    let samples = imm.sample_grid(grid)?;
    let corrected = fit_lambda_samples(&samples, RicciMode::Corrected, tol.soliton)?;
    let paper = fit_lambda_samples(&samples, RicciMode::PaperForm, tol.soliton)?;
    let structure = classify_structure_from(&samples, tol.classify())?;
    let identities = identity_suite(&samples, &corrected, tol);
    let cx = Context {
        samples: &samples,
        corrected: &corrected,
        paper: &paper,
        structure: &structure,
        tol,
    };
    let outcomes = expectations.iter().map(|e| evaluate(e, &cx)).collect();
    let points = samples
        .iter()
        .map(|s| PointRecord {
            u: s.chart_point[0],
            v: s.chart_point[1],
            w: s.chart_point[2],
            epsilon: s.epsilon,
            support: s.support,
            mean_curvature: s.mean_curvature,
            lambda_corrected: pointwise_lambda(s, RicciMode::Corrected, LieRoute::ClosedForm),
            lambda_paper_form: pointwise_lambda(s, RicciMode::PaperForm, LieRoute::ClosedForm),
            residual_corrected: point_residual(s, corrected.lambda_fit, RicciMode::Corrected, LieRoute::ClosedForm),
            residual_paper_form: point_residual(s, paper.lambda_fit, RicciMode::PaperForm, LieRoute::ClosedForm),
            identity_worst: s.diagnostics.worst(),
            form: form_label(s, tol),
        })
        .collect();
    let epsilon = samples[0].epsilon;
    Ok(AnalysisReport {
        entry: imm.name.clone(),
        parameters,
        grid: grid.counts,
        orientation: imm.orientation,
        construction: imm.construction,
        tolerances: tol,
        ricci_cross_validation: ricci_cross_validation(&samples),
        case_consistency: case_consistency(&samples, corrected.lambda_fit, RicciMode::Corrected, tol),
        identities,
        classification: Classification { epsilon, structure },
        soliton: corrected,
        soliton_paper_form: Some(paper),
        constraint_residual,
        expectations: outcomes,
        points,
    })
}

/// Analyse a built catalog entry on `grid` (or its default grid).
pub fn analyze_entry(built: &BuiltEntry, grid: Option<&Grid>) -> Result<AnalysisReport> {
    let default = built.immersion.default_grid();
    let grid = grid.unwrap_or(&default);
    let constraint = built.constraint.as_ref().map(|f| {
        grid.points
            .iter()
            .filter_map(|p| built.immersion.position(*p).ok())
            .map(|x| f(&x).abs())
            .fold(0.0, f64::max)
    });
    let mut report = analyze_immersion(
        &built.immersion,
        grid,
        built.parameters.clone(),
        &built.expectations,
        constraint,
    )?;
    report.entry = built.entry.clone();
    Ok(report)
}
