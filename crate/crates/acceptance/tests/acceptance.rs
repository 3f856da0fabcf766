//! Acceptance criteria. Each prints one line; the process fails if any
//! criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::analysis::{analyze_entry, AnalysisReport};
use soliton_lab::canonical::{sweep, CaseSolution, FormKind, Sampler, SweepConfig};
use soliton_lab::catalog::{self, BuiltEntry, Claim, Params};
use soliton_lab::frame_ode::{integrate_frame, observed_order, BProfile, FrameODESpec};
use soliton_lab::hypersurface::{Construction, Grid};
use soliton_lab::lorentz::{classify_shape_operator_with, ClassifyTolerances};
use soliton_lab::soliton::{
    fit_lambda, point_residual, ricci_condition_residual, LieRoute, RicciMode, Verdict,
};
use soliton_lab::tolerances::TAU_CLUSTER;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

struct Entry {
    built: BuiltEntry,
    report: AnalysisReport,
}

impl Entry {
    fn label(&self) -> String {
        if self.built.parameters.is_empty() {
            return self.built.entry.clone();
        }
        let p: Vec<String> = self.built.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.built.entry, p.join(","))
    }

    fn identity_tol(&self) -> f64 {
        match self.built.immersion.construction {
            Construction::ClosedForm => 1e-7,
            Construction::Integrated => 1e-5,
        }
    }

    fn closed_form(&self) -> bool {
        self.built.immersion.construction == Construction::ClosedForm
    }
}

fn load(name: &str, pairs: &[(&str, f64)]) -> Entry {
    let p: Params = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let built = catalog::build(name, &p).expect("catalog entry builds");
    let report = analyze_entry(&built, None).expect("analysis runs");
    Entry { built, report }
}

fn load_suite() -> Vec<Entry> {
    catalog::suite()
        .into_iter()
        .map(|(name, p)| {
            let built = catalog::build(name, &p).expect("catalog entry builds");
            let report = analyze_entry(&built, None).expect("analysis runs");
            Entry { built, report }
        })
        .collect()
}

fn check(r: &AnalysisReport, name: &str) -> f64 {
    r.identities.get(name).map(|c| c.value).unwrap_or(f64::INFINITY)
}

fn failures(list: Vec<String>) -> String {
    if list.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", list.join(", "))
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let entries = load_suite();
    let elapsed = start.elapsed().as_secs_f64();
    let names = ["normal_orthogonality", "normal_norm", "position_decomposition", "self_adjointness", "codazzi"];
    let mut bad = Vec::new();
    let mut worst_closed: f64 = 0.0;
    let mut worst_ode: f64 = 0.0;
    for e in &entries {
        for n in names {
            let v = check(&e.report, n);
            if e.closed_form() {
                worst_closed = worst_closed.max(v);
            } else {
                worst_ode = worst_ode.max(v);
            }
            if !(v < e.identity_tol()) {
                bad.push(format!("{} {n}={v:.1e}", e.label()));
            }
        }
    }
    outcome(
        bad.is_empty() && elapsed < 5.0,
        format!(
            "{} entries in {elapsed:.2} s; worst closed-form {worst_closed:.1e}, integrated {worst_ode:.1e}{}",
            entries.len(),
            failures(bad)
        ),
    )
}

fn criterion_2(entries: &[Entry]) -> Outcome {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for e in entries {
        for v in e.report.soliton.lemma1 {
            worst = worst.max(v);
            if !(v < e.identity_tol()) {
                bad.push(format!("{} {v:.1e}", e.label()));
            }
        }
    }
    outcome(bad.is_empty(), format!("worst position-field residual {worst:.1e}{}", failures(bad)))
}

fn criterion_3(entries: &[Entry]) -> Outcome {
    let mut bad = Vec::new();
    let mut worst_route: f64 = 0.0;
    for e in entries {
        let v = e.report.soliton.route_agreement;
        worst_route = worst_route.max(v);
        if !(v < 1e-7) {
            bad.push(format!("{} route {v:.1e}", e.label()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_eq: f64 = 0.0;
    for _ in 0..100 {
        let e = &entries[rng.gen_range(0..entries.len())];
        let lambda = rng.gen_range(-5.0..5.0);
        let grid = Grid::uniform(e.built.immersion.domain, [3, 3, 3]);
        let samples = e.built.immersion.sample_grid(&grid).expect("sampling");
        let a = samples
            .iter()
            .map(|s| point_residual(s, lambda, RicciMode::Corrected, LieRoute::Coordinate))
            .fold(0.0, f64::max);
        let b = samples
            .iter()
            .map(|s| ricci_condition_residual(s, lambda, RicciMode::Corrected))
            .fold(0.0, f64::max);
        worst_eq = worst_eq.max((a - b).abs());
    }
    if !(worst_eq < 1e-9) {
        bad.push(format!("equivalence {worst_eq:.1e}"));
    }
    outcome(
        bad.is_empty(),
        format!("route agreement {worst_route:.1e}; soliton vs Ricci-condition residual gap {worst_eq:.1e} over 100 pairs{}", failures(bad)),
    )
}

fn criterion_4(entries: &[Entry]) -> Outcome {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for e in entries {
        let v = e.report.soliton.gradient_check;
        worst = worst.max(v);
        if !(v < 1e-7) {
            bad.push(format!("{} {v:.1e}", e.label()));
        }
    }
    outcome(bad.is_empty(), format!("worst |grad f - x^T| {worst:.1e}{}", failures(bad)))
}

fn criterion_5(entries: &[Entry]) -> Outcome {
    let mut bad = Vec::new();
    let mut factors = Vec::new();
    for e in entries.iter().filter(|e| e.closed_form()) {
        let cv = &e.report.ricci_cross_validation;
        if !(cv.corrected_vs_intrinsic < 1e-7) {
            bad.push(format!("{} corrected {:.1e}", e.label(), cv.corrected_vs_intrinsic));
        }
        if e.report.classification.epsilon > 0.0 {
            if !(cv.paper_form_vs_intrinsic < 1e-7) {
                bad.push(format!("{} paper form {:.1e}", e.label(), cv.paper_form_vs_intrinsic));
            }
        } else {
            match cv.paper_form_factor {
                Some(k) if (k + 1.0).abs() < 1e-9 => factors.push(format!("{}: {k:.6}", e.label())),
                other => bad.push(format!("{} factor {other:?}", e.label())),
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("paper-form/intrinsic factor on spacelike entries [{}]{}", factors.join(", "), failures(bad)),
    )
}

fn has_lambda(r: &AnalysisReport, lambda: f64, tol: f64) -> bool {
    (r.soliton.lambda_fit - lambda).abs() < tol
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    let mut notes = Vec::new();

    let ps = load("pseudo_spherical_cylinder", &[("c", 1.0)]);
    notes.push(format!("S2_1xE lambda {:.9}", ps.report.soliton.lambda_fit));
    if !(has_lambda(&ps.report, 1.0, 1e-6) && ps.report.soliton.verdict == Verdict::Shrinking) {
        bad.push("pseudo_spherical_cylinder".to_string());
    }

    for (b0, b1) in [(1.0, 0.0), (2.0, 1.0)] {
        let e = load("generalized_umbilical", &[("a", 1.0), ("b0", b0), ("b1", b1)]);
        let tol = ClassifyTolerances {
            self_adjoint: 1e-5,
            rank: 1e-5,
            cluster: TAU_CLUSTER,
        };
        let grid = e.built.immersion.default_grid();
        let samples = e.built.immersion.sample_grid(&grid).expect("sampling");
        let minpoly_ok = samples.iter().all(|s| {
            classify_shape_operator_with(&s.shape, &s.metric, tol)
                .map(|f| {
                    f.minimal_polynomial.len() == 3
                        && f.minimal_polynomial.iter().zip([1.0, -2.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-4)
                })
                .unwrap_or(false)
        });
        let r = &e.report.soliton;
        notes.push(format!(
            "umbilical B={}: (t-1)^2 {}, lambda {:.6}, spread {:.2e}, {:?}",
            BProfile { b0, b1 }.label(),
            if minpoly_ok { "yes" } else { "no" },
            r.lambda_fit,
            r.lambda_spread,
            r.verdict
        ));
        if !minpoly_ok {
            bad.push(format!("umbilical B={b0}+{b1}sin minimal polynomial"));
        }
        if !(has_lambda(&e.report, 2.0, 1e-4) && r.verdict == Verdict::Shrinking) {
            bad.push(format!("umbilical B={b0}+{b1}sin lambda/verdict"));
        }
    }

    for (b0, b1) in [(1.0, 0.0), (2.0, 1.0)] {
        let e = load("generalized_cylinder_i", &[("b0", b0), ("b1", b1)]);
        let grid = e.built.immersion.default_grid();
        let samples = e.built.immersion.sample_grid(&grid).expect("sampling");
        let ric = samples
            .iter()
            .map(|s| s.ricci_intrinsic.max_abs().max(s.ricci_extrinsic.max_abs()))
            .fold(0.0, f64::max);
        notes.push(format!("cylinder I B={}: |Ric| {ric:.1e}, lambda {:.9}", BProfile { b0, b1 }.label(), e.report.soliton.lambda_fit));
        if !(ric < 1e-5 && has_lambda(&e.report, 1.0, 1e-4)) {
            bad.push(format!("cylinder I B={b0}+{b1}sin"));
        }
    }
    outcome(bad.is_empty(), format!("{}{}", notes.join("; "), failures(bad)))
}

fn criterion_7() -> Outcome {
    let e = load("de_sitter", &[("c", 1.0)]);
    let r = &e.report;
    let xt = r
        .points
        .iter()
        .zip(e.built.immersion.sample_grid(&e.built.immersion.default_grid()).expect("sampling"))
        .map(|(_, s)| s.tangent_position.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .fold(0.0, f64::max);
    let claim = r.expectations.iter().find(|x| {
        matches!(&x.claim, Claim::LambdaOneOf { values } if values.len() == 2 && (values[0] - 1.0).abs() < 1e-12 && (values[1] - 3.0).abs() < 1e-12)
    });
    let flagged = claim.map(|c| !c.agrees).unwrap_or(false);
    let ok = xt < 1e-10
        && has_lambda(r, 2.0, 1e-6)
        && r.soliton.verdict == Verdict::Shrinking
        && r.soliton.lambda_spread < 1e-8
        && flagged;
    outcome(
        ok,
        format!(
            "|x^T| {xt:.1e}, lambda {:.12}, spread {:.1e}, {:?}; claimed lambda in {{c^2, 3c^2}} flagged as discrepancy: {flagged}",
            r.soliton.lambda_fit, r.soliton.lambda_spread, r.soliton.verdict
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    let random = |seed| Sampler::Random {
        draws: 10_000,
        seed,
        branch_fraction: 0.3,
    };
    for (form, eps, mode) in [
        (FormKind::Diagonalizable, 1.0, RicciMode::PaperForm),
        (FormKind::Diagonalizable, -1.0, RicciMode::PaperForm),
        (FormKind::Diagonalizable, 1.0, RicciMode::Corrected),
        (FormKind::Diagonalizable, -1.0, RicciMode::Corrected),
        (FormKind::ComplexPair, 1.0, RicciMode::Corrected),
        (FormKind::Jordan2, 1.0, RicciMode::Corrected),
        (FormKind::Jordan3, 1.0, RicciMode::Corrected),
    ] {
        let cfg = SweepConfig {
            form,
            epsilon: eps,
            mode,
            range: [-3.0, 3.0],
            sampler: random(11),
        };
        let s = sweep(&cfg).expect("sweep runs");
        let kappa = if mode == RicciMode::Corrected { eps } else { 1.0 };
        // branch values on the solvable rows
        let mut branch_errors = 0;
        for row in s.rows.iter().filter(|r| r.solution.is_solvable()) {
            let p = &row.parameters;
            let ok = match (form, &row.solution) {
                (FormKind::Diagonalizable, CaseSolution::RhoFree { lambda0, slope }) => {
                    let c = p[0];
                    p.iter().all(|x| *x == c)
                        && (lambda0 - (1.0 + 2.0 * kappa * c * c)).abs() < 1e-9
                        && (slope - eps * c).abs() < 1e-9
                }
                (FormKind::Diagonalizable, CaseSolution::Unique { lambda, rho }) => {
                    let (rep, other) = if p[0] == p[1] {
                        (p[0], p[2])
                    } else if p[1] == p[2] {
                        (p[1], p[0])
                    } else {
                        (p[0], p[1])
                    };
                    (rep + eps * kappa * rho).abs() < 1e-9 && (lambda - (1.0 + kappa * rep * other)).abs() < 1e-9
                }
                (FormKind::Jordan2, CaseSolution::Unique { lambda, .. }) => {
                    p[0] == p[1] && (lambda - (1.0 + p[0] * p[0])).abs() < 1e-9
                }
                _ => false,
            };
            if !ok {
                branch_errors += 1;
            }
        }
        let expect_none = matches!(form, FormKind::ComplexPair | FormKind::Jordan3);
        if s.misclassified > 0 || branch_errors > 0 || (expect_none && s.solvable > 0) {
            bad.push(format!("{} eps={eps} {}", form.label(), mode.label()));
        }
        notes.push(format!(
            "{}[eps={eps},{}] {}/{} solvable",
            form.label(),
            mode.label(),
            s.solvable,
            s.rows.len()
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && elapsed < 1.0,
        format!("{}; zero misclassifications required; {elapsed:.2} s{}", notes.join(", "), failures(bad)),
    )
}

fn criterion_9(entries: &[Entry]) -> Outcome {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for e in entries.iter().filter(|e| e.report.soliton.verdict.is_soliton()) {
        let c = e.report.case_consistency;
        notes.push(format!("{} {:.1e}", e.label(), c.unwrap_or(f64::NAN)));
        if !matches!(c, Some(v) if v < 1e-5) {
            bad.push(e.label());
        }
    }
    outcome(bad.is_empty() && !notes.is_empty(), format!("case-system residual: {}{}", notes.join(", "), failures(bad)))
}

fn criterion_10() -> Outcome {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for b in [BProfile::constant(1.0), BProfile { b0: 2.0, b1: 1.0 }] {
        let spec = FrameODESpec::new(1.0, b);
        let mut drift: f64 = 0.0;
        for s in [-1.0, -0.5, 0.5, 1.0] {
            match integrate_frame(&spec, s, 1e-3) {
                Ok((_, d)) => drift = drift.max(d),
                Err(err) => bad.push(format!("B={}: {err}", b.label())),
            }
        }
        let order = observed_order(&spec, 1.0, 0.1).unwrap_or(f64::NAN);
        notes.push(format!("B={}: drift {drift:.1e}, order {order:.3}", b.label()));
        if !(drift < 1e-9 && (order - 4.0).abs() <= 0.3) {
            bad.push(format!("B={}", b.label()));
        }
    }
    outcome(bad.is_empty(), format!("{}{}", notes.join("; "), failures(bad)))
}

fn criterion_11(entries: &[Entry]) -> Outcome {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for e in entries.iter().filter(|e| e.built.entry.starts_with("negative_control")) {
        let r = &e.report;
        let ok = r.soliton.lambda_spread > 1e-2 && r.soliton.verdict == Verdict::NotASoliton && r.identities.passed;
        notes.push(format!("{} spread {:.3}, {:?}", e.label(), r.soliton.lambda_spread, r.soliton.verdict));
        if !ok {
            bad.push(e.label());
        }
    }
    outcome(bad.is_empty() && notes.len() == 2, format!("{}{}", notes.join("; "), failures(bad)))
}

fn criterion_12(entries: &[Entry]) -> Outcome {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for e in entries {
        let imm = &e.built.immersion;
        let flipped = imm.flipped();
        let grid = imm.default_grid();
        let (a, b) = (imm.sample_grid(&grid).expect("sampling"), flipped.sample_grid(&grid).expect("sampling"));
        for (x, y) in a.iter().zip(&b) {
            worst = worst
                .max((x.support + y.support).abs())
                .max((x.shape + y.shape).max_abs())
                .max((x.ricci_extrinsic - y.ricci_extrinsic).max_abs());
        }
        for mode in RicciMode::ALL {
            let tol = e.report.tolerances.soliton;
            let ra = fit_lambda(imm, &grid, mode, tol).expect("fit");
            let rb = fit_lambda(&flipped, &grid, mode, tol).expect("fit");
            worst = worst.max((ra.lambda_fit - rb.lambda_fit).abs());
            if ra.verdict != rb.verdict {
                bad.push(format!("{} verdict", e.label()));
            }
        }
    }
    if !(worst < 1e-9) {
        bad.push(format!("deviation {worst:.1e}"));
    }
    outcome(bad.is_empty(), format!("worst deviation under flip {worst:.1e}{}", failures(bad)))
}

fn main() {
    let entries = load_suite();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("universal identity suite", Box::new(criterion_1)),
        ("position-field identities", Box::new(|| criterion_2(&entries))),
        ("soliton / Ricci-condition equivalence", Box::new(|| criterion_3(&entries))),
        ("gradient potential", Box::new(|| criterion_4(&entries))),
        ("Ricci cross-validation", Box::new(|| criterion_5(&entries))),
        ("Lorentzian constants", Box::new(criterion_6)),
        ("de Sitter c=1", Box::new(criterion_7)),
        ("canonical dichotomy sweep", Box::new(criterion_8)),
        ("geometry/algebra consistency", Box::new(|| criterion_9(&entries))),
        ("frame ODE quality", Box::new(criterion_10)),
        ("negative controls", Box::new(|| criterion_11(&entries))),
        ("normal-flip covariance", Box::new(|| criterion_12(&entries))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
