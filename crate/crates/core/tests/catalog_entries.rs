use soliton_lab::analysis::analyze_entry;
use soliton_lab::catalog::{self, constraint_residual, CatalogError, Params, Provenance};
use soliton_lab::hypersurface::{codazzi_components, connection_forms, FrameField, FrameKind, Grid, Immersion};
use soliton_lab::soliton::{fit_lambda, RicciMode};

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn every_suite_entry_passes_identities() {
    for (name, p) in catalog::suite() {
        let built = catalog::build(name, &p).unwrap();
        let report = analyze_entry(&built, None).unwrap();
        for check in &report.identities.checks {
            assert!(check.passed, "{name} {p:?}: {} = {:e}", check.name, check.value);
        }
    }
}

#[test]
fn closed_form_images_satisfy_their_equations() {
    for (name, p) in catalog::suite() {
        let built = catalog::build(name, &p).unwrap();
        if let Some(r) = constraint_residual(&built) {
            assert!(r < 1e-12, "{name}: {r:e}");
        }
    }
}

#[test]
fn derived_expectations_hold() {
    for (name, p) in catalog::suite() {
        let built = catalog::build(name, &p).unwrap();
        let report = analyze_entry(&built, None).unwrap();
        for e in report.expectations.iter().filter(|e| e.provenance == Provenance::Derived) {
            assert!(e.agrees, "{name} {p:?}: {:?} claimed {} computed {}", e.claim, e.claimed, e.computed);
        }
    }
}

#[test]
fn flipping_the_normal_negates_rho_and_a_only() {
    for (name, p) in catalog::suite() {
        let built = catalog::build(name, &p).unwrap();
        let imm = &built.immersion;
        let flipped = imm.flipped();
        let grid = Grid::uniform(imm.domain, [3, 3, 3]);
        for point in &grid.points {
            let (a, b) = (imm.sample(*point).unwrap(), flipped.sample(*point).unwrap());
            assert!((a.support + b.support).abs() < 1e-9);
            assert!((a.shape + b.shape).max_abs() < 1e-9);
            assert!((a.ricci_extrinsic - b.ricci_extrinsic).max_abs() < 1e-9);
        }
        for mode in RicciMode::ALL {
            let ra = fit_lambda(imm, &grid, mode, 1e-6).unwrap();
            let rb = fit_lambda(&flipped, &grid, mode, 1e-6).unwrap();
            assert!((ra.lambda_fit - rb.lambda_fit).abs() < 1e-9, "{name}");
            assert_eq!(ra.verdict, rb.verdict, "{name}");
        }
    }
}

#[test]
fn grid_density_does_not_move_soliton_constants() {
    for (name, p) in catalog::suite() {
        let built = catalog::build(name, &p).unwrap();
        let imm = &built.immersion;
        let coarse = fit_lambda(imm, &Grid::uniform(imm.domain, [3, 3, 3]), RicciMode::Corrected, 1e-6).unwrap();
        let fine = fit_lambda(imm, &Grid::uniform(imm.domain, [7, 6, 5]), RicciMode::Corrected, 1e-6).unwrap();
        if coarse.verdict.is_soliton() {
            assert_eq!(coarse.verdict, fine.verdict, "{name}");
            assert!((coarse.lambda_fit - fine.lambda_fit).abs() < 1e-9, "{name}");
        }
    }
}

#[test]
fn parameter_errors() {
    assert!(matches!(catalog::entry("torus"), Err(CatalogError::UnknownEntry(_))));
    assert!(matches!(
        catalog::build("de_sitter", &params(&[("k", 1.0)])),
        Err(CatalogError::BadParameters(_))
    ));
    assert!(matches!(
        catalog::build("de_sitter", &params(&[("c", 0.0)])),
        Err(CatalogError::BadParameters(_))
    ));
    assert!(matches!(
        catalog::build("generalized_umbilical", &params(&[("b0", 0.5), ("b1", 1.0)])),
        Err(CatalogError::Frame(_))
    ));
}

#[test]
fn every_entry_has_expectations_with_sources() {
    for entry in catalog::CATALOG {
        let built = entry.build_default().unwrap();
        assert!(!built.expectations.is_empty(), "{}", entry.name);
        assert!(built.expectations.iter().all(|e| !e.source.is_empty()));
    }
}

fn spacelike_graph() -> Immersion {
    Immersion::new("spacelike graph", [[-0.2, 0.2]; 3], |v| {
        Ok([v[0] * v[0] * 0.5 + v[1] * v[1] + v[2] * v[2] * 1.5, v[0], v[1], v[2]])
    })
}

fn lorentzian_graph() -> Immersion {
    Immersion::new("lorentzian graph", [[-0.2, 0.2]; 3], |v| {
        Ok([v[0], v[1], v[2], v[0] * v[0] * 0.5 + v[1] * v[1] + v[2] * v[2] * 1.5])
    })
}

#[test]
fn codazzi_components_in_eigenframes() {
    for (imm, eps) in [(spacelike_graph(), -1.0), (lorentzian_graph(), 1.0)] {
        let grid = Grid::uniform(imm.domain, [3, 3, 3]);
        for p in &grid.points {
            let s = imm.sample(*p).unwrap();
            assert_eq!(s.epsilon, eps);
            let frame = connection_forms(&s, &FrameField::Eigen, FrameKind::Orthonormal(eps)).unwrap();
            let c = codazzi_components(&frame).unwrap();
            assert!(c.derivative_relation < 1e-7, "{}: {c:?}", imm.name);
            assert!(c.mixed_relation < 1e-7, "{}: {c:?}", imm.name);
        }
    }
}

#[test]
fn codazzi_weights_matter_on_lorentzian_frames() {
    let imm = lorentzian_graph();
    let s = imm.sample([0.1, -0.05, 0.12]).unwrap();
    let frame = connection_forms(&s, &FrameField::Eigen, FrameKind::Orthonormal(1.0)).unwrap();
    let c = codazzi_components(&frame).unwrap();
    assert!(c.derivative_relation < 1e-9);
    assert!(c.derivative_relation_unsigned_frame > 1e-3, "{c:?}");
}
