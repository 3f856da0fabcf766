//! The hand-written case relations against relations generated from the
//! frame matrices and the Gauss equation.

use proptest::prelude::*;
use soliton_lab::canonical::{build_case_system, solve_case, CaseSolution, FormKind};
use soliton_lab::hypersurface::ricci_gauss;
use soliton_lab::lorentz::{materialize, FormVariant, Mat3};
use soliton_lab::soliton::RicciMode;

/// Rows `[λ-coeff, ρ-coeff, rhs]` of `Ric + g + ερ g(A·,·) = λ g`.
fn generated_rows(variant: &FormVariant, eps: f64, mode: RicciMode) -> Vec<[f64; 3]> {
    let (g, a) = variant.frame_matrices(eps);
    let ric = ricci_gauss(&a, &g, eps, mode == RicciMode::Corrected);
    let ga = g * a;
    let mut rows = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            rows.push([g[i][j], -eps * ga[i][j], ric[i][j] + g[i][j]]);
        }
    }
    rows
}

fn rank(rows: &[[f64; 3]]) -> usize {
    let mut m: Vec<[f64; 3]> = rows.to_vec();
    let scale = m.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
    let tol = 1e-9 * scale;
    let mut r = 0;
    for col in 0..3 {
        let Some(p) = (r..m.len()).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())) else {
            break;
        };
        if m[p][col].abs() <= tol {
            continue;
        }
        m.swap(r, p);
        for k in 0..m.len() {
            if k != r {
                let f = m[k][col] / m[r][col];
                for c in 0..3 {
                    m[k][c] -= f * m[r][c];
                }
            }
        }
        r += 1;
    }
    r
}

fn same_span(variant: FormVariant, eps: f64, mode: RicciMode) {
    let sys = build_case_system(variant, eps, mode).unwrap();
    let written: Vec<[f64; 3]> = sys.relations.iter().map(|r| [r.lambda, r.rho, r.rhs]).collect();
    let generated = generated_rows(&variant, eps, mode);
    let both: Vec<[f64; 3]> = written.iter().chain(generated.iter()).copied().collect();
    let (rw, rg, rb) = (rank(&written), rank(&generated), rank(&both));
    assert!(rw == rb && rg == rb, "{variant:?} eps={eps} {mode:?}: ranks {rw} {rg} {rb}");
}

fn param() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

proptest! {
    #[test]
    fn diagonal_relations_match_gauss(a in [param(), param(), param()], lorentz in any::<bool>(), corrected in any::<bool>(), tie in 0usize..4) {
        let mut a = a;
        match tie { 1 => a[1] = a[0], 2 => { a[1] = a[0]; a[2] = a[0]; } 3 => a[2] = a[1], _ => {} }
        let eps = if lorentz { 1.0 } else { -1.0 };
        let mode = if corrected { RicciMode::Corrected } else { RicciMode::PaperForm };
        same_span(FormVariant::Diagonalizable { a }, eps, mode);
    }

    #[test]
    fn complex_pair_relations_match_gauss(a1 in param(), b1 in 0.01f64..3.0, a2 in param()) {
        same_span(FormVariant::ComplexPair { a1, b1, a2 }, 1.0, RicciMode::Corrected);
    }

    #[test]
    fn jordan_relations_match_gauss(a1 in param(), a2 in param(), equal in any::<bool>()) {
        let a2 = if equal { a1 } else { a2 };
        same_span(FormVariant::Jordan2 { a1, a2 }, 1.0, RicciMode::Corrected);
        same_span(FormVariant::Jordan3 { a1 }, 1.0, RicciMode::Corrected);
    }

    /// The relations are frame independent: push the frame data through a
    /// random basis and solve the chart-level system by least squares.
    #[test]
    fn chart_solution_matches(p in 0.2f64..2.0, q in -2.0f64..2.0, basis in prop::array::uniform9(-1.0f64..1.0)) {
        let b = Mat3([[basis[0] + 2.0, basis[1], basis[2]], [basis[3], basis[4] + 2.0, basis[5]], [basis[6], basis[7], basis[8] + 2.0]]);
        let variant = FormVariant::Diagonalizable { a: [p, p, q] };
        let eps = -1.0;
        let (a, g) = materialize(&variant, eps, &b).unwrap();
        let CaseSolution::Unique { lambda, rho } = solve_case(&build_case_system(variant, eps, RicciMode::Corrected).unwrap()) else {
            panic!("two-equal branch must be unique");
        };
        let ric = ricci_gauss(&a, &g, eps, true);
        let lhs = ric + g + (g * a).symmetrized() * (eps * rho) - g * lambda;
        prop_assert!(lhs.max_abs() < 1e-9 * g.max_abs().max(1.0) * (1.0 + p * p + q * q));
    }

    #[test]
    fn diagonal_solution_is_permutation_invariant(a in [param(), param(), param()], tie in any::<bool>(), lorentz in any::<bool>()) {
        let mut a = a;
        if tie { a[2] = a[0]; }
        let eps = if lorentz { 1.0 } else { -1.0 };
        let base = solve_case(&build_case_system(FormVariant::Diagonalizable { a }, eps, RicciMode::Corrected).unwrap());
        for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0]] {
            let b = [a[perm[0]], a[perm[1]], a[perm[2]]];
            let other = solve_case(&build_case_system(FormVariant::Diagonalizable { a: b }, eps, RicciMode::Corrected).unwrap());
            prop_assert_eq!(base.is_solvable(), other.is_solvable());
            if let (Some((l1, r1)), Some((l2, r2))) = (base.representative(), other.representative()) {
                prop_assert!((l1 - l2).abs() < 1e-9 && (r1 - r2).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn form_kinds_parse() {
    for k in FormKind::ALL {
        assert_eq!(k.label().parse::<FormKind>().unwrap(), k);
    }
    assert!("jordan4".parse::<FormKind>().is_err());
}
