use proptest::prelude::*;
use soliton_lab::lorentz::{
    characteristic_coefficients, classify_shape_operator, materialize, minimal_polynomial, poly_divrem, FormVariant,
    Mat3,
};

fn basis() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-1.0f64..1.0)
        .prop_map(|e| Mat3::from_fn(|i, j| e[3 * i + j] + if i == j { 3.0 } else { 0.0 }))
}

/// Values in `[-2, 2]` that stay `gap` apart.
fn separated(n: usize, gap: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n).prop_filter("separated", move |v| {
        (0..v.len()).all(|i| (i + 1..v.len()).all(|j| (v[i] - v[j]).abs() > gap))
    })
}

fn assert_close(a: f64, b: f64, what: &str) -> Result<(), TestCaseError> {
    prop_assert!((a - b).abs() < 1e-6, "{}: {} vs {}", what, a, b);
    Ok(())
}

fn char_poly(a: &Mat3) -> Vec<f64> {
    let c = characteristic_coefficients(a);
    vec![c[0], c[1], c[2], 1.0]
}

fn min_divides_char(a: &Mat3) -> Result<(), TestCaseError> {
    let m = minimal_polynomial(a);
    let (_, rem) = poly_divrem(&char_poly(a), &m);
    let worst = rem.iter().fold(0.0f64, |w, r| w.max(r.abs()));
    prop_assert!(worst < 1e-6, "remainder {:?}", rem);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn diagonalizable_round_trip(v in separated(3, 0.1), tie in 0usize..3, lorentz in any::<bool>(), b in basis()) {
        let mut a = [v[0], v[1], v[2]];
        if tie == 1 { a[1] = a[0]; }
        if tie == 2 { a[1] = a[0]; a[2] = a[0]; }
        let eps = if lorentz { 1.0 } else { -1.0 };
        let (am, g) = materialize(&FormVariant::Diagonalizable { a }, eps, &b).unwrap();
        let form = classify_shape_operator(&am, &g).unwrap();
        let FormVariant::Diagonalizable { a: mut got } = form.variant else {
            return Err(TestCaseError::fail(format!("{:?}", form.variant)));
        };
        let mut want = a;
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for i in 0..3 { assert_close(got[i], want[i], "eigenvalue")?; }
        prop_assert_eq!(form.minimal_polynomial.len(), 4 - tie);
        min_divides_char(&am)?;
    }

    #[test]
    fn complex_pair_round_trip(v in separated(2, 0.0), b1 in 0.2f64..2.0, b in basis()) {
        let variant = FormVariant::ComplexPair { a1: v[0], b1, a2: v[1] };
        let (am, g) = materialize(&variant, 1.0, &b).unwrap();
        let form = classify_shape_operator(&am, &g).unwrap();
        let FormVariant::ComplexPair { a1, b1: b, a2 } = form.variant else {
            return Err(TestCaseError::fail(format!("{:?}", form.variant)));
        };
        assert_close(a1, v[0], "a1")?;
        assert_close(b, b1, "b1")?;
        assert_close(a2, v[1], "a2")?;
        min_divides_char(&am)?;
    }

    #[test]
    fn jordan2_round_trip(v in separated(2, 0.1), equal in any::<bool>(), b in basis()) {
        let a2 = if equal { v[0] } else { v[1] };
        let (am, g) = materialize(&FormVariant::Jordan2 { a1: v[0], a2 }, 1.0, &b).unwrap();
        let form = classify_shape_operator(&am, &g).unwrap();
        let FormVariant::Jordan2 { a1, a2: got2 } = form.variant else {
            return Err(TestCaseError::fail(format!("{:?}", form.variant)));
        };
        assert_close(a1, v[0], "a1")?;
        assert_close(got2, a2, "a2")?;
        prop_assert_eq!(form.minimal_polynomial.len(), if equal { 3 } else { 4 });
        min_divides_char(&am)?;
    }

    #[test]
    fn jordan3_round_trip(a1 in -2.0f64..2.0, b in basis()) {
        let (am, g) = materialize(&FormVariant::Jordan3 { a1 }, 1.0, &b).unwrap();
        let form = classify_shape_operator(&am, &g).unwrap();
        let FormVariant::Jordan3 { a1: got } = form.variant else {
            return Err(TestCaseError::fail(format!("{:?}", form.variant)));
        };
        assert_close(got, a1, "a1")?;
        prop_assert_eq!(form.minimal_polynomial.len(), 4);
        min_divides_char(&am)?;
    }

    #[test]
    fn metric_is_symmetric_and_a_self_adjoint(v in separated(2, 0.0), b in basis()) {
        let (am, g) = materialize(&FormVariant::Jordan2 { a1: v[0], a2: v[1] }, 1.0, &b).unwrap();
        prop_assert!(g.asymmetry() < 1e-12);
        prop_assert!((g * am).asymmetry() < 1e-9);
    }
}
