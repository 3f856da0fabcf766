//! Named, parameterized hypersurfaces: the isoparametric examples, the two
//! null-curve constructions, and two graphs that are not solitons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame_ode::{build_generalized_cylinder_i, build_generalized_umbilical, BProfile, FrameError, FrameODESpec};
use crate::hypersurface::Immersion;
use crate::jet::Jet;
use crate::lorentz::MinkVector;
use crate::soliton::Verdict;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

pub type Params = BTreeMap<String, f64>;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated in the published treatment of the example.
    Claimed,
    /// Worked out independently here.
    Derived,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Claimed => "claimed",
            Provenance::Derived => "derived",
        }
    }
}

/// A property asserted about an entry, checked against computed values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Claim {
    /// The fitted `λ` equals one of the listed values.
    LambdaOneOf { values: Vec<f64> },
    /// `λ = constant + coefficient·ερ`, with `ερ` taken from the samples.
    LambdaAffine { label: String, constant: f64, eps_rho_coefficient: f64 },
    Verdict { verdict: Verdict },
    Epsilon { value: f64 },
    /// Eigenvalues of `A`, sorted, optionally up to an overall sign.
    PrincipalCurvatures { values: [f64; 3], up_to_sign: bool },
    /// Monic minimal polynomial, ascending coefficients.
    MinimalPolynomial { coefficients: Vec<f64> },
    RicciVanishes,
    /// `L g = g`, or `½ L g = g` when `half` is set.
    LieDerivativeEqualsMetric { half: bool },
    TangentPositionVanishes,
    TotallyUmbilical { value: bool },
    Isoparametric { value: bool },
    GeneralizedConstantRatio { value: bool },
}

impl Claim {
    /// Short human-readable statement of the claim.
    pub fn describe(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        match self {
            Claim::LambdaOneOf { values } if values.len() == 1 => format!("lambda = {}", values[0]),
            Claim::LambdaOneOf { values } => format!("lambda in {{{}}}", list(values)),
            Claim::LambdaAffine { label, .. } => format!("lambda = {label}"),
            Claim::Verdict { verdict } => format!("verdict {verdict:?}"),
            Claim::Epsilon { value } => format!("epsilon = {value}"),
            Claim::PrincipalCurvatures { values, up_to_sign } => {
                format!("principal curvatures ({}){}", list(values), if *up_to_sign { " up to sign" } else { "" })
            }
            Claim::MinimalPolynomial { coefficients } => format!("minimal polynomial coefficients ({})", list(coefficients)),
            Claim::RicciVanishes => "Ric = 0".into(),
            Claim::LieDerivativeEqualsMetric { half: false } => "L g = g".into(),
            Claim::LieDerivativeEqualsMetric { half: true } => "1/2 L g = g".into(),
            Claim::TangentPositionVanishes => "x^T = 0".into(),
            Claim::TotallyUmbilical { value } => format!("totally umbilical: {value}"),
            Claim::Isoparametric { value } => format!("isoparametric: {value}"),
            Claim::GeneralizedConstantRatio { value } => format!("generalized constant ratio: {value}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub claim: Claim,
    pub provenance: Provenance,
    pub source: String,
}

impl Expectation {
    fn claimed(claim: Claim, source: &str) -> Self {
        Self {
            claim,
            provenance: Provenance::Claimed,
            source: source.to_string(),
        }
    }

    fn derived(claim: Claim, source: &str) -> Self {
        Self {
            claim,
            provenance: Provenance::Derived,
            source: source.to_string(),
        }
    }
}

pub type Constraint = Box<dyn Fn(&MinkVector) -> f64 + Send + Sync>;

/// A built entry: the immersion, its expectations, and the algebraic
/// equation its image satisfies, if any.
pub struct BuiltEntry {
    pub entry: String,
    pub parameters: Params,
    pub immersion: Immersion,
    pub expectations: Vec<Expectation>,
    pub constraint: Option<Constraint>,
}

type Builder = fn(&Params) -> Result<BuiltEntry, CatalogError>;

#[derive(Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub defaults: &'static [(&'static str, f64)],
    builder: Builder,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry").field("name", &self.name).finish()
    }
}

impl CatalogEntry {
    /// Default parameters overridden by `overrides`. Unknown names are an
    /// error.
    pub fn resolve(&self, overrides: &Params) -> Result<Params, CatalogError> {
        let mut params: Params = self.defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in overrides {
            if !params.contains_key(k) {
                return Err(CatalogError::BadParameters(format!(
                    "`{}` has no parameter `{k}` (expected one of {:?})",
                    self.name,
                    params.keys().collect::<Vec<_>>()
                )));
            }
            if !v.is_finite() {
                return Err(CatalogError::BadParameters(format!("`{k}` must be finite")));
            }
            params.insert(k.clone(), *v);
        }
        Ok(params)
    }

    pub fn build(&self, overrides: &Params) -> Result<BuiltEntry, CatalogError> {
        let params = self.resolve(overrides)?;
        (self.builder)(&params)
    }

    pub fn build_default(&self) -> Result<BuiltEntry, CatalogError> {
        self.build(&Params::new())
    }
}

const UMBILICAL_SRC: &str = "published umbilical examples";
const UMBILICAL_LEMMA_SRC: &str = "published umbilical classification lemma";
const UMBILICAL_SYSTEM_SRC: &str = "published diagonal soliton system";
const CYLINDER_SRC: &str = "published product examples";
const NULL_UMBILICAL_SRC: &str = "published null-curve umbilical example";
const NULL_CYLINDER_SRC: &str = "published null-curve cylinder example";
const NULL_REMARK_SRC: &str = "published closing remark";

pub static CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "hyperbolic_space",
        summary: "H³(−c²): <x,x> = −1/c², spacelike, A = c·I",
        defaults: &[("c", 1.0)],
        builder: build_hyperbolic_space,
    },
    CatalogEntry {
        name: "de_sitter",
        summary: "S³₁(c²): <x,x> = 1/c², Lorentzian, A = c·I",
        defaults: &[("c", 1.0)],
        builder: build_de_sitter,
    },
    CatalogEntry {
        name: "hyperbolic_cylinder",
        summary: "H²(−c²)×E, spacelike, principal curvatures c, c, 0",
        defaults: &[("c", 1.0)],
        builder: build_hyperbolic_cylinder,
    },
    CatalogEntry {
        name: "pseudo_spherical_cylinder",
        summary: "S²₁(c²)×E, Lorentzian, principal curvatures c, c, 0",
        defaults: &[("c", 1.0)],
        builder: build_pseudo_spherical_cylinder,
    },
    CatalogEntry {
        name: "generalized_umbilical",
        summary: "ruled over a null curve, A a 2-step Jordan block with eigenvalue a",
        defaults: &[
            ("a", 1.0),
            ("b0", 1.0),
            ("b1", 0.0),
            ("alpha1", 0.0),
            ("alpha2", 0.0),
            ("alpha3", 0.0),
            ("alpha4", 0.0),
        ],
        builder: build_umbilical_entry,
    },
    CatalogEntry {
        name: "generalized_cylinder_i",
        summary: "ruled over a null curve, nilpotent A, flat metric",
        defaults: &[
            ("b0", 1.0),
            ("b1", 0.0),
            ("alpha1", 0.0),
            ("alpha2", 0.0),
            ("alpha3", 0.0),
            ("alpha4", 0.0),
        ],
        builder: build_cylinder_entry,
    },
    CatalogEntry {
        name: "negative_control_graph",
        summary: "graph x₄ = u² + v² + w² over a Lorentzian hyperplane, not a soliton",
        defaults: &[],
        builder: build_graph,
    },
    CatalogEntry {
        name: "negative_control_lorentzian_graph",
        summary: "graph x₁ = u² + v² + w² + 2 over the spatial coordinates, not a soliton",
        defaults: &[],
        builder: build_lorentzian_graph,
    },
];

pub fn entry(name: &str) -> Result<&'static CatalogEntry, CatalogError> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CatalogError::UnknownEntry(name.to_string()))
}

pub fn build(name: &str, overrides: &Params) -> Result<BuiltEntry, CatalogError> {
    entry(name)?.build(overrides)
}

/// Every entry at its defaults plus the variants that expose parameter
/// constraints: `c = 2` for the product and umbilical examples and
/// `B(s) = 2 + sin s` for the null-curve constructions.
pub fn suite() -> Vec<(&'static str, Params)> {
    let p = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect::<Params>();
    let mut out: Vec<(&'static str, Params)> = CATALOG.iter().map(|e| (e.name, Params::new())).collect();
    out.push(("hyperbolic_space", p(&[("c", 2.0)])));
    out.push(("de_sitter", p(&[("c", 2.0)])));
    out.push(("hyperbolic_cylinder", p(&[("c", 2.0)])));
    out.push(("pseudo_spherical_cylinder", p(&[("c", 2.0)])));
    out.push(("generalized_umbilical", p(&[("b0", 2.0), ("b1", 1.0)])));
    out.push(("generalized_cylinder_i", p(&[("b0", 2.0), ("b1", 1.0)])));
    out
}

fn nonzero(params: &Params, key: &str) -> Result<f64, CatalogError> {
    let v = params[key];
    if v == 0.0 {
        return Err(CatalogError::BadParameters(format!("`{key}` must be nonzero")));
    }
    Ok(v)
}

fn umbilical_expectations(c: f64, epsilon: f64, derived_lambda: f64) -> Vec<Expectation> {
    vec![
        Expectation::claimed(
            Claim::PrincipalCurvatures { values: [c; 3], up_to_sign: false },
            UMBILICAL_SRC,
        ),
        Expectation::claimed(Claim::TotallyUmbilical { value: true }, UMBILICAL_SRC),
        Expectation::claimed(Claim::Isoparametric { value: true }, UMBILICAL_SRC),
        Expectation::claimed(Claim::LambdaOneOf { values: vec![c * c, 3.0 * c * c] }, UMBILICAL_SRC),
        Expectation::claimed(Claim::Verdict { verdict: Verdict::Shrinking }, UMBILICAL_SRC),
        Expectation::claimed(
            Claim::LambdaAffine {
                label: "2c^2 + eps*rho*c".into(),
                constant: 2.0 * c * c,
                eps_rho_coefficient: c,
            },
            UMBILICAL_LEMMA_SRC,
        ),
        Expectation::claimed(
            Claim::LambdaAffine {
                label: "1 + eps*rho*c + 2c^2".into(),
                constant: 1.0 + 2.0 * c * c,
                eps_rho_coefficient: c,
            },
            UMBILICAL_SYSTEM_SRC,
        ),
        Expectation::derived(Claim::Epsilon { value: epsilon }, "normal of a level set of <x,x>"),
        Expectation::derived(Claim::TangentPositionVanishes, "position is normal to a level set of <x,x>"),
        Expectation::derived(
            Claim::LambdaOneOf { values: vec![derived_lambda] },
            "Einstein constant 2·eps·c² of the constant curvature model",
        ),
        Expectation::derived(
            Claim::Verdict { verdict: Verdict::from_lambda(derived_lambda, 1e-12) },
            "sign of the Einstein constant",
        ),
    ]
}

fn build_hyperbolic_space(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let c = nonzero(params, "c")?;
    let imm = Immersion::new(
        format!("hyperbolic_space(c={c})"),
        [[0.25, 1.5], [0.3, 2.8], [0.0, 6.0]],
        move |v| {
            let (r, th, ph) = (v[0], v[1], v[2]);
            let sr = r.sinh() / c;
            Ok([r.cosh() / c, sr * th.sin() * ph.cos(), sr * th.sin() * ph.sin(), sr * th.cos()])
        },
    )
    .with_orientation(c.signum());
    Ok(BuiltEntry {
        entry: "hyperbolic_space".into(),
        parameters: params.clone(),
        immersion: imm,
        expectations: umbilical_expectations(c, -1.0, -2.0 * c * c),
        constraint: Some(Box::new(move |x| x.norm_sq() + 1.0 / (c * c))),
    })
}

fn build_de_sitter(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let c = nonzero(params, "c")?;
    let imm = Immersion::new(
        format!("de_sitter(c={c})"),
        [[-1.0, 1.0], [0.3, 2.8], [0.0, 6.0]],
        move |v| {
            let (t, th, ph) = (v[0], v[1], v[2]);
            let ct = t.cosh() / c;
            Ok([t.sinh() / c, ct * th.sin() * ph.cos(), ct * th.sin() * ph.sin(), ct * th.cos()])
        },
    )
    .with_orientation(c.signum());
    Ok(BuiltEntry {
        entry: "de_sitter".into(),
        parameters: params.clone(),
        immersion: imm,
        expectations: umbilical_expectations(c, 1.0, 2.0 * c * c),
        constraint: Some(Box::new(move |x| x.norm_sq() - 1.0 / (c * c))),
    })
}

fn product_expectations(c: f64, epsilon: f64, corrected_soliton: Option<f64>) -> Vec<Expectation> {
    let mut out = vec![
        Expectation::claimed(
            Claim::PrincipalCurvatures { values: [0.0, c, c], up_to_sign: true },
            CYLINDER_SRC,
        ),
        Expectation::claimed(Claim::LambdaOneOf { values: vec![1.0] }, CYLINDER_SRC),
        Expectation::claimed(Claim::Verdict { verdict: Verdict::Shrinking }, CYLINDER_SRC),
        Expectation::derived(Claim::Epsilon { value: epsilon }, "causal type of the cylinder normal"),
        Expectation::derived(Claim::TotallyUmbilical { value: false }, "principal curvatures c, c, 0"),
        Expectation::derived(Claim::Isoparametric { value: true }, "principal curvatures c, c, 0"),
        Expectation::derived(Claim::GeneralizedConstantRatio { value: true }, "x^T lies along the ruling"),
    ];
    match corrected_soliton {
        Some(lambda) => {
            out.push(Expectation::derived(
                Claim::Verdict { verdict: Verdict::from_lambda(lambda, 1e-12) },
                "both metric blocks give the same λ",
            ));
        }
        None => out.push(Expectation::derived(
            Claim::Verdict { verdict: Verdict::NotASoliton },
            "the factor block and the ruling demand different λ",
        )),
    }
    out
}

fn build_hyperbolic_cylinder(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let c = nonzero(params, "c")?;
    let imm = Immersion::new(
        format!("hyperbolic_cylinder(c={c})"),
        [[0.25, 1.5], [0.0, 6.0], [-1.0, 1.0]],
        move |v| {
            let (u, t, w) = (v[0], v[1], v[2]);
            let su = u.sinh() / c;
            Ok([u.cosh() / c, su * t.cos(), su * t.sin(), w])
        },
    )
    .with_orientation(c.signum());
    Ok(BuiltEntry {
        entry: "hyperbolic_cylinder".into(),
        parameters: params.clone(),
        immersion: imm,
        // block λ = −c² against 1 along the ruling
        expectations: product_expectations(c, -1.0, None),
        constraint: Some(Box::new(move |x| {
            -x.0[0] * x.0[0] + x.0[1] * x.0[1] + x.0[2] * x.0[2] + 1.0 / (c * c)
        })),
    })
}

fn build_pseudo_spherical_cylinder(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let c = nonzero(params, "c")?;
    let imm = Immersion::new(
        format!("pseudo_spherical_cylinder(c={c})"),
        [[-1.0, 1.0], [0.0, 6.0], [-1.0, 1.0]],
        move |v| {
            let (u, t, w) = (v[0], v[1], v[2]);
            let cu = u.cosh() / c;
            Ok([u.sinh() / c, cu * t.cos(), cu * t.sin(), w])
        },
    )
    .with_orientation(c.signum());
    let soliton = if (c * c - 1.0).abs() < 1e-12 { Some(1.0) } else { None };
    Ok(BuiltEntry {
        entry: "pseudo_spherical_cylinder".into(),
        parameters: params.clone(),
        immersion: imm,
        expectations: product_expectations(c, 1.0, soliton),
        constraint: Some(Box::new(move |x| {
            -x.0[0] * x.0[0] + x.0[1] * x.0[1] + x.0[2] * x.0[2] - 1.0 / (c * c)
        })),
    })
}

fn frame_spec(params: &Params, a: f64) -> FrameODESpec {
    let alpha0 = MinkVector::new(params["alpha1"], params["alpha2"], params["alpha3"], params["alpha4"]);
    FrameODESpec::new(a, BProfile { b0: params["b0"], b1: params["b1"] }).with_alpha0(alpha0)
}

fn build_umbilical_entry(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let a = nonzero(params, "a")?;
    let imm = build_generalized_umbilical(frame_spec(params, a))?.with_orientation(1.0);
    Ok(BuiltEntry {
        entry: "generalized_umbilical".into(),
        parameters: params.clone(),
        immersion: imm,
        expectations: vec![
            Expectation::claimed(
                Claim::MinimalPolynomial { coefficients: vec![a * a, -2.0 * a, 1.0] },
                NULL_UMBILICAL_SRC,
            ),
            Expectation::claimed(Claim::LambdaOneOf { values: vec![a * a + 1.0] }, NULL_UMBILICAL_SRC),
            Expectation::claimed(Claim::Verdict { verdict: Verdict::Shrinking }, NULL_UMBILICAL_SRC),
            Expectation::claimed(Claim::Isoparametric { value: true }, NULL_UMBILICAL_SRC),
            Expectation::derived(Claim::Epsilon { value: 1.0 }, "Gram relations of the null frame"),
            Expectation::derived(
                Claim::Verdict { verdict: Verdict::NotASoliton },
                "a Jordan block soliton needs constant ρ, then ∇ρ = −A x^T forces x^T = 0",
            ),
        ],
        constraint: None,
    })
}

fn build_cylinder_entry(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let imm = build_generalized_cylinder_i(frame_spec(params, 0.0))?.with_orientation(1.0);
    Ok(BuiltEntry {
        entry: "generalized_cylinder_i".into(),
        parameters: params.clone(),
        immersion: imm,
        expectations: vec![
            Expectation::claimed(
                Claim::MinimalPolynomial { coefficients: vec![0.0, 0.0, 1.0] },
                NULL_CYLINDER_SRC,
            ),
            Expectation::claimed(Claim::RicciVanishes, NULL_CYLINDER_SRC),
            Expectation::claimed(Claim::LieDerivativeEqualsMetric { half: false }, NULL_CYLINDER_SRC),
            Expectation::claimed(Claim::LieDerivativeEqualsMetric { half: false }, NULL_REMARK_SRC),
            Expectation::derived(Claim::Epsilon { value: 1.0 }, "N = Z is spacelike"),
            Expectation::derived(Claim::LambdaOneOf { values: vec![1.0] }, "g(A·,·) only touches a null pair"),
            Expectation::derived(
                Claim::Verdict { verdict: Verdict::NotASoliton },
                "½ L g = g + ρ g(A·,·) and ρ g(A·,·) does not vanish",
            ),
        ],
        constraint: None,
    })
}

fn graph_expectations(epsilon: f64, why: &str) -> Vec<Expectation> {
    vec![
        Expectation::derived(Claim::Epsilon { value: epsilon }, why),
        Expectation::derived(Claim::Verdict { verdict: Verdict::NotASoliton }, "pointwise λ varies"),
        Expectation::derived(Claim::TotallyUmbilical { value: false }, "radial and tangential curvatures differ"),
    ]
}

fn build_graph(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let imm = Immersion::new("negative_control_graph", [[-0.4, 0.4]; 3], |v| {
        let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        Ok([v[0], v[1], v[2], q])
    });
    Ok(BuiltEntry {
        entry: "negative_control_graph".into(),
        parameters: params.clone(),
        immersion: imm,
        expectations: graph_expectations(1.0, "induced metric has the signature of its base hyperplane"),
        constraint: Some(Box::new(|x| x.0[3] - (x.0[0].powi(2) + x.0[1].powi(2) + x.0[2].powi(2)))),
    })
}

fn build_lorentzian_graph(params: &Params) -> Result<BuiltEntry, CatalogError> {
    let imm = Immersion::new("negative_control_lorentzian_graph", [[-0.25, 0.25]; 3], |v| {
        let q: Jet = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        Ok([q + 2.0, v[0], v[1], v[2]])
    });
    Ok(BuiltEntry {
        entry: "negative_control_lorentzian_graph".into(),
        parameters: params.clone(),
        immersion: imm,
        expectations: graph_expectations(-1.0, "gradient of the height is small, so the graph is spacelike"),
        constraint: Some(Box::new(|x| x.0[0] - (x.0[1].powi(2) + x.0[2].powi(2) + x.0[3].powi(2)) - 2.0)),
    })
}

/// `sup |constraint(x)|` over the default grid of a built entry.
pub fn constraint_residual(built: &BuiltEntry) -> Option<f64> {
    let f = built.constraint.as_ref()?;
    let grid = built.immersion.default_grid();
    Some(
        grid.points
            .iter()
            .filter_map(|p| built.immersion.position(*p).ok())
            .map(|x| f(&x).abs())
            .fold(0.0, f64::max),
    )
}
