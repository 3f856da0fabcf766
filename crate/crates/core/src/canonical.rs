//! The soliton condition written out per canonical form of the shape
//! operator. In a frame adapted to the form the condition is a handful of
//! relations that are linear in `(λ, ρ)` once the curvature parameters are
//! fixed, so solvability is decided by elimination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lorentz::FormVariant;
use crate::soliton::RicciMode;
use crate::tolerances::TAU_ALG;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("the {form} form only occurs on Lorentzian hypersurfaces (epsilon = +1), got {epsilon}")]
    LorentzianOnly { form: &'static str, epsilon: f64 },
    #[error("epsilon must be +1 or -1, got {0}")]
    BadEpsilon(f64),
    #[error("unknown form `{0}`")]
    UnknownForm(String),
}

/// `lambda·λ + rho·ρ = rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub lambda: f64,
    pub rho: f64,
    pub rhs: f64,
}

impl Relation {
    fn new(name: impl Into<String>, lambda: f64, rho: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lambda,
            rho,
            rhs,
        }
    }

    pub fn residual(&self, lambda: f64, rho: f64) -> f64 {
        self.lambda * lambda + self.rho * rho - self.rhs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSystem {
    pub variant: FormVariant,
    pub epsilon: f64,
    pub mode: RicciMode,
    pub relations: Vec<Relation>,
}

/// Sign in front of the Gauss term: `ε` for the corrected Ricci tensor,
/// `1` for the form that drops it.
fn gauss_sign(epsilon: f64, mode: RicciMode) -> f64 {
    match mode {
        RicciMode::Corrected => epsilon,
        RicciMode::PaperForm => 1.0,
    }
}

pub fn build_case_system(variant: FormVariant, epsilon: f64, mode: RicciMode) -> Result<CaseSystem, CaseError> {
    if epsilon != 1.0 && epsilon != -1.0 {
        return Err(CaseError::BadEpsilon(epsilon));
    }
    if !matches!(variant, FormVariant::Diagonalizable { .. }) && epsilon != 1.0 {
        return Err(CaseError::LorentzianOnly {
            form: variant.tag(),
            epsilon,
        });
    }
    let k = gauss_sign(epsilon, mode);
    let relations = match variant {
        FormVariant::Diagonalizable { a } => (0..3)
            .map(|i| {
                let (aj, ak) = (a[(i + 1) % 3], a[(i + 2) % 3]);
                Relation::new(format!("e{}e{}", i + 1, i + 1), 1.0, -epsilon * a[i], 1.0 + k * a[i] * (aj + ak))
            })
            .collect(),
        FormVariant::ComplexPair { a1, b1, a2 } => vec![
            Relation::new("e1e1", 1.0, -a1, 1.0 + a1 * a1 + a1 * a2 + b1 * b1),
            Relation::new("e2e2", 1.0, -a1, 1.0 + a1 * a1 + a1 * a2 + b1 * b1),
            Relation::new("e3e3", 1.0, -a2, 1.0 + 2.0 * a1 * a2),
            Relation::new("e1e2", 0.0, b1, -a2 * b1),
        ],
        FormVariant::Jordan2 { a1, a2 } => vec![
            Relation::new("e1e1", 0.0, 1.0, -a2),
            Relation::new("e1e2", 1.0, -a1, 1.0 + a1 * a1 + a1 * a2),
            Relation::new("e3e3", 1.0, -a2, 1.0 + 2.0 * a1 * a2),
        ],
        FormVariant::Jordan3 { a1 } => vec![
            Relation::new("e1e1", 0.0, 0.0, -1.0),
            Relation::new("e1e3", 0.0, 1.0, -a1),
            Relation::new("e1e2", 1.0, -a1, 1.0 + 2.0 * a1 * a1),
        ],
    };
    Ok(CaseSystem {
        variant,
        epsilon,
        mode,
        relations,
    })
}

/// A relation the parameters cannot satisfy, with the size of the
/// violation (a sum of squares where one is available).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub relation: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CaseSolution {
    Unique { lambda: f64, rho: f64 },
    /// `λ = lambda0 + slope·ρ` for every `ρ`.
    RhoFree { lambda0: f64, slope: f64 },
    /// `ρ` fixed, `λ` arbitrary.
    LambdaFree { rho: f64 },
    Unconstrained,
    Infeasible { witness: Witness },
}

impl CaseSolution {
    pub fn is_solvable(&self) -> bool {
        !matches!(self, CaseSolution::Infeasible { .. })
    }

    /// A representative `(λ, ρ)`, taking `ρ = 0` where it is free.
    pub fn representative(&self) -> Option<(f64, f64)> {
        match *self {
            CaseSolution::Unique { lambda, rho } => Some((lambda, rho)),
            CaseSolution::RhoFree { lambda0, .. } => Some((lambda0, 0.0)),
            CaseSolution::LambdaFree { rho } => Some((0.0, rho)),
            CaseSolution::Unconstrained => Some((0.0, 0.0)),
            CaseSolution::Infeasible { .. } => None,
        }
    }
}

fn scale_of(system: &CaseSystem) -> f64 {
    system
        .relations
        .iter()
        .map(|r| r.lambda.abs().max(r.rho.abs()).max(r.rhs.abs()))
        .fold(1.0, f64::max)
}

/// Decide solvability by substitution. Returns the form-specific witness
/// when the system is inconsistent.
pub fn solve_case(system: &CaseSystem) -> CaseSolution {
    let tol = TAU_ALG * scale_of(system);
    match eliminate(&system.relations, tol) {
        Ok(sol) => sol,
        Err(generic) => CaseSolution::Infeasible {
            witness: form_witness(system).unwrap_or(generic),
        },
    }
}

fn eliminate(relations: &[Relation], tol: f64) -> Result<CaseSolution, Witness> {
    // pick the relation with the largest λ coefficient as the λ pivot
    let mut rows: Vec<&Relation> = relations.iter().collect();
    let lam_pivot = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.lambda.abs().total_cmp(&b.1.lambda.abs()))
        .map(|(i, _)| i);
    let solution = match lam_pivot {
        Some(p) if rows[p].lambda.abs() > tol => {
            let piv = rows.remove(p);
            // λ = (rhs − rho·ρ)/lambda; substitute into the rest
            let lambda0 = piv.rhs / piv.lambda;
            let slope = -piv.rho / piv.lambda;
            let reduced: Vec<(f64, f64, &str)> = rows
                .iter()
                .map(|r| (r.rho + r.lambda * slope, r.rhs - r.lambda * lambda0, r.name.as_str()))
                .collect();
            match solve_single(&reduced, tol)? {
                Some(rho) => CaseSolution::Unique {
                    lambda: lambda0 + slope * rho,
                    rho,
                },
                None => CaseSolution::RhoFree { lambda0, slope },
            }
        }
        _ => {
            let reduced: Vec<(f64, f64, &str)> = rows.iter().map(|r| (r.rho, r.rhs, r.name.as_str())).collect();
            match solve_single(&reduced, tol)? {
                Some(rho) => CaseSolution::LambdaFree { rho },
                None => CaseSolution::Unconstrained,
            }
        }
    };
    Ok(solution)
}

/// Solve `c·ρ = d` for all rows: `Some(ρ)` when determined, `None` when
/// every row is trivially satisfied.
fn solve_single(rows: &[(f64, f64, &str)], tol: f64) -> Result<Option<f64>, Witness> {
    let pivot = rows.iter().max_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let rho = match pivot {
        Some(&(c, d, _)) if c.abs() > tol => Some(d / c),
        _ => None,
    };
    let r = rho.unwrap_or(0.0);
    for &(c, d, name) in rows {
        let miss = c * r - d;
        if miss.abs() > tol {
            return Err(Witness {
                relation: name.to_string(),
                value: miss.abs(),
            });
        }
    }
    Ok(rho)
}

/// The obstruction in closed form, for the forms where one exists.
fn form_witness(system: &CaseSystem) -> Option<Witness> {
    match system.variant {
        FormVariant::Diagonalizable { a } => {
            let k = gauss_sign(system.epsilon, system.mode);
            // distinct pairs force ερ = −k·(third value) for two different thirds
            let d = [(a[0] - a[1]).abs(), (a[1] - a[2]).abs(), (a[0] - a[2]).abs()];
            Some(Witness {
                relation: format!(
                    "pairwise differences force eps*rho = -{k}*a_k for two distinct a_k: (a1-a2)(a2-a3)(a1-a3) = 0"
                ),
                value: d[0] * d[1] * d[2],
            })
        }
        FormVariant::ComplexPair { a1, b1, a2 } => Some(Witness {
            relation: "(a1-a2)^2 + b1^2 = 0".into(),
            value: (a1 - a2).powi(2) + b1 * b1,
        }),
        FormVariant::Jordan2 { a1, a2 } => Some(Witness {
            relation: "(a1-a2)^2 = 0".into(),
            value: (a1 - a2).powi(2),
        }),
        FormVariant::Jordan3 { .. } => Some(Witness {
            relation: "Ric(e1,e1) = -1 but the soliton equation needs 0".into(),
            value: 1.0,
        }),
    }
}

/// Residual of each relation at `(λ, ρ)`.
pub fn residuals(system: &CaseSystem, lambda: f64, rho: f64) -> Vec<f64> {
    system.relations.iter().map(|r| r.residual(lambda, rho)).collect()
}

pub fn max_residual(system: &CaseSystem, lambda: f64, rho: f64) -> f64 {
    residuals(system, lambda, rho).into_iter().fold(0.0, |m, r| m.max(r.abs()))
}

/// Solvability predicted by the case analysis: a diagonalizable form
/// needs a repeated principal curvature, a complex pair or a three-step
/// block never works, and a two-step block needs `a₁ = a₂`.
pub fn predicted_solvable(variant: &FormVariant) -> bool {
    match *variant {
        FormVariant::Diagonalizable { a } => a[0] == a[1] || a[1] == a[2] || a[0] == a[2],
        FormVariant::ComplexPair { b1, .. } => b1 == 0.0,
        FormVariant::Jordan2 { a1, a2 } => a1 == a2,
        FormVariant::Jordan3 { .. } => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Diagonalizable,
    ComplexPair,
    Jordan2,
    Jordan3,
}

impl FormKind {
    pub const ALL: [FormKind; 4] = [
        FormKind::Diagonalizable,
        FormKind::ComplexPair,
        FormKind::Jordan2,
        FormKind::Jordan3,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            FormKind::Diagonalizable => "diagonalizable",
            FormKind::ComplexPair => "complex_pair",
            FormKind::Jordan2 => "jordan2",
            FormKind::Jordan3 => "jordan3",
        }
    }

    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            FormKind::Diagonalizable => &["a1", "a2", "a3"],
            FormKind::ComplexPair => &["a1", "b1", "a2"],
            FormKind::Jordan2 => &["a1", "a2"],
            FormKind::Jordan3 => &["a1"],
        }
    }

    /// Build a variant from parameters in the order of
    /// [`parameter_names`](Self::parameter_names).
    pub fn variant(&self, p: &[f64]) -> FormVariant {
        match self {
            FormKind::Diagonalizable => FormVariant::Diagonalizable { a: [p[0], p[1], p[2]] },
            FormKind::ComplexPair => FormVariant::ComplexPair {
                a1: p[0],
                b1: p[1],
                a2: p[2],
            },
            FormKind::Jordan2 => FormVariant::Jordan2 { a1: p[0], a2: p[1] },
            FormKind::Jordan3 => FormVariant::Jordan3 { a1: p[0] },
        }
    }
}

impl std::str::FromStr for FormKind {
    type Err = CaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FormKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| CaseError::UnknownForm(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case")]
pub enum Sampler {
    /// Uniform draws in `[lo, hi]`. A fraction of draws is projected onto
    /// the solvable branch of the form so both sides of the dichotomy
    /// are exercised.
    Random { draws: usize, seed: u64, branch_fraction: f64 },
    /// Every combination of `per_axis` evenly spaced values in `[lo, hi]`.
    Grid { per_axis: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub form: FormKind,
    pub epsilon: f64,
    pub mode: RicciMode,
    pub range: [f64; 2],
    pub sampler: Sampler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameters: Vec<f64>,
    pub solution: CaseSolution,
    /// Largest relation residual at the returned solution (0 if infeasible).
    pub residual: f64,
    pub predicted_solvable: bool,
}

impl SweepRow {
    pub fn agrees(&self) -> bool {
        self.solution.is_solvable() == self.predicted_solvable
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: SweepConfig,
    pub solvable: usize,
    pub infeasible: usize,
    pub misclassified: usize,
    pub max_residual: f64,
    pub rows: Vec<SweepRow>,
}

fn project_to_branch(form: FormKind, p: &mut [f64], which: u32) {
    match form {
        FormKind::Diagonalizable => match which % 4 {
            0 => {
                p[1] = p[0];
                p[2] = p[0];
            }
            1 => p[1] = p[0],
            2 => p[2] = p[1],
            _ => p[2] = p[0],
        },
        FormKind::Jordan2 => p[1] = p[0],
        // no solvable branch with b1 ≠ 0; keep the draw as is
        FormKind::ComplexPair | FormKind::Jordan3 => {}
    }
}

fn draw_parameters(config: &SweepConfig) -> Vec<Vec<f64>> {
    let n = config.form.parameter_names().len();
    let [lo, hi] = config.range;
    match config.sampler {
        Sampler::Random {
            draws,
            seed,
            branch_fraction,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..draws)
                .map(|_| {
                    let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
                    if config.form == FormKind::ComplexPair && p[1] == 0.0 {
                        p[1] = hi.max(1.0);
                    }
                    if rng.gen::<f64>() < branch_fraction {
                        let which = rng.gen::<u32>();
                        project_to_branch(config.form, &mut p, which);
                    }
                    p
                })
                .collect()
        }
        Sampler::Grid { per_axis } => {
            let axis: Vec<f64> = if per_axis <= 1 {
                vec![lo]
            } else {
                (0..per_axis)
                    .map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
                    .collect()
            };
            let mut out = vec![Vec::new()];
            for _ in 0..n {
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        axis.iter().map(move |&x| {
                            let mut q = prefix.clone();
                            q.push(x);
                            q
                        })
                    })
                    .collect();
            }
            out
        }
    }
}

pub fn sweep(config: &SweepConfig) -> Result<SweepSummary, CaseError> {
    let epsilon = config.epsilon;
    // validate once up front; non-diagonal forms need ε = 1
    build_case_system(config.form.variant(&vec![0.0; config.form.parameter_names().len()]), epsilon, config.mode)?;
    let rows: Vec<SweepRow> = draw_parameters(config)
        .into_par_iter()
        .map(|p| {
            let variant = config.form.variant(&p);
            let system = build_case_system(variant, epsilon, config.mode).expect("validated above");
            let solution = solve_case(&system);
            let residual = solution
                .representative()
                .map(|(l, r)| max_residual(&system, l, r))
                .unwrap_or(0.0);
            SweepRow {
                parameters: p,
                solution,
                residual,
                predicted_solvable: predicted_solvable(&variant),
            }
        })
        .collect();
    let solvable = rows.iter().filter(|r| r.solution.is_solvable()).count();
    Ok(SweepSummary {
        config: config.clone(),
        solvable,
        infeasible: rows.len() - solvable,
        misclassified: rows.iter().filter(|r| !r.agrees()).count(),
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        rows,
    })
}

/// How well a pointwise geometric measurement `(form, ε, ρ, λ)` satisfies
/// the case system of its form.
pub fn consistency_residual(variant: FormVariant, epsilon: f64, mode: RicciMode, lambda: f64, rho: f64) -> Result<f64, CaseError> {
    let system = build_case_system(variant, epsilon, mode)?;
    Ok(max_residual(&system, lambda, rho))
}
