//! The soliton equation `½ L_{x^T} g + Ric = λ g` for the tangential position
//! field, evaluated pointwise and fitted over a grid.

use serde::{Deserialize, Serialize};

use crate::hypersurface::{Grid, HypersurfaceError, HypersurfaceSample, Immersion};
use crate::lorentz::Mat3;

type Result<T> = std::result::Result<T, HypersurfaceError>;

/// Which Gauss-equation Ricci tensor enters the soliton equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RicciMode {
    /// `ε(3H g(A·,·) − g(A·,A·))`, which matches the intrinsic curvature.
    Corrected,
    /// `3H g(A·,·) − g(A·,A·)` without the normal sign.
    PaperForm,
}

impl RicciMode {
    pub const ALL: [RicciMode; 2] = [RicciMode::Corrected, RicciMode::PaperForm];

    pub fn label(&self) -> &'static str {
        match self {
            RicciMode::Corrected => "corrected",
            RicciMode::PaperForm => "paper_form",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieRoute {
    /// Differentiate the chart components of `x^T` and `g`.
    Coordinate,
    /// `L g = 2g + 2ερ g(A·,·)`.
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Shrinking,
    Steady,
    Expanding,
    NotASoliton,
}

impl Verdict {
    pub fn is_soliton(&self) -> bool {
        !matches!(self, Verdict::NotASoliton)
    }

    /// Sign classification of a soliton constant.
    pub fn from_lambda(lambda: f64, tol: f64) -> Verdict {
        if lambda > tol {
            Verdict::Shrinking
        } else if lambda < -tol {
            Verdict::Expanding
        } else {
            Verdict::Steady
        }
    }
}

pub fn ricci(s: &HypersurfaceSample, mode: RicciMode) -> Mat3 {
    match mode {
        RicciMode::Corrected => s.ricci_extrinsic,
        RicciMode::PaperForm => s.ricci_paper_form,
    }
}

/// `(L g)ᵢⱼ = t^k ∂ₖgᵢⱼ + gₖⱼ ∂ᵢt^k + gᵢₖ ∂ⱼt^k` for `t = x^T`.
pub fn lie_derivative_coordinate(s: &HypersurfaceSample) -> Mat3 {
    let g = &s.jets.metric;
    let t = &s.jets.tangent_position;
    let lie = Mat3::from_fn(|i, j| {
        let mut r = 0.0;
        for k in 0..3 {
            r += t[k].value() * g[i][j].d1(k);
            r += g[k][j].value() * t[k].d1(i) + g[i][k].value() * t[k].d1(j);
        }
        r
    });
    lie.symmetrized()
}

/// `2(g + ερ g(A·,·))`.
pub fn lie_derivative_closed_form(s: &HypersurfaceSample) -> Mat3 {
    (s.metric + s.shape_form().scale(s.epsilon * s.support)).scale(2.0)
}

pub fn lie_derivative(s: &HypersurfaceSample, route: LieRoute) -> Mat3 {
    match route {
        LieRoute::Coordinate => lie_derivative_coordinate(s),
        LieRoute::ClosedForm => lie_derivative_closed_form(s),
    }
}

/// `½ L g + Ric − λ g`.
pub fn soliton_tensor(s: &HypersurfaceSample, lambda: f64, mode: RicciMode, route: LieRoute) -> Mat3 {
    lie_derivative(s, route).scale(0.5) + ricci(s, mode) - s.metric.scale(lambda)
}

/// `Ric − ((λ − 1) g − ερ g(A·,·))`, the soliton condition with the Lie
/// derivative eliminated.
pub fn ricci_condition_tensor(s: &HypersurfaceSample, lambda: f64, mode: RicciMode) -> Mat3 {
    ricci(s, mode) - (s.metric.scale(lambda - 1.0) - s.shape_form().scale(s.epsilon * s.support))
}

fn normalized(m: &Mat3, s: &HypersurfaceSample) -> f64 {
    m.max_abs() / s.metric.max_abs()
}

pub fn point_residual(s: &HypersurfaceSample, lambda: f64, mode: RicciMode, route: LieRoute) -> f64 {
    normalized(&soliton_tensor(s, lambda, mode, route), s)
}

pub fn ricci_condition_residual(s: &HypersurfaceSample, lambda: f64, mode: RicciMode) -> f64 {
    normalized(&ricci_condition_tensor(s, lambda, mode), s)
}

/// Least-squares `λ` for `½ L g + Ric = λ g` over the six independent
/// components at one point.
pub fn pointwise_lambda(s: &HypersurfaceSample, mode: RicciMode, route: LieRoute) -> f64 {
    let lhs = (lie_derivative(s, route).scale(0.5) + ricci(s, mode)).upper_entries();
    let g = s.metric.upper_entries();
    let num: f64 = lhs.iter().zip(g).map(|(l, g)| l * g).sum();
    let den: f64 = g.iter().map(|g| g * g).sum();
    num / den
}

/// `sup |(grad f)ⁱ − (x^T)ⁱ|` with `f = ½ <x, x>`.
pub fn gradient_residual(s: &HypersurfaceSample) -> f64 {
    let df = s.jets.potential.gradient();
    let grad = s.metric.inverse().map(|gi| gi.mul_vec(df)).unwrap_or([f64::NAN; 3]);
    (0..3).map(|i| (grad[i] - s.tangent_position[i]).abs()).fold(0.0, f64::max)
}

/// Residuals of `∇_X x^T = X + ερ AX` and `∇ρ = −A x^T`.
pub fn lemma1_residuals(s: &HypersurfaceSample) -> [f64; 2] {
    let t = &s.jets.tangent_position;
    let gamma = &s.christoffels;
    let er = s.epsilon * s.support;
    let mut first: f64 = 0.0;
    for i in 0..3 {
        for k in 0..3 {
            let mut cov = t[k].d1(i);
            for l in 0..3 {
                cov += gamma[k][i][l] * t[l].value();
            }
            let expect = if i == k { 1.0 } else { 0.0 } + er * s.shape[k][i];
            first = first.max((cov - expect).abs());
        }
    }
    let drho = s.jets.support.gradient();
    let grad = s.metric.inverse().map(|gi| gi.mul_vec(drho)).unwrap_or([f64::NAN; 3]);
    let at = s.shape.mul_vec(s.tangent_position);
    let second = (0..3).map(|i| (grad[i] + at[i]).abs()).fold(0.0, f64::max);
    [first, second]
}

/// Support function, tangential position and `f = ½<x,x>` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialData {
    pub support: f64,
    pub tangent_position: [f64; 3],
    pub potential_function_value: f64,
}

impl PotentialData {
    pub fn from_sample(s: &HypersurfaceSample) -> Self {
        Self {
            support: s.support,
            tangent_position: s.tangent_position,
            potential_function_value: s.potential,
        }
    }

    /// `|ρ − <x, N>|` recomputed from the sample's vectors.
    pub fn support_consistency(&self, s: &HypersurfaceSample) -> f64 {
        (self.support - s.point.inner(&s.normal)).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonReport {
    pub ricci_mode: RicciMode,
    pub lambda_fit: f64,
    pub lambda_spread: f64,
    pub residual_sup: f64,
    /// Same residual for `Ric = (λ − 1) g − ερ g(A·,·)`.
    pub ricci_condition_sup: f64,
    pub verdict: Verdict,
    pub gradient_check: f64,
    pub lemma1: [f64; 2],
    pub route_agreement: f64,
    pub tolerance: f64,
}

/// Fit `λ` pointwise (closed-form Lie route), average over the grid and
/// decide the verdict at tolerance `tol`.
pub fn fit_lambda_samples(samples: &[HypersurfaceSample], mode: RicciMode, tol: f64) -> Result<SolitonReport> {
    if samples.is_empty() {
        return Err(HypersurfaceError::EmptyGrid);
    }
    let route = LieRoute::ClosedForm;
    let lambdas: Vec<f64> = samples.iter().map(|s| pointwise_lambda(s, mode, route)).collect();
    let lambda_fit = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    let lambda_spread = lambdas.iter().map(|l| (l - lambda_fit).abs()).fold(0.0, f64::max);
    let sup = |f: &dyn Fn(&HypersurfaceSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let residual_sup = sup(&|s| point_residual(s, lambda_fit, mode, route));
    let ricci_condition_sup = sup(&|s| ricci_condition_residual(s, lambda_fit, mode));
    let route_agreement = sup(&|s| (lie_derivative_coordinate(s) - lie_derivative_closed_form(s)).max_abs());
    let gradient_check = sup(&gradient_residual);
    let lemma1 = samples.iter().map(lemma1_residuals).fold([0.0f64, 0.0f64], |acc, r| {
        [acc[0].max(r[0]), acc[1].max(r[1])]
    });
    let verdict = if residual_sup < tol && lambda_spread < tol {
        Verdict::from_lambda(lambda_fit, tol)
    } else {
        Verdict::NotASoliton
    };
    Ok(SolitonReport {
        ricci_mode: mode,
        lambda_fit,
        lambda_spread,
        residual_sup,
        ricci_condition_sup,
        verdict,
        gradient_check,
        lemma1,
        route_agreement,
        tolerance: tol,
    })
}

pub fn fit_lambda(imm: &Immersion, grid: &Grid, mode: RicciMode, tol: f64) -> Result<SolitonReport> {
    fit_lambda_samples(&imm.sample_grid(grid)?, mode, tol)
}

/// `sup` over the grid of the normalized soliton residual at a given `λ`.
pub fn soliton_residual(imm: &Immersion, grid: &Grid, lambda: f64, mode: RicciMode) -> Result<f64> {
    let samples = imm.sample_grid(grid)?;
    Ok(samples
        .iter()
        .map(|s| point_residual(s, lambda, mode, LieRoute::Coordinate))
        .fold(0.0, f64::max))
}

pub fn lemma1_check(imm: &Immersion, grid: &Grid) -> Result<[f64; 2]> {
    let samples = imm.sample_grid(grid)?;
    Ok(samples.iter().map(lemma1_residuals).fold([0.0f64, 0.0f64], |acc, r| {
        [acc[0].max(r[0]), acc[1].max(r[1])]
    }))
}

pub fn gradient_soliton_check(imm: &Immersion, grid: &Grid) -> Result<f64> {
    let samples = imm.sample_grid(grid)?;
    Ok(samples.iter().map(gradient_residual).fold(0.0, f64::max))
}
