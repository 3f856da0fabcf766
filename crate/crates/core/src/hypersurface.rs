//! Extrinsic and intrinsic geometry of a parametrized hypersurface of
//! Minkowski space at a single chart point.
//!
//! Everything is computed from the degree-3 jet of the immersion: the
//! tangent vectors and metric are valid to degree 2, the normal and second
//! fundamental form to degree 1, and curvature is read off at degree 0.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::{chart_variables, Jet, JetError};
use crate::lorentz::{
    classify_shape_operator_with, eigenvalues, inverse3, solve_indefinite, ClassifyTolerances, FormVariant,
    LorentzError, Mat3, MinkVector, ShapeOperatorForm, Spectrum,
};
use crate::tolerances::{DOMAIN_MARGIN, TAU_ALG, TAU_CLASS, TAU_DEGENERATE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypersurfaceError {
    #[error("induced metric is degenerate (|det g| = {det:e})")]
    DegenerateMetric { det: f64 },
    #[error("normal direction is null (<n,n> = {norm_sq:e})")]
    NullNormalDirection { norm_sq: f64 },
    #[error("grid is empty")]
    EmptyGrid,
    #[error("frame Gram matrix is off by {mismatch:e}")]
    InvalidFrame { mismatch: f64 },
    #[error("eigenframe needs distinct eigenvalues, got {0:?}")]
    RepeatedEigenvalues([f64; 3]),
    #[error("chart point {point:?} is outside the domain")]
    OutsideDomain { point: [f64; 3] },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("immersion evaluation failed: {0}")]
    Evaluation(String),
}

impl From<LorentzError> for HypersurfaceError {
    fn from(e: LorentzError) -> Self {
        match e {
            LorentzError::SingularMetric { det } => HypersurfaceError::DegenerateMetric { det },
            other => HypersurfaceError::Evaluation(other.to_string()),
        }
    }
}

pub type Result<T, E = HypersurfaceError> = std::result::Result<T, E>;

pub type ChartMap = dyn Fn(&[Jet; 3]) -> Result<[Jet; 4]> + Send + Sync;

/// How the immersion was obtained. Integrated immersions carry ODE error
/// and are judged at looser tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    ClosedForm,
    Integrated,
}

/// A chart `x : D ⊂ R³ → E⁴₁` together with the orientation of its normal.
#[derive(Clone)]
pub struct Immersion {
    pub name: String,
    map: Arc<ChartMap>,
    pub domain: [[f64; 2]; 3],
    /// Multiplies the normal obtained from the ordered cross product.
    pub orientation: f64,
    pub construction: Construction,
}

impl fmt::Debug for Immersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Immersion")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .field("construction", &self.construction)
            .finish()
    }
}

impl Immersion {
    pub fn new(
        name: impl Into<String>,
        domain: [[f64; 2]; 3],
        map: impl Fn(&[Jet; 3]) -> Result<[Jet; 4]> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            map: Arc::new(map),
            domain,
            orientation: 1.0,
            construction: Construction::ClosedForm,
        }
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation.signum();
        self
    }

    pub fn with_construction(mut self, construction: Construction) -> Self {
        self.construction = construction;
        self
    }

    /// Same chart with the opposite normal.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.orientation = -out.orientation;
        out
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.domain[i][0] && p[i] <= self.domain[i][1])
    }

    pub fn eval_jets(&self, p: [f64; 3]) -> Result<[Jet; 4]> {
        (self.map)(&chart_variables(p))
    }

    pub fn position(&self, p: [f64; 3]) -> Result<MinkVector> {
        Ok(MinkVector(self.eval_jets(p)?.map(|j| j.value())))
    }

    pub fn default_grid(&self) -> Grid {
        Grid::uniform(self.domain, [5, 5, 5])
    }

    pub fn sample(&self, p: [f64; 3]) -> Result<HypersurfaceSample> {
        sample(self, p)
    }

    /// Samples every grid point, in grid order.
    pub fn sample_grid(&self, grid: &Grid) -> Result<Vec<HypersurfaceSample>> {
        if grid.points.is_empty() {
            return Err(HypersurfaceError::EmptyGrid);
        }
        grid.points.par_iter().map(|p| sample(self, *p)).collect()
    }
}

/// Tensor-product grid of chart points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub counts: [usize; 3],
    pub bounds: [[f64; 2]; 3],
    pub points: Vec<[f64; 3]>,
}

impl Grid {
    /// `counts[i]` equally spaced values per axis over the box shrunk by the
    /// domain margin on each side. An axis with one sample uses its midpoint.
    pub fn uniform(domain: [[f64; 2]; 3], counts: [usize; 3]) -> Self {
        let bounds = domain.map(|[lo, hi]| {
            let m = DOMAIN_MARGIN * (hi - lo);
            [lo + m, hi - m]
        });
        let axis = |i: usize| -> Vec<f64> {
            let [lo, hi] = bounds[i];
            match counts[i] {
                0 => vec![],
                1 => vec![0.5 * (lo + hi)],
                n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
            }
        };
        let (a, b, c) = (axis(0), axis(1), axis(2));
        let mut points = Vec::with_capacity(a.len() * b.len() * c.len());
        for &x in &a {
            for &y in &b {
                for &z in &c {
                    points.push([x, y, z]);
                }
            }
        }
        Self { counts, bounds, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub type JetMat = [[Jet; 3]; 3];

pub fn jet_values(m: &JetMat) -> Mat3 {
    Mat3(m.map(|row| row.map(|j| j.value())))
}

fn jet_mat_mul(a: &JetMat, b: &JetMat) -> JetMat {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).fold(Jet::zero(), |acc, k| acc + a[i][k] * b[k][j]))
    })
}

fn mink_inner_jet(u: &[Jet; 4], v: &[Jet; 4]) -> Jet {
    -(u[0] * v[0]) + u[1] * v[1] + u[2] * v[2] + u[3] * v[3]
}

fn values4(v: &[Jet; 4]) -> MinkVector {
    MinkVector(v.map(|j| j.value()))
}

/// Jets of the local fields needed by derivative-based checks. Validity:
/// `metric` and `metric_inv` to degree 2; `shape`, `christoffel`,
/// `tangent_position` and `support` to degree 1.
#[derive(Clone, Debug)]
pub struct LocalJets {
    pub metric: JetMat,
    pub metric_inv: JetMat,
    pub shape: JetMat,
    /// `christoffel[k][i][j] = Γᵏᵢⱼ`.
    pub christoffel: [JetMat; 3],
    pub tangent_position: [Jet; 3],
    pub support: Jet,
    pub potential: Jet,
}

/// Identity residuals evaluated while sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    /// `max |<N, ∂ᵢx>|`.
    pub normal_orthogonality: f64,
    /// `| |<N,N>| − 1 |`.
    pub normal_norm: f64,
    /// `‖x − (x^T + ερN)‖`.
    pub position_decomposition: f64,
    /// `max |gA − (gA)ᵀ|`.
    pub self_adjointness: f64,
    /// `max |∂ⱼN + Σ Aⁱⱼ ∂ᵢx|`.
    pub weingarten: f64,
    pub codazzi: f64,
}

impl SampleDiagnostics {
    pub fn worst(&self) -> f64 {
        [
            self.normal_orthogonality,
            self.normal_norm,
            self.position_decomposition,
            self.self_adjointness,
            self.weingarten,
            self.codazzi,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Pointwise geometric data of a hypersurface.
#[derive(Clone, Debug)]
pub struct HypersurfaceSample {
    pub chart_point: [f64; 3],
    pub point: MinkVector,
    pub tangent_basis: [MinkVector; 3],
    pub metric: Mat3,
    pub normal: MinkVector,
    pub epsilon: f64,
    /// Column `j` is `A∂ⱼ` in chart components.
    pub shape: Mat3,
    pub mean_curvature: f64,
    pub ricci_extrinsic: Mat3,
    pub ricci_paper_form: Mat3,
    pub ricci_intrinsic: Mat3,
    /// `christoffels[k][i][j] = Γᵏᵢⱼ`.
    pub christoffels: [[[f64; 3]; 3]; 3],
    pub support: f64,
    pub tangent_position: [f64; 3],
    pub potential: f64,
    pub diagnostics: SampleDiagnostics,
    pub jets: LocalJets,
}

impl HypersurfaceSample {
    /// `g(A·,·)`, the second fundamental form scaled by `ε`.
    pub fn shape_form(&self) -> Mat3 {
        (self.metric * self.shape).symmetrized()
    }
}

/// Christoffel symbols `Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢgⱼₗ + ∂ⱼgᵢₗ − ∂ₗgᵢⱼ)` as jets.
pub fn christoffel_jets(metric: &JetMat, metric_inv: &JetMat) -> [JetMat; 3] {
    let dg: [JetMat; 3] = std::array::from_fn(|l| metric.map(|row| row.map(|g| g.partial(l))));
    // first kind: [ij, l]
    let first: [JetMat; 3] = std::array::from_fn(|l| {
        std::array::from_fn(|i| std::array::from_fn(|j| (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]) * 0.5))
    });
    std::array::from_fn(|k| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).fold(Jet::zero(), |acc, l| acc + metric_inv[k][l] * first[l][i][j]))
        })
    })
}

/// `Ric_jk = ∂ᵢΓⁱⱼₖ − ∂ⱼΓⁱᵢₖ + ΓⁱᵢₗΓˡⱼₖ − ΓⁱⱼₗΓˡᵢₖ`. With this convention the
/// round sphere has positive Ricci curvature.
pub fn ricci_from_christoffel(gamma: &[JetMat; 3]) -> Mat3 {
    let v = |k: usize, i: usize, j: usize| gamma[k][i][j].value();
    let d = |k: usize, i: usize, j: usize, slot: usize| gamma[k][i][j].d1(slot);
    let ric = Mat3::from_fn(|j, k| {
        let mut r = 0.0;
        for i in 0..3 {
            r += d(i, j, k, i) - d(i, i, k, j);
            for l in 0..3 {
                r += v(i, i, l) * v(l, j, k) - v(i, j, l) * v(l, i, k);
            }
        }
        r
    });
    ric.symmetrized()
}

/// `Ric(X, Y) = 3H g(AX, Y) − g(AX, AY)`, multiplied by `ε` when
/// `corrected` is set. Only the corrected form matches the intrinsic Ricci
/// tensor when the normal is timelike.
pub fn ricci_gauss(a: &Mat3, g: &Mat3, epsilon: f64, corrected: bool) -> Mat3 {
    let h = (*g * *a).symmetrized();
    let aga = a.transpose() * *g * *a;
    let ric = (h.scale(a.trace()) - aga).symmetrized();
    if corrected {
        ric.scale(epsilon)
    } else {
        ric
    }
}

/// `max |(∇ᵢA)ᵏⱼ − (∇ⱼA)ᵏᵢ|` with
/// `(∇ᵢA)ᵏⱼ = ∂ᵢAᵏⱼ + ΓᵏᵢₗAˡⱼ − AᵏₗΓˡᵢⱼ`.
pub fn codazzi_residual_of(shape: &JetMat, gamma: &[JetMat; 3]) -> f64 {
    let nabla = |i: usize, k: usize, j: usize| -> f64 {
        let mut r = shape[k][j].d1(i);
        for l in 0..3 {
            r += gamma[k][i][l].value() * shape[l][j].value() - shape[k][l].value() * gamma[l][i][j].value();
        }
        r
    };
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            for k in 0..3 {
                worst = worst.max((nabla(i, k, j) - nabla(j, k, i)).abs());
            }
        }
    }
    worst
}

/// Minkowski normal of three vectors: `<n, v> = det(v, t₁, t₂, t₃)`.
fn cross_jets(t: &[[Jet; 4]; 3]) -> [Jet; 4] {
    let minor = |skip: usize| -> Jet {
        let cols: Vec<usize> = (0..4).filter(|c| *c != skip).collect();
        let m: JetMat = std::array::from_fn(|r| std::array::from_fn(|c| t[r][cols[c]]));
        crate::lorentz::det3(&m)
    };
    let c: [Jet; 4] = std::array::from_fn(|a| if a % 2 == 0 { minor(a) } else { -minor(a) });
    [-c[0], c[1], c[2], c[3]]
}

pub fn sample(imm: &Immersion, p: [f64; 3]) -> Result<HypersurfaceSample> {
    let x = imm.eval_jets(p)?;
    let tangent_jets: [[Jet; 4]; 3] = std::array::from_fn(|i| x.map(|c| c.partial(i)));
    let metric: JetMat =
        std::array::from_fn(|i| std::array::from_fn(|j| mink_inner_jet(&tangent_jets[i], &tangent_jets[j])));
    let g = jet_values(&metric);
    let det = g.det();
    if det.abs() < TAU_DEGENERATE || !det.is_finite() {
        return Err(HypersurfaceError::DegenerateMetric { det });
    }
    let metric_inv = inverse3(&metric);

    let n = cross_jets(&tangent_jets);
    let q = mink_inner_jet(&n, &n);
    let euclid: f64 = n.iter().map(|c| c.value().powi(2)).sum();
    if q.value().abs() <= TAU_ALG * euclid || euclid == 0.0 {
        return Err(HypersurfaceError::NullNormalDirection { norm_sq: q.value() });
    }
    let epsilon = q.value().signum();
    let inv_len = (q * epsilon).try_sqrt()?.recip() * imm.orientation;
    let normal_jets = n.map(|c| c * inv_len);

    // h_kj = −<∂ⱼN, ∂ₖx> = g(A∂ⱼ, ∂ₖ)
    let dn: [[Jet; 4]; 3] = std::array::from_fn(|j| normal_jets.map(|c| c.partial(j)));
    let h: JetMat = std::array::from_fn(|k| std::array::from_fn(|j| -mink_inner_jet(&dn[j], &tangent_jets[k])));
    let shape_jets = jet_mat_mul(&metric_inv, &h);
    let hv = jet_values(&h);
    let mut shape = Mat3::zero();
    for j in 0..3 {
        let col = solve_indefinite(&g, hv.column(j))?;
        for i in 0..3 {
            shape[i][j] = col[i];
        }
    }

    let christoffel = christoffel_jets(&metric, &metric_inv);
    let ricci_intrinsic = ricci_from_christoffel(&christoffel);

    let support = mink_inner_jet(&x, &normal_jets);
    let xdot: [Jet; 3] = std::array::from_fn(|k| mink_inner_jet(&x, &tangent_jets[k]));
    let tangent_position_jets: [Jet; 3] =
        std::array::from_fn(|i| (0..3).fold(Jet::zero(), |acc, k| acc + metric_inv[i][k] * xdot[k]));
    let tangent_position = solve_indefinite(&g, xdot.map(|j| j.value()))?;
    let potential = mink_inner_jet(&x, &x) * 0.5;

    let point = values4(&x);
    let tangent_basis = tangent_jets.map(|t| values4(&t));
    let normal = values4(&normal_jets);
    let rho = support.value();

    let mut diagnostics = SampleDiagnostics::default();
    diagnostics.normal_orthogonality = tangent_basis
        .iter()
        .map(|t| normal.inner(t).abs())
        .fold(0.0, f64::max);
    diagnostics.normal_norm = (normal.norm_sq().abs() - 1.0).abs();
    let mut rebuilt = normal * (epsilon * rho);
    for i in 0..3 {
        rebuilt = rebuilt + tangent_basis[i] * tangent_position[i];
    }
    diagnostics.position_decomposition = (point - rebuilt).max_abs();
    diagnostics.self_adjointness = (g * shape).asymmetry();
    for j in 0..3 {
        let mut r = values4(&dn[j]);
        for i in 0..3 {
            r = r + tangent_basis[i] * shape[i][j];
        }
        diagnostics.weingarten = diagnostics.weingarten.max(r.max_abs());
    }
    diagnostics.codazzi = codazzi_residual_of(&shape_jets, &christoffel);

    let christoffels = christoffel.map(|m| m.map(|row| row.map(|j| j.value())));
    Ok(HypersurfaceSample {
        chart_point: p,
        point,
        tangent_basis,
        metric: g,
        normal,
        epsilon,
        shape,
        mean_curvature: shape.trace() / 3.0,
        ricci_extrinsic: ricci_gauss(&shape, &g, epsilon, true),
        ricci_paper_form: ricci_gauss(&shape, &g, epsilon, false),
        ricci_intrinsic,
        christoffels,
        support: rho,
        tangent_position,
        potential: potential.value(),
        diagnostics,
        jets: LocalJets {
            metric,
            metric_inv,
            shape: shape_jets,
            christoffel,
            tangent_position: tangent_position_jets,
            support,
            potential,
        },
    })
}

pub fn shape_operator(imm: &Immersion, p: [f64; 3]) -> Result<Mat3> {
    Ok(sample(imm, p)?.shape)
}

pub fn ricci_intrinsic(imm: &Immersion, p: [f64; 3]) -> Result<Mat3> {
    Ok(sample(imm, p)?.ricci_intrinsic)
}

pub fn codazzi_residual(imm: &Immersion, p: [f64; 3]) -> Result<f64> {
    Ok(sample(imm, p)?.diagnostics.codazzi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FrameKind {
    /// `g(e₁,e₁) = −ε`, `g(e₂,e₂) = g(e₃,e₃) = 1`.
    Orthonormal(f64),
    /// `g(e₁,e₂) = −1`, `g(e₃,e₃) = 1`.
    PseudoOrthonormal,
}

impl FrameKind {
    pub fn gram(&self) -> Mat3 {
        match *self {
            FrameKind::Orthonormal(eps) => Mat3::diag([-eps, 1.0, 1.0]),
            FrameKind::PseudoOrthonormal => Mat3([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
        }
    }
}

pub type FrameFn = dyn Fn(&HypersurfaceSample) -> Result<[[Jet; 3]; 3]> + Send + Sync;

/// A tangent frame field near a sample point. Each frame vector is returned
/// as chart components carried as jets (valid to degree 1).
#[derive(Clone)]
pub enum FrameField {
    Coordinate,
    /// Unit eigenvectors of `A`, ordered so a timelike one comes first.
    Eigen,
    Custom(Arc<FrameFn>),
}

impl fmt::Debug for FrameField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameField::Coordinate => write!(f, "Coordinate"),
            FrameField::Eigen => write!(f, "Eigen"),
            FrameField::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Frame vectors and connection forms at one point.
#[derive(Clone, Debug)]
pub struct FrameAtPoint {
    /// `vectors[i]` holds the chart components of `eᵢ`.
    pub vectors: [[f64; 3]; 3],
    pub kind: FrameKind,
    /// `connection_forms[i][j][k] = ω_ij(e_k)`.
    pub connection_forms: [[[f64; 3]; 3]; 3],
    /// `eᵢ` applied to the eigenvalue function `aⱼ`, for eigenframes.
    pub eigen_derivatives: Option<[[f64; 3]; 3]>,
    pub eigenvalues: Option<[f64; 3]>,
}

fn eigen_frame_jets(s: &HypersurfaceSample) -> Result<([[Jet; 3]; 3], [Jet; 3])> {
    let roots = match eigenvalues(&s.shape) {
        Spectrum::Real(r) => r,
        Spectrum::Complex { real, re, .. } => return Err(HypersurfaceError::RepeatedEigenvalues([real, re, re])),
    };
    let scale = s.shape.max_abs().max(1.0);
    if roots[1] - roots[0] < 1e-6 * scale || roots[2] - roots[1] < 1e-6 * scale {
        return Err(HypersurfaceError::RepeatedEigenvalues(roots));
    }
    let a = &s.jets.shape;
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = (a[0][0] * a[1][1] - a[0][1] * a[1][0])
        + (a[0][0] * a[2][2] - a[0][2] * a[2][0])
        + (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
    let det = crate::lorentz::det3(a);
    let mut vecs = Vec::with_capacity(3);
    let mut vals = Vec::with_capacity(3);
    for &r in &roots {
        // Newton on det(tI − A) = t³ − tr t² + minors t − det, in jets
        let mut t = Jet::constant(r);
        for _ in 0..3 {
            let p = ((t - tr) * t + minors) * t - det;
            let dp = (t * 3.0 - tr * 2.0) * t + minors;
            t = t - p / dp;
        }
        let m: JetMat = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { a[i][j] - t } else { a[i][j] }));
        let adj = inverse3_adjugate(&m);
        let col = (0..3)
            .max_by(|&x, &y| {
                let nx: f64 = (0..3).map(|i| adj[i][x].value().powi(2)).sum();
                let ny: f64 = (0..3).map(|i| adj[i][y].value().powi(2)).sum();
                nx.total_cmp(&ny)
            })
            .unwrap_or(0);
        let v: [Jet; 3] = std::array::from_fn(|i| adj[i][col]);
        let gv = (0..3).fold(Jet::zero(), |acc, i| {
            (0..3).fold(acc, |acc, j| acc + s.jets.metric[i][j] * v[i] * v[j])
        });
        let sign = gv.value().signum();
        let len = (gv * sign).try_sqrt()?;
        vecs.push((v.map(|c| c / len), sign));
        vals.push(t);
    }
    // timelike eigenvector first
    let order: Vec<usize> = match vecs.iter().position(|(_, sign)| *sign < 0.0) {
        Some(t) => std::iter::once(t).chain((0..3).filter(|i| *i != t)).collect(),
        None => vec![0, 1, 2],
    };
    Ok((
        std::array::from_fn(|i| vecs[order[i]].0),
        std::array::from_fn(|i| vals[order[i]]),
    ))
}

fn inverse3_adjugate(m: &JetMat) -> JetMat {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ]
}

/// Frame at a sample point, validated against `kind`, with connection forms
/// `ω_ij(e_k)` defined as the `eⱼ` coefficient of `∇_{e_k} eᵢ`. For an
/// orthonormal frame this is `εⱼ g(∇_{e_k} eᵢ, eⱼ)` with `εⱼ = g(eⱼ, eⱼ)`.
pub fn connection_forms(s: &HypersurfaceSample, field: &FrameField, kind: FrameKind) -> Result<FrameAtPoint> {
    let (e, eig): ([[Jet; 3]; 3], Option<[Jet; 3]>) = match field {
        FrameField::Coordinate => (
            std::array::from_fn(|i| std::array::from_fn(|a| Jet::constant(if a == i { 1.0 } else { 0.0 }))),
            None,
        ),
        FrameField::Eigen => {
            let (v, vals) = eigen_frame_jets(s)?;
            (v, Some(vals))
        }
        FrameField::Custom(f) => (f(s)?, None),
    };
    let vectors = e.map(|v| v.map(|c| c.value()));
    let g = s.metric;
    let gram = Mat3::from_fn(|i, j| g.bilinear(vectors[i], vectors[j]));
    let mismatch = (gram - kind.gram()).max_abs();
    if mismatch > 1e3 * TAU_ALG * g.max_abs().max(1.0) {
        return Err(HypersurfaceError::InvalidFrame { mismatch });
    }
    let gram_inv = kind.gram().inverse().expect("frame Gram matrices are invertible");
    let gamma = &s.christoffels;
    // ∇_{e_k} e_i in chart components
    let nabla = |k: usize, i: usize| -> [f64; 3] {
        std::array::from_fn(|a| {
            let mut r = 0.0;
            for b in 0..3 {
                r += vectors[k][b] * e[i][a].d1(b);
                for c in 0..3 {
                    r += vectors[k][b] * gamma[a][b][c] * vectors[i][c];
                }
            }
            r
        })
    };
    let mut forms = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            let v = nabla(k, i);
            let pairings: [f64; 3] = std::array::from_fn(|l| g.bilinear(v, vectors[l]));
            for j in 0..3 {
                forms[i][j][k] = (0..3).map(|l| gram_inv[j][l] * pairings[l]).sum();
            }
        }
    }
    let eigen_derivatives = eig.map(|vals| {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|b| vectors[i][b] * vals[j].d1(b)).sum()))
    });
    Ok(FrameAtPoint {
        vectors,
        kind,
        connection_forms: forms,
        eigen_derivatives,
        eigenvalues: eig.map(|v| v.map(|j| j.value())),
    })
}

/// Residuals of the component form of the Codazzi equation in an
/// orthonormal eigenframe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CodazziComponents {
    /// `max |eᵢ(aⱼ) − ω_ij(eⱼ)(aᵢ − aⱼ)|`.
    pub derivative_relation: f64,
    /// `max |εⱼω_ij(e_k)(aᵢ − aⱼ) − ε_kω_ik(eⱼ)(aᵢ − a_k)|`.
    pub mixed_relation: f64,
    /// The derivative relation with an extra `g(eⱼ,eⱼ)` factor on the right.
    pub derivative_relation_unsigned_frame: f64,
    /// The mixed relation without the `ε` weights.
    pub mixed_relation_unsigned_frame: f64,
}

pub fn codazzi_components(frame: &FrameAtPoint) -> Option<CodazziComponents> {
    let a = frame.eigenvalues?;
    let da = frame.eigen_derivatives?;
    let eps = frame.kind.gram();
    let w = &frame.connection_forms;
    let mut out = CodazziComponents::default();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let rhs = w[i][j][j] * (a[i] - a[j]);
            out.derivative_relation = out.derivative_relation.max((da[i][j] - rhs).abs());
            out.derivative_relation_unsigned_frame =
                out.derivative_relation_unsigned_frame.max((da[i][j] - eps[j][j] * rhs).abs());
            let k = 3 - i - j;
            let lhs = eps[j][j] * w[i][j][k] * (a[i] - a[j]);
            let rhs = eps[k][k] * w[i][k][j] * (a[i] - a[k]);
            out.mixed_relation = out.mixed_relation.max((lhs - rhs).abs());
            let plain = w[i][j][k] * (a[i] - a[j]) - w[i][k][j] * (a[i] - a[k]);
            out.mixed_relation_unsigned_frame = out.mixed_relation_unsigned_frame.max(plain.abs());
        }
    }
    Some(out)
}

/// Structural properties of a hypersurface over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureVerdicts {
    pub totally_umbilical: bool,
    pub isoparametric: bool,
    pub generalized_constant_ratio: bool,
    pub constant_mean_curvature: bool,
    /// `max ‖A − H·I‖`.
    pub umbilicity_defect: f64,
    /// Spread of the characteristic polynomial coefficients of `A`.
    pub curvature_spread: f64,
    /// `max ‖A t − μ t‖ / ‖t‖` over points with `t = x^T ≠ 0`.
    pub gcr_defect: f64,
    pub mean_curvature_spread: f64,
    /// Canonical form tags seen over the grid, with counts.
    pub form_histogram: Vec<(String, usize)>,
}

pub fn classify_structure(imm: &Immersion, grid: &Grid) -> Result<StructureVerdicts> {
    let samples = imm.sample_grid(grid)?;
    classify_structure_from(&samples, ClassifyTolerances::default())
}

pub fn classify_structure_from(samples: &[HypersurfaceSample], tol: ClassifyTolerances) -> Result<StructureVerdicts> {
    if samples.is_empty() {
        return Err(HypersurfaceError::EmptyGrid);
    }
    let mut umbilicity: f64 = 0.0;
    let mut gcr: f64 = 0.0;
    let mut coeff_lo = [f64::INFINITY; 3];
    let mut coeff_hi = [f64::NEG_INFINITY; 3];
    let mut forms: Vec<(String, usize)> = Vec::new();
    let mean_h = samples.iter().map(|s| s.mean_curvature).sum::<f64>() / samples.len() as f64;
    let mut h_spread: f64 = 0.0;
    for s in samples {
        let a = s.shape;
        umbilicity = umbilicity.max((a - Mat3::identity().scale(s.mean_curvature)).max_abs());
        h_spread = h_spread.max((s.mean_curvature - mean_h).abs());
        let c = crate::lorentz::characteristic_coefficients(&a);
        for k in 0..3 {
            coeff_lo[k] = coeff_lo[k].min(c[k]);
            coeff_hi[k] = coeff_hi[k].max(c[k]);
        }
        let t = s.tangent_position;
        let tt: f64 = t.iter().map(|x| x * x).sum();
        if tt.sqrt() > TAU_CLASS {
            let at = a.mul_vec(t);
            let mu = (0..3).map(|i| at[i] * t[i]).sum::<f64>() / tt;
            let defect = (0..3).map(|i| (at[i] - mu * t[i]).abs()).fold(0.0, f64::max) / tt.sqrt();
            gcr = gcr.max(defect);
        }
        let tag = match classify_shape_operator_with(&a, &s.metric, tol) {
            Ok(ShapeOperatorForm { variant, .. }) => variant_label(&variant),
            Err(LorentzError::AmbiguousClassification { .. }) => "ambiguous".to_string(),
            Err(_) => "invalid".to_string(),
        };
        match forms.iter_mut().find(|(t, _)| *t == tag) {
            Some(entry) => entry.1 += 1,
            None => forms.push((tag, 1)),
        }
    }
    forms.sort();
    let spread = (0..3).map(|k| coeff_hi[k] - coeff_lo[k]).fold(0.0, f64::max);
    Ok(StructureVerdicts {
        totally_umbilical: umbilicity < TAU_CLASS,
        isoparametric: spread < TAU_CLASS && forms.len() == 1,
        generalized_constant_ratio: gcr < TAU_CLASS,
        constant_mean_curvature: h_spread < TAU_CLASS,
        umbilicity_defect: umbilicity,
        curvature_spread: spread,
        gcr_defect: gcr,
        mean_curvature_spread: h_spread,
        form_histogram: forms,
    })
}

/// Tag plus minimal polynomial degree, e.g. `jordan2`, `diagonalizable/1`.
fn variant_label(v: &FormVariant) -> String {
    match v {
        FormVariant::Diagonalizable { a } => {
            let distinct = 1 + (a[1] != a[0]) as usize + (a[2] != a[1] && a[2] != a[0]) as usize;
            format!("diagonalizable/{distinct}")
        }
        other => other.tag().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Immersion {
        Immersion::new("plane", [[-1.0, 1.0]; 3], |v| Ok([v[0], v[1], v[2], Jet::constant(1.0)]))
    }

    fn de_sitter(c: f64) -> Immersion {
        Immersion::new("dS", [[-1.0, 1.0], [0.3, 2.8], [0.0, 6.0]], move |v| {
            let (t, th, ph) = (v[0], v[1], v[2]);
            let r = t.cosh() / c;
            Ok([t.sinh() / c, r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()])
        })
    }

    #[test]
    fn plane_is_totally_geodesic() {
        let s = plane().sample([0.2, -0.3, 0.5]).unwrap();
        assert_eq!(s.epsilon, 1.0);
        assert!((s.normal.0[3].abs() - 1.0).abs() < 1e-15);
        assert!(s.shape.max_abs() < 1e-15);
        assert!((s.support.abs() - 1.0).abs() < 1e-15);
        assert!(s.ricci_intrinsic.max_abs() < 1e-15);
        assert!(s.diagnostics.codazzi < 1e-15);
    }

    #[test]
    fn de_sitter_sign_convention() {
        // positive Ricci on the constant positive curvature model
        for c in [1.0, 2.0] {
            let imm = de_sitter(c);
            let s = imm.sample([0.3, 1.1, 2.0]).unwrap();
            assert_eq!(s.epsilon, 1.0);
            let expect = s.metric.scale(2.0 * c * c);
            assert!((s.ricci_intrinsic - expect).max_abs() < 1e-9, "{:?}", s.ricci_intrinsic);
            assert!((s.ricci_extrinsic - expect).max_abs() < 1e-9);
            let a = s.shape;
            let cs = if a[0][0] > 0.0 { c } else { -c };
            assert!((a - Mat3::identity().scale(cs)).max_abs() < 1e-10);
            assert!((s.support * cs + 1.0).abs() < 1e-10);
            assert!(s.tangent_position.iter().all(|t| t.abs() < 1e-12));
        }
    }

    #[test]
    fn grid_shrinks_domain() {
        let g = Grid::uniform([[0.0, 1.0], [0.0, 2.0], [-1.0, 1.0]], [3, 2, 1]);
        assert_eq!(g.len(), 6);
        assert!((g.bounds[0][0] - 0.01).abs() < 1e-15);
        assert!((g.bounds[1][1] - 1.98).abs() < 1e-15);
        assert_eq!(g.points[0][2], 0.0);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let imm = Immersion::new("flat", [[-1.0, 1.0]; 3], |v| {
            Ok([Jet::constant(0.0), v[0], v[1], v[0] + v[1]])
        });
        assert!(matches!(imm.sample([0.0; 3]), Err(HypersurfaceError::DegenerateMetric { .. })));
    }

    #[test]
    fn null_hyperplane_has_null_normal() {
        // x₁ = x₂ hyperplane is degenerate, so its normal is null
        let imm = Immersion::new("null", [[-1.0, 1.0]; 3], |v| Ok([v[0], v[0], v[1], v[2]]));
        let err = imm.sample([0.1, 0.2, 0.3]).unwrap_err();
        assert!(matches!(
            err,
            HypersurfaceError::NullNormalDirection { .. } | HypersurfaceError::DegenerateMetric { .. }
        ));
    }

    #[test]
    fn coordinate_frame_on_plane_has_no_connection() {
        let s = plane().sample([0.1, 0.2, 0.3]).unwrap();
        let f = connection_forms(&s, &FrameField::Coordinate, FrameKind::Orthonormal(1.0)).unwrap();
        assert!(f.connection_forms.iter().flatten().flatten().all(|w| w.abs() < 1e-15));
        assert!(matches!(
            connection_forms(&s, &FrameField::Coordinate, FrameKind::PseudoOrthonormal),
            Err(HypersurfaceError::InvalidFrame { .. })
        ));
    }

    #[test]
    fn gauss_ricci_vanishes_for_zero_shape() {
        let g = Mat3::diag([-1.0, 1.0, 1.0]);
        assert_eq!(ricci_gauss(&Mat3::zero(), &g, 1.0, true), Mat3::zero());
        assert_eq!(ricci_gauss(&Mat3::zero(), &g, -1.0, false), Mat3::zero());
    }

    #[test]
    fn gauss_ricci_diagonal_components() {
        for eps in [1.0, -1.0] {
            let (a1, a2, a3) = (0.7, -1.3, 2.1);
            let g = Mat3::diag([-eps, 1.0, 1.0]);
            let a = Mat3::diag([a1, a2, a3]);
            let paper = ricci_gauss(&a, &g, eps, false);
            assert!((paper[0][0] + eps * a1 * (a2 + a3)).abs() < 1e-14);
            assert!((paper[1][1] - a2 * (a1 + a3)).abs() < 1e-14);
            assert!((paper[2][2] - a3 * (a1 + a2)).abs() < 1e-14);
        }
    }
}
