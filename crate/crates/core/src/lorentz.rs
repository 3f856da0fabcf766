//! Minkowski vectors, 3×3 matrices over indefinite tangent metrics, and the
//! canonical-form classification of shape operators.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::Scalar;
use crate::tolerances::{TAU_ALG, TAU_CLUSTER, TAU_DEGENERATE, TAU_RANK};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LorentzError {
    #[error("metric is singular (|det g| = {det:e})")]
    SingularMetric { det: f64 },
    #[error("endomorphism is not self-adjoint for g (asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },
    #[error("eigenvalue structure is ambiguous at this tolerance (annihilation residual {residual:e})")]
    AmbiguousClassification { residual: f64 },
}

/// A point or vector of Minkowski space with signature (−, +, +, +).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MinkVector(pub [f64; 4]);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalCharacter {
    Timelike,
    Spacelike,
    Null,
    Zero,
}

impl MinkVector {
    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self([x1, x2, x3, x4])
    }

    pub const fn zero() -> Self {
        Self([0.0; 4])
    }

    pub fn inner(&self, other: &MinkVector) -> f64 {
        mink_inner(self, other)
    }

    pub fn norm_sq(&self) -> f64 {
        mink_inner(self, self)
    }

    /// Largest absolute component; a Euclidean size for tolerances.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn causal_character(&self) -> CausalCharacter {
        causal_character(self)
    }
}

pub fn mink_inner(u: &MinkVector, v: &MinkVector) -> f64 {
    -u.0[0] * v.0[0] + u.0[1] * v.0[1] + u.0[2] * v.0[2] + u.0[3] * v.0[3]
}

/// Sign of `⟨u, u⟩`, with `|⟨u, u⟩| ≤ τ_alg·|u|²` (Euclidean) read as null.
pub fn causal_character(u: &MinkVector) -> CausalCharacter {
    let euclid: f64 = u.0.iter().map(|c| c * c).sum();
    if euclid == 0.0 {
        return CausalCharacter::Zero;
    }
    let q = u.norm_sq();
    if q.abs() <= TAU_ALG * euclid {
        CausalCharacter::Null
    } else if q < 0.0 {
        CausalCharacter::Timelike
    } else {
        CausalCharacter::Spacelike
    }
}

impl Add for MinkVector {
    type Output = MinkVector;
    fn add(self, rhs: MinkVector) -> MinkVector {
        MinkVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for MinkVector {
    type Output = MinkVector;
    fn sub(self, rhs: MinkVector) -> MinkVector {
        MinkVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for MinkVector {
    type Output = MinkVector;
    fn mul(self, rhs: f64) -> MinkVector {
        MinkVector(self.0.map(|c| c * rhs))
    }
}

impl Neg for MinkVector {
    type Output = MinkVector;
    fn neg(self) -> MinkVector {
        MinkVector(self.0.map(|c| -c))
    }
}

/// Dense 3×3 real matrix, row-major. Used for tangent metrics, shape
/// operators (column `j` holds the image of `∂ⱼ`), and symmetric tensors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Index<usize> for Mat3 {
    type Output = [f64; 3];
    fn index(&self, row: usize) -> &[f64; 3] {
        &self.0[row]
    }
}

impl IndexMut<usize> for Mat3 {
    fn index_mut(&mut self, row: usize) -> &mut [f64; 3] {
        &mut self.0[row]
    }
}

impl Mat3 {
    pub const fn zero() -> Self {
        Self([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub const fn diag(d: [f64; 3]) -> Self {
        Self([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: [[f64; 3]; 3]) -> Self {
        Self::from_fn(|i, j| cols[j][i])
    }

    pub fn column(&self, j: usize) -> [f64; 3] {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        det3(&self.0)
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Self(inverse3(&self.0)))
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|k| self.0[i][k] * v[k]).sum())
    }

    /// Bilinear form `xᵀ M y`.
    pub fn bilinear(&self, x: [f64; 3], y: [f64; 3]) -> f64 {
        let my = self.mul_vec(y);
        (0..3).map(|i| x[i] * my[i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `max |M − Mᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        (*self - self.transpose()).max_abs()
    }

    pub fn symmetrized(&self) -> Self {
        (*self + self.transpose()).scale(0.5)
    }

    /// The six independent entries `(i ≤ j)` of a symmetric matrix.
    pub fn upper_entries(&self) -> [f64; 6] {
        let m = &self.0;
        [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: f64) -> Mat3 {
        self.scale(rhs)
    }
}

pub fn det3<T: Scalar>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Adjugate over determinant. The caller is responsible for checking the
/// determinant first.
pub fn inverse3<T: Scalar>(m: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let d = det3(m);
    adj.map(|row| row.map(|x| x / d))
}

/// Solve `g y = rhs` for a symmetric (possibly indefinite) `g` by Gaussian
/// elimination with partial pivoting.
pub fn solve_indefinite(g: &Mat3, rhs: [f64; 3]) -> Result<[f64; 3], LorentzError> {
    let det = g.det();
    if det.abs() < TAU_DEGENERATE || !det.is_finite() {
        return Err(LorentzError::SingularMetric { det });
    }
    let mut m = g.0;
    let mut b = rhs;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut y = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * y[k]).sum();
        y[row] = (b[row] - tail) / m[row][row];
    }
    Ok(y)
}

/// Roots of the characteristic polynomial of a 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spectrum {
    /// Three real eigenvalues, ascending.
    Real([f64; 3]),
    /// One real eigenvalue and a conjugate pair `re ± i·im` with `im > 0`.
    Complex { real: f64, re: f64, im: f64 },
}

/// Coefficients `[c0, c1, c2]` of `det(tI − A) = t³ + c2 t² + c1 t + c0`.
pub fn characteristic_coefficients(a: &Mat3) -> [f64; 3] {
    let m = &a.0;
    let minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    [-a.det(), minors, -a.trace()]
}

fn cubic_eval(c: &[f64; 3], t: f64) -> (f64, f64) {
    let p = ((t + c[2]) * t + c[1]) * t + c[0];
    let dp = (3.0 * t + 2.0 * c[2]) * t + c[1];
    (p, dp)
}

fn newton_polish(c: &[f64; 3], mut t: f64) -> f64 {
    let (mut p, _) = cubic_eval(c, t);
    for _ in 0..4 {
        let (_, dp) = cubic_eval(c, t);
        if dp == 0.0 {
            break;
        }
        let next = t - p / dp;
        let (pn, _) = cubic_eval(c, next);
        if pn.abs() >= p.abs() {
            break;
        }
        t = next;
        p = pn;
    }
    t
}

/// Eigenvalues by the closed-form cubic, a Newton polish of one well
/// separated real root, and deflation to a quadratic.
pub fn eigenvalues(a: &Mat3) -> Spectrum {
    let c = characteristic_coefficients(a);
    let b = c[2];
    let p = c[1] - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c[1] / 3.0 + c[0];
    let shift = -b / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let first = if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-q / 2.0 - q.signum() * s).cbrt();
        let y = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        y + shift
    } else if p == 0.0 {
        shift
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        // take the trigonometric root where the derivative is largest
        (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .max_by(|x, y| {
                cubic_eval(&c, *x).1.abs().total_cmp(&cubic_eval(&c, *y).1.abs())
            })
            .unwrap_or(shift)
    };
    let r = newton_polish(&c, first);

    // t³ + c2 t² + c1 t + c0 = (t − r)(t² + e t + f)
    let e = c[2] + r;
    let f = c[1] + r * e;
    let half = -e / 2.0;
    let d = half * half - f;
    if d >= 0.0 {
        let s = d.sqrt();
        let big = if half >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { f / big } else { 0.0 };
        let mut roots = [r, big, small];
        roots.sort_by(f64::total_cmp);
        Spectrum::Real(roots)
    } else {
        Spectrum::Complex {
            real: r,
            re: half,
            im: (-d).sqrt(),
        }
    }
}

/// Monic polynomial, coefficients in ascending order of degree.
pub type Poly = Vec<f64>;

/// Expand `Π (t − rᵢ)`.
pub fn poly_from_roots(roots: &[f64]) -> Poly {
    let mut p = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        p = next;
    }
    p
}

/// Evaluate a polynomial at a matrix by Horner's rule.
pub fn poly_eval_matrix(p: &[f64], a: &Mat3) -> Mat3 {
    let mut acc = Mat3::zero();
    for &c in p.iter().rev() {
        acc = acc * *a + Mat3::identity().scale(c);
    }
    acc
}

/// Quotient and remainder of `num / den`, ascending coefficients.
pub fn poly_divrem(num: &[f64], den: &[f64]) -> (Poly, Poly) {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if num.len() <= dd {
        return (vec![0.0], rem);
    }
    let lead = den[dd];
    let mut quot = vec![0.0; num.len() - dd];
    for k in (0..quot.len()).rev() {
        let f = rem[k + dd] / lead;
        quot[k] = f;
        for (i, d) in den.iter().enumerate() {
            rem[k + i] -= f * d;
        }
    }
    rem.truncate(dd.max(1));
    (quot, rem)
}

/// Canonical shape of a self-adjoint endomorphism of a 3-dimensional
/// indefinite inner product space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormVariant {
    /// Real eigenvalues with an eigenbasis. A repeated value is listed
    /// first, otherwise ascending.
    Diagonalizable { a: [f64; 3] },
    /// `a1 ± i·b1` together with the real eigenvalue `a2`; `b1 > 0`.
    ComplexPair { a1: f64, b1: f64, a2: f64 },
    /// Two-step Jordan block for `a1`, plus `a2` (which may equal `a1`).
    Jordan2 { a1: f64, a2: f64 },
    /// Three-step Jordan block.
    Jordan3 { a1: f64 },
}

impl FormVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            FormVariant::Diagonalizable { .. } => "diagonalizable",
            FormVariant::ComplexPair { .. } => "complex_pair",
            FormVariant::Jordan2 { .. } => "jordan2",
            FormVariant::Jordan3 { .. } => "jordan3",
        }
    }

    /// Frame Gram matrix and the matrix of `A` in that frame (column `j` is
    /// the image of `eⱼ`). `epsilon` only matters for diagonalizable forms,
    /// where the frame is orthonormal with `g(e₁, e₁) = −ε`.
    pub fn frame_matrices(&self, epsilon: f64) -> (Mat3, Mat3) {
        let pseudo = Mat3([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        match *self {
            FormVariant::Diagonalizable { a } => (Mat3::diag([-epsilon, 1.0, 1.0]), Mat3::diag(a)),
            FormVariant::ComplexPair { a1, b1, a2 } => (
                Mat3::diag([-1.0, 1.0, 1.0]),
                Mat3([[a1, b1, 0.0], [-b1, a1, 0.0], [0.0, 0.0, a2]]),
            ),
            FormVariant::Jordan2 { a1, a2 } => {
                (pseudo, Mat3([[a1, 0.0, 0.0], [1.0, a1, 0.0], [0.0, 0.0, a2]]))
            }
            FormVariant::Jordan3 { a1 } => {
                (pseudo, Mat3([[a1, 0.0, 0.0], [0.0, a1, 1.0], [-1.0, 0.0, a1]]))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeOperatorForm {
    pub variant: FormVariant,
    /// Monic minimal polynomial, ascending coefficients.
    pub minimal_polynomial: Poly,
    /// `‖p(A)‖` for the accepted minimal polynomial, relative to `‖A‖^deg p`.
    pub annihilation_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyTolerances {
    pub self_adjoint: f64,
    pub rank: f64,
    pub cluster: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            self_adjoint: TAU_ALG,
            rank: TAU_RANK,
            cluster: TAU_CLUSTER,
        }
    }
}

struct Candidate {
    roots: Vec<f64>,
    variant: FormVariant,
}

fn scale_of(a: &Mat3) -> f64 {
    a.max_abs().max(1.0)
}

fn relative_residual(roots: &[f64], a: &Mat3, scale: f64) -> f64 {
    let mut acc = Mat3::identity();
    for &r in roots {
        acc = acc * (*a - Mat3::identity().scale(r));
    }
    acc.max_abs() / scale.powi(roots.len() as i32)
}

/// Candidate minimal polynomials in increasing degree, built from the
/// clustered spectrum. The last candidate is always the characteristic
/// polynomial.
fn candidates(a: &Mat3, cluster: f64) -> Vec<Candidate> {
    let scale = scale_of(a);
    let tol = cluster * scale;
    let tr = a.trace();
    let (lo, mid, hi, simple) = match eigenvalues(a) {
        Spectrum::Complex { real, re, im } if im > tol => {
            return vec![Candidate {
                roots: vec![real, re, re],
                variant: FormVariant::ComplexPair { a1: re, b1: im, a2: real },
            }];
        }
        // a nearly real pair is a split double root
        Spectrum::Complex { real, re, .. } => {
            let mut r = [real, re, re];
            r.sort_by(f64::total_cmp);
            (r[0], r[1], r[2], Some(real))
        }
        Spectrum::Real(r) => (r[0], r[1], r[2], None),
    };

    if hi - lo <= tol {
        let t = tr / 3.0;
        return vec![
            Candidate { roots: vec![t], variant: FormVariant::Diagonalizable { a: [t; 3] } },
            Candidate { roots: vec![t, t], variant: FormVariant::Jordan2 { a1: t, a2: t } },
            Candidate { roots: vec![t, t, t], variant: FormVariant::Jordan3 { a1: t } },
        ];
    }
    let pair = if let Some(s) = simple {
        Some(s)
    } else if mid - lo <= tol {
        Some(hi)
    } else if hi - mid <= tol {
        Some(lo)
    } else {
        None
    };
    match pair {
        Some(b) => {
            let d = (tr - b) / 2.0;
            vec![
                Candidate { roots: vec![d, b], variant: FormVariant::Diagonalizable { a: [d, d, b] } },
                Candidate { roots: vec![d, d, b], variant: FormVariant::Jordan2 { a1: d, a2: b } },
            ]
        }
        None => vec![Candidate {
            roots: vec![lo, mid, hi],
            variant: FormVariant::Diagonalizable { a: [lo, mid, hi] },
        }],
    }
}

/// Monic polynomial of least degree annihilating `a` to relative tolerance
/// `τ_rank`. Ascending coefficients.
pub fn minimal_polynomial(a: &Mat3) -> Poly {
    let scale = scale_of(a);
    let cands = candidates(a, TAU_CLUSTER);
    for cand in &cands {
        if relative_residual(&cand.roots, a, scale) <= TAU_RANK {
            return poly_from_roots(&cand.roots);
        }
    }
    let c = characteristic_coefficients(a);
    vec![c[0], c[1], c[2], 1.0]
}

pub fn classify_shape_operator(a: &Mat3, g: &Mat3) -> Result<ShapeOperatorForm, LorentzError> {
    classify_shape_operator_with(a, g, ClassifyTolerances::default())
}

/// Pointwise canonical form of `A` from its root structure and the lowest
/// degree annihilating polynomial. A candidate whose residual falls between
/// the rank and cluster tolerances cannot be accepted or rejected and yields
/// [`LorentzError::AmbiguousClassification`].
pub fn classify_shape_operator_with(
    a: &Mat3,
    g: &Mat3,
    tol: ClassifyTolerances,
) -> Result<ShapeOperatorForm, LorentzError> {
    let ga = *g * *a;
    let asymmetry = ga.asymmetry() / (g.max_abs() * scale_of(a)).max(1.0);
    if asymmetry > tol.self_adjoint {
        return Err(LorentzError::NotSelfAdjoint { asymmetry });
    }
    let scale = scale_of(a);
    let cands = candidates(a, tol.cluster);
    let last = cands.len() - 1;
    for (k, cand) in cands.into_iter().enumerate() {
        let residual = relative_residual(&cand.roots, a, scale);
        if residual <= tol.rank || k == last {
            let variant = match cand.variant {
                FormVariant::Diagonalizable { a } => FormVariant::Diagonalizable { a: order_diagonal(a) },
                v => v,
            };
            return Ok(ShapeOperatorForm {
                variant,
                minimal_polynomial: poly_from_roots(&cand.roots),
                annihilation_residual: residual,
            });
        }
        if residual < tol.cluster {
            return Err(LorentzError::AmbiguousClassification { residual });
        }
    }
    unreachable!("candidate list is never empty")
}

fn order_diagonal(mut a: [f64; 3]) -> [f64; 3] {
    a.sort_by(f64::total_cmp);
    if a[1] == a[2] && a[0] != a[1] {
        [a[1], a[2], a[0]]
    } else {
        a
    }
}

/// Matrices of `A` and `g` in chart coordinates for a canonical form whose
/// frame vectors are the columns of `basis`.
pub fn materialize(variant: &FormVariant, epsilon: f64, basis: &Mat3) -> Option<(Mat3, Mat3)> {
    let inv = basis.inverse()?;
    let (gram, af) = variant.frame_matrices(epsilon);
    let a = *basis * af * inv;
    let g = inv.transpose() * gram * inv;
    Some((a, g.symmetrized()))
}
