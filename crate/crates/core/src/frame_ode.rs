//! Pseudo-orthonormal frames along a null curve and the ruled hypersurfaces
//! built from them.
//!
//! The curve satisfies `α' = X` and the frame evolves by
//!
//! ```text
//! X' = −B Z,   Y' = a Z,   Z' = a X − B Y,   W' = 0
//! ```
//!
//! Every pairing of `{X, Y, Z, W}` has zero derivative under these equations,
//! so the Gram relations `<X,Y> = −1`, `<Z,Z> = <W,W> = 1` (others zero) hold
//! for all `s` once they hold at `s = 0`. With this sign of `a` in `Z'` the
//! field `−a u Y − √(1 − a²v²) Z − a v W` is normal to
//! `α + uY + vW + (√(1/a² − v²) − 1/a) Z`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypersurface::{Construction, HypersurfaceError, Immersion};
use crate::jet::Jet;
use crate::lorentz::MinkVector;
use crate::tolerances::TAU_FRAME;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("Gram drift {drift:e} exceeds the frame tolerance")]
    StepTooLarge { drift: f64 },
    #[error("s = {s} is outside the integration window {window:?}")]
    WindowExceeded { s: f64, window: [f64; 2] },
    #[error("invalid frame specification: {0}")]
    InvalidSpec(String),
}

impl From<FrameError> for HypersurfaceError {
    fn from(e: FrameError) -> Self {
        HypersurfaceError::Evaluation(e.to_string())
    }
}

/// Curve point and frame at parameter `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub s: f64,
    pub alpha: MinkVector,
    pub x: MinkVector,
    pub y: MinkVector,
    pub z: MinkVector,
    pub w: MinkVector,
}

type Packed = [f64; 20];

impl FrameState {
    /// `X = (1,1,0,0)`, `Y = (½,−½,0,0)`, `Z = e₃`, `W = e₄`.
    pub fn standard(alpha0: MinkVector) -> Self {
        Self {
            s: 0.0,
            alpha: alpha0,
            x: MinkVector::new(1.0, 1.0, 0.0, 0.0),
            y: MinkVector::new(0.5, -0.5, 0.0, 0.0),
            z: MinkVector::new(0.0, 0.0, 1.0, 0.0),
            w: MinkVector::new(0.0, 0.0, 0.0, 1.0),
        }
    }

    fn pack(&self) -> Packed {
        let mut p = [0.0; 20];
        for (k, v) in [self.alpha, self.x, self.y, self.z, self.w].iter().enumerate() {
            p[4 * k..4 * k + 4].copy_from_slice(&v.0);
        }
        p
    }

    fn unpack(s: f64, p: &Packed) -> Self {
        let v = |k: usize| MinkVector([p[4 * k], p[4 * k + 1], p[4 * k + 2], p[4 * k + 3]]);
        Self {
            s,
            alpha: v(0),
            x: v(1),
            y: v(2),
            z: v(3),
            w: v(4),
        }
    }

    /// Largest componentwise difference from `other`.
    pub fn max_diff(&self, other: &FrameState) -> f64 {
        let (a, b) = (self.pack(), other.pack());
        (0..20).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
    }

    /// Largest deviation of the frame from the pseudo-orthonormal Gram
    /// relations.
    pub fn gram_drift(&self) -> f64 {
        let f = [self.x, self.y, self.z, self.w];
        let expect = [
            [0.0, -1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in i..4 {
                worst = worst.max((f[i].inner(&f[j]) - expect[i][j]).abs());
            }
        }
        worst
    }
}

/// `B(s) = b0 + b1·sin s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BProfile {
    pub b0: f64,
    pub b1: f64,
}

impl BProfile {
    pub const fn constant(b: f64) -> Self {
        Self { b0: b, b1: 0.0 }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.b0 + self.b1 * s.sin()
    }

    /// Taylor coefficients of `B` at `s` up to degree 3.
    pub fn taylor(&self, s: f64) -> [f64; 4] {
        let (sn, cs) = s.sin_cos();
        [
            self.b0 + self.b1 * sn,
            self.b1 * cs,
            -self.b1 * sn / 2.0,
            -self.b1 * cs / 6.0,
        ]
    }

    pub fn label(&self) -> String {
        if self.b1 == 0.0 {
            format!("{}", self.b0)
        } else {
            format!("{} + {}*sin(s)", self.b0, self.b1)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameODESpec {
    pub a: f64,
    pub b: BProfile,
    pub initial: FrameState,
    pub window: [f64; 2],
    pub step: f64,
}

impl FrameODESpec {
    pub fn new(a: f64, b: BProfile) -> Self {
        Self {
            a,
            b,
            initial: FrameState::standard(MinkVector::zero()),
            window: [-1.0, 1.0],
            step: 1e-3,
        }
    }

    pub fn with_alpha0(mut self, alpha0: MinkVector) -> Self {
        self.initial.alpha = alpha0;
        self
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if !(self.step > 0.0) {
            return Err(FrameError::InvalidSpec(format!("step must be positive, got {}", self.step)));
        }
        let [lo, hi] = self.window;
        if !(lo <= 0.0 && 0.0 <= hi) {
            return Err(FrameError::InvalidSpec("window must contain s = 0".into()));
        }
        let values: Vec<f64> = (0..=1000).map(|k| self.b.eval(lo + (hi - lo) * k as f64 / 1000.0)).collect();
        let min_b = values.iter().fold(f64::INFINITY, |m, b| m.min(b.abs()));
        let sign_change = values.windows(2).any(|w| w[0].signum() != w[1].signum());
        if min_b < 1e-9 || sign_change {
            return Err(FrameError::InvalidSpec("B(s) vanishes on the window".into()));
        }
        if self.initial.gram_drift() > TAU_FRAME {
            return Err(FrameError::InvalidSpec("initial frame violates the Gram relations".into()));
        }
        Ok(())
    }
}

/// Right-hand side of the closed frame system at `(s, state)`.
pub fn closed_frame_system(spec: &FrameODESpec, s: f64, state: &FrameState) -> FrameState {
    let p = rhs(spec.a, spec.b.eval(s), &state.pack());
    FrameState::unpack(s, &p)
}

fn rhs(a: f64, b: f64, p: &Packed) -> Packed {
    let mut out = [0.0; 20];
    for c in 0..4 {
        let (x, y, z) = (p[4 + c], p[8 + c], p[12 + c]);
        out[c] = x;
        out[4 + c] = -b * z;
        out[8 + c] = a * z;
        out[12 + c] = a * x - b * y;
    }
    out
}

fn rk4_step(spec: &FrameODESpec, s: f64, p: &Packed, h: f64) -> Packed {
    let f = |s: f64, p: &Packed| rhs(spec.a, spec.b.eval(s), p);
    let axpy = |p: &Packed, k: &Packed, c: f64| -> Packed { std::array::from_fn(|i| p[i] + c * k[i]) };
    let k1 = f(s, p);
    let k2 = f(s + h / 2.0, &axpy(p, &k1, h / 2.0));
    let k3 = f(s + h / 2.0, &axpy(p, &k2, h / 2.0));
    let k4 = f(s + h, &axpy(p, &k3, h));
    std::array::from_fn(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn check_window(spec: &FrameODESpec, s: f64) -> Result<(), FrameError> {
    let [lo, hi] = spec.window;
    let slack = 1e-12 * (hi - lo).max(1.0);
    if s < lo - slack || s > hi + slack {
        return Err(FrameError::WindowExceeded { s, window: spec.window });
    }
    Ok(())
}

/// Classical RK4 from `s = 0` to `s` in equal steps no longer than `step`,
/// without any drift check.
pub fn rk4_solve(spec: &FrameODESpec, s: f64, step: f64) -> Result<FrameState, FrameError> {
    if !(step > 0.0) {
        return Err(FrameError::InvalidSpec(format!("step must be positive, got {step}")));
    }
    check_window(spec, s)?;
    let n = (s.abs() / step).ceil() as usize;
    let mut p = spec.initial.pack();
    if n > 0 {
        let h = s / n as f64;
        for k in 0..n {
            p = rk4_step(spec, k as f64 * h, &p, h);
        }
    }
    Ok(FrameState::unpack(s, &p))
}

/// [`rk4_solve`] followed by the Gram drift check. Returns the state with
/// its drift.
pub fn integrate_frame(spec: &FrameODESpec, s: f64, step: f64) -> Result<(FrameState, f64), FrameError> {
    let state = rk4_solve(spec, s, step)?;
    let drift = state.gram_drift();
    if drift > TAU_FRAME {
        return Err(FrameError::StepTooLarge { drift });
    }
    Ok((state, drift))
}

/// Observed order of the integrator at `s` from three runs with steps
/// `h`, `h/2`, `h/4`: `log₂(|S_h − S_{h/2}| / |S_{h/2} − S_{h/4}|)`.
pub fn observed_order(spec: &FrameODESpec, s: f64, h: f64) -> Result<f64, FrameError> {
    let a = rk4_solve(spec, s, h)?;
    let b = rk4_solve(spec, s, h / 2.0)?;
    let c = rk4_solve(spec, s, h / 4.0)?;
    Ok((a.max_diff(&b) / b.max_diff(&c)).log2())
}

/// States on a uniform node grid covering the window, with exact
/// s-Taylor coefficients recovered from the ODE at any point in between.
#[derive(Clone, Debug)]
pub struct FrameTable {
    spec: FrameODESpec,
    /// Nodes at `s = (k − offset)·step`.
    nodes: Vec<Packed>,
    offset: usize,
    pub max_drift: f64,
}

impl FrameTable {
    pub fn build(spec: FrameODESpec) -> Result<Self, FrameError> {
        spec.validate()?;
        let h = spec.step;
        let back = (-spec.window[0] / h).ceil() as usize;
        let fwd = (spec.window[1] / h).ceil() as usize;
        let mut nodes = vec![[0.0; 20]; back + fwd + 1];
        nodes[back] = spec.initial.pack();
        for k in 0..fwd {
            nodes[back + k + 1] = rk4_step(&spec, k as f64 * h, &nodes[back + k], h);
        }
        for k in 0..back {
            let i = back - k;
            nodes[i - 1] = rk4_step(&spec, -(k as f64) * h, &nodes[i], -h);
        }
        let max_drift = nodes
            .iter()
            .enumerate()
            .map(|(k, p)| FrameState::unpack((k as f64 - back as f64) * h, p).gram_drift())
            .fold(0.0, f64::max);
        if max_drift > TAU_FRAME {
            return Err(FrameError::StepTooLarge { drift: max_drift });
        }
        Ok(Self {
            spec,
            nodes,
            offset: back,
            max_drift,
        })
    }

    pub fn spec(&self) -> &FrameODESpec {
        &self.spec
    }

    pub fn state(&self, s: f64) -> Result<FrameState, FrameError> {
        Ok(FrameState::unpack(s, &self.packed(s)?))
    }

    fn packed(&self, s: f64) -> Result<Packed, FrameError> {
        check_window(&self.spec, s)?;
        let h = self.spec.step;
        let k = ((s / h).round() as i64 + self.offset as i64).clamp(0, self.nodes.len() as i64 - 1) as usize;
        let sk = (k as f64 - self.offset as f64) * h;
        if s == sk {
            return Ok(self.nodes[k]);
        }
        Ok(rk4_step(&self.spec, sk, &self.nodes[k], s - sk))
    }

    /// Taylor coefficients `S₀..S₃` of the packed state at `s`, from
    /// `S_{n+1} = (1/(n+1)) [M S]_n`.
    fn taylor(&self, s: f64) -> Result<[Packed; 4], FrameError> {
        let a = self.spec.a;
        let bt = self.spec.b.taylor(s);
        let mut out = [[0.0; 20]; 4];
        out[0] = self.packed(s)?;
        for n in 0..3 {
            let mut next = [0.0; 20];
            for c in 0..4 {
                let sn = &out[n];
                next[c] += sn[4 + c];
                next[8 + c] += a * sn[12 + c];
                next[12 + c] += a * sn[4 + c];
                for m in 0..=n {
                    let sm = &out[n - m];
                    next[4 + c] -= bt[m] * sm[12 + c];
                    next[12 + c] -= bt[m] * sm[8 + c];
                }
            }
            out[n + 1] = next.map(|v| v / (n + 1) as f64);
        }
        Ok(out)
    }

    /// The curve and frame as jets in the chart variable `s`.
    pub fn jets(&self, s: &Jet) -> Result<[[Jet; 4]; 5], FrameError> {
        let t = self.taylor(s.value())?;
        Ok(std::array::from_fn(|v| {
            std::array::from_fn(|c| {
                let i = 4 * v + c;
                s.compose([t[0][i], t[1][i], 2.0 * t[2][i], 6.0 * t[3][i]])
            })
        }))
    }
}

/// `x(s,u,v) = α(s) + u Y(s) + v W(s) + (√(1/a² − v²) − 1/a) Z(s)`.
pub fn build_generalized_umbilical(spec: FrameODESpec) -> Result<Immersion, FrameError> {
    if spec.a == 0.0 {
        return Err(FrameError::InvalidSpec("the umbilical construction needs a ≠ 0".into()));
    }
    let table = FrameTable::build(spec)?;
    let a = spec.a;
    let vmax = (1.0 - 1e-2) / a.abs();
    let domain = [spec.window, [-1.0, 1.0], [-vmax, vmax]];
    let name = format!("generalized_umbilical(a={a}, B={})", spec.b.label());
    Ok(Immersion::new(name, domain, move |v| {
        let [alpha, _x, y, z, w] = table.jets(&v[0])?;
        let (u, t) = (v[1], v[2]);
        let root = (Jet::constant(1.0 / (a * a)) - t * t).try_sqrt()? - 1.0 / a;
        Ok(std::array::from_fn(|c| alpha[c] + u * y[c] + t * w[c] + root * z[c]))
    })
    .with_construction(Construction::Integrated))
}

/// `x(s,u,v) = α(s) + u Y(s) + v W(s)` for a frame with `a = 0`.
pub fn build_generalized_cylinder_i(spec: FrameODESpec) -> Result<Immersion, FrameError> {
    if spec.a != 0.0 {
        return Err(FrameError::InvalidSpec("the type I cylinder needs a = 0".into()));
    }
    let table = FrameTable::build(spec)?;
    let domain = [spec.window, [-1.0, 1.0], [-1.0, 1.0]];
    let name = format!("generalized_cylinder_i(B={})", spec.b.label());
    Ok(Immersion::new(name, domain, move |v| {
        let [alpha, _x, y, _z, w] = table.jets(&v[0])?;
        let (u, t) = (v[1], v[2]);
        Ok(std::array::from_fn(|c| alpha[c] + u * y[c] + t * w[c]))
    })
    .with_construction(Construction::Integrated))
}
