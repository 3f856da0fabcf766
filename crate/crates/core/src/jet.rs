//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor expansion of a scalar function of the three
//! chart parameters around an evaluation point, up to total degree 3. The 20
//! coefficients are kept densely in graded order, so every operation is a
//! fixed-size loop with no allocation.
//!
//! Derived quantities lose one order of validity per differentiation: a jet
//! obtained from [`Jet::partial`] has correct coefficients only up to degree 2.
//! Callers track that budget themselves; nothing in the arithmetic checks it.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

/// Number of chart parameters.
pub const NUM_VARS: usize = 3;
/// Highest total degree carried by a jet.
pub const MAX_DEGREE: usize = 3;
/// Number of stored coefficients, `C(3 + 3, 3)`.
pub const NUM_COEFFS: usize = 20;

const NUM_PRODUCT_TERMS: usize = 84;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("{op}: constant term {value} is outside the domain")]
    Domain { op: &'static str, value: f64 },
    #[error("multi-index {0:?} exceeds degree 3")]
    IndexOutOfRange([usize; 3]),
}

const fn build_multi_indices() -> [[u8; 3]; NUM_COEFFS] {
    let mut out = [[0u8; 3]; NUM_COEFFS];
    let mut n = 0;
    let mut deg = 0;
    while deg <= MAX_DEGREE {
        let mut i = deg as i32;
        while i >= 0 {
            let mut j = (deg as i32) - i;
            while j >= 0 {
                let k = deg as i32 - i - j;
                out[n] = [i as u8, j as u8, k as u8];
                n += 1;
                j -= 1;
            }
            i -= 1;
        }
        deg += 1;
    }
    out
}

/// Multi-indices in storage order: degree 0, then degree 1, and so on.
pub const MULTI_INDICES: [[u8; 3]; NUM_COEFFS] = build_multi_indices();

const fn find_index(m: [u8; 3]) -> usize {
    let mut n = 0;
    while n < NUM_COEFFS {
        let c = MULTI_INDICES[n];
        if c[0] == m[0] && c[1] == m[1] && c[2] == m[2] {
            return n;
        }
        n += 1;
    }
    usize::MAX
}

/// `(left, right, target)` slot triples of the truncated product, sorted by
/// target slot so recurrences can walk them in graded order.
const fn build_product_terms() -> [(u8, u8, u8); NUM_PRODUCT_TERMS] {
    let mut out = [(0u8, 0u8, 0u8); NUM_PRODUCT_TERMS];
    let mut n = 0;
    let mut target = 0;
    while target < NUM_COEFFS {
        let t = MULTI_INDICES[target];
        let mut left = 0;
        while left < NUM_COEFFS {
            let l = MULTI_INDICES[left];
            if l[0] <= t[0] && l[1] <= t[1] && l[2] <= t[2] {
                let r = [t[0] - l[0], t[1] - l[1], t[2] - l[2]];
                out[n] = (left as u8, find_index(r) as u8, target as u8);
                n += 1;
            }
            left += 1;
        }
        target += 1;
    }
    out
}

const PRODUCT_TERMS: [(u8, u8, u8); NUM_PRODUCT_TERMS] = build_product_terms();

/// Position of a multi-index in the coefficient array.
pub fn slot_of(multi_index: [usize; 3]) -> Result<usize, JetError> {
    if multi_index.iter().sum::<usize>() > MAX_DEGREE {
        return Err(JetError::IndexOutOfRange(multi_index));
    }
    let m = [
        multi_index[0] as u8,
        multi_index[1] as u8,
        multi_index[2] as u8,
    ];
    Ok(find_index(m))
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).product::<u32>() as f64
}

/// Degree-3 Taylor expansion of a scalar in the three chart parameters.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    coeffs: [f64; NUM_COEFFS],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("coeffs", &self.coeffs).finish()
    }
}

impl Default for Jet {
    fn default() -> Self {
        Self::zero()
    }
}

impl Jet {
    pub const fn zero() -> Self {
        Self {
            coeffs: [0.0; NUM_COEFFS],
        }
    }

    pub const fn constant(value: f64) -> Self {
        let mut coeffs = [0.0; NUM_COEFFS];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The coordinate function for chart slot `index` (0-based), expanded at
    /// `value`.
    pub fn variable(index: usize, value: f64) -> Self {
        assert!(index < NUM_VARS, "jet variable slot {index} out of range");
        let mut jet = Self::constant(value);
        jet.coeffs[1 + index] = 1.0;
        jet
    }

    pub fn from_coeffs(coeffs: [f64; NUM_COEFFS]) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64; NUM_COEFFS] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficient of the monomial `u^i v^j w^k`.
    pub fn coeff(&self, multi_index: [usize; 3]) -> Result<f64, JetError> {
        Ok(self.coeffs[slot_of(multi_index)?])
    }

    /// The partial derivative `∂^{i+j+k} / ∂u^i ∂v^j ∂w^k` at the expansion
    /// point.
    pub fn derivative(&self, multi_index: [usize; 3]) -> Result<f64, JetError> {
        let slot = slot_of(multi_index)?;
        let m = MULTI_INDICES[slot];
        Ok(self.coeffs[slot] * factorial(m[0]) * factorial(m[1]) * factorial(m[2]))
    }

    /// First partial derivative along chart slot `index`.
    pub fn d1(&self, index: usize) -> f64 {
        self.coeffs[1 + index]
    }

    pub fn gradient(&self) -> [f64; 3] {
        [self.coeffs[1], self.coeffs[2], self.coeffs[3]]
    }

    /// Jet of `∂f/∂u_index`. Valid only up to degree 2: the top-degree
    /// coefficients would need degree-4 data and are left at zero.
    pub fn partial(&self, index: usize) -> Jet {
        let mut out = Jet::zero();
        for (slot, m) in MULTI_INDICES.iter().enumerate() {
            if m[index] == 0 {
                continue;
            }
            let mut lower = *m;
            lower[index] -= 1;
            if (lower[0] + lower[1] + lower[2]) as usize >= MAX_DEGREE {
                continue;
            }
            out.coeffs[find_index(lower)] = self.coeffs[slot] * m[index] as f64;
        }
        out
    }

    /// True when every coefficient above the constant term is zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == 0.0)
    }

    /// `f(self)` given `f` and its first three derivatives at the constant
    /// term, via the nilpotent expansion `f(a0 + δ) = Σ f⁽ⁿ⁾(a0) δⁿ / n!`.
    pub fn compose(&self, f: [f64; 4]) -> Jet {
        let mut delta = *self;
        delta.coeffs[0] = 0.0;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let mut out = delta * f[1] + d2 * (f[2] / 2.0) + d3 * (f[3] / 6.0);
        out.coeffs[0] = f[0];
        out
    }

    /// Quotient by Taylor recurrence: `c_m = (a_m - Σ b_p c_q) / b_0`.
    fn div_recurrence(&self, rhs: &Jet) -> Jet {
        let b0 = rhs.coeffs[0];
        let mut out = Jet::zero();
        let mut acc = self.coeffs;
        let mut t = 0;
        for (target, acc_target) in acc.iter_mut().enumerate() {
            while t < NUM_PRODUCT_TERMS && PRODUCT_TERMS[t].2 as usize == target {
                let (l, r, _) = PRODUCT_TERMS[t];
                if l != 0 {
                    *acc_target -= rhs.coeffs[l as usize] * out.coeffs[r as usize];
                }
                t += 1;
            }
            out.coeffs[target] = *acc_target / b0;
        }
        out
    }

    pub fn try_div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        let b0 = rhs.coeffs[0];
        if b0 == 0.0 || !b0.is_finite() {
            return Err(JetError::Domain { op: "div", value: b0 });
        }
        Ok(self.div_recurrence(rhs))
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0).div_recurrence(self)
    }

    /// Square root by the recurrence `2 s_0 s_m = a_m - Σ' s_p s_q`.
    pub fn try_sqrt(&self) -> Result<Jet, JetError> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 || !a0.is_finite() {
            return Err(JetError::Domain {
                op: "sqrt",
                value: a0,
            });
        }
        let s0 = a0.sqrt();
        let mut out = Jet::constant(s0);
        let mut acc = self.coeffs;
        let mut t = 0;
        for target in 0..NUM_COEFFS {
            while t < NUM_PRODUCT_TERMS && PRODUCT_TERMS[t].2 as usize == target {
                let (l, r, _) = PRODUCT_TERMS[t];
                if l != 0 && r != 0 {
                    acc[target] -= out.coeffs[l as usize] * out.coeffs[r as usize];
                }
                t += 1;
            }
            if target > 0 {
                out.coeffs[target] = acc[target] / (2.0 * s0);
            }
        }
        Ok(out)
    }

    /// Square root without the domain check; a nonpositive constant term
    /// yields NaN coefficients.
    pub fn sqrt(&self) -> Jet {
        self.try_sqrt().unwrap_or_else(|_| Jet::constant(f64::NAN) + *self * f64::NAN)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tan(&self) -> Jet {
        self.sin() / self.cos()
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose([c, s, c, s])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e; 4])
    }

    pub fn try_ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Domain { op: "ln", value: a });
        }
        Ok(self.compose([a.ln(), 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a)]))
    }

    pub fn powi(&self, n: i32) -> Jet {
        let mut base = if n < 0 { self.recip() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Jet::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Real power with a constant exponent. Integer exponents go through
    /// [`Jet::powi`] and accept any base.
    pub fn try_powf(&self, p: f64) -> Result<Jet, JetError> {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            if p < 0.0 && self.value() == 0.0 {
                return Err(JetError::Domain {
                    op: "pow",
                    value: 0.0,
                });
            }
            return Ok(self.powi(p as i32));
        }
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Domain { op: "pow", value: a });
        }
        Ok(self.compose([
            a.powf(p),
            p * a.powf(p - 1.0),
            p * (p - 1.0) * a.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * a.powf(p - 3.0),
        ]))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self += rhs;
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for c in self.coeffs.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = Jet::zero();
        for &(l, r, t) in PRODUCT_TERMS.iter() {
            out.coeffs[t as usize] += self.coeffs[l as usize] * rhs.coeffs[r as usize];
        }
        out
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.div_recurrence(&rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for c in self.coeffs.iter_mut() {
            *c *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl From<f64> for Jet {
    fn from(value: f64) -> Self {
        Jet::constant(value)
    }
}

/// Field-like operations shared by `f64` and [`Jet`], so small dense linear
/// algebra can be written once for both.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(value: f64) -> Self;
    /// The plain value (constant term for jets).
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(value: f64) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Scalar for Jet {
    fn from_f64(value: f64) -> Self {
        Jet::constant(value)
    }
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
}

/// An immersed point carried as four coordinate jets.
pub type JetPoint4 = [Jet; 4];

/// The three chart coordinate functions expanded at `point`.
pub fn chart_variables(point: [f64; 3]) -> [Jet; 3] {
    [
        Jet::variable(0, point[0]),
        Jet::variable(1, point[1]),
        Jet::variable(2, point[2]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn tables_are_consistent() {
        assert_eq!(MULTI_INDICES[0], [0, 0, 0]);
        assert_eq!(MULTI_INDICES[1], [1, 0, 0]);
        assert_eq!(MULTI_INDICES[3], [0, 0, 1]);
        for (n, m) in MULTI_INDICES.iter().enumerate() {
            assert_eq!(find_index(*m), n);
        }
        for &(l, r, t) in PRODUCT_TERMS.iter() {
            let (l, r, t) = (MULTI_INDICES[l as usize], MULTI_INDICES[r as usize], MULTI_INDICES[t as usize]);
            for a in 0..3 {
                assert_eq!(l[a] + r[a], t[a]);
            }
        }
    }

    #[test]
    fn variable_layout() {
        let x = Jet::variable(0, 2.0);
        assert_eq!(x.value(), 2.0);
        assert_eq!(x.derivative([1, 0, 0]).unwrap(), 1.0);
        assert!(x.coeffs()[2..].iter().all(|c| *c == 0.0));
        let sum = Jet::variable(0, 0.5) + Jet::variable(1, 1.25);
        assert_eq!(sum.value(), 1.75);
        let prod = Jet::variable(0, 0.0) * Jet::variable(1, 0.0);
        assert_eq!(prod.coeff([1, 1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn maclaurin_sine() {
        let s = Jet::variable(0, 0.0).sin();
        assert_eq!(s.coeff([1, 0, 0]).unwrap(), 1.0);
        assert_eq!(s.coeff([2, 0, 0]).unwrap(), 0.0);
        assert!(close(s.coeff([3, 0, 0]).unwrap(), -1.0 / 6.0, 1e-15));
    }

    #[test]
    fn sqrt_at_four() {
        let s = Jet::variable(1, 4.0).try_sqrt().unwrap();
        assert_eq!(s.value(), 2.0);
        assert_eq!(s.derivative([0, 1, 0]).unwrap(), 0.25);
        assert_eq!(s.derivative([1, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn second_derivative_of_square() {
        let u = Jet::variable(0, 0.7);
        assert_eq!((u * u).derivative([2, 0, 0]).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors() {
        let zero = Jet::variable(0, 0.0);
        assert!(matches!(Jet::constant(1.0).try_div(&zero), Err(JetError::Domain { .. })));
        assert!(matches!(Jet::constant(-1.0).try_sqrt(), Err(JetError::Domain { .. })));
        assert!(matches!(zero.try_sqrt(), Err(JetError::Domain { .. })));
        assert!(matches!(
            Jet::constant(1.0).derivative([2, 2, 0]),
            Err(JetError::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn hyperbolic_identity() {
        for &(a, b) in &[(0.3, -1.2), (2.0, 0.5), (-0.7, 0.9)] {
            let t = Jet::variable(0, a) * 1.5 + Jet::variable(2, b) * Jet::variable(1, 0.2);
            let id = t.cosh() * t.cosh() - t.sinh() * t.sinh();
            assert!((id.value() - 1.0).abs() < 1e-12);
            assert!(id.coeffs()[1..].iter().all(|c| c.abs() < 1e-11));
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Jet::variable(0, 0.4).exp() + Jet::variable(1, 1.1) * Jet::variable(2, -0.3);
        let b = Jet::variable(1, 1.1).cos() + 2.0;
        let q = (a * b) / b;
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-13);
        }
        let r = b.recip() * b;
        assert!((r.value() - 1.0).abs() < 1e-15);
        assert!(r.coeffs()[1..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn partial_shifts_coefficients() {
        // f = u^2 v + w^3 ; ∂f/∂u = 2uv
        let (u, v, w) = (Jet::variable(0, 0.5), Jet::variable(1, -1.0), Jet::variable(2, 2.0));
        let f = u * u * v + w * w * w;
        let fu = f.partial(0);
        assert!(close(fu.value(), 2.0 * 0.5 * -1.0, 1e-15));
        assert!(close(fu.derivative([1, 0, 0]).unwrap(), -2.0, 1e-15));
        assert!(close(fu.derivative([0, 1, 0]).unwrap(), 1.0, 1e-15));
        assert!(close(fu.derivative([1, 1, 0]).unwrap(), 2.0, 1e-15));
        let fw = f.partial(2);
        assert!(close(fw.value(), 12.0, 1e-15));
        assert!(close(fw.derivative([0, 0, 2]).unwrap(), 6.0, 1e-15));
    }

    #[test]
    fn powers() {
        let x = Jet::variable(0, 1.5);
        let p = x.powi(3);
        assert!(close(p.derivative([3, 0, 0]).unwrap(), 6.0, 1e-14));
        let q = x.try_powf(0.5).unwrap();
        let s = x.try_sqrt().unwrap();
        for (a, b) in q.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
        let inv = x.powi(-2) * x * x;
        assert!((inv.value() - 1.0).abs() < 1e-15);
    }
}
