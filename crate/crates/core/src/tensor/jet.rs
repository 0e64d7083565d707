//! Truncated Taylor arithmetic.
//!
//! [`Jet2`] carries a value together with its exact gradient and Hessian with
//! respect to the base coordinates. [`Dual`] is the first-order counterpart,
//! used where a quantity built from first derivatives must itself be
//! differentiated once more (spin connection derivatives, transformed
//! connections, divergence of the field strength).
//!
//! Both types store gradients in fixed arrays of length [`MAX_DIM`]; the
//! active dimension is a property of the surrounding computation, unused
//! slots stay zero.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest base dimension supported by the jet types.
pub const MAX_DIM: usize = 5;

/// Scalar arithmetic shared by `f64` and [`Dual`], so linear-algebra and
/// connection formulas can be written once and differentiated on demand.
pub trait Scalar:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn scale(self, k: f64) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }
    fn one() -> Self {
        Self::constant(1.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Value plus gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
}

impl Dual {
    pub fn new(value: f64, grad: [f64; MAX_DIM]) -> Self {
        Self { value, grad }
    }

    pub fn constant(value: f64) -> Self {
        Self { value, grad: [0.0; MAX_DIM] }
    }

    /// Builds a dual from a value and a slice of partials (missing slots are zero).
    pub fn from_parts(value: f64, partials: &[f64]) -> Self {
        let mut grad = [0.0; MAX_DIM];
        grad[..partials.len()].copy_from_slice(partials);
        Self { value, grad }
    }

    #[inline]
    fn chain(self, f: f64, df: f64) -> Self {
        let mut grad = self.grad;
        for g in &mut grad {
            *g *= df;
        }
        Self { value: f, grad }
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r)
    }
}

impl Scalar for Dual {
    #[inline]
    fn constant(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.value
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self.chain(self.value * k, k)
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, rhs: Dual) -> Dual {
        self += rhs;
        self
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Dual) {
        self.value += rhs.value;
        for k in 0..MAX_DIM {
            self.grad[k] += rhs.grad[k];
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, rhs: Dual) -> Dual {
        self -= rhs;
        self
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, rhs: Dual) {
        self.value -= rhs.value;
        for k in 0..MAX_DIM {
            self.grad[k] -= rhs.grad[k];
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        self.scale(-1.0)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        let mut grad = [0.0; MAX_DIM];
        for k in 0..MAX_DIM {
            grad[k] = self.grad[k] * rhs.value + self.value * rhs.grad[k];
        }
        Dual { value: self.value * rhs.value, grad }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        self * rhs.recip()
    }
}

/// Value, gradient and Hessian of a scalar with respect to the base coordinates.
///
/// The Hessian is stored in full but every operation writes the upper
/// triangle and mirrors it, so it is symmetric bit for bit.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hess)
            .finish()
    }
}

impl Default for Jet2 {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl Jet2 {
    pub const fn constant(value: f64) -> Self {
        Self { value, grad: [0.0; MAX_DIM], hess: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    /// The coordinate function `x^index` at the given value.
    pub fn variable(value: f64, index: usize) -> Self {
        assert!(index < MAX_DIM, "coordinate index {index} exceeds MAX_DIM");
        let mut j = Self::constant(value);
        j.grad[index] = 1.0;
        j
    }

    /// First-order part.
    pub fn dual(&self) -> Dual {
        Dual { value: self.value, grad: self.grad }
    }

    /// Partial derivative `∂_k` as a first-order quantity.
    pub fn partial(&self, k: usize) -> Dual {
        Dual { value: self.grad[k], grad: self.hess[k] }
    }

    /// Applies `f` with derivatives `df`, `d2f` at the current value.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..MAX_DIM {
            out.grad[i] = df * self.grad[i];
        }
        for i in 0..MAX_DIM {
            for j in i..MAX_DIM {
                let h = df * self.hess[i][j] + d2f * self.grad[i] * self.grad[j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        self.chain(self.value * k, k, 0.0)
    }

    pub fn recip(&self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    /// Integer power by the chain rule (exact at zero for n ≥ 2).
    pub fn powi(&self, n: i32) -> Self {
        let v = self.value;
        let nf = n as f64;
        let d = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
        let d2 = if n == 0 || n == 1 { 0.0 } else { nf * (nf - 1.0) * v.powi(n - 2) };
        self.chain(v.powi(n), d, d2)
    }

    /// Real power for positive bases.
    pub fn powf(&self, p: f64) -> Self {
        let v = self.value;
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    /// `self^other` with both sides varying; requires a positive base.
    pub fn pow(&self, other: &Jet2) -> Self {
        (self.ln() * *other).exp()
    }
}

impl Scalar for Jet2 {
    #[inline]
    fn constant(v: f64) -> Self {
        Jet2::constant(v)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.value
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        Jet2::scale(&self, k)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self += rhs;
        self
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, rhs: Jet2) {
        self.value += rhs.value;
        for i in 0..MAX_DIM {
            self.grad[i] += rhs.grad[i];
            for j in 0..MAX_DIM {
                self.hess[i][j] += rhs.hess[i][j];
            }
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: Jet2) -> Jet2 {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet2 {
    fn sub_assign(&mut self, rhs: Jet2) {
        self.value -= rhs.value;
        for i in 0..MAX_DIM {
            self.grad[i] -= rhs.grad[i];
            for j in 0..MAX_DIM {
                self.hess[i][j] -= rhs.hess[i][j];
            }
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let (a, b) = (&self, &rhs);
        let mut out = Jet2::constant(a.value * b.value);
        for i in 0..MAX_DIM {
            out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
        }
        for i in 0..MAX_DIM {
            for j in i..MAX_DIM {
                let h = a.hess[i][j] * b.value
                    + a.value * b.hess[i][j]
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }
}

impl MulAssign for Jet2 {
    fn mul_assign(&mut self, rhs: Jet2) {
        *self = *self * rhs;
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

/// Seeds the coordinate functions at `point`: value `x^i`, unit gradient, zero Hessian.
pub fn jet_seed(point: &[f64]) -> Vec<Jet2> {
    assert!(point.len() <= MAX_DIM, "at most {MAX_DIM} coordinates are supported");
    point.iter().enumerate().map(|(i, &x)| Jet2::variable(x, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_coordinate_functions() {
        let seeds = jet_seed(&[0.0; 4]);
        for (i, s) in seeds.iter().enumerate() {
            assert_eq!(s.value, 0.0);
            for k in 0..MAX_DIM {
                assert_eq!(s.grad[k], if k == i { 1.0 } else { 0.0 });
                assert!(s.hess[k].iter().all(|&h| h == 0.0));
            }
        }
    }

    #[test]
    fn product_rule() {
        let x = jet_seed(&[2.0, 3.0, 0.0, 0.0]);
        let f = x[0] * x[1];
        assert_eq!(f.value, 6.0);
        assert_eq!(f.grad[0], 3.0);
        assert_eq!(f.grad[1], 2.0);
        assert_eq!(f.hess[0][1], 1.0);
        assert_eq!(f.hess[1][0], 1.0);
        assert_eq!(f.hess[0][0], 0.0);
    }

    #[test]
    fn sine_taylor_coefficients() {
        let x = jet_seed(&[0.0, 0.0, 0.0, 0.0]);
        let f = x[0].sin();
        assert_eq!(f.value, 0.0);
        assert_eq!(f.grad[0], 1.0);
        assert_eq!(f.hess[0][0], 0.0);
    }

    #[test]
    fn quotient_matches_closed_form() {
        // f = x/y at (1, 2): f_x = 1/2, f_y = -1/4, f_xy = -1/4, f_yy = 1/4
        let x = jet_seed(&[1.0, 2.0]);
        let f = x[0] / x[1];
        assert!((f.grad[0] - 0.5).abs() < 1e-15);
        assert!((f.grad[1] + 0.25).abs() < 1e-15);
        assert!((f.hess[0][1] + 0.25).abs() < 1e-15);
        assert!((f.hess[1][1] - 0.25).abs() < 1e-15);
        assert_eq!(f.hess[0][0], 0.0);
    }

    #[test]
    fn dual_product_and_quotient() {
        let a = Dual::from_parts(3.0, &[1.0, 0.0]);
        let b = Dual::from_parts(2.0, &[0.0, 1.0]);
        let q = a / b;
        assert!((q.value - 1.5).abs() < 1e-15);
        assert!((q.grad[0] - 0.5).abs() < 1e-15);
        assert!((q.grad[1] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn partial_exposes_second_derivatives() {
        let x = jet_seed(&[2.0, 3.0]);
        let f = x[0] * x[0] * x[1];
        let d0 = f.partial(0);
        assert_eq!(d0.value, 12.0);
        assert_eq!(d0.grad[0], 6.0);
        assert_eq!(d0.grad[1], 4.0);
    }
}
