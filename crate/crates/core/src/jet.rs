//! Truncated multivariate Taylor numbers ("multi-duals").
//!
//! A [`Jet`] carries a real value together with every mixed partial derivative
//! along up to [`MAX_GENERATORS`] independent nilpotent directions
//! `ε₁ … ε_k` with `εᵢ² = 0`. Coefficient `c[mask]` multiplies the product of
//! the generators whose bits are set in `mask`, so
//!
//! ```text
//! f(p + ε₁a + ε₂b) = f(p) + ε₁ Df·a + ε₂ Df·b + ε₁ε₂ D²f[a, b]
//! ```
//!
//! Nesting is done at runtime: [`Jet::extend`] adjoins a fresh generator whose
//! coefficient is itself a jet over the existing generators. This is what makes
//! iterated Lie brackets and iterated Lie derivatives exact to round-off.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Maximum number of nilpotent generators a jet can carry.
pub const MAX_GENERATORS: usize = 4;
const CAP: usize = 1 << MAX_GENERATORS;

#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; CAP],
    order: u8,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("coeffs", &&self.c[..self.len()])
            .finish()
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        let mut c = [0.0; CAP];
        c[0] = v;
        Jet { c, order: 0 }
    }

    /// Number of generators carried.
    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    fn len(&self) -> usize {
        1 << self.order
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Coefficient of the generator product selected by `mask`.
    pub fn coeff(&self, mask: usize) -> f64 {
        if mask < self.len() {
            self.c[mask]
        } else {
            0.0
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c[..self.len()].iter().all(|v| v.is_finite())
    }

    /// Same number viewed with `order` generators (zero padding).
    pub fn promote(mut self, order: usize) -> Jet {
        assert!(order <= MAX_GENERATORS, "jet order {order} exceeds capacity");
        if order > self.order() {
            self.order = order as u8;
        }
        self
    }

    /// Adjoin a new generator `ε` and return `self + ε·tangent`.
    ///
    /// Both operands are first promoted to a common order `k`; the result has
    /// order `k + 1`.
    pub fn extend(self, tangent: Jet) -> Jet {
        let k = self.order().max(tangent.order());
        assert!(k < MAX_GENERATORS, "jet nesting deeper than {MAX_GENERATORS}");
        let lo = self.promote(k);
        let hi = tangent.promote(k);
        Jet::join(lo, hi)
    }

    /// Coefficient of the outermost generator, as a jet over the inner ones.
    pub fn tangent(&self) -> Jet {
        if self.order == 0 {
            return Jet::constant(0.0);
        }
        self.split().1
    }

    /// Drop the outermost generator.
    pub fn base(&self) -> Jet {
        if self.order == 0 {
            return *self;
        }
        self.split().0
    }

    fn split(&self) -> (Jet, Jet) {
        debug_assert!(self.order > 0);
        let half = self.len() / 2;
        let mut lo = Jet::constant(0.0);
        let mut hi = Jet::constant(0.0);
        lo.order = self.order - 1;
        hi.order = self.order - 1;
        lo.c[..half].copy_from_slice(&self.c[..half]);
        hi.c[..half].copy_from_slice(&self.c[half..2 * half]);
        (lo, hi)
    }

    fn join(lo: Jet, hi: Jet) -> Jet {
        debug_assert_eq!(lo.order, hi.order);
        let half = lo.len();
        let mut out = Jet::constant(0.0);
        out.order = lo.order + 1;
        out.c[..half].copy_from_slice(&lo.c[..half]);
        out.c[half..2 * half].copy_from_slice(&hi.c[..half]);
        out
    }

    fn aligned(a: Jet, b: Jet) -> (Jet, Jet, usize) {
        let k = a.order().max(b.order());
        (a.promote(k), b.promote(k), k)
    }

    /// Apply a smooth scalar function given its value map and derivative.
    fn lift(self, f: &dyn Fn(f64) -> f64, df: &dyn Fn(Jet) -> Jet) -> Jet {
        if self.order == 0 {
            return Jet::constant(f(self.c[0]));
        }
        let (lo, hi) = self.split();
        let v = lo.lift(f, df);
        let d = df(lo);
        Jet::join(v, d * hi)
    }

    pub fn recip(self) -> Jet {
        self.lift(&|x| 1.0 / x, &|x| {
            let r = x.recip();
            -(r * r)
        })
    }

    pub fn exp(self) -> Jet {
        self.lift(&f64::exp, &|x| x.exp())
    }

    pub fn ln(self) -> Jet {
        self.lift(&f64::ln, &|x| x.recip())
    }

    pub fn sqrt(self) -> Jet {
        self.lift(&f64::sqrt, &|x| 0.5 * x.sqrt().recip())
    }

    pub fn sin(self) -> Jet {
        self.lift(&f64::sin, &|x| x.cos())
    }

    pub fn cos(self) -> Jet {
        self.lift(&f64::cos, &|x| -x.sin())
    }

    pub fn tanh(self) -> Jet {
        self.lift(&f64::tanh, &|x| {
            let t = x.tanh();
            1.0 - t * t
        })
    }

    pub fn sinh(self) -> Jet {
        self.lift(&f64::sinh, &|x| x.cosh())
    }

    pub fn cosh(self) -> Jet {
        self.lift(&f64::cosh, &|x| x.sinh())
    }

    pub fn powf(self, p: f64) -> Jet {
        self.lift(&|x| x.powf(p), &|x| p * x.powf(p - 1.0))
    }

    pub fn powi(self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(1.0);
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

/// Seed a point with derivative directions: generator `g` moves the point along
/// `directions[g]`.
pub fn seed(point: &[f64], directions: &[&[f64]]) -> Vec<Jet> {
    let mut out: Vec<Jet> = point.iter().map(|&v| Jet::constant(v)).collect();
    for dir in directions {
        debug_assert_eq!(dir.len(), point.len());
        out = out
            .into_iter()
            .zip(dir.iter())
            .map(|(p, &d)| p.extend(Jet::constant(d)))
            .collect();
    }
    out
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let (mut a, b, k) = Jet::aligned(self, rhs);
        for i in 0..(1 << k) {
            a.c[i] += b.c[i];
        }
        a
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let (mut a, b, k) = Jet::aligned(self, rhs);
        for i in 0..(1 << k) {
            a.c[i] -= b.c[i];
        }
        a
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        if self.order == 0 {
            return rhs * self.c[0];
        }
        if rhs.order == 0 {
            return self * rhs.c[0];
        }
        let (a, b, k) = Jet::aligned(self, rhs);
        let mut out = Jet::constant(0.0);
        out.order = k as u8;
        // subset convolution: (ab)[s] = sum over t ⊆ s of a[t] b[s \ t]
        for s in 0..(1usize << k) {
            let mut acc = 0.0;
            let mut t = s;
            loop {
                acc += a.c[t] * b.c[s ^ t];
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            out.c[s] = acc;
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        if rhs.order == 0 {
            return self * (1.0 / rhs.c[0]);
        }
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for i in 0..self.len() {
            self.c[i] = -self.c[i];
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for i in 0..self.len() {
            self.c[i] *= rhs;
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

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::constant(0.0), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn first_and_mixed_derivatives_of_product() {
        // f(x, y) = x^2 y at (2, 3)
        let p = seed(&[2.0, 3.0], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let f = p[0] * p[0] * p[1];
        assert_eq!(f.value(), 12.0);
        assert_eq!(f.coeff(0b01), 12.0); // f_x = 2xy
        assert_eq!(f.coeff(0b10), 4.0); // f_y = x^2
        assert_eq!(f.coeff(0b11), 4.0); // f_xy = 2x
    }

    #[test]
    fn second_derivative_along_repeated_direction() {
        let p = seed(&[0.7], &[&[1.0], &[1.0]]);
        let f = p[0].sin();
        assert!(close(f.coeff(0b11), -(0.7f64).sin(), 1e-15));
    }

    #[test]
    fn third_derivative_of_elementary_functions() {
        let x = 0.3;
        let p = seed(&[x], &[&[1.0], &[1.0], &[1.0]]);
        let t = p[0].tanh().coeff(0b111);
        let th = x.tanh();
        let sech2 = 1.0 - th * th;
        // d3/dx3 tanh = -2 sech^2 (1 - 3 tanh^2)
        assert!(close(t, -2.0 * sech2 * (1.0 - 3.0 * th * th), 1e-13));
        let s = p[0].sqrt().coeff(0b111);
        assert!(close(s, 3.0 / 8.0 * x.powf(-2.5), 1e-13));
        let l = (p[0] + 1.0).ln().coeff(0b111);
        assert!(close(l, 2.0 / (1.0 + x).powi(3), 1e-13));
        let r = p[0].powf(1.5).coeff(0b111);
        assert!(close(r, 1.5 * 0.5 * -0.5 * x.powf(-1.5), 1e-13));
    }

    #[test]
    fn nested_extension_matches_second_derivative() {
        // tangent of tangent equals f'' when both generators move x
        let x = Jet::constant(1.2).extend(Jet::constant(1.0));
        let inner = x.exp() * x;
        let outer = x.extend(Jet::constant(1.0).promote(1));
        let g = outer.exp() * outer;
        assert!(close(inner.tangent().value(), (1.2f64).exp() * 2.2, 1e-14));
        assert!(close(g.coeff(0b11), (1.2f64).exp() * 3.2, 1e-14));
    }

    #[test]
    fn powi_negative_and_division() {
        let p = seed(&[2.0], &[&[1.0]]);
        let a = p[0].powi(-2);
        assert!(close(a.coeff(1), -2.0 / 8.0, 1e-15));
        let b = 1.0 / p[0];
        assert!(close(b.coeff(1), -0.25, 1e-15));
    }
}
