//! Differentiable scalar functions of one variable.
//!
//! A [`ScalarFn`] is a closure over [`Jet`] values, so every derivative is
//! available by tangent propagation rather than finite differences.

use std::fmt;
use std::sync::Arc;

use crate::jet::Jet;

type JetMap = dyn Fn(Jet) -> Jet + Send + Sync;

#[derive(Clone)]
pub struct ScalarFn {
    f: Arc<JetMap>,
    label: Arc<str>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.label)
    }
}

impl ScalarFn {
    pub fn new(label: impl Into<String>, f: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> Self {
        let label: String = label.into();
        ScalarFn {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn::new(format!("{c}"), move |_| Jet::constant(c))
    }

    /// Polynomial with ascending coefficients `c₀ + c₁x + …`.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let c = coeffs.to_vec();
        let label = c
            .iter()
            .enumerate()
            .map(|(i, a)| match i {
                0 => format!("{a}"),
                1 => format!("{a}*x"),
                _ => format!("{a}*x^{i}"),
            })
            .collect::<Vec<_>>()
            .join(" + ");
        ScalarFn::new(label, move |x| {
            // Horner
            let mut acc = Jet::constant(0.0);
            for a in c.iter().rev() {
                acc = acc * x + *a;
            }
            acc
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn jet(&self, x: Jet) -> Jet {
        (self.f)(x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(Jet::constant(x)).value()
    }

    /// First derivative, itself carried as a jet over the generators of `x`.
    pub fn djet(&self, x: Jet) -> Jet {
        self.jet(x.extend(Jet::constant(1.0))).tangent()
    }

    /// Second derivative as a jet over the generators of `x`.
    pub fn d2jet(&self, x: Jet) -> Jet {
        let x1 = x.extend(Jet::constant(1.0));
        self.djet(x1).tangent()
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.djet(Jet::constant(x)).value()
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.d2jet(Jet::constant(x)).value()
    }

    /// `[f, f', f'']` at `x`.
    pub fn derivs(&self, x: f64) -> [f64; 3] {
        let p = crate::jet::seed(&[x], &[&[1.0], &[1.0]]);
        let y = self.jet(p[0]);
        [y.value(), y.coeff(0b01), y.coeff(0b11)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let p = ScalarFn::polynomial(&[1.0, 0.0, -1.0]);
        assert_eq!(p.derivs(2.0), [-3.0, -4.0, -2.0]);
        assert_eq!(p.d1(2.0), -4.0);
        assert_eq!(p.d2(0.5), -2.0);
    }

    #[test]
    fn derivative_jets_nest() {
        let f = ScalarFn::new("exp(2x)", |x| (x * 2.0).exp());
        let x = Jet::constant(0.1).extend(Jet::constant(1.0));
        // d/dx of f'(x) = f''(x)
        let d = f.djet(x);
        assert!((d.value() - 2.0 * (0.2f64).exp()).abs() < 1e-14);
        assert!((d.tangent().value() - 4.0 * (0.2f64).exp()).abs() < 1e-14);
    }
}
