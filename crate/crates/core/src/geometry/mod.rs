//! Diagonal surface metrics `A(w) (dw¹)² + B(w) (dw²)²`: catalogue,
//! Christoffel symbols, Gauss curvature and the Cartan invariant.

mod geodesic;
mod pullback;

pub use geodesic::{
    geodesic_flow, lambda_geodesic_closed_form, lambda_geodesic_jet, lambda_lightcone_geodesic, GeodesicState,
};
pub use pullback::{pullback_check, PlaneMap};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::sigma::Jet2Map;

type CoeffFn = dyn Fn(Jet, Jet) -> Jet + Send + Sync;
type GuardFn = dyn Fn(f64, f64) -> bool + Send + Sync;

/// Christoffel symbols `gamma[c][a][b] = Γ^c_{ab}`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

#[derive(Clone)]
pub struct SurfaceMetric {
    pub name: String,
    a: Arc<CoeffFn>,
    b: Arc<CoeffFn>,
    guard: Arc<GuardFn>,
}

impl fmt::Debug for SurfaceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SurfaceMetric({})", self.name)
    }
}

/// Names accepted by [`SurfaceMetric::by_name`].
pub const CATALOGUE: &[&str] = &[
    "euclidean",
    "g1",
    "g2",
    "gP",
    "gP-conformal",
    "gSigma",
    "g3",
    "g4",
    "cot2",
    "lambda",
];

const GUARD_EPS: f64 = 1e-12;

impl SurfaceMetric {
    pub fn new(
        name: impl Into<String>,
        a: impl Fn(Jet, Jet) -> Jet + Send + Sync + 'static,
        b: impl Fn(Jet, Jet) -> Jet + Send + Sync + 'static,
        guard: impl Fn(f64, f64) -> bool + Send + Sync + 'static,
    ) -> Self {
        SurfaceMetric {
            name: name.into(),
            a: Arc::new(a),
            b: Arc::new(b),
            guard: Arc::new(guard),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        let one = |_: Jet, _: Jet| Jet::constant(1.0);
        let all = |_: f64, _: f64| true;
        Ok(match name {
            "euclidean" => SurfaceMetric::new(name, one, one, all),
            "g1" => {
                let c = |x: Jet, _: Jet| (x.exp() + 1.0).recip();
                SurfaceMetric::new(name, c, c, all)
            }
            "g2" => {
                let c = |x: Jet, _: Jet| (1.0 - x.exp()).recip();
                SurfaceMetric::new(name, c, c, |x, _| x < 0.0 && (1.0 - x.exp()).abs() > GUARD_EPS)
            }
            "gP" => SurfaceMetric::new(name, one, |x: Jet, _| x.powi(-2), |x, _| x > GUARD_EPS),
            "gP-conformal" => {
                let c = |u: Jet, _: Jet| (u * 2.0).recip();
                SurfaceMetric::new(name, c, c, |u, _| u > GUARD_EPS)
            }
            "gSigma" => {
                let c = |u: Jet, v: Jet| (u * u + v * v + 1.0).recip();
                SurfaceMetric::new(name, c, c, all)
            }
            "g3" => {
                let c = |r: Jet, _: Jet| ((r.exp() + 1.0) * 4.0).recip();
                SurfaceMetric::new(name, c, c, all)
            }
            "g4" => SurfaceMetric::new(
                name,
                one,
                |r: Jet, _| r.tanh().powi(2),
                |r, _| r.tanh().abs() > GUARD_EPS,
            ),
            "cot2" => SurfaceMetric::new(
                name,
                one,
                |u: Jet, _| (u.cos() / u.sin()).powi(2),
                |u, _| u.sin().abs() > GUARD_EPS && u.cos().abs() > GUARD_EPS,
            ),
            "lambda" => SurfaceMetric::new(
                name,
                |u1: Jet, _| (u1 * 2.0).recip(),
                |u1: Jet, _| -(u1 * 2.0).recip(),
                |u1, _| u1.abs() > GUARD_EPS,
            ),
            _ => {
                return Err(Error::Config(format!(
                    "unknown metric '{name}' (known: {})",
                    CATALOGUE.join(", ")
                )))
            }
        })
    }

    pub fn in_domain(&self, p: [f64; 2]) -> bool {
        p[0].is_finite() && p[1].is_finite() && (self.guard)(p[0], p[1])
    }

    pub fn check(&self, p: [f64; 2]) -> Result<()> {
        if self.in_domain(p) {
            Ok(())
        } else {
            Err(Error::domain(self.name.clone(), format!("point ({}, {})", p[0], p[1])))
        }
    }

    pub fn coeffs_jet(&self, p: [Jet; 2]) -> (Jet, Jet) {
        ((self.a)(p[0], p[1]), (self.b)(p[0], p[1]))
    }

    pub fn coeffs(&self, p: [f64; 2]) -> (f64, f64) {
        let (a, b) = self.coeffs_jet([Jet::constant(p[0]), Jet::constant(p[1])]);
        (a.value(), b.value())
    }

    pub fn signature(&self, p: [f64; 2]) -> Result<Signature> {
        self.check(p)?;
        let (a, b) = self.coeffs(p);
        Ok(if a * b > 0.0 {
            Signature::Riemannian
        } else {
            Signature::Lorentzian
        })
    }

    /// Christoffel symbols as jets over the generators already carried by `p`.
    pub fn christoffel_jet(&self, p: [Jet; 2]) -> [[[Jet; 2]; 2]; 2] {
        let (a, b) = self.coeffs_jet(p);
        let (a1, a2) = partials(|q| self.coeffs_jet(q).0, p);
        let (b1, b2) = partials(|q| self.coeffs_jet(q).1, p);
        let ia = (a * 2.0).recip();
        let ib = (b * 2.0).recip();
        let g111 = a1 * ia;
        let g112 = a2 * ia;
        let g122 = -(b1 * ia);
        let g211 = -(a2 * ib);
        let g212 = b1 * ib;
        let g222 = b2 * ib;
        [[[g111, g112], [g112, g122]], [[g211, g212], [g212, g222]]]
    }

    pub fn christoffel(&self, p: [f64; 2]) -> Result<Christoffel> {
        self.check(p)?;
        let g = self.christoffel_jet([Jet::constant(p[0]), Jet::constant(p[1])]);
        let mut out = [[[0.0; 2]; 2]; 2];
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out[c][a][b] = g[c][a][b].value();
                }
            }
        }
        Ok(out)
    }

    /// Gauss curvature `R₁₂₁₂/(AB)` as a jet.
    pub fn gauss_curvature_jet(&self, p: [Jet; 2]) -> Jet {
        let g = self.christoffel_jet(p);
        let (dg1, dg2) = {
            let d1 = partial_gamma(self, p, 0);
            let d2 = partial_gamma(self, p, 1);
            (d1, d2)
        };
        // R^1_{212} = ∂₁Γ¹₂₂ − ∂₂Γ¹₁₂ + Γ¹₁ₑΓᵉ₂₂ − Γ¹₂ₑΓᵉ₁₂
        let mut r = dg1[0][1][1] - dg2[0][0][1];
        for e in 0..2 {
            r += g[0][0][e] * g[e][1][1] - g[0][1][e] * g[e][0][1];
        }
        let (a, b) = self.coeffs_jet(p);
        r * a / (a * b)
    }

    pub fn gauss_curvature(&self, p: [f64; 2]) -> Result<f64> {
        self.check(p)?;
        Ok(self
            .gauss_curvature_jet([Jet::constant(p[0]), Jet::constant(p[1])])
            .value())
    }

    /// `I² = (−K/2)³ / |dK|²_g`, the square of the Cartan relation.
    pub fn cartan_invariant_sq(&self, p: [f64; 2]) -> Result<f64> {
        self.check(p)?;
        let pj = [Jet::constant(p[0]), Jet::constant(p[1])];
        let k = self.gauss_curvature_jet(pj).value();
        let (k1, k2) = partials(|q| self.gauss_curvature_jet(q), pj);
        let (a, b) = self.coeffs(p);
        let (k1, k2) = (k1.value(), k2.value());
        let norm = k1 * k1 / a + k2 * k2 / b;
        if k1.abs() + k2.abs() < 1e-12 || norm.abs() < 1e-24 {
            return Err(Error::GradientVanishes(norm));
        }
        Ok((-k / 2.0).powi(3) / norm)
    }

    /// Hamiltonian-type energy density `½(g(w_τ, w_τ) + c² g(w_ξ, w_ξ))` used
    /// for conservation checks of the string simulator.
    pub fn hamiltonian_density(&self, w: [f64; 2], w_tau: [f64; 2], w_xi: [f64; 2], c: f64) -> f64 {
        let (a, b) = self.coeffs(w);
        0.5 * (a * w_tau[0] * w_tau[0]
            + b * w_tau[1] * w_tau[1]
            + c * c * (a * w_xi[0] * w_xi[0] + b * w_xi[1] * w_xi[1]))
    }
}

/// `∂₁f, ∂₂f` at a jet point, carried over the point's generators.
pub(crate) fn partials<F>(f: F, p: [Jet; 2]) -> (Jet, Jet)
where
    F: Fn([Jet; 2]) -> Jet,
{
    let one = Jet::constant(1.0);
    let zero = Jet::constant(0.0);
    let d1 = f([p[0].extend(one), p[1].extend(zero)]).tangent();
    let d2 = f([p[0].extend(zero), p[1].extend(one)]).tangent();
    (d1, d2)
}

fn partial_gamma(m: &SurfaceMetric, p: [Jet; 2], dir: usize) -> [[[Jet; 2]; 2]; 2] {
    let mut e = [Jet::constant(0.0); 2];
    e[dir] = Jet::constant(1.0);
    let q = [p[0].extend(e[0]), p[1].extend(e[1])];
    let g = m.christoffel_jet(q);
    let mut out = [[[Jet::constant(0.0); 2]; 2]; 2];
    for c in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                out[c][a][b] = g[c][a][b].tangent();
            }
        }
    }
    out
}

/// `e = ½ η^{ij} g_{αβ} ∂_i w^α ∂_j w^β` with `η = dξ² − c² dτ²`.
pub fn energy_density(metric: &SurfaceMetric, jet: &Jet2Map, c: f64) -> Result<f64> {
    if jet.frame != crate::sigma::CoordFrame::Spacetime {
        return Err(Error::domain("energy density", "expects a spacetime jet"));
    }
    metric.check(jet.value)?;
    let (a, b) = metric.coeffs(jet.value);
    let inv_c2 = 1.0 / (c * c);
    let term = |g: f64, d: [f64; 2]| g * (d[0] * d[0] - inv_c2 * d[1] * d[1]);
    Ok(0.5 * (term(a, jet.d1[0]) + term(b, jet.d1[1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::CoordFrame;

    #[test]
    fn euclidean_is_flat() {
        let m = SurfaceMetric::by_name("euclidean").unwrap();
        assert_eq!(m.christoffel([0.3, -2.0]).unwrap(), [[[0.0; 2]; 2]; 2]);
        assert_eq!(m.gauss_curvature([0.3, -2.0]).unwrap(), 0.0);
        assert!(matches!(
            m.cartan_invariant_sq([0.0, 0.0]),
            Err(Error::GradientVanishes(_))
        ));
    }

    #[test]
    fn lambda_christoffel_at_unit_point() {
        let m = SurfaceMetric::by_name("lambda").unwrap();
        let g = m.christoffel([1.0, 0.0]).unwrap();
        assert_eq!(g[0][0][0], -0.5);
        assert_eq!(g[0][1][1], -0.5);
        assert_eq!(g[1][0][1], -0.5);
        assert_eq!(g[1][1][0], -0.5);
        assert_eq!(g[0][0][1], 0.0);
        assert_eq!(g[1][0][0], 0.0);
        assert_eq!(g[1][1][1], 0.0);
        assert_eq!(m.signature([1.0, 0.0]).unwrap(), Signature::Lorentzian);
        assert!(m.christoffel([0.0, 1.0]).is_err());
    }

    #[test]
    fn gp_christoffel_and_curvature() {
        let m = SurfaceMetric::by_name("gP").unwrap();
        let g = m.christoffel([2.0, 0.0]).unwrap();
        assert!((g[1][0][1] + 0.5).abs() < 1e-15);
        assert!((g[0][1][1] - 0.125).abs() < 1e-15);
        assert!((m.gauss_curvature([1.0, 0.0]).unwrap() + 2.0).abs() < 1e-13);
        assert!((m.gauss_curvature([2.0, 0.0]).unwrap() + 0.5).abs() < 1e-13);
        assert!((m.cartan_invariant_sq([1.3, 0.2]).unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn ream_invariants() {
        let g1 = SurfaceMetric::by_name("g1").unwrap();
        assert!((g1.cartan_invariant_sq([0.0, 0.0]).unwrap() + 1.0 / 16.0).abs() < 1e-12);
        let g2 = SurfaceMetric::by_name("g2").unwrap();
        let x: f64 = -1.0;
        assert!((g2.cartan_invariant_sq([x, 0.0]).unwrap() - x.exp() / 16.0).abs() < 1e-12);
        assert!(g2.cartan_invariant_sq([0.0, 0.0]).is_err());
    }

    #[test]
    fn sphere_like_sign_convention() {
        // dθ² + sin²θ dφ² has K = 1
        let s = SurfaceMetric::new(
            "sphere",
            |_, _| Jet::constant(1.0),
            |t: Jet, _| t.sin().powi(2),
            |_, _| true,
        );
        assert!((s.gauss_curvature([0.7, 0.0]).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn energy_density_of_initial_data() {
        let m = SurfaceMetric::by_name("lambda").unwrap();
        let xi = 0.8;
        let j = Jet2Map {
            frame: CoordFrame::Spacetime,
            base: [xi, 0.0],
            value: [1.0, 1.0 - xi * xi / 2.0],
            d1: [[0.0, 0.0], [-xi, 0.0]],
            d2: [[0.0; 3]; 2],
        };
        assert!((energy_density(&m, &j, 1.0).unwrap() + xi * xi / 4.0).abs() < 1e-15);
        let c = Jet2Map::constant(CoordFrame::Spacetime, [0.0, 0.0], [1.0, 2.0]);
        assert_eq!(energy_density(&m, &c, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn unknown_metric_is_a_config_error() {
        assert!(matches!(SurfaceMetric::by_name("nope"), Err(Error::Config(_))));
    }
}
