//! Cauchy problem for the λ system on the diagonal `γ(x) = (x, x)`: lifting
//! the data to adapted coordinates, the `k₁, k₂` functions, the Lie-type flow
//! (Runge–Kutta and quadrature), grid solves, closed-form oracles and the
//! blow-up scan.

mod blowup;
mod flow;
mod oracle;
mod solve;

pub use blowup::{blowup_scan, shock_curve_41, BlowupOptions, BlowupRecord};
pub use flow::{flow_quadrature, flow_rk, flow_rk_regular, solution_at};
pub use oracle::{
    oracle_41, oracle_41_jet, oracle_41_singular_tau, oracle_41_spacetime, oracle_41_spacetime_jet, oracle_42,
    oracle_42_jet, oracle_42_spacetime, oracle_42_spacetime_jet,
};
pub use solve::{solve, CauchySolution, GridSpec, Rect, SampleStatus, METRIC_GUARD, RESIDUAL_TOL};

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::parse_function;
use crate::func::ScalarFn;
use crate::jet::Jet;
use crate::sigma::{first_integrals, CoordFrame, Jet2Map};
use crate::vessiot::{cauchy_field, VectorField};

/// Guard for `u+v`, `u_x`, `v_y` and the `k₂` denominator on the lift.
pub const LIFT_EPS: f64 = 1e-12;

/// Profiles along the diagonal: `u = φ₁`, `v = φ₂`, and normal derivatives
/// `ψ₁ = 𝐧(u)`, `ψ₂ = 𝐧(v)` with `𝐧 = (∂_x − ∂_y)/√2`.
#[derive(Clone, Debug)]
pub struct CauchyData {
    pub name: String,
    pub phi1: ScalarFn,
    pub phi2: ScalarFn,
    pub psi1: ScalarFn,
    pub psi2: ScalarFn,
}

/// Serializable description of Cauchy data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSpec {
    Named {
        name: String,
    },
    Expressions {
        phi1: String,
        phi2: String,
        psi1: String,
        psi2: String,
    },
}

impl DataSpec {
    pub fn build(&self) -> Result<CauchyData> {
        match self {
            DataSpec::Named { name } => CauchyData::by_name(name),
            DataSpec::Expressions { phi1, phi2, psi1, psi2 } => {
                CauchyData::from_expressions("custom", [phi1, phi2, psi1, psi2])
            }
        }
    }
}

impl CauchyData {
    /// `φ₁ = 1−x, φ₂ = 2x, ψ = 0`.
    pub fn example41() -> Self {
        CauchyData {
            name: "example41".into(),
            phi1: ScalarFn::polynomial(&[1.0, -1.0]),
            phi2: ScalarFn::polynomial(&[0.0, 2.0]),
            psi1: ScalarFn::constant(0.0),
            psi2: ScalarFn::constant(0.0),
        }
    }

    /// `φ₁ = 1−x², φ₂ = x², ψ = 0`.
    pub fn example42() -> Self {
        CauchyData {
            name: "example42".into(),
            phi1: ScalarFn::polynomial(&[1.0, 0.0, -1.0]),
            phi2: ScalarFn::polynomial(&[0.0, 0.0, 1.0]),
            psi1: ScalarFn::constant(0.0),
            psi2: ScalarFn::constant(0.0),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "example41" => Ok(Self::example41()),
            "example42" => Ok(Self::example42()),
            other => Err(Error::Config(format!("unknown Cauchy data set '{other}'"))),
        }
    }

    /// Parse `[φ₁, φ₂, ψ₁, ψ₂]` as expressions in `x`.
    pub fn from_expressions(name: &str, texts: [&str; 4]) -> Result<Self> {
        Ok(CauchyData {
            name: name.into(),
            phi1: parse_function(texts[0], "x")?,
            phi2: parse_function(texts[1], "x")?,
            psi1: parse_function(texts[2], "x")?,
            psi2: parse_function(texts[3], "x")?,
        })
    }

    /// Restriction of a known solution `(x, y) ↦ (u, v)` to the diagonal.
    pub fn from_solution(name: &str, map: Arc<dyn Fn([Jet; 2]) -> [Jet; 2] + Send + Sync>) -> Self {
        let comp = |c: usize, normal: bool| {
            let m = map.clone();
            ScalarFn::new(format!("{name}[{c}]"), move |x| {
                if !normal {
                    return m([x, x])[c];
                }
                // (∂_x − ∂_y)w / √2 at (x, x)
                let dx = m([x.extend(Jet::constant(1.0)), x.extend(Jet::constant(0.0))])[c].tangent();
                let dy = m([x.extend(Jet::constant(0.0)), x.extend(Jet::constant(1.0))])[c].tangent();
                (dx - dy) / SQRT_2
            })
        };
        CauchyData {
            name: name.into(),
            phi1: comp(0, false),
            phi2: comp(1, false),
            psi1: comp(0, true),
            psi2: comp(1, true),
        }
    }
}

/// A point of the adapted Pfaffian coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedPoint {
    pub x: f64,
    pub y: f64,
    /// `(u, v, u_x, v_y)`
    pub z: [f64; 4],
    pub a: [f64; 3],
    pub b: [f64; 3],
}

impl AdaptedPoint {
    pub fn u(&self) -> f64 {
        self.z[0]
    }

    pub fn v(&self) -> f64 {
        self.z[1]
    }

    pub fn u1(&self) -> f64 {
        self.z[0] + self.z[1]
    }

    pub fn u2(&self) -> f64 {
        self.z[0] - self.z[1]
    }

    /// Rebuild the lightcone 2-jet at `(x, y)` from `z`, `a`, `b`.
    pub fn jet2(&self) -> Result<Jet2Map> {
        let [u, v, ux, vy] = self.z;
        let s = u + v;
        for (name, val) in [("u+v", s), ("u_x", ux), ("v_y", vy)] {
            if val.abs() <= LIFT_EPS {
                return Err(Error::guard(name, val));
            }
        }
        let [a1, a2, a3] = self.a;
        let [b1, b2, b3] = self.b;
        let vx = a1 * s / ux;
        let uy = b1 * s / vy;
        let uxx = ux * (a3 + vx / s);
        let vyy = vy * (b3 + uy / s);
        let vxx = (a2 * s + a1 * (ux + vx) - uxx * vx) / ux;
        let uyy = (b2 * s + b1 * (uy + vy) - vyy * uy) / vy;
        let mut j = Jet2Map::constant(CoordFrame::Lightcone, [self.x, self.y], [u, v]);
        j.d1 = [[ux, uy], [vx, vy]];
        j.d2 = [[uxx, ux * uy / s, uyy], [vxx, vx * vy / s, vyy]];
        Ok(j)
    }
}

/// The lightcone 2-jet of the solution on the diagonal at `(x, x)`.
pub fn lift_jet(data: &CauchyData, x: f64) -> Result<Jet2Map> {
    let [p1, dp1, ddp1] = data.phi1.derivs(x);
    let [p2, dp2, ddp2] = data.phi2.derivs(x);
    let [q1, dq1, _] = data.psi1.derivs(x);
    let [q2, dq2, _] = data.psi2.derivs(x);
    let s = p1 + p2;
    if s.abs() <= LIFT_EPS || !s.is_finite() {
        return Err(Error::guard("phi1+phi2", s));
    }
    let r = 1.0 / SQRT_2;
    let ux = 0.5 * dp1 + r * q1;
    let uy = 0.5 * dp1 - r * q1;
    let vx = 0.5 * dp2 + r * q2;
    let vy = 0.5 * dp2 - r * q2;
    if vy.abs() <= LIFT_EPS {
        return Err(Error::guard("sqrt2*phi2' - 2*psi2", 2.0 * SQRT_2 * vy));
    }
    if ux.abs() <= LIFT_EPS {
        return Err(Error::guard("u_x", ux));
    }
    // total derivatives along the diagonal: d/dx = ∂_x + ∂_y
    let uxy = ux * uy / s;
    let vxy = vx * vy / s;
    let uxx = 0.5 * ddp1 + r * dq1 - uxy;
    let uyy = 0.5 * ddp1 - r * dq1 - uxy;
    let vxx = 0.5 * ddp2 + r * dq2 - vxy;
    let vyy = 0.5 * ddp2 - r * dq2 - vxy;
    let mut j = Jet2Map::constant(CoordFrame::Lightcone, [x, x], [p1, p2]);
    j.d1 = [[ux, uy], [vx, vy]];
    j.d2 = [[uxx, uxy, uyy], [vxx, vxy, vyy]];
    if !j.is_finite() {
        return Err(Error::guard("data", f64::NAN));
    }
    Ok(j)
}

/// Lift the data at parameter `x` to an adapted point over `(x, x)`.
pub fn lift(data: &CauchyData, x: f64) -> Result<AdaptedPoint> {
    let j = lift_jet(data, x)?;
    let fi = first_integrals(&j).map_err(|e| match e {
        Error::DivisionByZero { quantity, value } => Error::guard(quantity, value),
        other => other,
    })?;
    Ok(AdaptedPoint {
        x,
        y: x,
        z: [j.value[0], j.value[1], j.d1[0][0], j.d1[1][1]],
        a: fi.alpha,
        b: fi.beta,
    })
}

/// The pair `k₁(y), k₂(y)` driving the Cauchy characteristic field.
#[derive(Clone, Debug)]
pub struct KFunctions {
    pub k1: ScalarFn,
    pub k2: ScalarFn,
    field: VectorField,
}

impl KFunctions {
    pub fn new(k1: ScalarFn, k2: ScalarFn) -> Self {
        let field = cauchy_field(&k1, &k2);
        KFunctions { k1, k2, field }
    }

    /// `ξ = ∂_y − R₁ − k₂R₂ + k₁R₃` on `(y, z₁..z₄)`.
    pub fn field(&self) -> &VectorField {
        &self.field
    }

    /// `b = (k₁, k₁', k₂)` at `y`.
    pub fn b_at(&self, y: f64) -> [f64; 3] {
        let [k, dk, _] = self.k1.derivs(y);
        [k, dk, self.k2.eval(y)]
    }
}

fn k_jets(data: &CauchyData, y: Jet) -> (Jet, Jet) {
    let (p1, p2) = (data.phi1.jet(y), data.phi2.jet(y));
    let (q1, q2) = (data.psi1.jet(y), data.psi2.jet(y));
    let (dp1, dp2) = (data.phi1.djet(y), data.phi2.djet(y));
    let ddp2 = data.phi2.d2jet(y);
    let dq2 = data.psi2.djet(y);
    let s = p1 + p2;
    let k1 = (q1 * q2 * 2.0 + dp1 * dp2 - (dp1 * q2 + q1 * dp2) * SQRT_2) / (s * 4.0);
    let num = s * (ddp2 * 2.0 - dq2 * (2.0 * SQRT_2)) + ((q1 - q2) * SQRT_2 - (dp1 + dp2)) * (dp2 - q2 * SQRT_2);
    let den = s * SQRT_2 * (dp2 * SQRT_2 - q2 * 2.0);
    (k1, num / den)
}

/// The closed forms for `k₁, k₂` on the diagonal, checked for vanishing
/// denominators at `samples` points spread over `interval`.
pub fn compute_k(data: &CauchyData, interval: [f64; 2], samples: usize) -> Result<KFunctions> {
    for i in 0..=samples.max(1) {
        let y = interval[0] + (interval[1] - interval[0]) * i as f64 / samples.max(1) as f64;
        let p1 = data.phi1.eval(y);
        let [p2, dp2, _] = data.phi2.derivs(y);
        let q2 = data.psi2.eval(y);
        let s = p1 + p2;
        if s.abs() <= LIFT_EPS {
            return Err(Error::DenominatorVanishes { which: "k1", value: s });
        }
        let d = SQRT_2 * dp2 - 2.0 * q2;
        if d.abs() <= LIFT_EPS {
            return Err(Error::DenominatorVanishes { which: "k2", value: d });
        }
    }
    Ok(compute_k_unchecked(data))
}

/// [`compute_k`] without the interval scan.
pub fn compute_k_unchecked(data: &CauchyData) -> KFunctions {
    let (d1, d2) = (data.clone(), data.clone());
    KFunctions::new(
        ScalarFn::new(format!("k1[{}]", data.name), move |y| k_jets(&d1, y).0),
        ScalarFn::new(format!("k2[{}]", data.name), move |y| k_jets(&d2, y).1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example41_lift() {
        let d = CauchyData::example41();
        for x in [0.0, 0.3, 1.0] {
            let p = lift(&d, x).unwrap();
            let want = [1.0 - x, 2.0 * x, -0.5, 1.0];
            for i in 0..4 {
                assert!((p.z[i] - want[i]).abs() < 1e-14);
            }
            let w = 2.0 + 2.0 * x;
            let a = [-1.0 / w, 2.0 / (w * w), -1.0 / w];
            for i in 0..3 {
                assert!((p.a[i] - a[i]).abs() < 1e-14, "{:?}", p.a);
                assert!((p.b[i] - a[i]).abs() < 1e-14, "{:?}", p.b);
            }
        }
    }

    #[test]
    fn example42_lift_at_one() {
        let p = lift(&CauchyData::example42(), 1.0).unwrap();
        assert_eq!(p.z, [0.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn lift_guards() {
        let d = CauchyData::from_expressions("bad", ["1-x", "x-1", "0", "0"]).unwrap();
        assert!(matches!(lift(&d, 0.5), Err(Error::GuardViolation { .. })));
        let flat = CauchyData::from_expressions("flat", ["x", "1", "0", "0"]).unwrap();
        assert!(matches!(lift(&flat, 0.5), Err(Error::GuardViolation { .. })));
        assert!(matches!(
            compute_k(&flat, [0.0, 1.0], 10),
            Err(Error::DenominatorVanishes { which: "k2", .. })
        ));
    }

    #[test]
    fn k_examples() {
        let k = compute_k(&CauchyData::example41(), [0.0, 1.0], 20).unwrap();
        let k42 = compute_k(&CauchyData::example42(), [0.5, 1.5], 20).unwrap();
        for i in 0..20 {
            let y = 0.05 * i as f64 + 0.5;
            assert!((k.k1.eval(y) + 1.0 / (2.0 + 2.0 * y)).abs() < 1e-15);
            assert!((k.k2.eval(y) + 1.0 / (2.0 + 2.0 * y)).abs() < 1e-15);
            assert!((k42.k1.eval(y) + y * y).abs() < 1e-14);
            assert!((k42.k2.eval(y) - 1.0 / y).abs() < 1e-14);
        }
    }

    #[test]
    fn k_matches_beta_on_lift_with_normal_data() {
        let d = CauchyData::from_expressions("mixed", ["2+x+x^2", "1+3*x", "0.4*x", "0.2-0.1*x^2"]).unwrap();
        let k = compute_k(&d, [0.0, 1.0], 20).unwrap();
        for i in 0..=10 {
            let y = 0.1 * i as f64;
            let p = lift(&d, y).unwrap();
            let b = k.b_at(y);
            for c in 0..3 {
                assert!((p.b[c] - b[c]).abs() < 1e-10, "{c}: {:?} vs {:?}", p.b, b);
            }
        }
    }

    #[test]
    fn jet2_round_trip() {
        let d = CauchyData::example41();
        let p = lift(&d, 0.4).unwrap();
        let j = p.jet2().unwrap();
        let l = lift_jet(&d, 0.4).unwrap();
        for c in 0..2 {
            for i in 0..2 {
                assert!((j.d1[c][i] - l.d1[c][i]).abs() < 1e-14);
            }
            for i in 0..3 {
                assert!((j.d2[c][i] - l.d2[c][i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn data_spec_builds() {
        let s: DataSpec = serde_json::from_str(r#"{"kind":"named","name":"example42"}"#).unwrap();
        assert_eq!(s.build().unwrap().name, "example42");
        let e = DataSpec::Expressions {
            phi1: "1-x".into(),
            phi2: "2*x".into(),
            psi1: "0".into(),
            psi2: "0".into(),
        };
        let p = lift(&e.build().unwrap(), 0.0).unwrap();
        assert_eq!(p.z, [1.0, 0.0, -0.5, 1.0]);
        assert!(CauchyData::by_name("nope").is_err());
    }
}
