//! Second-order jets of maps into a surface, sigma-model residuals, the
//! lightcone/spacetime change of variables and the characteristic first
//! integrals of the λ system.

use serde::{Deserialize, Serialize};

use crate::error::{check_metric, check_nonzero, Error, Result};
use crate::geometry::SurfaceMetric;
use crate::jet::{seed, Jet};

/// Singularity guard for `u+v`, `u₁`, `u`, `sin u` and friends.
pub const EPS_SINGULAR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordFrame {
    /// source `(x, y)`, target `(u, v)`
    Lightcone,
    /// source `(ξ, τ)`, target `(u₁, u₂)`
    Spacetime,
}

/// Values and partial derivatives through order two of a map
/// `(s₁, s₂) ↦ (w¹, w²)` at one point.
///
/// `d1[c][i] = ∂_i w^c`; `d2[c] = [∂₁∂₁, ∂₁∂₂, ∂₂∂₂] w^c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2Map {
    pub frame: CoordFrame,
    pub base: [f64; 2],
    pub value: [f64; 2],
    pub d1: [[f64; 2]; 2],
    pub d2: [[f64; 3]; 2],
}

impl Jet2Map {
    pub fn constant(frame: CoordFrame, base: [f64; 2], value: [f64; 2]) -> Self {
        Jet2Map {
            frame,
            base,
            value,
            d1: [[0.0; 2]; 2],
            d2: [[0.0; 3]; 2],
        }
    }

    /// Exact 2-jet of a map given as a jet closure.
    pub fn from_fn<F>(frame: CoordFrame, base: [f64; 2], f: F) -> Self
    where
        F: Fn([Jet; 2]) -> [Jet; 2],
    {
        let e = [[1.0, 0.0], [0.0, 1.0]];
        let pair = |i: usize, j: usize| {
            let p = seed(&base, &[&e[i], &e[j]]);
            f([p[0], p[1]])
        };
        let r11 = pair(0, 0);
        let r12 = pair(0, 1);
        let r22 = pair(1, 1);
        let mut out = Jet2Map::constant(frame, base, [r12[0].value(), r12[1].value()]);
        for c in 0..2 {
            out.d1[c] = [r12[c].coeff(0b01), r12[c].coeff(0b10)];
            out.d2[c] = [r11[c].coeff(0b11), r12[c].coeff(0b11), r22[c].coeff(0b11)];
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.value.iter().all(|v| v.is_finite())
            && self.d1.iter().flatten().all(|v| v.is_finite())
            && self.d2.iter().flatten().all(|v| v.is_finite())
    }

    fn expect(&self, frame: CoordFrame) -> Result<()> {
        if self.frame != frame {
            return Err(Error::domain(
                "residual evaluator",
                format!("expected a {frame:?} jet, got {:?}", self.frame),
            ));
        }
        Ok(())
    }
}

/// `r = (u_xy − u_x u_y/(u+v), v_xy − v_x v_y/(u+v))`.
pub fn residual_lambda_lightcone(j: &Jet2Map) -> Result<[f64; 2]> {
    j.expect(CoordFrame::Lightcone)?;
    let s = j.value[0] + j.value[1];
    check_metric("u+v", s, EPS_SINGULAR)?;
    let [ux, uy] = j.d1[0];
    let [vx, vy] = j.d1[1];
    Ok([j.d2[0][1] - ux * uy / s, j.d2[1][1] - vx * vy / s])
}

/// Residual of the λ string equations in `(ξ, τ)` with target `(u₁, u₂)`.
pub fn residual_lambda_spacetime(j: &Jet2Map) -> Result<[f64; 2]> {
    j.expect(CoordFrame::Spacetime)?;
    let u1 = j.value[0];
    check_metric("u1", u1, EPS_SINGULAR)?;
    let [a_xi, a_tau] = j.d1[0];
    let [b_xi, b_tau] = j.d1[1];
    let wave = |c: usize| j.d2[c][2] - j.d2[c][0];
    let r1 = wave(0) - (a_tau * a_tau + b_tau * b_tau - a_xi * a_xi - b_xi * b_xi) / (2.0 * u1);
    let r2 = wave(1) - (a_tau * b_tau - a_xi * b_xi) / u1;
    Ok([r1, r2])
}

/// Wave maps into `du² + dv²/u²` in lightcone form.
pub fn residual_gp(j: &Jet2Map) -> Result<[f64; 2]> {
    j.expect(CoordFrame::Lightcone)?;
    let u = j.value[0];
    check_metric("u", u, EPS_SINGULAR)?;
    let [ux, uy] = j.d1[0];
    let [vx, vy] = j.d1[1];
    Ok([j.d2[0][1] + vx * vy / (u * u * u), j.d2[1][1] - (ux * vy + uy * vx) / u])
}

/// Wave maps into `dρ² + tanh²ρ dθ²` in spacetime form.
pub fn residual_tanh(j: &Jet2Map) -> Result<[f64; 2]> {
    j.expect(CoordFrame::Spacetime)?;
    let u = j.value[0];
    let (sh, ch) = (u.sinh(), u.cosh());
    check_nonzero("sinh(u)*cosh(u)", sh * ch, EPS_SINGULAR)?;
    let [u_xi, u_tau] = j.d1[0];
    let [v_xi, v_tau] = j.d1[1];
    let r1 = j.d2[0][2] - j.d2[0][0] - sh / (ch * ch * ch) * (v_tau * v_tau - v_xi * v_xi);
    let r2 = j.d2[1][2] - j.d2[1][0] + 2.0 / (sh * ch) * (u_tau * v_tau - u_xi * v_xi);
    Ok([r1, r2])
}

/// Wave maps into `du² + cot²u dv²` in spacetime form.
pub fn residual_cot(j: &Jet2Map) -> Result<[f64; 2]> {
    j.expect(CoordFrame::Spacetime)?;
    let u = j.value[0];
    let (s, c) = (u.sin(), u.cos());
    check_nonzero("sin(u)*cos(u)", s * c, EPS_SINGULAR)?;
    let [u_xi, u_tau] = j.d1[0];
    let [v_xi, v_tau] = j.d1[1];
    let r1 = j.d2[0][2] - j.d2[0][0] + c / (s * s * s) * (v_tau * v_tau - v_xi * v_xi);
    let r2 = j.d2[1][2] - j.d2[1][0] - 2.0 / (s * c) * (u_tau * v_tau - u_xi * v_xi);
    Ok([r1, r2])
}

/// Generic string-equation residual built from the Christoffel symbols:
/// `w^γ_ττ − c² w^γ_ξξ + Γ^γ_{αβ}(w^α_τ w^β_τ − c² w^α_ξ w^β_ξ)`.
pub fn residual_metric(metric: &SurfaceMetric, j: &Jet2Map, c: f64) -> Result<[f64; 2]> {
    j.expect(CoordFrame::Spacetime)?;
    let g = metric.christoffel(j.value)?;
    let c2 = c * c;
    let mut r = [0.0; 2];
    for (gamma, r) in r.iter_mut().enumerate() {
        let mut acc = j.d2[gamma][2] - c2 * j.d2[gamma][0];
        for a in 0..2 {
            for b in 0..2 {
                acc += g[gamma][a][b] * (j.d1[a][1] * j.d1[b][1] - c2 * j.d1[a][0] * j.d1[b][0]);
            }
        }
        *r = acc;
    }
    Ok(r)
}

/// `(ξ, τ) ↦ (x, y) = ((ξ+τ)/2, (ξ−τ)/2)`.
pub fn spacetime_to_lightcone_point(xi: f64, tau: f64) -> (f64, f64) {
    (0.5 * (xi + tau), 0.5 * (xi - tau))
}

/// `(x, y) ↦ (ξ, τ) = (x+y, x−y)`.
pub fn lightcone_to_spacetime_point(x: f64, y: f64) -> (f64, f64) {
    (x + y, x - y)
}

/// Transform a spacetime jet of `(u₁, u₂)` into the lightcone jet of `(u, v)`.
pub fn to_lightcone(j: &Jet2Map) -> Result<Jet2Map> {
    j.expect(CoordFrame::Spacetime)?;
    let (x, y) = spacetime_to_lightcone_point(j.base[0], j.base[1]);
    // derivatives of each target component in the new source variables
    let src = |c: usize| {
        let [f_xi, f_tau] = j.d1[c];
        let [f_xixi, f_xitau, f_tautau] = j.d2[c];
        (
            [f_xi + f_tau, f_xi - f_tau],
            [
                f_xixi + 2.0 * f_xitau + f_tautau,
                f_xixi - f_tautau,
                f_xixi - 2.0 * f_xitau + f_tautau,
            ],
        )
    };
    let (d1a, d2a) = src(0);
    let (d1b, d2b) = src(1);
    let mix = |a: f64, b: f64, s: f64| 0.5 * (a + s * b);
    let mut out = Jet2Map::constant(
        CoordFrame::Lightcone,
        [x, y],
        [mix(j.value[0], j.value[1], 1.0), mix(j.value[0], j.value[1], -1.0)],
    );
    for i in 0..2 {
        out.d1[0][i] = mix(d1a[i], d1b[i], 1.0);
        out.d1[1][i] = mix(d1a[i], d1b[i], -1.0);
    }
    for i in 0..3 {
        out.d2[0][i] = mix(d2a[i], d2b[i], 1.0);
        out.d2[1][i] = mix(d2a[i], d2b[i], -1.0);
    }
    Ok(out)
}

/// Inverse of [`to_lightcone`].
pub fn to_spacetime(j: &Jet2Map) -> Result<Jet2Map> {
    j.expect(CoordFrame::Lightcone)?;
    let (xi, tau) = lightcone_to_spacetime_point(j.base[0], j.base[1]);
    let src = |c: usize| {
        let [f_x, f_y] = j.d1[c];
        let [f_xx, f_xy, f_yy] = j.d2[c];
        (
            [0.5 * (f_x + f_y), 0.5 * (f_x - f_y)],
            [
                0.25 * (f_xx + 2.0 * f_xy + f_yy),
                0.25 * (f_xx - f_yy),
                0.25 * (f_xx - 2.0 * f_xy + f_yy),
            ],
        )
    };
    let (d1u, d2u) = src(0);
    let (d1v, d2v) = src(1);
    let mut out = Jet2Map::constant(
        CoordFrame::Spacetime,
        [xi, tau],
        [j.value[0] + j.value[1], j.value[0] - j.value[1]],
    );
    for i in 0..2 {
        out.d1[0][i] = d1u[i] + d1v[i];
        out.d1[1][i] = d1u[i] - d1v[i];
    }
    for i in 0..3 {
        out.d2[0][i] = d2u[i] + d2v[i];
        out.d2[1][i] = d2u[i] - d2v[i];
    }
    Ok(out)
}

/// The six nontrivial characteristic first integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
}

/// `α`'s (constant in `y`) and `β`'s (constant in `x`) of a lightcone 2-jet.
pub fn first_integrals(j: &Jet2Map) -> Result<FirstIntegrals> {
    j.expect(CoordFrame::Lightcone)?;
    let s = j.value[0] + j.value[1];
    check_nonzero("u+v", s, EPS_SINGULAR)?;
    let [ux, uy] = j.d1[0];
    let [vx, vy] = j.d1[1];
    let [uxx, _, uyy] = j.d2[0];
    let [vxx, _, vyy] = j.d2[1];
    check_nonzero("u_x", ux, EPS_SINGULAR)?;
    check_nonzero("v_y", vy, EPS_SINGULAR)?;
    let a1 = ux * vx / s;
    let a2 = (uxx * vx + ux * vxx) / s - ux * vx * (ux + vx) / (s * s);
    let a3 = uxx / ux - vx / s;
    let b1 = uy * vy / s;
    let b2 = (uyy * vy + uy * vyy) / s - uy * vy * (uy + vy) / (s * s);
    let b3 = vyy / vy - uy / s;
    Ok(FirstIntegrals {
        alpha: [a1, a2, a3],
        beta: [b1, b2, b3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example41(p: [Jet; 2]) -> [Jet; 2] {
        let [x, y] = p;
        let r = ((x + 1.0) * (y + 1.0)).sqrt();
        [r - x - y, r * 4.0 - 4.0 - x - y]
    }

    #[test]
    fn closed_form_solution_has_zero_residual() {
        let j = Jet2Map::from_fn(CoordFrame::Lightcone, [0.3, 0.5], example41);
        let r = residual_lambda_lightcone(&j).unwrap();
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn non_solution_residual() {
        // u = x + y, v = 0 at (1, 1)
        let j = Jet2Map::from_fn(CoordFrame::Lightcone, [1.0, 1.0], |[x, y]| [x + y, Jet::constant(0.0)]);
        assert_eq!(residual_lambda_lightcone(&j).unwrap(), [-0.5, 0.0]);
        let c = Jet2Map::constant(CoordFrame::Lightcone, [0.0, 0.0], [1.0, 2.0]);
        assert_eq!(residual_lambda_lightcone(&c).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn metric_singularity_is_named() {
        let c = Jet2Map::constant(CoordFrame::Lightcone, [0.0, 0.0], [1.0, -1.0]);
        assert!(matches!(
            residual_lambda_lightcone(&c),
            Err(Error::MetricSingularity { guard: "u+v", .. })
        ));
    }

    #[test]
    fn gp_residual_of_simple_map() {
        let j = Jet2Map::from_fn(CoordFrame::Lightcone, [0.2, 0.4], |[x, y]| [Jet::constant(1.0), x + y]);
        let r = residual_gp(&j).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15 && r[1].abs() < 1e-15);
    }

    #[test]
    fn example42_spacetime_residual() {
        let j = Jet2Map::from_fn(CoordFrame::Spacetime, [0.5, 0.5], |[xi, tau]| {
            [1.0 - xi * xi * tau * tau * 0.25, 1.0 - (xi * xi + tau * tau) * 0.5]
        });
        let r = residual_lambda_spacetime(&j).unwrap();
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
    }

    #[test]
    fn lightcone_point_transform() {
        assert_eq!(spacetime_to_lightcone_point(1.0, 1.0), (1.0, 0.0));
        let j = Jet2Map::constant(CoordFrame::Lightcone, [0.0, 0.0], [1.0, 0.0]);
        assert_eq!(to_spacetime(&j).unwrap().value, [1.0, 1.0]);
    }

    #[test]
    fn hand_coded_residuals_match_christoffel_form() {
        let m = SurfaceMetric::by_name("lambda").unwrap();
        let j = Jet2Map::from_fn(CoordFrame::Spacetime, [0.3, 0.2], |[a, b]| {
            [2.0 + a * b + a * a * 0.3, (a - b * 0.5).sin()]
        });
        let r1 = residual_lambda_spacetime(&j).unwrap();
        let r2 = residual_metric(&m, &j, 1.0).unwrap();
        assert!((r1[0] - r2[0]).abs() < 1e-12 && (r1[1] - r2[1]).abs() < 1e-12);

        let g4 = SurfaceMetric::by_name("g4").unwrap();
        let j = Jet2Map::from_fn(CoordFrame::Spacetime, [0.3, 0.2], |[a, b]| {
            [1.0 + a * b * 0.2, a * a - b]
        });
        let r1 = residual_tanh(&j).unwrap();
        let r2 = residual_metric(&g4, &j, 1.0).unwrap();
        assert!((r1[0] - r2[0]).abs() < 1e-12 && (r1[1] - r2[1]).abs() < 1e-12);
        assert!(r1[0].abs().max(r1[1].abs()) > 1e-3);

        let cot = SurfaceMetric::by_name("cot2").unwrap();
        let r1 = residual_cot(&j).unwrap();
        let r2 = residual_metric(&cot, &j, 1.0).unwrap();
        assert!((r1[0] - r2[0]).abs() < 1e-12 && (r1[1] - r2[1]).abs() < 1e-12);
    }

    #[test]
    fn residuals_vanish_on_constant_maps() {
        let st = Jet2Map::constant(CoordFrame::Spacetime, [0.1, 0.2], [1.0, 1.0]);
        assert_eq!(residual_lambda_spacetime(&st).unwrap(), [0.0, 0.0]);
        assert_eq!(residual_tanh(&st).unwrap(), [0.0, 0.0]);
        assert_eq!(residual_cot(&st).unwrap(), [0.0, 0.0]);
        let lc = Jet2Map::constant(CoordFrame::Lightcone, [0.1, 0.2], [1.0, 1.0]);
        assert_eq!(residual_gp(&lc).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn first_integrals_of_example41_lift() {
        let x = 0.3;
        let j = Jet2Map::from_fn(CoordFrame::Lightcone, [x, x], example41);
        let fi = first_integrals(&j).unwrap();
        let d = 2.0 + 2.0 * x;
        let want = [-1.0 / d, 2.0 / (d * d), -1.0 / d];
        for i in 0..3 {
            assert!((fi.beta[i] - want[i]).abs() < 1e-12);
            assert!((fi.alpha[i] - want[i]).abs() < 1e-12);
        }
    }

    fn arb_jet(frame: CoordFrame) -> impl Strategy<Value = Jet2Map> {
        proptest::collection::vec(-2.0f64..2.0, 14).prop_map(move |v| Jet2Map {
            frame,
            base: [v[0], v[1]],
            value: [v[2] + 3.0, v[3]],
            d1: [[v[4], v[5]], [v[6], v[7]]],
            d2: [[v[8], v[9], v[10]], [v[11], v[12], v[13]]],
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(j in arb_jet(CoordFrame::Spacetime)) {
            let back = to_spacetime(&to_lightcone(&j).unwrap()).unwrap();
            for (a, b) in [back.value, back.base].iter().flatten().zip([j.value, j.base].iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-14);
            }
            for c in 0..2 {
                for i in 0..2 { prop_assert!((back.d1[c][i] - j.d1[c][i]).abs() < 1e-14); }
                for i in 0..3 { prop_assert!((back.d2[c][i] - j.d2[c][i]).abs() < 1e-14); }
            }
        }

        #[test]
        fn spacetime_residual_is_linear_image_of_lightcone(j in arb_jet(CoordFrame::Lightcone)) {
            let rl = residual_lambda_lightcone(&j).unwrap();
            let rs = residual_lambda_spacetime(&to_spacetime(&j).unwrap()).unwrap();
            prop_assert!((rs[0] + rl[0] + rl[1]).abs() < 1e-12);
            prop_assert!((rs[1] + rl[0] - rl[1]).abs() < 1e-12);
        }
    }
}
