//! Geodesic flow on catalogue metrics and the closed-form λ geodesics.

use serde::{Deserialize, Serialize};

use super::SurfaceMetric;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::ode::{integrate, OdeOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub t: f64,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
}

/// Integrate `ẅ^c + Γ^c_{ab} ẇ^a ẇ^b = 0` and sample at `times`, which must be
/// ordered away from `s0.t`.
pub fn geodesic_flow(
    metric: &SurfaceMetric,
    s0: &GeodesicState,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<GeodesicState>> {
    metric.check(s0.position)?;
    let mut failed_at = f64::NAN;
    let y0 = [s0.position[0], s0.position[1], s0.velocity[0], s0.velocity[1]];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let g = match metric.christoffel([y[0], y[1]]) {
            Ok(g) => g,
            Err(e) => {
                failed_at = t;
                return Err(e);
            }
        };
        dy[0] = y[2];
        dy[1] = y[3];
        for c in 0..2 {
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    acc += g[c][a][b] * y[2 + a] * y[2 + b];
                }
            }
            dy[2 + c] = -acc;
        }
        Ok(())
    };
    let ys = integrate(rhs, s0.t, &y0, times, opts).map_err(|e| match e {
        Error::Domain { .. } => Error::LeftDomain { t: failed_at },
        other => other,
    })?;
    Ok(times
        .iter()
        .zip(ys)
        .map(|(&t, y)| GeodesicState {
            t,
            position: [y[0], y[1]],
            velocity: [y[2], y[3]],
        })
        .collect())
}

/// Closed-form λ geodesics in lightcone coordinates, as jets in `t`.
pub fn lambda_geodesic_jet(a: f64, b: f64, a1: f64, b1: f64, t: Jet) -> Result<(Jet, Jet)> {
    let d = a - b;
    if d.abs() < 1e-10 {
        return Err(Error::DegenerateConstants(format!("|a - b| = {:e}", d.abs())));
    }
    let s = a1 + b1;
    let inv = 1.0 / (d * d);
    let u =
        ((t * d).exp() * (a * a * s) + t * (a * b * (b - a) * s) - a * a * b1 - 2.0 * a * b * a1 + a1 * b * b) * inv;
    let v =
        ((t * -d).exp() * (b * b * s) - t * (a * b * (b - a) * s) + a * a * b1 - 2.0 * a * b * b1 - a1 * b * b) * inv;
    Ok((u, v))
}

pub fn lambda_geodesic_closed_form(a: f64, b: f64, a1: f64, b1: f64, t: f64) -> Result<(f64, f64)> {
    let (u, v) = lambda_geodesic_jet(a, b, a1, b1, Jet::constant(t))?;
    Ok((u.value(), v.value()))
}

/// λ geodesic in lightcone coordinates `(u, v)`, integrated through the
/// diagonal form in `(u₁, u₂) = (u+v, u−v)`. Returns `[u, v, u̇, v̇]` per time.
pub fn lambda_lightcone_geodesic(
    position: [f64; 2],
    velocity: [f64; 2],
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; 4]>> {
    let m = SurfaceMetric::by_name("lambda")?;
    let s0 = GeodesicState {
        t: 0.0,
        position: [position[0] + position[1], position[0] - position[1]],
        velocity: [velocity[0] + velocity[1], velocity[0] - velocity[1]],
    };
    let traj = geodesic_flow(&m, &s0, times, opts)?;
    Ok(traj
        .into_iter()
        .map(|s| {
            let [p1, p2] = s.position;
            let [v1, v2] = s.velocity;
            [0.5 * (p1 + p2), 0.5 * (p1 - p2), 0.5 * (v1 + v2), 0.5 * (v1 - v2)]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    #[test]
    fn closed_form_at_origin_and_derivative() {
        let (a, b, a1, b1) = (0.7, -0.4, 1.3, 0.6);
        let (u, v) = lambda_geodesic_closed_form(a, b, a1, b1, 0.0).unwrap();
        assert!((u - a1).abs() < 1e-14 && (v - b1).abs() < 1e-14);
        let t = Jet::constant(0.0).extend(Jet::constant(1.0));
        let (u, v) = lambda_geodesic_jet(a, b, a1, b1, t).unwrap();
        assert!((u.tangent().value() - a * (a1 + b1)).abs() < 1e-13);
        assert!((v.tangent().value() - b * (a1 + b1)).abs() < 1e-13);
    }

    #[test]
    fn closed_form_direct_substitution() {
        let (u, v) = lambda_geodesic_closed_form(1.0, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert!((u - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(v, 0.0);
        assert!(matches!(
            lambda_geodesic_closed_form(1.0, 1.0, 1.0, 0.0, 1.0),
            Err(Error::DegenerateConstants(_))
        ));
    }

    #[test]
    fn closed_form_solves_geodesic_equations() {
        let (a, b, a1, b1) = (0.9, -0.2, 0.5, 1.5);
        let t = crate::jet::seed(&[0.37], &[&[1.0], &[1.0]])[0];
        let (u, v) = lambda_geodesic_jet(a, b, a1, b1, t).unwrap();
        let s = u.value() + v.value();
        assert!((u.coeff(3) - u.coeff(1).powi(2) / s).abs() < 1e-12);
        assert!((v.coeff(3) - v.coeff(1).powi(2) / s).abs() < 1e-12);
    }

    #[test]
    fn numeric_flow_matches_closed_form() {
        let (a, b, a1, b1) = (1.0, -1.0, 1.0, 1.0);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let traj = lambda_lightcone_geodesic([1.0, 1.0], [2.0, -2.0], &times, &OdeOptions::default()).unwrap();
        for (t, s) in times.iter().zip(&traj) {
            let (u, v) = lambda_geodesic_closed_form(a, b, a1, b1, *t).unwrap();
            assert!((s[0] - u).abs() < 1e-8 && (s[1] - v).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_velocity_is_stationary() {
        let traj = lambda_lightcone_geodesic([1.0, 2.0], [0.0, 0.0], &[0.5, 1.0], &OdeOptions::default()).unwrap();
        assert_eq!(traj[1], [1.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        // gP straight line towards the singular axis x = 0
        let m = SurfaceMetric::by_name("gP").unwrap();
        let s0 = GeodesicState {
            t: 0.0,
            position: [1.0, 0.0],
            velocity: [-1.0, 0.0],
        };
        let r = geodesic_flow(&m, &s0, &[2.0], &OdeOptions::default());
        assert!(
            matches!(r, Err(Error::LeftDomain { .. }) | Err(Error::StepUnderflow { .. })),
            "{r:?}"
        );
    }
}
