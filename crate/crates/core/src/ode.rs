//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! One tolerance drives every flow in the crate ([`DEFAULT_TOL`]); it is used as
//! both the absolute and the relative part of the local error test. Stage
//! evaluations may fail (guards on denominators); a failing stage is treated
//! like a rejected step, so the integrator backs off until either the guard is
//! genuinely reached or the step underflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_H_MIN: f64 = 1e-12;
pub const DEFAULT_MAX_AMPLITUDE: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub tol: f64,
    pub h_min: f64,
    pub max_amplitude: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: DEFAULT_TOL,
            h_min: DEFAULT_H_MIN,
            max_amplitude: DEFAULT_MAX_AMPLITUDE,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            tol,
            ..Default::default()
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// difference between the 5th and 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `(t0, y0)` and report the state at each of
/// `outputs`, which must be ordered monotonically away from `t0`.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], outputs: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h: f64 = 0.0;
    let mut out = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ys = vec![0.0; n];
    let mut y5 = vec![0.0; n];

    for &target in outputs {
        let dir = (target - t).signum();
        if target == t {
            out.push(y.clone());
            continue;
        }
        if h == 0.0 || h.signum() != dir {
            h = initial_step(&mut f, t, &y, target, opts)?;
        }
        loop {
            let remaining = target - t;
            let last = remaining.abs() <= h.abs() * (1.0 + 1e-12);
            let hs = if last { remaining } else { h };

            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepUnderflow { t });
            }

            let stage = (|| -> Result<()> {
                for s in 0..7 {
                    for i in 0..n {
                        let mut acc = y[i];
                        for (j, kj) in k.iter().enumerate().take(s) {
                            acc += hs * A[s][j] * kj[i];
                        }
                        ys[i] = acc;
                    }
                    f(t + C[s] * hs, &ys, &mut k[s])?;
                    if k[s].iter().any(|v| !v.is_finite()) {
                        return Err(Error::BlowUp { t: t + C[s] * hs });
                    }
                    if s == 6 {
                        y5.copy_from_slice(&ys);
                    }
                }
                Ok(())
            })();

            if let Err(e) = stage {
                let shrunk = hs * 0.25;
                if shrunk.abs() < opts.h_min {
                    return Err(match e {
                        Error::BlowUp { .. } => Error::StepUnderflow { t },
                        other => other,
                    });
                }
                h = shrunk;
                continue;
            }

            let mut err = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[i];
                }
                e *= hs;
                let sc = opts.tol + opts.tol * y[i].abs().max(y5[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / n.max(1) as f64).sqrt();

            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y.copy_from_slice(&y5);
                if y.iter().any(|v| v.abs() > opts.max_amplitude) {
                    return Err(Error::BlowUp { t });
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // keep the controller's step when the last one was clipped
                h = if last { h.abs().max(hs.abs()) * dir } else { hs * fac };
                if last {
                    break;
                }
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h = hs * fac;
                if h.abs() < opts.h_min {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Single-target convenience wrapper.
pub fn integrate_to<F>(f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    Ok(integrate(f, t0, y0, &[t1], opts)?.pop().expect("one output"))
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], target: f64, opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let span = target - t;
    let mut dy = vec![0.0; y.len()];
    f(t, y, &mut dy)?;
    let sc = |v: f64| opts.tol + opts.tol * v.abs();
    let d0 = (y.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    let d1 = (y.iter().zip(&dy).map(|(v, d)| (d / sc(*v)).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    // fifth-order guess from the tolerance
    let h = h.max(opts.tol.powf(0.2) * 1e-2).min(span.abs());
    Ok(h.max(opts.h_min * 10.0).min(span.abs()) * span.signum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let y = integrate_to(
            |_, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            1.0,
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn backward_integration_and_multiple_outputs() {
        let ys = integrate(
            |t, _, dy| {
                dy[0] = t.cos();
                Ok(())
            },
            1.0,
            &[1f64.sin()],
            &[0.5, 0.0, -1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for (y, t) in ys.iter().zip([0.5f64, 0.0, -1.0]) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_time_flow_is_identity() {
        let y0 = [0.1, -3.0, 7.25];
        let y = integrate_to(
            |_, _, dy| {
                dy.fill(1.0);
                Ok(())
            },
            2.0,
            &y0,
            2.0,
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn finite_time_blow_up_is_reported() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let r = integrate_to(
            |_, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            2.0,
            &OdeOptions::default(),
        );
        match r {
            Err(Error::BlowUp { t }) | Err(Error::StepUnderflow { t }) => assert!((t - 1.0).abs() < 1e-3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn guard_failure_is_propagated() {
        // y' = -1 from 1, guarded at y > 0.5
        let r = integrate_to(
            |_, y, dy| {
                if y[0] < 0.5 {
                    return Err(Error::guard("y", y[0]));
                }
                dy[0] = -1.0;
                Ok(())
            },
            0.0,
            &[1.0],
            1.0,
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::GuardViolation { .. })));
    }
}
