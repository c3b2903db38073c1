//! Scan of the first loss of regularity along lines of constant `ξ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_k_unchecked, solution_at, CauchyData, KFunctions};
use crate::error::Error;
use crate::ode::OdeOptions;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupOptions {
    pub tau_max: f64,
    /// Scan resolution in `τ`; τ* is refined below it by bisection.
    pub d_tau: f64,
    /// `|u₁|` at or below this counts as metric degeneration.
    pub metric_eps: f64,
    pub ode: OdeOptions,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions {
            tau_max: 5.0,
            d_tau: 0.01,
            metric_eps: 1e-10,
            ode: OdeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub xi: f64,
    /// `None` when the solution stays regular up to `tau_max`.
    pub tau_star: Option<f64>,
    pub cause: Option<String>,
}

/// The reference curve `τ = ½√(8ξ + 3ξ²)` for the `example41` data.
pub fn shock_curve_41(xi: f64) -> f64 {
    0.5 * (8.0 * xi + 3.0 * xi * xi).sqrt()
}

fn cause_of(e: &Error) -> String {
    match e {
        Error::GuardViolation { guard, .. } => format!("guard:{guard}"),
        other => other.tag().to_string(),
    }
}

/// `Ok(u₁)` at `(ξ, τ)` or the reason the solution is not available there.
fn probe(data: &CauchyData, k: &KFunctions, xi: f64, tau: f64, sign: f64, opts: &BlowupOptions) -> Result<f64, String> {
    let (x, y) = (0.5 * (xi + tau), 0.5 * (xi - tau));
    let p = solution_at(data, k, x, y, &opts.ode).map_err(|e| cause_of(&e))?;
    let u1 = p.u1();
    if !u1.is_finite() {
        return Err("amplitude".into());
    }
    if u1.abs() <= opts.metric_eps || u1 * sign < 0.0 {
        return Err("metric-singularity".into());
    }
    Ok(u1)
}

fn scan_one(data: &CauchyData, k: &KFunctions, xi: f64, opts: &BlowupOptions) -> BlowupRecord {
    let regular = BlowupRecord {
        xi,
        tau_star: None,
        cause: None,
    };
    let sign = match probe(data, k, xi, 0.0, 1.0, opts).or_else(|_| probe(data, k, xi, 0.0, -1.0, opts)) {
        Ok(u1) => u1.signum(),
        Err(cause) => {
            return BlowupRecord {
                xi,
                tau_star: Some(0.0),
                cause: Some(cause),
            }
        }
    };
    let steps = (opts.tau_max / opts.d_tau).ceil() as usize;
    let mut lo = 0.0;
    for i in 1..=steps {
        let tau = (i as f64 * opts.d_tau).min(opts.tau_max);
        if let Err(mut cause) = probe(data, k, xi, tau, sign, opts) {
            let mut hi = tau;
            while hi - lo > 1e-9 * (1.0 + hi) {
                let mid = 0.5 * (lo + hi);
                match probe(data, k, xi, mid, sign, opts) {
                    Ok(_) => lo = mid,
                    Err(c) => {
                        hi = mid;
                        cause = c;
                    }
                }
            }
            return BlowupRecord {
                xi,
                tau_star: Some(0.5 * (lo + hi)),
                cause: Some(cause),
            };
        }
        lo = tau;
    }
    regular
}

/// For each `ξ`, advance in `τ ≥ 0` until the lifted-and-flowed solution
/// fails or `u₁` degenerates, then bisect for the first failure time.
pub fn blowup_scan(data: &CauchyData, xis: &[f64], opts: &BlowupOptions) -> Vec<BlowupRecord> {
    let k = compute_k_unchecked(data);
    xis.par_iter().map(|&xi| scan_one(data, &k, xi, opts)).collect()
}
