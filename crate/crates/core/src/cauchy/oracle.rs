//! Closed-form solutions of the two worked Cauchy problems.

use crate::error::{Error, Result};
use crate::jet::Jet;

/// `u = √((1+x)(1+y)) − x − y`, `v = 4√((1+x)(1+y)) − 4 − x − y`.
pub fn oracle_41_jet([x, y]: [Jet; 2]) -> [Jet; 2] {
    let r = ((x + 1.0) * (y + 1.0)).sqrt();
    [r - x - y, r * 4.0 - 4.0 - x - y]
}

pub fn oracle_41(x: f64, y: f64) -> Result<(f64, f64)> {
    if 1.0 + x <= 0.0 || 1.0 + y <= 0.0 {
        return Err(Error::domain(
            "oracle_41",
            format!("needs 1+x > 0 and 1+y > 0 at ({x}, {y})"),
        ));
    }
    let [u, v] = oracle_41_jet([Jet::constant(x), Jet::constant(y)]);
    Ok((u.value(), v.value()))
}

/// `u₁ = (5/2)√((2+ξ+τ)(2+ξ−τ)) − 4 − 2ξ`, `u₂ = 4 − (3/2)√(…)`.
pub fn oracle_41_spacetime_jet([xi, tau]: [Jet; 2]) -> [Jet; 2] {
    let r = ((xi + tau + 2.0) * (xi - tau + 2.0)).sqrt();
    [r * 2.5 - 4.0 - xi * 2.0, 4.0 - r * 1.5]
}

pub fn oracle_41_spacetime(xi: f64, tau: f64) -> Result<(f64, f64)> {
    if 2.0 + xi + tau <= 0.0 || 4.0 + 2.0 * xi - 2.0 * tau <= 0.0 {
        return Err(Error::domain(
            "oracle_41_spacetime",
            format!("needs 2+ξ±τ > 0 at ({xi}, {tau})"),
        ));
    }
    let [a, b] = oracle_41_spacetime_jet([Jet::constant(xi), Jet::constant(tau)]);
    Ok((a.value(), b.value()))
}

/// `u₁ = 1 − ξ²τ²/4`, `u₂ = 1 − (ξ²+τ²)/2`.
pub fn oracle_42_spacetime_jet([xi, tau]: [Jet; 2]) -> [Jet; 2] {
    let p = xi * tau;
    [1.0 - p * p * 0.25, 1.0 - (xi * xi + tau * tau) * 0.5]
}

pub fn oracle_42_spacetime(xi: f64, tau: f64) -> Result<(f64, f64)> {
    let [a, b] = oracle_42_spacetime_jet([Jet::constant(xi), Jet::constant(tau)]);
    Ok((a.value(), b.value()))
}

/// The `example42` solution in lightcone form, from `ξ = x+y`, `τ = x−y`.
pub fn oracle_42_jet([x, y]: [Jet; 2]) -> [Jet; 2] {
    let [u1, u2] = oracle_42_spacetime_jet([x + y, x - y]);
    [(u1 + u2) * 0.5, (u1 - u2) * 0.5]
}

pub fn oracle_42(x: f64, y: f64) -> Result<(f64, f64)> {
    let [u, v] = oracle_42_jet([Jet::constant(x), Jet::constant(y)]);
    Ok((u.value(), v.value()))
}

/// First `τ > 0` where the `example41` closed form degenerates: the smaller of
/// the first root of `u₁(ξ, ·)` and the square-root zero `τ = ξ + 2`.
pub fn oracle_41_singular_tau(xi: f64) -> f64 {
    let edge = xi + 2.0;
    let u1 = |t: f64| oracle_41_spacetime(xi, t).map(|r| r.0).unwrap_or(f64::NAN);
    let s0 = u1(0.0).signum();
    let steps = 4000;
    let mut lo = 0.0;
    for i in 1..steps {
        let t = edge * i as f64 / steps as f64;
        let v = u1(t);
        if v * s0 <= 0.0 {
            let mut hi = t;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if u1(mid) * s0 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            return 0.5 * (lo + hi);
        }
        lo = t;
    }
    edge
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::{residual_lambda_lightcone, residual_lambda_spacetime, CoordFrame, Jet2Map};

    #[test]
    fn origin_and_initial_line() {
        assert_eq!(oracle_41(0.0, 0.0).unwrap(), (1.0, 0.0));
        assert_eq!(oracle_42_spacetime(0.0, 0.0).unwrap(), (1.0, 1.0));
        for xi in [0.0, 0.5, 1.3] {
            let (a, b) = oracle_41_spacetime(xi, 0.0).unwrap();
            assert!((a - (1.0 + 0.5 * xi)).abs() < 1e-14 && (b - (1.0 - 1.5 * xi)).abs() < 1e-14);
        }
        assert!(oracle_41(-1.5, 0.0).is_err());
        assert!(oracle_41_spacetime(0.0, 2.5).is_err());
    }

    #[test]
    fn closed_forms_agree_with_initial_data_and_equations() {
        for i in 0..10 {
            let x = 0.1 * i as f64;
            let (u, v) = oracle_41(x, x).unwrap();
            assert!((u - (1.0 - x)).abs() < 1e-14 && (v - 2.0 * x).abs() < 1e-14);
            let (u, v) = oracle_42(x, x).unwrap();
            assert!((u - (1.0 - x * x)).abs() < 1e-14 && (v - x * x).abs() < 1e-14);
        }
        let j = Jet2Map::from_fn(CoordFrame::Lightcone, [0.2, 0.7], oracle_41_jet);
        let r = residual_lambda_lightcone(&j).unwrap();
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
        let j = Jet2Map::from_fn(CoordFrame::Spacetime, [0.4, 0.3], oracle_42_spacetime_jet);
        let r = residual_lambda_spacetime(&j).unwrap();
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
        let j = Jet2Map::from_fn(CoordFrame::Spacetime, [0.4, 0.3], oracle_41_spacetime_jet);
        let r = residual_lambda_spacetime(&j).unwrap();
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
    }

    #[test]
    fn spacetime_and_lightcone_forms_agree() {
        let (x, y) = (0.3, 0.6);
        let (u, v) = oracle_41(x, y).unwrap();
        let (a, b) = oracle_41_spacetime(x + y, x - y).unwrap();
        assert!((a - (u + v)).abs() < 1e-14 && (b - (u - v)).abs() < 1e-14);
    }

    #[test]
    fn singular_locus_is_the_u1_root() {
        for xi in [0.5, 1.0, 1.5, 2.0] {
            let t = oracle_41_singular_tau(xi);
            assert!((t - 0.6 * (2.0 + xi)).abs() < 1e-12, "{xi}: {t}");
        }
    }
}
