//! Numerical isometry checks `φ*g_dst = g_src`.

use std::sync::Arc;

use super::SurfaceMetric;
use crate::error::Result;
use crate::jet::{seed, Jet};

/// A smooth map of the plane, evaluated on jets so its Jacobian is exact.
pub type PlaneMap = Arc<dyn Fn([Jet; 2]) -> [Jet; 2] + Send + Sync>;

/// Largest componentwise deviation of `φ*g_dst − g_src` over `samples`.
pub fn pullback_check(
    phi: &PlaneMap,
    g_src: &SurfaceMetric,
    g_dst: &SurfaceMetric,
    samples: &[[f64; 2]],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in samples {
        g_src.check(p)?;
        let q = seed(&p, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let img = phi([q[0], q[1]]);
        let target = [img[0].value(), img[1].value()];
        g_dst.check(target)?;
        // jac[c][i] = ∂φ^c/∂p^i
        let jac = [
            [img[0].coeff(0b01), img[0].coeff(0b10)],
            [img[1].coeff(0b01), img[1].coeff(0b10)],
        ];
        let (a, b) = g_dst.coeffs(target);
        let (as_, bs) = g_src.coeffs(p);
        let src = [[as_, 0.0], [0.0, bs]];
        for i in 0..2 {
            for j in 0..2 {
                let pulled = a * jac[0][i] * jac[0][j] + b * jac[1][i] * jac[1][j];
                worst = worst.max((pulled - src[i][j]).abs());
            }
        }
    }
    Ok(worst)
}
