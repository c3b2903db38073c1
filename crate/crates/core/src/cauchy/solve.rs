//! Grid solves: one characteristic flow per grid column, with a
//! finite-difference residual check of every regular sample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_k_unchecked, flow_rk, lift, CauchyData};
use crate::error::{Error, Result};
use crate::ode::OdeOptions;

/// Metric guard on `u + v` for solved samples.
pub const METRIC_GUARD: f64 = 1e-10;
/// Residual bound for regular samples.
pub const RESIDUAL_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SampleStatus {
    Regular,
    BlownUp { cause: String },
    GuardStopped { cause: String },
}

impl SampleStatus {
    pub fn is_regular(&self) -> bool {
        matches!(self, SampleStatus::Regular)
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::BlowUp { .. } | Error::StepUnderflow { .. } => SampleStatus::BlownUp { cause: e.tag().into() },
            _ => SampleStatus::GuardStopped {
                cause: match e {
                    Error::GuardViolation { guard, .. } => format!("guard:{guard}"),
                    other => other.tag().into(),
                },
            },
        }
    }
}

/// Sampled solution; every table is indexed `[iy][ix]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchySolution {
    pub data: String,
    pub rect: Rect,
    pub grid: GridSpec,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub u1: Vec<Vec<f64>>,
    pub u2: Vec<Vec<f64>>,
    pub status: Vec<Vec<SampleStatus>>,
    /// Finite-difference residual of the lightcone system; `None` when a
    /// stencil neighbour is not regular.
    pub residual: Vec<Vec<Option<f64>>>,
}

impl CauchySolution {
    pub fn regular_count(&self) -> usize {
        self.status.iter().flatten().filter(|s| s.is_regular()).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().flatten().flatten().fold(0.0, |m, r| m.max(*r))
    }

    /// Regular samples with no residual (incomplete stencil).
    pub fn unverified_count(&self) -> usize {
        self.status
            .iter()
            .flatten()
            .zip(self.residual.iter().flatten())
            .filter(|(s, r)| s.is_regular() && r.is_none())
            .count()
    }

    /// Largest `max(|u − u*|, |v − v*|)` over regular samples.
    pub fn max_error<F>(&self, oracle: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> Result<(f64, f64)>,
    {
        let mut worst: f64 = 0.0;
        for (iy, &y) in self.ys.iter().enumerate() {
            for (ix, &x) in self.xs.iter().enumerate() {
                if !self.status[iy][ix].is_regular() {
                    continue;
                }
                let (u, v) = oracle(x, y)?;
                worst = worst.max((self.u[iy][ix] - u).abs()).max((self.v[iy][ix] - v).abs());
            }
        }
        Ok(worst)
    }

    /// Every regular sample carries a residual within `tol`.
    pub fn is_verified(&self, tol: f64) -> bool {
        self.unverified_count() == 0 && self.max_residual() <= tol
    }
}

fn linspace(a: f64, b: f64, n: usize, pad: usize) -> (Vec<f64>, f64) {
    let h = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    let v = (0..n + 2 * pad)
        .map(|i| {
            let k = i as isize - pad as isize;
            if k == n as isize - 1 {
                b
            } else {
                a + h * k as f64
            }
        })
        .collect();
    (v, h)
}

type Sample = std::result::Result<[f64; 4], SampleStatus>;

fn column(data: &CauchyData, k: &super::KFunctions, x: f64, ys: &[f64], opts: &OdeOptions) -> Vec<Sample> {
    let start = match lift(data, x) {
        Ok(p) => p,
        Err(e) => return vec![Err(SampleStatus::from_error(&e)); ys.len()],
    };
    let mut out: Vec<Sample> = vec![
        Err(SampleStatus::GuardStopped {
            cause: "unvisited".into()
        });
        ys.len()
    ];
    let above: Vec<usize> = (0..ys.len()).filter(|&j| ys[j] >= x).collect();
    let below: Vec<usize> = (0..ys.len()).rev().filter(|&j| ys[j] < x).collect();
    for order in [above, below] {
        let mut p = start;
        let mut failed: Option<SampleStatus> = None;
        for j in order {
            if let Some(s) = &failed {
                out[j] = Err(s.clone());
                continue;
            }
            match flow_rk(&p, ys[j], k, opts) {
                Ok(q) => {
                    p = q;
                    let s = q.u1();
                    out[j] = if s.abs() <= METRIC_GUARD {
                        Err(SampleStatus::GuardStopped {
                            cause: "metric-singularity".into(),
                        })
                    } else {
                        Ok(q.z)
                    };
                }
                Err(e) => {
                    let s = SampleStatus::from_error(&e);
                    out[j] = Err(s.clone());
                    failed = Some(s);
                }
            }
        }
    }
    out
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

/// Solve on a `grid.nx × grid.ny` lattice over `rect`.
pub fn solve(data: &CauchyData, rect: Rect, grid: GridSpec, opts: &OdeOptions) -> Result<CauchySolution> {
    if grid.nx < 2 || grid.ny < 2 {
        return Err(Error::Config("grid needs at least 2 points per axis".into()));
    }
    let lo = rect.x[0].max(rect.y[0]);
    let hi = rect.x[1].min(rect.y[1]);
    if lo > hi {
        return Err(Error::domain("solve", "the rectangle does not meet the diagonal"));
    }
    let k = compute_k_unchecked(data);
    let (xp, hx) = linspace(rect.x[0], rect.x[1], grid.nx, 2);
    let (yp, hy) = linspace(rect.y[0], rect.y[1], grid.ny, 2);

    // cols[i][j] = sample at (xp[i], yp[j])
    let cols: Vec<Vec<Sample>> = xp.par_iter().map(|&x| column(data, &k, x, &yp, opts)).collect();

    let (nx, ny) = (grid.nx, grid.ny);
    let nan_rows = || vec![vec![f64::NAN; nx]; ny];
    let mut sol = CauchySolution {
        data: data.name.clone(),
        rect,
        grid,
        xs: xp[2..nx + 2].to_vec(),
        ys: yp[2..ny + 2].to_vec(),
        u: nan_rows(),
        v: nan_rows(),
        u1: nan_rows(),
        u2: nan_rows(),
        status: vec![vec![SampleStatus::Regular; nx]; ny],
        residual: vec![vec![None; nx]; ny],
    };
    for iy in 0..ny {
        for ix in 0..nx {
            let (i, j) = (ix + 2, iy + 2);
            match &cols[i][j] {
                Ok(z) => {
                    sol.u[iy][ix] = z[0];
                    sol.v[iy][ix] = z[1];
                    sol.u1[iy][ix] = z[0] + z[1];
                    sol.u2[iy][ix] = z[0] - z[1];
                    sol.residual[iy][ix] = fd_residual(&cols, i, j, hx, hy);
                }
                Err(s) => sol.status[iy][ix] = s.clone(),
            }
        }
    }
    Ok(sol)
}

/// `max |w_xy − w_x w_y/(u+v)|` from fourth-order stencils, or `None` when a
/// stencil point is missing.
fn fd_residual(cols: &[Vec<Sample>], i: usize, j: usize, hx: f64, hy: f64) -> Option<f64> {
    let at = |a: usize, b: usize| cols[a][b].as_ref().ok().copied();
    let mut block = [[[0.0; 2]; 5]; 5];
    for (da, row) in block.iter_mut().enumerate() {
        for (db, cell) in row.iter_mut().enumerate() {
            let z = at(i + da - 2, j + db - 2)?;
            *cell = [z[0], z[1]];
        }
    }
    let centre = block[2][2];
    let s = centre[0] + centre[1];
    let mut worst: f64 = 0.0;
    for c in 0..2 {
        let wx: f64 = (0..5).map(|a| D1[a] * block[a][2][c]).sum::<f64>() / hx;
        let wy: f64 = (0..5).map(|b| D1[b] * block[2][b][c]).sum::<f64>() / hy;
        let mut wxy = 0.0;
        for a in 0..5 {
            for b in 0..5 {
                wxy += D1[a] * D1[b] * block[a][b][c];
            }
        }
        wxy /= hx * hy;
        worst = worst.max((wxy - wx * wy / s).abs());
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::super::{oracle_41, oracle_41_jet};
    use super::*;
    use std::sync::Arc;

    #[test]
    fn example41_small_grid() {
        let sol = solve(
            &CauchyData::example41(),
            Rect {
                x: [0.0, 1.0],
                y: [0.0, 1.0],
            },
            GridSpec { nx: 21, ny: 21 },
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.regular_count(), 441);
        assert!(sol.max_error(oracle_41).unwrap() < 1e-7);
        assert!(sol.is_verified(RESIDUAL_TOL), "{}", sol.max_residual());
    }

    #[test]
    fn shifted_restriction_reproduces_the_closed_form() {
        let c = 0.3;
        let shifted = Arc::new(move |[x, y]: [crate::jet::Jet; 2]| oracle_41_jet([x + c, y + c]));
        let data = CauchyData::from_solution("shifted41", shifted);
        let sol = solve(
            &data,
            Rect {
                x: [0.0, 1.0],
                y: [0.0, 1.0],
            },
            GridSpec { nx: 6, ny: 6 },
            &OdeOptions::default(),
        )
        .unwrap();
        let err = sol.max_error(|x, y| oracle_41(x + c, y + c)).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn bad_rect() {
        let r = solve(
            &CauchyData::example41(),
            Rect {
                x: [0.0, 1.0],
                y: [2.0, 3.0],
            },
            GridSpec { nx: 3, ny: 3 },
            &OdeOptions::default(),
        );
        assert!(r.is_err());
    }
}
