//! The hyperbolic Weierstrass generator, integral curves of the two
//! characteristic systems, and solutions built from them by superposition.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::jet::Jet;
use crate::ode::{integrate, OdeOptions};
use crate::vessiot::superpose_jet;

const GUARD: f64 = 1e-12;

/// `k, h` of `s` and `m, f` of `t`.
#[derive(Clone, Debug)]
pub struct WeierstrassQuad {
    pub k: ScalarFn,
    pub h: ScalarFn,
    pub m: ScalarFn,
    pub f: ScalarFn,
}

/// A point produced by the generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassPoint {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

fn denominators(k: Jet, kd: Jet, m: Jet, md: Jet) -> Result<()> {
    for (which, val) in [("k'", kd), ("m'", md), ("k", k), ("m", m)] {
        if val.value().abs() <= GUARD || !val.value().is_finite() {
            return Err(Error::DenominatorVanishes {
                which,
                value: val.value(),
            });
        }
    }
    Ok(())
}

impl WeierstrassQuad {
    pub fn new(k: ScalarFn, h: ScalarFn, m: ScalarFn, f: ScalarFn) -> Self {
        WeierstrassQuad { k, h, m, f }
    }

    /// Expressions for `k(s), h(s), m(t), f(t)`.
    pub fn from_expressions(k: &str, h: &str, m: &str, f: &str) -> Result<Self> {
        use crate::expr::parse_function;
        Ok(WeierstrassQuad {
            k: parse_function(k, "s")?,
            h: parse_function(h, "s")?,
            m: parse_function(m, "t")?,
            f: parse_function(f, "t")?,
        })
    }

    /// Four increasing cubics on `[1, 2]` with positive coefficients.
    pub fn random_monotone<R: Rng>(rng: &mut R) -> Self {
        let mut cubic = |_: usize| {
            let c = [
                rng.random_range(0.5..2.0),
                rng.random_range(0.5..2.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..0.5),
            ];
            ScalarFn::polynomial(&c)
        };
        WeierstrassQuad {
            k: cubic(0),
            h: cubic(1),
            m: cubic(2),
            f: cubic(3),
        }
    }

    /// `(u, v)` as jets in `(s, t)`.
    pub fn uv_jet(&self, s: Jet, t: Jet) -> Result<[Jet; 2]> {
        let (k, kd) = (self.k.jet(s), self.k.djet(s));
        let (m, md) = (self.m.jet(t), self.m.djet(t));
        denominators(k, kd, m, md)?;
        let u = -(m * kd * s + m * k + kd + k * k - t * m * kd) / (m * kd);
        let v = -(m * m + t * k * md + m * k + md - k * s * md) / (k * md);
        Ok([u, v])
    }

    /// `x = f(t)`, `y = h(s)` and the printed rational `u, v`.
    pub fn generate(&self, s: f64, t: f64) -> Result<WeierstrassPoint> {
        let [u, v] = self.uv_jet(Jet::constant(s), Jet::constant(t))?;
        Ok(WeierstrassPoint {
            x: self.f.eval(t),
            y: self.h.eval(s),
            u: u.value(),
            v: v.value(),
        })
    }

    /// Solve `h(s) = y` on a bracket where `h` is monotone.
    pub fn s_of_y(&self, y: f64, bracket: [f64; 2]) -> Result<f64> {
        invert_monotone(&self.h, y, bracket)
    }

    /// Solve `f(t) = x` on a bracket where `f` is monotone.
    pub fn t_of_x(&self, x: f64, bracket: [f64; 2]) -> Result<f64> {
        invert_monotone(&self.f, x, bracket)
    }

    /// `(u, v)` at a point of the `(x, y)` plane.
    pub fn at_xy(&self, x: f64, y: f64, s_bracket: [f64; 2], t_bracket: [f64; 2]) -> Result<(f64, f64)> {
        let p = self.generate(self.s_of_y(y, s_bracket)?, self.t_of_x(x, t_bracket)?)?;
        Ok((p.u, p.v))
    }
}

/// Bisection followed by Newton polishing to `1e-12`.
pub fn invert_monotone(g: &ScalarFn, target: f64, bracket: [f64; 2]) -> Result<f64> {
    let [mut a, mut b] = bracket;
    let (ga, gb) = (g.eval(a) - target, g.eval(b) - target);
    if ga * gb > 0.0 {
        return Err(Error::domain(
            "inversion",
            format!("{target} not bracketed by [{a}, {b}]"),
        ));
    }
    let rising = gb > ga;
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if (g.eval(mid) - target > 0.0) == rising {
            b = mid;
        } else {
            a = mid;
        }
    }
    let mut t = 0.5 * (a + b);
    for _ in 0..5 {
        let d = g.d1(t);
        if d == 0.0 {
            break;
        }
        let step = (g.eval(t) - target) / d;
        t -= step;
        if step.abs() <= 1e-12 * (1.0 + t.abs()) {
            break;
        }
    }
    Ok(t)
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

/// Step of the `(s, t)` difference stencils.
pub const GATE_STEP: f64 = 1e-3;

/// Largest residual of the lightcone system over an `n × n` grid of
/// `s ∈ s_range`, `t ∈ t_range`, using fourth-order central differences in
/// `(s, t)` and the chain rule `w_x = w_t/ḟ`, `w_y = w_s/ḣ`, `w_xy = w_st/(ḟḣ)`.
pub fn residual_gate(quad: &WeierstrassQuad, s_range: [f64; 2], t_range: [f64; 2], n: usize) -> Result<f64> {
    let h = GATE_STEP;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = lerp(s_range, i, n);
            let t = lerp(t_range, j, n);
            let mut block = [[[0.0; 2]; 5]; 5];
            for (a, row) in block.iter_mut().enumerate() {
                for (b, cell) in row.iter_mut().enumerate() {
                    let p = quad.generate(s + (a as f64 - 2.0) * h, t + (b as f64 - 2.0) * h)?;
                    *cell = [p.u, p.v];
                }
            }
            let sum = block[2][2][0] + block[2][2][1];
            if sum.abs() <= GUARD {
                return Err(Error::MetricSingularity {
                    guard: "u+v",
                    value: sum,
                });
            }
            let (fd, hd) = (quad.f.d1(t), quad.h.d1(s));
            for c in 0..2 {
                let ws: f64 = (0..5).map(|a| D1[a] * block[a][2][c]).sum::<f64>() / h;
                let wt: f64 = (0..5).map(|b| D1[b] * block[2][b][c]).sum::<f64>() / h;
                let mut wst = 0.0;
                for a in 0..5 {
                    for b in 0..5 {
                        wst += D1[a] * D1[b] * block[a][b][c];
                    }
                }
                wst /= h * h;
                worst = worst.max(((wst - ws * wt / sum) / (fd * hd)).abs());
            }
        }
    }
    Ok(worst)
}

fn lerp(r: [f64; 2], i: usize, n: usize) -> f64 {
    if n <= 1 {
        r[0]
    } else {
        r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
    }
}

/// Which characteristic system a curve integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `(x; q₁..q₄; a₁, a₂, a₃)`
    First,
    /// `(y; p₁..p₄; b₁, b₂, b₃)`
    Second,
}

/// State on an integral curve: parameter, `q` (or `p`) and `a` (or `b`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveState {
    pub t: f64,
    pub q: [f64; 4],
    pub a: [f64; 3],
}

/// Integral curve of one characteristic system driven by the two controls
/// `a₂, a₃` (resp. `b₂, b₃`).
#[derive(Clone, Debug)]
pub struct CharacteristicCurve {
    pub side: Side,
    pub start: CurveState,
    pub controls: [ScalarFn; 2],
    pub opts: OdeOptions,
    pub samples: Vec<CurveState>,
}

pub type CharacteristicCurve1 = CharacteristicCurve;
pub type CharacteristicCurve2 = CharacteristicCurve;

/// Derivative of `(q₁..q₄, a₁)` along the curve.
fn curve_rhs(side: Side, q: &[f64], a: [f64; 3]) -> Result<[f64; 5]> {
    let [a1, a2, a3] = a;
    match side {
        Side::First => {
            let q3 = q[2];
            if q3.abs() <= GUARD {
                return Err(Error::guard("q3", q3));
            }
            Ok([q3, a1 / q3 * (q[0] + q[1]), a1 + a3 * q3, a1 * q[3] / q3, a2])
        }
        Side::Second => {
            let p4 = q[3];
            if p4.abs() <= GUARD {
                return Err(Error::guard("p4", p4));
            }
            Ok([a1 / p4 * (q[0] + q[1]), p4, a1 * q[2] / p4, a1 + a3 * p4, a2])
        }
    }
}

impl CharacteristicCurve {
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let a = [y[4], self.controls[0].eval(t), self.controls[1].eval(t)];
        let d = curve_rhs(self.side, &y[..4], a)?;
        dy.copy_from_slice(&d);
        Ok(())
    }

    fn state(&self, t: f64, y: &[f64]) -> CurveState {
        CurveState {
            t,
            q: [y[0], y[1], y[2], y[3]],
            a: [y[4], self.controls[0].eval(t), self.controls[1].eval(t)],
        }
    }

    /// States at arbitrary parameters (any order).
    pub fn states(&self, ts: &[f64]) -> Result<Vec<CurveState>> {
        let t0 = self.start.t;
        let y0 = [
            self.start.q[0],
            self.start.q[1],
            self.start.q[2],
            self.start.q[3],
            self.start.a[0],
        ];
        let mut idx: Vec<usize> = (0..ts.len()).collect();
        idx.sort_by(|&i, &j| ts[i].total_cmp(&ts[j]));
        let up: Vec<usize> = idx.iter().copied().filter(|&i| ts[i] >= t0).collect();
        let down: Vec<usize> = idx.iter().rev().copied().filter(|&i| ts[i] < t0).collect();
        let mut out = vec![self.start; ts.len()];
        for branch in [up, down] {
            if branch.is_empty() {
                continue;
            }
            let targets: Vec<f64> = branch.iter().map(|&i| ts[i]).collect();
            let ys = integrate(|t, y, dy| self.rhs(t, y, dy), t0, &y0, &targets, &self.opts)?;
            for (&i, y) in branch.iter().zip(ys) {
                out[i] = self.state(ts[i], &y);
            }
        }
        for s in &out {
            self.check(s)?;
        }
        Ok(out)
    }

    pub fn state_at(&self, t: f64) -> Result<CurveState> {
        Ok(self.states(&[t])?[0])
    }

    fn check(&self, s: &CurveState) -> Result<()> {
        let names = match self.side {
            Side::First => [("q3", 2), ("q4", 3)],
            Side::Second => [("p3", 2), ("p4", 3)],
        };
        for (name, i) in names {
            if s.q[i].abs() <= GUARD {
                return Err(Error::guard(name, s.q[i]));
            }
        }
        Ok(())
    }

    /// `d(q, a₁)/dt` at a state, read off the curve's defining field.
    pub fn velocity(&self, s: &CurveState) -> Result<[f64; 5]> {
        curve_rhs(self.side, &s.q, s.a)
    }

    /// The five Pfaffian forms evaluated on `(1, q', a₁')`.
    pub fn forms(&self, s: &CurveState, dq: [f64; 4], da1: f64) -> Result<[f64; 5]> {
        let v = curve_rhs(self.side, &s.q, s.a)?;
        Ok([da1 - v[4], dq[0] - v[0], dq[1] - v[1], dq[2] - v[2], dq[3] - v[3]])
    }
}

fn integrate_characteristic(
    side: Side,
    controls: [ScalarFn; 2],
    start: CurveState,
    span: [f64; 2],
    n_samples: usize,
    opts: &OdeOptions,
) -> Result<CharacteristicCurve> {
    let mut curve = CharacteristicCurve {
        side,
        start: CurveState {
            a: [start.a[0], controls[0].eval(start.t), controls[1].eval(start.t)],
            ..start
        },
        controls,
        opts: *opts,
        samples: Vec::new(),
    };
    curve.check(&curve.start)?;
    let ts: Vec<f64> = (0..n_samples).map(|i| lerp(span, i, n_samples)).collect();
    curve.samples = curve.states(&ts)?;
    Ok(curve)
}

/// Integral curve of the first characteristic system; `start.a[0]` is
/// `a₁` at `start.t`, and `a₂, a₃` are the given controls of `x`.
pub fn integrate_characteristic_1(
    a2: ScalarFn,
    a3: ScalarFn,
    start: CurveState,
    span: [f64; 2],
    n_samples: usize,
    opts: &OdeOptions,
) -> Result<CharacteristicCurve1> {
    integrate_characteristic(Side::First, [a2, a3], start, span, n_samples, opts)
}

/// Integral curve of the second characteristic system in `(y, p, b)`.
pub fn integrate_characteristic_2(
    b2: ScalarFn,
    b3: ScalarFn,
    start: CurveState,
    span: [f64; 2],
    n_samples: usize,
    opts: &OdeOptions,
) -> Result<CharacteristicCurve2> {
    integrate_characteristic(Side::Second, [b2, b3], start, span, n_samples, opts)
}

/// `(x, y) ↦ (u, v)` given by the first two components of `π(q(x), p(y))`.
#[derive(Clone, Debug)]
pub struct SuperposedSolution {
    pub c1: CharacteristicCurve1,
    pub c2: CharacteristicCurve2,
}

/// Values and exact residual of a superposed solution on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperposedGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `[iy][ix]`
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub max_residual: f64,
}

pub fn superposed_solution(c1: CharacteristicCurve1, c2: CharacteristicCurve2) -> Result<SuperposedSolution> {
    if c1.side != Side::First || c2.side != Side::Second {
        return Err(Error::Config(
            "superposition needs a first and a second characteristic curve".into(),
        ));
    }
    Ok(SuperposedSolution { c1, c2 })
}

impl SuperposedSolution {
    /// `π(q, p)` with `q = q(x) + q'(x)ε₁`, `p = p(y) + p'(y)ε₂`; the
    /// coefficient of `ε₁ε₂` is the mixed partial.
    fn combine(&self, q: &CurveState, p: &CurveState) -> Result<[Jet; 4]> {
        if q.q[3].abs() <= GUARD {
            return Err(Error::guard("q4", q.q[3]));
        }
        if p.q[2].abs() <= GUARD {
            return Err(Error::guard("p3", p.q[2]));
        }
        let dq = self.c1.velocity(q)?;
        let dp = self.c2.velocity(p)?;
        let e1 = |v: f64, d: f64| Jet::constant(v).extend(Jet::constant(d)).extend(Jet::constant(0.0));
        let e2 = |v: f64, d: f64| Jet::constant(v).extend(Jet::constant(0.0)).extend(Jet::constant(d));
        let qj = [0, 1, 2, 3].map(|i| e1(q.q[i], dq[i]));
        let pj = [0, 1, 2, 3].map(|i| e2(p.q[i], dp[i]));
        Ok(superpose_jet(&qj, &pj))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let q = self.c1.state_at(x)?;
        let p = self.c2.state_at(y)?;
        let z = self.combine(&q, &p)?;
        Ok((z[0].value(), z[1].value()))
    }

    /// Evaluate on the grid `xs × ys` with the exact lightcone residual.
    pub fn on_grid(&self, xs: &[f64], ys: &[f64]) -> Result<SuperposedGrid> {
        let qs = self.c1.states(xs)?;
        let ps = self.c2.states(ys)?;
        let mut out = SuperposedGrid {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            u: vec![vec![0.0; xs.len()]; ys.len()],
            v: vec![vec![0.0; xs.len()]; ys.len()],
            max_residual: 0.0,
        };
        for (iy, p) in ps.iter().enumerate() {
            for (ix, q) in qs.iter().enumerate() {
                let z = self.combine(q, p)?;
                let s = z[0].value() + z[1].value();
                if s.abs() <= GUARD {
                    return Err(Error::MetricSingularity { guard: "u+v", value: s });
                }
                for w in &z[..2] {
                    let r = w.coeff(0b11) - w.coeff(0b01) * w.coeff(0b10) / s;
                    out.max_residual = out.max_residual.max(r.abs());
                }
                out.u[iy][ix] = z[0].value();
                out.v[iy][ix] = z[1].value();
            }
        }
        Ok(out)
    }
}
