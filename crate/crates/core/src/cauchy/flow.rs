//! Integration of the Cauchy characteristic flow in `y` at fixed `x`.

use std::cell::Cell;

use super::{lift, AdaptedPoint, CauchyData, KFunctions};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::ode::{integrate_to, OdeOptions};
use crate::quadrature::PanelRule;

const GUARD_Z4: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 14;

fn map_flow_error(e: Error) -> Error {
    match e {
        Error::DivisionByZero { quantity, value } => Error::guard(quantity, value),
        other => other,
    }
}

fn finish(start: &AdaptedPoint, y: f64, z: [f64; 4], k: &KFunctions) -> AdaptedPoint {
    AdaptedPoint {
        x: start.x,
        y,
        z,
        a: start.a,
        b: k.b_at(y),
    }
}

/// Adaptive Dormand–Prince integration of the field components from
/// `start.y` to `y_target`. `x` and `a` are carried unchanged.
///
/// Where `z₄` changes sign the field is `0/0` in its `z₁, z₃` components; the
/// flow is then recomputed in the regular chart of [`flow_rk_regular`].
pub fn flow_rk(start: &AdaptedPoint, y_target: f64, k: &KFunctions, opts: &OdeOptions) -> Result<AdaptedPoint> {
    if y_target == start.y {
        return Ok(*start);
    }
    if start.z[3].abs() <= GUARD_Z4 {
        return Err(Error::guard("z4", start.z[3]));
    }
    let field = k.field();
    let side = start.z[3].signum();
    let crossed = Cell::new(false);
    let rhs = |y: f64, z: &[f64], dz: &mut [f64]| -> Result<()> {
        if z[3] * side <= 0.0 {
            crossed.set(true);
        }
        if z[3].abs() <= GUARD_Z4 {
            return Err(Error::guard("z4", z[3]));
        }
        let p = [
            Jet::constant(y),
            Jet::constant(z[0]),
            Jet::constant(z[1]),
            Jet::constant(z[2]),
            Jet::constant(z[3]),
        ];
        let v = field.eval_jet(&p)?;
        for i in 0..4 {
            dz[i] = v[i + 1].value();
        }
        Ok(())
    };
    let r = integrate_to(rhs, start.y, &start.z, y_target, opts).map_err(map_flow_error);
    if crossed.get() || matches!(&r, Err(Error::GuardViolation { guard, .. }) if guard == "z4") {
        return flow_rk_regular(start, y_target, k, opts);
    }
    let z = r?;
    Ok(finish(start, y_target, [z[0], z[1], z[2], z[3]], k))
}

/// The same flow in the chart `(z₂, z₄, ω, σ)` with `ω = (z₁+z₂)/z₄` and
/// `σ = z₃/z₄`, where it reads `ω' = 1 − k₂ω`, `σ' = −k₂σ` and is regular
/// through `z₄ = 0`.
pub fn flow_rk_regular(start: &AdaptedPoint, y_target: f64, k: &KFunctions, opts: &OdeOptions) -> Result<AdaptedPoint> {
    let [z1, z2, z3, z4] = start.z;
    if z4.abs() <= GUARD_Z4 {
        return Err(Error::guard("z4", z4));
    }
    let y0 = [z2, z4, (z1 + z2) / z4, z3 / z4];
    let rhs = |y: f64, s: &[f64], ds: &mut [f64]| -> Result<()> {
        let (a, b) = (k.k1.eval(y), k.k2.eval(y));
        ds[0] = s[1];
        ds[1] = b * s[1] + a;
        ds[2] = 1.0 - b * s[2];
        ds[3] = -b * s[3];
        Ok(())
    };
    let s = integrate_to(rhs, start.y, &y0, y_target, opts)?;
    let z = [s[2] * s[1] - s[0], s[0], s[3] * s[1], s[1]];
    if z.iter().any(|v| !v.is_finite() || v.abs() > opts.max_amplitude) {
        return Err(Error::BlowUp { t: y_target });
    }
    Ok(finish(start, y_target, z, k))
}

/// Node values of `f` on `panels` equal panels of `[a, b]`, and the running
/// integral `∫_a^{node}`, both flattened.
struct Grid<'r> {
    rule: &'r PanelRule,
    edges: Vec<f64>,
}

impl<'r> Grid<'r> {
    fn new(rule: &'r PanelRule, a: f64, b: f64, panels: usize) -> Self {
        let edges = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
        Grid { rule, edges }
    }

    fn nodes(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .flat_map(|w| self.rule.map_nodes(w[0], w[1]))
            .collect()
    }

    /// Running integral at every node, and the full integral.
    fn cumulative(&self, g: &[f64]) -> (Vec<f64>, f64) {
        let n = self.rule.len();
        let mut out = Vec::with_capacity(g.len());
        let mut offset = 0.0;
        for (p, w) in self.edges.windows(2).enumerate() {
            let slice = &g[p * n..(p + 1) * n];
            out.extend(self.rule.running(w[0], w[1], slice).into_iter().map(|v| v + offset));
            offset += self.rule.total(w[0], w[1], slice);
        }
        (out, offset)
    }
}

fn chain(
    start: &AdaptedPoint,
    y1: f64,
    k: &KFunctions,
    rule: &PanelRule,
    panels: usize,
    opts: &OdeOptions,
) -> Result<[f64; 4]> {
    let grid = Grid::new(rule, start.y, y1, panels);
    let ys = grid.nodes();
    let k1: Vec<f64> = ys.iter().map(|&y| k.k1.eval(y)).collect();
    let k2: Vec<f64> = ys.iter().map(|&y| k.k2.eval(y)).collect();
    if k1.iter().chain(&k2).any(|v| !v.is_finite()) {
        return Err(Error::guard("k", f64::NAN));
    }
    let [z1_0, z2_0, z3_0, z4_0] = start.z;

    // z₄' = k₂ z₄ + k₁
    let (kk, kk_end) = grid.cumulative(&k2);
    let g: Vec<f64> = kk.iter().zip(&k1).map(|(kv, a)| (-kv).exp() * a).collect();
    let (gi, gi_end) = grid.cumulative(&g);
    let z4: Vec<f64> = kk.iter().zip(&gi).map(|(kv, i)| kv.exp() * (z4_0 + i)).collect();
    let z4_end = kk_end.exp() * (z4_0 + gi_end);
    if z4
        .iter()
        .chain([&z4_end])
        .any(|v| v.abs() <= GUARD_Z4 || !v.is_finite())
    {
        return Err(Error::guard("z4", z4_end));
    }
    let (_, q_end) = grid.cumulative(&z4);
    let z2_end = z2_0 + q_end;

    let side = z4_0.signum();
    if z4.iter().chain([&z4_end]).any(|v| v * side < 0.0) {
        // ∫k₁/z₄ is logarithmic across a sign change of z₄; use the regular
        // chart ω = w/z₄, σ = z₃/z₄ with ω' = 1 − k₂ω, σ' = −k₂σ instead
        let e: Vec<f64> = kk.iter().map(|v| v.exp()).collect();
        let (_, ei_end) = grid.cumulative(&e);
        let decay = (-kk_end).exp();
        let omega = decay * ((z1_0 + z2_0) / z4_0 + ei_end);
        let sigma = decay * z3_0 / z4_0;
        let z = [omega * z4_end - z2_end, z2_end, sigma * z4_end, z4_end];
        return check_amplitude(z, y1, opts);
    }

    // z₃' = (k₁/z₄) z₃
    let ratio: Vec<f64> = k1.iter().zip(&z4).map(|(a, b)| a / b).collect();
    let (l, l_end) = grid.cumulative(&ratio);
    let z3_end = z3_0 * l_end.exp();

    // w' = (k₁/z₄) w + z₄ with w = z₁ + z₂
    let h: Vec<f64> = l.iter().zip(&z4).map(|(lv, z)| (-lv).exp() * z).collect();
    let (_, h_end) = grid.cumulative(&h);
    let w_end = l_end.exp() * (z1_0 + z2_0 + h_end);

    check_amplitude([w_end - z2_end, z2_end, z3_end, z4_end], y1, opts)
}

fn check_amplitude(z: [f64; 4], y: f64, opts: &OdeOptions) -> Result<[f64; 4]> {
    if z.iter().any(|v| !v.is_finite() || v.abs() > opts.max_amplitude) {
        return Err(Error::BlowUp { t: y });
    }
    Ok(z)
}

/// The same flow solved as a triangular linear chain by integrating factors
/// and Gauss–Legendre panel quadrature. Panels are doubled until two
/// successive results agree to `opts.tol`.
pub fn flow_quadrature(start: &AdaptedPoint, y_target: f64, k: &KFunctions, opts: &OdeOptions) -> Result<AdaptedPoint> {
    if y_target == start.y {
        return Ok(*start);
    }
    let rule = PanelRule::new(16);
    let mut panels = ((y_target - start.y).abs() / 0.25).ceil().max(1.0) as usize;
    let mut prev = chain(start, y_target, k, &rule, panels, opts)?;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = chain(start, y_target, k, &rule, panels, opts)?;
        let agree = prev
            .iter()
            .zip(&next)
            .all(|(a, b)| (a - b).abs() <= opts.tol * (1.0 + b.abs()));
        if agree {
            return Ok(finish(start, y_target, next, k));
        }
        prev = next;
    }
    Err(Error::QuadratureFailure(format!(
        "no agreement with {MAX_PANELS} panels on [{}, {y_target}]",
        start.y
    )))
}

/// Lift at `x` and flow to `y`.
pub fn solution_at(data: &CauchyData, k: &KFunctions, x: f64, y: f64, opts: &OdeOptions) -> Result<AdaptedPoint> {
    let p = lift(data, x)?;
    flow_rk(&p, y, k, opts)
}

#[cfg(test)]
mod tests {
    use super::super::{compute_k, oracle_41, oracle_42};
    use super::*;
    use crate::func::ScalarFn;

    #[test]
    fn zero_time_is_identity() {
        let d = CauchyData::example41();
        let k = compute_k(&d, [0.0, 1.0], 10).unwrap();
        let p = lift(&d, 0.3).unwrap();
        assert_eq!(flow_rk(&p, 0.3, &k, &OdeOptions::default()).unwrap(), p);
        assert_eq!(flow_quadrature(&p, 0.3, &k, &OdeOptions::default()).unwrap(), p);
    }

    #[test]
    fn example41_flow_matches_closed_form() {
        let d = CauchyData::example41();
        let k = compute_k(&d, [0.0, 1.0], 10).unwrap();
        let p = flow_rk(&lift(&d, 0.0).unwrap(), 0.5, &k, &OdeOptions::default()).unwrap();
        let (u, v) = oracle_41(0.0, 0.5).unwrap();
        assert!((p.u() - u).abs() < 1e-8 && (p.v() - v).abs() < 1e-8);
    }

    #[test]
    fn example42_flow_matches_closed_form() {
        let d = CauchyData::example42();
        let k = compute_k(&d, [0.5, 2.0], 10).unwrap();
        let opts = OdeOptions::default();
        let p = lift(&d, 1.0).unwrap();
        let r = flow_rk(&p, 2.0, &k, &opts).unwrap();
        let (u, v) = oracle_42(1.0, 2.0).unwrap();
        assert!((r.u() - u).abs() < 1e-8 && (r.v() - v).abs() < 1e-8, "{r:?}");
        // z₄ = y(1 + x²/2 − y²/2) passes through zero at y = √3
        assert!((r.z[3] + 1.0).abs() < 1e-8);
        let q = flow_quadrature(&p, 2.0, &k, &opts).unwrap();
        assert!((q.z[3] + 1.0).abs() < 1e-10);
        for i in 0..4 {
            assert!((q.z[i] - r.z[i]).abs() < 1e-8);
        }
        let q = flow_quadrature(&p, 1.7, &k, &opts).unwrap();
        let r = flow_rk(&p, 1.7, &k, &opts).unwrap();
        for i in 0..4 {
            assert!((q.z[i] - r.z[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn trivial_chain() {
        let zero = ScalarFn::constant(0.0);
        let k = KFunctions::new(zero.clone(), zero);
        let p = AdaptedPoint {
            x: 0.0,
            y: 0.0,
            z: [0.0, 0.0, 1.0, 1.0],
            a: [0.0; 3],
            b: [0.0; 3],
        };
        let q = flow_quadrature(&p, 1.0, &k, &OdeOptions::default()).unwrap();
        for (a, b) in q.z.iter().zip([0.0, 1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let r = flow_rk(&p, 1.0, &k, &OdeOptions::default()).unwrap();
        for (a, b) in r.z.iter().zip([0.0, 1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_flow() {
        let d = CauchyData::example41();
        let k = compute_k(&d, [0.0, 1.0], 10).unwrap();
        let opts = OdeOptions::default();
        let r = flow_rk(&lift(&d, 0.8).unwrap(), 0.2, &k, &opts).unwrap();
        let q = flow_quadrature(&lift(&d, 0.8).unwrap(), 0.2, &k, &opts).unwrap();
        let (u, v) = oracle_41(0.8, 0.2).unwrap();
        assert!((r.u() - u).abs() < 1e-8 && (r.v() - v).abs() < 1e-8);
        for i in 0..4 {
            assert!((r.z[i] - q.z[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn z4_guard_is_reported() {
        let k = KFunctions::new(ScalarFn::constant(-1.0), ScalarFn::constant(0.0));
        let p = AdaptedPoint {
            x: 0.0,
            y: 0.0,
            z: [1.0, 1.0, 1.0, 0.0],
            a: [0.0; 3],
            b: [0.0; 3],
        };
        let e = flow_rk(&p, 1.0, &k, &OdeOptions::default()).unwrap_err();
        assert!(matches!(e, Error::GuardViolation { .. }), "{e:?}");
        assert!(flow_quadrature(&p, 1.0, &k, &OdeOptions::default()).is_err());
    }

    #[test]
    fn crossing_uses_the_regular_chart() {
        // z₄ = 0.5 − y vanishes at y = 0.5; with k₂ = 0: ω = ω₀ + y, σ = σ₀
        let k = KFunctions::new(ScalarFn::constant(-1.0), ScalarFn::constant(0.0));
        let p = AdaptedPoint {
            x: 0.0,
            y: 0.0,
            z: [1.0, 1.0, 1.0, 0.5],
            a: [0.0; 3],
            b: [0.0; 3],
        };
        let opts = OdeOptions::default();
        let r = flow_rk(&p, 1.0, &k, &opts).unwrap();
        let q = flow_quadrature(&p, 1.0, &k, &opts).unwrap();
        let z4 = -0.5;
        let z2 = 1.0 + 0.5 - 0.5;
        let want = [(4.0 + 1.0) * z4 - z2, z2, 2.0 * z4, z4];
        for i in 0..4 {
            assert!((r.z[i] - want[i]).abs() < 1e-9, "{r:?}");
            assert!((q.z[i] - want[i]).abs() < 1e-9, "{q:?}");
        }
    }
}
