//! Leapfrog solver for the initial-boundary-value problem of a string on a
//! surface: `w^γ_ττ − c² w^γ_ξξ + Γ^γ_{αβ}(w)(w^α_τ w^β_τ − c² w^α_ξ w^β_ξ) = 0`
//! with Dirichlet ends.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::geometry::SurfaceMetric;
use crate::jet::Jet;

/// Largest admissible `c Δτ/Δξ`.
pub const CFL_MAX: f64 = 0.9;
/// Amplitude at which a run is declared blown up.
pub const AMPLITUDE_MAX: f64 = 1e6;
/// Consecutive frame points closer than this mark an immersion failure.
pub const IMMERSION_EPS: f64 = 1e-8;
/// Spatial sizes from which a level is updated in parallel.
const PAR_THRESHOLD: usize = 1024;

/// How the Christoffel term is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flux {
    /// From the metric's Christoffel symbols.
    #[default]
    Christoffel,
    /// The λ equations written out by hand (requires `c = 1`).
    LambdaDirect,
}

#[derive(Clone, Debug)]
pub struct Ibvp {
    pub metric: SurfaceMetric,
    pub position: [ScalarFn; 2],
    pub velocity: [ScalarFn; 2],
    /// Dirichlet values at `ξ₀` as functions of `τ`.
    pub left: [ScalarFn; 2],
    /// Dirichlet values at `ξ₁` as functions of `τ`.
    pub right: [ScalarFn; 2],
    pub domain: [f64; 2],
    pub duration: f64,
    pub c: f64,
    pub flux: Flux,
}

impl Ibvp {
    fn validate(&self) -> Result<()> {
        let [a, b] = self.domain;
        if !(a < b) || !(self.duration > 0.0) || !(self.c > 0.0) {
            return Err(Error::Config("IBVP needs ξ₀ < ξ₁, T > 0 and c > 0".into()));
        }
        if self.flux == Flux::LambdaDirect && self.c != 1.0 {
            return Err(Error::Config("the hand-written λ flux assumes c = 1".into()));
        }
        for i in 0..2 {
            let dl = (self.position[i].eval(a) - self.left[i].eval(0.0)).abs();
            let dr = (self.position[i].eval(b) - self.right[i].eval(0.0)).abs();
            if dl > 1e-12 || dr > 1e-12 {
                return Err(Error::Config(format!(
                    "initial profile {i} disagrees with the boundary data ({dl:e}, {dr:e})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub d_xi: f64,
    pub cfl: f64,
    pub amplitude_max: f64,
}

impl SimOptions {
    pub fn new(d_xi: f64, cfl: f64) -> Self {
        SimOptions {
            d_xi,
            cfl,
            amplitude_max: AMPLITUDE_MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Running,
    Finished,
    BlownUp {
        level: usize,
        tau: f64,
        xi: f64,
        cause: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub metric: String,
    pub xi: Vec<f64>,
    pub d_xi: f64,
    pub d_tau: f64,
    pub cfl: f64,
    pub c: f64,
    pub taus: Vec<f64>,
    /// `levels[n][j] = (u¹, u²)` at `(ξ_j, τ_n)`.
    pub levels: Vec<Vec<[f64; 2]>>,
    pub status: RunStatus,
}

impl GridSolution {
    /// Index of the stored level closest to `tau`.
    pub fn level_near(&self, tau: f64) -> usize {
        let n = ((tau / self.d_tau).round().max(0.0)) as usize;
        n.min(self.levels.len() - 1)
    }

    /// Discrete energy `∫ ½(g(w_τ,w_τ) + c² g(w_ξ,w_ξ)) dξ` at an interior
    /// level, with cell-centred spatial differences and centred time
    /// differences.
    pub fn energy(&self, metric: &SurfaceMetric, n: usize) -> Result<f64> {
        if n == 0 || n + 1 >= self.levels.len() {
            return Err(Error::domain("energy", format!("level {n} has no two neighbours")));
        }
        let (prev, cur, next) = (&self.levels[n - 1], &self.levels[n], &self.levels[n + 1]);
        let vel = |j: usize, c: usize| (next[j][c] - prev[j][c]) / (2.0 * self.d_tau);
        let mut e = 0.0;
        for j in 0..cur.len() - 1 {
            let w = [0.5 * (cur[j][0] + cur[j + 1][0]), 0.5 * (cur[j][1] + cur[j + 1][1])];
            metric.check(w)?;
            let w_xi = [
                (cur[j + 1][0] - cur[j][0]) / self.d_xi,
                (cur[j + 1][1] - cur[j][1]) / self.d_xi,
            ];
            let w_tau = [0.5 * (vel(j, 0) + vel(j + 1, 0)), 0.5 * (vel(j, 1) + vel(j + 1, 1))];
            e += metric.hamiltonian_density(w, w_tau, w_xi, self.c) * self.d_xi;
        }
        Ok(e)
    }
}

/// `w_ττ` from the PDE at one point.
fn acceleration(p: &Ibvp, w: [f64; 2], w_tau: [f64; 2], w_xi: [f64; 2], w_xixi: [f64; 2]) -> Result<[f64; 2]> {
    let c2 = p.c * p.c;
    match p.flux {
        Flux::Christoffel => {
            let g = p.metric.christoffel(w)?;
            let mut out = [0.0; 2];
            for (gm, o) in out.iter_mut().enumerate() {
                let mut acc = c2 * w_xixi[gm];
                for a in 0..2 {
                    for b in 0..2 {
                        acc -= g[gm][a][b] * (w_tau[a] * w_tau[b] - c2 * w_xi[a] * w_xi[b]);
                    }
                }
                *o = acc;
            }
            Ok(out)
        }
        Flux::LambdaDirect => lambda_direct(w, w_tau, w_xi, w_xixi),
    }
}

/// The λ string equations in their explicit form (`c = 1`).
pub fn lambda_direct(w: [f64; 2], w_tau: [f64; 2], w_xi: [f64; 2], w_xixi: [f64; 2]) -> Result<[f64; 2]> {
    let u1 = w[0];
    if u1.abs() <= 1e-12 {
        return Err(Error::MetricSingularity { guard: "u1", value: u1 });
    }
    let [a_t, b_t] = w_tau;
    let [a_x, b_x] = w_xi;
    Ok([
        w_xixi[0] + (a_t * a_t + b_t * b_t - a_x * a_x - b_x * b_x) / (2.0 * u1),
        w_xixi[1] + (a_t * b_t - a_x * b_x) / u1,
    ])
}

/// Christoffel-form acceleration, exposed for cross-checks.
pub fn lambda_christoffel(w: [f64; 2], w_tau: [f64; 2], w_xi: [f64; 2], w_xixi: [f64; 2]) -> Result<[f64; 2]> {
    let metric = SurfaceMetric::by_name("lambda")?;
    let g = metric.christoffel(w)?;
    let mut out = [0.0; 2];
    for (gm, o) in out.iter_mut().enumerate() {
        let mut acc = w_xixi[gm];
        for a in 0..2 {
            for b in 0..2 {
                acc -= g[gm][a][b] * (w_tau[a] * w_tau[b] - w_xi[a] * w_xi[b]);
            }
        }
        *o = acc;
    }
    Ok(out)
}

enum Halt {
    Guard { j: usize, cause: String },
}

/// Interior update; `vel(j)` supplies the velocity estimate at node `j`.
fn step_interior<V>(
    p: &Ibvp,
    cur: &[[f64; 2]],
    prev: &[[f64; 2]],
    dt: f64,
    dx: f64,
    vel: V,
) -> std::result::Result<Vec<[f64; 2]>, Halt>
where
    V: Fn(usize) -> [f64; 2] + Sync,
{
    let n = cur.len();
    let node = |j: usize| -> std::result::Result<[f64; 2], Halt> {
        let w = cur[j];
        let w_xi = [
            (cur[j + 1][0] - cur[j - 1][0]) / (2.0 * dx),
            (cur[j + 1][1] - cur[j - 1][1]) / (2.0 * dx),
        ];
        let w_xixi = [
            (cur[j + 1][0] - 2.0 * w[0] + cur[j - 1][0]) / (dx * dx),
            (cur[j + 1][1] - 2.0 * w[1] + cur[j - 1][1]) / (dx * dx),
        ];
        if !p.metric.in_domain(w) {
            return Err(Halt::Guard {
                j,
                cause: "metric-singularity".into(),
            });
        }
        let a = acceleration(p, w, vel(j), w_xi, w_xixi).map_err(|e| Halt::Guard {
            j,
            cause: e.tag().into(),
        })?;
        Ok([
            2.0 * w[0] - prev[j][0] + dt * dt * a[0],
            2.0 * w[1] - prev[j][1] + dt * dt * a[1],
        ])
    };
    if n >= PAR_THRESHOLD {
        (1..n - 1).into_par_iter().map(node).collect()
    } else {
        (1..n - 1).map(node).collect()
    }
}

/// Run the predictor-corrector leapfrog scheme to `problem.duration`.
pub fn simulate(problem: &Ibvp, opts: &SimOptions) -> Result<GridSolution> {
    problem.validate()?;
    if !(opts.cfl > 0.0) || opts.cfl > CFL_MAX {
        return Err(Error::CflViolation {
            ratio: opts.cfl,
            max: CFL_MAX,
        });
    }
    let [x0, x1] = problem.domain;
    let cells = ((x1 - x0) / opts.d_xi).round() as usize;
    if cells < 2 || ((x1 - x0) / cells as f64 - opts.d_xi).abs() > 1e-9 * opts.d_xi {
        return Err(Error::Config(format!("Δξ = {} does not divide the domain", opts.d_xi)));
    }
    let dx = (x1 - x0) / cells as f64;
    let steps = (problem.duration * problem.c / (opts.cfl * dx)).ceil() as usize;
    let dt = problem.duration / steps as f64;
    let cfl = problem.c * dt / dx;
    let xi: Vec<f64> = (0..=cells)
        .map(|j| if j == cells { x1 } else { x0 + j as f64 * dx })
        .collect();

    let boundary = |lvl: &mut Vec<[f64; 2]>, tau: f64| {
        lvl[0] = [problem.left[0].eval(tau), problem.left[1].eval(tau)];
        lvl[cells] = [problem.right[0].eval(tau), problem.right[1].eval(tau)];
    };

    // level 0 and its exact derivatives
    let mut u0 = Vec::with_capacity(cells + 1);
    for &x in &xi {
        let w = [problem.position[0].eval(x), problem.position[1].eval(x)];
        if !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::domain("initial data", format!("non-finite at ξ = {x}")));
        }
        u0.push(w);
    }
    boundary(&mut u0, 0.0);
    let mut u1 = u0.clone();
    for j in 1..cells {
        let x = Jet::constant(xi[j]);
        let w = u0[j];
        if !problem.metric.in_domain(w) {
            return Err(Error::guard(format!("metric at ξ = {}, level 0", xi[j]), w[0]));
        }
        let d = |f: &ScalarFn| (f.djet(x).value(), f.d2jet(x).value());
        let (a1, a2) = d(&problem.position[0]);
        let (b1, b2) = d(&problem.position[1]);
        let v = [problem.velocity[0].eval(xi[j]), problem.velocity[1].eval(xi[j])];
        let a = acceleration(problem, w, v, [a1, b1], [a2, b2])
            .map_err(|e| Error::guard(format!("{} at ξ = {}, level 0", e.tag(), xi[j]), w[0]))?;
        for c in 0..2 {
            u1[j][c] = w[c] + dt * v[c] + 0.5 * dt * dt * a[c];
        }
    }
    boundary(&mut u1, dt);

    let mut sol = GridSolution {
        metric: problem.metric.name.clone(),
        xi,
        d_xi: dx,
        d_tau: dt,
        cfl,
        c: problem.c,
        taus: vec![0.0, dt],
        levels: vec![u0, u1],
        status: RunStatus::Running,
    };
    if let Some(j) = overflow(&sol.levels[1], opts.amplitude_max) {
        sol.status = blown(&sol, 1, j, "amplitude");
        return Ok(sol);
    }

    for n in 1..steps {
        let tau_next = (n + 1) as f64 * dt;
        let (prev, cur) = (&sol.levels[n - 1], &sol.levels[n]);
        let predicted = step_interior(problem, cur, prev, dt, dx, |j| {
            [(cur[j][0] - prev[j][0]) / dt, (cur[j][1] - prev[j][1]) / dt]
        });
        let predicted = match predicted {
            Ok(v) => v,
            Err(Halt::Guard { j, cause }) => {
                sol.status = blown(&sol, n, j + 1, &cause);
                return Ok(sol);
            }
        };
        let corrected = step_interior(problem, cur, prev, dt, dx, |j| {
            let q = predicted[j - 1];
            [(q[0] - prev[j][0]) / (2.0 * dt), (q[1] - prev[j][1]) / (2.0 * dt)]
        });
        let interior = match corrected {
            Ok(v) => v,
            Err(Halt::Guard { j, cause }) => {
                sol.status = blown(&sol, n, j + 1, &cause);
                return Ok(sol);
            }
        };
        let mut next = Vec::with_capacity(cells + 1);
        next.push([0.0; 2]);
        next.extend(interior);
        next.push([0.0; 2]);
        boundary(&mut next, tau_next);
        sol.taus.push(tau_next);
        sol.levels.push(next);
        if let Some(j) = overflow(&sol.levels[n + 1], opts.amplitude_max) {
            sol.status = blown(&sol, n + 1, j, "amplitude");
            return Ok(sol);
        }
    }
    sol.status = RunStatus::Finished;
    Ok(sol)
}

fn overflow(level: &[[f64; 2]], max: f64) -> Option<usize> {
    level.iter().position(|w| !(w[0].abs() <= max && w[1].abs() <= max))
}

fn blown(sol: &GridSolution, level: usize, j: usize, cause: &str) -> RunStatus {
    RunStatus::BlownUp {
        level,
        tau: sol.taus[level.min(sol.taus.len() - 1)],
        xi: sol.xi[j],
        cause: cause.into(),
    }
}

/// The two figure setups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Euclidean,
    Lambda,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Scenario::Euclidean),
            "lambda" => Ok(Scenario::Lambda),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

/// The clamped string on `[0, 2]`: `u¹ = ξ`, `u² = 1`, `∂_τu² = ξ(ξ−2)`.
pub fn figure_problem(which: Scenario, duration: f64) -> Result<Ibvp> {
    let metric = SurfaceMetric::by_name(match which {
        Scenario::Euclidean => "euclidean",
        Scenario::Lambda => "lambda",
    })?;
    Ok(Ibvp {
        metric,
        position: [ScalarFn::polynomial(&[0.0, 1.0]), ScalarFn::constant(1.0)],
        velocity: [ScalarFn::constant(0.0), ScalarFn::polynomial(&[0.0, -2.0, 1.0])],
        left: [ScalarFn::constant(0.0), ScalarFn::constant(1.0)],
        right: [ScalarFn::constant(2.0), ScalarFn::constant(1.0)],
        domain: [0.0, 2.0],
        duration,
        c: 1.0,
        flux: Flux::Christoffel,
    })
}

pub fn figure_scenario(which: Scenario, duration: f64, opts: &SimOptions) -> Result<GridSolution> {
    simulate(&figure_problem(which, duration)?, opts)
}

/// The `example42` solution restricted to the strip `domain × [0, T]`: `u₁ = 1`,
/// `u₂ = 1 − ξ²/2` at rest, ends driven by the closed form.
pub fn example42_strip(domain: [f64; 2], duration: f64) -> Result<Ibvp> {
    let end = |xi: f64| {
        [
            ScalarFn::new(format!("u1({xi},τ)"), move |t: Jet| 1.0 - t * t * (0.25 * xi * xi)),
            ScalarFn::new(format!("u2({xi},τ)"), move |t: Jet| {
                (1.0 - 0.5 * xi * xi) - t * t * 0.5
            }),
        ]
    };
    Ok(Ibvp {
        metric: SurfaceMetric::by_name("lambda")?,
        position: [ScalarFn::constant(1.0), ScalarFn::polynomial(&[1.0, 0.0, -0.5])],
        velocity: [ScalarFn::constant(0.0), ScalarFn::constant(0.0)],
        left: end(domain[0]),
        right: end(domain[1]),
        domain,
        duration,
        c: 1.0,
        flux: Flux::Christoffel,
    })
}

/// Kind of a frame event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FrameEvent {
    /// Non-adjacent segments cross; parameters are interpolated `ξ` values.
    Crossing { params: [f64; 2], point: [f64; 2] },
    /// Consecutive points coincide, so the discrete tangent vanishes.
    ImmersionFailure { params: [f64; 2] },
}

/// Self-intersections and immersion failures of a polyline frame sampled at
/// the parameters `params`.
pub fn self_intersection_events(frame: &[[f64; 2]], params: &[f64]) -> Result<Vec<FrameEvent>> {
    if frame.len() < 3 || params.len() != frame.len() {
        return Err(Error::Config(
            "a frame needs at least 3 points and one parameter per point".into(),
        ));
    }
    let mut out = Vec::new();
    for i in 0..frame.len() - 1 {
        let d = [frame[i + 1][0] - frame[i][0], frame[i + 1][1] - frame[i][1]];
        if d[0].hypot(d[1]) < IMMERSION_EPS {
            out.push(FrameEvent::ImmersionFailure {
                params: [params[i], params[i + 1]],
            });
        }
    }
    let segs = frame.len() - 1;
    let lerp = |i: usize, s: f64| params[i] + s * (params[i + 1] - params[i]);
    let crossings: Vec<Vec<FrameEvent>> = (0..segs)
        .into_par_iter()
        .map(|i| {
            let mut v = Vec::new();
            for j in i + 2..segs {
                if let Some((s, t, pt)) = segment_hit(frame[i], frame[i + 1], frame[j], frame[j + 1]) {
                    v.push(FrameEvent::Crossing {
                        params: [lerp(i, s), lerp(j, t)],
                        point: pt,
                    });
                }
            }
            v
        })
        .collect();
    out.extend(crossings.into_iter().flatten());
    Ok(out)
}

/// Proper crossing of segments `ab` and `cd` with parameters in `[0, 1)`.
fn segment_hit(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<(f64, f64, [f64; 2])> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den == 0.0 {
        return None;
    }
    let q = [c[0] - a[0], c[1] - a[1]];
    let t = (q[0] * s[1] - q[1] * s[0]) / den;
    let u = (q[0] * r[1] - q[1] * r[0]) / den;
    ((0.0..1.0).contains(&t) && (0.0..1.0).contains(&u)).then(|| (t, u, [a[0] + t * r[0], a[1] + t * r[1]]))
}

/// Events of every `every`-th stored level, tagged with the level index.
pub fn run_events(sol: &GridSolution, every: usize) -> Result<Vec<(usize, FrameEvent)>> {
    let mut out = Vec::new();
    for n in (0..sol.levels.len()).step_by(every.max(1)) {
        for e in self_intersection_events(&sol.levels[n], &sol.xi)? {
            out.push((n, e));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub d_xi: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log₂(e_h / e_{h/2})` per refinement pair.
    pub orders: Vec<f64>,
}

/// Largest deviation from `oracle` over all levels of a finished run.
pub fn max_error<F>(sol: &GridSolution, oracle: &F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<[f64; 2]>,
{
    if sol.status != RunStatus::Finished {
        return Err(Error::domain(
            "convergence",
            format!("run did not finish: {:?}", sol.status),
        ));
    }
    let mut worst: f64 = 0.0;
    for (n, lvl) in sol.levels.iter().enumerate() {
        for (j, w) in lvl.iter().enumerate() {
            let e = oracle(sol.xi[j], sol.taus[n])?;
            worst = worst.max((w[0] - e[0]).abs()).max((w[1] - e[1]).abs());
        }
    }
    Ok(worst)
}

/// Errors at each `Δξ` in `d_xis` (successive halvings expected) and the
/// observed orders between consecutive refinements.
pub fn convergence_study<F>(problem: &Ibvp, oracle: F, d_xis: &[f64], cfl: f64) -> Result<ConvergenceReport>
where
    F: Fn(f64, f64) -> Result<[f64; 2]>,
{
    let mut errors = Vec::with_capacity(d_xis.len());
    for &h in d_xis {
        let sol = simulate(problem, &SimOptions::new(h, cfl))?;
        errors.push(max_error(&sol, &oracle)?);
    }
    let orders = errors
        .windows(2)
        .zip(d_xis.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    Ok(ConvergenceReport {
        d_xi: d_xis.to_vec(),
        errors,
        orders,
    })
}

/// Odd, `2L`-periodic extension of `f` on `[0, L]`.
fn odd_extension(f: &dyn Fn(f64) -> f64, l: f64, s: f64) -> f64 {
    let p = s.rem_euclid(2.0 * l);
    if p <= l {
        f(p)
    } else {
        -f(2.0 * l - p)
    }
}

/// d'Alembert solution of `w_ττ = c² w_ξξ` on `[0, L]` with zero ends,
/// position `f` and zero initial velocity.
pub fn dalembert(f: &dyn Fn(f64) -> f64, l: f64, c: f64, xi: f64, tau: f64) -> f64 {
    0.5 * (odd_extension(f, l, xi - c * tau) + odd_extension(f, l, xi + c * tau))
}

/// Triangle of height `h` peaked at `ξ = p` on `[0, L]`.
pub fn pluck(h: f64, p: f64, l: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= p { h * x / p } else { h * (l - x) / (l - p) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plucked(l: f64, h: f64, p: f64, t: f64) -> Ibvp {
        let f = ScalarFn::new("pluck", move |x: Jet| {
            if x.value() <= p {
                x * (h / p)
            } else {
                (Jet::constant(l) - x) * (h / (l - p))
            }
        });
        Ibvp {
            metric: SurfaceMetric::by_name("euclidean").unwrap(),
            position: [f, ScalarFn::constant(0.0)],
            velocity: [ScalarFn::constant(0.0), ScalarFn::constant(0.0)],
            left: [ScalarFn::constant(0.0), ScalarFn::constant(0.0)],
            right: [ScalarFn::constant(0.0), ScalarFn::constant(0.0)],
            domain: [0.0, l],
            duration: t,
            c: 1.0,
            flux: Flux::Christoffel,
        }
    }

    #[test]
    fn plucked_string_matches_dalembert() {
        let (l, h, p) = (1.0, 0.05, 0.4);
        let prob = plucked(l, h, p, 2.0 * l);
        let sol = simulate(&prob, &SimOptions::new(1.0 / 200.0, 0.9)).unwrap();
        assert_eq!(sol.status, RunStatus::Finished);
        let f = pluck(h, p, l);
        let err = max_error(&sol, &|x, t| Ok([dalembert(&f, l, 1.0, x, t), 0.0])).unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn boundaries_are_exact() {
        let sol = figure_scenario(Scenario::Euclidean, 1.0, &SimOptions::new(0.02, 0.8)).unwrap();
        for lvl in &sol.levels {
            assert_eq!(lvl[0], [0.0, 1.0]);
            assert_eq!(*lvl.last().unwrap(), [2.0, 1.0]);
        }
    }

    #[test]
    fn equilibrium_is_stationary() {
        let prob = Ibvp {
            metric: SurfaceMetric::by_name("lambda").unwrap(),
            position: [ScalarFn::constant(1.5), ScalarFn::constant(0.3)],
            velocity: [ScalarFn::constant(0.0), ScalarFn::constant(0.0)],
            left: [ScalarFn::constant(1.5), ScalarFn::constant(0.3)],
            right: [ScalarFn::constant(1.5), ScalarFn::constant(0.3)],
            domain: [0.0, 1.0],
            duration: 1.0,
            c: 1.0,
            flux: Flux::Christoffel,
        };
        let sol = simulate(&prob, &SimOptions::new(0.05, 0.5)).unwrap();
        for lvl in &sol.levels {
            for w in lvl {
                assert!((w[0] - 1.5).abs() < 1e-14 && (w[1] - 0.3).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cfl_violation_is_raised() {
        let prob = example42_strip([0.0, 1.0], 0.5).unwrap();
        assert!(matches!(
            simulate(&prob, &SimOptions::new(0.1, 0.95)),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn inconsistent_boundary_is_rejected() {
        let mut prob = example42_strip([0.0, 1.0], 0.5).unwrap();
        prob.left[1] = ScalarFn::constant(5.0);
        assert!(matches!(
            simulate(&prob, &SimOptions::new(0.1, 0.5)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn two_fluxes_agree() {
        let cases = [
            ([1.3, 0.2], [0.4, -0.7], [0.1, 0.9], [2.0, -1.0]),
            ([0.6, -1.1], [-0.2, 0.3], [1.4, -0.5], [0.0, 0.7]),
        ];
        for (w, wt, wx, wxx) in cases {
            let a = lambda_direct(w, wt, wx, wxx).unwrap();
            let b = lambda_christoffel(w, wt, wx, wxx).unwrap();
            assert!(
                (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12,
                "{a:?} {b:?}"
            );
        }
    }

    #[test]
    fn example42_strip_converges_at_second_order() {
        let prob = example42_strip([0.0, 1.0], 0.5).unwrap();
        let oracle = |x: f64, t: f64| Ok([1.0 - 0.25 * x * x * t * t, 1.0 - 0.5 * (x * x + t * t)]);
        let r = convergence_study(&prob, oracle, &[0.05, 0.025, 0.0125], 0.5).unwrap();
        for o in &r.orders {
            assert!((o - 2.0).abs() <= 0.3, "{r:?}");
        }
    }

    #[test]
    fn euclidean_energy_is_conserved() {
        let sol = figure_scenario(Scenario::Euclidean, 4.2, &SimOptions::new(1.0 / 200.0, 0.9)).unwrap();
        let m = SurfaceMetric::by_name("euclidean").unwrap();
        let e0 = sol.energy(&m, 1).unwrap();
        let n = sol.level_near(4.0 + 1e-9).max(2);
        let drift = (sol.energy(&m, n).unwrap() - e0).abs() / e0;
        assert!(drift < 0.01, "{drift}");
    }

    #[test]
    fn frame_events() {
        let line: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 2.0 * i as f64]).collect();
        let params: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(self_intersection_events(&line, &params).unwrap().is_empty());
        // an α: down-right, up, left across the first leg, then away
        let alpha = [[0.0, 0.0], [2.0, -2.0], [3.0, 0.0], [1.0, -2.0], [0.0, -4.0]];
        let ev = self_intersection_events(&alpha, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(ev.len(), 1, "{ev:?}");
        let stuck = [[0.0, 0.0], [1.0, 1.0], [1.0, 1.0], [2.0, 0.0]];
        let ev = self_intersection_events(&stuck, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(ev[0], FrameEvent::ImmersionFailure { .. }));
        assert!(self_intersection_events(&stuck[..2], &[0.0, 1.0]).is_err());
    }
}
