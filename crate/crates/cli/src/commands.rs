//! One function per subcommand. Each resolves defaults, builds every user
//! function before computing anything, and writes its results.

use serde::Serialize;

use wavemap_core::cauchy::{
    self, blowup_scan as scan, oracle_41, oracle_41_singular_tau, oracle_42, shock_curve_41, BlowupOptions,
    BlowupRecord, CauchyData, GridSpec, Rect, RESIDUAL_TOL,
};
use wavemap_core::eds::{flag_report, NamedFrame, RANK_TOL};
use wavemap_core::export::{cauchy_csv, csv, frames_svg, to_sorted_json};
use wavemap_core::expr::parse_function;
use wavemap_core::geometry::{geodesic_flow, GeodesicState, SurfaceMetric};
use wavemap_core::ode::OdeOptions;
use wavemap_core::simulator::{
    figure_problem, run_events, simulate as run_ibvp, Flux, FrameEvent, GridSolution, Ibvp, RunStatus, Scenario,
    SimOptions,
};
use wavemap_core::verify;
use wavemap_core::weierstrass::{residual_gate, WeierstrassQuad};
use wavemap_core::{ScalarFn, VerificationReport};

use crate::args::*;
use crate::{CliError, Context, Outcome};

type Result<T> = std::result::Result<T, CliError>;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn pair<T: Copy>(v: Option<Vec<T>>, name: &str, default: [T; 2]) -> Result<[T; 2]> {
    match v.as_deref() {
        None => Ok(default),
        Some([a, b]) => Ok([*a, *b]),
        Some(other) => Err(config(format!("{name} needs 2 values, got {}", other.len()))),
    }
}

fn grid2(v: Option<Vec<usize>>, default: [usize; 2]) -> Result<[usize; 2]> {
    let g = match v.as_deref() {
        None => default,
        Some([n]) => [*n, *n],
        Some([nx, ny]) => [*nx, *ny],
        Some(other) => return Err(config(format!("grid needs 1 or 2 values, got {}", other.len()))),
    };
    if g.iter().any(|&n| n < 2) {
        return Err(config("grid needs at least 2 points per axis"));
    }
    Ok(g)
}

fn positive(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config(format!("{name} must be positive, got {v}")))
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if n == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        String::new()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Named data or four expressions in `x`; never both.
fn cauchy_data(example: Option<String>, exprs: [Option<String>; 4]) -> Result<CauchyData> {
    let given = exprs.iter().filter(|e| e.is_some()).count();
    match (example, given) {
        (Some(_), n) if n > 0 => Err(config(
            "give either --example or the four profile expressions, not both",
        )),
        (Some(name), _) => Ok(CauchyData::by_name(&name)?),
        (None, 0) => Ok(CauchyData::example41()),
        (None, 4) => {
            let [a, b, c, d] = exprs.map(|e| e.unwrap_or_default());
            Ok(CauchyData::from_expressions("custom", [&a, &b, &c, &d])?)
        }
        (None, n) => Err(config(format!(
            "phi1, phi2, psi1 and psi2 must all be given ({n} of 4 found)"
        ))),
    }
}

type Oracle = fn(f64, f64) -> wavemap_core::Result<(f64, f64)>;

fn oracle_for(data: &CauchyData) -> Option<Oracle> {
    match data.name.as_str() {
        "example41" => Some(oracle_41),
        "example42" => Some(oracle_42),
        _ => None,
    }
}

#[derive(Serialize)]
struct SolveSummary {
    data: String,
    rect: Rect,
    grid: GridSpec,
    samples: usize,
    regular: usize,
    unverified: usize,
    max_residual: f64,
    residual_tol: f64,
    oracle_error: Option<f64>,
    tol: f64,
    passed: bool,
}

pub fn solve_cauchy(ctx: &mut Context, a: SolveCauchyArgs) -> Result<Outcome> {
    let data = cauchy_data(a.example, [a.phi1, a.phi2, a.psi1, a.psi2])?;
    let rect = match a.rect.as_deref() {
        None => Rect {
            x: [0.0, 1.0],
            y: [0.0, 1.0],
        },
        Some(&[x0, x1, y0, y1]) => Rect {
            x: [x0, x1],
            y: [y0, y1],
        },
        Some(other) => return Err(config(format!("rect needs x0,x1,y0,y1, got {} values", other.len()))),
    };
    let [nx, ny] = grid2(a.grid, [41, 41])?;
    let tol = ctx.tol_or(1e-7);
    let sol = cauchy::solve(&data, rect, GridSpec { nx, ny }, &OdeOptions::default())?;
    let oracle_error = oracle_for(&data).map(|o| sol.max_error(o)).transpose()?;
    // The residual is a finite-difference check whose truncation error
    // depends on the grid, so a closed form takes precedence when known.
    let passed = match oracle_error {
        Some(e) => e <= tol,
        None => sol.max_residual() <= RESIDUAL_TOL,
    };
    let summary = SolveSummary {
        data: data.name.clone(),
        rect,
        grid: sol.grid,
        samples: nx * ny,
        regular: sol.regular_count(),
        unverified: sol.unverified_count(),
        max_residual: sol.max_residual(),
        residual_tol: RESIDUAL_TOL,
        oracle_error,
        tol,
        passed,
    };
    ctx.out.write("cauchy.csv", &cauchy_csv(&sol))?;
    ctx.out.write("cauchy.json", &to_sorted_json(&summary)?)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "{}: {}/{} regular samples, max residual {:.3e}, oracle error {}",
            summary.data,
            summary.regular,
            summary.samples,
            summary.max_residual,
            oracle_error.map_or("n/a".to_string(), |e| format!("{e:.3e} (tol {tol:e})"))
        ),
    })
}

#[derive(Serialize)]
struct BlowupSummary<'a> {
    data: &'a str,
    options: BlowupOptions,
    records: &'a [BlowupRecord],
}

pub fn blowup_scan(ctx: &mut Context, a: BlowupScanArgs) -> Result<Outcome> {
    let data = cauchy_data(a.example, [a.phi1, a.phi2, a.psi1, a.psi2])?;
    let xis = a.xi.unwrap_or_else(|| vec![0.5, 1.0, 1.5, 2.0]);
    if xis.is_empty() {
        return Err(config("xi list is empty"));
    }
    let mut opts = BlowupOptions::default();
    opts.tau_max = positive(a.tau_max.unwrap_or(opts.tau_max), "tau-max")?;
    opts.d_tau = positive(a.d_tau.unwrap_or(opts.d_tau), "d-tau")?;
    let records = scan(&data, &xis, &opts);
    let reference = data.name == "example41";
    let rows = records.iter().map(|r| {
        vec![
            num(r.xi),
            opt_num(r.tau_star),
            r.cause.clone().unwrap_or_default(),
            if reference {
                num(shock_curve_41(r.xi))
            } else {
                String::new()
            },
            if reference {
                num(oracle_41_singular_tau(r.xi))
            } else {
                String::new()
            },
        ]
    });
    let table = csv(
        &["xi", "tau_star", "cause", "reference_curve", "metric_singular_tau"],
        rows,
    );
    ctx.out.write("blowup.csv", &table)?;
    let summary = BlowupSummary {
        data: &data.name,
        options: opts,
        records: &records,
    };
    ctx.out.write("blowup.json", &to_sorted_json(&summary)?)?;
    let found = records.iter().filter(|r| r.tau_star.is_some()).count();
    Ok(Outcome {
        passed: true,
        summary: format!(
            "{}: loss of regularity on {found} of {} lines",
            data.name,
            records.len()
        ),
    })
}

#[derive(Serialize)]
struct WeierstrassSummary {
    functions: [String; 4],
    seed: Option<u64>,
    s_range: [f64; 2],
    t_range: [f64; 2],
    n: usize,
    residual: f64,
    tol: f64,
    passed: bool,
}

pub fn weierstrass(ctx: &mut Context, a: WeierstrassArgs) -> Result<Outcome> {
    let exprs = [a.k, a.h, a.m, a.f];
    let given = exprs.iter().filter(|e| e.is_some()).count();
    let (quad, seed) = match given {
        0 => (
            WeierstrassQuad::random_monotone(&mut verify::rng_for(ctx.seed, 108)),
            Some(ctx.seed),
        ),
        4 => {
            let [k, h, m, f] = exprs.map(|e| e.unwrap_or_default());
            (WeierstrassQuad::from_expressions(&k, &h, &m, &f)?, None)
        }
        n => return Err(config(format!("k, h, m and f must all be given ({n} of 4 found)"))),
    };
    let s_range = pair(a.s_range, "s-range", [1.0, 2.0])?;
    let t_range = pair(a.t_range, "t-range", [1.0, 2.0])?;
    let n = a.n.unwrap_or(10);
    if n < 1 {
        return Err(config("n must be at least 1"));
    }
    let tol = ctx.tol_or(1e-6);
    let residual = residual_gate(&quad, s_range, t_range, n)?;
    let mut rows = Vec::new();
    for s in linspace(s_range[0], s_range[1], n) {
        for t in linspace(t_range[0], t_range[1], n) {
            let p = quad.generate(s, t)?;
            rows.push(vec![num(s), num(t), num(p.x), num(p.y), num(p.u), num(p.v)]);
        }
    }
    ctx.out
        .write("weierstrass.csv", &csv(&["s", "t", "x", "y", "u", "v"], rows))?;
    let passed = residual <= tol;
    let summary = WeierstrassSummary {
        functions: [&quad.k, &quad.h, &quad.m, &quad.f].map(|g| g.label().to_string()),
        seed,
        s_range,
        t_range,
        n,
        residual,
        tol,
        passed,
    };
    ctx.out.write("weierstrass.json", &to_sorted_json(&summary)?)?;
    Ok(Outcome {
        passed,
        summary: format!("generator residual {residual:.3e} (tol {tol:e})"),
    })
}

#[derive(Serialize)]
struct SuperposeSummary {
    seed: u64,
    n: usize,
    rejected_draws: usize,
    max_residual: f64,
    tol: f64,
    passed: bool,
}

pub fn superpose(ctx: &mut Context, a: SuperposeArgs) -> Result<Outcome> {
    let n = a.n.unwrap_or(20);
    let attempts = a.attempts.unwrap_or(100);
    if n < 2 || attempts == 0 {
        return Err(config("superpose needs n >= 2 and at least one attempt"));
    }
    let tol = ctx.tol_or(1e-6);
    let grid = linspace(0.0, 1.0, n);
    let mut rng = verify::rng_for(ctx.seed, 107);
    let opts = OdeOptions::default();
    let mut last = None;
    let mut found = None;
    for i in 0..attempts {
        match verify::random_superposition(&mut rng, &grid, &grid, &opts) {
            Ok(g) => {
                found = Some((i, g));
                break;
            }
            Err(e) => last = Some(e),
        }
    }
    let Some((rejected, g)) = found else {
        return Err(last.map_or_else(|| config("no attempts"), CliError::from));
    };
    let mut rows = Vec::new();
    for (iy, y) in g.ys.iter().enumerate() {
        for (ix, x) in g.xs.iter().enumerate() {
            rows.push(vec![num(*x), num(*y), num(g.u[iy][ix]), num(g.v[iy][ix])]);
        }
    }
    ctx.out.write("superpose.csv", &csv(&["x", "y", "u", "v"], rows))?;
    let passed = g.max_residual <= tol;
    let summary = SuperposeSummary {
        seed: ctx.seed,
        n,
        rejected_draws: rejected,
        max_residual: g.max_residual,
        tol,
        passed,
    };
    ctx.out.write("superpose.json", &to_sorted_json(&summary)?)?;
    Ok(Outcome {
        passed,
        summary: format!("superposed solution residual {:.3e} (tol {tol:e})", g.max_residual),
    })
}

#[derive(Serialize)]
struct GeodesicSummary<'a> {
    metric: &'a str,
    start: GeodesicState,
    end: GeodesicState,
    samples: usize,
}

pub fn geodesics(ctx: &mut Context, a: GeodesicsArgs) -> Result<Outcome> {
    let name = a.metric.unwrap_or_else(|| "lambda".into());
    let metric = SurfaceMetric::by_name(&name)?;
    let position = pair(a.position, "position", [1.0, 0.5])?;
    let velocity = pair(a.velocity, "velocity", [0.5, 0.25])?;
    let t_max = positive(a.t_max.unwrap_or(1.0), "t-max")?;
    let samples = a.samples.unwrap_or(101);
    if samples < 2 {
        return Err(config("samples must be at least 2"));
    }
    let start = GeodesicState {
        t: 0.0,
        position,
        velocity,
    };
    let times = linspace(0.0, t_max, samples);
    let states = geodesic_flow(&metric, &start, &times[1..], &OdeOptions::default())?;
    let all: Vec<GeodesicState> = std::iter::once(start).chain(states).collect();
    let rows = all.iter().map(|s| {
        vec![
            num(s.t),
            num(s.position[0]),
            num(s.position[1]),
            num(s.velocity[0]),
            num(s.velocity[1]),
        ]
    });
    ctx.out
        .write("geodesic.csv", &csv(&["t", "w1", "w2", "w1_dot", "w2_dot"], rows))?;
    let end = *all.last().expect("at least two samples");
    let summary = GeodesicSummary {
        metric: &name,
        start,
        end,
        samples,
    };
    ctx.out.write("geodesic.json", &to_sorted_json(&summary)?)?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "{name} geodesic to t = {t_max}: end point ({:.6}, {:.6})",
            end.position[0], end.position[1]
        ),
    })
}

pub fn curvature(ctx: &mut Context, a: CurvatureArgs) -> Result<Outcome> {
    let name = a.metric.unwrap_or_else(|| "lambda".into());
    let metric = SurfaceMetric::by_name(&name)?;
    let xr = pair(a.x_range, "x-range", [0.5, 1.5])?;
    let yr = pair(a.y_range, "y-range", [0.5, 1.5])?;
    let [nx, ny] = grid2(a.grid, [11, 11])?;
    let mut rows = Vec::new();
    let mut ok = 0;
    for y in linspace(yr[0], yr[1], ny) {
        for x in linspace(xr[0], xr[1], nx) {
            let k = metric.gauss_curvature([x, y]);
            let i2 = metric.cartan_invariant_sq([x, y]);
            let status = match (&k, &i2) {
                (Err(e), _) | (Ok(_), Err(e)) => e.tag().to_string(),
                _ => "ok".into(),
            };
            ok += k.is_ok() as usize;
            rows.push(vec![num(x), num(y), opt_num(k.ok()), opt_num(i2.ok()), status]);
        }
    }
    ctx.out.write(
        "curvature.csv",
        &csv(&["x", "y", "gauss_curvature", "cartan_invariant_sq", "status"], rows),
    )?;
    Ok(Outcome {
        passed: true,
        summary: format!("{name}: curvature at {ok} of {} grid points", nx * ny),
    })
}

pub fn goursat_table(ctx: &mut Context, a: GoursatTableArgs) -> Result<Outcome> {
    let frame = NamedFrame::by_name(a.frame.as_deref().unwrap_or("H1hat"))?;
    let n = a.probes.unwrap_or(5);
    if n < 3 {
        return Err(config("the Goursat table needs at least 3 probes"));
    }
    let mut rng = verify::rng_for(ctx.seed, 106);
    let probes: Vec<Vec<f64>> = (0..n).map(|_| frame.random_probe(&mut rng)).collect();
    let report = flag_report(&frame.name, &frame.fields, &probes, RANK_TOL)?;
    let json = to_sorted_json(&report)?;
    ctx.out.write("goursat.json", &json)?;
    Ok(Outcome {
        passed: true,
        summary: format!("{}: m = {:?}, verdict {}", report.frame, report.m, report.verdict),
    })
}

#[derive(Serialize)]
struct Snapshot {
    level: usize,
    tau: f64,
    energy: Option<f64>,
}

#[derive(Serialize)]
struct EventRecord {
    level: usize,
    tau: f64,
    event: FrameEvent,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    metric: &'a str,
    domain: [f64; 2],
    duration: f64,
    d_xi: f64,
    d_tau: f64,
    cfl: f64,
    c: f64,
    levels: usize,
    status: &'a RunStatus,
    snapshots: Vec<Snapshot>,
    events: Vec<EventRecord>,
}

fn snapshot_levels(sol: &GridSolution, count: usize) -> Vec<usize> {
    let last = sol.levels.len() - 1;
    let mut v: Vec<usize> = (0..count.max(1))
        .map(|i| {
            if count <= 1 {
                last
            } else {
                (i * last + (count - 1) / 2) / (count - 1)
            }
        })
        .collect();
    v.dedup();
    v
}

fn write_run(ctx: &mut Context, prefix: &str, problem: &Ibvp, sol: &GridSolution, snapshots: usize) -> Result<Outcome> {
    let levels = snapshot_levels(sol, snapshots);
    let mut rows = Vec::new();
    let mut frames = Vec::new();
    for &n in &levels {
        for (xi, w) in sol.xi.iter().zip(&sol.levels[n]) {
            rows.push(vec![num(sol.taus[n]), num(*xi), num(w[0]), num(w[1])]);
        }
        frames.push((sol.taus[n], sol.levels[n].clone()));
    }
    ctx.out
        .write(&format!("{prefix}.csv"), &csv(&["tau", "xi", "u1", "u2"], rows))?;
    ctx.out
        .write(&format!("{prefix}.svg"), &frames_svg(&frames, 640.0, 480.0))?;
    let events = run_events(sol, 1)?
        .into_iter()
        .map(|(level, event)| EventRecord {
            level,
            tau: sol.taus[level],
            event,
        })
        .collect::<Vec<_>>();
    let summary = RunSummary {
        metric: &sol.metric,
        domain: problem.domain,
        duration: problem.duration,
        d_xi: sol.d_xi,
        d_tau: sol.d_tau,
        cfl: sol.cfl,
        c: sol.c,
        levels: sol.levels.len(),
        status: &sol.status,
        snapshots: levels
            .iter()
            .map(|&n| Snapshot {
                level: n,
                tau: sol.taus[n],
                energy: sol.energy(&problem.metric, n).ok(),
            })
            .collect(),
        events,
    };
    ctx.out.write(&format!("{prefix}.json"), &to_sorted_json(&summary)?)?;
    let status = match &sol.status {
        RunStatus::Finished => format!("finished at tau = {}", sol.taus[sol.levels.len() - 1]),
        RunStatus::BlownUp { tau, xi, cause, .. } => format!("halted at tau = {tau:.4}, xi = {xi:.4} ({cause})"),
        RunStatus::Running => "running".into(),
    };
    Ok(Outcome {
        passed: true,
        summary: format!("{}: {status}, {} frame events", sol.metric, summary.events.len()),
    })
}

fn expr_pair(v: Option<Vec<String>>, name: &str, var: &str, default: [&str; 2]) -> Result<[ScalarFn; 2]> {
    let texts = match v {
        None => default.map(String::from),
        Some(v) => {
            <[String; 2]>::try_from(v).map_err(|v| config(format!("{name} needs 2 expressions, got {}", v.len())))?
        }
    };
    Ok([parse_function(&texts[0], var)?, parse_function(&texts[1], var)?])
}

fn sim_options(d_xi: Option<f64>, cfl: Option<f64>, default_d_xi: f64) -> Result<SimOptions> {
    Ok(SimOptions::new(
        positive(d_xi.unwrap_or(default_d_xi), "d-xi")?,
        positive(cfl.unwrap_or(0.9), "cfl")?,
    ))
}

pub fn simulate(ctx: &mut Context, a: SimulateArgs) -> Result<Outcome> {
    let flux = match a.flux.as_deref().unwrap_or("christoffel") {
        "christoffel" => Flux::Christoffel,
        "lambda-direct" => Flux::LambdaDirect,
        other => return Err(config(format!("unknown flux '{other}'"))),
    };
    let problem = Ibvp {
        metric: SurfaceMetric::by_name(a.metric.as_deref().unwrap_or("euclidean"))?,
        position: expr_pair(a.position, "position", "xi", ["xi", "1"])?,
        velocity: expr_pair(a.velocity, "velocity", "xi", ["0", "xi*(xi-2)"])?,
        left: expr_pair(a.left, "left", "tau", ["0", "1"])?,
        right: expr_pair(a.right, "right", "tau", ["2", "1"])?,
        domain: pair(a.domain, "domain", [0.0, 2.0])?,
        duration: positive(a.duration.unwrap_or(2.0), "duration")?,
        c: positive(a.c.unwrap_or(1.0), "c")?,
        flux,
    };
    let opts = sim_options(a.d_xi, a.cfl, 0.01)?;
    let sol = run_ibvp(&problem, &opts)?;
    write_run(ctx, "simulate", &problem, &sol, a.snapshots.unwrap_or(5))
}

pub fn figure(ctx: &mut Context, a: FigureArgs) -> Result<Outcome> {
    let which: Scenario = a.scenario.as_deref().unwrap_or("euclidean").parse()?;
    let problem = figure_problem(which, positive(a.duration.unwrap_or(2.0), "duration")?)?;
    let opts = sim_options(a.d_xi, a.cfl, 1.0 / 200.0)?;
    let sol = run_ibvp(&problem, &opts)?;
    let prefix = match which {
        Scenario::Euclidean => "figure-euclidean",
        Scenario::Lambda => "figure-lambda",
    };
    write_run(ctx, prefix, &problem, &sol, a.snapshots.unwrap_or(9))
}

pub fn verify_all(ctx: &mut Context, a: VerifyAllArgs) -> Result<Outcome> {
    let ids: Vec<u32> = match a.criteria {
        Some(ids) if !ids.is_empty() => ids,
        _ => (1..=verify::CRITERIA).collect(),
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > verify::CRITERIA) {
        return Err(config(format!("no criterion {bad} (1..={})", verify::CRITERIA)));
    }
    let checks: Vec<_> = ids
        .iter()
        .map(|&id| verify::criterion(id, ctx.seed).expect("id checked above"))
        .collect();
    let report = VerificationReport::new(ctx.seed, checks);
    for c in &report.checks {
        println!("{c}");
    }
    ctx.out.write("report.json", &to_sorted_json(&report)?)?;
    let failed: Vec<String> = report.failed().map(|c| c.id.to_string()).collect();
    Ok(Outcome {
        passed: report.passed,
        summary: if failed.is_empty() {
            format!("all {} checks passed (seed {})", report.checks.len(), report.seed)
        } else {
            format!(
                "{} of {} checks failed: {} (seed {})",
                failed.len(),
                report.checks.len(),
                failed.join(", "),
                report.seed
            )
        },
    })
}
