//! The acceptance suite: fourteen checks that reproduce the closed-form
//! results and structural claims, each at its stated tolerance.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cauchy::{
    self, compute_k, compute_k_unchecked, flow_quadrature, flow_rk, lift, oracle_41, oracle_41_jet,
    oracle_41_singular_tau, oracle_41_spacetime_jet, oracle_42, oracle_42_spacetime_jet, shock_curve_41, BlowupOptions,
    CauchyData, GridSpec, Rect,
};
use crate::eds::{goursat_table, NamedFrame};
use crate::error::Result;
use crate::func::ScalarFn;
use crate::geometry::{energy_density, lambda_geodesic_closed_form, lambda_lightcone_geodesic, SurfaceMetric};
use crate::ode::OdeOptions;
use crate::report::{Check, VerificationReport};
use crate::sigma::{first_integrals, CoordFrame, Jet2Map};
use crate::simulator::{self, run_events, RunStatus, Scenario, SimOptions};
use crate::vessiot::{
    e1_frame, e2_frame, r_frame, superpose, verify_commuting, verify_structure, StructureTable, IDENTITY,
};
use crate::weierstrass::{
    integrate_characteristic_1, integrate_characteristic_2, residual_gate, superposed_solution, CurveState,
    SuperposedGrid, WeierstrassQuad,
};

/// Number of criteria in the suite.
pub const CRITERIA: u32 = 14;

/// Deterministic generator for stream `id` of a run seeded with `seed`.
pub fn rng_for(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ id as u64)
}

fn run<F>(id: u32, name: &str, anchor: &str, f: F) -> Check
where
    F: FnOnce(&mut Check) -> Result<()>,
{
    let mut c = Check::new(id, name, anchor);
    let t0 = Instant::now();
    let r = f(&mut c);
    c.elapsed = Some(t0.elapsed().as_secs_f64());
    match r {
        Ok(()) => c,
        Err(e) => c.errored(&e),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Random polynomial Cauchy data with `u_x`, `v_y` and `u+v` bounded away
/// from zero on `[0, 1]`.
pub fn random_polynomial_data<R: Rng>(rng: &mut R, name: &str) -> CauchyData {
    let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let phi1 = [r(1.5, 2.5), r(1.0, 2.0), r(-0.2, 0.2)];
    let phi2 = [r(0.5, 1.0), r(1.0, 2.0), r(-0.2, 0.2)];
    let psi1 = [r(-0.2, 0.2), r(-0.2, 0.2)];
    let psi2 = [r(-0.2, 0.2), r(-0.2, 0.2)];
    CauchyData {
        name: name.to_string(),
        phi1: ScalarFn::polynomial(&phi1),
        phi2: ScalarFn::polynomial(&phi2),
        psi1: ScalarFn::polynomial(&psi1),
        psi2: ScalarFn::polynomial(&psi2),
    }
}

pub fn criterion_01(_seed: u64) -> Check {
    run(
        1,
        "Cauchy problem, first worked example",
        "closed-form solution u = √((1+x)(1+y)) − x − y",
        |c| {
            let t0 = Instant::now();
            let sol = cauchy::solve(
                &CauchyData::example41(),
                Rect {
                    x: [0.0, 1.0],
                    y: [0.0, 1.0],
                },
                GridSpec { nx: 41, ny: 41 },
                &OdeOptions::default(),
            )?;
            let secs = t0.elapsed().as_secs_f64();
            let err = sol.max_error(oracle_41)?;
            c.headline(err, 1e-7);
            c.require("all 1681 samples regular", sol.regular_count() == 41 * 41);
            c.require("runtime below 5 s", secs < 5.0);
            c.value("fd_residual", sol.max_residual());
            c.value("regular_samples", sol.regular_count() as f64);
            Ok(())
        },
    )
}

pub fn criterion_02(_seed: u64) -> Check {
    run(
        2,
        "Cauchy problem, second worked example",
        "u₁ = 1 − ξ²τ²/4, u₂ = 1 − (ξ²+τ²)/2",
        |c| {
            let sol = cauchy::solve(
                &CauchyData::example42(),
                Rect {
                    x: [0.5, 1.5],
                    y: [0.5, 1.5],
                },
                GridSpec { nx: 41, ny: 41 },
                &OdeOptions::default(),
            )?;
            let err = sol.max_error(oracle_42)?;
            c.headline(err, 1e-7);
            let stopped = 41 * 41 - sol.regular_count();
            c.value("regular_samples", sol.regular_count() as f64);
            c.value("fd_residual", sol.max_residual());
            if stopped > 0 {
                c.note(format!(
                    "{stopped} sample(s) guard-stopped where the closed form has u₁ = 0 (λ undefined)"
                ));
            }
            c.require("only the two u₁ = 0 corners are excluded", stopped <= 2);
            Ok(())
        },
    )
}

pub fn criterion_03(seed: u64) -> Check {
    run(
        3,
        "k-functions",
        "k₁ = k₂ = −1/(2+2y); k₁ = −y², k₂ = 1/y; k = β∘lift",
        |c| {
            let k41 = compute_k(&CauchyData::example41(), [0.0, 1.0], 20)?;
            let k42 = compute_k(&CauchyData::example42(), [0.5, 1.5], 20)?;
            let mut exact: f64 = 0.0;
            for y in linspace(0.0, 1.0, 20) {
                let w = -1.0 / (2.0 + 2.0 * y);
                exact = exact.max((k41.k1.eval(y) - w).abs()).max((k41.k2.eval(y) - w).abs());
            }
            for y in linspace(0.5, 1.5, 20) {
                exact = exact
                    .max((k42.k1.eval(y) + y * y).abs())
                    .max((k42.k2.eval(y) - 1.0 / y).abs());
            }
            c.bound("examples_max_dev", exact, 1e-12);
            let mut rng = rng_for(seed, 3);
            let mut ident: f64 = 0.0;
            let mut sets = 0;
            let mut rejected = 0;
            while sets < 5 {
                let d = random_polynomial_data(&mut rng, "random");
                let Ok(k) = compute_k(&d, [0.0, 1.0], 20) else {
                    rejected += 1;
                    continue;
                };
                for y in linspace(0.0, 1.0, 11) {
                    let p = lift(&d, y)?;
                    let b = k.b_at(y);
                    ident = ident.max((p.b[0] - b[0]).abs()).max((p.b[2] - b[2]).abs());
                }
                sets += 1;
            }
            c.value("rejected_draws", rejected as f64);
            c.headline(ident, 1e-10);
            Ok(())
        },
    )
}

pub fn criterion_04(seed: u64) -> Check {
    run(
        4,
        "quadrature vs Runge-Kutta",
        "solvable Lie type flow integrates by quadrature",
        |c| {
            let mut rng = rng_for(seed, 4);
            let opts = OdeOptions::default();
            let mut worst: f64 = 0.0;
            let (mut cases, mut rejected) = (0, 0);
            while cases < 50 {
                let d = random_polynomial_data(&mut rng, "random");
                let x: f64 = rng.random_range(0.0..1.0);
                let y: f64 = rng.random_range(0.0..1.0);
                let k = compute_k_unchecked(&d);
                let res =
                    lift(&d, x).and_then(|p| Ok((flow_rk(&p, y, &k, &opts)?, flow_quadrature(&p, y, &k, &opts)?)));
                match res {
                    Ok((a, b)) => {
                        for i in 0..4 {
                            worst = worst.max((a.z[i] - b.z[i]).abs());
                        }
                        cases += 1;
                    }
                    Err(_) => rejected += 1,
                }
            }
            c.value("rejected_draws", rejected as f64);
            c.headline(worst, 1e-8);
            Ok(())
        },
    )
}

fn random_z<R: Rng>(rng: &mut R) -> Vec<f64> {
    (0..4)
        .map(|i| {
            let v: f64 = rng.random_range(0.3..2.0);
            if i >= 2 || rng.random_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect()
}

pub fn criterion_05(seed: u64) -> Check {
    run(
        5,
        "Vessiot structure constants",
        "brackets of R₁..R₄, e₁..e₄, f₁..f₄",
        |c| {
            let mut rng = rng_for(seed, 5);
            let samples: Vec<Vec<f64>> = (0..100).map(|_| random_z(&mut rng)).collect();
            let r = verify_structure(&r_frame(), &StructureTable::r_table(), &samples)?;
            let e1 = verify_structure(&e1_frame(), &StructureTable::e1_table(), &samples)?;
            let e2 = verify_structure(&e2_frame(), &StructureTable::e2_table(), &samples)?;
            let cross = verify_commuting(&e1_frame(), &e2_frame(), &samples)?;
            c.bound("r_defect", r, 1e-8);
            c.bound("e1_defect", e1, 1e-8);
            c.bound("e2_defect", e2, 1e-8);
            c.bound("cross_defect", cross, 1e-8);
            let series = StructureTable::r_table().derived_series();
            let steps = series.iter().position(|&d| d == 0);
            c.note(format!("derived series of r: {series:?}"));
            c.require(
                "derived series reaches 0 within 3 steps",
                matches!(steps, Some(s) if s <= 3),
            );
            let m = r.max(e1).max(e2).max(cross);
            c.headline(m, 1e-8);
            Ok(())
        },
    )
}

pub fn criterion_06(seed: u64) -> Check {
    run(
        6,
        "Goursat table",
        "derived flag (3,5,7,8), χ = (0,2,5), χ₋₁ = (2,4), C⟨0,1,1⟩",
        |c| {
            let mut rng = rng_for(seed, 6);
            let mut mismatches = 0.0;
            for name in ["H1hat", "H2hat"] {
                let f = NamedFrame::by_name(name)?;
                let probes: Vec<Vec<f64>> = (0..5).map(|_| f.random_probe(&mut rng)).collect();
                let r = goursat_table(name, &f.fields, &probes)?;
                let ok = r.m == [3, 5, 7, 8] && r.chi == [0, 2, 5] && r.chi_prev == [2, 4] && r.verdict == "C⟨0,1,1⟩";
                c.note(format!(
                    "{name}: m={:?} chi={:?} chi_prev={:?} {}",
                    r.m, r.chi, r.chi_prev, r.verdict
                ));
                if !ok {
                    mismatches += 1.0;
                }
            }
            c.headline(mismatches, 0.0);
            Ok(())
        },
    )
}

fn random_curve_start<R: Rng>(rng: &mut R) -> CurveState {
    CurveState {
        t: 0.0,
        q: [
            rng.random_range(0.5..1.5),
            rng.random_range(0.2..1.0),
            rng.random_range(0.8..1.5),
            rng.random_range(0.8..1.5),
        ],
        a: [rng.random_range(-0.3..0.3), 0.0, 0.0],
    }
}

fn random_control<R: Rng>(rng: &mut R) -> ScalarFn {
    ScalarFn::polynomial(&[rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)])
}

/// One draw of two random characteristic curves on `[0, 1]`, superposed
/// and sampled on `xs × ys`. Draws that hit a guard return the error.
pub fn random_superposition<R: Rng>(rng: &mut R, xs: &[f64], ys: &[f64], opts: &OdeOptions) -> Result<SuperposedGrid> {
    let s1 = random_curve_start(rng);
    let s2 = random_curve_start(rng);
    let [a2, a3, b2, b3] = [0; 4].map(|_| random_control(rng));
    let c1 = integrate_characteristic_1(a2, a3, s1, [0.0, 1.0], 2, opts)?;
    let c2 = integrate_characteristic_2(b2, b3, s2, [0.0, 1.0], 2, opts)?;
    superposed_solution(c1, c2)?.on_grid(xs, ys)
}

pub fn criterion_07(seed: u64) -> Check {
    run(
        7,
        "superposition",
        "π combines integral curves of the two characteristic systems",
        |c| {
            let mut rng = rng_for(seed, 7);
            let opts = OdeOptions::default();
            let grid = linspace(0.0, 1.0, 20);
            let (mut trials, mut rejected) = (0, 0);
            let mut worst: f64 = 0.0;
            while trials < 10 {
                match random_superposition(&mut rng, &grid, &grid, &opts) {
                    Ok(g) => {
                        worst = worst.max(g.max_residual);
                        trials += 1;
                    }
                    Err(_) => rejected += 1,
                }
            }
            c.value("rejected_draws", rejected as f64);
            let mut id: f64 = 0.0;
            for _ in 0..100 {
                let q: [f64; 4] = random_z(&mut rng).try_into().expect("four components");
                let l = superpose(IDENTITY, q)?;
                let r = superpose(q, IDENTITY)?;
                for i in 0..4 {
                    id = id.max((l[i] - q[i]).abs()).max((r[i] - q[i]).abs());
                }
            }
            c.bound("identity_defect", id, 1e-12);
            c.headline(worst, 1e-6);
            Ok(())
        },
    )
}

pub fn criterion_08(seed: u64) -> Check {
    run(
        8,
        "Weierstrass generator",
        "generator formulas for solutions from four functions",
        |c| {
            let mut rng = rng_for(seed, 8);
            let mut worst: f64 = 0.0;
            for _ in 0..5 {
                let q = WeierstrassQuad::random_monotone(&mut rng);
                worst = worst.max(residual_gate(&q, [1.0, 2.0], [1.0, 2.0], 10)?);
            }
            c.note("generator formulas used as printed; no correction applied");
            c.headline(worst, 1e-6);
            Ok(())
        },
    )
}

pub fn criterion_09(seed: u64) -> Check {
    run(
        9,
        "λ geodesics",
        "complete family of λ geodesics in closed form",
        |c| {
            let mut rng = rng_for(seed, 9);
            let opts = OdeOptions::default();
            let times = linspace(0.0, 1.0, 11);
            let mut worst: f64 = 0.0;
            let mut sets = 0;
            while sets < 20 {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                let a1: f64 = rng.random_range(0.5..1.5);
                let b1: f64 = rng.random_range(0.5..1.5);
                if (a - b).abs() <= 0.1 {
                    continue;
                }
                let s = a1 + b1;
                let traj = lambda_lightcone_geodesic([a1, b1], [a * s, b * s], &times, &opts)?;
                for (t, st) in times.iter().zip(&traj) {
                    let (u, v) = lambda_geodesic_closed_form(a, b, a1, b1, *t)?;
                    worst = worst.max((st[0] - u).abs()).max((st[1] - v).abs());
                }
                sets += 1;
            }
            let mut fixed: f64 = 0.0;
            for _ in 0..10 {
                let p = [rng.random_range(0.5..1.5), rng.random_range(0.5..1.5)];
                let w: f64 = rng.random_range(-1.0..1.0);
                for (vel, idx) in [([0.0, w], 0), ([w, 0.0], 1)] {
                    let traj = lambda_lightcone_geodesic(p, vel, &times, &opts)?;
                    for st in traj {
                        fixed = fixed.max((st[idx] - p[idx]).abs());
                    }
                }
            }
            c.bound("constant_coordinate_drift", fixed, 1e-12);
            c.headline(worst, 1e-8);
            Ok(())
        },
    )
}

pub fn criterion_10(seed: u64) -> Check {
    run(
        10,
        "curvature and Cartan invariant",
        "K = −2/x² for g_P; relation constants 1/4, e^{x/2}/4",
        |c| {
            let mut rng = rng_for(seed, 10);
            let gp = SurfaceMetric::by_name("gP")?;
            let g1 = SurfaceMetric::by_name("g1")?;
            let g2 = SurfaceMetric::by_name("g2")?;
            let mut k_dev: f64 = 0.0;
            let mut i_dev: f64 = 0.0;
            for _ in 0..50 {
                let x: f64 = rng.random_range(0.2..3.0);
                let y: f64 = rng.random_range(-2.0..2.0);
                k_dev = k_dev.max((gp.gauss_curvature([x, y])? + 2.0 / (x * x)).abs());
                i_dev = i_dev.max((gp.cartan_invariant_sq([x, y])? - 1.0 / 16.0).abs());
                let xn: f64 = rng.random_range(-2.0..-0.1);
                i_dev = i_dev.max((g2.cartan_invariant_sq([xn, y])? - xn.exp() / 16.0).abs());
                let xa: f64 = rng.random_range(-2.0..2.0);
                i_dev = i_dev.max((g1.cartan_invariant_sq([xa, y])? + xa.exp() / 16.0).abs());
            }
            c.bound("cartan_max_dev", i_dev, 1e-7);
            c.headline(k_dev, 1e-9);
            Ok(())
        },
    )
}

pub fn criterion_11(_seed: u64) -> Check {
    run(
        11,
        "blow-up scan",
        "τ*(ξ) ≥ ½√(8ξ+3ξ²); second example stays regular",
        |c| {
            let opts = BlowupOptions::default();
            let xis = [0.5, 1.0, 1.5, 2.0];
            let mut dev: f64 = 0.0;
            for r in cauchy::blowup_scan(&CauchyData::example41(), &xis, &opts) {
                let Some(t) = r.tau_star else {
                    c.require(&format!("finite τ* at ξ = {}", r.xi), false);
                    continue;
                };
                let oracle = oracle_41_singular_tau(r.xi);
                let shock = shock_curve_41(r.xi);
                dev = dev.max((t - oracle).abs());
                c.note(format!(
                    "ξ = {}: τ* = {t:.6} ({}), locus {oracle:.6}, reference curve {shock:.6}",
                    r.xi,
                    r.cause.as_deref().unwrap_or("-")
                ));
                c.require(&format!("τ*({}) = {t:.6} ≥ ½√(8ξ+3ξ²) = {shock:.6}", r.xi), t >= shock);
            }
            for r in cauchy::blowup_scan(&CauchyData::example42(), &xis, &opts) {
                if let Some(t) = r.tau_star {
                    c.require(
                        &format!(
                            "second example regular to τ = 5 at ξ = {} (stopped at {t:.6}: {})",
                            r.xi,
                            r.cause.as_deref().unwrap_or("-")
                        ),
                        false,
                    );
                }
            }
            c.headline(dev, 2.0 * opts.d_tau);
            Ok(())
        },
    )
}

pub fn criterion_12(_seed: u64) -> Check {
    run(
        12,
        "string simulator",
        "second-order leapfrog; clamped string on the plane and on λ",
        |c| {
            let strip = simulator::example42_strip([0.0, 1.0], 1.0)?;
            let oracle = |x: f64, t: f64| -> Result<[f64; 2]> {
                let [a, b] = oracle_42_spacetime_jet([crate::Jet::constant(x), crate::Jet::constant(t)]);
                Ok([a.value(), b.value()])
            };
            let conv = simulator::convergence_study(&strip, oracle, &[0.05, 0.025, 0.0125], 0.5)?;
            let order_dev = conv.orders.iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
            c.note(format!("observed orders {:?}", conv.orders));

            let eu = simulator::figure_scenario(Scenario::Euclidean, 4.05, &SimOptions::new(1.0 / 200.0, 0.9))?;
            let m = SurfaceMetric::by_name("euclidean")?;
            let e0 = eu.energy(&m, 1)?;
            let e1 = eu.energy(&m, eu.level_near(4.0))?;
            c.bound("euclidean_energy_drift", (e1 - e0).abs() / e0, 0.01);

            let la = simulator::figure_scenario(Scenario::Lambda, 2.0, &SimOptions::new(1.0 / 200.0, 0.9))?;
            let events = run_events(&la, 1)?;
            c.value("lambda_events", events.len() as f64);
            c.note(format!("λ run status: {:?}", la.status));
            c.require("λ figure run reaches τ = 2", la.status == RunStatus::Finished);
            c.require("λ figure run logs a crossing or immersion failure", !events.is_empty());
            c.headline(order_dev, 0.3);
            Ok(())
        },
    )
}

pub fn criterion_13(_seed: u64) -> Check {
    run(
        13,
        "first integrals",
        "α's constant in y, β's constant in x on the closed form",
        |c| {
            let g = linspace(0.0, 1.0, 10);
            let fi = |x: f64, y: f64| first_integrals(&Jet2Map::from_fn(CoordFrame::Lightcone, [x, y], oracle_41_jet));
            let mut drift: f64 = 0.0;
            for &x in &g {
                let a0 = fi(x, g[0])?.alpha;
                let b0 = fi(g[0], x)?.beta;
                for &y in &g {
                    let a = fi(x, y)?.alpha;
                    let b = fi(y, x)?.beta;
                    for i in 0..3 {
                        drift = drift.max((a[i] - a0[i]).abs()).max((b[i] - b0[i]).abs());
                    }
                }
            }
            c.headline(drift, 1e-7);
            Ok(())
        },
    )
}

pub fn criterion_14(_seed: u64) -> Check {
    run(
        14,
        "energy density of initial data",
        "e = −1/(2+ξ) (pole) and −ξ²/4 (analytic)",
        |c| {
            let lam = SurfaceMetric::by_name("lambda")?;
            let mut dev: f64 = 0.0;
            for xi in linspace(0.1, 2.0, 20) {
                let j41 = Jet2Map::from_fn(CoordFrame::Spacetime, [xi, 0.0], oracle_41_spacetime_jet);
                let j42 = Jet2Map::from_fn(CoordFrame::Spacetime, [xi, 0.0], oracle_42_spacetime_jet);
                dev = dev.max((energy_density(&lam, &j41, 1.0)? + 1.0 / (2.0 + xi)).abs());
                dev = dev.max((energy_density(&lam, &j42, 1.0)? + 0.25 * xi * xi).abs());
            }
            c.headline(dev, 1e-10);
            Ok(())
        },
    )
}

/// Run criterion `id` (1-based).
pub fn criterion(id: u32, seed: u64) -> Option<Check> {
    let f: fn(u64) -> Check = match id {
        1 => criterion_01,
        2 => criterion_02,
        3 => criterion_03,
        4 => criterion_04,
        5 => criterion_05,
        6 => criterion_06,
        7 => criterion_07,
        8 => criterion_08,
        9 => criterion_09,
        10 => criterion_10,
        11 => criterion_11,
        12 => criterion_12,
        13 => criterion_13,
        14 => criterion_14,
        _ => return None,
    };
    Some(f(seed))
}

/// All criteria in order.
pub fn run_all(seed: u64) -> VerificationReport {
    VerificationReport::new(seed, (1..=CRITERIA).filter_map(|i| criterion(i, seed)).collect())
}
