//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p lax-oleinik --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use lax_oleinik::hopf_lax::hopf_lax_step;
use lax_oleinik::solver::{self, aligned_dual, floor_truncation, l1_distance, space_time_l1};
use lax_oleinik::verify::{self, Bump, Status, TestFunctionBasis};
use lax_oleinik::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Frozen weak-form constant: measured worst ratio 0.07 over the fixtures.
const C_WEAK: f64 = 0.25;
/// Frozen oracle constants `gap <= C h`: measured 0.13 (shock), 0.92 (fan).
const C_ORACLE_SHOCK: f64 = 0.25;
const C_ORACLE_FAN: f64 = 1.25;

fn report(id: u32, name: &str, ok: bool, elapsed: Duration, cap: Duration, details: &str) {
    let ok = ok && elapsed < cap;
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {name}: {details} [{:.2}s of {:.0}s]", elapsed.as_secs_f64(), cap.as_secs_f64());
    assert!(ok, "criterion {id} ({name}) failed: {details}");
}

/// `nx` cells on `[lo, hi]`.
fn grid(lo: f64, hi: f64, nx: usize) -> UniformGrid<f64> {
    UniformGrid::spanning(lo, hi, nx + 1)
}

fn riemann(g: UniformGrid<f64>, ul: f64, ur: f64) -> Profile<f64> {
    Profile::from_fn(g, move |x| if x < 0.0 { ul } else if x > 0.0 { ur } else { 0.5 * (ul + ur) })
}

fn burgers() -> ConvexFlux<f64> {
    presets::burgers(4.0, 1601)
}

/// `|p|` with quadratic tails beyond `±4`.
fn extended_abs(len: usize) -> ConvexFlux<f64> {
    extend_superlinear(&presets::abs(4.0, len), -4.0, 4.0, 1.0).unwrap()
}

fn dense_times() -> Vec<f64> {
    (1..=60).map(|k| k as f64 * 0.025).collect()
}

/// `h sum |u_i - w(c_i)|` over cells inside `[a, b]`, `c_i` the cell midpoints.
fn cell_l1(p: &Profile<f64>, a: f64, b: f64, w: impl Fn(f64) -> f64) -> f64 {
    let g = p.grid;
    (1..g.len)
        .filter(|&i| g.point(i - 1) >= a - 1e-12 && g.point(i) <= b + 1e-12)
        .map(|i| (p.values[i] - w(g.point(i) - g.step / 2.0)).abs() * g.step)
        .sum()
}

#[test]
fn criterion_01_legendre_round_trip() {
    let start = Instant::now();
    let mut worst_ratio = 0.0f64;
    let mut worst_scan = 0.0f64;
    for f in [presets::burgers(4.0, 512), extended_abs(513)] {
        let h = f.grid().step;
        let spec = DualGridSpec::default_for(&f);
        let r = biconjugate_residual(&f, spec).unwrap();
        worst_ratio = worst_ratio.max(r / (2.0 * h));
        let dual = fenchel_dual(&f, spec).unwrap();
        for (q, v) in dual.grid().points().zip(dual.values()) {
            worst_scan = worst_scan.max((v - brute_force_conjugate(&f, q)).abs());
        }
    }
    let ok = worst_ratio <= 1.0 && worst_scan <= 1e-12;
    let details = format!("biconjugate residual / 2h = {worst_ratio:.3e}, scan vs brute force = {worst_scan:.1e}");
    report(1, "legendre round trip", ok, start.elapsed(), Duration::from_secs(1), &details);
}

#[test]
fn criterion_02_riemann_fidelity() {
    let start = Instant::now();
    let g = grid(-3.0, 3.0, 400);
    let h = g.step;
    let f = burgers();
    let shock = solve_linf(&riemann(g, 1.0, 0.0), &f, &[1.0]).unwrap();
    let p = &shock.profiles[0];
    let i = p.values.iter().position(|&v| v < 0.5).unwrap();
    let x_shock = g.point(i) - h / 2.0;
    let fan = solve_linf(&riemann(g, 0.0, 1.0), &f, &[1.0]).unwrap();
    let gap = cell_l1(&fan.profiles[0], -2.0, 2.0, |x| x.clamp(0.0, 1.0));
    let ok = (x_shock - 0.5).abs() <= 3.0 * h && gap <= 4.0 * h;
    let details = format!("shock at {x_shock:.4} (0.5 ± {:.4}), fan L1 gap {gap:.3e} (<= {:.3e})", 3.0 * h, 4.0 * h);
    report(2, "riemann fidelity", ok, start.elapsed(), Duration::from_secs(5), &details);
}

fn contraction_pairs(f: &ConvexFlux<f64>, seed: u64) -> (usize, f64) {
    let g = grid(-8.0, 8.0, 800);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let u10 = verify::random_piecewise_constant(&mut rng, g, 8, 2.0, (-2.0, 2.0));
        let u20 = verify::random_piecewise_constant(&mut rng, g, 8, 2.0, (-2.0, 2.0));
        let times = [0.5, 1.0, 2.0];
        let s1 = solve_linf(&u10, f, &times).unwrap();
        let s2 = solve_linf(&u20, f, &times).unwrap();
        let speed = lipschitz_bound(f, &u10, &u20);
        for r in verify::check_l1_contraction(&s1, &s2, &u10, &u20, speed, -2.0, 2.0).unwrap() {
            worst = worst.min(r.margin + r.tolerance);
            failures += usize::from(!r.passed);
        }
    }
    (failures, worst)
}

#[test]
fn criterion_03_l1_contraction() {
    let start = Instant::now();
    let (fb, wb) = contraction_pairs(&burgers(), 3);
    let (fa, wa) = contraction_pairs(&extended_abs(1601), 4);
    let ok = fb == 0 && fa == 0;
    let details = format!("failures {fb} (Burgers), {fa} (|p|); worst margin + tol_int {:.3e}", wb.min(wa));
    report(3, "L1 contraction", ok, start.elapsed(), Duration::from_secs(120), &details);
}

#[test]
fn criterion_04_comparison() {
    let start = Instant::now();
    let g = grid(-4.0, 4.0, 400);
    let f = burgers();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let u10 = verify::random_piecewise_constant(&mut rng, g, 8, 1.0, (-2.0, 2.0));
        let bump = verify::random_piecewise_constant(&mut rng, g, 8, 1.0, (-2.0, 2.0)).map(f64::abs);
        let u20 = Profile::new(g, u10.values.iter().zip(&bump.values).map(|(a, b)| a + b).collect(), u10.extension).unwrap();
        let times = [0.5, 1.0, 2.0];
        let s1 = solve_linf(&u10, &f, &times).unwrap();
        let s2 = solve_linf(&u20, &f, &times).unwrap();
        let r = verify::check_comparison(&s1, &s2, &u10, &u20).unwrap();
        worst = worst.max(r.lhs);
        failures += usize::from(!r.passed);
    }
    let details = format!("failures {failures} of 50, worst max(u1 - u2) = {worst:.3e}");
    report(4, "comparison principle", failures == 0, start.elapsed(), Duration::from_secs(120), &details);
}

#[test]
fn criterion_05_dpp() {
    let start = Instant::now();
    let g = grid(-3.0, 3.0, 400);
    let f = burgers();
    let fstar = fenchel_dual(&f, DualGridSpec::default_for(&f)).unwrap();
    let pairs = verify::random_time_pairs(5, 20, 2.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, ul, ur) in [("shock", 1.0, 0.0), ("rarefaction", 0.0, 1.0)] {
        let v0 = primitive(&riemann(g, ul, ur));
        let r = verify::check_dpp(&v0, &fstar, &pairs).unwrap();
        ok &= r.passed;
        parts.push(format!("{name} sup-gap {:.3e} (tol {:.3e})", r.lhs, r.rhs));
    }
    report(5, "dynamic programming", ok, start.elapsed(), Duration::from_secs(30), &parts.join(", "));
}

#[test]
fn criterion_06_oleinik() {
    let start = Instant::now();
    let g = grid(-3.0, 3.0, 400);
    let h = g.step;
    let f = burgers();
    let times = [0.5, 1.0, 2.0];
    let fan = solve_linf(&riemann(g, 0.0, 1.0), &f, &times).unwrap();
    let mut ok = true;
    let mut fan_margin = 0.0f64;
    for r in verify::check_oleinik(&fan, &f) {
        let t = r.time.unwrap();
        ok &= r.passed && r.margin <= 2.0 * h / t;
        fan_margin = fan_margin.max(r.margin.abs() * t / h);
    }
    // strictly convex fluxes on shock, smooth and random data
    let quartic = ConvexFlux::from_fn(-4.0, 4.0, 1601, |p: f64| p.powi(4) / 12.0 + p * p / 2.0, Tail::Quadratic { slope: -4.0 - 64.0 / 3.0, curvature: 8.5 }, Tail::Quadratic { slope: 4.0 + 64.0 / 3.0, curvature: 8.5 })
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut data = vec![riemann(g, 1.0, 0.0), Profile::from_fn(g, |x: f64| (2.0 * x).sin())];
    for _ in 0..10 {
        data.push(verify::random_piecewise_constant(&mut rng, g, 8, 2.0, (-2.0, 2.0)));
    }
    let mut convex_fail = 0;
    for flux in [&f, &quartic] {
        for u0 in &data {
            let sol = solve_linf(u0, flux, &times).unwrap();
            convex_fail += verify::check_oleinik(&sol, flux).iter().filter(|r| r.status != Status::Pass).count();
        }
    }
    let abs = presets::abs(4.0, 801);
    let sol = solve_linf(&riemann(g, 0.5, -0.5), &abs, &[1.0]).unwrap();
    let gated = verify::check_oleinik(&sol, &abs)[0].status == Status::NotApplicable;
    ok &= convex_fail == 0 && gated;
    let details = format!("fan |margin| <= {fan_margin:.3} h/t, strictly convex failures {convex_fail}, |p| not applicable: {gated}");
    report(6, "oleinik one-sided bound", ok, start.elapsed(), Duration::from_secs(30), &details);
}

#[test]
fn criterion_07_weak_form_and_entropy() {
    let start = Instant::now();
    let g = grid(-3.0, 3.0, 400);
    let f = burgers();
    let ext = extended_abs(1601);
    let times = dense_times();
    let basis = TestFunctionBasis::random(42, 8, (-2.0, 2.0), (0.025, 1.5)).unwrap();
    let fixtures: Vec<(&str, Profile<f64>, &ConvexFlux<f64>)> = vec![
        ("shock", riemann(g, 1.0, 0.0), &f),
        ("rarefaction", riemann(g, 0.0, 1.0), &f),
        ("abs transport", riemann(g, 0.5, -0.5), &ext),
        ("sine", Profile::from_fn(g, |x: f64| (2.0 * x).sin()), &f),
    ];
    let mut ok = true;
    let mut worst_weak = 0.0f64;
    let mut worst_entropy = 0.0f64;
    for (name, u0, flux) in &fixtures {
        let sol = solve_linf(u0, flux, &times).unwrap();
        let w = verify::check_weak_form(&sol, flux, u0, &basis, C_WEAK).unwrap();
        let e = verify::check_kruzkov_entropy(&sol, flux, &verify::kruzkov_constants(&sol), &basis).unwrap();
        assert!(w.passed && e.passed, "{name}: {w:?} {e:?}");
        ok &= w.passed && e.passed;
        worst_weak = worst_weak.max(w.lhs / w.rhs);
        worst_entropy = worst_entropy.max(e.lhs / e.tolerance);
    }
    let u0 = riemann(g, 1.0, 0.0);
    let wrong = verify::travelling_jump(&u0, &times, 1.0, 0.0, 1.0);
    let wrong_report = verify::check_weak_form(&wrong, &f, &u0, &basis, C_WEAK).unwrap().as_negative_control();
    let v0 = riemann(g, 0.0, 1.0);
    let expansion = verify::travelling_jump(&v0, &times, 0.0, 1.0, 0.5);
    let straddle = TestFunctionBasis::new(vec![Bump::new(0.5, 1.0, 0.6, 0.4).unwrap()]);
    let expansion_report = verify::check_kruzkov_entropy(&expansion, &f, &[0.5], &straddle).unwrap().as_negative_control();
    ok &= wrong_report.meets_expectation() && expansion_report.meets_expectation();
    let details = format!(
        "worst weak residual {worst_weak:.3} of allowance, worst entropy deficit {worst_entropy:.3} of tol; controls: wrong speed {:.3e} > {:.3e}, expansion shock {:.3e} > {:.3e}",
        wrong_report.lhs, wrong_report.rhs, expansion_report.lhs, expansion_report.tolerance
    );
    report(7, "weak form and entropy", ok, start.elapsed(), Duration::from_secs(60), &details);
}

#[test]
fn criterion_08_oracle_agreement() {
    let start = Instant::now();
    let f = burgers();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, ul, ur, c) in [("shock", 1.0, 0.0, C_ORACLE_SHOCK), ("rarefaction", 0.0, 1.0, C_ORACLE_FAN)] {
        let mut gaps = Vec::new();
        for nx in [100usize, 200, 400] {
            let g = grid(-3.0, 3.0, nx);
            let u0 = riemann(g, ul, ur);
            let lo = solve_linf(&u0, &f, &[1.0]).unwrap();
            let fv = godunov(&u0, &f, FvConfig::new(0.9, nx + 1, 1.0).unwrap()).unwrap();
            let gap = cross_validate(&lo, &fv, (-3.0, 3.0)).unwrap()[0].1;
            ok &= gap <= c * g.step;
            gaps.push(gap);
        }
        let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
        ok &= ratios.iter().all(|r| (1.5..=3.0).contains(r));
        parts.push(format!("{name} gaps {:.2e}/{:.2e}/{:.2e} ratios {:.2}/{:.2}", gaps[0], gaps[1], gaps[2], ratios[0], ratios[1]));
    }
    report(8, "oracle agreement", ok, start.elapsed(), Duration::from_secs(120), &parts.join("; "));
}

#[test]
fn criterion_09_l1_cauchy() {
    let start = Instant::now();
    let g = grid(-3.0, 3.0, 600);
    let f = burgers();
    // height 50, width 0.02, mass 1
    let spike = Profile::from_fn(g, |x: f64| if x.abs() < 0.01 - 1e-12 { 50.0 } else if (x.abs() - 0.01).abs() <= 1e-12 { 25.0 } else { 0.0 });
    let times = [0.25, 0.5, 1.0];
    let levels = [10usize, 20, 50];
    let clamp = solve_l1(&spike, &f, &times, &levels, Truncation::Clamp).unwrap();
    let smooth = solve_l1(&spike, &f, &times, &levels, Truncation::SmoothCutoff).unwrap();
    let mut ok = true;
    let mut slack = f64::INFINITY;
    for inc in clamp.increments.iter().chain(&smooth.increments) {
        ok &= inc.holds();
        slack = slack.min(inc.slack());
    }
    let (tau, horizon) = (clamp.tau, clamp.horizon);
    let between = space_time_l1(&clamp.quadrature, &smooth.quadrature, tau, horizon);
    let n = *levels.last().unwrap();
    let data_gap = l1_distance(&Truncation::Clamp.apply(&spike, n), &Truncation::SmoothCutoff.apply(&spike, n));
    let allowance = 2.0 * data_gap * (horizon - tau);
    ok &= between <= allowance;
    let details = format!("min Cauchy slack {slack:.3e}; clamp vs smooth cutoff {between:.3e} <= {allowance:.3e}");
    report(9, "L1 pipeline Cauchy bound", ok, start.elapsed(), Duration::from_secs(120), &details);
}

#[test]
fn criterion_10_semisuperlinear_ladder() {
    let start = Instant::now();
    let g = grid(-3.0, 3.0, 600);
    let f = presets::semisuperlinear_demo(8.0, 3201);
    let u0 = Profile::from_fn(g, |x: f64| if x > 0.0 && x < 1.0 { -5.0 } else if x == 0.0 || x == 1.0 { -2.5 } else { 0.0 });
    let times = [0.01, 0.05, 0.1, 0.5, 1.0];
    let ladder = solve_semisuperlinear(&u0, &f, &times, &[3, 6, 10]).unwrap();

    let tol = solver::ladder_tolerance::<f64>();
    let mut excess = f64::NEG_INFINITY;
    for pair in ladder.solutions.windows(2) {
        for (hi, lo) in pair[0].profiles.iter().zip(&pair[1].profiles) {
            for (a, b) in hi.values.iter().zip(&lo.values) {
                excess = excess.max(b - a);
            }
        }
    }
    let mut ok = excess <= tol;
    let floored = floor_truncation(&u0, 3).values.iter().zip(&u0.values).all(|(&v, &w)| v == if w < -3.0 { 0.0 } else { w });
    ok &= floored;

    let (alpha, rate) = solver::linear_growth_constants(&f, &u0).unwrap();
    let mut growth_excess = f64::NEG_INFINITY;
    for sol in &ladder.solutions {
        for p in &sol.profiles {
            for &u in &p.values {
                growth_excess = growth_excess.max(f.eval(u).abs() - alpha - rate * u.abs());
            }
        }
    }
    ok &= growth_excess <= 1e-9;

    let top = ladder.solutions.last().unwrap().restricted_to(&[0.01, 0.05, 0.1]);
    let speed = f.max_abs_slope(u0.min_value(), u0.max_value());
    let trace = verify::check_initial_trace(&top, &u0, &[(-0.5, 0.5), (0.5, 1.5)], speed).unwrap();
    ok &= trace.passed;
    let details = format!(
        "ladder excess {excess:.2e} (tol {tol:.0e}), |f(u)| - ({alpha:.3} + {rate:.3}|u|) <= {growth_excess:.2e}, trace gap {:.3e} <= {:.3e}",
        trace.lhs, trace.rhs
    );
    report(10, "semi-superlinear ladder", ok, start.elapsed(), Duration::from_secs(120), &details);
}

#[test]
fn criterion_11_stability() {
    let start = Instant::now();
    let g = grid(-4.0, 4.0, 400);
    let h = g.step;
    let f = extended_abs(801);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u0 = verify::random_piecewise_constant(&mut rng, g, 6, 1.0, (-1.5, 1.5));
    let v0 = primitive(&u0);
    let lip = v0.lipschitz();
    let t = 1.0;
    let value = |flux: &ConvexFlux<f64>| {
        let base = fenchel_dual(flux, DualGridSpec::default_for(flux)).unwrap();
        let window = search_window(lip, &base).unwrap();
        hopf_lax_step(&v0, &aligned_dual(flux, window, h, t).unwrap(), t, window, lip).unwrap()
    };
    let exact = value(&f);
    let inside: Vec<usize> = (0..g.len).filter(|&i| g.point(i).abs() <= 2.0 + 1e-12).collect();
    let mut gaps = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let smooth = mollify(&f, MollifierSpec::for_grid(eps, f.grid().step)).unwrap();
        let v = value(&smooth);
        gaps.push(inside.iter().map(|&i| (v.values[i] - exact.values[i]).abs()).fold(0.0, f64::max));
    }
    let ok = gaps.windows(2).all(|w| w[1] < w[0]) && gaps[2] < 0.05;
    let details = format!("sup |V_eps - V| on [-2, 2] at t = 1: {:.3e}, {:.3e}, {:.3e}", gaps[0], gaps[1], gaps[2]);
    report(11, "stability under mollification", ok, start.elapsed(), Duration::from_secs(30), &details);
}
