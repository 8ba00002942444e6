//! Executable checks of the inequalities and identities satisfied by entropy
//! solutions: L¹ contraction, comparison, the one-sided Oleĭnik bound, the
//! weak form, Kružkov entropy inequalities, the initial trace, the dynamic
//! programming principle and mass conservation.
//!
//! Profiles are read cell by cell: knot `i >= 1` holds the average over
//! `[x_{i-1}, x_i]`, knot 0 the left state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex_flux::ConvexFlux;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::hopf_lax::{two_step_value, value_slice};
use crate::profile::{Extension, Profile};
use crate::solver::Solution;
use crate::Scalar;

/// Absolute tolerance for pointwise inequalities.
pub const TOL_CHECK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of one check: `lhs <= rhs` up to `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub tolerance: f64,
    pub time: Option<f64>,
    /// Where the worst case occurred.
    pub details: String,
    /// Set for checks that are expected to fail.
    pub negative_control: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, details: impl Into<String>) -> Self {
        let margin = rhs - lhs;
        let passed = margin >= -tolerance;
        let status = if passed { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, passed, lhs, rhs, margin, tolerance, time: None, details: details.into(), negative_control: false }
    }

    pub fn not_applicable(name: impl Into<String>, details: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::NotApplicable,
            passed: true,
            lhs: 0.0,
            rhs: 0.0,
            margin: 0.0,
            tolerance: 0.0,
            time: None,
            details: details.into(),
            negative_control: false,
        }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn as_negative_control(mut self) -> Self {
        self.negative_control = true;
        self
    }

    /// A negative control succeeds by failing.
    pub fn meets_expectation(&self) -> bool {
        if self.negative_control {
            self.status == Status::Fail
        } else {
            self.passed
        }
    }
}

#[inline]
fn beta<T: Scalar>(s: T) -> T {
    if s.abs() >= T::one() {
        T::zero()
    } else {
        (-T::one() / (T::one() - s * s)).exp()
    }
}

#[inline]
fn beta_prime<T: Scalar>(s: T) -> T {
    if s.abs() >= T::one() {
        T::zero()
    } else {
        let d = T::one() - s * s;
        beta(s) * (-T::lit(2.0) * s / (d * d))
    }
}

/// `phi(x, t) = e^2 beta((x - x0) / rx) beta((t - t0) / rt)` with
/// `beta(s) = exp(-1 / (1 - s^2))`, scaled to peak value 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump<T> {
    pub x0: T,
    pub t0: T,
    pub rx: T,
    pub rt: T,
}

impl<T: Scalar> Bump<T> {
    pub fn new(x0: T, t0: T, rx: T, rt: T) -> Result<Self> {
        if !(rx > T::zero() && rt > T::zero()) {
            return Err(Error::Invalid(format!("bump radii must be positive, got {rx}, {rt}")));
        }
        if !(t0 - rt > T::zero()) {
            return Err(Error::SupportOutsideWindow(format!("time support [{}, {}] must lie in t > 0", t0 - rt, t0 + rt)));
        }
        Ok(Self { x0, t0, rx, rt })
    }

    fn scale() -> T {
        T::lit(2.0).exp()
    }

    #[inline]
    pub fn value(&self, x: T, t: T) -> T {
        Self::scale() * beta((x - self.x0) / self.rx) * beta((t - self.t0) / self.rt)
    }

    #[inline]
    pub fn dx(&self, x: T, t: T) -> T {
        Self::scale() * beta_prime((x - self.x0) / self.rx) / self.rx * beta((t - self.t0) / self.rt)
    }

    #[inline]
    pub fn dt(&self, x: T, t: T) -> T {
        Self::scale() * beta((x - self.x0) / self.rx) * beta_prime((t - self.t0) / self.rt) / self.rt
    }

    pub fn x_support(&self) -> (T, T) {
        (self.x0 - self.rx, self.x0 + self.rx)
    }

    pub fn t_support(&self) -> (T, T) {
        (self.t0 - self.rt, self.t0 + self.rt)
    }
}

/// Nonnegative smooth test functions with compact support in `t > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionBasis<T> {
    pub bumps: Vec<Bump<T>>,
}

impl<T: Scalar> TestFunctionBasis<T> {
    pub fn new(bumps: Vec<Bump<T>>) -> Self {
        Self { bumps }
    }

    /// `count` bumps with supports inside `x_window × t_window`, drawn from a
    /// seeded generator.
    pub fn random(seed: u64, count: usize, x_window: (T, T), t_window: (T, T)) -> Result<Self> {
        let (xl, xr) = x_window;
        let (tl, tr) = t_window;
        if !(xl < xr && T::zero() <= tl && tl < tr) {
            return Err(Error::SupportOutsideWindow(format!("empty window [{xl}, {xr}] x [{tl}, {tr}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = (xr - xl).as_f64();
        let ts = (tr - tl).as_f64();
        let mut bumps = Vec::with_capacity(count);
        for _ in 0..count {
            let rx = rng.gen_range(0.1..0.3) * xs;
            let rt = rng.gen_range(0.2..0.45) * ts;
            let x0 = xl.as_f64() + rx + rng.gen::<f64>() * (xs - 2.0 * rx);
            // keep the support off t = tl so it stays in t > 0
            let t0 = tl.as_f64() + rt * 1.01 + rng.gen::<f64>() * (ts - 2.02 * rt);
            bumps.push(Bump::new(T::lit(x0), T::lit(t0), T::lit(rx), T::lit(rt))?);
        }
        Ok(Self { bumps })
    }
}

/// Cells `[x_{i-1}, x_i]` inside `[a, b]` (ends snapped to knots).
fn cells_in<T: Scalar>(grid: &UniformGrid<T>, a: T, b: T) -> std::ops::Range<usize> {
    let lo = grid.position(a).round().max(T::zero()).to_usize().unwrap_or(0);
    let hi = grid.position(b).round().max(T::zero()).to_usize().unwrap_or(0).min(grid.len - 1);
    (lo + 1)..(hi + 1).max(lo + 1)
}

fn cell_sum<T: Scalar>(grid: &UniformGrid<T>, a: T, b: T, value: impl Fn(usize) -> T) -> T {
    grid.step * cells_in(grid, a, b).map(value).sum::<T>()
}

/// Exact integral of `|PL interpolant of d|` over `[a, b]`.
fn abs_integral_pl<T: Scalar>(grid: &UniformGrid<T>, a: T, b: T, d: impl Fn(T) -> T) -> T {
    let lo = a.max(grid.start);
    let hi = b.min(grid.end());
    if !(hi > lo) {
        return T::zero();
    }
    let mut pts = vec![lo];
    let first = grid.position(lo).floor().to_isize().unwrap_or(0) + 1;
    let last = grid.position(hi).ceil().to_isize().unwrap_or(0) - 1;
    for k in first..=last {
        let x = grid.point_at(k);
        if x > lo && x < hi {
            pts.push(x);
        }
    }
    pts.push(hi);
    let half = T::lit(0.5);
    pts.windows(2)
        .map(|w| {
            let (p, q) = (d(w[0]), d(w[1]));
            let len = w[1] - w[0];
            if p * q >= T::zero() {
                len * half * (p.abs() + q.abs())
            } else {
                len * half * (p * p + q * q) / (p.abs() + q.abs())
            }
        })
        .sum()
}

fn ensure_inside<T: Scalar>(grid: &UniformGrid<T>, lo: T, hi: T) -> Result<()> {
    let tol = grid.step * T::lit(1e-6);
    if lo < grid.start - tol || hi > grid.end() + tol {
        return Err(Error::WindowExceedsGrid { lo: lo.as_f64(), hi: hi.as_f64(), grid_lo: grid.start.as_f64(), grid_hi: grid.end().as_f64() });
    }
    Ok(())
}

/// `tol_int = 2 h (data bound)`.
pub fn tol_int<T: Scalar>(h: T, bound: T) -> T {
    T::lit(2.0) * h * bound.max(T::one())
}

/// `int_a^b |u1 - u2|(t) <= int_{a - Lt}^{b + Lt} |u10 - u20|` at every time.
pub fn check_l1_contraction<T: Scalar>(
    sol1: &Solution<T>,
    sol2: &Solution<T>,
    u10: &Profile<T>,
    u20: &Profile<T>,
    speed: T,
    a: T,
    b: T,
) -> Result<Vec<CheckReport>> {
    if !sol1.grid.same_as(&sol2.grid) {
        return Err(Error::GridMismatch("solutions must share a grid".into()));
    }
    let g = sol1.grid;
    let bound = u10.sup_norm().max(u20.sup_norm());
    let tol = tol_int(g.step, bound);
    let mut out = Vec::new();
    for (k, &t) in sol1.times.iter().enumerate() {
        let Some(p2) = sol2.profile_at(t) else { continue };
        let p1 = &sol1.profiles[k];
        let (lo, hi) = (a - speed * t, b + speed * t);
        ensure_inside(&u10.grid, lo, hi)?;
        let lhs = cell_sum(&g, a, b, |i| (p1.values[i] - p2.values[i]).abs());
        let rhs = abs_integral_pl(&u10.grid, lo, hi, |x| u10.eval(x) - u20.eval(x));
        let details = format!("[{a}, {b}] vs [{lo}, {hi}]");
        out.push(CheckReport::new("l1_contraction", lhs.as_f64(), rhs.as_f64(), tol.as_f64(), details).at_time(t.as_f64()));
    }
    Ok(out)
}

/// Whole-grid variant: `int |u1 - u2|(t) <= int |u10 - u20|`.
pub fn check_l1_contraction_whole_line<T: Scalar>(sol1: &Solution<T>, sol2: &Solution<T>, u10: &Profile<T>, u20: &Profile<T>) -> Result<Vec<CheckReport>> {
    let g = sol1.grid;
    let rhs = abs_integral_pl(&u10.grid, g.start, g.end(), |x| u10.eval(x) - u20.eval(x));
    let tol = tol_int(g.step, u10.sup_norm().max(u20.sup_norm()));
    let mut out = Vec::new();
    for (k, &t) in sol1.times.iter().enumerate() {
        let Some(p2) = sol2.profile_at(t) else { continue };
        let p1 = &sol1.profiles[k];
        let lhs = cell_sum(&g, g.start, g.end(), |i| (p1.values[i] - p2.values[i]).abs());
        out.push(CheckReport::new("l1_contraction_whole_line", lhs.as_f64(), rhs.as_f64(), tol.as_f64(), "whole grid").at_time(t.as_f64()));
    }
    Ok(out)
}

/// `u10 <= u20` implies `u1 <= u2` at every knot and time.
pub fn check_comparison<T: Scalar>(sol1: &Solution<T>, sol2: &Solution<T>, u10: &Profile<T>, u20: &Profile<T>) -> Result<CheckReport> {
    let tol = T::lit(TOL_CHECK);
    if let Some(i) = (0..u10.len()).find(|&i| u10.values[i] > u20.values[i] + tol) {
        return Err(Error::PreconditionFailed(format!("initial data not ordered at x = {}", u10.grid.point(i))));
    }
    let (l1, r1) = u10.pads();
    let (l2, r2) = u20.pads();
    if matches!(u10.extension, Extension::Constant { .. }) && (l1 > l2 + tol || r1 > r2 + tol) {
        return Err(Error::PreconditionFailed("initial data not ordered beyond the grid".into()));
    }
    let mut worst = T::neg_infinity();
    let mut at = (T::zero(), T::zero());
    for (k, &t) in sol1.times.iter().enumerate() {
        let Some(p2) = sol2.profile_at(t) else { continue };
        for (i, (a, b)) in sol1.profiles[k].values.iter().zip(&p2.values).enumerate() {
            if *a - *b > worst {
                worst = *a - *b;
                at = (sol1.grid.point(i), t);
            }
        }
    }
    Ok(CheckReport::new("comparison", worst.as_f64(), 0.0, TOL_CHECK, format!("max(u1 - u2) at x = {}, t = {}", at.0, at.1)))
}

/// Largest jump of `f'` between adjacent flux segments over `[lo, hi]`.
fn derivative_resolution<T: Scalar>(f: &ConvexFlux<T>, lo: T, hi: T) -> T {
    let g = f.grid();
    let n = g.len;
    let mut worst = T::zero();
    for k in 1..n - 1 {
        let p = g.point(k);
        if p >= lo - g.step && p <= hi + g.step {
            worst = worst.max(f.segment_slope(k) - f.segment_slope(k - 1));
        }
    }
    worst
}

/// Whether all second differences of the flux over `[lo, hi]` are positive.
pub fn strictly_convex_on<T: Scalar>(f: &ConvexFlux<T>, lo: T, hi: T) -> bool {
    let g = f.grid();
    let v = f.values();
    let tol = f.tol_convexity();
    let knots: Vec<usize> = (1..g.len - 1).filter(|&k| g.point(k) >= lo - g.step && g.point(k) <= hi + g.step).collect();
    !knots.is_empty() && knots.iter().all(|&k| v[k + 1] - T::lit(2.0) * v[k] + v[k - 1] > tol)
}

/// `f'(u(x + z, t)) - f'(u(x, t)) <= z / t` for `z in {h, 2h, 4h}`.
///
/// The tolerance is `tol_check / t` plus the resolution of the sampled
/// derivative (its largest jump between adjacent segments).
pub fn check_oleinik<T: Scalar>(sol: &Solution<T>, f: &ConvexFlux<T>) -> Vec<CheckReport> {
    let lo = sol.initial.min_value().min(sol.profiles.iter().map(Profile::min_value).fold(T::infinity(), T::min));
    let hi = sol.initial.max_value().max(sol.profiles.iter().map(Profile::max_value).fold(T::neg_infinity(), T::max));
    if !strictly_convex_on(f, lo, hi) {
        return vec![CheckReport::not_applicable("oleinik", format!("flux not strictly convex on [{lo}, {hi}]"))];
    }
    let resolution = derivative_resolution(f, lo, hi);
    let h = sol.grid.step;
    let mut out = Vec::new();
    for (&t, p) in sol.times.iter().zip(&sol.profiles) {
        let d: Vec<T> = p.values.iter().map(|&u| f.smooth_derivative(u)).collect();
        let mut worst = T::neg_infinity();
        let mut at = (T::zero(), T::zero());
        for m in [1usize, 2, 4] {
            let z = h * T::from_index(m);
            // knot 0 carries the far-field state, not a cell average
            for i in 1..d.len().saturating_sub(m) {
                let excess = d[i + m] - d[i] - z / t;
                if excess > worst {
                    worst = excess;
                    at = (sol.grid.point(i), z);
                }
            }
        }
        let tol = T::lit(TOL_CHECK) / t + resolution;
        let details = format!("worst pair x = {}, z = {}", at.0, at.1);
        out.push(CheckReport::new("oleinik", worst.as_f64(), 0.0, tol.as_f64(), details).at_time(t.as_f64()));
    }
    out
}

/// Time-trapezoid weights of the solution slices covering `[lo, hi]`.
fn time_weights<T: Scalar>(times: &[T], lo: T, hi: T) -> Result<(Vec<(usize, T)>, T)> {
    let first = times.first().copied().unwrap_or(T::infinity());
    let last = times.last().copied().unwrap_or(T::neg_infinity());
    if lo < first || hi > last {
        return Err(Error::SupportOutsideWindow(format!("time support [{lo}, {hi}] not covered by slices [{first}, {last}]")));
    }
    let mut weights: Vec<(usize, T)> = Vec::new();
    let mut spacing = T::zero();
    for k in 1..times.len() {
        let (a, b) = (times[k - 1], times[k]);
        if b <= lo || a >= hi {
            continue;
        }
        let w = (b - a) / T::lit(2.0);
        spacing = spacing.max(b - a);
        for idx in [k - 1, k] {
            match weights.iter_mut().find(|(j, _)| *j == idx) {
                Some(entry) => entry.1 = entry.1 + w,
                None => weights.push((idx, w)),
            }
        }
    }
    Ok((weights, spacing))
}

fn check_space_support<T: Scalar>(grid: &UniformGrid<T>, bump: &Bump<T>) -> Result<()> {
    let (lo, hi) = bump.x_support();
    if lo < grid.start || hi > grid.end() {
        return Err(Error::SupportOutsideWindow(format!("space support [{lo}, {hi}] leaves the grid [{}, {}]", grid.start, grid.end())));
    }
    Ok(())
}

/// `int int (a(u) phi_t + b(u) phi_x) dx dt` by cell midpoints in space and
/// the trapezoid rule over the slices in time.
fn space_time_integral<T: Scalar>(sol: &Solution<T>, bump: &Bump<T>, a: impl Fn(T) -> T, b: impl Fn(T) -> T) -> Result<(T, T)> {
    check_space_support(&sol.grid, bump)?;
    let (tl, tr) = bump.t_support();
    let (weights, spacing) = time_weights(&sol.times, tl, tr)?;
    let g = sol.grid;
    let h = g.step;
    let half = h / T::lit(2.0);
    let cells = cells_in(&g, bump.x_support().0 - h, bump.x_support().1 + h);
    let mut total = T::zero();
    for (k, w) in weights {
        let t = sol.times[k];
        let u = &sol.profiles[k].values;
        let row: T = cells.clone().map(|i| {
            let x = g.point(i) - half;
            a(u[i]) * bump.dt(x, t) + b(u[i]) * bump.dx(x, t)
        }).sum();
        total = total + w * h * row;
    }
    Ok((total, spacing))
}

/// Frozen scale of the weak-form residual:
/// `|R| <= c_weak (h + dt) max(1, |u0|_inf) max(1, L)`, `L` the largest
/// `|f'|` over the data range. The residual is linear in the data amplitude.
pub const DEFAULT_C_WEAK: f64 = 1.0;

/// Weak form with each bump: `int int (u phi_t + f(u) phi_x) + int u0 phi(., 0)`.
pub fn check_weak_form<T: Scalar>(sol: &Solution<T>, f: &ConvexFlux<T>, u0: &Profile<T>, basis: &TestFunctionBasis<T>, c_weak: T) -> Result<CheckReport> {
    let h = sol.grid.step;
    let amplitude = u0.sup_norm().max(T::one()) * f.max_abs_slope(u0.min_value(), u0.max_value()).max(T::one());
    let mut worst = T::zero();
    let mut worst_rhs = T::zero();
    let mut worst_ratio = T::neg_infinity();
    let mut at = String::new();
    for (n, bump) in basis.bumps.iter().enumerate() {
        let (r, spacing) = space_time_integral(sol, bump, |u| u, |u| f.eval(u))?;
        let initial = h * cells_in(&u0.grid, u0.grid.start, u0.grid.end())
            .map(|i| u0.eval(u0.grid.point(i) - h / T::lit(2.0)) * bump.value(u0.grid.point(i) - h / T::lit(2.0), T::zero()))
            .sum::<T>();
        let residual = (r + initial).abs();
        let rhs = c_weak * (h + spacing) * amplitude;
        if residual / rhs > worst_ratio {
            worst_ratio = residual / rhs;
            worst = residual;
            worst_rhs = rhs;
            at = format!("bump {n} at ({}, {})", bump.x0, bump.t0);
        }
    }
    Ok(CheckReport::new("weak_form", worst.as_f64(), worst_rhs.as_f64(), 0.0, at))
}

/// Seven levels evenly spread over `[min u - 1/2, max u + 1/2]`.
pub fn kruzkov_constants<T: Scalar>(sol: &Solution<T>) -> Vec<T> {
    let lo = sol.profiles.iter().map(Profile::min_value).fold(sol.initial.min_value(), T::min) - T::lit(0.5);
    let hi = sol.profiles.iter().map(Profile::max_value).fold(sol.initial.max_value(), T::max) + T::lit(0.5);
    (0..7).map(|k| lo + (hi - lo) * T::from_index(k) / T::lit(6.0)).collect()
}

/// `int int (|u - K| phi_t + sign(u - K)(f(u) - f(K)) phi_x) >= -tol_entropy`.
pub fn check_kruzkov_entropy<T: Scalar>(sol: &Solution<T>, f: &ConvexFlux<T>, constants: &[T], basis: &TestFunctionBasis<T>) -> Result<CheckReport> {
    let bound = sol.initial.sup_norm().max(sol.sup_norm());
    let tol = tol_int(sol.grid.step, bound);
    let mut worst = T::infinity();
    let mut at = String::new();
    for &k in constants {
        let fk = f.eval(k);
        for (n, bump) in basis.bumps.iter().enumerate() {
            let sign = |u: T| if u > k { T::one() } else if u < k { -T::one() } else { T::zero() };
            let (e, _) = space_time_integral(sol, bump, |u| (u - k).abs(), |u| sign(u) * (f.eval(u) - fk))?;
            if e < worst {
                worst = e;
                at = format!("K = {k}, bump {n} at ({}, {})", bump.x0, bump.t0);
            }
        }
    }
    // the integral must be nonnegative: lhs = -integral, rhs = 0
    Ok(CheckReport::new("kruzkov_entropy", (-worst).as_f64(), 0.0, tol.as_f64(), at))
}

/// `|int_a^b u(., t) - int_a^b u0|` shrinks as `t -> 0` and ends below
/// `tol_trace = max(5h, 2 L t_min) (local bound)`.
pub fn check_initial_trace<T: Scalar>(sol: &Solution<T>, u0: &Profile<T>, intervals: &[(T, T)], speed: T) -> Result<CheckReport> {
    if sol.times.len() < 3 {
        return Err(Error::MissingTraceTimes(sol.times.len()));
    }
    let g = sol.grid;
    let h = g.step;
    let t_min = sol.times[0];
    let t_max = *sol.times.last().expect("nonempty");
    let gaps: Vec<T> = sol
        .profiles
        .iter()
        .map(|p| {
            intervals
                .iter()
                .map(|&(a, b)| {
                    let lo = g.point(g.nearest(a));
                    let hi = g.point(g.nearest(b));
                    (cell_sum(&g, lo, hi, |i| p.values[i]) - u0.integrate(lo, hi)).abs()
                })
                .fold(T::zero(), T::max)
        })
        .collect();
    let reach = speed * t_max;
    let lo = intervals.iter().map(|i| i.0).fold(T::infinity(), T::min) - reach;
    let hi = intervals.iter().map(|i| i.1).fold(T::neg_infinity(), T::max) + reach;
    let local = (0..u0.len()).filter(|&i| g.point(i) >= lo && g.point(i) <= hi).map(|i| u0.values[i].abs()).fold(T::zero(), T::max);
    let tol_trace = (T::lit(5.0) * h).max(T::lit(2.0) * speed * t_min) * local.max(T::one());
    let slack = T::lit(TOL_CHECK);
    let rises = gaps.windows(2).position(|w| w[0] > w[1] + slack);
    let details = format!("gaps {:?} at times {:?}", gaps.iter().map(|g| g.as_f64()).collect::<Vec<_>>(), sol.times.iter().map(|t| t.as_f64()).collect::<Vec<_>>());
    match rises {
        Some(k) => Ok(CheckReport::new("initial_trace", gaps[k].as_f64(), gaps[k + 1].as_f64(), TOL_CHECK, format!("gap not shrinking; {details}"))),
        None => Ok(CheckReport::new("initial_trace", gaps[0].as_f64(), tol_trace.as_f64(), 0.0, details)),
    }
}

/// `sup_x |V(x, s, t) - V(x, t)| <= 5 h lip(v0)` for every pair.
pub fn check_dpp<T: Scalar>(v0: &Profile<T>, fstar: &ConvexFlux<T>, pairs: &[(T, T)]) -> Result<CheckReport> {
    let h = v0.grid.step;
    let tol_dpp = T::lit(5.0) * h * v0.lipschitz();
    let mut worst = T::zero();
    let mut at = String::from("no pairs");
    for &(s, t) in pairs {
        let split = two_step_value(v0, fstar, s, t)?;
        let direct = value_slice(v0, fstar, t)?;
        let gap = split.values.iter().zip(&direct.values).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
        if gap >= worst {
            worst = gap;
            at = format!("s = {s}, t = {t}");
        }
    }
    Ok(CheckReport::new("dpp", worst.as_f64(), tol_dpp.as_f64(), 0.0, at))
}

/// Seeded pairs `0 < s < t <= t_max`.
pub fn random_time_pairs<T: Scalar>(seed: u64, count: usize, t_max: T) -> Vec<(T, T)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tm = t_max.as_f64();
    (0..count)
        .map(|_| {
            let t = rng.gen_range(0.2 * tm..=tm);
            let s = rng.gen_range(0.1..0.9) * t;
            (T::lit(s), T::lit(t))
        })
        .collect()
}

/// `|h sum u(., t) - int u0| <= 1e-10 (mass scale)` for compactly supported data.
pub fn check_mass<T: Scalar>(sol: &Solution<T>) -> Result<CheckReport> {
    let u0 = &sol.initial;
    let tol = T::lit(TOL_CHECK);
    let (l, r) = u0.pads();
    let n = u0.len();
    let edge = |p: &Profile<T>| p.values[0].abs().max(p.values[p.len() - 1].abs());
    let pads_zero = matches!(u0.extension, Extension::Constant { .. }) && l.abs() <= tol && r.abs() <= tol;
    if !pads_zero || u0.values[0].abs() > tol || u0.values[n - 1].abs() > tol || sol.profiles.iter().any(|p| edge(p) > tol) {
        return Err(Error::SupportTouchesBoundary);
    }
    let g = sol.grid;
    let m0 = u0.total();
    let scale = u0.grid.step * u0.values.iter().map(|v| v.abs()).sum::<T>();
    let tol_mass = T::lit(1e-10).max(T::lit(64.0) * T::epsilon()) * scale.max(T::one());
    let mut worst = T::zero();
    let mut at = T::zero();
    for (&t, p) in sol.times.iter().zip(&sol.profiles) {
        let m = g.step * p.values.iter().copied().sum::<T>();
        if (m - m0).abs() >= worst {
            worst = (m - m0).abs();
            at = t;
        }
    }
    Ok(CheckReport::new("mass", worst.as_f64(), tol_mass.as_f64(), 0.0, format!("largest drift at t = {at}")))
}

/// A jump from `ul` to `ur` at `x = speed * t`, whatever its admissibility.
pub fn travelling_jump<T: Scalar>(initial: &Profile<T>, times: &[T], ul: T, ur: T, speed: T) -> Solution<T> {
    let half = (ul + ur) / T::lit(2.0);
    Solution::from_fn(initial.clone(), times, move |x, t| {
        let s = x - speed * t;
        if s < T::zero() {
            ul
        } else if s > T::zero() {
            ur
        } else {
            half
        }
    })
}

/// Seeded piecewise-constant data with at most `max_pieces` nonzero pieces
/// of absolute value at most `bound`, supported in `[lo, hi]`.
pub fn random_piecewise_constant<T: Scalar>(rng: &mut impl Rng, grid: UniformGrid<T>, max_pieces: usize, bound: T, support: (T, T)) -> Profile<T> {
    let pieces = rng.gen_range(1..=max_pieces.max(1));
    let (lo, hi) = (support.0.as_f64(), support.1.as_f64());
    let mut cuts: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(lo..hi)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts[0] = lo;
    cuts[pieces] = hi;
    let b = bound.as_f64();
    let levels: Vec<f64> = (0..pieces).map(|_| rng.gen_range(-b..=b)).collect();
    Profile::from_fn(grid, move |x| {
        let x = x.as_f64();
        if x <= lo || x >= hi {
            return T::zero();
        }
        let k = cuts.windows(2).position(|w| x >= w[0] && x < w[1]).unwrap_or(pieces - 1);
        T::lit(levels[k])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_flux::presets;
    use crate::hopf_lax::primitive;
    use crate::legendre::{fenchel_dual, DualGridSpec};
    use crate::solver::solve_linf;
    use approx::assert_abs_diff_eq;

    fn grid() -> UniformGrid<f64> {
        UniformGrid::spanning(-3.0, 3.0, 601)
    }

    fn riemann(ul: f64, ur: f64) -> Profile<f64> {
        Profile::from_fn(grid(), move |x| if x < 0.0 { ul } else if x > 0.0 { ur } else { 0.5 * (ul + ur) })
    }

    fn dense_times() -> Vec<f64> {
        (1..=60).map(|k| k as f64 * 0.025).collect()
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let b = Bump::new(0.3, 1.0, 0.5, 0.4).unwrap();
        let e = 1e-6;
        for (x, t) in [(0.1, 0.9), (0.5, 1.2), (0.3, 1.0), (0.7, 0.7)] {
            assert_abs_diff_eq!(b.dx(x, t), (b.value(x + e, t) - b.value(x - e, t)) / (2.0 * e), epsilon = 1e-6);
            assert_abs_diff_eq!(b.dt(x, t), (b.value(x, t + e) - b.value(x, t - e)) / (2.0 * e), epsilon = 1e-6);
        }
        assert_abs_diff_eq!(b.value(0.3, 1.0), 1.0, epsilon = 1e-12);
        assert_eq!(b.value(0.81, 1.0), 0.0);
        assert!(Bump::new(0.0, 0.3, 0.5, 0.4).is_err());
    }

    #[test]
    fn random_basis_is_reproducible_and_inside() {
        let a = TestFunctionBasis::<f64>::random(7, 10, (-2.0, 2.0), (0.1, 1.5)).unwrap();
        let b = TestFunctionBasis::<f64>::random(7, 10, (-2.0, 2.0), (0.1, 1.5)).unwrap();
        assert_eq!(a, b);
        for bump in &a.bumps {
            let (xl, xr) = bump.x_support();
            let (tl, tr) = bump.t_support();
            assert!(xl >= -2.0 && xr <= 2.0 && tl > 0.1 && tr <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn abs_integral_handles_sign_changes() {
        let g = UniformGrid::spanning(-1.0, 1.0, 3);
        assert_abs_diff_eq!(abs_integral_pl(&g, -1.0, 1.0, |x| x), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(abs_integral_pl(&g, -0.5, 1.0, |x| x), 0.625, epsilon = 1e-12);
    }

    #[test]
    fn identical_solutions_contract_trivially() {
        let f = presets::burgers(4.0, 801);
        let u0 = riemann(1.0, 0.0);
        let sol = solve_linf(&u0, &f, &[1.0]).unwrap();
        let r = check_l1_contraction(&sol, &sol, &u0, &u0, 1.0, -2.0, 2.0).unwrap();
        assert_eq!(r[0].lhs, 0.0);
        assert_eq!(r[0].rhs, 0.0);
        assert!(r[0].passed);
        assert!(matches!(check_l1_contraction(&sol, &sol, &u0, &u0, 1.0, -2.5, 2.0), Err(Error::WindowExceedsGrid { .. })));
    }

    #[test]
    fn comparison_requires_ordered_data() {
        let f = presets::burgers(4.0, 801);
        let u1 = riemann(1.0, 0.0);
        let u2 = u1.map(|u| u + 0.3);
        let s1 = solve_linf(&u1, &f, &[0.5, 1.0]).unwrap();
        let s2 = solve_linf(&u2, &f, &[0.5, 1.0]).unwrap();
        assert!(check_comparison(&s1, &s2, &u1, &u2).unwrap().passed);
        let same = check_comparison(&s1, &s1, &u1, &u1).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert!(matches!(check_comparison(&s2, &s1, &u2, &u1), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn oleinik_gate_and_fan() {
        let f = presets::burgers(4.0, 801);
        let sol = solve_linf(&riemann(0.0, 1.0), &f, &[0.5, 1.0]).unwrap();
        for r in check_oleinik(&sol, &f) {
            assert!(r.passed, "{r:?}");
            let t = r.time.unwrap();
            assert!(r.margin <= 2.0 * grid().step / t, "{r:?}");
        }
        let abs = presets::abs(4.0, 81);
        let sol = solve_linf(&riemann(0.5, -0.5), &abs, &[1.0]).unwrap();
        assert_eq!(check_oleinik(&sol, &abs)[0].status, Status::NotApplicable);
    }

    #[test]
    fn weak_form_and_entropy_on_shock() {
        let f = presets::burgers(4.0, 801);
        let u0 = riemann(1.0, 0.0);
        let times = dense_times();
        let sol = solve_linf(&u0, &f, &times).unwrap();
        let basis = TestFunctionBasis::new(vec![Bump::new(0.5, 1.0, 0.6, 0.4).unwrap(), Bump::new(0.0, 0.5, 0.5, 0.3).unwrap()]);
        let weak = check_weak_form(&sol, &f, &u0, &basis, DEFAULT_C_WEAK).unwrap();
        assert!(weak.passed, "{weak:?}");
        let entropy = check_kruzkov_entropy(&sol, &f, &kruzkov_constants(&sol), &basis).unwrap();
        assert!(entropy.passed, "{entropy:?}");

        let wrong = travelling_jump(&u0, &times, 1.0, 0.0, 1.0);
        assert!(!check_weak_form(&wrong, &f, &u0, &basis, DEFAULT_C_WEAK).unwrap().passed);

        let v0 = riemann(0.0, 1.0);
        let expansion = travelling_jump(&v0, &times, 0.0, 1.0, 0.5);
        let rep = check_kruzkov_entropy(&expansion, &f, &[0.5], &basis).unwrap();
        assert!(!rep.passed, "{rep:?}");
        // the expansion shock is still a weak solution
        assert!(check_weak_form(&expansion, &f, &v0, &basis, DEFAULT_C_WEAK).unwrap().passed);
    }

    #[test]
    fn constant_solution_has_no_residual() {
        let f = presets::burgers(4.0, 801);
        let u0 = Profile::from_fn(grid(), |_| 0.4);
        let sol = solve_linf(&u0, &f, &dense_times()).unwrap();
        let basis = TestFunctionBasis::random(3, 5, (-2.0, 2.0), (0.025, 1.5)).unwrap();
        let weak = check_weak_form(&sol, &f, &u0, &basis, DEFAULT_C_WEAK).unwrap();
        // only the time quadrature of the bump contributes
        assert!(weak.lhs < 0.05 * weak.rhs, "{weak:?}");
        let outside = TestFunctionBasis::new(vec![Bump::new(2.8, 1.0, 0.5, 0.2).unwrap()]);
        assert!(matches!(check_weak_form(&sol, &f, &u0, &outside, 1.0), Err(Error::SupportOutsideWindow(_))));
    }

    #[test]
    fn trace_and_mass() {
        let f = presets::burgers(4.0, 801);
        let u0 = Profile::from_fn(grid(), |x| if x.abs() < 1.0 { 1.0 - x.abs() } else { 0.0 });
        let sol = solve_linf(&u0, &f, &[0.01, 0.05, 0.1, 1.0]).unwrap();
        let mass = check_mass(&sol).unwrap();
        assert!(mass.passed, "{mass:?}");
        let trace = check_initial_trace(&sol.restricted_to(&[0.01, 0.05, 0.1]), &u0, &[(-0.5, 0.5)], 1.0).unwrap();
        assert!(trace.passed, "{trace:?}");
        assert!(matches!(check_initial_trace(&sol.restricted_to(&[0.1]), &u0, &[(-0.5, 0.5)], 1.0), Err(Error::MissingTraceTimes(1))));
        let shock = solve_linf(&riemann(1.0, 0.0), &f, &[1.0]).unwrap();
        assert!(matches!(check_mass(&shock), Err(Error::SupportTouchesBoundary)));
    }

    #[test]
    fn dpp_on_shock_data() {
        let f = presets::burgers(4.0, 801);
        let fstar = fenchel_dual(&f, DualGridSpec::default_for(&f)).unwrap();
        let v0 = primitive(&riemann(1.0, 0.0));
        let r = check_dpp(&v0, &fstar, &[(0.5, 1.0), (0.0, 0.7)]).unwrap();
        assert!(r.passed, "{r:?}");
        let pairs = random_time_pairs::<f64>(1, 5, 2.0);
        assert_eq!(pairs, random_time_pairs(1, 5, 2.0));
        assert!(pairs.iter().all(|&(s, t)| 0.0 < s && s < t && t <= 2.0));
        assert!(matches!(check_dpp(&v0, &fstar, &[(1.0, 0.5)]), Err(Error::InvalidTimes { .. })));
    }

    #[test]
    fn random_data_respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = random_piecewise_constant(&mut rng, grid(), 8, 2.0, (-1.0, 1.0));
            assert!(p.sup_norm() <= 2.0);
            assert!(p.values.iter().zip(grid().points()).all(|(v, x)| x.abs() < 1.0 || *v == 0.0));
        }
    }
}
