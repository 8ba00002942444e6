//! End-to-end pipelines from initial data to sampled entropy solutions.

use rayon::prelude::*;

use crate::convex_flux::{extend_tails, ConvexFlux, Growth};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::hopf_lax::{extract_solution, hopf_lax_step_refined, primitive, search_window, ValueSlice};
use crate::legendre::{fenchel_dual, DualGridSpec};
use crate::profile::{integrate_pl, Extension, Profile};
use crate::Scalar;

/// Curvature of the quadratic tails added by flux surgery.
pub const DEFAULT_TAIL_CURVATURE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionMeta<T> {
    /// Propagation speed bound `L` for the data range.
    pub speed: T,
    /// Search window `M`.
    pub window: T,
    pub lip_v0: T,
    pub c1: T,
    pub flux_id: String,
}

impl<T: Scalar> Default for SolutionMeta<T> {
    fn default() -> Self {
        Self { speed: T::zero(), window: T::zero(), lip_v0: T::zero(), c1: T::zero(), flux_id: String::new() }
    }
}

/// Profiles at increasing times on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub grid: UniformGrid<T>,
    pub times: Vec<T>,
    pub profiles: Vec<Profile<T>>,
    /// Value-function slices behind each profile (empty for other schemes).
    pub slices: Vec<ValueSlice<T>>,
    pub initial: Profile<T>,
    pub meta: SolutionMeta<T>,
}

impl<T: Scalar> Solution<T> {
    /// A synthetic solution `u(x, t)`, e.g. a deliberately wrong one.
    ///
    /// Knot `i` stores `u` at the midpoint of the cell `[x_{i-1}, x_i]`.
    pub fn from_fn(initial: Profile<T>, times: &[T], u: impl Fn(T, T) -> T) -> Self {
        let grid = initial.grid;
        let half = grid.step / T::lit(2.0);
        let profiles = times
            .iter()
            .map(|&t| {
                let values = grid.points().map(|x| u(x - half, t)).collect::<Vec<_>>();
                let extension = initial.extension;
                Profile { grid, values, extension }
            })
            .collect();
        Self { grid, times: times.to_vec(), profiles, slices: Vec::new(), initial, meta: SolutionMeta::default() }
    }

    pub fn profile_at(&self, t: T) -> Option<&Profile<T>> {
        self.times.iter().position(|&s| same_time(s, t)).map(|k| &self.profiles[k])
    }

    /// Keeps the listed times only.
    pub fn restricted_to(&self, times: &[T]) -> Self {
        let keep: Vec<usize> = times.iter().filter_map(|&t| self.times.iter().position(|&s| same_time(s, t))).collect();
        let slices = if self.slices.is_empty() { Vec::new() } else { keep.iter().map(|&k| self.slices[k].clone()).collect() };
        Self {
            grid: self.grid,
            times: keep.iter().map(|&k| self.times[k]).collect(),
            profiles: keep.iter().map(|&k| self.profiles[k].clone()).collect(),
            slices,
            initial: self.initial.clone(),
            meta: self.meta.clone(),
        }
    }

    pub fn sup_norm(&self) -> T {
        self.profiles.iter().map(Profile::sup_norm).fold(T::zero(), T::max)
    }
}

pub(crate) fn same_time<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-9) * (T::one() + a.abs().max(b.abs()))
}

/// `L`: the largest `|f'|` over `[-M0, M0]`, `M0` the larger data bound.
pub fn lipschitz_bound<T: Scalar>(f: &ConvexFlux<T>, u10: &Profile<T>, u20: &Profile<T>) -> T {
    let m0 = u10.sup_norm().max(u20.sup_norm());
    f.max_abs_slope(-m0, m0)
}

/// Makes `f` superlinear while keeping it on `[-bound - 1, bound + 1]`.
///
/// Anchors must be differentiability points; when the knot at the nominal
/// anchor is a kink, the next knots outward are tried.
pub fn flux_surgery<T: Scalar>(f: &ConvexFlux<T>, bound: T) -> Result<ConvexFlux<T>> {
    if f.is_superlinear() {
        return Ok(f.clone());
    }
    let reach = bound.abs() + T::one();
    let wide = f.widen(-reach - T::lit(16.0) * f.grid().step, reach + T::lit(16.0) * f.grid().step);
    let g = *wide.grid();
    let smooth_at = |k: usize| {
        let (l, r) = wide.slopes(g.point(k));
        (r - l).abs() <= wide.tol_slope()
    };
    let d = T::lit(DEFAULT_TAIL_CURVATURE);
    let mut last_err = None;
    let lo_knot = g.nearest(-reach);
    let hi_knot = g.nearest(reach);
    let left_ok = !f.left_tail().is_quadratic();
    let right_ok = !f.right_tail().is_quadratic();
    for offset in 0..16usize {
        let a = (left_ok).then(|| lo_knot.saturating_sub(offset));
        let b = (right_ok).then(|| (hi_knot + offset).min(g.len - 1));
        if a.is_some_and(|k| !smooth_at(k)) || b.is_some_and(|k| !smooth_at(k)) {
            let k = a.filter(|&k| !smooth_at(k)).or(b).unwrap_or(0);
            let (l, r) = wide.slopes(g.point(k));
            last_err = Some(Error::NotDifferentiableAtAnchor { at: g.point(k).as_f64(), left: l.as_f64(), right: r.as_f64() });
            continue;
        }
        return extend_tails(&wide, a.map(|k| g.point(k)), b.map(|k| g.point(k)), d);
    }
    Err(last_err.unwrap_or(Error::Invalid("no anchor found".into())))
}

/// Conjugate sampled exactly at the slopes `k h / t` the value function visits.
pub fn aligned_dual<T: Scalar>(flux: &ConvexFlux<T>, window: T, h: T, t: T) -> Result<ConvexFlux<T>> {
    let reach = (window * t / h).ceil().to_usize().unwrap_or(0) + 1;
    let dq = h / t;
    let q_max = dq * T::from_index(reach);
    fenchel_dual(flux, DualGridSpec::new(-q_max, q_max, 2 * reach + 1)?)
}

/// Largest useful sub-cell refinement of the minimizer search.
pub const MAX_REFINEMENT: usize = 256;

/// Sub-cell factor `r` so the slope grid `h / (r t)` is no coarser than the
/// flux knots. Small times otherwise see only a handful of slopes.
pub fn dual_refinement<T: Scalar>(flux: &ConvexFlux<T>, h: T, t: T) -> usize {
    let ratio = h / (t * flux.grid().step);
    if !(ratio > T::one()) {
        return 1;
    }
    ratio.ceil().to_usize().unwrap_or(MAX_REFINEMENT).min(MAX_REFINEMENT)
}

/// Entropy solution for bounded data (flux surgery first if `f` is not
/// superlinear).
pub fn solve_linf<T: Scalar>(u0: &Profile<T>, f: &ConvexFlux<T>, times: &[T]) -> Result<Solution<T>> {
    if let Some(&t) = times.iter().find(|&&t| !(t > T::zero())) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    let bound = u0.sup_norm();
    let flux = if f.is_superlinear() { f.clone() } else { flux_surgery(f, bound)? };
    let v0 = primitive(u0);
    let lip = v0.lipschitz();
    let base = fenchel_dual(&flux, DualGridSpec::default_for(&flux))?;
    let window = search_window(lip, &base)?;
    let h = u0.grid.step;
    let slices: Vec<ValueSlice<T>> = times
        .par_iter()
        .map(|&t| {
            let r = dual_refinement(&flux, h, t);
            let dual = aligned_dual(&flux, window, h / T::from_index(r), t)?;
            hopf_lax_step_refined(&v0, &dual, t, window, lip, r)
        })
        .collect::<Result<_>>()?;
    let profiles = slices.iter().map(extract_solution).collect();
    let c1 = slices.iter().map(|s| s.c1).fold(T::zero(), T::max);
    let meta = SolutionMeta { speed: lipschitz_bound(&flux, u0, u0), window, lip_v0: lip, c1, flux_id: String::new() };
    Ok(Solution { grid: u0.grid, times: times.to_vec(), profiles, slices, initial: u0.clone(), meta })
}

/// How unbounded or large data is cut down to a bounded level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// `clamp(u, -n, n)`.
    Clamp,
    /// `n tanh(u / n)`.
    SmoothCutoff,
}

impl Truncation {
    pub fn apply<T: Scalar>(self, u0: &Profile<T>, level: usize) -> Profile<T> {
        let n = T::from_index(level);
        match self {
            Truncation::Clamp => u0.map(|u| u.max(-n).min(n)),
            Truncation::SmoothCutoff => u0.map(|u| n * (u / n).tanh()),
        }
    }
}

/// One entry of a Cauchy table: `lhs <= bound` must hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyIncrement<T> {
    pub from_level: usize,
    pub to_level: usize,
    /// `int_tau^T int |u_n - u_m| dx dt`.
    pub increment: T,
    /// `(T - tau) int |u_n0 - u_m0| dx`.
    pub bound: T,
}

impl<T: Scalar> CauchyIncrement<T> {
    pub fn slack(&self) -> T {
        self.bound - self.increment
    }

    /// Ordered truncations conserve their gap, so the bound is met with
    /// equality and the slack is only rounding noise around zero.
    pub fn rounding_floor(&self) -> T {
        T::lit(1e-10) * self.bound.abs().max(self.increment.abs()).max(T::one())
    }

    /// `slack >= -rounding_floor`.
    pub fn holds(&self) -> bool {
        self.slack() >= -self.rounding_floor()
    }
}

#[derive(Debug, Clone)]
pub struct L1Solution<T> {
    /// Finest level, at the requested times.
    pub solution: Solution<T>,
    pub levels: Vec<usize>,
    pub increments: Vec<CauchyIncrement<T>>,
    /// Finest level at the Cauchy quadrature times.
    pub quadrature: Solution<T>,
    pub tau: T,
    pub horizon: T,
}

/// Quadrature nodes on `[tau, T]` for space-time L¹ norms.
pub fn cauchy_times<T: Scalar>(horizon: T) -> (T, Vec<T>) {
    let tau = T::lit(0.1) * horizon;
    let nodes = 9;
    let dt = (horizon - tau) / T::from_index(nodes - 1);
    (tau, (0..nodes).map(|k| tau + dt * T::from_index(k)).collect())
}

/// Trapezoid L¹ distance of two profiles on a shared grid.
pub fn l1_distance<T: Scalar>(a: &Profile<T>, b: &Profile<T>) -> T {
    let g = a.grid;
    integrate_pl(&g, g.start, g.end(), |i| (a.values[i] - b.values[i]).abs())
}

/// `int_tau^T int |u - w| dx dt` over the shared times in `[tau, T]`.
pub fn space_time_l1<T: Scalar>(a: &Solution<T>, b: &Solution<T>, tau: T, horizon: T) -> T {
    let mut pts: Vec<(T, T)> = a
        .times
        .iter()
        .zip(&a.profiles)
        .filter(|(t, _)| **t >= tau - T::lit(1e-12) && **t <= horizon + T::lit(1e-12))
        .filter_map(|(&t, p)| b.profile_at(t).map(|q| (t, l1_distance(p, q))))
        .collect();
    pts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / T::lit(2.0)).sum()
}

fn merged_times<T: Scalar>(times: &[T], extra: &[T]) -> Vec<T> {
    let mut all: Vec<T> = times.iter().chain(extra).copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup_by(|a, b| same_time(*a, *b));
    all
}

fn cauchy_tolerance<T: Scalar>(h: T, data_bound: T, span: T) -> T {
    T::lit(2.0) * h * data_bound * span
}

/// Integrable data through a ladder of bounded truncations.
pub fn solve_l1<T: Scalar>(u0: &Profile<T>, f: &ConvexFlux<T>, times: &[T], levels: &[usize], truncation: Truncation) -> Result<L1Solution<T>> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("levels must be nonempty and increasing".into()));
    }
    let horizon = times.iter().copied().fold(T::zero(), T::max);
    let (tau, nodes) = cauchy_times(horizon);
    let all = merged_times(times, &nodes);
    let data: Vec<Profile<T>> = levels.iter().map(|&n| truncation.apply(u0, n)).collect();
    let sols: Vec<Solution<T>> = data.par_iter().map(|d| solve_linf(d, f, &all)).collect::<Result<_>>()?;
    let h = u0.grid.step;
    let mut increments = Vec::new();
    for k in 1..levels.len() {
        let increment = space_time_l1(&sols[k - 1], &sols[k], tau, horizon);
        let bound = (horizon - tau) * l1_distance(&data[k - 1], &data[k]);
        let tol = cauchy_tolerance(h, data[k].sup_norm(), horizon - tau);
        if increment > bound + tol {
            return Err(Error::NotCauchy { n: levels[k - 1], m: levels[k], increment: increment.as_f64(), bound: bound.as_f64() });
        }
        increments.push(CauchyIncrement { from_level: levels[k - 1], to_level: levels[k], increment, bound });
    }
    let finest = sols.into_iter().last().expect("levels nonempty");
    Ok(L1Solution {
        solution: finest.restricted_to(times),
        quadrature: finest.restricted_to(&nodes),
        levels: levels.to_vec(),
        increments,
        tau,
        horizon,
    })
}

/// Which side(s) of a semi-superlinear flux grow only linearly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthCase {
    /// `mu+ = inf`, `mu- = -inf`.
    BothSuperlinear,
    /// `mu+ = inf`, `mu- > -inf`.
    LinearBelow,
    /// `mu+ < inf`, `mu- = -inf`.
    LinearAbove,
    /// Both finite.
    LinearBoth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPoints<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

#[derive(Debug, Clone)]
pub struct TruncationLadder<T> {
    pub case: GrowthCase,
    pub levels: Vec<usize>,
    pub cut_points: Vec<CutPoints<T>>,
    pub data: Vec<Profile<T>>,
    pub fluxes: Vec<ConvexFlux<T>>,
    /// Per level, at the requested times merged with the Cauchy nodes.
    pub solutions: Vec<Solution<T>>,
    pub increments: Vec<CauchyIncrement<T>>,
    pub tau: T,
    pub horizon: T,
}

/// `u0` where `u0 >= -n`, zero elsewhere.
pub fn floor_truncation<T: Scalar>(u0: &Profile<T>, level: usize) -> Profile<T> {
    let n = T::from_index(level);
    u0.map(|u| if u >= -n { u } else { T::zero() })
}

/// `u0` where `u0 <= n`, zero elsewhere.
pub fn cap_truncation<T: Scalar>(u0: &Profile<T>, level: usize) -> Profile<T> {
    let n = T::from_index(level);
    u0.map(|u| if u <= n { u } else { T::zero() })
}

/// Knot in `(-n - 1, -n)` nearest `-n - 1/2` where `f` is differentiable.
pub fn lower_cut_point<T: Scalar>(f: &ConvexFlux<T>, level: usize) -> Result<(ConvexFlux<T>, T)> {
    let n = T::from_index(level);
    let wide = f.widen(-n - T::lit(2.0), f.grid().end());
    let g = *wide.grid();
    let target = -n - T::lit(0.5);
    let mut candidates: Vec<usize> = (0..g.len).filter(|&k| g.point(k) > -n - T::one() && g.point(k) < -n).collect();
    candidates.sort_by(|&a, &b| (g.point(a) - target).abs().partial_cmp(&(g.point(b) - target).abs()).unwrap());
    for k in candidates {
        let (l, r) = wide.slopes(g.point(k));
        if (r - l).abs() <= wide.tol_slope() {
            return Ok((wide.clone(), g.point(k)));
        }
    }
    let (l, r) = wide.slopes(target);
    Err(Error::NotDifferentiableAtAnchor { at: target.as_f64(), left: l.as_f64(), right: r.as_f64() })
}

fn growth_case<T: Scalar>(f: &ConvexFlux<T>) -> Result<GrowthCase> {
    Ok(match f.classify_growth()? {
        Growth::Superlinear => GrowthCase::BothSuperlinear,
        Growth::SemiSuperlinear { mu_minus: Some(_), mu_plus: None } => GrowthCase::LinearBelow,
        Growth::SemiSuperlinear { mu_minus: None, mu_plus: Some(_) } => GrowthCase::LinearAbove,
        Growth::SemiSuperlinear { mu_minus: Some(_), mu_plus: Some(_) } => GrowthCase::LinearBoth,
        Growth::SemiSuperlinear { mu_minus: None, mu_plus: None } => GrowthCase::BothSuperlinear,
    })
}

/// Truncation ladder for fluxes with linear growth on one or both sides.
///
/// Level `n` zeroes data below `-n` and replaces the flux below a cut point
/// `p_n in (-n - 1, -n)` by a parabola. Linear growth above is handled by
/// the reflection `u(x, t) -> -u(-x, t)`, `f(p) -> f(-p)`; linear growth on
/// both sides floors first and caps second.
pub fn solve_semisuperlinear<T: Scalar>(u0: &Profile<T>, f: &ConvexFlux<T>, times: &[T], levels: &[usize]) -> Result<TruncationLadder<T>> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("levels must be nonempty and increasing".into()));
    }
    let case = growth_case(f)?;
    if case == GrowthCase::LinearAbove {
        let mut ladder = solve_semisuperlinear(&u0.reflect_odd(), &f.reflect(), times, levels)?;
        ladder.case = case;
        ladder.cut_points = ladder.cut_points.iter().map(|c| CutPoints { lower: c.upper.map(|p| -p), upper: c.lower.map(|p| -p) }).collect();
        ladder.data = ladder.data.iter().map(Profile::reflect_odd).collect();
        ladder.fluxes = ladder.fluxes.iter().map(ConvexFlux::reflect).collect();
        ladder.solutions = ladder.solutions.iter().map(reflect_solution).collect();
        return Ok(ladder);
    }
    let d = T::lit(DEFAULT_TAIL_CURVATURE);
    let mut cut_points = Vec::new();
    let mut data = Vec::new();
    let mut fluxes = Vec::new();
    for &n in levels {
        let (mut flux, mut cuts, mut level_data) = (f.clone(), CutPoints { lower: None, upper: None }, floor_truncation(u0, n));
        if matches!(case, GrowthCase::LinearBelow | GrowthCase::LinearBoth) {
            let (wide, p) = lower_cut_point(&flux, n)?;
            flux = extend_tails(&wide, Some(p), None, d)?;
            cuts.lower = Some(p);
        }
        if case == GrowthCase::LinearBoth {
            level_data = cap_truncation(&level_data, n);
            let (wide, p) = lower_cut_point(&flux.reflect(), n)?;
            flux = extend_tails(&wide, Some(p), None, d)?.reflect();
            cuts.upper = Some(-p);
        }
        cut_points.push(cuts);
        data.push(level_data);
        fluxes.push(flux);
    }
    let horizon = times.iter().copied().fold(T::zero(), T::max);
    let (tau, nodes) = cauchy_times(horizon);
    let all = merged_times(times, &nodes);
    let solutions: Vec<Solution<T>> = data.par_iter().zip(&fluxes).map(|(d, f)| solve_linf(d, f, &all)).collect::<Result<_>>()?;

    if case != GrowthCase::LinearBoth {
        for k in 1..levels.len() {
            check_ladder_order(&solutions[k - 1], &solutions[k], levels[k - 1], levels[k])?;
        }
    }
    let mut increments = Vec::new();
    if levels.len() >= 2 {
        let k = levels.len() - 1;
        let increment = space_time_l1(&solutions[k - 1], &solutions[k], tau, horizon);
        let bound = (horizon - tau) * l1_distance(&data[k - 1], &data[k]);
        let tol = cauchy_tolerance(u0.grid.step, data[k].sup_norm(), horizon - tau);
        if increment > bound + tol {
            return Err(Error::NotCauchy { n: levels[k - 1], m: levels[k], increment: increment.as_f64(), bound: bound.as_f64() });
        }
        increments.push(CauchyIncrement { from_level: levels[k - 1], to_level: levels[k], increment, bound });
    }
    Ok(TruncationLadder { case, levels: levels.to_vec(), cut_points, data, fluxes, solutions, increments, tau, horizon })
}

/// `(alpha, tau)` with `|f(p)| <= alpha + tau |p|` over the range of `u0`,
/// `tau` the largest finite growth rate of `f`.
pub fn linear_growth_constants<T: Scalar>(f: &ConvexFlux<T>, u0: &Profile<T>) -> Result<(T, T)> {
    let rate = match f.classify_growth()? {
        Growth::Superlinear => T::zero(),
        Growth::SemiSuperlinear { mu_minus, mu_plus } => mu_minus.unwrap_or(T::zero()).abs().max(mu_plus.unwrap_or(T::zero()).abs()),
    };
    let (lo, hi) = (u0.min_value(), u0.max_value());
    let g = f.grid();
    let candidates = g.points().filter(|&p| p > lo && p < hi).chain([lo, hi, T::zero().max(lo).min(hi)]);
    let alpha = candidates.map(|p| f.eval(p).abs() - rate * p.abs()).fold(T::zero(), T::max);
    Ok((alpha, rate))
}

/// Pointwise tolerance for comparing two ladder levels.
pub fn ladder_tolerance<T: Scalar>() -> T {
    T::lit(1e-8)
}

fn check_ladder_order<T: Scalar>(upper: &Solution<T>, lower: &Solution<T>, n: usize, m: usize) -> Result<()> {
    let tol = ladder_tolerance::<T>();
    for ((t, a), b) in upper.times.iter().zip(&upper.profiles).zip(&lower.profiles) {
        for (i, (ua, ub)) in a.values.iter().zip(&b.values).enumerate() {
            let excess = *ub - *ua;
            if excess > tol {
                return Err(Error::NotMonotone { n, m, excess: excess.as_f64(), x: a.grid.point(i).as_f64(), t: t.as_f64() });
            }
        }
    }
    Ok(())
}

fn reflect_solution<T: Scalar>(s: &Solution<T>) -> Solution<T> {
    let profiles: Vec<Profile<T>> = s.profiles.iter().map(reflect_cells).collect();
    Solution {
        grid: profiles.first().map_or(s.initial.reflect_odd().grid, |p| p.grid),
        times: s.times.clone(),
        profiles,
        slices: Vec::new(),
        initial: s.initial.reflect_odd(),
        meta: s.meta.clone(),
    }
}

/// Odd reflection of a backward-difference profile: cell `i` covers
/// `[x_{i-1}, x_i]`, so values shift by one knot under `x -> -x`.
fn reflect_cells<T: Scalar>(p: &Profile<T>) -> Profile<T> {
    let r = p.reflect_odd();
    let n = r.values.len();
    let (left, right) = match r.extension {
        Extension::Constant { left, right } => (left, right),
        Extension::Linear { .. } => (r.values[0], r.values[n - 1]),
    };
    let mut values = Vec::with_capacity(n);
    values.push(left);
    values.extend_from_slice(&r.values[..n - 1]);
    Profile { grid: r.grid, values, extension: Extension::Constant { left, right } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_flux::presets;
    use approx::assert_abs_diff_eq;

    fn grid() -> UniformGrid<f64> {
        UniformGrid::spanning(-3.0, 3.0, 601)
    }

    fn riemann(ul: f64, ur: f64) -> Profile<f64> {
        Profile::from_fn(grid(), move |x| if x < 0.0 { ul } else if x > 0.0 { ur } else { 0.5 * (ul + ur) })
    }

    #[test]
    fn constants_are_exact() {
        let u0 = Profile::from_fn(grid(), |_| 0.7);
        let sol = solve_linf(&u0, &presets::burgers(4.0, 801), &[0.5, 1.0, 2.0]).unwrap();
        for p in &sol.profiles {
            assert!(p.values.iter().all(|v| (v - 0.7).abs() < 1e-9));
        }
        assert!(matches!(solve_linf(&u0, &presets::burgers(4.0, 801), &[-1.0]), Err(Error::InvalidTime(_))));
    }

    #[test]
    fn shock_moves_at_rankine_hugoniot_speed() {
        let sol = solve_linf(&riemann(1.0, 0.0), &presets::burgers(4.0, 801), &[0.5, 1.0, 2.0]).unwrap();
        let h = grid().step;
        for (t, p) in sol.times.iter().zip(&sol.profiles) {
            let i = p.values.iter().position(|&v| v < 0.5).unwrap();
            let x = grid().point(i) - h / 2.0;
            assert!((x - t / 2.0).abs() <= 2.0 * h, "t {t}: shock at {x}");
            assert!(p.sup_norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn lipschitz_bounds() {
        let one = Profile::from_fn(grid(), |x| if x.abs() < 1.0 { 1.0 } else { 0.0 });
        let b = presets::burgers(4.0, 801);
        let h = b.grid().step;
        assert!((lipschitz_bound(&b, &one, &one) - 1.0).abs() <= h);
        let abs = presets::abs(4.0, 81);
        assert_abs_diff_eq!(lipschitz_bound(&abs, &one, &one.map(|u| 3.0 * u)), 1.0, epsilon = 1e-12);
        let zero = Profile::from_fn(grid(), |_| 0.0);
        assert_abs_diff_eq!(lipschitz_bound(&abs, &zero, &zero), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn surgery_keeps_flux_near_data() {
        let abs = presets::abs(4.0, 401);
        let g = flux_surgery(&abs, 1.0).unwrap();
        assert!(g.is_superlinear());
        for i in 0..=400 {
            let p = -2.0 + i as f64 * 0.01;
            assert_abs_diff_eq!(g.eval(p), abs.eval(p), epsilon = 1e-12);
        }
        let b = presets::burgers(2.0, 41);
        assert_eq!(flux_surgery(&b, 1.0).unwrap(), b);
        // kinks at the nominal anchors push the anchors outward
        let kinked = crate::convex_flux::ConvexFlux::from_fn(
            -4.0,
            4.0,
            81,
            |p: f64| p.abs().max(2.0 * p.abs() - 2.0),
            crate::Tail::Linear { slope: -2.0 },
            crate::Tail::Linear { slope: 2.0 },
        )
        .unwrap();
        let g = flux_surgery(&kinked, 1.0).unwrap();
        assert!(g.grid().start < -2.0 && g.grid().end() > 2.0);
    }

    #[test]
    fn bounded_data_ladder_is_flat() {
        let u0 = riemann(1.0, 0.0).map(|u| u * 0.5);
        let out = solve_l1(&u0, &presets::burgers(4.0, 801), &[1.0], &[1, 2, 3], Truncation::Clamp).unwrap();
        for inc in &out.increments {
            assert_abs_diff_eq!(inc.increment, 0.0);
            assert_abs_diff_eq!(inc.bound, 0.0);
        }
    }

    #[test]
    fn floor_inactive_above_minus_n() {
        let u0 = Profile::from_fn(grid(), |x| if x.abs() < 1.0 { -0.8 } else { 0.0 });
        assert_eq!(floor_truncation(&u0, 2), u0);
        let deep = u0.map(|u| 5.0 * u);
        assert!(floor_truncation(&deep, 3).values.iter().all(|&v| v == 0.0));
        assert!(cap_truncation(&deep.map(|u| -u), 3).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cut_points_sit_in_open_interval() {
        let f = presets::semisuperlinear_demo(4.0, 801);
        for n in [1usize, 3, 10] {
            let (_, p) = lower_cut_point(&f, n).unwrap();
            assert!(p > -(n as f64) - 1.0 && p < -(n as f64));
        }
    }

    #[test]
    fn reflected_case_matches_direct() {
        let f = presets::semisuperlinear_demo(4.0, 801);
        let u0 = Profile::from_fn(grid(), |x| if (0.0..1.0).contains(&x) { -2.5 } else { 0.0 });
        let direct = solve_semisuperlinear(&u0, &f, &[0.5], &[2, 3]).unwrap();
        let mirrored = solve_semisuperlinear(&u0.reflect_odd(), &f.reflect(), &[0.5], &[2, 3]).unwrap();
        assert_eq!(mirrored.case, GrowthCase::LinearAbove);
        assert_eq!(direct.case, GrowthCase::LinearBelow);
        let a = &direct.solutions[1].profiles;
        let b = &mirrored.solutions[1].profiles;
        for (pa, pb) in a.iter().zip(b) {
            let back = reflect_cells(pb);
            for (x, y) in pa.values.iter().zip(&back.values) {
                assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }
    }
}
