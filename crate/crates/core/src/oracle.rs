//! Independent references: a Godunov finite-volume scheme and exhaustive
//! minimization of the variational formulas.
//!
//! Cell `i` of the finite-volume grid is `[x_{i-1}, x_i]`, the same cell a
//! backward difference of the value function describes, so both schemes
//! produce directly comparable arrays.

use rayon::prelude::*;

use crate::convex_flux::{ConvexFlux, Tail};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::hopf_lax::{search_window, tol_min};
use crate::profile::{integrate_pl, Extension, Profile};
use crate::solver::{same_time, Solution, SolutionMeta};
use crate::Scalar;

const PARALLEL_CELLS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FvConfig<T> {
    /// Courant number in `(0, 1)`.
    pub cfl: T,
    /// Number of knots; the data is resampled when it differs from the input.
    pub nx: usize,
    pub t_end: T,
}

impl<T: Scalar> FvConfig<T> {
    pub fn new(cfl: T, nx: usize, t_end: T) -> Result<Self> {
        let cfg = Self { cfl, nx, t_end };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl > T::zero() && self.cfl < T::one()) {
            return Err(Error::CflViolation(self.cfl.as_f64()));
        }
        if !(self.t_end > T::zero()) {
            return Err(Error::InvalidTime(self.t_end.as_f64()));
        }
        if self.nx < 3 {
            return Err(Error::TooFewKnots { min: 3, got: self.nx });
        }
        Ok(())
    }

    /// `cfl h / max |f'|` over the range of the data.
    pub fn time_step(&self, f: &ConvexFlux<T>, u0: &Profile<T>, h: T) -> T {
        let speed = f.max_abs_slope(u0.min_value(), u0.max_value());
        if speed > T::zero() {
            self.cfl * h / speed
        } else {
            self.t_end
        }
    }
}

/// Godunov flux for convex `f`; `p_star` is a global minimizer of `f`.
#[inline]
fn godunov_flux<T: Scalar>(f: &ConvexFlux<T>, p_star: T, a: T, b: T) -> T {
    if a <= b {
        f.eval(p_star.max(a).min(b))
    } else {
        f.eval(a).max(f.eval(b))
    }
}

/// Cell averages of `u0` on `grid` (cell 0 is the left pad).
fn cell_averages<T: Scalar>(u0: &Profile<T>, grid: UniformGrid<T>) -> Profile<T> {
    let h = grid.step;
    let (left, right) = match u0.extension {
        Extension::Constant { left, right } => (left, right),
        Extension::Linear { .. } => (u0.values[0], u0.values[u0.len() - 1]),
    };
    let mut values = Vec::with_capacity(grid.len);
    values.push(left);
    if grid.same_as(&u0.grid) {
        values.extend(u0.values.windows(2).map(|w| (w[0] + w[1]) / T::lit(2.0)));
    } else {
        for i in 1..grid.len {
            values.push(u0.integrate(grid.point(i - 1), grid.point(i)) / h);
        }
    }
    Profile { grid, values, extension: Extension::Constant { left, right } }
}

fn step<T: Scalar>(f: &ConvexFlux<T>, p_star: T, u: &[T], pads: (T, T), ratio: T, out: &mut [T]) {
    let n = u.len();
    let cell = |i: usize| {
        let ul = if i == 0 { pads.0 } else { u[i - 1] };
        let ur = if i + 1 == n { pads.1 } else { u[i + 1] };
        let flux_in = godunov_flux(f, p_star, ul, u[i]);
        let flux_out = godunov_flux(f, p_star, u[i], ur);
        u[i] - ratio * (flux_out - flux_in)
    };
    if n >= PARALLEL_CELLS {
        out.par_iter_mut().enumerate().for_each(|(i, v)| *v = cell(i));
    } else {
        for (i, v) in out.iter_mut().enumerate() {
            *v = cell(i);
        }
    }
}

/// Godunov solution at `t_end`.
pub fn godunov<T: Scalar>(u0: &Profile<T>, f: &ConvexFlux<T>, cfg: FvConfig<T>) -> Result<Solution<T>> {
    godunov_at(u0, f, cfg, &[cfg.t_end])
}

/// Godunov solution sampled at increasing output times (each `<= t_end`).
pub fn godunov_at<T: Scalar>(u0: &Profile<T>, f: &ConvexFlux<T>, cfg: FvConfig<T>, times: &[T]) -> Result<Solution<T>> {
    cfg.validate()?;
    if let Some(&t) = times.iter().find(|&&t| !(t > T::zero()) || t > cfg.t_end * (T::one() + T::lit(1e-12))) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("output times must increase".into()));
    }
    let grid = if u0.len() == cfg.nx { u0.grid } else { UniformGrid::spanning(u0.grid.start, u0.grid.end(), cfg.nx) };
    let init = cell_averages(u0, grid);
    let h = grid.step;
    let dt_max = cfg.time_step(f, &init, h);
    let p_star = f.argmin_point();
    let pads = match init.extension {
        Extension::Constant { left, right } => (left, right),
        Extension::Linear { .. } => unreachable!(),
    };
    let mut u = init.values.clone();
    let mut next = u.clone();
    let mut now = T::zero();
    let mut profiles = Vec::with_capacity(times.len());
    for &target in times {
        while now < target {
            let dt = dt_max.min(target - now);
            step(f, p_star, &u, pads, dt / h, &mut next);
            std::mem::swap(&mut u, &mut next);
            now = if target - now <= dt_max { target } else { now + dt };
        }
        profiles.push(Profile { grid, values: u.clone(), extension: init.extension });
    }
    let meta = SolutionMeta { speed: f.max_abs_slope(init.min_value(), init.max_value()), ..SolutionMeta::default() };
    Ok(Solution { grid, times: times.to_vec(), profiles, slices: Vec::new(), initial: u0.clone(), meta })
}

/// `sup_p { q p - f(p) }` by a full scan of the knots plus the tails.
pub fn brute_force_conjugate<T: Scalar>(f: &ConvexFlux<T>, q: T) -> T {
    let g = f.grid();
    let fv = f.values();
    let mut best = T::neg_infinity();
    for (i, &v) in fv.iter().enumerate() {
        best = best.max(q * g.point(i) - v);
    }
    let n = fv.len();
    let tails = [(f.left_tail(), g.start, fv[0], -T::one()), (f.right_tail(), g.end(), fv[n - 1], T::one())];
    for (tail, anchor, value, dir) in tails {
        match tail {
            Tail::Quadratic { slope, curvature } => {
                // along p = anchor + dir d, d >= 0
                let rate = dir * (q - slope);
                if rate > T::zero() {
                    best = best.max(q * anchor - value + rate * rate / (T::lit(4.0) * curvature));
                }
            }
            Tail::Linear { slope } => {
                if dir * (q - slope) > T::zero() {
                    return T::infinity();
                }
            }
        }
    }
    best
}

/// `min_y { v0(y) + t f*((x - y) / t) }` over `y = x + k dy`, `|k dy| <= M t`.
///
/// Returns the minimum and every sampled `y` within `tol_min` of it.
pub fn brute_force_value<T: Scalar>(v0: &Profile<T>, fstar: &ConvexFlux<T>, x: T, t: T, y_resolution: T) -> Result<(T, Vec<T>)> {
    if !(t > T::zero()) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    if !(y_resolution > T::zero()) {
        return Err(Error::Invalid("y_resolution must be positive".into()));
    }
    let window = search_window(v0.lipschitz(), fstar)?;
    let reach = (window * t / y_resolution).ceil().to_isize().unwrap_or(0);
    let samples: Vec<(T, T)> = (-reach..=reach)
        .into_par_iter()
        .map(|k| {
            let y = x + y_resolution * T::from_offset(k);
            (y, v0.eval(y) + t * fstar.eval((x - y) / t))
        })
        .collect();
    let best = samples.iter().map(|s| s.1).fold(T::infinity(), T::min);
    let tol = tol_min(best);
    let minimizers = samples.iter().filter(|s| s.1 - best <= tol).map(|s| s.0).collect();
    Ok((best, minimizers))
}

/// Value at a fine knot of a profile stored per cell `[x_{i-1}, x_i]`.
fn cell_lookup<T: Scalar>(p: &Profile<T>, x: T) -> T {
    let r = p.grid.position(x).ceil();
    if r <= T::zero() {
        return p.values[0];
    }
    let i = r.to_usize().unwrap_or(usize::MAX);
    if i >= p.len() {
        p.at(p.len() as isize)
    } else {
        p.values[i]
    }
}

/// Trapezoid L¹ distance over `window` at every common time.
///
/// Different grids are compared on the finer one, reading the coarse profile
/// cell by cell.
pub fn cross_validate<T: Scalar>(a: &Solution<T>, b: &Solution<T>, window: (T, T)) -> Result<Vec<(T, T)>> {
    let (fine, coarse) = if a.grid.step <= b.grid.step { (a, b) } else { (b, a) };
    let mut out = Vec::new();
    for (&t, p) in fine.times.iter().zip(&fine.profiles) {
        let Some(k) = coarse.times.iter().position(|&s| same_time(s, t)) else { continue };
        let q = &coarse.profiles[k];
        let g = p.grid;
        let gap = if g.same_as(&q.grid) {
            integrate_pl(&g, window.0, window.1, |i| (p.values[i] - q.values[i]).abs())
        } else {
            let h = g.step;
            let other: Vec<T> = (0..g.len).map(|i| cell_lookup(q, g.point(i) - h / T::lit(2.0))).collect();
            integrate_pl(&g, window.0, window.1, |i| (p.values[i] - other[i]).abs())
        };
        out.push((t, gap));
    }
    if out.is_empty() {
        return Err(Error::NoCommonTimes);
    }
    Ok(out)
}
