//! Value function `V(x, t) = min_y { v0(y) + t f*((x - y) / t) }` on a grid.
//!
//! Minimizers never cross (`y+(x) <= y-(x')` for `x < x'`), so the cost matrix
//! over (x-knot, y-knot) pairs has monotone row minima. Rows are solved by
//! divide and conquer: the middle row is scanned over its admissible band,
//! and its minimizer splits the columns left to the rows above and below.

use crate::convex_flux::{ConvexFlux, Tail};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::profile::{Extension, Profile};
use crate::Scalar;

/// `V(., t)` with the extreme minimizers at every knot.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSlice<T> {
    pub t: T,
    pub grid: UniformGrid<T>,
    pub values: Vec<T>,
    pub y_minus: Vec<T>,
    pub y_plus: Vec<T>,
    pub lip_v0: T,
    /// Search window `M`: all minimizers satisfy `|x - y| <= M t`.
    pub window: T,
    /// Time-Lipschitz constant `|f*(0)| + lip(v0) + sup_{|z| <= M} |f*(z)|`.
    pub c1: T,
    /// Slopes of `V` beyond the grid, i.e. the data values there.
    pub edge_slopes: (T, T),
}

/// Near-ties within this tolerance count as minimizers.
#[inline]
pub fn tol_min<T: Scalar>(v: T) -> T {
    T::lit(1e-9).max(T::lit(16.0) * T::epsilon()) * (T::one() + v.abs())
}

/// Primitive of `u0` vanishing at the knot nearest the origin.
///
/// The trapezoid rule integrates the interpolant of the samples; beyond the
/// grid `v0` grows with the constant data values on each side.
pub fn primitive<T: Scalar>(u0: &Profile<T>) -> Profile<T> {
    let g = u0.grid;
    let n = u0.len();
    let h = g.step;
    let half = T::lit(0.5);
    let mut v = vec![T::zero(); n];
    for i in 1..n {
        v[i] = v[i - 1] + h * half * (u0.values[i - 1] + u0.values[i]);
    }
    let origin = v[g.nearest(T::zero())];
    for x in &mut v {
        *x = *x - origin;
    }
    let (left_slope, right_slope) = match u0.extension {
        Extension::Constant { left, right } => (left, right),
        Extension::Linear { .. } => (u0.values[0], u0.values[n - 1]),
    };
    Profile { grid: g, values: v, extension: Extension::Linear { left_slope, right_slope } }
}

/// Smallest `q0 >= 1` with `f*(q) >= (lip + 2|f*(0)|) |q|` for all `|q| >= q0`.
pub fn search_window<T: Scalar>(lip_v0: T, fstar: &ConvexFlux<T>) -> Result<T> {
    let c = lip_v0 + T::lit(2.0) * fstar.eval(T::zero()).abs();
    let g = *fstar.grid();
    let vals = fstar.values();
    let scale = T::one() + vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = T::lit(1e-12).max(T::lit(16.0) * T::epsilon()) * scale;
    let holds = |q: T, v: T| v >= c * q.abs() - tol;

    // threshold from each tail: beyond it the inequality holds for good
    let tail_threshold = |tail: Tail<T>, anchor: T, value: T, outward: T| -> Result<T> {
        let at = anchor.abs();
        match tail {
            Tail::Linear { slope } => {
                // slope measured outward must reach c
                if slope * outward >= c && holds(anchor, value) {
                    Ok(at)
                } else {
                    Err(Error::WindowNotFound { slope: c.as_f64() })
                }
            }
            Tail::Quadratic { slope, curvature } => {
                // value(d) - c |anchor + outward d| for d >= 0, with |anchor| = outward * anchor
                let s = slope * outward - c;
                let a = value - c * at;
                if s >= T::zero() && a >= -tol {
                    return Ok(at);
                }
                // largest root of a + s d + D d^2
                let disc = s * s - T::lit(4.0) * curvature * a;
                if disc <= T::zero() {
                    return Ok(at);
                }
                let d = (-s + disc.sqrt()) / (T::lit(2.0) * curvature);
                Ok(at + d.max(T::zero()))
            }
        }
    };
    let outward_right = if g.end() >= T::zero() { T::one() } else { -T::one() };
    let outward_left = if g.start <= T::zero() { -T::one() } else { T::one() };
    let right_min = tail_threshold(fstar.right_tail(), g.end(), vals[g.len - 1], outward_right)?;
    let left_min = tail_threshold(fstar.left_tail(), g.start, vals[0], outward_left)?;

    let one = T::one();
    let worst_bad = (0..g.len)
        .map(|i| (g.point(i), vals[i]))
        .filter(|&(q, v)| q.abs() >= one && !holds(q, v))
        .map(|(q, _)| q.abs())
        .fold(T::neg_infinity(), T::max);
    let mut q0 = one;
    if worst_bad > T::neg_infinity() {
        // next knot magnitude above the last violation
        let next = (0..g.len).map(|i| g.point(i).abs()).filter(|&a| a > worst_bad).fold(T::infinity(), T::min);
        if next.is_finite() {
            q0 = q0.max(next);
        }
    }
    // a tail that dips below the line pushes q0 past its last crossing
    if right_min > g.end().abs() {
        q0 = q0.max(right_min);
    }
    if left_min > g.start.abs() {
        q0 = q0.max(left_min);
    }
    Ok(q0.max(one))
}

/// Row minima of a banded cost matrix whose minimizers are monotone.
/// Row `i` may use columns `i * stride..=i * stride + width`. Returns
/// `(min, pick)` where `pick` is the leftmost or rightmost column within
/// [`tol_min`] of the min.
fn banded_row_minima<T: Scalar>(rows: usize, stride: usize, width: usize, cost: &impl Fn(usize, usize) -> T, rightmost: bool) -> Vec<(T, usize)> {
    let mut out = vec![(T::zero(), 0); rows];
    let mut stack = vec![(0usize, rows, 0usize, (rows - 1) * stride + width)];
    while let Some((r0, r1, c0, c1)) = stack.pop() {
        if r0 >= r1 {
            continue;
        }
        let mid = (r0 + r1) / 2;
        let band = mid * stride;
        let (mut lo, mut hi) = (c0.max(band), c1.min(band + width));
        if lo > hi {
            lo = band;
            hi = band + width;
        }
        let best = (lo..=hi).map(|j| cost(mid, j)).fold(T::infinity(), T::min);
        let cut = best + tol_min(best);
        let pick = if rightmost {
            (lo..=hi).rev().find(|&j| cost(mid, j) <= cut).unwrap_or(hi)
        } else {
            (lo..=hi).find(|&j| cost(mid, j) <= cut).unwrap_or(lo)
        };
        out[mid] = (best, pick);
        stack.push((r0, mid, c0, pick));
        stack.push((mid + 1, r1, pick, c1));
    }
    out
}

/// One Hopf–Lax step of length `t` from `init`, searching `|x - y| <= window t`.
pub fn hopf_lax_step<T: Scalar>(init: &Profile<T>, fstar: &ConvexFlux<T>, t: T, window: T, lip: T) -> Result<ValueSlice<T>> {
    hopf_lax_step_refined(init, fstar, t, window, lip, 1)
}

/// [`hopf_lax_step`] with candidate points `y` on a grid `refine` times finer
/// than the knots; `init` is linear between knots. Slopes `(x - y) / t` then
/// step by `h / (refine t)`, which is the grid `fstar` should be sampled on.
pub fn hopf_lax_step_refined<T: Scalar>(init: &Profile<T>, fstar: &ConvexFlux<T>, t: T, window: T, lip: T, refine: usize) -> Result<ValueSlice<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    let r = refine.max(1);
    let g = init.grid;
    let n = init.len();
    let hy = g.step / T::from_index(r);
    let reach = (window * t / hy * (T::one() - T::lit(1e-12))).ceil().to_usize().unwrap_or(0);
    let width = 2 * reach;
    let k0 = reach as isize;
    let columns = (n - 1) * r + width + 1;
    let vy: Vec<T> = (0..columns)
        .map(|j| {
            let off = j as isize - k0;
            let (k, m) = (off.div_euclid(r as isize), off.rem_euclid(r as isize));
            if m == 0 {
                init.at(k)
            } else {
                let w = T::from_index(m as usize) / T::from_index(r);
                init.at(k) + (init.at(k + 1) - init.at(k)) * w
            }
        })
        .collect();
    let scaled: Vec<T> = (0..=width).map(|idx| t * fstar.eval(T::from_offset(idx as isize - k0) * hy / t)).collect();
    let cost = |i: usize, j: usize| vy[j] + scaled[i * r + width - j];

    let left = banded_row_minima(n, r, width, &cost, false);
    let right = banded_row_minima(n, r, width, &cost, true);
    let y_at = |j: usize| g.start + T::from_offset(j as isize - k0) * hy;

    let values = left.iter().zip(&right).map(|(a, b)| a.0.min(b.0)).collect();
    let y_minus = left.iter().map(|&(_, j)| y_at(j)).collect();
    let y_plus = right.iter().map(|&(_, j)| y_at(j)).collect();

    let c1 = time_lipschitz(fstar, lip, window);
    let edge_slopes = match init.extension {
        Extension::Linear { left_slope, right_slope } => (left_slope, right_slope),
        Extension::Constant { .. } => (T::zero(), T::zero()),
    };
    Ok(ValueSlice { t, grid: g, values, y_minus, y_plus, lip_v0: lip, window, c1, edge_slopes })
}

fn time_lipschitz<T: Scalar>(fstar: &ConvexFlux<T>, lip: T, window: T) -> T {
    let g = fstar.grid();
    let lambda = g
        .points()
        .zip(fstar.values())
        .filter(|(q, _)| q.abs() <= window)
        .map(|(_, v)| v.abs())
        .fold(fstar.eval(window).abs().max(fstar.eval(-window).abs()), T::max);
    fstar.eval(T::zero()).abs() + lip + lambda
}

/// `V(., t)` for the primitive `v0` of the data.
pub fn value_slice<T: Scalar>(v0: &Profile<T>, fstar: &ConvexFlux<T>, t: T) -> Result<ValueSlice<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    let lip = v0.lipschitz();
    let window = search_window(lip, fstar)?;
    hopf_lax_step(v0, fstar, t, window, lip)
}

/// `V(x, s, t)`: restart the minimization from `V(., s)`.
pub fn two_step_value<T: Scalar>(v0: &Profile<T>, fstar: &ConvexFlux<T>, s: T, t: T) -> Result<ValueSlice<T>> {
    if !(s >= T::zero() && s < t) {
        return Err(Error::InvalidTimes { s: s.as_f64(), t: t.as_f64() });
    }
    if s == T::zero() {
        return value_slice(v0, fstar, t);
    }
    let lip = v0.lipschitz();
    let window = search_window(lip, fstar)?;
    let first = hopf_lax_step(v0, fstar, s, window, lip)?;
    let (left_slope, right_slope) = first.edge_slopes;
    let mid = Profile { grid: first.grid, values: first.values, extension: Extension::Linear { left_slope, right_slope } };
    let mut second = hopf_lax_step(&mid, fstar, t - s, window, lip)?;
    second.t = t;
    Ok(second)
}

/// `u = dV/dx` by backward differences; knot 0 takes the left data value.
pub fn extract_solution<T: Scalar>(slice: &ValueSlice<T>) -> Profile<T> {
    let h = slice.grid.step;
    let v = &slice.values;
    let mut u = Vec::with_capacity(v.len());
    u.push(slice.edge_slopes.0);
    u.extend(v.windows(2).map(|w| (w[1] - w[0]) / h));
    let (left, right) = slice.edge_slopes;
    Profile { grid: slice.grid, values: u, extension: Extension::Constant { left, right } }
}

/// Extreme minimizers `(y-, y+)` at knot `i`.
pub fn characteristics<T: Scalar>(slice: &ValueSlice<T>, i: usize) -> Result<(T, T)> {
    if i >= slice.values.len() {
        return Err(Error::IndexOutOfRange { index: i, len: slice.values.len() });
    }
    Ok((slice.y_minus[i], slice.y_plus[i]))
}

impl<T: Scalar> ValueSlice<T> {
    /// Knots whose minimizer bracket is wider than one grid cell.
    pub fn shock_knots(&self) -> Vec<usize> {
        let h = self.grid.step;
        (0..self.values.len()).filter(|&i| self.y_plus[i] - self.y_minus[i] > h * T::lit(1.5)).collect()
    }
}
