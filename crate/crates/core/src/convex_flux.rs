//! Convex fluxes sampled on uniform knots with analytic tails.
//!
//! A [`ConvexFlux`] is the piecewise-linear interpolant of its samples on
//! `[p_0, p_n]`, continued to the whole line by one tail on each side. A
//! quadratic tail `f(A) + s (p - A) + D (p - A)^2` gives superlinear growth on
//! that side, a linear tail `f(A) + mu (p - A)` gives asymptotic slope `mu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::scalar::max_abs;
use crate::Scalar;

/// Continuation of a flux beyond the last knot on one side.
///
/// `slope` is the derivative at the anchor knot. For the left tail the
/// anchor is the first knot, for the right tail the last one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail<T> {
    Quadratic { slope: T, curvature: T },
    Linear { slope: T },
}

impl<T: Scalar> Tail<T> {
    pub fn anchor_slope(&self) -> T {
        match *self {
            Tail::Quadratic { slope, .. } | Tail::Linear { slope } => slope,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, Tail::Quadratic { .. })
    }

    /// Value at distance `d` from the anchor (`d` signed, away from the grid).
    #[inline]
    fn value(&self, anchor_value: T, d: T) -> T {
        match *self {
            Tail::Quadratic { slope, curvature } => anchor_value + slope * d + curvature * d * d,
            Tail::Linear { slope } => anchor_value + slope * d,
        }
    }

    #[inline]
    fn derivative(&self, d: T) -> T {
        match *self {
            Tail::Quadratic { slope, curvature } => slope + T::lit(2.0) * curvature * d,
            Tail::Linear { slope } => slope,
        }
    }

    /// The same tail re-anchored `d` further out.
    fn shifted(&self, d: T) -> Self {
        match *self {
            Tail::Quadratic { curvature, .. } => Tail::Quadratic { slope: self.derivative(d), curvature },
            Tail::Linear { slope } => Tail::Linear { slope },
        }
    }

    fn mirrored(&self) -> Self {
        match *self {
            Tail::Quadratic { slope, curvature } => Tail::Quadratic { slope: -slope, curvature },
            Tail::Linear { slope } => Tail::Linear { slope: -slope },
        }
    }
}

/// Growth of `f(p) / |p|` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Growth<T> {
    Superlinear,
    /// `mu_minus = None` stands for `-inf`, `mu_plus = None` for `+inf`.
    SemiSuperlinear { mu_minus: Option<T>, mu_plus: Option<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFlux<T> {
    grid: UniformGrid<T>,
    values: Vec<T>,
    left: Tail<T>,
    right: Tail<T>,
}

/// Validates samples and tails and assembles a flux.
pub fn build_flux<T: Scalar>(knots: &[T], values: &[T], left: Tail<T>, right: Tail<T>) -> Result<ConvexFlux<T>> {
    if knots.len() != values.len() {
        return Err(Error::LengthMismatch { knots: knots.len(), values: values.len() });
    }
    if knots.len() < 3 {
        return Err(Error::TooFewKnots { min: 3, got: knots.len() });
    }
    let n = knots.len();
    let h = (knots[n - 1] - knots[0]) / T::from_index(n - 1);
    if !(h > T::zero()) {
        return Err(Error::NonUniformGrid { index: 0 });
    }
    let scale = max_abs(knots) / h;
    let tol = h * T::lit(1e-9).max(T::lit(100.0) * T::epsilon() * scale);
    for i in 0..n - 1 {
        if !((knots[i + 1] - knots[i] - h).abs() <= tol) {
            return Err(Error::NonUniformGrid { index: i });
        }
    }
    ConvexFlux::from_samples(UniformGrid::new(knots[0], h, n), values.to_vec(), left, right)
}

impl<T: Scalar> ConvexFlux<T> {
    /// Builds and validates a flux on an explicit uniform grid.
    pub fn from_samples(grid: UniformGrid<T>, values: Vec<T>, left: Tail<T>, right: Tail<T>) -> Result<Self> {
        if grid.len < 3 {
            return Err(Error::TooFewKnots { min: 3, got: grid.len });
        }
        if values.len() != grid.len {
            return Err(Error::LengthMismatch { knots: grid.len, values: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let flux = Self { grid, values, left, right };
        flux.validate()?;
        Ok(flux)
    }

    /// Assembles a flux from parts already known to be convex.
    pub(crate) fn from_parts(grid: UniformGrid<T>, values: Vec<T>, left: Tail<T>, right: Tail<T>) -> Self {
        debug_assert_eq!(grid.len, values.len());
        Self { grid, values, left, right }
    }

    /// Samples `f` on `len` knots spanning `[lo, hi]`.
    pub fn from_fn(lo: T, hi: T, len: usize, f: impl Fn(T) -> T, left: Tail<T>, right: Tail<T>) -> Result<Self> {
        let grid = UniformGrid::spanning(lo, hi, len);
        let values = grid.points().map(f).collect();
        Self::from_samples(grid, values, left, right)
    }

    fn validate(&self) -> Result<()> {
        let tol = self.tol_convexity();
        for i in 1..self.values.len() - 1 {
            let d2 = self.values[i - 1] - T::lit(2.0) * self.values[i] + self.values[i + 1];
            if d2 < -tol {
                return Err(Error::NonConvexSamples { index: i, second_difference: d2.as_f64() });
            }
        }
        let slope_tol = tol / self.grid.step;
        for (side, tail, segment) in [("left", self.left, self.segment_slope(0)), ("right", self.right, self.segment_slope(self.grid.len - 2))] {
            let tail_slope = tail.anchor_slope();
            let ordered = if side == "left" { tail_slope <= segment + slope_tol } else { segment <= tail_slope + slope_tol };
            let curvature_ok = match tail {
                Tail::Quadratic { curvature, .. } => curvature > T::zero(),
                Tail::Linear { .. } => true,
            };
            if !ordered || !curvature_ok || !tail_slope.is_finite() {
                return Err(Error::TailMismatch { side, tail_slope: tail_slope.as_f64(), segment_slope: segment.as_f64() });
            }
        }
        Ok(())
    }

    /// Second differences of exactly convex data may round to tiny negatives.
    pub fn tol_convexity(&self) -> T {
        let rel = T::lit(1e-9).max(T::lit(64.0) * T::epsilon());
        rel * max_abs(&self.values)
    }

    /// Anchors agree in slope when their one-sided slopes differ by at most `h`
    /// (plus rounding).
    pub fn tol_slope(&self) -> T {
        self.grid.step * (T::one() + T::lit(1e-6))
    }

    pub fn grid(&self) -> &UniformGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn knots(&self) -> Vec<T> {
        self.grid.points().collect()
    }

    pub fn left_tail(&self) -> Tail<T> {
        self.left
    }

    pub fn right_tail(&self) -> Tail<T> {
        self.right
    }

    pub fn len(&self) -> usize {
        self.grid.len
    }

    pub fn is_empty(&self) -> bool {
        self.grid.len == 0
    }

    #[inline]
    pub fn segment_slope(&self, i: usize) -> T {
        (self.values[i + 1] - self.values[i]) / self.grid.step
    }

    pub fn is_superlinear(&self) -> bool {
        self.left.is_quadratic() && self.right.is_quadratic()
    }

    /// Evaluates the flux anywhere on the real line.
    pub fn eval(&self, p: T) -> T {
        let g = &self.grid;
        let n = g.len;
        let r = g.position(p);
        if r <= T::zero() {
            return self.left.value(self.values[0], p - g.start);
        }
        let last = T::from_index(n - 1);
        if r >= last {
            return self.right.value(self.values[n - 1], p - g.end());
        }
        let i = r.floor().to_usize().unwrap_or(0).min(n - 2);
        let w = r - T::from_index(i);
        self.values[i] + (self.values[i + 1] - self.values[i]) * w
    }

    /// One-sided derivatives `(f'(p-), f'(p+))`.
    pub fn slopes(&self, p: T) -> (T, T) {
        let g = &self.grid;
        let n = g.len;
        let r = g.position(p);
        let i = r.round();
        let at_knot = (r - i).abs() <= T::lit(1e-9) && i >= T::zero() && i <= T::from_index(n - 1);
        if at_knot {
            let k = i.to_usize().unwrap_or(0);
            let left = if k == 0 { self.left.anchor_slope() } else { self.segment_slope(k - 1) };
            let right = if k == n - 1 { self.right.anchor_slope() } else { self.segment_slope(k) };
            return (left, right);
        }
        if r < T::zero() {
            let s = self.left.derivative(p - g.start);
            return (s, s);
        }
        if r > T::from_index(n - 1) {
            let s = self.right.derivative(p - g.end());
            return (s, s);
        }
        let k = r.floor().to_usize().unwrap_or(0).min(n - 2);
        let s = self.segment_slope(k);
        (s, s)
    }

    /// Continuous monotone derivative estimate: central knot slopes,
    /// linearly interpolated between knots, analytic in the tails.
    pub fn smooth_derivative(&self, p: T) -> T {
        let g = &self.grid;
        let n = g.len;
        let r = g.position(p);
        if r <= T::zero() {
            return self.left.derivative(p - g.start).min(self.knot_derivative(0));
        }
        if r >= T::from_index(n - 1) {
            return self.right.derivative(p - g.end()).max(self.knot_derivative(n - 1));
        }
        let i = r.floor().to_usize().unwrap_or(0).min(n - 2);
        let w = r - T::from_index(i);
        let a = self.knot_derivative(i);
        let b = self.knot_derivative(i + 1);
        a + (b - a) * w
    }

    fn knot_derivative(&self, k: usize) -> T {
        let n = self.grid.len;
        let left = if k == 0 { self.left.anchor_slope() } else { self.segment_slope(k - 1) };
        let right = if k == n - 1 { self.right.anchor_slope() } else { self.segment_slope(k) };
        (left + right) / T::lit(2.0)
    }

    /// Largest absolute one-sided slope over `[lo, hi]`.
    pub fn max_abs_slope(&self, lo: T, hi: T) -> T {
        let (a, _) = self.slopes(lo);
        let (_, b) = self.slopes(hi);
        // slopes are monotone, so the extremes sit at the interval ends
        a.abs().max(b.abs())
    }

    /// Reads growth limits off the tails.
    pub fn classify_growth(&self) -> Result<Growth<T>> {
        classify_growth(self)
    }

    /// Knot index minimizing the flux, `None` when it is unbounded below.
    pub fn argmin_knot(&self) -> Option<usize> {
        if let Tail::Linear { slope } = self.left {
            if slope > T::zero() {
                return None;
            }
        }
        if let Tail::Linear { slope } = self.right {
            if slope < T::zero() {
                return None;
            }
        }
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, T::infinity()), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        Some(i)
    }

    /// A global minimizer of the flux, `±inf` when it decreases forever.
    pub fn argmin_point(&self) -> T {
        let Some(i) = self.argmin_knot() else {
            return if self.left.anchor_slope() > T::zero() { T::neg_infinity() } else { T::infinity() };
        };
        let n = self.grid.len;
        let two = T::lit(2.0);
        // the minimum may sit inside a quadratic tail
        if i == 0 {
            if let Tail::Quadratic { slope, curvature } = self.left {
                if slope > T::zero() {
                    return self.grid.start - slope / (two * curvature);
                }
            }
        }
        if i == n - 1 {
            if let Tail::Quadratic { slope, curvature } = self.right {
                if slope < T::zero() {
                    return self.grid.end() - slope / (two * curvature);
                }
            }
        }
        self.grid.point(i)
    }

    /// Minimum of the flux over `[a, b]`.
    pub fn min_on(&self, a: T, b: T) -> T {
        self.eval(self.argmin_point().max(a).min(b))
    }

    /// Copy whose knots cover at least `[lo, hi]`; extra knots sample the tails.
    pub fn widen(&self, lo: T, hi: T) -> Self {
        let g = self.grid;
        let add_left = if lo < g.start { ((g.start - lo) / g.step).ceil().to_usize().unwrap_or(0) } else { 0 };
        let add_right = if hi > g.end() { ((hi - g.end()) / g.step).ceil().to_usize().unwrap_or(0) } else { 0 };
        if add_left == 0 && add_right == 0 {
            return self.clone();
        }
        let start = g.point_at(-(add_left as isize));
        let grid = UniformGrid::new(start, g.step, g.len + add_left + add_right);
        let values = (0..grid.len).map(|i| self.eval(grid.point(i))).collect();
        let left = self.left.shifted(start - g.start);
        let right = self.right.shifted(grid.end() - g.end());
        Self::from_parts(grid, values, left, right)
    }

    /// The flux `p -> f(-p)`.
    pub fn reflect(&self) -> Self {
        let g = self.grid;
        let grid = UniformGrid::new(-g.end(), g.step, g.len);
        let values = self.values.iter().rev().copied().collect();
        Self::from_parts(grid, values, self.right.mirrored(), self.left.mirrored())
    }

    /// Adds a constant to every value.
    pub fn shifted_by(&self, c: T) -> Self {
        let values = self.values.iter().map(|&v| v + c).collect();
        Self::from_parts(self.grid, values, self.left, self.right)
    }
}

/// Classifies the growth of `f` at `±inf` from its tails.
pub fn classify_growth<T: Scalar>(f: &ConvexFlux<T>) -> Result<Growth<T>> {
    let mu_minus = match f.left {
        Tail::Quadratic { .. } => None,
        Tail::Linear { slope } => Some(slope),
    };
    let mu_plus = match f.right {
        Tail::Quadratic { .. } => None,
        Tail::Linear { slope } => Some(slope),
    };
    let bad_minus = mu_minus.is_some_and(|m| m > T::zero());
    let bad_plus = mu_plus.is_some_and(|m| m < T::zero());
    if bad_minus || bad_plus {
        return Err(Error::GrowthSignViolation {
            mu_minus: mu_minus.map_or(f64::NEG_INFINITY, Scalar::as_f64),
            mu_plus: mu_plus.map_or(f64::INFINITY, Scalar::as_f64),
        });
    }
    Ok(match (mu_minus, mu_plus) {
        (None, None) => Growth::Superlinear,
        _ => Growth::SemiSuperlinear { mu_minus, mu_plus },
    })
}

/// Replaces `f` outside `[a, b]` by tangent-plus-parabola tails of curvature `d`.
pub fn extend_superlinear<T: Scalar>(f: &ConvexFlux<T>, a: T, b: T, d: T) -> Result<ConvexFlux<T>> {
    if !(a < b) {
        return Err(Error::InvalidAnchors { a: a.as_f64(), b: b.as_f64() });
    }
    extend_tails(f, Some(a), Some(b), d)
}

/// Like [`extend_superlinear`], but either anchor may be omitted, which
/// keeps the original tail on that side (an anchor at `∓inf`).
pub fn extend_tails<T: Scalar>(f: &ConvexFlux<T>, a: Option<T>, b: Option<T>, d: T) -> Result<ConvexFlux<T>> {
    if !(d > T::zero()) {
        return Err(Error::Invalid(format!("tail curvature must be positive, got {d}")));
    }
    let lo = a.unwrap_or(f.grid.start).min(f.grid.start);
    let hi = b.unwrap_or(f.grid.end()).max(f.grid.end());
    let wide = f.widen(lo, hi);
    let g = wide.grid;
    let anchor = |p: T| -> Result<(usize, T)> {
        let k = g.knot_index(p).ok_or(Error::AnchorNotOnGrid { at: p.as_f64() })?;
        let (l, r) = wide.slopes(g.point(k));
        if (r - l).abs() > wide.tol_slope() {
            return Err(Error::NotDifferentiableAtAnchor { at: p.as_f64(), left: l.as_f64(), right: r.as_f64() });
        }
        // an end knot keeps the slope of the tail it already has
        let s = if k == 0 {
            l
        } else if k == g.len - 1 {
            r
        } else {
            (l + r) / T::lit(2.0)
        };
        Ok((k, s))
    };
    let (ia, left) = match a {
        Some(a) => {
            let (k, s) = anchor(a)?;
            (k, Tail::Quadratic { slope: s, curvature: d })
        }
        None => (0, wide.left),
    };
    let (ib, right) = match b {
        Some(b) => {
            let (k, s) = anchor(b)?;
            (k, Tail::Quadratic { slope: s, curvature: d })
        }
        None => (g.len - 1, wide.right),
    };
    if ib < ia + 2 {
        return Err(Error::TooFewKnots { min: 3, got: ib + 1 - ia.min(ib + 1) });
    }
    let grid = UniformGrid::new(g.point(ia), g.step, ib - ia + 1);
    let values = wide.values[ia..=ib].to_vec();
    // the central slope at an anchor lies between the one-sided slopes, so
    // the joins stay convex
    Ok(ConvexFlux::from_parts(grid, values, left, right))
}

/// Smoothing kernel and quadrature resolution for [`mollify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec<T> {
    pub epsilon: T,
    pub kernel_samples: usize,
}

impl<T: Scalar> MollifierSpec<T> {
    /// Smallest admissible quadrature for `epsilon` on knots of spacing `h`.
    pub fn required_samples(epsilon: T, h: T) -> usize {
        let fine = (T::lit(4.0) * epsilon / h).ceil().to_usize().unwrap_or(usize::MAX);
        fine.max(16)
    }

    pub fn for_grid(epsilon: T, h: T) -> Self {
        Self { epsilon, kernel_samples: Self::required_samples(epsilon, h) }
    }

    /// Midpoint nodes on `(-eps, eps)` and normalized weights of the
    /// `exp(-1 / (1 - s^2))` bump.
    pub fn quadrature(&self) -> (Vec<T>, Vec<T>) {
        let n = self.kernel_samples;
        let ds = T::lit(2.0) / T::from_index(n);
        let nodes: Vec<T> = (0..n).map(|k| -T::one() + (T::from_index(k) + T::lit(0.5)) * ds).collect();
        let raw: Vec<T> = nodes.iter().map(|&s| (-T::one() / (T::one() - s * s)).exp()).collect();
        let total: T = raw.iter().copied().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        (nodes.into_iter().map(|s| s * self.epsilon).collect(), weights)
    }
}

/// `F_eps = alpha_eps * F + eps p^2`, sampled on a grid widened by the
/// kernel radius so that its quadratic tails are exact.
pub fn mollify<T: Scalar>(f: &ConvexFlux<T>, spec: MollifierSpec<T>) -> Result<ConvexFlux<T>> {
    let eps = spec.epsilon;
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(Error::InvalidEpsilon(eps.as_f64()));
    }
    let (Tail::Quadratic { slope: sl, curvature: dl }, Tail::Quadratic { slope: sr, curvature: dr }) = (f.left, f.right) else {
        let side = if f.left.is_quadratic() { "right" } else { "left" };
        return Err(Error::UnboundedConjugate { side });
    };
    let h = f.grid.step;
    let required = MollifierSpec::required_samples(eps, h);
    if spec.kernel_samples < required {
        return Err(Error::KernelQuadratureTooCoarse { samples: spec.kernel_samples, required });
    }
    let (nodes, weights) = spec.quadrature();
    let pad = (eps / h).ceil().to_usize().unwrap_or(0) + 1;
    let g = f.grid;
    let grid = UniformGrid::new(g.point_at(-(pad as isize)), h, g.len + 2 * pad);
    let values = grid
        .points()
        .map(|p| {
            let conv: T = nodes.iter().zip(&weights).map(|(&s, &w)| w * f.eval(p - s)).sum();
            conv + eps * p * p
        })
        .collect();
    let two = T::lit(2.0);
    let (a, b) = (g.start, g.end());
    let (pa, pb) = (grid.start, grid.end());
    let left = Tail::Quadratic { slope: sl + two * dl * (pa - a) + two * eps * pa, curvature: dl + eps };
    let right = Tail::Quadratic { slope: sr + two * dr * (pb - b) + two * eps * pb, curvature: dr + eps };
    Ok(ConvexFlux::from_parts(grid, values, left, right))
}

/// Named fluxes used by scenarios and tests.
pub mod presets {
    use super::*;

    /// `p^2 / 2` on `[-range, range]`, continued exactly by its own parabola.
    pub fn burgers<T: Scalar>(range: T, len: usize) -> ConvexFlux<T> {
        let half = T::lit(0.5);
        let grid = UniformGrid::spanning(-range, range, len);
        let values = grid.points().map(|p| half * p * p).collect();
        ConvexFlux::from_parts(
            grid,
            values,
            Tail::Quadratic { slope: -range, curvature: half },
            Tail::Quadratic { slope: range, curvature: half },
        )
    }

    /// `|p|` on `[-range, range]` with its linear continuation.
    pub fn abs<T: Scalar>(range: T, len: usize) -> ConvexFlux<T> {
        let grid = UniformGrid::spanning(-range, range, len);
        let values = grid.points().map(|p| p.abs()).collect();
        ConvexFlux::from_parts(grid, values, Tail::Linear { slope: -T::one() }, Tail::Linear { slope: T::one() })
    }

    /// Strictly convex flux with `mu- = -1` and `mu+ = +inf`:
    /// `sqrt(1 + p^2) - 1` for `p < 0`, `p^2 / 2` for `p >= 0`.
    pub fn semisuperlinear_demo<T: Scalar>(range: T, len: usize) -> ConvexFlux<T> {
        let half = T::lit(0.5);
        let grid = UniformGrid::spanning(-range, range, len);
        let values = grid.points().map(|p| if p < T::zero() { (T::one() + p * p).sqrt() - T::one() } else { half * p * p }).collect();
        ConvexFlux::from_parts(grid, values, Tail::Linear { slope: -T::one() }, Tail::Quadratic { slope: range, curvature: half })
    }

    /// `max(p, -p / 2)`, linear growth on both sides.
    pub fn asymmetric_abs<T: Scalar>(range: T, len: usize) -> ConvexFlux<T> {
        let half = T::lit(0.5);
        let grid = UniformGrid::spanning(-range, range, len);
        let values = grid.points().map(|p| p.max(-half * p)).collect();
        ConvexFlux::from_parts(grid, values, Tail::Linear { slope: -half }, Tail::Linear { slope: T::one() })
    }
}
