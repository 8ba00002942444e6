//! Discrete Legendre–Fenchel transform of sampled convex fluxes.
//!
//! For a fixed slope `q` the sequence `q p_i - f_i` is concave in `i` and its
//! argmax is nondecreasing in `q`, so a single forward scan over the knots
//! serves every `q` of an increasing dual grid. Quadratic tails are
//! maximized in closed form.

use crate::convex_flux::{ConvexFlux, Tail};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::mollify;
use crate::convex_flux::MollifierSpec;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualGridSpec<T> {
    pub q_min: T,
    pub q_max: T,
    pub n_q: usize,
}

impl<T: Scalar> DualGridSpec<T> {
    pub fn new(q_min: T, q_max: T, n_q: usize) -> Result<Self> {
        let spec = Self { q_min, q_max, n_q };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.q_min < self.q_max) || self.n_q < 3 {
            return Err(Error::InvalidDualGrid { q_min: self.q_min.as_f64(), q_max: self.q_max.as_f64(), n_q: self.n_q });
        }
        Ok(())
    }

    /// Symmetric window reaching two units past the steepest knot slope,
    /// with as many points as the flux has knots.
    pub fn default_for(f: &ConvexFlux<T>) -> Self {
        let n = f.len();
        let steepest = (0..n - 1).map(|i| f.segment_slope(i).abs()).fold(T::zero(), T::max);
        let q = steepest + T::lit(2.0);
        Self { q_min: -q, q_max: q, n_q: n }
    }

    pub fn grid(&self) -> UniformGrid<T> {
        UniformGrid::spanning(self.q_min, self.q_max, self.n_q)
    }
}

/// Supremum of `q p - tail(p)` over a quadratic tail, when it beats the anchor.
#[inline]
fn tail_sup<T: Scalar>(tail: Tail<T>, anchor: T, anchor_value: T, q: T, right: bool) -> Option<T> {
    match tail {
        Tail::Quadratic { slope, curvature } => {
            let beyond = if right { q > slope } else { q < slope };
            beyond.then(|| {
                let dq = q - slope;
                q * anchor - anchor_value + dq * dq / (T::lit(4.0) * curvature)
            })
        }
        Tail::Linear { .. } => None,
    }
}

/// `f*(q) = sup_p { p q - f(p) }` on the knots of `grid`.
pub fn fenchel_dual<T: Scalar>(f: &ConvexFlux<T>, grid: DualGridSpec<T>) -> Result<ConvexFlux<T>> {
    grid.validate()?;
    let (Tail::Quadratic { slope: sl, curvature: dl }, Tail::Quadratic { slope: sr, curvature: dr }) = (f.left_tail(), f.right_tail()) else {
        let side = if f.left_tail().is_quadratic() { "right" } else { "left" };
        return Err(Error::UnboundedConjugate { side });
    };
    let g = *f.grid();
    let fv = f.values();
    let n = g.len;
    let (a, b) = (g.start, g.end());
    let qg = grid.grid();
    let score = |q: T, i: usize| q * g.point(i) - fv[i];

    let mut values = Vec::with_capacity(qg.len);
    let mut argmax = Vec::with_capacity(qg.len);
    let mut i = 0;
    for k in 0..qg.len {
        let q = qg.point(k);
        while i + 1 < n && score(q, i + 1) >= score(q, i) {
            i += 1;
        }
        let mut best = score(q, i);
        if let Some(v) = tail_sup(f.left_tail(), a, fv[0], q, false) {
            best = best.max(v);
        }
        if let Some(v) = tail_sup(f.right_tail(), b, fv[n - 1], q, true) {
            best = best.max(v);
        }
        values.push(best);
        argmax.push(i);
    }

    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let right = if grid.q_max >= sr {
        Tail::Quadratic { slope: b + (grid.q_max - sr) / (two * dr), curvature: T::one() / (four * dr) }
    } else {
        // beyond the window the conjugate keeps rising at least as fast as
        // the current maximizer; the curvature is only a continuation
        Tail::Quadratic { slope: g.point(argmax[qg.len - 1]), curvature: T::one() / (four * dr) }
    };
    let left = if grid.q_min <= sl {
        Tail::Quadratic { slope: a + (grid.q_min - sl) / (two * dl), curvature: T::one() / (four * dl) }
    } else {
        let q = grid.q_min;
        let mut j = 0;
        while j + 1 < n && score(q, j + 1) > score(q, j) {
            j += 1;
        }
        Tail::Quadratic { slope: g.point(j), curvature: T::one() / (four * dl) }
    };
    Ok(ConvexFlux::from_parts(qg, values, left, right))
}

/// `sup_i |f**(p_i) - f(p_i)|` over the knots of `f`.
pub fn biconjugate_residual<T: Scalar>(f: &ConvexFlux<T>, grid: DualGridSpec<T>) -> Result<T> {
    let dual = fenchel_dual(f, grid)?;
    let g = f.grid();
    let back = fenchel_dual(&dual, DualGridSpec { q_min: g.start, q_max: g.end(), n_q: g.len })?;
    Ok(back.values().iter().zip(f.values()).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max))
}

/// `sup_{window} |f*_eps - f*|` for each mollification level.
pub fn dual_mollification_gap<T: Scalar>(f: &ConvexFlux<T>, epsilons: &[T], window: (T, T)) -> Result<Vec<T>> {
    let (lo, hi) = window;
    let grid = DualGridSpec::new(lo, hi, f.len().max(3))?;
    let exact = fenchel_dual(f, grid)?;
    epsilons
        .iter()
        .map(|&eps| {
            let smooth = mollify(f, MollifierSpec::for_grid(eps, f.grid().step))?;
            let dual = fenchel_dual(&smooth, grid)?;
            Ok(dual.values().iter().zip(exact.values()).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_flux::{extend_superlinear, presets};
    use approx::assert_abs_diff_eq;

    fn extended_abs() -> ConvexFlux<f64> {
        extend_superlinear(&presets::abs(4.0, 401), -2.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn quadratic_is_self_dual() {
        let f = presets::burgers::<f64>(4.0, 801);
        let dual = fenchel_dual(&f, DualGridSpec::new(-3.0, 3.0, 301).unwrap()).unwrap();
        let h = f.grid().step;
        for (q, v) in dual.grid().points().zip(dual.values()) {
            // piecewise-linear interpolation overshoots p^2/2 by at most h^2/8
            assert!((v - q * q / 2.0).abs() <= h * h / 8.0 + 1e-12, "q {q}");
        }
        // the tails take over beyond the knots
        let wide = fenchel_dual(&f, DualGridSpec::new(-9.0, 9.0, 181).unwrap()).unwrap();
        assert_abs_diff_eq!(wide.eval(9.0), 40.5, epsilon = 1e-9);
        assert_abs_diff_eq!(wide.eval(12.0), 72.0, epsilon = 1e-9);
    }

    #[test]
    fn abs_dual_vanishes_on_unit_ball() {
        let dual = fenchel_dual(&extended_abs(), DualGridSpec::new(-1.0, 1.0, 101).unwrap()).unwrap();
        for v in dual.values() {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dual_at_zero_is_minus_min() {
        let f = presets::semisuperlinear_demo(3.0, 61);
        let f = extend_superlinear(&f, -2.0, 2.0, 1.0).unwrap().shifted_by(0.75);
        let dual = fenchel_dual(&f, DualGridSpec::new(-1.0, 1.0, 3).unwrap()).unwrap();
        assert_abs_diff_eq!(dual.values()[1], -0.75, epsilon = 1e-12);
    }

    #[test]
    fn rejects_linear_tails_and_bad_grids() {
        let f = presets::abs(2.0, 21);
        assert!(matches!(fenchel_dual(&f, DualGridSpec { q_min: -1.0, q_max: 1.0, n_q: 5 }), Err(Error::UnboundedConjugate { .. })));
        assert!(DualGridSpec::new(1.0, -1.0, 5).is_err());
        assert!(DualGridSpec::new(-1.0, 1.0, 2).is_err());
    }

    #[test]
    fn biconjugate_of_quadratic() {
        let f = presets::burgers(4.0, 801);
        let r = biconjugate_residual(&f, DualGridSpec::default_for(&f)).unwrap();
        assert!(r <= 1e-3, "residual {r}");
    }

    #[test]
    fn biconjugate_of_affine_is_exact() {
        let f = ConvexFlux::from_fn(-2.0, 2.0, 41, |p| 0.5 * p + 1.0, Tail::Quadratic { slope: 0.5, curvature: 1.0 }, Tail::Quadratic { slope: 0.5, curvature: 1.0 })
            .unwrap();
        let r = biconjugate_residual(&f, DualGridSpec::default_for(&f)).unwrap();
        assert!(r <= 1e-12, "residual {r}");
        let shifted = biconjugate_residual(&f.shifted_by(3.5), DualGridSpec::default_for(&f)).unwrap();
        assert_abs_diff_eq!(shifted, r, epsilon = 1e-12);
    }

    #[test]
    fn mollification_gap_shrinks() {
        let gaps = dual_mollification_gap(&extended_abs(), &[0.2, 0.1, 0.05], (-0.9, 0.9)).unwrap();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[2] < 0.05);
        let quad = presets::burgers(4.0, 401);
        let tiny = dual_mollification_gap(&quad, &[1e-3], (-1.0, 1.0)).unwrap();
        // the added eps p^2 alone moves the dual by up to eps on the unit ball
        assert!(tiny[0] < 2e-3, "{tiny:?}");
    }

    #[test]
    fn argmax_scan_matches_naive_on_semisuperlinear_extension() {
        let f = extend_superlinear(&presets::semisuperlinear_demo(3.0, 121), -2.5, 2.5, 1.0).unwrap();
        let grid = DualGridSpec::new(-4.0, 6.0, 257).unwrap();
        let dual = fenchel_dual(&f, grid).unwrap();
        for (q, v) in dual.grid().points().zip(dual.values()) {
            let naive = crate::oracle::brute_force_conjugate(&f, q);
            assert_abs_diff_eq!(*v, naive, epsilon = 1e-12);
        }
    }

    #[test]
    fn superlinearity_transfers() {
        let f = presets::burgers(2.0, 201);
        let end_slope = |q: f64| {
            let d = fenchel_dual(&f, DualGridSpec::new(-q, q, 401).unwrap()).unwrap();
            d.slopes(q).0
        };
        for q in [4.0, 8.0, 16.0] {
            assert!(end_slope(2.0 * q) >= 2.0 * end_slope(q) - 1e-6);
        }
    }
}
