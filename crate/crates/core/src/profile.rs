use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::Scalar;

/// How a profile continues beyond its first and last knot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extension<T> {
    /// Constant values on each side.
    Constant { left: T, right: T },
    /// Straight lines through the end knots with the given slopes.
    Linear { left_slope: T, right_slope: T },
}

/// A function sampled on a uniform spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    pub grid: UniformGrid<T>,
    pub values: Vec<T>,
    pub extension: Extension<T>,
}

impl<T: Scalar> Profile<T> {
    pub fn new(grid: UniformGrid<T>, values: Vec<T>, extension: Extension<T>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::LengthMismatch { knots: grid.len, values: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values, extension })
    }

    /// Samples `u` at the knots; the end values are continued as constants.
    pub fn from_fn(grid: UniformGrid<T>, u: impl Fn(T) -> T) -> Self {
        let values: Vec<T> = grid.points().map(u).collect();
        let extension = Extension::Constant { left: values[0], right: values[grid.len - 1] };
        Self { grid, values, extension }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> T {
        self.grid.step
    }

    /// Value at knot offset `j`, which may lie outside the grid.
    #[inline]
    pub fn at(&self, j: isize) -> T {
        let n = self.values.len() as isize;
        if j >= 0 && j < n {
            return self.values[j as usize];
        }
        let h = self.grid.step;
        match self.extension {
            Extension::Constant { left, right } => {
                if j < 0 {
                    left
                } else {
                    right
                }
            }
            Extension::Linear { left_slope, right_slope } => {
                if j < 0 {
                    self.values[0] + left_slope * h * T::from_offset(j)
                } else {
                    self.values[(n - 1) as usize] + right_slope * h * T::from_offset(j - n + 1)
                }
            }
        }
    }

    /// Piecewise-linear evaluation, extension outside the knots.
    pub fn eval(&self, x: T) -> T {
        let n = self.values.len();
        let r = self.grid.position(x);
        if r <= T::zero() {
            return match self.extension {
                Extension::Constant { left, .. } => {
                    if r == T::zero() {
                        self.values[0]
                    } else {
                        left
                    }
                }
                Extension::Linear { left_slope, .. } => self.values[0] + left_slope * (x - self.grid.start),
            };
        }
        if r >= T::from_index(n - 1) {
            return match self.extension {
                Extension::Constant { right, .. } => {
                    if r == T::from_index(n - 1) {
                        self.values[n - 1]
                    } else {
                        right
                    }
                }
                Extension::Linear { right_slope, .. } => self.values[n - 1] + right_slope * (x - self.grid.end()),
            };
        }
        let i = r.floor().to_usize().unwrap_or(0).min(n - 2);
        let w = r - T::from_index(i);
        self.values[i] + (self.values[i + 1] - self.values[i]) * w
    }

    /// `sup |u|`, extension values included.
    pub fn sup_norm(&self) -> T {
        let inner = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        match self.extension {
            Extension::Constant { left, right } => inner.max(left.abs()).max(right.abs()),
            Extension::Linear { .. } => inner,
        }
    }

    pub fn min_value(&self) -> T {
        let inner = self.values.iter().copied().fold(T::infinity(), T::min);
        match self.extension {
            Extension::Constant { left, right } => inner.min(left).min(right),
            Extension::Linear { .. } => inner,
        }
    }

    pub fn max_value(&self) -> T {
        let inner = self.values.iter().copied().fold(T::neg_infinity(), T::max);
        match self.extension {
            Extension::Constant { left, right } => inner.max(left).max(right),
            Extension::Linear { .. } => inner,
        }
    }

    /// Lipschitz constant of the piecewise-linear interpolant and its extension.
    pub fn lipschitz(&self) -> T {
        let h = self.grid.step;
        let inner = self.values.windows(2).map(|w| ((w[1] - w[0]) / h).abs()).fold(T::zero(), T::max);
        match self.extension {
            Extension::Constant { .. } => inner,
            Extension::Linear { left_slope, right_slope } => inner.max(left_slope.abs()).max(right_slope.abs()),
        }
    }

    /// Constant extension values, or the slopes for a linear extension.
    pub fn pads(&self) -> (T, T) {
        match self.extension {
            Extension::Constant { left, right } => (left, right),
            Extension::Linear { left_slope, right_slope } => (left_slope, right_slope),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        let extension = match self.extension {
            Extension::Constant { left, right } => Extension::Constant { left: f(left), right: f(right) },
            e @ Extension::Linear { .. } => e,
        };
        Self { grid: self.grid, values, extension }
    }

    /// `x -> -u(-x)`, used to swap the roles of the two flux tails.
    pub fn reflect_odd(&self) -> Self {
        let g = self.grid;
        let grid = UniformGrid::new(-g.end(), g.step, g.len);
        let values = self.values.iter().rev().map(|&v| -v).collect();
        let extension = match self.extension {
            Extension::Constant { left, right } => Extension::Constant { left: -right, right: -left },
            Extension::Linear { left_slope, right_slope } => Extension::Linear { left_slope: right_slope, right_slope: left_slope },
        };
        Self { grid, values, extension }
    }

    /// Trapezoid integral of the interpolant over `[a, b]` (clipped to the grid).
    pub fn integrate(&self, a: T, b: T) -> T {
        integrate_pl(&self.grid, a, b, |i| self.values[i])
    }

    /// Trapezoid rule over all knots.
    pub fn total(&self) -> T {
        let h = self.grid.step;
        let n = self.values.len();
        let inner: T = self.values.iter().copied().sum();
        h * (inner - (self.values[0] + self.values[n - 1]) / T::lit(2.0))
    }
}

/// Integral over `[a, b]` of the piecewise-linear interpolant of `value(i)`.
pub(crate) fn integrate_pl<T: Scalar>(grid: &UniformGrid<T>, a: T, b: T, value: impl Fn(usize) -> T) -> T {
    let n = grid.len;
    let lo = a.max(grid.start);
    let hi = b.min(grid.end());
    if !(hi > lo) {
        return T::zero();
    }
    let h = grid.step;
    let half = T::lit(0.5);
    let interp = |x: T| {
        let r = grid.position(x);
        let i = r.floor().to_usize().unwrap_or(0).min(n - 2);
        let w = r - T::from_index(i);
        value(i) + (value(i + 1) - value(i)) * w
    };
    let first = grid.position(lo).ceil().to_usize().unwrap_or(0).min(n - 1);
    let last = grid.position(hi).floor().to_usize().unwrap_or(0).min(n - 1);
    if first > last {
        return (hi - lo) * half * (interp(lo) + interp(hi));
    }
    let mut acc = (grid.point(first) - lo) * half * (interp(lo) + value(first));
    for i in first..last {
        acc = acc + h * half * (value(i) + value(i + 1));
    }
    acc + (hi - grid.point(last)) * half * (value(last) + interp(hi))
}
