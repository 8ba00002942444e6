use crate::Scalar;

/// Uniformly spaced knots `start + i * step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid<T> {
    pub start: T,
    pub step: T,
    pub len: usize,
}

impl<T: Scalar> UniformGrid<T> {
    pub fn new(start: T, step: T, len: usize) -> Self {
        Self { start, step, len }
    }

    /// Grid with `len` knots spanning `[lo, hi]`.
    pub fn spanning(lo: T, hi: T, len: usize) -> Self {
        let step = (hi - lo) / T::from_index(len.max(2) - 1);
        Self { start: lo, step, len }
    }

    #[inline]
    pub fn point(&self, i: usize) -> T {
        self.start + self.step * T::from_index(i)
    }

    /// Point at a possibly negative or out-of-range offset.
    #[inline]
    pub fn point_at(&self, i: isize) -> T {
        self.start + self.step * T::from_offset(i)
    }

    #[inline]
    pub fn end(&self) -> T {
        self.point(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }

    /// Fractional index of `x`.
    #[inline]
    pub fn position(&self, x: T) -> T {
        (x - self.start) / self.step
    }

    /// Index of the knot nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: T) -> usize {
        let r = self.position(x).round();
        if r <= T::zero() {
            0
        } else {
            r.to_usize().unwrap_or(usize::MAX).min(self.len - 1)
        }
    }

    /// Index `i` with `x == point(i)` up to a small relative tolerance.
    pub fn knot_index(&self, x: T) -> Option<usize> {
        let r = self.position(x);
        let i = r.round();
        if (r - i).abs() <= T::lit(1e-6) && i >= T::zero() && i <= T::from_index(self.len - 1) {
            i.to_usize()
        } else {
            None
        }
    }

    pub fn contains(&self, x: T) -> bool {
        let tol = self.step * T::lit(1e-9);
        x >= self.start - tol && x <= self.end() + tol
    }

    pub fn same_as(&self, other: &Self) -> bool {
        let tol = self.step.abs() * T::lit(1e-9);
        self.len == other.len
            && (self.start - other.start).abs() <= tol
            && (self.step - other.step).abs() <= tol
    }
}
