use crate::error::{Error, Result};

/// Uniform 1D grid `x_i = x_min + i h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 3 || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid needs n >= 3 and x_max > x_min (got [{x_min}, {x_max}], n = {n})"
            )));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    /// Grid on `[-m h, m h]` with `m = round(half_width / h)`; `x = 0` is node `m`.
    pub fn symmetric(half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(half_width >= 2.0 * h) {
            return Err(Error::InvalidParameter(format!(
                "symmetric grid needs 0 < 2h <= half width (h = {h}, L = {half_width})"
            )));
        }
        let m = (half_width / h).round() as usize;
        let l = m as f64 * h;
        Grid1D::new(-l, l, 2 * m + 1)
    }

    /// Grid on `[x_min, x_max]` whose nodes include `x = 0`.
    ///
    /// Both endpoints are rounded outward to multiples of `h`.
    pub fn through_zero(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(x_min < 0.0 && x_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid through zero needs x_min < 0 < x_max and h > 0 (got [{x_min}, {x_max}], h = {h})"
            )));
        }
        let left = (-x_min / h).round() as usize;
        let right = (x_max / h).round() as usize;
        Grid1D::new(-(left as f64) * h, right as f64 * h, left + right + 1)
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.h()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node at `x = 0`, if there is one.
    pub fn zero_index(&self) -> Option<usize> {
        let h = self.h();
        let k = (-self.x_min / h).round();
        if k < 0.0 || k as usize >= self.n {
            return None;
        }
        let k = k as usize;
        (self.x(k).abs() <= 1e-9 * h).then_some(k)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min - 1e-12 && x <= self.x_max + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_has_zero_node() {
        let g = Grid1D::symmetric(30.0, 0.025).unwrap();
        assert_eq!(g.n, 2401);
        assert!((g.h() - 0.025).abs() < 1e-15);
        let k = g.zero_index().unwrap();
        assert_eq!(k, 1200);
        assert!(g.x(k).abs() < 1e-12);
    }

    #[test]
    fn through_zero_rounds_outward() {
        let g = Grid1D::through_zero(-10.0, 5.0, 0.5).unwrap();
        assert_eq!(g.n, 31);
        assert_eq!(g.zero_index(), Some(20));
    }

    #[test]
    fn degenerate_grids_rejected() {
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::symmetric(1.0, 0.0).is_err());
    }
}
