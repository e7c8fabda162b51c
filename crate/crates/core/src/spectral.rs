//! Discrete checks of the linearisations: 1D spectra and the 2D kernel and
//! cokernel directions `Θ_y`, `e^{c_x x} Θ_y`.

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::grid::Grid1D;
use crate::model::Side;
use crate::profiles1d::Profile1D;

/// `v'' + c_x v' + q(x) v` on a grid with homogeneous Dirichlet ends.
#[derive(Debug, Clone)]
pub struct LinearOperator1D {
    pub grid: Grid1D,
    pub c_x: f64,
    /// Potential at every grid node (endpoint values only enter the endpoint check).
    pub q: Vec<f64>,
}

/// Relative residuals of the kernel and cokernel candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheck {
    /// `‖L_h Θ_y‖ / ‖Θ_y‖`.
    pub forward_residual: f64,
    /// `‖L_h^T (e^{c_x x} Θ_y)‖ / ‖e^{c_x x} Θ_y‖`.
    pub adjoint_residual: f64,
    pub h: f64,
}

/// Largest tolerated endpoint slope of `q`.
pub const POTENTIAL_FLAT_TOL: f64 = 1e-6;

impl LinearOperator1D {
    pub fn new(grid: Grid1D, c_x: f64, q: Vec<f64>) -> Result<Self> {
        if q.len() != grid.n {
            return Err(Error::ShapeMismatch(format!("potential has {} samples, grid {}", q.len(), grid.n)));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("potential".into()));
        }
        Ok(LinearOperator1D { grid, c_x, q })
    }

    pub fn from_fn(grid: Grid1D, c_x: f64, q: impl Fn(f64) -> f64) -> Result<Self> {
        let q = grid.points().into_iter().map(q).collect();
        LinearOperator1D::new(grid, c_x, q)
    }

    /// Linearisation `∂_xx + c_x ∂_x + μ(x) - 3 u(x)^2 + α g_u` about a quenched front.
    ///
    /// On the node `x = 0` the potential is the average of its one-sided values.
    pub fn quenched_front(front: &Profile1D, c_x: f64) -> Result<Self> {
        let h = front.grid.h();
        let q = front
            .grid
            .points()
            .iter()
            .zip(&front.values)
            .map(|(&x, &u)| {
                let mu = match Side::of(x, h) {
                    Side::Left => 1.0,
                    Side::Right => -1.0,
                    Side::Line => 0.0,
                };
                mu - 3.0 * u * u
            })
            .collect();
        LinearOperator1D::new(front.grid, c_x, q)
    }

    /// Interior tridiagonal bands `(lower, diag, upper)`.
    pub fn bands(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.grid.h();
        let m = self.grid.n - 2;
        let ih2 = 1.0 / (h * h);
        let adv = 0.5 * self.c_x / h;
        let diag = (1..=m).map(|i| -2.0 * ih2 + self.q[i]).collect();
        (vec![ih2 - adv; m], diag, vec![ih2 + adv; m])
    }

    /// Number of eigenvalues strictly greater than `lambda` (Sturm count on the
    /// symmetrised matrix; the count depends only on products of off-diagonals).
    fn count_above(diag: &[f64], offsq: &[f64], lambda: f64) -> usize {
        let mut count = 0;
        let pivmin = f64::MIN_POSITIVE.sqrt();
        let mut d = 1.0_f64;
        for i in 0..diag.len() {
            let e2 = if i == 0 { 0.0 } else { offsq[i - 1] };
            d = (diag[i] - lambda) - e2 / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d > 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Largest eigenvalue of the discretised operator.
///
/// The `e^{c_x x/2}` similarity makes the tridiagonal matrix symmetric whenever
/// `c_x h < 2`, so the spectrum is real and Sturm bisection applies.
pub fn max_real_eig_1d(op: &LinearOperator1D) -> Result<f64> {
    let g = op.grid;
    if g.n < 4 {
        return Err(Error::EigensolveFailure("need at least two interior nodes".into()));
    }
    let h = g.h();
    let n = g.n;
    let slope_l = (op.q[1] - op.q[0]).abs() / h;
    let slope_r = (op.q[n - 1] - op.q[n - 2]).abs() / h;
    if slope_l > POTENTIAL_FLAT_TOL || slope_r > POTENTIAL_FLAT_TOL {
        return Err(Error::DomainTooSmall(format!(
            "potential still varies at the ends (slopes {slope_l:.2e}, {slope_r:.2e})"
        )));
    }
    let (lower, diag, upper) = op.bands();
    let offsq: Vec<f64> = (0..diag.len() - 1).map(|i| upper[i] * lower[i + 1]).collect();
    if offsq.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::EigensolveFailure(format!(
            "advection dominates the stencil (c_x h = {}); not symmetrisable",
            op.c_x * h
        )));
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut r = 0.0;
        if i > 0 {
            r += offsq[i - 1].sqrt();
        }
        if i + 1 < diag.len() {
            r += offsq[i].sqrt();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if LinearOperator1D::count_above(&diag, &offsq, mid) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    if !lambda.is_finite() {
        return Err(Error::EigensolveFailure("bisection produced a non-finite value".into()));
    }
    Ok(lambda)
}

/// `L_h v` at interior node `(i, j)` for the linearisation about `theta`; `sign`
/// flips the advection term, which gives the transpose.
fn apply_at(theta: &Field2D, v: &Field2D, c_x: f64, sign: f64, i: usize, j: usize) -> f64 {
    let (hx, hy) = (theta.hx, theta.hy);
    let c = v.get(i, j);
    let lap = (v.get(i + 1, j) - 2.0 * c + v.get(i - 1, j)) / (hx * hx)
        + (v.get(i, j + 1) - 2.0 * c + v.get(i, j - 1)) / (hy * hy);
    let adv = sign * c_x * (v.get(i + 1, j) - v.get(i - 1, j)) / (2.0 * hx);
    let mu = match Side::of(theta.x(i), hx) {
        Side::Left => 1.0,
        Side::Right => -1.0,
        Side::Line => 0.0,
    };
    let t = theta.get(i, j);
    lap + adv + (mu - 3.0 * t * t) * c
}

/// Nodes farther than `3h` from the boundary.
fn band_range(n: usize) -> std::ops::Range<usize> {
    4..n.saturating_sub(4)
}

/// Relative residual `‖L v‖ / ‖v‖` over the interior band, `sign = -1` for the transpose.
pub fn relative_residual(theta: &Field2D, v: &Field2D, c_x: f64, sign: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in band_range(theta.ny) {
        for i in band_range(theta.nx) {
            let r = apply_at(theta, v, c_x, sign, i, j);
            num += r * r;
            den += v.get(i, j) * v.get(i, j);
        }
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

/// Residuals of `Θ_y` for `L_h` and of `e^{c_x x} Θ_y` for its transpose.
pub fn kernel_check_2d(theta: &Field2D, c_x: f64) -> KernelCheck {
    let ty = theta.d_dy();
    let mut wy = ty.clone();
    for j in 0..wy.ny {
        for i in 0..wy.nx {
            let k = wy.idx(i, j);
            wy.data[k] *= (c_x * theta.x(i)).exp();
        }
    }
    KernelCheck {
        forward_residual: relative_residual(theta, &ty, c_x, 1.0),
        adjoint_residual: relative_residual(theta, &wy, c_x, -1.0),
        h: theta.hx,
    }
}

/// Largest interior difference between `L_h(e^{-c_x x} v)` and `e^{-c_x x} L_h^T v`,
/// relative to the size of the latter.
pub fn conjugation_defect(theta: &Field2D, v: &Field2D, c_x: f64) -> f64 {
    let mut ev = v.clone();
    for j in 0..v.ny {
        for i in 0..v.nx {
            let k = v.idx(i, j);
            ev.data[k] *= (-c_x * v.x(i)).exp();
        }
    }
    let mut diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for j in band_range(v.ny) {
        for i in band_range(v.nx) {
            let a = apply_at(theta, &ev, c_x, 1.0, i, j);
            let b = (-c_x * v.x(i)).exp() * apply_at(theta, v, c_x, -1.0, i, j);
            diff = diff.max((a - b).abs());
            scale = scale.max(b.abs());
        }
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn dirichlet_laplacian() {
        let g = Grid1D::symmetric(20.0, 0.02).unwrap();
        assert_eq!(g.n, 2001);
        let op = LinearOperator1D::from_fn(g, 0.0, |_| -1.0).unwrap();
        let l = max_real_eig_1d(&op).unwrap();
        let exact = -1.0 - (PI / 40.0).powi(2);
        assert!((l - exact).abs() < 1e-6, "{l} vs {exact}");
    }

    #[test]
    fn advection_shifts_by_quarter_c_squared() {
        // e^{c x/2} conjugation: eigenvalues of v'' + c v' are those of v'' - c²/4
        let g = Grid1D::symmetric(10.0, 0.01).unwrap();
        let a = max_real_eig_1d(&LinearOperator1D::from_fn(g, 0.6, |_| 0.0).unwrap()).unwrap();
        let b = max_real_eig_1d(&LinearOperator1D::from_fn(g, 0.0, |_| 0.0).unwrap()).unwrap();
        assert!((a - (b - 0.09)).abs() < 1e-4);
    }

    #[test]
    fn tanh_translation_mode() {
        let g = Grid1D::symmetric(20.0, 0.02).unwrap();
        let op = LinearOperator1D::from_fn(g, 0.0, |x| 1.0 - 3.0 * (x / SQRT_2).tanh().powi(2)).unwrap();
        assert!(max_real_eig_1d(&op).unwrap().abs() < 2e-3);
    }

    #[test]
    fn steep_potential_rejected() {
        let g = Grid1D::symmetric(2.0, 0.01).unwrap();
        let op = LinearOperator1D::from_fn(g, 0.0, |x| x.tanh()).unwrap();
        assert!(matches!(max_real_eig_1d(&op), Err(Error::DomainTooSmall(_))));
    }

    #[test]
    fn self_adjoint_case_identical() {
        let th = Field2D::centered(6.0, 6.0, 0.25).unwrap().from_fn(|x, y| (y / SQRT_2).tanh() * (1.0 - 0.3 * x.tanh()));
        let k = kernel_check_2d(&th, 0.0);
        assert!((k.forward_residual - k.adjoint_residual).abs() <= 1e-12 * k.forward_residual);
    }

    #[test]
    fn conjugation_is_second_order() {
        let mut d = Vec::new();
        for h in [0.1, 0.05] {
            let th = Field2D::centered(6.0, 6.0, h).unwrap().from_fn(|x, y| (y / SQRT_2).tanh() * (1.0 - 0.3 * x.tanh()));
            let v = th.clone().from_fn(|x, y| (-(x - 0.5) * (x - 0.5) - y * y).exp());
            d.push(conjugation_defect(&th, &v, 0.5));
        }
        assert!(d[0] / d[1] > 3.5, "{d:?}");
    }
}
