//! Quenched reaction terms, perturbation potentials and equilibrium branches.
//!
//! The medium is bistable for `x < 0`, where the kinetics read `u - u^3 + α g_l(u)`,
//! and monostable for `x > 0`, with `-u - u^3 + α g_r(u)`.

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Physical parameters of the comoving-frame problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Horizontal quenching speed, `c_x >= 0`.
    pub c_x: f64,
    /// Vertical frame speed.
    pub c_y: f64,
    /// Perturbation strength.
    pub alpha: f64,
    pub g_left: Poly,
    pub g_right: Poly,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            c_x: 0.5,
            c_y: 0.0,
            alpha: 0.0,
            g_left: Poly::ZERO,
            g_right: Poly::ZERO,
        }
    }
}

impl ModelParams {
    pub fn new(c_x: f64, alpha: f64, g_left: Poly, g_right: Poly) -> Result<Self> {
        let p = ModelParams {
            c_x,
            c_y: 0.0,
            alpha,
            g_left,
            g_right,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_x.is_finite() && self.c_x >= 0.0) {
            return Err(Error::InvalidParameter(format!("c_x must be >= 0, got {}", self.c_x)));
        }
        if !self.c_y.is_finite() || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("c_y and alpha must be finite".into()));
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_c_y(mut self, c_y: f64) -> Self {
        self.c_y = c_y;
        self
    }

    /// Unperturbed symmetric problem at the same speeds.
    pub fn unperturbed(&self) -> Self {
        ModelParams {
            alpha: 0.0,
            g_left: Poly::ZERO,
            g_right: Poly::ZERO,
            ..*self
        }
    }

    pub fn g(&self, x: f64, u: f64) -> f64 {
        if x < 0.0 {
            self.g_left.eval(u)
        } else {
            self.g_right.eval(u)
        }
    }

    /// Left kinetics `u - u^3 + α g_l(u)`.
    pub fn left_kinetics(&self, u: f64) -> f64 {
        u - u * u * u + self.alpha * self.g_left.eval(u)
    }

    /// Right kinetics `-u - u^3 + α g_r(u)`.
    pub fn right_kinetics(&self, u: f64) -> f64 {
        -u - u * u * u + self.alpha * self.g_right.eval(u)
    }
}

/// Quenching coefficient: `+1` in the bistable half `x < 0`, `-1` otherwise.
pub fn mu(x: f64) -> f64 {
    if x < 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Pointwise reaction `μ(x) u - u^3 + α g(x, u)`.
pub fn reaction(x: f64, u: f64, p: &ModelParams) -> f64 {
    mu(x) * u - u * u * u + p.alpha * p.g(x, u)
}

/// Perturbation potential `G(x, u) = -∫_0^u g(x, s) ds`.
pub fn potential_g(x: f64, u: f64, p: &ModelParams) -> f64 {
    if x < 0.0 {
        -p.g_left.integral(u)
    } else {
        -p.g_right.integral(u)
    }
}

/// Location of a grid node relative to the quenching line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Line,
    Right,
}

impl Side {
    /// Classifies a node of spacing `h`; nodes within `1e-6 h` of zero sit on the line.
    pub fn of(x: f64, h: f64) -> Side {
        if x.abs() <= 1e-6 * h {
            Side::Line
        } else if x < 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// Reaction averaged over the control volume of a node.
///
/// Away from the quenching line this is the pointwise reaction. A node on the line
/// sees half of each side, so `μ` averages to zero and `g` to `(g_l + g_r)/2`; this
/// keeps the finite-difference schemes second order across the jump.
pub fn node_reaction(side: Side, u: f64, p: &ModelParams) -> f64 {
    match side {
        Side::Left => p.left_kinetics(u),
        Side::Right => p.right_kinetics(u),
        Side::Line => 0.5 * (p.left_kinetics(u) + p.right_kinetics(u)),
    }
}

/// `∂_u` of [`node_reaction`].
pub fn node_reaction_du(side: Side, u: f64, p: &ModelParams) -> f64 {
    let left = 1.0 - 3.0 * u * u + p.alpha * p.g_left.derivative(u);
    let right = -1.0 - 3.0 * u * u + p.alpha * p.g_right.derivative(u);
    match side {
        Side::Left => left,
        Side::Right => right,
        Side::Line => 0.5 * (left + right),
    }
}

/// Control-volume average of `G` at a node.
pub fn node_potential(side: Side, u: f64, p: &ModelParams) -> f64 {
    match side {
        Side::Left => -p.g_left.integral(u),
        Side::Right => -p.g_right.integral(u),
        Side::Line => -0.5 * (p.g_left.integral(u) + p.g_right.integral(u)),
    }
}

/// Equilibria continuing `-1, 0, +1` under the perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumBranches {
    pub z_minus: f64,
    pub z_zero: f64,
    pub z_plus: f64,
    pub alpha: f64,
}

impl EquilibriumBranches {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.z_minus + self.z_plus)
    }
}

const ROOT_TOL: f64 = 1e-12;
const FOLD_GAP: f64 = 0.1;

fn newton_root(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, seed: f64) -> Result<f64> {
    let mut z = seed;
    for _ in 0..100 {
        let fz = f(z);
        if fz.abs() < ROOT_TOL * 1e-2 {
            return Ok(z);
        }
        let d = df(z);
        if d.abs() < 1e-10 || !d.is_finite() {
            break;
        }
        let step = fz / d;
        z -= step;
        if step.abs() < 1e-15 * (1.0 + z.abs()) {
            break;
        }
    }
    let res = f(z);
    if res.abs() < ROOT_TOL && z.is_finite() {
        Ok(z)
    } else {
        Err(Error::NoConvergence {
            what: "equilibrium Newton",
            iterations: 100,
            residual: res.abs(),
        })
    }
}

/// Roots `z_±(α)` of the left kinetics and `z_0(α)` of the right kinetics.
///
/// Fails with [`Error::NoConvergence`] when Newton fails or when the branches come
/// within `0.1` of each other, which signals that `α` has left the perturbative regime.
pub fn stable_zeros(alpha: f64, p: &ModelParams) -> Result<EquilibriumBranches> {
    let q = p.with_alpha(alpha);
    let dl = |u: f64| 1.0 - 3.0 * u * u + alpha * q.g_left.derivative(u);
    let dr = |u: f64| -1.0 - 3.0 * u * u + alpha * q.g_right.derivative(u);
    let z_plus = newton_root(|u| q.left_kinetics(u), dl, 1.0)?;
    let z_minus = newton_root(|u| q.left_kinetics(u), dl, -1.0)?;
    let z_zero = newton_root(|u| q.right_kinetics(u), dr, 0.0)?;

    let fold = |residual: f64| Error::NoConvergence {
        what: "equilibrium branches (fold)",
        iterations: 0,
        residual,
    };
    // Both outer roots must be stable and well separated from the middle state.
    if dl(z_plus) >= 0.0 || dl(z_minus) >= 0.0 || dr(z_zero) >= 0.0 {
        return Err(fold(f64::NAN));
    }
    if !(z_minus < z_zero && z_zero < z_plus)
        || (z_plus - z_zero).abs() < FOLD_GAP
        || (z_zero - z_minus).abs() < FOLD_GAP
    {
        return Err(fold((z_plus - z_zero).abs().min((z_zero - z_minus).abs())));
    }
    Ok(EquilibriumBranches {
        z_minus,
        z_zero,
        z_plus,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(gl: &[f64], gr: &[f64]) -> ModelParams {
        ModelParams::new(0.5, 0.0, Poly::new(gl).unwrap(), Poly::new(gr).unwrap()).unwrap()
    }

    #[test]
    fn mu_convention() {
        assert_eq!(mu(-5.0), 1.0);
        assert_eq!(mu(3.0), -1.0);
        assert_eq!(mu(0.0), -1.0);
    }

    #[test]
    fn reaction_examples() {
        let p = params(&[], &[1.0]);
        assert_eq!(reaction(-1.0, 1.0, &p), 0.0);
        assert_eq!(reaction(1.0, 0.0, &p), 0.0);
        assert!((reaction(1.0, 0.0, &p.with_alpha(0.2)) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn potential_examples() {
        let p = params(&[0.0, 0.0, 0.5], &[1.0]);
        assert_eq!(potential_g(2.0, 0.3, &p), -0.3);
        assert!((potential_g(-1.0, 1.0, &p) + 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(potential_g(-1.0, 0.7, &ModelParams::default()), 0.0);
    }

    #[test]
    fn negative_speed_rejected() {
        assert!(ModelParams::new(-0.1, 0.0, Poly::ZERO, Poly::ZERO).is_err());
    }

    #[test]
    fn zeros_unperturbed() {
        let z = stable_zeros(0.0, &ModelParams::default()).unwrap();
        assert_eq!((z.z_minus, z.z_zero, z.z_plus), (-1.0, 0.0, 1.0));
    }

    #[test]
    fn zeros_first_order_perturbation() {
        let p = params(&[1.0], &[1.0]);
        let a = 0.01;
        let z = stable_zeros(a, &p).unwrap();
        // z_+ = 1 + a/2 + O(a^2), z_0 = a + O(a^2)
        assert!((z.z_plus - (1.0 + a / 2.0)).abs() < 2.0 * a * a);
        assert!((z.z_zero - a).abs() < 2.0 * a * a);
        assert!(q_res(&p.with_alpha(a), &z) < 1e-12);
    }

    #[test]
    fn quadratic_left_keeps_zero_state() {
        let p = params(&[0.0, 0.0, 0.5], &[]);
        for a in [-0.2, -0.05, 0.1, 0.3] {
            assert_eq!(stable_zeros(a, &p).unwrap().z_zero, 0.0);
        }
    }

    #[test]
    fn fold_detected() {
        // u - u^3 - 0.5 has a single real root; the +1 branch is gone.
        let p = params(&[1.0], &[]);
        assert!(matches!(
            stable_zeros(-0.5, &p),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn line_node_averages_sides() {
        let p = params(&[1.0], &[0.0, 2.0]).with_alpha(0.3);
        let u = 0.4;
        let avg = 0.5 * (reaction(-1.0, u, &p) + reaction(1.0, u, &p));
        assert!((node_reaction(Side::Line, u, &p) - avg).abs() < 1e-15);
        assert_eq!(Side::of(1e-12, 0.25), Side::Line);
        assert_eq!(Side::of(-0.25, 0.25), Side::Left);
    }

    fn q_res(p: &ModelParams, z: &EquilibriumBranches) -> f64 {
        [
            reaction(-1.0, z.z_plus, p),
            reaction(-1.0, z.z_minus, p),
            reaction(1.0, z.z_zero, p),
        ]
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    proptest! {
        #[test]
        fn zeros_are_roots(a in -0.15_f64..0.15, c0 in -1.0_f64..1.0, c1 in -1.0_f64..1.0, c2 in -1.0_f64..1.0) {
            let p = params(&[c0, c1, c2], &[c2, c0]).with_alpha(a);
            let z = stable_zeros(a, &p).unwrap();
            prop_assert!(q_res(&p, &z) < 1e-12);
            prop_assert!(z.z_minus < z.z_zero && z.z_zero < z.z_plus);
        }

        #[test]
        fn odd_g_gives_symmetric_zeros(c1 in -1.0_f64..1.0, c3 in -1.0_f64..1.0, a in -0.1_f64..0.1) {
            let g = Poly::new(&[0.0, c1, 0.0, c3]).unwrap();
            let p = ModelParams::new(0.5, a, g, g).unwrap();
            let z = stable_zeros(a, &p).unwrap();
            prop_assert!((z.z_minus + z.z_plus).abs() < 1e-12);
            prop_assert!(z.z_zero.abs() < 1e-12);
            for u in [0.1, 0.5, 0.9] {
                prop_assert!((reaction(-1.0, u, &p) + reaction(-1.0, -u, &p)).abs() < 1e-14);
            }
        }

        #[test]
        fn potential_derivative_is_minus_g(u in -1.5_f64..1.5, c0 in -1.0_f64..1.0, c3 in -1.0_f64..1.0) {
            let p = params(&[c0, 0.3, -0.2, c3], &[c3]);
            for x in [-1.0, 1.0] {
                let d = 1e-5;
                let fd = (potential_g(x, u + d, &p) - potential_g(x, u - d, &p)) / (2.0 * d);
                prop_assert!((fd + p.g(x, u)).abs() < 1e-8);
            }
        }
    }
}
