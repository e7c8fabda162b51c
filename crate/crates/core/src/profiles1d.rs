//! One-dimensional farfield building blocks.
//!
//! * quenched fronts `u_t` (from `z_+` to `z_0`) and `u_b` (from `z_-` to `z_0`) solving
//!   `u'' + c_x u' + μ(x) u - u^3 + α g(x, u) = 0`;
//! * the bistable traveling wave `z'' + c z' + z - z^3 + α g_l(z) = 0` with its selected
//!   speed `c_n(α)`;
//! * the first-order speed correction `c_n'(0)` by quadrature along `tanh(y/√2)`;
//! * the vertical frame speed `c_y(α, ψ)` of an oblique interface.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::thomas;
use crate::model::{node_reaction, node_reaction_du, stable_zeros, ModelParams, Side};
use crate::poly::Poly;
use crate::quadrature::CompositeGauss;

pub const NEWTON_MAX_ITER: usize = 50;
pub const PROFILE_TOL: f64 = 1e-10;
/// Largest endpoint slope accepted before the truncation is declared too small.
pub const ENDPOINT_SLOPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Top,
    Bottom,
    TravelingWave,
    AnalyticTanh,
}

impl ProfileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileKind::Top => "top",
            ProfileKind::Bottom => "bottom",
            ProfileKind::TravelingWave => "traveling_wave",
            ProfileKind::AnalyticTanh => "analytic_tanh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontSide {
    Top,
    Bottom,
}

/// Sampled front profile on a truncated uniform grid.
#[derive(Debug, Clone)]
pub struct Profile1D {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub limit_left: f64,
    pub limit_right: f64,
    pub residual_norm: f64,
    pub kind: ProfileKind,
}

impl Profile1D {
    /// `tanh(y/√2)` sampled on `grid`.
    pub fn analytic_tanh(grid: Grid1D) -> Self {
        Profile1D {
            values: grid.points().iter().map(|&y| (y / SQRT_2).tanh()).collect(),
            grid,
            limit_left: -1.0,
            limit_right: 1.0,
            residual_norm: 0.0,
            kind: ProfileKind::AnalyticTanh,
        }
    }

    /// Cubic (four-point Lagrange) interpolation; errors outside the grid.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let g = &self.grid;
        if !g.contains(x) {
            return Err(Error::OutOfProfileRange {
                coordinate: x,
                min: g.x_min,
                max: g.x_max,
            });
        }
        let h = g.h();
        let s = (x - g.x_min) / h;
        let n = g.n;
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        if t.abs() < 1e-12 {
            return Ok(self.values[i]);
        }
        let j0 = i.saturating_sub(1).min(n - 4);
        let v = &self.values;
        let ts: [f64; 4] = std::array::from_fn(|k| (j0 + k) as f64 - i as f64);
        let mut out = 0.0;
        for k in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != k {
                    w *= (t - ts[m]) / (ts[k] - ts[m]);
                }
            }
            out += w * v[j0 + k];
        }
        Ok(out)
    }

    /// Value at `x`, clamped to the asymptotic limits outside the grid.
    pub fn value_or_limit(&self, x: f64) -> f64 {
        if x <= self.grid.x_min {
            self.limit_left
        } else if x >= self.grid.x_max {
            self.limit_right
        } else {
            self.value_at(x).unwrap_or(f64::NAN)
        }
    }

    /// First zero crossing by linear interpolation between bracketing nodes.
    pub fn zero_crossing(&self) -> Option<f64> {
        let pts = self.grid.points();
        self.values.windows(2).enumerate().find_map(|(i, w)| {
            if w[0] == 0.0 {
                Some(pts[i])
            } else if w[0] * w[1] < 0.0 {
                Some(pts[i] + (pts[i + 1] - pts[i]) * w[0] / (w[0] - w[1]))
            } else {
                None
            }
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("x,u\n");
        for (x, u) in self.grid.points().iter().zip(&self.values) {
            writeln!(out, "{x:?},{u:?}").expect("string write");
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Sidecar `key = value` metadata next to a CSV export.
    pub fn write_metadata(&self, path: &Path, extra: &[(&str, String)]) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "kind = {}", self.kind.as_str())?;
        writeln!(f, "x_min = {:?}", self.grid.x_min)?;
        writeln!(f, "x_max = {:?}", self.grid.x_max)?;
        writeln!(f, "n = {}", self.grid.n)?;
        writeln!(f, "limit_left = {:?}", self.limit_left)?;
        writeln!(f, "limit_right = {:?}", self.limit_right)?;
        writeln!(f, "residual = {:?}", self.residual_norm)?;
        for (k, v) in extra {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Traveling wave together with its selected speed.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    pub profile: Profile1D,
    pub speed: f64,
    pub alpha: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Second-order residual of `u'' + c u' + f(x, u)` at interior nodes (boundary entries zero).
fn front_residual(u: &[f64], h: f64, c: f64, reaction: impl Fn(usize, f64) -> f64, out: &mut [f64]) {
    let n = u.len();
    let (ih2, i2h) = (1.0 / (h * h), 0.5 / h);
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * ih2
            + c * (u[i + 1] - u[i - 1]) * i2h
            + reaction(i, u[i]);
    }
}

/// Solves the quenched front `u_t` (top) or `u_b` (bottom) by damped Newton.
///
/// Dirichlet values `z_±(α)` at `x_min` and `z_0(α)` at `x_max`; `grid` must contain
/// `x = 0` as a node.
pub fn solve_quench_front(side: FrontSide, p: &ModelParams, grid: Grid1D) -> Result<Profile1D> {
    p.validate()?;
    if grid.zero_index().is_none() {
        return Err(Error::InvalidParameter("quench-front grid must contain x = 0 as a node".into()));
    }
    let z = stable_zeros(p.alpha, p)?;
    let (left, kind) = match side {
        FrontSide::Top => (z.z_plus, ProfileKind::Top),
        FrontSide::Bottom => (z.z_minus, ProfileKind::Bottom),
    };
    let right = z.z_zero;
    let h = grid.h();
    let sides: Vec<Side> = grid.points().iter().map(|&x| Side::of(x, h)).collect();
    let mut u: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| right + (left - right) * 0.5 * (1.0 - (x / SQRT_2).tanh()))
        .collect();
    u[0] = left;
    *u.last_mut().unwrap() = right;

    let reaction = |i: usize, v: f64| node_reaction(sides[i], v, p);
    let jac_diag = |i: usize, v: f64| node_reaction_du(sides[i], v, p);
    let residual = newton_dirichlet(&mut u, h, p.c_x, reaction, jac_diag, "quenched front")?;

    let slope_left = (u[1] - u[0]).abs() / h;
    let slope_right = (u[grid.n - 1] - u[grid.n - 2]).abs() / h;
    if slope_left.max(slope_right) > ENDPOINT_SLOPE_TOL {
        return Err(Error::DomainTooSmall(format!(
            "endpoint slopes {slope_left:.2e} / {slope_right:.2e} on [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    Ok(Profile1D {
        grid,
        values: u,
        limit_left: left,
        limit_right: right,
        residual_norm: residual,
        kind,
    })
}

/// Damped Newton for a Dirichlet problem `u'' + c u' + f_i(u) = 0` on interior nodes.
fn newton_dirichlet(
    u: &mut [f64],
    h: f64,
    c: f64,
    reaction: impl Fn(usize, f64) -> f64,
    reaction_du: impl Fn(usize, f64) -> f64,
    what: &'static str,
) -> Result<f64> {
    let n = u.len();
    let m = n - 2;
    let (ih2, i2h) = (1.0 / (h * h), 0.5 / h);
    let mut r = vec![0.0; n];
    let mut trial = u.to_vec();
    let mut rt = vec![0.0; n];
    let (mut lower, mut diag, mut upper) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut rhs = vec![0.0; m];
    let mut scratch = Vec::new();

    front_residual(u, h, c, &reaction, &mut r);
    let mut norm = sup(&r);
    for _ in 0..NEWTON_MAX_ITER {
        if norm < 1e-15 * ih2.max(1.0) {
            break;
        }
        for k in 0..m {
            let i = k + 1;
            lower[k] = ih2 - c * i2h;
            upper[k] = ih2 + c * i2h;
            diag[k] = -2.0 * ih2 + reaction_du(i, u[i]);
            rhs[k] = -r[i];
        }
        thomas(&lower, &diag, &upper, &mut rhs, &mut scratch)?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            for k in 0..m {
                trial[k + 1] = u[k + 1] + step * rhs[k];
            }
            trial[0] = u[0];
            trial[n - 1] = u[n - 1];
            front_residual(&trial, h, c, &reaction, &mut rt);
            let tn = sup(&rt);
            if tn.is_finite() && tn < norm {
                accepted = true;
                norm = tn;
                u.copy_from_slice(&trial);
                std::mem::swap(&mut r, &mut rt);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm < PROFILE_TOL {
        Ok(norm)
    } else {
        Err(Error::NoConvergence {
            what,
            iterations: NEWTON_MAX_ITER,
            residual: norm,
        })
    }
}

/// Solves the bistable traveling wave and its speed `c_n(α)` by bordered Newton.
///
/// The phase is pinned by `z(0) = (z_+ + z_-)/2` at the grid node `ξ = 0`, which splits
/// the Jacobian into two well-conditioned tridiagonal blocks coupled through the speed.
pub fn solve_traveling_wave(p: &ModelParams, grid: Grid1D) -> Result<WaveSolution> {
    p.validate()?;
    let k = grid
        .zero_index()
        .ok_or_else(|| Error::InvalidParameter("wave grid must contain 0 as a node".into()))?;
    if k < 2 || k + 3 > grid.n {
        return Err(Error::InvalidParameter("wave grid must extend on both sides of 0".into()));
    }
    let z = stable_zeros(p.alpha, p).map_err(|e| {
        Error::DegenerateProblem(format!("bistable branches unavailable at alpha = {}: {e}", p.alpha))
    })?;
    let mid = z.midpoint();
    let half = 0.5 * (z.z_plus - z.z_minus);
    let h = grid.h();
    let n = grid.n;
    let mut u: Vec<f64> = grid.points().iter().map(|&x| mid + half * (x / SQRT_2).tanh()).collect();
    u[0] = z.z_minus;
    u[n - 1] = z.z_plus;
    u[k] = mid;
    let mut c = 0.0;

    let (ih2, i2h) = (1.0 / (h * h), 0.5 / h);
    let reaction = |_: usize, v: f64| p.left_kinetics(v);
    let mut r = vec![0.0; n];
    let mut rt = vec![0.0; n];
    let mut trial = u.clone();
    let mut scratch = Vec::new();
    front_residual(&u, h, c, reaction, &mut r);
    let mut norm = sup(&r);

    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITER && norm >= 1e-15 * ih2.max(1.0) {
        iterations += 1;
        let du_dc = |i: usize| (u[i + 1] - u[i - 1]) * i2h;
        let block = |lo: usize, hi: usize, scratch: &mut Vec<f64>| -> Result<(Vec<f64>, Vec<f64>)> {
            // rows/unknowns lo..hi (inclusive), Dirichlet-like coupling to fixed neighbours
            let m = hi + 1 - lo;
            let (mut l, mut d, mut up) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
            let mut y: Vec<f64> = (lo..=hi).map(|i| -r[i]).collect();
            let mut zc: Vec<f64> = (lo..=hi).map(du_dc).collect();
            for (j, i) in (lo..=hi).enumerate() {
                l[j] = ih2 - c * i2h;
                up[j] = ih2 + c * i2h;
                d[j] = -2.0 * ih2 + 1.0 - 3.0 * u[i] * u[i] + p.alpha * p.g_left.derivative(u[i]);
            }
            thomas(&l, &d, &up, &mut y, scratch)?;
            thomas(&l, &d, &up, &mut zc, scratch)?;
            Ok((y, zc))
        };
        let (yl, zl) = block(1, k - 1, &mut scratch)?;
        let (yr, zr) = block(k + 1, n - 2, &mut scratch)?;
        let a = ih2 - c * i2h;
        let b = ih2 + c * i2h;
        let (yl_last, zl_last) = (yl[yl.len() - 1], zl[zl.len() - 1]);
        let denom = du_dc(k) - a * zl_last - b * zr[0];
        if denom.abs() < 1e-300 {
            return Err(Error::LinearSolveFailure("singular speed border".into()));
        }
        let dc = (-r[k] - a * yl_last - b * yr[0]) / denom;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            for (j, i) in (1..k).enumerate() {
                trial[i] = u[i] + step * (yl[j] - dc * zl[j]);
            }
            for (j, i) in (k + 1..n - 1).enumerate() {
                trial[i] = u[i] + step * (yr[j] - dc * zr[j]);
            }
            let ct = c + step * dc;
            front_residual(&trial, h, ct, reaction, &mut rt);
            let tn = sup(&rt);
            if tn.is_finite() && tn < norm {
                accepted = true;
                norm = tn;
                c = ct;
                u.copy_from_slice(&trial);
                std::mem::swap(&mut r, &mut rt);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm >= PROFILE_TOL {
        return Err(Error::NoConvergence {
            what: "traveling wave",
            iterations,
            residual: norm,
        });
    }
    Ok(WaveSolution {
        profile: Profile1D {
            grid,
            values: u,
            limit_left: z.z_minus,
            limit_right: z.z_plus,
            residual_norm: norm,
            kind: ProfileKind::TravelingWave,
        },
        speed: c,
        alpha: p.alpha,
    })
}

/// `c_n'(0) = -∫ g_l(u_*) u_*' dy / ∫ (u_*')^2 dy` with `u_* = tanh(y/√2)`, on `|y| <= 40`.
pub fn cn_prime_quadrature(g_left: &Poly) -> f64 {
    if g_left.is_zero() {
        return 0.0;
    }
    let rule = CompositeGauss::new(16, 64);
    let du = |y: f64| {
        let s = 1.0 / (y / SQRT_2).cosh();
        s * s / SQRT_2
    };
    let num = rule.integrate(-40.0, 40.0, |y| g_left.eval((y / SQRT_2).tanh()) * du(y));
    let den = rule.integrate(-40.0, 40.0, |y| du(y).powi(2));
    -num / den
}

/// `c_y(α, ψ) = c_n(α) / cos ψ - c_x tan ψ`.
pub fn cy_from_speed(c_n: f64, psi: f64, c_x: f64) -> Result<f64> {
    if !(psi.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!("|psi| must be < pi/2, got {psi}")));
    }
    Ok(c_n / psi.cos() - c_x * psi.tan())
}

/// Memoized normal speeds `c_n(α)` for one model, computed on a fixed wave grid.
#[derive(Debug, Clone)]
pub struct NormalSpeed {
    params: ModelParams,
    grid: Grid1D,
    cache: HashMap<u64, f64>,
}

impl NormalSpeed {
    pub fn new(params: ModelParams, grid: Grid1D) -> Self {
        NormalSpeed {
            params,
            grid,
            cache: HashMap::new(),
        }
    }

    /// Default desk-scale wave grid `[-30, 30]`, `h = 0.025`.
    pub fn with_default_grid(params: ModelParams) -> Self {
        let grid = Grid1D::symmetric(30.0, 0.025).expect("static grid");
        NormalSpeed::new(params, grid)
    }

    pub fn c_n(&mut self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 || self.params.g_left.is_zero() || self.params.g_left.is_odd() {
            return Ok(0.0);
        }
        if let Some(&c) = self.cache.get(&alpha.to_bits()) {
            return Ok(c);
        }
        let c = solve_traveling_wave(&self.params.with_alpha(alpha), self.grid)?.speed;
        self.cache.insert(alpha.to_bits(), c);
        Ok(c)
    }

    pub fn cy_from_angle(&mut self, alpha: f64, psi: f64) -> Result<f64> {
        let c_n = self.c_n(alpha)?;
        cy_from_speed(c_n, psi, self.params.c_x)
    }
}

/// `c_y(α, ψ)` with `c_n(α)` from a fresh wave solve on the default grid.
pub fn cy_from_angle(alpha: f64, psi: f64, p: &ModelParams) -> Result<f64> {
    NormalSpeed::with_default_grid(*p).cy_from_angle(alpha, psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn top(c_x: f64, grid: Grid1D) -> Profile1D {
        let p = ModelParams::new(c_x, 0.0, Poly::ZERO, Poly::ZERO).unwrap();
        solve_quench_front(FrontSide::Top, &p, grid).unwrap()
    }

    #[test]
    fn top_front_limits_and_monotone() {
        let g = Grid1D::symmetric(30.0, 0.025).unwrap();
        let t = top(0.5, g);
        assert!(t.residual_norm < PROFILE_TOL);
        assert!((t.values[0] - 1.0).abs() < 1e-12);
        assert!(t.values[g.n - 1].abs() < 1e-12);
        for w in t.values.windows(2) {
            let away_from_limits = (w[0] - 1.0).abs() > 1e-12 && w[1].abs() > 1e-12;
            if away_from_limits {
                assert!(w[1] < w[0]);
            }
        }
    }

    #[test]
    fn bottom_is_minus_top_at_zero_alpha() {
        let g = Grid1D::symmetric(30.0, 0.05).unwrap();
        for c_x in [0.0, 0.3, 1.0] {
            let p = ModelParams::new(c_x, 0.0, Poly::ZERO, Poly::ZERO).unwrap();
            let t = solve_quench_front(FrontSide::Top, &p, g).unwrap();
            let b = solve_quench_front(FrontSide::Bottom, &p, g).unwrap();
            for (a, b) in t.values.iter().zip(&b.values) {
                assert!((a + b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn truncated_domain_detected() {
        let g = Grid1D::symmetric(3.0, 0.05).unwrap();
        let p = ModelParams::default();
        assert!(matches!(
            solve_quench_front(FrontSide::Top, &p, g),
            Err(Error::DomainTooSmall(_))
        ));
    }

    #[test]
    fn grid_without_zero_node_rejected() {
        let g = Grid1D::new(-10.0, 10.1, 100).unwrap();
        assert!(solve_quench_front(FrontSide::Top, &ModelParams::default(), g).is_err());
    }

    #[test]
    fn exponential_tail_toward_zero_state() {
        let g = Grid1D::symmetric(30.0, 0.025).unwrap();
        let t = top(0.5, g);
        // log|u_t - z_0| over x in [5, 15] is close to linear with negative slope
        let pts: Vec<(f64, f64)> = g
            .points()
            .iter()
            .zip(&t.values)
            .filter(|(x, _)| **x >= 5.0 && **x <= 15.0)
            .map(|(x, u)| (*x, u.abs().ln()))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
        // linearization u'' + c u' - u = 0 decays at (c + sqrt(c^2 + 4))/2
        let rate = (0.5 + (0.25_f64 + 4.0).sqrt()) / 2.0;
        assert!(slope < 0.0);
        assert!((-slope - rate).abs() < 0.02, "slope {slope} vs {rate}");
    }

    #[test]
    fn wave_speed_zero_for_odd_perturbation() {
        let g = Grid1D::symmetric(20.0, 0.02).unwrap();
        let p = ModelParams::new(0.5, 0.0, Poly::new(&[0.0, 1.0]).unwrap(), Poly::ZERO).unwrap();
        for a in [-0.05, 0.02, 0.05] {
            let w = solve_traveling_wave(&p.with_alpha(a), g).unwrap();
            assert!(w.speed.abs() < 1e-10, "alpha {a}: c = {}", w.speed);
        }
    }

    #[test]
    fn wave_phase_condition_exact() {
        let g = Grid1D::symmetric(20.0, 0.02).unwrap();
        let p = ModelParams::new(0.5, 0.1, Poly::constant(1.0), Poly::ZERO).unwrap();
        let w = solve_traveling_wave(&p, g).unwrap();
        let z = stable_zeros(0.1, &p).unwrap();
        let k = g.zero_index().unwrap();
        assert!((w.profile.values[k] - z.midpoint()).abs() < 1e-12);
        assert!(w.profile.residual_norm < 1e-10);
    }

    #[test]
    fn cn_prime_values() {
        assert!((cn_prime_quadrature(&Poly::constant(1.0)) + 3.0 / SQRT_2).abs() < 1e-10);
        assert!(cn_prime_quadrature(&Poly::new(&[0.0, 1.0]).unwrap()).abs() < 1e-12);
        let q = cn_prime_quadrature(&Poly::new(&[0.0, 0.0, 0.5]).unwrap());
        assert!((q + 1.0 / (2.0 * SQRT_2)).abs() < 1e-10);
    }

    #[test]
    fn cy_examples() {
        assert_eq!(cy_from_speed(0.3, 0.0, 0.5).unwrap(), 0.3);
        let psi = 0.2_f64;
        assert!((cy_from_speed(0.0, psi, 0.5).unwrap() + 0.5 * psi.tan()).abs() < 1e-15);
        let d = 1e-5;
        let slope = (cy_from_speed(0.0, d, 0.5).unwrap() - cy_from_speed(0.0, -d, 0.5).unwrap()) / (2.0 * d);
        assert!((slope + 0.5).abs() < 1e-8);
        assert!(cy_from_speed(0.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let g = Grid1D::new(-2.0, 3.0, 11).unwrap();
        let f = |x: f64| 0.3 * x * x * x - x + 2.0;
        let prof = Profile1D {
            values: g.points().iter().map(|&x| f(x)).collect(),
            grid: g,
            limit_left: 0.0,
            limit_right: 0.0,
            residual_norm: 0.0,
            kind: ProfileKind::Top,
        };
        for x in [-2.0, -1.93, 0.0, 0.77, 2.99, 3.0] {
            assert!((prof.value_at(x).unwrap() - f(x)).abs() < 1e-12);
        }
        assert!(matches!(prof.value_at(3.5), Err(Error::OutOfProfileRange { .. })));
    }
}
