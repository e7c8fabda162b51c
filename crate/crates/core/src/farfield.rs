//! Farfield partition of unity, the glued ansatz, the shear transform and the
//! farfield-core solver for `(w, ψ)`.
//!
//! Polar coordinates follow `(x, y) = (-r cos θ, r sin θ)`, so `θ = 0` points into
//! the left farfield, `θ = π/2` up, `θ = π` right and `θ = 3π/2` down.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::grid::Grid1D;
use crate::model::{stable_zeros, ModelParams};
use crate::profiles1d::{cy_from_speed, solve_quench_front, solve_traveling_wave, FrontSide, Profile1D};
use crate::measure;
use crate::quench2d::{step_initial, Boundary, ContactPin, FactoredSolver, Operator2D};

/// Quintic smoothstep: 0 below 0, 1 above 1, `C²` in between.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Half-width of the angular ramps of `χ_Ψ`.
pub const ANGLE_RAMP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSpec {
    /// Core radius; `χ_R` ramps on `[R - 1, R]`.
    pub r: f64,
}

impl PartitionSpec {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 2.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("core radius must exceed 2, got {r}")));
        }
        Ok(PartitionSpec { r })
    }

    pub fn chi_r(&self, r: f64) -> f64 {
        smoothstep(r - (self.r - 1.0))
    }
}

/// Polar angle in `[0, 2π)` with the left-pointing convention.
pub fn polar_angle(x: f64, y: f64) -> f64 {
    let t = y.atan2(-x);
    if t < 0.0 {
        t + TAU
    } else {
        t
    }
}

/// Angular window: 1 on `[π/4 + 0.1, 3π/4 - 0.1]`, 0 outside `[π/4 - 0.1, 3π/4 + 0.1]`.
pub fn chi_psi(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    let lo = FRAC_PI_4 - ANGLE_RAMP;
    let hi = 3.0 * FRAC_PI_4 - ANGLE_RAMP;
    if t <= lo || t >= hi + 2.0 * ANGLE_RAMP {
        0.0
    } else if t < FRAC_PI_4 + ANGLE_RAMP {
        smoothstep((t - lo) / (2.0 * ANGLE_RAMP))
    } else if t > hi {
        1.0 - smoothstep((t - hi) / (2.0 * ANGLE_RAMP))
    } else {
        1.0
    }
}

/// Values of the five windows at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
    pub left: f64,
    pub core: f64,
}

impl Windows {
    pub fn as_array(&self) -> [f64; 5] {
        [self.top, self.right, self.bottom, self.left, self.core]
    }
}

/// `(χ_t, χ_r, χ_b, χ_l, χ_0)` at `(x, y)`; `χ_0` is `1 - Σ` of the others.
pub fn partition_of_unity(spec: &PartitionSpec, x: f64, y: f64) -> Windows {
    let r = x.hypot(y);
    let cr = spec.chi_r(r);
    if cr == 0.0 {
        return Windows {
            top: 0.0,
            right: 0.0,
            bottom: 0.0,
            left: 0.0,
            core: 1.0,
        };
    }
    let th = polar_angle(x, y);
    let top = cr * chi_psi(th);
    let right = cr * chi_psi(th - FRAC_PI_2);
    let bottom = cr * chi_psi(th - PI);
    let left = cr * chi_psi(th - 3.0 * FRAC_PI_2);
    Windows {
        top,
        right,
        bottom,
        left,
        core: 1.0 - (top + right + bottom + left),
    }
}

/// `max_j |∂^k χ_j| (1 + r)^k` sampled on a polar grid with `r ∈ [r_min, r_max]`.
///
/// Derivatives are centred finite differences; `k = 1` uses the gradient norm and
/// `k = 2` the Frobenius norm of the Hessian.
pub fn partition_derivative_bound(spec: &PartitionSpec, k: usize, r_min: f64, r_max: f64) -> Result<f64> {
    if k > 2 {
        return Err(Error::InvalidParameter(format!("derivative order {k} > 2")));
    }
    if !(r_max > r_min) || r_min < 0.0 {
        return Err(Error::InvalidParameter(format!("bad radius range [{r_min}, {r_max}]")));
    }
    let nr = 200;
    let nt = 4000;
    let eps = if k == 1 { 1e-5 } else { 1e-3 };
    let chi = |x: f64, y: f64| partition_of_unity(spec, x, y).as_array();
    let mut best = 0.0_f64;
    for a in 0..=nr {
        let r = r_min + (r_max - r_min) * a as f64 / nr as f64;
        let wt = (1.0 + r).powi(k as i32);
        for b in 0..nt {
            let th = TAU * b as f64 / nt as f64;
            let (x, y) = (-r * th.cos(), r * th.sin());
            let c = chi(x, y);
            let vals: [f64; 5] = match k {
                0 => c,
                1 => {
                    let (xp, xm) = (chi(x + eps, y), chi(x - eps, y));
                    let (yp, ym) = (chi(x, y + eps), chi(x, y - eps));
                    std::array::from_fn(|j| {
                        let gx = (xp[j] - xm[j]) / (2.0 * eps);
                        let gy = (yp[j] - ym[j]) / (2.0 * eps);
                        gx.hypot(gy)
                    })
                }
                _ => {
                    let (xp, xm) = (chi(x + eps, y), chi(x - eps, y));
                    let (yp, ym) = (chi(x, y + eps), chi(x, y - eps));
                    let (pp, pm) = (chi(x + eps, y + eps), chi(x + eps, y - eps));
                    let (mp, mm) = (chi(x - eps, y + eps), chi(x - eps, y - eps));
                    std::array::from_fn(|j| {
                        let hxx = (xp[j] - 2.0 * c[j] + xm[j]) / (eps * eps);
                        let hyy = (yp[j] - 2.0 * c[j] + ym[j]) / (eps * eps);
                        let hxy = (pp[j] - pm[j] - mp[j] + mm[j]) / (4.0 * eps * eps);
                        (hxx * hxx + hyy * hyy + 2.0 * hxy * hxy).sqrt()
                    })
                }
            };
            for v in vals {
                best = best.max(v.abs() * wt);
            }
        }
    }
    Ok(best)
}

/// Septic smoothstep (`C³`) with two derivatives.
fn smooth_transition(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let t2 = t * t;
    let t3 = t2 * t;
    let v = t2 * t2 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
    let d1 = 140.0 * t3 * (1.0 - t).powi(3);
    let d2 = 420.0 * t2 * (1.0 - t).powi(2) * (1.0 - 2.0 * t);
    (v, d1, d2)
}

/// Cutoff `χ⁻`: 1 for `x <= -2`, 0 for `x >= -1`.
///
/// Septic rather than quintic: the quintic leaves a jump in the third derivative
/// of `𝒮` next to the contact point and the sheared stencil drops to first order.
pub fn chi_minus(x: f64) -> f64 {
    1.0 - smooth_transition(x + 2.0).0
}

/// `𝒮(x) = x χ⁻(x)` and its first two derivatives.
pub fn shear_profile(x: f64) -> (f64, f64, f64) {
    let (s, ds, dds) = smooth_transition(x + 2.0);
    let c = 1.0 - s;
    (x * c, c - x * ds, -2.0 * ds - x * dds)
}

/// Shear `(x, y) -> (x, y + 𝒮(x) tan ψ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearSpec {
    pub psi: f64,
}

impl ShearSpec {
    pub fn new(psi: f64) -> Result<Self> {
        if !(psi.abs() < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!("|psi| must be < pi/2, got {psi}")));
        }
        Ok(ShearSpec { psi })
    }
}

pub fn shear_map(x: f64, y: f64, s: &ShearSpec) -> (f64, f64) {
    (x, y + shear_profile(x).0 * s.psi.tan())
}

pub fn shear_inverse(xt: f64, yt: f64, s: &ShearSpec) -> (f64, f64) {
    (xt, yt - shear_profile(xt).0 * s.psi.tan())
}

/// One-dimensional ingredients of the ansatz at a fixed `α`.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    pub alpha: f64,
    pub top: Profile1D,
    pub bottom: Profile1D,
    /// Bistable wave, sampled in its own coordinate.
    pub wave: Profile1D,
    /// Position of the wave's zero; the ansatz evaluates `wave(ξ + shift)`.
    pub wave_shift: f64,
    pub z_zero: f64,
    /// Normal speed `c_n(α)` of the wave.
    pub c_n: f64,
}

impl ProfileSet {
    /// Fronts on `x_grid` (which must contain `x = 0`) and the wave on
    /// `[-wave_half_width, wave_half_width]` with spacing `wave_h`.
    pub fn solve(p: &ModelParams, x_grid: Grid1D, wave_half_width: f64, wave_h: f64) -> Result<Self> {
        let top = solve_quench_front(FrontSide::Top, p, x_grid)?;
        let bottom = solve_quench_front(FrontSide::Bottom, p, x_grid)?;
        let wg = Grid1D::symmetric(wave_half_width, wave_h)?;
        let (wave, c_n) = if p.alpha == 0.0 {
            // tanh is the exact wave; the discrete one keeps the residual at solver level
            let w = solve_traveling_wave(&p.unperturbed(), wg)?;
            (w.profile, 0.0)
        } else {
            let w = solve_traveling_wave(p, wg)?;
            (w.profile, w.speed)
        };
        let wave_shift = wave
            .zero_crossing()
            .ok_or_else(|| Error::DegenerateProblem("traveling wave has no zero".into()))?;
        let z = stable_zeros(p.alpha, p)?;
        Ok(ProfileSet {
            alpha: p.alpha,
            top,
            bottom,
            wave,
            wave_shift,
            z_zero: z.z_zero,
            c_n,
        })
    }

    pub fn wave_at(&self, xi: f64) -> Result<f64> {
        self.wave.value_at(xi + self.wave_shift)
    }
}

/// `u_ff(x, y; ψ, α) = χ_t u_t + χ_r z_0 + χ_b u_b + χ_l z_tw(sin ψ x + cos ψ y)`.
pub fn farfield_ansatz(x: f64, y: f64, psi: f64, profiles: &ProfileSet, spec: &PartitionSpec) -> Result<f64> {
    let w = partition_of_unity(spec, x, y);
    let mut u = 0.0;
    if w.top > 0.0 {
        u += w.top * profiles.top.value_at(x)?;
    }
    if w.bottom > 0.0 {
        u += w.bottom * profiles.bottom.value_at(x)?;
    }
    if w.right > 0.0 {
        u += w.right * profiles.z_zero;
    }
    if w.left > 0.0 {
        u += w.left * profiles.wave_at(psi.sin() * x + psi.cos() * y)?;
    }
    Ok(u)
}

/// The ansatz in sheared coordinates; the windows take the sheared point directly
/// and the left wave becomes `z_tw(cos ψ ỹ)`.
pub fn sheared_ansatz(xt: f64, yt: f64, psi: f64, profiles: &ProfileSet, spec: &PartitionSpec) -> Result<f64> {
    let w = partition_of_unity(spec, xt, yt);
    let mut u = 0.0;
    if w.top > 0.0 {
        u += w.top * profiles.top.value_at(xt)?;
    }
    if w.bottom > 0.0 {
        u += w.bottom * profiles.bottom.value_at(xt)?;
    }
    if w.right > 0.0 {
        u += w.right * profiles.z_zero;
    }
    if w.left > 0.0 {
        let xi = if xt <= -2.0 {
            psi.cos() * yt
        } else {
            let (_, y) = shear_inverse(xt, yt, &ShearSpec { psi });
            psi.sin() * xt + psi.cos() * y
        };
        u += w.left * profiles.wave_at(xi)?;
    }
    Ok(u)
}

/// Sheared ansatz sampled on the nodes of `grid`.
pub fn ansatz_field(grid: &Field2D, psi: f64, profiles: &ProfileSet, spec: &PartitionSpec) -> Result<Field2D> {
    let mut out = grid.clone();
    for j in 0..grid.ny {
        let y = grid.y(j);
        for i in 0..grid.nx {
            out.data[j * grid.nx + i] = sheared_ansatz(grid.x(i), y, psi, profiles, spec)?;
        }
    }
    Ok(out)
}

/// Discrete operator of the sheared equation with Dirichlet edges.
pub fn sheared_operator(grid: &Field2D, psi: f64, c_x: f64, c_y: f64) -> Operator2D {
    let mut op = Operator2D::comoving(grid, c_x, c_y, Boundary::Dirichlet);
    let t = psi.tan();
    for i in 0..grid.nx {
        let (_, s1, s2) = shear_profile(grid.x(i));
        op.a[i] = 1.0 + t * t * s1 * s1;
        op.b[i] = c_y + t * (c_x * s1 + s2);
        op.m[i] = 2.0 * t * s1;
    }
    op
}

/// Frame speed of the sheared problem, `c_y = c_n / cos ψ - c_x tan ψ`.
pub fn frame_speed(profiles: &ProfileSet, psi: f64, c_x: f64) -> Result<f64> {
    cy_from_speed(profiles.c_n, psi, c_x)
}

/// `F(w, ψ, α)`: the sheared equation applied to `u_ff + w`; zero on the boundary.
pub fn residual_f(
    w: &Field2D,
    psi: f64,
    p: &ModelParams,
    profiles: &ProfileSet,
    spec: &PartitionSpec,
) -> Result<Field2D> {
    let uff = ansatz_field(w, psi, profiles, spec)?;
    let c_y = frame_speed(profiles, psi, p.c_x)?;
    residual_with_ansatz(w, &uff, psi, p, c_y)
}

fn residual_with_ansatz(w: &Field2D, uff: &Field2D, psi: f64, p: &ModelParams, c_y: f64) -> Result<Field2D> {
    w.check_same_grid(uff)?;
    let op = sheared_operator(w, psi, p.c_x, c_y);
    let u: Vec<f64> = uff.data.iter().zip(&w.data).map(|(a, b)| a + b).collect();
    let mut out = w.clone();
    let params = ModelParams { c_y, ..*p };
    op.residual(&u, &params, &mut out.data);
    Ok(out)
}

/// `(Σ e^{2η(|x|+|y|)} F² h_x h_y)^{1/2}`.
pub fn weighted_norm(f: &Field2D, eta: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..f.ny {
        let y = f.y(j).abs();
        for i in 0..f.nx {
            let v = f.get(i, j) * (eta * (f.x(i).abs() + y)).exp();
            s += v * v;
        }
    }
    (s * f.hx * f.hy).sqrt()
}

/// Sup of `|F|` over interior nodes whose whole 9-point stencil lies in
/// `r_lo <= r <= r_hi`. Nodes next to `r = R` would otherwise see the `χ_R` ramp,
/// where the ansatz has no core part.
pub fn annulus_sup(f: &Field2D, r_lo: f64, r_hi: f64) -> f64 {
    let reach = f.hx.hypot(f.hy);
    let (r_lo, r_hi) = (r_lo + reach, r_hi - reach);
    let mut m = 0.0_f64;
    for j in 1..f.ny - 1 {
        for i in 1..f.nx - 1 {
            let r = f.x(i).hypot(f.y(j));
            if r >= r_lo && r <= r_hi {
                m = m.max(f.get(i, j).abs());
            }
        }
    }
    m
}

/// Result of the farfield-core solve.
#[derive(Debug, Clone)]
pub struct CoreCorrection {
    pub w: Field2D,
    pub psi: f64,
    pub alpha: f64,
    pub c_y: f64,
    pub weighted_residual: f64,
    pub weight_rate: f64,
    /// `⟨F, e^{c_x x} Θ_y⟩ / |M_ψ|` at the returned state.
    pub projected_residual: f64,
    pub iterations: usize,
}

impl CoreCorrection {
    /// Writes `w` in the grid format plus a `key = value` sidecar.
    pub fn write(&self, grid_path: &Path, meta_path: &Path) -> Result<()> {
        self.w.write_binary(grid_path)?;
        let s = format!(
            "psi = {:?}\nalpha = {:?}\nc_y = {:?}\neta = {:?}\nweighted_residual = {:?}\nprojected_residual = {:?}\niterations = {}\n",
            self.psi, self.alpha, self.c_y, self.weight_rate, self.weighted_residual, self.projected_residual, self.iterations
        );
        std::fs::write(meta_path, s)?;
        Ok(())
    }
}

/// Settings of [`solve_bordered`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BorderedSpec {
    pub half_width: f64,
    pub h: f64,
    pub dt: f64,
    /// Bound on the weighted residual and on the contact offset.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BorderedSpec {
    fn default() -> Self {
        BorderedSpec {
            half_width: 40.0,
            h: 0.25,
            dt: 0.5,
            tol: 1e-6,
            max_iter: 20_000,
        }
    }
}

impl BorderedSpec {
    pub fn grid(&self) -> Result<Field2D> {
        Field2D::centered(self.half_width, self.half_width, self.h)
    }
}

/// Weight rate `min(c_x, 1) / 4`.
pub fn default_eta(c_x: f64) -> f64 {
    c_x.min(1.0) / 4.0
}

/// Angle with `c_n / cos ψ - c_x tan ψ = c_y`, by Newton from `guess`.
pub fn psi_from_cy(c_n: f64, c_y: f64, c_x: f64, guess: f64) -> Result<f64> {
    let mut psi = guess;
    for _ in 0..50 {
        let (s, c) = psi.sin_cos();
        let f = c_n / c - c_x * s / c - c_y;
        let df = (c_n * s - c_x) / (c * c);
        if !(df.abs() > 1e-12) {
            break;
        }
        let step = (f / df).clamp(-0.2, 0.2);
        psi -= step;
        if step.abs() < 1e-15 {
            return Ok(psi);
        }
    }
    let res = cy_from_speed(c_n, psi, c_x).map(|v| (v - c_y).abs()).unwrap_or(f64::NAN);
    if res < 1e-12 {
        Ok(psi)
    } else {
        Err(Error::NoConvergence {
            what: "angle from frame speed",
            iterations: 50,
            residual: res,
        })
    }
}

/// Solves `F(w, ψ, α) = 0` for `w` (zero on the boundary) and the angle `ψ`.
///
/// On a truncated box with Dirichlet data the discrete problem in `w` is solvable
/// for every `ψ`; the missing scalar equation is that the contact point sits at
/// `ỹ = 0`, as it does when `w` decays. `w` follows the factored pseudo-time
/// iteration and `ψ` is driven by the contact-pin feedback acting through
/// `c_y(ψ)`. `theta` seeds `w = Θ - u_ff` and supplies the cokernel weight
/// `e^{c_x x} Θ_y` used for the projected residual.
pub fn solve_bordered(
    alpha: f64,
    p: &ModelParams,
    spec: &PartitionSpec,
    eta: f64,
    theta: &Field2D,
    settings: &BorderedSpec,
) -> Result<CoreCorrection> {
    if !(eta > 0.0) || (p.c_x > 0.0 && eta >= p.c_x) {
        return Err(Error::InvalidParameter(format!("weight rate must lie in (0, c_x), got {eta}")));
    }
    let grid = settings.grid()?;
    theta.check_same_grid(&grid)?;
    if spec.r + 1.0 > settings.half_width {
        return Err(Error::DomainTooSmall(format!(
            "core radius {} does not fit in half width {}",
            spec.r, settings.half_width
        )));
    }
    let params = p.with_alpha(alpha);
    let wave_half = settings.half_width * std::f64::consts::SQRT_2 + 10.0;
    let profiles = ProfileSet::solve(&params, grid.x_grid(), wave_half, settings.h)?;

    let ty = theta.d_dy();
    let mut phi = ty.clone();
    let mut m_psi = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.idx(i, j);
            let e = (p.c_x * grid.x(i)).exp();
            phi.data[k] = e * ty.data[k];
            m_psi += e * ty.data[k] * ty.data[k];
        }
    }
    m_psi *= -p.c_x * grid.hx * grid.hy;
    if !(m_psi.abs() > 1e-10) {
        return Err(Error::IllConditioned { condition: m_psi.abs() });
    }
    let project = |f: &Field2D| -> f64 {
        f.data.iter().zip(&phi.data).map(|(a, b)| a * b).sum::<f64>() * grid.hx * grid.hy / m_psi.abs()
    };

    let mut psi = 0.0;
    let mut uff = ansatz_field(&grid, psi, &profiles, spec)?;
    let mut w = theta.clone();
    for (a, b) in w.data.iter_mut().zip(&uff.data) {
        *a -= b;
    }
    zero_boundary(&mut w);

    let dt = settings.dt;
    let mut c_y = frame_speed(&profiles, psi, p.c_x)?;
    let mut pin = ContactPin::starting_at(c_y);
    let mut op = sheared_operator(&grid, psi, p.c_x, c_y);
    op.m.fill(0.0);
    let mut solver = FactoredSolver::new(&op, dt, None)?;
    let mut u = grid.clone();
    let mut weighted = f64::INFINITY;
    let mut y_c = f64::INFINITY;
    for it in 0..=settings.max_iter {
        let f = residual_with_ansatz(&w, &uff, psi, &params, c_y)?;
        weighted = weighted_norm(&f, eta);
        if !weighted.is_finite() {
            return Err(Error::NonFinite("bordered residual".into()));
        }
        for ((v, a), b) in u.data.iter_mut().zip(&uff.data).zip(&w.data) {
            *v = a + b;
        }
        y_c = measure::contact_height(&u)?;
        if weighted < settings.tol && y_c.abs() < settings.tol {
            return Ok(CoreCorrection {
                w,
                psi,
                alpha,
                c_y,
                weighted_residual: weighted,
                weight_rate: eta,
                projected_residual: project(&f),
                iterations: it,
            });
        }
        if it == settings.max_iter {
            break;
        }
        let mut delta = f.data;
        delta.iter_mut().for_each(|v| *v *= dt);
        solver.solve_in_place(&mut delta);
        for (a, d) in w.data.iter_mut().zip(&delta) {
            *a += d;
        }
        zero_boundary(&mut w);

        let target = pin.update(y_c, dt);
        psi = psi_from_cy(profiles.c_n, target, p.c_x, psi)?;
        if !(psi.abs() < FRAC_PI_2 - 0.1) {
            return Err(Error::NoConvergence {
                what: "bordered angle",
                iterations: it,
                residual: weighted,
            });
        }
        c_y = frame_speed(&profiles, psi, p.c_x)?;
        uff = ansatz_field(&grid, psi, &profiles, spec)?;
        op = sheared_operator(&grid, psi, p.c_x, c_y);
        op.m.fill(0.0);
        solver.refactor_x(&op, None)?;
        solver.refactor_y(&op)?;
    }
    let _ = y_c;
    Err(Error::NotConverged {
        steps: settings.max_iter,
        rate: weighted,
    })
}

fn zero_boundary(w: &mut Field2D) {
    let (nx, ny) = (w.nx, w.ny);
    for i in 0..nx {
        w.set(i, 0, 0.0);
        w.set(i, ny - 1, 0.0);
    }
    for j in 0..ny {
        w.set(0, j, 0.0);
        w.set(nx - 1, j, 0.0);
    }
}

/// Step-like field on the bordered grid, for seeding when no `Θ` is at hand.
pub fn bordered_seed(settings: &BorderedSpec) -> Result<Field2D> {
    Ok(step_initial(&Field2D::centered(settings.half_width, settings.half_width, settings.h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn core_and_right_windows() {
        let s = PartitionSpec::new(10.0).unwrap();
        let w = partition_of_unity(&s, 3.0, -4.0);
        assert_eq!(w.as_array(), [0.0, 0.0, 0.0, 0.0, 1.0]);
        let w = partition_of_unity(&s, 20.0, 0.0);
        assert_eq!(w.as_array(), [0.0, 1.0, 0.0, 0.0, 0.0]);
        let w = partition_of_unity(&s, -20.0, 0.0);
        assert_eq!(w.left, 1.0);
        let w = partition_of_unity(&s, 0.0, 20.0);
        assert_eq!(w.top, 1.0);
        let w = partition_of_unity(&s, 0.0, -20.0);
        assert_eq!(w.bottom, 1.0);
    }

    #[test]
    fn shear_examples() {
        let s = ShearSpec::new(PI / 6.0).unwrap();
        let (x, y) = shear_map(-3.0, 1.0, &s);
        assert_eq!(x, -3.0);
        assert!((y - (1.0 - 3.0_f64.sqrt())).abs() < 1e-15);
        assert_eq!(shear_map(0.5, 2.0, &s), (0.5, 2.0));
        assert_eq!(shear_map(-7.0, 2.0, &ShearSpec::new(0.0).unwrap()), (-7.0, 2.0));
        assert!(ShearSpec::new(FRAC_PI_2).is_err());
    }

    #[test]
    fn shear_profile_derivatives() {
        for k in 0..=60 {
            let x = -3.0 + 0.05 * k as f64;
            let e = 1e-5;
            let (_, s1, s2) = shear_profile(x);
            let fd1 = (shear_profile(x + e).0 - shear_profile(x - e).0) / (2.0 * e);
            let fd2 = (shear_profile(x + e).1 - shear_profile(x - e).1) / (2.0 * e);
            assert!((s1 - fd1).abs() < 1e-8, "x={x} {s1} {fd1}");
            assert!((s2 - fd2).abs() < 1e-7, "x={x} {s2} {fd2}");
        }
    }

    #[test]
    fn derivative_bounds() {
        let s = PartitionSpec::new(10.0).unwrap();
        assert!(partition_derivative_bound(&s, 0, 0.0, 100.0).unwrap() <= 1.0);
        let near = partition_derivative_bound(&s, 1, 20.0, 40.0).unwrap();
        let far = partition_derivative_bound(&s, 1, 80.0, 100.0).unwrap();
        assert!((near / far - 1.0).abs() < 0.05, "{near} {far}");
        assert!(partition_derivative_bound(&s, 2, 20.0, 100.0).unwrap().is_finite());
    }

    proptest! {
        #[test]
        fn partition_sums_to_one(x in -200.0f64..200.0, y in -200.0f64..200.0, r in 3.0f64..60.0) {
            let s = PartitionSpec::new(r).unwrap();
            let w = partition_of_unity(&s, x, y).as_array();
            let sum: f64 = w.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-15);
            prop_assert!(w.iter().all(|v| (-1e-15..=1.0 + 1e-15).contains(v)));
        }

        #[test]
        fn shear_roundtrip(x in -100.0f64..100.0, y in -100.0f64..100.0, psi in -1.5f64..1.5) {
            let s = ShearSpec::new(psi).unwrap();
            let (a, b) = shear_map(x, y, &s);
            let (c, d) = shear_inverse(a, b, &s);
            prop_assert!((c - x).abs() < 1e-14 * (1.0 + x.abs()));
            prop_assert!((d - y).abs() < 1e-14 * (1.0 + y.abs() + (x * psi.tan()).abs()));
        }
    }
}
