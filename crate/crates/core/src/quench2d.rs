//! Comoving-frame solver for the quenched Allen-Cahn equation on a rectangle.
//!
//! The linear part is `L v = v_xx + c_x v_x + a(x) v_yy + b(x) v_y + m(x) v_xy`
//! with coefficients constant along columns; the plain comoving frame has
//! `a = 1`, `b = c_y`, `m = 0`, and the sheared frame of [`crate::farfield`] uses
//! the general form.

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::linalg::{bicgstab, KrylovStats};
use crate::measure::{contact_height, ContactTrack};
use crate::model::{node_reaction, node_reaction_du, ModelParams, Side};

/// Values above this magnitude are treated as blow-up.
pub const CLAMP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Homogeneous Neumann by ghost-node reflection.
    Neumann,
    /// Boundary nodes held fixed; only interior nodes are unknowns.
    Dirichlet,
}

/// Discrete linear operator with column-wise coefficients.
#[derive(Debug, Clone)]
pub struct Operator2D {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub boundary: Boundary,
    pub c_x: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub m: Vec<f64>,
    pub sides: Vec<Side>,
    /// Reaction switched off (pure advection-diffusion diagnostics).
    pub reaction_enabled: bool,
}

impl Operator2D {
    /// `Δ + c_x ∂_x + c_y ∂_y` on the grid of `field`.
    pub fn comoving(field: &Field2D, c_x: f64, c_y: f64, boundary: Boundary) -> Self {
        let sides = (0..field.nx).map(|i| Side::of(field.x(i), field.hx)).collect();
        Operator2D {
            nx: field.nx,
            ny: field.ny,
            hx: field.hx,
            hy: field.hy,
            boundary,
            c_x,
            a: vec![1.0; field.nx],
            b: vec![c_y; field.nx],
            m: vec![0.0; field.nx],
            sides,
            reaction_enabled: true,
        }
    }

    pub fn set_c_y(&mut self, c_y: f64) {
        self.b.fill(c_y);
    }

    fn interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
    }

    /// Neighbour indices with Neumann reflection at the edges.
    #[inline]
    fn nbr(k: usize, n: usize) -> (usize, usize) {
        let lo = if k == 0 { 1 } else { k - 1 };
        let hi = if k + 1 == n { n - 2 } else { k + 1 };
        (lo, hi)
    }

    /// `out = L u`; with Dirichlet boundaries the boundary entries are zero.
    pub fn apply_linear(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        let ihx2 = 1.0 / (self.hx * self.hx);
        let ihy2 = 1.0 / (self.hy * self.hy);
        let ihx = 0.5 / self.hx;
        let ihy = 0.5 / self.hy;
        let ihxy = 0.25 / (self.hx * self.hy);
        let neumann = self.boundary == Boundary::Neumann;
        for j in 0..ny {
            let (jm, jp) = Self::nbr(j, ny);
            for i in 0..nx {
                let k = j * nx + i;
                if !neumann && !self.interior(i, j) {
                    out[k] = 0.0;
                    continue;
                }
                let (im, ip) = Self::nbr(i, nx);
                let c = u[k];
                let (w, e) = (u[j * nx + im], u[j * nx + ip]);
                let (s, n) = (u[jm * nx + i], u[jp * nx + i]);
                let mut v = (e - 2.0 * c + w) * ihx2
                    + self.c_x * (e - w) * ihx
                    + self.a[i] * (n - 2.0 * c + s) * ihy2
                    + self.b[i] * (n - s) * ihy;
                let mi = self.m[i];
                if mi != 0.0 {
                    v += mi * (u[jp * nx + ip] - u[jm * nx + ip] - u[jp * nx + im] + u[jm * nx + im]) * ihxy;
                }
                out[k] = v;
            }
        }
    }

    /// Control-volume reaction at every node (zero when disabled or on Dirichlet edges).
    pub fn apply_reaction(&self, u: &[f64], p: &ModelParams, out: &mut [f64]) {
        let neumann = self.boundary == Boundary::Neumann;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k = j * self.nx + i;
                out[k] = if self.reaction_enabled && (neumann || self.interior(i, j)) {
                    node_reaction(self.sides[i], u[k], p)
                } else {
                    0.0
                };
            }
        }
    }

    /// Steady residual `L u + f(u)`.
    pub fn residual(&self, u: &[f64], p: &ModelParams, out: &mut [f64]) {
        self.apply_linear(u, out);
        let neumann = self.boundary == Boundary::Neumann;
        if !self.reaction_enabled {
            return;
        }
        for j in 0..self.ny {
            for i in 0..self.nx {
                if neumann || self.interior(i, j) {
                    let k = j * self.nx + i;
                    out[k] += node_reaction(self.sides[i], u[k], p);
                }
            }
        }
    }

    /// Interior-aware sup norm (Dirichlet edges ignored).
    pub fn sup_norm(&self, v: &[f64]) -> f64 {
        v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Precomputed Thomas factors for `(I - dt A_x - dt D)(I - dt A_y)`.
///
/// `A_x`, `A_y` are the one-directional parts of the operator; the optional
/// diagonal `D` is a frozen reaction derivative folded into the `x` sweep.
#[derive(Debug, Clone)]
pub struct FactoredSolver {
    nx: usize,
    ny: usize,
    dt: f64,
    x_low: Vec<f64>,
    x_cp: Vec<f64>,
    x_ib: Vec<f64>,
    y_low: Vec<f64>,
    y_cp: Vec<f64>,
    y_ib: Vec<f64>,
}

impl FactoredSolver {
    pub fn new(op: &Operator2D, dt: f64, reaction_diag: Option<&[f64]>) -> Result<Self> {
        let (nx, ny) = (op.nx, op.ny);
        let mut s = FactoredSolver {
            nx,
            ny,
            dt,
            x_low: vec![0.0; nx * ny],
            x_cp: vec![0.0; nx * ny],
            x_ib: vec![0.0; nx * ny],
            y_low: vec![0.0; nx * ny],
            y_cp: vec![0.0; nx * ny],
            y_ib: vec![0.0; nx * ny],
        };
        s.refactor_x(op, reaction_diag)?;
        s.refactor_y(op)?;
        Ok(s)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Recomputes the `x` factors, e.g. after the reaction diagonal changed.
    pub fn refactor_x(&mut self, op: &Operator2D, reaction_diag: Option<&[f64]>) -> Result<()> {
        let (nx, ny, dt) = (self.nx, self.ny, self.dt);
        let ih2 = 1.0 / (op.hx * op.hx);
        let ih = 0.5 / op.hx;
        let (lo0, up0) = (ih2 - op.c_x * ih, ih2 + op.c_x * ih);
        let neumann = op.boundary == Boundary::Neumann;
        for j in 0..ny {
            let edge_row = !neumann && (j == 0 || j + 1 == ny);
            let mut prev_cp = 0.0;
            for i in 0..nx {
                let k = j * nx + i;
                let fixed = edge_row || (!neumann && (i == 0 || i + 1 == nx));
                let (mut l, mut d, mut u) = if fixed {
                    (0.0, 1.0, 0.0)
                } else {
                    let (mut la, mut ua) = (lo0, up0);
                    if i == 0 {
                        la = 0.0;
                        ua = 2.0 * ih2;
                    } else if i + 1 == nx {
                        la = 2.0 * ih2;
                        ua = 0.0;
                    }
                    (-dt * la, 1.0 + 2.0 * dt * ih2, -dt * ua)
                };
                if let Some(dg) = reaction_diag {
                    if !fixed {
                        d -= dt * dg[k];
                    }
                }
                if i == 0 {
                    l = 0.0;
                }
                if i + 1 == nx {
                    u = 0.0;
                }
                let beta = d - l * prev_cp;
                if beta.abs() < 1e-300 || !beta.is_finite() {
                    return Err(Error::LinearSolveFailure(format!("x-line pivot vanished at ({i}, {j})")));
                }
                self.x_low[k] = l;
                self.x_ib[k] = 1.0 / beta;
                prev_cp = u / beta;
                self.x_cp[k] = prev_cp;
            }
        }
        Ok(())
    }

    pub fn refactor_y(&mut self, op: &Operator2D) -> Result<()> {
        let (nx, ny, dt) = (self.nx, self.ny, self.dt);
        let ih2 = 1.0 / (op.hy * op.hy);
        let ih = 0.5 / op.hy;
        let neumann = op.boundary == Boundary::Neumann;
        let mut prev_cp = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let (a, b) = (op.a[i], op.b[i]);
                let (mut l, d, mut u) = if !neumann && (j == 0 || j + 1 == ny || i == 0 || i + 1 == nx) {
                    (0.0, 1.0, 0.0)
                } else {
                    let (mut la, mut ua) = (a * ih2 - b * ih, a * ih2 + b * ih);
                    if j == 0 {
                        la = 0.0;
                        ua = 2.0 * a * ih2;
                    } else if j + 1 == ny {
                        la = 2.0 * a * ih2;
                        ua = 0.0;
                    }
                    (-dt * la, 1.0 + 2.0 * dt * a * ih2, -dt * ua)
                };
                if j == 0 {
                    l = 0.0;
                }
                if j + 1 == ny {
                    u = 0.0;
                }
                let beta = d - l * prev_cp[i];
                if beta.abs() < 1e-300 || !beta.is_finite() {
                    return Err(Error::LinearSolveFailure(format!("y-line pivot vanished at ({i}, {j})")));
                }
                self.y_low[k] = l;
                self.y_ib[k] = 1.0 / beta;
                prev_cp[i] = u / beta;
                self.y_cp[k] = prev_cp[i];
            }
        }
        Ok(())
    }

    /// Solves the factored system in place.
    pub fn solve_in_place(&self, r: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        // x sweeps, one row at a time
        for j in 0..ny {
            let row = j * nx;
            r[row] *= self.x_ib[row];
            for i in 1..nx {
                let k = row + i;
                r[k] = (r[k] - self.x_low[k] * r[k - 1]) * self.x_ib[k];
            }
            for i in (0..nx - 1).rev() {
                let k = row + i;
                r[k] -= self.x_cp[k] * r[k + 1];
            }
        }
        // y sweeps, all columns together
        for i in 0..nx {
            r[i] *= self.y_ib[i];
        }
        for j in 1..ny {
            let (prev, cur) = r.split_at_mut(j * nx);
            let prev = &prev[(j - 1) * nx..];
            let row = j * nx;
            for i in 0..nx {
                cur[i] = (cur[i] - self.y_low[row + i] * prev[i]) * self.y_ib[row + i];
            }
        }
        for j in (0..ny - 1).rev() {
            let (cur, next) = r.split_at_mut((j + 1) * nx);
            let cur = &mut cur[j * nx..];
            let row = j * nx;
            for i in 0..nx {
                cur[i] -= self.y_cp[row + i] * next[i];
            }
        }
    }
}

/// Time discretisation used by [`run_to_steady`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Backward Euler in the linear part, explicit reaction, solved to tolerance
    /// by BiCGSTAB preconditioned with the factored operator.
    BackwardEuler,
    /// Delta-form approximate factorisation; exact steady states, cheaper steps.
    Factored,
    /// As `Factored` with the reaction derivative frozen into the `x` factor.
    FactoredLinearized,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward-euler" | "be" => Ok(Scheme::BackwardEuler),
            "factored" | "adi" => Ok(Scheme::Factored),
            "factored-linearized" | "adi-linearized" => Ok(Scheme::FactoredLinearized),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::BackwardEuler => "backward-euler",
            Scheme::Factored => "factored",
            Scheme::FactoredLinearized => "factored-linearized",
        })
    }
}

pub const KRYLOV_TOL: f64 = 1e-12;
pub const KRYLOV_MAX_ITER: usize = 200;

fn check_clamp(u: &[f64]) -> Result<()> {
    for &v in u {
        if !v.is_finite() || v.abs() > CLAMP {
            return Err(Error::NonFinite(format!("|u| reached {v:e} (limit {CLAMP})")));
        }
    }
    Ok(())
}

/// Advances `u` by one step of `scheme`; returns Krylov statistics for the exact solve.
pub fn step_in_place(
    op: &Operator2D,
    solver: &mut FactoredSolver,
    scheme: Scheme,
    u: &mut [f64],
    p: &ModelParams,
    work: &mut Vec<f64>,
) -> Result<Option<KrylovStats>> {
    let n = u.len();
    let dt = solver.dt();
    work.resize(n, 0.0);
    match scheme {
        Scheme::Factored | Scheme::FactoredLinearized => {
            if scheme == Scheme::FactoredLinearized && op.reaction_enabled {
                let dg: Vec<f64> = (0..n)
                    .map(|k| node_reaction_du(op.sides[k % op.nx], u[k], p).min(0.0))
                    .collect();
                solver.refactor_x(op, Some(&dg))?;
            }
            op.residual(u, p, work);
            work.iter_mut().for_each(|v| *v *= dt);
            solver.solve_in_place(work);
            u.iter_mut().zip(work.iter()).for_each(|(a, d)| *a += d);
            check_clamp(u)?;
            Ok(None)
        }
        Scheme::BackwardEuler => {
            let neumann = op.boundary == Boundary::Neumann;
            let mut rhs = vec![0.0; n];
            op.apply_reaction(u, p, &mut rhs);
            rhs.iter_mut().zip(u.iter()).for_each(|(r, a)| *r = a + dt * *r);
            // initial guess: one factored step
            op.residual(u, p, work);
            work.iter_mut().for_each(|v| *v *= dt);
            solver.solve_in_place(work);
            let mut x: Vec<f64> = u.iter().zip(work.iter()).map(|(a, d)| a + d).collect();
            if !neumann {
                for (k, v) in x.iter_mut().enumerate() {
                    if !op.interior(k % op.nx, k / op.nx) {
                        *v = u[k];
                    }
                }
            }
            let mut lin = vec![0.0; n];
            let stats = bicgstab(
                |v, out| {
                    op.apply_linear(v, &mut lin);
                    for k in 0..n {
                        out[k] = v[k] - dt * lin[k];
                    }
                },
                |r, z| {
                    z.copy_from_slice(r);
                    solver.solve_in_place(z);
                    Ok(())
                },
                &rhs,
                &mut x,
                KRYLOV_TOL,
                KRYLOV_MAX_ITER,
            )?;
            u.copy_from_slice(&x);
            check_clamp(u)?;
            Ok(Some(stats))
        }
    }
}

/// One backward-Euler step in the linear part with explicit reaction.
pub fn step_semi_implicit(u: &Field2D, p: &ModelParams, dt: f64) -> Result<Field2D> {
    step_with(u, p, dt, true)
}

/// As [`step_semi_implicit`]; `reaction = false` gives pure advection-diffusion.
pub fn step_with(u: &Field2D, p: &ModelParams, dt: f64, reaction: bool) -> Result<Field2D> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite("input field".into()));
    }
    let mut op = Operator2D::comoving(u, p.c_x, p.c_y, Boundary::Neumann);
    op.reaction_enabled = reaction;
    let mut solver = FactoredSolver::new(&op, dt, None)?;
    let mut out = u.clone();
    let mut work = Vec::new();
    step_in_place(&op, &mut solver, Scheme::BackwardEuler, &mut out.data, p, &mut work)?;
    Ok(out)
}

/// Feedback on `c_y` that holds the contact point at `y = 0`.
///
/// The contact height obeys `dy/dt ≈ V - c_y` for an unknown drift `V`; the PI law
/// `c_y = k_p y + ∫ k_i y dt` makes the loop critically damped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPin {
    pub k_p: f64,
    pub k_i: f64,
    pub integral: f64,
}

impl Default for ContactPin {
    fn default() -> Self {
        ContactPin {
            k_p: 0.4,
            k_i: 0.04,
            integral: 0.0,
        }
    }
}

impl ContactPin {
    /// Starts the integral term at a known frame speed.
    pub fn starting_at(c_y: f64) -> Self {
        ContactPin {
            integral: c_y,
            ..ContactPin::default()
        }
    }

    pub fn update(&mut self, y_contact: f64, dt: f64) -> f64 {
        self.integral += self.k_i * y_contact * dt;
        self.integral + self.k_p * y_contact
    }
}

#[derive(Debug, Clone)]
pub struct SteadyOptions {
    pub scheme: Scheme,
    /// Replace the iterate by its odd-in-`y` part after every step.
    pub project_odd: bool,
    /// Adjust `c_y` so that the contact point stays at `y = 0`.
    pub pin: Option<ContactPin>,
    /// Record the contact height every this many steps.
    pub track_every: Option<usize>,
    /// Stop also requires the steady residual below `residual_factor * tol`.
    pub residual_factor: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            scheme: Scheme::Factored,
            project_odd: false,
            pin: None,
            track_every: None,
            residual_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyResult {
    pub field: Field2D,
    pub steps: usize,
    /// `‖u_{n+1} - u_n‖_∞ / dt` at the last step.
    pub final_update_rate: f64,
    /// `‖L u + f(u)‖_∞` of the returned field.
    pub final_residual: f64,
    pub converged: bool,
    /// Frame speed at the end of the run (changes only when pinned).
    pub c_y: f64,
    pub track: Option<ContactTrack>,
}

/// Time-steps to `‖u_{n+1} - u_n‖_∞ / dt < tol` with default options.
pub fn run_to_steady(u0: &Field2D, p: &ModelParams, dt: f64, tol: f64, max_steps: usize) -> Result<SteadyResult> {
    run_to_steady_with(u0, p, dt, tol, max_steps, &SteadyOptions::default())
}

pub fn run_to_steady_with(
    u0: &Field2D,
    p: &ModelParams,
    dt: f64,
    tol: f64,
    max_steps: usize,
    opts: &SteadyOptions,
) -> Result<SteadyResult> {
    if !(dt > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and tol > 0 (dt = {dt}, tol = {tol})")));
    }
    if opts.project_odd && !u0.y_symmetric() {
        return Err(Error::InvalidParameter("odd projection needs a y-symmetric grid".into()));
    }
    if !u0.is_finite() {
        return Err(Error::NonFinite("initial field".into()));
    }
    p.validate()?;
    let mut params = *p;
    let mut op = Operator2D::comoving(u0, p.c_x, p.c_y, Boundary::Neumann);
    let mut solver = FactoredSolver::new(&op, dt, None)?;
    let mut u = u0.clone();
    if opts.project_odd {
        u.project_odd_y();
    }
    let mut prev = u.data.clone();
    let mut work = Vec::new();
    let mut res = vec![0.0; u.data.len()];
    let mut pin = opts.pin;
    let mut track = opts.track_every.map(|_| ContactTrack::new());
    let mut rate = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut steps = 0;
    let mut converged = false;

    while steps < max_steps {
        step_in_place(&op, &mut solver, opts.scheme, &mut u.data, &params, &mut work)?;
        if opts.project_odd {
            u.project_odd_y();
        }
        steps += 1;
        rate = u
            .data
            .iter()
            .zip(&prev)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            / dt;
        prev.copy_from_slice(&u.data);

        let needs_height = pin.is_some() || track.is_some();
        let height = if needs_height { contact_height(&u).ok() } else { None };
        if let (Some(t), Some(every), Some(y)) = (track.as_mut(), opts.track_every, height) {
            if steps % every.max(1) == 0 {
                t.push(steps as f64 * dt, y)?;
            }
        }
        if let (Some(ctrl), Some(y)) = (pin.as_mut(), height) {
            let c_y = ctrl.update(y, dt);
            if c_y != params.c_y {
                params.c_y = c_y;
                op.set_c_y(c_y);
                solver.refactor_y(&op)?;
            }
        }

        if rate < tol {
            op.residual(&u.data, &params, &mut res);
            residual = op.sup_norm(&res);
            if residual <= opts.residual_factor * tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        op.residual(&u.data, &params, &mut res);
        residual = op.sup_norm(&res);
    }
    Ok(SteadyResult {
        field: u,
        steps,
        final_update_rate: rate,
        final_residual: residual,
        converged,
        c_y: params.c_y,
        track,
    })
}

/// Initial data `sign(y)` in the bistable half and `0` in the monostable half.
pub fn step_initial(field: &Field2D) -> Field2D {
    field.clone().from_fn(|x, y| {
        if x < 0.0 {
            if y > 0.0 {
                1.0
            } else if y < 0.0 {
                -1.0
            } else {
                0.0
            }
        } else {
            0.0
        }
    })
}

/// Grid description for the symmetric solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSpec {
    pub half_x: f64,
    pub half_y: f64,
    pub h: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_steps: usize,
    pub scheme: Scheme,
}

impl Default for ThetaSpec {
    fn default() -> Self {
        ThetaSpec {
            half_x: 60.0,
            half_y: 60.0,
            h: 0.25,
            dt: 0.5,
            tol: 1e-9,
            max_steps: 20_000,
            scheme: Scheme::Factored,
        }
    }
}

/// The odd, `y`-monotone solution at `α = 0`, `c_y = 0`.
pub fn solve_theta(c_x: f64, spec: &ThetaSpec) -> Result<Field2D> {
    solve_theta_full(c_x, spec).map(|r| r.field)
}

/// [`solve_theta`] returning the run statistics.
pub fn solve_theta_full(c_x: f64, spec: &ThetaSpec) -> Result<SteadyResult> {
    let grid = Field2D::centered(spec.half_x, spec.half_y, spec.h)?;
    let u0 = step_initial(&grid);
    let p = ModelParams {
        c_x,
        ..ModelParams::default()
    };
    let opts = SteadyOptions {
        scheme: spec.scheme,
        project_odd: true,
        ..SteadyOptions::default()
    };
    let r = run_to_steady_with(&u0, &p, spec.dt, spec.tol, spec.max_steps, &opts)?;
    if !r.converged {
        return Err(Error::NotConverged {
            steps: r.steps,
            rate: r.final_update_rate,
        });
    }
    Ok(r)
}

/// Minimum of the centred `∂_y` over the interior rows.
pub fn min_dy(u: &Field2D) -> f64 {
    let mut m = f64::INFINITY;
    for j in 1..u.ny - 1 {
        for i in 0..u.nx {
            m = m.min((u.get(i, j + 1) - u.get(i, j - 1)) / (2.0 * u.hy));
        }
    }
    m
}

/// Minimum one-sided difference `u(i, j+1) - u(i, j)` over the grid.
pub fn min_forward_dy(u: &Field2D) -> f64 {
    let mut m = f64::INFINITY;
    for j in 0..u.ny - 1 {
        for i in 0..u.nx {
            m = m.min((u.get(i, j + 1) - u.get(i, j)) / u.hy);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_fixed_point() {
        let u = Field2D::centered(5.0, 5.0, 0.25).unwrap();
        let p = ModelParams::default();
        let v = step_semi_implicit(&u, &p, 0.5).unwrap();
        assert_eq!(v.sup_norm(), 0.0);
    }

    #[test]
    fn y_independent_data_stays_y_independent() {
        let u = Field2D::centered(8.0, 4.0, 0.25).unwrap().from_fn(|x, _| 0.5 * (x * 0.3).sin());
        let p = ModelParams::default();
        let v = step_semi_implicit(&u, &p, 0.5).unwrap();
        for i in 0..v.nx {
            let c = v.column(i);
            let spread = c.iter().fold(0.0_f64, |m, a| m.max((a - c[0]).abs()));
            assert!(spread < 1e-12, "column {i}: spread {spread:e}");
        }
    }

    #[test]
    fn factored_solver_inverts_its_product() {
        let u = Field2D::centered(3.0, 2.0, 0.25).unwrap();
        let mut op = Operator2D::comoving(&u, 0.5, -0.3, Boundary::Neumann);
        op.a.iter_mut().enumerate().for_each(|(i, a)| *a = 1.0 + 0.01 * i as f64);
        let dt = 0.7;
        let s = FactoredSolver::new(&op, dt, None).unwrap();
        let v: Vec<f64> = (0..u.data.len()).map(|k| (0.37 * k as f64).sin()).collect();
        // apply (I - dt A_x)(I - dt A_y) through a zero-reaction operator split
        let mut opy = op.clone();
        opy.c_x = 0.0;
        opy.hx = f64::INFINITY;
        let mut opx = op.clone();
        opx.a.fill(0.0);
        opx.b.fill(0.0);
        let mut t = vec![0.0; v.len()];
        let mut w = vec![0.0; v.len()];
        opy.apply_linear(&v, &mut t);
        let y: Vec<f64> = v.iter().zip(&t).map(|(a, b)| a - dt * b).collect();
        opx.apply_linear(&y, &mut w);
        let mut r: Vec<f64> = y.iter().zip(&w).map(|(a, b)| a - dt * b).collect();
        s.solve_in_place(&mut r);
        for (a, b) in r.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
