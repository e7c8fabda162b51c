//! Melnikov integrals and the predicted angle derivative `dφ/dα = -M_α / M_ψ`.
//!
//! `M_ψ = -c_x ∬ Θ_y² e^{c_x x}` is the projection of the angle derivative on the
//! cokernel direction `e^{c_x x} Θ_y`. The `α` derivative projects two terms:
//! the change of the normal speed, which enters through `c_y` and contributes
//! `c_n'(0) ∬ Θ_y² e^{c_x x} = -(c_n'(0) / c_x) M_ψ`, and the perturbation itself,
//! `∬ e^{c_x x} g Θ_y = -∫ e^{c_x x} [G(x, u_t) - G(x, u_b)] dx`.
//!
//! The printed closed form `-c_n'(0) M_ψ` for the first term lacks the `1/c_x`; it
//! is kept as [`MelnikovReport::m_alpha_verbatim`] for comparison.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::model::{node_potential, ModelParams, Side};
use crate::profiles1d::{cn_prime_quadrature, solve_quench_front, FrontSide, Profile1D};
use crate::quadrature::{trapezoid, trapezoid_with_error};

/// Threshold on `|M_ψ|` below which the ratio is refused.
pub const MPSI_MIN: f64 = 1e-10;
/// Largest tolerated share of an integral carried by the truncation edge.
pub const EDGE_SHARE_MAX: f64 = 1e-6;

/// Quadrature value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: f64,
    pub error: f64,
}

/// Components of `M_α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MAlpha {
    /// `-(c_n'(0)/c_x) M_ψ - ∫ e^{c_x x}[G(u_t) - G(u_b)]`.
    pub value: f64,
    /// `-c_n'(0) M_ψ - ∫ e^{c_x x}[G(u_t) - G(u_b)]`.
    pub verbatim: f64,
    /// `-∫ e^{c_x x}[G(u_t) - G(u_b)] dx`.
    pub contact: f64,
    pub contact_error: f64,
    /// `-(c_n'(0)/c_x) M_ψ`.
    pub geometric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovReport {
    pub c_x: f64,
    pub m_psi: f64,
    pub m_psi_error: f64,
    pub m_alpha: f64,
    pub m_alpha_error: f64,
    pub m_alpha_verbatim: f64,
    pub contact_term: f64,
    pub geometric_term: f64,
    pub cn_prime: f64,
    /// `-m_alpha / m_psi`.
    pub dphi_dalpha: f64,
    /// `-m_alpha_verbatim / m_psi`.
    pub dphi_dalpha_verbatim: f64,
}

/// Row-wise trapezoid integral of a field-shaped array over the rectangle.
fn trapezoid_2d(u: &Field2D, vals: &[f64], stride: usize) -> f64 {
    let rows: Vec<f64> = (0..u.ny)
        .step_by(stride)
        .map(|j| {
            let row: Vec<f64> = vals[j * u.nx..(j + 1) * u.nx].iter().step_by(stride).copied().collect();
            trapezoid(&row, u.hx * stride as f64)
        })
        .collect();
    trapezoid(&rows, u.hy * stride as f64)
}

/// `M_ψ = -c_x ∬ Θ_y² e^{c_x x} dx dy` with centred `Θ_y`.
///
/// The error combines a two-grid Richardson estimate with the change from
/// dropping the outer half of the rectangle.
pub fn m_psi(theta: &Field2D, c_x: f64) -> Result<QuadValue> {
    let dy = theta.d_dy();
    let mut w = vec![0.0; theta.data.len()];
    for j in 0..theta.ny {
        for i in 0..theta.nx {
            let k = theta.idx(i, j);
            w[k] = dy.data[k] * dy.data[k] * (c_x * theta.x(i)).exp();
        }
    }
    let full = trapezoid_2d(theta, &w, 1);
    if !full.is_finite() {
        return Err(Error::NonFinite("M_psi integrand".into()));
    }
    let edge: f64 = (0..theta.ny).map(|j| w[theta.idx(theta.nx - 1, j)]).sum::<f64>() * theta.hy;
    if full > 0.0 && edge > EDGE_SHARE_MAX * full {
        return Err(Error::NonFinite(format!(
            "weighted integrand has not decayed at the right edge (share {:.2e})",
            edge / full
        )));
    }
    let richardson = if theta.nx % 2 == 1 && theta.ny % 2 == 1 && theta.nx >= 5 && theta.ny >= 5 {
        (full - trapezoid_2d(theta, &w, 2)).abs() / 3.0
    } else {
        0.0
    };
    let (i0, i1) = (theta.nx / 4, theta.nx - 1 - theta.nx / 4);
    let (j0, j1) = (theta.ny / 4, theta.ny - 1 - theta.ny / 4);
    let half: f64 = {
        let rows: Vec<f64> = (j0..=j1)
            .map(|j| trapezoid(&w[theta.idx(i0, j)..=theta.idx(i1, j)], theta.hx))
            .collect();
        trapezoid(&rows, theta.hy)
    };
    let truncation = (full - half).abs();
    Ok(QuadValue {
        value: -c_x * full,
        error: c_x * (richardson + truncation),
    })
}

/// `M_α` from the `α = 0` quenched fronts, a computed `M_ψ` and `c_n'(0)`.
pub fn m_alpha(
    u_top: &Profile1D,
    u_bottom: &Profile1D,
    p: &ModelParams,
    m_psi_value: f64,
    cn_prime_value: f64,
) -> Result<MAlpha> {
    if u_top.grid != u_bottom.grid {
        return Err(Error::ShapeMismatch("top and bottom profiles on different grids".into()));
    }
    let g = u_top.grid;
    let h = g.h();
    let vals: Vec<f64> = (0..g.n)
        .map(|i| {
            let x = g.x(i);
            let side = Side::of(x, h);
            (p.c_x * x).exp() * (node_potential(side, u_top.values[i], p) - node_potential(side, u_bottom.values[i], p))
        })
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("M_alpha integrand".into()));
    }
    let (integral, err) = trapezoid_with_error(&vals, h);
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let edge = vals[0].abs().max(vals[g.n - 1].abs());
    if scale > 0.0 && edge > EDGE_SHARE_MAX * scale {
        return Err(Error::NonFinite(format!(
            "contact-line integrand has not decayed at the profile edge (share {:.2e})",
            edge / scale
        )));
    }
    let geometric = if cn_prime_value == 0.0 {
        0.0
    } else if p.c_x > 0.0 {
        -(cn_prime_value / p.c_x) * m_psi_value
    } else {
        return Err(Error::DegenerateMpsi(m_psi_value));
    };
    let contact = -integral;
    Ok(MAlpha {
        value: geometric + contact,
        verbatim: -cn_prime_value * m_psi_value + contact,
        contact,
        contact_error: if err.is_nan() { 0.0 } else { err },
        geometric,
    })
}

/// Assembles the report with `dφ/dα = -M_α / M_ψ`.
pub fn dphi_dalpha(m_psi: QuadValue, m_alpha: MAlpha, cn_prime: f64, c_x: f64) -> Result<MelnikovReport> {
    if !(m_psi.value.abs() >= MPSI_MIN) {
        return Err(Error::DegenerateMpsi(m_psi.value));
    }
    let geometric_error = if cn_prime != 0.0 && c_x > 0.0 {
        (cn_prime / c_x).abs() * m_psi.error
    } else {
        0.0
    };
    Ok(MelnikovReport {
        c_x,
        m_psi: m_psi.value,
        m_psi_error: m_psi.error,
        m_alpha: m_alpha.value,
        m_alpha_error: m_alpha.contact_error + geometric_error,
        m_alpha_verbatim: m_alpha.verbatim,
        contact_term: m_alpha.contact,
        geometric_term: m_alpha.geometric,
        cn_prime,
        dphi_dalpha: -m_alpha.value / m_psi.value,
        dphi_dalpha_verbatim: -m_alpha.verbatim / m_psi.value,
    })
}

impl MelnikovReport {
    pub fn to_key_values(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("c_x", self.c_x),
            ("m_psi", self.m_psi),
            ("m_psi_error", self.m_psi_error),
            ("m_alpha", self.m_alpha),
            ("m_alpha_error", self.m_alpha_error),
            ("m_alpha_verbatim", self.m_alpha_verbatim),
            ("contact_term", self.contact_term),
            ("geometric_term", self.geometric_term),
            ("cn_prime", self.cn_prime),
            ("dphi_dalpha", self.dphi_dalpha),
            ("dphi_dalpha_verbatim", self.dphi_dalpha_verbatim),
        ]
    }

    /// `key = value` lines.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        for (k, v) in self.to_key_values() {
            s.push_str(&format!("{k} = {v:?}\n"));
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// Full prediction from `Θ`: `α = 0` fronts on `Θ`'s `x`-grid, `M_ψ`, `M_α` and
/// `c_n'(0)` by quadrature.
pub fn predict(theta: &Field2D, p: &ModelParams) -> Result<MelnikovReport> {
    let base = p.unperturbed();
    let top = solve_quench_front(FrontSide::Top, &base, theta.x_grid())?;
    let bottom = solve_quench_front(FrontSide::Bottom, &base, theta.x_grid())?;
    let mp = m_psi(theta, p.c_x)?;
    let cn = cn_prime_quadrature(&p.g_left);
    let ma = m_alpha(&top, &bottom, p, mp.value, cn)?;
    dphi_dalpha(mp, ma, cn, p.c_x)
}
