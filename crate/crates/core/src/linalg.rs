//! Banded and Krylov linear solvers used by the profile and field solvers.

use crate::error::{Error, Result};

/// Tridiagonal system with rows `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
///
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    /// Solves in place with the Thomas algorithm (no pivoting).
    pub fn solve_in_place(&self, rhs: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
        thomas(&self.lower, &self.diag, &self.upper, rhs, scratch)
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        let mut scratch = Vec::new();
        self.solve_in_place(&mut x, &mut scratch)?;
        Ok(x)
    }
}

/// Thomas algorithm on raw bands; `rhs` is overwritten with the solution.
pub fn thomas(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Result<()> {
    let n = diag.len();
    if rhs.len() != n || lower.len() != n || upper.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "tridiagonal bands/rhs lengths differ ({n} vs {})",
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(());
    }
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::LinearSolveFailure("zero pivot in tridiagonal solve".into()));
    }
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::LinearSolveFailure(format!("zero pivot at row {i}")));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned BiCGSTAB for `A x = b`, starting from the contents of `x`.
///
/// `apply` computes `A v`, `precondition` approximately solves `M z = r`.
pub fn bicgstab(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precondition: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];

    let mut rel = norm(&r) / bnorm;
    if rel <= rel_tol {
        return Ok(KrylovStats {
            iterations: 0,
            relative_residual: rel,
        });
    }
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(Error::LinearSolveFailure("BiCGSTAB breakdown (rho = 0)".into()));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precondition(&p, &mut p_hat)?;
        apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            return Err(Error::LinearSolveFailure("BiCGSTAB breakdown (r.v = 0)".into()));
        }
        alpha = rho / rv;
        // r now holds s = r - alpha v
        for i in 0..n {
            r[i] -= alpha * v[i];
            x[i] += alpha * p_hat[i];
        }
        rel = norm(&r) / bnorm;
        if rel <= rel_tol {
            return Ok(KrylovStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        precondition(&r, &mut s_hat)?;
        apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &r) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += omega * s_hat[i];
            r[i] -= omega * t[i];
        }
        rel = norm(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::LinearSolveFailure("BiCGSTAB produced non-finite residual".into()));
        }
        if rel <= rel_tol {
            return Ok(KrylovStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        if omega == 0.0 {
            return Err(Error::LinearSolveFailure("BiCGSTAB breakdown (omega = 0)".into()));
        }
    }
    Err(Error::LinearSolveFailure(format!(
        "BiCGSTAB reached {max_iter} iterations (relative residual {rel:.3e})"
    )))
}
