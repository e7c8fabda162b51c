//! Gauss-Legendre and trapezoid quadrature.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Roots of `P_n` are found by Newton iteration from the Chebyshev-like guesses
/// `cos(π (i + 3/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes each.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl CompositeGauss {
    pub fn new(order: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        CompositeGauss {
            nodes,
            weights,
            panels: panels.max(1),
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let w = (b - a) / self.panels as f64;
        let mut total = 0.0;
        for k in 0..self.panels {
            let lo = a + k as f64 * w;
            let mid = lo + 0.5 * w;
            let panel: f64 = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(t, wt)| wt * f(mid + 0.5 * w * t))
                .sum();
            total += 0.5 * w * panel;
        }
        total
    }
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Trapezoid value together with a Richardson estimate of its error.
///
/// The coarse sum uses every other sample; it needs an odd number of samples.
pub fn trapezoid_with_error(values: &[f64], h: f64) -> (f64, f64) {
    let fine = trapezoid(values, h);
    if values.len() < 5 || values.len() % 2 == 0 {
        return (fine, f64::NAN);
    }
    let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
    let coarse = trapezoid(&coarse, 2.0 * h);
    (fine, (fine - coarse).abs() / 3.0)
}
