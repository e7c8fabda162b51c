//! Nodal-line extraction, contact-angle fits and contact-point drift.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field2D;

/// Fitted asymptote of the nodal line in the left farfield.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleMeasurement {
    /// Deviation from a perpendicular contact, `ψ = arctan(-slope)`.
    pub psi: f64,
    /// Contact angle `φ = π/2 + ψ`.
    pub phi: f64,
    pub slope: f64,
    pub intercept: f64,
    pub fit_window: (f64, f64),
    pub rms_fit_error: f64,
    /// Standard error of `ψ` from the fit residuals.
    pub psi_std_error: f64,
    pub n_points: usize,
}

/// Height of the nodal line on the quenching line, sampled over time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactTrack {
    pub times: Vec<f64>,
    pub y_contact: Vec<f64>,
}

impl ContactTrack {
    pub fn new() -> Self {
        ContactTrack::default()
    }

    pub fn push(&mut self, t: f64, y: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidParameter(format!(
                    "track times must increase ({t} after {last})"
                )));
            }
        }
        self.times.push(t);
        self.y_contact.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples with `t >= t_min`.
    pub fn since(&self, t_min: f64) -> ContactTrack {
        let k = self.times.partition_point(|&t| t < t_min);
        ContactTrack {
            times: self.times[k..].to_vec(),
            y_contact: self.y_contact[k..].to_vec(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut s = String::from("t,y_contact\n");
        for (t, y) in self.times.iter().zip(&self.y_contact) {
            s.push_str(&format!("{t:?},{y:?}\n"));
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// Per-column outcome of the nodal-line search.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodalSet {
    /// `(x, y0)` for every column with exactly one crossing.
    pub points: Vec<(f64, f64)>,
    /// Columns without a sign change.
    pub no_crossing: Vec<f64>,
    /// Columns with more than one crossing, with the count.
    pub multiple: Vec<(f64, usize)>,
}

impl NodalSet {
    pub fn in_window(&self, x_lo: f64, x_hi: f64) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .copied()
            .filter(|&(x, _)| x >= x_lo && x <= x_hi)
            .collect()
    }
}

/// `y` coordinate of row `j`, computed so that a symmetric grid is exactly
/// antisymmetric under `j -> ny - 1 - j`.
fn node_y(u: &Field2D, j: usize) -> f64 {
    if u.y_symmetric() {
        (j as f64 - 0.5 * (u.ny - 1) as f64) * u.hy
    } else {
        u.y(j)
    }
}

/// All crossings of zero in column `i`, by linear interpolation.
pub fn column_crossings(u: &Field2D, i: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 0..u.ny {
        let a = u.get(i, j);
        if a == 0.0 {
            out.push(node_y(u, j));
            continue;
        }
        if j + 1 < u.ny {
            let b = u.get(i, j + 1);
            if a * b < 0.0 {
                let (ya, yb) = (node_y(u, j), node_y(u, j + 1));
                out.push((ya * b - yb * a) / (b - a));
            }
        }
    }
    out
}

/// The unique nodal height in column `i`.
pub fn column_crossing(u: &Field2D, i: usize) -> Result<f64> {
    let c = column_crossings(u, i);
    match c.len() {
        1 => Ok(c[0]),
        0 => Err(Error::NoCrossing { x: u.x(i) }),
        count => Err(Error::MultipleCrossings { x: u.x(i), count }),
    }
}

/// Nodal line `{u = 0}` column by column.
pub fn zero_level_set(u: &Field2D) -> NodalSet {
    let mut set = NodalSet::default();
    for i in 0..u.nx {
        let x = u.x(i);
        let c = column_crossings(u, i);
        match c.len() {
            1 => set.points.push((x, c[0])),
            0 => set.no_crossing.push(x),
            n => set.multiple.push((x, n)),
        }
    }
    set
}

/// Nodal height on the quenching line `x = 0`.
pub fn contact_height(u: &Field2D) -> Result<f64> {
    let i = u
        .zero_column()
        .ok_or_else(|| Error::InvalidParameter("field has no column at x = 0".into()))?;
    column_crossing(u, i)
}

pub const MIN_FIT_POINTS: usize = 20;
/// Fit windows must lie left of this abscissa.
pub const FARFIELD_EDGE: f64 = -5.0;

/// Least-squares line `y0 = s x + b` through the nodal points inside `window`.
pub fn fit_contact_angle(points: &[(f64, f64)], window: (f64, f64)) -> Result<AngleMeasurement> {
    let (lo, hi) = window;
    if !(lo < hi) || hi > FARFIELD_EDGE {
        return Err(Error::InvalidWindow(format!(
            "window [{lo}, {hi}] must be ordered and lie in x <= {FARFIELD_EDGE}"
        )));
    }
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, _)| x >= lo && x <= hi)
        .collect();
    let n = pts.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            got: n,
        });
    }
    let (slope, intercept, rms, slope_se) = line_fit(&pts);
    let psi = (-slope).atan();
    Ok(AngleMeasurement {
        psi,
        phi: std::f64::consts::FRAC_PI_2 + psi,
        slope,
        intercept,
        fit_window: window,
        rms_fit_error: rms,
        psi_std_error: slope_se / (1.0 + slope * slope),
        n_points: n,
    })
}

/// Nodal line of `u` fitted over `window`; columns in the window must cross once.
pub fn measure_angle(u: &Field2D, window: (f64, f64)) -> Result<AngleMeasurement> {
    let mut pts = Vec::new();
    for i in 0..u.nx {
        let x = u.x(i);
        if x >= window.0 && x <= window.1 {
            pts.push((x, column_crossing(u, i)?));
        }
    }
    fit_contact_angle(&pts, window)
}

/// Least-squares drift speed of the contact point.
pub fn measure_drift(track: &ContactTrack) -> Result<f64> {
    if track.len() < 10 {
        return Err(Error::InsufficientPoints {
            needed: 10,
            got: track.len(),
        });
    }
    let span = track.times[track.len() - 1] - track.times[0];
    if span < 10.0 {
        return Err(Error::InvalidWindow(format!("track spans {span} < 10 time units")));
    }
    let pts: Vec<(f64, f64)> = track.times.iter().copied().zip(track.y_contact.iter().copied()).collect();
    Ok(line_fit(&pts).0)
}

/// Returns `(slope, intercept, rms residual, slope standard error)`.
fn line_fit(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let rms = (ss / n).sqrt();
    let se = if pts.len() > 2 {
        (ss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, rms, se)
}

/// Appends one measurement row to a results table, writing the header for a new file.
pub fn append_results_row(path: &Path, alpha: f64, c_x: f64, m: &AngleMeasurement, drift: f64) -> Result<()> {
    use std::io::Write;
    let new = !path.exists();
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    if new {
        writeln!(f, "alpha,c_x,psi,phi,rms,drift")?;
    }
    writeln!(f, "{alpha:?},{c_x:?},{:?},{:?},{:?},{drift:?}", m.psi, m.phi, m.rms_fit_error)?;
    Ok(())
}
