//! Experiment pipelines behind the command line: each mode writes its grids,
//! tables and a manifest into the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{ExperimentConfig, Mode, SimulationSettings};
use crate::error::{Error, Result};
use crate::farfield::{default_eta, solve_bordered, BorderedSpec, PartitionSpec};
use crate::field::Field2D;
use crate::grid::Grid1D;
use crate::measure::{append_results_row, measure_angle, measure_drift, AngleMeasurement};
use crate::melnikov::{predict, MelnikovReport};
use crate::model::{stable_zeros, ModelParams};
use crate::profiles1d::{cn_prime_quadrature, solve_quench_front, solve_traveling_wave, FrontSide};
use crate::quench2d::{
    run_to_steady_with, solve_theta_full, step_initial, ContactPin, SteadyOptions, SteadyResult, ThetaSpec,
};
use crate::spectral::{max_real_eig_1d, LinearOperator1D};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Time units of contact track used for the drift estimate.
const DRIFT_SPAN: f64 = 50.0;

/// Pinned steady run from step-like data and the measured angle.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub steady: SteadyResult,
    pub angle: AngleMeasurement,
    /// Contact-point speed over the last time units, in the final frame.
    pub drift: f64,
}

pub fn theta_spec(s: &SimulationSettings) -> ThetaSpec {
    ThetaSpec {
        half_x: s.half_width,
        half_y: s.half_width,
        h: s.h,
        dt: s.dt,
        tol: s.theta_tol,
        max_steps: s.max_steps,
        scheme: s.scheme,
    }
}

/// Runs to steady state with the contact pinned at `y = 0` and fits the angle.
pub fn simulate_angle(p: &ModelParams, s: &SimulationSettings) -> Result<SimulationOutcome> {
    let grid = Field2D::centered(s.half_width, s.half_width, s.h)?;
    let opts = SteadyOptions {
        scheme: s.scheme,
        pin: Some(ContactPin::starting_at(p.c_y)),
        track_every: Some(1),
        ..SteadyOptions::default()
    };
    let r = run_to_steady_with(&step_initial(&grid), p, s.dt, s.tol, s.max_steps, &opts)?;
    if !r.converged {
        return Err(Error::NotConverged {
            steps: r.steps,
            rate: r.final_update_rate,
        });
    }
    let angle = measure_angle(&r.field, s.window)?;
    let track = r.track.clone().unwrap_or_default();
    let t_end = track.times.last().copied().unwrap_or(0.0);
    let drift = measure_drift(&track.since(t_end - DRIFT_SPAN))?;
    Ok(SimulationOutcome { steady: r, angle, drift })
}

/// Θ and the Melnikov prediction on the simulation grid.
pub fn melnikov_prediction(p: &ModelParams, s: &SimulationSettings) -> Result<(SteadyResult, MelnikovReport)> {
    let theta = solve_theta_full(p.c_x, &theta_spec(s))?;
    let report = predict(&theta.field, p)?;
    Ok((theta, report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub psi_measured: f64,
    pub psi_predicted: f64,
    pub drift: f64,
}

pub const SWEEP_HEADER: &str = "alpha,psi_measured,psi_predicted,drift";

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(s, "{:?},{:?},{:?},{:?}", r.alpha, r.psi_measured, r.psi_predicted, r.drift).unwrap();
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SWEEP_HEADER => {}
        other => {
            return Err(Error::Format(format!(
                "expected header {SWEEP_HEADER:?}, got {:?}",
                other.unwrap_or("")
            )))
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("row {}: {e}", n + 1)))?;
            if v.len() != 4 {
                return Err(Error::Format(format!("row {}: expected 4 columns, got {}", n + 1, v.len())));
            }
            Ok(SweepRow {
                alpha: v[0],
                psi_measured: v[1],
                psi_predicted: v[2],
                drift: v[3],
            })
        })
        .collect()
}

/// Pinned runs for every `α`, with the linear prediction `ψ ≈ (dφ/dα) α`.
///
/// `α` values are split across `threads` workers; each run is independent, so the
/// rows do not depend on the thread count.
pub fn sweep(p: &ModelParams, s: &SimulationSettings, alphas: &[f64], slope: f64, threads: usize) -> Result<Vec<SweepRow>> {
    let run = |a: f64| -> Result<SweepRow> {
        let out = simulate_angle(&p.with_alpha(a), s)?;
        Ok(SweepRow {
            alpha: a,
            psi_measured: out.angle.psi,
            psi_predicted: slope * a,
            drift: out.drift,
        })
    };
    let threads = threads.max(1).min(alphas.len().max(1));
    if threads == 1 {
        return alphas.iter().map(|&a| run(a)).collect();
    }
    let mut slots: Vec<Option<Result<SweepRow>>> = (0..alphas.len()).map(|_| None).collect();
    let chunk = alphas.len().div_ceil(threads);
    std::thread::scope(|sc| {
        for (a_chunk, out_chunk) in alphas.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            let run = &run;
            sc.spawn(move || {
                for (a, o) in a_chunk.iter().zip(out_chunk.iter_mut()) {
                    *o = Some(run(*a));
                }
            });
        }
    });
    slots.into_iter().map(|o| o.expect("every slot filled")).collect()
}

/// Measured against predicted `dψ/dα` at the smallest symmetric pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub alpha: f64,
    pub measured_slope: f64,
    pub predicted_slope: f64,
    pub absolute_deviation: f64,
    /// `|measured - predicted| / |predicted|`; infinite when the prediction is 0.
    pub relative_deviation: f64,
    pub signs_agree: bool,
    pub psi_at_zero: f64,
}

impl Comparison {
    pub fn to_text(&self) -> String {
        format!(
            "alpha = {:?}\nmeasured_slope = {:?}\npredicted_slope = {:?}\nabsolute_deviation = {:?}\nrelative_deviation = {:?}\nsigns_agree = {}\npsi_at_zero = {:?}\n",
            self.alpha,
            self.measured_slope,
            self.predicted_slope,
            self.absolute_deviation,
            self.relative_deviation,
            self.signs_agree,
            self.psi_at_zero
        )
    }
}

pub fn compare_prediction(rows: &[SweepRow]) -> Result<Comparison> {
    let zero = rows
        .iter()
        .find(|r| r.alpha == 0.0)
        .ok_or_else(|| Error::MissingBaseline("no row with alpha = 0".into()))?;
    let mut best: Option<(&SweepRow, &SweepRow)> = None;
    for r in rows.iter().filter(|r| r.alpha > 0.0) {
        if let Some(m) = rows.iter().find(|m| m.alpha == -r.alpha) {
            if best.is_none_or(|(b, _)| r.alpha < b.alpha) {
                best = Some((r, m));
            }
        }
    }
    let (plus, minus) = best.ok_or_else(|| Error::MissingBaseline("no symmetric pair +-alpha".into()))?;
    let a = plus.alpha;
    let measured = (plus.psi_measured - minus.psi_measured) / (2.0 * a);
    let predicted = (plus.psi_predicted - minus.psi_predicted) / (2.0 * a);
    let abs = (measured - predicted).abs();
    Ok(Comparison {
        alpha: a,
        measured_slope: measured,
        predicted_slope: predicted,
        absolute_deviation: abs,
        relative_deviation: if predicted == 0.0 { f64::INFINITY } else { abs / predicted.abs() },
        signs_agree: measured.signum() == predicted.signum(),
        psi_at_zero: zero.psi_measured,
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

struct Out {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Out {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(p, body)?;
        Ok(())
    }
}

fn kv(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Validates `cfg`, runs its mode and writes artifacts plus `manifest.txt`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let dir = cfg.resolved_output();
    std::fs::create_dir_all(&dir)?;
    let mut out = Out { dir, files: Vec::new() };
    let start = Instant::now();
    let p = cfg.model;
    match cfg.mode {
        Mode::Profile => {
            let g = Grid1D::symmetric(cfg.profile.half_width, cfg.profile.h)?;
            let top = solve_quench_front(FrontSide::Top, &p, g)?;
            let bottom = solve_quench_front(FrontSide::Bottom, &p, g)?;
            let wave = solve_traveling_wave(&p, g)?;
            let z = stable_zeros(p.alpha, &p)?;
            top.write_csv(&out.path("profile_top.csv"))?;
            bottom.write_csv(&out.path("profile_bottom.csv"))?;
            wave.profile.write_csv(&out.path("wave.csv"))?;
            let body = kv(&[
                ("alpha", format!("{:?}", p.alpha)),
                ("c_x", format!("{:?}", p.c_x)),
                ("z_minus", format!("{:?}", z.z_minus)),
                ("z_zero", format!("{:?}", z.z_zero)),
                ("z_plus", format!("{:?}", z.z_plus)),
                ("u_top_at_0", format!("{:?}", top.value_at(0.0)?)),
                ("u_bottom_at_0", format!("{:?}", bottom.value_at(0.0)?)),
                ("c_n", format!("{:?}", wave.speed)),
                ("cn_prime_quadrature", format!("{:?}", cn_prime_quadrature(&p.g_left))),
            ]);
            out.text("profile.txt", &body)?;
        }
        Mode::Theta => {
            let r = solve_theta_full(p.c_x, &theta_spec(&cfg.sim))?;
            r.field.write_binary(&out.path("theta.qnch"))?;
            let body = kv(&[
                ("c_x", format!("{:?}", p.c_x)),
                ("steps", r.steps.to_string()),
                ("update_rate", format!("{:?}", r.final_update_rate)),
                ("residual", format!("{:?}", r.final_residual)),
                ("oddness_defect", format!("{:?}", r.field.oddness_defect())),
                ("min_dy", format!("{:?}", crate::quench2d::min_dy(&r.field))),
            ]);
            out.text("theta.txt", &body)?;
        }
        Mode::Simulate => {
            let o = simulate_angle(&p, &cfg.sim)?;
            o.steady.field.write_binary(&out.path("field.qnch"))?;
            if let Some(t) = &o.steady.track {
                t.write_csv(&out.path("track.csv"))?;
            }
            let results = out.path("results.csv");
            if results.exists() {
                std::fs::remove_file(&results)?;
            }
            append_results_row(&results, p.alpha, p.c_x, &o.angle, o.drift)?;
            let body = kv(&[
                ("alpha", format!("{:?}", p.alpha)),
                ("psi", format!("{:?}", o.angle.psi)),
                ("psi_std_error", format!("{:?}", o.angle.psi_std_error)),
                ("intercept", format!("{:?}", o.angle.intercept)),
                ("c_y", format!("{:?}", o.steady.c_y)),
                ("drift", format!("{:?}", o.drift)),
                ("steps", o.steady.steps.to_string()),
                ("residual", format!("{:?}", o.steady.final_residual)),
            ]);
            out.text("simulate.txt", &body)?;
        }
        Mode::Melnikov => {
            let (_, report) = melnikov_prediction(&p, &cfg.sim)?;
            report.write(&out.path("melnikov.txt"))?;
        }
        Mode::Sweep => {
            let rows = if cfg.sweep_alphas.is_empty() {
                Vec::new()
            } else {
                let (_, report) = melnikov_prediction(&p, &cfg.sim)?;
                report.write(&out.path("melnikov.txt"))?;
                sweep(&p, &cfg.sim, &cfg.sweep_alphas, report.dphi_dalpha, cfg.threads)?
            };
            write_sweep_csv(&out.path("sweep.csv"), &rows)?;
        }
        Mode::Spectrum => {
            let g = Grid1D::symmetric(cfg.profile.half_width, cfg.profile.h)?;
            let front = solve_quench_front(FrontSide::Top, &p.unperturbed(), g)?;
            let op = LinearOperator1D::quenched_front(&front, p.c_x)?;
            let lambda = max_real_eig_1d(&op)?;
            let body = kv(&[
                ("c_x", format!("{:?}", p.c_x)),
                ("max_real_eigenvalue", format!("{lambda:?}")),
                ("nodes", g.n.to_string()),
            ]);
            out.text("spectrum.txt", &body)?;
        }
        Mode::Bordered => {
            let f = cfg.farfield;
            let spec = BorderedSpec {
                half_width: f.half_width,
                h: f.h,
                dt: f.dt,
                tol: f.tol,
                max_iter: f.max_iter,
            };
            let theta = solve_theta_full(
                p.c_x,
                &ThetaSpec {
                    half_x: f.half_width,
                    half_y: f.half_width,
                    h: f.h,
                    ..theta_spec(&cfg.sim)
                },
            )?;
            let eta = f.eta.unwrap_or_else(|| default_eta(p.c_x));
            let core = solve_bordered(p.alpha, &p, &PartitionSpec::new(f.radius)?, eta, &theta.field, &spec)?;
            let w = out.path("core_w.qnch");
            let meta = out.path("core.txt");
            core.write(&w, &meta)?;
        }
    }
    let mut manifest = format!(
        "# quench run manifest\n# version = {VERSION}\n# mode = {}\n# elapsed_seconds = {:.3}\n",
        cfg.mode,
        start.elapsed().as_secs_f64()
    );
    manifest.push_str(&cfg.to_text());
    out.text("manifest.txt", &manifest)?;
    Ok(RunSummary {
        output: out.dir,
        artifacts: out.files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alpha: f64, m: f64, p: f64) -> SweepRow {
        SweepRow {
            alpha,
            psi_measured: m,
            psi_predicted: p,
            drift: 0.0,
        }
    }

    #[test]
    fn compare_uses_smallest_pair() {
        let rows = [
            row(-0.2, -0.4, -0.3),
            row(-0.1, -0.2, -0.15),
            row(0.0, 0.0, 0.0),
            row(0.1, 0.2, 0.15),
            row(0.2, 0.4, 0.3),
            row(0.05, 1.0, 1.0),
        ];
        let c = compare_prediction(&rows).unwrap();
        assert_eq!(c.alpha, 0.1);
        assert!((c.measured_slope - 2.0).abs() < 1e-12);
        assert!((c.predicted_slope - 1.5).abs() < 1e-12);
        assert!(c.signs_agree);
    }

    #[test]
    fn compare_needs_baseline_and_pair() {
        assert!(matches!(
            compare_prediction(&[row(0.1, 0.1, 0.1), row(-0.1, -0.1, -0.1)]),
            Err(Error::MissingBaseline(_))
        ));
        assert!(matches!(
            compare_prediction(&[row(0.0, 0.0, 0.0), row(0.1, 0.1, 0.1)]),
            Err(Error::MissingBaseline(_))
        ));
    }
}
