//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Built with `harness = false` so the lines reach the terminal without
//! `--nocapture`.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quench::config::ExperimentConfig;
use quench::experiment::simulate_angle;
use quench::farfield::{
    annulus_sup, default_eta, partition_of_unity, residual_f, shear_inverse, shear_map, solve_bordered,
    BorderedSpec, PartitionSpec, ProfileSet, ShearSpec,
};
use quench::melnikov::{m_psi, predict};
use quench::profiles1d::{cn_prime_quadrature, solve_quench_front, solve_traveling_wave, FrontSide};
use quench::quench2d::{min_dy, solve_theta, solve_theta_full, ThetaSpec};
use quench::spectral::{kernel_check_2d, max_real_eig_1d, LinearOperator1D};
use quench::{Field2D, Grid1D, ModelParams, Poly};

type Outcome = Result<(bool, String), String>;

fn desk_theta(c_x: f64, h: f64) -> Result<Field2D, String> {
    let spec = ThetaSpec {
        h,
        ..ThetaSpec::default()
    };
    solve_theta(c_x, &spec).map_err(|e| e.to_string())
}

fn g_right_one() -> ModelParams {
    ModelParams {
        g_right: Poly::constant(1.0),
        ..ModelParams::default()
    }
}

fn quadratic_left() -> ModelParams {
    ModelParams {
        g_left: Poly::new(&[0.0, 0.0, 0.5]).unwrap(),
        ..ModelParams::default()
    }
}

/// Measured ψ from a pinned run on the desk grid.
fn measured_psi(p: &ModelParams) -> Result<f64, String> {
    let s = ExperimentConfig::default().sim;
    simulate_angle(p, &s).map(|o| o.angle.psi).map_err(|e| e.to_string())
}

fn c1() -> Outcome {
    let t = Instant::now();
    let p = ModelParams {
        c_x: 0.0,
        ..ModelParams::default()
    };
    let mut v = Vec::new();
    for h in [0.05, 0.025, 0.0125] {
        let g = Grid1D::symmetric(30.0, h).map_err(|e| e.to_string())?;
        let f = solve_quench_front(FrontSide::Top, &p, g).map_err(|e| e.to_string())?;
        v.push(f.values[g.zero_index().unwrap()]);
    }
    let order = ((v[0] - v[1]) / (v[1] - v[2])).log2();
    let extrapolated = v[2] + (v[2] - v[1]) / 3.0;
    let err = (extrapolated - 0.5).abs();
    let secs = t.elapsed().as_secs_f64();
    let ok = err < 1e-6 && (order - 2.0).abs() < 0.2 && secs < 10.0;
    Ok((
        ok,
        format!("u_t(0) = {:.9} at h=0.0125, order {order:.3}, extrapolated error {err:.2e}, {secs:.1}s", v[2]),
    ))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let g = Grid1D::symmetric(20.0, 0.005).map_err(|e| e.to_string())?;
    let w = solve_traveling_wave(&ModelParams::default(), g).map_err(|e| e.to_string())?;
    let mut sup = 0.0_f64;
    for (i, x) in g.points().into_iter().enumerate() {
        if x.abs() <= 10.0 {
            sup = sup.max((w.profile.values[i] - (x / SQRT_2).tanh()).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = w.speed.abs() <= 1e-10 && sup < 1e-6 && secs < 5.0;
    Ok((ok, format!("c_n = {:.1e}, sup |z - tanh| = {sup:.2e}, {secs:.1}s", w.speed)))
}

fn c3() -> Outcome {
    let t = Instant::now();
    let q = cn_prime_quadrature(&Poly::constant(1.0));
    let g = Grid1D::symmetric(20.0, 0.01).map_err(|e| e.to_string())?;
    let p = ModelParams {
        g_left: Poly::constant(1.0),
        ..ModelParams::default()
    };
    let d = 1e-3;
    let cp = solve_traveling_wave(&p.with_alpha(d), g).map_err(|e| e.to_string())?.speed;
    let cm = solve_traveling_wave(&p.with_alpha(-d), g).map_err(|e| e.to_string())?.speed;
    let slope = (cp - cm) / (2.0 * d);
    let target = 3.0 / SQRT_2;
    let rel = (slope.abs() - q.abs()).abs() / q.abs();
    let secs = t.elapsed().as_secs_f64();
    let ok = (q.abs() - target).abs() < 1e-8 && rel < 1e-3 && q.signum() == slope.signum() && secs < 30.0;
    Ok((
        ok,
        format!("quadrature {q:.10}, BVP slope {slope:.6} (rel. diff {rel:.1e}), {secs:.1}s"),
    ))
}

fn c4() -> Outcome {
    let t = Instant::now();
    let c_x = 0.5;
    let r = solve_theta_full(c_x, &ThetaSpec::default()).map_err(|e| e.to_string())?;
    let th = &r.field;
    let odd = th.oddness_defect();
    let mdy = min_dy(th).min(quench::quench2d::min_forward_dy(th));
    let p = ModelParams {
        c_x,
        ..ModelParams::default()
    };
    let top = solve_quench_front(FrontSide::Top, &p, th.x_grid()).map_err(|e| e.to_string())?;
    let bottom = solve_quench_front(FrontSide::Bottom, &p, th.x_grid()).map_err(|e| e.to_string())?;
    let mut row_err = 0.0_f64;
    for i in 0..th.nx {
        row_err = row_err.max((th.get(i, th.ny - 1) - top.values[i]).abs());
        row_err = row_err.max((th.get(i, 0) - bottom.values[i]).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = odd < 1e-12 && mdy >= -1e-8 && row_err < 5e-3 && secs < 300.0;
    Ok((
        ok,
        format!(
            "{}x{} nodes: oddness {odd:.1e}, min dTheta/dy {mdy:.1e}, rows vs fronts {row_err:.1e}, {secs:.1}s",
            th.nx, th.ny
        ),
    ))
}

fn c5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c_x in [0.2, 0.5] {
        let a = m_psi(&desk_theta(c_x, 0.25)?, c_x).map_err(|e| e.to_string())?.value;
        let b = m_psi(&desk_theta(c_x, 0.125)?, c_x).map_err(|e| e.to_string())?.value;
        let rel = (a - b).abs() / b.abs();
        ok &= a < 0.0 && b < 0.0 && rel < 0.01;
        parts.push(format!("c_x={c_x}: M_psi {a:.6} -> {b:.6} ({:.2}%)", 100.0 * rel));
    }
    Ok((ok, parts.join("; ")))
}

fn c6() -> Outcome {
    let t = Instant::now();
    let theta = desk_theta(0.5, 0.25)?;
    let r1 = predict(&theta, &g_right_one()).map_err(|e| e.to_string())?;
    let r2 = predict(&theta, &quadratic_left()).map_err(|e| e.to_string())?;
    let mut ok = r1.dphi_dalpha > 0.0 && r2.m_alpha < 0.0;
    let mut parts = vec![format!(
        "g_r=1: dphi/dalpha {:.4}; g_l=u^2/2: M_alpha {:.4e} (dphi/dalpha {:.4})",
        r1.dphi_dalpha, r2.m_alpha, r2.dphi_dalpha
    )];
    let psi0 = measured_psi(&g_right_one())?;
    ok &= psi0.abs() < 0.01;
    parts.push(format!("psi(0) {psi0:.1e}"));
    for (name, p, slope) in [("g_r=1", g_right_one(), r1.dphi_dalpha), ("g_l=u^2/2", quadratic_left(), r2.dphi_dalpha)] {
        let plus = measured_psi(&p.with_alpha(0.2))?;
        let minus = measured_psi(&p.with_alpha(-0.2))?;
        ok &= plus.signum() == slope.signum() && minus.signum() == -slope.signum();
        parts.push(format!("{name}: psi(+-0.2) = {plus:+.5}, {minus:+.5}"));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 1800.0;
    parts.push(format!("{secs:.0}s"));
    Ok((ok, parts.join("; ")))
}

fn c7() -> Outcome {
    let p = g_right_one();
    let report = predict(&desk_theta(0.5, 0.25)?, &p).map_err(|e| e.to_string())?;
    let a = 0.02;
    let measured = (measured_psi(&p.with_alpha(a))? - measured_psi(&p.with_alpha(-a))?) / (2.0 * a);
    let rel = (measured - report.dphi_dalpha).abs() / report.dphi_dalpha.abs();
    Ok((
        rel <= 0.15,
        format!(
            "measured dpsi/dalpha {measured:.4}, predicted {:.4}, deviation {:.1}%",
            report.dphi_dalpha,
            100.0 * rel
        ),
    ))
}

fn c8() -> Outcome {
    let mut fwd = Vec::new();
    let mut adj = Vec::new();
    for h in [0.5, 0.25, 0.125] {
        let th = solve_theta(
            0.5,
            &ThetaSpec {
                half_x: 40.0,
                half_y: 40.0,
                h,
                ..ThetaSpec::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let k = kernel_check_2d(&th, 0.5);
        fwd.push(k.forward_residual);
        adj.push(k.adjoint_residual);
    }
    let orders = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| (w[0] / w[1]).log2()).collect() };
    let (of, oa) = (orders(&fwd), orders(&adj));
    let th0 = solve_theta(
        0.0,
        &ThetaSpec {
            half_x: 30.0,
            half_y: 30.0,
            h: 0.5,
            ..ThetaSpec::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let k0 = kernel_check_2d(&th0, 0.0);
    let gap = (k0.forward_residual - k0.adjoint_residual).abs();
    let ok = of.iter().chain(&oa).all(|&o| o >= 1.8) && gap <= 1e-12;
    Ok((
        ok,
        format!(
            "forward {:.2e}/{:.2e}/{:.2e} orders {:.2},{:.2}; adjoint orders {:.2},{:.2}; c_x=0 |fwd-adj| {gap:.1e}",
            fwd[0], fwd[1], fwd[2], of[0], of[1], oa[0], oa[1]
        ),
    ))
}

fn c9() -> Outcome {
    let g = Grid1D::symmetric(30.0, 0.025).map_err(|e| e.to_string())?;
    let p = ModelParams::default();
    let front = solve_quench_front(FrontSide::Top, &p, g).map_err(|e| e.to_string())?;
    let op = LinearOperator1D::quenched_front(&front, 0.5).map_err(|e| e.to_string())?;
    let lambda = max_real_eig_1d(&op).map_err(|e| e.to_string())?;

    let gl = Grid1D::symmetric(20.0, 0.02).map_err(|e| e.to_string())?;
    let lap = max_real_eig_1d(&LinearOperator1D::from_fn(gl, 0.0, |_| -1.0).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let lap_exact = -1.0 - (PI / 40.0).powi(2);
    let tr = max_real_eig_1d(
        &LinearOperator1D::from_fn(gl, 0.0, |x| 1.0 - 3.0 * (x / SQRT_2).tanh().powi(2)).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let ok = lambda < -0.05 && (lap - lap_exact).abs() < 1e-6 && tr.abs() < 2e-3;
    Ok((
        ok,
        format!(
            "front lambda_max {lambda:.4}; Dirichlet Laplacian {lap:.8} vs {lap_exact:.8}; tanh mode {tr:.1e}"
        ),
    ))
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let spec = PartitionSpec::new(20.0).map_err(|e| e.to_string())?;
    let mut pou = 0.0_f64;
    for _ in 0..100_000 {
        let (x, y) = (rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
        let s: f64 = partition_of_unity(&spec, x, y).as_array().iter().sum();
        pou = pou.max((s - 1.0).abs());
    }
    let mut shear = 0.0_f64;
    for _ in 0..100_000 {
        let (x, y) = (rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
        let s = ShearSpec::new(rng.random_range(-1.4..1.4)).map_err(|e| e.to_string())?;
        let (a, b) = shear_map(x, y, &s);
        let (c, d) = shear_inverse(a, b, &s);
        // relative to the coordinate scale; |ỹ| reaches ~700 here, where one ulp is ~1e-13
        let scale = 1.0_f64.max(x.abs()).max(y.abs()).max(b.abs());
        shear = shear.max((c - x).abs().max((d - y).abs()) / scale);
    }
    let p = g_right_one();
    let h = 0.5;
    let grid = Field2D::centered(80.0, 80.0, h).map_err(|e| e.to_string())?;
    let profiles = ProfileSet::solve(&p, grid.x_grid(), 130.0, h).map_err(|e| e.to_string())?;
    let mut sups = Vec::new();
    for r in [20.0, 30.0, 40.0] {
        let spec = PartitionSpec::new(r).map_err(|e| e.to_string())?;
        let f = residual_f(&grid, 0.0, &p, &profiles, &spec).map_err(|e| e.to_string())?;
        sups.push(annulus_sup(&f, r, 2.0 * r));
    }
    let ok = pou <= 1e-15 && shear < 1e-14 && sups[0] > sups[1] && sups[1] > sups[2];
    Ok((
        ok,
        format!(
            "partition defect {pou:.1e}, relative shear round trip {shear:.1e}, annulus sup {:.2e} > {:.2e} > {:.2e}",
            sups[0], sups[1], sups[2]
        ),
    ))
}

fn c11() -> Outcome {
    let p = g_right_one();
    let st = BorderedSpec::default();
    let theta = solve_theta(
        p.c_x,
        &ThetaSpec {
            half_x: st.half_width,
            half_y: st.half_width,
            h: st.h,
            ..ThetaSpec::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let spec = PartitionSpec::new(20.0).map_err(|e| e.to_string())?;
    let eta = default_eta(p.c_x);
    let solve = |a: f64| solve_bordered(a, &p, &spec, eta, &theta, &st).map_err(|e| e.to_string());
    let b0 = solve(0.0)?;
    let mut ok = b0.psi.abs() <= 1e-6;
    let mut parts = vec![format!("psi(0) {:.1e}", b0.psi)];
    for a in [0.1, -0.1] {
        let b = solve(a)?;
        let m = measured_psi(&p.with_alpha(a))?;
        ok &= (b.psi - m).abs() < 0.01;
        parts.push(format!(
            "alpha {a:+}: bordered {:.5} vs time-marching {m:.5} (diff {:.1e}, weighted residual {:.1e})",
            b.psi,
            (b.psi - m).abs(),
            b.weighted_residual
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("exact matching value u_t(0) = 1/2", c1),
        ("traveling wave at alpha = 0", c2),
        ("perturbation formula c_n'(0)", c3),
        ("Theta invariants", c4),
        ("M_psi sign and grid stability", c5),
        ("sign predictions and measured angles", c6),
        ("quantitative dpsi/dalpha agreement", c7),
        ("kernel and cokernel residual orders", c8),
        ("1D spectral negativity", c9),
        ("partition, shear and farfield residual", c10),
        ("bordered solver vs time-marching", c11),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1}s]",
            n + 1,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
