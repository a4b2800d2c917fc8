//! Checks shared by the solver integration tests and the acceptance suite.

#![allow(dead_code)]

use std::f64::consts::PI;

use closurekit::cases::{error_metrics, lookup, solve_case, SolveOptions};
use closurekit::closure::AnalyticEos;
use closurekit::solver::{
    exact_riemann_solver, Boundaries, Boundary, ConservedStateGrid, EulerSolver, Mesh,
    PrimitiveState, SolveOutput, SolverConfig, WenoOrder,
};

/// L1 density error of the registered Sod case against the exact solution.
pub fn sod_l1(nx: usize, order: WenoOrder) -> f64 {
    let case = lookup("sod").unwrap();
    let eos = case.target_eos().unwrap();
    let opts = SolveOptions {
        order: Some(order),
        nx: Some(nx),
        ..Default::default()
    };
    let out = solve_case(case, &eos, &opts).unwrap();
    let snap = out.final_snapshot();
    let exact = exact_riemann_solver(
        PrimitiveState::new(1.0, 0.0, 1.0),
        PrimitiveState::new(0.125, 0.0, 0.1),
        1.4,
    )
    .unwrap();
    let reference: Vec<f64> = snap
        .xs
        .iter()
        .map(|&x| exact.sample((x - 0.5) / snap.t).rho)
        .collect();
    error_metrics(snap.field("rho").unwrap(), &reference).unwrap().l1
}

fn wave(x: f64) -> f64 {
    1.0 + 0.2 * (8.0 * PI * x).sin()
}

/// Density wave `ρ = 1 + 0.2 sin 8πx` carried at `u = 1`, `p = 1` on `[0, 1)`.
pub fn density_wave(nx: usize, order: WenoOrder) -> ConservedStateGrid {
    let m = Mesh::new_1d((0.0, 1.0), nx, order.ghost()).unwrap();
    let mut s = ConservedStateGrid::zeros(m.clone());
    for i in 0..nx {
        let rho = wave(m.x_center(i));
        s.set_primitive(i, 0, rho, 1.0, 0.0, 1.0 / (0.4 * rho));
    }
    s
}

/// Run the density wave to `t_end` with `Δt ∝ Δx^(5/3)`, which keeps the
/// third-order time error below the fifth-order spatial error.
pub fn run_density_wave(nx: usize, order: WenoOrder, t_end: f64, log: bool) -> SolveOutput {
    let eos = AnalyticEos::ideal(1.4).unwrap();
    let dx = 1.0 / nx as f64;
    let steps = (t_end / (0.5 * dx.powf(5.0 / 3.0))).ceil();
    let mut cfg = SolverConfig::new(order, t_end, Boundaries::uniform(Boundary::Periodic));
    cfg.fixed_dt = Some(t_end / steps);
    cfg.log_conservation = log;
    EulerSolver::new(&eos, cfg)
        .unwrap()
        .run(density_wave(nx, order))
        .unwrap()
}

/// L1 density errors of the translated wave at each resolution.
pub fn density_wave_errors(ns: &[usize], order: WenoOrder, t_end: f64) -> Vec<f64> {
    ns.iter()
        .map(|&n| {
            let snap = run_density_wave(n, order, t_end, false).final_snapshot().clone();
            let exact: Vec<f64> = snap
                .xs
                .iter()
                .map(|&x| wave(x - t_end))
                .collect();
            error_metrics(snap.field("rho").unwrap(), &exact).unwrap().l1
        })
        .collect()
}

/// Least-squares slope of `log e` against `log(1/N)`.
pub fn observed_order(ns: &[usize], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Largest per-step change of any conserved total relative to its initial size.
pub fn max_conservation_drift(out: &SolveOutput) -> f64 {
    let first = &out.conservation[0].totals;
    out.conservation
        .windows(2)
        .flat_map(|w| {
            w[1].totals
                .iter()
                .zip(&w[0].totals)
                .zip(first)
                .map(|((b, a), f)| (b - a).abs() / f.abs().max(1e-300))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}
