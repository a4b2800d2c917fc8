//! Acceptance suite: runs every criterion and prints one pass/fail line each.
//!
//! Built without the libtest harness so the summary is always shown. Set
//! `ACCEPTANCE_ONLY=1,5,7` to run a subset; criteria 2 and 6 pull in the
//! trainings they depend on.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use closurekit::autodiff::{Activation, Tape};
use closurekit::cases::{compare_snapshots, lookup, solve_case, DataPoint, SolveOptions};
use closurekit::closure::{toy_solution, AnalyticEos, ClosureModel, NeuralClosure};
use closurekit::losses::{
    case_terms, lambda_weight, rh_conditions, rh_terms, total_loss, BoundarySample,
    ConservationSet, IcPoint, LossWeights, ResidualPointSets, StateCols,
};
use closurekit::net::DenseNet;
use closurekit::solver::weno::{weno3z_weights, weno5z_weights, weno_z_reconstruct};
use closurekit::solver::{exact_riemann_solver, ode_integrate_toy, PrimitiveState, Snapshot, Wave, WenoOrder};
use closurekit::train::{
    evaluate_generalization_l2, extract_baseline_pairs, generalization_grid,
    solve_new_case_pinn_forward, train_constructor, train_data_driven_baseline, BaselineOptions,
    ForwardOptions, TrainConfig,
};
use common::*;

const TOY_CASES: [&str; 3] = ["toy-train-c0-0.5", "toy-train-c0-1", "toy-train-c0-2"];
const TOY_SEEDS: [u64; 3] = [0, 1, 2];
/// PDE and RH points drawn per case and iteration in the Euler trainings.
const EULER_BATCH: usize = 256;

struct Outcome {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

struct Suite {
    selected: BTreeSet<u8>,
    outcomes: Vec<Outcome>,
}

impl Suite {
    fn wants(&self, id: u8) -> bool {
        self.selected.contains(&id)
    }

    fn record(&mut self, id: u8, name: &'static str, pass: bool, detail: String) {
        println!("[{}] criterion {id} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
        self.outcomes.push(Outcome {
            id,
            name,
            pass,
            detail,
        });
    }
}

fn minutes(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() / 60.0
}

// ---------------------------------------------------------------- criterion 1

fn toy_closure(suite: &mut Suite) -> DenseNet {
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut first = None;
    for seed in TOY_SEEDS {
        let mut cfg = TrainConfig::for_cases(&TOY_CASES);
        cfg.seed = seed;
        cfg.history_every = 100;
        let data = cfg.datasets().expect("toy datasets");
        let out = train_constructor(&cfg, &data, None).expect("toy training");
        errors.push(out.report.generalization_l2.expect("toy L2"));
        first.get_or_insert(out.net2);
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let mins = minutes(start);
    if suite.wants(1) {
        suite.record(
            1,
            "toy closure",
            mean <= 0.02 && mins <= 10.0,
            format!(
                "L2 per seed {:?}, mean {:.3}% (<= 2%), {mins:.1} min (<= 10)",
                errors.iter().map(|e| format!("{:.3}%", 100.0 * e)).collect::<Vec<_>>(),
                100.0 * mean
            ),
        );
    }
    first.expect("at least one seed")
}

// ---------------------------------------------------------------- criterion 2

fn toy_application(suite: &mut Suite, net2: &DenseNet) {
    let case = lookup("toy-test").unwrap();
    let c0 = case.param("c0").unwrap();
    let opts = ForwardOptions::default();
    let (net1, _) = solve_new_case_pinn_forward(net2, case, &opts).expect("forward solve");
    let pinn_err = (0..=2000)
        .map(|k| {
            let t = k as f64 * 1e-3;
            (net1.forward(&[t]).unwrap()[0] - toy_solution(c0, t)).abs()
        })
        .fold(0.0, f64::max);

    let closure = NeuralClosure::new(net2.clone()).unwrap();
    let u0 = case.toy_initial_value().unwrap();
    let traj = ode_integrate_toy(&closure, u0, (0.0, 2.0), 1e-3).expect("RK4");
    let rk4_err = traj
        .iter()
        .map(|&(t, u)| (u - toy_solution(c0, t)).abs())
        .fold(0.0, f64::max);
    suite.record(
        2,
        "toy application",
        pinn_err <= 5e-3 && rk4_err <= 5e-3,
        format!("PINN-forward max error {pinn_err:.2e}, RK4 max error {rk4_err:.2e} (<= 5e-3)"),
    );
}

// ------------------------------------------------------------ criteria 3 and 4

fn euler_config(family: &str) -> TrainConfig {
    let ids: Vec<String> = (1..=5).map(|k| format!("{family}-train-{k}")).collect();
    let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    let mut cfg = TrainConfig::for_cases(&refs);
    cfg.batch.pde = Some(EULER_BATCH);
    cfg.batch.rh = Some(EULER_BATCH);
    cfg.history_every = 500;
    cfg
}

fn eos_closure(
    suite: &mut Suite,
    id: u8,
    name: &'static str,
    family: &str,
    max_minutes: Option<f64>,
) -> DenseNet {
    let start = Instant::now();
    let cfg = euler_config(family);
    let data = cfg.datasets().expect("datasets");
    let out = train_constructor(&cfg, &data, None).expect("constructor training");
    let ours = out.report.generalization_l2.expect("constructor L2");
    let mins = minutes(start);

    let pairs = extract_baseline_pairs(&data);
    let opts = BaselineOptions {
        widths: cfg.net2_widths().unwrap(),
        activation: cfg.activation,
        reg: cfg.weights.reg,
        optimizer: cfg.optimizer,
        seed: cfg.seed,
    };
    let (baseline, _) = train_data_driven_baseline(&pairs, &opts).expect("baseline training");
    let specs = cfg.case_specs().unwrap();
    let grid = generalization_grid(&specs, &data, &cfg.eval).unwrap();
    let truth = cfg.target().unwrap().build().unwrap();
    let theirs = evaluate_generalization_l2(
        &NeuralClosure::new(baseline).unwrap(),
        truth.as_ref(),
        &grid,
    )
    .unwrap();
    if suite.wants(id) {
        let timing = match max_minutes {
            Some(limit) => format!("constructor {mins:.1} min (<= {limit})"),
            None => format!("constructor {mins:.1} min"),
        };
        suite.record(
            id,
            name,
            ours <= 0.01 && ours < theirs && max_minutes.is_none_or(|limit| mins <= limit),
            format!(
                "constructor L2 {:.3}% (<= 1%), baseline L2 {:.3}% on {} pairs, {timing}",
                100.0 * ours,
                100.0 * theirs,
                pairs.len()
            ),
        );
    }
    out.net2
}

// ---------------------------------------------------------------- criterion 5

fn solver_verification(suite: &mut Suite) {
    let sod = sod_l1(200, WenoOrder::Three);
    let ns = [100, 200, 400, 800];
    let errs = density_wave_errors(&ns, WenoOrder::Five, 0.1);
    let order = observed_order(&ns, &errs);
    let drift = [WenoOrder::Three, WenoOrder::Five]
        .iter()
        .map(|&o| max_conservation_drift(&run_density_wave(200, o, 0.2, true)))
        .fold(0.0, f64::max);
    suite.record(
        5,
        "solver verification",
        sod <= 1e-2 && order >= 4.5 && drift <= 1e-12,
        format!(
            "Sod L1(rho) {sod:.2e} (<= 1e-2), order-5 observed order {order:.2} (>= 4.5), conservation drift {drift:.1e} (<= 1e-12)"
        ),
    );
}

// ---------------------------------------------------------------- criterion 6

/// Largest `(field, value)` of `metric` over the fields compared.
fn worst(a: &Snapshot, b: &Snapshot, fields: &[&str], linf: bool) -> (String, f64) {
    compare_snapshots(a, b)
        .unwrap()
        .into_iter()
        .filter(|(n, _)| fields.contains(n))
        .map(|(n, m)| (n.to_string(), if linf { m.linf } else { m.l2 }))
        .fold((String::new(), 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
}

fn coupled_pair(
    case: &str,
    neural: &dyn ClosureModel,
    analytic: &dyn ClosureModel,
    opts: &SolveOptions,
) -> Result<(Snapshot, Snapshot), String> {
    let spec = lookup(case).unwrap();
    let a = solve_case(spec, neural, opts).map_err(|e| format!("{case} neural: {e}"))?;
    let b = solve_case(spec, analytic, opts).map_err(|e| format!("{case} analytic: {e}"))?;
    Ok((a.final_snapshot().clone(), b.final_snapshot().clone()))
}

fn coupled_runs(suite: &mut Suite, ideal: &DenseNet, na: &DenseNet) {
    let start = Instant::now();
    let ideal_nn = NeuralClosure::new(ideal.clone()).unwrap();
    let na_nn = NeuralClosure::new(na.clone()).unwrap();
    let ideal_eos = AnalyticEos::ideal(1.4).unwrap();
    let na_eos = AnalyticEos::noble_abel(1.4, 0.075).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();

    let smooth = [
        ("na-test-1", &na_nn, &na_eos, SolveOptions {
            order: Some(WenoOrder::Five),
            nx: Some(1000),
            t_end: Some(0.3),
            ..Default::default()
        }),
        ("ideal-test-1", &ideal_nn, &ideal_eos, SolveOptions::default()),
    ];
    for (case, nn, eos, opts) in &smooth {
        match coupled_pair(case, *nn, *eos, opts) {
            Ok((a, b)) => {
                let (f, v) = worst(&a, &b, &["rho", "u", "p"], true);
                pass &= v <= 1e-2;
                parts.push(format!("{case} Linf {v:.2e} in {f} (<= 1e-2)"));
            }
            Err(e) => {
                pass = false;
                parts.push(e);
            }
        }
    }
    let discontinuous = [
        ("na-test-2", SolveOptions::default()),
        ("na-test-3", SolveOptions {
            nx: Some(400),
            ..Default::default()
        }),
        ("na-test-4", SolveOptions {
            nx: Some(400),
            ..Default::default()
        }),
    ];
    for (case, opts) in &discontinuous {
        match coupled_pair(case, &na_nn, &na_eos, opts) {
            Ok((a, b)) => {
                let (f, v) = worst(&a, &b, &["rho", "u", "v", "p"], false);
                pass &= v <= 2e-2;
                parts.push(format!("{case} L2 {v:.2e} in {f} (<= 2e-2)"));
            }
            Err(e) => {
                pass = false;
                parts.push(e);
            }
        }
    }
    parts.push(format!("{:.1} min", minutes(start)));
    suite.record(6, "coupled runs", pass, parts.join("; "));
}

// ---------------------------------------------------------------- criterion 7

fn check(failures: &mut Vec<String>, ok: bool, what: &str) {
    if !ok {
        failures.push(what.to_string());
    }
}

fn tiny_points() -> ResidualPointSets {
    ResidualPointSets {
        pde: vec![[0.1, -0.3], [0.2, 0.4], [0.35, 0.9]],
        rh: vec![[0.1, 0.2], [0.3, 0.95]],
        rh_dx: 0.5,
        ic: vec![IcPoint {
            t: 0.0,
            x: 0.1,
            target: vec![1.0, 0.2, 2.0],
        }],
        bc: vec![0.2],
        x_range: (-1.0, 1.0),
        periodic: true,
        data: vec![DataPoint {
            t: 0.4,
            x: -0.2,
            mask: vec![true, true, false, true],
            values: vec![0.9, 0.3, 0.0, 0.8],
        }],
        con: Some(ConservationSet {
            t1: 0.0,
            t2: 0.4,
            xs: vec![-0.6, 0.0, 0.5],
            volume: 2.0,
            boundary: vec![
                BoundarySample { t: 0.2, x: -1.0, normal: -1.0 },
                BoundarySample { t: 0.3, x: 1.0, normal: 1.0 },
            ],
            area: 2.0,
        }),
    }
}

fn loss_value(net1: &DenseNet, net2: &DenseNet, w: &LossWeights) -> f64 {
    let mut tape = Tape::new();
    let n1 = net1.bind(&mut tape, false);
    let n2 = net2.bind(&mut tape, false);
    let terms = case_terms(&mut tape, &n1, &n2, &tiny_points(), w, false);
    total_loss(&mut tape, &[terms], w, &n2, 0).unwrap().1.total
}

/// Largest relative gap between tape parameter gradients and central differences.
fn parameter_gradient_gap() -> f64 {
    let net1 = DenseNet::init(&[2, 6, 6, 3], Activation::Tanh, 5).unwrap();
    let net2 = DenseNet::init(&[2, 5, 1], Activation::Tanh, 6).unwrap();
    let w = LossWeights {
        eps1: 0.0,
        eps2: 0.0,
        reg: 1e-2,
        ..Default::default()
    };
    let mut tape = Tape::new();
    let n1 = net1.bind(&mut tape, true);
    let n2 = net2.bind(&mut tape, true);
    let terms = case_terms(&mut tape, &n1, &n2, &tiny_points(), &w, false);
    let (loss, _) = total_loss(&mut tape, &[terms], &w, &n2, 0).unwrap();
    let grads = tape.backward(loss).unwrap();
    let g1 = n1.flat_gradient(&grads, &net1);
    let g2 = n2.flat_gradient(&grads, &net2);
    let h = 1e-6;
    let mut gap: f64 = 0.0;
    for (which, (net, g)) in [(&net1, &g1), (&net2, &g2)].into_iter().enumerate() {
        let p0 = net.params_flat();
        for k in 0..p0.len() {
            let eval = |d: f64| {
                let mut p = p0.clone();
                p[k] += d;
                let mut m = net.clone();
                m.set_params_flat(&p).unwrap();
                if which == 0 {
                    loss_value(&m, &net2, &w)
                } else {
                    loss_value(&net1, &m, &w)
                }
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            gap = gap.max((fd - g[k]).abs() / fd.abs().max(g[k].abs()).max(1e-3));
        }
    }
    gap
}

/// Largest gap between the forward-mode input jacobian and central differences.
fn input_jacobian_gap() -> f64 {
    let mut gap: f64 = 0.0;
    for (act, seed) in [(Activation::Tanh, 1), (Activation::Softplus, 2)] {
        let mut net = DenseNet::init(&[2, 20, 20, 3], act, seed).unwrap();
        net.set_input_normalizer(vec![0.2, -0.1], vec![0.5, 2.0]).unwrap();
        net.set_output_normalizer(vec![1.0, 0.0, 2.0], vec![0.3, 1.5, 2.0]).unwrap();
        for x in [[0.1, 0.3], [-0.7, 0.5], [0.9, -0.4]] {
            let (_, j) = net.forward_with_input_jacobian(&x).unwrap();
            let h = 1e-5;
            for k in 0..2 {
                let mut a = x;
                let mut b = x;
                a[k] += h;
                b[k] -= h;
                let ya = net.forward(&a).unwrap();
                let yb = net.forward(&b).unwrap();
                for i in 0..3 {
                    gap = gap.max(((ya[i] - yb[i]) / (2.0 * h) - j[i][k]).abs());
                }
            }
        }
    }
    gap
}

fn state(tape: &mut Tape, v: [f64; 4]) -> StateCols {
    let mut col = |x: f64| tape.column_constant(&[x]);
    StateCols {
        rho: col(v[0]),
        u: col(v[1]),
        e: col(v[2]),
        p: col(v[3]),
    }
}

fn rankine_hugoniot_residual() -> f64 {
    let mut worst: f64 = 0.0;
    let problems = [
        ((1.0, 0.0, 1.0), (0.125, 0.0, 0.1)),
        ((1.0, 0.75, 1.0), (0.125, 0.0, 0.1)),
        ((5.99924, 19.5975, 460.894), (5.99242, -6.19633, 46.0950)),
    ];
    for (l, r) in problems {
        let g = 1.4;
        let s = exact_riemann_solver(PrimitiveState::new(l.0, l.1, l.2), PrimitiveState::new(r.0, r.1, r.2), g).unwrap();
        let cons = |q: &PrimitiveState| {
            let e = q.p / (g - 1.0) + 0.5 * q.rho * q.u * q.u;
            ([q.rho, q.rho * q.u, e], [q.rho * q.u, q.rho * q.u * q.u + q.p, q.u * (e + q.p)])
        };
        let sides = [
            (s.left_wave, s.left, PrimitiveState::new(s.rho_star_left, s.u_star, s.p_star)),
            (s.right_wave, s.right, PrimitiveState::new(s.rho_star_right, s.u_star, s.p_star)),
        ];
        for (wave, outer, star) in sides {
            if let Wave::Shock { speed } = wave {
                let (ua, fa) = cons(&outer);
                let (ub, fb) = cons(&star);
                for c in 0..3 {
                    let scale = fa[c].abs().max(fb[c].abs()).max(1.0);
                    worst = worst.max(((fb[c] - fa[c]) - speed * (ub[c] - ua[c])).abs() / scale);
                }
            }
        }
    }
    worst
}

fn property_suite(suite: &mut Suite) {
    let mut failures = Vec::new();

    let pg = parameter_gradient_gap();
    check(&mut failures, pg <= 1e-5, &format!("parameter gradients {pg:.1e}"));
    let jg = input_jacobian_gap();
    check(&mut failures, jg <= 1e-6, &format!("input jacobian {jg:.1e}"));

    check(&mut failures, lambda_weight(0.5, 0.2) == 1.0, "lambda at expansion");
    check(
        &mut failures,
        (lambda_weight(-2.0, 0.2) - 1.0 / 1.8).abs() < 1e-15,
        "lambda at compression",
    );

    let mut tape = Tape::new();
    let left = state(&mut tape, [0.125, 0.0, 2.0, 0.1]);
    let quiet = state(&mut tape, [1.0, 0.0, 2.5, 1.0]);
    let moving = state(&mut tape, [1.0, 0.5, 2.5, 1.0]);
    let r = rh_terms(&mut tape, &quiet, &left, 0.1, 0.1);
    check(&mut failures, tape.scalar(r) == 0.0, "RH filter masks a jump without velocity change");
    let r = rh_terms(&mut tape, &moving, &left, 0.1, 0.1);
    let f1: f64 = -0.75625;
    let f2 = 0.125 * 0.5 - 0.5 * 0.875 * 1.1;
    let expect = 0.45f64.powi(2) * (f1 * f1 + f2 * f2);
    check(&mut failures, (tape.scalar(r) - expect).abs() < 1e-14, "RH example value");

    let mut zero_jump = true;
    for v in [[1.0, 0.2, 2.5, 1.0], [0.3, -1.7, 0.8, 0.2], [7.0, 3.0, 11.0, 40.0]] {
        let a = state(&mut tape, v);
        let b = state(&mut tape, v);
        let [f1, f2] = rh_conditions(&mut tape, &a, &b);
        zero_jump &= tape.scalar(f1) == 0.0 && tape.scalar(f2) == 0.0;
    }
    check(&mut failures, zero_jump, "f1(U,U) = f2(U,U) = 0");

    let v = [0.3, -1.2, 2.0, 0.7, 5.0];
    let w5 = weno5z_weights(&v);
    let w3 = weno3z_weights(&[v[0], v[1], v[2]]);
    check(
        &mut failures,
        (w5.iter().sum::<f64>() - 1.0).abs() < 1e-14 && (w3.iter().sum::<f64>() - 1.0).abs() < 1e-14,
        "WENO weights sum to one",
    );
    let (a, b) = (0.7, -1.3);
    let line5: Vec<f64> = (-2..=2).map(|k| a + b * k as f64).collect();
    let line3: Vec<f64> = (-1..=1).map(|k| a + b * k as f64).collect();
    check(
        &mut failures,
        (weno_z_reconstruct(&line5).unwrap() - (a + 0.5 * b)).abs() < 1e-14
            && (weno_z_reconstruct(&line3).unwrap() - (a + 0.5 * b)).abs() < 1e-14,
        "WENO reproduces linear data",
    );

    let a1 = DenseNet::init(&[2, 5, 3], Activation::Tanh, 11).unwrap();
    let b1 = DenseNet::init(&[2, 5, 3], Activation::Tanh, 12).unwrap();
    let net2 = DenseNet::init(&[2, 4, 1], Activation::Tanh, 13).unwrap();
    let mut tape = Tape::new();
    let na = a1.bind(&mut tape, true);
    let nb = b1.bind(&mut tape, true);
    let n2 = net2.bind(&mut tape, true);
    let ta = case_terms(&mut tape, &na, &n2, &tiny_points(), &LossWeights::default(), false);
    let grads = tape.backward(ta.pde.unwrap()).unwrap();
    check(
        &mut failures,
        na.touched(&grads) && n2.touched(&grads) && nb.flat_gradient(&grads, &b1).iter().all(|&g| g == 0.0),
        "series-parallel independence",
    );

    let rh = rankine_hugoniot_residual();
    check(&mut failures, rh <= 1e-10, &format!("exact Riemann RH residual {rh:.1e}"));

    let detail = if failures.is_empty() {
        format!("FD parameter gradients {pg:.1e} (<= 1e-5), input jacobian {jg:.1e} (<= 1e-6), RH residual {rh:.1e} (<= 1e-10), unit examples hold")
    } else {
        format!("failed: {}", failures.join(", "))
    };
    suite.record(7, "property suite", failures.is_empty(), detail);
}

fn main() {
    // `cargo test` passes libtest flags through; listing requests get nothing.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let selected: BTreeSet<u8> = match std::env::var("ACCEPTANCE_ONLY") {
        Ok(s) => s.split(',').filter_map(|x| x.trim().parse().ok()).collect(),
        Err(_) => (1..=7).collect(),
    };
    let mut suite = Suite {
        selected,
        outcomes: Vec::new(),
    };
    let start = Instant::now();

    if suite.wants(7) {
        property_suite(&mut suite);
    }
    if suite.wants(5) {
        solver_verification(&mut suite);
    }
    if suite.wants(1) || suite.wants(2) {
        let net2 = toy_closure(&mut suite);
        if suite.wants(2) {
            toy_application(&mut suite, &net2);
        }
    }
    if suite.wants(3) || suite.wants(4) || suite.wants(6) {
        let ideal = eos_closure(&mut suite, 3, "ideal-EOS closure", "ideal", Some(60.0));
        let na = eos_closure(&mut suite, 4, "Noble-Abel closure", "na", None);
        if suite.wants(6) {
            coupled_runs(&mut suite, &ideal, &na);
        }
    }

    suite.outcomes.sort_by_key(|o| o.id);
    println!("\nacceptance summary ({:.1} min)", minutes(start));
    for o in &suite.outcomes {
        println!(
            "{} criterion {} {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
    }
    let failed = suite.outcomes.iter().filter(|o| !o.pass).count();
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
