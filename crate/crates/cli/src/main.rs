//! `closurekit` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 training
//! failure, 4 solver failure.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use closurekit::cases::{
    compare_snapshots, generate_training_data, lookup, registry, solve_case, DataOptions,
    SolveOptions, System,
};
use closurekit::closure::{ClosureSpec, NeuralClosure};
use closurekit::net::{DenseNet, ModelMeta};
use closurekit::solver::{ode_integrate_toy, Snapshot, WenoOrder};
use closurekit::train::{
    evaluate_generalization_l2, extract_baseline_pairs, generalization_grid,
    solve_new_case_pinn_forward, train_constructor, train_data_driven_baseline, BaselineOptions,
    EvalGrid, EvalGridSpec, ForwardOptions, TrainConfig,
};
use closurekit::{jsonfmt, Error};
use manifest::RunManifest;

fn case_list() -> String {
    let ids: Vec<&str> = registry().iter().map(|c| c.id.as_str()).collect();
    format!("Registered cases: {}", ids.join(", "))
}

#[derive(Debug, Parser)]
#[command(name = "closurekit", version, about = "Learn closure models and solve Euler cases with them", after_help = case_list())]
struct Cli {
    /// Worker threads for the solver (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the registered cases and their parameters.
    ListCases,
    /// Build the sparse training dataset of a case.
    GenerateData {
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 4000)]
        fine_n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train state networks and the shared closure network.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the closure network to observed (rho, e, p) pairs only.
    TrainBaseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a new case's state network against a frozen closure network.
    PinnForward {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        case: String,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the finite-difference solver on a case.
    Solve {
        #[arg(long)]
        case: String,
        /// `ideal:gamma=1.4`, `noble-abel:gamma=1.4,b=0.075`, `toy` or `neural:<model.json>`.
        #[arg(long)]
        closure: String,
        #[arg(long)]
        order: Option<u8>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        cfl: f64,
        /// Extra snapshot times, comma separated.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        /// Toy cases: RK4 step size.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closure error on a grid, or field errors between two snapshots.
    Evaluate {
        #[arg(long, requires = "truth", conflicts_with = "compare")]
        model: Option<PathBuf>,
        #[arg(long)]
        truth: Option<String>,
        /// Grid file written by `train`, or `rho=LO:HI,e=LO:HI[,n=N]` / `u=LO:HI[,n=N]`.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Option<Vec<PathBuf>>,
    },
}

/// Error with the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

fn usage(error: Error) -> Failure {
    Failure { code: 2, error }
}

fn is_config(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::UnknownCase(_) | Error::Dimension { .. } | Error::Json(_) | Error::Io { .. }
    )
}

/// Configuration problems exit with 2, everything else with `code`.
fn classify(code: u8) -> impl Fn(Error) -> Failure {
    move |error| Failure {
        code: if is_config(&error) { 2 } else { code },
        error,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| {
        usage(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let argv: Vec<String> = std::env::args().collect();
    match run(cli.command, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command, argv: Vec<String>) -> Result<(), Failure> {
    match command {
        Command::ListCases => list_cases(),
        Command::GenerateData {
            case,
            fine_n,
            out,
            seed,
        } => cmd_generate_data(&case, fine_n, &out, seed, argv),
        Command::Train { config, out } => cmd_train(&config, &out, argv),
        Command::TrainBaseline { config, out } => cmd_train_baseline(&config, &out, argv),
        Command::PinnForward {
            model,
            case,
            iterations,
            out,
            seed,
        } => cmd_pinn_forward(&model, &case, iterations, &out, seed, argv),
        Command::Solve {
            case,
            closure,
            order,
            nx,
            ny,
            t_end,
            cfl,
            snapshots,
            dt,
            out,
        } => {
            let order = order
                .map(|o| WenoOrder::try_from(o).map_err(usage))
                .transpose()?;
            let opts = SolveOptions {
                order,
                nx,
                ny,
                t_end,
                cfl: Some(cfl),
                snapshot_times: snapshots,
                log_conservation: true,
            };
            cmd_solve(&case, &closure, &opts, dt, &out, argv)
        }
        Command::Evaluate {
            model,
            truth,
            grid,
            compare,
        } => match (model, compare) {
            (Some(m), None) => cmd_evaluate_model(&m, truth.as_deref().unwrap_or_default(), grid.as_deref()),
            (None, Some(files)) => cmd_compare(&files[0], &files[1]),
            _ => Err(usage(Error::Config(
                "evaluate needs either --model/--truth or --compare A B".into(),
            ))),
        },
    }
}

fn list_cases() -> Result<(), Failure> {
    println!("id,system,role,t_end,target,params");
    for c in registry() {
        let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!(
            "{},{:?},{:?},{},{},{}",
            c.id,
            c.system,
            c.role,
            c.t_end(),
            c.target,
            params.join(";")
        );
    }
    Ok(())
}

fn cmd_generate_data(case: &str, fine_n: usize, out: &Path, seed: u64, argv: Vec<String>) -> Result<(), Failure> {
    let spec = lookup(case).map_err(usage)?;
    let file = format!("{case}.data.json");
    let mut m = RunManifest::new(argv, None, seed);
    m.begin(out, &[&file]).map_err(usage)?;
    let mut opts = DataOptions::for_case(spec, seed);
    opts.fine_n = fine_n;
    let data = generate_training_data(spec, &opts).map_err(classify(4))?;
    data.write(&out.join(&file)).map_err(usage)?;
    m.finish(out).map_err(usage)?;
    println!("{}", out.join(&file).display());
    Ok(())
}

fn read_config(path: &Path) -> Result<(TrainConfig, Vec<u8>), Failure> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    let cfg: TrainConfig = serde_json::from_slice(&bytes).map_err(|e| usage(Error::Json(e)))?;
    cfg.validate().map_err(usage)?;
    Ok((cfg, bytes))
}

fn save_model(net: &DenseNet, path: &Path, role: &str, cases: &[String]) -> Result<(), Failure> {
    net.save(
        path,
        ModelMeta {
            role: role.into(),
            trained_on: cases.to_vec(),
        },
    )
    .map_err(usage)
}

fn cmd_train(config: &Path, out: &Path, argv: Vec<String>) -> Result<(), Failure> {
    let (cfg, bytes) = read_config(config)?;
    let mut outputs = vec!["net2.json".to_string(), "report.json".into(), "loss.csv".into(), "eval_grid.json".into()];
    outputs.extend(cfg.cases.iter().map(|id| format!("net1_{id}.json")));
    let names: Vec<&str> = outputs.iter().map(String::as_str).collect();
    let mut m = RunManifest::new(argv, Some(&bytes), cfg.seed);
    m.begin(out, &names).map_err(usage)?;

    let data = cfg.datasets().map_err(classify(3))?;
    let result = train_constructor(&cfg, &data, Some(out)).map_err(classify(3))?;
    save_model(&result.net2, &out.join("net2.json"), "net2", &cfg.cases)?;
    for (id, n) in cfg.cases.iter().zip(&result.net1s) {
        save_model(n, &out.join(format!("net1_{id}.json")), "net1", std::slice::from_ref(id))?;
    }
    result
        .report
        .write(&out.join("report.json"), &out.join("loss.csv"))
        .map_err(usage)?;
    jsonfmt::write_file(&out.join("eval_grid.json"), &result.grid).map_err(usage)?;
    if cfg.checkpoint_every.is_some() {
        m.add_output("checkpoint_net2.json");
    }
    m.finish(out).map_err(usage)?;
    if let Some(l2) = result.report.generalization_l2 {
        println!("generalization_l2,{l2:.6e}");
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct BaselineReport {
    pairs: usize,
    iterations: usize,
    final_loss: f64,
    generalization_l2: f64,
}

fn cmd_train_baseline(config: &Path, out: &Path, argv: Vec<String>) -> Result<(), Failure> {
    let (cfg, bytes) = read_config(config)?;
    let mut m = RunManifest::new(argv, Some(&bytes), cfg.seed);
    m.begin(out, &["baseline_net2.json", "baseline_report.json", "eval_grid.json"])
        .map_err(usage)?;
    let data = cfg.datasets().map_err(classify(3))?;
    let pairs = extract_baseline_pairs(&data);
    let opts = BaselineOptions {
        widths: cfg.net2_widths().map_err(usage)?,
        activation: cfg.activation,
        reg: cfg.weights.reg,
        optimizer: cfg.optimizer,
        seed: cfg.seed,
    };
    let (net, hist) = train_data_driven_baseline(&pairs, &opts).map_err(classify(3))?;
    let specs = cfg.case_specs().map_err(usage)?;
    let grid = generalization_grid(&specs, &data, &cfg.eval).map_err(usage)?;
    let truth = cfg.target().and_then(|t| t.build()).map_err(usage)?;
    let model = NeuralClosure::new(net.clone()).map_err(usage)?;
    let l2 = evaluate_generalization_l2(&model, truth.as_ref(), &grid).map_err(classify(3))?;
    save_model(&net, &out.join("baseline_net2.json"), "baseline", &cfg.cases)?;
    let report = BaselineReport {
        pairs: pairs.len(),
        iterations: opts.optimizer.iterations,
        final_loss: hist.last().copied().unwrap_or(f64::NAN),
        generalization_l2: l2,
    };
    jsonfmt::write_file(&out.join("baseline_report.json"), &report).map_err(usage)?;
    jsonfmt::write_file(&out.join("eval_grid.json"), &grid).map_err(usage)?;
    m.finish(out).map_err(usage)?;
    println!("generalization_l2,{l2:.6e}");
    Ok(())
}

fn cmd_pinn_forward(
    model: &Path,
    case: &str,
    iterations: Option<usize>,
    out: &Path,
    seed: u64,
    argv: Vec<String>,
) -> Result<(), Failure> {
    let spec = lookup(case).map_err(usage)?;
    let (net2, _) = DenseNet::load(model).map_err(usage)?;
    let mut m = RunManifest::new(argv, None, seed);
    m.begin(out, &["net1.json", "report.json", "loss.csv"]).map_err(usage)?;
    let mut opts = ForwardOptions {
        seed,
        ..Default::default()
    };
    if let Some(n) = iterations {
        opts.optimizer.iterations = n;
    }
    let (net1, report) = solve_new_case_pinn_forward(&net2, spec, &opts).map_err(classify(3))?;
    save_model(&net1, &out.join("net1.json"), "net1", &[case.to_string()])?;
    report
        .write(&out.join("report.json"), &out.join("loss.csv"))
        .map_err(usage)?;
    m.finish(out).map_err(usage)?;
    Ok(())
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:.6}.csv")
}

fn cmd_solve(
    case: &str,
    closure: &str,
    opts: &SolveOptions,
    dt: f64,
    out: &Path,
    argv: Vec<String>,
) -> Result<(), Failure> {
    let spec = lookup(case).map_err(usage)?;
    let closure_spec = ClosureSpec::parse(closure).map_err(usage)?;
    let model = closure_spec.build().map_err(usage)?;
    let mut m = RunManifest::new(argv, None, 0);

    if spec.system == System::Toy {
        m.begin(out, &["trajectory.csv"]).map_err(usage)?;
        let t_end = opts.t_end.unwrap_or(spec.t_end());
        let u0 = spec.toy_initial_value().map_err(usage)?;
        let traj = ode_integrate_toy(model.as_ref(), u0, (spec.t_range.0, t_end), dt).map_err(classify(4))?;
        let mut csv = String::from("t,u1\n");
        for (t, u) in traj {
            csv.push_str(&format!("{t:.16e},{u:.16e}\n"));
        }
        let path = out.join("trajectory.csv");
        std::fs::write(&path, csv).map_err(io_err(&path))?;
        m.finish(out).map_err(usage)?;
        return Ok(());
    }

    let mut planned: Vec<String> = opts.snapshot_times.iter().map(|&t| snapshot_name(t)).collect();
    planned.extend(["final.csv".to_string(), "conservation.csv".into(), "stats.json".into()]);
    let names: Vec<&str> = planned.iter().map(String::as_str).collect();
    m.begin(out, &names).map_err(usage)?;
    let result = solve_case(spec, model.as_ref(), opts).map_err(classify(4))?;
    let last = result.snapshots.len() - 1;
    for (k, s) in result.snapshots.iter().enumerate() {
        let name = if k == last {
            "final.csv".to_string()
        } else {
            snapshot_name(s.t)
        };
        s.write_csv(&out.join(&name)).map_err(usage)?;
    }
    let cpath = out.join("conservation.csv");
    std::fs::write(&cpath, result.conservation_csv()).map_err(io_err(&cpath))?;
    #[derive(serde::Serialize)]
    struct Stats<'a> {
        closure: String,
        t: f64,
        stats: &'a closurekit::solver::SolveStats,
        envelope: &'a closurekit::solver::Envelope,
    }
    let stats = Stats {
        closure: model.describe(),
        t: result.final_snapshot().t,
        stats: &result.stats,
        envelope: &result.envelope,
    };
    jsonfmt::write_file(&out.join("stats.json"), &stats).map_err(usage)?;
    m.finish(out).map_err(usage)?;
    Ok(())
}

/// `rho=LO:HI,e=LO:HI[,n=N]` or `u=LO:HI[,n=N]`.
fn parse_grid(text: &str) -> Result<EvalGrid, Error> {
    let bad = || Error::Config(format!("cannot parse grid '{text}'"));
    let mut ranges = std::collections::BTreeMap::new();
    let mut n = None;
    for part in text.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        if k.trim() == "n" {
            n = Some(v.trim().parse::<usize>().map_err(|_| bad())?);
            continue;
        }
        let (lo, hi) = v.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        ranges.insert(k.trim().to_string(), (lo, hi));
    }
    let spec = EvalGridSpec::default();
    match (ranges.get("rho"), ranges.get("e"), ranges.get("u")) {
        (Some(&r), Some(&e), None) => Ok(EvalGrid::envelope(
            &closurekit::solver::Envelope {
                rho_min: r.0,
                rho_max: r.1,
                e_min: e.0,
                e_max: e.1,
            },
            n.unwrap_or(spec.n),
            0.0,
        )),
        (None, None, Some(&u)) => Ok(EvalGrid::interval(u.0, u.1, n.unwrap_or(spec.toy_n))),
        _ => Err(bad()),
    }
}

fn cmd_evaluate_model(model: &Path, truth: &str, grid: Option<&str>) -> Result<(), Failure> {
    let (net, _) = DenseNet::load(model).map_err(usage)?;
    let learned = NeuralClosure::new(net).map_err(usage)?;
    let truth = ClosureSpec::parse(truth)
        .and_then(|t| t.build())
        .map_err(usage)?;
    let grid = match grid {
        None => return Err(usage(Error::Config("--grid is required with --model".into()))),
        Some(g) if Path::new(g).is_file() => jsonfmt::read_file::<EvalGrid>(Path::new(g)).map_err(usage)?,
        Some(g) => parse_grid(g).map_err(usage)?,
    };
    if grid.points.iter().any(|p| p.len() != truth.arity()) {
        return Err(usage(Error::Config(format!(
            "grid points do not have the closure's {} inputs",
            truth.arity()
        ))));
    }
    let l2 = evaluate_generalization_l2(&learned, truth.as_ref(), &grid).map_err(usage)?;
    println!("metric,value");
    println!("rel_l2,{l2:.16e}");
    println!("points,{}", grid.len());
    Ok(())
}

fn cmd_compare(a: &Path, b: &Path) -> Result<(), Failure> {
    let sa = Snapshot::read_csv(a, 0.0).map_err(usage)?;
    let sb = Snapshot::read_csv(b, 0.0).map_err(usage)?;
    let rows = compare_snapshots(&sa, &sb).map_err(usage)?;
    println!("field,l1,l2,linf,rel_l2");
    for (name, m) in rows {
        println!(
            "{name},{:.16e},{:.16e},{:.16e},{:.16e}",
            m.l1, m.l2, m.linf, m.rel_l2
        );
    }
    Ok(())
}
