//! The Constructor: trains per-case state networks and the shared closure
//! network together, plus the supervised baseline and the PINN forward
//! solve with a frozen closure.

mod adam;
mod eval;
mod sampling;

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use adam::{Adam, OptimizerConfig};
pub use eval::{evaluate_generalization_l2, EvalGrid, EvalGridSpec};
pub use sampling::sample_points;

use crate::autodiff::{Activation, Tape};
use crate::cases::{
    default_net2_widths, generate_training_data, lookup, CaseSpec, DataOptions, Role,
    SamplingCounts, SparseDataset, System,
};
use crate::closure::{toy_solution, ClosureSpec, NeuralClosure};
use crate::error::{Error, Result};
use crate::jsonfmt;
use crate::losses::{case_terms, total_loss, LossBreakdown, LossWeights, ResidualPointSets};
use crate::net::{DenseNet, ModelMeta};
use crate::solver::Envelope;

const BATCH_STREAM: u64 = 2;

/// Per-count overrides of a case's registered sampling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplingOverride {
    pub pde: Option<usize>,
    pub con: Option<usize>,
    pub bd: Option<usize>,
    pub ibc: Option<usize>,
    pub bc: Option<usize>,
    pub data: Option<usize>,
}

impl SamplingOverride {
    pub fn apply(&self, base: &SamplingCounts) -> SamplingCounts {
        SamplingCounts {
            pde: self.pde.unwrap_or(base.pde),
            con: self.con.unwrap_or(base.con),
            bd: self.bd.unwrap_or(base.bd),
            ibc: self.ibc.unwrap_or(base.ibc),
            bc: self.bc.unwrap_or(base.bc),
            data: self.data.unwrap_or(base.data),
        }
    }
}

/// Points drawn per iteration from the PDE and RH sets; `None` uses all.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub pde: Option<usize>,
    pub rh: Option<usize>,
}

fn default_activation() -> Activation {
    Activation::Tanh
}
fn default_fine_n() -> usize {
    4000
}
fn default_history_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub cases: Vec<String>,
    /// Net1 widths by case id; defaults to the registered widths.
    #[serde(default)]
    pub net1_widths: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub net2_widths: Option<Vec<usize>>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default)]
    pub sampling: SamplingOverride,
    /// Cells of the reference solves that generate Euler training data.
    #[serde(default = "default_fine_n")]
    pub data_fine_n: usize,
    /// Prepared datasets, one per case in order; generated when absent.
    #[serde(default)]
    pub data_files: Vec<PathBuf>,
    #[serde(default)]
    pub weights: LossWeights,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub batch: BatchConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub eval: EvalGridSpec,
    /// Write checkpoints every this many iterations.
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
    #[serde(default = "default_history_every")]
    pub history_every: usize,
}

impl TrainConfig {
    /// Defaults for the given training cases.
    pub fn for_cases(cases: &[&str]) -> Self {
        Self {
            cases: cases.iter().map(|s| s.to_string()).collect(),
            net1_widths: BTreeMap::new(),
            net2_widths: None,
            activation: default_activation(),
            sampling: SamplingOverride::default(),
            data_fine_n: default_fine_n(),
            data_files: Vec::new(),
            weights: LossWeights::default(),
            optimizer: OptimizerConfig::default(),
            batch: BatchConfig::default(),
            seed: 0,
            eval: EvalGridSpec::default(),
            checkpoint_every: None,
            history_every: default_history_every(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let cfg: Self = jsonfmt::read_file(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn case_specs(&self) -> Result<Vec<&'static CaseSpec>> {
        self.cases.iter().map(|id| lookup(id)).collect()
    }

    pub fn target(&self) -> Result<ClosureSpec> {
        Ok(self.case_specs()?[0].target.clone())
    }

    pub fn is_toy(&self) -> Result<bool> {
        Ok(self.case_specs()?[0].system == System::Toy)
    }

    pub fn net1_widths_for(&self, case: &CaseSpec) -> Vec<usize> {
        self.net1_widths
            .get(&case.id)
            .cloned()
            .unwrap_or_else(|| case.net1_widths.clone())
    }

    pub fn net2_widths(&self) -> Result<Vec<usize>> {
        match &self.net2_widths {
            Some(w) => Ok(w.clone()),
            None => Ok(default_net2_widths(&self.target()?)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cases.is_empty() {
            return Err(Error::Config("no training cases given".into()));
        }
        let specs = self.case_specs()?;
        let first = specs[0];
        for c in &specs {
            if c.role != Role::Train {
                return Err(Error::Config(format!("'{}' is not a training case", c.id)));
            }
            if c.system != first.system || c.target != first.target {
                return Err(Error::Config(format!(
                    "cases '{}' and '{}' do not share a system and closure",
                    first.id, c.id
                )));
            }
        }
        let (d_in, d_out, d2) = match first.system {
            System::Toy => (1, 1, 1),
            _ => (2, 3, 2),
        };
        for c in &specs {
            let w = self.net1_widths_for(c);
            if w.len() < 2 || w[0] != d_in || w[w.len() - 1] != d_out {
                return Err(Error::Config(format!(
                    "Net1 widths of '{}' must map {d_in} inputs to {d_out} outputs, got {w:?}",
                    c.id
                )));
            }
        }
        let w2 = self.net2_widths()?;
        if w2.len() < 2 || w2[0] != d2 || w2[w2.len() - 1] != 1 {
            return Err(Error::Config(format!(
                "Net2 widths must map {d2} inputs to 1 output, got {w2:?}"
            )));
        }
        if !self.data_files.is_empty() && self.data_files.len() != self.cases.len() {
            return Err(Error::Config(format!(
                "{} data files for {} cases",
                self.data_files.len(),
                self.cases.len()
            )));
        }
        if self.history_every == 0 {
            return Err(Error::Config("history_every must be positive".into()));
        }
        self.weights.validate()
    }

    pub fn counts_for(&self, case: &CaseSpec) -> SamplingCounts {
        self.sampling.apply(&case.sampling)
    }

    /// Read or generate the datasets of all cases.
    pub fn datasets(&self) -> Result<Vec<SparseDataset>> {
        self.validate()?;
        if !self.data_files.is_empty() {
            return self.data_files.iter().map(|p| SparseDataset::read(p)).collect();
        }
        self.case_specs()?
            .into_iter()
            .map(|c| {
                let opts = DataOptions {
                    fine_n: self.data_fine_n,
                    per_slice: self.counts_for(c).data,
                    seed: self.seed,
                    cfl: 0.5,
                };
                generate_training_data(c, &opts)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub loss: LossBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub cases: Vec<String>,
    pub seed: u64,
    pub iterations: usize,
    /// Loss over the full point sets after the last update.
    pub final_loss: LossBreakdown,
    pub history: Vec<HistoryEntry>,
    pub generalization_l2: Option<f64>,
    pub wall_time_s: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TrainReport {
    pub fn history_csv(&self) -> String {
        let mut out = String::from(LossBreakdown::CSV_HEADER);
        out.push('\n');
        for h in &self.history {
            out.push_str(&h.loss.csv_row(h.iteration));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, json: &Path, csv: &Path) -> Result<()> {
        jsonfmt::write_file(json, self)?;
        std::fs::write(csv, self.history_csv()).map_err(|e| Error::io(csv, e))
    }
}

/// Networks and report of a constructor run.
#[derive(Debug, Clone)]
pub struct ConstructorOutput {
    pub net1s: Vec<DenseNet>,
    pub net2: DenseNet,
    pub report: TrainReport,
    pub grid: EvalGrid,
}

/// Affine map of the observed range onto `[-1, 1]`.
fn range_normalizer(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo <= hi) {
        return None;
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    Some((mid, if half > 1e-8 { half } else { mid.abs().max(1.0) }))
}

fn set_input_box(net: &mut DenseNet, ranges: &[(f64, f64)]) -> Result<()> {
    let shift = ranges.iter().map(|r| 0.5 * (r.0 + r.1)).collect();
    let scale = ranges.iter().map(|r| 0.5 * (r.1 - r.0)).collect();
    net.set_input_normalizer(shift, scale)
}

fn apply_normalizers(
    net: &mut DenseNet,
    columns: &[Vec<f64>],
    input: bool,
) -> Result<()> {
    let mut shift = Vec::new();
    let mut scale = Vec::new();
    for col in columns {
        let (m, s) = range_normalizer(col.iter().copied()).unwrap_or((0.0, 1.0));
        shift.push(m);
        scale.push(s);
    }
    if input {
        net.set_input_normalizer(shift, scale)
    } else {
        net.set_output_normalizer(shift, scale)
    }
}

/// Supervised `((ρ, e), p)` pairs: dataset points where all three are observed.
pub fn extract_baseline_pairs(datasets: &[SparseDataset]) -> Vec<(Vec<f64>, f64)> {
    let mut pairs = Vec::new();
    for d in datasets {
        let (Some(r), Some(e), Some(p)) = (
            d.component_index("rho"),
            d.component_index("e"),
            d.component_index("p"),
        ) else {
            continue;
        };
        for pt in &d.points {
            if pt.mask[r] && pt.mask[e] && pt.mask[p] {
                pairs.push((vec![pt.values[r], pt.values[e]], pt.values[p]));
            }
        }
    }
    pairs
}

/// Input and output normalizers of the closure network for a pair set.
fn closure_normalizers(net: &mut DenseNet, inputs: &[Vec<f64>], outputs: &[f64]) -> Result<()> {
    let d = net.input_dim();
    let cols: Vec<Vec<f64>> = (0..d).map(|k| inputs.iter().map(|x| x[k]).collect()).collect();
    apply_normalizers(net, &cols, true)?;
    if !outputs.is_empty() {
        apply_normalizers(net, &[outputs.to_vec()], false)?;
    }
    Ok(())
}

/// Evaluation grid of a training run: the `(ρ, e)` envelope of the reference
/// solves, or the range of `u₁` along the toy trajectories.
pub fn generalization_grid(
    cases: &[&CaseSpec],
    datasets: &[SparseDataset],
    spec: &EvalGridSpec,
) -> Result<EvalGrid> {
    if cases.iter().all(|c| c.system == System::Toy) && !cases.is_empty() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in cases {
            let c0 = c.param("c0")?;
            let (t0, t1) = c.t_range;
            for k in 0..=1000 {
                let u = toy_solution(c0, t0 + (t1 - t0) * k as f64 / 1000.0);
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        return Ok(EvalGrid::interval(lo, hi, spec.toy_n));
    }
    let env = datasets
        .iter()
        .map(|d| {
            d.provenance.envelope.ok_or_else(|| {
                Error::Config(format!("dataset of '{}' carries no (rho, e) envelope", d.case))
            })
        })
        .try_fold(None::<Envelope>, |acc, e| {
            let e = e?;
            Ok::<_, Error>(Some(match acc {
                Some(a) => a.union(&e),
                None => e,
            }))
        })?
        .ok_or_else(|| Error::Config("no datasets to build an evaluation grid from".into()))?;
    Ok(EvalGrid::envelope(&env, spec.n, spec.shrink))
}

/// One optimisation problem over several state networks and a closure network.
struct Problem<'a> {
    points: Vec<ResidualPointSets>,
    toy: bool,
    weights: &'a LossWeights,
    batch: BatchConfig,
    optimizer: OptimizerConfig,
    seed: u64,
    history_every: usize,
    checkpoint: Option<(usize, &'a Path, Vec<String>)>,
}

struct LoopOutput {
    history: Vec<HistoryEntry>,
    warnings: Vec<String>,
    final_loss: LossBreakdown,
}

fn evaluate_loss(
    tape: &mut Tape,
    net1s: &[DenseNet],
    net2: &DenseNet,
    train_net2: bool,
    points: &[ResidualPointSets],
    problem: &Problem,
    iteration: usize,
) -> Result<(crate::autodiff::Var, LossBreakdown, Vec<crate::net::NetVars>, crate::net::NetVars)> {
    let v1: Vec<_> = net1s.iter().map(|n| n.bind(tape, true)).collect();
    let v2 = net2.bind(tape, train_net2);
    let terms: Vec<_> = points
        .iter()
        .zip(&v1)
        .map(|(pts, n1)| case_terms(tape, n1, &v2, pts, problem.weights, problem.toy))
        .collect();
    let (loss, bd) = total_loss(tape, &terms, problem.weights, &v2, iteration)?;
    Ok((loss, bd, v1, v2))
}

fn write_checkpoint(dir: &Path, ids: &[String], net1s: &[DenseNet], net2: &DenseNet) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    net2.save(
        &dir.join("checkpoint_net2.json"),
        ModelMeta {
            role: "net2".into(),
            trained_on: ids.to_vec(),
        },
    )?;
    for (id, n) in ids.iter().zip(net1s) {
        n.save(
            &dir.join(format!("checkpoint_net1_{id}.json")),
            ModelMeta {
                role: "net1".into(),
                trained_on: vec![id.clone()],
            },
        )?;
    }
    Ok(())
}

fn optimize(
    net1s: &mut [DenseNet],
    net2: &mut DenseNet,
    train_net2: bool,
    problem: &Problem,
) -> Result<LoopOutput> {
    let mut opt1: Vec<Adam> = net1s.iter().map(|n| Adam::new(n.num_params())).collect();
    let mut opt2 = Adam::new(net2.num_params());
    let mut rng = sampling::stream(problem.seed, BATCH_STREAM);
    let mut history = Vec::new();
    let mut warnings = Vec::new();
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(1001);
    let iterations = problem.optimizer.iterations;
    let mut tape = Tape::new();

    for it in 0..iterations {
        let batch: Vec<ResidualPointSets> = problem
            .points
            .iter()
            .map(|pts| {
                let pde = sampling::minibatch(&mut rng, pts.pde.len(), problem.batch.pde);
                let rh = sampling::minibatch(&mut rng, pts.rh.len(), problem.batch.rh);
                sampling::restrict(pts, pde.as_deref(), rh.as_deref())
            })
            .collect();
        let (loss, bd, v1, v2) = evaluate_loss(&mut tape, net1s, net2, train_net2, &batch, problem, it)?;
        let grads = tape.backward(loss)?;

        if it % problem.history_every == 0 || it + 1 == iterations {
            history.push(HistoryEntry {
                iteration: it,
                loss: bd,
            });
        }
        recent.push_back(bd.total);
        if recent.len() > 1001 {
            recent.pop_front();
        }
        if recent.len() == 1001 && bd.total > 10.0 * recent[0] && warnings.is_empty() {
            let msg = format!(
                "loss grew from {:.3e} to {:.3e} over 1000 iterations (iteration {it})",
                recent[0], bd.total
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }

        let lr = problem.optimizer.learning_rate_at(it);
        for (k, net) in net1s.iter_mut().enumerate() {
            let g = v1[k].flat_gradient(&grads, net);
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    term: "gradient".into(),
                    iteration: it,
                });
            }
            let mut p = net.params_flat();
            opt1[k].step(&mut p, &g, lr);
            net.set_params_flat(&p)?;
        }
        if train_net2 {
            let g = v2.flat_gradient(&grads, net2);
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    term: "gradient".into(),
                    iteration: it,
                });
            }
            let mut p = net2.params_flat();
            opt2.step(&mut p, &g, lr);
            net2.set_params_flat(&p)?;
        }
        if let Some((every, dir, ids)) = &problem.checkpoint {
            if *every > 0 && (it + 1) % every == 0 {
                write_checkpoint(dir, ids, net1s, net2)?;
            }
        }
        if it % 1000 == 0 {
            log::info!("iteration {it}: loss {:.6e}", bd.total);
        }
    }

    let (_, final_loss, _, _) =
        evaluate_loss(&mut tape, net1s, net2, train_net2, &problem.points, problem, iterations)?;
    Ok(LoopOutput {
        history,
        warnings,
        final_loss,
    })
}

/// State-network normalizers of a case: the space-time box onto `[-1, 1]`
/// and the observed output ranges.
fn net1_for_case(
    case: &CaseSpec,
    widths: &[usize],
    activation: Activation,
    pts: &ResidualPointSets,
    data: &SparseDataset,
    seed: u64,
) -> Result<DenseNet> {
    let mut net = DenseNet::init(widths, activation, seed)?;
    let dout = net.output_dim();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); dout];
    for ic in &pts.ic {
        for (k, v) in ic.target.iter().enumerate() {
            cols[k].push(*v);
        }
    }
    for p in &data.points {
        for k in 0..dout.min(p.values.len()) {
            if p.mask[k] {
                cols[k].push(p.values[k]);
            }
        }
    }
    apply_normalizers(&mut net, &cols, false)?;
    if case.system == System::Toy {
        set_input_box(&mut net, &[case.t_range])?;
    } else {
        let xr = case.x_range.unwrap_or((-1.0, 1.0));
        set_input_box(&mut net, &[case.t_range, xr])?;
    }
    Ok(net)
}

fn case_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(k as u64 + 1)
}

/// Train the series-parallel system on the configured cases.
///
/// `datasets` must list one dataset per case, in order. Checkpoints go to
/// `checkpoint_dir` when both it and `checkpoint_every` are set; on a
/// non-finite loss the last checkpoint is left in place and the error names
/// the offending term.
pub fn train_constructor(
    config: &TrainConfig,
    datasets: &[SparseDataset],
    checkpoint_dir: Option<&Path>,
) -> Result<ConstructorOutput> {
    config.validate()?;
    let start = Instant::now();
    let specs = config.case_specs()?;
    if datasets.len() != specs.len() {
        return Err(Error::Config(format!(
            "{} datasets for {} cases",
            datasets.len(),
            specs.len()
        )));
    }
    for (c, d) in specs.iter().zip(datasets) {
        if d.case != c.id {
            return Err(Error::Config(format!(
                "dataset of '{}' given for case '{}'",
                d.case, c.id
            )));
        }
        if d.is_empty() && config.weights.data > 0.0 {
            return Err(Error::Config(format!(
                "dataset of '{}' is empty; the data term needs observations",
                c.id
            )));
        }
    }
    let toy = config.is_toy()?;
    let mut points = Vec::with_capacity(specs.len());
    let mut net1s = Vec::with_capacity(specs.len());
    for (k, (c, d)) in specs.iter().zip(datasets).enumerate() {
        let mut pts = sample_points(
            c,
            &config.counts_for(c),
            config.weights.rh_dx_fraction,
            case_seed(config.seed, k),
        )?;
        pts.data = d.points.clone();
        net1s.push(net1_for_case(
            c,
            &config.net1_widths_for(c),
            config.activation,
            &pts,
            d,
            case_seed(config.seed, k).rotate_left(17),
        )?);
        points.push(pts);
    }

    let mut net2 = DenseNet::init(&config.net2_widths()?, config.activation, config.seed)?;
    if toy {
        let u1: Vec<Vec<f64>> = points
            .iter()
            .flat_map(|p| {
                p.ic.iter()
                    .map(|ic| ic.target[0])
                    .chain(p.data.iter().map(|d| d.values[0]))
            })
            .map(|v| vec![v])
            .collect();
        closure_normalizers(&mut net2, &u1, &[])?;
    } else {
        let pairs = extract_baseline_pairs(datasets);
        if pairs.len() >= 2 {
            let (xs, ys): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            closure_normalizers(&mut net2, &xs, &ys)?;
        } else {
            let xs: Vec<Vec<f64>> = points
                .iter()
                .flat_map(|p| p.ic.iter().map(|ic| vec![ic.target[0], ic.target[2]]))
                .collect();
            closure_normalizers(&mut net2, &xs, &[])?;
        }
    }

    let problem = Problem {
        points,
        toy,
        weights: &config.weights,
        batch: config.batch,
        optimizer: config.optimizer,
        seed: config.seed,
        history_every: config.history_every,
        checkpoint: checkpoint_dir
            .zip(config.checkpoint_every)
            .map(|(dir, every)| (every, dir, config.cases.clone())),
    };
    let out = optimize(&mut net1s, &mut net2, true, &problem)?;

    let grid = generalization_grid(&specs, datasets, &config.eval)?;
    let truth = config.target()?.build()?;
    let model = NeuralClosure::new(net2.clone())?;
    let l2 = evaluate_generalization_l2(&model, truth.as_ref(), &grid)?;

    Ok(ConstructorOutput {
        net1s,
        net2,
        report: TrainReport {
            cases: config.cases.clone(),
            seed: config.seed,
            iterations: config.optimizer.iterations,
            final_loss: out.final_loss,
            history: out.history,
            generalization_l2: Some(l2),
            wall_time_s: start.elapsed().as_secs_f64(),
            warnings: out.warnings,
        },
        grid,
    })
}

/// Options of the supervised baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    pub widths: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// Coefficient of Σw², as in the constructor.
    #[serde(default)]
    pub reg: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Plain MSE regression of the closure network on `(U₁, U₂)` pairs.
pub fn train_data_driven_baseline(
    pairs: &[(Vec<f64>, f64)],
    opts: &BaselineOptions,
) -> Result<(DenseNet, Vec<f64>)> {
    if pairs.len() < 10 {
        return Err(Error::Config(format!(
            "the baseline needs at least 10 pairs, got {}",
            pairs.len()
        )));
    }
    let mut net = DenseNet::init(&opts.widths, opts.activation, opts.seed)?;
    let d = net.input_dim();
    if pairs.iter().any(|(x, _)| x.len() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: pairs.iter().map(|(x, _)| x.len()).find(|&l| l != d).unwrap_or(0),
        });
    }
    let (xs, ys): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
    closure_normalizers(&mut net, &xs, &ys)?;
    let x = ndarray::Array2::from_shape_fn((xs.len(), d), |(i, j)| xs[i][j]);
    let y = ndarray::Array2::from_shape_fn((ys.len(), 1), |(i, _)| ys[i]);
    let mut adam = Adam::new(net.num_params());
    let mut history = Vec::with_capacity(opts.optimizer.iterations);
    for it in 0..opts.optimizer.iterations {
        let mut tape = Tape::new();
        let v = net.bind(&mut tape, true);
        let xv = tape.constant(x.clone());
        let yv = tape.constant(y.clone());
        let pred = v.forward(&mut tape, xv, &[]).value;
        let diff = tape.sub(pred, yv);
        let sq = tape.square(diff);
        let mse = tape.mean(sq);
        let w2 = v.weight_sq_sum(&mut tape);
        let reg = tape.scale(w2, opts.reg);
        let loss = tape.add(mse, reg);
        let value = tape.scalar(loss);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                term: "baseline MSE".into(),
                iteration: it,
            });
        }
        history.push(value);
        let grads = tape.backward(loss)?;
        let g = v.flat_gradient(&grads, &net);
        let mut p = net.params_flat();
        adam.step(&mut p, &g, opts.optimizer.learning_rate_at(it));
        net.set_params_flat(&p)?;
    }
    Ok((net, history))
}

/// Options of the PINN forward solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardOptions {
    /// Net1 widths; defaults to the case's registered widths.
    #[serde(default)]
    pub widths: Option<Vec<usize>>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default)]
    pub weights: LossWeights,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub sampling: SamplingOverride,
    #[serde(default)]
    pub batch: BatchConfig,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        Self {
            widths: None,
            activation: default_activation(),
            weights: LossWeights::default(),
            optimizer: OptimizerConfig::default(),
            sampling: SamplingOverride::default(),
            batch: BatchConfig::default(),
            seed: 0,
        }
    }
}

/// Train a new case's state network on `L_PDE + L_IBCs` with the closure
/// network held fixed.
pub fn solve_new_case_pinn_forward(
    net2: &DenseNet,
    case: &CaseSpec,
    opts: &ForwardOptions,
) -> Result<(DenseNet, TrainReport)> {
    let start = Instant::now();
    opts.weights.validate()?;
    let toy = case.system == System::Toy;
    if case.system == System::Euler2d {
        return Err(Error::Config(format!(
            "PINN forward solves are 1D only, '{}' is 2D",
            case.id
        )));
    }
    let expected_in = if toy { 1 } else { 2 };
    if net2.input_dim() != expected_in || net2.output_dim() != 1 {
        return Err(Error::Dimension {
            expected: expected_in,
            got: net2.input_dim(),
        });
    }
    let mut counts = opts.sampling.apply(&case.sampling);
    if counts.pde == 0 {
        counts.pde = 200;
    }
    if counts.ibc == 0 {
        counts.ibc = if toy { 1 } else { 200 };
    }
    let mut pts = sample_points(case, &counts, opts.weights.rh_dx_fraction, case_seed(opts.seed, 0))?;
    pts.rh.clear();
    pts.con = None;
    let widths = opts
        .widths
        .clone()
        .unwrap_or_else(|| case.net1_widths.clone());
    let empty = SparseDataset {
        case: case.id.clone(),
        components: Vec::new(),
        provenance: crate::cases::Provenance {
            fine_n: 0,
            order: 0,
            cfl: 0.0,
            seed: opts.seed,
            target: String::new(),
            envelope: None,
        },
        points: Vec::new(),
    };
    let mut net1 = net1_for_case(
        case,
        &widths,
        opts.activation,
        &pts,
        &empty,
        case_seed(opts.seed, 0),
    )?;
    let weights = LossWeights {
        data: 0.0,
        rh: 0.0,
        cons: 0.0,
        reg: 0.0,
        ..opts.weights
    };
    let problem = Problem {
        points: vec![pts],
        toy,
        weights: &weights,
        batch: opts.batch,
        optimizer: opts.optimizer,
        seed: opts.seed,
        history_every: 1,
        checkpoint: None,
    };
    let mut frozen = net2.clone();
    let out = optimize(std::slice::from_mut(&mut net1), &mut frozen, false, &problem)?;
    Ok((
        net1,
        TrainReport {
            cases: vec![case.id.clone()],
            seed: opts.seed,
            iterations: opts.optimizer.iterations,
            final_loss: out.final_loss,
            history: out.history,
            generalization_l2: None,
            wall_time_s: start.elapsed().as_secs_f64(),
            warnings: out.warnings,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_config(iterations: usize, seed: u64) -> TrainConfig {
        let mut c = TrainConfig::for_cases(&["toy-train-c0-0.5", "toy-train-c0-1", "toy-train-c0-2"]);
        c.optimizer.iterations = iterations;
        c.seed = seed;
        c.net1_widths = c
            .cases
            .iter()
            .map(|id| (id.clone(), vec![1, 8, 8, 1]))
            .collect();
        c.net2_widths = Some(vec![1, 8, 1]);
        c.sampling.pde = Some(40);
        c
    }

    #[test]
    fn config_validation() {
        assert!(toy_config(1, 0).validate().is_ok());
        let mut bad = toy_config(1, 0);
        bad.cases.push("ideal-train-1".into());
        assert!(bad.validate().is_err());
        let mut bad = toy_config(1, 0);
        bad.cases = vec!["ideal-test-1".into()];
        assert!(bad.validate().is_err());
        let mut bad = toy_config(1, 0);
        bad.net2_widths = Some(vec![2, 5, 1]);
        assert!(bad.validate().is_err());
        let mut bad = toy_config(1, 0);
        bad.cases = vec!["nope".into()];
        assert!(matches!(bad.validate(), Err(Error::UnknownCase(_))));
        let parsed: TrainConfig = serde_json::from_str(r#"{"cases": ["toy-train-c0-1"]}"#).unwrap();
        assert_eq!(parsed.optimizer.iterations, 20000);
        assert_eq!(parsed.weights.ibcs, 10.0);
    }

    #[test]
    fn fixed_seed_reproduces_history() {
        let cfg = toy_config(30, 3);
        let data = cfg.datasets().unwrap();
        let a = train_constructor(&cfg, &data, None).unwrap();
        let b = train_constructor(&cfg, &data, None).unwrap();
        assert_eq!(a.report.history, b.report.history);
        assert!(a
            .report
            .history
            .windows(2)
            .all(|w| w[0].iteration < w[1].iteration));
        assert!(a.report.final_loss.total < a.report.history[0].loss.total);
        assert_eq!(a.grid.len(), 201);
    }

    #[test]
    fn pde_and_ibc_only_run_decreases() {
        let mut cfg = toy_config(200, 1);
        cfg.weights.data = 0.0;
        cfg.sampling.data = Some(0);
        let data = cfg.datasets().unwrap();
        assert!(data.iter().all(|d| d.is_empty()));
        let out = train_constructor(&cfg, &data, None).unwrap();
        assert_eq!(out.report.final_loss.data, 0.0);
        assert!(out.report.final_loss.total < 0.5 * out.report.history[0].loss.total);
    }

    #[test]
    fn empty_dataset_refused_when_data_weighted() {
        let mut cfg = toy_config(5, 0);
        cfg.sampling.data = Some(0);
        let data = cfg.datasets().unwrap();
        assert!(matches!(
            train_constructor(&cfg, &data, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn stronger_regularization_shrinks_closure_weights() {
        let run = |reg: f64| {
            let mut cfg = toy_config(300, 2);
            cfg.weights.reg = reg;
            let data = cfg.datasets().unwrap();
            train_constructor(&cfg, &data, None).unwrap().net2.weight_sq_sum()
        };
        assert!(run(1e-1) <= run(1e-6));
    }

    #[test]
    fn baseline_refuses_few_pairs_and_fits_constant() {
        let opts = BaselineOptions {
            widths: vec![2, 6, 1],
            activation: Activation::Tanh,
            reg: 0.0,
            optimizer: OptimizerConfig {
                iterations: 4000,
                learning_rate: 1e-2,
                ..Default::default()
            },
            seed: 0,
        };
        let few: Vec<_> = (0..9).map(|i| (vec![i as f64, 1.0], 0.5)).collect();
        assert!(train_data_driven_baseline(&few, &opts).is_err());
        let pairs: Vec<_> = (0..40)
            .map(|i| (vec![0.1 + 0.02 * i as f64, 1.0 + 0.05 * (i % 7) as f64], 0.7))
            .collect();
        let (net, hist) = train_data_driven_baseline(&pairs, &opts).unwrap();
        assert!(hist.last().unwrap() < &1e-6);
        for (x, _) in &pairs {
            let y = net.forward(x).unwrap()[0];
            assert!((y - 0.7).abs() < 1e-3, "{y} {:?}", hist.last());
        }
    }

    #[test]
    fn baseline_fits_dense_analytic_pairs() {
        let eos = crate::closure::AnalyticEos::ideal(1.4).unwrap();
        let mut pairs = Vec::new();
        for i in 0..15 {
            for j in 0..15 {
                let (r, e) = (0.2 + 0.08 * i as f64, 1.0 + 0.1 * j as f64);
                pairs.push((vec![r, e], eos.pressure(r, e).unwrap()));
            }
        }
        let opts = BaselineOptions {
            widths: vec![2, 20, 1],
            activation: Activation::Tanh,
            reg: 0.0,
            optimizer: OptimizerConfig {
                iterations: 3000,
                learning_rate: 1e-2,
                decay: 0.9,
                decay_every: 200,
            },
            seed: 1,
        };
        let (net, _) = train_data_driven_baseline(&pairs, &opts).unwrap();
        let env = Envelope {
            rho_min: 0.2,
            rho_max: 1.32,
            e_min: 1.0,
            e_max: 2.4,
        };
        let grid = EvalGrid::envelope(&env, 31, 0.05);
        let err = evaluate_generalization_l2(&NeuralClosure::new(net).unwrap(), &eos, &grid).unwrap();
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn forward_solve_with_zero_closure_keeps_initial_value() {
        let net2 = DenseNet::from_parts(
            Activation::Identity,
            vec![ndarray::arr2(&[[0.0]])],
            vec![ndarray::arr1(&[0.0])],
        )
        .unwrap();
        let case = lookup("toy-test").unwrap();
        let opts = ForwardOptions {
            widths: Some(vec![1, 8, 8, 1]),
            optimizer: OptimizerConfig {
                iterations: 400,
                learning_rate: 1e-2,
                ..Default::default()
            },
            ..Default::default()
        };
        let (net1, report) = solve_new_case_pinn_forward(&net2, case, &opts).unwrap();
        // zero source: the solution is the constant initial value
        for t in [0.0, 1.0, 2.0] {
            assert!((net1.forward(&[t]).unwrap()[0] - 0.6).abs() < 2e-2);
        }
        assert!(report.final_loss.total < report.history[0].loss.total);
    }

    #[test]
    fn history_csv_header() {
        let r = TrainReport {
            cases: vec![],
            seed: 0,
            iterations: 0,
            final_loss: LossBreakdown::default(),
            history: vec![HistoryEntry {
                iteration: 0,
                loss: LossBreakdown::default(),
            }],
            generalization_l2: None,
            wall_time_s: 0.0,
            warnings: vec![],
        };
        let csv = r.history_csv();
        assert!(csv.starts_with("iteration,total,L_PDE,L_IBCs,L_data,L_RH,L_CONs,reg\n0,"));
    }
}
