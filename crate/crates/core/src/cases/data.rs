//! Sparse training datasets subsampled from reference solutions.

use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::registry::{build_initial_state, CaseSpec, System};
use crate::closure::toy_solution;
use crate::error::{Error, Result};
use crate::jsonfmt;
use crate::solver::{Envelope, EulerSolver, SolverConfig, WenoOrder};

/// Components of Euler dataset points, in order.
pub const EULER_COMPONENTS: [&str; 4] = ["rho", "u", "e", "p"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub t: f64,
    pub x: f64,
    /// Which entries of `values` are observed.
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub fine_n: usize,
    pub order: u8,
    pub cfl: f64,
    pub seed: u64,
    pub target: String,
    /// Range of `(ρ, e)` visited by the generating solve.
    pub envelope: Option<Envelope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseDataset {
    pub case: String,
    pub components: Vec<String>,
    pub provenance: Provenance,
    pub points: Vec<DataPoint>,
}

impl SparseDataset {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c == name)
    }

    /// Points at time `t` (exact match).
    pub fn slice(&self, t: f64) -> impl Iterator<Item = &DataPoint> {
        self.points.iter().filter(move |p| p.t == t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        jsonfmt::write_file(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        jsonfmt::read_file(path)
    }
}

/// Options for [`generate_training_data`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataOptions {
    pub fine_n: usize,
    /// Observed points per slice (toy: along the trajectory).
    pub per_slice: usize,
    pub seed: u64,
    pub cfl: f64,
}

impl DataOptions {
    pub fn for_case(case: &CaseSpec, seed: u64) -> Self {
        Self {
            fine_n: 4000,
            per_slice: case.sampling.data,
            seed,
            cfl: 0.5,
        }
    }
}

/// Build the sparse dataset of a training case.
///
/// Euler cases: a fine periodic solve with the analytic target EOS; the
/// initial slice observes `(ρ, u, e, p)` and the final slice `(ρ, u)` at
/// randomly chosen cell centres. Toy cases: `u₁` at uniformly spaced times
/// from the exact solution.
pub fn generate_training_data(case: &CaseSpec, opts: &DataOptions) -> Result<SparseDataset> {
    case.validate()?;
    match case.system {
        System::Toy => toy_data(case, opts),
        System::Euler1d => euler_data(case, opts),
        System::Euler2d => Err(Error::Config(format!(
            "training data is only generated for 1D cases, '{}' is 2D",
            case.id
        ))),
    }
}

fn toy_data(case: &CaseSpec, opts: &DataOptions) -> Result<SparseDataset> {
    let c0 = case.param("c0")?;
    let (t0, t1) = case.t_range;
    let n = opts.per_slice;
    let points = (0..n)
        .map(|k| {
            let t = if n == 1 {
                t0
            } else {
                t0 + (t1 - t0) * k as f64 / (n - 1) as f64
            };
            DataPoint {
                t,
                x: 0.0,
                mask: vec![true],
                values: vec![toy_solution(c0, t)],
            }
        })
        .collect();
    Ok(SparseDataset {
        case: case.id.clone(),
        components: vec!["u1".into()],
        provenance: Provenance {
            fine_n: 0,
            order: 0,
            cfl: 0.0,
            seed: opts.seed,
            target: case.target.to_string(),
            envelope: None,
        },
        points,
    })
}

fn euler_data(case: &CaseSpec, opts: &DataOptions) -> Result<SparseDataset> {
    let eos = case.target_eos()?;
    let order = WenoOrder::Five;
    let mesh = case.mesh(opts.fine_n, 1, order)?;
    let initial = build_initial_state(case, &mesh)?;
    let mut cfg = SolverConfig::new(
        order,
        case.t_end(),
        case.boundaries
            .ok_or_else(|| Error::Config(format!("case '{}' has no boundaries", case.id)))?,
    );
    cfg.cfl = opts.cfl;
    cfg.snapshot_times = vec![0.0];
    let out = EulerSolver::new(&eos, cfg)?.run(initial)?;
    let first = &out.snapshots[0];
    let last = out.final_snapshot();

    if opts.per_slice > mesh.nx {
        return Err(Error::Config(format!(
            "cannot pick {} points per slice from {} cells",
            opts.per_slice, mesh.nx
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pick = |rng: &mut ChaCha8Rng| {
        let mut idx = sample(rng, mesh.nx, opts.per_slice).into_vec();
        idx.sort_unstable();
        idx
    };
    let mut points = Vec::with_capacity(2 * opts.per_slice);
    for i in pick(&mut rng) {
        points.push(DataPoint {
            t: case.t_range.0,
            x: first.xs[i],
            mask: vec![true; 4],
            values: vec![first.rho[i], first.u[i], first.e[i], first.p[i]],
        });
    }
    for i in pick(&mut rng) {
        points.push(DataPoint {
            t: last.t,
            x: last.xs[i],
            mask: vec![true, true, false, false],
            values: vec![last.rho[i], last.u[i], 0.0, 0.0],
        });
    }
    Ok(SparseDataset {
        case: case.id.clone(),
        components: EULER_COMPONENTS.iter().map(|s| s.to_string()).collect(),
        provenance: Provenance {
            fine_n: opts.fine_n,
            order: order.into(),
            cfl: opts.cfl,
            seed: opts.seed,
            target: case.target.to_string(),
            envelope: Some(out.envelope),
        },
        points,
    })
}
