//! The applicator: a conservative finite-difference WENO-Z solver for the
//! Euler equations with a pluggable pressure closure, plus the exact Riemann
//! solver and the RK4 integrator for the toy ODE.

mod grid;
mod ode;
mod riemann;
mod scheme;
mod snapshot;
pub mod weno;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

pub use grid::{Boundaries, Boundary, ConservedStateGrid, Mesh};
pub use ode::ode_integrate_toy;
pub use riemann::{exact_riemann_sample, exact_riemann_solver, PrimitiveState, RiemannSolution, Wave};
pub use scheme::{
    advect_scalar_periodic, euler_rhs, max_wave_speeds, primitives, EosCounters, Primitives,
    WenoOrder,
};
pub use snapshot::Snapshot;

use crate::closure::{ClosureModel, P_FLOOR};
use crate::error::{Error, Result};

/// Speed used when every cell is at rest with zero sound speed.
const MIN_WAVE_SPEED: f64 = 1e-8;

fn default_cfl() -> f64 {
    0.5
}

fn default_p_floor() -> f64 {
    P_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub order: WenoOrder,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    pub boundaries: Boundaries,
    #[serde(default = "default_p_floor")]
    pub p_floor: f64,
    /// Times at which snapshots are stored; `t_end` is always added.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Fixed step size overriding the CFL condition.
    #[serde(default)]
    pub fixed_dt: Option<f64>,
    #[serde(default)]
    pub log_conservation: bool,
}

impl SolverConfig {
    pub fn new(order: WenoOrder, t_end: f64, boundaries: Boundaries) -> Self {
        Self {
            order,
            cfl: default_cfl(),
            t_end,
            boundaries,
            p_floor: default_p_floor(),
            snapshot_times: Vec::new(),
            fixed_dt: None,
            log_conservation: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.boundaries.validate()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("CFL must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("fixed dt must be positive, got {dt}")));
            }
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return Err(Error::Config("snapshot times must lie in [0, t_end]".into()));
        }
        Ok(())
    }
}

/// Totals of the conserved components after a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationRecord {
    pub step: usize,
    pub t: f64,
    pub totals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub eos: EosCounters,
}

/// Range of density and internal energy over interior cells and all steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub rho_min: f64,
    pub rho_max: f64,
    pub e_min: f64,
    pub e_max: f64,
}

impl Envelope {
    fn empty() -> Self {
        Self {
            rho_min: f64::INFINITY,
            rho_max: f64::NEG_INFINITY,
            e_min: f64::INFINITY,
            e_max: f64::NEG_INFINITY,
        }
    }

    fn absorb(&mut self, state: &ConservedStateGrid, pr: &Primitives) {
        for k in state.mesh.interior_indices() {
            self.rho_min = self.rho_min.min(pr.rho[k]);
            self.rho_max = self.rho_max.max(pr.rho[k]);
            self.e_min = self.e_min.min(pr.e[k]);
            self.e_max = self.e_max.max(pr.e[k]);
        }
    }

    pub fn union(&self, other: &Envelope) -> Envelope {
        Envelope {
            rho_min: self.rho_min.min(other.rho_min),
            rho_max: self.rho_max.max(other.rho_max),
            e_min: self.e_min.min(other.e_min),
            e_max: self.e_max.max(other.e_max),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub final_state: ConservedStateGrid,
    pub snapshots: Vec<Snapshot>,
    pub conservation: Vec<ConservationRecord>,
    pub stats: SolveStats,
    pub envelope: Envelope,
}

impl SolveOutput {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("solve always stores the final snapshot")
    }

    /// Conservation log as CSV: `step,t,mass,momentum_x[,momentum_y],energy`.
    pub fn conservation_csv(&self) -> String {
        let two_d = self.final_state.mesh.dims == 2;
        let mut out = if two_d {
            String::from("step,t,mass,momentum_x,momentum_y,energy\n")
        } else {
            String::from("step,t,mass,momentum_x,energy\n")
        };
        for r in &self.conservation {
            let vals: Vec<String> = r.totals.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&format!("{},{:.16e},{}\n", r.step, r.t, vals.join(",")));
        }
        out
    }
}

/// `Δt = CFL·Δx / max(|u| + c)` in 1D and
/// `CFL·min(Δx, Δy) / (max(|u| + c) + max(|v| + c))` in 2D.
pub fn dt_from_speeds(mesh: &Mesh, cfl: f64, speeds: (f64, f64)) -> f64 {
    let (h, s) = if mesh.dims == 2 {
        (mesh.dx.min(mesh.dy), speeds.0 + speeds.1)
    } else {
        (mesh.dx, speeds.0)
    };
    if s <= MIN_WAVE_SPEED {
        warn!("maximum wave speed {s} is below {MIN_WAVE_SPEED}; using the floor");
        cfl * h / MIN_WAVE_SPEED
    } else {
        cfl * h / s
    }
}

/// CFL step for `state` (ghosts are filled on a copy), truncated so that
/// `state.t + Δt` does not pass `t_end`.
pub fn compute_dt(
    state: &ConservedStateGrid,
    closure: &dyn ClosureModel,
    config: &SolverConfig,
) -> Result<f64> {
    let mut s = state.clone();
    s.fill_ghosts(&config.boundaries);
    let pr = primitives(&s, closure, config.p_floor, &mut EosCounters::default())?;
    let dt = dt_from_speeds(&s.mesh, config.cfl, max_wave_speeds(&pr));
    Ok(dt.min(config.t_end - state.t))
}

/// Time integrator bound to a closure and configuration.
pub struct EulerSolver<'a> {
    closure: &'a dyn ClosureModel,
    config: SolverConfig,
    stats: SolveStats,
    envelope: Envelope,
}

impl<'a> EulerSolver<'a> {
    pub fn new(closure: &'a dyn ClosureModel, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if closure.arity() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: closure.arity(),
            });
        }
        Ok(Self {
            closure,
            config,
            stats: SolveStats {
                dt_min: f64::INFINITY,
                ..Default::default()
            },
            envelope: Envelope::empty(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    fn stage(&mut self, s: &mut ConservedStateGrid) -> Result<(Primitives, Vec<Vec<f64>>)> {
        s.fill_ghosts(&self.config.boundaries);
        let pr = primitives(s, self.closure, self.config.p_floor, &mut self.stats.eos)?;
        let speeds = max_wave_speeds(&pr);
        let rhs = euler_rhs(s, &pr, self.config.order, speeds);
        Ok((pr, rhs))
    }

    fn check_state(&self, s: &ConservedStateGrid) -> Result<()> {
        let m = &s.mesh;
        let last = s.ncomp() - 1;
        for k in m.interior_indices() {
            let rho = s.fields[0][k];
            if !(rho > 0.0) {
                return Err(scheme::positivity(s, k, "density"));
            }
            let mut mom2 = s.fields[1][k].powi(2);
            if m.dims == 2 {
                mom2 += s.fields[2][k].powi(2);
            }
            let internal = s.fields[last][k] - 0.5 * mom2 / rho;
            if !(internal >= 0.0) {
                return Err(scheme::positivity(s, k, "internal energy"));
            }
        }
        Ok(())
    }

    /// One SSP-RK3 step of at most `dt_limit`; returns the step taken.
    pub fn step(&mut self, s: &mut ConservedStateGrid, dt_limit: f64) -> Result<f64> {
        let idx: Vec<usize> = s.mesh.interior_indices().collect();
        let u0 = s.clone();
        let (pr, l0) = self.stage(s)?;
        self.envelope.absorb(s, &pr);
        let dt = match self.config.fixed_dt {
            Some(dt) => dt.min(dt_limit),
            None => dt_from_speeds(&s.mesh, self.config.cfl, max_wave_speeds(&pr)).min(dt_limit),
        };
        let ncomp = s.ncomp();
        for c in 0..ncomp {
            for (n, &k) in idx.iter().enumerate() {
                s.fields[c][k] = u0.fields[c][k] + dt * l0[c][n];
            }
        }
        let (_, l1) = self.stage(s)?;
        for c in 0..ncomp {
            for (n, &k) in idx.iter().enumerate() {
                s.fields[c][k] =
                    0.75 * u0.fields[c][k] + 0.25 * (s.fields[c][k] + dt * l1[c][n]);
            }
        }
        let (_, l2) = self.stage(s)?;
        for c in 0..ncomp {
            for (n, &k) in idx.iter().enumerate() {
                s.fields[c][k] = u0.fields[c][k] / 3.0
                    + 2.0 / 3.0 * (s.fields[c][k] + dt * l2[c][n]);
            }
        }
        s.t = u0.t + dt;
        self.check_state(s)?;
        self.stats.steps += 1;
        self.stats.dt_min = self.stats.dt_min.min(dt);
        self.stats.dt_max = self.stats.dt_max.max(dt);
        Ok(dt)
    }

    fn snapshot(&mut self, s: &mut ConservedStateGrid) -> Result<Snapshot> {
        s.fill_ghosts(&self.config.boundaries);
        let pr = primitives(s, self.closure, self.config.p_floor, &mut self.stats.eos)?;
        self.envelope.absorb(s, &pr);
        Ok(Snapshot::from_primitives(s, &pr))
    }

    /// Advance `initial` to `t_end`, storing snapshots at the requested times.
    pub fn run(&mut self, initial: ConservedStateGrid) -> Result<SolveOutput> {
        let mut s = initial;
        let t_end = self.config.t_end;
        let mut targets: Vec<f64> = self.config.snapshot_times.clone();
        targets.push(t_end);
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        let mut snapshots = Vec::new();
        let mut conservation = Vec::new();

        let snap0 = self.snapshot(&mut s)?;
        let mut next = 0;
        while next < targets.len() && targets[next] <= s.t {
            snapshots.push(Snapshot { t: targets[next], ..snap0.clone() });
            next += 1;
        }
        if self.config.log_conservation {
            conservation.push(ConservationRecord {
                step: 0,
                t: s.t,
                totals: s.totals(),
            });
        }
        while next < targets.len() {
            let target = targets[next];
            let limit = target - s.t;
            let dt = self.step(&mut s, limit)?;
            if target - s.t <= 1e-14 * target.abs().max(1.0) {
                s.t = target;
            }
            debug!("step {} t = {:.6} dt = {:.3e}", self.stats.steps, s.t, dt);
            if self.config.log_conservation {
                conservation.push(ConservationRecord {
                    step: self.stats.steps,
                    t: s.t,
                    totals: s.totals(),
                });
            }
            if targets[next] <= s.t {
                let snap = self.snapshot(&mut s)?;
                while next < targets.len() && targets[next] <= s.t {
                    snapshots.push(snap.clone());
                    next += 1;
                }
            }
        }
        if self.stats.eos.p_clamps > 0 || self.stats.eos.c_fallbacks > 0 {
            warn!(
                "pressure clamped {} times, sound-speed fallback used {} times",
                self.stats.eos.p_clamps, self.stats.eos.c_fallbacks
            );
        }
        Ok(SolveOutput {
            final_state: s,
            snapshots,
            conservation,
            stats: self.stats,
            envelope: self.envelope,
        })
    }
}
