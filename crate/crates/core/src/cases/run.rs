//! Solves of registered cases.

use super::registry::{build_initial_state, CaseSpec, System};
use crate::closure::ClosureModel;
use crate::error::{Error, Result};
use crate::solver::{EulerSolver, SolveOutput, SolverConfig, WenoOrder};

/// Overrides of a case's registered solver settings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveOptions {
    pub order: Option<WenoOrder>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub t_end: Option<f64>,
    pub cfl: Option<f64>,
    pub snapshot_times: Vec<f64>,
    pub log_conservation: bool,
}

/// Solve an Euler case with the given closure from its registered initial
/// condition.
pub fn solve_case(case: &CaseSpec, closure: &dyn ClosureModel, opts: &SolveOptions) -> Result<SolveOutput> {
    if case.system == System::Toy {
        return Err(Error::Config(format!(
            "'{}' is a toy case; integrate it with the ODE solver",
            case.id
        )));
    }
    let order = opts.order.unwrap_or(case.order);
    let nx = opts.nx.unwrap_or(case.nx);
    let ny = if case.system == System::Euler2d {
        opts.ny.unwrap_or(nx)
    } else {
        1
    };
    let mesh = case.mesh(nx, ny, order)?;
    let initial = build_initial_state(case, &mesh)?;
    let boundaries = case
        .boundaries
        .ok_or_else(|| Error::Config(format!("case '{}' has no boundaries", case.id)))?;
    let mut cfg = SolverConfig::new(order, opts.t_end.unwrap_or(case.t_end()), boundaries);
    if let Some(cfl) = opts.cfl {
        cfg.cfl = cfl;
    }
    cfg.snapshot_times = opts.snapshot_times.clone();
    cfg.log_conservation = opts.log_conservation;
    EulerSolver::new(closure, cfg)?.run(initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::lookup;

    #[test]
    fn toy_case_is_rejected() {
        let eos = crate::closure::AnalyticEos::ideal(1.4).unwrap();
        assert!(solve_case(lookup("toy-test").unwrap(), &eos, &SolveOptions::default()).is_err());
    }

    #[test]
    fn short_sod_run_lands_on_end_time() {
        let c = lookup("sod").unwrap();
        let eos = c.target_eos().unwrap();
        let opts = SolveOptions {
            nx: Some(50),
            t_end: Some(0.01),
            ..Default::default()
        };
        let out = solve_case(c, &eos, &opts).unwrap();
        assert_eq!(out.final_snapshot().t, 0.01);
        assert_eq!(out.final_snapshot().xs.len(), 50);
    }
}
