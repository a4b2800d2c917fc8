//! Generalization error of a learned closure.

use serde::{Deserialize, Serialize};

use crate::closure::ClosureModel;
use crate::error::{Error, Result};
use crate::solver::Envelope;

fn default_n() -> usize {
    101
}
fn default_toy_n() -> usize {
    201
}
fn default_shrink() -> f64 {
    0.05
}

/// Resolution of the evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalGridSpec {
    /// Points per axis of the `(ρ, e)` tensor grid.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Points of the toy `u₁` grid.
    #[serde(default = "default_toy_n")]
    pub toy_n: usize,
    /// Fraction of the envelope removed at each side.
    #[serde(default = "default_shrink")]
    pub shrink: f64,
}

impl Default for EvalGridSpec {
    fn default() -> Self {
        Self {
            n: default_n(),
            toy_n: default_toy_n(),
            shrink: default_shrink(),
        }
    }
}

/// Closure inputs at which the generalization error is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub points: Vec<Vec<f64>>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn shrunk(lo: f64, hi: f64, s: f64) -> (f64, f64) {
    let d = (hi - lo) * s;
    (lo + d, hi - d)
}

impl EvalGrid {
    /// `n × n` tensor grid over the `(ρ, e)` envelope, shrunk per side.
    pub fn envelope(env: &Envelope, n: usize, shrink: f64) -> Self {
        let (r0, r1) = shrunk(env.rho_min, env.rho_max, shrink);
        let (e0, e1) = shrunk(env.e_min, env.e_max, shrink);
        let es = linspace(e0, e1, n);
        let points = linspace(r0, r1, n)
            .into_iter()
            .flat_map(|r| es.iter().map(move |&e| vec![r, e]))
            .collect();
        Self { points }
    }

    /// `n` points over `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64, n: usize) -> Self {
        Self {
            points: linspace(lo, hi, n).into_iter().map(|u| vec![u]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `‖Û₂ − U₂‖₂ / ‖U₂‖₂` over the grid.
pub fn evaluate_generalization_l2(
    model: &dyn ClosureModel,
    truth: &dyn ClosureModel,
    grid: &EvalGrid,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Config("evaluation grid is empty".into()));
    }
    if model.arity() != truth.arity() {
        return Err(Error::Dimension {
            expected: truth.arity(),
            got: model.arity(),
        });
    }
    let cols: Vec<Vec<f64>> = (0..truth.arity())
        .map(|k| grid.points.iter().map(|p| p[k]).collect())
        .collect();
    let inputs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let mut pred = vec![0.0; grid.len()];
    let mut exact = vec![0.0; grid.len()];
    model.eval_batch(&inputs, &mut pred, None)?;
    truth.eval_batch(&inputs, &mut exact, None)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in pred.iter().zip(&exact) {
        num += (a - b) * (a - b);
        den += b * b;
    }
    if !(den > 0.0) {
        return Err(Error::Domain("reference closure vanishes on the evaluation grid".into()));
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{AnalyticEos, ToyClosure};

    #[derive(Debug)]
    struct Scaled(AnalyticEos, f64);

    impl ClosureModel for Scaled {
        fn arity(&self) -> usize {
            2
        }
        fn describe(&self) -> String {
            "scaled".into()
        }
        fn eval(&self, input: &[f64], partials: &mut [f64]) -> Result<f64> {
            let v = self.0.eval(input, partials)?;
            partials.iter_mut().for_each(|d| *d *= self.1);
            Ok(v * self.1)
        }
    }

    fn env() -> Envelope {
        Envelope {
            rho_min: 0.1,
            rho_max: 1.3,
            e_min: 0.5,
            e_max: 3.0,
        }
    }

    #[test]
    fn grid_shape_and_bounds() {
        let g = EvalGrid::envelope(&env(), 101, 0.05);
        assert_eq!(g.len(), 101 * 101);
        assert!((g.points[0][0] - 0.16).abs() < 1e-15);
        assert!((g.points[0][1] - 0.625).abs() < 1e-15);
        assert!((g.points.last().unwrap()[1] - 2.875).abs() < 1e-15);
    }

    #[test]
    fn exact_closure_gives_zero_and_scaled_gives_one_percent() {
        let eos = AnalyticEos::ideal(1.4).unwrap();
        let g = EvalGrid::envelope(&env(), 21, 0.05);
        assert_eq!(evaluate_generalization_l2(&eos, &eos, &g).unwrap(), 0.0);
        let s = Scaled(eos, 1.01);
        let err = evaluate_generalization_l2(&s, &eos, &g).unwrap();
        assert!((err - 0.01).abs() < 1e-12);
    }

    #[test]
    fn empty_grid_rejected() {
        let g = EvalGrid::interval(0.0, 1.0, 0);
        assert!(evaluate_generalization_l2(&ToyClosure, &ToyClosure, &g).is_err());
    }
}
