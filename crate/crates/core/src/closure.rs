//! Closure relations `U₂ = f(U₁)`: analytic equations of state, the toy
//! source term, and the neural adapter that wraps a trained network.

use std::fmt;
use std::path::PathBuf;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::DenseNet;

/// Reference ratio of specific heats for the sound-speed fallback.
pub const GAMMA_REF: f64 = 1.4;
/// Default pressure floor applied by the solver.
pub const P_FLOOR: f64 = 1e-8;

/// Anything that maps `U₁` to a scalar `U₂` together with `∂U₂/∂U₁`.
pub trait ClosureModel: Send + Sync + fmt::Debug {
    /// Number of inputs (2 for an EOS `p(ρ, e)`, 1 for the toy source).
    fn arity(&self) -> usize;

    fn describe(&self) -> String;

    /// Value at one point; `partials` (length `arity`) receives the gradient.
    fn eval(&self, input: &[f64], partials: &mut [f64]) -> Result<f64>;

    /// Value only.
    fn value(&self, input: &[f64]) -> Result<f64> {
        let mut scratch = vec![0.0; self.arity()];
        self.eval(input, &mut scratch)
    }

    /// Columnar batch evaluation: `inputs[k][i]` is component `k` of point
    /// `i`. When `partials` is given, `partials[k][i]` receives `∂U₂/∂U₁ₖ`.
    fn eval_batch(
        &self,
        inputs: &[&[f64]],
        values: &mut [f64],
        mut partials: Option<&mut [Vec<f64>]>,
    ) -> Result<()> {
        check_batch(self.arity(), inputs, values.len())?;
        let mut point = vec![0.0; self.arity()];
        let mut grad = vec![0.0; self.arity()];
        for i in 0..values.len() {
            for (k, col) in inputs.iter().enumerate() {
                point[k] = col[i];
            }
            values[i] = self.eval(&point, &mut grad)?;
            if let Some(parts) = partials.as_deref_mut() {
                for (k, g) in grad.iter().enumerate() {
                    parts[k][i] = *g;
                }
            }
        }
        Ok(())
    }
}

fn check_batch(arity: usize, inputs: &[&[f64]], n: usize) -> Result<()> {
    if inputs.len() != arity {
        return Err(Error::Dimension {
            expected: arity,
            got: inputs.len(),
        });
    }
    if let Some(bad) = inputs.iter().find(|c| c.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: bad.len(),
        });
    }
    Ok(())
}

fn check_arity(arity: usize, input: &[f64]) -> Result<()> {
    if input.len() != arity {
        return Err(Error::Dimension {
            expected: arity,
            got: input.len(),
        });
    }
    Ok(())
}

/// Closed-form equations of state `p(ρ, e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnalyticEos {
    IdealGas { gamma: f64 },
    NobleAbel { gamma: f64, covolume: f64 },
}

impl AnalyticEos {
    pub fn ideal(gamma: f64) -> Result<Self> {
        let eos = AnalyticEos::IdealGas { gamma };
        eos.validate()?;
        Ok(eos)
    }

    pub fn noble_abel(gamma: f64, covolume: f64) -> Result<Self> {
        let eos = AnalyticEos::NobleAbel { gamma, covolume };
        eos.validate()?;
        Ok(eos)
    }

    fn validate(&self) -> Result<()> {
        let gamma = self.gamma();
        if !(gamma > 1.0) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        if let AnalyticEos::NobleAbel { covolume, .. } = *self {
            if !(covolume >= 0.0) {
                return Err(Error::Config(format!(
                    "covolume must be nonnegative, got {covolume}"
                )));
            }
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            AnalyticEos::IdealGas { gamma } | AnalyticEos::NobleAbel { gamma, .. } => gamma,
        }
    }

    fn covolume(&self) -> f64 {
        match *self {
            AnalyticEos::IdealGas { .. } => 0.0,
            AnalyticEos::NobleAbel { covolume, .. } => covolume,
        }
    }

    /// `1 − bρ`, checked for the density domain.
    fn free_volume_fraction(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("density must be positive, got {rho}")));
        }
        let f = 1.0 - self.covolume() * rho;
        if !(f > 0.0) {
            return Err(Error::Domain(format!(
                "covolume·density = {} must stay below 1",
                self.covolume() * rho
            )));
        }
        Ok(f)
    }

    pub fn pressure(&self, rho: f64, e: f64) -> Result<f64> {
        let f = self.free_volume_fraction(rho)?;
        Ok((self.gamma() - 1.0) * rho * e / f)
    }

    /// `(p, ∂p/∂ρ|ₑ, ∂p/∂e|ρ)`.
    pub fn pressure_with_partials(&self, rho: f64, e: f64) -> Result<(f64, f64, f64)> {
        let f = self.free_volume_fraction(rho)?;
        let gm1 = self.gamma() - 1.0;
        let p = gm1 * rho * e / f;
        Ok((p, gm1 * e / (f * f), gm1 * rho / f))
    }

    /// Inverse of [`AnalyticEos::pressure`] in `e`.
    pub fn internal_energy(&self, rho: f64, p: f64) -> Result<f64> {
        let f = self.free_volume_fraction(rho)?;
        Ok(p * f / ((self.gamma() - 1.0) * rho))
    }
}

impl ClosureModel for AnalyticEos {
    fn arity(&self) -> usize {
        2
    }

    fn describe(&self) -> String {
        ClosureSpec::from(*self).to_string()
    }

    fn eval(&self, input: &[f64], partials: &mut [f64]) -> Result<f64> {
        check_arity(2, input)?;
        let (p, dr, de) = self.pressure_with_partials(input[0], input[1])?;
        partials[0] = dr;
        partials[1] = de;
        Ok(p)
    }
}

/// The toy source law `u₂ = u₁√(1 − u₁²)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ToyClosure;

pub fn toy_source(u1: f64) -> Result<f64> {
    if !(u1.abs() <= 1.0) {
        return Err(Error::Domain(format!("toy source needs |u1| <= 1, got {u1}")));
    }
    Ok(u1 * (1.0 - u1 * u1).sqrt())
}

/// `du₂/du₁ = √(1−u₁²) − u₁²/√(1−u₁²)`; unbounded at `|u₁| = 1`.
pub fn toy_source_derivative(u1: f64) -> Result<f64> {
    if !(u1.abs() <= 1.0) {
        return Err(Error::Domain(format!("toy source needs |u1| <= 1, got {u1}")));
    }
    let s = (1.0 - u1 * u1).sqrt();
    Ok(s - u1 * u1 / s)
}

/// Exact solution of `du₁/dt + u₁√(1−u₁²) = 0`:
/// `u₁(t) = 2c₀eᵗ / (c₀²e²ᵗ + 1)`, evaluated as `sech(t + ln c₀)`.
///
/// Requires `c₀ > 0`.
pub fn toy_solution(c0: f64, t: f64) -> f64 {
    assert!(c0 > 0.0, "toy solution family needs c0 > 0, got {c0}");
    1.0 / (t + c0.ln()).cosh()
}

impl ClosureModel for ToyClosure {
    fn arity(&self) -> usize {
        1
    }

    fn describe(&self) -> String {
        "toy".into()
    }

    fn eval(&self, input: &[f64], partials: &mut [f64]) -> Result<f64> {
        check_arity(1, input)?;
        let u = input[0];
        let v = toy_source(u)?;
        partials[0] = if u.abs() < 1.0 {
            toy_source_derivative(u)?
        } else {
            f64::NEG_INFINITY
        };
        Ok(v)
    }
}

/// A trained network used as a closure.
#[derive(Debug, Clone)]
pub struct NeuralClosure {
    net: DenseNet,
}

impl NeuralClosure {
    pub fn new(net: DenseNet) -> Result<Self> {
        if net.output_dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: net.output_dim(),
            });
        }
        Ok(Self { net })
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }
}

/// `(U₂, ∂U₂/∂U₁)` from a network via its input Jacobian.
pub fn neural_closure_eval(net: &DenseNet, u1: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (y, jac) = net.forward_with_input_jacobian(u1)?;
    Ok((y[0], jac.into_iter().next().unwrap_or_default()))
}

impl ClosureModel for NeuralClosure {
    fn arity(&self) -> usize {
        self.net.input_dim()
    }

    fn describe(&self) -> String {
        format!("neural:{:?}", self.net.layer_widths())
    }

    fn eval(&self, input: &[f64], partials: &mut [f64]) -> Result<f64> {
        let (v, grad) = neural_closure_eval(&self.net, input)?;
        partials[..grad.len()].copy_from_slice(&grad);
        Ok(v)
    }

    fn eval_batch(
        &self,
        inputs: &[&[f64]],
        values: &mut [f64],
        partials: Option<&mut [Vec<f64>]>,
    ) -> Result<()> {
        let n = values.len();
        check_batch(self.arity(), inputs, n)?;
        let x = Array2::from_shape_fn((n, inputs.len()), |(i, k)| inputs[k][i]);
        match partials {
            None => {
                let y = self.net.forward_batch(x.view())?;
                for (v, row) in values.iter_mut().zip(y.outer_iter()) {
                    *v = row[0];
                }
            }
            Some(parts) => {
                let (y, tangents) = self.net.forward_batch_with_jacobian(x.view())?;
                for (v, row) in values.iter_mut().zip(y.outer_iter()) {
                    *v = row[0];
                }
                for (part, t) in parts.iter_mut().zip(&tangents) {
                    for (p, row) in part.iter_mut().zip(t.outer_iter()) {
                        *p = row[0];
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sound speed and whether the thermodynamic formula had to be abandoned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundSpeed {
    pub c: f64,
    pub fallback: bool,
}

/// `c² = ∂p/∂ρ|ₑ + (p/ρ²)·∂p/∂e|ρ`, falling back to `√(γ_ref·max(p, p_floor)/ρ)`
/// when the radicand is not positive.
pub fn sound_speed_from_partials(
    rho: f64,
    p: f64,
    dp_drho: f64,
    dp_de: f64,
    p_floor: f64,
) -> SoundSpeed {
    let radicand = dp_drho + p / (rho * rho) * dp_de;
    if radicand > 0.0 && radicand.is_finite() {
        SoundSpeed {
            c: radicand.sqrt(),
            fallback: false,
        }
    } else {
        SoundSpeed {
            c: (GAMMA_REF * p.max(p_floor) / rho).sqrt(),
            fallback: true,
        }
    }
}

pub fn sound_speed(closure: &dyn ClosureModel, rho: f64, e: f64, p: f64) -> Result<SoundSpeed> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("density must be positive, got {rho}")));
    }
    let mut partials = [0.0; 2];
    closure.eval(&[rho, e], &mut partials)?;
    Ok(sound_speed_from_partials(rho, p, partials[0], partials[1], P_FLOOR))
}

/// Closure selector as written in configs and on the command line:
/// `ideal:gamma=1.4`, `noble-abel:gamma=1.4,b=0.075`, `toy`, `neural:<file>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ClosureSpec {
    Ideal { gamma: f64 },
    NobleAbel { gamma: f64, b: f64 },
    Toy,
    Neural(PathBuf),
}

impl From<AnalyticEos> for ClosureSpec {
    fn from(eos: AnalyticEos) -> Self {
        match eos {
            AnalyticEos::IdealGas { gamma } => ClosureSpec::Ideal { gamma },
            AnalyticEos::NobleAbel { gamma, covolume } => ClosureSpec::NobleAbel { gamma, b: covolume },
        }
    }
}

fn parse_params(body: &str) -> Result<Vec<(String, f64)>> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad number in '{kv}'")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn take_param(params: &[(String, f64)], key: &str, default: Option<f64>) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .or(default)
        .ok_or_else(|| Error::Config(format!("closure parameter '{key}' missing")))
}

impl ClosureSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, body) = text.split_once(':').unwrap_or((text, ""));
        match kind {
            "ideal" => {
                let params = parse_params(body)?;
                Ok(ClosureSpec::Ideal {
                    gamma: take_param(&params, "gamma", Some(1.4))?,
                })
            }
            "noble-abel" => {
                let params = parse_params(body)?;
                Ok(ClosureSpec::NobleAbel {
                    gamma: take_param(&params, "gamma", Some(1.4))?,
                    b: take_param(&params, "b", None)?,
                })
            }
            "toy" => Ok(ClosureSpec::Toy),
            "neural" if !body.is_empty() => Ok(ClosureSpec::Neural(PathBuf::from(body))),
            _ => Err(Error::Config(format!("unrecognised closure selector '{text}'"))),
        }
    }

    /// The analytic EOS this selector names, if any.
    pub fn analytic_eos(&self) -> Result<Option<AnalyticEos>> {
        match self {
            ClosureSpec::Ideal { gamma } => AnalyticEos::ideal(*gamma).map(Some),
            ClosureSpec::NobleAbel { gamma, b } => AnalyticEos::noble_abel(*gamma, *b).map(Some),
            _ => Ok(None),
        }
    }

    pub fn build(&self) -> Result<Box<dyn ClosureModel>> {
        Ok(match self {
            ClosureSpec::Ideal { .. } | ClosureSpec::NobleAbel { .. } => {
                Box::new(self.analytic_eos()?.expect("analytic selector"))
            }
            ClosureSpec::Toy => Box::new(ToyClosure),
            ClosureSpec::Neural(path) => {
                let (net, _) = DenseNet::load(path)?;
                Box::new(NeuralClosure::new(net)?)
            }
        })
    }
}

impl fmt::Display for ClosureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosureSpec::Ideal { gamma } => write!(f, "ideal:gamma={gamma}"),
            ClosureSpec::NobleAbel { gamma, b } => write!(f, "noble-abel:gamma={gamma},b={b}"),
            ClosureSpec::Toy => write!(f, "toy"),
            ClosureSpec::Neural(p) => write!(f, "neural:{}", p.display()),
        }
    }
}

impl TryFrom<String> for ClosureSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        ClosureSpec::parse(&s)
    }
}

impl From<ClosureSpec> for String {
    fn from(s: ClosureSpec) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{Activation, Dual};
    use ndarray::array;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ideal_gas_pressure() {
        let eos = AnalyticEos::ideal(1.4).unwrap();
        assert!((eos.pressure(1.0, 2.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((eos.internal_energy(1.0, 1.0).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn noble_abel_pressure() {
        let eos = AnalyticEos::noble_abel(1.4, 0.075).unwrap();
        let p = eos.pressure(1.0, 1.0).unwrap();
        assert!((p - 0.4 / 0.925).abs() < 1e-15);
        assert!((p - 0.432432).abs() < 1e-6);
        assert!(eos.pressure(1e-12, 5.0).unwrap() < 1e-11);
        let e = eos.internal_energy(0.8, p).unwrap();
        assert!((eos.pressure(0.8, e).unwrap() - p).abs() < 1e-14);
    }

    #[test]
    fn eos_domain_errors() {
        let eos = AnalyticEos::noble_abel(1.4, 0.075).unwrap();
        assert!(matches!(eos.pressure(1.0 / 0.075, 1.0), Err(Error::Domain(_))));
        assert!(matches!(eos.pressure(20.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(eos.pressure(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(eos.pressure(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(AnalyticEos::ideal(1.0).is_err());
        assert!(AnalyticEos::noble_abel(1.4, -0.1).is_err());
    }

    #[test]
    fn analytic_partials_match_dual_numbers() {
        for eos in [
            AnalyticEos::ideal(1.4).unwrap(),
            AnalyticEos::noble_abel(1.4, 0.075).unwrap(),
        ] {
            for &(rho, e) in &[(0.3, 1.2), (1.0, 1.0), (2.2, 0.4)] {
                let r = Dual::<2>::variable(rho, 0);
                let en = Dual::<2>::variable(e, 1);
                let gm1 = Dual::constant(eos.gamma() - 1.0);
                let one = Dual::constant(1.0);
                let b = Dual::constant(eos.covolume());
                let p = gm1 * r * en / (one - b * r);
                let (pv, dr, de) = eos.pressure_with_partials(rho, e).unwrap();
                assert!(rel(pv, p.re) < 1e-14);
                assert!(rel(dr, p.eps[0]) < 1e-14);
                assert!(rel(de, p.eps[1]) < 1e-14);
            }
        }
    }

    #[test]
    fn ideal_sound_speed_radicand_is_gamma_p_over_rho() {
        let eos = AnalyticEos::ideal(1.4).unwrap();
        let c = sound_speed(&eos, 1.0, 2.5, 1.0).unwrap();
        assert!(!c.fallback);
        assert!((c.c - 1.4f64.sqrt()).abs() < 1e-12);
        assert!((c.c - 1.183216).abs() < 1e-6);
        for &(rho, e) in &[(0.125, 2.0), (3.0, 0.1), (0.7, 7.0)] {
            let p = eos.pressure(rho, e).unwrap();
            let c = sound_speed(&eos, rho, e, p).unwrap();
            assert!(rel(c.c * c.c, 1.4 * p / rho) < 1e-12);
        }
    }

    #[test]
    fn sound_speed_fallback_on_negative_radicand() {
        let s = sound_speed_from_partials(2.0, 0.5, -3.0, 0.1, P_FLOOR);
        assert!(s.fallback);
        assert!((s.c - (1.4 * 0.5 / 2.0f64).sqrt()).abs() < 1e-15);
        let s = sound_speed_from_partials(2.0, -1.0, -3.0, 0.1, 1e-8);
        assert!((s.c - (1.4 * 1e-8 / 2.0f64).sqrt()).abs() < 1e-20);
    }

    #[test]
    fn toy_source_values() {
        assert_eq!(toy_source(0.0).unwrap(), 0.0);
        assert_eq!(toy_source(1.0).unwrap(), 0.0);
        assert!((toy_source(0.6).unwrap() - 0.48).abs() < 1e-15);
        assert!((toy_source(0.5f64.sqrt()).unwrap() - 0.5).abs() < 1e-15);
        assert!(toy_source_derivative(0.5f64.sqrt()).unwrap().abs() < 1e-15);
        assert!(matches!(toy_source(1.01), Err(Error::Domain(_))));
        assert!(matches!(toy_source(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn toy_solution_values_and_residual() {
        assert!((toy_solution(3.0, 0.0) - 0.6).abs() < 1e-15);
        assert!((toy_solution(1.0, 0.0) - 1.0).abs() < 1e-15);
        let c0 = 2.0f64;
        let t: f64 = 0.37;
        let closed = 2.0 * c0 * t.exp() / (c0 * c0 * (2.0 * t).exp() + 1.0);
        assert!((toy_solution(c0, t) - closed).abs() < 1e-15);
        for i in 0..=300 {
            let t = 1.0 + 3.0 * i as f64 / 300.0;
            // exact derivative of sech(t + ln c0)
            let s = t + c0.ln();
            let du = -(s.tanh()) / s.cosh();
            let r = du + toy_source(toy_solution(c0, t)).unwrap();
            assert!(r.abs() <= 1e-10, "residual {r} at t={t}");
        }
    }

    #[test]
    fn toy_closure_partials_match_fd() {
        let h = 1e-7;
        for &u in &[0.05, 0.3, 0.6, 0.9] {
            let mut g = [0.0];
            ToyClosure.eval(&[u], &mut g).unwrap();
            let fd = (toy_source(u + h).unwrap() - toy_source(u - h).unwrap()) / (2.0 * h);
            assert!(rel(g[0], fd) < 1e-6);
        }
    }

    #[test]
    fn neural_closure_identity_weights() {
        let net = DenseNet::from_parts(
            Activation::Identity,
            vec![array![[0.4, 0.7]]],
            vec![array![0.1]],
        )
        .unwrap();
        let nc = NeuralClosure::new(net.clone()).unwrap();
        let mut g = [0.0; 2];
        let v = nc.eval(&[2.0, 3.0], &mut g).unwrap();
        assert!((v - (0.8 + 2.1 + 0.1)).abs() < 1e-15);
        assert_eq!(g, [0.4, 0.7]);
        assert!(nc.eval(&[1.0], &mut g).is_err());
        let (v2, g2) = neural_closure_eval(&net, &[2.0, 3.0]).unwrap();
        assert_eq!(v2, v);
        assert_eq!(g2, vec![0.4, 0.7]);
    }

    #[test]
    fn neural_partials_match_fd() {
        let net = DenseNet::init(&[2, 20, 20, 20, 1], Activation::Tanh, 8).unwrap();
        let nc = NeuralClosure::new(net).unwrap();
        let h = 1e-6;
        for &(rho, e) in &[(0.5, 1.0), (1.3, 0.2), (2.0, 2.0)] {
            let mut g = [0.0; 2];
            nc.eval(&[rho, e], &mut g).unwrap();
            let fr = (nc.value(&[rho + h, e]).unwrap() - nc.value(&[rho - h, e]).unwrap()) / (2.0 * h);
            let fe = (nc.value(&[rho, e + h]).unwrap() - nc.value(&[rho, e - h]).unwrap()) / (2.0 * h);
            assert!((g[0] - fr).abs() <= 1e-6 * fr.abs().max(1e-2));
            assert!((g[1] - fe).abs() <= 1e-6 * fe.abs().max(1e-2));
        }
    }

    #[test]
    fn batch_evaluation_matches_pointwise() {
        let net = DenseNet::init(&[2, 6, 1], Activation::Tanh, 2).unwrap();
        let models: Vec<Box<dyn ClosureModel>> = vec![
            Box::new(AnalyticEos::noble_abel(1.4, 0.075).unwrap()),
            Box::new(NeuralClosure::new(net).unwrap()),
        ];
        let rho = [0.4, 1.0, 1.7];
        let e = [2.0, 0.3, 1.1];
        for m in &models {
            let mut vals = [0.0; 3];
            let mut parts = vec![vec![0.0; 3]; 2];
            m.eval_batch(&[&rho, &e], &mut vals, Some(&mut parts)).unwrap();
            for i in 0..3 {
                let mut g = [0.0; 2];
                let v = m.eval(&[rho[i], e[i]], &mut g).unwrap();
                assert!((v - vals[i]).abs() < 1e-14);
                assert!((g[0] - parts[0][i]).abs() < 1e-13);
                assert!((g[1] - parts[1][i]).abs() < 1e-13);
            }
            assert!(m.eval_batch(&[&rho], &mut vals, None).is_err());
        }
    }

    #[test]
    fn selector_strings() {
        assert_eq!(
            ClosureSpec::parse("ideal:gamma=1.4").unwrap(),
            ClosureSpec::Ideal { gamma: 1.4 }
        );
        let na = ClosureSpec::parse("noble-abel:gamma=1.4,b=0.075").unwrap();
        assert_eq!(na, ClosureSpec::NobleAbel { gamma: 1.4, b: 0.075 });
        assert_eq!(ClosureSpec::parse(&na.to_string()).unwrap(), na);
        assert_eq!(ClosureSpec::parse("toy").unwrap(), ClosureSpec::Toy);
        assert_eq!(
            ClosureSpec::parse("neural:model.json").unwrap(),
            ClosureSpec::Neural("model.json".into())
        );
        assert!(ClosureSpec::parse("noble-abel:gamma=1.4").is_err());
        assert!(ClosureSpec::parse("stiffened").is_err());
        assert!(ClosureSpec::parse("neural:").is_err());
        let json = serde_json::to_string(&na).unwrap();
        assert_eq!(json, "\"noble-abel:gamma=1.4,b=0.075\"");
    }
}
