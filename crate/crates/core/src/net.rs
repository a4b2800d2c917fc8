//! Fully connected networks: evaluation, input Jacobians, tape binding and the
//! JSON model file.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Activation, Dual, Gradients, Scalar, Tape, Var};
use crate::error::{Error, Result};
use crate::jsonfmt;

/// A dense network `width[0] → … → width[L]` with affine normalizers on the
/// input and output.
///
/// Weight matrices are stored with one row per output neuron. Hidden layers
/// apply `activation`; the last layer is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layer_widths: Vec<usize>,
    activation: Activation,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    in_shift: Vec<f64>,
    in_scale: Vec<f64>,
    out_shift: Vec<f64>,
    out_scale: Vec<f64>,
}

fn validate_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 {
        return Err(Error::Config(format!(
            "a network needs at least 2 layer widths, got {widths:?}"
        )));
    }
    if widths.contains(&0) {
        return Err(Error::Config(format!(
            "layer widths must be positive, got {widths:?}"
        )));
    }
    Ok(())
}

fn validate_scales(scale: &[f64], what: &str) -> Result<()> {
    if scale.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Config(format!(
            "{what} scales must be strictly positive, got {scale:?}"
        )));
    }
    Ok(())
}

impl DenseNet {
    /// Glorot-uniform weights, zero biases, identity normalizers.
    pub fn init(layer_widths: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        validate_widths(layer_widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_widths.len() - 1);
        let mut biases = Vec::with_capacity(layer_widths.len() - 1);
        for pair in layer_widths.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| dist.sample(&mut rng));
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        let din = layer_widths[0];
        let dout = *layer_widths.last().unwrap();
        Ok(Self {
            layer_widths: layer_widths.to_vec(),
            activation,
            weights,
            biases,
            in_shift: vec![0.0; din],
            in_scale: vec![1.0; din],
            out_shift: vec![0.0; dout],
            out_scale: vec![1.0; dout],
        })
    }

    /// Build from explicit parameters. Shapes must chain.
    pub fn from_parts(
        activation: Activation,
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Config(
                "need one bias vector per weight matrix".into(),
            ));
        }
        let mut widths = vec![weights[0].ncols()];
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != *widths.last().unwrap() || b.len() != w.nrows() {
                return Err(Error::Config(format!(
                    "layer {l}: weight {:?} / bias {} do not chain",
                    w.dim(),
                    b.len()
                )));
            }
            widths.push(w.nrows());
        }
        validate_widths(&widths)?;
        let din = widths[0];
        let dout = *widths.last().unwrap();
        Ok(Self {
            layer_widths: widths,
            activation,
            weights,
            biases,
            in_shift: vec![0.0; din],
            in_scale: vec![1.0; din],
            out_shift: vec![0.0; dout],
            out_scale: vec![1.0; dout],
        })
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    pub fn input_normalizer(&self) -> (&[f64], &[f64]) {
        (&self.in_shift, &self.in_scale)
    }

    pub fn output_normalizer(&self) -> (&[f64], &[f64]) {
        (&self.out_shift, &self.out_scale)
    }

    pub fn set_input_normalizer(&mut self, shift: Vec<f64>, scale: Vec<f64>) -> Result<()> {
        self.check_len(shift.len(), self.input_dim())?;
        self.check_len(scale.len(), self.input_dim())?;
        validate_scales(&scale, "input")?;
        self.in_shift = shift;
        self.in_scale = scale;
        Ok(())
    }

    pub fn set_output_normalizer(&mut self, shift: Vec<f64>, scale: Vec<f64>) -> Result<()> {
        self.check_len(shift.len(), self.output_dim())?;
        self.check_len(scale.len(), self.output_dim())?;
        validate_scales(&scale, "output")?;
        self.out_shift = shift;
        self.out_scale = scale;
        Ok(())
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            return Err(Error::Dimension { expected, got });
        }
        Ok(())
    }

    pub fn normalize_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.in_shift)
            .zip(&self.in_scale)
            .map(|((&v, s), c)| (v - s) / c)
            .collect()
    }

    pub fn denormalize_input(&self, xn: &[f64]) -> Vec<f64> {
        xn.iter()
            .zip(&self.in_shift)
            .zip(&self.in_scale)
            .map(|((&v, s), c)| v * c + s)
            .collect()
    }

    /// Evaluate with any [`Scalar`]; callers have checked the input width.
    fn eval<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let mut h: Vec<T> = x
            .iter()
            .zip(&self.in_shift)
            .zip(&self.in_scale)
            .map(|((&v, &s), &c)| (v - T::from_f64(s)).scale(1.0 / c))
            .collect();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut next = Vec::with_capacity(w.nrows());
            for (row, &bias) in w.outer_iter().zip(b) {
                let mut acc = T::from_f64(bias);
                for (&wij, &hj) in row.iter().zip(&h) {
                    acc = acc + hj.scale(wij);
                }
                next.push(if l < last {
                    acc.activate(self.activation)
                } else {
                    acc
                });
            }
            h = next;
        }
        h.into_iter()
            .zip(&self.out_shift)
            .zip(&self.out_scale)
            .map(|((v, &s), &c)| v.scale(c) + T::from_f64(s))
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len(), self.input_dim())?;
        Ok(self.eval(x))
    }

    /// Output and Jacobian `J[i][k] = ∂y_i/∂x_k`, by forward-mode propagation
    /// of one tangent per input component.
    pub fn forward_with_input_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        self.check_len(x.len(), self.input_dim())?;
        let dout = self.output_dim();
        let mut jac = vec![vec![0.0; x.len()]; dout];
        let mut y = Vec::new();
        for k in 0..x.len() {
            let xd: Vec<Dual<1>> = x
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    if j == k {
                        Dual::variable(v, 0)
                    } else {
                        Dual::constant(v)
                    }
                })
                .collect();
            let out = self.eval(&xd);
            for (i, o) in out.iter().enumerate() {
                jac[i][k] = o.eps[0];
            }
            if k == 0 {
                y = out.iter().map(|o| o.re).collect();
            }
        }
        Ok((y, jac))
    }

    fn normalized_batch(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut h = x.to_owned();
        for (j, mut col) in h.axis_iter_mut(Axis(1)).enumerate() {
            let (s, c) = (self.in_shift[j], self.in_scale[j]);
            col.mapv_inplace(|v| (v - s) / c);
        }
        h
    }

    fn denormalize_output(&self, y: &mut Array2<f64>, shift: bool) {
        for (j, mut col) in y.axis_iter_mut(Axis(1)).enumerate() {
            let (s, c) = (self.out_shift[j], self.out_scale[j]);
            if shift {
                col.mapv_inplace(|v| v * c + s);
            } else {
                col.mapv_inplace(|v| v * c);
            }
        }
    }

    /// Batched evaluation; rows of `x` are points.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_len(x.ncols(), self.input_dim())?;
        let mut h = self.normalized_batch(x);
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = h.dot(&w.t());
            z += b;
            if l < last {
                let act = self.activation;
                z.mapv_inplace(|v| act.apply(v));
            }
            h = z;
        }
        self.denormalize_output(&mut h, true);
        Ok(h)
    }

    /// Batched values plus one `B × out` tangent block per input component.
    pub fn forward_batch_with_jacobian(
        &self,
        x: ArrayView2<f64>,
    ) -> Result<(Array2<f64>, Vec<Array2<f64>>)> {
        self.check_len(x.ncols(), self.input_dim())?;
        let n = x.nrows();
        let din = self.input_dim();
        let mut h = self.normalized_batch(x);
        // Tangent of the normalized input along component k is e_k / scale_k,
        // identical for every row; after the first layer it becomes row-dependent.
        let mut tangents: Vec<Array2<f64>> = Vec::with_capacity(din);
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = h.dot(&w.t());
            z += b;
            let mut zt: Vec<Array2<f64>> = if l == 0 {
                (0..din)
                    .map(|k| {
                        let col = w.column(k).mapv(|v| v / self.in_scale[k]);
                        col.insert_axis(Axis(0))
                            .broadcast((n, w.nrows()))
                            .unwrap()
                            .to_owned()
                    })
                    .collect()
            } else {
                tangents.iter().map(|t| t.dot(&w.t())).collect()
            };
            if l < last {
                let act = self.activation;
                let slope = z.mapv(|v| act.derivative(v));
                for t in &mut zt {
                    *t *= &slope;
                }
                z.mapv_inplace(|v| act.apply(v));
            }
            h = z;
            tangents = zt;
        }
        self.denormalize_output(&mut h, true);
        for t in &mut tangents {
            self.denormalize_output(t, false);
        }
        Ok((h, tangents))
    }

    pub fn num_params(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.len() + b.len())
            .sum()
    }

    /// Parameters flattened layer by layer: weights row-major, then biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        self.check_len(flat.len(), self.num_params())?;
        let mut pos = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut() {
                *v = flat[pos];
                pos += 1;
            }
            for v in b.iter_mut() {
                *v = flat[pos];
                pos += 1;
            }
        }
        Ok(())
    }

    /// Σ w² over weight matrices (biases excluded).
    pub fn weight_sq_sum(&self) -> f64 {
        self.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>()).sum()
    }

    /// Record this network's parameters on `tape`, as trainable leaves or as
    /// constants for a frozen network.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> NetVars {
        let mut weights = Vec::with_capacity(self.weights.len());
        let mut biases = Vec::with_capacity(self.biases.len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let row = b.clone().insert_axis(Axis(0));
            if trainable {
                weights.push(tape.param(w.clone()));
                biases.push(tape.param(row));
            } else {
                weights.push(tape.constant(w.clone()));
                biases.push(tape.constant(row));
            }
        }
        NetVars {
            weights,
            biases,
            activation: self.activation,
            in_shift: self.in_shift.clone(),
            in_scale: self.in_scale.clone(),
            out_shift: self.out_shift.clone(),
            out_scale: self.out_scale.clone(),
        }
    }

    pub fn save(&self, path: &Path, meta: ModelMeta) -> Result<()> {
        if self.params_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("refusing to save a network with non-finite parameters".into()));
        }
        jsonfmt::write_file(path, &self.to_model_file(meta))
    }

    pub fn load(path: &Path) -> Result<(Self, ModelMeta)> {
        let file: ModelFile = jsonfmt::read_file(path)?;
        file.into_net()
    }

    pub fn to_model_file(&self, meta: ModelMeta) -> ModelFile {
        ModelFile {
            layer_widths: self.layer_widths.clone(),
            activation: self.activation,
            weights: self.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: self.biases.iter().map(|b| b.to_vec()).collect(),
            in_shift: self.in_shift.clone(),
            in_scale: self.in_scale.clone(),
            out_shift: self.out_shift.clone(),
            out_scale: self.out_scale.clone(),
            meta,
        }
    }
}

/// A network's parameters as recorded on a tape.
#[derive(Debug, Clone)]
pub struct NetVars {
    weights: Vec<Var>,
    biases: Vec<Var>,
    activation: Activation,
    in_shift: Vec<f64>,
    in_scale: Vec<f64>,
    out_shift: Vec<f64>,
    out_scale: Vec<f64>,
}

/// Network output on a tape plus its tangents, one per seeded direction.
#[derive(Debug, Clone)]
pub struct TapeOutput {
    pub value: Var,
    pub tangents: Vec<Var>,
}

impl NetVars {
    /// Forward pass of a `B × in` batch. Each entry of `tangents` is a
    /// `B × in` block of input-space directional derivatives (raw units);
    /// the matching output tangents are propagated on the tape so that
    /// reverse mode can differentiate through them.
    pub fn forward(&self, tape: &mut Tape, x: Var, tangents: &[Var]) -> TapeOutput {
        let neg_shift: Vec<f64> = self.in_shift.iter().map(|s| -s).collect();
        let inv_scale: Vec<f64> = self.in_scale.iter().map(|s| 1.0 / s).collect();
        let shifted = tape.shift_cols(x, &neg_shift);
        let mut h = tape.scale_cols(shifted, &inv_scale);
        let mut ht: Vec<Var> = tangents
            .iter()
            .map(|&t| tape.scale_cols(t, &inv_scale))
            .collect();
        let last = self.weights.len() - 1;
        for l in 0..self.weights.len() {
            let zw = tape.matmul_t(h, self.weights[l]);
            let z = tape.add_row(zw, self.biases[l]);
            let zt: Vec<Var> = ht
                .iter()
                .map(|&t| tape.matmul_t(t, self.weights[l]))
                .collect();
            if l < last {
                let (act, slope) = tape.activate_with_slope(z, self.activation);
                h = act;
                ht = zt.into_iter().map(|t| tape.mul(slope, t)).collect();
            } else {
                h = z;
                ht = zt;
            }
        }
        let scaled = tape.scale_cols(h, &self.out_scale);
        let value = tape.shift_cols(scaled, &self.out_shift);
        let tangents = ht
            .into_iter()
            .map(|t| tape.scale_cols(t, &self.out_scale))
            .collect();
        TapeOutput { value, tangents }
    }

    /// Forward pass with unit tangents along each listed input column
    /// (e.g. `[0, 1]` for ∂/∂t and ∂/∂x of a `(t, x)` input).
    pub fn forward_with_unit_tangents(
        &self,
        tape: &mut Tape,
        x: Var,
        directions: &[usize],
    ) -> TapeOutput {
        let (n, din) = tape.value(x).dim();
        let seeds: Vec<Var> = directions
            .iter()
            .map(|&k| {
                let mut m = Array2::zeros((n, din));
                m.column_mut(k).fill(1.0);
                tape.constant(m)
            })
            .collect();
        self.forward(tape, x, &seeds)
    }

    /// Σ w² over the weight matrices, on the tape.
    pub fn weight_sq_sum(&self, tape: &mut Tape) -> Var {
        let mut total: Option<Var> = None;
        for &w in &self.weights {
            let sq = tape.square(w);
            let s = tape.sum(sq);
            total = Some(match total {
                Some(t) => tape.add(t, s),
                None => s,
            });
        }
        total.expect("network has at least one layer")
    }

    /// Whether any parameter of this network received a gradient.
    pub fn touched(&self, grads: &Gradients) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .any(|&v| grads.get(v).is_some())
    }

    pub fn weight_vars(&self) -> &[Var] {
        &self.weights
    }
}

impl NetVars {
    /// Gradient in [`DenseNet::params_flat`] order; parameters that did not
    /// influence the loss get zero.
    pub fn flat_gradient(&self, grads: &Gradients, net: &DenseNet) -> Vec<f64> {
        let mut out = Vec::with_capacity(net.num_params());
        for l in 0..self.weights.len() {
            match grads.get(self.weights[l]) {
                Some(g) => out.extend(g.iter()),
                None => out.extend(std::iter::repeat_n(0.0, net.weights[l].len())),
            }
            match grads.get(self.biases[l]) {
                Some(g) => out.extend(g.iter()),
                None => out.extend(std::iter::repeat_n(0.0, net.biases[l].len())),
            }
        }
        out
    }
}

/// Free-form provenance stored alongside a model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub role: String,
    #[serde(default)]
    pub trained_on: Vec<String>,
}

/// On-disk model layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub in_shift: Vec<f64>,
    pub in_scale: Vec<f64>,
    pub out_shift: Vec<f64>,
    pub out_scale: Vec<f64>,
    #[serde(default)]
    pub meta: ModelMeta,
}

impl ModelFile {
    pub fn into_net(self) -> Result<(DenseNet, ModelMeta)> {
        validate_widths(&self.layer_widths)?;
        let nl = self.layer_widths.len() - 1;
        if self.weights.len() != nl || self.biases.len() != nl {
            return Err(Error::Config(format!(
                "model file lists {} weight and {} bias layers for {} widths",
                self.weights.len(),
                self.biases.len(),
                self.layer_widths.len()
            )));
        }
        let mut weights = Vec::with_capacity(nl);
        let mut biases = Vec::with_capacity(nl);
        for l in 0..nl {
            let (fan_in, fan_out) = (self.layer_widths[l], self.layer_widths[l + 1]);
            let w = Array2::from_shape_vec((fan_out, fan_in), self.weights[l].clone()).map_err(
                |_| Error::Config(format!("layer {l}: expected {fan_out}×{fan_in} weights")),
            )?;
            if self.biases[l].len() != fan_out {
                return Err(Error::Config(format!("layer {l}: expected {fan_out} biases")));
            }
            weights.push(w);
            biases.push(Array1::from(self.biases[l].clone()));
        }
        let mut net = DenseNet::from_parts(self.activation, weights, biases)?;
        net.set_input_normalizer(self.in_shift, self.in_scale)?;
        net.set_output_normalizer(self.out_shift, self.out_scale)?;
        Ok((net, self.meta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn init_rejects_bad_widths() {
        assert!(DenseNet::init(&[3], Activation::Tanh, 0).is_err());
        assert!(DenseNet::init(&[], Activation::Tanh, 0).is_err());
        assert!(DenseNet::init(&[2, 0, 1], Activation::Tanh, 0).is_err());
    }

    #[test]
    fn glorot_bound_for_single_weight() {
        for seed in 0..20 {
            let net = DenseNet::init(&[1, 1], Activation::Tanh, seed).unwrap();
            let w = net.weights()[0][[0, 0]];
            assert!(w.abs() <= 3f64.sqrt());
            assert_eq!(net.biases()[0][0], 0.0);
        }
    }

    #[test]
    fn same_seed_gives_identical_parameters() {
        let a = DenseNet::init(&[2, 20, 20, 20, 1], Activation::Tanh, 11).unwrap();
        let b = DenseNet::init(&[2, 20, 20, 20, 1], Activation::Tanh, 11).unwrap();
        let c = DenseNet::init(&[2, 20, 20, 20, 1], Activation::Tanh, 12).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
        assert_ne!(a.params_flat(), c.params_flat());
        assert_eq!(a.layer_widths(), &[2, 20, 20, 20, 1]);
    }

    #[test]
    fn identity_and_affine_nets() {
        let id = DenseNet::from_parts(
            Activation::Identity,
            vec![array![[1.0]]],
            vec![array![0.0]],
        )
        .unwrap();
        assert_eq!(id.forward(&[0.7]).unwrap(), vec![0.7]);
        let aff = DenseNet::from_parts(
            Activation::Identity,
            vec![array![[2.0]]],
            vec![array![1.0]],
        )
        .unwrap();
        assert_eq!(aff.forward(&[3.0]).unwrap(), vec![7.0]);
        assert!(aff.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn linear_net_jacobian_folds_normalizers() {
        let mut net = DenseNet::from_parts(
            Activation::Identity,
            vec![array![[1.0, -2.0], [0.5, 3.0]]],
            vec![array![0.1, 0.2]],
        )
        .unwrap();
        net.set_input_normalizer(vec![1.0, -1.0], vec![2.0, 4.0]).unwrap();
        net.set_output_normalizer(vec![0.0, 5.0], vec![3.0, 0.5]).unwrap();
        let (_, j) = net.forward_with_input_jacobian(&[0.3, 0.9]).unwrap();
        let expect = [[3.0 * 1.0 / 2.0, 3.0 * -2.0 / 4.0], [0.5 * 0.5 / 2.0, 0.5 * 3.0 / 4.0]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j[i][k] - expect[i][k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_tanh_derivative() {
        let net = DenseNet::from_parts(
            Activation::Tanh,
            vec![array![[1.3]], array![[1.0]]],
            vec![array![-0.2], array![0.0]],
        )
        .unwrap();
        let x = 0.4;
        let (y, j) = net.forward_with_input_jacobian(&[x]).unwrap();
        let t = (1.3 * x - 0.2f64).tanh();
        assert!((y[0] - t).abs() < 1e-15);
        assert!((j[0][0] - 1.3 * (1.0 - t * t)).abs() < 1e-15);
    }

    #[test]
    fn output_bounded_by_last_layer_weights() {
        let net = DenseNet::init(&[1, 15, 15, 15, 1], Activation::Tanh, 3).unwrap();
        let bound: f64 = net.weights()[3].iter().map(|w| w.abs()).sum::<f64>()
            + net.biases()[3].iter().map(|b| b.abs()).sum::<f64>();
        for i in 0..50 {
            let y = net.forward(&[-5.0 + 0.2 * i as f64]).unwrap()[0];
            assert!(y.is_finite() && y.abs() <= bound);
        }
    }

    #[test]
    fn batch_paths_agree_with_pointwise() {
        let mut net = DenseNet::init(&[2, 7, 5, 3], Activation::Softplus, 5).unwrap();
        net.set_input_normalizer(vec![0.5, -0.2], vec![1.5, 0.7]).unwrap();
        net.set_output_normalizer(vec![1.0, 2.0, 3.0], vec![0.2, 4.0, 1.0]).unwrap();
        let x = array![[0.1, 0.2], [-1.0, 0.4], [2.0, -0.3]];
        let yb = net.forward_batch(x.view()).unwrap();
        let (yj, tj) = net.forward_batch_with_jacobian(x.view()).unwrap();
        for r in 0..3 {
            let (y, j) = net.forward_with_input_jacobian(&x.row(r).to_vec()).unwrap();
            for i in 0..3 {
                assert!((yb[[r, i]] - y[i]).abs() < 1e-13);
                assert!((yj[[r, i]] - y[i]).abs() < 1e-13);
                for k in 0..2 {
                    assert!((tj[k][[r, i]] - j[i][k]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn normalizer_round_trip() {
        let mut net = DenseNet::init(&[3, 4, 1], Activation::Tanh, 0).unwrap();
        net.set_input_normalizer(vec![0.3, -7.0, 1e3], vec![0.01, 3.0, 250.0]).unwrap();
        let x = [0.123456789, -3.5, 1234.5];
        let back = net.denormalize_input(&net.normalize_input(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
        assert!(net.set_input_normalizer(vec![0.0; 3], vec![1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn flat_params_round_trip() {
        let mut net = DenseNet::init(&[2, 4, 1], Activation::Tanh, 9).unwrap();
        let mut p = net.params_flat();
        p.iter_mut().for_each(|v| *v += 1.0);
        net.set_params_flat(&p).unwrap();
        assert_eq!(net.params_flat(), p);
        assert!(net.set_params_flat(&p[1..]).is_err());
    }

    #[test]
    fn model_file_round_trip_is_bit_exact() {
        let mut net = DenseNet::init(&[2, 20, 20, 20, 1], Activation::Tanh, 4).unwrap();
        net.set_input_normalizer(vec![0.9, 1.7], vec![0.6, 1.1]).unwrap();
        net.set_output_normalizer(vec![0.4], vec![0.3]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net2.json");
        let meta = ModelMeta {
            role: "net2-eos".into(),
            trained_on: vec!["na-train-1".into()],
        };
        net.save(&path, meta.clone()).unwrap();
        let (back, meta_back) = DenseNet::load(&path).unwrap();
        assert_eq!(back, net);
        assert_eq!(meta_back, meta);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"layer_widths\""));
        assert!(text.contains("\"role\": \"net2-eos\""));
    }
}
