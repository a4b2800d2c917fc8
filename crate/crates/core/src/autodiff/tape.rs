use ndarray::{Array2, Axis, Zip};

use super::Activation;
use crate::error::{Error, Result};

/// Batched values on the tape: rows are sample points, columns are features.
pub type Matrix = Array2<f64>;

/// Handle to a node recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    /// `a · bᵀ`
    MatMulT(Var, Var),
    /// `a + b` with `b` a single row broadcast over the batch.
    AddRow(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    MulConst(Var, Matrix),
    ScaleCols(Var, Vec<f64>),
    ShiftCols(Var),
    Activate(Var, Activation),
    ActivateDeriv(Var, Activation),
    /// `1 − h²` for `h = tanh(a)`, recorded alongside `h`.
    TanhSlope(Var, Var),
    Abs(Var),
    Square(Var),
    Recip(Var),
    Column(Var, usize),
    Concat(Vec<Var>),
    Sum(Var),
    Mean(Var),
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    op: Op,
    requires_grad: bool,
}

/// Reverse-mode tape over batched matrix operations.
///
/// A tape belongs to a single training step. [`Tape::backward`] consumes the
/// recorded graph and leaves the tape empty.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to the trainable leaves of a tape.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    /// Gradient for `v`, or `None` when `v` is not a trainable leaf or does
    /// not influence the loss.
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// A constant input. No gradient is accumulated for it.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A trainable leaf.
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A constant column vector.
    pub fn column_constant(&mut self, values: &[f64]) -> Var {
        let m = Array2::from_shape_vec((values.len(), 1), values.to_vec())
            .expect("column shape matches length");
        self.constant(m)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Value of a 1×1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[[0, 0]]
    }

    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).dot(&self.value(b).t());
        let rg = self.needs(a) || self.needs(b);
        self.push(value, Op::MatMulT(a, b), rg)
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let value = self.value(a) + self.value(row);
        let rg = self.needs(a) || self.needs(row);
        self.push(value, Op::AddRow(a, row), rg)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) + self.value(b);
        let rg = self.needs(a) || self.needs(b);
        self.push(value, Op::Add(a, b), rg)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) - self.value(b);
        let rg = self.needs(a) || self.needs(b);
        self.push(value, Op::Sub(a, b), rg)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) * self.value(b);
        let rg = self.needs(a) || self.needs(b);
        self.push(value, Op::Mul(a, b), rg)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a) * c;
        let rg = self.needs(a);
        self.push(value, Op::Scale(a, c), rg)
    }

    /// `a + c` elementwise.
    pub fn offset(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a) + c;
        let rg = self.needs(a);
        self.push(value, Op::Offset(a), rg)
    }

    /// Elementwise product with a constant of the same shape.
    pub fn mul_const(&mut self, a: Var, m: Matrix) -> Var {
        let value = self.value(a) * &m;
        let rg = self.needs(a);
        self.push(value, Op::MulConst(a, m), rg)
    }

    /// Multiply column `j` by `s[j]`.
    pub fn scale_cols(&mut self, a: Var, s: &[f64]) -> Var {
        let mut value = self.value(a).clone();
        for (mut col, &f) in value.axis_iter_mut(Axis(1)).zip(s) {
            col *= f;
        }
        let rg = self.needs(a);
        self.push(value, Op::ScaleCols(a, s.to_vec()), rg)
    }

    /// Add `s[j]` to column `j`.
    pub fn shift_cols(&mut self, a: Var, s: &[f64]) -> Var {
        let mut value = self.value(a).clone();
        for (mut col, &f) in value.axis_iter_mut(Axis(1)).zip(s) {
            col += f;
        }
        let rg = self.needs(a);
        self.push(value, Op::ShiftCols(a), rg)
    }

    pub fn activate(&mut self, a: Var, act: Activation) -> Var {
        let value = self.value(a).mapv(|z| act.apply(z));
        let rg = self.needs(a);
        self.push(value, Op::Activate(a, act), rg)
    }

    /// Elementwise activation slope σ'(a), itself differentiable.
    pub fn activate_deriv(&mut self, a: Var, act: Activation) -> Var {
        let value = self.value(a).mapv(|z| act.derivative(z));
        let rg = self.needs(a) && act != Activation::Identity;
        self.push(value, Op::ActivateDeriv(a, act), rg)
    }

    /// Activation `σ(a)` and slope `σ'(a)` with the nonlinearity evaluated once.
    pub fn activate_with_slope(&mut self, a: Var, act: Activation) -> (Var, Var) {
        if act != Activation::Tanh {
            let slope = self.activate_deriv(a, act);
            return (self.activate(a, act), slope);
        }
        let h = self.activate(a, act);
        let value = self.value(h).mapv(|t| 1.0 - t * t);
        let rg = self.needs(a);
        let slope = self.push(value, Op::TanhSlope(a, h), rg);
        (h, slope)
    }

    pub fn abs(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::abs);
        let rg = self.needs(a);
        self.push(value, Op::Abs(a), rg)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(|x| x * x);
        let rg = self.needs(a);
        self.push(value, Op::Square(a), rg)
    }

    pub fn recip(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(|x| 1.0 / x);
        let rg = self.needs(a);
        self.push(value, Op::Recip(a), rg)
    }

    pub fn column(&mut self, a: Var, j: usize) -> Var {
        let value = self.value(a).column(j).to_owned().insert_axis(Axis(1));
        let rg = self.needs(a);
        self.push(value, Op::Column(a, j), rg)
    }

    /// Horizontal concatenation of equally tall blocks.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let value = ndarray::concatenate(Axis(1), &views).expect("concat blocks share row count");
        let rg = parts.iter().any(|&p| self.needs(p));
        self.push(value, Op::Concat(parts.to_vec()), rg)
    }

    /// Sum of all entries, as a 1×1 node.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        let rg = self.needs(a);
        self.push(Array2::from_elem((1, 1), s), Op::Sum(a), rg)
    }

    /// Mean of all entries, as a 1×1 node. The mean of an empty node is 0.
    pub fn mean(&mut self, a: Var) -> Var {
        let v = self.value(a);
        let m = if v.is_empty() { 0.0 } else { v.sum() / v.len() as f64 };
        let rg = self.needs(a);
        self.push(Array2::from_elem((1, 1), m), Op::Mean(a), rg)
    }

    /// Reverse sweep from the 1×1 node `loss`. Returns gradients for every
    /// trainable leaf and clears the tape.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients> {
        let n = self.nodes.len();
        if loss.0 >= n {
            return Err(Error::Tape(format!(
                "loss node {} is not on the tape ({} nodes)",
                loss.0, n
            )));
        }
        if self.nodes[loss.0].value.dim() != (1, 1) {
            return Err(Error::Tape(format!(
                "loss node must be scalar, found shape {:?}",
                self.nodes[loss.0].value.dim()
            )));
        }
        let mut grads: Vec<Option<Matrix>> = Vec::with_capacity(n);
        grads.resize_with(n, || None);
        grads[loss.0] = Some(Array2::from_elem((1, 1), 1.0));

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads);
        }

        // Only trainable leaves keep their gradients.
        for (node, g) in self.nodes.iter().zip(grads.iter_mut()) {
            if !(matches!(node.op, Op::Leaf) && node.requires_grad) {
                *g = None;
            }
        }
        self.nodes.clear();
        Ok(Gradients { grads })
    }

    fn propagate(&self, i: usize, g: &Matrix, grads: &mut [Option<Matrix>]) {
        let node = &self.nodes[i];
        match &node.op {
            Op::Leaf => {}
            Op::MatMulT(a, b) => {
                if self.needs(*a) {
                    accumulate(grads, *a, g.dot(self.value(*b)));
                }
                if self.needs(*b) {
                    accumulate(grads, *b, g.t().dot(self.value(*a)));
                }
            }
            Op::AddRow(a, row) => {
                if self.needs(*a) {
                    accumulate_ref(grads, *a, g);
                }
                if self.needs(*row) {
                    accumulate(grads, *row, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                }
            }
            Op::Add(a, b) => {
                if self.needs(*a) {
                    accumulate_ref(grads, *a, g);
                }
                if self.needs(*b) {
                    accumulate_ref(grads, *b, g);
                }
            }
            Op::Sub(a, b) => {
                if self.needs(*a) {
                    accumulate_ref(grads, *a, g);
                }
                if self.needs(*b) {
                    accumulate(grads, *b, -g);
                }
            }
            Op::Mul(a, b) => {
                if self.needs(*a) {
                    accumulate(grads, *a, g * self.value(*b));
                }
                if self.needs(*b) {
                    accumulate(grads, *b, g * self.value(*a));
                }
            }
            Op::Scale(a, c) => accumulate(grads, *a, g * *c),
            Op::Offset(a) | Op::ShiftCols(a) => accumulate_ref(grads, *a, g),
            Op::MulConst(a, m) => accumulate(grads, *a, g * m),
            Op::ScaleCols(a, s) => {
                let mut d = g.clone();
                for (mut col, &f) in d.axis_iter_mut(Axis(1)).zip(s) {
                    col *= f;
                }
                accumulate(grads, *a, d);
            }
            Op::Activate(a, act) => {
                let act = *act;
                let mut d = g.clone();
                if act == Activation::Tanh {
                    Zip::from(&mut d)
                        .and(&node.value)
                        .for_each(|d, &t| *d *= 1.0 - t * t);
                } else {
                    Zip::from(&mut d)
                        .and(self.value(*a))
                        .for_each(|d, &z| *d *= act.derivative(z));
                }
                accumulate(grads, *a, d);
            }
            Op::TanhSlope(a, h) => {
                let mut d = g.clone();
                Zip::from(&mut d)
                    .and(self.value(*h))
                    .and(&node.value)
                    .for_each(|d, &t, &s| *d *= -2.0 * t * s);
                accumulate(grads, *a, d);
            }
            Op::ActivateDeriv(a, act) => {
                let act = *act;
                let mut d = g.clone();
                Zip::from(&mut d)
                    .and(self.value(*a))
                    .for_each(|d, &z| *d *= act.second_derivative(z));
                accumulate(grads, *a, d);
            }
            Op::Abs(a) => {
                let mut d = g.clone();
                Zip::from(&mut d).and(self.value(*a)).for_each(|d, &x| {
                    *d *= if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                });
                accumulate(grads, *a, d);
            }
            Op::Square(a) => {
                let mut d = g * self.value(*a);
                d *= 2.0;
                accumulate(grads, *a, d);
            }
            Op::Recip(a) => {
                let mut d = g.clone();
                Zip::from(&mut d)
                    .and(&node.value)
                    .for_each(|d, &r| *d *= -r * r);
                accumulate(grads, *a, d);
            }
            Op::Column(a, j) => {
                let mut d = Array2::zeros(self.value(*a).dim());
                d.column_mut(*j).assign(&g.column(0));
                accumulate(grads, *a, d);
            }
            Op::Concat(parts) => {
                let mut start = 0;
                for &p in parts {
                    let w = self.value(p).ncols();
                    if self.needs(p) {
                        let block = g.slice(ndarray::s![.., start..start + w]).to_owned();
                        accumulate(grads, p, block);
                    }
                    start += w;
                }
            }
            Op::Sum(a) => {
                let d = Array2::from_elem(self.value(*a).dim(), g[[0, 0]]);
                accumulate(grads, *a, d);
            }
            Op::Mean(a) => {
                let v = self.value(*a);
                if !v.is_empty() {
                    let d = Array2::from_elem(v.dim(), g[[0, 0]] / v.len() as f64);
                    accumulate(grads, *a, d);
                }
            }
        }
    }
}

fn accumulate(grads: &mut [Option<Matrix>], v: Var, d: Matrix) {
    match &mut grads[v.0] {
        Some(acc) => *acc += &d,
        slot @ None => *slot = Some(d),
    }
}

fn accumulate_ref(grads: &mut [Option<Matrix>], v: Var, d: &Matrix) {
    match &mut grads[v.0] {
        Some(acc) => *acc += d,
        slot @ None => *slot = Some(d.clone()),
    }
}
