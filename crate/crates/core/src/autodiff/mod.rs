//! Small differentiation engine for dense networks.
//!
//! Forward-mode [`Dual`] numbers give input derivatives of a single
//! evaluation. The [`Tape`] records batched matrix operations, including the
//! arithmetic that propagates input tangents through a network, so parameter
//! gradients of losses containing `∂Û/∂t` and `∂Û/∂x` come out of one
//! reverse sweep (reverse-over-forward).

mod activation;
mod dual;
mod tape;

pub use activation::Activation;
pub use dual::{Dual, Scalar};
pub use tape::{Gradients, Matrix, Tape, Var};
