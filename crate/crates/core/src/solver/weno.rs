//! WENO-Z reconstruction of a left-biased interface value.
//!
//! For a stencil centred on cell `i`, the reconstruction approximates the
//! value at `i + 1/2`. Right-biased values are obtained by passing the
//! mirrored stencil.

use crate::error::{Error, Result};

/// Small constant in the nonlinear weight denominators.
pub const WENO_EPS: f64 = 1e-40;

const D5: [f64; 3] = [0.1, 0.6, 0.3];
const D3: [f64; 2] = [1.0 / 3.0, 2.0 / 3.0];

#[inline]
fn z_weight(d: f64, tau: f64, beta: f64) -> f64 {
    let r = tau / (beta + WENO_EPS);
    d * (1.0 + r * r)
}

/// Normalized nonlinear weights of the fifth-order scheme.
#[inline]
pub fn weno5z_weights(v: &[f64; 5]) -> [f64; 3] {
    let b0 = 13.0 / 12.0 * (v[0] - 2.0 * v[1] + v[2]).powi(2)
        + 0.25 * (v[0] - 4.0 * v[1] + 3.0 * v[2]).powi(2);
    let b1 = 13.0 / 12.0 * (v[1] - 2.0 * v[2] + v[3]).powi(2) + 0.25 * (v[1] - v[3]).powi(2);
    let b2 = 13.0 / 12.0 * (v[2] - 2.0 * v[3] + v[4]).powi(2)
        + 0.25 * (3.0 * v[2] - 4.0 * v[3] + v[4]).powi(2);
    let tau = (b0 - b2).abs();
    let a = [
        z_weight(D5[0], tau, b0),
        z_weight(D5[1], tau, b1),
        z_weight(D5[2], tau, b2),
    ];
    let s = a[0] + a[1] + a[2];
    [a[0] / s, a[1] / s, a[2] / s]
}

#[inline]
pub fn weno5z(v: &[f64; 5]) -> f64 {
    let w = weno5z_weights(v);
    let q0 = (2.0 * v[0] - 7.0 * v[1] + 11.0 * v[2]) / 6.0;
    let q1 = (-v[1] + 5.0 * v[2] + 2.0 * v[3]) / 6.0;
    let q2 = (2.0 * v[2] + 5.0 * v[3] - v[4]) / 6.0;
    w[0] * q0 + w[1] * q1 + w[2] * q2
}

/// Normalized nonlinear weights of the third-order scheme.
#[inline]
pub fn weno3z_weights(v: &[f64; 3]) -> [f64; 2] {
    let b0 = (v[1] - v[0]).powi(2);
    let b1 = (v[2] - v[1]).powi(2);
    let tau = (b0 - b1).abs();
    let a = [z_weight(D3[0], tau, b0), z_weight(D3[1], tau, b1)];
    let s = a[0] + a[1];
    [a[0] / s, a[1] / s]
}

#[inline]
pub fn weno3z(v: &[f64; 3]) -> f64 {
    let w = weno3z_weights(v);
    let q0 = -0.5 * v[0] + 1.5 * v[1];
    let q1 = 0.5 * v[1] + 0.5 * v[2];
    w[0] * q0 + w[1] * q1
}

/// Reconstruct from a `2r − 1` point stencil, `r ∈ {2, 3}`.
pub fn weno_z_reconstruct(stencil: &[f64]) -> Result<f64> {
    match stencil.len() {
        3 => Ok(weno3z(&[stencil[0], stencil[1], stencil[2]])),
        5 => Ok(weno5z(&[
            stencil[0], stencil[1], stencil[2], stencil[3], stencil[4],
        ])),
        n => Err(Error::Config(format!(
            "WENO-Z stencil must have 3 or 5 points, got {n}"
        ))),
    }
}
