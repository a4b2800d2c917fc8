//! Exact Riemann solver for the ideal-gas Euler equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const P_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl PrimitiveState {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }

    fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }
}

/// Nonlinear wave separating an outer state from the star region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Shock { speed: f64 },
    Rarefaction { head: f64, tail: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannSolution {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
}

/// `f_K(p)` and its derivative.
fn pressure_function(p: f64, k: &PrimitiveState, gamma: f64) -> (f64, f64) {
    let c = k.sound_speed(gamma);
    if p > k.p {
        let a = 2.0 / ((gamma + 1.0) * k.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * k.p;
        let q = (a / (p + b)).sqrt();
        ((p - k.p) * q, q * (1.0 - 0.5 * (p - k.p) / (b + p)))
    } else {
        let r = p / k.p;
        let ex = (gamma - 1.0) / (2.0 * gamma);
        (
            2.0 * c / (gamma - 1.0) * (r.powf(ex) - 1.0),
            r.powf(-(gamma + 1.0) / (2.0 * gamma)) / (k.rho * c),
        )
    }
}

fn star_density(p_star: f64, k: &PrimitiveState, gamma: f64) -> f64 {
    let r = p_star / k.p;
    if p_star > k.p {
        let g = (gamma - 1.0) / (gamma + 1.0);
        k.rho * (r + g) / (g * r + 1.0)
    } else {
        k.rho * r.powf(1.0 / gamma)
    }
}

/// Solve the Riemann problem with Newton iteration on the star pressure.
pub fn exact_riemann_solver(
    left: PrimitiveState,
    right: PrimitiveState,
    gamma: f64,
) -> Result<RiemannSolution> {
    for s in [&left, &right] {
        if !(s.rho > 0.0 && s.p > 0.0) {
            return Err(Error::Domain(format!(
                "Riemann states need positive density and pressure, got {s:?}"
            )));
        }
    }
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    let (cl, cr) = (left.sound_speed(gamma), right.sound_speed(gamma));
    let du = right.u - left.u;
    if 2.0 * (cl + cr) / (gamma - 1.0) <= du {
        return Err(Error::Vacuum);
    }

    // two-rarefaction guess
    let ex = (gamma - 1.0) / (2.0 * gamma);
    let mut p = ((cl + cr - 0.5 * (gamma - 1.0) * du)
        / (cl / left.p.powf(ex) + cr / right.p.powf(ex)))
    .powf(1.0 / ex);
    p = p.max(1e-14);
    let mut converged = false;
    for _ in 0..MAX_NEWTON {
        let (fl, dfl) = pressure_function(p, &left, gamma);
        let (fr, dfr) = pressure_function(p, &right, gamma);
        let next = (p - (fl + fr + du) / (dfl + dfr)).max(1e-14);
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < P_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Domain(
            "Newton iteration for the star pressure did not converge".into(),
        ));
    }
    let (fl, _) = pressure_function(p, &left, gamma);
    let (fr, _) = pressure_function(p, &right, gamma);
    let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    let rho_l = star_density(p, &left, gamma);
    let rho_r = star_density(p, &right, gamma);

    let left_wave = if p > left.p {
        let ms = ((gamma + 1.0) / (2.0 * gamma) * p / left.p + ex).sqrt();
        Wave::Shock {
            speed: left.u - cl * ms,
        }
    } else {
        let c_star = cl * (p / left.p).powf(ex);
        Wave::Rarefaction {
            head: left.u - cl,
            tail: u_star - c_star,
        }
    };
    let right_wave = if p > right.p {
        let ms = ((gamma + 1.0) / (2.0 * gamma) * p / right.p + ex).sqrt();
        Wave::Shock {
            speed: right.u + cr * ms,
        }
    } else {
        let c_star = cr * (p / right.p).powf(ex);
        Wave::Rarefaction {
            head: right.u + cr,
            tail: u_star + c_star,
        }
    };
    Ok(RiemannSolution {
        left,
        right,
        gamma,
        p_star: p,
        u_star,
        rho_star_left: rho_l,
        rho_star_right: rho_r,
        left_wave,
        right_wave,
    })
}

impl RiemannSolution {
    /// State at similarity coordinate `xi = (x − x₀)/t`.
    pub fn sample(&self, xi: f64) -> PrimitiveState {
        let g = self.gamma;
        if xi <= self.u_star {
            let k = &self.left;
            match self.left_wave {
                Wave::Shock { speed } => {
                    if xi <= speed {
                        *k
                    } else {
                        PrimitiveState::new(self.rho_star_left, self.u_star, self.p_star)
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi <= head {
                        *k
                    } else if xi >= tail {
                        PrimitiveState::new(self.rho_star_left, self.u_star, self.p_star)
                    } else {
                        let c = k.sound_speed(g);
                        let base = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (k.u - xi);
                        PrimitiveState::new(
                            k.rho * base.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * k.u + xi),
                            k.p * base.powf(2.0 * g / (g - 1.0)),
                        )
                    }
                }
            }
        } else {
            let k = &self.right;
            match self.right_wave {
                Wave::Shock { speed } => {
                    if xi >= speed {
                        *k
                    } else {
                        PrimitiveState::new(self.rho_star_right, self.u_star, self.p_star)
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi >= head {
                        *k
                    } else if xi <= tail {
                        PrimitiveState::new(self.rho_star_right, self.u_star, self.p_star)
                    } else {
                        let c = k.sound_speed(g);
                        let base = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * c) * (k.u - xi);
                        PrimitiveState::new(
                            k.rho * base.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * k.u + xi),
                            k.p * base.powf(2.0 * g / (g - 1.0)),
                        )
                    }
                }
            }
        }
    }
}

/// One-shot solve and sample at `xi = x/t`.
pub fn exact_riemann_sample(
    left: PrimitiveState,
    right: PrimitiveState,
    gamma: f64,
    xi: f64,
) -> Result<PrimitiveState> {
    Ok(exact_riemann_solver(left, right, gamma)?.sample(xi))
}
