//! Finite-difference WENO-Z flux divergence with global Lax–Friedrichs splitting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::ConservedStateGrid;
use super::weno::{weno3z, weno5z};
use crate::closure::{sound_speed_from_partials, ClosureModel};
use crate::error::{Error, Result};

/// Spatial order of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum WenoOrder {
    Three,
    Five,
}

impl WenoOrder {
    pub fn ghost(self) -> usize {
        match self {
            WenoOrder::Three => 2,
            WenoOrder::Five => 3,
        }
    }
}

impl TryFrom<u8> for WenoOrder {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            3 => Ok(WenoOrder::Three),
            5 => Ok(WenoOrder::Five),
            _ => Err(Error::Config(format!("WENO order must be 3 or 5, got {v}"))),
        }
    }
}

impl From<WenoOrder> for u8 {
    fn from(o: WenoOrder) -> u8 {
        match o {
            WenoOrder::Three => 3,
            WenoOrder::Five => 5,
        }
    }
}

/// Counters for closure safeguards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EosCounters {
    pub p_clamps: usize,
    pub c_fallbacks: usize,
}

/// Primitive variables on every stored cell, ghosts included. `v` is empty in 1D.
#[derive(Debug, Clone, Default)]
pub struct Primitives {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
    pub c: Vec<f64>,
}

/// Recover primitives through the closure, clamping pressure at `p_floor`.
///
/// Fails if any stored cell has non-positive density.
pub fn primitives(
    state: &ConservedStateGrid,
    closure: &dyn ClosureModel,
    p_floor: f64,
    counters: &mut EosCounters,
) -> Result<Primitives> {
    let m = &state.mesh;
    let n = m.len();
    let two_d = m.dims == 2;
    let energy = &state.fields[state.ncomp() - 1];
    let mut pr = Primitives {
        rho: state.fields[0].clone(),
        u: vec![0.0; n],
        v: if two_d { vec![0.0; n] } else { Vec::new() },
        e: vec![0.0; n],
        p: vec![0.0; n],
        c: vec![0.0; n],
    };
    if let Some(k) = m.interior_indices().find(|&k| !(pr.rho[k] > 0.0)) {
        return Err(positivity(state, k, "density"));
    }
    for k in 0..n {
        let rho = pr.rho[k];
        if !(rho > 0.0) {
            return Err(positivity(state, k, "density"));
        }
        let u = state.fields[1][k] / rho;
        pr.u[k] = u;
        let mut kin = u * u;
        if two_d {
            let v = state.fields[2][k] / rho;
            pr.v[k] = v;
            kin += v * v;
        }
        pr.e[k] = energy[k] / rho - 0.5 * kin;
    }
    let mut partials = vec![vec![0.0; n]; 2];
    closure.eval_batch(&[&pr.rho, &pr.e], &mut pr.p, Some(&mut partials))?;
    for k in 0..n {
        if !pr.p[k].is_finite() {
            return Err(Error::Domain(format!(
                "closure returned non-finite pressure at rho={}, e={}",
                pr.rho[k], pr.e[k]
            )));
        }
        if pr.p[k] < p_floor {
            pr.p[k] = p_floor;
            counters.p_clamps += 1;
        }
        let s = sound_speed_from_partials(pr.rho[k], pr.p[k], partials[0][k], partials[1][k], p_floor);
        if s.fallback {
            counters.c_fallbacks += 1;
        }
        pr.c[k] = s.c;
    }
    Ok(pr)
}

pub(crate) fn positivity(state: &ConservedStateGrid, k: usize, what: &str) -> Error {
    let m = &state.mesh;
    let sx = m.sx();
    let (i, j) = (k % sx, k / sx);
    let cell = if m.dims == 2 {
        format!("({}, {})", i as i64 - m.ghost as i64, j as i64 - m.ghost as i64)
    } else {
        format!("{}", i as i64 - m.ghost as i64)
    };
    Error::Positivity {
        cell,
        time: state.t,
        what: what.to_string(),
    }
}

/// Largest `|u| + c` and `|v| + c`.
pub fn max_wave_speeds(pr: &Primitives) -> (f64, f64) {
    let ax = pr
        .u
        .iter()
        .zip(&pr.c)
        .fold(0.0f64, |a, (u, c)| a.max(u.abs() + c));
    let ay = pr
        .v
        .iter()
        .zip(&pr.c)
        .fold(0.0f64, |a, (v, c)| a.max(v.abs() + c));
    (ax, ay)
}

/// Scratch buffers for one line sweep.
#[derive(Debug, Default)]
pub(crate) struct LineScratch {
    fp: Vec<f64>,
    fm: Vec<f64>,
    h: Vec<f64>,
}

/// `out[k] -= (ĥ_{k+½} − ĥ_{k−½}) / dx` for the `n` interior cells of a line
/// with `g` ghosts on each side.
pub(crate) fn line_divergence(
    order: WenoOrder,
    u: &[f64],
    f: &[f64],
    alpha: f64,
    g: usize,
    inv_dx: f64,
    out: &mut [f64],
    sc: &mut LineScratch,
) {
    let len = u.len();
    let n = out.len();
    sc.fp.clear();
    sc.fm.clear();
    sc.fp.extend(u.iter().zip(f).map(|(u, f)| 0.5 * (f + alpha * u)));
    sc.fm.extend(u.iter().zip(f).map(|(u, f)| 0.5 * (f - alpha * u)));
    debug_assert_eq!(len, n + 2 * g);
    sc.h.clear();
    let (fp, fm) = (&sc.fp, &sc.fm);
    for i in g - 1..g + n {
        let flux = match order {
            WenoOrder::Five => {
                weno5z(&[fp[i - 2], fp[i - 1], fp[i], fp[i + 1], fp[i + 2]])
                    + weno5z(&[fm[i + 3], fm[i + 2], fm[i + 1], fm[i], fm[i - 1]])
            }
            WenoOrder::Three => {
                weno3z(&[fp[i - 1], fp[i], fp[i + 1]]) + weno3z(&[fm[i + 2], fm[i + 1], fm[i]])
            }
        };
        sc.h.push(flux);
    }
    for k in 0..n {
        out[k] -= (sc.h[k + 1] - sc.h[k]) * inv_dx;
    }
}

/// Physical flux in direction `dir` (0 = x, 1 = y) of component `comp`.
#[inline]
fn euler_flux(state: &ConservedStateGrid, pr: &Primitives, dir: usize, comp: usize, k: usize) -> f64 {
    let ncomp = state.ncomp();
    let vel = if dir == 0 { pr.u[k] } else { pr.v[k] };
    let q = state.fields[comp][k];
    let mut fl = vel * q;
    if comp == 1 + dir {
        fl += pr.p[k];
    } else if comp == ncomp - 1 {
        fl += vel * pr.p[k];
    }
    fl
}

/// Spatial operator `L(U) = −∂ₓF − ∂ᵧG` on interior cells.
///
/// Ghost cells of `state` must already be populated and `pr` computed from it.
/// Returns one interior-sized vector per component (row-major, x fastest).
pub fn euler_rhs(
    state: &ConservedStateGrid,
    pr: &Primitives,
    order: WenoOrder,
    alpha: (f64, f64),
) -> Vec<Vec<f64>> {
    let m = &state.mesh;
    let (nx, ny, g, sx) = (m.nx, m.ny, m.ghost, m.sx());
    let ncomp = state.ncomp();
    let mut out = vec![vec![0.0; nx * ny]; ncomp];

    // x sweeps, one per interior row
    let rows: Vec<Vec<f64>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let row = if m.dims == 2 { j + g } else { 0 };
            let base = row * sx;
            let mut sc = LineScratch::default();
            let mut res = vec![0.0; ncomp * nx];
            let mut fl = vec![0.0; sx];
            for comp in 0..ncomp {
                for (s, f) in fl.iter_mut().enumerate() {
                    *f = euler_flux(state, pr, 0, comp, base + s);
                }
                let u = &state.fields[comp][base..base + sx];
                line_divergence(
                    order,
                    u,
                    &fl,
                    alpha.0,
                    g,
                    1.0 / m.dx,
                    &mut res[comp * nx..(comp + 1) * nx],
                    &mut sc,
                );
            }
            res
        })
        .collect();
    for (j, res) in rows.iter().enumerate() {
        for comp in 0..ncomp {
            out[comp][j * nx..(j + 1) * nx].copy_from_slice(&res[comp * nx..(comp + 1) * nx]);
        }
    }

    if m.dims == 2 {
        let sy = m.sy();
        let cols: Vec<Vec<f64>> = (0..nx)
            .into_par_iter()
            .map(|i| {
                let col = i + g;
                let mut sc = LineScratch::default();
                let mut res = vec![0.0; ncomp * ny];
                let mut fl = vec![0.0; sy];
                let mut uc = vec![0.0; sy];
                for comp in 0..ncomp {
                    for s in 0..sy {
                        let k = s * sx + col;
                        fl[s] = euler_flux(state, pr, 1, comp, k);
                        uc[s] = state.fields[comp][k];
                    }
                    line_divergence(
                        order,
                        &uc,
                        &fl,
                        alpha.1,
                        g,
                        1.0 / m.dy,
                        &mut res[comp * ny..(comp + 1) * ny],
                        &mut sc,
                    );
                }
                res
            })
            .collect();
        for (i, res) in cols.iter().enumerate() {
            for comp in 0..ncomp {
                for j in 0..ny {
                    out[comp][j * nx + i] += res[comp * ny + j];
                }
            }
        }
    }
    out
}

/// Periodic linear advection `q_t + a q_x = 0` with the same reconstruction,
/// flux splitting and time integrator as the Euler solver.
pub fn advect_scalar_periodic(
    q0: &[f64],
    speed: f64,
    order: WenoOrder,
    dx: f64,
    dt: f64,
    steps: usize,
) -> Vec<f64> {
    let n = q0.len();
    let g = order.ghost();
    let alpha = speed.abs();
    let mut sc = LineScratch::default();
    let mut ext = vec![0.0; n + 2 * g];
    let mut rhs = |q: &[f64]| {
        for (s, v) in ext.iter_mut().enumerate() {
            *v = q[(s + n - g) % n];
        }
        let fl: Vec<f64> = ext.iter().map(|v| speed * v).collect();
        let mut out = vec![0.0; n];
        line_divergence(order, &ext, &fl, alpha, g, 1.0 / dx, &mut out, &mut sc);
        out
    };
    let mut q = q0.to_vec();
    for _ in 0..steps {
        let l0 = rhs(&q);
        let q1: Vec<f64> = q.iter().zip(&l0).map(|(a, l)| a + dt * l).collect();
        let l1 = rhs(&q1);
        let q2: Vec<f64> = (0..n)
            .map(|k| 0.75 * q[k] + 0.25 * (q1[k] + dt * l1[k]))
            .collect();
        let l2 = rhs(&q2);
        q = (0..n)
            .map(|k| q[k] / 3.0 + 2.0 / 3.0 * (q2[k] + dt * l2[k]))
            .collect();
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::AnalyticEos;
    use crate::solver::grid::{Boundaries, Boundary, Mesh};

    #[test]
    fn order_round_trips_through_u8() {
        assert_eq!(WenoOrder::try_from(5).unwrap(), WenoOrder::Five);
        assert!(WenoOrder::try_from(4).is_err());
        assert_eq!(u8::from(WenoOrder::Three), 3);
        assert_eq!(WenoOrder::Five.ghost(), 3);
    }

    #[test]
    fn uniform_flow_has_zero_divergence() {
        let eos = AnalyticEos::ideal(1.4).unwrap();
        for order in [WenoOrder::Three, WenoOrder::Five] {
            let m = Mesh::new_2d((0.0, 1.0), (0.0, 1.0), 6, 5, order.ghost()).unwrap();
            let mut s = ConservedStateGrid::zeros(m);
            for j in 0..5 {
                for i in 0..6 {
                    s.set_primitive(i, j, 1.3, 0.4, -0.2, 2.0);
                }
            }
            s.fill_ghosts(&Boundaries::uniform(Boundary::Periodic));
            let pr = primitives(&s, &eos, 1e-8, &mut EosCounters::default()).unwrap();
            let a = max_wave_speeds(&pr);
            let r = euler_rhs(&s, &pr, order, a);
            assert!(r.iter().flatten().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn nonpositive_density_is_reported_with_cell() {
        let eos = AnalyticEos::ideal(1.4).unwrap();
        let m = Mesh::new_1d((0.0, 1.0), 4, 2).unwrap();
        let mut s = ConservedStateGrid::zeros(m);
        for i in 0..4 {
            s.set_primitive(i, 0, if i == 2 { -0.1 } else { 1.0 }, 0.0, 0.0, 1.0);
        }
        s.fill_ghosts(&Boundaries::uniform(Boundary::Periodic));
        match primitives(&s, &eos, 1e-8, &mut EosCounters::default()) {
            Err(Error::Positivity { cell, .. }) => assert_eq!(cell, "2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pressure_floor_is_counted() {
        let eos = AnalyticEos::ideal(1.4).unwrap();
        let m = Mesh::new_1d((0.0, 1.0), 4, 2).unwrap();
        let mut s = ConservedStateGrid::zeros(m);
        for i in 0..4 {
            s.set_primitive(i, 0, 1.0, 0.0, 0.0, if i == 1 { -1.0 } else { 1.0 });
        }
        s.fill_ghosts(&Boundaries::uniform(Boundary::Extrapolation));
        let mut cnt = EosCounters::default();
        let pr = primitives(&s, &eos, 1e-8, &mut cnt).unwrap();
        assert_eq!(cnt.p_clamps, 1);
        assert_eq!(pr.p[3], 1e-8);
    }

    #[test]
    fn scalar_advection_period_returns_profile() {
        let n = 64;
        let dx = 1.0 / n as f64;
        let q0: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * (i as f64 + 0.5) * dx).sin())
            .collect();
        let steps = 256;
        let q = advect_scalar_periodic(&q0, 1.0, WenoOrder::Five, dx, 1.0 / steps as f64, steps);
        let err = q.iter().zip(&q0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }
}
