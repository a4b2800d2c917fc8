//! Physics-informed loss terms of the series-parallel network system.
//!
//! Each case contributes PDE, initial/boundary, data, Rankine–Hugoniot and
//! global-conservation terms computed from its own state network (Net1) and
//! the shared closure network (Net2). Everything is recorded on a [`Tape`],
//! including the input tangents that carry `∂/∂t` and `∂/∂x`, so a single
//! reverse sweep yields parameter gradients.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Matrix, Tape, Var};
use crate::cases::DataPoint;
use crate::error::{Error, Result};
use crate::net::NetVars;

fn default_weight_pde() -> f64 {
    1.0
}
fn default_weight_ibcs() -> f64 {
    10.0
}
fn default_weight_data() -> f64 {
    10.0
}
fn default_weight_rh() -> f64 {
    1.0
}
fn default_weight_cons() -> f64 {
    1.0
}
fn default_reg() -> f64 {
    1e-6
}
fn default_k() -> f64 {
    0.2
}
fn default_eps() -> f64 {
    0.1
}
fn default_rh_fraction() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    #[serde(default = "default_weight_pde")]
    pub pde: f64,
    #[serde(default = "default_weight_ibcs")]
    pub ibcs: f64,
    #[serde(default = "default_weight_data")]
    pub data: f64,
    #[serde(default = "default_weight_rh")]
    pub rh: f64,
    #[serde(default = "default_weight_cons")]
    pub cons: f64,
    /// Coefficient of Σw² over the closure network's weights.
    #[serde(default = "default_reg")]
    pub reg: f64,
    /// Constant of the compression weight λ.
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_eps")]
    pub eps1: f64,
    #[serde(default = "default_eps")]
    pub eps2: f64,
    /// RH pair offset as a fraction of the spatial domain length.
    #[serde(default = "default_rh_fraction")]
    pub rh_dx_fraction: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            pde: default_weight_pde(),
            ibcs: default_weight_ibcs(),
            data: default_weight_data(),
            rh: default_weight_rh(),
            cons: default_weight_cons(),
            reg: default_reg(),
            k: default_k(),
            eps1: default_eps(),
            eps2: default_eps(),
            rh_dx_fraction: default_rh_fraction(),
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.pde, self.ibcs, self.data, self.rh, self.cons, self.reg, self.eps1, self.eps2,
        ];
        if all.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("loss weights must be non-negative".into()));
        }
        if !(self.k > 0.0) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        if !(self.rh_dx_fraction > 0.0) {
            return Err(Error::Config("RH offset fraction must be positive".into()));
        }
        Ok(())
    }
}

/// Initial-condition target in the state network's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcPoint {
    pub t: f64,
    pub x: f64,
    pub target: Vec<f64>,
}

/// Boundary sample for the conservation flux term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub t: f64,
    pub x: f64,
    /// Outward unit normal (±1 in 1D).
    pub normal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationSet {
    pub t1: f64,
    pub t2: f64,
    /// Interior abscissae, shared by both time slices.
    pub xs: Vec<f64>,
    /// Domain measure.
    pub volume: f64,
    pub boundary: Vec<BoundarySample>,
    /// Boundary measure (2 end points in 1D).
    pub area: f64,
}

/// Training points of one case.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualPointSets {
    /// `(t, x)` residual points; `x` is ignored for the toy system.
    pub pde: Vec<[f64; 2]>,
    /// Left points of RH pairs; partners sit at `x + rh_dx` (wrapped when periodic).
    pub rh: Vec<[f64; 2]>,
    pub rh_dx: f64,
    pub ic: Vec<IcPoint>,
    /// Times of periodic boundary pairs `(t, x_lo)`–`(t, x_hi)`.
    pub bc: Vec<f64>,
    pub x_range: (f64, f64),
    pub periodic: bool,
    pub data: Vec<DataPoint>,
    pub con: Option<ConservationSet>,
}

/// `λ = 1 / (k(|d| − d) + 1)` for a velocity divergence `d`.
pub fn lambda_weight(div_u: f64, k: f64) -> f64 {
    1.0 / (k * (div_u.abs() - div_u) + 1.0)
}

fn lambda_on_tape(tape: &mut Tape, div_u: Var, k: f64) -> Var {
    let a = tape.abs(div_u);
    let d = tape.sub(a, div_u);
    let s = tape.scale(d, k);
    let den = tape.offset(s, 1.0);
    tape.recip(den)
}

/// Pointwise primitive state with its first derivatives in `t` and `x`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerSample {
    pub rho: f64,
    pub u: f64,
    pub e: f64,
    pub p: f64,
    pub rho_t: f64,
    pub u_t: f64,
    pub e_t: f64,
    pub p_t: f64,
    pub rho_x: f64,
    pub u_x: f64,
    pub e_x: f64,
    pub p_x: f64,
}

impl EulerSample {
    /// `λ(∂ₜU + ∂ₓF)` for `U = (ρ, ρu, E)`, `F = (ρu, ρu² + p, u(E + p))`.
    pub fn residual(&self, k: f64) -> [f64; 3] {
        let s = self;
        let big_e = s.rho * s.e + 0.5 * s.rho * s.u * s.u;
        let e_t = s.rho_t * s.e + s.rho * s.e_t + 0.5 * s.rho_t * s.u * s.u + s.rho * s.u * s.u_t;
        let e_x = s.rho_x * s.e + s.rho * s.e_x + 0.5 * s.rho_x * s.u * s.u + s.rho * s.u * s.u_x;
        let lam = lambda_weight(s.u_x, k);
        [
            lam * (s.rho_t + s.rho_x * s.u + s.rho * s.u_x),
            lam * (s.rho_t * s.u
                + s.rho * s.u_t
                + s.rho_x * s.u * s.u
                + 2.0 * s.rho * s.u * s.u_x
                + s.p_x),
            lam * (e_t + s.u_x * (big_e + s.p) + s.u * (e_x + s.p_x)),
        ]
    }
}

/// Columns (`B × 1`) of a primitive state on the tape.
#[derive(Debug, Clone, Copy)]
pub struct StateCols {
    pub rho: Var,
    pub u: Var,
    pub e: Var,
    pub p: Var,
}

/// State columns with their `t` and `x` derivatives.
#[derive(Debug, Clone, Copy)]
pub struct FieldVars {
    pub value: StateCols,
    pub dt: StateCols,
    pub dx: StateCols,
}

fn points_matrix(points: &[[f64; 2]]) -> Matrix {
    let flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    Array2::from_shape_vec((points.len(), 2), flat).expect("two columns per point")
}

fn time_matrix(points: &[[f64; 2]]) -> Matrix {
    Array2::from_shape_vec((points.len(), 1), points.iter().map(|p| p[0]).collect())
        .expect("one column per point")
}

fn split3(tape: &mut Tape, m: Var) -> (Var, Var, Var) {
    (tape.column(m, 0), tape.column(m, 1), tape.column(m, 2))
}

/// Net1 state `(ρ, u, e)` and Net2 pressure at `(t, x)` points.
pub fn euler_state(tape: &mut Tape, net1: &NetVars, net2: &NetVars, points: &[[f64; 2]]) -> StateCols {
    let x = tape.constant(points_matrix(points));
    let out = net1.forward(tape, x, &[]);
    let (rho, u, e) = split3(tape, out.value);
    let re = tape.concat_cols(&[rho, e]);
    let p = net2.forward(tape, re, &[]).value;
    StateCols { rho, u, e, p }
}

/// Net1 state and Net2 pressure with `∂/∂t`, `∂/∂x`; pressure derivatives
/// follow from the chain rule through Net2's input tangents.
pub fn euler_fields(tape: &mut Tape, net1: &NetVars, net2: &NetVars, points: &[[f64; 2]]) -> FieldVars {
    let x = tape.constant(points_matrix(points));
    let out = net1.forward_with_unit_tangents(tape, x, &[0, 1]);
    let (rho, u, e) = split3(tape, out.value);
    let (rho_t, u_t, e_t) = split3(tape, out.tangents[0]);
    let (rho_x, u_x, e_x) = split3(tape, out.tangents[1]);
    let re = tape.concat_cols(&[rho, e]);
    let re_t = tape.concat_cols(&[rho_t, e_t]);
    let re_x = tape.concat_cols(&[rho_x, e_x]);
    let pout = net2.forward(tape, re, &[re_t, re_x]);
    FieldVars {
        value: StateCols {
            rho,
            u,
            e,
            p: pout.value,
        },
        dt: StateCols {
            rho: rho_t,
            u: u_t,
            e: e_t,
            p: pout.tangents[0],
        },
        dx: StateCols {
            rho: rho_x,
            u: u_x,
            e: e_x,
            p: pout.tangents[1],
        },
    }
}

/// Total energy `E = ρe + ½ρu²`.
fn total_energy(tape: &mut Tape, s: &StateCols) -> Var {
    let re = tape.mul(s.rho, s.e);
    let uu = tape.mul(s.u, s.u);
    let ruu = tape.mul(s.rho, uu);
    let half = tape.scale(ruu, 0.5);
    tape.add(re, half)
}

/// Product-rule derivative of `E` given the direction's derivatives `d`.
fn energy_derivative(tape: &mut Tape, s: &StateCols, d: &StateCols) -> Var {
    let a = tape.mul(d.rho, s.e);
    let b = tape.mul(s.rho, d.e);
    let uu = tape.mul(s.u, s.u);
    let c0 = tape.mul(d.rho, uu);
    let c = tape.scale(c0, 0.5);
    let ru = tape.mul(s.rho, s.u);
    let dd = tape.mul(ru, d.u);
    let ab = tape.add(a, b);
    let cd = tape.add(c, dd);
    tape.add(ab, cd)
}

/// λ-weighted residual columns `λ(∂ₜU + ∂ₓF)` of the 1D Euler equations.
pub fn pde_residual_euler_1d(tape: &mut Tape, f: &FieldVars, k: f64) -> [Var; 3] {
    let (s, dt, dx) = (&f.value, &f.dt, &f.dx);
    // mass
    let a = tape.mul(dx.rho, s.u);
    let b = tape.mul(s.rho, dx.u);
    let ab = tape.add(a, b);
    let mass = tape.add(dt.rho, ab);
    // momentum
    let a = tape.mul(dt.rho, s.u);
    let b = tape.mul(s.rho, dt.u);
    let uu = tape.mul(s.u, s.u);
    let c = tape.mul(dx.rho, uu);
    let ru = tape.mul(s.rho, s.u);
    let d0 = tape.mul(ru, dx.u);
    let d = tape.scale(d0, 2.0);
    let ab = tape.add(a, b);
    let cd = tape.add(c, d);
    let m0 = tape.add(ab, cd);
    let mom = tape.add(m0, dx.p);
    // energy
    let big_e = total_energy(tape, s);
    let e_t = energy_derivative(tape, s, dt);
    let e_x = energy_derivative(tape, s, dx);
    let ep = tape.add(big_e, s.p);
    let a = tape.mul(dx.u, ep);
    let exp = tape.add(e_x, dx.p);
    let b = tape.mul(s.u, exp);
    let ab = tape.add(a, b);
    let ene = tape.add(e_t, ab);

    let lam = lambda_on_tape(tape, dx.u, k);
    [tape.mul(lam, mass), tape.mul(lam, mom), tape.mul(lam, ene)]
}

/// Toy residual `du₁/dt + Net2(u₁)` at times `ts`, with `u₁` from Net1.
pub fn pde_residual_toy(tape: &mut Tape, net1: &NetVars, net2: &NetVars, ts: &[[f64; 2]]) -> Var {
    let t = tape.constant(time_matrix(ts));
    let out = net1.forward_with_unit_tangents(tape, t, &[0]);
    let u2 = net2.forward(tape, out.value, &[]).value;
    tape.add(out.tangents[0], u2)
}

/// Jump conditions `[f₁, f₂]` between states `s` and `l`.
pub fn rh_conditions(tape: &mut Tape, s: &StateCols, l: &StateCols) -> [Var; 2] {
    let drho = tape.sub(s.rho, l.rho);
    let du = tape.sub(s.u, l.u);
    let de = tape.sub(s.e, l.e);
    let dp = tape.sub(s.p, l.p);
    let rr = tape.mul(s.rho, l.rho);
    // f1 = ρρ_L(u−u_L)² − (ρ−ρ_L)(p−p_L)
    let du2 = tape.square(du);
    let a = tape.mul(rr, du2);
    let b = tape.mul(drho, dp);
    let f1 = tape.sub(a, b);
    // f2 = ρρ_L(e−e_L) − ½(ρ−ρ_L)(p+p_L)
    let a = tape.mul(rr, de);
    let psum = tape.add(s.p, l.p);
    let b0 = tape.mul(drho, psum);
    let b = tape.scale(b0, 0.5);
    let f2 = tape.sub(a, b);
    [f1, f2]
}

/// Per-point `|λ₂f₁|² + |λ₂f₂|²` between states `s` and `l = U(t, x + Δx)`.
pub fn rh_terms(tape: &mut Tape, s: &StateCols, l: &StateCols, eps1: f64, eps2: f64) -> Var {
    let [f1, f2] = rh_conditions(tape, s, l);
    let du = tape.sub(s.u, l.u);
    let dp = tape.sub(s.p, l.p);
    // λ₂ = |(p−p_L)(u−u_L)| where both jumps exceed their thresholds
    let mask = {
        let (dpv, duv) = (tape.value(dp), tape.value(du));
        Array2::from_shape_fn(dpv.dim(), |ij| {
            if dpv[ij].abs() > eps1 && duv[ij].abs() > eps2 {
                1.0
            } else {
                0.0
            }
        })
    };
    let prod = tape.mul(dp, du);
    let lam0 = tape.abs(prod);
    let lam = tape.mul_const(lam0, mask);
    let g1 = tape.mul(lam, f1);
    let g2 = tape.mul(lam, f2);
    let s1 = tape.square(g1);
    let s2 = tape.square(g2);
    tape.add(s1, s2)
}

fn partner(pts: &ResidualPointSets, p: [f64; 2]) -> [f64; 2] {
    let (lo, hi) = pts.x_range;
    let mut x = p[1] + pts.rh_dx;
    if pts.periodic && x > hi {
        x -= hi - lo;
    }
    [p[0], x]
}

/// Mean RH loss over the pairs in `pts.rh`.
pub fn rh_loss(
    tape: &mut Tape,
    net1: &NetVars,
    net2: &NetVars,
    pts: &ResidualPointSets,
    eps1: f64,
    eps2: f64,
) -> Var {
    let right: Vec<[f64; 2]> = pts.rh.iter().map(|&p| partner(pts, p)).collect();
    let s = euler_state(tape, net1, net2, &pts.rh);
    let l = euler_state(tape, net1, net2, &right);
    let terms = rh_terms(tape, &s, &l, eps1, eps2);
    tape.mean(terms)
}

/// Physical fluxes `(ρu, ρu² + p, u(E + p))`.
fn fluxes(tape: &mut Tape, s: &StateCols) -> [Var; 3] {
    let mass = tape.mul(s.rho, s.u);
    let mu = tape.mul(mass, s.u);
    let mom = tape.add(mu, s.p);
    let big_e = total_energy(tape, s);
    let ep = tape.add(big_e, s.p);
    let ene = tape.mul(s.u, ep);
    [mass, mom, ene]
}

/// `Σ_c (ΔQ_c + BD_c)²` with `Q(t) = V·mean(U)` over the slice points and
/// `BD = (t₂ − t₁)·A·mean(F·n̂)` over the boundary samples.
pub fn conservation_loss(tape: &mut Tape, net1: &NetVars, net2: &NetVars, set: &ConservationSet) -> Var {
    let slice = |tape: &mut Tape, t: f64| -> [Var; 3] {
        let pts: Vec<[f64; 2]> = set.xs.iter().map(|&x| [t, x]).collect();
        let s = euler_state(tape, net1, net2, &pts);
        let mom = tape.mul(s.rho, s.u);
        let ene = total_energy(tape, &s);
        [s.rho, mom, ene].map(|c| {
            let m = tape.mean(c);
            tape.scale(m, set.volume)
        })
    };
    let q1 = slice(tape, set.t1);
    let q2 = slice(tape, set.t2);
    let bd_pts: Vec<[f64; 2]> = set.boundary.iter().map(|b| [b.t, b.x]).collect();
    let normals =
        Array2::from_shape_vec((set.boundary.len(), 1), set.boundary.iter().map(|b| b.normal).collect())
            .expect("one normal per sample");
    let bs = euler_state(tape, net1, net2, &bd_pts);
    let fl = fluxes(tape, &bs);
    let mut total: Option<Var> = None;
    for c in 0..3 {
        let fn_ = tape.mul_const(fl[c], normals.clone());
        let m = tape.mean(fn_);
        let bd = tape.scale(m, (set.t2 - set.t1) * set.area);
        let dq = tape.sub(q2[c], q1[c]);
        let r = tape.add(dq, bd);
        let sq = tape.square(r);
        total = Some(match total {
            Some(t) => tape.add(t, sq),
            None => sq,
        });
    }
    total.expect("three components")
}

/// Mean squared misfit of Net1 at IC points, plus periodic pair mismatch.
pub fn ibc_loss(tape: &mut Tape, net1: &NetVars, pts: &ResidualPointSets, toy: bool) -> Option<Var> {
    let mut parts = Vec::new();
    if !pts.ic.is_empty() {
        let xy: Vec<[f64; 2]> = pts.ic.iter().map(|p| [p.t, p.x]).collect();
        let input = if toy { time_matrix(&xy) } else { points_matrix(&xy) };
        let dout = pts.ic[0].target.len();
        let flat: Vec<f64> = pts.ic.iter().flat_map(|p| p.target.iter().copied()).collect();
        let target = Array2::from_shape_vec((pts.ic.len(), dout), flat).ok()?;
        let x = tape.constant(input);
        let v = net1.forward(tape, x, &[]).value;
        let tv = tape.constant(target);
        let d = tape.sub(v, tv);
        let sq = tape.square(d);
        parts.push(tape.mean(sq));
    }
    if !pts.bc.is_empty() && !toy {
        let (lo, hi) = pts.x_range;
        let a: Vec<[f64; 2]> = pts.bc.iter().map(|&t| [t, lo]).collect();
        let b: Vec<[f64; 2]> = pts.bc.iter().map(|&t| [t, hi]).collect();
        let xa = tape.constant(points_matrix(&a));
        let xb = tape.constant(points_matrix(&b));
        let va = net1.forward(tape, xa, &[]).value;
        let vb = net1.forward(tape, xb, &[]).value;
        let d = tape.sub(va, vb);
        let sq = tape.square(d);
        parts.push(tape.mean(sq));
    }
    parts.into_iter().reduce(|a, b| tape.add(a, b))
}

/// Mean squared misfit over observed components of the data points.
/// Euler components are `(ρ, u, e, p)` with `p` from Net2 on Net1's state;
/// the toy component is `u₁`.
pub fn data_loss(
    tape: &mut Tape,
    net1: &NetVars,
    net2: &NetVars,
    data: &[DataPoint],
    toy: bool,
) -> Option<Var> {
    if data.is_empty() {
        return None;
    }
    let ncomp = data[0].values.len();
    let observed: usize = data.iter().flat_map(|p| &p.mask).filter(|&&m| m).count();
    if observed == 0 {
        return None;
    }
    let mask = Array2::from_shape_fn((data.len(), ncomp), |(i, j)| {
        if data[i].mask[j] {
            1.0
        } else {
            0.0
        }
    });
    let target = Array2::from_shape_fn((data.len(), ncomp), |(i, j)| {
        if data[i].mask[j] {
            data[i].values[j]
        } else {
            0.0
        }
    });
    let pts: Vec<[f64; 2]> = data.iter().map(|p| [p.t, p.x]).collect();
    let pred = if toy {
        let x = tape.constant(time_matrix(&pts));
        net1.forward(tape, x, &[]).value
    } else {
        let s = euler_state(tape, net1, net2, &pts);
        tape.concat_cols(&[s.rho, s.u, s.e, s.p])
    };
    let tv = tape.constant(target);
    let d = tape.sub(pred, tv);
    let dm = tape.mul_const(d, mask);
    let sq = tape.square(dm);
    let s = tape.sum(sq);
    Some(tape.scale(s, 1.0 / observed as f64))
}

/// Unweighted loss terms of one case; absent terms had no points.
#[derive(Debug, Clone, Copy)]
pub struct CaseTerms {
    pub pde: Option<Var>,
    pub ibcs: Option<Var>,
    pub data: Option<Var>,
    pub rh: Option<Var>,
    pub cons: Option<Var>,
}

/// Record every loss term of one case.
pub fn case_terms(
    tape: &mut Tape,
    net1: &NetVars,
    net2: &NetVars,
    pts: &ResidualPointSets,
    weights: &LossWeights,
    toy: bool,
) -> CaseTerms {
    let pde = (!pts.pde.is_empty()).then(|| {
        if toy {
            let r = pde_residual_toy(tape, net1, net2, &pts.pde);
            let sq = tape.square(r);
            tape.mean(sq)
        } else {
            let f = euler_fields(tape, net1, net2, &pts.pde);
            let g = pde_residual_euler_1d(tape, &f, weights.k);
            let all = tape.concat_cols(&g);
            let sq = tape.square(all);
            let m = tape.mean(sq);
            // mean over points of the squared residual norm
            tape.scale(m, 3.0)
        }
    });
    let ibcs = ibc_loss(tape, net1, pts, toy);
    let data = data_loss(tape, net1, net2, &pts.data, toy);
    let rh = (!toy && !pts.rh.is_empty()).then(|| rh_loss(tape, net1, net2, pts, weights.eps1, weights.eps2));
    let cons = if toy {
        None
    } else {
        pts.con.as_ref().map(|set| conservation_loss(tape, net1, net2, set))
    };
    CaseTerms {
        pde,
        ibcs,
        data,
        rh,
        cons,
    }
}

/// Weighted contributions of each term, summed over cases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub pde: f64,
    pub ibcs: f64,
    pub data: f64,
    pub rh: f64,
    pub cons: f64,
    pub reg: f64,
}

impl LossBreakdown {
    pub const CSV_HEADER: &'static str = "iteration,total,L_PDE,L_IBCs,L_data,L_RH,L_CONs,reg";

    pub fn csv_row(&self, iteration: usize) -> String {
        format!(
            "{iteration},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.total, self.pde, self.ibcs, self.data, self.rh, self.cons, self.reg
        )
    }
}

/// `Σ_cases Σ_terms ω·L + λ_reg·Σw²(Net2)`.
///
/// Fails with the offending term's name if any component is not finite.
pub fn total_loss(
    tape: &mut Tape,
    cases: &[CaseTerms],
    weights: &LossWeights,
    net2: &NetVars,
    iteration: usize,
) -> Result<(Var, LossBreakdown)> {
    let mut acc: Option<Var> = None;
    let mut bd = LossBreakdown::default();
    let mut push = |tape: &mut Tape, name: &str, term: Option<Var>, w: f64, slot: &mut f64| -> Result<()> {
        let Some(v) = term else { return Ok(()) };
        let val = tape.scalar(v);
        if !val.is_finite() {
            return Err(Error::NonFinite {
                term: name.to_string(),
                iteration,
            });
        }
        *slot += w * val;
        let wv = tape.scale(v, w);
        acc = Some(match acc {
            Some(a) => tape.add(a, wv),
            None => wv,
        });
        Ok(())
    };
    for c in cases {
        push(tape, "L_PDE", c.pde, weights.pde, &mut bd.pde)?;
        push(tape, "L_IBCs", c.ibcs, weights.ibcs, &mut bd.ibcs)?;
        push(tape, "L_data", c.data, weights.data, &mut bd.data)?;
        push(tape, "L_RH", c.rh, weights.rh, &mut bd.rh)?;
        push(tape, "L_CONs", c.cons, weights.cons, &mut bd.cons)?;
    }
    let reg = net2.weight_sq_sum(tape);
    push(tape, "reg", Some(reg), weights.reg, &mut bd.reg)?;
    let total = acc.expect("regularization term is always present");
    bd.total = tape.scalar(total);
    Ok((total, bd))
}
