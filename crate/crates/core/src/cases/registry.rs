//! Compiled-in training and test cases.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::closure::{toy_solution, AnalyticEos, ClosureSpec};
use crate::error::{Error, Result};
use crate::solver::{Boundaries, Boundary, ConservedStateGrid, Mesh, WenoOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    Toy,
    Euler1d,
    Euler2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Test,
}

/// Initial-condition formula families. Coefficients live in the parameter map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IcFormula {
    /// `u₁(t₀) = sech(t₀ + ln c₀)`.
    ToySech,
    /// Value `u₁(t₀)` given directly.
    ToyValue,
    /// Sums of `sin πx`, `1 − cos πx`, `sin² πx`, `cos πx`, `sin 2πx` and
    /// `exp(−w x²)` terms per primitive.
    TrigSeries,
    /// Isentropic sine wave: `u = A sin(2πx/L)`,
    /// `ρ = (1 + (γ−1)u/(2c))^{2/(γ−1)}`, `c = √γ/ε`, `p = ρ^γ`.
    IsentropicSine,
    /// Two constant states split at `x = x0`.
    RiemannStep,
    /// `ρ, p` constant, `u = A sin 2πx`, `v = A sin 2πy`.
    PeriodicSine2d,
    /// Four constant quadrants split at `(x0, y0)`.
    RiemannQuadrants,
}

impl IcFormula {
    fn required(self) -> &'static [&'static str] {
        match self {
            IcFormula::ToySech => &["c0"],
            IcFormula::ToyValue => &["u0"],
            IcFormula::TrigSeries => &["rho0", "u0", "p0"],
            IcFormula::IsentropicSine => &["amp", "L", "gamma_ic", "eps"],
            IcFormula::RiemannStep => &["x0", "rho_l", "u_l", "p_l", "rho_r", "u_r", "p_r"],
            IcFormula::PeriodicSine2d => &["rho0", "amp", "p0"],
            IcFormula::RiemannQuadrants => &[
                "x0", "y0", "rho_ll", "u_ll", "v_ll", "p_ll", "rho_lu", "u_lu", "v_lu", "p_lu",
                "rho_rl", "u_rl", "v_rl", "p_rl", "rho_ru", "u_ru", "v_ru", "p_ru",
            ],
        }
    }
}

/// Point counts used when sampling training points for a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingCounts {
    /// PDE residual points (also used for the RH pairs).
    pub pde: usize,
    /// Conservation points per time slice.
    pub con: usize,
    /// Boundary samples for the conservation flux terms.
    pub bd: usize,
    /// Initial-condition points.
    pub ibc: usize,
    /// Periodic boundary pairs.
    pub bc: usize,
    /// Observed points per data slice (toy: points along the trajectory).
    pub data: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSpec {
    pub id: String,
    pub system: System,
    pub role: Role,
    pub t_range: (f64, f64),
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub boundaries: Option<Boundaries>,
    pub ic: IcFormula,
    pub params: BTreeMap<String, f64>,
    pub nx: usize,
    pub ny: usize,
    pub order: WenoOrder,
    pub sampling: SamplingCounts,
    pub net1_widths: Vec<usize>,
    pub target: ClosureSpec,
}

impl CaseSpec {
    pub fn t_end(&self) -> f64 {
        self.t_range.1
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| {
            Error::Config(format!("case '{}' is missing parameter '{name}'", self.id))
        })
    }

    fn opt(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.ic.required() {
            self.param(p)?;
        }
        Ok(())
    }

    pub fn target_eos(&self) -> Result<AnalyticEos> {
        self.target.analytic_eos()?.ok_or_else(|| {
            Error::Config(format!("case '{}' has no analytic target EOS", self.id))
        })
    }

    pub fn is_euler(&self) -> bool {
        self.system != System::Toy
    }

    /// Mesh over the case domain with ghosts for `order`.
    pub fn mesh(&self, nx: usize, ny: usize, order: WenoOrder) -> Result<Mesh> {
        let xr = self
            .x_range
            .ok_or_else(|| Error::Config(format!("case '{}' has no spatial domain", self.id)))?;
        match (self.system, self.y_range) {
            (System::Euler2d, Some(yr)) => Mesh::new_2d(xr, yr, nx, ny, order.ghost()),
            (System::Euler1d, _) => Mesh::new_1d(xr, nx, order.ghost()),
            _ => Err(Error::Config(format!("case '{}' is not an Euler case", self.id))),
        }
    }

    /// Initial value of the toy state `u₁(t₀)`.
    pub fn toy_initial_value(&self) -> Result<f64> {
        match self.ic {
            IcFormula::ToySech => Ok(toy_solution(self.param("c0")?, self.t_range.0)),
            IcFormula::ToyValue => self.param("u0"),
            _ => Err(Error::Config(format!("case '{}' is not a toy case", self.id))),
        }
    }

    /// Initial primitives `(ρ, u, v, p)` at `(x, y)`.
    pub fn initial_primitive(&self, x: f64, y: f64) -> Result<[f64; 4]> {
        self.validate()?;
        let s = |n: &str| self.opt(n);
        Ok(match self.ic {
            IcFormula::TrigSeries => {
                let (sn, cs) = ((PI * x).sin(), (PI * x).cos());
                let g = (-s("gauss_w") * x * x).exp();
                let series = |pre: &str| {
                    s(&format!("{pre}0"))
                        + s(&format!("{pre}_sin")) * sn
                        + s(&format!("{pre}_1mcos")) * (1.0 - cs)
                        + s(&format!("{pre}_sinsq")) * sn * sn
                        + s(&format!("{pre}_cos")) * cs
                        + s(&format!("{pre}_sin2")) * (2.0 * PI * x).sin()
                        + s(&format!("{pre}_gauss")) * g
                };
                [series("rho"), series("u"), 0.0, series("p")]
            }
            IcFormula::IsentropicSine => {
                let gic = s("gamma_ic");
                let c = gic.sqrt() / s("eps");
                let u = s("amp") * (2.0 * PI * x / s("L")).sin();
                let rho = (1.0 + (gic - 1.0) * u / (2.0 * c)).powf(2.0 / (gic - 1.0));
                [rho, u, 0.0, rho.powf(gic)]
            }
            IcFormula::RiemannStep => {
                if x <= s("x0") {
                    [s("rho_l"), s("u_l"), 0.0, s("p_l")]
                } else {
                    [s("rho_r"), s("u_r"), 0.0, s("p_r")]
                }
            }
            IcFormula::PeriodicSine2d => [
                s("rho0"),
                s("amp") * (2.0 * PI * x).sin(),
                s("amp") * (2.0 * PI * y).sin(),
                s("p0"),
            ],
            IcFormula::RiemannQuadrants => {
                let q = match (x <= s("x0"), y <= s("y0")) {
                    (true, true) => "ll",
                    (true, false) => "lu",
                    (false, true) => "rl",
                    (false, false) => "ru",
                };
                [
                    s(&format!("rho_{q}")),
                    s(&format!("u_{q}")),
                    s(&format!("v_{q}")),
                    s(&format!("p_{q}")),
                ]
            }
            IcFormula::ToySech | IcFormula::ToyValue => {
                return Err(Error::Config(format!("case '{}' is not an Euler case", self.id)))
            }
        })
    }
}

/// Cell-centre initial state; pressure is converted to internal energy with
/// the case's analytic target EOS.
pub fn build_initial_state(case: &CaseSpec, mesh: &Mesh) -> Result<ConservedStateGrid> {
    let eos = case.target_eos()?;
    let mut s = ConservedStateGrid::zeros(mesh.clone());
    for j in 0..mesh.ny {
        let y = if mesh.dims == 2 { mesh.y_center(j) } else { 0.0 };
        for i in 0..mesh.nx {
            let [rho, u, v, p] = case.initial_primitive(mesh.x_center(i), y)?;
            let e = eos.internal_energy(rho, p)?;
            s.set_primitive(i, j, rho, u, v, e);
        }
    }
    Ok(s)
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn widths(input: usize, hidden: usize, depth: usize, output: usize) -> Vec<usize> {
    let mut w = vec![input];
    w.extend(std::iter::repeat(hidden).take(depth));
    w.push(output);
    w
}

const NO_SAMPLING: SamplingCounts = SamplingCounts {
    pde: 0,
    con: 0,
    bd: 0,
    ibc: 0,
    bc: 0,
    data: 0,
};

fn toy_case(id: &str, c0: f64, t_range: (f64, f64), data: usize) -> CaseSpec {
    CaseSpec {
        id: id.into(),
        system: System::Toy,
        role: Role::Train,
        t_range,
        x_range: None,
        y_range: None,
        boundaries: None,
        ic: IcFormula::ToySech,
        params: params(&[("c0", c0)]),
        nx: 0,
        ny: 0,
        order: WenoOrder::Five,
        sampling: SamplingCounts {
            pde: 200,
            ibc: 1,
            data,
            ..NO_SAMPLING
        },
        net1_widths: widths(1, 15, 5, 1),
        target: ClosureSpec::Toy,
    }
}

fn train_1d(
    id: &str,
    target: &ClosureSpec,
    t_end: f64,
    depth: usize,
    con: usize,
    ic: &[(&str, f64)],
) -> CaseSpec {
    CaseSpec {
        id: id.into(),
        system: System::Euler1d,
        role: Role::Train,
        t_range: (0.0, t_end),
        x_range: Some((-1.0, 1.0)),
        y_range: None,
        boundaries: Some(Boundaries::uniform(Boundary::Periodic)),
        ic: IcFormula::TrigSeries,
        params: params(ic),
        nx: 4000,
        ny: 1,
        order: WenoOrder::Five,
        sampling: SamplingCounts {
            pde: 8000,
            con,
            bd: 100,
            ibc: 200,
            bc: 100,
            data: 100,
        },
        net1_widths: widths(2, 50, depth, 3),
        target: target.clone(),
    }
}

fn test_case(
    id: &str,
    system: System,
    target: &ClosureSpec,
    domain: ((f64, f64), Option<(f64, f64)>),
    t_end: f64,
    bc: Boundary,
    ic: IcFormula,
    p: &[(&str, f64)],
    n: usize,
    order: WenoOrder,
) -> CaseSpec {
    CaseSpec {
        id: id.into(),
        system,
        role: Role::Test,
        t_range: (0.0, t_end),
        x_range: Some(domain.0),
        y_range: domain.1,
        boundaries: Some(Boundaries::uniform(bc)),
        ic,
        params: params(p),
        nx: n,
        ny: if system == System::Euler2d { n } else { 1 },
        order,
        sampling: NO_SAMPLING,
        net1_widths: Vec::new(),
        target: target.clone(),
    }
}

fn sod_params() -> Vec<(&'static str, f64)> {
    vec![
        ("x0", 0.5),
        ("rho_l", 1.0),
        ("u_l", 0.0),
        ("p_l", 1.0),
        ("rho_r", 0.125),
        ("u_r", 0.0),
        ("p_r", 0.1),
    ]
}

fn quadrant_params() -> Vec<(&'static str, f64)> {
    vec![
        ("x0", 0.5),
        ("y0", 0.5),
        ("rho_ll", 0.5),
        ("u_ll", -0.5),
        ("v_ll", 0.35),
        ("p_ll", 0.5),
        ("rho_lu", 1.0),
        ("u_lu", 0.5),
        ("v_lu", 0.35),
        ("p_lu", 0.5),
        ("rho_rl", 1.5),
        ("u_rl", -0.5),
        ("v_rl", -0.35),
        ("p_rl", 0.5),
        ("rho_ru", 0.5),
        ("u_ru", 0.5),
        ("v_ru", -0.35),
        ("p_ru", 0.5),
    ]
}

fn test_cases(prefix: &str, target: &ClosureSpec, wave_amp: f64, wave_eps: f64, low: WenoOrder) -> Vec<CaseSpec> {
    let unit = (0.0, 1.0);
    vec![
        test_case(
            &format!("{prefix}-test-1"),
            System::Euler1d,
            target,
            ((-2.5, 2.5), None),
            0.3,
            Boundary::Periodic,
            IcFormula::IsentropicSine,
            &[("amp", wave_amp), ("L", 5.0), ("gamma_ic", 2.0), ("eps", wave_eps)],
            1000,
            WenoOrder::Five,
        ),
        test_case(
            &format!("{prefix}-test-2"),
            System::Euler1d,
            target,
            (unit, None),
            0.2,
            Boundary::Extrapolation,
            IcFormula::RiemannStep,
            &sod_params(),
            200,
            low,
        ),
        test_case(
            &format!("{prefix}-test-3"),
            System::Euler2d,
            target,
            (unit, Some(unit)),
            0.1,
            Boundary::Periodic,
            IcFormula::PeriodicSine2d,
            &[("rho0", 0.5), ("amp", 0.3), ("p0", 0.5)],
            400,
            WenoOrder::Five,
        ),
        test_case(
            &format!("{prefix}-test-4"),
            System::Euler2d,
            target,
            (unit, Some(unit)),
            0.2,
            Boundary::Extrapolation,
            IcFormula::RiemannQuadrants,
            &quadrant_params(),
            400,
            low,
        ),
    ]
}

fn build_registry() -> Vec<CaseSpec> {
    let ideal = ClosureSpec::Ideal { gamma: 1.4 };
    let na = ClosureSpec::NobleAbel {
        gamma: 1.4,
        b: 0.075,
    };
    let s14 = 1.4f64.sqrt();
    let case1: &[(&str, f64)] = &[
        ("rho0", 0.35),
        ("rho_sin", 0.25),
        ("u0", 1.0),
        ("p0", 0.154),
        ("p_sin", -0.03),
        ("p_sinsq", -0.1),
    ];

    let mut cases = vec![
        toy_case("toy-train-c0-0.5", 0.5, (2.0, 5.0), 31),
        toy_case("toy-train-c0-1", 1.0, (0.5, 3.0), 51),
        toy_case("toy-train-c0-2", 2.0, (1.0, 4.0), 31),
        CaseSpec {
            id: "toy-test".into(),
            role: Role::Test,
            ic: IcFormula::ToyValue,
            params: params(&[("u0", 0.6), ("c0", 3.0)]),
            net1_widths: widths(1, 10, 5, 1),
            sampling: SamplingCounts {
                pde: 200,
                ibc: 1,
                ..NO_SAMPLING
            },
            ..toy_case("toy-test", 3.0, (0.0, 2.0), 0)
        },
    ];

    cases.extend([
        train_1d("ideal-train-1", &ideal, 0.5, 8, 300, case1),
        train_1d(
            "ideal-train-2",
            &ideal,
            0.5,
            8,
            400,
            &[
                ("rho0", 0.75),
                ("rho_1mcos", 0.5),
                ("u_1mcos", 0.5 * s14),
                ("u0", 0.0),
                ("p0", 0.825),
                ("p_1mcos", 0.55),
            ],
        ),
        train_1d(
            "ideal-train-3",
            &ideal,
            0.5,
            8,
            300,
            &[
                ("rho0", 0.6),
                ("rho_1mcos", 0.5),
                ("u0", 0.0),
                ("u_1mcos", -0.5 * s14),
                ("p0", 0.348),
                ("p_1mcos", 0.29),
            ],
        ),
        train_1d(
            "ideal-train-4",
            &ideal,
            0.5,
            7,
            300,
            &[
                ("rho0", 0.75),
                ("rho_1mcos", 0.5),
                ("u0", 0.0),
                ("u_1mcos", 0.3 * s14),
                ("p0", 0.3275),
                ("p_cos", -0.131),
                ("p_sin", -0.1),
                ("p_sin2", 0.02),
            ],
        ),
        train_1d(
            "ideal-train-5",
            &ideal,
            0.4,
            8,
            300,
            &[
                ("rho0", 0.1),
                ("rho_gauss", 1.0),
                ("u0", 0.0),
                ("p0", 0.1),
                ("p_gauss", 0.75),
                ("gauss_w", 5.0),
            ],
        ),
    ]);
    cases.extend(test_cases("ideal", &ideal, 1.0, 0.3, WenoOrder::Five));

    cases.extend([
        train_1d("na-train-1", &na, 0.47, 10, 300, case1),
        train_1d(
            "na-train-2",
            &na,
            0.345,
            10,
            300,
            &[
                ("rho0", 0.75),
                ("rho_1mcos", 0.5),
                ("u0", 0.0),
                ("u_1mcos", 0.5 * s14),
                ("p0", 0.6),
                ("p_1mcos", 0.4),
            ],
        ),
        train_1d(
            "na-train-3",
            &na,
            0.5,
            10,
            300,
            &[
                ("rho0", 0.65),
                ("rho_1mcos", 0.5),
                ("u0", 0.0),
                ("u_1mcos", 0.35 * s14),
                ("p0", 0.26),
                ("p_1mcos", 0.2),
            ],
        ),
        train_1d(
            "na-train-4",
            &na,
            0.45,
            10,
            300,
            &[
                ("rho0", 0.7),
                ("rho_1mcos", 0.5),
                ("u0", 0.0),
                ("u_1mcos", 0.3 * s14),
                ("p0", 0.216),
                ("p_cos", -0.09),
                ("p_sin", -0.072),
                ("p_sin2", 0.015),
            ],
        ),
        train_1d(
            "na-train-5",
            &na,
            0.3,
            10,
            300,
            &[
                ("rho0", 0.15),
                ("rho_1mcos", 0.5),
                ("u0", 0.0),
                ("u_1mcos", 0.25 * s14),
                ("p0", 0.126),
                ("p_1mcos", 0.42),
            ],
        ),
    ]);
    cases.extend(test_cases("na", &na, 0.3, 1.0, WenoOrder::Three));

    let mut sod = test_case(
        "sod",
        System::Euler1d,
        &ideal,
        ((0.0, 1.0), None),
        0.2,
        Boundary::Extrapolation,
        IcFormula::RiemannStep,
        &sod_params(),
        200,
        WenoOrder::Three,
    );
    sod.role = Role::Test;
    cases.push(sod);
    cases
}

/// All registered cases.
pub fn registry() -> &'static [CaseSpec] {
    static REGISTRY: OnceLock<Vec<CaseSpec>> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}

pub fn lookup(id: &str) -> Result<&'static CaseSpec> {
    registry()
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::UnknownCase(id.to_string()))
}

/// Network widths of the shared closure network for a family of training cases.
pub fn default_net2_widths(target: &ClosureSpec) -> Vec<usize> {
    match target {
        ClosureSpec::Toy => vec![1, 15, 15, 15, 1],
        ClosureSpec::Ideal { .. } => vec![2, 20, 1],
        _ => vec![2, 20, 20, 20, 1],
    }
}
