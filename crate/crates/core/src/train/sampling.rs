//! Random training points for one case.

use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cases::{CaseSpec, SamplingCounts, System};
use crate::error::{Error, Result};
use crate::losses::{BoundarySample, ConservationSet, IcPoint, ResidualPointSets};
use crate::solver::Boundary;

/// RNG stream for `purpose`, derived from the user seed.
pub(crate) fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.sample(Uniform::new_inclusive(lo, hi))
    } else {
        lo
    }
}

/// Uniform random points in the case's space-time box.
///
/// RH partners sit `rh_dx_fraction` of the domain length to the right; on
/// non-periodic domains the left points stay clear of the right boundary.
/// Conservation slices are taken at the start and end time.
pub fn sample_points(
    case: &CaseSpec,
    counts: &SamplingCounts,
    rh_dx_fraction: f64,
    seed: u64,
) -> Result<ResidualPointSets> {
    case.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t0, t1) = case.t_range;
    match case.system {
        System::Toy => {
            let pde = (0..counts.pde).map(|_| [uniform(&mut rng, t0, t1), 0.0]).collect();
            let ic = if counts.ibc > 0 {
                vec![IcPoint {
                    t: t0,
                    x: 0.0,
                    target: vec![case.toy_initial_value()?],
                }]
            } else {
                Vec::new()
            };
            Ok(ResidualPointSets {
                pde,
                ic,
                ..Default::default()
            })
        }
        System::Euler1d => euler_points(case, counts, rh_dx_fraction, &mut rng),
        System::Euler2d => Err(Error::Config(format!(
            "training points are only sampled for 1D cases, '{}' is 2D",
            case.id
        ))),
    }
}

fn euler_points(
    case: &CaseSpec,
    counts: &SamplingCounts,
    rh_dx_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ResidualPointSets> {
    let (t0, t1) = case.t_range;
    let (x0, x1) = case
        .x_range
        .ok_or_else(|| Error::Config(format!("case '{}' has no x range", case.id)))?;
    let periodic = case
        .boundaries
        .is_some_and(|b| b.x_lo == Boundary::Periodic && b.x_hi == Boundary::Periodic);
    let len = x1 - x0;
    let rh_dx = rh_dx_fraction * len;
    let eos = case.target_eos()?;

    let pde = (0..counts.pde)
        .map(|_| [uniform(rng, t0, t1), uniform(rng, x0, x1)])
        .collect();
    let rh_hi = if periodic { x1 } else { x1 - rh_dx };
    let rh = (0..counts.pde)
        .map(|_| [uniform(rng, t0, t1), uniform(rng, x0, rh_hi)])
        .collect();
    let ic = (0..counts.ibc)
        .map(|_| {
            let x = uniform(rng, x0, x1);
            let [rho, u, _, p] = case.initial_primitive(x, 0.0)?;
            Ok(IcPoint {
                t: t0,
                x,
                target: vec![rho, u, eos.internal_energy(rho, p)?],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bc = if periodic {
        (0..counts.bc).map(|_| uniform(rng, t0, t1)).collect()
    } else {
        Vec::new()
    };
    let con = (counts.con > 0).then(|| {
        let xs = (0..counts.con).map(|_| uniform(rng, x0, x1)).collect();
        let boundary = (0..counts.bd)
            .map(|k| {
                let (x, normal) = if k % 2 == 0 { (x0, -1.0) } else { (x1, 1.0) };
                BoundarySample {
                    t: uniform(rng, t0, t1),
                    x,
                    normal,
                }
            })
            .collect();
        ConservationSet {
            t1: t0,
            t2: t1,
            xs,
            volume: len,
            boundary,
            area: 2.0,
        }
    });
    Ok(ResidualPointSets {
        pde,
        rh,
        rh_dx,
        ic,
        bc,
        x_range: (x0, x1),
        periodic,
        data: Vec::new(),
        con,
    })
}

/// `k` distinct indices out of `n`, or all of them when `k ≥ n`.
pub(crate) fn minibatch(rng: &mut ChaCha8Rng, n: usize, k: Option<usize>) -> Option<Vec<usize>> {
    match k {
        Some(k) if k < n => Some(rand::seq::index::sample(rng, n, k).into_vec()),
        _ => None,
    }
}

/// A copy of `pts` restricted to the given PDE and RH indices.
pub(crate) fn restrict(
    pts: &ResidualPointSets,
    pde: Option<&[usize]>,
    rh: Option<&[usize]>,
) -> ResidualPointSets {
    let pick = |all: &[[f64; 2]], idx: Option<&[usize]>| match idx {
        Some(idx) => idx.iter().map(|&i| all[i]).collect(),
        None => all.to_vec(),
    };
    ResidualPointSets {
        pde: pick(&pts.pde, pde),
        rh: pick(&pts.rh, rh),
        ..pts.clone()
    }
}
