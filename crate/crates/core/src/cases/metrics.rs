//! Discrete error norms and nearest-cell restriction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    /// Mean absolute difference.
    pub l1: f64,
    /// Root-mean-square difference.
    pub l2: f64,
    pub linf: f64,
    /// `‖a − b‖₂ / ‖b‖₂`.
    pub rel_l2: f64,
}

pub fn error_metrics(numerical: &[f64], reference: &[f64]) -> Result<ErrorMetrics> {
    if numerical.len() != reference.len() {
        return Err(Error::Dimension {
            expected: reference.len(),
            got: numerical.len(),
        });
    }
    if numerical.is_empty() {
        return Err(Error::Config("cannot compute metrics of empty fields".into()));
    }
    let n = numerical.len() as f64;
    let (mut s1, mut s2, mut inf, mut r2) = (0.0, 0.0, 0.0f64, 0.0);
    for (a, b) in numerical.iter().zip(reference) {
        let d = a - b;
        s1 += d.abs();
        s2 += d * d;
        inf = inf.max(d.abs());
        r2 += b * b;
    }
    Ok(ErrorMetrics {
        l1: s1 / n,
        l2: (s2 / n).sqrt(),
        linf: inf,
        rel_l2: if r2 > 0.0 {
            (s2 / r2).sqrt()
        } else {
            f64::INFINITY
        },
    })
}

fn nearest(sorted: &[f64], x: f64) -> usize {
    let k = sorted.partition_point(|&v| v < x);
    if k == 0 {
        0
    } else if k == sorted.len() || (x - sorted[k - 1]) <= (sorted[k] - x) {
        k - 1
    } else {
        k
    }
}

/// Sample `fine` at the cell centres of `coarse` by nearest cell centre.
pub fn restrict_nearest(fine: &Snapshot, xs: &[f64], ys: &[f64]) -> Result<Snapshot> {
    if fine.is_2d() != !ys.is_empty() {
        return Err(Error::Config("cannot restrict between 1D and 2D fields".into()));
    }
    let nxf = fine.xs.len();
    let ix: Vec<usize> = xs.iter().map(|&x| nearest(&fine.xs, x)).collect();
    let iy: Vec<usize> = if ys.is_empty() {
        vec![0]
    } else {
        ys.iter().map(|&y| nearest(&fine.ys, y)).collect()
    };
    let idx: Vec<usize> = iy
        .iter()
        .flat_map(|&j| ix.iter().map(move |&i| j * nxf + i))
        .collect();
    let take = |f: &[f64]| -> Vec<f64> {
        if f.is_empty() {
            Vec::new()
        } else {
            idx.iter().map(|&k| f[k]).collect()
        }
    };
    Ok(Snapshot {
        t: fine.t,
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        rho: take(&fine.rho),
        u: take(&fine.u),
        v: take(&fine.v),
        e: take(&fine.e),
        p: take(&fine.p),
    })
}

/// Per-field metrics of `numerical` against `reference`. A finer reference
/// is restricted to the numerical grid; any other grid mismatch is an error.
pub fn compare_snapshots(
    numerical: &Snapshot,
    reference: &Snapshot,
) -> Result<Vec<(&'static str, ErrorMetrics)>> {
    let same = numerical.xs == reference.xs && numerical.ys == reference.ys;
    let restricted;
    let r = if same {
        reference
    } else if reference.xs.len() >= numerical.xs.len()
        && reference.ys.len() >= numerical.ys.len()
        && reference.is_2d() == numerical.is_2d()
    {
        restricted = restrict_nearest(reference, &numerical.xs, &numerical.ys)?;
        &restricted
    } else {
        return Err(Error::Config(format!(
            "grid mismatch: {}x{} cells against a {}x{} reference",
            numerical.xs.len(),
            numerical.ys.len().max(1),
            reference.xs.len(),
            reference.ys.len().max(1)
        )));
    };
    numerical
        .field_names()
        .iter()
        .map(|&name| {
            let a = numerical.field(name).unwrap_or_default();
            let b = r.field(name).unwrap_or_default();
            Ok((name, error_metrics(a, b)?))
        })
        .collect()
}
