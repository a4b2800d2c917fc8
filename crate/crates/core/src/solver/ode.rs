//! Classical RK4 for the toy equation `du₁/dt = −U₂(u₁)`.

use crate::closure::ClosureModel;
use crate::error::{Error, Result};

/// Integrate from `u0` at `t_span.0` to `t_span.1` with step `dt`; the last
/// step is shortened to land on the end time. Returns `(t, u₁)` samples
/// including both endpoints.
pub fn ode_integrate_toy(
    closure: &dyn ClosureModel,
    u0: f64,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if closure.arity() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: closure.arity(),
        });
    }
    if !(dt > 0.0) || !(t_span.1 >= t_span.0) {
        return Err(Error::Config(format!(
            "invalid integration span {t_span:?} with dt {dt}"
        )));
    }
    let rhs = |u: f64| -> Result<f64> { Ok(-closure.value(&[u])?) };
    let (mut t, t_end) = t_span;
    let mut u = u0;
    let mut out = vec![(t, u)];
    while t < t_end {
        let h = dt.min(t_end - t);
        let k1 = rhs(u)?;
        let k2 = rhs(u + 0.5 * h * k1)?;
        let k3 = rhs(u + 0.5 * h * k2)?;
        let k4 = rhs(u + h * k3)?;
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = if t_end - t <= dt { t_end } else { t + h };
        out.push((t, u));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{toy_solution, ToyClosure};

    #[test]
    fn rk4_tracks_exact_toy_solution() {
        let traj = ode_integrate_toy(&ToyClosure, 0.6, (0.0, 2.0), 1e-3).unwrap();
        let c0 = 3.0;
        assert_eq!(traj.last().unwrap().0, 2.0);
        for &(t, u) in &traj {
            assert!((u - toy_solution(c0, t)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |dt: f64| {
            let traj = ode_integrate_toy(&ToyClosure, 0.6, (0.0, 2.0), dt).unwrap();
            (traj.last().unwrap().1 - toy_solution(3.0, 2.0)).abs()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!(order > 3.7 && order < 4.3, "{order}");
    }

    #[test]
    fn domain_error_propagates() {
        assert!(ode_integrate_toy(&ToyClosure, 1.5, (0.0, 1.0), 0.1).is_err());
    }
}
