//! Primitive-variable snapshots and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use super::grid::ConservedStateGrid;
use super::scheme::{primitives, EosCounters, Primitives};
use crate::closure::ClosureModel;
use crate::error::{Error, Result};

/// Interior primitives at one time. Fields are row-major with x fastest;
/// `ys` and `v` are empty in 1D.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
}

impl Snapshot {
    /// Ghost cells of `state` must be populated.
    pub fn from_state(
        state: &ConservedStateGrid,
        closure: &dyn ClosureModel,
        p_floor: f64,
        counters: &mut EosCounters,
    ) -> Result<Self> {
        let pr = primitives(state, closure, p_floor, counters)?;
        Ok(Self::from_primitives(state, &pr))
    }

    /// Interior values of already computed primitives.
    pub fn from_primitives(state: &ConservedStateGrid, pr: &Primitives) -> Self {
        let m = &state.mesh;
        let pick = |f: &Vec<f64>| -> Vec<f64> {
            if f.is_empty() {
                Vec::new()
            } else {
                m.interior_indices().map(|k| f[k]).collect()
            }
        };
        Self {
            t: state.t,
            xs: m.x_centers(),
            ys: if m.dims == 2 { m.y_centers() } else { Vec::new() },
            rho: pick(&pr.rho),
            u: pick(&pr.u),
            v: pick(&pr.v),
            e: pick(&pr.e),
            p: pick(&pr.p),
        }
    }

    pub fn is_2d(&self) -> bool {
        !self.ys.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Field by column name: `rho`, `u`, `v`, `e` or `p`.
    pub fn field(&self, name: &str) -> Option<&[f64]> {
        match name {
            "rho" => Some(&self.rho),
            "u" => Some(&self.u),
            "v" if self.is_2d() => Some(&self.v),
            "e" => Some(&self.e),
            "p" => Some(&self.p),
            _ => None,
        }
    }

    pub fn field_names(&self) -> &'static [&'static str] {
        if self.is_2d() {
            &["rho", "u", "v", "e", "p"]
        } else {
            &["rho", "u", "e", "p"]
        }
    }

    pub fn to_csv(&self) -> String {
        let nx = self.xs.len();
        let mut out = String::new();
        if self.is_2d() {
            out.push_str("x,y,rho,u,v,e,p\n");
        } else {
            out.push_str("x,rho,u,e,p\n");
        }
        for k in 0..self.len() {
            let mut cols = vec![self.xs[k % nx]];
            if self.is_2d() {
                cols.push(self.ys[k / nx]);
            }
            cols.push(self.rho[k]);
            cols.push(self.u[k]);
            if self.is_2d() {
                cols.push(self.v[k]);
            }
            cols.push(self.e[k]);
            cols.push(self.p[k]);
            let line: Vec<String> = cols.iter().map(|c| format!("{c:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Parse the CSV form. The time is not stored in the file and is set to `t`.
    pub fn from_csv(text: &str, t: f64) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Config("empty snapshot file".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        let two_d = match header.as_slice() {
            ["x", "rho", "u", "e", "p"] => false,
            ["x", "y", "rho", "u", "v", "e", "p"] => true,
            _ => {
                return Err(Error::Config(format!(
                    "unrecognised snapshot header {:?}",
                    header.join(",")
                )))
            }
        };
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for (ln, line) in lines.enumerate() {
            let vals: Vec<&str> = line.split(',').collect();
            if vals.len() != header.len() {
                return Err(Error::Config(format!(
                    "snapshot row {} has {} columns, expected {}",
                    ln + 2,
                    vals.len(),
                    header.len()
                )));
            }
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v.trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("snapshot row {}: {e}", ln + 2))
                })?);
            }
        }
        let mut it = cols.into_iter();
        let x = it.next().unwrap_or_default();
        let (xs, ys) = if two_d {
            let y = it.next().unwrap_or_default();
            let nx = y.iter().take_while(|&&v| v == y[0]).count();
            if nx == 0 || y.len() % nx != 0 {
                return Err(Error::Config("snapshot is not a tensor grid".into()));
            }
            (
                x[..nx].to_vec(),
                y.iter().step_by(nx).copied().collect::<Vec<_>>(),
            )
        } else {
            (x, Vec::new())
        };
        let rho = it.next().unwrap_or_default();
        let u = it.next().unwrap_or_default();
        let v = if two_d {
            it.next().unwrap_or_default()
        } else {
            Vec::new()
        };
        let e = it.next().unwrap_or_default();
        let p = it.next().unwrap_or_default();
        Ok(Self {
            t,
            xs,
            ys,
            rho,
            u,
            v,
            e,
            p,
        })
    }

    pub fn read_csv(path: &Path, t: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, t)
    }
}
