//! Uniform cell-centred meshes with ghost layers.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Boundary treatment on one side of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    /// Zeroth-order copy of the nearest interior cell.
    Extrapolation,
}

/// Boundary conditions per side; periodic sides must come in pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundaries {
    pub x_lo: Boundary,
    pub x_hi: Boundary,
    pub y_lo: Boundary,
    pub y_hi: Boundary,
}

impl Boundaries {
    pub fn uniform(b: Boundary) -> Self {
        Self {
            x_lo: b,
            x_hi: b,
            y_lo: b,
            y_hi: b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let periodic = |b: Boundary| b == Boundary::Periodic;
        if periodic(self.x_lo) != periodic(self.x_hi) || periodic(self.y_lo) != periodic(self.y_hi)
        {
            return Err(Error::Config(
                "periodic boundaries must be set on both opposite sides".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform mesh. One-dimensional meshes have `ny == 1` and no ghost rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub dims: usize,
    pub nx: usize,
    pub ny: usize,
    /// Left edge of the first interior cell.
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub ghost: usize,
}

impl Mesh {
    pub fn new_1d(x_range: (f64, f64), nx: usize, ghost: usize) -> Result<Self> {
        check_extent(x_range, nx)?;
        Ok(Self {
            dims: 1,
            nx,
            ny: 1,
            x0: x_range.0,
            y0: 0.0,
            dx: (x_range.1 - x_range.0) / nx as f64,
            dy: 1.0,
            ghost,
        })
    }

    pub fn new_2d(
        x_range: (f64, f64),
        y_range: (f64, f64),
        nx: usize,
        ny: usize,
        ghost: usize,
    ) -> Result<Self> {
        check_extent(x_range, nx)?;
        check_extent(y_range, ny)?;
        Ok(Self {
            dims: 2,
            nx,
            ny,
            x0: x_range.0,
            y0: y_range.0,
            dx: (x_range.1 - x_range.0) / nx as f64,
            dy: (y_range.1 - y_range.0) / ny as f64,
            ghost,
        })
    }

    /// Row stride (cells per row including ghosts).
    pub fn sx(&self) -> usize {
        self.nx + 2 * self.ghost
    }

    pub fn sy(&self) -> usize {
        if self.dims == 2 {
            self.ny + 2 * self.ghost
        } else {
            1
        }
    }

    pub fn len(&self) -> usize {
        self.sx() * self.sy()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Storage index of interior cell `(i, j)`.
    pub fn interior(&self, i: usize, j: usize) -> usize {
        let jg = if self.dims == 2 { j + self.ghost } else { 0 };
        jg * self.sx() + i + self.ghost
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.dy
    }

    pub fn x_centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_center(i)).collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y_center(j)).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dims == 2 {
            self.dx * self.dy
        } else {
            self.dx
        }
    }

    pub fn interior_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Interior storage indices in row-major order (x fastest).
    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.interior(i, j)))
    }

    /// Interior index of the cell whose centre is nearest to `x`.
    pub fn nearest_x(&self, x: f64) -> usize {
        let k = ((x - self.x0) / self.dx - 0.5).round();
        k.clamp(0.0, (self.nx - 1) as f64) as usize
    }

    pub fn nearest_y(&self, y: f64) -> usize {
        let k = ((y - self.y0) / self.dy - 0.5).round();
        k.clamp(0.0, (self.ny - 1) as f64) as usize
    }
}

fn check_extent(range: (f64, f64), n: usize) -> Result<()> {
    if n == 0 || !(range.1 > range.0) {
        return Err(Error::Config(format!(
            "invalid mesh extent [{}, {}] with {n} cells",
            range.0, range.1
        )));
    }
    Ok(())
}

/// Conserved variables on a mesh: `(ρ, ρu, E)` in 1D, `(ρ, ρu, ρv, E)` in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedStateGrid {
    pub mesh: Mesh,
    pub fields: Vec<Vec<f64>>,
    pub t: f64,
}

impl ConservedStateGrid {
    pub fn zeros(mesh: Mesh) -> Self {
        let n = mesh.len();
        let ncomp = mesh.dims + 2;
        Self {
            mesh,
            fields: vec![vec![0.0; n]; ncomp],
            t: 0.0,
        }
    }

    pub fn ncomp(&self) -> usize {
        self.fields.len()
    }

    /// Set interior cell `(i, j)` from primitives `(ρ, u, v, e)`.
    pub fn set_primitive(&mut self, i: usize, j: usize, rho: f64, u: f64, v: f64, e: f64) {
        let k = self.mesh.interior(i, j);
        self.fields[0][k] = rho;
        self.fields[1][k] = rho * u;
        let kin = if self.mesh.dims == 2 {
            self.fields[2][k] = rho * v;
            0.5 * rho * (u * u + v * v)
        } else {
            0.5 * rho * u * u
        };
        let last = self.ncomp() - 1;
        self.fields[last][k] = rho * e + kin;
    }

    /// Sum of each conserved component over interior cells times the cell volume.
    pub fn totals(&self) -> Vec<f64> {
        let vol = self.mesh.cell_volume();
        self.fields
            .iter()
            .map(|f| self.mesh.interior_indices().map(|k| f[k]).sum::<f64>() * vol)
            .collect()
    }

    /// Populate ghost cells according to `bc`.
    pub fn fill_ghosts(&mut self, bc: &Boundaries) {
        let m = self.mesh.clone();
        let g = m.ghost;
        let sx = m.sx();
        let rows: Vec<usize> = if m.dims == 2 {
            (g..g + m.ny).collect()
        } else {
            vec![0]
        };
        for f in &mut self.fields {
            for &r in &rows {
                let row = &mut f[r * sx..(r + 1) * sx];
                for k in 0..g {
                    row[k] = match bc.x_lo {
                        Boundary::Periodic => row[m.nx + k],
                        Boundary::Extrapolation => row[g],
                    };
                    row[g + m.nx + k] = match bc.x_hi {
                        Boundary::Periodic => row[g + k],
                        Boundary::Extrapolation => row[g + m.nx - 1],
                    };
                }
            }
            if m.dims == 2 {
                // full rows, so corners are filled too
                for k in 0..g {
                    let lo_src = match bc.y_lo {
                        Boundary::Periodic => m.ny + k,
                        Boundary::Extrapolation => g,
                    };
                    let hi_src = match bc.y_hi {
                        Boundary::Periodic => g + k,
                        Boundary::Extrapolation => g + m.ny - 1,
                    };
                    f.copy_within(lo_src * sx..(lo_src + 1) * sx, k * sx);
                    f.copy_within(hi_src * sx..(hi_src + 1) * sx, (g + m.ny + k) * sx);
                }
            }
        }
    }
}
