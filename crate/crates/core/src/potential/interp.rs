use rayon::prelude::*;

use super::{PotentialField, TransverseField};
use crate::crystal::ChannelGeometry;
use crate::{Error, Result};

/// Bicubic Hermite tabulation of a [`PotentialField`] over the string mesh.
///
/// Nodes carry the exact value, first derivatives and mixed derivative of
/// the motion potential and the electron density, so the interpolant and
/// its gradient are continuous. The node lattice is offset by half a cell
/// from the string lattice, which keeps every node off the string axes.
///
/// Built once, then shared read-only between worker threads.
#[derive(Debug, Clone)]
pub struct InterpolatedField {
    geometry: ChannelGeometry,
    origin: f64,
    spacing: f64,
    cells: usize,
    // per node: U, h U_x, h U_y, h^2 U_xy, n, h n_x, h n_y, h^2 n_xy
    nodes: Vec<[f64; 8]>,
}

#[derive(Clone, Copy)]
struct Weights {
    a: [f64; 2],
    b: [f64; 2],
    da: [f64; 2],
    db: [f64; 2],
}

#[inline]
fn hermite(t: f64) -> Weights {
    let t2 = t * t;
    let t3 = t2 * t;
    Weights {
        a: [2.0 * t3 - 3.0 * t2 + 1.0, -2.0 * t3 + 3.0 * t2],
        b: [t3 - 2.0 * t2 + t, t3 - t2],
        da: [6.0 * t2 - 6.0 * t, -6.0 * t2 + 6.0 * t],
        db: [3.0 * t2 - 4.0 * t + 1.0, 3.0 * t2 - 2.0 * t],
    }
}

impl InterpolatedField {
    /// Tabulates `field` with `nodes_per_pitch` cells per string pitch.
    pub fn new(field: &PotentialField, nodes_per_pitch: usize) -> Result<Self> {
        if nodes_per_pitch < 2 {
            return Err(Error::Config(format!(
                "interpolation needs at least 2 cells per string pitch, got {nodes_per_pitch}"
            )));
        }
        let geometry = field.geometry().clone();
        let spacing = geometry.string_pitch / nodes_per_pitch as f64;
        let half = geometry.mesh_half_width();
        let origin = -half - 0.5 * spacing;
        let cells = (2 * geometry.coordination_lines as usize - 1) * nodes_per_pitch + 1;
        let n = cells + 1;
        let h = spacing;
        let nodes: Vec<[f64; 8]> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let x = origin + (idx % n) as f64 * h;
                let y = origin + (idx / n) as f64 * h;
                let (u, d) = field.node_data(x, y);
                [u[0], h * u[1], h * u[2], h * h * u[3], d[0], h * d[1], h * d[2], h * h * d[3]]
            })
            .collect();
        Ok(Self { geometry, origin, spacing, cells, nodes })
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geometry
    }

    /// Node spacing (nm).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    fn locate(&self, v: f64) -> (usize, f64) {
        let u = (v - self.origin) / self.spacing;
        let i = (u.floor().max(0.0) as usize).min(self.cells - 1);
        (i, u - i as f64)
    }

    /// `(f, f_x, f_y)` of the tabulated quantity at `offset` (0 potential,
    /// 4 density). `derivs` skips the value when only the gradient is needed.
    #[inline]
    fn eval(&self, x: f64, y: f64, offset: usize, value: bool, derivs: bool) -> [f64; 3] {
        let (i, t) = self.locate(x);
        let (j, s) = self.locate(y);
        let wx = hermite(t);
        let wy = hermite(s);
        let n = self.cells + 1;
        let mut out = [0.0; 3];
        for cj in 0..2 {
            for ci in 0..2 {
                let node = &self.nodes[(j + cj) * n + i + ci];
                let (f, fx, fy, fxy) =
                    (node[offset], node[offset + 1], node[offset + 2], node[offset + 3]);
                if value {
                    out[0] += f * wx.a[ci] * wy.a[cj]
                        + fx * wx.b[ci] * wy.a[cj]
                        + fy * wx.a[ci] * wy.b[cj]
                        + fxy * wx.b[ci] * wy.b[cj];
                }
                if derivs {
                    out[1] += f * wx.da[ci] * wy.a[cj]
                        + fx * wx.db[ci] * wy.a[cj]
                        + fy * wx.da[ci] * wy.b[cj]
                        + fxy * wx.db[ci] * wy.b[cj];
                    out[2] += f * wx.a[ci] * wy.da[cj]
                        + fx * wx.b[ci] * wy.da[cj]
                        + fy * wx.a[ci] * wy.db[cj]
                        + fxy * wx.b[ci] * wy.db[cj];
                }
            }
        }
        out[1] /= self.spacing;
        out[2] /= self.spacing;
        out
    }
}

impl TransverseField for InterpolatedField {
    #[inline]
    fn potential(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y, 0, true, false)[0]
    }

    #[inline]
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let v = self.eval(x, y, 0, false, true);
        [v[1], v[2]]
    }

    #[inline]
    fn electron_density(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y, 4, true, false)[0].max(0.0)
    }

    fn nearest_string_distance(&self, x: f64, y: f64) -> f64 {
        self.geometry.nearest_string_distance(x, y)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.geometry.inside_mesh(x, y)
    }

    fn screening_radius(&self) -> f64 {
        self.geometry.screening_radius
    }

    fn projectile_charge(&self) -> u32 {
        self.geometry.z1
    }
}
