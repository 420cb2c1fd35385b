//! Reductions of exit ensembles: density grids, profile widths, beam moment
//! matrices and their invariants, transfer matrices and Jacobian maps of the
//! entry-to-exit map.

use std::io::{BufRead, Write};

use nalgebra::{Matrix4, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{propagate, PropagationOptions, ProtonState};
use crate::ensemble::{Batch, ExitRecord};
use crate::potential::TransverseField;
use crate::{Error, Result};

/// Axis-aligned rectangle `[x_min, x_max) x [y_min, y_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::DegenerateWindow);
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    /// Square window `[-half, half)^2`.
    pub fn centered(half: f64) -> Result<Self> {
        Self::new(-half, half, -half, half)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x < self.x_max && y >= self.y_min && y < self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Which pair of exit coordinates a grid bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// `(x, y)` in nm.
    Configuration,
    /// `(theta_x, theta_y)` in mrad.
    Angular,
}

impl Plane {
    pub fn name(&self) -> &'static str {
        match self {
            Plane::Configuration => "configuration",
            Plane::Angular => "angular",
        }
    }

    fn coordinates(&self, r: &ExitRecord) -> (f64, f64) {
        match self {
            Plane::Configuration => (r.x, r.y),
            Plane::Angular => (r.theta_x, r.theta_y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Two-dimensional yield histogram. Rows run along `y`, columns along `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub plane: Plane,
    pub nx: usize,
    pub ny: usize,
    pub window: Window,
    pub counts: Vec<u64>,
    pub out_of_window: u64,
    pub total: u64,
}

impl DensityGrid {
    pub fn new(plane: Plane, nx: usize, ny: usize, window: Window) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Config(format!("grid needs at least 2 bins per axis, got {nx}x{ny}")));
        }
        Ok(Self { plane, nx, ny, window, counts: vec![0; nx * ny], out_of_window: 0, total: 0 })
    }

    pub fn add(&mut self, x: f64, y: f64) {
        self.total += 1;
        if !self.window.contains(x, y) {
            self.out_of_window += 1;
            return;
        }
        let i = (((x - self.window.x_min) / self.bin_width(Axis::X)) as usize).min(self.nx - 1);
        let j = (((y - self.window.y_min) / self.bin_width(Axis::Y)) as usize).min(self.ny - 1);
        self.counts[j * self.nx + i] += 1;
    }

    /// Adds another grid with identical layout.
    pub fn merge(&mut self, other: &DensityGrid) -> Result<()> {
        if self.plane != other.plane || self.nx != other.nx || self.ny != other.ny || self.window != other.window {
            return Err(Error::Dimension("grids differ in plane, bins or window".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.out_of_window += other.out_of_window;
        self.total += other.total;
        Ok(())
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[j * self.nx + i]
    }

    pub fn in_window(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.window.width() / self.nx as f64,
            Axis::Y => self.window.height() / self.ny as f64,
        }
    }

    pub fn bin_center(&self, axis: Axis, index: usize) -> f64 {
        let lo = match axis {
            Axis::X => self.window.x_min,
            Axis::Y => self.window.y_min,
        };
        lo + (index as f64 + 0.5) * self.bin_width(axis)
    }

    /// Counts summed over the other axis.
    pub fn marginal(&self, axis: Axis) -> Vec<f64> {
        match axis {
            Axis::X => (0..self.nx)
                .map(|i| (0..self.ny).map(|j| self.count(i, j) as f64).sum())
                .collect(),
            Axis::Y => (0..self.ny)
                .map(|j| (0..self.nx).map(|i| self.count(i, j) as f64).sum())
                .collect(),
        }
    }

    /// Counts along the central row (`Axis::X`) or column (`Axis::Y`), the
    /// two bins straddling zero summed when the bin count is even.
    pub fn axis_profile(&self, axis: Axis) -> Vec<f64> {
        let (n_other, lo, width) = match axis {
            Axis::X => (self.ny, self.window.y_min, self.bin_width(Axis::Y)),
            Axis::Y => (self.nx, self.window.x_min, self.bin_width(Axis::X)),
        };
        let pos = -lo / width;
        let lines: Vec<usize> = if (pos - pos.round()).abs() < 1e-9 && pos.round() >= 1.0 {
            let k = pos.round() as usize;
            vec![k - 1, k.min(n_other - 1)]
        } else {
            vec![(pos.floor().max(0.0) as usize).min(n_other - 1)]
        };
        match axis {
            Axis::X => (0..self.nx)
                .map(|i| lines.iter().map(|&j| self.count(i, j) as f64).sum())
                .collect(),
            Axis::Y => (0..self.ny)
                .map(|j| lines.iter().map(|&i| self.count(i, j) as f64).sum())
                .collect(),
        }
    }

    /// Writes `# key=value` metadata lines followed by one CSV row of counts
    /// per `y` bin.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# plane={}", self.plane.name())?;
        writeln!(w, "# nx={}", self.nx)?;
        writeln!(w, "# ny={}", self.ny)?;
        writeln!(w, "# x_min={:e}", self.window.x_min)?;
        writeln!(w, "# x_max={:e}", self.window.x_max)?;
        writeln!(w, "# y_min={:e}", self.window.y_min)?;
        writeln!(w, "# y_max={:e}", self.window.y_max)?;
        writeln!(w, "# out_of_window={}", self.out_of_window)?;
        writeln!(w, "# total={}", self.total)?;
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx).map(|i| self.count(i, j).to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut meta = std::collections::HashMap::new();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for line in r.lines() {
            let line = line?;
            if let Some(kv) = line.strip_prefix("# ") {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("bad metadata line {line:?}")))?;
                meta.insert(k.to_owned(), v.to_owned());
            } else if !line.trim().is_empty() {
                let row = line
                    .split(',')
                    .map(|c| c.trim().parse::<u64>().map_err(|_| Error::Format(format!("bad count {c:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| Error::Format(format!("missing {k}")));
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Format(format!("bad value for {k}")))
        };
        let int = |k: &str| -> Result<u64> {
            get(k)?.parse().map_err(|_| Error::Format(format!("bad value for {k}")))
        };
        let plane = match get("plane")?.as_str() {
            "configuration" => Plane::Configuration,
            "angular" => Plane::Angular,
            other => return Err(Error::Format(format!("unknown plane {other:?}"))),
        };
        let window = Window::new(num("x_min")?, num("x_max")?, num("y_min")?, num("y_max")?)?;
        let (nx, ny) = (int("nx")? as usize, int("ny")? as usize);
        if rows.len() != ny || rows.iter().any(|r| r.len() != nx) {
            return Err(Error::Format(format!("expected {ny} rows of {nx} counts")));
        }
        let mut grid = DensityGrid::new(plane, nx, ny, window)?;
        grid.counts = rows.into_iter().flatten().collect();
        grid.out_of_window = int("out_of_window")?;
        grid.total = int("total")?;
        Ok(grid)
    }
}

/// Bins the channeled records; dechanneled ones are left out entirely.
pub fn histogram2d(
    records: &[ExitRecord],
    plane: Plane,
    bins: (usize, usize),
    window: Window,
) -> Result<DensityGrid> {
    let mut grid = DensityGrid::new(plane, bins.0, bins.1, window)?;
    for r in records.iter().filter(|r| r.is_channeled()) {
        let (a, b) = plane.coordinates(r);
        grid.add(a, b);
    }
    Ok(grid)
}

/// Full width at half maximum of a profile sampled at bin centres spaced
/// `width` apart, with linear interpolation of the half-maximum crossings.
/// A profile that never falls below half maximum is cut at its ends.
pub fn profile_fwhm(profile: &[f64], width: f64) -> Result<f64> {
    let (peak, &max) = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .ok_or(Error::UndefinedFwhm)?;
    let min = profile.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > min) {
        return Err(Error::UndefinedFwhm);
    }
    let half = 0.5 * max;
    let crossing = |from: usize, to: usize| -> f64 {
        let (a, b) = (profile[from], profile[to]);
        from as f64 + (to as f64 - from as f64) * (a - half) / (a - b)
    };
    let mut left = -0.5;
    for i in (0..peak).rev() {
        if profile[i] < half {
            left = crossing(i + 1, i);
            break;
        }
    }
    let mut right = profile.len() as f64 - 0.5;
    for i in peak + 1..profile.len() {
        if profile[i] < half {
            right = crossing(i - 1, i);
            break;
        }
    }
    Ok((right - left) * width)
}

/// FWHM of the marginal profile of `grid` along `axis`, in the grid's units.
pub fn fwhm(grid: &DensityGrid, axis: Axis) -> Result<f64> {
    profile_fwhm(&grid.marginal(axis), grid.bin_width(axis))
}

/// Centred moving average over `2 * half_width + 1` bins, shrinking at the
/// ends.
pub fn smooth(profile: &[f64], half_width: usize) -> Vec<f64> {
    let n = profile.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            profile[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    /// Height above the higher of the two minima separating it from taller
    /// peaks (or the profile ends).
    pub prominence: f64,
}

/// Local maxima of `profile` whose prominence is at least
/// `min_prominence` times the global maximum. Plateaus count once, at their
/// left edge.
pub fn find_peaks(profile: &[f64], min_prominence: f64) -> Vec<Peak> {
    let n = profile.len();
    let max = profile.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && profile[j + 1] == profile[i] {
            j += 1;
        }
        let rises = i == 0 || profile[i - 1] < profile[i];
        let falls = j == n - 1 || profile[j + 1] < profile[i];
        if rises && falls && profile[i] > 0.0 {
            let h = profile[i];
            let mut left_min = h;
            let mut k = i;
            while k > 0 && profile[k - 1] <= h {
                k -= 1;
                left_min = left_min.min(profile[k]);
            }
            let left_base = if k == 0 { left_min.min(profile[0]) } else { left_min };
            let mut right_min = h;
            let mut k = j;
            while k + 1 < n && profile[k + 1] <= h {
                k += 1;
                right_min = right_min.min(profile[k]);
            }
            let prominence = h - left_base.max(right_min);
            if prominence >= min_prominence * max {
                out.push(Peak { index: i, height: h, prominence });
            }
        }
        i = j + 1;
    }
    out
}

/// Channeled records inside the disk of `radius` about the origin of
/// `plane`.
pub fn central_yield(records: &[ExitRecord], plane: Plane, radius: f64) -> u64 {
    let r2 = radius * radius;
    records
        .iter()
        .filter(|r| r.is_channeled())
        .filter(|r| {
            let (a, b) = plane.coordinates(r);
            a * a + b * b <= r2
        })
        .count() as u64
}

/// Ordering of a four-dimensional phase-space subspace as `(q1, p1, q2, p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    /// `(x, theta_x, y, theta_y)`.
    Transverse,
    /// `(x, theta_x, Lambda, phi)` across a scan of batches.
    ScanX,
    /// `(y, theta_y, Lambda, phi)` across a scan of batches.
    ScanY,
}

/// Symmetric matrix of second moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSigma {
    pub matrix: Matrix4<f64>,
    pub subspace: Subspace,
    pub centered: bool,
    pub samples: usize,
}

impl BeamSigma {
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix).eigenvalues.min()
    }
}

fn moments(vectors: impl Iterator<Item = [f64; 4]>, centered: bool) -> (Matrix4<f64>, usize) {
    let data: Vec<[f64; 4]> = vectors.collect();
    let n = data.len();
    let mut mean = [0.0; 4];
    if centered {
        for v in &data {
            for k in 0..4 {
                mean[k] += v[k];
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
    }
    let mut m = Matrix4::zeros();
    for v in &data {
        for a in 0..4 {
            for b in a..4 {
                m[(a, b)] += (v[a] - mean[a]) * (v[b] - mean[b]);
            }
        }
    }
    for a in 0..4 {
        for b in a..4 {
            m[(a, b)] /= n as f64;
            m[(b, a)] = m[(a, b)];
        }
    }
    (m, n)
}

/// Second-moment matrix of the channeled records over
/// `(x, theta_x, y, theta_y)` in nm and mrad. Moments are taken about zero
/// unless `centered`.
pub fn beam_sigma(records: &[ExitRecord], centered: bool) -> Result<BeamSigma> {
    let channeled = records.iter().filter(|r| r.is_channeled());
    let (matrix, samples) = moments(channeled.map(|r| [r.x, r.theta_x, r.y, r.theta_y]), centered);
    if samples < 2 {
        return Err(Error::InsufficientData { what: "beam sigma", needed: 2, got: samples });
    }
    Ok(BeamSigma { matrix, subspace: Subspace::Transverse, centered, samples })
}

/// Second-moment matrix over `(q, theta_q, Lambda, phi)` pooled across the
/// batches of a scan, each batch tagged with its reduced thickness.
/// `phi` is the tilt in mrad.
pub fn beam_sigma_scan(batches: &[(f64, &Batch)], axis: Axis, centered: bool) -> Result<BeamSigma> {
    let vectors = batches.iter().flat_map(|(lambda, batch)| {
        let phi = batch.tilt_rad[0].hypot(batch.tilt_rad[1]) * 1e3;
        batch.channeled().map(move |r| match axis {
            Axis::X => [r.x, r.theta_x, *lambda, phi],
            Axis::Y => [r.y, r.theta_y, *lambda, phi],
        })
    });
    let (matrix, samples) = moments(vectors, centered);
    if samples < 2 {
        return Err(Error::InsufficientData { what: "beam sigma", needed: 2, got: samples });
    }
    let subspace = match axis {
        Axis::X => Subspace::ScanX,
        Axis::Y => Subspace::ScanY,
    };
    Ok(BeamSigma { matrix, subspace, centered, samples })
}

/// Symplectic form for the `(q1, p1, q2, p2)` ordering.
pub fn symplectic_j() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// `(I', sigma4)` with `I' = -Tr(Sigma J Sigma J) / 2` and
/// `sigma4 = det Sigma`.
pub fn invariants(sigma: &Matrix4<f64>) -> (f64, f64) {
    let j = symplectic_j();
    let sj = sigma * j;
    (-0.5 * (sj * sj).trace(), sigma.determinant())
}

/// Largest absolute entry of `M^T J M - J`.
pub fn symplectic_residual(m: &Matrix4<f64>) -> f64 {
    let j = symplectic_j();
    (m.transpose() * j * m - j).abs().max()
}

/// Finite-difference probe sizes for the transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub position_nm: f64,
    pub angle_rad: f64,
}

/// Linearised entry-to-exit map over `(x, phi_x, y, phi_y)` (nm, rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: Matrix4<f64>,
    pub determinant: f64,
    pub symplectic_residual: f64,
}

fn phase_vector(s: &ProtonState) -> [f64; 4] {
    [s.x, s.phi_x, s.y, s.phi_y]
}

fn with_phase(base: &ProtonState, v: [f64; 4]) -> ProtonState {
    ProtonState { x: v[0], phi_x: v[1], y: v[2], phi_y: v[3], ..*base }
}

/// Central-difference transfer matrix about `reference`. Energy loss and
/// scattering are switched off whatever `options` says.
pub fn estimate_transfer_matrix<F: TransverseField + ?Sized>(
    field: &F,
    length: f64,
    reference: &ProtonState,
    h: Perturbation,
    options: &PropagationOptions,
) -> Result<TransferMatrix> {
    if !(h.position_nm > 0.0 && h.angle_rad > 0.0) {
        return Err(Error::Domain { op: "estimate_transfer_matrix", name: "perturbation", value: h.position_nm.min(h.angle_rad) });
    }
    let opts = PropagationOptions {
        energy_loss: false,
        multiple_scattering: false,
        record_trajectory: false,
        ..*options
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut exit = |v: [f64; 4]| -> Result<[f64; 4]> {
        let p = propagate(&with_phase(reference, v), field, length, &opts, &mut rng)?;
        if let crate::dynamics::Fate::Dechanneled { depth, .. } = p.fate {
            return Err(Error::Dechanneled { depth });
        }
        Ok(phase_vector(&p.state))
    };
    let base = phase_vector(reference);
    let steps = [h.position_nm, h.angle_rad, h.position_nm, h.angle_rad];
    let mut m = Matrix4::zeros();
    for col in 0..4 {
        let mut plus = base;
        let mut minus = base;
        plus[col] += steps[col];
        minus[col] -= steps[col];
        let a = exit(plus)?;
        let b = exit(minus)?;
        for row in 0..4 {
            m[(row, col)] = (a[row] - b[row]) / (2.0 * steps[col]);
        }
    }
    Ok(TransferMatrix { m, determinant: m.determinant(), symplectic_residual: symplectic_residual(&m) })
}

/// One node of a Jacobian map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianNode {
    pub x: f64,
    pub y: f64,
    /// `d theta_x/dx d theta_y/dy - d theta_y/dx d theta_x/dy` in
    /// (mrad/nm)^2.
    pub j: f64,
    /// Differential cross section `1 / |J|`; `None` at caustics and invalid
    /// nodes.
    pub sigma: Option<f64>,
    pub caustic: bool,
    /// False when any stencil trajectory dechanneled.
    pub valid: bool,
}

/// Jacobian of the impact-point to exit-angle map at each of `points`,
/// from a four-point central stencil of half-width `h` nm. Nodes with
/// `|J| < caustic_threshold` are flagged as caustics.
#[allow(clippy::too_many_arguments)]
pub fn jacobian_map<F: TransverseField + ?Sized>(
    field: &F,
    length: f64,
    energy_ev: f64,
    tilt_rad: [f64; 2],
    points: &[(f64, f64)],
    h: f64,
    caustic_threshold: f64,
    options: &PropagationOptions,
) -> Result<Vec<JacobianNode>> {
    use rayon::prelude::*;
    if !(h > 0.0) {
        return Err(Error::Domain { op: "jacobian_map", name: "h", value: h });
    }
    let opts = PropagationOptions {
        energy_loss: false,
        multiple_scattering: false,
        record_trajectory: false,
        ..*options
    };
    opts.validate(length)?;
    let angles = |x: f64, y: f64| -> Option<(f64, f64)> {
        let s = ProtonState::new(x, y, tilt_rad[0], tilt_rad[1], energy_ev);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = propagate(&s, field, length, &opts, &mut rng).ok()?;
        p.fate.is_channeled().then_some((p.state.phi_x * 1e3, p.state.phi_y * 1e3))
    };
    Ok(points
        .par_iter()
        .map(|&(x, y)| {
            let stencil = (angles(x + h, y), angles(x - h, y), angles(x, y + h), angles(x, y - h));
            match stencil {
                (Some(xp), Some(xm), Some(yp), Some(ym)) => {
                    let dtx_dx = (xp.0 - xm.0) / (2.0 * h);
                    let dty_dx = (xp.1 - xm.1) / (2.0 * h);
                    let dtx_dy = (yp.0 - ym.0) / (2.0 * h);
                    let dty_dy = (yp.1 - ym.1) / (2.0 * h);
                    let j = dtx_dx * dty_dy - dty_dx * dtx_dy;
                    let caustic = j.abs() < caustic_threshold;
                    JacobianNode { x, y, j, sigma: (!caustic).then(|| 1.0 / j.abs()), caustic, valid: true }
                }
                _ => JacobianNode { x, y, j: f64::NAN, sigma: None, caustic: false, valid: false },
            }
        })
        .collect())
}

/// Zero-angle flux-enhancement estimate `ln|A0 k / (pi E phi^2)|`.
///
/// `a0` in nm^2, `e` in eV, `phi` in rad, `k` the harmonic stiffness in
/// eV/nm^2. Diverges to `+inf` at `phi = 0` and vanishes at
/// `phi = sqrt(A0 k / (pi E))`.
pub fn flux_enhancement(a0: f64, e: f64, phi: f64, k: f64) -> Result<f64> {
    check_flux_inputs(a0, e, k)?;
    if phi == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ratio = a0 * k / (std::f64::consts::PI * e * phi * phi);
    // the ratio is one in exact arithmetic at the boundary angle
    if (ratio - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(0.0);
    }
    Ok(ratio.ln())
}

/// Finite-angle form `ln|A0 / (A0 - pi E phi^2 / k)|`; `+inf` where the
/// denominator vanishes.
pub fn flux_enhancement_general(a0: f64, e: f64, phi: f64, k: f64) -> Result<f64> {
    check_flux_inputs(a0, e, k)?;
    let shift = std::f64::consts::PI * e * phi * phi / k;
    let denom = a0 - shift;
    if denom == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((a0 / denom).abs().ln())
}

/// Integration limits `(A_min, A_max)` of the flux-enhancement integral:
/// `A_min = A0 - pi E phi^2 / k`, `A_max = A0 - A_i - pi E phi^2 / k`.
pub fn enhancement_bounds(a0: f64, a_i: f64, e: f64, phi: f64, k: f64) -> Result<(f64, f64)> {
    check_flux_inputs(a0, e, k)?;
    let shift = std::f64::consts::PI * e * phi * phi / k;
    Ok((a0 - shift, a0 - a_i - shift))
}

/// Channel areas `(A0, A_i) = (pi S0^2 / alpha, pi rho_cm^2 / alpha)`.
pub fn channel_areas(s0: f64, rho_cm: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::Domain { op: "channel_areas", name: "alpha", value: alpha });
    }
    let pi = std::f64::consts::PI;
    Ok((pi * s0 * s0 / alpha, pi * rho_cm * rho_cm / alpha))
}

fn check_flux_inputs(a0: f64, e: f64, k: f64) -> Result<()> {
    for (name, value) in [("a0", a0), ("e", e), ("k", k)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { op: "flux_enhancement", name, value });
        }
    }
    Ok(())
}
