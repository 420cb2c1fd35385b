//! Continuum potential of the atomic strings around the channel.
//!
//! Each string contributes the Moliere string potential
//!
//! ```text
//! U_j(r) = (2 Z1 Z2 e^2 / d) * sum_i alpha_i K0(beta_i r / a)
//! ```
//!
//! The thermal average `U + (sigma_th^2 / 2) (U_xx + U_yy)` stays inside the
//! same family of functions because `K0(k r)` solves the modified Helmholtz
//! equation, `Laplacian K0(k r) = k^2 K0(k r)`. The averaged potential is
//! therefore the static sum with weights `alpha_i (1 + sigma_th^2 k_i^2 / 2)`,
//! and its gradient and Laplacian are available in closed form.

pub mod bessel;
mod interp;

pub use interp::InterpolatedField;

use crate::constants::{COULOMB_EV_NM, PROTON_MASS_EV, SPEED_OF_LIGHT_NM_PER_S};
use crate::crystal::ChannelGeometry;
use crate::{Error, Result};
use bessel::{k0_k1_unchecked, k0_unchecked, k1_unchecked};

/// Moliere screening weights.
pub const MOLIERE_ALPHA: [f64; 3] = [0.35, 0.55, 0.10];
/// Moliere screening exponents.
pub const MOLIERE_BETA: [f64; 3] = [0.30, 1.20, 6.00];

// Terms with beta r / a beyond this are below 1e-26 of their prefactor.
const TERM_CUTOFF: f64 = 60.0;

/// Short-range repulsion added per string on top of the Moliere term.
///
/// Neither form is thermally averaged, and neither enters the electron
/// density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Repulsion {
    /// Born term `b / r^n` (eV, r in nm).
    Born { b: f64, n: f64 },
    /// Born-Mayer overlap term `b exp(-r / rho)`.
    Exponential { b: f64, rho: f64 },
}

impl Repulsion {
    /// `(f, f', f'')` of the radial profile at `r`.
    #[inline]
    fn radial(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            Repulsion::Born { b, n } => {
                let f = b * r.powf(-n);
                (f, -n * f / r, n * (n + 1.0) * f / (r * r))
            }
            Repulsion::Exponential { b, rho } => {
                let f = b * (-r / rho).exp();
                (f, -f / rho, f / (rho * rho))
            }
        }
    }
}

/// Second partial derivatives of a potential (eV/nm^2).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hessian {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Hessian {
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sample {
    value: f64,
    gx: f64,
    gy: f64,
    hxx: f64,
    hyy: f64,
    hxy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Read-only field interface consumed by the trajectory integrator.
///
/// `potential` and `gradient` are the potential governing transverse motion
/// (the thermally averaged one when thermal averaging is enabled).
pub trait TransverseField: Sync {
    /// Potential energy (eV).
    fn potential(&self, x: f64, y: f64) -> f64;
    /// Gradient of [`TransverseField::potential`] (eV/nm).
    fn gradient(&self, x: f64, y: f64) -> [f64; 2];
    /// Local electron density (nm^-3).
    fn electron_density(&self, x: f64, y: f64) -> f64;
    /// Distance (nm) to the closest atomic string.
    fn nearest_string_distance(&self, x: f64, y: f64) -> f64;
    /// Whether the point lies in the region where the field is modelled.
    fn contains(&self, x: f64, y: f64) -> bool;
    /// Screening length (nm) setting the close-approach scale.
    fn screening_radius(&self) -> f64;
    /// Atomic number of the projectile.
    fn projectile_charge(&self) -> u32 {
        1
    }
}

/// Moliere continuum potential of a channel geometry.
#[derive(Debug, Clone)]
pub struct PotentialField {
    geometry: ChannelGeometry,
    alpha: [f64; 3],
    beta: [f64; 3],
    thermal_enabled: bool,
    repulsion: Option<Repulsion>,
    prefactor: f64,
    wavenumbers: [f64; 3],
    thermal_weights: [f64; 3],
    laplacian_weights: [f64; 3],
    thermal_laplacian_weights: [f64; 3],
}

impl PotentialField {
    /// Moliere field with thermal averaging enabled and no repulsion term.
    pub fn new(geometry: ChannelGeometry) -> Self {
        Self::with_coefficients(geometry, MOLIERE_ALPHA, MOLIERE_BETA)
            .expect("Moliere coefficients are valid")
    }

    /// Field with custom screening coefficients. `alpha` must sum to one and
    /// every `beta` must be positive.
    pub fn with_coefficients(
        geometry: ChannelGeometry,
        alpha: [f64; 3],
        beta: [f64; 3],
    ) -> Result<Self> {
        let total: f64 = alpha.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("screening weights sum to {total}, not 1")));
        }
        if beta.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::Config("screening exponents must be positive".into()));
        }
        let a = geometry.screening_radius;
        let sigma2 = geometry.sigma_th * geometry.sigma_th;
        let wavenumbers = beta.map(|b| b / a);
        let mut thermal_weights = [0.0; 3];
        let mut laplacian_weights = [0.0; 3];
        let mut thermal_laplacian_weights = [0.0; 3];
        for i in 0..3 {
            let k2 = wavenumbers[i] * wavenumbers[i];
            thermal_weights[i] = alpha[i] * (1.0 + 0.5 * sigma2 * k2);
            laplacian_weights[i] = alpha[i] * k2;
            thermal_laplacian_weights[i] = thermal_weights[i] * k2;
        }
        let prefactor = 2.0 * f64::from(geometry.z1) * f64::from(geometry.z2) * COULOMB_EV_NM
            / geometry.d_string;
        Ok(Self {
            geometry,
            alpha,
            beta,
            thermal_enabled: true,
            repulsion: None,
            prefactor,
            wavenumbers,
            thermal_weights,
            laplacian_weights,
            thermal_laplacian_weights,
        })
    }

    pub fn with_thermal(mut self, enabled: bool) -> Self {
        self.thermal_enabled = enabled;
        self
    }

    pub fn with_repulsion(mut self, repulsion: Option<Repulsion>) -> Self {
        self.repulsion = repulsion;
        self
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geometry
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    pub fn beta(&self) -> [f64; 3] {
        self.beta
    }

    pub fn thermal_enabled(&self) -> bool {
        self.thermal_enabled
    }

    pub fn repulsion(&self) -> Option<Repulsion> {
        self.repulsion
    }

    /// `2 Z1 Z2 e^2 / d` (eV).
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    fn dynamic_weights(&self) -> &[f64; 3] {
        if self.thermal_enabled {
            &self.thermal_weights
        } else {
            &self.alpha
        }
    }

    fn check_point(&self, x: f64, y: f64) -> Result<()> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Domain { op: "channel_potential", name: "x/y", value: f64::NAN });
        }
        let threshold = 1e-12 * self.geometry.screening_radius;
        if self.geometry.nearest_string_distance(x, y) <= threshold {
            return Err(Error::Singularity { x, y });
        }
        Ok(())
    }

    #[inline]
    fn sum_strings(&self, x: f64, y: f64, weights: &[f64; 3], order: Order, repulsion: bool) -> Sample {
        let mut s = Sample::default();
        for p in &self.geometry.string_positions {
            let dx = x - p[0];
            let dy = y - p[1];
            let r2 = dx * dx + dy * dy;
            let r = r2.sqrt();
            for i in 0..3 {
                let w = weights[i];
                let k = self.wavenumbers[i];
                let z = k * r;
                if w == 0.0 || z > TERM_CUTOFF {
                    continue;
                }
                match order {
                    Order::Value => s.value += w * k0_unchecked(z),
                    Order::Gradient => {
                        let g = -w * k * k1_unchecked(z) / r;
                        s.gx += g * dx;
                        s.gy += g * dy;
                    }
                    Order::Hessian => {
                        let (k0, k1) = k0_k1_unchecked(z);
                        s.value += w * k0;
                        let g = -w * k * k1 / r;
                        s.gx += g * dx;
                        s.gy += g * dy;
                        let a = w * k * k * k0 / r2;
                        let b = w * k * k1 / (r2 * r);
                        s.hxx += a * dx * dx + b * (2.0 * dx * dx - r2);
                        s.hyy += a * dy * dy + b * (2.0 * dy * dy - r2);
                        s.hxy += (a + 2.0 * b) * dx * dy;
                    }
                }
            }
        }
        let c = self.prefactor;
        s.value *= c;
        s.gx *= c;
        s.gy *= c;
        s.hxx *= c;
        s.hyy *= c;
        s.hxy *= c;
        if repulsion {
            if let Some(rep) = self.repulsion {
                self.add_repulsion(&mut s, x, y, rep, order);
            }
        }
        s
    }

    fn add_repulsion(&self, s: &mut Sample, x: f64, y: f64, rep: Repulsion, order: Order) {
        for p in &self.geometry.string_positions {
            let dx = x - p[0];
            let dy = y - p[1];
            let r2 = dx * dx + dy * dy;
            let r = r2.sqrt();
            let (f, f1, f2) = rep.radial(r);
            match order {
                Order::Value => s.value += f,
                Order::Gradient => {
                    s.gx += f1 * dx / r;
                    s.gy += f1 * dy / r;
                }
                Order::Hessian => {
                    s.value += f;
                    s.gx += f1 * dx / r;
                    s.gy += f1 * dy / r;
                    // d2f/dx2 = f'' dx^2/r^2 + f' (r^2 - dx^2)/r^3
                    s.hxx += f2 * dx * dx / r2 + f1 * (r2 - dx * dx) / (r2 * r);
                    s.hyy += f2 * dy * dy / r2 + f1 * (r2 - dy * dy) / (r2 * r);
                    s.hxy += (f2 / r2 - f1 / (r2 * r)) * dx * dy;
                }
            }
        }
    }

    /// Static continuum potential of a single string at distance `r` (eV).
    pub fn string_potential(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain { op: "string_potential", name: "r", value: r });
        }
        let sum: f64 = (0..3)
            .map(|i| self.alpha[i] * k0_unchecked(self.wavenumbers[i] * r))
            .sum();
        Ok(self.prefactor * sum)
    }

    /// Static potential summed over all strings (eV).
    pub fn channel_potential(&self, x: f64, y: f64) -> Result<f64> {
        self.check_point(x, y)?;
        Ok(self.sum_strings(x, y, &self.alpha, Order::Value, true).value)
    }

    /// Gradient of the static potential (eV/nm).
    pub fn gradient(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        self.check_point(x, y)?;
        let s = self.sum_strings(x, y, &self.alpha, Order::Gradient, true);
        Ok([s.gx, s.gy])
    }

    /// Second derivatives of the static potential (eV/nm^2).
    pub fn potential_hessian(&self, x: f64, y: f64) -> Result<Hessian> {
        self.check_point(x, y)?;
        let s = self.sum_strings(x, y, &self.alpha, Order::Hessian, true);
        Ok(Hessian { xx: s.hxx, yy: s.hyy, xy: s.hxy })
    }

    /// Analytic Laplacian of the static potential (eV/nm^2), using
    /// `Laplacian K0(k r) = k^2 K0(k r)` for the Moliere part.
    pub fn laplacian(&self, x: f64, y: f64) -> Result<f64> {
        self.check_point(x, y)?;
        let mut lap = self
            .sum_strings(x, y, &self.laplacian_weights, Order::Value, false)
            .value;
        if let Some(rep) = self.repulsion {
            for p in &self.geometry.string_positions {
                let r = (x - p[0]).hypot(y - p[1]);
                let (_, f1, f2) = rep.radial(r);
                lap += f2 + f1 / r;
            }
        }
        Ok(lap)
    }

    /// Thermally averaged potential `U + (sigma_th^2 / 2) (U_xx + U_yy)` (eV).
    ///
    /// Returns the static potential when thermal averaging is disabled.
    pub fn thermal_potential(&self, x: f64, y: f64) -> Result<f64> {
        if !self.thermal_enabled {
            return self.channel_potential(x, y);
        }
        self.check_point(x, y)?;
        let s = self.sum_strings(x, y, &self.alpha, Order::Hessian, true);
        let sigma = self.geometry.sigma_th;
        Ok(s.value + 0.5 * sigma * sigma * (s.hxx + s.hyy))
    }

    /// Gradient of the potential governing the motion (eV/nm).
    pub fn thermal_gradient(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        self.check_point(x, y)?;
        let s = self.sum_strings(x, y, self.dynamic_weights(), Order::Gradient, true);
        Ok([s.gx, s.gy])
    }

    /// Hessian of the potential governing the motion (eV/nm^2).
    pub fn thermal_hessian(&self, x: f64, y: f64) -> Result<Hessian> {
        self.check_point(x, y)?;
        let s = self.sum_strings(x, y, self.dynamic_weights(), Order::Hessian, true);
        Ok(Hessian { xx: s.hxx, yy: s.hyy, xy: s.hxy })
    }

    /// Electron density `Laplacian(U_th) / (4 pi e^2)` in nm^-3.
    pub fn electron_density(&self, x: f64, y: f64) -> Result<f64> {
        self.check_point(x, y)?;
        Ok(self.electron_density_unchecked(x, y))
    }

    /// Motion potential and electron density with their first derivatives
    /// and mixed second derivative: `[f, f_x, f_y, f_xy]` each.
    pub(crate) fn node_data(&self, x: f64, y: f64) -> ([f64; 4], [f64; 4]) {
        let u = self.sum_strings(x, y, self.dynamic_weights(), Order::Hessian, true);
        let weights = if self.thermal_enabled {
            &self.thermal_laplacian_weights
        } else {
            &self.laplacian_weights
        };
        let n = self.sum_strings(x, y, weights, Order::Hessian, false);
        let scale = 1.0 / (4.0 * std::f64::consts::PI * COULOMB_EV_NM);
        (
            [u.value, u.gx, u.gy, u.hxy],
            [n.value * scale, n.gx * scale, n.gy * scale, n.hxy * scale],
        )
    }

    fn electron_density_unchecked(&self, x: f64, y: f64) -> f64 {
        let weights = if self.thermal_enabled {
            &self.thermal_laplacian_weights
        } else {
            &self.laplacian_weights
        };
        let lap = self.sum_strings(x, y, weights, Order::Value, false).value;
        lap / (4.0 * std::f64::consts::PI * COULOMB_EV_NM)
    }

    /// Curvature `d2U/dx2` of the motion potential on the channel axis.
    pub fn axis_curvature(&self) -> f64 {
        self.sum_strings(0.0, 0.0, self.dynamic_weights(), Order::Hessian, true).hxx
    }

    /// Frequency (Hz) of small transverse oscillations about the channel
    /// axis, `(1 / 2 pi) sqrt(k / m_p)` with `k` the axis curvature.
    ///
    /// In the continuum model the frequency does not depend on the proton
    /// energy.
    pub fn transverse_frequency(&self) -> Result<f64> {
        let curvature = self.axis_curvature();
        if !(curvature > 0.0) {
            return Err(Error::DegenerateChannel { curvature });
        }
        let omega = SPEED_OF_LIGHT_NM_PER_S * (curvature / PROTON_MASS_EV).sqrt();
        Ok(omega / (2.0 * std::f64::consts::PI))
    }
}

impl TransverseField for PotentialField {
    #[inline]
    fn potential(&self, x: f64, y: f64) -> f64 {
        self.sum_strings(x, y, self.dynamic_weights(), Order::Value, true).value
    }

    #[inline]
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let s = self.sum_strings(x, y, self.dynamic_weights(), Order::Gradient, true);
        [s.gx, s.gy]
    }

    #[inline]
    fn electron_density(&self, x: f64, y: f64) -> f64 {
        self.electron_density_unchecked(x, y)
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

/// Quadratic expansion `U0 + k (x^2 + y^2) / 2` of a channel about its axis,
/// with the axis electron density held constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicField {
    pub z1: u32,
    pub u0: f64,
    pub stiffness: f64,
    pub electron_density: f64,
    pub half_width: f64,
    pub screening_radius: f64,
}

impl HarmonicField {
    /// Expansion of the motion potential of `field` about the channel axis.
    pub fn from_field(field: &PotentialField) -> Self {
        Self {
            z1: field.geometry.z1,
            u0: TransverseField::potential(field, 0.0, 0.0),
            stiffness: field.axis_curvature(),
            electron_density: field.electron_density_unchecked(0.0, 0.0),
            half_width: field.geometry.mesh_half_width(),
            screening_radius: field.geometry.screening_radius,
        }
    }

    /// Angular wavenumber (rad/nm) of small oscillations at `energy_ev`,
    /// from `x'' = -k x / (2 E)`.
    pub fn wavenumber(&self, energy_ev: f64) -> f64 {
        (self.stiffness / (2.0 * energy_ev)).sqrt()
    }
}

impl TransverseField for HarmonicField {
    fn potential(&self, x: f64, y: f64) -> f64 {
        self.u0 + 0.5 * self.stiffness * (x * x + y * y)
    }

    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        [self.stiffness * x, self.stiffness * y]
    }

    fn electron_density(&self, _x: f64, _y: f64) -> f64 {
        self.electron_density
    }

    fn nearest_string_distance(&self, _x: f64, _y: f64) -> f64 {
        f64::INFINITY
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x.abs() < self.half_width && y.abs() < self.half_width
    }

    fn screening_radius(&self) -> f64 {
        self.screening_radius
    }

    fn projectile_charge(&self) -> u32 {
        self.z1
    }
}

/// Field-free medium with a uniform electron density, as seen by a proton
/// in an amorphous target. Used to isolate energy loss and scattering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMedium {
    pub electron_density: f64,
    pub z1: u32,
}

impl TransverseField for UniformMedium {
    fn potential(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }

    fn gradient(&self, _x: f64, _y: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn electron_density(&self, _x: f64, _y: f64) -> f64 {
        self.electron_density
    }

    fn nearest_string_distance(&self, _x: f64, _y: f64) -> f64 {
        f64::INFINITY
    }

    fn contains(&self, _x: f64, _y: f64) -> bool {
        true
    }

    fn screening_radius(&self) -> f64 {
        1.0
    }

    fn projectile_charge(&self) -> u32 {
        self.z1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{build_channel, CrystalConfig};

    fn field_with(lines: u32) -> PotentialField {
        let cfg = CrystalConfig { coordination_lines: lines, ..Default::default() };
        PotentialField::new(build_channel(&cfg).unwrap())
    }

    #[test]
    fn string_potential_at_one_screening_radius() {
        let f = field_with(3);
        let a = f.geometry().screening_radius;
        let u = f.string_potential(a).unwrap();
        // 74.2375 eV * (0.35 K0(0.3) + 0.55 K0(1.2) + 0.1 K0(6))
        let oracle = f.prefactor()
            * (0.35 * 1.372460060544297 + 0.55 * 0.3185082202865936 + 0.10 * 0.001243994328013123);
        assert!((u - oracle).abs() < 1e-12 * oracle);
        assert!((u - 48.7).abs() < 0.05);
    }

    #[test]
    fn string_potential_decreasing() {
        let f = field_with(1);
        let mut r = 1e-4;
        let mut prev = f.string_potential(r).unwrap();
        while r < 5.0 {
            r *= 2.0;
            let next = f.string_potential(r).unwrap();
            assert!(next < prev);
            prev = next;
        }
        assert!(f.string_potential(200.0).unwrap() < 1e-100);
        assert!(f.string_potential(0.0).is_err());
    }

    #[test]
    fn four_string_center_value() {
        let f = field_with(1);
        let r = f.geometry().string_pitch / std::f64::consts::SQRT_2;
        let u = f.channel_potential(0.0, 0.0).unwrap();
        assert!((u - 4.0 * f.string_potential(r).unwrap()).abs() < 1e-12 * u);
    }

    #[test]
    fn additivity_over_strings() {
        let f = field_with(3);
        let (x, y) = (0.031, -0.017);
        let direct: f64 = f
            .geometry()
            .string_positions
            .iter()
            .map(|p| f.string_potential((x - p[0]).hypot(y - p[1])).unwrap())
            .sum();
        let u = f.channel_potential(x, y).unwrap();
        assert!((u - direct).abs() < 1e-12 * u);
    }

    #[test]
    fn gradient_vanishes_on_axis() {
        let f = field_with(3);
        let g = f.gradient(0.0, 0.0).unwrap();
        assert!(g[0].abs() < 1e-10 && g[1].abs() < 1e-10);
        let g = f.thermal_gradient(0.0, 0.0).unwrap();
        assert!(g[0].abs() < 1e-10 && g[1].abs() < 1e-10);
    }

    #[test]
    fn hessian_symmetric_on_axis() {
        let f = field_with(3);
        let h = f.potential_hessian(0.0, 0.0).unwrap();
        assert!((h.xx - h.yy).abs() < 1e-10 * h.xx);
        assert!(h.xy.abs() < 1e-9);
    }

    #[test]
    fn singular_on_strings() {
        let f = field_with(2);
        let p = f.geometry().string_positions[3];
        assert!(matches!(f.channel_potential(p[0], p[1]), Err(Error::Singularity { .. })));
        assert!(f.laplacian(p[0], p[1]).is_err());
    }

    #[test]
    fn zero_vibration_amplitude_removes_thermal_correction() {
        let cfg = CrystalConfig { sigma_th: 0.0, ..Default::default() };
        let f = PotentialField::new(build_channel(&cfg).unwrap());
        for &(x, y) in &[(0.0, 0.0), (0.03, 0.05), (-0.07, 0.01)] {
            assert_eq!(f.thermal_potential(x, y).unwrap(), f.channel_potential(x, y).unwrap());
        }
    }

    #[test]
    fn thermal_weights_match_literal_average() {
        let f = field_with(3);
        for &(x, y) in &[(0.0, 0.0), (0.03, 0.05), (-0.07, 0.01), (0.2, 0.12)] {
            let literal = f.thermal_potential(x, y).unwrap();
            let weighted = TransverseField::potential(&f, x, y);
            assert!((literal - weighted).abs() < 1e-12 * literal.abs());
        }
    }

    #[test]
    fn cutoff_of_outer_lines_is_small_at_axis() {
        let u3 = field_with(3).channel_potential(0.0, 0.0).unwrap();
        let u5 = field_with(5).channel_potential(0.0, 0.0).unwrap();
        assert!(((u5 - u3) / u5).abs() < 1e-3);
    }

    #[test]
    fn repulsion_terms_are_consistent() {
        for rep in [Repulsion::Born { b: 1e-3, n: 6.0 }, Repulsion::Exponential { b: 50.0, rho: 0.02 }] {
            let f = field_with(2).with_repulsion(Some(rep));
            let (x, y, h) = (0.021, -0.034, 1e-5);
            let u = |x, y| f.channel_potential(x, y).unwrap();
            let g = f.gradient(x, y).unwrap();
            let fd_x = (u(x + h, y) - u(x - h, y)) / (2.0 * h);
            assert!((g[0] - fd_x).abs() < 1e-6 * g[0].abs().max(1.0));
            let hess = f.potential_hessian(x, y).unwrap();
            let lap = f.laplacian(x, y).unwrap();
            assert!((hess.trace() - lap).abs() < 1e-9 * lap.abs());
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        let g = build_channel(&CrystalConfig::default()).unwrap();
        assert!(PotentialField::with_coefficients(g.clone(), [0.3, 0.3, 0.3], MOLIERE_BETA).is_err());
        assert!(PotentialField::with_coefficients(g, MOLIERE_ALPHA, [0.3, 0.0, 6.0]).is_err());
        assert_eq!(MOLIERE_ALPHA.iter().sum::<f64>(), 1.0);
    }
}
