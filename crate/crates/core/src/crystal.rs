//! Geometry of the `<100>` axial channel of diamond-cubic silicon.
//!
//! Projected along `<100>`, the two fcc sublattices of the diamond structure
//! form square meshes of pitch `a/2` offset by `(a/4, a/4)`. Together they
//! give a square mesh of atomic strings with pitch `s = a sqrt(2) / 4`, each
//! string holding one atom per lattice constant along the axis. The frame
//! used here has its origin on a channel axis and its `x`, `y` axes parallel
//! to the channel walls, so strings sit at `((m + 1/2) s, (n + 1/2) s)`.
//!
//! Coordination line `k` (1-based) is the square ring of strings at
//! Chebyshev distance `(k - 1/2) s` from the axis; it holds `8k - 4` strings.

use crate::constants::{BOHR_RADIUS_NM, COULOMB_EV_NM};
use crate::phasespace::Window;
use crate::{Error, Result};

/// User-facing crystal parameters. Energies in MeV at this boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalConfig {
    pub material: String,
    pub axis: String,
    /// Cubic lattice constant (nm).
    pub lattice_constant: f64,
    /// Number of square coordination lines of strings kept around the axis.
    pub coordination_lines: u32,
    /// One-dimensional thermal vibration amplitude (nm).
    pub sigma_th: f64,
    pub z1: u32,
    pub z2: u32,
    /// Projectile energy (MeV) at which the critical angle is evaluated.
    pub energy_mev: f64,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        Self {
            material: "Si".to_owned(),
            axis: "100".to_owned(),
            lattice_constant: 0.5431,
            coordination_lines: 3,
            sigma_th: 0.0074,
            z1: 1,
            z2: 14,
            energy_mev: 1.0,
        }
    }
}

impl CrystalConfig {
    /// Every violated constraint, one message per field.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.material.eq_ignore_ascii_case("si") {
            out.push(format!("crystal.material: only Si is supported, got {:?}", self.material));
        }
        if self.axis.trim_matches(|c| c == '<' || c == '>') != "100" {
            out.push(format!("crystal.axis: only <100> is supported, got {:?}", self.axis));
        }
        if !(self.lattice_constant > 0.0 && self.lattice_constant.is_finite()) {
            out.push(format!("crystal.lattice_constant must be positive, got {}", self.lattice_constant));
        }
        if self.coordination_lines < 1 {
            out.push("crystal.coordination_lines must be at least 1".to_owned());
        }
        if !(self.sigma_th >= 0.0 && self.sigma_th.is_finite()) {
            out.push(format!("crystal.sigma_th must be non-negative, got {}", self.sigma_th));
        }
        if self.z1 < 1 {
            out.push("crystal.z1 must be at least 1".to_owned());
        }
        if self.z2 < 1 {
            out.push("crystal.z2 must be at least 1".to_owned());
        }
        if !(self.energy_mev > 0.0 && self.energy_mev.is_finite()) {
            out.push(format!("crystal.energy_mev must be positive, got {}", self.energy_mev));
        }
        out
    }
}

/// Immutable description of one crystal/projectile pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGeometry {
    /// Transverse string positions (nm) relative to the channel axis.
    pub string_positions: Vec<[f64; 2]>,
    /// Atomic spacing along a string (nm).
    pub d_string: f64,
    pub lattice_constant: f64,
    /// Moliere screening radius `a` (nm).
    pub screening_radius: f64,
    pub z1: u32,
    pub z2: u32,
    pub sigma_th: f64,
    /// Critical channeling angle (mrad) at `energy_ev`.
    pub psi_c: f64,
    pub energy_ev: f64,
    /// Pitch of the projected string mesh (nm).
    pub string_pitch: f64,
    pub coordination_lines: u32,
}

/// Thomas-Fermi screening radius `(9 pi^2 / (128 z2))^(1/3) a0` in nm.
pub fn screening_radius(z2: u32) -> Result<f64> {
    if z2 < 1 {
        return Err(Error::Domain {
            op: "screening_radius",
            name: "z2",
            value: f64::from(z2),
        });
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok((9.0 * pi2 / (128.0 * f64::from(z2))).cbrt() * BOHR_RADIUS_NM)
}

/// Lindhard critical angle `sqrt(2 z1 z2 e^2 / (d E))` in mrad.
///
/// `d` is the atomic spacing along the string in nm and `energy_ev` the
/// projectile kinetic energy in eV.
pub fn critical_angle(z1: u32, z2: u32, d: f64, energy_ev: f64) -> Result<f64> {
    let checks: [(&'static str, f64); 4] = [
        ("z1", f64::from(z1)),
        ("z2", f64::from(z2)),
        ("d", d),
        ("energy", energy_ev),
    ];
    for (name, value) in checks {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { op: "critical_angle", name, value });
        }
    }
    let z = f64::from(z1) * f64::from(z2);
    Ok((2.0 * z * COULOMB_EV_NM / (d * energy_ev)).sqrt() * 1e3)
}

/// Builds the string mesh and derived channeling quantities.
pub fn build_channel(config: &CrystalConfig) -> Result<ChannelGeometry> {
    let problems = config.violations();
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    let k = config.coordination_lines as i64;
    let pitch = config.lattice_constant * std::f64::consts::SQRT_2 / 4.0;
    let mut string_positions = Vec::with_capacity((4 * k * k) as usize);
    for ring in 1..=k {
        for m in -k..k {
            for n in -k..k {
                let (cm, cn) = (m as f64 + 0.5, n as f64 + 0.5);
                if cm.abs().max(cn.abs()) == ring as f64 - 0.5 {
                    string_positions.push([cm * pitch, cn * pitch]);
                }
            }
        }
    }
    let energy_ev = config.energy_mev * 1e6;
    // a <100> string holds one atom per cubic cell along the axis
    let d_string = config.lattice_constant;
    Ok(ChannelGeometry {
        string_positions,
        d_string,
        lattice_constant: config.lattice_constant,
        screening_radius: screening_radius(config.z2)?,
        z1: config.z1,
        z2: config.z2,
        sigma_th: config.sigma_th,
        psi_c: critical_angle(config.z1, config.z2, d_string, energy_ev)?,
        energy_ev,
        string_pitch: pitch,
        coordination_lines: config.coordination_lines,
    })
}

impl ChannelGeometry {
    /// Critical angle recomputed from the stored fields (mrad).
    pub fn critical_angle(&self) -> f64 {
        critical_angle(self.z1, self.z2, self.d_string, self.energy_ev)
            .expect("geometry fields are validated at construction")
    }

    /// Critical angle in rad.
    pub fn psi_c_rad(&self) -> f64 {
        self.psi_c * 1e-3
    }

    /// Half the side of the square channel around the axis (nm).
    pub fn channel_half_width(&self) -> f64 {
        0.5 * self.string_pitch
    }

    /// The square cross-section of the central channel.
    pub fn channel_window(&self) -> Window {
        let h = self.channel_half_width();
        Window::new(-h, h, -h, h).expect("pitch is positive")
    }

    /// Half width of the region enclosed by the outermost coordination line.
    pub fn mesh_half_width(&self) -> f64 {
        (f64::from(self.coordination_lines) - 0.5) * self.string_pitch
    }

    /// Whether `(x, y)` lies strictly inside the outermost coordination line.
    pub fn inside_mesh(&self, x: f64, y: f64) -> bool {
        let h = self.mesh_half_width();
        x.abs() < h && y.abs() < h
    }

    /// Distance (nm) from `(x, y)` to the closest string of the mesh.
    pub fn nearest_string_distance(&self, x: f64, y: f64) -> f64 {
        let k = f64::from(self.coordination_lines);
        let s = self.string_pitch;
        let snap = |u: f64| {
            let m = (u / s).floor().clamp(-k, k - 1.0);
            u - (m + 0.5) * s
        };
        snap(x).hypot(snap(y))
    }
}
