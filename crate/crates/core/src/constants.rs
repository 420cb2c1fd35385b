//! Physical constants in the unit system used by the crate (nm, eV, s).

/// Bohr radius (nm).
pub const BOHR_RADIUS_NM: f64 = 0.052_917_7;

/// Squared elementary charge in Gaussian units, e^2 = 1.43996 eV nm.
pub const COULOMB_EV_NM: f64 = 1.439_96;

/// Proton rest energy (eV).
pub const PROTON_MASS_EV: f64 = 938.272_088_16e6;

/// Electron rest energy (eV).
pub const ELECTRON_MASS_EV: f64 = 510_998.950_00;

/// Reduced Planck constant times c (eV nm).
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// Reduced Planck constant (eV s).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Speed of light (nm/s).
pub const SPEED_OF_LIGHT_NM_PER_S: f64 = 2.997_924_58e17;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Non-relativistic proton speed (nm/s) at kinetic energy `energy_ev`.
pub fn proton_speed(energy_ev: f64) -> f64 {
    SPEED_OF_LIGHT_NM_PER_S * (2.0 * energy_ev / PROTON_MASS_EV).sqrt()
}
