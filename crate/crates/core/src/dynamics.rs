//! Single-proton transport through the channel.
//!
//! The transverse motion follows the continuum-model equations
//!
//! ```text
//! dx/dz = phi_x      dphi_x/dz = -(1 / 2E) dU/dx
//! dy/dz = phi_y      dphi_y/dz = -(1 / 2E) dU/dy
//! ```
//!
//! with `E` the kinetic energy, held fixed within a step. Electronic energy
//! loss lowers `E` once per step, and multiple scattering adds Gaussian
//! angular kicks whose mean square grows as `(m_e / 2 m_p E)(-dE/dz)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::constants::{
    COULOMB_EV_NM, ELECTRON_MASS_EV, HBAR_C_EV_NM, HBAR_EV_S, PROTON_MASS_EV,
};
use crate::ensemble::ExitRecord;
use crate::potential::TransverseField;
use crate::{Error, Result};

/// Phase-space state of one proton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtonState {
    /// Transverse position (nm).
    pub x: f64,
    pub y: f64,
    /// Angles to the channel axis, `v_x / v` and `v_y / v` (rad).
    pub phi_x: f64,
    pub phi_y: f64,
    /// Depth (nm).
    pub z: f64,
    /// Kinetic energy (eV).
    pub e: f64,
}

impl ProtonState {
    pub fn new(x: f64, y: f64, phi_x: f64, phi_y: f64, e: f64) -> Self {
        Self { x, y, phi_x, phi_y, z: 0.0, e }
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.phi_x, self.phi_y, self.z, self.e]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// Split the crystal length into this many equal steps.
    Divisions(u32),
    /// Fixed step (nm); the last step is shortened to land on the exit face.
    Fixed(f64),
}

impl StepSize {
    /// Nominal step (nm) for a crystal of `length` nm.
    pub fn resolve(&self, length: f64) -> f64 {
        match *self {
            StepSize::Divisions(n) => length / f64::from(n),
            StepSize::Fixed(h) => h,
        }
    }
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize::Divisions(4096)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Classical explicit fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Two-stage Gauss-Legendre (implicit, fourth order, symplectic).
    GaussLegendre2,
}

/// Thresholds that end a trajectory as dechanneled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DechannelingCriteria {
    /// Closest allowed approach to a string, as a fraction of the screening
    /// radius.
    pub string_approach: f64,
    /// Largest allowed `|phi_x|` or `|phi_y|` (rad).
    pub max_angle: f64,
}

impl Default for DechannelingCriteria {
    fn default() -> Self {
        Self { string_approach: 1e-3, max_angle: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub step: StepSize,
    pub integrator: Integrator,
    pub energy_loss: bool,
    pub multiple_scattering: bool,
    pub record_trajectory: bool,
    pub dechanneling: DechannelingCriteria,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            step: StepSize::default(),
            integrator: Integrator::default(),
            energy_loss: true,
            multiple_scattering: true,
            record_trajectory: false,
            dechanneling: DechannelingCriteria::default(),
        }
    }
}

impl PropagationOptions {
    /// Deterministic transport: no energy loss, no scattering.
    pub fn conservative() -> Self {
        Self { energy_loss: false, multiple_scattering: false, ..Self::default() }
    }

    pub(crate) fn validate(&self, length: f64) -> Result<()> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain { op: "propagate", name: "length", value: length });
        }
        match self.step {
            StepSize::Divisions(0) => {
                return Err(Error::Config("step divisions must be at least 1".into()))
            }
            StepSize::Fixed(h) if !(h > 0.0 && h <= length) => {
                return Err(Error::Config(format!(
                    "step {h} nm must be positive and no longer than the crystal ({length} nm)"
                )))
            }
            _ => {}
        }
        let d = self.dechanneling;
        if !(d.string_approach >= 0.0 && d.max_angle > 0.0) {
            return Err(Error::Config("dechanneling thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// Why a trajectory stopped counting as channeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DechannelReason {
    StringApproach,
    AngleLimit,
    LeftMesh,
    EnergyExhausted,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate {
    Channeled,
    Dechanneled { depth: f64, reason: DechannelReason },
}

impl Fate {
    pub fn is_channeled(&self) -> bool {
        matches!(self, Fate::Channeled)
    }
}

/// Outcome of [`propagate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// State at the exit face, or where the trajectory was stopped.
    pub state: ProtonState,
    pub fate: Fate,
    /// Energy loss was clamped to zero somewhere along the path because the
    /// stopping logarithm fell below one.
    pub loss_clamped: bool,
    /// States after every step, starting with the initial state, when
    /// requested.
    pub trajectory: Vec<ProtonState>,
}

impl Propagation {
    pub fn record(&self, index: u64) -> ExitRecord {
        ExitRecord {
            proton_index: index,
            x: self.state.x,
            y: self.state.y,
            theta_x: self.state.phi_x * 1e3,
            theta_y: self.state.phi_y * 1e3,
            e_exit: self.state.e,
            fate: self.fate,
            loss_clamped: self.loss_clamped,
        }
    }
}

/// Transverse energy `E (phi_x^2 + phi_y^2) + U(x, y)` (eV).
pub fn transverse_energy<F: TransverseField + ?Sized>(state: &ProtonState, field: &F) -> f64 {
    state.e * (state.phi_x * state.phi_x + state.phi_y * state.phi_y)
        + field.potential(state.x, state.y)
}

/// Local electron plasma frequency `sqrt(4 pi e^2 n_e / m_e)` (rad/s).
pub fn plasma_frequency(n_e: f64) -> f64 {
    plasma_energy(n_e) / HBAR_EV_S
}

fn plasma_energy(n_e: f64) -> f64 {
    HBAR_C_EV_NM * (4.0 * std::f64::consts::PI * COULOMB_EV_NM * n_e.max(0.0) / ELECTRON_MASS_EV).sqrt()
}

/// Plasma frequency (rad/s) of the channel electrons at the proton position.
pub fn electron_frequency<F: TransverseField + ?Sized>(state: &ProtonState, field: &F) -> f64 {
    plasma_frequency(field.electron_density(state.x, state.y))
}

/// Electronic stopping power at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingPower {
    /// `-dE/dz` (eV/nm), never negative.
    pub rate: f64,
    /// The logarithm argument `2 m_e v^2 / hbar omega_e` was at most one, so
    /// the rate was clamped to zero.
    pub clamped: bool,
}

/// `-dE/dz = (4 pi Z1^2 e^4 / m_e v^2) n_e ln(2 m_e v^2 / hbar omega_e)`.
pub fn stopping_power(z1: u32, energy_ev: f64, n_e: f64) -> StoppingPower {
    if !(n_e > 0.0) || !(energy_ev > 0.0) {
        return StoppingPower { rate: 0.0, clamped: false };
    }
    // m_e v^2 with v the proton speed
    let mev2 = 2.0 * energy_ev * ELECTRON_MASS_EV / PROTON_MASS_EV;
    let arg = 2.0 * mev2 / plasma_energy(n_e);
    if arg <= 1.0 {
        return StoppingPower { rate: 0.0, clamped: true };
    }
    let z = f64::from(z1);
    let rate = 4.0 * std::f64::consts::PI * z * z * COULOMB_EV_NM * COULOMB_EV_NM * n_e / mev2
        * arg.ln();
    StoppingPower { rate, clamped: false }
}

/// Stopping power at the proton's position and energy.
pub fn energy_loss_rate<F: TransverseField + ?Sized>(state: &ProtonState, field: &F) -> StoppingPower {
    stopping_power(field.projectile_charge(), state.e, field.electron_density(state.x, state.y))
}

/// Variance of each angle component accumulated over `dz` for stopping
/// power `rate` at energy `e`: `(m_e / 2 m_p E) rate dz / 2`.
pub fn kick_variance(rate: f64, e: f64, dz: f64) -> f64 {
    ELECTRON_MASS_EV / (2.0 * PROTON_MASS_EV * e) * rate * dz * 0.5
}

/// Adds independent Gaussian angle kicks for a step of `dz` nm.
pub fn multiple_scattering_kick<F, R>(state: &ProtonState, field: &F, dz: f64, rng: &mut R) -> ProtonState
where
    F: TransverseField + ?Sized,
    R: Rng + ?Sized,
{
    let rate = energy_loss_rate(state, field).rate;
    apply_kick(*state, rate, dz, rng)
}

#[inline]
fn apply_kick<R: Rng + ?Sized>(mut state: ProtonState, rate: f64, dz: f64, rng: &mut R) -> ProtonState {
    if rate > 0.0 {
        let sigma = kick_variance(rate, state.e, dz).sqrt();
        let gx: f64 = rng.sample(StandardNormal);
        let gy: f64 = rng.sample(StandardNormal);
        state.phi_x += sigma * gx;
        state.phi_y += sigma * gy;
    }
    state
}

#[inline]
fn derivative<F: TransverseField + ?Sized>(field: &F, inv_2e: f64, s: [f64; 4]) -> [f64; 4] {
    let g = field.gradient(s[0], s[1]);
    [s[2], s[3], -g[0] * inv_2e, -g[1] * inv_2e]
}

#[inline]
fn axpy(s: [f64; 4], h: f64, k: [f64; 4]) -> [f64; 4] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]]
}

/// One classical Runge-Kutta step of the transverse equations at fixed
/// energy. No dechanneling checks.
pub fn step_rk4<F: TransverseField + ?Sized>(state: &ProtonState, field: &F, dz: f64) -> ProtonState {
    let inv_2e = 0.5 / state.e;
    let s = [state.x, state.y, state.phi_x, state.phi_y];
    let k1 = derivative(field, inv_2e, s);
    let k2 = derivative(field, inv_2e, axpy(s, 0.5 * dz, k1));
    let k3 = derivative(field, inv_2e, axpy(s, 0.5 * dz, k2));
    let k4 = derivative(field, inv_2e, axpy(s, dz, k3));
    let w = dz / 6.0;
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = s[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    ProtonState { x: out[0], y: out[1], phi_x: out[2], phi_y: out[3], z: state.z + dz, e: state.e }
}

const GL_SQRT3_6: f64 = 0.288_675_134_594_812_9;

/// One two-stage Gauss-Legendre step, stages solved by fixed-point
/// iteration.
pub fn step_gauss_legendre<F: TransverseField + ?Sized>(state: &ProtonState, field: &F, dz: f64) -> ProtonState {
    let a = [[0.25, 0.25 - GL_SQRT3_6], [0.25 + GL_SQRT3_6, 0.25]];
    let inv_2e = 0.5 / state.e;
    let s = [state.x, state.y, state.phi_x, state.phi_y];
    let k0 = derivative(field, inv_2e, s);
    let mut k = [k0, k0];
    for _ in 0..100 {
        let mut next = [[0.0; 4]; 2];
        for i in 0..2 {
            let mut y = s;
            for (j, kj) in k.iter().enumerate() {
                y = axpy(y, dz * a[i][j], *kj);
            }
            next[i] = derivative(field, inv_2e, y);
        }
        let change = (0..2)
            .flat_map(|i| (0..4).map(move |c| (i, c)))
            .map(|(i, c)| (next[i][c] - k[i][c]).abs() / (1.0 + k[i][c].abs()))
            .fold(0.0, f64::max);
        k = next;
        if change < 1e-15 {
            break;
        }
    }
    let mut out = s;
    for c in 0..4 {
        out[c] += 0.5 * dz * (k[0][c] + k[1][c]);
    }
    ProtonState { x: out[0], y: out[1], phi_x: out[2], phi_y: out[3], z: state.z + dz, e: state.e }
}

fn check<F: TransverseField + ?Sized>(
    state: &ProtonState,
    field: &F,
    criteria: &DechannelingCriteria,
) -> Option<DechannelReason> {
    if !state.is_finite() {
        return Some(DechannelReason::NonFinite);
    }
    if state.e <= 0.0 {
        return Some(DechannelReason::EnergyExhausted);
    }
    if state.phi_x.abs() >= criteria.max_angle || state.phi_y.abs() >= criteria.max_angle {
        return Some(DechannelReason::AngleLimit);
    }
    if !field.contains(state.x, state.y) {
        return Some(DechannelReason::LeftMesh);
    }
    let approach = criteria.string_approach * field.screening_radius();
    if field.nearest_string_distance(state.x, state.y) < approach {
        return Some(DechannelReason::StringApproach);
    }
    None
}

struct Stepper<'a, F: ?Sized> {
    field: &'a F,
    options: &'a PropagationOptions,
    state: ProtonState,
    loss_clamped: bool,
    trajectory: Vec<ProtonState>,
    fate: Fate,
}

impl<F: ?Sized> Clone for Stepper<'_, F> {
    fn clone(&self) -> Self {
        Self {
            field: self.field,
            options: self.options,
            state: self.state,
            loss_clamped: self.loss_clamped,
            trajectory: self.trajectory.clone(),
            fate: self.fate,
        }
    }
}

impl<'a, F: TransverseField + ?Sized> Stepper<'a, F> {
    fn new(initial: &ProtonState, field: &'a F, options: &'a PropagationOptions) -> Result<Self> {
        if !initial.is_finite() || !(initial.e > 0.0) {
            return Err(Error::Domain { op: "propagate", name: "initial state", value: initial.e });
        }
        let mut stepper = Self {
            field,
            options,
            state: *initial,
            loss_clamped: false,
            trajectory: Vec::new(),
            fate: Fate::Channeled,
        };
        if options.record_trajectory {
            stepper.trajectory.push(*initial);
        }
        if let Some(reason) = check(initial, field, &options.dechanneling) {
            stepper.fate = Fate::Dechanneled { depth: initial.z, reason };
        }
        Ok(stepper)
    }

    /// Advances by `dz`; returns false once the trajectory is dechanneled.
    #[inline]
    fn step<R: Rng + ?Sized>(&mut self, dz: f64, rng: &mut R) -> bool {
        if !self.fate.is_channeled() {
            return false;
        }
        let opts = self.options;
        let start = self.state;
        let mut next = match opts.integrator {
            Integrator::Rk4 => step_rk4(&start, self.field, dz),
            Integrator::GaussLegendre2 => step_gauss_legendre(&start, self.field, dz),
        };
        if opts.energy_loss || opts.multiple_scattering {
            let mid_x = 0.5 * (start.x + next.x);
            let mid_y = 0.5 * (start.y + next.y);
            let n_e = if mid_x.is_finite() && mid_y.is_finite() {
                self.field.electron_density(mid_x, mid_y)
            } else {
                0.0
            };
            let power = stopping_power(self.field.projectile_charge(), start.e, n_e);
            self.loss_clamped |= power.clamped;
            if opts.multiple_scattering {
                next = apply_kick(next, power.rate, dz, rng);
                next.e = start.e;
            }
            if opts.energy_loss {
                next.e = start.e - power.rate * dz;
            }
        }
        self.state = next;
        if opts.record_trajectory {
            self.trajectory.push(next);
        }
        if let Some(reason) = check(&next, self.field, &opts.dechanneling) {
            self.fate = Fate::Dechanneled { depth: next.z, reason };
            return false;
        }
        true
    }

    fn snapshot(&self) -> Propagation {
        Propagation {
            state: self.state,
            fate: self.fate,
            loss_clamped: self.loss_clamped,
            trajectory: self.trajectory.clone(),
        }
    }

    fn finish(self) -> Propagation {
        Propagation {
            state: self.state,
            fate: self.fate,
            loss_clamped: self.loss_clamped,
            trajectory: self.trajectory,
        }
    }
}

/// Number of full steps of `h` that fit in `length`, and the remaining
/// partial step (zero when `length` is a multiple of `h` up to rounding).
fn split_length(length: f64, h: f64) -> (u64, f64) {
    let full = (length / h * (1.0 + 1e-12)).floor() as u64;
    let rem = length - full as f64 * h;
    (full, if rem > 1e-9 * h { rem } else { 0.0 })
}

/// Integrates a proton from its initial depth through `length` nm.
///
/// Dechanneling stops the integration; the returned state is the one at
/// which the criterion fired.
pub fn propagate<F, R>(
    initial: &ProtonState,
    field: &F,
    length: f64,
    options: &PropagationOptions,
    rng: &mut R,
) -> Result<Propagation>
where
    F: TransverseField + ?Sized,
    R: Rng + ?Sized,
{
    options.validate(length)?;
    let mut stepper = Stepper::new(initial, field, options)?;
    let (full, h, rem) = match options.step {
        StepSize::Divisions(n) => (u64::from(n), length / f64::from(n), 0.0),
        StepSize::Fixed(h) => {
            let (full, rem) = split_length(length, h);
            (full, h, rem)
        }
    };
    for _ in 0..full {
        if !stepper.step(h, rng) {
            break;
        }
    }
    if rem > 0.0 {
        stepper.step(rem, rng);
    }
    Ok(stepper.finish())
}

/// Integrates once through the deepest of `depths` (strictly increasing,
/// measured from the initial depth) and returns the state at each.
///
/// With a [`StepSize::Fixed`] step every snapshot is bit-identical to a
/// separate [`propagate`] call of that length fed an identical random
/// stream: the partial step that lands on a depth is taken on a copy. A
/// [`StepSize::Divisions`] step is resolved against the deepest depth.
pub fn propagate_to_depths<F, R>(
    initial: &ProtonState,
    field: &F,
    depths: &[f64],
    options: &PropagationOptions,
    rng: &mut R,
) -> Result<Vec<Propagation>>
where
    F: TransverseField + ?Sized,
    R: Rng + Clone,
{
    if depths.is_empty() {
        return Err(Error::InsufficientData { what: "depth list", needed: 1, got: 0 });
    }
    if depths.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("depths must be strictly increasing".into()));
    }
    if !(depths[0] > 0.0) {
        return Err(Error::Domain { op: "propagate_to_depths", name: "depth", value: depths[0] });
    }
    let deepest = depths[depths.len() - 1];
    options.validate(deepest)?;
    let h = options.step.resolve(deepest);
    let mut stepper = Stepper::new(initial, field, options)?;
    let mut taken = 0u64;
    let mut out = Vec::with_capacity(depths.len());
    for &depth in depths {
        let (full, rem) = split_length(depth, h);
        while taken < full && stepper.fate.is_channeled() {
            stepper.step(h, rng);
            taken += 1;
        }
        if rem > 0.0 && stepper.fate.is_channeled() {
            let mut probe = stepper.clone();
            probe.step(rem, &mut rng.clone());
            out.push(probe.finish());
        } else {
            out.push(stepper.snapshot());
        }
    }
    Ok(out)
}
