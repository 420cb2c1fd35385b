//! Continuum-model Monte Carlo simulation of MeV proton channeling through
//! thin `<100>` silicon crystals.
//!
//! The crate is organised bottom-up:
//!
//! * [`crystal`] builds the atomic-string geometry of the axial channel.
//! * [`potential`] evaluates the thermally averaged Moliere continuum
//!   potential, its derivatives, and the derived electron density.
//! * [`dynamics`] integrates single proton trajectories with optional
//!   electronic energy loss and multiple scattering.
//! * [`ensemble`] samples the incident beam and runs trajectory batches in
//!   parallel with scheduling-independent random streams.
//! * [`phasespace`] reduces exit ensembles to density grids, beam moment
//!   matrices, transfer matrices and Jacobian maps.
//! * [`spin`] is a closed two-spin (electron and nuclear spin-1/2) model.
//!
//! Units throughout: lengths in nm, energies in eV, angles in rad inside the
//! integrator and mrad in exit records.

pub mod constants;
pub mod crystal;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod phasespace;
pub mod potential;
pub mod spin;

pub use crystal::{build_channel, ChannelGeometry, CrystalConfig};
pub use dynamics::{propagate, PropagationOptions, ProtonState, StepSize};
pub use ensemble::{run_ensemble, Batch, BeamConfig, ExitRecord, Fate};
pub use error::{Error, Result};
pub use phasespace::{DensityGrid, Plane, Window};
pub use potential::{InterpolatedField, PotentialField, TransverseField};
