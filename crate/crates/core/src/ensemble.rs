//! Beam sampling and parallel trajectory batches.
//!
//! Every proton owns a ChaCha8 stream selected by its index under the batch
//! seed. Sampling and transport draw from that stream only, so a record
//! depends on `(seed, index)` and never on how work is split between
//! threads.

use std::io::{Read, Write};
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::constants::proton_speed;
use crate::crystal::{critical_angle, ChannelGeometry};
use crate::dynamics::{propagate, propagate_to_depths, DechannelReason, PropagationOptions, ProtonState};
use crate::phasespace::Window;
use crate::potential::{PotentialField, TransverseField};
use crate::{Error, Result};

pub use crate::dynamics::Fate;

/// Incident beam. Energies in MeV and angles in mrad at this boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    pub n_protons: u64,
    pub energy_mev: f64,
    /// Crystal tilt as a fraction of the critical angle at the beam energy.
    /// The tilt shifts the mean incidence angle along `theta_x`.
    pub tilt: f64,
    /// Total angular divergence `Omega_b` (mrad); each component gets
    /// standard deviation `Omega_b / sqrt(2)`.
    pub divergence_mrad: f64,
    pub seed: u64,
    /// Impact-parameter region; `None` means the central channel.
    pub impact_window: Option<Window>,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            n_protons: 100_000,
            energy_mev: 1.0,
            tilt: 0.0,
            divergence_mrad: 0.0,
            seed: 1,
            impact_window: None,
        }
    }
}

impl BeamConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.energy_mev > 0.0 && self.energy_mev.is_finite()) {
            out.push(format!("beam.energy_mev must be positive, got {}", self.energy_mev));
        }
        if !(0.0..=0.5).contains(&self.tilt) {
            out.push(format!("beam.tilt must lie in [0, 0.5] critical angles, got {}", self.tilt));
        }
        if !(self.divergence_mrad >= 0.0 && self.divergence_mrad.is_finite()) {
            out.push(format!("beam.divergence_mrad must be non-negative, got {}", self.divergence_mrad));
        }
        out
    }
}

/// Per-proton exit observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub proton_index: u64,
    /// Exit position (nm).
    pub x: f64,
    pub y: f64,
    /// Exit angles (mrad).
    pub theta_x: f64,
    pub theta_y: f64,
    /// Exit kinetic energy (eV).
    pub e_exit: f64,
    pub fate: Fate,
    pub loss_clamped: bool,
}

impl ExitRecord {
    pub fn is_channeled(&self) -> bool {
        self.fate.is_channeled()
    }
}

/// Beam parameters resolved against a channel geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSampler {
    pub energy_ev: f64,
    /// Mean incidence angles (rad).
    pub tilt_rad: [f64; 2],
    /// Standard deviation of each angle component (rad).
    pub sigma_rad: f64,
    pub window: Window,
    pub seed: u64,
    pub n_protons: u64,
}

impl BeamSampler {
    pub fn new(config: &BeamConfig, geometry: &ChannelGeometry) -> Result<Self> {
        let problems = config.violations();
        if !problems.is_empty() {
            return Err(Error::Config(problems.join("; ")));
        }
        let energy_ev = config.energy_mev * 1e6;
        let psi_c = critical_angle(geometry.z1, geometry.z2, geometry.d_string, energy_ev)? * 1e-3;
        Ok(Self {
            energy_ev,
            tilt_rad: [config.tilt * psi_c, 0.0],
            sigma_rad: config.divergence_mrad * 1e-3 / std::f64::consts::SQRT_2,
            window: config.impact_window.unwrap_or_else(|| geometry.channel_window()),
            seed: config.seed,
            n_protons: config.n_protons,
        })
    }

    /// The random stream owned by proton `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Initial state of proton `index`, drawn from `rng`.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> ProtonState {
        let w = &self.window;
        let ux: f64 = rand::Rng::random(rng);
        let uy: f64 = rand::Rng::random(rng);
        let x = w.x_min + (w.x_max - w.x_min) * ux;
        let y = w.y_min + (w.y_max - w.y_min) * uy;
        let (mut phi_x, mut phi_y) = (self.tilt_rad[0], self.tilt_rad[1]);
        if self.sigma_rad > 0.0 {
            let gx: f64 = StandardNormal.sample(rng);
            let gy: f64 = StandardNormal.sample(rng);
            phi_x += self.sigma_rad * gx;
            phi_y += self.sigma_rad * gy;
        }
        ProtonState::new(x, y, phi_x, phi_y, self.energy_ev)
    }

    pub fn sample(&self, index: u64) -> ProtonState {
        self.draw(&mut self.stream(index))
    }
}

/// Initial state of proton `index`; deterministic in `(config.seed, index)`.
pub fn sample_initial(config: &BeamConfig, geometry: &ChannelGeometry, index: u64) -> Result<ProtonState> {
    if index >= config.n_protons {
        return Err(Error::Domain { op: "sample_initial", name: "index", value: index as f64 });
    }
    Ok(BeamSampler::new(config, geometry)?.sample(index))
}

/// Exit records of one crystal thickness, with run-level metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub records: Vec<ExitRecord>,
    pub length_nm: f64,
    pub energy_ev: f64,
    /// Tilt as a fraction of the critical angle.
    pub tilt: f64,
    /// Mean incidence angles (rad).
    pub tilt_rad: [f64; 2],
}

impl Batch {
    pub fn channeled(&self) -> impl Iterator<Item = &ExitRecord> {
        self.records.iter().filter(|r| r.is_channeled())
    }

    pub fn channeled_count(&self) -> usize {
        self.channeled().count()
    }

    pub fn dechanneled_count(&self) -> usize {
        self.records.len() - self.channeled_count()
    }
}

fn stopped_record(index: u64, state: &ProtonState) -> ExitRecord {
    ExitRecord {
        proton_index: index,
        x: state.x,
        y: state.y,
        theta_x: state.phi_x * 1e3,
        theta_y: state.phi_y * 1e3,
        e_exit: state.e,
        fate: Fate::Dechanneled { depth: state.z, reason: DechannelReason::NonFinite },
        loss_clamped: false,
    }
}

/// Records for the protons with indices in `range`, in index order.
///
/// A proton whose propagation fails is recorded as dechanneled at its
/// initial state; the batch is never aborted.
pub fn run_range<F>(
    sampler: &BeamSampler,
    field: &F,
    length: f64,
    options: &PropagationOptions,
    range: Range<u64>,
) -> Vec<ExitRecord>
where
    F: TransverseField + ?Sized,
{
    range
        .into_par_iter()
        .map(|index| {
            let mut rng = sampler.stream(index);
            let initial = sampler.draw(&mut rng);
            match propagate(&initial, field, length, options, &mut rng) {
                Ok(p) => p.record(index),
                Err(_) => stopped_record(index, &initial),
            }
        })
        .collect()
}

/// Runs the whole beam through a crystal of `length` nm.
pub fn run_ensemble<F>(
    beam: &BeamConfig,
    geometry: &ChannelGeometry,
    field: &F,
    length: f64,
    options: &PropagationOptions,
) -> Result<Batch>
where
    F: TransverseField + ?Sized,
{
    let sampler = BeamSampler::new(beam, geometry)?;
    options.validate(length)?;
    let records = run_range(&sampler, field, length, options, 0..beam.n_protons);
    Ok(Batch {
        records,
        length_nm: length,
        energy_ev: sampler.energy_ev,
        tilt: beam.tilt,
        tilt_rad: sampler.tilt_rad,
    })
}

/// Runs the beam once through the deepest thickness and snapshots every
/// proton at each of `lengths` (strictly increasing). Records of one
/// snapshot equal those of a separate [`run_ensemble`] call when the step
/// is [`crate::StepSize::Fixed`].
pub fn run_ensemble_depths<F>(
    beam: &BeamConfig,
    geometry: &ChannelGeometry,
    field: &F,
    lengths: &[f64],
    options: &PropagationOptions,
) -> Result<Vec<Batch>>
where
    F: TransverseField + ?Sized,
{
    let sampler = BeamSampler::new(beam, geometry)?;
    if lengths.is_empty() {
        return Err(Error::InsufficientData { what: "thickness list", needed: 1, got: 0 });
    }
    options.validate(lengths[lengths.len() - 1])?;
    let per_proton: Vec<Vec<ExitRecord>> = (0..beam.n_protons)
        .into_par_iter()
        .map(|index| {
            let mut rng = sampler.stream(index);
            let initial = sampler.draw(&mut rng);
            match propagate_to_depths(&initial, field, lengths, options, &mut rng) {
                Ok(snaps) => snaps.iter().map(|p| p.record(index)).collect(),
                Err(_) => vec![stopped_record(index, &initial); lengths.len()],
            }
        })
        .collect::<Vec<_>>();
    let mut batches: Vec<Batch> = lengths
        .iter()
        .map(|&length_nm| Batch {
            records: Vec::with_capacity(per_proton.len()),
            length_nm,
            energy_ev: sampler.energy_ev,
            tilt: beam.tilt,
            tilt_rad: sampler.tilt_rad,
        })
        .collect();
    for snaps in per_proton {
        for (batch, record) in batches.iter_mut().zip(snaps) {
            batch.records.push(record);
        }
    }
    Ok(batches)
}

/// Reduced thickness `Lambda = f L / v`: the crystal length in units of the
/// transverse oscillation wavelength near the channel axis.
pub fn reduced_thickness(length: f64, energy_mev: f64, field: &PotentialField) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::Domain { op: "reduced_thickness", name: "length", value: length });
    }
    if !(energy_mev > 0.0) {
        return Err(Error::Domain { op: "reduced_thickness", name: "energy", value: energy_mev });
    }
    Ok(field.transverse_frequency()? * length / proton_speed(energy_mev * 1e6))
}

/// Crystal length (nm) giving reduced thickness `lambda`.
pub fn length_for_reduced_thickness(lambda: f64, energy_mev: f64, field: &PotentialField) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain { op: "length_for_reduced_thickness", name: "lambda", value: lambda });
    }
    Ok(lambda / reduced_thickness(1.0, energy_mev, field)?)
}

const CSV_HEADER: [&str; 7] = ["index", "x_nm", "y_nm", "theta_x_mrad", "theta_y_mrad", "e_exit_eV", "flag"];

/// Writes records as CSV. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_records_csv<W: Write>(writer: W, records: &[ExitRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        append_record(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}

/// Streaming CSV writer for batches processed in chunks.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(CSV_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, records: &[ExitRecord]) -> Result<()> {
        for r in records {
            append_record(&mut self.inner, r)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

fn append_record<W: Write>(w: &mut csv::Writer<W>, r: &ExitRecord) -> Result<()> {
    let flag = if r.is_channeled() { "channeled" } else { "dechanneled" };
    w.write_record([
        r.proton_index.to_string(),
        format!("{:e}", r.x),
        format!("{:e}", r.y),
        format!("{:e}", r.theta_x),
        format!("{:e}", r.theta_y),
        format!("{:e}", r.e_exit),
        flag.to_owned(),
    ])?;
    Ok(())
}

/// Reads records written by [`write_records_csv`]. The dechanneling depth
/// and reason are not part of the format and come back as unknown.
pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<ExitRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Format(format!("unexpected header {:?}", header)));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("row {}: bad number {:?}", line + 1, &row[i])))
        };
        let proton_index = row[0]
            .parse::<u64>()
            .map_err(|_| Error::Format(format!("row {}: bad index {:?}", line + 1, &row[0])))?;
        let fate = match &row[6] {
            "channeled" => Fate::Channeled,
            "dechanneled" => Fate::Dechanneled { depth: f64::NAN, reason: DechannelReason::NonFinite },
            other => return Err(Error::Format(format!("row {}: unknown flag {other:?}", line + 1))),
        };
        out.push(ExitRecord {
            proton_index,
            x: num(1)?,
            y: num(2)?,
            theta_x: num(3)?,
            theta_y: num(4)?,
            e_exit: num(5)?,
            fate,
            loss_clamped: false,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{build_channel, CrystalConfig};

    fn geometry() -> ChannelGeometry {
        build_channel(&CrystalConfig::default()).unwrap()
    }

    #[test]
    fn zero_divergence_zero_tilt_gives_parallel_beam() {
        let g = geometry();
        let beam = BeamConfig { n_protons: 100, ..Default::default() };
        for i in 0..100 {
            let s = sample_initial(&beam, &g, i).unwrap();
            assert_eq!((s.phi_x, s.phi_y), (0.0, 0.0));
            assert!(g.channel_window().contains(s.x, s.y));
        }
        assert!(sample_initial(&beam, &g, 100).is_err());
    }

    #[test]
    fn tilt_shifts_theta_x() {
        let g = geometry();
        let beam = BeamConfig { n_protons: 1, tilt: 0.2, ..Default::default() };
        let s = sample_initial(&beam, &g, 0).unwrap();
        assert!((s.phi_x - 0.2 * g.psi_c_rad()).abs() < 1e-15);
        assert_eq!(s.phi_y, 0.0);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let g = geometry();
        let beam = BeamConfig { n_protons: 10, divergence_mrad: 1.0, ..Default::default() };
        let a = sample_initial(&beam, &g, 3).unwrap();
        let b = sample_initial(&beam, &g, 3).unwrap();
        let c = sample_initial(&beam, &g, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn reduced_thickness_scaling() {
        let f = PotentialField::new(geometry());
        let a = reduced_thickness(92.0, 1.0, &f).unwrap();
        let b = reduced_thickness(184.0, 1.0, &f).unwrap();
        let c = reduced_thickness(92.0, 4.0, &f).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!((c - 0.5 * a).abs() < 1e-12);
        assert!((0.28..=0.5).contains(&a));
        let l = length_for_reduced_thickness(a, 1.0, &f).unwrap();
        assert!((l - 92.0).abs() < 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            ExitRecord {
                proton_index: 0,
                x: 0.1 + 0.2,
                y: -1e-300,
                theta_x: std::f64::consts::PI,
                theta_y: 0.0,
                e_exit: 999_123.456_789,
                fate: Fate::Channeled,
                loss_clamped: false,
            },
            ExitRecord {
                proton_index: 1,
                x: 1.0,
                y: 2.0,
                theta_x: 3.0,
                theta_y: 4.0,
                e_exit: 5.0,
                fate: Fate::Dechanneled { depth: 3.0, reason: DechannelReason::AngleLimit },
                loss_clamped: false,
            },
        ];
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &records).unwrap();
        let back = read_records_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0], records[0]);
        assert!(!back[1].is_channeled());
        assert_eq!(back[1].x, 1.0);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,x_nm,y_nm,theta_x_mrad,theta_y_mrad,e_exit_eV,flag\n"));
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(read_records_csv("a,b\n1,2\n".as_bytes()).is_err());
        let bad = "index,x_nm,y_nm,theta_x_mrad,theta_y_mrad,e_exit_eV,flag\n0,1,2,3,4,5,maybe\n";
        assert!(read_records_csv(bad.as_bytes()).is_err());
    }
}
