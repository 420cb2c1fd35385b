//! Run configuration: one TOML file with one table per concern.
//!
//! Every key has a default, so an empty file is a valid `simulate` config.
//! Unknown keys are rejected to catch typos.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use superfocus_core::dynamics::{DechannelingCriteria, Integrator};
use superfocus_core::spin::{SpinParams, SweepParameter};
use superfocus_core::{BeamConfig, CrystalConfig, PropagationOptions, StepSize, Window};

use crate::CliError;

/// Crystal length used when neither a length nor a reduced thickness is set.
pub const DEFAULT_LENGTH_NM: f64 = 92.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub crystal: CrystalSection,
    pub potential: PotentialSection,
    pub beam: BeamSection,
    pub propagation: PropagationSection,
    pub analysis: AnalysisSection,
    pub scan: ScanSection,
    pub spin: SpinSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrystalSection {
    pub material: String,
    pub axis: String,
    pub lattice_constant_nm: f64,
    pub coordination_lines: u32,
    pub sigma_th_nm: f64,
    pub z1: u32,
    pub z2: u32,
}

impl Default for CrystalSection {
    fn default() -> Self {
        let c = CrystalConfig::default();
        Self {
            material: c.material,
            axis: c.axis,
            lattice_constant_nm: c.lattice_constant,
            coordination_lines: c.coordination_lines,
            sigma_th_nm: c.sigma_th,
            z1: c.z1,
            z2: c.z2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSection {
    /// Use the thermally averaged potential.
    pub thermal: bool,
    /// Cells per string pitch of the interpolation table; 0 evaluates the
    /// exact string sums on every call.
    pub interpolation_nodes: usize,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { thermal: true, interpolation_nodes: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamSection {
    pub n_protons: u64,
    pub energy_mev: f64,
    /// Tilt along x as a fraction of the critical angle.
    pub tilt: f64,
    pub divergence_mrad: f64,
    pub seed: u64,
    /// `[x_min, x_max, y_min, y_max]` in nm; the central channel when absent.
    pub impact_window: Option<[f64; 4]>,
}

impl Default for BeamSection {
    fn default() -> Self {
        let b = BeamConfig::default();
        Self {
            n_protons: b.n_protons,
            energy_mev: b.energy_mev,
            tilt: b.tilt,
            divergence_mrad: b.divergence_mrad,
            seed: b.seed,
            impact_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationSection {
    pub length_nm: Option<f64>,
    pub reduced_thickness: Option<f64>,
    pub step_divisions: Option<u32>,
    pub step_nm: Option<f64>,
    /// `rk4` or `gauss-legendre`.
    pub integrator: String,
    pub energy_loss: bool,
    pub multiple_scattering: bool,
    /// Closest approach to a string, in screening radii.
    pub string_approach: f64,
    pub max_angle_rad: f64,
}

impl Default for PropagationSection {
    fn default() -> Self {
        let d = DechannelingCriteria::default();
        Self {
            length_nm: None,
            reduced_thickness: None,
            step_divisions: None,
            step_nm: None,
            integrator: "rk4".into(),
            energy_loss: true,
            multiple_scattering: true,
            string_approach: d.string_approach,
            max_angle_rad: d.max_angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Write the per-proton record dump.
    pub records: bool,
    pub configuration_histogram: bool,
    pub angular_histogram: bool,
    pub bins: [usize; 2],
    /// Defaults to the central channel.
    pub configuration_window: Option<[f64; 4]>,
    /// Defaults to plus or minus the critical angle (mrad).
    pub angular_window: Option<[f64; 4]>,
    pub sigma: bool,
    pub fwhm: bool,
    pub central_radius_nm: f64,
    pub central_radius_mrad: f64,
    /// Half width of the moving average applied before peak search.
    pub peak_smoothing: usize,
    /// Minimum peak prominence as a fraction of the profile maximum.
    pub peak_prominence: f64,
    pub jacobian: JacobianSection,
    /// Record dump read by `analyze`.
    pub input: Option<PathBuf>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            records: true,
            configuration_histogram: true,
            angular_histogram: true,
            bins: [128, 128],
            configuration_window: None,
            angular_window: None,
            sigma: true,
            fwhm: true,
            central_radius_nm: 0.01,
            central_radius_mrad: 1.0,
            peak_smoothing: 2,
            peak_prominence: 0.1,
            jacobian: JacobianSection::default(),
            input: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacobianSection {
    pub enabled: bool,
    /// Nodes per side of the impact-point grid.
    pub grid: usize,
    pub h_nm: f64,
    /// `|J|` below this, in (mrad/nm)^2, marks a caustic.
    pub caustic_threshold: f64,
}

impl Default for JacobianSection {
    fn default() -> Self {
        Self { enabled: false, grid: 16, h_nm: 1e-4, caustic_threshold: 1e-3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    /// Tilts as fractions of the critical angle.
    pub tilts: Vec<f64>,
    pub reduced_thickness: Vec<f64>,
    pub lengths_nm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSection {
    pub omega_s: f64,
    pub omega_l: f64,
    pub omega_rf: f64,
    pub a_hyper: f64,
    pub b_hyper: f64,
    pub d_dip: f64,
    pub phi_tilt: f64,
    pub exchange: f64,
    /// Derive `b_hyper` from `d_dip` and `phi_tilt`.
    pub dipolar_b: bool,
    /// One of `omega_s`, `omega_l`, `a_hyper`, `b_hyper`, `exchange`.
    pub sweep: String,
    pub sweep_from: f64,
    pub sweep_to: f64,
    pub sweep_points: usize,
}

impl Default for SpinSection {
    fn default() -> Self {
        Self {
            omega_s: 0.0,
            omega_l: 11.99,
            omega_rf: 0.0,
            a_hyper: 0.0,
            b_hyper: 0.0,
            d_dip: 0.0,
            phi_tilt: 0.0,
            exchange: 1.0,
            dipolar_b: false,
            sweep: "omega_s".into(),
            sweep_from: 0.0,
            sweep_to: 100.0,
            sweep_points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out") }
    }
}

fn window(name: &str, w: [f64; 4], out: &mut Vec<String>) {
    if w.iter().any(|v| !v.is_finite()) || !(w[1] > w[0] && w[3] > w[2]) {
        out.push(format!("{name} must satisfy min < max on both axes with zero-free area, got {w:?}"));
    }
}

fn positive(name: &str, v: f64, out: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(format!("{name} must be positive, got {v}"));
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn crystal_config(&self) -> CrystalConfig {
        let c = &self.crystal;
        CrystalConfig {
            material: c.material.clone(),
            axis: c.axis.clone(),
            lattice_constant: c.lattice_constant_nm,
            coordination_lines: c.coordination_lines,
            sigma_th: c.sigma_th_nm,
            z1: c.z1,
            z2: c.z2,
            energy_mev: self.beam.energy_mev,
        }
    }

    pub fn beam_config(&self) -> BeamConfig {
        let b = &self.beam;
        BeamConfig {
            n_protons: b.n_protons,
            energy_mev: b.energy_mev,
            tilt: b.tilt,
            divergence_mrad: b.divergence_mrad,
            seed: b.seed,
            impact_window: b.impact_window.map(|w| Window::new(w[0], w[1], w[2], w[3]).expect("validated")),
        }
    }

    pub fn propagation_options(&self) -> PropagationOptions {
        let p = &self.propagation;
        let step = match (p.step_divisions, p.step_nm) {
            (_, Some(h)) => StepSize::Fixed(h),
            (Some(n), None) => StepSize::Divisions(n),
            (None, None) => StepSize::default(),
        };
        let integrator = if p.integrator == "gauss-legendre" { Integrator::GaussLegendre2 } else { Integrator::Rk4 };
        PropagationOptions {
            step,
            integrator,
            energy_loss: p.energy_loss,
            multiple_scattering: p.multiple_scattering,
            record_trajectory: false,
            dechanneling: DechannelingCriteria { string_approach: p.string_approach, max_angle: p.max_angle_rad },
        }
    }

    pub fn spin_params(&self) -> SpinParams {
        let s = &self.spin;
        let p = SpinParams {
            omega_s: s.omega_s,
            omega_l: s.omega_l,
            omega_rf: s.omega_rf,
            a_hyper: s.a_hyper,
            b_hyper: s.b_hyper,
            d_dip: s.d_dip,
            phi_tilt: s.phi_tilt,
            exchange: s.exchange,
        };
        if s.dipolar_b {
            p.with_dipolar_b()
        } else {
            p
        }
    }

    pub fn sweep_parameter(&self) -> Option<SweepParameter> {
        Some(match self.spin.sweep.as_str() {
            "omega_s" => SweepParameter::OmegaS,
            "omega_l" => SweepParameter::OmegaL,
            "a_hyper" => SweepParameter::AHyper,
            "b_hyper" => SweepParameter::BHyper,
            "exchange" => SweepParameter::Exchange,
            _ => return None,
        })
    }

    /// Every violated constraint for `command`, one message per problem,
    /// each naming the offending key.
    pub fn violations(&self, command: crate::Command) -> Vec<String> {
        use crate::Command;
        let mut out = Vec::new();
        if command == Command::Spin {
            self.spin_violations(&mut out);
            return out;
        }
        // the crystal copy of the energy mirrors beam.energy_mev, reported there
        out.extend(self.crystal_config().violations().into_iter().filter(|m| !m.starts_with("crystal.energy_mev")));
        if self.beam.n_protons == 0 {
            out.push("beam.n_protons must be at least 1".into());
        }
        out.extend(self.beam_config_violations());
        let p = &self.propagation;
        match (p.length_nm, p.reduced_thickness) {
            (Some(_), Some(_)) => {
                out.push("propagation.length_nm and propagation.reduced_thickness are mutually exclusive".into())
            }
            (Some(l), None) => positive("propagation.length_nm", l, &mut out),
            (None, Some(r)) => positive("propagation.reduced_thickness", r, &mut out),
            (None, None) => {}
        }
        match (p.step_divisions, p.step_nm) {
            (Some(_), Some(_)) => {
                out.push("propagation.step_divisions and propagation.step_nm are mutually exclusive".into())
            }
            (Some(0), None) => out.push("propagation.step_divisions must be at least 1".into()),
            (None, Some(h)) => positive("propagation.step_nm", h, &mut out),
            _ => {}
        }
        if p.integrator != "rk4" && p.integrator != "gauss-legendre" {
            out.push(format!("propagation.integrator must be \"rk4\" or \"gauss-legendre\", got {:?}", p.integrator));
        }
        if !(p.string_approach >= 0.0) {
            out.push(format!("propagation.string_approach must be non-negative, got {}", p.string_approach));
        }
        positive("propagation.max_angle_rad", p.max_angle_rad, &mut out);
        if self.potential.interpolation_nodes == 1 {
            out.push("potential.interpolation_nodes must be 0 (exact) or at least 2".into());
        }
        let a = &self.analysis;
        if a.bins[0] < 2 || a.bins[1] < 2 {
            out.push(format!("analysis.bins needs at least 2 bins per axis, got {:?}", a.bins));
        }
        if let Some(w) = a.configuration_window {
            window("analysis.configuration_window", w, &mut out);
        }
        if let Some(w) = a.angular_window {
            window("analysis.angular_window", w, &mut out);
        }
        positive("analysis.central_radius_nm", a.central_radius_nm, &mut out);
        positive("analysis.central_radius_mrad", a.central_radius_mrad, &mut out);
        if !(0.0..1.0).contains(&a.peak_prominence) {
            out.push(format!("analysis.peak_prominence must lie in [0, 1), got {}", a.peak_prominence));
        }
        if a.jacobian.enabled {
            if a.jacobian.grid < 1 {
                out.push("analysis.jacobian.grid must be at least 1".into());
            }
            positive("analysis.jacobian.h_nm", a.jacobian.h_nm, &mut out);
            if !(a.jacobian.caustic_threshold >= 0.0) {
                out.push("analysis.jacobian.caustic_threshold must be non-negative".into());
            }
        }
        let s = &self.scan;
        match command {
            Command::ScanTilt => {
                if s.tilts.is_empty() {
                    out.push("scan.tilts must be non-empty for scan-tilt".into());
                }
                for t in &s.tilts {
                    if !(0.0..=0.5).contains(t) {
                        out.push(format!("scan.tilts entries must lie in [0, 0.5], got {t}"));
                    }
                }
            }
            Command::ScanThickness => {
                let list = match (s.reduced_thickness.is_empty(), s.lengths_nm.is_empty()) {
                    (true, true) => {
                        out.push("scan.reduced_thickness or scan.lengths_nm must be non-empty for scan-thickness".into());
                        &s.lengths_nm
                    }
                    (false, false) => {
                        out.push("scan.reduced_thickness and scan.lengths_nm are mutually exclusive".into());
                        &s.lengths_nm
                    }
                    (false, true) => &s.reduced_thickness,
                    (true, false) => &s.lengths_nm,
                };
                for v in list {
                    positive("scan thickness entries", *v, &mut out);
                }
                let mut sorted = list.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    out.push("scan thickness entries must be distinct".into());
                }
            }
            Command::Analyze => {
                if a.input.is_none() {
                    out.push("analysis.input (or --input) must name a record dump for analyze".into());
                }
            }
            _ => {}
        }
        out
    }

    fn beam_config_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(w) = self.beam.impact_window {
            window("beam.impact_window", w, &mut out);
            if !out.is_empty() {
                return out;
            }
        }
        out.extend(self.beam_config().violations());
        out
    }

    fn spin_violations(&self, out: &mut Vec<String>) {
        let s = &self.spin;
        if self.sweep_parameter().is_none() {
            out.push(format!(
                "spin.sweep must be one of omega_s, omega_l, a_hyper, b_hyper, exchange, got {:?}",
                s.sweep
            ));
        }
        if s.sweep_points < 1 {
            out.push("spin.sweep_points must be at least 1".into());
        }
        for (name, v) in [
            ("spin.omega_s", s.omega_s),
            ("spin.omega_l", s.omega_l),
            ("spin.omega_rf", s.omega_rf),
            ("spin.a_hyper", s.a_hyper),
            ("spin.b_hyper", s.b_hyper),
            ("spin.d_dip", s.d_dip),
            ("spin.phi_tilt", s.phi_tilt),
            ("spin.exchange", s.exchange),
            ("spin.sweep_from", s.sweep_from),
            ("spin.sweep_to", s.sweep_to),
        ] {
            if !v.is_finite() {
                out.push(format!("{name} must be finite, got {v}"));
            }
        }
    }
}
