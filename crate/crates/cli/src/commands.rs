use std::path::PathBuf;
use std::time::Instant;

use superfocus_core::ensemble::{
    length_for_reduced_thickness, read_records_csv, reduced_thickness, run_ensemble_depths, write_records_csv,
    BeamSampler,
};
use superfocus_core::phasespace::{
    beam_sigma, central_yield, find_peaks, fwhm, histogram2d, invariants, jacobian_map, smooth, Axis, BeamSigma,
};
use superfocus_core::spin::level_sweep;
use superfocus_core::{
    build_channel, run_ensemble, ChannelGeometry, DensityGrid, ExitRecord, InterpolatedField, Plane, PotentialField,
    StepSize, TransverseField, Window,
};

use crate::config::{RunConfig, DEFAULT_LENGTH_NM};
use crate::output::{Artifact, ArtifactDir, Manifest};
use crate::{CliError, Command};

/// What a finished run wrote and counted.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    /// Artifacts in write order, excluding the manifest itself.
    pub artifacts: Vec<Artifact>,
    pub manifest: Artifact,
    pub protons: u64,
    pub channeled: u64,
    pub dechanneled: u64,
    /// Scan points that could not be completed.
    pub failures: Vec<String>,
}

/// Reductions of one exit ensemble.
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub channeled: u64,
    pub dechanneled: u64,
    pub configuration: DensityGrid,
    pub angular: DensityGrid,
    /// FWHM of the x marginal of the configuration density (nm).
    pub fwhm_x: Option<f64>,
    /// FWHM of the theta_x marginal of the angular density (mrad).
    pub fwhm_theta_x: Option<f64>,
    /// Local maxima of the smoothed theta_x marginal.
    pub peaks_theta_x: usize,
    /// Largest bin of the configuration density.
    pub peak_yield: u64,
    pub central_yield_spatial: u64,
    pub central_yield_angular: u64,
    pub sigma: Option<BeamSigma>,
}

fn window_of(w: [f64; 4]) -> Window {
    Window::new(w[0], w[1], w[2], w[3]).expect("windows are validated with the config")
}

/// Reduces `records` with the analysis settings of `config`. The default
/// angular window spans the critical angle of `geometry`.
pub fn analyze_records(
    records: &[ExitRecord],
    config: &RunConfig,
    geometry: &ChannelGeometry,
) -> Result<RunAnalysis, CliError> {
    let a = &config.analysis;
    let psi = geometry.critical_angle();
    let cw = a.configuration_window.map(window_of).unwrap_or_else(|| geometry.channel_window());
    let aw = a.angular_window.map(window_of).unwrap_or(Window::centered(psi)?);
    let bins = (a.bins[0], a.bins[1]);
    let configuration = histogram2d(records, Plane::Configuration, bins, cw)?;
    let angular = histogram2d(records, Plane::Angular, bins, aw)?;
    let theta_profile = angular.marginal(Axis::X);
    let peaks_theta_x = find_peaks(&smooth(&theta_profile, a.peak_smoothing), a.peak_prominence).len();
    let channeled = records.iter().filter(|r| r.is_channeled()).count() as u64;
    Ok(RunAnalysis {
        channeled,
        dechanneled: records.len() as u64 - channeled,
        fwhm_x: fwhm(&configuration, Axis::X).ok(),
        fwhm_theta_x: fwhm(&angular, Axis::X).ok(),
        peaks_theta_x,
        peak_yield: configuration.counts.iter().copied().max().unwrap_or(0),
        central_yield_spatial: central_yield(records, Plane::Configuration, a.central_radius_nm),
        central_yield_angular: central_yield(records, Plane::Angular, a.central_radius_mrad),
        sigma: if a.sigma { beam_sigma(records, true).ok() } else { None },
        configuration,
        angular,
    })
}

enum Field {
    Exact(PotentialField),
    Table(InterpolatedField),
}

impl Field {
    fn get(&self) -> &dyn TransverseField {
        match self {
            Field::Exact(f) => f,
            Field::Table(t) => t,
        }
    }
}

struct Setup {
    geometry: ChannelGeometry,
    exact: PotentialField,
    field: Field,
}

fn setup(config: &RunConfig) -> Result<Setup, CliError> {
    let geometry = build_channel(&config.crystal_config())?;
    let exact = PotentialField::new(geometry.clone()).with_thermal(config.potential.thermal);
    let field = match config.potential.interpolation_nodes {
        0 => Field::Exact(exact.clone()),
        n => Field::Table(InterpolatedField::new(&exact, n)?),
    };
    Ok(Setup { geometry, exact, field })
}

fn crystal_length(config: &RunConfig, exact: &PotentialField) -> Result<f64, CliError> {
    let p = &config.propagation;
    Ok(match (p.length_nm, p.reduced_thickness) {
        (Some(l), _) => l,
        (None, Some(lambda)) => length_for_reduced_thickness(lambda, config.beam.energy_mev, exact)?,
        (None, None) => DEFAULT_LENGTH_NM,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the artifact set of one ensemble under `prefix`.
fn write_set(
    out: &mut ArtifactDir,
    prefix: &str,
    records: &[ExitRecord],
    analysis: &RunAnalysis,
    config: &RunConfig,
    write_records: bool,
) -> Result<(), CliError> {
    let a = &config.analysis;
    if write_records {
        out.write(&format!("{prefix}records.csv"), |w| Ok(write_records_csv(w, records)?))?;
    }
    if a.configuration_histogram {
        out.write(&format!("{prefix}configuration_density.csv"), |w| Ok(analysis.configuration.write_csv(w)?))?;
    }
    if a.angular_histogram {
        out.write(&format!("{prefix}angular_density.csv"), |w| Ok(analysis.angular.write_csv(w)?))?;
    }
    if a.fwhm {
        out.write(&format!("{prefix}profiles.csv"), |w| {
            let cx = analysis.configuration.marginal(Axis::X);
            let tx = analysis.angular.marginal(Axis::X);
            writeln!(w, "plane,bin,center,count")?;
            for (i, c) in cx.iter().enumerate() {
                writeln!(w, "configuration_x,{i},{},{c}", analysis.configuration.bin_center(Axis::X, i))?;
            }
            for (i, c) in tx.iter().enumerate() {
                writeln!(w, "angular_theta_x,{i},{},{c}", analysis.angular.bin_center(Axis::X, i))?;
            }
            Ok(())
        })?;
    }
    if let Some(s) = &analysis.sigma {
        out.write(&format!("{prefix}sigma.csv"), |w| {
            let (i_prime, det) = invariants(&s.matrix);
            writeln!(w, "# coordinates=x_nm,theta_x_mrad,y_nm,theta_y_mrad")?;
            writeln!(w, "# samples={}", s.samples)?;
            writeln!(w, "# invariant_i_prime={i_prime}")?;
            writeln!(w, "# determinant={det}")?;
            for r in 0..4 {
                let row: Vec<String> = (0..4).map(|c| s.matrix[(r, c)].to_string()).collect();
                writeln!(w, "{}", row.join(","))?;
            }
            Ok(())
        })?;
    }
    out.write(&format!("{prefix}analysis.csv"), |w| {
        writeln!(w, "quantity,value")?;
        writeln!(w, "protons,{}", records.len())?;
        writeln!(w, "channeled,{}", analysis.channeled)?;
        writeln!(w, "dechanneled,{}", analysis.dechanneled)?;
        writeln!(w, "fwhm_x_nm,{}", opt(analysis.fwhm_x))?;
        writeln!(w, "fwhm_theta_x_mrad,{}", opt(analysis.fwhm_theta_x))?;
        writeln!(w, "peaks_theta_x,{}", analysis.peaks_theta_x)?;
        writeln!(w, "peak_yield,{}", analysis.peak_yield)?;
        writeln!(w, "central_yield_spatial,{}", analysis.central_yield_spatial)?;
        writeln!(w, "central_yield_angular,{}", analysis.central_yield_angular)?;
        Ok(())
    })
}

fn write_jacobian(
    out: &mut ArtifactDir,
    prefix: &str,
    config: &RunConfig,
    s: &Setup,
    length: f64,
) -> Result<(), CliError> {
    let j = &config.analysis.jacobian;
    let sampler = BeamSampler::new(&config.beam_config(), &s.geometry)?;
    // keep the stencil clear of the strings at the channel corners
    let half = 0.8 * s.geometry.channel_half_width();
    let n = j.grid;
    let points: Vec<(f64, f64)> = (0..n * n)
        .map(|k| {
            let at = |i: usize| -half + 2.0 * half * (i as f64 + 0.5) / n as f64;
            (at(k % n), at(k / n))
        })
        .collect();
    let nodes = jacobian_map(
        s.field.get(),
        length,
        sampler.energy_ev,
        sampler.tilt_rad,
        &points,
        j.h_nm,
        j.caustic_threshold,
        &config.propagation_options(),
    )?;
    out.write(&format!("{prefix}jacobian.csv"), |w| {
        writeln!(w, "x_nm,y_nm,jacobian,cross_section,caustic,valid")?;
        for node in &nodes {
            writeln!(w, "{},{},{},{},{},{}", node.x, node.y, node.j, opt(node.sigma), node.caustic, node.valid)?;
        }
        Ok(())
    })
}

struct Totals {
    protons: u64,
    channeled: u64,
    dechanneled: u64,
    failures: Vec<String>,
}

pub(crate) fn run(command: Command, config: &RunConfig, threads: usize) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut out = ArtifactDir::create(&config.output.directory)?;
    let totals = match command {
        Command::Simulate => simulate(config, &mut out)?,
        Command::ScanTilt => scan_tilt(config, &mut out)?,
        Command::ScanThickness => scan_thickness(config, &mut out)?,
        Command::Analyze => analyze(config, &mut out)?,
        Command::Spin => spin(config, &mut out)?,
    };
    let text = config.to_toml();
    out.write_str("config.toml", &text)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        seed: config.beam.seed,
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        protons: totals.protons,
        channeled: totals.channeled,
        dechanneled: totals.dechanneled,
        failures: totals.failures.clone(),
        config: text,
        artifacts: out.artifacts().to_vec(),
    };
    let manifest = manifest.write(out.root())?;
    Ok(RunReport {
        out_dir: out.root().to_path_buf(),
        artifacts: out.artifacts().to_vec(),
        manifest,
        protons: totals.protons,
        channeled: totals.channeled,
        dechanneled: totals.dechanneled,
        failures: totals.failures,
    })
}

fn simulate(config: &RunConfig, out: &mut ArtifactDir) -> Result<Totals, CliError> {
    let s = setup(config)?;
    let length = crystal_length(config, &s.exact)?;
    let batch = run_ensemble(&config.beam_config(), &s.geometry, s.field.get(), length, &config.propagation_options())?;
    let analysis = analyze_records(&batch.records, config, &s.geometry)?;
    write_set(out, "", &batch.records, &analysis, config, config.analysis.records)?;
    if config.analysis.jacobian.enabled {
        write_jacobian(out, "", config, &s, length)?;
    }
    Ok(Totals {
        protons: batch.records.len() as u64,
        channeled: analysis.channeled,
        dechanneled: analysis.dechanneled,
        failures: Vec::new(),
    })
}

fn scan_tilt(config: &RunConfig, out: &mut ArtifactDir) -> Result<Totals, CliError> {
    let s = setup(config)?;
    let length = crystal_length(config, &s.exact)?;
    let psi = s.geometry.critical_angle();
    let mut totals = Totals { protons: 0, channeled: 0, dechanneled: 0, failures: Vec::new() };
    let mut rows = Vec::new();
    for &tilt in &config.scan.tilts {
        let mut point = config.clone();
        point.beam.tilt = tilt;
        let prefix = format!("tilt_{tilt:.3}/");
        let result = (|| -> Result<RunAnalysis, CliError> {
            let batch =
                run_ensemble(&point.beam_config(), &s.geometry, s.field.get(), length, &point.propagation_options())?;
            let analysis = analyze_records(&batch.records, &point, &s.geometry)?;
            write_set(out, &prefix, &batch.records, &analysis, &point, point.analysis.records)?;
            if point.analysis.jacobian.enabled {
                write_jacobian(out, &prefix, &point, &s, length)?;
            }
            Ok(analysis)
        })();
        match result {
            Ok(a) => {
                totals.protons += a.channeled + a.dechanneled;
                totals.channeled += a.channeled;
                totals.dechanneled += a.dechanneled;
                rows.push(format!(
                    "{tilt},{},{},{},{},{},{},{},{},ok",
                    tilt * psi,
                    a.channeled,
                    a.dechanneled,
                    a.central_yield_angular,
                    a.central_yield_spatial,
                    opt(a.fwhm_x),
                    opt(a.fwhm_theta_x),
                    a.peaks_theta_x
                ));
            }
            Err(e) => {
                let msg = format!("tilt {tilt}: {e}");
                rows.push(format!("{tilt},{},,,,,,,,failed", tilt * psi));
                totals.failures.push(msg);
            }
        }
    }
    out.write("summary.csv", |w| {
        writeln!(
            w,
            "tilt_psi_c,tilt_mrad,channeled,dechanneled,central_yield_angular,central_yield_spatial,fwhm_x_nm,fwhm_theta_x_mrad,peaks_theta_x,status"
        )?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    Ok(totals)
}

fn scan_thickness(config: &RunConfig, out: &mut ArtifactDir) -> Result<Totals, CliError> {
    let s = setup(config)?;
    let energy = config.beam.energy_mev;
    let mut points: Vec<(f64, f64)> = if config.scan.lengths_nm.is_empty() {
        config
            .scan
            .reduced_thickness
            .iter()
            .map(|&l| Ok((l, length_for_reduced_thickness(l, energy, &s.exact)?)))
            .collect::<Result<_, superfocus_core::Error>>()?
    } else {
        config
            .scan
            .lengths_nm
            .iter()
            .map(|&l| Ok((reduced_thickness(l, energy, &s.exact)?, l)))
            .collect::<Result<_, superfocus_core::Error>>()?
    };
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    let lengths: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mut options = config.propagation_options();
    // one run snapshots every depth, so the step must not depend on length
    if let StepSize::Divisions(n) = options.step {
        options.step = StepSize::Fixed(lengths[lengths.len() - 1] / f64::from(n));
    }
    let batches = run_ensemble_depths(&config.beam_config(), &s.geometry, s.field.get(), &lengths, &options)?;
    let mut totals = Totals { protons: 0, channeled: 0, dechanneled: 0, failures: Vec::new() };
    let deepest = batches.last().expect("at least one thickness");
    totals.protons = deepest.records.len() as u64;
    totals.channeled = deepest.channeled_count() as u64;
    totals.dechanneled = deepest.dechanneled_count() as u64;
    let mut rows = Vec::new();
    for (k, ((lambda, length), batch)) in points.iter().zip(&batches).enumerate() {
        let prefix = format!("thickness_{k:02}/");
        let result = analyze_records(&batch.records, config, &s.geometry)
            .and_then(|a| write_set(out, &prefix, &batch.records, &a, config, config.analysis.records).map(|_| a));
        match result {
            Ok(a) => rows.push(format!(
                "{lambda},{length},{},{},{},{},{},{},ok",
                a.channeled,
                a.dechanneled,
                opt(a.fwhm_x),
                opt(a.fwhm_theta_x),
                a.peak_yield,
                a.central_yield_spatial
            )),
            Err(e) => {
                rows.push(format!("{lambda},{length},,,,,,,failed"));
                totals.failures.push(format!("thickness {length} nm: {e}"));
            }
        }
    }
    out.write("summary.csv", |w| {
        writeln!(
            w,
            "reduced_thickness,length_nm,channeled,dechanneled,fwhm_x_nm,fwhm_theta_x_mrad,peak_yield,central_yield_spatial,status"
        )?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    Ok(totals)
}

fn analyze(config: &RunConfig, out: &mut ArtifactDir) -> Result<Totals, CliError> {
    let path = config.analysis.input.as_ref().expect("validated");
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Config(vec![format!("analysis.input {}: {e}", path.display())]))?;
    let records = read_records_csv(std::io::BufReader::new(file))?;
    let geometry = build_channel(&config.crystal_config())?;
    let analysis = analyze_records(&records, config, &geometry)?;
    write_set(out, "", &records, &analysis, config, false)?;
    Ok(Totals {
        protons: records.len() as u64,
        channeled: analysis.channeled,
        dechanneled: analysis.dechanneled,
        failures: Vec::new(),
    })
}

fn spin(config: &RunConfig, out: &mut ArtifactDir) -> Result<Totals, CliError> {
    let s = &config.spin;
    let n = s.sweep_points;
    let values: Vec<f64> = (0..n)
        .map(|i| if n == 1 { s.sweep_from } else { s.sweep_from + (s.sweep_to - s.sweep_from) * i as f64 / (n - 1) as f64 })
        .collect();
    let rows = level_sweep(&config.spin_params(), config.sweep_parameter().expect("validated"), &values)?;
    out.write("levels.csv", |w| {
        writeln!(w, "{},e0,e1,e2,e3,j", s.sweep)?;
        for r in &rows {
            writeln!(w, "{},{},{},{},{},{}", r.value, r.levels[0], r.levels[1], r.levels[2], r.levels[3], r.j)?;
        }
        Ok(())
    })?;
    Ok(Totals { protons: 0, channeled: 0, dechanneled: 0, failures: Vec::new() })
}
