//! One runner per subcommand. Runners are pure: they return the files to
//! write, and the caller commits them atomically.

use std::f64::consts::PI;
use std::fmt::Write;

use su11sim::detection::{
    effective_time, power_spectrum, simulate_phase_scan, simulate_photocurrent,
    simulate_state_noise, swept_spectrum, AcquisitionSettings, ModulationSpec, SignalModel,
    SpectrumTrace, MAX_DEPTH,
};
use su11sim::gaussian::GaussianState;
use su11sim::interferometer::{
    build_blocked_state, build_state, fringe_ratio, fringe_scan, lock_dark_fringe,
    mzi_fringe_intensity, phase_arm_photons, phase_grid, phase_sensing_intensity,
    random_walk_disturbance, sui_fringe_intensity, InterferometerConfig, Topology, PHASE_MODE,
};
use su11sim::oracle::{oracle_suite, ORACLE_TOLERANCE};
use su11sim::fock::DEFAULT_TRUNCATION_TOLERANCE;
use su11sim::sensitivity::{
    improvement_db, log_grid, loglog_fit, photon_flux_to_microwatts, sensitivity_sweep,
    theoretical_min_phase, theoretical_min_phase_mzi, SensitivityPoint, ToneProbe,
};
use su11sim::table::Table;

use crate::config::{LoadedConfig, NoiseSpectrumSection, RunConfig};
use crate::error::CliError;
use crate::output::OutputFile;
use crate::svg::LinePlot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Fringe,
    NoiseSpectrum,
    Snr,
    Sensitivity,
    Lock,
    OracleCheck,
}

impl Subcommand {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subcommand::Fringe => "fringe",
            Subcommand::NoiseSpectrum => "noise-spectrum",
            Subcommand::Snr => "snr",
            Subcommand::Sensitivity => "sensitivity",
            Subcommand::Lock => "lock",
            Subcommand::OracleCheck => "oracle-check",
        }
    }
}

pub struct RunContext {
    pub subcommand: Subcommand,
    pub config: LoadedConfig,
    pub seed: u64,
    pub svg: bool,
}

impl RunContext {
    fn cfg(&self) -> &RunConfig {
        &self.config.config
    }

    fn stamp(&self, table: Table) -> Table {
        let mut meta = vec![
            ("generator".to_string(), format!("su11sim {}", self.subcommand.as_str())),
            ("config_hash".to_string(), self.config.hash.clone()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        meta.extend(table.meta);
        Table { meta, ..table }
    }

    fn csv(&self, name: &str, table: Table) -> Result<OutputFile, CliError> {
        Ok(OutputFile::new(name, self.stamp(table).to_csv_string()?))
    }

    fn report(&self, body: &str) -> OutputFile {
        let mut s = String::new();
        let _ = writeln!(s, "su11sim {}", self.subcommand.as_str());
        let _ = writeln!(s, "config hash (sha256): {}", self.config.hash);
        let _ = writeln!(s, "seed: {}", self.seed);
        s.push('\n');
        s.push_str(body);
        OutputFile::new("report.txt", s)
    }
}

/// Files of a run, plus a failure that should still leave them on disk.
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    pub failure: Option<String>,
}

impl RunOutput {
    fn ok(files: Vec<OutputFile>) -> Self {
        Self {
            files,
            failure: None,
        }
    }

    pub fn report(&self) -> Option<&str> {
        self.files
            .iter()
            .find(|f| f.name == "report.txt")
            .map(|f| f.contents.as_str())
    }
}

/// Independent stream `stream` of the master seed (SplitMix64).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn seed_batch(master: u64, offset: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|k| derive_seed(master, offset + k)).collect()
}

pub fn run(ctx: &RunContext) -> Result<RunOutput, CliError> {
    match ctx.subcommand {
        Subcommand::Fringe => run_fringe(ctx),
        Subcommand::NoiseSpectrum => run_noise_spectrum(ctx),
        Subcommand::Snr => run_snr(ctx),
        Subcommand::Sensitivity => run_sensitivity(ctx),
        Subcommand::Lock => run_lock(ctx),
        Subcommand::OracleCheck => run_oracle_check(ctx),
    }
}

fn require_sui(config: &InterferometerConfig, what: &str) -> Result<(), CliError> {
    if config.topology != Topology::Sui {
        return Err(CliError::Config(format!(
            "[interferometer] {what} compares against a matched Mach-Zehnder and needs topology = \"sui\""
        )));
    }
    Ok(())
}

/// SU(1,1) configuration and the Mach-Zehnder with the same losses and the
/// same coherent photons in its phase arm.
fn matched_pair(
    ctx: &RunContext,
) -> Result<(InterferometerConfig, InterferometerConfig), CliError> {
    let mut sui = ctx.cfg().interferometer.build();
    require_sui(&sui, "this run")?;
    if let Some(flux) = ctx.cfg().detection.phase_arm_flux() {
        sui = sui.with_phase_arm_coherent(flux)?;
    }
    let arm = phase_arm_photons(&sui)?.coherent;
    let mzi = InterferometerConfig::mzi(sui.seed_alpha, true)
        .with_losses(sui.eta_internal, sui.eta_detection)
        .with_phase_arm_coherent(arm)?;
    Ok((sui, mzi))
}

pub fn run_fringe(ctx: &RunContext) -> Result<RunOutput, CliError> {
    let cfg = ctx.cfg().interferometer.build();
    let grid = phase_grid(ctx.cfg().fringe.points);
    let alpha2 = cfg.seed_alpha.norm_sqr();
    let mut report = String::new();

    let (columns, rows) = match cfg.topology {
        Topology::Sui => {
            let mzi = cfg.matched_mzi()?;
            let a = fringe_scan(&cfg, &grid)?;
            let b = fringe_scan(&mzi, &grid)?;
            let ips_cl = phase_sensing_intensity(&mzi)?;
            let rows: Vec<Vec<f64>> = grid
                .iter()
                .enumerate()
                .map(|(k, &phi)| {
                    Ok(vec![
                        phi,
                        a[k].intensity,
                        b[k].intensity,
                        a[k].variance,
                        b[k].variance,
                        sui_fringe_intensity(cfg.gain1, cfg.gain2, alpha2, phi)?,
                        mzi_fringe_intensity(ips_cl, phi)?,
                    ])
                })
                .collect::<Result<_, su11sim::Error>>()?;
            let dark = a
                .iter()
                .min_by(|x, y| x.intensity.total_cmp(&y.intensity))
                .expect("non-empty grid");
            let _ = writeln!(report, "SU(1,1): G1 = {}, G2 = {}, |alpha|^2 = {alpha2}", cfg.gain1, cfg.gain2);
            let _ = writeln!(
                report,
                "transmissions: internal {}, detection {}",
                cfg.eta_internal, cfg.eta_detection
            );
            let _ = writeln!(report, "dark fringe at phi = {} rad (idler photons {:e})", dark.phi, dark.intensity.max(0.0));
            let _ = writeln!(report, "idler variance at the dark fringe: {}", dark.variance);
            let _ = writeln!(
                report,
                "phase-sensing intensity: SU(1,1) {}, matched Mach-Zehnder {}",
                phase_sensing_intensity(&cfg)?,
                ips_cl
            );
            if cfg.gain1 == cfg.gain2 && cfg.gain1 > 1.0 {
                let r = fringe_ratio(cfg.gain1, alpha2, 0.0)?;
                let _ = writeln!(
                    report,
                    "lossless fringe ratio I_SUI/I_MZI = {} (reciprocal convention {})",
                    r.derived, r.inverse
                );
            }
            (
                vec!["phi_rad", "i_sui", "i_mzi", "noise_sui", "noise_mzi", "i_sui_lossless", "i_mzi_lossless"],
                rows,
            )
        }
        Topology::Mzi => {
            let a = fringe_scan(&cfg, &grid)?;
            let ips = phase_sensing_intensity(&cfg)?;
            let rows = grid
                .iter()
                .enumerate()
                .map(|(k, &phi)| {
                    Ok(vec![phi, a[k].intensity, a[k].variance, mzi_fringe_intensity(ips, phi)?])
                })
                .collect::<Result<_, su11sim::Error>>()?;
            let _ = writeln!(report, "Mach-Zehnder: phase-sensing intensity {ips}");
            (vec!["phi_rad", "i_mzi", "noise_mzi", "i_mzi_lossless"], rows)
        }
    };
    let mut table = Table::new(columns.clone()).with_meta(
        "units",
        "phi in rad, intensities in photons at the detected port, noise as quadrature variance (vacuum = 1)",
    );
    table.rows = rows;

    let mut files = Vec::new();
    if ctx.svg {
        let mut plot = LinePlot::new("Detected-port intensity", "phase (rad)", "photons");
        for (k, name) in columns.iter().enumerate().skip(1) {
            if name.starts_with("i_") {
                plot = plot.with_series(name, table.rows.iter().map(|r| (r[0], r[k])).collect());
            }
        }
        files.push(OutputFile::new("fringe.svg", plot.render()));
    }
    files.insert(0, ctx.csv("fringe.csv", table)?);

    if let Some(section) = &ctx.config.config.noise_spectrum {
        let (noise_files, noise_report) = noise_traces(ctx, section)?;
        files.extend(noise_files);
        report.push('\n');
        report.push_str(&noise_report);
    }
    files.push(ctx.report(&report));
    Ok(RunOutput::ok(files))
}

pub fn run_noise_spectrum(ctx: &RunContext) -> Result<RunOutput, CliError> {
    let section = ctx.cfg().noise_spectrum.clone().unwrap_or_default();
    let (mut files, report) = noise_traces(ctx, &section)?;
    files.push(ctx.report(&report));
    Ok(RunOutput::ok(files))
}

fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

fn noise_traces(
    ctx: &RunContext,
    section: &NoiseSpectrumSection,
) -> Result<(Vec<OutputFile>, String), CliError> {
    let d = &ctx.cfg().detection;
    let vbw = d
        .vbw()
        .ok_or_else(|| CliError::Config("[detection] vbw must be positive for noise spectra".into()))?;
    let cfg = ctx.cfg().interferometer.build();
    require_sui(&cfg, "the noise-spectrum run")?;
    let acq = AcquisitionSettings {
        duration: section.duration,
        sample_rate: d.sample_rate,
        electronic_noise: d.electronic_noise,
    };
    let band = (d.band_start, d.band_stop);
    let pa1_only = InterferometerConfig { gain2: 1.0, ..cfg.clone() };
    let states = [
        ("vacuum", GaussianState::vacuum(2)?),
        ("pa1", build_state(&pa1_only, PI)?),
        ("pa1_pa2_blocked", build_blocked_state(&cfg)?),
    ];
    let mut traces: Vec<SpectrumTrace> = Vec::new();
    let mut predicted = Vec::new();
    for (k, (_, state)) in states.iter().enumerate() {
        let rec = simulate_state_noise(state, PHASE_MODE, 0.0, &acq, derive_seed(ctx.seed, k as u64))?;
        predicted.push(to_db(
            (rec.lock_variance + acq.electronic_variance()) / acq.shot_noise_reference(),
        ));
        let full = power_spectrum(&rec, d.rbw, Some(vbw))?;
        let idx = full.band(band.0, band.1);
        traces.push(SpectrumTrace {
            frequencies: idx.iter().map(|&i| full.frequencies[i]).collect(),
            power_db: idx.iter().map(|&i| full.power_db[i]).collect(),
            linear_psd: idx.iter().map(|&i| full.linear_psd[i]).collect(),
            ..full
        });
    }
    let scan = simulate_phase_scan(&cfg, section.scan_periods, &acq, derive_seed(ctx.seed, 3))?;
    let scanned = swept_spectrum(&scan, d.rbw, vbw, band.0, band.1)?;
    if scanned.frequencies != traces[0].frequencies {
        return Err(CliError::Numerical(su11sim::Error::InvalidArgument(
            "swept and averaged traces have different frequency grids".into(),
        )));
    }

    let mut table = Table::new(["frequency_hz", "vacuum_db", "pa1_db", "pa1_pa2_blocked_db", "scanned_db"])
        .with_meta("units", "frequency in Hz, power in dB relative to shot noise")
        .with_meta("rbw_hz", d.rbw)
        .with_meta("vbw_hz", vbw)
        .with_meta("record_s", section.duration)
        .with_meta("scan_periods", section.scan_periods);
    table.rows = (0..scanned.frequencies.len())
        .map(|i| {
            vec![
                scanned.frequencies[i],
                traces[0].power_db[i],
                traces[1].power_db[i],
                traces[2].power_db[i],
                scanned.power_db[i],
            ]
        })
        .collect();

    let mut report = String::new();
    let _ = writeln!(
        report,
        "noise spectra over {}-{} MHz, RBW {} kHz, VBW {} Hz, {} s per trace",
        band.0 / 1e6,
        band.1 / 1e6,
        d.rbw / 1e3,
        vbw,
        section.duration
    );
    let _ = writeln!(
        report,
        "G1 = {}, G2 = {}, transmission internal {} x detection {} = {}",
        cfg.gain1,
        cfg.gain2,
        cfg.eta_internal,
        cfg.eta_detection,
        cfg.eta_internal * cfg.eta_detection
    );
    let names = ["vacuum", "PA1 only", "PA1 + PA2, idler blocked"];
    for (i, name) in names.iter().enumerate() {
        let (lo, hi) = traces[i].range_db_in(band.0, band.1).unwrap_or((f64::NAN, f64::NAN));
        let mean = traces[i].mean_db_in(band.0, band.1).unwrap_or(f64::NAN);
        let _ = writeln!(
            report,
            "{name:<26} mean {mean:7.3} dB  range [{lo:.3}, {hi:.3}] dB  model {:.3} dB",
            predicted[i]
        );
    }
    let (lo, hi) = scanned.range_db_in(band.0, band.1).unwrap_or((f64::NAN, f64::NAN));
    let _ = writeln!(report, "{:<26} range [{lo:.3}, {hi:.3}] dB", "phase scanned");

    let mut files = vec![ctx.csv("noise_spectrum.csv", table.clone())?];
    if ctx.svg {
        let mut plot = LinePlot::new("Noise spectra", "frequency (Hz)", "dB re shot noise");
        for (k, name) in ["vacuum", "PA1 only", "PA1+PA2 blocked", "scanned"].iter().enumerate() {
            plot = plot.with_series(name, table.rows.iter().map(|r| (r[0], r[k + 1])).collect());
        }
        files.push(OutputFile::new("noise_spectrum.svg", plot.render()));
    }
    Ok((files, report))
}

/// Seed-averaged S/N of the matched pair at one depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrRow {
    pub depth: f64,
    /// Mean peak-to-floor ratio in dB.
    pub sui_snr_db: f64,
    pub mzi_snr_db: f64,
    /// Noise-subtracted S/N, `mean ratio - 1`.
    pub sui_sn: f64,
    pub mzi_sn: f64,
    pub sui_predicted: f64,
    pub mzi_predicted: f64,
}

impl SnrRow {
    /// SU(1,1) advantage in S/N, 10·log10.
    pub fn improvement_db(&self) -> f64 {
        to_db(self.sui_sn / self.mzi_sn)
    }

    pub fn sui_detected(&self) -> bool {
        self.sui_sn >= 1.0
    }

    pub fn mzi_detected(&self) -> bool {
        self.mzi_sn >= 1.0
    }
}

pub fn snr_rows(ctx: &RunContext) -> Result<Vec<SnrRow>, CliError> {
    let c = ctx.cfg();
    let settings = c.detection.sweep_settings();
    let (sui, mzi) = matched_pair(ctx)?;
    let seeds = seed_batch(ctx.seed, 1000, c.snr.seeds);
    let ms = SignalModel::locked(&sui, settings.sample_rate)?;
    let mm = SignalModel::locked(&mzi, settings.sample_rate)?;
    let ps = ToneProbe::new(&ms, &settings, &seeds)?;
    let pm = ToneProbe::new(&mm, &settings, &seeds)?;
    let e = settings.acquisition().electronic_variance();
    c.snr
        .depths
        .iter()
        .map(|&depth| {
            let a = ps.mean_ratio(depth)?;
            let b = pm.mean_ratio(depth)?;
            Ok(SnrRow {
                depth,
                sui_snr_db: to_db(a),
                mzi_snr_db: to_db(b),
                sui_sn: a - 1.0,
                mzi_sn: b - 1.0,
                sui_predicted: ms.predicted_snr(depth, settings.sample_rate, settings.rbw, e),
                mzi_predicted: mm.predicted_snr(depth, settings.sample_rate, settings.rbw, e),
            })
        })
        .collect()
}

pub fn run_snr(ctx: &RunContext) -> Result<RunOutput, CliError> {
    let c = ctx.cfg();
    for &d in &c.snr.depths {
        if !(d >= 0.0 && d < MAX_DEPTH) {
            return Err(CliError::Config(format!(
                "[snr] depth {d} rad is outside the small-signal range [0, {MAX_DEPTH})"
            )));
        }
    }
    let d = &c.detection;
    let (sui, mzi) = matched_pair(ctx)?;
    let rows = snr_rows(ctx)?;

    let mut table = Table::new([
        "depth_rad",
        "sui_snr_db",
        "mzi_snr_db",
        "sui_sn",
        "mzi_sn",
        "improvement_db",
        "sui_detected",
        "mzi_detected",
        "sui_sn_predicted",
        "mzi_sn_predicted",
    ])
    .with_meta(
        "units",
        "depth in rad; snr_db = seed-averaged peak/floor in dB; sn = noise-subtracted S/N (linear); improvement in dB (10*log10 of S/N ratio); detected = 1 when the peak is 3 dB over the floor",
    )
    .with_meta("seeds", c.snr.seeds);
    for r in &rows {
        table.push_row(vec![
            r.depth,
            r.sui_snr_db,
            r.mzi_snr_db,
            r.sui_sn,
            r.mzi_sn,
            r.improvement_db(),
            r.sui_detected() as u8 as f64,
            r.mzi_detected() as u8 as f64,
            r.sui_predicted,
            r.mzi_predicted,
        ])?;
    }

    let acq = AcquisitionSettings {
        duration: d.duration,
        sample_rate: d.sample_rate,
        electronic_noise: d.electronic_noise,
    };
    let mut columns = vec!["frequency_hz".to_string()];
    let mut spectra: Vec<SpectrumTrace> = Vec::new();
    for (k, &depth) in c.snr.depths.iter().enumerate() {
        let m = ModulationSpec::new(depth, d.modulation_frequency)?;
        for (name, cfg) in [("sui", &sui), ("mzi", &mzi)] {
            let rec = simulate_photocurrent(cfg, &m, &acq, derive_seed(ctx.seed, 2 * k as u64 + (name == "mzi") as u64))?;
            spectra.push(power_spectrum(&rec, d.rbw, d.vbw())?);
            columns.push(format!("{name}_db_{k}"));
        }
    }
    let band = spectra[0].band(d.band_start, d.band_stop);
    let mut spec_table = Table::new(columns.clone())
        .with_meta("units", "frequency in Hz, power in dB relative to shot noise")
        .with_meta(
            "depths_rad",
            c.snr.depths.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
        );
    spec_table.rows = band
        .iter()
        .map(|&i| {
            let mut row = vec![spectra[0].frequencies[i]];
            row.extend(spectra.iter().map(|s| s.power_db[i]));
            row
        })
        .collect();

    let arm = phase_arm_photons(&sui)?.coherent;
    let per_bin = arm * effective_time(d.rbw);
    let mut report = String::new();
    let _ = writeln!(
        report,
        "SU(1,1) G1 = {}, G2 = {}, transmission internal {} x detection {}",
        sui.gain1, sui.gain2, sui.eta_internal, sui.eta_detection
    );
    let _ = writeln!(
        report,
        "phase-arm photons per bin time {per_bin:.4e} ({:.3} uW at 795 nm), matched in both interferometers",
        photon_flux_to_microwatts(arm)
    );
    let _ = writeln!(report, "seeds per depth: {}\n", c.snr.seeds);
    let _ = writeln!(
        report,
        "{:>10} {:>11} {:>11} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "depth", "SUI dB", "MZI dB", "SUI S/N", "MZI S/N", "gain dB", "SUI", "MZI"
    );
    for r in &rows {
        let _ = writeln!(
            report,
            "{:>10.2e} {:>11.3} {:>11.3} {:>9.3} {:>9.3} {:>9.3} {:>9} {:>9}",
            r.depth,
            r.sui_snr_db,
            r.mzi_snr_db,
            r.sui_sn,
            r.mzi_sn,
            r.improvement_db(),
            if r.sui_detected() { "seen" } else { "lost" },
            if r.mzi_detected() { "seen" } else { "lost" },
        );
    }
    let ms = SignalModel::locked(&sui, d.sample_rate)?;
    let mm = SignalModel::locked(&mzi, d.sample_rate)?;
    let model_gain = (ms.slope_per_sample.powi(2) / ms.variance) / (mm.slope_per_sample.powi(2) / mm.variance);
    let _ = writeln!(report, "\nGaussian-model S/N advantage: {:.3} dB", to_db(model_gain));

    let mut files = vec![ctx.csv("snr.csv", table)?, ctx.csv("snr_spectra.csv", spec_table.clone())?];
    if ctx.svg {
        let mut plot = LinePlot::new("Spectra around the modulation", "frequency (Hz)", "dB re shot noise");
        for (k, name) in columns.iter().enumerate().skip(1) {
            plot = plot.with_series(name, spec_table.rows.iter().map(|r| (r[0], r[k])).collect());
        }
        files.push(OutputFile::new("snr_spectra.svg", plot.render()));
    }
    files.push(ctx.report(&report));
    Ok(RunOutput::ok(files))
}

pub struct SensitivityResult {
    pub sui: Vec<SensitivityPoint>,
    pub mzi: Vec<SensitivityPoint>,
}

pub fn sensitivity_points(ctx: &RunContext) -> Result<SensitivityResult, CliError> {
    let c = ctx.cfg();
    let settings = c.detection.sweep_settings();
    let sui = c.interferometer.build();
    require_sui(&sui, "the sensitivity sweep")?;
    let mzi = InterferometerConfig::mzi(sui.seed_alpha, true).with_losses(sui.eta_internal, sui.eta_detection);
    let s = &c.sensitivity;
    let grid = log_grid(s.i_ps_min, s.i_ps_max, s.points);
    let seeds = seed_batch(ctx.seed, 5000, s.seeds);
    Ok(SensitivityResult {
        sui: sensitivity_sweep(&sui, &grid, &settings, &seeds)?,
        mzi: sensitivity_sweep(&mzi, &grid, &settings, &seeds)?,
    })
}

pub fn run_sensitivity(ctx: &RunContext) -> Result<RunOutput, CliError> {
    let c = ctx.cfg();
    let gain = c.interferometer.gain1;
    let res = sensitivity_points(ctx)?;
    let fit_sui = loglog_fit(&res.sui)?;
    let fit_mzi = loglog_fit(&res.mzi)?;
    let imp = improvement_db(&fit_sui, &fit_mzi)?;

    let mut table = Table::new([
        "i_ps",
        "i_ps_uw",
        "sui_delta_rad",
        "sui_uncertainty_rad",
        "mzi_delta_rad",
        "mzi_uncertainty_rad",
        "sui_bound_rad",
        "mzi_bound_rad",
    ])
    .with_meta(
        "units",
        "i_ps in coherent phase-arm photons per bin time 1/(4 RBW); i_ps_uw in uW at 795 nm; phases in rad",
    )
    .with_meta("seeds", c.sensitivity.seeds);
    for (a, b) in res.sui.iter().zip(&res.mzi) {
        table.push_row(vec![
            a.i_ps,
            a.i_ps_microwatts(c.detection.rbw),
            a.delta_phi_min,
            a.uncertainty,
            b.delta_phi_min,
            b.uncertainty,
            theoretical_min_phase(gain, 2.0 * a.i_ps)?,
            theoretical_min_phase_mzi(2.0 * a.i_ps)?,
        ])?;
    }
    let mut fits = Table::new(["topology", "slope", "intercept", "slope_stderr", "residual_rms"])
        .with_meta("topology", "0 = SU(1,1), 1 = Mach-Zehnder")
        .with_meta("units", "fit of log10(delta) against log10(i_ps)");
    for (k, f) in [fit_sui, fit_mzi].iter().enumerate() {
        fits.push_row(vec![k as f64, f.slope, f.intercept, f.slope_stderr, f.residual_rms])?;
    }

    let mut report = String::new();
    let _ = writeln!(
        report,
        "SU(1,1) G1 = {}, G2 = {}, transmission internal {} x detection {}; {} photon numbers, {} seeds each",
        c.interferometer.gain1,
        c.interferometer.gain2,
        c.interferometer.eta_internal,
        c.interferometer.eta_detection,
        c.sensitivity.points,
        c.sensitivity.seeds
    );
    let _ = writeln!(report, "SU(1,1) slope {:.4} +/- {:.4}", fit_sui.slope, fit_sui.slope_stderr);
    let _ = writeln!(report, "MZI     slope {:.4} +/- {:.4}", fit_mzi.slope, fit_mzi.slope_stderr);
    let _ = writeln!(report, "slope difference {:.4}", (fit_sui.slope - fit_mzi.slope).abs());
    let _ = writeln!(
        report,
        "offset at log10(i_ps) = {:.3}: ratio {:.4}, {:.3} dB (20 log10), {:.3} dB (10 log10)",
        imp.at_log10_i_ps, imp.ratio, imp.amplitude_db, imp.power_db
    );
    let ideal = (2.0 * gain).sqrt();
    let _ = writeln!(
        report,
        "ideal lossless ratio sqrt(2G) at G = {gain}: {:.4}, {:.3} dB (20 log10), {:.3} dB (10 log10)",
        ideal,
        20.0 * ideal.log10(),
        10.0 * ideal.log10()
    );
    if gain < 1.1 {
        let _ = writeln!(
            report,
            "near unit gain the two lines differ only by sqrt(2G), within a 10 log10(2) = {:.3} dB budget",
            10.0 * 2f64.log10()
        );
    }
    let _ = writeln!(
        report,
        "SU(1,1) line {} the Mach-Zehnder line",
        if imp.ratio > 1.0 { "below" } else { "not below" }
    );

    let mut files = vec![ctx.csv("sensitivity.csv", table.clone())?, ctx.csv("fits.csv", fits)?];
    if ctx.svg {
        let plot = LinePlot::new("Minimum detectable phase", "i_ps (photons per bin)", "phase (rad)")
            .log_log()
            .with_series("SU(1,1)", table.rows.iter().map(|r| (r[0], r[2])).collect())
            .with_series("Mach-Zehnder", table.rows.iter().map(|r| (r[0], r[4])).collect())
            .with_series("1/sqrt(2GN)", table.rows.iter().map(|r| (r[0], r[6])).collect())
            .with_series("1/sqrt(N)", table.rows.iter().map(|r| (r[0], r[7])).collect());
        files.push(OutputFile::new("sensitivity.svg", plot.render()));
    }
    files.push(ctx.report(&report));
    Ok(RunOutput::ok(files))
}

pub fn run_lock(ctx: &RunContext) -> Result<RunOutput, CliError> {
    let c = ctx.cfg();
    let cfg = c.interferometer.build();
    let l = &c.lock;
    let controller = l.controller();
    let walk = random_walk_disturbance(l.steps, l.disturbance, derive_seed(ctx.seed, 0))?;
    let disturbance: Vec<f64> = walk
        .iter()
        .enumerate()
        .map(|(k, w)| w + l.drift * k as f64)
        .collect();
    let trace = lock_dark_fringe(&cfg, &controller, &disturbance)?;

    let mut table = Table::new(["time_s", "phase_error_rad", "error_signal", "control_voltage_v"])
        .with_meta("units", "time in s, phase error in rad, error signal normalised to sin(phase error), voltage in V")
        .with_meta("step_s", trace.step);
    table.rows = (0..trace.len())
        .map(|k| {
            vec![
                trace.time[k],
                trace.phase_error[k],
                trace.error_signal[k],
                trace.control_voltage[k],
            ]
        })
        .collect();
    let from = trace.len() / 10;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "{} steps of {} s, random walk {} rad/sqrt(step), drift {} rad/step",
        trace.len(),
        trace.step,
        l.disturbance,
        l.drift
    );
    let _ = writeln!(report, "residual phase rms (after first 10%): {:.4e} rad", trace.residual_rms(from));
    let _ = writeln!(report, "median |phase error| (after first 10%): {:.4e} rad", trace.median_abs_error(from));
    match trace.settling_time(1e-3) {
        Some(t) => {
            let _ = writeln!(report, "settled below 1e-3 rad after {t:.4e} s");
        }
        None => {
            let _ = writeln!(report, "did not settle below 1e-3 rad");
        }
    }
    let mut files = vec![ctx.csv("lock.csv", table.clone())?];
    if ctx.svg {
        let plot = LinePlot::new("Lock residual", "time (s)", "phase error (rad)")
            .with_series("phase error", table.rows.iter().map(|r| (r[0], r[1])).collect());
        files.push(OutputFile::new("lock.svg", plot.render()));
    }
    files.push(ctx.report(&report));
    Ok(RunOutput::ok(files))
}

pub fn run_oracle_check(ctx: &RunContext) -> Result<RunOutput, CliError> {
    let o = &ctx.cfg().oracle;
    let rows = oracle_suite(o.max_gain, o.cutoff, DEFAULT_TRUNCATION_TOLERANCE)?;
    let mut table = Table::new(["circuit", "gain", "alpha", "phi_rad", "discrepancy", "truncation"])
        .with_meta("circuit", "0 = amplifier + phase, 1 = Mach-Zehnder, 2 = SU(1,1)")
        .with_meta("cutoff", o.cutoff)
        .with_meta("max_gain", o.max_gain);
    for r in &rows {
        let code = match r.circuit {
            su11sim::oracle::Circuit::AmplifierPhase => 0.0,
            su11sim::oracle::Circuit::MachZehnder => 1.0,
            su11sim::oracle::Circuit::SuOneOne => 2.0,
        };
        table.push_row(vec![code, r.gain, r.alpha, r.phi, r.discrepancy, r.truncation])?;
    }
    let worst = rows
        .iter()
        .max_by(|a, b| a.discrepancy.total_cmp(&b.discrepancy))
        .expect("suite is never empty");
    let mut report = String::new();
    let _ = writeln!(report, "{} circuits, cutoff {}, gains up to {}", rows.len(), o.cutoff, o.max_gain);
    let _ = writeln!(
        report,
        "max discrepancy {:.3e} ({} circuit, G = {}, alpha = {}, phi = {:.4}); tolerance {ORACLE_TOLERANCE:e}",
        worst.discrepancy,
        worst.circuit.as_str(),
        worst.gain,
        worst.alpha,
        worst.phi
    );
    let failure = (worst.discrepancy >= ORACLE_TOLERANCE).then(|| {
        format!(
            "oracle discrepancy {:.3e} exceeds {ORACLE_TOLERANCE:e}",
            worst.discrepancy
        )
    });
    let _ = writeln!(report, "{}", if failure.is_some() { "FAIL" } else { "PASS" });
    Ok(RunOutput {
        files: vec![ctx.csv("oracle.csv", table)?, ctx.report(&report)],
        failure,
    })
}
