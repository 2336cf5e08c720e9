//! Command-line front door: phase-matching solvers, parameter sweeps and
//! tomography with reproducible CSV/JSON outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector4;
use num_complex::Complex64;

use spdc::config::RunConfig;
use spdc::dispersion::SetRegistry;
use spdc::emission::{self, FilterShape, FilterSpec};
use spdc::error::Error;
use spdc::phasematch::{self, Plane, Pol};
use spdc::rates;
use spdc::report::{self, DensityMatrixJson};
use spdc::spectrum;
use spdc::tomography::{self, MleOptions, NoiseModel, TomographyRecord};
use spdc::twophoton::{self, EnvelopeShape};

#[derive(Parser)]
#[command(
    name = "spdc",
    about = "Design and analysis toolkit for quasi-phase-matched type-II SPDC sources in periodically poled KTP",
    version
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Sellmeier coefficient set name.
    #[arg(long, global = true)]
    set: Option<String>,

    /// Pump wavelength (nm).
    #[arg(long = "lambda-p", global = true)]
    lambda_p: Option<f64>,

    /// Poling period (um).
    #[arg(long, global = true)]
    period: Option<f64>,

    /// Crystal length (mm).
    #[arg(long, global = true)]
    length: Option<f64>,

    /// Pump power (mW).
    #[arg(long, global = true)]
    power: Option<f64>,

    /// Output directory for data files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for all stochastic simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory with additional coefficient-set TOML files.
    #[arg(long = "set-dir", global = true)]
    set_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the degenerate collinear temperature.
    Tdc(TdcArgs),
    /// Parameter sweeps emitted as CSV files.
    Sweep(SweepArgs),
    /// Two-qubit state tomography from a counts file or a simulation.
    Tomo(TomoArgs),
}

#[derive(Args)]
struct TdcArgs {
    /// Solve for every registered coefficient set, not just the configured one.
    #[arg(long)]
    all_sets: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(subcommand)]
    kind: SweepKind,
}

#[derive(Subcommand)]
enum SweepKind {
    /// Center wavelengths of both polarizations against temperature.
    Tuning(TempRangeArgs),
    /// Spectral FWHM of both polarizations against temperature.
    Bandwidth(TempRangeArgs),
    /// Degenerate emission angles, angle slopes and ring ellipticity vs T.
    Angle(TempRangeArgs),
    /// Emission ring of both polarizations on the detection plane.
    Ring(RingArgs),
    /// Filtered 1-D intensity profile along the y axis.
    CrossSection(CrossSectionArgs),
    /// Hong-Ou-Mandel coincidence trace against pair delay.
    Hom(HomArgs),
    /// Interferometer phase-stability estimate vs wavelength splitting.
    Stability(StabilityArgs),
}

#[derive(Args)]
struct TempRangeArgs {
    #[arg(long, default_value_t = 42.0)]
    t_min: f64,
    #[arg(long, default_value_t = 122.0)]
    t_max: f64,
    #[arg(long, default_value_t = 5.0)]
    t_step: f64,
    /// Temperature (degC) whose degenerate emission angle defines the fixed
    /// collection mode.
    #[arg(long, default_value_t = 95.0)]
    mode_t: f64,
}

#[derive(Args)]
struct RingArgs {
    #[arg(long, default_value_t = 68.6)]
    t: f64,
    /// Ring wavelength (nm); defaults to the degenerate wavelength.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 64)]
    points: usize,
}

#[derive(Args)]
struct CrossSectionArgs {
    #[arg(long, default_value_t = 68.6)]
    t: f64,
    /// Filter center (nm); defaults to 2*lambda_p + 0.07.
    #[arg(long)]
    filter_center: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    filter_fwhm: f64,
    #[arg(long, value_enum, default_value_t = FilterShapeArg::Gaussian)]
    filter_shape: FilterShapeArg,
    #[arg(long, default_value_t = 3.4)]
    y_max: f64,
    #[arg(long, default_value_t = 0.02)]
    step: f64,
}

#[derive(Copy, Clone, ValueEnum)]
enum FilterShapeArg {
    Gaussian,
    TopHat,
}

impl From<FilterShapeArg> for FilterShape {
    fn from(v: FilterShapeArg) -> Self {
        match v {
            FilterShapeArg::Gaussian => FilterShape::Gaussian,
            FilterShapeArg::TopHat => FilterShape::TopHat,
        }
    }
}

#[derive(Args)]
struct HomArgs {
    /// Pair phase phi (rad).
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, default_value_t = 45.0)]
    lp_a: f64,
    #[arg(long, default_value_t = -45.0)]
    lp_b: f64,
    /// Wavelength of photon A (nm); defaults to degenerate.
    #[arg(long)]
    lambda_a: Option<f64>,
    /// Wavelength of photon B (nm); defaults to degenerate.
    #[arg(long)]
    lambda_b: Option<f64>,
    /// Per-photon spectral FWHM (nm).
    #[arg(long, default_value_t = 0.553)]
    fwhm: f64,
    #[arg(long, default_value_t = 4000.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 10.0)]
    tau_step: f64,
    #[arg(long, value_enum, default_value_t = EnvelopeArg::Gaussian)]
    envelope: EnvelopeArg,
}

#[derive(Copy, Clone, ValueEnum)]
enum EnvelopeArg {
    Gaussian,
    SincDerived,
}

impl From<EnvelopeArg> for EnvelopeShape {
    fn from(v: EnvelopeArg) -> Self {
        match v {
            EnvelopeArg::Gaussian => EnvelopeShape::Gaussian,
            EnvelopeArg::SincDerived => EnvelopeShape::SincDerived,
        }
    }
}

#[derive(Args)]
struct StabilityArgs {
    /// Wavelength splitting delta-lambda (nm).
    #[arg(long, default_value_t = 50.0)]
    delta_lambda: f64,
    /// Number of unbalanced mirrors m.
    #[arg(long, default_value_t = 5)]
    m: u32,
    /// Path fluctuation delta-l (um).
    #[arg(long, default_value_t = 0.1)]
    dl: f64,
}

#[derive(Args)]
struct TomoArgs {
    /// Counts file (16 `label,count` lines).
    #[arg(long, conflicts_with = "simulate")]
    input: Option<PathBuf>,
    /// Simulate counts from a named state instead of reading a file.
    #[arg(long, value_enum)]
    simulate: Option<SimState>,
    /// Werner mixing parameter p.
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    /// Bell-state phase phi (rad).
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Mean counts per setting for the simulation.
    #[arg(long, default_value_t = 100_000.0)]
    n: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::None)]
    noise: NoiseArg,
    #[arg(long, value_enum, default_value_t = LikelihoodArg::Gaussian)]
    likelihood: LikelihoodArg,
}

#[derive(Copy, Clone, ValueEnum)]
enum SimState {
    Bell,
    Werner,
}

#[derive(Copy, Clone, ValueEnum)]
enum NoiseArg {
    None,
    Poisson,
}

#[derive(Copy, Clone, ValueEnum)]
enum LikelihoodArg {
    Gaussian,
    Poisson,
}

/// 0 = success, 2 = input error, 3 = numerical failure.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::MalformedInput { .. }
        | Error::UnknownCoefficientSet { .. }
        | Error::Io(_)
        | Error::WavelengthOutOfRange { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(set) = &cli.set {
        config.crystal.coefficient_set = set.clone();
    }
    if let Some(v) = cli.lambda_p {
        config.pump.lambda_nm = v;
    }
    if let Some(v) = cli.period {
        config.crystal.period_um = v;
    }
    if let Some(v) = cli.length {
        config.crystal.length_mm = v;
    }
    if let Some(v) = cli.power {
        config.pump.power_mw = v;
    }
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        config.output.seed = seed;
    }
    Ok(config)
}

fn registry(cli: &Cli) -> Result<SetRegistry, Error> {
    let mut registry = SetRegistry::builtin();
    if let Some(dir) = &cli.set_dir {
        registry.load_dir(dir)?;
    }
    Ok(registry)
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = build_config(&cli)?;
    let registry = registry(&cli)?;
    match &cli.command {
        Command::Tdc(args) => cmd_tdc(&config, &registry, args),
        Command::Sweep(args) => cmd_sweep(&config, &registry, args),
        Command::Tomo(args) => cmd_tomo(&config, &registry, args),
    }
}

fn cmd_tdc(config: &RunConfig, registry: &SetRegistry, args: &TdcArgs) -> Result<(), Error> {
    let pump = config.pump_spec();
    println!(
        "# degenerate collinear temperature, pump {} nm, period {} um",
        config.pump.lambda_nm, config.crystal.period_um
    );
    println!("set,T_dc_degC,reference");
    if args.all_sets {
        for set in registry.iter() {
            let mut cfg = config.clone();
            cfg.crystal.coefficient_set = set.id.clone();
            let crystal = cfg.crystal_spec(registry)?;
            match phasematch::solve_degenerate_collinear_t(&crystal, &pump) {
                Ok(t) => println!("{},{t:.2},{}", set.id, set.reference),
                Err(e) => println!("{},unsolvable ({e}),{}", set.id, set.reference),
            }
        }
        Ok(())
    } else {
        let crystal = config.crystal_spec(registry)?;
        let set = registry.get(&config.crystal.coefficient_set)?;
        let t = phasematch::solve_degenerate_collinear_t(&crystal, &pump)?;
        println!("{},{t:.2},{}", set.id, set.reference);
        Ok(())
    }
}

fn cmd_sweep(config: &RunConfig, registry: &SetRegistry, args: &SweepArgs) -> Result<(), Error> {
    let crystal = config.crystal_spec(registry)?;
    let pump = config.pump_spec();
    let out = &config.output.dir;
    match &args.kind {
        SweepKind::Tuning(r) => {
            let theta = phasematch::degenerate_external_angle(r.mode_t, Plane::Xy, &crystal, &pump)?;
            let temps = temp_grid(r);
            let fit = spectrum::tuning_slope(&temps, theta, &crystal, &pump)?;
            let rows: Vec<Vec<f64>> = fit
                .samples
                .iter()
                .map(|&(t, lh, lv)| vec![t, lh, lv])
                .collect();
            let extra = [
                ("units", "degC,nm,nm".to_string()),
                ("mode_angle_deg", format!("{theta}")),
            ];
            let text = report::render_csv(config, &extra, &["T", "lambda_H", "lambda_V"], &rows);
            report::write_file(&out.join("tuning.csv"), &text)?;
            println!(
                "tuning: slope_H = {:.4} nm/degC, slope_V = {:.4} nm/degC ({} points) -> {}",
                fit.h_slope_nm_per_c,
                fit.v_slope_nm_per_c,
                fit.samples.len(),
                out.join("tuning.csv").display()
            );
            if let Ok(cross) =
                spectrum::branch_crossing_t(r.t_min, r.t_max, theta, &crystal, &pump)
            {
                println!("tuning: branches cross at {cross:.2} degC");
            }
            Ok(())
        }
        SweepKind::Bandwidth(r) => {
            let theta = phasematch::degenerate_external_angle(r.mode_t, Plane::Xy, &crystal, &pump)?;
            let temps = temp_grid(r);
            let mut rows = Vec::new();
            for &t in &temps {
                let h = spectrum::bandwidth_fwhm(t, theta, Pol::H, &crystal, &pump);
                let v = spectrum::bandwidth_fwhm(t, theta, Pol::V, &crystal, &pump);
                if let (Ok(h), Ok(v)) = (h, v) {
                    rows.push(vec![t, h, v]);
                }
            }
            if rows.is_empty() {
                return Err(Error::NoPhaseMatch("no solvable temperature in range".into()));
            }
            let extra = [
                ("units", "degC,nm,nm".to_string()),
                ("mode_angle_deg", format!("{theta}")),
            ];
            let text = report::render_csv(config, &extra, &["T", "fwhm_H", "fwhm_V"], &rows);
            report::write_file(&out.join("bandwidth.csv"), &text)?;
            println!(
                "bandwidth: {} points, FWHM_H({}) = {:.3} nm -> {}",
                rows.len(),
                rows[0][0],
                rows[0][1],
                out.join("bandwidth.csv").display()
            );
            Ok(())
        }
        SweepKind::Angle(r) => {
            let temps = temp_grid(r);
            let mut rows = Vec::new();
            for &t in &temps {
                let xy = phasematch::degenerate_external_angle(t, Plane::Xy, &crystal, &pump);
                let xz = phasematch::degenerate_external_angle(t, Plane::Xz, &crystal, &pump);
                if let (Ok(xy), Ok(xz)) = (xy, xz) {
                    let ring =
                        emission::ring_curve(t, pump.degenerate_nm(), Pol::H, 64, &crystal, &pump)?;
                    let e = emission::ellipticity(&ring).unwrap_or(0.0);
                    rows.push(vec![t, xy, xz, e]);
                }
            }
            if rows.is_empty() {
                return Err(Error::NoPhaseMatch("no solvable temperature in range".into()));
            }
            let extra = [("units", "degC,deg,deg,dimensionless".to_string())];
            let text = report::render_csv(
                config,
                &extra,
                &["T", "theta_xy", "theta_xz", "ellipticity"],
                &rows,
            );
            report::write_file(&out.join("angle.csv"), &text)?;
            let slope = phasematch::angle_wavelength_slope(r.mode_t, Plane::Xy, &crystal, &pump)?;
            let partner = phasematch::partner_angle_slope(r.mode_t, Plane::Xy, &crystal, &pump)?;
            println!(
                "angle: dtheta/dlambda({} degC) = {:.3} deg/nm, partner-angle slope = {:.1} urad/nm -> {}",
                r.mode_t,
                slope,
                partner,
                out.join("angle.csv").display()
            );
            Ok(())
        }
        SweepKind::Ring(r) => {
            let lambda = r.lambda.unwrap_or_else(|| pump.degenerate_nm());
            for pol in [Pol::H, Pol::V] {
                let ring = emission::ring_curve(r.t, lambda, pol, r.points, &crystal, &pump)?;
                let rows: Vec<Vec<f64>> = ring.points.iter().map(|&(y, z)| vec![y, z]).collect();
                let e = emission::ellipticity(&ring);
                let extra = [
                    ("units", "deg,deg".to_string()),
                    ("T_degC", format!("{}", r.t)),
                    ("lambda_nm", format!("{lambda}")),
                    ("polarization", format!("{pol:?}")),
                ];
                let text = report::render_csv(config, &extra, &["y", "z"], &rows);
                let name = format!("ring_{}.csv", if pol == Pol::H { "h" } else { "v" });
                report::write_file(&out.join(&name), &text)?;
                match e {
                    Ok(e) => println!(
                        "ring {pol:?}: semi-axes {:.4} x {:.4} deg, ellipticity {:.4} -> {}",
                        ring.semi_axis_y_deg,
                        ring.semi_axis_z_deg,
                        e,
                        out.join(&name).display()
                    ),
                    Err(_) => println!("ring {pol:?}: degenerate point ring -> {}", out.join(&name).display()),
                }
            }
            Ok(())
        }
        SweepKind::CrossSection(cs) => {
            let filter = FilterSpec {
                center_nm: cs
                    .filter_center
                    .unwrap_or_else(|| pump.degenerate_nm() + 0.07),
                fwhm_nm: cs.filter_fwhm,
                shape: cs.filter_shape.into(),
            };
            let mut scans = vec![
                emission::cross_section_scan(
                    cs.t, &filter, Pol::H, -cs.y_max, cs.y_max, cs.step, &crystal, &pump,
                )?,
                emission::cross_section_scan(
                    cs.t, &filter, Pol::V, -cs.y_max, cs.y_max, cs.step, &crystal, &pump,
                )?,
            ];
            emission::normalize_across(&mut scans);
            for scan in &scans {
                let rows: Vec<Vec<f64>> =
                    scan.points.iter().map(|&(y, v)| vec![y, v]).collect();
                let extra = [
                    ("units", "deg,relative".to_string()),
                    ("T_degC", format!("{}", cs.t)),
                    ("filter_center_nm", format!("{}", filter.center_nm)),
                    ("filter_fwhm_nm", format!("{}", filter.fwhm_nm)),
                    ("polarization", format!("{:?}", scan.pol)),
                ];
                let text = report::render_csv(config, &extra, &["y", "intensity"], &rows);
                let name = format!(
                    "cross_section_{}.csv",
                    if scan.pol == Pol::H { "h" } else { "v" }
                );
                report::write_file(&out.join(&name), &text)?;
                println!(
                    "cross-section {:?}: peak at {:.3} deg -> {}",
                    scan.pol,
                    scan.peak_angle().unwrap_or(0.0),
                    out.join(&name).display()
                );
            }
            Ok(())
        }
        SweepKind::Hom(h) => {
            let lambda_a = h.lambda_a.unwrap_or_else(|| pump.degenerate_nm());
            let lambda_b = h.lambda_b.unwrap_or_else(|| pump.degenerate_nm());
            let trace = twophoton::hom_scan(
                h.phi,
                lambda_a,
                lambda_b,
                h.fwhm,
                h.lp_a,
                h.lp_b,
                -h.tau_max,
                h.tau_max,
                h.tau_step,
                h.envelope.into(),
            );
            let rows: Vec<Vec<f64>> = trace.iter().map(|&(t, p)| vec![t, p]).collect();
            let extra = [
                ("units", "fs,probability".to_string()),
                ("phi_rad", format!("{}", h.phi)),
                ("lambda_a_nm", format!("{lambda_a}")),
                ("lambda_b_nm", format!("{lambda_b}")),
            ];
            let text = report::render_csv(config, &extra, &["tau", "probability"], &rows);
            report::write_file(&out.join("hom.csv"), &text)?;
            let min = trace.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let max = trace.iter().map(|p| p.1).fold(0.0f64, f64::max);
            let vis = if max + min > 0.0 {
                (max - min) / (max + min)
            } else {
                0.0
            };
            println!(
                "hom: min = {min:.4}, max = {max:.4}, visibility = {vis:.4} -> {}",
                out.join("hom.csv").display()
            );
            Ok(())
        }
        SweepKind::Stability(s) => {
            let mut rows = Vec::new();
            let steps = 100usize;
            for i in 0..=steps {
                let d = s.delta_lambda * i as f64 / steps as f64;
                let p = rates::phase_fluctuation(d, pump.lambda_nm, s.m, s.dl)?;
                rows.push(vec![d, p.delta_phi_rad, p.fraction_of_two_pi]);
            }
            let extra = [
                ("units", "nm,rad,dimensionless".to_string()),
                ("m", format!("{}", s.m)),
                ("delta_l_um", format!("{}", s.dl)),
            ];
            let text = report::render_csv(
                config,
                &extra,
                &["delta_lambda", "delta_phi", "fraction_of_two_pi"],
                &rows,
            );
            report::write_file(&out.join("stability.csv"), &text)?;
            let p = rates::phase_fluctuation(s.delta_lambda, pump.lambda_nm, s.m, s.dl)?;
            println!(
                "stability: delta_phi = {:.4} rad = {:.4} x 2pi at delta_lambda = {} nm -> {}",
                p.delta_phi_rad,
                p.fraction_of_two_pi,
                s.delta_lambda,
                out.join("stability.csv").display()
            );
            Ok(())
        }
    }
}

fn temp_grid(r: &TempRangeArgs) -> Vec<f64> {
    let mut temps = Vec::new();
    let mut t = r.t_min;
    while t <= r.t_max + 1e-9 {
        temps.push(t);
        t += r.t_step;
    }
    temps
}

fn cmd_tomo(config: &RunConfig, _registry: &SetRegistry, args: &TomoArgs) -> Result<(), Error> {
    let record = match (&args.input, args.simulate) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            TomographyRecord::from_csv_str(&text)?
        }
        (None, Some(state)) => {
            let rho = match state {
                SimState::Bell => twophoton::bell_phi(args.phi),
                SimState::Werner => twophoton::werner(args.p),
            };
            let noise = match args.noise {
                NoiseArg::None => NoiseModel::None,
                NoiseArg::Poisson => NoiseModel::Poisson,
            };
            tomography::simulate_counts(&rho, args.n, noise, config.output.seed)?
        }
        _ => {
            return Err(Error::Config(
                "tomo needs exactly one of --input FILE or --simulate STATE".into(),
            ))
        }
    };
    let options = MleOptions {
        likelihood: match args.likelihood {
            LikelihoodArg::Gaussian => tomography::Likelihood::Gaussian,
            LikelihoodArg::Poisson => tomography::Likelihood::Poisson,
        },
        seed: config.output.seed,
        ..Default::default()
    };
    let rho = tomography::mle_reconstruct(&record, &options)?;
    let concurrence = tomography::concurrence(&rho)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = Vector4::new(
        Complex64::new(r, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(r, 0.0),
    );
    let fidelity = tomography::fidelity(&rho, &phi_plus)?;
    let purity = tomography::purity(&rho);

    let out = &config.output.dir;
    let rho_json = serde_json::json!({
        "config_hash": config.hash(),
        "config_json": config.to_canonical_json(),
        "density_matrix": DensityMatrixJson::from_matrix(&rho),
        "metrics": {
            "concurrence": concurrence,
            "fidelity_phi_plus": fidelity,
            "purity": purity,
        },
    });
    let text = serde_json::to_string_pretty(&rho_json).expect("serializable report");
    report::write_file(&out.join("tomography.json"), &text)?;
    let counts_text = record.to_csv_string();
    report::write_file(&out.join("tomography_counts.csv"), &counts_text)?;
    println!(
        "tomo: concurrence = {concurrence:.4}, fidelity(Phi+) = {fidelity:.4}, purity = {purity:.4} -> {}",
        out.join("tomography.json").display()
    );
    Ok(())
}
