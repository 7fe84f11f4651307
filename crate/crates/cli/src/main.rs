use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ersim::analysis::{
    fit_exponential, fit_gaussian, fit_lorentzian, histogram_arrivals, pulsed_g2, purcell_report,
    spectral_diffusion_map, FitModel, FitResult,
};
use ersim::engine::{Engine, ExperimentConfig};
use ersim::io::{
    parse_config, read_clickstream, read_correlation_csv, read_fit_csv, read_histogram_csv,
    read_spectra_csv, write_clickstream, write_correlation_csv, write_fit_csv, write_histogram_csv,
    write_scans_csv, write_spectrum_csv, ConfigDocument, Summary,
};
use ersim::physics::radiative_linewidth;
use ersim::{Error, Execution};

#[derive(Parser)]
#[command(name = "ersim", version, about = "Simulate and analyse pulsed single-ion photon counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo and write click streams, histograms or spectra.
    Simulate {
        kind: SimKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the master seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Arrival-histogram bin width for lifetime runs (ns). Defaults to
        /// 1/256 of the collection window.
        #[arg(long)]
        bin_width_ns: Option<u64>,
        /// Run on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Fit a spectrum or an arrival histogram.
    Fit {
        model: ModelArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pulsed autocorrelation of a click-stream file.
    G2 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        max_offset: usize,
        /// Signal fraction used for the background-corrected column.
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long)]
        out: PathBuf,
        /// Shot count of the run. Defaults to one past the last recorded shot.
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Collect fit and correlation tables under a directory into a summary.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SimKind {
    Ple,
    Lifetime,
    G2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lorentzian,
    Gaussian,
    Exponential,
}

const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_FORMAT: u8 = 5;
const EXIT_NOT_CONVERGED: u8 = 6;
const EXIT_ANALYSIS: u8 = 7;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Format(_) | Error::Csv(_) => EXIT_FORMAT,
        Error::NotConverged(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_ANALYSIS,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            kind,
            config,
            out,
            seed,
            bin_width_ns,
            serial,
        } => simulate(kind, &config, &out, seed, bin_width_ns, serial),
        Command::Fit { model, input, out } => fit(model, &input, &out),
        Command::G2 {
            input,
            max_offset,
            rho,
            out,
            shots,
        } => g2(&input, max_offset, rho, &out, shots),
        Command::Report { input, out } => report(&input, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ersim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| io_context(e, path))
}

fn io_context(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<fs::File, Error> {
    fs::File::create(path).map_err(|e| io_context(e, path))
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<(ConfigDocument, ExperimentConfig), Error> {
    let text = read_text(path)?;
    let mut config = parse_config(&text)?;
    let mut doc = ConfigDocument::from_toml(&text)?;
    if let Some(s) = seed {
        config.master_seed = s;
        doc.seed.master_seed = s;
    }
    Ok((doc, config))
}

fn simulate(
    kind: SimKind,
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    bin_width_ns: Option<u64>,
    serial: bool,
) -> Result<(), Error> {
    let (doc, config) = load_config(config_path, seed)?;
    fs::create_dir_all(out).map_err(|e| io_context(e, out))?;
    let resolved = out.join("config.toml");
    fs::write(&resolved, doc.to_toml()?).map_err(|e| io_context(e, &resolved))?;

    let engine = Engine::new(if serial { Execution::Serial } else { Execution::Parallel });
    let mut summary = Summary::new();
    summary
        .text("config_digest", config.digest())
        .text("master_seed", config.master_seed.to_string())
        .integer("n_shots", config.sequence.n_shots() as i64);

    match kind {
        SimKind::Lifetime | SimKind::G2 => {
            let stream = match kind {
                SimKind::Lifetime => engine.run_lifetime(&config)?,
                _ => engine.run_g2(&config)?,
            };
            let path = out.join("stream.ertt");
            write_clickstream(&stream, &path)?;
            summary.integer("clicks", stream.len() as i64);
            if let SimKind::Lifetime = kind {
                let width_ns = bin_width_ns.unwrap_or((config.sequence.t_coll_ns() / 256).max(1));
                let hist = histogram_arrivals(&stream, width_ns as f64 * 1e-9)?;
                write_histogram_csv(create(&out.join("histogram.csv"))?, &hist)?;
                summary.number("bin_width_s", hist.bin_width());
            }
        }
        SimKind::Ple => {
            let scan = engine.run_ple_scan(&config)?;
            let spectra = scan.spectra()?;
            let reference = config
                .emitters
                .first()
                .map_or(config.cavity.nu_cav, |e| e.nu_ion_0);
            write_scans_csv(create(&out.join("scans.csv"))?, &spectra, reference)?;
            let total: u64 = scan
                .repetitions
                .iter()
                .flat_map(|r| r.points.iter().map(|p| p.counts))
                .sum();
            summary
                .integer("clicks", total as i64)
                .integer("scans", spectra.len() as i64);
            if spectra.len() > 1 {
                let map = spectral_diffusion_map(&spectra)?;
                write_spectrum_csv(create(&out.join("spectrum.csv"))?, &map.averaged, reference)?;
            } else {
                write_spectrum_csv(create(&out.join("spectrum.csv"))?, &spectra[0], reference)?;
            }
        }
    }
    let path = out.join("simulate.toml");
    fs::write(&path, summary.render()).map_err(|e| io_context(e, &path))?;
    Ok(())
}

fn fit(model: ModelArg, input: &Path, out: &Path) -> Result<(), Error> {
    let file = fs::File::open(input).map_err(|e| io_context(e, input))?;
    let mut rows: Vec<(String, FitResult)> = Vec::new();
    // the fit whose convergence decides the exit status
    let primary: FitResult;
    match model {
        ModelArg::Exponential => {
            let hist = read_histogram_csv(file)?;
            primary = fit_exponential(&hist)?;
            rows.push(("histogram".into(), primary.clone()));
        }
        ModelArg::Lorentzian | ModelArg::Gaussian => {
            let spectra = read_spectra_csv(file)?;
            let fitter = match model {
                ModelArg::Lorentzian => fit_lorentzian,
                _ => fit_gaussian,
            };
            if spectra.len() == 1 {
                primary = fitter(&spectra[0])?;
                rows.push(("spectrum".into(), primary.clone()));
            } else {
                for (i, s) in spectra.iter().enumerate() {
                    match fitter(s) {
                        Ok(f) => rows.push((format!("scan_{i}"), f)),
                        Err(e) => eprintln!("ersim: scan {i} not fitted: {e}"),
                    }
                }
                let map = spectral_diffusion_map(&spectra)?;
                primary = match model {
                    ModelArg::Lorentzian => fit_lorentzian(&map.averaged)?,
                    _ => map.averaged_fit,
                };
                rows.push(("averaged".into(), primary.clone()));
            }
        }
    }
    write_fit_csv(create(out)?, &rows)?;
    if !primary.converged() {
        return Err(Error::NotConverged(format!(
            "{} fit ended with status {}",
            primary.model.name(),
            primary.status.name()
        )));
    }
    Ok(())
}

fn g2(input: &Path, max_offset: usize, rho: f64, out: &Path, shots: Option<u64>) -> Result<(), Error> {
    let mut stream = read_clickstream(input)?;
    if let Some(n) = shots {
        stream.sequence = stream.sequence.with_shots(n)?;
        stream.validate(0)?;
    }
    let hist = pulsed_g2(&stream, max_offset)?;
    if hist.is_empty() {
        return Err(Error::InsufficientData("too few clicks to normalize g2".into()));
    }
    write_correlation_csv(create(out)?, &hist, rho)
}

/// All files under `dir` with extension `csv`, in sorted order.
fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut found = Vec::new();
    let mut pending = vec![dir.to_path_buf()];
    while let Some(d) = pending.pop() {
        for entry in fs::read_dir(&d).map_err(|e| io_context(e, &d))? {
            let path = entry?.path();
            if path.is_dir() {
                pending.push(path);
            } else if path.extension().is_some_and(|x| x == "csv") {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

fn report(input: &Path, out: &Path) -> Result<(), Error> {
    let mut lifetimes: Vec<FitResult> = Vec::new();
    let mut single_scans: Vec<f64> = Vec::new();
    let mut averaged: Option<f64> = None;
    let mut cavity: Option<FitResult> = None;
    let mut g2_zero: Option<(f64, f64)> = None;
    let mut summary = Summary::new();

    for path in csv_files(input)? {
        let header = read_text(&path)?.lines().next().unwrap_or("").to_string();
        if header.starts_with("label,model,") {
            let file = fs::File::open(&path).map_err(|e| io_context(e, &path))?;
            for (label, f) in read_fit_csv(file)? {
                if !f.converged() {
                    continue;
                }
                match f.model {
                    FitModel::Exponential => lifetimes.push(f),
                    FitModel::Gaussian if label == "averaged" => averaged = Some(f.value("fwhm")),
                    FitModel::Gaussian => single_scans.push(f.value("fwhm")),
                    FitModel::Lorentzian => cavity = Some(f),
                }
            }
        } else if header.starts_with("offset_shots,") {
            let file = fs::File::open(&path).map_err(|e| io_context(e, &path))?;
            if let Some(r) = read_correlation_csv(file)?.into_iter().find(|r| r.offset == 0) {
                g2_zero = Some((r.g2, r.g2_corrected));
            }
        }
    }

    lifetimes.sort_by(|a, b| a.value("t1").total_cmp(&b.value("t1")));
    if let (Some(short), Some(long)) = (lifetimes.first(), lifetimes.last()) {
        summary.number("t1_enhanced_s", short.value("t1"));
        if let Some(s) = short.sigma("t1") {
            summary.number("t1_enhanced_sigma_s", s);
        }
        if lifetimes.len() >= 2 {
            summary.number("t1_reference_s", long.value("t1"));
            if let Some(s) = long.sigma("t1") {
                summary.number("t1_reference_sigma_s", s);
            }
            let p = purcell_report(short, long)?;
            summary
                .number("purcell_factor", p.purcell_factor)
                .number("purcell_factor_sigma", p.sigma);
        }
        summary.number("radiative_linewidth_hz", radiative_linewidth(short.value("t1"))?);
    }
    if !single_scans.is_empty() {
        let mean = single_scans.iter().sum::<f64>() / single_scans.len() as f64;
        summary
            .number("linewidth_single_scan_mean_hz", mean)
            .integer("linewidth_scans", single_scans.len() as i64);
    }
    if let Some(w) = averaged {
        summary.number("linewidth_averaged_hz", w);
    }
    if let Some(c) = &cavity {
        summary
            .number("cavity_fwhm_hz", c.value("fwhm"))
            .number("cavity_q_factor", c.value("q_factor"));
    }
    if let Some((raw, corrected)) = g2_zero {
        summary.number("g2_zero", raw).number("g2_zero_corrected", corrected);
    }
    if summary.entries().is_empty() {
        return Err(Error::InsufficientData(format!(
            "no fit or correlation tables under {}",
            input.display()
        )));
    }
    fs::create_dir_all(out).map_err(|e| io_context(e, out))?;
    let path = out.join("summary.toml");
    fs::write(&path, summary.render()).map_err(|e| io_context(e, &path))?;
    Ok(())
}
