//! `cdisp`: spectra, saturation scans, Kerr fits, analytic Lambda-scheme
//! reports, group-velocity arithmetic and oracle validation from JSON run
//! configurations.  All emitted files embed the resolved configuration.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use coherent_dispersion::config::{load_config, Resolved};
use coherent_dispersion::lambda_analytic::{
    dispersion_at_zero, extrema_offsets, n_lambda, optimal_rabi_squared,
    LambdaParams,
};
use coherent_dispersion::optics::{
    dispersion_report, group_velocity, Spectrum, C_LIGHT,
};
use coherent_dispersion::probe_response::linear_response;
use coherent_dispersion::steady_state::solve_steady_state;
use coherent_dispersion::sweeps::{intensity_scan, saturation_scan, spectrum_scan};
use coherent_dispersion::system::{
    build_generator, DriveField, LevelScheme, Polarization, ProbeField,
};
use coherent_dispersion::timedomain::{chi_by_integration, IntegrationConfig};
use coherent_dispersion::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cdisp",
    version,
    about = "Probe dispersion of coherently driven degenerate transitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe offset spectrum (CSV + JSON sidecar).
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Center dispersion D(0) against the saturation parameter.
    Saturation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Refractive index against drive intensity with a linear Kerr fit.
    Kerr {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Closed-form Lambda-scheme dispersion report.
    Analytic {
        /// `gamma / Gamma` ratio.
        #[arg(long)]
        gamma_ratio: f64,
        /// Drive `Omega^2` in `Gamma^2`; defaults to the optimum.
        #[arg(long)]
        rabi_squared: Option<f64>,
        /// Print the optimal saturation parameter.
        #[arg(long)]
        report_optimum: bool,
        /// Atomic density, 1/m^3.
        #[arg(long, default_value_t = 1e16)]
        density: f64,
        /// Optional CSV path for the n(delta) curve.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group velocity from explicit values or from a spectrum JSON file.
    Groupvelocity {
        /// Spectrum JSON (as emitted by `spectrum`); exclusive with --n/--d.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        cell_length_cm: f64,
        /// Refractive index at line center.
        #[arg(long)]
        n: Option<f64>,
        /// Dispersion dn/dnu, 1/Hz.
        #[arg(long)]
        d_per_hz: Option<f64>,
        #[arg(long, default_value_t = 780.24)]
        wavelength_nm: f64,
    },
    /// Time-domain oracle against the resolvent solver; exit 0 on agreement.
    Validate {
        /// Only the fast F_g=1 -> F_e=0 points.
        #[arg(long)]
        quick: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Spectrum { config, out, workers } => {
            let resolved = load_config(&config)?.resolve()?;
            cmd_spectrum(&resolved, &out, workers.or(resolved.workers))
        }
        Command::Saturation { config, out, workers } => {
            let resolved = load_config(&config)?.resolve()?;
            cmd_saturation(&resolved, &out, workers.or(resolved.workers))
        }
        Command::Kerr { config, out, workers } => {
            let resolved = load_config(&config)?.resolve()?;
            cmd_kerr(&resolved, &out, workers.or(resolved.workers))
        }
        Command::Analytic {
            gamma_ratio,
            rabi_squared,
            report_optimum,
            density,
            out,
        } => cmd_analytic(gamma_ratio, rabi_squared, report_optimum, density, out.as_deref()),
        Command::Groupvelocity {
            spectrum,
            cell_length_cm,
            n,
            d_per_hz,
            wavelength_nm,
        } => cmd_groupvelocity(
            spectrum.as_deref(),
            cell_length_cm / 100.0,
            n,
            d_per_hz,
            wavelength_nm * 1e-9,
        ),
        Command::Validate { quick } => cmd_validate(quick),
    }
}

fn in_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("worker pool: {e}")))?
            .install(f),
        _ => f(),
    }
}

fn writer(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_sidecar(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    let w = writer(dir, name)?;
    serde_json::to_writer_pretty(w, value)
        .map_err(|e| Error::config(format!("serializing {name}: {e}")))
}

fn cmd_spectrum(resolved: &Resolved, out: &Path, workers: Option<usize>) -> Result<()> {
    let spectrum =
        in_pool(workers, || spectrum_scan(&resolved.plan, &resolved.spectrum_grid))?;
    spectrum.write_csv(writer(out, "spectrum.csv")?)?;
    let report = match dispersion_report(&spectrum, resolved.cell_length) {
        Ok(r) => Some(r),
        Err(e) => {
            eprintln!("warning: no dispersion report: {e}");
            None
        }
    };
    write_sidecar(
        out,
        "spectrum.json",
        &serde_json::json!({
            "resolved": resolved.summary,
            "metadata": spectrum.metadata,
            "report": report,
        }),
    )?;
    if let Some(r) = &report {
        println!(
            "D(0) = {:.6e} 1/Hz ({}), V_g = {:?}",
            r.d0_per_hz,
            if r.d0_per_hz < 0.0 { "anomalous" } else { "normal" },
            r.group_velocity
        );
    }
    println!("wrote {}", out.join("spectrum.csv").display());
    Ok(())
}

fn cmd_saturation(resolved: &Resolved, out: &Path, workers: Option<usize>) -> Result<()> {
    let scan =
        in_pool(workers, || saturation_scan(&resolved.plan, &resolved.saturation_grid))?;
    scan.write_csv(writer(out, "saturation.csv")?)?;
    write_sidecar(
        out,
        "saturation.json",
        &serde_json::json!({
            "resolved": resolved.summary,
            "scan": scan,
        }),
    )?;
    let anomalous = scan.points.iter().filter(|p| p.anomalous).count();
    println!(
        "{} of {} grid points anomalous (D(0) < 0); wrote {}",
        anomalous,
        scan.points.len(),
        out.join("saturation.csv").display()
    );
    Ok(())
}

fn cmd_kerr(resolved: &Resolved, out: &Path, workers: Option<usize>) -> Result<()> {
    let scan = in_pool(workers, || {
        intensity_scan(&resolved.plan, &resolved.intensity_grid, resolved.delta_eval)
    })?;
    scan.write_csv(writer(out, "kerr.csv")?)?;
    write_sidecar(
        out,
        "kerr.json",
        &serde_json::json!({
            "resolved": resolved.summary,
            "scan": scan,
        }),
    )?;
    println!(
        "n2 = {:.6e} cm^2/W (residual {:.2e}); wrote {}",
        scan.fit.n2_cm2_per_w(),
        scan.fit.residual,
        out.join("kerr.csv").display()
    );
    Ok(())
}

fn cmd_analytic(
    gamma_ratio: f64,
    rabi_squared: Option<f64>,
    report_optimum: bool,
    density: f64,
    out: Option<&Path>,
) -> Result<()> {
    let rabi_sq = rabi_squared.unwrap_or(gamma_ratio / 2.0);
    let params = LambdaParams::new(
        rabi_sq.sqrt(),
        gamma_ratio,
        coherent_dispersion::optics::RB_D2_WAVELENGTH,
        density,
    )?;
    if report_optimum {
        let opt = optimal_rabi_squared(&params)?;
        // S = 2 Omega^2 in Gamma units.
        println!("S_opt = {:e}", 2.0 * opt);
    }
    let d0 = dispersion_at_zero(&params);
    let (lo, hi) = extrema_offsets(&params)?;
    println!(
        "Omega^2 = {rabi_sq:e} Gamma^2: dn/ddelta(0) = {d0:.6e} /Gamma, \
         extrema at delta = {lo:.4e}, {hi:.4e} Gamma"
    );
    if let Some(path) = out {
        let dir = path.parent().unwrap_or(Path::new("."));
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::config("analytic: bad output path"))?;
        let mut w = writer(dir, name)?;
        use std::io::Write;
        writeln!(w, "delta_gamma,n_minus_1")?;
        let span = 3.0 * hi;
        let npts = 1001;
        for k in 0..npts {
            let delta = -span + 2.0 * span * k as f64 / (npts - 1) as f64;
            writeln!(w, "{},{}", delta, n_lambda(&params, delta) - 1.0)?;
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_groupvelocity(
    spectrum: Option<&Path>,
    cell_length: f64,
    n: Option<f64>,
    d_per_hz: Option<f64>,
    wavelength: f64,
) -> Result<()> {
    match (spectrum, n, d_per_hz) {
        (Some(path), None, None) => {
            let text = std::fs::read_to_string(path)?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
            // Accept either a bare Spectrum or a `spectrum` sidecar without
            // points (which is not enough).
            let spectrum: Spectrum = serde_json::from_value(value)
                .map_err(|e| {
                    Error::config(format!(
                        "{}: not a spectrum file: {e}",
                        path.display()
                    ))
                })?;
            let report = dispersion_report(&spectrum, cell_length)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        (None, Some(n), Some(d)) => {
            let nu = C_LIGHT / wavelength;
            let vg = group_velocity(n, nu, d)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "n": n,
                    "nu_hz": nu,
                    "d_per_hz": d,
                    "group_velocity": vg,
                }))
                .unwrap()
            );
            Ok(())
        }
        _ => Err(Error::config(
            "groupvelocity: give either --spectrum or both --n and --d-per-hz",
        )),
    }
}

fn cmd_validate(quick: bool) -> Result<()> {
    let gamma = 0.05;
    let density = 1e15;
    let mut cases: Vec<(&str, LevelScheme, f64, f64)> = vec![
        ("Fg1-Fe0", LevelScheme::rb_d2_fg1_fe0(gamma)?, 0.5, 0.0),
        ("Fg1-Fe0", LevelScheme::rb_d2_fg1_fe0(gamma)?, 0.5, 0.3 * gamma),
        ("Fg1-Fe0", LevelScheme::rb_d2_fg1_fe0(gamma)?, 0.1, -3.0 * gamma),
    ];
    if !quick {
        cases.push((
            "Fg2-Fe3",
            LevelScheme::rb_d2_fg2_fe3(gamma)?,
            0.5,
            0.3 * gamma,
        ));
        cases.push(("Fg2-Fe3", LevelScheme::rb_d2_fg2_fe3(gamma)?, 0.5, 0.0));
    }
    let config = IntegrationConfig::default();
    let results: Result<Vec<(String, f64)>> = cases
        .par_iter()
        .map(|(label, scheme, s, delta)| {
            let drive =
                DriveField::from_saturation(*s, 0.0, Polarization::pi())?;
            let probe = ProbeField::new(
                1e-4,
                *delta,
                Polarization::linear_orthogonal(),
            )?;
            let liouv = build_generator(scheme, &drive)?;
            let rho0 = solve_steady_state(&liouv)?;
            let floquet =
                linear_response(&liouv, &rho0, scheme, &probe, density)?.chi;
            let oracle =
                chi_by_integration(scheme, &drive, &probe, density, &config)?;
            let rel = (floquet - oracle).norm() / floquet.norm();
            Ok((
                format!(
                    "{label} S={s} delta={delta:+.3}: floquet={floquet:.6e} \
                     oracle={oracle:.6e} rel={rel:.2e}"
                ),
                rel,
            ))
        })
        .collect();
    let results = results?;
    let mut worst: f64 = 0.0;
    for (line, rel) in &results {
        println!("{line}");
        worst = worst.max(*rel);
    }
    if worst > 1e-6 {
        return Err(Error::numerical(format!(
            "oracle disagreement: worst relative deviation {worst:.2e} > 1e-6"
        )));
    }
    println!("all {} comparisons within 1e-6", results.len());
    Ok(())
}
