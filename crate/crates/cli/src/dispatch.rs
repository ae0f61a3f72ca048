//! Experiment dispatch: builds the configured domain or family, runs the
//! named experiment, and writes report.json, rows.csv, and plot-data
//! files. Timestamps live in metadata.json so report.json stays
//! byte-identical across reruns of the same configuration.

use crate::config::{Experiment, OutputFormat, RunConfig};
use fraceig::eigen::principal_eigenpair;
use fraceig::experiments::{self, DomainFamily, ExperimentReport, FamilySpec, McSettings, Verdict};
use fraceig::fraclap::{assemble, write_matrix_market, Potential};
use fraceig::geometry::Domain;
use fraceig::{Error, Result};
use std::path::{Path, PathBuf};

/// Unit-area disk: the default single-domain target.
const INV_SQRT_PI: f64 = 0.5641895835477563;

pub struct DispatchOutcome {
    pub verdict: Verdict,
    pub files: Vec<PathBuf>,
}

fn default_domain(cfg: &RunConfig) -> Result<Domain> {
    match &cfg.domain {
        Some(json) => Domain::from_json(json),
        None => Domain::ball(2, [0.0; 3], INV_SQRT_PI, cfg.h),
    }
}

fn family(cfg: &RunConfig) -> Result<DomainFamily> {
    DomainFamily::build(FamilySpec::parse(&cfg.family)?, cfg.h)
}

/// Run the configured experiment and write its outputs into `out_dir`.
pub fn dispatch(cfg: &RunConfig, out_dir: &Path) -> Result<DispatchOutcome> {
    let started = std::time::Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let report = run_experiment(cfg);
    match report {
        Ok(report) => {
            let files = write_outputs(cfg, &report, out_dir)?;
            write_metadata(cfg, out_dir, started.elapsed(), None)?;
            Ok(DispatchOutcome { verdict: report.verdict, files })
        }
        Err(err) => {
            // Serialize the failure into report.json so batch pipelines see
            // a machine-readable outcome.
            let payload = serde_json::json!({
                "experiment": cfg.experiment.tag(),
                "error": err.to_string(),
            });
            let path = out_dir.join("report.json");
            std::fs::write(&path, serde_json::to_string_pretty(&payload)?)?;
            write_metadata(cfg, out_dir, started.elapsed(), Some(&err))?;
            Err(err)
        }
    }
}

fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    let tol = cfg.tol;
    match cfg.experiment {
        Experiment::Thm11 => experiments::run_maximizer_distance(&family(cfg)?, cfg.alpha, tol),
        Experiment::Thm12 => experiments::run_simply_connected(&family(cfg)?, tol),
        Experiment::FaberKrahn => experiments::run_faber_krahn(&family(cfg)?, cfg.alpha, tol),
        Experiment::Chiti => experiments::run_reverse_holder(&family(cfg)?, cfg.alpha, tol),
        Experiment::Cor11 => {
            experiments::run_nonexistence(&default_domain(cfg)?, cfg.alpha, cfg.v_sup, tol)
        }
        Experiment::Barta => {
            let dom = default_domain(cfg)?;
            let op = assemble(&dom, cfg.alpha, Potential::zero(&dom))?;
            let pair = principal_eigenpair(&op, tol)?;
            let trials = experiments::standard_barta_trials(&dom, &pair, cfg.alpha);
            experiments::run_barta(&dom, cfg.alpha, &trials, tol)
        }
        Experiment::Thm13 => {
            experiments::run_fatness(&default_domain(cfg)?, cfg.alpha, cfg.eps, tol)
        }
        Experiment::Obstacle => experiments::run_obstacle(
            &default_domain(cfg)?,
            &experiments::ObstacleShape::Ball { radius: cfg.obstacle_radius },
            cfg.alpha,
            cfg.placement_grid,
            cfg.placement_span,
            tol,
        ),
        Experiment::McCrosscheck => {
            let mc = McSettings { dt: cfg.dt, n_paths: cfg.n, seed: cfg.seed };
            experiments::run_mc_crosscheck(&default_domain(cfg)?, cfg.alpha, &mc, tol)
        }
    }
}

fn write_outputs(
    cfg: &RunConfig,
    report: &ExperimentReport,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    // Single-domain experiments also export the eigenpair itself.
    if !cfg.experiment.takes_family() {
        let dom = default_domain(cfg)?;
        let op = assemble(&dom, cfg.alpha, Potential::zero(&dom))?;
        let pair = principal_eigenpair(&op, cfg.tol)?;
        let path = out_dir.join("eigenpair.json");
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&fraceig::eigen::eigenpair_to_json(&pair))?,
        )?;
        files.push(path);
        let path = out_dir.join("phi.csv");
        let mut buf = Vec::new();
        fraceig::eigen::write_phi_csv(&dom, &pair.phi, &mut buf)?;
        std::fs::write(&path, buf)?;
        files.push(path);
    }
    if matches!(cfg.format, OutputFormat::Json | OutputFormat::Both) {
        let path = out_dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(&report.to_json())?)?;
        files.push(path);
    }
    if matches!(cfg.format, OutputFormat::Csv | OutputFormat::Both) {
        let path = out_dir.join("rows.csv");
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        std::fs::write(&path, buf)?;
        files.push(path);
    }
    for plot in &report.plots {
        let path = out_dir.join(format!("{}.dat", plot.name));
        let mut buf = Vec::new();
        ExperimentReport::write_plot(plot, &mut buf)?;
        std::fs::write(&path, buf)?;
        files.push(path);
    }
    Ok(files)
}

fn write_metadata(
    cfg: &RunConfig,
    out_dir: &Path,
    elapsed: std::time::Duration,
    error: Option<&Error>,
) -> Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "experiment": cfg.experiment.tag(),
        "timestamp_unix": now,
        "duration_ms": elapsed.as_millis() as u64,
        "version": env!("CARGO_PKG_VERSION"),
        "error": error.map(|e| e.to_string()),
    });
    std::fs::write(out_dir.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Assemble the configured operator and dump it in matrix-market format.
pub fn export_operator(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let dom = default_domain(cfg)?;
    let op = assemble(&dom, cfg.alpha, Potential::constant(&dom, cfg.v_sup))?;
    let path = out_dir.join("operator.mtx");
    let mut buf = Vec::new();
    write_matrix_market(&op, &mut buf)?;
    std::fs::write(&path, buf)?;
    Ok(path)
}
