//! Command-line driver: `analyze` a single instance, `sweep-r` over a
//! coupling grid, or `rook-table` over a family of Rook's-graph sizes.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use ctqw_search::config::{RookTableConfig, RunConfig};
use ctqw_search::experiments::{
    analyze_instance, fit_loglog, hitting_bracket, hitting_time_exact, rook_size_sweep, sweep_r,
    ExperimentRecord, ExponentFit, RookSweepPoint,
};
use ctqw_search::graph::{build_graph, edge_list, Normalization};
use ctqw_search::predictor::{classify_optimality, cost_model, CostReport, OptimalityClass};
use ctqw_search::rank_one::amplitude_curve;
use ctqw_search::report::{curve_csv, r_sweep_csv, rook_table_csv, to_json};
use ctqw_search::spectra::GroupedSpectrum;
use ctqw_search::{Error, Result, DENSE_CAP};

#[derive(Parser)]
#[command(
    name = "ctqw-search",
    version,
    about = "Spectral predictor and exact dynamics for quantum-walk spatial search"
)]
struct Cli {
    /// path to the JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory (created if missing)
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// seed for randomized choices (random initial state)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// worker threads; when absent, RAYON_NUM_THREADS or the core count applies
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict and measure the critical-point dynamics of one instance
    Analyze,
    /// Scan couplings around the critical point (requires `r_grid` in the config)
    SweepR,
    /// Scan Rook's-graph sizes and fit scaling exponents (requires `rook_table`)
    RookTable,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be nonzero".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = RunConfig::from_json(&text)?;
    fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Analyze => cmd_analyze(cli, &cfg),
        Command::SweepR => cmd_sweep_r(cli, &cfg),
        Command::RookTable => cmd_rook_table(cli, &cfg),
    }
}

#[derive(Serialize)]
struct HittingSummary {
    exact: f64,
    lower: f64,
    upper: f64,
    in_bracket: bool,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    normalization: Normalization,
    spectrum: &'a GroupedSpectrum,
    #[serde(flatten)]
    record: &'a ExperimentRecord,
    optimality: OptimalityClass,
    cost: CostReport,
    hitting_time: Option<HittingSummary>,
}

fn cmd_analyze(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let marked = cfg.marked.unwrap_or(0);
    let opts = cfg.instance_options(cli.seed);
    let (record, gs, ss) = analyze_instance(&cfg.graph, marked, &opts, &cfg.predictor)?;
    let optimality = classify_optimality(&record.prediction, &record.s_params, &cfg.predictor);
    let sp = &record.s_params;
    let cost = cost_model(
        record.prediction.nu_pred,
        record.prediction.t_pred,
        sp.epsilon,
        sp.gap,
        cfg.costs,
    );

    let hitting_time = if cfg.graph.node_count() <= DENSE_CAP {
        let adj = build_graph(&cfg.graph)?;
        let exact = hitting_time_exact(&adj, marked)?;
        let (lower, upper) = hitting_bracket(&adj, marked)?;
        Some(HittingSummary {
            exact,
            lower,
            upper,
            in_bracket: lower <= exact && exact <= upper,
        })
    } else {
        None
    };

    let report = AnalyzeReport {
        normalization: cfg
            .normalization
            .unwrap_or_else(|| cfg.graph.default_normalization()),
        spectrum: &gs,
        record: &record,
        optimality,
        cost,
        hitting_time,
    };
    let json_path = cli.out.join("analyze.json");
    fs::write(&json_path, to_json(&report)?)?;
    println!("wrote {}", json_path.display());

    if cfg.curve_points > 0 {
        let horizon = 2.0 * record.prediction.t_pred;
        let times: Vec<f64> = (0..cfg.curve_points)
            .map(|i| horizon * i as f64 / (cfg.curve_points - 1).max(1) as f64)
            .collect();
        let curve = amplitude_curve(&ss, sp.epsilon, &times);
        let curve_path = cli.out.join("curve.csv");
        fs::write(&curve_path, curve_csv(&curve))?;
        println!("wrote {}", curve_path.display());
    }

    if cfg.export_edges {
        if cfg.graph.node_count() > DENSE_CAP {
            return Err(Error::DenseCap {
                n: cfg.graph.node_count(),
                cap: DENSE_CAP,
            });
        }
        let adj = build_graph(&cfg.graph)?;
        let edges_path = cli.out.join("edges.txt");
        fs::write(&edges_path, edge_list(&adj))?;
        println!("wrote {}", edges_path.display());
    }
    Ok(())
}

fn cmd_sweep_r(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let grid_cfg = cfg
        .r_grid
        .as_ref()
        .ok_or_else(|| Error::Config("sweep-r requires an `r_grid` section".into()))?;
    let marked = cfg.marked.unwrap_or(0);
    let opts = cfg.instance_options(cli.seed);
    let (record, gs, _) = analyze_instance(&cfg.graph, marked, &opts, &cfg.predictor)?;
    let sp = &record.s_params;

    let grid: Vec<f64> = if grid_cfg.points == 1 {
        vec![sp.s1 * grid_cfg.min_factor]
    } else {
        (0..grid_cfg.points)
            .map(|i| {
                let f = grid_cfg.min_factor
                    + (grid_cfg.max_factor - grid_cfg.min_factor) * i as f64
                        / (grid_cfg.points - 1) as f64;
                sp.s1 * f
            })
            .collect()
    };
    let points = sweep_r(&gs, sp, &grid, grid_cfg.horizon_multiple, &cfg.predictor)?;
    let csv_path = cli.out.join("sweep_r.csv");
    fs::write(&csv_path, r_sweep_csv(&points))?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

#[derive(Serialize)]
struct RookFitReport {
    sigma: f64,
    column_subspace: bool,
    achieved_sigma_mean: f64,
    time_fit: ExponentFit,
    amplitude_fit: ExponentFit,
    expected_time_slope: Option<f64>,
    expected_amplitude_slope: Option<f64>,
}

/// Asymptotic exponents of peak time and peak amplitude in total size n for
/// aspect exponent sigma; none when the spectral condition fails (sigma
/// below 1/4 without the excluded-subspace coupling).
fn expected_slopes(sigma: f64, column_subspace: bool) -> (Option<f64>, Option<f64>) {
    if column_subspace || sigma >= 1.0 / 3.0 {
        (Some(0.5), Some(0.0))
    } else if sigma >= 0.25 {
        (Some(1.0 - 1.5 * sigma), Some(-(1.0 - 3.0 * sigma) / 2.0))
    } else {
        (None, None)
    }
}

fn fit_scan(
    sigma: f64,
    column_subspace: bool,
    table: &RookTableConfig,
    rows: &mut Vec<(f64, bool, RookSweepPoint)>,
) -> Result<RookFitReport> {
    let points = rook_size_sweep(sigma, &table.log2_sizes, column_subspace)?;
    let sizes: Vec<usize> = points.iter().map(|p| p.n).collect();
    let times: Vec<f64> = points.iter().map(|p| p.peak_time).collect();
    let amps: Vec<f64> = points.iter().map(|p| p.peak_abs).collect();
    let time_fit = fit_loglog(&sizes, &times)?;
    let amplitude_fit = fit_loglog(&sizes, &amps)?;
    let achieved_sigma_mean =
        points.iter().map(|p| p.achieved_sigma).sum::<f64>() / points.len() as f64;
    let (expected_time_slope, expected_amplitude_slope) =
        expected_slopes(achieved_sigma_mean, column_subspace);
    for p in points {
        rows.push((sigma, column_subspace, p));
    }
    Ok(RookFitReport {
        sigma,
        column_subspace,
        achieved_sigma_mean,
        time_fit,
        amplitude_fit,
        expected_time_slope,
        expected_amplitude_slope,
    })
}

fn cmd_rook_table(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let table = cfg
        .rook_table
        .as_ref()
        .ok_or_else(|| Error::Config("rook-table requires a `rook_table` section".into()))?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &sigma in &table.sigmas {
        fits.push(fit_scan(sigma, false, table, &mut rows)?);
    }
    if table.include_column_subspace {
        fits.push(fit_scan(0.0, true, table, &mut rows)?);
    }
    let csv_path = cli.out.join("rook_table.csv");
    fs::write(&csv_path, rook_table_csv(&rows))?;
    println!("wrote {}", csv_path.display());
    let json_path = cli.out.join("rook_table_fits.json");
    fs::write(&json_path, to_json(&fits)?)?;
    println!("wrote {}", json_path.display());
    Ok(())
}
