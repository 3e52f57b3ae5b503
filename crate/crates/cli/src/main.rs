use std::collections::BTreeMap;
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use reptile_core::cardinality::{count_tilings_formula, scientific};
use reptile_core::config::RunConfig;
use reptile_core::exact_cover::{build_cover_instance, count_exact_covers_parallel, enumerate_exact_covers, EnumerationLimits};
use reptile_core::geometry::{check_tileability, Clustering, GridSpec, TileFamily};
use reptile_core::io;
use reptile_core::pattern::{cluster_excitations, pattern_metrics, scan_sll_map, Aperture, ClusterWeights, ElementPattern, Mask, PatternMetrics, WeightSet};
use reptile_core::rtam;
use reptile_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_TRUNCATED: u8 = 4;

#[derive(Parser)]
#[command(name = "reptile", version, about = "Rep-tile clustering of planar phased arrays")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Ltromino,
    Square,
}

impl From<Family> for TileFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Ltromino => TileFamily::LTromino,
            Family::Square => TileFamily::Square,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check whether an M x N aperture can be tiled with order-R tiles. Exits 3 when it cannot.
    Tileability {
        rows: usize,
        cols: usize,
        order: u32,
        #[arg(long, value_enum, default_value = "ltromino")]
        family: Family,
    },
    /// Exact number of L-tromino tilings of an M^ x N^ board.
    Count { m_hat: u32, n_hat: u32 },
    /// Enumerate exact covers of an M x N aperture with tiles of the given orders.
    Enumerate {
        rows: usize,
        cols: usize,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        orders: Vec<u32>,
        #[arg(long, value_enum, default_value = "ltromino")]
        family: Family,
        /// Tiles per order, e.g. `2:6,1:8`.
        #[arg(long)]
        composition: Option<String>,
        #[arg(long)]
        max_solutions: Option<u64>,
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Write every solution (sorted placement ids, one per line) to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Byte limit of the dump file.
        #[arg(long, default_value_t = 1 << 30)]
        dump_limit: u64,
    },
    /// Run the iterative clustering synthesis described by a config file.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pattern metrics of a given clustering.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        clustering: PathBuf,
        /// Element excitations to cluster instead of the configured reference.
        #[arg(long)]
        excitations: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sidelobe level over the configured scan cone.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// Clustering to evaluate; the fully populated array when omitted.
        #[arg(long)]
        clustering: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Core(Error),
    Infeasible,
    Truncated,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "error": "workers", "message": e.to_string() }));
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Truncated) => ExitCode::from(EXIT_TRUNCATED),
        Err(Failure::Infeasible) => ExitCode::from(EXIT_INFEASIBLE),
        Err(Failure::Core(e)) => {
            let (kind, code) = classify(&e);
            eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
            ExitCode::from(code)
        }
    }
}

fn classify(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Config { .. } => ("config", EXIT_CONFIG),
        Error::Parameter(_) => ("parameter", EXIT_CONFIG),
        Error::Format { .. } => ("format", EXIT_CONFIG),
        Error::Io(_) => ("io", EXIT_CONFIG),
        Error::InvalidClustering(_) => ("clustering", EXIT_CONFIG),
        Error::NotTileable { .. } => ("not_tileable", EXIT_INFEASIBLE),
        Error::CannotSplit(_) | Error::NoSplittableTile => ("split", EXIT_INFEASIBLE),
        Error::ZeroPattern => ("zero_pattern", 1),
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Tileability { rows, cols, order, family } => tileability(rows, cols, order, family.into()),
        Command::Count { m_hat, n_hat } => {
            let n = count_tilings_formula(m_hat, n_hat)?;
            println!("{n}");
            println!("{}", scientific(&n, 3));
            Ok(())
        }
        Command::Enumerate {
            rows,
            cols,
            orders,
            family,
            composition,
            max_solutions,
            max_nodes,
            dump,
            dump_limit,
        } => {
            let limits = EnumerationLimits {
                max_solutions,
                max_nodes,
                composition: composition.as_deref().map(parse_composition).transpose()?,
            };
            enumerate(GridSpec::half_wave(rows, cols)?, family.into(), &orders, &limits, dump.as_deref(), dump_limit)
        }
        Command::Synthesize { config, out } => synthesize(&config, out),
        Command::Evaluate {
            config,
            clustering,
            excitations,
            out,
        } => evaluate(&config, &clustering, excitations.as_deref(), out),
        Command::Scan { config, clustering, out } => scan(&config, clustering.as_deref(), out),
    }
}

fn tileability(rows: usize, cols: usize, order: u32, family: TileFamily) -> CmdResult {
    let grid = GridSpec::half_wave(rows, cols)?;
    let verdict = check_tileability(&grid, order, family)?;
    let report = json!({
        "rows": rows,
        "cols": cols,
        "order": order,
        "tileable": verdict.tileable,
        "reason": verdict.reason,
    });
    println!("{report}");
    if verdict.tileable {
        Ok(())
    } else {
        Err(Failure::Infeasible)
    }
}

fn parse_composition(text: &str) -> reptile_core::Result<BTreeMap<u32, usize>> {
    let bad = || Error::Parameter(format!("composition `{text}` is not a list of order:count pairs"));
    text.split(',')
        .map(|pair| {
            let (order, count) = pair.trim().split_once(':').ok_or_else(bad)?;
            Ok((order.trim().parse().map_err(|_| bad())?, count.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn enumerate(
    grid: GridSpec,
    family: TileFamily,
    orders: &[u32],
    limits: &EnumerationLimits,
    dump: Option<&Path>,
    dump_limit: u64,
) -> CmdResult {
    let inst = build_cover_instance(&grid, family, orders)?;
    let (outcome, dump_full) = match dump {
        None if limits.max_solutions.is_none() && limits.max_nodes.is_none() => (count_exact_covers_parallel(&inst, limits)?, false),
        None => (enumerate_exact_covers(&inst, limits, |_| ControlFlow::Continue(()))?, false),
        Some(path) => {
            let mut sink = io::SolutionDump::new(io::create(path)?, dump_limit);
            let mut failure = None;
            let outcome = enumerate_exact_covers(&inst, limits, |rows| match sink.push(rows) {
                Ok(_) => ControlFlow::Continue(()),
                Err(e) => {
                    failure = Some(e);
                    ControlFlow::Break(())
                }
            })?;
            if let Some(e) = failure {
                return Err(e.into());
            }
            let full = sink.is_full();
            sink.finish()?;
            (outcome, full)
        }
    };
    println!(
        "{}",
        json!({
            "rows": grid.rows,
            "cols": grid.cols,
            "placements": inst.num_rows(),
            "solutions": outcome.solutions,
            "nodes": outcome.nodes,
            "truncated": outcome.truncated,
            "dump_truncated": dump_full,
        })
    );
    if outcome.truncated || dump_full {
        Err(Failure::Truncated)
    } else {
        Ok(())
    }
}

fn output_dir(config: &RunConfig, out: Option<PathBuf>) -> reptile_core::Result<PathBuf> {
    let dir = out.unwrap_or_else(|| config.output_dir.clone());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Samples the pattern, writes it with both principal cuts, and returns its metrics.
fn write_pattern_files(dir: &Path, aperture: &Aperture, mask: &Mask, resolution: usize) -> reptile_core::Result<PatternMetrics> {
    let pattern = aperture.sample(resolution)?;
    let metrics = pattern_metrics(aperture, &pattern, mask);
    let (i, j) = pattern.peak_index();
    io::write_pattern(io::create(&dir.join("pattern.csv"))?, &pattern)?;
    io::write_cut(io::create(&dir.join("cut_u.csv"))?, "u", &pattern.cut_u(j))?;
    io::write_cut(io::create(&dir.join("cut_v.csv"))?, "v", &pattern.cut_v(i))?;
    Ok(metrics)
}

fn reference_metrics(config: &RunConfig, reference: &WeightSet, element: &ElementPattern, mask: &Mask) -> reptile_core::Result<PatternMetrics> {
    let aperture = Aperture::new(config.grid, reference.complex(), element)?;
    let pattern = aperture.sample(config.resolution)?;
    Ok(pattern_metrics(&aperture, &pattern, mask))
}

fn write_scan(
    dir: &Path,
    config: &RunConfig,
    clustering: Option<&Clustering>,
    reference: &WeightSet,
    element: &ElementPattern,
    mask: &Mask,
) -> reptile_core::Result<Option<serde_json::Value>> {
    let (Some(spec), Some(scan)) = (config.scan_spec(), config.scan) else {
        return Ok(None);
    };
    let map = scan_sll_map(clustering, reference, element, mask, &spec, config.resolution, config.phase_mean)?;
    io::write_scan_map(io::create(&dir.join("scan_map.csv"))?, &map)?;
    let limit = scan.summary_theta_deg.unwrap_or(scan.theta_max_deg);
    let summary = map
        .summary(limit)
        .map(|(max, avg)| json!({ "theta_limit_deg": limit, "max_sll_db": max, "avg_sll_db": avg }));
    io::write_json(io::create(&dir.join("scan_summary.json"))?, &summary)?;
    Ok(summary)
}

fn synthesize(config_path: &Path, out: Option<PathBuf>) -> CmdResult {
    let config = RunConfig::load(config_path)?;
    let mask = config.load_mask()?;
    let reference = config.build_reference()?;
    let element = config.load_element()?;
    let trace = rtam::run(&reference, &element, &mask, &config.rtam())?;
    let dir = output_dir(&config, out)?;

    io::write_trace(io::create(&dir.join("trace.json"))?, &trace)?;
    io::write_pareto(io::create(&dir.join("pareto.csv"))?, &trace)?;
    io::save_clustering(&dir.join("clustering_initial.csv"), &trace.initial.clustering)?;
    for &q in &config.snapshot_q {
        if let Some(it) = trace.iterations.iter().find(|it| it.q() == q) {
            io::save_clustering(&dir.join(format!("clustering_q{q}.csv")), &it.clustering)?;
        }
    }
    let last = trace.last();
    io::save_clustering(&dir.join("clustering_final.csv"), &last.clustering)?;
    io::write_excitations(io::create(&dir.join("reference_excitations.csv"))?, &reference)?;
    io::write_complex_excitations(io::create(&dir.join("excitations.csv"))?, &config.grid, &last.weights.expand(&last.clustering))?;

    let aperture = Aperture::clustered(&last.clustering, &last.weights, &element);
    let metrics = write_pattern_files(&dir, &aperture, &mask, config.resolution)?;
    let ideal = reference_metrics(&config, &reference, &element, &mask)?;
    let scan = write_scan(&dir, &config, Some(&last.clustering), &reference, &element, &mask)?;
    io::write_json(
        io::create(&dir.join("metrics.json"))?,
        &json!({ "clustered": metrics, "reference": ideal, "scan": scan }),
    )?;

    println!(
        "{}",
        json!({
            "H": trace.convergence_iteration(),
            "Q": last.q(),
            "gamma": last.gamma,
            "stop": trace.stop,
            "q_sequence": trace.q_sequence(),
            "output_dir": dir,
        })
    );
    Ok(())
}

fn evaluate(config_path: &Path, clustering_path: &Path, excitations: Option<&Path>, out: Option<PathBuf>) -> CmdResult {
    let config = RunConfig::load(config_path)?;
    let mask = config.load_mask()?;
    let element = config.load_element()?;
    let reference = match excitations {
        Some(path) => io::load_excitations(path, &config.grid)?,
        None => config.build_reference()?,
    };
    let clustering = io::load_clustering(clustering_path, &config.grid, config.family)?;
    let weights: ClusterWeights = cluster_excitations(&reference, &clustering, config.phase_mean)?;
    let dir = output_dir(&config, out)?;
    let aperture = Aperture::clustered(&clustering, &weights, &element);
    let metrics = write_pattern_files(&dir, &aperture, &mask, config.resolution)?;
    let report = json!({ "Q": clustering.len(), "metrics": metrics });
    io::write_json(io::create(&dir.join("metrics.json"))?, &report)?;
    println!("{report}");
    Ok(())
}

fn scan(config_path: &Path, clustering_path: Option<&Path>, out: Option<PathBuf>) -> CmdResult {
    let config = RunConfig::load(config_path)?;
    if config.scan.is_none() {
        return Err(Error::Config {
            path: "scan".into(),
            message: "the scan command needs a `scan` section".into(),
        }
        .into());
    }
    let mask = config.load_mask()?;
    let element = config.load_element()?;
    let reference = config.build_reference()?;
    let clustering = clustering_path
        .map(|p| io::load_clustering(p, &config.grid, config.family))
        .transpose()?;
    let dir = output_dir(&config, out)?;
    let summary = write_scan(&dir, &config, clustering.as_ref(), &reference, &element, &mask)?;
    println!("{}", json!({ "summary": summary }));
    Ok(())
}
