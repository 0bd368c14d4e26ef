use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sfmlab_cli::{
    read_json, region_csv, region_svg, to_json, write_json, AnyScene, MeasurementsFile, SceneFile,
};
use sfmlab_core::counting::forbidden_region;
use sfmlab_core::reconstruct::{solve, solve_jet, SolveOptions};
use sfmlab_core::sfm::generic_rank_tol;
use sfmlab_core::sfm::synth::{perturb, random_jet_scene, random_scene};
use sfmlab_core::symmetry::align;
use sfmlab_core::{catalog, CameraKind, Configuration, Error};

/// Dimension counting, rank experiments and reconstruction for structure from motion.
#[derive(Parser)]
#[command(name = "sfmlab", version)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format on standard output.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// List the camera classes with their dimensions and symmetry groups.
    Catalog,
    /// Tabulate the dimension inequality over a grid of point and camera counts.
    Region {
        class: String,
        n_max: u64,
        m_max: u64,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw the grid as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Generic rank of the Jacobian against the counting prediction.
    Rank {
        class: String,
        n: usize,
        m: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
    /// Solve for a scene from image data, starting at an initial scene.
    Reconstruct {
        measurements: PathBuf,
        init: PathBuf,
        out: PathBuf,
        /// Ground truth to report the alignment error against.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Write a random scene and its exact image data.
    Simulate {
        /// A class name, or `circle` for planar circular motion seen by omni-2d cameras.
        class: String,
        n: usize,
        m: usize,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        /// Also write the scene perturbed by `--perturb`, as a solver start.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        perturb: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("SFMLAB_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                // the pool can only be built once per process
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SFMLAB_THREADS must be a positive integer, got `{threads}`");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Catalog => cmd_catalog(cli.format.unwrap_or(Format::Table)),
        Command::Region { class, n_max, m_max, out, svg } => {
            cmd_region(class, *n_max, *m_max, out.as_deref(), svg.as_deref())
        }
        Command::Rank { class, n, m, trials } => {
            cmd_rank(class, *n, *m, *trials, cli.seed, cli.tol, cli.format.unwrap_or(Format::Json))
        }
        Command::Reconstruct { measurements, init, out, truth } => {
            cmd_reconstruct(measurements, init, out, truth.as_deref(), cli.format.unwrap_or(Format::Table))
        }
        Command::Simulate { class, n, m, scene, measurements, init, perturb } => {
            cmd_simulate(class, *n, *m, cli.seed, scene, measurements, init.as_deref(), *perturb)
        }
    }
}

/// Writes to standard output; a closed pipe ends the output quietly.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct CatalogRow {
    name: &'static str,
    d: usize,
    s: usize,
    f: usize,
    g: usize,
    h: usize,
    group: &'static str,
}

fn cmd_catalog(format: Format) -> Result<ExitCode> {
    let rows: Vec<CatalogRow> = catalog()
        .iter()
        .map(|c| CatalogRow {
            name: c.name,
            d: c.d,
            s: c.s,
            f: c.f,
            g: c.g,
            h: c.h,
            group: c.group.name(),
        })
        .collect();
    let text = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        Format::Table => {
            let mut t = String::new();
            for r in &rows {
                writeln!(t, "{:<22} {} {} {} {} {} {}", r.name, r.d, r.s, r.f, r.g, r.h, r.group)?;
            }
            t
        }
    };
    emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_region(
    class: &str,
    n_max: u64,
    m_max: u64,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<ExitCode> {
    let kind: CameraKind = class.parse()?;
    ensure!((1..=1000).contains(&n_max) && (1..=1000).contains(&m_max), "grid bounds must lie in 1..=1000");
    let grid = forbidden_region(kind, n_max, m_max);
    let csv = region_csv(&grid)?;
    match out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => emit(&csv)?,
    }
    if let Some(path) = svg {
        std::fs::write(path, region_svg(kind.name(), &grid, n_max, m_max))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_rank(
    class: &str,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    tol: Option<f64>,
    format: Format,
) -> Result<ExitCode> {
    let kind: CameraKind = class.parse()?;
    let report = generic_rank_tol(kind, n, m, trials, seed, tol)?;
    let text = match format {
        Format::Table => format!(
            "{kind} n={n} m={m}: rank {} predicted {} deficit {} (trial ranks {:?})\n",
            report.rank, report.prediction, report.deficit, report.trial_ranks
        ),
        _ => to_json(&report)?,
    };
    emit(&text)?;
    Ok(if report.deficit == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct SolveSummary {
    rmse: f64,
    iterations: usize,
    converged: bool,
    gradient_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    align_rmse: Option<f64>,
}

fn cmd_reconstruct(
    measurements: &Path,
    init: &Path,
    out: &Path,
    truth: Option<&Path>,
    format: Format,
) -> Result<ExitCode> {
    let (kind, meas) = read_json::<MeasurementsFile>(measurements)?.to_measurements()?;
    let start = read_json::<SceneFile>(init)?.to_scene()?;
    let truth = match truth {
        Some(path) => Some(read_json::<SceneFile>(path)?.to_scene()?),
        None => None,
    };
    let options = SolveOptions::default();
    let infeasible = |e: Error| match e {
        Error::Infeasible(r) => anyhow::anyhow!("the dimension inequality fails for {kind}: {r}"),
        other => other.into(),
    };
    let (scene, rmse, iterations, converged, gradient_norm) = match &start {
        AnyScene::Static(s) => {
            ensure!(s.kind == kind, "measurements are from {kind}, the initial scene is {}", s.kind);
            let rep = solve(&meas, s, &options).map_err(infeasible)?;
            (AnyScene::Static(rep.scene), rep.rmse, rep.iterations, rep.converged, rep.gradient_norm)
        }
        AnyScene::Jet(j) => {
            ensure!(j.kind == kind, "measurements are from {kind}, the initial scene is {}", j.kind);
            let rep = solve_jet(&meas, &j.times, j, &options).map_err(infeasible)?;
            (AnyScene::Jet(rep.scene), rep.rmse, rep.iterations, rep.converged, rep.gradient_norm)
        }
    };
    let align_rmse = match (&scene, &truth) {
        (_, None) => None,
        (AnyScene::Static(a), Some(AnyScene::Static(b))) => Some(align(a, b)?.1),
        (AnyScene::Jet(a), Some(AnyScene::Jet(b))) => Some(align(a, b)?.1),
        _ => bail!("the truth scene and the initial scene are of different kinds"),
    };
    write_json(out, &SceneFile::from_any(&scene))?;
    let summary = SolveSummary { rmse, iterations, converged, gradient_norm, align_rmse };
    let text = match format {
        Format::Json => to_json(&summary)?,
        _ => {
            let mut t = format!(
                "rmse {rmse:.6e}\niterations {iterations}\nconverged {converged}\ngradient_norm {gradient_norm:.6e}\n"
            );
            if let Some(a) = align_rmse {
                writeln!(t, "align_rmse {a:.6e}")?;
            }
            t
        }
    };
    emit(&text)?;
    Ok(if converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    class: &str,
    n: usize,
    m: usize,
    seed: u64,
    scene_path: &Path,
    meas_path: &Path,
    init_path: Option<&Path>,
    rel: f64,
) -> Result<ExitCode> {
    ensure!(n > 0 && m > 0, "n and m must be at least 1");
    let (kind, scene, meas, init) = if class == "circle" {
        let js = random_jet_scene(CameraKind::Omni2d, n, m, seed)?;
        let init = perturb(&js, rel, seed.wrapping_add(1))?;
        (js.kind, AnyScene::Jet(js.clone()), js.evaluate()?, AnyScene::Jet(init))
    } else {
        let kind: CameraKind = class.parse()?;
        let s = random_scene(kind, n, m, seed)?;
        let init = perturb(&s, rel, seed.wrapping_add(1))?;
        (kind, AnyScene::Static(s.clone()), s.evaluate()?, AnyScene::Static(init))
    };
    write_json(scene_path, &SceneFile::from_any(&scene))?;
    write_json(meas_path, &MeasurementsFile::new(kind, &meas))?;
    if let Some(path) = init_path {
        write_json(path, &SceneFile::from_any(&init))?;
    }
    Ok(ExitCode::SUCCESS)
}
