//! `dnlab` — a workbench for Dirichlet-to-Neumann boundary data on
//! triangulated surfaces: build surfaces, compute DN operators, estimate
//! genus from boundary data alone, and run the canned experiment families.
//!
//! Exit codes are part of the interface and never conflated:
//!   0  the command ran and every assertion held
//!   1  the science failed: a verdict missed its tolerance or a measurement
//!      broke down mid-run
//!   2  the run never started: malformed config, impossible surface,
//!      missing or unreadable paths

mod config;
mod experiments;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use dnlab::boundary::write_operator_csv;
use dnlab::dn::{defect_operator, dn_matrix, estimate_genus, hilbert_transform, spectral_window};
use dnlab::mesh::{read_mesh_file, write_mesh_file, MeshSections};
use dnlab::Error as CoreError;

use config::{ExperimentConfig, SurfaceSpec};
use experiments::{run_double_symmetry, run_genus, run_instability, RunError, RunOutput};
use report::{Environment, Report};

#[derive(Parser)]
#[command(
    name = "dnlab",
    version,
    about = "Dirichlet-to-Neumann experiments on triangulated surfaces",
    propagate_version = true
)]
struct Cli {
    /// Seed stamped into reports. The pipelines are deterministic; the seed
    /// labels the run rather than perturbing it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for experiment families. The DNLAB_THREADS environment
    /// variable overrides the default; the flag overrides both.
    #[arg(long, global = true, env = "DNLAB_THREADS", default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a surface and write it as a SURF mesh file.
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
    /// Compute a DN operator from a mesh file.
    Dn {
        #[command(subcommand)]
        cmd: DnCmd,
    },
    /// Estimate the genus of a surface from its boundary operator alone.
    Genus {
        /// SURF mesh file of a surface with one boundary loop.
        #[arg(long)]
        mesh: PathBuf,
        /// Relative gap required before a rank cut is accepted.
        #[arg(long, default_value_t = 10.0)]
        gap_factor: f64,
    },
    /// Run an experiment described by a JSON config file.
    Experiment {
        #[command(subcommand)]
        cmd: ExperimentCmd,
    },
    /// Render a report file as plain text.
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Build a disk, torus-with-hole, or handled disk.
    Build {
        /// JSON surface spec (the same object the experiment configs embed
        /// under "base"/"surfaces"). Required for handled disks.
        #[arg(long, conflicts_with_all = ["surface", "boundary_nodes"])]
        config: Option<PathBuf>,
        /// Surface generator: disk or torus-with-hole.
        #[arg(long)]
        surface: Option<String>,
        /// Boundary sample count (a power of two).
        #[arg(long)]
        boundary_nodes: Option<usize>,
        /// Interior rings of the disk generator.
        #[arg(long)]
        rings: Option<usize>,
        /// Disk radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Hole radius of the torus generator, as a fraction of the period.
        #[arg(long)]
        hole_radius: Option<f64>,
        /// Output SURF file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DnCmd {
    /// Compute the DN operator and write it as a dense CSV matrix.
    Compute {
        /// Input SURF mesh file.
        #[arg(long)]
        mesh: PathBuf,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run a config and write report.json plus CSV tables.
    Run {
        /// Experiment config (JSON).
        config: PathBuf,
        /// Output directory; overrides the config's out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Print a report.json as a readable table.
    Render {
        /// Report file produced by `experiment run`.
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli))
}

fn run(cli: &Cli) -> u8 {
    if cli.threads == 0 {
        eprintln!("config error: --threads must be at least 1");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: building the thread pool: {e}");
            return 2;
        }
    };
    let outcome = pool.install(|| dispatch(cli));
    match outcome {
        Ok(code) => code,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e:#}");
            2
        }
        Err(RunError::Science(e)) => {
            eprintln!("run failed: {e:#}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, RunError> {
    match &cli.command {
        Command::Mesh {
            cmd:
                MeshCmd::Build {
                    config,
                    surface,
                    boundary_nodes,
                    rings,
                    radius,
                    hole_radius,
                    out,
                },
        } => mesh_build(
            config.as_deref(),
            surface.as_deref(),
            *boundary_nodes,
            *rings,
            *radius,
            *hole_radius,
            out,
        ),
        Command::Dn {
            cmd: DnCmd::Compute { mesh, out },
        } => dn_compute(mesh, out),
        Command::Genus { mesh, gap_factor } => genus_cmd(mesh, *gap_factor),
        Command::Experiment {
            cmd: ExperimentCmd::Run { config, out_dir },
        } => experiment_run(cli, config, out_dir.as_deref()),
        Command::Report {
            cmd: ReportCmd::Render { report },
        } => report_render(report),
    }
}

fn config_err<T, E: Into<anyhow::Error>>(r: Result<T, E>, ctx: &'static str) -> Result<T, RunError> {
    r.map_err(|e| RunError::Config(e.into().context(ctx)))
}

fn science_err<T, E: Into<anyhow::Error>>(r: Result<T, E>, ctx: &'static str) -> Result<T, RunError> {
    r.map_err(|e| RunError::Science(e.into().context(ctx)))
}

fn mesh_build(
    config: Option<&std::path::Path>,
    surface: Option<&str>,
    boundary_nodes: Option<usize>,
    rings: Option<usize>,
    radius: Option<f64>,
    hole_radius: Option<f64>,
    out: &std::path::Path,
) -> Result<u8, RunError> {
    let spec = if let Some(path) = config {
        let text = config_err(fs::read_to_string(path), "reading the surface spec")?;
        let spec: SurfaceSpec =
            config_err(serde_json::from_str(&text), "parsing the surface spec")?;
        config_err(spec.validate().map(|_| spec), "validating the surface spec")?
    } else {
        let surface = surface
            .ok_or_else(|| RunError::Config(anyhow!("pass --surface or --config")))?
            .to_string();
        let boundary_nodes = boundary_nodes
            .ok_or_else(|| RunError::Config(anyhow!("pass --boundary-nodes with --surface")))?;
        let spec = SurfaceSpec {
            surface,
            boundary_nodes,
            rings,
            radius,
            hole_radius,
            handles: Vec::new(),
            label: None,
        };
        config_err(spec.validate().map(|_| spec), "validating the surface flags")?
    };
    let built = spec.build().map_err(RunError::Config)?;
    let genus = science_err(built.mesh.euler_genus(), "computing the Euler genus")?;
    let sections = MeshSections {
        mesh: built.mesh,
        vertex_functions: Vec::new(),
        edge_differentials: Vec::new(),
    };
    config_err(write_mesh_file(out, &sections), "writing the mesh file")?;
    println!(
        "wrote {} ({} vertices, {} triangles, genus {})",
        out.display(),
        sections.mesh.n_vertices(),
        sections.mesh.triangles().len(),
        genus
    );
    Ok(0)
}

fn dn_compute(mesh_path: &std::path::Path, out: &std::path::Path) -> Result<u8, RunError> {
    let sections = config_err(
        read_mesh_file::<f64>(mesh_path),
        "reading the input mesh",
    )?;
    let dn = science_err(dn_matrix(&sections.mesh), "computing the DN operator")?;
    let mut buf = Vec::new();
    science_err(
        write_operator_csv(dn.operator(), &mut buf),
        "serializing the operator",
    )?;
    config_err(fs::write(out, &buf), "writing the operator CSV")?;
    println!(
        "wrote {} (N={}, boundary length {:.6})",
        out.display(),
        dn.n(),
        dn.total_length()
    );
    Ok(0)
}

fn genus_cmd(mesh_path: &std::path::Path, gap_factor: f64) -> Result<u8, RunError> {
    if !gap_factor.is_finite() || gap_factor <= 1.0 {
        return Err(RunError::Config(anyhow!(
            "--gap-factor must be a finite value above 1, got {gap_factor}"
        )));
    }
    let sections = config_err(
        read_mesh_file::<f64>(mesh_path),
        "reading the input mesh",
    )?;
    let dn = science_err(dn_matrix(&sections.mesh), "computing the DN operator")?;
    let hilbert = science_err(hilbert_transform(&dn), "forming the Hilbert transform")?;
    let defect = science_err(defect_operator(&hilbert), "forming the defect operator")?;
    match estimate_genus(&defect, gap_factor) {
        Ok(g) => {
            println!(
                "genus {g} (N={}, window <= mode {}, gap factor {gap_factor})",
                dn.n(),
                spectral_window(dn.n())
            );
            Ok(0)
        }
        Err(CoreError::IndeterminateRank {
            message, profile, ..
        }) => {
            eprintln!("run failed: {message}");
            let head: Vec<String> = profile.iter().take(8).map(|v| format!("{v:.3e}")).collect();
            eprintln!("singular profile head: {}", head.join(" "));
            Ok(1)
        }
        Err(e) => Err(RunError::Science(
            anyhow::Error::from(e).context("estimating the genus"),
        )),
    }
}

fn experiment_run(
    cli: &Cli,
    config_path: &std::path::Path,
    out_dir_flag: Option<&std::path::Path>,
) -> Result<u8, RunError> {
    let cfg = config::load(config_path).map_err(RunError::Config)?;
    let out_dir: PathBuf = out_dir_flag
        .map(|p| p.to_path_buf())
        .or_else(|| cfg.out_dir().cloned())
        .unwrap_or_else(|| PathBuf::from(format!("{}-out", cfg.kind())));

    let env = Environment {
        package: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cli.seed,
        threads: cli.threads,
        spectral_window: 0, // each runner records its leading window
    };

    let RunOutput { report, files } = match &cfg {
        ExperimentConfig::Instability(c) => run_instability(c, env)?,
        ExperimentConfig::Genus(c) => run_genus(c, env)?,
        ExperimentConfig::DoubleSymmetry(c) => run_double_symmetry(c, env)?,
    };

    config_err(fs::create_dir_all(&out_dir), "creating the output directory")?;
    let report_path = out_dir.join("report.json");
    let json = science_err(report.to_json(), "serializing the report")?;
    config_err(fs::write(&report_path, json), "writing report.json")?;
    for (name, contents) in &files {
        config_err(fs::write(out_dir.join(name), contents), "writing a table")?;
    }

    print!("{}", report.render());
    println!("report: {}", report_path.display());
    Ok(if report.pass { 0 } else { 1 })
}

fn report_render(path: &std::path::Path) -> Result<u8, RunError> {
    let text = config_err(fs::read_to_string(path), "reading the report")?;
    let report = config_err(
        Report::from_json(&text).context("parsing the report"),
        "loading the report",
    )?;
    print!("{}", report.render());
    Ok(0)
}
