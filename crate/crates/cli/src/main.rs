//! `hygrosim`: command-line front end.

mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hygrosim::similarity::SimilarityKind;
use hygrosim::{Category, MaterialDb, PhysicalConstants};

use table::Format;

#[derive(Parser)]
#[command(
    name = "hygrosim",
    version,
    about = "Dimensionless analysis and similitude of coupled heat and moisture transfer"
)]
struct Cli {
    /// TOML file overriding physical constants.
    #[arg(long, global = true, value_name = "FILE")]
    constants: Option<PathBuf>,
    /// Material database CSV replacing the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    materials: Option<PathBuf>,
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse the material database.
    #[command(subcommand)]
    Materials(MaterialsCmd),
    /// Dimensionless numbers of one material.
    Numbers(NumbersArgs),
    /// One number against another for many materials.
    Map(MapArgs),
    /// Distortion coefficients over the (u, v) domain.
    Distortion(DistortionArgs),
    /// Multi-layer wall analysis.
    #[command(subcommand)]
    Wall(WallCmd),
    /// Kinetic, geometric and dynamic similarity.
    #[command(subcommand)]
    Similar(SimilarCmd),
    /// Run the 1D solver on a design.
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum MaterialsCmd {
    List {
        #[arg(long)]
        category: Option<Category>,
    },
    /// One material by id or name.
    Show { material: String },
}

#[derive(Args)]
struct Side {
    /// Surface coefficient set.
    #[arg(long, value_enum, default_value = "inside")]
    side: commands::SurfaceSide,
}

#[derive(Args)]
struct NumbersArgs {
    #[arg(long)]
    material: String,
    /// Thickness in metres [default: material default].
    #[arg(long)]
    length: Option<f64>,
    /// Reference time (`3600`, `10h`, `365d`).
    #[arg(long, default_value = "1h", value_parser = parse_duration)]
    time: f64,
    #[command(flatten)]
    side: Side,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long, value_parser = parse_key)]
    x: String,
    #[arg(long, value_parser = parse_key)]
    y: String,
    /// All materials (the default).
    #[arg(long, conflicts_with = "category")]
    all: bool,
    #[arg(long)]
    category: Option<Category>,
    /// Common thickness in metres [default: each material's default].
    #[arg(long)]
    length: Option<f64>,
    #[arg(long, default_value = "1h", value_parser = parse_duration)]
    time: f64,
    #[command(flatten)]
    side: Side,
}

#[derive(Args)]
struct DistortionArgs {
    #[arg(long)]
    material: String,
    /// Nodes per axis.
    #[arg(long, default_value_t = 101)]
    grid: usize,
}

#[derive(Subcommand)]
enum WallCmd {
    /// Per-layer numbers of one wall [default: built-in configuration 1].
    Analyze {
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Directional comparison of two walls [default: the two built-ins].
    Compare {
        /// Give twice: wall A then wall B.
        #[arg(long, value_name = "FILE", num_args = 1)]
        config: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SimilarCmd {
    /// Equivalent thickness at fixed time.
    Length {
        #[arg(long = "ref")]
        reference: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        kind: SimilarityKind,
        /// Reference thickness, m.
        #[arg(long)]
        length: f64,
        #[arg(long, default_value = "1h", value_parser = parse_duration)]
        time: f64,
    },
    /// Equivalent time at fixed thickness.
    Time {
        #[arg(long = "ref")]
        reference: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        kind: SimilarityKind,
        #[arg(long, value_parser = parse_duration)]
        time: f64,
        /// Common thickness, m.
        #[arg(long, default_value_t = 0.1)]
        length: f64,
    },
    /// Scale a design by Π and check the similitude.
    Dynamic {
        #[arg(long)]
        pi: f64,
        /// Design TOML [default: the wood fibre example].
        #[arg(long, value_name = "FILE")]
        design: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation TOML.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Run the Π-scaled design as well and compare.
    #[arg(long, value_name = "P")]
    verify_pi: Option<f64>,
    /// Emit full profiles instead of probe series.
    #[arg(long)]
    profiles: bool,
}

fn parse_duration(s: &str) -> Result<f64, String> {
    hygrosim::units::parse_duration(s).map_err(|e| e.to_string())
}

fn parse_key(s: &str) -> Result<String, String> {
    commands::check_key(s).map(|()| s.to_string())
}

/// Usage errors exit with 2, computation errors with 1.
enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<hygrosim::Error>() {
            Some(hygrosim::Error::UnknownMaterial(_)) => Failure::Usage(format!("{e:#}")),
            _ => Failure::Compute(e),
        }
    }
}

impl From<hygrosim::Error> for Failure {
    fn from(e: hygrosim::Error) -> Self {
        Failure::from(anyhow::Error::from(e))
    }
}

pub struct Context {
    pub pc: PhysicalConstants,
    pub db: MaterialDb,
    pub format: Format,
}

fn load_context(cli: &Cli) -> anyhow::Result<Context> {
    let pc = match &cli.constants {
        Some(path) => PhysicalConstants::from_toml(&commands::read(path)?)?,
        None => PhysicalConstants::default(),
    };
    let db = match &cli.materials {
        Some(path) => MaterialDb::from_path(path)?,
        None => MaterialDb::builtin(),
    };
    Ok(Context {
        pc,
        db,
        format: cli.format,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = load_context(&cli).map_err(Failure::Compute)?;
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                Failure::Compute(anyhow::anyhow!("{}: {e}", path.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let out = out.as_mut();
    match cli.command {
        Command::Materials(MaterialsCmd::List { category }) => {
            commands::materials_list(&ctx, category, out)?
        }
        Command::Materials(MaterialsCmd::Show { material }) => {
            commands::materials_show(&ctx, &material, out)?
        }
        Command::Numbers(a) => {
            commands::numbers(&ctx, &a.material, a.length, a.time, a.side.side, out)?
        }
        Command::Map(a) => commands::map(
            &ctx,
            &a.x,
            &a.y,
            a.category,
            a.length,
            a.time,
            a.side.side,
            out,
        )?,
        Command::Distortion(a) => commands::distortion(&ctx, &a.material, a.grid, out)?,
        Command::Wall(WallCmd::Analyze { config }) => {
            commands::wall_analyze(&ctx, config.as_deref(), out)?
        }
        Command::Wall(WallCmd::Compare { config }) => {
            if !(config.is_empty() || config.len() == 2) {
                return Err(Failure::Usage(
                    "wall compare takes either no --config or exactly two".into(),
                ));
            }
            commands::wall_compare(&ctx, &config, out)?
        }
        Command::Similar(SimilarCmd::Length {
            reference,
            target,
            kind,
            length,
            time,
        }) => commands::similar_length(&ctx, &reference, &target, kind, length, time, out)?,
        Command::Similar(SimilarCmd::Time {
            reference,
            target,
            kind,
            time,
            length,
        }) => commands::similar_time(&ctx, &reference, &target, kind, time, length, out)?,
        Command::Similar(SimilarCmd::Dynamic { pi, design }) => {
            commands::similar_dynamic(&ctx, pi, design.as_deref(), out)?
        }
        Command::Simulate(a) => commands::simulate(&ctx, &a.config, a.verify_pi, a.profiles, out)?,
    }
    out.flush().map_err(|e| Failure::Compute(e.into()))?;
    Ok(())
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
