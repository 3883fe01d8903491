use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wqh_core::cli::{
    cmd_fusion, cmd_pointed, cmd_tannaka, cmd_uqsl2, cmd_verify, CliError, CocycleSource, FusionSource, OutputFormat, RingSource,
    RunConfig, Uqsl2Options, DEFAULT_TOLERANCE,
};

#[derive(Debug, Parser)]
#[command(name = "wqh", version, about = "Verify weak quasi-Hopf algebras, fusion data and A_W(sl2)")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Tolerance for certified floating-point checks.
    #[arg(long, global = true, env = "WQH_TOLERANCE", default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Exit 0 even when some positivity certificate is indeterminate.
    #[arg(long, global = true)]
    allow_indeterminate: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every suite a presentation file declares.
    Verify { path: PathBuf },
    /// Fusion table, dimensions, twists and modular data.
    Fusion {
        /// sl2 at level k.
        #[arg(long, conflicts_with_all = ["n", "ring"])]
        sl2: Option<usize>,
        /// sl_N, together with --ell.
        #[arg(long, requires = "ell")]
        n: Option<usize>,
        #[arg(long)]
        ell: Option<usize>,
        /// A ring file.
        #[arg(long)]
        ring: Option<PathBuf>,
    },
    /// Fun_ω(Z_N) for ω = ω_w with w = e^{2πi·power/N}, or a cocycle file.
    Pointed {
        #[arg(long, conflicts_with = "cocycle")]
        order: Option<usize>,
        #[arg(long, default_value_t = 0)]
        power: i64,
        #[arg(long)]
        cocycle: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        emit_presentation: Option<PathBuf>,
    },
    /// Reconstruct an algebra from a seeded fiber-functor choice.
    Tannaka {
        #[arg(long, conflicts_with_all = ["sl2", "ring"])]
        pointed: Option<usize>,
        #[arg(long, conflicts_with = "ring")]
        sl2: Option<usize>,
        #[arg(long)]
        ring: Option<PathBuf>,
        /// Dimensions per label, comma separated; all ones by default.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, value_name = "PATH")]
        emit_presentation: Option<PathBuf>,
    },
    /// A_W(sl2, e^{iπ/ℓ}, ℓ).
    Uqsl2 {
        #[arg(long)]
        ell: usize,
        #[arg(long, value_name = "PATH")]
        emit_presentation: Option<PathBuf>,
        #[arg(long)]
        braiding_table: bool,
        #[arg(long)]
        verify_all: bool,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let c = cli.common;
    let cfg = RunConfig::new(c.tolerance, c.seed, c.format, c.allow_indeterminate)?;
    let out = match cli.command {
        Command::Verify { path } => cmd_verify(&path, &cfg)?,
        Command::Fusion { sl2, n, ell, ring } => {
            let src = match (sl2, n, ring) {
                (Some(level), None, None) => FusionSource::Sl2 { level },
                (None, Some(n), None) => FusionSource::Sln { n, ell: ell.expect("required by clap") },
                (None, None, Some(path)) => FusionSource::File(path),
                _ => return Err(CliError::Usage("give one of --sl2, --n with --ell, or --ring".into())),
            };
            cmd_fusion(&src, &cfg)?
        }
        Command::Pointed { order, power, cocycle, emit_presentation } => {
            let src = match (order, cocycle) {
                (Some(order), None) => CocycleSource::Generator { order, power },
                (None, Some(path)) => CocycleSource::File(path),
                _ => return Err(CliError::Usage("give --order or --cocycle".into())),
            };
            cmd_pointed(&src, emit_presentation.as_deref(), &cfg)?
        }
        Command::Tannaka { pointed, sl2, ring, dims, emit_presentation } => {
            let src = match (pointed, sl2, ring) {
                (Some(n), None, None) => RingSource::Pointed(n),
                (None, Some(k), None) => RingSource::Sl2(k),
                (None, None, Some(path)) => RingSource::File(path),
                _ => return Err(CliError::Usage("give one of --pointed, --sl2 or --ring".into())),
            };
            cmd_tannaka(&src, &dims, emit_presentation.as_deref(), &cfg)?
        }
        Command::Uqsl2 { ell, emit_presentation, braiding_table, verify_all } => {
            let opts = Uqsl2Options { ell, emit: emit_presentation, braiding_table, verify_all };
            cmd_uqsl2(&opts, &cfg)?
        }
    };
    print!("{}", out.render(cfg.format));
    Ok(if out.success(&cfg) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
