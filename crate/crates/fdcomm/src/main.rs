use clap::{Args, Parser, Subcommand};
use fdcomm::sweep::{emit, num, run, summary, Format, ModelKind, Quantity, SweepConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Commutator norms of Fermi–Dirac equilibria: point evaluations, sweeps and oracle checks.
#[derive(Parser)]
#[command(name = "fdcomm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase-space norms of f = F(|z|²); with --b also the magnetic ratio.
    Classical(PointArgs),
    /// Isotropic oscillator: S_p, K_p and the envelope ratio.
    Quantum(PointArgs),
    /// Fock–Darwin oscillator: S_{p,j}, the gradient bound and the decomposition.
    Magnetic(PointArgs),
    /// Dense-matrix (or Monte-Carlo, for classical) cross-check.
    OracleCheck(OracleArgs),
    /// Run a sweep described by a config file.
    Sweep(SweepArgs),
}

fn parse_num(s: &str) -> Result<f64, String> {
    num::parse(s)
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Reduced Planck constant; comma-separated for several values.
    #[arg(long, value_delimiter = ',', value_parser = parse_num)]
    hbar: Vec<f64>,
    /// Inverse temperature; `inf` for zero temperature.
    #[arg(long, value_delimiter = ',', value_parser = parse_num)]
    beta: Vec<f64>,
    /// Chemical potential.
    #[arg(long, value_delimiter = ',', value_parser = parse_num)]
    mu: Vec<f64>,
    /// Field strength b (B = 2b e₃).
    #[arg(long, value_delimiter = ',', value_parser = parse_num)]
    b: Vec<f64>,
    /// Schatten order; `inf` allowed for quantum models.
    #[arg(long, value_delimiter = ',', value_parser = parse_num, default_value = "2")]
    p: Vec<f64>,
    /// Dimension.
    #[arg(long, value_delimiter = ',')]
    d: Vec<u32>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Relative tolerance for oracle and exact-identity checks.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for Monte-Carlo checks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Model to check; defaults to magnetic when --b is given, else harmonic.
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON or `key = value` config mirroring the sweep fields.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn point_config(model: ModelKind, grid: GridArgs, quantities: Vec<Quantity>) -> SweepConfig {
    let hbar = if grid.hbar.is_empty() && model == ModelKind::Classical { vec![1.0] } else { grid.hbar };
    SweepConfig {
        model,
        hbar,
        beta: grid.beta,
        mu: grid.mu,
        b: grid.b,
        p: grid.p,
        d: if grid.d.is_empty() && model == ModelKind::Harmonic { vec![1] } else { grid.d },
        quantities,
        tol: 1e-8,
        format: Format::Csv,
        seed: 0,
        mc_samples: 20_000,
        workers: None,
        allow_large_hbar: false,
    }
}

fn apply(mut config: SweepConfig, output: &OutputArgs) -> SweepConfig {
    if let Some(t) = output.tol {
        config.tol = t;
    }
    if let Some(f) = output.format {
        config.format = f;
    }
    if let Some(s) = output.seed {
        config.seed = s;
    }
    config
}

fn execute(config: SweepConfig, output: &OutputArgs) -> ExitCode {
    let config = apply(config, output);
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &output.out {
        Some(path) => std::fs::File::create(path).and_then(|f| emit(&report.rows, config.format, std::io::BufWriter::new(f))),
        None => emit(&report.rows, config.format, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    eprint!("{}", summary(&report));
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Classical(a) => {
            let mut config = point_config(ModelKind::Classical, a.grid, vec![Quantity::Sp, Quantity::Kp]);
            if config.d.is_empty() {
                config.d = if config.b.is_empty() { vec![1] } else { vec![3] };
            }
            if !config.b.is_empty() {
                config.quantities.push(Quantity::OracleCheck);
            }
            execute(config, &a.output)
        }
        Command::Quantum(a) => execute(point_config(ModelKind::Harmonic, a.grid, vec![Quantity::Sp, Quantity::Kp]), &a.output),
        Command::Magnetic(a) => execute(point_config(ModelKind::Magnetic, a.grid, vec![Quantity::Sp, Quantity::IDecomposition]), &a.output),
        Command::OracleCheck(a) => {
            let model = a.model.unwrap_or(if a.grid.b.is_empty() { ModelKind::Harmonic } else { ModelKind::Magnetic });
            let mut config = point_config(model, a.grid, vec![Quantity::OracleCheck]);
            if config.d.is_empty() && model == ModelKind::Classical {
                config.d = if config.b.is_empty() { vec![1] } else { vec![3] };
            }
            execute(config, &a.output)
        }
        Command::Sweep(a) => {
            let text = match std::fs::read_to_string(&a.config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", a.config.display());
                    return ExitCode::from(2);
                }
            };
            match SweepConfig::parse(&text) {
                Ok(c) => execute(c, &a.output),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
