use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dualdesign::circuit::Layout;
use dualdesign::experiment::{self, ExperimentConfig, Preset};
use dualdesign::io::{parse_validation_target, GateSource};
use dualdesign::transfer::{spectral_report, TransferScheme};
use dualdesign::{fixtures, validate, Error};

const EXIT_ERROR: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dualdesign",
    version,
    about = "Projected ensembles of dual-unitary circuits"
)]
struct Cli {
    /// Threads for dense linear algebra.
    #[arg(long, global = true, env = "DUALDESIGN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and emit CSV rows plus a JSON sidecar.
    Run(RunArgs),
    /// Print the certificate table of a gate, Hadamard, UEB or MPS file.
    Validate(ValidateArgs),
    /// Probe the folded space transfer matrix.
    ProbeTransfer(ProbeArgs),
    /// Bundled fixtures.
    Fixtures {
        #[command(subcommand)]
        command: FixtureCommand,
    },
}

#[derive(Subcommand)]
enum FixtureCommand {
    /// List bundled fixtures.
    List,
    /// Print a fixture as JSON.
    Show { name: String },
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    experiment_id: Option<String>,
    #[arg(long = "n-a")]
    n_a: Option<usize>,
    #[arg(long = "n-b")]
    n_b: Option<usize>,
    /// Use the larger bath N_B = 16.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    t_min: Option<usize>,
    #[arg(long)]
    t_max: Option<usize>,
    /// Comma-separated list of times.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<usize>>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Gate identifier, e.g. `kim:0.785,0.785,0.5,0.5`, `cat_map:3`, `sample_dual_unitary`, `file:g.json`.
    #[arg(long)]
    gate: Option<String>,
    /// `computational`, `computational:<digits>`, `bell_pairs` or `mps:<path>`.
    #[arg(long)]
    initial: Option<String>,
    /// `computational`, `bell` or `ueb:<path>`.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    layout: Option<LayoutArg>,
    #[arg(long)]
    measurement_offset: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; the sidecar goes next to it. Without it the CSV is printed.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    memory_budget_mb: Option<u64>,
    /// Print the plan and exit.
    #[arg(long)]
    plan_only: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum LayoutArg {
    OddFirst,
    EvenFirst,
}

impl From<LayoutArg> for Layout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::OddFirst => Layout::OddFirst,
            LayoutArg::EvenFirst => Layout::EvenFirst,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// File to check, or the name of a bundled fixture.
    target: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Project a gate onto the unitary (or dual-unitary) set first.
    #[arg(long)]
    polar: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(
        long,
        default_value = "kim:0.7853981633974483,0.7853981633974483,0.5,0.5"
    )]
    gate: String,
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// `computational` or `bell`.
    #[arg(long, default_value = "computational")]
    scheme: String,
    /// Number of deflated eigenvalues to report.
    #[arg(long, default_value_t = 4)]
    count: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn overrides(cfg: &mut ExperimentConfig, a: &RunArgs) {
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = a.$field.clone() {
                cfg.$field = v;
            }
        };
        ($field:ident, opt) => {
            if let Some(v) = a.$field.clone() {
                cfg.$field = Some(v);
            }
        };
    }
    set!(preset);
    set!(n_a);
    set!(n_b);
    set!(q);
    set!(k_max);
    set!(seed);
    set!(experiment_id, opt);
    set!(t_min, opt);
    set!(t_max, opt);
    set!(times, opt);
    set!(gate, opt);
    set!(initial, opt);
    set!(scheme, opt);
    set!(measurement_offset, opt);
    set!(output, opt);
    set!(memory_budget_mb, opt);
    if let Some(l) = a.layout {
        cfg.layout = Some(l.into());
    }
    if a.full {
        cfg.n_b = 16;
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => EXIT_BUDGET,
        Error::Check(_) => EXIT_VALIDATION,
        _ => EXIT_ERROR,
    }
}

fn run(a: RunArgs) -> Result<(), Error> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    overrides(&mut cfg, &a);
    let plan = experiment::plan(&cfg)?;
    eprintln!("{plan}");
    if !plan.fits() {
        eprintln!("memory budget exceeded; lower N_B, N_A or k_max, or raise --memory-budget-mb");
        return Err(Error::CapExceeded {
            what: "memory budget (bytes)",
            needed: plan.peak_bytes as usize,
            cap: plan.budget_bytes as usize,
        });
    }
    if a.plan_only {
        return Ok(());
    }
    let out = experiment::run_experiment_with(&cfg, |r| {
        eprintln!(
            "{} {} t={} k={} delta={:.6e} ({:.0} ms)",
            r.gate, r.scheme, r.t, r.k, r.delta, r.wall_ms
        );
    })?;
    match &cfg.output {
        Some(path) => {
            experiment::write_outputs(&out, path)?;
            eprintln!(
                "wrote {} and {}",
                path.display(),
                experiment::sidecar_path(path).display()
            );
        }
        None => {
            std::io::stdout().write_all(experiment::to_csv(&out.rows)?.as_bytes())?;
        }
    }
    Ok(())
}

fn read_target(target: &str) -> Result<String, Error> {
    if !Path::new(target).exists() && fixtures::names().contains(&target) {
        return Ok(fixtures::json(target)?.to_string());
    }
    Ok(std::fs::read_to_string(target)?)
}

fn run_validate(a: ValidateArgs) -> Result<bool, Error> {
    let text = read_target(&a.target)?;
    let target = parse_validation_target(&text)?;
    let report = validate::validate(&target, a.tol, a.polar.then_some(fixtures::PRINT_TOL))?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{report}");
    }
    Ok(report.valid)
}

fn run_probe(a: ProbeArgs) -> Result<(), Error> {
    let gate = a.gate.parse::<GateSource>()?.build()?;
    let scheme = match a.scheme.as_str() {
        "computational" => TransferScheme::computational(),
        "bell" => TransferScheme::bell(gate.q())?,
        other => {
            return Err(Error::Config(format!(
                "unknown transfer scheme \"{other}\""
            )))
        }
    };
    let report = spectral_report(&gate, &a.gate, a.t, a.m, &scheme, a.count)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &a.output {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    eprintln!(
        "leading {:.6e}, next {:.6e}, gap {:.3e}, max residual {:.3e}",
        report.leading,
        report.eigen_magnitudes.first().copied().unwrap_or(0.0),
        report.gap,
        report
            .residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        dualdesign::linalg::set_threads(n);
    }
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Validate(a) => match run_validate(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_VALIDATION),
            Err(e) => Err(e),
        },
        Command::ProbeTransfer(a) => run_probe(a),
        Command::Fixtures { command } => match command {
            FixtureCommand::List => {
                for (name, desc) in fixtures::list() {
                    println!("{name}\t{desc}");
                }
                Ok(())
            }
            FixtureCommand::Show { name } => fixtures::json(&name).map(|j| print!("{j}")),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
