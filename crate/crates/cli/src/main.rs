use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lossy_boson::bench::{run_bench, write_bench_csv, BenchClass};
use lossy_boson::network::{build_clements, build_random, build_reck, extract_losses, shortest_paths};
use lossy_boson::oracle::{dilated_lossy_distribution_with, distribution_to_json, exact_distribution_with};
use lossy_boson::sampler::{sample_batch, write_csv};
use lossy_boson::validate::{self, Suite};
use lossy_boson::{
    cost_estimate, default_strategy, permanent_repeated, DeskLimits, Error, LossyNetwork, OccupationVector,
    PipelineConfig, UnbalancedSimulation, UnitaryMatrix,
};

/// Seed used whenever `--seed` is omitted.
const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Parser)]
#[command(name = "lossy-boson", version, about = "Boson sampling through lossy linear-optical networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, extract and inspect networks.
    #[command(subcommand)]
    Net(NetCommand),
    /// Write a unitary file.
    #[command(subcommand)]
    Unitary(UnitaryCommand),
    /// Transition probability `|Per(U_{S,T})|^2 / (prod s! prod t!)` and its cost.
    Prob {
        #[arg(long)]
        unitary: PathBuf,
        /// Input occupations, e.g. `1,1,0`.
        #[arg(long)]
        input: String,
        /// Output occupations.
        #[arg(long)]
        output: String,
    },
    /// Draw samples from a unitary, or run the lossy pipeline on a network.
    Sample(SampleArgs),
    /// Run an invariant battery against the oracles.
    Validate {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Operation counts per shot over a size sweep, as CSV.
    Bench {
        #[arg(long, value_enum)]
        class: ClassArg,
        /// Photon numbers, e.g. `4,6,8`.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        shots: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact output distribution as JSON, from the enumeration or dilation oracle.
    Dist {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NetCommand {
    /// Generate a mesh, or rewrite a network file (`--geometry file`) in
    /// canonical form.
    Build {
        #[arg(long, value_enum)]
        geometry: Geometry,
        #[arg(long, required_unless_present = "input")]
        modes: Option<usize>,
        #[arg(long = "in", required_if_eq("geometry", "file"))]
        input: Option<PathBuf>,
        /// Arm transmissivity; the lower end of the range for `random`.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Element count for `random`.
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pull the losses to a front layer plus a residual network.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shortest input-output path of every input mode.
    Paths {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum UnitaryCommand {
    /// Haar-random unitary.
    Haar {
        #[arg(long)]
        modes: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unitary of a lossless network file.
    Compose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    unitary: Option<PathBuf>,
    #[arg(long)]
    network: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    input: String,
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = StrategyArg::SingleBin)]
    strategy: StrategyArg,
    /// Short-path constant: modes with paths below `c ln n` stay lossless.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Budget for short-path modes, in units of `ln n`.
    #[arg(long, default_value_t = 3.0)]
    kappa: f64,
    #[arg(long)]
    allow_nonstandard: bool,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certificate JSON destination for the network path; stderr when omitted.
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Instrumentation JSON destination for the unitary path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Geometry {
    Reck,
    Clements,
    Random,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    SingleBin,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Permanents,
    Marginals,
    Extraction,
    Sampler,
    Lossy,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Permanents => Suite::Permanents,
            SuiteArg::Marginals => Suite::Marginals,
            SuiteArg::Extraction => Suite::Extraction,
            SuiteArg::Sampler => Suite::Sampler,
            SuiteArg::Lossy => Suite::Lossy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    A,
    B,
    C,
    General,
}

impl From<ClassArg> for BenchClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::A => BenchClass::A,
            ClassArg::B => BenchClass::B,
            ClassArg::C => BenchClass::C,
            ClassArg::General => BenchClass::General,
        }
    }
}

enum Failure {
    Validation,
    Usage(String),
    Limit(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_limit_violation() {
            Failure::Limit(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn with_newline(mut text: String) -> String {
    text.push('\n');
    text
}

fn parse_occupation(text: &str) -> Result<OccupationVector, Failure> {
    let cleaned = text.trim().trim_start_matches('[').trim_end_matches(']');
    let values = cleaned
        .split([',', ';'])
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::Usage(format!("`{text}` is not a list of photon counts")))?;
    Ok(OccupationVector::new(values)?)
}

fn load_network(path: &Path) -> Result<LossyNetwork, Failure> {
    Ok(LossyNetwork::from_json(&read(path)?)?)
}

fn load_unitary(path: &Path) -> Result<UnitaryMatrix, Failure> {
    Ok(UnitaryMatrix::from_json(&read(path)?)?)
}

fn net(cmd: NetCommand) -> CliResult {
    match cmd {
        NetCommand::Build { geometry, modes, input, eta, elements, seed, out } => {
            let modes = || modes.ok_or_else(|| Failure::Usage("--modes is required".into()));
            let net = match geometry {
                Geometry::File => {
                    let path = input.ok_or_else(|| Failure::Usage("--in is required for file".into()))?;
                    load_network(&path)?
                }
                Geometry::Reck => build_reck(modes()?, eta, seed)?,
                Geometry::Clements => build_clements(modes()?, eta, seed)?,
                Geometry::Random => {
                    let count = elements.ok_or_else(|| Failure::Usage("--elements is required for random".into()))?;
                    build_random(modes()?, count, eta, seed)?
                }
            };
            emit(out.as_deref(), &with_newline(net.to_json()))
        }
        NetCommand::Extract { input, out } => {
            let result = extract_losses(&load_network(&input)?)?;
            emit(out.as_deref(), &with_newline(result.to_json()))
        }
        NetCommand::Paths { input } => {
            let paths = shortest_paths(&load_network(&input)?);
            let mut text = String::new();
            for (i, s) in paths.iter().enumerate() {
                text.push_str(&format!("input {}: {s}\n", i + 1));
            }
            emit(None, &text)
        }
    }
}

fn unitary(cmd: UnitaryCommand) -> CliResult {
    match cmd {
        UnitaryCommand::Haar { modes, seed, out } => {
            if modes == 0 {
                return Err(Failure::Usage("--modes must be positive".into()));
            }
            emit(out.as_deref(), &with_newline(UnitaryMatrix::seeded(modes, seed).to_json()))
        }
        UnitaryCommand::Compose { input, out } => {
            let u = load_network(&input)?.compose_unitary()?;
            emit(out.as_deref(), &with_newline(u.to_json()))
        }
    }
}

fn prob(unitary: &Path, input: &str, output: &str) -> CliResult {
    let u = load_unitary(unitary)?;
    let (s, t) = (parse_occupation(input)?, parse_occupation(output)?);
    let per = permanent_repeated(&u, &s, &t)?;
    let p = per.norm_sqr() / (s.factorial_product() * t.factorial_product());
    let cost = cost_estimate(&s, &t);
    emit(None, &format!("probability {p:?}\ntau_st {}\ntau_global {}\n", cost.tau_st, cost.tau_global))
}

fn sample(args: SampleArgs) -> CliResult {
    let input = parse_occupation(&args.input)?;
    let mut csv = Vec::new();
    if let Some(path) = &args.source.unitary {
        let u = load_unitary(path)?;
        let batch = sample_batch(&u, &input, args.shots, args.seed)?;
        write_csv(&batch.outcomes, &mut csv)?;
        if let Some(report) = &args.report {
            emit(Some(report), &with_newline(batch.report.to_json()))?;
        }
    } else if let Some(path) = &args.source.network {
        let net = load_network(path)?;
        let config = PipelineConfig {
            c: args.c,
            kappa: args.kappa,
            allow_nonstandard: args.allow_nonstandard,
            ..PipelineConfig::default()
        };
        let strategy = match args.strategy {
            StrategyArg::SingleBin => default_strategy(),
        };
        let sim = UnbalancedSimulation::prepare(&net, &input, strategy, &config)?;
        if args.shots == 0 {
            return Err(Failure::Usage("--shots must be positive".into()));
        }
        let shots = sim.run(args.shots, args.seed)?;
        let outcomes: Vec<_> = shots.iter().map(|s| s.system_outcome()).collect();
        write_csv(&outcomes, &mut csv)?;
        let certificate = with_newline(sim.certificate().to_json());
        match &args.certificate {
            Some(p) => emit(Some(p), &certificate)?,
            None => eprint!("{certificate}"),
        }
    }
    let text = String::from_utf8(csv).expect("CSV is ASCII");
    emit(args.out.as_deref(), &text)
}

fn dist(source: Source, input: &str, out: Option<&Path>) -> CliResult {
    let limits = DeskLimits::from_env()?;
    let s = parse_occupation(input)?;
    let distribution = if let Some(path) = &source.unitary {
        exact_distribution_with(&load_unitary(path)?, &s, &limits)?.into_entries()
    } else {
        let path = source.network.as_ref().expect("clap requires one source");
        dilated_lossy_distribution_with(&load_network(path)?, &s, &limits)?
    };
    emit(out, &with_newline(distribution_to_json(&distribution)))
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Net(cmd) => net(cmd),
        Command::Unitary(cmd) => unitary(cmd),
        Command::Prob { unitary, input, output } => prob(&unitary, &input, &output),
        Command::Sample(args) => sample(args),
        Command::Validate { suite, seed } => {
            let report = validate::run(suite.into(), seed)?;
            println!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
        Command::Bench { class, sizes, shots, seed, out } => {
            let rows = run_bench(class.into(), &sizes, shots, seed)?;
            let mut buf = Vec::new();
            write_bench_csv(&rows, &mut buf)?;
            emit(out.as_deref(), &String::from_utf8(buf).expect("CSV is ASCII"))
        }
        Command::Dist { source, input, out } => dist(source, &input, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
