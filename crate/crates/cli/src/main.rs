use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use schmearlab::actions::{displacement, pair_functionals, ActionSpec};
use schmearlab::exactnum::QuadExt;
use schmearlab::freegroup::Ambient;
use schmearlab::limsetmap::find_obstruction;
use schmearlab::schmear::{
    average_families, fiber_convexity_check, sample_schmear, write_schmear_csv,
};
use schmearlab::sequences::{limit_in_boundary, LimitConfig, SharedSequence, Target};
use schmearlab::spaces::{diamond_distance, diamond_distance_oracle};
use schmearlab::syntax::{parse_element, parse_family, parse_family_file};
use schmearlab::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "schmearlab",
    version,
    about = "Slopes, boundary limits and schmears for F_m x Z^d actions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Schedule {
    /// `lo:hi` for the powers 2^lo … 2^hi, or a comma-separated list.
    #[arg(long, default_value = "4:12")]
    schedule: String,
    /// Cauchy tolerance.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Displacement and slope vector of one element.
    Slope {
        #[arg(long)]
        action: PathBuf,
        /// Second action; adds ν and M for the diagonal action.
        #[arg(long)]
        action2: Option<PathBuf>,
        #[arg(long)]
        element: String,
        #[command(flatten)]
        output: Output,
    },
    /// Limit of a sequence family in the boundary.
    Limit {
        /// Action spec, or `{"diagonal": [spec, spec]}`.
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        family: String,
        #[command(flatten)]
        schedule: Schedule,
        #[command(flatten)]
        output: Output,
    },
    /// Search for a pair of families obstructing a limset map.
    Witness {
        #[arg(long)]
        action1: PathBuf,
        #[arg(long)]
        action2: PathBuf,
        /// One family per line.
        #[arg(long)]
        families: PathBuf,
        #[command(flatten)]
        schedule: Schedule,
        #[command(flatten)]
        output: Output,
    },
    /// Orbit point cloud of the diagonal action.
    Schmear {
        #[arg(long)]
        action1: PathBuf,
        #[arg(long)]
        action2: PathBuf,
        #[arg(long, default_value_t = 8)]
        radius: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        output: Output,
    },
    /// Average two families in a common fiber.
    Average {
        #[arg(long)]
        action1: PathBuf,
        #[arg(long)]
        action2: PathBuf,
        #[arg(long)]
        fam_a: String,
        #[arg(long)]
        fam_b: String,
        /// Tolerance for the averaging checks.
        #[arg(long, default_value_t = 0.02)]
        check_tol: f64,
        #[command(flatten)]
        schedule: Schedule,
        #[command(flatten)]
        output: Output,
    },
    /// Dyadic convexity of a fiber spanned by seed families.
    Convexity {
        #[arg(long)]
        action1: PathBuf,
        #[arg(long)]
        action2: PathBuf,
        /// Seed families, one per line.
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long, default_value_t = 2)]
        rounds: u32,
        #[arg(long, default_value_t = 1e-2)]
        fiber_tol: f64,
        #[command(flatten)]
        schedule: Schedule,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form diamond distance against discretized shortest paths.
    Oracle {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 64)]
        mesh: usize,
        #[command(flatten)]
        output: Output,
    },
}

/// Error with the input it came from.
struct Failure {
    context: Option<String>,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            context: None,
            error,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn in_file(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |error| Failure {
        context: Some(path.display().to_string()),
        error,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| in_file(path)(e.into()))
}

fn load_action(path: &Path) -> Result<ActionSpec> {
    ActionSpec::from_json(&read(path)?).map_err(in_file(path))
}

fn load_target(path: &Path) -> Result<Target> {
    Target::from_json(&read(path)?).map_err(in_file(path))
}

fn load_families(path: &Path, ambient: Ambient) -> Result<Vec<schmearlab::SequenceFamily>> {
    parse_family_file(&read(path)?, ambient).map_err(in_file(path))
}

fn config(s: &Schedule) -> Result<LimitConfig> {
    let schedule = if let Some((lo, hi)) = s.schedule.split_once(':') {
        let bad = || Error::InvalidSchedule(format!("malformed range `{}`", s.schedule));
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if hi > 40 || lo > hi {
            return Err(bad().into());
        }
        (lo..=hi).map(|k| 1u64 << k).collect()
    } else {
        s.schedule
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| Error::InvalidSchedule(format!("malformed entry `{x}`")))
            })
            .collect::<std::result::Result<Vec<u64>, _>>()?
    };
    let cfg = LimitConfig {
        schedule,
        tol: s.tol,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'a str,
    command: &'a str,
    report: T,
}

fn emit_bytes(output: &Output, bytes: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, bytes).map_err(|e| in_file(path)(e.into())),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::from(e).into()),
    }
}

fn emit<T: Serialize>(output: &Output, command: &str, report: T) -> Result<()> {
    let env = Envelope {
        version: VERSION,
        command,
        report,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(Error::from)?;
    text.push('\n');
    emit_bytes(output, text.as_bytes())
}

#[derive(Serialize)]
struct Exact {
    exact: String,
    numeric: f64,
}

impl From<&QuadExt> for Exact {
    fn from(x: &QuadExt) -> Self {
        Exact {
            exact: x.to_string(),
            numeric: x.to_f64(),
        }
    }
}

#[derive(Serialize)]
struct SlopeReport {
    element: String,
    horizontal: Exact,
    vertical: Vec<Exact>,
    distance_sq: Exact,
    m: Vec<Exact>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagonal: Option<DiagonalSlope>,
}

#[derive(Serialize)]
struct DiagonalSlope {
    nu: Exact,
    nu_inv: Exact,
    slope_sq: Exact,
    slope: f64,
    m2: Vec<Exact>,
}

#[derive(Serialize)]
struct OracleReport {
    word: String,
    mesh: usize,
    closed_form: Exact,
    oracle: f64,
    delta: f64,
}

#[derive(Serialize)]
struct WitnessReport {
    candidates: Vec<String>,
    found: bool,
    witness: Option<schmearlab::limsetmap::ObstructionWitness>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Slope {
            action,
            action2,
            element,
            output,
        } => {
            let a1 = load_action(&action)?;
            let g = parse_element(&element, a1.ambient())?;
            let d = displacement(&a1, &g)?;
            let diagonal = match action2 {
                Some(p) => {
                    let a2 = load_action(&p)?;
                    let f = pair_functionals(&a1, &a2, &g)?;
                    Some(DiagonalSlope {
                        nu_inv: (&f.nu.recip()?).into(),
                        nu: (&f.nu).into(),
                        slope: f.m_sq.to_f64().sqrt(),
                        slope_sq: (&f.m_sq).into(),
                        m2: f.m2.iter().map(Exact::from).collect(),
                    })
                }
                None => None,
            };
            let report = SlopeReport {
                element: g.to_string(),
                horizontal: (&d.horizontal).into(),
                vertical: d.vertical.iter().map(Exact::from).collect(),
                distance_sq: (&d.dist_sq()).into(),
                m: d.slope_vector().iter().map(Exact::from).collect(),
                diagonal,
            };
            emit(&output, "slope", report)
        }
        Command::Limit {
            action,
            family,
            schedule,
            output,
        } => {
            let target = load_target(&action)?;
            let cfg = config(&schedule)?;
            let fam = parse_family(&family, target.ambient())?;
            emit(&output, "limit", limit_in_boundary(&fam, &target, &cfg)?)
        }
        Command::Witness {
            action1,
            action2,
            families,
            schedule,
            output,
        } => {
            let (t1, t2) = (load_target(&action1)?, load_target(&action2)?);
            let cfg = config(&schedule)?;
            let fams = load_families(&families, t1.ambient())?;
            let witness = find_obstruction(&t1, &t2, &fams, &cfg)?;
            let report = WitnessReport {
                candidates: fams.iter().map(|f| f.label().to_string()).collect(),
                found: witness.is_some(),
                witness,
            };
            emit(&output, "witness", report)
        }
        Command::Schmear {
            action1,
            action2,
            radius,
            format,
            output,
        } => {
            let (a1, a2) = (load_action(&action1)?, load_action(&action2)?);
            let points = sample_schmear(&a1, &a2, radius)?;
            match format {
                Format::Json => emit(&output, "schmear", points),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_schmear_csv(&points, a1.ambient().d, &mut buf)?;
                    emit_bytes(&output, &buf)
                }
            }
        }
        Command::Average {
            action1,
            action2,
            fam_a,
            fam_b,
            check_tol,
            schedule,
            output,
        } => {
            let (a1, a2) = (load_action(&action1)?, load_action(&action2)?);
            let cfg = config(&schedule)?;
            let amb = a1.ambient();
            let fa: SharedSequence = Arc::new(parse_family(&fam_a, amb)?);
            let fb: SharedSequence = Arc::new(parse_family(&fam_b, amb)?);
            let out = average_families(fa, fb, &a1, &a2, &cfg, check_tol)?;
            emit(&output, "average", out.report)
        }
        Command::Convexity {
            action1,
            action2,
            seeds,
            rounds,
            fiber_tol,
            schedule,
            output,
        } => {
            let (a1, a2) = (load_action(&action1)?, load_action(&action2)?);
            let cfg = config(&schedule)?;
            let seeds: Vec<SharedSequence> = load_families(&seeds, a1.ambient())?
                .into_iter()
                .map(|f| Arc::new(f) as SharedSequence)
                .collect();
            let report = fiber_convexity_check(&a1, &a2, &seeds, rounds, &cfg, fiber_tol)?;
            emit(&output, "convexity", report)
        }
        Command::Oracle { word, mesh, output } => {
            let g = parse_element(&word, Ambient::new(2, 0)?)?;
            let exact = diamond_distance(g.word())?;
            let oracle = diamond_distance_oracle(g.word(), mesh)?;
            let report = OracleReport {
                word: g.to_string(),
                mesh,
                delta: oracle - exact.to_f64(),
                closed_form: (&exact).into(),
                oracle,
            };
            emit(&output, "oracle", report)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    let usage = e.is_usage()
        || matches!(
            e,
            Error::Io(_)
                | Error::InvalidSchedule(_)
                | Error::RadiusTooLarge { .. }
                | Error::WordTooLong { .. }
                | Error::MeshTooCoarse(_)
        );
    if usage {
        2
    } else {
        1
    }
}

fn init_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("SCHMEARLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SCHMEARLAB_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { context, error }) => {
            match context {
                Some(c) if matches!(error, Error::Parse { .. }) => eprintln!("error: {c}:{error}"),
                Some(c) => eprintln!("error: {c}: {error}"),
                None => eprintln!("error: {error}"),
            }
            ExitCode::from(exit_code(&error))
        }
    }
}
