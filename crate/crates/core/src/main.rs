use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use weakpar::derived::derived_constants;
use weakpar::output::{
    aligned, curve, curve_csv, fmt_f64, table, table_csv, to_json, ConstantReport,
};
use weakpar::solver::{optimal_constant_tol, ConstantForm, LawEntry, DEFAULT_TOL};
use weakpar::suite::{run_suite, SuiteConfig, DEFAULT_SLACK};
use weakpar::{classify, constant_bounds, DualConvention, Error, Law, Params};

const EXIT_VIOLATION: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "weakpar",
    version,
    about = "Optimal weak parallelogram constants for L^p spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal constant of a weak parallelogram law.
    Constant(ConstantArgs),
    /// Which laws hold at (p, r).
    Classify(PairArgs),
    /// Lower and upper bounds on C_{p,r} for 1 < p <= 2 <= r <= q.
    Bounds(PairArgs),
    /// CSV samples of h(t) on [0, t-max].
    Curve(CurveArgs),
    /// Run the seeded verification suites.
    Verify(VerifyArgs),
    /// Von Neumann-Jordan and James constant bounds and estimates.
    Derived(DerivedArgs),
    /// CSV of optimal constants over a range of r.
    Table(TableArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Lwp,
    Uwp,
}

impl From<LawArg> for Law {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::Lwp => Law::Lwp,
            LawArg::Uwp => Law::Uwp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Paper,
    Duality,
}

impl From<ConventionArg> for DualConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Paper => DualConvention::Paper,
            ConventionArg::Duality => DualConvention::Duality,
        }
    }
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r: f64,
    /// Defaults to the lower law when it holds, otherwise the upper law.
    #[arg(long, value_enum)]
    law: Option<LawArg>,
    #[arg(long, value_enum, default_value = "paper")]
    convention: ConventionArg,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    points: usize,
    #[arg(long, default_value_t = 0.999)]
    t_max: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    slack: f64,
    /// Test this constant instead of the optimal one.
    #[arg(long)]
    constant: Option<f64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DerivedArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r_min: f64,
    #[arg(long)]
    r_max: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "paper")]
    convention: ConventionArg,
}

enum Failure {
    Lib(Error),
    Usage(String),
    Violation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(EXIT_VIOLATION),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::NonConvergence { .. } => ExitCode::from(EXIT_NONCONVERGENCE),
                Error::Domain { .. }
                | Error::OutOfRegion { .. }
                | Error::LawNotGranted { .. }
                | Error::Unsupported(_) => ExitCode::from(EXIT_USAGE),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn describe(entry: Option<&LawEntry>) -> String {
    let Some(entry) = entry else {
        return "none".into();
    };
    let form = match entry.form {
        ConstantForm::Unit => "constant 1".to_string(),
        ConstantForm::MinimizedH { p, r } => {
            format!("C_{{{},{}}} (minimized h)", fmt_f64(p), fmt_f64(r))
        }
        ConstantForm::DualPower { base_p, base_r } => {
            format!(
                "power of C_{{{},{}}} (dual)",
                fmt_f64(base_p),
                fmt_f64(base_r)
            )
        }
    };
    let mut regions = vec![entry.region.as_str()];
    regions.extend(entry.also.iter().map(|r| r.as_str()));
    format!("{form} [{}]", regions.join(", "))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Constant(a) => {
            let params = Params::new(a.p, a.r)?;
            let law = match a.law {
                Some(l) => l.into(),
                None => {
                    let class = classify(a.p, a.r)?;
                    if class.lwp.is_some() {
                        Law::Lwp
                    } else if class.uwp.is_some() {
                        Law::Uwp
                    } else {
                        return Err(Failure::Usage(format!(
                            "no weak parallelogram law holds for p = {}, r = {}",
                            a.p, a.r
                        )));
                    }
                }
            };
            let convention = a.convention.into();
            let res = optimal_constant_tol(a.p, a.r, law, convention, a.tol)?;
            let rep = ConstantReport::new(&params, law, convention, res);
            if a.json {
                println!("{}", to_json(&rep));
            } else {
                print!("{}", rep.to_text());
            }
        }
        Command::Classify(a) => {
            let class = classify(a.p, a.r)?;
            if a.json {
                println!("{}", to_json(&class));
            } else {
                print!(
                    "{}",
                    aligned(&[
                        ("p", fmt_f64(class.p)),
                        ("r", fmt_f64(class.r)),
                        ("q", fmt_f64(class.q)),
                        ("rPrime", fmt_f64(class.r_prime)),
                        ("lwp", describe(class.lwp.as_ref())),
                        ("uwp", describe(class.uwp.as_ref())),
                    ])
                );
            }
        }
        Command::Bounds(a) => {
            let (lower, upper) = constant_bounds(a.p, a.r)?;
            if a.json {
                println!(
                    "{}",
                    to_json(
                        &serde_json::json!({ "p": a.p, "r": a.r, "lower": lower, "upper": upper })
                    )
                );
            } else {
                print!(
                    "{}",
                    aligned(&[("lower", fmt_f64(lower)), ("upper", fmt_f64(upper))])
                );
            }
        }
        Command::Curve(a) => {
            let rows = curve(a.p, a.r, a.points, a.t_max)?;
            print!("{}", curve_csv(&rows));
        }
        Command::Verify(a) => {
            let cfg = SuiteConfig {
                slack: a.slack,
                constant: a.constant,
                ..SuiteConfig::new(a.p, a.r, a.dim, a.samples, a.seed)
            };
            let rep = with_threads(a.threads, || run_suite(&cfg))??;
            if a.json {
                println!("{}", to_json(&rep));
            } else {
                let fields: Vec<(&str, String)> = rep
                    .suites
                    .iter()
                    .map(|s| {
                        let worst = s.worst_defect.map(fmt_f64).unwrap_or_else(|| "-".into());
                        let status = if s.passed { "pass" } else { "FAIL" };
                        (
                            s.name.as_str(),
                            format!("{status}  pairs {}  worst {worst}", s.pairs_tested),
                        )
                    })
                    .collect();
                print!("{}", aligned(&fields));
                if let Some(adj) = &rep.adjudication {
                    println!(
                        "extremal supremum {}: paper {}, duality {} ({:?})",
                        fmt_f64(adj.extremal_supremum),
                        fmt_f64(adj.paper.value),
                        fmt_f64(adj.duality.value),
                        adj.verdict
                    );
                }
            }
            if !rep.passed {
                return Err(Failure::Violation);
            }
        }
        Command::Derived(a) => {
            let rep = with_threads(a.threads, || {
                derived_constants(a.p, a.dim, a.samples, a.seed)
            })??;
            if a.json {
                println!("{}", to_json(&rep));
            } else {
                print!(
                    "{}",
                    aligned(&[
                        ("p", fmt_f64(rep.p)),
                        ("njEstimate", fmt_f64(rep.nj_estimate)),
                        ("njUpperBound", fmt_f64(rep.nj_upper_bound)),
                        ("jamesEstimate", fmt_f64(rep.james_estimate)),
                    ])
                );
                for b in &rep.james_upper_bounds {
                    let holds = match b.holds {
                        Some(true) => "holds",
                        Some(false) => "violated",
                        None => "-",
                    };
                    let tag = if b.asserted { "" } else { " (not asserted)" };
                    println!(
                        "  {:?} {} r={} C={} J<={} {holds}{tag}",
                        b.part,
                        b.law,
                        fmt_f64(b.r),
                        fmt_f64(b.constant),
                        fmt_f64(b.bound)
                    );
                }
            }
            if !rep.consistent() {
                return Err(Failure::Violation);
            }
        }
        Command::Table(a) => {
            let rows = table(a.p, a.r_min, a.r_max, a.steps, a.convention.into())?;
            print!("{}", table_csv(&rows));
        }
    }
    Ok(())
}
