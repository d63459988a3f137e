use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use cpda_core::analysis::{compare_table, cutset_bound, table_csv};
use cpda_core::constructions::{
    cutset_array_b, lemma1_pda, lemma2_pda, man_pda, GridParams, ManParams,
};
use cpda_core::json;
use cpda_core::pda::check_cpda;
use cpda_core::pda::check_pda;
use cpda_core::resolvable::{parallel_classes, ParallelClassPartition};
use cpda_core::simulator::{make_library, run_round, DemandPolicy};
use cpda_core::transform::{
    balance_by_replication, build_lsub1, build_lsub2, transform_to_cpda, TransformSpec,
};
use cpda_core::{Error, Rational};

#[derive(Parser)]
#[command(
    name = "cpda",
    version,
    about = "Placement delivery arrays for combination networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a PDA or C-PDA
    #[command(subcommand)]
    Build(Build),
    /// Check a PDA, or a C-PDA when the document carries labels
    Check {
        /// JSON file, or - for stdin
        input: String,
    },
    /// Parallel-class partition of the r-subsets of [h]
    Classes(ClassesArgs),
    /// Lift a PDA with C(h-1, r-1) columns to a C-PDA
    Transform {
        #[arg(long)]
        pda: String,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        classes: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equalize relay loads by replication
    Balance {
        #[arg(long)]
        cpda: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run placement, delivery and decoding byte for byte
    Sim(SimArgs),
    /// Closed-form bounds and comparison tables
    #[command(subcommand)]
    Analyze(Analyze),
}

#[derive(Subcommand)]
enum Build {
    Man {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Lemma1 {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Lemma2 {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    CutsetB {
        #[arg(long)]
        h: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Lsub1(LsubArgs),
    Lsub2(LsubArgs),
}

#[derive(Args)]
struct LsubArgs {
    #[arg(long)]
    h: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    classes: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct ClassesArgs {
    #[command(subcommand)]
    action: Option<ClassesAction>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ClassesAction {
    /// Validate a partition file
    Check { input: String },
}

#[derive(Args)]
struct SimArgs {
    /// Scheme JSON, or - for stdin (alternative to --cpda)
    input: Option<String>,
    #[arg(long, conflicts_with = "input")]
    cpda: Option<String>,
    #[arg(long)]
    n_files: usize,
    #[arg(long)]
    file_bytes: usize,
    #[arg(long, default_value = "exhaustive")]
    demands: DemandSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone)]
enum DemandSpec {
    Exhaustive,
    Random(usize),
}

impl FromStr for DemandSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "exhaustive" {
            return Ok(DemandSpec::Exhaustive);
        }
        s.strip_prefix("random:")
            .and_then(|n| n.parse().ok())
            .filter(|&n: &usize| n > 0)
            .map(DemandSpec::Random)
            .ok_or_else(|| format!("expected exhaustive or random:COUNT, got {s:?}"))
    }
}

#[derive(Subcommand)]
enum Analyze {
    Cutset {
        #[arg(long)]
        h: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n: usize,
        /// Cache size, an integer or a fraction a/b
        #[arg(long)]
        m: Rational,
    },
    Table {
        #[arg(long)]
        h: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n: usize,
        /// q values as q:LO..HI (inclusive)
        #[arg(long, default_value = "q:2..6")]
        grid: QGrid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone)]
struct QGrid(Vec<usize>);

impl FromStr for QGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected q:LO..HI, got {s:?}");
        let (lo, hi) = s
            .strip_prefix("q:")
            .and_then(|r| r.split_once(".."))
            .ok_or_else(bad)?;
        let lo: usize = lo.parse().map_err(|_| bad())?;
        let hi: usize = hi.parse().map_err(|_| bad())?;
        if lo < 2 || hi < lo {
            return Err(bad());
        }
        Ok(QGrid((lo..=hi).collect()))
    }
}

/// A failure reported as exit status 1.
struct Failure {
    error: Error,
    context: &'static str,
}

impl Failure {
    fn new(context: &'static str) -> impl FnOnce(Error) -> Failure {
        move |error| Failure { error, context }
    }
}

type Outcome = Result<(), Failure>;

fn read_input(source: &str, context: &'static str) -> Result<String, Failure> {
    let mut text = String::new();
    let read = if source == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(source).map(|t| text = t)
    };
    read.map_err(|e| Failure {
        error: Error::MalformedArray(format!("cannot read {source}: {e}")),
        context,
    })?;
    Ok(text)
}

fn write_output(out: Option<&Path>, body: &str, context: &'static str) -> Outcome {
    let body = if body.ends_with('\n') {
        body.to_owned()
    } else {
        format!("{body}\n")
    };
    let written = match out {
        Some(path) if path != Path::new("-") => fs::write(path, body),
        _ => io::stdout().lock().write_all(body.as_bytes()),
    };
    written.map_err(|e| Failure {
        error: Error::Internal(format!("cannot write output: {e}")),
        context,
    })
}

fn load_partition(
    path: Option<&str>,
    h: usize,
    r: usize,
    context: &'static str,
) -> Result<ParallelClassPartition, Failure> {
    match path {
        None => parallel_classes(h, r).map_err(Failure::new(context)),
        Some(p) => {
            let partition =
                json::parse_partition(&read_input(p, context)?).map_err(Failure::new(context))?;
            if (partition.h(), partition.r()) != (h, r) {
                return Err(Failure {
                    error: Error::InvalidPartition(format!(
                        "partition is for ({}, {}), expected ({h}, {r})",
                        partition.h(),
                        partition.r()
                    )),
                    context,
                });
            }
            Ok(partition)
        }
    }
}

fn build(cmd: Build) -> Outcome {
    const CTX: &str = "build";
    let fail = Failure::new(CTX);
    let (body, out) = match cmd {
        Build::Man { k, t, out } => (
            json::pda_to_json(&man_pda(ManParams { num_users: k, t }).map_err(fail)?),
            out,
        ),
        Build::Lemma1 { q, m, out } => (
            json::pda_to_json(&lemma1_pda(GridParams { q, m }).map_err(fail)?),
            out,
        ),
        Build::Lemma2 { q, m, out } => (
            json::pda_to_json(&lemma2_pda(GridParams { q, m }).map_err(fail)?),
            out,
        ),
        Build::CutsetB { h, r, out } => (
            json::scheme_to_json(&cutset_array_b(h, r).map_err(fail)?),
            out,
        ),
        Build::Lsub1(a) => {
            let p = load_partition(a.classes.as_deref(), a.h, a.r, CTX)?;
            (
                json::scheme_to_json(&build_lsub1(a.h, a.r, a.q, &p).map_err(fail)?.scheme),
                a.out,
            )
        }
        Build::Lsub2(a) => {
            let p = load_partition(a.classes.as_deref(), a.h, a.r, CTX)?;
            (
                json::scheme_to_json(&build_lsub2(a.h, a.r, a.q, &p).map_err(fail)?.scheme),
                a.out,
            )
        }
    };
    write_output(out.as_deref(), &body, CTX)
}

fn check(input: &str) -> Outcome {
    const CTX: &str = "check";
    let doc = json::parse_document(&read_input(input, CTX)?).map_err(Failure::new(CTX))?;
    let array = doc.array().map_err(Failure::new(CTX))?;
    let report = check_pda(&array);
    if !report.is_valid {
        write_output(None, &json::pda_report_to_json(&report), CTX)?;
        return Err(Failure {
            error: Error::InvalidPda(format!(
                "{} violation(s), first: {}",
                report.violations.len(),
                report.violations[0]
            )),
            context: CTX,
        });
    }
    if doc.labels.is_none() {
        return write_output(None, &json::pda_report_to_json(&report), CTX);
    }
    let scheme = doc.scheme().map_err(Failure::new(CTX))?;
    let (h, r) = scheme.network();
    let cpda = check_cpda(&scheme, h, r).map_err(Failure::new(CTX))?;
    write_output(None, &json::cpda_report_to_json(&cpda, h, r), CTX)
}

fn classes(args: ClassesArgs) -> Outcome {
    const CTX: &str = "classes";
    match args.action {
        Some(ClassesAction::Check { input }) => {
            let p = json::parse_partition(&read_input(&input, CTX)?).map_err(Failure::new(CTX))?;
            let body = format!(
                "{{\"valid\":true,\"h\":{},\"r\":{},\"classes\":{}}}",
                p.h(),
                p.r(),
                p.classes().len()
            );
            write_output(None, &body, CTX)
        }
        None => {
            let missing = |flag: &str| Failure {
                error: Error::ParamOutOfRange(format!("--{flag} is required")),
                context: CTX,
            };
            let h = args.h.ok_or_else(|| missing("h"))?;
            let r = args.r.ok_or_else(|| missing("r"))?;
            let p = parallel_classes(h, r).map_err(Failure::new(CTX))?;
            write_output(args.out.as_deref(), &json::partition_to_json(&p), CTX)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Build(b) => build(b),
        Command::Check { input } => check(&input),
        Command::Classes(a) => classes(a),
        Command::Transform {
            pda,
            h,
            r,
            classes,
            out,
        } => {
            const CTX: &str = "transform";
            let base = json::parse_pda(&read_input(&pda, CTX)?).map_err(Failure::new(CTX))?;
            let partition = load_partition(classes.as_deref(), h, r, CTX)?;
            let spec = TransformSpec::new(base, h, r, partition).map_err(Failure::new(CTX))?;
            let scheme = transform_to_cpda(&spec).map_err(Failure::new(CTX))?;
            write_output(out.as_deref(), &json::scheme_to_json(&scheme), CTX)
        }
        Command::Balance { cpda, out } => {
            const CTX: &str = "balance";
            let scheme = json::parse_cpda(&read_input(&cpda, CTX)?).map_err(Failure::new(CTX))?;
            let (h, _) = scheme.network();
            let balanced = balance_by_replication(&scheme, h).map_err(Failure::new(CTX))?;
            write_output(out.as_deref(), &json::balanced_to_json(&balanced), CTX)
        }
        Command::Sim(a) => {
            const CTX: &str = "sim";
            let source = a.input.or(a.cpda).unwrap_or_else(|| "-".into());
            let scheme =
                json::parse_balanced(&read_input(&source, CTX)?).map_err(Failure::new(CTX))?;
            let net = make_library(a.n_files, a.file_bytes as u64 * 8, a.seed)
                .map_err(Failure::new(CTX))?;
            let policy = match a.demands {
                DemandSpec::Exhaustive => DemandPolicy::Exhaustive,
                DemandSpec::Random(count) => DemandPolicy::Random {
                    count,
                    seed: a.seed,
                },
            };
            let report = run_round(&scheme, &net, &policy).map_err(Failure::new(CTX))?;
            let body = json::sim_report_to_json(&report);
            if let Some(path) = &a.report {
                write_output(Some(path), &body, CTX)?;
            }
            write_output(None, &body, CTX)?;
            if let Some(f) = report.failures.first() {
                return Err(Failure {
                    error: Error::Internal(format!(
                        "{} decoding failure(s), first: demand {} user {}: {}",
                        report.failures.len(),
                        f.demand_index + 1,
                        f.user,
                        f.message
                    )),
                    context: CTX,
                });
            }
            Ok(())
        }
        Command::Analyze(Analyze::Cutset { h, r, n, m }) => {
            const CTX: &str = "analyze";
            let bound = cutset_bound(h, r, n, m).map_err(Failure::new(CTX))?;
            write_output(None, &json::bound_to_json(&bound), CTX)
        }
        Command::Analyze(Analyze::Table { h, r, n, grid, out }) => {
            const CTX: &str = "analyze";
            let rows = compare_table(h, r, n, &grid.0).map_err(Failure::new(CTX))?;
            write_output(out.as_deref(), &table_csv(&rows), CTX)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json::error_to_json(&f.error, f.context));
            ExitCode::from(1)
        }
    }
}
