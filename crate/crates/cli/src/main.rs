use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use twinsieve_core::analytic;
use twinsieve_core::bias::{self, BiasSample, Subject, Type1Run, Type2Run, Type3Run};
use twinsieve_core::legendre;
use twinsieve_core::progressions;
use twinsieve_core::sieve::{PrimeStore, DEFAULT_SEGMENT_SIZE};
use twinsieve_core::Error as CoreError;

/// Builds above this limit take long enough that they must be requested
/// explicitly with --i-have-time.
const LONG_RUN_GATE: u64 = 2_000_000_000;

/// Snapshot points for bias tables; the requested limit is always appended.
const TABLE_XS: [u64; 7] = [
    10_000_000,
    50_000_000,
    100_000_000,
    500_000_000,
    1_000_000_000,
    5_000_000_000,
    10_000_000_000,
];

#[derive(Parser)]
#[command(
    name = "twinsieve",
    version,
    about = "Twin prime sieves, counts, constants, and bias scans"
)]
struct Cli {
    /// Worker threads for sieving and scans (default: all cores)
    #[arg(long, global = true, env = "TWINSIEVE_THREADS")]
    threads: Option<usize>,

    /// Sieve segment size in bytes of odd-bitmap coverage
    #[arg(long, global = true)]
    segment_size: Option<u64>,

    /// Write primary output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Acknowledge that limits above 2e9 can run for hours
    #[arg(long, global = true)]
    i_have_time: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a prime/twin sieve and report pi(x) and pi2(x)
    Sieve(SieveArgs),
    /// List first members of twin pairs up to a limit
    Twins(TwinsArgs),
    /// Evaluate the twin totient of one integer
    Phi2(Phi2Args),
    /// Count primes or twin pairs by sieve or by the divisor formula
    Count(CountArgs),
    /// Evaluate the twin prime constant along several routes
    Constants(ConstantsArgs),
    /// Stream a residue, transition, or gap bias scan
    Bias(BiasArgs),
    /// Partial Brun sums split by residue class
    Brun(BrunArgs),
    /// Search for arithmetic progressions of twin pairs
    Ap(ApArgs),
    /// Run the internal consistency gate
    Check(CheckArgs),
}

#[derive(Args)]
struct SieveArgs {
    /// Sieve everything up to this bound
    #[arg(long, required_unless_present = "load")]
    limit: Option<u64>,
    /// Write the finished sieve to this file
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Read a previously dumped sieve instead of building one
    #[arg(long, conflicts_with = "dump")]
    load: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct TwinsArgs {
    #[arg(long)]
    limit: u64,
}

#[derive(Args)]
struct Phi2Args {
    n: u64,
}

#[derive(Args)]
struct CountArgs {
    x: u64,
    #[arg(long, value_enum, default_value_t = CountMethod::Sieve)]
    method: CountMethod,
    #[arg(long, value_enum, default_value_t = SubjectArg::Twins)]
    subject: SubjectArg,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Series length and prime bound for every route
    #[arg(long, default_value_t = 1_000_000)]
    depth: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct BiasArgs {
    /// 1 = residue race, 2 = consecutive transitions, 3 = gap successor
    #[arg(long = "type", value_parser = clap::value_parser!(u8).range(1..=3))]
    kind: u8,
    #[arg(long, value_enum, default_value_t = SubjectArg::Twins)]
    subject: SubjectArg,
    #[arg(long, default_value_t = 4)]
    q: u64,
    /// Leading class for the type 1 race
    #[arg(long, default_value_t = 3)]
    a_i: u64,
    /// Trailing class for the type 1 race
    #[arg(long, default_value_t = 1)]
    a_j: u64,
    #[arg(long)]
    limit: u64,
    /// Record a sample every this many elements (default 50 primes, 25 twins)
    #[arg(long)]
    sample_every: Option<u64>,
    /// Power of ln x in the normalized deviation (default 1 primes, 2 twins)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    log_power: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Reuse or create a sieve dump here to skip rebuilding on reruns
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct BrunArgs {
    #[arg(long)]
    limit: u64,
    #[arg(long, default_value_t = 4)]
    q: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct ApArgs {
    /// Minimum progression length to report
    #[arg(long)]
    length: u64,
    /// Last members must stay at or below this bound
    #[arg(long, default_value_t = 100_000)]
    limit: u64,
}

#[derive(Args)]
struct CheckArgs {
    /// Sieve bound for the residue class and upper bound checks
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
    /// Check every modulus from 3 up to this one
    #[arg(long, default_value_t = 200)]
    q_max: u64,
    /// Also print the observed twin distribution over classes mod this q
    #[arg(long)]
    equidistribution: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMethod {
    Sieve,
    Legendre,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubjectArg {
    Primes,
    Twins,
}

impl SubjectArg {
    fn to_subject(self) -> Subject {
        match self {
            SubjectArg::Primes => Subject::Primes,
            SubjectArg::Twins => Subject::Twins,
        }
    }
}

enum CliError {
    Validation(String),
    Internal(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ZeroInput
            | CoreError::OutOfRange { .. }
            | CoreError::RankOutOfRange { .. }
            | CoreError::NotCoprime { .. }
            | CoreError::InvalidArgument(_)
            | CoreError::TermBudget { .. }
            | CoreError::BadDump(_) => CliError::Validation(e.to_string()),
            CoreError::Io(_)
            | CoreError::OutOfMemory { .. }
            | CoreError::NonAdmissibleClassViolation { .. }
            | CoreError::BoundViolation { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let pool = match cli.threads {
        Some(0) => return Err(CliError::Validation("--threads must be positive".into())),
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?,
        ),
        None => None,
    };
    let mut out: Box<dyn Write + Send> = match &cli.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout()),
    };
    let run_cmd = |cli: &Cli, out: &mut dyn Write| match &cli.command {
        Command::Sieve(args) => cmd_sieve(cli, args, out),
        Command::Twins(args) => cmd_twins(cli, args, out),
        Command::Phi2(args) => cmd_phi2(args, out),
        Command::Count(args) => cmd_count(cli, args, out),
        Command::Constants(args) => cmd_constants(args, out),
        Command::Bias(args) => cmd_bias(cli, args, out),
        Command::Brun(args) => cmd_brun(cli, args, out),
        Command::Ap(args) => cmd_ap(cli, args, out),
        Command::Check(args) => cmd_check(cli, args, out),
    };
    match pool {
        Some(pool) => pool.install(|| run_cmd(&cli, out.as_mut())),
        None => run_cmd(&cli, out.as_mut()),
    }
}

fn segment_size(cli: &Cli) -> u64 {
    cli.segment_size.unwrap_or(DEFAULT_SEGMENT_SIZE)
}

fn gate_long_run(cli: &Cli, limit: u64) -> Result<(), CliError> {
    if limit > LONG_RUN_GATE && !cli.i_have_time {
        return Err(CliError::Validation(format!(
            "limit {limit} exceeds {LONG_RUN_GATE}; pass --i-have-time to run anyway"
        )));
    }
    Ok(())
}

/// Builds a sieve covering `limit`, optionally round-tripping through a
/// checkpoint file so interrupted long runs can resume from disk.
fn build_store(
    cli: &Cli,
    limit: u64,
    checkpoint: Option<&PathBuf>,
) -> Result<PrimeStore, CliError> {
    if let Some(path) = checkpoint {
        if path.exists() {
            let store = PrimeStore::load(path)?;
            if store.limit() >= limit {
                return Ok(store);
            }
            eprintln!("checkpoint covers {} < {limit}; rebuilding", store.limit());
        }
        let store = PrimeStore::build_with(limit, segment_size(cli))?;
        store.dump(path)?;
        eprintln!("checkpoint written to {}", path.display());
        return Ok(store);
    }
    Ok(PrimeStore::build_with(limit, segment_size(cli))?)
}

fn cmd_sieve(cli: &Cli, args: &SieveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let store = match &args.load {
        Some(path) => PrimeStore::load(path)?,
        None => {
            let limit = args.limit.expect("clap enforces --limit without --load");
            gate_long_run(cli, limit)?;
            PrimeStore::build_with(limit, segment_size(cli))?
        }
    };
    let limit = store.limit();
    let pi = store.pi(limit)?;
    let pi2 = store.twin_firsts().pi2(limit)?;
    if let Some(path) = &args.dump {
        store.dump(path)?;
        eprintln!("sieve dumped to {}", path.display());
    }
    match args.format {
        Format::Json => {
            let v = json!({
                "limit": limit,
                "segment_size": store.segment_size(),
                "pi": pi,
                "pi2": pi2,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        _ => {
            writeln!(out, "limit = {limit}")?;
            writeln!(out, "segment_size = {}", store.segment_size())?;
            writeln!(out, "pi = {pi}")?;
            writeln!(out, "pi2 = {pi2}")?;
        }
    }
    Ok(())
}

fn cmd_twins(cli: &Cli, args: &TwinsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    gate_long_run(cli, args.limit)?;
    let store = PrimeStore::build_with(args.limit, segment_size(cli))?;
    let twins = store.twin_firsts();
    let line: Vec<String> = twins.firsts().iter().map(|p| p.to_string()).collect();
    writeln!(out, "{}", line.join(" "))?;
    Ok(())
}

fn cmd_phi2(args: &Phi2Args, out: &mut dyn Write) -> Result<(), CliError> {
    let f = twinsieve_core::arith::FactoredInteger::factorize(args.n)?;
    writeln!(out, "{}", f.phi2())?;
    Ok(())
}

fn cmd_count(cli: &Cli, args: &CountArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let x = args.x;
    match (args.method, args.subject) {
        (CountMethod::Sieve, SubjectArg::Twins) => {
            gate_long_run(cli, x)?;
            let store = PrimeStore::build_with(x, segment_size(cli))?;
            writeln!(out, "pi2({x}) = {}", store.twin_firsts().pi2(x)?)?;
        }
        (CountMethod::Sieve, SubjectArg::Primes) => {
            gate_long_run(cli, x)?;
            let store = PrimeStore::build_with(x, segment_size(cli))?;
            writeln!(out, "pi({x}) = {}", store.pi(x)?)?;
        }
        (CountMethod::Legendre, SubjectArg::Twins) => {
            let z = legendre::twin_sieve_bound(x);
            let pairs = legendre::enumerate_pairs(z).map_err(remap_budget(x))?;
            let value = legendre::eval_pairs(x, &pairs);
            writeln!(out, "pi2({x}) - pi2({z}) = {value}")?;
            writeln!(out, "terms = {}", pairs.len())?;
        }
        (CountMethod::Legendre, SubjectArg::Primes) => {
            let z = twinsieve_core::arith::isqrt(x);
            let value = legendre::legendre_pi(x)?;
            writeln!(out, "pi({x}) - pi({z}) + 1 = {value}")?;
        }
    }
    Ok(())
}

fn remap_budget(x: u64) -> impl Fn(CoreError) -> CoreError {
    move |e| match e {
        CoreError::TermBudget {
            estimated_terms,
            cap,
            ..
        } => CoreError::TermBudget {
            x,
            estimated_terms,
            cap,
        },
        other => other,
    }
}

fn cmd_constants(args: &ConstantsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let depth = args.depth;
    let reports = [
        analytic::twin_constant_product(depth.max(3))?,
        analytic::twin_constant_series(depth)?,
        analytic::twin_constant_reciprocal_series(depth)?,
        analytic::primorial_ratio(depth.max(2))?,
    ];
    match args.format {
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "method": r.method.tag(),
                        "depth": r.terms_or_plimit,
                        "value": r.value,
                    })
                })
                .collect();
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&Value::Array(rows))?
            )?;
        }
        _ => {
            for r in &reports {
                writeln!(
                    out,
                    "{} (depth {}): {}",
                    r.method.tag(),
                    r.terms_or_plimit,
                    r.value
                )?;
            }
        }
    }
    Ok(())
}

/// Snapshot points for a scan: every standard table x within range, then the
/// requested limit itself.
fn thresholds(limit: u64) -> Vec<u64> {
    let mut xs: Vec<u64> = TABLE_XS.iter().copied().filter(|&x| x < limit).collect();
    xs.push(limit);
    xs
}

fn cmd_bias(cli: &Cli, args: &BiasArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let subject = args.subject.to_subject();
    let margin = subject.recommended_margin();
    gate_long_run(cli, args.limit)?;
    let store = build_store(
        cli,
        args.limit.saturating_add(margin),
        args.checkpoint.as_ref(),
    )?;
    let xs = thresholds(args.limit);
    let started = Instant::now();
    match args.kind {
        1 => {
            let run = bias::type1_series(
                &store,
                args.limit,
                args.q,
                args.a_i,
                args.a_j,
                args.sample_every,
                args.log_power,
                subject,
                &xs,
            )?;
            eprintln!("scan finished in {:.1}s", started.elapsed().as_secs_f64());
            emit_type1(args, subject, &run, out)?;
        }
        2 => {
            let run =
                bias::type2_series(&store, args.limit, args.q, args.sample_every, subject, &xs)?;
            eprintln!("scan finished in {:.1}s", started.elapsed().as_secs_f64());
            emit_type2(args, subject, &run, out)?;
        }
        3 => {
            let run = bias::type3_series(&store, args.limit, args.sample_every, subject, &xs)?;
            eprintln!("scan finished in {:.1}s", started.elapsed().as_secs_f64());
            emit_type3(args, subject, &run, out)?;
        }
        _ => unreachable!("clap bounds --type"),
    }
    Ok(())
}

fn count_prefix(subject: Subject) -> &'static str {
    match subject {
        Subject::Primes => "pi",
        Subject::Twins => "pi2",
    }
}

fn delta_prefix(subject: Subject) -> &'static str {
    match subject {
        Subject::Primes => "delta",
        Subject::Twins => "delta2",
    }
}

fn type1_row_json(args: &BiasArgs, subject: Subject, s: &BiasSample) -> Value {
    let cp = count_prefix(subject);
    let dp = delta_prefix(subject);
    let mut m = Map::new();
    m.insert("x".into(), json!(s.x));
    m.insert(format!("{cp}_{}_{}", args.q, args.a_i), json!(s.count_i));
    m.insert(format!("{cp}_{}_{}", args.q, args.a_j), json!(s.count_j));
    m.insert(format!("{cp}_total"), json!(s.total));
    m.insert(dp.to_string(), json!(s.delta));
    m.insert(format!("{dp}_bar"), json!(s.delta_bar));
    m.insert(format!("share_{}", args.a_i), json!(s.delta_i));
    m.insert(format!("share_{}", args.a_j), json!(s.delta_j));
    Value::Object(m)
}

fn emit_type1(
    args: &BiasArgs,
    subject: Subject,
    run: &Type1Run,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match args.format {
        Format::Csv => {
            writeln!(out, "x,subject,q,stat,class_or_pair,value")?;
            let rows = run.samples.iter().chain(run.table_rows.iter());
            for s in rows {
                let base = (s.x, subject.tag(), args.q);
                csv_row(out, base, "count", &args.a_i.to_string(), s.count_i)?;
                csv_row(out, base, "count", &args.a_j.to_string(), s.count_j)?;
                csv_row(out, base, "count", "all", s.total)?;
                csv_row(
                    out,
                    base,
                    "delta",
                    &format!("{}-{}", args.a_i, args.a_j),
                    s.delta,
                )?;
                csv_row(
                    out,
                    base,
                    "delta_bar",
                    &format!("{}-{}", args.a_i, args.a_j),
                    s.delta_bar,
                )?;
                csv_row(out, base, "share", &args.a_i.to_string(), s.delta_i)?;
                csv_row(out, base, "share", &args.a_j.to_string(), s.delta_j)?;
            }
        }
        _ => {
            let last = run.table_rows.last().expect("limit is always a table row");
            let mut top = match type1_row_json(args, subject, last) {
                Value::Object(m) => m,
                _ => unreachable!(),
            };
            top.insert("type".into(), json!(1));
            top.insert("subject".into(), json!(subject.tag()));
            top.insert("q".into(), json!(args.q));
            top.insert("limit".into(), json!(args.limit));
            let rows: Vec<Value> = run
                .table_rows
                .iter()
                .map(|s| type1_row_json(args, subject, s))
                .collect();
            top.insert("rows".into(), Value::Array(rows));
            let samples: Vec<Value> = run
                .samples
                .iter()
                .map(|s| type1_row_json(args, subject, s))
                .collect();
            top.insert("samples".into(), Value::Array(samples));
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&Value::Object(top))?
            )?;
        }
    }
    Ok(())
}

fn emit_type2(
    args: &BiasArgs,
    subject: Subject,
    run: &Type2Run,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match args.format {
        Format::Csv => {
            writeln!(out, "x,subject,q,stat,class_or_pair,value")?;
            let rows = run.samples.iter().chain(run.table_rows.iter());
            for s in rows {
                let base = (s.x, subject.tag(), args.q);
                for (&(from, to), &count) in s.tally.counts() {
                    let pair = format!("{from}|{to}");
                    csv_row(out, base, "transition_count", &pair, count)?;
                    csv_row(
                        out,
                        base,
                        "transition_share",
                        &pair,
                        s.tally.delta(from, to),
                    )?;
                }
            }
        }
        _ => {
            let row_json = |s: &bias::TransitionSample| {
                let mut transitions = Map::new();
                for (&(from, to), &count) in s.tally.counts() {
                    transitions.insert(
                        format!("{from}|{to}"),
                        json!({
                            "count": count,
                            "share": s.tally.delta(from, to),
                        }),
                    );
                }
                json!({ "x": s.x, "transitions": transitions })
            };
            let v = json!({
                "type": 2,
                "subject": subject.tag(),
                "q": args.q,
                "limit": args.limit,
                "rows": run.table_rows.iter().map(row_json).collect::<Vec<_>>(),
                "samples": run.samples.iter().map(row_json).collect::<Vec<_>>(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    Ok(())
}

fn emit_type3(
    args: &BiasArgs,
    subject: Subject,
    run: &Type3Run,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match args.format {
        Format::Csv => {
            writeln!(out, "x,subject,q,stat,class_or_pair,value")?;
            let rows = run.samples.iter().chain(run.table_rows.iter());
            for s in rows {
                let base = (s.x, subject.tag(), 0);
                csv_row(out, base, "count", "all", s.elements)?;
                csv_row(out, base, "gap_plus", "-", s.plus)?;
                csv_row(out, base, "gap_minus", "-", s.minus)?;
                csv_row(out, base, "delta_plus", "-", s.delta_plus)?;
                csv_row(out, base, "delta_minus", "-", s.delta_minus)?;
            }
        }
        _ => {
            let row_json = |s: &bias::GapSample| {
                json!({
                    "x": s.x,
                    "elements": s.elements,
                    "plus": s.plus,
                    "minus": s.minus,
                    "delta_plus": s.delta_plus,
                    "delta_minus": s.delta_minus,
                })
            };
            let v = json!({
                "type": 3,
                "subject": subject.tag(),
                "limit": args.limit,
                "rows": run.table_rows.iter().map(row_json).collect::<Vec<_>>(),
                "samples": run.samples.iter().map(row_json).collect::<Vec<_>>(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    Ok(())
}

fn csv_row<V: std::fmt::Display>(
    out: &mut dyn Write,
    base: (u64, &str, u64),
    stat: &str,
    class_or_pair: &str,
    value: V,
) -> Result<(), CliError> {
    writeln!(
        out,
        "{},{},{},{},{},{}",
        base.0, base.1, base.2, stat, class_or_pair, value
    )?;
    Ok(())
}

fn cmd_brun(cli: &Cli, args: &BrunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    gate_long_run(cli, args.limit)?;
    let store = build_store(cli, args.limit.saturating_add(2), args.checkpoint.as_ref())?;
    let report = bias::brun_partial(&store, args.limit, args.q)?;
    match args.format {
        Format::Json => {
            let classes: Map<String, Value> = report
                .class_sums
                .iter()
                .map(|(c, v)| (c.to_string(), json!(v)))
                .collect();
            let v = json!({
                "q": report.q,
                "limit": report.limit,
                "pairs": report.pairs,
                "class_sums": classes,
                "total": report.total,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        _ => {
            writeln!(out, "pairs = {}", report.pairs)?;
            for (class, sum) in &report.class_sums {
                writeln!(out, "class {class}: {sum:.6}")?;
            }
            writeln!(out, "total = {:.6}", report.total)?;
        }
    }
    Ok(())
}

fn cmd_ap(cli: &Cli, args: &ApArgs, out: &mut dyn Write) -> Result<(), CliError> {
    gate_long_run(cli, args.limit)?;
    let store = PrimeStore::build_with(args.limit, segment_size(cli))?;
    let aps = progressions::find_twin_aps(&store, args.length, args.limit)?;
    let mut capped = Vec::new();
    for ap in &aps {
        writeln!(out, "{},{},{}", ap.a, ap.b, ap.l)?;
        if ap.capped_by_limit {
            capped.push(format!("{},{}", ap.a, ap.b));
        }
    }
    if !capped.is_empty() {
        eprintln!(
            "note: {} progression(s) reach the limit and may extend: {}",
            capped.len(),
            capped.join(" ")
        );
    }
    Ok(())
}

fn cmd_check(cli: &Cli, args: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    gate_long_run(cli, args.limit)?;
    let store = PrimeStore::build_with(args.limit, segment_size(cli))?;

    let mut exceptional = 0usize;
    for q in 3..=args.q_max.max(3) {
        let report = bias::theorem31_check(&store, args.limit, q)?;
        exceptional += report
            .classes
            .iter()
            .filter(|c| c.pair_first.is_some())
            .count();
    }
    writeln!(
        out,
        "theorem31: ok (q = 3..={}, limit = {}, non-admissible classes with one pair = {})",
        args.q_max.max(3),
        args.limit,
        exceptional
    )?;

    let bound_limit = args.limit.min(100_000);
    let report = progressions::upper_bound_check(&store, bound_limit)?;
    writeln!(
        out,
        "upper_bounds: ok (n <= {}, min totient slack {} at n = {}, min half slack {} at n = {})",
        report.n_limit,
        report.min_totient_slack,
        report.min_totient_slack_at,
        report.min_half_slack,
        report.min_half_slack_at
    )?;

    let sweep = 10_000u64;
    let tables = twinsieve_core::arith::ArithTables::new(sweep);
    for x in 1..=sweep {
        let direct = analytic::k_weighted_with(&tables, x);
        let layered = analytic::k_via_l_with(&tables, x);
        if direct != layered {
            return Err(CliError::Internal(format!(
                "summatory identity broke at x = {x}: {direct} != {layered}"
            )));
        }
    }
    writeln!(out, "summatory_identity: ok (x <= {sweep})")?;

    if let Some(q) = args.equidistribution {
        let report = bias::equidistribution_check(&store, args.limit, q)?;
        writeln!(
            out,
            "equidistribution mod {} (pairs = {}, admissible classes = {}):",
            report.q, report.pi2_total, report.phi2_q
        )?;
        for row in &report.rows {
            writeln!(
                out,
                "  class {}: count {} ratio {:.4}",
                row.class, row.count, row.ratio
            )?;
        }
    }
    Ok(())
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
