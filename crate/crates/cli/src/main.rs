//! `minwst` command line: build, query, gen and bench.
//!
//! Exit codes: 0 success, 1 usage, 2 bad input data, 3 internal invariant
//! violated, 4 index written but built in fallback mode (log2 z > ell).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use minwst::bench::{self, BenchSpec};
use minwst::gen::{self, Kind};
use minwst::minimizers::DEFAULT_SEED;
use minwst::trees::Direction;
use minwst::{query_batch, BuildConfig, BuildPath, Error, Execution, Index, Mode, Order, WeightedString};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_FALLBACK: u8 = 4;

#[derive(Parser)]
#[command(name = "minwst", version, about = "Minimizer-sampled index for weighted strings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an index from a .wstr file.
    Build(BuildArgs),
    /// Answer patterns (one per line) against an index.
    Query(QueryArgs),
    /// Generate a synthetic .wstr file.
    Gen(GenArgs),
    /// Run a benchmark spec and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Fingerprint,
    Lex,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Naive,
    Se,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Grid,
    Verify,
    Array,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    SnpLike,
    RssiLike,
    Uniform,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long)]
    ell: usize,
    /// k-mer length, or "auto".
    #[arg(long, default_value = "auto")]
    k: String,
    #[arg(long, value_enum, default_value = "fingerprint")]
    order: OrderArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    z: f64,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, value_enum, default_value = "se")]
    path: PathArg,
    /// Keep the weighted string in the index for exact verification.
    #[arg(long)]
    retain_x: bool,
    /// Print both trees to stdout.
    #[arg(long)]
    dump: bool,
    #[arg(short, long)]
    output: PathBuf,
    input: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, value_enum, default_value = "grid")]
    mode: ModeArg,
    /// Append candidate and rejection counts to each line.
    #[arg(long)]
    stats: bool,
    /// Expected ell; a different value in the index is an error.
    #[arg(long)]
    ell: Option<usize>,
    /// Expected k.
    #[arg(long)]
    k: Option<usize>,
    /// Expected minimizer order seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sequential: bool,
    index: PathBuf,
    patterns: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sigma: usize,
    /// Percentage of uncertain positions.
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    spec: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Run cells one at a time.
    #[arg(long)]
    sequential: bool,
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn build(args: BuildArgs) -> anyhow::Result<u8> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let x = WeightedString::parse_str(&text)?;
    let s = &args.scheme;
    let k = match s.k.as_str() {
        "auto" => None,
        v => Some(v.parse().map_err(|_| Error::InvalidParameter(format!("k must be an integer or auto, got {v:?}")))?),
    };
    let config = BuildConfig {
        z: args.z,
        ell: s.ell,
        k,
        order: match s.order {
            OrderArg::Fingerprint => Order::Fingerprint { seed: s.seed },
            OrderArg::Lex => Order::Lexicographic,
        },
        path: match args.path {
            PathArg::Naive => BuildPath::Naive,
            PathArg::Se => BuildPath::SpaceEfficient,
        },
        retain_x: args.retain_x,
    };
    let (index, stats) = Index::build(&x, &config)?;
    index.save(&args.output)?;
    if args.dump {
        let mut out = io::stdout().lock();
        writeln!(out, "forward\n{}", index.dump_tree(Direction::Forward))?;
        writeln!(out, "backward\n{}", index.dump_tree(Direction::Backward))?;
    }
    eprintln!(
        "n={} anchors={} nodes={}+{} bytes={} seconds={:.3}",
        index.len(),
        stats.anchors,
        stats.forward_nodes,
        stats.backward_nodes,
        index.size_bytes(),
        stats.seconds
    );
    if index.fallback() {
        eprintln!("warning: log2 z exceeds ell; index built in fallback mode");
        return Ok(EXIT_FALLBACK);
    }
    Ok(0)
}

fn check_scheme(index: &Index, args: &QueryArgs) -> Result<(), Error> {
    let s = index.scheme();
    let checks = [("ell", args.ell, s.ell() as u64), ("k", args.k, s.k() as u64)];
    for (name, want, have) in checks {
        if let Some(w) = want {
            if w as u64 != have {
                return Err(Error::SchemeMismatch(format!("{name} is {have} in the index, {w} requested")));
            }
        }
    }
    if let Some(seed) = args.seed {
        if s.order() != (Order::Fingerprint { seed }) {
            return Err(Error::SchemeMismatch(format!("index order is {:?}, seed {seed} requested", s.order())));
        }
    }
    Ok(())
}

fn query(args: QueryArgs) -> anyhow::Result<u8> {
    let index = Index::load(&args.index).with_context(|| format!("loading {}", args.index.display()))?;
    check_scheme(&index, &args)?;
    let text = fs::read_to_string(&args.patterns).with_context(|| format!("reading {}", args.patterns.display()))?;
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let mode = match args.mode {
        ModeArg::Grid => Mode::Grid,
        ModeArg::Verify => Mode::Verify,
        ModeArg::Array => Mode::Array,
    };

    // Lines with foreign letters are answered with an empty set and a warning.
    let mut encoded = Vec::with_capacity(lines.len());
    let mut foreign = vec![false; lines.len()];
    for (i, l) in lines.iter().enumerate() {
        match index.alphabet().encode(l) {
            Ok(p) => encoded.push(p),
            Err(Error::UnknownLetter(c)) => {
                eprintln!("warning: pattern {}: letter {c:?} is not in the alphabet", i + 1);
                foreign[i] = true;
                encoded.push(Vec::new());
            }
            Err(e) => return Err(e.into()),
        }
    }
    let results = query_batch(&index, &encoded, mode, exec(args.sequential));

    let mut out = BufWriter::new(io::stdout().lock());
    for (i, (line, r)) in lines.iter().zip(results).enumerate() {
        if foreign[i] {
            writeln!(out, "{}\t{line}\t0\t", i + 1)?;
            continue;
        }
        match r {
            Ok(r) => {
                let pos: Vec<String> = r.positions.iter().map(usize::to_string).collect();
                write!(out, "{}\t{line}\t{}\t{}", i + 1, r.positions.len(), pos.join(","))?;
                if args.stats {
                    write!(out, "\tcandidates={} rejected={}", r.stats.candidates, r.stats.rejected)?;
                }
                writeln!(out)?;
            }
            Err(e @ Error::PatternTooShort { .. }) => writeln!(out, "{}\t{line}\terror: {e}", i + 1)?,
            Err(e) => return Err(e.into()),
        }
    }
    out.flush()?;
    Ok(0)
}

fn generate(args: GenArgs) -> anyhow::Result<u8> {
    let kind = match args.kind {
        KindArg::SnpLike => Kind::SnpLike,
        KindArg::RssiLike => Kind::RssiLike,
        KindArg::Uniform => Kind::Uniform,
    };
    let x = gen::generate(kind, args.n, args.sigma, args.delta, args.seed)?;
    fs::write(&args.output, x.to_wstr()).with_context(|| format!("writing {}", args.output.display()))?;
    Ok(0)
}

fn run_bench(args: BenchArgs) -> anyhow::Result<u8> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let spec = BenchSpec::parse(&text)?;
    let report = bench::run(&spec, exec(args.sequential));
    fs::write(&args.output, report.to_csv()?).with_context(|| format!("writing {}", args.output.display()))?;
    let failed = report.failed();
    eprintln!("{} cells, {failed} failed", report.rows.len());
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Internal(_)) => EXIT_INTERNAL,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let res = match cli.cmd {
        Cmd::Build(a) => build(a),
        Cmd::Query(a) => query(a),
        Cmd::Gen(a) => generate(a),
        Cmd::Bench(a) => run_bench(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
