use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rlindex::format::FormatError;
use rlindex::index::{IndexOptions, IndexStats};
use rlindex::{corpus, BuildConfig, Exec, Index};

/// Grammar-compressed self-index over a byte text.
///
/// Positions are 1-based over the raw input: the first byte of the file is
/// position 1. The sentinels the index adds internally are never reported.
#[derive(Parser)]
#[command(name = "rlindex", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a text file.
    Build {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Accept a round's permutation when its grammar contribution is at
        /// most this many times δ.
        #[arg(long, default_value_t = BuildConfig::default().budget_factor)]
        budget_factor: f64,
        /// Permutation draws per round before keeping the best one.
        #[arg(long, default_value_t = BuildConfig::default().max_retries)]
        max_retries: u32,
        /// Print grammar statistics after building.
        #[arg(long)]
        stats: bool,
    },
    /// Query an index file.
    Query {
        index: PathBuf,
        #[command(subcommand)]
        what: Query,
    },
    /// Generate a test corpus.
    Gen {
        kind: GenKind,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Alphabet size for random and copy-edit texts.
        #[arg(long, default_value_t = 4)]
        sigma: usize,
        /// Number of copies for copy-edit texts.
        #[arg(long, default_value_t = 10)]
        copies: usize,
        /// Point mutations per copy for copy-edit texts.
        #[arg(long, default_value_t = 1)]
        mutations: usize,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PatternArg {
    /// Pattern bytes, taken verbatim from the argument.
    #[arg(required_unless_present = "pattern_file", conflicts_with = "pattern_file")]
    pattern: Option<String>,
    /// Read the pattern from a file, byte for byte.
    #[arg(long)]
    pattern_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Query {
    /// Print the sorted positions of all occurrences, one per line.
    Locate {
        #[command(flatten)]
        pattern: PatternArg,
        /// Report at most this many occurrences.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Print the number of occurrences.
    Count {
        #[command(flatten)]
        pattern: PatternArg,
    },
    /// Write `len` raw bytes starting at position `from`.
    Extract {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        len: u64,
    },
    /// Print grammar statistics.
    Stats,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Fibonacci,
    CopyEdit,
}

enum Failure {
    Usage(String),
    Io(String),
    Format(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Format(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Format(m) => f.write_str(m),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn write_out(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn load(path: &Path) -> Result<Index, Failure> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Index::from_bytes(&bytes).map_err(|e| match e {
        FormatError::Io(e) => Failure::Io(format!("{}: {e}", path.display())),
        e => Failure::Format(format!("{}: {e}", path.display())),
    })
}

fn pattern(arg: &PatternArg) -> Result<Vec<u8>, Failure> {
    let p = match (&arg.pattern, &arg.pattern_file) {
        (_, Some(f)) => fs::read(f).map_err(|e| Failure::Usage(format!("{}: {e}", f.display())))?,
        (Some(s), None) => s.as_bytes().to_vec(),
        (None, None) => return Err(Failure::Usage("no pattern given".into())),
    };
    if p.is_empty() {
        return Err(Failure::Usage("the pattern is empty".into()));
    }
    Ok(p)
}

fn report(s: &IndexStats, with_time: bool) -> String {
    let g = &s.grammar;
    let mean = if g.retries.is_empty() {
        0.0
    } else {
        g.retries.iter().sum::<u32>() as f64 / g.retries.len() as f64
    };
    let mut out = format!(
        "text length      {}\n\
         grammar size g   {}\n\
         rules r          {}\n\
         rounds           {}\n\
         height           {}\n\
         delta            {:.3}\n\
         g/(delta log)    {:.3}\n\
         retries          {:?} (mean {:.2})\n\
         tree nodes       {}\n\
         locate points    {}\n\
         count points     {}\n\
         fp redraws       {}\n",
        g.text_len - 2,
        g.size,
        g.rules,
        g.rounds,
        g.height,
        g.delta,
        g.ratio,
        g.retries,
        mean,
        s.tree_nodes,
        s.locate_points,
        s.count_points,
        s.fingerprint_redraws,
    );
    if with_time {
        out.push_str(&format!("build time       {:.3?}\n", s.build_time));
    }
    out
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Command::Build {
            input,
            output,
            seed,
            budget_factor,
            max_retries,
            stats,
        } => {
            let text = fs::read(&input).map_err(io_err(&input))?;
            if text.is_empty() {
                return Err(Failure::Usage(format!("{}: empty input", input.display())));
            }
            if budget_factor.is_nan() || budget_factor <= 0.0 {
                return Err(Failure::Usage("--budget-factor must be positive".into()));
            }
            let opts = IndexOptions {
                seed,
                grammar: BuildConfig {
                    budget_factor,
                    max_retries,
                },
                exec: Exec::Sequential,
            };
            let idx = Index::build_with(&text, &opts).map_err(|e| Failure::Usage(e.to_string()))?;
            fs::write(&output, idx.to_bytes()).map_err(io_err(&output))?;
            if stats {
                write_out(report(&idx.stats(), true).as_bytes())?;
            }
        }
        Command::Query { index, what } => {
            let idx = load(&index)?;
            match what {
                Query::Locate { pattern: p, limit } => {
                    let p = pattern(&p)?;
                    let occ = match limit {
                        Some(k) => idx.locate_limited(&p, k),
                        None => idx.locate(&p),
                    };
                    let mut s = String::new();
                    for o in occ {
                        s.push_str(&o.to_string());
                        s.push('\n');
                    }
                    write_out(s.as_bytes())?;
                }
                Query::Count { pattern: p } => {
                    let p = pattern(&p)?;
                    write_out(format!("{}\n", idx.count(&p)).as_bytes())?;
                }
                Query::Extract { from, len } => {
                    let bytes = idx
                        .extract_text(from, len)
                        .map_err(|e| Failure::Usage(e.to_string()))?;
                    write_out(&bytes)?;
                }
                Query::Stats => write_out(report(&idx.stats(), false).as_bytes())?,
            }
        }
        Command::Gen {
            kind,
            size,
            seed,
            sigma,
            copies,
            mutations,
            output,
        } => {
            let text = match kind {
                GenKind::Random => corpus::random(size, sigma, seed),
                GenKind::Fibonacci => corpus::fibonacci(size),
                GenKind::CopyEdit => corpus::copy_edit(size, copies, mutations, sigma, seed),
            }
            .map_err(|e| Failure::Usage(e.to_string()))?;
            match output {
                Some(path) => fs::write(&path, &text).map_err(io_err(&path))?,
                None => write_out(&text)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rlindex: {f}");
            ExitCode::from(f.code())
        }
    }
}
