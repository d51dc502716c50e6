use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sqz::adaptive::LengthHint;
use sqz::bounded::BoundedParams;
use sqz::bwt::pipeline_stages;
use sqz::container::{decode_container, encode_container, Codec};
use sqz::harness::{
    run_one_pass, AdaptiveProcessor, BoundedProcessor, ComparisonProcessor, GapListProcessor, StreamAccount,
};
use sqz::online_sorter::sort_permutation;
use sqz::text_stats::{gen_debruijn, gen_periodic, hk, FrequencyTable};
use sqz::Symbol;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CORRUPT: u8 = 4;

#[derive(Parser)]
#[command(name = "sqz", version, about = "Sequential-access compression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into a container.
    Encode {
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Print the transformed string to stderr (bwt codec).
        #[arg(long)]
        dump_bwt: bool,
        /// Print the move-to-front indices to stderr (bwt codec).
        #[arg(long)]
        dump_mtf: bool,
        input_path: PathBuf,
        output_path: PathBuf,
    },
    /// Restore the original file from a container.
    Decode {
        #[arg(long, value_enum, default_value_t = Format::Bytes)]
        format: Format,
        input_path: PathBuf,
        output_path: PathBuf,
    },
    /// Print n, sigma and the empirical entropies H_0..H_k.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
        input_path: PathBuf,
    },
    /// Print the stable sorting permutation computed by the gap-list sorter.
    Sortperm {
        #[command(flatten)]
        input: InputArgs,
        input_path: PathBuf,
    },
    /// Sort with the weighted search tree and report comparisons.
    Sortcmp {
        #[command(flatten)]
        input: InputArgs,
        input_path: PathBuf,
    },
    /// Generate test inputs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a one-pass codec under the harness and print its account as JSON.
    Audit {
        #[arg(long, value_enum)]
        processor: AuditTarget,
        #[command(flatten)]
        codec: BoundedArgs,
        #[command(flatten)]
        input: InputArgs,
        input_path: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Binary De Bruijn cycle of order k, optionally repeated.
    Debruijn {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[arg(long, value_enum, default_value_t = Format::Bytes)]
        format: Format,
    },
    /// A pattern repeated to exactly n symbols.
    Periodic {
        /// Comma-separated symbols.
        #[arg(long, value_delimiter = ',', required = true)]
        pattern: Vec<Symbol>,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Bytes)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One symbol per byte.
    Bytes,
    /// Whitespace-separated decimal symbols.
    Tokens,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecName {
    Adaptive,
    Bounded,
    Bwt,
    Gaplists,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AuditTarget {
    Adaptive,
    Bounded,
    Gaplists,
    Sortcmp,
}

#[derive(Args)]
struct InputArgs {
    /// Alphabet size; every input symbol must be below it.
    #[arg(long)]
    sigma: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Bytes)]
    format: Format,
}

#[derive(Args)]
struct BoundedArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    k: u32,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Adaptive coder: use the rebuild schedule that does not depend on n.
    #[arg(long)]
    unknown_length: bool,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, value_enum)]
    codec: CodecName,
    #[command(flatten)]
    params: BoundedArgs,
}

enum Failure {
    Usage(String),
    Io(String),
    Corrupt(String),
}

impl From<sqz::Error> for Failure {
    fn from(e: sqz::Error) -> Self {
        if e.is_corruption() {
            Failure::Corrupt(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_bytes(path: &Path) -> Outcome<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(|e| io_failure(path, e))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| io_failure(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Outcome<()> {
    if path == Path::new("-") {
        return io::stdout().write_all(bytes).map_err(|e| io_failure(path, e));
    }
    fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

fn parse_symbols(bytes: &[u8], format: Format) -> Outcome<Vec<Symbol>> {
    match format {
        Format::Bytes => Ok(bytes.iter().map(|&b| b as Symbol).collect()),
        Format::Tokens => {
            let text = std::str::from_utf8(bytes).map_err(|_| Failure::Usage("token input is not UTF-8".into()))?;
            text.split_whitespace()
                .map(|t| t.parse::<Symbol>().map_err(|_| Failure::Usage(format!("bad token {t:?}"))))
                .collect()
        }
    }
}

fn render_symbols(s: &[Symbol], format: Format) -> Outcome<Vec<u8>> {
    match format {
        Format::Bytes => s
            .iter()
            .map(|&c| u8::try_from(c).map_err(|_| Failure::Usage(format!("symbol {c} does not fit in a byte; use --format tokens"))))
            .collect(),
        Format::Tokens => Ok(join(s).into_bytes()),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    let mut out = items.iter().map(T::to_string).collect::<Vec<_>>().join(" ");
    out.push('\n');
    out
}

/// Reads the input and settles the alphabet size.
fn load(path: &Path, input: &InputArgs) -> Outcome<(Vec<Symbol>, u32)> {
    let s = parse_symbols(&read_bytes(path)?, input.format)?;
    let sigma = match (input.sigma, input.format) {
        (Some(sigma), _) => sigma,
        (None, Format::Bytes) => 256,
        (None, Format::Tokens) => s.iter().max().map_or(1, |&m| m + 1),
    };
    if sigma == 0 {
        return Err(Failure::Usage("--sigma must be positive".into()));
    }
    if let Some(&c) = s.iter().find(|&&c| c >= sigma) {
        return Err(Failure::Usage(format!("input symbol {c} is outside the alphabet of size {sigma}")));
    }
    Ok((s, sigma))
}

fn codec(name: CodecName, p: &BoundedArgs, sigma: u32) -> Outcome<Codec> {
    Ok(match name {
        CodecName::Adaptive => Codec::Adaptive {
            unknown_length: p.unknown_length,
        },
        CodecName::Bounded => Codec::Bounded(BoundedParams::new(sigma, p.lambda, p.k, p.mu)?),
        CodecName::Bwt => Codec::Bwt,
        CodecName::Gaplists => Codec::GapLists,
    })
}

fn print_json(account: &StreamAccount) -> Outcome<()> {
    let line = serde_json::to_string(account).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("{line}");
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Encode {
            codec: c,
            input,
            dump_bwt,
            dump_mtf,
            input_path,
            output_path,
        } => {
            let (s, sigma) = load(&input_path, &input)?;
            if dump_bwt || dump_mtf {
                let stages = pipeline_stages(&s, sigma)?;
                if dump_bwt {
                    eprint!("bwt: {}", join(stages.bwt.symbols()));
                }
                if dump_mtf {
                    eprint!("mtf: {}", join(&stages.mtf));
                }
            }
            let bytes = encode_container(codec(c.codec, &c.params, sigma)?, &s, sigma)?;
            write_bytes(&output_path, &bytes)
        }
        Command::Decode {
            format,
            input_path,
            output_path,
        } => {
            let bytes = read_bytes(&input_path)?;
            let (_, s) = decode_container(&bytes)?;
            write_bytes(&output_path, &render_symbols(&s, format)?)
        }
        Command::Analyze { input, k, input_path } => {
            let (s, sigma) = load(&input_path, &input)?;
            println!("n {}", s.len());
            println!("sigma {sigma}");
            let used = FrequencyTable::from_symbols(&s, sigma as usize)?.used_symbols();
            println!("distinct {used}");
            for order in 0..=k.min(s.len().saturating_sub(1)) {
                println!("H{order} {:.6}", hk(&s, order)?);
            }
            Ok(())
        }
        Command::Sortperm { input, input_path } => {
            let (s, _) = load(&input_path, &input)?;
            let lists = sort_permutation(&s)?;
            print!("{}", join(&lists.permutation()?));
            eprintln!("lists {} encoded_bits {}", lists.lists().len(), lists.encoded_bits());
            Ok(())
        }
        Command::Sortcmp { input, input_path } => {
            let (s, _) = load(&input_path, &input)?;
            let (tree, _) = run_one_pass(ComparisonProcessor::new(), s)?;
            print!("{}", join(&tree.sorted_output()));
            eprintln!("comparisons {} rebuilds {}", tree.comparisons(), tree.rebuilds());
            Ok(())
        }
        Command::Gen(GenCommand::Debruijn { k, repeat, format }) => {
            let d: Vec<Symbol> = gen_debruijn(k)?.into_iter().map(Symbol::from).collect();
            let s = gen_periodic(&d, d.len() * repeat);
            write_bytes(Path::new("-"), &render_symbols(&s, format)?)
        }
        Command::Gen(GenCommand::Periodic { pattern, n, format }) => {
            let s = gen_periodic(&pattern, n);
            write_bytes(Path::new("-"), &render_symbols(&s, format)?)
        }
        Command::Audit {
            processor,
            codec: p,
            input,
            input_path,
        } => {
            let (s, sigma) = load(&input_path, &input)?;
            let n = s.len() as u64;
            let account = match processor {
                AuditTarget::Adaptive => {
                    let hint = if p.unknown_length { LengthHint::Unknown } else { LengthHint::Known(n) };
                    run_one_pass(AdaptiveProcessor::new(sigma as usize, hint)?, s)?.1
                }
                AuditTarget::Bounded => {
                    let params = BoundedParams::new(sigma, p.lambda, p.k, p.mu)?;
                    run_one_pass(BoundedProcessor::new(params), s)?.1
                }
                AuditTarget::Gaplists => run_one_pass(GapListProcessor::new(), s)?.1,
                AuditTarget::Sortcmp => run_one_pass(ComparisonProcessor::new(), s)?.1,
            };
            print_json(&account)
        }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("sqz: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("sqz: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Corrupt(msg)) => {
            eprintln!("sqz: corrupt input: {msg}");
            ExitCode::from(EXIT_CORRUPT)
        }
    }
}
