use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use safeprime_prng::bench::{self, DEFAULT_Q_SIZES};
use safeprime_prng::config::{parse_biguint, parse_indexes, parse_seed, ConfigError, RunConfig};
use safeprime_prng::known;
use safeprime_prng::prime_table::{PrimeTable, TableError};
use safeprime_prng::selftest;
use safeprime_prng::stats::{run_battery, BatteryConfig, StatsError};
use safeprime_prng::{BitStream, Execution, WordFormat, WordWidth};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "spgen", version, about = "Safe-prime exponentiation PRNG: generation, tables, testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a table of k-bit safe primes.
    Primes(PrimesArgs),
    /// Generate a stream of output words.
    Gen(GenArgs),
    /// Run the statistical battery on a stream.
    Test(TestArgs),
    /// Time generation across modulus sizes.
    Bench(BenchArgs),
    /// Run the built-in known-answer tests.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct PrimesArgs {
    #[arg(long)]
    k: u32,
    /// Number of primes; all k-bit safe primes when omitted.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    out: String,
    /// Seed for the scan start.
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    seed: u64,
    /// Take the largest k-bit safe primes instead of a seeded scan.
    #[arg(long)]
    top: bool,
}

#[derive(Args, Default)]
struct GenArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    qbits: Option<u64>,
    /// Explicit safe prime modulus (decimal or 0x hex).
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    mr: Option<u64>,
    #[arg(long)]
    nrounds: Option<u32>,
    #[arg(long)]
    e1: Option<u64>,
    #[arg(long)]
    e2: Option<u64>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated table indexes; derived from the seed when omitted.
    #[arg(long)]
    indexes: Option<String>,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Number of words.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    format: Option<WordFormat>,
    /// Output file, `-` for stdout.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    security_mode: bool,
    #[arg(long)]
    stretch: bool,
}

impl GenArgs {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let bad = |key: &str, message: String| ConfigError::Value {
            key: key.into(),
            message,
        };
        if let Some(v) = self.qbits {
            cfg.qbits = v;
            cfg.q = None;
        }
        if let Some(v) = &self.q {
            cfg.q = Some(parse_biguint(v).map_err(|m| bad("q", m))?);
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.s {
            cfg.s = v;
        }
        if let Some(v) = self.mr {
            cfg.mr = v;
        }
        if let Some(v) = self.nrounds {
            cfg.nrounds = v;
        }
        if let Some(v) = self.e1 {
            cfg.e1 = v;
        }
        if let Some(v) = self.e2 {
            cfg.e2 = v;
        }
        if let Some(v) = &self.seed {
            cfg.seed = parse_seed(v).map_err(|m| bad("seed", m))?;
        }
        if let Some(v) = &self.indexes {
            cfg.indexes = Some(parse_indexes(v).map_err(|m| bad("indexes", m))?);
        }
        if let Some(v) = &self.table {
            cfg.table = Some(v.clone());
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        cfg.security_mode |= self.security_mode;
        cfg.stretch |= self.stretch;
        Ok(cfg)
    }
}

#[derive(Args)]
struct TestArgs {
    /// Stream file to test, `-` for stdin. Without it the stream is
    /// generated from the generator options.
    #[arg(long)]
    input: Option<String>,
    /// Encoding of the input file.
    #[arg(long, default_value = "raw-be")]
    input_format: WordFormat,
    /// Word width of a hex input file.
    #[arg(long, default_value_t = 32)]
    input_k: u32,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    meta_alpha: f64,
    #[arg(long, default_value_t = 64)]
    subsequences: usize,
    #[arg(long, default_value = "1,2,4")]
    lags: String,
    #[arg(long, default_value = "32,256")]
    blocks: String,
    /// Write the full tab-separated report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    gen: GenArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_Q_SIZES)]
    qbits: Vec<u64>,
    /// Bytes generated per measurement.
    #[arg(long, default_value_t = 1 << 16)]
    bytes: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = known::KAT_E1)]
    e1: u64,
    #[arg(long, default_value_t = known::KAT_E2)]
    e2: u64,
}

/// Failure with an exit status.
struct Failure(u8, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure(EXIT_USAGE, e.to_string()),
            _ => Failure(EXIT_USAGE, format!("configuration error: {e}")),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, message.into())
}

fn open_output(path: &str) -> Result<Box<dyn Write>, Failure> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(path).map_err(|e| usage(format!("{path}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn cmd_primes(args: PrimesArgs) -> Result<(), Failure> {
    WordWidth::new(args.k).map_err(|e| usage(format!("--k: {e}")))?;
    let table = match args.count {
        Some(count) if args.top => PrimeTable::build_top(args.k, count),
        Some(count) => {
            let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
            PrimeTable::build(args.k, count, &mut rng)
        }
        None if args.k <= 24 => PrimeTable::build_full(args.k),
        None => return Err(usage(format!("--count is required for k = {}", args.k))),
    };
    let table = table.map_err(|e| match e {
        TableError::Invalid(_) => usage(e.to_string()),
        _ => Failure(EXIT_FAIL, e.to_string()),
    })?;
    let mut out = open_output(&args.out)?;
    table
        .save(&mut out)
        .and_then(|_| out.flush().map_err(TableError::Io))
        .map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    eprintln!("wrote {} {}-bit safe primes (r = {})", table.len(), table.k(), table.index_bits());
    Ok(())
}

fn generate(cfg: &RunConfig) -> Result<BitStream, Failure> {
    if cfg.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let params = cfg.params()?;
    let table = cfg.load_table()?;
    let mut g = cfg.generator(&params, &table)?;
    g.generate(cfg.n).map_err(|e| usage(e.to_string()))
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    let stream = generate(&cfg)?;
    let mut out = open_output(&cfg.out)?;
    stream
        .write_to(cfg.format, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Failure(EXIT_FAIL, format!("write: {e}")))
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|e| usage(format!("{flag}: {s:?}: {e}"))))
        .collect()
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    let battery = BatteryConfig {
        alpha: args.alpha,
        meta_alpha: args.meta_alpha,
        subsequences: args.subsequences,
        lags: parse_list("--lags", &args.lags)?,
        block_sizes: parse_list("--blocks", &args.blocks)?,
        exec: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    battery.validate().map_err(|e| usage(e.to_string()))?;

    let bits = match &args.input {
        Some(path) => {
            let mut data = Vec::new();
            let read = if path == "-" {
                io::stdin().lock().read_to_end(&mut data)
            } else {
                File::open(path).and_then(|mut f| f.read_to_end(&mut data))
            };
            read.map_err(|e| usage(format!("{path}: {e}")))?;
            let width = WordWidth::new(args.input_k).map_err(|e| usage(format!("--input-k: {e}")))?;
            let width = if args.input_format == WordFormat::Hex { width } else { WordWidth::new(8).expect("8 is valid") };
            BitStream::decode(&data, width, args.input_format)
                .map_err(|e| usage(e.to_string()))?
                .to_bits()
        }
        None => {
            let mut cfg = args.gen.resolve()?;
            if args.gen.n.is_none() {
                cfg.n = battery.min_stream_bits().div_ceil(cfg.k as usize);
            }
            generate(&cfg)?.to_bits()
        }
    };

    let report = match run_battery(&bits, &battery) {
        Ok(r) => r,
        Err(e @ StatsError::InsufficientData { .. }) => return Err(usage(format!("stream too short: {e}"))),
        Err(e) => return Err(usage(e.to_string())),
    };
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_text()).map_err(|e| Failure(EXIT_FAIL, format!("{}: {e}", path.display())))?;
    }
    print!("{}", report.verdict_table());
    println!(
        "{} bits, {} subsequences; pass ratios {}; uniformity {}",
        bits.len(),
        battery.subsequences,
        if report.all_ratios_passed() { "ok" } else { "FAILED" },
        if report.all_uniform() { "ok" } else { "FAILED" },
    );
    if report.failures() > 0 {
        return Err(Failure(
            EXIT_FAIL,
            format!("{} failures in: {}", report.failures(), report.failed_tests().join(", ")),
        ));
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.bytes == 0 {
        return Err(usage("--bytes must be positive"));
    }
    if args.qbits.is_empty() {
        return Err(usage("--qbits needs at least one size"));
    }
    let table = bench::bench_table().map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    let rows = bench::measure(&args.qbits, args.bytes, args.reps, &table).map_err(|e| usage(e.to_string()))?;
    println!("{:>6}  {:>10}  {:>10}  {:>12}  {:>12}", "q_bits", "bytes", "seconds", "ns/byte", "cycles/byte");
    for r in &rows {
        let cycles = r.cycles_per_byte.map_or("-".to_string(), |c| format!("{c:.1}"));
        println!(
            "{:>6}  {:>10}  {:>10.4}  {:>12.1}  {:>12}",
            r.qbits, r.bytes, r.seconds, r.ns_per_byte, cycles
        );
    }
    for r in &rows {
        let cycles = r.cycles_per_byte.map_or("nan".to_string(), |c| format!("{c}"));
        println!(
            "#BENCH\t{}\t{}\t{}\t{}\t{}\t{}",
            r.qbits, r.bytes, r.seconds, r.ns_per_byte, cycles, r.words_per_second
        );
    }
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> Result<(), Failure> {
    let report = selftest::run(args.e1, args.e2);
    for c in &report.checks {
        println!("{c}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure(EXIT_FAIL, "known-answer mismatch".into()))
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
    let result = match cli.command {
        Command::Primes(a) => cmd_primes(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Test(a) => cmd_test(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            eprintln!("spgen: {message}");
            ExitCode::from(code)
        }
    }
}
