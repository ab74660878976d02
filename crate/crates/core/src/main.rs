use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pgidx::countcache::MAX_FULL_K;
use pgidx::oracle::oracle_query;
use pgidx::persist::{load_index_from_path, save_index_to_path};
use pgidx::{
    BuildOptions, CacheChoice, CacheLevels, Error, Format, LengthPolicy, PgsaIndex, QueryAnswer, QueryInput, QueryKind,
    QuerySession, ReadSet,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "pgidx", version, about = "Index sequencing reads and answer k-mer queries over them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from FASTA/FASTQ files (optionally gzipped).
    Build(BuildArgs),
    /// Run queries against an index.
    Query(QueryArgs),
    /// Print the size of every index component.
    Stats { index: PathBuf },
}

#[derive(clap::Args)]
struct BuildArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output index file.
    #[arg(short, long)]
    output: PathBuf,
    /// Suffix-array sampling period.
    #[arg(short, long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=6))]
    sparsity: u8,
    /// Count cache: off, auto, or the largest fully cached k (0 to 11).
    #[arg(long, default_value = "auto")]
    cache_level: CacheArg,
    /// Omit the k=12 and k=13 cache levels when --cache-level is a number.
    #[arg(long)]
    no_partial_levels: bool,
    /// Window length of the repetitive-read flag (0 disables it).
    #[arg(long, default_value_t = 11)]
    repetitive_threshold: u8,
    /// What to do with reads of different lengths: reject or trim.
    #[arg(long, default_value = "reject", value_parser = LengthPolicy::from_str)]
    length_policy: LengthPolicy,
    /// Input format: fasta, fastq or auto.
    #[arg(long, default_value = "auto", value_parser = Format::from_str)]
    format: Format,
}

#[derive(Clone, Copy, Debug)]
enum CacheArg {
    Off,
    Auto,
    Full(u8),
}

impl FromStr for CacheArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(CacheArg::Off),
            "auto" => Ok(CacheArg::Auto),
            n => match n.parse::<u8>() {
                Ok(k) if k <= MAX_FULL_K => Ok(CacheArg::Full(k)),
                _ => Err(format!("expected off, auto or 0..={MAX_FULL_K}")),
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Tsv,
    Json,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("source").required(true).args(["kmer", "at", "batch"])))]
struct QueryArgs {
    index: PathBuf,
    /// Query type, q1 to q7.
    #[arg(short = 't', long = "type", value_parser = QueryKind::from_str)]
    kind: QueryKind,
    /// Query k-mer.
    #[arg(long)]
    kmer: Option<String>,
    /// Query taken from a read: READ:POS:LEN, READ 1-based, POS 0-based.
    #[arg(long)]
    at: Option<String>,
    /// File with one query per line (`-` for stdin); lines with a colon are
    /// READ:POS:LEN, others are k-mers.
    #[arg(long)]
    batch: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    format: OutputFormat,
    /// Recompute every answer by brute force over the reads and flag
    /// disagreements.
    #[arg(long)]
    oracle: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Query(args) => cmd_query(args),
        Command::Stats { index } => cmd_stats(&index),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error\t{}\t{}", e.kind(), e);
            ExitCode::from(if e.is_internal() { EXIT_INTERNAL } else { EXIT_DATA })
        }
    }
}

fn cmd_build(args: BuildArgs) -> pgidx::Result<ExitCode> {
    let clock = Instant::now();
    let reads = pgidx::load_read_files(&args.inputs, args.format, args.length_policy)?;
    let ingest_time = clock.elapsed();

    let cache = match args.cache_level {
        CacheArg::Off => CacheChoice::Levels(CacheLevels::NONE),
        CacheArg::Auto => CacheChoice::Auto,
        CacheArg::Full(k) => CacheChoice::Levels(CacheLevels {
            full_k: k,
            partial12: !args.no_partial_levels,
            partial13: !args.no_partial_levels,
        }),
    };
    let opts = BuildOptions { sparsity: args.sparsity, cache, repetitive_threshold: args.repetitive_threshold };
    let (index, report) = PgsaIndex::build_with_report(&reads, &opts)?;

    let clock = Instant::now();
    let written = save_index_to_path(&index, &args.output)?;
    let save_time = clock.elapsed();

    let out = &mut io::stdout().lock();
    let alphabet = index.alphabet();
    writeln!(out, "reads_q\t{}", index.read_count())?;
    writeln!(out, "read_length_m\t{}", index.m())?;
    writeln!(out, "alphabet_size\t{} ({})", alphabet.size(), alphabet)?;
    writeln!(out, "pseudogenome_length_p\t{}", index.pg_len())?;
    writeln!(out, "compaction_ratio\t{}", index.compaction_ratio())?;
    writeln!(out, "sparsity\t{}", index.sparsity())?;
    let levels = index.cache_levels();
    writeln!(out, "cache_levels\tfull_k={} k12={} k13={}", levels.full_k, levels.partial12, levels.partial13)?;
    write_sizes(out, &index)?;
    writeln!(out, "file_bytes\t{written}")?;
    for (phase, t) in [
        ("ingest", ingest_time),
        ("pseudogenome", report.pseudogenome),
        ("read_array", report.read_array),
        ("suffix_array", report.suffix_array),
        ("count_cache", report.cache),
        ("save", save_time),
    ] {
        writeln!(out, "time_{phase}_s\t{:.3}", t.as_secs_f64())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_sizes(out: &mut impl Write, index: &PgsaIndex) -> io::Result<()> {
    let sizes = index.component_sizes();
    writeln!(out, "component\tbytes\tMB")?;
    for (name, bytes) in [
        ("pseudogenome", sizes.pg),
        ("read_array", sizes.read_array),
        ("suffix_array", sizes.sa),
        ("count_cache", sizes.lut),
        ("total", sizes.total()),
    ] {
        writeln!(out, "{name}\t{bytes}\t{:.1}", bytes as f64 / 1e6)?;
    }
    Ok(())
}

fn cmd_stats(path: &Path) -> pgidx::Result<ExitCode> {
    let index = load_index_from_path(path)?;
    let out = &mut io::stdout().lock();
    let d = index.dimensions();
    writeln!(out, "q\t{}\nm\t{}\nsigma\t{}\np\t{}\ns\t{}", d.q, d.m, d.alphabet.size(), d.p, d.s)?;
    let w = index.suffix_array().widths();
    writeln!(out, "sa_element_bytes\t{}", w.element_size())?;
    writeln!(out, "read_record_bytes\t{}", w.record_size())?;
    write_sizes(out, &index)?;
    Ok(ExitCode::SUCCESS)
}

/// One query as typed by the user.
struct QueryLine {
    text: String,
    positional: bool,
}

impl QueryLine {
    fn kmer(text: &str) -> Self {
        QueryLine { text: text.trim().to_string(), positional: false }
    }

    fn at(text: &str) -> Self {
        QueryLine { text: text.trim().to_string(), positional: true }
    }

    /// Lines containing a colon are READ:POS:LEN.
    fn detect(text: &str) -> Self {
        if text.contains(':') {
            Self::at(text)
        } else {
            Self::kmer(text)
        }
    }

    fn input(&self) -> Result<QueryInput, Error> {
        if self.positional {
            parse_at(&self.text)
        } else {
            Ok(QueryInput::pattern(&self.text))
        }
    }
}

fn parse_at(s: &str) -> Result<QueryInput, Error> {
    let bad = || Error::Config(format!("expected READ:POS:LEN, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [read, pos, len] = parts[..] else { return Err(bad()) };
    let read: u64 = read.trim().parse().map_err(|_| bad())?;
    let start = pos.trim().parse().map_err(|_| bad())?;
    let k = len.trim().parse().map_err(|_| bad())?;
    let read_id = read.checked_sub(1).and_then(|r| u32::try_from(r).ok()).ok_or(Error::UnknownReadId(read))?;
    Ok(QueryInput::at(read_id, start, k))
}

/// Reports read IDs 1-based, like the rest of the command-line output.
fn external_error(e: Error) -> Error {
    match e {
        Error::UnknownReadId(id) => Error::UnknownReadId(id + 1),
        e => e,
    }
}

struct Record {
    answer: Result<QueryAnswer, Error>,
    // Some(true) when the brute-force answer agrees
    oracle: Option<Result<bool, Error>>,
}

fn answer_one(session: &mut QuerySession, reads: Option<&ReadSet>, kind: QueryKind, line: &QueryLine) -> Record {
    let input = match line.input() {
        Ok(input) => input,
        Err(e) => return Record { answer: Err(e), oracle: None },
    };
    let input = &input;
    let answer = session.run(kind, input).map(QueryAnswer::normalized);
    let oracle = reads.map(|reads| {
        let want = oracle_query(reads, kind, input).map(QueryAnswer::normalized);
        match (&answer, want) {
            (Ok(got), Ok(want)) => Ok(*got == want),
            (Err(_), Err(_)) | (Err(Error::PatternTooShort { .. }), Ok(_)) => Ok(true),
            (Ok(_), Err(e)) => Err(e),
            (Err(_), Ok(_)) => Ok(false),
        }
    });
    Record { answer: answer.map_err(external_error), oracle }
}

fn tsv_payload(answer: &QueryAnswer) -> String {
    match answer {
        QueryAnswer::Count(n) => n.to_string(),
        QueryAnswer::Reads(v) => v.iter().map(|r| (r + 1).to_string()).collect::<Vec<_>>().join(","),
        QueryAnswer::Positions(v) => {
            v.iter().map(|o| format!("{}:{}", o.read_id + 1, o.pos)).collect::<Vec<_>>().join(",")
        }
    }
}

fn json_payload(answer: &QueryAnswer) -> Value {
    match answer {
        QueryAnswer::Count(n) => json!(n),
        QueryAnswer::Reads(v) => json!(v.iter().map(|r| r + 1).collect::<Vec<_>>()),
        QueryAnswer::Positions(v) => {
            Value::Array(v.iter().map(|o| json!({"read": o.read_id + 1, "pos": o.pos})).collect())
        }
    }
}

fn format_record(line: &QueryLine, kind: QueryKind, rec: &Record, format: OutputFormat) -> String {
    match format {
        OutputFormat::Tsv => {
            let payload = match &rec.answer {
                Ok(a) => tsv_payload(a),
                Err(e) => format!("error:{}:{}", e.kind(), e),
            };
            let mut s = format!("{}\t{kind}\t{payload}", line.text);
            match &rec.oracle {
                None => {}
                Some(Ok(true)) => s.push_str("\toracle:ok"),
                Some(Ok(false)) => s.push_str("\toracle:mismatch"),
                Some(Err(e)) => s.push_str(&format!("\toracle:error:{}", e.kind())),
            }
            s
        }
        OutputFormat::Json => {
            let mut obj = json!({"query": line.text, "type": kind.to_string()});
            match &rec.answer {
                Ok(a) => obj["result"] = json_payload(a),
                Err(e) => obj["error"] = json!({"kind": e.kind(), "message": e.to_string()}),
            }
            match &rec.oracle {
                None => {}
                Some(Ok(ok)) => obj["oracle"] = json!(if *ok { "ok" } else { "mismatch" }),
                Some(Err(e)) => obj["oracle"] = json!(format!("error:{}", e.kind())),
            }
            obj.to_string()
        }
    }
}

fn worker_count(jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var("PGIDX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    cap.unwrap_or(available).min(jobs.div_ceil(64)).max(1)
}

fn cmd_query(args: QueryArgs) -> pgidx::Result<ExitCode> {
    let mut lines = Vec::new();
    if let Some(kmer) = &args.kmer {
        lines.push(QueryLine::kmer(kmer));
    }
    if let Some(at) = &args.at {
        lines.push(QueryLine::at(at));
    }
    if let Some(path) = &args.batch {
        let source: Box<dyn BufRead> = if path.as_os_str() == "-" {
            Box::new(io::stdin().lock())
        } else {
            Box::new(BufReader::new(File::open(path)?))
        };
        for line in source.lines() {
            lines.push(QueryLine::detect(&line?));
        }
    }

    let index = load_index_from_path(&args.index)?;
    let reads = args.oracle.then(|| index.to_read_set());
    let workers = worker_count(lines.len());
    let chunk = lines.len().div_ceil(workers).max(1);
    let outputs: Vec<Vec<(String, bool)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = lines
            .chunks(chunk)
            .map(|part| {
                let (index, reads) = (&index, reads.as_ref());
                scope.spawn(move || {
                    let mut session = index.session();
                    part.iter()
                        .map(|line| {
                            let rec = answer_one(&mut session, reads, args.kind, line);
                            let mismatch = matches!(rec.oracle, Some(Ok(false)) | Some(Err(_)));
                            (format_record(line, args.kind, &rec, args.format), mismatch)
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("query worker panicked")).collect()
    });

    let mut out = BufWriter::new(io::stdout().lock());
    let mut mismatches = 0;
    for (text, mismatch) in outputs.iter().flatten() {
        writeln!(out, "{text}")?;
        mismatches += *mismatch as usize;
    }
    out.flush()?;
    if mismatches > 0 {
        eprintln!("error\toracle_mismatch\t{mismatches} answers differ from the brute-force oracle");
        return Ok(ExitCode::from(EXIT_INTERNAL));
    }
    Ok(ExitCode::SUCCESS)
}
