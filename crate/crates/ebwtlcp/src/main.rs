//! Command-line front end: build, verify, inspect.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ebwtlcp::builder::{build, BuildOptions};
use ebwtlcp::ingest::{CollectionSource, InputFormat};
use ebwtlcp::meta::output_path;
use ebwtlcp::oracle::ORACLE_CAP;
use ebwtlcp::verify::{audit_build, load_outputs, verify_outputs, AuditReport};

#[derive(Parser)]
#[command(
    name = "ebwtlcp",
    version,
    about = "Build the BWT, LCP array and suffix array of a string collection via sequential disk scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the transform (and LCP/GSA) of a collection.
    Build(BuildArgs),
    /// Check outputs against the brute-force reference, or audit a fresh
    /// instrumented build of an input.
    Verify(VerifyArgs),
    /// Print rows of a finished build.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Input collection.
    #[arg(long)]
    input: PathBuf,
    /// Input layout: auto, lines, fasta or fastq.
    #[arg(long, default_value = "auto")]
    format: InputFormat,
    /// Where the outputs go: <prefix>.ebwt, <prefix>.lcp, ...
    #[arg(long)]
    output_prefix: PathBuf,
    /// Directory for working files; EBWTLCP_TMPDIR, then <prefix>.tmp,
    /// when omitted.
    #[arg(long)]
    tmp_dir: Option<PathBuf>,
    /// Also emit the generalized suffix array.
    #[arg(long)]
    with_gsa: bool,
    /// Skip the LCP array (transform only).
    #[arg(long)]
    no_lcp: bool,
    /// Fixed .lcp cell width in bytes (1, 2, 4 or 8); smallest fitting width
    /// when omitted.
    #[arg(long)]
    lcp_width: Option<u8>,
    /// Verify the finished outputs and fail on any mismatch.
    #[arg(long)]
    verify: bool,
    /// Largest collection (total cells) the brute-force reference is run on.
    #[arg(long, default_value_t = ORACLE_CAP)]
    oracle_cap: u64,
    /// Explicit alphabet (defaults to the distinct bytes of the input).
    #[arg(long)]
    alphabet: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Prefix of an existing build to verify.
    #[arg(long, required_unless_present = "input")]
    prefix: Option<PathBuf>,
    /// Input collection; with --prefix it provides ground truth, alone it
    /// triggers a fresh instrumented build in a temporary directory.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    format: InputFormat,
    #[arg(long, default_value_t = ORACLE_CAP)]
    oracle_cap: u64,
    /// Where the machine-readable key=value report goes
    /// (default <prefix>.audit).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    prefix: PathBuf,
    /// 1-based inclusive row range, e.g. 1..18. Whole table when omitted.
    #[arg(long)]
    range: Option<String>,
    /// Also print each row's suffix (needs --input or a .gsa file plus
    /// --input).
    #[arg(long)]
    suffixes: bool,
    /// The original input collection, for --suffixes.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    format: InputFormat,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Build(args) => cmd_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

fn tmp_dir_for(requested: Option<PathBuf>, prefix: &std::path::Path) -> PathBuf {
    requested
        .or_else(|| std::env::var_os("EBWTLCP_TMPDIR").map(PathBuf::from))
        .unwrap_or_else(|| {
            let mut os = prefix.as_os_str().to_os_string();
            os.push(".tmp");
            PathBuf::from(os)
        })
}

fn cmd_build(args: BuildArgs) -> anyhow::Result<ExitCode> {
    let source = CollectionSource::path(&args.input, args.format);
    let opts = BuildOptions {
        with_lcp: !args.no_lcp,
        with_gsa: args.with_gsa,
        lcp_width: args.lcp_width,
        alphabet: args.alphabet.map(|s| s.into_bytes()),
        ..BuildOptions::default()
    };
    let tmp = tmp_dir_for(args.tmp_dir, &args.output_prefix);
    let summary = build(&source, &args.output_prefix, &tmp, &opts, None)
        .with_context(|| format!("building {}", args.input.display()))?;
    eprintln!(
        "built {} cells (m={}, K={}, sigma={}) in {:.2?}",
        summary.meta.n, summary.meta.m, summary.meta.k, summary.meta.sigma, summary.counters.wall
    );

    if args.verify {
        let report = verify_outputs(&args.output_prefix, Some(&source), args.oracle_cap)?;
        print!("{}", report.render_table());
        if !report.all_passed() {
            bail!("verification failed");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_report(report: &AuditReport, path: &std::path::Path) -> anyhow::Result<()> {
    std::fs::write(path, report.render_kv())
        .with_context(|| format!("writing report {}", path.display()))?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let source = args
        .input
        .as_ref()
        .map(|p| CollectionSource::path(p, args.format));
    let (report, report_path) = match (&args.prefix, &source) {
        (Some(prefix), source) => {
            let report = verify_outputs(prefix, source.as_ref(), args.oracle_cap)?;
            let path = args.report.unwrap_or_else(|| output_path(prefix, "audit"));
            (report, path)
        }
        (None, Some(source)) => {
            let (report, summary) = audit_build(source, &BuildOptions::default(), None, args.oracle_cap)?;
            let path = args.report.unwrap_or_else(|| {
                output_path(args.input.as_ref().unwrap(), "audit")
            });
            drop(summary);
            (report, path)
        }
        (None, None) => unreachable!("clap enforces prefix or input"),
    };
    print!("{}", report.render_table());
    write_report(&report, &report_path)?;
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

fn parse_range(raw: &str, n: u64) -> anyhow::Result<(u64, u64)> {
    let (lo, hi) = raw
        .split_once("..")
        .with_context(|| format!("range `{raw}` is not of the form A..B"))?;
    let lo: u64 = lo.trim().parse().context("range start")?;
    let hi: u64 = hi.trim().parse().context("range end")?;
    if lo == 0 || hi < lo || hi > n {
        bail!("range {lo}..{hi} out of bounds (table holds {n} rows)");
    }
    Ok((lo, hi))
}

fn cmd_inspect(args: InspectArgs) -> anyhow::Result<ExitCode> {
    let outputs = load_outputs(&args.prefix)?;
    let n = outputs.meta.n;
    let (lo, hi) = match &args.range {
        Some(raw) => parse_range(raw, n)?,
        None => (1, n),
    };

    let suffixes: Option<Vec<Vec<u8>>> = if args.suffixes {
        let input = args
            .input
            .as_ref()
            .context("--suffixes needs --input to reconstruct suffix text")?;
        let source = CollectionSource::path(input, args.format);
        let mut strings = Vec::new();
        let mut reader = source.records()?;
        let mut buf = Vec::new();
        while reader.next_record(&mut buf)? {
            strings.push(buf.clone());
        }
        Some(strings)
    } else {
        None
    };
    let gsa_for_suffixes = match (&suffixes, &outputs.gsa) {
        (Some(_), Some(gsa)) => Some(gsa.clone()),
        (Some(strings), None) => {
            if n > ORACLE_CAP {
                bail!("--suffixes without a .gsa file needs a collection under {ORACLE_CAP} cells");
            }
            Some(ebwtlcp::oracle::naive_gsa(strings).entries)
        }
        _ => None,
    };

    let mut header = format!("{:>10}  {:>4}", "index", "ebwt");
    if outputs.lcp.is_some() {
        header.push_str(&format!("  {:>6}", "lcp"));
    }
    if outputs.gsa.is_some() {
        header.push_str(&format!("  {:>14}", "gsa"));
    }
    if suffixes.is_some() {
        header.push_str("  suffix");
    }
    println!("{header}");

    for i in lo..=hi {
        let idx = (i - 1) as usize;
        let b = outputs.ebwt[idx];
        let printable = if b.is_ascii_graphic() || b == b' ' {
            (b as char).to_string()
        } else {
            format!("{b:#04x}")
        };
        let mut row = format!("{i:>10}  {printable:>4}");
        if let Some(lcp) = &outputs.lcp {
            row.push_str(&format!("  {:>6}", lcp[idx]));
        }
        if let Some(gsa) = &outputs.gsa {
            let e = gsa[idx];
            row.push_str(&format!("  {:>14}", format!("({},{})", e.start, e.string_id)));
        }
        if let (Some(strings), Some(gsa)) = (&suffixes, &gsa_for_suffixes) {
            let e = gsa[idx];
            let s = &strings[e.string_id as usize];
            let text: String = s[e.start as usize - 1..]
                .iter()
                .map(|&b| b as char)
                .chain(std::iter::once(outputs.meta.end_marker_byte as char))
                .collect();
            row.push_str(&format!("  {text}"));
        }
        println!("{row}");
    }
    Ok(ExitCode::SUCCESS)
}
