//! Command-line front end. Exit codes: 0 success, 1 runtime or strict
//! parse failure, 2 usage or input error, 3 endpoint failure.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::annotation::AnnotationLog;
use crate::audit::run_remote_audit;
use crate::disjointness::{all_disjoint_pairs, pair_counts, DisjointPair};
use crate::ingest::{load_native_fixture, load_ntriples, write_native_fixture, EndpointConfig, ParseMode, SparqlClient};
use crate::kg_store::{EntityId, KnowledgeGraph};
use crate::query_gen::{render, QueryOptions};
use crate::report::{
    emit_all_culprits, emit_all_disjoints, emit_all_numbers, emit_delta, emit_distribution, emit_pair_summaries,
    emit_violations, open_sink, Metric,
};
use crate::service::{serve, AppState};
use crate::snapshot::{load_snapshot, save_snapshot};
use crate::violations::{analyze_pairs, summarize_pairs, AuditSummary, GlobalTotals};
use crate::whatif::{delta_report, parse_edits};

pub const ENDPOINT_ENV: &str = "DISJOINT_AUDIT_ENDPOINT";

#[derive(Parser, Debug)]
#[command(name = "disjoint-audit", version, about = "Audit class-disjointness constraints of a knowledge graph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load a dump or fixture and save it as a snapshot.
    Ingest(IngestArgs),
    /// Per-pair counts for every disjoint pair, clean ones included.
    Pairs(ReportArgs),
    /// Every violating class and item, one row each.
    Violations(ReportArgs),
    /// Culprits of each pair (AllCulprits format).
    Culprits(ReportArgs),
    /// Counts of pairs with violations plus a TOTAL row (AllNumbers format).
    Numbers(ReportArgs),
    /// Every disjoint pair with the unions stating it (AllDisjoints format).
    Disjoints(ReportArgs),
    /// Ranked per-pair values of one metric, for log-scale plots.
    Distribution(DistributionArgs),
    /// Count the violations a set of edits would eliminate.
    Whatif(WhatifArgs),
    /// Print a generated SPARQL query.
    GenQuery(GenQueryArgs),
    /// Run the audit against a SPARQL endpoint.
    Audit(AuditArgs),
    /// Serve the JSON API and the triage UI.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Snapshot written by `ingest`.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// TSV fixture directory.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    /// Versioned binary snapshot.
    Snapshot,
    /// TSV fixture directory.
    Tsv,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// N-Triples dump; `-` reads standard input.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub dump: Option<PathBuf>,
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Snapshot)]
    pub format: OutputFormat,
    /// Fail on the first malformed line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub source: Source,
    /// Restrict to one pair, e.g. `Q7187,Q4406616`.
    #[arg(long)]
    pub pair: Option<String>,
    /// Output CSV; `-` is standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DistributionArgs {
    #[command(flatten)]
    pub report: ReportArgs,
    /// subclass, instance or culprits.
    #[arg(long, default_value = "culprits")]
    pub metric: Metric,
}

#[derive(Args, Debug)]
pub struct WhatifArgs {
    #[command(flatten)]
    pub source: Source,
    /// JSON list of edits; `-` reads standard input.
    #[arg(long)]
    pub edits: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenQueryArgs {
    /// pair-extraction, pair-extraction-labels, culprit-count,
    /// subclass-violation-count, instance-violation-count or label-lookup.
    pub name: String,
    pub params: Vec<String>,
    /// Prepend PREFIX declarations.
    #[arg(long)]
    pub prefixes: bool,
    /// Also select English labels.
    #[arg(long)]
    pub labels: bool,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: String,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Leave out PREFIX declarations (for endpoints that predefine them).
    #[arg(long)]
    pub no_prefixes: bool,
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    /// Fetch extraction results in pages of this many rows.
    #[arg(long)]
    pub page_size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, default_value = "annotations.jsonl")]
    pub annotations: PathBuf,
    /// Directory of built UI assets served at `/`.
    #[arg(long)]
    pub ui: Option<PathBuf>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn runtime(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    fn endpoint(message: impl ToString) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Pairs(a) => report(a, ReportKind::Pairs),
        Command::Violations(a) => report(a, ReportKind::Violations),
        Command::Culprits(a) => report(a, ReportKind::Culprits),
        Command::Numbers(a) => report(a, ReportKind::Numbers),
        Command::Disjoints(a) => report(a, ReportKind::Disjoints),
        Command::Distribution(a) => report(a.report, ReportKind::Distribution(a.metric)),
        Command::Whatif(a) => whatif(a),
        Command::GenQuery(a) => gen_query(a),
        Command::Audit(a) => audit(a),
        Command::Serve(a) => serve_cmd(a),
    }
}

fn ingest(a: IngestArgs) -> CliResult {
    let kg = if let Some(dir) = &a.fixture {
        load_native_fixture(dir).map_err(Failure::runtime)?
    } else {
        let dump = a.dump.as_deref().expect("clap requires --dump or --fixture");
        let input: Box<dyn Read> = if dump == Path::new("-") {
            Box::new(io::stdin().lock())
        } else {
            Box::new(File::open(dump).map_err(|e| Failure::runtime(format!("{}: {e}", dump.display())))?)
        };
        let mode = if a.strict { ParseMode::Strict } else { ParseMode::Lenient };
        let (kg, report) =
            load_ntriples(BufReader::with_capacity(1 << 20, input), mode).map_err(Failure::runtime)?;
        eprintln!(
            "read {} lines: {} triples, {} malformed lines skipped, {} triples ignored",
            report.lines, report.triples, report.malformed_lines, report.skipped_triples
        );
        for sample in report.malformed_samples.iter().take(10) {
            eprintln!("  skipped {sample}");
        }
        kg
    };
    match a.format {
        OutputFormat::Snapshot => save_snapshot(&kg, &a.out).map_err(Failure::runtime)?,
        OutputFormat::Tsv => write_native_fixture(&kg, &a.out).map_err(Failure::runtime)?,
    }
    let s = kg.stats();
    println!(
        "nodes {}\nsubclass_edges {}\ninstance_edges {}\nlabels {}\ndisjoint_unions {}\nempty_classes {}",
        s.nodes, s.subclass_edges, s.instance_edges, s.labels, s.disjoint_unions, s.empty_classes
    );
    Ok(())
}

fn load(source: &Source) -> Result<KnowledgeGraph, Failure> {
    match (&source.snapshot, &source.fixture) {
        (Some(p), _) => load_snapshot(p).map_err(|e| Failure::runtime(format!("{}: {e}", p.display()))),
        (_, Some(d)) => load_native_fixture(d).map_err(Failure::runtime),
        (None, None) => Err(Failure::usage("one of --snapshot or --fixture is required")),
    }
}

fn parse_pair(s: &str) -> Result<(EntityId, EntityId), Failure> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Failure::usage(format!("--pair `{s}`: expected two ids separated by a comma")))?;
    let id = |x: &str| {
        x.trim()
            .parse::<EntityId>()
            .map_err(|e| Failure::usage(format!("--pair `{s}`: {e}")))
    };
    Ok((id(a)?, id(b)?))
}

/// Every pair, or only the one named by `--pair`.
fn select_pairs(kg: &KnowledgeGraph, pair: Option<&str>) -> Result<Vec<DisjointPair>, Failure> {
    let all = all_disjoint_pairs(kg);
    match pair {
        None => Ok(all),
        Some(s) => {
            let (a, b) = parse_pair(s)?;
            let found: Vec<DisjointPair> = all.into_iter().filter(|p| p.matches(a, b)).collect();
            if found.is_empty() {
                Err(Failure::usage(format!("{a} and {b} are not a disjoint pair")))
            } else {
                Ok(found)
            }
        }
    }
}

#[derive(Clone, Copy)]
enum ReportKind {
    Pairs,
    Violations,
    Culprits,
    Numbers,
    Disjoints,
    Distribution(Metric),
}

fn print_totals(t: &GlobalTotals) {
    eprintln!(
        "pairs {} (with violations {}): culprits {}, subclass violations {}, instance violations {}, total {}, exempted {}; \
         distinct culprit classes {}, violating classes {}, violating items {}",
        t.pairs,
        t.pairs_with_violations,
        t.culprits,
        t.subclass_violations,
        t.instance_violations,
        t.total_violations,
        t.exempted,
        t.distinct_culprit_classes,
        t.distinct_violating_classes,
        t.distinct_violating_items
    );
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::runtime(format!("writing CSV: {e}"))
}

fn report(a: ReportArgs, kind: ReportKind) -> CliResult {
    let kg = load(&a.source)?;
    let pairs = select_pairs(&kg, a.pair.as_deref())?;
    let sink = open_sink(&a.out).map_err(|e| Failure::runtime(format!("{}: {e}", a.out.display())))?;
    if let ReportKind::Disjoints = kind {
        emit_all_disjoints(&pairs, &kg, sink).map_err(csv_failure)?;
        let c = pair_counts(&kg);
        eprintln!(
            "pairs {} written; {} statements on {} classes ({} deprecated) give {} pairs before merging, {} after",
            pairs.len(),
            c.statements,
            c.union_classes,
            c.deprecated_statements,
            c.raw_pairs,
            c.merged_pairs
        );
        return Ok(());
    }
    if let ReportKind::Violations = kind {
        let analyses = analyze_pairs(&kg, &pairs);
        emit_violations(&analyses, &kg, sink).map_err(csv_failure)?;
        print_totals(&summarize_pairs(&kg, &pairs).totals);
        return Ok(());
    }
    let summary: AuditSummary = summarize_pairs(&kg, &pairs);
    match kind {
        ReportKind::Culprits => {
            let rows = summary.findings.iter().map(|f| (&f.summary.pair, f.culprits.as_slice()));
            emit_all_culprits(rows, &kg, sink).map_err(csv_failure)?;
        }
        ReportKind::Numbers => {
            emit_all_numbers(summary.summaries(), &kg, sink, true).map_err(csv_failure)?;
        }
        ReportKind::Pairs => {
            let clean = summary.clean_pairs.iter().map(|p| crate::violations::ViolationSummary {
                pair: p.clone(),
                n_culprits: 0,
                n_subclass_violations: 0,
                n_instance_violations: 0,
                n_total: 0,
                n_exempted: 0,
            });
            let all: Vec<_> = summary.summaries().cloned().chain(clean).collect();
            emit_pair_summaries(&all, &kg, sink).map_err(csv_failure)?;
        }
        ReportKind::Distribution(metric) => {
            emit_distribution(summary.summaries(), metric, sink).map_err(csv_failure)?;
        }
        ReportKind::Disjoints | ReportKind::Violations => unreachable!("handled above"),
    }
    print_totals(&summary.totals);
    Ok(())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path == Path::new("-") {
        io::stdin().read_to_string(&mut text)
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text))
    };
    res.map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn whatif(a: WhatifArgs) -> CliResult {
    let text = read_input(&a.edits)?;
    let edits = parse_edits(&text).map_err(|e| Failure::usage(format!("{}: {e}", a.edits.display())))?;
    let kg = load(&a.source)?;
    let report = delta_report(&kg, &edits).map_err(Failure::usage)?;
    let sink = open_sink(&a.out).map_err(|e| Failure::runtime(format!("{}: {e}", a.out.display())))?;
    emit_delta(&report, &kg, sink).map_err(csv_failure)?;
    let t = &report.totals;
    eprintln!(
        "{} edits, {} pairs changed: culprits {} -> {} ({} eliminated, {} introduced); \
         subclass violations {} -> {} ({} eliminated, {} introduced); \
         instance violations {} -> {} ({} eliminated, {} introduced)",
        edits.len(),
        report.pairs.iter().filter(|p| !p.counts.is_zero_change()).count(),
        t.culprits_before,
        t.culprits_after,
        t.culprits_eliminated,
        t.culprits_introduced,
        t.subclass_before,
        t.subclass_after,
        t.subclass_violations_eliminated,
        t.subclass_violations_introduced,
        t.instance_before,
        t.instance_after,
        t.instance_violations_eliminated,
        t.instance_violations_introduced,
    );
    Ok(())
}

fn gen_query(a: GenQueryArgs) -> CliResult {
    let opts = QueryOptions {
        labels: a.labels,
        prefixes: a.prefixes,
    };
    let q = render(&a.name, &a.params, opts).map_err(Failure::usage)?;
    let mut out = io::stdout().lock();
    out.write_all(q.as_bytes())
        .and_then(|_| out.flush())
        .map_err(Failure::runtime)
}

fn audit(a: AuditArgs) -> CliResult {
    let mut cfg = EndpointConfig::new(a.endpoint);
    cfg.max_retries = a.retries;
    cfg.timeout = Duration::from_secs(a.timeout);
    cfg.page_size = a.page_size;
    let client = SparqlClient::new(cfg).map_err(Failure::usage)?;
    let result = run_remote_audit(&client, !a.no_prefixes).map_err(Failure::endpoint)?;
    let sink = open_sink(&a.out).map_err(|e| Failure::runtime(format!("{}: {e}", a.out.display())))?;
    emit_all_numbers(&result.summaries, &result.labels, sink, true).map_err(csv_failure)?;
    let with = result.summaries.iter().filter(|s| s.has_violations()).count();
    eprintln!("pairs {} (with violations {})", result.pairs.len(), with);
    Ok(())
}

fn serve_cmd(a: ServeArgs) -> CliResult {
    let kg = load(&a.source)?;
    let log = AnnotationLog::open(&a.annotations).map_err(Failure::runtime)?;
    let state = Arc::new(AppState::new(kg, log));
    let addr = std::net::SocketAddr::new(a.host, a.port);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(Failure::runtime)?;
    eprintln!("serving on http://{addr}");
    rt.block_on(serve(state, addr, a.ui)).map_err(Failure::runtime)
}
