//! Streams a generated N-Triples dump through the loader and reports
//! throughput and peak memory. The dump is produced lazily, so memory use
//! reflects the loader alone.
//!
//! ```text
//! cargo run --release --example stream_ingest -- 100000000
//! ```

use std::time::Instant;

use disjoint_audit::ingest::{load_ntriples, ParseMode};
use disjoint_audit::synth::{SynthConfig, SyntheticDump};

fn peak_rss_mib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib / 1024)
}

fn main() {
    let lines: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("line count"))
        .unwrap_or(10_000_000);
    let cfg = SynthConfig {
        classes: 200_000,
        items: 500_000,
        ..SynthConfig::small()
    };
    let t = Instant::now();
    let (kg, report) = load_ntriples(SyntheticDump::new(cfg, lines, 4), ParseMode::Lenient).expect("lenient load");
    let secs = t.elapsed().as_secs_f64();
    let stats = kg.stats();
    println!(
        "{} lines ({} triples, {} skipped) in {secs:.1}s, {:.2}M lines/s",
        report.lines,
        report.triples,
        report.skipped_triples,
        report.lines as f64 / secs / 1e6
    );
    println!(
        "graph: {} nodes, {} subclass, {} instance, {} unions",
        stats.nodes, stats.subclass_edges, stats.instance_edges, stats.disjoint_unions
    );
    if let Some(mib) = peak_rss_mib() {
        println!("peak resident set: {mib} MiB");
    }
}
