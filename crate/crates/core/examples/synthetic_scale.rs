//! Builds a large synthetic taxonomy and times a full audit.
//!
//! ```text
//! cargo run --release --example synthetic_scale            # ~5M/20M edges
//! cargo run --release --example synthetic_scale -- small
//! ```

use std::time::Instant;

use disjoint_audit::synth::{build_graph, SynthConfig};
use disjoint_audit::violations::summarize_all;

fn peak_rss_mib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib / 1024)
}

fn main() {
    let cfg = match std::env::args().nth(1).as_deref() {
        Some("small") => SynthConfig::small(),
        _ => SynthConfig::large(),
    };
    let t = Instant::now();
    let kg = build_graph(&cfg);
    let stats = kg.stats();
    println!(
        "built {} nodes, {} subclass edges, {} instance edges in {:.1?}",
        stats.nodes,
        stats.subclass_edges,
        stats.instance_edges,
        t.elapsed()
    );
    let t = Instant::now();
    let summary = summarize_all(&kg);
    let totals = &summary.totals;
    println!(
        "audited {} pairs in {:.1?}: {} with violations, {} culprits, {} subclass and {} instance violations",
        totals.pairs,
        t.elapsed(),
        totals.pairs_with_violations,
        totals.culprits,
        totals.subclass_violations,
        totals.instance_violations
    );
    if let Some(mib) = peak_rss_mib() {
        println!("peak resident set: {mib} MiB");
    }
}
