//! Evaluates a proposed repair without touching the graph: removes the
//! `gene subclass of abstract object` edge from the fixture and prints the
//! per-pair delta.
//!
//! ```text
//! cargo run --example whatif [-- <edits.json>]
//! ```

use std::path::PathBuf;

use disjoint_audit::ingest::load_native_fixture;
use disjoint_audit::report::emit_delta;
use disjoint_audit::whatif::{delta_report, parse_edits};

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let edits_path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("fixtures/edits/gene_fix.json"));
    let kg = load_native_fixture(root.join("fixtures/golden")).expect("fixture");
    let edits = parse_edits(&std::fs::read_to_string(&edits_path).expect("edits file")).expect("edit list");
    let report = delta_report(&kg, &edits).expect("edits refer to known entities");

    let t = &report.totals;
    println!(
        "culprits {} -> {} ({} eliminated, {} introduced)",
        t.culprits_before, t.culprits_after, t.culprits_eliminated, t.culprits_introduced
    );
    println!(
        "subclass violations {} -> {}, instance violations {} -> {}",
        t.subclass_before, t.subclass_after, t.instance_before, t.instance_after
    );
    for c in &report.residual_culprits {
        println!("still a culprit: {} ({})", c.class, kg.label(c.class).unwrap_or("?"));
    }
    println!();
    emit_delta(&report, &kg, std::io::stdout().lock()).expect("csv");
}
