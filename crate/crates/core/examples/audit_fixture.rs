//! Loads the bundled fixture, audits every disjoint pair and prints the
//! ranked findings followed by the AllNumbers CSV.
//!
//! ```text
//! cargo run --example audit_fixture [-- <fixture dir>]
//! ```

use std::path::PathBuf;

use disjoint_audit::ingest::load_native_fixture;
use disjoint_audit::report::emit_all_numbers;
use disjoint_audit::violations::summarize_all;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden"));
    let kg = load_native_fixture(&dir).expect("fixture");
    let summary = summarize_all(&kg);
    let label = |id| kg.label(id).unwrap_or("?").to_owned();

    for f in &summary.findings {
        let s = &f.summary;
        println!(
            "{} ({}) / {} ({}): {} culprits, {} subclass and {} instance violations",
            s.pair.a,
            label(s.pair.a),
            s.pair.b,
            label(s.pair.b),
            s.n_culprits,
            s.n_subclass_violations,
            s.n_instance_violations
        );
        for c in &f.culprits {
            println!("    culprit {} ({})", c.class, label(c.class));
        }
    }
    let t = &summary.totals;
    println!("{} pairs, {} with violations, {} culprits\n", t.pairs, t.pairs_with_violations, t.culprits);

    emit_all_numbers(summary.summaries(), &kg, std::io::stdout().lock(), true).expect("csv");
}
