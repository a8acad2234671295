//! Records triage decisions for culprits in an append-only JSON-lines log
//! and reads them back, as the UI does through `/api/annotations`.
//!
//! ```text
//! cargo run --example annotations
//! ```

use disjoint_audit::annotation::{Annotation, AnnotationLog, MistakeKind, PairRef};
use disjoint_audit::whatif::Edit;

fn main() {
    let dir = tempfile_dir();
    let path = dir.join("annotations.jsonl");
    let log = AnnotationLog::open(&path).expect("open log");
    let q = |s: &str| s.parse().expect("entity id");

    log.append(Annotation {
        culprit: q("Q9000104"),
        pair: PairRef { a: q("Q9000101"), b: q("Q9000102") },
        mistake_kind: MistakeKind::MultipleSenses,
        note: "bow the weapon and bow the instrument share one item".into(),
        proposed_edits: vec![Edit::RemoveSubclassEdge { child: q("Q9000104"), parent: q("Q9000101") }],
        author: "example".into(),
        timestamp: chrono::Utc::now(),
    })
    .expect("append");

    let reopened = AnnotationLog::open(&path).expect("reopen");
    for a in reopened.all() {
        println!("{} in {} / {}: {} ({} proposed edits)", a.culprit, a.pair.a, a.pair.b, a.mistake_kind, a.proposed_edits.len());
    }
    println!("{}", std::fs::read_to_string(&path).expect("log file"));
    println!("mistake kinds: {}", MistakeKind::ALL.map(|k| k.as_str()).join(", "));
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("disjoint-audit-annotations-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}
