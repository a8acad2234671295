//! Builds a graph from a small Wikidata-style N-Triples dump, shows what the
//! loader kept and skipped, and round-trips it through a snapshot.
//!
//! ```text
//! cargo run --example ingest_ntriples
//! ```

use disjoint_audit::ingest::{load_ntriples, ParseMode};
use disjoint_audit::snapshot::{read_snapshot, write_snapshot};
use disjoint_audit::violations::summarize_all;

const DUMP: &str = r#"<http://www.wikidata.org/entity/Q1> <http://www.w3.org/2000/01/rdf-schema#label> "animal"@en .
<http://www.wikidata.org/entity/Q2> <http://www.w3.org/2000/01/rdf-schema#label> "plant"@en .
<http://www.wikidata.org/entity/Q3> <http://www.w3.org/2000/01/rdf-schema#label> "carnivorous plant"@en .
<http://www.wikidata.org/entity/Q3> <http://www.w3.org/2000/01/rdf-schema#label> "plante carnivore"@fr .
<http://www.wikidata.org/entity/Q3> <http://www.wikidata.org/prop/direct/P279> <http://www.wikidata.org/entity/Q2> .
<http://www.wikidata.org/entity/Q3> <http://www.wikidata.org/prop/direct/P279> <http://www.wikidata.org/entity/Q1> .
<http://www.wikidata.org/entity/Q4> <http://www.wikidata.org/prop/direct/P279> <http://www.wikidata.org/entity/Q3> .
<http://www.wikidata.org/entity/Q5> <http://www.wikidata.org/prop/direct/P31> <http://www.wikidata.org/entity/Q4> .
<http://www.wikidata.org/entity/Q6> <http://www.wikidata.org/prop/P2738> <http://www.wikidata.org/entity/statement/Q6-a> .
<http://www.wikidata.org/entity/statement/Q6-a> <http://www.wikidata.org/prop/qualifier/P11260> <http://www.wikidata.org/entity/Q1> .
<http://www.wikidata.org/entity/statement/Q6-a> <http://www.wikidata.org/prop/qualifier/P11260> <http://www.wikidata.org/entity/Q2> .
<http://www.wikidata.org/entity/statement/Q6-a> <http://wikiba.se/ontology#rank> <http://wikiba.se/ontology#NormalRank> .
<http://www.wikidata.org/entity/Q4> <http://schema.org/description> "a genus" .
this line is not a triple
"#;

fn main() {
    let (kg, report) = load_ntriples(DUMP.as_bytes(), ParseMode::Lenient).expect("lenient load never fails on bad lines");
    println!(
        "{} lines, {} triples, {} malformed, {} ignored",
        report.lines, report.triples, report.malformed_lines, report.skipped_triples
    );
    for sample in &report.malformed_samples {
        println!("  skipped {sample}");
    }
    println!("{:?}", kg.stats());

    let summary = summarize_all(&kg);
    for f in &summary.findings {
        let culprits: Vec<String> = f.culprits.iter().map(|c| c.class.to_string()).collect();
        println!("{} / {}: culprits {}", f.summary.pair.a, f.summary.pair.b, culprits.join(", "));
    }

    assert!(load_ntriples(DUMP.as_bytes(), ParseMode::Strict).is_err());

    let mut bytes = Vec::new();
    write_snapshot(&kg, &mut bytes).expect("snapshot");
    let back = read_snapshot(bytes.as_slice()).expect("read back");
    assert!(back == kg);
    println!("snapshot: {} bytes, identical after reload", bytes.len());
}
