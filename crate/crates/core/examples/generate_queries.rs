//! Prints the SPARQL used to reproduce the audit on a public endpoint.
//!
//! ```text
//! cargo run --example generate_queries [-- Q7187 Q4406616]
//! ```

use disjoint_audit::kg_store::EntityId;
use disjoint_audit::query_gen::{
    culprit_count_query, label_query, pair_extraction_query, pair_extraction_query_with, violation_count_queries,
    QueryOptions,
};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (a, b): (EntityId, EntityId) = match args.as_slice() {
        [a, b] => (a.parse().expect("entity id"), b.parse().expect("entity id")),
        _ => ("Q7187".parse().unwrap(), "Q4406616".parse().unwrap()),
    };

    println!("# pair extraction\n{}", pair_extraction_query());
    println!("# culprit count for {a} / {b}\n{}", culprit_count_query(a, b).expect("items"));
    let (subclass, instance) = violation_count_queries(a, b).expect("items");
    println!("# subclass violations\n{subclass}");
    println!("# instance violations\n{instance}");
    let opts = QueryOptions { labels: true, prefixes: true };
    println!("# pair extraction with labels and PREFIX lines\n{}", pair_extraction_query_with(opts));
    println!("# labels\n{}", label_query(&[a, b], QueryOptions::default()));
}
