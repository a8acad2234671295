//! Runs the audit entirely through generated SPARQL against an endpoint and
//! writes the AllNumbers CSV. The endpoint must hold the truthy P279/P31
//! triples and the P2738 statements.
//!
//! ```text
//! cargo run --example remote_audit -- https://query.wikidata.org/sparql
//! ```

use disjoint_audit::audit::run_remote_audit;
use disjoint_audit::ingest::sparql::{EndpointConfig, SparqlClient};
use disjoint_audit::report::emit_all_numbers;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let Some(url) = std::env::args().nth(1).or_else(|| std::env::var("DISJOINT_AUDIT_ENDPOINT").ok()) else {
        eprintln!("usage: remote_audit <endpoint url>");
        std::process::exit(2);
    };
    let mut cfg = EndpointConfig::new(url);
    cfg.page_size = Some(10_000);
    let client = SparqlClient::new(cfg).expect("endpoint configuration");
    // public endpoints predeclare the wd/wdt/p/pq prefixes, but sending them is harmless
    let audit = match run_remote_audit(&client, true) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("audit failed: {e}");
            std::process::exit(3);
        }
    };
    eprintln!("{} pairs", audit.pairs.len());
    emit_all_numbers(&audit.summaries, &audit.labels, std::io::stdout().lock(), true).expect("csv");
}
