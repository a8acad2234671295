mod common;

use std::process::Command;

use common::endpoint::{select_json, store_for, LocalEndpoint};
use common::{golden_dir, random_graph, GenParams, CULPRIT_COUNT_GENE_LISTING, PAIR_EXTRACTION_LISTING};
use disjoint_audit::audit::run_remote_audit;
use disjoint_audit::ingest::load_native_fixture;
use disjoint_audit::ingest::sparql::{parse_results_json, EndpointConfig, SparqlClient, SparqlError};
use disjoint_audit::kg_store::{EntityId, KnowledgeGraph};
use disjoint_audit::query_gen::{
    check_syntax, culprit_count_query, culprit_count_query_with, label_query, pair_extraction_query,
    pair_extraction_query_with, render, violation_count_queries_with, QueryOptions, TEMPLATES,
};
use disjoint_audit::report::emit_all_numbers;
use disjoint_audit::violations::{analyze_all, summarize_all};
use oxigraph::sparql::SparqlEvaluator;
use std::time::Duration;

const WITH_PREFIXES: QueryOptions = QueryOptions { labels: false, prefixes: true };

fn id(s: &str) -> EntityId {
    s.parse().unwrap()
}

fn fixture() -> KnowledgeGraph {
    load_native_fixture(golden_dir()).unwrap()
}

fn count(store: &oxigraph::store::Store, query: &str) -> usize {
    let table = parse_results_json(&select_json(store, query).unwrap()).unwrap();
    match table.len() {
        0 => 0,
        _ => table.count(0, "count").unwrap() as usize,
    }
}

fn client(url: &str) -> SparqlClient {
    let mut cfg = EndpointConfig::new(url);
    cfg.backoff = Duration::from_millis(10);
    cfg.timeout = Duration::from_secs(20);
    SparqlClient::new(cfg).unwrap()
}

#[test]
fn pair_extraction_listing_is_byte_identical() {
    assert_eq!(pair_extraction_query(), PAIR_EXTRACTION_LISTING);
}

#[test]
fn culprit_count_listing_is_byte_identical() {
    assert_eq!(culprit_count_query(id("Q7187"), id("Q4406616")).unwrap(), CULPRIT_COUNT_GENE_LISTING);
    let args = ["Q7187".to_owned(), "Q4406616".to_owned()];
    assert_eq!(render("culprit-count", &args, QueryOptions::default()).unwrap(), CULPRIT_COUNT_GENE_LISTING);
}

#[test]
fn checked_in_templates_match_compiled_ones() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("queries");
    for t in TEMPLATES {
        let on_disk = std::fs::read_to_string(dir.join(format!("{}.rq", t.name))).unwrap();
        assert_eq!(on_disk, t.body, "{}", t.name);
    }
}

#[test]
fn generated_queries_parse_with_prefixes() {
    let ids = [id("Q7187"), id("Q4406616")];
    let mut queries = vec![
        pair_extraction_query_with(WITH_PREFIXES),
        pair_extraction_query_with(QueryOptions { labels: true, prefixes: true }),
        culprit_count_query_with(ids[0], ids[1], WITH_PREFIXES).unwrap(),
        label_query(&ids, WITH_PREFIXES),
    ];
    let (s, i) = violation_count_queries_with(ids[0], ids[1], WITH_PREFIXES).unwrap();
    queries.extend([s, i]);
    for query in &queries {
        check_syntax(query).unwrap();
        let _ = SparqlEvaluator::new().parse_query(query).unwrap_or_else(|e| panic!("{e}\n{query}"));
    }
    // the bare listings rely on endpoint-predeclared prefixes
    assert!(check_syntax(&pair_extraction_query()).is_ok());
    assert!(SparqlEvaluator::new().parse_query(&pair_extraction_query()).is_err());
}

#[test]
fn bad_template_arguments_are_rejected() {
    let opts = QueryOptions::default();
    assert!(render("culprit-count", &["Q1".to_owned()], opts).is_err());
    assert!(render("no-such-template", &[], opts).is_err());
    assert!(render("culprit-count", &["Q1".to_owned(), "P31".to_owned()], opts).is_err());
    assert!(render("label-lookup", &[], opts).is_err());
}

/// Engine counts against the generated SPARQL evaluated over the exported
/// triples. Subclass counts from SPARQL include exempted classes.
fn cross_validate(kg: &KnowledgeGraph) {
    let store = store_for(kg);
    for an in analyze_all(kg) {
        let (a, b) = (an.pair.a, an.pair.b);
        let sparql_culprits = count(&store, &culprit_count_query_with(a, b, WITH_PREFIXES).unwrap());
        let (sq, iq) = violation_count_queries_with(a, b, WITH_PREFIXES).unwrap();
        let ctx = format!("{a} {b}");
        assert_eq!(sparql_culprits, an.culprits.len() + an.exempted_culprits.len(), "culprits {ctx}");
        assert_eq!(count(&store, &sq), an.active.len() + an.exempted.len(), "subclass {ctx}");
        assert_eq!(count(&store, &iq), an.instance.len(), "instance {ctx}");
    }
}

#[test]
fn engine_counts_match_sparql_on_fixture() {
    cross_validate(&fixture());
}

#[test]
fn engine_counts_match_sparql_on_random_dags() {
    for seed in 0..12 {
        let g = random_graph(seed, GenParams { max_classes: 40, max_subclass: 90, max_instance: 40, ..GenParams::SMALL });
        cross_validate(&g.build());
    }
}

#[test]
fn sparql_pair_extraction_matches_engine() {
    let kg = fixture();
    let endpoint = LocalEndpoint::start(&kg);
    let remote = run_remote_audit(&client(&endpoint.url), true).unwrap();
    assert_eq!(remote.pairs, disjoint_audit::disjointness::all_disjoint_pairs(&kg));
    let local = summarize_all(&kg);
    let mut engine_csv = Vec::new();
    emit_all_numbers(local.summaries(), &kg, &mut engine_csv, true).unwrap();
    let mut remote_csv = Vec::new();
    emit_all_numbers(&remote.summaries, &remote.labels, &mut remote_csv, true).unwrap();
    assert_eq!(String::from_utf8(remote_csv).unwrap(), String::from_utf8(engine_csv).unwrap());
    // one extraction plus three counts per pair
    assert_eq!(endpoint.requests(), 1 + 3 * remote.pairs.len());
}

#[test]
fn client_retries_transient_failures() {
    let kg = fixture();
    let endpoint = LocalEndpoint::start_flaky(&kg, 2);
    let table = client(&endpoint.url).select(&pair_extraction_query_with(WITH_PREFIXES)).unwrap();
    assert!(!table.is_empty());
    assert_eq!(endpoint.requests(), 3);

    let endpoint = LocalEndpoint::start_flaky(&kg, 10);
    let mut cfg = EndpointConfig::new(endpoint.url.clone());
    cfg.backoff = Duration::from_millis(1);
    cfg.max_retries = 2;
    let err = SparqlClient::new(cfg).unwrap().select(&pair_extraction_query_with(WITH_PREFIXES)).unwrap_err();
    assert!(matches!(err, SparqlError::Status { status: 503, attempts: 3, .. }), "{err}");
}

#[test]
fn paginated_extraction_returns_every_row() {
    let kg = fixture();
    let endpoint = LocalEndpoint::start(&kg);
    let full = client(&endpoint.url).select(&pair_extraction_query_with(WITH_PREFIXES)).unwrap();
    let mut cfg = EndpointConfig::new(endpoint.url.clone());
    cfg.page_size = Some(3);
    let paged = SparqlClient::new(cfg).unwrap().select(&pair_extraction_query_with(WITH_PREFIXES)).unwrap();
    assert_eq!(paged.rows, full.rows);
}

#[test]
fn audit_command_writes_the_golden_numbers() {
    let kg = fixture();
    let endpoint = LocalEndpoint::start(&kg);
    let out = Command::new(env!("CARGO_BIN_EXE_disjoint-audit"))
        .args(["audit", "--endpoint", &endpoint.url, "--retries", "0"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = std::fs::read(golden_dir().join("expected/all_numbers.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), String::from_utf8(golden).unwrap());
}

#[test]
fn audit_command_exits_3_when_endpoint_is_down() {
    // bind then drop to get a port nobody listens on
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out = Command::new(env!("CARGO_BIN_EXE_disjoint-audit"))
        .args(["audit", "--endpoint", &format!("http://127.0.0.1:{port}/sparql"), "--retries", "0", "--timeout", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
