//! A SPARQL endpoint on localhost backed by an in-memory Oxigraph store
//! holding the N-Triples export of a graph.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::{Form, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use disjoint_audit::ingest::write_ntriples;
use disjoint_audit::kg_store::KnowledgeGraph;
use oxigraph::io::RdfFormat;
use oxigraph::model::Term;
use oxigraph::sparql::{QueryResults, SparqlEvaluator};
use oxigraph::store::Store;
use serde_json::{json, Map, Value};

struct Shared {
    store: Store,
    fail_first: usize,
    requests: AtomicUsize,
}

pub struct LocalEndpoint {
    pub url: String,
    shared: Arc<Shared>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

pub fn store_for(kg: &KnowledgeGraph) -> Store {
    let mut nt = Vec::new();
    write_ntriples(kg, &mut nt).expect("export");
    let store = Store::new().expect("memory store");
    store.load_from_reader(RdfFormat::NTriples, nt.as_slice()).expect("load export");
    store
}

fn term_json(t: &Term) -> Value {
    match t {
        Term::NamedNode(n) => json!({"type": "uri", "value": n.as_str()}),
        Term::BlankNode(b) => json!({"type": "bnode", "value": b.as_str()}),
        Term::Literal(l) => match l.language() {
            Some(lang) => json!({"type": "literal", "value": l.value(), "xml:lang": lang}),
            None => json!({"type": "literal", "value": l.value(), "datatype": l.datatype().as_str()}),
        },
        #[allow(unreachable_patterns)]
        _ => json!({"type": "literal", "value": t.to_string()}),
    }
}

/// Runs a SELECT query and renders SPARQL 1.1 JSON results.
pub fn select_json(store: &Store, query: &str) -> Result<String, String> {
    let prepared = SparqlEvaluator::new().parse_query(query).map_err(|e| e.to_string())?;
    let results = prepared.on_store(store).execute().map_err(|e| e.to_string())?;
    let QueryResults::Solutions(solutions) = results else {
        return Err("not a SELECT query".into());
    };
    let vars: Vec<String> = solutions.variables().iter().map(|v| v.as_str().to_owned()).collect();
    let mut bindings = Vec::new();
    for s in solutions {
        let s = s.map_err(|e| e.to_string())?;
        let mut row = Map::new();
        for (v, t) in s.iter() {
            row.insert(v.as_str().to_owned(), term_json(t));
        }
        bindings.push(Value::Object(row));
    }
    Ok(json!({"head": {"vars": vars}, "results": {"bindings": bindings}}).to_string())
}

async fn handle(State(shared): State<Arc<Shared>>, Form(form): Form<HashMap<String, String>>) -> Response {
    let n = shared.requests.fetch_add(1, Ordering::SeqCst);
    if n < shared.fail_first {
        return (StatusCode::SERVICE_UNAVAILABLE, "busy").into_response();
    }
    let Some(query) = form.get("query") else {
        return (StatusCode::BAD_REQUEST, "missing query").into_response();
    };
    let shared2 = shared.clone();
    let query = query.clone();
    match tokio::task::spawn_blocking(move || select_json(&shared2.store, &query)).await {
        Ok(Ok(body)) => ([(header::CONTENT_TYPE, "application/sparql-results+json")], body).into_response(),
        Ok(Err(e)) => (StatusCode::BAD_REQUEST, e).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

impl LocalEndpoint {
    pub fn start(kg: &KnowledgeGraph) -> Self {
        Self::start_flaky(kg, 0)
    }

    /// Answers the first `fail_first` requests with 503.
    pub fn start_flaky(kg: &KnowledgeGraph, fail_first: usize) -> Self {
        let shared = Arc::new(Shared {
            store: store_for(kg),
            fail_first,
            requests: AtomicUsize::new(0),
        });
        let app = Router::new().route("/sparql", post(handle)).with_state(shared.clone());
        let std_listener = std::net::TcpListener::bind("127.0.0.1:0").expect("bind");
        std_listener.set_nonblocking(true).expect("nonblocking");
        let addr = std_listener.local_addr().expect("addr");
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(1)
                .enable_all()
                .build()
                .expect("runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .expect("serve");
            });
        });
        LocalEndpoint {
            url: format!("http://{addr}/sparql"),
            shared,
            shutdown: Some(tx),
            thread: Some(thread),
        }
    }

    pub fn requests(&self) -> usize {
        self.shared.requests.load(Ordering::SeqCst)
    }
}

impl Drop for LocalEndpoint {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
