//! Serves the JSON API for the fixture on localhost, with annotations kept
//! in a temporary file and an optional directory of UI assets.
//!
//! ```text
//! cargo run --example serve -- [port] [ui dir]
//! curl localhost:8080/api/pairs
//! curl localhost:8080/api/pairs/Q9000101/Q9000102/culprits
//! curl -X POST localhost:8080/api/whatif -d '[{"kind":"mark_empty_class","args":["Q9000104"]}]'
//! ```

use std::net::{Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use disjoint_audit::annotation::AnnotationLog;
use disjoint_audit::ingest::load_native_fixture;
use disjoint_audit::service::{serve, AppState};

fn main() {
    let mut args = std::env::args().skip(1);
    let port: u16 = args.next().map_or(8080, |p| p.parse().expect("port"));
    let ui = args.next().map(PathBuf::from);

    let kg = load_native_fixture(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden")).expect("fixture");
    let log_path = std::env::temp_dir().join("disjoint-audit-example-annotations.jsonl");
    let log = AnnotationLog::open(&log_path).expect("annotation log");
    println!("annotations in {}", log_path.display());
    let state = Arc::new(AppState::new(kg, log));

    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    println!("listening on http://{addr} (Ctrl-C to stop)");
    tokio::runtime::Runtime::new()
        .expect("runtime")
        .block_on(serve(state, addr, ui))
        .expect("server");
}
