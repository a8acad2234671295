//! JSON API over a loaded snapshot, backing the triage UI.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::annotation::{Annotation, AnnotationLog, MistakeKind, PairRef};
use crate::disjointness::{ordered, pair_counts, PairCounts};
use crate::kg_store::{EntityId, GraphStats, KnowledgeGraph};
use crate::violations::{analyze_all, summarize_all, Culprit, GlobalTotals, PairAnalysis, ViolationSummary};
use crate::whatif::{delta_report_from, Edit, WhatIfError};

/// Everything the handlers read. Built once at startup.
pub struct AppState {
    kg: KnowledgeGraph,
    analyses: Vec<PairAnalysis>,
    by_pair: HashMap<(EntityId, EntityId), usize>,
    /// Indices into `analyses` of pairs with violations, in report order.
    ranked: Vec<usize>,
    totals: GlobalTotals,
    pair_counts: PairCounts,
    annotations: AnnotationLog,
}

impl AppState {
    pub fn new(kg: KnowledgeGraph, annotations: AnnotationLog) -> Self {
        let analyses = analyze_all(&kg);
        let by_pair: HashMap<_, _> = analyses.iter().enumerate().map(|(i, a)| (a.pair.key(), i)).collect();
        let summary = summarize_all(&kg);
        let ranked = summary.findings.iter().map(|f| by_pair[&f.summary.pair.key()]).collect();
        let pair_counts = pair_counts(&kg);
        AppState {
            kg,
            analyses,
            by_pair,
            ranked,
            totals: summary.totals,
            pair_counts,
            annotations,
        }
    }

    fn pair(&self, a: EntityId, b: EntityId) -> Option<&PairAnalysis> {
        let key = ordered(a, b)?;
        self.by_pair.get(&key).map(|&i| &self.analyses[i])
    }

    fn entity_ref(&self, id: EntityId) -> EntityRef {
        EntityRef {
            id,
            label: self.kg.label(id).map(str::to_owned),
        }
    }

    fn pair_view(&self, s: &ViolationSummary) -> PairView {
        PairView {
            a: self.entity_ref(s.pair.a),
            b: self.entity_ref(s.pair.b),
            unions: s.pair.provenance.iter().map(|&u| self.entity_ref(u)).collect(),
            n_culprits: s.n_culprits,
            n_subclass_violations: s.n_subclass_violations,
            n_instance_violations: s.n_instance_violations,
            n_total: s.n_total,
            n_exempted: s.n_exempted,
        }
    }

    fn culprit_view(&self, c: &Culprit) -> CulpritView {
        CulpritView {
            class: self.entity_ref(c.class),
            cycle_group: c.cycle_group,
        }
    }
}

#[derive(Serialize)]
pub struct EntityRef {
    pub id: EntityId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Serialize)]
pub struct PairView {
    pub a: EntityRef,
    pub b: EntityRef,
    pub unions: Vec<EntityRef>,
    pub n_culprits: usize,
    pub n_subclass_violations: usize,
    pub n_instance_violations: usize,
    pub n_total: usize,
    pub n_exempted: usize,
}

#[derive(Serialize)]
pub struct CulpritView {
    pub class: EntityRef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_group: Option<EntityId>,
}

#[derive(Serialize)]
struct CulpritsResponse {
    pair: PairView,
    culprits: Vec<CulpritView>,
    exempted_culprits: Vec<CulpritView>,
}

#[derive(Serialize)]
struct ClassResponse {
    class: EntityRef,
    parents: Vec<EntityRef>,
    children: Vec<EntityRef>,
    marked_empty: bool,
    implied_empty: bool,
}

#[derive(Serialize)]
struct ContextPath {
    target: EntityRef,
    /// From the class up to `target`, both included; absent when the class
    /// is not below `target`.
    path: Option<Vec<EntityRef>>,
}

#[derive(Serialize)]
struct ContextResponse {
    class: EntityRef,
    paths: Vec<ContextPath>,
}

#[derive(Serialize)]
struct StatsResponse {
    graph: GraphStats,
    disjointness: PairCounts,
    totals: GlobalTotals,
    annotations: usize,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    index: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            index: None,
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body {
            error: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            edit_index: Option<usize>,
        }
        let body = Body {
            error: self.message,
            edit_index: self.index,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = State<Arc<AppState>>;

fn parse_id(s: &str) -> Result<EntityId, ApiError> {
    s.parse().map_err(|e| ApiError::bad_request(format!("{e}")))
}

async fn list_pairs(State(st): Shared) -> Json<Vec<PairView>> {
    Json(
        st.ranked
            .iter()
            .map(|&i| st.pair_view(&st.analyses[i].summary()))
            .collect(),
    )
}

async fn pair_culprits(State(st): Shared, Path((a, b)): Path<(String, String)>) -> ApiResult<CulpritsResponse> {
    let (a, b) = (parse_id(&a)?, parse_id(&b)?);
    let p = st
        .pair(a, b)
        .ok_or_else(|| ApiError::not_found(format!("no disjoint pair {a} {b}")))?;
    Ok(Json(CulpritsResponse {
        pair: st.pair_view(&p.summary()),
        culprits: p.culprits.iter().map(|c| st.culprit_view(c)).collect(),
        exempted_culprits: p.exempted_culprits.iter().map(|c| st.culprit_view(c)).collect(),
    }))
}

fn known_class(st: &AppState, id: &str) -> Result<EntityId, ApiError> {
    let id = parse_id(id)?;
    if st.kg.contains(id) {
        Ok(id)
    } else {
        Err(ApiError::not_found(format!("unknown entity {id}")))
    }
}

async fn class_info(State(st): Shared, Path(id): Path<String>) -> ApiResult<ClassResponse> {
    let id = known_class(&st, &id)?;
    Ok(Json(ClassResponse {
        class: st.entity_ref(id),
        parents: st.kg.direct_superclasses(id).into_iter().map(|p| st.entity_ref(p)).collect(),
        children: st.kg.direct_subclasses(id).into_iter().map(|c| st.entity_ref(c)).collect(),
        marked_empty: st.kg.is_marked_empty(id),
        implied_empty: st.kg.is_implied_empty(id),
    }))
}

#[derive(Deserialize)]
struct ContextQuery {
    pair: String,
}

async fn class_context(State(st): Shared, Path(id): Path<String>, Query(q): Query<ContextQuery>) -> ApiResult<ContextResponse> {
    let id = known_class(&st, &id)?;
    let (a, b) = q
        .pair
        .split_once(',')
        .ok_or_else(|| ApiError::bad_request("pair must be `a,b`"))?;
    let (a, b) = (parse_id(a.trim())?, parse_id(b.trim())?);
    let p = st
        .pair(a, b)
        .ok_or_else(|| ApiError::not_found(format!("no disjoint pair {a} {b}")))?;
    let paths = [p.pair.a, p.pair.b]
        .into_iter()
        .map(|target| ContextPath {
            target: st.entity_ref(target),
            path: st
                .kg
                .shortest_superclass_path(id, target)
                .map(|path| path.into_iter().map(|n| st.entity_ref(n)).collect()),
        })
        .collect();
    Ok(Json(ContextResponse {
        class: st.entity_ref(id),
        paths,
    }))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EditsBody {
    List(Vec<Edit>),
    Wrapped { edits: Vec<Edit> },
}

/// Parses edits one by one so the offending index can be reported.
fn parse_edit_body(body: &[u8]) -> Result<Vec<Edit>, ApiError> {
    let value: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}")))?;
    let list = match &value {
        serde_json::Value::Array(items) => items,
        serde_json::Value::Object(o) => match o.get("edits") {
            Some(serde_json::Value::Array(items)) => items,
            _ => return Err(ApiError::bad_request("expected an array of edits or {\"edits\": [...]}")),
        },
        _ => return Err(ApiError::bad_request("expected an array of edits")),
    };
    for (i, item) in list.iter().enumerate() {
        if let Err(e) = serde_json::from_value::<Edit>(item.clone()) {
            let mut err = ApiError::bad_request(format!("edit {i}: {e}"));
            err.index = Some(i);
            return Err(err);
        }
    }
    match serde_json::from_value::<EditsBody>(value) {
        Ok(EditsBody::List(edits) | EditsBody::Wrapped { edits }) => Ok(edits),
        Err(e) => Err(ApiError::bad_request(e.to_string())),
    }
}

async fn whatif(State(st): Shared, body: Bytes) -> Result<Response, ApiError> {
    let edits = parse_edit_body(&body)?;
    let report = tokio::task::spawn_blocking(move || delta_report_from(&st.kg, &st.analyses, &edits))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match report {
        Ok(r) => Ok(Json(r).into_response()),
        Err(e) => {
            let index = match &e {
                WhatIfError::UnknownEntity { index, .. } | WhatIfError::UnknownStatement { index, .. } => *index,
            };
            let mut err = ApiError::bad_request(e.to_string());
            err.index = Some(index);
            Err(err)
        }
    }
}

async fn list_annotations(State(st): Shared) -> Json<Vec<Annotation>> {
    Json(st.annotations.all())
}

#[derive(Deserialize)]
struct AnnotationInput {
    culprit: String,
    pair: PairInput,
    mistake_kind: String,
    #[serde(default)]
    note: String,
    #[serde(default)]
    proposed_edits: serde_json::Value,
    #[serde(default)]
    author: String,
}

#[derive(Deserialize)]
struct PairInput {
    a: String,
    b: String,
}

async fn post_annotation(State(st): Shared, body: Bytes) -> Result<Response, ApiError> {
    let input: AnnotationInput =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed annotation: {e}")))?;
    let mistake_kind: MistakeKind = input
        .mistake_kind
        .parse()
        .map_err(|e: crate::annotation::UnknownMistakeKind| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let culprit = known_class(&st, &input.culprit)?;
    let (a, b) = (parse_id(&input.pair.a)?, parse_id(&input.pair.b)?);
    let pair = st
        .pair(a, b)
        .ok_or_else(|| ApiError::not_found(format!("no disjoint pair {a} {b}")))?
        .pair
        .clone();
    let proposed_edits = match input.proposed_edits {
        serde_json::Value::Null => Vec::new(),
        v => parse_edit_body(v.to_string().as_bytes())?,
    };
    let stored = st
        .annotations
        .append(Annotation {
            culprit,
            pair: PairRef { a: pair.a, b: pair.b },
            mistake_kind,
            note: input.note,
            proposed_edits,
            author: input.author,
            timestamp: chrono::Utc::now(),
        })
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok((StatusCode::CREATED, Json(stored)).into_response())
}

async fn stats(State(st): Shared) -> Json<StatsResponse> {
    Json(StatsResponse {
        graph: st.kg.stats(),
        disjointness: st.pair_counts,
        totals: st.totals.clone(),
        annotations: st.annotations.len(),
    })
}

/// Routes under `/api`, plus static files from `ui_dir` at `/` if given.
pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/pairs", get(list_pairs))
        .route("/api/pairs/{a}/{b}/culprits", get(pair_culprits))
        .route("/api/class/{id}", get(class_info))
        .route("/api/class/{id}/context", get(class_context))
        .route("/api/whatif", axum::routing::post(whatif))
        .route("/api/annotations", get(list_annotations).post(post_annotation))
        .route("/api/stats", get(stats))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until the process is interrupted.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
