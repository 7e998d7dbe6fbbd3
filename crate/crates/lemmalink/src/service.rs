//! JSON-over-HTTP interface for search, the review queue, decisions,
//! manual lemmas and statistics.
//!
//! Every response body is a JSON object carrying `schema_version`. Writes go
//! through one lock; with a data directory each accepted mutation is
//! appended to the journal and synced before the response is sent.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lemmalink_core::{
    CorrespondenceId, Decision, LemmaRef, MappingError, PosTag, RelationCode, Status,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::StoreError;
use crate::persist::{DataDir, Event};
use crate::store::{
    LemmaSummary, MatchMode, NewLemma, Page, SearchFilters, Store, DEFAULT_PAGE_SIZE, MAX_PAGE_SIZE,
};

pub const SCHEMA_VERSION: u32 = 1;

pub struct AppState {
    store: RwLock<Store>,
    data: Option<DataDir>,
    token: Option<String>,
}

impl AppState {
    pub fn new(store: Store, data: Option<DataDir>, token: Option<String>) -> Arc<AppState> {
        Arc::new(AppState {
            store: RwLock::new(store),
            data,
            token: token.filter(|t| !t.is_empty()),
        })
    }

    /// Writes a full snapshot to the data directory, if there is one.
    pub fn checkpoint(&self) -> Result<(), StoreError> {
        let store = self.store.read().expect("store lock");
        match &self.data {
            Some(data) => data.save(&store),
            None => Ok(()),
        }
    }

    /// A copy of the current store, for inspection.
    pub fn snapshot(&self) -> Store {
        self.store.read().expect("store lock").clone()
    }

    /// Runs a mutation under the write lock and journals it on success. If
    /// the journal cannot be written the in-memory state is reloaded from
    /// disk so it never runs ahead of what is durable.
    fn mutate<T>(
        &self,
        event: Event,
        op: impl FnOnce(&mut Store) -> Result<T, StoreError>,
    ) -> Result<T, StoreError> {
        let mut store = self.store.write().expect("store lock");
        let out = op(&mut store)?;
        if let Some(data) = &self.data {
            if let Err(e) = data.append(&event) {
                let weights = store.mappings().weights();
                *store = data.load(weights)?;
                return Err(e);
            }
        }
        Ok(out)
    }
}

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    fields: Option<Value>,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message: message.into(),
            fields: None,
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        let (status, code) = match &e {
            StoreError::InvalidQuery(_) => (StatusCode::BAD_REQUEST, "invalid_query"),
            StoreError::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "invalid_argument"),
            StoreError::UnknownLexicon(_) => (StatusCode::NOT_FOUND, "unknown_lexicon"),
            StoreError::UnknownCorpus(_) => (StatusCode::NOT_FOUND, "unknown_corpus"),
            StoreError::UnknownLemma(_) => (StatusCode::NOT_FOUND, "unknown_lemma"),
            StoreError::DuplicateLexiconId(_) | StoreError::DuplicateCorpusId(_) => {
                (StatusCode::CONFLICT, "duplicate")
            }
            StoreError::Validation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation_failed"),
            StoreError::Mapping(m) => match m {
                MappingError::UnknownCorrespondence(_) => {
                    (StatusCode::NOT_FOUND, "unknown_correspondence")
                }
                MappingError::AlreadyDecided { .. } => (StatusCode::CONFLICT, "already_decided"),
                MappingError::DuplicatePair { .. } => (StatusCode::CONFLICT, "duplicate_pair"),
                MappingError::SelfMapping(_)
                | MappingError::MissingReviewer
                | MappingError::ManualAuto => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_mapping"),
            },
            StoreError::Persistence(_) | StoreError::Io(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "storage")
            }
        };
        let fields = match e {
            StoreError::Validation(errors) => {
                Some(serde_json::to_value(errors).expect("serializable"))
            }
            _ => None,
        };
        ApiError {
            status,
            code,
            message,
            fields,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code, "message": self.message });
        if let Some(fields) = self.fields {
            error["fields"] = fields;
        }
        (
            self.status,
            Json(json!({ "schema_version": SCHEMA_VERSION, "error": error })),
        )
            .into_response()
    }
}

/// Serializes `body` (an object) and stamps the schema version on it.
fn reply<T: Serialize>(status: StatusCode, body: T) -> Response {
    let mut value = serde_json::to_value(body).expect("serializable");
    if let Value::Object(map) = &mut value {
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
    }
    (status, Json(value)).into_response()
}

type Params = Query<HashMap<String, String>>;

fn param<T: std::str::FromStr>(
    params: &HashMap<String, String>,
    name: &str,
) -> Result<Option<T>, ApiError> {
    match params.get(name).map(|s| s.trim()).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| ApiError::bad_request(format!("invalid value \"{s}\" for {name}"))),
    }
}

fn paging(params: &HashMap<String, String>) -> Result<(usize, usize), ApiError> {
    let page = param::<usize>(params, "page")?.unwrap_or(1);
    let size = param::<usize>(params, "page_size")?.unwrap_or(DEFAULT_PAGE_SIZE);
    if page == 0 || size == 0 || size > MAX_PAGE_SIZE {
        return Err(ApiError::bad_request(format!(
            "page must be >= 1 and page_size within 1..={MAX_PAGE_SIZE}"
        )));
    }
    Ok((page, size))
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn search(
    State(app): State<Arc<AppState>>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let (page, page_size) = paging(&params)?;
    let pos = match params.get("pos").filter(|s| !s.is_empty()) {
        Some(p) => Some(
            p.parse::<PosTag>()
                .map_err(|_| ApiError::bad_request(format!("unknown POS tag \"{p}\"")))?,
        ),
        None => None,
    };
    let filters = SearchFilters {
        pos,
        lexicon: params.get("lexicon").filter(|s| !s.is_empty()).cloned(),
        mapped: param::<bool>(&params, "mapped")?,
    };
    let mode = param::<MatchMode>(&params, "mode")?.unwrap_or_default();
    let store = app.store.read().expect("store lock");
    let result = store.search_lemmas(
        params.get("q").map(String::as_str),
        &filters,
        mode,
        page,
        page_size,
    )?;
    Ok(reply(StatusCode::OK, result))
}

#[derive(Serialize)]
struct QueueItem {
    id: u64,
    status: &'static str,
    provenance: &'static str,
    relation: &'static str,
    precision: u8,
    /// Relation proposed to the reviewer: the provisional R1 for AUTO items.
    suggested_relation: &'static str,
    reviewer: Option<String>,
    timestamp: u64,
    l1: Option<LemmaSummary>,
    l2: Option<LemmaSummary>,
}

async fn queue(
    State(app): State<Arc<AppState>>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let (page, page_size) = paging(&params)?;
    let status = match params.get("status").filter(|s| !s.is_empty()) {
        None => Status::Auto,
        Some(s) => Status::parse(s)
            .ok_or_else(|| ApiError::bad_request(format!("unknown status \"{s}\"")))?,
    };
    let store = app.store.read().expect("store lock");
    let matching: Vec<_> = store
        .mappings()
        .iter()
        .filter(|c| c.status == status)
        .collect();
    let items = matching
        .iter()
        .skip((page - 1).saturating_mul(page_size))
        .take(page_size)
        .map(|c| QueueItem {
            id: c.id.0,
            status: c.status.as_str(),
            provenance: c.provenance.as_str(),
            relation: c.relation.code.as_str(),
            precision: c.relation.precision.percent(),
            suggested_relation: c.relation.code.as_str(),
            reviewer: c.reviewer.clone(),
            timestamp: c.timestamp,
            l1: store.summary(&c.l1),
            l2: store.summary(&c.l2),
        })
        .collect();
    Ok(reply(
        StatusCode::OK,
        Page {
            page,
            page_size,
            total: matching.len(),
            items,
        },
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionBody {
    relation: Option<String>,
    #[serde(default)]
    reject: bool,
    reviewer: String,
    #[serde(default)]
    force: bool,
}

async fn decide(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
    payload: Result<Json<DecisionBody>, JsonRejection>,
) -> Result<Response, ApiError> {
    let b = body(payload)?;
    let decision = match (b.relation.as_deref(), b.reject) {
        (Some(r), false) => Decision::Confirm(
            r.parse::<RelationCode>()
                .map_err(|e| ApiError::bad_request(e.to_string()))?,
        ),
        (None, true) => Decision::Reject,
        _ => {
            return Err(ApiError::bad_request(
                "give exactly one of relation or reject",
            ))
        }
    };
    let event = Event::Decision {
        id,
        decision,
        reviewer: b.reviewer.clone(),
        force: b.force,
    };
    let c = app.mutate(event, |s| {
        s.review(CorrespondenceId(id), decision, &b.reviewer, b.force)
    })?;
    Ok(reply(StatusCode::OK, json!({ "correspondence": c })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManualMapBody {
    l1: String,
    l2: String,
    relation: String,
    reviewer: String,
}

async fn manual_map(
    State(app): State<Arc<AppState>>,
    payload: Result<Json<ManualMapBody>, JsonRejection>,
) -> Result<Response, ApiError> {
    let b = body(payload)?;
    let l1: LemmaRef =
        b.l1.parse()
            .map_err(|e: lemmalink_core::lemma::InvalidLemmaRef| {
                ApiError::bad_request(e.to_string())
            })?;
    let l2: LemmaRef =
        b.l2.parse()
            .map_err(|e: lemmalink_core::lemma::InvalidLemmaRef| {
                ApiError::bad_request(e.to_string())
            })?;
    let relation: RelationCode =
        b.relation
            .parse()
            .map_err(|e: lemmalink_core::relation::UnknownRelation| {
                ApiError::bad_request(e.to_string())
            })?;
    let event = Event::ManualMap {
        l1: l1.clone(),
        l2: l2.clone(),
        relation,
        reviewer: b.reviewer.clone(),
    };
    let c = app.mutate(event, |s| s.manual_map(l1, l2, relation, &b.reviewer))?;
    Ok(reply(StatusCode::CREATED, json!({ "correspondence": c })))
}

async fn insert_lemma(
    State(app): State<Arc<AppState>>,
    payload: Result<Json<NewLemma>, JsonRejection>,
) -> Result<Response, ApiError> {
    let lemma = body(payload)?;
    let event = Event::InsertLemma {
        lemma: lemma.clone(),
    };
    let inserted = app.mutate(event, |s| s.insert_manual_lemma(&lemma))?;
    Ok(reply(StatusCode::CREATED, inserted))
}

fn list(params: &HashMap<String, String>, name: &str) -> Vec<String> {
    params
        .get(name)
        .map(|s| {
            s.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default()
}

async fn stats(
    State(app): State<Arc<AppState>>,
    Path(kind): Path<String>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    let store = app.store.read().expect("store lock");
    match kind.as_str() {
        "coverage" => {
            let sources = match params.get("sources") {
                Some(_) => list(&params, "sources"),
                None => store
                    .lexicons()
                    .map(|d| d.lexicon_id.clone())
                    .filter(|id| id != lemmalink_core::CANONICAL_NAMESPACE)
                    .collect(),
            };
            Ok(reply(StatusCode::OK, store.pos_coverage(&sources)?))
        }
        "relations" => {
            let scope = list(&params, "scope");
            let scope = match scope.as_slice() {
                [] => None,
                [a, b] => Some((a.as_str(), b.as_str())),
                _ => return Err(ApiError::bad_request("scope takes two lexicon ids")),
            };
            Ok(reply(StatusCode::OK, store.relation_counts(scope)?))
        }
        "iaa" => Ok(reply(StatusCode::OK, store.iaa())),
        "corpora" => Ok(reply(
            StatusCode::OK,
            json!({ "rows": store.corpus_coverage_table() }),
        )),
        other => Err(ApiError {
            status: StatusCode::NOT_FOUND,
            code: "unknown_report",
            message: format!("unknown report \"{other}\""),
            fields: None,
        }),
    }
}

async fn lexicons(State(app): State<Arc<AppState>>) -> Response {
    let store = app.store.read().expect("store lock");
    let items: Vec<_> = store.lexicons().cloned().collect();
    reply(StatusCode::OK, json!({ "items": items }))
}

async fn require_token(State(app): State<Arc<AppState>>, request: Request, next: Next) -> Response {
    if let Some(token) = &app.token {
        let given = request
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_str()) {
            return ApiError {
                status: StatusCode::UNAUTHORIZED,
                code: "unauthorized",
                message: "missing or wrong bearer token".into(),
                fields: None,
            }
            .into_response();
        }
    }
    next.run(request).await
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/lemmas", get(search).post(insert_lemma))
        .route("/api/lexicons", get(lexicons))
        .route("/api/mappings", get(queue).post(manual_map))
        .route("/api/mappings/{id}/decision", post(decide))
        .route("/api/stats/{kind}", get(stats))
        .layer(middleware::from_fn_with_state(app.clone(), require_token))
        .with_state(app)
}

/// Serves until SIGINT or, on Unix, SIGTERM.
pub async fn serve(listener: tokio::net::TcpListener, app: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(app))
        .with_graceful_shutdown(shutdown_signal())
        .await
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}
