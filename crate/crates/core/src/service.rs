//! HTTP/JSON labeling service over the strained bi-term queue.
//!
//! Endpoints: `GET /topics`, `GET /queue/next`, `GET /biterms/{key}/clauses`,
//! `POST /labels`, `GET /progress`. Writes go through one journal behind a
//! mutex; every accepted label is on disk before the response is sent.

use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::bagger::{clauses_for_biterm, record_label, Decision, LabelStore};
use crate::corpus::{Clause, Topic};
use crate::error::{Error, Result};
use crate::pipeline::{Pipeline, Stage};
use crate::strain::{CommonExpressionSet, FrequencyTable};
use crate::summarize::{BiTerm, BiTermOccurrence};

pub struct LabelingState {
    pub topics: Vec<Topic>,
    pub strained: CommonExpressionSet,
    /// Strained bi-terms with counts, count-descending.
    pub queue: Vec<(BiTerm, usize)>,
    pub occurrences: Vec<BiTermOccurrence>,
    pub clauses: Vec<Clause>,
    pub store: LabelStore,
}

pub type SharedState = Arc<Mutex<LabelingState>>;

impl LabelingState {
    pub fn new(
        topics: Vec<Topic>,
        table: &FrequencyTable,
        strained: CommonExpressionSet,
        occurrences: Vec<BiTermOccurrence>,
        clauses: Vec<Clause>,
        store: LabelStore,
    ) -> Self {
        let queue = table
            .ranked()
            .into_iter()
            .filter(|(b, _)| strained.contains(b))
            .map(|(b, n)| (b.clone(), n))
            .collect();
        LabelingState {
            topics,
            strained,
            queue,
            occurrences,
            clauses,
            store,
        }
    }

    /// Loads the strain outputs and opens the journal named in the config.
    pub fn from_pipeline(p: &Pipeline) -> Result<Self> {
        let strained = p.common_expressions().map_err(|e| match e {
            Error::MissingStage { .. } => Error::MissingStage {
                stage: "serve",
                required: Stage::Strain.as_str(),
                command: Stage::Strain.as_str(),
            },
            other => other,
        })?;
        Ok(LabelingState::new(
            p.config.topics()?,
            &p.frequency()?,
            strained,
            p.occurrences()?,
            p.clauses()?.into_iter().map(|r| r.clause).collect(),
            LabelStore::open(&p.config.journal_path())?,
        ))
    }

    pub fn progress(&self) -> Progress {
        let active = self.store.active();
        let mut p = Progress {
            labeled: 0,
            discarded: 0,
            remaining: 0,
            total: self.queue.len(),
        };
        for (b, _) in &self.queue {
            match active.get(b) {
                Some(Decision::Discard) => p.discarded += 1,
                Some(Decision::Topic(_)) => p.labeled += 1,
                None => p.remaining += 1,
            }
        }
        p
    }

    fn clause_views(&self, b: &BiTerm) -> Vec<ClauseView> {
        clauses_for_biterm(b, &self.occurrences, &self.clauses)
            .into_iter()
            .map(|c| ClauseView {
                review_id: c.review_id.clone(),
                index: c.index,
                text: c.text.clone(),
                negated: c.negated,
            })
            .collect()
    }

    pub fn next_item(&self) -> QueueNext {
        let active = self.store.active();
        match self.queue.iter().find(|(b, _)| !active.contains_key(b)) {
            Some((b, n)) => QueueNext {
                done: false,
                item: Some(QueueItem {
                    biterm: BiTermView::from(b),
                    count: *n,
                    clauses: self.clause_views(b),
                }),
            },
            None => QueueNext { done: true, item: None },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub labeled: usize,
    pub discarded: usize,
    pub remaining: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiTermView {
    pub key: String,
    pub object_stem: String,
    pub object_pos: String,
    pub evaluation_stem: String,
    pub evaluation_pos: String,
}

impl From<&BiTerm> for BiTermView {
    fn from(b: &BiTerm) -> Self {
        BiTermView {
            key: b.key(),
            object_stem: b.object_stem.clone(),
            object_pos: b.object_pos.to_string(),
            evaluation_stem: b.evaluation_stem.clone(),
            evaluation_pos: b.evaluation_pos.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseView {
    pub review_id: String,
    pub index: usize,
    pub text: String,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueItem {
    pub biterm: BiTermView,
    pub count: usize,
    pub clauses: Vec<ClauseView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueNext {
    pub done: bool,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub item: Option<QueueItem>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LabelRequest {
    pub biterm_key: String,
    pub decision: String,
    #[serde(default)]
    pub labeler: String,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_) | Error::Format { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

fn lock(state: &SharedState) -> std::sync::MutexGuard<'_, LabelingState> {
    state.lock().unwrap_or_else(|p| p.into_inner())
}

async fn topics(State(s): State<SharedState>) -> Json<Vec<Topic>> {
    Json(lock(&s).topics.clone())
}

async fn queue_next(State(s): State<SharedState>) -> Json<QueueNext> {
    Json(lock(&s).next_item())
}

async fn biterm_clauses(
    State(s): State<SharedState>,
    UrlPath(key): UrlPath<String>,
) -> std::result::Result<Json<Vec<ClauseView>>, ApiError> {
    let b: BiTerm = key.parse().map_err(|e: Error| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    Ok(Json(lock(&s).clause_views(&b)))
}

async fn post_label(
    State(s): State<SharedState>,
    Json(req): Json<LabelRequest>,
) -> std::result::Result<Json<serde_json::Value>, ApiError> {
    let b: BiTerm = req.biterm_key.parse()?;
    let decision: Decision = req.decision.parse()?;
    let mut st = lock(&s);
    let LabelingState {
        store, strained, topics, ..
    } = &mut *st;
    let labeler = if req.labeler.is_empty() { "anonymous" } else { req.labeler.as_str() };
    let rec = record_label(store, strained, topics, &b, decision, labeler)?;
    let progress = st.progress();
    Ok(Json(serde_json::json!({ "record": rec, "progress": progress })))
}

async fn progress(State(s): State<SharedState>) -> Json<Progress> {
    Json(lock(&s).progress())
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/topics", get(topics))
        .route("/queue/next", get(queue_next))
        .route("/biterms/{key}/clauses", get(biterm_clauses))
        .route("/labels", post(post_label))
        .route("/progress", get(progress))
        .with_state(state)
}

/// Serves the labeling endpoints on `127.0.0.1:port` until Ctrl-C.
pub async fn serve_labeling(pipeline: &Pipeline, port: u16) -> Result<()> {
    let state = Arc::new(Mutex::new(LabelingState::from_pipeline(pipeline)?));
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::Service(format!("cannot bind {addr}: {e}")))?;
    log::info!("labeling service on http://{addr}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Service(e.to_string()))
}
