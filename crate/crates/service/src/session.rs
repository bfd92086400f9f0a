use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use discovery_bounds::{
    full_closure, load_study, minimal_transversals, preprocess, write_study, AnalysisConfig, ClosureMap, Error,
    HypothesisSet, LocalTest, PValueStudy, SetFamily, SimesShortcutState,
};
use lru::LruCache;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// Precomputed state for one uploaded study. Immutable after creation.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub study: PValueStudy,
    pub alpha: f64,
    pub method: LocalTest,
    pub shortcut: Option<SimesShortcutState>,
    pub exact: Option<ExactArtifacts>,
}

/// Closure-derived artifacts, present when `m` is within the closure cap.
#[derive(Debug)]
pub struct ExactArtifacts {
    pub closure: ClosureMap,
    pub defining: SetFamily,
    /// The dual family, or the reason it could not be enumerated.
    pub dual: Result<SetFamily, String>,
}

impl Session {
    /// Runs every precomputation for `study`. CPU bound; call off the async runtime.
    pub fn build(id: String, study: PValueStudy, config: AnalysisConfig) -> Result<Session, Error> {
        let exact = if study.m() <= config.closure_cap() {
            let closure = full_closure(&study, &config)?;
            let defining = closure.defining_family();
            let dual = minimal_transversals(&defining).map_err(|e| e.to_string());
            Some(ExactArtifacts {
                closure,
                defining,
                dual,
            })
        } else {
            None
        };
        let shortcut = match config.local_test() {
            LocalTest::Simes => Some(preprocess(&study, config.alpha())?),
            LocalTest::Fisher => None,
        };
        Ok(Session {
            id,
            study,
            alpha: config.alpha(),
            method: config.local_test(),
            shortcut,
            exact,
        })
    }

    pub fn m(&self) -> usize {
        self.study.m()
    }

    pub fn exact_available(&self) -> bool {
        self.exact.is_some()
    }

    /// Resolves labels to a set, naming the first unknown label.
    pub fn set_from_labels(&self, field: &'static str, labels: &[String]) -> Result<HypothesisSet, ApiError> {
        self.study.set_from_labels(labels).map_err(|e| match e {
            Error::UnknownLabel(label) => ApiError::unknown_label(field, &label),
            other => ApiError::invalid_field(field, other.to_string()),
        })
    }

    /// `d(R)`: the shortcut for Simes sessions, the closure otherwise.
    pub fn bound(&self, set: &HypothesisSet) -> Result<usize, ApiError> {
        let result = match (&self.shortcut, &self.exact) {
            (Some(state), _) => state.shortcut_bound(set),
            (None, Some(exact)) => exact.closure.discovery_bound(set),
            (None, None) => return Err(ApiError::internal("session has no bound engine")),
        };
        result.map(|b| b.d).map_err(|e| ApiError::internal(e.to_string()))
    }

    pub fn exact(&self, cap: usize) -> Result<&ExactArtifacts, ApiError> {
        self.exact.as_ref().ok_or_else(|| {
            ApiError::unavailable(
                "exact_unavailable",
                format!(
                    "set families need the full closure, which is only computed for m <= {cap}; this session has m = {}",
                    self.m()
                ),
            )
        })
    }

    pub fn family_labels(&self, family: &SetFamily) -> Vec<Vec<String>> {
        family.to_labels(self.study.labels())
    }
}

#[derive(Serialize, Deserialize)]
struct StoredMeta {
    alpha: f64,
    method: LocalTest,
}

/// LRU session store with optional write-through to a directory.
pub struct SessionStore {
    sessions: Mutex<LruCache<String, Arc<Session>>>,
    study_dir: Option<PathBuf>,
    closure_cap: usize,
}

impl SessionStore {
    pub fn new(capacity: usize, study_dir: Option<PathBuf>, closure_cap: usize) -> Self {
        let capacity = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        SessionStore {
            sessions: Mutex::new(LruCache::new(capacity)),
            study_dir,
            closure_cap,
        }
    }

    pub fn closure_cap(&self) -> usize {
        self.closure_cap
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores a session, persisting it first when a study directory is set.
    pub fn insert(&self, session: Session) -> Result<Arc<Session>, ApiError> {
        if let Some(dir) = &self.study_dir {
            persist(dir, &session).map_err(|e| ApiError::internal(format!("could not persist session: {e}")))?;
        }
        let session = Arc::new(session);
        self.sessions
            .lock()
            .unwrap()
            .put(session.id.clone(), Arc::clone(&session));
        Ok(session)
    }

    /// Looks a session up in memory, then in the study directory.
    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        if let Some(found) = self.sessions.lock().unwrap().get(id) {
            return Some(Arc::clone(found));
        }
        let dir = self.study_dir.as_ref()?;
        uuid::Uuid::parse_str(id).ok()?;
        let session = restore(dir, id, self.closure_cap).ok()?;
        let session = Arc::new(session);
        let mut sessions = self.sessions.lock().unwrap();
        // Another request may have restored it meanwhile; keep the first copy.
        Some(Arc::clone(sessions.get_or_insert(id.to_string(), || session)))
    }
}

fn persist(dir: &Path, session: &Session) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_study(&session.study, dir.join(format!("{}.csv", session.id)))?;
    let meta = serde_json::to_string(&StoredMeta {
        alpha: session.alpha,
        method: session.method,
    })
    .map_err(|e| Error::Validation(e.to_string()))?;
    let path = dir.join(format!("{}.json", session.id));
    std::fs::write(&path, meta).map_err(|e| Error::io(&path, e))
}

fn restore(dir: &Path, id: &str, closure_cap: usize) -> Result<Session, Error> {
    let path = dir.join(format!("{id}.json"));
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: StoredMeta = serde_json::from_str(&text).map_err(|e| Error::Validation(e.to_string()))?;
    let study = load_study(dir.join(format!("{id}.csv")))?;
    let config = AnalysisConfig::with_cap(meta.alpha, meta.method, closure_cap)?;
    Session::build(id.to_string(), study, config)
}
