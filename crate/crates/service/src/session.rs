use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use itinera_core::model::{Money, SymbolicRequest};

/// One line of the session log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Plan {
        session_id: String,
        at: DateTime<Utc>,
        request: SymbolicRequest,
        /// Grand total of every option that has an itinerary.
        options: BTreeMap<String, Money>,
    },
    Select {
        session_id: String,
        option: String,
        at: DateTime<Utc>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub session_id: String,
    pub option: String,
    pub selected_at: DateTime<Utc>,
    pub grand_total: Money,
}

#[derive(Debug, PartialEq, Eq)]
pub enum SelectError {
    UnknownSession,
    /// The option has no itinerary in this session.
    NotSelectable,
    Log(String),
}

struct Session {
    options: BTreeMap<String, Money>,
    selections: BTreeMap<String, DateTime<Utc>>,
}

#[derive(Default)]
struct Inner {
    sessions: HashMap<String, Session>,
    log: Option<File>,
}

impl Inner {
    fn apply(&mut self, event: &SessionEvent) {
        match event {
            SessionEvent::Plan {
                session_id,
                options,
                ..
            } => {
                self.sessions.insert(
                    session_id.clone(),
                    Session {
                        options: options.clone(),
                        selections: BTreeMap::new(),
                    },
                );
            }
            SessionEvent::Select {
                session_id,
                option,
                at,
            } => {
                if let Some(s) = self.sessions.get_mut(session_id) {
                    s.selections.entry(option.clone()).or_insert(*at);
                }
            }
        }
    }

    fn record(&mut self, event: SessionEvent) -> std::io::Result<()> {
        if let Some(log) = self.log.as_mut() {
            let line = serde_json::to_string(&event).expect("events serialize");
            writeln!(log, "{line}")?;
            log.flush()?;
        }
        self.apply(&event);
        Ok(())
    }
}

/// Sessions live in memory; with a log path every event is also appended
/// to a JSON-lines file, which is replayed on open.
#[derive(Default)]
pub struct SessionStore {
    inner: Mutex<Inner>,
}

impl SessionStore {
    pub fn in_memory() -> Self {
        SessionStore::default()
    }

    pub fn open(path: &Path) -> Result<Self, String> {
        let shown = path.display();
        let mut inner = Inner::default();
        if path.exists() {
            let file = File::open(path).map_err(|e| format!("{shown}: {e}"))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| format!("{shown}: {e}"))?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: SessionEvent = serde_json::from_str(&line)
                    .map_err(|e| format!("{shown}: line {}: {e}", i + 1))?;
                inner.apply(&event);
            }
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| format!("{shown}: {e}"))?;
        inner.log = Some(log);
        Ok(SessionStore {
            inner: Mutex::new(inner),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("session lock").sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Opens a session for a finished plan and returns its id.
    pub fn create(
        &self,
        request: &SymbolicRequest,
        options: BTreeMap<String, Money>,
    ) -> std::io::Result<String> {
        let mut inner = self.inner.lock().expect("session lock");
        let session_id = loop {
            let id = format!("{:016x}", rand::random::<u64>());
            if !inner.sessions.contains_key(&id) {
                break id;
            }
        };
        inner.record(SessionEvent::Plan {
            session_id: session_id.clone(),
            at: Utc::now(),
            request: request.clone(),
            options,
        })?;
        Ok(session_id)
    }

    /// Records a selection. Selecting the same option again returns the
    /// original timestamp and writes nothing.
    pub fn select(&self, session_id: &str, option: &str) -> Result<Selection, SelectError> {
        let mut inner = self.inner.lock().expect("session lock");
        let session = inner
            .sessions
            .get(session_id)
            .ok_or(SelectError::UnknownSession)?;
        let grand_total = *session
            .options
            .get(option)
            .ok_or(SelectError::NotSelectable)?;
        let previous = session.selections.get(option).copied();
        let selected_at = match previous {
            Some(at) => at,
            None => {
                let at = Utc::now();
                let event = SessionEvent::Select {
                    session_id: session_id.to_string(),
                    option: option.to_string(),
                    at,
                };
                inner
                    .record(event)
                    .map_err(|e| SelectError::Log(e.to_string()))?;
                at
            }
        };
        Ok(Selection {
            session_id: session_id.to_string(),
            option: option.to_string(),
            selected_at,
            grand_total,
        })
    }
}

#[cfg(test)]
mod tests {
    use itinera_core::datagen::demo_request;

    use super::*;

    #[test]
    fn log_replays_sessions_and_selections() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sessions.jsonl");
        let store = SessionStore::open(&path).unwrap();
        let options = BTreeMap::from([("min_cost".to_string(), Money::from_dollars(900))]);
        let id = store.create(&demo_request(), options).unwrap();
        let first = store.select(&id, "min_cost").unwrap();
        assert_eq!(store.select(&id, "min_cost").unwrap(), first);
        assert_eq!(
            store.select(&id, "better_hotel"),
            Err(SelectError::NotSelectable)
        );
        assert_eq!(
            store.select("nope", "min_cost"),
            Err(SelectError::UnknownSession)
        );
        drop(store);

        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let reopened = SessionStore::open(&path).unwrap();
        assert_eq!(reopened.len(), 1);
        assert_eq!(reopened.select(&id, "min_cost").unwrap(), first);
    }

    #[test]
    fn corrupt_log_is_reported_with_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sessions.jsonl");
        std::fs::write(&path, "\n{\"event\": \"nope\"}\n").unwrap();
        let err = SessionStore::open(&path).err().unwrap();
        assert!(err.contains("line 2"), "{err}");
    }
}
