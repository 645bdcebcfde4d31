use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::interviewer::Interviewer;
use super::session::{SessionId, SessionState, Snapshot, TurnOutcome};
use super::store::SessionStore;
use super::DialogueError;

/// Sessions behind a store, with turns on any one session serialized.
pub struct SessionManager {
    interviewer: Interviewer,
    store: Arc<dyn SessionStore>,
    locks: Mutex<HashMap<SessionId, Arc<Mutex<()>>>>,
}

impl SessionManager {
    pub fn new(interviewer: Interviewer, store: Arc<dyn SessionStore>) -> Self {
        Self {
            interviewer,
            store,
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn interviewer(&self) -> &Interviewer {
        &self.interviewer
    }

    pub fn store(&self) -> &Arc<dyn SessionStore> {
        &self.store
    }

    fn lock_for(&self, id: &SessionId) -> Arc<Mutex<()>> {
        self.locks
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry(id.clone())
            .or_default()
            .clone()
    }

    fn load(&self, id: &SessionId) -> Result<SessionState, DialogueError> {
        self.store
            .get(id)?
            .ok_or_else(|| DialogueError::UnknownSession(id.to_string()))
    }

    pub fn create(&self) -> Result<(SessionId, TurnOutcome), DialogueError> {
        let (state, outcome) = self.interviewer.start_session()?;
        self.store.put(&state)?;
        Ok((state.id, outcome))
    }

    fn with_session<F>(&self, id: &SessionId, f: F) -> Result<TurnOutcome, DialogueError>
    where
        F: FnOnce(&Interviewer, &mut SessionState) -> Result<TurnOutcome, DialogueError>,
    {
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut state = self.load(id)?;
        let outcome = f(&self.interviewer, &mut state)?;
        self.store.put(&state)?;
        Ok(outcome)
    }

    pub fn message(&self, id: &SessionId, text: &str) -> Result<TurnOutcome, DialogueError> {
        self.with_session(id, |iv, st| iv.handle_turn(st, text))
    }

    pub fn clarification(&self, id: &SessionId, text: &str) -> Result<TurnOutcome, DialogueError> {
        self.with_session(id, |iv, st| iv.resolve_clarification(st, text))
    }

    pub fn snapshot(&self, id: &SessionId) -> Result<Snapshot, DialogueError> {
        Ok(self.interviewer.snapshot(&self.load(id)?))
    }

    pub fn delete(&self, id: &SessionId) -> Result<bool, DialogueError> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let existed = self.store.delete(id)?;
        self.locks.lock().unwrap_or_else(|e| e.into_inner()).remove(id);
        Ok(existed)
    }

    pub fn flush(&self) -> Result<(), DialogueError> {
        Ok(self.store.flush()?)
    }
}
