use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::session::{export_transcript, SessionId, SessionState};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session store I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt session record: {0}")]
    Corrupt(#[from] serde_json::Error),
}

/// Keeps session state by token.
pub trait SessionStore: Send + Sync {
    fn put(&self, state: &SessionState) -> Result<(), StoreError>;
    fn get(&self, id: &SessionId) -> Result<Option<SessionState>, StoreError>;
    fn delete(&self, id: &SessionId) -> Result<bool, StoreError>;
    /// Makes pending writes durable. Called on shutdown.
    fn flush(&self) -> Result<(), StoreError> {
        Ok(())
    }
}

/// Volatile store; nothing survives the process.
#[derive(Debug, Default)]
pub struct MemoryStore {
    sessions: Mutex<HashMap<SessionId, SessionState>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SessionStore for MemoryStore {
    fn put(&self, state: &SessionState) -> Result<(), StoreError> {
        self.sessions
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(state.id.clone(), state.clone());
        Ok(())
    }

    fn get(&self, id: &SessionId) -> Result<Option<SessionState>, StoreError> {
        Ok(self.sessions.lock().unwrap_or_else(|e| e.into_inner()).get(id).cloned())
    }

    fn delete(&self, id: &SessionId) -> Result<bool, StoreError> {
        Ok(self.sessions.lock().unwrap_or_else(|e| e.into_inner()).remove(id).is_some())
    }
}

/// One directory per store: `<id>.json` holds the latest state (replaced
/// atomically) and `<id>.jsonl` the append-only transcript.
#[derive(Debug)]
pub struct FileStore {
    dir: PathBuf,
    written: Mutex<HashMap<SessionId, usize>>,
}

impl FileStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            written: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn state_path(&self, id: &SessionId) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn transcript_path(&self, id: &SessionId) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    fn lines_on_disk(&self, id: &SessionId) -> Result<usize, StoreError> {
        match fs::File::open(self.transcript_path(id)) {
            Ok(f) => Ok(BufReader::new(f).lines().count()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(0),
            Err(e) => Err(e.into()),
        }
    }
}

impl SessionStore for FileStore {
    fn put(&self, state: &SessionState) -> Result<(), StoreError> {
        let mut written = self.written.lock().unwrap_or_else(|e| e.into_inner());
        let done = match written.get(&state.id) {
            Some(n) => *n,
            None => self.lines_on_disk(&state.id)?,
        };
        if state.transcript.len() > done {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(self.transcript_path(&state.id))?;
            f.write_all(export_transcript(&state.transcript[done..]).as_bytes())?;
        }
        written.insert(state.id.clone(), state.transcript.len().max(done));

        let tmp = self.dir.join(format!("{}.json.tmp", state.id));
        fs::write(&tmp, serde_json::to_vec(state)?)?;
        fs::rename(&tmp, self.state_path(&state.id))?;
        Ok(())
    }

    fn get(&self, id: &SessionId) -> Result<Option<SessionState>, StoreError> {
        match fs::read(self.state_path(id)) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn delete(&self, id: &SessionId) -> Result<bool, StoreError> {
        self.written.lock().unwrap_or_else(|e| e.into_inner()).remove(id);
        let existed = match fs::remove_file(self.state_path(id)) {
            Ok(()) => true,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => false,
            Err(e) => return Err(e.into()),
        };
        match fs::remove_file(self.transcript_path(id)) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        Ok(existed)
    }

    fn flush(&self) -> Result<(), StoreError> {
        // Writes go straight to the file system; sync the directory entry.
        fs::File::open(&self.dir)?.sync_all()?;
        Ok(())
    }
}
