use std::fmt;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use argchat_core::dialogue::{
    FileStore, Interviewer, MemoryStore, SessionManager, SessionStore, DEFAULT_GREETING,
};
use argchat_core::kb::{lint_kb, parse_paraphrases, Finding, KbError, KnowledgeBase, Severity};
use argchat_core::nlu::{
    Encoder, FallbackClient, HashingEncoder, KeywordFallback, Matcher, MatcherError, NluConfig, NoFallback,
    PromptFallback, DEFAULT_THRESHOLD,
};

use crate::remote::{RemoteCompletion, RemoteEncoder, DEFAULT_TIMEOUT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncoderMode {
    Builtin,
    Remote(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FallbackMode {
    Disabled,
    /// Keyword rules derived from the argument ids; no network.
    Stub,
    Remote(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoreMode {
    Memory,
    File(PathBuf),
}

fn remote_endpoint(s: &str) -> Result<Option<String>, String> {
    match s.strip_prefix("remote=") {
        Some("") => Err("remote mode needs an endpoint: remote=URL".into()),
        Some(url) => Ok(Some(url.to_owned())),
        None => Ok(None),
    }
}

impl FromStr for EncoderMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(url) = remote_endpoint(s)? {
            return Ok(Self::Remote(url));
        }
        match s {
            "builtin" => Ok(Self::Builtin),
            _ => Err(format!("unknown encoder mode {s:?}; expected builtin or remote=URL")),
        }
    }
}

impl FromStr for FallbackMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(url) = remote_endpoint(s)? {
            return Ok(Self::Remote(url));
        }
        match s {
            "disabled" => Ok(Self::Disabled),
            "stub" => Ok(Self::Stub),
            _ => Err(format!("unknown fallback mode {s:?}; expected disabled, stub or remote=URL")),
        }
    }
}

impl FromStr for StoreMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.strip_prefix("file=") {
            Some("") => Err("file store needs a directory: file=DIR".into()),
            Some(dir) => Ok(Self::File(dir.into())),
            None if s == "memory" => Ok(Self::Memory),
            None => Err(format!("unknown store mode {s:?}; expected memory or file=DIR")),
        }
    }
}

impl fmt::Display for EncoderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Builtin => f.write_str("builtin"),
            Self::Remote(url) => write!(f, "remote={url}"),
        }
    }
}

impl fmt::Display for FallbackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Disabled => f.write_str("disabled"),
            Self::Stub => f.write_str("stub"),
            Self::Remote(url) => write!(f, "remote={url}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid knowledge base {}: {source}", path.display())]
    Parse { path: PathBuf, source: KbError },
    #[error("knowledge base {} has lint errors:\n{}", path.display(), render_findings(findings))]
    Lint { path: PathBuf, findings: Vec<Finding> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Matcher(#[from] MatcherError),
    #[error(transparent)]
    Store(#[from] argchat_core::dialogue::StoreError),
}

fn render_findings(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(|f| format!("  {:?} {}: {}", f.severity, f.code, f.message))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Read {
        path: path.to_owned(),
        source,
    })
}

/// Reads and parses a knowledge base without linting it.
pub fn read_kb(graph: &Path, paraphrases: &Path) -> Result<KnowledgeBase, LoadError> {
    let graph_text = read(graph)?;
    let para_text = read(paraphrases)?;
    let kb = argchat_core::kb::parse_graph(&graph_text).map_err(|source| LoadError::Parse {
        path: graph.to_owned(),
        source,
    })?;
    let map = parse_paraphrases(&para_text).map_err(|source| LoadError::Parse {
        path: paraphrases.to_owned(),
        source,
    })?;
    kb.with_paraphrases(map).map_err(|source| LoadError::Parse {
        path: paraphrases.to_owned(),
        source,
    })
}

/// Reads a knowledge base and rejects it if lint reports errors.
pub fn load_kb(graph: &Path, paraphrases: &Path) -> Result<KnowledgeBase, LoadError> {
    let kb = read_kb(graph, paraphrases)?;
    let errors: Vec<Finding> = lint_kb(&kb)
        .into_iter()
        .filter(|f| f.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(LoadError::Lint {
            path: graph.to_owned(),
            findings: errors,
        });
    }
    Ok(kb)
}

/// Knowledge base and matching settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct KbConfig {
    pub kb_path: PathBuf,
    pub paraphrase_path: PathBuf,
    pub threshold: f64,
    pub encoder: EncoderMode,
    pub fallback: FallbackMode,
    /// Sent verbatim as the `Authorization` header to remote endpoints.
    pub auth: Option<String>,
    pub timeout: Duration,
    pub greeting: String,
}

impl KbConfig {
    pub fn new(kb_path: impl Into<PathBuf>, paraphrase_path: impl Into<PathBuf>) -> Self {
        Self {
            kb_path: kb_path.into(),
            paraphrase_path: paraphrase_path.into(),
            threshold: DEFAULT_THRESHOLD,
            encoder: EncoderMode::Builtin,
            fallback: FallbackMode::Disabled,
            auth: None,
            timeout: DEFAULT_TIMEOUT,
            greeting: DEFAULT_GREETING.to_owned(),
        }
    }

    pub fn nlu(&self) -> NluConfig {
        NluConfig {
            threshold: self.threshold,
            ..NluConfig::default()
        }
    }

    pub fn build_interviewer(&self) -> Result<Interviewer, LoadError> {
        self.nlu().validate().map_err(|e| LoadError::Config(e.to_string()))?;
        let kb = Arc::new(load_kb(&self.kb_path, &self.paraphrase_path)?);
        let encoder: Arc<dyn Encoder> = match &self.encoder {
            EncoderMode::Builtin => Arc::new(HashingEncoder::default()),
            EncoderMode::Remote(url) => Arc::new(
                RemoteEncoder::connect(url, self.auth.clone(), self.timeout).map_err(MatcherError::from)?,
            ),
        };
        let fallback: Arc<dyn FallbackClient> = match &self.fallback {
            FallbackMode::Disabled => Arc::new(NoFallback),
            FallbackMode::Stub => Arc::new(KeywordFallback::from_kb(&kb)),
            FallbackMode::Remote(url) => Arc::new(PromptFallback::new(RemoteCompletion::new(
                url,
                self.auth.clone(),
                self.timeout,
            ))),
        };
        let matcher = Matcher::new(kb, encoder, fallback, self.nlu())?;
        Ok(Interviewer::new(matcher, self.greeting.clone()))
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub kb: KbConfig,
    pub listen: SocketAddr,
    pub store: StoreMode,
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn build_manager(&self) -> Result<SessionManager, LoadError> {
        let interviewer = self.kb.build_interviewer()?;
        let store: Arc<dyn SessionStore> = match &self.store {
            StoreMode::Memory => Arc::new(MemoryStore::new()),
            StoreMode::File(dir) => Arc::new(FileStore::open(dir)?),
        };
        if let Some(dir) = &self.static_dir {
            if !dir.is_dir() {
                return Err(LoadError::Config(format!("static directory {} not found", dir.display())));
            }
        }
        Ok(SessionManager::new(interviewer, store))
    }
}
