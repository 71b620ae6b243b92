//! Translation backends: a file exchange, an HTTP client, and two
//! deterministic mock translators.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::text::{capitalize, starts_uppercase, tokenize};

const BUILTIN_DICTIONARY: &str = include_str!("../data/mock_dictionary.tsv");

pub const ENDPOINT_ENV: &str = "COMPOEVAL_MT_ENDPOINT";
pub const SOURCE_FILE: &str = "src.txt";
pub const HYPOTHESIS_FILE: &str = "hyp.txt";
const HTTP_IN_FLIGHT: usize = 4;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("invalid backend: {0}")]
    InvalidSpec(String),
    #[error("backend unreachable after {attempts} attempts: {message}")]
    Unreachable { attempts: usize, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("timed out after {0:?} waiting for {1}")]
    Timeout(Duration, PathBuf),
    #[error("mock dictionary line {line}: {message}")]
    Dictionary { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub source: String,
    pub target: String,
    pub backend: String,
    pub checkpoint: String,
}

/// Word-for-word translator with greedy longest-match phrase entries.
/// Unknown tokens pass through; a capitalised source token yields a
/// capitalised target token.
#[derive(Debug, Clone, Default)]
pub struct MockDictionary {
    entries: HashMap<Vec<String>, String>,
    longest: usize,
}

impl MockDictionary {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_DICTIONARY).expect("builtin dictionary parses")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BridgeError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, BridgeError> {
        let mut dict = MockDictionary::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| BridgeError::Dictionary {
                line: i + 1,
                message: message.to_string(),
            };
            let (en, nl) = line.split_once('\t').ok_or_else(|| err("expected english<TAB>dutch"))?;
            let key: Vec<String> = tokenize(en).into_iter().map(|t| t.to_lowercase()).collect();
            if key.is_empty() || nl.trim().is_empty() {
                return Err(err("empty entry"));
            }
            dict.longest = dict.longest.max(key.len());
            if dict.entries.insert(key, nl.trim().to_string()).is_some() {
                return Err(err("duplicate entry"));
            }
        }
        Ok(dict)
    }

    pub fn translate(&self, source: &str) -> String {
        let toks = tokenize(source);
        let lower: Vec<String> = toks.iter().map(|t| t.to_lowercase()).collect();
        let mut out = Vec::with_capacity(toks.len());
        let mut i = 0;
        while i < toks.len() {
            let hit = (1..=self.longest.min(toks.len() - i))
                .rev()
                .find_map(|n| self.entries.get(&lower[i..i + n]).map(|t| (n, t)));
            match hit {
                Some((n, target)) => {
                    let upper = starts_uppercase(&toks[i]);
                    out.push(if upper { capitalize(target) } else { target.clone() });
                    i += n;
                }
                None => {
                    out.push(toks[i].clone());
                    i += 1;
                }
            }
        }
        out.join(" ")
    }
}

/// Dictionary translation with one word swapped whenever a salted hash of
/// the source is odd.
#[derive(Debug, Clone)]
pub struct MockVolatile {
    pub dictionary: Arc<MockDictionary>,
    pub salt: String,
    pub word: String,
    pub replacement: String,
}

impl MockVolatile {
    pub fn new(dictionary: Arc<MockDictionary>, salt: impl Into<String>) -> Self {
        MockVolatile {
            dictionary,
            salt: salt.into(),
            word: "de".into(),
            replacement: "die".into(),
        }
    }

    pub fn flips(&self, source: &str) -> bool {
        let mut h = Sha256::new();
        h.update(self.salt.as_bytes());
        h.update([0u8]);
        h.update(source.as_bytes());
        h.finalize()[31] & 1 == 1
    }

    pub fn translate(&self, source: &str) -> String {
        let base = self.dictionary.translate(source);
        if !self.flips(source) {
            return base;
        }
        base.split(' ')
            .map(|t| {
                if t == self.word {
                    self.replacement.clone()
                } else if t == capitalize(&self.word) {
                    capitalize(&self.replacement)
                } else {
                    t.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Batch exchange through `<dir>/src.txt` and `<dir>/hyp.txt`.
#[derive(Debug, Clone)]
pub struct FileExchange {
    pub dir: PathBuf,
    pub poll_interval: Duration,
    pub timeout: Duration,
}

impl FileExchange {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FileExchange {
            dir: dir.into(),
            poll_interval: Duration::from_millis(50),
            timeout: Duration::from_secs(600),
        }
    }

    fn exchange(&self, sources: &[String]) -> Result<Vec<String>, BridgeError> {
        fs::create_dir_all(&self.dir)?;
        let hyp = self.dir.join(HYPOTHESIS_FILE);
        match fs::remove_file(&hyp) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
            _ => {}
        }
        let mut body = String::new();
        for s in sources {
            if s.contains('\n') {
                return Err(BridgeError::Protocol("source contains a newline".into()));
            }
            body.push_str(s);
            body.push('\n');
        }
        let tmp = self.dir.join(format!("{SOURCE_FILE}.tmp"));
        fs::write(&tmp, body)?;
        fs::rename(&tmp, self.dir.join(SOURCE_FILE))?;
        let start = Instant::now();
        loop {
            if let Ok(text) = fs::read_to_string(&hyp) {
                let complete = text.matches('\n').count();
                if complete > sources.len() {
                    return Err(BridgeError::Protocol(format!(
                        "{HYPOTHESIS_FILE} has {complete} lines for {} sources",
                        sources.len()
                    )));
                }
                if complete == sources.len() {
                    return Ok(text.lines().map(str::to_string).collect());
                }
            }
            if start.elapsed() >= self.timeout {
                return Err(BridgeError::Timeout(self.timeout, hyp));
            }
            std::thread::sleep(self.poll_interval);
        }
    }
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct TranslateResponse {
    translations: Vec<String>,
}

/// JSON client for `POST <endpoint>/translate`.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub endpoint: String,
    pub max_retries: usize,
    pub timeout: Duration,
    pub backoff: Duration,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpBackend {
            endpoint: endpoint.into(),
            max_retries: 3,
            timeout: Duration::from_secs(120),
            backoff: Duration::from_millis(100),
        }
    }

    /// Endpoint from [`ENDPOINT_ENV`].
    pub fn from_env() -> Option<Self> {
        std::env::var(ENDPOINT_ENV).ok().filter(|e| !e.is_empty()).map(Self::new)
    }

    fn url(&self) -> String {
        format!("{}/translate", self.endpoint.trim_end_matches('/'))
    }

    fn exchange(&self, agent: &ureq::Agent, sources: &[String]) -> Result<Vec<String>, BridgeError> {
        let url = self.url();
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff * (1 << (attempt - 1).min(6)));
            }
            let mut resp = match agent.post(&url).send_json(TranslateRequest { texts: sources }) {
                Ok(r) => r,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            let status = resp.status().as_u16();
            if status == 429 || status >= 500 {
                last = format!("HTTP {status}");
                continue;
            }
            if !(200..300).contains(&status) {
                return Err(BridgeError::Protocol(format!("HTTP {status}")));
            }
            let body: TranslateResponse = resp
                .body_mut()
                .read_json()
                .map_err(|e| BridgeError::Protocol(format!("malformed response: {e}")))?;
            if body.translations.len() != sources.len() {
                return Err(BridgeError::Protocol(format!(
                    "{} translations for {} sources",
                    body.translations.len(),
                    sources.len()
                )));
            }
            return Ok(body.translations);
        }
        Err(BridgeError::Unreachable {
            attempts: self.max_retries + 1,
            message: last,
        })
    }
}

#[derive(Debug, Clone)]
pub enum BackendKind {
    File(FileExchange),
    Http(HttpBackend),
    MockDictionary(Arc<MockDictionary>),
    MockVolatile(Arc<MockVolatile>),
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::File(_) => "file",
            BackendKind::Http(_) => "http",
            BackendKind::MockDictionary(_) => "mock-dictionary",
            BackendKind::MockVolatile(_) => "mock-volatile",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackendSpec {
    pub kind: BackendKind,
    pub batch_size: usize,
    /// Recorded on every translation, e.g. a training step.
    pub checkpoint_label: String,
    /// Backend id, e.g. the model's training-set size ("small").
    pub label: String,
}

impl BackendSpec {
    pub fn new(kind: BackendKind) -> Self {
        BackendSpec {
            label: kind.name().to_string(),
            kind,
            batch_size: 64,
            checkpoint_label: "final".into(),
        }
    }

    pub fn mock_dictionary() -> Self {
        Self::new(BackendKind::MockDictionary(Arc::new(MockDictionary::builtin())))
    }

    pub fn mock_volatile(salt: impl Into<String>) -> Self {
        let v = MockVolatile::new(Arc::new(MockDictionary::builtin()), salt);
        Self::new(BackendKind::MockVolatile(Arc::new(v)))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_checkpoint(mut self, checkpoint: impl Into<String>) -> Self {
        self.checkpoint_label = checkpoint.into();
        self
    }

    pub fn with_batch_size(mut self, n: usize) -> Self {
        self.batch_size = n;
        self
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        if self.batch_size == 0 {
            return Err(BridgeError::InvalidSpec("batch_size must be at least 1".into()));
        }
        if let BackendKind::Http(h) = &self.kind {
            if h.endpoint.trim().is_empty() {
                return Err(BridgeError::InvalidSpec("http backend needs an endpoint".into()));
            }
        }
        Ok(())
    }
}

/// Translate `sources` in order, one target per source.
pub fn translate_batch(sources: &[String], spec: &BackendSpec) -> Result<Vec<TranslationRecord>, BridgeError> {
    spec.validate()?;
    if sources.is_empty() {
        return Ok(Vec::new());
    }
    let targets: Vec<String> = match &spec.kind {
        BackendKind::MockDictionary(d) => sources.par_iter().map(|s| d.translate(s)).collect(),
        BackendKind::MockVolatile(v) => sources.par_iter().map(|s| v.translate(s)).collect(),
        BackendKind::File(f) => {
            let mut out = Vec::with_capacity(sources.len());
            for chunk in sources.chunks(spec.batch_size) {
                out.extend(f.exchange(chunk)?);
            }
            out
        }
        BackendKind::Http(h) => {
            let config = ureq::Agent::config_builder()
                .timeout_global(Some(h.timeout))
                .http_status_as_error(false)
                .build();
            let agent = ureq::Agent::new_with_config(config);
            let chunks: Vec<&[String]> = sources.chunks(spec.batch_size).collect();
            let mut results: Vec<Option<Result<Vec<String>, BridgeError>>> = (0..chunks.len()).map(|_| None).collect();
            for (wave, slots) in chunks.chunks(HTTP_IN_FLIGHT).zip(results.chunks_mut(HTTP_IN_FLIGHT)) {
                std::thread::scope(|scope| {
                    let handles: Vec<_> = wave.iter().map(|c| scope.spawn(|| h.exchange(&agent, c))).collect();
                    for (slot, handle) in slots.iter_mut().zip(handles) {
                        *slot = Some(handle.join().expect("translation thread panicked"));
                    }
                });
            }
            let mut out = Vec::with_capacity(sources.len());
            for r in results {
                out.extend(r.expect("every batch ran")?);
            }
            out
        }
    };
    if targets.len() != sources.len() {
        return Err(BridgeError::Protocol(format!("{} targets for {} sources", targets.len(), sources.len())));
    }
    Ok(sources
        .iter()
        .zip(targets)
        .map(|(s, t)| TranslationRecord {
            source: s.clone(),
            target: t,
            backend: spec.label.clone(),
            checkpoint: spec.checkpoint_label.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_examples() {
        let d = MockDictionary::builtin();
        assert_eq!(d.translate("the king sleeps ."), "de koning slaapt .");
        assert_eq!(d.translate("the poet criticises the king ."), "de dichter bekritiseert de koning .");
        assert_eq!(d.translate("The zorblax sleeps ."), "De zorblax slaapt .");
        assert_eq!(d.translate("the veterinary surgeon and the veterinarian"), "de dierenarts en de dierenarts");
        assert_eq!(d.translate("Zip code"), "Postcode");
    }

    #[test]
    fn conjunction_is_concatenation() {
        let d = MockDictionary::builtin();
        let (a, b) = ("The poet criticises the king", "the child sleeps .");
        assert_eq!(d.translate(&format!("{a} and {b}")), format!("{} en {}", d.translate(a), d.translate(b)));
    }

    #[test]
    fn volatile_is_deterministic_and_sometimes_swaps() {
        let v = MockVolatile::new(Arc::new(MockDictionary::builtin()), "s");
        let s = "the king sleeps .";
        assert_eq!(v.translate(s), v.translate(s));
        let flips = (0..200).filter(|i| v.flips(&format!("the king {i}"))).count();
        assert!((60..140).contains(&flips), "{flips}");
        let flipped = (0..50).map(|i| format!("the king {i}")).find(|s| v.flips(s)).unwrap();
        assert!(v.translate(&flipped).starts_with("die koning"));
    }

    #[test]
    fn empty_and_invalid() {
        assert!(translate_batch(&[], &BackendSpec::mock_dictionary()).unwrap().is_empty());
        let bad = BackendSpec::mock_dictionary().with_batch_size(0);
        assert!(matches!(translate_batch(&["x".into()], &bad), Err(BridgeError::InvalidSpec(_))));
        let no_endpoint = BackendSpec::new(BackendKind::Http(HttpBackend::new("")));
        assert!(matches!(translate_batch(&["x".into()], &no_endpoint), Err(BridgeError::InvalidSpec(_))));
    }

    #[test]
    fn records_carry_labels() {
        let spec = BackendSpec::mock_dictionary().with_label("small").with_checkpoint("ckpt3");
        let out = translate_batch(&["the king".into(), "a queen".into()], &spec).unwrap();
        assert_eq!(out[1].target, "een koningin");
        assert_eq!((out[0].backend.as_str(), out[0].checkpoint.as_str()), ("small", "ckpt3"));
    }
}
