//! Backend selection from command-line flags.
//!
//! Each `--backend` value is a kind followed by optional comma-separated
//! settings, e.g. `mock-volatile,label=small,checkpoint=2,salt=s2` or
//! `file,dir=/tmp/x,label=full`.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Result;
use clap::Args;

use compoeval::bridge::{
    BackendKind, BackendSpec, FileExchange, HttpBackend, MockDictionary, MockVolatile, ENDPOINT_ENV,
};
use compoeval::report::pipeline::PipelineError;

#[derive(Args, Debug, Default)]
pub struct BackendArgs {
    /// Backend as `KIND[,key=value...]`; repeatable. Kinds: mock-dictionary,
    /// mock-volatile, http, file. Keys: label, checkpoint, batch, salt,
    /// endpoint, dir, timeout (seconds), retries.
    #[arg(long = "backend")]
    pub backends: Vec<String>,
    /// Default endpoint for http backends.
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: Option<String>,
    /// Dictionary file for the mock backends.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
}

fn invalid(msg: String) -> anyhow::Error {
    PipelineError::Config(msg).into()
}

impl BackendArgs {
    /// One spec per `--backend`, or the dictionary mock when none is given.
    pub fn specs(&self) -> Result<Vec<BackendSpec>> {
        let dictionary = Arc::new(match &self.dictionary {
            Some(p) => MockDictionary::load(p)?,
            None => MockDictionary::builtin(),
        });
        if self.backends.is_empty() {
            return Ok(vec![BackendSpec::new(BackendKind::MockDictionary(dictionary))]);
        }
        self.backends.iter().map(|b| self.parse_one(b, &dictionary)).collect()
    }

    fn parse_one(&self, text: &str, dictionary: &Arc<MockDictionary>) -> Result<BackendSpec> {
        let mut parts = text.split(',').map(str::trim);
        let kind = parts.next().unwrap_or_default();
        let mut settings = std::collections::BTreeMap::new();
        for p in parts.filter(|p| !p.is_empty()) {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| invalid(format!("backend setting {p:?} is not key=value")))?;
            settings.insert(k.trim(), v.trim().to_string());
        }
        let mut take = |k: &str| settings.remove(k);
        let seconds = |v: Option<String>| -> Result<Option<Duration>> {
            v.map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| *x > 0.0)
                    .map(Duration::from_secs_f64)
                    .ok_or_else(|| invalid(format!("bad timeout {s:?}")))
            })
            .transpose()
        };
        let backend = match kind {
            "mock-dictionary" => BackendKind::MockDictionary(dictionary.clone()),
            "mock-volatile" => {
                let salt = take("salt").unwrap_or_else(|| "volatile".into());
                BackendKind::MockVolatile(Arc::new(MockVolatile::new(dictionary.clone(), salt)))
            }
            "http" => {
                let endpoint = take("endpoint")
                    .or_else(|| self.endpoint.clone())
                    .ok_or_else(|| invalid(format!("http backend needs --endpoint or {ENDPOINT_ENV}")))?;
                let mut h = HttpBackend::new(endpoint);
                if let Some(t) = seconds(take("timeout"))? {
                    h.timeout = t;
                }
                if let Some(r) = take("retries") {
                    h.max_retries = r.parse().map_err(|_| invalid(format!("bad retries {r:?}")))?;
                }
                BackendKind::Http(h)
            }
            "file" => {
                let dir = take("dir").ok_or_else(|| invalid("file backend needs dir=PATH".into()))?;
                let mut f = FileExchange::new(dir);
                if let Some(t) = seconds(take("timeout"))? {
                    f.timeout = t;
                }
                BackendKind::File(f)
            }
            other => return Err(invalid(format!("unknown backend kind {other:?}"))),
        };
        let mut spec = BackendSpec::new(backend);
        if let Some(l) = take("label") {
            spec = spec.with_label(l);
        }
        if let Some(c) = take("checkpoint") {
            spec = spec.with_checkpoint(c);
        }
        if let Some(b) = take("batch") {
            spec = spec.with_batch_size(b.parse().map_err(|_| invalid(format!("bad batch size {b:?}")))?);
        }
        if let Some(k) = settings.keys().next() {
            return Err(invalid(format!("unknown backend setting {k:?} for {kind}")));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(backends: &[&str]) -> BackendArgs {
        BackendArgs {
            backends: backends.iter().map(|s| s.to_string()).collect(),
            ..BackendArgs::default()
        }
    }

    #[test]
    fn parses_settings() {
        let s = args(&["mock-volatile,label=small,checkpoint=2,batch=8"]).specs().unwrap();
        assert_eq!((s[0].label.as_str(), s[0].checkpoint_label.as_str(), s[0].batch_size), ("small", "2", 8));
        assert_eq!(s[0].kind.name(), "mock-volatile");
    }

    #[test]
    fn defaults_to_the_dictionary_mock() {
        let s = args(&[]).specs().unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].kind.name(), "mock-dictionary");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(args(&["nope"]).specs().is_err());
        assert!(args(&["http"]).specs().is_err());
        assert!(args(&["file"]).specs().is_err());
        assert!(args(&["mock-dictionary,colour=red"]).specs().is_err());
        assert!(args(&["mock-dictionary,label"]).specs().is_err());
    }

    #[test]
    fn http_endpoint_from_flag_or_setting() {
        let mut a = args(&["http,retries=1"]);
        a.endpoint = Some("http://127.0.0.1:9".into());
        let s = a.specs().unwrap();
        match &s[0].kind {
            BackendKind::Http(h) => assert_eq!((h.endpoint.as_str(), h.max_retries), ("http://127.0.0.1:9", 1)),
            _ => panic!("not http"),
        }
        let s = args(&["http,endpoint=http://x:1"]).specs().unwrap();
        assert!(matches!(&s[0].kind, BackendKind::Http(h) if h.endpoint == "http://x:1"));
    }
}
