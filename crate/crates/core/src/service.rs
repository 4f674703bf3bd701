//! HTTP JSON front end over a [`SnapshotStore`].
//!
//! `POST /v1/correct` takes `{"query": ..., "locale"?: ..., "application"?: ...}`
//! and `GET /v1/health` reports the live snapshot. Handlers are plain
//! functions from request bytes to a [`Reply`], so they can be exercised
//! without a socket; [`spawn`] wires them to a `tiny_http` server with a
//! fixed pool of worker threads and an optional periodic refresh thread.

use std::collections::BTreeMap;
use std::io::Read;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::artifacts::{load_artifacts, CONFIG_FILE};
use crate::error::{Error, Result};
use crate::features::RequestContext;
use crate::pipeline::{correct_query, Artifacts, CorrectionResult, RefreshConfig, SnapshotStore, DEFAULT_MIN_NEW_TERM_COUNT, DEFAULT_TOP_K};
use crate::ranker::{MODEL_FORMAT, MODEL_VERSION};
use crate::suggester::DEFAULT_MIN_CANDIDATES;
use crate::tsv;

pub const MAX_QUERY_CHARS: usize = 512;
pub const MAX_BODY_BYTES: usize = 64 * 1024;
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const ENV_LISTEN: &str = "SPELLER_LISTEN";
pub const ENV_ARTIFACT_DIR: &str = "SPELLER_ARTIFACT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: String,
    pub artifact_dir: PathBuf,
    /// Defaults to the dictionary locale.
    pub default_locale: Option<String>,
    /// Defaults to the first application the model knows.
    pub default_application: Option<String>,
    /// Accepted request locales; defaults to the model's.
    pub locales: Option<Vec<String>>,
    /// Accepted request applications; defaults to the model's.
    pub applications: Option<Vec<String>>,
    pub tau: Option<f64>,
    pub tau_by_application: BTreeMap<String, f64>,
    pub min_candidates: usize,
    pub top_k: usize,
    /// Query log re-read on every refresh, relative to the artifact directory.
    pub refresh_log: Option<PathBuf>,
    pub refresh_interval: Option<Duration>,
    pub min_new_term_count: u64,
    pub workers: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: DEFAULT_LISTEN.into(),
            artifact_dir: PathBuf::from("."),
            default_locale: None,
            default_application: None,
            locales: None,
            applications: None,
            tau: None,
            tau_by_application: BTreeMap::new(),
            min_candidates: DEFAULT_MIN_CANDIDATES,
            top_k: DEFAULT_TOP_K,
            refresh_log: None,
            refresh_interval: None,
            min_new_term_count: DEFAULT_MIN_NEW_TERM_COUNT,
            workers: 4,
        }
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

impl ServiceConfig {
    /// Parses `key = value` lines. Relative `artifact_dir` values are taken
    /// relative to the config file's directory.
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut config = ServiceConfig {
            artifact_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            ..ServiceConfig::default()
        };
        for kv in tsv::key_values(path, text) {
            let (line, key, value) = kv?;
            let bad = |what: &str| Error::load(path, line, format!("{key}: expected {what}, found {value:?}"));
            let number = || value.parse::<usize>().map_err(|_| bad("a nonnegative integer"));
            let real = || value.parse::<f64>().map_err(|_| bad("a number"));
            match key {
                "listen" => config.listen = value.to_owned(),
                "artifact_dir" => config.artifact_dir = config.artifact_dir.join(value),
                "default_locale" => config.default_locale = Some(value.to_owned()),
                "default_application" => config.default_application = Some(value.to_owned()),
                "locales" => config.locales = Some(list(value)),
                "applications" => config.applications = Some(list(value)),
                "tau" => config.tau = Some(real()?),
                "min_candidates" => config.min_candidates = number()?,
                "top_k" => config.top_k = number()?,
                "refresh_log" => config.refresh_log = Some(PathBuf::from(value)),
                "refresh_interval_secs" => {
                    config.refresh_interval = Some(Duration::from_secs(number()? as u64))
                }
                "min_new_term_count" => config.min_new_term_count = number()? as u64,
                "workers" => config.workers = number()?,
                _ => match key.strip_prefix("tau.") {
                    Some(app) if !app.is_empty() => {
                        config.tau_by_application.insert(app.to_owned(), real()?);
                    }
                    _ => return Err(Error::load(path, line, format!("unknown key {key:?}"))),
                },
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &tsv::read_to_string(path)?)
    }

    /// The config in `dir/speller.conf` if present, else defaults rooted at `dir`.
    pub fn for_artifact_dir(dir: &Path) -> Result<Self> {
        let path = dir.join(CONFIG_FILE);
        let mut config = if path.exists() {
            Self::load(&path)?
        } else {
            ServiceConfig::default()
        };
        config.artifact_dir = dir.to_path_buf();
        Ok(config)
    }

    /// Applies `SPELLER_LISTEN` and `SPELLER_ARTIFACT_DIR` from `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(listen) = lookup(ENV_LISTEN) {
            self.listen = listen;
        }
        if let Some(dir) = lookup(ENV_ARTIFACT_DIR) {
            self.artifact_dir = PathBuf::from(dir);
        }
    }

    pub fn refresh_log_path(&self) -> Option<PathBuf> {
        self.refresh_log.as_ref().map(|p| self.artifact_dir.join(p))
    }

    pub fn refresh_config(&self, artifacts: &Artifacts) -> RefreshConfig {
        RefreshConfig {
            min_new_term_count: self.min_new_term_count,
            max_edit_distance: artifacts.index.max_edit_distance(),
            prefix_length: artifacts.index.prefix_length(),
        }
    }

    /// Applies thresholds and limits to freshly loaded artifacts.
    pub fn configure(&self, artifacts: &mut Artifacts) -> Result<()> {
        if let Some(tau) = self.tau {
            artifacts.boost.set_default_tau(tau)?;
        }
        for (app, &tau) in &self.tau_by_application {
            artifacts.boost.set_tau(app, tau)?;
        }
        artifacts.min_candidates = self.min_candidates;
        artifacts.top_k = self.top_k;
        artifacts.validate()
    }
}

/// Request-context defaults and the accepted locale/application sets.
#[derive(Debug, Clone, PartialEq)]
struct Contexts {
    default_locale: String,
    default_application: String,
    locales: Vec<String>,
    applications: Vec<String>,
}

impl Contexts {
    fn resolve(config: &ServiceConfig, artifacts: &Artifacts) -> Result<Self> {
        let schema = artifacts.model.schema();
        let locales = config.locales.clone().unwrap_or_else(|| schema.locales.clone());
        let applications = config.applications.clone().unwrap_or_else(|| schema.applications.clone());
        for l in &locales {
            schema.locale_index(l)?;
        }
        for a in &applications {
            schema.application_index(a)?;
        }
        let default_locale = config
            .default_locale
            .clone()
            .unwrap_or_else(|| artifacts.dictionary.locale().to_owned());
        let default_application = config
            .default_application
            .clone()
            .or_else(|| applications.first().cloned())
            .ok_or_else(|| Error::Config("no applications configured".into()))?;
        if !locales.contains(&default_locale) {
            return Err(Error::Config(format!("default locale {default_locale:?} is not in {locales:?}")));
        }
        if !applications.contains(&default_application) {
            return Err(Error::Config(format!(
                "default application {default_application:?} is not in {applications:?}"
            )));
        }
        Ok(Contexts {
            default_locale,
            default_application,
            locales,
            applications,
        })
    }
}

/// A status code and JSON document.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub status: u16,
    pub body: Value,
}

impl Reply {
    fn error(status: u16, message: impl Into<String>) -> Self {
        Reply {
            status,
            body: json!({ "error": message.into() }),
        }
    }
}

#[derive(Debug, Deserialize)]
struct CorrectRequest {
    query: String,
    locale: Option<String>,
    application: Option<String>,
}

pub struct Service {
    store: SnapshotStore,
    config: ServiceConfig,
    contexts: Contexts,
}

impl Service {
    /// Loads and configures the artifacts named by `config`.
    pub fn open(config: ServiceConfig) -> Result<Self> {
        let artifacts = load_artifacts(&config.artifact_dir)?;
        Self::with_artifacts(config, artifacts)
    }

    pub fn with_artifacts(config: ServiceConfig, mut artifacts: Artifacts) -> Result<Self> {
        config.configure(&mut artifacts)?;
        let contexts = Contexts::resolve(&config, &artifacts)?;
        if let Some(log) = config.refresh_log_path() {
            if !log.is_file() {
                return Err(Error::Config(format!("refresh log {} does not exist", log.display())));
            }
        }
        Ok(Service {
            store: SnapshotStore::new(artifacts)?,
            config,
            contexts,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn store(&self) -> &SnapshotStore {
        &self.store
    }

    pub fn handle_correct(&self, body: &[u8]) -> Reply {
        let request: CorrectRequest = match serde_json::from_slice(body) {
            Ok(r) => r,
            Err(e) => return Reply::error(400, format!("malformed request: {e}")),
        };
        if request.query.trim().is_empty() {
            return Reply::error(400, "query must not be empty");
        }
        let chars = request.query.chars().count();
        if chars > MAX_QUERY_CHARS {
            return Reply::error(400, format!("query has {chars} characters; the limit is {MAX_QUERY_CHARS}"));
        }
        let context = match self.context(request.locale, request.application) {
            Ok(c) => c,
            Err(e) => return Reply::error(400, e.to_string()),
        };
        match self.correct(&request.query, &context) {
            Ok(result) => Reply {
                status: 200,
                body: json!({
                    "original": result.original,
                    "corrected": result.corrected,
                    "tokens": result.tokens,
                    "latency_ms": result.elapsed.as_secs_f64() * 1000.0,
                }),
            },
            Err(e) => Reply::error(503, format!("artifacts unavailable: {e}")),
        }
    }

    /// Fills in configured defaults and checks the result against the
    /// accepted sets.
    pub fn context(&self, locale: Option<String>, application: Option<String>) -> Result<RequestContext> {
        let locale = locale.unwrap_or_else(|| self.contexts.default_locale.clone());
        let application = application.unwrap_or_else(|| self.contexts.default_application.clone());
        if !self.contexts.locales.contains(&locale) {
            return Err(Error::Argument(format!("unknown locale {locale:?}")));
        }
        if !self.contexts.applications.contains(&application) {
            return Err(Error::Argument(format!("unknown application {application:?}")));
        }
        Ok(RequestContext::new(locale, application))
    }

    /// Corrects against the current snapshot.
    pub fn correct(&self, query: &str, context: &RequestContext) -> Result<CorrectionResult> {
        correct_query(query, context, &self.store.current().artifacts)
    }

    pub fn handle_health(&self) -> Reply {
        let snapshot = self.store.current();
        let a = &snapshot.artifacts;
        let mut mwe_apps: Vec<&str> = a.mwe.keys().map(String::as_str).collect();
        mwe_apps.sort_unstable();
        Reply {
            status: 200,
            body: json!({
                "status": "ok",
                "snapshot_version": snapshot.version,
                "snapshot_published_at_ms": snapshot.published_at_ms,
                "dictionary": {
                    "locale": a.dictionary.locale(),
                    "terms": a.dictionary.len(),
                    "fingerprint": format!("{:016x}", a.dictionary.fingerprint()),
                },
                "index": {
                    "variants": a.index.variant_count(),
                    "prefix_length": a.index.prefix_length(),
                    "max_edit_distance": a.index.max_edit_distance(),
                },
                "model": {
                    "format": MODEL_FORMAT,
                    "version": MODEL_VERSION,
                    "layer_dims": a.model.layer_dims(),
                },
                "mwe_applications": mwe_apps,
                "boost_rules": a.boost.rule_count(),
            }),
        }
    }

    /// Re-reads the configured query log and publishes the result.
    pub fn refresh(&self) -> Result<()> {
        let log = self
            .config
            .refresh_log_path()
            .ok_or_else(|| Error::Config("no refresh_log configured".into()))?;
        let config = self.config.refresh_config(&self.store.current().artifacts);
        let (snapshot, stats) = self.store.refresh_from_log(&log, &config)?;
        eprintln!(
            "refreshed to snapshot {}: {} terms updated, {} added",
            snapshot.version, stats.updated_terms, stats.new_terms
        );
        Ok(())
    }

    /// Routes one request. Unknown paths get 404, known paths with the
    /// wrong method 405.
    pub fn route(&self, method: &str, url: &str, body: &[u8]) -> Reply {
        let path = url.split('?').next().unwrap_or(url);
        match (method, path) {
            ("POST", "/v1/correct") => self.handle_correct(body),
            ("GET", "/v1/health") => self.handle_health(),
            (_, "/v1/correct" | "/v1/health") => Reply::error(405, format!("{method} not allowed on {path}")),
            _ => Reply::error(404, format!("no route for {path}")),
        }
    }
}

/// A running server. Dropping it without [`ServerHandle::shutdown`] leaves
/// the threads running until the process exits.
pub struct ServerHandle {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    workers: Vec<JoinHandle<()>>,
    refresher: Option<(Sender<()>, JoinHandle<()>)>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the workers exit.
    pub fn wait(self) {
        for w in self.workers {
            let _ = w.join();
        }
    }

    pub fn shutdown(self) {
        for _ in &self.workers {
            self.server.unblock();
        }
        if let Some((stop, handle)) = self.refresher {
            let _ = stop.send(());
            let _ = handle.join();
        }
        for w in self.workers {
            let _ = w.join();
        }
    }
}

fn respond(service: &Service, mut request: tiny_http::Request) {
    let mut body = Vec::new();
    let reply = match request
        .as_reader()
        .take(MAX_BODY_BYTES as u64 + 1)
        .read_to_end(&mut body)
    {
        Err(e) => Reply::error(400, format!("could not read body: {e}")),
        Ok(n) if n > MAX_BODY_BYTES => Reply::error(413, "request body too large"),
        Ok(_) => service.route(request.method().as_str(), request.url(), &body),
    };
    let header = tiny_http::Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..])
        .expect("static header is valid");
    let response = tiny_http::Response::from_string(reply.body.to_string())
        .with_status_code(reply.status)
        .with_header(header);
    let _ = request.respond(response);
}

/// Binds `service.config().listen` and starts serving.
pub fn spawn(service: Arc<Service>) -> Result<ServerHandle> {
    let listen = service.config().listen.clone();
    let server = tiny_http::Server::http(&listen)
        .map_err(|e| Error::Config(format!("cannot listen on {listen}: {e}")))?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| Error::Config(format!("{listen} is not an IP address")))?;
    let server = Arc::new(server);
    let workers = (0..service.config().workers.max(1))
        .map(|_| {
            let (server, service) = (server.clone(), service.clone());
            thread::spawn(move || {
                while let Ok(request) = server.recv() {
                    respond(&service, request);
                }
            })
        })
        .collect();
    let refresher = match (service.config().refresh_log.as_ref(), service.config().refresh_interval) {
        (Some(_), Some(interval)) if !interval.is_zero() => {
            let (stop, stopped) = mpsc::channel::<()>();
            let service = service.clone();
            let handle = thread::spawn(move || loop {
                match stopped.recv_timeout(interval) {
                    Err(RecvTimeoutError::Timeout) => {
                        if let Err(e) = service.refresh() {
                            eprintln!("refresh failed, keeping current snapshot: {e}");
                        }
                    }
                    _ => break,
                }
            });
            Some((stop, handle))
        }
        _ => None,
    };
    Ok(ServerHandle {
        addr,
        server,
        workers,
        refresher,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_delete_index, DictionaryBuilder};
    use crate::features::FeatureSchema;
    use crate::mlp::{MlpModel, DEFAULT_HIDDEN};
    use crate::mwe::MweMap;

    fn artifacts() -> Artifacts {
        let mut b = DictionaryBuilder::new("en");
        for (w, c) in [("museum", 10), ("medal", 20), ("creative", 5), ("cloud", 7), ("photoshop", 9), ("express", 4)] {
            b.add_word_count(w, c).unwrap();
        }
        let d = b.build().unwrap();
        let index = build_delete_index(&d, 2, 7);
        let model = MlpModel::zeros(FeatureSchema::default(), DEFAULT_HIDDEN, 0.0).unwrap();
        let mut m = MweMap::new("cchome");
        m.insert("creativecloud", "creative cloud").unwrap();
        m.insert("photo shop express", "photoshop express").unwrap();
        Artifacts::new(d, index, model).unwrap().with_mwe(m)
    }

    fn service(config: ServiceConfig) -> Service {
        Service::with_artifacts(config, artifacts()).unwrap()
    }

    fn cchome() -> ServiceConfig {
        ServiceConfig {
            default_application: Some("cchome".into()),
            ..ServiceConfig::default()
        }
    }

    #[test]
    fn mwe_through_the_handler() {
        let s = service(cchome());
        let r = s.handle_correct(br#"{"query":"creativecloud"}"#);
        assert_eq!(r.status, 200);
        assert_eq!(r.body["corrected"], "creative cloud");
        assert_eq!(r.body["original"], "creativecloud");
        assert!(r.body["latency_ms"].as_f64().unwrap() >= 0.0);
        let r = s.handle_correct(br#"{"query":"photo shop express","application":"cchome"}"#);
        assert_eq!(r.body["corrected"], "photoshop express");
    }

    #[test]
    fn clean_query_reports_no_changes() {
        let r = service(ServiceConfig::default()).handle_correct(br#"{"query":"museum"}"#);
        assert_eq!(r.status, 200);
        assert_eq!(r.body["corrected"], "museum");
        let tokens = r.body["tokens"].as_array().unwrap();
        assert!(tokens.iter().all(|t| t["changed"] == false && t["confidence"] == 1.0));
    }

    #[test]
    fn correction_document_shape() {
        let r = service(ServiceConfig::default()).handle_correct(br#"{"query":"mdal","locale":"en"}"#);
        assert_eq!(r.status, 200);
        let t = &r.body["tokens"][0];
        assert_eq!(t["input"], "mdal");
        assert_eq!(t["output"], "medal");
        assert_eq!(t["changed"], true);
        assert_eq!(t["candidates"][0]["term"], "medal");
        assert_eq!(t["candidates"][0]["edit_distance"], 1);
        assert!(t["candidates"][0]["score"].is_number());
    }

    #[test]
    fn validation_errors() {
        let s = service(ServiceConfig::default());
        for body in [
            &br#"{"query":""}"#[..],
            br#"{"query":"   "}"#,
            br#"not json"#,
            br#"{"q":"museum"}"#,
            br#"{"query":"museum","locale":"xx"}"#,
            br#"{"query":"museum","application":"nope"}"#,
        ] {
            let r = s.handle_correct(body);
            assert_eq!(r.status, 400, "{}", String::from_utf8_lossy(body));
            assert!(r.body["error"].is_string());
        }
        let long = format!(r#"{{"query":"{}"}}"#, "é".repeat(MAX_QUERY_CHARS + 1));
        assert_eq!(s.handle_correct(long.as_bytes()).status, 400);
        let limit = format!(r#"{{"query":"{}"}}"#, "é".repeat(MAX_QUERY_CHARS));
        assert_eq!(s.handle_correct(limit.as_bytes()).status, 200);
    }

    #[test]
    fn configured_sets_restrict_requests() {
        let s = service(ServiceConfig {
            locales: Some(vec!["en".into()]),
            applications: Some(vec!["stock".into()]),
            ..ServiceConfig::default()
        });
        assert_eq!(s.handle_correct(br#"{"query":"museum","locale":"fr"}"#).status, 400);
        assert_eq!(s.handle_correct(br#"{"query":"museum"}"#).status, 200);

        let bad = ServiceConfig {
            default_application: Some("cchome".into()),
            applications: Some(vec!["stock".into()]),
            ..ServiceConfig::default()
        };
        assert!(matches!(Service::with_artifacts(bad, artifacts()), Err(Error::Config(_))));
        let unknown = ServiceConfig {
            locales: Some(vec!["xx".into()]),
            ..ServiceConfig::default()
        };
        assert!(Service::with_artifacts(unknown, artifacts()).is_err());
    }

    #[test]
    fn health_and_refresh() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("log.tsv"), "blockchain\t1000\n").unwrap();
        let s = service(ServiceConfig {
            artifact_dir: dir.path().to_path_buf(),
            refresh_log: Some("log.tsv".into()),
            ..ServiceConfig::default()
        });
        let before = s.handle_health();
        assert_eq!(before.status, 200);
        assert_eq!(before.body["model"]["format"], MODEL_FORMAT);
        assert_eq!(before.body["dictionary"]["terms"], 6);
        s.refresh().unwrap();
        let after = s.handle_health();
        assert_eq!(after.body["dictionary"]["terms"], 7);
        assert!(
            after.body["snapshot_published_at_ms"].as_u64().unwrap()
                > before.body["snapshot_published_at_ms"].as_u64().unwrap()
        );
        assert_eq!(after.body["snapshot_version"], 2);
    }

    #[test]
    fn routing() {
        let s = service(ServiceConfig::default());
        assert_eq!(s.route("GET", "/v1/health?x=1", b"").status, 200);
        assert_eq!(s.route("GET", "/v1/correct", b"").status, 405);
        assert_eq!(s.route("GET", "/", b"").status, 404);
    }

    #[test]
    fn config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("speller.conf");
        let text = "# service\nlisten = 0.0.0.0:9000\nartifact_dir = model\nlocales = en, de\n\
                    tau = 0.4\ntau.cchome = 0.7\nrefresh_log = log.tsv\nrefresh_interval_secs = 60\n";
        let c = ServiceConfig::parse(&path, text).unwrap();
        assert_eq!(c.listen, "0.0.0.0:9000");
        assert_eq!(c.artifact_dir, dir.path().join("model"));
        assert_eq!(c.locales, Some(vec!["en".to_owned(), "de".to_owned()]));
        assert_eq!(c.tau, Some(0.4));
        assert_eq!(c.tau_by_application["cchome"], 0.7);
        assert_eq!(c.refresh_interval, Some(Duration::from_secs(60)));
        assert_eq!(c.refresh_log_path(), Some(dir.path().join("model/log.tsv")));

        assert!(matches!(ServiceConfig::parse(&path, "colour = blue\n"), Err(Error::Load { line: 1, .. })));
        assert!(matches!(ServiceConfig::parse(&path, "\ntau = high\n"), Err(Error::Load { line: 2, .. })));

        let mut c = ServiceConfig::default();
        c.apply_env(|k| (k == ENV_LISTEN).then(|| "127.0.0.1:0".to_owned()));
        assert_eq!(c.listen, "127.0.0.1:0");
        assert_eq!(c.artifact_dir, PathBuf::from("."));
    }

    #[test]
    fn thresholds_from_config() {
        let s = service(ServiceConfig {
            tau_by_application: [("stock".to_owned(), 0.9)].into(),
            ..ServiceConfig::default()
        });
        let r = s.handle_correct(br#"{"query":"mdal"}"#);
        assert_eq!(r.body["corrected"], "mdal");
        let r = s.handle_correct(br#"{"query":"mdal","application":"express"}"#);
        assert_eq!(r.body["corrected"], "medal");
    }
}
