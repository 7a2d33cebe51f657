//! The HTTP service: one `main` endpoint executing the full request
//! pipeline, plus the configuration it runs under.
//!
//! Each request gets a fresh [`PropertyMap`]. The pipeline decodes form
//! data, parses the configuration files in order (platform, then global,
//! then the error messages under `ERROR.`), defaults and sanitises the
//! requested page, runs form preprocessing (which may rewrite the page),
//! and renders `template/<page>.html` with the full handler chain.

mod http;

pub use http::{serve, ServerHandle};

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use crate::app::{self, EmailTransport, FeedbackMailer};
use crate::config;
use crate::error::{Error, Result};
use crate::forms::{parse_request, RequestData};
use crate::props::PropertyMap;
use crate::template::process_file_plain;

/// Where the service listens and which site it serves.
#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind_addr: String,
    pub port: u16,
    /// Site root; must contain `template/`.
    pub root_dir: PathBuf,
    /// Config files parsed in order on every request (platform file first,
    /// then the global file). Relative paths resolve against `root_dir`.
    pub config_paths: Vec<PathBuf>,
    /// Validation messages, parsed under the `ERROR.` prefix after the
    /// config files.
    pub error_config: PathBuf,
    /// Where the default email transport appends outgoing messages.
    pub spool_path: PathBuf,
    /// Parse the config files once and reuse them, instead of re-reading
    /// per request. Off by default.
    pub cache_config: bool,
}

impl ServerConfig {
    /// A config rooted at `root` using the conventional file layout:
    /// `config/platform.config`, `config/global.config`,
    /// `config/error.config`, and `feedback.spool` under the root.
    pub fn for_root(root: impl Into<PathBuf>) -> ServerConfig {
        let root_dir = root.into();
        ServerConfig {
            bind_addr: "127.0.0.1".to_string(),
            port: 8080,
            spool_path: root_dir.join("feedback.spool"),
            config_paths: vec![
                PathBuf::from("config/platform.config"),
                PathBuf::from("config/global.config"),
            ],
            error_config: PathBuf::from("config/error.config"),
            root_dir,
            cache_config: false,
        }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.root_dir.join(path)
        }
    }

    /// `root_dir` as a string ending in `/`, the form path concatenation
    /// expects in `CONFIG.rootDir`.
    pub fn root_dir_string(&self) -> String {
        let mut root = self.root_dir.display().to_string();
        if !root.ends_with('/') {
            root.push('/');
        }
        root
    }
}

/// A rendered HTTP response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: String,
    pub body: String,
}

impl HttpResponse {
    fn html(body: String) -> HttpResponse {
        HttpResponse {
            status: 200,
            content_type: "text/html; charset=utf-8".to_string(),
            body,
        }
    }

    fn plain(status: u16, body: &str) -> HttpResponse {
        HttpResponse {
            status,
            content_type: "text/plain; charset=utf-8".to_string(),
            body: body.to_string(),
        }
    }
}

/// Accepts page names made of letters, digits, and `_` only, so a page can
/// never escape the template directory.
pub fn sanitize_page(name: &str) -> Result<&str> {
    if !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        Ok(name)
    } else {
        Err(Error::BadPageName {
            name: name.to_string(),
        })
    }
}

/// The service: configuration, the shared mail transport, and an optional
/// parsed-config cache. All per-request state stays inside `handle`.
pub struct Service {
    cfg: ServerConfig,
    transport: Arc<dyn EmailTransport>,
    config_cache: OnceLock<PropertyMap>,
}

impl Service {
    pub fn new(cfg: ServerConfig, transport: Arc<dyn EmailTransport>) -> Service {
        Service {
            cfg,
            transport,
            config_cache: OnceLock::new(),
        }
    }

    /// A service using the spool-file transport at the configured path.
    pub fn with_spool(cfg: ServerConfig) -> Service {
        let transport = Arc::new(app::SpoolTransport::new(cfg.spool_path.clone()));
        Service::new(cfg, transport)
    }

    pub fn config(&self) -> &ServerConfig {
        &self.cfg
    }

    pub fn handle(&self, req: &RequestData) -> HttpResponse {
        self.handle_with_props(req).0
    }

    /// Like [`Service::handle`], also returning the final properties map so
    /// callers (tests, the speccheck harness) can assert on request state.
    pub fn handle_with_props(&self, req: &RequestData) -> (HttpResponse, PropertyMap) {
        let mut props = PropertyMap::new();
        match self.run_pipeline(req, &mut props) {
            Ok(body) => (HttpResponse::html(body), props),
            Err(err) => {
                let response = match &err {
                    Error::BadPageName { .. } | Error::UnsupportedContentType { .. } => {
                        HttpResponse::plain(400, &format!("400 bad request: {err}"))
                    }
                    Error::PageNotFound { page } => {
                        HttpResponse::plain(404, &format!("404 not found: no page {page:?}"))
                    }
                    _ => {
                        log::error!("request failed: {err}");
                        HttpResponse::plain(500, "500 internal server error")
                    }
                };
                (response, props)
            }
        }
    }

    fn run_pipeline(&self, req: &RequestData, props: &mut PropertyMap) -> Result<String> {
        parse_request(req, props)?;
        self.load_configs(props)?;

        if props.get("CONFIG.rootDir").is_none() {
            props.set("CONFIG.rootDir", self.cfg.root_dir_string())?;
        }
        if props.get("FORM.page").is_none() {
            props.set("FORM.page", "main")?;
        }
        let requested = props.get("FORM.page").unwrap_or_default().to_string();
        sanitize_page(&requested)?;

        app::preprocess(props, &FeedbackMailer::new(self.transport.clone()))?;

        let page = props.get("FORM.page").unwrap_or_default().to_string();
        let template = app::rooted(props, &format!("template/{page}.html"));
        if !template.is_file() {
            return Err(Error::PageNotFound { page });
        }
        process_file_plain(template, &app::standard_chain(), props)
    }

    fn load_configs(&self, props: &mut PropertyMap) -> Result<()> {
        if self.cfg.cache_config {
            let parsed = match self.config_cache.get() {
                Some(parsed) => parsed,
                None => {
                    let mut fresh = PropertyMap::new();
                    self.parse_config_files(&mut fresh)?;
                    self.config_cache.get_or_init(|| fresh)
                }
            };
            props.merge(parsed);
            Ok(())
        } else {
            self.parse_config_files(props)
        }
    }

    fn parse_config_files(&self, props: &mut PropertyMap) -> Result<()> {
        for path in &self.cfg.config_paths {
            config::parse(self.cfg.resolve(path), props)?;
        }
        config::parse_bare(self.cfg.resolve(&self.cfg.error_config), "ERROR", props)?;
        Ok(())
    }
}

/// One-shot convenience for a single request against a config.
pub fn handle_request(
    req: &RequestData,
    cfg: &ServerConfig,
    transport: Arc<dyn EmailTransport>,
) -> HttpResponse {
    Service::new(cfg.clone(), transport).handle(req)
}
