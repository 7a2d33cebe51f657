//! weft is a small server-side web framework built around a line-oriented
//! template engine. Templates are ordinary text files (typically HTML)
//! carrying `[[token]]` markup; processing a file substitutes each token and
//! leaves everything else byte-for-byte intact.
//!
//! All per-request state lives in a single [`PropertyMap`] of namespaced
//! string entries:
//!
//! * `CONFIG.` — values parsed from configuration files
//! * `FORM.`   — decoded query-string / form-body variables
//! * `VAR.`    — temporary variables set (and removed) around rendering
//! * `ERROR.`  — validation messages from a dedicated config file
//! * `SERIAL.` — rendered form HTML stashed for later substitution
//!
//! Tokens are resolved through a [`ResolverChain`]: an ordered list of
//! handlers with fall-through, ending in a default resolver that echoes
//! `VAR.`, `FORM.`, then `CONFIG.` bindings. The [`forms`] module adds the
//! form lifecycle (passive render, validation, serialisation, effects), and
//! [`server`] wires the whole pipeline behind an HTTP endpoint. The
//! [`speccheck`] module is an independent oracle for the engine plus a
//! Hoare-triple harness for checking operations against declarative
//! pre/postcondition files.

pub mod app;
pub mod config;
pub mod error;
pub mod forms;
mod fsutil;
pub mod props;
pub mod server;
pub mod speccheck;
pub mod template;
pub mod urlenc;

pub use error::{Error, Result};
pub use forms::{FormDefinition, FormOutcome, Method, RequestData};
pub use props::PropertyMap;
pub use template::{ParsedLine, Resolution, ResolverChain, Token, TokenHandler};
