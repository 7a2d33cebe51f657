use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A property key without one of the recognised namespace prefixes.
    #[error("property key {key:?} is not namespaced (expected CONFIG./FORM./VAR./ERROR./SERIAL. plus a name)")]
    BadKey { key: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{} is not valid UTF-8", path.display())]
    Encoding { path: PathBuf },

    #[error("{}:{line}: expected `name=value`, a `#` comment, or a blank line", path.display())]
    ConfigLine { path: PathBuf, line: usize },

    #[error("bad config prefix {prefix:?}: expected a bare name without a trailing dot")]
    BadPrefix { prefix: String },

    #[error("{}:{line}: list line has no `=`", path.display())]
    ListLine { path: PathBuf, line: usize },

    #[error("token {token:?} requires an argument")]
    TokenUsage { token: String },

    #[error("unsupported content type {content_type:?}")]
    UnsupportedContentType { content_type: String },

    #[error("page {name:?} is not a bare template name")]
    BadPageName { name: String },

    #[error("no template for page {page:?}")]
    PageNotFound { page: String },

    /// Failures inside the speccheck harness itself (unknown operation,
    /// unparsable triple file, missing fixtures).
    #[error("speccheck: {0}")]
    Harness(String),
}
