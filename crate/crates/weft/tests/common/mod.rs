use std::path::{Path, PathBuf};

use weft::server::ServerConfig;

/// The demo site shipped in the repository, used read-only by tests.
pub fn demo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../demo")
        .canonicalize()
        .expect("demo site present in the repository")
}

/// A server config over the demo site with the spool diverted to `spool`.
#[allow(dead_code)] // not every test binary drives the server
pub fn demo_config(spool: &Path) -> ServerConfig {
    let mut cfg = ServerConfig::for_root(demo_root());
    cfg.spool_path = spool.to_path_buf();
    cfg
}
