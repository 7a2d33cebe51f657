//! Configuration file parsing.
//!
//! The format is one `name=value` assignment per line. Lines whose first
//! non-space character is `#` are comments; blank lines are skipped. The
//! split happens at the first `=`: names are trimmed of surrounding
//! whitespace, values are taken verbatim (they may contain `=` or leading
//! spaces). Within and across files, the last assignment to a name wins.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil;
use crate::props::PropertyMap;

/// Parses a config file into `props` under the `CONFIG.` prefix.
pub fn parse(path: impl AsRef<Path>, props: &mut PropertyMap) -> Result<()> {
    parse_bare(path, "CONFIG", props)
}

/// Parses a config file into `props` under an arbitrary prefix, e.g.
/// `parse_bare("error.config", "ERROR", props)` yields `ERROR.name` entries.
/// The prefix is given bare, without the trailing dot.
pub fn parse_bare(path: impl AsRef<Path>, prefix: &str, props: &mut PropertyMap) -> Result<()> {
    let path = path.as_ref();
    if prefix.is_empty() || prefix.ends_with('.') {
        return Err(Error::BadPrefix {
            prefix: prefix.to_string(),
        });
    }
    let (lines, _) = fsutil::read_lines(path)?;
    for (index, line) in lines.iter().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let assignment = line.find('=').and_then(|at| {
            let name = line[..at].trim();
            if name.is_empty() {
                None
            } else {
                Some((name, &line[at + 1..]))
            }
        });
        let Some((name, value)) = assignment else {
            return Err(Error::ConfigLine {
                path: path.to_path_buf(),
                line: index + 1,
            });
        };
        props.set(&format!("{prefix}.{name}"), value)?;
    }
    Ok(())
}
