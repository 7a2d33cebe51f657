use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads a UTF-8 text file, normalises CRLF to LF, and splits it into lines.
/// The bool records whether the file ended with a newline, so callers can
/// reproduce it in output.
pub(crate) fn read_lines(path: &Path) -> Result<(Vec<String>, bool)> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Encoding {
        path: path.to_path_buf(),
    })?;
    let text = text.replace("\r\n", "\n");
    let trailing_newline = text.ends_with('\n');
    let body = if trailing_newline {
        &text[..text.len() - 1]
    } else {
        text.as_str()
    };
    let lines = if body.is_empty() && !trailing_newline {
        Vec::new()
    } else {
        body.split('\n').map(str::to_string).collect()
    };
    Ok((lines, trailing_newline))
}
