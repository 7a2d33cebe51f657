//! Executable checks for the engine's specified behaviour: an independent
//! reference implementation of file processing for differential testing, a
//! dispatch checker for resolver chains, and a Hoare-triple harness driven
//! by declarative pre/postcondition files.

mod harness;

pub use harness::{
    parse_triple, parse_triple_file, Assertion, Expectation, Harness, HoareTriple, OpInvocation,
    ReturnCheck, SuiteReport, TripleReport,
};

use std::path::Path;

use crate::error::{Error, Result};
use crate::props::PropertyMap;
use crate::template::{Consultation, ResolverChain, Token};

/// A template file as a file pointer plus its lines. The pointer is 1 when
/// the file is open at the first line and 0 once the file has been fully
/// consumed and closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileModel {
    pointer: usize,
    lines: Vec<String>,
    trailing_newline: bool,
}

impl FileModel {
    /// Models a file from its text content (CRLF normalised, trailing
    /// newline remembered), open at line 1.
    pub fn from_text(text: &str) -> FileModel {
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
        FileModel {
            pointer: 1,
            lines,
            trailing_newline,
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<FileModel> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Encoding {
            path: path.to_path_buf(),
        })?;
        Ok(FileModel::from_text(&text))
    }

    pub fn pointer(&self) -> usize {
        self.pointer
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }
}

/// Reference implementation of template-file processing, for checking the
/// engine against. It must behave identically to
/// [`crate::template::process_file_plain`] while sharing none of its
/// scanning code: lines are walked character by character instead of by
/// substring search. Requires the file pointer at 1 and leaves it at 0.
pub fn oracle_process_file(
    file: &mut FileModel,
    chain: &ResolverChain,
    props: &mut PropertyMap,
) -> Result<String> {
    if file.pointer != 1 {
        return Err(Error::Harness(format!(
            "oracle_process_file requires pointer 1, found {}",
            file.pointer
        )));
    }
    let mut processed = Vec::with_capacity(file.lines.len());
    while file.pointer <= file.lines.len() {
        let line = file.lines[file.pointer - 1].clone();
        processed.push(oracle_process_line(&line, chain, props)?);
        file.pointer += 1;
    }
    file.pointer = 0;
    let mut out = processed.join("\n");
    if file.trailing_newline {
        out.push('\n');
    }
    Ok(out)
}

fn oracle_process_line(
    line: &str,
    chain: &ResolverChain,
    props: &mut PropertyMap,
) -> Result<String> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '[' && i + 1 < chars.len() && chars[i + 1] == '[' {
            // candidate token: collect text until a closer, giving up at a
            // nested opener or the end of the line
            let mut j = i + 2;
            let mut raw = String::new();
            let mut closed = false;
            let mut nested = false;
            while j < chars.len() {
                if chars[j] == ']' && j + 1 < chars.len() && chars[j + 1] == ']' {
                    closed = true;
                    break;
                }
                if chars[j] == '[' && j + 1 < chars.len() && chars[j + 1] == '[' {
                    nested = true;
                    break;
                }
                raw.push(chars[j]);
                j += 1;
            }
            if nested {
                out.push_str("[[");
                out.push_str(&raw);
                i = j;
                continue;
            }
            if closed {
                if let Some(token) = Token::parse(&raw) {
                    out.push_str(&chain.resolve(&token, props)?);
                    i = j + 2;
                } else {
                    out.push_str("[[");
                    i += 2;
                }
                continue;
            }
            // ran off the end of the line
            out.push_str("[[");
            out.push_str(&raw);
            i = chars.len();
            continue;
        }
        out.push(chars[i]);
        i += 1;
    }
    Ok(out)
}

/// How one dispatch played out, per [`check_dispatch`].
#[derive(Debug, Clone)]
pub struct DispatchReport {
    pub trace: Vec<Consultation>,
    /// Index in the trace of the handler that produced the result.
    pub matched_at: usize,
    pub ok: bool,
    pub detail: Option<String>,
}

/// Resolves a token while recording which handlers were consulted, then
/// checks the dispatch discipline: the handler producing the result is the
/// earliest matching one, and nothing was consulted after the match.
pub fn check_dispatch(
    chain: &ResolverChain,
    token: &Token,
    props: &mut PropertyMap,
) -> Result<DispatchReport> {
    let (_, trace) = chain.resolve_traced(token, props)?;
    let matched: Vec<usize> = trace
        .iter()
        .enumerate()
        .filter(|(_, c)| c.matched)
        .map(|(i, _)| i)
        .collect();
    let (ok, detail) = match matched.as_slice() {
        [at] if *at == trace.len() - 1 => (true, None),
        [] => (false, Some("no handler matched".to_string())),
        [at] => (
            false,
            Some(format!(
                "handlers were consulted after {} matched",
                trace[*at].handler
            )),
        ),
        many => (
            false,
            Some(format!("{} handlers matched", many.len())),
        ),
    };
    let matched_at = matched.first().copied().unwrap_or(0);
    Ok(DispatchReport {
        trace,
        matched_at,
        ok,
        detail,
    })
}
