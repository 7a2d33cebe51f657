//! The template engine: tokenizing lines, resolving tokens through a handler
//! chain, and processing plain and list files.
//!
//! A token is text enclosed in `[[` and `]]`, optionally split by the first
//! `:` into a name and an argument. Scanning is line-based and non-greedy:
//!
//! * tokens cannot span lines;
//! * an unterminated `[[` and a stray `]]` are literal text;
//! * token text never contains `[[` or `]]`, so in `[[a[[b]]` the first
//!   opener is literal and the token is `b`;
//! * `[[]]` and `[[:arg]]` have no name and stay literal.
//!
//! Every line decomposes into alternating delimiter strings and tokens;
//! re-concatenating the parts reproduces the line exactly.

use std::cell::RefCell;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fsutil;
use crate::props::PropertyMap;
use crate::urlenc;

/// One `[[...]]` occurrence, split into name and optional argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    raw: String,
    colon: Option<usize>,
}

impl Token {
    /// Builds a token from the text between `[[` and `]]`. Returns `None`
    /// when the text cannot be a token: it contains `[[` or `]]`, or its
    /// name (the part before the first `:`) is empty.
    pub fn parse(raw: &str) -> Option<Token> {
        if raw.contains("[[") || raw.contains("]]") {
            return None;
        }
        let colon = raw.find(':');
        if colon.unwrap_or(raw.len()) == 0 {
            return None;
        }
        Some(Token {
            raw: raw.to_string(),
            colon,
        })
    }

    /// The full text between the braces.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn name(&self) -> &str {
        &self.raw[..self.colon.unwrap_or(self.raw.len())]
    }

    pub fn arg(&self) -> Option<&str> {
        self.colon.map(|at| &self.raw[at + 1..])
    }
}

/// A line decomposed into alternating delimiter strings and tokens:
/// `s1 t1 s2 t2 ... sN`, where the delimiters may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedLine {
    pairs: Vec<(String, Token)>,
    tail: String,
}

impl ParsedLine {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.pairs.iter().map(|(_, token)| token)
    }

    pub fn token_count(&self) -> usize {
        self.pairs.len()
    }

    /// The delimiter strings `s1 ... sN` in order (always one more than the
    /// number of tokens).
    pub fn delimiters(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.pairs.iter().map(|(s, _)| s.as_str()).collect();
        out.push(&self.tail);
        out
    }

    /// Reconstructs the original line, rendering each token as `[[raw]]`.
    pub fn reassemble(&self) -> String {
        let mut out = String::new();
        for (delim, token) in &self.pairs {
            out.push_str(delim);
            out.push_str("[[");
            out.push_str(token.raw());
            out.push_str("]]");
        }
        out.push_str(&self.tail);
        out
    }
}

/// Decomposes a single line (no line terminators) into delimiters and
/// tokens. Total: any input has a decomposition, with malformed markup kept
/// as literal text.
pub fn tokenize_line(line: &str) -> ParsedLine {
    let mut pairs = Vec::new();
    let mut literal = String::new();
    let mut rest = line;
    loop {
        let Some(open) = rest.find("[[") else {
            literal.push_str(rest);
            break;
        };
        let after = &rest[open + 2..];
        let Some(close) = after.find("]]") else {
            // unterminated token: the rest of the line is literal
            literal.push_str(rest);
            break;
        };
        if let Some(inner) = after.find("[[") {
            if inner < close {
                // a second opener before any closer shadows this one;
                // the scan restarts at the inner opener
                literal.push_str(&rest[..open + 2 + inner]);
                rest = &rest[open + 2 + inner..];
                continue;
            }
        }
        match Token::parse(&after[..close]) {
            Some(token) => {
                literal.push_str(&rest[..open]);
                pairs.push((std::mem::take(&mut literal), token));
                rest = &after[close + 2..];
            }
            None => {
                // nameless bracket pair; the opener is literal text
                literal.push_str(&rest[..open + 2]);
                rest = after;
            }
        }
    }
    ParsedLine {
        pairs,
        tail: literal,
    }
}

/// Outcome of offering a token to one handler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    /// The handler matched and produced replacement text.
    Replaced(String),
    /// Not this handler's token; ask the next one.
    NotMatched,
}

/// A token handler in a [`ResolverChain`]. Handlers are consulted in order,
/// most specific first; returning [`Resolution::NotMatched`] passes the
/// token along. Handlers must not keep mutable state across calls.
pub trait TokenHandler: Send + Sync {
    /// Short identifier used in dispatch traces and diagnostics.
    fn name(&self) -> &'static str;

    fn resolve_token(&self, token: &Token, props: &mut PropertyMap) -> Result<Resolution>;
}

/// A record of one handler being offered a token during resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consultation {
    pub handler: &'static str,
    pub matched: bool,
}

/// An ordered sequence of token handlers with an implicit terminal resolver
/// that echoes `VAR.`, `FORM.`, then `CONFIG.` bindings (and never declines).
///
/// The chain is per-request: it records the raw text of tokens the terminal
/// resolver could not find a binding for, retrievable with
/// [`ResolverChain::take_unresolved`].
pub struct ResolverChain {
    handlers: Vec<Arc<dyn TokenHandler>>,
    unresolved: RefCell<Vec<String>>,
}

impl ResolverChain {
    pub fn new(handlers: Vec<Arc<dyn TokenHandler>>) -> Self {
        ResolverChain {
            handlers,
            unresolved: RefCell::new(Vec::new()),
        }
    }

    /// A chain with no custom handlers: tokens echo property values only.
    pub fn default_only() -> Self {
        Self::new(Vec::new())
    }

    /// A new chain with `handler` consulted before this chain's handlers.
    pub fn prepended(&self, handler: Arc<dyn TokenHandler>) -> Self {
        let mut handlers = Vec::with_capacity(self.handlers.len() + 1);
        handlers.push(handler);
        handlers.extend(self.handlers.iter().cloned());
        Self::new(handlers)
    }

    pub fn handler_names(&self) -> Vec<&'static str> {
        self.handlers.iter().map(|h| h.name()).collect()
    }

    /// Resolves a token to its replacement text: the first matching
    /// handler's output, or the default resolution.
    pub fn resolve(&self, token: &Token, props: &mut PropertyMap) -> Result<String> {
        for handler in &self.handlers {
            if let Resolution::Replaced(text) = handler.resolve_token(token, props)? {
                return Ok(text);
            }
        }
        Ok(self.terminal(token, props))
    }

    /// Like [`ResolverChain::resolve`], also reporting which handlers were
    /// consulted and which one matched. The terminal resolver appears in the
    /// trace as `"default"`.
    pub fn resolve_traced(
        &self,
        token: &Token,
        props: &mut PropertyMap,
    ) -> Result<(String, Vec<Consultation>)> {
        let mut trace = Vec::new();
        for handler in &self.handlers {
            match handler.resolve_token(token, props)? {
                Resolution::Replaced(text) => {
                    trace.push(Consultation {
                        handler: handler.name(),
                        matched: true,
                    });
                    return Ok((text, trace));
                }
                Resolution::NotMatched => trace.push(Consultation {
                    handler: handler.name(),
                    matched: false,
                }),
            }
        }
        let text = self.terminal(token, props);
        trace.push(Consultation {
            handler: "default",
            matched: true,
        });
        Ok((text, trace))
    }

    fn terminal(&self, token: &Token, props: &PropertyMap) -> String {
        match default_lookup(token, props) {
            Some(value) => value,
            None => {
                log::debug!("unresolved token [[{}]]", token.raw());
                self.unresolved.borrow_mut().push(token.raw().to_string());
                String::new()
            }
        }
    }

    /// Drains the names of tokens that fell through to the terminal
    /// resolver without a binding.
    pub fn take_unresolved(&self) -> Vec<String> {
        std::mem::take(&mut self.unresolved.borrow_mut())
    }
}

fn default_lookup(token: &Token, props: &PropertyMap) -> Option<String> {
    for namespace in ["VAR.", "FORM.", "CONFIG."] {
        if let Some(value) = props.get(&format!("{namespace}{}", token.raw())) {
            return Some(value.to_string());
        }
    }
    None
}

/// The default resolution: the first binding among `VAR.`, `FORM.`, and
/// `CONFIG.` for the token's full raw text, or the empty string. This is the
/// behaviour of a chain with no custom handlers.
pub fn default_resolve(token: &Token, props: &PropertyMap) -> String {
    default_lookup(token, props).unwrap_or_default()
}

/// Processes one line: each token is resolved through the chain and each
/// delimiter string appears verbatim, in order.
pub fn process_line(line: &str, chain: &ResolverChain, props: &mut PropertyMap) -> Result<String> {
    let parsed = tokenize_line(line);
    let mut out = String::new();
    for (delim, token) in &parsed.pairs {
        out.push_str(delim);
        out.push_str(&chain.resolve(token, props)?);
    }
    out.push_str(&parsed.tail);
    Ok(out)
}

/// Processes a template file line by line, joining the results with LF. A
/// trailing newline in the source is preserved; CRLF terminators are
/// normalised on read.
pub fn process_file_plain(
    path: impl AsRef<Path>,
    chain: &ResolverChain,
    props: &mut PropertyMap,
) -> Result<String> {
    let (lines, trailing_newline) = fsutil::read_lines(path.as_ref())?;
    let mut processed = Vec::with_capacity(lines.len());
    for line in &lines {
        processed.push(process_line(line, chain, props)?);
    }
    let mut out = processed.join("\n");
    if trailing_newline {
        out.push('\n');
    }
    Ok(out)
}

/// Processes a list file into a query string. Each nonblank line is
/// processed like a template line, split at its first `=`, both sides form
/// encoded, and the lines joined with `&`. Blank lines are skipped; a
/// nonblank line without `=` is an error naming the line.
pub fn process_file_list(
    path: impl AsRef<Path>,
    chain: &ResolverChain,
    props: &mut PropertyMap,
) -> Result<String> {
    let path = path.as_ref();
    let (lines, _) = fsutil::read_lines(path)?;
    let mut parts = Vec::new();
    for (index, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let processed = process_line(line, chain, props)?;
        let Some(at) = processed.find('=') else {
            return Err(Error::ListLine {
                path: path.to_path_buf(),
                line: index + 1,
            });
        };
        parts.push(format!(
            "{}={}",
            urlenc::form_encode(&processed[..at]),
            urlenc::form_encode(&processed[at + 1..])
        ));
    }
    Ok(parts.join("&"))
}
