//! The Hoare-triple harness: declarative pre/postcondition checks against
//! real operations.
//!
//! Triples are data, one per `.triple` file, so new checks need no code:
//!
//! ```text
//! # blank lines and # comments are ignored
//! pre: FORM.page=feedback
//! pre: FORM.fullname=James Smith
//! op: main
//! post: FORM.page=feedback
//! post-absent: VAR.vExclaim
//! return: check feedback_invalid_comments
//! ```
//!
//! `pre:` lines build the starting properties map (everything unmentioned is
//! absent). `op:` names a registered operation and its argument. `post:` and
//! `post-absent:` assert entries of the map after the operation, and
//! `return:` asserts the returned string: `eq TEXT`, `empty`,
//! `contains TEXT`, `not-matched`, or `check NAME` for a named structural
//! predicate. Keys bound in `pre` and unmentioned in `post` must come out
//! unchanged; the harness checks that frame condition on every triple.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::forms::{form_controls_handler, form_errors_handler, RequestData};
use crate::props::PropertyMap;
use crate::server::{ServerConfig, Service};
use crate::template::{default_resolve, process_line, Resolution, Token};

/// Expected state of one key after the operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Bound(String),
    Absent,
}

/// Assertions over the properties map and the operation's return value.
#[derive(Debug, Clone, Default)]
pub struct Assertion {
    pub entries: Vec<(String, Expectation)>,
    pub return_check: Option<ReturnCheck>,
}

impl Assertion {
    fn mentions(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReturnCheck {
    Eq(String),
    Empty,
    Contains(String),
    /// The operation declined the token instead of returning text.
    NotMatched,
    /// A named predicate registered with the harness.
    Named(String),
}

#[derive(Debug, Clone)]
pub struct OpInvocation {
    pub name: String,
    pub args: String,
}

/// One precondition / operation / postcondition specification.
#[derive(Debug, Clone)]
pub struct HoareTriple {
    pub name: String,
    pub pre: Vec<(String, String)>,
    pub op: OpInvocation,
    pub post: Assertion,
}

/// Outcome of checking one triple.
#[derive(Debug, Clone)]
pub struct TripleReport {
    pub name: String,
    pub passed: bool,
    /// The first violated assertion, when failing.
    pub detail: Option<String>,
}

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub reports: Vec<TripleReport>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TripleReport> {
        self.reports.iter().filter(|r| !r.passed)
    }
}

type NamedCheck = fn(&str) -> std::result::Result<(), String>;

enum OpReturn {
    Value(String),
    NotMatched,
}

/// Runs triples against the artifact's operations.
pub struct Harness {
    root: Option<PathBuf>,
    checks: BTreeMap<String, NamedCheck>,
}

impl Default for Harness {
    fn default() -> Self {
        Self::new()
    }
}

impl Harness {
    pub fn new() -> Harness {
        let mut harness = Harness {
            root: None,
            checks: BTreeMap::new(),
        };
        harness.register_check("feedback_form_passive", check_feedback_form_passive);
        harness.register_check("feedback_invalid_comments", check_feedback_invalid_comments);
        harness.register_check("feedback_flags_fullname", check_feedback_flags_fullname);
        harness.register_check("feedback_success_page", check_feedback_success_page);
        harness
    }

    /// Sets the site root used by the `main` operation.
    pub fn with_root(mut self, root: impl Into<PathBuf>) -> Harness {
        self.root = Some(root.into());
        self
    }

    pub fn register_check(&mut self, name: &str, check: NamedCheck) {
        self.checks.insert(name.to_string(), check);
    }

    /// Builds a map satisfying the precondition, runs the operation, and
    /// evaluates the postcondition, the frame condition, and the return
    /// check. Never panics on a bad triple; failures carry a description.
    pub fn check_triple(&self, triple: &HoareTriple) -> TripleReport {
        let fail = |detail: String| TripleReport {
            name: triple.name.clone(),
            passed: false,
            detail: Some(detail),
        };

        let mut props = PropertyMap::new();
        for (key, value) in &triple.pre {
            if let Err(err) = props.set(key, value.clone()) {
                return fail(format!("precondition {key}: {err}"));
            }
        }

        let ret = match self.run_op(&triple.op, &mut props) {
            Ok(ret) => ret,
            Err(err) => return fail(format!("operation {}: {err}", triple.op.name)),
        };

        for (key, expectation) in &triple.post.entries {
            let actual = props.get(key);
            match expectation {
                Expectation::Bound(value) => {
                    if actual != Some(value.as_str()) {
                        return fail(format!(
                            "postcondition {key}: expected {value:?}, found {actual:?}"
                        ));
                    }
                }
                Expectation::Absent => {
                    if actual.is_some() {
                        return fail(format!(
                            "postcondition {key}: expected absent, found {actual:?}"
                        ));
                    }
                }
            }
        }

        // frame condition: untouched pre entries keep their values
        for (key, value) in &triple.pre {
            if !triple.post.mentions(key) && props.get(key) != Some(value.as_str()) {
                return fail(format!(
                    "frame: {key} changed from {value:?} to {:?}",
                    props.get(key)
                ));
            }
        }

        if let Some(check) = &triple.post.return_check {
            if let Err(detail) = self.check_return(check, &ret) {
                return fail(format!("return: {detail}"));
            }
        }

        TripleReport {
            name: triple.name.clone(),
            passed: true,
            detail: None,
        }
    }

    fn check_return(
        &self,
        check: &ReturnCheck,
        ret: &OpReturn,
    ) -> std::result::Result<(), String> {
        let value = match (check, ret) {
            (ReturnCheck::NotMatched, OpReturn::NotMatched) => return Ok(()),
            (_, OpReturn::NotMatched) => {
                return Err("operation did not match the token".to_string())
            }
            (ReturnCheck::NotMatched, OpReturn::Value(v)) => {
                return Err(format!("expected not-matched, got {v:?}"))
            }
            (_, OpReturn::Value(v)) => v,
        };
        match check {
            ReturnCheck::Eq(expected) => {
                if value == expected {
                    Ok(())
                } else {
                    Err(format!("expected {expected:?}, got {value:?}"))
                }
            }
            ReturnCheck::Empty => {
                if value.is_empty() {
                    Ok(())
                } else {
                    Err(format!("expected empty return, got {value:?}"))
                }
            }
            ReturnCheck::Contains(needle) => {
                if value.contains(needle) {
                    Ok(())
                } else {
                    Err(format!("return does not contain {needle:?}"))
                }
            }
            ReturnCheck::Named(name) => match self.checks.get(name) {
                Some(check) => check(value),
                None => Err(format!("unknown named check {name:?}")),
            },
            ReturnCheck::NotMatched => unreachable!("handled above"),
        }
    }

    fn run_op(&self, op: &OpInvocation, props: &mut PropertyMap) -> Result<OpReturn> {
        let token = || {
            Token::parse(&op.args).ok_or_else(|| {
                Error::Harness(format!("op {}: {:?} is not a token", op.name, op.args))
            })
        };
        match op.name.as_str() {
            "form_errors_handler" => Ok(match form_errors_handler(&token()?, props) {
                Resolution::Replaced(text) => OpReturn::Value(text),
                Resolution::NotMatched => OpReturn::NotMatched,
            }),
            "form_controls_handler" => Ok(match form_controls_handler(&token()?, props) {
                Resolution::Replaced(text) => OpReturn::Value(text),
                Resolution::NotMatched => OpReturn::NotMatched,
            }),
            "default_resolve" => Ok(OpReturn::Value(default_resolve(&token()?, props))),
            "resolve" => {
                let chain = crate::app::standard_chain();
                Ok(OpReturn::Value(chain.resolve(&token()?, props)?))
            }
            "process_line" => {
                let chain = crate::app::standard_chain();
                Ok(OpReturn::Value(process_line(&op.args, &chain, props)?))
            }
            "main" => self.run_main(props).map(OpReturn::Value),
            other => Err(Error::Harness(format!("unknown operation {other:?}"))),
        }
    }

    /// Runs the full request pipeline: the precondition's `FORM.` entries
    /// become the POST body, and the resulting request state replaces the
    /// map so the postcondition can assert on it.
    fn run_main(&self, props: &mut PropertyMap) -> Result<String> {
        let root = self.root.as_ref().ok_or_else(|| {
            Error::Harness("the main operation needs a site root (--root)".to_string())
        })?;

        let body = props
            .iter()
            .filter_map(|(key, value)| {
                key.strip_prefix("FORM.").map(|name| {
                    format!(
                        "{}={}",
                        crate::urlenc::form_encode(name),
                        crate::urlenc::form_encode(value)
                    )
                })
            })
            .collect::<Vec<_>>()
            .join("&");

        static SPOOL_ID: AtomicU64 = AtomicU64::new(0);
        let spool = std::env::temp_dir().join(format!(
            "weft-speccheck-{}-{}.spool",
            std::process::id(),
            SPOOL_ID.fetch_add(1, Ordering::Relaxed)
        ));

        let mut cfg = ServerConfig::for_root(root.clone());
        cfg.spool_path = spool.clone();
        let service = Service::with_spool(cfg);
        let (response, after) = service.handle_with_props(&RequestData::post_form(body));
        let _ = std::fs::remove_file(&spool);

        if response.status != 200 {
            return Err(Error::Harness(format!(
                "main returned status {}: {}",
                response.status, response.body
            )));
        }
        *props = after;
        Ok(response.body)
    }

    /// Parses and checks every `.triple` file in `dir`, in name order.
    pub fn run_suite(&self, dir: impl AsRef<Path>) -> Result<SuiteReport> {
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|path| path.extension().is_some_and(|ext| ext == "triple"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::Harness(format!(
                "no .triple files in {}",
                dir.display()
            )));
        }

        let mut report = SuiteReport::default();
        for path in paths {
            let triple = parse_triple_file(&path)?;
            report.reports.push(self.check_triple(&triple));
        }
        Ok(report)
    }
}

/// Parses one triple file. The triple's name is the file stem.
pub fn parse_triple_file(path: impl AsRef<Path>) -> Result<HoareTriple> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|stem| stem.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unnamed".to_string());
    parse_triple(&name, &text).map_err(|detail| {
        Error::Harness(format!("{}: {detail}", path.display()))
    })
}

/// Parses triple text. Used directly by tests; files go through
/// [`parse_triple_file`].
pub fn parse_triple(name: &str, text: &str) -> std::result::Result<HoareTriple, String> {
    let mut pre = Vec::new();
    let mut op = None;
    let mut post = Assertion::default();

    for (index, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (directive, rest) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `directive: ...`", index + 1))?;
        let rest = rest.strip_prefix(' ').unwrap_or(rest);
        match directive.trim() {
            "pre" => {
                let (key, value) = rest
                    .split_once('=')
                    .ok_or_else(|| format!("line {}: pre needs KEY=VALUE", index + 1))?;
                pre.push((key.to_string(), value.to_string()));
            }
            "post" => {
                let (key, value) = rest
                    .split_once('=')
                    .ok_or_else(|| format!("line {}: post needs KEY=VALUE", index + 1))?;
                post.entries
                    .push((key.to_string(), Expectation::Bound(value.to_string())));
            }
            "post-absent" => {
                post.entries
                    .push((rest.trim().to_string(), Expectation::Absent));
            }
            "op" => {
                if op.is_some() {
                    return Err(format!("line {}: second op line", index + 1));
                }
                let (op_name, args) = match rest.split_once(' ') {
                    Some((op_name, args)) => (op_name, args),
                    None => (rest, ""),
                };
                op = Some(OpInvocation {
                    name: op_name.trim().to_string(),
                    args: args.to_string(),
                });
            }
            "return" => {
                if post.return_check.is_some() {
                    return Err(format!("line {}: second return line", index + 1));
                }
                let (kind, payload) = match rest.split_once(' ') {
                    Some((kind, payload)) => (kind, payload),
                    None => (rest, ""),
                };
                post.return_check = Some(match kind {
                    "eq" => ReturnCheck::Eq(payload.to_string()),
                    "empty" => ReturnCheck::Empty,
                    "contains" => ReturnCheck::Contains(payload.to_string()),
                    "not-matched" => ReturnCheck::NotMatched,
                    "check" => ReturnCheck::Named(payload.trim().to_string()),
                    other => return Err(format!("line {}: unknown return kind {other:?}", index + 1)),
                });
            }
            other => return Err(format!("line {}: unknown directive {other:?}", index + 1)),
        }
    }

    Ok(HoareTriple {
        name: name.to_string(),
        pre,
        op: op.ok_or("missing op line")?,
        post,
    })
}

// --- named structural checks over the demo site's rendered pages ---

/// The contents of the `<span class="CLASS">...</span>` that follows
/// `label` in `body`.
fn span_after<'a>(body: &'a str, label: &str, class: &str) -> Option<&'a str> {
    let at = body.find(label)?;
    let rest = &body[at..];
    let open = format!("class=\"{class}\">");
    let start = rest.find(&open)? + open.len();
    let end = rest[start..].find("</span>")?;
    Some(&rest[start..start + end])
}

fn require(cond: bool, detail: &str) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(detail.to_string())
    }
}

fn check_feedback_form_passive(body: &str) -> std::result::Result<(), String> {
    require(body.contains("<form action="), "no form in page")?;
    require(
        span_after(body, "Your full name:", "exclaim") == Some(""),
        "fullname is flagged on first showing",
    )?;
    require(
        span_after(body, "Your comments:", "exclaim") == Some(""),
        "comments is flagged on first showing",
    )?;
    require(
        body.contains("name=\"fullname\" value=\"\""),
        "fullname input is not blank",
    )?;
    require(
        body.contains("name=\"comments\"></textarea>"),
        "comments input is not blank",
    )
}

fn check_feedback_invalid_comments(body: &str) -> std::result::Result<(), String> {
    require(
        span_after(body, "Your comments:", "exclaim") == Some("!"),
        "comments field is not flagged with !",
    )?;
    require(
        span_after(body, "Your full name:", "exclaim") == Some(""),
        "fullname field is wrongly flagged",
    )?;
    let error = span_after(body, "class=\"error\"", "error").unwrap_or("");
    require(!error.is_empty(), "error span is empty")?;
    require(
        body.contains("name=\"page\" value=\"feedback\""),
        "hidden page field missing",
    )?;
    require(
        body.contains("name=\"command\" value=\"FEEDBACK\""),
        "hidden command field missing",
    )
}

fn check_feedback_flags_fullname(body: &str) -> std::result::Result<(), String> {
    require(
        span_after(body, "Your full name:", "exclaim") == Some("!"),
        "fullname field is not flagged with !",
    )
}

fn check_feedback_success_page(body: &str) -> std::result::Result<(), String> {
    require(body.contains("Thank you"), "not the success page")?;
    require(!body.contains("<form"), "success page still shows the form")
}
