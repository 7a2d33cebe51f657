//! Form handling: decoding request data into `FORM.` entries, the form
//! preprocessing lifecycle, and the validation-oriented token handlers.
//!
//! Preprocessing runs before any page is rendered, because its outcome may
//! change which page is shown. A form definition binds a page name to a
//! hidden `command` value unique to the form; the command's absence means
//! the form is being shown for the first time (PASSIVE). When present, the
//! form is validated: an invalid form re-renders with the offending field
//! flagged (INVALID); a valid one runs its side effect (SUCCESS or FAILURE).
//! In the passive and invalid cases the rendered form HTML is stored in the
//! properties map under the form's `SERIAL.` key, for a page-level token to
//! splice in later.

use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::props::PropertyMap;
use crate::template::{process_file_plain, Resolution, ResolverChain, Token, TokenHandler};
use crate::urlenc;

/// The four outcomes of preprocessing a form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormOutcome {
    /// No submission: the form was rendered blank for first display.
    Passive,
    /// Submitted but invalid: the form was re-rendered with errors flagged.
    Invalid,
    /// Submitted, valid, and the form's effect succeeded.
    Success,
    /// Submitted and valid, but the effect failed.
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

/// The parts of an HTTP request the framework reads.
#[derive(Debug, Clone)]
pub struct RequestData {
    pub method: Method,
    pub query: String,
    pub body: String,
    pub content_type: String,
}

impl RequestData {
    pub fn get(query: impl Into<String>) -> Self {
        RequestData {
            method: Method::Get,
            query: query.into(),
            body: String::new(),
            content_type: String::new(),
        }
    }

    pub fn post_form(body: impl Into<String>) -> Self {
        RequestData {
            method: Method::Post,
            query: String::new(),
            body: body.into(),
            content_type: "application/x-www-form-urlencoded".to_string(),
        }
    }
}

/// Decodes the request's form data into `FORM.` entries: the query string
/// for GET, the body for POST. Duplicate names keep the last occurrence.
/// Uploads and other non-urlencoded POST bodies are not supported.
pub fn parse_request(req: &RequestData, props: &mut PropertyMap) -> Result<()> {
    let data = match req.method {
        Method::Get => &req.query,
        Method::Post => {
            let kind = req.content_type.split(';').next().unwrap_or("").trim();
            if !kind.is_empty() && !kind.eq_ignore_ascii_case("application/x-www-form-urlencoded")
            {
                return Err(Error::UnsupportedContentType {
                    content_type: req.content_type.clone(),
                });
            }
            &req.body
        }
    };
    for (name, value) in urlenc::parse_pairs(data) {
        if name.is_empty() {
            continue;
        }
        props.set(&format!("FORM.{name}"), value)?;
    }
    Ok(())
}

/// A validation rule for one form field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRule {
    /// The field must be present and nonempty after trimming whitespace.
    Required,
}

impl FieldRule {
    fn passes(self, value: Option<&str>) -> bool {
        match self {
            FieldRule::Required => value.is_some_and(|v| !v.trim().is_empty()),
        }
    }
}

/// Ties a form to a page, a hidden command value, its fields, its template,
/// and the `SERIAL.` key its rendered HTML is stored under.
#[derive(Debug, Clone)]
pub struct FormDefinition {
    /// The `FORM.page` value this form belongs to.
    pub page: String,
    /// Hidden `command` form variable, unique to this form.
    pub command: String,
    /// Fields in template order, each with its rule.
    pub fields: Vec<(String, FieldRule)>,
    /// Template path relative to `CONFIG.rootDir`.
    pub template_path: String,
    /// `SERIAL.`-namespaced key for the rendered form.
    pub serial_key: String,
}

/// Checks the form's fields in definition order and returns the first
/// failing one together with its `ERROR.` message key, or `None` when all
/// pass. Does not modify `props`.
pub fn validate(def: &FormDefinition, props: &PropertyMap) -> Option<(String, String)> {
    for (field, rule) in &def.fields {
        if !rule.passes(props.get(&format!("FORM.{field}"))) {
            return Some((field.clone(), format!("ERROR.{field}")));
        }
    }
    None
}

/// Result of running a form's side effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectResult {
    Success,
    Failure,
}

/// The side effect a form performs after successful validation, injected so
/// outcomes are testable without real infrastructure. Implementations must
/// be safe for concurrent use.
pub trait FormEffects {
    fn perform(&self, props: &PropertyMap) -> EffectResult;
}

/// Preprocesses one form against the current request state.
///
/// `support` supplies the handlers below the form handlers in the render
/// chain (typically the application's link tokens), so the form template's
/// own markup resolves. The caller is responsible for only invoking this
/// when `FORM.page` matches the definition; this function neither consults
/// nor changes `FORM.page`.
pub fn preprocess_form(
    def: &FormDefinition,
    effects: &dyn FormEffects,
    props: &mut PropertyMap,
    support: &ResolverChain,
) -> Result<FormOutcome> {
    let submitted = props.get("FORM.command") == Some(def.command.as_str());
    if !submitted {
        let chain = support.prepended(Arc::new(FormControlsHandler));
        let html = render_form(def, &chain, props);
        clear_temporaries(props);
        props.set(&def.serial_key, html?)?;
        return Ok(FormOutcome::Passive);
    }

    if let Some((field, error_key)) = validate(def, props) {
        let message = match props.get(&error_key) {
            Some(text) => text.to_string(),
            None => {
                log::warn!("no {error_key} message configured; rendering an empty error");
                String::new()
            }
        };
        props.set("VAR.vExclaim", field)?;
        props.set("VAR.vError", message)?;
        let chain = support
            .prepended(Arc::new(FormControlsHandler))
            .prepended(Arc::new(FormErrorsHandler));
        let html = render_form(def, &chain, props);
        clear_temporaries(props);
        props.set(&def.serial_key, html?)?;
        return Ok(FormOutcome::Invalid);
    }

    clear_temporaries(props);
    Ok(match effects.perform(props) {
        EffectResult::Success => FormOutcome::Success,
        EffectResult::Failure => FormOutcome::Failure,
    })
}

fn render_form(
    def: &FormDefinition,
    chain: &ResolverChain,
    props: &mut PropertyMap,
) -> Result<String> {
    let root = props.get("CONFIG.rootDir").unwrap_or("").to_string();
    let path = PathBuf::from(format!("{root}{}", def.template_path));
    process_file_plain(path, chain, props)
}

// Temporary variables live only while the form template renders.
fn clear_temporaries(props: &mut PropertyMap) {
    props.unset("VAR.vExclaim");
    props.unset("VAR.vError");
}

/// Resolves the validation tokens: `EXCLAIM:field` prints `!` when `field`
/// is the currently flagged field (`VAR.vExclaim`) and nothing otherwise;
/// `ERROR` prints the current error message (`VAR.vError`). Both names are
/// always matched; anything else falls through.
pub fn form_errors_handler(token: &Token, props: &PropertyMap) -> Resolution {
    match token.name() {
        "EXCLAIM" => {
            let flagged = match (token.arg(), props.get("VAR.vExclaim")) {
                (Some(arg), Some(current)) => arg == current,
                _ => false,
            };
            Resolution::Replaced(if flagged { "!".to_string() } else { String::new() })
        }
        "ERROR" => Resolution::Replaced(props.get("VAR.vError").unwrap_or("").to_string()),
        _ => Resolution::NotMatched,
    }
}

/// Resolves the form control tokens `CHECKED:field:value` and
/// `SELECTED:field:value`, which emit the corresponding HTML attribute when
/// `FORM.field` equals `value`. A malformed argument renders as nothing.
pub fn form_controls_handler(token: &Token, props: &PropertyMap) -> Resolution {
    let attribute = match token.name() {
        "CHECKED" => " checked=\"checked\"",
        "SELECTED" => " selected=\"selected\"",
        _ => return Resolution::NotMatched,
    };
    let selected = token
        .arg()
        .and_then(|arg| arg.split_once(':'))
        .is_some_and(|(field, value)| props.get(&format!("FORM.{field}")) == Some(value));
    Resolution::Replaced(if selected {
        attribute.to_string()
    } else {
        String::new()
    })
}

pub struct FormErrorsHandler;

impl TokenHandler for FormErrorsHandler {
    fn name(&self) -> &'static str {
        "form_errors"
    }
    fn resolve_token(&self, token: &Token, props: &mut PropertyMap) -> Result<Resolution> {
        Ok(form_errors_handler(token, props))
    }
}

pub struct FormControlsHandler;

impl TokenHandler for FormControlsHandler {
    fn name(&self) -> &'static str {
        "form_controls"
    }
    fn resolve_token(&self, token: &Token, props: &mut PropertyMap) -> Result<Resolution> {
        Ok(form_controls_handler(token, props))
    }
}
