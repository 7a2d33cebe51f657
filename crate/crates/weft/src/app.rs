//! The feedback application: link tokens (`MAIN`, `PAGE:...`), the
//! `FEEDBACK_FORM` token, page-transition preprocessing, and the email
//! effect behind it.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::forms::{
    preprocess_form, EffectResult, FieldRule, FormDefinition, FormEffects, FormOutcome,
    FormControlsHandler, FormErrorsHandler,
};
use crate::fsutil;
use crate::props::PropertyMap;
use crate::template::{
    process_file_list, process_file_plain, Resolution, ResolverChain, Token, TokenHandler,
};
use crate::urlenc;

pub const FEEDBACK_PAGE: &str = "feedback";
pub const FEEDBACK_COMMAND: &str = "FEEDBACK";
pub const FEEDBACK_SERIAL_KEY: &str = "SERIAL.feedback_form";

/// The definition of the demo feedback form: two required fields, tied to
/// the `feedback` page by the `FEEDBACK` command.
pub fn feedback_form() -> FormDefinition {
    FormDefinition {
        page: FEEDBACK_PAGE.to_string(),
        command: FEEDBACK_COMMAND.to_string(),
        fields: vec![
            ("fullname".to_string(), FieldRule::Required),
            ("comments".to_string(), FieldRule::Required),
        ],
        template_path: "template/_inc/feedback_form.html".to_string(),
        serial_key: FEEDBACK_SERIAL_KEY.to_string(),
    }
}

/// The server context an application sits in: URL prefix and filesystem
/// root, plus the process-name affixes used to build the `MAIN` URI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppContext {
    pub root_dir: String,
    pub app_path: String,
    pub proc_path: String,
    pub proc_ext: String,
}

impl AppContext {
    pub fn from_props(props: &PropertyMap) -> AppContext {
        AppContext {
            root_dir: props.get("CONFIG.rootDir").unwrap_or("").to_string(),
            app_path: props.get("CONFIG.appPath").unwrap_or("").to_string(),
            proc_path: props.get("CONFIG.procPath").unwrap_or("").to_string(),
            proc_ext: props.get("CONFIG.procExt").unwrap_or("").to_string(),
        }
    }
}

/// Path of a template-relative file under `CONFIG.rootDir`. The root is
/// concatenated verbatim, so it should end with a separator.
pub fn rooted(props: &PropertyMap, relative: &str) -> PathBuf {
    let root = props.get("CONFIG.rootDir").unwrap_or("");
    PathBuf::from(format!("{root}{relative}"))
}

/// Resolves the application link tokens.
///
/// `MAIN` renders `template/_inc/main.html` with the default chain and trims
/// it, yielding the URI of the server process. `PAGE:name` sets the
/// temporary `vPage` variable, renders `template/_inc/page.list` into a
/// query string, and removes the temporary again.
pub struct BaseHandler;

impl TokenHandler for BaseHandler {
    fn name(&self) -> &'static str {
        "base"
    }

    fn resolve_token(&self, token: &Token, props: &mut PropertyMap) -> Result<Resolution> {
        match token.name() {
            "MAIN" => {
                let chain = ResolverChain::default_only();
                let uri =
                    process_file_plain(rooted(props, "template/_inc/main.html"), &chain, props)?;
                Ok(Resolution::Replaced(uri.trim().to_string()))
            }
            "PAGE" => {
                let Some(page) = token.arg() else {
                    return Err(Error::TokenUsage {
                        token: token.raw().to_string(),
                    });
                };
                props.set("VAR.vPage", page)?;
                let chain = ResolverChain::default_only();
                let query =
                    process_file_list(rooted(props, "template/_inc/page.list"), &chain, props);
                props.unset("VAR.vPage");
                Ok(Resolution::Replaced(query?))
            }
            _ => Ok(Resolution::NotMatched),
        }
    }
}

/// Resolves the page-level tokens of the demo application. `FEEDBACK_FORM`
/// splices in the form HTML serialised during preprocessing.
pub struct MainHandler;

impl TokenHandler for MainHandler {
    fn name(&self) -> &'static str {
        "main"
    }

    fn resolve_token(&self, token: &Token, props: &mut PropertyMap) -> Result<Resolution> {
        if token.name() == "FEEDBACK_FORM" {
            let html = match props.get(FEEDBACK_SERIAL_KEY) {
                Some(html) => html.to_string(),
                None => {
                    log::debug!("FEEDBACK_FORM with no serialised form; preprocessing skipped?");
                    String::new()
                }
            };
            return Ok(Resolution::Replaced(html));
        }
        Ok(Resolution::NotMatched)
    }
}

/// The full page-rendering chain, most derived first: page tokens, link
/// tokens, validation tokens, control tokens, then the default echo.
pub fn standard_chain() -> ResolverChain {
    ResolverChain::new(vec![
        Arc::new(MainHandler),
        Arc::new(BaseHandler),
        Arc::new(FormErrorsHandler),
        Arc::new(FormControlsHandler),
    ])
}

/// The handlers available inside form templates (everything below the form
/// handlers themselves).
pub fn form_support_chain() -> ResolverChain {
    ResolverChain::new(vec![Arc::new(BaseHandler)])
}

/// Dispatches preprocessing by page. The feedback form runs only when
/// `FORM.page` is `feedback`; on SUCCESS or FAILURE the page is rewritten to
/// the corresponding result page, which is what precludes replaying the same
/// submission.
pub fn preprocess(props: &mut PropertyMap, effects: &dyn FormEffects) -> Result<()> {
    if props.get("FORM.page") == Some(FEEDBACK_PAGE) {
        let outcome = preprocess_form(&feedback_form(), effects, props, &form_support_chain())?;
        match outcome {
            FormOutcome::Success => props.set("FORM.page", "feedback_success")?,
            FormOutcome::Failure => props.set("FORM.page", "feedback_failure")?,
            FormOutcome::Passive | FormOutcome::Invalid => {}
        }
    }
    Ok(())
}

/// One message handed to an [`EmailTransport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmailMessage {
    pub to: String,
    pub from_name: String,
    pub subject: String,
    pub body: String,
}

/// Delivery backend for outgoing mail. Implementations must serialise
/// concurrent sends.
pub trait EmailTransport: Send + Sync {
    fn send(&self, message: &EmailMessage) -> std::result::Result<(), String>;
}

/// The default transport: appends each message to a spool file instead of
/// talking to an SMTP server.
///
/// The spool holds one record per message: `to`, `from-name`, `subject`, and
/// `body` fields as `name=value` lines with form-encoded values, followed by
/// a `%%` separator line.
pub struct SpoolTransport {
    path: PathBuf,
    lock: Mutex<()>,
}

impl SpoolTransport {
    pub fn new(path: impl Into<PathBuf>) -> SpoolTransport {
        SpoolTransport {
            path: path.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Reads every record out of a spool file, decoding field values. A
    /// missing file reads as zero records.
    pub fn read_messages(path: impl AsRef<Path>) -> Result<Vec<EmailMessage>> {
        let path = path.as_ref();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let (lines, _) = fsutil::read_lines(path)?;
        let mut messages = Vec::new();
        let mut current = EmailMessage {
            to: String::new(),
            from_name: String::new(),
            subject: String::new(),
            body: String::new(),
        };
        for line in &lines {
            if line == "%%" {
                messages.push(std::mem::replace(
                    &mut current,
                    EmailMessage {
                        to: String::new(),
                        from_name: String::new(),
                        subject: String::new(),
                        body: String::new(),
                    },
                ));
                continue;
            }
            if let Some((name, value)) = line.split_once('=') {
                let value = urlenc::form_decode(value);
                match name {
                    "to" => current.to = value,
                    "from-name" => current.from_name = value,
                    "subject" => current.subject = value,
                    "body" => current.body = value,
                    _ => {}
                }
            }
        }
        Ok(messages)
    }
}

impl EmailTransport for SpoolTransport {
    fn send(&self, message: &EmailMessage) -> std::result::Result<(), String> {
        let _guard = self.lock.lock().expect("spool lock poisoned");
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| format!("open {}: {e}", self.path.display()))?;
        let record = format!(
            "to={}\nfrom-name={}\nsubject={}\nbody={}\n%%\n",
            urlenc::form_encode(&message.to),
            urlenc::form_encode(&message.from_name),
            urlenc::form_encode(&message.subject),
            urlenc::form_encode(&message.body),
        );
        file.write_all(record.as_bytes())
            .map_err(|e| format!("write {}: {e}", self.path.display()))
    }
}

/// Builds the feedback message from config and form entries and hands it to
/// the transport.
pub fn send_feedback_email(props: &PropertyMap, transport: &dyn EmailTransport) -> EffectResult {
    let get = |key: &str| props.get(key).unwrap_or("").to_string();
    let message = EmailMessage {
        to: get("CONFIG.gFeedbackRecipient"),
        from_name: get("CONFIG.gFeedbackSenderName"),
        subject: get("CONFIG.gFeedbackSubject"),
        body: format!(
            "Name: {}\nComments: {}\n",
            get("FORM.fullname"),
            get("FORM.comments")
        ),
    };
    match transport.send(&message) {
        Ok(()) => EffectResult::Success,
        Err(reason) => {
            log::warn!("feedback email not sent: {reason}");
            EffectResult::Failure
        }
    }
}

/// [`FormEffects`] adapter that sends the feedback email.
pub struct FeedbackMailer {
    transport: Arc<dyn EmailTransport>,
}

impl FeedbackMailer {
    pub fn new(transport: Arc<dyn EmailTransport>) -> FeedbackMailer {
        FeedbackMailer { transport }
    }
}

impl FormEffects for FeedbackMailer {
    fn perform(&self, props: &PropertyMap) -> EffectResult {
        send_feedback_email(props, self.transport.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use std::fs;

    use tempfile::TempDir;

    use super::*;

    fn token(raw: &str) -> Token {
        Token::parse(raw).unwrap()
    }

    /// A minimal site root with the include files the handlers need.
    fn include_site() -> TempDir {
        let dir = TempDir::new().unwrap();
        let inc = dir.path().join("template/_inc");
        fs::create_dir_all(&inc).unwrap();
        fs::write(inc.join("main.html"), "[[appPath]][[procPath]]main[[procExt]]\n").unwrap();
        fs::write(inc.join("page.list"), "page=[[vPage]]\n").unwrap();
        dir
    }

    fn site_props(dir: &TempDir, app_path: &str, proc_path: &str, proc_ext: &str) -> PropertyMap {
        let mut props = PropertyMap::new();
        props
            .set("CONFIG.rootDir", format!("{}/", dir.path().display()))
            .unwrap();
        props.set("CONFIG.appPath", app_path).unwrap();
        props.set("CONFIG.procPath", proc_path).unwrap();
        props.set("CONFIG.procExt", proc_ext).unwrap();
        props
    }

    #[test]
    fn main_token_builds_php_style_uri() {
        let dir = include_site();
        let mut props = site_props(&dir, "/", "php/", ".php");
        let result = BaseHandler.resolve_token(&token("MAIN"), &mut props).unwrap();
        assert_eq!(result, Resolution::Replaced("/php/main.php".to_string()));
    }

    #[test]
    fn main_token_with_empty_affixes() {
        let dir = include_site();
        let mut props = site_props(&dir, "/", "", "");
        let result = BaseHandler.resolve_token(&token("MAIN"), &mut props).unwrap();
        assert_eq!(result, Resolution::Replaced("/main".to_string()));
    }

    #[test]
    fn page_token_builds_query_string() {
        let dir = include_site();
        let mut props = site_props(&dir, "/", "", "");
        let result = BaseHandler
            .resolve_token(&token("PAGE:test"), &mut props)
            .unwrap();
        assert_eq!(result, Resolution::Replaced("page=test".to_string()));
        // the temporary is gone again
        assert_eq!(props.get("VAR.vPage"), None);
    }

    #[test]
    fn page_token_requires_argument() {
        let dir = include_site();
        let mut props = site_props(&dir, "/", "", "");
        assert!(matches!(
            BaseHandler.resolve_token(&token("PAGE"), &mut props),
            Err(Error::TokenUsage { .. })
        ));
    }

    #[test]
    fn base_handler_declines_other_tokens() {
        let mut props = PropertyMap::new();
        assert_eq!(
            BaseHandler
                .resolve_token(&token("FEEDBACK_FORM"), &mut props)
                .unwrap(),
            Resolution::NotMatched
        );
    }

    #[test]
    fn missing_include_is_io_error() {
        let mut props = PropertyMap::new();
        props.set("CONFIG.rootDir", "/nonexistent/").unwrap();
        assert!(matches!(
            BaseHandler.resolve_token(&token("MAIN"), &mut props),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn feedback_form_token_returns_serialised_html() {
        let mut props = PropertyMap::new();
        props.set(FEEDBACK_SERIAL_KEY, "<form>rendered</form>").unwrap();
        assert_eq!(
            MainHandler
                .resolve_token(&token("FEEDBACK_FORM"), &mut props)
                .unwrap(),
            Resolution::Replaced("<form>rendered</form>".to_string())
        );
    }

    #[test]
    fn feedback_form_token_without_serial_is_empty() {
        let mut props = PropertyMap::new();
        assert_eq!(
            MainHandler
                .resolve_token(&token("FEEDBACK_FORM"), &mut props)
                .unwrap(),
            Resolution::Replaced(String::new())
        );
    }

    #[test]
    fn main_handler_delegates_main_to_base() {
        let mut props = PropertyMap::new();
        assert_eq!(
            MainHandler.resolve_token(&token("MAIN"), &mut props).unwrap(),
            Resolution::NotMatched
        );
    }

    fn feedback_site() -> TempDir {
        let dir = include_site();
        fs::write(
            dir.path().join("template/_inc/feedback_form.html"),
            "<form action=\"[[MAIN]]\" method=\"POST\">[[EXCLAIM:fullname]][[fullname]]</form>\n",
        )
        .unwrap();
        dir
    }

    struct AlwaysSucceed;
    impl FormEffects for AlwaysSucceed {
        fn perform(&self, _props: &PropertyMap) -> EffectResult {
            EffectResult::Success
        }
    }

    struct AlwaysFail;
    impl FormEffects for AlwaysFail {
        fn perform(&self, _props: &PropertyMap) -> EffectResult {
            EffectResult::Failure
        }
    }

    #[test]
    fn preprocess_passive_leaves_page_unchanged() {
        let dir = feedback_site();
        let mut props = site_props(&dir, "/", "", "");
        props.set("FORM.page", "feedback").unwrap();
        preprocess(&mut props, &AlwaysSucceed).unwrap();
        assert_eq!(props.get("FORM.page"), Some("feedback"));
        // the form was serialised and contains the resolved action URI
        assert!(props.get(FEEDBACK_SERIAL_KEY).unwrap().contains("action=\"/main\""));
    }

    #[test]
    fn preprocess_success_rewrites_page() {
        let dir = feedback_site();
        let mut props = site_props(&dir, "/", "", "");
        props.set("FORM.page", "feedback").unwrap();
        props.set("FORM.command", "FEEDBACK").unwrap();
        props.set("FORM.fullname", "James Smith").unwrap();
        props.set("FORM.comments", "Hello").unwrap();
        preprocess(&mut props, &AlwaysSucceed).unwrap();
        assert_eq!(props.get("FORM.page"), Some("feedback_success"));
    }

    #[test]
    fn preprocess_failure_rewrites_page() {
        let dir = feedback_site();
        let mut props = site_props(&dir, "/", "", "");
        props.set("FORM.page", "feedback").unwrap();
        props.set("FORM.command", "FEEDBACK").unwrap();
        props.set("FORM.fullname", "James Smith").unwrap();
        props.set("FORM.comments", "Hello").unwrap();
        preprocess(&mut props, &AlwaysFail).unwrap();
        assert_eq!(props.get("FORM.page"), Some("feedback_failure"));
    }

    #[test]
    fn preprocess_invalid_leaves_page_unchanged() {
        let dir = feedback_site();
        let mut props = site_props(&dir, "/", "", "");
        props.set("FORM.page", "feedback").unwrap();
        props.set("FORM.command", "FEEDBACK").unwrap();
        preprocess(&mut props, &AlwaysSucceed).unwrap();
        assert_eq!(props.get("FORM.page"), Some("feedback"));
    }

    #[test]
    fn preprocess_ignores_other_pages() {
        let mut props = PropertyMap::new();
        props.set("FORM.page", "about").unwrap();
        let before = props.clone();
        preprocess(&mut props, &AlwaysSucceed).unwrap();
        assert_eq!(props, before);
    }

    #[test]
    fn page_transitions_are_total() {
        // every reachable transition lands in one of the three pages
        type Case<'a> = (Option<&'a str>, Option<&'a str>, Option<&'a str>, bool, &'a str);
        let dir = feedback_site();
        let cases: Vec<Case> = vec![
            (None, None, None, true, "feedback"),
            (Some("FEEDBACK"), None, None, true, "feedback"),
            (Some("FEEDBACK"), Some("a"), Some("b"), true, "feedback_success"),
            (Some("FEEDBACK"), Some("a"), Some("b"), false, "feedback_failure"),
        ];
        for (command, fullname, comments, succeed, expected) in cases {
            let mut props = site_props(&dir, "/", "", "");
            props.set("FORM.page", "feedback").unwrap();
            if let Some(c) = command {
                props.set("FORM.command", c).unwrap();
            }
            if let Some(f) = fullname {
                props.set("FORM.fullname", f).unwrap();
            }
            if let Some(c) = comments {
                props.set("FORM.comments", c).unwrap();
            }
            if succeed {
                preprocess(&mut props, &AlwaysSucceed).unwrap();
            } else {
                preprocess(&mut props, &AlwaysFail).unwrap();
            }
            assert_eq!(props.get("FORM.page"), Some(expected));
        }
    }

    #[test]
    fn app_context_reads_config_entries() {
        let mut props = PropertyMap::new();
        props.set("CONFIG.rootDir", "/srv/site/").unwrap();
        props.set("CONFIG.appPath", "/").unwrap();
        props.set("CONFIG.procPath", "php/").unwrap();
        props.set("CONFIG.procExt", ".php").unwrap();
        let ctx = AppContext::from_props(&props);
        assert_eq!(ctx.root_dir, "/srv/site/");
        assert_eq!(ctx.app_path, "/");
        assert_eq!(ctx.proc_path, "php/");
        assert_eq!(ctx.proc_ext, ".php");

        let empty = AppContext::from_props(&PropertyMap::new());
        assert_eq!(empty.root_dir, "");
        assert_eq!(empty.proc_ext, "");
    }

    #[test]
    fn main_output_is_fully_resolved() {
        let dir = include_site();
        for affixes in [("/", "php/", ".php"), ("/", "", "")] {
            let mut props = site_props(&dir, affixes.0, affixes.1, affixes.2);
            let Resolution::Replaced(uri) =
                BaseHandler.resolve_token(&token("MAIN"), &mut props).unwrap()
            else {
                panic!("MAIN must match");
            };
            assert!(!uri.contains("[["), "unresolved token in {uri:?}");
        }
    }

    struct CountingEffects {
        runs: std::sync::atomic::AtomicUsize,
    }
    impl FormEffects for CountingEffects {
        fn perform(&self, _props: &PropertyMap) -> EffectResult {
            self.runs.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            EffectResult::Success
        }
    }

    #[test]
    fn success_transition_precludes_replaying_the_submission() {
        let dir = feedback_site();
        let effects = CountingEffects {
            runs: std::sync::atomic::AtomicUsize::new(0),
        };
        let submit = |props: &mut PropertyMap, page: &str| {
            props.set("FORM.page", page).unwrap();
            props.set("FORM.command", "FEEDBACK").unwrap();
            props.set("FORM.fullname", "James Smith").unwrap();
            props.set("FORM.comments", "Hello").unwrap();
        };

        let mut props = site_props(&dir, "/", "", "");
        submit(&mut props, "feedback");
        preprocess(&mut props, &effects).unwrap();
        assert_eq!(props.get("FORM.page"), Some("feedback_success"));
        assert_eq!(effects.runs.load(std::sync::atomic::Ordering::SeqCst), 1);

        // identical field set, but the page now names the success page: the
        // form is never dispatched and the effect does not run again
        let mut replay = site_props(&dir, "/", "", "");
        submit(&mut replay, "feedback_success");
        preprocess(&mut replay, &effects).unwrap();
        assert_eq!(replay.get("FORM.page"), Some("feedback_success"));
        assert_eq!(effects.runs.load(std::sync::atomic::Ordering::SeqCst), 1);
    }

    #[test]
    fn spool_transport_appends_records_in_order() {
        let dir = TempDir::new().unwrap();
        let spool_path = dir.path().join("feedback.spool");
        let spool = SpoolTransport::new(&spool_path);
        let mut props = PropertyMap::new();
        props.set("CONFIG.gFeedbackRecipient", "webmaster@example.net").unwrap();
        props.set("CONFIG.gFeedbackSenderName", "Site feedback").unwrap();
        props.set("CONFIG.gFeedbackSubject", "Site feedback").unwrap();
        props.set("FORM.fullname", "James Smith").unwrap();
        props.set("FORM.comments", "First\nmessage").unwrap();

        assert_eq!(send_feedback_email(&props, &spool), EffectResult::Success);
        props.set("FORM.comments", "Second message").unwrap();
        assert_eq!(send_feedback_email(&props, &spool), EffectResult::Success);

        let messages = SpoolTransport::read_messages(&spool_path).unwrap();
        assert_eq!(messages.len(), 2);
        assert_eq!(messages[0].subject, "Site feedback");
        assert_eq!(messages[0].to, "webmaster@example.net");
        assert!(messages[0].body.contains("James Smith"));
        assert!(messages[0].body.contains("First\nmessage"));
        assert!(messages[1].body.contains("Second message"));
    }

    struct BrokenTransport;
    impl EmailTransport for BrokenTransport {
        fn send(&self, _message: &EmailMessage) -> std::result::Result<(), String> {
            Err("injected fault".to_string())
        }
    }

    #[test]
    fn failing_transport_reports_failure() {
        let mut props = PropertyMap::new();
        props.set("FORM.fullname", "a").unwrap();
        props.set("FORM.comments", "b").unwrap();
        assert_eq!(
            send_feedback_email(&props, &BrokenTransport),
            EffectResult::Failure
        );
    }

    #[test]
    fn reading_missing_spool_is_empty() {
        assert_eq!(
            SpoolTransport::read_messages("/nonexistent/feedback.spool").unwrap(),
            vec![]
        );
    }
}
