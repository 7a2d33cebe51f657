//! C ABI for the weft template engine.
//!
//! The surface is the engine core: a property-map handle, config and
//! request parsing, line/file/list rendering with the default resolver, and
//! the form encoding. Application-level token handlers are a Rust-side
//! concept and are not exposed here.
//!
//! Conventions:
//!
//! * Handles are opaque; create with `weft_props_new`, destroy with
//!   `weft_props_free`.
//! * Functions that produce text return a newly allocated NUL-terminated
//!   string the caller must release with `weft_string_free`, or NULL on
//!   failure.
//! * Functions that produce no text return a [`WeftStatus`]; on any failure
//!   `weft_last_error` describes the most recent error on the calling
//!   thread, valid until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

use weft::template::ResolverChain;
use weft::{config, forms, template, urlenc, Error, PropertyMap, RequestData};

/// Result codes for C ABI calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeftStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A property key without a recognised namespace prefix.
    InvalidKey = 3,
    /// The file could not be read.
    IoError = 4,
    /// The file or request data was malformed.
    ParseError = 5,
    /// Token resolution failed while rendering.
    RenderError = 6,
}

/// Request kinds accepted by `weft_parse_request`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeftMethod {
    Get = 0,
    Post = 1,
}

/// Opaque property-map handle.
pub struct WeftProps(PropertyMap);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn remember_error(message: impl std::fmt::Display) {
    let owned = CString::new(message.to_string().replace('\0', "?"))
        .unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_for(err: &Error) -> WeftStatus {
    match err {
        Error::BadKey { .. } => WeftStatus::InvalidKey,
        Error::Io { .. } | Error::Encoding { .. } => WeftStatus::IoError,
        Error::ConfigLine { .. }
        | Error::BadPrefix { .. }
        | Error::ListLine { .. }
        | Error::UnsupportedContentType { .. } => WeftStatus::ParseError,
        _ => WeftStatus::RenderError,
    }
}

/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated string.
unsafe fn arg_str<'a>(ptr: *const c_char) -> Result<&'a str, WeftStatus> {
    if ptr.is_null() {
        remember_error("NULL argument");
        return Err(WeftStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        remember_error("argument is not valid UTF-8");
        WeftStatus::InvalidUtf8
    })
}

fn give_string(text: String) -> *mut c_char {
    match CString::new(text) {
        Ok(owned) => owned.into_raw(),
        Err(_) => {
            remember_error("result contains an interior NUL byte");
            std::ptr::null_mut()
        }
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn weft_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// The library version as a static string; do not free it.
#[no_mangle]
pub extern "C" fn weft_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Creates an empty property map.
#[no_mangle]
pub extern "C" fn weft_props_new() -> *mut WeftProps {
    Box::into_raw(Box::new(WeftProps(PropertyMap::new())))
}

/// Destroys a property map. NULL is ignored.
///
/// # Safety
/// `props` must have come from `weft_props_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn weft_props_free(props: *mut WeftProps) {
    if !props.is_null() {
        drop(Box::from_raw(props));
    }
}

/// Binds `key` to `value`. Keys must carry one of the namespace prefixes
/// `CONFIG.`, `FORM.`, `VAR.`, `ERROR.`, `SERIAL.`.
///
/// # Safety
/// `props` must be a live handle; `key` and `value` must be valid
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn weft_props_set(
    props: *mut WeftProps,
    key: *const c_char,
    value: *const c_char,
) -> WeftStatus {
    let Some(props) = props.as_mut() else {
        remember_error("NULL props handle");
        return WeftStatus::NullArgument;
    };
    let (key, value) = match (arg_str(key), arg_str(value)) {
        (Ok(k), Ok(v)) => (k, v),
        (Err(status), _) | (_, Err(status)) => return status,
    };
    match props.0.set(key, value) {
        Ok(()) => WeftStatus::Ok,
        Err(err) => {
            remember_error(&err);
            status_for(&err)
        }
    }
}

/// Looks up `key`, returning a new string or NULL when the key is absent.
/// Absence does not set an error.
///
/// # Safety
/// `props` must be a live handle; `key` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn weft_props_get(
    props: *const WeftProps,
    key: *const c_char,
) -> *mut c_char {
    let Some(props) = props.as_ref() else {
        remember_error("NULL props handle");
        return std::ptr::null_mut();
    };
    let Ok(key) = arg_str(key) else {
        return std::ptr::null_mut();
    };
    match props.0.get(key) {
        Some(value) => give_string(value.to_string()),
        None => std::ptr::null_mut(),
    }
}

/// Removes `key`; removing an absent key is a no-op.
///
/// # Safety
/// `props` must be a live handle; `key` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn weft_props_unset(
    props: *mut WeftProps,
    key: *const c_char,
) -> WeftStatus {
    let Some(props) = props.as_mut() else {
        remember_error("NULL props handle");
        return WeftStatus::NullArgument;
    };
    match arg_str(key) {
        Ok(key) => {
            props.0.unset(key);
            WeftStatus::Ok
        }
        Err(status) => status,
    }
}

/// Number of entries in the map.
///
/// # Safety
/// `props` must be a live handle or NULL (NULL counts as empty).
#[no_mangle]
pub unsafe extern "C" fn weft_props_len(props: *const WeftProps) -> usize {
    props.as_ref().map_or(0, |p| p.0.len())
}

/// Parses a config file into the map under `CONFIG.`.
///
/// # Safety
/// `props` must be a live handle; `path` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn weft_config_parse(
    props: *mut WeftProps,
    path: *const c_char,
) -> WeftStatus {
    weft_config_parse_bare(props, path, c"CONFIG".as_ptr())
}

/// Parses a config file into the map under an arbitrary prefix (given bare,
/// e.g. `"ERROR"`).
///
/// # Safety
/// `props` must be a live handle; `path` and `prefix` must be valid
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn weft_config_parse_bare(
    props: *mut WeftProps,
    path: *const c_char,
    prefix: *const c_char,
) -> WeftStatus {
    let Some(props) = props.as_mut() else {
        remember_error("NULL props handle");
        return WeftStatus::NullArgument;
    };
    let (path, prefix) = match (arg_str(path), arg_str(prefix)) {
        (Ok(p), Ok(x)) => (p, x),
        (Err(status), _) | (_, Err(status)) => return status,
    };
    match config::parse_bare(PathBuf::from(path), prefix, &mut props.0) {
        Ok(()) => WeftStatus::Ok,
        Err(err) => {
            remember_error(&err);
            status_for(&err)
        }
    }
}

/// Decodes query-string or form-body data into `FORM.` entries: `data` is
/// the query string for GET and the urlencoded body for POST.
///
/// # Safety
/// `props` must be a live handle; `data` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn weft_parse_request(
    props: *mut WeftProps,
    method: WeftMethod,
    data: *const c_char,
) -> WeftStatus {
    let Some(props) = props.as_mut() else {
        remember_error("NULL props handle");
        return WeftStatus::NullArgument;
    };
    let data = match arg_str(data) {
        Ok(data) => data,
        Err(status) => return status,
    };
    let req = match method {
        WeftMethod::Get => RequestData::get(data),
        WeftMethod::Post => RequestData::post_form(data),
    };
    match forms::parse_request(&req, &mut props.0) {
        Ok(()) => WeftStatus::Ok,
        Err(err) => {
            remember_error(&err);
            status_for(&err)
        }
    }
}

/// Processes one line of template text: `[[token]]` markup is replaced with
/// the first binding among `VAR.`, `FORM.`, `CONFIG.`, everything else is
/// copied through. Returns a new string, or NULL on failure.
///
/// # Safety
/// `props` must be a live handle; `line` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn weft_process_line(
    props: *mut WeftProps,
    line: *const c_char,
) -> *mut c_char {
    let Some(props) = props.as_mut() else {
        remember_error("NULL props handle");
        return std::ptr::null_mut();
    };
    let Ok(line) = arg_str(line) else {
        return std::ptr::null_mut();
    };
    match template::process_line(line, &ResolverChain::default_only(), &mut props.0) {
        Ok(out) => give_string(out),
        Err(err) => {
            remember_error(&err);
            std::ptr::null_mut()
        }
    }
}

/// Processes a template file line by line. Returns the processed text, or
/// NULL on failure.
///
/// # Safety
/// `props` must be a live handle; `path` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn weft_render_file(
    props: *mut WeftProps,
    path: *const c_char,
) -> *mut c_char {
    let Some(props) = props.as_mut() else {
        remember_error("NULL props handle");
        return std::ptr::null_mut();
    };
    let Ok(path) = arg_str(path) else {
        return std::ptr::null_mut();
    };
    match template::process_file_plain(
        PathBuf::from(path),
        &ResolverChain::default_only(),
        &mut props.0,
    ) {
        Ok(out) => give_string(out),
        Err(err) => {
            remember_error(&err);
            std::ptr::null_mut()
        }
    }
}

/// Processes a list file (`name=value` lines with tokens) into a form
/// encoded query string joined with `&`. Returns a new string, or NULL on
/// failure.
///
/// # Safety
/// `props` must be a live handle; `path` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn weft_render_list_file(
    props: *mut WeftProps,
    path: *const c_char,
) -> *mut c_char {
    let Some(props) = props.as_mut() else {
        remember_error("NULL props handle");
        return std::ptr::null_mut();
    };
    let Ok(path) = arg_str(path) else {
        return std::ptr::null_mut();
    };
    match template::process_file_list(
        PathBuf::from(path),
        &ResolverChain::default_only(),
        &mut props.0,
    ) {
        Ok(out) => give_string(out),
        Err(err) => {
            remember_error(&err);
            std::ptr::null_mut()
        }
    }
}

/// Form encodes a string: space to `+`, the unreserved set unchanged, all
/// other bytes as uppercase `%HH`. Returns a new string.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn weft_form_encode(text: *const c_char) -> *mut c_char {
    match arg_str(text) {
        Ok(text) => give_string(urlenc::form_encode(text)),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Reverses `weft_form_encode` (permissive on malformed escapes). Returns a
/// new string.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn weft_form_decode(text: *const c_char) -> *mut c_char {
    match arg_str(text) {
        Ok(text) => give_string(urlenc::form_decode(text)),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `text` must have been returned by a weft function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn weft_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
