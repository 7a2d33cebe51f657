//! Exercises the C ABI exactly as a foreign caller would: through the
//! exported extern "C" functions, with C strings and manual frees.

use std::ffi::{CStr, CString};
use std::fs;
use std::os::raw::c_char;

use tempfile::TempDir;

use weft_ffi::*;

fn c(text: &str) -> CString {
    CString::new(text).unwrap()
}

/// Takes ownership of a returned string and frees it.
unsafe fn take(ptr: *mut c_char) -> Option<String> {
    if ptr.is_null() {
        return None;
    }
    let text = CStr::from_ptr(ptr).to_string_lossy().into_owned();
    weft_string_free(ptr);
    Some(text)
}

#[test]
fn props_lifecycle_and_lookup() {
    unsafe {
        let props = weft_props_new();
        assert_eq!(weft_props_len(props), 0);

        let status = weft_props_set(props, c("VAR.greeting").as_ptr(), c("hello").as_ptr());
        assert_eq!(status, WeftStatus::Ok);
        assert_eq!(weft_props_len(props), 1);
        assert_eq!(
            take(weft_props_get(props, c("VAR.greeting").as_ptr())),
            Some("hello".to_string())
        );

        // absent key: NULL, no error involved
        assert!(weft_props_get(props, c("VAR.other").as_ptr()).is_null());

        assert_eq!(
            weft_props_unset(props, c("VAR.greeting").as_ptr()),
            WeftStatus::Ok
        );
        assert_eq!(weft_props_len(props), 0);
        weft_props_free(props);
    }
}

#[test]
fn invalid_keys_and_null_arguments_are_reported() {
    unsafe {
        let props = weft_props_new();
        assert_eq!(
            weft_props_set(props, c("noPrefix").as_ptr(), c("x").as_ptr()),
            WeftStatus::InvalidKey
        );
        let message = CStr::from_ptr(weft_last_error()).to_string_lossy().into_owned();
        assert!(message.contains("noPrefix"), "{message}");

        assert_eq!(
            weft_props_set(std::ptr::null_mut(), c("VAR.a").as_ptr(), c("x").as_ptr()),
            WeftStatus::NullArgument
        );
        assert_eq!(
            weft_props_set(props, std::ptr::null(), c("x").as_ptr()),
            WeftStatus::NullArgument
        );
        weft_props_free(props);
        weft_props_free(std::ptr::null_mut()); // tolerated
    }
}

#[test]
fn config_and_request_parsing() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("site.config");
    fs::write(&config, "#comment\nappPath=/\nsmtpHost=localhost\n").unwrap();
    let errors = dir.path().join("error.config");
    fs::write(&errors, "comments=Please enter your comments\n").unwrap();

    unsafe {
        let props = weft_props_new();
        let path = c(config.to_str().unwrap());
        assert_eq!(weft_config_parse(props, path.as_ptr()), WeftStatus::Ok);
        assert_eq!(
            take(weft_props_get(props, c("CONFIG.appPath").as_ptr())),
            Some("/".to_string())
        );

        let errors_path = c(errors.to_str().unwrap());
        assert_eq!(
            weft_config_parse_bare(props, errors_path.as_ptr(), c("ERROR").as_ptr()),
            WeftStatus::Ok
        );
        assert_eq!(
            take(weft_props_get(props, c("ERROR.comments").as_ptr())),
            Some("Please enter your comments".to_string())
        );

        let missing = c("/nonexistent/x.config");
        assert_eq!(weft_config_parse(props, missing.as_ptr()), WeftStatus::IoError);

        assert_eq!(
            weft_parse_request(props, WeftMethod::Post, c("fullname=James+Smith").as_ptr()),
            WeftStatus::Ok
        );
        assert_eq!(
            take(weft_props_get(props, c("FORM.fullname").as_ptr())),
            Some("James Smith".to_string())
        );
        weft_props_free(props);
    }
}

#[test]
fn line_and_file_rendering() {
    let dir = TempDir::new().unwrap();
    let template = dir.path().join("date.html");
    fs::write(
        &template,
        "<p>The current date is <strong>[[vCurrentDate]]</strong></p>\n",
    )
    .unwrap();
    let list = dir.path().join("message.list");
    fs::write(&list, "name=[[name]]\nmessage=[[message]]\n").unwrap();

    unsafe {
        let props = weft_props_new();
        weft_props_set(props, c("VAR.vCurrentDate").as_ptr(), c("10th May 2011").as_ptr());
        weft_props_set(props, c("FORM.name").as_ptr(), c("James Smith").as_ptr());
        weft_props_set(props, c("FORM.message").as_ptr(), c("Hello, world!!").as_ptr());

        assert_eq!(
            take(weft_process_line(props, c("a [[vCurrentDate]] b").as_ptr())),
            Some("a 10th May 2011 b".to_string())
        );

        let template_path = c(template.to_str().unwrap());
        assert_eq!(
            take(weft_render_file(props, template_path.as_ptr())),
            Some("<p>The current date is <strong>10th May 2011</strong></p>\n".to_string())
        );

        let list_path = c(list.to_str().unwrap());
        assert_eq!(
            take(weft_render_list_file(props, list_path.as_ptr())),
            Some("name=James+Smith&message=Hello,+world!!".to_string())
        );

        // missing file: NULL result plus a message
        let missing = c("/nonexistent/t.html");
        assert!(weft_render_file(props, missing.as_ptr()).is_null());
        assert!(!CStr::from_ptr(weft_last_error()).to_bytes().is_empty());

        weft_props_free(props);
    }
}

#[test]
fn encode_decode_round_trip() {
    unsafe {
        let encoded = take(weft_form_encode(c("Hello, world!!").as_ptr())).unwrap();
        assert_eq!(encoded, "Hello,+world!!");
        let decoded = take(weft_form_decode(c(&encoded).as_ptr())).unwrap();
        assert_eq!(decoded, "Hello, world!!");
    }
}

#[test]
fn version_is_static() {
    unsafe {
        let version = CStr::from_ptr(weft_version()).to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
    }
}
