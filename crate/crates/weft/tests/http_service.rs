//! End-to-end tests over a real socket.

mod common;

use std::io::{Read, Write};
use std::net::TcpStream;

use tempfile::TempDir;

use common::{demo_config, demo_root};
use weft::app::standard_chain;
use weft::server::{serve, Service};
use weft::template::process_file_plain;
use weft::{config, PropertyMap};

struct RawResponse {
    status: u16,
    headers: String,
    body: String,
}

fn exchange(addr: std::net::SocketAddr, request: &str) -> RawResponse {
    let mut stream = TcpStream::connect(addr).unwrap();
    stream.write_all(request.as_bytes()).unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let (head, body) = raw.split_once("\r\n\r\n").expect("header/body split");
    let status: u16 = head
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .expect("status code");
    RawResponse {
        status,
        headers: head.to_string(),
        body: body.to_string(),
    }
}

fn get(addr: std::net::SocketAddr, target: &str) -> RawResponse {
    exchange(
        addr,
        &format!("GET {target} HTTP/1.1\r\nHost: test\r\nConnection: close\r\n\r\n"),
    )
}

fn post_form(addr: std::net::SocketAddr, target: &str, body: &str) -> RawResponse {
    exchange(
        addr,
        &format!(
            "POST {target} HTTP/1.1\r\nHost: test\r\n\
             Content-Type: application/x-www-form-urlencoded\r\n\
             Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        ),
    )
}

#[test]
fn full_feedback_walkthrough_over_http() {
    let spool_dir = TempDir::new().unwrap();
    let spool = spool_dir.path().join("feedback.spool");
    let mut cfg = demo_config(&spool);
    cfg.port = 0; // ephemeral
    let handle = serve(Service::with_spool(cfg)).unwrap();
    let addr = handle.local_addr();

    // welcome page with a working link
    let welcome = get(addr, "/main");
    assert_eq!(welcome.status, 200);
    assert!(welcome.headers.contains("Content-Type: text/html; charset=utf-8"));
    assert!(welcome.body.contains("href=\"/main?page=feedback\""));
    assert!(!welcome.body.contains("[["));

    // blank form
    let form = get(addr, "/main?page=feedback");
    assert_eq!(form.status, 200);
    assert!(form.body.contains("action=\"/main\""));
    assert!(!form.body.contains('!'));

    // invalid submission: flagged field, message, hidden state intact
    let invalid = post_form(addr, "/main", "page=feedback&command=FEEDBACK&fullname=James+Smith");
    assert_eq!(invalid.status, 200);
    assert!(invalid.body.contains('!'));
    assert!(invalid.body.contains("Please enter your comments"));
    assert!(invalid.body.contains("value=\"James Smith\""));

    // valid submission: success page, one spooled message
    let valid = post_form(
        addr,
        "/main",
        "page=feedback&command=FEEDBACK&fullname=James+Smith&comments=Hello",
    );
    assert_eq!(valid.status, 200);
    assert!(valid.body.contains("Thank you"));
    assert_eq!(
        weft::app::SpoolTransport::read_messages(&spool).unwrap().len(),
        1
    );

    // unknown paths and unsupported methods
    assert_eq!(get(addr, "/other").status, 404);
    assert_eq!(get(addr, "/main?page=nope").status, 404);
    assert_eq!(get(addr, "/main?page=..%2Fpasswd").status, 400);
    let put = exchange(
        addr,
        "PUT /main HTTP/1.1\r\nHost: test\r\nContent-Length: 0\r\nConnection: close\r\n\r\n",
    );
    assert_eq!(put.status, 405);

    handle.stop();
}

/// The default page served for a bare GET is exactly the direct render of
/// `template/main.html` under the same properties.
#[test]
fn default_page_matches_direct_render() {
    let spool_dir = TempDir::new().unwrap();
    let service = Service::with_spool(demo_config(&spool_dir.path().join("s.spool")));
    let response = service.handle(&weft::RequestData::get(""));
    assert_eq!(response.status, 200);

    let root = demo_root();
    let mut props = PropertyMap::new();
    config::parse(root.join("config/platform.config"), &mut props).unwrap();
    config::parse(root.join("config/global.config"), &mut props).unwrap();
    config::parse_bare(root.join("config/error.config"), "ERROR", &mut props).unwrap();
    props.set("CONFIG.rootDir", format!("{}/", root.display())).unwrap();
    props.set("FORM.page", "main").unwrap();
    let expected =
        process_file_plain(root.join("template/main.html"), &standard_chain(), &mut props)
            .unwrap();

    assert_eq!(response.body, expected);
}
