//! A deliberately small HTTP/1.1 front end for [`Service`]: one endpoint,
//! `Content-Length` bodies, one thread per connection, `Connection: close`.
//! Enough to put the request pipeline on a socket without pulling in an
//! async stack.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use crate::error::{Error, Result};
use crate::forms::{Method, RequestData};

use super::{HttpResponse, Service};

const MAX_HEAD_BYTES: usize = 16 * 1024;
const MAX_BODY_BYTES: usize = 1024 * 1024;

/// A running server. Dropping the handle does not stop the server; call
/// [`ServerHandle::stop`] or [`ServerHandle::join`].
pub struct ServerHandle {
    local_addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    thread: JoinHandle<()>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Signals the accept loop to exit and waits for it.
    pub fn stop(self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.local_addr);
        let _ = self.thread.join();
    }

    /// Blocks until the server exits (it only exits via [`ServerHandle::stop`]).
    pub fn join(self) {
        let _ = self.thread.join();
    }
}

/// Binds the service's address and serves requests until stopped. Binding
/// port 0 picks an ephemeral port, reported by
/// [`ServerHandle::local_addr`].
pub fn serve(service: Service) -> Result<ServerHandle> {
    let addr = format!("{}:{}", service.cfg.bind_addr, service.cfg.port);
    let listener = TcpListener::bind(&addr).map_err(|source| Error::Io {
        path: addr.clone().into(),
        source,
    })?;
    let local_addr = listener.local_addr().map_err(|source| Error::Io {
        path: addr.into(),
        source,
    })?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let service = Arc::new(service);

    let accept_shutdown = Arc::clone(&shutdown);
    let thread = std::thread::spawn(move || {
        for stream in listener.incoming() {
            if accept_shutdown.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let service = Arc::clone(&service);
            std::thread::spawn(move || {
                if let Err(err) = handle_connection(stream, &service) {
                    log::debug!("connection error: {err}");
                }
            });
        }
    });

    Ok(ServerHandle {
        local_addr,
        shutdown,
        thread,
    })
}

fn handle_connection(stream: TcpStream, service: &Service) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let response = match read_request(&mut reader) {
        Ok(Some(req)) => service.handle(&req),
        Ok(None) => HttpResponse::plain(404, "404 not found"),
        Err(status) => HttpResponse::plain(status, &format!("{status} request rejected")),
    };
    write_response(stream, &response)
}

/// Reads one request. `Ok(None)` means a well-formed request for a path we
/// do not serve; `Err(status)` a malformed or unsupported request.
fn read_request(reader: &mut BufReader<TcpStream>) -> std::result::Result<Option<RequestData>, u16> {
    let request_line = read_head_line(reader)?;
    let mut parts = request_line.split_whitespace();
    let method = parts.next().ok_or(400u16)?;
    let target = parts.next().ok_or(400u16)?;
    let version = parts.next().ok_or(400u16)?;
    if !version.starts_with("HTTP/1.") {
        return Err(505);
    }
    let method = match method {
        "GET" => Method::Get,
        "POST" => Method::Post,
        _ => return Err(405),
    };

    let mut content_type = String::new();
    let mut content_length = 0usize;
    let mut head_bytes = request_line.len();
    loop {
        let line = read_head_line(reader)?;
        head_bytes += line.len();
        if head_bytes > MAX_HEAD_BYTES {
            return Err(431);
        }
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim();
            if name.eq_ignore_ascii_case("content-type") {
                content_type = value.to_string();
            } else if name.eq_ignore_ascii_case("content-length") {
                content_length = value.parse().map_err(|_| 400u16)?;
            }
        }
    }

    let (path, query) = match target.split_once('?') {
        Some((path, query)) => (path, query.to_string()),
        None => (target, String::new()),
    };
    if path != "/main" && path != "/main/" {
        return Ok(None);
    }

    let body = match method {
        Method::Get => String::new(),
        Method::Post => {
            if content_length > MAX_BODY_BYTES {
                return Err(413);
            }
            let mut buf = vec![0u8; content_length];
            reader.read_exact(&mut buf).map_err(|_| 400u16)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
    };

    Ok(Some(RequestData {
        method,
        query,
        body,
        content_type,
    }))
}

fn read_head_line(reader: &mut BufReader<TcpStream>) -> std::result::Result<String, u16> {
    let mut line = String::new();
    let n = reader.read_line(&mut line).map_err(|_| 400u16)?;
    if n == 0 {
        return Err(400);
    }
    while line.ends_with('\n') || line.ends_with('\r') {
        line.pop();
    }
    if line.len() > MAX_HEAD_BYTES {
        return Err(431);
    }
    Ok(line)
}

fn write_response(mut stream: TcpStream, response: &HttpResponse) -> std::io::Result<()> {
    let reason = match response.status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        405 => "Method Not Allowed",
        413 => "Payload Too Large",
        431 => "Request Header Fields Too Large",
        500 => "Internal Server Error",
        505 => "HTTP Version Not Supported",
        _ => "Unknown",
    };
    let head = format!(
        "HTTP/1.1 {} {}\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        response.status,
        reason,
        response.content_type,
        response.body.len()
    );
    stream.write_all(head.as_bytes())?;
    stream.write_all(response.body.as_bytes())?;
    stream.flush()
}
