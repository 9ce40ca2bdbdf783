//! Blocking one-shot HTTP client for the server's own protocol.
//!
//! Used by the benchmark poller, the examples and the tests; it relies on
//! the server closing every connection after one response.

use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpStream};
use std::time::Duration;

use super::request::find_head_end;

const TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientResponse {
    pub status: u16,
    /// Header names lowercased, in arrival order.
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl ClientResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        let name = name.to_ascii_lowercase();
        self.headers.iter().find(|(n, _)| *n == name).map(|(_, v)| v.as_str())
    }
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_owned())
}

/// Sends `raw` verbatim and returns everything the server writes back.
pub fn exchange_raw(addr: SocketAddr, raw: &[u8]) -> io::Result<Vec<u8>> {
    let mut stream = TcpStream::connect_timeout(&addr, TIMEOUT)?;
    stream.set_read_timeout(Some(TIMEOUT))?;
    stream.set_write_timeout(Some(TIMEOUT))?;
    stream.set_nodelay(true)?;
    stream.write_all(raw)?;
    stream.shutdown(Shutdown::Write)?;
    let mut out = Vec::new();
    stream.read_to_end(&mut out)?;
    Ok(out)
}

pub fn parse_response(bytes: &[u8]) -> io::Result<ClientResponse> {
    let end = find_head_end(bytes).ok_or_else(|| invalid("unterminated response head"))?;
    let head = std::str::from_utf8(&bytes[..end - 4]).map_err(|_| invalid("non-UTF-8 head"))?;
    let mut lines = head.split("\r\n");
    let status_line = lines.next().unwrap_or_default();
    let status = status_line
        .strip_prefix("HTTP/1.")
        .and_then(|rest| rest.get(2..5))
        .and_then(|code| code.parse().ok())
        .ok_or_else(|| invalid("bad status line"))?;
    let headers = lines
        .map(|l| {
            l.split_once(':')
                .map(|(n, v)| (n.to_ascii_lowercase(), v.trim().to_owned()))
                .ok_or_else(|| invalid("bad header"))
        })
        .collect::<io::Result<Vec<_>>>()?;
    let body = bytes[end..].to_vec();
    let resp = ClientResponse { status, headers, body };
    if let Some(len) = resp.header("content-length") {
        if len.parse::<usize>().ok() != Some(resp.body.len()) {
            return Err(invalid("body length disagrees with Content-Length"));
        }
    }
    Ok(resp)
}

pub fn request(addr: SocketAddr, method: &str, path: &str, body: &[u8]) -> io::Result<ClientResponse> {
    let mut raw = format!("{method} {path} HTTP/1.1\r\nHost: {addr}\r\n").into_bytes();
    if method != "GET" || !body.is_empty() {
        raw.extend_from_slice(format!("Content-Length: {}\r\n", body.len()).as_bytes());
    }
    raw.extend_from_slice(b"\r\n");
    raw.extend_from_slice(body);
    parse_response(&exchange_raw(addr, &raw)?)
}

pub fn get(addr: SocketAddr, path: &str) -> io::Result<ClientResponse> {
    request(addr, "GET", path, &[])
}

pub fn post(addr: SocketAddr, path: &str, body: &[u8]) -> io::Result<ClientResponse> {
    request(addr, "POST", path, body)
}
