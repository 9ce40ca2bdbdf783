use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Largest accepted request body (screenshots are the big ones).
pub const MAX_BODY: u64 = 16 * 1024 * 1024;
/// Largest accepted request line plus headers.
pub const MAX_HEAD: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Get => "GET",
            Method::Post => "POST",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed request: {0}")]
    Malformed(&'static str),
    #[error("method {0} not allowed")]
    MethodNotAllowed(String),
    #[error("body of {0} bytes exceeds limit")]
    BodyTooLarge(u64),
}

impl ParseError {
    pub fn status(&self) -> u16 {
        match self {
            ParseError::Malformed(_) => 400,
            ParseError::MethodNotAllowed(_) => 405,
            ParseError::BodyTooLarge(_) => 413,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub method: Method,
    /// Request target as sent, query string included.
    pub path: String,
    /// Header names are stored lowercased.
    pub headers: BTreeMap<String, String>,
    pub body: Vec<u8>,
    /// Peer address, filled in by the server.
    pub peer: Option<String>,
}

impl Request {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(&name.to_ascii_lowercase()).map(String::as_str)
    }

    /// The path without any query string.
    pub fn route(&self) -> &str {
        self.path.split_once('?').map_or(&self.path, |(p, _)| p)
    }
}

/// Request line and headers, before the body has been read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Head {
    pub method: Method,
    pub path: String,
    pub headers: BTreeMap<String, String>,
    pub content_length: usize,
}

impl Head {
    pub fn with_body(self, body: Vec<u8>) -> Request {
        Request {
            method: self.method,
            path: self.path,
            headers: self.headers,
            body,
            peer: None,
        }
    }
}

/// Offset just past the blank line ending the headers, if present.
pub fn find_head_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n").map(|i| i + 4)
}

fn is_tchar(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b"!#$%&'*+-.^_`|~".contains(&b)
}

/// Parses the request line and headers. `head` must end with the CRLFCRLF
/// terminator.
pub fn parse_head(head: &[u8]) -> Result<Head, ParseError> {
    let text = head
        .strip_suffix(b"\r\n\r\n")
        .ok_or(ParseError::Malformed("unterminated header"))?;
    let text = std::str::from_utf8(text).map_err(|_| ParseError::Malformed("non-UTF-8 header"))?;
    let mut lines = text.split("\r\n");

    let request_line = lines.next().unwrap_or_default();
    let mut parts = request_line.split(' ');
    let (Some(method), Some(path), Some(version), None) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(ParseError::Malformed("bad request line"));
    };
    if method.is_empty() || !method.bytes().all(is_tchar) {
        return Err(ParseError::Malformed("bad method"));
    }
    if !path.starts_with('/') || !path.bytes().all(|b| b.is_ascii_graphic()) {
        return Err(ParseError::Malformed("bad path"));
    }
    let minor_ok = version
        .strip_prefix("HTTP/1.")
        .is_some_and(|m| m.len() == 1 && m.as_bytes()[0].is_ascii_digit());
    if !minor_ok {
        return Err(ParseError::Malformed("bad version"));
    }

    let mut headers = BTreeMap::new();
    let mut content_length: Option<u64> = None;
    for line in lines {
        let (name, value) = line
            .split_once(':')
            .ok_or(ParseError::Malformed("header without colon"))?;
        if name.is_empty() || !name.bytes().all(is_tchar) {
            return Err(ParseError::Malformed("bad header name"));
        }
        if value.chars().any(|c| c.is_control() && c != '\t') {
            return Err(ParseError::Malformed("control character in header"));
        }
        let name = name.to_ascii_lowercase();
        let value = value.trim_matches([' ', '\t']).to_owned();
        match name.as_str() {
            "content-length" => {
                if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(ParseError::Malformed("bad content-length"));
                }
                let len = value.parse::<u64>().unwrap_or(u64::MAX);
                if content_length.is_some_and(|prev| prev != len) {
                    return Err(ParseError::Malformed("conflicting content-length"));
                }
                content_length = Some(len);
            }
            "transfer-encoding" => {
                return Err(ParseError::Malformed("transfer-encoding unsupported"));
            }
            _ => {}
        }
        headers.insert(name, value);
    }

    let method = match method {
        "GET" => Method::Get,
        "POST" => Method::Post,
        other => return Err(ParseError::MethodNotAllowed(other.to_owned())),
    };
    let content_length = content_length.unwrap_or(0);
    if content_length > MAX_BODY {
        return Err(ParseError::BodyTooLarge(content_length));
    }

    Ok(Head {
        method,
        path: path.to_owned(),
        headers,
        content_length: content_length as usize,
    })
}

/// Parses one complete request. Bytes beyond the declared body are ignored.
pub fn parse_request(bytes: &[u8]) -> Result<Request, ParseError> {
    let end =
        find_head_end(&bytes[..bytes.len().min(MAX_HEAD + 4)]).ok_or(ParseError::Malformed("unterminated header"))?;
    let head = parse_head(&bytes[..end])?;
    let body = bytes[end..]
        .get(..head.content_length)
        .ok_or(ParseError::Malformed("truncated body"))?
        .to_vec();
    Ok(head.with_body(body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_get() {
        let req = parse_request(b"GET /simulation HTTP/1.1\r\n\r\n").unwrap();
        assert_eq!(req.method, Method::Get);
        assert_eq!(req.path, "/simulation");
        assert!(req.body.is_empty());
        assert!(req.headers.is_empty());
    }

    #[test]
    fn post_with_body() {
        let req = parse_request(b"POST /cmd HTTP/1.1\r\nContent-Length: 5\r\n\r\npause").unwrap();
        assert_eq!(req.method, Method::Post);
        assert_eq!(req.body, b"pause");
        assert_eq!(req.header("CONTENT-LENGTH"), Some("5"));
    }

    #[test]
    fn header_names_fold_case() {
        let req = parse_request(b"GET / HTTP/1.0\r\nHoSt:  example \r\n\r\n").unwrap();
        assert_eq!(req.header("host"), Some("example"));
        assert_eq!(req.header("Host"), Some("example"));
    }

    #[test]
    fn query_is_not_part_of_route() {
        let req = parse_request(b"GET /simulation?t=3 HTTP/1.1\r\n\r\n").unwrap();
        assert_eq!(req.route(), "/simulation");
        assert_eq!(req.path, "/simulation?t=3");
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(
            parse_request(b"\x00\x01garbage"),
            Err(ParseError::Malformed(_))
        ));
        for bad in [
            &b"GET  / HTTP/1.1\r\n\r\n"[..],
            b"GET simulation HTTP/1.1\r\n\r\n",
            b"GET / HTTP/2.0\r\n\r\n",
            b"GET / HTTP/1.1\r\nNoColon\r\n\r\n",
            b"GET / HTTP/1.1\r\nBad Name: x\r\n\r\n",
            b"POST / HTTP/1.1\r\nContent-Length: abc\r\n\r\n",
            b"POST / HTTP/1.1\r\nContent-Length: 1\r\nContent-Length: 2\r\n\r\nxx",
            b"POST / HTTP/1.1\r\nContent-Length: 10\r\n\r\nshort",
            b"POST / HTTP/1.1\r\nTransfer-Encoding: chunked\r\n\r\n",
            b"GET / HTTP/1.1\n\n",
        ] {
            let err = parse_request(bad).unwrap_err();
            assert_eq!(err.status(), 400, "{:?}", String::from_utf8_lossy(bad));
        }
    }

    #[test]
    fn other_methods_not_allowed() {
        let err = parse_request(b"DELETE /cmd HTTP/1.1\r\n\r\n").unwrap_err();
        assert_eq!(err, ParseError::MethodNotAllowed("DELETE".into()));
        assert_eq!(err.status(), 405);
    }

    #[test]
    fn oversized_body_rejected_from_header() {
        let req = format!("POST /shot HTTP/1.1\r\nContent-Length: {}\r\n\r\n", MAX_BODY + 1);
        let err = parse_request(req.as_bytes()).unwrap_err();
        assert_eq!(err, ParseError::BodyTooLarge(MAX_BODY + 1));
        assert_eq!(err.status(), 413);
    }

    #[test]
    fn repeated_equal_content_length_is_fine() {
        let req = parse_request(b"POST /cmd HTTP/1.1\r\nContent-Length: 4\r\ncontent-length: 4\r\n\r\nstep").unwrap();
        assert_eq!(req.body, b"step");
    }
}
