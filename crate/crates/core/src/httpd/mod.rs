//! Minimal HTTP/1.x server built on `std::net`.
//!
//! Only what the viewer needs is implemented: the page itself, snapshot
//! polling, steering commands and screenshot uploads. Every response closes
//! the connection. Unknown paths get a 404 and nothing more.
//!
//! | request            | response                                         |
//! |--------------------|--------------------------------------------------|
//! | `GET /`            | viewer page, `text/html`                         |
//! | `GET /simulation`  | current snapshot, `application/octet-stream`     |
//! | `POST /cmd`        | body `pause`/`resume`/`step`/`quit` → `ok\n`     |
//! | `POST /shot`       | PNG body, stored path or `discarded\n`           |
//!
//! Not meant for public networks: it binds to loopback unless told
//! otherwise.

pub mod client;
mod request;
mod response;
mod server;

use std::net::{IpAddr, Ipv4Addr};
use std::path::PathBuf;

pub use request::{find_head_end, parse_head, parse_request, Head, Method, ParseError, Request, MAX_BODY, MAX_HEAD};
pub use response::{reason, Response};
pub use server::{start_server, ServerHandle};

use crate::steering::{Command, ScreenshotOutcome, SharedState, Verb};

pub const DEFAULT_PORT: u16 = 1234;

/// The single-file browser viewer, compiled into the binary.
pub static VIEWER_HTML: &[u8] = include_bytes!("../../assets/viewer.html");

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ViewerSource {
    #[default]
    Embedded,
    /// Read from disk on every request, for working on the page.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub bind: IpAddr,
    /// 0 picks an ephemeral port.
    pub port: u16,
    pub screenshot_dir: Option<PathBuf>,
    pub viewer: ViewerSource,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            screenshot_dir: None,
            viewer: ViewerSource::Embedded,
        }
    }
}

impl ServerConfig {
    pub fn ephemeral() -> Self {
        ServerConfig {
            port: 0,
            ..Default::default()
        }
    }
}

pub fn stop_server(handle: &mut ServerHandle) {
    handle.stop();
}

/// Routes one parsed request.
pub fn handle_request(req: &Request, state: &SharedState, config: &ServerConfig) -> Response {
    match (req.method, req.route()) {
        (Method::Get, "/") => match &config.viewer {
            ViewerSource::Embedded => Response::new(200, "text/html; charset=utf-8", VIEWER_HTML.to_vec()),
            ViewerSource::File(path) => match std::fs::read(path) {
                Ok(page) => Response::new(200, "text/html; charset=utf-8", page),
                Err(_) => Response::error(500),
            },
        },
        (Method::Get, "/simulation") => Response::new(200, "application/octet-stream", state.capture_snapshot()),
        (Method::Post, "/cmd") => {
            let verb = std::str::from_utf8(&req.body)
                .ok()
                .and_then(|body| body.trim_ascii().parse::<Verb>().ok());
            match verb {
                Some(verb) => {
                    let origin = req.peer.clone().unwrap_or_else(|| "unknown".into());
                    state.submit_command(Command::new(verb, origin));
                    Response::text(200, "ok\n")
                }
                None => Response::text(422, "unknown command\n"),
            }
        }
        (Method::Post, "/shot") => match state.store_screenshot(&req.body) {
            Ok(ScreenshotOutcome::Stored(path)) => Response::text(200, format!("{}\n", path.display())),
            Ok(ScreenshotOutcome::Discarded) => Response::text(200, "discarded\n"),
            Err(_) => Response::error(500),
        },
        _ => Response::error(404),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Simulation;

    fn state() -> SharedState {
        SharedState::new(Simulation::new(0.1, 1.0, 0.0).unwrap())
    }

    fn req(raw: &[u8]) -> Request {
        parse_request(raw).unwrap()
    }

    #[test]
    fn routes() {
        let state = state();
        let config = ServerConfig::default();
        let page = handle_request(&req(b"GET / HTTP/1.1\r\n\r\n"), &state, &config);
        assert_eq!((page.status, page.content_type), (200, "text/html; charset=utf-8"));
        assert_eq!(page.body, VIEWER_HTML);

        let snap = handle_request(&req(b"GET /simulation HTTP/1.1\r\n\r\n"), &state, &config);
        assert_eq!(snap.status, 200);
        assert_eq!(snap.body.len(), 104);

        let missing = handle_request(&req(b"GET /favicon.ico HTTP/1.1\r\n\r\n"), &state, &config);
        assert_eq!(missing.status, 404);
        let wrong_method = handle_request(&req(b"POST /simulation HTTP/1.1\r\n\r\n"), &state, &config);
        assert_eq!(wrong_method.status, 404);
    }

    #[test]
    fn commands() {
        let state = state();
        let config = ServerConfig::default();
        let ok = handle_request(
            &req(b"POST /cmd HTTP/1.1\r\nContent-Length: 5\r\n\r\npause"),
            &state,
            &config,
        );
        assert_eq!((ok.status, ok.body.as_slice()), (200, &b"ok\n"[..]));
        let bad = handle_request(
            &req(b"POST /cmd HTTP/1.1\r\nContent-Length: 4\r\n\r\njump"),
            &state,
            &config,
        );
        assert_eq!(bad.status, 422);
        let cmds = state.take_commands();
        assert_eq!(cmds, vec![Command::new(Verb::Pause, "unknown")]);
    }

    #[test]
    fn screenshot_storage_failure_is_500() {
        let dir = tempfile::tempdir().unwrap();
        let state = state();
        state.set_screenshot_dir(Some(dir.path().join("nope").join("nope")));
        let r = handle_request(
            &req(b"POST /shot HTTP/1.1\r\nContent-Length: 3\r\n\r\nabc"),
            &state,
            &ServerConfig::default(),
        );
        assert_eq!(r.status, 500);
    }

    #[test]
    fn viewer_override_path() {
        let dir = tempfile::tempdir().unwrap();
        let page = dir.path().join("v.html");
        std::fs::write(&page, "<p>dev</p>").unwrap();
        let state = state();
        let mut config = ServerConfig {
            viewer: ViewerSource::File(page),
            ..Default::default()
        };
        let r = handle_request(&req(b"GET / HTTP/1.1\r\n\r\n"), &state, &config);
        assert_eq!(r.body, b"<p>dev</p>");
        config.viewer = ViewerSource::File(dir.path().join("gone.html"));
        assert_eq!(
            handle_request(&req(b"GET / HTTP/1.1\r\n\r\n"), &state, &config).status,
            500
        );
    }

    #[test]
    fn responses_are_deterministic() {
        let state = state();
        let config = ServerConfig::default();
        let r = req(b"GET /simulation HTTP/1.1\r\n\r\n");
        assert_eq!(
            handle_request(&r, &state, &config).to_bytes(),
            handle_request(&r, &state, &config).to_bytes()
        );
    }
}
