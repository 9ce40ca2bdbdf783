use std::io::{self, ErrorKind, Read};
use std::net::{IpAddr, Ipv4Addr, Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::request::{find_head_end, parse_head, ParseError, MAX_HEAD};
use super::response::Response;
use super::{handle_request, ServerConfig};
use crate::steering::SharedState;

const IO_TIMEOUT: Duration = Duration::from_secs(5);

/// A running server. Dropping the handle stops it.
#[derive(Debug)]
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    pub fn url(&self) -> String {
        format!("http://{}/", self.addr)
    }

    /// Closes the listener and joins the server thread. A request already
    /// being served is finished first. Calling this twice is a no-op.
    pub fn stop(&mut self) {
        let Some(thread) = self.thread.take() else {
            return;
        };
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let mut wake = self.addr;
        if wake.ip().is_unspecified() {
            wake.set_ip(IpAddr::V4(Ipv4Addr::LOCALHOST));
        }
        let _ = TcpStream::connect_timeout(&wake, Duration::from_millis(500));
        let _ = thread.join();
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Binds the listener synchronously, then serves connections one at a time
/// on a dedicated thread.
pub fn start_server(state: Arc<SharedState>, config: ServerConfig) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind((config.bind, config.port))?;
    let addr = listener.local_addr()?;
    if config.screenshot_dir.is_some() {
        state.set_screenshot_dir(config.screenshot_dir.clone());
    }
    let stop = Arc::new(AtomicBool::new(false));
    let thread = {
        let stop = Arc::clone(&stop);
        std::thread::Builder::new()
            .name("nbview-httpd".into())
            .spawn(move || accept_loop(listener, &state, &config, &stop))?
    };
    Ok(ServerHandle {
        addr,
        stop,
        thread: Some(thread),
    })
}

fn accept_loop(listener: TcpListener, state: &SharedState, config: &ServerConfig, stop: &AtomicBool) {
    for conn in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        match conn {
            Ok(stream) => {
                // Per-connection failures (resets, timeouts) only affect that client.
                let _ = serve_connection(stream, state, config);
            }
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(_) => std::thread::sleep(Duration::from_millis(10)),
        }
    }
}

fn serve_connection(mut stream: TcpStream, state: &SharedState, config: &ServerConfig) -> io::Result<()> {
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    stream.set_write_timeout(Some(IO_TIMEOUT))?;
    stream.set_nodelay(true)?;
    let peer = stream.peer_addr().map(|a| a.to_string()).ok();

    let response = match read_request(&mut stream) {
        Ok(Some(mut req)) => {
            req.peer = peer;
            handle_request(&req, state, config)
        }
        // Connection opened and closed without a byte, e.g. the shutdown wake-up.
        Ok(None) => return Ok(()),
        Err(ReadError::Parse(e)) => Response::error(e.status()),
        Err(ReadError::Io(e)) => return Err(e),
    };
    response.write_to(&mut stream)?;
    let _ = stream.shutdown(Shutdown::Write);
    Ok(())
}

enum ReadError {
    Parse(ParseError),
    Io(io::Error),
}

impl From<io::Error> for ReadError {
    fn from(e: io::Error) -> Self {
        ReadError::Io(e)
    }
}

fn read_request(stream: &mut TcpStream) -> Result<Option<super::Request>, ReadError> {
    let mut buf = Vec::with_capacity(1024);
    let mut chunk = [0u8; 8192];
    let head_end = loop {
        let scan_from = buf.len().saturating_sub(3);
        let n = stream.read(&mut chunk)?;
        if n == 0 {
            if buf.is_empty() {
                return Ok(None);
            }
            return Err(ReadError::Parse(ParseError::Malformed("connection closed mid-header")));
        }
        buf.extend_from_slice(&chunk[..n]);
        if let Some(end) = find_head_end(&buf[scan_from..]) {
            break scan_from + end;
        }
        if buf.len() > MAX_HEAD {
            return Err(ReadError::Parse(ParseError::Malformed("header too large")));
        }
    };

    let head = parse_head(&buf[..head_end]).map_err(ReadError::Parse)?;
    let mut body = buf.split_off(head_end);
    body.truncate(head.content_length);
    if body.len() < head.content_length {
        let missing = head.content_length - body.len();
        let start = body.len();
        body.resize(head.content_length, 0);
        stream.read_exact(&mut body[start..start + missing]).map_err(|e| {
            if e.kind() == ErrorKind::UnexpectedEof {
                ReadError::Parse(ParseError::Malformed("truncated body"))
            } else {
                ReadError::Io(e)
            }
        })?;
    }
    Ok(Some(head.with_body(body)))
}
