//! Screenshot capture: the viewer posts PNG bytes to `/shot` and the server
//! numbers them in the chosen directory. Here a scripted client stands in
//! for the browser.
//!
//!     cargo run --example screenshot_recording -- [dir]

use std::sync::Arc;

use nbview::disk::{init_selfgravitating_disk, DiskParams};
use nbview::httpd::client;
use nbview::{start_server, ServerConfig, SharedState};

// A 1x1 transparent PNG.
const PIXEL: &[u8] = &[
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00,
    0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1f, 0x15, 0xc4, 0x89, 0x00, 0x00, 0x00, 0x0d, 0x49,
    0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x00, 0x01, 0x00, 0x00, 0x05, 0x00, 0x01, 0x0d, 0x0a, 0x2d, 0xb4, 0x00, 0x00,
    0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "shots".into());
    std::fs::create_dir_all(&dir)?;
    let state = Arc::new(SharedState::new(init_selfgravitating_disk(
        100,
        &DiskParams::default(),
    )?));
    let config = ServerConfig {
        screenshot_dir: Some(dir.into()),
        ..ServerConfig::ephemeral()
    };
    let server = start_server(Arc::clone(&state), config)?;

    for _ in 0..3 {
        state.lock().step()?;
        let reply = client::post(server.local_addr(), "/shot", PIXEL)?;
        print!("stored {}", String::from_utf8_lossy(&reply.body));
    }

    // Without a directory the upload is accepted and dropped.
    state.set_screenshot_dir(None);
    let reply = client::post(server.local_addr(), "/shot", PIXEL)?;
    print!("no directory: {}", String::from_utf8_lossy(&reply.body));
    Ok(())
}
