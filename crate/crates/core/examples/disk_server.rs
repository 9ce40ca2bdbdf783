//! The disk demo with the browser viewer: open the printed URL, drag to
//! rotate, scroll to zoom, space to pause.
//!
//!     cargo run --example disk_server -- [n] [port]

use std::sync::Arc;

use nbview::disk::{init_selfgravitating_disk, DiskParams};
use nbview::{start_server, ServerConfig, SharedState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(2000), |s| s.parse())?;
    let port: u16 = args.next().map_or(Ok(1234), |s| s.parse())?;

    let state = Arc::new(SharedState::new(init_selfgravitating_disk(n, &DiskParams::default())?));
    let config = ServerConfig {
        port,
        ..ServerConfig::default()
    };
    let server = start_server(Arc::clone(&state), config)?;
    println!("viewer at {}  (press q in the page to stop)", server.url());

    state.run(None)?;
    let sim = state.lock();
    println!("stopped at t={:.3} after {} steps", sim.t(), sim.step_count());
    Ok(())
}
