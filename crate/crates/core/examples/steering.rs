//! Drives a running simulation over HTTP the way the viewer does: pause,
//! single-step, resume and quit, reading the state back after each.
//!
//!     cargo run --example steering

use std::sync::Arc;
use std::time::Duration;

use nbview::disk::{init_selfgravitating_disk, DiskParams};
use nbview::httpd::client;
use nbview::{decode_snapshot, start_server, ServerConfig, SharedState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let state = Arc::new(SharedState::new(init_selfgravitating_disk(
        500,
        &DiskParams::default(),
    )?));
    let server = start_server(Arc::clone(&state), ServerConfig::ephemeral())?;
    let addr = server.local_addr();
    let runner = {
        let state = Arc::clone(&state);
        std::thread::spawn(move || state.run(None))
    };

    let show = |label: &str| -> Result<(), Box<dyn std::error::Error>> {
        let snap = decode_snapshot(&client::get(addr, "/simulation")?.body)?;
        let h = snap.header;
        println!(
            "{label:<16} step {:>5}  t={:.4}  paused={}",
            h.step_count,
            h.t,
            h.paused()
        );
        Ok(())
    };

    std::thread::sleep(Duration::from_millis(200));
    show("running")?;
    client::post(addr, "/cmd", b"pause")?;
    std::thread::sleep(Duration::from_millis(50));
    show("paused")?;
    std::thread::sleep(Duration::from_millis(200));
    show("still paused")?;
    for _ in 0..3 {
        client::post(addr, "/cmd", b"step")?;
    }
    std::thread::sleep(Duration::from_millis(50));
    show("after 3 steps")?;
    client::post(addr, "/cmd", b"resume")?;
    std::thread::sleep(Duration::from_millis(200));
    show("resumed")?;
    let reply = client::post(addr, "/cmd", b"warp")?;
    println!(
        "unknown verb -> {} {}",
        reply.status,
        String::from_utf8_lossy(&reply.body).trim()
    );
    client::post(addr, "/cmd", b"quit")?;
    println!("run loop ended: {:?}", runner.join().unwrap()?);
    Ok(())
}
