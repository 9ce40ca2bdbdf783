//! Moves the browser camera from the simulation side: zoom in, swing round
//! by 90 degrees, then leave the viewer alone. Each override is applied
//! once by the page, after which dragging works as usual.
//!
//!     cargo run --example view_override -- [port]

use std::sync::Arc;
use std::time::Duration;

use nbview::disk::{init_selfgravitating_disk, DiskParams};
use nbview::{start_server, ServerConfig, SharedState};

/// Column-major view matrix: rotate about y by `yaw`, then push the scene
/// `distance` units in front of the camera.
fn camera(yaw: f32, distance: f32) -> [f32; 16] {
    let (s, c) = yaw.sin_cos();
    [
        c, 0.0, -s, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        s, 0.0, c, 0.0, //
        0.0, 0.0, -distance, 1.0,
    ]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let state = Arc::new(SharedState::new(init_selfgravitating_disk(
        2000,
        &DiskParams::default(),
    )?));
    let server = start_server(
        Arc::clone(&state),
        ServerConfig {
            port,
            ..ServerConfig::default()
        },
    )?;
    println!("viewer at {}", server.url());
    let runner = {
        let state = Arc::clone(&state);
        std::thread::spawn(move || state.run(None))
    };

    let script = [(0.0, 12.0), (0.0, 5.0), (std::f32::consts::FRAC_PI_2, 5.0)];
    for (yaw, distance) in script {
        std::thread::sleep(Duration::from_secs(1));
        let seq = state.set_view_override(camera(yaw, distance))?;
        println!("override {seq}: yaw {yaw:.2} rad, distance {distance}");
    }
    // Yield control: the last override stays in the snapshots but the
    // page has already applied it and will not jump back.
    std::thread::sleep(Duration::from_secs(1));
    state.request_quit();
    runner.join().unwrap()?;
    Ok(())
}
