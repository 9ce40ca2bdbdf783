//! Real-time N-body simulation with a built-in web viewer.
//!
//! The simulation runs natively while a small HTTP server on its own thread
//! hands out binary snapshots of the full state to a browser page that
//! renders them with WebGL. The page can pause, resume, single-step or quit
//! the run, upload screenshots, and follow camera overrides pushed by the
//! server.
//!
//! - [`sim`]: direct-summation gravity and a leapfrog integrator
//! - [`disk`]: the self-gravitating disk scenario
//! - [`snapshot`]: the wire format
//! - [`steering`]: state shared between integrator and server
//! - [`httpd`]: the server, plus a tiny client for scripts and tests
//! - [`bench`]: runtime overhead of live serving
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bench;
pub mod cli;
pub mod disk;
pub mod httpd;
pub mod sim;
pub mod snapshot;
pub mod steering;

pub use disk::{init_selfgravitating_disk, DiskParams};
pub use httpd::{start_server, ServerConfig, ServerHandle};
pub use sim::{Particle, SimError, Simulation};
pub use snapshot::{decode_snapshot, encode_snapshot, snapshot_size, Snapshot, ViewOverride};
pub use steering::{Command, SharedState, Verb};
