//! Runtime of the disk demo with nobody watching versus with a viewer
//! polling every few milliseconds.
//!
//!     cargo run --release --example overhead_bench -- [n] [t_end] [poll_ms]

use nbview::bench::{compare, report};
use nbview::disk::DiskParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(1000), |s| s.parse())?;
    let t_end: f64 = args.next().map_or(Ok(2.0), |s| s.parse())?;
    let poll_ms: f64 = args.next().map_or(Ok(10.0), |s| s.parse())?;

    let results = compare(n, t_end, poll_ms, &DiskParams::default())?;
    print!("{}", report(&results));
    Ok(())
}
