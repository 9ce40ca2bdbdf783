//! Encodes a small disk to the snapshot wire format, writes it to a file,
//! reads it back and prints what came through.
//!
//!     cargo run --example snapshot_codec -- [n] [out.bin]

use nbview::disk::{init_selfgravitating_disk, DiskParams};
use nbview::{decode_snapshot, encode_snapshot, snapshot_size, ViewOverride};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(8), |s| s.parse())?;
    let out = args.next().unwrap_or_else(|| "snapshot.bin".into());

    let mut sim = init_selfgravitating_disk(n, &DiskParams::default())?;
    for _ in 0..10 {
        sim.step()?;
    }
    let view = ViewOverride {
        seq: 1,
        matrix: ViewOverride::IDENTITY,
    };
    let bytes = encode_snapshot(&sim, Some(&view));
    assert_eq!(bytes.len(), snapshot_size(sim.len(), true));
    std::fs::write(&out, &bytes)?;
    println!("wrote {} bytes to {out}", bytes.len());

    let snap = decode_snapshot(&std::fs::read(&out)?)?;
    let h = &snap.header;
    println!(
        "t={} dt={} G={} eps={} steps={} N={}",
        h.t, h.dt, h.g, h.softening, h.step_count, h.n
    );
    for p in snap.particles.iter().take(4) {
        println!("  m={:<8} x={:?}", p.mass, p.position);
    }
    assert_eq!(snap.to_simulation()?, sim);
    println!("decoded state is bit-identical to the original");

    println!("\nframe sizes:");
    for n in [0, 1, 3, 10_000, 100_001] {
        println!("  N={n:<7} {:>9} bytes", snapshot_size(n, false));
    }
    Ok(())
}
