//! Runtime with and without live serving.
//!
//! A headless run integrates the disk scenario with nobody watching. A
//! hybrid run does the same with the server up and a scripted poller that
//! fetches `/simulation`, sleeps for the poll interval and repeats, the way
//! the browser viewer does. Browser frame rates depend on the client
//! machine, so frames served per second stand in for them.

use std::fmt::Write as _;
use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::disk::{init_selfgravitating_disk, DiskParams};
use crate::httpd::{client, start_server, ServerConfig};
use crate::sim::SimError;
use crate::snapshot::snapshot_size;
use crate::steering::SharedState;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("poller: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    Headless,
    Hybrid,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Headless => "headless",
            Mode::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub mode: Mode,
    /// Disk particles, not counting the central mass.
    pub n: usize,
    pub sim_time_units: f64,
    pub wall_seconds: f64,
    pub frames_served: u64,
    pub bytes_served: u64,
    pub step_count: u64,
}

impl BenchResult {
    pub fn frames_per_second(&self) -> Option<f64> {
        (self.mode == Mode::Hybrid).then(|| self.frames_served as f64 / self.wall_seconds)
    }

    pub fn megabytes_per_second(&self) -> Option<f64> {
        (self.mode == Mode::Hybrid).then(|| self.bytes_served as f64 / 1e6 / self.wall_seconds)
    }
}

pub fn run_headless(n: usize, t_end: f64) -> Result<BenchResult, BenchError> {
    run_headless_with(n, t_end, &DiskParams::default())
}

pub fn run_headless_with(n: usize, t_end: f64, params: &DiskParams) -> Result<BenchResult, BenchError> {
    let start = Instant::now();
    let state = SharedState::new(init_selfgravitating_disk(n, params)?);
    state.run(Some(t_end))?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let step_count = state.lock().step_count();
    Ok(BenchResult {
        mode: Mode::Headless,
        n,
        sim_time_units: t_end,
        wall_seconds,
        frames_served: 0,
        bytes_served: 0,
        step_count,
    })
}

pub fn run_hybrid(n: usize, t_end: f64, poll_interval_ms: f64) -> Result<BenchResult, BenchError> {
    run_hybrid_with(n, t_end, poll_interval_ms, &DiskParams::default())
}

/// Like [`run_headless_with`] but serving snapshots to a poller thread. The
/// poller fetches at least one frame even when the integration is empty.
pub fn run_hybrid_with(
    n: usize,
    t_end: f64,
    poll_interval_ms: f64,
    params: &DiskParams,
) -> Result<BenchResult, BenchError> {
    let start = Instant::now();
    let state = Arc::new(SharedState::new(init_selfgravitating_disk(n, params)?));
    let mut server = start_server(Arc::clone(&state), ServerConfig::ephemeral())?;

    let done = Arc::new(AtomicBool::new(false));
    let poller = {
        let done = Arc::clone(&done);
        let addr = server.local_addr();
        let frame_len = snapshot_size(n + 1, false);
        let interval = Duration::from_secs_f64(poll_interval_ms.max(0.0) / 1e3);
        std::thread::spawn(move || poll(addr, frame_len, interval, &done))
    };

    let outcome = state.run(Some(t_end));
    let wall_seconds = start.elapsed().as_secs_f64();
    done.store(true, Ordering::SeqCst);
    let polled = poller.join().expect("poller thread panicked");
    server.stop();
    outcome?;
    let (frames_served, bytes_served) = polled?;

    let step_count = state.lock().step_count();
    Ok(BenchResult {
        mode: Mode::Hybrid,
        n,
        sim_time_units: t_end,
        wall_seconds,
        frames_served,
        bytes_served,
        step_count,
    })
}

fn poll(addr: SocketAddr, frame_len: usize, interval: Duration, done: &AtomicBool) -> Result<(u64, u64), BenchError> {
    let (mut frames, mut bytes) = (0u64, 0u64);
    while frames == 0 || !done.load(Ordering::SeqCst) {
        let resp = client::get(addr, "/simulation")?;
        if resp.status != 200 {
            return Err(BenchError::Protocol(format!("status {}", resp.status)));
        }
        if resp.body.len() != frame_len {
            return Err(BenchError::Protocol(format!(
                "frame of {} bytes, expected {frame_len}",
                resp.body.len()
            )));
        }
        frames += 1;
        bytes += resp.body.len() as u64;
        std::thread::sleep(interval);
    }
    Ok((frames, bytes))
}

/// One short discarded warm-up, then headless, then hybrid.
pub fn compare(
    n: usize,
    t_end: f64,
    poll_interval_ms: f64,
    params: &DiskParams,
) -> Result<Vec<BenchResult>, BenchError> {
    let warm_up = (20.0 * params.dt).min(t_end);
    run_headless_with(n, warm_up, params)?;
    let headless = run_headless_with(n, t_end, params)?;
    let hybrid = run_hybrid_with(n, t_end, poll_interval_ms, params)?;
    Ok(vec![headless, hybrid])
}

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.decimals$}"))
}

fn sorted(results: &[BenchResult]) -> Vec<&BenchResult> {
    let mut rows: Vec<_> = results.iter().collect();
    rows.sort_by_key(|r| (r.n, r.mode));
    rows
}

/// Hybrid wall time over the headless wall time at the same `n`.
pub fn overhead_ratio(results: &[BenchResult], row: &BenchResult) -> Option<f64> {
    results
        .iter()
        .find(|r| r.mode == Mode::Headless && r.n == row.n)
        .map(|base| row.wall_seconds / base.wall_seconds)
}

/// Fixed-width table, rows ordered by `n` then mode.
pub fn report(results: &[BenchResult]) -> String {
    let mut out = format!(
        "{:<10}{:>10}{:>12}{:>10}{:>12}{:>10}{:>10}\n",
        "mode", "n", "wall_s", "frames", "frames/s", "MB/s", "overhead"
    );
    for r in sorted(results) {
        let _ = writeln!(
            out,
            "{:<10}{:>10}{:>12.3}{:>10}{:>12}{:>10}{:>10}",
            r.mode.as_str(),
            r.n,
            r.wall_seconds,
            r.frames_served,
            fmt_opt(r.frames_per_second(), 2),
            fmt_opt(r.megabytes_per_second(), 2),
            fmt_opt(overhead_ratio(results, r), 3),
        );
    }
    out
}

/// The same rows as `key=value` lines for scripts.
pub fn report_kv(results: &[BenchResult]) -> String {
    let mut out = String::new();
    for r in sorted(results) {
        let _ = writeln!(
            out,
            "mode={} n={} t_end={} wall_s={:.6} frames={} bytes={} steps={} overhead={}",
            r.mode.as_str(),
            r.n,
            r.sim_time_units,
            r.wall_seconds,
            r.frames_served,
            r.bytes_served,
            r.step_count,
            fmt_opt(overhead_ratio(results, r), 3),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mode: Mode, n: usize, wall: f64, frames: u64) -> BenchResult {
        BenchResult {
            mode,
            n,
            sim_time_units: 1.0,
            wall_seconds: wall,
            frames_served: frames,
            bytes_served: frames * 1000,
            step_count: 10,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let table = report(&[]);
        assert_eq!(table.lines().count(), 1);
        assert!(table.starts_with("mode"));
    }

    #[test]
    fn headless_row_has_no_rates() {
        let table = report(&[row(Mode::Headless, 100, 2.0, 0)]);
        let line = table.lines().nth(1).unwrap();
        let cols: Vec<_> = line.split_whitespace().collect();
        assert_eq!(cols, ["headless", "100", "2.000", "0", "n/a", "n/a", "1.000"]);
    }

    #[test]
    fn overhead_column() {
        let rows = [row(Mode::Hybrid, 100, 2.2, 50), row(Mode::Headless, 100, 2.0, 0)];
        let table = report(&rows);
        let lines: Vec<_> = table.lines().collect();
        assert!(lines[1].starts_with("headless"));
        let hybrid: Vec<_> = lines[2].split_whitespace().collect();
        // 2.2 / 2.0
        assert_eq!(hybrid, ["hybrid", "100", "2.200", "50", "22.73", "0.02", "1.100"]);
    }

    #[test]
    fn hybrid_without_baseline() {
        let table = report(&[row(Mode::Hybrid, 7, 1.0, 3)]);
        assert!(table.lines().nth(1).unwrap().ends_with("n/a"));
    }

    #[test]
    fn kv_lines() {
        let kv = report_kv(&[row(Mode::Headless, 5, 1.5, 0)]);
        assert_eq!(
            kv,
            "mode=headless n=5 t_end=1 wall_s=1.500000 frames=0 bytes=0 steps=10 overhead=1.000\n"
        );
    }

    #[test]
    fn headless_tiny_run() {
        let r = run_headless(16, 0.0).unwrap();
        assert_eq!(r.frames_served, 0);
        assert_eq!(r.step_count, 0);
        assert!(r.wall_seconds > 0.0);
        let again = run_headless(16, 0.5).unwrap();
        assert_eq!(again.step_count, run_headless(16, 0.5).unwrap().step_count);
    }

    #[test]
    fn hybrid_accounting() {
        let r = run_hybrid(64, 0.5, 1.0).unwrap();
        assert!(r.frames_served >= 1);
        assert_eq!(r.bytes_served, r.frames_served * snapshot_size(65, false) as u64);
        assert_eq!(r.step_count, run_headless(64, 0.5).unwrap().step_count);
    }
}
