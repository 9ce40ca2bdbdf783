//! `nbview run` and `nbview bench`.

use std::ffi::OsString;
use std::io::Write;
use std::net::IpAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::bench;
use crate::disk::{init_selfgravitating_disk, DiskParams, DEFAULT_DT, DEFAULT_SEED};
use crate::httpd::{start_server, ServerConfig, ViewerSource, DEFAULT_PORT};
use crate::steering::SharedState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nbview", version, about = "N-body simulation with a live browser viewer")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run a scenario and serve it to the browser.
    Run(RunArgs),
    /// Compare runtime without and with live serving.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scenario {
    /// Self-gravitating disk around a central mass.
    Disk,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(value_enum)]
    scenario: Scenario,
    /// Number of disk particles.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Stop at this code time; runs until a quit command otherwise.
    #[arg(long, value_parser = non_negative)]
    t_end: Option<f64>,
    #[arg(long, env = "NBV_PORT", default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Save screenshots posted by the viewer here.
    #[arg(long)]
    screenshot_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_DT, value_parser = positive)]
    dt: f64,
    /// Serve the viewer page from this file instead of the built-in one.
    #[arg(long)]
    viewer: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 10.0, value_parser = non_negative)]
    t_end: f64,
    #[arg(long, default_value_t = 10.0, value_parser = non_negative)]
    poll_ms: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also print key=value lines.
    #[arg(long)]
    kv: bool,
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    parse_finite(s).and_then(|v| if v >= 0.0 { Ok(v) } else { Err("must be >= 0".into()) })
}

fn positive(s: &str) -> Result<f64, String> {
    parse_finite(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err("must be > 0".into()) })
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            // Value errors come without a usage line; always show one.
            if !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return EXIT_USAGE;
        }
    };
    match cli.command {
        Cmd::Run(args) => run(args),
        Cmd::Bench(args) => run_bench(args),
    }
}

fn run(args: RunArgs) -> i32 {
    let Scenario::Disk = args.scenario;
    let params = DiskParams {
        seed: args.seed,
        dt: args.dt,
        ..DiskParams::default()
    };
    let sim = match init_selfgravitating_disk(args.n as usize, &params) {
        Ok(sim) => sim,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    let state = Arc::new(SharedState::new(sim));
    let config = ServerConfig {
        bind: args.bind,
        port: args.port,
        screenshot_dir: args.screenshot_dir,
        viewer: args.viewer.map_or(ViewerSource::Embedded, ViewerSource::File),
    };
    let mut server = match start_server(Arc::clone(&state), config) {
        Ok(server) => server,
        Err(e) => {
            eprintln!("error: cannot listen on {}:{}: {e}", args.bind, args.port);
            return EXIT_FAILURE;
        }
    };
    println!("{}", server.url());
    let _ = std::io::stdout().flush();

    let outcome = state.run(args.t_end);
    server.stop();
    match outcome {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn run_bench(args: BenchArgs) -> i32 {
    let params = DiskParams {
        seed: args.seed,
        ..DiskParams::default()
    };
    match bench::compare(args.n as usize, args.t_end, args.poll_ms, &params) {
        Ok(results) => {
            print!("{}", bench::report(&results));
            if args.kv {
                print!("{}", bench::report_kv(&results));
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
