//! Shared state between the integration loop and the server thread.
//!
//! The simulation sits behind one exclusive guard. It is held for exactly
//! one timestep, one snapshot encode, or one round of command application,
//! never across network I/O. Steering commands travel through a separate
//! FIFO so submitting one never waits on the physics.

use std::collections::VecDeque;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use parking_lot::{Mutex, MutexGuard};
use thiserror::Error;

use crate::sim::{SimError, Simulation};
use crate::snapshot::{encode_snapshot, ViewOverride};

/// Sleep between command polls while paused.
pub const IDLE_INTERVAL: Duration = Duration::from_millis(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verb {
    Pause,
    Resume,
    Step,
    Quit,
}

impl Verb {
    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Pause => "pause",
            Verb::Resume => "resume",
            Verb::Step => "step",
            Verb::Quit => "quit",
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown command `{0}`")]
pub struct UnknownVerb(pub String);

impl FromStr for Verb {
    type Err = UnknownVerb;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pause" => Ok(Verb::Pause),
            "resume" => Ok(Verb::Resume),
            "step" => Ok(Verb::Step),
            "quit" => Ok(Verb::Quit),
            other => Err(UnknownVerb(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Command {
    pub verb: Verb,
    /// Client address, kept for diagnostics.
    pub origin: String,
}

impl Command {
    pub fn new(verb: Verb, origin: impl Into<String>) -> Self {
        Command {
            verb,
            origin: origin.into(),
        }
    }
}

/// What the integration loop should do after a round of command application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopDirective {
    Advance,
    Idle,
    Quit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// Reached the requested end time.
    Finished,
    /// Stopped by a quit command or [`SharedState::request_quit`].
    Quit,
}

#[derive(Debug, PartialEq, Eq)]
pub enum ScreenshotOutcome {
    Stored(PathBuf),
    Discarded,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("view matrix entry {0} is not finite")]
pub struct NonFiniteView(pub usize);

#[derive(Debug, Default)]
struct ViewSlot {
    current: Option<ViewOverride>,
    last_seq: u64,
}

#[derive(Debug, Default)]
struct ScreenshotSink {
    dir: Option<PathBuf>,
    next: u64,
}

#[derive(Debug)]
pub struct SharedState {
    sim: Mutex<Simulation>,
    queue: Mutex<VecDeque<Command>>,
    view: Mutex<ViewSlot>,
    screenshots: Mutex<ScreenshotSink>,
    quit: AtomicBool,
}

impl SharedState {
    pub fn new(sim: Simulation) -> Self {
        SharedState {
            sim: Mutex::new(sim),
            queue: Mutex::new(VecDeque::new()),
            view: Mutex::new(ViewSlot::default()),
            screenshots: Mutex::new(ScreenshotSink::default()),
            quit: AtomicBool::new(false),
        }
    }

    /// Exclusive access to the simulation, e.g. to add particles between
    /// steps.
    pub fn lock(&self) -> MutexGuard<'_, Simulation> {
        self.sim.lock()
    }

    /// Encodes the current state under the guard. The bytes never reflect a
    /// half-applied timestep.
    pub fn capture_snapshot(&self) -> Vec<u8> {
        let sim = self.sim.lock();
        let view = self.view.lock().current;
        let bytes = encode_snapshot(&sim, view.as_ref());
        MutexGuard::unlock_fair(sim);
        bytes
    }

    pub fn submit_command(&self, cmd: Command) {
        self.queue.lock().push_back(cmd);
    }

    /// Removes and returns every queued command in arrival order.
    pub fn take_commands(&self) -> Vec<Command> {
        self.queue.lock().drain(..).collect()
    }

    pub fn request_quit(&self) {
        self.quit.store(true, Ordering::SeqCst);
    }

    pub fn quit_requested(&self) -> bool {
        self.quit.load(Ordering::SeqCst)
    }

    /// Applies queued commands in order to `sim`, which the caller holds
    /// through [`lock`](Self::lock).
    ///
    /// `step` advances one timestep only while paused; while running it
    /// adds nothing beyond the loop's regular step. Commands after a `quit`
    /// are dropped.
    pub fn drain_and_apply(&self, sim: &mut Simulation) -> Result<LoopDirective, SimError> {
        for cmd in self.take_commands() {
            match cmd.verb {
                Verb::Pause => sim.set_paused(true),
                Verb::Resume => sim.set_paused(false),
                Verb::Step => {
                    if sim.paused() {
                        sim.step()?;
                    }
                }
                Verb::Quit => {
                    self.request_quit();
                    return Ok(LoopDirective::Quit);
                }
            }
        }
        if self.quit_requested() {
            Ok(LoopDirective::Quit)
        } else if sim.paused() {
            Ok(LoopDirective::Idle)
        } else {
            Ok(LoopDirective::Advance)
        }
    }

    /// Integration loop: apply commands, then step, until `t_end` (if any)
    /// is reached or a quit arrives.
    pub fn run(&self, t_end: Option<f64>) -> Result<RunOutcome, SimError> {
        loop {
            let mut sim = self.sim.lock();
            match self.drain_and_apply(&mut sim)? {
                LoopDirective::Quit => return Ok(RunOutcome::Quit),
                LoopDirective::Idle => {
                    drop(sim);
                    std::thread::sleep(IDLE_INTERVAL);
                }
                LoopDirective::Advance => {
                    if t_end.is_some_and(|end| reached(sim.t(), sim.dt(), end)) {
                        return Ok(RunOutcome::Finished);
                    }
                    sim.step()?;
                    // Hand the guard to a waiting server thread, if any, so
                    // it cannot be starved by this loop re-locking at once.
                    MutexGuard::unlock_fair(sim);
                }
            }
        }
    }

    /// Installs a server-side camera. It persists in every snapshot until
    /// replaced or cleared.
    pub fn set_view_override(&self, matrix: [f32; 16]) -> Result<u64, NonFiniteView> {
        if let Some(i) = matrix.iter().position(|m| !m.is_finite()) {
            return Err(NonFiniteView(i));
        }
        let mut slot = self.view.lock();
        slot.last_seq += 1;
        slot.current = Some(ViewOverride {
            seq: slot.last_seq,
            matrix,
        });
        Ok(slot.last_seq)
    }

    /// Drops the current override. The sequence counter keeps counting, so
    /// a later override is still recognised as new.
    pub fn clear_view_override(&self) {
        self.view.lock().current = None;
    }

    pub fn view_override(&self) -> Option<ViewOverride> {
        self.view.lock().current
    }

    pub fn set_screenshot_dir(&self, dir: Option<PathBuf>) {
        self.screenshots.lock().dir = dir;
    }

    pub fn screenshot_dir(&self) -> Option<PathBuf> {
        self.screenshots.lock().dir.clone()
    }

    /// Writes `bytes` verbatim to `shot_NNNNNN.png` in the screenshot
    /// directory, or discards them when none is configured.
    pub fn store_screenshot(&self, bytes: &[u8]) -> io::Result<ScreenshotOutcome> {
        let mut sink = self.screenshots.lock();
        let Some(dir) = sink.dir.as_deref() else {
            return Ok(ScreenshotOutcome::Discarded);
        };
        let path = shot_path(dir, sink.next);
        std::fs::write(&path, bytes)?;
        sink.next += 1;
        Ok(ScreenshotOutcome::Stored(path))
    }
}

fn shot_path(dir: &Path, index: u64) -> PathBuf {
    dir.join(format!("shot_{index:06}.png"))
}

fn reached(t: f64, dt: f64, end: f64) -> bool {
    if dt > 0.0 {
        t >= end
    } else {
        t <= end
    }
}
