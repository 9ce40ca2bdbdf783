//! Binary snapshot format.
//!
//! ```text
//! "NBVSNAP1"                     8 bytes magic
//! version                        u32 LE (= 1)
//! block*                         type u32 LE, length u64 LE, payload
//! ```
//!
//! | type | block      | payload                                              |
//! |------|------------|------------------------------------------------------|
//! | 0    | END        | empty; terminates the stream                         |
//! | 1    | SIM_HEADER | t, dt, G, softening (f64); step_count, N, flags (u64)|
//! | 2    | PARTICLES  | N × (mass, radius, x, y, z, vx, vy, vz) as f64       |
//! | 3    | VIEW       | seq (u64), 16 × f32 column-major view matrix         |
//!
//! Everything is little-endian. Blocks of unknown type are skipped by their
//! declared length. The encoder always writes header, particles, the
//! optional view and END, in that order.

use thiserror::Error;

use crate::sim::{Particle, SimError, Simulation};

pub const MAGIC: [u8; 8] = *b"NBVSNAP1";
pub const VERSION: u32 = 1;

pub const BLOCK_END: u32 = 0;
pub const BLOCK_SIM_HEADER: u32 = 1;
pub const BLOCK_PARTICLES: u32 = 2;
pub const BLOCK_VIEW: u32 = 3;

const PREAMBLE_LEN: usize = 12;
const BLOCK_HEADER_LEN: usize = 12;
const SIM_HEADER_LEN: usize = 56;
pub const PARTICLE_RECORD_LEN: usize = 64;
const VIEW_LEN: usize = 72;

/// Flag bit set in [`SimHeader::flags`] while the simulation is paused.
pub const FLAG_PAUSED: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated stream at offset {0}")]
    Truncated(usize),
    #[error("block type {block} has length {len}, expected {expected}")]
    BadBlockLength { block: u32, len: u64, expected: u64 },
    #[error("duplicate block type {0}")]
    DuplicateBlock(u32),
    #[error("missing block type {0}")]
    MissingBlock(u32),
    #[error("header declares {header} particles but block holds {records}")]
    CountMismatch { header: u64, records: u64 },
    #[error("stream ended without END block")]
    MissingEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewOverride {
    pub seq: u64,
    /// Column-major 4×4 view matrix.
    pub matrix: [f32; 16],
}

impl ViewOverride {
    pub const IDENTITY: [f32; 16] = [
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimHeader {
    pub t: f64,
    pub dt: f64,
    pub g: f64,
    pub softening: f64,
    pub step_count: u64,
    pub n: u64,
    pub flags: u64,
}

impl SimHeader {
    pub fn of(sim: &Simulation) -> Self {
        SimHeader {
            t: sim.t(),
            dt: sim.dt(),
            g: sim.g(),
            softening: sim.softening(),
            step_count: sim.step_count(),
            n: sim.len() as u64,
            flags: if sim.paused() { FLAG_PAUSED } else { 0 },
        }
    }

    pub fn paused(&self) -> bool {
        self.flags & FLAG_PAUSED != 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub version: u32,
    pub header: SimHeader,
    pub particles: Vec<Particle>,
    pub view: Option<ViewOverride>,
}

impl Snapshot {
    pub fn of(sim: &Simulation, view: Option<ViewOverride>) -> Self {
        Snapshot {
            version: VERSION,
            header: SimHeader::of(sim),
            particles: sim.particles().to_vec(),
            view,
        }
    }

    /// Whether the header particle count matches the records carried.
    pub fn is_consistent(&self) -> bool {
        self.header.n == self.particles.len() as u64
    }

    /// Rebuilds a simulation from the header and particle records.
    pub fn to_simulation(&self) -> Result<Simulation, SimError> {
        let h = &self.header;
        let mut sim = Simulation::new(h.dt.abs(), h.g, h.softening)?.with_clock(h.t, h.step_count)?;
        sim.set_dt(h.dt)?;
        sim.set_paused(h.paused());
        for p in &self.particles {
            sim.add(*p)?;
        }
        Ok(sim)
    }

    pub fn encode(&self) -> Vec<u8> {
        write_snapshot(&self.header, &self.particles, self.view.as_ref())
    }
}

/// Encoded length of a snapshot with `n` particles.
pub const fn snapshot_size(n: usize, has_view: bool) -> usize {
    let base = PREAMBLE_LEN
        + (BLOCK_HEADER_LEN + SIM_HEADER_LEN)
        + BLOCK_HEADER_LEN
        + PARTICLE_RECORD_LEN * n
        + BLOCK_HEADER_LEN;
    if has_view {
        base + BLOCK_HEADER_LEN + VIEW_LEN
    } else {
        base
    }
}

pub fn encode_snapshot(sim: &Simulation, view: Option<&ViewOverride>) -> Vec<u8> {
    write_snapshot(&SimHeader::of(sim), sim.particles(), view)
}

fn block_header(out: &mut Vec<u8>, kind: u32, len: usize) {
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&(len as u64).to_le_bytes());
}

fn write_snapshot(header: &SimHeader, particles: &[Particle], view: Option<&ViewOverride>) -> Vec<u8> {
    let mut out = Vec::with_capacity(snapshot_size(particles.len(), view.is_some()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());

    block_header(&mut out, BLOCK_SIM_HEADER, SIM_HEADER_LEN);
    for v in [header.t, header.dt, header.g, header.softening] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [header.step_count, header.n, header.flags] {
        out.extend_from_slice(&v.to_le_bytes());
    }

    block_header(&mut out, BLOCK_PARTICLES, PARTICLE_RECORD_LEN * particles.len());
    for p in particles {
        let fields = [p.mass, p.radius].into_iter().chain(p.position).chain(p.velocity);
        for v in fields {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    if let Some(view) = view {
        block_header(&mut out, BLOCK_VIEW, VIEW_LEN);
        out.extend_from_slice(&view.seq.to_le_bytes());
        for v in view.matrix {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    block_header(&mut out, BLOCK_END, 0);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&end| end <= self.bytes.len())
            .ok_or(FormatError::Truncated(self.pos))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn f64_at(b: &[u8], i: usize) -> f64 {
    f64::from_le_bytes(b[8 * i..8 * i + 8].try_into().unwrap())
}

fn u64_at(b: &[u8], i: usize) -> u64 {
    u64::from_le_bytes(b[8 * i..8 * i + 8].try_into().unwrap())
}

fn expect_len(block: u32, len: u64, expected: usize) -> Result<(), FormatError> {
    if len != expected as u64 {
        return Err(FormatError::BadBlockLength {
            block,
            len,
            expected: expected as u64,
        });
    }
    Ok(())
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot, FormatError> {
    if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let mut cur = Cursor {
        bytes,
        pos: MAGIC.len(),
    };
    let version = cur.u32()?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }

    let mut header = None;
    let mut particles: Option<Vec<Particle>> = None;
    let mut view = None;

    loop {
        if cur.pos == bytes.len() {
            return Err(FormatError::MissingEnd);
        }
        let kind = cur.u32()?;
        let len = cur.u64()?;
        let payload = cur.take(usize::try_from(len).map_err(|_| FormatError::Truncated(cur.pos))?)?;
        match kind {
            BLOCK_END => {
                expect_len(kind, len, 0)?;
                break;
            }
            BLOCK_SIM_HEADER => {
                expect_len(kind, len, SIM_HEADER_LEN)?;
                if header.is_some() {
                    return Err(FormatError::DuplicateBlock(kind));
                }
                header = Some(SimHeader {
                    t: f64_at(payload, 0),
                    dt: f64_at(payload, 1),
                    g: f64_at(payload, 2),
                    softening: f64_at(payload, 3),
                    step_count: u64_at(payload, 4),
                    n: u64_at(payload, 5),
                    flags: u64_at(payload, 6),
                });
            }
            BLOCK_PARTICLES => {
                if len % PARTICLE_RECORD_LEN as u64 != 0 {
                    return Err(FormatError::BadBlockLength {
                        block: kind,
                        len,
                        expected: len - len % PARTICLE_RECORD_LEN as u64,
                    });
                }
                if particles.is_some() {
                    return Err(FormatError::DuplicateBlock(kind));
                }
                let records = payload
                    .chunks_exact(PARTICLE_RECORD_LEN)
                    .map(|r| Particle {
                        mass: f64_at(r, 0),
                        radius: f64_at(r, 1),
                        position: [f64_at(r, 2), f64_at(r, 3), f64_at(r, 4)],
                        velocity: [f64_at(r, 5), f64_at(r, 6), f64_at(r, 7)],
                    })
                    .collect();
                particles = Some(records);
            }
            BLOCK_VIEW => {
                expect_len(kind, len, VIEW_LEN)?;
                if view.is_some() {
                    return Err(FormatError::DuplicateBlock(kind));
                }
                let mut matrix = [0f32; 16];
                for (k, m) in matrix.iter_mut().enumerate() {
                    let at = 8 + 4 * k;
                    *m = f32::from_le_bytes(payload[at..at + 4].try_into().unwrap());
                }
                view = Some(ViewOverride {
                    seq: u64_at(payload, 0),
                    matrix,
                });
            }
            _ => {}
        }
    }

    let header = header.ok_or(FormatError::MissingBlock(BLOCK_SIM_HEADER))?;
    let particles = particles.ok_or(FormatError::MissingBlock(BLOCK_PARTICLES))?;
    if header.n != particles.len() as u64 {
        return Err(FormatError::CountMismatch {
            header: header.n,
            records: particles.len() as u64,
        });
    }
    Ok(Snapshot {
        version,
        header,
        particles,
        view,
    })
}
