//! Direct-summation gravitational N-body dynamics.
//!
//! Forces are summed over every unordered pair with Plummer softening and
//! integrated with a kick-drift-kick leapfrog. Each pair contributes an
//! equal and opposite impulse to both particles, so total momentum is
//! conserved to rounding.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

pub type Vec3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid parameter `{name}`: {value} ({reason})")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid particle: {0}")]
    Particle(&'static str),
    #[error("particles {0} and {1} coincide with zero softening")]
    Singular(usize, usize),
    #[error("acceleration overflowed")]
    Overflow,
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), SimError> {
    if ok {
        Ok(())
    } else {
        Err(SimError::Parameter { name, value, reason })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Particle {
    pub mass: f64,
    /// Display size only; plays no role in the dynamics.
    pub radius: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl Particle {
    pub fn new(mass: f64, radius: f64, position: Vec3, velocity: Vec3) -> Result<Self, SimError> {
        let p = Particle {
            mass,
            radius,
            position,
            velocity,
        };
        p.validate()?;
        Ok(p)
    }

    /// A point mass at rest at `position`.
    pub fn at_rest(mass: f64, position: Vec3) -> Result<Self, SimError> {
        Self::new(mass, 0.0, position, [0.0; 3])
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let finite = self.mass.is_finite()
            && self.radius.is_finite()
            && self.position.iter().chain(&self.velocity).all(|c| c.is_finite());
        if !finite {
            return Err(SimError::Particle("non-finite component"));
        }
        if self.mass < 0.0 {
            return Err(SimError::Particle("negative mass"));
        }
        if self.radius < 0.0 {
            return Err(SimError::Particle("negative radius"));
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct Simulation {
    particles: Vec<Particle>,
    t: f64,
    dt: f64,
    g: f64,
    softening: f64,
    step_count: u64,
    paused: bool,
    /// Accelerations at the current positions, left over from the closing
    /// kick of the previous step.
    cached: Option<Accelerations>,
}

impl fmt::Debug for Simulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Simulation")
            .field("n", &self.particles.len())
            .field("t", &self.t)
            .field("dt", &self.dt)
            .field("g", &self.g)
            .field("softening", &self.softening)
            .field("step_count", &self.step_count)
            .field("paused", &self.paused)
            .finish_non_exhaustive()
    }
}

impl PartialEq for Simulation {
    fn eq(&self, other: &Self) -> bool {
        self.particles == other.particles
            && self.t == other.t
            && self.dt == other.dt
            && self.g == other.g
            && self.softening == other.softening
            && self.step_count == other.step_count
            && self.paused == other.paused
    }
}

impl Simulation {
    pub fn new(dt: f64, g: f64, softening: f64) -> Result<Self, SimError> {
        check("dt", dt, dt.is_finite() && dt > 0.0, "must be finite and positive")?;
        check("G", g, g.is_finite() && g > 0.0, "must be finite and positive")?;
        check(
            "softening",
            softening,
            softening.is_finite() && softening >= 0.0,
            "must be finite and non-negative",
        )?;
        Ok(Simulation {
            particles: Vec::new(),
            t: 0.0,
            dt,
            g,
            softening,
            step_count: 0,
            paused: false,
            cached: None,
        })
    }

    /// Sets the clock, e.g. when restoring a saved state.
    pub fn with_clock(mut self, t: f64, step_count: u64) -> Result<Self, SimError> {
        check("t", t, t.is_finite(), "must be finite")?;
        self.t = t;
        self.step_count = step_count;
        Ok(self)
    }

    pub fn add(&mut self, particle: Particle) -> Result<(), SimError> {
        particle.validate()?;
        self.particles.push(particle);
        self.cached = None;
        Ok(())
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Replaces the timestep. A negative value integrates backwards in time.
    pub fn set_dt(&mut self, dt: f64) -> Result<(), SimError> {
        check("dt", dt, dt.is_finite() && dt != 0.0, "must be finite and non-zero")?;
        self.dt = dt;
        Ok(())
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn softening(&self) -> f64 {
        self.softening
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn set_paused(&mut self, paused: bool) {
        self.paused = paused;
    }

    /// Gravitational acceleration of every particle.
    pub fn accelerations(&self) -> Result<Vec<Vec3>, SimError> {
        let mut acc = Accelerations::zeroed(self.particles.len());
        acc.compute(&self.particles, self.g, self.softening)?;
        Ok(acc.into_vecs())
    }

    /// Advances one kick-drift-kick step of size `dt`.
    ///
    /// On a singular configuration the state may be partially kicked; the
    /// step counter and time are left untouched.
    pub fn step(&mut self) -> Result<(), SimError> {
        let half = 0.5 * self.dt;
        let mut acc = match self.cached.take() {
            Some(acc) => acc,
            None => {
                let mut acc = Accelerations::zeroed(self.particles.len());
                acc.compute(&self.particles, self.g, self.softening)?;
                acc
            }
        };

        acc.kick(&mut self.particles, half);
        for p in &mut self.particles {
            for k in 0..3 {
                p.position[k] += p.velocity[k] * self.dt;
            }
        }
        acc.compute(&self.particles, self.g, self.softening)?;
        acc.kick(&mut self.particles, half);
        self.cached = Some(acc);

        self.t += self.dt;
        self.step_count += 1;
        Ok(())
    }

    /// Kinetic minus pairwise potential energy.
    pub fn total_energy(&self) -> Result<f64, SimError> {
        let eps2 = self.softening * self.softening;
        let kinetic: f64 = self
            .particles
            .iter()
            .map(|p| 0.5 * p.mass * dot(p.velocity, p.velocity))
            .sum();
        let mut potential = 0.0;
        for (i, pi) in self.particles.iter().enumerate() {
            for (j, pj) in self.particles.iter().enumerate().skip(i + 1) {
                let d = sub(pj.position, pi.position);
                let r2 = dot(d, d) + eps2;
                if r2 == 0.0 {
                    return Err(SimError::Singular(i, j));
                }
                potential -= self.g * pi.mass * pj.mass / r2.sqrt();
            }
        }
        Ok(kinetic + potential)
    }

    pub fn total_momentum(&self) -> Vec3 {
        let mut p = [0.0; 3];
        for particle in &self.particles {
            for (pk, vk) in p.iter_mut().zip(particle.velocity) {
                *pk += particle.mass * vk;
            }
        }
        p
    }

    /// Σ m|v|, the natural scale for momentum round-off.
    pub fn momentum_scale(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| p.mass * dot(p.velocity, p.velocity).sqrt())
            .sum()
    }
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

const LANES: usize = 8;

/// Structure-of-arrays scratch space for the pair kernel.
///
/// For each particle the partners with higher index are visited in blocks
/// of `LANES`, each lane keeping its own partial sum. The summation order
/// therefore depends on N alone, and every dispatch target below produces
/// the same bits.
#[derive(Clone)]
struct Accelerations {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    m: Vec<f64>,
    ax: Vec<f64>,
    ay: Vec<f64>,
    az: Vec<f64>,
}

impl Accelerations {
    fn zeroed(n: usize) -> Self {
        Accelerations {
            x: vec![0.0; n],
            y: vec![0.0; n],
            z: vec![0.0; n],
            m: vec![0.0; n],
            ax: vec![0.0; n],
            ay: vec![0.0; n],
            az: vec![0.0; n],
        }
    }

    fn compute(&mut self, particles: &[Particle], g: f64, softening: f64) -> Result<(), SimError> {
        for (i, p) in particles.iter().enumerate() {
            self.x[i] = p.position[0];
            self.y[i] = p.position[1];
            self.z[i] = p.position[2];
            self.m[i] = p.mass;
        }
        let eps2 = softening * softening;
        pair_sum(self, eps2, g);

        // The hot loop is branch-free; a zero separation shows up as a
        // non-finite sum and is diagnosed here.
        let finite = self.ax.iter().chain(&self.ay).chain(&self.az).all(|a| a.is_finite());
        if !finite {
            return Err(match find_singular_pair(particles, eps2) {
                Some((i, j)) => SimError::Singular(i, j),
                None => SimError::Overflow,
            });
        }
        Ok(())
    }

    fn kick(&self, particles: &mut [Particle], h: f64) {
        for (i, p) in particles.iter_mut().enumerate() {
            p.velocity[0] += self.ax[i] * h;
            p.velocity[1] += self.ay[i] * h;
            p.velocity[2] += self.az[i] * h;
        }
    }

    fn into_vecs(self) -> Vec<Vec3> {
        (0..self.ax.len())
            .map(|i| [self.ax[i], self.ay[i], self.az[i]])
            .collect()
    }
}

/// Below this many particles the pair sum runs as a single serial chunk.
const PARALLEL_MIN_N: usize = 2048;
/// Number of interleaved row sets summed independently for large N. Fixed,
/// so results do not depend on how many threads happen to be available.
const ROW_CHUNKS: usize = 16;

#[derive(Clone, Copy)]
struct Positions<'a> {
    x: &'a [f64],
    y: &'a [f64],
    z: &'a [f64],
    m: &'a [f64],
}

struct Forces<'a> {
    ax: &'a mut [f64],
    ay: &'a mut [f64],
    az: &'a mut [f64],
}

fn pair_sum(acc: &mut Accelerations, eps2: f64, g: f64) {
    let n = acc.x.len();
    let pos = Positions {
        x: &acc.x,
        y: &acc.y,
        z: &acc.z,
        m: &acc.m,
    };
    acc.ax.fill(0.0);
    acc.ay.fill(0.0);
    acc.az.fill(0.0);

    if n < PARALLEL_MIN_N {
        let mut out = Forces {
            ax: &mut acc.ax,
            ay: &mut acc.ay,
            az: &mut acc.az,
        };
        rows(pos, &mut out, 0, 1, eps2, g);
        return;
    }

    let partials: Vec<[Vec<f64>; 3]> = (0..ROW_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut part = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            let [ax, ay, az] = &mut part;
            rows(pos, &mut Forces { ax, ay, az }, chunk, ROW_CHUNKS, eps2, g);
            part
        })
        .collect();
    for [px, py, pz] in &partials {
        for j in 0..n {
            acc.ax[j] += px[j];
            acc.ay[j] += py[j];
            acc.az[j] += pz[j];
        }
    }
}

fn rows(pos: Positions<'_>, out: &mut Forces<'_>, first: usize, stride: usize, eps2: f64, g: f64) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { rows_avx512(pos, out, first, stride, eps2, g) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: as above.
            return unsafe { rows_avx2(pos, out, first, stride, eps2, g) };
        }
    }
    rows_generic(pos, out, first, stride, eps2, g)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn rows_avx512(pos: Positions<'_>, out: &mut Forces<'_>, first: usize, stride: usize, eps2: f64, g: f64) {
    rows_generic(pos, out, first, stride, eps2, g)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn rows_avx2(pos: Positions<'_>, out: &mut Forces<'_>, first: usize, stride: usize, eps2: f64, g: f64) {
    rows_generic(pos, out, first, stride, eps2, g)
}

/// Adds the contributions of pairs (i, j > i) for rows
/// `i = first, first + stride, ...` into `out`.
#[inline(always)]
fn rows_generic(pos: Positions<'_>, out: &mut Forces<'_>, first: usize, stride: usize, eps2: f64, g: f64) {
    let Positions { x, y, z, m } = pos;
    let n = x.len();

    for i in (first..n).step_by(stride) {
        let (xi, yi, zi, mi) = (x[i], y[i], z[i], m[i]);
        let (xs, ys, zs, ms) = (&x[i + 1..], &y[i + 1..], &z[i + 1..], &m[i + 1..]);
        let (ax_head, axs) = out.ax.split_at_mut(i + 1);
        let (ay_head, ays) = out.ay.split_at_mut(i + 1);
        let (az_head, azs) = out.az.split_at_mut(i + 1);

        let mut sx = [0.0; LANES];
        let mut sy = [0.0; LANES];
        let mut sz = [0.0; LANES];

        let len = xs.len();
        let full = len / LANES * LANES;
        for c in (0..full).step_by(LANES) {
            let block = c..c + LANES;
            let bx: &[f64; LANES] = xs[block.clone()].try_into().unwrap();
            let by: &[f64; LANES] = ys[block.clone()].try_into().unwrap();
            let bz: &[f64; LANES] = zs[block.clone()].try_into().unwrap();
            let bm: &[f64; LANES] = ms[block.clone()].try_into().unwrap();
            let out_x: &mut [f64; LANES] = (&mut axs[block.clone()]).try_into().unwrap();
            let out_y: &mut [f64; LANES] = (&mut ays[block.clone()]).try_into().unwrap();
            let out_z: &mut [f64; LANES] = (&mut azs[block]).try_into().unwrap();
            let mut fx = [0.0; LANES];
            let mut fy = [0.0; LANES];
            let mut fz = [0.0; LANES];
            for l in 0..LANES {
                let dx = bx[l] - xi;
                let dy = by[l] - yi;
                let dz = bz[l] - zi;
                let r2 = dx * dx + dy * dy + dz * dz + eps2;
                let inv = g / (r2 * r2.sqrt());
                fx[l] = dx * inv;
                fy[l] = dy * inv;
                fz[l] = dz * inv;
            }
            for l in 0..LANES {
                sx[l] += bm[l] * fx[l];
                sy[l] += bm[l] * fy[l];
                sz[l] += bm[l] * fz[l];
            }
            for l in 0..LANES {
                out_x[l] -= mi * fx[l];
                out_y[l] -= mi * fy[l];
                out_z[l] -= mi * fz[l];
            }
        }
        for (l, j) in (full..len).enumerate() {
            let dx = xs[j] - xi;
            let dy = ys[j] - yi;
            let dz = zs[j] - zi;
            let r2 = dx * dx + dy * dy + dz * dz + eps2;
            let inv = g / (r2 * r2.sqrt());
            let (fx, fy, fz) = (dx * inv, dy * inv, dz * inv);
            sx[l] += ms[j] * fx;
            sy[l] += ms[j] * fy;
            sz[l] += ms[j] * fz;
            axs[j] -= mi * fx;
            ays[j] -= mi * fy;
            azs[j] -= mi * fz;
        }
        ax_head[i] += lane_total(&sx);
        ay_head[i] += lane_total(&sy);
        az_head[i] += lane_total(&sz);
    }
}

#[inline(always)]
fn lane_total(s: &[f64; LANES]) -> f64 {
    ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]))
}

/// Locates the first pair whose softened squared separation is exactly zero.
fn find_singular_pair(particles: &[Particle], eps2: f64) -> Option<(usize, usize)> {
    for (i, pi) in particles.iter().enumerate() {
        for (j, pj) in particles.iter().enumerate().skip(i + 1) {
            let d = sub(pj.position, pi.position);
            if dot(d, d) + eps2 == 0.0 {
                return Some((i, j));
            }
        }
    }
    None
}
