#![allow(dead_code)]

use std::path::PathBuf;

use nbview::sim::Vec3;
use nbview::snapshot::{SimHeader, Snapshot, ViewOverride, FLAG_PAUSED, VERSION};
use nbview::{Particle, SharedState, Simulation};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Set `NBV_BLESS=1` to rewrite golden files instead of comparing.
pub fn bless() -> bool {
    std::env::var_os("NBV_BLESS").is_some_and(|v| v == "1")
}

/// Naive double loop over ordered pairs, written independently of the
/// library kernel.
pub fn naive_accelerations(sim: &Simulation) -> Vec<Vec3> {
    let ps = sim.particles();
    let eps2 = sim.softening().powi(2);
    ps.iter()
        .enumerate()
        .map(|(i, pi)| {
            let mut a = [0.0; 3];
            for (j, pj) in ps.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d: Vec<f64> = (0..3).map(|k| pj.position[k] - pi.position[k]).collect();
                let r2: f64 = d.iter().map(|c| c * c).sum::<f64>() + eps2;
                let s = sim.g() * pj.mass / r2.powf(1.5);
                for k in 0..3 {
                    a[k] += s * d[k];
                }
            }
            a
        })
        .collect()
}

pub fn naive_energy(sim: &Simulation) -> f64 {
    let ps = sim.particles();
    let eps2 = sim.softening().powi(2);
    let mut e = 0.0;
    for (i, pi) in ps.iter().enumerate() {
        e += 0.5 * pi.mass * pi.velocity.iter().map(|v| v * v).sum::<f64>();
        for pj in &ps[i + 1..] {
            let r2: f64 = (0..3).map(|k| (pj.position[k] - pi.position[k]).powi(2)).sum::<f64>() + eps2;
            e -= sim.g() * pi.mass * pj.mass / r2.sqrt();
        }
    }
    e
}

/// Two equal unit masses on a circular orbit about their barycentre with
/// separation 1 and G = 1. Returns the simulation and the orbital period.
pub fn circular_binary(steps_per_period: u32) -> (Simulation, f64) {
    let (m, a, g): (f64, f64, f64) = (1.0, 1.0, 1.0);
    let omega = (g * 2.0 * m / (a * a * a)).sqrt();
    let period = 2.0 * std::f64::consts::PI / omega;
    let v = omega * a / 2.0;
    let mut sim = Simulation::new(period / steps_per_period as f64, g, 0.0).unwrap();
    sim.add(Particle::new(m, 0.0, [-a / 2.0, 0.0, 0.0], [0.0, -v, 0.0]).unwrap())
        .unwrap();
    sim.add(Particle::new(m, 0.0, [a / 2.0, 0.0, 0.0], [0.0, v, 0.0]).unwrap())
        .unwrap();
    (sim, period)
}

pub fn fixture_view() -> ViewOverride {
    let mut matrix = ViewOverride::IDENTITY;
    matrix[12] = 0.5;
    matrix[13] = -0.25;
    matrix[14] = -6.0;
    ViewOverride { seq: 1, matrix }
}

/// The state pinned by `fixtures/snapshot_n3_v1.bin`. Every value is
/// exactly representable so the JSON manifest is lossless.
pub fn fixture_snapshot() -> Snapshot {
    Snapshot {
        version: VERSION,
        header: SimHeader {
            t: 1.5,
            dt: 0.25,
            g: 1.0,
            softening: 0.125,
            step_count: 6,
            n: 3,
            flags: FLAG_PAUSED,
        },
        particles: vec![
            Particle::new(1.0, 0.0625, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]).unwrap(),
            Particle::new(0.001, 0.015625, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap(),
            Particle::new(0.0005, 0.0078125, [-2.5, 0.5, 0.125], [0.25, -0.625, 0.03125]).unwrap(),
        ],
        view: Some(fixture_view()),
    }
}

pub fn fixture_state() -> SharedState {
    let snap = fixture_snapshot();
    let state = SharedState::new(snap.to_simulation().unwrap());
    state.set_view_override(snap.view.unwrap().matrix).unwrap();
    state
}

/// Relative error with an absolute floor for values near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn max_rel_vec_err(a: &[Vec3], b: &[Vec3]) -> f64 {
    // Component-wise error measured against each vector's magnitude.
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let scale = x.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
            (0..3).map(|k| (x[k] - y[k]).abs() / scale).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

pub fn random_sim(seed: u64, n: usize, softening: f64) -> Simulation {
    let mut rng = nbview::disk::SplitMix64::new(seed);
    let mut u = move |lo: f64, hi: f64| lo + (hi - lo) * rng.next_f64();
    let mut sim = Simulation::new(0.01, u(0.5, 2.0), softening).unwrap();
    for _ in 0..n {
        let p = Particle::new(
            u(0.0, 3.0),
            u(0.0, 0.1),
            [u(-5.0, 5.0), u(-5.0, 5.0), u(-5.0, 5.0)],
            [u(-1.0, 1.0), u(-1.0, 1.0), u(-1.0, 1.0)],
        )
        .unwrap();
        sim.add(p).unwrap();
    }
    sim
}
