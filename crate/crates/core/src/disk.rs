//! Self-gravitating disk scenario.

use crate::sim::{Particle, SimError, Simulation};

pub const DEFAULT_DT: f64 = 2.0 * std::f64::consts::PI * 1e-3;
pub const DEFAULT_G: f64 = 1.0;
pub const DEFAULT_SOFTENING: f64 = 0.02;
pub const DEFAULT_SEED: u64 = 1;

const CENTRAL_RADIUS: f64 = 0.05;
const DISK_PARTICLE_RADIUS: f64 = 0.005;

/// SplitMix64 (Steele, Lea & Flood 2014).
///
/// Constants: increment 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB with shifts 30, 27, 31. Uniform doubles take the top
/// 53 bits: `(x >> 11) * 2^-53`, giving values in [0, 1).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskParams {
    pub central_mass: f64,
    pub disk_mass: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Half-thickness as a fraction of radius.
    pub aspect: f64,
    pub seed: u64,
    pub dt: f64,
    pub g: f64,
    pub softening: f64,
}

impl Default for DiskParams {
    fn default() -> Self {
        DiskParams {
            central_mass: 1.0,
            disk_mass: 0.01,
            r_min: 0.4,
            r_max: 4.0,
            aspect: 0.05,
            seed: DEFAULT_SEED,
            dt: DEFAULT_DT,
            g: DEFAULT_G,
            softening: DEFAULT_SOFTENING,
        }
    }
}

impl DiskParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |name, value, reason| Err(SimError::Parameter { name, value, reason });
        let all_finite = [self.central_mass, self.disk_mass, self.r_min, self.r_max, self.aspect]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return bad("disk", f64::NAN, "parameters must be finite");
        }
        if self.central_mass < 0.0 {
            return bad("central_mass", self.central_mass, "must be non-negative");
        }
        if self.disk_mass < 0.0 {
            return bad("disk_mass", self.disk_mass, "must be non-negative");
        }
        if self.r_min <= 0.0 {
            return bad("r_min", self.r_min, "must be positive");
        }
        if self.r_min >= self.r_max {
            return bad("r_max", self.r_max, "must exceed r_min");
        }
        if self.aspect < 0.0 {
            return bad("aspect", self.aspect, "must be non-negative");
        }
        Ok(())
    }
}

/// Builds a central mass at rest surrounded by `n` particles on circular
/// orbits, with surface density falling as r^(-3/2).
///
/// Each disk particle consumes three uniforms in order: radius, azimuth,
/// height. Radii come from the inverse CDF
/// `r = (√r_min + u (√r_max − √r_min))²`, heights are uniform in
/// `±aspect·r`, and velocities are tangential with speed `√(G M / r)`.
pub fn init_selfgravitating_disk(n: usize, params: &DiskParams) -> Result<Simulation, SimError> {
    if n == 0 {
        return Err(SimError::Parameter {
            name: "n",
            value: 0.0,
            reason: "disk needs at least one particle",
        });
    }
    params.validate()?;

    let mut sim = Simulation::new(params.dt, params.g, params.softening)?;
    sim.add(Particle::new(params.central_mass, CENTRAL_RADIUS, [0.0; 3], [0.0; 3])?)?;

    let mut rng = SplitMix64::new(params.seed);
    let mass = params.disk_mass / n as f64;
    let (sqrt_min, sqrt_max) = (params.r_min.sqrt(), params.r_max.sqrt());
    for _ in 0..n {
        let s = sqrt_min + rng.next_f64() * (sqrt_max - sqrt_min);
        // Rounding can push s² a hair outside the interval.
        let r = (s * s).clamp(params.r_min, params.r_max);
        let phi = 2.0 * std::f64::consts::PI * rng.next_f64();
        let z = params.aspect * r * (2.0 * rng.next_f64() - 1.0);
        let speed = (params.g * params.central_mass / r).sqrt();
        let (sin, cos) = phi.sin_cos();
        sim.add(Particle::new(
            mass,
            DISK_PARTICLE_RADIUS,
            [r * cos, r * sin, z],
            [-speed * sin, speed * cos, 0.0],
        )?)?;
    }
    Ok(sim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0, as published with the reference C code.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn uniforms_stay_in_unit_interval() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn single_disk_particle_gets_all_the_mass() {
        let params = DiskParams::default();
        let sim = init_selfgravitating_disk(1, &params).unwrap();
        assert_eq!(sim.len(), 2);
        assert_eq!(sim.particles()[1].mass, params.disk_mass);
        assert_eq!(sim.particles()[0].position, [0.0; 3]);
        assert_eq!(sim.particles()[0].velocity, [0.0; 3]);
        assert_eq!(sim.particles()[0].mass, params.central_mass);
    }

    #[test]
    fn rejects_invalid_params() {
        let ok = DiskParams::default();
        assert!(init_selfgravitating_disk(0, &ok).is_err());
        for bad in [
            DiskParams { r_min: 0.0, ..ok },
            DiskParams { r_min: 5.0, ..ok },
            DiskParams { disk_mass: -1.0, ..ok },
            DiskParams { aspect: -0.1, ..ok },
            DiskParams {
                r_max: f64::INFINITY,
                ..ok
            },
            DiskParams { dt: 0.0, ..ok },
        ] {
            assert!(init_selfgravitating_disk(4, &bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let params = DiskParams::default();
        let a = init_selfgravitating_disk(500, &params).unwrap();
        let b = init_selfgravitating_disk(500, &params).unwrap();
        let bits = |s: &Simulation| -> Vec<u64> {
            s.particles()
                .iter()
                .flat_map(|p| {
                    [p.mass, p.radius]
                        .into_iter()
                        .chain(p.position)
                        .chain(p.velocity)
                        .map(f64::to_bits)
                })
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
        let c = init_selfgravitating_disk(500, &DiskParams { seed: 2, ..params }).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn radii_and_speeds_match_construction() {
        let params = DiskParams::default();
        let sim = init_selfgravitating_disk(10_000, &params).unwrap();
        for p in &sim.particles()[1..] {
            let r = p.position[0].hypot(p.position[1]);
            // Recomputing r from cos/sin costs a few ulps.
            assert!(r >= params.r_min * (1.0 - 1e-14) && r <= params.r_max * (1.0 + 1e-14));
            assert!(p.position[2].abs() <= params.aspect * r * (1.0 + 1e-12));
            let speed = p.velocity[0].hypot(p.velocity[1]);
            let expected = (params.g * params.central_mass / r).sqrt();
            assert!(((speed - expected) / expected).abs() < 1e-12);
            assert_eq!(p.velocity[2], 0.0);
        }
    }
}
