//! A circular binary integrated for ten orbits, printing the energy error
//! and how far each body ends up from its starting point.
//!
//!     cargo run --example two_body_orbit -- [steps_per_orbit]

use std::f64::consts::PI;

use nbview::{Particle, Simulation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let steps: u32 = std::env::args().nth(1).map_or(Ok(1000), |s| s.parse())?;

    // Equal unit masses one unit apart: each moves on a circle of radius
    // 1/2 at speed sqrt(G m_total / a) / 2.
    let period = 2.0 * PI / 2f64.sqrt();
    let v = 0.5 * 2f64.sqrt();
    let mut sim = Simulation::new(period / f64::from(steps), 1.0, 0.0)?;
    sim.add(Particle::new(1.0, 0.01, [0.5, 0.0, 0.0], [0.0, v, 0.0])?)?;
    sim.add(Particle::new(1.0, 0.01, [-0.5, 0.0, 0.0], [0.0, -v, 0.0])?)?;

    let start: Vec<_> = sim.particles().iter().map(|p| p.position).collect();
    let e0 = sim.total_energy()?;
    let mut worst = 0.0f64;
    println!("{:>6} {:>14} {:>14}", "orbit", "t", "|dE/E|");
    for orbit in 1..=10 {
        for _ in 0..steps {
            sim.step()?;
            worst = worst.max(((sim.total_energy()? - e0) / e0).abs());
        }
        println!("{orbit:>6} {:>14.6} {:>14.3e}", sim.t(), worst);
    }
    for (i, (p, x0)) in sim.particles().iter().zip(&start).enumerate() {
        let d: f64 = (0..3).map(|k| (p.position[k] - x0[k]).powi(2)).sum::<f64>().sqrt();
        println!("body {i}: displaced {d:.3e} after 10 periods");
    }
    Ok(())
}
