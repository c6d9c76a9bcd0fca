//! Energy and Casimirs of the three reference systems along an accurate integration.
//!
//! `cargo run --release --example reference_systems -- [seed]`

use clpnet::dataset::{ground_truth, sample_initial, stream_rng, SamplerConfig};
use clpnet::diagnostics::{casimir_series, energy_series, relative_drift};
use clpnet::integrate::Tolerances;
use clpnet::{Case, State, System};

fn main() -> clpnet::Result<()> {
    let seed = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    for case in Case::ALL {
        let system = System::default_for(case);
        let s0 = sample_initial(&SamplerConfig::evaluation(case), &mut stream_rng(seed, 0))?;
        let field = system.field_of(&s0)?;
        println!("{case}: h = {:.6}, |dx/dt| = {:.4}", system.energy_of(&s0)?, field.to_flat().iter().map(|x| x * x).sum::<f64>().sqrt());

        let traj = ground_truth(&system, &s0, 1.0, 101, Tolerances::GROUND_TRUTH)?;
        let states = traj.states.iter().map(|x| State::from_flat(case, x)).collect::<clpnet::Result<Vec<_>>>()?;
        let drifts: Vec<String> = casimir_series(&states).iter().map(|c| format!("{:.1e}", relative_drift(c))).collect();
        println!("  over t = 100: Casimir drift [{}], energy drift {:.1e}", drifts.join(", "), relative_drift(&energy_series(&system, &states)?));
    }
    Ok(())
}
