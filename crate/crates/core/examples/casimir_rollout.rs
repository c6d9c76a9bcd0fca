//! Casimir conservation of untrained networks over long rollouts.
//!
//! `cargo run --release --example casimir_rollout -- [steps] [draws]`

use clpnet::dataset::{sample_initial, stream_rng, SamplerConfig, AUX_STREAM};
use clpnet::diagnostics::casimir_series;
use clpnet::{Case, Network, NetworkSpec};

fn main() -> clpnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps = args.next().map_or(5000, |s| s.parse().expect("steps"));
    let draws: u64 = args.next().map_or(5, |s| s.parse().expect("draws"));
    for case in Case::ALL {
        let net = Network::build(NetworkSpec::new(case))?;
        for seed in 0..draws {
            let params = net.init_params(&mut stream_rng(seed, AUX_STREAM), NetworkSpec::default_init_range(case))?;
            let s0 = sample_initial(&SamplerConfig::evaluation(case), &mut stream_rng(seed, 0))?;
            let traj = net.rollout(&params, &s0, steps)?;
            let size = traj.iter().flat_map(|s| s.to_flat()).fold(0.0f64, |m, x| m.max(x.abs()));
            let drifts: Vec<String> = casimir_series(&traj)
                .iter()
                .map(|c| format!("{:.2e}", c.iter().map(|x| ((x - c[0]) / c[0]).abs()).fold(0.0, f64::max)))
                .collect();
            println!("{case} seed {seed}: relative Casimir drift {} (max |x| {size:.1})", drifts.join(", "));
        }
    }
    Ok(())
}
