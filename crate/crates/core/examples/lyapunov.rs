//! Largest Lyapunov exponent of each reference system.
//!
//! `cargo run --release --example lyapunov -- [seed]`

use clpnet::dataset::{sample_initial, stream_rng, SamplerConfig};
use clpnet::diagnostics::{lyapunov, LyapunovConfig};
use clpnet::{Case, System};

fn main() -> clpnet::Result<()> {
    let seed = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    for case in Case::ALL {
        let system = System::default_for(case);
        let s0 = sample_initial(&SamplerConfig::evaluation(case), &mut stream_rng(seed, 0))?;
        for delta0 in [1e-9, 1e-8, 1e-7] {
            let est = lyapunov(&system, &s0, &LyapunovConfig { delta0, ..Default::default() })?;
            println!("{case}  delta0 {delta0:.0e}  lambda {:.4}", est.lambda);
        }
    }
    Ok(())
}
