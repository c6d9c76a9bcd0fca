//! Each elementary Poisson map: Casimir change and inversion by a negative step.
//!
//! `cargo run --release --example poisson_layers`

use clpnet::layers::Activation;
use clpnet::network::cycle_layers;
use clpnet::dataset::{sample_initial, stream_rng, SamplerConfig};
use clpnet::Case;
use rand::Rng;

fn main() -> clpnet::Result<()> {
    let mut rng = stream_rng(3, 0);
    for case in Case::ALL {
        let state = sample_initial(&SamplerConfig::training(case), &mut rng)?;
        let flat = state.to_flat();
        for layer in cycle_layers(case) {
            let params: Vec<f64> = (0..layer.n_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let out = layer.apply(Activation::Tanh, &params, 0.1, &state)?;
            let back = layer.apply(Activation::Tanh, &params, -0.1, &out)?;
            let dc = state.casimirs().iter().zip(out.casimirs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let inv = back.to_flat().iter().zip(&flat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("{:<28} {:>2} params  |ΔC| {dc:.1e}  inverse error {inv:.1e}", layer.describe(), layer.n_params());
        }
    }
    Ok(())
}
