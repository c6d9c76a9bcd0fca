//! Build a network, save and reload the model file, invert a forward pass.
//!
//! `cargo run --release --example network_model`

use clpnet::dataset::{sample_initial, stream_rng, SamplerConfig, AUX_STREAM};
use clpnet::{Case, Model, Network, NetworkSpec};

fn main() -> clpnet::Result<()> {
    let dir = std::env::temp_dir();
    for case in Case::ALL {
        let net = Network::build(NetworkSpec::new(case).with_cycles(3))?;
        let params = net.init_params(&mut stream_rng(1, AUX_STREAM), (-0.5, 0.5))?;
        println!("{case}: {} layers, {} parameters", net.layers().len(), net.n_params());

        let path = dir.join(format!("clpnet-{case}.json"));
        Model::new(&net, params.clone())?.save(&path)?;
        let model = Model::load(&path)?;
        let s0 = sample_initial(&SamplerConfig::evaluation(case), &mut stream_rng(1, 0))?;
        let a = net.rollout(&params, &s0, 100)?;
        let b = model.network()?.rollout(&model.params, &s0, 100)?;
        println!("  reloaded rollout identical: {}", a == b);

        let x1 = net.forward(&params, &s0)?;
        let x0 = net.inverse(&params, &x1)?;
        let err = x0.to_flat().iter().zip(s0.to_flat()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("  inverse(forward(x)) error {err:.1e}");
    }
    Ok(())
}
