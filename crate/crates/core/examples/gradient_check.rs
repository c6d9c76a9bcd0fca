//! Reverse-mode loss gradients against central finite differences.
//!
//! `cargo run --release --example gradient_check -- [draws]`

use clpnet::dataset::{generate_dataset, stream_rng, SamplerConfig, AUX_STREAM};
use clpnet::training::{gradient_check, loss, Batch};
use clpnet::{Case, Network, NetworkSpec, System};

fn main() -> clpnet::Result<()> {
    let draws = std::env::args().nth(1).map_or(3, |s| s.parse().expect("draws"));
    for case in Case::ALL {
        let net = Network::build(NetworkSpec::new(case))?;
        let cfg = SamplerConfig { n_traj: 2, n_steps: 6, ..SamplerConfig::training(case) };
        let batch = Batch::new(&net, &generate_dataset(&System::default_for(case), &cfg)?.pairs)?;
        let mut rng = stream_rng(0, AUX_STREAM);
        for d in 0..draws {
            let params = net.init_params(&mut rng, (-0.3, 0.3))?;
            println!(
                "{case} draw {d}: loss {:.3e}, residual {:.2e}",
                loss(&net, &params, &batch)?,
                gradient_check(&net, &params, &batch)?
            );
        }
    }
    Ok(())
}
