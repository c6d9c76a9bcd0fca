//! Train one case on a freshly generated dataset with the default schedule.
//!
//! `cargo run --release --example train -- so3 [epochs] [seed]`

use clpnet::dataset::{generate_dataset, stream_rng, SamplerConfig, AUX_STREAM};
use clpnet::training::{train_with, Batch, TrainConfig};
use clpnet::{Case, Network, NetworkSpec, System};

fn main() -> clpnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let case: Case = args.next().as_deref().unwrap_or("so2").parse()?;
    let epochs = args.next().map_or(2000, |s| s.parse().expect("epochs"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));

    let system = System::default_for(case);
    let sampler = SamplerConfig::training(case).with_seed(seed);
    let data = generate_dataset(&system, &sampler)?;
    let net = Network::build(NetworkSpec::new(case))?;
    let batch = Batch::new(&net, &data.pairs)?;
    let init = net.init_params(&mut stream_rng(seed, AUX_STREAM), NetworkSpec::default_init_range(case))?;

    let cfg = TrainConfig { epochs, seed, ..TrainConfig::default() };
    let (_, report) = train_with(&net, &init, &batch, &cfg, |e, l| {
        if e % 100 == 0 {
            println!("epoch {e:5}  loss {l:.3e}");
        }
    })?;
    println!(
        "{case}: {} pairs, {} params, loss {:.3e} -> {:.3e} (best epoch {}), {:.1}s",
        batch.len(),
        net.n_params(),
        report.initial_loss,
        report.final_loss,
        report.best_epoch,
        report.wall_time
    );
    Ok(())
}
