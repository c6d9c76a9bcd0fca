//! Train, roll out from an unseen state and compare with the reference system.
//!
//! `cargo run --release --example evaluate -- se3 [epochs] [seed] [zeta]`

use clpnet::dataset::{generate_dataset, sample_initial, stream_rng, SamplerConfig, AUX_STREAM};
use clpnet::diagnostics::*;
use clpnet::training::{train, Batch, TrainConfig};
use clpnet::{Case, Network, NetworkSpec, System};

fn main() -> clpnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let case: Case = args.next().as_deref().unwrap_or("so3").parse()?;
    let epochs = args.next().map_or(2000, |s| s.parse().expect("epochs"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));
    let zeta = args.next().map(|s| s.parse::<f64>().expect("zeta"));

    let system = System::default_for(case).with_zeta(zeta)?;
    let data = generate_dataset(&system, &SamplerConfig::training(case).with_seed(seed))?;
    let net = Network::build(NetworkSpec::new(case))?;
    let batch = Batch::new(&net, &data.pairs)?;
    let init = net.init_params(&mut stream_rng(seed, AUX_STREAM), NetworkSpec::default_init_range(case))?;
    let (params, report) = train(&net, &init, &batch, &TrainConfig { epochs, seed, ..Default::default() })?;
    println!("trained {case}: loss {:.3e} in {:.1}s", report.final_loss, report.wall_time);

    // Unseen initial condition: a different seed's first evaluation draw.
    let s0 = sample_initial(&SamplerConfig::evaluation(case), &mut stream_rng(seed + 1000, 0))?;
    let cmp = compare(&net, &params, &system, &s0, 5000, MaeSelection::Momenta)?;
    let lam = lyapunov(&system, &s0, &LyapunovConfig::default())?.lambda;
    let a = fit_mae_envelope(&cmp.model.t, &cmp.model.mae, lam, 50.0);
    println!("Casimir drift: model {:.2e}, truth {:.2e}", cmp.model.casimir_drift(), cmp.truth.casimir_drift());
    println!("energy oscillation ratio (all / first 500): {:.2}", energy_oscillation_ratio(&cmp.model.energy, 501));
    println!("lambda {lam:.4}, A {a:.3e}, bound ratio on [0,50] {:.3}", mae_bound_ratio(&cmp.model.t, &cmp.model.mae, lam, a, 50.0));
    println!("MAE growth exponent on [5,50] {:.4}", growth_exponent(&cmp.model.t, &cmp.model.mae, 5.0, 50.0)?);
    for k in [10, 50, 100, 200, 500] {
        println!("  MAE(t={:>4}) = {:.3e}", cmp.model.t[k], cmp.model.mae[k]);
    }
    Ok(())
}
