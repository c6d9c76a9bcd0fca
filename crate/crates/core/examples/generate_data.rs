//! Ground-truth training data written as JSONL with a manifest.
//!
//! `cargo run --release --example generate_data -- se3 /tmp/se3.jsonl [seed]`

use clpnet::dataset::{generate_dataset, load_dataset, manifest_path, save_dataset, SamplerConfig};
use clpnet::{Case, System};
use std::path::PathBuf;

fn main() -> clpnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let case: Case = args.next().as_deref().unwrap_or("so3").parse()?;
    let out = args.next().map_or_else(|| std::env::temp_dir().join(format!("{case}.jsonl")), PathBuf::from);
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));

    let cfg = SamplerConfig::training(case).with_seed(seed);
    let data = generate_dataset(&System::default_for(case), &cfg)?;
    save_dataset(&out, &data, &cfg)?;
    println!("{} trajectories, {} pairs -> {}", data.trajectories.len(), data.pairs.len(), out.display());
    println!("manifest {}", manifest_path(&out).display());
    assert_eq!(load_dataset(&out)?, data);
    let first = &data.pairs[0];
    println!("first pair: {:?}\n         -> {:?}", &first.state_in[..3], &first.state_out[..3]);
    Ok(())
}
