mod common;

use clpnet::dataset::*;
use clpnet::integrate::{integrate, Tolerances};
use clpnet::lie::{orthogonality_defect, Mat3, Vec3};
use clpnet::systems::{So3State, State, System};
use clpnet::Case;
use common::*;

fn free_body_field(inertia: Vec3) -> impl Fn(f64, &[f64], &mut [f64]) -> clpnet::Result<()> {
    move |_t, y, dy| {
        let mu = Vec3::from_column_slice(y);
        let w = mu.component_div(&inertia);
        dy.copy_from_slice(mu.cross(&w).as_slice());
        Ok(())
    }
}

#[test]
fn free_body_on_principal_axis_stays_put() {
    let f = free_body_field(Vec3::new(1.0, 2.0, 3.0));
    let y = integrate(f, &[0.0, 1.5, 0.0], 10.0, 1e-10, 1e-12).unwrap();
    assert!(max_abs_diff(&y, &[0.0, 1.5, 0.0]) <= 1e-12);
}

#[test]
fn self_convergence_under_tolerance_halving() {
    let f = || free_body_field(Vec3::new(1.0, 2.0, 3.0));
    let y0 = [0.3, 1.2, -0.8];
    let reference = integrate(f(), &y0, 20.0, 1e-13, 1e-15).unwrap();
    let coarse = integrate(f(), &y0, 20.0, 1e-8, 1e-10).unwrap();
    let fine = integrate(f(), &y0, 20.0, 0.5e-8, 0.5e-10).unwrap();
    let e_coarse = max_abs_diff(&coarse, &reference);
    let e_fine = max_abs_diff(&fine, &reference);
    assert!(max_abs_diff(&coarse, &fine) < 10.0 * e_coarse.max(1e-14));
    assert!(e_fine <= e_coarse * 1.2, "{e_fine:e} vs {e_coarse:e}");
}

#[test]
fn empirical_order_at_least_four() {
    let f = || free_body_field(Vec3::new(1.0, 2.0, 3.0));
    let y0 = [0.3, 1.2, -0.8];
    let reference = integrate(f(), &y0, 20.0, 1e-14, 1e-16).unwrap();
    let e6 = max_abs_diff(&integrate(f(), &y0, 20.0, 1e-6, 1e-8).unwrap(), &reference);
    let e7 = max_abs_diff(&integrate(f(), &y0, 20.0, 1e-7, 1e-9).unwrap(), &reference);
    // Error is proportional to the tolerance for a correctly controlled method.
    assert!(e6 / e7 >= 4.0, "{e6:e} {e7:e}");
}

#[test]
fn sampling_is_deterministic() {
    for case in Case::ALL {
        let cfg = SamplerConfig::training(case).with_seed(11);
        let a = sample_initial(&cfg, &mut stream_rng(11, 3)).unwrap();
        let b = sample_initial(&cfg, &mut stream_rng(11, 3)).unwrap();
        let c = sample_initial(&cfg, &mut stream_rng(11, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

#[test]
fn sampled_momenta_statistics() {
    let cfg = SamplerConfig::training(Case::So3);
    let mut r = stream_rng(5, 0);
    let mut sums = [0.0; 6];
    for _ in 0..10_000 {
        let s = match sample_initial(&cfg, &mut r).unwrap() {
            State::So3(s) => s,
            _ => unreachable!(),
        };
        for k in 0..3 {
            for (j, v) in [s.mu1[k], s.mu2[k]].into_iter().enumerate() {
                assert!(v > -2.0 && v < 2.0);
                sums[3 * j + k] += v;
            }
        }
        assert!(orthogonality_defect(&s.p) <= 1e-12);
        assert!((s.p.determinant() - 1.0).abs() <= 1e-12);
        clpnet::lie::Rotation::new(s.p).unwrap();
    }
    for s in sums {
        assert!((s / 10_000.0).abs() < 0.05);
    }
}

#[test]
fn sampling_ranges_per_case() {
    let mut r = stream_rng(9, 0);
    for _ in 0..1000 {
        if let State::So2(s) = sample_initial(&SamplerConfig::training(Case::So2), &mut r).unwrap() {
            assert!(s.phi >= 0.0 && s.phi < 2.0 * std::f64::consts::PI);
        }
        if let State::Se3(s) = sample_initial(&SamplerConfig::evaluation(Case::Se3), &mut r).unwrap() {
            assert!(s.beta1.amax() < 1.0 && s.v.amax() < 0.5);
            let angle = ((s.q.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
            assert!(angle <= std::f64::consts::FRAC_PI_4 + 1e-12);
        }
    }
    let bad = SamplerConfig { momentum: (1.0, -1.0), ..SamplerConfig::training(Case::So3) };
    assert!(sample_initial(&bad, &mut r).is_err());
}

#[test]
fn default_training_protocol_pair_count() {
    let cfg = SamplerConfig::training(Case::So2).with_seed(1);
    let d = generate_dataset(&System::default_for(Case::So2), &cfg).unwrap();
    assert_eq!(d.pairs.len(), 1000);
    assert_eq!(d.trajectories.len(), 20);
    assert!(d.trajectories.iter().all(|t| t.len() == 51));
}

#[test]
fn single_pair_matches_integrator_endpoint() {
    let cfg = SamplerConfig { n_traj: 1, n_steps: 2, ..SamplerConfig::training(Case::So3).with_seed(2) };
    let sys = System::default_for(Case::So3);
    let d = generate_dataset(&sys, &cfg).unwrap();
    assert_eq!(d.pairs.len(), 1);
    let s0 = sample_initial(&cfg, &mut stream_rng(2, 0)).unwrap();
    let end = integrate(|_, y, dy| sys.field(y, dy), &s0.to_flat(), 0.1, 1e-10, 1e-12).unwrap();
    assert_eq!(d.pairs[0].state_in, s0.to_flat());
    assert!(max_abs_diff(&d.pairs[0].state_out, &end) < 1e-13);
}

#[test]
fn generated_pairs_keep_casimirs() {
    for case in Case::ALL {
        let cfg = SamplerConfig { n_traj: 4, ..SamplerConfig::training(case).with_seed(3) };
        let sys = System::default_for(case);
        let d = generate_dataset(&sys, &cfg).unwrap();
        for p in &d.pairs {
            let a = sys.casimirs(&p.state_in).unwrap();
            let b = sys.casimirs(&p.state_out).unwrap();
            assert!(max_abs_diff(&a, &b) <= 1e-8);
        }
    }
}

#[test]
fn dataset_generation_is_bit_reproducible() {
    let cfg = SamplerConfig { n_traj: 5, ..SamplerConfig::training(Case::Se3).with_seed(4) };
    let sys = System::default_for(Case::Se3);
    let a = generate_dataset(&sys, &cfg).unwrap();
    let b = generate_dataset(&sys, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn dataset_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let cfg = SamplerConfig { n_traj: 3, n_steps: 4, ..SamplerConfig::training(Case::So3).with_seed(7) };
    let d = generate_dataset(&System::default_for(Case::So3), &cfg).unwrap();
    save_dataset(&path, &d, &cfg).unwrap();
    let back = load_dataset(&path).unwrap();
    assert_eq!(back, d);
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest_path(&path)).unwrap()).unwrap();
    assert_eq!(m.sampler.seed, 7);
    assert_eq!(m.n_pairs, 9);
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
}

#[test]
fn singular_start_reports_trajectory() {
    let cfg = SamplerConfig { n_traj: 1, n_steps: 3, ..SamplerConfig::training(Case::So3) };
    let mut sys = System::default_for(Case::So3);
    if let clpnet::systems::SystemKind::So3(s) = &mut sys.kind {
        s.charges2[0].xi = [1.0, 0.0, 0.0];
    }
    let s0 = State::So3(So3State::new(Vec3::zeros(), Vec3::zeros(), Mat3::identity()));
    assert!(ground_truth(&sys, &s0, 0.1, 3, Tolerances::GROUND_TRUTH).is_err());
    // The sampler draws a random orientation, so only check the wrapping when it fails.
    if let Err(e) = generate_dataset(&sys, &cfg) {
        assert!(matches!(e, clpnet::Error::Trajectory { index: 0, .. }));
    }
}

#[test]
fn energy_drift_over_long_run() {
    let sys = System::default_for(Case::So3);
    let s0 = sample_initial(&SamplerConfig::evaluation(Case::So3), &mut stream_rng(8, 0)).unwrap();
    let t = ground_truth(&sys, &s0, 1.0, 501, Tolerances::GROUND_TRUTH).unwrap();
    let e0 = sys.energy(&t.states[0]).unwrap();
    let c0 = sys.casimirs(&t.states[0]).unwrap()[0];
    for s in &t.states {
        assert!((sys.energy(s).unwrap() - e0).abs() <= 1e-7 * e0.abs().max(1e-300));
        assert!((sys.casimirs(s).unwrap()[0] - c0).abs() <= 1e-8);
    }
}

#[test]
fn se3_long_run_drift() {
    let sys = System::default_for(Case::Se3);
    let s0 = sample_initial(&SamplerConfig::evaluation(Case::Se3), &mut stream_rng(9, 0)).unwrap();
    let t = ground_truth(&sys, &s0, 0.1, 5001, Tolerances::GROUND_TRUTH).unwrap();
    let e0 = sys.energy(&t.states[0]).unwrap();
    let c0 = sys.casimirs(&t.states[0]).unwrap();
    let mut worst = [0.0f64; 3];
    for s in &t.states {
        let c = sys.casimirs(s).unwrap();
        worst[0] = worst[0].max((c[0] - c0[0]).abs());
        worst[1] = worst[1].max((c[1] - c0[1]).abs());
        worst[2] = worst[2].max(((sys.energy(s).unwrap() - e0) / e0).abs());
    }
    eprintln!("se3 drift {worst:?}");
    assert!(worst[0] <= 1e-8 && worst[1] <= 1e-8 && worst[2] <= 1e-7, "{worst:?}");
}
