//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! `cargo test --release --test acceptance`

mod common;

use clpnet::cli::{run, Cli};
use clpnet::dataset::*;
use clpnet::diagnostics::*;
use clpnet::integrate::{integrate, Tolerances};
use clpnet::layers::{Activation, Layer};
use clpnet::lie::{ad_se3, ad_star_se3, hat, orthogonality_defect, rot, vee, Mat3, Vec3};
use clpnet::network::{Model, Network, NetworkSpec};
use clpnet::systems::*;
use clpnet::training::{fd_grad as loss_fd_grad, grad, gradient_check, loss, train, Batch, TrainConfig, FD_STEP};
use clpnet::Case;
use clap::Parser;
use common::*;
use rand::Rng;
use std::process::ExitCode;
use std::time::Instant;

/// Largest observed value against its bound.
struct Check {
    label: String,
    value: f64,
    bound: f64,
}

impl Check {
    fn le(label: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { label: label.into(), value, bound }
    }

    fn pass(&self) -> bool {
        self.value <= self.bound
    }
}

fn summarize(checks: &[Check]) -> (bool, String) {
    let pass = checks.iter().all(Check::pass);
    let detail = checks
        .iter()
        .map(|c| format!("{} {:.3e} (<= {:.0e}){}", c.label, c.value, c.bound, if c.pass() { "" } else { " !" }))
        .collect::<Vec<_>>()
        .join("; ");
    (pass, detail)
}

fn eval_state(case: Case, seed: u64) -> State {
    sample_initial(&SamplerConfig::evaluation(case), &mut stream_rng(seed, 0)).unwrap()
}

/// Every layer kind against the integrated test-Hamiltonian ODE.
fn layer_exactness() -> Vec<Check> {
    let mut r = rng(101);
    let mut worst = Vec::new();
    for (k, layer) in all_layer_kinds(0).into_iter().enumerate() {
        let mut err = 0.0f64;
        for draw in 0..100 {
            let layer = match layer {
                Layer::Se3 { kind, .. } => Layer::Se3 { kind, axis: draw % 3 },
                l => l,
            };
            let act = if draw % 2 == 0 { Activation::Tanh } else { Activation::Sigmoid };
            let s = random_state(&mut r, layer.case());
            let prm = random_params(&mut r, layer.n_params(), 1.0);
            let out = layer.apply(act, &prm, 0.1, &s).unwrap();
            let want = layer_ode_flow(&layer, &prm, act, &s, 0.1, 1e-12);
            err = err.max(max_abs_diff(&out.to_flat(), &want.to_flat()));
        }
        worst.push((k, layer, err));
    }
    let max = worst.iter().fold(0.0f64, |m, w| m.max(w.2));
    let arg = worst.iter().find(|w| w.2 == max).expect("non-empty");
    vec![Check::le(format!("{} kinds, worst {}", worst.len(), arg.1.describe()), max, 1e-9)]
}

fn rollout_casimir_drift(case: Case, seed: u64, steps: usize) -> (f64, Vec<f64>) {
    let net = Network::build(NetworkSpec::new(case)).unwrap();
    let params = net.init_params(&mut stream_rng(seed, AUX_STREAM), NetworkSpec::default_init_range(case)).unwrap();
    let traj = net.rollout(&params, &eval_state(case, seed), steps).unwrap();
    let series = casimir_series(&traj);
    let drift = series.iter().map(|c| relative_drift(c)).fold(0.0, f64::max);
    let c0 = series.iter().map(|c| c[0]).collect();
    (drift, c0)
}

/// Untrained networks at the default initialization, five draws per case.
fn casimir_precision() -> Vec<Check> {
    let mut checks = Vec::new();
    for case in [Case::So3, Case::Se3] {
        let per: Vec<f64> = (0..5).map(|seed| rollout_casimir_drift(case, seed, 5000).0).collect();
        let list = per.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(",");
        checks.push(Check::le(format!("{case} draws [{list}] max"), per.iter().cloned().fold(0.0, f64::max), 1e-12));
    }
    checks
}

fn ground_truth_fidelity() -> Vec<Check> {
    let sys = System::default_for(Case::Se3);
    let traj = ground_truth(&sys, &eval_state(Case::Se3, 0), 0.1, 5001, Tolerances::GROUND_TRUTH).unwrap();
    let states: Vec<State> = traj.states.iter().map(|x| State::from_flat(Case::Se3, x).unwrap()).collect();
    let cs = casimir_series(&states);
    let e = energy_series(&sys, &states).unwrap();
    vec![
        Check::le("C1 abs drift", absolute_drift(&cs[0]), 1e-8),
        Check::le("C2 abs drift", absolute_drift(&cs[1]), 1e-8),
        Check::le("energy rel drift", relative_drift(&e), 1e-7),
    ]
}

fn gradient_correctness() -> Vec<Check> {
    Case::ALL
        .into_iter()
        .map(|case| {
            let net = Network::build(NetworkSpec::new(case)).unwrap();
            let cfg = SamplerConfig { n_traj: 2, n_steps: 6, ..SamplerConfig::training(case).with_seed(11) };
            let batch = Batch::new(&net, &generate_dataset(&System::default_for(case), &cfg).unwrap().pairs).unwrap();
            let mut r = stream_rng(12, AUX_STREAM);
            let (mut worst, mut plain) = (0.0f64, 0.0f64);
            for _ in 0..10 {
                let p = net.init_params(&mut r, (-0.3, 0.3)).unwrap();
                worst = worst.max(gradient_check(&net, &p, &batch).unwrap());
                let g = grad(&net, &p, &batch).unwrap();
                let fd = loss_fd_grad(&net, &p, &batch, FD_STEP).unwrap();
                plain = plain.max(g.iter().zip(&fd).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max));
            }
            Check::le(format!("{case} residual (plain relative {plain:.1e})"), worst, 1e-6)
        })
        .collect()
}

struct Trained {
    net: Network,
    params: Vec<f64>,
    loss: f64,
    system: System,
    seconds: f64,
}

/// The full data protocol: 20 trajectories of 51 states, default network, 2000 epochs.
fn train_protocol(case: Case, zeta: Option<f64>) -> Trained {
    let seed = 0;
    let system = System::default_for(case).with_zeta(zeta).unwrap();
    let data = generate_dataset(&system, &SamplerConfig::training(case).with_seed(seed)).unwrap();
    assert_eq!(data.pairs.len(), 1000);
    let net = Network::build(NetworkSpec::new(case)).unwrap();
    let batch = Batch::new(&net, &data.pairs).unwrap();
    let init = net.init_params(&mut stream_rng(seed, AUX_STREAM), NetworkSpec::default_init_range(case)).unwrap();
    let (params, report) = train(&net, &init, &batch, &TrainConfig { seed, ..TrainConfig::default() }).unwrap();
    Trained { net, params, loss: report.final_loss, system, seconds: report.wall_time }
}

/// Rollout from an initial condition outside the training set.
fn unseen_comparison(t: &Trained, n_steps: usize) -> Comparison {
    let s0 = eval_state(t.net.case(), 1000);
    compare(&t.net, &t.params, &t.system, &s0, n_steps, MaeSelection::Momenta).unwrap()
}

fn training_so2() -> Vec<Check> {
    let t = train_protocol(Case::So2, None);
    let cmp = unseen_comparison(&t, 5000);
    vec![
        Check::le(format!("loss ({:.0}s)", t.seconds), t.loss, 1e-4),
        Check::le("Casimir drift", cmp.model.casimir_drift(), 1e-12),
        Check::le("energy ratio vs first 500 steps", energy_oscillation_ratio(&cmp.model.energy, 501), 10.0),
    ]
}

fn training_so3() -> Vec<Check> {
    let t = train_protocol(Case::So3, None);
    let cmp = unseen_comparison(&t, 500);
    let lam = lyapunov(&t.system, &cmp.model_states[0], &LyapunovConfig::default()).unwrap().lambda;
    let (time, mae) = (&cmp.model.t, &cmp.model.mae);
    let a = fit_mae_envelope(time, mae, lam, 50.0);
    vec![
        Check::le(format!("loss ({:.0}s)", t.seconds), t.loss, 1e-5),
        Check::le(format!("MAE / (A e^(lambda t)) on [0,50], lambda {lam:.4}, A {a:.2e}"), mae_bound_ratio(time, mae, lam, a, 50.0), 1.0),
    ]
}

fn training_se3() -> Vec<Check> {
    let t = train_protocol(Case::Se3, None);
    let cmp = unseen_comparison(&t, 5000);
    let lam = lyapunov(&t.system, &cmp.model_states[0], &LyapunovConfig::default()).unwrap().lambda;
    let growth = growth_exponent(&cmp.model.t, &cmp.model.mae, 5.0, 50.0).unwrap();
    let cs = &cmp.model.casimirs;
    vec![
        Check::le(format!("loss ({:.0}s)", t.seconds), t.loss, 7e-4),
        Check::le("C1 drift", relative_drift(&cs[0]), 1e-12),
        Check::le("C2 drift", relative_drift(&cs[1]), 1e-12),
        Check::le(format!("lambda {lam:.4} > 0, growth exponent on [5,50] vs 1.5 lambda"), growth, 1.5 * lam),
        Check::le("-lambda", -lam, -f64::MIN_POSITIVE),
    ]
}

fn altered_hamiltonian() -> Vec<Check> {
    let t = train_protocol(Case::So3, Some(0.1));
    let cmp = unseen_comparison(&t, 5000);
    vec![
        Check::le(format!("loss ({:.0}s)", t.seconds), t.loss, 5e-4),
        Check::le("Casimir drift", cmp.model.casimir_drift(), 1e-12),
    ]
}

fn random_unit(r: &mut rand_chacha::ChaCha8Rng) -> Vec3 {
    loop {
        let a = uniform_vec(r, -1.0, 1.0);
        if a.norm() > 0.1 {
            return a.normalize();
        }
    }
}

fn lie_properties(c: &mut Vec<Check>) {
    let mut r = rng(201);
    let (mut roundtrip, mut inverse, mut additive, mut conj, mut pairing) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let v = uniform_vec(&mut r, -10.0, 10.0);
        roundtrip = roundtrip.max((vee(&hat(&v)) - v).amax());
        let a = random_unit(&mut r);
        let (p1, p2) = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let rm = |phi: f64| rot(&a, phi).unwrap().into_inner();
        inverse = inverse.max((rm(p1) * rm(-p1) - Mat3::identity()).amax());
        additive = additive.max((rm(p1) * rm(p2) - rm(p1 + p2)).amax());
        let big_r = random_rotation(&mut r, 3.0);
        let m = Mat3::from_fn(|_, _| r.random_range(-5.0..5.0));
        conj = conj.max((vee(&(big_r * m * big_r.transpose())) - big_r * vee(&m)).amax());
        let [x, y, z, w, u, t] = [(); 6].map(|_| uniform_vec(&mut r, -2.0, 2.0));
        let (sa, sb) = ad_star_se3(&x, &y, &z, &w);
        let (xa, xb) = ad_se3(&x, &y, &u, &t);
        pairing = pairing.max((sa.dot(&u) + sb.dot(&t) - z.dot(&xa) - w.dot(&xb)).abs());
    }
    c.push(Check::le("vee(hat v) = v", roundtrip, 1e-16));
    c.push(Check::le("rot inverse", inverse, 1e-14));
    c.push(Check::le("rot additivity", additive, 1e-13));
    c.push(Check::le("conjugation commutes with vee", conj, 1e-13));
    c.push(Check::le("coadjoint pairing", pairing, 1e-13));
}

fn system_properties(c: &mut Vec<Check>) {
    let mut r = rng(202);
    let mut ortho = 0.0f64;
    let mut tangent = 0.0f64;
    let mut direction = 0.0f64;
    for case in Case::ALL {
        let sys = System::default_for(case);
        let alt = System::default_for(case).with_zeta(Some(0.1)).unwrap();
        for _ in 0..100 {
            let x = random_state(&mut r, case).to_flat();
            let mut f = vec![0.0; x.len()];
            sys.field(&x, &mut f).unwrap();
            let mut grads = vec![fd_grad(&x, |y| sys.energy(y).unwrap())];
            for k in 0..case.n_casimirs() {
                grads.push(fd_grad(&x, |y| sys.casimirs(y).unwrap()[k]));
            }
            for g in &grads {
                ortho = ortho.max(dot(g, &f).abs() / (1.0 + norm(g) * norm(&f)));
            }
            let s = State::from_flat(case, &x).unwrap();
            if let (Some(p), Some(dp)) = (s.orientation(), sys.field_of(&s).unwrap().orientation()) {
                tangent = tangent.max((dp.transpose() * p + p.transpose() * dp).amax());
            }
            let mut fa = vec![0.0; x.len()];
            alt.field(&x, &mut fa).unwrap();
            let scale = dot(&fa, &f) / dot(&f, &f);
            let (nf, nfa) = (norm(&f), norm(&fa));
            let gap = f.iter().zip(&fa).map(|(a, b)| (a / nf - b / nfa).abs()).fold(0.0, f64::max);
            direction = direction.max(if scale > 0.0 && scale <= 1.0 + 1e-15 { gap } else { f64::INFINITY });
        }
    }
    let so3 = So3System::default();
    let mut reaction = 0.0f64;
    for _ in 0..100 {
        let s = random_so3(&mut r);
        let g = so3.partials(&s).unwrap().dp * 2.0;
        let f1 = vee(&(g * s.p.transpose()));
        let f2 = -vee(&(s.p.transpose() * g));
        reaction = reaction.max((f1 + s.p * f2).amax());
    }
    c.push(Check::le("field orthogonal to grad h and grad C", ortho, 1e-9));
    c.push(Check::le("action-reaction", reaction, 1e-12));
    c.push(Check::le("d/dt(p^T p) on the group", tangent, 1e-12));
    c.push(Check::le("altered field direction", direction, 1e-12));
}

fn ground_truth_properties(c: &mut Vec<Check>) {
    let inertia = Vec3::new(1.0, 2.0, 3.0);
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let mu = Vec3::from_column_slice(y);
        dy.copy_from_slice(mu.cross(&mu.component_div(&inertia)).as_slice());
        Ok(())
    };
    let y0 = [0.3, 1.2, -0.8];
    let reference = integrate(f, &y0, 20.0, 1e-14, 1e-16).unwrap();
    let e6 = max_abs_diff(&integrate(f, &y0, 20.0, 1e-6, 1e-8).unwrap(), &reference);
    let e7 = max_abs_diff(&integrate(f, &y0, 20.0, 1e-7, 1e-9).unwrap(), &reference);
    c.push(Check::le("integrator error ratio per 10x tolerance (>= 4)", 4.0 / (e6 / e7), 1.0));

    let sys = System::default_for(Case::So3);
    let traj = ground_truth(&sys, &eval_state(Case::So3, 3), 1.0, 501, Tolerances::GROUND_TRUTH).unwrap();
    let e: Vec<f64> = traj.states.iter().map(|x| sys.energy(x).unwrap()).collect();
    c.push(Check::le("so3 energy drift over t=500", relative_drift(&e), 1e-7));

    let cfg = SamplerConfig { n_traj: 3, ..SamplerConfig::training(Case::Se3).with_seed(5) };
    let se3 = System::default_for(Case::Se3);
    let same = generate_dataset(&se3, &cfg).unwrap() == generate_dataset(&se3, &cfg).unwrap();
    c.push(Check::le("dataset regeneration differs", if same { 0.0 } else { 1.0 }, 0.0));
}

fn layer_properties(c: &mut Vec<Check>) {
    let mut r = rng(203);
    let (mut casimir, mut manifold, mut compose, mut inverse) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for layer in all_layer_kinds(0).into_iter().chain(all_layer_kinds(1)).chain(all_layer_kinds(2)) {
        for _ in 0..30 {
            let case = layer.case();
            let mut x = random_state(&mut r, case).to_flat();
            let n_mom = match case {
                Case::So2 => 2,
                Case::So3 => 6,
                Case::Se3 => 12,
            };
            let stretch = r.random_range(0.1..5.0);
            x.iter_mut().take(n_mom).for_each(|v| *v = (*v * stretch).clamp(-10.0, 10.0));
            let s = State::from_flat(case, &x).unwrap();
            let prm = random_params(&mut r, layer.n_params(), 2.0);
            let out = layer.apply(Activation::Tanh, &prm, 0.1, &s).unwrap();
            // Absolute 1e-13, or a few ulps of the products inside the Casimirs when those exceed it.
            let v = if let State::Se3(st) = &s { st.v.norm() } else { 0.0 };
            let scale = x[..n_mom].iter().map(|a| a * a).sum::<f64>() * (1.0 + v);
            let tol = 1e-13f64.max(4.0 * f64::EPSILON * scale);
            casimir = casimir.max(max_abs_diff(&s.casimirs(), &out.casimirs()) / tol);
            if let (Some(a), Some(b)) = (s.orientation(), out.orientation()) {
                manifold = manifold.max(orthogonality_defect(b) - orthogonality_defect(a));
            }
            let two = layer.apply(Activation::Tanh, &prm, 0.07, &layer.apply(Activation::Tanh, &prm, 0.03, &s).unwrap()).unwrap();
            compose = compose.max(max_abs_diff(&two.to_flat(), &out.to_flat()));
            let back = layer.apply(Activation::Tanh, &prm, -0.1, &out).unwrap();
            inverse = inverse.max(max_abs_diff(&back.to_flat(), &x));
        }
    }
    c.push(Check::le("layer Casimir gap / tolerance", casimir, 1.0));
    c.push(Check::le("layer orthogonality growth", manifold, 5e-15));
    c.push(Check::le("layer flows compose", compose, 1e-12));
    c.push(Check::le("layer inverse flow", inverse, 1e-12));
}

fn network_properties(c: &mut Vec<Check>) {
    let mut r = rng(204);
    let mut inv = 0.0f64;
    let mut counts = 0.0f64;
    for case in Case::ALL {
        for cycles in 1..=5 {
            let net = Network::build(NetworkSpec::new(case).with_cycles(cycles)).unwrap();
            let expected = cycles * NetworkSpec::params_per_cycle(case);
            counts = counts.max((net.n_params() as f64 - expected as f64).abs());
            let p = random_params(&mut r, net.n_params(), 1.0);
            let s = random_state(&mut r, case);
            let back = net.inverse(&p, &net.forward(&p, &s).unwrap()).unwrap();
            inv = inv.max(max_abs_diff(&back.to_flat(), &s.to_flat()));
        }
    }
    c.push(Check::le("forward then inverse", inv, 1e-11));
    c.push(Check::le("parameter count mismatch", counts, 0.0));

    // Drift per step over 1000 steps, at the default initialization.
    let mut slope = 0.0f64;
    for case in [Case::So2, Case::So3, Case::Se3] {
        for seed in 0..5 {
            slope = slope.max(rollout_casimir_drift(case, seed, 1000).0 / 1000.0);
        }
    }
    c.push(Check::le("Casimir drift per step", slope, 1e-15));
}

fn training_properties(c: &mut Vec<Check>) {
    let mut r = rng(205);
    let net = Network::build(NetworkSpec::new(Case::So3)).unwrap();
    let teacher = random_params(&mut r, 108, 0.3);
    let inputs: Vec<State> = (0..40).map(|_| random_state(&mut r, Case::So3)).collect();
    let targets = inputs.iter().map(|s| net.forward(&teacher, s).unwrap()).collect();
    let batch = Batch::from_states(inputs, targets).unwrap();
    let init = random_params(&mut r, 108, 0.1);
    let cfg = TrainConfig { epochs: 20, ..TrainConfig::default() };
    let (p1, r1) = train(&net, &init, &batch, &cfg).unwrap();
    let (p2, r2) = train(&net, &init, &batch, &cfg).unwrap();
    let same = p1 == p2 && r1.losses == r2.losses;
    c.push(Check::le("training runs differ", if same { 0.0 } else { 1.0 }, 0.0));
    c.push(Check::le("final - initial loss", r1.final_loss - loss(&net, &init, &batch).unwrap(), 0.0));
}

fn diagnostics_and_cli_properties(c: &mut Vec<Check>) {
    let mut r = rng(206);
    let xs: Vec<State> = (0..10).map(|_| random_state(&mut r, Case::Se3)).collect();
    let self_mae = mae_series(&xs, &xs, MaeSelection::All).unwrap().into_iter().fold(0.0, f64::max);
    c.push(Check::le("mae(x, x)", self_mae, 0.0));

    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let path = dir.path().join(name);
        let args = ["clpnet", "gen-data", "--case", "se3", "--seed", "9", "--n-traj", "2", "--n-steps", "5", "--out"];
        let cli = Cli::try_parse_from(args.iter().copied().chain([path.to_str().unwrap()])).unwrap();
        run(&cli, &mut Vec::new()).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    c.push(Check::le("seeded gen-data files differ", if files[0] == files[1] { 0.0 } else { 1.0 }, 0.0));

    let net = Network::build(NetworkSpec::new(Case::Se3)).unwrap();
    let params = random_params(&mut r, 189, 0.2);
    let path = dir.path().join("m.json");
    Model::new(&net, params.clone()).unwrap().save(&path).unwrap();
    let m = Model::load(&path).unwrap();
    let s0 = random_state(&mut r, Case::Se3);
    let same = m.network().unwrap().rollout(&m.params, &s0, 100).unwrap() == net.rollout(&params, &s0, 100).unwrap();
    c.push(Check::le("model round trip changes rollout", if same { 0.0 } else { 1.0 }, 0.0));
}

fn property_suite() -> Vec<Check> {
    let mut c = Vec::new();
    lie_properties(&mut c);
    system_properties(&mut c);
    ground_truth_properties(&mut c);
    layer_properties(&mut c);
    network_properties(&mut c);
    training_properties(&mut c);
    diagnostics_and_cli_properties(&mut c);
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Vec<Check>); 9] = [
        ("layer exactness vs ODE oracle", layer_exactness),
        ("Casimir precision, 5000-step untrained rollouts", casimir_precision),
        ("SE(3) ground truth over t=500", ground_truth_fidelity),
        ("gradient vs finite differences", gradient_correctness),
        ("training so2", training_so2),
        ("training so3", training_so3),
        ("training se3", training_se3),
        ("altered Hamiltonian, zeta=0.1", altered_hamiltonian),
        ("property suite", property_suite),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let checks = f();
        let (pass, detail) = summarize(&checks);
        failed += usize::from(!pass);
        println!(
            "{} {id}. {name} [{:.1}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
