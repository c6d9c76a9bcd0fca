#![allow(dead_code)]

use clpnet::lie::{rot, Mat3, Vec3};
use clpnet::systems::{Se3State, So2State, So3State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(r.random_range(lo..hi), r.random_range(lo..hi), r.random_range(lo..hi))
}

pub fn random_rotation(r: &mut ChaCha8Rng, max_angle: f64) -> Mat3 {
    let axis = loop {
        let a = uniform_vec(r, -1.0, 1.0);
        if a.norm() > 0.1 {
            break a;
        }
    };
    rot(&axis, r.random_range(-max_angle..max_angle)).unwrap().into_inner()
}

pub fn random_so3(r: &mut ChaCha8Rng) -> So3State {
    So3State::new(uniform_vec(r, -2.0, 2.0), uniform_vec(r, -2.0, 2.0), random_rotation(r, 1.5))
}

pub fn random_se3(r: &mut ChaCha8Rng) -> Se3State {
    Se3State {
        alpha1: uniform_vec(r, -2.0, 2.0),
        beta1: uniform_vec(r, -2.0, 2.0),
        alpha2: uniform_vec(r, -2.0, 2.0),
        beta2: uniform_vec(r, -2.0, 2.0),
        q: random_rotation(r, 1.5),
        v: uniform_vec(r, -1.5, 1.5),
    }
}

pub fn random_so2(r: &mut ChaCha8Rng) -> So2State {
    So2State::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(0.0..6.28))
}

/// Fourth-order central-difference gradient.
pub fn fd_grad(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            let h = 1e-3 * (1.0 + x[k].abs());
            let mut at = |d: f64| {
                y[k] = x[k] + d;
                let v = f(&y);
                y[k] = x[k];
                v
            };
            (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

use clpnet::integrate::{integrate_grid, Stats, Tolerances};
use clpnet::layers::{Activation, Body, Layer, Se3Kind, So2Sub};
use clpnet::systems::{
    se3_field_from_partials, so2_field_from_partials, so3_field_from_partials, Se3Partials, So2Partials, So3Partials,
    State,
};
use clpnet::Case;

/// Matrix `M ∘ σ(p) + N` built entry by entry.
fn kick_matrix(params: &[f64], act: Activation, p: &Mat3) -> Mat3 {
    Mat3::from_fn(|i, j| params[3 * i + j] * act.eval(p[(i, j)]) + params[9 + 3 * i + j])
}

fn rate(params: &[f64], act: Activation, x: f64) -> f64 {
    params[0] * act.eval(params[1] * x) + params[2]
}

/// Time derivative of the test Hamiltonian behind `layer`, assembled from
/// the general coupled equations rather than from the layer formulas.
pub fn layer_ode(layer: &Layer, params: &[f64], act: Activation, st: &State) -> State {
    match (layer, st) {
        (Layer::So2(sub), State::So2(s)) => {
            let mut d = So2Partials { dmu1: 0.0, dmu2: 0.0, dphi: 0.0 };
            match sub {
                So2Sub::Rot1 => d.dmu1 = rate(params, act, s.mu1),
                So2Sub::Rot2 => d.dmu2 = rate(params, act, s.mu2),
                So2Sub::Kick => {
                    // Torque about e3 of the embedded kick with a 2×2-supported G.
                    let p = s.embed().p;
                    let mut full = [0.0; 18];
                    for (k, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                        full[3 * i + j] = params[k];
                        full[9 + 3 * i + j] = params[4 + k];
                    }
                    let mut g = kick_matrix(&full, act, &p);
                    for i in 0..3 {
                        for j in 0..3 {
                            if i == 2 || j == 2 {
                                g[(i, j)] = 0.0;
                            }
                        }
                    }
                    d.dphi = clpnet::lie::vee(&(g * p.transpose())).z;
                }
            }
            State::So2(so2_field_from_partials(&d))
        }
        (_, State::So3(s)) => {
            let mut d = So3Partials { dmu1: Vec3::zeros(), dmu2: Vec3::zeros(), dp: Mat3::zeros() };
            match layer {
                Layer::So3Rotation { body: Body::One, axis } => d.dmu1[*axis] = rate(params, act, s.mu1[*axis]),
                Layer::So3Rotation { body: Body::Two, axis } => d.dmu2[*axis] = rate(params, act, s.mu2[*axis]),
                Layer::So3Kick => d.dp = kick_matrix(params, act, &s.p) * 0.5,
                _ => unreachable!(),
            }
            State::So3(so3_field_from_partials(s, &d))
        }
        (Layer::Se3 { kind, axis }, State::Se3(s)) => {
            let z = Vec3::zeros();
            let mut d = Se3Partials { a1: z, b1: z, a2: z, b2: z, dq: Mat3::zeros(), dv: z };
            let i = *axis;
            match kind {
                Se3Kind::Rotate1 => d.a1[i] = rate(params, act, s.alpha1[i]),
                Se3Kind::Shift1 => d.b1[i] = rate(params, act, s.beta1[i]),
                Se3Kind::Rotate2 => d.a2[i] = rate(params, act, s.alpha2[i]),
                Se3Kind::Shift2 => d.b2[i] = rate(params, act, s.beta2[i]),
                Se3Kind::Orientation => d.dq = kick_matrix(params, act, &s.q) * 0.5,
                Se3Kind::Translation => d.dv[i] = params[1] * act.eval(params[0] * s.v[i]) + params[2],
            }
            State::Se3(se3_field_from_partials(s, &d))
        }
        _ => unreachable!(),
    }
}

/// Numerical time-`dt` flow of [`layer_ode`].
pub fn layer_ode_flow(layer: &Layer, params: &[f64], act: Activation, st: &State, dt: f64, rtol: f64) -> State {
    let case = st.case();
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let s = State::from_flat(case, y)?;
        layer_ode(layer, params, act, &s).write_flat(dy);
        Ok(())
    };
    let out = integrate_grid(f, &st.to_flat(), &[0.0, dt], Tolerances::new(rtol, rtol * 1e-2).unwrap(), &mut Stats::default())
        .unwrap();
    State::from_flat(case, &out[1]).unwrap()
}

/// Every distinct layer kind: 3 planar, 7 SO(3) (body × axis plus kick), 6 SE(3) on axis `se3_axis`.
pub fn all_layer_kinds(se3_axis: usize) -> Vec<Layer> {
    let mut v = vec![Layer::So2(So2Sub::Rot1), Layer::So2(So2Sub::Rot2), Layer::So2(So2Sub::Kick)];
    for body in [Body::One, Body::Two] {
        for axis in 0..3 {
            v.push(Layer::So3Rotation { body, axis });
        }
    }
    v.push(Layer::So3Kick);
    for kind in Se3Kind::ALL {
        v.push(Layer::Se3 { kind, axis: se3_axis });
    }
    v
}

pub fn random_state(r: &mut ChaCha8Rng, case: Case) -> State {
    match case {
        Case::So2 => State::So2(random_so2(r)),
        Case::So3 => State::So3(random_so3(r)),
        Case::Se3 => State::Se3(random_se3(r)),
    }
}

pub fn random_params(r: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-scale..scale)).collect()
}
