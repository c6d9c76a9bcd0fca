use super::{frob, Activation, Body, KickParams, RotationParams};
use crate::lie::{basis, basis_rotation, hat, AxisRotation};
use crate::systems::So3State;

/// Flow of `h = ∫(α σ(β μ_i) + γ) dμ_i` on one body: a rotation about `e_i`
/// by `−θ` that also carries `p` along.
pub fn so3_momentum_rotation(s: &So3State, body: Body, axis: usize, prm: &RotationParams, act: Activation, dt: f64) -> So3State {
    match body {
        Body::One => {
            let r = AxisRotation::new(axis, -prm.angle(act, s.mu1[axis], dt));
            So3State::new(r.apply(&s.mu1), s.mu2, r.left_mul(&s.p))
        }
        Body::Two => {
            let r = AxisRotation::new(axis, -prm.angle(act, s.mu2[axis], dt));
            So3State::new(s.mu1, r.apply(&s.mu2), r.right_mul_transpose(&s.p))
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn so3_momentum_rotation_vjp(
    s: &So3State,
    body: Body,
    axis: usize,
    prm: &RotationParams,
    act: Activation,
    dt: f64,
    g: &So3State,
    grad: &mut [f64],
) -> So3State {
    let e = basis(axis);
    let eh = hat(&e);
    match body {
        Body::One => {
            let x = s.mu1[axis];
            let r = basis_rotation(axis, -prm.angle(act, x, dt));
            let mu = r * s.mu1;
            let p = r * s.p;
            let g_theta = -g.mu1.dot(&e.cross(&mu)) - frob(&g.p, &(eh * p));
            let mut out = So3State::new(r.transpose() * g.mu1, g.mu2, r.transpose() * g.p);
            out.mu1[axis] += prm.angle_vjp(act, x, dt, g_theta, grad);
            out
        }
        Body::Two => {
            let x = s.mu2[axis];
            let r = basis_rotation(axis, -prm.angle(act, x, dt));
            let mu = r * s.mu2;
            let p = s.p * r.transpose();
            let g_theta = -g.mu2.dot(&e.cross(&mu)) + frob(&g.p, &(p * eh));
            let mut out = So3State::new(g.mu1, r.transpose() * g.mu2, g.p * r);
            out.mu2[axis] += prm.angle_vjp(act, x, dt, g_theta, grad);
            out
        }
    }
}

/// Flow of a Hamiltonian of `p` alone: momenta receive opposite torques, `p` is fixed.
pub fn so3_orientation_kick(s: &So3State, prm: &KickParams, act: Activation, dt: f64) -> So3State {
    let (d1, d2) = prm.increments(act, &s.p);
    So3State::new(s.mu1 + d1 * dt, s.mu2 + d2 * dt, s.p)
}

pub fn so3_orientation_kick_vjp(s: &So3State, prm: &KickParams, act: Activation, dt: f64, g: &So3State, grad: &mut [f64]) -> So3State {
    let gp = prm.increments_vjp(act, &s.p, dt, &g.mu1, &g.mu2, grad);
    So3State::new(g.mu1, g.mu2, g.p + gp)
}
