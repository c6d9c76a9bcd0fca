use super::{frob, Activation, KickParams, RotationParams};
use crate::error::{Error, Result};
use crate::lie::{basis, basis_rotation, hat, rotation_inverse, AxisRotation};
use crate::systems::Se3State;

/// The six elementary SE(3) flows, numbered as in the network cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Se3Kind {
    /// `h = f(α1_i)`: common rotation of `α1, β1, Q, v`.
    Rotate1,
    /// `h = f(β1_i)`: shear of `α1` and translation of `v`.
    Shift1,
    /// `h = f(α2_i)`: rotation of `α2, β2` and right action on `Q`.
    Rotate2,
    /// `h = f(β2_i)`: shear of `α2` and translation of `v` along `Q e_i`.
    /// The shear is written as `Q⁻¹(Qe_i × Qβ2)`, equal to `e_i × β2` on SO(3).
    Shift2,
    /// `h = h(Q)`: opposite torques on both bodies.
    Orientation,
    /// `h = h(v_i)`: forces along `e_i`.
    Translation,
}

impl Se3Kind {
    pub const ALL: [Se3Kind; 6] = [
        Se3Kind::Rotate1,
        Se3Kind::Shift1,
        Se3Kind::Rotate2,
        Se3Kind::Shift2,
        Se3Kind::Orientation,
        Se3Kind::Translation,
    ];

    pub fn from_index(k: usize) -> Result<Se3Kind> {
        Se3Kind::ALL.get(k.wrapping_sub(1)).copied().ok_or(Error::UnknownLayerKind(k))
    }

    pub fn index(self) -> usize {
        Se3Kind::ALL.iter().position(|&k| k == self).expect("listed") + 1
    }

    pub fn is_per_axis(self) -> bool {
        self != Se3Kind::Orientation
    }
}

pub fn se3_step(s: &Se3State, kind: Se3Kind, axis: usize, params: &[f64], act: Activation, dt: f64) -> Se3State {
    let e = basis(axis);
    let mut o = *s;
    match kind {
        Se3Kind::Rotate1 => {
            let r = AxisRotation::new(axis, -RotationParams::from_slice(params).angle(act, s.alpha1[axis], dt));
            o.alpha1 = r.apply(&s.alpha1);
            o.beta1 = r.apply(&s.beta1);
            o.q = r.left_mul(&s.q);
            o.v = r.apply(&s.v);
        }
        Se3Kind::Shift1 => {
            let th = RotationParams::from_slice(params).angle(act, s.beta1[axis], dt);
            o.alpha1 = s.alpha1 - e.cross(&s.beta1) * th;
            o.v = s.v - e * th;
        }
        Se3Kind::Rotate2 => {
            let r = AxisRotation::new(axis, -RotationParams::from_slice(params).angle(act, s.alpha2[axis], dt));
            o.alpha2 = r.apply(&s.alpha2);
            o.beta2 = r.apply(&s.beta2);
            o.q = r.right_mul_transpose(&s.q);
        }
        Se3Kind::Shift2 => {
            let th = RotationParams::from_slice(params).angle(act, s.beta2[axis], dt);
            let qe = s.q.column(axis).into_owned();
            o.alpha2 = s.alpha2 - rotation_inverse(&s.q) * qe.cross(&(s.q * s.beta2)) * th;
            o.v = s.v + qe * th;
        }
        Se3Kind::Orientation => {
            let (d1, d2) = KickParams::from_slice(params).increments(act, &s.q);
            o.alpha1 = s.alpha1 + d1 * dt;
            o.alpha2 = s.alpha2 + d2 * dt;
        }
        Se3Kind::Translation => {
            let w = e * translation_rate(params, act, s.v[axis]).0;
            o.alpha1 = s.alpha1 + s.v.cross(&w) * dt;
            o.beta1 = s.beta1 + w * dt;
            o.beta2 = s.beta2 - rotation_inverse(&s.q) * w * dt;
        }
    }
    o
}

/// `(M σ(L x) + N, σ(Lx), σ'(Lx))` for parameters `[L, M, N]`.
fn translation_rate(params: &[f64], act: Activation, x: f64) -> (f64, f64, f64) {
    let (s, ds) = act.eval_deriv(params[0] * x);
    (params[1] * s + params[2], s, ds)
}

#[allow(clippy::too_many_arguments)]
pub fn se3_step_vjp(
    s: &Se3State,
    kind: Se3Kind,
    axis: usize,
    params: &[f64],
    act: Activation,
    dt: f64,
    g: &Se3State,
    grad: &mut [f64],
) -> Se3State {
    let e = basis(axis);
    let eh = hat(&e);
    let mut c = *g;
    match kind {
        Se3Kind::Rotate1 => {
            let prm = RotationParams::from_slice(params);
            let x = s.alpha1[axis];
            let r = basis_rotation(axis, -prm.angle(act, x, dt));
            let rt = r.transpose();
            let (a, b, q, v) = (r * s.alpha1, r * s.beta1, r * s.q, r * s.v);
            let g_theta = -g.alpha1.dot(&e.cross(&a)) - g.beta1.dot(&e.cross(&b)) - g.v.dot(&e.cross(&v)) - frob(&g.q, &(eh * q));
            c.alpha1 = rt * g.alpha1;
            c.beta1 = rt * g.beta1;
            c.q = rt * g.q;
            c.v = rt * g.v;
            c.alpha1[axis] += prm.angle_vjp(act, x, dt, g_theta, grad);
        }
        Se3Kind::Shift1 => {
            let prm = RotationParams::from_slice(params);
            let x = s.beta1[axis];
            let th = prm.angle(act, x, dt);
            let g_theta = -g.alpha1.dot(&e.cross(&s.beta1)) - g.v.dot(&e);
            c.beta1 += e.cross(&g.alpha1) * th;
            c.beta1[axis] += prm.angle_vjp(act, x, dt, g_theta, grad);
        }
        Se3Kind::Rotate2 => {
            let prm = RotationParams::from_slice(params);
            let x = s.alpha2[axis];
            let r = basis_rotation(axis, -prm.angle(act, x, dt));
            let rt = r.transpose();
            let (a, b, q) = (r * s.alpha2, r * s.beta2, s.q * rt);
            let g_theta = -g.alpha2.dot(&e.cross(&a)) - g.beta2.dot(&e.cross(&b)) + frob(&g.q, &(q * eh));
            c.alpha2 = rt * g.alpha2;
            c.beta2 = rt * g.beta2;
            c.q = g.q * r;
            c.alpha2[axis] += prm.angle_vjp(act, x, dt, g_theta, grad);
        }
        Se3Kind::Shift2 => {
            let prm = RotationParams::from_slice(params);
            let x = s.beta2[axis];
            let th = prm.angle(act, x, dt);
            let qe = s.q.column(axis).into_owned();
            let qb = s.q * s.beta2;
            let qinv = rotation_inverse(&s.q);
            let w = qinv * qe.cross(&qb);
            let k = qinv.transpose() * g.alpha2;
            let g_theta = -g.alpha2.dot(&w) + g.v.dot(&qe);
            let kq = k.cross(&qe);
            c.beta2 -= s.q.transpose() * kq * th;
            c.q += (g.v * e.transpose() + k * w.transpose() - qb.cross(&k) * e.transpose() - kq * s.beta2.transpose()) * th;
            c.beta2[axis] += prm.angle_vjp(act, x, dt, g_theta, grad);
        }
        Se3Kind::Orientation => {
            let gq = KickParams::from_slice(params).increments_vjp(act, &s.q, dt, &g.alpha1, &g.alpha2, grad);
            c.q += gq;
        }
        Se3Kind::Translation => {
            let x = s.v[axis];
            let (omega, sig, dsig) = translation_rate(params, act, x);
            let w = e * omega;
            let qinv = rotation_inverse(&s.q);
            let k = qinv.transpose() * g.beta2;
            let gw = (g.alpha1.cross(&s.v) + g.beta1 - k) * dt;
            c.v += w.cross(&g.alpha1) * dt;
            c.q += k * (qinv * w).transpose() * dt;
            let gom = gw[axis];
            grad[0] += gom * params[1] * dsig * x;
            grad[1] += gom * sig;
            grad[2] += gom;
            c.v[axis] += gom * params[1] * dsig * params[0];
        }
    }
    c
}
