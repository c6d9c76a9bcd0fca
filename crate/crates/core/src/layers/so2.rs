use super::{Activation, RotationParams};
use crate::systems::So2State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum So2Sub {
    Rot1,
    Rot2,
    Kick,
}

/// Planar kick: `τ = e3·vee(G pᵀ)` with `p = Rz(Φ)` and `G` supported on the
/// upper-left 2×2 block. Parameters `[M11, M12, M21, M22, N11, N12, N21, N22]`.
fn torque(params: &[f64], act: Activation, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let p = [c, -s, s, c];
    let g: [f64; 4] = std::array::from_fn(|k| params[k] * act.eval(p[k]) + params[4 + k]);
    0.5 * (g[2] * c - g[3] * s - g[0] * s - g[1] * c)
}

pub fn so2_layer(st: &So2State, sub: So2Sub, params: &[f64], act: Activation, dt: f64) -> So2State {
    match sub {
        So2Sub::Rot1 => {
            let th = RotationParams::from_slice(params).angle(act, st.mu1, dt);
            So2State::new(st.mu1, st.mu2, st.phi - th)
        }
        So2Sub::Rot2 => {
            let th = RotationParams::from_slice(params).angle(act, st.mu2, dt);
            So2State::new(st.mu1, st.mu2, st.phi + th)
        }
        So2Sub::Kick => {
            let t = torque(params, act, st.phi) * dt;
            So2State::new(st.mu1 + t, st.mu2 - t, st.phi)
        }
    }
}

pub fn so2_layer_vjp(st: &So2State, sub: So2Sub, params: &[f64], act: Activation, dt: f64, g: &So2State, grad: &mut [f64]) -> So2State {
    match sub {
        So2Sub::Rot1 => {
            let gx = RotationParams::from_slice(params).angle_vjp(act, st.mu1, dt, -g.phi, grad);
            So2State::new(g.mu1 + gx, g.mu2, g.phi)
        }
        So2Sub::Rot2 => {
            let gx = RotationParams::from_slice(params).angle_vjp(act, st.mu2, dt, g.phi, grad);
            So2State::new(g.mu1, g.mu2 + gx, g.phi)
        }
        So2Sub::Kick => {
            let gt = dt * (g.mu1 - g.mu2);
            let (s, c) = st.phi.sin_cos();
            let p = [c, -s, s, c];
            let dp = [-s, -c, c, -s];
            let dtau_dg = [-0.5 * s, -0.5 * c, 0.5 * c, -0.5 * s];
            let mut gphi = g.phi;
            let mut gk = [0.0; 4];
            for k in 0..4 {
                let (sig, dsig) = act.eval_deriv(p[k]);
                let gg = params[k] * sig + params[4 + k];
                gk[k] = gt * dtau_dg[k];
                grad[k] += gk[k] * sig;
                grad[4 + k] += gk[k];
                gphi += gk[k] * params[k] * dsig * dp[k];
                // Explicit dependence of τ on (c, s) at fixed G.
                let dtau_dphi_fixed_g = match k {
                    0 => -0.5 * gg * c,
                    1 => 0.5 * gg * s,
                    2 => -0.5 * gg * s,
                    _ => -0.5 * gg * c,
                };
                gphi += gt * dtau_dphi_fixed_g;
            }
            So2State::new(g.mu1, g.mu2, gphi)
        }
    }
}
