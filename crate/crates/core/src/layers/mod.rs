//! Closed-form flows of parameterized test Hamiltonians.
//!
//! Each layer maps a state to the exact time-`dt` flow of a Hamiltonian
//! whose flow is elementary: a rotation at momentum-dependent rate, a shear,
//! or a kick depending only on the group element. Flows of Hamiltonians are
//! Poisson maps, so every Casimir is kept up to rounding.
//!
//! Every layer also has a hand-derived vector-Jacobian product used for
//! training.

pub mod se3;
pub mod so2;
pub mod so3;

pub use se3::{se3_step, se3_step_vjp, Se3Kind};
pub use so2::{so2_layer, so2_layer_vjp, So2Sub};
pub use so3::{so3_momentum_rotation, so3_momentum_rotation_vjp, so3_orientation_kick, so3_orientation_kick_vjp};

use crate::error::{Error, Result};
use crate::lie::{rotation_inverse, vee, Mat3, Vec3};
use crate::systems::State;
use crate::Case;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    #[inline]
    pub fn deriv(self, x: f64) -> f64 {
        self.eval_deriv(x).1
    }

    /// `(σ(x), σ'(x))`.
    #[inline]
    pub fn eval_deriv(self, x: f64) -> (f64, f64) {
        let s = self.eval(x);
        match self {
            Activation::Tanh => (s, 1.0 - s * s),
            Activation::Sigmoid => (s, s * (1.0 - s)),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Body {
    One,
    Two,
}

/// Gains of a rotation or shear layer: rate `α σ(β x) + γ` for scalar argument `x`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RotationParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        RotationParams { alpha, beta, gamma }
    }

    pub fn from_slice(p: &[f64]) -> Self {
        RotationParams::new(p[0], p[1], p[2])
    }

    pub fn angle(&self, act: Activation, x: f64, dt: f64) -> f64 {
        (self.alpha * act.eval(self.beta * x) + self.gamma) * dt
    }

    /// Pulls `gθ` back to `x` and accumulates `[∂α, ∂β, ∂γ]` into `grad`.
    /// Returns `∂L/∂x`.
    pub(crate) fn angle_vjp(&self, act: Activation, x: f64, dt: f64, g_theta: f64, grad: &mut [f64]) -> f64 {
        let (s, ds) = act.eval_deriv(self.beta * x);
        grad[0] += g_theta * s * dt;
        grad[1] += g_theta * self.alpha * ds * x * dt;
        grad[2] += g_theta * dt;
        g_theta * self.alpha * self.beta * ds * dt
    }
}

/// Matrices of an orientation kick: `G = M ∘ σ(p) + N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickParams {
    pub m: Mat3,
    pub n: Mat3,
}

impl Default for KickParams {
    fn default() -> Self {
        KickParams { m: Mat3::zeros(), n: Mat3::zeros() }
    }
}

impl KickParams {
    /// `[M row-major, N row-major]`.
    pub fn from_slice(p: &[f64]) -> Self {
        KickParams { m: Mat3::from_row_slice(&p[0..9]), n: Mat3::from_row_slice(&p[9..18]) }
    }

    pub fn gradient(&self, act: Activation, p: &Mat3) -> Mat3 {
        p.map(|x| act.eval(x)).component_mul(&self.m) + self.n
    }

    /// Momentum increments `(d, −p⁻¹ d)` with `d = vee(G pᵀ)`, per unit time.
    /// On SO(3) the second is `−vee(pᵀ G)`.
    pub fn increments(&self, act: Activation, p: &Mat3) -> (Vec3, Vec3) {
        let g = self.gradient(act, p);
        let d1 = vee(&(g * p.transpose()));
        (d1, -(rotation_inverse(p) * d1))
    }

    /// Pulls momentum cotangents back through `dt·increments`. Accumulates
    /// `[∂M, ∂N]` (row-major) into `grad`; returns the cotangent of `p`.
    pub(crate) fn increments_vjp(&self, act: Activation, p: &Mat3, dt: f64, g1: &Vec3, g2: &Vec3, grad: &mut [f64]) -> Mat3 {
        let pinv = rotation_inverse(p);
        let k = pinv.transpose() * g2;
        let sig = p.map(|x| act.eval_deriv(x));
        let g = sig.map(|(s, _)| s).component_mul(&self.m) + self.n;
        let d2 = -(pinv * vee(&(g * p.transpose())));
        let h = crate::lie::hat(&(g1 - k)) * (0.5 * dt);
        let gg = h * p;
        let mut gp = h.transpose() * g - k * d2.transpose() * dt;
        for i in 0..3 {
            for j in 0..3 {
                let (s, ds) = sig[(i, j)];
                grad[3 * i + j] += gg[(i, j)] * s;
                grad[9 + 3 * i + j] += gg[(i, j)];
                gp[(i, j)] += gg[(i, j)] * self.m[(i, j)] * ds;
            }
        }
        gp
    }
}

/// One layer of a network: which flow, on which body and axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    So2(So2Sub),
    So3Rotation { body: Body, axis: usize },
    So3Kick,
    Se3 { kind: Se3Kind, axis: usize },
}

impl Layer {
    pub fn case(&self) -> Case {
        match self {
            Layer::So2(_) => Case::So2,
            Layer::So3Rotation { .. } | Layer::So3Kick => Case::So3,
            Layer::Se3 { .. } => Case::Se3,
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Layer::So2(So2Sub::Kick) => 8,
            Layer::So2(_) => 3,
            Layer::So3Rotation { .. } => 3,
            Layer::So3Kick => 18,
            Layer::Se3 { kind: Se3Kind::Orientation, .. } => 18,
            Layer::Se3 { .. } => 3,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Layer::So2(sub) => format!("so2 {sub:?}"),
            Layer::So3Rotation { body, axis } => format!("so3 rotation body {body:?} axis {}", axis + 1),
            Layer::So3Kick => "so3 orientation kick".into(),
            Layer::Se3 { kind: Se3Kind::Orientation, .. } => "se3 step 5".into(),
            Layer::Se3 { kind, axis } => format!("se3 step {} axis {}", kind.index(), axis + 1),
        }
    }

    fn check(&self, params: &[f64], state: &State) -> Result<()> {
        self.case().expect(state.case())?;
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch { expected: self.n_params(), got: params.len() });
        }
        Ok(())
    }

    /// Exact time-`dt` flow of the layer's Hamiltonian.
    pub fn apply(&self, act: Activation, params: &[f64], dt: f64, state: &State) -> Result<State> {
        self.check(params, state)?;
        Ok(self.apply_unchecked(act, params, dt, state))
    }

    pub(crate) fn apply_unchecked(&self, act: Activation, params: &[f64], dt: f64, state: &State) -> State {
        match (self, state) {
            (Layer::So2(sub), State::So2(s)) => State::So2(so2_layer(s, *sub, params, act, dt)),
            (Layer::So3Rotation { body, axis }, State::So3(s)) => {
                State::So3(so3_momentum_rotation(s, *body, *axis, &RotationParams::from_slice(params), act, dt))
            }
            (Layer::So3Kick, State::So3(s)) => State::So3(so3_orientation_kick(s, &KickParams::from_slice(params), act, dt)),
            (Layer::Se3 { kind, axis }, State::Se3(s)) => State::Se3(se3_step(s, *kind, *axis, params, act, dt)),
            _ => unreachable!("layer/state case mismatch"),
        }
    }

    /// Vector-Jacobian product at `input`. Parameter gradients are added to
    /// `grad`; the cotangent of the input is returned.
    pub fn vjp(&self, act: Activation, params: &[f64], dt: f64, input: &State, out_cot: &State, grad: &mut [f64]) -> Result<State> {
        self.check(params, input)?;
        self.case().expect(out_cot.case())?;
        if grad.len() != params.len() {
            return Err(Error::DimensionMismatch { expected: params.len(), got: grad.len() });
        }
        Ok(self.vjp_unchecked(act, params, dt, input, out_cot, grad))
    }

    pub(crate) fn vjp_unchecked(&self, act: Activation, params: &[f64], dt: f64, input: &State, g: &State, grad: &mut [f64]) -> State {
        match (self, input, g) {
            (Layer::So2(sub), State::So2(s), State::So2(g)) => State::So2(so2_layer_vjp(s, *sub, params, act, dt, g, grad)),
            (Layer::So3Rotation { body, axis }, State::So3(s), State::So3(g)) => State::So3(so3_momentum_rotation_vjp(
                s,
                *body,
                *axis,
                &RotationParams::from_slice(params),
                act,
                dt,
                g,
                grad,
            )),
            (Layer::So3Kick, State::So3(s), State::So3(g)) => {
                State::So3(so3_orientation_kick_vjp(s, &KickParams::from_slice(params), act, dt, g, grad))
            }
            (Layer::Se3 { kind, axis }, State::Se3(s), State::Se3(g)) => {
                State::Se3(se3_step_vjp(s, *kind, *axis, params, act, dt, g, grad))
            }
            _ => unreachable!("layer/state case mismatch"),
        }
    }
}

/// Frobenius inner product.
#[inline]
pub(crate) fn frob(a: &Mat3, b: &Mat3) -> f64 {
    a.component_mul(b).sum()
}
