//! Networks: repeated cycles of Poisson layers with a flat parameter vector.

use crate::error::{Error, Result};
use crate::layers::{Activation, Body, Layer, Se3Kind, So2Sub};
use crate::systems::State;
use crate::Case;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const LAYOUT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub case: Case,
    pub cycles: usize,
    /// Time between consecutive data states; each cycle advances `dt / cycles`.
    pub dt: f64,
    pub activation: Activation,
}

impl NetworkSpec {
    pub fn new(case: Case) -> Self {
        NetworkSpec { case, cycles: 3, dt: 0.1, activation: Activation::Tanh }
    }

    pub fn with_cycles(mut self, cycles: usize) -> Self {
        self.cycles = cycles;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_activation(mut self, act: Activation) -> Self {
        self.activation = act;
        self
    }

    /// Parameters per cycle: 14, 36 or 63.
    pub fn params_per_cycle(case: Case) -> usize {
        cycle_layers(case).iter().map(Layer::n_params).sum()
    }

    pub fn n_params(&self) -> usize {
        self.cycles * NetworkSpec::params_per_cycle(self.case)
    }

    /// Uniform initialization range used unless overridden.
    pub fn default_init_range(case: Case) -> (f64, f64) {
        match case {
            Case::So2 => (-1.0, 1.0),
            _ => (-0.1, 0.1),
        }
    }
}

/// Layers of one cycle, in application order.
pub fn cycle_layers(case: Case) -> Vec<Layer> {
    match case {
        Case::So2 => vec![Layer::So2(So2Sub::Rot1), Layer::So2(So2Sub::Rot2), Layer::So2(So2Sub::Kick)],
        Case::So3 => {
            let mut v = Vec::with_capacity(7);
            for body in [Body::One, Body::Two] {
                for axis in 0..3 {
                    v.push(Layer::So3Rotation { body, axis });
                }
            }
            v.push(Layer::So3Kick);
            v
        }
        Case::Se3 => {
            let mut v = Vec::with_capacity(16);
            for kind in Se3Kind::ALL {
                if kind.is_per_axis() {
                    v.extend((0..3).map(|axis| Layer::Se3 { kind, axis }));
                } else {
                    v.push(Layer::Se3 { kind, axis: 0 });
                }
            }
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: NetworkSpec,
    layers: Vec<Layer>,
    offsets: Vec<usize>,
}

impl Network {
    pub fn build(spec: NetworkSpec) -> Result<Network> {
        if spec.cycles == 0 {
            return Err(Error::InvalidParameter("cycles must be at least 1".into()));
        }
        if !(spec.dt.is_finite() && spec.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", spec.dt)));
        }
        let one = cycle_layers(spec.case);
        let layers: Vec<Layer> = (0..spec.cycles).flat_map(|_| one.iter().copied()).collect();
        let mut offsets = Vec::with_capacity(layers.len() + 1);
        let mut acc = 0;
        for l in &layers {
            offsets.push(acc);
            acc += l.n_params();
        }
        offsets.push(acc);
        Ok(Network { spec, layers, offsets })
    }

    pub fn case(&self) -> Case {
        self.spec.case
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn n_params(&self) -> usize {
        self.offsets[self.layers.len()]
    }

    /// Step size of every layer.
    pub fn sub_dt(&self) -> f64 {
        self.spec.dt / self.spec.cycles as f64
    }

    /// Parameter slice range of layer `k`.
    pub fn param_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Human-readable description of the parameter layout.
    pub fn layout(&self) -> String {
        let per = cycle_layers(self.case());
        let mut out = format!(
            "cycle-major; {} cycles of {} parameters; within a cycle:",
            self.spec.cycles,
            NetworkSpec::params_per_cycle(self.case())
        );
        let mut off = 0;
        for l in &per {
            let slots = match l {
                Layer::So2(So2Sub::Kick) => "M11 M12 M21 M22 N11 N12 N21 N22",
                Layer::So3Kick | Layer::Se3 { kind: Se3Kind::Orientation, .. } => "M row-major (9), N row-major (9)",
                Layer::Se3 { kind: Se3Kind::Translation, .. } => "L M N",
                _ => "alpha beta gamma",
            };
            out.push_str(&format!(" [{}..{}) {}: {};", off, off + l.n_params(), l.describe(), slots));
            off += l.n_params();
        }
        out
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch { expected: self.n_params(), got: params.len() });
        }
        Ok(())
    }

    /// I.i.d. uniform parameters in `[lo, hi)`.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R, range: (f64, f64)) -> Result<Vec<f64>> {
        let (lo, hi) = range;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("empty init range ({lo}, {hi})")));
        }
        Ok((0..self.n_params()).map(|_| rng.random_range(lo..hi)).collect())
    }

    /// One data step: every layer of every cycle in order.
    pub fn forward(&self, params: &[f64], state: &State) -> Result<State> {
        self.check_params(params)?;
        self.case().expect(state.case())?;
        Ok(self.forward_unchecked(params, state))
    }

    pub(crate) fn forward_unchecked(&self, params: &[f64], state: &State) -> State {
        let dt = self.sub_dt();
        let act = self.spec.activation;
        let mut s = *state;
        for (k, l) in self.layers.iter().enumerate() {
            s = l.apply_unchecked(act, &params[self.param_range(k)], dt, &s);
        }
        s
    }

    /// Forward pass that also records the input of every layer.
    pub(crate) fn forward_trace(&self, params: &[f64], state: &State, trace: &mut Vec<State>) -> State {
        let dt = self.sub_dt();
        let act = self.spec.activation;
        trace.clear();
        let mut s = *state;
        for (k, l) in self.layers.iter().enumerate() {
            trace.push(s);
            s = l.apply_unchecked(act, &params[self.param_range(k)], dt, &s);
        }
        s
    }

    /// Reverse sweep after [`Network::forward_trace`]. Adds parameter
    /// gradients to `grad` and returns the cotangent of the input state.
    pub(crate) fn backward(&self, params: &[f64], trace: &[State], out_cot: &State, grad: &mut [f64]) -> State {
        let dt = self.sub_dt();
        let act = self.spec.activation;
        let mut g = *out_cot;
        for (k, l) in self.layers.iter().enumerate().rev() {
            let r = self.param_range(k);
            g = l.vjp_unchecked(act, &params[r.clone()], dt, &trace[k], &g, &mut grad[r]);
        }
        g
    }

    /// Vector-Jacobian product of [`Network::forward`].
    pub fn vjp(&self, params: &[f64], state: &State, out_cot: &State, grad: &mut [f64]) -> Result<State> {
        self.check_params(params)?;
        self.case().expect(state.case())?;
        self.case().expect(out_cot.case())?;
        self.check_params(grad)?;
        let mut trace = Vec::with_capacity(self.layers.len());
        self.forward_trace(params, state, &mut trace);
        Ok(self.backward(params, &trace, out_cot, grad))
    }

    /// Exact inverse of [`Network::forward`]: layers in reverse order with negated step.
    pub fn inverse(&self, params: &[f64], state: &State) -> Result<State> {
        self.check_params(params)?;
        self.case().expect(state.case())?;
        let dt = self.sub_dt();
        let mut s = *state;
        for (k, l) in self.layers.iter().enumerate().rev() {
            s = l.apply_unchecked(self.spec.activation, &params[self.param_range(k)], -dt, &s);
        }
        Ok(s)
    }

    /// `n_steps` iterated forward passes; the result holds `n_steps + 1` states.
    pub fn rollout(&self, params: &[f64], state0: &State, n_steps: usize) -> Result<Vec<State>> {
        self.check_params(params)?;
        self.case().expect(state0.case())?;
        if n_steps == 0 {
            return Err(Error::InvalidParameter("rollout needs at least one step".into()));
        }
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(*state0);
        let mut s = *state0;
        for step in 1..=n_steps {
            s = self.forward_unchecked(params, &s);
            if !s.is_finite() {
                return Err(Error::RolloutDivergence { step });
            }
            out.push(s);
        }
        Ok(out)
    }
}

/// Stored model: network shape plus trained parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub case: Case,
    pub cycles: usize,
    pub dt: f64,
    pub activation: Activation,
    pub params: Vec<f64>,
    pub layout_version: u32,
    #[serde(default)]
    pub layout: String,
}

impl Model {
    pub fn new(net: &Network, params: Vec<f64>) -> Result<Model> {
        net.check_params(&params)?;
        Ok(Model {
            case: net.spec.case,
            cycles: net.spec.cycles,
            dt: net.spec.dt,
            activation: net.spec.activation,
            params,
            layout_version: LAYOUT_VERSION,
            layout: net.layout(),
        })
    }

    pub fn spec(&self) -> NetworkSpec {
        NetworkSpec { case: self.case, cycles: self.cycles, dt: self.dt, activation: self.activation }
    }

    /// Rebuilds the network and validates the parameter count and layout version.
    pub fn network(&self) -> Result<Network> {
        if self.layout_version != LAYOUT_VERSION {
            return Err(Error::InvalidParameter(format!("unsupported layout version {}", self.layout_version)));
        }
        let net = Network::build(self.spec())?;
        net.check_params(&self.params)?;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        let m: Model = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        m.network()?;
        Ok(m)
    }
}
