//! Conservation checks, error growth and Lyapunov estimates.

use crate::dataset::{ground_truth, stream_rng, AUX_STREAM};
use crate::error::{Error, Result};
use crate::integrate::{integrate, Tolerances};
use crate::network::Network;
use crate::systems::{State, System};
use crate::Case;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Which state components enter the mean absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MaeSelection {
    /// Momenta, plus the first row of `p` for SO(3).
    #[default]
    Momenta,
    /// Every flattened component.
    All,
}

impl MaeSelection {
    /// Flat indices compared for `case`.
    pub fn indices(self, case: Case) -> std::ops::Range<usize> {
        match (self, case) {
            (MaeSelection::All, c) => 0..c.dim(),
            (MaeSelection::Momenta, Case::So2) => 0..3,
            (MaeSelection::Momenta, Case::So3) => 0..9,
            (MaeSelection::Momenta, Case::Se3) => 0..12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Model,
    Truth,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::Model => "model",
            Source::Truth => "truth",
        }
    }
}

/// Per-step diagnostics of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub t: Vec<f64>,
    /// `casimirs[k][j]` is Casimir `k` at step `j`.
    pub casimirs: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub mae: Vec<f64>,
    pub source: Source,
}

impl MetricsSeries {
    /// Largest `|C_k(t) - C_k(0)| / |C_k(0)|` over all Casimirs.
    pub fn casimir_drift(&self) -> f64 {
        self.casimirs.iter().map(|c| relative_drift(c)).fold(0.0, f64::max)
    }
}

/// `max_t |x(t) - x(0)| / |x(0)|`.
pub fn relative_drift(series: &[f64]) -> f64 {
    let Some(&x0) = series.first() else { return 0.0 };
    series.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max) / x0.abs()
}

/// `max_t |x(t) - x(0)|`.
pub fn absolute_drift(series: &[f64]) -> f64 {
    let Some(&x0) = series.first() else { return 0.0 };
    series.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max)
}

/// One series per Casimir of the states' case.
pub fn casimir_series(states: &[State]) -> Vec<Vec<f64>> {
    let k = states.first().map_or(0, |s| s.case().n_casimirs());
    let mut out = vec![Vec::with_capacity(states.len()); k];
    for s in states {
        for (series, c) in out.iter_mut().zip(s.casimirs()) {
            series.push(c);
        }
    }
    out
}

pub fn energy_series(system: &System, states: &[State]) -> Result<Vec<f64>> {
    states.iter().map(|s| system.energy_of(s)).collect()
}

/// Mean absolute difference over the selected components, step by step.
pub fn mae_series(traj: &[State], reference: &[State], sel: MaeSelection) -> Result<Vec<f64>> {
    if traj.len() != reference.len() {
        return Err(Error::DimensionMismatch { expected: reference.len(), got: traj.len() });
    }
    let Some(first) = reference.first() else { return Ok(Vec::new()) };
    let case = first.case();
    let idx = sel.indices(case);
    let k = idx.len() as f64;
    traj.iter()
        .zip(reference)
        .map(|(a, b)| {
            case.expect(a.case())?;
            case.expect(b.case())?;
            let (a, b) = (a.to_flat(), b.to_flat());
            Ok(idx.clone().map(|i| (a[i] - b[i]).abs()).sum::<f64>() / k)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub delta0: f64,
    pub horizon: f64,
    pub renorm_dt: f64,
    /// Seeds the direction of the initial perturbation.
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig { delta0: 1e-8, horizon: 200.0, renorm_dt: 1.0, seed: 0, tol: Tolerances::GROUND_TRUTH }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub delta0: f64,
    pub horizon: f64,
    pub renorm_dt: f64,
}

/// Largest Lyapunov exponent by two-trajectory renormalization.
///
/// The perturbation is a random unit direction in the momentum components,
/// scaled to `delta0`; separations are measured over the full flattened state.
pub fn lyapunov(system: &System, state0: &State, cfg: &LyapunovConfig) -> Result<LyapunovEstimate> {
    system.case().expect(state0.case())?;
    if !(cfg.delta0 > 0.0 && cfg.renorm_dt > 0.0 && cfg.horizon >= cfg.renorm_dt) {
        return Err(Error::InvalidParameter("need delta0 > 0 and horizon >= renorm_dt > 0".into()));
    }
    let case = system.case();
    let n_mom = MaeSelection::Momenta.indices(case).end.min(match case {
        Case::So2 => 2,
        Case::So3 => 6,
        Case::Se3 => 12,
    });
    let mut rng = stream_rng(cfg.seed, AUX_STREAM);
    let mut dir: Vec<f64> = (0..n_mom).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|x| *x /= norm);

    let f = |_t: f64, y: &[f64], dy: &mut [f64]| system.field(y, dy);
    let mut x = state0.to_flat();
    let mut y = x.clone();
    for (k, d) in dir.iter().enumerate() {
        y[k] += cfg.delta0 * d;
    }
    let n = (cfg.horizon / cfg.renorm_dt).round() as usize;
    let mut sum = 0.0;
    for _ in 0..n {
        x = integrate(f, &x, cfg.renorm_dt, cfg.tol.rtol, cfg.tol.atol)?;
        y = integrate(f, &y, cfg.renorm_dt, cfg.tol.rtol, cfg.tol.atol)?;
        let d = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("degenerate separation {d}")));
        }
        sum += (d / cfg.delta0).ln();
        let s = cfg.delta0 / d;
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi = xi + (*yi - xi) * s;
        }
    }
    let horizon = n as f64 * cfg.renorm_dt;
    Ok(LyapunovEstimate { lambda: sum / horizon, delta0: cfg.delta0, horizon, renorm_dt: cfg.renorm_dt })
}

/// Model rollout next to ground truth from the same initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub model: MetricsSeries,
    pub truth: MetricsSeries,
    pub model_states: Vec<State>,
    pub truth_states: Vec<State>,
}

impl Comparison {
    /// Long-format CSV: `t, C1[, C2], energy, mae, source`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let nc = self.model.casimirs.len();
        let cols: Vec<String> = (1..=nc).map(|k| format!("C{k}")).collect();
        writeln!(w, "t,{},energy,mae,source", cols.join(","))?;
        for m in [&self.model, &self.truth] {
            for j in 0..m.t.len() {
                write!(w, "{}", m.t[j])?;
                for c in &m.casimirs {
                    write!(w, ",{:e}", c[j])?;
                }
                writeln!(w, ",{:e},{:e},{}", m.energy[j], m.mae[j], m.source.name())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn metrics(system: &System, states: &[State], mae: Vec<f64>, dt: f64, source: Source) -> Result<MetricsSeries> {
    Ok(MetricsSeries {
        t: (0..states.len()).map(|k| k as f64 * dt).collect(),
        casimirs: casimir_series(states),
        energy: energy_series(system, states)?,
        mae,
        source,
    })
}

/// Rolls out the network and the reference system for `n_steps` data steps.
pub fn compare(
    net: &Network,
    params: &[f64],
    system: &System,
    state0: &State,
    n_steps: usize,
    sel: MaeSelection,
) -> Result<Comparison> {
    system.case().expect(net.case())?;
    let dt = net.spec.dt;
    let model_states = net.rollout(params, state0, n_steps)?;
    let truth = ground_truth(system, state0, dt, n_steps + 1, Tolerances::GROUND_TRUTH)?;
    let truth_states: Vec<State> =
        truth.states.iter().map(|x| State::from_flat(system.case(), x)).collect::<Result<_>>()?;
    let mae = mae_series(&model_states, &truth_states, sel)?;
    Ok(Comparison {
        model: metrics(system, &model_states, mae.clone(), dt, Source::Model)?,
        truth: metrics(system, &truth_states, vec![0.0; mae.len()], dt, Source::Truth)?,
        model_states,
        truth_states,
    })
}

/// Envelope `A e^{λ t}` pinned to the early error: `A = max_{0 < t ≤ t_fit} mae(t) e^{-λ t}`.
pub fn fit_mae_bound(t: &[f64], mae: &[f64], lambda: f64, t_fit: f64) -> f64 {
    t.iter()
        .zip(mae)
        .filter(|(&t, _)| t > 0.0 && t <= t_fit)
        .map(|(t, m)| m * (-lambda * t).exp())
        .fold(0.0, f64::max)
}

/// Amplitude of the error a steady per-step defect produces in a system with exponent `λ`:
/// least-squares fit of `mae(t) ≈ A (e^{λ t} - 1)` over `0 < t ≤ t_max`.
pub fn fit_mae_envelope(t: &[f64], mae: &[f64], lambda: f64, t_max: f64) -> f64 {
    let (num, den) = t
        .iter()
        .zip(mae)
        .filter(|(&t, _)| t > 0.0 && t <= t_max)
        .map(|(t, m)| ((lambda * t).exp_m1(), m))
        .fold((0.0, 0.0), |(n, d), (r, m)| (n + r * m, d + r * r));
    num / den
}

/// Worst ratio `mae(t) / (A e^{λ t})` over `t ≤ t_max`; at most 1 means the bound holds.
pub fn mae_bound_ratio(t: &[f64], mae: &[f64], lambda: f64, a: f64, t_max: f64) -> f64 {
    t.iter()
        .zip(mae)
        .filter(|(&t, _)| t > 0.0 && t <= t_max)
        .map(|(t, m)| m / (a * (lambda * t).exp()))
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ln mae` against `t` over `[t0, t1]`.
pub fn growth_exponent(t: &[f64], mae: &[f64], t0: f64, t1: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(mae)
        .filter(|(&t, &m)| t >= t0 && t <= t1 && m > 0.0)
        .map(|(&t, &m)| (t, m.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("need at least two positive points to fit a slope".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(sxy / sxx)
}

/// `max |E(t) - E(0)|` over the whole series divided by the same over the first `k` entries.
pub fn energy_oscillation_ratio(energy: &[f64], k: usize) -> f64 {
    let k = k.min(energy.len());
    absolute_drift(energy) / absolute_drift(&energy[..k])
}
