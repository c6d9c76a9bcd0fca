//! Initial-condition sampling, ground-truth trajectories and supervision pairs.

use crate::error::{Error, Result};
use crate::integrate::{integrate_uniform, Tolerances};
use crate::lie::{rot, Vec3};
use crate::systems::{Se3State, So2State, So3State, State, System};
use crate::Case;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Random stream reserved for everything that is not a per-trajectory draw.
pub const AUX_STREAM: u64 = u64::MAX;

/// Generator for stream `stream` of `seed`. Trajectory `i` uses stream `i`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub case: Case,
    /// Range of angular momentum components (`μ`, or `α` for SE(3)).
    pub momentum: (f64, f64),
    /// Range of linear momentum components (`β`, SE(3) only).
    pub linear_momentum: (f64, f64),
    /// Relative rotation angle (`Φ` for SO(2), angle about a random axis otherwise).
    pub angle: (f64, f64),
    /// Range of relative position components (SE(3) only).
    pub translation: (f64, f64),
    pub n_traj: usize,
    /// States per trajectory.
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
}

impl SamplerConfig {
    /// Initial conditions used to build training data.
    pub fn training(case: Case) -> Self {
        let angle = match case {
            Case::So2 => (0.0, 2.0 * PI),
            _ => (-FRAC_PI_2, FRAC_PI_2),
        };
        SamplerConfig {
            case,
            momentum: (-2.0, 2.0),
            linear_momentum: (-2.0, 2.0),
            angle,
            translation: (-FRAC_PI_2, FRAC_PI_2),
            n_traj: 20,
            n_steps: 51,
            dt: 0.1,
            seed: 0,
        }
    }

    /// Tighter ranges for unseen test trajectories.
    pub fn evaluation(case: Case) -> Self {
        let base = SamplerConfig::training(case);
        match case {
            Case::So2 => SamplerConfig { momentum: (-1.0, 1.0), angle: (-FRAC_PI_2, FRAC_PI_2), ..base },
            Case::So3 => SamplerConfig { momentum: (-1.0, 1.0), angle: (-FRAC_PI_4, FRAC_PI_4), ..base },
            Case::Se3 => SamplerConfig {
                momentum: (-2.0, 2.0),
                linear_momentum: (-1.0, 1.0),
                angle: (-FRAC_PI_4, FRAC_PI_4),
                translation: (-0.5, 0.5),
                ..base
            },
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("momentum", self.momentum),
            ("linear_momentum", self.linear_momentum),
            ("angle", self.angle),
            ("translation", self.translation),
        ] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} range ({lo}, {hi}) is not well ordered")));
            }
        }
        if self.n_traj == 0 || self.n_steps < 2 {
            return Err(Error::InvalidParameter("need n_traj >= 1 and n_steps >= 2".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Uniformly distributed unit vector.
pub fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn uniform3<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> Vec3 {
    Vec3::new(rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi))
}

/// Draws one initial condition.
pub fn sample_initial<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<State> {
    cfg.validate()?;
    let angle = |rng: &mut R| rng.random_range(cfg.angle.0..cfg.angle.1);
    Ok(match cfg.case {
        Case::So2 => {
            let (lo, hi) = cfg.momentum;
            let mu1 = rng.random_range(lo..hi);
            let mu2 = rng.random_range(lo..hi);
            State::So2(So2State::new(mu1, mu2, angle(rng)))
        }
        Case::So3 => {
            let mu1 = uniform3(rng, cfg.momentum);
            let mu2 = uniform3(rng, cfg.momentum);
            let axis = random_axis(rng);
            let p = rot(&axis, angle(rng))?.into_inner();
            State::So3(So3State::new(mu1, mu2, p))
        }
        Case::Se3 => {
            let alpha1 = uniform3(rng, cfg.momentum);
            let beta1 = uniform3(rng, cfg.linear_momentum);
            let alpha2 = uniform3(rng, cfg.momentum);
            let beta2 = uniform3(rng, cfg.linear_momentum);
            let axis = random_axis(rng);
            let q = rot(&axis, angle(rng))?.into_inner();
            let v = uniform3(rng, cfg.translation);
            State::Se3(Se3State { alpha1, beta1, alpha2, beta2, q, v })
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub case: Case,
    pub dt: f64,
    pub t0: f64,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(case: Case, dt: f64, t0: f64, states: Vec<Vec<f64>>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidParameter("a trajectory needs at least two states".into()));
        }
        for s in &states {
            if s.len() != case.dim() {
                return Err(Error::DimensionMismatch { expected: case.dim(), got: s.len() });
            }
        }
        Ok(Trajectory { case, dt, t0, states })
    }

    pub fn from_states(dt: f64, states: &[State]) -> Result<Self> {
        let case = states.first().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?.case();
        Trajectory::new(case, dt, 0.0, states.iter().map(State::to_flat).collect())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|k| self.t0 + k as f64 * self.dt).collect()
    }

    pub fn state(&self, k: usize) -> Result<State> {
        State::from_flat(self.case, &self.states[k])
    }

    /// Consecutive states as supervision pairs.
    pub fn pairs(&self) -> Vec<DataPair> {
        self.states
            .windows(2)
            .map(|w| DataPair { state_in: w[0].clone(), state_out: w[1].clone(), dt: self.dt })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPair {
    pub state_in: Vec<f64>,
    pub state_out: Vec<f64>,
    pub dt: f64,
}

/// Reference trajectory of `n_points` states spaced by `dt`.
pub fn ground_truth(system: &System, state0: &State, dt: f64, n_points: usize, tol: Tolerances) -> Result<Trajectory> {
    system.case().expect(state0.case())?;
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| system.field(y, dy);
    let states = integrate_uniform(f, &state0.to_flat(), dt, n_points, tol)?;
    Trajectory::new(system.case(), dt, 0.0, states)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub trajectories: Vec<Trajectory>,
    pub pairs: Vec<DataPair>,
}

/// `cfg.n_traj` ground-truth trajectories from independently seeded initial conditions.
pub fn generate_dataset(system: &System, cfg: &SamplerConfig) -> Result<Dataset> {
    cfg.validate()?;
    system.case().expect(cfg.case)?;
    let trajectories = (0..cfg.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, i as u64);
            let s0 = sample_initial(cfg, &mut rng)?;
            ground_truth(system, &s0, cfg.dt, cfg.n_steps, Tolerances::GROUND_TRUTH)
                .map_err(|e| Error::Trajectory { index: i, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = trajectories.iter().flat_map(Trajectory::pairs).collect();
    Ok(Dataset { trajectories, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub sampler: SamplerConfig,
    pub version: String,
    pub n_pairs: usize,
    pub rtol: f64,
    pub atol: f64,
}

/// `data.jsonl` → `data.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

pub fn write_trajectories(path: &Path, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for t in trajectories {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Trajectory = serde_json::from_str(&line)?;
        out.push(Trajectory::new(t.case, t.dt, t.t0, t.states)?);
    }
    Ok(out)
}

/// Writes the trajectories and the manifest next to them.
pub fn save_dataset(path: &Path, data: &Dataset, cfg: &SamplerConfig) -> Result<()> {
    write_trajectories(path, &data.trajectories)?;
    let m = Manifest {
        sampler: *cfg,
        version: env!("CARGO_PKG_VERSION").into(),
        n_pairs: data.pairs.len(),
        rtol: Tolerances::GROUND_TRUTH.rtol,
        atol: Tolerances::GROUND_TRUTH.atol,
    };
    std::fs::write(manifest_path(path), serde_json::to_string_pretty(&m)?)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let trajectories = read_trajectories(path)?;
    let pairs = trajectories.iter().flat_map(Trajectory::pairs).collect();
    Ok(Dataset { trajectories, pairs })
}

/// Pairs as structured states, checked against `case`.
pub fn pairs_as_states(case: Case, pairs: &[DataPair]) -> Result<Vec<(State, State)>> {
    pairs
        .iter()
        .map(|p| Ok((State::from_flat(case, &p.state_in)?, State::from_flat(case, &p.state_out)?)))
        .collect()
}

/// Checks that every trajectory in a dataset belongs to `case`.
pub fn check_case(case: Case, trajectories: &[Trajectory]) -> Result<()> {
    trajectories.iter().try_for_each(|t| case.expect(t.case))
}
