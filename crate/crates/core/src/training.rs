//! Full-batch training: MSE loss, reverse-mode gradients and Adam.

use crate::dataset::DataPair;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::systems::State;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Pairs per parallel work unit. Fixed so the reduction order never depends on the thread count.
const CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_final: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub gradient_check: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 2000,
            lr_initial: 1.0,
            lr_final: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            gradient_check: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if !(self.lr_final > 0.0 && self.lr_final <= self.lr_initial && self.lr_initial.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < lr_final <= lr_initial, got {} and {}",
                self.lr_final, self.lr_initial
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("invalid Adam hyperparameters".into()));
        }
        Ok(())
    }

    /// Learning rate at epoch `e` (0-based).
    pub fn lr(&self, e: usize) -> f64 {
        self.lr_initial * (self.lr_final / self.lr_initial).powf(e as f64 / self.epochs as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Loss at the parameters used in each epoch, before that epoch's update.
    pub losses: Vec<f64>,
    pub lrs: Vec<f64>,
    /// Loss of the returned (best) parameters.
    pub final_loss: f64,
    pub initial_loss: f64,
    pub best_epoch: usize,
    pub wall_time: f64,
    pub gradient_check: Option<f64>,
}

impl TrainReport {
    /// Writes `epoch,lr,loss` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "epoch,lr,loss")?;
        for (e, (lr, l)) in self.lrs.iter().zip(&self.losses).enumerate() {
            writeln!(w, "{e},{lr:e},{l:e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairs converted to structured states once, checked against the network.
#[derive(Debug, Clone)]
pub struct Batch {
    inputs: Vec<State>,
    targets: Vec<State>,
}

impl Batch {
    pub fn new(net: &Network, pairs: &[DataPair]) -> Result<Batch> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("no training pairs".into()));
        }
        let case = net.case();
        let mut inputs = Vec::with_capacity(pairs.len());
        let mut targets = Vec::with_capacity(pairs.len());
        for p in pairs {
            inputs.push(State::from_flat(case, &p.state_in)?);
            targets.push(State::from_flat(case, &p.state_out)?);
        }
        Ok(Batch { inputs, targets })
    }

    pub fn from_states(inputs: Vec<State>, targets: Vec<State>) -> Result<Batch> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::InvalidParameter("inputs and targets must be non-empty and equal in number".into()));
        }
        Ok(Batch { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Sums in a fixed balanced tree over index order.
fn tree_sum<T: Clone>(mut items: Vec<T>, add: impl Fn(&mut T, &T)) -> T {
    assert!(!items.is_empty());
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                add(&mut a, &b);
            }
            next.push(a);
        }
        items = next;
    }
    items.pop().expect("non-empty")
}

fn sq_err(out: &[f64], target: &[f64]) -> f64 {
    out.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn check_batch(net: &Network, params: &[f64], batch: &Batch) -> Result<()> {
    net.check_params(params)?;
    for s in batch.inputs.iter().chain(&batch.targets) {
        net.case().expect(s.case())?;
    }
    Ok(())
}

/// Mean over pairs of the mean squared error over the flattened state.
pub fn loss(net: &Network, params: &[f64], batch: &Batch) -> Result<f64> {
    check_batch(net, params, batch)?;
    Ok(loss_unchecked(net, params, batch))
}

fn loss_unchecked(net: &Network, params: &[f64], batch: &Batch) -> f64 {
    let dim = net.case().dim();
    let n = batch.len();
    let partial: Vec<f64> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut out = vec![0.0; dim];
            let mut tgt = vec![0.0; dim];
            idx.iter()
                .map(|&i| {
                    net.forward_unchecked(params, &batch.inputs[i]).write_flat(&mut out);
                    batch.targets[i].write_flat(&mut tgt);
                    sq_err(&out, &tgt)
                })
                .sum()
        })
        .collect();
    tree_sum(partial, |a, b| *a += b) / (dim * n) as f64
}

/// Loss together with its exact gradient.
pub fn loss_and_grad(net: &Network, params: &[f64], batch: &Batch) -> Result<(f64, Vec<f64>)> {
    check_batch(net, params, batch)?;
    Ok(loss_and_grad_unchecked(net, params, batch))
}

pub fn grad(net: &Network, params: &[f64], batch: &Batch) -> Result<Vec<f64>> {
    Ok(loss_and_grad(net, params, batch)?.1)
}

fn loss_and_grad_unchecked(net: &Network, params: &[f64], batch: &Batch) -> (f64, Vec<f64>) {
    let case = net.case();
    let dim = case.dim();
    let n = batch.len();
    let scale = 2.0 / (dim * n) as f64;
    let np = params.len();
    let partial: Vec<(f64, Vec<f64>)> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut trace = Vec::with_capacity(net.layers().len());
            let mut g = vec![0.0; np];
            let mut out = vec![0.0; dim];
            let mut tgt = vec![0.0; dim];
            let mut sse = 0.0;
            for &i in idx {
                net.forward_trace(params, &batch.inputs[i], &mut trace).write_flat(&mut out);
                batch.targets[i].write_flat(&mut tgt);
                sse += sq_err(&out, &tgt);
                let cot: Vec<f64> = out.iter().zip(&tgt).map(|(a, b)| scale * (a - b)).collect();
                let cot = State::from_flat(case, &cot).expect("length matches case");
                net.backward(params, &trace, &cot, &mut g);
            }
            (sse, g)
        })
        .collect();
    let (sse, g) = tree_sum(partial, |a, b| {
        a.0 += b.0;
        a.1.iter_mut().zip(&b.1).for_each(|(x, y)| *x += y);
    });
    (sse / (dim * n) as f64, g)
}

/// Central finite-difference gradient of the loss with step `h`.
pub fn fd_grad(net: &Network, params: &[f64], batch: &Batch, h: f64) -> Result<Vec<f64>> {
    check_batch(net, params, batch)?;
    let mut p = params.to_vec();
    let mut out = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let x = p[k];
        p[k] = x + h;
        let lp = loss_unchecked(net, &p, batch);
        p[k] = x - h;
        let lm = loss_unchecked(net, &p, batch);
        p[k] = x;
        out.push((lp - lm) / (2.0 * h));
    }
    Ok(out)
}

/// Step used by [`gradient_check`].
pub const FD_STEP: f64 = 1e-6;

/// Largest component-wise relative residual `|g - fd| / |fd|` of the analytic gradient.
///
/// Components whose finite difference is below the rounding resolution of the
/// difference quotient are measured against that resolution instead, scaled so
/// a residual of 1e-6 still means agreement to the quotient's noise. Rounding
/// enters through the network outputs, so the resolution is
/// `10 ε Σ |∂L/∂out| |out| / h` rather than a multiple of the loss itself.
pub fn gradient_check(net: &Network, params: &[f64], batch: &Batch) -> Result<f64> {
    let g = grad(net, params, batch)?;
    let fd = fd_grad(net, params, batch, FD_STEP)?;
    let noise = 10.0 * f64::EPSILON * output_sensitivity(net, params, batch) / FD_STEP;
    let floor = noise / 1e-6;
    Ok(g.iter().zip(&fd).map(|(a, b)| (a - b).abs() / b.abs().max(floor).max(f64::MIN_POSITIVE)).fold(0.0, f64::max))
}

/// `Σ |∂L/∂out_c| (|out_c| + |target_c|)` over the batch: the loss change caused by
/// relative perturbations of size one in every output and target component.
fn output_sensitivity(net: &Network, params: &[f64], batch: &Batch) -> f64 {
    let dim = net.case().dim();
    let scale = 2.0 / (dim * batch.len()) as f64;
    let mut out = vec![0.0; dim];
    let mut tgt = vec![0.0; dim];
    let mut total = 0.0;
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        net.forward_unchecked(params, x).write_flat(&mut out);
        t.write_flat(&mut tgt);
        total += out.iter().zip(&tgt).map(|(o, t)| scale * (o - t).abs() * (o.abs() + t.abs())).sum::<f64>();
    }
    total
}

#[derive(Debug, Clone)]
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, cfg: &TrainConfig, lr: f64, params: &mut [f64], g: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * g[k];
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
            params[k] -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + cfg.eps);
        }
    }
}

/// Runs full-batch Adam from `init` and returns the best parameters seen.
pub fn train(net: &Network, init: &[f64], batch: &Batch, cfg: &TrainConfig) -> Result<(Vec<f64>, TrainReport)> {
    train_with(net, init, batch, cfg, |_, _| {})
}

/// [`train`] with a per-epoch callback receiving `(epoch, loss)`.
pub fn train_with(
    net: &Network,
    init: &[f64],
    batch: &Batch,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(Vec<f64>, TrainReport)> {
    cfg.validate()?;
    check_batch(net, init, batch)?;
    let start = Instant::now();
    let gradient_check = if cfg.gradient_check { Some(gradient_check(net, init, batch)?) } else { None };

    let mut params = init.to_vec();
    let mut adam = Adam::new(params.len());
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut lrs = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, params.clone(), 0);
    for e in 0..cfg.epochs {
        let (l, g) = loss_and_grad_unchecked(net, &params, batch);
        if !l.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch: e });
        }
        if l < best.0 {
            best = (l, params.clone(), e);
        }
        on_epoch(e, l);
        let lr = cfg.lr(e);
        losses.push(l);
        lrs.push(lr);
        adam.step(cfg, lr, &mut params, &g);
    }
    // The parameters after the last update have not been scored yet.
    let last = loss_unchecked(net, &params, batch);
    if last.is_finite() && last < best.0 {
        best = (last, params, cfg.epochs);
    }
    let report = TrainReport {
        initial_loss: losses[0],
        losses,
        lrs,
        final_loss: best.0,
        best_epoch: best.2,
        wall_time: start.elapsed().as_secs_f64(),
        gradient_check,
    };
    Ok((best.1, report))
}
