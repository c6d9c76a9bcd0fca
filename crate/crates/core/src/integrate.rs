//! Adaptive Dormand–Prince 5(4) integration with PI step-size control.

use crate::error::{Error, Result};

/// Steps below this size abort the integration.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub const GROUND_TRUTH: Tolerances = Tolerances { rtol: 1e-10, atol: 1e-12 };

    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerances must be positive: rtol {rtol}, atol {atol}")));
        }
        Ok(Tolerances { rtol, atol })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::GROUND_TRUTH
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrator state reused across grid intervals.
struct Stepper<'a, F> {
    f: F,
    tol: Tolerances,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    err_old: f64,
    stats: &'a mut Stats,
}

impl<F> Stepper<'_, F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn eval(&mut self, t: f64, y: &[f64], stage: usize) -> Result<()> {
        self.stats.evaluations += 1;
        (self.f)(t, y, &mut self.k[stage])
    }

    fn err_norm(&self, y: &[f64], h: f64) -> f64 {
        let n = y.len();
        let mut acc = 0.0;
        for i in 0..n {
            let e: f64 = (0..7).map(|s| E[s] * self.k[s][i]).sum::<f64>() * h;
            let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(self.y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        (acc / n as f64).sqrt()
    }

    /// Hairer's starting-step heuristic. Expects `k[0] = f(t, y)`.
    fn initial_step(&mut self, t: f64, y: &[f64], span: f64) -> Result<f64> {
        let n = y.len() as f64;
        let sc: Vec<f64> = y.iter().map(|v| self.tol.atol + self.tol.rtol * v.abs()).collect();
        let d0 = (y.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self.k[0].iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span.abs());
        for i in 0..y.len() {
            self.y_stage[i] = y[i] + h0 * self.k[0][i];
        }
        let ys = std::mem::take(&mut self.y_stage);
        self.eval(t + h0, &ys, 1)?;
        self.y_stage = ys;
        let d2 = (self.k[1]
            .iter()
            .zip(&self.k[0])
            .zip(&sc)
            .map(|((a, b), s)| ((a - b) / s).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span.abs()))
    }

    /// Attempts one step of size `h` from `(t, y)`. Requires `k[0] = f(t, y)`.
    fn attempt(&mut self, t: f64, y: &[f64], h: f64) -> Result<f64> {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.y_stage[i] = y[i] + h * acc;
            }
            let ys = std::mem::take(&mut self.y_stage);
            let r = self.eval(t + C[s] * h, &ys, s);
            self.y_stage = ys;
            r?;
        }
        // The last stage is evaluated at the fifth-order solution.
        self.y_new.copy_from_slice(&self.y_stage);
        Ok(self.err_norm(y, h))
    }

    /// Advances `y` from `t0` to exactly `t1`, returning the last accepted step size.
    fn advance(&mut self, y: &mut [f64], t0: f64, t1: f64, mut h: f64) -> Result<f64> {
        const BETA: f64 = 0.04;
        const EXPO: f64 = 0.2 - BETA * 0.75;
        const SAFE: f64 = 0.9;
        let mut t = t0;
        let mut last = false;
        while !last {
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::Divergence { t });
            }
            if h < MIN_STEP {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let mut step = h;
            if t + step * 1.01 >= t1 {
                step = t1 - t;
                last = true;
            }
            let err = self.attempt(t, y, step)?;
            if !err.is_finite() {
                self.stats.rejected += 1;
                h = step * 0.1;
                last = false;
                continue;
            }
            let fac11 = err.powf(EXPO);
            let fac = (fac11 / self.err_old.powf(BETA) / SAFE).clamp(0.2, 10.0);
            if err <= 1.0 {
                self.stats.accepted += 1;
                self.err_old = err.max(1e-4);
                y.copy_from_slice(&self.y_new);
                t = if last { t1 } else { t + step };
                self.k.swap(0, 6);
                h = step / fac;
            } else {
                self.stats.rejected += 1;
                h = step / (fac11 / SAFE).min(10.0);
                last = false;
            }
        }
        Ok(h)
    }
}

/// Integrates `y' = f(t, y)` from `times[0]` and returns the state at every
/// entry of `times` (which must be increasing). Grid times are hit exactly.
pub fn integrate_grid<F>(f: F, y0: &[f64], times: &[f64], tol: Tolerances, stats: &mut Stats) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("output times must be strictly increasing".into()));
    }
    let n = y0.len();
    let mut st = Stepper {
        f,
        tol,
        k: std::array::from_fn(|_| vec![0.0; n]),
        y_stage: vec![0.0; n],
        y_new: vec![0.0; n],
        err_old: 1e-4,
        stats,
    };
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    out.push(y.clone());
    if times.len() < 2 {
        return Ok(out);
    }
    st.eval(times[0], &y, 0)?;
    let mut h = st.initial_step(times[0], &y, times[times.len() - 1] - times[0])?;
    for w in times.windows(2) {
        h = st.advance(&mut y, w[0], w[1], h)?;
        out.push(y.clone());
    }
    Ok(out)
}

/// Endpoint of `y' = f(t, y)` over `[0, t_end]`.
pub fn integrate<F>(f: F, y0: &[f64], t_end: f64, rtol: f64, atol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let mut stats = Stats::default();
    let mut out = integrate_grid(f, y0, &[0.0, t_end], Tolerances::new(rtol, atol)?, &mut stats)?;
    Ok(out.pop().expect("two grid points"))
}

/// States at `t0 + k·dt` for `k = 0..n_points`.
pub fn integrate_uniform<F>(f: F, y0: &[f64], dt: f64, n_points: usize, tol: Tolerances) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let times: Vec<f64> = (0..n_points).map(|k| k as f64 * dt).collect();
    integrate_grid(f, y0, &times, tol, &mut Stats::default())
}
