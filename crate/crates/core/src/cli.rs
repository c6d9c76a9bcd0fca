//! Command-line front end.

use crate::dataset::{
    generate_dataset, load_dataset, sample_initial, save_dataset, stream_rng, DataPair, SamplerConfig, AUX_STREAM,
};
use crate::diagnostics::{
    compare, energy_oscillation_ratio, fit_mae_envelope, growth_exponent, lyapunov, mae_bound_ratio, LyapunovConfig,
    MaeSelection,
};
use crate::error::{Error, Result};
use crate::layers::Activation;
use crate::lie::Rotation;
use crate::network::{Model, Network, NetworkSpec};
use crate::systems::{State, System};
use crate::training::{gradient_check, train, Batch, TrainConfig};
use crate::Case;
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Largest finite-difference residual the gradient check accepts.
pub const GRADIENT_CHECK_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "clpnet", version, about = "Learn coupled Lie-Poisson dynamics with Poisson-map networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate ground-truth trajectories (JSONL plus manifest).
    GenData(GenDataArgs),
    /// Train a network on a dataset and write the model file.
    Train(TrainArgs),
    /// Iterate a trained model and write the states as CSV.
    Rollout(RolloutArgs),
    /// Compare a model rollout with ground truth and write metrics CSV.
    Eval(EvalArgs),
    /// Estimate the largest Lyapunov exponent of the reference system.
    Lyapunov(LyapunovArgs),
    /// Compare reverse-mode gradients with finite differences.
    GradientCheck(GradientCheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    #[arg(long, value_enum)]
    pub case: Option<Case>,
    /// Use the altered Hamiltonian with this ζ.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// JSON system configuration; missing entries take the defaults.
    #[arg(long)]
    pub system: Option<PathBuf>,
}

impl SystemArgs {
    fn build(&self, case: Case) -> Result<System> {
        if let Some(c) = self.case {
            c.expect(case)?;
        }
        let sys = match &self.system {
            Some(p) => {
                let s = System::load(p)?;
                case.expect(s.case())?;
                s
            }
            None => System::default_for(case),
        };
        match self.zeta {
            Some(z) => sys.with_zeta(Some(z)),
            None => Ok(sys),
        }
    }

    fn required_case(&self) -> Result<Case> {
        match (self.case, &self.system) {
            (Some(c), _) => Ok(c),
            (None, Some(p)) => Ok(System::load(p)?.case()),
            (None, None) => Err(Error::InvalidParameter("--case is required".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 20)]
    pub n_traj: usize,
    /// States per trajectory.
    #[arg(long, default_value_t = 51)]
    pub n_steps: usize,
    /// Sample from the narrower evaluation ranges instead of the training ranges.
    #[arg(long)]
    pub evaluation: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Expected case; a dataset of another case exits with status 2.
    #[arg(long, value_enum)]
    pub case: Option<Case>,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 3)]
    pub cycles: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Data step; must match the dataset when given.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Initial parameters: a JSON file, a comma-separated list, or one value for all.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub lr_initial: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lr_final: f64,
    #[arg(long, value_enum, default_value_t = Activation::Tanh)]
    pub activation: Activation,
    /// Check gradients against finite differences before training.
    #[arg(long)]
    pub gradient_check: bool,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Loss log (CSV); defaults to the model path with extension `loss.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InitialState {
    /// Initial state: a JSON file or a comma-separated flat state.
    #[arg(long)]
    pub init: Option<String>,
    /// Seed for sampling the initial state from the evaluation ranges (stream 0) when `--init` is absent.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl InitialState {
    fn resolve(&self, case: Case) -> Result<State> {
        match &self.init {
            Some(spec) => parse_state(case, spec),
            None => sample_initial(&SamplerConfig::evaluation(case), &mut stream_rng(self.seed, 0)),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RolloutArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub start: InitialState,
    /// Number of model steps.
    #[arg(long, alias = "steps", default_value_t = 5000)]
    pub n_steps: usize,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub start: InitialState,
    #[arg(long, alias = "steps", default_value_t = 5000)]
    pub n_steps: usize,
    #[arg(long, value_enum, default_value_t = MaeSelection::Momenta)]
    pub mae: MaeSelection,
    /// Metrics CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub start: InitialState,
    #[arg(long, default_value_t = 1e-8)]
    pub delta0: f64,
    #[arg(long, default_value_t = 200.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub renorm_dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GradientCheckArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 3)]
    pub cycles: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset to evaluate the loss on; a small generated one otherwise.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Check at these parameters instead of random draws.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub draws: usize,
    #[arg(long, default_value_t = GRADIENT_CHECK_TOLERANCE)]
    pub tolerance: f64,
}

/// Parses `--init`: an existing file holding a JSON array or a saved model, or an inline
/// comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Values {
        List(Vec<f64>),
        Model { params: Vec<f64> },
    }
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(match serde_json::from_str(&std::fs::read_to_string(path)?)? {
            Values::List(v) | Values::Model { params: v } => v,
        });
    }
    spec.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("cannot parse `{s}` as a number"))))
        .collect()
}

/// Flat state from `--init`, with the orientation checked to be a rotation.
pub fn parse_state(case: Case, spec: &str) -> Result<State> {
    let s = State::from_flat(case, &parse_values(spec)?)?;
    if let Some(m) = s.orientation() {
        Rotation::new(*m)?;
    }
    Ok(s)
}

/// Column names of a flattened state.
pub fn component_names(case: Case) -> Vec<String> {
    fn vec3(n: &'static str) -> impl Iterator<Item = String> {
        (1..=3).map(move |i| format!("{n}_{i}"))
    }
    fn mat3(n: &'static str) -> impl Iterator<Item = String> {
        (1..=3).flat_map(move |i| (1..=3).map(move |j| format!("{n}{i}{j}")))
    }
    match case {
        Case::So2 => vec!["mu1".into(), "mu2".into(), "phi".into()],
        Case::So3 => vec3("mu1").chain(vec3("mu2")).chain(mat3("p")).collect(),
        Case::Se3 => vec3("alpha1")
            .chain(vec3("beta1"))
            .chain(vec3("alpha2"))
            .chain(vec3("beta2"))
            .chain(mat3("q"))
            .chain(vec3("v"))
            .collect(),
    }
}

fn cmd_gen_data(a: &GenDataArgs, out: &mut dyn Write) -> Result<()> {
    let case = a.system.required_case()?;
    let system = a.system.build(case)?;
    let base = if a.evaluation { SamplerConfig::evaluation(case) } else { SamplerConfig::training(case) };
    let cfg = SamplerConfig { n_traj: a.n_traj, n_steps: a.n_steps, dt: a.dt, seed: a.seed, ..base };
    let data = generate_dataset(&system, &cfg)?;
    save_dataset(&a.out, &data, &cfg)?;
    writeln!(out, "wrote {} trajectories, {} pairs to {}", data.trajectories.len(), data.pairs.len(), a.out.display())?;
    Ok(())
}

fn load_pairs(path: &Path, expected: Option<Case>) -> Result<(Case, f64, Vec<DataPair>)> {
    let data = load_dataset(path)?;
    let first = data.trajectories.first().ok_or_else(|| Error::InvalidParameter("dataset is empty".into()))?;
    let (case, dt) = (first.case, first.dt);
    if let Some(c) = expected {
        c.expect(case)?;
    }
    for t in &data.trajectories {
        case.expect(t.case)?;
        if t.dt != dt {
            return Err(Error::InvalidParameter("trajectories use different time steps".into()));
        }
    }
    Ok((case, dt, data.pairs))
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let (case, dt, pairs) = load_pairs(&a.data, a.case)?;
    if let Some(d) = a.dt {
        if (d - dt).abs() > 1e-12 * dt {
            return Err(Error::InvalidParameter(format!("--dt {d} does not match the dataset step {dt}")));
        }
    }
    let net = Network::build(NetworkSpec { case, cycles: a.cycles, dt, activation: a.activation })?;
    let init = match &a.init {
        Some(spec) => {
            let v = parse_values(spec)?;
            if v.len() == 1 {
                vec![v[0]; net.n_params()]
            } else {
                v
            }
        }
        None => net.init_params(&mut stream_rng(a.seed, AUX_STREAM), NetworkSpec::default_init_range(case))?,
    };
    net.check_params(&init)?;
    let batch = Batch::new(&net, &pairs)?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        lr_initial: a.lr_initial,
        lr_final: a.lr_final,
        seed: a.seed,
        gradient_check: a.gradient_check,
        ..TrainConfig::default()
    };
    cfg.validate()?;
    if a.gradient_check {
        let r = gradient_check(&net, &init, &batch)?;
        writeln!(out, "gradient check: max residual {r:.3e}")?;
        if !(r <= GRADIENT_CHECK_TOLERANCE) {
            return Err(Error::GradientCheck { residual: r, tolerance: GRADIENT_CHECK_TOLERANCE });
        }
    }
    let (params, report) = train(&net, &init, &batch, &TrainConfig { gradient_check: false, ..cfg })?;
    let model = Model::new(&net, params)?;
    model.save(&a.out)?;
    let log = a.log.clone().unwrap_or_else(|| a.out.with_extension("loss.csv"));
    report.write_csv(&log)?;
    writeln!(
        out,
        "{case}: {} pairs, {} parameters, loss {:.3e} -> {:.3e} in {:.1}s; model {}",
        batch.len(),
        net.n_params(),
        report.initial_loss,
        report.final_loss,
        report.wall_time,
        a.out.display()
    )?;
    Ok(())
}

fn write_states(w: &mut dyn Write, case: Case, dt: f64, states: &[State]) -> Result<()> {
    writeln!(w, "step,t,{}", component_names(case).join(","))?;
    let mut flat = vec![0.0; case.dim()];
    for (k, s) in states.iter().enumerate() {
        s.write_flat(&mut flat);
        let row: Vec<String> = flat.iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{k},{},{}", k as f64 * dt, row.join(","))?;
    }
    Ok(())
}

fn cmd_rollout(a: &RolloutArgs, out: &mut dyn Write) -> Result<()> {
    let model = Model::load(&a.model)?;
    let net = model.network()?;
    let s0 = a.start.resolve(model.case)?;
    let states = net.rollout(&model.params, &s0, a.n_steps)?;
    match &a.out {
        Some(p) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(p)?);
            write_states(&mut w, model.case, model.dt, &states)?;
            w.flush()?;
            writeln!(out, "wrote {} states to {}", states.len(), p.display())?;
        }
        None => write_states(out, model.case, model.dt, &states)?,
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = Model::load(&a.model)?;
    let net = model.network()?;
    let system = a.system.build(model.case)?;
    let s0 = a.start.resolve(model.case)?;
    let cmp = compare(&net, &model.params, &system, &s0, a.n_steps, a.mae)?;
    if let Some(p) = &a.out {
        cmp.write_csv(p)?;
    }
    writeln!(out, "Casimir drift (relative): model {:.3e}, truth {:.3e}", cmp.model.casimir_drift(), cmp.truth.casimir_drift())?;
    let k = (a.n_steps / 10).max(1) + 1;
    writeln!(out, "energy oscillation ratio (run / first {} states): {:.3}", k, energy_oscillation_ratio(&cmp.model.energy, k))?;
    let t = &cmp.model.t;
    let t_end = 50.0f64.min(*t.last().expect("rollout is non-empty"));
    if t_end > 5.0 {
        let lam = lyapunov(&system, &s0, &LyapunovConfig::default())?.lambda;
        let amp = fit_mae_envelope(t, &cmp.model.mae, lam, t_end);
        writeln!(out, "lambda {lam:.4}")?;
        writeln!(out, "MAE envelope A = {amp:.3e}, worst ratio on [0,{t_end}] {:.3}", mae_bound_ratio(t, &cmp.model.mae, lam, amp, t_end))?;
        writeln!(out, "MAE growth exponent on [5,{t_end}] {:.4}", growth_exponent(t, &cmp.model.mae, 5.0, t_end)?)?;
    }
    writeln!(out, "final MAE {:.3e}", cmp.model.mae.last().copied().unwrap_or(0.0))?;
    Ok(())
}

fn cmd_lyapunov(a: &LyapunovArgs, out: &mut dyn Write) -> Result<()> {
    let case = a.system.required_case()?;
    let system = a.system.build(case)?;
    let s0 = a.start.resolve(case)?;
    let cfg = LyapunovConfig { delta0: a.delta0, horizon: a.horizon, renorm_dt: a.renorm_dt, ..Default::default() };
    let est = lyapunov(&system, &s0, &cfg)?;
    writeln!(out, "lambda {:.6}", est.lambda)?;
    Ok(())
}

fn cmd_gradient_check(a: &GradientCheckArgs, out: &mut dyn Write) -> Result<()> {
    let (case, net, fixed) = match &a.model {
        Some(p) => {
            let m = Model::load(p)?;
            if let Some(c) = a.system.case {
                c.expect(m.case)?;
            }
            (m.case, m.network()?, Some(m.params))
        }
        None => {
            let case = a.system.required_case()?;
            (case, Network::build(NetworkSpec::new(case).with_cycles(a.cycles).with_dt(a.dt))?, None)
        }
    };
    let pairs = match &a.data {
        Some(p) => load_pairs(p, Some(case))?.2,
        None => {
            let system = a.system.build(case)?;
            let cfg = SamplerConfig { n_traj: 2, n_steps: 6, dt: net.spec.dt, ..SamplerConfig::training(case).with_seed(a.seed) };
            generate_dataset(&system, &cfg)?.pairs
        }
    };
    let batch = Batch::new(&net, &pairs)?;
    let draws: Vec<Vec<f64>> = match fixed {
        Some(p) => vec![p],
        None => {
            let mut rng = stream_rng(a.seed, AUX_STREAM);
            let range = NetworkSpec::default_init_range(case);
            (0..a.draws.max(1)).map(|_| net.init_params(&mut rng, range)).collect::<Result<_>>()?
        }
    };
    let mut worst = 0.0f64;
    for p in &draws {
        worst = worst.max(gradient_check(&net, p, &batch)?);
    }
    writeln!(out, "gradient check ({case}, {} draws): max residual {worst:.3e}", draws.len())?;
    if !(worst <= a.tolerance) {
        return Err(Error::GradientCheck { residual: worst, tolerance: a.tolerance });
    }
    Ok(())
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => cmd_gen_data(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Rollout(a) => cmd_rollout(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Lyapunov(a) => cmd_lyapunov(a, out),
        Command::GradientCheck(a) => cmd_gradient_check(a, out),
    }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
