//! Population state, seeded randomness and the transaction loop.
//!
//! One step is one transaction between an ordered pair `(i, j)`, `i ≠ j`,
//! drawn uniformly from the `N(N-1)` ordered pairs. Replica `r` of a run with
//! master seed `s` draws from the ChaCha8 stream `(s, r)`; `run` uses replica 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KinexError, Result};
use crate::kernels::{self, AgentParams, KernelSpec};
use crate::operators::{ExchangeOperator, WealthPair};

/// Initial wealth assignment. Every choice is rescaled to total `N`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialWealth {
    /// Independent `U[0, 2]` draws.
    #[default]
    UniformU02,
    /// Everybody holds 1.
    EqualUnit,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub agents: usize,
    pub steps: u64,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub init: InitialWealth,
    /// Step indices at which [`run`] records the wealth vector; empty means
    /// just the final step.
    #[serde(default)]
    pub snapshot_at: Vec<u64>,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_ensemble() -> usize {
    DEFAULT_ENSEMBLE
}

pub const DEFAULT_ENSEMBLE: usize = 100;

impl SimulationConfig {
    pub fn new(agents: usize, steps: u64, kernel: KernelSpec) -> Self {
        Self {
            agents,
            steps,
            kernel,
            init: InitialWealth::UniformU02,
            snapshot_at: Vec::new(),
            ensemble: DEFAULT_ENSEMBLE,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ensemble(mut self, ensemble: usize) -> Self {
        self.ensemble = ensemble;
        self
    }

    pub fn with_init(mut self, init: InitialWealth) -> Self {
        self.init = init;
        self
    }

    pub fn with_snapshots(mut self, at: Vec<u64>) -> Self {
        self.snapshot_at = at;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(KinexError::Config(m));
        if self.agents < 2 {
            return err(format!("agents must be at least 2, got {}", self.agents));
        }
        if self.ensemble < 1 {
            return err("ensemble must be at least 1".into());
        }
        if let Some(&s) = self.snapshot_at.iter().find(|&&s| s > self.steps) {
            return err(format!("snapshot step {s} exceeds steps = {}", self.steps));
        }
        self.kernel.validate()?;
        if let InitialWealth::Custom(w) = &self.init {
            if w.len() != self.agents {
                return err(format!("custom wealth has {} entries for {} agents", w.len(), self.agents));
            }
            if let Some(bad) = w.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return err(format!("custom wealth entry {bad} is negative or not finite"));
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return err("custom wealth has zero total".into());
            }
        }
        Ok(())
    }

    /// Sorted, de-duplicated snapshot schedule (defaults to the final step).
    pub fn snapshot_schedule(&self) -> Vec<u64> {
        let mut at = if self.snapshot_at.is_empty() { vec![self.steps] } else { self.snapshot_at.clone() };
        at.sort_unstable();
        at.dedup();
        at
    }
}

/// Random stream of replica `replica` under master seed `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub wealth: Vec<f64>,
    pub params: AgentParams,
}

impl Population {
    pub fn len(&self) -> usize {
        self.wealth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wealth.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.wealth.iter().sum()
    }
}

fn rescale_to_count(mut w: Vec<f64>) -> Vec<f64> {
    let scale = w.len() as f64 / w.iter().sum::<f64>();
    w.iter_mut().for_each(|v| *v *= scale);
    w
}

/// Draws the initial wealth and the frozen agent parameters, in that order.
pub fn init_population<R: Rng + ?Sized>(cfg: &SimulationConfig, rng: &mut R) -> Result<Population> {
    cfg.validate()?;
    let n = cfg.agents;
    let wealth = match &cfg.init {
        InitialWealth::UniformU02 => rescale_to_count((0..n).map(|_| 2.0 * rng.random::<f64>()).collect()),
        InitialWealth::EqualUnit => vec![1.0; n],
        InitialWealth::Custom(w) => rescale_to_count(w.clone()),
    };
    let dist = cfg.kernel.param_dist();
    let draw = |rng: &mut R| (0..n).map(|_| dist.sample(rng.random::<f64>())).collect::<Vec<_>>();
    let eps = draw(rng);
    let rho = draw(rng);
    let lambda = draw(rng);
    Ok(Population { wealth, params: AgentParams { eps, rho, lambda } })
}

/// Uniform ordered pair `i ≠ j`.
#[inline]
pub(crate) fn draw_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Applies `kernel` to agents `(i, j)` holding `p`, drawing any fresh variates
/// from `rng`. Returns the new pair and the tax levied (zero except for
/// [`KernelSpec::Taxation`]).
#[inline]
fn transact<R: Rng + ?Sized>(
    kernel: &KernelSpec,
    params: &AgentParams,
    i: usize,
    j: usize,
    p: WealthPair,
    rng: &mut R,
) -> (WealthPair, f64) {
    match *kernel {
        KernelSpec::Basic => (kernels::basic_unchecked(p, rng.random()), 0.0),
        KernelSpec::UniformSavings { lambda } => (kernels::savings_unchecked(p, lambda, rng.random()), 0.0),
        KernelSpec::Taxation { f } => kernels::taxed_unchecked(p, f, rng.random()),
        KernelSpec::HeterogeneousSavings { .. } => (
            kernels::hetero_savings_unchecked(p, params.lambda[i], params.lambda[j], rng.random()),
            0.0,
        ),
        KernelSpec::Interpolated { xi } => {
            let eps: f64 = rng.random();
            let eps_prime: f64 = rng.random();
            (ExchangeOperator::interpolated_unchecked(xi, eps, eps_prime).apply(p), 0.0)
        }
        KernelSpec::TwoParamPlus => {
            let eps: f64 = rng.random();
            let rho: f64 = rng.random();
            (ExchangeOperator::from_top_row(eps, rho).apply(p), 0.0)
        }
        KernelSpec::TwoParamMinus => {
            let eps: f64 = rng.random();
            let rho: f64 = rng.random();
            (ExchangeOperator::from_top_row(eps, 1.0 - rho).apply(p), 0.0)
        }
        KernelSpec::RiskAversion { .. } => (
            ExchangeOperator::from_top_row(params.eps[i], params.rho[j]).apply(p),
            0.0,
        ),
    }
}

/// One transaction on `pop`. Taxes are redistributed to all agents in the
/// same step, which costs `O(N)`; [`Simulation`] does the same in `O(1)`.
pub fn step<R: Rng + ?Sized>(pop: &mut Population, kernel: &KernelSpec, rng: &mut R) {
    let (i, j) = draw_pair(rng, pop.len());
    let p = WealthPair { wi: pop.wealth[i], wj: pop.wealth[j] };
    let (out, tau) = transact(kernel, &pop.params, i, j, p, rng);
    pop.wealth[i] = out.wi;
    pop.wealth[j] = out.wj;
    if tau > 0.0 {
        let share = tau / pop.len() as f64;
        pop.wealth.iter_mut().for_each(|w| *w += share);
    }
}

/// Wealth vector recorded at a given step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub wealth: Vec<f64>,
}

/// A running replica.
///
/// Uniform tax redistribution is tracked as a pending per-agent dividend:
/// agent `n` holds `stored[n] + dividend`. The dividend is folded into the
/// stored values every `N` steps, so each step stays `O(1)`.
pub struct Simulation {
    stored: Vec<f64>,
    params: AgentParams,
    kernel: KernelSpec,
    rng: ChaCha8Rng,
    steps_done: u64,
    dividend: f64,
    since_fold: usize,
}

impl Simulation {
    /// Initializes replica `replica` of `cfg`.
    pub fn new(cfg: &SimulationConfig, replica: u64) -> Result<Self> {
        let mut rng = replica_rng(cfg.seed, replica);
        let pop = init_population(cfg, &mut rng)?;
        Ok(Self::from_population(pop, cfg.kernel, rng))
    }

    pub fn from_population(pop: Population, kernel: KernelSpec, rng: ChaCha8Rng) -> Self {
        Self {
            stored: pop.wealth,
            params: pop.params,
            kernel,
            rng,
            steps_done: 0,
            dividend: 0.0,
            since_fold: 0,
        }
    }

    pub fn steps_done(&self) -> u64 {
        self.steps_done
    }

    pub fn params(&self) -> &AgentParams {
        &self.params
    }

    #[inline]
    pub fn step(&mut self) {
        let n = self.stored.len();
        let (i, j) = draw_pair(&mut self.rng, n);
        let d = self.dividend;
        let p = WealthPair { wi: self.stored[i] + d, wj: self.stored[j] + d };
        let (out, tau) = transact(&self.kernel, &self.params, i, j, p, &mut self.rng);
        self.stored[i] = out.wi - d;
        self.stored[j] = out.wj - d;
        self.steps_done += 1;
        if tau > 0.0 {
            self.dividend += tau / n as f64;
            self.since_fold += 1;
            if self.since_fold >= n {
                self.fold();
            }
        }
    }

    fn fold(&mut self) {
        let d = self.dividend;
        if d != 0.0 {
            self.stored.iter_mut().for_each(|w| *w += d);
        }
        self.dividend = 0.0;
        self.since_fold = 0;
    }

    /// Advances until `steps_done == target` (no-op if already past it).
    pub fn run_until(&mut self, target: u64) {
        while self.steps_done < target {
            self.step();
        }
    }

    /// Current wealth of every agent.
    pub fn wealth(&mut self) -> Vec<f64> {
        self.fold();
        self.stored.clone()
    }

    pub fn snapshot(&mut self) -> Snapshot {
        Snapshot { step: self.steps_done, wealth: self.wealth() }
    }
}

/// Runs replica `replica` of `cfg`, recording its snapshot schedule.
pub fn run_replica(cfg: &SimulationConfig, replica: u64) -> Result<Vec<Snapshot>> {
    let mut sim = Simulation::new(cfg, replica)?;
    let mut out = Vec::new();
    for at in cfg.snapshot_schedule() {
        sim.run_until(at);
        out.push(sim.snapshot());
    }
    Ok(out)
}

/// Runs replica 0 of `cfg` and returns its snapshots.
pub fn run(cfg: &SimulationConfig) -> Result<Vec<Snapshot>> {
    run_replica(cfg, 0)
}
