//! Primal-dual comparison bidders.
//!
//! Both baselines play a meta-game between an adversarial-bandit primal
//! learner over the bid grid and a dual controller that prices the two
//! constraints:
//!
//! - `exp3p1` primal with a dual-stabilized entropic mirror-descent dual
//!   (`ds_omd`),
//! - `exp_ix` primal with a deterministic time-decaying dual schedule.
//!
//! The cited algorithms do not fix hyperparameters for this setting, so the
//! defaults here are reconstructions: dual cap `1/rho`, dual learning rate
//! `1/sqrt(T)`, stabilization weight `1/t`, Exp3.P.1 parameters from its
//! theorem statement with `delta = 1/T`, and EXP-IX implicit exploration
//! `eta / 2` with `eta = sqrt(2 log K / (K T))`. All of them are exposed
//! through the harness config.

use crate::auction::AuctionRound;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimalAlgo {
    Exp3P1,
    ExpIx,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaselineError {
    /// Payoff (exp3p1) or loss (exp_ix) fed to the primal learner must lie
    /// in [0, 1] after rescaling.
    PayoffRange,
}

impl std::fmt::Display for BaselineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BaselineError::PayoffRange => write!(f, "primal feedback outside [0, 1]"),
        }
    }
}

impl std::error::Error for BaselineError {}

/// Exp3.P parameters; the theorem values depend on the arm count, the
/// horizon, and the confidence level.
#[derive(Debug, Clone, Copy)]
pub struct Exp3Params {
    pub gamma: f64,
    pub alpha: f64,
}

impl Exp3Params {
    /// Theorem-statement choice for a known horizon and confidence `delta`.
    pub fn from_theorem(k: usize, horizon: u64, delta: f64) -> Self {
        let kf = k as f64;
        let t = horizon as f64;
        let gamma = (2.0 * (3.0 * kf * kf.ln() / (5.0 * t)).sqrt()).min(0.6);
        let alpha = 2.0 * (kf * t / delta).ln().sqrt();
        Self { gamma, alpha }
    }
}

/// EXP-IX parameters.
#[derive(Debug, Clone, Copy)]
pub struct ExpIxParams {
    pub eta: f64,
    pub gamma_ix: f64,
}

impl ExpIxParams {
    pub fn default_for(k: usize, horizon: u64) -> Self {
        let kf = k as f64;
        let eta = (2.0 * kf.ln() / (kf * horizon as f64)).sqrt();
        Self {
            eta,
            gamma_ix: eta / 2.0,
        }
    }
}

/// Primal learner state over the bid grid. Weights are kept in log space;
/// the induced probabilities always sum to one.
#[derive(Debug, Clone)]
pub struct PrimalState {
    pub algo: PrimalAlgo,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    pub round: u64,
    horizon: u64,
    // exp3p1
    gamma: f64,
    alpha: f64,
    // exp_ix
    eta: f64,
    gamma_ix: f64,
}

impl PrimalState {
    pub fn exp3p1(k: usize, horizon: u64, params: Exp3Params) -> Self {
        assert!(k >= 1 && horizon >= 1);
        // Exp3.P initializes every weight at exp((alpha*gamma/3) sqrt(T/K));
        // only the common log offset matters for the probabilities.
        let init = params.alpha * params.gamma / 3.0 * (horizon as f64 / k as f64).sqrt();
        let mut state = Self {
            algo: PrimalAlgo::Exp3P1,
            log_weights: vec![init; k],
            probs: vec![0.0; k],
            round: 0,
            horizon,
            gamma: params.gamma,
            alpha: params.alpha,
            eta: 0.0,
            gamma_ix: 0.0,
        };
        state.recompute_probs();
        state
    }

    pub fn exp_ix(k: usize, horizon: u64, params: ExpIxParams) -> Self {
        assert!(k >= 1 && horizon >= 1);
        let mut state = Self {
            algo: PrimalAlgo::ExpIx,
            log_weights: vec![0.0; k],
            probs: vec![0.0; k],
            round: 0,
            horizon,
            gamma: 0.0,
            alpha: 0.0,
            eta: params.eta,
            gamma_ix: params.gamma_ix,
        };
        state.recompute_probs();
        state
    }

    pub fn arm_count(&self) -> usize {
        self.log_weights.len()
    }

    /// Current sampling distribution over the grid.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Exploration floor of the sampling distribution (zero for exp_ix).
    pub fn exploration_floor(&self) -> f64 {
        match self.algo {
            PrimalAlgo::Exp3P1 => self.gamma / self.arm_count() as f64,
            PrimalAlgo::ExpIx => 0.0,
        }
    }

    fn recompute_probs(&mut self) {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (p, &lw) in self.probs.iter_mut().zip(self.log_weights.iter()) {
            *p = (lw - max).exp();
            sum += *p;
        }
        for p in self.probs.iter_mut() {
            *p /= sum;
        }
        if self.algo == PrimalAlgo::Exp3P1 {
            let k = self.probs.len() as f64;
            for p in self.probs.iter_mut() {
                *p = (1.0 - self.gamma) * *p + self.gamma / k;
            }
        }
    }

    /// Fold the feedback for the arm just played into the weights: a payoff
    /// in [0, 1] for exp3p1, a loss in [0, 1] for exp_ix. Importance weights
    /// use the probabilities the arm was sampled from.
    pub fn update(&mut self, played: usize, feedback: f64) -> Result<(), BaselineError> {
        if !(0.0..=1.0).contains(&feedback) || !feedback.is_finite() {
            return Err(BaselineError::PayoffRange);
        }
        assert!(played < self.arm_count());
        let k = self.arm_count() as f64;
        match self.algo {
            PrimalAlgo::Exp3P1 => {
                let scale = self.gamma / (3.0 * k);
                let bonus_scale = self.alpha / (k * self.horizon as f64).sqrt();
                for j in 0..self.arm_count() {
                    let est = if j == played {
                        feedback / self.probs[j]
                    } else {
                        0.0
                    };
                    self.log_weights[j] += scale * (est + bonus_scale / self.probs[j]);
                }
            }
            PrimalAlgo::ExpIx => {
                let est = feedback / (self.probs[played] + self.gamma_ix);
                self.log_weights[played] -= self.eta * est;
            }
        }
        self.round += 1;
        self.recompute_probs();
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualMode {
    DsOmd,
    DecayingSchedule,
}

/// Dual controller over the pair (RoS multiplier, budget multiplier),
/// confined to the cap simplex `lambda >= 0, lambda_1 + lambda_2 <= cap`.
#[derive(Debug, Clone)]
pub struct DualState {
    pub lambdas: (f64, f64),
    pub mode: DualMode,
    pub cap: f64,
    /// Initial dual point; ds_omd stabilization mixes back toward it.
    pub anchor: (f64, f64),
    lr: f64,
    slack: f64,
    anchor_slack: f64,
    cum_viol: (f64, f64),
}

impl DualState {
    /// Entropic mirror-descent dual with stabilization, started at the
    /// interior uniform point of the cap simplex.
    pub fn ds_omd(cap: f64, lr: f64) -> Self {
        assert!(cap >= 0.0 && lr >= 0.0);
        let third = cap / 3.0;
        Self {
            lambdas: (third, third),
            mode: DualMode::DsOmd,
            cap,
            anchor: (third, third),
            lr,
            slack: third,
            anchor_slack: third,
            cum_viol: (0.0, 0.0),
        }
    }

    /// Deterministic schedule: multipliers proportional to the running
    /// average violation, damped by `t^(-1/4)`.
    pub fn decaying_schedule(cap: f64) -> Self {
        assert!(cap >= 0.0);
        Self {
            lambdas: (0.0, 0.0),
            mode: DualMode::DecayingSchedule,
            cap,
            anchor: (0.0, 0.0),
            lr: 0.0,
            slack: cap,
            anchor_slack: cap,
            cum_viol: (0.0, 0.0),
        }
    }

    /// Ascent step on the realized violations of round `t` (1-based).
    pub fn update(&mut self, violations: (f64, f64), t: u64) {
        debug_assert!(violations.0.is_finite() && violations.1.is_finite());
        debug_assert!(t >= 1);
        if self.cap == 0.0 {
            return;
        }
        match self.mode {
            DualMode::DsOmd => {
                let m1 = self.lambdas.0 * (self.lr * violations.0).exp();
                let m2 = self.lambdas.1 * (self.lr * violations.1).exp();
                let m0 = self.slack;
                let scale = self.cap / (m0 + m1 + m2);
                // Stabilization: geometric mixing toward the anchor with
                // weight 1/t applied at the next iterate.
                let beta = 1.0 / (t + 1) as f64;
                self.lambdas.0 = (1.0 - beta) * m1 * scale + beta * self.anchor.0;
                self.lambdas.1 = (1.0 - beta) * m2 * scale + beta * self.anchor.1;
                self.slack = (1.0 - beta) * m0 * scale + beta * self.anchor_slack;
            }
            DualMode::DecayingSchedule => {
                self.cum_viol.0 += violations.0;
                self.cum_viol.1 += violations.1;
                let damp = (t as f64).powf(-0.25);
                let mut l1 = (self.cum_viol.0 / t as f64).max(0.0) * self.cap * damp;
                let mut l2 = (self.cum_viol.1 / t as f64).max(0.0) * self.cap * damp;
                let sum = l1 + l2;
                if sum > self.cap {
                    l1 *= self.cap / sum;
                    l2 *= self.cap / sum;
                }
                self.lambdas = (l1, l2);
                self.slack = self.cap - l1 - l2;
            }
        }
    }
}

/// Raw penalized reward: realized value plus the dual-priced slack of both
/// constraints at the played bid.
pub fn lagrangian_payoff_raw(x: f64, q: f64, v: f64, lambdas: (f64, f64), rho: f64) -> f64 {
    let vx = v * x;
    vx + lambdas.0 * (vx - q) + lambdas.1 * (rho - q)
}

/// Penalized reward of the played bid, affinely rescaled from its a-priori
/// range (an interval of width `1 + 2 cap`) into [0, 1]. With `cap = 0` the
/// rescaling is the identity on the raw reward.
pub fn lagrangian_payoff(
    round: &AuctionRound,
    bid_index: usize,
    lambdas: (f64, f64),
    rho: f64,
    cap: f64,
) -> f64 {
    let raw = lagrangian_payoff_raw(
        round.alloc[bid_index],
        round.price_paid[bid_index],
        round.value,
        lambdas,
        rho,
    );
    ((raw + cap) / (1.0 + 2.0 * cap)).clamp(0.0, 1.0)
}

/// Outcome of one baseline round.
#[derive(Debug, Clone)]
pub struct BaselineStep {
    pub bid: f64,
    pub bid_index: usize,
    pub won: bool,
    pub reward: f64,
    pub spend: f64,
}

/// Play one round of the meta-game: sample a bid from the primal
/// distribution (one uniform draw), feed the penalized reward back to the
/// primal learner, and step the dual on the realized violations.
pub fn baseline_step(
    primal: &mut PrimalState,
    dual: &mut DualState,
    round: &AuctionRound,
    grid_bids: &[f64],
    rho: f64,
    rng: &mut SplitMix64,
) -> BaselineStep {
    let idx = rng.next_index(primal.probs());
    let scaled = lagrangian_payoff(round, idx, dual.lambdas, rho, dual.cap);
    let feedback = match primal.algo {
        PrimalAlgo::Exp3P1 => scaled,
        PrimalAlgo::ExpIx => 1.0 - scaled,
    };
    primal
        .update(idx, feedback)
        .expect("rescaled payoff lies in [0, 1]");
    let x = round.alloc[idx];
    let q = round.price_paid[idx];
    let reward = round.value * x;
    dual.update((q - reward, q - rho), primal.round);
    BaselineStep {
        bid: grid_bids[idx],
        bid_index: idx,
        won: x >= 1.0,
        reward,
        spend: q,
    }
}
