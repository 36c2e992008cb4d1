//! Constrained linear bandit over finite action sets.
//!
//! The same doubly-optimistic recipe as the bidding module, transplanted to
//! linear losses and linear long-term constraints: ridge estimates of the
//! loss and constraint vectors, confidence ellipsoids in the Gram norm, and
//! per-round selection of the optimistically-feasible action with the
//! lowest optimistic loss. Finite action sets keep the selection a scan; a
//! continuous action set would make it a hard nonconvex program.

use crate::rng::SplitMix64;
use crate::ucb::DomainError;

/// Ellipsoid radius `sqrt(d log(1 + (d B^2 / lambda) / delta)) + sqrt(lambda) B`.
///
/// Constant in the round index for a fixed confidence level.
pub fn beta(d: usize, norm_bound: f64, lambda: f64, delta: f64) -> Result<f64, DomainError> {
    if d < 1 {
        return Err(DomainError("dimension must be at least 1"));
    }
    if norm_bound < 0.0 || !norm_bound.is_finite() {
        return Err(DomainError("norm bound must be non-negative"));
    }
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(DomainError("lambda must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(DomainError("delta must lie in (0, 1)"));
    }
    let df = d as f64;
    let inner = 1.0 + (df * norm_bound * norm_bound / lambda) / delta;
    Ok((df * inner.ln()).sqrt() + lambda.sqrt() * norm_bound)
}

/// A linear loss, `m` linear constraints, and a finite action set.
#[derive(Debug, Clone)]
pub struct LinearInstance {
    pub dim: usize,
    pub loss: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    /// Bound on the parameter norms.
    pub norm_bound: f64,
    /// Standard deviation of the observation noise (1 = standard normal).
    pub noise_std: f64,
}

impl LinearInstance {
    /// Indices of actions feasible under the true constraints.
    pub fn feasible_actions(&self) -> Vec<usize> {
        (0..self.actions.len())
            .filter(|&j| {
                self.constraints
                    .iter()
                    .all(|g| dot(g, &self.actions[j]) <= 1e-12)
            })
            .collect()
    }

    /// The feasible action with the smallest true loss.
    pub fn optimal_action(&self) -> usize {
        let feasible = self.feasible_actions();
        assert!(
            !feasible.is_empty(),
            "instance has no feasible action; the generator guarantees one"
        );
        let mut best = feasible[0];
        for &j in &feasible[1..] {
            if dot(&self.loss, &self.actions[j]) < dot(&self.loss, &self.actions[best]) {
                best = j;
            }
        }
        best
    }

    /// Random instance with parameter norms at most `norm_bound` and
    /// unit-ball actions. Action sets are redrawn until the unconstrained
    /// loss minimizer is itself feasible: regret against the feasible
    /// optimum is then non-negative round by round, so regret-growth
    /// statistics measure learning speed rather than the (sublinear but
    /// sign-ambiguous) violation budget the optimism spends on
    /// barely-infeasible low-loss actions. Fully general instances can be
    /// built directly from the public fields.
    pub fn random(
        dim: usize,
        n_actions: usize,
        n_constraints: usize,
        norm_bound: f64,
        rng: &mut SplitMix64,
    ) -> Self {
        assert!(dim >= 1 && n_actions >= 1);
        let loss = random_in_ball(dim, norm_bound, rng);
        let constraints: Vec<Vec<f64>> = (0..n_constraints)
            .map(|_| random_in_ball(dim, norm_bound, rng))
            .collect();
        loop {
            let actions: Vec<Vec<f64>> = (0..n_actions)
                .map(|_| random_in_ball(dim, 1.0, rng))
                .collect();
            let inst = Self {
                dim,
                loss: loss.clone(),
                constraints: constraints.clone(),
                actions,
                norm_bound,
                noise_std: 1.0,
            };
            if inst.feasible_actions().is_empty() {
                continue;
            }
            let global_min = (0..inst.actions.len())
                .min_by(|&a, &b| {
                    dot(&inst.loss, &inst.actions[a])
                        .partial_cmp(&dot(&inst.loss, &inst.actions[b]))
                        .unwrap()
                })
                .unwrap();
            if inst.optimal_action() == global_min {
                return inst;
            }
        }
    }
}

fn random_in_ball(dim: usize, radius: f64, rng: &mut SplitMix64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_normal()).collect();
    let norm = dot(&v, &v).sqrt();
    let scale = if norm > 0.0 {
        radius * rng.next_f64() / norm
    } else {
        0.0
    };
    for x in v.iter_mut() {
        *x *= scale;
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn mat_vec(a: &[f64], dim: usize, x: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|i| dot(&a[i * dim..(i + 1) * dim], x))
        .collect()
}

/// Ridge-regression state shared by the loss and all constraint estimators
/// (they see the same actions, so one Gram matrix serves them all).
#[derive(Debug, Clone)]
pub struct RidgeState {
    pub dim: usize,
    /// `V_t = lambda I + sum x_s x_s^T`, row-major.
    pub gram: Vec<f64>,
    /// Maintained incrementally by rank-1 updates.
    pub gram_inv: Vec<f64>,
    resp_loss: Vec<f64>,
    resp_costs: Vec<Vec<f64>>,
    pub f_hat: Vec<f64>,
    pub g_hats: Vec<Vec<f64>>,
    pub t: u64,
    pub lambda: f64,
    pub norm_bound: f64,
    pub delta: f64,
}

impl RidgeState {
    pub fn new(dim: usize, n_constraints: usize, lambda: f64, norm_bound: f64, delta: f64) -> Self {
        assert!(lambda > 0.0);
        let mut gram = vec![0.0; dim * dim];
        let mut gram_inv = vec![0.0; dim * dim];
        for i in 0..dim {
            gram[i * dim + i] = lambda;
            gram_inv[i * dim + i] = 1.0 / lambda;
        }
        Self {
            dim,
            gram,
            gram_inv,
            resp_loss: vec![0.0; dim],
            resp_costs: vec![vec![0.0; dim]; n_constraints],
            f_hat: vec![0.0; dim],
            g_hats: vec![vec![0.0; dim]; n_constraints],
            t: 0,
            lambda,
            norm_bound,
            delta,
        }
    }

    pub fn beta(&self) -> f64 {
        beta(self.dim, self.norm_bound, self.lambda, self.delta)
            .expect("ridge state holds validated parameters")
    }

    /// `sqrt(x^T V^{-1} x)`.
    pub fn v_inv_norm(&self, x: &[f64]) -> f64 {
        let vx = mat_vec(&self.gram_inv, self.dim, x);
        dot(x, &vx).max(0.0).sqrt()
    }

    /// Fold one observation into the Gram matrix (rank-1 inverse update)
    /// and refresh the ridge estimates.
    pub fn update(&mut self, action: &[f64], loss_obs: f64, cost_obs: &[f64]) {
        assert_eq!(action.len(), self.dim);
        assert_eq!(cost_obs.len(), self.resp_costs.len());
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                self.gram[i * d + j] += action[i] * action[j];
            }
        }
        // Sherman-Morrison: (V + xx^T)^{-1} = V^{-1} - (V^{-1}x)(V^{-1}x)^T / (1 + x^T V^{-1} x).
        let vx = mat_vec(&self.gram_inv, d, action);
        let denom = 1.0 + dot(action, &vx);
        for i in 0..d {
            for j in 0..d {
                self.gram_inv[i * d + j] -= vx[i] * vx[j] / denom;
            }
        }
        for (r, &a) in self.resp_loss.iter_mut().zip(action.iter()) {
            *r += loss_obs * a;
        }
        for (resp, &c) in self.resp_costs.iter_mut().zip(cost_obs.iter()) {
            for (r, &a) in resp.iter_mut().zip(action.iter()) {
                *r += c * a;
            }
        }
        self.f_hat = mat_vec(&self.gram_inv, d, &self.resp_loss);
        for (g_hat, resp) in self.g_hats.iter_mut().zip(self.resp_costs.iter()) {
            *g_hat = mat_vec(&self.gram_inv, d, resp);
        }
        self.t += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyActionSet;

impl std::fmt::Display for EmptyActionSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "action set is empty")
    }
}

impl std::error::Error for EmptyActionSet {}

/// The selected action index, with a flag for the liveness fallback (no
/// action was optimistically feasible, so the least-violating one was
/// returned instead).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionChoice {
    pub index: usize,
    pub fallback: bool,
}

/// Pick the optimistically-feasible action with the smallest optimistic
/// loss. An action is optimistically feasible when every constraint
/// estimate minus the ellipsoid bonus is non-positive.
pub fn select_action(
    state: &RidgeState,
    actions: &[Vec<f64>],
) -> Result<ActionChoice, EmptyActionSet> {
    if actions.is_empty() {
        return Err(EmptyActionSet);
    }
    let b = state.beta();
    let mut best: Option<(usize, f64)> = None;
    let mut least_violating: Option<(usize, f64)> = None;
    for (j, x) in actions.iter().enumerate() {
        let bonus = b * state.v_inv_norm(x);
        let worst_constraint = if state.g_hats.is_empty() {
            f64::NEG_INFINITY
        } else {
            state
                .g_hats
                .iter()
                .map(|g| dot(g, x) - bonus)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        if worst_constraint <= 0.0 {
            let optimistic_loss = dot(&state.f_hat, x) - bonus;
            if best.is_none_or(|(_, cur)| optimistic_loss < cur) {
                best = Some((j, optimistic_loss));
            }
        }
        if least_violating.is_none_or(|(_, cur)| worst_constraint < cur) {
            least_violating = Some((j, worst_constraint));
        }
    }
    match best {
        Some((j, _)) => Ok(ActionChoice {
            index: j,
            fallback: false,
        }),
        None => Ok(ActionChoice {
            index: least_violating.unwrap().0,
            fallback: true,
        }),
    }
}

/// One per-round record of a linear-bandit run.
#[derive(Debug, Clone)]
pub struct LinBanditRecord {
    pub action_index: usize,
    pub loss_obs: f64,
    pub cost_obs: Vec<f64>,
    pub cum_regret: f64,
    /// Raw cumulative constraint values (positive part is the violation).
    pub cum_costs: Vec<f64>,
    pub fallback: bool,
}

/// Full trace of a linear-bandit run.
#[derive(Debug, Clone)]
pub struct LinBanditTrace {
    pub records: Vec<LinBanditRecord>,
    pub fallback_count: u64,
    pub optimal_action: usize,
}

impl LinBanditTrace {
    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }

    /// Positive part of each cumulative constraint value at the horizon.
    pub fn final_violations(&self) -> Vec<f64> {
        self.records.last().map_or(Vec::new(), |r| {
            r.cum_costs.iter().map(|c| c.max(0.0)).collect()
        })
    }
}

/// Run the select / observe / update loop for `horizon` rounds with
/// `delta = 1/horizon` and unit ridge regularization. Regret is measured
/// against the feasible action with the smallest true loss.
pub fn run_linbandit(
    instance: &LinearInstance,
    horizon: u64,
    rng: &mut SplitMix64,
) -> LinBanditTrace {
    assert!(horizon >= 1);
    let opt = instance.optimal_action();
    let opt_loss = dot(&instance.loss, &instance.actions[opt]);
    let m = instance.constraints.len();
    let mut state = RidgeState::new(
        instance.dim,
        m,
        1.0,
        instance.norm_bound,
        1.0 / horizon as f64,
    );
    let mut records = Vec::with_capacity(horizon as usize);
    let mut fallback_count = 0;
    let mut cum_regret = 0.0;
    let mut cum_costs = vec![0.0; m];
    for _ in 0..horizon {
        let choice = select_action(&state, &instance.actions).expect("non-empty action set");
        if choice.fallback {
            fallback_count += 1;
        }
        let x = &instance.actions[choice.index];
        let loss_obs = dot(&instance.loss, x) + instance.noise_std * rng.next_normal();
        let cost_obs: Vec<f64> = instance
            .constraints
            .iter()
            .map(|g| dot(g, x) + instance.noise_std * rng.next_normal())
            .collect();
        cum_regret += dot(&instance.loss, x) - opt_loss;
        for (acc, g) in cum_costs.iter_mut().zip(instance.constraints.iter()) {
            *acc += dot(g, x);
        }
        state.update(x, loss_obs, &cost_obs);
        records.push(LinBanditRecord {
            action_index: choice.index,
            loss_obs,
            cost_obs,
            cum_regret,
            cum_costs: cum_costs.clone(),
            fallback: choice.fallback,
        });
    }
    LinBanditTrace {
        records,
        fallback_count,
        optimal_action: opt,
    }
}
