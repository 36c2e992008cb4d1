//! Python bindings for the bidding library: instances and presets, the
//! benchmark LP, single seeded runs of every algorithm, and a step-level
//! simulation handle for interactive use.

use pyo3::exceptions::{PyStopIteration, PyValueError};
use pyo3::prelude::*;
use std::collections::HashMap;

use rosbid::auction::{sample_round, true_moments, AuctionType, BidGrid, InstanceSpec, TieBreak};
use rosbid::baselines::{baseline_step, DualState, Exp3Params, ExpIxParams, PrimalState};
use rosbid::harness::{run_auction_single, Algorithm, BaselineOverrides};
use rosbid::linbandit::{run_linbandit, LinearInstance};
use rosbid::lp::{slater_slack, solve_benchmark, solve_lp_kernel, BidMixture, LpInstance};
use rosbid::rng::SplitMix64;
use rosbid::ucb::UcbRos;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A synthetic bidding instance: bid grid, competing-bid distribution,
/// mean value, and per-round budget.
#[pyclass(name = "Instance", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: InstanceSpec,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (grid, auction_type, competing_pmf, v_bar, rho, tie_break = "learner_wins"))]
    fn new(
        grid: Vec<f64>,
        auction_type: &str,
        competing_pmf: Vec<f64>,
        v_bar: f64,
        rho: f64,
        tie_break: &str,
    ) -> PyResult<Self> {
        let grid = BidGrid::new(grid).map_err(value_err)?;
        let auction = AuctionType::parse(auction_type)
            .ok_or_else(|| value_err("auction_type must be first_price or second_price"))?;
        let mut inner =
            InstanceSpec::new(grid, auction, competing_pmf, v_bar, rho, 1000).map_err(value_err)?;
        inner.tie_break = TieBreak::parse(tie_break)
            .ok_or_else(|| value_err("tie_break must be learner_wins or competitor_wins"))?;
        Ok(Self { inner })
    }

    /// Built-in presets: "table1" or "appendix_e".
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        rosbid::harness::preset_by_name(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| value_err(format!("unknown preset `{name}`")))
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid.bids().to_vec()
    }

    #[getter]
    fn competing_pmf(&self) -> Vec<f64> {
        self.inner.competing_pmf.clone()
    }

    #[getter]
    fn v_bar(&self) -> f64 {
        self.inner.v_bar
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn auction_type(&self) -> &'static str {
        self.inner.auction_type.name()
    }

    /// Exact expectations `(x_bar, q_bar, v_bar)` over the grid.
    fn true_moments(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let m = true_moments(&self.inner);
        (m.x_bar, m.q_bar, m.v_bar)
    }

    /// Benchmark value and optimizer `(V, w)` of the oracle LP.
    fn benchmark(&self) -> PyResult<(f64, Vec<f64>)> {
        let m = true_moments(&self.inner);
        let sol = solve_benchmark(&m, self.inner.rho).map_err(value_err)?;
        Ok((sol.value, sol.mixture.weights().to_vec()))
    }

    /// Slater slack of a feasible mixture over the grid.
    fn slater_slack(&self, weights: Vec<f64>) -> PyResult<f64> {
        let m = true_moments(&self.inner);
        let w = BidMixture::new(weights).map_err(value_err)?;
        slater_slack(&m, self.inner.rho, &w).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(grid={:?}, auction_type='{}', v_bar={}, rho={})",
            self.inner.grid.bids(),
            self.inner.auction_type.name(),
            self.inner.v_bar,
            self.inner.rho
        )
    }
}

/// Maximize `gain . w` over mixtures with `price . w <= min(gain . w, rho)`.
/// Returns `(value, weights)`.
#[pyfunction]
fn solve_lp(gain: Vec<f64>, price: Vec<f64>, rho: f64) -> PyResult<(f64, Vec<f64>)> {
    if gain.len() != price.len() || gain.is_empty() {
        return Err(value_err("gain and price must be equal-length, non-empty"));
    }
    let lp = LpInstance::new(gain, price, rho);
    let sol = solve_lp_kernel(&lp).map_err(value_err)?;
    Ok((sol.value, sol.mixture.weights().to_vec()))
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    Algorithm::parse(name).ok_or_else(|| {
        value_err(format!(
            "unknown algorithm `{name}` (expected ucb_ros, pd_exp3p1, exp_ix, or lin_bandit)"
        ))
    })
}

/// Run one seeded auction experiment and return its headline metrics.
#[pyfunction]
#[pyo3(signature = (instance, algorithm, horizon, seed))]
fn run(
    instance: &PyInstance,
    algorithm: &str,
    horizon: u64,
    seed: u64,
) -> PyResult<HashMap<String, f64>> {
    let algo = parse_algorithm(algorithm)?;
    if algo == Algorithm::LinBandit {
        return Err(value_err("use run_lin_bandit for the linear bandit"));
    }
    if horizon == 0 {
        return Err(value_err("horizon must be at least 1"));
    }
    let m = true_moments(&instance.inner);
    let benchmark = solve_benchmark(&m, instance.inner.rho).map_err(value_err)?;
    let trace = run_auction_single(
        &instance.inner,
        algo,
        horizon,
        seed,
        false,
        &BaselineOverrides::default(),
    );
    let t = horizon as f64;
    let mut out = HashMap::new();
    out.insert("benchmark_value".to_string(), benchmark.value);
    out.insert("cum_reward".to_string(), trace.cum_reward);
    out.insert("cum_spend".to_string(), trace.cum_spend);
    out.insert("cum_value".to_string(), trace.cum_value);
    out.insert("regret".to_string(), t * benchmark.value - trace.cum_reward);
    out.insert(
        "budget_violation".to_string(),
        trace.cum_spend - instance.inner.rho * t,
    );
    out.insert(
        "ros_violation".to_string(),
        trace.cum_spend - trace.cum_reward,
    );
    Ok(out)
}

/// Run the constrained linear bandit on a random instance; returns regret,
/// per-constraint positive violations, and the fallback count.
#[pyfunction]
#[pyo3(signature = (dim, n_actions, n_constraints, norm_bound, horizon, seed))]
fn run_lin_bandit(
    dim: usize,
    n_actions: usize,
    n_constraints: usize,
    norm_bound: f64,
    horizon: u64,
    seed: u64,
) -> PyResult<HashMap<String, f64>> {
    if dim == 0 || n_actions == 0 || horizon == 0 {
        return Err(value_err("dim, n_actions, and horizon must be positive"));
    }
    let mut gen_rng = SplitMix64::stream(seed, 7);
    let instance = LinearInstance::random(dim, n_actions, n_constraints, norm_bound, &mut gen_rng);
    let mut rng = SplitMix64::stream(seed, 3);
    let trace = run_linbandit(&instance, horizon, &mut rng);
    let mut out = HashMap::new();
    out.insert("regret".to_string(), trace.final_regret());
    out.insert("fallbacks".to_string(), trace.fallback_count as f64);
    for (i, v) in trace.final_violations().iter().enumerate() {
        out.insert(format!("violation_{}", i + 1), *v);
    }
    Ok(out)
}

enum SimState {
    Ucb(UcbRos),
    Baseline {
        primal: PrimalState,
        dual: DualState,
    },
}

/// A step-level handle on one seeded run: call `step()` per round (raises
/// StopIteration past the horizon) or `run_to_end()` for the totals.
#[pyclass(name = "Simulation")]
struct PySimulation {
    spec: InstanceSpec,
    state: SimState,
    env: SplitMix64,
    alg: SplitMix64,
    t: u64,
    horizon: u64,
    cum_reward: f64,
    cum_spend: f64,
}

#[pymethods]
impl PySimulation {
    #[new]
    fn new(instance: &PyInstance, algorithm: &str, horizon: u64, seed: u64) -> PyResult<Self> {
        if horizon == 0 {
            return Err(value_err("horizon must be at least 1"));
        }
        let algo = parse_algorithm(algorithm)?;
        let spec = instance.inner.with_horizon(horizon);
        let k = spec.grid.len();
        let state = match algo {
            Algorithm::UcbRos => SimState::Ucb(UcbRos::new(spec.grid.clone(), spec.rho, horizon)),
            Algorithm::PdExp3P1 => SimState::Baseline {
                primal: PrimalState::exp3p1(
                    k,
                    horizon,
                    Exp3Params::from_theorem(k, horizon, 1.0 / horizon as f64),
                ),
                dual: DualState::ds_omd(1.0 / spec.rho, 1.0 / (horizon as f64).sqrt()),
            },
            Algorithm::ExpIx => SimState::Baseline {
                primal: PrimalState::exp_ix(k, horizon, ExpIxParams::default_for(k, horizon)),
                dual: DualState::decaying_schedule(1.0 / spec.rho),
            },
            Algorithm::LinBandit => {
                return Err(value_err("Simulation drives auction algorithms only"))
            }
        };
        Ok(Self {
            env: SplitMix64::stream(seed, 0),
            alg: SplitMix64::stream(seed, 1),
            spec,
            state,
            t: 0,
            horizon,
            cum_reward: 0.0,
            cum_spend: 0.0,
        })
    }

    /// Play one round; returns `(t, bid, won, reward, spend)`.
    fn step(&mut self) -> PyResult<(u64, f64, bool, f64, f64)> {
        if self.t >= self.horizon {
            return Err(PyStopIteration::new_err("horizon reached"));
        }
        let round = sample_round(&self.spec, &mut self.env);
        let (bid, won, reward, spend) = match &mut self.state {
            SimState::Ucb(state) => {
                let s = state.step(&round, &mut self.alg);
                (s.bid, s.won, s.reward, s.spend)
            }
            SimState::Baseline { primal, dual } => {
                let s = baseline_step(
                    primal,
                    dual,
                    &round,
                    self.spec.grid.bids(),
                    self.spec.rho,
                    &mut self.alg,
                );
                (s.bid, s.won, s.reward, s.spend)
            }
        };
        self.t += 1;
        self.cum_reward += reward;
        self.cum_spend += spend;
        Ok((self.t, bid, won, reward, spend))
    }

    /// Play all remaining rounds; returns `(cum_reward, cum_spend)`.
    fn run_to_end(&mut self) -> (f64, f64) {
        while self.t < self.horizon {
            let _ = self.step();
        }
        (self.cum_reward, self.cum_spend)
    }

    #[getter]
    fn t(&self) -> u64 {
        self.t
    }

    #[getter]
    fn cum_reward(&self) -> f64 {
        self.cum_reward
    }

    #[getter]
    fn cum_spend(&self) -> f64 {
        self.cum_spend
    }
}

#[pymodule]
fn rosbid_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(solve_lp, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_lin_bandit, m)?)?;
    Ok(())
}
