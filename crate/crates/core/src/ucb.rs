//! The optimistic constrained bidder.
//!
//! The bidder keeps running means of the allocation and price-paid vectors
//! (observed in full every round) and of the impression value (observed only
//! on wins), wraps them in shrinking confidence intervals, and each round
//! solves the per-round LP at the most favorable corner of those intervals:
//! allocation and value shifted up, price shifted down. The first round
//! always submits the maximum grid bid.

use crate::auction::{AuctionRound, BidGrid};
use crate::lp::{solve_lp_kernel, BidMixture, LpInstance};
use crate::rng::SplitMix64;

/// The value radius uses `log(2T) / (2 N)`; the denominator factor is kept
/// as a named constant because one printed variant of the closed form drops
/// the 2.
const V_RADIUS_TIME_FACTOR: f64 = 2.0;

/// Sample-mean state of the bidder after `t` observed rounds.
#[derive(Debug, Clone)]
pub struct UcbRos {
    /// Rounds observed so far.
    pub t: u64,
    /// Rounds won so far.
    pub n_wins: u64,
    /// Running mean allocation per grid bid.
    pub x_hat: Vec<f64>,
    /// Running mean price paid per grid bid.
    pub q_hat: Vec<f64>,
    /// Running mean value over winning rounds; 0 before the first win.
    pub v_hat: f64,
    pub horizon: u64,
    pub rho: f64,
    pub grid: BidGrid,
}

/// Half-widths of the confidence intervals at some round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceRadii {
    /// Radius shared by the allocation and price estimates.
    pub rad_x: f64,
    /// Radius of the value estimate; infinite before the first win.
    pub rad_v: f64,
}

/// Most favorable point of the confidence boxes: allocation and value at
/// their upper ends, price at its lower end, all clamped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct OptimisticModel {
    pub x_star: Vec<f64>,
    pub q_star: Vec<f64>,
    pub v_star: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainError(pub &'static str);

impl std::fmt::Display for DomainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "domain error: {}", self.0)
    }
}

impl std::error::Error for DomainError {}

/// Confidence radii from the round and win counters alone.
pub fn confidence_radii(
    t: u64,
    n_wins: u64,
    grid_size: usize,
    horizon: u64,
) -> Result<ConfidenceRadii, DomainError> {
    if t < 1 {
        return Err(DomainError("confidence radii need at least one round"));
    }
    let big_t = horizon as f64;
    let rad_x = ((2.0 * grid_size as f64 * big_t).ln() / (2.0 * t as f64)).sqrt();
    let rad_v = if n_wins == 0 {
        f64::INFINITY
    } else {
        ((2.0 * big_t).ln() / (V_RADIUS_TIME_FACTOR * n_wins as f64)).sqrt()
    };
    Ok(ConfidenceRadii { rad_x, rad_v })
}

/// Outcome of one bidding round.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub bid: f64,
    pub bid_index: usize,
    pub won: bool,
    /// Realized value `v_t * x_t(b_t)`.
    pub reward: f64,
    /// Realized spend `q_t(b_t)`.
    pub spend: f64,
    /// The distribution the bid was drawn from (a point mass on the maximum
    /// bid in the bootstrap round).
    pub mixture: BidMixture,
}

impl UcbRos {
    pub fn new(grid: BidGrid, rho: f64, horizon: u64) -> Self {
        assert!(rho > 0.0, "rho must be positive");
        assert!(horizon >= 1, "horizon must be at least 1");
        let n = grid.len();
        Self {
            t: 0,
            n_wins: 0,
            x_hat: vec![0.0; n],
            q_hat: vec![0.0; n],
            v_hat: 0.0,
            horizon,
            rho,
            grid,
        }
    }

    /// Fold one observed round into the running means. The value enters
    /// only when the round was won; the allocation and price vectors enter
    /// every round.
    pub fn update_estimators(&mut self, round: &AuctionRound, bid: f64, won: bool) {
        debug_assert!(self.grid.index_of(bid).is_some(), "bid not on the grid");
        debug_assert_eq!(round.alloc.len(), self.grid.len());
        let t = self.t as f64;
        for i in 0..self.grid.len() {
            self.x_hat[i] = (self.x_hat[i] * t + round.alloc[i]) / (t + 1.0);
            self.q_hat[i] = (self.q_hat[i] * t + round.price_paid[i]) / (t + 1.0);
        }
        self.t += 1;
        if won {
            self.n_wins += 1;
            let n = self.n_wins as f64;
            self.v_hat = (self.v_hat * (n - 1.0) + round.value) / n;
        }
    }

    pub fn radii(&self) -> Result<ConfidenceRadii, DomainError> {
        confidence_radii(self.t, self.n_wins, self.grid.len(), self.horizon)
    }

    /// The optimistic corner of the current confidence boxes.
    pub fn optimistic_model(&self) -> Result<OptimisticModel, DomainError> {
        let radii = self.radii()?;
        let x_star = self
            .x_hat
            .iter()
            .map(|x| (x + radii.rad_x).min(1.0))
            .collect();
        let q_star = self
            .q_hat
            .iter()
            .map(|q| (q - radii.rad_x).max(0.0))
            .collect();
        let v_star = if self.n_wins == 0 {
            1.0
        } else {
            (self.v_hat + radii.rad_v).min(1.0)
        };
        Ok(OptimisticModel {
            x_star,
            q_star,
            v_star,
        })
    }

    /// Solve the per-round LP at the optimistic corner. Always feasible:
    /// the price estimate at the zero bid is identically zero.
    pub fn next_bid_mixture(&self) -> Result<BidMixture, DomainError> {
        let model = self.optimistic_model()?;
        let gain: Vec<f64> = model.x_star.iter().map(|x| model.v_star * x).collect();
        let lp = LpInstance::new(gain, model.q_star, self.rho);
        let sol = solve_lp_kernel(&lp).expect("zero bid keeps the per-round LP feasible");
        Ok(sol.mixture)
    }

    /// Play one round: pick a bid (the maximum grid bid in the bootstrap
    /// round, otherwise an inverse-CDF sample from the per-round LP mixture
    /// consuming exactly one uniform), resolve the win event, and update the
    /// estimators.
    pub fn step(&mut self, round: &AuctionRound, rng: &mut SplitMix64) -> StepResult {
        debug_assert!(self.t < self.horizon, "stepping past the horizon");
        let (bid_index, mixture) = if self.t == 0 {
            let last = self.grid.len() - 1;
            (last, BidMixture::delta(self.grid.len(), last))
        } else {
            let mixture = self
                .next_bid_mixture()
                .expect("t >= 1 after the bootstrap round");
            (mixture.sample_index(rng), mixture)
        };
        let bid = self.grid.bids()[bid_index];
        let alloc = round.alloc[bid_index];
        // Implemented auctions allocate in {0, 1}; the draw below is the
        // hook for probabilistic allocation functions.
        let won = if alloc <= 0.0 {
            false
        } else if alloc >= 1.0 {
            true
        } else {
            rng.next_f64() < alloc
        };
        let reward = round.value * alloc;
        let spend = round.price_paid[bid_index];
        self.update_estimators(round, bid, won);
        StepResult {
            bid,
            bid_index,
            won,
            reward,
            spend,
            mixture,
        }
    }
}
