//! Online bidding under return-on-spend and budget constraints.
//!
//! The crate provides:
//!
//! - a synthetic auction environment with exact ground-truth moments
//!   ([`auction`]),
//! - a small dense LP kernel and the oracle benchmark over bid mixtures
//!   ([`lp`]),
//! - an optimistic constrained bidder that learns allocation, price, and
//!   value simultaneously ([`ucb`]),
//! - two primal-dual comparison bidders ([`baselines`]),
//! - a constrained linear-bandit variant over finite action sets
//!   ([`linbandit`]),
//! - an experiment harness with seeded multi-run execution, CSV/JSON/SVG
//!   export, and a CLI ([`harness`]).
//!
//! Everything stochastic draws from the counter-based generator in [`rng`],
//! so runs are reproducible from their seeds regardless of thread count.

pub mod auction;
pub mod baselines;
pub mod harness;
pub mod linbandit;
pub mod lp;
pub mod rng;
pub mod ucb;

pub use auction::{
    allocation_price, sample_round, true_moments, AuctionRound, AuctionType, BidGrid,
    GroundTruthMoments, InstanceSpec, TieBreak,
};
pub use lp::{
    slater_slack, solve_benchmark, solve_lp_kernel, BenchmarkSolution, BidMixture, LpInstance,
};
pub use rng::SplitMix64;
pub use ucb::{confidence_radii, ConfidenceRadii, OptimisticModel, UcbRos};
