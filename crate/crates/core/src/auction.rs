//! Synthetic stochastic auction environment.
//!
//! Instances are described by a finite bid grid, a distribution of the
//! highest competing bid over that grid, a mean impression value, and a
//! per-round budget. Each round materializes the full allocation and
//! price-paid vectors over the grid, so the learner can observe the whole
//! auction outcome and not just the bid it played. Exact ground-truth
//! moments are available by summation over the competing-bid distribution,
//! with no sampling.

use crate::rng::SplitMix64;

/// Finite ordered set of bid levels in `[0, 1]`, with 0 always present as
/// the first element (the option to stay out of the auction).
#[derive(Debug, Clone, PartialEq)]
pub struct BidGrid {
    bids: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    Empty,
    FirstNotZero,
    NotStrictlyIncreasing,
    OutOfRange,
}

impl std::fmt::Display for GridError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridError::Empty => write!(f, "bid grid is empty"),
            GridError::FirstNotZero => write!(f, "first grid bid must be exactly 0"),
            GridError::NotStrictlyIncreasing => write!(f, "grid bids must be strictly increasing"),
            GridError::OutOfRange => write!(f, "grid bids must lie in [0, 1]"),
        }
    }
}

impl std::error::Error for GridError {}

impl BidGrid {
    pub fn new(bids: Vec<f64>) -> Result<Self, GridError> {
        if bids.is_empty() {
            return Err(GridError::Empty);
        }
        if bids[0] != 0.0 {
            return Err(GridError::FirstNotZero);
        }
        if bids.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GridError::NotStrictlyIncreasing);
        }
        if bids
            .iter()
            .any(|&b| !(0.0..=1.0).contains(&b) || !b.is_finite())
        {
            return Err(GridError::OutOfRange);
        }
        Ok(Self { bids })
    }

    /// Uniformly spaced grid `{k / (n-1) : k = 0..n-1}` over `[0, 1]`.
    pub fn uniform(n: usize) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::Empty);
        }
        let step = (n - 1) as f64;
        Self::new((0..n).map(|k| k as f64 / step).collect())
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn max_bid(&self) -> f64 {
        *self.bids.last().unwrap()
    }

    /// Index of a bid value, matched exactly.
    pub fn index_of(&self, bid: f64) -> Option<usize> {
        self.bids.iter().position(|&b| b == bid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuctionType {
    FirstPrice,
    SecondPrice,
}

impl AuctionType {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "first_price" => Some(Self::FirstPrice),
            "second_price" => Some(Self::SecondPrice),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FirstPrice => "first_price",
            Self::SecondPrice => "second_price",
        }
    }
}

/// Who wins when the learner's bid exactly ties the highest competing bid.
/// Learner-wins keeps the expected allocation right-continuous in the bid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    LearnerWins,
    CompetitorWins,
}

impl TieBreak {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "learner_wins" => Some(Self::LearnerWins),
            "competitor_wins" => Some(Self::CompetitorWins),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::LearnerWins => "learner_wins",
            Self::CompetitorWins => "competitor_wins",
        }
    }
}

/// Full description of a synthetic bidding instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub grid: BidGrid,
    pub auction_type: AuctionType,
    /// Distribution of the highest competing bid, over the grid.
    pub competing_pmf: Vec<f64>,
    /// Mean impression value; values are drawn Beta(10·v̄, 10·(1−v̄)).
    pub v_bar: f64,
    /// Per-round budget.
    pub rho: f64,
    pub horizon: u64,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecError {
    PmfLength,
    PmfNegative,
    PmfSum,
    VBarRange,
    RhoRange,
    HorizonZero,
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecError::PmfLength => write!(f, "competing_pmf length must match the grid"),
            SpecError::PmfNegative => write!(f, "competing_pmf entries must be non-negative"),
            SpecError::PmfSum => write!(f, "competing_pmf must sum to 1 within 1e-12"),
            SpecError::VBarRange => write!(f, "v_bar must lie strictly between 0 and 1"),
            SpecError::RhoRange => write!(f, "rho must lie in (0, 1]"),
            SpecError::HorizonZero => write!(f, "horizon must be at least 1"),
        }
    }
}

impl std::error::Error for SpecError {}

impl InstanceSpec {
    pub fn new(
        grid: BidGrid,
        auction_type: AuctionType,
        competing_pmf: Vec<f64>,
        v_bar: f64,
        rho: f64,
        horizon: u64,
    ) -> Result<Self, SpecError> {
        let spec = Self {
            grid,
            auction_type,
            competing_pmf,
            v_bar,
            rho,
            horizon,
            tie_break: TieBreak::LearnerWins,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.competing_pmf.len() != self.grid.len() {
            return Err(SpecError::PmfLength);
        }
        if self
            .competing_pmf
            .iter()
            .any(|&p| p < 0.0 || !p.is_finite())
        {
            return Err(SpecError::PmfNegative);
        }
        let sum: f64 = self.competing_pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SpecError::PmfSum);
        }
        if !(self.v_bar > 0.0 && self.v_bar < 1.0) {
            return Err(SpecError::VBarRange);
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(SpecError::RhoRange);
        }
        if self.horizon == 0 {
            return Err(SpecError::HorizonZero);
        }
        Ok(())
    }

    pub fn with_horizon(&self, horizon: u64) -> Self {
        let mut s = self.clone();
        s.horizon = horizon;
        s
    }

    /// Shape parameters of the value distribution Beta(10·v̄, 10·(1−v̄)).
    pub fn value_shapes(&self) -> (f64, f64) {
        (10.0 * self.v_bar, 10.0 * (1.0 - self.v_bar))
    }
}

/// One materialized auction sample: the drawn value, the drawn highest
/// competing bid, and the induced allocation / price-paid vectors over the
/// whole grid.
#[derive(Debug, Clone)]
pub struct AuctionRound {
    pub value: f64,
    pub alloc: Vec<f64>,
    pub price_paid: Vec<f64>,
    pub b_max_drawn: f64,
}

/// Exact expectations of the per-round allocation and price-paid vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMoments {
    pub x_bar: Vec<f64>,
    pub q_bar: Vec<f64>,
    pub v_bar: f64,
}

/// Allocation and payment for a single bid against a realized highest
/// competing bid, with learner-wins tie-breaking.
pub fn allocation_price(auction_type: AuctionType, bid: f64, b_max: f64) -> (f64, f64) {
    allocation_price_with_tie(auction_type, bid, b_max, TieBreak::LearnerWins)
}

pub fn allocation_price_with_tie(
    auction_type: AuctionType,
    bid: f64,
    b_max: f64,
    tie: TieBreak,
) -> (f64, f64) {
    let wins = match tie {
        TieBreak::LearnerWins => bid >= b_max,
        TieBreak::CompetitorWins => bid > b_max,
    };
    if !wins {
        return (0.0, 0.0);
    }
    let payment = match auction_type {
        AuctionType::FirstPrice => bid,
        AuctionType::SecondPrice => b_max,
    };
    (1.0, payment)
}

/// Draw one auction round: the highest competing bid from the instance pmf,
/// the value from the Beta distribution, and the induced outcome vectors.
pub fn sample_round(spec: &InstanceSpec, rng: &mut SplitMix64) -> AuctionRound {
    let b_max = spec.grid.bids()[rng.next_index(&spec.competing_pmf)];
    let (a, b) = spec.value_shapes();
    let value = rng.next_beta(a, b);
    let n = spec.grid.len();
    let mut alloc = Vec::with_capacity(n);
    let mut price_paid = Vec::with_capacity(n);
    for &bid in spec.grid.bids() {
        let (x, p) = allocation_price_with_tie(spec.auction_type, bid, b_max, spec.tie_break);
        alloc.push(x);
        price_paid.push(x * p);
    }
    AuctionRound {
        value,
        alloc,
        price_paid,
        b_max_drawn: b_max,
    }
}

/// Exact moments by summation over the competing-bid pmf: `x_bar(b)` is the
/// win probability at bid `b` and `q_bar(b)` the expected price paid.
pub fn true_moments(spec: &InstanceSpec) -> GroundTruthMoments {
    let n = spec.grid.len();
    let mut x_bar = vec![0.0; n];
    let mut q_bar = vec![0.0; n];
    for (i, &bid) in spec.grid.bids().iter().enumerate() {
        let mut x = 0.0;
        let mut q = 0.0;
        for (j, &p) in spec.competing_pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let b_max = spec.grid.bids()[j];
            let (a, pay) = allocation_price_with_tie(spec.auction_type, bid, b_max, spec.tie_break);
            x += p * a;
            q += p * a * pay;
        }
        x_bar[i] = x;
        q_bar[i] = q;
    }
    GroundTruthMoments {
        x_bar,
        q_bar,
        v_bar: spec.v_bar,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thirds_grid() -> BidGrid {
        BidGrid::uniform(4).unwrap()
    }

    fn point_mass_spec() -> InstanceSpec {
        // Competing bid is always exactly 1/3.
        InstanceSpec::new(
            thirds_grid(),
            AuctionType::SecondPrice,
            vec![0.0, 1.0, 0.0, 0.0],
            0.4,
            0.4,
            100,
        )
        .unwrap()
    }

    fn table1_like_spec() -> InstanceSpec {
        InstanceSpec::new(
            thirds_grid(),
            AuctionType::SecondPrice,
            vec![0.1, 0.6, 0.3, 0.0],
            0.4,
            0.4,
            100,
        )
        .unwrap()
    }

    #[test]
    fn grid_validation() {
        assert_eq!(BidGrid::new(vec![]), Err(GridError::Empty));
        assert_eq!(BidGrid::new(vec![0.1, 0.5]), Err(GridError::FirstNotZero));
        assert_eq!(
            BidGrid::new(vec![0.0, 0.5, 0.5]),
            Err(GridError::NotStrictlyIncreasing)
        );
        assert_eq!(BidGrid::new(vec![0.0, 1.5]), Err(GridError::OutOfRange));
        let g = BidGrid::uniform(4).unwrap();
        assert_eq!(g.bids(), &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(g.max_bid(), 1.0);
    }

    #[test]
    fn spec_validation() {
        let g = thirds_grid();
        assert_eq!(
            InstanceSpec::new(g.clone(), AuctionType::SecondPrice, vec![1.0], 0.4, 0.4, 10),
            Err(SpecError::PmfLength)
        );
        assert_eq!(
            InstanceSpec::new(
                g.clone(),
                AuctionType::SecondPrice,
                vec![0.5, 0.6, 0.0, -0.1],
                0.4,
                0.4,
                10
            ),
            Err(SpecError::PmfNegative)
        );
        assert_eq!(
            InstanceSpec::new(
                g.clone(),
                AuctionType::SecondPrice,
                vec![0.5, 0.6, 0.0, 0.0],
                0.4,
                0.4,
                10
            ),
            Err(SpecError::PmfSum)
        );
        assert_eq!(
            InstanceSpec::new(
                g.clone(),
                AuctionType::SecondPrice,
                vec![0.25; 4],
                1.0,
                0.4,
                10
            ),
            Err(SpecError::VBarRange)
        );
        assert_eq!(
            InstanceSpec::new(
                g.clone(),
                AuctionType::SecondPrice,
                vec![0.25; 4],
                0.4,
                0.0,
                10
            ),
            Err(SpecError::RhoRange)
        );
        assert_eq!(
            InstanceSpec::new(g, AuctionType::SecondPrice, vec![0.25; 4], 0.4, 0.4, 0),
            Err(SpecError::HorizonZero)
        );
    }

    #[test]
    fn allocation_price_cases() {
        assert_eq!(
            allocation_price(AuctionType::SecondPrice, 0.6, 0.5),
            (1.0, 0.5)
        );
        assert_eq!(
            allocation_price(AuctionType::FirstPrice, 0.6, 0.5),
            (1.0, 0.6)
        );
        assert_eq!(
            allocation_price(AuctionType::SecondPrice, 0.4, 0.5),
            (0.0, 0.0)
        );
        // Ties go to the learner.
        assert_eq!(
            allocation_price(AuctionType::SecondPrice, 0.5, 0.5),
            (1.0, 0.5)
        );
        assert_eq!(
            allocation_price_with_tie(AuctionType::SecondPrice, 0.5, 0.5, TieBreak::CompetitorWins),
            (0.0, 0.0)
        );
    }

    #[test]
    fn payment_never_exceeds_bid() {
        for auction in [AuctionType::FirstPrice, AuctionType::SecondPrice] {
            for i in 0..=20 {
                for j in 0..=20 {
                    let bid = i as f64 / 20.0;
                    let b_max = j as f64 / 20.0;
                    let (a, p) = allocation_price(auction, bid, b_max);
                    assert!(p <= bid + 1e-15);
                    if a == 0.0 {
                        assert_eq!(p, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn sample_round_point_mass_is_deterministic_outcome() {
        let spec = point_mass_spec();
        let mut rng = SplitMix64::new(1);
        for _ in 0..50 {
            let r = sample_round(&spec, &mut rng);
            assert_eq!(r.alloc, vec![0.0, 1.0, 1.0, 1.0]);
            assert_eq!(r.price_paid, vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
            assert_eq!(r.b_max_drawn, 1.0 / 3.0);
            assert!(r.value > 0.0 && r.value < 1.0);
        }
    }

    #[test]
    fn sample_round_outcome_vectors_are_monotone() {
        let spec = table1_like_spec();
        let mut rng = SplitMix64::new(2);
        for _ in 0..500 {
            let r = sample_round(&spec, &mut rng);
            for w in r.alloc.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for w in r.price_paid.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for (i, &bid) in spec.grid.bids().iter().enumerate() {
                assert!(r.alloc[i] == 0.0 || r.alloc[i] == 1.0);
                assert!(r.price_paid[i] <= bid * r.alloc[i] + 1e-15);
            }
        }
    }

    #[test]
    fn true_moments_point_mass() {
        let m = true_moments(&point_mass_spec());
        assert_eq!(m.x_bar, vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(m.q_bar, vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(m.v_bar, 0.4);
    }

    #[test]
    fn true_moments_hand_summed() {
        // pmf [0.1, 0.6, 0.3, 0] on thirds, second price:
        // q_bar(1) = 0.1*0 + 0.6*(1/3) + 0.3*(2/3) = 0.4, x_bar(1) = 1.
        let m = true_moments(&table1_like_spec());
        assert!((m.q_bar[3] - 0.4).abs() < 1e-15);
        assert_eq!(m.x_bar[3], 1.0);
        assert!((m.x_bar[0] - 0.1).abs() < 1e-15);
        assert!((m.x_bar[1] - 0.7).abs() < 1e-15);
        assert_eq!(m.q_bar[0], 0.0);
        assert!((m.q_bar[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn first_price_expected_price_is_bid_times_win_prob() {
        let mut spec = table1_like_spec();
        spec.auction_type = AuctionType::FirstPrice;
        let m = true_moments(&spec);
        for (i, &bid) in spec.grid.bids().iter().enumerate() {
            assert!((m.q_bar[i] - bid * m.x_bar[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn true_moments_deterministic() {
        let spec = table1_like_spec();
        let a = true_moments(&spec);
        let b = true_moments(&spec);
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_cross_checks_true_moments() {
        // Empirical means over 1e6 rounds agree with the exact moments; the
        // tolerance is a generous multiple of the Hoeffding deviation.
        let spec = table1_like_spec();
        let m = true_moments(&spec);
        let n = 1_000_000u64;
        let mut rng = SplitMix64::new(9);
        let mut x_acc = [0.0; 4];
        let mut q_acc = [0.0; 4];
        let mut v_acc = 0.0;
        for _ in 0..n {
            let r = sample_round(&spec, &mut rng);
            for i in 0..4 {
                x_acc[i] += r.alloc[i];
                q_acc[i] += r.price_paid[i];
            }
            v_acc += r.value;
        }
        let tol = 0.005;
        for i in 0..4 {
            assert!((x_acc[i] / n as f64 - m.x_bar[i]).abs() < tol);
            assert!((q_acc[i] / n as f64 - m.q_bar[i]).abs() < tol);
        }
        assert!((v_acc / n as f64 - 0.4).abs() < tol);
        assert!((m.q_bar[3] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn empirical_means_within_hoeffding_envelope() {
        // max-norm error over 1e5 rounds stays below
        // 5 * sqrt(log(2*|B|*n) / (2n)).
        let spec = table1_like_spec();
        let m = true_moments(&spec);
        let n = 100_000u64;
        let bound = 5.0 * ((2.0 * 4.0 * n as f64).ln() / (2.0 * n as f64)).sqrt();
        let mut rng = SplitMix64::new(4);
        let mut x_acc = [0.0; 4];
        let mut q_acc = [0.0; 4];
        for _ in 0..n {
            let r = sample_round(&spec, &mut rng);
            for i in 0..4 {
                x_acc[i] += r.alloc[i];
                q_acc[i] += r.price_paid[i];
            }
        }
        for i in 0..4 {
            assert!((x_acc[i] / n as f64 - m.x_bar[i]).abs() <= bound);
            assert!((q_acc[i] / n as f64 - m.q_bar[i]).abs() <= bound);
        }
    }

    #[test]
    fn mass_at_zero_makes_zero_bid_win_ties() {
        let spec = table1_like_spec();
        let m = true_moments(&spec);
        // Learner-wins tie rule: bidding 0 against a competing bid of 0 wins.
        assert!((m.x_bar[0] - 0.1).abs() < 1e-15);
        let mut flipped = spec.clone();
        flipped.tie_break = TieBreak::CompetitorWins;
        let m2 = true_moments(&flipped);
        assert_eq!(m2.x_bar[0], 0.0);
    }
}
