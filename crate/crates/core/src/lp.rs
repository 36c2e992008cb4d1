//! Small dense LP kernel and the oracle benchmark built on it.
//!
//! Every linear program in this crate has the same shape: maximize a gain
//! over mixtures `w` on the bid grid, subject to an aggregate
//! value-covers-price constraint and a per-round budget cap,
//!
//! ```text
//!   maximize    sum_b w(b) * gain(b)
//!   subject to  sum_b w(b) * (price(b) - gain(b)) <= 0
//!               sum_b w(b) * price(b)             <= rho
//!               w in the probability simplex.
//! ```
//!
//! The kernel is a two-phase dense primal simplex with Bland's anti-cycling
//! rule, so identical inputs give bit-identical vertices. Problem sizes here
//! are a handful of rows and at most a few hundred columns; no sparse
//! machinery is warranted.

/// Threshold below which a benchmark value is reported as degenerate
/// (regret normalizations divide by it downstream).
pub const LOW_VALUE_THRESHOLD: f64 = 1e-6;

const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;

use crate::auction::GroundTruthMoments;
use crate::rng::SplitMix64;

/// Coefficients of one kernel LP over the grid.
#[derive(Debug, Clone)]
pub struct LpInstance {
    /// Objective coefficient per bid, e.g. `v_bar * x_bar(b)`.
    pub gain: Vec<f64>,
    /// Expected price paid per bid, e.g. `q_bar(b)`.
    pub price: Vec<f64>,
    /// Per-round budget cap.
    pub rho: f64,
}

impl LpInstance {
    pub fn new(gain: Vec<f64>, price: Vec<f64>, rho: f64) -> Self {
        assert_eq!(gain.len(), price.len(), "gain/price length mismatch");
        assert!(!gain.is_empty(), "empty LP instance");
        debug_assert!(gain.iter().all(|g| g.is_finite() && *g >= 0.0));
        debug_assert!(price.iter().all(|p| p.is_finite() && *p >= 0.0));
        Self { gain, price, rho }
    }

    fn len(&self) -> usize {
        self.gain.len()
    }
}

/// A probability vector over the bid grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BidMixture {
    weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MixtureError {
    Negative,
    SumNotOne,
}

impl std::fmt::Display for MixtureError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MixtureError::Negative => write!(f, "mixture weights must be non-negative"),
            MixtureError::SumNotOne => write!(f, "mixture weights must sum to 1 within 1e-9"),
        }
    }
}

impl std::error::Error for MixtureError {}

impl BidMixture {
    pub fn new(weights: Vec<f64>) -> Result<Self, MixtureError> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(MixtureError::Negative);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > FEAS_TOL {
            return Err(MixtureError::SumNotOne);
        }
        Ok(Self { weights })
    }

    /// Point mass on one grid index.
    pub fn delta(n: usize, index: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 1e-12).count()
    }

    /// Inverse-CDF sample of a grid index, consuming one uniform draw.
    pub fn sample_index(&self, rng: &mut SplitMix64) -> usize {
        rng.next_index(&self.weights)
    }

    pub fn dot(&self, coeffs: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(coeffs.iter())
            .map(|(w, c)| w * c)
            .sum()
    }
}

/// Optimal value and optimizer of a kernel LP.
#[derive(Debug, Clone)]
pub struct BenchmarkSolution {
    pub value: f64,
    pub mixture: BidMixture,
}

impl BenchmarkSolution {
    /// True when the benchmark value is too small for the downstream
    /// normalizations that divide by it; callers should surface a warning.
    pub fn low_value(&self) -> bool {
        self.value < LOW_VALUE_THRESHOLD
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpError {
    /// No mixture satisfies both constraints. Possible only for hand-built
    /// instances with `price(0) > 0`; instances derived from auction moments
    /// always admit the zero bid.
    Infeasible,
    /// The simplex lost feasibility beyond tolerance; indicates data far
    /// outside the intended [0, 1] coefficient scale.
    Numerical,
}

impl std::fmt::Display for LpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "LP is infeasible"),
            LpError::Numerical => write!(f, "LP solve lost numerical feasibility"),
        }
    }
}

impl std::error::Error for LpError {}

/// Solve one kernel LP. Deterministic: Bland's rule fixes the returned
/// vertex, whose support has at most 3 bids (one per tableau row).
pub fn solve_lp_kernel(lp: &LpInstance) -> Result<BenchmarkSolution, LpError> {
    let n = lp.len();
    // Columns: n mixture weights, two slacks, one artificial for the
    // convexity row. Rows: RoS, budget, convexity.
    let ncols = n + 3;
    let art = n + 2;
    let mut tab = vec![vec![0.0f64; ncols]; 3];
    for (j, (&price, &gain)) in lp.price.iter().zip(lp.gain.iter()).enumerate() {
        tab[0][j] = price - gain;
        tab[1][j] = price;
        tab[2][j] = 1.0;
    }
    tab[0][n] = 1.0;
    tab[1][n + 1] = 1.0;
    tab[2][art] = 1.0;
    let mut rhs = vec![0.0, lp.rho, 1.0];
    let mut basis = vec![n, n + 1, art];

    // Phase 1: drive the artificial variable to zero.
    let mut phase1 = vec![0.0; ncols];
    phase1[art] = -1.0;
    run_simplex(&mut tab, &mut rhs, &mut basis, &phase1, ncols);
    let art_level = basis
        .iter()
        .position(|&b| b == art)
        .map(|i| rhs[i])
        .unwrap_or(0.0);
    if art_level > FEAS_TOL {
        return Err(LpError::Infeasible);
    }
    if let Some(row) = basis.iter().position(|&b| b == art) {
        // Degenerate basic artificial: pivot it out on any eligible column.
        let mut pivoted = false;
        for j in 0..n + 2 {
            if tab[row][j].abs() > PIVOT_TOL {
                pivot(&mut tab, &mut rhs, &mut basis, row, j);
                pivoted = true;
                break;
            }
        }
        if !pivoted {
            return Err(LpError::Numerical);
        }
    }

    // Phase 2: the real objective; the artificial column is no longer
    // eligible to enter.
    let mut obj = vec![0.0; ncols];
    obj[..n].copy_from_slice(&lp.gain);
    run_simplex(&mut tab, &mut rhs, &mut basis, &obj, n + 2);

    let mut weights = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            weights[b] = rhs[i].max(0.0);
        }
    }
    let mixture = BidMixture::new(weights).map_err(|_| LpError::Numerical)?;
    let value = mixture.dot(&lp.gain);
    let ros = mixture.dot(&lp.price) - value;
    let spend = mixture.dot(&lp.price);
    if ros > FEAS_TOL || spend > lp.rho + FEAS_TOL {
        return Err(LpError::Numerical);
    }
    Ok(BenchmarkSolution { value, mixture })
}

/// Maximize `obj` over the current tableau. Entering and leaving variables
/// follow Bland's rule, so no cycling and a deterministic vertex.
fn run_simplex(
    tab: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    obj: &[f64],
    eligible_cols: usize,
) {
    loop {
        // Reduced costs: c_j - c_B . column_j.
        let mut entering = None;
        for j in 0..eligible_cols {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = obj[j];
            for i in 0..3 {
                let cb = obj[basis[i]];
                if cb != 0.0 {
                    rc -= cb * tab[i][j];
                }
            }
            if rc > PIVOT_TOL {
                entering = Some(j);
                break; // Bland: smallest improving index.
            }
        }
        let Some(col) = entering else { return };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..3 {
            if tab[i][col] > PIVOT_TOL {
                let ratio = rhs[i] / tab[i][col];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        // Bland tie-break: smallest basic variable index.
                        if ratio < lr - PIVOT_TOL
                            || ((ratio - lr).abs() <= PIVOT_TOL && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        // The feasible set here is always bounded (mixtures plus bounded
        // slacks), so a missing leaving row means numerical trouble; stop at
        // the current vertex and let the caller's feasibility check decide.
        let Some((row, _)) = leave else { return };
        pivot(tab, rhs, basis, row, col);
    }
}

fn pivot(tab: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v /= p;
    }
    rhs[row] /= p;
    for i in 0..3 {
        if i == row {
            continue;
        }
        let f = tab[i][col];
        if f == 0.0 {
            continue;
        }
        for j in 0..tab[i].len() {
            tab[i][j] -= f * tab[row][j];
        }
        rhs[i] -= f * rhs[row];
        if rhs[i].abs() < 1e-14 {
            rhs[i] = 0.0;
        }
    }
    basis[row] = col;
}

/// Solve the oracle benchmark LP for ground-truth moments: gain is
/// `v_bar * x_bar`, price is `q_bar`.
pub fn solve_benchmark(
    moments: &GroundTruthMoments,
    rho: f64,
) -> Result<BenchmarkSolution, LpError> {
    let gain: Vec<f64> = moments.x_bar.iter().map(|x| moments.v_bar * x).collect();
    let lp = LpInstance::new(gain, moments.q_bar.clone(), rho);
    solve_lp_kernel(&lp)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlackError {
    /// The mixture violates one of the benchmark constraints by more than
    /// 1e-9, so its Slater slack is undefined.
    NotFeasible,
    LengthMismatch,
}

impl std::fmt::Display for SlackError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlackError::NotFeasible => write!(f, "mixture is not feasible for the benchmark LP"),
            SlackError::LengthMismatch => write!(f, "mixture length does not match the moments"),
        }
    }
}

impl std::error::Error for SlackError {}

/// Slater slack of a feasible mixture: the smaller of its value-over-price
/// margin and its budget margin.
pub fn slater_slack(
    moments: &GroundTruthMoments,
    rho: f64,
    w: &BidMixture,
) -> Result<f64, SlackError> {
    if w.weights().len() != moments.x_bar.len() {
        return Err(SlackError::LengthMismatch);
    }
    let gain: Vec<f64> = moments.x_bar.iter().map(|x| moments.v_bar * x).collect();
    let ros_slack = w.dot(&gain) - w.dot(&moments.q_bar);
    let budget_slack = rho - w.dot(&moments.q_bar);
    if ros_slack < -FEAS_TOL || budget_slack < -FEAS_TOL {
        return Err(SlackError::NotFeasible);
    }
    Ok(ros_slack.min(budget_slack))
}

/// Check a mixture against the two benchmark constraints within 1e-9.
pub fn is_feasible(moments: &GroundTruthMoments, rho: f64, w: &BidMixture) -> bool {
    slater_slack(moments, rho, w).is_ok()
}
