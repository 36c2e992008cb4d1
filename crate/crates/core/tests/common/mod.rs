//! Independent oracles and generators shared by the integration suites.
//! Everything here recomputes results from first principles and must stay
//! independent of the library code paths it checks.

// Each integration test target compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use rosbid::auction::{AuctionType, BidGrid, GroundTruthMoments, InstanceSpec};
use rosbid::lp::{BidMixture, LpInstance};
use rosbid::rng::SplitMix64;
use rosbid::ucb::UcbRos;

/// Optimal value of a kernel LP by brute-force enumeration of basic
/// feasible solutions: every basis of three columns among the mixture
/// weights and the two slack variables (so supports of size at most 3,
/// with each inequality either tight or slack). Returns `None` when no
/// basis is feasible.
pub fn lp_enumeration_value(lp: &LpInstance) -> Option<f64> {
    let n = lp.gain.len();
    let ncols = n + 2;
    let column = |j: usize| -> [f64; 3] {
        if j < n {
            [lp.price[j] - lp.gain[j], lp.price[j], 1.0]
        } else if j == n {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        }
    };
    let rhs = [0.0, lp.rho, 1.0];
    let mut best: Option<f64> = None;
    for a in 0..ncols {
        for b in (a + 1)..ncols {
            for c in (b + 1)..ncols {
                let cols = [column(a), column(b), column(c)];
                // Solve the 3x3 system cols * z = rhs by Cramer's rule.
                let det = det3(&cols[0], &cols[1], &cols[2]);
                if det.abs() < 1e-12 {
                    continue;
                }
                let z = [
                    det3(&rhs, &cols[1], &cols[2]) / det,
                    det3(&cols[0], &rhs, &cols[2]) / det,
                    det3(&cols[0], &cols[1], &rhs) / det,
                ];
                if z.iter().any(|&v| v < -1e-9) {
                    continue;
                }
                let mut value = 0.0;
                for (idx, &j) in [a, b, c].iter().enumerate() {
                    if j < n {
                        value += z[idx] * lp.gain[j];
                    }
                }
                if best.is_none_or(|cur| value > cur) {
                    best = Some(value);
                }
            }
        }
    }
    best
}

/// Columns are given; determinant of the 3x3 matrix with those columns.
fn det3(c0: &[f64; 3], c1: &[f64; 3], c2: &[f64; 3]) -> f64 {
    c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
        + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
}

/// Dense matrix inversion by Gauss-Jordan with partial pivoting, the direct
/// oracle for the incremental rank-1 inverse.
pub fn invert_dense(a: &[f64], dim: usize) -> Vec<f64> {
    let mut aug = vec![0.0; dim * 2 * dim];
    for i in 0..dim {
        for j in 0..dim {
            aug[i * 2 * dim + j] = a[i * dim + j];
        }
        aug[i * 2 * dim + dim + i] = 1.0;
    }
    for col in 0..dim {
        let mut pivot = col;
        for r in (col + 1)..dim {
            if aug[r * 2 * dim + col].abs() > aug[pivot * 2 * dim + col].abs() {
                pivot = r;
            }
        }
        assert!(aug[pivot * 2 * dim + col].abs() > 1e-14, "singular matrix");
        if pivot != col {
            for j in 0..2 * dim {
                aug.swap(col * 2 * dim + j, pivot * 2 * dim + j);
            }
        }
        let p = aug[col * 2 * dim + col];
        for j in 0..2 * dim {
            aug[col * 2 * dim + j] /= p;
        }
        for r in 0..dim {
            if r == col {
                continue;
            }
            let f = aug[r * 2 * dim + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..2 * dim {
                aug[r * 2 * dim + j] -= f * aug[col * 2 * dim + j];
            }
        }
    }
    let mut inv = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            inv[i * dim + j] = aug[i * 2 * dim + dim + j];
        }
    }
    inv
}

/// Random kernel LP with coefficients on the unit scale (gain and price in
/// [0, 1], price at the zero bid left free so infeasible cases occur too).
pub fn random_lp(n: usize, rng: &mut SplitMix64) -> LpInstance {
    let gain: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let price: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let rho = 0.05 + 0.95 * rng.next_f64();
    LpInstance::new(gain, price, rho)
}

/// Random bidding instance over a uniform grid.
pub fn random_instance(rng: &mut SplitMix64) -> InstanceSpec {
    let n = 3 + (rng.next_u64() % 6) as usize;
    let grid = BidGrid::uniform(n).unwrap();
    let mut pmf: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    // Zero out a random prefix of the mass sometimes, to vary the support.
    if rng.next_f64() < 0.3 {
        pmf[0] = 0.0;
    }
    let sum: f64 = pmf.iter().sum();
    for p in pmf.iter_mut() {
        *p /= sum;
    }
    let auction = if rng.next_f64() < 0.5 {
        AuctionType::SecondPrice
    } else {
        AuctionType::FirstPrice
    };
    let v_bar = 0.1 + 0.8 * rng.next_f64();
    let rho = 0.05 + 0.95 * rng.next_f64();
    InstanceSpec::new(grid, auction, pmf, v_bar, rho, 1000).unwrap()
}

/// Random mixture made feasible for the benchmark constraints by blending
/// toward the always-feasible zero-bid point mass.
pub fn random_feasible_mixture(
    moments: &GroundTruthMoments,
    rho: f64,
    rng: &mut SplitMix64,
) -> BidMixture {
    let n = moments.x_bar.len();
    let mut w: Vec<f64> = (0..n).map(|_| -rng.next_open01().ln()).collect();
    let sum: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= sum;
    }
    let gain: Vec<f64> = moments.x_bar.iter().map(|x| moments.v_bar * x).collect();
    let ros_w: f64 = w
        .iter()
        .zip(moments.q_bar.iter().zip(gain.iter()))
        .map(|(wi, (q, g))| wi * (q - g))
        .sum();
    let ros_0 = -gain[0];
    let bud_w: f64 = w
        .iter()
        .zip(moments.q_bar.iter())
        .map(|(wi, q)| wi * q)
        .sum();
    // Blend lambda*w + (1-lambda)*delta_0; both constraints are linear in
    // lambda and satisfied at lambda = 0.
    let lam_ros = if ros_w <= 0.0 {
        1.0
    } else {
        (ros_0 / (ros_0 - ros_w)).clamp(0.0, 1.0)
    };
    let lam_bud = if bud_w <= rho { 1.0 } else { rho / bud_w };
    let lam = 0.999 * lam_ros.min(lam_bud);
    let mut blended: Vec<f64> = w.iter().map(|wi| lam * wi).collect();
    blended[0] += 1.0 - lam;
    BidMixture::new(blended).expect("blend stays on the simplex")
}

/// Random estimator state satisfying the estimator invariants: monotone
/// `x_hat` and `q_hat` in [0, 1], `q_hat <= bid * x_hat`, zero value
/// estimate before the first win.
pub fn random_estimator_state(rng: &mut SplitMix64) -> UcbRos {
    let n = 3 + (rng.next_u64() % 4) as usize;
    let grid = BidGrid::uniform(n).unwrap();
    let mut x_hat: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    x_hat.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bids = grid.bids().to_vec();
    let mut q_hat = vec![0.0; n];
    let mut running = 0.0f64;
    for i in 0..n {
        let cap = bids[i] * x_hat[i];
        running = running.max(rng.next_f64() * cap);
        q_hat[i] = running.min(cap);
    }
    let t = 1 + rng.next_u64() % 10_000;
    let n_wins = if rng.next_f64() < 0.15 {
        0
    } else {
        1 + rng.next_u64() % t
    };
    let v_hat = if n_wins == 0 { 0.0 } else { rng.next_f64() };
    let horizon = t + rng.next_u64() % (9 * t + 1);
    let rho = 0.05 + 0.95 * rng.next_f64();
    UcbRos {
        t,
        n_wins,
        x_hat,
        q_hat,
        v_hat,
        horizon,
        rho,
        grid,
    }
}

/// Best objective of the per-round optimistic program found by searching
/// the confidence boxes directly: the scalar value scanned at 1e-3 over its
/// interval against the four monotone corner choices of the allocation and
/// price boxes, plus random monotone members of both boxes. Mixtures come
/// from the LP kernel at each candidate.
pub fn prob6_grid_search(state: &UcbRos, rng: &mut SplitMix64) -> f64 {
    let radii = state.radii().expect("state has t >= 1");
    let n = state.grid.len();
    let x_lo: Vec<f64> = state
        .x_hat
        .iter()
        .map(|x| (x - radii.rad_x).max(0.0))
        .collect();
    let x_hi: Vec<f64> = state
        .x_hat
        .iter()
        .map(|x| (x + radii.rad_x).min(1.0))
        .collect();
    let q_lo: Vec<f64> = state
        .q_hat
        .iter()
        .map(|q| (q - radii.rad_x).max(0.0))
        .collect();
    let q_hi: Vec<f64> = state
        .q_hat
        .iter()
        .map(|q| (q + radii.rad_x).min(1.0))
        .collect();
    let (v_lo, v_hi) = if state.n_wins == 0 {
        (0.0, 1.0)
    } else {
        (
            (state.v_hat - radii.rad_v).max(0.0),
            (state.v_hat + radii.rad_v).min(1.0),
        )
    };

    let mut best = f64::NEG_INFINITY;
    let mut consider = |x: &[f64], q: &[f64], v: f64| {
        let gain: Vec<f64> = x.iter().map(|xi| v * xi).collect();
        let lp = LpInstance::new(gain.clone(), q.to_vec(), state.rho);
        if let Ok(sol) = rosbid::lp::solve_lp_kernel(&lp) {
            if sol.value > best {
                best = sol.value;
            }
        }
    };

    // Scalar scan at 1e-3 across the value interval, against all four
    // monotone-extremal corners of the two boxes.
    let steps = ((v_hi - v_lo) / 1e-3).ceil() as usize;
    for k in 0..=steps {
        let v = (v_lo + k as f64 * 1e-3).min(v_hi);
        consider(&x_hi, &q_lo, v);
        consider(&x_hi, &q_hi, v);
        consider(&x_lo, &q_lo, v);
        consider(&x_lo, &q_hi, v);
    }

    // Random monotone members of both boxes (coordinate draws repaired by a
    // running maximum, which stays inside because the bounds are monotone).
    for _ in 0..200 {
        let mut x = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut run_x = 0.0f64;
        let mut run_q = 0.0f64;
        for i in 0..n {
            let xi = x_lo[i] + rng.next_f64() * (x_hi[i] - x_lo[i]);
            run_x = run_x.max(xi);
            x[i] = run_x.min(x_hi[i]);
            let qi = q_lo[i] + rng.next_f64() * (q_hi[i] - q_lo[i]);
            run_q = run_q.max(qi);
            q[i] = run_q.min(q_hi[i]);
        }
        let v = v_lo + rng.next_f64() * (v_hi - v_lo);
        consider(&x, &q, v);
    }

    best
}
