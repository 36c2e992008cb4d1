//! Seeded random number generation for simulations.
//!
//! All stochastic components of this crate draw from [`SplitMix64`], a
//! counter-based 64-bit generator: the internal state is a counter advanced
//! by a fixed odd increment, and each output is a bijective mix of the
//! counter. Runs are therefore exactly reproducible from `(seed, stream)`
//! on any thread schedule. Cross-language bit-reproducibility is not a
//! goal; within this crate the stream is stable.

/// Counter-based 64-bit generator (SplitMix64).
///
/// State advances by the golden-ratio increment `0x9E3779B97F4A7C15`; the
/// output stage is the variant-13 mix of Stafford/Vigna.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Generator for logical stream `stream` of a base seed, so that e.g.
    /// the auction environment and the bidder consume disjoint streams.
    pub fn stream(seed: u64, stream: u64) -> Self {
        // Pre-mix the stream id so streams 0,1,2,... start far apart.
        let mut s = Self::new(stream.wrapping_mul(GOLDEN_GAMMA) ^ 0x6A09_E667_F3BC_C909);
        Self::new(seed ^ s.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the open interval `(0, 1)`.
    pub fn next_open01(&mut self) -> f64 {
        loop {
            let u = self.next_f64();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard normal via Box-Muller on two uniforms.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze, with the shape<1 boost.
    pub fn next_gamma(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            // Gamma(a) = Gamma(a+1) * U^(1/a)
            let g = self.next_gamma(shape + 1.0);
            let u = self.next_open01();
            return g * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.next_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.next_open01();
            if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
                return d * v;
            }
        }
    }

    /// Beta(a, b) draw as a ratio of gammas, guarded into the open unit interval.
    pub fn next_beta(&mut self, a: f64, b: f64) -> f64 {
        let ga = self.next_gamma(a);
        let gb = self.next_gamma(b);
        let x = ga / (ga + gb);
        x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }

    /// Inverse-CDF draw of an index from a probability vector, consuming
    /// exactly one uniform. Falls back to the last index on accumulated
    /// rounding shortfall.
    pub fn next_index(&mut self, pmf: &[f64]) -> usize {
        debug_assert!(!pmf.is_empty());
        let u = self.next_f64();
        let mut cdf = 0.0;
        for (i, p) in pmf.iter().enumerate() {
            cdf += p;
            if u < cdf {
                return i;
            }
        }
        pmf.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_diverge() {
        let mut a = SplitMix64::stream(42, 0);
        let mut b = SplitMix64::stream(42, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments_close() {
        let mut rng = SplitMix64::new(11);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.next_normal();
            s += z;
            s2 += z * z;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean={mean}");
        assert!((var - 1.0).abs() < 0.02, "var={var}");
    }

    #[test]
    fn beta_mean_matches_shape_ratio() {
        // Beta(4, 6) has mean 0.4.
        let mut rng = SplitMix64::new(3);
        let n = 200_000;
        let mut s = 0.0;
        for _ in 0..n {
            let x = rng.next_beta(4.0, 6.0);
            assert!(x > 0.0 && x < 1.0);
            s += x;
        }
        let mean = s / n as f64;
        assert!((mean - 0.4).abs() < 0.005, "mean={mean}");
    }

    #[test]
    fn beta_small_shape_stays_in_open_interval() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..50_000 {
            let x = rng.next_beta(0.5, 9.5);
            assert!(x > 0.0 && x < 1.0);
        }
    }

    #[test]
    fn index_sampling_matches_pmf() {
        let pmf = [0.1, 0.6, 0.3, 0.0];
        let mut rng = SplitMix64::new(13);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[rng.next_index(&pmf)] += 1;
        }
        for (c, p) in counts.iter().zip(pmf.iter()) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.01);
        }
        assert_eq!(counts[3], 0);
    }
}
