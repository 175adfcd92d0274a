use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Gaussian white noise sampled on a fixed grid: `xi_n = N(0, 1) / sqrt(dt)`.
#[derive(Debug, Clone)]
pub struct NoiseProcess {
    seed: u64,
    rng: ChaCha8Rng,
    inv_sqrt_dt: f64,
    sqrt_dt: f64,
    levels: u32,
    /// One stream per bridge level, so refinements of the same seed nest.
    bridge: Vec<ChaCha8Rng>,
    /// Pending fine increments, consumed from the back.
    pending: Vec<f64>,
}

impl NoiseProcess {
    pub fn new(seed: u64, dt: f64) -> Self {
        NoiseProcess {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            inv_sqrt_dt: 1.0 / dt.sqrt(),
            sqrt_dt: dt.sqrt(),
            levels: 0,
            bridge: Vec::new(),
            pending: Vec::new(),
        }
    }

    /// Samples on a grid `2^levels` times finer than `NoiseProcess::new(seed,
    /// dt * 2^levels)`, following the same Wiener path: every coarse increment
    /// is split by Brownian-bridge midpoints.
    pub fn refined(seed: u64, dt: f64, levels: u32) -> Self {
        let bridge = (1..=u64::from(levels))
            .map(|l| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(l);
                r
            })
            .collect();
        NoiseProcess {
            levels,
            bridge,
            pending: Vec::with_capacity(1 << levels),
            ..NoiseProcess::new(seed, dt)
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Scale of the Wiener increment, `sqrt(dt)`.
    pub fn dw_scale(&self) -> f64 {
        self.sqrt_dt
    }

    /// Next white-noise sample `xi_n` (variance `1/dt`).
    #[inline]
    pub fn sample(&mut self) -> f64 {
        if self.levels == 0 {
            let n: f64 = StandardNormal.sample(&mut self.rng);
            return n * self.inv_sqrt_dt;
        }
        if self.pending.is_empty() {
            self.refill();
        }
        self.pending.pop().expect("refilled") * self.inv_sqrt_dt * self.inv_sqrt_dt
    }

    fn refill(&mut self) {
        let mut h = self.sqrt_dt * self.sqrt_dt * f64::from(1u32 << self.levels);
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let mut incs = vec![z * h.sqrt()];
        for rng in &mut self.bridge {
            let spread = 0.5 * h.sqrt();
            let mut next = Vec::with_capacity(2 * incs.len());
            for d in incs {
                let w: f64 = StandardNormal.sample(rng);
                next.push(0.5 * d + spread * w);
                next.push(0.5 * d - spread * w);
            }
            incs = next;
            h *= 0.5;
        }
        incs.reverse();
        self.pending = incs;
    }
}

/// Seed of trajectory `index` under `master` (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = NoiseProcess::new(42, 1e-3);
        let mut b = NoiseProcess::new(42, 1e-3);
        for _ in 0..100 {
            assert_eq!(a.sample().to_bits(), b.sample().to_bits());
        }
        let mut c = NoiseProcess::new(43, 1e-3);
        assert_ne!(NoiseProcess::new(42, 1e-3).sample(), c.sample());
    }

    #[test]
    fn variance_is_inverse_dt() {
        let dt = 1e-3;
        let mut n = NoiseProcess::new(7, dt);
        let m = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let x = n.sample() * dt;
            s += x;
            s2 += x * x;
        }
        let mean = s / m as f64;
        let var = s2 / m as f64 - mean * mean;
        assert!(mean.abs() < 4.0 * (dt / m as f64).sqrt());
        assert!((var / dt - 1.0).abs() < 0.02, "var/dt = {}", var / dt);
    }

    #[test]
    fn refined_path_sums_to_coarse_path() {
        let dt = 1e-3;
        let mut coarse = NoiseProcess::new(5, dt);
        let mut fine = NoiseProcess::refined(5, dt / 4.0, 2);
        for _ in 0..50 {
            let dw = coarse.sample() * dt;
            let sum: f64 = (0..4).map(|_| fine.sample() * dt / 4.0).sum();
            assert!((dw - sum).abs() < 1e-14, "{dw} vs {sum}");
        }
        let mut half = NoiseProcess::refined(5, dt / 2.0, 1);
        let mut quarter = NoiseProcess::refined(5, dt / 4.0, 2);
        for _ in 0..50 {
            let dw = half.sample() * dt / 2.0;
            let sum: f64 = (0..2).map(|_| quarter.sample() * dt / 4.0).sum();
            assert!((dw - sum).abs() < 1e-14, "{dw} vs {sum}");
        }
        let mut same = NoiseProcess::refined(5, dt, 0);
        let mut plain = NoiseProcess::new(5, dt);
        assert_eq!(same.sample(), plain.sample());
    }

    #[test]
    fn refined_variance_is_inverse_fine_dt() {
        let dt = 1e-3;
        let mut n = NoiseProcess::refined(8, dt, 1);
        let m = 100_000;
        let s2: f64 = (0..m).map(|_| (n.sample() * dt).powi(2)).sum();
        assert!((s2 / m as f64 / dt - 1.0).abs() < 0.03);
    }

    #[test]
    fn derived_seeds_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| derive_seed(1, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
