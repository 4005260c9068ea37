//! SplitMix64, the generator behind train/test splits and random solver starts.
//!
//! The stream is counter based: the k-th output (k = 1, 2, ...) is
//! `mix(seed + k * 0x9E3779B97F4A7C15)` with wrapping arithmetic, where `mix`
//! is the SplitMix64 finalizer. Any implementation of these few lines
//! reproduces the same splits.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)`. Draws above the largest multiple of
    /// `bound` are rejected, so there is no modulo bias.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let excess = (u64::MAX % bound + 1) % bound;
        let limit = u64::MAX - excess;
        loop {
            let x = self.next_u64();
            if x <= limit {
                return x % bound;
            }
        }
    }
}
