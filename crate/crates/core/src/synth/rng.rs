//! SplitMix64, the generator behind every synthetic corpus.
//!
//! Fully specified so corpora can be regenerated bit-for-bit in any language:
//!
//! ```text
//! next_u64:  state = state + 0x9E3779B97F4A7C15            (wrapping)
//!            z = state
//!            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
//!            z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
//!            return z ^ (z >> 31)
//! next_f64:  (next_u64 >> 11) * 2^-53                       in [0, 1)
//! below(n):  high 64 bits of the 128-bit product next_u64 * n   in [0, n)
//! ```

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
