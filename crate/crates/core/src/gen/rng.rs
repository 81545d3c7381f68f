/// SplitMix64, the seeding generator from Steele, Lea & Flood (2014).
///
/// Bit-exact definition, so instances are reproducible from any language:
///
/// ```text
/// state <- state + 0x9E3779B97F4A7C15            (wrapping)
/// z <- state
/// z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
/// z <- (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
/// output z ^ (z >> 31)
/// ```
///
/// Derived draws:
///
/// * `below(k)` = high 64 bits of the 128-bit product `next_u64() * k`
///   (multiply-shift range reduction, one draw, no rejection);
/// * `unit_f64()` = `(next_u64() >> 11) * 2^-53`, uniform in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.state)
    }

    /// Uniform-ish integer in `[0, bound)`; `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// The SplitMix64 output function, also used to derive per-cell seeds.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed.
pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(mix(base), |acc, &c| mix(acc ^ c.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}
