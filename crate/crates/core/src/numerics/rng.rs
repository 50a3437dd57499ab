//! Seeded pseudo-random number generation.
//!
//! Everything in this crate that needs randomness (parameter initialization,
//! corpus sampling, epoch shuffling, bootstrap draws) goes through
//! [`SplitMix64`], Sebastiano Vigna's splitmix64 generator. The stream is
//! defined purely by 64-bit integer arithmetic, so a given seed produces the
//! same values on every platform and toolchain. The platform RNG is never
//! used.

/// splitmix64 generator: one u64 of state, advanced by the golden-ratio
/// increment and scrambled with two xor-shift-multiply rounds.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Lemire's multiply-shift with rejection, so
    /// the distribution is exactly uniform. Panics if n == 0.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        let n = n as u64;
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// k distinct indices drawn uniformly without replacement from 0..n,
    /// in draw order. Partial Fisher-Yates over an index table.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        let mut picked = Vec::with_capacity(k);
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
            picked.push(pool[i]);
        }
        picked
    }

    /// A new generator whose seed is derived from this stream. Used to give
    /// independent components their own streams.
    pub fn derive(&mut self) -> SplitMix64 {
        SplitMix64::new(self.next_u64())
    }
}
