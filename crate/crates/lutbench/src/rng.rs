//! Counter-based pseudo-random numbers for reproducible experiment designs.
//!
//! Every random choice in this crate flows through [`SplitMix64`] so that a
//! design is a pure function of its seed, regardless of platform, thread
//! count, or call ordering. The algorithm is fixed and documented here so an
//! independent implementation can reproduce designs bit for bit:
//!
//! The i-th output (i = 1, 2, ...) of a stream with seed `s` is
//!
//! ```text
//! z = s + i * 0x9E3779B97F4A7C15          (wrapping 64-bit)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! out = z ^ (z >> 31)
//! ```
//!
//! which is the well-known SplitMix64 generator expressed in counter form.
//! `f64` draws use the top 53 bits: `(out >> 11) * 2^-53`, uniform in [0, 1).

const GAMMA: u64 = 0x9E3779B9_7F4A7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D_1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB_133111EB);
    z ^ (z >> 31)
}

/// Counter-based SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { seed, counter: 0 }
    }

    /// Derives an independent stream from a seed and a sequence of labels,
    /// for per-column or per-component sub-streams.
    pub fn derived(seed: u64, labels: &[u64]) -> Self {
        let mut s = mix(seed ^ GAMMA);
        for &l in labels {
            s = mix(s ^ l.wrapping_mul(GAMMA));
        }
        SplitMix64::new(s)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix(self.seed.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, m). `m` must be non-zero. The tiny modulo bias
    /// (< 2^-50 for the m used here) is irrelevant for experiment designs and
    /// keeps the algorithm trivially portable.
    #[inline]
    pub fn next_below(&mut self, m: u64) -> u64 {
        self.next_u64() % m
    }

    /// Standard normal via Box-Muller on two uniform draws.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle: for i from n-1 down to 1 swap element
    /// i with element `next_below(i + 1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
