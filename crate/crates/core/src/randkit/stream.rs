//! Counter-based random streams.
//!
//! Output `i` of the stream `(seed, stream_id)` is a pure function of those
//! three integers, so a replicate that owns stream `j` draws exactly the same
//! numbers whether it runs first, last, or on another thread.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const OUTPUT_SALT: u64 = 0xA076_1D64_78BD_642F;

/// Substream tag reserved for model noise; see [`EvalStreams`].
const NOISE_TAG: u64 = u64::MAX;

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic, splittable stream of 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let key = mix64(mix64(seed ^ OUTPUT_SALT) ^ stream_id.wrapping_mul(STREAM_SALT | 1));
        Self {
            seed,
            stream_id,
            key,
            counter: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of words drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// The `i`-th word of this stream, independent of the current position.
    #[inline]
    pub fn word_at(&self, i: u64) -> u64 {
        mix64(mix64(self.key.wrapping_add(i.wrapping_mul(GOLDEN_GAMMA))) ^ self.key)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let w = self.word_at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        w
    }

    /// Uniform draw on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on the open interval `(0, 1)`; never returns 0 or 1.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// A child stream identified by `index`. Does not advance `self`.
    pub fn substream(&self, index: u64) -> RngStream {
        let child = mix64(self.stream_id ^ mix64(index.wrapping_add(GOLDEN_GAMMA)));
        RngStream::new(self.seed, child)
    }
}

/// The pair of streams owned by one Monte Carlo replicate.
///
/// `sampling` drives input draws; `noise` feeds the additive noise of stochastic
/// models. Keeping them apart means a noiseless and a noisy run of the same
/// model visit identical input points.
#[derive(Clone, Debug)]
pub struct EvalStreams {
    pub sampling: RngStream,
    pub noise: RngStream,
}

impl EvalStreams {
    pub fn for_replicate(root: &RngStream, index: u64) -> Self {
        let sampling = root.substream(index);
        let noise = sampling.substream(NOISE_TAG);
        Self { sampling, noise }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_repeat_exactly() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn word_at_matches_sequential_draws() {
        let s = RngStream::new(3, 9);
        let mut t = s.clone();
        for i in 0..100 {
            assert_eq!(s.word_at(i), t.next_u64());
        }
        assert_eq!(t.position(), 100);
    }

    #[test]
    fn distinct_streams_have_distinct_prefixes() {
        let prefixes: Vec<Vec<u64>> = (0..256)
            .map(|id| {
                let mut s = RngStream::new(1, id);
                (0..4).map(|_| s.next_u64()).collect()
            })
            .collect();
        for i in 0..prefixes.len() {
            for j in (i + 1)..prefixes.len() {
                assert_ne!(prefixes[i][0], prefixes[j][0]);
                assert_ne!(prefixes[i], prefixes[j]);
            }
        }
    }

    #[test]
    fn substreams_do_not_advance_parent() {
        let root = RngStream::new(5, 0);
        let a = root.substream(1);
        let b = root.substream(1);
        assert_eq!(a, b);
        assert_ne!(root.substream(1), root.substream(2));
        assert_eq!(root.position(), 0);
    }

    #[test]
    fn open_unit_draws_stay_inside() {
        let mut s = RngStream::new(0, 0);
        for _ in 0..100_000 {
            let u = s.next_open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn adjacent_streams_are_uncorrelated() {
        let mut a = RngStream::new(11, 0);
        let mut b = RngStream::new(11, 1);
        let n = 100_000;
        let (mut sab, mut sa, mut sb) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = a.next_f64() - 0.5;
            let y = b.next_f64() - 0.5;
            sab += x * y;
            sa += x * x;
            sb += y * y;
        }
        let corr = sab / (sa * sb).sqrt();
        // 4 / sqrt(n) band
        assert!(corr.abs() < 0.0127, "corr = {corr}");
    }
}
