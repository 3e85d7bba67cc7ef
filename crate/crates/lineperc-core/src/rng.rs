//! Counter-based uniforms.
//!
//! Every Bernoulli draw of the model is a pure function of
//! `(master seed, replica, axis, absolute plane coordinates)`. There is no
//! generator state, so any window of any plane can be sampled in any order
//! and by any thread with identical results.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    mix64(h.wrapping_add(GOLDEN) ^ word)
}

/// Hash state after absorbing seed, replica and a stream tag. Plane
/// coordinates are folded in by [`StreamKey::uniform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(master: u64, replica: u64, stream: u64) -> Self {
        StreamKey(absorb(absorb(absorb(0x6c70_6672, master), replica), stream))
    }

    #[inline]
    pub fn hash(&self, coords: &[i64]) -> u64 {
        let mut h = self.0;
        for &c in coords {
            h = absorb(h, c as u64);
        }
        mix64(h ^ coords.len() as u64)
    }

    /// Uniform in `[0, 1)` from the top 53 bits of the hash.
    #[inline]
    pub fn uniform(&self, coords: &[i64]) -> f64 {
        to_unit(self.hash(coords))
    }
}

#[inline]
pub fn to_unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stream tags. Axis `i` of the line model uses tag `i`; auxiliary fields
/// sit far above any realistic dimension.
pub const AUX_STREAM_BASE: u64 = 1 << 32;

/// Sequential draws from a key: the `i`-th draw hashes `(index, i)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: StreamKey,
    index: i64,
    next: i64,
}

impl CounterRng {
    pub fn new(key: StreamKey, index: u64) -> Self {
        CounterRng { key, index: index as i64, next: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.next += 1;
        self.key.hash(&[self.index, self.next - 1])
    }

    pub fn uniform(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_in_unit_interval() {
        let k = StreamKey::new(1, 2, 0);
        for x in -50..50 {
            let u = k.uniform(&[x, 3 * x]);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn keys_separate_streams() {
        let a = StreamKey::new(1, 0, 0).hash(&[0, 0]);
        assert_ne!(a, StreamKey::new(2, 0, 0).hash(&[0, 0]));
        assert_ne!(a, StreamKey::new(1, 1, 0).hash(&[0, 0]));
        assert_ne!(a, StreamKey::new(1, 0, 1).hash(&[0, 0]));
        assert_ne!(a, StreamKey::new(1, 0, 0).hash(&[0, 1]));
        assert_ne!(a, StreamKey::new(1, 0, 0).hash(&[0, 0, 0]));
    }

    #[test]
    fn frozen_values() {
        // Golden outputs guard against accidental changes to the stream layout.
        let k = StreamKey::new(42, 7, 1);
        let got = [k.hash(&[0, 0]), k.hash(&[-3, 5])];
        assert_eq!(got, FROZEN);
    }

    const FROZEN: [u64; 2] = [4714929146612416725, 1564452614759807815];
}
