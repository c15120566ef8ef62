//! Deterministic 64-bit hashing.
//!
//! Fingerprint bits, scaffold keys, cache keys and config hashes all have to
//! be identical across runs, platforms and compiler versions, so nothing in
//! this crate hashes through `std::collections::hash_map::DefaultHasher`
//! (whose output is explicitly unstable). The scheme here is FNV-1a over a
//! byte stream followed by a splitmix64 finalizer for avalanche.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Domain-separation tags. Two hashes of identical payloads but different
/// domains must not collide by construction.
pub mod tag {
    pub const ATOM_INVARIANT: u64 = 0x01;
    pub const ECFP_ROUND: u64 = 0x02;
    pub const GRAPH_KEY_ATOM: u64 = 0x03;
    pub const GRAPH_KEY_REFINE: u64 = 0x04;
    pub const GRAPH_KEY_FINAL: u64 = 0x05;
    pub const GRID_ENV: u64 = 0x06;
    pub const GRID_PAIR: u64 = 0x07;
    pub const CONFIG: u64 = 0x08;
    pub const DATASET_CONTENT: u64 = 0x09;
    pub const FEATURIZER_PARAMS: u64 = 0x0a;
}

/// splitmix64 finalizer; full-period avalanche of a 64-bit word.
#[inline]
pub fn avalanche(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Streaming hasher with fixed constants.
#[derive(Clone, Debug)]
pub struct StableHasher {
    state: u64,
}

impl StableHasher {
    pub fn new(domain: u64) -> Self {
        let mut h = StableHasher { state: FNV_OFFSET };
        h.write_u64(domain);
        h
    }

    #[inline]
    pub fn write_byte(&mut self, b: u8) {
        self.state ^= b as u64;
        self.state = self.state.wrapping_mul(FNV_PRIME);
    }

    #[inline]
    pub fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_byte(b);
        }
    }

    #[inline]
    pub fn write_u64(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }

    #[inline]
    pub fn write_i64(&mut self, v: i64) {
        self.write_u64(v as u64);
    }

    #[inline]
    pub fn write_f64(&mut self, v: f64) {
        // Hash the bit pattern; normalize -0.0 so logically equal values agree.
        let v = if v == 0.0 { 0.0 } else { v };
        self.write_u64(v.to_bits());
    }

    #[inline]
    pub fn write_bool(&mut self, v: bool) {
        self.write_byte(v as u8);
    }

    #[inline]
    pub fn write_str(&mut self, s: &str) {
        self.write_u64(s.len() as u64);
        self.write_bytes(s.as_bytes());
    }

    #[inline]
    pub fn finish(&self) -> u64 {
        avalanche(self.state)
    }
}

/// One-shot convenience for hashing a byte slice.
pub fn hash_bytes(domain: u64, bytes: &[u8]) -> u64 {
    let mut h = StableHasher::new(domain);
    h.write_bytes(bytes);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_reference_values() {
        // Pinned outputs; a change here breaks every stored fingerprint/key.
        assert_eq!(
            hash_bytes(tag::ATOM_INVARIANT, b"C"),
            0xaffa_ce9f_67cf_62ac
        );
        assert_eq!(avalanche(0), 0);
        assert_eq!(avalanche(1), 0x5692_161d_100b_05e5);
    }

    #[test]
    fn domains_separate() {
        assert_ne!(
            hash_bytes(tag::ATOM_INVARIANT, b"x"),
            hash_bytes(tag::ECFP_ROUND, b"x")
        );
    }

    #[test]
    fn negative_zero_normalized() {
        let mut a = StableHasher::new(1);
        a.write_f64(0.0);
        let mut b = StableHasher::new(1);
        b.write_f64(-0.0);
        assert_eq!(a.finish(), b.finish());
    }
}
