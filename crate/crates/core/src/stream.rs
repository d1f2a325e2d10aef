//! RNG discipline: one root seed, with each subsystem drawing from its own
//! ChaCha stream so toggling one subsystem never shifts another's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub const STREAM_SAMPLER: u64 = 0;
pub const STREAM_ARENA: u64 = 1;
pub const STREAM_GROUNDING: u64 = 2;

/// Deterministic per-subsystem generator derived from the run seed.
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let mut a = derive_rng(42, STREAM_SAMPLER);
        let mut b = derive_rng(42, STREAM_SAMPLER);
        let mut c = derive_rng(42, STREAM_ARENA);
        let xs: [f64; 4] = [a.gen(), a.gen(), a.gen(), a.gen()];
        let ys: [f64; 4] = [b.gen(), b.gen(), b.gen(), b.gen()];
        let zs: [f64; 4] = [c.gen(), c.gen(), c.gen(), c.gen()];
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}
