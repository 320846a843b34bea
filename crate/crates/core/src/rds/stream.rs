use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Bernoulli symbol stream. ChaCha8 keyed by `master_seed`, with
/// `stream_index` selecting the ChaCha stream, so distinct indices give
/// independent keystreams; one 64-bit word per symbol.
#[derive(Clone, Debug)]
pub struct SymbolStream {
    master_seed: u64,
    stream_index: u64,
    p0: f64,
    position: u64,
    rng: ChaCha8Rng,
}

impl SymbolStream {
    pub fn new(master_seed: u64, stream_index: u64, p0: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            p0,
            position: 0,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    fn symbol_of(&self, word: u64) -> u8 {
        let u = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < self.p0 {
            0
        } else {
            1
        }
    }

    pub fn next_symbol(&mut self) -> u8 {
        let w = self.rng.next_u64();
        self.position += 1;
        self.symbol_of(w)
    }

    /// The symbol at an arbitrary position, without advancing.
    pub fn symbol_at(&self, position: u64) -> u8 {
        let mut rng = self.rng.clone();
        rng.set_word_pos(2 * position as u128);
        self.symbol_of(rng.next_u64())
    }

    /// Moves the stream to `position`.
    pub fn seek(&mut self, position: u64) {
        self.rng.set_word_pos(2 * position as u128);
        self.position = position;
    }
}
