use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for. Each purpose gets its own family of
/// streams so that changing one consumer does not perturb the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Arrivals,
    Service,
    KeyChoice,
    Network,
    MonteCarlo,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Arrivals => 1,
            Purpose::Service => 2,
            Purpose::KeyChoice => 3,
            Purpose::Network => 4,
            Purpose::MonteCarlo => 5,
        }
    }
}

/// Root of all randomness in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    root: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        SeedTree { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Independent stream for `(purpose, index)`, typically one per node.
    pub fn stream(&self, purpose: Purpose, index: u64) -> ChaCha8Rng {
        let mixed = splitmix64(splitmix64(self.root ^ splitmix64(purpose.tag())) ^ index);
        let mut seed = [0u8; 32];
        let mut state = mixed;
        for chunk in seed.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
