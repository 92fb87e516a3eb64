//! Counter-derived random streams and worker-pool sizing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Environment variable overriding the worker count; unset means one worker per core.
pub const THREADS_ENV: &str = "ADSB_COEXIST_THREADS";

/// Generator of trial `trial` under `seed`: ChaCha8 keyed by the seed, one stream per trial.
///
/// Each trial owns its stream, so results do not depend on how trials are spread over workers.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// SplitMix64 finaliser of `master` mixed with `tag`, used to give every sweep point its own seed.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Worker count requested through [`THREADS_ENV`], if any.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(invalid(e.to_string())),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(e) => Err(invalid(format!("{v:?}: {e}"))),
        },
    }
}

fn invalid(constraint: String) -> Error {
    Error::Validation {
        field: THREADS_ENV.into(),
        constraint,
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`]. Returns the number of workers in use.
///
/// Only the first call in a process can size the pool.
pub fn init_thread_pool() -> Result<usize> {
    if let Some(n) = threads_from_env()? {
        // an already-built global pool keeps its size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(rayon::current_num_threads())
}
