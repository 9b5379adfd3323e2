//! AWGN channel, SNR calibration and reproducible randomness.
//!
//! Every Monte Carlo trial draws its randomness from a generator derived
//! purely from `(master seed, trial index)`, so sweeps are bit-reproducible
//! regardless of execution order or thread count.

use crate::code::{encode_into, CodeSpec};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Fixed seed for the symbol-energy calibration stream. Baked in so that the
/// SNR axis of every sweep is identical across runs and machines.
pub const CALIBRATION_SEED: u64 = 0xCA11_B8A7_E5EE_D001;

/// Number of source blocks used to calibrate average symbol energy.
pub const CALIBRATION_BLOCKS: usize = 100_000;

/// A received codeword plus the per-symbol noise variance it was exposed to.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelObservation {
    pub received: Vec<f64>,
    pub sigma2: f64,
}

/// An SNR grid point: decibel value plus the noise variance it implies for a
/// particular system (via that system's average symbol energy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub sigma2: f64,
}

/// Generator for one trial, derived only from `(master_seed, trial_index)`.
///
/// Uses independent ChaCha streams per trial over a common key, so trials can
/// run in any order or in parallel and still reproduce exactly.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Draw `k` independent source symbols uniformly from `[-1, 1]`.
pub fn sample_source<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Add white Gaussian noise of variance `sigma2` to each symbol.
pub fn awgn<R: Rng>(codeword: &[f64], sigma2: f64, rng: &mut R) -> Result<ChannelObservation> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise variance must be finite and non-negative, got {sigma2}"
        )));
    }
    let received = if sigma2 == 0.0 {
        codeword.to_vec()
    } else {
        let normal = Normal::new(0.0, sigma2.sqrt())
            .map_err(|e| Error::InvalidInput(format!("noise distribution: {e}")))?;
        codeword.iter().map(|&x| x + normal.sample(rng)).collect()
    };
    Ok(ChannelObservation { received, sigma2 })
}

fn energy_cache() -> &'static Mutex<HashMap<String, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<String, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn energy_key(spec: &CodeSpec) -> String {
    // The id omits beta when it equals 2; make the key unambiguous.
    format!("{}|beta={}", spec.id(), spec.tent_param().beta())
}

/// Monte Carlo estimate of the mean squared codeword symbol value, using a
/// fixed calibration seed. Cached per spec.
///
/// The stationary symbol distribution of the chaotic orbits has no closed
/// form here, so the SNR axis is pinned by this calibration.
pub fn avg_symbol_energy(spec: &CodeSpec) -> Result<f64> {
    if let Some(&e) = energy_cache().lock().unwrap().get(&energy_key(spec)) {
        return Ok(e);
    }
    let e = avg_symbol_energy_with_seed(spec, CALIBRATION_SEED)?;
    energy_cache().lock().unwrap().insert(energy_key(spec), e);
    Ok(e)
}

/// Uncached energy calibration with an explicit seed; used by tests to check
/// seed-to-seed stability.
pub fn avg_symbol_energy_with_seed(spec: &CodeSpec, seed: u64) -> Result<f64> {
    spec.validate()?;
    let k = spec.k();
    let hi = spec.source_hi();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(spec.codeword_len());
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut src = vec![0.0; k];
    for _ in 0..CALIBRATION_BLOCKS {
        for s in src.iter_mut() {
            *s = rng.random_range(-1.0..=hi);
        }
        buf.clear();
        encode_into(spec, &src, &mut buf)?;
        sum += buf.iter().map(|x| x * x).sum::<f64>();
        count += buf.len();
    }
    Ok(sum / count as f64)
}

/// Noise variance for an SNR point: `avg_symbol_energy(spec) / 10^(snr/10)`.
pub fn snr_to_sigma2(snr_db: f64, spec: &CodeSpec) -> Result<f64> {
    Ok(avg_symbol_energy(spec)? / 10f64.powf(snr_db / 10.0))
}
