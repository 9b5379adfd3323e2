//! Digital comparison system at 1:6 bandwidth expansion: uniform scalar
//! quantizer, 8-state rate-1/2 convolutional code with soft-decision Viterbi
//! decoding, and Gray-coded PAM.
//!
//! Admissible configurations must spend exactly 6 channel symbols per source
//! symbol: `bits * 2 / log2(pam order) = 6`. The two used in the experiments
//! are (3-bit, rate 1/2, 2-PAM) and (6-bit, rate 1/2, 4-PAM).

use crate::channel::{awgn, ChannelObservation};
use crate::error::{Error, Result};
use rand::Rng;

/// Source symbols per frame for the digital baseline.
pub const FRAME_LEN: usize = 1000;

/// Uniform scalar quantizer on `[-1, 1]` with `2^bits` equal cells and
/// midpoint reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizerSpec {
    bits: u32,
}

impl QuantizerSpec {
    pub fn new(bits: u32) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::InvalidInput(format!(
                "quantizer bits must be in 1..=16, got {bits}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn levels(self) -> usize {
        1 << self.bits
    }

    /// Cell width `2 / 2^bits`.
    pub fn delta(self) -> f64 {
        2.0 / self.levels() as f64
    }

    /// Mean squared quantization error of a uniform source: `delta^2 / 12`.
    pub fn floor_mse(self) -> f64 {
        let d = self.delta();
        d * d / 12.0
    }

    /// Cell index of `u`: `floor((u + 1) / delta)`, clamped to the level range.
    pub fn quantize(self, u: f64) -> usize {
        let idx = ((u + 1.0) / self.delta()).floor() as isize;
        idx.clamp(0, self.levels() as isize - 1) as usize
    }

    /// Midpoint of cell `index`: `-1 + delta * (index + 1/2)`.
    pub fn dequantize(self, index: usize) -> Result<f64> {
        if index >= self.levels() {
            return Err(Error::InvalidInput(format!(
                "quantizer index {index} out of range 0..{}",
                self.levels()
            )));
        }
        Ok(-1.0 + self.delta() * (index as f64 + 0.5))
    }

    /// Index bits, most significant first.
    pub fn index_bits(self, index: usize, out: &mut Vec<u8>) {
        for b in (0..self.bits).rev() {
            out.push((index >> b & 1) as u8);
        }
    }

    /// Rebuild an index from `bits` bits, most significant first.
    pub fn bits_to_index(self, bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, &b| acc << 1 | b as usize)
    }
}

/// Feedforward rate-1/2 convolutional code, zero-terminated.
///
/// Default generators (13, 15) octal with memory 3 give the 8-state trellis
/// used by the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCodeSpec {
    /// Tap masks, MSB = current input bit.
    pub generators: [u32; 2],
    /// Shift-register length; `2^memory` trellis states.
    pub memory: u32,
}

impl Default for ConvCodeSpec {
    fn default() -> Self {
        Self { generators: [0o13, 0o15], memory: 3 }
    }
}

impl ConvCodeSpec {
    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Coded bits per terminated message of `len` input bits.
    pub fn coded_len(&self, len: usize) -> usize {
        2 * (len + self.memory as usize)
    }

    fn step(&self, state: usize, input: u8) -> (usize, [u8; 2]) {
        let aug = (input as usize) << self.memory | state;
        let out = [
            ((aug as u32 & self.generators[0]).count_ones() & 1) as u8,
            ((aug as u32 & self.generators[1]).count_ones() & 1) as u8,
        ];
        (aug >> 1, out)
    }
}

/// Rate-1/2 convolution of `bits`, appending `memory` zero tail bits to end
/// in the all-zero state. Output length is `2 * (bits.len() + memory)`.
pub fn conv_encode(bits: &[u8], c: &ConvCodeSpec) -> Vec<u8> {
    let mut out = Vec::with_capacity(c.coded_len(bits.len()));
    let mut state = 0usize;
    for &b in bits.iter().chain(std::iter::repeat_n(&0, c.memory as usize)) {
        let (next, pair) = c.step(state, b);
        out.extend_from_slice(&pair);
        state = next;
    }
    out
}

/// PAM constellation of order 2 or 4, Gray-coded and normalized to unit
/// average energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PamSpec {
    order: usize,
}

impl PamSpec {
    pub fn new(order: usize) -> Result<Self> {
        if order != 2 && order != 4 {
            return Err(Error::InvalidInput(format!(
                "PAM order must be 2 or 4, got {order}"
            )));
        }
        Ok(Self { order })
    }

    pub fn order(self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(self) -> usize {
        match self.order {
            2 => 1,
            _ => 2,
        }
    }

    /// Map one bit group (length `bits_per_symbol`) to an amplitude.
    ///
    /// Order 2: `0 -> -1, 1 -> +1`. Order 4, Gray over `{-3,-1,+1,+3}/sqrt 5`:
    /// `00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3`.
    pub fn map_bits(self, bits: &[u8]) -> f64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol());
        match self.order {
            2 => 2.0 * bits[0] as f64 - 1.0,
            _ => {
                let level = match (bits[0], bits[1]) {
                    (0, 0) => -3.0,
                    (0, 1) => -1.0,
                    (1, 1) => 1.0,
                    _ => 3.0,
                };
                level / 5f64.sqrt()
            }
        }
    }
}

/// Gray-mapped modulation of a coded bit sequence.
pub fn pam_modulate(bits: &[u8], p: &PamSpec) -> Result<Vec<f64>> {
    let bps = p.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(Error::InvalidInput(format!(
            "bit count {} not divisible by {} bits per symbol",
            bits.len(),
            bps
        )));
    }
    Ok(bits.chunks_exact(bps).map(|chunk| p.map_bits(chunk)).collect())
}

/// Soft-decision Viterbi decoding of a terminated rate-1/2 codeword observed
/// through PAM on an AWGN channel.
///
/// Branch metrics are squared distances to the branch's modulated symbols.
/// Each trellis step emits two coded bits: two symbols under 2-PAM, exactly
/// one under 4-PAM. The three tail steps force zero inputs, so the returned
/// message is always a valid terminated path.
pub fn viterbi_decode(obs: &ChannelObservation, c: &ConvCodeSpec, p: &PamSpec) -> Result<Vec<u8>> {
    let syms_per_step = 2 / p.bits_per_symbol();
    if !obs.received.len().is_multiple_of(syms_per_step) {
        return Err(Error::InvalidInput(format!(
            "observation length {} not divisible by {} symbols per trellis step",
            obs.received.len(),
            syms_per_step
        )));
    }
    let steps = obs.received.len() / syms_per_step;
    let memory = c.memory as usize;
    if steps < memory {
        return Err(Error::InvalidInput(format!(
            "observation too short: {steps} trellis steps < {memory} tail steps"
        )));
    }
    let info_len = steps - memory;
    let num_states = c.num_states();

    let branch_metric = |step: usize, out: [u8; 2]| -> f64 {
        let r = &obs.received[step * syms_per_step..(step + 1) * syms_per_step];
        match p.order() {
            2 => {
                let d0 = r[0] - p.map_bits(&out[..1]);
                let d1 = r[1] - p.map_bits(&out[1..]);
                d0 * d0 + d1 * d1
            }
            _ => {
                let d = r[0] - p.map_bits(&out);
                d * d
            }
        }
    };

    let mut metrics = vec![f64::INFINITY; num_states];
    metrics[0] = 0.0;
    let mut next_metrics = vec![f64::INFINITY; num_states];
    // Predecessor state and input bit per (step, state).
    let mut pred = vec![0u8; steps * num_states];
    for step in 0..steps {
        next_metrics.fill(f64::INFINITY);
        let inputs: &[u8] = if step < info_len { &[0, 1] } else { &[0] };
        for (state, &metric) in metrics.iter().enumerate() {
            if metric.is_infinite() {
                continue;
            }
            for &input in inputs {
                let (next, out) = c.step(state, input);
                let cand = metric + branch_metric(step, out);
                if cand < next_metrics[next] {
                    next_metrics[next] = cand;
                    pred[step * num_states + next] = (state as u8) << 1 | input;
                }
            }
        }
        std::mem::swap(&mut metrics, &mut next_metrics);
    }

    // Terminated trellis: backtrack from the all-zero state.
    let mut state = 0usize;
    let mut bits = vec![0u8; steps];
    for step in (0..steps).rev() {
        let entry = pred[step * num_states + state];
        bits[step] = entry & 1;
        state = (entry >> 1) as usize;
    }
    bits.truncate(info_len);
    Ok(bits)
}

/// A full digital transmission chain obeying the 1:6 bandwidth expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineSpec {
    pub quantizer: QuantizerSpec,
    pub conv: ConvCodeSpec,
    pub pam: PamSpec,
}

impl PipelineSpec {
    /// Validate the bandwidth constraint: `bits * 2 / log2(order)` channel
    /// symbols per source symbol must equal 6.
    pub fn new(quantizer: QuantizerSpec, conv: ConvCodeSpec, pam: PamSpec) -> Result<Self> {
        let coded_bits = quantizer.bits() as usize * 2;
        let per_source = coded_bits / pam.bits_per_symbol();
        if per_source != 6 || !coded_bits.is_multiple_of(pam.bits_per_symbol()) {
            return Err(Error::Config(format!(
                "configuration spends {per_source} channel symbols per source symbol; \
                 the bandwidth expansion must be exactly 1:6"
            )));
        }
        Ok(Self { quantizer, conv, pam })
    }

    /// The 3-bit / rate-1/2 / 2-PAM configuration.
    pub fn coarse() -> Self {
        Self::new(QuantizerSpec::new(3).unwrap(), ConvCodeSpec::default(), PamSpec::new(2).unwrap())
            .unwrap()
    }

    /// The 6-bit / rate-1/2 / 4-PAM configuration.
    pub fn fine() -> Self {
        Self::new(QuantizerSpec::new(6).unwrap(), ConvCodeSpec::default(), PamSpec::new(4).unwrap())
            .unwrap()
    }

    /// Average transmitted symbol energy. The constellations are normalized
    /// to unit energy and coded bits are uniform, so this is exactly 1.
    pub fn avg_symbol_energy(&self) -> f64 {
        1.0
    }

    pub fn id(&self) -> String {
        format!("digital-{}bit-{}pam", self.quantizer.bits(), self.pam.order())
    }
}

/// Transmit a block of analog sources through quantize -> convolutional code
/// -> PAM -> AWGN -> Viterbi -> dequantize, returning the reconstructions.
pub fn digital_pipeline<R: Rng>(
    sources: &[f64],
    pipe: &PipelineSpec,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let q = pipe.quantizer;
    let mut bits = Vec::with_capacity(sources.len() * q.bits() as usize);
    for &u in sources {
        q.index_bits(q.quantize(u), &mut bits);
    }
    let coded = conv_encode(&bits, &pipe.conv);
    let symbols = pam_modulate(&coded, &pipe.pam)?;
    let obs = awgn(&symbols, sigma2, rng)?;
    let decoded = viterbi_decode(&obs, &pipe.conv, &pipe.pam)?;
    debug_assert_eq!(decoded.len(), bits.len());
    decoded
        .chunks_exact(q.bits() as usize)
        .map(|chunk| q.dequantize(q.bits_to_index(chunk)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::trial_rng;

    #[test]
    fn quantize_examples() {
        let q = QuantizerSpec::new(3).unwrap();
        assert_eq!(q.delta(), 0.25);
        assert_eq!(q.quantize(0.3), 5);
        assert_eq!(q.quantize(-1.0), 0);
        assert_eq!(q.quantize(1.0), 7);
        assert_eq!(q.dequantize(5).unwrap(), 0.375);
        assert_eq!(q.dequantize(0).unwrap(), -0.875);
        assert!(q.dequantize(8).is_err());
    }

    #[test]
    fn bit_packing_roundtrip() {
        let q = QuantizerSpec::new(3).unwrap();
        let mut bits = Vec::new();
        q.index_bits(5, &mut bits);
        assert_eq!(bits, vec![1, 0, 1]);
        assert_eq!(q.bits_to_index(&bits), 5);
    }

    #[test]
    fn conv_encode_examples() {
        let c = ConvCodeSpec::default();
        assert_eq!(c.num_states(), 8);
        assert_eq!(conv_encode(&[0, 0, 0, 0], &c), vec![0; 14]);
        // Impulse response of the (13, 15) octal pair.
        assert_eq!(
            conv_encode(&[1, 0, 0, 0], &c),
            vec![1, 1, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0]
        );
        for len in [1usize, 5, 17] {
            assert_eq!(conv_encode(&vec![1; len], &c).len(), 2 * (len + 3));
        }
    }

    #[test]
    fn pam_examples() {
        let p2 = PamSpec::new(2).unwrap();
        assert_eq!(pam_modulate(&[0, 1], &p2).unwrap(), vec![-1.0, 1.0]);
        let p4 = PamSpec::new(4).unwrap();
        let s = pam_modulate(&[0, 0], &p4).unwrap();
        assert!((s[0] + 3.0 / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(pam_modulate(&[], &p4).unwrap(), Vec::<f64>::new());
        assert!(pam_modulate(&[0], &p4).is_err());
        assert!(PamSpec::new(8).is_err());
    }

    #[test]
    fn pam_constellations_have_unit_energy() {
        let p2 = PamSpec::new(2).unwrap();
        let e2: f64 = [0u8, 1].iter().map(|&b| p2.map_bits(&[b]).powi(2)).sum::<f64>() / 2.0;
        assert!((e2 - 1.0).abs() < 1e-12);
        let p4 = PamSpec::new(4).unwrap();
        let e4: f64 = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| p4.map_bits(&[a, b]).powi(2))
            .sum::<f64>()
            / 4.0;
        assert!((e4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn viterbi_recovers_noiseless_messages() {
        let c = ConvCodeSpec::default();
        for p in [PamSpec::new(2).unwrap(), PamSpec::new(4).unwrap()] {
            let mut rng = trial_rng(11, 0);
            for _ in 0..20 {
                let msg: Vec<u8> = (0..24).map(|_| rng.random_range(0..2u8)).collect();
                let coded = conv_encode(&msg, &c);
                let symbols = pam_modulate(&coded, &p).unwrap();
                let obs = ChannelObservation { received: symbols, sigma2: 0.0 };
                assert_eq!(viterbi_decode(&obs, &c, &p).unwrap(), msg);
            }
        }
    }

    #[test]
    fn bandwidth_constraint() {
        assert!(PipelineSpec::new(
            QuantizerSpec::new(3).unwrap(),
            ConvCodeSpec::default(),
            PamSpec::new(2).unwrap()
        )
        .is_ok());
        assert!(PipelineSpec::new(
            QuantizerSpec::new(6).unwrap(),
            ConvCodeSpec::default(),
            PamSpec::new(4).unwrap()
        )
        .is_ok());
        assert!(PipelineSpec::new(
            QuantizerSpec::new(4).unwrap(),
            ConvCodeSpec::default(),
            PamSpec::new(2).unwrap()
        )
        .is_err());
    }

    #[test]
    fn noiseless_pipeline_hits_quantizer_floor() {
        // The channel is transparent at sigma^2 = 0, so end-to-end MSE is the
        // pure quantization MSE.
        let pipe = PipelineSpec::coarse();
        let mut rng = trial_rng(5, 0);
        let sources: Vec<f64> = (0..100_000).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let recon = digital_pipeline(&sources, &pipe, 0.0, &mut rng).unwrap();
        let mse: f64 = sources
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / sources.len() as f64;
        let floor = pipe.quantizer.floor_mse();
        assert!((mse - floor).abs() < 0.01 * floor, "mse {mse} vs floor {floor}");
    }

    #[test]
    fn viterbi_output_is_always_a_valid_message_under_heavy_noise() {
        let c = ConvCodeSpec::default();
        let pam = PamSpec::new(2).unwrap();
        for t in 0..20u64 {
            let mut rng = trial_rng(13, t);
            let msg: Vec<u8> = (0..40).map(|_| rng.random_range(0..2u8)).collect();
            let symbols = pam_modulate(&conv_encode(&msg, &c), &pam).unwrap();
            let obs = awgn(&symbols, 25.0, &mut rng).unwrap();
            let decoded = viterbi_decode(&obs, &c, &pam).unwrap();
            // Whatever the noise did, the decoder commits to a terminated
            // trellis path: a full-length message that re-encodes cleanly.
            assert_eq!(decoded.len(), msg.len());
            assert_eq!(conv_encode(&decoded, &c).len(), symbols.len());
        }
    }
}
