//! Round-by-round Monte Carlo simulator of the protocol.
//!
//! Each round, the sender draws `L` random phase bits and emits a block of
//! weak pulses; the channel delivers a Poisson-distributed photon count. A
//! block arriving with exactly one photon passes a detection gate with
//! probability 1/2, and the surviving photon is measured by a variable-delay
//! interferometer that announces an unordered pulse pair and reads out their
//! relative phase. The receiver's raw bit is that relative-phase reading; the
//! sender's matching bit is the XOR of the two announced phase bits.
//!
//! Every round consumes randomness from its own counter-indexed stream of a
//! [`rand_chacha::ChaCha8Rng`], so results are bit-reproducible for a given
//! seed and independent of how rounds are batched.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::ser::SerializeStruct;

use crate::error::{Error, Result};
use crate::rate::{self, ProtocolParams, RatePoint};

/// Tolerance on `|psi|^2 - 1` accepted by the interferometer model.
const NORM_TOL: f64 = 1e-9;

/// Disturbance applied to the in-flight single-photon state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    /// Lossless phase-preserving channel (loss is modeled by the photon
    /// count, not here).
    Ideal,
    /// Each pulse's phase flips independently with probability `p`.
    PhaseFlip { p: f64 },
    /// With probability `d` the photon collapses onto a definite pulse slot,
    /// erasing all relative-phase information.
    PositionDephase { d: f64 },
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Ideal => Ok(()),
            ChannelModel::PhaseFlip { p } => {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    Err(Error::domain(format!(
                        "phase-flip probability must lie in [0, 1], got {p}"
                    )))
                } else {
                    Ok(())
                }
            }
            ChannelModel::PositionDephase { d } => {
                if !d.is_finite() || !(0.0..=1.0).contains(&d) {
                    Err(Error::domain(format!(
                        "dephasing probability must lie in [0, 1], got {d}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Bit-error rate this channel induces on sifted bits.
    ///
    /// A flip on exactly one pulse of the announced pair inverts the reading,
    /// so independent flips give `2p(1 - p)`; a collapsed photon leaves the
    /// reading uniformly random, giving `d / 2`.
    pub fn expected_error_rate(&self) -> f64 {
        match *self {
            ChannelModel::Ideal => 0.0,
            ChannelModel::PhaseFlip { p } => 2.0 * p * (1.0 - p),
            ChannelModel::PositionDephase { d } => d / 2.0,
        }
    }

    fn apply(&self, rng: &mut ChaCha8Rng, psi: &mut [f64]) {
        match *self {
            ChannelModel::Ideal => {}
            ChannelModel::PhaseFlip { p } => {
                for amp in psi.iter_mut() {
                    if rng.random_bool(p) {
                        *amp = -*amp;
                    }
                }
            }
            ChannelModel::PositionDephase { d } => {
                if rng.random_bool(d) {
                    let u: f64 = rng.random();
                    let mut cum = 0.0;
                    let mut slot = psi.len() - 1;
                    for (k, amp) in psi.iter().enumerate() {
                        cum += amp * amp;
                        if u < cum {
                            slot = k;
                            break;
                        }
                    }
                    for (k, amp) in psi.iter_mut().enumerate() {
                        *amp = if k == slot { 1.0 } else { 0.0 };
                    }
                }
            }
        }
    }
}

/// Full configuration of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimConfig {
    pub params: ProtocolParams,
    /// Number of emitted blocks.
    pub rounds: u64,
    /// Seed of the round-indexed random streams.
    pub seed: u64,
    /// Fraction of detections diverted to error estimation.
    pub sample_fraction: f64,
    pub channel: ChannelModel,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.channel.validate()?;
        if self.rounds == 0 {
            return Err(Error::domain("round count must be >= 1"));
        }
        if !self.sample_fraction.is_finite() || !(0.0..=1.0).contains(&self.sample_fraction) {
            return Err(Error::domain(format!(
                "sample fraction must lie in [0, 1], got {}",
                self.sample_fraction
            )));
        }
        Ok(())
    }
}

/// A growable bit sequence that serializes as `{len, hex}` with bit `i`
/// stored at bit `i % 8` of byte `i / 8`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, bit) in self.bits.iter().enumerate() {
            if *bit {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl serde::Serialize for BitString {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("BitString", 2)?;
        state.serialize_field("len", &self.len())?;
        state.serialize_field("hex", &self.to_hex())?;
        state.end()
    }
}

/// Counters and empirical rates accumulated over a run.
///
/// `e_emp` is 0 when no detection was sampled; [`estimate_rate_from_sim`]
/// rejects that case explicitly.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimStats {
    pub rounds: u64,
    pub detected: u64,
    pub sampled: u64,
    pub sample_errors: u64,
    pub sifted_bits: u64,
    pub q_emp: f64,
    pub e_emp: f64,
}

/// Announced interferometer outcome: the unordered pulse pair (as indices
/// `early < late`) and the relative-phase reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureOutcome {
    pub early: usize,
    pub late: usize,
    /// `false` for an in-phase reading, `true` for an out-of-phase reading.
    pub bit: bool,
}

/// Draw the sender's phase bits and the block's common optical phase.
///
/// The common phase is physically emitted but cancels in every interference
/// probability; it is drawn anyway so the emission model is explicit.
pub fn alice_emit(rng: &mut ChaCha8Rng, l: usize) -> (Vec<bool>, f64) {
    let bits = (0..l).map(|_| rng.random_bool(0.5)).collect();
    let common_phase = rng.random_range(0.0..std::f64::consts::TAU);
    (bits, common_phase)
}

/// Number of photons of the block surviving to the receiver: Poisson with
/// mean `L * mu * eta`.
pub fn channel_photon_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::domain(format!(
            "photon-count mean must be finite and >= 0, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(mean)
        .map_err(|err| Error::numeric(format!("photon-count distribution: {err}")))?;
    Ok(poisson.sample(rng) as u64)
}

/// Single-photon state encoding the phase bits: amplitude `(-1)^{b_k} / sqrt(L)`
/// on pulse slot `k`.
pub fn single_photon_state(bits: &[bool]) -> Vec<f64> {
    let amp = 1.0 / (bits.len() as f64).sqrt();
    bits.iter().map(|&b| if b { -amp } else { amp }).collect()
}

/// All interferometer outcomes with their probabilities for a normalized
/// single-photon state: outcome `(k, l, s)` has probability
/// `(psi_k + (-1)^s psi_l)^2 / (2 (L - 1))`.
pub fn outcome_distribution(psi: &[f64]) -> Result<Vec<(MeasureOutcome, f64)>> {
    let l = psi.len();
    if l < 2 {
        return Err(Error::domain(format!(
            "interferometer needs at least 2 pulse slots, got {l}"
        )));
    }
    let norm: f64 = psi.iter().map(|a| a * a).sum();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::domain(format!(
            "state norm deviates from 1 by {:e}",
            (norm - 1.0).abs()
        )));
    }
    let scale = 1.0 / (2.0 * (l as f64 - 1.0));
    let mut outcomes = Vec::with_capacity(l * (l - 1));
    for early in 0..l {
        for late in (early + 1)..l {
            for bit in [false, true] {
                let amp = if bit {
                    psi[early] - psi[late]
                } else {
                    psi[early] + psi[late]
                };
                outcomes.push((MeasureOutcome { early, late, bit }, amp * amp * scale));
            }
        }
    }
    Ok(outcomes)
}

/// Sample one interferometer outcome by inverse transform over
/// [`outcome_distribution`] in its fixed enumeration order.
pub fn bob_measure(rng: &mut ChaCha8Rng, psi: &[f64]) -> Result<MeasureOutcome> {
    let outcomes = outcome_distribution(psi)?;
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (outcome, prob) in &outcomes {
        cum += prob;
        if u < cum {
            return Ok(*outcome);
        }
    }
    // Rounding can leave cum marginally below 1; the tail belongs to the
    // final outcome.
    Ok(outcomes[outcomes.len() - 1].0)
}

/// Simulate `cfg.rounds` blocks and accumulate statistics and sifted keys.
///
/// Per round, randomness is consumed in a fixed order (phase bits, common
/// phase, photon count, detection gate, channel, interferometer, sampling
/// decision) from that round's dedicated stream. Sampled detections feed the
/// error estimate and are excluded from the sifted keys.
pub fn run_rounds(cfg: &SimConfig) -> Result<(SimStats, BitString, BitString)> {
    cfg.validate()?;
    let l = cfg.params.block_size;
    let mean = l as f64 * cfg.params.mu * cfg.params.eta;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut alice_key = BitString::new();
    let mut bob_key = BitString::new();
    let mut detected = 0u64;
    let mut sampled = 0u64;
    let mut sample_errors = 0u64;

    for round in 0..cfg.rounds {
        let mut rng = base.clone();
        rng.set_stream(round);
        let (bits, _common_phase) = alice_emit(&mut rng, l);
        if channel_photon_count(&mut rng, mean)? != 1 {
            continue;
        }
        if !rng.random_bool(0.5) {
            continue;
        }
        let mut psi = single_photon_state(&bits);
        cfg.channel.apply(&mut rng, &mut psi);
        let outcome = bob_measure(&mut rng, &psi)?;
        detected += 1;
        let alice_bit = bits[outcome.early] ^ bits[outcome.late];
        if rng.random_bool(cfg.sample_fraction) {
            sampled += 1;
            if alice_bit != outcome.bit {
                sample_errors += 1;
            }
        } else {
            alice_key.push(alice_bit);
            bob_key.push(outcome.bit);
        }
    }

    let stats = SimStats {
        rounds: cfg.rounds,
        detected,
        sampled,
        sample_errors,
        sifted_bits: alice_key.len() as u64,
        q_emp: detected as f64 / cfg.rounds as f64,
        e_emp: if sampled == 0 {
            0.0
        } else {
            sample_errors as f64 / sampled as f64
        },
    };
    Ok((stats, alice_key, bob_key))
}

/// Evaluate the key-rate model at the empirical detection probability and
/// sampled error rate of a finished run.
pub fn estimate_rate_from_sim(
    stats: &SimStats,
    params: &ProtocolParams,
    monitored: bool,
) -> Result<RatePoint> {
    if stats.sampled == 0 {
        return Err(Error::degenerate(
            "no sampled detections: empirical error rate is undefined",
        ));
    }
    rate::assemble(params, stats.q_emp, stats.e_emp.clamp(0.0, 1.0), monitored)
}
