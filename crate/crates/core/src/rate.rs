//! Asymptotic key-rate model for a coherent-pulse source.
//!
//! A block of `L` weak coherent pulses with per-pulse intensity `mu` travels
//! through a channel of transmission `eta`. Blocks arriving with exactly one
//! photon yield a detection with probability 1/2; blocks leaving the source
//! with more than `nu_th` photons are pessimistically tagged as fully known
//! to an eavesdropper. The distillable fraction per detected block is
//!
//! ```text
//! rate = Q * (1 - EC - PA)
//! ```
//!
//! with error-correction cost `EC = f_ec * h(e)` and privacy-amplification
//! cost `PA = delta_tag + (1 - delta_tag) * h(phase error bound)`. With
//! disturbance monitoring the phase-error bound comes from
//! [`crate::bounds::phase_error_bound`]; without it, from the constant
//! ceiling `nu_th / (L - 1)`.

use crate::bounds;
use crate::error::{Error, Result};

/// Switch point between the plain and the log-space evaluation of the
/// source-tail Poisson sum.
const TAIL_LOG_SPACE_THRESHOLD: f64 = 30.0;

/// Protocol-level parameters of one operating point.
///
/// The block-level round count and the common phase reference of the emitted
/// pulses only matter to the round-by-round simulator; see
/// [`crate::sim::SimConfig`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProtocolParams {
    /// Pulses per block (`L >= 3`).
    pub block_size: usize,
    /// Photon-number threshold above which a block counts as tagged
    /// (`1 <= nu_th <= L - 2`).
    pub nu_th: usize,
    /// Mean photon number per pulse (`mu > 0`).
    pub mu: f64,
    /// Channel transmission (`0 < eta <= 1`).
    pub eta: f64,
    /// Observed bit-error rate (`0 <= e <= 0.5`).
    pub bit_error: f64,
    /// Error-correction inefficiency (`f_ec >= 1`).
    pub f_ec: f64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_size < 3 {
            return Err(Error::domain(format!(
                "block size must be >= 3, got {}",
                self.block_size
            )));
        }
        if self.nu_th < 1 || self.nu_th > self.block_size - 2 {
            return Err(Error::domain(format!(
                "photon threshold must satisfy 1 <= nu_th <= L - 2, got nu_th = {} for L = {}",
                self.nu_th, self.block_size
            )));
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::domain(format!(
                "intensity must be finite and > 0, got {}",
                self.mu
            )));
        }
        if !self.eta.is_finite() || self.eta <= 0.0 || self.eta > 1.0 {
            return Err(Error::domain(format!(
                "transmission must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if !self.bit_error.is_finite() || !(0.0..=0.5).contains(&self.bit_error) {
            return Err(Error::domain(format!(
                "bit-error rate must lie in [0, 0.5], got {}",
                self.bit_error
            )));
        }
        if !self.f_ec.is_finite() || self.f_ec < 1.0 {
            return Err(Error::domain(format!(
                "error-correction inefficiency must be >= 1, got {}",
                self.f_ec
            )));
        }
        Ok(())
    }
}

/// One evaluated operating point of the rate model.
///
/// `rate_per_block` keeps its sign as a diagnostic; `rate_per_pulse` is the
/// deliverable `max(0, rate_per_block) / L`. A `degenerate` point (detection
/// probability underflowed to zero) carries zero rates, `pa_cost = 1`, and
/// placeholder untagged diagnostics. When every round is tagged
/// (`delta_tag = 1`) the untagged error rate is reported as its trivial
/// ceiling 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RatePoint {
    pub eta: f64,
    pub mu: f64,
    pub nu_th: usize,
    pub q: f64,
    pub e_src: f64,
    pub delta_tag: f64,
    pub e_unt: f64,
    pub ec_cost: f64,
    pub pa_cost: f64,
    pub rate_per_block: f64,
    pub rate_per_pulse: f64,
    pub degenerate: bool,
}

/// Probability that a block produces a detection:
/// `Q = (L mu eta / 2) * exp(-L mu eta / 2)`.
pub fn detection_rate(l: usize, mu: f64, eta: f64) -> f64 {
    let x = l as f64 * mu * eta / 2.0;
    x * (-x).exp()
}

/// Probability that the source emits more than `nu_th` photons in a block:
/// the upper tail of a Poisson law with mean `L * mu`.
pub fn source_tail(l: usize, mu: f64, nu_th: usize) -> f64 {
    let m = l as f64 * mu;
    if m == 0.0 {
        return 0.0;
    }
    let cdf = if m <= TAIL_LOG_SPACE_THRESHOLD {
        let mut term = (-m).exp();
        let mut cum = term;
        for k in 1..=nu_th {
            term *= m / k as f64;
            cum += term;
        }
        cum
    } else {
        // Per-term log-space evaluation keeps large means from underflowing
        // the leading factor before the sum is accumulated.
        let ln_m = m.ln();
        let mut ln_fact = 0.0;
        let mut cum = (-m).exp();
        for k in 1..=nu_th {
            ln_fact += (k as f64).ln();
            cum += (-m + k as f64 * ln_m - ln_fact).exp();
        }
        cum
    };
    (1.0 - cdf).clamp(0.0, 1.0)
}

/// Fraction of detected rounds that must be treated as tagged:
/// `min(1, e_src / (2 Q))`. Half of the single-photon rounds fail at the
/// detector, hence the factor 2 in the denominator.
pub fn tag_fraction(e_src: f64, q: f64) -> Result<f64> {
    if !e_src.is_finite() || !(0.0..=1.0).contains(&e_src) {
        return Err(Error::domain(format!(
            "source tail must lie in [0, 1], got {e_src}"
        )));
    }
    if !q.is_finite() || q < 0.0 {
        return Err(Error::domain(format!(
            "detection probability must be finite and >= 0, got {q}"
        )));
    }
    if q == 0.0 {
        return Err(Error::degenerate(
            "tag fraction undefined at zero detection probability",
        ));
    }
    Ok((e_src / (2.0 * q)).min(1.0))
}

/// Bit-error rate conditioned on the untagged rounds: `e / (1 - delta_tag)`.
pub fn untagged_error(e: f64, delta_tag: f64) -> Result<f64> {
    if !e.is_finite() || e < 0.0 {
        return Err(Error::domain(format!(
            "bit-error rate must be finite and >= 0, got {e}"
        )));
    }
    if !delta_tag.is_finite() || !(0.0..=1.0).contains(&delta_tag) {
        return Err(Error::domain(format!(
            "tag fraction must lie in [0, 1], got {delta_tag}"
        )));
    }
    if delta_tag == 1.0 {
        return Err(Error::degenerate(
            "untagged error rate undefined when every round is tagged",
        ));
    }
    Ok(e / (1.0 - delta_tag))
}

/// Error-correction cost per detected block: `f_ec * h(e)`.
pub fn ec_cost(e: f64, f_ec: f64) -> Result<f64> {
    if !f_ec.is_finite() || f_ec < 1.0 {
        return Err(Error::domain(format!(
            "error-correction inefficiency must be >= 1, got {f_ec}"
        )));
    }
    Ok(f_ec * bounds::binary_entropy(e)?)
}

/// Privacy-amplification cost per detected block with the supplied detection
/// probability.
///
/// Tagged rounds count as fully compromised; untagged rounds pay the entropy
/// of the phase-error bound, evaluated at the untagged error rate when
/// monitoring is on and at the constant ceiling `nu_th / (L - 1)` otherwise.
/// The entropy argument saturates at 1/2.
pub fn pa_cost(p: &ProtocolParams, q: f64, monitored: bool) -> Result<f64> {
    p.validate()?;
    pa_cost_at(p.block_size, p.nu_th, p.mu, p.bit_error, q, monitored)
}

fn pa_cost_at(l: usize, nu_th: usize, mu: f64, e: f64, q: f64, monitored: bool) -> Result<f64> {
    let e_src = source_tail(l, mu, nu_th);
    let delta_tag = tag_fraction(e_src, q)?;
    if delta_tag >= 1.0 {
        return Ok(1.0);
    }
    let e_unt = untagged_error(e, delta_tag)?;
    let phase_bound = if monitored {
        bounds::f_bound(l, nu_th, e_unt)?
    } else {
        nu_th as f64 / (l as f64 - 1.0)
    };
    let entropy = bounds::binary_entropy(phase_bound.min(0.5))?;
    Ok(delta_tag + (1.0 - delta_tag) * entropy)
}

/// Distillable fraction per emitted block given detection probability and the
/// two cost terms.
fn combine_rate(q: f64, ec: f64, pa: f64) -> f64 {
    q * (1.0 - ec - pa)
}

fn degenerate_point(p: &ProtocolParams, q: f64, e_src: f64) -> RatePoint {
    RatePoint {
        eta: p.eta,
        mu: p.mu,
        nu_th: p.nu_th,
        q,
        e_src,
        delta_tag: 1.0,
        e_unt: 1.0,
        ec_cost: 0.0,
        pa_cost: 1.0,
        rate_per_block: 0.0,
        rate_per_pulse: 0.0,
        degenerate: true,
    }
}

/// Evaluate the full model at one operating point, with detection probability
/// and bit-error rate supplied externally (model-derived or empirical).
pub(crate) fn assemble(p: &ProtocolParams, q: f64, e: f64, monitored: bool) -> Result<RatePoint> {
    p.validate()?;
    if !q.is_finite() || !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!(
            "detection probability must lie in [0, 1], got {q}"
        )));
    }
    if !e.is_finite() || !(0.0..=1.0).contains(&e) {
        return Err(Error::domain(format!(
            "bit-error rate must lie in [0, 1], got {e}"
        )));
    }
    let e_src = source_tail(p.block_size, p.mu, p.nu_th);
    if q == 0.0 {
        return Ok(degenerate_point(p, q, e_src));
    }
    let delta_tag = tag_fraction(e_src, q)?;
    let ec = p.f_ec * bounds::binary_entropy(e.min(1.0))?;
    let (e_unt, pa) = if delta_tag >= 1.0 {
        (1.0, 1.0)
    } else {
        let e_unt = untagged_error(e, delta_tag)?;
        let phase_bound = if monitored {
            bounds::f_bound(p.block_size, p.nu_th, e_unt)?
        } else {
            p.nu_th as f64 / (p.block_size as f64 - 1.0)
        };
        let entropy = bounds::binary_entropy(phase_bound.min(0.5))?;
        (e_unt, delta_tag + (1.0 - delta_tag) * entropy)
    };
    let rate_per_block = combine_rate(q, ec, pa);
    Ok(RatePoint {
        eta: p.eta,
        mu: p.mu,
        nu_th: p.nu_th,
        q,
        e_src,
        delta_tag,
        e_unt,
        ec_cost: ec,
        pa_cost: pa,
        rate_per_block,
        rate_per_pulse: rate_per_block.max(0.0) / p.block_size as f64,
        degenerate: false,
    })
}

/// Evaluate the model at one operating point using the model's own detection
/// probability and the configured bit-error rate.
pub fn key_rate(p: &ProtocolParams, monitored: bool) -> Result<RatePoint> {
    p.validate()?;
    let q = detection_rate(p.block_size, p.mu, p.eta);
    assemble(p, q, p.bit_error, monitored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn params() -> ProtocolParams {
        ProtocolParams {
            block_size: 6,
            nu_th: 1,
            mu: 0.05,
            eta: 1.0,
            bit_error: 0.03,
            f_ec: 1.1,
        }
    }

    #[test]
    fn detection_rate_reference_values() {
        assert!((detection_rate(6, 1.0 / 3.0, 1.0) - (-1.0f64).exp()).abs() < TOL);
        let expect = 0.15 * (-0.15f64).exp();
        assert!((detection_rate(6, 0.1, 0.5) - expect).abs() < TOL);
        assert!((expect - 0.12910619646375867).abs() < TOL);
        assert_eq!(detection_rate(6, 0.0, 1.0), 0.0);
    }

    #[test]
    fn detection_rate_peaks_at_unit_scaled_intensity() {
        let peak = (-1.0f64).exp();
        for i in 1..200 {
            let mu = i as f64 * 0.005;
            assert!(detection_rate(4, mu, 1.0) <= peak + TOL);
        }
        assert!((detection_rate(4, 0.5, 1.0) - peak).abs() < TOL);
    }

    #[test]
    fn source_tail_reference_values() {
        assert!((source_tail(6, 0.1, 0) - 0.45118836390597356).abs() < TOL);
        assert!((source_tail(6, 0.1, 2) - 0.023115287752632917).abs() < TOL);
        assert_eq!(source_tail(6, 0.0, 3), 0.0);
    }

    #[test]
    fn source_tail_is_monotone() {
        // Increasing in intensity, decreasing in the threshold.
        let mut prev = 0.0;
        for i in 1..=40 {
            let tail = source_tail(6, i as f64 * 0.05, 2);
            assert!(tail >= prev);
            prev = tail;
        }
        let mut prev = 1.0;
        for nu_th in 0..12 {
            let tail = source_tail(6, 0.5, nu_th);
            assert!(tail <= prev);
            prev = tail;
        }
    }

    #[test]
    fn source_tail_is_continuous_across_evaluation_switch() {
        for nu_th in [0usize, 3, 10] {
            let below = source_tail(6, 29.999 / 6.0, nu_th);
            let above = source_tail(6, 30.001 / 6.0, nu_th);
            assert!(
                (below - above).abs() < 1e-4,
                "nu_th = {nu_th}: {below} vs {above}"
            );
        }
    }

    #[test]
    fn tag_fraction_reference_and_cap() {
        assert!((tag_fraction(0.02, 0.1).unwrap() - 0.1).abs() < TOL);
        assert_eq!(tag_fraction(0.9, 0.1).unwrap(), 1.0);
        assert!(matches!(tag_fraction(0.1, 0.0), Err(Error::Degenerate(_))));
        assert!(matches!(tag_fraction(1.5, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn untagged_error_reference_and_degenerate() {
        assert!((untagged_error(0.03, 0.1).unwrap() - 0.03333333333333333).abs() < TOL);
        assert!(matches!(
            untagged_error(0.03, 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn ec_cost_reference_value() {
        assert!((ec_cost(0.03, 1.1).unwrap() - 0.2138310436147338).abs() < 1e-9);
        assert!(matches!(ec_cost(0.03, 0.9), Err(Error::Domain(_))));
    }

    #[test]
    fn pa_cost_unmonitored_matches_entropy_of_ceiling() {
        // Negligible source tail: the cost reduces to h(nu_th / (L - 1)).
        let p = ProtocolParams {
            block_size: 6,
            nu_th: 2,
            mu: 1e-9,
            eta: 1.0,
            bit_error: 0.03,
            f_ec: 1.1,
        };
        let q = detection_rate(p.block_size, p.mu, p.eta);
        let pa = pa_cost(&p, q, false).unwrap();
        assert!((pa - 0.9709505944546686).abs() < 1e-6, "got {pa}");
    }

    #[test]
    fn pa_cost_monitoring_never_hurts() {
        let p = params();
        let q = detection_rate(p.block_size, p.mu, p.eta);
        let with = pa_cost(&p, q, true).unwrap();
        let without = pa_cost(&p, q, false).unwrap();
        assert!(with <= without + TOL, "{with} vs {without}");
    }

    #[test]
    fn rate_combination_reference_value() {
        assert!((combine_rate(0.3, 0.2, 0.3) - 0.15).abs() < TOL);
    }

    #[test]
    fn key_rate_fields_are_consistent() {
        for monitored in [true, false] {
            let point = key_rate(&params(), monitored).unwrap();
            assert!(!point.degenerate);
            let recombined = combine_rate(point.q, point.ec_cost, point.pa_cost);
            assert!((point.rate_per_block - recombined).abs() < TOL);
            assert!((point.rate_per_pulse - point.rate_per_block.max(0.0) / 6.0).abs() < TOL);
        }
    }

    #[test]
    fn key_rate_monitoring_never_hurts() {
        let with = key_rate(&params(), true).unwrap();
        let without = key_rate(&params(), false).unwrap();
        assert!(with.rate_per_pulse >= without.rate_per_pulse);
    }

    #[test]
    fn key_rate_underflowed_detection_is_degenerate() {
        let p = ProtocolParams {
            mu: 500.0,
            ..params()
        };
        let point = key_rate(&p, true).unwrap();
        assert!(point.degenerate);
        assert_eq!(point.rate_per_pulse, 0.0);
        assert_eq!(point.pa_cost, 1.0);
    }

    #[test]
    fn params_validation_rejects_bad_ranges() {
        let ok = params();
        assert!(ok.validate().is_ok());
        for bad in [
            ProtocolParams {
                block_size: 2,
                ..ok
            },
            ProtocolParams { nu_th: 0, ..ok },
            ProtocolParams { nu_th: 5, ..ok },
            ProtocolParams { mu: 0.0, ..ok },
            ProtocolParams { eta: 0.0, ..ok },
            ProtocolParams { eta: 1.5, ..ok },
            ProtocolParams {
                bit_error: 0.6,
                ..ok
            },
            ProtocolParams { f_ec: 0.5, ..ok },
        ] {
            assert!(bad.validate().is_err(), "{bad:?} should be rejected");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn monitored_rate_dominates_unmonitored(
            mu in 0.001f64..0.5,
            eta in 0.01f64..=1.0,
            e in 0.0f64..0.11,
            nu_th in 1usize..=4,
        ) {
            let p = ProtocolParams {
                block_size: 6,
                nu_th,
                mu,
                eta,
                bit_error: e,
                f_ec: 1.1,
            };
            let with = key_rate(&p, true).unwrap();
            let without = key_rate(&p, false).unwrap();
            prop_assert!(with.rate_per_pulse + 1e-12 >= without.rate_per_pulse);
        }
    }
}
