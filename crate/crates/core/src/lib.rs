//! Security analysis toolkit for round-robin differential phase shift
//! (RRDPS) quantum key distribution with signal-disturbance monitoring.
//!
//! The sender encodes random phase bits on blocks of `L` weak coherent
//! pulses; the receiver interferes pulse pairs at a random delay and reads
//! out their relative phase. Privacy amplification is driven by a bound on
//! the phase-error rate that improves as the observed bit-error rate drops,
//! instead of the fixed ceiling used when disturbance is ignored.
//!
//! The crate is organized as a set of independently testable layers:
//!
//! - [`bounds`]: closed-form expressions and the one-dimensional
//!   minimization producing the phase-error bound `F(nu, e)`.
//! - [`spectral`]: matrix-level constructions of the same quantities —
//!   structured operator families, their determinants and spectra, and a
//!   first-principles joint-space decomposition — used to cross-check the
//!   closed forms.
//! - [`matrix`]: the dense symmetric eigensolver and determinant those
//!   constructions rely on.
//! - [`rate`]: the asymptotic key-rate model for a weak coherent source with
//!   photon-number tagging.
//! - [`optimizer`]: intensity/threshold optimization of the rate model
//!   across channel transmissions.
//! - [`sim`]: a reproducible round-by-round Monte Carlo simulator of the
//!   protocol with configurable disturbance channels.
//! - [`verify`]: the cross-verification harness wiring the layers together
//!   into named pass/fail checks.
//!
//! ```
//! use rrdps::bounds::{self, BoundQuery, MinimizerConfig};
//!
//! let result = bounds::phase_error_bound(
//!     &BoundQuery { block_size: 6, nu: 1, bit_error: 0.03 },
//!     &MinimizerConfig::default(),
//! )?;
//! // Monitoring a 3% bit-error rate beats the unmonitored ceiling of 1/5.
//! assert!(result.f_value < 0.2);
//! # Ok::<(), rrdps::Error>(())
//! ```

pub mod bounds;
pub mod error;
pub mod matrix;
pub mod optimizer;
pub mod rate;
pub mod search;
pub mod sim;
pub mod spectral;
pub mod verify;

pub use bounds::{f_bound, phase_error_bound, BoundQuery, BoundResult, Branch, LambdaOpt};
pub use error::{Error, Result};
pub use optimizer::{optimize_at, sweep, SweepConfig};
pub use rate::{key_rate, ProtocolParams, RatePoint};
pub use sim::{estimate_rate_from_sim, run_rounds, ChannelModel, SimConfig, SimStats};
pub use verify::{all_pass, run_checks, CheckOutcome, VerifyLevel, VerifyOptions};
