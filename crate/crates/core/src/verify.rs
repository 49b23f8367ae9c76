//! Cross-verification harness tying the closed-form bound expressions to
//! their matrix-level counterparts.
//!
//! Each check recomputes a quantity along two independent routes (closed
//! form vs. brute force, scalar formula vs. eigensolver, structured operator
//! vs. first-principles construction) and reports the worst deviation seen.
//! The harness is deterministic: randomized draws use a fixed seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::bounds;
use crate::error::{Error, Result};
use crate::matrix;
use crate::search;
use crate::spectral;

const DET_SEED: u64 = 0x00de_7e57_5eed;
const DET_ABS_TOL: f64 = 1e-12;
const DET_REL_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-9;

pub const CHECK_DETERMINANT: &str = "determinant_identity";
pub const CHECK_EIGENVALUE: &str = "eigenvalue_closure";
pub const CHECK_JOINT: &str = "joint_decomposition";
pub const CHECK_POVM: &str = "povm_closure";
pub const CHECK_BOUND: &str = "bound_sanity";

/// Verification depth: `Fast` keeps every check but trims the expensive
/// search spaces; `Full` runs the complete set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Fast,
    Full,
}

/// Options of a verification run. `omega_minus_offset` shifts the closed-form
/// eigenvalue target and exists solely as a fault-injection hook: any nonzero
/// value must make the eigenvalue-closure check fail.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VerifyOptions {
    pub level: VerifyLevel,
    pub omega_minus_offset: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            level: VerifyLevel::Fast,
            omega_minus_offset: 0.0,
        }
    }
}

/// Result of one named check.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CheckOutcome {
    pub check_name: String,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Run every check at the configured level, in a fixed order.
pub fn run_checks(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    if !opts.omega_minus_offset.is_finite() {
        return Err(Error::domain(format!(
            "eigenvalue-target offset must be finite, got {}",
            opts.omega_minus_offset
        )));
    }
    Ok(vec![
        determinant_identity(opts)?,
        eigenvalue_closure(opts)?,
        joint_decomposition(opts)?,
        povm_closure()?,
        bound_sanity()?,
    ])
}

pub fn all_pass(checks: &[CheckOutcome]) -> bool {
    checks.iter().all(|check| check.pass)
}

/// Closed-form determinant of the structured matrix family vs. LU-style
/// brute force on randomized dimensions and coefficients.
fn determinant_identity(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let draws = match opts.level {
        VerifyLevel::Fast => 200,
        VerifyLevel::Full => 1000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(DET_SEED);
    let mut max_deviation = 0.0f64;
    let mut pass = true;
    for _ in 0..draws {
        let d = rng.random_range(1..=8usize);
        let m = rng.random_range(0..=d);
        let alpha = rng.random_range(-2.0..2.0);
        let beta = rng.random_range(-2.0..2.0);
        let gamma = rng.random_range(-2.0..2.0);
        let closed = spectral::det_closed_form(alpha, beta, gamma, d, m)?;
        let brute =
            matrix::det_bruteforce(&spectral::rank_structured_matrix(alpha, beta, gamma, d, m)?)?;
        let abs = (closed - brute).abs();
        let rel = abs / brute.abs().max(f64::MIN_POSITIVE);
        max_deviation = max_deviation.max(abs.min(rel));
        if abs > DET_ABS_TOL && rel > DET_REL_TOL {
            pass = false;
        }
    }
    Ok(CheckOutcome {
        check_name: CHECK_DETERMINANT.to_string(),
        max_deviation,
        pass,
    })
}

/// Largest eigenvalue of each weight-sector operator vs. its closed form,
/// across block sizes, photon numbers, and disturbance weights.
fn eigenvalue_closure(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut max_deviation = 0.0f64;
    for l in 3..=12usize {
        for nu in 1..=(l - 2) {
            for lambda in [0.0, 0.1, 1.0, 10.0] {
                let minus = spectral::build_lambda_minus(l, nu - 1, lambda)?;
                let eig_minus = matrix::max_eigenvalue(&minus)?;
                let closed_minus = bounds::omega_minus(l, nu, lambda)? + opts.omega_minus_offset;
                max_deviation = max_deviation.max((eig_minus - closed_minus).abs());

                let plus = spectral::build_lambda_plus(l, nu + 1, lambda)?;
                let eig_plus = matrix::max_eigenvalue(&plus)?;
                let closed_plus = bounds::omega_plus(l, nu, lambda)?;
                max_deviation = max_deviation.max((eig_plus - closed_plus).abs());
            }
        }
    }
    Ok(CheckOutcome {
        check_name: CHECK_EIGENVALUE.to_string(),
        max_deviation,
        pass: max_deviation <= EIGEN_TOL,
    })
}

/// First-principles joint-space construction: sector decomposition,
/// flip-conjugation identities, and the eigenvalue bridge to the closed
/// forms.
fn joint_decomposition(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let sizes: &[usize] = match opts.level {
        VerifyLevel::Fast => &[3],
        VerifyLevel::Full => &[3, 4, 5],
    };
    let lambda_grid = [0.0, 0.5, 2.0];
    let mut max_deviation = 0.0f64;
    let mut pass = true;
    for &l in sizes {
        for nu in 1..=(l - 2) {
            let report = spectral::verify_joint_decomposition(l, nu, &lambda_grid)?;
            max_deviation = max_deviation
                .max(report.eigen_dev)
                .max(report.flip_cap_dev)
                .max(report.flip_bit_dev)
                .max(report.flip_phase_dev);
            pass &= report.pass;
        }
    }
    Ok(CheckOutcome {
        check_name: CHECK_JOINT.to_string(),
        max_deviation,
        pass,
    })
}

/// Interferometer outcome operators: completeness and per-pair marginals.
fn povm_closure() -> Result<CheckOutcome> {
    let mut max_deviation = 0.0f64;
    let mut pass = true;
    for l in 3..=8usize {
        let report = spectral::povm_identity_check(l)?;
        max_deviation = max_deviation.max(report.sum_dev).max(report.pair_dev);
        pass &= report.pass;
    }
    Ok(CheckOutcome {
        check_name: CHECK_POVM.to_string(),
        max_deviation,
        pass,
    })
}

/// Shape constraints on the optimized bound itself: range, monotonicity in
/// the error rate, and saturation at the ceiling beyond the crossover error.
fn bound_sanity() -> Result<CheckOutcome> {
    let cases = [(3usize, 1usize), (6, 1), (6, 3), (6, 4), (16, 5), (64, 32)];
    let mut max_deviation = 0.0f64;
    for (l, nu) in cases {
        let cap = nu as f64 / (l as f64 - 1.0);
        let mut previous = f64::NEG_INFINITY;
        for e in search::linspace(0.0, 0.45, 19) {
            let f = bounds::f_bound(l, nu, e)?;
            max_deviation = max_deviation.max(-f).max(f - cap).max(previous - f);
            previous = f;
        }
        let e_sat = (1.05 * bounds::e_star(l, nu)?).min(0.5);
        let f_sat = bounds::f_bound(l, nu, e_sat)?;
        max_deviation = max_deviation.max((f_sat - cap).abs());
    }
    Ok(CheckOutcome {
        check_name: CHECK_BOUND.to_string(),
        max_deviation,
        pass: max_deviation <= BOUND_TOL,
    })
}
