//! Phase-error bounds for round-robin DPS key distillation.
//!
//! The sifted key of the protocol leaks privacy through phase errors. For a
//! block of `L` pulses whose emitted photon number is capped at `nu`, the
//! fraction of phase errors among untagged rounds is bounded by
//!
//! ```text
//! F(nu, e) = inf over lambda >= 0 of [ lambda * e + Omega(nu, lambda) ]
//! ```
//!
//! where `e` is the observed bit-error rate and `Omega` is the largest
//! eigenvalue of a block-decomposed disturbance operator. `Omega` splits into
//! two closed-form branches: a "minus" branch coming from blocks one photon
//! below the cap and a "plus" branch from blocks one photon above it. Without
//! disturbance monitoring the bound degrades to the constant `nu / (L - 1)`.
//!
//! Everything here is scalar arithmetic; the brute-force spectral cross-checks
//! of the same quantities live in [`crate::spectral`].

use crate::error::{Error, Result};
use crate::search::{golden_min, logspace};

/// Two optima closer than this are treated as a branch tie.
const BRANCH_TIE_TOL: f64 = 1e-12;

/// Prefer the exact `lambda = 0` endpoint when it is within this margin of the
/// refined minimum; this keeps the flat region `e >= e_star` bit-exact.
const ZERO_PREFERENCE_TOL: f64 = 1e-12;

/// Binary Shannon entropy `h(x) = -x log2 x - (1-x) log2 (1-x)`.
///
/// Defined for `x` in `[0, 1]` with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "binary_entropy expects x in [0, 1], got {x}"
        )));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

fn check_block(l: usize, nu: usize) -> Result<()> {
    if l < 3 {
        return Err(Error::domain(format!("block size must be >= 3, got {l}")));
    }
    if nu < 1 || nu > l - 2 {
        return Err(Error::domain(format!(
            "photon threshold must satisfy 1 <= nu <= L - 2, got nu = {nu} for L = {l}"
        )));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Minus-branch eigenvalue ceiling: the largest eigenvalue contributed by
/// blocks carrying one photon less than the cap.
///
/// Closed form:
/// `(nu-1)/(L-1) - (L*lambda + 2) / (4(L-1)) * (1 - sqrt(1 - 8(nu-1)lambda / (L*lambda+2)^2))`.
pub fn omega_minus(l: usize, nu: usize, lambda: f64) -> Result<f64> {
    check_block(l, nu)?;
    check_lambda(lambda)?;
    let lf = l as f64;
    let m = (nu - 1) as f64;
    let denom = lf * lambda + 2.0;
    let arg = 1.0 - 8.0 * m * lambda / (denom * denom);
    if arg < 0.0 {
        // Unreachable under the checked preconditions: (L*lambda+2)^2 - 8*m*lambda
        // >= (L*lambda-2)^2 whenever m <= L.
        return Err(Error::numeric(format!(
            "negative square-root argument {arg} in omega_minus"
        )));
    }
    Ok(m / (lf - 1.0) - denom / (4.0 * (lf - 1.0)) * (1.0 - arg.sqrt()))
}

/// Plus-branch eigenvalue ceiling: the largest eigenvalue contributed by
/// blocks carrying one photon more than the cap.
///
/// Closed form: `nu/(L-1) - lambda (L-1-nu) / (2(L-1))`.
pub fn omega_plus(l: usize, nu: usize, lambda: f64) -> Result<f64> {
    check_block(l, nu)?;
    check_lambda(lambda)?;
    let lf = l as f64;
    let nuf = nu as f64;
    Ok(nuf / (lf - 1.0) - lambda * (lf - 1.0 - nuf) / (2.0 * (lf - 1.0)))
}

/// Combined ceiling `Omega(nu, lambda) = max(omega_minus, omega_plus)`.
pub fn omega(l: usize, nu: usize, lambda: f64) -> Result<f64> {
    Ok(omega_minus(l, nu, lambda)?.max(omega_plus(l, nu, lambda)?))
}

/// Bit-error rate at which the bound saturates: `(L - 1 - nu) / (2(L - 1))`.
///
/// For `e >= e_star` the minimizer sits at `lambda = 0` and the bound equals
/// its ceiling `nu / (L - 1)`.
pub fn e_star(l: usize, nu: usize) -> Result<f64> {
    check_block(l, nu)?;
    let lf = l as f64;
    Ok((lf - 1.0 - nu as f64) / (2.0 * (lf - 1.0)))
}

/// A phase-error bound query: block size `L`, photon cap `nu`, observed
/// bit-error rate `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub block_size: usize,
    pub nu: usize,
    pub bit_error: f64,
}

/// Which eigenvalue branch is active at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minus,
    Plus,
    Tie,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Minus => write!(f, "minus"),
            Branch::Plus => write!(f, "plus"),
            Branch::Tie => write!(f, "tie"),
        }
    }
}

/// Minimizing multiplier: either an explicit finite value or the marker that
/// the infimum is approached only as `lambda` grows without bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaOpt {
    Finite(f64),
    Limit,
}

impl std::fmt::Display for LambdaOpt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambdaOpt::Finite(v) => write!(f, "{v}"),
            LambdaOpt::Limit => write!(f, "limit"),
        }
    }
}

/// Result of minimizing the bound objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    /// The bound `F(nu, e)`, clamped to `[0, nu / (L - 1)]`.
    pub f_value: f64,
    /// Minimizing `lambda`, or the unbounded-growth marker.
    pub lambda_opt: LambdaOpt,
    /// Active eigenvalue branch at the optimum.
    pub branch: Branch,
}

/// Search controls for the one-dimensional minimization over `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid_points: usize,
    pub rel_tol: f64,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            lambda_min: 1e-6,
            lambda_max: 1e6,
            grid_points: 200,
            rel_tol: 1e-10,
        }
    }
}

impl MinimizerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda_min.is_finite() && self.lambda_max.is_finite())
            || self.lambda_min <= 0.0
            || self.lambda_max <= self.lambda_min
        {
            return Err(Error::domain(format!(
                "minimizer grid must satisfy 0 < lambda_min < lambda_max, got [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        if self.grid_points < 2 {
            return Err(Error::domain("minimizer grid needs at least 2 points"));
        }
        if !self.rel_tol.is_finite() || self.rel_tol <= 0.0 {
            return Err(Error::domain("minimizer rel_tol must be positive"));
        }
        Ok(())
    }
}

/// Minimize `lambda * e + Omega(nu, lambda)` over `lambda >= 0`.
///
/// The objective is scanned on `{0}` plus a geometric grid, then refined by
/// golden-section search inside the best bracketing triple. When the scan is
/// still descending at the top of the grid the infimum is not attained at any
/// finite `lambda`; the analytic limit `(nu - 1) / L` is returned together
/// with [`LambdaOpt::Limit`].
pub fn phase_error_bound(query: &BoundQuery, cfg: &MinimizerConfig) -> Result<BoundResult> {
    let BoundQuery {
        block_size: l,
        nu,
        bit_error: e,
    } = *query;
    check_block(l, nu)?;
    if !e.is_finite() || e < 0.0 {
        return Err(Error::domain(format!(
            "bit-error rate must be finite and >= 0, got {e}"
        )));
    }
    cfg.validate()?;

    let ceiling = nu as f64 / (l as f64 - 1.0);
    let objective = |lambda: f64| -> f64 {
        // Preconditions hold for every probed lambda, so the closed forms
        // cannot fail here.
        let lo = omega_minus(l, nu, lambda).expect("validated lambda");
        let hi = omega_plus(l, nu, lambda).expect("validated lambda");
        lambda * e + lo.max(hi)
    };

    let mut candidates = Vec::with_capacity(cfg.grid_points + 1);
    candidates.push(0.0);
    candidates.extend(logspace(cfg.lambda_min, cfg.lambda_max, cfg.grid_points));
    let values: Vec<f64> = candidates.iter().map(|&x| objective(x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(
            "bound objective produced a non-finite value on the scan grid",
        ));
    }

    let mut best_idx = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best_idx] {
            best_idx = i;
        }
    }

    let last = candidates.len() - 1;
    if best_idx == last && values[last] < values[last - 1] {
        // Still descending at the top of the grid: the infimum is the
        // large-multiplier limit of the minus branch.
        let f_value = ((nu - 1) as f64 / l as f64).clamp(0.0, ceiling);
        return Ok(BoundResult {
            f_value,
            lambda_opt: LambdaOpt::Limit,
            branch: Branch::Minus,
        });
    }

    let lo = if best_idx == 0 {
        0.0
    } else {
        candidates[best_idx - 1]
    };
    let hi = candidates[(best_idx + 1).min(last)];
    let tol = cfg.rel_tol * hi.max(1e-12);
    let (mut best_lambda, mut best_value) = golden_min(objective, lo, hi, tol, 200);
    if values[best_idx] < best_value {
        best_lambda = candidates[best_idx];
        best_value = values[best_idx];
    }
    // Keep the saturated region exact: lambda = 0 wins all near-ties.
    if values[0] <= best_value + ZERO_PREFERENCE_TOL {
        best_lambda = 0.0;
        best_value = values[0];
    }

    let minus = omega_minus(l, nu, best_lambda)?;
    let plus = omega_plus(l, nu, best_lambda)?;
    let branch = if (minus - plus).abs() <= BRANCH_TIE_TOL {
        Branch::Tie
    } else if minus > plus {
        Branch::Minus
    } else {
        Branch::Plus
    };

    Ok(BoundResult {
        f_value: best_value.clamp(0.0, ceiling),
        lambda_opt: LambdaOpt::Finite(best_lambda),
        branch,
    })
}

/// Convenience wrapper: the bound value under the default minimizer settings.
pub fn f_bound(l: usize, nu: usize, e: f64) -> Result<f64> {
    let query = BoundQuery {
        block_size: l,
        nu,
        bit_error: e,
    };
    Ok(phase_error_bound(&query, &MinimizerConfig::default())?.f_value)
}

/// Two-segment approximation of the bound: linear from `(nu-1)/L` at `e = 0`
/// to the ceiling `nu/(L-1)` at `e = e_star`, constant afterwards.
pub fn segment_approx(l: usize, nu: usize, e: f64) -> Result<f64> {
    check_block(l, nu)?;
    if !e.is_finite() || e < 0.0 {
        return Err(Error::domain(format!(
            "bit-error rate must be finite and >= 0, got {e}"
        )));
    }
    let ceiling = nu as f64 / (l as f64 - 1.0);
    let saturation = e_star(l, nu)?;
    if e >= saturation {
        return Ok(ceiling);
    }
    let floor = (nu - 1) as f64 / l as f64;
    let t = e / saturation;
    Ok(floor * (1.0 - t) + ceiling * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn entropy_known_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < TOL);
        assert!((binary_entropy(0.2).unwrap() - 0.7219280948873623).abs() < TOL);
    }

    #[test]
    fn entropy_rejects_out_of_domain() {
        assert!(matches!(binary_entropy(-0.1), Err(Error::Domain(_))));
        assert!(matches!(binary_entropy(1.1), Err(Error::Domain(_))));
        assert!(matches!(binary_entropy(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn omega_minus_reference_point() {
        // sqrt(3)/5, from the closed form at L = 6, nu = 3, lambda = 1.
        let v = omega_minus(6, 3, 1.0).unwrap();
        assert!((v - 0.34641016151377546).abs() < TOL, "got {v}");
    }

    #[test]
    fn omega_minus_vanishes_for_single_photon_cap() {
        for lambda in [0.0, 0.3, 1.0, 7.5, 1e4] {
            assert!(omega_minus(6, 1, lambda).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn omega_plus_reference_point() {
        let v = omega_plus(6, 3, 1.0).unwrap();
        assert!((v - 0.4).abs() < TOL, "got {v}");
    }

    #[test]
    fn omega_is_branch_maximum_and_clamps_at_zero_cap() {
        // At L = 6, nu = 1, lambda = 2 the plus branch is negative and the
        // minus branch is identically zero.
        let v = omega(6, 1, 2.0).unwrap();
        assert!(v.abs() < 1e-15, "got {v}");
    }

    #[test]
    fn omega_rejects_bad_arguments() {
        assert!(matches!(omega_minus(2, 1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(omega_minus(6, 0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(omega_minus(6, 5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(omega_minus(6, 3, -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            omega_plus(6, 3, f64::INFINITY),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn saturation_points() {
        assert!((e_star(6, 3).unwrap() - 0.2).abs() < TOL);
        assert!((e_star(6, 4).unwrap() - 0.1).abs() < TOL);
        assert!((e_star(64, 1).unwrap() - 62.0 / 126.0).abs() < TOL);
        assert!(matches!(e_star(6, 5), Err(Error::Domain(_))));
    }

    fn bound(l: usize, nu: usize, e: f64) -> BoundResult {
        phase_error_bound(
            &BoundQuery {
                block_size: l,
                nu,
                bit_error: e,
            },
            &MinimizerConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn bound_saturates_above_e_star() {
        for e in [0.2, 0.25, 0.3, 0.5] {
            let r = bound(6, 3, e);
            assert!((r.f_value - 0.6).abs() < 1e-9, "e = {e}: {r:?}");
            assert_eq!(r.lambda_opt, LambdaOpt::Finite(0.0), "e = {e}");
            assert_eq!(r.branch, Branch::Plus, "e = {e}");
        }
    }

    #[test]
    fn bound_vanishes_for_single_photon_noiseless_block() {
        let r = bound(6, 1, 0.0);
        assert!(r.f_value.abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn bound_noiseless_case_hits_large_multiplier_limit() {
        let r = bound(6, 3, 0.0);
        assert_eq!(r.lambda_opt, LambdaOpt::Limit);
        assert_eq!(r.branch, Branch::Minus);
        assert_eq!(r.f_value, 2.0 / 6.0);
    }

    #[test]
    fn bound_is_monotone_in_bit_error() {
        let mut prev = -1.0;
        for i in 0..=50 {
            let e = 0.5 * i as f64 / 50.0;
            let f = bound(6, 3, e).f_value;
            assert!(
                f >= prev - 1e-12,
                "bound decreased at e = {e}: {f} < {prev}"
            );
            prev = f;
        }
    }

    #[test]
    fn bound_interior_point_beats_endpoints_strictly() {
        // Midway up the ramp the true bound exceeds the linear interpolation
        // slightly; it must sit strictly between floor and ceiling.
        let f = bound(6, 3, 0.1).f_value;
        assert!(f > 1.0 / 3.0 && f < 0.6, "got {f}");
        let seg = segment_approx(6, 3, 0.1).unwrap();
        assert!((f - seg).abs() <= 0.02, "f = {f}, segment = {seg}");
    }

    #[test]
    fn segment_reference_values() {
        assert!((segment_approx(6, 3, 0.1).unwrap() - (1.0 / 3.0 + 0.6) / 2.0).abs() < TOL);
        assert_eq!(segment_approx(6, 3, 0.0).unwrap(), 2.0 / 6.0);
        assert_eq!(segment_approx(6, 3, 0.35).unwrap(), 0.6);
    }

    #[test]
    fn segment_tracks_bound_for_small_blocks() {
        for nu in 1..=3 {
            for i in 0..=25 {
                let e = 0.5 * i as f64 / 25.0;
                let f = bound(6, nu, e).f_value;
                let s = segment_approx(6, nu, e).unwrap();
                assert!(
                    (f - s).abs() <= 0.02,
                    "L = 6, nu = {nu}, e = {e}: f = {f}, segment = {s}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn entropy_is_symmetric_and_bounded(x in 0.0f64..=1.0) {
            let h = binary_entropy(x).unwrap();
            let hs = binary_entropy(1.0 - x).unwrap();
            prop_assert!((h - hs).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&h));
        }

        #[test]
        fn omega_dominates_both_branches(
            l in 3usize..=16,
            nu_frac in 0.0f64..1.0,
            lambda in 0.0f64..100.0,
        ) {
            let nu = 1 + ((l - 2) as f64 * nu_frac) as usize;
            let nu = nu.min(l - 2);
            let m = omega_minus(l, nu, lambda).unwrap();
            let p = omega_plus(l, nu, lambda).unwrap();
            let o = omega(l, nu, lambda).unwrap();
            prop_assert!(o >= m && o >= p);
            prop_assert!((o - m.max(p)).abs() < 1e-15);
        }

        #[test]
        fn bound_stays_inside_its_range(
            l in 3usize..=12,
            nu_frac in 0.0f64..1.0,
            e in 0.0f64..=0.5,
        ) {
            let nu = (1 + ((l - 2) as f64 * nu_frac) as usize).min(l - 2);
            let f = f_bound(l, nu, e).unwrap();
            let ceiling = nu as f64 / (l as f64 - 1.0);
            prop_assert!(f >= 0.0 && f <= ceiling + 1e-15);
        }
    }
}
