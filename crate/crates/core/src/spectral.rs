//! Brute-force spectral verification of the phase-error bound.
//!
//! The closed forms in [`crate::bounds`] are the largest eigenvalues of small
//! structured matrices. This module rebuilds those matrices explicitly and
//! diagonalizes them numerically, providing an independent route to the same
//! numbers:
//!
//! * [`det_closed_form`] against [`crate::matrix::det_bruteforce`] validates
//!   the determinant identity behind the eigenvalue formulas;
//! * [`build_lambda_minus`] / [`build_lambda_plus`] realize the per-block
//!   disturbance matrices whose spectra are `omega_minus` / `omega_plus`;
//! * [`build_joint_operators`] constructs the full bit-error, phase-error and
//!   photon-cap operators on the (qubit register) x (photon position) space
//!   for small blocks, where the complete block decomposition can be checked
//!   entry by entry and eigenvalue by eigenvalue.

use crate::bounds;
use crate::error::{Error, Result};
use crate::matrix::{jacobi_max_eigenvalue, SymMatrix};

/// Entrywise tolerance for operator identities.
pub const ENTRY_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue comparisons between the dense solver and the
/// closed forms.
pub const EIGEN_TOL: f64 = 1e-9;

fn check_coeffs(cs: &[f64]) -> Result<()> {
    if cs.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("matrix coefficients must be finite"));
    }
    Ok(())
}

/// The all-ones matrix of dimension `d`.
pub fn build_m1(d: usize) -> Result<SymMatrix> {
    SymMatrix::from_fn(d, |_, _| 1.0)
}

/// Diagonal 0/1 matrix of dimension `d` whose first `m` diagonal entries are 1.
pub fn build_m2(d: usize, m: usize) -> Result<SymMatrix> {
    if m > d {
        return Err(Error::domain(format!(
            "partial diagonal needs m <= d, got m = {m}, d = {d}"
        )));
    }
    SymMatrix::from_fn(d, |i, j| if i == j && i < m { 1.0 } else { 0.0 })
}

/// Assemble `alpha * M1 + beta * M2 + gamma * I` of dimension `d` with `m`
/// active diagonal entries.
pub fn rank_structured_matrix(
    alpha: f64,
    beta: f64,
    gamma: f64,
    d: usize,
    m: usize,
) -> Result<SymMatrix> {
    check_coeffs(&[alpha, beta, gamma])?;
    if m > d {
        return Err(Error::domain(format!(
            "partial diagonal needs m <= d, got m = {m}, d = {d}"
        )));
    }
    SymMatrix::from_fn(d, |i, j| {
        let mut v = alpha;
        if i == j {
            if i < m {
                v += beta;
            }
            v += gamma;
        }
        v
    })
}

/// Closed-form determinant of `alpha * M1 + beta * M2 + gamma * I`:
///
/// ```text
/// gamma^(d-m-1) * (gamma+beta)^(m-1) * (gamma^2 + (beta + d*alpha)*gamma + (d-m)*alpha*beta)
/// ```
///
/// The edge counts `m = 0` and `m = d` are evaluated in their cancelled forms
/// (`gamma^(d-1) * (gamma + d*alpha)` and `(gamma+beta)^(d-1) * (gamma+beta+d*alpha)`)
/// so no negative powers arise; zero bases with zero exponents follow the
/// `0^0 = 1` convention of `powi`.
pub fn det_closed_form(alpha: f64, beta: f64, gamma: f64, d: usize, m: usize) -> Result<f64> {
    check_coeffs(&[alpha, beta, gamma])?;
    if d == 0 {
        return Err(Error::domain("determinant needs dimension d >= 1"));
    }
    if m > d {
        return Err(Error::domain(format!(
            "partial diagonal needs m <= d, got m = {m}, d = {d}"
        )));
    }
    let df = d as f64;
    if m == 0 {
        return Ok(gamma.powi(d as i32 - 1) * (gamma + df * alpha));
    }
    if m == d {
        let shifted = gamma + beta;
        return Ok(shifted.powi(d as i32 - 1) * (shifted + df * alpha));
    }
    let quad = gamma * gamma + (beta + df * alpha) * gamma + (d - m) as f64 * alpha * beta;
    Ok(gamma.powi((d - m - 1) as i32) * (gamma + beta).powi(m as i32 - 1) * quad)
}

fn check_lambda_inputs(l: usize, lambda: f64) -> Result<()> {
    if l < 3 {
        return Err(Error::domain(format!("block size must be >= 3, got {l}")));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Disturbance matrix of a block whose register weight `a_weight` sits below
/// the photon cap. Acts on the full `L`-dimensional position space:
///
/// `lambda/(2(L-1)) * M1  -  1/(L-1) * M2^(L, a_weight)  +  (2*a_weight - L*lambda)/(2(L-1)) * I`.
pub fn build_lambda_minus(l: usize, a_weight: usize, lambda: f64) -> Result<SymMatrix> {
    check_lambda_inputs(l, lambda)?;
    if a_weight > l {
        return Err(Error::domain(format!(
            "register weight {a_weight} exceeds block size {l}"
        )));
    }
    let lf = l as f64;
    let scale = 2.0 * (lf - 1.0);
    rank_structured_matrix(
        lambda / scale,
        -2.0 / scale,
        (2.0 * a_weight as f64 - lf * lambda) / scale,
        l,
        a_weight,
    )
}

/// Disturbance matrix of a block whose register weight `a_weight` sits above
/// the photon cap. Acts on the `a_weight`-dimensional subspace of occupied
/// positions:
///
/// `lambda/(2(L-1)) * M1  +  (2(a_weight - 1) - lambda*L)/(2(L-1)) * I`.
pub fn build_lambda_plus(l: usize, a_weight: usize, lambda: f64) -> Result<SymMatrix> {
    check_lambda_inputs(l, lambda)?;
    if a_weight < 1 || a_weight > l {
        return Err(Error::domain(format!(
            "register weight must satisfy 1 <= a_weight <= L, got {a_weight} for L = {l}"
        )));
    }
    let lf = l as f64;
    let scale = 2.0 * (lf - 1.0);
    rank_structured_matrix(
        lambda / scale,
        0.0,
        (2.0 * (a_weight as f64 - 1.0) - lambda * lf) / scale,
        a_weight,
        0,
    )
}

/// Smallest and largest block size for which the joint-space operators are
/// materialized (dimension `2^L * L`).
pub const JOINT_MIN_BLOCK: usize = 3;
pub const JOINT_MAX_BLOCK: usize = 5;

/// The measurement and error operators on the joint space
/// (L-qubit register) x (single-photon position), in the computational x
/// position product basis.
#[derive(Debug, Clone)]
pub struct JointOperatorSet {
    pub block_size: usize,
    /// Joint dimension `2^L * L`.
    pub dim: usize,
    /// Bit-error operator: measurement outcomes that disagree with the
    /// register parity of the announced pair.
    pub e_bit: SymMatrix,
    /// Phase-error operator for the announced pair.
    pub e_phase: SymMatrix,
    /// Photon-cap projectors `p_nu[nu]` for `nu = 0..=L`: the register
    /// subspace reachable when `nu` photons leave the source.
    pub p_nu: Vec<SymMatrix>,
    /// Position-controlled phase flip: diagonal, entry `(-1)^(w_k)` for
    /// register string `w` and photon position `k`. Symmetric, orthogonal,
    /// and an involution.
    pub u_flip: SymMatrix,
}

#[inline]
fn joint_index(l: usize, w: usize, k: usize) -> usize {
    w * l + k
}

#[inline]
fn bit(w: usize, k: usize) -> usize {
    (w >> k) & 1
}

/// Entry `(w1, w2)` of the register projector onto the Hadamard-transformed
/// basis state labelled `a`: `2^-L * (-1)^popcount(a & (w1 ^ w2))`.
#[inline]
fn x_projector_entry(l: usize, a: usize, w1: usize, w2: usize) -> f64 {
    let sign = ((a & (w1 ^ w2)).count_ones() & 1) as i32;
    (1.0 - 2.0 * sign as f64) / (1usize << l) as f64
}

/// Build all joint-space operators for a block of size `l` (3 to 5).
pub fn build_joint_operators(l: usize) -> Result<JointOperatorSet> {
    if l < JOINT_MIN_BLOCK {
        return Err(Error::domain(format!(
            "joint operators need block size >= {JOINT_MIN_BLOCK}, got {l}"
        )));
    }
    if l > JOINT_MAX_BLOCK {
        return Err(Error::resource(format!(
            "joint operators are materialized only up to block size {JOINT_MAX_BLOCK}, got {l}"
        )));
    }
    let strings = 1usize << l;
    let dim = strings * l;
    let lf = l as f64;
    let half_inv = 1.0 / (2.0 * (lf - 1.0));

    // Bit-error operator: block-diagonal over register strings. For each
    // announced pair {k, kk} exactly one interferometer output contradicts
    // the register parity; that output contributes a rank-one position
    // projector (|k> + sign |kk>)(<k| + sign <kk|) / (2(L-1)).
    let mut e_bit = SymMatrix::zeros(dim)?;
    for w in 0..strings {
        for k in 0..l {
            for kk in (k + 1)..l {
                let wrong_outcome = bit(w, k) ^ bit(w, kk) ^ 1;
                let sign = if wrong_outcome == 0 { 1.0 } else { -1.0 };
                e_bit.add_at(joint_index(l, w, k), joint_index(l, w, k), half_inv);
                e_bit.add_at(joint_index(l, w, kk), joint_index(l, w, kk), half_inv);
                e_bit.add_at(joint_index(l, w, k), joint_index(l, w, kk), sign * half_inv);
            }
        }
    }

    // Phase-error operator: for the ordered pair (source position k, target
    // position kk) project the target qubit onto |-> while the photon sits at
    // k. The |-><-| projector couples the two settings of bit kk with signs
    // (-1)^(w_kk + w'_kk).
    let mut e_phase = SymMatrix::zeros(dim)?;
    for k in 0..l {
        for kk in 0..l {
            if kk == k {
                continue;
            }
            let mask = 1usize << kk;
            for v in 0..strings {
                if v & mask != 0 {
                    continue; // enumerate strings with bit kk cleared
                }
                let v1 = v | mask;
                e_phase.add_at(joint_index(l, v, k), joint_index(l, v, k), half_inv);
                e_phase.add_at(joint_index(l, v1, k), joint_index(l, v1, k), half_inv);
                e_phase.add_at(joint_index(l, v, k), joint_index(l, v1, k), -half_inv);
            }
        }
    }

    // Photon-cap projectors: register weights nu, nu-2, nu-4, ... tensored
    // with the identity on the position space.
    let mut p_nu = Vec::with_capacity(l + 1);
    for nu in 0..=l {
        let mut reg = vec![0.0; strings * strings];
        for a in 0..strings {
            let w = a.count_ones() as usize;
            if w <= nu && (nu - w).is_multiple_of(2) {
                for w1 in 0..strings {
                    for w2 in w1..strings {
                        reg[w1 * strings + w2] += x_projector_entry(l, a, w1, w2);
                    }
                }
            }
        }
        let mut p = SymMatrix::zeros(dim)?;
        for w1 in 0..strings {
            for w2 in w1..strings {
                let v = reg[w1 * strings + w2];
                if v == 0.0 {
                    continue;
                }
                for k in 0..l {
                    p.set(joint_index(l, w1, k), joint_index(l, w2, k), v);
                }
            }
        }
        p_nu.push(p);
    }

    let mut u_flip = SymMatrix::zeros(dim)?;
    for w in 0..strings {
        for k in 0..l {
            let sign = 1.0 - 2.0 * bit(w, k) as f64;
            u_flip.set(joint_index(l, w, k), joint_index(l, w, k), sign);
        }
    }

    Ok(JointOperatorSet {
        block_size: l,
        dim,
        e_bit,
        e_phase,
        p_nu,
        u_flip,
    })
}

impl JointOperatorSet {
    /// Largest deviation of `p_nu[nu]` from idempotency, maximized over `nu`.
    pub fn projector_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let id = SymMatrix::identity(self.dim)?;
        for p in &self.p_nu {
            let squared = id.sandwich(p)?; // p * I * p = p^2
            worst = worst.max(squared.max_abs_diff(p)?);
        }
        Ok(worst)
    }

    /// Largest deviation of `p_nu[L-1] + p_nu[L]` from the identity. The two
    /// top projectors split the register weights by parity, so together they
    /// must cover everything.
    pub fn parity_completeness_defect(&self) -> Result<f64> {
        let mut sum = self.p_nu[self.block_size - 1].clone();
        sum.add_scaled(&self.p_nu[self.block_size], 1.0)?;
        sum.max_abs_diff(&SymMatrix::identity(self.dim)?)
    }

    /// Largest deviation of the position-controlled flip from being an
    /// involution (`u^2 = I`).
    pub fn flip_involution_defect(&self) -> Result<f64> {
        let id = SymMatrix::identity(self.dim)?;
        let squared = id.sandwich(&self.u_flip)?; // u * I * u = u^2
        squared.max_abs_diff(&id)
    }
}

/// Largest eigenvalue of the cap-projected disturbance operator
/// `P (e_phase - lambda * e_bit) P` for cap `nu`.
pub fn decomposition_eigenvalue(ops: &JointOperatorSet, nu: usize, lambda: f64) -> Result<f64> {
    if nu > ops.block_size {
        return Err(Error::domain(format!(
            "cap {nu} exceeds block size {}",
            ops.block_size
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let mut s = ops.e_phase.clone();
    s.add_scaled(&ops.e_bit, -lambda)?;
    let projected = s.sandwich(&ops.p_nu[nu])?;
    jacobi_max_eigenvalue(&projected)
}

/// Outcome of the joint-space cross-check for one `(L, nu)` pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecompositionReport {
    pub block_size: usize,
    pub nu: usize,
    /// Max over the probed lambda grid of |dense eigenvalue - closed form|.
    pub eigen_dev: f64,
    /// Entrywise deviation of the flip-conjugated cap projector from its
    /// weight-split form.
    pub flip_cap_dev: f64,
    /// Entrywise deviation of the flip-conjugated bit-error operator from its
    /// pure-position form.
    pub flip_bit_dev: f64,
    /// Entrywise deviation of the phase-error operator from flip invariance
    /// and from its weight-resolved closed form.
    pub flip_phase_dev: f64,
    pub eigen_tol: f64,
    pub entry_tol: f64,
    pub pass: bool,
}

/// Flip-conjugated cap projector, built independently: register weights
/// `nu-1, nu-3, ...` tensor identity, plus weight `nu+1` restricted to
/// occupied photon positions.
fn flip_cap_reference(l: usize, nu: usize) -> Result<SymMatrix> {
    let strings = 1usize << l;
    let dim = strings * l;
    let mut m = SymMatrix::zeros(dim)?;
    for a in 0..strings {
        let w = a.count_ones() as usize;
        let below = nu >= 1 && w < nu && (nu - 1 - w).is_multiple_of(2);
        let above = w == nu + 1;
        if !below && !above {
            continue;
        }
        for w1 in 0..strings {
            for w2 in w1..strings {
                let v = x_projector_entry(l, a, w1, w2);
                for k in 0..l {
                    if below || bit(a, k) == 1 {
                        m.add_at(joint_index(l, w1, k), joint_index(l, w2, k), v);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Flip-conjugated bit-error operator, built independently: the register
/// drops out entirely, leaving antisymmetric pair projectors on the position
/// space.
fn flip_bit_reference(l: usize) -> Result<SymMatrix> {
    let strings = 1usize << l;
    let dim = strings * l;
    let lf = l as f64;
    let half_inv = 1.0 / (2.0 * (lf - 1.0));
    let mut m = SymMatrix::zeros(dim)?;
    for w in 0..strings {
        for k in 0..l {
            for kk in (k + 1)..l {
                m.add_at(joint_index(l, w, k), joint_index(l, w, k), half_inv);
                m.add_at(joint_index(l, w, kk), joint_index(l, w, kk), half_inv);
                m.add_at(joint_index(l, w, k), joint_index(l, w, kk), -half_inv);
            }
        }
    }
    Ok(m)
}

/// Weight-resolved form of the phase-error operator: a register projector for
/// each string `a` paired with position weights `|a| - 1` on occupied and
/// `|a|` on unoccupied positions, all over `L - 1`.
fn phase_weight_reference(l: usize) -> Result<SymMatrix> {
    let strings = 1usize << l;
    let dim = strings * l;
    let inv = 1.0 / (l as f64 - 1.0);
    let mut m = SymMatrix::zeros(dim)?;
    for a in 0..strings {
        let w = a.count_ones() as f64;
        for w1 in 0..strings {
            for w2 in w1..strings {
                let v = x_projector_entry(l, a, w1, w2);
                for k in 0..l {
                    let coeff = if bit(a, k) == 1 { w - 1.0 } else { w };
                    if coeff != 0.0 {
                        m.add_at(
                            joint_index(l, w1, k),
                            joint_index(l, w2, k),
                            inv * coeff * v,
                        );
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Cross-check the closed-form bound branches against the dense joint-space
/// operators for one `(L, nu)` pair over a grid of multipliers.
pub fn verify_joint_decomposition(
    l: usize,
    nu: usize,
    lambda_grid: &[f64],
) -> Result<DecompositionReport> {
    if nu < 1 || nu > l.saturating_sub(2) {
        return Err(Error::domain(format!(
            "cap must satisfy 1 <= nu <= L - 2, got nu = {nu} for L = {l}"
        )));
    }
    let ops = build_joint_operators(l)?;

    let mut eigen_dev: f64 = 0.0;
    for &lambda in lambda_grid {
        let dense = decomposition_eigenvalue(&ops, nu, lambda)?;
        let closed = bounds::omega(l, nu, lambda)?;
        eigen_dev = eigen_dev.max((dense - closed).abs());
    }

    let conj_cap = ops.p_nu[nu].sandwich(&ops.u_flip)?;
    let flip_cap_dev = conj_cap.max_abs_diff(&flip_cap_reference(l, nu)?)?;

    let conj_bit = ops.e_bit.sandwich(&ops.u_flip)?;
    let flip_bit_dev = conj_bit.max_abs_diff(&flip_bit_reference(l)?)?;

    let conj_phase = ops.e_phase.sandwich(&ops.u_flip)?;
    let invariance_dev = conj_phase.max_abs_diff(&ops.e_phase)?;
    let weight_dev = ops.e_phase.max_abs_diff(&phase_weight_reference(l)?)?;
    let flip_phase_dev = invariance_dev.max(weight_dev);

    let pass = eigen_dev <= EIGEN_TOL
        && flip_cap_dev <= ENTRY_TOL
        && flip_bit_dev <= ENTRY_TOL
        && flip_phase_dev <= ENTRY_TOL;

    Ok(DecompositionReport {
        block_size: l,
        nu,
        eigen_dev,
        flip_cap_dev,
        flip_bit_dev,
        flip_phase_dev,
        eigen_tol: EIGEN_TOL,
        entry_tol: ENTRY_TOL,
        pass,
    })
}

/// Outcome of the interferometer measurement-operator identities for one
/// block size.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PovmReport {
    pub block_size: usize,
    /// Deviation of the summed detection operators from half the identity
    /// (the other half is the detection-failure branch).
    pub sum_dev: f64,
    /// Deviation of each pair's position marginals from the two
    /// interferometer outputs of that pair.
    pub pair_dev: f64,
    pub entry_tol: f64,
    pub pass: bool,
}

/// Rank-one projector onto `(|k> + sign * |kk>) / sqrt(2)` on the position
/// space of dimension `l`.
fn interferometer_projector(l: usize, k: usize, kk: usize, sign: f64) -> Result<SymMatrix> {
    let mut m = SymMatrix::zeros(l)?;
    m.set(k, k, 0.5);
    m.set(kk, kk, 0.5);
    m.set(k, kk, 0.5 * sign);
    Ok(m)
}

/// Check the measurement-operator identities on the position space.
pub fn povm_identity_check(l: usize) -> Result<PovmReport> {
    if l < 3 {
        return Err(Error::domain(format!("block size must be >= 3, got {l}")));
    }
    let lf = l as f64;
    let inv = 1.0 / (lf - 1.0);

    // Detection operators carry 1/(2(L-1)): the interferometer projector over
    // L-1 delays, halved by the detection-failure coin.
    let mut total = SymMatrix::zeros(l)?;
    let mut pair_dev: f64 = 0.0;
    for k in 0..l {
        for kk in (k + 1)..l {
            let plus = interferometer_projector(l, k, kk, 1.0)?;
            let minus = interferometer_projector(l, k, kk, -1.0)?;
            total.add_scaled(&plus, 0.5 * inv)?;
            total.add_scaled(&minus, 0.5 * inv)?;

            // Position marginals of the announced pair match the two outputs.
            let mut marginals = SymMatrix::zeros(l)?;
            marginals.set(k, k, inv);
            marginals.set(kk, kk, inv);
            let mut outputs = SymMatrix::zeros(l)?;
            outputs.add_scaled(&plus, inv)?;
            outputs.add_scaled(&minus, inv)?;
            pair_dev = pair_dev.max(marginals.max_abs_diff(&outputs)?);
        }
    }
    let half_identity = SymMatrix::from_fn(l, |i, j| if i == j { 0.5 } else { 0.0 })?;
    let sum_dev = total.max_abs_diff(&half_identity)?;

    let pass = sum_dev <= ENTRY_TOL && pair_dev <= ENTRY_TOL;
    Ok(PovmReport {
        block_size: l,
        sum_dev,
        pair_dev,
        entry_tol: ENTRY_TOL,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{det_bruteforce, max_eigenvalue};
    use proptest::prelude::*;

    #[test]
    fn m1_and_m2_shapes() {
        let m1 = build_m1(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m1.get(i, j), 1.0);
            }
        }
        let m2 = build_m2(4, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j && i < 2 { 1.0 } else { 0.0 };
                assert_eq!(m2.get(i, j), expect);
            }
        }
        assert!(build_m2(3, 4).is_err());
    }

    #[test]
    fn det_closed_form_reference_values() {
        // d = 2, m = 1 with unit coefficients: [[3, 1], [1, 2]].
        assert!((det_closed_form(1.0, 1.0, 1.0, 2, 1).unwrap() - 5.0).abs() < 1e-12);
        // Pure shift: det(2 * I_3) = 8.
        assert!((det_closed_form(0.0, 0.0, 2.0, 3, 1).unwrap() - 8.0).abs() < 1e-12);
        // Rank-one all-ones matrix of dimension 3 is singular.
        assert_eq!(det_closed_form(1.0, 0.0, 0.0, 3, 0).unwrap(), 0.0);
    }

    #[test]
    fn det_closed_form_matches_bruteforce_on_deterministic_grid() {
        let coeffs = [-1.5, -0.3, 0.0, 0.7, 1.0];
        for d in 1..=5 {
            for m in 0..=d {
                for &alpha in &coeffs {
                    for &beta in &coeffs {
                        for &gamma in &coeffs {
                            let mat = rank_structured_matrix(alpha, beta, gamma, d, m).unwrap();
                            let brute = det_bruteforce(&mat).unwrap();
                            let closed = det_closed_form(alpha, beta, gamma, d, m).unwrap();
                            let diff = (brute - closed).abs();
                            assert!(
                                diff <= 1e-12 || diff / brute.abs() <= 1e-9,
                                "d={d} m={m} a={alpha} b={beta} g={gamma}: {closed} vs {brute}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_minus_zero_weight_zero_lambda_is_zero_matrix() {
        let m = build_lambda_minus(3, 0, 0.0).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.max_abs_diff(&SymMatrix::zeros(3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn lambda_minus_spectrum_matches_closed_form() {
        // Weight nu - 1 = 2 at L = 6 reproduces the minus branch.
        for lambda in [0.0, 0.1, 1.0, 10.0] {
            let m = build_lambda_minus(6, 2, lambda).unwrap();
            let eig = max_eigenvalue(&m).unwrap();
            let closed = crate::bounds::omega_minus(6, 3, lambda).unwrap();
            assert!(
                (eig - closed).abs() < 1e-10,
                "lambda={lambda}: {eig} vs {closed}"
            );
        }
        let at_zero = max_eigenvalue(&build_lambda_minus(6, 2, 0.0).unwrap()).unwrap();
        assert!((at_zero - 0.4).abs() < 1e-10);
    }

    #[test]
    fn lambda_plus_spectrum_matches_closed_form() {
        for lambda in [0.0, 0.1, 1.0, 10.0] {
            let m = build_lambda_plus(6, 4, lambda).unwrap();
            let eig = max_eigenvalue(&m).unwrap();
            let closed = crate::bounds::omega_plus(6, 3, lambda).unwrap();
            assert!(
                (eig - closed).abs() < 1e-10,
                "lambda={lambda}: {eig} vs {closed}"
            );
        }
        let at_zero = max_eigenvalue(&build_lambda_plus(6, 4, 0.0).unwrap()).unwrap();
        assert!((at_zero - 0.6).abs() < 1e-10);
    }

    #[test]
    fn lambda_plus_single_weight_is_scalar_zero() {
        let m = build_lambda_plus(3, 1, 0.0).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn lambda_builders_reject_bad_weights() {
        assert!(build_lambda_minus(6, 7, 0.0).is_err());
        assert!(build_lambda_plus(6, 0, 0.0).is_err());
        assert!(build_lambda_plus(6, 7, 0.0).is_err());
        assert!(build_lambda_minus(2, 1, 0.0).is_err());
    }

    #[test]
    fn minus_branch_spectrum_is_permutation_invariant() {
        // Scatter the active weight positions instead of packing them first;
        // the spectrum must not move.
        let l = 6;
        let lambda = 0.7;
        let lf = l as f64;
        let scale = 2.0 * (lf - 1.0);
        let packed = build_lambda_minus(l, 3, lambda).unwrap();
        for support in [[0usize, 2, 4], [1, 3, 5], [0, 1, 5]] {
            let scattered = SymMatrix::from_fn(l, |i, j| {
                let mut v = lambda / scale;
                if i == j {
                    if support.contains(&i) {
                        v -= 2.0 / scale;
                    }
                    v += (2.0 * 3.0 - lf * lambda) / scale;
                }
                v
            })
            .unwrap();
            let a = max_eigenvalue(&packed).unwrap();
            let b = max_eigenvalue(&scattered).unwrap();
            assert!((a - b).abs() < 1e-10, "support {support:?}: {a} vs {b}");
        }
    }

    #[test]
    fn joint_operator_structure() {
        let ops = build_joint_operators(3).unwrap();
        assert_eq!(ops.dim, 24);
        assert_eq!(ops.p_nu.len(), 4);

        // Both error operators trace to L * 2^(L-1).
        let trace = |m: &SymMatrix| (0..m.dim()).map(|i| m.get(i, i)).sum::<f64>();
        assert!((trace(&ops.e_bit) - 12.0).abs() < 1e-12);
        assert!((trace(&ops.e_phase) - 12.0).abs() < 1e-12);

        assert!(ops.projector_defect().unwrap() < 1e-12);
        assert!(ops.parity_completeness_defect().unwrap() < 1e-12);
        assert!(ops.flip_involution_defect().unwrap() < 1e-12);
    }

    #[test]
    fn joint_operators_reject_out_of_range_blocks() {
        assert!(matches!(build_joint_operators(2), Err(Error::Domain(_))));
        assert!(matches!(build_joint_operators(6), Err(Error::Resource(_))));
    }

    #[test]
    fn decomposition_eigenvalue_reference_points() {
        let ops3 = build_joint_operators(3).unwrap();
        let v = decomposition_eigenvalue(&ops3, 1, 0.5).unwrap();
        assert!((v - 0.375).abs() < 1e-9, "got {v}");
        let v = decomposition_eigenvalue(&ops3, 1, 10.0).unwrap();
        assert!(v.abs() < 1e-9, "got {v}");

        let ops4 = build_joint_operators(4).unwrap();
        let v = decomposition_eigenvalue(&ops4, 2, 0.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn joint_decomposition_cross_check_passes() {
        let report = verify_joint_decomposition(3, 1, &[0.0, 0.5, 2.0, 10.0]).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.eigen_dev <= EIGEN_TOL);
        assert!(report.flip_cap_dev <= ENTRY_TOL);
        assert!(report.flip_bit_dev <= ENTRY_TOL);
        assert!(report.flip_phase_dev <= ENTRY_TOL);
    }

    #[test]
    fn povm_identities_hold_for_small_blocks() {
        for l in 3..=5 {
            let report = povm_identity_check(l).unwrap();
            assert!(report.pass, "L = {l}: {report:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn det_closed_form_matches_bruteforce_randomized(
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
            gamma in -2.0f64..2.0,
            d in 1usize..=6,
            m_frac in 0.0f64..=1.0,
        ) {
            let m = ((d as f64 + 1.0) * m_frac) as usize;
            let m = m.min(d);
            let mat = rank_structured_matrix(alpha, beta, gamma, d, m).unwrap();
            let brute = det_bruteforce(&mat).unwrap();
            let closed = det_closed_form(alpha, beta, gamma, d, m).unwrap();
            let diff = (brute - closed).abs();
            prop_assert!(diff <= 1e-12 || diff / brute.abs() <= 1e-9);
        }
    }
}
