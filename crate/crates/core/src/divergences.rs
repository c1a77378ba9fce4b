//! The ε-hypothesis-testing divergence via the quantum Neyman–Pearson test.
//!
//! D_h^ε(ρ‖σ) = −log₂ min Tr{Λσ} over tests 0 ≤ Λ ≤ I with Tr{Λρ} ≥ 1−ε.
//! The optimal test has the form Λ = P₊(ρ−tσ) + q·P₀(ρ−tσ): a threshold t
//! picks the strictly positive eigenspace of ρ−tσ and a boundary weight
//! q ∈ [0,1] on its kernel saturates the type-I constraint exactly. The
//! threshold is found by bisection on the type-I weight of P₊, which is
//! monotone apart from jumps at eigenvalue crossings; the kernel weight q
//! absorbs exactly those jumps. Block-diagonal (classical–quantum) inputs
//! use the same solver blockwise, which is exact because the optimal test
//! decomposes over the classical label.

use crate::channels::QuantumChannel;
use crate::qcore::{eig_hermitian_unchecked, tol, CMat, DensityOperator};
use crate::{Error, Result};

/// A test operator with its two error weights against the pair it was
/// built for: `type1` = Tr{Λρ}, `type2` = Tr{Λσ}.
#[derive(Debug, Clone)]
pub struct HypothesisTest {
    pub operator: CMat,
    pub type1: f64,
    pub type2: f64,
}

/// Outcome of a data-processing comparison.
#[derive(Debug, Clone)]
pub struct DataProcessingReport {
    pub before: f64,
    pub after: f64,
    pub monotone: bool,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::BadEpsilon { got: epsilon });
    }
    Ok(())
}

/// ε-hypothesis-testing divergence in bits, plus the optimal test.
///
/// Returns +∞ (with a zero-type-II test) when the optimal Tr{Λσ} falls at
/// or below [`tol::ZERO2`]. ε = 0 is allowed: the optimal test is then the
/// support projector of ρ.
pub fn dh_epsilon(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    epsilon: f64,
) -> Result<(f64, HypothesisTest)> {
    check_epsilon(epsilon)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("state dims {} and {}", rho.dim(), sigma.dim()),
        });
    }
    let blocks = [(rho.matrix().clone(), sigma.matrix().clone())];
    let sol = np_solve(&blocks, epsilon);
    let operator = sol.tests.into_iter().next().unwrap();
    Ok((
        sol.value,
        HypothesisTest { operator, type1: sol.type1, type2: sol.beta },
    ))
}

/// Blockwise ε-hypothesis-testing divergence for classical–quantum states.
///
/// `classical` names the registers carrying the classical label; both states
/// must be block diagonal over them within [`tol::NUM`]. Agrees with the
/// dense path but costs Σ d_x³ instead of (Σ d_x)³ per eigendecomposition.
pub fn dh_epsilon_cq(
    theta: &DensityOperator,
    theta_hat: &DensityOperator,
    classical: &[&str],
    epsilon: f64,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    if theta.dim() != theta_hat.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("state dims {} and {}", theta.dim(), theta_hat.dim()),
        });
    }
    let rho_blocks = extract_blocks(theta, classical)?;
    let sig_blocks = extract_blocks(theta_hat, classical)?;
    if rho_blocks.len() != sig_blocks.len() || rho_blocks[0].nrows() != sig_blocks[0].nrows() {
        return Err(Error::DimensionMismatch { context: "classical block shapes differ".into() });
    }
    let blocks: Vec<(CMat, CMat)> = rho_blocks.into_iter().zip(sig_blocks).collect();
    Ok(np_solve(&blocks, epsilon).value)
}

/// Diagonal blocks over the classical registers, verifying that all
/// off-block weight is negligible.
fn extract_blocks(state: &DensityOperator, classical: &[&str]) -> Result<Vec<CMat>> {
    let all: Vec<&str> = classical
        .iter()
        .copied()
        .chain(
            state
                .registers()
                .iter()
                .map(|r| r.name.as_str())
                .filter(|n| !classical.contains(n)),
        )
        .collect();
    if all.len() != state.registers().len() {
        return Err(Error::UnknownRegister { name: format!("{classical:?}") });
    }
    let fronted = state.permute(&all)?;
    let d_c: usize = classical
        .iter()
        .map(|n| {
            state
                .registers()
                .iter()
                .find(|r| r.name == *n)
                .map(|r| r.dim)
                .ok_or_else(|| Error::UnknownRegister { name: (*n).into() })
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .product();
    let d_e = state.dim() / d_c;
    let mat = fronted.matrix();
    let mut off_block = 0.0f64;
    let mut blocks = Vec::with_capacity(d_c);
    for c in 0..d_c {
        for cp in 0..d_c {
            if c == cp {
                continue;
            }
            for i in 0..d_e {
                for j in 0..d_e {
                    off_block = off_block.max(mat[(c * d_e + i, cp * d_e + j)].norm());
                }
            }
        }
        let block = CMat::from_fn(d_e, d_e, |i, j| mat[(c * d_e + i, c * d_e + j)]);
        blocks.push(block);
    }
    if off_block > tol::NUM {
        return Err(Error::NotBlockDiagonal { deviation: off_block });
    }
    Ok(blocks)
}

/// Evaluate D_h^ε on both sides of a channel application and report whether
/// the divergence decreased (it must, for any CPTP map applied to both
/// arguments).
pub fn dpi_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    ch: &QuantumChannel,
    epsilon: f64,
) -> Result<DataProcessingReport> {
    if rho.dim() != ch.in_reg().dim {
        return Err(Error::DimensionMismatch {
            context: format!("state dim {} but channel input {}", rho.dim(), ch.in_reg().dim),
        });
    }
    let (before, _) = dh_epsilon(rho, sigma, epsilon)?;
    let out_reg = vec![ch.out_reg().clone()];
    let rho_out = DensityOperator::new(out_reg.clone(), ch.apply_matrix(rho.matrix()))?;
    let sigma_out = DensityOperator::new(out_reg, ch.apply_matrix(sigma.matrix()))?;
    let (after, _) = dh_epsilon(&rho_out, &sigma_out, epsilon)?;
    let monotone = after <= before + tol::NUM;
    Ok(DataProcessingReport { before, after, monotone })
}

pub(crate) struct NpSolution {
    pub value: f64,
    pub beta: f64,
    pub type1: f64,
    pub tests: Vec<CMat>,
}

/// Optimal Neyman–Pearson test over a direct sum of blocks: minimize
/// Σ Tr{Λ_b σ_b} subject to Σ Tr{Λ_b ρ_b} ≥ 1−ε and 0 ≤ Λ_b ≤ I.
pub(crate) fn np_solve(blocks: &[(CMat, CMat)], epsilon: f64) -> NpSolution {
    let target = 1.0 - epsilon;

    // ε = 0: the only optimal tests contain the support projector of ρ.
    if epsilon < 1e-12 {
        return support_projector_solution(blocks);
    }

    // tests supported on the kernel of σ have (numerically) zero cost; if
    // they already reach the type-I target the divergence is infinite
    let mut kernel_tol = 1e-13;
    loop {
        let kernel = sigma_kernel_projectors(blocks, kernel_tol);
        let w_inf: f64 = kernel
            .iter()
            .zip(blocks)
            .map(|(q, (rho, _))| re_trace(&(q * rho)))
            .sum();
        if w_inf >= target {
            let q_weight = (target / w_inf).min(1.0);
            let tests: Vec<CMat> = kernel.iter().map(|q| q.scale(q_weight)).collect();
            let beta: f64 = tests
                .iter()
                .zip(blocks)
                .map(|(t, (_, sig))| re_trace(&(t * sig)))
                .sum();
            return finish(blocks, tests, beta);
        }
        if let Some(sol) = bisection_solution(blocks, target, kernel_tol) {
            return sol;
        }
        // could not bracket the threshold: σ has directions too weakly
        // weighted to resolve at this scale, treat them as kernel and retry
        kernel_tol *= 100.0;
        if kernel_tol > 1.0 {
            return support_projector_solution(blocks);
        }
    }
}

fn re_trace(m: &CMat) -> f64 {
    m.trace().re
}

fn sigma_kernel_projectors(blocks: &[(CMat, CMat)], kernel_tol: f64) -> Vec<CMat> {
    blocks
        .iter()
        .map(|(_, sig)| {
            let d = sig.nrows();
            let (vals, vecs) = eig_hermitian_unchecked(sig);
            let mut q = CMat::zeros(d, d);
            for (i, &v) in vals.iter().enumerate() {
                if v <= kernel_tol {
                    let col = vecs.column(i);
                    q += &col * col.adjoint();
                }
            }
            q
        })
        .collect()
}

fn support_projector_solution(blocks: &[(CMat, CMat)]) -> NpSolution {
    let mut tests = Vec::with_capacity(blocks.len());
    let mut beta = 0.0;
    for (rho, sig) in blocks {
        let d = rho.nrows();
        let (vals, vecs) = eig_hermitian_unchecked(rho);
        // support cutoff relative to the block weight: blocks may carry
        // arbitrarily small prior factors
        let cutoff = tol::EIG_ZERO * re_trace(rho).max(0.0);
        let mut p = CMat::zeros(d, d);
        for (i, &v) in vals.iter().enumerate() {
            if v > cutoff {
                let col = vecs.column(i);
                p += &col * col.adjoint();
            }
        }
        beta += re_trace(&(&p * sig));
        tests.push(p);
    }
    finish(blocks, tests, beta)
}

/// Type-I weight of the strictly positive eigenspace of ρ − tσ, per block.
fn positive_part_weight(blocks: &[(CMat, CMat)], t: f64) -> f64 {
    let mut total = 0.0;
    for (rho, sig) in blocks {
        let delta = rho - sig.scale(t);
        let (vals, vecs) = eig_hermitian_unchecked(&delta);
        for (i, &v) in vals.iter().enumerate() {
            if v > 0.0 {
                let col = vecs.column(i);
                total += (col.adjoint() * rho * col)[(0, 0)].re;
            }
        }
    }
    total
}

fn bisection_solution(blocks: &[(CMat, CMat)], target: f64, kernel_tol: f64) -> Option<NpSolution> {
    // bracket the threshold: f(0) = Tr ρ ≥ target, find t_hi with f(t_hi) ≤ target
    let sigma_norm: f64 = blocks
        .iter()
        .map(|(_, s)| eig_hermitian_unchecked(s).0[0])
        .fold(0.0, f64::max);
    let rho_norm: f64 = blocks
        .iter()
        .map(|(r, _)| eig_hermitian_unchecked(r).0[0])
        .fold(0.0, f64::max);
    let t_cap = 16.0 * (rho_norm / kernel_tol).max(1.0);
    let mut t_lo = 0.0f64;
    let mut t_hi = 1.0f64;
    loop {
        if positive_part_weight(blocks, t_hi) <= target {
            break;
        }
        t_lo = t_hi;
        t_hi *= 2.0;
        if t_hi > t_cap {
            return None;
        }
    }
    for _ in 0..200 {
        if (t_hi - t_lo) <= 1e-16 * t_hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (t_lo + t_hi);
        if positive_part_weight(blocks, mid) <= target {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }

    // classify the spectrum at t_hi: strictly positive part, and a kernel
    // band wide enough to hold the eigenvalue crossing inside the bracket
    let band = (1e-11f64).max((t_hi - t_lo) * sigma_norm * 4.0);
    let mut plus_weight = 0.0;
    let mut zero_weight = 0.0;
    let mut parts: Vec<(CMat, CMat, f64, f64)> = Vec::with_capacity(blocks.len());
    for (rho, sig) in blocks {
        let d = rho.nrows();
        let delta = rho - sig.scale(t_hi);
        let (vals, vecs) = eig_hermitian_unchecked(&delta);
        let mut p_plus = CMat::zeros(d, d);
        let mut p_zero = CMat::zeros(d, d);
        for (i, &v) in vals.iter().enumerate() {
            let col = vecs.column(i);
            let w = (col.adjoint() * rho * col)[(0, 0)].re;
            if v > band {
                p_plus += &col * col.adjoint();
                plus_weight += w;
            } else if v >= -band {
                p_zero += &col * col.adjoint();
                zero_weight += w;
            }
        }
        let beta_plus = re_trace(&(&p_plus * sig));
        let beta_zero = re_trace(&(&p_zero * sig));
        parts.push((p_plus, p_zero, beta_plus, beta_zero));
    }
    let q = if zero_weight > 1e-300 {
        ((target - plus_weight) / zero_weight).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut beta = 0.0;
    let tests: Vec<CMat> = parts
        .into_iter()
        .map(|(p_plus, p_zero, b_plus, b_zero)| {
            beta += b_plus + q * b_zero;
            p_plus + p_zero.scale(q)
        })
        .collect();
    Some(finish(blocks, tests, beta))
}

fn finish(blocks: &[(CMat, CMat)], tests: Vec<CMat>, beta: f64) -> NpSolution {
    let type1: f64 = tests
        .iter()
        .zip(blocks)
        .map(|(t, (rho, _))| re_trace(&(t * rho)))
        .sum();
    let beta = beta.max(0.0);
    let value = if beta <= tol::ZERO2 { f64::INFINITY } else { -beta.log2() };
    NpSolution { value, beta, type1, tests }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{cx, mat_from_rows, Register};
    use crate::random;

    fn qubit(name: &str) -> Register {
        Register::new(name, 2)
    }

    fn diag_state(name: &str, probs: &[f64]) -> DensityOperator {
        let d = probs.len();
        let mut m = CMat::zeros(d, d);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = cx(p, 0.0);
        }
        DensityOperator::new(vec![Register::new(name, d)], m).unwrap()
    }

    fn basis(name: &str, d: usize, i: usize) -> DensityOperator {
        let mut v = CMat::zeros(d, 1);
        v[(i, 0)] = cx(1.0, 0.0);
        DensityOperator::from_pure(vec![Register::new(name, d)], &v).unwrap()
    }

    /// Classical Neyman–Pearson by ratio-greedy over (r_i, b_i) pairs:
    /// the oracle for commuting instances.
    fn classical_greedy(r: &[f64], b: &[f64], epsilon: f64) -> f64 {
        let target = 1.0 - epsilon;
        let mut idx: Vec<usize> = (0..r.len()).collect();
        idx.sort_by(|&i, &j| (r[i] * b[j]).partial_cmp(&(r[j] * b[i])).unwrap().reverse());
        let mut got = 0.0;
        let mut beta = 0.0;
        for &i in &idx {
            if got >= target - 1e-15 {
                break;
            }
            let need = target - got;
            if r[i] <= need {
                got += r[i];
                beta += b[i];
            } else {
                let frac = need / r[i];
                got += need;
                beta += frac * b[i];
            }
        }
        beta
    }

    #[test]
    fn self_divergence_hits_epsilon_floor() {
        let rho = random::density_operator(&mut random::rng(1), vec![qubit("A")]);
        for eps in [0.0, 0.1, 0.5, 0.9] {
            let (v, test) = dh_epsilon(&rho, &rho, eps).unwrap();
            let expect = -(1.0 - eps).log2();
            assert!((v - expect).abs() < 1e-9, "eps={eps}: {v} vs {expect}");
            assert!(test.type1 >= 1.0 - eps - 1e-9);
        }
    }

    #[test]
    fn orthogonal_pure_states_are_infinitely_distinguishable() {
        let zero = basis("A", 2, 0);
        let one = basis("A", 2, 1);
        for eps in [0.0, 0.3, 0.9] {
            let (v, test) = dh_epsilon(&zero, &one, eps).unwrap();
            assert!(v.is_infinite(), "eps={eps}");
            assert!(test.type2 <= tol::ZERO2);
        }
    }

    #[test]
    fn classical_example_matches_linear_program() {
        let rho = diag_state("A", &[0.5, 0.5]);
        let sigma = diag_state("A", &[0.9, 0.1]);
        let (v, test) = dh_epsilon(&rho, &rho, 0.0).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(test.type1 > 1.0 - 1e-9);
        let (v, test) = dh_epsilon(&rho, &sigma, 0.5).unwrap();
        assert!((v - 10f64.log2()).abs() < 1e-9);
        assert!((test.type2 - 0.1).abs() < 1e-9);
        assert!((test.type1 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_epsilon_uses_support_projector() {
        let rho = basis("A", 2, 0);
        let sigma = diag_state("A", &[0.9, 0.1]);
        let (v, _) = dh_epsilon(&rho, &sigma, 0.0).unwrap();
        assert!((v - (-0.9f64.log2())).abs() < 1e-10);
    }

    #[test]
    fn returned_test_is_feasible_and_achieves_value() {
        let mut rng = random::rng(2);
        for _ in 0..25 {
            let rho = random::density_operator(&mut rng, vec![qubit("A")]);
            let sigma = random::density_operator(&mut rng, vec![qubit("A")]);
            let eps = 0.25;
            let (v, test) = dh_epsilon(&rho, &sigma, eps).unwrap();
            let (vals, _) = eig_hermitian_unchecked(&test.operator);
            assert!(vals.iter().all(|&x| x >= -tol::PSD && x <= 1.0 + tol::PSD));
            assert!((test.type1 - (1.0 - eps)).abs() <= 1e-9);
            if v.is_finite() {
                assert!((v + test.type2.log2()).abs() < tol::NUM);
            }
        }
    }

    #[test]
    fn monotone_in_epsilon() {
        let mut rng = random::rng(3);
        for _ in 0..10 {
            let rho = random::density_operator(&mut rng, vec![qubit("A")]);
            let sigma = random::density_operator(&mut rng, vec![qubit("A")]);
            let mut last = -1.0;
            for eps in [0.0, 0.1, 0.2, 0.4, 0.6, 0.8] {
                let (v, _) = dh_epsilon(&rho, &sigma, eps).unwrap();
                assert!(v >= last - 1e-9, "not monotone at eps={eps}");
                last = v;
            }
        }
    }

    #[test]
    fn commuting_pairs_match_classical_greedy() {
        let mut rng = random::rng(4);
        for _ in 0..50 {
            let d = 4;
            let r = random::prob_vector(&mut rng, d);
            let b = random::prob_vector(&mut rng, d);
            let u = random::unitary(&mut rng, d);
            let to_state = |p: &[f64]| {
                let mut m = CMat::zeros(d, d);
                for (i, &x) in p.iter().enumerate() {
                    m[(i, i)] = cx(x, 0.0);
                }
                DensityOperator::new(vec![Register::new("A", d)], &u * m * u.adjoint()).unwrap()
            };
            let rho = to_state(&r);
            let sigma = to_state(&b);
            let eps = 0.3;
            let (v, _) = dh_epsilon(&rho, &sigma, eps).unwrap();
            let beta = classical_greedy(&r, &b, eps);
            assert!((v - (-beta.log2())).abs() < 1e-9);
        }
    }

    #[test]
    fn cq_single_block_equals_dense() {
        let mut rng = random::rng(5);
        let theta = random::density_operator(&mut rng, vec![Register::new("X", 1), qubit("E")]);
        let theta_hat = random::density_operator(&mut rng, vec![Register::new("X", 1), qubit("E")]);
        let dense_rho = DensityOperator::new(vec![qubit("A")], theta.matrix().clone()).unwrap();
        let dense_sig = DensityOperator::new(vec![qubit("A")], theta_hat.matrix().clone()).unwrap();
        let blockwise = dh_epsilon_cq(&theta, &theta_hat, &["X"], 0.2).unwrap();
        let (dense, _) = dh_epsilon(&dense_rho, &dense_sig, 0.2).unwrap();
        assert!((blockwise - dense).abs() < 1e-10);
    }

    #[test]
    fn cq_self_divergence() {
        let mut m = CMat::zeros(4, 4);
        for (i, p) in [0.3, 0.2, 0.4, 0.1].iter().enumerate() {
            m[(i, i)] = cx(*p, 0.0);
        }
        let theta = DensityOperator::new(vec![qubit("X"), qubit("E")], m).unwrap();
        for eps in [0.1, 0.5] {
            let v = dh_epsilon_cq(&theta, &theta, &["X"], eps).unwrap();
            assert!((v - (-(1.0 - eps).log2())).abs() < 1e-9);
        }
    }

    #[test]
    fn cq_two_blocks_match_dense_path() {
        let mut rng = random::rng(6);
        for _ in 0..10 {
            let b0 = random::density_matrix(&mut rng, 2);
            let b1 = random::density_matrix(&mut rng, 2);
            let s0 = random::density_matrix(&mut rng, 2);
            let s1 = random::density_matrix(&mut rng, 2);
            let stack = |a: &CMat, b: &CMat, p: f64| {
                let mut m = CMat::zeros(4, 4);
                for i in 0..2 {
                    for j in 0..2 {
                        m[(i, j)] = a[(i, j)].scale(p);
                        m[(2 + i, 2 + j)] = b[(i, j)].scale(1.0 - p);
                    }
                }
                m
            };
            let theta = DensityOperator::new(vec![qubit("X"), qubit("E")], stack(&b0, &b1, 0.6)).unwrap();
            let theta_hat = DensityOperator::new(vec![qubit("X"), qubit("E")], stack(&s0, &s1, 0.6)).unwrap();
            let blockwise = dh_epsilon_cq(&theta, &theta_hat, &["X"], 0.1).unwrap();
            let dense_rho = DensityOperator::new(vec![Register::new("A", 4)], theta.matrix().clone()).unwrap();
            let dense_sig = DensityOperator::new(vec![Register::new("A", 4)], theta_hat.matrix().clone()).unwrap();
            let (dense, _) = dh_epsilon(&dense_rho, &dense_sig, 0.1).unwrap();
            assert!((blockwise - dense).abs() < 1e-9, "{blockwise} vs {dense}");
        }
    }

    #[test]
    fn cq_rejects_off_block_weight() {
        let phi = DensityOperator::maximally_entangled(qubit("X"), qubit("E")).unwrap();
        assert!(matches!(
            dh_epsilon_cq(&phi, &phi, &["X"], 0.1),
            Err(Error::NotBlockDiagonal { .. })
        ));
    }

    #[test]
    fn dpi_identity_channel_is_equality() {
        let mut rng = random::rng(7);
        let rho = random::density_operator(&mut rng, vec![qubit("A")]);
        let sigma = random::density_operator(&mut rng, vec![qubit("A")]);
        let ch = QuantumChannel::identity(qubit("A"), "B");
        let report = dpi_check(&rho, &sigma, &ch, 0.2).unwrap();
        assert!(report.monotone);
        assert!((report.before - report.after).abs() < 1e-9);
    }

    #[test]
    fn dpi_constant_channel_collapses_to_floor() {
        let mut rng = random::rng(8);
        let rho = random::density_operator(&mut rng, vec![qubit("A")]);
        let sigma = random::density_operator(&mut rng, vec![qubit("A")]);
        let omega = random::density_matrix(&mut rng, 2);
        let ch = QuantumChannel::replacer(qubit("A"), "B", &omega).unwrap();
        let eps = 0.3;
        let report = dpi_check(&rho, &sigma, &ch, eps).unwrap();
        assert!((report.after - (-(1.0f64 - eps).log2())).abs() < 1e-9);
        assert!(report.monotone);
    }

    #[test]
    fn dpi_random_channels_are_monotone() {
        let mut rng = random::rng(9);
        for _ in 0..30 {
            let rho = random::density_operator(&mut rng, vec![qubit("A")]);
            let sigma = random::density_operator(&mut rng, vec![qubit("A")]);
            let kraus = random::kraus_list(&mut rng, 2, 2, 3);
            let ch = QuantumChannel::new(qubit("A"), qubit("B"), kraus).unwrap();
            let report = dpi_check(&rho, &sigma, &ch, 0.2).unwrap();
            assert!(report.monotone, "before {} after {}", report.before, report.after);
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        let rho = diag_state("A", &[0.5, 0.5]);
        assert!(matches!(dh_epsilon(&rho, &rho, 1.0), Err(Error::BadEpsilon { .. })));
        assert!(matches!(dh_epsilon(&rho, &rho, -0.1), Err(Error::BadEpsilon { .. })));
    }

    #[test]
    fn noncommuting_pair_known_value() {
        // ρ = |+⟩⟨+|, σ = |0⟩⟨0|: with ε = 0 the test is the support of ρ,
        // β = |⟨+|0⟩|² = 1/2, so the divergence is exactly 1 bit
        let plus = mat_from_rows(
            2,
            2,
            &[cx(0.5, 0.0), cx(0.5, 0.0), cx(0.5, 0.0), cx(0.5, 0.0)],
        )
        .unwrap();
        let rho = DensityOperator::new(vec![qubit("A")], plus).unwrap();
        let sigma = basis("A", 2, 0);
        let (v, _) = dh_epsilon(&rho, &sigma, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }
}
