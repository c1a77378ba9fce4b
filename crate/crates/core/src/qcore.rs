//! Dense complex linear algebra and density-operator primitives.
//!
//! Operators live on ordered lists of named [`Register`]s; the first register
//! is the most significant index (so `tensor` is a plain Kronecker product).
//! A [`DensityOperator`] is validated at construction — Hermitian, positive
//! semidefinite, and unit trace within the tolerances in [`tol`] — and every
//! operation on it is pure, so states can be shared freely across threads.
//!
//! All entropic quantities are in bits.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use crate::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;
pub type CMat = DMatrix<Complex64>;

/// Numerical tolerances used throughout the crate, sized for double-precision
/// eigendecompositions on total dimensions up to 64.
pub mod tol {
    /// Hermiticity check on constructed operators.
    pub const HERM: f64 = 1e-9;
    /// Unit-trace check on density operators.
    pub const TRACE: f64 = 1e-9;
    /// Eigenvalues above `-PSD` count as nonnegative.
    pub const PSD: f64 = 1e-9;
    /// Eigendecomposition reconstruction residual (Frobenius).
    pub const EIG: f64 = 1e-10;
    /// Eigenvalues below this are treated as zero in entropies.
    pub const EIG_ZERO: f64 = 1e-12;
    /// Support membership for relative entropy.
    pub const SUPP: f64 = 1e-9;
    /// Generic agreement tolerance between two exact formulas.
    pub const NUM: f64 = 1e-8;
    /// Unitarity check for group representations.
    pub const UNIT: f64 = 1e-9;
    /// Simulation identity tolerance for environment parametrizations.
    pub const SIM: f64 = 1e-7;
    /// CPTP (trace-preservation) check on Kraus lists.
    pub const CPTP: f64 = 1e-8;
    /// Covariance / one-design deviation threshold.
    pub const COV: f64 = 1e-8;
    /// POVM completeness check.
    pub const POVM: f64 = 1e-8;
    /// Probability vectors must sum to 1 within this.
    pub const PROB: f64 = 1e-10;
    /// Zero-error declarations for protocol runs.
    pub const ZERO_ERR: f64 = 1e-9;
    /// Type-II errors at or below this are reported as +∞ divergence.
    pub const ZERO2: f64 = 1e-14;
}

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Build a matrix from row-major entries, rejecting non-finite values.
pub fn mat_from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<CMat> {
    assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
    for (k, e) in entries.iter().enumerate() {
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::NonFiniteEntry { row: k / cols, col: k % cols });
        }
    }
    Ok(CMat::from_row_slice(rows, cols, entries))
}

pub fn ensure_finite(m: &CMat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let e = m[(i, j)];
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|e| e.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
///
/// Returns `(values, vectors)` with the i-th column of `vectors` the
/// eigenvector for `values[i]`, so `m = V diag(values) V†`.
pub fn eig_hermitian(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let dev = hermiticity_deviation(m);
    if dev > tol::HERM {
        return Err(Error::NotHermitian { deviation: dev, tol: tol::HERM });
    }
    Ok(eig_hermitian_unchecked(m))
}

/// Same as [`eig_hermitian`] but trusts the caller on Hermiticity.
pub(crate) fn eig_hermitian_unchecked(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    let (vals, _) = eig_hermitian_unchecked(m);
    vals.iter().map(|v| v.abs()).sum()
}

/// Descending eigenvalues of (m + m†)/2. For validation reporting on
/// matrices that may fail the Hermiticity check.
pub fn symmetrized_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    eig_hermitian_unchecked(&h).0
}

/// Uhlmann fidelity F(ρ,σ) = (Tr √(√ρ σ √ρ))² for PSD unit-trace inputs.
pub fn fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    let (vals, vecs) = eig_hermitian_unchecked(rho);
    let mut sqrt_rho = CMat::zeros(rho.nrows(), rho.ncols());
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(i);
            sqrt_rho += (&col * col.adjoint()).scale(v.sqrt());
        }
    }
    let inner = &sqrt_rho * sigma * &sqrt_rho;
    let (ivals, _) = eig_hermitian_unchecked(&inner);
    let root_sum: f64 = ivals.iter().filter(|&&v| v > 0.0).map(|v| v.sqrt()).sum();
    (root_sum * root_sum).min(1.0)
}

/// Permutation unitary on a composite space: `new_regs[k] = old_regs[perm[k]]`.
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut m = CMat::zeros(total, total);
    for old in 0..total {
        let multi = multi_index(dims, old);
        let new_multi: Vec<usize> = perm.iter().map(|&p| multi[p]).collect();
        let new = lin_index(&new_dims, &new_multi);
        m[(new, old)] = cx(1.0, 0.0);
    }
    m
}

/// A spanning set of d² pure states: basis projectors plus the real and
/// imaginary superposition states for each index pair. Deviations measured
/// on this set certify deviations on all states up to a dimension factor.
pub fn probe_states(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut v = CMat::zeros(d, 1);
        v[(i, 0)] = cx(1.0, 0.0);
        out.push(&v * v.adjoint());
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            let mut v = CMat::zeros(d, 1);
            v[(i, 0)] = cx(s, 0.0);
            v[(j, 0)] = cx(s, 0.0);
            out.push(&v * v.adjoint());
            let mut w = CMat::zeros(d, 1);
            w[(i, 0)] = cx(s, 0.0);
            w[(j, 0)] = cx(0.0, s);
            out.push(&w * w.adjoint());
        }
    }
    out
}

/// The d² discrete Weyl operators X^a Z^b with X the cyclic shift and
/// Z the clock matrix, enumerated with `a` as the outer index. For d = 2
/// this is {I, Z, X, XZ}. They form a projective group and a unitary
/// one-design.
pub fn weyl_operators(d: usize) -> Vec<CMat> {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut m = CMat::zeros(d, d);
            for j in 0..d {
                let phase = omega * (b * j) as f64;
                m[((j + a) % d, j)] = cx(phase.cos(), phase.sin());
            }
            out.push(m);
        }
    }
    out
}

pub(crate) fn lin_index(dims: &[usize], multi: &[usize]) -> usize {
    let mut idx = 0;
    for (d, m) in dims.iter().zip(multi) {
        idx = idx * d + m;
    }
    idx
}

pub(crate) fn multi_index(dims: &[usize], mut lin: usize) -> Vec<usize> {
    let mut multi = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        multi[k] = lin % dims[k];
        lin /= dims[k];
    }
    multi
}

/// A named quantum system with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        let dim = dim.max(1);
        Register { name: name.into(), dim }
    }
}

/// A density operator on an ordered list of registers.
///
/// Valid by construction: Hermitian within [`tol::HERM`], eigenvalues above
/// `-`[`tol::PSD`], trace within [`tol::TRACE`] of one.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    regs: Vec<Register>,
    mat: CMat,
}

impl DensityOperator {
    pub fn new(regs: Vec<Register>, mat: CMat) -> Result<Self> {
        let total: usize = regs.iter().map(|r| r.dim).product();
        if mat.nrows() != total || mat.ncols() != total {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "matrix is {}x{} but registers give dimension {total}",
                    mat.nrows(),
                    mat.ncols()
                ),
            });
        }
        for (i, r) in regs.iter().enumerate() {
            if regs[..i].iter().any(|s| s.name == r.name) {
                return Err(Error::RegisterClash { name: r.name.clone() });
            }
        }
        ensure_finite(&mat)?;
        let herm = hermiticity_deviation(&mat);
        if herm > tol::HERM {
            return Err(Error::InvalidState {
                reason: format!("Hermiticity deviation {herm:.3e} exceeds {:.1e}", tol::HERM),
            });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvalidState {
                reason: format!("trace {tr} deviates from 1 beyond {:.1e}", tol::TRACE),
            });
        }
        let (vals, _) = eig_hermitian_unchecked(&mat);
        if let Some(&min) = vals.last() {
            if min < -tol::PSD {
                return Err(Error::InvalidState {
                    reason: format!("eigenvalue {min:.3e} below -{:.1e}", tol::PSD),
                });
            }
        }
        Ok(DensityOperator { regs, mat })
    }

    /// Construct without validation. For internal use on outputs of maps
    /// that preserve validity by construction.
    pub(crate) fn unchecked(regs: Vec<Register>, mat: CMat) -> Self {
        DensityOperator { regs, mat }
    }

    /// Projector state |v⟩⟨v| from a (not necessarily normalized) column vector.
    pub fn from_pure(regs: Vec<Register>, v: &CMat) -> Result<Self> {
        let n2 = v.norm_squared();
        if n2 <= 0.0 {
            return Err(Error::InvalidState { reason: "zero vector".into() });
        }
        let mat = (v * v.adjoint()).scale(1.0 / n2);
        DensityOperator::new(regs, mat)
    }

    /// Maximally mixed state on the given registers.
    pub fn maximally_mixed(regs: Vec<Register>) -> Self {
        let d: usize = regs.iter().map(|r| r.dim).product();
        let mat = CMat::identity(d, d).scale(1.0 / d as f64);
        DensityOperator { regs, mat }
    }

    /// Maximally entangled state Φ = (1/d)Σ_{ij}|ii⟩⟨jj| on two d-dim registers.
    pub fn maximally_entangled(a: Register, b: Register) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch {
                context: format!("entangled pair needs equal dims, got {} and {}", a.dim, b.dim),
            });
        }
        let d = a.dim;
        let mut v = CMat::zeros(d * d, 1);
        for i in 0..d {
            v[(i * d + i, 0)] = cx(1.0, 0.0);
        }
        DensityOperator::from_pure(vec![a, b], &v)
    }

    pub fn registers(&self) -> &[Register] {
        &self.regs
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.regs.iter().map(|r| r.dim).collect()
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.regs
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister { name: name.into() })
    }

    /// Kronecker product on concatenated register lists.
    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        for r in &other.regs {
            if self.regs.iter().any(|s| s.name == r.name) {
                return Err(Error::RegisterClash { name: r.name.clone() });
            }
        }
        let mut regs = self.regs.clone();
        regs.extend(other.regs.iter().cloned());
        Ok(DensityOperator::unchecked(regs, self.mat.kronecker(&other.mat)))
    }

    /// Reduced state on `keep` (in the order given), tracing out the rest.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator> {
        let keep_pos: Vec<usize> = keep.iter().map(|n| self.position(n)).collect::<Result<_>>()?;
        for (i, p) in keep_pos.iter().enumerate() {
            if keep_pos[..i].contains(p) {
                return Err(Error::BadPartition { context: format!("register {} repeated", keep[i]) });
            }
        }
        let drop_pos: Vec<usize> =
            (0..self.regs.len()).filter(|p| !keep_pos.contains(p)).collect();
        let order: Vec<usize> = keep_pos.iter().chain(drop_pos.iter()).copied().collect();
        let fronted = self.permute_by_positions(&order);
        let d_keep: usize = keep_pos.iter().map(|&p| self.regs[p].dim).product();
        let d_drop = fronted.mat.nrows() / d_keep;
        let mut out = CMat::zeros(d_keep, d_keep);
        for i in 0..d_keep {
            for j in 0..d_keep {
                let mut acc = cx(0.0, 0.0);
                for k in 0..d_drop {
                    acc += fronted.mat[(i * d_drop + k, j * d_drop + k)];
                }
                out[(i, j)] = acc;
            }
        }
        let regs = keep_pos.iter().map(|&p| self.regs[p].clone()).collect();
        Ok(DensityOperator::unchecked(regs, out))
    }

    /// Reorder registers to the named order (must list every register once).
    pub fn permute(&self, order: &[&str]) -> Result<DensityOperator> {
        if order.len() != self.regs.len() {
            return Err(Error::BadPartition {
                context: format!("expected {} register names, got {}", self.regs.len(), order.len()),
            });
        }
        let pos: Vec<usize> = order.iter().map(|n| self.position(n)).collect::<Result<_>>()?;
        let mut seen = vec![false; pos.len()];
        for &p in &pos {
            if seen[p] {
                return Err(Error::BadPartition { context: "repeated register in order".into() });
            }
            seen[p] = true;
        }
        Ok(self.permute_by_positions(&pos))
    }

    pub(crate) fn permute_by_positions(&self, order: &[usize]) -> DensityOperator {
        if order.iter().enumerate().all(|(k, &p)| k == p) {
            return self.clone();
        }
        let dims = self.dims();
        let p = permutation_matrix(&dims, order);
        let mat = &p * &self.mat * p.adjoint();
        let regs = order.iter().map(|&i| self.regs[i].clone()).collect();
        DensityOperator::unchecked(regs, mat)
    }

    pub fn rename_register(&self, old: &str, new: impl Into<String>) -> Result<DensityOperator> {
        let pos = self.position(old)?;
        let new = new.into();
        if self.regs.iter().enumerate().any(|(i, r)| i != pos && r.name == new) {
            return Err(Error::RegisterClash { name: new });
        }
        let mut regs = self.regs.clone();
        regs[pos].name = new;
        Ok(DensityOperator::unchecked(regs, self.mat.clone()))
    }

    /// Fuse the named registers (brought together in the given order, at the
    /// position of the earliest of them) into one register named `new_name`.
    pub fn merge_registers(&self, names: &[&str], new_name: impl Into<String>) -> Result<DensityOperator> {
        let merge_pos: Vec<usize> = names.iter().map(|n| self.position(n)).collect::<Result<_>>()?;
        let first = *merge_pos.iter().min().unwrap();
        let mut final_order: Vec<usize> = Vec::new();
        for p in 0..self.regs.len() {
            if p == first {
                final_order.extend(merge_pos.iter().copied());
            } else if !merge_pos.contains(&p) {
                final_order.push(p);
            }
        }
        let permuted = self.permute_by_positions(&final_order);
        let merged_dim: usize = merge_pos.iter().map(|&p| self.regs[p].dim).product();
        let new_name = new_name.into();
        let mut regs: Vec<Register> = Vec::new();
        for (k, r) in permuted.regs.iter().enumerate() {
            if k == first {
                regs.push(Register::new(new_name.clone(), merged_dim));
            }
            if k < first || k >= first + merge_pos.len() {
                regs.push(r.clone());
            }
        }
        Ok(DensityOperator::unchecked(regs, permuted.mat))
    }

    /// Split a register into consecutive parts whose dims multiply to its dim.
    pub fn split_register(&self, name: &str, parts: &[(&str, usize)]) -> Result<DensityOperator> {
        let pos = self.position(name)?;
        let prod: usize = parts.iter().map(|(_, d)| d).product();
        if prod != self.regs[pos].dim {
            return Err(Error::DimensionMismatch {
                context: format!("split parts give {prod}, register {name} has dim {}", self.regs[pos].dim),
            });
        }
        let mut regs = Vec::new();
        for (k, r) in self.regs.iter().enumerate() {
            if k == pos {
                for (n, d) in parts {
                    if self.regs.iter().enumerate().any(|(i, s)| i != pos && s.name == *n) {
                        return Err(Error::RegisterClash { name: (*n).into() });
                    }
                    regs.push(Register::new(*n, *d));
                }
            } else {
                regs.push(r.clone());
            }
        }
        Ok(DensityOperator::unchecked(regs, self.mat.clone()))
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian_unchecked(&self.mat).0
    }

    /// Von Neumann entropy −Σ λ log₂ λ in bits.
    ///
    /// Eigenvalues are clipped to [0,1]; values at or below
    /// [`tol::EIG_ZERO`] contribute nothing.
    pub fn von_neumann_entropy(&self) -> f64 {
        entropy_of_spectrum(&self.eigenvalues())
    }
}

pub(crate) fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    vals.iter()
        .map(|&v| v.clamp(0.0, 1.0))
        .filter(|&v| v > tol::EIG_ZERO)
        .map(|v| -v * v.log2())
        .sum()
}

/// Umegaki relative entropy D(ρ‖σ) = Tr{ρ(log₂ρ − log₂σ)} in bits.
///
/// Returns +∞ when the support of ρ is not contained in the support of σ
/// (membership decided with [`tol::SUPP`]).
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("relative entropy needs equal dims, got {} and {}", rho.dim(), sigma.dim()),
        });
    }
    let (svals, svecs) = eig_hermitian_unchecked(sigma.matrix());
    let d = relative_entropy_spectral(rho.matrix(), &svals, &svecs, tol::SUPP);
    Ok(d)
}

/// Relative entropy given the eigendecomposition of the second argument.
/// σ-eigenvalues at or below `supp_tol` form the kernel; ρ-weight beyond
/// `supp_tol` in the kernel yields +∞.
pub(crate) fn relative_entropy_spectral(
    rho: &CMat,
    svals: &[f64],
    svecs: &CMat,
    supp_tol: f64,
) -> f64 {
    let mut kernel_weight = 0.0;
    let mut cross = 0.0;
    for (i, &s) in svals.iter().enumerate() {
        let col = svecs.column(i);
        let w = (col.adjoint() * rho * col)[(0, 0)].re;
        if s > supp_tol {
            cross += w * s.log2();
        } else {
            kernel_weight += w;
        }
    }
    if kernel_weight > supp_tol {
        return f64::INFINITY;
    }
    let (rvals, _) = eig_hermitian_unchecked(rho);
    let self_term: f64 = rvals
        .iter()
        .map(|&v| v.clamp(0.0, 1.0))
        .filter(|&v| v > tol::EIG_ZERO)
        .map(|v| v * v.log2())
        .sum();
    let d = self_term - cross;
    if d < 0.0 && d > -tol::NUM {
        0.0
    } else {
        d
    }
}

/// Quantum mutual information I(A;B) = S(A) + S(B) − S(AB) in bits.
///
/// `part_a` and `part_b` must partition the registers of `rho`.
pub fn mutual_information(rho: &DensityOperator, part_a: &[&str], part_b: &[&str]) -> Result<f64> {
    let total = rho.registers().len();
    if part_a.len() + part_b.len() != total {
        return Err(Error::BadPartition {
            context: format!("{} + {} names for {} registers", part_a.len(), part_b.len(), total),
        });
    }
    for n in part_a {
        if part_b.contains(n) {
            return Err(Error::BadPartition { context: format!("register {n} in both parts") });
        }
    }
    let rho_a = rho.partial_trace(part_a)?;
    let rho_b = rho.partial_trace(part_b)?;
    Ok(rho_a.von_neumann_entropy() + rho_b.von_neumann_entropy() - rho.von_neumann_entropy())
}
