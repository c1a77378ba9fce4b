//! CPTP maps in Kraus form, labelled channel collections, and the
//! environment-parametrized / environment-seizable structure.
//!
//! A collection {𝓔ˣ} is environment-parametrized when a fixed interaction
//! channel 𝓕 and per-label environment states θˣ reproduce every member as
//! 𝓔ˣ(ρ) = 𝓕(ρ ⊗ θˣ). It is additionally environment-seizable when a fixed
//! probe σ and post-processing 𝓢 recover θˣ = 𝓢(𝓔ˣ(σ)) from one use.
//! Verification evaluates these identities on a spanning set of inputs and
//! reports per-label trace-norm deviations.

use std::sync::OnceLock;

use crate::qcore::{
    self, cx, eig_hermitian_unchecked, max_abs, probe_states, tol, trace_norm_hermitian, CMat,
    DensityOperator, Register,
};
use crate::{Error, Result};

/// A completely positive trace-preserving map stored as a Kraus list.
///
/// Complete positivity is automatic from the Kraus form; trace preservation
/// Σ K†K = I is checked at construction within [`tol::CPTP`]. The Choi state
/// is derived on demand and cached.
#[derive(Debug)]
pub struct QuantumChannel {
    in_reg: Register,
    out_reg: Register,
    kraus: Vec<CMat>,
    choi_cache: OnceLock<DensityOperator>,
}

impl Clone for QuantumChannel {
    fn clone(&self) -> Self {
        QuantumChannel {
            in_reg: self.in_reg.clone(),
            out_reg: self.out_reg.clone(),
            kraus: self.kraus.clone(),
            choi_cache: OnceLock::new(),
        }
    }
}

impl QuantumChannel {
    pub fn new(in_reg: Register, out_reg: Register, kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::NotCptp { deviation: 1.0, tol: tol::CPTP });
        }
        for k in &kraus {
            qcore::ensure_finite(k)?;
            if k.nrows() != out_reg.dim || k.ncols() != in_reg.dim {
                return Err(Error::DimensionMismatch {
                    context: format!(
                        "Kraus operator is {}x{}, expected {}x{}",
                        k.nrows(),
                        k.ncols(),
                        out_reg.dim,
                        in_reg.dim
                    ),
                });
            }
        }
        let mut acc = CMat::zeros(in_reg.dim, in_reg.dim);
        for k in &kraus {
            acc += k.adjoint() * k;
        }
        let dev = max_abs(&(acc - CMat::identity(in_reg.dim, in_reg.dim)));
        if dev > tol::CPTP {
            return Err(Error::NotCptp { deviation: dev, tol: tol::CPTP });
        }
        Ok(QuantumChannel { in_reg, out_reg, kraus, choi_cache: OnceLock::new() })
    }

    pub fn identity(reg_in: Register, name_out: impl Into<String>) -> Self {
        let d = reg_in.dim;
        let out = Register::new(name_out, d);
        QuantumChannel { in_reg: reg_in, out_reg: out, kraus: vec![CMat::identity(d, d)], choi_cache: OnceLock::new() }
    }

    pub fn from_unitary(in_reg: Register, out_name: impl Into<String>, u: &CMat) -> Result<Self> {
        let d = in_reg.dim;
        let dev = max_abs(&(u.adjoint() * u - CMat::identity(d, d)));
        if dev > tol::UNIT {
            return Err(Error::NotUnitary { deviation: dev, tol: tol::UNIT });
        }
        QuantumChannel::new(in_reg, Register::new(out_name, d), vec![u.clone()])
    }

    /// ρ ↦ (1−p)ρ + p·I/d via the discrete Weyl (generalized Pauli) set.
    pub fn depolarizing(in_reg: Register, out_name: impl Into<String>, p: f64) -> Self {
        let d = in_reg.dim;
        let weyl = qcore::weyl_operators(d);
        let mut kraus = Vec::with_capacity(d * d);
        let d2 = (d * d) as f64;
        kraus.push(weyl[0].scale((1.0 - p + p / d2).sqrt()));
        for w in weyl.iter().skip(1) {
            kraus.push(w.scale(p.sqrt() / d as f64));
        }
        QuantumChannel { in_reg, out_reg: Register::new(out_name, d), kraus, choi_cache: OnceLock::new() }
    }

    /// Qubit amplitude damping with decay probability γ.
    pub fn amplitude_damping(in_reg: Register, out_name: impl Into<String>, gamma: f64) -> Self {
        let k0 = qcore::mat_from_rows(2, 2, &[cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx((1.0 - gamma).sqrt(), 0.0)]).unwrap();
        let k1 = qcore::mat_from_rows(2, 2, &[cx(0.0, 0.0), cx(gamma.sqrt(), 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap();
        QuantumChannel { in_reg, out_reg: Register::new(out_name, 2), kraus: vec![k0, k1], choi_cache: OnceLock::new() }
    }

    /// Discard the input and prepare `state` on the output register.
    pub fn replacer(in_reg: Register, out_name: impl Into<String>, state: &CMat) -> Result<Self> {
        let d_out = state.nrows();
        let (vals, vecs) = eig_hermitian_unchecked(state);
        let mut kraus = Vec::new();
        for (j, &mu) in vals.iter().enumerate() {
            if mu <= tol::EIG_ZERO {
                continue;
            }
            let w = vecs.column(j).into_owned().scale(mu.sqrt());
            for i in 0..in_reg.dim {
                let mut k = CMat::zeros(d_out, in_reg.dim);
                for r in 0..d_out {
                    k[(r, i)] = w[(r, 0)];
                }
                kraus.push(k);
            }
        }
        QuantumChannel::new(in_reg, Register::new(out_name, d_out), kraus)
    }

    /// The channel ρ ↦ self(UρU†).
    pub fn precompose_unitary(&self, u: &CMat) -> Result<QuantumChannel> {
        let d = self.in_reg.dim;
        let dev = max_abs(&(u.adjoint() * u - CMat::identity(d, d)));
        if dev > tol::UNIT {
            return Err(Error::NotUnitary { deviation: dev, tol: tol::UNIT });
        }
        let kraus = self.kraus.iter().map(|k| k * u).collect();
        Ok(QuantumChannel {
            in_reg: self.in_reg.clone(),
            out_reg: self.out_reg.clone(),
            kraus,
            choi_cache: OnceLock::new(),
        })
    }

    pub fn in_reg(&self) -> &Register {
        &self.in_reg
    }

    pub fn out_reg(&self) -> &Register {
        &self.out_reg
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Apply the Kraus sum to a bare matrix of matching dimension.
    pub fn apply_matrix(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.out_reg.dim, self.out_reg.dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Adjoint (Heisenberg-picture) action Σ K†XK on a bare matrix.
    pub fn apply_adjoint_matrix(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.in_reg.dim, self.in_reg.dim);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        out
    }

    /// Apply the channel to the named registers of `rho` (identity elsewhere).
    ///
    /// The targeted registers, taken in the order given, must multiply to the
    /// channel input dimension; they are replaced by the channel's output
    /// register at the position of the first target.
    pub fn apply(&self, rho: &DensityOperator, on: &[&str]) -> Result<DensityOperator> {
        let (regs, mat) = self.apply_raw(rho.registers(), rho.matrix(), on)?;
        DensityOperator::new(regs, mat)
    }

    pub(crate) fn apply_raw(
        &self,
        regs: &[Register],
        mat: &CMat,
        on: &[&str],
    ) -> Result<(Vec<Register>, CMat)> {
        let target_pos: Vec<usize> = on
            .iter()
            .map(|n| {
                regs.iter()
                    .position(|r| r.name == *n)
                    .ok_or_else(|| Error::UnknownRegister { name: (*n).into() })
            })
            .collect::<Result<_>>()?;
        let d_target: usize = target_pos.iter().map(|&p| regs[p].dim).product();
        if d_target != self.in_reg.dim {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "channel input dim {} but targeted registers give {}",
                    self.in_reg.dim, d_target
                ),
            });
        }
        let rest_pos: Vec<usize> = (0..regs.len()).filter(|p| !target_pos.contains(p)).collect();
        for &p in &rest_pos {
            if regs[p].name == self.out_reg.name {
                return Err(Error::RegisterClash { name: self.out_reg.name.clone() });
            }
        }
        let order: Vec<usize> = rest_pos.iter().chain(target_pos.iter()).copied().collect();
        let dims: Vec<usize> = regs.iter().map(|r| r.dim).collect();
        let permuted = permute_matrix(&dims, mat, &order);
        let d_rest: usize = rest_pos.iter().map(|&p| regs[p].dim).product();
        let i_rest = CMat::identity(d_rest, d_rest);
        let mut out = CMat::zeros(d_rest * self.out_reg.dim, d_rest * self.out_reg.dim);
        for k in &self.kraus {
            let full = i_rest.kronecker(k);
            out += &full * &permuted * full.adjoint();
        }
        // put the output register where the first target sat
        let insert_at = rest_pos.iter().filter(|&&p| p < target_pos[0]).count();
        let mut interim: Vec<Register> = rest_pos.iter().map(|&p| regs[p].clone()).collect();
        interim.push(self.out_reg.clone());
        let mut back_order: Vec<usize> = (0..rest_pos.len()).collect();
        back_order.insert(insert_at, rest_pos.len());
        let interim_dims: Vec<usize> = interim.iter().map(|r| r.dim).collect();
        let final_mat = permute_matrix(&interim_dims, &out, &back_order);
        let final_regs: Vec<Register> = back_order.iter().map(|&i| interim[i].clone()).collect();
        Ok((final_regs, final_mat))
    }

    /// Choi state (id ⊗ 𝓒)(Φ) on canonical registers `R` (reference, input
    /// dimension) and `B` (output dimension). Its marginal on `R` is I/d.
    pub fn choi(&self) -> &DensityOperator {
        self.choi_cache.get_or_init(|| {
            let d = self.in_reg.dim;
            let phi = DensityOperator::maximally_entangled(Register::new("R", d), Register::new("__in", d))
                .expect("equal dims");
            let (regs, mat) = self
                .apply_raw(phi.registers(), phi.matrix(), &["__in"])
                .expect("choi construction");
            let regs = regs
                .into_iter()
                .map(|r| if r.name == "R" { r } else { Register::new("B", r.dim) })
                .collect();
            DensityOperator::new(regs, mat).expect("choi state is valid")
        })
    }
}

/// Permute a matrix over a composite index: `new_regs[k] = old_regs[order[k]]`.
pub(crate) fn permute_matrix(dims: &[usize], mat: &CMat, order: &[usize]) -> CMat {
    if order.iter().enumerate().all(|(k, &p)| k == p) {
        return mat.clone();
    }
    let p = qcore::permutation_matrix(dims, order);
    &p * mat * p.adjoint()
}

/// A label-indexed family of channels sharing input and output dimensions.
#[derive(Debug, Clone)]
pub struct ChannelCollection {
    labels: Vec<String>,
    channels: Vec<QuantumChannel>,
}

impl ChannelCollection {
    pub fn new(members: Vec<(String, QuantumChannel)>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::AlphabetTooSmall { got: members.len() });
        }
        let d_in = members[0].1.in_reg().dim;
        let d_out = members[0].1.out_reg().dim;
        let mut labels = Vec::with_capacity(members.len());
        let mut channels = Vec::with_capacity(members.len());
        for (label, ch) in members {
            if labels.contains(&label) {
                return Err(Error::DuplicateLabel { label });
            }
            if ch.in_reg().dim != d_in || ch.out_reg().dim != d_out {
                return Err(Error::DimensionMismatch {
                    context: format!(
                        "channel {label} is {}→{}, collection is {}→{}",
                        ch.in_reg().dim,
                        ch.out_reg().dim,
                        d_in,
                        d_out
                    ),
                });
            }
            labels.push(label);
            channels.push(ch);
        }
        Ok(ChannelCollection { labels, channels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn in_dim(&self) -> usize {
        self.channels[0].in_reg().dim
    }

    pub fn out_dim(&self) -> usize {
        self.channels[0].out_reg().dim
    }

    pub fn get(&self, label: &str) -> Result<&QuantumChannel> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.channels[i])
            .ok_or_else(|| Error::UnknownRegister { name: format!("label {label}") })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &QuantumChannel)> {
        self.labels.iter().map(String::as_str).zip(self.channels.iter())
    }
}

/// Interaction channel 𝓕 on B'⊗E plus per-label environment states θˣ.
#[derive(Debug, Clone)]
pub struct EnvParametrization {
    env_reg: Register,
    in_dim: usize,
    interaction: QuantumChannel,
    env_states: Vec<(String, DensityOperator)>,
}

impl EnvParametrization {
    pub fn new(
        env_reg: Register,
        interaction: QuantumChannel,
        env_states: Vec<(String, DensityOperator)>,
    ) -> Result<Self> {
        if interaction.in_reg().dim % env_reg.dim != 0 {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "interaction input dim {} not divisible by environment dim {}",
                    interaction.in_reg().dim,
                    env_reg.dim
                ),
            });
        }
        let in_dim = interaction.in_reg().dim / env_reg.dim;
        if env_states.is_empty() {
            return Err(Error::BadDistribution { reason: "no environment states".into() });
        }
        for (i, (label, st)) in env_states.iter().enumerate() {
            if st.dim() != env_reg.dim {
                return Err(Error::DimensionMismatch {
                    context: format!("environment state {label} has dim {}, expected {}", st.dim(), env_reg.dim),
                });
            }
            if env_states[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::DuplicateLabel { label: label.clone() });
            }
        }
        Ok(EnvParametrization { env_reg, in_dim, interaction, env_states })
    }

    pub fn env_reg(&self) -> &Register {
        &self.env_reg
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.interaction.out_reg().dim
    }

    pub fn interaction(&self) -> &QuantumChannel {
        &self.interaction
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.env_states.iter().map(|(l, _)| l.as_str())
    }

    pub fn env_state(&self, label: &str) -> Result<&DensityOperator> {
        self.env_states
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::UnknownRegister { name: format!("label {label}") })
    }

    pub fn env_states(&self) -> &[(String, DensityOperator)] {
        &self.env_states
    }

    /// 𝓕(ρ ⊗ θˣ) for a bare input matrix ρ on B'.
    pub fn simulate(&self, label: &str, rho_in: &CMat) -> Result<CMat> {
        let theta = self.env_state(label)?;
        let joint = rho_in.kronecker(theta.matrix());
        Ok(self.interaction.apply_matrix(&joint))
    }

    /// The collection {ρ ↦ 𝓕(ρ⊗θˣ)} generated by this parametrization.
    /// It passes [`verify_env_parametrization`] by construction.
    pub fn induced_collection(&self, in_name: &str, out_name: &str) -> Result<ChannelCollection> {
        let mut members = Vec::new();
        for (label, theta) in &self.env_states {
            let (vals, vecs) = eig_hermitian_unchecked(theta.matrix());
            let mut kraus = Vec::new();
            for (j, &mu) in vals.iter().enumerate() {
                if mu <= tol::EIG_ZERO {
                    continue;
                }
                // (I_B' ⊗ √μ|w_j⟩) embeds B' into B'⊗E
                let w = vecs.column(j).into_owned().scale(mu.sqrt());
                let mut embed = CMat::zeros(self.in_dim * self.env_reg.dim, self.in_dim);
                for b in 0..self.in_dim {
                    for e in 0..self.env_reg.dim {
                        embed[(b * self.env_reg.dim + e, b)] = w[(e, 0)];
                    }
                }
                for f in self.interaction.kraus() {
                    kraus.push(f * &embed);
                }
            }
            members.push((
                label.clone(),
                QuantumChannel::new(
                    Register::new(in_name, self.in_dim),
                    Register::new(out_name, self.out_dim()),
                    kraus,
                )?,
            ));
        }
        ChannelCollection::new(members)
    }
}

/// Fixed probe σ on R⊗B' and seizing channel 𝓢 on R⊗B recovering θˣ.
#[derive(Debug, Clone)]
pub struct SeizureData {
    pub probe: DensityOperator,
    pub seizer: QuantumChannel,
}

/// Outcome of a per-label simulation-identity check.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub per_label: Vec<(String, f64)>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

impl SimulationReport {
    fn from_deviations(per_label: Vec<(String, f64)>, tol: f64) -> Self {
        let max_deviation = per_label.iter().map(|(_, d)| *d).fold(0.0, f64::max);
        SimulationReport { per_label, max_deviation, tol, pass: max_deviation <= tol }
    }
}

/// Check 𝓔ˣ(ρ) = 𝓕(ρ ⊗ θˣ) for every label on a spanning set of inputs.
///
/// Deviations are trace norms on the d² probe states; by linearity a pass
/// certifies the identity on all states up to a dimension factor, which is
/// why [`tol::SIM`] is looser than the constructor tolerances.
pub fn verify_env_parametrization(
    coll: &ChannelCollection,
    env: &EnvParametrization,
) -> Result<SimulationReport> {
    if env.in_dim != coll.in_dim() || env.out_dim() != coll.out_dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "collection {}→{}, parametrization {}→{}",
                coll.in_dim(),
                coll.out_dim(),
                env.in_dim,
                env.out_dim()
            ),
        });
    }
    let probes = probe_states(coll.in_dim());
    let mut per_label = Vec::with_capacity(coll.len());
    for (label, ch) in coll.iter() {
        let mut worst = 0.0f64;
        for rho in &probes {
            let direct = ch.apply_matrix(rho);
            let simulated = env.simulate(label, rho)?;
            worst = worst.max(trace_norm_hermitian(&(direct - simulated)));
        }
        per_label.push((label.to_string(), worst));
    }
    Ok(SimulationReport::from_deviations(per_label, tol::SIM))
}

/// Check θˣ = 𝓢(𝓔ˣ(σ)) for every label (the seizure identity).
pub fn verify_seizable(
    coll: &ChannelCollection,
    env: &EnvParametrization,
    seize: &SeizureData,
) -> Result<SimulationReport> {
    let probe_regs = seize.probe.registers();
    if probe_regs.len() != 2 {
        return Err(Error::DimensionMismatch {
            context: format!("seizure probe must have two registers (R, B'), got {}", probe_regs.len()),
        });
    }
    if probe_regs[1].dim != coll.in_dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "probe input register dim {} but collection input dim {}",
                probe_regs[1].dim,
                coll.in_dim()
            ),
        });
    }
    let r_dim = probe_regs[0].dim;
    if seize.seizer.in_reg().dim != r_dim * coll.out_dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "seizer input dim {} but R⊗B gives {}",
                seize.seizer.in_reg().dim,
                r_dim * coll.out_dim()
            ),
        });
    }
    if seize.seizer.out_reg().dim != env.env_reg.dim {
        return Err(Error::DimensionMismatch {
            context: format!(
                "seizer output dim {} but environment dim {}",
                seize.seizer.out_reg().dim,
                env.env_reg.dim
            ),
        });
    }
    let r_name = probe_regs[0].name.clone();
    let in_name = probe_regs[1].name.clone();
    let probe = seize
        .probe
        .rename_register(&r_name, "__seize_r")?
        .rename_register(&in_name, "__seize_in")?;
    let mut per_label = Vec::with_capacity(coll.len());
    for (label, ch) in coll.iter() {
        let (regs, mat) = ch.apply_raw(probe.registers(), probe.matrix(), &["__seize_in"])?;
        let names: Vec<&str> = regs.iter().map(|r| r.name.as_str()).collect();
        let (_, seized) = seize.seizer.apply_raw(&regs, &mat, &names)?;
        let theta = env.env_state(label)?;
        per_label.push((label.to_string(), trace_norm_hermitian(&(seized - theta.matrix()))));
    }
    Ok(SimulationReport::from_deviations(per_label, tol::SIM))
}

/// The classical–quantum state Σ p(x)|x⟩⟨x| ⊗ θˣ on X⊗E, with X indexed in
/// the parametrization's label order.
pub fn cq_environment_state(env: &EnvParametrization, prior: &[f64]) -> Result<DensityOperator> {
    let n = env.env_states.len();
    if prior.len() != n {
        return Err(Error::BadDistribution {
            reason: format!("prior has {} entries for {} labels", prior.len(), n),
        });
    }
    if prior.iter().any(|&p| p < 0.0) {
        return Err(Error::BadDistribution { reason: "negative probability".into() });
    }
    let sum: f64 = prior.iter().sum();
    if (sum - 1.0).abs() > tol::PROB {
        return Err(Error::BadDistribution { reason: format!("prior sums to {sum}") });
    }
    let de = env.env_reg.dim;
    let mut mat = CMat::zeros(n * de, n * de);
    for (x, ((_, theta), &p)) in env.env_states.iter().zip(prior).enumerate() {
        for i in 0..de {
            for j in 0..de {
                mat[(x * de + i, x * de + j)] = theta.matrix()[(i, j)].scale(p);
            }
        }
    }
    DensityOperator::new(vec![Register::new("X", n), Register::new("E", de)], mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn qubit(name: &str) -> Register {
        Register::new(name, 2)
    }

    fn basis_matrix(d: usize, i: usize) -> CMat {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = cx(1.0, 0.0);
        m
    }

    fn diag(entries: &[f64]) -> CMat {
        let d = entries.len();
        let mut m = CMat::zeros(d, d);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = cx(e, 0.0);
        }
        m
    }

    #[test]
    fn identity_channel_preserves_state() {
        let ch = QuantumChannel::identity(qubit("Bp"), "B");
        let rho = random::density_operator(&mut random::rng(1), vec![qubit("Bp")]);
        let out = ch.apply(&rho, &["Bp"]).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-14);
        assert_eq!(out.registers()[0].name, "B");
    }

    #[test]
    fn fully_depolarizing_sends_to_mixed() {
        let ch = QuantumChannel::depolarizing(qubit("Bp"), "B", 1.0);
        let rho = DensityOperator::new(vec![qubit("Bp")], basis_matrix(2, 0)).unwrap();
        let out = ch.apply(&rho, &["Bp"]).unwrap();
        assert!(max_abs(&(out.matrix() - CMat::identity(2, 2).scale(0.5))) < 1e-12);
    }

    #[test]
    fn amplitude_damping_matches_kraus_sum() {
        let gamma = 0.5;
        let ch = QuantumChannel::amplitude_damping(qubit("Bp"), "B", gamma);
        let one = DensityOperator::new(vec![qubit("Bp")], basis_matrix(2, 1)).unwrap();
        let out = ch.apply(&one, &["Bp"]).unwrap();
        // K₀|1⟩⟨1|K₀† + K₁|1⟩⟨1|K₁† with the damping Kraus pair, by hand
        let expect = diag(&[gamma, 1.0 - gamma]);
        assert!(max_abs(&(out.matrix() - expect)) < 1e-14);
    }

    #[test]
    fn apply_on_subsystem_keeps_others() {
        let mut rng = random::rng(2);
        let rho = random::density_operator(&mut rng, vec![qubit("Raux"), qubit("Bp")]);
        let ch = QuantumChannel::identity(qubit("Bp"), "B");
        let out = ch.apply(&rho, &["Bp"]).unwrap();
        assert_eq!(out.registers()[0].name, "Raux");
        assert_eq!(out.registers()[1].name, "B");
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-13);
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let ch = QuantumChannel::identity(Register::new("Bp", 3), "B");
        let rho = DensityOperator::maximally_mixed(vec![qubit("Bp")]);
        assert!(matches!(ch.apply(&rho, &["Bp"]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_non_trace_preserving_kraus() {
        let k = CMat::identity(2, 2).scale(0.9f64.sqrt());
        assert!(matches!(
            QuantumChannel::new(qubit("Bp"), qubit("B"), vec![k]),
            Err(Error::NotCptp { .. })
        ));
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let ch = QuantumChannel::identity(qubit("Bp"), "B");
        let choi = ch.choi();
        let phi = DensityOperator::maximally_entangled(qubit("R"), qubit("B")).unwrap();
        assert!(max_abs(&(choi.matrix() - phi.matrix())) < 1e-14);
        let marginal = choi.partial_trace(&["R"]).unwrap();
        assert!(max_abs(&(marginal.matrix() - CMat::identity(2, 2).scale(0.5))) < tol::NUM);
    }

    #[test]
    fn choi_of_fully_depolarizing_is_flat() {
        let ch = QuantumChannel::depolarizing(qubit("Bp"), "B", 1.0);
        assert!(max_abs(&(ch.choi().matrix() - CMat::identity(4, 4).scale(0.25))) < 1e-12);
    }

    #[test]
    fn choi_spectrum_of_depolarizing_half() {
        // weight 1−3p/4 on Φ and p/4 on each other Bell projector
        let ch = QuantumChannel::depolarizing(qubit("Bp"), "B", 0.5);
        let vals = ch.choi().eigenvalues();
        let expect = [0.625, 0.125, 0.125, 0.125];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn choi_is_linear_in_the_channel() {
        let mut rng = random::rng(3);
        for _ in 0..10 {
            let k1 = random::kraus_list(&mut rng, 2, 2, 3);
            let k2 = random::kraus_list(&mut rng, 2, 2, 3);
            let c1 = QuantumChannel::new(qubit("Bp"), qubit("B"), k1.clone()).unwrap();
            let c2 = QuantumChannel::new(qubit("Bp"), qubit("B"), k2.clone()).unwrap();
            let lam = 0.3f64;
            let mut mixed_kraus: Vec<CMat> = k1.iter().map(|k| k.scale(lam.sqrt())).collect();
            mixed_kraus.extend(k2.iter().map(|k| k.scale((1.0 - lam).sqrt())));
            let mixed = QuantumChannel::new(qubit("Bp"), qubit("B"), mixed_kraus).unwrap();
            let blend = c1.choi().matrix().scale(lam) + c2.choi().matrix().scale(1.0 - lam);
            assert!(max_abs(&(mixed.choi().matrix() - blend)) <= 1e-9);
        }
    }

    #[test]
    fn apply_agrees_with_choi_based_application() {
        // 𝓒(ρ) = d·Tr_R[(ρᵀ⊗I)J] gives an independent route through the Choi state
        let mut rng = random::rng(4);
        for _ in 0..10 {
            let kraus = random::kraus_list(&mut rng, 2, 3, 4);
            let ch = QuantumChannel::new(qubit("Bp"), Register::new("B", 3), kraus).unwrap();
            let rho = random::density_operator(&mut rng, vec![qubit("Bp")]);
            let direct = ch.apply(&rho, &["Bp"]).unwrap();
            let j = ch.choi();
            let big = rho.matrix().transpose().kronecker(&CMat::identity(3, 3));
            let prod = DensityOperator::unchecked(j.registers().to_vec(), &big * j.matrix());
            let via_choi = prod.partial_trace(&["B"]).unwrap();
            assert!(max_abs(&(direct.matrix() - via_choi.matrix().scale(2.0))) < 1e-8);
        }
    }

    fn replacer_env(theta0: &[f64], theta1: &[f64]) -> (ChannelCollection, EnvParametrization) {
        // 𝓕 discards B' and passes E through, so 𝓔ˣ(ρ) = θˣ exactly
        let e = qubit("E");
        let mut kraus = Vec::new();
        for i in 0..2 {
            let mut k = CMat::zeros(2, 4);
            for eidx in 0..2 {
                k[(eidx, i * 2 + eidx)] = cx(1.0, 0.0);
            }
            kraus.push(k);
        }
        let interaction = QuantumChannel::new(Register::new("BpE", 4), qubit("B"), kraus).unwrap();
        let states = vec![
            ("x0".to_string(), DensityOperator::new(vec![e.clone()], diag(theta0)).unwrap()),
            ("x1".to_string(), DensityOperator::new(vec![e.clone()], diag(theta1)).unwrap()),
        ];
        let env = EnvParametrization::new(e, interaction, states).unwrap();
        let coll = ChannelCollection::new(vec![
            ("x0".to_string(), QuantumChannel::replacer(qubit("Bp"), "B", &diag(theta0)).unwrap()),
            ("x1".to_string(), QuantumChannel::replacer(qubit("Bp"), "B", &diag(theta1)).unwrap()),
        ])
        .unwrap();
        (coll, env)
    }

    #[test]
    fn replacer_collection_verifies_exactly() {
        let (coll, env) = replacer_env(&[0.7, 0.3], &[0.2, 0.8]);
        let report = verify_env_parametrization(&coll, &env).unwrap();
        assert!(report.pass);
        assert!(report.max_deviation < 1e-12);
    }

    #[test]
    fn swapped_environment_states_fail_verification() {
        let (coll, _) = replacer_env(&[1.0, 0.0], &[0.0, 1.0]);
        let (_, env_swapped) = replacer_env(&[0.0, 1.0], &[1.0, 0.0]);
        let report = verify_env_parametrization(&coll, &env_swapped).unwrap();
        assert!(!report.pass);
        assert!(report.max_deviation >= 0.1);
    }

    #[test]
    fn induced_collection_is_self_consistent() {
        let mut rng = random::rng(5);
        for _ in 0..10 {
            let kraus = random::kraus_list(&mut rng, 4, 2, 4);
            let interaction = QuantumChannel::new(Register::new("BpE", 4), qubit("B"), kraus).unwrap();
            let states = vec![
                ("x0".to_string(), random::density_operator(&mut rng, vec![qubit("E")])),
                ("x1".to_string(), random::density_operator(&mut rng, vec![qubit("E")])),
            ];
            let env = EnvParametrization::new(qubit("E"), interaction, states).unwrap();
            let coll = env.induced_collection("Bp", "B").unwrap();
            let report = verify_env_parametrization(&coll, &env).unwrap();
            assert!(report.pass, "max deviation {}", report.max_deviation);
        }
    }

    #[test]
    fn replacer_seizure_recovers_environment_states() {
        let (coll, env) = replacer_env(&[0.7, 0.3], &[0.2, 0.8]);
        // 𝓢 discards R and relabels B as E
        let mut kraus = Vec::new();
        for r in 0..2 {
            let mut k = CMat::zeros(2, 4);
            for b in 0..2 {
                k[(b, r * 2 + b)] = cx(1.0, 0.0);
            }
            kraus.push(k);
        }
        let seizer = QuantumChannel::new(Register::new("RB", 4), qubit("E"), kraus).unwrap();
        let probe = random::density_operator(&mut random::rng(6), vec![qubit("Ridler"), qubit("Bp")]);
        let seize = SeizureData { probe, seizer };
        let report = verify_seizable(&coll, &env, &seize).unwrap();
        assert!(report.pass);
        assert!(report.max_deviation < 1e-12);
        for (_, dev) in &report.per_label {
            assert!(*dev <= tol::SIM);
        }
    }

    #[test]
    fn constant_seizer_fails_when_states_differ() {
        let (coll, env) = replacer_env(&[0.7, 0.3], &[0.2, 0.8]);
        let seizer =
            QuantumChannel::replacer(Register::new("RB", 4), "E", &CMat::identity(2, 2).scale(0.5)).unwrap();
        let probe = random::density_operator(&mut random::rng(7), vec![qubit("Ridler"), qubit("Bp")]);
        let seize = SeizureData { probe, seizer };
        let report = verify_seizable(&coll, &env, &seize).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn cq_state_block_structure() {
        let (_, env) = replacer_env(&[0.7, 0.3], &[0.2, 0.8]);
        let cq = cq_environment_state(&env, &[0.7, 0.3]).unwrap();
        let expect = [0.49, 0.21, 0.06, 0.24];
        for (i, &e) in expect.iter().enumerate() {
            assert!((cq.matrix()[(i, i)].re - e).abs() < 1e-14);
        }
        let point = cq_environment_state(&env, &[1.0, 0.0]).unwrap();
        assert!((point.matrix()[(0, 0)].re - 0.7).abs() < 1e-14);
        assert!((point.matrix()[(2, 2)].re).abs() < 1e-14);
        // uniform prior over orthogonal pure environment states
        let (_, env2) = replacer_env(&[1.0, 0.0], &[0.0, 1.0]);
        let u = cq_environment_state(&env2, &[0.5, 0.5]).unwrap();
        let expect2 = [0.5, 0.0, 0.0, 0.5];
        for (i, &e) in expect2.iter().enumerate() {
            assert!((u.matrix()[(i, i)].re - e).abs() < 1e-14);
        }
        assert!(matches!(cq_environment_state(&env, &[0.4, 0.4]), Err(Error::BadDistribution { .. })));
    }
}
