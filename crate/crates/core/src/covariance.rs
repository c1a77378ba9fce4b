//! Group representations, covariance and one-design checks, and jointly
//! covariant collection construction.
//!
//! A channel 𝓖 is covariant with respect to paired unitaries (U(g), V(g))
//! when 𝓖(U(g)ρU†(g)) = V(g)𝓖(ρ)V†(g) for all g and ρ. When the input
//! representation is also a unitary one-design, the family {𝓖∘𝓤ᵍ} is a
//! jointly covariant collection, and it can be simulated from the member
//! Choi states by a fixed measure-and-correct interaction channel; see
//! [`covariant_simulation`].

use crate::channels::{
    verify_env_parametrization, ChannelCollection, EnvParametrization, QuantumChannel, SeizureData,
    SimulationReport,
};
use crate::qcore::{
    max_abs, probe_states, tol, trace_norm_hermitian, weyl_operators, CMat, DensityOperator,
    Register,
};
use crate::{Error, Result};

/// Projective unitary representations g ↦ U(g) on the channel input and
/// g ↦ V(g) on the channel output, indexed 0..|G|.
///
/// The multiplication table is optional; without it group closure is not
/// verified and composition properties are skipped — the twirl and
/// covariance checks only need the representation images.
#[derive(Debug, Clone)]
pub struct GroupRepresentation {
    in_unitaries: Vec<CMat>,
    out_unitaries: Vec<CMat>,
    table: Option<Vec<Vec<usize>>>,
}

impl GroupRepresentation {
    pub fn new(in_unitaries: Vec<CMat>, out_unitaries: Vec<CMat>, table: Option<Vec<Vec<usize>>>) -> Result<Self> {
        if in_unitaries.is_empty() || in_unitaries.len() != out_unitaries.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "representation needs equally many input and output unitaries, got {} and {}",
                    in_unitaries.len(),
                    out_unitaries.len()
                ),
            });
        }
        for u in in_unitaries.iter().chain(out_unitaries.iter()) {
            let d = u.nrows();
            if u.ncols() != d {
                return Err(Error::DimensionMismatch { context: "unitaries must be square".into() });
            }
            let dev = max_abs(&(u.adjoint() * u - CMat::identity(d, d)));
            if dev > tol::UNIT {
                return Err(Error::NotUnitary { deviation: dev, tol: tol::UNIT });
            }
        }
        let d_in = in_unitaries[0].nrows();
        let d_out = out_unitaries[0].nrows();
        if in_unitaries.iter().any(|u| u.nrows() != d_in) || out_unitaries.iter().any(|u| u.nrows() != d_out) {
            return Err(Error::DimensionMismatch { context: "unitaries have mixed dimensions".into() });
        }
        let id_in = CMat::identity(d_in, d_in);
        let id_out = CMat::identity(d_out, d_out);
        let has_identity = in_unitaries
            .iter()
            .zip(&out_unitaries)
            .any(|(u, v)| max_abs(&(u - &id_in)) <= tol::UNIT && max_abs(&(v - &id_out)) <= tol::UNIT);
        if !has_identity {
            return Err(Error::MissingIdentity);
        }
        if let Some(t) = &table {
            let n = in_unitaries.len();
            if t.len() != n || t.iter().any(|row| row.len() != n || row.iter().any(|&e| e >= n)) {
                return Err(Error::DimensionMismatch { context: "multiplication table malformed".into() });
            }
        }
        Ok(GroupRepresentation { in_unitaries, out_unitaries, table })
    }

    /// Same unitaries on input and output.
    pub fn symmetric(unitaries: Vec<CMat>, table: Option<Vec<Vec<usize>>>) -> Result<Self> {
        GroupRepresentation::new(unitaries.clone(), unitaries, table)
    }

    /// The discrete Weyl group on dimension d (the Pauli group for d = 2),
    /// with its multiplication table modulo phases.
    pub fn weyl(d: usize) -> Self {
        let ops = weyl_operators(d);
        let n = d * d;
        let mut table = vec![vec![0; n]; n];
        for (g, row) in table.iter_mut().enumerate() {
            let (a1, b1) = (g / d, g % d);
            for (h, entry) in row.iter_mut().enumerate() {
                let (a2, b2) = (h / d, h % d);
                *entry = ((a1 + a2) % d) * d + (b1 + b2) % d;
            }
        }
        GroupRepresentation::symmetric(ops, Some(table)).expect("weyl operators are unitary")
    }

    /// The qubit Pauli conjugation group {I, Z, X, XZ}.
    pub fn pauli() -> Self {
        GroupRepresentation::weyl(2)
    }

    pub fn len(&self) -> usize {
        self.in_unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_unitaries.is_empty()
    }

    pub fn in_dim(&self) -> usize {
        self.in_unitaries[0].nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.out_unitaries[0].nrows()
    }

    pub fn in_unitary(&self, g: usize) -> &CMat {
        &self.in_unitaries[g]
    }

    pub fn out_unitary(&self, g: usize) -> &CMat {
        &self.out_unitaries[g]
    }

    pub fn table(&self) -> Option<&Vec<Vec<usize>>> {
        self.table.as_ref()
    }

    /// Index of the identity element (present by construction).
    pub fn identity_index(&self) -> usize {
        let id_in = CMat::identity(self.in_dim(), self.in_dim());
        let id_out = CMat::identity(self.out_dim(), self.out_dim());
        self.in_unitaries
            .iter()
            .zip(&self.out_unitaries)
            .position(|(u, v)| max_abs(&(u - &id_in)) <= tol::UNIT && max_abs(&(v - &id_out)) <= tol::UNIT)
            .expect("identity element checked at construction")
    }
}

/// Per-element deviation report for a covariance check.
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    pub per_element: Vec<f64>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// One-design report; `choi_deviation` is the independent cross-check that
/// the twirl's Choi state equals that of the fully depolarizing channel.
#[derive(Debug, Clone)]
pub struct OneDesignReport {
    pub max_deviation: f64,
    pub choi_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Check 𝓖(U(g)ρU†(g)) = V(g)𝓖(ρ)V†(g) for every g on a spanning input set.
pub fn is_covariant(ch: &QuantumChannel, rep: &GroupRepresentation) -> Result<CovarianceReport> {
    if rep.in_dim() != ch.in_reg().dim || rep.out_dim() != ch.out_reg().dim {
        return Err(Error::DimensionMismatch {
            context: format!(
                "representation acts on {}→{}, channel is {}→{}",
                rep.in_dim(),
                rep.out_dim(),
                ch.in_reg().dim,
                ch.out_reg().dim
            ),
        });
    }
    let probes = probe_states(ch.in_reg().dim);
    let mut per_element = Vec::with_capacity(rep.len());
    for g in 0..rep.len() {
        let u = rep.in_unitary(g);
        let v = rep.out_unitary(g);
        let mut worst = 0.0f64;
        for rho in &probes {
            let lhs = ch.apply_matrix(&(u * rho * u.adjoint()));
            let rhs = v * ch.apply_matrix(rho) * v.adjoint();
            worst = worst.max(trace_norm_hermitian(&(lhs - rhs)));
        }
        per_element.push(worst);
    }
    let max_deviation = per_element.iter().copied().fold(0.0, f64::max);
    Ok(CovarianceReport { per_element, max_deviation, tol: tol::COV, pass: max_deviation <= tol::COV })
}

/// Check that the input representation twirls every state to I/d.
pub fn is_one_design(rep: &GroupRepresentation) -> OneDesignReport {
    let d = rep.in_dim();
    let flat = CMat::identity(d, d).scale(1.0 / d as f64);
    let mut max_deviation = 0.0f64;
    for rho in probe_states(d) {
        let mut avg = CMat::zeros(d, d);
        for g in 0..rep.len() {
            let u = rep.in_unitary(g);
            avg += u * &rho * u.adjoint();
        }
        avg = avg.scale(1.0 / rep.len() as f64);
        max_deviation = max_deviation.max(trace_norm_hermitian(&(avg - &flat)));
    }
    // cross-check: the twirl's Choi state must match the fully depolarizing one
    let scale = 1.0 / (rep.len() as f64).sqrt();
    let kraus: Vec<CMat> = (0..rep.len()).map(|g| rep.in_unitary(g).scale(scale)).collect();
    let choi_deviation = match QuantumChannel::new(Register::new("__in", d), Register::new("__out", d), kraus) {
        Ok(twirl) => {
            let flat_choi = CMat::identity(d * d, d * d).scale(1.0 / (d * d) as f64);
            trace_norm_hermitian(&(twirl.choi().matrix() - flat_choi))
        }
        Err(_) => f64::INFINITY,
    };
    OneDesignReport { max_deviation, choi_deviation, tol: tol::COV, pass: max_deviation <= tol::COV }
}

/// The jointly covariant collection {𝓖∘𝓤ᵍ}_{g∈G} with labels `g0`, `g1`, ...
///
/// Requires `base` covariant with respect to `rep` and `rep` a one-design.
pub fn build_jointly_covariant(base: &QuantumChannel, rep: &GroupRepresentation) -> Result<ChannelCollection> {
    let cov = is_covariant(base, rep)?;
    if !cov.pass {
        return Err(Error::NotCovariant { deviation: cov.max_deviation });
    }
    let od = is_one_design(rep);
    if !od.pass {
        return Err(Error::NotOneDesign { deviation: od.max_deviation });
    }
    let members = (0..rep.len())
        .map(|g| Ok((format!("g{g}"), base.precompose_unitary(rep.in_unitary(g))?)))
        .collect::<Result<Vec<_>>>()?;
    ChannelCollection::new(members)
}

/// A jointly covariant collection packaged with its environment
/// parametrization and seizure data.
#[derive(Debug, Clone)]
pub struct CovariantSimulation {
    pub collection: ChannelCollection,
    pub env: EnvParametrization,
    pub seizure: SeizureData,
    pub verification: SimulationReport,
}

/// Build the measure-and-correct simulation of a jointly covariant
/// collection from its Choi states.
///
/// The environment state for label g is the Choi state of 𝓖∘𝓤ᵍ on E = R⊗B.
/// The interaction channel measures the input together with R using the
/// one-design POVM {(d²/|G|)(U(g)⊗I)Φ(U†(g)⊗I)} and applies the output
/// correction V(g) to B. The seizure probe is Φ itself and the seizer is the
/// identity relabelling R⊗B as E. The construction is validated numerically
/// on a spanning input set; it is exact when the group multiplication
/// commutes up to phases (as for the Weyl groups), and the builder fails
/// with `NotParametrized` otherwise.
pub fn covariant_simulation(base: &QuantumChannel, rep: &GroupRepresentation) -> Result<CovariantSimulation> {
    let collection = build_jointly_covariant(base, rep)?;
    let d_in = base.in_reg().dim;
    let d_out = base.out_reg().dim;
    let d_env = d_in * d_out;

    let mut env_states = Vec::with_capacity(rep.len());
    for (label, member) in collection.iter() {
        let choi = member.choi().merge_registers(&["R", "B"], "E")?;
        env_states.push((label.to_string(), choi));
    }

    // Kraus K_g = V(g) (⟨m_g| ⊗ I_B) on input order [B', R, B_out], with
    // |m_g⟩ = (d/√|G|)(U(g)⊗I)|Φ⟩ the scaled one-design POVM vector
    let amp = (d_in as f64).sqrt() / (rep.len() as f64).sqrt();
    let mut kraus = Vec::with_capacity(rep.len());
    for g in 0..rep.len() {
        let u = rep.in_unitary(g);
        let v = rep.out_unitary(g);
        let mut m_g = CMat::zeros(d_in * d_in, 1);
        for i in 0..d_in {
            for b in 0..d_in {
                m_g[(b * d_in + i, 0)] = u[(b, i)].scale(amp);
            }
        }
        let mut k = CMat::zeros(d_out, d_in * d_in * d_out);
        for o in 0..d_out {
            for br in 0..d_in * d_in {
                for bo in 0..d_out {
                    k[(o, br * d_out + bo)] = v[(o, bo)] * m_g[(br, 0)].conj();
                }
            }
        }
        kraus.push(k);
    }
    let interaction = QuantumChannel::new(
        Register::new("BpE", d_in * d_env),
        Register::new("B", d_out),
        kraus,
    )?;
    let env = EnvParametrization::new(Register::new("E", d_env), interaction, env_states)?;

    let verification = verify_env_parametrization(&collection, &env)?;
    if !verification.pass {
        return Err(Error::NotParametrized { deviation: verification.max_deviation });
    }

    let probe = DensityOperator::maximally_entangled(Register::new("R", d_in), Register::new("Bp", d_in))?;
    let seizer = QuantumChannel::identity(Register::new("RB", d_env), "E");
    Ok(CovariantSimulation { collection, env, seizure: SeizureData { probe, seizer }, verification })
}
