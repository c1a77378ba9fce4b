//! Conversions from file formats to core types, with validation.

use rebound_core::channels::{ChannelCollection, EnvParametrization, QuantumChannel, SeizureData};
use rebound_core::covariance::GroupRepresentation;
use rebound_core::protocol::{Codebook, ReboundProtocol};
use rebound_core::qcore::Register;
use rebound_core::{CMat, DensityOperator};

use crate::formats::{
    to_cmat, CodebookFile, CollectionFile, EnvFile, GroupFile, ProtocolFile, SeizeFile, StateFile,
};
use crate::CliError;

pub fn kraus_list(raw: &[crate::formats::Matrix]) -> Result<Vec<CMat>, CliError> {
    raw.iter()
        .map(|m| to_cmat(m).map_err(CliError::parse))
        .collect()
}

pub fn collection(file: &CollectionFile) -> Result<ChannelCollection, CliError> {
    if file.version != 1 {
        return Err(CliError::parse(format!("unsupported version {}", file.version)));
    }
    let mut members = Vec::with_capacity(file.channels.len());
    for entry in &file.channels {
        let kraus = kraus_list(&entry.kraus)?;
        let ch = QuantumChannel::new(
            Register::new("Bp", file.in_dim),
            Register::new("B", file.out_dim),
            kraus,
        )
        .map_err(|e| CliError::validation(format!("channel {}: {e}", entry.label)))?;
        members.push((entry.label.clone(), ch));
    }
    ChannelCollection::new(members).map_err(CliError::validation_err)
}

pub fn group(file: &GroupFile) -> Result<GroupRepresentation, CliError> {
    let ins = kraus_list(&file.unitaries_in)?;
    let outs = match &file.unitaries_out {
        Some(raw) => kraus_list(raw)?,
        None => ins.clone(),
    };
    GroupRepresentation::new(ins, outs, file.table.clone()).map_err(CliError::validation_err)
}

pub fn state(file: &StateFile) -> Result<DensityOperator, CliError> {
    let mat = to_cmat(&file.matrix).map_err(CliError::parse)?;
    let names: Vec<String> = match &file.names {
        Some(n) => {
            if n.len() != file.dims.len() {
                return Err(CliError::parse("names and dims length mismatch".to_string()));
            }
            n.clone()
        }
        None => (0..file.dims.len()).map(|i| format!("q{i}")).collect(),
    };
    let regs = names
        .into_iter()
        .zip(&file.dims)
        .map(|(n, &d)| Register::new(n, d))
        .collect();
    DensityOperator::new(regs, mat).map_err(CliError::validation_err)
}

pub fn env(file: &EnvFile) -> Result<EnvParametrization, CliError> {
    let kraus = kraus_list(&file.interaction)?;
    if kraus.is_empty() {
        return Err(CliError::parse("interaction needs Kraus operators".to_string()));
    }
    let in_total = kraus[0].ncols();
    let out_dim = kraus[0].nrows();
    let interaction = QuantumChannel::new(
        Register::new("BpE", in_total),
        Register::new("B", out_dim),
        kraus,
    )
    .map_err(CliError::validation_err)?;
    let mut states = Vec::with_capacity(file.states.len());
    for s in &file.states {
        let mat = to_cmat(&s.matrix).map_err(CliError::parse)?;
        let state = DensityOperator::new(vec![Register::new("E", file.env_dim)], mat)
            .map_err(|e| CliError::validation(format!("environment state {}: {e}", s.label)))?;
        states.push((s.label.clone(), state));
    }
    EnvParametrization::new(Register::new("E", file.env_dim), interaction, states)
        .map_err(CliError::validation_err)
}

pub fn seize(file: &SeizeFile, env_dim: usize) -> Result<SeizureData, CliError> {
    let probe_mat = to_cmat(&file.probe).map_err(CliError::parse)?;
    let side = probe_mat.nrows();
    if file.r_dim == 0 || side % file.r_dim != 0 {
        return Err(CliError::parse(format!(
            "probe side {side} not divisible by r_dim {}",
            file.r_dim
        )));
    }
    let probe = DensityOperator::new(
        vec![Register::new("R", file.r_dim), Register::new("Bp", side / file.r_dim)],
        probe_mat,
    )
    .map_err(CliError::validation_err)?;
    let kraus = kraus_list(&file.seizer)?;
    if kraus.is_empty() {
        return Err(CliError::parse("seizer needs Kraus operators".to_string()));
    }
    let in_dim = kraus[0].ncols();
    let seizer = QuantumChannel::new(
        Register::new("RB", in_dim),
        Register::new("E", env_dim),
        kraus,
    )
    .map_err(CliError::validation_err)?;
    Ok(SeizureData { probe, seizer })
}

pub fn codebook(file: &CodebookFile) -> Result<Codebook, CliError> {
    let entries = file.words.iter().map(|(m, w)| (m.clone(), w.clone())).collect();
    Codebook::new(entries).map_err(CliError::validation_err)
}

pub fn protocol(file: &ProtocolFile, in_dim: usize) -> Result<ReboundProtocol, CliError> {
    let initial_mat = to_cmat(&file.initial_state).map_err(CliError::parse)?;
    let side = initial_mat.nrows();
    if in_dim == 0 || side % in_dim != 0 {
        return Err(CliError::validation(format!(
            "initial state side {side} not divisible by collection input dim {in_dim}"
        )));
    }
    let initial = DensityOperator::new(
        vec![Register::new("M", side / in_dim), Register::new("P", in_dim)],
        initial_mat,
    )
    .map_err(CliError::validation_err)?;
    if file.adaptive.len() + 1 != file.n {
        return Err(CliError::validation(format!(
            "protocol declares n = {} but has {} adaptive stages",
            file.n,
            file.adaptive.len()
        )));
    }
    let mut adaptive = Vec::with_capacity(file.adaptive.len());
    for (i, stage) in file.adaptive.iter().enumerate() {
        let kraus = kraus_list(stage)?;
        if kraus.is_empty() {
            return Err(CliError::validation(format!("adaptive stage {i} has no Kraus operators")));
        }
        let (rows, cols) = (kraus[0].nrows(), kraus[0].ncols());
        let ch = QuantumChannel::new(
            Register::new(format!("A{i}in"), cols),
            Register::new(format!("A{i}out"), rows),
            kraus,
        )
        .map_err(|e| CliError::validation(format!("adaptive stage {i}: {e}")))?;
        adaptive.push(ch);
    }
    let povm = kraus_list(&file.povm)?;
    ReboundProtocol::new(initial, adaptive, povm).map_err(CliError::validation_err)
}
