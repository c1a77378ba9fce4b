//! Implementations of the CLI subcommands. Each returns the `results` JSON
//! plus an exit code; parse failures surface as `CliError` (exit 2) and
//! validation failures either as structured fail results (exit 1) or
//! `CliError` with exit 1.

use std::path::Path;

use serde_json::{json, Value};

use rebound_core::capacity::{
    covariant_collection_capacity, finite_blocklength_bound, holevo_upper_bound, seizable_capacity,
    CapacityReport, FiniteBlocklengthOptions, PriorMode, ThetaHatStrategy,
};
use rebound_core::channels::{
    cq_environment_state, verify_env_parametrization, verify_seizable, ChannelCollection,
    EnvParametrization, QuantumChannel, SimulationReport,
};
use rebound_core::covariance::{
    build_jointly_covariant, covariant_simulation, is_covariant, is_one_design, GroupRepresentation,
};
use rebound_core::divergences::{dh_epsilon, dh_epsilon_cq};
use rebound_core::protocol::{
    reduce_to_povm, reduced_success_matrix, success_matrix, zero_error_evaluate,
};
use rebound_core::qcore::{
    hermiticity_deviation, max_abs, probe_states, symmetrized_eigenvalues, tol,
    trace_norm_hermitian, CMat,
};

use crate::convert;
use crate::formats::{self, from_cmat, CollectionFile, InputFile};
use crate::report::{certified, num, Report};
use crate::CliError;

pub fn load_input(path: &Path, report: &mut Report) -> Result<InputFile, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    report.record_input(&path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::parse(format!("{} is not UTF-8", path.display())))?;
    formats::parse_input(&text).map_err(CliError::parse)
}

fn expect_collection(file: InputFile) -> Result<CollectionFile, CliError> {
    match file {
        InputFile::Collection(c) => Ok(c),
        other => Err(CliError::parse(format!("expected a collection file, got {}", other.kind_name()))),
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn cmd_validate(path: &Path, dump: Option<&Path>, report: &mut Report) -> Result<(Value, i32), CliError> {
    let file = load_input(path, report)?;
    report.tolerance("cptp", tol::CPTP);
    report.tolerance("psd", tol::PSD);
    report.tolerance("herm", tol::HERM);
    report.tolerance("trace", tol::TRACE);
    report.tolerance("unit", tol::UNIT);
    report.tolerance("povm", tol::POVM);
    let (results, pass) = match &file {
        InputFile::Collection(f) => validate_collection(f)?,
        InputFile::Group(f) => validate_group(f)?,
        InputFile::Protocol(f) => validate_protocol(f)?,
        InputFile::Codebook(f) => {
            let code = convert::codebook(f);
            match code {
                Ok(c) => (
                    json!({ "kind": "codebook", "n": c.n(), "messages": c.message_count(), "pass": true }),
                    true,
                ),
                Err(e) => (json!({ "kind": "codebook", "pass": false, "error": e.message }), false),
            }
        }
        InputFile::State(f) => {
            let mat = formats::to_cmat(&f.matrix).map_err(CliError::parse)?;
            let herm = hermiticity_deviation(&mat);
            let trace_dev = (mat.trace().re - 1.0).abs().max(mat.trace().im.abs());
            let min_eig = symmetrized_eigenvalues(&mat).last().copied().unwrap_or(0.0);
            let pass = herm <= tol::HERM && trace_dev <= tol::TRACE && min_eig >= -tol::PSD;
            (
                json!({
                    "kind": "state",
                    "hermiticity_deviation": num(herm),
                    "trace_deviation": num(trace_dev),
                    "min_eigenvalue": num(min_eig),
                    "pass": pass,
                }),
                pass,
            )
        }
        InputFile::Env(f) => {
            let interaction = convert::kraus_list(&f.interaction)?;
            let cptp = cptp_deviation(&interaction);
            let mut states = Vec::new();
            let mut pass = cptp <= tol::CPTP;
            for s in &f.states {
                let mat = formats::to_cmat(&s.matrix).map_err(CliError::parse)?;
                let herm = hermiticity_deviation(&mat);
                let trace_dev = (mat.trace().re - 1.0).abs();
                let min_eig = symmetrized_eigenvalues(&mat).last().copied().unwrap_or(0.0);
                let ok = herm <= tol::HERM
                    && trace_dev <= tol::TRACE
                    && min_eig >= -tol::PSD
                    && mat.nrows() == f.env_dim;
                pass &= ok;
                states.push(json!({ "label": s.label, "pass": ok }));
            }
            (
                json!({
                    "kind": "env",
                    "interaction_cptp_deviation": num(cptp),
                    "states": states,
                    "pass": pass,
                }),
                pass,
            )
        }
        InputFile::Seize(f) => {
            let seizer = convert::kraus_list(&f.seizer)?;
            let cptp = cptp_deviation(&seizer);
            let probe = formats::to_cmat(&f.probe).map_err(CliError::parse)?;
            let herm = hermiticity_deviation(&probe);
            let min_eig = symmetrized_eigenvalues(&probe).last().copied().unwrap_or(0.0);
            let pass = cptp <= tol::CPTP && herm <= tol::HERM && min_eig >= -tol::PSD;
            (
                json!({
                    "kind": "seize",
                    "seizer_cptp_deviation": num(cptp),
                    "probe_hermiticity_deviation": num(herm),
                    "probe_min_eigenvalue": num(min_eig),
                    "pass": pass,
                }),
                pass,
            )
        }
    };
    if let Some(dump_path) = dump {
        let mut text = serde_json::to_string_pretty(&file.to_canonical_json())
            .expect("canonical form serializes");
        text.push('\n');
        std::fs::write(dump_path, text)
            .map_err(|e| CliError::parse(format!("cannot write {}: {e}", dump_path.display())))?;
    }
    Ok((results, if pass { 0 } else { 1 }))
}

fn cptp_deviation(kraus: &[CMat]) -> f64 {
    if kraus.is_empty() {
        return 1.0;
    }
    let d = kraus[0].ncols();
    let mut acc = CMat::zeros(d, d);
    for k in kraus {
        acc += k.adjoint() * k;
    }
    max_abs(&(acc - CMat::identity(d, d)))
}

fn validate_collection(f: &CollectionFile) -> Result<(Value, bool), CliError> {
    let mut channels = Vec::new();
    let mut pass = f.version == 1;
    let mut seen = Vec::new();
    for entry in &f.channels {
        if seen.contains(&entry.label) {
            pass = false;
        }
        seen.push(entry.label.clone());
        let kraus = convert::kraus_list(&entry.kraus)?;
        let shape_ok = kraus
            .iter()
            .all(|k| k.nrows() == f.out_dim && k.ncols() == f.in_dim);
        let dev = cptp_deviation(&kraus);
        let ok = shape_ok && dev <= tol::CPTP;
        pass &= ok;
        let choi_min = if ok {
            let ch = QuantumChannel::new(
                rebound_core::Register::new("Bp", f.in_dim),
                rebound_core::Register::new("B", f.out_dim),
                kraus,
            )
            .map_err(CliError::validation_err)?;
            ch.choi().eigenvalues().last().copied().unwrap_or(0.0)
        } else {
            f64::NAN
        };
        let mut obj = json!({
            "label": entry.label,
            "cptp_deviation": num(dev),
            "pass": ok,
        });
        if ok {
            obj["choi_min_eigenvalue"] = num(choi_min);
        }
        channels.push(obj);
    }
    if f.channels.len() < 2 {
        pass = false;
    }
    Ok((
        json!({
            "kind": "collection",
            "in_dim": f.in_dim,
            "out_dim": f.out_dim,
            "channels": channels,
            "pass": pass,
        }),
        pass,
    ))
}

fn validate_group(f: &crate::formats::GroupFile) -> Result<(Value, bool), CliError> {
    let ins = convert::kraus_list(&f.unitaries_in)?;
    let outs = match &f.unitaries_out {
        Some(raw) => convert::kraus_list(raw)?,
        None => ins.clone(),
    };
    let unit_dev = |u: &CMat| {
        let d = u.nrows();
        max_abs(&(u.adjoint() * u - CMat::identity(d, d)))
    };
    let max_dev = ins.iter().chain(outs.iter()).map(unit_dev).fold(0.0, f64::max);
    let identity_present = ins.iter().zip(&outs).any(|(u, v)| {
        let d = u.nrows();
        let dv = v.nrows();
        max_abs(&(u - CMat::identity(d, d))) <= tol::UNIT
            && max_abs(&(v - CMat::identity(dv, dv))) <= tol::UNIT
    });
    let pass = max_dev <= tol::UNIT && identity_present && ins.len() == outs.len();
    Ok((
        json!({
            "kind": "group",
            "elements": ins.len(),
            "max_unitarity_deviation": num(max_dev),
            "identity_present": identity_present,
            "pass": pass,
        }),
        pass,
    ))
}

fn validate_protocol(f: &crate::formats::ProtocolFile) -> Result<(Value, bool), CliError> {
    let povm = convert::kraus_list(&f.povm)?;
    let dim = povm.first().map(|m| m.nrows()).unwrap_or(0);
    let mut total = CMat::zeros(dim, dim);
    let mut min_eig = f64::INFINITY;
    for el in &povm {
        total += el;
        min_eig = min_eig.min(symmetrized_eigenvalues(el).last().copied().unwrap_or(0.0));
    }
    let completeness = max_abs(&(total - CMat::identity(dim, dim)));
    let mut stages = Vec::new();
    let mut pass = completeness <= tol::POVM && min_eig >= -tol::PSD && f.adaptive.len() + 1 == f.n;
    for (i, stage) in f.adaptive.iter().enumerate() {
        let kraus = convert::kraus_list(stage)?;
        let dev = cptp_deviation(&kraus);
        pass &= dev <= tol::CPTP;
        stages.push(json!({ "stage": i, "cptp_deviation": num(dev) }));
    }
    Ok((
        json!({
            "kind": "protocol",
            "n": f.n,
            "povm_completeness_deviation": num(completeness),
            "povm_min_eigenvalue": num(min_eig),
            "adaptive_stages": stages,
            "pass": pass,
        }),
        pass,
    ))
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

pub struct BoundsArgs<'a> {
    pub collection: &'a Path,
    pub env: Option<&'a Path>,
    pub seize: Option<&'a Path>,
    pub group: Option<&'a Path>,
    pub epsilon: Option<f64>,
    pub n: usize,
    pub tol: f64,
    pub prior_mode: PriorMode,
    pub theta_hat_strategy: ThetaHatStrategyArg,
    pub theta_hat: &'a [std::path::PathBuf],
    pub grid_count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaHatStrategyArg {
    Mixture,
    Grid,
    Supplied,
}

fn capacity_json(r: &CapacityReport) -> Value {
    let mut obj = json!({
        "kind": r.kind.as_str(),
        "value": certified(r.value, if r.tolerance > 0.0 { r.tolerance } else { tol::NUM }),
        "gap_certificate": num(r.gap_certificate),
        "iterations": r.iterations,
    });
    if let Some(opt) = &r.optimizer {
        obj["optimizer"] = Value::Array(
            opt.iter().map(|(l, p)| json!({ "label": l, "p": num(*p) })).collect(),
        );
    }
    if let Some(c) = &r.candidate {
        obj["candidate"] = json!(c);
        obj["candidate_values"] = Value::Array(
            r.candidate_values.iter().map(|(l, v)| json!({ "candidate": l, "value": num(*v) })).collect(),
        );
        obj["heuristic_sup"] = json!(r.heuristic_sup);
        if let Some(m) = &r.sup_method {
            obj["sup_method"] = json!(m);
        }
    }
    obj
}

fn simulation_json(r: &SimulationReport) -> Value {
    json!({
        "per_label": r.per_label.iter().map(|(l, d)| json!({ "label": l, "deviation": num(*d) })).collect::<Vec<_>>(),
        "max_deviation": num(r.max_deviation),
        "tolerance": num(r.tol),
        "pass": r.pass,
    })
}

pub fn cmd_bounds(args: &BoundsArgs, report: &mut Report) -> Result<(Value, i32), CliError> {
    let coll_file = expect_collection(load_input(args.collection, report)?)?;
    let coll = convert::collection(&coll_file)?;
    report.tolerance("holevo_gap", args.tol);
    report.tolerance("sim", tol::SIM);
    let mut results = json!({
        "collection": {
            "labels": coll.labels(),
            "in_dim": coll.in_dim(),
            "out_dim": coll.out_dim(),
        }
    });
    let mut computed_any = false;

    if let Some(group_path) = args.group {
        let group_file = match load_input(group_path, report)? {
            InputFile::Group(g) => g,
            other => {
                return Err(CliError::parse(format!("expected a group file, got {}", other.kind_name())))
            }
        };
        let rep = convert::group(&group_file)?;
        let od = is_one_design(&rep);
        results["one_design"] = json!({
            "max_deviation": num(od.max_deviation),
            "choi_cross_check_deviation": num(od.choi_deviation),
            "pass": od.pass,
        });
        if rep.len() != coll.len() {
            return Err(CliError::validation(format!(
                "group has {} elements but collection has {} channels",
                rep.len(),
                coll.len()
            )));
        }
        let mut member_devs = Vec::new();
        for (_, ch) in coll.iter() {
            let cov = is_covariant(ch, &rep).map_err(CliError::validation_err)?;
            member_devs.push(cov.max_deviation);
        }
        let jointly = member_devs.iter().all(|&d| d <= tol::COV);
        results["jointly_covariant"] = json!({
            "per_member_max_deviation": member_devs.iter().map(|d| num(*d)).collect::<Vec<_>>(),
            "pass": jointly,
        });
        if !jointly || !od.pass {
            results["error"] = json!("collection is not jointly covariant for this representation");
            return Ok((results, 1));
        }
        // base channel sits at the identity element in file order
        let base_label = &coll.labels()[rep.identity_index()];
        let base = coll.get(base_label).map_err(CliError::validation_err)?;
        let probes = probe_states(coll.in_dim());
        let mut structure_dev = 0.0f64;
        for (g, (_, member)) in coll.iter().enumerate() {
            let composed = base
                .precompose_unitary(rep.in_unitary(g))
                .map_err(CliError::validation_err)?;
            for rho in &probes {
                structure_dev = structure_dev
                    .max(trace_norm_hermitian(&(member.apply_matrix(rho) - composed.apply_matrix(rho))));
            }
        }
        results["structure_deviation"] = num(structure_dev);
        if structure_dev > tol::SIM {
            results["error"] = json!("collection members do not factor through the base channel in file order");
            return Ok((results, 1));
        }
        let exact = covariant_collection_capacity(base, &rep).map_err(CliError::validation_err)?;
        results["covariant_exact"] = capacity_json(&exact);
        let sim = covariant_simulation(base, &rep).map_err(CliError::validation_err)?;
        results["choi_simulation"] = simulation_json(&sim.verification);
        let holevo_choi = holevo_upper_bound(&sim.env, args.tol).map_err(CliError::validation_err)?;
        results["holevo_on_choi_ensemble"] = capacity_json(&holevo_choi);
        let seizable = seizable_capacity(&sim.collection, &sim.env, &sim.seizure, args.tol)
            .map_err(CliError::validation_err)?;
        results["seizable"] = capacity_json(&seizable);
        results["cross_checks"] = json!({
            "seizable_vs_covariant_exact": num((seizable.value - exact.value).abs()),
            "holevo_choi_vs_covariant_exact": num((holevo_choi.value - exact.value).abs()),
        });
        if let Some(epsilon) = args.epsilon {
            let fb = finite_blocklength_bound(&sim.env, &fb_options(args, epsilon)?)
                .map_err(CliError::validation_err)?;
            results["finite_blocklength"] = capacity_json(&fb);
        }
        computed_any = true;
    }

    if let Some(env_path) = args.env {
        let env_file = match load_input(env_path, report)? {
            InputFile::Env(e) => e,
            other => {
                return Err(CliError::parse(format!("expected an env file, got {}", other.kind_name())))
            }
        };
        let env = convert::env(&env_file)?;
        let verification = verify_env_parametrization(&coll, &env).map_err(CliError::validation_err)?;
        results["env_verification"] = simulation_json(&verification);
        if !verification.pass {
            results["error"] = json!("environment parametrization does not reproduce the collection");
            return Ok((results, 1));
        }
        let holevo = holevo_upper_bound(&env, args.tol).map_err(CliError::validation_err)?;
        results["holevo_upper_bound"] = capacity_json(&holevo);
        if let Some(seize_path) = args.seize {
            let seize_file = match load_input(seize_path, report)? {
                InputFile::Seize(s) => s,
                other => {
                    return Err(CliError::parse(format!("expected a seize file, got {}", other.kind_name())))
                }
            };
            let seize = convert::seize(&seize_file, env.env_reg().dim)?;
            let seizure_check = verify_seizable(&coll, &env, &seize).map_err(CliError::validation_err)?;
            results["seizure_verification"] = simulation_json(&seizure_check);
            if !seizure_check.pass {
                results["error"] = json!("seizure data does not recover the environment states");
                return Ok((results, 1));
            }
            let seizable = seizable_capacity(&coll, &env, &seize, args.tol).map_err(CliError::validation_err)?;
            results["seizable"] = capacity_json(&seizable);
            results["cross_checks"] = json!({
                "seizable_vs_holevo": num((seizable.value - holevo.value).abs()),
            });
        }
        if let Some(epsilon) = args.epsilon {
            let fb = finite_blocklength_bound(&env, &fb_options(args, epsilon)?)
                .map_err(CliError::validation_err)?;
            results["finite_blocklength"] = capacity_json(&fb);
            // one-shot cq state sanity: trace of the ensemble state is 1
            if let Some(opt) = holevo.optimizer.as_ref() {
                let prior: Vec<f64> = opt.iter().map(|(_, p)| *p).collect();
                let cq = cq_environment_state(&env, &prior).map_err(CliError::validation_err)?;
                results["cq_state_trace"] = num(cq.matrix().trace().re);
            }
        }
        computed_any = true;
    }

    if !computed_any {
        return Err(CliError::validation(
            "bounds needs --env or --group to know the environment structure".to_string(),
        ));
    }
    Ok((results, 0))
}

fn fb_options(args: &BoundsArgs, epsilon: f64) -> Result<FiniteBlocklengthOptions, CliError> {
    let mut opts = FiniteBlocklengthOptions::new(args.n, epsilon);
    opts.prior_mode = args.prior_mode;
    opts.seed = args.seed;
    opts.strategy = match args.theta_hat_strategy {
        ThetaHatStrategyArg::Mixture => ThetaHatStrategy::Mixture,
        ThetaHatStrategyArg::Grid => ThetaHatStrategy::Grid { count: args.grid_count, seed: args.seed },
        ThetaHatStrategyArg::Supplied => {
            let mut states = Vec::new();
            for path in args.theta_hat {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
                match formats::parse_input(&text).map_err(CliError::parse)? {
                    InputFile::State(s) => states.push(convert::state(&s)?),
                    other => {
                        return Err(CliError::parse(format!(
                            "expected a state file for --theta-hat, got {}",
                            other.kind_name()
                        )))
                    }
                }
            }
            if states.is_empty() {
                return Err(CliError::validation("supplied strategy needs --theta-hat files".to_string()));
            }
            ThetaHatStrategy::Supplied(states)
        }
    };
    Ok(opts)
}

// ---------------------------------------------------------------------------
// dhe
// ---------------------------------------------------------------------------

pub fn cmd_dhe(
    state1: &Path,
    state2: &Path,
    epsilon: f64,
    classical: &[String],
    report: &mut Report,
) -> Result<(Value, i32), CliError> {
    let f1 = match load_input(state1, report)? {
        InputFile::State(s) => s,
        other => return Err(CliError::parse(format!("expected a state file, got {}", other.kind_name()))),
    };
    let f2 = match load_input(state2, report)? {
        InputFile::State(s) => s,
        other => return Err(CliError::parse(format!("expected a state file, got {}", other.kind_name()))),
    };
    let rho = convert::state(&f1)?;
    let sigma = convert::state(&f2)?;
    report.tolerance("num", tol::NUM);
    report.tolerance("type2_zero", tol::ZERO2);
    let (value, test) = dh_epsilon(&rho, &sigma, epsilon).map_err(CliError::validation_err)?;
    let mut results = json!({
        "epsilon": num(epsilon),
        "value_bits": num(value),
        "test_type1": num(test.type1),
        "test_type2": num(test.type2),
    });
    if !classical.is_empty() {
        let names: Vec<&str> = classical.iter().map(String::as_str).collect();
        let cq = dh_epsilon_cq(&rho, &sigma, &names, epsilon).map_err(CliError::validation_err)?;
        results["cq_value_bits"] = num(cq);
        let delta = if value.is_infinite() && cq.is_infinite() { 0.0 } else { (value - cq).abs() };
        results["dense_vs_cq_delta"] = num(delta);
    }
    Ok((results, 0))
}

// ---------------------------------------------------------------------------
// simulate / reduce
// ---------------------------------------------------------------------------

pub fn cmd_simulate(
    protocol: &Path,
    collection: &Path,
    codebook: &Path,
    reduce: Option<&Path>,
    report: &mut Report,
) -> Result<(Value, i32), CliError> {
    let proto_file = match load_input(protocol, report)? {
        InputFile::Protocol(p) => p,
        other => return Err(CliError::parse(format!("expected a protocol file, got {}", other.kind_name()))),
    };
    let coll = convert::collection(&expect_collection(load_input(collection, report)?)?)?;
    let code_file = match load_input(codebook, report)? {
        InputFile::Codebook(c) => c,
        other => return Err(CliError::parse(format!("expected a codebook file, got {}", other.kind_name()))),
    };
    let code = convert::codebook(&code_file)?;
    let proto = convert::protocol(&proto_file, coll.in_dim())?;
    report.tolerance("zero_error", tol::ZERO_ERR);
    report.tolerance("povm", tol::POVM);

    let zero = zero_error_evaluate(&proto, &coll, &code).map_err(CliError::validation_err)?;
    let r = &zero.result;
    let mut results = json!({
        "per_message_success": r
            .per_message_success
            .iter()
            .map(|(m, s)| json!({ "message": m, "success": num(*s) }))
            .collect::<Vec<_>>(),
        "avg_success": num(r.avg_success),
        "error": num(r.error),
        "rate": num(r.rate),
        "zero_error": r.zero_error,
        "min_success": num(zero.min_success),
        "povm_achieves_zero_error": zero.povm_achieves_zero_error,
        "max_pairwise_fidelity": num(zero.max_pairwise_fidelity),
        "orthogonality_certificate": zero.orthogonality_certificate,
    });

    if let Some(env_path) = reduce {
        let env_file = match load_input(env_path, report)? {
            InputFile::Env(e) => e,
            other => return Err(CliError::parse(format!("expected an env file, got {}", other.kind_name()))),
        };
        let env = convert::env(&env_file)?;
        report.tolerance("reduction", 1e-10);
        let gammas = reduce_to_povm(&proto, &env, &coll).map_err(CliError::validation_err)?;
        let direct = success_matrix(&proto, &coll, &code).map_err(CliError::validation_err)?;
        let reduced = reduced_success_matrix(&gammas, &env, &code).map_err(CliError::validation_err)?;
        let mut max_dev = 0.0f64;
        for (row_d, row_r) in direct.iter().zip(&reduced) {
            for (d, r) in row_d.iter().zip(row_r) {
                max_dev = max_dev.max((d - r).abs());
            }
        }
        let d_env = gammas[0].nrows();
        let mut total = CMat::zeros(d_env, d_env);
        for g in &gammas {
            total += g;
        }
        results["reduction"] = json!({
            "max_deviation": certified(max_dev, 1e-10),
            "povm_completeness_deviation": num(max_abs(&(total - CMat::identity(d_env, d_env)))),
            "outcomes": gammas.len(),
        });
    }
    Ok((results, 0))
}

// ---------------------------------------------------------------------------
// covariance
// ---------------------------------------------------------------------------

pub fn cmd_covariance(
    group: &Path,
    collection: Option<&Path>,
    base_label: Option<&str>,
    build: bool,
    dump_collection: Option<&Path>,
    report: &mut Report,
) -> Result<(Value, i32), CliError> {
    let group_file = match load_input(group, report)? {
        InputFile::Group(g) => g,
        other => return Err(CliError::parse(format!("expected a group file, got {}", other.kind_name()))),
    };
    let rep = convert::group(&group_file)?;
    report.tolerance("covariance", tol::COV);
    let od = is_one_design(&rep);
    let mut results = json!({
        "elements": rep.len(),
        "one_design": {
            "max_deviation": num(od.max_deviation),
            "choi_cross_check_deviation": num(od.choi_deviation),
            "pass": od.pass,
        },
    });
    let mut exit = 0;

    if let Some(coll_path) = collection {
        let coll = convert::collection(&expect_collection(load_input(coll_path, report)?)?)?;
        let mut members = Vec::new();
        let mut all_pass = true;
        for (label, ch) in coll.iter() {
            let cov = is_covariant(ch, &rep).map_err(CliError::validation_err)?;
            all_pass &= cov.pass;
            members.push(json!({
                "label": label,
                "max_deviation": num(cov.max_deviation),
                "pass": cov.pass,
            }));
        }
        results["covariance"] = json!({ "members": members, "pass": all_pass });
        if !all_pass {
            exit = 1;
        }

        if build {
            let label = base_label
                .ok_or_else(|| CliError::validation("--build needs --base-label".to_string()))?;
            let base = coll.get(label).map_err(CliError::validation_err)?;
            let built = build_jointly_covariant(base, &rep).map_err(CliError::validation_err)?;
            results["built"] = json!({
                "labels": built.labels(),
                "in_dim": built.in_dim(),
                "out_dim": built.out_dim(),
            });
            if let Some(path) = dump_collection {
                let file = CollectionFile {
                    version: 1,
                    kind: Some("collection".into()),
                    in_dim: built.in_dim(),
                    out_dim: built.out_dim(),
                    channels: built
                        .iter()
                        .map(|(l, ch)| crate::formats::ChannelEntry {
                            label: l.to_string(),
                            kraus: ch.kraus().iter().map(from_cmat).collect(),
                        })
                        .collect(),
                };
                let mut text = serde_json::to_string_pretty(&file).expect("collection serializes");
                text.push('\n');
                std::fs::write(path, text)
                    .map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))?;
            }
        }
    } else if build {
        return Err(CliError::validation("--build needs --collection and --base-label".to_string()));
    }
    if !od.pass {
        exit = 1;
    }
    Ok((results, exit))
}

// used by tests to keep fixture construction in one place
pub fn collection_to_file(coll: &ChannelCollection) -> CollectionFile {
    CollectionFile {
        version: 1,
        kind: Some("collection".into()),
        in_dim: coll.in_dim(),
        out_dim: coll.out_dim(),
        channels: coll
            .iter()
            .map(|(l, ch)| crate::formats::ChannelEntry {
                label: l.to_string(),
                kraus: ch.kraus().iter().map(from_cmat).collect(),
            })
            .collect(),
    }
}

pub fn env_to_file(env: &EnvParametrization) -> crate::formats::EnvFile {
    crate::formats::EnvFile {
        kind: "env".into(),
        env_dim: env.env_reg().dim,
        interaction: env.interaction().kraus().iter().map(from_cmat).collect(),
        states: env
            .env_states()
            .iter()
            .map(|(l, s)| crate::formats::LabeledState { label: l.clone(), matrix: from_cmat(s.matrix()) })
            .collect(),
    }
}

pub fn group_to_file(rep: &GroupRepresentation) -> crate::formats::GroupFile {
    crate::formats::GroupFile {
        kind: "group".into(),
        unitaries_in: (0..rep.len()).map(|g| from_cmat(rep.in_unitary(g))).collect(),
        unitaries_out: Some((0..rep.len()).map(|g| from_cmat(rep.out_unitary(g))).collect()),
        table: rep.table().cloned(),
    }
}
