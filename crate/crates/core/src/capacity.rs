//! Capacity bounds for channel collections.
//!
//! Three routes are provided. [`holevo_upper_bound`] maximizes the Holevo
//! quantity I(X;E) of the environment ensemble {p(x), θˣ} by alternating
//! maximization, with the duality certificate max_x D(θˣ‖θ̄) bracketing the
//! supremum. [`covariant_collection_capacity`] evaluates the exact entropic
//! formula I(R;B) of the base channel's Choi state, which equals the
//! capacity of a jointly covariant collection. [`finite_blocklength_bound`]
//! evaluates the hypothesis-testing converse
//! sup_p inf_θ̂ D_h^ε(θ_{XⁿEⁿ}‖θ̂_{XⁿEⁿ}) by scanning a candidate set of θ̂
//! (any single candidate gives a valid bound) and maximizing over priors.

use rand::Rng;
use rayon::prelude::*;

use crate::channels::{verify_seizable, ChannelCollection, EnvParametrization, SeizureData};
use crate::covariance::{is_covariant, is_one_design, GroupRepresentation};
use crate::divergences::np_solve;
use crate::qcore::{eig_hermitian_unchecked, mutual_information, CMat, DensityOperator};
use crate::{channels::QuantumChannel, random, Error, Result};

/// Which bound a [`CapacityReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// sup_p I(X;E): an upper bound on the capacity of an
    /// environment-parametrized collection.
    HolevoUpperBound,
    /// I(R;B) of the base Choi state: exact for jointly covariant collections.
    CovariantExact,
    /// Hypothesis-testing converse at finite blocklength, per channel use.
    FiniteBlocklength,
    /// Holevo value promoted to an equality by a verified seizure.
    SeizableEquality,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::HolevoUpperBound => "holevo_upper_bound",
            BoundKind::CovariantExact => "covariant_exact",
            BoundKind::FiniteBlocklength => "finite_blocklength",
            BoundKind::SeizableEquality => "seizable_equality",
        }
    }
}

/// A computed bound with its certificate and solver metadata.
#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub kind: BoundKind,
    /// Bits per channel use.
    pub value: f64,
    /// Optimizing prior, labelled, when the bound involves one.
    pub optimizer: Option<Vec<(String, f64)>>,
    /// Duality gap at termination (alternating maximization only).
    pub gap_certificate: f64,
    pub iterations: usize,
    pub tolerance: f64,
    /// Iteration values never decreased (alternating maximization only).
    pub monotone_iteration: bool,
    /// Identifier of the minimizing θ̂ candidate (finite blocklength only).
    pub candidate: Option<String>,
    /// All candidate values, for cross-checks (finite blocklength only).
    pub candidate_values: Vec<(String, f64)>,
    /// How the prior supremum was searched; heuristic searches can only
    /// under-estimate the sup, so the reported minimum stays a valid bound
    /// for the evaluated candidate but is flagged.
    pub sup_method: Option<String>,
    pub heuristic_sup: bool,
}

impl CapacityReport {
    fn bare(kind: BoundKind, value: f64) -> Self {
        CapacityReport {
            kind,
            value,
            optimizer: None,
            gap_certificate: 0.0,
            iterations: 0,
            tolerance: 0.0,
            monotone_iteration: true,
            candidate: None,
            candidate_values: Vec::new(),
            sup_method: None,
            heuristic_sup: false,
        }
    }
}

const ITERATION_CAP: usize = 100_000;
const PRIOR_FLOOR: f64 = 1e-300;

/// Holevo quantity and per-label divergences for a fixed prior, sharing one
/// eigendecomposition of the mixture.
fn ensemble_divergences(states: &[CMat], entropies: &[f64], prior: &[f64]) -> (f64, Vec<f64>) {
    let d = states[0].nrows();
    let mut mix = CMat::zeros(d, d);
    for (s, &p) in states.iter().zip(prior) {
        mix += s.scale(p);
    }
    let (vals, vecs) = eig_hermitian_unchecked(&mix);
    let mut divs = Vec::with_capacity(states.len());
    for (s, &h) in states.iter().zip(entropies) {
        let mut cross = 0.0;
        for (j, &v) in vals.iter().enumerate() {
            let col = vecs.column(j);
            let w = (col.adjoint() * s * col)[(0, 0)].re;
            cross += w * v.max(PRIOR_FLOOR).log2();
        }
        divs.push((-h - cross).max(0.0));
    }
    let holevo = prior.iter().zip(&divs).map(|(&p, &d)| p * d).sum();
    (holevo, divs)
}

/// sup_p I(X;E) for the environment ensemble by alternating maximization.
///
/// The update p ← p·2^{D(θˣ‖θ̄)} (normalized) never decreases I(X;E), and
/// max_x D(θˣ‖θ̄) upper-bounds the supremum, so iteration stops when
/// max_x D − I ≤ `tolerance` with the reported value certified that close
/// to the supremum. Priors are floored at 1e-300 so no label is killed by
/// underflow.
pub fn holevo_upper_bound(env: &EnvParametrization, tolerance: f64) -> Result<CapacityReport> {
    let labels: Vec<String> = env.labels().map(str::to_string).collect();
    if labels.len() < 2 {
        return Err(Error::AlphabetTooSmall { got: labels.len() });
    }
    let states: Vec<CMat> = env.env_states().iter().map(|(_, s)| s.matrix().clone()).collect();
    let entropies: Vec<f64> = env.env_states().iter().map(|(_, s)| s.von_neumann_entropy()).collect();
    let k = labels.len();
    let mut prior = vec![1.0 / k as f64; k];
    let mut last_value = -1.0f64;
    let mut monotone = true;
    for iter in 0..ITERATION_CAP {
        let (value, divs) = ensemble_divergences(&states, &entropies, &prior);
        if value < last_value - 1e-12 {
            monotone = false;
        }
        last_value = value;
        let cert = divs.iter().copied().fold(0.0, f64::max);
        let gap = (cert - value).max(0.0);
        if gap <= tolerance {
            let optimizer = labels.iter().cloned().zip(prior.iter().copied()).collect();
            return Ok(CapacityReport {
                kind: BoundKind::HolevoUpperBound,
                value,
                optimizer: Some(optimizer),
                gap_certificate: gap,
                iterations: iter,
                tolerance,
                monotone_iteration: monotone,
                ..CapacityReport::bare(BoundKind::HolevoUpperBound, value)
            });
        }
        let mut total = 0.0;
        for (p, &d) in prior.iter_mut().zip(&divs) {
            *p = (*p * (d - cert).exp2()).max(PRIOR_FLOOR);
            total += *p;
        }
        for p in prior.iter_mut() {
            *p /= total;
        }
    }
    let (value, divs) = ensemble_divergences(&states, &entropies, &prior);
    let gap = (divs.iter().copied().fold(0.0, f64::max) - value).max(0.0);
    Err(Error::NonConvergence { cap: ITERATION_CAP, best: value, gap })
}

/// Capacity of a jointly covariant collection: I(R;B) of the base channel's
/// Choi state. Exact entropic formula, no iteration.
pub fn covariant_collection_capacity(
    base: &QuantumChannel,
    rep: &GroupRepresentation,
) -> Result<CapacityReport> {
    let cov = is_covariant(base, rep)?;
    if !cov.pass {
        return Err(Error::NotCovariant { deviation: cov.max_deviation });
    }
    let od = is_one_design(rep);
    if !od.pass {
        return Err(Error::NotOneDesign { deviation: od.max_deviation });
    }
    let value = mutual_information(base.choi(), &["R"], &["B"])?.max(0.0);
    Ok(CapacityReport::bare(BoundKind::CovariantExact, value))
}

/// Holevo value promoted to a capacity: valid once the seizure identity
/// holds, since seizing θˣ each use achieves the Holevo rate.
pub fn seizable_capacity(
    coll: &ChannelCollection,
    env: &EnvParametrization,
    seize: &SeizureData,
    tolerance: f64,
) -> Result<CapacityReport> {
    let report = verify_seizable(coll, env, seize)?;
    if !report.pass {
        return Err(Error::NotSeizable { deviation: report.max_deviation });
    }
    let mut out = holevo_upper_bound(env, tolerance)?;
    out.kind = BoundKind::SeizableEquality;
    Ok(out)
}

/// Prior search space for [`finite_blocklength_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorMode {
    /// Product priors built from one single-letter distribution.
    Iid,
    /// Arbitrary distributions over length-n words.
    General,
}

/// Candidate θ̂ environment states for the converse minimization. The three
/// canonical candidates (Holevo-optimal mixture, uniform mixture, maximally
/// mixed) are always included.
#[derive(Debug, Clone)]
pub enum ThetaHatStrategy {
    Mixture,
    Grid { count: usize, seed: u64 },
    Supplied(Vec<DensityOperator>),
}

#[derive(Debug, Clone)]
pub struct FiniteBlocklengthOptions {
    pub n: usize,
    pub epsilon: f64,
    pub prior_mode: PriorMode,
    pub strategy: ThetaHatStrategy,
    /// Seed for randomized prior restarts.
    pub seed: u64,
    /// Largest |𝒳|ⁿ·dim(E)ⁿ the dense solver will accept.
    pub max_total_dim: usize,
    pub max_n: usize,
}

impl FiniteBlocklengthOptions {
    pub fn new(n: usize, epsilon: f64) -> Self {
        FiniteBlocklengthOptions {
            n,
            epsilon,
            prior_mode: PriorMode::Iid,
            strategy: ThetaHatStrategy::Mixture,
            seed: 0,
            max_total_dim: 4096,
            max_n: 3,
        }
    }
}

/// Finite-blocklength converse: for each candidate θ̂ evaluate
/// sup_p D_h^ε(θ_{XⁿEⁿ}‖θ̂_{XⁿEⁿ}) and report the smallest, divided by n.
///
/// Any single θ̂ yields a valid converse, so shrinking the candidate set can
/// only raise the reported bound, never invalidate it. The prior supremum is
/// searched exhaustively (grid plus golden refinement) for binary iid priors
/// and by projected-gradient restarts otherwise; the latter is flagged as
/// heuristic in the report since it may under-estimate the sup.
pub fn finite_blocklength_bound(
    env: &EnvParametrization,
    opts: &FiniteBlocklengthOptions,
) -> Result<CapacityReport> {
    let labels: Vec<String> = env.labels().map(str::to_string).collect();
    let k = labels.len();
    if k < 2 {
        return Err(Error::AlphabetTooSmall { got: k });
    }
    if opts.n == 0 || opts.n > opts.max_n {
        return Err(Error::BudgetExceeded {
            context: format!("blocklength {} outside 1..={}", opts.n, opts.max_n),
        });
    }
    let de = env.env_reg().dim;
    let total_dim = k.pow(opts.n as u32) * de.pow(opts.n as u32);
    if total_dim > opts.max_total_dim {
        return Err(Error::BudgetExceeded {
            context: format!("total dimension {total_dim} exceeds {}", opts.max_total_dim),
        });
    }
    check_epsilon_range(opts.epsilon)?;

    let states: Vec<CMat> = env.env_states().iter().map(|(_, s)| s.matrix().clone()).collect();

    // candidate θ̂ set
    let mut candidates: Vec<(String, CMat)> = Vec::new();
    let uniform_prior = vec![1.0 / k as f64; k];
    let opt_prior = match holevo_upper_bound(env, 1e-6) {
        Ok(report) => report
            .optimizer
            .map(|o| o.into_iter().map(|(_, p)| p).collect::<Vec<f64>>())
            .unwrap_or_else(|| uniform_prior.clone()),
        Err(Error::NonConvergence { .. }) => uniform_prior.clone(),
        Err(e) => return Err(e),
    };
    candidates.push(("mixture_optimal".into(), mix_states(&states, &opt_prior)));
    candidates.push(("mixture_uniform".into(), mix_states(&states, &uniform_prior)));
    candidates.push(("maximally_mixed".into(), CMat::identity(de, de).scale(1.0 / de as f64)));
    match &opts.strategy {
        ThetaHatStrategy::Mixture => {}
        ThetaHatStrategy::Grid { count, seed } => {
            let mut rng = random::rng(*seed);
            for i in 0..*count {
                candidates.push((format!("random_{i}"), random::density_matrix(&mut rng, de)));
            }
        }
        ThetaHatStrategy::Supplied(supplied) => {
            for (i, s) in supplied.iter().enumerate() {
                if s.dim() != de {
                    return Err(Error::DimensionMismatch {
                        context: format!("supplied candidate {i} has dim {}, expected {de}", s.dim()),
                    });
                }
                candidates.push((format!("supplied_{i}"), s.matrix().clone()));
            }
        }
    }

    // per-word environment tensor products, fixed word order
    let words = enumerate_words(k, opts.n);
    let word_states: Vec<CMat> = words.iter().map(|w| tensor_product(&states, w)).collect();

    let mut best: Option<(String, f64, Vec<f64>)> = None;
    let mut candidate_values = Vec::with_capacity(candidates.len());
    let mut sup_method = String::new();
    let mut heuristic = false;
    for (name, theta_hat) in &candidates {
        let hat_n = tensor_power(theta_hat, opts.n);
        let objective = |word_prior: &[f64]| -> f64 {
            let blocks: Vec<(CMat, CMat)> = word_prior
                .iter()
                .enumerate()
                .map(|(w, &p)| (word_states[w].scale(p), hat_n.scale(p)))
                .collect();
            np_solve(&blocks, opts.epsilon).value
        };
        let (value, word_prior, method, was_heuristic) =
            maximize_prior(&objective, k, opts, &words)?;
        candidate_values.push((name.clone(), value));
        sup_method = method;
        heuristic = was_heuristic;
        let better = match &best {
            None => true,
            Some((_, v, _)) => value < *v,
        };
        if better {
            best = Some((name.clone(), value, word_prior));
        }
    }
    let (candidate, total_value, word_prior) = best.expect("candidate set is never empty");
    let optimizer = words
        .iter()
        .map(|w| w.iter().map(|&x| labels[x].as_str()).collect::<Vec<_>>().join("."))
        .zip(word_prior.iter().copied())
        .collect();
    Ok(CapacityReport {
        kind: BoundKind::FiniteBlocklength,
        value: total_value / opts.n as f64,
        optimizer: Some(optimizer),
        gap_certificate: 0.0,
        iterations: 0,
        tolerance: 0.0,
        monotone_iteration: true,
        candidate: Some(candidate),
        candidate_values,
        sup_method: Some(sup_method),
        heuristic_sup: heuristic,
    })
}

fn check_epsilon_range(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::BadEpsilon { got: epsilon });
    }
    Ok(())
}

fn mix_states(states: &[CMat], prior: &[f64]) -> CMat {
    let d = states[0].nrows();
    let mut mix = CMat::zeros(d, d);
    for (s, &p) in states.iter().zip(prior) {
        mix += s.scale(p);
    }
    mix
}

fn enumerate_words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut words = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(words.len() * k);
        for w in &words {
            for x in 0..k {
                let mut v = w.clone();
                v.push(x);
                next.push(v);
            }
        }
        words = next;
    }
    words
}

fn tensor_product(states: &[CMat], word: &[usize]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for &x in word {
        out = out.kronecker(&states[x]);
    }
    out
}

fn tensor_power(state: &CMat, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(state);
    }
    out
}

/// Maximize the objective over word priors. Returns (value, word prior,
/// method description, heuristic flag).
fn maximize_prior(
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
    k: usize,
    opts: &FiniteBlocklengthOptions,
    words: &[Vec<usize>],
) -> Result<(f64, Vec<f64>, String, bool)> {
    match opts.prior_mode {
        PriorMode::Iid => {
            let word_obj = |single: &[f64]| {
                let wp = iid_word_prior(single, words);
                objective(&wp)
            };
            if k == 2 {
                let (value, p0) = maximize_binary(&word_obj);
                let wp = iid_word_prior(&[p0, 1.0 - p0], words);
                Ok((value, wp, "iid_grid_golden".into(), false))
            } else {
                let (value, single) = maximize_simplex(&word_obj, k, opts.seed);
                let wp = iid_word_prior(&single, words);
                Ok((value, wp, "iid_pga20".into(), true))
            }
        }
        PriorMode::General => {
            let (value, wp) = maximize_simplex(objective, words.len(), opts.seed);
            Ok((value, wp, "general_pga20".into(), true))
        }
    }
}

fn iid_word_prior(single: &[f64], words: &[Vec<usize>]) -> Vec<f64> {
    words
        .iter()
        .map(|w| w.iter().map(|&x| single[x]).product())
        .collect()
}

/// Exhaustive 1e-2 grid over [0,1] followed by golden-section refinement of
/// the best bracket.
fn maximize_binary(objective: &dyn Fn(&[f64]) -> f64) -> (f64, f64) {
    let eval = |p: f64| objective(&[p, 1.0 - p]);
    let steps = 100;
    let mut best_p = 0.0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=steps {
        let p = i as f64 / steps as f64;
        let v = eval(p);
        if v > best_v {
            best_v = v;
            best_p = p;
        }
    }
    let mut lo = (best_p - 1.0 / steps as f64).max(0.0);
    let mut hi = (best_p + 1.0 / steps as f64).min(1.0);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1);
        }
    }
    let p = 0.5 * (lo + hi);
    let v = eval(p);
    if v >= best_v {
        (v, p)
    } else {
        (best_v, best_p)
    }
}

/// Projected-gradient ascent with 20 random restarts over the simplex.
/// Restarts run in parallel and are merged by (value, restart index), so
/// the result is independent of scheduling.
fn maximize_simplex(objective: &(dyn Fn(&[f64]) -> f64 + Sync), k: usize, seed: u64) -> (f64, Vec<f64>) {
    let restarts = 20usize;
    let runs: Vec<(f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut p = if r == 0 {
                vec![1.0 / k as f64; k]
            } else {
                let mut rng = random::rng(seed.wrapping_add(r as u64));
                let raw: Vec<f64> =
                    (0..k).map(|_| -(rng.random::<f64>().max(1e-12)).ln()).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / s).collect()
            };
            let mut value = objective(&p);
            let mut step = 0.2;
            let h = 1e-5;
            for _ in 0..40 {
                let mut grad = vec![0.0; k];
                for i in 0..k {
                    let mut shifted = p.clone();
                    shifted[i] += h;
                    project_simplex(&mut shifted);
                    grad[i] = (objective(&shifted) - value) / h;
                }
                let mut improved = false;
                for _ in 0..6 {
                    let mut cand: Vec<f64> =
                        p.iter().zip(&grad).map(|(&x, &g)| x + step * g).collect();
                    project_simplex(&mut cand);
                    let cv = objective(&cand);
                    if cv > value + 1e-12 {
                        p = cand;
                        value = cv;
                        step *= 1.3;
                        improved = true;
                        break;
                    }
                    step *= 0.4;
                }
                if !improved || step < 1e-10 {
                    break;
                }
            }
            (value, p)
        })
        .collect();
    runs.into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one restart")
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let k = v.len();
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if i + 1 == k || sorted[i + 1] <= t {
            theta = t;
            if sorted[i + 1..].iter().all(|&x| x <= t) {
                break;
            }
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    } else {
        for x in v.iter_mut() {
            *x = 1.0 / k as f64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::cq_environment_state;
    use crate::covariance::covariant_simulation;
    use crate::qcore::{cx, Register};

    fn qubit(name: &str) -> Register {
        Register::new(name, 2)
    }

    fn env_from_states(states: Vec<(&str, CMat)>) -> EnvParametrization {
        // replacer-style parametrization: 𝓕 discards B' and keeps E
        let de = states[0].1.nrows();
        let mut kraus = Vec::new();
        for i in 0..2 {
            let mut k = CMat::zeros(de, 2 * de);
            for e in 0..de {
                k[(e, i * de + e)] = cx(1.0, 0.0);
            }
            kraus.push(k);
        }
        let interaction =
            QuantumChannel::new(Register::new("BpE", 2 * de), Register::new("B", de), kraus).unwrap();
        let env_states = states
            .into_iter()
            .map(|(l, m)| {
                (l.to_string(), DensityOperator::new(vec![Register::new("E", de)], m).unwrap())
            })
            .collect();
        EnvParametrization::new(Register::new("E", de), interaction, env_states).unwrap()
    }

    fn diag(entries: &[f64]) -> CMat {
        let d = entries.len();
        let mut m = CMat::zeros(d, d);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = cx(e, 0.0);
        }
        m
    }

    fn plus_state() -> CMat {
        CMat::from_fn(2, 2, |_, _| cx(0.5, 0.0))
    }

    #[test]
    fn holevo_orthogonal_pure_pair() {
        let env = env_from_states(vec![("x0", diag(&[1.0, 0.0])), ("x1", diag(&[0.0, 1.0]))]);
        let report = holevo_upper_bound(&env, 1e-8).unwrap();
        assert!((report.value - 1.0).abs() < 1e-7);
        let opt = report.optimizer.unwrap();
        assert!((opt[0].1 - 0.5).abs() < 1e-5);
        assert!(report.monotone_iteration);
    }

    #[test]
    fn holevo_identical_states_is_zero() {
        let env = env_from_states(vec![("x0", diag(&[0.4, 0.6])), ("x1", diag(&[0.4, 0.6]))]);
        let report = holevo_upper_bound(&env, 1e-8).unwrap();
        assert!(report.value.abs() < 1e-10);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn holevo_binary_pure_ensemble_matches_grid_oracle() {
        // {|0⟩⟨0|, |+⟩⟨+|}: symmetric ensemble, maximum at p = 1/2 with value
        // H₂((1+1/√2)/2); the grid oracle scans the prior directly
        let env = env_from_states(vec![("x0", diag(&[1.0, 0.0])), ("x1", plus_state())]);
        let report = holevo_upper_bound(&env, 1e-9).unwrap();
        let states = [diag(&[1.0, 0.0]), plus_state()];
        let mut grid_best = 0.0f64;
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            let mix = states[0].scale(p) + states[1].scale(1.0 - p);
            let (vals, _) = eig_hermitian_unchecked(&mix);
            let s: f64 = vals.iter().filter(|&&v| v > 1e-15).map(|&v| -v * v.log2()).sum();
            grid_best = grid_best.max(s);
        }
        assert!((report.value - grid_best).abs() < 1e-4);
        let half = 0.5f64 * (1.0 + std::f64::consts::FRAC_1_SQRT_2);
        let closed_form = -half * half.log2() - (1.0 - half) * (1.0 - half).log2();
        assert!((report.value - closed_form).abs() < 1e-6);
        assert!((closed_form - 0.6009).abs() < 1e-4);
    }

    #[test]
    fn holevo_certificate_brackets_value() {
        let mut rng = random::rng(11);
        for _ in 0..10 {
            let env = env_from_states(vec![
                ("x0", random::density_matrix(&mut rng, 2)),
                ("x1", random::density_matrix(&mut rng, 2)),
            ]);
            let tol_run = 1e-7;
            let report = holevo_upper_bound(&env, tol_run).unwrap();
            assert!(report.gap_certificate <= tol_run);
            assert!(report.monotone_iteration);
            // value is invariant under a common unitary rotation
            let u = random::unitary(&mut rng, 2);
            let rotated = env_from_states(vec![
                ("x0", &u * env.env_state("x0").unwrap().matrix() * u.adjoint()),
                ("x1", &u * env.env_state("x1").unwrap().matrix() * u.adjoint()),
            ]);
            let rotated_report = holevo_upper_bound(&rotated, tol_run).unwrap();
            assert!((report.value - rotated_report.value).abs() <= tol_run + 1e-9);
        }
    }

    #[test]
    fn covariant_capacity_identity_and_flat() {
        let rep = GroupRepresentation::pauli();
        let id = QuantumChannel::identity(qubit("Bp"), "B");
        assert!((covariant_collection_capacity(&id, &rep).unwrap().value - 2.0).abs() < 1e-9);
        let flat = QuantumChannel::depolarizing(qubit("Bp"), "B", 1.0);
        assert!(covariant_collection_capacity(&flat, &rep).unwrap().value.abs() < 1e-9);
    }

    #[test]
    fn covariant_capacity_depolarizing_half() {
        let ch = QuantumChannel::depolarizing(qubit("Bp"), "B", 0.5);
        let report = covariant_collection_capacity(&ch, &GroupRepresentation::pauli()).unwrap();
        let spectrum = [0.625f64, 0.125, 0.125, 0.125];
        let expected = 2.0 - spectrum.iter().map(|p| -p * p.log2()).sum::<f64>();
        assert!((report.value - expected).abs() < 1e-9);
        assert!((report.value - 0.4512).abs() < 1e-4);
    }

    #[test]
    fn covariant_capacity_rejects_bad_inputs() {
        let rep = GroupRepresentation::pauli();
        let ad = QuantumChannel::amplitude_damping(qubit("Bp"), "B", 0.5);
        assert!(matches!(covariant_collection_capacity(&ad, &rep), Err(Error::NotCovariant { .. })));
    }

    #[test]
    fn seizable_capacity_replacer_families() {
        let env = env_from_states(vec![("x0", diag(&[1.0, 0.0])), ("x1", diag(&[0.0, 1.0]))]);
        let coll = env.induced_collection("Bp", "B").unwrap();
        // seizer: discard R, relabel B output as E
        let mut kraus = Vec::new();
        for r in 0..2 {
            let mut k = CMat::zeros(2, 4);
            for b in 0..2 {
                k[(b, r * 2 + b)] = cx(1.0, 0.0);
            }
            kraus.push(k);
        }
        let seizer = QuantumChannel::new(Register::new("RB", 4), Register::new("E", 2), kraus).unwrap();
        let probe = random::density_operator(&mut random::rng(12), vec![qubit("Ri"), qubit("Bp")]);
        let seize = SeizureData { probe, seizer };
        let report = seizable_capacity(&coll, &env, &seize, 1e-8).unwrap();
        assert_eq!(report.kind, BoundKind::SeizableEquality);
        assert!((report.value - 1.0).abs() < 1e-7);

        let env_same = env_from_states(vec![("x0", diag(&[0.3, 0.7])), ("x1", diag(&[0.3, 0.7]))]);
        let coll_same = env_same.induced_collection("Bp", "B").unwrap();
        let mut kraus2 = Vec::new();
        for r in 0..2 {
            let mut k = CMat::zeros(2, 4);
            for b in 0..2 {
                k[(b, r * 2 + b)] = cx(1.0, 0.0);
            }
            kraus2.push(k);
        }
        let seizer2 = QuantumChannel::new(Register::new("RB", 4), Register::new("E", 2), kraus2).unwrap();
        let probe2 = random::density_operator(&mut random::rng(13), vec![qubit("Ri"), qubit("Bp")]);
        let report2 = seizable_capacity(&coll_same, &env_same, &SeizureData { probe: probe2, seizer: seizer2 }, 1e-8)
            .unwrap();
        assert!(report2.value.abs() < 1e-9);
    }

    #[test]
    fn seizable_capacity_matches_covariant_route() {
        let base = QuantumChannel::depolarizing(qubit("Bp"), "B", 0.5);
        let rep = GroupRepresentation::pauli();
        let sim = covariant_simulation(&base, &rep).unwrap();
        let seized = seizable_capacity(&sim.collection, &sim.env, &sim.seizure, 1e-8).unwrap();
        let exact = covariant_collection_capacity(&base, &rep).unwrap();
        assert!(
            (seized.value - exact.value).abs() < 1e-6,
            "seizable {} vs exact {}",
            seized.value,
            exact.value
        );
        // the Holevo route on the Choi ensemble agrees too
        let holevo = holevo_upper_bound(&sim.env, 1e-8).unwrap();
        assert!(holevo.value >= exact.value - 1e-6);
        assert!((holevo.value - exact.value).abs() < 1e-6);
    }

    #[test]
    fn finite_blocklength_identical_states_floor() {
        let env = env_from_states(vec![("x0", diag(&[0.4, 0.6])), ("x1", diag(&[0.4, 0.6]))]);
        for n in [1usize, 2] {
            for eps in [0.1, 0.5] {
                let report =
                    finite_blocklength_bound(&env, &FiniteBlocklengthOptions::new(n, eps)).unwrap();
                let expect = -(1.0f64 - eps).log2() / n as f64;
                assert!(
                    (report.value - expect).abs() < 1e-9,
                    "n={n} eps={eps}: {} vs {expect}",
                    report.value
                );
            }
        }
    }

    #[test]
    fn finite_blocklength_orthogonal_replacer_is_one_bit() {
        let env = env_from_states(vec![("x0", diag(&[1.0, 0.0])), ("x1", diag(&[0.0, 1.0]))]);
        let report = finite_blocklength_bound(&env, &FiniteBlocklengthOptions::new(1, 0.0)).unwrap();
        assert!((report.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_blocklength_candidates_only_improve() {
        let mut rng = random::rng(14);
        let env = env_from_states(vec![
            ("x0", random::density_matrix(&mut rng, 2)),
            ("x1", random::density_matrix(&mut rng, 2)),
        ]);
        let base = finite_blocklength_bound(&env, &FiniteBlocklengthOptions::new(1, 0.1)).unwrap();
        let mut opts = FiniteBlocklengthOptions::new(1, 0.1);
        opts.strategy = ThetaHatStrategy::Grid { count: 4, seed: 3 };
        let wider = finite_blocklength_bound(&env, &opts).unwrap();
        assert!(wider.value <= base.value + 1e-12);
        assert_eq!(wider.candidate_values.len(), base.candidate_values.len() + 4);
    }

    #[test]
    fn finite_blocklength_depolarizing_family_is_finite_and_ordered() {
        let base = QuantumChannel::depolarizing(qubit("Bp"), "B", 0.5);
        let sim = covariant_simulation(&base, &GroupRepresentation::pauli()).unwrap();
        let eps = 0.01;
        let report = finite_blocklength_bound(&sim.env, &FiniteBlocklengthOptions::new(1, eps)).unwrap();
        assert!(report.value.is_finite());
        let holevo = holevo_upper_bound(&sim.env, 1e-7).unwrap();
        // corridor recorded, not asserted as a theorem: the one-shot bound
        // sits near the Holevo value within the ±log₂(1/(1−ε)) slack
        let corridor = (report.value - holevo.value).abs();
        assert!(corridor < 1.0, "one-shot {} vs holevo {}", report.value, holevo.value);
    }

    #[test]
    fn finite_blocklength_budget_checks() {
        let env = env_from_states(vec![("x0", diag(&[1.0, 0.0])), ("x1", diag(&[0.0, 1.0]))]);
        assert!(matches!(
            finite_blocklength_bound(&env, &FiniteBlocklengthOptions::new(4, 0.1)),
            Err(Error::BudgetExceeded { .. })
        ));
        let mut opts = FiniteBlocklengthOptions::new(2, 0.1);
        opts.max_total_dim = 8;
        assert!(matches!(
            finite_blocklength_bound(&env, &opts),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn general_prior_mode_runs_and_is_flagged() {
        let env = env_from_states(vec![("x0", diag(&[1.0, 0.0])), ("x1", plus_state())]);
        let mut opts = FiniteBlocklengthOptions::new(2, 0.1);
        opts.prior_mode = PriorMode::General;
        let report = finite_blocklength_bound(&env, &opts).unwrap();
        assert!(report.heuristic_sup);
        assert!(report.value.is_finite());
        let iid = finite_blocklength_bound(&env, &FiniteBlocklengthOptions::new(2, 0.1)).unwrap();
        // the general search space contains all iid priors, so for the
        // shared minimizing candidate the sup can only grow; values are per
        // candidate minima so just sanity-check both are positive
        assert!(iid.value > 0.0 && report.value > 0.0);
    }

    #[test]
    fn cq_state_feeds_finite_blocklength_shapes() {
        let env = env_from_states(vec![("x0", diag(&[1.0, 0.0])), ("x1", diag(&[0.0, 1.0]))]);
        let cq = cq_environment_state(&env, &[0.5, 0.5]).unwrap();
        assert_eq!(cq.dim(), 4);
    }
}
