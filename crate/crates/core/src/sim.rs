//! Seeded Monte Carlo runs of the replay attack, direct BPSK coding and the
//! two-phase correlation protocol.
//!
//! Trials are split into fixed chunks of [`CHUNK_TRIALS`]; chunk `c` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, so results do not depend on
//! the number of worker threads.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{nu, symmetrization_error_bound, worst_case_jammer, JammerGrid};
use crate::channel::{bpsk_homodyne_density, channel_output, symmetrized_homodyne_density, JammerStrategy, PowerBudget, SenderSymbol};
use crate::error::{Error, Result};
use crate::gaussian::{HomodyneSampler, UnivariateGaussian};
use crate::protocol::{
    decompose_on_triangle, effective_channel, lambda_c_coefficients, lambda_c_worst_case_for, quadrant_distribution_for,
    quadrant_index, sign_xor, symmetrize_with_cr, BinaryChannel, CorrelationResource, QuadrantDistribution,
};

pub const CHUNK_TRIALS: u64 = 256;

/// How the jammer picks its per-symbol state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammerPolicy {
    /// Minimiser of the run's objective on the default jammer grid.
    WorstGrid,
    Fixed(JammerStrategy<f64>),
    /// Replays a uniformly random codeword (or, per symbol, a random BPSK symbol).
    ReplayCode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub budget: PowerBudget<f64>,
    pub block_length: usize,
    pub message_count: usize,
    pub trials: u64,
    pub seed: u64,
    pub jammer_policy: JammerPolicy,
    /// Keep one success/failure flag per trial in the report.
    #[serde(default)]
    pub record_trials: bool,
}

impl SimulationConfig {
    pub fn new(budget: PowerBudget<f64>, block_length: usize, message_count: usize, trials: u64, seed: u64, jammer_policy: JammerPolicy) -> Self {
        Self { budget, block_length, message_count, trials, seed, jammer_policy, record_trials: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_length == 0 || self.message_count == 0 || self.trials == 0 {
            return Err(Error::InvalidConfig("block length, message count and trials must be at least 1".into()));
        }
        let bits = message_bits(self.message_count);
        if bits > self.block_length {
            return Err(Error::InvalidConfig(format!("{} messages need a block length of at least {bits}", self.message_count)));
        }
        if let JammerPolicy::Fixed(j) = self.jammer_policy {
            j.validate(&self.budget)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Attack,
    Bpsk,
    Tmsv,
    Classical,
}

/// A statistical assertion evaluated on the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jammer: Option<JammerStrategy<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation_jammer: Option<JammerStrategy<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_error: Option<f64>,
    /// Attack: error when the replayed codeword is the transmitted one / another one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_replay_same: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_replay_other: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrants: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_lambda_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_c_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_lambda_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_crossover: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_crossover: Option<f64>,
    /// Set when the configuration lies outside the regime the run is meant for.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub protocol: Protocol,
    pub config: SimulationConfig,
    /// Fraction of failed observations (trials, or symbols for BPSK).
    pub empirical_error: f64,
    /// Binomial standard error over `observations`.
    pub stderr: f64,
    pub observations: u64,
    pub diagnostics: Diagnostics,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub trial_outcomes: Option<Vec<bool>>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn binomial_stderr(p: f64, count: u64) -> f64 {
    (p * (1.0 - p) / count as f64).sqrt()
}

/// Bits needed to index `m` messages (at least one).
pub fn message_bits(m: usize) -> usize {
    (usize::BITS - (m.max(2) - 1).leading_zeros()) as usize
}

/// Sign of symbol `i` in the codeword of `message`: bit `i mod k` repeated.
fn codeword_sign(message: usize, i: usize, bits: usize) -> i8 {
    if (message >> (i % bits)) & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Repetition with the sign flipped on every other copy of a bit. Summing the
/// estimates with the same alternation cancels any input-independent output bias.
fn alternating_sign(message: usize, i: usize, bits: usize) -> i8 {
    codeword_sign(message, i, bits) * alternation(i, bits)
}

fn alternation(i: usize, bits: usize) -> i8 {
    if (i / bits) % 2 == 1 {
        -1
    } else {
        1
    }
}

fn decode(votes: &[f64]) -> usize {
    votes.iter().enumerate().fold(0, |m, (b, &v)| if v > 0.0 { m | (1 << b) } else { m })
}

#[derive(Clone, Debug, Default)]
struct Tally {
    failures: u64,
    observations: u64,
    counts: [u64; 8],
    outcomes: Vec<bool>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.failures += other.failures;
        self.observations += other.observations;
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.outcomes.extend(other.outcomes);
        self
    }
}

fn run_chunks<F>(config: &SimulationConfig, trial: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) + Sync,
{
    let chunks = config.trials.div_ceil(CHUNK_TRIALS);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c);
            let mut tally = Tally::default();
            let end = ((c + 1) * CHUNK_TRIALS).min(config.trials);
            for _ in c * CHUNK_TRIALS..end {
                let before = tally.failures;
                trial(&mut rng, &mut tally);
                if config.record_trials {
                    tally.outcomes.push(tally.failures == before);
                }
            }
            tally
        })
        .collect();
    tallies.into_iter().fold(Tally::default(), Tally::merge)
}

fn draw(law: &UnivariateGaussian<f64>, rng: &mut ChaCha8Rng) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    law.mean() + law.std_dev() * z
}

fn bpsk_jammer(budget: &PowerBudget<f64>, sign: i8) -> JammerStrategy<f64> {
    SenderSymbol::bpsk(sign > 0).as_jammer(budget)
}

fn finish(protocol: Protocol, config: &SimulationConfig, tally: Tally, diagnostics: Diagnostics, checks: Vec<Check>, start: Instant) -> SimulationReport {
    let error = tally.failures as f64 / tally.observations as f64;
    SimulationReport {
        protocol,
        config: *config,
        empirical_error: error,
        stderr: binomial_stderr(error, tally.observations),
        observations: tally.observations,
        diagnostics,
        checks,
        trial_outcomes: config.record_trials.then_some(tally.outcomes),
        wall_time: start.elapsed(),
    }
}

/// Repetition-coded BPSK against the jammer that replays a uniformly random codeword.
pub fn run_attack_sim(config: &SimulationConfig) -> Result<SimulationReport> {
    let start = Instant::now();
    config.validate()?;
    let budget = config.budget;
    if budget.p < budget.e {
        return Err(Error::AttackInfeasible { e: budget.e, p: budget.p });
    }
    if config.message_count < 2 {
        return Err(Error::InvalidConfig("the attack needs at least two messages".into()));
    }
    let (n, m) = (config.block_length, config.message_count);
    let bits = message_bits(m);
    // laws[s][j]: receiver law for sender sign s and replayed sign j.
    let mut laws = [[UnivariateGaussian::new(0.0, 1.0)?; 2]; 2];
    for (si, s) in [-1i8, 1].into_iter().enumerate() {
        for (ji, j) in [-1i8, 1].into_iter().enumerate() {
            laws[si][ji] = bpsk_homodyne_density(s, &budget, &bpsk_jammer(&budget, j))?;
        }
    }
    let tally = run_chunks(config, |rng, t| {
        let sent = rng.random_range(0..m);
        let replayed = rng.random_range(0..m);
        let mut votes = vec![0.0; bits];
        for i in 0..n {
            let s = usize::from(codeword_sign(sent, i, bits) > 0);
            let j = usize::from(codeword_sign(replayed, i, bits) > 0);
            votes[i % bits] += draw(&laws[s][j], rng);
        }
        let wrong = decode(&votes) != sent;
        t.failures += u64::from(wrong);
        t.observations += 1;
        // counts[0..2]: replays of the sent codeword (total, failed); [2..4]: other codewords.
        let slot = if replayed == sent { 0 } else { 2 };
        t.counts[slot] += 1;
        t.counts[slot + 1] += u64::from(wrong);
    });
    let ratio = |k: usize| (tally.counts[k] > 0).then(|| tally.counts[k + 1] as f64 / tally.counts[k] as f64);
    let bound = symmetrization_error_bound::<f64>(m);
    let diagnostics =
        Diagnostics { bound: Some(bound), error_replay_same: ratio(0), error_replay_other: ratio(2), ..Default::default() };
    let error = tally.failures as f64 / tally.observations as f64;
    let checks = vec![Check {
        name: "error >= 1/2 - 1/(2M) - 3 stderr".into(),
        passed: error >= bound - 3.0 * binomial_stderr(error, tally.observations),
    }];
    Ok(finish(Protocol::Attack, config, tally, diagnostics, checks, start))
}

/// Worst jammer for plain BPSK: minimiser of P(X > 0 | +sqrt E).
pub fn worst_bpsk_jammer(budget: &PowerBudget<f64>) -> Result<JammerStrategy<f64>> {
    worst_case_jammer(|j| bpsk_homodyne_density(1, budget, j).expect("feasible").prob_positive(), budget.p, &JammerGrid::default())
        .map(|(j, _)| j)
}

/// Worst jammer for symmetrised BPSK.
pub fn worst_symmetrized_jammer(budget: &PowerBudget<f64>) -> Result<JammerStrategy<f64>> {
    worst_case_jammer(
        |j| symmetrized_homodyne_density(1, budget, j).expect("feasible").prob_positive(),
        budget.p,
        &JammerGrid::default(),
    )
    .map(|(j, _)| j)
}

/// Per-symbol errors of uncoded BPSK with the threshold decoder sign(x).
///
/// Every trial sends `block_length` independent uniform symbols; the error rate and
/// its standard error are over all symbols.
pub fn run_bpsk_sim(config: &SimulationConfig) -> Result<SimulationReport> {
    let start = Instant::now();
    config.validate()?;
    let budget = config.budget;
    let jammers: Vec<JammerStrategy<f64>> = match config.jammer_policy {
        JammerPolicy::WorstGrid => vec![worst_bpsk_jammer(&budget)?],
        JammerPolicy::Fixed(j) => vec![j],
        JammerPolicy::ReplayCode => {
            if budget.p < budget.e {
                return Err(Error::AttackInfeasible { e: budget.e, p: budget.p });
            }
            vec![bpsk_jammer(&budget, -1), bpsk_jammer(&budget, 1)]
        }
    };
    // laws[j][s]
    let laws: Vec<[UnivariateGaussian<f64>; 2]> = jammers
        .iter()
        .map(|j| Ok([bpsk_homodyne_density(-1, &budget, j)?, bpsk_homodyne_density(1, &budget, j)?]))
        .collect::<Result<_>>()?;
    let analytic_error = laws.iter().map(|[neg, pos]| 0.5 * (neg.prob_positive() + 1.0 - pos.prob_positive())).sum::<f64>() / laws.len() as f64;
    let n = config.block_length;
    let tally = run_chunks(config, |rng, t| {
        for _ in 0..n {
            let s = usize::from(rng.random::<bool>());
            let j = if laws.len() == 1 { 0 } else { usize::from(rng.random::<bool>()) };
            let x = draw(&laws[j][s], rng);
            t.failures += u64::from((x > 0.0) != (s == 1));
        }
        t.observations += n as u64;
    });
    let error = tally.failures as f64 / tally.observations as f64;
    let sigma = binomial_stderr(error, tally.observations);
    let bound = 0.5 + nu(&budget);
    let vacuous = budget.e <= budget.p;
    let mut checks = vec![Check { name: "|error - analytic| <= 4 stderr".into(), passed: (error - analytic_error).abs() <= 4.0 * sigma }];
    if !vacuous {
        checks.push(Check { name: "success >= 1/2 + nu - 3 stderr".into(), passed: 1.0 - error >= bound - 3.0 * sigma });
    }
    let diagnostics = Diagnostics {
        jammer: (jammers.len() == 1).then(|| jammers[0]),
        bound: Some(bound),
        analytic_error: Some(analytic_error),
        vacuous,
        ..Default::default()
    };
    Ok(finish(Protocol::Bpsk, config, tally, diagnostics, checks, start))
}

/// Two-phase protocol: `n` rounds distil shared key bits from `resource`, then `n`
/// BPSK rounds carry the codeword scrambled by those keys.
///
/// The part of the scrambled channel not covered by shared correlation ignores the
/// input but may bias the output (the receiver's key is biased by a displacing
/// jammer), so the codeword alternates the sign of successive copies of a bit and
/// the receiver sums with the same alternation.
pub fn run_correlation_protocol(config: &SimulationConfig, resource: &CorrelationResource<f64>) -> Result<SimulationReport> {
    let start = Instant::now();
    config.validate()?;
    let budget = config.budget;
    let resource_state = resource.state()?;
    let (key_jammers, data_jammers) = match config.jammer_policy {
        JammerPolicy::WorstGrid => {
            let (j1, _) = lambda_c_worst_case_for(resource, &budget, &JammerGrid::default())?;
            (vec![j1], vec![worst_symmetrized_jammer(&budget)?])
        }
        JammerPolicy::Fixed(j) => (vec![j], vec![j]),
        JammerPolicy::ReplayCode => {
            if budget.p < budget.e {
                return Err(Error::AttackInfeasible { e: budget.e, p: budget.p });
            }
            let both = vec![bpsk_jammer(&budget, -1), bpsk_jammer(&budget, 1)];
            (both.clone(), both)
        }
    };
    let key_samplers: Vec<HomodyneSampler<f64>> = key_jammers
        .iter()
        .map(|j| channel_output(&resource_state, &j.state())?.homodyne_sampler(&[0, 1]))
        .collect::<Result<_>>()?;
    let data_laws: Vec<[UnivariateGaussian<f64>; 2]> = data_jammers
        .iter()
        .map(|j| Ok([bpsk_homodyne_density(-1, &budget, j)?, bpsk_homodyne_density(1, &budget, j)?]))
        .collect::<Result<_>>()?;

    // Analytic predictions, averaged over the jammer's random choices.
    let mut q = [0.0; 4];
    for j in &key_jammers {
        let qj = quadrant_distribution_for(resource, &budget, j)?.probs();
        for k in 0..4 {
            q[k] += qj[k] / key_jammers.len() as f64;
        }
    }
    let q = QuadrantDistribution::new(q)?;
    let mut w = [[0.0; 2]; 2];
    for [neg, pos] in &data_laws {
        let scale = 1.0 / data_laws.len() as f64;
        w[0][0] += scale * (1.0 - neg.prob_positive());
        w[0][1] += scale * neg.prob_positive();
        w[1][0] += scale * (1.0 - pos.prob_positive());
        w[1][1] += scale * pos.prob_positive();
    }
    let w = BinaryChannel::new(w)?;
    let analytic_lambda = decompose_on_triangle(&q).lambda_c;
    let predicted_crossover = crate::protocol::effective_crossover(analytic_lambda, symmetrize_with_cr(&w).average_crossover());
    debug_assert!((effective_channel(&w, &q).average_crossover() - predicted_crossover).abs() < 1e-9);

    let (n, m) = (config.block_length, config.message_count);
    let bits = message_bits(m);
    let tally = run_chunks(config, |rng, t| {
        let message = rng.random_range(0..m);
        let mut votes = vec![0.0; bits];
        let mut out = [0.0; 2];
        for i in 0..n {
            let kj = if key_samplers.len() == 1 { 0 } else { usize::from(rng.random::<bool>()) };
            key_samplers[kj].sample_into(rng, &mut out);
            let k_r: i8 = if out[0] > 0.0 { 1 } else { -1 };
            let k_s: i8 = if out[1] > 0.0 { 1 } else { -1 };
            t.counts[quadrant_index(k_r, k_s)] += 1;

            let c = alternating_sign(message, i, bits);
            let x = sign_xor(c, k_s);
            let dj = if data_laws.len() == 1 { 0 } else { usize::from(rng.random::<bool>()) };
            let y: i8 = if draw(&data_laws[dj][usize::from(x > 0)], rng) > 0.0 { 1 } else { -1 };
            let estimate = sign_xor(y, k_r);
            t.counts[4] += u64::from(estimate != c);
            votes[i % bits] += f64::from(estimate * alternation(i, bits));
        }
        // Fair tie-break for even repetition counts.
        for v in votes.iter_mut() {
            if *v == 0.0 {
                *v = if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
        }
        t.failures += u64::from(decode(&votes) != message);
        t.observations += 1;
    });

    let rounds = tally.counts[..4].iter().sum::<u64>();
    let empirical_q = QuadrantDistribution::<f64>::from_counts([tally.counts[0], tally.counts[1], tally.counts[2], tally.counts[3]])?;
    let coeffs = lambda_c_coefficients::<f64>();
    let emp_lambda = decompose_on_triangle(&empirical_q).lambda_c;
    let second: f64 = coeffs.iter().zip(empirical_q.probs()).map(|(a, p)| a * a * p).sum();
    let lambda_stderr = ((second - emp_lambda * emp_lambda).max(0.0) / rounds as f64).sqrt();
    let crossover = tally.counts[4] as f64 / rounds as f64;
    let crossover_stderr = binomial_stderr(crossover, rounds);

    let mut checks = vec![
        Check { name: "|lambda_c - analytic| <= 4 stderr".into(), passed: (emp_lambda - analytic_lambda).abs() <= 4.0 * lambda_stderr },
        Check {
            name: "|crossover - predicted| <= 4 stderr".into(),
            passed: (crossover - predicted_crossover).abs() <= 4.0 * crossover_stderr,
        },
    ];
    if analytic_lambda > 0.0 {
        checks.push(Check { name: "lambda_c > 4 stderr".into(), passed: emp_lambda > 4.0 * lambda_stderr });
    }
    let diagnostics = Diagnostics {
        jammer: (data_jammers.len() == 1).then(|| data_jammers[0]),
        correlation_jammer: (key_jammers.len() == 1).then(|| key_jammers[0]),
        quadrants: Some(empirical_q.probs()),
        empirical_lambda_c: Some(emp_lambda),
        lambda_c_stderr: Some(lambda_stderr),
        analytic_lambda_c: Some(analytic_lambda),
        empirical_crossover: Some(crossover),
        crossover_stderr: Some(crossover_stderr),
        predicted_crossover: Some(predicted_crossover),
        ..Default::default()
    };
    let protocol = match resource {
        CorrelationResource::Tmsv { .. } => Protocol::Tmsv,
        CorrelationResource::ClassicalThermal { .. } => Protocol::Classical,
    };
    Ok(finish(protocol, config, tally, diagnostics, checks, start))
}

/// The protocol with a TMSV resource of transmitted energy `E`.
pub fn run_tmsv_protocol_sim(config: &SimulationConfig) -> Result<SimulationReport> {
    run_correlation_protocol(config, &CorrelationResource::tmsv_for_energy(config.budget.e))
}

/// The protocol with classically correlated thermal light of photon number `E`.
pub fn run_classical_correlation_sim(config: &SimulationConfig) -> Result<SimulationReport> {
    run_correlation_protocol(config, &CorrelationResource::classical_for_energy(config.budget.e))
}

pub fn run(protocol: Protocol, config: &SimulationConfig) -> Result<SimulationReport> {
    match protocol {
        Protocol::Attack => run_attack_sim(config),
        Protocol::Bpsk => run_bpsk_sim(config),
        Protocol::Tmsv => run_tmsv_protocol_sim(config),
        Protocol::Classical => run_classical_correlation_sim(config),
    }
}
