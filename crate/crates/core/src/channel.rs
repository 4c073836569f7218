//! The jammed bosonic channel: sender and jammer modes meet on a 50:50 beam
//! splitter, the receiver keeps one output port and the other is discarded.
//!
//! Port convention: the jammer occupies mode 0 and the sender's transmitted mode
//! mode 1 of the joint state; the receiver keeps output mode 0, whose quadratures
//! are `(jammer + sender) / sqrt 2`. Swapping sender and jammer leaves the
//! receiver's marginal unchanged.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{make_coherent, make_displaced_thermal, make_tmsv, GaussianState, UnivariateGaussian};
use crate::scalar::{half, lit, to_f64, Real};
use crate::special::erf;

/// Per-symbol energy limits of sender (`e`) and jammer (`p`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget<T> {
    pub e: T,
    pub p: T,
}

impl<T: Real> PowerBudget<T> {
    /// `e` must be positive; `p = 0` is accepted and means a silent jammer.
    pub fn new(e: T, p: T) -> Result<Self> {
        if !(e > T::zero() && e.is_finite() && p >= T::zero() && p.is_finite()) {
            return Err(Error::InvalidBudget { e: to_f64(e), p: to_f64(p) });
        }
        Ok(Self { e, p })
    }
}

/// One symbol of the jammer's sequence: the displaced thermal state S_N(beta).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JammerStrategy<T> {
    pub beta: Complex<T>,
    pub n: T,
}

impl<T: Real> JammerStrategy<T> {
    pub fn new(beta: Complex<T>, n: T) -> Result<Self> {
        if !(beta.re.is_finite() && beta.im.is_finite() && n.is_finite()) {
            return Err(Error::NonFinite(to_f64(beta.re + beta.im + n)));
        }
        if n < T::zero() {
            return Err(Error::NegativePhotonNumber(to_f64(n)));
        }
        Ok(Self { beta, n })
    }

    pub fn real(beta: T, n: T) -> Result<Self> {
        Self::new(Complex::new(beta, T::zero()), n)
    }

    /// The vacuum jammer.
    pub fn silent() -> Self {
        Self { beta: Complex::new(T::zero(), T::zero()), n: T::zero() }
    }

    pub fn energy(&self) -> T {
        self.beta.norm_sqr() + self.n
    }

    /// Checks `|beta|^2 + N <= P` up to a relative rounding slack.
    pub fn validate(&self, budget: &PowerBudget<T>) -> Result<()> {
        let used = self.energy();
        if used > budget.p * (T::one() + lit(1e-12)) + lit(1e-15) {
            return Err(Error::InfeasibleJammer { used: to_f64(used), budget: to_f64(budget.p) });
        }
        Ok(())
    }

    pub fn state(&self) -> GaussianState<T> {
        make_displaced_thermal(self.beta, self.n).expect("validated jammer parameters")
    }
}

/// A sender input symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SenderSymbol<T> {
    /// Coherent state of amplitude `sign * sqrt(E)`.
    CoherentBpsk { sign: i8 },
    DisplacedThermal { alpha: Complex<T>, n: T },
    /// Half of a two-mode squeezed vacuum; the other half stays with the sender.
    TmsvHalf { r: T },
}

impl<T: Real> SenderSymbol<T> {
    pub fn bpsk(positive: bool) -> Self {
        Self::CoherentBpsk { sign: if positive { 1 } else { -1 } }
    }

    /// Mean photon number of the transmitted mode.
    pub fn energy(&self, budget: &PowerBudget<T>) -> T {
        match *self {
            Self::CoherentBpsk { .. } => budget.e,
            Self::DisplacedThermal { alpha, n } => alpha.norm_sqr() + n,
            Self::TmsvHalf { r } => r.sinh().powi(2),
        }
    }

    pub fn validate(&self, budget: &PowerBudget<T>) -> Result<()> {
        if let Self::CoherentBpsk { sign } = *self {
            if sign != 1 && sign != -1 {
                return Err(Error::InvalidConfig(format!("BPSK sign must be +-1, got {sign}")));
            }
        }
        let used = self.energy(budget);
        if used > budget.e * (T::one() + lit(1e-12)) + lit(1e-15) {
            return Err(Error::InfeasibleSymbol { used: to_f64(used), budget: to_f64(budget.e) });
        }
        Ok(())
    }

    /// Joint state prepared by the sender; mode 0 is transmitted.
    pub fn state(&self, budget: &PowerBudget<T>) -> Result<GaussianState<T>> {
        self.validate(budget)?;
        match *self {
            Self::CoherentBpsk { sign } => {
                make_coherent(Complex::new(budget.e.sqrt() * lit(f64::from(sign)), T::zero()))
            }
            Self::DisplacedThermal { alpha, n } => make_displaced_thermal(alpha, n),
            Self::TmsvHalf { r } => make_tmsv(r),
        }
    }

    /// The transmitted-mode marginal written as a jammer strategy.
    pub fn as_jammer(&self, budget: &PowerBudget<T>) -> JammerStrategy<T> {
        match *self {
            Self::CoherentBpsk { sign } => JammerStrategy {
                beta: Complex::new(budget.e.sqrt() * lit(f64::from(sign)), T::zero()),
                n: T::zero(),
            },
            Self::DisplacedThermal { alpha, n } => JammerStrategy { beta: alpha, n },
            Self::TmsvHalf { r } => JammerStrategy { beta: Complex::new(T::zero(), T::zero()), n: r.sinh().powi(2) },
        }
    }
}

/// Output of the jammed channel: receiver port first, then the sender's retained modes.
pub fn channel_output<T: Real>(sender: &GaussianState<T>, jammer: &GaussianState<T>) -> Result<GaussianState<T>> {
    if jammer.mode_count() != 1 {
        return Err(Error::ModeCountMismatch(format!("jammer must be single-mode, got {} modes", jammer.mode_count())));
    }
    let joint = jammer.tensor(sender);
    let mixed = joint.apply_beam_splitter(0, 1, half())?;
    let keep: Vec<usize> = std::iter::once(0).chain(2..joint.mode_count()).collect();
    mixed.partial_trace(&keep)
}

/// Receiver x-homodyne law when the sender transmits `sign * sqrt(E)` against `jammer`.
pub fn bpsk_homodyne_density<T: Real>(sign: i8, budget: &PowerBudget<T>, jammer: &JammerStrategy<T>) -> Result<UnivariateGaussian<T>> {
    jammer.validate(budget)?;
    let sender = SenderSymbol::CoherentBpsk { sign }.state(budget)?;
    let out = channel_output(&sender, &jammer.state())?;
    Ok(out.homodyne_x_joint(&[0])?.univariate().expect("single mode"))
}

/// Receiver density after the sender/receiver symmetrise the jammer's phase with a
/// shared bit: the equal mixture of the laws under `beta` and `-beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetrizedDensity<T> {
    components: [UnivariateGaussian<T>; 2],
}

impl<T: Real> SymmetrizedDensity<T> {
    pub fn components(&self) -> [UnivariateGaussian<T>; 2] {
        self.components
    }

    pub fn pdf(&self, x: T) -> T {
        (self.components[0].pdf(x) + self.components[1].pdf(x)) * half()
    }

    pub fn cdf(&self, x: T) -> T {
        (self.components[0].cdf(x) + self.components[1].cdf(x)) * half()
    }

    /// P(X > 0) in closed form.
    pub fn prob_positive(&self) -> T {
        (self.components[0].prob_positive() + self.components[1].prob_positive()) * half()
    }

    /// Mean and variance of the mixture.
    pub fn moments(&self) -> (T, T) {
        let [a, b] = self.components;
        let mean = (a.mean() + b.mean()) * half();
        let second = (a.variance() + a.mean() * a.mean() + b.variance() + b.mean() * b.mean()) * half();
        (mean, second - mean * mean)
    }
}

pub fn symmetrized_homodyne_density<T: Real>(sign: i8, budget: &PowerBudget<T>, jammer: &JammerStrategy<T>) -> Result<SymmetrizedDensity<T>> {
    let flipped = JammerStrategy { beta: -jammer.beta, n: jammer.n };
    Ok(SymmetrizedDensity {
        components: [bpsk_homodyne_density(sign, budget, jammer)?, bpsk_homodyne_density(sign, budget, &flipped)?],
    })
}

/// Closed form of P(X > 0) for the symmetrised density with sender `+sqrt(E)` and
/// a real jammer displacement: `(2 + erf((sqrt E + beta)/sqrt(1+N)) + erf((sqrt E - beta)/sqrt(1+N))) / 4`.
pub fn symmetrized_success_closed_form<T: Real>(e: T, beta: T, n: T) -> T {
    let s = (T::one() + n).sqrt();
    (lit::<T>(2.0) + erf((e.sqrt() + beta) / s) + erf((e.sqrt() - beta) / s)) / lit(4.0)
}

/// The replay jammer: picks one codeword uniformly at random and transmits it.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayAttack<T> {
    sequences: Vec<Vec<JammerStrategy<T>>>,
}

impl<T: Real> ReplayAttack<T> {
    pub fn codeword_count(&self) -> usize {
        self.sequences.len()
    }

    /// Probability with which each codeword is replayed.
    pub fn selection_probability(&self) -> T {
        T::one() / lit(self.sequences.len() as f64)
    }

    pub fn sequence(&self, index: usize) -> &[JammerStrategy<T>] {
        &self.sequences[index]
    }

    /// Draws the index of the replayed codeword.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.sequences.len())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &[JammerStrategy<T>] {
        self.sequence(self.sample_index(rng))
    }
}

/// Builds the jammer that replays a uniformly random codeword of `code`.
/// Feasible only when the jammer's budget covers the sender's (`P >= E`).
pub fn self_jamming_attack<T: Real>(code: &[Vec<SenderSymbol<T>>], budget: &PowerBudget<T>) -> Result<ReplayAttack<T>> {
    if budget.p < budget.e {
        return Err(Error::AttackInfeasible { e: to_f64(budget.e), p: to_f64(budget.p) });
    }
    if code.is_empty() {
        return Err(Error::InvalidConfig("code has no codewords".into()));
    }
    let mut sequences = Vec::with_capacity(code.len());
    for word in code {
        let mut seq = Vec::with_capacity(word.len());
        for sym in word {
            sym.validate(budget)?;
            let j = sym.as_jammer(budget);
            j.validate(budget)?;
            seq.push(j);
        }
        sequences.push(seq);
    }
    Ok(ReplayAttack { sequences })
}
