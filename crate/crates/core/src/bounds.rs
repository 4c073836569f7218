//! Closed-form capacity lower bounds and worst-case jammer search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{bpsk_homodyne_density, symmetrized_homodyne_density, JammerStrategy, PowerBudget};
use crate::error::{Error, Result};
use crate::protocol::{decompose_on_triangle, quadrant_distribution, CorrelationResource};
use crate::scalar::{half, lit, two, Real};
use crate::special::erf;

/// Gap below 1/2 kept when a bound is used as a success probability.
pub const EPSILON_CLAMP_GAP: f64 = 1e-12;

/// nu(E, P) = erf((sqrt E - sqrt P) / sqrt(P + 1)) / 4, unclamped.
pub fn nu<T: Real>(budget: &PowerBudget<T>) -> T {
    erf((budget.e.sqrt() - budget.p.sqrt()) / (budget.p + T::one()).sqrt()) / lit(4.0)
}

pub fn nu_clamped<T: Real>(budget: &PowerBudget<T>) -> T {
    nu(budget).max(T::zero())
}

/// A bound that may be vacuous in part of the parameter range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound<T> {
    pub value: T,
    pub vacuous: bool,
}

/// Rate achievable by direct BPSK coding, vacuous when `E <= P`.
pub fn capacity_lb_direct<T: Real>(budget: &PowerBudget<T>) -> LowerBound<T> {
    let vacuous = budget.e <= budget.p;
    LowerBound { value: if vacuous { T::zero() } else { nu_clamped(budget) }, vacuous }
}

/// eps(E, P) = sqrt(E) / sqrt(pi (1 + P)) * exp(-(sqrt E - sqrt P)^2), unclamped.
pub fn epsilon<T: Real>(budget: &PowerBudget<T>) -> T {
    let gap = budget.e.sqrt() - budget.p.sqrt();
    budget.e.sqrt() / (T::PI() * (T::one() + budget.p)).sqrt() * (-gap * gap).exp()
}

/// `min(eps, 1/2 - 1e-12)`.
pub fn epsilon_clamped<T: Real>(budget: &PowerBudget<T>) -> T {
    epsilon(budget).min(half::<T>() - lit(EPSILON_CLAMP_GAP))
}

/// Advantage over 1/2 that the symmetrised BPSK density provably keeps against
/// every feasible jammer: sqrt(E) / sqrt(pi (1 + P)) * exp(-(sqrt E + sqrt P)^2).
pub fn epsilon_guaranteed<T: Real>(budget: &PowerBudget<T>) -> T {
    let reach = budget.e.sqrt() + budget.p.sqrt();
    budget.e.sqrt() / (T::PI() * (T::one() + budget.p)).sqrt() * (-reach * reach).exp()
}

/// Capacity of BSC(1/2 - x), `1 - h(1/2 - x)`, without cancellation for small `x`.
pub fn bsc_capacity_from_gap<T: Real>(x: T) -> T {
    let x = x.abs().min(half());
    let two_x = two::<T>() * x;
    if x < lit(0.25) {
        // sum_k (2x)^{2k} / (2k (2k - 1)), ratio at most 1/4.
        let y = two_x * two_x;
        let (mut power, mut sum) = (y, T::zero());
        for k in 1..200 {
            let kk = lit::<T>(2.0 * f64::from(k));
            let term = power / (kk * (kk - T::one()));
            sum += term;
            if term <= sum * T::epsilon() {
                break;
            }
            power *= y;
        }
        return sum / T::LN_2();
    }
    let up = (half::<T>() + x) * two_x.ln_1p();
    let down = if x == half() { T::zero() } else { (half::<T>() - x) * (-two_x).ln_1p() };
    ((up + down) / T::LN_2()).max(T::zero())
}

/// 1 - h(1/2 + eps_clamped).
pub fn capacity_lb_cr<T: Real>(budget: &PowerBudget<T>) -> T {
    bsc_capacity_from_gap(epsilon_clamped(budget))
}

/// Lower bound on lambda_c over all feasible jammers for the TMSV resource.
///
/// Uses the worst-case correlation of the jammed output,
/// `rho_min^2 = E (E + 1) / ((1 + 2E)(E + P + 1))`, and the smallest conditional
/// variance `(1 + E) / (2 (1 + 2E))`, reached by the noiseless jammer.
pub fn delta_lower_bound<T: Real>(budget: &PowerBudget<T>) -> T {
    let (e, p) = (budget.e, budget.p);
    let one = T::one();
    let rho = (e * (e + one) / ((one + two::<T>() * e) * (e + p + one))).sqrt();
    let exponent = p * (one + two::<T>() * e) / (one + e);
    rho / T::TAU() * (-exponent).exp()
}

/// The chain with the substitutions
/// `|rho| >= 2 sqrt(E (E + 2)) / sqrt((1 + 2E)(P + 2E + 2))` and `A + B <= (P + E + 1) / 2`.
///
/// The correlation bound exceeds 1 once `P < 2 (E - 1) / (2E + 1)`; it is then
/// capped at 1, the exponent diverges, and the result is 0 for `P > 0`.
pub fn delta_lower_bound_literal<T: Real>(budget: &PowerBudget<T>) -> T {
    let (e, p) = (budget.e, budget.p);
    let one = T::one();
    let rho = (lit::<T>(4.0) * e * (e + two()) / ((one + two::<T>() * e) * (p + two::<T>() * e + two()))).sqrt();
    let ab = (p + e + one) * half();
    let gap = one - rho * rho;
    if gap <= T::zero() {
        return if p == T::zero() { T::one() / T::TAU() } else { T::zero() };
    }
    rho / T::TAU() * (-p / (two::<T>() * ab * gap)).exp()
}

/// Capacity of the scrambled channel: the symmetrised BSC has crossover
/// `1/2 - eps`, and mixing it with BSC(1/2) at weight `lambda = delta` gives
/// `1 - h(1/2 - lambda eps)`.
pub fn capacity_lb_quantum<T: Real>(budget: &PowerBudget<T>) -> T {
    bsc_capacity_from_gap(delta_lower_bound(budget) * epsilon_clamped(budget))
}

/// `1/2 - 1/(2M)`: average error forced by the replay jammer on an `M`-message code.
///
/// # Panics
/// If `m == 0`.
pub fn symmetrization_error_bound<T: Real>(m: usize) -> T {
    assert!(m >= 1, "a code needs at least one message");
    half::<T>() - T::one() / lit(2.0 * m as f64)
}

/// Resolution of the jammer search over real `beta` and the noise fraction `t`,
/// where `N = t (P - beta^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JammerGrid {
    pub beta_points: usize,
    pub noise_points: usize,
    /// Points per axis of the local pass around the incumbent (0 disables it).
    pub refine_points: usize,
}

impl Default for JammerGrid {
    fn default() -> Self {
        Self { beta_points: 201, noise_points: 201, refine_points: 21 }
    }
}

impl JammerGrid {
    pub fn coarse() -> Self {
        Self { beta_points: 41, noise_points: 21, refine_points: 11 }
    }
}

fn axis<T: Real>(lo: T, hi: T, points: usize, i: usize) -> T {
    if points == 1 {
        return (lo + hi) * half();
    }
    lo + (hi - lo) * lit(i as f64) / lit((points - 1) as f64)
}

fn argmin<T: Real>(values: &[T]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold(None, |best: Option<(usize, T)>, (i, &v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

fn jammer_at<T: Real>(beta: T, t: T, p: T) -> JammerStrategy<T> {
    let n = (t * (p - beta * beta)).max(T::zero());
    JammerStrategy::real(beta, n).expect("finite grid point")
}

/// Minimises `objective` over real jammers with `beta^2 + N <= P`.
///
/// Grid points are evaluated in parallel; ties resolve to the lowest grid index, so
/// the result does not depend on the thread count.
pub fn worst_case_jammer<T, F>(objective: F, p: T, grid: &JammerGrid) -> Result<(JammerStrategy<T>, T)>
where
    T: Real,
    F: Fn(&JammerStrategy<T>) -> T + Sync,
{
    if grid.beta_points == 0 || grid.noise_points == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(p >= T::zero()) {
        return Err(Error::InvalidBudget { e: f64::NAN, p: crate::scalar::to_f64(p) });
    }
    let reach = p.sqrt();
    let search = |b_lo: T, b_hi: T, nb: usize, t_lo: T, t_hi: T, nt: usize| -> Option<(JammerStrategy<T>, T, usize, usize)> {
        let values: Vec<T> = (0..nb * nt)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / nt, k % nt);
                objective(&jammer_at(axis(b_lo, b_hi, nb, i), axis(t_lo, t_hi, nt, j), p))
            })
            .collect();
        argmin(&values).map(|k| {
            let (i, j) = (k / nt, k % nt);
            (jammer_at(axis(b_lo, b_hi, nb, i), axis(t_lo, t_hi, nt, j), p), values[k], i, j)
        })
    };
    let (mut best, mut value, i, j) =
        search(-reach, reach, grid.beta_points, T::zero(), T::one(), grid.noise_points).ok_or(Error::EmptyGrid)?;
    if grid.refine_points > 0 {
        let step_b = if grid.beta_points > 1 { two::<T>() * reach / lit((grid.beta_points - 1) as f64) } else { T::zero() };
        let step_t = if grid.noise_points > 1 { T::one() / lit((grid.noise_points - 1) as f64) } else { T::zero() };
        let b0 = axis(-reach, reach, grid.beta_points, i);
        let t0 = axis(T::zero(), T::one(), grid.noise_points, j);
        let (b_lo, b_hi) = ((b0 - step_b).max(-reach), (b0 + step_b).min(reach));
        let (t_lo, t_hi) = ((t0 - step_t).max(T::zero()), (t0 + step_t).min(T::one()));
        if let Some((cand, v, _, _)) = search(b_lo, b_hi, grid.refine_points, t_lo, t_hi, grid.refine_points) {
            if v < value {
                best = cand;
                value = v;
            }
        }
    }
    Ok((best, value))
}

/// Worst-case jammer for one bound, with the derived objective value there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase<T> {
    pub jammer: JammerStrategy<T>,
    /// Minimum of the exact objective over the grid.
    pub value: T,
    /// What the bound predicts for the objective.
    pub bound: T,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstJammers<T> {
    /// P(correct) of plain BPSK against `1/2 + nu`.
    pub nu: WorstCase<T>,
    /// P(correct) of symmetrised BPSK against `1/2 + eps_clamped`.
    pub epsilon: WorstCase<T>,
    /// Same objective against `1/2 + epsilon_guaranteed`.
    pub epsilon_guaranteed: WorstCase<T>,
    /// lambda_c of the TMSV quadrant law against `delta`.
    pub delta: WorstCase<T>,
    /// lambda_c against the literal chain.
    pub delta_literal: WorstCase<T>,
}

/// Slack allowed when comparing a grid minimum with a bound.
pub const BOUND_CHECK_TOLERANCE: f64 = 1e-9;

/// All bounds at one budget point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<T> {
    pub e: T,
    pub p: T,
    /// max(nu, 0).
    pub nu: T,
    pub nu_raw: T,
    /// Clamped below 1/2.
    pub epsilon: T,
    pub epsilon_raw: T,
    pub epsilon_guaranteed: T,
    pub delta: T,
    pub delta_literal: T,
    pub cap_direct: T,
    pub cap_direct_vacuous: bool,
    pub cap_cr: T,
    #[serde(rename = "cap_q_lb")]
    pub cap_q: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_jammers: Option<WorstJammers<T>>,
}

impl<T: Real> BoundReport<T> {
    /// Closed-form values only.
    pub fn closed_form(budget: &PowerBudget<T>) -> Self {
        let direct = capacity_lb_direct(budget);
        Self {
            e: budget.e,
            p: budget.p,
            nu: nu_clamped(budget),
            nu_raw: nu(budget),
            epsilon: epsilon_clamped(budget),
            epsilon_raw: epsilon(budget),
            epsilon_guaranteed: epsilon_guaranteed(budget),
            delta: delta_lower_bound(budget),
            delta_literal: delta_lower_bound_literal(budget),
            cap_direct: direct.value,
            cap_direct_vacuous: direct.vacuous,
            cap_cr: capacity_lb_cr(budget),
            cap_q: capacity_lb_quantum(budget),
            worst_jammers: None,
        }
    }

    /// Closed-form values plus the worst jammer for each bound's objective.
    pub fn with_worst_case(budget: &PowerBudget<T>, grid: &JammerGrid) -> Result<Self> {
        let mut report = Self::closed_form(budget);
        let tol = lit::<T>(BOUND_CHECK_TOLERANCE);
        let case = |(jammer, value): (JammerStrategy<T>, T), bound: T| WorstCase { jammer, value, bound, holds: value + tol >= bound };

        let plain = worst_case_jammer(|j| bpsk_homodyne_density(1, budget, j).expect("grid jammer is feasible").prob_positive(), budget.p, grid)?;
        let sym = worst_case_jammer(
            |j| symmetrized_homodyne_density(1, budget, j).expect("grid jammer is feasible").prob_positive(),
            budget.p,
            grid,
        )?;
        let resource = CorrelationResource::tmsv_for_energy(budget.e);
        let lambda = crate::protocol::lambda_c_worst_case_for(&resource, budget, grid)?;
        report.worst_jammers = Some(WorstJammers {
            nu: case(plain, half::<T>() + report.nu_raw),
            epsilon: case(sym, half::<T>() + report.epsilon),
            epsilon_guaranteed: case(sym, half::<T>() + report.epsilon_guaranteed),
            delta: case(lambda, report.delta),
            delta_literal: case(lambda, report.delta_literal),
        });
        Ok(report)
    }
}

/// lambda_c of the TMSV quadrant law for one jammer.
pub fn lambda_c<T: Real>(budget: &PowerBudget<T>, jammer: &JammerStrategy<T>) -> Result<T> {
    Ok(decompose_on_triangle(&quadrant_distribution(budget, jammer)?).lambda_c)
}
