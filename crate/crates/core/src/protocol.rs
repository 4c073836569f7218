//! Correlation distillation from a jammed two-mode resource: joint homodyne sign
//! statistics, their decomposition on the triangle spanned by the perfectly
//! correlated and the two one-sided uniform distributions, and the binary channel
//! transformations driven by the resulting shared bits.
//!
//! Sign/bit convention: `-1` is bit 0, `+1` is bit 1, and `a (+) b` is XOR under
//! that map, i.e. `-(a * b)` on signs. Quadrant arrays are ordered
//! `[(-,-), (-,+), (+,-), (+,+)]`; the first coordinate is the receiver's sign
//! (jammed output port), the second the sender's sign (retained mode).

use serde::{Deserialize, Serialize};

use crate::bounds::{worst_case_jammer, JammerGrid};
use crate::channel::{channel_output, JammerStrategy, PowerBudget};
use crate::error::{Error, Result};
use crate::gaussian::{make_classically_correlated_thermal, make_tmsv, tmsv_squeezing_for_energy, GaussianState};
use crate::linalg::Matrix;
use crate::scalar::{half, lit, to_f64, Real};

/// XOR on {-1, +1} with -1 as the neutral element.
#[inline]
pub fn sign_xor(a: i8, b: i8) -> i8 {
    -(a * b)
}

#[inline]
fn idx(sign: i8) -> usize {
    usize::from(sign > 0)
}

/// Index into a quadrant array.
#[inline]
pub fn quadrant_index(receiver: i8, sender: i8) -> usize {
    2 * idx(receiver) + idx(sender)
}

/// A bipartite Gaussian resource whose mode 0 is transmitted and mode 1 retained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationResource<T> {
    /// Two-mode squeezed vacuum with squeezing `r`.
    Tmsv { r: T },
    /// Classically correlated thermal light S_N^(2).
    ClassicalThermal { n: T },
}

impl<T: Real> CorrelationResource<T> {
    /// TMSV whose transmitted marginal has mean photon number `e`.
    pub fn tmsv_for_energy(e: T) -> Self {
        Self::Tmsv { r: tmsv_squeezing_for_energy(e) }
    }

    pub fn classical_for_energy(e: T) -> Self {
        Self::ClassicalThermal { n: e }
    }

    pub fn state(&self) -> Result<GaussianState<T>> {
        match *self {
            Self::Tmsv { r } => make_tmsv(r),
            Self::ClassicalThermal { n } => make_classically_correlated_thermal(n),
        }
    }

    /// Mean photon number of the transmitted marginal.
    pub fn energy(&self) -> T {
        match *self {
            Self::Tmsv { r } => r.sinh().powi(2),
            Self::ClassicalThermal { n } => n,
        }
    }
}

/// Joint law of (receiver sign, sender sign).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantDistribution<T> {
    probs: [T; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    resource: Option<CorrelationResource<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jammer: Option<JammerStrategy<T>>,
}

/// Tolerance on normalisation of a quadrant distribution.
pub const QUADRANT_SUM_TOLERANCE: f64 = 1e-10;

impl<T: Real> QuadrantDistribution<T> {
    pub fn new(probs: [T; 4]) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= T::zero())) {
            return Err(Error::InvalidProbability(to_f64(probs.iter().fold(T::zero(), |m, &p| m.min(p)))));
        }
        let total = probs.iter().fold(T::zero(), |a, &b| a + b);
        if (total - T::one()).abs() > lit(QUADRANT_SUM_TOLERANCE) {
            return Err(Error::InvalidProbability(to_f64(total)));
        }
        Ok(Self { probs, resource: None, jammer: None })
    }

    /// Empirical distribution from counts in quadrant order.
    pub fn from_counts(counts: [u64; 4]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidConfig("no samples".into()));
        }
        Self::new(counts.map(|c| lit::<T>(c as f64) / lit(total as f64)))
    }

    /// Perfectly correlated uniform bits, q_c(u, v) = delta(u, v) / 2.
    pub fn correlated() -> Self {
        Self { probs: [half(), T::zero(), T::zero(), half()], resource: None, jammer: None }
    }

    pub fn uniform() -> Self {
        Self { probs: [lit(0.25); 4], resource: None, jammer: None }
    }

    /// Product distribution with P(receiver = +1) = `a`, P(sender = +1) = `b`.
    pub fn product(a: T, b: T) -> Self {
        let (na, nb) = (T::one() - a, T::one() - b);
        Self { probs: [na * nb, na * b, a * nb, a * b], resource: None, jammer: None }
    }

    pub fn probs(&self) -> [T; 4] {
        self.probs
    }

    pub fn get(&self, receiver: i8, sender: i8) -> T {
        self.probs[quadrant_index(receiver, sender)]
    }

    pub fn jammer(&self) -> Option<&JammerStrategy<T>> {
        self.jammer.as_ref()
    }

    pub fn resource(&self) -> Option<&CorrelationResource<T>> {
        self.resource.as_ref()
    }

    /// q(1,1) q(-1,-1) - q(1,-1) q(-1,1).
    pub fn determinant(&self) -> T {
        let p = self.probs;
        p[3] * p[0] - p[2] * p[1]
    }

    /// P(receiver sign = -1).
    pub fn receiver_negative(&self) -> T {
        self.probs[0] + self.probs[1]
    }

    pub fn l1_distance(&self, other: &Self) -> T {
        self.probs.iter().zip(&other.probs).fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs())
    }
}

/// Sign statistics of the joint x-homodyne on the jammed resource.
pub fn quadrant_distribution_for<T: Real>(
    resource: &CorrelationResource<T>,
    budget: &PowerBudget<T>,
    jammer: &JammerStrategy<T>,
) -> Result<QuadrantDistribution<T>> {
    jammer.validate(budget)?;
    let out = channel_output(&resource.state()?, &jammer.state())?;
    let law = out.homodyne_x_joint(&[0, 1])?.bivariate().expect("two modes");
    let mut probs = law.sign_quadrants();
    // Absorb rounding so the probabilities stay a distribution.
    for p in probs.iter_mut() {
        *p = p.max(T::zero());
    }
    Ok(QuadrantDistribution { probs, resource: Some(*resource), jammer: Some(*jammer) })
}

/// Sign statistics for the TMSV resource with `cosh 2r = 1 + 2E`.
pub fn quadrant_distribution<T: Real>(budget: &PowerBudget<T>, jammer: &JammerStrategy<T>) -> Result<QuadrantDistribution<T>> {
    quadrant_distribution_for(&CorrelationResource::tmsv_for_energy(budget.e), budget, jammer)
}

/// Weights of a quadrant distribution on the vertices q_c, q_{-1} = delta_{-1} (x) pi,
/// q_{+1} = delta_{+1} (x) pi.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexDecomposition<T> {
    pub lambda_c: T,
    pub lambda_minus: T,
    pub lambda_plus: T,
    /// Euclidean norm of the least-squares residual.
    pub residual: T,
    /// All weights >= -tolerance and residual <= tolerance.
    pub in_triangle: bool,
}

/// Residual and negativity tolerance for triangle membership.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

fn triangle_vertices<T: Real>() -> Matrix<T> {
    let (h, z) = (half::<T>(), T::zero());
    // Columns: q_c, q_{-1}, q_{+1}; rows in quadrant order.
    Matrix::from_rows(&[&[h, h, z], &[z, h, z], &[z, z, h], &[h, z, h]])
}

/// Least-squares solution of q = l_c q_c + l_{-1} q_{-1} + l_{+1} q_{+1}.
pub fn decompose_on_triangle<T: Real>(q: &QuadrantDistribution<T>) -> SimplexDecomposition<T> {
    let a = triangle_vertices::<T>();
    let at = a.transpose();
    let lambda = at.mul(&a).solve(&at.mul_vec(&q.probs)).expect("triangle vertices are independent");
    let fitted = a.mul_vec(&lambda);
    let residual = fitted.iter().zip(&q.probs).fold(T::zero(), |acc, (&f, &p)| acc + (f - p) * (f - p)).sqrt();
    let tol = lit::<T>(TRIANGLE_TOLERANCE);
    SimplexDecomposition {
        lambda_c: lambda[0],
        lambda_minus: lambda[1],
        lambda_plus: lambda[2],
        residual,
        in_triangle: residual <= tol && lambda.iter().all(|&l| l >= -tol),
    }
}

/// Coefficients `a` with `lambda_c = sum_k a_k q_k` for the least-squares fit.
pub fn lambda_c_coefficients<T: Real>() -> [T; 4] {
    std::array::from_fn(|k| {
        let mut e = [T::zero(); 4];
        e[k] = T::one();
        decompose_on_triangle(&QuadrantDistribution { probs: e, resource: None, jammer: None }).lambda_c
    })
}

/// Worst case of lambda_c over the feasible jammers, with the minimising jammer.
pub fn lambda_c_worst_case_for<T: Real>(
    resource: &CorrelationResource<T>,
    budget: &PowerBudget<T>,
    grid: &JammerGrid,
) -> Result<(JammerStrategy<T>, T)> {
    let state = resource.state()?;
    worst_case_jammer(
        |j| {
            let out = channel_output(&state, &j.state()).expect("two-mode resource");
            let law = out.homodyne_x_joint(&[0, 1]).expect("valid modes").bivariate().expect("two modes");
            let q = QuadrantDistribution { probs: law.sign_quadrants(), resource: None, jammer: None };
            decompose_on_triangle(&q).lambda_c
        },
        budget.p,
        grid,
    )
}

/// Minimum over the jammer grid of lambda_c for the TMSV resource.
pub fn lambda_c_worst_case<T: Real>(budget: &PowerBudget<T>, grid: &JammerGrid) -> Result<T> {
    lambda_c_worst_case_for(&CorrelationResource::tmsv_for_energy(budget.e), budget, grid).map(|(_, v)| v)
}

/// A binary channel w(y|x) on {-1, +1}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryChannel<T> {
    /// `w[x][y]` with index 0 for -1 and 1 for +1.
    w: [[T; 2]; 2],
}

/// Row-sum tolerance for stochastic matrices.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

impl<T: Real> BinaryChannel<T> {
    /// `w[x][y]` with index 0 for -1 and 1 for +1.
    pub fn new(w: [[T; 2]; 2]) -> Result<Self> {
        for row in &w {
            if row.iter().any(|p| !(*p >= T::zero() && *p <= T::one())) {
                return Err(Error::NotStochastic(format!("entry outside [0, 1] in row {row:?}")));
            }
            if (row[0] + row[1] - T::one()).abs() > lit(STOCHASTIC_TOLERANCE) {
                return Err(Error::NotStochastic(format!("row {row:?} does not sum to 1")));
            }
        }
        Ok(Self { w })
    }

    /// From the two probabilities of a correct output.
    pub fn from_success(correct_minus: T, correct_plus: T) -> Result<Self> {
        Self::new([[correct_minus, T::one() - correct_minus], [T::one() - correct_plus, correct_plus]])
    }

    pub fn bsc(p: T) -> Result<Self> {
        Self::from_success(T::one() - p, T::one() - p)
    }

    pub fn prob(&self, y: i8, x: i8) -> T {
        self.w[idx(x)][idx(y)]
    }

    pub fn matrix(&self) -> [[T; 2]; 2] {
        self.w
    }

    /// Crossover averaged over a uniform input: (w(1|-1) + w(-1|1)) / 2.
    pub fn average_crossover(&self) -> T {
        (self.w[0][1] + self.w[1][0]) * half()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (self.w[0][0] - self.w[1][1]).abs() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.w.iter().flatten().zip(other.w.iter().flatten()).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Pointwise convex combination `l * self + (1 - l) * other`.
    pub fn mix(&self, other: &Self, l: T) -> Self {
        let w = std::array::from_fn(|x| std::array::from_fn(|y| l * self.w[x][y] + (T::one() - l) * other.w[x][y]));
        Self { w }
    }
}

const SIGNS: [i8; 2] = [-1, 1];

/// Symmetrisation with a perfectly shared uniform bit u: w_c(y|x) = 1/2 sum_u w(y(+)u | x(+)u).
pub fn symmetrize_with_cr<T: Real>(w: &BinaryChannel<T>) -> BinaryChannel<T> {
    let m = std::array::from_fn(|xi| {
        std::array::from_fn(|yi| {
            let (x, y) = (SIGNS[xi], SIGNS[yi]);
            SIGNS.iter().fold(T::zero(), |acc, &u| acc + w.prob(sign_xor(y, u), sign_xor(x, u))) * half()
        })
    });
    BinaryChannel { w: m }
}

/// Scrambling the output with an independent uniform bit: always BSC(1/2).
pub fn scramble_uncorrelated<T: Real>(w: &BinaryChannel<T>) -> BinaryChannel<T> {
    let m = std::array::from_fn(|xi| {
        std::array::from_fn(|yi| {
            let (x, y) = (SIGNS[xi], SIGNS[yi]);
            SIGNS.iter().fold(T::zero(), |acc, &v| acc + w.prob(sign_xor(y, v), x)) * half()
        })
    });
    BinaryChannel { w: m }
}

/// Channel seen after the sender XORs its key into the input and the receiver XORs
/// its key into the output: `w~(y|x) = sum q(k_r, k_s) w(y (+) k_r | x (+) k_s)`.
///
/// For q in the triangle this equals `lambda_c w_c + (1 - lambda_c) u` where `u`
/// ignores the input; when `w` is symmetric `u` is BSC(1/2), and for every `w` the
/// input-averaged crossover is `lambda_c p_c + (1 - lambda_c) / 2`.
pub fn effective_channel<T: Real>(w: &BinaryChannel<T>, q: &QuadrantDistribution<T>) -> BinaryChannel<T> {
    let m = std::array::from_fn(|xi| {
        std::array::from_fn(|yi| {
            let (x, y) = (SIGNS[xi], SIGNS[yi]);
            let mut acc = T::zero();
            for &kr in &SIGNS {
                for &ks in &SIGNS {
                    acc += q.get(kr, ks) * w.prob(sign_xor(y, kr), sign_xor(x, ks));
                }
            }
            acc
        })
    });
    BinaryChannel { w: m }
}

/// Crossover of the effective BSC predicted by the triangle decomposition.
pub fn effective_crossover<T: Real>(lambda_c: T, symmetric_crossover: T) -> T {
    lambda_c * symmetric_crossover + (T::one() - lambda_c) * half()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{phi, phi2, Correlation};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn budget(e: f64, p: f64) -> PowerBudget<f64> {
        PowerBudget::new(e, p).unwrap()
    }

    #[test]
    fn xor_convention() {
        assert_eq!(sign_xor(-1, -1), -1);
        assert_eq!(sign_xor(-1, 1), 1);
        assert_eq!(sign_xor(1, -1), 1);
        assert_eq!(sign_xor(1, 1), -1);
    }

    #[test]
    fn unjammed_quadrants_at_unit_energy() {
        // V_G = [[1, 1], [1, 3/2]] so rho = sqrt(2/3); q(-,-) = 1/4 + asin(rho)/(2 pi).
        let q = quadrant_distribution(&budget(1.0, 1.0), &JammerStrategy::silent()).unwrap();
        let rho = (2.0f64 / 3.0).sqrt();
        let expected = 0.25 + rho.asin() / std::f64::consts::TAU;
        assert_abs_diff_eq!(q.get(-1, -1), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(q.get(-1, -1), phi2(0.0, 0.0, Correlation::new(rho).unwrap()), epsilon = 1e-14);
        assert_abs_diff_eq!(q.get(1, 1), q.get(-1, -1), epsilon = 1e-14);
        assert_abs_diff_eq!(q.get(-1, 1), q.get(1, -1), epsilon = 1e-14);
        let d = decompose_on_triangle(&q);
        assert_abs_diff_eq!(d.lambda_c, 4.0 * q.get(-1, -1) - 1.0, epsilon = 1e-12);
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn quadrant_formulas_under_jamming() {
        // q(-,-) = Phi2(-beta/sqrt(A+B), 0, rho), q(-,+) = Phi(-beta/sqrt(A+B)) - q(-,-),
        // q(+,-) = 1/2 - q(-,-).
        let (e, beta, n) = (1.3f64, 0.6, 0.4);
        let b = budget(e, 1.0);
        let q = quadrant_distribution(&b, &JammerStrategy::real(beta, n).unwrap()).unwrap();
        let cosh = 1.0 + 2.0 * e;
        let sinh = (cosh * cosh - 1.0).sqrt();
        let (a_, b_, c_) = ((n + 0.5) / 2.0, cosh / 4.0, sinh / (2.0 * 2f64.sqrt()));
        let rho = c_ / (2.0 * b_ * (a_ + b_)).sqrt();
        let t = -beta / (a_ + b_).sqrt();
        let qmm = phi2(t, 0.0, Correlation::new(rho).unwrap());
        assert_abs_diff_eq!(q.get(-1, -1), qmm, epsilon = 1e-13);
        assert_abs_diff_eq!(q.get(-1, 1), phi(t) - qmm, epsilon = 1e-13);
        assert_abs_diff_eq!(q.get(1, -1), 0.5 - qmm, epsilon = 1e-13);
        assert_abs_diff_eq!(q.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // |det q| = |q(-,-) - Phi(t)/2|.
        assert_abs_diff_eq!(q.determinant().abs(), (qmm - 0.5 * phi(t)).abs(), epsilon = 1e-12);
        let bad = JammerStrategy::real(1.0, 0.5).unwrap();
        assert!(quadrant_distribution(&b, &bad).is_err());
    }

    #[test]
    fn decomposition_vertices() {
        let d = decompose_on_triangle(&QuadrantDistribution::<f64>::correlated());
        assert_abs_diff_eq!(d.lambda_c, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.lambda_minus, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.lambda_plus, 0.0, epsilon = 1e-15);
        assert!(d.residual < 1e-15 && d.in_triangle);
        let u = decompose_on_triangle(&QuadrantDistribution::<f64>::uniform());
        assert_abs_diff_eq!(u.lambda_c, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.lambda_minus, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(u.lambda_plus, 0.5, epsilon = 1e-15);
        // Anti-correlated bits are outside the triangle.
        let anti = QuadrantDistribution::new([0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!(!decompose_on_triangle(&anti).in_triangle);
    }

    #[test]
    fn lambda_c_coefficients_are_linear_functional() {
        let a = lambda_c_coefficients::<f64>();
        let q = quadrant_distribution(&budget(0.8, 0.5), &JammerStrategy::real(-0.3, 0.2).unwrap()).unwrap();
        let lin: f64 = a.iter().zip(q.probs()).map(|(c, p)| c * p).sum();
        assert_abs_diff_eq!(lin, decompose_on_triangle(&q).lambda_c, epsilon = 1e-14);
    }

    #[test]
    fn channel_transform_examples() {
        let bsc = BinaryChannel::bsc(0.2).unwrap();
        assert!(symmetrize_with_cr(&bsc).max_abs_diff(&bsc) < 1e-15);
        let w = BinaryChannel::from_success(0.9, 0.7).unwrap();
        let wc = symmetrize_with_cr(&w);
        assert!(wc.max_abs_diff(&BinaryChannel::bsc(0.2).unwrap()) < 1e-15);
        let half = BinaryChannel::bsc(0.5).unwrap();
        assert!(scramble_uncorrelated(&w).max_abs_diff(&half) < 1e-15);
        assert!(scramble_uncorrelated(&BinaryChannel::bsc(0.0).unwrap()).max_abs_diff(&half) < 1e-15);
        let once = scramble_uncorrelated(&w);
        assert_eq!(scramble_uncorrelated(&once), once);
        assert!(BinaryChannel::new([[0.6, 0.5], [0.5, 0.5]]).is_err());
    }

    #[test]
    fn effective_channel_examples() {
        let w = BinaryChannel::from_success(0.9, 0.7).unwrap();
        assert!(effective_channel(&w, &QuadrantDistribution::correlated()).max_abs_diff(&symmetrize_with_cr(&w)) < 1e-15);
        let bsc = BinaryChannel::bsc(0.1).unwrap();
        let half = BinaryChannel::bsc(0.5).unwrap();
        assert!(effective_channel(&bsc, &QuadrantDistribution::uniform()).max_abs_diff(&half) < 1e-15);
        // lambda_c = 1/2: q = q_c/2 + q_{-1}/4 + q_{+1}/4.
        let q = QuadrantDistribution::new([0.25 + 0.125, 0.125, 0.125, 0.25 + 0.125]).unwrap();
        assert_abs_diff_eq!(decompose_on_triangle(&q).lambda_c, 0.5, epsilon = 1e-15);
        let eff = effective_channel(&bsc, &q);
        assert!(eff.max_abs_diff(&BinaryChannel::bsc(0.3).unwrap()) < 1e-15);
    }

    #[test]
    fn classical_resource_is_weaker_than_tmsv() {
        let b = budget(1.0, 1.0);
        let j = JammerStrategy::silent();
        let tm = decompose_on_triangle(&quadrant_distribution(&b, &j).unwrap()).lambda_c;
        let cl = decompose_on_triangle(
            &quadrant_distribution_for(&CorrelationResource::classical_for_energy(1.0), &b, &j).unwrap(),
        )
        .lambda_c;
        assert!(tm > cl && cl > 0.0);
        // Vacuum resource: no correlation.
        let none = quadrant_distribution_for(&CorrelationResource::ClassicalThermal { n: 0.0 }, &b, &j).unwrap();
        assert_abs_diff_eq!(decompose_on_triangle(&none).lambda_c, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn worst_case_lambda_examples() {
        let grid = JammerGrid::coarse();
        let silent = PowerBudget::new(1.0, 0.0).unwrap();
        let unjammed = decompose_on_triangle(&quadrant_distribution(&silent, &JammerStrategy::silent()).unwrap()).lambda_c;
        assert_abs_diff_eq!(lambda_c_worst_case(&silent, &grid).unwrap(), unjammed, epsilon = 1e-14);
        let mut last = f64::INFINITY;
        for p in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let v = lambda_c_worst_case(&budget(1.0, p), &grid).unwrap();
            assert!(v <= last + 1e-12, "not monotone at P = {p}");
            last = v;
        }
    }

    proptest! {
        #[test]
        fn jammed_quadrants_lie_in_triangle(e in 0.05f64..5.0, p in 0.05f64..5.0, u in -1.0f64..1.0, v in 0.0f64..1.0) {
            let b = budget(e, p);
            let beta = u * p.sqrt();
            let n = v * (p - beta * beta);
            let q = quadrant_distribution(&b, &JammerStrategy::real(beta, n).unwrap()).unwrap();
            let d = decompose_on_triangle(&q);
            prop_assert!(d.residual <= 1e-9);
            prop_assert!(d.in_triangle);
            prop_assert!(q.get(1, -1) < 0.5);
            prop_assert!((q.get(1, -1) - (0.5 - q.get(-1, -1))).abs() < 1e-9);
        }

        #[test]
        fn effective_channel_matches_mixture(p in 0.0f64..0.5, e in 0.1f64..3.0, beta in -0.7f64..0.7, n in 0.0f64..0.5, a in 0.0f64..1.0, c in 0.0f64..1.0) {
            let q = quadrant_distribution(&budget(e, 1.0), &JammerStrategy::real(beta, n).unwrap()).unwrap();
            let lc = decompose_on_triangle(&q).lambda_c;
            let bsc = BinaryChannel::bsc(p).unwrap();
            let eff = effective_channel(&bsc, &q);
            let mixed = symmetrize_with_cr(&bsc).mix(&BinaryChannel::bsc(0.5).unwrap(), lc);
            prop_assert!(eff.max_abs_diff(&mixed) < 1e-10);
            // For an asymmetric channel only the input-averaged crossover is pinned.
            let w = BinaryChannel::from_success(a, c).unwrap();
            let eff = effective_channel(&w, &q);
            let predicted = effective_crossover(lc, symmetrize_with_cr(&w).average_crossover());
            prop_assert!((eff.average_crossover() - predicted).abs() < 1e-10);
        }

        #[test]
        fn l1_distance_to_products_bounds_determinant(e in 0.1f64..4.0, beta in -0.5f64..0.5, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let q = quadrant_distribution(&budget(e, 0.5), &JammerStrategy::real(beta, 0.1).unwrap()).unwrap();
            let prod = QuadrantDistribution::product(a, b);
            prop_assert!(q.l1_distance(&prod) + 1e-12 >= q.determinant().abs());
        }
    }
}
