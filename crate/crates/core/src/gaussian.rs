//! First- and second-moment calculus for the Gaussian states used by the channel
//! model, plus x-quadrature homodyne statistics and sampling.
//!
//! Conventions, fixed here and nowhere else:
//! - quadratures are interleaved `x1, p1, x2, p2, ...`;
//! - the vacuum covariance is `1/2 * I` (hbar = 1);
//! - a coherent amplitude `alpha` has quadrature mean `sqrt(2) * (Re alpha, Im alpha)`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{symplectic_form, Matrix};
use crate::scalar::{half, lit, to_f64, two, Real};
use crate::special::{phi, phi2, Correlation};

/// Tolerance on covariance asymmetry and on the physicality eigenvalue checks.
pub const COV_TOLERANCE: f64 = 1e-12;

/// An m-mode Gaussian state given by its mean vector and covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState<T> {
    modes: usize,
    mean: Vec<T>,
    cov: Matrix<T>,
}

impl<T: Real> GaussianState<T> {
    /// Builds a state from raw moments, checking shape, finiteness and symmetry.
    /// Physicality is not checked here; see [`GaussianState::check_uncertainty`].
    pub fn from_moments(mean: Vec<T>, cov: Matrix<T>) -> Result<Self> {
        if mean.is_empty() || mean.len() % 2 != 0 {
            return Err(Error::ModeCountMismatch(format!("mean vector of length {}", mean.len())));
        }
        if cov.rows() != mean.len() || cov.cols() != mean.len() {
            return Err(Error::ModeCountMismatch(format!(
                "covariance {}x{} for mean of length {}",
                cov.rows(),
                cov.cols(),
                mean.len()
            )));
        }
        if let Some(bad) = mean.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(to_f64(*bad)));
        }
        if !cov.is_finite() {
            return Err(Error::NonFinite(f64::NAN));
        }
        let scale = cov_scale(&cov);
        if cov.max_asymmetry() > lit::<T>(COV_TOLERANCE) * scale {
            return Err(Error::ModeCountMismatch("covariance is not symmetric".into()));
        }
        Ok(Self { modes: mean.len() / 2, mean, cov })
    }

    pub fn vacuum(modes: usize) -> Self {
        assert!(modes >= 1, "a state needs at least one mode");
        Self { modes, mean: vec![T::zero(); 2 * modes], cov: Matrix::identity(2 * modes).scale(half()) }
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix<T> {
        &self.cov
    }

    /// Product state `self (x) other`; `other`'s modes follow `self`'s.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut mean = self.mean.clone();
        mean.extend_from_slice(&other.mean);
        Self { modes: self.modes + other.modes, mean, cov: self.cov.direct_sum(&other.cov) }
    }

    /// Applies a linear symplectic map: mean <- S mean, cov <- S cov S^T.
    pub fn transform(&self, s: &Matrix<T>) -> Result<Self> {
        if s.rows() != 2 * self.modes || s.cols() != 2 * self.modes {
            return Err(Error::ModeCountMismatch(format!(
                "{}x{} transformation on a {}-mode state",
                s.rows(),
                s.cols(),
                self.modes
            )));
        }
        let cov = s.mul(&self.cov).mul(&s.transpose());
        // Re-symmetrise away rounding.
        let cov = cov.add(&cov.transpose()).scale(half());
        Ok(Self { modes: self.modes, mean: s.mul_vec(&self.mean), cov })
    }

    /// Mixes `mode_a` and `mode_b` on a beam splitter of the given transmissivity.
    /// At transmissivity 1/2 the two-mode block is `(1/sqrt 2) [[I, I], [-I, I]]`.
    pub fn apply_beam_splitter(&self, mode_a: usize, mode_b: usize, transmissivity: T) -> Result<Self> {
        let s = beam_splitter_matrix(self.modes, mode_a, mode_b, transmissivity)?;
        self.transform(&s)
    }

    /// Reduced state on the `keep` modes, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let rows = self.quadrature_indices(keep, true)?;
        Ok(Self {
            modes: keep.len(),
            mean: rows.iter().map(|&i| self.mean[i]).collect(),
            cov: self.cov.select(&rows, &rows),
        })
    }

    fn quadrature_indices(&self, modes: &[usize], both: bool) -> Result<Vec<usize>> {
        if modes.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        let mut seen = vec![false; self.modes];
        let mut out = Vec::with_capacity(2 * modes.len());
        for &m in modes {
            if m >= self.modes {
                return Err(Error::ModeIndex { index: m, modes: self.modes });
            }
            if seen[m] {
                return Err(Error::RepeatedMode(m));
            }
            seen[m] = true;
            out.push(2 * m);
            if both {
                out.push(2 * m + 1);
            }
        }
        Ok(out)
    }

    /// Law of the x-quadrature outcomes of one or two selected modes.
    pub fn homodyne_x_joint(&self, modes: &[usize]) -> Result<HomodyneLaw<T>> {
        if modes.len() > 2 {
            return Err(Error::UnsupportedModeCount(modes.len()));
        }
        let rows = self.quadrature_indices(modes, false)?;
        match rows.as_slice() {
            [i] => Ok(HomodyneLaw::Univariate(UnivariateGaussian::new(self.mean[*i], self.cov[(*i, *i)])?)),
            [i, j] => Ok(HomodyneLaw::Bivariate(BivariateGaussian::new(
                [self.mean[*i], self.mean[*j]],
                [[self.cov[(*i, *i)], self.cov[(*i, *j)]], [self.cov[(*j, *i)], self.cov[(*j, *j)]]],
            )?)),
            _ => Err(Error::UnsupportedModeCount(modes.len())),
        }
    }

    /// Sampler over the x-quadrature outcomes of the selected modes.
    pub fn homodyne_sampler(&self, modes: &[usize]) -> Result<HomodyneSampler<T>> {
        if modes.len() > 2 {
            return Err(Error::UnsupportedModeCount(modes.len()));
        }
        let rows = self.quadrature_indices(modes, false)?;
        HomodyneSampler::new(rows.iter().map(|&i| self.mean[i]).collect(), self.cov.select(&rows, &rows))
    }

    /// One draw of the x-quadrature outcomes of the selected modes.
    pub fn sample_homodyne<R: Rng + ?Sized>(&self, modes: &[usize], rng: &mut R) -> Result<Vec<T>>
    where
        StandardNormal: Distribution<T>,
    {
        Ok(self.homodyne_sampler(modes)?.sample(rng))
    }

    /// Total mean photon number: sum over modes of (tr V_i / 2 - 1/2) + |mean|^2 / 2.
    pub fn mean_photon_number(&self) -> T {
        let mut n = T::zero();
        for k in 0..self.modes {
            n += (self.cov[(2 * k, 2 * k)] + self.cov[(2 * k + 1, 2 * k + 1)]) * half() - half();
        }
        n + self.mean.iter().fold(T::zero(), |acc, &m| acc + m * m) * half()
    }

    /// Smallest eigenvalue of the real form of `cov + (i/2) Omega`; non-negative for physical states.
    pub fn uncertainty_margin(&self) -> T {
        let n = 2 * self.modes;
        let omega_half = symplectic_form::<T>(self.modes).scale(half());
        // Hermitian H = V + iW  <=>  real symmetric [[V, -W], [W, V]].
        let real_form = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.cov[(i, j)],
            (false, false) => self.cov[(i - n, j - n)],
            (true, false) => -omega_half[(i, j - n)],
            (false, true) => omega_half[(i - n, j)],
        });
        real_form.symmetric_eigenvalues()[0]
    }

    /// Rejects states whose covariance violates `cov + (i/2) Omega >= 0`.
    pub fn check_uncertainty(&self) -> Result<()> {
        let margin = self.uncertainty_margin();
        let tol = lit::<T>(COV_TOLERANCE).max(lit::<T>(64.0) * T::epsilon());
        if margin < -tol * cov_scale(&self.cov) {
            return Err(Error::Unphysical(to_f64(margin)));
        }
        Ok(())
    }
}

fn cov_scale<T: Real>(cov: &Matrix<T>) -> T {
    let mut m = T::one();
    for i in 0..cov.rows() {
        for j in 0..cov.cols() {
            m = m.max(cov[(i, j)].abs());
        }
    }
    m
}

/// Displaced thermal state S_N(alpha): mean `sqrt(2) (Re alpha, Im alpha)`, covariance `(N + 1/2) I`.
pub fn make_displaced_thermal<T: Real>(alpha: Complex<T>, n: T) -> Result<GaussianState<T>> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::NonFinite(to_f64(alpha.re + alpha.im)));
    }
    if !n.is_finite() {
        return Err(Error::NonFinite(to_f64(n)));
    }
    if n < T::zero() {
        return Err(Error::NegativePhotonNumber(to_f64(n)));
    }
    let s2 = T::SQRT_2();
    Ok(GaussianState {
        modes: 1,
        mean: vec![s2 * alpha.re, s2 * alpha.im],
        cov: Matrix::identity(2).scale(n + half()),
    })
}

/// Coherent state |alpha>, i.e. S_0(alpha).
pub fn make_coherent<T: Real>(alpha: Complex<T>) -> Result<GaussianState<T>> {
    make_displaced_thermal(alpha, T::zero())
}

/// Two-mode squeezed vacuum with squeezing `r`:
/// `cov = 1/2 [[cosh 2r I, sinh 2r Z], [sinh 2r Z, cosh 2r I]]`, `Z = diag(1, -1)`.
pub fn make_tmsv<T: Real>(r: T) -> Result<GaussianState<T>> {
    if !r.is_finite() {
        return Err(Error::NonFinite(to_f64(r)));
    }
    let c = (two::<T>() * r).cosh() * half();
    let s = (two::<T>() * r).sinh() * half();
    let z = T::zero();
    let cov = Matrix::from_rows(&[&[c, z, s, z], &[z, c, z, -s], &[s, z, c, z], &[z, -s, z, c]]);
    let state = GaussianState { modes: 2, mean: vec![T::zero(); 4], cov };
    state.check_uncertainty()?;
    Ok(state)
}

/// Squeezing parameter whose TMSV marginal carries mean photon number `energy`
/// (`cosh 2r = 1 + 2E`, i.e. `sinh^2 r = E`).
pub fn tmsv_squeezing_for_energy<T: Real>(energy: T) -> T {
    energy.sqrt().asinh()
}

/// Classically correlated two-mode thermal state S_N^(2): the mixture of
/// `|a/sqrt2> (x) |a/sqrt2>` over a complex Gaussian `a` with variance N per quadrature.
/// Both marginals equal S_N(0); the cross-covariance block is `N * I`.
pub fn make_classically_correlated_thermal<T: Real>(n: T) -> Result<GaussianState<T>> {
    if !n.is_finite() {
        return Err(Error::NonFinite(to_f64(n)));
    }
    if n < T::zero() {
        return Err(Error::NegativePhotonNumber(to_f64(n)));
    }
    let d = n + half();
    let z = T::zero();
    let cov = Matrix::from_rows(&[&[d, z, n, z], &[z, d, z, n], &[n, z, d, z], &[z, n, z, d]]);
    let state = GaussianState { modes: 2, mean: vec![T::zero(); 4], cov };
    state.check_uncertainty()?;
    Ok(state)
}

/// Symplectic matrix of a beam splitter on modes `mode_a`, `mode_b` of an m-mode system.
/// The mixed block is `[[c I, s I], [-s I, c I]]` with `c^2 = transmissivity`.
pub fn beam_splitter_matrix<T: Real>(modes: usize, mode_a: usize, mode_b: usize, transmissivity: T) -> Result<Matrix<T>> {
    for &m in &[mode_a, mode_b] {
        if m >= modes {
            return Err(Error::ModeIndex { index: m, modes });
        }
    }
    if mode_a == mode_b {
        return Err(Error::RepeatedMode(mode_a));
    }
    if !(transmissivity >= T::zero() && transmissivity <= T::one()) {
        return Err(Error::Transmissivity(to_f64(transmissivity)));
    }
    let c = transmissivity.sqrt();
    let s = (T::one() - transmissivity).sqrt();
    let mut m = Matrix::identity(2 * modes);
    for q in 0..2 {
        let (a, b) = (2 * mode_a + q, 2 * mode_b + q);
        m[(a, a)] = c;
        m[(a, b)] = s;
        m[(b, a)] = -s;
        m[(b, b)] = c;
    }
    Ok(m)
}

/// Normal law of a single homodyne outcome.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UnivariateGaussian<T> {
    mean: T,
    variance: T,
}

impl<T: Real> UnivariateGaussian<T> {
    pub fn new(mean: T, variance: T) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() {
            return Err(Error::NonFinite(to_f64(mean + variance)));
        }
        if !(variance > T::zero()) {
            return Err(Error::DegenerateCovariance(to_f64(variance)));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }

    pub fn pdf(&self, x: T) -> T {
        let z = x - self.mean;
        (-z * z / (two::<T>() * self.variance)).exp() / (T::TAU() * self.variance).sqrt()
    }

    pub fn cdf(&self, x: T) -> T {
        phi((x - self.mean) / self.std_dev())
    }

    /// P(X > 0).
    pub fn prob_positive(&self) -> T {
        phi(self.mean / self.std_dev())
    }

    /// Reflection x -> -x.
    pub fn reflected(&self) -> Self {
        Self { mean: -self.mean, variance: self.variance }
    }
}

/// Normal law of a pair of homodyne outcomes.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BivariateGaussian<T> {
    mean: [T; 2],
    cov: [[T; 2]; 2],
}

impl<T: Real> BivariateGaussian<T> {
    pub fn new(mean: [T; 2], cov: [[T; 2]; 2]) -> Result<Self> {
        if mean.iter().chain(cov.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(f64::NAN));
        }
        let scale = cov[0][0].abs().max(cov[1][1].abs()).max(T::one());
        if (cov[0][1] - cov[1][0]).abs() > lit::<T>(COV_TOLERANCE) * scale {
            return Err(Error::ModeCountMismatch("covariance is not symmetric".into()));
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if !(cov[0][0] > T::zero() && det > T::zero()) {
            return Err(Error::DegenerateCovariance(to_f64(det)));
        }
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> [T; 2] {
        self.mean
    }

    pub fn cov(&self) -> [[T; 2]; 2] {
        self.cov
    }

    pub fn determinant(&self) -> T {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    pub fn inverse_cov(&self) -> [[T; 2]; 2] {
        let d = self.determinant();
        [[self.cov[1][1] / d, -self.cov[0][1] / d], [-self.cov[1][0] / d, self.cov[0][0] / d]]
    }

    pub fn correlation(&self) -> T {
        self.cov[0][1] / (self.cov[0][0] * self.cov[1][1]).sqrt()
    }

    pub fn marginal(&self, index: usize) -> UnivariateGaussian<T> {
        UnivariateGaussian { mean: self.mean[index], variance: self.cov[index][index] }
    }

    pub fn pdf(&self, x: T, y: T) -> T {
        let inv = self.inverse_cov();
        let (dx, dy) = (x - self.mean[0], y - self.mean[1]);
        let q = inv[0][0] * dx * dx + two::<T>() * inv[0][1] * dx * dy + inv[1][1] * dy * dy;
        (-q * half()).exp() / (T::TAU() * self.determinant().sqrt())
    }

    /// P(X <= a, Y <= b).
    pub fn cdf(&self, a: T, b: T) -> T {
        let h = (a - self.mean[0]) / self.cov[0][0].sqrt();
        let k = (b - self.mean[1]) / self.cov[1][1].sqrt();
        let rho = Correlation::new(self.correlation()).expect("positive-definite covariance");
        phi2(h, k, rho)
    }

    /// Sign-quadrant probabilities `[P(-,-), P(-,+), P(+,-), P(+,+)]`, first index from the first coordinate.
    pub fn sign_quadrants(&self) -> [T; 4] {
        let both_neg = self.cdf(T::zero(), T::zero());
        let first_neg = self.marginal(0).cdf(T::zero());
        let second_neg = self.marginal(1).cdf(T::zero());
        [
            both_neg,
            first_neg - both_neg,
            second_neg - both_neg,
            T::one() - first_neg - second_neg + both_neg,
        ]
    }
}

/// Homodyne outcome law for one or two modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HomodyneLaw<T> {
    Univariate(UnivariateGaussian<T>),
    Bivariate(BivariateGaussian<T>),
}

impl<T: Real> HomodyneLaw<T> {
    pub fn univariate(self) -> Option<UnivariateGaussian<T>> {
        match self {
            Self::Univariate(u) => Some(u),
            Self::Bivariate(_) => None,
        }
    }

    pub fn bivariate(self) -> Option<BivariateGaussian<T>> {
        match self {
            Self::Bivariate(b) => Some(b),
            Self::Univariate(_) => None,
        }
    }
}

/// Draws from a multivariate normal via a precomputed Cholesky factor.
#[derive(Clone, Debug)]
pub struct HomodyneSampler<T> {
    mean: Vec<T>,
    chol: Matrix<T>,
}

/// Smallest covariance eigenvalue accepted for sampling.
pub const MIN_SAMPLING_EIGENVALUE: f64 = 1e-12;

impl<T: Real> HomodyneSampler<T> {
    pub fn new(mean: Vec<T>, cov: Matrix<T>) -> Result<Self> {
        let smallest = cov.symmetric_eigenvalues()[0];
        if smallest < lit(MIN_SAMPLING_EIGENVALUE) {
            return Err(Error::DegenerateCovariance(to_f64(smallest)));
        }
        let chol = cov.cholesky().ok_or(Error::DegenerateCovariance(to_f64(smallest)))?;
        Ok(Self { mean, chol })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T>
    where
        StandardNormal: Distribution<T>,
    {
        let z: Vec<T> = (0..self.dim()).map(|_| StandardNormal.sample(rng)).collect();
        let mut out = self.mean.clone();
        for i in 0..self.dim() {
            for j in 0..=i {
                out[i] += self.chol[(i, j)] * z[j];
            }
        }
        out
    }

    /// Allocation-free draw for the one- and two-dimensional cases.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T])
    where
        StandardNormal: Distribution<T>,
    {
        debug_assert_eq!(out.len(), self.dim());
        match self.dim() {
            1 => out[0] = self.mean[0] + self.chol[(0, 0)] * StandardNormal.sample(rng),
            2 => {
                let z0: T = StandardNormal.sample(rng);
                let z1: T = StandardNormal.sample(rng);
                out[0] = self.mean[0] + self.chol[(0, 0)] * z0;
                out[1] = self.mean[1] + self.chol[(1, 0)] * z0 + self.chol[(1, 1)] * z1;
            }
            _ => out.copy_from_slice(&self.sample(rng)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn displaced_thermal_moments() {
        let vac = make_displaced_thermal(c(0.0, 0.0), 0.0).unwrap();
        assert_eq!(vac, GaussianState::vacuum(1));
        let coh = make_displaced_thermal(c(1.0, 0.0), 0.0).unwrap();
        assert_abs_diff_eq!(coh.mean()[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(coh.mean()[1], 0.0);
        assert_eq!(coh.cov(), &Matrix::identity(2).scale(0.5));
        let th = make_displaced_thermal(c(0.0, 0.0), 2.0).unwrap();
        assert_eq!(th.cov(), &Matrix::identity(2).scale(2.5));
        assert!(matches!(make_displaced_thermal(c(0.0, 0.0), -0.1), Err(Error::NegativePhotonNumber(_))));
        assert!(make_displaced_thermal(c(f64::NAN, 0.0), 0.0).is_err());
    }

    #[test]
    fn tmsv_moments() {
        let vac = make_tmsv(0.0).unwrap();
        assert!(vac.cov().max_abs_diff(&Matrix::identity(4).scale(0.5)) < 1e-15);
        // cosh 2r = 3  =>  sinh 2r = sqrt(8).
        let r = tmsv_squeezing_for_energy(1.0);
        assert_abs_diff_eq!((2.0f64 * r).cosh(), 3.0, epsilon = 1e-14);
        let s = make_tmsv(r).unwrap();
        let cov = s.cov();
        assert_abs_diff_eq!(cov[(0, 0)], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(cov[(1, 1)], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(cov[(0, 2)], 8f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(cov[(1, 3)], -8f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_eq!(cov[(0, 3)], 0.0);
        assert!(make_tmsv(f64::INFINITY).is_err());
    }

    #[test]
    fn classical_correlated_moments() {
        let zero = make_classically_correlated_thermal(0.0).unwrap();
        assert_eq!(zero, GaussianState::vacuum(2));
        let s = make_classically_correlated_thermal(1.0).unwrap();
        let marginal = s.partial_trace(&[0]).unwrap();
        assert_eq!(marginal, make_displaced_thermal(c(0.0, 0.0), 1.0).unwrap());
        assert_eq!(s.partial_trace(&[1]).unwrap(), marginal);
        assert_eq!(s.cov()[(0, 2)], 1.0);
        assert_eq!(s.cov()[(1, 3)], 1.0);
        assert!(make_classically_correlated_thermal(-1.0).is_err());
    }

    // Monte Carlo oracle for the cross block of S_N^(2): sample the mixing amplitude,
    // accumulate second moments of the displacement ensemble, add the vacuum covariance.
    #[test]
    fn classical_correlated_cross_block_oracle() {
        let n = 1.0f64;
        let samples = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (mut sxx, mut spp, mut sxp, mut s11) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..samples {
            // a ~ exp(-|a|^2 / 2N) / (2 pi N): Re a, Im a ~ N(0, N).
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let a = c(re * n.sqrt(), im * n.sqrt());
            let gamma = a / 2f64.sqrt();
            // Mean quadratures of |gamma> on each mode.
            let (x, p) = (2f64.sqrt() * gamma.re, 2f64.sqrt() * gamma.im);
            sxx += x * x;
            spp += p * p;
            sxp += x * p;
            s11 += x * x;
        }
        let m = f64::from(samples);
        // Each second moment has variance 2N^2 per sample for Gaussian displacements.
        let se = (2.0 * n * n / m).sqrt();
        let cross_xx = sxx / m;
        let cross_pp = spp / m;
        let cross_xp = sxp / m;
        let block = make_classically_correlated_thermal(n).unwrap();
        assert!((cross_xx - block.cov()[(0, 2)]).abs() < 3.0 * se);
        assert!((cross_pp - block.cov()[(1, 3)]).abs() < 3.0 * se);
        assert!((cross_xp - block.cov()[(0, 3)]).abs() < 3.0 * se);
        assert!((s11 / m + 0.5 - block.cov()[(0, 0)]).abs() < 3.0 * se);
    }

    #[test]
    fn beam_splitter_examples() {
        let vac = GaussianState::<f64>::vacuum(2);
        let out = vac.apply_beam_splitter(0, 1, 0.5).unwrap();
        assert!(out.cov().max_abs_diff(vac.cov()) < 1e-15);

        // coherent(alpha) (x) vacuum: outputs alpha/sqrt2 on mode 0 and -alpha/sqrt2 on mode 1
        // in amplitude units, i.e. quadrature means +-(Re alpha, Im alpha).
        let alpha = c(0.8, -0.3);
        let state = make_coherent(alpha).unwrap().tensor(&GaussianState::vacuum(1));
        let out = state.apply_beam_splitter(0, 1, 0.5).unwrap();
        let expected = [0.8, -0.3, -0.8, 0.3];
        for (a, b) in out.mean().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        assert!(matches!(vac.apply_beam_splitter(0, 2, 0.5), Err(Error::ModeIndex { .. })));
        assert!(matches!(vac.apply_beam_splitter(1, 1, 0.5), Err(Error::RepeatedMode(1))));
        assert!(matches!(vac.apply_beam_splitter(0, 1, 1.5), Err(Error::Transmissivity(_))));
    }

    #[test]
    fn jammed_tmsv_three_mode_covariance() {
        // S_N(beta) (x) TMSV(r), 50:50 on the jammer and signal modes. Moment arithmetic gives
        // blocks A+B, B-A on the mixed modes, 2B on the idler, and C Z cross terms with
        // A = (N+1/2)/2, B = cosh(2r)/4, C = sinh(2r)/(2 sqrt 2).
        let (n, r) = (0.7, 0.6);
        let beta = c(0.4, 0.2);
        let joint = make_displaced_thermal(beta, n).unwrap().tensor(&make_tmsv(r).unwrap());
        let out = joint.apply_beam_splitter(0, 1, 0.5).unwrap();
        let a = (n + 0.5) / 2.0;
        let b = (2.0 * r).cosh() / 4.0;
        let cc = (2.0 * r).sinh() / (2.0 * 2f64.sqrt());
        let z = 0.0;
        let expected = Matrix::from_rows(&[
            &[a + b, z, b - a, z, cc, z],
            &[z, a + b, z, b - a, z, -cc],
            &[b - a, z, a + b, z, cc, z],
            &[z, b - a, z, a + b, z, -cc],
            &[cc, z, cc, z, 2.0 * b, z],
            &[z, -cc, z, -cc, z, 2.0 * b],
        ]);
        assert!(out.cov().max_abs_diff(&expected) < 1e-14);
        let mean = [0.4, 0.2, -0.4, -0.2, 0.0, 0.0];
        for (x, y) in out.mean().iter().zip(mean) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn partial_trace_examples() {
        let r = 0.9f64;
        let marg = make_tmsv(r).unwrap().partial_trace(&[0]).unwrap();
        let thermal = make_displaced_thermal(c(0.0, 0.0), r.sinh().powi(2)).unwrap();
        assert!(marg.cov().max_abs_diff(thermal.cov()) < 1e-12);
        assert!(marg.cov().max_abs_diff(&Matrix::identity(2).scale(0.5 * (2.0 * r).cosh())) < 1e-14);

        let second = make_displaced_thermal(c(0.3, 0.1), 1.2).unwrap();
        let prod = make_coherent(c(1.0, 0.0)).unwrap().tensor(&second);
        assert_eq!(prod.partial_trace(&[1]).unwrap(), second);
        assert!(matches!(prod.partial_trace(&[]), Err(Error::EmptyModeSet)));
        assert!(matches!(prod.partial_trace(&[3]), Err(Error::ModeIndex { .. })));
    }

    #[test]
    fn homodyne_marginals() {
        let vac = GaussianState::<f64>::vacuum(1);
        let law = vac.homodyne_x_joint(&[0]).unwrap().univariate().unwrap();
        assert_eq!((law.mean(), law.variance()), (0.0, 0.5));
        assert!(matches!(GaussianState::<f64>::vacuum(3).homodyne_x_joint(&[0, 1, 2]), Err(Error::UnsupportedModeCount(3))));
        assert!(matches!(vac.homodyne_x_joint(&[]), Err(Error::EmptyModeSet)));
    }

    #[test]
    fn degenerate_sampling_rejected() {
        let cov = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(HomodyneSampler::new(vec![0.0, 0.0], cov), Err(Error::DegenerateCovariance(_))));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let s = make_tmsv(0.5).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..16).flat_map(|_| s.sample_homodyne(&[0, 1], &mut rng).unwrap()).collect::<Vec<f64>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn vacuum_sample_variance() {
        let vac = GaussianState::<f64>::vacuum(1);
        let sampler = vac.homodyne_sampler(&[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = 1_000_000;
        let mut buf = [0.0];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            sampler.sample_into(&mut rng, &mut buf);
            s1 += buf[0];
            s2 += buf[0] * buf[0];
        }
        let mean = s1 / f64::from(m);
        let var = s2 / f64::from(m) - mean * mean;
        // Var of the sample variance is 2 sigma^4 / m.
        let se = (2.0 * 0.25 / f64::from(m)).sqrt();
        assert!((var - 0.5).abs() < 3.0 * se, "var = {var}");
    }

    #[test]
    fn f32_states_work() {
        let s = make_tmsv(0.3f32).unwrap();
        let law = s.homodyne_x_joint(&[0, 1]).unwrap().bivariate().unwrap();
        assert!((law.correlation() - (0.6f32).tanh()).abs() < 1e-6);
    }

    fn arb_state() -> impl Strategy<Value = GaussianState<f64>> {
        (-2.0f64..2.0, -2.0f64..2.0, 0.0f64..3.0, -1.5f64..1.5, 0.0f64..2.0).prop_map(|(re, im, n, r, m)| {
            make_displaced_thermal(c(re, im), n)
                .unwrap()
                .tensor(&make_tmsv(r).unwrap())
                .tensor(&make_classically_correlated_thermal(m).unwrap())
        })
    }

    proptest! {
        #[test]
        fn beam_splitter_is_symplectic(t in 0.0f64..=1.0, a in 0usize..5, b in 0usize..5) {
            prop_assume!(a != b);
            let s = beam_splitter_matrix::<f64>(5, a, b, t).unwrap();
            let omega = symplectic_form::<f64>(5);
            prop_assert!(s.mul(&omega).mul(&s.transpose()).max_abs_diff(&omega) < 1e-12);
        }

        #[test]
        fn beam_splitter_conserves_photon_number(state in arb_state(), t in 0.0f64..=1.0, a in 0usize..5, b in 0usize..5) {
            prop_assume!(a != b);
            let out = state.apply_beam_splitter(a, b, t).unwrap();
            prop_assert!((out.mean_photon_number() - state.mean_photon_number()).abs() < 1e-10);
            prop_assert!(out.check_uncertainty().is_ok());
        }

        #[test]
        fn tmsv_is_pure(r in -2.0f64..2.0) {
            let s = make_tmsv(r).unwrap();
            prop_assert!((s.cov().scale(2.0).determinant() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn tmsv_marginal_is_thermal(r in -2.0f64..2.0) {
            let marg = make_tmsv(r).unwrap().partial_trace(&[0]).unwrap();
            let th = make_displaced_thermal(c(0.0, 0.0), r.sinh().powi(2)).unwrap();
            prop_assert!(marg.cov().max_abs_diff(th.cov()) < 1e-12);
            prop_assert_eq!(marg.mean(), th.mean());
        }

        #[test]
        fn constructors_are_physical(re in -3.0f64..3.0, n in 0.0f64..5.0, r in -2.0f64..2.0) {
            let th = make_displaced_thermal(c(re, -re), n).unwrap();
            prop_assert!(th.cov().symmetric_eigenvalues()[0] >= 0.5 - 1e-12);
            prop_assert!(make_tmsv(r).unwrap().uncertainty_margin() >= -1e-10);
            prop_assert!(make_classically_correlated_thermal(n).unwrap().uncertainty_margin() >= -1e-12);
        }
    }
}
