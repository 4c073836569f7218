//! Error function, normal CDFs, binary entropy and the verifiers for the two
//! auxiliary inequalities (l1 distance versus determinant, Plackett bound).
//!
//! Everything here is pure and reentrant. The bivariate normal CDF integrates
//! the Plackett derivative in the correlation, so the same integrand serves the
//! CDF and the Plackett-bound check.

mod lemmas;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{half, lit, to_f64, Real};

pub use lemmas::{
    l1_distance, quadrant_determinant, verify_lemma_l1_det, verify_lemma_plackett, LemmaReport,
    PlackettGrid,
};

/// Correlations closer than this to +-1 are evaluated by the limit formulas.
pub const RHO_LIMIT_GUARD: f64 = 1e-12;

/// Error function, accurate to ~1e-15 absolute in `f64`.
pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        return x.signum();
    }
    let ax = x.abs();
    let v = if ax <= lit(3.0) { erf_series(ax) } else { T::one() - erfc_continued_fraction(ax) };
    if x < T::zero() {
        -v
    } else {
        v
    }
}

/// Complementary error function with relative accuracy in the upper tail.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        return T::one() - x.signum();
    }
    if x > lit(3.0) {
        erfc_continued_fraction(x)
    } else if x < lit(-3.0) {
        lit::<T>(2.0) - erfc_continued_fraction(-x)
    } else {
        T::one() - erf_series(x.abs()) * x.signum()
    }
}

// erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!, every term positive.
fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    while n < 500 {
        n += 1;
        term *= lit::<T>(2.0) * x2 / lit(f64::from(2 * n + 1));
        sum += term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    T::FRAC_2_SQRT_PI() * (-x2).exp() * sum
}

// Continued fraction erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated with the modified Lentz method. Used for x > 3 only.
fn erfc_continued_fraction<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for k in 1..300 {
        let a = lit::<T>(f64::from(k) * 0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

/// Standard normal cumulative distribution function.
pub fn phi<T: Real>(x: T) -> T {
    half::<T>() * erfc(-x * T::FRAC_1_SQRT_2())
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-x * x * half()).exp() / (T::TAU()).sqrt()
}

/// A correlation coefficient in [-1, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Correlation<T>(T);

impl<T: Real> Correlation<T> {
    /// Values within `RHO_LIMIT_GUARD` outside [-1, 1] are clamped onto the boundary.
    pub fn new(rho: T) -> Result<Self> {
        let guard = lit::<T>(RHO_LIMIT_GUARD);
        if !rho.is_finite() || rho.abs() > T::one() + guard {
            return Err(Error::InvalidCorrelation(to_f64(rho)));
        }
        Ok(Self(rho.max(-T::one()).min(T::one())))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Whether the open-interval formulas apply.
    pub fn is_interior(self) -> bool {
        self.0.abs() < T::one() - lit(RHO_LIMIT_GUARD)
    }
}

/// Standard bivariate normal density with correlation `rho`; equal to the
/// derivative of [`phi2`] in `rho` (Plackett's identity).
pub fn plackett_derivative<T: Real>(h: T, k: T, rho: T) -> T {
    let one_minus = T::one() - rho * rho;
    let q = (h * h - lit::<T>(2.0) * rho * h * k + k * k) / (lit::<T>(2.0) * one_minus);
    (-q).exp() / (T::TAU() * one_minus.sqrt())
}

/// Number of 32-point panels used on the correlation integral.
const PHI2_PANELS: usize = 4;

/// P(X <= h, Y <= k) for standard normals with correlation `rho`.
///
/// Integrates the Plackett derivative from 0 to `rho` and adds Phi(h)Phi(k). The
/// substitution r = sin(t) removes the 1/sqrt(1 - r^2) endpoint singularity, so the
/// fixed-order rule stays accurate up to |rho| = 1 - 1e-12. Beyond that the limit
/// formulas apply.
pub fn phi2<T: Real>(h: T, k: T, rho: Correlation<T>) -> T {
    let r = rho.value();
    if !rho.is_interior() {
        return if r > T::zero() {
            phi(h.min(k))
        } else {
            (phi(h) + phi(k) - T::one()).max(T::zero())
        };
    }
    let base = phi(h) * phi(k);
    if r == T::zero() {
        return base;
    }
    let hk_sum = h * h + k * k;
    let hk = h * k;
    let integrand = |t: T| {
        let (s, c) = t.sin_cos();
        let q = (hk_sum - lit::<T>(2.0) * hk * s) / (lit::<T>(2.0) * c * c);
        (-q).exp()
    };
    let theta = r.asin();
    let correction = quadrature::integrate_gl32(integrand, T::zero(), theta, PHI2_PANELS) / T::TAU();
    (base + correction).max(T::zero()).min(T::one())
}

/// Binary entropy in bits, with 0 log 0 = 0.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidProbability(to_f64(p)));
    }
    let term = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
    Ok(term(p) + term(T::one() - p))
}
