//! Fixed-order Gauss-Legendre rules and an adaptive Simpson integrator.

use std::sync::OnceLock;

use crate::scalar::{lit, Real};

/// Order of the rule used by the bivariate normal CDF.
pub const GL_ORDER: usize = 32;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Composite 32-point Gauss-Legendre over `panels` equal sub-intervals of [a, b].
pub fn integrate_gl32<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize) -> T {
    let (nodes, weights) = gl32();
    let panels = panels.max(1);
    let width = (b - a) / lit(panels as f64);
    let half_width = width * lit(0.5);
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + width * (lit::<T>(p as f64) + lit(0.5));
        let mut acc = T::zero();
        for (&x, &w) in nodes.iter().zip(weights) {
            acc += lit::<T>(w) * f(mid + half_width * lit(x));
        }
        total += acc * half_width;
    }
    total
}

/// Adaptive Simpson quadrature of `f` on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let m = (a + b) * lit(0.5);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let m = (a + b) * lit(0.5);
    let lm = (a + m) * lit(0.5);
    let rm = (m + b) * lit(0.5);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= lit::<T>(15.0) * tol {
        return left + right + delta / lit(15.0);
    }
    let half_tol = tol * lit(0.5);
    simpson_step(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_two_and_nodes_are_roots() {
        for n in [1, 2, 5, 32, 64] {
            let (x, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for xi in x {
                assert!(legendre_with_derivative(n, xi).0.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gl32_is_exact_for_degree_63() {
        let v: f64 = integrate_gl32(|x: f64| x.powi(62) + x.powi(63), -1.0, 1.0, 1);
        assert_abs_diff_eq!(v, 2.0 / 63.0, epsilon = 1e-14);
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let f = |x: f64| (-x * x).exp();
        let v = adaptive_simpson(&f, -10.0, 10.0, 1e-12);
        assert_abs_diff_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }
}
