use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{phi, phi2, Correlation};

/// Outcome of a numerical sweep over one of the auxiliary inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub evaluated: usize,
    pub violations: usize,
    /// `max(rhs - lhs)` over the sweep; non-positive when the inequality held everywhere.
    pub max_violation: f64,
    /// `min(lhs - rhs)` over the sweep.
    pub min_slack: f64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Determinant q(1,1)q(-1,-1) - q(1,-1)q(-1,1) of a distribution on {-1,1}^2
/// stored as [q(-1,-1), q(-1,1), q(1,-1), q(1,1)].
pub fn quadrant_determinant(q: &[f64; 4]) -> f64 {
    q[3] * q[0] - q[2] * q[1]
}

pub fn l1_distance(p: &[f64; 4], q: &[f64; 4]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

const L1_DET_SLACK: f64 = 1e-12;

/// Checks ||p - q||_1 >= |det q| for random q on {-1,1}^2 and random product p = v (x) w.
pub fn verify_lemma_l1_det<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> LemmaReport {
    let mut violations = 0;
    let mut max_violation = f64::NEG_INFINITY;
    let mut min_slack = f64::INFINITY;
    for _ in 0..trials.max(1) {
        // Uniform on the simplex via normalised exponentials.
        let e: [f64; 4] = std::array::from_fn(|_| Exp1.sample(rng));
        let total: f64 = e.iter().sum();
        let q = e.map(|x| x / total);
        let v: f64 = rng.random();
        let w: f64 = rng.random();
        let p = [(1.0 - v) * (1.0 - w), (1.0 - v) * w, v * (1.0 - w), v * w];
        let lhs = l1_distance(&p, &q);
        let rhs = quadrant_determinant(&q).abs();
        if lhs + L1_DET_SLACK < rhs {
            violations += 1;
        }
        max_violation = max_violation.max(rhs - lhs);
        min_slack = min_slack.min(lhs - rhs);
    }
    LemmaReport { lemma: "l1det".into(), evaluated: trials.max(1), violations, max_violation, min_slack }
}

/// The (t, rho) grid for the Plackett-bound sweep, as integer steps to keep it exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlackettGrid {
    pub t_min: f64,
    pub t_step: f64,
    pub t_count: usize,
    pub rho_min: f64,
    pub rho_step: f64,
    pub rho_count: usize,
}

impl Default for PlackettGrid {
    /// t in [-4, 4] step 0.1, rho in [-0.99, 0.99] step 0.01.
    fn default() -> Self {
        Self { t_min: -4.0, t_step: 0.1, t_count: 81, rho_min: -0.99, rho_step: 0.01, rho_count: 199 }
    }
}

impl PlackettGrid {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.t_count).flat_map(move |i| {
            let t = self.t_min + self.t_step * i as f64;
            (0..self.rho_count).map(move |j| (t, self.rho_min + self.rho_step * j as f64))
        })
    }
}

const PLACKETT_SLACK: f64 = 1e-12;

/// |Phi2(t, 0, rho) - Phi(t)/2| >= |rho|/(2 pi) * exp(-t^2 / (2 (1 - rho^2))) on a grid.
pub fn verify_lemma_plackett(grid: &PlackettGrid) -> LemmaReport {
    let mut violations = 0;
    let mut evaluated = 0;
    let mut max_violation = f64::NEG_INFINITY;
    let mut min_slack = f64::INFINITY;
    for (t, rho) in grid.points() {
        let rho = rho.clamp(-0.999, 0.999);
        let corr = Correlation::new(rho).expect("grid correlation within [-1, 1]");
        let lhs = (phi2(t, 0.0, corr) - 0.5 * phi(t)).abs();
        let rhs = rho.abs() / std::f64::consts::TAU * (-t * t / (2.0 * (1.0 - rho * rho))).exp();
        if lhs + PLACKETT_SLACK < rhs {
            violations += 1;
        }
        evaluated += 1;
        max_violation = max_violation.max(rhs - lhs);
        min_slack = min_slack.min(lhs - rhs);
    }
    LemmaReport { lemma: "plackett".into(), evaluated, violations, max_violation, min_slack }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_distribution_has_zero_determinant() {
        let (v, w) = (0.3, 0.8);
        let p = [(1.0 - v) * (1.0 - w), (1.0 - v) * w, v * (1.0 - w), v * w];
        assert_abs_diff_eq!(quadrant_determinant(&p), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn perfectly_correlated_against_uniform() {
        let q = [0.5, 0.0, 0.0, 0.5];
        let p = [0.25; 4];
        assert_abs_diff_eq!(quadrant_determinant(&q), 0.25, epsilon = 1e-16);
        assert_abs_diff_eq!(l1_distance(&p, &q), 1.0, epsilon = 1e-16);
    }

    #[test]
    fn random_sweep_has_no_violations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let report = verify_lemma_l1_det(100_000, &mut rng);
        assert_eq!(report.violations, 0);
        assert!(report.max_violation <= 0.0);
    }

    #[test]
    fn plackett_single_points() {
        let grid = PlackettGrid { t_min: 0.0, t_step: 0.0, t_count: 1, rho_min: 0.0, rho_step: 0.5, rho_count: 1 };
        let r = verify_lemma_plackett(&grid);
        assert_eq!(r.violations, 0);
        // Independent bits: both sides vanish.
        assert_abs_diff_eq!(r.min_slack, 0.0, epsilon = 1e-15);
        let r = verify_lemma_plackett(&PlackettGrid { rho_min: 0.5, ..grid });
        // t = 0, rho = 1/2: lhs = asin(1/2)/(2 pi) = 1/12, rhs = 1/(4 pi).
        let lhs = (phi2(0.0f64, 0.0, Correlation::new(0.5).unwrap()) - 0.25).abs();
        assert_abs_diff_eq!(lhs, 1.0 / 12.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.max_violation, -(1.0 / 12.0 - 0.5 / std::f64::consts::TAU), epsilon = 1e-13);
    }

    #[test]
    fn plackett_full_grid() {
        let report = verify_lemma_plackett(&PlackettGrid::default());
        assert_eq!(report.evaluated, 81 * 199);
        assert_eq!(report.violations, 0);
        assert!(report.min_slack >= -1e-12);
    }
}
