//! Reference joint-outcome models used to calibrate the analyzer: the
//! singlet statistics and a factorizable local foil.

use crate::analysis::{JointDist, JointKernel};
use crate::direction::{Direction, Outcome, SettingMap};
use crate::error::Result;
use crate::table::BinarySetting;
use std::f64::consts::PI;

/// Grid resolution used when the foil's hidden variable is discretized for
/// empirical checks.
pub const DEFAULT_FOIL_GRID: usize = 10_000;

/// The singlet expectation of the outcome product: -(da . db).
pub fn singlet_correlation(da: &Direction, db: &Direction) -> f64 {
    -da.dot(db)
}

/// Joint probability of outcomes (x, y) under the singlet statistics:
/// (1 - x*y*(da . db)) / 4. The four values sum to 1, both marginals are
/// unbiased, and the product expectation is -(da . db).
pub fn singlet_joint(x: Outcome, y: Outcome, da: &Direction, db: &Direction) -> f64 {
    (1.0 - x.value() * y.value() * da.dot(db)) / 4.0
}

/// The full outcome-pair distribution of [`singlet_joint`].
pub fn singlet_joint_dist(da: &Direction, db: &Direction) -> JointDist {
    let c = da.dot(db);
    JointDist::from_probs([
        (1.0 - c) / 4.0,
        (1.0 + c) / 4.0,
        (1.0 + c) / 4.0,
        (1.0 - c) / 4.0,
    ])
}

/// Planar separation angle in [0, pi] between two in-plane directions.
pub fn planar_angle_between(da: &Direction, db: &Direction) -> Result<f64> {
    let alpha = da.planar_angle()?;
    let beta = db.planar_angle()?;
    let mut delta = (alpha - beta).abs() % (2.0 * PI);
    if delta > PI {
        delta = 2.0 * PI - delta;
    }
    Ok(delta)
}

/// Closed-form correlation of the local foil: a hidden angle uniform on the
/// circle with x = sign cos(lambda - alpha) and y = -sign cos(lambda - beta)
/// gives E = -1 + 2*delta/pi, the classic sawtooth. Factorizable, so its
/// CHSH never exceeds 2.
pub fn local_foil_correlation(da: &Direction, db: &Direction) -> Result<f64> {
    let delta = planar_angle_between(da, db)?;
    Ok(-1.0 + 2.0 * delta / PI)
}

/// Sign outcome of the half-circle rule at hidden angle `lambda`.
fn half_circle_sign(lambda: f64, axis: f64) -> Outcome {
    if (lambda - axis).cos() >= 0.0 {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// The singlet statistics as a one-state kernel (the hidden state is the
/// preparation itself). Parameter independence holds; outcome independence
/// fails whenever the directions are not orthogonal.
#[derive(Debug, Clone)]
pub struct SingletKernel {
    map: SettingMap,
}

impl SingletKernel {
    pub fn new(map: SettingMap) -> Self {
        SingletKernel { map }
    }
}

impl JointKernel for SingletKernel {
    fn hidden_count(&self) -> usize {
        1
    }

    fn hidden_label(&self, _index: usize) -> String {
        "preparation".to_string()
    }

    fn weight(&self, _a: BinarySetting, _b: BinarySetting, _index: usize) -> f64 {
        1.0
    }

    fn joint(&self, a: BinarySetting, b: BinarySetting, _index: usize) -> JointDist {
        singlet_joint_dist(self.map.station1(a), self.map.station2(b))
    }
}

/// The local foil discretized on a midpoint grid over the circle. Each
/// hidden state is deterministic (a product of point masses), so the kernel
/// is factorizable by construction; its grid-averaged correlation converges
/// to the closed form at rate O(1/grid).
#[derive(Debug, Clone)]
pub struct LocalFoilKernel {
    alphas: [f64; 2],
    betas: [f64; 2],
    grid: usize,
}

impl LocalFoilKernel {
    /// Requires all four map directions to be planar.
    pub fn new(map: &SettingMap, grid: usize) -> Result<Self> {
        assert!(grid > 0, "grid must be nonempty");
        Ok(LocalFoilKernel {
            alphas: [
                map.station1(BinarySetting::Zero).planar_angle()?,
                map.station1(BinarySetting::One).planar_angle()?,
            ],
            betas: [
                map.station2(BinarySetting::Zero).planar_angle()?,
                map.station2(BinarySetting::One).planar_angle()?,
            ],
            grid,
        })
    }

    pub fn with_default_grid(map: &SettingMap) -> Result<Self> {
        Self::new(map, DEFAULT_FOIL_GRID)
    }

    fn lambda(&self, index: usize) -> f64 {
        (index as f64 + 0.5) * 2.0 * PI / self.grid as f64
    }

    /// Deterministic outcomes at one hidden angle.
    pub fn outcomes_at(&self, index: usize, a: BinarySetting, b: BinarySetting) -> (Outcome, Outcome) {
        let lambda = self.lambda(index);
        let x = half_circle_sign(lambda, self.alphas[a.bit() as usize]);
        let y = half_circle_sign(lambda, self.betas[b.bit() as usize]).flipped();
        (x, y)
    }

    /// Grid-averaged correlation (the quadrature the analyzer sees).
    pub fn grid_correlation(&self, a: BinarySetting, b: BinarySetting) -> f64 {
        let mut sum = 0.0;
        for index in 0..self.grid {
            let (x, y) = self.outcomes_at(index, a, b);
            sum += x.value() * y.value();
        }
        sum / self.grid as f64
    }
}

impl JointKernel for LocalFoilKernel {
    fn hidden_count(&self) -> usize {
        self.grid
    }

    fn hidden_label(&self, index: usize) -> String {
        format!("angle-{index}")
    }

    fn weight(&self, _a: BinarySetting, _b: BinarySetting, _index: usize) -> f64 {
        1.0 / self.grid as f64
    }

    fn joint(&self, a: BinarySetting, b: BinarySetting, index: usize) -> JointDist {
        let (x, y) = self.outcomes_at(index, a, b);
        JointDist::point_mass(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{
        check_factorizability, check_outcome_independence, check_parameter_independence,
        DEFAULT_TOL,
    };
    use approx::assert_abs_diff_eq;

    #[test]
    fn singlet_correlation_cases() {
        let d0 = Direction::from_degrees(0.0);
        assert_abs_diff_eq!(singlet_correlation(&d0, &d0), -1.0, epsilon = 1e-15);
        let d90 = Direction::from_degrees(90.0);
        assert_abs_diff_eq!(singlet_correlation(&d0, &d90), 0.0, epsilon = 1e-15);
        let d45 = Direction::from_degrees(45.0);
        assert_abs_diff_eq!(
            singlet_correlation(&d0, &d45),
            -std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn singlet_joint_solves_the_constraint_system() {
        // oracle: p(x,y) = (1 + x E1 + y E2 + xy E12)/4 with unbiased
        // marginals and E12 = -(da . db), solved independently
        fn oracle(x: f64, y: f64, e12: f64) -> f64 {
            (1.0 + x * 0.0 + y * 0.0 + x * y * e12) / 4.0
        }
        let d0 = Direction::from_degrees(0.0);
        let cases = [
            (Outcome::Plus, Outcome::Plus, &d0, &d0, oracle(1.0, 1.0, -1.0)),
            (Outcome::Plus, Outcome::Minus, &d0, &d0, oracle(1.0, -1.0, -1.0)),
        ];
        for (x, y, da, db, want) in cases {
            assert_abs_diff_eq!(singlet_joint(x, y, da, db), want, epsilon = 1e-15);
        }
        assert_eq!(singlet_joint(Outcome::Plus, Outcome::Plus, &d0, &d0), 0.0);
        assert_eq!(singlet_joint(Outcome::Plus, Outcome::Minus, &d0, &d0), 0.5);
        // orthogonal: uniform
        let d90 = Direction::from_degrees(90.0);
        for x in Outcome::BOTH {
            for y in Outcome::BOTH {
                assert_abs_diff_eq!(singlet_joint(x, y, &d0, &d90), 0.25, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn singlet_joint_is_a_distribution_with_unbiased_marginals() {
        for deg in (0..360).step_by(7) {
            let da = Direction::from_degrees(0.0);
            let db = Direction::from_degrees(deg as f64);
            let dist = singlet_joint_dist(&da, &db);
            let sum: f64 = dist.probs().iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(dist.probs().iter().all(|&p| (0.0..=1.0).contains(&p)));
            assert_abs_diff_eq!(dist.station1_marginal().p_plus, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(dist.station2_marginal().p_plus, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(
                dist.correlation(),
                singlet_correlation(&da, &db),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn foil_closed_form_values() {
        let d0 = Direction::from_degrees(0.0);
        assert_abs_diff_eq!(local_foil_correlation(&d0, &d0).unwrap(), -1.0, epsilon = 1e-15);
        let d90 = Direction::from_degrees(90.0);
        assert_abs_diff_eq!(local_foil_correlation(&d0, &d90).unwrap(), 0.0, epsilon = 1e-12);
        let d45 = Direction::from_degrees(45.0);
        assert_abs_diff_eq!(local_foil_correlation(&d0, &d45).unwrap(), -0.5, epsilon = 1e-12);
        let tilted = Direction::new(0.0, 0.0, 1.0).unwrap();
        assert!(local_foil_correlation(&d0, &tilted).is_err());
    }

    #[test]
    fn foil_grid_converges_to_closed_form() {
        let map = SettingMap::canonical();
        let a = BinarySetting::Zero;
        let b = BinarySetting::Zero;
        let exact = local_foil_correlation(
            map.station1(a),
            map.station2(b),
        )
        .unwrap();
        for grid in [100, 200, 400, 800, 1600, 3200] {
            let foil = LocalFoilKernel::new(&map, grid).unwrap();
            let err = (foil.grid_correlation(a, b) - exact).abs();
            assert!(err <= 8.0 / grid as f64, "grid {grid}: err {err}");
        }
        let foil = LocalFoilKernel::with_default_grid(&map).unwrap();
        assert_abs_diff_eq!(foil.grid_correlation(a, b), exact, epsilon = 1e-3);
    }

    #[test]
    fn chsh_values_at_the_canonical_angles() {
        let map = SettingMap::canonical();
        let e = |a: BinarySetting, b: BinarySetting| {
            singlet_correlation(map.station1(a), map.station2(b))
        };
        let s = crate::analysis::chsh(
            e(BinarySetting::Zero, BinarySetting::Zero),
            e(BinarySetting::Zero, BinarySetting::One),
            e(BinarySetting::One, BinarySetting::Zero),
            e(BinarySetting::One, BinarySetting::One),
        )
        .unwrap();
        assert_abs_diff_eq!(s, -2.0 * 2.0f64.sqrt(), epsilon = 1e-12);

        let f = |a: BinarySetting, b: BinarySetting| {
            local_foil_correlation(map.station1(a), map.station2(b)).unwrap()
        };
        let s_foil = crate::analysis::chsh(
            f(BinarySetting::Zero, BinarySetting::Zero),
            f(BinarySetting::Zero, BinarySetting::One),
            f(BinarySetting::One, BinarySetting::Zero),
            f(BinarySetting::One, BinarySetting::One),
        )
        .unwrap();
        assert!(s_foil.abs() <= 2.0 + 1e-9);
    }

    #[test]
    fn singlet_kernel_verdicts() {
        let k = SingletKernel::new(SettingMap::canonical());
        assert!(check_parameter_independence(&k, DEFAULT_TOL)
            .unwrap()
            .verdict
            .holds());
        assert!(!check_outcome_independence(&k, DEFAULT_TOL)
            .unwrap()
            .verdict
            .holds());
        assert!(!check_factorizability(&k, DEFAULT_TOL)
            .unwrap()
            .verdict
            .holds());
    }

    #[test]
    fn foil_kernel_is_factorizable() {
        let k = LocalFoilKernel::new(&SettingMap::canonical(), 512).unwrap();
        assert!(check_parameter_independence(&k, DEFAULT_TOL)
            .unwrap()
            .verdict
            .holds());
        assert!(check_outcome_independence(&k, DEFAULT_TOL)
            .unwrap()
            .verdict
            .holds());
        assert!(check_factorizability(&k, DEFAULT_TOL)
            .unwrap()
            .verdict
            .holds());
    }
}
