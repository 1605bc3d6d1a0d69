use std::f64::consts::PI;

use catbell::chsh::chsh_max_closed_form;
use catbell::optimize::{optimize_chsh, optimize_scaled};
use catbell::{ChshBounds, ScaledChshPoint, SearchMode, SystemConfig};

#[test]
fn design_mode_finds_the_symmetric_optimum() {
    let r = optimize_scaled(1.0, 1.0, &ChshBounds::standard(), SearchMode::Design, 48, 3).unwrap();
    let p = r.best_point;
    assert!((r.best_value - 2.324).abs() < 1e-3, "{}", r.best_value);
    assert!(p.kappa.abs() < 1e-4 && p.kappa_prime.abs() < 1e-4);
    assert!((p.x - 0.371).abs() < 5e-3 && (p.x + p.x_prime).abs() < 1e-4);
    assert!((p.d - 0.741).abs() < 5e-3);
    // sin(2 d kappa0) = +-1
    assert!(((2.0 * p.d * p.kappa0).sin().abs() - 1.0).abs() < 1e-6);
    assert!(r.converged);
}

#[test]
fn fixed_mode_beats_classical_bound_for_bell() {
    let cfg = SystemConfig::new(6030.7 / 2.0, 0.3, 0.134, 2.668, 400.0).unwrap();
    let r = optimize_chsh(&cfg, 400.0, &ChshBounds::standard(), SearchMode::Fixed, 32, 1).unwrap();
    assert!(r.best_value > 2.0);
    assert!(r.best_value <= 2.0 * 2f64.sqrt() + 1e-9);
}

/// Far separated branches: a brute-force grid over the standard box and the
/// optimizer must agree and neither exceeds 2.
#[test]
fn far_separated_branches_stay_classical() {
    let d = 10.0;
    for kappa0 in [PI / (4.0 * d), 7.0 * PI / (4.0 * d), 1.3] {
        let n = 41;
        let axis: Vec<f64> = (0..n).map(|i| -3.0 + 6.0 * i as f64 / (n - 1) as f64).collect();
        let mut grid_max = f64::MIN;
        for &x in &axis {
            for &xp in &axis {
                for &k in &axis {
                    for &kp in &axis {
                        let p = ScaledChshPoint { x, x_prime: xp, kappa: k, kappa_prime: kp, d, kappa0 };
                        grid_max = grid_max.max(chsh_max_closed_form(&p));
                    }
                }
            }
        }
        let r = optimize_scaled(d, kappa0, &ChshBounds::standard(), SearchMode::Fixed, 32, 5).unwrap();
        assert!(grid_max <= 2.0 + 1e-6, "grid {grid_max}");
        assert!(r.best_value <= 2.0 + 1e-6, "optimizer {}", r.best_value);
        assert!(r.best_value >= grid_max - 1e-9, "optimizer {} below grid {grid_max}", r.best_value);
    }
}

#[test]
fn same_seed_same_report() {
    let a = optimize_scaled(0.8, 1.1, &ChshBounds::standard(), SearchMode::Fixed, 16, 42).unwrap();
    let b = optimize_scaled(0.8, 1.1, &ChshBounds::standard(), SearchMode::Fixed, 16, 42).unwrap();
    assert_eq!(a, b);
}
