#![allow(dead_code)]

use catbell::SystemConfig;
use rand::Rng;

pub fn cat_map() -> SystemConfig {
    SystemConfig::new(250.0, 1.75, 0.03, 2.31, 190.0).unwrap()
}

/// Random config with the packet outside the well and `t` past transit.
pub fn random_config<R: Rng>(rng: &mut R) -> (SystemConfig, f64) {
    let alpha = rng.gen_range(0.02..0.15);
    let cfg = SystemConfig::new(
        rng.gen_range(80.0..1500.0),
        1.0 + 3.0 * alpha + rng.gen_range(0.1..1.5),
        alpha,
        rng.gen_range(1.5..3.5),
        1.0,
    )
    .unwrap();
    let t = cfg.transit_time() * rng.gen_range(1.0..2.0);
    (SystemConfig { gamma_t: t, ..cfg }, t)
}
