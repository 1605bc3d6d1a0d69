//! Derivative-free maximization of the phase-maximized CHSH sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chsh::{chsh_max_closed_form, ScaledChshPoint};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::real::Real;

/// Nelder–Mead simplex with the standard coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead<T> {
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
    pub max_iterations: usize,
    /// Converged once every vertex lies within this distance of the best one.
    pub diameter_tolerance: T,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        Self {
            reflection: T::one(),
            expansion: T::lit(2.0),
            contraction: T::lit(0.5),
            shrink: T::lit(0.5),
            max_iterations: 100_000,
            diameter_tolerance: T::lit(1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub point: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> NelderMead<T> {
    /// Minimizes `f` inside the box `[lower, upper]` starting from `x0`, with
    /// initial edge lengths `step`. Trial points are clamped into the box.
    pub fn minimize<F>(&self, f: F, x0: &[T], step: &[T], lower: &[T], upper: &[T]) -> Minimum<T>
    where
        F: Fn(&[T]) -> T,
    {
        let n = x0.len();
        let clamp = |mut p: Vec<T>| {
            for i in 0..n {
                p[i] = p[i].max(lower[i]).min(upper[i]);
            }
            p
        };
        let eval = |p: &[T]| {
            let v = f(p);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
        let p0 = clamp(x0.to_vec());
        simplex.push((p0.clone(), eval(&p0)));
        for i in 0..n {
            let mut p = p0.clone();
            // Step inward if the start sits on the upper face.
            p[i] = if p[i] + step[i] <= upper[i] { p[i] + step[i] } else { p[i] - step[i] };
            let p = clamp(p);
            let v = eval(&p);
            simplex.push((p, v));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            if diameter(&simplex) <= self.diameter_tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![T::zero(); n];
            for (p, _) in &simplex[..n] {
                for i in 0..n {
                    centroid[i] = centroid[i] + p[i];
                }
            }
            let nf = T::from_usize(n).unwrap();
            centroid.iter_mut().for_each(|c| *c = *c / nf);

            let worst = simplex[n].clone();
            let along = |coef: T| -> Vec<T> {
                clamp((0..n).map(|i| centroid[i] + coef * (worst.0[i] - centroid[i])).collect())
            };

            let reflected = along(-self.reflection);
            let fr = eval(&reflected);
            let best = simplex[0].1;
            let second_worst = simplex[n - 1].1;

            if fr < best {
                let expanded = along(-self.reflection * self.expansion);
                let fe = eval(&expanded);
                simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < second_worst {
                simplex[n] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < worst.1 {
                let c = along(-self.reflection * self.contraction);
                let v = eval(&c);
                (c, v)
            } else {
                let c = along(self.contraction);
                let v = eval(&c);
                (c, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (contracted, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for (p, v) in simplex.iter_mut().skip(1) {
                let q: Vec<T> = (0..n).map(|i| anchor[i] + self.shrink * (p[i] - anchor[i])).collect();
                *v = eval(&q);
                *p = q;
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        if !converged && diameter(&simplex) <= self.diameter_tolerance {
            converged = true;
        }
        let (point, value) = simplex.swap_remove(0);
        Minimum { point, value, iterations, converged }
    }
}

fn diameter<T: Real>(simplex: &[(Vec<T>, T)]) -> T {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(p, _)| p.iter().zip(best).fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b)).sqrt())
        .fold(T::zero(), T::max)
}

/// Which parameters the search varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// `(x, x', kappa, kappa')` with `d`, `kappa0` implied by the configuration.
    Fixed,
    /// Additionally `d` and `kappa0`, the latter restricted to `(0, pi/(2d)]`.
    Design,
}

/// Box in scaled coordinates. In design mode `kappa0` is always searched
/// over `(0, pi/(2d)]` and its entries here are ignored; in fixed mode the
/// `d`/`kappa0` entries are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshBounds<T> {
    pub lower: ScaledChshPoint<T>,
    pub upper: ScaledChshPoint<T>,
}

impl<T: Real> ChshBounds<T> {
    /// `|x|, |kappa| <= 3`, `d in (0, 3]`.
    pub fn standard() -> Self {
        let three = T::lit(3.0);
        Self {
            lower: ScaledChshPoint { x: -three, x_prime: -three, kappa: -three, kappa_prime: -three, d: T::lit(1e-9), kappa0: T::zero() },
            upper: ScaledChshPoint { x: three, x_prime: three, kappa: three, kappa_prime: three, d: three, kappa0: T::zero() },
        }
    }

    fn validate(&self, mode: SearchMode) -> Result<()> {
        let pairs = [
            ("x", self.lower.x, self.upper.x),
            ("x_prime", self.lower.x_prime, self.upper.x_prime),
            ("kappa", self.lower.kappa, self.upper.kappa),
            ("kappa_prime", self.lower.kappa_prime, self.upper.kappa_prime),
            ("d", self.lower.d, self.upper.d),
        ];
        let used = if mode == SearchMode::Design { 5 } else { 4 };
        for (name, lo, hi) in pairs.into_iter().take(used) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidBounds(format!("{name}: need finite lower < upper, got [{lo}, {hi}]")));
            }
        }
        if mode == SearchMode::Design && self.lower.d <= T::zero() {
            return Err(Error::InvalidBounds("d must stay positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport<T> {
    pub best_value: T,
    pub best_point: ScaledChshPoint<T>,
    /// `(beta*, beta'*)` attaining `best_value`.
    pub best_phases: (T, T),
    /// Simplex iterations of the winning start.
    pub iterations: usize,
    pub starts: usize,
    /// Whether the winning start converged.
    pub converged: bool,
    /// Number of starts that converged.
    pub converged_starts: usize,
}

/// First `PRIMES.len()` primes serve as Halton bases.
const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut acc = 0.0;
    while i > 0 {
        acc += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    acc
}

/// Halton points in `[0,1)^dim` with a seeded random shift (mod 1).
pub fn shifted_halton(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| (0..dim).map(|j| (radical_inverse(i, PRIMES[j]) + shift[j]).fract()).collect())
        .collect()
}

/// Multi-start Nelder–Mead maximization of [`chsh_max_closed_form`].
///
/// In [`SearchMode::Fixed`] `d` and `kappa0` come from `cfg`; `t` does not
/// enter the scaled objective but is checked against the transit time. Runs
/// are independent and merged by taking the largest value (lowest start
/// index on ties), then mirrored to the representative with `x >= 0`.
pub fn optimize_chsh<T: Real>(
    cfg: &SystemConfig<T>,
    t: T,
    bounds: &ChshBounds<T>,
    mode: SearchMode,
    starts: usize,
    seed: u64,
) -> Result<OptimumReport<T>> {
    cfg.validate()?;
    if mode == SearchMode::Fixed {
        cfg.check_after_transit(t)?;
    }
    optimize_scaled(cfg.scaled_half_separation(), cfg.scaled_kappa0(), bounds, mode, starts, seed)
}

/// Same as [`optimize_chsh`] with explicit `d` and `kappa0` for fixed mode.
pub fn optimize_scaled<T: Real>(
    d: T,
    kappa0: T,
    bounds: &ChshBounds<T>,
    mode: SearchMode,
    starts: usize,
    seed: u64,
) -> Result<OptimumReport<T>> {
    if starts == 0 {
        return Err(Error::InvalidBounds("need at least one start".into()));
    }
    bounds.validate(mode)?;
    let (lo, hi) = (bounds.lower, bounds.upper);
    let mut lower = vec![lo.x, lo.x_prime, lo.kappa, lo.kappa_prime];
    let mut upper = vec![hi.x, hi.x_prime, hi.kappa, hi.kappa_prime];
    if mode == SearchMode::Design {
        // kappa0 enters as the fraction theta of pi/(2d).
        lower.extend([lo.d, T::zero()]);
        upper.extend([hi.d, T::one()]);
    }
    let dim = lower.len();

    let decode = |v: &[T]| -> ScaledChshPoint<T> {
        let (dd, k0) = match mode {
            SearchMode::Fixed => (d, kappa0),
            SearchMode::Design => (v[4], v[5] * T::PI() / (T::lit(2.0) * v[4])),
        };
        ScaledChshPoint { x: v[0], x_prime: v[1], kappa: v[2], kappa_prime: v[3], d: dd, kappa0: k0 }
    };
    let objective = |v: &[T]| -chsh_max_closed_form(&decode(v));

    let nm = NelderMead::<T>::default();
    let step: Vec<T> = lower.iter().zip(&upper).map(|(l, u)| (*u - *l) * T::lit(0.1)).collect();
    let starts_unit = shifted_halton(starts, dim, seed);
    let runs: Vec<Minimum<T>> = starts_unit
        .par_iter()
        .map(|u| {
            let x0: Vec<T> = (0..dim).map(|i| lower[i] + (upper[i] - lower[i]) * T::lit(u[i])).collect();
            nm.minimize(objective, &x0, &step, &lower, &upper)
        })
        .collect();

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value < runs[best].value {
            best = i;
        }
    }
    let winner = &runs[best];
    let mut point = decode(&winner.point);
    if point.x < T::zero() {
        point.x = -point.x;
        point.x_prime = -point.x_prime;
    }
    let phases = point.coefficients().maximize();
    Ok(OptimumReport {
        best_value: chsh_max_closed_form(&point),
        best_point: point,
        best_phases: (phases.beta, phases.beta_prime),
        iterations: winner.iterations,
        starts,
        converged: winner.converged,
        converged_starts: runs.iter().filter(|r| r.converged).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let nm = NelderMead::<f64>::default();
        let f = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let m = nm.minimize(f, &[-1.2, 1.0], &[0.5, 0.5], &[-5.0, -5.0], &[5.0, 5.0]);
        assert!(m.converged);
        assert!((m.point[0] - 1.0).abs() < 1e-6 && (m.point[1] - 1.0).abs() < 1e-6, "{:?}", m.point);
    }

    #[test]
    fn nelder_mead_respects_box() {
        let nm = NelderMead::<f64>::default();
        let f = |p: &[f64]| (p[0] - 3.0).powi(2) + (p[1] + 4.0).powi(2);
        let m = nm.minimize(f, &[0.0, 0.0], &[0.1, 0.1], &[-1.0, -1.0], &[1.0, 1.0]);
        assert!((m.point[0] - 1.0).abs() < 1e-7 && (m.point[1] + 1.0).abs() < 1e-7);
    }

    #[test]
    fn halton_is_deterministic_and_in_unit_cube() {
        let a = shifted_halton(50, 6, 7);
        let b = shifted_halton(50, 6, 7);
        assert_eq!(a, b);
        assert_ne!(a, shifted_halton(50, 6, 8));
        assert!(a.iter().flatten().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn rejects_empty_runs_and_bad_boxes() {
        let b = ChshBounds::<f64>::standard();
        assert!(optimize_scaled(0.7, 1.0, &b, SearchMode::Fixed, 0, 1).is_err());
        let mut bad = b;
        bad.upper.x = bad.lower.x;
        assert!(optimize_scaled(0.7, 1.0, &bad, SearchMode::Fixed, 4, 1).is_err());
    }
}
