//! Uniform periodic sampling grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::real::Real;

/// Smallest grid the propagation oracle accepts.
pub const MIN_ORACLE_POINTS: usize = 1 << 12;

/// Uniform grid on `[z_min, z_max)`; the right end is the periodic image of
/// the left one, so `spacing = (z_max - z_min) / n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub z_min: T,
    pub z_max: T,
    pub n_points: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(z_min: T, z_max: T, n_points: usize) -> Result<Self> {
        if !(z_min.is_finite() && z_max.is_finite() && z_max > z_min) {
            return Err(Error::InvalidGrid(format!("need finite z_min < z_max, got [{z_min}, {z_max}]")));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_points must be a power of two >= 2, got {n_points}")));
        }
        Ok(Self { z_min, z_max, n_points })
    }

    #[inline]
    pub fn spacing(&self) -> T {
        (self.z_max - self.z_min) / T::from_usize(self.n_points).unwrap()
    }

    #[inline]
    pub fn point(&self, j: usize) -> T {
        self.z_min + T::from_usize(j).unwrap() * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_points).map(move |j| self.point(j))
    }

    /// Largest wave number carried by the packets of `cfg`: the fastest
    /// in-cavity wave number plus ten momentum standard deviations.
    pub fn max_wave_number(cfg: &SystemConfig<T>) -> T {
        let k0 = cfg.k0_per_length();
        let inside = k0 * (T::one() + T::one() / (cfg.k0_scaled * cfg.k0_scaled)).sqrt();
        inside + T::lit(10.0) / (T::lit(2.0) * cfg.alpha_over_l)
    }

    /// Resolution requirements of the oracle: `n >= 2^12`, at least 16
    /// points per `alpha` and 8 per shortest de Broglie wavelength.
    pub fn check_resolution(&self, cfg: &SystemConfig<T>) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_points < MIN_ORACLE_POINTS {
            problems.push(format!("n_points {} < {}", self.n_points, MIN_ORACLE_POINTS));
        }
        let dz = self.spacing();
        let per_alpha = cfg.alpha_over_l / dz;
        if per_alpha < T::lit(16.0) {
            problems.push(format!("only {per_alpha:.2} points per alpha (need 16)"));
        }
        let wavelength = T::lit(2.0) * T::PI() / Self::max_wave_number(cfg);
        let per_wavelength = wavelength / dz;
        if per_wavelength < T::lit(8.0) {
            problems.push(format!("only {per_wavelength:.2} points per shortest wavelength (need 8)"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGrid(problems.join("; ")))
        }
    }

    /// Sampling grid for the analytic branches at time `t`: ten density
    /// widths around both centres, at least 32 points per `alpha` and 8 per
    /// shortest wavelength, rounded up to a power of two.
    pub fn around_branches(cfg: &SystemConfig<T>, t: T) -> Self {
        let w = T::lit(10.0) * cfg.density_width(t);
        let half_d = cfg.separation() / T::lit(2.0);
        let c = cfg.free_center(t);
        let lo = c - half_d - w;
        let hi = c + half_d + w;
        let dz_max = (cfg.alpha_over_l / T::lit(32.0))
            .min(T::lit(2.0) * T::PI() / (T::lit(8.0) * Self::max_wave_number(cfg)));
        let n = ((hi - lo) / dz_max).ceil().to_usize().unwrap_or(usize::MAX).next_power_of_two().max(1 << 10);
        Self { z_min: lo, z_max: hi, n_points: n }
    }

    /// Grid for propagating from `t = 0` to `t`: covers the launch region,
    /// the transmitted branches and the part reflected back at the left
    /// cavity edge, each with ten widths of margin inside the edge bands.
    pub fn for_propagation(cfg: &SystemConfig<T>, t: T, n_points: usize) -> Result<Self> {
        let ten = T::lit(10.0);
        let w = cfg.density_width(t);
        let half_d = cfg.separation() / T::lit(2.0);
        let travelled = cfg.drift(cfg.k0_scaled, t);
        let reflected = cfg.z0_over_l - T::lit(2.0) - travelled;
        let launch = -cfg.z0_over_l - ten * cfg.alpha_over_l;
        let lo = launch.min(reflected - ten * w).min(-T::one() - ten * cfg.alpha_over_l);
        let hi = (cfg.free_center(t) + half_d + ten * w).max(T::one() + ten * cfg.alpha_over_l);
        // Widen so the monitored edge bands (1/32 of the span each) lie
        // outside the margins.
        let pad = (hi - lo) / T::lit(30.0);
        Self::new(lo - pad, hi + pad, n_points)
    }
}
