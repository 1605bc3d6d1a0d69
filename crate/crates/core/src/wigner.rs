//! Displaced-parity expectation values.
//!
//! `<a| D P D^dagger |b>` at the phase-space point `(z, k)` is
//! `int dy e^{-2iky} a*(z-y) b(z+y)`, the Wigner function without its
//! `1/pi` factor, so every value lies in `[-1, 1]`. The closed forms below
//! hold for the analytic branches; [`CrossWigner`] evaluates the integral
//! directly on sampled amplitudes.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{BranchSign, SystemConfig};
use crate::real::Real;

/// Tail mass tolerated in the outer bands of a sampled amplitude.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

/// Displacement `(z, k)` of the parity measurement; `z` in `L`, `k` scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<T> {
    pub z: T,
    pub k: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(z: T, k: T) -> Self {
        Self { z, k }
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.k.is_finite()
    }
}

/// The exponent shared by the three closed forms, `-2 alpha^2 (k-k0)^2 -
/// (z + z0 - hbar k t/m + shift)^2 / (2 alpha^2)`.
fn gaussian_exponent<T: Real>(cfg: &SystemConfig<T>, pt: PhasePoint<T>, t: T, shift: T) -> T {
    let a = cfg.alpha_over_l;
    let dk = (pt.k - cfg.k0_scaled) * cfg.scale_product;
    let u = pt.z + cfg.z0_over_l - cfg.drift(pt.k, t) + shift;
    -T::lit(2.0) * a * a * dk * dk - u * u / (T::lit(2.0) * a * a)
}

/// `W^+-(z, k)` of the two branches.
pub fn wigner_branch<T: Real>(cfg: &SystemConfig<T>, pt: PhasePoint<T>, t: T, branch: BranchSign) -> Result<T> {
    cfg.check_after_transit(t)?;
    let shift = branch.sign::<T>() * cfg.separation() / T::lit(2.0);
    Ok(gaussian_exponent(cfg, pt, t, shift).exp())
}

/// Interference term `W^int = (i/2)(<+|W|-> - <-|W|+>)`, a centred Gaussian
/// times `sin[D (k - 2 k0)]`.
pub fn wigner_interference<T: Real>(cfg: &SystemConfig<T>, pt: PhasePoint<T>, t: T) -> Result<T> {
    cfg.check_after_transit(t)?;
    let envelope = gaussian_exponent(cfg, pt, t, T::zero()).exp();
    let arg = cfg.separation() * (pt.k - T::lit(2.0) * cfg.k0_scaled) * cfg.scale_product;
    Ok(envelope * arg.sin())
}

/// `1/2 (W^+ - W^-) cos beta - W^int sin beta`; `beta = pi/4` gives the
/// equal-weight cat picture.
pub fn cat_quasiprobability<T: Real>(cfg: &SystemConfig<T>, pt: PhasePoint<T>, t: T, beta: T) -> Result<T> {
    let wp = wigner_branch(cfg, pt, t, BranchSign::Plus)?;
    let wm = wigner_branch(cfg, pt, t, BranchSign::Minus)?;
    let wi = wigner_interference(cfg, pt, t)?;
    Ok((wp - wm) / T::lit(2.0) * beta.cos() - wi * beta.sin())
}

/// Complex amplitude sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWave<T> {
    pub grid: Grid<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SampledWave<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Self {
        assert_eq!(grid.n_points, values.len(), "sample count must match the grid");
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(T) -> Complex<T>>(grid: Grid<T>, f: F) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    /// Analytic branch `Phi^[+-](z, t)` sampled on `grid`.
    pub fn branch(cfg: &SystemConfig<T>, t: T, branch: BranchSign, grid: Grid<T>) -> Result<Self> {
        cfg.check_after_transit(t)?;
        Ok(Self::from_fn(grid, |z| cfg.branch_amplitude_unchecked(z, t, branch)))
    }

    /// `sum |psi|^2 dz`.
    pub fn norm_sqr(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()) * self.grid.spacing()
    }

    /// `sum conj(self) other dz`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let s = self
            .values
            .iter()
            .zip(&other.values)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
        s * self.grid.spacing()
    }

    /// Probability in the outer `n/32` samples on either side.
    pub fn edge_mass(&self) -> T {
        let band = (self.values.len() / 32).max(1);
        let n = self.values.len();
        let edge = self.values[..band].iter().chain(&self.values[n - band..]);
        edge.fold(T::zero(), |acc, v| acc + v.norm_sqr()) * self.grid.spacing()
    }

    pub fn check_support(&self) -> Result<()> {
        let mass = self.edge_mass().to_f64_lossy();
        if mass.is_nan() || mass > TRUNCATION_LIMIT {
            return Err(Error::Truncated { mass, limit: TRUNCATION_LIMIT });
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn zip_with<F: Fn(Complex<T>, Complex<T>) -> Complex<T>>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.grid, other.grid, "waves must share a grid");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self { grid: self.grid, values }
    }
}

/// Evaluates `<a| D(z,k) P D(z,k)^dagger |b>` for fixed sampled `a`, `b`.
///
/// The reflected amplitude `a(2z - x)` is obtained by trigonometric
/// interpolation (a phase ramp on the spectrum of `a`, zero padded to twice
/// the grid so the reflection never wraps), and the `x`-integral is the
/// trapezoidal sum over the grid.
pub struct CrossWigner<T: Real> {
    grid: Grid<T>,
    spectrum: Vec<Complex<T>>,
    b: Vec<Complex<T>>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> CrossWigner<T> {
    pub fn new(a: &SampledWave<T>, b: &SampledWave<T>) -> Result<Self> {
        if a.grid != b.grid {
            return Err(Error::InvalidGrid("cross Wigner needs both amplitudes on one grid".into()));
        }
        a.check_support()?;
        b.check_support()?;
        let n = a.values.len();
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let mut spectrum = vec![Complex::new(T::zero(), T::zero()); m];
        spectrum[..n].copy_from_slice(&a.values);
        fft.process(&mut spectrum);
        let inv_m = T::one() / T::from_usize(m).unwrap();
        spectrum.iter_mut().for_each(|c| *c = *c * inv_m);
        Ok(Self { grid: a.grid, spectrum, b: b.values.clone(), fft })
    }

    /// `z` in `L`, `k` in inverse `L`.
    pub fn eval_raw(&self, z: T, k: T) -> Complex<T> {
        let n = self.b.len();
        let m = self.spectrum.len();
        let h = self.grid.spacing();
        let x0 = self.grid.z_min;
        if z < x0 || z > x0 + T::from_usize(n).unwrap() * h {
            // Both supports lie inside the grid, so the integrand vanishes.
            return Complex::new(T::zero(), T::zero());
        }
        let period = T::from_usize(m).unwrap() * h;
        let shift = T::lit(2.0) * (z - x0);
        let mut reflected: Vec<Complex<T>> = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(p, c)| {
                let p = if p < m / 2 { p as f64 } else { p as f64 - m as f64 };
                let omega = T::lit(2.0) * T::PI() * T::lit(p) / period;
                c * Complex::from_polar(T::one(), omega * shift)
            })
            .collect();
        // Forward transform evaluates sum_p G_p e^{-i omega_p x_j}.
        self.fft.process(&mut reflected);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (j, (r, b)) in reflected.iter().zip(&self.b).enumerate() {
            let x = x0 + T::from_usize(j).unwrap() * h;
            let kernel = Complex::from_polar(T::one(), -T::lit(2.0) * k * (x - z));
            acc = acc + r.conj() * *b * kernel;
        }
        acc * h
    }

    /// Scaled phase-space point; `scale_product` converts `k`.
    pub fn eval(&self, pt: PhasePoint<T>, scale_product: T) -> Complex<T> {
        self.eval_raw(pt.z, pt.k * scale_product)
    }
}

/// One-shot `int dy e^{-2iky} a*(z-y) b(z+y)` on sampled amplitudes.
pub fn cross_wigner_numeric<T: Real>(
    a: &SampledWave<T>,
    b: &SampledWave<T>,
    pt: PhasePoint<T>,
    scale_product: T,
) -> Result<Complex<T>> {
    Ok(CrossWigner::new(a, b)?.eval(pt, scale_product))
}

/// Quadrature version of `W^int` from both off-diagonal elements.
pub fn interference_numeric<T: Real>(
    plus_minus: &CrossWigner<T>,
    minus_plus: &CrossWigner<T>,
    pt: PhasePoint<T>,
    scale_product: T,
) -> T {
    let pm = plus_minus.eval(pt, scale_product);
    let mp = minus_plus.eval(pt, scale_product);
    let v = (pm - mp) * Complex::new(T::zero(), T::lit(0.5));
    v.re
}
