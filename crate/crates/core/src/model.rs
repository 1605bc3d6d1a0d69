//! Dimensionless atom-field model: the initial Gaussian, the two dressed
//! branches after the cavity, and the derived scales.
//!
//! Units throughout: lengths in `L` (half the interaction zone), wave
//! numbers in `sqrt(2 m gamma / hbar)`, times in `1/gamma`. With
//! `Lambda = sqrt(2 m gamma / hbar) * L` the only conversions needed are
//!
//! * a scaled wave number `k` is `k * Lambda` inverse lengths,
//! * `hbar t / m` is `2 gamma_t / Lambda^2` square lengths,
//! * the kinetic energy of wave number `k` is `k^2` in units of `hbar gamma`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::real::Real;

/// Which dressed state `|1,+>` / `|1,->` a partial packet belongs to. The
/// plus branch moves in the potential `+hbar gamma u(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub const BOTH: [BranchSign; 2] = [BranchSign::Plus, BranchSign::Minus];

    #[inline]
    pub fn sign<T: Real>(self) -> T {
        match self {
            BranchSign::Plus => T::one(),
            BranchSign::Minus => -T::one(),
        }
    }
}

/// One physical scenario in scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig<T> {
    /// `Lambda = sqrt(2 m gamma / hbar) L`.
    pub scale_product: T,
    /// The packet starts centred at `-z0`.
    #[serde(rename = "z0_over_L")]
    pub z0_over_l: T,
    #[serde(rename = "alpha_over_L")]
    pub alpha_over_l: T,
    pub k0_scaled: T,
    /// Measurement time `gamma t`.
    pub gamma_t: T,
}

/// Scales that follow from a configuration at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales<T> {
    /// Branch separation `D / L`.
    pub separation: T,
    /// Classical transit time `gamma T`.
    pub transit_time: T,
    /// Complex width `alpha + i hbar t / (2 alpha m)` in units of `L`.
    pub complex_width: Complex<T>,
}

impl<T: Real> SystemConfig<T> {
    pub fn new(scale_product: T, z0_over_l: T, alpha_over_l: T, k0_scaled: T, gamma_t: T) -> Result<Self> {
        let cfg = Self { scale_product, z0_over_l, alpha_over_l, k0_scaled, gamma_t };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Positivity and finiteness of all five parameters.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("scale_product", self.scale_product),
            ("z0_over_L", self.z0_over_l),
            ("alpha_over_L", self.alpha_over_l),
            ("k0_scaled", self.k0_scaled),
            ("gamma_t", self.gamma_t),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Stricter geometric requirements of the propagating picture: the packet
    /// starts left of the cavity (to 3 sigma) and at time `t` both branch
    /// centres are right of it (to 3 widths).
    pub fn check_geometry(&self, t: T) -> Result<()> {
        let three = T::lit(3.0);
        if self.z0_over_l <= T::one() + three * self.alpha_over_l {
            return Err(Error::InvalidConfig(format!(
                "initial packet overlaps the cavity: z0/L = {} <= 1 + 3 alpha/L = {}",
                self.z0_over_l,
                T::one() + three * self.alpha_over_l
            )));
        }
        let edge = T::one() + three * self.density_width(t);
        for branch in BranchSign::BOTH {
            let c = self.branch_center(t, branch);
            if c <= edge {
                return Err(Error::InvalidConfig(format!(
                    "{branch:?} branch centre {c} at gamma t = {t} is not right of the cavity (needs > {edge})"
                )));
            }
        }
        Ok(())
    }

    /// `k0` in inverse units of `L`.
    #[inline]
    pub fn k0_per_length(&self) -> T {
        self.k0_scaled * self.scale_product
    }

    /// `hbar t / m` in units of `L^2`.
    #[inline]
    pub fn hbar_t_over_m(&self, t: T) -> T {
        T::lit(2.0) * t / (self.scale_product * self.scale_product)
    }

    /// Distance travelled by wave number `k` (scaled) during `t`, i.e.
    /// `hbar k t / m` in units of `L`.
    #[inline]
    pub fn drift(&self, k: T, t: T) -> T {
        k * self.scale_product * self.hbar_t_over_m(t)
    }

    /// `D / L = 2 / k0^2`.
    #[inline]
    pub fn separation(&self) -> T {
        T::lit(2.0) / (self.k0_scaled * self.k0_scaled)
    }

    /// `gamma T` with `T = 2 z0 / (hbar k0 / m)`. Since
    /// `hbar/(m gamma) = 2/q^2` this is `z0 q^2 / k0 = (z0/L) Lambda / (k0/q)`.
    #[inline]
    pub fn transit_time(&self) -> T {
        self.z0_over_l * self.scale_product / self.k0_scaled
    }

    /// `hbar t / (2 alpha m)` in units of `L`.
    #[inline]
    pub fn spread(&self, t: T) -> T {
        self.hbar_t_over_m(t) / (T::lit(2.0) * self.alpha_over_l)
    }

    /// Standard deviation of `|Phi(z,t)|^2`: `sqrt(alpha^2 + (hbar t / 2 alpha m)^2)`.
    pub fn density_width(&self, t: T) -> T {
        self.alpha_over_l.hypot(self.spread(t))
    }

    pub fn complex_width(&self, t: T) -> Complex<T> {
        Complex::new(self.alpha_over_l, self.spread(t))
    }

    pub fn derived(&self, t: T) -> DerivedScales<T> {
        DerivedScales {
            separation: self.separation(),
            transit_time: self.transit_time(),
            complex_width: self.complex_width(t),
        }
    }

    /// Centre of the undeflected packet, `-z0 + hbar k0 t / m`.
    pub fn free_center(&self, t: T) -> T {
        -self.z0_over_l + self.drift(self.k0_scaled, t)
    }

    /// Centre of `Phi^[+-]`: the plus branch lags by `D/2`, the minus branch leads.
    pub fn branch_center(&self, t: T, branch: BranchSign) -> T {
        self.free_center(t) - branch.sign::<T>() * self.separation() / T::lit(2.0)
    }

    pub fn check_after_transit(&self, t: T) -> Result<()> {
        let transit = self.transit_time();
        if t < transit || !t.is_finite() {
            return Err(Error::BeforeTransit { t: t.to_f64_lossy(), transit: transit.to_f64_lossy() });
        }
        Ok(())
    }

    /// Normalized initial packet `(2 pi alpha^2)^{-1/4} exp[-(z+z0)^2/(4 alpha^2) + i k0 z]`.
    pub fn initial_amplitude(&self, z: T) -> Complex<T> {
        let a = self.alpha_over_l;
        let norm = (T::lit(2.0) * T::PI() * a * a).powf(T::lit(-0.25));
        let u = z + self.z0_over_l;
        let envelope = -(u * u) / (T::lit(4.0) * a * a);
        Complex::from_polar(norm * envelope.exp(), self.k0_per_length() * z)
    }

    /// Real phase `phi(z, t; c)` accompanying a packet launched from `-c`:
    /// `k0 (z - hbar k0 t / 2m) + (z + c - hbar k0 t/m)^2 / [4 alpha^2 (2 m alpha^2/hbar t + hbar t / 2 m alpha^2)]`.
    pub fn phase(&self, z: T, t: T, center: T) -> Result<T> {
        if t == T::zero() {
            return Err(Error::ZeroTime);
        }
        let a2 = self.alpha_over_l * self.alpha_over_l;
        let s = self.hbar_t_over_m(t);
        let k0 = self.k0_per_length();
        let u = z + center - s * k0;
        let chirp = T::lit(4.0) * a2 * (T::lit(2.0) * a2 / s + s / (T::lit(2.0) * a2));
        Ok(k0 * (z - s * k0 / T::lit(2.0)) + u * u / chirp)
    }

    /// Partial wave packet `Phi^[+-](z, t)` right of the cavity.
    pub fn branch_amplitude(&self, z: T, t: T, branch: BranchSign) -> Result<Complex<T>> {
        self.check_after_transit(t)?;
        Ok(self.branch_amplitude_unchecked(z, t, branch))
    }

    pub(crate) fn branch_amplitude_unchecked(&self, z: T, t: T, branch: BranchSign) -> Complex<T> {
        let sgn = branch.sign::<T>();
        let half_d = self.separation() / T::lit(2.0);
        let k0 = self.k0_per_length();
        let a = self.alpha_over_l;
        let spread = self.spread(t);
        let phase = -sgn * k0 * half_d
            + self
                .phase(z, t, self.z0_over_l + sgn * half_d)
                .expect("t >= T > 0");
        let u = z + self.z0_over_l - self.drift(self.k0_scaled, t) + sgn * half_d;
        let envelope = -(u * u) / (T::lit(4.0) * (a * a + spread * spread));
        let den = (Complex::new(a, spread) * (T::lit(2.0) * T::PI()).sqrt()).sqrt();
        Complex::from_polar(envelope.exp(), phase) / den
    }

    /// Freely evolved initial packet (no cavity), valid for all `t >= 0`.
    pub fn free_amplitude(&self, z: T, t: T) -> Complex<T> {
        let a = self.alpha_over_l;
        let w = self.complex_width(t);
        let k0 = self.k0_per_length();
        let u = z + self.z0_over_l - self.drift(self.k0_scaled, t);
        let two_pi = T::lit(2.0) * T::PI();
        let exponent = Complex::new(-(u * u), T::zero()) / (w * a * T::lit(4.0))
            + Complex::new(T::zero(), k0 * (z - self.drift(self.k0_scaled, t) / T::lit(2.0)));
        exponent.exp() / (w * two_pi.sqrt()).sqrt()
    }

    /// `int |Phi^[+-]|^2 dz` by the fixed 2000-node Gauss-Legendre rule over
    /// the packet centre plus/minus ten widths.
    pub fn branch_norm(&self, t: T, branch: BranchSign) -> Result<T> {
        self.check_after_transit(t)?;
        let (lo, hi) = self.window(t, branch);
        Ok(quad::integrate(lo, hi, |z| self.branch_amplitude_unchecked(z, t, branch).norm_sqr()))
    }

    /// Mean and standard deviation of `|Phi^[+-]|^2` by the same rule.
    pub fn branch_moments(&self, t: T, branch: BranchSign) -> Result<(T, T)> {
        self.check_after_transit(t)?;
        let (lo, hi) = self.window(t, branch);
        let rho = |z: T| self.branch_amplitude_unchecked(z, t, branch).norm_sqr();
        let m0 = quad::integrate(lo, hi, rho);
        let m1 = quad::integrate(lo, hi, |z| z * rho(z)) / m0;
        let m2 = quad::integrate(lo, hi, |z| (z - m1) * (z - m1) * rho(z)) / m0;
        Ok((m1, m2.sqrt()))
    }

    fn window(&self, t: T, branch: BranchSign) -> (T, T) {
        let c = self.branch_center(t, branch);
        let w = T::lit(10.0) * self.density_width(t);
        (c - w, c + w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cat_map() -> SystemConfig<f64> {
        SystemConfig::new(250.0, 1.75, 0.03, 2.31, 190.0).unwrap()
    }

    fn bell() -> SystemConfig<f64> {
        SystemConfig::new(6030.7, 0.15, 0.067, 2.668, 400.0).unwrap()
    }

    #[test]
    fn rejects_non_positive_fields() {
        assert!(SystemConfig::new(250.0, 1.75, 0.0, 2.31, 190.0).is_err());
        assert!(SystemConfig::new(f64::NAN, 1.75, 0.03, 2.31, 190.0).is_err());
        assert!(SystemConfig::new(250.0, -1.0, 0.03, 2.31, 190.0).is_err());
    }

    #[test]
    fn initial_amplitude_peaks_at_start() {
        let cfg = cat_map();
        let a = cfg.alpha_over_l;
        let c = cfg.initial_amplitude(-cfg.z0_over_l);
        let expected_mod = (2.0 * std::f64::consts::PI * a * a).powf(-0.25);
        assert_relative_eq!(c.norm(), expected_mod, max_relative = 1e-14);
        let expected_phase = Complex::from_polar(1.0, -cfg.k0_per_length() * cfg.z0_over_l);
        assert!((c / c.norm() - expected_phase).norm() < 1e-10);
        for s in [-1.0, 1.0] {
            let r = cfg.initial_amplitude(-cfg.z0_over_l + s * a).norm() / c.norm();
            assert_relative_eq!(r, (-0.25f64).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn initial_amplitude_is_normalized() {
        let cfg = cat_map();
        let c = -cfg.z0_over_l;
        let w = 10.0 * cfg.alpha_over_l;
        let n = quad::integrate(c - w, c + w, |z| cfg.initial_amplitude(z).norm_sqr());
        assert!((n - 1.0).abs() < 1e-10, "{n}");
    }

    #[test]
    fn separation_values() {
        let mut cfg = cat_map();
        assert!((cfg.separation() - 0.374805).abs() < 1e-6);
        cfg.k0_scaled = 2f64.sqrt();
        assert_relative_eq!(cfg.separation(), 1.0, max_relative = 1e-15);
        // 2 / 2.668^2
        assert!((bell().separation() - 0.2809690).abs() < 1e-6);
    }

    #[test]
    fn transit_time_scaling() {
        let cfg = cat_map();
        let mut c2 = cfg;
        c2.z0_over_l *= 2.0;
        assert_relative_eq!(c2.transit_time(), 2.0 * cfg.transit_time(), max_relative = 1e-15);
        let mut c3 = cfg;
        c3.k0_scaled *= 2.0;
        assert_relative_eq!(c3.transit_time(), 0.5 * cfg.transit_time(), max_relative = 1e-15);
        let f3 = bell();
        assert!(f3.transit_time() < f3.gamma_t);
        // The classical centre reaches +z0 exactly at T.
        assert_relative_eq!(cfg.free_center(cfg.transit_time()), cfg.z0_over_l, max_relative = 1e-13);
    }

    #[test]
    fn phase_rejects_zero_time_and_centres() {
        let cfg = cat_map();
        assert_eq!(cfg.phase(0.3, 0.0, 1.0), Err(Error::ZeroTime));
        let t = 190.0;
        let c = 1.8;
        let s = cfg.hbar_t_over_m(t);
        let k0 = cfg.k0_per_length();
        let z = s * k0 - c;
        let phi = cfg.phase(z, t, c).unwrap();
        assert_relative_eq!(phi, k0 * (z - s * k0 / 2.0), max_relative = 1e-13);
        // The chirp term depends only on z + c.
        let shift = 0.123;
        let lin = |z: f64| k0 * (z - s * k0 / 2.0);
        let a = cfg.phase(0.4, t, c).unwrap() - lin(0.4);
        let b = cfg.phase(0.4 + shift, t, c - shift).unwrap() - lin(0.4 + shift);
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn branch_amplitude_guards_transit() {
        let cfg = cat_map();
        let t = cfg.transit_time() * 0.9;
        assert!(matches!(cfg.branch_amplitude(0.0, t, BranchSign::Plus), Err(Error::BeforeTransit { .. })));
        assert!(cfg.branch_norm(t, BranchSign::Minus).is_err());
    }

    #[test]
    fn branches_are_normalized_and_spread() {
        let cfg = cat_map();
        let t = 190.0;
        for b in BranchSign::BOTH {
            let n = cfg.branch_norm(t, b).unwrap();
            assert!((n - 1.0).abs() < 1e-10, "{b:?}: {n}");
            let (mean, sd) = cfg.branch_moments(t, b).unwrap();
            assert!((mean - cfg.branch_center(t, b)).abs() < 1e-10);
            assert!((sd - cfg.density_width(t)).abs() < 1e-8);
        }
        let dp = cfg.branch_center(t, BranchSign::Minus) - cfg.branch_center(t, BranchSign::Plus);
        assert_relative_eq!(dp, cfg.separation(), max_relative = 1e-12);
    }

    #[test]
    fn branches_are_translates() {
        let cfg = cat_map();
        let t = 190.0;
        let d = cfg.separation();
        for i in 0..50 {
            let z = 1.3 + 0.01 * i as f64;
            let p = cfg.branch_amplitude(z, t, BranchSign::Plus).unwrap().norm();
            let m = cfg.branch_amplitude(z + d, t, BranchSign::Minus).unwrap().norm();
            assert!((p - m).abs() < 1e-10 * (1.0 + p));
        }
    }

    /// The printed packet equals a freely evolved Gaussian launched from
    /// `-z0 -+ D/2` with an extra constant phase `-+ k0 D`; the free
    /// evolution is written here through the complex width instead of the
    /// split real phase.
    #[test]
    fn branch_matches_shifted_free_packet() {
        let cfg = cat_map();
        let t = 190.0;
        let d = cfg.separation();
        let k0 = cfg.k0_per_length();
        for b in BranchSign::BOTH {
            let s: f64 = b.sign();
            let mut shifted = cfg;
            shifted.z0_over_l = cfg.z0_over_l + s * d / 2.0;
            let c = cfg.branch_center(t, b);
            for i in -20..=20 {
                let z = c + 0.01 * i as f64;
                let lhs = cfg.branch_amplitude(z, t, b).unwrap();
                let rhs = shifted.free_amplitude(z, t) * Complex::from_polar(1.0, -s * k0 * d / 2.0);
                assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()), "{b:?} z={z}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn geometry_checks() {
        let cfg = cat_map();
        assert!(cfg.check_geometry(190.0).is_ok());
        assert!(cfg.check_geometry(150.0).is_err());
        assert!(bell().check_geometry(400.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let cfg = SystemConfig::<f32>::new(250.0, 1.75, 0.03, 2.31, 190.0).unwrap();
        assert!((cfg.separation() - 0.374805).abs() < 1e-5);
        assert!((cfg.transit_time() - 189.3939).abs() < 1e-2);
    }
}
