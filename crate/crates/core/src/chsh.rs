//! Atom-field correlation function and the CHSH combination.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{BranchSign, SystemConfig};
use crate::real::Real;
use crate::wigner::{wigner_branch, wigner_interference, PhasePoint};

/// Displacement of the atomic parity measurement `A(z, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSetting<T> {
    pub pt: PhasePoint<T>,
}

impl<T: Real> AtomSetting<T> {
    pub fn new(z: T, k: T) -> Self {
        Self { pt: PhasePoint::new(z, k) }
    }
}

/// Phase of the field observable `B(beta)`, kept in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSetting<T> {
    pub beta: T,
}

impl<T: Real> FieldSetting<T> {
    pub fn new(beta: T) -> Self {
        let two_pi = T::TAU();
        let mut b = beta % two_pi;
        if b < T::zero() {
            b = b + two_pi;
        }
        if b >= two_pi {
            b = T::zero();
        }
        Self { beta: b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSetting<T> {
    pub a: AtomSetting<T>,
    pub a_prime: AtomSetting<T>,
    pub beta: FieldSetting<T>,
    pub beta_prime: FieldSetting<T>,
}

/// Dimensionless coordinates of a pair of atomic settings:
/// `x = (z + z0 - hbar k t/m) / (sqrt2 alpha)`, `kappa = sqrt2 alpha (k - k0)`,
/// `d = D / (2 sqrt2 alpha)`, `kappa0 = sqrt2 alpha k0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledChshPoint<T> {
    pub x: T,
    pub x_prime: T,
    pub kappa: T,
    pub kappa_prime: T,
    pub d: T,
    pub kappa0: T,
}

/// `B = x1 cos beta + y1 sin beta + x2 cos beta' + y2 sin beta'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoefficients<T> {
    pub x1: T,
    pub y1: T,
    pub x2: T,
    pub y2: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMaximum<T> {
    pub value: T,
    pub beta: T,
    pub beta_prime: T,
}

impl<T: Real> SystemConfig<T> {
    /// `d = D / (2 sqrt2 alpha)`.
    pub fn scaled_half_separation(&self) -> T {
        self.separation() / (T::lit(2.0) * T::SQRT_2() * self.alpha_over_l)
    }

    /// `kappa0 = sqrt2 alpha k0`.
    pub fn scaled_kappa0(&self) -> T {
        T::SQRT_2() * self.alpha_over_l * self.k0_per_length()
    }
}

/// `<A(z,k) B(beta)> = 1/2 (W^+ - W^-) cos beta - W^int sin beta`.
pub fn correlation<T: Real>(cfg: &SystemConfig<T>, a: AtomSetting<T>, b: FieldSetting<T>, t: T) -> Result<T> {
    let (c, s) = atom_terms(cfg, a, t)?;
    Ok(c * b.beta.cos() - s * b.beta.sin())
}

/// `(1/2 (W^+ - W^-), W^int)` at one atomic setting.
pub fn atom_terms<T: Real>(cfg: &SystemConfig<T>, a: AtomSetting<T>, t: T) -> Result<(T, T)> {
    let wp = wigner_branch(cfg, a.pt, t, BranchSign::Plus)?;
    let wm = wigner_branch(cfg, a.pt, t, BranchSign::Minus)?;
    let wi = wigner_interference(cfg, a.pt, t)?;
    Ok(((wp - wm) / T::lit(2.0), wi))
}

/// `C(a,b) + C(a,b') + C(a',b) - C(a',b')`.
pub fn chsh_sum<T: Real>(cfg: &SystemConfig<T>, s: &ChshSetting<T>, t: T) -> Result<T> {
    Ok(correlation(cfg, s.a, s.beta, t)? + correlation(cfg, s.a, s.beta_prime, t)?
        + correlation(cfg, s.a_prime, s.beta, t)?
        - correlation(cfg, s.a_prime, s.beta_prime, t)?)
}

/// Collects the `cos beta`, `sin beta`, `cos beta'`, `sin beta'` terms of the
/// CHSH sum from the atomic terms `(C, S)` of both settings.
pub fn phase_coefficients<T: Real>(a: (T, T), a_prime: (T, T)) -> PhaseCoefficients<T> {
    let (c, s) = a;
    let (cp, sp) = a_prime;
    PhaseCoefficients { x1: c + cp, y1: -(s + sp), x2: c - cp, y2: sp - s }
}

pub fn setting_coefficients<T: Real>(
    cfg: &SystemConfig<T>,
    a: AtomSetting<T>,
    a_prime: AtomSetting<T>,
    t: T,
) -> Result<PhaseCoefficients<T>> {
    Ok(phase_coefficients(atom_terms(cfg, a, t)?, atom_terms(cfg, a_prime, t)?))
}

/// Maximum of `x1 cos b + y1 sin b + x2 cos b' + y2 sin b'` over both phases
/// and the attaining phases in `[0, 2 pi)`. A vanishing pair yields phase 0.
pub fn max_over_phases<T: Real>(x1: T, y1: T, x2: T, y2: T) -> PhaseMaximum<T> {
    let phase = |x: T, y: T| {
        if x == T::zero() && y == T::zero() {
            T::zero()
        } else {
            FieldSetting::new(y.atan2(x)).beta
        }
    };
    PhaseMaximum { value: x1.hypot(y1) + x2.hypot(y2), beta: phase(x1, y1), beta_prime: phase(x2, y2) }
}

impl<T: Real> PhaseCoefficients<T> {
    pub fn maximize(&self) -> PhaseMaximum<T> {
        max_over_phases(self.x1, self.y1, self.x2, self.y2)
    }

    pub fn evaluate(&self, beta: T, beta_prime: T) -> T {
        self.x1 * beta.cos() + self.y1 * beta.sin() + self.x2 * beta_prime.cos() + self.y2 * beta_prime.sin()
    }
}

impl<T: Real> ScaledChshPoint<T> {
    /// Maps two atomic settings at time `t` into scaled coordinates, with
    /// `d` and `kappa0` taken from `cfg`.
    pub fn from_settings(cfg: &SystemConfig<T>, t: T, a: AtomSetting<T>, a_prime: AtomSetting<T>) -> Self {
        let s2a = T::SQRT_2() * cfg.alpha_over_l;
        let x = |p: PhasePoint<T>| (p.z + cfg.z0_over_l - cfg.drift(p.k, t)) / s2a;
        let kappa = |p: PhasePoint<T>| s2a * (p.k - cfg.k0_scaled) * cfg.scale_product;
        Self {
            x: x(a.pt),
            x_prime: x(a_prime.pt),
            kappa: kappa(a.pt),
            kappa_prime: kappa(a_prime.pt),
            d: cfg.scaled_half_separation(),
            kappa0: cfg.scaled_kappa0(),
        }
    }

    /// Inverse of [`Self::from_settings`]. Only `x`, `kappa` and their primed
    /// partners are used; `d` and `kappa0` are implied by `cfg`.
    pub fn to_settings(&self, cfg: &SystemConfig<T>, t: T) -> (AtomSetting<T>, AtomSetting<T>) {
        let s2a = T::SQRT_2() * cfg.alpha_over_l;
        let setting = |x: T, kappa: T| {
            let k = cfg.k0_scaled + kappa / (s2a * cfg.scale_product);
            AtomSetting::new(s2a * x - cfg.z0_over_l + cfg.drift(k, t), k)
        };
        (setting(self.x, self.kappa), setting(self.x_prime, self.kappa_prime))
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.x_prime, self.kappa, self.kappa_prime, self.d, self.kappa0].iter().all(|v| v.is_finite())
    }

    /// `e^{-d^2} e^{-kappa^2 - x^2} sinh(2 x d)`, written as a difference of
    /// Gaussians so large `x d` cannot overflow.
    fn lobe(x: T, kappa: T, d: T) -> T {
        let half = T::lit(0.5);
        (-(kappa * kappa)).exp() * half * ((-(x - d) * (x - d)).exp() - (-(x + d) * (x + d)).exp())
    }

    fn fringe(x: T, kappa: T, d: T, kappa0: T) -> T {
        (-(kappa * kappa) - x * x).exp() * (T::lit(2.0) * d * (kappa - kappa0)).sin()
    }

    /// Atomic terms `(C, S)` of both settings in scaled form.
    pub fn atom_terms(&self) -> ((T, T), (T, T)) {
        let c = -Self::lobe(self.x, self.kappa, self.d);
        let s = Self::fringe(self.x, self.kappa, self.d, self.kappa0);
        let cp = -Self::lobe(self.x_prime, self.kappa_prime, self.d);
        let sp = Self::fringe(self.x_prime, self.kappa_prime, self.d, self.kappa0);
        ((c, s), (cp, sp))
    }

    pub fn coefficients(&self) -> PhaseCoefficients<T> {
        let (a, ap) = self.atom_terms();
        phase_coefficients(a, ap)
    }
}

/// Phase-maximized CHSH sum `B'` in scaled coordinates.
pub fn chsh_max_closed_form<T: Real>(p: &ScaledChshPoint<T>) -> T {
    let h = ScaledChshPoint::lobe(p.x, p.kappa, p.d);
    let hp = ScaledChshPoint::lobe(p.x_prime, p.kappa_prime, p.d);
    let s = ScaledChshPoint::fringe(p.x, p.kappa, p.d, p.kappa0);
    let sp = ScaledChshPoint::fringe(p.x_prime, p.kappa_prime, p.d, p.kappa0);
    (h + hp).hypot(s + sp) + (h - hp).hypot(s - sp)
}

/// Direct operator form of one correlation for a state stored as its
/// `|e,0>` and `|g,1>` components: `2 Re[e^{-i beta} <psi_g1| W |psi_e0>]`.
pub fn correlation_from_cross<T: Real>(g1_w_e0: Complex<T>, b: FieldSetting<T>) -> T {
    let rot = Complex::from_polar(T::one(), -b.beta);
    (rot * g1_w_e0).re * T::lit(2.0)
}
