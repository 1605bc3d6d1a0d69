//! Brute-force reference: split-step propagation of both dressed branches
//! through the square well and direct operator expectations on the
//! resulting two-component state.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::chsh::{correlation_from_cross, AtomSetting, FieldSetting};
use crate::error::{Error, Result};
pub use crate::grid::Grid;
use crate::model::{BranchSign, SystemConfig};
use crate::real::Real;
use crate::wigner::{CrossWigner, SampledWave};

/// Probability allowed in the outer grid bands during propagation.
pub const EDGE_MASS_LIMIT: f64 = 1e-6;
/// Steps between boundary checks.
const CHECK_EVERY: usize = 16;
/// Largest tolerated relative change of the norm over a propagation.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Sampled potential in units of `hbar gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
}

impl<T: Real> Potential<T> {
    /// `+-u(z)` for the square well `u(z) = Theta(1 - |z|)`; samples that
    /// land on an edge get half height.
    pub fn square_well(grid: Grid<T>, branch: BranchSign) -> Self {
        let s = branch.sign::<T>();
        let tol = grid.spacing() * T::lit(1e-9);
        Self::from_fn(grid, |z| {
            let r = z.abs() - T::one();
            if r.abs() <= tol {
                s * T::lit(0.5)
            } else if r < T::zero() {
                s
            } else {
                T::zero()
            }
        })
    }

    pub fn constant(grid: Grid<T>, v: T) -> Self {
        Self { grid, values: vec![v; grid.n_points] }
    }

    pub fn zero(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn from_fn<F: Fn(T) -> T>(grid: Grid<T>, f: F) -> Self {
        Self { grid, values: grid.points().map(f).collect() }
    }
}

/// Outcome of one propagation.
#[derive(Debug, Clone)]
pub struct Propagation<T> {
    pub wave: SampledWave<T>,
    pub steps: usize,
    pub dt: T,
    /// `| |psi(t)|^2 / |psi(0)|^2 - 1 |`.
    pub norm_drift: T,
    /// Largest in-band probability seen in the outer grid bands.
    pub max_edge_mass: T,
    /// Probability above the band limit at `t_final`.
    pub out_of_band: T,
}

/// Strang splitting: half potential step, exact kinetic step in Fourier
/// space, half potential step. The Hamiltonian in scaled units is
/// `k^2 + V(z)` with `k` in units of `sqrt(2 m gamma / hbar)`.
pub struct SplitStep<T: Real> {
    grid: Grid<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    kinetic: Vec<Complex<T>>,
    half_potential: Vec<Complex<T>>,
    dt: T,
}

impl<T: Real> SplitStep<T> {
    pub fn new(pot: &Potential<T>, scale_product: T, dt: T) -> Self {
        let grid = pot.grid;
        let n = grid.n_points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let length = grid.z_max - grid.z_min;
        let inv_n = T::one() / T::from_usize(n).unwrap();
        let kinetic = (0..n)
            .map(|p| {
                let p = if p < n / 2 { p as f64 } else { p as f64 - n as f64 };
                let k = T::lit(2.0) * T::PI() * T::lit(p) / length / scale_product;
                // Folds the 1/n of the unnormalized inverse transform in.
                Complex::from_polar(inv_n, -k * k * dt)
            })
            .collect();
        let half_potential = pot.values.iter().map(|v| Complex::from_polar(T::one(), -*v * dt / T::lit(2.0))).collect();
        Self { grid, forward, inverse, kinetic, half_potential, dt }
    }

    pub fn step(&self, psi: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        for (v, p) in psi.iter_mut().zip(&self.half_potential) {
            *v = *v * p;
        }
        self.forward.process_with_scratch(psi, scratch);
        for (v, k) in psi.iter_mut().zip(&self.kinetic) {
            *v = *v * k;
        }
        self.inverse.process_with_scratch(psi, scratch);
        for (v, p) in psi.iter_mut().zip(&self.half_potential) {
            *v = *v * p;
        }
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Splits `psi` at wave number `k_cut` (inverse `L`) and returns the
    /// in-band probability of the outer grid bands and the total
    /// out-of-band probability.
    pub fn band_split(&self, psi: &[Complex<T>], k_cut: T, scratch: &mut [Complex<T>]) -> (T, T) {
        let n = psi.len();
        let h = self.grid.spacing();
        let length = self.grid.z_max - self.grid.z_min;
        let mut spec = psi.to_vec();
        self.forward.process_with_scratch(&mut spec, scratch);
        let inv_n = T::one() / T::from_usize(n).unwrap();
        let mut out = T::zero();
        for (p, c) in spec.iter_mut().enumerate() {
            let p = if p < n / 2 { p as f64 } else { p as f64 - n as f64 };
            let k = T::lit(2.0) * T::PI() * T::lit(p).abs() / length;
            if k > k_cut {
                out = out + c.norm_sqr();
                *c = Complex::new(T::zero(), T::zero());
            } else {
                *c = *c * inv_n;
            }
        }
        self.inverse.process_with_scratch(&mut spec, scratch);
        let edge = SampledWave::new(self.grid, spec).edge_mass();
        // Parseval: sum |psi_j|^2 h = (h/n) sum |c_p|^2.
        (edge, out * h * inv_n)
    }

    pub fn grid(&self) -> Grid<T> {
        self.grid
    }
}

/// Propagates `initial` to `t_final` in `pot`. The step is `t_final / n` for
/// the smallest `n` with `t_final / n <= dt`.
///
/// The boundary check only counts wave numbers up to `k_cut` (inverse `L`).
/// Strang splitting at the well's discontinuities leaks a small amount of
/// probability into wave numbers near the grid Nyquist; those components
/// wrap around the periodic grid and would otherwise be mistaken for a
/// packet reaching the boundary. Their total is reported as `out_of_band`.
pub fn split_step_propagate<T: Real>(
    initial: &SampledWave<T>,
    pot: &Potential<T>,
    scale_product: T,
    t_final: T,
    dt: T,
    k_cut: T,
) -> Result<Propagation<T>> {
    if initial.grid != pot.grid {
        return Err(Error::InvalidGrid("wave and potential live on different grids".into()));
    }
    if !(dt > T::zero() && t_final >= T::zero() && dt.is_finite() && t_final.is_finite()) {
        return Err(Error::InvalidGrid(format!("need dt > 0 and t >= 0, got dt = {dt}, t = {t_final}")));
    }
    let steps = (t_final / dt).ceil().to_usize().unwrap_or(0);
    let dt = if steps == 0 { dt } else { t_final / T::from_usize(steps).unwrap() };
    let stepper = SplitStep::new(pot, scale_product, dt);

    let mut wave = initial.clone();
    let norm0 = wave.norm_sqr();
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); stepper.forward.get_inplace_scratch_len().max(stepper.inverse.get_inplace_scratch_len())];
    let limit = T::lit(EDGE_MASS_LIMIT);
    let (mut max_edge_mass, mut out_of_band) = stepper.band_split(&wave.values, k_cut, &mut scratch);
    for i in 1..=steps {
        stepper.step(&mut wave.values, &mut scratch);
        if i % CHECK_EVERY == 0 || i == steps {
            let (edge, out) = stepper.band_split(&wave.values, k_cut, &mut scratch);
            max_edge_mass = max_edge_mass.max(edge);
            out_of_band = out;
            if edge > limit {
                return Err(Error::Truncated { mass: edge.to_f64_lossy(), limit: EDGE_MASS_LIMIT });
            }
        }
    }
    let norm_drift = (wave.norm_sqr() / norm0 - T::one()).abs();
    if norm_drift > T::lit(NORM_DRIFT_LIMIT) {
        return Err(Error::NormDrift { drift: norm_drift.to_f64_lossy(), limit: NORM_DRIFT_LIMIT });
    }
    Ok(Propagation { wave, steps, dt, norm_drift, max_edge_mass, out_of_band })
}

/// `wave` with all Fourier components above `k_cut` (inverse `L`) removed.
pub fn band_limited<T: Real>(wave: &SampledWave<T>, k_cut: T) -> SampledWave<T> {
    let n = wave.values.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let length = wave.grid.z_max - wave.grid.z_min;
    let inv_n = T::one() / T::from_usize(n).unwrap();
    let mut spec = wave.values.clone();
    forward.process(&mut spec);
    for (p, c) in spec.iter_mut().enumerate() {
        let p = if p < n / 2 { p as f64 } else { p as f64 - n as f64 };
        let k = T::lit(2.0) * T::PI() * T::lit(p).abs() / length;
        *c = if k > k_cut { Complex::new(T::zero(), T::zero()) } else { *c * inv_n };
    }
    inverse.process(&mut spec);
    SampledWave::new(wave.grid, spec)
}

/// Default step: at most 0.1 rad of potential phase and `pi/4` of kinetic
/// phase at the largest wave number the packet carries.
pub fn default_time_step<T: Real>(cfg: &SystemConfig<T>) -> T {
    let k_max = Grid::max_wave_number(cfg) / cfg.scale_product;
    T::lit(0.1).min(T::FRAC_PI_4() / (k_max * k_max))
}

/// Both dressed branches, i.e. the coefficients of `|1,+>` and `|1,->`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState<T> {
    pub branch_plus: SampledWave<T>,
    pub branch_minus: SampledWave<T>,
}

impl<T: Real> GridState<T> {
    /// Samples the analytic post-cavity branches.
    pub fn from_analytic(cfg: &SystemConfig<T>, t: T, grid: Grid<T>) -> Result<Self> {
        Ok(Self {
            branch_plus: SampledWave::branch(cfg, t, BranchSign::Plus, grid)?,
            branch_minus: SampledWave::branch(cfg, t, BranchSign::Minus, grid)?,
        })
    }

    /// `1/2 (|Phi+|^2 + |Phi-|^2)`.
    pub fn norm(&self) -> T {
        (self.branch_plus.norm_sqr() + self.branch_minus.norm_sqr()) / T::lit(2.0)
    }

    pub fn branch(&self, b: BranchSign) -> &SampledWave<T> {
        match b {
            BranchSign::Plus => &self.branch_plus,
            BranchSign::Minus => &self.branch_minus,
        }
    }

    /// Components `(psi_e0, psi_g1) = 1/2 (Phi+ + Phi-, Phi+ - Phi-)`.
    pub fn bare_components(&self) -> (SampledWave<T>, SampledWave<T>) {
        let half = T::lit(0.5);
        let e0 = self.branch_plus.zip_with(&self.branch_minus, |p, m| (p + m) * half);
        let g1 = self.branch_plus.zip_with(&self.branch_minus, |p, m| (p - m) * half);
        (e0, g1)
    }
}

/// Evaluates `<Psi| A(z,k) B(beta) |Psi>` on a [`GridState`] by quadrature.
pub struct StateCorrelator<T: Real> {
    cross: CrossWigner<T>,
    scale_product: T,
}

impl<T: Real> StateCorrelator<T> {
    pub fn new(state: &GridState<T>, scale_product: T) -> Result<Self> {
        let (e0, g1) = state.bare_components();
        Ok(Self { cross: CrossWigner::new(&g1, &e0)?, scale_product })
    }

    /// `sigma (x) B(beta)` flips `|e,0> <-> |g,1>` with phases `e^{-+ i beta}`,
    /// so the expectation is `2 Re[e^{-i beta} <psi_g1| W(z,k) |psi_e0>]`.
    pub fn expectation(&self, a: AtomSetting<T>, b: FieldSetting<T>) -> T {
        correlation_from_cross(self.cross.eval(a.pt, self.scale_product), b)
    }
}

pub fn expectation_ab<T: Real>(state: &GridState<T>, a: AtomSetting<T>, b: FieldSetting<T>, scale_product: T) -> Result<T> {
    Ok(StateCorrelator::new(state, scale_product)?.expectation(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OracleOptions<T> {
    /// Time step; `None` uses [`default_time_step`].
    pub dt: Option<T>,
    /// `false` switches the cavity off (both branches propagate freely).
    pub uncoupled: bool,
}

#[derive(Debug, Clone)]
pub struct Evolution<T> {
    pub state: GridState<T>,
    pub plus: PropagationStats<T>,
    pub minus: PropagationStats<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationStats<T> {
    pub steps: usize,
    pub dt: T,
    pub norm_drift: T,
    pub max_edge_mass: T,
    pub out_of_band: T,
}

impl<T: Real> From<&Propagation<T>> for PropagationStats<T> {
    fn from(p: &Propagation<T>) -> Self {
        Self {
            steps: p.steps,
            dt: p.dt,
            norm_drift: p.norm_drift,
            max_edge_mass: p.max_edge_mass,
            out_of_band: p.out_of_band,
        }
    }
}

/// Propagates the initial packet separately in `+u` and `-u` from `0` to `t`.
pub fn evolve_full_state<T: Real>(cfg: &SystemConfig<T>, t: T, grid: Grid<T>, opts: OracleOptions<T>) -> Result<Evolution<T>> {
    cfg.validate()?;
    grid.check_resolution(cfg)?;
    let initial = SampledWave::from_fn(grid, |z| cfg.initial_amplitude(z));
    initial.check_support()?;
    let dt = opts.dt.unwrap_or_else(|| default_time_step(cfg));
    let k_cut = Grid::max_wave_number(cfg);
    let run = |b: BranchSign| {
        let pot = if opts.uncoupled { Potential::zero(grid) } else { Potential::square_well(grid, b) };
        split_step_propagate(&initial, &pot, cfg.scale_product, t, dt, k_cut)
    };
    let plus = run(BranchSign::Plus)?;
    let minus = run(BranchSign::Minus)?;
    Ok(Evolution {
        plus: (&plus).into(),
        minus: (&minus).into(),
        state: GridState { branch_plus: plus.wave, branch_minus: minus.wave },
    })
}

/// Location of the largest `|psi|^2` sample, refined by a parabola through
/// its neighbours.
pub fn density_peak<T: Real>(wave: &SampledWave<T>) -> T {
    let rho: Vec<T> = wave.values.iter().map(|v| v.norm_sqr()).collect();
    let (j, _) = rho
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bj, bv), (j, v)| if *v > bv { (j, *v) } else { (bj, bv) });
    let z = wave.grid.point(j);
    if j == 0 || j + 1 == rho.len() {
        return z;
    }
    let (l, c, r) = (rho[j - 1], rho[j], rho[j + 1]);
    let den = l - T::lit(2.0) * c + r;
    if den == T::zero() {
        return z;
    }
    z + wave.grid.spacing() * (l - r) / (T::lit(2.0) * den)
}

/// Propagated branches against the analytic ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchComparison<T> {
    /// `|<Phi_analytic|Phi_numeric>|^2` for plus, minus.
    pub fidelity: [T; 2],
    /// `||Phi_analytic - Phi_numeric||` for plus, minus.
    pub l2_error: [T; 2],
    pub numeric_centers: [T; 2],
    pub numeric_separation: T,
    pub analytic_separation: T,
}

impl<T: Real> BranchComparison<T> {
    pub fn min_fidelity(&self) -> T {
        self.fidelity[0].min(self.fidelity[1])
    }
}

/// Compares a propagated state with the analytic branches (or, when
/// `uncoupled`, with the freely evolved initial packet). The numeric branches
/// are first restricted to wave numbers up to [`Grid::max_wave_number`],
/// which removes the splitting residue described at [`split_step_propagate`].
pub fn compare_with_analytic<T: Real>(cfg: &SystemConfig<T>, t: T, state: &GridState<T>, uncoupled: bool) -> Result<BranchComparison<T>> {
    let grid = state.branch_plus.grid;
    let reference = |b: BranchSign| -> Result<SampledWave<T>> {
        if uncoupled {
            Ok(SampledWave::from_fn(grid, |z| cfg.free_amplitude(z, t)))
        } else {
            SampledWave::branch(cfg, t, b, grid)
        }
    };
    let mut fidelity = [T::zero(); 2];
    let mut l2_error = [T::zero(); 2];
    let mut numeric_centers = [T::zero(); 2];
    for (i, b) in BranchSign::BOTH.into_iter().enumerate() {
        let analytic = reference(b)?;
        let numeric = &band_limited(state.branch(b), Grid::max_wave_number(cfg));
        fidelity[i] = analytic.inner(numeric).norm_sqr();
        l2_error[i] = analytic.zip_with(numeric, |a, n| a - n).norm_sqr().sqrt();
        numeric_centers[i] = density_peak(numeric);
    }
    let analytic_separation = if uncoupled { T::zero() } else { cfg.separation() };
    Ok(BranchComparison {
        fidelity,
        l2_error,
        numeric_centers,
        numeric_separation: numeric_centers[1] - numeric_centers[0],
        analytic_separation,
    })
}
