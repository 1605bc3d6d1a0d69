//! The scan and optimization commands as plain functions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2, TAU};

use catbell::chsh::{chsh_sum, ChshSetting};
use catbell::optimize::optimize_chsh;
use catbell::wigner::cat_quasiprobability;
use catbell::{AtomSetting, ChshBounds, FieldSetting, PhasePoint, SearchMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::parse::Range;
use crate::table::{format_sig, Table};

/// Default window: both packets plus five density widths in `z`, five
/// momentum widths in `k`, 200 points each.
pub fn default_map_ranges(cfg: &RunConfig) -> (Range, Range) {
    let s = &cfg.system;
    let t = s.gamma_t;
    let c = s.free_center(t);
    let hz = s.separation() / 2.0 + 5.0 * s.density_width(t);
    let hk = 5.0 / (2.0 * s.alpha_over_l * s.scale_product);
    (
        Range::new(cfg.from_half_width(c - hz), cfg.from_half_width(c + hz), 200),
        Range::new(s.k0_scaled - hk, s.k0_scaled + hk, 200),
    )
}

/// `(z, k, value)` of the cat surface, row-major with `z` outer. `z` is in
/// file units.
pub fn wigner_map(cfg: &RunConfig, beta: f64, z: Range, k: Range) -> Result<Table, CliError> {
    let s = &cfg.system;
    let t = s.gamma_t;
    s.check_after_transit(t)?;
    let ks = k.values();
    let rows: Vec<Vec<Vec<f64>>> = z
        .values()
        .into_par_iter()
        .map(|zf| {
            let zc = cfg.to_half_width(zf);
            ks.iter()
                .map(|&kk| Ok(vec![zf, kk, cat_quasiprobability(s, PhasePoint::new(zc, kk), t, beta)?]))
                .collect::<Result<Vec<_>, catbell::Error>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(Table { header: vec!["z", "k", "value"], rows: rows.into_iter().flatten().collect(), trailer: vec![] })
}

/// Fixed first setting and phase of a CHSH scan; `z` in file units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanFix {
    pub z: f64,
    pub k: f64,
    pub k_prime: f64,
    pub beta: f64,
}

impl ScanFix {
    /// Defaults: `z` at the packet centre, `k = k' = k0`, `beta = pi/2`;
    /// `assign` overrides them by name.
    pub fn from_assignments(cfg: &RunConfig, assign: &[(String, f64)]) -> Result<Self, CliError> {
        let s = &cfg.system;
        let mut fix = ScanFix {
            z: cfg.from_half_width(s.free_center(s.gamma_t)),
            k: s.k0_scaled,
            k_prime: s.k0_scaled,
            beta: FRAC_PI_2,
        };
        for (key, v) in assign {
            match key.as_str() {
                "z" => fix.z = *v,
                "k" => fix.k = *v,
                "k_prime" | "kp" => fix.k_prime = *v,
                "beta" => fix.beta = *v,
                other => return Err(CliError::Usage(format!("unknown --fix key {other:?} (use z, k, k_prime, beta)"))),
            }
        }
        Ok(fix)
    }
}

pub fn default_scan_ranges(cfg: &RunConfig) -> (Range, Range) {
    let s = &cfg.system;
    let t = s.gamma_t;
    let c = s.free_center(t);
    let hz = s.separation() / 2.0 + 3.0 * s.density_width(t);
    (Range::new(cfg.from_half_width(c - hz), cfg.from_half_width(c + hz), 200), Range::new(0.0, TAU, 200))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanExtreme {
    pub value: f64,
    pub z_prime: f64,
    pub beta_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub max: ScanExtreme,
    pub min: ScanExtreme,
    /// Cell with the largest `|B|`.
    pub max_abs: ScanExtreme,
    /// Cells with `|B| > 2`.
    pub violating_cells: usize,
    pub cells: usize,
    pub within_tsirelson: bool,
}

pub struct Scan {
    pub table: Table,
    pub summary: ScanSummary,
}

/// `(z', beta', B, violates)` over the scan grid, row-major with `z'` outer.
/// `violates` is 1 where `|B| > 2`.
pub fn chsh_scan(cfg: &RunConfig, fix: ScanFix, zp: Range, betap: Range) -> Result<Scan, CliError> {
    let s = &cfg.system;
    let t = s.gamma_t;
    s.check_after_transit(t)?;
    let a = AtomSetting::new(cfg.to_half_width(fix.z), fix.k);
    let betas = betap.values();
    let blocks: Vec<Vec<Vec<f64>>> = zp
        .values()
        .into_par_iter()
        .map(|zf| {
            let a_prime = AtomSetting::new(cfg.to_half_width(zf), fix.k_prime);
            betas
                .iter()
                .map(|&bp| {
                    let setting =
                        ChshSetting { a, a_prime, beta: FieldSetting::new(fix.beta), beta_prime: FieldSetting::new(bp) };
                    let b = chsh_sum(s, &setting, t)?;
                    Ok(vec![zf, bp, b, if b.abs() > 2.0 { 1.0 } else { 0.0 }])
                })
                .collect::<Result<Vec<_>, catbell::Error>>()
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = blocks.into_iter().flatten().collect();

    let pick = |better: &dyn Fn(f64, f64) -> bool, key: &dyn Fn(f64) -> f64| {
        let mut best = &rows[0];
        for r in &rows {
            if better(key(r[2]), key(best[2])) {
                best = r;
            }
        }
        ScanExtreme { value: best[2], z_prime: best[0], beta_prime: best[1] }
    };
    let summary = ScanSummary {
        max: pick(&|a, b| a > b, &|v| v),
        min: pick(&|a, b| a < b, &|v| v),
        max_abs: pick(&|a, b| a > b, &|v| v.abs()),
        violating_cells: rows.iter().filter(|r| r[3] == 1.0).count(),
        cells: rows.len(),
        within_tsirelson: rows.iter().all(|r| r[2].abs() <= 2.0 * SQRT_2 + 1e-9),
    };
    let m = summary.max_abs;
    let trailer = vec![format!(
        "max_abs_b={},b_at_max_abs={},z_prime={},beta_prime={},max_b={},min_b={},violating_cells={}",
        format_sig(m.value.abs()),
        format_sig(m.value),
        format_sig(m.z_prime),
        format_sig(m.beta_prime),
        format_sig(summary.max.value),
        format_sig(summary.min.value),
        summary.violating_cells
    )];
    Ok(Scan { table: Table { header: vec!["z_prime", "beta_prime", "b_qm", "violates"], rows, trailer }, summary })
}

/// JSON shape of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeOutput {
    pub best_value: f64,
    pub x: f64,
    pub x_prime: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub d: f64,
    pub kappa0: f64,
    pub beta_star: f64,
    pub beta_prime_star: f64,
    pub starts: usize,
    pub converged: bool,
}

pub const DEFAULT_STARTS: usize = 64;

/// Returns the report even when no start converged; the caller decides the
/// exit status from `converged_starts`.
pub fn optimize(cfg: &RunConfig, mode: SearchMode, starts: usize, seed: u64) -> Result<(OptimizeOutput, usize), CliError> {
    let s = &cfg.system;
    let r = optimize_chsh(s, s.gamma_t, &ChshBounds::standard(), mode, starts, seed)?;
    let p = r.best_point;
    Ok((
        OptimizeOutput {
            best_value: r.best_value,
            x: p.x,
            x_prime: p.x_prime,
            kappa: p.kappa,
            kappa_prime: p.kappa_prime,
            d: p.d,
            kappa0: p.kappa0,
            beta_star: r.best_phases.0,
            beta_prime_star: r.best_phases.1,
            starts: r.starts,
            converged: r.converged,
        },
        r.converged_starts,
    ))
}

pub const DEFAULT_MAP_BETA: f64 = FRAC_PI_4;
