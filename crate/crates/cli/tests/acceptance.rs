//! Acceptance suite. Runs every criterion in sequence, prints one line per
//! criterion and exits non-zero if any of them fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use catbell::chsh::{chsh_max_closed_form, chsh_sum, setting_coefficients, ChshSetting};
use catbell::oracle::{compare_with_analytic, evolve_full_state, OracleOptions};
use catbell::wigner::{wigner_branch, wigner_interference};
use catbell::{AtomSetting, BranchSign, FieldSetting, Grid, GridState, PhasePoint, ScaledChshPoint, SearchMode, SystemConfig};
use catbell_cli::commands::{self, ScanFix};
use catbell_cli::parse::Range;
use catbell_cli::verify::correlation_deviation;
use catbell_cli::RunConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    RunConfig::load(&path).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn random_config<R: Rng>(rng: &mut R) -> SystemConfig {
    let alpha = rng.gen_range(0.02..0.15);
    let cfg =
        SystemConfig::new(rng.gen_range(80.0..3000.0), 1.0 + 3.0 * alpha + rng.gen_range(0.1..1.5), alpha, rng.gen_range(1.5..4.0), 1.0)
            .unwrap();
    SystemConfig { gamma_t: cfg.transit_time() * rng.gen_range(1.0..3.0), ..cfg }
}

fn random_setting<R: Rng>(rng: &mut R, s: &SystemConfig) -> AtomSetting {
    let t = s.gamma_t;
    let hz = s.separation() / 2.0 + 4.0 * s.density_width(t);
    let hk = 4.0 / (2.0 * s.alpha_over_l * s.scale_product);
    AtomSetting::new(s.free_center(t) + rng.gen_range(-hz..hz), s.k0_scaled + rng.gen_range(-hk..hk))
}

fn chsh_maximum() -> Outcome {
    let (r, _) = commands::optimize(&config("bell.json"), SearchMode::Design, commands::DEFAULT_STARTS, 1).unwrap();
    let odd = r.kappa0 * 4.0 * r.d / PI;
    let nearest = (((odd - 1.0) / 2.0).round() * 2.0 + 1.0).max(1.0);
    let passed = (r.best_value - 2.324).abs() <= 1e-3
        && r.kappa.abs() <= 1e-3
        && r.kappa_prime.abs() <= 1e-3
        && (r.x - 0.371).abs() <= 5e-3
        && (-r.x_prime - 0.371).abs() <= 5e-3
        && (r.d - 0.741).abs() <= 5e-3
        && (odd - nearest).abs() <= 1e-3;
    Outcome {
        passed,
        detail: format!(
            "B = {:.6}, x = {:.5}, x' = {:.5}, kappa = {:.1e}, kappa' = {:.1e}, d = {:.5}, kappa0*4d/pi = {:.6}",
            r.best_value, r.x, r.x_prime, r.kappa, r.kappa_prime, r.d, odd
        ),
    }
}

fn bell_scan() -> Outcome {
    let cfg = config("bell.json");
    let fix = ScanFix::from_assignments(&cfg, &[("z".into(), 0.24), ("beta".into(), FRAC_PI_2)]).unwrap();
    let scan = commands::chsh_scan(&cfg, fix, Range::new(0.0, 0.4, 200), Range::new(0.0, TAU, 200)).unwrap();
    let s = &scan.summary;
    let m = s.max_abs;
    let passed = s.violating_cells > 0 && (m.value.abs() - 2.324).abs() <= 2e-3 && s.within_tsirelson;
    Outcome {
        passed,
        detail: format!(
            "max |B| = {:.5} (B = {:.5}) at z' = {:.4}, beta' = {:.4}; {} of {} cells with |B| > 2",
            m.value.abs(),
            m.value,
            m.z_prime,
            m.beta_prime,
            s.violating_cells,
            s.cells
        ),
    }
}

/// Parabolic refinement of an extremum at index `j` of samples `v` on `x`.
fn refine(x: &[f64], v: &[f64], j: usize) -> f64 {
    if j == 0 || j + 1 == v.len() {
        return x[j];
    }
    let den = v[j - 1] - 2.0 * v[j] + v[j + 1];
    if den == 0.0 {
        return x[j];
    }
    x[j] + (x[1] - x[0]) * (v[j - 1] - v[j + 1]) / (2.0 * den)
}

fn cat_map_lobes() -> Outcome {
    let cfg = config("cat_map.json");
    let s = cfg.system;
    let z = Range::new(1.0, 2.5, 200);
    let k = Range::new(2.05, 2.57, 200);
    let table = commands::wigner_map(&cfg, FRAC_PI_4, z, k).unwrap();
    let (zs, ks) = (z.values(), k.values());
    let value = |i: usize, j: usize| table.rows[i * ks.len() + j][2];

    // Lobes along the row closest to k0.
    let j0 = (0..ks.len()).min_by(|&a, &b| (ks[a] - s.k0_scaled).abs().total_cmp(&(ks[b] - s.k0_scaled).abs())).unwrap();
    let row: Vec<f64> = (0..zs.len()).map(|i| value(i, j0)).collect();
    let imax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
    let imin = (0..row.len()).min_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
    let separation = (refine(&zs, &row, imin) - refine(&zs, &row, imax)).abs();
    let opposite = row[imax] > 0.1 && row[imin] < -0.1;

    // Fringes: summing over z cancels the lobes and leaves the interference
    // term's oscillation in k.
    let sums: Vec<f64> = (0..ks.len()).map(|j| (0..zs.len()).map(|i| value(i, j)).sum()).collect();
    let peak = sums.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut crossings = Vec::new();
    for j in 0..ks.len() - 1 {
        let (a, b) = (sums[j], sums[j + 1]);
        if a.signum() != b.signum() && a.abs().max(b.abs()) > 1e-6 * peak {
            crossings.push(ks[j] + (ks[j + 1] - ks[j]) * a / (a - b));
        }
    }
    let period = if crossings.len() >= 2 {
        2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
    } else {
        f64::NAN
    };
    let expected = TAU / (s.separation() * s.scale_product);
    let rel = (period - expected).abs() / expected;
    Outcome {
        passed: opposite && (separation - 0.375).abs() <= 0.01 && rel <= 0.05,
        detail: format!(
            "lobes {:+.3} / {:+.3}, separation {:.5} L; fringe period {:.5} vs 2pi/D = {:.5} ({:.2}%, {} zero crossings)",
            row[imax],
            row[imin],
            separation,
            period,
            expected,
            100.0 * rel,
            crossings.len()
        ),
    }
}

fn tsirelson() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bound = 2.0 * SQRT_2 + 1e-9;
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..10 {
        let s = random_config(&mut rng);
        let t = s.gamma_t;
        for _ in 0..10_000 {
            let setting = ChshSetting {
                a: random_setting(&mut rng, &s),
                a_prime: random_setting(&mut rng, &s),
                beta: FieldSetting::new(rng.gen_range(0.0..TAU)),
                beta_prime: FieldSetting::new(rng.gen_range(0.0..TAU)),
            };
            let b = chsh_sum(&s, &setting, t).unwrap().abs();
            let best = chsh_max_closed_form(&ScaledChshPoint::from_settings(&s, t, setting.a, setting.a_prime));
            worst = worst.max(b).max(best);
            count += 1;
        }
    }
    Outcome { passed: worst <= bound, detail: format!("{count} settings, largest |B| = {worst:.6} (bound {:.6})", 2.0 * SQRT_2) }
}

struct Propagated {
    fidelity: [f64; 2],
    separation: f64,
    analytic: f64,
    spacing: f64,
    drift: [f64; 2],
}

fn propagate_cat_map() -> Propagated {
    let cfg = config("cat_map.json");
    let s = cfg.system;
    let t = s.gamma_t;
    let grid = Grid::for_propagation(&s, t, 1 << 16).unwrap();
    let ev = evolve_full_state(&s, t, grid, OracleOptions::default()).unwrap();
    let cmp = compare_with_analytic(&s, t, &ev.state, false).unwrap();
    Propagated {
        fidelity: cmp.fidelity,
        separation: cmp.numeric_separation,
        analytic: cmp.analytic_separation,
        spacing: grid.spacing(),
        drift: [ev.plus.norm_drift, ev.minus.norm_drift],
    }
}

fn oracle_wave_packets() -> Outcome {
    let p = propagate_cat_map();
    let sep_ok = (p.separation - p.analytic).abs() <= p.spacing;
    Outcome {
        passed: p.fidelity.iter().all(|f| *f > 0.999) && sep_ok,
        detail: format!(
            "fidelity + {:.6}, - {:.6} (need > 0.999); separation {:.5} vs {:.5} +- {:.1e}",
            p.fidelity[0], p.fidelity[1], p.separation, p.analytic, p.spacing
        ),
    }
}

fn oracle_correlations() -> Outcome {
    let s = config("bell.json").system;
    let t = s.gamma_t;
    let state = GridState::from_analytic(&s, t, Grid::around_branches(&s, t)).unwrap();
    let reference = |a: AtomSetting, b: FieldSetting| catbell::chsh::correlation(&s, a, b, t);
    let worst = correlation_deviation(&s, &state, 6, reference).unwrap();
    Outcome { passed: worst < 1e-5, detail: format!("50 settings on the sampled two-branch state, max |deviation| = {worst:.2e}") }
}

fn closed_form_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut form, mut attain) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let s = random_config(&mut rng);
        let t = s.gamma_t;
        let (a, ap) = (random_setting(&mut rng, &s), random_setting(&mut rng, &s));
        let m = setting_coefficients(&s, a, ap, t).unwrap().maximize();
        form = form.max((chsh_max_closed_form(&ScaledChshPoint::from_settings(&s, t, a, ap)) - m.value).abs());
        let at = ChshSetting { a, a_prime: ap, beta: FieldSetting::new(m.beta), beta_prime: FieldSetting::new(m.beta_prime) };
        attain = attain.max((chsh_sum(&s, &at, t).unwrap() - m.value).abs());
    }
    Outcome {
        passed: form <= 1e-10 && attain <= 1e-12,
        detail: format!("closed form vs phase-maximized sum {form:.1e}; attainment {attain:.1e}"),
    }
}

fn conservation() -> Outcome {
    let p = propagate_cat_map();
    let drift = p.drift[0].max(p.drift[1]);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut systems = vec![config("cat_map.json").system, config("bell.json").system];
    systems.extend((0..8).map(|_| random_config(&mut rng)));
    let mut norm_err = 0.0f64;
    let mut w_max = 0.0f64;
    for s in &systems {
        let t = s.gamma_t;
        for b in BranchSign::BOTH {
            norm_err = norm_err.max((s.branch_norm(t, b).unwrap() - 1.0).abs());
        }
        for _ in 0..2000 {
            let pt: PhasePoint = random_setting(&mut rng, s).pt;
            for b in BranchSign::BOTH {
                w_max = w_max.max(wigner_branch(s, pt, t, b).unwrap().abs());
            }
            w_max = w_max.max(wigner_interference(s, pt, t).unwrap().abs());
        }
    }
    Outcome {
        passed: drift < 1e-8 && norm_err <= 1e-8 && w_max <= 1.0,
        detail: format!("norm drift {drift:.1e}; normalization error {norm_err:.1e}; max |W| = {w_max:.6}"),
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("CHSH maximum (design mode)", Duration::from_secs(10), chsh_maximum),
        ("CHSH phase scan", Duration::from_secs(30), bell_scan),
        ("cat-state Wigner map", Duration::from_secs(10), cat_map_lobes),
        ("Tsirelson bound", Duration::from_secs(60), tsirelson),
        ("oracle wave packets", Duration::from_secs(120), oracle_wave_packets),
        ("oracle correlations", Duration::from_secs(120), oracle_correlations),
        ("closed-form self-consistency", Duration::from_secs(1), closed_form_consistency),
        ("conservation", Duration::from_secs(60), conservation),
    ];
    let mut err = std::io::stderr();
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let passed = out.passed && elapsed < *limit;
        if !passed {
            failed.push(i + 1);
        }
        let _ = writeln!(
            err,
            "acceptance {} {}: {} - {} [{:.2} s, limit {} s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            name,
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed.is_empty() {
        let _ = writeln!(err, "acceptance: all 8 criteria passed");
    } else {
        let _ = writeln!(err, "acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
