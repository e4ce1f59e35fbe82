//! Acceptance suite: one pass/fail line per criterion, exit status 1 if any
//! criterion fails.

use conic_scatter::geometry::{make_profile, tail_bounds, ArclengthChart, ProfileDoc};
use conic_scatter::jost::validate::{validate_high_energy, validate_low_energy};
use conic_scatter::jost::{bracket, connection_coefficients, jost_pair, jost_side, low_energy_basis, scattering_data, Medium, Route, Side};
use conic_scatter::kernel::statphase::{case_library, stationary_phase_check};
use conic_scatter::kernel::*;
use conic_scatter::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn hyperboloid() -> Medium {
    Medium::new(&make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 1.0)).unwrap()).unwrap()
}

fn cylinder() -> Medium {
    Medium::new(&make_profile(&ProfileDoc::new("cylinder")).unwrap()).unwrap()
}

fn c01_cylinder_exactness() -> Outcome {
    let m = cylinder();
    let (lo, hi) = m.chart.xi_range();
    let mut v_max: f64 = 0.0;
    for k in 0..=200 {
        let xi = (lo + (hi - lo) * k as f64 / 200.0).min(hi);
        v_max = v_max.max(m.chart.potential_at(xi).unwrap().1.abs()).max(m.table.v(xi).abs());
    }
    let (mut f_err, mut w_err, mut ab_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for l in log_points(1e-6, 1e2, 17) {
        let (p, n) = jost_pair(&m, l).unwrap();
        for xi in [-1e3, -7.5, 0.0, 2.0, 4e2] {
            let e = Complex64::from_polar(1.0, l * xi);
            let fp = p.pair(xi).unwrap();
            let fm = n.pair(xi).unwrap();
            f_err = f_err.max((fp[0] - e).norm()).max((fm[0] - e.conj()).norm());
        }
        let s = scattering_data(&m, l).unwrap();
        w_err = w_err.max((s.w.norm() - 2.0 * l).abs() / (2.0 * l));
        ab_err = ab_err.max(s.alpha_minus.norm()).max((s.beta_minus.norm() - 1.0).abs());
    }
    let pass = v_max <= 1e-12 && f_err <= 1e-10 && w_err <= 1e-10 && ab_err <= 1e-10;
    outcome(pass, format!("|V| {v_max:.1e}, |f± − e^{{±iλξ}}| {f_err:.1e}, ||W|/2λ − 1| {w_err:.1e}, |α−|,||β−|−1| {ab_err:.1e}"))
}

fn c02_potential_tail() -> Outcome {
    let sup = |x_max: Option<f64>| {
        let mut doc = ProfileDoc::new("hyperboloid").with_param("a", 1.0);
        doc.x_max = x_max;
        let chart = ArclengthChart::new(&make_profile(&doc).unwrap()).unwrap();
        let (_, hi) = chart.xi_range();
        tail_bounds(&chart, 10.0, hi.min(1e4)).unwrap()
    };
    let (c2a, c3a) = sup(None);
    let (c2b, c3b) = sup(Some(2.0 * conic_scatter::geometry::DEFAULT_X_MAX));
    let drift = (c3b / c3a - 1.0).abs();
    let pass = c3a.is_finite() && drift <= 0.2 && (c2a - 0.25).abs() <= 0.3 / 10.0 && (c2b - 0.25).abs() <= 0.3 / 10.0;
    outcome(pass, format!("sup|ξ³V₁| = {c3a:.6} → {c3b:.6} under doubling (drift {drift:.1e}); sup ξ²|V| = {c2a:.6}"))
}

fn c03_c04_low_energy(m: &Medium) -> (Outcome, Outcome) {
    let grid = log_points(1e-6, 1e-3, 40);
    let rep = validate_low_energy(m, &grid).unwrap();
    let get = |n: &str| rep.check(n).unwrap_or_else(|| panic!("missing check {n}"));
    let (law, slope) = (get("wronskian_law"), get("wronskian_slope"));
    let c3 = outcome(
        law.pass && slope.pass && law.threshold <= 0.05 && slope.threshold <= 0.02,
        format!("max residual {:.2e} (≤ 5e-2), slope {:.6} vs 2/π (rel {:.1e} ≤ 2e-2), c3 = {:.6}", law.worst, fitted(law, "slope"), slope.worst, rep.constants.c3_w),
    );
    let (lim, rate, deriv) = (get("b_plus_limit"), get("b_plus_rate"), get("b_plus_derivative"));
    let c4 = outcome(
        lim.pass && rate.pass && deriv.pass && lim.threshold <= 0.05 && rate.threshold >= 0.4 && deriv.threshold <= 0.10,
        format!("b+ ratio at λ=1e-6 off by {:.1e}, residual rate λ^{:.3}, derivative law {:.1e}", lim.worst, rate.worst, deriv.worst),
    );
    (c3, c4)
}

fn fitted(c: &conic_scatter::jost::validate::LawCheck, name: &str) -> f64 {
    c.fitted.iter().find(|(k, _)| k == name).map(|(_, v)| *v).unwrap_or(f64::NAN)
}

fn c05_unitarity(m: &Medium) -> Outcome {
    let mut grid = log_points(1e-6, 1e-3, 7);
    grid.extend(log_points(1.0, 100.0, 5));
    let mut worst: f64 = 0.0;
    for l in grid {
        let s = scattering_data(m, l).unwrap();
        worst = worst.max((s.beta_minus.norm_sqr() - s.alpha_minus.norm_sqr() - 1.0).abs());
    }
    outcome(worst <= 1e-5, format!("max ||β−|² − |α−|² − 1| = {worst:.2e} over λ ∈ [1e-6,1e-3] ∪ [1,100]"))
}

fn c06_high_energy(m: &Medium) -> Outcome {
    let rep = validate_high_energy(m, &log_points(1.0, 100.0, 9)).unwrap();
    let detail: Vec<String> = rep.checks.iter().map(|c| format!("{} C={:.4}{}", c.name, c.worst, if c.pass { "" } else { " FLAG" })).collect();
    outcome(rep.all_pass(), detail.join(", "))
}

fn c07_schrodinger_decay(m: &Medium) -> Outcome {
    let ts = log_points(10.0, 1e4, 13);
    let rep = decay_scan(m, KernelKind::Schrodinger, None, &ts, &default_spatial_grid()).unwrap();
    let pass = (rep.fit_alpha - 1.0).abs() <= 0.15 && rep.fit_r2 >= 0.95;
    outcome(pass, format!("α = {:.4} (1 ± 0.15), R² = {:.4} (≥ 0.95), C = {:.4}", rep.fit_alpha, rep.fit_r2, rep.fit_c))
}

/// Largest growth of a rate-normalised statistic across the last decade,
/// with each value widened by its quadrature error.
fn growth(ts: &[f64], s: &[f64], e: &[f64]) -> f64 {
    let tmax = ts.iter().cloned().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..ts.len()).filter(|&k| ts[k] >= tmax / 10.0 * (1.0 - 1e-9)).collect();
    let mut g: f64 = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let hi = (s[j] - e[j]).max(0.0);
            let lo = s[i] + e[i];
            if lo > 0.0 {
                g = g.max(hi / lo);
            }
        }
    }
    g
}

fn c08_band_bounds(m: &Medium) -> Outcome {
    let ts = log_points(1e3, 1e7, 9);
    let grid = default_spatial_grid();
    let (_, hi) = m.chart.xi_range();
    let pts = scan_points(&grid, &ts, hi);
    let engine = KernelEngine::new(m, &pts, scan_lambda_max(KernelKind::Schrodinger, Some(Band::HighEnergy), &ts, &grid, hi)).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    let wave = [KernelKind::WavePlus, KernelKind::WaveMinus];
    let mut jobs: Vec<(KernelKind, Band)> = vec![(KernelKind::Schrodinger, Band::LowLow)];
    jobs.extend(wave.map(|k| (k, Band::LowLow)));
    for b in [Band::OscOsc, Band::OscLow, Band::SameSideOsc] {
        jobs.push((KernelKind::Schrodinger, b));
        jobs.extend(wave.map(|k| (k, b)));
    }
    jobs.push((KernelKind::Schrodinger, Band::HighEnergy));
    for (kind, band) in jobs {
        let rep = decay_scan_with(&engine, kind, Some(band), &ts, &grid, hi).unwrap();
        let rate = match (kind, band) {
            (KernelKind::Schrodinger, _) | (_, Band::LowLow) => 1.0,
            _ => 0.5,
        };
        let s: Vec<f64> = rep.rows.iter().map(|r| r.sup_abs * r.t.powf(rate)).collect();
        let e: Vec<f64> = rep.rows.iter().map(|r| r.max_err * r.t.powf(rate)).collect();
        let g = growth(&ts, &s, &e);
        pass &= g <= 2.0;
        lines.push(format!("{}/{} t^{rate}: growth {g:.2}", kind.name(), band.name()));
    }
    // φ-smeared high-energy wave kernel; bumps at 0 and translated by −50
    let xis = [-10.0, 0.0, 10.0, 100.0];
    let bumps = [TestFunction::bump(0.0, 1.0, 81), TestFunction::bump(-50.0, 1.0, 81)];
    let mut spts: Vec<f64> = xis.to_vec();
    for phi in &bumps {
        for &xi in &xis {
            spts.extend(smear_nodes(phi, xi).into_iter().map(|(x, _)| x));
        }
    }
    let se = KernelEngine::new(m, &spts, 40.0).unwrap();
    for kind in wave {
        let mut consts = Vec::new();
        for phi in &bumps {
            let mut s = vec![0.0; ts.len()];
            let mut e = vec![0.0; ts.len()];
            for (k, &t) in ts.iter().enumerate() {
                for &xi in &xis {
                    let r = se.wave_smeared(kind, xi, t, phi).unwrap();
                    if r.ratio > s[k] {
                        s[k] = r.ratio;
                        e[k] = r.err_est * t.sqrt() / r.norm;
                    }
                }
            }
            let g = growth(&ts, &s, &e);
            pass &= g <= 2.0;
            consts.push(s.iter().cloned().fold(0.0, f64::max));
            lines.push(format!("{}/smeared t^0.5: growth {g:.2}", kind.name()));
        }
        let shift = consts[1].max(consts[0]) / consts[1].min(consts[0]);
        pass &= shift <= 2.0 || consts[0].max(consts[1]) < 1e-6;
        lines.push(format!("{}/smeared translation ratio {shift:.2}", kind.name()));
    }
    outcome(pass, lines.join("; "))
}

fn c09_stationary_phase() -> Outcome {
    let mut c_sp: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let results: Vec<_> = case_library().into_iter().map(|c| stationary_phase_check(&c).unwrap()).collect();
    for r in &results {
        if r.rhs > 0.0 {
            c_sp = c_sp.max(r.lhs / r.rhs);
        }
        if let Some(e) = r.oracle_error {
            oracle = oracle.max(e);
        }
    }
    let bounded = results.iter().all(|r| r.lhs <= c_sp * r.rhs * (1.0 + 1e-12));
    let pass = results.len() == 12 && bounded && c_sp <= conic_scatter::cli::C_SP_CAP && oracle <= 1e-6;
    outcome(pass, format!("C_sp = {c_sp:.4} over 12 cases (cap {}), worst oracle error {oracle:.1e}", conic_scatter::cli::C_SP_CAP))
}

fn c10_pipeline_overlap(m: &Medium) -> Outcome {
    let mut overlap: f64 = 0.0;
    for l in log_points(1e-3, 1e-2, 5) {
        let osc = jost_side(m, Side::Plus, l, Route::Oscillatory).unwrap();
        let hank = jost_side(m, Side::Plus, l, Route::HankelReference).unwrap();
        let hank_minus = jost_side(m, Side::Minus, l, Route::HankelReference).unwrap();
        let basis = low_energy_basis(m, l).unwrap();
        let c = connection_coefficients(&hank, &hank_minus, &basis).unwrap();
        for k in 0..=8 {
            let xi = (2.0 + 2.0 * k as f64 / 8.0) / l;
            let u = basis.eval(xi).unwrap();
            let rep = c.a_plus * u[0][0] + c.b_plus * u[1][0];
            let f = osc.pair(xi).unwrap()[0];
            overlap = overlap.max((rep - f).norm() / f.norm());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut cases = Vec::new();
    for _ in 0..20 {
        let t = 10f64.powf(rng.gen_range(1.0..4.0));
        let a = rng.gen_range(-1000.0..1000.0f64).round();
        let b = rng.gen_range(-1000.0..1000.0f64).round();
        cases.push((t, a, b));
    }
    let pts: Vec<f64> = cases.iter().flat_map(|c| [c.1, c.2]).collect();
    let lmax = cases.iter().map(|c| KernelEngine::lambda_max_for(KernelKind::Schrodinger, c.0, &[(c.1, c.2)])).fold(0.0, f64::max);
    let e = KernelEngine::new(m, &pts, lmax).unwrap();
    let mut part: f64 = 0.0;
    for &(t, a, b) in &cases {
        let full = e.evolution_kernel(KernelKind::Schrodinger, t, a, b).unwrap().value;
        let sum: Complex64 = Band::partition_for(a, b).iter().map(|bd| e.band_kernel(KernelKind::Schrodinger, *bd, t, a, b).unwrap().value).sum();
        part = part.max((sum - full).norm() / full.norm());
    }
    let w_check = {
        let (p, n) = jost_pair(m, 3e-3).unwrap();
        (bracket(p.pair(5.0).unwrap(), n.pair(5.0).unwrap()) - bracket(p.pair(-50.0).unwrap(), n.pair(-50.0).unwrap())).norm()
    };
    outcome(overlap <= 1e-4 && part <= 1e-5, format!("overlap annulus rel {overlap:.1e} (≤ 1e-4), band partition rel {part:.1e} (≤ 1e-5), W drift {w_check:.0e}"))
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        println!("criterion {n:>2} [{}] {name} ({:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, t0.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "cylinder exactness", &mut c01_cylinder_exactness);
    report(2, "potential tail", &mut c02_potential_tail);
    let m = hyperboloid();
    let mut low = None;
    report(3, "low-energy Wronskian law", &mut || {
        let (a, b) = c03_c04_low_energy(&m);
        low = Some(b);
        a
    });
    report(4, "coefficient asymptotics", &mut || low.take().unwrap());
    report(5, "unitarity", &mut || c05_unitarity(&m));
    report(6, "high-energy bounds", &mut || c06_high_energy(&m));
    report(7, "Schrödinger decay", &mut || c07_schrodinger_decay(&m));
    report(8, "per-band bounds", &mut || c08_band_bounds(&m));
    report(9, "stationary-phase majorant", &mut c09_stationary_phase);
    report(10, "pipeline overlap", &mut || c10_pipeline_overlap(&m));
    println!("acceptance: {} of 10 criteria passed in {:.0}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
