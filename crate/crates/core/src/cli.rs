//! Batch front end: executes one named pipeline for a [`RunConfig`] and
//! writes CSV artifacts (plus a text summary for validation runs).

use crate::config::{load_config, Command, RunConfig};
use crate::geometry::{fit_conical_constants, make_profile, tail_bounds};
use crate::jost::validate::{validate_high_energy, validate_low_energy, LawCheck};
use crate::jost::{jost_pair, scattering_data, Medium};
use crate::kernel::statphase::{case_library, stationary_phase_check};
use crate::kernel::{decay_scan, default_spatial_grid, scan_lambda_max, Band, KernelEngine, KernelKind, KernelSample};
use crate::{Error, Result};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Flagged,
}

impl Status {
    pub fn code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Flagged => 2,
        }
    }
}

/// Decay exponents must stay within this distance of the target.
pub const ALPHA_SLACK: f64 = 0.15;
pub const MIN_R2: f64 = 0.95;
/// Global stationary-phase constant must stay below this.
pub const C_SP_CAP: f64 = 10.0;

/// Round-trip float formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn row(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub target: String,
    pub fitted: Vec<(String, f64)>,
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl From<&LawCheck> for SummaryRow {
    fn from(c: &LawCheck) -> Self {
        SummaryRow { name: c.name.clone(), target: c.target.clone(), fitted: c.fitted.clone(), worst: c.worst, threshold: c.threshold, pass: c.pass }
    }
}

/// Per-check results of a validation suite.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub suite: String,
    pub rows: Vec<SummaryRow>,
}

impl ValidationSummary {
    pub fn new(suite: &str, rows: Vec<SummaryRow>) -> Result<Self> {
        let mut names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("check '{}' listed twice in suite {suite}", w[0])));
        }
        Ok(ValidationSummary { suite: suite.into(), rows })
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,target,fitted,worst,threshold,status\n");
        for r in &self.rows {
            let fitted: Vec<String> = r.fitted.iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
            s += &row(&[
                r.name.clone(),
                format!("\"{}\"", r.target.replace('"', "'")),
                format!("\"{}\"", fitted.join(";")),
                fmt_f64(r.worst),
                fmt_f64(r.threshold),
                if r.pass { "pass" } else { "flag" }.into(),
            ]);
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("suite {}\n", self.suite);
        for r in &self.rows {
            let _ = write!(s, "[{}] {:<32} worst {:.3e} / threshold {:.3e}   {}", if r.pass { "pass" } else { "FLAG" }, r.name, r.worst, r.threshold, r.target);
            for (k, v) in &r.fitted {
                let _ = write!(s, "  {k}={v:.6}");
            }
            s.push('\n');
        }
        let flagged = self.rows.iter().filter(|r| !r.pass).count();
        let _ = writeln!(s, "{} checks, {} flagged", self.rows.len(), flagged);
        s
    }
}

/// Files produced by a run, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub status: Status,
    pub files: Vec<(String, String)>,
    pub message: String,
}

fn medium_for(cfg: &RunConfig) -> Result<Medium> {
    let mut m = Medium::new(&make_profile(&cfg.profile)?)?;
    if let Some(tol) = cfg.tolerances.magnus_tol {
        m.magnus.tol = tol;
    }
    Ok(m)
}

fn grid_or(g: &Option<crate::config::Grid>, name: &str, default: Option<Vec<f64>>) -> Result<Vec<f64>> {
    match (g, default) {
        (Some(g), _) => Ok(g.values()),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(Error::Config(format!("command needs a '{name}' grid"))),
    }
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn describe(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let (xl, xh) = m.chart.x_range();
    let (sl, sh) = m.chart.xi_range();
    let mut s = String::new();
    let _ = writeln!(s, "profile {} (d = {})", m.profile.kind.name(), m.profile.d);
    for (k, v) in &cfg.profile.params {
        let _ = writeln!(s, "  {k} = {v}");
    }
    let _ = writeln!(s, "x range [{xl}, {xh}], arclength range [{sl}, {sh}]");
    let _ = writeln!(s, "symmetric {}, conical ends right {} left {}", m.symmetric, m.profile.conical_right, m.profile.conical_left);
    let _ = writeln!(s, "inverse-square coefficient {}", m.profile.inverse_square_coeff());
    if m.profile.conical_right {
        let fit = fit_conical_constants(&m.chart)?;
        let _ = writeln!(s, "right end: c_inf {} (residual {:.3e}), sup xi^2|V| {:.6}, sup |xi^3 V1| {:.6}", fit.c_inf, fit.fit_residual, fit.c2, fit.c3);
    }
    if let Some(c) = m.c_inf[1] {
        let _ = writeln!(s, "left end: c_inf {c}");
    }
    let _ = writeln!(s, "lambda_low {}", m.lambda_low);
    Ok(RunOutput { status: Status::Pass, files: vec![("describe.txt".into(), s.clone())], message: s })
}

fn potential(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let (lo, hi) = m.chart.xi_range();
    let xs = grid_or(&cfg.xi, "xi", Some(log_points(1.0, hi.min(-lo).min(1e4), 41)))?;
    let mut s = String::from("xi,rho,V,xi2V\n");
    for xi in xs {
        let rho = m.chart.r_of_xi(xi)?;
        let (_, v) = m.chart.potential_at(xi)?;
        s += &row(&[fmt_f64(xi), fmt_f64(rho), fmt_f64(v), fmt_f64(xi * xi * v)]);
    }
    let mut msg = String::new();
    if m.profile.conical_right && hi > 20.0 {
        let (c2, c3) = tail_bounds(&m.chart, 10.0, hi.min(1e4))?;
        msg = format!("sup xi^2|V| = {c2:.6}, sup |xi^3 V1| = {c3:.6} on [10, {:.0}]", hi.min(1e4));
    }
    Ok(RunOutput { status: Status::Pass, files: vec![("potential.csv".into(), s)], message: msg })
}

fn jost(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let lams = grid_or(&cfg.lambda, "lambda", None)?;
    let xs = grid_or(&cfg.xi, "xi", Some(vec![-10.0, -1.0, 0.0, 1.0, 10.0]))?;
    let blocks: Vec<String> = lams
        .par_iter()
        .map(|&l| -> Result<String> {
            let (p, n) = jost_pair(&m, l)?;
            let mut s = String::new();
            for &xi in &xs {
                let fp = p.pair(xi).map_err(|e| Error::Domain(format!("f+ at (λ, ξ) = ({l}, {xi}): {e}")))?;
                let fm = n.pair(xi).map_err(|e| Error::Domain(format!("f- at (λ, ξ) = ({l}, {xi}): {e}")))?;
                let mut cells = vec![fmt_f64(l), fmt_f64(xi)];
                for z in [fp[0], fp[1], fm[0], fm[1]] {
                    cells.push(fmt_f64(z.re));
                    cells.push(fmt_f64(z.im));
                }
                s += &row(&cells);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut s = String::from("lambda,xi,re_f_plus,im_f_plus,re_df_plus,im_df_plus,re_f_minus,im_f_minus,re_df_minus,im_df_minus\n");
    s.extend(blocks);
    Ok(RunOutput { status: Status::Pass, files: vec![("jost.csv".into(), s)], message: String::new() })
}

fn coeffs(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let lams = grid_or(&cfg.lambda, "lambda", None)?;
    let data = lams
        .par_iter()
        .map(|&l| scattering_data(&m, l).map_err(|e| Error::Domain(format!("λ = {l:e}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut s = String::from(
        "lambda,re_w,im_w,re_alpha_minus,im_alpha_minus,re_beta_minus,im_beta_minus,re_alpha_plus,im_alpha_plus,re_a_plus,im_a_plus,re_b_plus,im_b_plus,unitarity_residual\n",
    );
    let mut worst: f64 = 0.0;
    for d in &data {
        let mut cells = vec![fmt_f64(d.lambda)];
        for z in [d.w, d.alpha_minus, d.beta_minus, d.alpha_plus] {
            cells.push(fmt_f64(z.re));
            cells.push(fmt_f64(z.im));
        }
        match &d.connection {
            Some(c) => {
                for z in [c.a_plus, c.b_plus] {
                    cells.push(fmt_f64(z.re));
                    cells.push(fmt_f64(z.im));
                }
            }
            None => cells.extend(std::iter::repeat("nan".to_string()).take(4)),
        }
        let u = (d.beta_minus.norm_sqr() - d.alpha_minus.norm_sqr() - 1.0).abs();
        worst = worst.max(u);
        cells.push(fmt_f64(u));
        s += &row(&cells);
    }
    let status = if worst <= 1e-5 { Status::Pass } else { Status::Flagged };
    Ok(RunOutput { status, files: vec![("coeffs.csv".into(), s)], message: format!("max unitarity residual {worst:.3e}") })
}

fn summary_output(stem: &str, summary: ValidationSummary) -> RunOutput {
    let status = if summary.all_pass() { Status::Pass } else { Status::Flagged };
    let text = summary.to_text();
    RunOutput { status, files: vec![(format!("{stem}.csv"), summary.to_csv()), (format!("{stem}.txt"), text.clone())], message: text }
}

fn validate_low(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let lams = grid_or(&cfg.lambda, "lambda", Some(log_points(1e-6, 1e-3, 40)))?;
    let rep = validate_low_energy(&m, &lams)?;
    let c = &rep.constants;
    let mut rows: Vec<SummaryRow> = rep.checks.iter().map(SummaryRow::from).collect();
    rows.push(SummaryRow {
        name: "constants".into(),
        target: "fitted low-energy constants".into(),
        fitted: vec![
            ("c1".into(), c.c1),
            ("kappa".into(), c.kappa),
            ("c2".into(), c.c2),
            ("c3".into(), c.c3),
            ("c3_tilde".into(), c.c3_tilde),
            ("c4".into(), c.c4),
            ("c5".into(), c.c5),
            ("gamma0".into(), c.gamma0),
            ("gamma1".into(), c.gamma1),
        ],
        worst: 0.0,
        threshold: 0.0,
        pass: true,
    });
    Ok(summary_output("validate-low", ValidationSummary::new("validate-low", rows)?))
}

fn validate_high(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let lams = grid_or(&cfg.lambda, "lambda", Some(log_points(1.0, 100.0, 9)))?;
    let rep = validate_high_energy(&m, &lams)?;
    let rows = rep.checks.iter().map(SummaryRow::from).collect();
    Ok(summary_output("validate-high", ValidationSummary::new("validate-high", rows)?))
}

pub fn sample_csv(samples: &[KernelSample]) -> String {
    let mut s = String::from("kind,t,xi,xi_prime,re_value,im_value,abs_weighted,err_est\n");
    for k in samples {
        s += &row(&[
            k.kind.name().into(),
            fmt_f64(k.t),
            fmt_f64(k.xi),
            fmt_f64(k.xi_prime),
            fmt_f64(k.value.re),
            fmt_f64(k.value.im),
            fmt_f64(k.abs_weighted()),
            fmt_f64(k.err_est),
        ]);
    }
    s
}

fn engine_for(cfg: &RunConfig, m: &Medium, pts: &[f64], lambda_max: f64) -> Result<KernelEngine> {
    let mut e = KernelEngine::new(m, pts, lambda_max)?;
    if let Some(tol) = cfg.tolerances.kernel_tol {
        e.tol = tol;
    }
    Ok(e)
}

fn kernel(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let kind = cfg.kind.unwrap_or(KernelKind::Schrodinger);
    let ts = grid_or(&cfg.t, "t", None)?;
    let xs = grid_or(&cfg.xi, "xi", None)?;
    let xps = grid_or(&cfg.xi_prime, "xi_prime", Some(xs.clone()))?;
    let mut jobs = Vec::new();
    for &t in &ts {
        for &a in &xs {
            for &b in &xps {
                if cfg.band.map_or(true, |bd| bd.admits(a, b)) {
                    jobs.push((t, a, b));
                }
            }
        }
    }
    let pts: Vec<f64> = xs.iter().chain(&xps).copied().collect();
    let lmax = ts
        .iter()
        .map(|&t| KernelEngine::lambda_max_for(kind, t.abs(), &jobs.iter().filter(|j| j.0 == t).map(|j| (j.1, j.2)).collect::<Vec<_>>()))
        .fold(0.0, f64::max);
    let e = engine_for(cfg, &m, &pts, lmax)?;
    let samples = jobs
        .par_iter()
        .map(|&(t, a, b)| match cfg.band {
            None => e.evolution_kernel(kind, t, a, b),
            Some(bd) => e.band_kernel(kind, bd, t, a, b),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput { status: Status::Pass, files: vec![("kernel.csv".into(), sample_csv(&samples))], message: format!("{} kernel samples", samples.len()) })
}

/// Decay rate a band statistic should show.
pub fn band_rate(kind: KernelKind, band: Option<Band>) -> f64 {
    match (kind, band) {
        (KernelKind::Schrodinger, _) => 1.0,
        (_, Some(Band::LowLow)) => 1.0,
        _ => 0.5,
    }
}

fn decay(cfg: &RunConfig) -> Result<RunOutput> {
    let m = medium_for(cfg)?;
    let kind = cfg.kind.unwrap_or(KernelKind::Schrodinger);
    let ts = grid_or(&cfg.t, "t", Some(log_points(10.0, 1e4, 13)))?;
    let grid = grid_or(&cfg.xi, "xi", Some(default_spatial_grid()))?;
    let rep = if cfg.tolerances.kernel_tol.is_some() {
        let (lo, hi) = m.chart.xi_range();
        let xi_max = hi.min(-lo);
        let pts = crate::kernel::scan_points(&grid, &ts, xi_max);
        let e = engine_for(cfg, &m, &pts, scan_lambda_max(kind, cfg.band, &ts, &grid, xi_max))?;
        crate::kernel::decay_scan_with(&e, kind, cfg.band, &ts, &grid, xi_max)?
    } else {
        decay_scan(&m, kind, cfg.band, &ts, &grid)?
    };
    let mut s = String::from("kind,t,sup_abs,fit_alpha,fit_C,fit_R2\n");
    for r in &rep.rows {
        s += &row(&[kind.name().into(), fmt_f64(r.t), fmt_f64(r.sup_abs), fmt_f64(rep.fit_alpha), fmt_f64(rep.fit_c), fmt_f64(rep.fit_r2)]);
    }
    let target = if cfg.band.is_some() { band_rate(kind, cfg.band) } else { rep.target_alpha };
    let ok = if cfg.band.is_some() {
        rep.fit_alpha >= target - ALPHA_SLACK
    } else {
        (rep.fit_alpha - target).abs() <= ALPHA_SLACK && rep.fit_r2 >= MIN_R2
    };
    let msg = format!("{}: alpha {:.4} (target {target}), C {:.4e}, R2 {:.4}", kind.name(), rep.fit_alpha, rep.fit_c, rep.fit_r2);
    Ok(RunOutput { status: if ok { Status::Pass } else { Status::Flagged }, files: vec![("decay.csv".into(), s)], message: msg })
}

fn statphase(_cfg: &RunConfig) -> Result<RunOutput> {
    let mut s = String::from("case,t,lhs,rhs,ratio,oracle_error\n");
    let mut c_sp: f64 = 0.0;
    let mut oracle_ok = true;
    for case in case_library() {
        let r = stationary_phase_check(&case)?;
        let ratio = if r.rhs > 0.0 { r.lhs / r.rhs } else { 0.0 };
        c_sp = c_sp.max(ratio);
        if let Some(e) = r.oracle_error {
            oracle_ok &= e <= 1e-6;
        }
        s += &row(&[case.name.into(), fmt_f64(case.t), fmt_f64(r.lhs), fmt_f64(r.rhs), fmt_f64(ratio), r.oracle_error.map_or("nan".into(), fmt_f64)]);
    }
    let ok = oracle_ok && c_sp <= C_SP_CAP;
    Ok(RunOutput { status: if ok { Status::Pass } else { Status::Flagged }, files: vec![("statphase.csv".into(), s)], message: format!("C_sp = {c_sp:.6}") })
}

/// Execute the config's pipeline without touching the filesystem.
pub fn execute(cfg: &RunConfig, command: Command) -> Result<RunOutput> {
    match command {
        Command::Describe => describe(cfg),
        Command::Potential => potential(cfg),
        Command::Jost => jost(cfg),
        Command::Coeffs => coeffs(cfg),
        Command::ValidateLow => validate_low(cfg),
        Command::ValidateHigh => validate_high(cfg),
        Command::Kernel => kernel(cfg),
        Command::Decay => decay(cfg),
        Command::Statphase => statphase(cfg),
    }
}

pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in &out.files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Load, run and write; returns the exit status.
pub fn run(command: &str, config: &Path, out: Option<&Path>) -> Result<Status> {
    let command = Command::parse(command)?;
    let cfg = load_config(config)?;
    if let Some(c) = cfg.command {
        if c != command {
            return Err(Error::Config(format!("config is for '{}' but '{}' was requested", c.name(), command.name())));
        }
    }
    let result = execute(&cfg, command)?;
    let dir: PathBuf = out.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    write_outputs(&result, &dir)?;
    if !result.message.is_empty() {
        println!("{}", result.message.trim_end());
    }
    Ok(result.status)
}

/// Size the global thread pool from CONIC_THREADS.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CONIC_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| Error::Config(format!("CONIC_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn potential_csv_contract() {
        let cfg = RunConfig::from_json(r#"{"profile":{"kind":"hyperboloid","params":{"a":1}},"xi":{"min":100,"max":1000,"count":3,"scale":"log"}}"#).unwrap();
        let out = execute(&cfg, Command::Potential).unwrap();
        let body = &out.files[0].1;
        let mut lines = body.lines();
        assert_eq!(lines.next().unwrap(), "xi,rho,V,xi2V");
        for l in lines {
            let xi2v: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
            assert!((xi2v + 0.25).abs() < 0.01, "{l}");
        }
        assert_eq!(execute(&cfg, Command::Potential).unwrap(), out);
    }

    #[test]
    fn duplicate_checks_rejected() {
        let r = SummaryRow { name: "a".into(), target: String::new(), fitted: vec![], worst: 0.0, threshold: 1.0, pass: true };
        assert!(ValidationSummary::new("s", vec![r.clone(), r]).is_err());
    }
}
