//! Rotation profiles r(x), the arclength chart ξ ↔ x and the effective
//! potential V(ξ) = ρ̇ + ρ² with ρ = (d/2)·ṙ/r.

use crate::quad::{Chebyshev, GaussLegendre};
use crate::{Error, Result};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

pub const DEFAULT_X_MAX: f64 = 1e5;
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;
pub const XI_TAIL: f64 = 5.0;

/// The `profile` sub-document of a run configuration.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default = "default_d")]
    pub d: u32,
    #[serde(default)]
    pub x_max: Option<f64>,
    /// Sampled r values for `custom-tabulated`.
    #[serde(default)]
    pub table: Option<Vec<f64>>,
}

fn default_d() -> u32 {
    1
}

impl ProfileDoc {
    pub fn new(kind: &str) -> Self {
        ProfileDoc { kind: kind.to_string(), params: BTreeMap::new(), d: 1, x_max: None, table: None }
    }

    pub fn with_param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), v);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Cylinder,
    Hyperboloid,
    TwoSidedConeSmoothed,
    CustomTabulated,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Cylinder => "cylinder",
            ProfileKind::Hyperboloid => "hyperboloid",
            ProfileKind::TwoSidedConeSmoothed => "two-sided-cone-smoothed",
            ProfileKind::CustomTabulated => "custom-tabulated",
        }
    }
}

#[derive(Debug, Clone)]
struct Tabulated {
    x0: f64,
    h: f64,
    r: Vec<f64>,
    dr: Vec<f64>,
    d2r: Vec<f64>,
}

impl Tabulated {
    fn new(x0: f64, h: f64, r: Vec<f64>) -> Self {
        let n = r.len();
        let mut dr = vec![0.0; n];
        let mut d2r = vec![0.0; n];
        for i in 0..n {
            // 5-point stencils, shifted near the ends
            let c = i.clamp(2, n - 3);
            let f = |k: isize| r[(c as isize + k) as usize];
            let s = i as f64 - c as f64; // offset of the target from the stencil centre
            // Lagrange derivative weights on the 5 points -2..2 at offset s
            let pts = [-2.0, -1.0, 0.0, 1.0, 2.0];
            let mut w1 = [0.0; 5];
            let mut w2 = [0.0; 5];
            for j in 0..5 {
                // derivative of the Lagrange basis ℓ_j at s
                let mut d1 = 0.0;
                let mut dd = 0.0;
                for m in 0..5 {
                    if m == j {
                        continue;
                    }
                    let mut p = 1.0 / (pts[j] - pts[m]);
                    for q in 0..5 {
                        if q != j && q != m {
                            p *= (s - pts[q]) / (pts[j] - pts[q]);
                        }
                    }
                    d1 += p;
                    for q in 0..5 {
                        if q == j || q == m {
                            continue;
                        }
                        let mut p2 = 1.0 / ((pts[j] - pts[m]) * (pts[j] - pts[q]));
                        for u in 0..5 {
                            if u != j && u != m && u != q {
                                p2 *= (s - pts[u]) / (pts[j] - pts[u]);
                            }
                        }
                        dd += p2;
                    }
                }
                w1[j] = d1;
                w2[j] = dd;
            }
            let mut a = 0.0;
            let mut b = 0.0;
            for j in 0..5 {
                a += w1[j] * f(j as isize - 2);
                b += w2[j] * f(j as isize - 2);
            }
            dr[i] = a / h;
            d2r[i] = b / (h * h);
        }
        Tabulated { x0, h, r, dr, d2r }
    }

    fn eval(&self, x: f64) -> [f64; 4] {
        let n = self.r.len();
        let x1 = self.x0 + self.h * (n - 1) as f64;
        if x <= self.x0 {
            return [self.r[0] + self.dr[0] * (x - self.x0), self.dr[0], 0.0, 0.0];
        }
        if x >= x1 {
            return [self.r[n - 1] + self.dr[n - 1] * (x - x1), self.dr[n - 1], 0.0, 0.0];
        }
        let u = (x - self.x0) / self.h;
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        let h = self.h;
        let (p0, p1) = (self.r[i], self.r[i + 1]);
        let (m0, m1) = (self.dr[i] * h, self.dr[i + 1] * h);
        let (a0, a1) = (self.d2r[i] * h * h, self.d2r[i + 1] * h * h);
        let dp = p1 - p0;
        let c = [
            p0,
            m0,
            0.5 * a0,
            10.0 * dp - 6.0 * m0 - 4.0 * m1 - 1.5 * a0 + 0.5 * a1,
            -15.0 * dp + 8.0 * m0 + 7.0 * m1 + 1.5 * a0 - a1,
            6.0 * dp - 3.0 * m0 - 3.0 * m1 - 0.5 * a0 + 0.5 * a1,
        ];
        let v = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let d1 = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let d2 = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        let d3 = 6.0 * c[3] + t * (24.0 * c[4] + t * 60.0 * c[5]);
        [v, d1 / h, d2 / (h * h), d3 / (h * h * h)]
    }
}

/// A rotation profile r(x) > 0 with its first three derivatives.
#[derive(Debug, Clone)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub params: BTreeMap<String, f64>,
    pub d: u32,
    pub conical_left: bool,
    pub conical_right: bool,
    pub x_max: f64,
    table: Option<Tabulated>,
    mirrored: bool,
}

fn take_params(doc: &ProfileDoc, allowed: &[&str]) -> Result<()> {
    for k in doc.params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown parameter `{k}` for profile kind `{}`", doc.kind)));
        }
    }
    Ok(())
}

/// Build and validate a profile from its configuration document.
pub fn make_profile(doc: &ProfileDoc) -> Result<ProfileSpec> {
    let x_max = doc.x_max.unwrap_or(DEFAULT_X_MAX);
    if !(x_max > 10.0) || !x_max.is_finite() {
        return Err(Error::Config(format!("x_max must be a finite number > 10, got {x_max}")));
    }
    if doc.d == 0 {
        return Err(Error::Config("d must be a positive integer".into()));
    }
    if doc.kind != "custom-tabulated" && doc.table.is_some() {
        return Err(Error::Config("`table` is only allowed for custom-tabulated profiles".into()));
    }
    let mut params = doc.params.clone();
    let (kind, table, cl, cr) = match doc.kind.as_str() {
        "cylinder" => {
            take_params(doc, &[])?;
            (ProfileKind::Cylinder, None, false, false)
        }
        "hyperboloid" => {
            take_params(doc, &["a"])?;
            let a = *params.entry("a".into()).or_insert(1.0);
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Config(format!("hyperboloid scale a must be > 0, got {a}")));
            }
            (ProfileKind::Hyperboloid, None, true, true)
        }
        "two-sided-cone-smoothed" => {
            take_params(doc, &["a"])?;
            let a = *params.entry("a".into()).or_insert(1.0);
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Config(format!("smoothing scale a must be > 0, got {a}")));
            }
            (ProfileKind::TwoSidedConeSmoothed, None, true, true)
        }
        "custom-tabulated" => {
            take_params(doc, &["x0", "h"])?;
            let x0 = *params.get("x0").ok_or_else(|| Error::Config("custom-tabulated needs params.x0".into()))?;
            let h = *params.get("h").ok_or_else(|| Error::Config("custom-tabulated needs params.h".into()))?;
            let vals = doc.table.clone().ok_or_else(|| Error::Config("custom-tabulated needs `table`".into()))?;
            if !(h > 0.0) {
                return Err(Error::Config(format!("table step h must be > 0, got {h}")));
            }
            if vals.len() < 6 {
                return Err(Error::Config("table needs at least 6 values".into()));
            }
            if let Some(v) = vals.iter().find(|v| !(**v > 0.0)) {
                return Err(Error::Config(format!("tabulated profile has non-positive r = {v}")));
            }
            let t = Tabulated::new(x0, h, vals);
            let n = t.r.len();
            let cl = (t.dr[0] + 1.0).abs() < 1e-3;
            let cr = (t.dr[n - 1] - 1.0).abs() < 1e-3;
            (ProfileKind::CustomTabulated, Some(t), cl, cr)
        }
        other => return Err(Error::Config(format!("unknown profile kind `{other}`"))),
    };
    let p = ProfileSpec { kind, params, d: doc.d, conical_left: cl, conical_right: cr, x_max, table, mirrored: false };
    p.check_invariants()?;
    Ok(p)
}

impl ProfileSpec {
    fn param(&self, k: &str) -> f64 {
        self.params[k]
    }

    /// [r, r′, r″, r‴] at x.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        if self.mirrored {
            let [r, d1, d2, d3] = self.eval_raw(-x);
            return [r, -d1, d2, -d3];
        }
        self.eval_raw(x)
    }

    fn eval_raw(&self, x: f64) -> [f64; 4] {
        match self.kind {
            ProfileKind::Cylinder => [1.0, 0.0, 0.0, 0.0],
            ProfileKind::Hyperboloid => {
                let a = self.param("a");
                let q = (a * a + x * x).sqrt();
                let a2 = a * a;
                [q, x / q, a2 / (q * q * q), -3.0 * a2 * x / (q * q * q * q * q)]
            }
            ProfileKind::TwoSidedConeSmoothed => {
                let a = self.param("a");
                let u = x / a;
                let au = u.abs();
                // a·log(2cosh u) = a(|u| + log(1 + e^{-2|u|}))
                let r = a * (au + (-2.0 * au).exp().ln_1p());
                let th = u.tanh();
                let sech2 = 1.0 - th * th;
                [r, th, sech2 / a, -2.0 * sech2 * th / (a * a)]
            }
            ProfileKind::CustomTabulated => self.table.as_ref().unwrap().eval(x),
        }
    }

    pub fn r(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    /// The reflected profile x ↦ r(−x).
    pub fn mirrored(&self) -> ProfileSpec {
        let mut m = self.clone();
        m.mirrored = !self.mirrored;
        std::mem::swap(&mut m.conical_left, &mut m.conical_right);
        m
    }

    /// Whether r(−x) = r(x).
    pub fn is_symmetric(&self) -> bool {
        match self.kind {
            ProfileKind::CustomTabulated => {
                let t = self.table.as_ref().unwrap();
                let x1 = t.x0 + t.h * (t.r.len() - 1) as f64;
                if (t.x0 + x1).abs() > 1e-12 * t.h {
                    return false;
                }
                t.r.iter().zip(t.r.iter().rev()).all(|(a, b)| (a - b).abs() <= 1e-14 * a.abs())
            }
            _ => true,
        }
    }

    fn sample_grid(&self) -> Vec<f64> {
        let mut g = vec![0.0];
        let mut x = 0.05;
        while x < 1e4 {
            g.push(x);
            g.push(-x);
            x *= 1.3;
        }
        g
    }

    pub fn check_invariants(&self) -> Result<()> {
        let grid = self.sample_grid();
        let tabulated = self.kind == ProfileKind::CustomTabulated;
        let tol = if tabulated { 1e-4 } else { 1e-6 };
        for &x in &grid {
            let [r, d1, d2, _] = self.eval(x);
            if !(r > 0.0) {
                return Err(Error::Config(format!("profile has r({x}) = {r} ≤ 0")));
            }
            let conical = (x > 0.0 && self.conical_right) || (x < 0.0 && self.conical_left);
            if conical && x.abs() >= 10.0 {
                let h = x * x * (r / x.abs() - 1.0).abs();
                if !(h < 1e3) {
                    return Err(Error::Config(format!("conical end violates |x|(1+O(x⁻²)) at x={x}")));
                }
            }
            let step = 1e-4 * (1.0 + x.abs());
            if tabulated {
                continue;
            }
            let fd1 = (self.r(x + step) - self.r(x - step)) / (2.0 * step);
            let fd2 = (self.eval(x + step)[1] - self.eval(x - step)[1]) / (2.0 * step);
            let s1 = 1.0 + d1.abs();
            let s2 = 1e-3 + d2.abs() + 1.0 / (1.0 + x * x);
            if (fd1 - d1).abs() > tol * s1 || (fd2 - d2).abs() > 100.0 * tol * s2 {
                return Err(Error::Config(format!("derivative evaluators inconsistent at x={x}")));
            }
        }
        Ok(())
    }

    /// ρ and V at a point x of the generator (no chart inversion).
    pub fn potential_x(&self, x: f64) -> (f64, f64) {
        let [r, d1, d2, _] = self.eval(x);
        let s = (1.0 + d1 * d1).sqrt();
        let half_d = 0.5 * self.d as f64;
        let rho = half_d * d1 / (r * s);
        let drho_dx = half_d * (d2 / (r * s) - d1 * d1 / (r * r * s) - d1 * d1 * d2 / (r * s * s * s));
        (rho, drho_dx / s + rho * rho)
    }

    /// Arclength density √(1 + r′²).
    pub fn speed(&self, x: f64) -> f64 {
        let d1 = self.eval(x)[1];
        (1.0 + d1 * d1).sqrt()
    }

    /// Coefficient of the inverse-square tail: d²/4 − d/2.
    pub fn inverse_square_coeff(&self) -> f64 {
        let d = self.d as f64;
        0.25 * d * d - 0.5 * d
    }
}

/// Cached arclength chart ξ(x) = ∫₀ˣ √(1+r′²) and its inverse.
#[derive(Debug, Clone)]
pub struct ArclengthChart {
    pub profile: ProfileSpec,
    pub quad_tol: f64,
    pub x_max: f64,
    xs: Vec<f64>,
    xis: Vec<f64>,
    rule: GaussLegendre,
}

impl ArclengthChart {
    pub fn new(profile: &ProfileSpec) -> Result<Self> {
        Self::with_tol(profile, DEFAULT_QUAD_TOL)
    }

    pub fn with_tol(profile: &ProfileSpec, quad_tol: f64) -> Result<Self> {
        let rule = GaussLegendre::new(20);
        let coarse = GaussLegendre::new(10);
        let x_max = profile.x_max;
        let side = |sign: f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut xs = vec![0.0];
            let mut xis = vec![0.0];
            let mut x = 0.0f64;
            let mut xi = 0.0f64;
            let mut h = 0.05;
            while xi < x_max * (1.0 + 1e-9) {
                let a = x;
                let b = x + sign * h;
                let fine = rule.integrate(a, b, |y| profile.speed(y));
                let c = coarse.integrate(a, b, |y| profile.speed(y));
                if (fine - c).abs() > quad_tol * h.max(1.0) && h > 1e-6 {
                    h *= 0.5;
                    continue;
                }
                x = b;
                xi += fine.abs();
                xs.push(x);
                xis.push(sign * xi);
                h = (h * 1.5).min(0.1 * (1.0 + x.abs())).min(1e3);
                if xs.len() > 1_000_000 {
                    return Err(Error::Domain("chart construction did not terminate".into()));
                }
            }
            Ok((xs, xis))
        };
        let (rx, rxi) = side(1.0)?;
        let (lx, lxi) = side(-1.0)?;
        let mut xs: Vec<f64> = lx.iter().rev().cloned().collect();
        let mut xis: Vec<f64> = lxi.iter().rev().cloned().collect();
        xs.pop();
        xis.pop();
        xs.extend(rx);
        xis.extend(rxi);
        Ok(ArclengthChart { profile: profile.clone(), quad_tol, x_max, xs, xis, rule })
    }

    /// Quadrature nodes (x_k, ξ_k) of the cached chart.
    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.xis)
    }

    /// Chart domain in x.
    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Chart image in ξ.
    pub fn xi_range(&self) -> (f64, f64) {
        (self.xis[0], *self.xis.last().unwrap())
    }

    fn locate(v: &[f64], t: f64) -> usize {
        match v.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(v.len() - 2),
            Err(i) => i.saturating_sub(1).min(v.len() - 2),
        }
    }

    fn xi_unchecked(&self, x: f64) -> f64 {
        let i = Self::locate(&self.xs, x);
        let (a, b) = (self.xs[i], self.xs[i + 1]);
        // integrate from the nearer node
        if (x - a).abs() <= (b - x).abs() {
            self.xis[i] + self.rule.integrate(a, x, |y| self.profile.speed(y))
        } else {
            self.xis[i + 1] - self.rule.integrate(x, b, |y| self.profile.speed(y))
        }
    }

    pub fn arclength_of(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.x_range();
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain(format!("x = {x} outside chart domain [{lo}, {hi}]")));
        }
        Ok(self.xi_unchecked(x))
    }

    pub fn x_of_arclength(&self, xi: f64) -> Result<f64> {
        let (lo, hi) = self.xi_range();
        if !(xi >= lo && xi <= hi) {
            return Err(Error::Domain(format!("ξ = {xi} outside chart image [{lo}, {hi}]")));
        }
        let i = Self::locate(&self.xis, xi);
        let (a, b) = (self.xs[i], self.xs[i + 1]);
        let (fa, fb) = (self.xis[i], self.xis[i + 1]);
        let mut x = if fb > fa { a + (b - a) * (xi - fa) / (fb - fa) } else { a };
        for _ in 0..50 {
            let f = self.xi_unchecked(x) - xi;
            let dx = f / self.profile.speed(x);
            x = (x - dx).clamp(a, b);
            if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        Ok(x)
    }

    /// (ρ, V) at ξ, via the chain rule through the chart.
    pub fn potential_at(&self, xi: f64) -> Result<(f64, f64)> {
        let x = self.x_of_arclength(xi)?;
        Ok(self.profile.potential_x(x))
    }

    /// r as a function of ξ.
    pub fn r_of_xi(&self, xi: f64) -> Result<f64> {
        Ok(self.profile.r(self.x_of_arclength(xi)?))
    }

    /// V₁(ξ) = V − (d²/4 − d/2)/ξ², defined only for |ξ| ≥ ξ_tail.
    pub fn v1_at(&self, xi: f64) -> Result<f64> {
        if xi.abs() < XI_TAIL {
            return Err(Error::Domain(format!("V₁ is only defined for |ξ| ≥ {XI_TAIL}, got {xi}")));
        }
        let (_, v) = self.potential_at(xi)?;
        Ok(v - self.profile.inverse_square_coeff() / (xi * xi))
    }

    /// Profile of the mirrored manifold with its own chart.
    pub fn mirrored(&self) -> Result<ArclengthChart> {
        ArclengthChart::with_tol(&self.profile.mirrored(), self.quad_tol)
    }
}

/// Outcome of the conical-end fit on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicalFit {
    /// ξ(x) − √2·x → c_∞ on the fitted side (x > 0).
    pub c_inf: f64,
    /// Fitted coefficient k in ξ − √2x − c_∞ ≈ k/x.
    pub k: f64,
    /// Max |ξ − √2x − c_∞|·x over x ∈ [100, x_hi].
    pub residual_c: f64,
    /// Max residual of the fit on the fitting window.
    pub fit_residual: f64,
    /// sup ξ²|V| and sup |ξ³V₁| over ξ ∈ [10, X_max].
    pub c2: f64,
    pub c3: f64,
}

/// Fit c_∞ on the right end (use `chart.mirrored()` for the left end).
pub fn fit_conical_constants(chart: &ArclengthChart) -> Result<ConicalFit> {
    if !chart.profile.conical_right {
        return Err(Error::NotConical(format!("{} profile has no conical right end", chart.profile.kind.name())));
    }
    let (_, xhi) = chart.x_range();
    let n = 40;
    let mut rows = Vec::new();
    for i in 0..n {
        let x = xhi / 4.0 * 4f64.powf(i as f64 / (n - 1) as f64);
        let y = chart.arclength_of(x)? - SQRT_2 * x;
        rows.push((x, y));
    }
    // least squares y = c + k/x + k2/x²
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(x, y) in &rows {
        let b = [1.0, 1.0 / x, 1.0 / (x * x)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
            atb[i] += b[i] * y;
        }
    }
    let sol = solve3(ata, atb);
    let (c_inf, k) = (sol[0], sol[1]);
    let fit_residual = rows
        .iter()
        .map(|&(x, y)| (y - sol[0] - sol[1] / x - sol[2] / (x * x)).abs())
        .fold(0.0, f64::max);
    let mut residual_c: f64 = 0.0;
    let mut x = 100.0;
    while x <= xhi {
        let y = chart.arclength_of(x)? - SQRT_2 * x - c_inf;
        residual_c = residual_c.max(y.abs() * x);
        x *= 1.5;
    }
    if fit_residual > 1e-6 {
        return Err(Error::NotConical(format!("ξ − √2x fails to converge (fit residual {fit_residual:e}); check x_max")));
    }
    let (c2, c3) = tail_bounds(chart, 10.0, chart.x_max)?;
    Ok(ConicalFit { c_inf, k, residual_c, fit_residual, c2, c3 })
}

/// sup ξ²|V| and sup |ξ³V₁| on a log grid of [lo, hi].
pub fn tail_bounds(chart: &ArclengthChart, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let mut c2: f64 = 0.0;
    let mut c3: f64 = 0.0;
    let n = 200;
    let coeff = chart.profile.inverse_square_coeff();
    for i in 0..=n {
        let xi = lo * (hi / lo).powf(i as f64 / n as f64);
        let xi = xi.min(chart.xi_range().1);
        let (_, v) = chart.potential_at(xi)?;
        c2 = c2.max(xi * xi * v.abs());
        c3 = c3.max((xi * xi * xi * (v - coeff / (xi * xi))).abs());
    }
    Ok((c2, c3))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let mut s = b[c];
        for k in c + 1..3 {
            s -= a[c][k] * x[k];
        }
        x[c] = s / a[c][c];
    }
    x
}

/// Fast piecewise-Chebyshev evaluator for V(ξ) on the chart image,
/// accurate to ~1e-13 relative to the local size of V.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    edges: Vec<f64>,
    values: Vec<Vec<f64>>,
    cheb: Chebyshev,
    pub xi_lo: f64,
    pub xi_hi: f64,
    zero: bool,
}

impl PotentialTable {
    pub fn new(chart: &ArclengthChart) -> Result<Self> {
        let (lo, hi) = chart.xi_range();
        let cheb = Chebyshev::new(24);
        let zero = chart.profile.kind == ProfileKind::Cylinder;
        // seed panels: uniform on [-2, 2], geometric ratio 1.5 outside
        let mut right = vec![0.0];
        let mut e = 0.0;
        while e < 2.0 {
            e += 0.25;
            right.push(e);
        }
        while e < hi {
            e = (e * 1.5).min(hi);
            right.push(e);
        }
        let mut left = vec![0.0];
        let mut e = 0.0;
        while e > -2.0 {
            e -= 0.25;
            left.push(e);
        }
        while e > lo {
            e = (e * 1.5).max(lo);
            left.push(e);
        }
        let mut seeds: Vec<f64> = left.into_iter().rev().collect();
        seeds.pop();
        seeds.extend(right);
        seeds.retain(|v| *v >= lo && *v <= hi);
        let mut edges = vec![seeds[0]];
        let mut values = Vec::new();
        let vfun = |x: f64| chart.potential_at(x).map(|p| p.1);
        for w in seeds.windows(2) {
            Self::refine(&cheb, w[0], w[1], &vfun, 0, &mut edges, &mut values)?;
        }
        Ok(PotentialTable { edges, values, cheb, xi_lo: lo, xi_hi: hi, zero })
    }

    fn refine<F: Fn(f64) -> Result<f64>>(cheb: &Chebyshev, a: f64, b: f64, f: &F, depth: usize, edges: &mut Vec<f64>, values: &mut Vec<Vec<f64>>) -> Result<()> {
        let vals: Vec<f64> = cheb.nodes.iter().map(|u| f(0.5 * (a + b) + 0.5 * (b - a) * u)).collect::<Result<_>>()?;
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut ok = true;
        let n = cheb.len();
        let mut bv = vec![0.0; n];
        let mut bd = vec![0.0; n];
        for u in [-0.97, -0.5, 0.13, 0.61, 0.99] {
            cheb.basis(u, &mut bv, &mut bd);
            let p: f64 = bv.iter().zip(&vals).map(|(w, v)| w * v).sum();
            let exact = f(0.5 * (a + b) + 0.5 * (b - a) * u)?;
            if (p - exact).abs() > 1e-13 * scale + 1e-300 {
                ok = false;
                break;
            }
        }
        if ok || depth >= 12 {
            edges.push(b);
            values.push(vals);
            return Ok(());
        }
        let m = 0.5 * (a + b);
        Self::refine(cheb, a, m, f, depth + 1, edges, values)?;
        Self::refine(cheb, m, b, f, depth + 1, edges, values)
    }

    /// V(ξ); outside the chart image the inverse-square tail is continued.
    pub fn v(&self, xi: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        if xi > self.xi_hi || xi < self.xi_lo {
            let edge = if xi > 0.0 { self.xi_hi } else { self.xi_lo };
            return self.v(edge) * (edge / xi).powi(2);
        }
        let i = match self.edges.binary_search_by(|p| p.partial_cmp(&xi).unwrap()) {
            Ok(i) => i.min(self.values.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.values.len() - 1),
        };
        let (a, b) = (self.edges[i], self.edges[i + 1]);
        let u = ((2.0 * xi - a - b) / (b - a)).clamp(-1.0, 1.0);
        let n = self.cheb.len();
        let mut bv = [0.0; 32];
        let mut bd = [0.0; 32];
        self.cheb.basis(u, &mut bv[..n], &mut bd[..n]);
        bv[..n].iter().zip(&self.values[i]).map(|(w, v)| w * v).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn panel_count(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyper() -> ArclengthChart {
        let p = make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 1.0)).unwrap();
        ArclengthChart::new(&p).unwrap()
    }

    #[test]
    fn cylinder_chart_is_identity() {
        let p = make_profile(&ProfileDoc::new("cylinder")).unwrap();
        let c = ArclengthChart::new(&p).unwrap();
        assert_eq!(c.arclength_of(2.0).unwrap(), 2.0);
        assert!((c.x_of_arclength(-3.0).unwrap() + 3.0).abs() < 1e-12);
        assert_eq!(c.potential_at(7.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 0.0)).is_err());
        assert!(make_profile(&ProfileDoc::new("torus")).is_err());
        assert!(make_profile(&ProfileDoc::new("cylinder").with_param("a", 1.0)).is_err());
        let mut d = ProfileDoc::new("custom-tabulated").with_param("x0", 0.0).with_param("h", 1.0);
        d.table = Some(vec![1.0, 1.0, -1.0, 1.0, 1.0, 1.0]);
        assert!(make_profile(&d).is_err());
    }

    #[test]
    fn hyperboloid_derivatives() {
        let c = hyper();
        let [r, d1, _, _] = c.profile.eval(3.0);
        assert!((r - 10f64.sqrt()).abs() < 1e-15);
        assert!((d1 - 3.0 / 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chart_round_trip_and_domain() {
        let c = hyper();
        let xi = c.arclength_of(7.0).unwrap();
        assert!((c.x_of_arclength(xi).unwrap() - 7.0).abs() < 1e-9);
        let (_, hi) = c.xi_range();
        assert!(c.x_of_arclength(2.0 * hi).is_err());
        assert!(c.arclength_of(1e9).is_err());
    }

    #[test]
    fn symmetric_potential() {
        let c = hyper();
        for xi in [0.3, 2.0, 17.0, 900.0] {
            let a = c.potential_at(xi).unwrap().1;
            let b = c.potential_at(-xi).unwrap().1;
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn potential_table_matches_direct() {
        let c = hyper();
        let t = PotentialTable::new(&c).unwrap();
        for xi in [-5e4, -30.0, -1.1, 0.0, 0.37, 3.3, 77.7, 9e4] {
            let v = c.potential_at(xi).unwrap().1;
            assert!((t.v(xi) - v).abs() < 1e-12 * (v.abs() + 1e-12 / (1.0 + xi * xi)), "ξ={xi}");
        }
    }

    #[test]
    fn tabulated_profile_tracks_the_hyperboloid() {
        let h = 0.01;
        let n = 4001;
        let vals: Vec<f64> = (0..n).map(|i| (1.0 + (-20.0 + h * i as f64).powi(2)).sqrt()).collect();
        let mut d = ProfileDoc::new("custom-tabulated").with_param("x0", -20.0).with_param("h", h);
        d.table = Some(vals);
        let p = make_profile(&d).unwrap();
        assert!(p.is_symmetric());
        for x in [-3.3, 0.0, 0.123, 5.0] {
            let e = p.eval(x);
            let q = (1.0 + x * x).sqrt();
            assert!((e[0] - q).abs() < 1e-8);
            assert!((e[1] - x / q).abs() < 1e-6);
            assert!((e[2] - 1.0 / (q * q * q)).abs() < 1e-4);
        }
    }
}
