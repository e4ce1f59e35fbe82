//! Spectral density 2λ·Im[f₊f₋/W] and the weighted Schrödinger and wave
//! kernels ∫₀^∞ e^{itλ^p} λ Im[f₊(ξ∨ξ′)f₋(ξ∧ξ′)/W] dλ, their band pieces,
//! the φ-smeared high-energy wave kernel and decay-exponent scans.
//!
//! Every λ-integrand is written as Σ_k A_k(λ)·e^{iλθ_k} with amplitudes
//! A_k built from m±, α±, W, which are smooth in log λ and are read from a
//! precomputed [`ScatteringTable`]. The λ-axis is split into
//!
//! ```text
//! (e^{-40}, λ_a]   λ = e^{-s}, adaptive Gauss–Kronrod in s
//! [λ_a, Λ]         Filon panels: exact e^{iωλ} moments, chirp kept in the amplitude
//! [Λ, ∞)           three-term integration by parts
//! ```

pub mod statphase;

use crate::geometry::ProfileKind;
use crate::jost::{bracket, jost_pair, Medium};
use crate::quad::{adaptive_gk, legendre_all, linear_fit, spherical_bessel_all, Chebyshev, GaussLegendre};
use crate::{Complex64, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Lower end of the λ-axis in the log variable: λ_min = e^{−S_MAX}.
pub const S_MAX: f64 = 40.0;
/// Default quadrature target (absolute).
pub const DEFAULT_TOL: f64 = 1e-11;
/// Reported error must stay below this fraction of max(1, |value|).
pub const ERROR_BUDGET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Schrodinger,
    WavePlus,
    WaveMinus,
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Schrodinger => "schrodinger",
            KernelKind::WavePlus => "wave_plus",
            KernelKind::WaveMinus => "wave_minus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "schrodinger" => Ok(KernelKind::Schrodinger),
            "wave_plus" | "wave" => Ok(KernelKind::WavePlus),
            "wave_minus" => Ok(KernelKind::WaveMinus),
            _ => Err(Error::Config(format!("unknown kernel kind '{s}'"))),
        }
    }

    fn phase(&self, t: f64, l: f64) -> f64 {
        match self {
            KernelKind::Schrodinger => t * l * l,
            KernelKind::WavePlus => t * l,
            KernelKind::WaveMinus => -t * l,
        }
    }

    fn dphase(&self, t: f64, l: f64) -> f64 {
        match self {
            KernelKind::Schrodinger => 2.0 * t * l,
            KernelKind::WavePlus => t,
            KernelKind::WaveMinus => -t,
        }
    }

    /// Decay rate the weighted kernel is expected to show.
    pub fn target_alpha(&self) -> f64 {
        match self {
            KernelKind::Schrodinger => 1.0,
            _ => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    LowLow,
    OscOsc,
    OscLow,
    SameSideOsc,
    HighEnergy,
}

impl Band {
    pub const ALL: [Band; 5] = [Band::LowLow, Band::OscOsc, Band::OscLow, Band::SameSideOsc, Band::HighEnergy];

    pub fn name(&self) -> &'static str {
        match self {
            Band::LowLow => "low_low",
            Band::OscOsc => "osc_osc",
            Band::OscLow => "osc_low",
            Band::SameSideOsc => "same_side_osc",
            Band::HighEnergy => "high_energy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Band::ALL
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown band '{s}'")))
    }

    /// Whether the band's sign configuration admits (ξ, ξ′).
    pub fn admits(&self, xi: f64, xip: f64) -> bool {
        match self {
            Band::OscOsc => xi * xip <= 0.0,
            Band::SameSideOsc => xi * xip >= 0.0,
            _ => true,
        }
    }

    /// Bands that sum to the full kernel for the given pair.
    pub fn partition_for(xi: f64, xip: f64) -> [Band; 4] {
        let osc = if xi * xip < 0.0 { Band::OscOsc } else { Band::SameSideOsc };
        [Band::LowLow, osc, Band::OscLow, Band::HighEnergy]
    }
}

/// C^∞ step: 0 for u ≤ 0, 1 for u ≥ 1.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Energy cutoff χ: 1 on [0, λ_low/2], 0 beyond λ_low.
pub fn energy_cutoff(lambda: f64, lambda_low: f64) -> f64 {
    smooth_step((lambda_low - lambda) / (0.5 * lambda_low))
}

/// Smooth version of χ_{[|ξλ|<1]}: 1 for |ξ|λ ≤ ½, 0 for |ξ|λ ≥ 2.
pub fn low_region(xi: f64, lambda: f64) -> f64 {
    let p = xi.abs() * lambda;
    if p == 0.0 {
        return 1.0;
    }
    smooth_step((LN_2 - p.ln()) / (2.0 * LN_2))
}

/// (⟨ξ⟩⟨ξ′⟩)^{−d/2}.
pub fn spatial_weight(xi: f64, xip: f64, d: u32) -> f64 {
    ((1.0 + xi * xi).sqrt() * (1.0 + xip * xip).sqrt()).powf(-0.5 * d as f64)
}

/// 2λ·Im[f₊(ξ∨ξ′,λ) f₋(ξ∧ξ′,λ)/W(λ)] from a fresh Jost solve.
pub fn spectral_density(medium: &Medium, xi: f64, xip: f64, lambda: f64) -> Result<f64> {
    let (p, n) = jost_pair(medium, lambda)?;
    let w = bracket(p.pair(0.0)?, n.pair(0.0)?);
    let (hi, lo) = if xi >= xip { (xi, xip) } else { (xip, xi) };
    Ok(2.0 * lambda * (p.pair(hi)?[0] * n.pair(lo)?[0] / w).im)
}

/// Scattering data on Chebyshev panels in u = log λ, for a fixed set of
/// spatial points.
#[derive(Debug, Clone)]
pub struct ScatteringTable {
    pub xis: Vec<f64>,
    edges: Vec<f64>,
    cheb: Chebyshev,
    w: Vec<Complex64>,
    alpha_minus: Vec<Complex64>,
    alpha_plus: Vec<Complex64>,
    /// m_side(ξ,λ) with side = sign ξ (ξ = 0 counts as +)
    m: Vec<Vec<Complex64>>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub d: u32,
}

/// Position of λ inside the table.
#[derive(Debug, Clone, Copy)]
pub struct Locator {
    panel: usize,
    basis: [f64; TABLE_NODES],
}

const TABLE_NODES: usize = 16;

fn table_edges(lambda_max: f64) -> Vec<f64> {
    let mut e = vec![-S_MAX - 0.5];
    let split = 1e-4f64.ln();
    let top = lambda_max.ln();
    while *e.last().unwrap() < top {
        let u = *e.last().unwrap();
        let step = if u < split { 4.0 } else { 1.0 };
        let next = if u < split { (u + step).min(split) } else { u + step };
        e.push(next);
    }
    let n = e.len();
    e[n - 1] = e[n - 1].max(top);
    e
}

impl ScatteringTable {
    pub fn build(medium: &Medium, xis: &[f64], lambda_max: f64) -> Result<Self> {
        let mut pts: Vec<f64> = xis.to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let (lo, hi) = medium.chart.xi_range();
        if let Some(bad) = pts.iter().find(|x| **x < lo || **x > hi) {
            return Err(Error::Domain(format!("spatial point ξ = {bad} outside the chart image [{lo}, {hi}]")));
        }
        let edges = table_edges(lambda_max);
        let cheb = Chebyshev::new(TABLE_NODES);
        let mut lams = Vec::with_capacity((edges.len() - 1) * TABLE_NODES);
        for p in 0..edges.len() - 1 {
            let (a, b) = (edges[p], edges[p + 1]);
            for x in &cheb.nodes {
                lams.push((0.5 * (a + b) + 0.5 * (b - a) * x).exp());
            }
        }
        let rows: Vec<(Complex64, Complex64, Complex64, Vec<Complex64>)> = lams
            .par_iter()
            .map(|&l| -> Result<_> {
                let (p, n) = jost_pair(medium, l).map_err(|e| Error::Domain(format!("table node λ = {l:e}: {e}")))?;
                let fp = p.pair(0.0)?;
                let fm = n.pair(0.0)?;
                let w = bracket(fp, fm);
                let am = bracket(fm, [fp[0].conj(), fp[1].conj()]) / (-I * 2.0 * l);
                let ap = bracket(fp, [fm[0].conj(), fm[1].conj()]) / (I * 2.0 * l);
                let mut ms = Vec::with_capacity(pts.len());
                for &xi in &pts {
                    let m = if xi >= 0.0 { p.m(xi) } else { n.m(xi) };
                    ms.push(m.map_err(|e| Error::Domain(format!("table node λ = {l:e}, ξ = {xi}: {e}")))?.0);
                }
                Ok((w, am, ap, ms))
            })
            .collect::<Result<_>>()?;
        let mut m = vec![Vec::with_capacity(lams.len()); pts.len()];
        let (mut w, mut alpha_minus, mut alpha_plus) = (Vec::new(), Vec::new(), Vec::new());
        for (wv, am, ap, ms) in rows {
            w.push(wv);
            alpha_minus.push(am);
            alpha_plus.push(ap);
            for (k, v) in ms.into_iter().enumerate() {
                m[k].push(v);
            }
        }
        Ok(ScatteringTable {
            xis: pts,
            lambda_min: edges[0].exp(),
            lambda_max: edges.last().unwrap().exp(),
            edges,
            cheb,
            w,
            alpha_minus,
            alpha_plus,
            m,
            d: medium.profile.d,
        })
    }

    pub fn node_count(&self) -> usize {
        self.w.len()
    }

    pub fn index_of(&self, xi: f64) -> Option<usize> {
        let i = self.xis.partition_point(|p| *p < xi - 1e-12 * (1.0 + xi.abs()));
        (i < self.xis.len() && (self.xis[i] - xi).abs() <= 1e-12 * (1.0 + xi.abs())).then_some(i)
    }

    pub fn locate(&self, lambda: f64) -> Result<Locator> {
        let u = lambda.ln();
        if !(u >= self.edges[0] && u <= *self.edges.last().unwrap()) {
            return Err(Error::Domain(format!("λ = {lambda:e} outside the scattering table [{:e}, {:e}]", self.lambda_min, self.lambda_max)));
        }
        let p = (self.edges.partition_point(|e| *e <= u)).clamp(1, self.edges.len() - 1) - 1;
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        let x = (2.0 * u - a - b) / (b - a);
        let mut basis = [0.0; TABLE_NODES];
        let mut der = [0.0; TABLE_NODES];
        self.cheb.basis(x, &mut basis, &mut der);
        Ok(Locator { panel: p, basis })
    }

    fn interp(&self, loc: &Locator, v: &[Complex64]) -> Complex64 {
        let off = loc.panel * TABLE_NODES;
        let mut s = ZERO;
        for j in 0..TABLE_NODES {
            s += v[off + j] * loc.basis[j];
        }
        s
    }

    pub fn wronskian(&self, loc: &Locator) -> Complex64 {
        self.interp(loc, &self.w)
    }

    pub fn alpha_minus(&self, loc: &Locator) -> Complex64 {
        self.interp(loc, &self.alpha_minus)
    }

    pub fn alpha_plus(&self, loc: &Locator) -> Complex64 {
        self.interp(loc, &self.alpha_plus)
    }

    pub fn m(&self, loc: &Locator, idx: usize) -> Complex64 {
        self.interp(loc, &self.m[idx])
    }

    /// Phases θ_k and amplitudes c_k with f₊(ξ∨ξ′)f₋(ξ∧ξ′)/W = Σ c_k e^{iλθ_k}.
    pub fn pair_terms(&self, loc: &Locator, lambda: f64, hi: (f64, usize), lo: (f64, usize), out: &mut [Complex64; 2]) -> [f64; 2] {
        let (xh, ih) = hi;
        let (xl, il) = lo;
        let w = self.wronskian(loc);
        let beta_over_w = I / (2.0 * lambda);
        if xh >= 0.0 && xl < 0.0 {
            out[0] = self.m(loc, ih) * self.m(loc, il) / w;
            out[1] = ZERO;
            [xh - xl, 0.0]
        } else if xl >= 0.0 {
            let (mh, ml) = (self.m(loc, ih), self.m(loc, il));
            out[0] = self.alpha_minus(loc) / w * mh * ml;
            out[1] = beta_over_w * mh * ml.conj();
            [xh + xl, xh - xl]
        } else {
            let (mh, ml) = (self.m(loc, ih), self.m(loc, il));
            out[0] = self.alpha_plus(loc) / w * mh * ml;
            out[1] = beta_over_w * mh.conj() * ml;
            [-(xh + xl), xh - xl]
        }
    }

    /// 2λ Im[f₊f₋/W] from the table.
    pub fn density(&self, xi: f64, xip: f64, lambda: f64) -> Result<f64> {
        let (hi, lo) = ordered(xi, xip);
        let ih = self.index_of(hi).ok_or_else(|| Error::Domain(format!("ξ = {hi} not in the table")))?;
        let il = self.index_of(lo).ok_or_else(|| Error::Domain(format!("ξ = {lo} not in the table")))?;
        let loc = self.locate(lambda)?;
        let mut c = [ZERO; 2];
        let th = self.pair_terms(&loc, lambda, (hi, ih), (lo, il), &mut c);
        let f: Complex64 = (0..2).map(|k| c[k] * Complex64::from_polar(1.0, lambda * th[k])).sum();
        Ok(2.0 * lambda * f.im)
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a >= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Gauss–Legendre rule with the Legendre projection matrix cached.
#[derive(Debug, Clone)]
struct FilonRule {
    gl: GaussLegendre,
    proj: Vec<Vec<f64>>,
}

impl FilonRule {
    fn new(n: usize) -> Self {
        let gl = GaussLegendre::new(n);
        let mut proj = vec![vec![0.0; n]; n];
        let mut pj = vec![0.0; n];
        for j in 0..n {
            legendre_all(gl.nodes[j], n - 1, &mut pj);
            for k in 0..n {
                proj[k][j] = (2.0 * k as f64 + 1.0) * 0.5 * gl.weights[j] * pj[k];
            }
        }
        FilonRule { gl, proj }
    }

    /// ∫_a^b g e^{iω(λ−c)} dλ with g on the mapped nodes; (value, error).
    fn panel(&self, a: f64, b: f64, omega: f64, g: &[Complex64]) -> (Complex64, f64) {
        let n = self.gl.len();
        let h = 0.5 * (b - a);
        let js = spherical_bessel_all(omega * h, n - 1);
        let mut s = ZERO;
        let mut ik = Complex64::new(1.0, 0.0);
        let mut tail = 0.0;
        for k in 0..n {
            let ck: Complex64 = self.proj[k].iter().zip(g).map(|(p, v)| v * p).sum();
            s += ck * ik * (2.0 * js[k]);
            ik *= I;
            if k + 3 >= n {
                tail += ck.norm();
            }
        }
        (s * h, 2.0 * h * tail)
    }
}

/// One λ-integral ∫ e^{iΦ(λ)} Σ_k A_k(λ) e^{iλθ_k} dλ over [lo, hi] (hi = ∞
/// when None).
struct LambdaIntegral<'a> {
    kind: KernelKind,
    t: f64,
    thetas: &'a [f64],
    amps: &'a (dyn Fn(f64, &mut [Complex64]) -> Result<()> + Sync),
    lo: f64,
    hi: Option<f64>,
    /// frequency of oscillations folded into the amplitudes
    inner_freq: f64,
    lambda_cap: f64,
    tol: f64,
}

/// Upper integration limit used for the tail split.
pub fn tail_start(kind: KernelKind, t: f64, theta_max: f64, lo: f64) -> f64 {
    let l0 = match kind {
        KernelKind::Schrodinger => theta_max / (2.0 * t.abs()),
        _ => 0.0,
    };
    10f64.max(1.5 * l0 + 6.0).max(2.0 * lo)
}

impl<'a> LambdaIntegral<'a> {
    fn integrand(&self, l: f64, buf: &mut [Complex64]) -> Result<Complex64> {
        (self.amps)(l, buf)?;
        let mut s = ZERO;
        for (k, th) in self.thetas.iter().enumerate() {
            s += buf[k] * Complex64::from_polar(1.0, l * th);
        }
        Ok(s * Complex64::from_polar(1.0, self.kind.phase(self.t, l)))
    }

    fn run(&self, rule: &FilonRule) -> Result<(Complex64, f64)> {
        let np = self.thetas.len();
        let t = self.t;
        let at = t.abs();
        let theta_max = self.thetas.iter().fold(0.0f64, |m, v| m.max(v.abs())) + self.inner_freq;
        let (end, tail) = match self.hi {
            Some(h) => (h, false),
            None => (tail_start(self.kind, t, theta_max, self.lo), true),
        };
        if end * 1.1 > self.lambda_cap {
            return Err(Error::Quadrature(format!("λ-range up to {end:.3} exceeds the scattering table ({:.3})", self.lambda_cap)));
        }
        let mut la = 1e-2f64.min(end);
        la = match self.kind {
            KernelKind::Schrodinger => la.min(0.5 / at.sqrt()),
            _ => la.min(0.5 / at),
        };
        la = la.min(1.0 / (theta_max + 1.0)).max(self.lo);
        let lmin = (-S_MAX).exp();
        let mut total = ZERO;
        let mut err = 0.0;
        let mut buf = vec![ZERO; np];
        let mut failure: Option<Error> = None;
        if la > self.lo.max(lmin) {
            let s_lo = -la.ln();
            let s_hi = -(self.lo.max(lmin)).ln();
            let mut f = |s: f64| {
                let l = (-s).exp();
                match self.integrand(l, &mut buf) {
                    Ok(v) => v * l,
                    Err(e) => {
                        failure.get_or_insert(e);
                        ZERO
                    }
                }
            };
            let (v, e) = adaptive_gk(s_lo, s_hi, self.tol, 40, &mut f);
            total += v;
            err += e;
            if self.lo < lmin {
                // integrand is O(λ) near 0
                err += f(S_MAX).norm();
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
        // Filon panels
        let mut cap = 2.0f64;
        if self.kind == KernelKind::Schrodinger {
            cap = cap.min(2.0 / at.sqrt());
        }
        if self.inner_freq > 0.0 {
            cap = cap.min(4.0 / self.inner_freq);
        }
        let n = rule.gl.len();
        let mut vals = vec![vec![ZERO; np]; n];
        let mut g = vec![ZERO; n];
        let mut a = la;
        while a < end {
            let b = (a + (0.5 * a).min(cap)).min(end);
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (j, x) in rule.gl.nodes.iter().enumerate() {
                (self.amps)(c + h * x, &mut vals[j])?;
            }
            let dphi = self.kind.dphase(t, c);
            let base = self.kind.phase(t, c);
            for k in 0..np {
                for (j, x) in rule.gl.nodes.iter().enumerate() {
                    let l = c + h * x;
                    let rest = self.kind.phase(t, l) - base - dphi * (l - c);
                    g[j] = vals[j][k] * Complex64::from_polar(1.0, rest);
                }
                let omega = dphi + self.thetas[k];
                let (v, e) = rule.panel(a, b, omega, &g);
                total += v * Complex64::from_polar(1.0, base + self.thetas[k] * c);
                err += e;
            }
            a = b;
        }
        if tail {
            let (v, e) = self.tail(end, &mut buf)?;
            total += v;
            err += e;
        }
        Ok((total, err))
    }

    /// ∫_Λ^∞ by three integrations by parts per piece.
    fn tail(&self, lam: f64, buf: &mut [Complex64]) -> Result<(Complex64, f64)> {
        let np = self.thetas.len();
        let delta = 0.02 * lam;
        let mut amp = vec![vec![ZERO; np]; 5];
        for (j, row) in amp.iter_mut().enumerate() {
            (self.amps)(lam + (j as f64 - 2.0) * delta, buf)?;
            row.copy_from_slice(buf);
        }
        let mut total = ZERO;
        let mut err = 0.0;
        for k in 0..np {
            let th = self.thetas[k];
            let dpsi = |l: f64| self.kind.dphase(self.t, l) + th;
            for j in 0..5 {
                let l = lam + (j as f64 - 2.0) * delta;
                if dpsi(l).abs() < 1.0 {
                    if amp[j][k].norm() == 0.0 {
                        continue;
                    }
                    return Err(Error::Quadrature(format!(
                        "non-decaying tail on the light cone (t = {}, θ = {th}); the unsmeared kernel is singular there",
                        self.t
                    )));
                }
            }
            let h0: Vec<Complex64> = (0..5)
                .map(|j| {
                    let l = lam + (j as f64 - 2.0) * delta;
                    amp[j][k] / (I * dpsi(l))
                })
                .collect();
            let h1: Vec<Complex64> = (1..4)
                .map(|j| {
                    let l = lam + (j as f64 - 2.0) * delta;
                    -(h0[j + 1] - h0[j - 1]) / (2.0 * delta) / (I * dpsi(l))
                })
                .collect();
            let h2 = -(h1[2] - h1[0]) / (2.0 * delta) / (I * dpsi(lam));
            let phase = Complex64::from_polar(1.0, self.kind.phase(self.t, lam) + th * lam);
            total += -phase * (h0[2] + h1[1] + h2);
            err += h2.norm() + 1e-9 * h0[2].norm();
        }
        Ok((total, err))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub t: f64,
    pub xi: f64,
    pub xi_prime: f64,
    pub kind: KernelKind,
    pub band: Option<Band>,
    /// unweighted value of the λ-integral
    pub value: Complex64,
    /// (⟨ξ⟩⟨ξ′⟩)^{−d/2}
    pub weight: f64,
    pub err_est: f64,
}

impl KernelSample {
    pub fn abs_weighted(&self) -> f64 {
        self.value.norm() * self.weight
    }
}

/// Test function on a grid with its derivative (piecewise cubic Hermite).
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl TestFunction {
    pub fn new(xs: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() || xs.len() != derivs.len() {
            return Err(Error::Config("test function needs matching grids of length ≥ 2".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("test function grid must be strictly increasing".into()));
        }
        if values.iter().chain(&derivs).any(|v| !v.is_finite()) {
            return Err(Error::Domain("test function is not integrable on its grid".into()));
        }
        Ok(TestFunction { xs, values, derivs })
    }

    /// exp(1 − 1/(1 − ((x−c)/r)²)) on |x − c| < r, sampled at n points.
    pub fn bump(center: f64, radius: f64, n: usize) -> Self {
        let mut xs = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for k in 0..n {
            let x = center - radius + 2.0 * radius * k as f64 / (n - 1) as f64;
            let u = (x - center) / radius;
            let (v, d) = if u.abs() < 1.0 {
                let q = 1.0 - u * u;
                let v = (1.0 - 1.0 / q).exp();
                (v, v * (-2.0 * u / (q * q)) / radius)
            } else {
                (0.0, 0.0)
            };
            xs.push(x);
            values.push(v);
            derivs.push(d);
        }
        TestFunction { xs, values, derivs }
    }

    pub fn zero(a: f64, b: f64) -> Self {
        TestFunction { xs: vec![a, b], values: vec![0.0; 2], derivs: vec![0.0; 2] }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// (φ, φ′) at x (zero outside the grid).
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (a, b) = self.support();
        if x < a || x > b {
            return (0.0, 0.0);
        }
        let k = self.xs.partition_point(|p| *p <= x).clamp(1, self.xs.len() - 1) - 1;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1, d0, d1) = (self.values[k], self.values[k + 1], self.derivs[k] * h, self.derivs[k + 1] * h);
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        let v = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dv = ((6.0 * s * s - 6.0 * s) * y0 + (3.0 * s * s - 4.0 * s + 1.0) * d0 + (-6.0 * s * s + 6.0 * s) * y1 + (3.0 * s * s - 2.0 * s) * d1) / h;
        (v, dv)
    }

    /// ‖φ‖₁ + ‖φ′‖₁.
    pub fn norm(&self) -> f64 {
        let gl = GaussLegendre::new(8);
        self.xs
            .windows(2)
            .map(|w| gl.integrate(w[0], w[1], |x| {
                let (v, d) = self.eval(x);
                v.abs() + d.abs()
            }))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().chain(&self.derivs).all(|v| *v == 0.0)
    }
}

/// ξ′-quadrature nodes (and weights) on the support of φ, split at ξ.
pub fn smear_nodes(phi: &TestFunction, xi: f64) -> Vec<(f64, f64)> {
    let (a, b) = phi.support();
    let mut cuts = vec![a];
    if xi > a && xi < b {
        cuts.push(xi);
    }
    cuts.push(b);
    let gl = GaussLegendre::new(12);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let m = ((w[1] - w[0]) / 0.25).ceil().max(1.0) as usize;
        for p in 0..m {
            let (x0, x1) = (w[0] + (w[1] - w[0]) * p as f64 / m as f64, w[0] + (w[1] - w[0]) * (p + 1) as f64 / m as f64);
            let (c, h) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                out.push((c + h * x, h * wt));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearedSample {
    pub t: f64,
    pub xi: f64,
    pub value: Complex64,
    /// ‖φ‖₁ + ‖φ′‖₁
    pub norm: f64,
    /// |value| / (t^{−1/2}·norm)
    pub ratio: f64,
    pub err_est: f64,
}

/// Kernel evaluator over a precomputed table.
#[derive(Debug, Clone)]
pub struct KernelEngine {
    pub table: ScatteringTable,
    pub lambda_low: f64,
    pub tol: f64,
    rule: FilonRule,
}

impl KernelEngine {
    pub fn new(medium: &Medium, xis: &[f64], lambda_max: f64) -> Result<Self> {
        let table = ScatteringTable::build(medium, xis, lambda_max)?;
        Ok(KernelEngine { table, lambda_low: medium.lambda_low, tol: DEFAULT_TOL, rule: FilonRule::new(20) })
    }

    /// Table size needed for kernels at time t over the given pairs.
    pub fn lambda_max_for(kind: KernelKind, t: f64, pairs: &[(f64, f64)]) -> f64 {
        let th = pairs.iter().fold(0.0f64, |a, &(x, y)| a.max(x.abs() + y.abs()));
        1.25 * tail_start(kind, t, th, 0.0)
    }

    fn idx(&self, xi: f64) -> Result<usize> {
        self.table.index_of(xi).ok_or_else(|| Error::Domain(format!("ξ = {xi} is not a point of the scattering table")))
    }

    fn band_weight(&self, band: Option<Band>, xi: f64, xip: f64, l: f64) -> f64 {
        let chi = energy_cutoff(l, self.lambda_low);
        match band {
            None => 1.0,
            Some(Band::HighEnergy) => 1.0 - chi,
            Some(b) => {
                let (la, lb) = (low_region(xi, l), low_region(xip, l));
                let (oa, ob) = (1.0 - la, 1.0 - lb);
                chi * match b {
                    Band::LowLow => la * lb,
                    Band::OscOsc | Band::SameSideOsc => oa * ob,
                    Band::OscLow => oa * lb + la * ob,
                    Band::HighEnergy => unreachable!(),
                }
            }
        }
    }

    pub fn evolution_kernel(&self, kind: KernelKind, t: f64, xi: f64, xip: f64) -> Result<KernelSample> {
        self.sample(kind, None, t, xi, xip)
    }

    pub fn band_kernel(&self, kind: KernelKind, band: Band, t: f64, xi: f64, xip: f64) -> Result<KernelSample> {
        if !band.admits(xi, xip) {
            return Err(Error::Domain(format!("band {} does not apply to (ξ, ξ′) = ({xi}, {xip})", band.name())));
        }
        self.sample(kind, Some(band), t, xi, xip)
    }

    fn sample(&self, kind: KernelKind, band: Option<Band>, t: f64, xi: f64, xip: f64) -> Result<KernelSample> {
        if !(t != 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("kernel needs t ≠ 0, got {t}")));
        }
        let (hi, lo) = ordered(xi, xip);
        let (ih, il) = (self.idx(hi)?, self.idx(lo)?);
        let tab = &self.table;
        let th = {
            let loc = tab.locate(1.0)?;
            let mut c = [ZERO; 2];
            tab.pair_terms(&loc, 1.0, (hi, ih), (lo, il), &mut c)
        };
        let thetas = [th[0], -th[0], th[1], -th[1]];
        let amps = |l: f64, out: &mut [Complex64]| -> Result<()> {
            let loc = tab.locate(l)?;
            let mut c = [ZERO; 2];
            tab.pair_terms(&loc, l, (hi, ih), (lo, il), &mut c);
            let wgt = self.band_weight(band, xi, xip, l);
            // λ Im(c e^{iλθ}) = λ/(2i) (c e^{iλθ} − c̄ e^{−iλθ})
            let s = wgt * l / (2.0 * I);
            out[0] = s * c[0];
            out[1] = -s * c[0].conj();
            if out.len() > 2 {
                out[2] = s * c[1];
                out[3] = -s * c[1].conj();
            }
            Ok(())
        };
        let (lo_l, hi_l) = match band {
            None => (0.0, None),
            Some(Band::HighEnergy) => (0.5 * self.lambda_low, None),
            Some(_) => (0.0, Some(self.lambda_low)),
        };
        let np = if th[1] == 0.0 && hi >= 0.0 && lo < 0.0 { 2 } else { 4 };
        let li = LambdaIntegral { kind, t, thetas: &thetas[..np], amps: &amps, lo: lo_l, hi: hi_l, inner_freq: 0.0, lambda_cap: tab.lambda_max, tol: self.tol };
        let (value, err_est) = li.run(&self.rule).map_err(|e| Error::Quadrature(format!("kernel at (t, ξ, ξ′) = ({t}, {xi}, {xip}): {e}")))?;
        if err_est > ERROR_BUDGET * value.norm().max(1.0) {
            return Err(Error::Quadrature(format!("error target unreachable at (t, ξ, ξ′) = ({t}, {xi}, {xip}): estimate {err_est:e}")));
        }
        Ok(KernelSample { t, xi, xi_prime: xip, kind, band, value, weight: spatial_weight(xi, xip, tab.d), err_est })
    }

    /// ∫ (high-energy wave kernel)(t, ξ, ξ′) φ(ξ′) dξ′ with the weights
    /// (⟨ξ⟩⟨ξ′⟩)^{−1/2} inside; the table must contain ξ and
    /// [`smear_nodes`]`(φ, ξ)`.
    pub fn wave_smeared(&self, kind: KernelKind, xi: f64, t: f64, phi: &TestFunction) -> Result<SmearedSample> {
        if kind == KernelKind::Schrodinger {
            return Err(Error::Config("wave_smeared needs a wave kind".into()));
        }
        let norm = phi.norm();
        if phi.is_zero() {
            return Ok(SmearedSample { t, xi, value: ZERO, norm, ratio: 0.0, err_est: 0.0 });
        }
        let tab = &self.table;
        let ix = self.idx(xi)?;
        let nodes: Vec<(f64, f64, usize)> = smear_nodes(phi, xi)
            .into_iter()
            .map(|(x, w)| {
                let (v, _) = phi.eval(x);
                self.idx(x).map(|i| (x, w * v * spatial_weight(xi, x, tab.d), i))
            })
            .collect::<Result<_>>()?;
        let (a, b) = phi.support();
        let inner = (xi - a).abs().max((xi - b).abs()) + xi.abs().max(0.0) + a.abs().max(b.abs());
        let thetas = [0.0];
        let amps = |l: f64, out: &mut [Complex64]| -> Result<()> {
            let loc = tab.locate(l)?;
            let wgt = 1.0 - energy_cutoff(l, self.lambda_low);
            let mut s = 0.0;
            let mut c = [ZERO; 2];
            for &(x, w, i) in &nodes {
                let (hi, lo) = if xi >= x { ((xi, ix), (x, i)) } else { ((x, i), (xi, ix)) };
                let th = tab.pair_terms(&loc, l, hi, lo, &mut c);
                let f = c[0] * Complex64::from_polar(1.0, l * th[0]) + c[1] * Complex64::from_polar(1.0, l * th[1]);
                s += w * f.im;
            }
            out[0] = Complex64::new(wgt * l * s, 0.0);
            Ok(())
        };
        let li = LambdaIntegral {
            kind,
            t,
            thetas: &thetas,
            amps: &amps,
            lo: 0.5 * self.lambda_low,
            hi: None,
            inner_freq: inner,
            lambda_cap: tab.lambda_max,
            tol: self.tol,
        };
        let (value, err_est) = li.run(&self.rule).map_err(|e| Error::Quadrature(format!("smeared wave kernel at (t, ξ) = ({t}, {xi}): {e}")))?;
        let ratio = if norm > 0.0 { value.norm() * t.abs().sqrt() / norm } else { 0.0 };
        Ok(SmearedSample { t, xi, value, norm, ratio, err_est })
    }
}

/// Default sup grid ±{0, 1, 3, 10, 30, 10², 3·10², 10³}.
pub fn default_spatial_grid() -> Vec<f64> {
    let base = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];
    let mut v: Vec<f64> = base.iter().map(|x| -x).collect();
    v.push(0.0);
    v.extend(base);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Unordered pairs of the grid plus the moving pairs ξ = ξ′ + 2t,
/// restricted to the band's sign configuration.
pub fn sample_pairs(grid: &[f64], t: f64, band: Option<Band>, xi_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &a) in grid.iter().enumerate() {
        for &b in &grid[..=i] {
            out.push((a, b));
        }
    }
    for &b in grid {
        let a = b + 2.0 * t.abs();
        if a <= xi_max {
            out.push((a, b));
        }
    }
    out.retain(|&(a, b)| band.map_or(true, |bd| bd.admits(a, b)));
    out
}

/// Table size needed by a decay scan.
pub fn scan_lambda_max(kind: KernelKind, band: Option<Band>, t_grid: &[f64], grid: &[f64], xi_max: f64) -> f64 {
    t_grid
        .iter()
        .map(|&t| KernelEngine::lambda_max_for(kind, t.abs(), &sample_pairs(grid, t, band, xi_max)))
        .fold(0.0, f64::max)
}

/// Every spatial point needed by `sample_pairs` over the t-grid.
pub fn scan_points(grid: &[f64], t_grid: &[f64], xi_max: f64) -> Vec<f64> {
    let mut v = grid.to_vec();
    for &t in t_grid {
        for &b in grid {
            let a = b + 2.0 * t.abs();
            if a <= xi_max {
                v.push(a);
            }
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub t: f64,
    pub sup_abs: f64,
    pub argmax: (f64, f64),
    pub max_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub kind: KernelKind,
    pub band: Option<Band>,
    pub rows: Vec<DecayRow>,
    pub fit_alpha: f64,
    pub fit_c: f64,
    pub fit_r2: f64,
    pub target_alpha: f64,
}

/// Fit sup ≈ C t^{−α} over the last decade of the t-grid.
pub fn fit_decay(rows: &[DecayRow]) -> (f64, f64, f64) {
    let tmax = rows.iter().fold(0.0f64, |m, r| m.max(r.t));
    let sel: Vec<&DecayRow> = rows.iter().filter(|r| r.t >= tmax / 10.0 * (1.0 - 1e-9)).collect();
    let x: Vec<f64> = sel.iter().map(|r| r.t.ln()).collect();
    let y: Vec<f64> = sel.iter().map(|r| r.sup_abs.ln()).collect();
    let (slope, icpt, r2) = linear_fit(&x, &y);
    (-slope, icpt.exp(), r2)
}

/// sup over the spatial pairs of |weighted kernel| per t, with the decay fit.
pub fn decay_scan_with(engine: &KernelEngine, kind: KernelKind, band: Option<Band>, t_grid: &[f64], grid: &[f64], xi_max: f64) -> Result<DecayReport> {
    if t_grid.len() < 2 {
        return Err(Error::Config("decay scan needs at least 2 times".into()));
    }
    let (tmin, tmax) = t_grid.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    if tmax / tmin < 100.0 * (1.0 - 1e-9) {
        return Err(Error::Config("decay scan needs at least 2 decades of t".into()));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let pairs = sample_pairs(grid, t, band, xi_max);
        let samples: Vec<KernelSample> = pairs
            .par_iter()
            .map(|&(a, b)| match band {
                None => engine.evolution_kernel(kind, t, a, b),
                Some(bd) => engine.band_kernel(kind, bd, t, a, b),
            })
            .collect::<Result<_>>()?;
        let best = samples.iter().max_by(|x, y| x.abs_weighted().partial_cmp(&y.abs_weighted()).unwrap()).unwrap();
        let max_err = samples.iter().map(|s| s.err_est * s.weight).fold(0.0, f64::max);
        rows.push(DecayRow { t, sup_abs: best.abs_weighted(), argmax: (best.xi, best.xi_prime), max_err });
    }
    let (fit_alpha, fit_c, fit_r2) = fit_decay(&rows);
    Ok(DecayReport { kind, band, rows, fit_alpha, fit_c, fit_r2, target_alpha: kind.target_alpha() })
}

/// Build the table for the scan and run it.
pub fn decay_scan(medium: &Medium, kind: KernelKind, band: Option<Band>, t_grid: &[f64], grid: &[f64]) -> Result<DecayReport> {
    let (lo, hi) = medium.chart.xi_range();
    let xi_max = hi.min(-lo);
    let pts = scan_points(grid, t_grid, xi_max);
    let engine = KernelEngine::new(medium, &pts, scan_lambda_max(kind, band, t_grid, grid, xi_max))?;
    decay_scan_with(&engine, kind, band, t_grid, grid, xi_max)
}

/// Single kernel value with a table built just for (ξ, ξ′).
pub fn evolution_kernel(medium: &Medium, kind: KernelKind, t: f64, xi: f64, xip: f64) -> Result<KernelSample> {
    let engine = KernelEngine::new(medium, &[xi, xip], KernelEngine::lambda_max_for(kind, t.abs(), &[(xi, xip)]))?;
    engine.evolution_kernel(kind, t, xi, xip)
}

/// ∫₀^∞ e^{itλ²} λ·½cos(λΔ) dλ = ¼√(π/t) e^{iπ/4} e^{−iΔ²/(4t)}: the
/// cylinder kernel (t > 0).
pub fn free_schrodinger_kernel(t: f64, delta: f64) -> Complex64 {
    0.25 * (std::f64::consts::PI / t).sqrt() * Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 - delta * delta / (4.0 * t))
}

/// Whether the profile is the flat cylinder (closed forms apply).
pub fn is_flat(medium: &Medium) -> bool {
    medium.profile.kind == ProfileKind::Cylinder
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_profile, ProfileDoc};

    fn medium(kind: &str) -> Medium {
        let mut doc = ProfileDoc::new(kind);
        if kind == "hyperboloid" {
            doc = doc.with_param("a", 1.0);
        }
        Medium::new(&make_profile(&doc).unwrap()).unwrap()
    }

    #[test]
    fn smooth_partition() {
        for l in [1e-4, 3e-3, 6e-3, 9e-3, 2e-2] {
            let c = energy_cutoff(l, 1e-2);
            assert!((0.0..=1.0).contains(&c));
        }
        assert_eq!(energy_cutoff(5e-3, 1e-2), 1.0);
        assert_eq!(energy_cutoff(1e-2, 1e-2), 0.0);
        assert_eq!(low_region(10.0, 0.04), 1.0);
        assert_eq!(low_region(10.0, 0.2), 0.0);
        assert!((low_region(10.0, 0.1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cylinder_density_is_cosine() {
        let m = medium("cylinder");
        for (a, b, l) in [(3.0, -2.0, 0.7), (1.0, 4.0, 2.5), (0.0, 0.0, 0.1)] {
            let d = spectral_density(&m, a, b, l).unwrap();
            assert!((d - (l * (a - b)).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn cylinder_kernel_matches_fresnel() {
        let m = medium("cylinder");
        let e = KernelEngine::new(&m, &[-3.0, 0.0, 5.0], 200.0).unwrap();
        for (t, a, b) in [(10.0, 5.0, -3.0), (300.0, 0.0, 0.0), (50.0, 5.0, 0.0)] {
            let s = e.evolution_kernel(KernelKind::Schrodinger, t, a, b).unwrap();
            let exact = free_schrodinger_kernel(t, a - b);
            assert!((s.value - exact).norm() < 1e-8, "t={t}: {} vs {exact}", s.value);
        }
    }

    #[test]
    fn table_density_matches_direct() {
        let m = medium("hyperboloid");
        let pts = [-30.0, -1.0, 0.0, 2.0, 40.0];
        let tab = ScatteringTable::build(&m, &pts, 20.0).unwrap();
        for l in [3e-7, 2e-3, 0.37, 4.2] {
            for (a, b) in [(40.0, -30.0), (2.0, 0.0), (-1.0, -30.0), (40.0, 40.0)] {
                let d0 = spectral_density(&m, a, b, l).unwrap();
                let d1 = tab.density(a, b, l).unwrap();
                assert!((d0 - d1).abs() < 1e-8 * d0.abs().max(1.0), "λ={l} ({a},{b}): {d0} vs {d1}");
            }
        }
    }

    #[test]
    fn hyperboloid_kernel_symmetries() {
        let m = medium("hyperboloid");
        let pts = [-100.0, -3.0, 0.0, 7.0, 300.0];
        let e = KernelEngine::new(&m, &pts, 60.0).unwrap();
        for (t, a, b) in [(50.0, 7.0, -100.0), (400.0, 300.0, 7.0), (20.0, -3.0, -100.0), (1000.0, 0.0, 0.0)] {
            let k = e.evolution_kernel(KernelKind::Schrodinger, t, a, b).unwrap();
            let r = e.evolution_kernel(KernelKind::Schrodinger, t, b, a).unwrap();
            let back = e.evolution_kernel(KernelKind::Schrodinger, -t, a, b).unwrap();
            assert!((k.value - r.value).norm() < 1e-14);
            assert!((k.value.conj() - back.value).norm() < 1e-8 * k.value.norm().max(1e-6));
            let mut sum = ZERO;
            for band in Band::partition_for(a, b) {
                sum += e.band_kernel(KernelKind::Schrodinger, band, t, a, b).unwrap().value;
            }
            assert!((sum - k.value).norm() < 1e-5 * k.value.norm(), "partition at t={t}");
        }
    }

    #[test]
    fn diagonal_density_is_nonnegative() {
        let m = medium("hyperboloid");
        for xi in [-500.0, -2.0, 0.0, 1.5, 80.0] {
            for l in [1e-6, 1e-3, 0.05, 1.0, 12.0] {
                assert!(spectral_density(&m, xi, xi, l).unwrap() >= -1e-10);
            }
        }
    }

    #[test]
    fn band_checks_sign_configuration() {
        let m = medium("cylinder");
        let e = KernelEngine::new(&m, &[-1.0, 2.0], 20.0).unwrap();
        assert!(e.band_kernel(KernelKind::Schrodinger, Band::SameSideOsc, 10.0, 2.0, -1.0).is_err());
        assert!(e.band_kernel(KernelKind::Schrodinger, Band::OscOsc, 10.0, 2.0, -1.0).is_ok());
        assert!(e.evolution_kernel(KernelKind::Schrodinger, 10.0, 2.0, 5.0).is_err());
    }

    #[test]
    fn smeared_zero_function_gives_zero() {
        let m = medium("cylinder");
        let e = KernelEngine::new(&m, &[0.0], 20.0).unwrap();
        let s = e.wave_smeared(KernelKind::WavePlus, 0.0, 100.0, &TestFunction::zero(-1.0, 1.0)).unwrap();
        assert_eq!(s.ratio, 0.0);
    }
}
