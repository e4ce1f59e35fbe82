//! Jost solutions f±(·,λ), the zero-energy basis u₀, u₁ and its
//! perturbation u_j(·,λ), connection coefficients, the Wronskian and the
//! reflection/transmission pair.
//!
//! Conventions: the bracket is W(f,g) = f g′ − f′ g, so W(u₀,u₁) = 1 and
//! f± = a± u₀(·,λ) + b± u₁(·,λ) with a± = W(f±,u₁), b± = −W(f±,u₀). The
//! scalar Wronskian is W(λ) = W(f₊,f₋) = a₊b₋ − a₋b₊, which equals −2iλ for
//! free plane waves and makes the spectral density 2λ·Im[f₊f₋/W] positive.

pub mod validate;

use crate::geometry::{fit_conical_constants, ArclengthChart, PotentialTable, ProfileKind, ProfileSpec};
use crate::hankel::{f0_reference, f0_stripped, Regime, WaveSample};
use crate::ode::{apply, Magnus};
use crate::quad::GaussLegendre;
use crate::volterra::{volterra_solve, Direction, Factors, SeparableKernel, VolterraProblem};
use crate::{Complex64, Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub const LAMBDA_LOW: f64 = 1e-2;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// W(f,g) = f g′ − f′ g for (value, derivative) pairs.
pub fn bracket(f: [Complex64; 2], g: [Complex64; 2]) -> Complex64 {
    f[0] * g[1] - f[1] * g[0]
}

fn conj2(f: [Complex64; 2]) -> [Complex64; 2] {
    [f[0].conj(), f[1].conj()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// How f₊ is produced on the far half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// oscillatory when λ·ξ_extent ≥ 4, Hankel reference otherwise
    Auto,
    Oscillatory,
    HankelReference,
}

/// Exactly solvable tail used to close the equations at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Free,
    /// −1/(4(ξ−c)²), solved by f₀(ξ−c, λ)
    InverseSquare(f64),
}

impl Reference {
    /// e^{−iλy}·f_ref(y) and its y-derivative.
    fn m(&self, y: f64, lambda: f64) -> Result<(Complex64, Complex64)> {
        match *self {
            Reference::Free => Ok((ONE, ZERO)),
            Reference::InverseSquare(c) => f0_stripped(y - c, lambda),
        }
    }

    /// f_ref without its constant phase: (φ, φ′).
    fn phi(&self, y: f64, lambda: f64) -> Result<[Complex64; 2]> {
        match *self {
            Reference::Free => {
                let e = Complex64::from_polar(1.0, lambda * y);
                Ok([e, I * lambda * e])
            }
            Reference::InverseSquare(c) => {
                let s = f0_reference(y - c, lambda)?;
                Ok([s.value, s.dvalue])
            }
        }
    }

    fn phase(&self, lambda: f64) -> Complex64 {
        match *self {
            Reference::Free => ONE,
            Reference::InverseSquare(c) => Complex64::from_polar(1.0, lambda * c),
        }
    }

    fn v(&self, y: f64) -> f64 {
        match *self {
            Reference::Free => 0.0,
            Reference::InverseSquare(c) => -0.25 / ((y - c) * (y - c)),
        }
    }

    fn shift(&self) -> f64 {
        match *self {
            Reference::Free => 0.0,
            Reference::InverseSquare(c) => c,
        }
    }
}

/// Exact solutions of 𝓗u = 0: u₀ = r^{d/2}, u₁ = u₀·∫₀^ξ r^{−d}.
#[derive(Debug, Clone)]
pub struct ZeroEnergyBasis {
    profile: ProfileSpec,
    xs: Vec<f64>,
    cum: Vec<f64>,
    rule: GaussLegendre,
}

/// u₀, u₁ and their ξ-derivatives at one point, with I = u₁/u₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSample {
    pub u0: f64,
    pub du0: f64,
    pub u1: f64,
    pub du1: f64,
    pub integral: f64,
    /// dξ/dx at the point
    pub speed: f64,
}

impl ZeroEnergyBasis {
    pub fn new(chart: &ArclengthChart) -> Self {
        let profile = chart.profile.clone();
        let rule = GaussLegendre::new(20);
        let (xs, _) = chart.nodes();
        let d = profile.d as f64;
        let dens = |x: f64| profile.speed(x) * profile.r(x).powf(-d);
        let i0 = xs.iter().position(|x| *x == 0.0).unwrap_or(0);
        let mut cum = vec![0.0; xs.len()];
        for k in i0 + 1..xs.len() {
            cum[k] = cum[k - 1] + rule.integrate(xs[k - 1], xs[k], dens);
        }
        for k in (0..i0).rev() {
            cum[k] = cum[k + 1] - rule.integrate(xs[k], xs[k + 1], dens);
        }
        ZeroEnergyBasis { profile: profile.clone(), xs: xs.to_vec(), cum, rule }
    }

    /// ∫₀^{ξ(x)} r^{−d} dξ.
    pub fn integral_x(&self, x: f64) -> f64 {
        let d = self.profile.d as f64;
        let k = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.cum[i],
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let (a, b) = (self.xs[k], self.xs[k + 1]);
        let dens = |y: f64| self.profile.speed(y) * self.profile.r(y).powf(-d);
        if (x - a).abs() <= (b - x).abs() {
            self.cum[k] + self.rule.integrate(a, x, dens)
        } else {
            self.cum[k + 1] - self.rule.integrate(x, b, dens)
        }
    }

    pub fn at_x(&self, x: f64) -> ZeroSample {
        let d = self.profile.d as f64;
        let [r, dr, _, _] = self.profile.eval(x);
        let s = (1.0 + dr * dr).sqrt();
        let rho = 0.5 * d * dr / (r * s);
        let u0 = r.powf(0.5 * d);
        let integral = self.integral_x(x);
        let u1 = u0 * integral;
        ZeroSample { u0, du0: rho * u0, u1, du1: rho * u1 + r.powf(-0.5 * d), integral, speed: s }
    }
}

/// Checkpointed solution(s) of 𝓗f = λ²f; values between checkpoints come
/// from short Magnus hops.
#[derive(Debug, Clone)]
struct Track {
    xs: Vec<f64>,
    ys: Vec<Vec<[Complex64; 2]>>,
}

impl Track {
    fn from_pairs(mut pts: Vec<(f64, Vec<[Complex64; 2]>)>) -> Self {
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pts.dedup_by(|a, b| a.0 == b.0);
        let (xs, ys) = pts.into_iter().unzip();
        Track { xs, ys }
    }

    fn eval<F: Fn(f64) -> f64>(&self, q: &F, magnus: &Magnus, y: f64) -> Result<Vec<[Complex64; 2]>> {
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&y).unwrap()) {
            Ok(i) => return Ok(self.ys[i].clone()),
            Err(i) => {
                if i == 0 {
                    0
                } else if i == self.xs.len() {
                    i - 1
                } else if (y - self.xs[i - 1]) < (self.xs[i] - y) {
                    i - 1
                } else {
                    i
                }
            }
        };
        let t = magnus.transfer(q, self.xs[i], y)?;
        Ok(self.ys[i].iter().map(|v| apply(&t, *v)).collect())
    }

    fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }
}

/// Everything that depends on the profile but not on λ.
#[derive(Debug, Clone)]
pub struct Medium {
    pub profile: ProfileSpec,
    pub chart: ArclengthChart,
    pub table: PotentialTable,
    pub zero: ZeroEnergyBasis,
    pub flat: bool,
    pub symmetric: bool,
    /// c_∞ of the right and left ends (None when not conical).
    pub c_inf: [Option<f64>; 2],
    pub magnus: Magnus,
    pub lambda_low: f64,
}

impl Medium {
    pub fn new(profile: &ProfileSpec) -> Result<Self> {
        let chart = ArclengthChart::new(profile)?;
        let table = PotentialTable::new(&chart)?;
        let zero = ZeroEnergyBasis::new(&chart);
        let flat = profile.kind == ProfileKind::Cylinder;
        let symmetric = profile.is_symmetric();
        let right = if profile.conical_right { Some(fit_conical_constants(&chart)?.c_inf) } else { None };
        let left = if !profile.conical_left {
            None
        } else if symmetric {
            right
        } else {
            Some(fit_conical_constants(&chart.mirrored()?)?.c_inf)
        };
        Ok(Medium { profile: profile.clone(), chart, table, zero, flat, symmetric, c_inf: [right, left], magnus: Magnus::default(), lambda_low: LAMBDA_LOW })
    }

    /// V on the side's half-line coordinate y (y = ξ for +, y = −ξ for −).
    pub fn v_side(&self, side: Side, y: f64) -> f64 {
        match side {
            Side::Plus => self.table.v(y),
            Side::Minus => self.table.v(-y),
        }
    }

    /// Extent of the chart image on the side, as a positive number.
    pub fn extent(&self, side: Side) -> f64 {
        let (lo, hi) = self.chart.xi_range();
        match side {
            Side::Plus => hi,
            Side::Minus => -lo,
        }
    }

    fn reference(&self, side: Side) -> Reference {
        let idx = if side == Side::Plus { 0 } else { 1 };
        match self.c_inf[idx] {
            Some(c) if self.profile.d == 1 => Reference::InverseSquare(c),
            _ => Reference::Free,
        }
    }

    pub fn zero_at(&self, xi: f64) -> Result<ZeroSample> {
        Ok(self.zero.at_x(self.chart.x_of_arclength(xi)?))
    }

    /// ODE coefficient for the side: y″ = (V − λ²) y.
    fn q_side(&self, side: Side, lambda: f64) -> impl Fn(f64) -> f64 + '_ {
        move |y| self.v_side(side, y) - lambda * lambda
    }
}

/// f for one side in that side's coordinate y, with f ~ e^{iλy} as y → ∞.
#[derive(Debug, Clone)]
pub struct HalfJost {
    pub lambda: f64,
    pub side: Side,
    pub regime: Regime,
    pub flat: bool,
    /// end of the Volterra region; the reference tail is used beyond it
    pub y_end: f64,
    pub mu: f64,
    pub sweeps: usize,
    reference: Reference,
    track: Option<Track>,
}

fn inward_targets(from: f64, to: f64, lambda: f64) -> Vec<f64> {
    // checkpoints every ≤ 0.3·y and ≤ π/(2λ), ending at `to`
    let mut v = Vec::new();
    let mut y = from;
    while y > to {
        let step = (0.3 * y.abs().max(1.0)).min(0.5 * PI / lambda).max(1e-3);
        y = (y - step).max(to);
        v.push(y);
    }
    v
}

impl HalfJost {
    fn flat(side: Side, lambda: f64) -> Self {
        HalfJost { lambda, side, regime: Regime::Oscillatory, flat: true, y_end: f64::INFINITY, mu: 0.0, sweeps: 0, reference: Reference::Free, track: None }
    }

    pub fn build(medium: &Medium, side: Side, lambda: f64, route: Route) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("Jost solutions need λ > 0, got {lambda}")));
        }
        if medium.flat {
            return Ok(Self::flat(side, lambda));
        }
        let ext = medium.extent(side);
        let route = match route {
            Route::Auto if lambda * ext >= 4.0 => Route::Oscillatory,
            Route::Auto => Route::HankelReference,
            r => r,
        };
        match route {
            Route::Oscillatory => Self::build_oscillatory(medium, side, lambda),
            _ => Self::build_hankel(medium, side, lambda),
        }
    }

    /// Truncation point of the oscillatory m₊ equation.
    pub fn oscillatory_xi_max(ext: f64, lambda: f64) -> f64 {
        ext.min((100.0 / lambda).max(300.0 * lambda.powf(-1.0 / 3.0)))
    }

    fn build_oscillatory(medium: &Medium, side: Side, lambda: f64) -> Result<Self> {
        let ext = medium.extent(side);
        let xm = Self::oscillatory_xi_max(ext, lambda);
        if lambda * xm < 4.0 {
            return Err(Error::Domain(format!(
                "λ = {lambda:e} too small for the oscillatory route (λ·ξ_max = {:.3} < 4); enlarge x_max or use the low-energy path",
                lambda * xm
            )));
        }
        let ya = 2.0 / lambda;
        let reference = medium.reference(side);
        let (mr, dmr) = reference.m(xm, lambda)?;
        let two_il = I * (2.0 * lambda);
        // tail ∫_{ξ_max}^∞ K·V_ref·m_ref in closed form
        let big_a = -dmr;
        let big_b = big_a - two_il * (mr - ONE);
        let forcing = move |y: f64| {
            let e = Complex64::from_polar(1.0, 2.0 * lambda * (xm - y));
            [ONE + (e * big_a - big_b) / two_il, -e * big_a]
        };
        let kernel = SeparableKernel(|y: f64| {
            let e = Complex64::from_polar(1.0, 2.0 * lambda * (xm - y));
            let v = medium.v_side(side, y);
            Factors { rank: 2, a: [e / two_il, -ONE / two_il], da: [-e, ZERO], b: [e.conj() * v, Complex64::new(v, 0.0)] }
        });
        let mut mesh = vec![ya];
        let mut y = ya;
        while y < xm {
            y = (y + (2.0 * PI / lambda).min(0.5 * y)).min(xm);
            mesh.push(y);
        }
        let mut problem = VolterraProblem::new(&kernel, &forcing, ya, xm, Direction::Backward).with_mesh(mesh.clone());
        problem.order = 20;
        let sol = volterra_solve(&problem)?;
        let mut pts = Vec::with_capacity(mesh.len() + 64);
        for &e in &mesh {
            let (m, dm) = sol.eval(e)?;
            let ph = Complex64::from_polar(1.0, lambda * e);
            pts.push((e, vec![[ph * m, ph * (dm + I * lambda * m)]]));
        }
        let start = pts[0].1[0];
        let targets = inward_targets(ya, 0.0, lambda);
        let q = medium.q_side(side, lambda);
        let ts = medium.magnus.transfer_to_points(&q, ya, &targets)?;
        for (t, m) in targets.iter().zip(&ts) {
            pts.push((*t, vec![apply(m, start)]));
        }
        Ok(HalfJost {
            lambda,
            side,
            regime: Regime::Oscillatory,
            flat: false,
            y_end: xm,
            mu: sol.mu,
            sweeps: sol.sweeps,
            reference,
            track: Some(Track::from_pairs(pts)),
        })
    }

    fn build_hankel(medium: &Medium, side: Side, lambda: f64) -> Result<Self> {
        let ext = medium.extent(side);
        let reference = medium.reference(side);
        let yh = (30.0f64).max(reference.shift() + 30.0).min(0.5 * ext);
        let two_il = I * (2.0 * lambda);
        let phase = reference.phase(lambda);
        let forcing = move |y: f64| match reference.phi(y, lambda) {
            Ok(p) => [phase * p[0], phase * p[1]],
            Err(_) => [Complex64::new(f64::NAN, 0.0); 2],
        };
        let kernel = SeparableKernel(|y: f64| {
            let p = reference.phi(y, lambda).unwrap_or([Complex64::new(f64::NAN, 0.0); 2]);
            let u = medium.v_side(side, y) - reference.v(y);
            Factors {
                rank: 2,
                a: [p[0].conj() / two_il, -p[0] / two_il],
                da: [p[1].conj() / two_il, -p[1] / two_il],
                b: [p[0] * u, p[0].conj() * u],
            }
        });
        let mut mesh = vec![yh];
        let mut y = yh;
        while y < ext {
            y = (y + (0.3 * y).min(PI / lambda)).min(ext);
            mesh.push(y);
        }
        let problem = VolterraProblem::new(&kernel, &forcing, yh, ext, Direction::Backward).with_mesh(mesh.clone());
        let sol = volterra_solve(&problem)?;
        let mut pts = Vec::with_capacity(mesh.len() + 64);
        for &e in &mesh {
            let (f, df) = sol.eval(e)?;
            pts.push((e, vec![[f, df]]));
        }
        let start = pts[0].1[0];
        let targets = inward_targets(yh, 0.0, lambda);
        let q = medium.q_side(side, lambda);
        let ts = medium.magnus.transfer_to_points(&q, yh, &targets)?;
        for (t, m) in targets.iter().zip(&ts) {
            pts.push((*t, vec![apply(m, start)]));
        }
        Ok(HalfJost {
            lambda,
            side,
            regime: Regime::HankelReference,
            flat: false,
            y_end: ext,
            mu: sol.mu,
            sweeps: sol.sweeps,
            reference,
            track: Some(Track::from_pairs(pts)),
        })
    }

    /// (f, f′) in the side coordinate.
    pub fn at(&self, medium: &Medium, y: f64) -> Result<[Complex64; 2]> {
        let lambda = self.lambda;
        if self.flat {
            let e = Complex64::from_polar(1.0, lambda * y);
            return Ok([e, I * lambda * e]);
        }
        if y > medium.extent(self.side) * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("ξ = {y} outside the chart image")));
        }
        if y > self.y_end {
            let p = self.reference.phi(y, lambda)?;
            let ph = self.reference.phase(lambda);
            return Ok([ph * p[0], ph * p[1]]);
        }
        let track = self.track.as_ref().unwrap();
        let q = medium.q_side(self.side, lambda);
        Ok(track.eval(&q, &medium.magnus, y)?[0])
    }

    pub fn track_range(&self) -> Option<(f64, f64)> {
        self.track.as_ref().map(|t| t.range())
    }
}

/// Evaluator ξ ↦ f±(ξ,λ).
#[derive(Debug, Clone)]
pub struct JostEvaluator<'m> {
    medium: &'m Medium,
    pub side: Side,
    half: Arc<HalfJost>,
}

impl<'m> JostEvaluator<'m> {
    pub fn lambda(&self) -> f64 {
        self.half.lambda
    }

    pub fn regime(&self) -> Regime {
        self.half.regime
    }

    pub fn half(&self) -> &HalfJost {
        &self.half
    }

    /// (f, ∂_ξ f) at ξ.
    pub fn pair(&self, xi: f64) -> Result<[Complex64; 2]> {
        match self.side {
            Side::Plus => self.half.at(self.medium, xi),
            Side::Minus => {
                let [v, d] = self.half.at(self.medium, -xi)?;
                Ok([v, -d])
            }
        }
    }

    pub fn sample(&self, xi: f64) -> Result<WaveSample> {
        let [value, dvalue] = self.pair(xi)?;
        Ok(WaveSample { xi, lambda: self.lambda(), value, dvalue, regime: self.regime() })
    }

    /// m± = e^{∓iλξ} f± and its ξ-derivative.
    pub fn m(&self, xi: f64) -> Result<(Complex64, Complex64)> {
        let lambda = self.lambda();
        let [f, df] = self.pair(xi)?;
        let s = if self.side == Side::Plus { 1.0 } else { -1.0 };
        let e = Complex64::from_polar(1.0, -s * lambda * xi);
        Ok((e * f, e * (df - I * (s * lambda) * f)))
    }
}

pub fn jost_plus(medium: &Medium, lambda: f64) -> Result<JostEvaluator<'_>> {
    jost_side(medium, Side::Plus, lambda, Route::Auto)
}

pub fn jost_minus(medium: &Medium, lambda: f64) -> Result<JostEvaluator<'_>> {
    jost_side(medium, Side::Minus, lambda, Route::Auto)
}

pub fn jost_side(medium: &Medium, side: Side, lambda: f64, route: Route) -> Result<JostEvaluator<'_>> {
    let half = Arc::new(HalfJost::build(medium, side, lambda, route)?);
    Ok(JostEvaluator { medium, side, half })
}

/// (f₊, f₋); for a symmetric profile both share one half-line solve.
pub fn jost_pair(medium: &Medium, lambda: f64) -> Result<(JostEvaluator<'_>, JostEvaluator<'_>)> {
    let plus = jost_plus(medium, lambda)?;
    let minus = if medium.symmetric {
        let mut h = (*plus.half).clone();
        h.side = Side::Minus;
        JostEvaluator { medium, side: Side::Minus, half: Arc::new(h) }
    } else {
        jost_minus(medium, lambda)?
    };
    Ok((plus, minus))
}

/// u₀(·,λ), u₁(·,λ) on a window around 0 (λ = 0 gives the exact basis).
#[derive(Debug, Clone)]
pub struct LowEnergyBasis<'m> {
    medium: &'m Medium,
    pub lambda: f64,
    pub window: (f64, f64),
    pub mu: f64,
    track: Option<Track>,
}

pub fn zero_energy_basis(medium: &Medium) -> LowEnergyBasis<'_> {
    let (lo, hi) = medium.chart.xi_range();
    LowEnergyBasis { medium, lambda: 0.0, window: (lo, hi), mu: 0.0, track: None }
}

/// Perturbed basis on ξ ∈ [−min(4/λ, X), min(4/λ, X)].
pub fn low_energy_basis(medium: &Medium, lambda: f64) -> Result<LowEnergyBasis<'_>> {
    let (lo, hi) = medium.chart.xi_range();
    let w = 4.0 / lambda;
    low_energy_basis_on(medium, lambda, ((-w).max(lo), w.min(hi)))
}

pub fn low_energy_basis_on(medium: &Medium, lambda: f64, window: (f64, f64)) -> Result<LowEnergyBasis<'_>> {
    if !(lambda > 0.0 && lambda <= medium.lambda_low) {
        return Err(Error::Domain(format!("low-energy basis needs 0 < λ ≤ {}, got {lambda}", medium.lambda_low)));
    }
    let (lo, hi) = medium.chart.xi_range();
    if window.0 < lo || window.1 > hi || !(window.0 < 0.0 && window.1 > 0.0) {
        return Err(Error::Domain(format!("low-energy window [{}, {}] exceeds the chart [{lo}, {hi}]", window.0, window.1)));
    }
    let l2 = lambda * lambda;
    let zero = &medium.zero;
    let z0 = zero.at_x(0.0);
    let mut pts: Vec<(f64, Vec<[Complex64; 2]>)> = vec![(0.0, vec![[z0.u0.into(), z0.du0.into()], [z0.u1.into(), z0.du1.into()]])];
    let mut mu: f64 = 0.0;
    let one = |_x: f64| [ONE, ZERO];
    for sign in [1.0f64, -1.0] {
        let xi_end = if sign > 0.0 { window.1 } else { window.0 };
        let x_end = medium.chart.x_of_arclength(xi_end)?;
        // geometric mesh in |x|
        let mut mesh = vec![0.0];
        let mut e = 0.5f64.min(x_end.abs());
        while e < x_end.abs() {
            mesh.push(e);
            e *= 1.5;
        }
        mesh.push(x_end.abs());
        let mesh: Vec<f64> = if sign > 0.0 { mesh } else { mesh.iter().rev().map(|v| -v).collect() };
        let dir = if sign > 0.0 { Direction::Forward } else { Direction::Backward };
        // the backward form flips the sign of the kernel
        let k0 = SeparableKernel(|x: f64| {
            let z = zero.at_x(x);
            let di = z.speed * z.u0.powi(-2);
            let c = -sign * l2;
            Factors {
                rank: 2,
                a: [(c * z.integral).into(), (-c).into()],
                da: [(c * di).into(), ZERO],
                b: [(z.u0 * z.u0 * z.speed).into(), (z.u1 * z.u0 * z.speed).into()],
            }
        });
        let k1 = SeparableKernel(|x: f64| {
            let z = zero.at_x(x);
            let di = z.speed * z.u0.powi(-2);
            let c = -sign * l2;
            Factors {
                rank: 2,
                a: [c.into(), (-c / z.integral).into()],
                da: [ZERO, (c * di / (z.integral * z.integral)).into()],
                b: [(z.u0 * z.u1 * z.speed).into(), (z.u1 * z.u1 * z.speed).into()],
            }
        });
        let p0 = VolterraProblem::new(&k0, &one, mesh[0].min(*mesh.last().unwrap()), mesh[0].max(*mesh.last().unwrap()), dir)
            .with_mesh(mesh.clone());
        let p1 = VolterraProblem::new(&k1, &one, 0.0, 1.0, dir).with_mesh(p0.mesh.clone());
        let s0 = volterra_solve(&p0)?;
        let s1 = volterra_solve(&p1)?;
        mu = mu.max(s0.mu).max(s1.mu);
        for &x in mesh.iter().filter(|x| **x != 0.0) {
            let z = zero.at_x(x);
            let (h0, dh0) = s0.eval(x)?;
            let (h1, dh1) = s1.eval(x)?;
            let xi = medium.chart.arclength_of(x)?;
            let u0 = [h0 * z.u0, dh0 / z.speed * z.u0 + h0 * z.du0];
            let u1 = [h1 * z.u1, dh1 / z.speed * z.u1 + h1 * z.du1];
            pts.push((xi, vec![u0, u1]));
        }
    }
    Ok(LowEnergyBasis { medium, lambda, window, mu, track: Some(Track::from_pairs(pts)) })
}

impl<'m> LowEnergyBasis<'m> {
    /// [(u₀, u₀′), (u₁, u₁′)] at ξ, all real.
    pub fn eval(&self, xi: f64) -> Result<[[f64; 2]; 2]> {
        if xi < self.window.0 - 1e-9 || xi > self.window.1 + 1e-9 {
            return Err(Error::Domain(format!("ξ = {xi} outside the basis window [{}, {}]", self.window.0, self.window.1)));
        }
        match &self.track {
            None => {
                let z = self.medium.zero_at(xi)?;
                Ok([[z.u0, z.du0], [z.u1, z.du1]])
            }
            Some(t) => {
                let l2 = self.lambda * self.lambda;
                let q = |y: f64| self.medium.table.v(y) - l2;
                let v = t.eval(&q, &self.medium.magnus, xi)?;
                Ok([[v[0][0].re, v[0][1].re], [v[1][0].re, v[1][1].re]])
            }
        }
    }

    pub fn pairs(&self, xi: f64) -> Result<[[Complex64; 2]; 2]> {
        let e = self.eval(xi)?;
        Ok([[e[0][0].into(), e[0][1].into()], [e[1][0].into(), e[1][1].into()]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub a_plus: Complex64,
    pub b_plus: Complex64,
    pub a_minus: Complex64,
    pub b_minus: Complex64,
    /// max relative change when the matching point moves from ξ_m to 2ξ_m
    pub constancy: f64,
}

/// a± = W(f±,u₁(·,λ)), b± = −W(f±,u₀(·,λ)) at ±ξ_m with ξ_m = λ^{−1/2}.
pub fn connection_coefficients(plus: &JostEvaluator, minus: &JostEvaluator, basis: &LowEnergyBasis) -> Result<Connection> {
    let lambda = plus.lambda();
    let xm = lambda.powf(-0.5).min(0.5 * basis.window.1).min(-0.5 * basis.window.0);
    let at = |xi: f64, f: &JostEvaluator| -> Result<(Complex64, Complex64)> {
        let u = basis.pairs(xi)?;
        let fv = f.pair(xi)?;
        Ok((bracket(fv, u[1]), -bracket(fv, u[0])))
    };
    let (ap, bp) = at(xm, plus)?;
    let (am, bm) = at(-xm, minus)?;
    let (ap2, bp2) = at(2.0 * xm, plus)?;
    let (am2, bm2) = at(-2.0 * xm, minus)?;
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(1e-300);
    let constancy = rel(ap, ap2).max(rel(bp, bp2)).max(rel(am, am2)).max(rel(bm, bm2));
    Ok(Connection { a_plus: ap, b_plus: bp, a_minus: am, b_minus: bm, constancy })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub lambda: f64,
    /// W(λ) = W(f₊,f₋); from a±,b± when λ ≤ λ_low, else from f± at ξ = 0
    pub w: Complex64,
    pub w_direct: Complex64,
    pub alpha_minus: Complex64,
    pub beta_minus: Complex64,
    pub alpha_plus: Complex64,
    pub connection: Option<Connection>,
    pub residuals: BTreeMap<String, f64>,
}

impl ScatteringData {
    pub fn a_plus(&self) -> Option<Complex64> {
        self.connection.map(|c| c.a_plus)
    }

    pub fn b_plus(&self) -> Option<Complex64> {
        self.connection.map(|c| c.b_plus)
    }
}

fn direct_from_pair(plus: &JostEvaluator, minus: &JostEvaluator, xi: f64) -> Result<(Complex64, Complex64, Complex64)> {
    let lambda = plus.lambda();
    let fp = plus.pair(xi)?;
    let fm = minus.pair(xi)?;
    let w = bracket(fp, fm);
    let alpha_minus = bracket(fm, conj2(fp)) / (-I * 2.0 * lambda);
    let alpha_plus = bracket(fp, conj2(fm)) / (I * 2.0 * lambda);
    Ok((w, alpha_minus, alpha_plus))
}

/// Scattering record at λ; `with_low` also builds the low-energy basis
/// (only meaningful for λ ≤ λ_low).
pub fn scattering_data(medium: &Medium, lambda: f64) -> Result<ScatteringData> {
    let (plus, minus) = jost_pair(medium, lambda)?;
    scattering_from(medium, &plus, &minus, lambda <= medium.lambda_low)
}

pub fn scattering_from(medium: &Medium, plus: &JostEvaluator, minus: &JostEvaluator, with_low: bool) -> Result<ScatteringData> {
    let lambda = plus.lambda();
    let (w_direct, alpha_minus, alpha_plus) = direct_from_pair(plus, minus, 0.0)?;
    let (w1, _, _) = direct_from_pair(plus, minus, 1.0)?;
    let mut residuals = BTreeMap::new();
    residuals.insert("wronskian_constancy".to_string(), (w1 - w_direct).norm() / w_direct.norm());
    let mut w = w_direct;
    let mut connection = None;
    if with_low && lambda <= medium.lambda_low && !medium.flat {
        let basis = low_energy_basis(medium, lambda)?;
        let c = connection_coefficients(plus, minus, &basis)?;
        let w_low = c.a_plus * c.b_minus - c.a_minus * c.b_plus;
        residuals.insert("w_low_vs_direct".to_string(), (w_low - w_direct).norm() / w_direct.norm());
        residuals.insert("connection_constancy".to_string(), c.constancy);
        w = w_low;
        connection = Some(c);
    }
    let beta_minus = w / (-I * 2.0 * lambda);
    residuals.insert("unitarity".to_string(), (beta_minus.norm_sqr() - alpha_minus.norm_sqr() - 1.0).abs());
    residuals.insert("w_lower_bound".to_string(), (1.0 - w.norm() / (2.0 * lambda)).max(0.0));
    let _ = medium;
    Ok(ScatteringData { lambda, w, w_direct, alpha_minus, beta_minus, alpha_plus, connection, residuals })
}

/// W(λ) with the route chosen by λ.
pub fn wronskian(medium: &Medium, lambda: f64) -> Result<Complex64> {
    Ok(scattering_data(medium, lambda)?.w)
}

/// (α₋, β₋).
pub fn reflection_transmission(medium: &Medium, lambda: f64) -> Result<(Complex64, Complex64)> {
    let s = scattering_data(medium, lambda)?;
    Ok((s.alpha_minus, s.beta_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_profile, ProfileDoc};

    fn hyper() -> Medium {
        Medium::new(&make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 1.0)).unwrap()).unwrap()
    }

    #[test]
    fn cylinder_is_free() {
        let m = Medium::new(&make_profile(&ProfileDoc::new("cylinder")).unwrap()).unwrap();
        let (p, n) = jost_pair(&m, 0.7).unwrap();
        let f = p.sample(3.0).unwrap();
        assert!((f.value - Complex64::from_polar(1.0, 2.1)).norm() < 1e-14);
        let s = scattering_from(&m, &p, &n, false).unwrap();
        assert!((s.w - Complex64::new(0.0, -1.4)).norm() < 1e-14);
        assert!(s.alpha_minus.norm() < 1e-14);
    }

    #[test]
    fn symmetric_wronskian_is_constant() {
        let m = hyper();
        let (p, n) = jost_pair(&m, 0.5).unwrap();
        let w0 = bracket(p.pair(0.0).unwrap(), n.pair(0.0).unwrap());
        for xi in [-30.0, -3.0, 1.0, 7.0, 55.0] {
            let w = bracket(p.pair(xi).unwrap(), n.pair(xi).unwrap());
            assert!((w - w0).norm() < 1e-8 * w0.norm(), "ξ={xi}");
        }
        assert!(w0.re.abs() < 2.0 && (w0.im + 1.0).abs() < 1.0);
    }

    #[test]
    fn routes_agree_where_both_apply() {
        let m = hyper();
        let lambda = 1e-4;
        let a = jost_side(&m, Side::Plus, lambda, Route::Oscillatory).unwrap();
        let b = jost_side(&m, Side::Plus, lambda, Route::HankelReference).unwrap();
        for xi in [0.0, 10.0, 300.0, 5e3] {
            let fa = a.pair(xi).unwrap()[0];
            let fb = b.pair(xi).unwrap()[0];
            assert!((fa - fb).norm() < 1e-8 * fa.norm(), "ξ={xi}: {fa} vs {fb}");
        }
    }

    #[test]
    fn oscillatory_route_refuses_tiny_lambda() {
        let m = hyper();
        assert!(jost_side(&m, Side::Plus, 1e-6, Route::Oscillatory).is_err());
    }

    #[test]
    fn low_energy_basis_keeps_unit_wronskian() {
        let m = hyper();
        let b = low_energy_basis(&m, 1e-3).unwrap();
        for xi in [-2000.0, -10.0, 0.0, 3.0, 500.0, 3999.0] {
            let u = b.eval(xi).unwrap();
            let w = u[0][0] * u[1][1] - u[0][1] * u[1][0];
            assert!((w - 1.0).abs() < 1e-8, "ξ={xi} W={w}");
        }
    }
}
