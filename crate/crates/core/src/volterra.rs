//! Second-kind Volterra equations
//!
//! ```text
//! forward:  f(x) = g(x) + ∫_{x0}^{x} K(x,s) f(s) ds
//! backward: f(x) = g(x) + ∫_{x}^{x1} K(x,s) f(s) ds
//! ```
//!
//! solved by panel-wise Gauss–Legendre Nyström marching with Picard sweeps
//! inside each panel. Finite-rank kernels K(x,s) = Σ a_k(x) b_k(s) march in
//! O(N); general kernels cost O(N²).

use crate::quad::GaussLegendre;
use crate::{Complex64, Error, Result};

pub const MU_MAX: f64 = 50.0;
pub const MAX_SWEEPS: usize = 200;
const MAX_DOUBLINGS: usize = 6;
const PANEL_MU: f64 = 0.25;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Factors of a rank ≤ 2 kernel K(x,s) = Σ_k a_k(x) b_k(s) at one point.
#[derive(Debug, Clone, Copy)]
pub struct Factors {
    pub rank: usize,
    pub a: [Complex64; 2],
    pub da: [Complex64; 2],
    pub b: [Complex64; 2],
}

pub trait VolterraKernel: Sync {
    fn eval(&self, x: f64, s: f64) -> Complex64;

    /// ∂K/∂x; central differences unless overridden.
    fn eval_dx(&self, x: f64, s: f64) -> Complex64 {
        let h = 1e-6 * (1.0 + x.abs());
        (self.eval(x + h, s) - self.eval(x - h, s)) / (2.0 * h)
    }

    /// Finite-rank factors at x, if the kernel has them.
    fn factors(&self, _x: f64) -> Option<Factors> {
        None
    }
}

/// A kernel given only through a closure.
pub struct GeneralKernel<F: Fn(f64, f64) -> Complex64 + Sync>(pub F);

impl<F: Fn(f64, f64) -> Complex64 + Sync> VolterraKernel for GeneralKernel<F> {
    fn eval(&self, x: f64, s: f64) -> Complex64 {
        (self.0)(x, s)
    }
}

/// A kernel given by its factors; `f(x)` returns (a, a′, b) at x.
pub struct SeparableKernel<F: Fn(f64) -> Factors + Sync>(pub F);

impl<F: Fn(f64) -> Factors + Sync> VolterraKernel for SeparableKernel<F> {
    fn eval(&self, x: f64, s: f64) -> Complex64 {
        let fx = (self.0)(x);
        let fs = (self.0)(s);
        (0..fx.rank).map(|k| fx.a[k] * fs.b[k]).sum()
    }

    fn eval_dx(&self, x: f64, s: f64) -> Complex64 {
        let fx = (self.0)(x);
        let fs = (self.0)(s);
        (0..fx.rank).map(|k| fx.da[k] * fs.b[k]).sum()
    }

    fn factors(&self, x: f64) -> Option<Factors> {
        Some((self.0)(x))
    }
}

/// Forcing term: returns (g(x), g′(x)).
pub type Forcing<'a> = dyn Fn(f64) -> [Complex64; 2] + Sync + 'a;

pub struct VolterraProblem<'a> {
    pub kernel: &'a dyn VolterraKernel,
    pub forcing: &'a Forcing<'a>,
    /// Panel edges, ascending, covering the whole interval.
    pub mesh: Vec<f64>,
    pub direction: Direction,
    pub tol: f64,
    pub order: usize,
}

impl<'a> VolterraProblem<'a> {
    pub fn new(kernel: &'a dyn VolterraKernel, forcing: &'a Forcing<'a>, a: f64, b: f64, direction: Direction) -> Self {
        let n = 16;
        let mesh = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        VolterraProblem { kernel, forcing, mesh, direction, tol: 1e-12, order: 16 }
    }

    pub fn with_mesh(mut self, mesh: Vec<f64>) -> Self {
        self.mesh = mesh;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Converged Nyström solution; evaluate anywhere on the interval.
pub struct VolterraSolution<'a> {
    kernel: &'a dyn VolterraKernel,
    forcing: &'a Forcing<'a>,
    sign: f64,
    rule: GaussLegendre,
    /// Panel edges in marching coordinate t = sign·x, ascending.
    edges: Vec<f64>,
    values: Vec<Vec<Complex64>>,
    /// Finite-rank running integrals at each panel start.
    starts: Vec<[Complex64; 2]>,
    /// b_k(x_j)·f(x_j) at the nodes (finite-rank kernels only).
    bf: Vec<Vec<[Complex64; 2]>>,
    rank: Option<usize>,
    pub mu: f64,
    pub sweeps: usize,
    pub doublings: usize,
    pub err_est: f64,
    pub g_norm: f64,
    pub f_norm: f64,
}

struct March {
    values: Vec<Vec<Complex64>>,
    starts: Vec<[Complex64; 2]>,
    bf: Vec<Vec<[Complex64; 2]>>,
    sweeps: usize,
}

struct Ctx<'b> {
    kernel: &'b dyn VolterraKernel,
    forcing: &'b Forcing<'b>,
    sign: f64,
    rule: &'b GaussLegendre,
    smat: &'b [Vec<f64>],
    tol: f64,
    g_norm: f64,
}

impl<'b> Ctx<'b> {
    fn x_of(&self, t: f64) -> f64 {
        self.sign * t
    }

    fn k(&self, t: f64, tau: f64) -> Complex64 {
        self.kernel.eval(self.x_of(t), self.x_of(tau))
    }

    fn g(&self, t: f64) -> Complex64 {
        (self.forcing)(self.x_of(t))[0]
    }

    fn factors(&self, t: f64) -> Option<Factors> {
        self.kernel.factors(self.x_of(t))
    }

    fn nodes(&self, a: f64, b: f64) -> Vec<f64> {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.rule.nodes.iter().map(|u| c + h * u).collect()
    }

    fn march(&self, edges: &[f64]) -> Result<March> {
        let n = self.rule.len();
        let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(edges.len() - 1);
        let mut starts = Vec::with_capacity(edges.len() - 1);
        let mut bfs = Vec::new();
        let mut run = [ZERO; 2];
        let mut sweeps = 0;
        let stop = self.tol * self.g_norm.max(1e-300);
        let separable = self.factors(edges[0]).is_some();
        let mut hist_t: Vec<f64> = Vec::new();
        let mut hist_wf: Vec<Complex64> = Vec::new();
        for p in 0..edges.len() - 1 {
            let (a, b) = (edges[p], edges[p + 1]);
            let h = 0.5 * (b - a);
            let ts = self.nodes(a, b);
            let g: Vec<Complex64> = ts.iter().map(|&t| self.g(t)).collect();
            starts.push(run);
            let mut f;
            let mut local_sweeps = 0;
            if separable {
                let fac: Vec<Factors> = ts.iter().map(|&t| self.factors(t).unwrap()).collect();
                let rank = fac[0].rank;
                let base: Vec<Complex64> = (0..n)
                    .map(|i| g[i] + (0..rank).map(|k| fac[i].a[k] * run[k]).sum::<Complex64>())
                    .collect();
                f = base.clone();
                loop {
                    let mut next = base.clone();
                    for k in 0..rank {
                        let bf: Vec<Complex64> = (0..n).map(|j| fac[j].b[k] * f[j]).collect();
                        for i in 0..n {
                            let mut s = ZERO;
                            for j in 0..n {
                                s += bf[j] * self.smat[i][j];
                            }
                            next[i] += fac[i].a[k] * s * h;
                        }
                    }
                    local_sweeps += 1;
                    let change = next.iter().zip(&f).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    f = next;
                    if change <= stop {
                        break;
                    }
                    if local_sweeps >= MAX_SWEEPS || !change.is_finite() {
                        return Err(Error::Volterra(format!("Picard sweeps did not converge on panel [{a}, {b}] (change {change:e})")));
                    }
                }
                for k in 0..rank {
                    let mut s = ZERO;
                    for j in 0..n {
                        s += fac[j].b[k] * f[j] * self.rule.weights[j];
                    }
                    run[k] += s * h;
                }
                bfs.push((0..n).map(|j| [fac[j].b[0] * f[j], if rank > 1 { fac[j].b[1] * f[j] } else { ZERO }]).collect());
            } else {
                let kin: Vec<Vec<Complex64>> = ts.iter().map(|&t| ts.iter().map(|&tau| self.k(t, tau)).collect()).collect();
                let base: Vec<Complex64> = (0..n)
                    .map(|i| {
                        let mut s = g[i];
                        for (tau, wf) in hist_t.iter().zip(&hist_wf) {
                            s += self.k(ts[i], *tau) * wf;
                        }
                        s
                    })
                    .collect();
                f = base.clone();
                loop {
                    let mut next = base.clone();
                    for i in 0..n {
                        let mut s = ZERO;
                        for j in 0..n {
                            s += kin[i][j] * f[j] * self.smat[i][j];
                        }
                        next[i] += s * h;
                    }
                    local_sweeps += 1;
                    let change = next.iter().zip(&f).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    f = next;
                    if change <= stop {
                        break;
                    }
                    if local_sweeps >= MAX_SWEEPS || !change.is_finite() {
                        return Err(Error::Volterra(format!("Picard sweeps did not converge on panel [{a}, {b}] (change {change:e})")));
                    }
                }
                for j in 0..n {
                    hist_t.push(ts[j]);
                    hist_wf.push(f[j] * (self.rule.weights[j] * h));
                }
            }
            sweeps = sweeps.max(local_sweeps);
            values.push(f);
        }
        Ok(March { values, starts, bf: bfs, sweeps })
    }

    /// sup_t |K(t, τ)| over t ≥ τ on a coarse sample, for every node τ, plus
    /// the panel-local mass.
    fn kernel_sup(&self, edges: &[f64]) -> (f64, Vec<f64>) {
        let coarse: Vec<f64> = {
            let m = 64.min(edges.len());
            let mut v: Vec<f64> = (0..m).map(|i| edges[i * (edges.len() - 1) / (m - 1).max(1)]).collect();
            for p in 0..edges.len() - 1 {
                v.push(0.5 * (edges[p] + edges[p + 1]));
            }
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if v.len() > 400 {
                let step = v.len() / 400 + 1;
                v = v.into_iter().step_by(step).collect();
                v.push(*edges.last().unwrap());
            }
            v
        };
        let sep = self.factors(edges[0]).is_some();
        let coarse_fac: Vec<Option<Factors>> = if sep { coarse.iter().map(|&t| self.factors(t)).collect() } else { vec![] };
        let mut mu = 0.0;
        let mut local = Vec::with_capacity(edges.len() - 1);
        for p in 0..edges.len() - 1 {
            let (a, b) = (edges[p], edges[p + 1]);
            let h = 0.5 * (b - a);
            let ts = self.nodes(a, b);
            let mut panel_mu = 0.0;
            for (j, &tau) in ts.iter().enumerate() {
                let mut sup: f64 = 0.0;
                let mut local_sup: f64 = 0.0;
                let ftau = if sep { self.factors(tau) } else { None };
                let kval = |ci: usize, t: f64| -> Complex64 {
                    match (&ftau, coarse_fac.get(ci)) {
                        (Some(fs), Some(Some(fx))) => (0..fs.rank).map(|k| fx.a[k] * fs.b[k]).sum(),
                        _ => self.k(t, tau),
                    }
                };
                for (ci, &t) in coarse.iter().enumerate() {
                    if t >= tau {
                        sup = sup.max(kval(ci, t).norm());
                    }
                }
                for &t in ts.iter().chain(std::iter::once(&b)) {
                    if t >= tau {
                        let v = self.k(t, tau).norm();
                        local_sup = local_sup.max(v);
                        sup = sup.max(v);
                    }
                }
                mu += sup * self.rule.weights[j] * h;
                panel_mu += local_sup * self.rule.weights[j] * h;
            }
            local.push(panel_mu);
        }
        (mu, local)
    }
}

/// Split panels whose local kernel mass is too large for Picard sweeps.
fn split_heavy(ctx: &Ctx, edges: Vec<f64>) -> Vec<f64> {
    let mut e = edges;
    for _ in 0..20 {
        let (_, local) = ctx.kernel_sup(&e);
        if local.iter().all(|m| *m <= PANEL_MU) {
            break;
        }
        let mut next = vec![e[0]];
        for p in 0..e.len() - 1 {
            if local[p] > PANEL_MU {
                next.push(0.5 * (e[p] + e[p + 1]));
            }
            next.push(e[p + 1]);
        }
        e = next;
    }
    e
}

fn refine(edges: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * edges.len());
    for w in edges.windows(2) {
        v.push(w[0]);
        v.push(0.5 * (w[0] + w[1]));
    }
    v.push(*edges.last().unwrap());
    v
}

/// Estimate μ = ∫ sup_x |K(x,s)| ds on the problem mesh.
pub fn estimate_mu(problem: &VolterraProblem) -> f64 {
    let rule = GaussLegendre::new(problem.order);
    let smat = rule.integration_matrix();
    let (sign, edges) = marching_edges(problem);
    let ctx = Ctx { kernel: problem.kernel, forcing: problem.forcing, sign, rule: &rule, smat: &smat, tol: problem.tol, g_norm: 1.0 };
    ctx.kernel_sup(&edges).0
}

fn marching_edges(problem: &VolterraProblem) -> (f64, Vec<f64>) {
    match problem.direction {
        Direction::Forward => (1.0, problem.mesh.clone()),
        Direction::Backward => (-1.0, problem.mesh.iter().rev().map(|x| -x).collect()),
    }
}

pub fn volterra_solve<'a>(problem: &VolterraProblem<'a>) -> Result<VolterraSolution<'a>> {
    if problem.mesh.len() < 2 || problem.mesh.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Volterra("mesh must be strictly ascending with at least one panel".into()));
    }
    let rule = GaussLegendre::new(problem.order);
    let smat = rule.integration_matrix();
    let (sign, edges) = marching_edges(problem);
    let mut ctx = Ctx { kernel: problem.kernel, forcing: problem.forcing, sign, rule: &rule, smat: &smat, tol: problem.tol, g_norm: 1.0 };

    let (mu, _) = ctx.kernel_sup(&edges);
    if !(mu <= MU_MAX) {
        return Err(Error::Volterra(format!("kernel mass μ = {mu:.3} exceeds {MU_MAX}; refusing (overflow risk)")));
    }
    let mut edges = split_heavy(&ctx, edges);
    let mut g_norm: f64 = 0.0;
    for w in edges.windows(2) {
        for t in ctx.nodes(w[0], w[1]) {
            g_norm = g_norm.max(ctx.g(t).norm());
        }
    }
    ctx.g_norm = g_norm;

    let mut coarse = ctx.march(&edges)?;
    let mut sweeps = coarse.sweeps;
    let mut err_est = f64::INFINITY;
    let mut doublings = 0;
    for _ in 0..MAX_DOUBLINGS {
        let fine_edges = refine(&edges);
        let fine = ctx.march(&fine_edges)?;
        sweeps = sweeps.max(fine.sweeps);
        doublings += 1;
        // compare the fine solution at coarse nodes through Nyström interpolation
        let tmp = VolterraSolution {
            kernel: problem.kernel,
            forcing: problem.forcing,
            sign,
            rule: rule.clone(),
            edges: fine_edges.clone(),
            values: fine.values.clone(),
            starts: fine.starts.clone(),
            bf: fine.bf.clone(),
            rank: ctx.factors(fine_edges[0]).map(|f| f.rank),
            mu,
            sweeps,
            doublings,
            err_est: 0.0,
            g_norm,
            f_norm: 0.0,
        };
        let mut diff: f64 = 0.0;
        for (p, w) in edges.windows(2).enumerate() {
            // sample a few nodes per coarse panel
            let ts = ctx.nodes(w[0], w[1]);
            for i in [0, ts.len() / 2, ts.len() - 1] {
                let v = tmp.eval_t(ts[i]).0;
                diff = diff.max((v - coarse.values[p][i]).norm());
            }
        }
        edges = fine_edges;
        coarse = fine;
        err_est = diff;
        if diff <= 10.0 * problem.tol * g_norm.max(1e-300) {
            break;
        }
    }
    let f_norm = coarse.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    for w in edges.windows(2) {
        for t in ctx.nodes(w[0], w[1]) {
            g_norm = g_norm.max(ctx.g(t).norm());
        }
    }
    if f_norm > mu.exp() * g_norm * (1.0 + 1e-8) + 1e-300 {
        return Err(Error::Volterra(format!("solution bound violated: ‖f‖ = {f_norm:e} > e^μ‖g‖ = {:e}", mu.exp() * g_norm)));
    }
    Ok(VolterraSolution {
        kernel: problem.kernel,
        forcing: problem.forcing,
        sign,
        rank: ctx.factors(edges[0]).map(|f| f.rank),
        rule,
        edges,
        values: coarse.values,
        starts: coarse.starts,
        bf: coarse.bf,
        mu,
        sweeps,
        doublings,
        err_est,
        g_norm,
        f_norm,
    })
}

impl<'a> VolterraSolution<'a> {
    fn panel(&self, t: f64) -> usize {
        match self.edges.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.values.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.values.len() - 1),
        }
    }

    /// (f, df/dt) in the marching coordinate.
    fn eval_t(&self, t: f64) -> (Complex64, Complex64) {
        let p = self.panel(t);
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let y = ((t - c) / h).clamp(-1.0, 1.0);
        let n = self.rule.len();
        let mut pw = vec![0.0; n];
        self.rule.partial_weights(y, &mut pw);
        let x = self.sign * t;
        let g = (self.forcing)(x);
        let (g0, dg) = (g[0], g[1] * self.sign);
        let nodes: Vec<f64> = self.rule.nodes.iter().map(|u| c + h * u).collect();
        let fv = &self.values[p];
        match self.rank {
            Some(rank) => {
                let fx = self.kernel.factors(x).unwrap();
                let mut val = g0;
                let mut der = dg;
                let mut diag = ZERO;
                let bf = &self.bf[p];
                for k in 0..rank {
                    let mut s = self.starts[p][k];
                    for j in 0..n {
                        s += bf[j][k] * (pw[j] * h);
                    }
                    val += fx.a[k] * s;
                    der += fx.da[k] * self.sign * s;
                    diag += fx.a[k] * fx.b[k];
                }
                // K(x,x)·f(x) contributes to the derivative
                der += diag * val;
                (val, der)
            }
            None => {
                let mut val = g0;
                let mut der = dg;
                for q in 0..p {
                    let (qa, qb) = (self.edges[q], self.edges[q + 1]);
                    let (qc, qh) = (0.5 * (qa + qb), 0.5 * (qb - qa));
                    for j in 0..n {
                        let tau = qc + qh * self.rule.nodes[j];
                        let w = self.rule.weights[j] * qh;
                        val += self.kernel.eval(x, self.sign * tau) * self.values[q][j] * w;
                        der += self.kernel.eval_dx(x, self.sign * tau) * self.sign * self.values[q][j] * w;
                    }
                }
                for j in 0..n {
                    let tau = nodes[j];
                    val += self.kernel.eval(x, self.sign * tau) * fv[j] * (pw[j] * h);
                    der += self.kernel.eval_dx(x, self.sign * tau) * self.sign * fv[j] * (pw[j] * h);
                }
                der += self.kernel.eval(x, x) * val;
                (val, der)
            }
        }
    }

    /// (f(x), f′(x)) anywhere on the interval (Nyström interpolation).
    pub fn eval(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let t = self.sign * x;
        let (lo, hi) = (self.edges[0], *self.edges.last().unwrap());
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if t < lo - slack || t > hi + slack {
            return Err(Error::Domain(format!("x = {x} outside the Volterra interval")));
        }
        let (v, d) = self.eval_t(t.clamp(lo, hi));
        Ok((v, d * self.sign))
    }

    /// Node positions and values (x ascending in marching order).
    pub fn samples(&self) -> Vec<(f64, Complex64)> {
        let mut out = Vec::new();
        for (p, w) in self.edges.windows(2).enumerate() {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (j, u) in self.rule.nodes.iter().enumerate() {
                out.push((self.sign * (c + h * u), self.values[p][j]));
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.values.len() * self.rule.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn unit_kernel_gives_exponential() {
        // f = 1 + ∫_0^x f  ⇒  f = e^x
        let k = SeparableKernel(|_x| Factors { rank: 1, a: [c(1.0), ZERO], da: [ZERO; 2], b: [c(1.0), ZERO] });
        let g = |_x: f64| [c(1.0), ZERO];
        let p = VolterraProblem::new(&k, &g, 0.0, 3.0, Direction::Forward);
        let s = volterra_solve(&p).unwrap();
        for x in [0.0, 0.7, 2.2, 3.0] {
            let (v, d) = s.eval(x).unwrap();
            assert!((v.re - x.exp()).abs() < 1e-11 * x.exp(), "x={x}");
            assert!((d.re - x.exp()).abs() < 1e-10 * x.exp());
        }
        assert!((s.mu - 3.0).abs() < 1e-12);
    }

    #[test]
    fn general_kernel_matches_separable() {
        // f = 1 + ∫_0^x (x − s) f ds ⇒ f = cosh x
        let k = GeneralKernel(|x: f64, s: f64| c(x - s));
        let g = |_x: f64| [c(1.0), ZERO];
        let p = VolterraProblem::new(&k, &g, 0.0, 2.0, Direction::Forward);
        let s = volterra_solve(&p).unwrap();
        let (v, d) = s.eval(1.3).unwrap();
        assert!((v.re - 1.3f64.cosh()).abs() < 1e-11);
        assert!((d.re - 1.3f64.sinh()).abs() < 1e-8);
    }

    #[test]
    fn backward_direction() {
        // f = 1 + ∫_x^2 f ds ⇒ f = e^{2−x}
        let k = SeparableKernel(|_x| Factors { rank: 1, a: [c(1.0), ZERO], da: [ZERO; 2], b: [c(1.0), ZERO] });
        let g = |_x: f64| [c(1.0), ZERO];
        let p = VolterraProblem::new(&k, &g, 0.0, 2.0, Direction::Backward);
        let s = volterra_solve(&p).unwrap();
        let (v, d) = s.eval(0.5).unwrap();
        assert!((v.re - 1.5f64.exp()).abs() < 1e-11);
        assert!((d.re + 1.5f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn zero_kernel_returns_forcing() {
        let k = GeneralKernel(|_x: f64, _s: f64| ZERO);
        let g = |x: f64| [Complex64::new(x.sin(), x), Complex64::new(x.cos(), 1.0)];
        let p = VolterraProblem::new(&k, &g, -1.0, 1.0, Direction::Forward);
        let s = volterra_solve(&p).unwrap();
        assert_eq!(s.mu, 0.0);
        let (v, _) = s.eval(0.3).unwrap();
        assert!((v - g(0.3)[0]).norm() < 1e-15);
    }

    #[test]
    fn refuses_heavy_kernels() {
        let k = GeneralKernel(|_x: f64, _s: f64| c(1.0));
        let g = |_x: f64| [c(1.0), ZERO];
        let p = VolterraProblem::new(&k, &g, 0.0, 60.0, Direction::Forward);
        assert!(matches!(volterra_solve(&p), Err(Error::Volterra(_))));
    }
}
