//! Quadrature building blocks: Gauss–Legendre rules with spectral
//! integration matrices, adaptive Gauss–Kronrod, Filon panels and
//! barycentric Chebyshev interpolation.

use num_complex::Complex64;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre polynomials P_0..=P_kmax at x.
pub fn legendre_all(x: f64, kmax: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if kmax >= 1 {
        out[1] = x;
    }
    for k in 1..kmax {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 1..n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p1 = x;
                    p0 = 1.0;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate f over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    pub fn integrate_c<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += *w * f(c + h * x);
        }
        s * h
    }

    /// Weights v_j with ∫_{-1}^{y} p = Σ v_j p(x_j) for every polynomial
    /// p of degree < n.
    pub fn partial_weights(&self, y: f64, out: &mut [f64]) {
        let n = self.len();
        let mut py = vec![0.0; n + 1];
        legendre_all(y, n, &mut py);
        let mut pj = vec![0.0; n];
        for j in 0..n {
            legendre_all(self.nodes[j], n - 1, &mut pj);
            let mut s = 0.5 * (y + 1.0);
            for k in 1..n {
                s += 0.5 * pj[k] * (py[k + 1] - py[k - 1]);
            }
            out[j] = self.weights[j] * s;
        }
    }

    /// Lagrange basis values ℓ_j(y) through the nodes.
    pub fn interp_weights(&self, y: f64, out: &mut [f64]) {
        let n = self.len();
        let mut py = vec![0.0; n];
        legendre_all(y, n - 1, &mut py);
        let mut pj = vec![0.0; n];
        for j in 0..n {
            legendre_all(self.nodes[j], n - 1, &mut pj);
            let mut s = 0.0;
            for k in 0..n {
                s += (2.0 * k as f64 + 1.0) * 0.5 * pj[k] * py[k];
            }
            out[j] = self.weights[j] * s;
        }
    }

    /// Integration matrix S[i][j] = ∫_{-1}^{x_i} ℓ_j.
    pub fn integration_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                self.partial_weights(self.nodes[i], &mut row);
                row
            })
            .collect()
    }

    /// Legendre coefficients of the interpolant through (x_j, f_j).
    pub fn legendre_coeffs(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let mut coef = vec![Complex64::new(0.0, 0.0); n];
        let mut pj = vec![0.0; n];
        for j in 0..n {
            legendre_all(self.nodes[j], n - 1, &mut pj);
            for k in 0..n {
                coef[k] += f[j] * (self.weights[j] * pj[k]);
            }
        }
        for (k, c) in coef.iter_mut().enumerate() {
            *c *= (2.0 * k as f64 + 1.0) * 0.5;
        }
        coef
    }
}

/// Spherical Bessel functions j_0..=j_kmax at real z.
pub fn spherical_bessel_all(z: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    let az = z.abs();
    if az < 0.5 {
        // power series
        let mut lead = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= az / (2.0 * k as f64 + 1.0);
            }
            let mut term = 1.0;
            let mut s = 1.0;
            for m in 1..30 {
                term *= -0.5 * az * az / (m as f64 * (2.0 * (k + m) as f64 + 1.0));
                s += term;
                if term.abs() < 1e-18 {
                    break;
                }
            }
            *o = lead * s;
        }
    } else if az > kmax as f64 {
        out[0] = az.sin() / az;
        if kmax >= 1 {
            out[1] = az.sin() / (az * az) - az.cos() / az;
        }
        for k in 1..kmax {
            out[k + 1] = (2.0 * k as f64 + 1.0) / az * out[k] - out[k - 1];
        }
    } else {
        let start = kmax + 20 + az as usize;
        let mut jp1 = 0.0;
        let mut j = 1e-280;
        let mut tmp = vec![0.0; kmax + 1];
        for k in (1..=start).rev() {
            let jm1 = (2.0 * k as f64 + 1.0) / az * j - jp1;
            jp1 = j;
            j = jm1;
            if k - 1 <= kmax {
                tmp[k - 1] = j;
            }
            if j.abs() > 1e250 {
                j *= 1e-250;
                jp1 *= 1e-250;
                for t in tmp.iter_mut() {
                    *t *= 1e-250;
                }
            }
        }
        let j0 = az.sin() / az;
        // normalise against whichever of j0, j1 is better conditioned
        let scale = if j0.abs() > 1e-3 {
            j0 / tmp[0]
        } else {
            let j1 = az.sin() / (az * az) - az.cos() / az;
            j1 / tmp[1.min(kmax)]
        };
        for k in 0..=kmax {
            out[k] = tmp[k] * scale;
        }
    }
    if z < 0.0 {
        for (k, o) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *o = -*o;
            }
        }
    }
    out
}

/// Filon-type panel rule: ∫_a^b g(x) e^{iωx} dx where g is sampled on the
/// Gauss–Legendre nodes mapped to [a, b]. Returns (value, error estimate).
pub fn filon_panel(rule: &GaussLegendre, a: f64, b: f64, omega: f64, g: &[Complex64]) -> (Complex64, f64) {
    let n = rule.len();
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let coef = rule.legendre_coeffs(g);
    let js = spherical_bessel_all(omega * h, n - 1);
    let mut s = Complex64::new(0.0, 0.0);
    let mut ik = Complex64::new(1.0, 0.0);
    for k in 0..n {
        s += coef[k] * ik * (2.0 * js[k]);
        ik *= Complex64::i();
    }
    let phase = Complex64::from_polar(1.0, omega * c);
    let tail = coef[n - 1].norm() + coef[n - 2].norm() + coef[n - 3].norm();
    (s * phase * h, 2.0 * h * tail)
}

const GK_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7–K15 panel on [a, b]: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<F: FnMut(f64) -> Complex64>(a: f64, b: f64, f: &mut F) -> (Complex64, f64) {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let f1 = f(c - h * GK_X[i]);
        let f2 = f(c + h * GK_X[i]);
        k += (f1 + f2) * GK_WK[i];
        if i % 2 == 1 {
            g += (f1 + f2) * GK_WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod on [a, b] to absolute tolerance `tol`.
/// Returns (value, error estimate); the estimate is returned honestly even
/// when the subdivision budget is exhausted.
pub fn adaptive_gk<F: FnMut(f64) -> Complex64>(a: f64, b: f64, tol: f64, max_depth: usize, f: &mut F) -> (Complex64, f64) {
    fn rec<F: FnMut(f64) -> Complex64>(a: f64, b: f64, tol: f64, depth: usize, whole: (Complex64, f64), f: &mut F) -> (Complex64, f64) {
        if whole.1 <= tol || depth == 0 || (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            return whole;
        }
        let m = 0.5 * (a + b);
        let l = gk15(a, m, f);
        let r = gk15(m, b, f);
        let (lv, le) = rec(a, m, 0.5 * tol, depth - 1, l, f);
        let (rv, re) = rec(m, b, 0.5 * tol, depth - 1, r, f);
        (lv + rv, le + re)
    }
    let whole = gk15(a, b, f);
    rec(a, b, tol, max_depth, whole, f)
}

pub fn adaptive_gk_real<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, f: &mut F) -> (f64, f64) {
    let mut g = |x: f64| Complex64::new(f(x), 0.0);
    let (v, e) = adaptive_gk(a, b, tol, 40, &mut g);
    (v.re, e)
}

/// Barycentric interpolation on Chebyshev points of the first kind.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Chebyshev {
    pub fn new(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for j in 0..n {
            let th = (2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
            nodes.push(th.cos());
            weights.push(if j % 2 == 0 { th.sin() } else { -th.sin() });
        }
        Chebyshev { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Coefficients c_j such that p(x) = Σ c_j f_j, and c'_j for p'(x).
    /// `x` is on the reference interval [-1, 1].
    pub fn basis(&self, x: f64, val: &mut [f64], der: &mut [f64]) {
        let n = self.len();
        for j in 0..n {
            if x == self.nodes[j] {
                // exact node: value basis is a unit vector, derivative by
                // the differentiation-matrix row
                for k in 0..n {
                    val[k] = 0.0;
                    der[k] = 0.0;
                }
                val[j] = 1.0;
                let mut diag = 0.0;
                for k in 0..n {
                    if k != j {
                        let d = self.weights[k] / self.weights[j] / (x - self.nodes[k]);
                        der[k] = d;
                        diag -= d;
                    }
                }
                der[j] = diag;
                return;
            }
        }
        let mut s = 0.0;
        for j in 0..n {
            let q = self.weights[j] / (x - self.nodes[j]);
            val[j] = q;
            s += q;
        }
        for v in val.iter_mut() {
            *v /= s;
        }
        // p'(x) = Σ_j q_j (p(x) - f_j)/(x - x_j) / Σ q_j
        let mut s2 = 0.0;
        for j in 0..n {
            let q = self.weights[j] / (x - self.nodes[j]);
            s2 += q / (x - self.nodes[j]);
        }
        for j in 0..n {
            let q = self.weights[j] / (x - self.nodes[j]);
            der[j] = (val[j] * s2 - q / (x - self.nodes[j])) / s;
        }
    }
}

/// Least-squares line through (x, y): (slope, intercept, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, icpt, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 24] {
            let r = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let v = r.integrate(-1.0, 1.0, |x| x.powi(deg as i32 - 1));
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v - exact).abs() < 1e-13, "n={n} v={v}");
        }
    }

    #[test]
    fn integration_matrix_is_exact_for_polynomials() {
        let r = GaussLegendre::new(12);
        let s = r.integration_matrix();
        for (i, row) in s.iter().enumerate() {
            let v: f64 = row.iter().zip(&r.nodes).map(|(w, x)| w * x.powi(5)).sum();
            let x = r.nodes[i];
            assert!((v - (x.powi(6) - 1.0) / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn spherical_bessel_matches_closed_forms() {
        for z in [1e-3, 0.3, 1.7, 8.0, 40.0, -2.5] {
            let j = spherical_bessel_all(z, 12);
            // the closed form cancels badly near 0
            let j2 = if z.abs() < 0.1 {
                z * z / 15.0 * (1.0 - z * z / 14.0)
            } else {
                (3.0 / (z * z) - 1.0) * z.sin() / z - 3.0 * z.cos() / (z * z)
            };
            assert!((j[0] - z.sin() / z).abs() < 1e-14);
            assert!((j[2] - j2).abs() < 1e-10, "z={z}");
        }
    }

    #[test]
    fn filon_matches_direct_integration() {
        let r = GaussLegendre::new(20);
        let omega = 73.0;
        let (a, b) = (0.3, 1.1);
        let g: Vec<Complex64> = r.nodes.iter().map(|u| {
            let x = 0.5 * (a + b) + 0.5 * (b - a) * u;
            Complex64::new((-x).exp(), x * x)
        }).collect();
        let (v, _) = filon_panel(&r, a, b, omega, &g);
        let mut f = |x: f64| Complex64::new((-x).exp(), x * x) * Complex64::from_polar(1.0, omega * x);
        let (d, _) = adaptive_gk(a, b, 1e-14, 30, &mut f);
        assert!((v - d).norm() < 1e-12);
    }

    #[test]
    fn chebyshev_interpolates_and_differentiates() {
        let c = Chebyshev::new(16);
        let f: Vec<f64> = c.nodes.iter().map(|x| (2.0 * x).sin()).collect();
        let mut v = vec![0.0; 16];
        let mut d = vec![0.0; 16];
        for x in [-0.93, 0.0, 0.41, c.nodes[3]] {
            c.basis(x, &mut v, &mut d);
            let pv: f64 = v.iter().zip(&f).map(|(a, b)| a * b).sum();
            let pd: f64 = d.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((pv - (2.0 * x).sin()).abs() < 1e-12);
            assert!((pd - 2.0 * (2.0 * x).cos()).abs() < 1e-9);
        }
    }
}
