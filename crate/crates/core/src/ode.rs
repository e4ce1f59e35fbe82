//! Sixth-order Magnus integrator for y″ = q(ξ)·y written as the first-order
//! system Y′ = A(ξ)Y, A = [[0, 1], [q, 0]]. Each step is the exact
//! exponential of a traceless 2×2 matrix, so Wronskians are preserved.

use crate::{Complex64, Error, Result};

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn add(a: &Mat2, b: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] + s * b[0][0], a[0][1] + s * b[0][1]], [a[1][0] + s * b[1][0], a[1][1] + s * b[1][1]]]
}

fn scale(a: &Mat2, s: f64) -> Mat2 {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

fn comm(a: &Mat2, b: &Mat2) -> Mat2 {
    add(&mul(a, b), &mul(b, a), -1.0)
}

fn norm(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// exp of a traceless real 2×2 matrix: M² = δI with δ = −det M.
pub fn expm_traceless(m: &Mat2) -> Mat2 {
    let tr = 0.5 * (m[0][0] + m[1][1]);
    let m0 = [[m[0][0] - tr, m[0][1]], [m[1][0], m[1][1] - tr]];
    let delta = m0[0][0] * m0[0][0] + m0[0][1] * m0[1][0];
    let (c, s) = if delta.abs() < 1e-8 {
        // Taylor in δ
        (1.0 + delta / 2.0 + delta * delta / 24.0, 1.0 + delta / 6.0 + delta * delta / 120.0)
    } else if delta > 0.0 {
        let r = delta.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-delta).sqrt();
        (r.cos(), r.sin() / r)
    };
    let e = tr.exp();
    [[e * (c + s * m0[0][0]), e * s * m0[0][1]], [e * s * m0[1][0], e * (c + s * m0[1][1])]]
}

pub fn apply(t: &Mat2, y: [Complex64; 2]) -> [Complex64; 2] {
    [y[0] * t[0][0] + y[1] * t[0][1], y[0] * t[1][0] + y[1] * t[1][1]]
}

fn a_of(q: f64) -> Mat2 {
    [[0.0, 1.0], [q, 0.0]]
}

/// One Magnus-6 step from x to x + h.
pub fn magnus_step<F: Fn(f64) -> f64>(q: &F, x: f64, h: f64) -> Mat2 {
    let r = 15f64.sqrt() / 10.0;
    let a1 = a_of(q(x + (0.5 - r) * h));
    let a2 = a_of(q(x + 0.5 * h));
    let a3 = a_of(q(x + (0.5 + r) * h));
    let al1 = scale(&a2, h);
    let al2 = scale(&add(&a3, &a1, -1.0), 15f64.sqrt() * h / 3.0);
    let al3 = scale(&add(&add(&a3, &a2, -2.0), &a1, 1.0), 10.0 * h / 3.0);
    let c1 = comm(&al1, &al2);
    let c2 = scale(&comm(&al1, &add(&scale(&al3, 2.0), &c1, 1.0)), -1.0 / 60.0);
    let left = add(&add(&scale(&al1, -20.0), &al3, -1.0), &c1, 1.0);
    let right = add(&al2, &c2, 1.0);
    let omega = add(&add(&al1, &al3, 1.0 / 12.0), &comm(&left, &right), 1.0 / 240.0);
    expm_traceless(&omega)
}

/// Transfer matrix over [x0, x1] with n equal steps.
pub fn transfer_fixed<F: Fn(f64) -> f64>(q: &F, x0: f64, x1: f64, n: usize) -> Mat2 {
    let h = (x1 - x0) / n as f64;
    let mut t = IDENTITY;
    for k in 0..n {
        t = mul(&magnus_step(q, x0 + k as f64 * h, h), &t);
    }
    t
}

/// Adaptive Magnus integrator with step-doubling error control.
#[derive(Debug, Clone, Copy)]
pub struct Magnus {
    pub tol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Magnus {
    fn default() -> Self {
        Magnus { tol: 1e-13, h_max: 50.0, h_min: 1e-10, max_steps: 2_000_000 }
    }
}

impl Magnus {
    pub fn with_tol(tol: f64) -> Self {
        Magnus { tol, ..Default::default() }
    }

    /// Transfer matrices from x0 to each point of `xs` (monotone, same side of x0).
    pub fn transfer_to_points<F: Fn(f64) -> f64>(&self, q: &F, x0: f64, xs: &[f64]) -> Result<Vec<Mat2>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut t = IDENTITY;
        let mut x = x0;
        let mut h = 0.0f64;
        let mut steps = 0usize;
        for &target in xs {
            while x != target {
                let rem = target - x;
                if h == 0.0 {
                    let qs = q(x).abs().sqrt();
                    h = (0.5 / (qs + 1e-3)).min(self.h_max).min(rem.abs());
                }
                let mut step = h.min(rem.abs()).min(self.h_max);
                let last = step >= rem.abs();
                if last {
                    step = rem.abs();
                }
                let s = step * rem.signum();
                let full = magnus_step(q, x, s);
                let half1 = magnus_step(q, x, 0.5 * s);
                let half2 = magnus_step(q, x + 0.5 * s, 0.5 * s);
                let two = mul(&half2, &half1);
                let err = norm(&add(&two, &full, -1.0)) / 63.0;
                let scale_ref = norm(&two).max(1.0);
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::Domain("Magnus integrator exceeded step budget".into()));
                }
                if err <= self.tol * scale_ref || step <= self.h_min {
                    t = mul(&two, &t);
                    x = if last { target } else { x + s };
                    let fac = if err > 0.0 { 0.9 * (self.tol * scale_ref / err).powf(1.0 / 7.0) } else { 4.0 };
                    h = step * fac.clamp(0.2, 4.0);
                } else {
                    let fac = 0.9 * (self.tol * scale_ref / err).powf(1.0 / 7.0);
                    h = step * fac.clamp(0.1, 0.9);
                }
            }
            out.push(t);
        }
        Ok(out)
    }

    pub fn transfer<F: Fn(f64) -> f64>(&self, q: &F, x0: f64, x1: f64) -> Result<Mat2> {
        Ok(self.transfer_to_points(q, x0, &[x1])?[0])
    }

    /// Propagate (y, y′) from x0 to x1.
    pub fn propagate<F: Fn(f64) -> f64>(&self, q: &F, x0: f64, x1: f64, y: [Complex64; 2]) -> Result<[Complex64; 2]> {
        Ok(apply(&self.transfer(q, x0, x1)?, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coefficient_is_exact() {
        let lam: f64 = 3.0;
        let q = |_x: f64| -lam * lam;
        let t = transfer_fixed(&q, 0.0, 2.0, 1);
        assert!((t[0][0] - (2.0 * lam).cos()).abs() < 1e-13);
        assert!((t[0][1] - (2.0 * lam).sin() / lam).abs() < 1e-13);
    }

    #[test]
    fn sixth_order_convergence() {
        // Airy-type equation y'' = x y
        let q = |x: f64| x;
        let reference = transfer_fixed(&q, 0.0, 3.0, 4000);
        let e = |n| norm(&add(&transfer_fixed(&q, 0.0, 3.0, n), &reference, -1.0));
        let order = (e(10) / e(20)).log2();
        assert!(order > 5.5 && order < 6.6, "order {order}");
    }

    #[test]
    fn adaptive_matches_fine_fixed_and_keeps_determinant() {
        let q = |x: f64| 1.0 / (1.0 + x * x) - 4.0;
        let m = Magnus::default();
        let t = m.transfer(&q, -5.0, 7.0).unwrap();
        let r = transfer_fixed(&q, -5.0, 7.0, 3000);
        assert!(norm(&add(&t, &r, -1.0)) < 1e-10);
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        assert!((det - 1.0).abs() < 1e-12);
        let back = m.transfer(&q, 7.0, -5.0).unwrap();
        let id = mul(&back, &t);
        assert!(norm(&add(&id, &IDENTITY, -1.0)) < 1e-10);
    }
}
