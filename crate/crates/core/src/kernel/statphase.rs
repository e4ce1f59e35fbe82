//! Stationary-phase majorant: |∫ e^{itφ(x)} a(x) dx| against
//! δ²{∫|a|/(δ² + x²) dx + ∫_{|x|>δ} |a′|/|x| dx}, δ = t^{−1/2}.

use crate::quad::{adaptive_gk_real, GaussLegendre};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    /// k·x²
    Quadratic(f64),
    /// x²/2 + x⁴/24
    Quartic,
    /// x² − (1 − cos x)/2
    Cosine,
    /// λ² + βλ in λ = x + λ₀ with λ₀ = −β/2 (constant removed)
    Shifted { beta: f64 },
}

impl Phase {
    /// (φ, φ′, φ″) at x.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Phase::Quadratic(k) => (k * x * x, 2.0 * k * x, 2.0 * k),
            Phase::Quartic => (0.5 * x * x + x.powi(4) / 24.0, x + x.powi(3) / 6.0, 1.0 + 0.5 * x * x),
            Phase::Cosine => (x * x - 0.5 * (1.0 - x.cos()), 2.0 * x - 0.5 * x.sin(), 2.0 - 0.5 * x.cos()),
            Phase::Shifted { beta } => {
                let l0 = -0.5 * beta;
                let l = x + l0;
                (l * l + beta * l - (l0 * l0 + beta * l0), 2.0 * l + beta, 2.0)
            }
        }
    }

    pub fn shift(&self) -> f64 {
        match *self {
            Phase::Shifted { beta } => -0.5 * beta,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Zero,
    /// e^{−(x−x₀)²}
    Gaussian { center: f64 },
    /// C^∞ bump supported in [lo, hi]
    Bump { lo: f64, hi: f64 },
}

impl Amplitude {
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Amplitude::Zero => (0.0, 0.0),
            Amplitude::Gaussian { center } => {
                let v = (-(x - center).powi(2)).exp();
                (v, -2.0 * (x - center) * v)
            }
            Amplitude::Bump { lo, hi } => {
                let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                let u = (x - c) / r;
                if u.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - u * u;
                let v = (1.0 - 1.0 / q).exp();
                (v, v * (-2.0 * u / (q * q)) / r)
            }
        }
    }

    /// Interval outside which |a| < 1e−17 (None for a ≡ 0).
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Amplitude::Zero => None,
            Amplitude::Gaussian { center } => Some((center - 6.5, center + 6.5)),
            Amplitude::Bump { lo, hi } => Some((lo, hi)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPhaseCase {
    pub name: &'static str,
    pub phase: Phase,
    pub amplitude: Amplitude,
    pub t: f64,
}

impl StationaryPhaseCase {
    pub fn delta(&self) -> f64 {
        self.t.powf(-0.5)
    }

    /// Closed form of ∫ e^{itkx²} e^{−(x−x₀)²} dx when available.
    pub fn oracle(&self) -> Option<Complex64> {
        match (self.phase, self.amplitude) {
            (_, Amplitude::Zero) => Some(Complex64::new(0.0, 0.0)),
            (Phase::Quadratic(k), Amplitude::Gaussian { center }) => {
                let z = Complex64::new(1.0, -k * self.t);
                let pi = std::f64::consts::PI;
                Some((pi / z).sqrt() * (center * center / z - center * center).exp())
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPhaseResult {
    pub integral: Complex64,
    pub lhs: f64,
    pub rhs: f64,
    pub oracle_error: Option<f64>,
}

fn check_convexity(case: &StationaryPhaseCase, a: f64, b: f64) -> Result<()> {
    let n = 200;
    for k in 0..=n {
        let x = a + (b - a) * k as f64 / n as f64;
        let (_, _, d2) = case.phase.eval(x);
        if d2 < 1.0 - 1e-12 {
            return Err(Error::Domain(format!("φ″({x}) = {d2} < 1 on the amplitude support")));
        }
    }
    let (p0, d0, _) = case.phase.eval(0.0);
    if p0.abs() > 1e-12 || d0.abs() > 1e-12 {
        return Err(Error::Domain("phase must satisfy φ(0) = φ′(0) = 0".into()));
    }
    Ok(())
}

/// ∫ e^{itφ} a by Filon panels with the quadratic remainder of φ kept in the
/// amplitude.
fn oscillatory_integral(case: &StationaryPhaseCase, a: f64, b: f64) -> Complex64 {
    let t = case.t;
    let gl = GaussLegendre::new(24);
    let (_, _, d2max) = (0..=64).map(|k| case.phase.eval(a + (b - a) * k as f64 / 64.0)).fold((0.0, 0.0, 0.0f64), |m, v| (0.0, 0.0, m.2.max(v.2.abs())));
    let h_cap = (2.0 / (t * d2max).sqrt()).min(0.25);
    let mut total = Complex64::new(0.0, 0.0);
    let panels = ((b - a) / h_cap).ceil() as usize;
    let h = (b - a) / panels as f64;
    let mut g = vec![Complex64::new(0.0, 0.0); gl.len()];
    for p in 0..panels {
        let (x0, x1) = (a + p as f64 * h, a + (p + 1) as f64 * h);
        let c = 0.5 * (x0 + x1);
        let (pc, dc, _) = case.phase.eval(c);
        for (j, u) in gl.nodes.iter().enumerate() {
            let x = c + 0.5 * h * u;
            let (px, _, _) = case.phase.eval(x);
            let (ax, _) = case.amplitude.eval(x);
            g[j] = Complex64::from_polar(ax, t * (px - pc - dc * (x - c)));
        }
        let (v, _) = crate::quad::filon_panel(&gl, x0, x1, t * dc, &g);
        total += v * Complex64::from_polar(1.0, t * (pc - dc * c));
    }
    total
}

/// (lhs, rhs) of the majorant, plus the integral and oracle error.
pub fn stationary_phase_check(case: &StationaryPhaseCase) -> Result<StationaryPhaseResult> {
    let Some((a, b)) = case.amplitude.support() else {
        check_convexity(case, -1.0, 1.0)?;
        return Ok(StationaryPhaseResult { integral: Complex64::new(0.0, 0.0), lhs: 0.0, rhs: 0.0, oracle_error: Some(0.0) });
    };
    check_convexity(case, a, b)?;
    let integral = oscillatory_integral(case, a, b);
    let d = case.delta();
    let d2 = d * d;
    // split the majorant integrals at ±δ and 0
    let mut cuts = vec![a, b];
    for c in [-d, 0.0, d] {
        if c > a && c < b {
            cuts.push(c);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut first = 0.0;
    let mut second = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        first += adaptive_gk_real(lo, hi, 1e-14, &mut |x| case.amplitude.eval(x).0.abs() / (d2 + x * x)).0;
        if lo >= d || hi <= -d {
            second += adaptive_gk_real(lo, hi, 1e-14, &mut |x| case.amplitude.eval(x).1.abs() / x.abs()).0;
        }
    }
    let rhs = d2 * (first + second);
    let oracle_error = case.oracle().map(|o| (o - integral).norm() / o.norm().max(1e-300));
    Ok(StationaryPhaseResult { integral, lhs: integral.norm(), rhs, oracle_error })
}

/// The fixed library of twelve cases.
pub fn case_library() -> Vec<StationaryPhaseCase> {
    use Amplitude::*;
    use Phase::*;
    let c = |name, phase, amplitude, t| StationaryPhaseCase { name, phase, amplitude, t };
    vec![
        c("quadratic_gauss_t1e4", Quadratic(1.0), Gaussian { center: 0.0 }, 1e4),
        c("quadratic_gauss_t1e2", Quadratic(1.0), Gaussian { center: 0.0 }, 1e2),
        c("quadratic_gauss_shift1", Quadratic(1.0), Gaussian { center: 1.0 }, 1e3),
        c("quadratic_gauss_shift3", Quadratic(1.0), Gaussian { center: 3.0 }, 1e4),
        c("half_quadratic_gauss", Quadratic(0.5), Gaussian { center: 0.5 }, 3e3),
        c("zero_amplitude", Quadratic(1.0), Zero, 1e3),
        c("bump_outside_t1e3", Quadratic(1.0), Bump { lo: 1.0, hi: 2.0 }, 1e3),
        c("bump_outside_t1e4", Quadratic(1.0), Bump { lo: 1.0, hi: 2.0 }, 1e4),
        c("bump_inside", Quadratic(1.0), Bump { lo: -0.5, hi: 0.5 }, 1e3),
        c("quartic_gauss", Quartic, Gaussian { center: 0.0 }, 1e3),
        c("cosine_bump", Cosine, Bump { lo: -1.0, hi: 2.0 }, 1e3),
        c("shifted_critical_point", Shifted { beta: -1.4 }, Gaussian { center: 0.3 }, 1e3),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_matches_closed_form() {
        for case in case_library().iter().filter(|c| matches!(c.amplitude, Amplitude::Gaussian { .. }) && matches!(c.phase, Phase::Quadratic(_))) {
            let r = stationary_phase_check(case).unwrap();
            assert!(r.oracle_error.unwrap() < 1e-6, "{}: {:?}", case.name, r);
        }
    }

    #[test]
    fn zero_amplitude_gives_zeros() {
        let case = StationaryPhaseCase { name: "z", phase: Phase::Quadratic(1.0), amplitude: Amplitude::Zero, t: 10.0 };
        let r = stationary_phase_check(&case).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn rejects_flat_phase() {
        let case = StationaryPhaseCase { name: "flat", phase: Phase::Quadratic(0.25), amplitude: Amplitude::Bump { lo: 0.0, hi: 1.0 }, t: 10.0 };
        assert!(stationary_phase_check(&case).is_err());
    }

    #[test]
    fn nonstationary_bump_decays_like_inverse_t() {
        let mk = |t| StationaryPhaseCase { name: "b", phase: Phase::Quadratic(1.0), amplitude: Amplitude::Bump { lo: 1.0, hi: 2.0 }, t };
        let r1 = stationary_phase_check(&mk(1e3)).unwrap();
        let r2 = stationary_phase_check(&mk(4e3)).unwrap();
        // smooth compactly supported amplitude: faster than any power; at least t^{-1}
        assert!(r2.lhs <= r1.lhs / 4.0 * 1.01);
        assert!((r2.rhs / r1.rhs - 0.25).abs() < 0.05);
    }
}
