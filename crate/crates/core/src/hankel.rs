//! The Hankel function H₀⁽⁺⁾ = J₀ + iY₀ on the positive axis, and the
//! inverse-square reference solution f₀ with its Green function G₀.

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default seam between the ascending series and the large-argument branch.
pub const SERIES_CUTOFF: f64 = 6.0;
/// Beyond this the Hankel asymptotic expansion is accurate to ~1e-16.
const ASYMPTOTIC_FROM: f64 = 25.0;

/// c₁ = 2/π, the log coefficient of Y₀.
pub const C1: f64 = 2.0 / PI;

/// ϰ = (2/π)(γ − log 2): the constant in Y₀(z) ≈ (2/π) log z + ϰ.
pub fn kappa() -> f64 {
    C1 * (EULER_GAMMA - LN_2)
}

/// c₀ = √(π/2)·e^{iπ/4}.
pub fn c0() -> Complex64 {
    Complex64::from_polar(FRAC_PI_2.sqrt(), FRAC_PI_4)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelEval {
    pub z: f64,
    pub value: Complex64,
    pub derivative: Complex64,
}

/// J₀, J₀', Y₀, Y₀' by the ascending series.
pub fn bessel01_series(z: f64) -> (f64, f64, f64, f64) {
    let q = 0.25 * z * z;
    let mut term = 1.0; // q^k/(k!)^2
    let mut j0 = 1.0;
    let mut dj0 = 0.0; // d/dz of Σ(-q)^k/(k!)^2
    let mut ysum = 0.0;
    let mut dysum = 0.0;
    let mut harmonic = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        j0 += sign * term;
        dj0 += sign * term * 2.0 * kf / z;
        ysum -= sign * harmonic * term;
        dysum -= sign * harmonic * term * 2.0 * kf / z;
        if term * harmonic < 1e-18 * j0.abs().max(1e-3) && k > 3 {
            break;
        }
    }
    let l = (0.5 * z).ln() + EULER_GAMMA;
    let y0 = C1 * (l * j0 + ysum);
    let dy0 = C1 * (j0 / z + l * dj0 + dysum);
    (j0, dj0, y0, dy0)
}

/// J₀, J₀', Y₀, Y₀' by Miller's backward recurrence and the Neumann series.
fn bessel01_miller(z: f64) -> (f64, f64, f64, f64) {
    let mut n = (z as usize) + 60;
    if n % 2 == 1 {
        n += 1;
    }
    let mut j = vec![0.0; n + 2];
    j[n + 1] = 0.0;
    j[n] = 1e-30;
    for k in (1..=n).rev() {
        j[k - 1] = 2.0 * k as f64 / z * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = j[0];
    for k in (2..=n).step_by(2) {
        norm += 2.0 * j[k];
    }
    for v in j.iter_mut() {
        *v /= norm;
    }
    let l = (0.5 * z).ln() + EULER_GAMMA;
    let mut s = 0.0;
    let mut ds = 0.0;
    for k in 1..=n / 2 {
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        let m = 2 * k;
        let dj = 0.5 * (j[m - 1] - j[m + 1]);
        s += sign * j[m] / k as f64;
        ds += sign * dj / k as f64;
    }
    let j0 = j[0];
    let dj0 = -j[1];
    let y0 = C1 * (l * j0 - 2.0 * s);
    let dy0 = C1 * (j0 / z + l * dj0 - 2.0 * ds);
    (j0, dj0, y0, dy0)
}

/// e^{-iz}·H_ν⁽⁺⁾(z) for ν ∈ {0, 1} by the Hankel asymptotic expansion.
fn hankel_asymptotic_scaled(nu: f64, z: f64) -> Complex64 {
    let mu = 4.0 * nu * nu;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let m = (2 * k - 1) as f64;
        term *= Complex64::i() * ((mu - m * m) / (k as f64 * 8.0 * z));
        let t = term.norm();
        if t > last {
            break;
        }
        sum += term;
        last = t;
        if t < 1e-17 {
            break;
        }
    }
    let phase = -(nu * FRAC_PI_2 + FRAC_PI_4);
    Complex64::from_polar((2.0 / (PI * z)).sqrt(), phase) * sum
}

/// H₀⁽⁺⁾(z) and its z-derivative.
pub fn hankel0_plus(z: f64) -> Result<HankelEval> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("hankel0_plus needs z > 0, got {z}")));
    }
    let (value, derivative) = if z <= SERIES_CUTOFF {
        let (j0, dj0, y0, dy0) = bessel01_series(z);
        (Complex64::new(j0, y0), Complex64::new(dj0, dy0))
    } else if z <= ASYMPTOTIC_FROM {
        let (j0, dj0, y0, dy0) = bessel01_miller(z);
        (Complex64::new(j0, y0), Complex64::new(dj0, dy0))
    } else {
        let e = Complex64::from_polar(1.0, z);
        (e * hankel_asymptotic_scaled(0.0, z), -e * hankel_asymptotic_scaled(1.0, z))
    };
    Ok(HankelEval { z, value, derivative })
}

/// e^{-iz}·(H₀⁽⁺⁾(z), H₀⁽⁺⁾'(z)); free of phase round-off for large z.
pub fn hankel0_plus_scaled(z: f64) -> Result<(Complex64, Complex64)> {
    if z > ASYMPTOTIC_FROM {
        Ok((hankel_asymptotic_scaled(0.0, z), -hankel_asymptotic_scaled(1.0, z)))
    } else {
        let h = hankel0_plus(z)?;
        let e = Complex64::from_polar(1.0, -z);
        Ok((h.value * e, h.derivative * e))
    }
}

/// Where a wave sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Oscillatory,
    LowEnergyBasis,
    HankelReference,
}

/// Value and ξ-derivative of a solution of 𝓗f = λ²f at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub xi: f64,
    pub lambda: f64,
    pub value: Complex64,
    pub dvalue: Complex64,
    pub regime: Regime,
}

/// m-form of the reference: e^{-iξλ}·f₀ and its ξ-derivative
/// (of e^{-iξλ}f₀, not of f₀).
pub fn f0_stripped(xi: f64, lambda: f64) -> Result<(Complex64, Complex64)> {
    if !(xi > 0.0) || !(lambda > 0.0) {
        return Err(Error::Domain(format!("f0 needs ξ>0, λ>0 (ξ={xi}, λ={lambda})")));
    }
    let z = xi * lambda;
    let (h, dh) = hankel0_plus_scaled(z)?;
    let s = z.sqrt();
    let c = c0();
    let m = c * s * h;
    // d/dξ [c√z e^{-iz}H(z)] = λ·c[(1/(2√z))h + √z(dh_scaled)] where
    // dh_scaled = e^{-iz}H' and d/dz(e^{-iz}H) = dh_scaled − i h
    let dm = c * lambda * (h / (2.0 * s) + s * (dh - Complex64::i() * h));
    Ok((m, dm))
}

/// f₀(ξ,λ) = √(π/2)e^{iπ/4}√(ξλ)H₀⁽⁺⁾(ξλ): solves −f″ − f/(4ξ²) = λ²f.
pub fn f0_reference(xi: f64, lambda: f64) -> Result<WaveSample> {
    let (m, dm) = f0_stripped(xi, lambda)?;
    let e = Complex64::from_polar(1.0, xi * lambda);
    Ok(WaveSample {
        xi,
        lambda,
        value: e * m,
        dvalue: e * (dm + Complex64::i() * lambda * m),
        regime: Regime::HankelReference,
    })
}

/// G₀(ξ,η;λ) = [conj f₀(ξ) f₀(η) − f₀(ξ) conj f₀(η)]/(2iλ) for 0 < ξ ≤ η.
pub fn g0_green(xi: f64, eta: f64, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("G0 needs λ>0, got {lambda}")));
    }
    if !(xi > 0.0 && xi <= eta) {
        return Err(Error::Domain(format!("G0 needs 0 < ξ ≤ η (ξ={xi}, η={eta})")));
    }
    if xi == eta {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let a = f0_reference(xi, lambda)?.value;
    let b = f0_reference(eta, lambda)?.value;
    Ok((a.conj() * b - a * b.conj()) / (Complex64::i() * 2.0 * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wronskian_identity_across_branches() {
        for z in [1e-6, 0.1, 1.0, 5.9, 6.0, 6.1, 12.0, 24.9, 25.1, 80.0, 1e4] {
            let h = hankel0_plus(z).unwrap();
            let w = h.value.re * h.derivative.im - h.derivative.re * h.value.im;
            let target = 2.0 / (PI * z);
            assert!((w - target).abs() <= 1e-10 * target, "z={z} w={w}");
        }
    }

    #[test]
    fn seams_are_continuous() {
        for zc in [SERIES_CUTOFF, ASYMPTOTIC_FROM] {
            let a = hankel0_plus(zc).unwrap();
            let b = hankel0_plus(zc * (1.0 + 1e-13)).unwrap();
            assert!((a.value - b.value).norm() < 1e-10);
            assert!((a.derivative - b.derivative).norm() < 1e-10);
        }
    }

    #[test]
    fn green_function_is_antisymmetric_on_diagonal() {
        assert_eq!(g0_green(2.0, 2.0, 0.3).unwrap(), Complex64::new(0.0, 0.0));
        assert!(g0_green(2.0, 1.0, 0.3).is_err());
        assert!(g0_green(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(hankel0_plus(0.0).is_err());
        assert!(hankel0_plus(-1.0).is_err());
        assert!(f0_reference(-1.0, 1.0).is_err());
    }
}
