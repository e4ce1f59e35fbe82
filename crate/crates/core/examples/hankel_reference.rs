//! Free reference solution for the −1/(4ξ²) tail: f₀(ξ,λ) built from H₀⁺.
//!
//! Shows the Hankel function across the series/asymptotic switch and the
//! reference solution with its oscillation stripped.

use conic_scatter::hankel::{f0_reference, f0_stripped, hankel0_plus};

fn main() -> conic_scatter::Result<()> {
    println!("{:>8} {:>24} {:>24}", "z", "H0+(z)", "H0+'(z)");
    for z in [0.01, 0.5, 2.0, 7.9, 8.1, 50.0] {
        let h = hankel0_plus(z)?;
        println!("{z:>8.2} {:>24} {:>24}", format!("{:.12}", h.value), format!("{:.12}", h.derivative));
    }
    let lambda = 1e-3;
    println!("\nλ = {lambda}");
    for xi in [1.0, 100.0, 1e3, 1e5] {
        let s = f0_reference(xi, lambda)?;
        let (m, _) = f0_stripped(xi, lambda)?;
        println!("ξ = {xi:>8}: f0 = {:.10}, e^(-iλξ) f0 = {:.10}, regime {:?}", s.value, m, s.regime);
    }
    Ok(())
}
