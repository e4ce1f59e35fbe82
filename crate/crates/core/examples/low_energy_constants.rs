//! Low-energy validation: fits the constants of W(λ) ≈ 2λ(1 + i c₃ + i(2/π) log λ)
//! and the coefficient laws on λ ∈ [1e−6, 1e−3].

use conic_scatter::geometry::{make_profile, ProfileDoc};
use conic_scatter::jost::validate::validate_low_energy;
use conic_scatter::jost::Medium;

fn main() -> conic_scatter::Result<()> {
    let medium = Medium::new(&make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 1.0))?)?;
    let grid: Vec<f64> = (0..13).map(|k| 1e-6 * 1000f64.powf(k as f64 / 12.0)).collect();
    let report = validate_low_energy(&medium, &grid)?;
    let c = &report.constants;
    println!("c1 = {:.6}  kappa = {:.6}  c2 = {:.6}", c.c1, c.kappa, c.c2);
    println!("c3 = {:.6} (from a+), {:.6} (from W), {:.6} (kappa − c1 c2)", c.c3, c.c3_w, c.c3_theory);
    println!("c4 = {:.6}  c5 = {:.6}  gamma0 = {:.6}  gamma1 = {:.6}", c.c4, c.c5, c.gamma0, c.gamma1);
    for check in &report.checks {
        println!("[{}] {:<30} {:.3e} / {:.1e}", if check.pass { "pass" } else { "FLAG" }, check.name, check.worst, check.threshold);
    }
    Ok(())
}
