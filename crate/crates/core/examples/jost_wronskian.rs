//! Jost solutions, Wronskian and reflection/transmission coefficients on a
//! hyperboloid, from λ = 1e−6 to λ = 100.

use conic_scatter::geometry::{make_profile, ProfileDoc};
use conic_scatter::jost::{jost_pair, scattering_data, Medium};

fn main() -> conic_scatter::Result<()> {
    let medium = Medium::new(&make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 1.0))?)?;
    println!("{:>8} {:>34} {:>12} {:>12} {:>10}", "lambda", "W/(2λ)", "|alpha-|", "|beta-|", "unitarity");
    for lambda in [1e-6, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0] {
        let s = scattering_data(&medium, lambda)?;
        let u = s.beta_minus.norm_sqr() - s.alpha_minus.norm_sqr() - 1.0;
        println!("{lambda:>8.0e} {:>34} {:>12.6e} {:>12.6} {u:>10.1e}", format!("{:.10}", s.w / (2.0 * lambda)), s.alpha_minus.norm(), s.beta_minus.norm());
    }
    let (plus, minus) = jost_pair(&medium, 0.5)?;
    for xi in [-20.0f64, 0.0, 20.0] {
        let (m, _) = plus.m(xi.max(0.0))?;
        println!("λ = 0.5, ξ = {xi:>5}: f+ = {:.8}, f- = {:.8}, m+(ξ∨0) = {:.8}", plus.pair(xi)?[0], minus.pair(xi)?[0], m);
    }
    Ok(())
}
