//! Arclength chart and induced potential of a hyperboloid of one sheet.
//!
//! Prints ξ, r(ξ), V(ξ) and ξ²V(ξ), which tends to −1/4 on the conical ends.

use conic_scatter::geometry::{fit_conical_constants, make_profile, ArclengthChart, ProfileDoc};

fn main() -> conic_scatter::Result<()> {
    let profile = make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 1.0))?;
    let chart = ArclengthChart::new(&profile)?;
    let (lo, hi) = chart.xi_range();
    println!("arclength range [{lo:.3}, {hi:.3}]");
    println!("{:>12} {:>14} {:>16} {:>12}", "xi", "r", "V", "xi^2 V");
    for xi in [0.0, 0.5, 1.0, 3.0, 10.0, 100.0, 1e3, 1e4] {
        let (_, v) = chart.potential_at(xi)?;
        println!("{xi:>12.1} {:>14.6} {v:>16.6e} {:>12.6}", chart.r_of_xi(xi)?, xi * xi * v);
    }
    let fit = fit_conical_constants(&chart)?;
    println!("ξ − √2·x → {:.10}, sup |ξ³V₁| on [10, X] = {:.6}", fit.c_inf, fit.c3);
    Ok(())
}
