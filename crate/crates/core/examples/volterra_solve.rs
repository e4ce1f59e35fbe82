//! Second-kind Volterra solves: a separable kernel marched in O(N) and a
//! general kernel, each checked against its closed form.

use conic_scatter::volterra::{volterra_solve, Direction, Factors, GeneralKernel, SeparableKernel, VolterraProblem};
use conic_scatter::Complex64;

fn main() -> conic_scatter::Result<()> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // f(x) = 1 + ∫_x^4 f(s) ds  ⇒  f = e^{4−x}
    let k = SeparableKernel(|_x| Factors { rank: 1, a: [one, zero], da: [zero; 2], b: [one, zero] });
    let g = |_x: f64| [one, zero];
    let p = VolterraProblem::new(&k, &g, 0.0, 4.0, Direction::Backward);
    let s = volterra_solve(&p)?;
    for x in [0.0, 1.0, 3.5] {
        let (f, _) = s.eval(x)?;
        println!("backward, x = {x}: f = {:.14}  exact {:.14}", f.re, (4.0 - x).exp());
    }
    println!("μ = ∫ sup|K| = {:.3}, sweeps {}", s.mu, s.sweeps);

    // f(x) = 1 − ∫_0^x (x − s) f(s) ds  ⇒  f = cos x
    let k = GeneralKernel(|x: f64, s: f64| Complex64::new(s - x, 0.0));
    let p = VolterraProblem::new(&k, &g, 0.0, 6.0, Direction::Forward);
    let s = volterra_solve(&p)?;
    for x in [1.0, 3.0, 6.0] {
        let (f, df) = s.eval(x)?;
        println!("general, x = {x}: f = {:.12} (cos {:.12}), f' = {:.12} (−sin {:.12})", f.re, x.cos(), df.re, -x.sin());
    }
    Ok(())
}
