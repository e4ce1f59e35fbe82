//! Stationary-phase majorant over the fixed case library.

use conic_scatter::kernel::statphase::{case_library, stationary_phase_check};

fn main() -> conic_scatter::Result<()> {
    let mut c_sp: f64 = 0.0;
    for case in case_library() {
        let r = stationary_phase_check(&case)?;
        let ratio = if r.rhs > 0.0 { r.lhs / r.rhs } else { 0.0 };
        c_sp = c_sp.max(ratio);
        let oracle = r.oracle_error.map_or(String::from("-"), |e| format!("{e:.1e}"));
        println!("{:<26} t = {:>7.0e}  lhs {:.4e}  rhs {:.4e}  ratio {ratio:.4}  oracle {oracle}", case.name, case.t, r.lhs, r.rhs);
    }
    println!("C_sp = {c_sp:.4}");
    Ok(())
}
