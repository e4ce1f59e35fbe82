use conic_scatter::config::{Grid, Scale};
use conic_scatter::geometry::{make_profile, ProfileDoc};
use conic_scatter::jost::{bracket, jost_pair, Medium};
use conic_scatter::kernel::{energy_cutoff, low_region, smooth_step, spectral_density, KernelEngine, KernelKind};
use proptest::prelude::*;
use std::sync::OnceLock;

fn hyperboloid() -> &'static Medium {
    static M: OnceLock<Medium> = OnceLock::new();
    M.get_or_init(|| Medium::new(&make_profile(&ProfileDoc::new("hyperboloid").with_param("a", 1.0)).unwrap()).unwrap())
}

fn cone() -> &'static Medium {
    static M: OnceLock<Medium> = OnceLock::new();
    M.get_or_init(|| Medium::new(&make_profile(&ProfileDoc::new("two-sided-cone-smoothed").with_param("a", 0.5)).unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_values_are_monotone(min in 1e-3f64..10.0, span in 1e-3f64..100.0, count in 1usize..200, log in any::<bool>()) {
        let scale = if log { Scale::Log } else { Scale::Linear };
        let g = Grid::new(min, min + span, count, scale).unwrap();
        let v = g.values();
        prop_assert_eq!(v.len(), count);
        prop_assert_eq!(v[0], min);
        if count > 1 {
            prop_assert_eq!(v[count - 1], min + span);
        }
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cutoffs_stay_in_unit_interval(u in -2.0f64..3.0, xi in -1e4f64..1e4, lambda in 1e-8f64..1e3) {
        let s = smooth_step(u);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!((s + smooth_step(1.0 - u) - 1.0).abs() < 1e-14);
        let c = energy_cutoff(lambda, 1e-2);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!(lambda > 1e-2 || c > 0.0);
        prop_assert!(lambda < 1e-2 || c == 0.0);
        let l = low_region(xi, lambda);
        let p = xi.abs() * lambda;
        prop_assert!((0.0..=1.0).contains(&l));
        prop_assert!(p > 0.5 || l == 1.0);
        prop_assert!(p < 2.0 || l == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetric_profile_mirrors_jost_solutions(lambda in 0.05f64..5.0, xi in -30.0f64..30.0) {
        let (p, n) = jost_pair(hyperboloid(), lambda).unwrap();
        let a = p.pair(xi).unwrap();
        let b = n.pair(-xi).unwrap();
        prop_assert!((a[0] - b[0]).norm() < 1e-8 * (1.0 + a[0].norm()));
        prop_assert!((a[1] + b[1]).norm() < 1e-8 * (1.0 + a[1].norm()));
    }

    #[test]
    fn jost_solutions_solve_the_equation(lambda in 0.01f64..10.0, xi in -50.0f64..50.0) {
        let m = cone();
        let (p, n) = jost_pair(m, lambda).unwrap();
        let h = 1e-4;
        let (_, v) = m.chart.potential_at(xi).unwrap();
        for f in [&p, &n] {
            let d2 = (f.pair(xi + h).unwrap()[1] - f.pair(xi - h).unwrap()[1]) / (2.0 * h);
            let rhs = f.pair(xi).unwrap()[0] * (v - lambda * lambda);
            prop_assert!((d2 - rhs).norm() < 1e-5 * (1.0 + lambda * lambda), "{} vs {}", d2, rhs);
        }
    }

    #[test]
    fn wronskian_is_constant(lambda in 1e-4f64..20.0, xi in -200.0f64..200.0) {
        let m = cone();
        let (p, n) = jost_pair(m, lambda).unwrap();
        let w0 = bracket(p.pair(0.0).unwrap(), n.pair(0.0).unwrap());
        let w = bracket(p.pair(xi).unwrap(), n.pair(xi).unwrap());
        prop_assert!((w - w0).norm() < 1e-8 * w0.norm(), "{} vs {}", w, w0);
    }

    #[test]
    fn density_respects_reflection(lambda in 1e-3f64..5.0, xi in -40.0f64..40.0, xip in -40.0f64..40.0) {
        let m = hyperboloid();
        let a = spectral_density(m, xi, xip, lambda).unwrap();
        let b = spectral_density(m, -xip, -xi, lambda).unwrap();
        prop_assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
    }
}

#[test]
fn kernel_error_estimate_bounds_tolerance_change() {
    let m = hyperboloid();
    let xis = [-10.0, 0.0, 3.0, 30.0];
    let t = 100.0;
    let kind = KernelKind::Schrodinger;
    let pairs: Vec<(f64, f64)> = xis.iter().flat_map(|&a| xis.iter().map(move |&b| (a, b))).collect();
    let mut engine = KernelEngine::new(m, &xis, KernelEngine::lambda_max_for(kind, t, &pairs)).unwrap();
    let coarse: Vec<_> = pairs.iter().map(|&(a, b)| engine.evolution_kernel(kind, t, a, b).unwrap()).collect();
    engine.tol *= 0.5;
    for (s, &(a, b)) in coarse.iter().zip(&pairs) {
        let fine = engine.evolution_kernel(kind, t, a, b).unwrap();
        let diff = (fine.value - s.value).norm();
        assert!(diff <= s.err_est.max(1e-12) * 2.0, "({a}, {b}): diff {diff:.3e}, estimate {:.3e}", s.err_est);
    }
}
