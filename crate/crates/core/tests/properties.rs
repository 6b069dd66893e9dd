use proptest::prelude::*;
use wlab_core::ensemble::{sample_gue, HermitianMatrix};
use wlab_core::equilibrium::{density_mass, solve_endpoints, PotentialSpec};
use wlab_core::localwindow::{equispaced_profile, WeightSpec};
use wlab_core::orthopoly::{cd_kernel, correlation, density, kernel_direct, orthonormal_basis, Quadrature};
use wlab_core::rng::StreamFactory;
use wlab_core::spectral::{count_below, count_interval, eigenvalues, Spectrum};
use wlab_core::stats::Moments;
use wlab_core::universality::{sine_kernel, vandermonde_statistic};

fn weight_strategy() -> impl Strategy<Value = (usize, WeightSpec)> {
    (2usize..10, prop::collection::vec((1.02f64..4.0, any::<bool>()), 0..16)).prop_map(|(n, rs)| {
        let roots = rs.into_iter().map(|(r, left)| if left { -r } else { r }).collect();
        (n, WeightSpec::new(n, roots).unwrap())
    })
}

fn spectrum_strategy() -> impl Strategy<Value = Spectrum> {
    prop::collection::vec(-3.0f64..3.0, 2..40).prop_map(|v| Spectrum::separated(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_satisfies_cauchy_schwarz((n, w) in weight_strategy(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let rec = orthonormal_basis(&w, n).unwrap();
        let kxy = kernel_direct(&rec, &w, n, x, y).unwrap();
        let kxx = kernel_direct(&rec, &w, n, x, x).unwrap();
        let kyy = kernel_direct(&rec, &w, n, y, y).unwrap();
        prop_assert!(kxy * kxy <= kxx * kyy * (1.0 + 1e-10) + 1e-14);
    }

    #[test]
    fn christoffel_darboux_matches_direct_sum((n, w) in weight_strategy(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let rec = orthonormal_basis(&w, n).unwrap();
        let cd = cd_kernel(&rec, &w, n, x, y).unwrap().value;
        let direct = kernel_direct(&rec, &w, n, x, y).unwrap();
        let scale = kernel_direct(&rec, &w, n, x, x).unwrap().max(kernel_direct(&rec, &w, n, y, y).unwrap());
        prop_assert!((cd - direct).abs() <= 1e-8 * scale.max(1.0), "{cd} vs {direct}");
    }

    #[test]
    fn density_is_a_probability_density((n, w) in weight_strategy()) {
        let rec = orthonormal_basis(&w, n).unwrap();
        let q = Quadrature::gauss_legendre(2 * n + w.degree() + 8).unwrap();
        let mut mass = 0.0;
        for (x, wt) in q.nodes.iter().zip(&q.weights) {
            let r = density(&rec, &w, n, *x).unwrap();
            prop_assert!(r >= 0.0);
            mass += wt * r;
        }
        prop_assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
    }

    #[test]
    fn correlation_functions_are_nonnegative((n, w) in weight_strategy(), mut pts in prop::collection::vec(-1.0f64..1.0, 1..4)) {
        pts.truncate(n);
        let rec = orthonormal_basis(&w, n).unwrap();
        let c = correlation(&rec, &w, n, &pts).unwrap();
        prop_assert!(c.value >= -1e-10, "{}", c.value);
    }

    #[test]
    fn counts_of_adjacent_intervals_add(s in spectrum_strategy(), mut cuts in prop::array::uniform3(-4.0f64..4.0)) {
        cuts.sort_by(f64::total_cmp);
        let [a, b, c] = cuts;
        prop_assert_eq!(count_interval(&s, a, b) + count_interval(&s, b, c), count_interval(&s, a, c));
        prop_assert!(count_below(&s, a) <= count_below(&s, c));
    }

    #[test]
    fn moment_merging_is_order_free(xs in prop::collection::vec(-100.0f64..100.0, 0..50), split in 0usize..50) {
        let k = split.min(xs.len());
        let whole: Moments = xs.iter().copied().collect();
        let left: Moments = xs[..k].iter().copied().collect();
        let right: Moments = xs[k..].iter().copied().collect();
        let merged = right.merge(left);
        prop_assert_eq!(merged.count, whole.count);
        prop_assert!((merged.sum - whole.sum).abs() <= 1e-9 * (1.0 + whole.sumsq.sqrt()));
        prop_assert!((merged.sumsq - whole.sumsq).abs() <= 1e-9 * (1.0 + whole.sumsq));
    }

    #[test]
    fn spectrum_is_invariant_under_relabelling(seed in any::<u64>(), perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let h = sample_gue(6, &mut StreamFactory::new(seed).stream(0)).unwrap();
        let mut p = HermitianMatrix::zeros(6);
        for i in 0..6 {
            for j in i..6 {
                p.set(i, j, h.get(perm[i], perm[j]));
            }
        }
        let a = eigenvalues(&h).unwrap();
        let b = eigenvalues(&p).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn vandermonde_statistic_decreases_with_eta(s in spectrum_strategy(), e1 in 0.001f64..0.5, e2 in 0.001f64..0.5) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(vandermonde_statistic(&s, lo).unwrap() >= vandermonde_statistic(&s, hi).unwrap());
    }

    #[test]
    fn sine_kernel_is_even_and_bounded(u in -50.0f64..50.0) {
        prop_assert!((sine_kernel(u) - sine_kernel(-u)).abs() < 1e-15);
        prop_assert!(sine_kernel(u).abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn equispaced_equilibrium_has_unit_mass(n in 8usize..48, rho0 in 0.3f64..0.8, b in 1.5f64..2.5) {
        let pot = PotentialSpec::point_charge(equispaced_profile(n, rho0, b, 200).unwrap()).unwrap();
        let s = solve_endpoints(&pot).unwrap();
        prop_assert!((s.a + s.b).abs() < 1e-9);
        prop_assert!((density_mass(&pot, &s).unwrap() - 1.0).abs() < 1e-8);
    }
}
