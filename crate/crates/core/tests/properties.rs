//! Randomized checks of the structural invariants.

use proptest::prelude::*;

use thinshell::bodies::BodySpec;
use thinshell::clt::{normal_cdf, SmoothingKernel};
use thinshell::estimators::{
    kolmogorov_distance, power_sum_variance, thin_shell_stats, verify_identities, weighted_square_variance,
    WeightVector,
};
use thinshell::sampler::{sample_counterexample, sample_exact, sample_projections};
use thinshell::spectral::{extrapolated_lambda1, lowest_eigenpairs, multiplicity, rasterize, spacing_for_cells};
use thinshell::transport::{
    hminus1_norm, monotone_transport_1d, w2_1d, w2_assignment, DiscreteMeasure, SectionFn,
};

fn convex_body(dim: usize) -> impl Strategy<Value = BodySpec> {
    prop_oneof![
        (0.2f64..3.0).prop_map(move |a| BodySpec::cube(dim, a)),
        (0.2f64..3.0).prop_map(move |r| BodySpec::euclidean_ball(dim, r)),
        (1.0f64..6.0, 0.2f64..3.0).prop_map(move |(p, r)| BodySpec::lp_ball(dim, p, r)),
        proptest::collection::vec(0.2f64..3.0, dim).prop_map(BodySpec::product_of_intervals),
    ]
}

fn body_and_point() -> impl Strategy<Value = (BodySpec, Vec<f64>, Vec<bool>)> {
    (1usize..6).prop_flat_map(|n| {
        (convex_body(n), proptest::collection::vec(-3.0f64..3.0, n), proptest::collection::vec(any::<bool>(), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn membership_is_sign_flip_invariant((body, x, flips) in body_and_point()) {
        let y: Vec<f64> = x.iter().zip(&flips).map(|(v, f)| if *f { -v } else { *v }).collect();
        prop_assert_eq!(body.contains(&x).unwrap(), body.contains(&y).unwrap());
    }

    #[test]
    fn sections_are_symmetric((body, x, _) in body_and_point(), axis in 0usize..6) {
        let i = axis % body.dim;
        if let Ok(s) = body.axis_section(&x, i) {
            prop_assert_eq!(s.lo, -s.hi);
            let mut z = x.clone();
            z[i] = 0.5 * s.hi;
            prop_assert!(body.contains(&z).unwrap());
        }
    }

    #[test]
    fn convex_combinations_stay_inside(body in (2usize..5).prop_flat_map(convex_body), seed in any::<u64>(), t in 0.0f64..1.0) {
        let s = sample_exact(&body, 2, seed).unwrap();
        let z: Vec<f64> = s.row(0).iter().zip(s.row(1)).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        prop_assert!(body.contains(&z).unwrap());
    }

    #[test]
    fn unit_moments_rescale_to_identity(body in (1usize..6).prop_flat_map(convex_body)) {
        let ones = vec![1.0; body.dim];
        let once = body.isotropic_scale(&ones).unwrap();
        prop_assert_eq!(&once, &body);
        prop_assert_eq!(once.isotropic_scale(&ones).unwrap(), body);
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable(body in (1usize..5).prop_flat_map(convex_body), seed in any::<u64>()) {
        let a = sample_exact(&body, 64, seed).unwrap();
        let b = sample_exact(&body, 64, seed).unwrap();
        prop_assert_eq!(a.data(), b.data());
        let longer = sample_exact(&body, 100, seed).unwrap();
        prop_assert_eq!(&longer.data()[..64 * body.dim], a.data());
        for row in a.iter_rows() {
            prop_assert!(body.contains(row).unwrap());
        }
    }

    #[test]
    fn power_identities_hold(a in 0.1f64..3.0, p in 0.1f64..4.0, r in 0.1f64..3.0) {
        let v = verify_identities(a, p, r).unwrap();
        prop_assert!(v.max_relative_gap() <= 1e-10, "{:?}", v);
    }

    #[test]
    fn kernel_is_even_and_bounded(xi in -2.0f64..2.0) {
        let k = SmoothingKernel::shared();
        prop_assert_eq!(k.char_fn(xi), k.char_fn(-xi));
        prop_assert!(k.char_fn(xi) <= 1.0 && k.char_fn(xi) >= 0.0);
        if xi.abs() >= 1.0 {
            prop_assert_eq!(k.char_fn(xi), 0.0);
        }
    }

    #[test]
    fn kernel_cdf_derivative_is_density(x in -50.0f64..50.0) {
        let k = SmoothingKernel::shared();
        let h = 1e-4;
        let d = (k.cdf(x + h) - k.cdf(x - h)) / (2.0 * h);
        prop_assert!((d - k.density(x)).abs() <= 1e-6, "x = {}: {} vs {}", x, d, k.density(x));
    }

    #[test]
    fn normal_cdf_matches_erfc(t in -30.0f64..30.0) {
        let want = 0.5 * reference_erfc(-t / std::f64::consts::SQRT_2);
        prop_assert!((normal_cdf(t) - want).abs() <= 1e-14);
    }

    #[test]
    fn w2_is_a_metric(
        a in proptest::collection::vec((-2.0f64..2.0, 0.1f64..1.0), 2..12),
        b in proptest::collection::vec((-2.0f64..2.0, 0.1f64..1.0), 2..12),
        c in proptest::collection::vec((-2.0f64..2.0, 0.1f64..1.0), 2..12),
    ) {
        let make = |v: &[(f64, f64)]| {
            let total: f64 = v.iter().map(|p| p.1).sum();
            DiscreteMeasure::line(v.iter().map(|p| p.0).collect(), v.iter().map(|p| p.1 / total).collect()).unwrap()
        };
        let (mu, nu, rho) = (make(&a), make(&b), make(&c));
        let (ab, ba) = (w2_1d(&mu, &nu).unwrap(), w2_1d(&nu, &mu).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ab <= w2_1d(&mu, &rho).unwrap() + w2_1d(&rho, &nu).unwrap() + 1e-12);
    }

    #[test]
    fn assignment_agrees_on_the_line(xs in proptest::collection::vec(-2.0f64..2.0, 1..30), ys in proptest::collection::vec(-2.0f64..2.0, 30)) {
        let k = xs.len();
        let mu = DiscreteMeasure::line(xs, vec![1.0 / k as f64; k]).unwrap();
        let nu = DiscreteMeasure::line(ys[..k].to_vec(), vec![1.0 / k as f64; k]).unwrap();
        prop_assert!((w2_assignment(&mu, &nu).unwrap() - w2_1d(&mu, &nu).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn monotone_map_fixes_endpoints(eps in -0.45f64..0.45) {
        let psi: SectionFn = std::sync::Arc::new(|t: f64| t * t);
        let dpsi: SectionFn = std::sync::Arc::new(|t: f64| 2.0 * t);
        let map = monotone_transport_1d(psi, dpsi, -1.0, 1.0, eps).unwrap();
        prop_assert!(map.is_monotone(2000));
        prop_assert!((map.apply(-1.0) + 1.0).abs() < 1e-15 && (map.apply(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hminus1_is_homogeneous(c in -5.0f64..5.0) {
        let mu = DiscreteMeasure::lebesgue_interval(-1.0, 1.0, 256).unwrap();
        let u: Vec<f64> = mu.points().iter().map(|x| x * x * x).collect();
        let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
        let (a, b) = (hminus1_norm(&mu, &u).unwrap().norm, hminus1_norm(&mu, &cu).unwrap().norm);
        prop_assert!((b - c.abs() * a).abs() <= 1e-8 * (1.0 + a));
    }
}

/// Reference `erfc`: Maclaurin series below 2, Lentz continued fraction above.
fn reference_erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - reference_erfc(-x);
    }
    if x < 2.0 {
        // erf by its Maclaurin series.
        let mut term = x;
        let mut sum = x;
        for k in 1..80 {
            term *= -x * x / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // Lentz continued fraction for erfc.
        let mut f = x;
        let (mut c, mut d) = (x, 0.0);
        for k in 1..200 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = 1.0 / d;
            c = x + a / c;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
    }
}

#[test]
fn sign_patterns_are_uniform() {
    // χ² over the 8 octants, 1% critical value for 7 degrees of freedom.
    for body in [BodySpec::cube(3, 1.0), BodySpec::euclidean_ball(3, 1.0), BodySpec::lp_ball(3, 1.0, 1.0)] {
        let s = sample_exact(&body, 80_000, 17).unwrap();
        let mut counts = [0usize; 8];
        for r in s.iter_rows() {
            counts[(r[0] > 0.0) as usize | ((r[1] > 0.0) as usize) << 1 | ((r[2] > 0.0) as usize) << 2] += 1;
        }
        let e = 10_000.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 18.475, "{body}: χ² = {chi2}");
    }
}

#[test]
fn projections_are_independent_of_worker_count() {
    let body = BodySpec::lp_ball(8, 1.5, 1.0);
    let theta = vec![1.0 / 8f64.sqrt(); 8];
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| sample_projections(&body, &theta, 5000, 3).unwrap());
    let b = many.install(|| sample_projections(&body, &theta, 5000, 3).unwrap());
    assert_eq!(a, b);
}

#[test]
fn variance_bounds_hold_on_random_weights() {
    for (k, body) in [BodySpec::cube(6, 1.0), BodySpec::euclidean_ball(6, 1.0), BodySpec::lp_ball(6, 1.0, 1.0)]
        .into_iter()
        .enumerate()
    {
        let iso = body.isotropic().unwrap();
        let s = sample_exact(&iso, 40_000, 90 + k as u64).unwrap();
        for j in 0..5 {
            let a: Vec<f64> = (0..6).map(|i| ((i * 7 + j * 3) % 5) as f64 / 4.0).collect();
            let w = weighted_square_variance(&s, &WeightVector::coefficients(a.clone()).unwrap()).unwrap();
            assert!(w.estimate.value <= w.bound + 4.0 / 3.0 * w.estimate.half_width, "{body}: {w:?}");
            let p = WeightVector::exponents((0..6).map(|i| 0.5 + i as f64 * 0.5).collect()).unwrap();
            let ps = power_sum_variance(&s, &WeightVector::coefficients(a).unwrap(), &p).unwrap();
            assert!(ps.within(3.0), "{body}: {ps:?}");
        }
        let st = thin_shell_stats(&s).unwrap();
        assert!(st.shell_dev.value <= 16.0 + st.shell_dev.half_width);
    }
}

#[test]
fn counterexample_stays_far_from_normal() {
    for n in [2, 5, 33, 100] {
        let theta = vec![1.0 / (n as f64).sqrt(); n];
        let values = sample_projections(&BodySpec::counterexample_cross(n), &theta, 200_000, n as u64).unwrap();
        let kd = kolmogorov_distance(&values, normal_cdf).unwrap();
        assert!(kd.distance >= 0.04, "n = {n}: {kd:?}");
        let m = sample_counterexample(n, 10, 1).unwrap();
        assert_eq!(m.rows(), 10);
    }
}

#[test]
fn interval_norm_is_stable_under_refinement() {
    let norm = |nodes: usize| {
        let mu = DiscreteMeasure::lebesgue_interval(-1.0, 1.0, nodes).unwrap();
        let u: Vec<f64> = mu.points().iter().map(|x| 2.0 * x).collect();
        hminus1_norm(&mu, &u).unwrap().norm
    };
    for nodes in [512, 1024, 2048] {
        let (a, b) = (norm(nodes), norm(2 * nodes));
        assert!((a - b).abs() / b <= 0.02, "{nodes}: {a} vs {b}");
    }
}

#[test]
fn neumann_operator_annihilates_constants() {
    for body in [BodySpec::cube(2, 1.0), BodySpec::euclidean_ball(2, 1.0), BodySpec::lp_ball(2, 1.0, 1.0)] {
        let g = rasterize(&body, spacing_for_cells(&body, 40)).unwrap();
        let l = g.laplacian(&vec![1.0; g.len()]);
        assert!(l.iter().all(|v| v.abs() <= 1e-12), "{body}");
    }
}

#[test]
fn square_eigenvalue_converges_at_second_order() {
    let r = extrapolated_lambda1(&BodySpec::cube(2, 1.0), 1.0 / 16.0).unwrap();
    assert!(r.observed_order >= 1.5, "{r:?}");
}

#[test]
fn first_eigenvalue_multiplicity_at_most_two() {
    for body in [
        BodySpec::lp_ball(2, 1.5, 1.0),
        BodySpec::lp_ball(2, 4.0, 1.0),
        BodySpec::product_of_intervals(vec![1.0, 0.7]),
        BodySpec::euclidean_ball(2, 1.0),
    ] {
        let g = rasterize(&body, spacing_for_cells(&body, 32)).unwrap();
        let pairs = lowest_eigenpairs(&g, 4).unwrap();
        assert!(multiplicity(&pairs, 1, 1e-6) <= 2, "{body}");
    }
}
