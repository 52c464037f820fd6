//! Property tests over random forms.

use conelab::apolarity::{apply_t, catalecticant};
use conelab::cones::{gauge_linpowers, gauge_nonneg, gauge_sos, random_dual_sos_form, sos_feasible, sq_norm, LinPowersConfig};
use conelab::harmonic::harmonic_decompose;
use conelab::metrics::{
    apolar_ip, barvinok_constant, gradient_ip, gradient_norm, integral_ip, kellogg_check, linf_norm, lp_norm,
    orthonormal_basis, MetricKind, Space,
};
use conelab::poly::{gaussian_form, random_integer_form, Form};
use conelab::sphere::{random_rotation, rotate_form, SphereSearch};
use conelab::volume::sample_uniform_sm;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mean_zero_form(n: usize, two_k: u32, seed: u64) -> Form<f64> {
    sample_uniform_sm(n, two_k, &mut rng(seed)).unwrap()
}

fn full_form(n: usize, degree: u32, seed: u64) -> Form<f64> {
    let b = orthonormal_basis(n, degree, Space::Full, MetricKind::Integral).unwrap();
    gaussian_form(n, degree, &b.basis, &mut rng(seed))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn metrics_are_rotation_invariant(seed in any::<u64>(), n in 2usize..=4, k in 1u32..=2) {
        let (f, g) = (full_form(n, 2 * k, seed), full_form(n, 2 * k, seed ^ 1));
        let a = random_rotation(n, &mut rng(seed ^ 2));
        let (af, ag) = (rotate_form(&f, &a), rotate_form(&g, &a));
        for m in MetricKind::ALL {
            let before = conelab::metrics::inner_product(m, &f, &g).unwrap();
            let after = conelab::metrics::inner_product(m, &af, &ag).unwrap();
            prop_assert!(rel(before, after) < 1e-10, "{m:?}: {before} vs {after}");
        }
    }

    #[test]
    fn gauges_are_rotation_invariant(seed in any::<u64>(), n in 2usize..=3) {
        let f = mean_zero_form(n, 4, seed);
        let a = random_rotation(n, &mut rng(seed ^ 3));
        let af = rotate_form(&f, &a);
        prop_assert!(rel(gauge_nonneg(&f).unwrap().value, gauge_nonneg(&af).unwrap().value) < 1e-9);
        prop_assert!(rel(sq_norm(&f).unwrap(), sq_norm(&af).unwrap()) < 1e-10);
        prop_assert!(rel(gauge_sos(&f, 1e-8).unwrap().value, gauge_sos(&af, 1e-8).unwrap().value) < 1e-6);
    }

    #[test]
    fn operator_and_catalecticant_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (f, g) = (full_form(3, 4, seed), full_form(3, 4, seed ^ 7));
        let combo = f.scale(&a).try_add(&g.scale(&b)).unwrap();
        let lhs = apply_t(&combo);
        let rhs = apply_t(&f).scale(&a).try_add(&apply_t(&g).scale(&b)).unwrap();
        prop_assert!(lhs.try_sub(&rhs).unwrap().norm_coeffs() < 1e-12 * (1.0 + combo.norm_coeffs()));
        for kind in [MetricKind::Integral, MetricKind::Apolar] {
            let hc = catalecticant(&combo, kind).unwrap().matrix;
            let hs = catalecticant(&f, kind).unwrap().matrix * a + catalecticant(&g, kind).unwrap().matrix * b;
            prop_assert!((hc - hs).norm() < 1e-12 * (1.0 + combo.norm_coeffs()));
        }
    }

    #[test]
    fn harmonic_levels_reconstruct_and_are_orthogonal(seed in any::<u64>(), n in 2usize..=4) {
        let f = random_integer_form(n, 4, 5, &mut rng(seed));
        let dec = harmonic_decompose(&f).unwrap();
        prop_assert_eq!(dec.reconstruct(), f);
        for d in 0..=2u32 {
            prop_assert!(dec.components[&d].laplacian().is_zero());
            for e in (d + 1)..=2 {
                for m in MetricKind::ALL {
                    prop_assert!(num_traits::Zero::is_zero(&conelab::metrics::inner_product(m, &dec.level(d), &dec.level(e)).unwrap()));
                }
            }
        }
    }

    #[test]
    fn operator_duality_numeric(seed in any::<u64>(), n in 2usize..=4, k in 1u32..=2) {
        let (f, g) = (full_form(n, 2 * k, seed), full_form(n, 2 * k, seed ^ 5));
        let fact: f64 = (1..=2 * k).map(f64::from).product();
        let lhs = apolar_ip(&apply_t(&f), &g).unwrap();
        let rhs = fact * integral_ip(&f, &g).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-11);
    }

    #[test]
    fn gauges_are_positively_homogeneous(seed in any::<u64>(), s in 0.1f64..10.0) {
        let f = mean_zero_form(3, 4, seed);
        let g = f.scale(&s);
        prop_assert!(rel(gauge_nonneg(&g).unwrap().value, s * gauge_nonneg(&f).unwrap().value) < 1e-9);
        prop_assert!(rel(gauge_sos(&g, 1e-8).unwrap().value, s * gauge_sos(&f, 1e-8).unwrap().value) < 1e-6);
    }

    #[test]
    fn sup_norm_is_the_larger_of_two_gauges(seed in any::<u64>(), n in 2usize..=4) {
        let f = mean_zero_form(n, 4, seed);
        let splice = gauge_nonneg(&f).unwrap().value.max(gauge_nonneg(&f.scale(&-1.0)).unwrap().value);
        prop_assert!(rel(linf_norm(&f).value, splice) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn kellogg_gradient_and_barvinok(seed in any::<u64>(), n in 2usize..=4, k in 1u32..=2) {
        let f = full_form(n, 2 * k, seed);
        let kc = kellogg_check(&f).unwrap();
        prop_assert!(kc.rel_error < 1e-3, "{kc:?}");
        let sup = linf_norm(&f).value;
        prop_assert!(gradient_norm(&f).unwrap() <= sup * (1.0 + 1e-9));
        prop_assert!(gradient_ip(&f, &f).unwrap() >= 0.0);
        let l2n = lp_norm(&f, 2.0 * n as f64).unwrap().value;
        prop_assert!(l2n <= sup * (1.0 + 1e-9));
        prop_assert!(sup <= barvinok_constant(n, k) * l2n * (1.0 + 1e-9));
    }

    #[test]
    fn gauges_are_nested(seed in any::<u64>(), n in 2usize..=3) {
        let f = mean_zero_form(n, 4, seed);
        let c = gauge_nonneg(&f).unwrap();
        let s = gauge_sos(&f, 1e-8).unwrap();
        let cfg = LinPowersConfig::sampling(n);
        let l = gauge_linpowers(&f, &cfg).unwrap().gauge;
        prop_assert!(c.value <= s.upper + 1e-7, "{c:?} {s:?}");
        prop_assert!(s.lower <= l.upper + 1e-7, "{s:?} {l:?}");
        prop_assert!(l.lower <= l.upper + 1e-9);
        // Hilbert's cases: C = Sq in two variables and for ternary quartics
        prop_assert!((s.value - c.value).abs() <= 2e-6 * (1.0 + c.value));
    }

    #[test]
    fn psd_apolar_catalecticant_implies_sos(seed in any::<u64>(), n in 2usize..=3, k in 1u32..=2) {
        let f = random_dual_sos_form(n, 2 * k, &mut rng(seed)).unwrap();
        prop_assert!(catalecticant(&f, MetricKind::Apolar).unwrap().min_eigenvalue() >= -1e-10);
        prop_assert!(sos_feasible(&f, 1e-8).unwrap().is_feasible());
    }

    #[test]
    fn samples_lie_on_the_unit_sphere_of_m(seed in any::<u64>(), n in 2usize..=5) {
        let f = mean_zero_form(n, 4, seed);
        prop_assert!((integral_ip(&f, &f).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(conelab::metrics::sphere_integral(&f).abs() < 1e-12);
    }

    #[test]
    fn sphere_search_finds_the_minimum_of_rotated_quadratics(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let a = random_rotation(n, &mut r);
        let eig: Vec<f64> = (0..n).map(|i| i as f64 - 1.0).collect();
        let terms: Vec<(Vec<u32>, f64)> = (0..n).map(|i| {
            let mut e = vec![0u32; n];
            e[i] = 2;
            (e, eig[i])
        }).collect();
        let q = rotate_form(&Form::from_terms(n, 2, &terms).unwrap(), &a);
        let m = SphereSearch::default().min_form(&q);
        prop_assert!((m.value + 1.0).abs() < 1e-10);
    }
}
