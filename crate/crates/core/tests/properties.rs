use std::collections::BTreeSet;

use num_rational::Ratio;
use proptest::prelude::*;
use sparsetest::hankel::{build_hankel_exact, folded_normal_abs_moment, sigma_extremes};
use sparsetest::harness::{random_sparse, wilson_interval, Z95};
use sparsetest::oracle::{derive_seed, stream_from_seed, to_rational};
use sparsetest::reference::{hard_instance_disjointness, l0_distance_f2, l0_distance_f2_masks, rational_to_f64};
use sparsetest::selfcorrect::{forward_difference_coeffs, lagrange_interp_eval};
use sparsetest::{FunctionInstance, SparsePolynomial};
use statrs::function::gamma::gamma;

fn exponent(n: usize, dmax: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=dmax, n)
}

fn terms(n: usize) -> impl Strategy<Value = Vec<(f64, Vec<u32>)>> {
    prop::collection::vec((-4.0..4.0f64, exponent(n, 3)), 0..8)
}

proptest! {
    #[test]
    fn construction_merges_and_orders_terms(raw in terms(3)) {
        let p = SparsePolynomial::new(3, raw.clone()).unwrap();
        let mut shuffled = raw.clone();
        shuffled.reverse();
        let q = SparsePolynomial::new(3, shuffled).unwrap();
        prop_assert_eq!(p.terms().len(), q.terms().len());
        let expos: Vec<_> = p.terms().iter().map(|t| t.expo.clone()).collect();
        let unique: BTreeSet<_> = expos.iter().cloned().collect();
        prop_assert_eq!(unique.len(), expos.len());
        prop_assert!(expos.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(p.coeffs().all(|c| c != 0.0));
    }

    #[test]
    fn json_round_trip(raw in terms(4)) {
        let f: FunctionInstance = SparsePolynomial::new(4, raw).unwrap().into();
        let back = FunctionInstance::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), f.to_json());
    }

    #[test]
    fn exact_evaluation_matches_float(raw in terms(3), x in prop::collection::vec(-2.0..2.0f64, 3)) {
        let p = SparsePolynomial::new(3, raw).unwrap();
        let xr: Vec<_> = x.iter().map(|v| to_rational(*v).unwrap()).collect();
        let exact = rational_to_f64(&p.eval_exact(&xr).unwrap());
        let float = p.eval(&x).unwrap();
        let scale: f64 = p.terms().iter().map(|t| t.coeff.abs()).sum::<f64>() * 64.0;
        prop_assert!((exact - float).abs() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn forward_difference_kills_low_degree(d in 1u32..=6, c in prop::collection::vec(-3.0..3.0f64, 7), p in -1.5..1.5f64, q in -1.0..1.0f64) {
        // Univariate polynomial of degree <= d along the line p + i q.
        let f = |x: f64| c.iter().take(d as usize + 1).enumerate().map(|(i, a)| a * x.powi(i as i32)).sum::<f64>();
        let mut alphas = vec![-1.0];
        alphas.extend(forward_difference_coeffs(d));
        let terms: Vec<f64> = alphas.iter().enumerate().map(|(i, a)| a * f(p + i as f64 * q)).collect();
        let mag: f64 = terms.iter().map(|t| t.abs()).sum();
        prop_assert!(terms.iter().sum::<f64>().abs() <= 1e-10 * (1.0 + mag));
    }

    #[test]
    fn forward_difference_coefficients_are_signed_binomials(d in 0u32..=20) {
        let a = forward_difference_coeffs(d);
        prop_assert_eq!(a.len(), d as usize + 1);
        // sum_{i=0}^{d+1} (-1)^i C(d+1, i) = 0 with alpha_0 = -1.
        prop_assert_eq!(a.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn lagrange_reproduces_polynomials(c in prop::collection::vec(-2.0..2.0f64, 1..6), at in -3.0..3.0f64) {
        let f = |x: f64| c.iter().enumerate().map(|(i, a)| a * x.powi(i as i32)).sum::<f64>();
        let nodes: Vec<f64> = (0..c.len()).map(|j| (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * c.len()) as f64).cos()).collect();
        let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        let got = lagrange_interp_eval(&nodes, &values, at).unwrap();
        prop_assert!((got - f(at)).abs() <= 1e-8 * (1.0 + f(at).abs()) * 3f64.powi(c.len() as i32));
    }

    #[test]
    fn hankel_is_symmetric_with_ordered_singular_values(seed in any::<u64>(), t in 1usize..5) {
        let mut rng = stream_from_seed(seed);
        let f = random_sparse(3, 3, 2, &mut rng).unwrap();
        let u = sparsetest::oracle::sample_gaussian(3, &mut rng);
        let h = build_hankel_exact(&f.into(), &u, t).unwrap();
        for i in 0..t {
            for j in 0..t {
                prop_assert_eq!(h.entry(i, j), h.entry(j, i));
                if i + 1 < t && j > 0 {
                    prop_assert_eq!(h.entry(i + 1, j - 1), h.entry(i, j));
                }
            }
        }
        let (lo, hi) = sigma_extremes(&h).unwrap();
        prop_assert!(0.0 <= lo && lo <= hi);
    }

    #[test]
    fn wilson_interval_is_ordered_and_contains_rate(trials in 1u64..2000, frac in 0.0..=1.0f64) {
        let s = (frac * trials as f64).floor() as u64;
        let (lo, hi) = wilson_interval(s, trials, Z95);
        let rate = s as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= rate + 1e-12 && rate <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn f2_distance_set_and_mask_forms_agree(f in 0u64..256, g in 0u64..256) {
        let set = |m: u64| (0..8).filter(|i| m >> i & 1 == 1).collect::<BTreeSet<usize>>();
        let a = l0_distance_f2(&set(f), &set(g), 8).unwrap();
        prop_assert_eq!(a, l0_distance_f2_masks(f, g, 8).unwrap());
        prop_assert_eq!(a, l0_distance_f2_masks(g, f, 8).unwrap());
        prop_assert_eq!(a == Ratio::new(0, 1), f == g);
    }

    #[test]
    fn disjointness_instance_has_symmetric_difference_sparsity(a in 0u64..1024, b in 0u64..1024) {
        let set = |m: u64| (0..10).filter(|i| m >> i & 1 == 1).collect::<BTreeSet<usize>>();
        let h = hard_instance_disjointness(&set(a), &set(b), 10).unwrap();
        prop_assert_eq!(h.to_polynomial().sparsity(), (a ^ b).count_ones() as usize);
    }

    #[test]
    fn derived_seeds_do_not_collide_locally(seed in any::<u64>()) {
        let seeds: BTreeSet<u64> = (0..64).map(|i| derive_seed(seed, i)).collect();
        prop_assert_eq!(seeds.len(), 64);
    }
}

#[test]
fn folded_normal_moments_match_gamma_formula() {
    // E|Z|^s = 2^{s/2} Gamma((s+1)/2) / sqrt(pi).
    for s in 0..=20u32 {
        let expected = 2f64.powf(s as f64 / 2.0) * gamma((s as f64 + 1.0) / 2.0) / std::f64::consts::PI.sqrt();
        let got = folded_normal_abs_moment(s);
        assert!((got - expected).abs() <= 1e-12 * expected, "s={s}: {got} vs {expected}");
    }
}

#[test]
fn influence_of_single_coordinate_matches_gamma_formula() {
    // Infl_{x1}({0}) = E|y - x| for independent standard Gaussians = 2 / sqrt(pi).
    let expected = 2.0 * gamma(1.0) / std::f64::consts::PI.sqrt();
    let mut oracle = sparsetest::OracleHandle::exact(SparsePolynomial::linear(&[1.0, 0.0]).unwrap());
    let mut rng = stream_from_seed(derive_seed(17, 0));
    let est = sparsetest::testers::estimate_influence(&mut oracle, &[0], 50_000, &mut rng).unwrap();
    assert!((est.mean - expected).abs() <= 3.0 * est.stderr);
}
