use dpsynth_core::applications::{covariance_deviation, proportion_interval};
use dpsynth_core::fitting::{solve_minimax, FittingProblem};
use dpsynth_core::metrics::{
    accuracy, chained_renyi_bound, min_ratio_bound, renyi_condition_number, renyi_divergence, total_variation,
};
use dpsynth_core::{build_marginal_family, Dataset, DiscreteDensity, DomainSpec, Query, QueryFamily};
use proptest::prelude::*;

fn boolean_dim(size: usize) -> usize {
    size.trailing_zeros() as usize
}

fn density_of(raw: Vec<f64>) -> DiscreteDensity {
    let total: f64 = raw.iter().sum();
    let domain = DomainSpec::boolean(boolean_dim(raw.len())).unwrap();
    DiscreteDensity::over_domain(domain, raw.into_iter().map(|w| w / total).collect()).unwrap()
}

fn positive_weights(size: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, size)
}

fn any_size() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![4usize, 8, 16])
}

fn pair() -> impl Strategy<Value = (DiscreteDensity, DiscreteDensity)> {
    any_size()
        .prop_flat_map(|s| (positive_weights(s), positive_weights(s)))
        .prop_map(|(a, b)| (density_of(a), density_of(b)))
}

fn triple(size: usize) -> impl Strategy<Value = (DiscreteDensity, DiscreteDensity, DiscreteDensity)> {
    (positive_weights(size), positive_weights(size), positive_weights(size))
        .prop_map(|(a, b, c)| (density_of(a), density_of(b), density_of(c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tv_is_a_metric((p, q, r) in any_size().prop_flat_map(triple)) {
        let pq = total_variation(&p, &q).unwrap();
        prop_assert!((pq - total_variation(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(pq >= 0.0 && pq <= 1.0);
        prop_assert!(pq <= total_variation(&p, &r).unwrap() + total_variation(&r, &q).unwrap() + 1e-12);
        prop_assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn renyi_nonnegative_and_zero_on_diagonal((p, q) in pair(), alpha in prop::sample::select(vec![0.5, 2.0, 3.0, 4.0])) {
        prop_assert!(renyi_divergence(&p, &q, alpha).unwrap() >= 0.0);
        prop_assert_eq!(renyi_divergence(&p, &p, alpha).unwrap(), 0.0);
    }

    #[test]
    fn renyi_positive_after_perturbation(raw in positive_weights(8), bump in 0.05f64..0.5) {
        let p = density_of(raw.clone());
        let mut moved = raw;
        moved[0] += bump;
        let q = density_of(moved);
        prop_assert!(renyi_divergence(&p, &q, 2.0).unwrap() > 0.0);
    }

    #[test]
    fn condition_number_below_cardinality(raw in any_size().prop_flat_map(|s| prop::collection::vec(0.0f64..1.0, s))) {
        prop_assume!(raw.iter().sum::<f64>() > 0.0);
        let size = raw.len();
        let nu = density_of(raw);
        let uniform = DiscreteDensity::uniform(*nu.domain()).unwrap();
        prop_assert!(renyi_condition_number(&nu, &uniform).unwrap() <= size as f64 + 1e-9);
    }

    #[test]
    fn chained_bound_dominates_direct((nu, nu1, mu) in triple(4)) {
        let direct = renyi_divergence(&nu, &mu, 2.0).unwrap();
        prop_assert!(chained_renyi_bound(&nu, &nu1, &mu).unwrap() >= direct - 1e-12);
    }

    #[test]
    fn covariance_symmetric_and_triangle(
        a in prop::collection::vec(0.0f64..=1.0, 2..40),
        b in prop::collection::vec(0.0f64..=1.0, 2..40),
        c in prop::collection::vec(0.0f64..=1.0, 2..40),
    ) {
        let d = DomainSpec::continuous(2).unwrap();
        let even = |v: Vec<f64>| Dataset::new(d, v[..v.len() / 2 * 2].to_vec()).unwrap();
        let (x, y, z) = (even(a), even(b), even(c));
        let xy = covariance_deviation(&x, &y).unwrap();
        prop_assert!((xy - covariance_deviation(&y, &x).unwrap()).abs() < 1e-7);
        let bound = covariance_deviation(&x, &z).unwrap() + covariance_deviation(&z, &y).unwrap();
        prop_assert!(xy <= bound + 1e-7);
    }

    #[test]
    fn interval_monotone_in_delta(bits in prop::collection::vec(any::<bool>(), 1..50), d1 in 0.0f64..0.5, d2 in 0.0f64..0.5) {
        let d = DomainSpec::boolean(1).unwrap();
        let y = Dataset::new(d, bits.iter().map(|&b| b as u8 as f64).collect()).unwrap();
        let q = Query::Monomial(vec![0]);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(proportion_interval(&q, &y, 100, lo).unwrap().half_width <= proportion_interval(&q, &y, 100, hi).unwrap().half_width);
    }

    #[test]
    fn self_accuracy_is_zero(rows in prop::collection::vec(prop::collection::vec(0usize..3, 3), 1..30)) {
        let d = DomainSpec::discrete(3, 3).unwrap();
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.into_iter().map(|v| v as f64).collect()).collect();
        let x = Dataset::from_rows(d, &rows).unwrap();
        let fam = build_marginal_family(&d, 2).unwrap();
        prop_assert_eq!(accuracy(&fam, &x, &x).unwrap().worst_gap, 0.0);
    }

    #[test]
    fn adding_a_query_never_lowers_the_optimum(
        support in prop::collection::vec(prop::collection::vec(0usize..2, 3), 1..7),
        targets in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let d = DomainSpec::boolean(3).unwrap();
        let rows: Vec<Vec<f64>> = support.into_iter().map(|r| r.into_iter().map(|v| v as f64).collect()).collect();
        let support = Dataset::from_rows(d, &rows).unwrap();
        let queries = vec![Query::Monomial(vec![0]), Query::Monomial(vec![1, 2]), Query::FirstMoment(1)];
        let small = FittingProblem::from_parts(QueryFamily::new(d, queries.clone()), support.clone(), targets[..3].to_vec()).unwrap();
        let big = FittingProblem::from_parts(
            QueryFamily::new(d, queries).with(Query::Monomial(vec![0, 2])),
            support,
            targets,
        ).unwrap();
        let (a, b) = (solve_minimax(&small).unwrap(), solve_minimax(&big).unwrap());
        prop_assert!(b.objective >= a.objective - 1e-9);
        let m = small.support_size();
        prop_assert!(a.objective <= small.objective_at(&vec![1.0 / m as f64; m]) + 1e-9);
        prop_assert!((small.objective_at(&a.weights) - a.objective).abs() < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn min_ratio_exact_dominates_lemma((p, q) in pair()) {
        let r = min_ratio_bound(&p, &q).unwrap();
        prop_assert!(r.exact >= r.lemma_bound - 1e-12);
        prop_assert!(r.lemma_bound > 0.0 && r.lemma_bound <= 1.0);
    }
}
