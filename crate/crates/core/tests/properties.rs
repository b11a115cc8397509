mod common;

use common::*;
use matchvol::expansion::{
    approximate_volume, cluster_sum, kp_partial_sums, log_xi_truncated, max_admissible_delta, ursell,
    validate_plan, Cluster, PlanOptions, PolymerModel, Series,
};
use matchvol::geometry::{volume, HPolytope};
use matchvol::oracle::{volume_bruteforce, xi_bruteforce};
use matchvol::polymer::{box_side, phi, Mode, Polymer};
use matchvol::rational::{fraction_string, integer, ln, parse_fraction, pow, ratio, to_f64};
use matchvol::{Hypergraph, Rational, VertexSet};
use proptest::prelude::*;

fn small_polytope(dim: usize, bounds: &[i64], cuts: &[(Vec<i64>, i64)]) -> HPolytope {
    let mut p = HPolytope::new(dim);
    for i in 0..dim {
        let mut row = vec![Rational::ZERO; dim];
        row[i] = integer(1);
        p.add_le(row.clone(), integer(bounds[i])).unwrap();
        p.add_ge(row, Rational::ZERO).unwrap();
    }
    for (a, b) in cuts {
        p.add_le(a.iter().map(|&c| integer(c)).collect(), integer(*b)).unwrap();
    }
    p
}

fn polytope_strategy() -> impl Strategy<Value = HPolytope> {
    (1usize..=3).prop_flat_map(|d| {
        (
            prop::collection::vec(1i64..=3, d),
            prop::collection::vec((prop::collection::vec(-1i64..=2, d), 0i64..=4), 0..=2),
        )
            .prop_map(move |(bounds, cuts)| small_polytope(d, &bounds, &cuts))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn volume_is_invariant_under_coordinate_permutation(p in polytope_strategy(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..p.dim()).collect();
        let shift = (seed % p.dim() as u64) as usize;
        perm.rotate_left(shift);
        prop_assert_eq!(volume(&p).unwrap(), volume(&p.permute_coordinates(&perm)).unwrap());
    }

    #[test]
    fn volume_scales_with_dimension_power(p in polytope_strategy(), num in 1i64..=5, den in 1u64..=4) {
        let s = ratio(num, den);
        prop_assert_eq!(volume(&p.scaled(&s)).unwrap(), pow(&s, p.dim()) * volume(&p).unwrap());
    }

    #[test]
    fn adding_a_constraint_never_grows_volume(p in polytope_strategy(), bound in 0i64..=3) {
        let mut q = p.clone();
        q.add_le(vec![integer(1); p.dim()], integer(bound)).unwrap();
        prop_assert!(volume(&q).unwrap() <= volume(&p).unwrap());
    }

    #[test]
    fn fraction_strings_round_trip(num in -10_000i64..10_000, den in 1u64..10_000) {
        let x = ratio(num, den);
        prop_assert_eq!(parse_fraction(&fraction_string(&x)).unwrap(), x);
    }

    #[test]
    fn instance_text_round_trips(seed in any::<u64>()) {
        let h = random_hypergraph(&mut rng(seed), 7, 6, 3, 4);
        let text: String = h
            .edges()
            .iter()
            .map(|e| e.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ") + "\n")
            .collect();
        let parsed = Hypergraph::parse(&format!("# header\n{text}")).unwrap();
        prop_assert_eq!(parsed.edges(), h.edges());
    }

    #[test]
    fn phi_is_an_idempotent_subset_map(seed in any::<u64>(), mask in 1u32..64) {
        let h = random_hypergraph(&mut rng(seed), 6, 6, 3, 6);
        let k = subset(mask, h.num_vertices());
        let t = phi(&h, &k);
        if h.is_connected_in_flat(&k) {
            prop_assert!(!t.is_empty() && t.is_subset(&k));
            prop_assert!(h.is_connected_in_flat(&t));
            prop_assert_eq!(phi(&h, &t), t);
        } else {
            prop_assert!(t.is_empty());
        }
    }

    #[test]
    fn series_log_is_additive(a in prop::collection::vec(-5i64..=5, 4), b in prop::collection::vec(-5i64..=5, 4)) {
        let make = |c: &[i64]| {
            let mut s = Series::one(4);
            for (i, &x) in c.iter().enumerate() {
                s.add_shifted(&ratio(x, 7), i + 1, &Series::one(4));
            }
            s
        };
        let (sa, sb) = (make(&a), make(&b));
        let mut sum = sa.log();
        sum.add_assign(&sb.log());
        prop_assert_eq!(sa.mul(&sb).log(), sum);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ursell_of_complete_cluster(t in 1usize..=5) {
        // single-vertex polymers at one vertex: every pair is incompatible
        let h = star(3);
        let gamma = Polymer::new(&h, VertexSet::singleton(0), Mode::Graph, &ratio(1, 100)).unwrap();
        let cluster = Cluster::new(&h, vec![gamma; t]).unwrap();
        let sign = if t % 2 == 1 { 1 } else { -1 };
        prop_assert_eq!(ursell(&cluster), ratio(sign, t as u64));
    }

    #[test]
    fn volume_identity_and_monotonicity(seed in any::<u64>(), step in 1u64..=4) {
        let mut r = rng(seed);
        let h = random_graph(&mut r, 5, 3);
        prop_assume!(h.num_edges() <= 7);
        let d1 = ratio(1, 400);
        let d2 = ratio(step as i64 + 1, 400);
        let v1 = volume_bruteforce(&h, &d1).unwrap();
        let v2 = volume_bruteforce(&h, &d2).unwrap();
        prop_assert!(v1 <= v2);
        prop_assert_eq!(v1, xi_bruteforce(&h, &d1).unwrap() * pow(&box_side(&h, &d1), h.num_edges()));
    }

    #[test]
    fn support_route_equals_explicit_clusters(seed in any::<u64>(), depth in 1usize..=3) {
        let h = random_graph(&mut rng(seed), 6, 3);
        let delta = max_admissible_delta(&h, Mode::Graph) / integer(2);
        let options = PlanOptions { max_cluster_size: Some(depth), force: true, ..PlanOptions::default() };
        let plan = validate_plan(&h, &delta, 0.01, &options).unwrap();
        let model = PolymerModel::build(&h, &plan).unwrap();
        prop_assert_eq!(log_xi_truncated(&model).unwrap().value, cluster_sum(&model));
    }

    #[test]
    fn truncation_error_is_within_tail_bound(seed in any::<u64>()) {
        let h = random_graph(&mut rng(seed), 7, 3);
        let delta = max_admissible_delta(&h, Mode::Graph) / integer(2);
        let plan = validate_plan(&h, &delta, 0.01, &PlanOptions::default()).unwrap();
        let result = approximate_volume(&h, &plan).unwrap();
        let exact = ln(&xi_bruteforce(&h, &delta).unwrap()).to_f64().value();
        let gap = (exact - to_f64(&result.log_xi)).abs();
        prop_assert!(gap <= plan.tail_bound, "gap {} > tail {}", gap, plan.tail_bound);
    }

    #[test]
    fn kp_partial_sums_stay_below_one(seed in any::<u64>()) {
        let h = random_graph(&mut rng(seed), 8, 4);
        let delta = max_admissible_delta(&h, Mode::Graph) / integer(2);
        let plan = validate_plan(&h, &delta, 0.01, &PlanOptions::default()).unwrap();
        let model = PolymerModel::build(&h, &plan).unwrap();
        for (v, s) in kp_partial_sums(&model) {
            prop_assert!(s <= 1.0, "vertex {} has partial sum {}", v, s);
        }
        prop_assert!(to_f64(&plan.rho) > 0.0);
    }
}
