use num_traits::{One, Zero};
use orthobox::behavior::{check_exclusivity, joint_feasibility};
use orthobox::models::{parse_plan, OutcomePattern, Plan, Query, Side, Step, Target};
use orthobox::scenario::{MarginalVector, OrthoGraph, OrthoScenario};
use orthobox::Rational;
use proptest::prelude::*;

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("P{i}")).collect()
}

fn members(mask: u64, n: usize) -> Vec<String> {
    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| format!("P{i}")).collect()
}

/// `n` propositions and a generating family of joint sets.
fn scenario() -> impl Strategy<Value = (usize, Vec<u64>)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(1u64..(1 << n), 0..8)))
}

fn build(n: usize, family: &[u64]) -> OrthoScenario {
    OrthoScenario::new(labels(n), family.iter().map(|&m| members(m, n))).unwrap()
}

fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    (0..=mask).filter(move |s| s & !mask == 0)
}

/// Joint sets as the family generates them, without the library.
fn joint_oracle(n: usize, family: &[u64], mask: u64) -> bool {
    mask.count_ones() <= 1 && mask < (1 << n) || family.iter().any(|&f| mask & !f == 0)
}

fn clique_oracle(n: usize, family: &[u64], mask: u64) -> bool {
    (0..n).all(|i| {
        (0..n).all(|j| {
            i == j || mask & (1 << i) == 0 || mask & (1 << j) == 0 || joint_oracle(n, family, (1 << i) | (1 << j))
        })
    })
}

proptest! {
    #[test]
    fn joint_sets_are_downward_closed((n, family) in scenario()) {
        let s = build(n, &family);
        for mask in 0..(1u64 << n) {
            prop_assert_eq!(s.is_joint(mask), joint_oracle(n, &family, mask));
            if s.is_joint(mask) {
                for sub in subsets(mask) {
                    prop_assert!(s.is_joint(sub));
                }
            }
        }
    }

    #[test]
    fn specker_means_every_clique_is_joint((n, family) in scenario()) {
        let s = build(n, &family);
        let oracle = (0..(1u64 << n))
            .filter(|&m| clique_oracle(n, &family, m))
            .all(|m| joint_oracle(n, &family, m));
        prop_assert_eq!(s.is_specker(), oracle);
        prop_assert_eq!(s.find_minimal_non_specker().is_none(), oracle);
    }

    #[test]
    fn minimal_sets_coarse_grain_to_a_triple((n, family) in scenario()) {
        let s = build(n, &family);
        for set in s.all_minimal_non_specker() {
            prop_assert!(set.len() >= 3);
            let three = s.coarse_grain_to_three(&set).unwrap();
            prop_assert_eq!(three.len(), 3);
            prop_assert!(!three.is_specker());
            prop_assert_eq!(three.maximal_sets().len(), 3);
            prop_assert!(three.maximal_sets().iter().all(|m| m.len() == 2));
        }
    }

    /// Graphs on at most four vertices are perfect, so a marginal vector has
    /// a joint distribution exactly when every clique sums to at most 1.
    #[test]
    fn feasibility_matches_clique_bound_on_small_graphs(
        n in 1usize..=4,
        edges in prop::collection::vec(any::<bool>(), 6),
        nums in prop::collection::vec(0i128..=12, 4),
    ) {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let chosen: Vec<(usize, usize)> = pairs.iter().zip(&edges).filter(|(_, &e)| e).map(|(&p, _)| p).collect();
        let names = labels(n);
        let g = OrthoGraph::new(&names, &chosen);
        let m = MarginalVector::new(nums[..n].iter().map(|&k| Rational::new(k, 12)).collect()).unwrap();
        let cert = joint_feasibility(&g, &m).unwrap();
        prop_assert!(cert.verify(&g, &m));
        let clique_ok = g.cliques().all(|c| {
            (0..n).filter(|i| c & (1 << i) != 0).map(|i| m.get(i)).sum::<Rational>() <= Rational::one()
        });
        prop_assert_eq!(cert.is_feasible(), clique_ok);
        prop_assert_eq!(check_exclusivity(&m, &g).unwrap().holds, clique_ok);
    }

    /// The pentagon is the smallest imperfect graph; one more facet, the
    /// total being at most 2, joins the edge bounds.
    #[test]
    fn pentagon_feasibility(nums in prop::collection::vec(0i128..=10, 5)) {
        let names = labels(5);
        let g = OrthoGraph::new(&names, &(0..5).map(|i| (i, (i + 1) % 5)).collect::<Vec<_>>());
        let p: Vec<Rational> = nums.iter().map(|&k| Rational::new(k, 10)).collect();
        let edges_ok = (0..5).all(|i| p[i] + p[(i + 1) % 5] <= Rational::one());
        let total: Rational = p.iter().sum();
        let m = MarginalVector::new(p).unwrap();
        let cert = joint_feasibility(&g, &m).unwrap();
        prop_assert!(cert.verify(&g, &m));
        prop_assert_eq!(cert.is_feasible(), edges_ok && total <= Rational::from_integer(2));
    }

    #[test]
    fn plans_round_trip(plan in plan_strategy()) {
        prop_assert_eq!(parse_plan(&plan.to_text()).unwrap(), plan);
    }
}

fn query_strategy() -> impl Strategy<Value = Query> {
    (any::<bool>(), 0usize..6).prop_map(|(alice, t)| {
        Query::new(if alice { Side::Alice } else { Side::Bob }, Target::ALL[t])
    })
}

fn plan_strategy() -> impl Strategy<Value = Plan> {
    let leaf = prop::collection::vec(query_strategy(), 1..3).prop_map(Plan::sequence);
    leaf.prop_recursive(2, 12, 3, |inner| {
        prop::collection::vec(
            (query_strategy(), prop::collection::vec((any::<bool>(), any::<bool>(), inner), 0..3)),
            1..3,
        )
        .prop_map(|steps| {
            Plan::new(
                steps
                    .into_iter()
                    .map(|(q, arms)| {
                        let width = q.target.boxes().len();
                        arms.into_iter().fold(Step::new(q), |step, (any, v, then)| {
                            let pattern = if any {
                                OutcomePattern::Any
                            } else {
                                OutcomePattern::Exactly(vec![v; width])
                            };
                            step.with_arm(pattern, then)
                        })
                    })
                    .collect(),
            )
        })
    })
}

#[test]
fn empty_marginals_are_trivially_feasible() {
    let g = OrthoGraph::triangle();
    let m = MarginalVector::new(vec![Rational::zero(); 3]).unwrap();
    assert!(joint_feasibility(&g, &m).unwrap().is_feasible());
}
