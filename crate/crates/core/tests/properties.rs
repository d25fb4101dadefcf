use std::sync::OnceLock;

use proptest::prelude::*;

use meettree::amalg::{amalgamate_total, problem_catalog, problem_from_entries, verify_solution, CatalogEntry};
use meettree::json::{parse_aut, TreeJson};
use meettree::laws::{meet_law_violations, orbit_law_violations};
use meettree::nopair::{common_extension, cost, irreconcilable_extensions, q, LinearMap, LinearPair};
use meettree::pauto::{classify_orbit, orbit_decomposition, time_reverse, validate_pauto};
use meettree::tree::{canonical_form, tree_from_code, Elem, MeetTree};
use meettree::types::{enumerate_one_types, qf_type_of, realize_type};
use meettree::{Budget, PartialAutomorphism};

/// A random rooted tree on up to `max` points, from a parent choice per point.
fn tree(max: usize) -> impl Strategy<Value = MeetTree> {
    (1..=max).prop_flat_map(|n| {
        (1..n).map(|i| 0..i).collect::<Vec<_>>().prop_map(move |ps| {
            let labels = (0..n).map(|k| format!("t{k}")).collect();
            let parents = std::iter::once(None).chain(ps.into_iter().map(Some)).collect();
            MeetTree::from_parents(labels, parents).unwrap()
        })
    })
}

fn tree_and_pairs(max: usize) -> impl Strategy<Value = (MeetTree, Vec<(Elem, Elem)>)> {
    tree(max).prop_flat_map(|t| {
        let n = t.len();
        (Just(t), proptest::collection::vec((0..n, 0..n), 0..=n))
    })
}

/// Keeps the longest prefix of `pairs` that stays a valid partial automorphism.
fn valid_prefix(t: &MeetTree, pairs: &[(Elem, Elem)]) -> PartialAutomorphism {
    let mut kept = Vec::new();
    for &pr in pairs {
        kept.push(pr);
        if validate_pauto(t, &kept).is_err() {
            kept.pop();
        }
    }
    validate_pauto(t, &kept).unwrap()
}

fn linear_map() -> impl Strategy<Value = LinearMap> {
    proptest::collection::btree_set(-6i64..6, 0..5).prop_flat_map(|dom| {
        let k = dom.len();
        (Just(dom), proptest::collection::btree_set(-6i64..6, k..=k)).prop_map(|(d, r)| {
            d.into_iter().zip(r).map(|(x, y)| (q(x), q(y))).collect()
        })
    })
}

fn catalog() -> &'static Vec<Vec<CatalogEntry>> {
    static CAT: OnceLock<Vec<Vec<CatalogEntry>>> = OnceLock::new();
    CAT.get_or_init(|| problem_catalog(4, &Budget::unlimited()).unwrap().into_values().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn meet_laws_hold(t in tree(9)) {
        prop_assert!(meet_law_violations(&t).is_empty());
    }

    #[test]
    fn canonical_code_round_trips(t in tree(9)) {
        let code = canonical_form(&t);
        prop_assert_eq!(canonical_form(&tree_from_code(&code)), code);
    }

    #[test]
    fn tree_json_round_trips(t in tree(8)) {
        let back = TreeJson::from_tree(&t).to_tree().unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn types_round_trip(t in tree(6)) {
        let all: Vec<Elem> = t.elements().collect();
        let types = enumerate_one_types(&t);
        prop_assert_eq!(types.len(), 4 * t.len());
        for ty in types {
            let ext = realize_type(&t, &ty).unwrap();
            prop_assert_eq!(qf_type_of(&ext.tree, ext.new_point, &all), ty);
        }
    }

    #[test]
    fn inverse_of_a_partial_automorphism_is_one((t, pairs) in tree_and_pairs(7)) {
        let p = valid_prefix(&t, &pairs);
        let inv: Vec<(Elem, Elem)> = p.pairs().into_iter().map(|(x, y)| (y, x)).collect();
        prop_assert!(validate_pauto(&t, &inv).is_ok());
        let core = p.core();
        prop_assert_eq!(core.len(), p.len());
    }

    #[test]
    fn orbits_obey_their_laws((t, pairs) in tree_and_pairs(7)) {
        let p = valid_prefix(&t, &pairs);
        for o in orbit_decomposition(&p) {
            prop_assert!(orbit_law_violations(&t, &o).is_empty());
            let c = classify_orbit(&t, &o);
            let r = classify_orbit(&t, &time_reverse(&o));
            prop_assert_eq!((c.kind.reversed(), c.parameter), (r.kind, r.parameter));
        }
    }

    #[test]
    fn pauto_json_round_trips((t, pairs) in tree_and_pairs(6)) {
        let p = valid_prefix(&t, &pairs);
        let text = serde_json::to_string(&meettree::json::AutJson::from_pauto(&p)).unwrap();
        prop_assert_eq!(parse_aut(&text).unwrap(), p);
    }

    #[test]
    fn cost_is_monotone(g in linear_map(), a in -7i64..7, b in -7i64..7) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(cost(q(lo), &g) <= cost(q(hi), &g));
    }

    #[test]
    fn irreconcilable_pairs_are_certified(g1 in linear_map(), g2 in linear_map(), d1 in 1i64..4, d2 in 1i64..4) {
        // Force the anchor 0 into both domains with images strictly below it.
        let fix = |mut g: LinearMap, d: i64| {
            g.retain(|&x, &mut y| (x < q(0)) == (y < q(-d)) && x != q(0) && y != q(-d));
            g.insert(q(0), q(-d));
            g
        };
        let (g1, g2) = (fix(g1, d1), fix(g2, d2));
        prop_assume!(meettree::nopair::is_linear_pauto(&g1) && meettree::nopair::is_linear_pauto(&g2));
        let r = irreconcilable_extensions(&LinearPair { g1, g2, anchor: q(0) }).unwrap();
        let (u, l) = (r.word.evaluate_linear(&r.upper).unwrap(), r.word.evaluate_linear(&r.lower).unwrap());
        prop_assert_ne!(u.holds, l.holds);
        if r.upper.support().len() <= 6 {
            prop_assert_eq!(common_extension(&r.upper, &r.lower, 8).found, None);
        }
    }

    #[test]
    fn catalog_problems_amalgamate(k in any::<prop::sample::Index>(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let group = &catalog()[k.index(catalog().len())];
        let (l, r) = (&group[i.index(group.len())], &group[j.index(group.len())]);
        let p = problem_from_entries(l, r).unwrap();
        let s = amalgamate_total(&p).unwrap();
        prop_assert!(verify_solution(&p, &s).is_ok());
        prop_assert_eq!(s.amalgam.len(), s.amalgam.tree().len());
    }
}
