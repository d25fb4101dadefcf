//! Brute-force cross-checks of the tree machinery against definitions stated
//! directly on order relations.

use meettree::tree::{arity, canonical_form, enumerate_trees, MeetTree};
use meettree::Budget;

/// Every permutation of `0..n`.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// `leq[i][j]` as a bit pattern, relabelled by `perm`.
fn relation_code(leq: &[Vec<bool>], perm: &[usize]) -> u64 {
    let n = leq.len();
    let mut code = 0u64;
    for i in 0..n {
        for j in 0..n {
            if leq[i][j] {
                code |= 1 << (perm[i] * n + perm[j]);
            }
        }
    }
    code
}

fn min_code(leq: &[Vec<bool>], perms: &[Vec<usize>]) -> u64 {
    perms.iter().map(|p| relation_code(leq, p)).min().unwrap()
}

/// A partial order is a finite meet-tree when it has a least element and the
/// elements below any point form a chain.
fn is_finite_meet_tree(leq: &[Vec<bool>]) -> bool {
    let n = leq.len();
    let rooted = (0..n).any(|r| (0..n).all(|x| leq[r][x]));
    let semilinear = (0..n).all(|x| (0..n).all(|a| (0..n).all(|b| !(leq[a][x] && leq[b][x]) || leq[a][b] || leq[b][a])));
    rooted && semilinear
}

fn tree_relation(t: &MeetTree) -> Vec<Vec<bool>> {
    t.elements().map(|a| t.elements().map(|b| t.leq(a, b)).collect()).collect()
}

/// Isomorphism classes of meet-trees on `n` points, found by scanning every
/// reflexive relation on `n` points.
fn brute_force_classes(n: usize) -> std::collections::BTreeSet<u64> {
    let perms = permutations(n);
    let off: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut classes = std::collections::BTreeSet::new();
    for mask in 0u64..(1 << off.len()) {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(i, j)) in off.iter().enumerate() {
            leq[i][j] = mask >> k & 1 == 1;
        }
        let antisym = (0..n).all(|i| (0..n).all(|j| i == j || !(leq[i][j] && leq[j][i])));
        let trans = (0..n).all(|i| (0..n).all(|j| !leq[i][j] || (0..n).all(|k| !leq[j][k] || leq[i][k])));
        if antisym && trans && is_finite_meet_tree(&leq) {
            classes.insert(min_code(&leq, &perms));
        }
    }
    classes
}

#[test]
fn enumeration_matches_brute_force_over_relations() {
    let trees = enumerate_trees(5, &Budget::unlimited()).unwrap();
    for n in 1..=5 {
        let perms = permutations(n);
        let ours: std::collections::BTreeSet<u64> =
            trees.iter().filter(|t| t.len() == n).map(|t| min_code(&tree_relation(t), &perms)).collect();
        let count = trees.iter().filter(|t| t.len() == n).count();
        assert_eq!(count, ours.len(), "duplicates among enumerated trees of size {n}");
        assert_eq!(ours, brute_force_classes(n), "size {n}");
    }
    let counts: Vec<usize> = (1..=5).map(|n| trees.iter().filter(|t| t.len() == n).count()).collect();
    assert_eq!(counts, [1, 1, 2, 4, 9]);
}

#[test]
fn canonical_codes_decide_isomorphism() {
    let trees = enumerate_trees(6, &Budget::unlimited()).unwrap();
    for (i, s) in trees.iter().enumerate() {
        let perms = permutations(s.len());
        let key = min_code(&tree_relation(s), &perms);
        for t in trees.iter().skip(i + 1).filter(|t| t.len() == s.len()) {
            assert_ne!(key, min_code(&tree_relation(t), &perms));
            assert_ne!(canonical_form(s), canonical_form(t));
        }
        // Relabelled copies: rebuild the tree with its points in another order.
        for perm in perms.iter().step_by(7) {
            let mut inv = vec![0; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                inv[p] = i;
            }
            let labels = (0..s.len()).map(|k| format!("v{k}")).collect();
            let parents = (0..s.len()).map(|k| s.parent(inv[k]).map(|p| perm[p])).collect();
            let copy = MeetTree::from_parents(labels, parents).unwrap();
            assert_eq!(canonical_form(&copy), canonical_form(s));
        }
    }
}

/// Largest antichain whose pairwise meets all equal one element, by scanning
/// subsets.
fn brute_force_arity(t: &MeetTree) -> usize {
    let n = t.len();
    let mut best = 1;
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if set.len() <= best {
            continue;
        }
        let antichain = set.iter().all(|&a| set.iter().all(|&b| a == b || !t.comparable(a, b)));
        let m = t.meet(set[0], set[1]);
        let common = set.iter().all(|&a| set.iter().all(|&b| a == b || t.meet(a, b) == m));
        if antichain && common {
            best = set.len();
        }
    }
    best
}

#[test]
fn arity_matches_antichain_definition() {
    for t in enumerate_trees(7, &Budget::unlimited()).unwrap() {
        assert_eq!(arity(&t), brute_force_arity(&t), "{}", canonical_form(&t));
    }
}
