//! Exhaustive and guided corpora of partial automorphisms and orbits.

use std::collections::BTreeSet;

use crate::budget::Budget;
use crate::error::Error;
use crate::pauto::{is_partial_orbit, one_step_extensions, validate_pauto, Orbit, PartialAutomorphism};
use crate::tree::{canonical_form, enumerate_trees, tree_from_code, Elem, MeetTree};

/// Every isomorphism from `s` onto `t`, as maps of indices.
pub fn isomorphisms(s: &MeetTree, t: &MeetTree) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    if s.len() != t.len() {
        return out;
    }
    let mut order: Vec<Elem> = s.elements().collect();
    order.sort_by_key(|&e| s.depth(e));
    let mut map = vec![usize::MAX; s.len()];
    let mut used = vec![false; t.len()];
    iso_step(s, t, &order, 0, &mut map, &mut used, &mut out);
    out
}

fn iso_step(s: &MeetTree, t: &MeetTree, order: &[Elem], i: usize, map: &mut Vec<Elem>, used: &mut Vec<bool>, out: &mut Vec<Vec<Elem>>) {
    if i == order.len() {
        out.push(map.clone());
        return;
    }
    let x = order[i];
    for v in t.elements() {
        if used[v] || s.depth(x) != t.depth(v) || s.parent(x).map(|p| map[p]) != t.parent(v) {
            continue;
        }
        if s.children(x).count() != t.children(v).count() {
            continue;
        }
        used[v] = true;
        map[x] = v;
        iso_step(s, t, order, i + 1, map, used, out);
        used[v] = false;
    }
    map[x] = usize::MAX;
}

pub fn tree_automorphisms(t: &MeetTree) -> Vec<Vec<Elem>> {
    isomorphisms(t, t)
}

/// Isomorphism-invariant key of a partial automorphism: the canonical code of
/// its tree and the least image of its pairs under an isomorphism onto the
/// canonical tree.
pub fn pauto_key(p: &PartialAutomorphism) -> (String, Vec<(Elem, Elem)>) {
    let code = canonical_form(p.tree());
    let canon = tree_from_code(&code);
    let pairs = isomorphisms(p.tree(), &canon)
        .into_iter()
        .map(|s| {
            let mut v: Vec<(Elem, Elem)> = p.pairs().into_iter().map(|(x, y)| (s[x], s[y])).collect();
            v.sort_unstable();
            v
        })
        .min()
        .expect("a tree is isomorphic to its canonical form");
    (code, pairs)
}

/// Every valid partial automorphism of every tree with at most `max_size`
/// elements, one per isomorphism class of (tree, map), including empty maps.
pub fn automorphism_corpus(max_size: usize, budget: &Budget) -> Result<Vec<PartialAutomorphism>, Error> {
    let mut out = Vec::new();
    for t in enumerate_trees(max_size, budget)? {
        let autos = tree_automorphisms(&t);
        let mut seen: BTreeSet<Vec<(Elem, Elem)>> = BTreeSet::new();
        let mut image: Vec<Option<Elem>> = vec![None; t.len()];
        let mut used = vec![false; t.len()];
        partial_maps(&t, 0, &mut image, &mut used, budget, &mut |pairs| {
            let key = autos
                .iter()
                .map(|s| {
                    let mut v: Vec<(Elem, Elem)> = pairs.iter().map(|&(x, y)| (s[x], s[y])).collect();
                    v.sort_unstable();
                    v
                })
                .min()
                .unwrap();
            if seen.insert(key) {
                out.push(validate_pauto(&t, pairs).expect("only valid maps are emitted"));
            }
        })?;
    }
    Ok(out)
}

fn partial_maps(
    t: &MeetTree,
    i: usize,
    image: &mut Vec<Option<Elem>>,
    used: &mut Vec<bool>,
    budget: &Budget,
    emit: &mut dyn FnMut(&[(Elem, Elem)]),
) -> Result<(), Error> {
    let pairs: Vec<(Elem, Elem)> = image.iter().enumerate().filter_map(|(x, y)| y.map(|y| (x, y))).collect();
    budget.charge(1)?;
    if validate_pauto(t, &pairs).is_err() {
        return Ok(());
    }
    if i == t.len() {
        emit(&pairs);
        return Ok(());
    }
    partial_maps(t, i + 1, image, used, budget, emit)?;
    for v in t.elements() {
        if used[v] {
            continue;
        }
        used[v] = true;
        image[i] = Some(v);
        partial_maps(t, i + 1, image, used, budget, emit)?;
        image[i] = None;
        used[v] = false;
    }
    Ok(())
}

/// Every partial orbit of `t` with at least two points: open sequences of
/// distinct elements, and cycles (stored with their closing repeat) starting
/// at their least index.
pub fn all_orbits(t: &MeetTree) -> Vec<Orbit> {
    let mut out = Vec::new();
    for s in t.elements() {
        let mut pts = vec![s];
        extend_orbits(t, &mut pts, &mut out);
    }
    out
}

fn extend_orbits(t: &MeetTree, pts: &mut Vec<Elem>, out: &mut Vec<Orbit>) {
    for v in t.elements() {
        if v == pts[0] {
            if pts.iter().all(|&x| x >= v) {
                let mut cyc = pts.clone();
                cyc.push(v);
                if is_partial_orbit(t, &cyc) {
                    out.push(Orbit { points: cyc, cyclic: true });
                }
            }
            continue;
        }
        if pts.contains(&v) {
            continue;
        }
        pts.push(v);
        if is_partial_orbit(t, pts) {
            out.push(Orbit::open(pts.clone()));
            extend_orbits(t, pts, out);
        }
        pts.pop();
    }
}

/// Grows an open orbit from `start` one step at a time, letting `pick` choose
/// among the valid non-closing next points. Returns the tree and orbit once
/// `len` points are reached or no choice remains.
pub fn guided_orbit(t: &MeetTree, start: &[Elem], len: usize, pick: &mut dyn FnMut(usize) -> usize) -> (MeetTree, Orbit) {
    let steps: Vec<(Elem, Elem)> = start.windows(2).map(|w| (w[0], w[1])).collect();
    let mut p = validate_pauto(t, &steps).expect("start is a partial orbit");
    let mut pts = start.to_vec();
    while pts.len() < len {
        let last = *pts.last().unwrap();
        let options: Vec<PartialAutomorphism> = one_step_extensions(&p, last)
            .into_iter()
            .map(|(q, _)| q)
            .filter(|q| q.get(last) != Some(pts[0]))
            .collect();
        if options.is_empty() {
            break;
        }
        let q = options[pick(options.len()) % options.len()].clone();
        pts.push(q.get(last).unwrap());
        p = q;
    }
    (p.tree().clone(), Orbit::open(pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fork_has_two_automorphisms() {
        let t = MeetTree::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap();
        assert_eq!(tree_automorphisms(&t).len(), 2);
    }

    #[test]
    fn keys_ignore_labels() {
        let a = MeetTree::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap();
        let b = MeetTree::from_edges(&["x", "z", "y"], &[("z", "y"), ("z", "x")]).unwrap();
        let p = PartialAutomorphism::from_labels(&a, &[("a", "r")]).unwrap();
        let q = PartialAutomorphism::from_labels(&b, &[("y", "z")]).unwrap();
        let q2 = PartialAutomorphism::from_labels(&b, &[("z", "y")]).unwrap();
        assert_eq!(pauto_key(&p), pauto_key(&q));
        assert_ne!(pauto_key(&p), pauto_key(&q2));
    }

    #[test]
    fn corpus_on_two_chain() {
        // Maps on a < b: empty, a↦a, b↦b, a↦a & b↦b, a↦b, b↦a.
        let t = MeetTree::from_edges(&["a", "b"], &[("a", "b")]).unwrap();
        let all = automorphism_corpus(2, &Budget::unlimited()).unwrap();
        let on_chain: Vec<_> = all.iter().filter(|p| p.tree().len() == 2).collect();
        assert_eq!(on_chain.len(), 6);
        assert!(on_chain.iter().all(|p| p.tree() == &crate::tree::tree_from_code(&crate::tree::canonical_form(&t))));
    }

    #[test]
    fn fork_orbits() {
        let t = MeetTree::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap();
        let os = all_orbits(&t);
        assert!(os.contains(&Orbit { points: vec![1, 2, 1], cyclic: true }));
        assert!(os.contains(&Orbit::open(vec![1, 2])));
        assert!(!os.iter().any(|o| o.points == vec![2, 1, 2]));
        assert!(os.contains(&Orbit::open(vec![1, 0])));
    }

    #[test]
    fn guided_orbit_reaches_length() {
        let t = MeetTree::point("a");
        let (_, o) = guided_orbit(&t, &[0], 6, &mut |n| n / 2);
        assert_eq!(o.points.len(), 6);
    }
}
