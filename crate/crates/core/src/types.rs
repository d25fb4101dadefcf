//! Quantifier-free 1-types over finite meet-trees.
//!
//! Over a meet-closed set `A`, the type of a point `b` is fixed by
//! `b' = max{x ∧ b : x ∈ A}`, by whether `b = b'`, and by where `b'` sits
//! relative to `A`. In a dense unrooted ambient tree `b'` is either an element
//! `m` of `A` or an interior point of the edge just below some `c ∈ A`
//! (including the unbounded edge below the root). That gives exactly four
//! types per element of `A`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tree::{Elem, MeetTree};

/// Canonical descriptor of a 1-type over a meet-closed set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OneType {
    /// Least-labelled element of `A` above the base point.
    pub anchor: String,
    /// Whether the realizing point lies strictly above its base point.
    pub strict_above: bool,
    /// Elements of `A` below the base point, root first.
    pub cut: Vec<String>,
    /// The base point itself when it belongs to `A`.
    pub realized_at: Option<String>,
}

/// Where the base point of a type sits relative to the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// The base point is `m` itself.
    At(Elem),
    /// The base point lies on the edge directly below `c`.
    Below(Elem),
}

/// A tree extended so that it contains a realization of a type.
#[derive(Debug, Clone)]
pub struct PointedExtension {
    pub tree: MeetTree,
    pub new_point: Elem,
    pub new_meet_point: Option<Elem>,
}

impl PointedExtension {
    /// Whether the realization reused an existing element.
    pub fn is_existing(&self, original: &MeetTree) -> bool {
        self.tree.len() == original.len()
    }
}

fn least_label_above(t: &MeetTree, a: &[Elem], floor: Elem) -> String {
    a.iter()
        .filter(|&&x| t.leq(floor, x))
        .map(|&x| t.label(x))
        .min()
        .expect("some element of A lies above the base point")
        .to_string()
}

fn cut_labels(t: &MeetTree, a: &[Elem], pred: impl Fn(Elem) -> bool) -> Vec<String> {
    let mut cut: Vec<Elem> = a.iter().copied().filter(|&x| pred(x)).collect();
    cut.sort_by_key(|&x| t.depth(x));
    cut.into_iter().map(|x| t.label(x).to_string()).collect()
}

fn descriptor(t: &MeetTree, a: &[Elem], slot: Slot, strict: bool) -> OneType {
    match slot {
        Slot::At(m) => OneType {
            anchor: least_label_above(t, a, m),
            strict_above: strict,
            cut: cut_labels(t, a, |x| t.leq(x, m)),
            realized_at: Some(t.label(m).to_string()),
        },
        Slot::Below(c) => OneType {
            anchor: least_label_above(t, a, c),
            strict_above: strict,
            cut: cut_labels(t, a, |x| t.lt(x, c)),
            realized_at: None,
        },
    }
}

/// Descriptor of a slot over the whole tree.
pub fn descriptor_over_all(t: &MeetTree, slot: Slot, strict: bool) -> OneType {
    let all: Vec<Elem> = t.elements().collect();
    descriptor(t, &all, slot, strict)
}

/// The type of `b` over the meet-closed set `a` (indices into `t`).
pub fn qf_type_of(t: &MeetTree, b: Elem, a: &[Elem]) -> OneType {
    let (slot, strict) = slot_of(t, b, a);
    descriptor(t, a, slot, strict)
}

/// Like [`qf_type_of`] but returns the raw slot.
pub fn slot_of(t: &MeetTree, b: Elem, a: &[Elem]) -> (Slot, bool) {
    assert!(!a.is_empty(), "types need a nonempty base");
    let base = a
        .iter()
        .map(|&x| t.meet(x, b))
        .max_by_key(|&m| t.depth(m))
        .unwrap();
    let strict = base != b;
    if a.contains(&base) {
        return (Slot::At(base), strict);
    }
    let top = a
        .iter()
        .copied()
        .filter(|&x| t.leq(base, x))
        .min_by_key(|&x| t.depth(x))
        .unwrap();
    (Slot::Below(top), strict)
}

/// All 1-types over the whole tree: for every element, the point itself, a
/// point strictly above it, a point on the edge below it, and a point branching
/// off that edge.
pub fn enumerate_slots(t: &MeetTree) -> Vec<(Slot, bool)> {
    let mut out = Vec::with_capacity(4 * t.len());
    for e in t.elements() {
        out.push((Slot::At(e), false));
        out.push((Slot::At(e), true));
        out.push((Slot::Below(e), false));
        out.push((Slot::Below(e), true));
    }
    out
}

/// Descriptors for [`enumerate_slots`], in the same order.
pub fn enumerate_one_types(t: &MeetTree) -> Vec<OneType> {
    let all: Vec<Elem> = t.elements().collect();
    enumerate_slots(t)
        .into_iter()
        .map(|(s, strict)| descriptor(t, &all, s, strict))
        .collect()
}

/// Materializes a slot. New points get fresh labels; the returned tree keeps
/// every old element at its old index.
pub fn realize_slot(t: &MeetTree, slot: Slot, strict: bool) -> PointedExtension {
    match (slot, strict) {
        (Slot::At(m), false) => PointedExtension { tree: t.clone(), new_point: m, new_meet_point: None },
        (Slot::At(m), true) => {
            let (tree, e) = t.with_leaf(m, t.fresh_label("n"));
            PointedExtension { tree, new_point: e, new_meet_point: None }
        }
        (Slot::Below(c), false) => {
            let (tree, e) = t.with_inserted_below(c, t.fresh_label("n"));
            PointedExtension { tree, new_point: e, new_meet_point: None }
        }
        (Slot::Below(c), true) => {
            let (mid, s) = t.with_inserted_below(c, t.fresh_label("n"));
            let (tree, e) = mid.with_leaf(s, mid.fresh_label("n"));
            PointedExtension { tree, new_point: e, new_meet_point: Some(s) }
        }
    }
}

/// Decodes a descriptor back into a slot of `t`, rejecting anything that is not
/// the canonical descriptor of a type over the whole tree.
pub fn slot_of_descriptor(t: &MeetTree, ty: &OneType) -> Result<(Slot, bool), Error> {
    let all: Vec<Elem> = t.elements().collect();
    let anchor = t.index_of(&ty.anchor).ok_or(Error::InconsistentType)?;
    let slot = match &ty.realized_at {
        Some(m) => Slot::At(t.index_of(m).ok_or(Error::InconsistentType)?),
        None => {
            let chain = t.chain_below(anchor);
            let c = *chain.get(ty.cut.len()).ok_or(Error::InconsistentType)?;
            Slot::Below(c)
        }
    };
    if descriptor(t, &all, slot, ty.strict_above) != *ty {
        return Err(Error::InconsistentType);
    }
    Ok((slot, ty.strict_above))
}

/// Extends `t` by a point of type `ty` (over the whole of `t`).
pub fn realize_type(t: &MeetTree, ty: &OneType) -> Result<PointedExtension, Error> {
    let (slot, strict) = slot_of_descriptor(t, ty)?;
    Ok(realize_slot(t, slot, strict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::tree::{canonical_form, enumerate_trees, marked_code, Embedding};
    use std::collections::BTreeSet;

    fn chain2() -> MeetTree {
        MeetTree::from_edges(&["a", "b"], &[("a", "b")]).unwrap()
    }

    fn fork() -> MeetTree {
        MeetTree::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap()
    }

    #[test]
    fn type_of_point_above() {
        let t = chain2();
        let ty = qf_type_of(&t, 1, &[0]);
        assert_eq!(
            ty,
            OneType { anchor: "a".into(), strict_above: true, cut: vec!["a".into()], realized_at: Some("a".into()) }
        );
    }

    #[test]
    fn type_of_branch_in_fork() {
        let t = fork();
        let ty = qf_type_of(&t, 2, &[1, 0]);
        assert_eq!(
            ty,
            OneType { anchor: "a".into(), strict_above: true, cut: vec!["r".into()], realized_at: Some("r".into()) }
        );
    }

    #[test]
    fn type_of_member_is_realized_at_itself() {
        let t = fork();
        let all = [0, 1, 2];
        for b in all {
            let ty = qf_type_of(&t, b, &all);
            assert!(!ty.strict_above);
            assert_eq!(ty.realized_at.as_deref(), Some(t.label(b)));
        }
    }

    #[test]
    fn singleton_has_four_types_chain_has_eight() {
        assert_eq!(enumerate_one_types(&MeetTree::point("a")).len(), 4);
        assert_eq!(enumerate_one_types(&chain2()).len(), 8);
        let distinct: BTreeSet<_> = enumerate_one_types(&fork()).into_iter().collect();
        assert_eq!(distinct.len(), 12);
    }

    #[test]
    fn realize_below_singleton() {
        let t = MeetTree::point("a");
        let ty = OneType { anchor: "a".into(), strict_above: false, cut: vec![], realized_at: None };
        let ext = realize_type(&t, &ty).unwrap();
        assert_eq!(ext.tree.len(), 2);
        assert!(ext.tree.lt(ext.new_point, 0));
        let ty = OneType { anchor: "a".into(), strict_above: true, cut: vec![], realized_at: None };
        let ext = realize_type(&t, &ty).unwrap();
        assert_eq!(ext.tree.len(), 3);
        assert_eq!(ext.tree.root(), ext.new_meet_point.unwrap());
    }

    #[test]
    fn realize_third_branch_of_fork() {
        let t = fork();
        let ty = OneType { anchor: "a".into(), strict_above: true, cut: vec!["r".into()], realized_at: Some("r".into()) };
        let ext = realize_type(&t, &ty).unwrap();
        assert_eq!(crate::tree::arity(&ext.tree), 3);
        assert_eq!(qf_type_of(&ext.tree, ext.new_point, &[0, 1, 2]), ty);
    }

    #[test]
    fn inconsistent_descriptor_rejected() {
        let t = fork();
        let bad = OneType { anchor: "b".into(), strict_above: true, cut: vec!["r".into()], realized_at: Some("r".into()) };
        assert_eq!(realize_type(&t, &bad).unwrap_err(), Error::InconsistentType);
        let bad = OneType { anchor: "zz".into(), strict_above: false, cut: vec![], realized_at: None };
        assert!(realize_type(&t, &bad).is_err());
    }

    /// All injective embeddings of `small` into `big`, by brute force.
    fn embeddings(small: &MeetTree, big: &MeetTree) -> Vec<Vec<Elem>> {
        fn go(s: &MeetTree, b: &MeetTree, cur: &mut Vec<Elem>, out: &mut Vec<Vec<Elem>>) {
            if cur.len() == s.len() {
                if (Embedding { map: cur.clone() }).check(s, b) {
                    out.push(cur.clone());
                }
                return;
            }
            for y in b.elements() {
                if !cur.contains(&y) {
                    cur.push(y);
                    go(s, b, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(small, big, &mut Vec::new(), &mut out);
        out
    }

    fn rename(ty: &OneType, names: &dyn Fn(&str) -> String) -> OneType {
        OneType {
            anchor: names(&ty.anchor),
            strict_above: ty.strict_above,
            cut: ty.cut.iter().map(|c| names(c)).collect(),
            realized_at: ty.realized_at.as_ref().map(|c| names(c)),
        }
    }

    /// Brute-force completeness: every point of every small tree containing `A`
    /// has one of the enumerated types. The anchor is relabelled through the
    /// embedding, so it is compared as a set of admissible anchors instead.
    #[test]
    fn enumeration_is_complete_against_embeddings() {
        let b = Budget::unlimited();
        let trees = enumerate_trees(6, &b).unwrap();
        for a in trees.iter().filter(|t| t.len() <= 3) {
            let types: BTreeSet<_> = enumerate_one_types(a).into_iter().collect();
            assert_eq!(types.len(), 4 * a.len());
            let mut seen = BTreeSet::new();
            for big in trees.iter().filter(|t| t.len() <= a.len() + 3 && t.len() > a.len()) {
                for emb in embeddings(a, big) {
                    let image: Vec<Elem> = emb.clone();
                    let back = |l: &str| {
                        let y = big.index_of(l).unwrap();
                        a.label(emb.iter().position(|&e| e == y).unwrap()).to_string()
                    };
                    for x in big.elements().filter(|x| !image.contains(x)) {
                        let (slot, strict) = slot_of(big, x, &image);
                        let pulled = match slot {
                            Slot::At(m) => Slot::At(emb.iter().position(|&e| e == m).unwrap()),
                            Slot::Below(c) => Slot::Below(emb.iter().position(|&e| e == c).unwrap()),
                        };
                        let all: Vec<Elem> = a.elements().collect();
                        let ty = descriptor(a, &all, pulled, strict);
                        let direct = rename(&qf_type_of(big, x, &image), &back);
                        assert_eq!(ty.cut, direct.cut);
                        assert_eq!(ty.realized_at, direct.realized_at);
                        assert!(types.contains(&ty));
                        seen.insert(ty);
                    }
                }
            }
            // Every non-trivial type shows up in some tree at most three points larger.
            let nontrivial: BTreeSet<_> = types.iter().filter(|t| t.strict_above || t.realized_at.is_none()).cloned().collect();
            assert_eq!(seen, nontrivial, "tree {a:?}");
        }
    }

    #[test]
    fn round_trip_on_small_trees() {
        let b = Budget::unlimited();
        for a in enumerate_trees(5, &b).unwrap() {
            let all: Vec<Elem> = a.elements().collect();
            for ty in enumerate_one_types(&a) {
                let ext = realize_type(&a, &ty).unwrap();
                assert_eq!(qf_type_of(&ext.tree, ext.new_point, &all), ty);
            }
        }
    }

    /// Type equality agrees with isomorphism of the extensions over `A`.
    #[test]
    fn types_match_marked_isomorphism() {
        let b = Budget::unlimited();
        for a in enumerate_trees(4, &b).unwrap() {
            let mut codes = BTreeSet::new();
            for ty in enumerate_one_types(&a) {
                let ext = realize_type(&a, &ty).unwrap();
                let n = a.len();
                let p = ext.new_point;
                let code = marked_code(&ext.tree, &|e| {
                    if e < n {
                        format!("{e}.")
                    } else if e == p {
                        "*".into()
                    } else {
                        String::new()
                    }
                });
                let key = if ext.is_existing(&a) { format!("={p}") } else { code };
                assert!(codes.insert(key), "two descriptors share a realization");
            }
        }
    }

    /// Points whose mutual meet sits above their meets with `B` share a type over `B`.
    #[test]
    fn meet_above_base_forces_equal_types() {
        let b = Budget::unlimited();
        for t in enumerate_trees(6, &b).unwrap() {
            let n = t.len();
            for mask in 1u32..(1 << n) {
                let set: Vec<Elem> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                if !t.is_meet_closed(&set) {
                    continue;
                }
                for a1 in t.elements() {
                    let low = set.iter().map(|&x| t.meet(x, a1)).max_by_key(|&m| t.depth(m)).unwrap();
                    for a2 in t.elements() {
                        if t.lt(low, t.meet(a1, a2)) {
                            assert_eq!(qf_type_of(&t, a1, &set), qf_type_of(&t, a2, &set));
                        }
                    }
                }
            }
        }
        let _ = canonical_form(&MeetTree::point("a"));
    }
}
