//! Amalgamation of trees with automorphisms.
//!
//! Structures are matched by label: the base's labels name the same elements
//! in both sides, and everything else is private to one side (clashing
//! private labels are renamed with an `L:` or `R:` prefix).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::budget::Budget;
use crate::corpus::{isomorphisms, pauto_key, tree_automorphisms};
use crate::error::Error;
use crate::pauto::{validate_pauto, PartialAutomorphism};
use crate::tree::{arity, canonical_form, completion, downward_closure, enumerate_trees, Elem, Embedding, MeetTree};

/// A base and two extensions of it, matched by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmalgProblem {
    pub base: PartialAutomorphism,
    pub left: PartialAutomorphism,
    pub right: PartialAutomorphism,
}

#[derive(Debug, Clone)]
pub struct AmalgSolution {
    pub amalgam: PartialAutomorphism,
    /// Indices of the original left and right elements in the amalgam.
    pub left_embedding: Embedding,
    pub right_embedding: Embedding,
    /// Choices made where the construction is not forced.
    pub provenance: Vec<String>,
}

fn labels_of(t: &MeetTree) -> BTreeSet<&str> {
    t.labels().iter().map(String::as_str).collect()
}

fn label_pairs_map(p: &PartialAutomorphism) -> BTreeMap<String, String> {
    p.label_pairs().into_iter().collect()
}

/// The embedding of `sub` into `host` that matches labels, if it is one.
pub fn label_embedding(sub: &MeetTree, host: &MeetTree) -> Option<Embedding> {
    let map: Option<Vec<Elem>> = sub.elements().map(|e| host.index_of(sub.label(e))).collect();
    let emb = Embedding { map: map? };
    emb.check(sub, host).then_some(emb)
}

fn is_total(p: &PartialAutomorphism) -> bool {
    p.len() == p.tree().len()
}

impl AmalgProblem {
    /// Checks that the base sits inside both sides as a substructure and that
    /// both side maps extend the base map.
    pub fn check(&self) -> Result<(), Error> {
        let b = self.base.tree();
        for (name, side) in [("left", &self.left), ("right", &self.right)] {
            let emb = label_embedding(b, side.tree())
                .ok_or_else(|| Error::Precondition(format!("base is not a substructure of the {name} side")))?;
            for (x, y) in self.base.pairs() {
                if side.get(emb.map[x]) != Some(emb.map[y]) {
                    return Err(Error::Agreement(format!("{name} side at {}", b.label(x))));
                }
            }
        }
        Ok(())
    }

    /// Renames private labels that occur on both sides.
    fn separated(&self) -> (AmalgProblem, Vec<String>, Vec<String>) {
        let base = labels_of(self.base.tree());
        let (l, r) = (labels_of(self.left.tree()), labels_of(self.right.tree()));
        let clash: BTreeSet<String> = l.intersection(&r).filter(|x| !base.contains(*x)).map(|s| s.to_string()).collect();
        let rename = |p: &PartialAutomorphism, prefix: &str| -> (PartialAutomorphism, Vec<String>) {
            let t = p.tree().relabeled(|s| if clash.contains(s) { format!("{prefix}{s}") } else { s.to_string() });
            let names = t.labels().to_vec();
            (validate_pauto(&t, &p.pairs()).expect("renaming keeps validity"), names)
        };
        let (left, ln) = rename(&self.left, "L:");
        let (right, rn) = rename(&self.right, "R:");
        (AmalgProblem { base: self.base.clone(), left, right }, ln, rn)
    }
}

/// Result of [`down_close_triple`]: the enlarged problem, the new names of the
/// original side elements, and notes on the gap orderings chosen.
#[derive(Debug, Clone)]
pub struct DownClosed {
    pub problem: AmalgProblem,
    pub left_names: Vec<String>,
    pub right_names: Vec<String>,
    pub provenance: Vec<String>,
}

/// Private elements of a side lying below the base, grouped by the least base
/// element above them, each group listed bottom to top.
fn gaps(base: &MeetTree, side: &MeetTree) -> BTreeMap<String, Vec<Elem>> {
    let in_base = |e: Elem| base.index_of(side.label(e)).is_some();
    let base_elems: Vec<Elem> = side.elements().filter(|&e| in_base(e)).collect();
    let mut out: BTreeMap<String, Vec<Elem>> = BTreeMap::new();
    for c in downward_closure(side, &base_elems).into_iter().filter(|&c| !in_base(c)) {
        let least = base_elems
            .iter()
            .copied()
            .filter(|&b| side.leq(c, b))
            .min_by_key(|&b| side.depth(b))
            .expect("c lies below some base element");
        out.entry(side.label(least).to_string()).or_default().push(c);
    }
    for chain in out.values_mut() {
        chain.sort_by_key(|&c| side.depth(c));
    }
    out
}

/// Inserts `chain` (bottom to top, labels from `src`) directly below `above`.
fn insert_chain(t: MeetTree, above: &str, chain: &[Elem], src: &MeetTree) -> MeetTree {
    let mut t = t;
    for &c in chain {
        let a = t.index_of(above).unwrap();
        t = t.with_inserted_below(a, src.label(c).to_string()).0;
    }
    t
}

fn pauto_by_labels(t: &MeetTree, pairs: &BTreeMap<String, String>) -> Result<PartialAutomorphism, Error> {
    let idx: Vec<(Elem, Elem)> = pairs.iter().map(|(x, y)| (t.index_of(x).unwrap(), t.index_of(y).unwrap())).collect();
    Ok(validate_pauto(t, &idx)?)
}

/// Makes the base downward closed in both sides. Each side's private elements
/// below the base are copied into the base and into the other side. Where both
/// sides have such elements under the same base element, the left chain is
/// placed below the right chain.
pub fn down_close_triple(p: &AmalgProblem) -> Result<DownClosed, Error> {
    p.check()?;
    let (p, left_names, right_names) = p.separated();
    let (bt, lt, rt) = (p.base.tree(), p.left.tree(), p.right.tree());
    let (lg, rg) = (gaps(bt, lt), gaps(bt, rt));
    let (lmap, rmap) = (label_pairs_map(&p.left), label_pairs_map(&p.right));
    let mut base_tree = bt.clone();
    let mut left_tree = lt.clone();
    let mut right_tree = rt.clone();
    let mut base_pairs = label_pairs_map(&p.base);
    let mut left_pairs = lmap.clone();
    let mut right_pairs = rmap.clone();
    let mut provenance = Vec::new();
    let keys: BTreeSet<&String> = lg.keys().chain(rg.keys()).collect();
    for m in keys {
        let lc = lg.get(m).map(Vec::as_slice).unwrap_or(&[]);
        let rc = rg.get(m).map(Vec::as_slice).unwrap_or(&[]);
        base_tree = insert_chain(base_tree, m, lc, lt);
        base_tree = insert_chain(base_tree, m, rc, rt);
        left_tree = insert_chain(left_tree, m, rc, rt);
        let right_anchor = rc.first().map_or(m.as_str(), |&c| rt.label(c));
        right_tree = insert_chain(right_tree, right_anchor, lc, lt);
        if !lc.is_empty() && !rc.is_empty() {
            let names = |c: &[Elem], t: &MeetTree| c.iter().map(|&e| t.label(e)).collect::<Vec<_>>().join(",");
            provenance.push(format!("below {m}: left chain [{}] placed under right chain [{}]", names(lc, lt), names(rc, rt)));
        }
        for (chain, t, map) in [(lc, lt, &lmap), (rc, rt, &rmap)] {
            for &c in chain {
                if let Some(img) = map.get(t.label(c)) {
                    base_pairs.insert(t.label(c).to_string(), img.clone());
                    left_pairs.insert(t.label(c).to_string(), img.clone());
                    right_pairs.insert(t.label(c).to_string(), img.clone());
                }
            }
        }
    }
    let problem = AmalgProblem {
        base: pauto_by_labels(&base_tree, &base_pairs)?,
        left: pauto_by_labels(&left_tree, &left_pairs)?,
        right: pauto_by_labels(&right_tree, &right_pairs)?,
    };
    problem.check()?;
    Ok(DownClosed { problem, left_names, right_names, provenance })
}

/// Amalgamates two trees with total automorphisms over a common invariant
/// substructure: down-close, complete, and take the union of the parent maps
/// and of the automorphisms. An unused completion bottom is dropped.
pub fn amalgamate_total(p: &AmalgProblem) -> Result<AmalgSolution, Error> {
    for (name, side) in [("base", &p.base), ("left", &p.left), ("right", &p.right)] {
        if !is_total(side) {
            return Err(Error::Precondition(format!("{name} automorphism is not total")));
        }
    }
    let dc = down_close_triple(p)?;
    let q = &dc.problem;
    let (bt, lt, rt) = (q.base.tree(), q.left.tree(), q.right.tree());
    let (complete_base, _) = completion(bt);
    let bottom = {
        let mut b = complete_base.label(complete_base.len() - 1).to_string();
        while lt.index_of(&b).is_some() || rt.index_of(&b).is_some() {
            b.push('\'');
        }
        b
    };
    let mut labels: Vec<String> = Vec::new();
    let mut parent_label: Vec<Option<String>> = Vec::new();
    let push = |t: &MeetTree, e: Elem, labels: &mut Vec<String>, parent_label: &mut Vec<Option<String>>| {
        labels.push(t.label(e).to_string());
        parent_label.push(Some(t.parent(e).map_or(bottom.clone(), |x| t.label(x).to_string())));
    };
    for e in bt.elements() {
        push(bt, e, &mut labels, &mut parent_label);
    }
    for (t, _) in [(lt, 0), (rt, 1)] {
        for e in t.elements().filter(|&e| bt.index_of(t.label(e)).is_none()) {
            push(t, e, &mut labels, &mut parent_label);
        }
    }
    let bottom_children = parent_label.iter().filter(|x| x.as_deref() == Some(bottom.as_str())).count();
    let mut provenance = dc.provenance.clone();
    if bottom_children > 1 {
        labels.push(bottom.clone());
        parent_label.push(None);
        provenance.push(format!("completion bottom {bottom} kept"));
    } else {
        for pl in parent_label.iter_mut() {
            if pl.as_deref() == Some(bottom.as_str()) {
                *pl = None;
            }
        }
    }
    let index: HashMap<&str, Elem> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let parents: Vec<Option<Elem>> = parent_label.iter().map(|pl| pl.as_ref().map(|l| index[l.as_str()])).collect();
    let tree = MeetTree::from_parents(labels.clone(), parents).map_err(|e| Error::Precondition(format!("union is not a tree: {e:?}")))?;
    let mut h = label_pairs_map(&q.left);
    h.extend(label_pairs_map(&q.right));
    let amalgam = pauto_by_labels(&tree, &h)?;
    let embed = |names: &[String]| Embedding { map: names.iter().map(|n| tree.index_of(n).unwrap()).collect() };
    let sol = AmalgSolution {
        left_embedding: embed(&dc.left_names),
        right_embedding: embed(&dc.right_names),
        amalgam,
        provenance,
    };
    verify_solution(p, &sol)?;
    Ok(sol)
}

/// Embeddings are embeddings, commute with the maps, and agree on the base.
pub fn verify_solution(p: &AmalgProblem, s: &AmalgSolution) -> Result<(), Error> {
    let d = s.amalgam.tree();
    let bad = |m: &str| Err(Error::Precondition(m.to_string()));
    for (side, emb) in [(&p.left, &s.left_embedding), (&p.right, &s.right_embedding)] {
        if !emb.check(side.tree(), d) {
            return bad("side does not embed");
        }
        for (x, y) in side.pairs() {
            if s.amalgam.get(emb.map[x]) != Some(emb.map[y]) {
                return bad("embedding does not commute with the automorphisms");
            }
        }
    }
    for b in p.base.tree().elements() {
        let l = p.left.tree().index_of(p.base.tree().label(b)).unwrap();
        let r = p.right.tree().index_of(p.base.tree().label(b)).unwrap();
        if s.left_embedding.map[l] != s.right_embedding.map[r] {
            return bad("embeddings disagree on the base");
        }
    }
    Ok(())
}

/// Disjoint union of two trees with partial automorphisms under a fresh
/// minimum, which is left out of the map.
pub fn joint_embed(a: &PartialAutomorphism, b: &PartialAutomorphism) -> (PartialAutomorphism, Embedding, Embedding) {
    let (la, lb) = (labels_of(a.tree()), labels_of(b.tree()));
    let clash: BTreeSet<String> = la.intersection(&lb).map(|s| s.to_string()).collect();
    let name = |s: &str, prefix: &str| if clash.contains(s) { format!("{prefix}{s}") } else { s.to_string() };
    let mut labels: Vec<String> = a.tree().labels().iter().map(|s| name(s, "L:")).collect();
    labels.extend(b.tree().labels().iter().map(|s| name(s, "R:")));
    let mut root = "v".to_string();
    let mut k = 0;
    while labels.contains(&root) {
        root = format!("v{k}");
        k += 1;
    }
    let off = a.tree().len();
    let v = off + b.tree().len();
    let mut parents: Vec<Option<Elem>> = a.tree().parents().iter().map(|p| Some(p.unwrap_or(v))).collect();
    parents.extend(b.tree().parents().iter().map(|p| Some(p.map_or(v, |x| x + off))));
    labels.push(root);
    parents.push(None);
    let t = MeetTree::from_parents(labels, parents).expect("joining two trees under a new root");
    let mut pairs = a.pairs();
    pairs.extend(b.pairs().into_iter().map(|(x, y)| (x + off, y + off)));
    let p = validate_pauto(&t, &pairs).expect("maps on separate branches combine");
    let ea = Embedding { map: a.tree().elements().collect() };
    let eb = Embedding { map: b.tree().elements().map(|x| x + off).collect() };
    (p, ea, eb)
}

/// Outcome of the exhaustive search.
#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionReport {
    pub max_size: usize,
    pub arity_bound: Option<usize>,
    pub trees_searched: usize,
    pub nodes: u64,
    /// SHA-256 over the searched trees' codes and per-tree node counts.
    pub frontier_digest: String,
}

#[derive(Debug, Clone)]
pub enum BruteForceOutcome {
    Found { solution: Box<AmalgSolution>, report: ExhaustionReport },
    Exhausted(ExhaustionReport),
}

impl BruteForceOutcome {
    pub fn report(&self) -> &ExhaustionReport {
        match self {
            BruteForceOutcome::Found { report, .. } | BruteForceOutcome::Exhausted(report) => report,
        }
    }
}

type Visit<'a> = dyn FnMut(&[Option<Elem>], &mut u64) -> Result<bool, Error> + 'a;

/// Extends a partial embedding of `src` into `dst` over `order[i..]`.
#[allow(clippy::too_many_arguments)]
fn embeddings(
    src: &MeetTree,
    dst: &MeetTree,
    order: &[Elem],
    i: usize,
    map: &mut Vec<Option<Elem>>,
    used: &mut Vec<bool>,
    nodes: &mut u64,
    budget: &Budget,
    visit: &mut Visit<'_>,
) -> Result<bool, Error> {
    *nodes += 1;
    budget.charge(1)?;
    if i == order.len() {
        return visit(map, nodes);
    }
    let x = order[i];
    let fits = |v: Elem, map: &[Option<Elem>]| {
        src.elements().all(|y| match map[y] {
            None => true,
            Some(w) => src.leq(x, y) == dst.leq(v, w) && src.leq(y, x) == dst.leq(w, v),
        })
    };
    let candidates: Vec<Elem> = match map[x] {
        Some(v) => vec![v],
        None => dst.elements().filter(|&v| !used[v]).collect(),
    };
    let preset = map[x].is_some();
    for v in candidates {
        if !preset && !fits(v, map) {
            continue;
        }
        if !preset {
            map[x] = Some(v);
            used[v] = true;
        }
        // Meets among assigned elements must be preserved where both sides are assigned.
        let meets_ok = src.elements().all(|y| match map[y] {
            None => true,
            Some(w) => map[src.meet(x, y)].is_none_or(|m| m == dst.meet(v, w)),
        });
        if meets_ok && embeddings(src, dst, order, i + 1, map, used, nodes, budget, visit)? {
            return Ok(true);
        }
        if !preset {
            map[x] = None;
            used[v] = false;
        }
    }
    Ok(false)
}

/// Searches trees of at most `max_size` elements (of arity at most
/// `arity_bound` when given), in order of size and canonical code, for an
/// amalgam of two extensions of a base carrying partial automorphisms.
pub fn brute_force_amalgam_k1(
    p: &AmalgProblem,
    max_size: usize,
    arity_bound: Option<usize>,
    budget: &Budget,
) -> Result<BruteForceOutcome, Error> {
    p.check()?;
    let (lt, rt) = (p.left.tree(), p.right.tree());
    let base_left: Vec<Elem> = p.base.tree().labels().iter().map(|l| lt.index_of(l).unwrap()).collect();
    let base_right: Vec<Elem> = p.base.tree().labels().iter().map(|l| rt.index_of(l).unwrap()).collect();
    let by_depth = |t: &MeetTree| {
        let mut v: Vec<Elem> = t.elements().collect();
        v.sort_by_key(|&e| t.depth(e));
        v
    };
    let (lorder, rorder) = (by_depth(lt), by_depth(rt));
    let mut digest = Sha256::new();
    let mut nodes = 0u64;
    let mut trees_searched = 0;
    let mut found = None;
    for d in enumerate_trees(max_size, budget)? {
        if d.len() < lt.len().max(rt.len()) || arity_bound.is_some_and(|k| arity(&d) > k) {
            continue;
        }
        trees_searched += 1;
        let before = nodes;
        let mut lmap = vec![None; lt.len()];
        let mut lused = vec![false; d.len()];
        let mut hit: Option<(Vec<Elem>, Vec<Elem>, PartialAutomorphism)> = None;
        embeddings(lt, &d, &lorder, 0, &mut lmap, &mut lused, &mut nodes, budget, &mut |e1, nodes| {
            let e1: Vec<Elem> = e1.iter().map(|x| x.unwrap()).collect();
            let mut rmap = vec![None; rt.len()];
            let mut rused = vec![false; d.len()];
            for (&bl, &br) in base_left.iter().zip(&base_right) {
                rmap[br] = Some(e1[bl]);
                rused[e1[bl]] = true;
            }
            embeddings(rt, &d, &rorder, 0, &mut rmap, &mut rused, nodes, budget, &mut |e2, _| {
                let e2: Vec<Elem> = e2.iter().map(|x| x.unwrap()).collect();
                let mut pairs: Vec<(Elem, Elem)> = p.left.pairs().into_iter().map(|(x, y)| (e1[x], e1[y])).collect();
                pairs.extend(p.right.pairs().into_iter().map(|(x, y)| (e2[x], e2[y])));
                pairs.sort_unstable();
                pairs.dedup();
                match validate_pauto(&d, &pairs) {
                    Ok(h) => {
                        hit = Some((e1.clone(), e2, h));
                        Ok(true)
                    }
                    Err(_) => Ok(false),
                }
            })
        })?;
        let code = canonical_form(&d);
        digest.update(code.as_bytes());
        digest.update((nodes - before).to_le_bytes());
        if let Some((e1, e2, h)) = hit {
            found = Some(AmalgSolution {
                amalgam: h,
                left_embedding: Embedding { map: e1 },
                right_embedding: Embedding { map: e2 },
                provenance: vec![format!("first solution on tree {code}")],
            });
            break;
        }
    }
    let report = ExhaustionReport {
        max_size,
        arity_bound,
        trees_searched,
        nodes,
        frontier_digest: hex::encode(digest.finalize()),
    };
    Ok(match found {
        Some(solution) => {
            verify_solution(p, &solution)?;
            BruteForceOutcome::Found { solution: Box::new(solution), report }
        }
        None => BruteForceOutcome::Exhausted(report),
    })
}

/// The bounded-arity obstruction: a point `b` fixed, a `k`-star above `b`
/// rotated by the left map, and a single point above `b` fixed by the right map.
pub fn nonap_problem(k: usize) -> AmalgProblem {
    assert!(k >= 2, "the obstruction needs arity at least 2");
    let base_t = MeetTree::point("b");
    let base = PartialAutomorphism::from_labels(&base_t, &[("b", "b")]).unwrap();
    let star: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
    let mut labels = vec!["b".to_string()];
    labels.extend(star.iter().cloned());
    let parents = std::iter::once(None).chain((0..k).map(|_| Some(0))).collect();
    let lt = MeetTree::from_parents(labels, parents).unwrap();
    let mut lp: Vec<(Elem, Elem)> = vec![(0, 0)];
    lp.extend((1..=k).map(|i| (i, i % k + 1)));
    let left = validate_pauto(&lt, &lp).unwrap();
    let rt = MeetTree::from_edges(&["b", "c"], &[("b", "c")]).unwrap();
    let right = PartialAutomorphism::from_labels(&rt, &[("b", "b"), ("c", "c")]).unwrap();
    AmalgProblem { base, left, right }
}

/// Runs the exhaustive search on [`nonap_problem`] under arity bound `k`.
pub fn nonap_witness(k: usize, max_size: usize, budget: &Budget) -> Result<(AmalgProblem, BruteForceOutcome), Error> {
    let p = nonap_problem(k);
    let out = brute_force_amalgam_k1(&p, max_size, Some(k), budget)?;
    Ok((p, out))
}

/// A tree with a total automorphism and a nonempty invariant substructure.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub aut: PartialAutomorphism,
    pub base: Vec<Elem>,
}

/// Every (tree, automorphism, invariant meet-closed subset) with the tree up
/// to `max_size` elements, grouped by the isomorphism type of the restricted
/// map on the subset.
/// Catalog entries keyed by the isomorphism type of the base with its map.
pub type Catalog = BTreeMap<(String, Vec<(Elem, Elem)>), Vec<CatalogEntry>>;

pub fn problem_catalog(max_size: usize, budget: &Budget) -> Result<Catalog, Error> {
    let mut out: BTreeMap<_, Vec<CatalogEntry>> = BTreeMap::new();
    for t in enumerate_trees(max_size, budget)? {
        for sigma in tree_automorphisms(&t) {
            let pairs: Vec<(Elem, Elem)> = t.elements().map(|x| (x, sigma[x])).collect();
            let aut = validate_pauto(&t, &pairs)?;
            for mask in 1u32..(1 << t.len()) {
                budget.charge(1)?;
                let set: Vec<Elem> = t.elements().filter(|&e| mask >> e & 1 == 1).collect();
                if !t.is_meet_closed(&set) || set.iter().any(|&e| mask >> sigma[e] & 1 == 0) {
                    continue;
                }
                let restricted = restrict(&aut, &set);
                out.entry(pauto_key(&restricted)).or_default().push(CatalogEntry { aut: aut.clone(), base: set });
            }
        }
    }
    Ok(out)
}

fn restrict(p: &PartialAutomorphism, set: &[Elem]) -> PartialAutomorphism {
    let (sub, back) = p.tree().induced(set);
    let pos = |x: Elem| back.iter().position(|&b| b == x).unwrap();
    let pairs: Vec<(Elem, Elem)> = set.iter().filter_map(|&x| p.get(x).map(|y| (pos(x), pos(y)))).collect();
    validate_pauto(&sub, &pairs).expect("restriction to an invariant substructure")
}

/// Glues two catalog entries with isomorphic bases into a problem: base
/// elements take `B:` labels from the left entry, private elements `L:`/`R:`.
pub fn problem_from_entries(left: &CatalogEntry, right: &CatalogEntry) -> Option<AmalgProblem> {
    let lb = restrict(&left.aut, &left.base);
    let rb = restrict(&right.aut, &right.base);
    let commuting = isomorphisms(rb.tree(), lb.tree()).into_iter().find(|s| {
        rb.pairs().into_iter().all(|(x, y)| lb.get(s[x]) == Some(s[y]))
    })?;
    let base_name = |i: usize| format!("B:{}", lb.tree().label(i));
    let lname: HashMap<Elem, String> = left.base.iter().enumerate().map(|(i, &e)| (e, base_name(i))).collect();
    let rname: HashMap<Elem, String> = right.base.iter().enumerate().map(|(i, &e)| (e, base_name(commuting[i]))).collect();
    let side = |e: &CatalogEntry, names: &HashMap<Elem, String>, prefix: &str| {
        let t = e.aut.tree();
        let labels: Vec<String> =
            t.elements().map(|x| names.get(&x).cloned().unwrap_or_else(|| format!("{prefix}{}", t.label(x)))).collect();
        let t2 = MeetTree::from_parents(labels, t.parents().to_vec()).unwrap();
        validate_pauto(&t2, &e.aut.pairs()).unwrap()
    };
    let l = side(left, &lname, "L:");
    let r = side(right, &rname, "R:");
    let base_t = lb.tree().relabeled(|s| format!("B:{s}"));
    let base = validate_pauto(&base_t, &lb.pairs()).unwrap();
    Some(AmalgProblem { base, left: l, right: r })
}
