//! Finite meet-trees.
//!
//! A finite meet-tree is the same thing as a finite rooted tree read as a
//! poset: the minimum exists because every pair has a meet, and the meet of
//! two nodes is their lowest common ancestor. Trees are stored as parent
//! pointers plus dense `leq` and `meet` tables, since every algorithm in the
//! crate is a table lookup on a handful of elements.

use std::collections::BTreeMap;
use std::fmt;

use crate::budget::Budget;
use crate::error::Error;

/// Index of an element inside a [`MeetTree`].
pub type Elem = usize;

#[derive(Clone)]
pub struct MeetTree {
    labels: Vec<String>,
    parent: Vec<Option<Elem>>,
    depth: Vec<u32>,
    leq: Vec<bool>,
    meet: Vec<u32>,
}

impl fmt::Debug for MeetTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for e in self.elements() {
            m.entry(&self.labels[e], &self.parent[e].map(|p| &self.labels[p]));
        }
        m.finish()
    }
}

impl PartialEq for MeetTree {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.parent == other.parent
    }
}

impl Eq for MeetTree {}

/// Structural problems found while building a tree from parent pointers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShapeError {
    #[error("tree has no elements")]
    Empty,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("expected exactly one minimum, found {0}")]
    Roots(usize),
    #[error("parent pointers contain a cycle through {0:?}")]
    Cycle(String),
    #[error("parent index {0} out of range")]
    BadParent(usize),
}

impl MeetTree {
    /// Builds a tree from labels and parent pointers (exactly one `None`).
    pub fn from_parents(labels: Vec<String>, parent: Vec<Option<Elem>>) -> Result<Self, ShapeError> {
        let n = labels.len();
        if n == 0 {
            return Err(ShapeError::Empty);
        }
        assert_eq!(n, parent.len(), "labels and parents must have equal length");
        let mut seen = std::collections::HashSet::with_capacity(n);
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ShapeError::DuplicateLabel(l.clone()));
            }
        }
        if let Some(bad) = parent.iter().flatten().find(|&&p| p >= n) {
            return Err(ShapeError::BadParent(*bad));
        }
        let roots = parent.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(ShapeError::Roots(roots));
        }

        let mut depth = vec![u32::MAX; n];
        for start in 0..n {
            let mut path = Vec::new();
            let mut cur = start;
            while depth[cur] == u32::MAX {
                if path.len() > n {
                    return Err(ShapeError::Cycle(labels[start].clone()));
                }
                path.push(cur);
                match parent[cur] {
                    Some(p) => cur = p,
                    None => {
                        depth[cur] = 0;
                        path.pop();
                        break;
                    }
                }
            }
            let mut d = depth[cur];
            while let Some(x) = path.pop() {
                d += 1;
                depth[x] = d;
            }
        }

        let mut leq = vec![false; n * n];
        for x in 0..n {
            let mut cur = Some(x);
            while let Some(c) = cur {
                leq[c * n + x] = true;
                cur = parent[c];
            }
        }
        let mut meet = vec![0u32; n * n];
        for a in 0..n {
            for b in a..n {
                let (mut x, mut y) = (a, b);
                while depth[x] > depth[y] {
                    x = parent[x].unwrap();
                }
                while depth[y] > depth[x] {
                    y = parent[y].unwrap();
                }
                while x != y {
                    x = parent[x].unwrap();
                    y = parent[y].unwrap();
                }
                meet[a * n + b] = x as u32;
                meet[b * n + a] = x as u32;
            }
        }
        Ok(MeetTree { labels, parent, depth, leq, meet })
    }

    /// Convenience constructor for tests and fixtures: `edges` are (parent, child) label pairs.
    pub fn from_edges(labels: &[&str], edges: &[(&str, &str)]) -> Result<Self, ShapeError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let idx = |s: &str| labels.iter().position(|l| l == s).expect("edge label not in element list");
        let mut parent = vec![None; labels.len()];
        for (p, c) in edges {
            parent[idx(c)] = Some(idx(p));
        }
        MeetTree::from_parents(labels, parent)
    }

    /// The one-element tree.
    pub fn point(label: &str) -> Self {
        MeetTree::from_parents(vec![label.to_string()], vec![None]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.labels.len()
    }

    pub fn label(&self, e: Elem) -> &str {
        &self.labels[e]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<Elem> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn parent(&self, e: Elem) -> Option<Elem> {
        self.parent[e]
    }

    pub fn parents(&self) -> &[Option<Elem>] {
        &self.parent
    }

    pub fn depth(&self, e: Elem) -> u32 {
        self.depth[e]
    }

    pub fn root(&self) -> Elem {
        self.parent.iter().position(|p| p.is_none()).unwrap()
    }

    pub fn children(&self, e: Elem) -> impl Iterator<Item = Elem> + '_ {
        self.elements().filter(move |&c| self.parent[c] == Some(e))
    }

    #[inline]
    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.leq[a * self.labels.len() + b]
    }

    #[inline]
    pub fn lt(&self, a: Elem, b: Elem) -> bool {
        a != b && self.leq(a, b)
    }

    #[inline]
    pub fn comparable(&self, a: Elem, b: Elem) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    #[inline]
    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.meet[a * self.labels.len() + b] as Elem
    }

    /// Elements below `e` (inclusive), from the root upwards.
    pub fn chain_below(&self, e: Elem) -> Vec<Elem> {
        let mut v = Vec::with_capacity(self.depth[e] as usize + 1);
        let mut cur = Some(e);
        while let Some(c) = cur {
            v.push(c);
            cur = self.parent[c];
        }
        v.reverse();
        v
    }

    /// A label not used in the tree, built from `stem`.
    pub fn fresh_label(&self, stem: &str) -> String {
        (self.len()..)
            .map(|k| format!("{stem}{k}"))
            .find(|l| self.index_of(l).is_none())
            .unwrap()
    }

    /// Adds a new maximal element directly above `under`.
    pub fn with_leaf(&self, under: Elem, label: String) -> (MeetTree, Elem) {
        let mut labels = self.labels.clone();
        let mut parent = self.parent.clone();
        labels.push(label);
        parent.push(Some(under));
        let t = MeetTree::from_parents(labels, parent).expect("leaf insertion keeps a tree");
        let e = t.len() - 1;
        (t, e)
    }

    /// Adds a new element immediately below `above`, between it and its parent.
    pub fn with_inserted_below(&self, above: Elem, label: String) -> (MeetTree, Elem) {
        let mut labels = self.labels.clone();
        let mut parent = self.parent.clone();
        let e = labels.len();
        labels.push(label);
        parent.push(self.parent[above]);
        parent[above] = Some(e);
        (MeetTree::from_parents(labels, parent).expect("edge insertion keeps a tree"), e)
    }

    /// Renames every element; `rename` must be injective.
    pub fn relabeled(&self, mut rename: impl FnMut(&str) -> String) -> MeetTree {
        let labels = self.labels.iter().map(|l| rename(l)).collect();
        MeetTree::from_parents(labels, self.parent.clone()).expect("relabeling must stay injective")
    }

    /// Whether `set` is closed under meets.
    pub fn is_meet_closed(&self, set: &[Elem]) -> bool {
        let mut member = vec![false; self.len()];
        for &x in set {
            member[x] = true;
        }
        set.iter().all(|&x| set.iter().all(|&y| member[self.meet(x, y)]))
    }

    /// The subtree induced on a meet-closed set, plus the map from new to old indices.
    /// Elements keep their relative index order.
    pub fn induced(&self, set: &[Elem]) -> (MeetTree, Vec<Elem>) {
        let mut members: Vec<Elem> = set.to_vec();
        members.sort_unstable();
        members.dedup();
        debug_assert!(self.is_meet_closed(&members), "induced() needs a meet-closed set");
        let pos = |x: Elem| members.binary_search(&x).ok();
        let labels = members.iter().map(|&x| self.labels[x].clone()).collect();
        let parent = members
            .iter()
            .map(|&x| {
                let mut cur = self.parent[x];
                while let Some(c) = cur {
                    if let Some(i) = pos(c) {
                        return Some(i);
                    }
                    cur = self.parent[c];
                }
                None
            })
            .collect();
        (MeetTree::from_parents(labels, parent).expect("meet-closed subsets are trees"), members)
    }
}

/// The set generated by `s` under meets: `s` together with all pairwise meets.
pub fn meet_closure(t: &MeetTree, s: &[Elem]) -> Vec<Elem> {
    let mut member = vec![false; t.len()];
    for &x in s {
        member[x] = true;
        for &y in s {
            member[t.meet(x, y)] = true;
        }
    }
    t.elements().filter(|&e| member[e]).collect()
}

/// The substructure generated by `s`, with the map back into `t`.
pub fn generated_substructure(t: &MeetTree, s: &[Elem]) -> (MeetTree, Vec<Elem>) {
    assert!(!s.is_empty(), "generated_substructure needs a nonempty set");
    t.induced(&meet_closure(t, s))
}

/// `{x : x <= s for some s in set}`, sorted.
pub fn downward_closure(t: &MeetTree, s: &[Elem]) -> Vec<Elem> {
    let mut member = vec![false; t.len()];
    for &x in s {
        for c in t.chain_below(x) {
            member[c] = true;
        }
    }
    t.elements().filter(|&e| member[e]).collect()
}

/// Largest antichain whose pairwise meets all equal one element outside it.
/// In a finite tree this is the largest number of children of a single node.
pub fn arity(t: &MeetTree) -> usize {
    let mut kids = vec![0usize; t.len()];
    for e in t.elements() {
        if let Some(p) = t.parent(e) {
            kids[p] += 1;
        }
    }
    kids.into_iter().max().unwrap_or(0).max(1)
}

/// The tree of all cuts, including the empty one, with the principal-cut embedding.
/// For a finite tree this adjoins one new minimum.
pub fn completion(t: &MeetTree) -> (MeetTree, Vec<Elem>) {
    let bottom = t.fresh_label("bot");
    let mut labels = t.labels().to_vec();
    let mut parent = t.parents().to_vec();
    let b = labels.len();
    labels.push(bottom);
    parent[t.root()] = Some(b);
    parent.push(None);
    let c = MeetTree::from_parents(labels, parent).expect("adjoining a minimum keeps a tree");
    (c, t.elements().collect())
}

fn ahu(e: Elem, kids: &[Vec<Elem>], marks: &dyn Fn(Elem) -> String) -> String {
    let mut codes: Vec<String> = kids[e].iter().map(|&c| ahu(c, kids, marks)).collect();
    codes.sort_unstable();
    let mut s = String::from("(");
    s.push_str(&marks(e));
    for c in codes {
        s.push_str(&c);
    }
    s.push(')');
    s
}

pub(crate) fn children_lists(t: &MeetTree) -> Vec<Vec<Elem>> {
    let mut kids = vec![Vec::new(); t.len()];
    for e in t.elements() {
        if let Some(p) = t.parent(e) {
            kids[p].push(e);
        }
    }
    kids
}

/// Rooted-tree code with an extra per-node mark, used for marked isomorphism.
pub fn marked_code(t: &MeetTree, marks: &dyn Fn(Elem) -> String) -> String {
    let kids = children_lists(t);
    ahu(t.root(), &kids, marks)
}

/// Canonical label: equal iff the trees are isomorphic.
///
/// The code is computed on the completion, so it always starts with the
/// adjoined bottom's single child.
pub fn canonical_form(t: &MeetTree) -> String {
    let (c, _) = completion(t);
    marked_code(&c, &|_| String::new())
}

/// Rebuilds a tree from a code produced by [`canonical_form`], labelling nodes
/// `v0, v1, ...` in preorder (the completion bottom is dropped).
pub fn tree_from_code(code: &str) -> MeetTree {
    let inner = &code[1..code.len() - 1];
    let mut parent = Vec::new();
    let mut stack: Vec<Elem> = Vec::new();
    for ch in inner.chars() {
        match ch {
            '(' => {
                parent.push(stack.last().copied());
                stack.push(parent.len() - 1);
            }
            ')' => {
                stack.pop();
            }
            _ => panic!("unexpected character in tree code"),
        }
    }
    let labels = (0..parent.len()).map(|i| format!("v{i}")).collect();
    MeetTree::from_parents(labels, parent).expect("codes describe rooted trees")
}

/// One tree per isomorphism class with `1..=n` elements, ordered by size then code.
pub fn enumerate_trees(n: usize, budget: &Budget) -> Result<Vec<MeetTree>, Error> {
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    let mut layer: BTreeMap<String, MeetTree> = BTreeMap::new();
    let p = MeetTree::point("v0");
    layer.insert(canonical_form(&p), p);
    for size in 1..=n {
        if size > 1 {
            let mut next = BTreeMap::new();
            for t in layer.values() {
                for e in t.elements() {
                    budget.charge(1)?;
                    let (bigger, _) = t.with_leaf(e, format!("v{}", t.len()));
                    next.entry(canonical_form(&bigger)).or_insert(());
                }
            }
            layer = next.into_keys().map(|code| {
                let t = tree_from_code(&code);
                (code, t)
            }).collect();
        }
        out.extend(layer.values().cloned());
    }
    Ok(out)
}

/// An injective map of elements that preserves and reflects `<=` and commutes with meets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub map: Vec<Elem>,
}

impl Embedding {
    pub fn check(&self, source: &MeetTree, target: &MeetTree) -> bool {
        if self.map.len() != source.len() || self.map.iter().any(|&x| x >= target.len()) {
            return false;
        }
        let mut seen = vec![false; target.len()];
        for &x in &self.map {
            if std::mem::replace(&mut seen[x], true) {
                return false;
            }
        }
        source.elements().all(|a| {
            source.elements().all(|b| {
                source.leq(a, b) == target.leq(self.map[a], self.map[b])
                    && self.map[source.meet(a, b)] == target.meet(self.map[a], self.map[b])
            })
        })
    }
}

/// A raw candidate structure before validation.
#[derive(Debug, Clone, Default)]
pub struct RawTree {
    pub elements: Vec<String>,
    /// Generators of the order, closed reflexively and transitively.
    pub leq: Vec<(String, String)>,
    /// Optional asserted meets, cross-checked against the computed table.
    pub meet: Vec<((String, String), String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Empty,
    DuplicateLabel { label: String },
    UnknownLabel { label: String },
    /// `a <= b` and `b <= a` for distinct elements.
    NonOrder { a: String, b: String },
    /// `a` and `b` are incomparable but both below `c`.
    NonSemilinear { a: String, b: String, c: String },
    /// `a` and `b` have no common lower bound.
    MissingMeet { a: String, b: String },
    WrongMeet { a: String, b: String, given: String, actual: String },
}

/// Checks the meet-tree axioms and completes the meet table.
pub fn validate_tree(raw: &RawTree) -> Result<MeetTree, Vec<Violation>> {
    let n = raw.elements.len();
    if n == 0 {
        return Err(vec![Violation::Empty]);
    }
    let mut errs = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (i, l) in raw.elements.iter().enumerate() {
        if index.insert(l.as_str(), i).is_some() {
            errs.push(Violation::DuplicateLabel { label: l.clone() });
        }
    }
    let lookup = |l: &str, errs: &mut Vec<Violation>| -> Option<usize> {
        let r = index.get(l).copied();
        if r.is_none() {
            errs.push(Violation::UnknownLabel { label: l.to_string() });
        }
        r
    };
    let mut le = vec![false; n * n];
    for i in 0..n {
        le[i * n + i] = true;
    }
    for (a, b) in &raw.leq {
        if let (Some(x), Some(y)) = (lookup(a, &mut errs), lookup(b, &mut errs)) {
            le[x * n + y] = true;
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    for k in 0..n {
        for i in 0..n {
            if le[i * n + k] {
                for j in 0..n {
                    if le[k * n + j] {
                        le[i * n + j] = true;
                    }
                }
            }
        }
    }
    let name = |i: usize| raw.elements[i].clone();
    for a in 0..n {
        for b in a + 1..n {
            if le[a * n + b] && le[b * n + a] {
                errs.push(Violation::NonOrder { a: name(a), b: name(b) });
            }
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    for c in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if le[a * n + c] && le[b * n + c] && !le[a * n + b] && !le[b * n + a] {
                    errs.push(Violation::NonSemilinear { a: name(a), b: name(b), c: name(c) });
                }
            }
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    for a in 0..n {
        for b in a + 1..n {
            if !(0..n).any(|x| le[x * n + a] && le[x * n + b]) {
                errs.push(Violation::MissingMeet { a: name(a), b: name(b) });
            }
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    // Strict lower sets are chains now, so the parent is their maximum.
    let parent: Vec<Option<usize>> = (0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| y != x && le[y * n + x])
                .max_by_key(|&y| (0..n).filter(|&z| le[z * n + y]).count())
        })
        .collect();
    let tree = MeetTree::from_parents(raw.elements.clone(), parent)
        .map_err(|e| vec![Violation::DuplicateLabel { label: e.to_string() }])?;
    for ((a, b), m) in &raw.meet {
        let (Some(x), Some(y), Some(z)) = (lookup(a, &mut errs), lookup(b, &mut errs), lookup(m, &mut errs)) else {
            continue;
        };
        let actual = tree.meet(x, y);
        if actual != z {
            errs.push(Violation::WrongMeet { a: a.clone(), b: b.clone(), given: m.clone(), actual: name(actual) });
        }
    }
    if errs.is_empty() {
        Ok(tree)
    } else {
        Err(errs)
    }
}
