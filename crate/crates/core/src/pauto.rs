//! Partial automorphisms, their orbits and orbit classes.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::tree::{generated_substructure, meet_closure, Elem, MeetTree};
use crate::types::{descriptor_over_all, enumerate_slots, realize_slot, OneType, Slot};

/// Why a finite map fails to be a partial automorphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PautoViolation {
    OutOfRange { index: usize },
    /// `a` is sent to two different places.
    NotAFunction { a: String },
    /// `a` and `b` (possibly meets of domain points) share an image.
    InjectivityClash { a: String, b: String },
    /// The order between `a` and `b` is not the order between their images.
    OrderViolation { a: String, b: String },
    /// The meet of `a` and `b` does not go to the meet of their images.
    MeetImageMismatch { a: String, b: String },
}

impl fmt::Display for PautoViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PautoViolation::OutOfRange { index } => write!(f, "element index {index} out of range"),
            PautoViolation::NotAFunction { a } => write!(f, "{a} has two images"),
            PautoViolation::InjectivityClash { a, b } => write!(f, "{a} and {b} have the same image"),
            PautoViolation::OrderViolation { a, b } => write!(f, "order between {a} and {b} not preserved"),
            PautoViolation::MeetImageMismatch { a, b } => write!(f, "meet of {a} and {b} not preserved"),
        }
    }
}

/// A finite partial map on a tree that extends to an isomorphism between the
/// substructures generated by its domain and its range.
#[derive(Clone, Debug)]
pub struct PartialAutomorphism {
    tree: MeetTree,
    fwd: Vec<Option<Elem>>,
    bwd: Vec<Option<Elem>>,
    closure: Vec<Option<Elem>>,
}

impl PartialEq for PartialAutomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.tree == other.tree && self.fwd == other.fwd
    }
}

impl Eq for PartialAutomorphism {}

/// Checks `pairs` against the tree and returns the automorphism together with
/// its meet closure.
pub fn validate_pauto(tree: &MeetTree, pairs: &[(Elem, Elem)]) -> Result<PartialAutomorphism, PautoViolation> {
    let n = tree.len();
    let l = |e: Elem| tree.label(e).to_string();
    let mut fwd = vec![None; n];
    let mut bwd = vec![None; n];
    for &(x, y) in pairs {
        if x >= n || y >= n {
            return Err(PautoViolation::OutOfRange { index: x.max(y) });
        }
        match fwd[x] {
            Some(old) if old != y => return Err(PautoViolation::NotAFunction { a: l(x) }),
            Some(_) => continue,
            None => {}
        }
        if let Some(other) = bwd[y] {
            return Err(PautoViolation::InjectivityClash { a: l(other), b: l(x) });
        }
        fwd[x] = Some(y);
        bwd[y] = Some(x);
    }
    let dom: Vec<Elem> = (0..n).filter(|&x| fwd[x].is_some()).collect();
    for &x in &dom {
        for &y in &dom {
            if tree.leq(x, y) != tree.leq(fwd[x].unwrap(), fwd[y].unwrap()) {
                return Err(PautoViolation::OrderViolation { a: l(x), b: l(y) });
            }
        }
    }
    let mut closure = vec![None; n];
    for &x in &dom {
        for &y in &dom {
            let m = tree.meet(x, y);
            let img = tree.meet(fwd[x].unwrap(), fwd[y].unwrap());
            match closure[m] {
                Some(old) if old != img => return Err(PautoViolation::MeetImageMismatch { a: l(x), b: l(y) }),
                _ => closure[m] = Some(img),
            }
        }
    }
    let closed: Vec<Elem> = (0..n).filter(|&x| closure[x].is_some()).collect();
    let mut seen: Vec<Option<Elem>> = vec![None; n];
    for &u in &closed {
        let img = closure[u].unwrap();
        if let Some(other) = seen[img] {
            return Err(PautoViolation::InjectivityClash { a: l(other), b: l(u) });
        }
        seen[img] = Some(u);
    }
    for &u in &closed {
        for &v in &closed {
            let (pu, pv) = (closure[u].unwrap(), closure[v].unwrap());
            if tree.leq(u, v) != tree.leq(pu, pv) {
                return Err(PautoViolation::OrderViolation { a: l(u), b: l(v) });
            }
            if closure[tree.meet(u, v)] != Some(tree.meet(pu, pv)) {
                return Err(PautoViolation::MeetImageMismatch { a: l(u), b: l(v) });
            }
        }
    }
    Ok(PartialAutomorphism { tree: tree.clone(), fwd, bwd, closure })
}

impl PartialAutomorphism {
    pub fn new(tree: &MeetTree, pairs: &[(Elem, Elem)]) -> Result<Self, PautoViolation> {
        validate_pauto(tree, pairs)
    }

    /// Builds from label pairs; unknown labels are reported as precondition failures.
    pub fn from_labels(tree: &MeetTree, pairs: &[(&str, &str)]) -> Result<Self, Error> {
        let idx = |s: &str| tree.index_of(s).ok_or_else(|| Error::Precondition(format!("unknown label {s:?}")));
        let pairs = pairs
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(validate_pauto(tree, &pairs)?)
    }

    /// The empty map on `tree`.
    pub fn empty(tree: &MeetTree) -> Self {
        validate_pauto(tree, &[]).unwrap()
    }

    pub fn tree(&self) -> &MeetTree {
        &self.tree
    }

    pub fn get(&self, x: Elem) -> Option<Elem> {
        self.fwd[x]
    }

    pub fn preimage(&self, y: Elem) -> Option<Elem> {
        self.bwd[y]
    }

    /// The unique extension to the substructure generated by the domain.
    pub fn closure_get(&self, x: Elem) -> Option<Elem> {
        self.closure[x]
    }

    pub fn closed_pairs(&self) -> Vec<(Elem, Elem)> {
        self.tree.elements().filter_map(|x| self.closure[x].map(|y| (x, y))).collect()
    }

    pub fn pairs(&self) -> Vec<(Elem, Elem)> {
        self.tree.elements().filter_map(|x| self.fwd[x].map(|y| (x, y))).collect()
    }

    pub fn label_pairs(&self) -> Vec<(String, String)> {
        self.pairs()
            .into_iter()
            .map(|(x, y)| (self.tree.label(x).to_string(), self.tree.label(y).to_string()))
            .collect()
    }

    pub fn dom(&self) -> Vec<Elem> {
        self.tree.elements().filter(|&x| self.fwd[x].is_some()).collect()
    }

    pub fn range(&self) -> Vec<Elem> {
        self.tree.elements().filter(|&x| self.bwd[x].is_some()).collect()
    }

    pub fn len(&self) -> usize {
        self.fwd.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Domain and range together.
    pub fn support(&self) -> Vec<Elem> {
        self.tree.elements().filter(|&x| self.fwd[x].is_some() || self.bwd[x].is_some()).collect()
    }

    /// Adds `x ↦ v` on `tree`, which must extend the current tree index-for-index.
    pub fn with_pair(&self, tree: &MeetTree, x: Elem, v: Elem) -> Result<Self, PautoViolation> {
        debug_assert!(self.tree.labels().iter().zip(tree.labels()).all(|(a, b)| a == b));
        let mut pairs = self.pairs();
        pairs.push((x, v));
        validate_pauto(tree, &pairs)
    }

    /// The same map on a different tree that extends this one index-for-index.
    pub fn on_tree(&self, tree: &MeetTree) -> Self {
        validate_pauto(tree, &self.pairs()).expect("embedding preserves partial automorphisms")
    }

    /// The map restricted to the tree generated by its domain and range.
    /// The empty map is returned unchanged.
    pub fn core(&self) -> Self {
        let support = self.support();
        if support.is_empty() {
            return self.clone();
        }
        let (sub, back) = generated_substructure(&self.tree, &support);
        let mut fwd_idx = vec![usize::MAX; self.tree.len()];
        for (i, &old) in back.iter().enumerate() {
            fwd_idx[old] = i;
        }
        let pairs: Vec<(Elem, Elem)> = self.pairs().into_iter().map(|(x, y)| (fwd_idx[x], fwd_idx[y])).collect();
        validate_pauto(&sub, &pairs).expect("restriction to a substructure stays valid")
    }

    /// Whether the tree is exactly the substructure generated by the support.
    pub fn is_core(&self) -> bool {
        let s = self.support();
        !s.is_empty() && meet_closure(&self.tree, &s).len() == self.tree.len()
    }
}

/// A maximal run `x₀ ↦ x₁ ↦ … ↦ xₙ`. Cyclic orbits repeat their first point at
/// the end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orbit {
    pub points: Vec<Elem>,
    pub cyclic: bool,
}

impl Orbit {
    pub fn open(points: Vec<Elem>) -> Self {
        Orbit { points, cyclic: false }
    }

    /// Index of the last point, so `points[n()]` is `xₙ`.
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    /// Number of distinct points.
    pub fn length(&self) -> usize {
        if self.cyclic {
            self.points.len() - 1
        } else {
            self.points.len()
        }
    }

    pub fn first(&self) -> Elem {
        self.points[0]
    }

    pub fn last(&self) -> Elem {
        *self.points.last().unwrap()
    }

    pub fn labels(&self, t: &MeetTree) -> Vec<String> {
        self.points.iter().map(|&e| t.label(e).to_string()).collect()
    }

    /// The consecutive-step map of the orbit.
    pub fn steps(&self) -> Vec<(Elem, Elem)> {
        self.points.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitKind {
    Cycle,
    AscendingSpiral,
    DescendingSpiral,
    AscendingComb,
    DescendingComb,
    QuasiCycle,
}

impl OrbitKind {
    pub fn name(self) -> &'static str {
        match self {
            OrbitKind::Cycle => "cycle",
            OrbitKind::AscendingSpiral => "ascending-spiral",
            OrbitKind::DescendingSpiral => "descending-spiral",
            OrbitKind::AscendingComb => "ascending-comb",
            OrbitKind::DescendingComb => "descending-comb",
            OrbitKind::QuasiCycle => "quasi-cycle",
        }
    }

    /// Swaps ascending and descending.
    pub fn reversed(self) -> Self {
        match self {
            OrbitKind::AscendingSpiral => OrbitKind::DescendingSpiral,
            OrbitKind::DescendingSpiral => OrbitKind::AscendingSpiral,
            OrbitKind::AscendingComb => OrbitKind::DescendingComb,
            OrbitKind::DescendingComb => OrbitKind::AscendingComb,
            k => k,
        }
    }

    pub fn is_spiral(self) -> bool {
        matches!(self, OrbitKind::AscendingSpiral | OrbitKind::DescendingSpiral)
    }

    pub fn is_comb(self) -> bool {
        matches!(self, OrbitKind::AscendingComb | OrbitKind::DescendingComb)
    }
}

/// Kind plus parameter: period, spiral length or pseudo-period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrbitClass {
    pub kind: OrbitKind,
    pub parameter: usize,
}

/// Whether `i ↦ i+1` along `points` is a partial automorphism.
pub fn is_partial_orbit(t: &MeetTree, points: &[Elem]) -> bool {
    let steps: Vec<(Elem, Elem)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    validate_pauto(t, &steps).is_ok()
}

/// Smallest `u > 0` at which `x₀ ∧ x_u` is highest among `x₀ ∧ xᵢ`, `i > 0`.
pub fn pseudo_period(t: &MeetTree, points: &[Elem]) -> usize {
    assert!(points.len() >= 2, "pseudo-period needs at least two points");
    let e0 = points[0];
    let mut best = 1;
    for i in 2..points.len() {
        if t.depth(t.meet(e0, points[i])) > t.depth(t.meet(e0, points[best])) {
            best = i;
        }
    }
    best
}

/// Minimal `k ≥ 1` with `xₖ` comparable to `x₀`, and the direction.
pub fn spiral_witness(t: &MeetTree, points: &[Elem]) -> Option<(usize, bool)> {
    let e0 = points[0];
    (1..points.len()).find(|&k| t.comparable(points[k], e0)).map(|k| (k, t.lt(e0, points[k])))
}

/// Minimal `k` with `2k ≤ n` and `x₂ₖ ∧ xₖ ≠ xₖ ∧ x₀`, and whether the former is higher.
pub fn comb_witness(t: &MeetTree, points: &[Elem]) -> Option<(usize, bool)> {
    let n = points.len() - 1;
    (1..=n / 2).find_map(|k| {
        let upper = t.meet(points[2 * k], points[k]);
        let lower = t.meet(points[k], points[0]);
        (upper != lower).then(|| (k, t.lt(lower, upper)))
    })
}

/// Classifies by the first matching clause: cycle, spiral, comb, quasi-cycle.
pub fn classify_orbit(t: &MeetTree, o: &Orbit) -> OrbitClass {
    if o.cyclic {
        return OrbitClass { kind: OrbitKind::Cycle, parameter: o.points.len() - 1 };
    }
    classify_points(t, &o.points)
}

/// [`classify_orbit`] on a bare sequence; a repeat of the first point marks a cycle.
pub fn classify_points(t: &MeetTree, points: &[Elem]) -> OrbitClass {
    if let Some(k) = (1..points.len()).find(|&k| points[k] == points[0]) {
        return OrbitClass { kind: OrbitKind::Cycle, parameter: k };
    }
    if let Some((k, up)) = spiral_witness(t, points) {
        let kind = if up { OrbitKind::AscendingSpiral } else { OrbitKind::DescendingSpiral };
        return OrbitClass { kind, parameter: k };
    }
    if let Some((k, up)) = comb_witness(t, points) {
        let kind = if up { OrbitKind::AscendingComb } else { OrbitKind::DescendingComb };
        return OrbitClass { kind, parameter: k };
    }
    OrbitClass { kind: OrbitKind::QuasiCycle, parameter: pseudo_period(t, points) }
}

pub fn time_reverse(o: &Orbit) -> Orbit {
    let mut points = o.points.clone();
    points.reverse();
    Orbit { points, cyclic: o.cyclic }
}

/// Splits the support of `p` into maximal orbits, sorted by their label sequences.
pub fn orbit_decomposition(p: &PartialAutomorphism) -> Vec<Orbit> {
    let t = p.tree();
    let mut visited = vec![false; t.len()];
    let mut out = Vec::new();
    for start in p.dom().into_iter().filter(|&x| p.preimage(x).is_none()) {
        let mut points = vec![start];
        visited[start] = true;
        let mut cur = start;
        while let Some(next) = p.get(cur) {
            points.push(next);
            visited[next] = true;
            cur = next;
        }
        out.push(Orbit::open(points));
    }
    for x in p.dom() {
        if visited[x] {
            continue;
        }
        let mut cycle = vec![x];
        let mut cur = p.get(x).unwrap();
        while cur != x {
            cycle.push(cur);
            cur = p.get(cur).unwrap();
        }
        for &c in &cycle {
            visited[c] = true;
        }
        let start = (0..cycle.len()).min_by_key(|&i| t.label(cycle[i])).unwrap();
        cycle.rotate_left(start);
        cycle.push(cycle[0]);
        out.push(Orbit { points: cycle, cyclic: true });
    }
    out.sort_by_cached_key(|o| o.labels(t));
    out
}

/// The orbit containing `x`, if `x` is in the support.
pub fn orbit_of(p: &PartialAutomorphism, x: Elem) -> Option<Orbit> {
    orbit_decomposition(p).into_iter().find(|o| o.points.contains(&x))
}

/// Domain points outside the range, plus every point of a cyclic orbit.
pub fn initial_points(p: &PartialAutomorphism) -> Vec<Elem> {
    let mut out: Vec<Elem> = p.dom().into_iter().filter(|&x| p.preimage(x).is_none()).collect();
    for o in orbit_decomposition(p).into_iter().filter(|o| o.cyclic) {
        out.extend_from_slice(&o.points[..o.points.len() - 1]);
    }
    out.sort_unstable();
    out
}

/// The shortest non-cyclic orbit, ties broken by label sequence.
pub fn shortest_open_orbit(p: &PartialAutomorphism) -> Option<Orbit> {
    let t = p.tree();
    orbit_decomposition(p)
        .into_iter()
        .filter(|o| !o.cyclic)
        .min_by(|a, b| a.length().cmp(&b.length()).then_with(|| a.labels(t).cmp(&b.labels(t))))
}

/// Every valid `p ∪ {(endpoint, v)}` with `v` ranging over all 1-types over the
/// tree of `p`, paired with the type of `v`.
pub fn one_step_extensions(p: &PartialAutomorphism, endpoint: Elem) -> Vec<(PartialAutomorphism, OneType)> {
    let t = p.tree();
    let mut out = Vec::new();
    for (slot, strict) in enumerate_slots(t) {
        if let (Slot::At(m), false) = (slot, strict) {
            if p.preimage(m).is_some() {
                continue;
            }
        }
        let ext = realize_slot(t, slot, strict);
        if let Ok(q) = p.with_pair(&ext.tree, endpoint, ext.new_point) {
            out.push((q, descriptor_over_all(t, slot, strict)));
        }
    }
    out
}

/// One-point extensions at the end of the shortest non-cyclic orbit of the core of `p`.
pub fn immediate_extensions(p: &PartialAutomorphism) -> Result<Vec<(PartialAutomorphism, OneType)>, Error> {
    let core = p.core();
    let orbit = shortest_open_orbit(&core).ok_or(Error::NoNonCyclicOrbit)?;
    Ok(one_step_extensions(&core, orbit.last()))
}

/// `f ∪ g` when every point of `dom f` has a witness `a ≥ x` in `dom g` below
/// which `g` agrees with `f`.
pub fn linear_union(
    f: &PartialAutomorphism,
    g: &PartialAutomorphism,
    witness: impl Fn(Elem) -> Option<Elem>,
) -> Result<PartialAutomorphism, Error> {
    let t = f.tree();
    if t != g.tree() {
        return Err(Error::Precondition("maps live on different trees".into()));
    }
    let l = |e: Elem| t.label(e).to_string();
    for (name, m) in [("f", f), ("g", g)] {
        if !t.is_meet_closed(&m.dom()) {
            return Err(Error::Precondition(format!("domain of {name} is not closed under meets")));
        }
    }
    for x in f.dom() {
        let a = witness(x).ok_or_else(|| Error::Precondition(format!("no witness for {}", l(x))))?;
        if g.get(a).is_none() || !t.leq(x, a) {
            return Err(Error::Precondition(format!("witness {} for {} is not above it in dom g", l(a), l(x))));
        }
        for x in g.dom().into_iter().filter(|&x| t.leq(x, a)) {
            if f.get(x) != g.get(x) {
                return Err(Error::Precondition(format!("g below {} disagrees with f at {}", l(a), l(x))));
            }
        }
    }
    let mut pairs = f.pairs();
    pairs.extend(g.pairs());
    pairs.sort_unstable();
    pairs.dedup();
    Ok(validate_pauto(t, &pairs)?)
}

/// Orbit report grouped for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub points: Vec<String>,
    pub class: OrbitKind,
    pub parameter: usize,
}

pub fn orbit_reports(p: &PartialAutomorphism) -> Vec<OrbitReport> {
    let t = p.tree();
    orbit_decomposition(p)
        .into_iter()
        .map(|o| {
            let c = classify_orbit(t, &o);
            OrbitReport { points: o.labels(t), class: c.kind, parameter: c.parameter }
        })
        .collect()
}

/// Groups a map's pairs by label for quick lookups in tests and reports.
pub fn label_map(p: &PartialAutomorphism) -> BTreeMap<String, String> {
    p.label_pairs().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::tree::enumerate_trees;

    fn fork() -> MeetTree {
        MeetTree::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap()
    }

    fn lbl(t: &MeetTree, o: &Orbit) -> Vec<String> {
        o.labels(t)
    }

    #[test]
    fn fork_swap_is_valid_and_fixes_root() {
        let t = fork();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        assert_eq!(p.closure_get(0), None);
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b"), ("b", "a")]).unwrap();
        assert_eq!(p.closure_get(0), Some(0));
    }

    #[test]
    fn chain_swap_violates_order() {
        let t = MeetTree::from_edges(&["a", "b"], &[("a", "b")]).unwrap();
        let err = PartialAutomorphism::from_labels(&t, &[("a", "b"), ("b", "a")]).unwrap_err();
        assert!(matches!(err, Error::Invalid(PautoViolation::OrderViolation { .. })));
    }

    #[test]
    fn star_transposition_with_fixed_points() {
        let t = MeetTree::from_edges(&["r", "a", "b", "c"], &[("r", "a"), ("r", "b"), ("r", "c")]).unwrap();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b"), ("b", "a"), ("c", "c"), ("r", "r")]).unwrap();
        let orbits = orbit_decomposition(&p);
        assert_eq!(orbits.len(), 3);
        assert!(orbits.iter().all(|o| o.cyclic));
    }

    #[test]
    fn meet_clash_is_reported() {
        // r is fixed and a, b meet at r, but their images meet at x above r.
        let t = MeetTree::from_edges(
            &["r", "x", "a", "b", "c", "d"],
            &[("r", "x"), ("r", "a"), ("r", "b"), ("x", "c"), ("x", "d")],
        )
        .unwrap();
        let err = PartialAutomorphism::from_labels(&t, &[("r", "r"), ("a", "c"), ("b", "d")]).unwrap_err();
        assert!(matches!(err, Error::Invalid(PautoViolation::MeetImageMismatch { .. })), "{err:?}");
    }

    #[test]
    fn decomposition_examples() {
        let t = MeetTree::from_edges(&["b", "a"], &[("b", "a")]).unwrap();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        let o = orbit_decomposition(&p);
        assert_eq!(o.len(), 1);
        assert_eq!(lbl(&t, &o[0]), vec!["a", "b"]);
        assert!(!o[0].cyclic);
        assert_eq!(initial_points(&p), vec![1]);

        let t = MeetTree::point("a");
        let p = PartialAutomorphism::from_labels(&t, &[("a", "a")]).unwrap();
        let o = orbit_decomposition(&p);
        assert_eq!(o, vec![Orbit { points: vec![0, 0], cyclic: true }]);
        assert_eq!(classify_orbit(&t, &o[0]), OrbitClass { kind: OrbitKind::Cycle, parameter: 1 });
        assert_eq!(initial_points(&p), vec![0]);
    }

    #[test]
    fn ascending_two_spiral() {
        let t = MeetTree::from_edges(&["r", "e0", "e1", "e2"], &[("r", "e0"), ("r", "e1"), ("e0", "e2")]).unwrap();
        let o = Orbit::open(vec![1, 2, 3]);
        assert!(is_partial_orbit(&t, &o.points));
        assert_eq!(classify_orbit(&t, &o), OrbitClass { kind: OrbitKind::AscendingSpiral, parameter: 2 });
        let r = time_reverse(&o);
        assert_eq!(classify_orbit(&t, &r), OrbitClass { kind: OrbitKind::DescendingSpiral, parameter: 2 });
    }

    #[test]
    fn pseudo_period_examples() {
        let t = fork();
        assert_eq!(pseudo_period(&t, &[1, 2]), 1);
        // A 2-cycle listed with its closing repeat peaks at the repeat.
        assert_eq!(pseudo_period(&t, &[1, 2, 1]), 2);
    }

    #[test]
    fn descending_edge_has_one_immediate_extension() {
        let t = MeetTree::from_edges(&["b", "a"], &[("b", "a")]).unwrap();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        let ext = immediate_extensions(&p).unwrap();
        assert_eq!(ext.len(), 1);
        let (q, ty) = &ext[0];
        assert_eq!(ty.realized_at, None);
        assert!(!ty.strict_above);
        let new = q.get(q.tree().index_of("b").unwrap()).unwrap();
        assert!(q.tree().lt(new, q.tree().index_of("b").unwrap()));
    }

    #[test]
    fn incomparable_edge_has_several_extensions() {
        let t = fork();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        assert!(immediate_extensions(&p).unwrap().len() >= 2);
    }

    #[test]
    fn cycles_have_no_immediate_extension() {
        let t = fork();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b"), ("b", "a")]).unwrap();
        assert_eq!(immediate_extensions(&p).unwrap_err(), Error::NoNonCyclicOrbit);
    }

    #[test]
    fn linear_union_examples() {
        let t = MeetTree::from_edges(&["c", "b", "a", "s"], &[("c", "b"), ("b", "a"), ("b", "s")]).unwrap();
        let f = PartialAutomorphism::from_labels(&t, &[("c", "c")]).unwrap();
        let same = linear_union(&f, &f, Some).unwrap();
        assert_eq!(same, f);

        let f = PartialAutomorphism::from_labels(&t, &[("b", "b"), ("c", "c")]).unwrap();
        let g = PartialAutomorphism::from_labels(&t, &[("a", "s"), ("b", "b"), ("c", "c")]).unwrap();
        let u = linear_union(&f, &g, |_| Some(1)).unwrap();
        assert_eq!(u.len(), 3);

        let f2 = PartialAutomorphism::from_labels(&t, &[("c", "c"), ("b", "b")]).unwrap();
        let g2 = PartialAutomorphism::from_labels(&t, &[("c", "c"), ("b", "b"), ("a", "a")]).unwrap();
        let bad = PartialAutomorphism::from_labels(&t, &[("a", "s"), ("b", "b"), ("c", "c")]).unwrap();
        assert!(linear_union(&bad, &g2, |_| Some(2)).is_err());
        assert!(linear_union(&f2, &g2, |_| Some(1)).is_ok());
    }

    /// Brute force: does some isomorphism between the generated substructures extend `pairs`?
    fn oracle(t: &MeetTree, pairs: &[(Elem, Elem)]) -> bool {
        let mut f: BTreeMap<Elem, Elem> = BTreeMap::new();
        for &(x, y) in pairs {
            if f.insert(x, y).is_some_and(|old| old != y) {
                return false;
            }
        }
        if f.is_empty() {
            return true;
        }
        let dom: Vec<Elem> = f.keys().copied().collect();
        let ran: Vec<Elem> = f.values().copied().collect();
        let d = meet_closure(t, &dom);
        let r = meet_closure(t, &ran);
        if d.len() != r.len() {
            return false;
        }
        fn go(t: &MeetTree, d: &[Elem], r: &[Elem], f: &BTreeMap<Elem, Elem>, cur: &mut Vec<Elem>) -> bool {
            let i = cur.len();
            if i == d.len() {
                return (0..d.len()).all(|a| {
                    (0..d.len()).all(|b| {
                        let m = d.iter().position(|&x| x == t.meet(d[a], d[b])).unwrap();
                        t.leq(d[a], d[b]) == t.leq(cur[a], cur[b]) && cur[m] == t.meet(cur[a], cur[b])
                    })
                });
            }
            for &y in r {
                if cur.contains(&y) || f.get(&d[i]).is_some_and(|&fy| fy != y) {
                    continue;
                }
                cur.push(y);
                if go(t, d, r, f, cur) {
                    return true;
                }
                cur.pop();
            }
            false
        }
        go(t, &d, &r, &f, &mut Vec::new())
    }

    #[test]
    fn validation_matches_isomorphism_oracle() {
        let b = Budget::unlimited();
        for t in enumerate_trees(5, &b).unwrap() {
            let n = t.len();
            let mut maps: Vec<Vec<(Elem, Elem)>> = vec![vec![]];
            for _ in 0..3 {
                let mut next = Vec::new();
                for m in &maps {
                    let start = m.last().map_or(0, |&(x, _)| x + 1);
                    for x in start..n {
                        for y in 0..n {
                            let mut m2 = m.clone();
                            m2.push((x, y));
                            next.push(m2);
                        }
                    }
                }
                maps.extend(next.iter().cloned());
                maps = maps.into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
            }
            for m in maps {
                assert_eq!(validate_pauto(&t, &m).is_ok(), oracle(&t, &m), "{t:?} {m:?}");
            }
        }
    }

    #[test]
    fn core_drops_unrelated_elements() {
        let t = MeetTree::from_edges(&["r", "a", "b", "c"], &[("r", "a"), ("r", "b"), ("r", "c")]).unwrap();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        let c = p.core();
        assert_eq!(c.tree().len(), 3);
        assert!(c.tree().index_of("c").is_none());
        assert!(c.is_core());
    }
}
