//! Pairs of partial automorphisms of a dense linear order with no common
//! generic extension, and their lift to a branch of a meet-tree.
//!
//! The line is modelled by exact fractions; density and the missing lower
//! bound are used only through midpoints and `x - 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_rational::Rational64;
use serde::Serialize;

use crate::error::Error;
use crate::pauto::{linear_union, validate_pauto, PartialAutomorphism};
use crate::tree::{Elem, MeetTree};

pub type Q = Rational64;

/// A finite order-preserving injection between rationals.
pub type LinearMap = BTreeMap<Q, Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn is_linear_pauto(g: &LinearMap) -> bool {
    g.values().zip(g.values().skip(1)).all(|(x, y)| x < y)
}

pub fn inverse(g: &LinearMap) -> LinearMap {
    g.iter().map(|(&x, &y)| (y, x)).collect()
}

fn midpoint(x: Q, y: Q) -> Q {
    (x + y) / q(2)
}

/// A point strictly between `lo` and `hi`, either of which may be missing.
fn between(lo: Option<Q>, hi: Option<Q>) -> Q {
    match (lo, hi) {
        (Some(l), Some(h)) => midpoint(l, h),
        (None, Some(h)) => h - q(1),
        (Some(l), None) => l + q(1),
        (None, None) => q(0),
    }
}

/// An image for `x ∉ dom(g)` keeping `g` order preserving.
fn image_slot(g: &LinearMap, x: Q) -> Q {
    if g.is_empty() {
        return x - q(1);
    }
    let lo = g.range(..x).next_back().map(|(_, &y)| y);
    let hi = g.range(x..).next().map(|(_, &y)| y);
    between(lo, hi)
}

/// A preimage for `y ∉ range(g)`.
fn preimage_slot(g: &LinearMap, y: Q) -> Q {
    image_slot(&inverse(g), y)
}

/// Extends `g` by `d1 ↦ b` and `b ↦ d2`, given `b ≤ g(a) ≤ a`. Both new points
/// end up at or below `a`.
pub fn extend_linear_both_ways(g: &LinearMap, a: Q, b: Q) -> Result<(Q, Q, LinearMap), Error> {
    let ga = *g.get(&a).ok_or_else(|| Error::Precondition("a is not in the domain".into()))?;
    if !(b <= ga && ga <= a) || !is_linear_pauto(g) {
        return Err(Error::Precondition("need b ≤ g(a) ≤ a".into()));
    }
    let mut h = g.clone();
    let d2 = *h.entry(b).or_insert_with(|| image_slot(g, b));
    let d1 = match h.iter().find(|(_, &y)| y == b) {
        Some((&x, _)) => x,
        None => {
            let x = preimage_slot(&h, b);
            h.insert(x, b);
            x
        }
    };
    debug_assert!(is_linear_pauto(&h) && d1 <= a && d2 <= a);
    Ok((d1, d2, h))
}

/// Number of domain points plus number of range points at or below `b0`.
pub fn cost(b0: Q, g: &LinearMap) -> usize {
    g.range(..=b0).count() + g.values().filter(|&&y| y <= b0).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gen {
    G1,
    G2,
    G1Inv,
    G2Inv,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::G1, Gen::G2, Gen::G1Inv, Gen::G2Inv];

    pub fn inverse(self) -> Gen {
        match self {
            Gen::G1 => Gen::G1Inv,
            Gen::G2 => Gen::G2Inv,
            Gen::G1Inv => Gen::G1,
            Gen::G2Inv => Gen::G2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gen::G1 => "g1",
            Gen::G2 => "g2",
            Gen::G1Inv => "g1^-1",
            Gen::G2Inv => "g2^-1",
        }
    }
}

/// Two partial automorphisms of the line and a common domain point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearPair {
    pub g1: LinearMap,
    pub g2: LinearMap,
    pub anchor: Q,
}

impl LinearPair {
    pub fn apply(&self, g: Gen, x: Q) -> Option<Q> {
        let find_pre = |m: &LinearMap| m.iter().find(|(_, &y)| y == x).map(|(&k, _)| k);
        match g {
            Gen::G1 => self.g1.get(&x).copied(),
            Gen::G2 => self.g2.get(&x).copied(),
            Gen::G1Inv => find_pre(&self.g1),
            Gen::G2Inv => find_pre(&self.g2),
        }
    }

    fn inverted(&self) -> LinearPair {
        LinearPair { g1: inverse(&self.g1), g2: inverse(&self.g2), anchor: self.anchor }
    }

    /// Domain and range points of both maps.
    pub fn support(&self) -> BTreeSet<Q> {
        self.g1.iter().chain(&self.g2).flat_map(|(&x, &y)| [x, y]).collect()
    }

    fn check(&self) -> Result<(), Error> {
        if !is_linear_pauto(&self.g1) || !is_linear_pauto(&self.g2) {
            return Err(Error::Precondition("maps must be order preserving".into()));
        }
        Ok(())
    }

    /// Breadth-first over the four generators: every point reachable from the
    /// anchor, with a shortest word reaching it.
    fn orbit_words(&self) -> BTreeMap<Q, Vec<Gen>> {
        let mut words = BTreeMap::from([(self.anchor, Vec::new())]);
        let mut queue = VecDeque::from([self.anchor]);
        while let Some(x) = queue.pop_front() {
            for g in Gen::ALL {
                if let Some(y) = self.apply(g, x) {
                    if !words.contains_key(&y) {
                        let mut w = words[&x].clone();
                        w.push(g);
                        words.insert(y, w);
                        queue.push_back(y);
                    }
                }
            }
        }
        words
    }

    fn c_m(&self) -> usize {
        let m = orbit_minimum(self);
        cost(m, &self.g1) + cost(m, &self.g2)
    }
}

/// Least point of the anchor's orbit under both maps and their inverses.
pub fn orbit_minimum(p: &LinearPair) -> Q {
    *p.orbit_words().keys().next().unwrap()
}

/// Which of the four point sets contain `x`, in the order dom g1, dom g2,
/// range g1, range g2.
pub fn memberships(p: &LinearPair, x: Q) -> [bool; 4] {
    [
        p.g1.contains_key(&x),
        p.g2.contains_key(&x),
        p.g1.values().any(|&y| y == x),
        p.g2.values().any(|&y| y == x),
    ]
}

/// One reduction step of [`minimize_pair`].
#[derive(Debug, Clone, Serialize)]
pub struct Reduction {
    pub map: Gen,
    pub from: String,
    pub to: String,
    pub cost_before: usize,
    pub cost_after: usize,
}

/// Extends the pair one point at a time at the orbit minimum while that lowers
/// the combined cost at the minimum. The result has its orbit minimum in exactly
/// one of the two domains and two ranges.
pub fn minimize_pair(p: &LinearPair) -> Result<(LinearPair, Vec<Reduction>), Error> {
    p.check()?;
    for g in [&p.g1, &p.g2] {
        match g.get(&p.anchor) {
            Some(&y) if y < p.anchor => {}
            _ => return Err(Error::Precondition("both maps must send the anchor strictly down".into())),
        }
    }
    let mut cur = p.clone();
    let mut log = Vec::new();
    let cap = cur.c_m();
    for _ in 0..=cap {
        let c = orbit_minimum(&cur);
        let before = cur.c_m();
        let mut best: Option<(usize, LinearPair, Reduction)> = None;
        for g in Gen::ALL {
            let mut next = cur.clone();
            let (map, x, y) = match g {
                Gen::G1 | Gen::G2 => {
                    let m = if g == Gen::G1 { &mut next.g1 } else { &mut next.g2 };
                    if m.contains_key(&c) {
                        continue;
                    }
                    let d = image_slot(m, c);
                    m.insert(c, d);
                    (g, c, d)
                }
                Gen::G1Inv | Gen::G2Inv => {
                    let m = if g == Gen::G1Inv { &mut next.g1 } else { &mut next.g2 };
                    if m.values().any(|&y| y == c) {
                        continue;
                    }
                    let d = preimage_slot(m, c);
                    m.insert(d, c);
                    (g.inverse(), d, c)
                }
            };
            let after = next.c_m();
            if after < before && best.as_ref().is_none_or(|(b, _, _)| after < *b) {
                let r = Reduction { map, from: x.to_string(), to: y.to_string(), cost_before: before, cost_after: after };
                best = Some((after, next, r));
            }
        }
        match best {
            Some((_, next, r)) => {
                cur = next;
                log.push(r);
            }
            None => {
                let c = orbit_minimum(&cur);
                let hits = memberships(&cur, c).iter().filter(|&&b| b).count();
                if hits != 1 {
                    return Err(Error::NotFound(format!("locally minimal pair has its minimum {c} in {hits} point sets")));
                }
                return Ok((cur, log));
            }
        }
    }
    Err(Error::IterationCap { rounds: cap + 1 })
}

/// A finite certificate that two pairs have no common extension fixing the
/// anchor: follow `word` from the anchor, then compare one more step against
/// the point reached. Both pairs define every step, and the comparison comes
/// out differently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistinguishingWord {
    pub word: Vec<Gen>,
    /// The atom reads `step(w(a)) > w(a)`.
    pub step: Gen,
}

/// One pair's run through a [`DistinguishingWord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evaluation<P> {
    pub path: Vec<P>,
    pub stepped: P,
    pub holds: bool,
}

impl DistinguishingWord {
    pub fn len(&self) -> usize {
        self.word.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Runs the word with a generic step function and strict order.
    pub fn evaluate<P: Copy>(
        &self,
        anchor: P,
        apply: impl Fn(Gen, P) -> Option<P>,
        greater: impl Fn(P, P) -> bool,
    ) -> Option<Evaluation<P>> {
        let mut path = vec![anchor];
        for &g in &self.word {
            path.push(apply(g, *path.last().unwrap())?);
        }
        let end = *path.last().unwrap();
        let stepped = apply(self.step, end)?;
        Some(Evaluation { path, stepped, holds: greater(stepped, end) })
    }

    pub fn evaluate_linear(&self, p: &LinearPair) -> Option<Evaluation<Q>> {
        self.evaluate(p.anchor, |g, x| p.apply(g, x), |x, y| x > y)
    }

    pub fn describe(&self) -> String {
        let w: Vec<&str> = self.word.iter().rev().map(|g| g.name()).collect();
        let w = if w.is_empty() { "a".to_string() } else { format!("{}(a)", w.join(" ")) };
        format!("{}({w}) > {w}", self.step.name())
    }
}

/// The two extensions of a pair and the word separating them.
#[derive(Debug, Clone)]
pub struct Irreconcilable {
    pub minimal: LinearPair,
    pub reductions: Vec<Reduction>,
    pub upper: LinearPair,
    pub lower: LinearPair,
    pub word: DistinguishingWord,
}

/// Minimizes the pair, then sends the orbit minimum `c` just above itself in
/// one extension and just below in the other, using the map that misses `c`.
pub fn irreconcilable_extensions(p: &LinearPair) -> Result<Irreconcilable, Error> {
    let (minimal, reductions) = minimize_pair(p)?;
    let c = orbit_minimum(&minimal);
    let member = memberships(&minimal, c);
    // Points sitting in a domain are handled on the inverted pair, where they
    // sit in a range instead.
    let flip = member[0] || member[1];
    let work = if flip { minimal.inverted() } else { minimal.clone() };
    let in_range_of_first = if flip { member[0] } else { member[2] };
    let support = work.support();
    let above = support.range((std::ops::Bound::Excluded(c), std::ops::Bound::Unbounded)).next().copied();
    let below = support.range(..c).next_back().copied();
    let c_plus = midpoint(c, above.ok_or_else(|| Error::Precondition("orbit minimum has nothing above it".into()))?);
    let c_minus = between(below, Some(c));
    let extend = |img: Q| {
        let mut w = work.clone();
        let m = if in_range_of_first { &mut w.g2 } else { &mut w.g1 };
        m.insert(c, img);
        if flip {
            w = w.inverted();
        }
        w
    };
    let (upper, lower) = (extend(c_plus), extend(c_minus));
    for side in [&upper, &lower] {
        if side.check().is_err() {
            return Err(Error::NotFound(format!("extension at {c} does not preserve the order")));
        }
    }
    let mut word = work.orbit_words()[&c].clone();
    let mut step = if in_range_of_first { Gen::G2 } else { Gen::G1 };
    if flip {
        word = word.into_iter().map(Gen::inverse).collect();
        step = step.inverse();
    }
    let word = DistinguishingWord { word, step };
    let (eu, el) = (word.evaluate_linear(&upper), word.evaluate_linear(&lower));
    match (eu, el) {
        (Some(u), Some(l)) if u.holds != l.holds => {}
        _ => return Err(Error::NotFound("word does not separate the extensions".into())),
    }
    Ok(Irreconcilable { minimal, reductions, upper, lower, word })
}

/// The seed pair `g1 = g2 = {0 ↦ -1}` anchored at 0.
pub fn seed_pair() -> LinearPair {
    let g = LinearMap::from([(q(0), q(-1))]);
    LinearPair { g1: g.clone(), g2: g, anchor: q(0) }
}

/// A common extension found by [`common_extension`]: the chain size and where
/// each pair's support lands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonExtension {
    pub size: usize,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub max_size: usize,
    pub placements: u64,
    pub found: Option<CommonExtension>,
}

/// All increasing maps from `k` points into `0..n`.
fn placements(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            go(k, n, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Searches finite chains of up to `max_size` points for partial
/// automorphisms `f1, f2` and embeddings of both pairs that agree on the
/// anchor and carry `gi` into `fi`.
pub fn common_extension(x: &LinearPair, y: &LinearPair, max_size: usize) -> OracleReport {
    let point_set = |p: &LinearPair| {
        let mut s = p.support();
        s.insert(p.anchor);
        s.into_iter().collect::<Vec<Q>>()
    };
    let (px, py) = (point_set(x), point_set(y));
    let (ax, ay) = (px.iter().position(|&v| v == x.anchor).unwrap(), py.iter().position(|&v| v == y.anchor).unwrap());
    let mut count = 0u64;
    for n in px.len().max(py.len())..=max_size {
        let (ex, ey) = (placements(px.len(), n), placements(py.len(), n));
        for e1 in &ex {
            for e2 in ey.iter().filter(|e2| e2[ay] == e1[ax]) {
                count += 1;
                let joint = |gx: &LinearMap, gy: &LinearMap| -> Option<BTreeMap<usize, usize>> {
                    let mut f: BTreeMap<usize, usize> = BTreeMap::new();
                    let pos = |pts: &[Q], v: &Q| pts.iter().position(|w| w == v).unwrap();
                    let images = gx
                        .iter()
                        .map(|(s, t)| (e1[pos(&px, s)], e1[pos(&px, t)]))
                        .chain(gy.iter().map(|(s, t)| (e2[pos(&py, s)], e2[pos(&py, t)])));
                    for (s, t) in images {
                        if *f.entry(s).or_insert(t) != t {
                            return None;
                        }
                    }
                    f.values().zip(f.values().skip(1)).all(|(a, b)| a < b).then_some(f)
                };
                if joint(&x.g1, &y.g1).is_some() && joint(&x.g2, &y.g2).is_some() {
                    return OracleReport {
                        max_size,
                        placements: count,
                        found: Some(CommonExtension { size: n, first: e1.clone(), second: e2.clone() }),
                    };
                }
            }
        }
    }
    OracleReport { max_size, placements: count, found: None }
}

/// Two partial automorphisms of a tree and a common domain point.
#[derive(Debug, Clone)]
pub struct TreePair {
    pub g1: PartialAutomorphism,
    pub g2: PartialAutomorphism,
    pub anchor: Elem,
}

impl TreePair {
    pub fn apply(&self, g: Gen, x: Elem) -> Option<Elem> {
        match g {
            Gen::G1 => self.g1.get(x),
            Gen::G2 => self.g2.get(x),
            Gen::G1Inv => self.g1.preimage(x),
            Gen::G2Inv => self.g2.preimage(x),
        }
    }

    pub fn evaluate(&self, w: &DistinguishingWord) -> Option<Evaluation<Elem>> {
        let t = self.g1.tree();
        w.evaluate(self.anchor, |g, x| self.apply(g, x), |x, y| t.lt(y, x))
    }
}

#[derive(Debug, Clone)]
pub struct TreeLift {
    pub tree: MeetTree,
    pub upper: TreePair,
    pub lower: TreePair,
    pub word: DistinguishingWord,
    pub linear: Irreconcilable,
}

/// Runs the linear construction on the chain below `a` and unions the result
/// with the given maps. Points the construction adds are inserted into that
/// chain; side branches keep their attachment points.
pub fn lift_to_tree(p1: &PartialAutomorphism, p2: &PartialAutomorphism, a: Elem) -> Result<TreeLift, Error> {
    let t = p1.tree();
    if t != p2.tree() {
        return Err(Error::Precondition("maps live on different trees".into()));
    }
    match (p1.get(a), p2.get(a)) {
        (Some(x), Some(y)) if x == y && t.lt(x, a) => {}
        _ => return Err(Error::Precondition("need p1(a) = p2(a) < a".into())),
    }
    let chain = t.chain_below(a);
    let pos: HashMap<Elem, Q> = chain.iter().enumerate().map(|(i, &e)| (e, q(i as i64))).collect();
    let restrict = |p: &PartialAutomorphism| -> LinearMap {
        p.pairs().into_iter().filter(|(x, _)| pos.contains_key(x)).map(|(x, y)| (pos[&x], pos[&y])).collect()
    };
    let linear = irreconcilable_extensions(&LinearPair { g1: restrict(p1), g2: restrict(p2), anchor: pos[&a] })?;

    let mut tree = t.clone();
    let mut at: BTreeMap<Q, Elem> = pos.iter().map(|(&e, &v)| (v, e)).collect();
    let fresh: BTreeSet<Q> = linear.upper.support().union(&linear.lower.support()).copied().filter(|v| !at.contains_key(v)).collect();
    for v in fresh {
        let succ = *at.range(v..).next().expect("new points lie below the anchor").1;
        let (t2, e) = tree.with_inserted_below(succ, tree.fresh_label("n"));
        tree = t2;
        at.insert(v, e);
    }
    let lift = |lp: &LinearPair| -> Result<TreePair, Error> {
        let mut out = Vec::new();
        for (lin, p) in [(&lp.g1, p1), (&lp.g2, p2)] {
            let pairs: Vec<(Elem, Elem)> = lin.iter().map(|(x, y)| (at[x], at[y])).collect();
            let f = validate_pauto(&tree, &pairs)?;
            let g = p.on_tree(&tree);
            out.push(linear_union(&f, &g, |_| Some(a))?);
        }
        let g2 = out.pop().unwrap();
        let g1 = out.pop().unwrap();
        Ok(TreePair { g1, g2, anchor: a })
    };
    let (upper, lower) = (lift(&linear.upper)?, lift(&linear.lower)?);
    match (upper.evaluate(&linear.word), lower.evaluate(&linear.word)) {
        (Some(u), Some(l)) if u.holds != l.holds => {}
        _ => return Err(Error::NotFound("word does not separate the lifted pairs".into())),
    }
    Ok(TreeLift { tree, upper, lower, word: linear.word.clone(), linear })
}
