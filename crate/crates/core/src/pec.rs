//! Bounded pseudo-existential closedness: checking, closing, and certifying
//! that the shortest open orbit has a unique next type.
//!
//! Every verdict is relative to a search depth `W`: the extensions considered
//! are those reachable from the core of `p` by at most `W` one-point steps at
//! the end of some open orbit, over every 1-type of the current tree.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::Error;
use crate::pauto::{
    classify_orbit, classify_points, initial_points, immediate_extensions, one_step_extensions, orbit_decomposition,
    shortest_open_orbit, OrbitClass, OrbitKind, PartialAutomorphism,
};
use crate::tree::{Elem, MeetTree};
use crate::types::OneType;

/// Label of the isomorphism type of the structure generated by an ordered
/// triple: the `<=` relation among the six terms `x, y, z, x∧y, x∧z, y∧z`,
/// packed row by row into 36 bits.
pub type TripleType = u64;

pub fn triple_type(t: &MeetTree, a: Elem, b: Elem, c: Elem) -> TripleType {
    let terms = [a, b, c, t.meet(a, b), t.meet(a, c), t.meet(b, c)];
    let mut code = 0u64;
    for (i, &x) in terms.iter().enumerate() {
        for (j, &y) in terms.iter().enumerate() {
            if t.leq(x, y) {
                code |= 1 << (i * 6 + j);
            }
        }
    }
    code
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PecWitnessQuery {
    /// Point taken as is in the triple.
    pub anchor: String,
    /// Start of the orbit whose iterate is taken `first_power` times.
    pub first_orbit: String,
    /// Start of the orbit whose iterate is taken `second_power` times.
    pub second_orbit: String,
    pub first_power: usize,
    pub second_power: usize,
    pub triple_type: TripleType,
    /// `(k, first_power mod k)` when the first orbit has a minimal drift step `k`.
    pub residue: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub endpoint: String,
    pub image_type: OneType,
}

#[derive(Debug, Clone)]
pub struct PecCounterexample {
    pub query: PecWitnessQuery,
    /// Witnesses required (1, or 2 with distinct `m1'`) and found.
    pub needed: usize,
    pub found: usize,
    pub trace: Vec<TraceStep>,
    pub extension: PartialAutomorphism,
}

#[derive(Debug, Clone)]
pub enum PecVerdict {
    Pass { depth: usize, explored: usize },
    Fail(Box<PecCounterexample>),
}

impl PecVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, PecVerdict::Pass { .. })
    }
}

/// Forward run of `x` under `p`: `p¹(x), p²(x), …`, stopping when undefined or
/// back at `x`. The flag says whether it came back.
fn forward(p: &PartialAutomorphism, x: Elem) -> (Vec<Elem>, bool) {
    let mut out = Vec::new();
    let mut cur = x;
    while let Some(y) = p.get(cur) {
        out.push(y);
        if y == x {
            return (out, true);
        }
        cur = y;
    }
    (out, false)
}

/// `i`-th iterate (`i ≥ 1`) along a forward run, wrapping around a cycle.
fn iterate(run: &(Vec<Elem>, bool), i: usize) -> Option<Elem> {
    let (pts, cyclic) = run;
    if *cyclic {
        Some(pts[(i - 1) % pts.len()])
    } else {
        pts.get(i - 1).copied()
    }
}

/// Least `k` with `x ∧ xₖ ≠ xₖ ∧ x₂ₖ` along the run starting at `x`.
fn drift_step(t: &MeetTree, x: Elem, run: &(Vec<Elem>, bool)) -> Option<usize> {
    let horizon = if run.1 { run.0.len() } else { run.0.len() / 2 };
    (1..=horizon).find(|&k| {
        let xk = iterate(run, k).unwrap();
        let x2k = iterate(run, 2 * k).unwrap();
        t.meet(x, xk) != t.meet(xk, x2k)
    })
}

struct WitnessTable {
    initial: Vec<Elem>,
    runs: HashMap<Elem, (Vec<Elem>, bool)>,
    seen: HashMap<(Elem, Elem, Elem, TripleType), Vec<usize>>,
}

impl WitnessTable {
    fn build(p: &PartialAutomorphism) -> Self {
        let t = p.tree();
        let initial = initial_points(p);
        let runs: HashMap<Elem, (Vec<Elem>, bool)> = initial.iter().map(|&x| (x, forward(p, x))).collect();
        let mut seen: HashMap<_, Vec<usize>> = HashMap::new();
        for &e in &initial {
            for &m in &initial {
                for &z in &initial {
                    let (rm, rz) = (&runs[&m], &runs[&z]);
                    for i in 1..=rm.0.len() {
                        for j in 1..=rz.0.len() {
                            let tau = triple_type(t, e, rm.0[i - 1], rz.0[j - 1]);
                            let v = seen.entry((e, m, z, tau)).or_default();
                            if v.last() != Some(&i) {
                                v.push(i);
                            }
                        }
                    }
                }
            }
        }
        WitnessTable { initial, runs, seen }
    }

    fn defined_in_p(&self, x: Elem, m: usize) -> bool {
        let r = &self.runs[&x];
        r.1 || m <= r.0.len()
    }

    /// Range of exponents worth checking for `x` in `q`.
    fn horizon(&self, x: Elem, q_run: &(Vec<Elem>, bool)) -> usize {
        match (self.runs[&x].1, q_run.1) {
            (true, _) => self.runs[&x].0.len(),
            (false, true) => self.runs[&x].0.len() + q_run.0.len(),
            (false, false) => q_run.0.len(),
        }
    }

    /// First pattern realized in `q` without enough witnesses in `p`.
    fn first_gap(&self, q: &PartialAutomorphism) -> Option<(PecWitnessQuery, usize, usize)> {
        let t = q.tree();
        let qruns: HashMap<Elem, (Vec<Elem>, bool)> = self.initial.iter().map(|&x| (x, forward(q, x))).collect();
        let drift: HashMap<Elem, Option<usize>> = self.initial.iter().map(|&x| (x, drift_step(t, x, &qruns[&x]))).collect();
        for &e in &self.initial {
            for &m in &self.initial {
                let (qm, k) = (&qruns[&m], drift[&m]);
                for &z in &self.initial {
                    let qz = &qruns[&z];
                    for m1 in 1..=self.horizon(m, qm) {
                        let m1_in_p = self.defined_in_p(m, m1);
                        let x2 = iterate(qm, m1).unwrap();
                        for m2 in 1..=self.horizon(z, qz) {
                            if m1_in_p && self.defined_in_p(z, m2) {
                                continue;
                            }
                            let tau = triple_type(t, e, x2, iterate(qz, m2).unwrap());
                            let needed = if m1_in_p { 1 } else { 2 };
                            let found = self.seen.get(&(e, m, z, tau)).map_or(0, |v| {
                                v.iter().filter(|&&w| k.is_none_or(|k| w % k == m1 % k)).count()
                            });
                            if found < needed {
                                let l = |x: Elem| t.label(x).to_string();
                                let query = PecWitnessQuery {
                                    anchor: l(e),
                                    first_orbit: l(m),
                                    second_orbit: l(z),
                                    first_power: m1,
                                    second_power: m2,
                                    triple_type: tau,
                                    residue: k.map(|k| (k, m1 % k)),
                                };
                                return Some((query, needed, found));
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

#[derive(Clone)]
struct Node {
    q: PartialAutomorphism,
    trace: Vec<TraceStep>,
}

fn children(node: &Node) -> Vec<Node> {
    let t = node.q.tree();
    let mut out = Vec::new();
    for o in orbit_decomposition(&node.q).into_iter().filter(|o| !o.cyclic) {
        let end = o.last();
        for (q, ty) in one_step_extensions(&node.q, end) {
            let mut trace = node.trace.clone();
            trace.push(TraceStep { endpoint: t.label(end).to_string(), image_type: ty });
            out.push(Node { q, trace });
        }
    }
    out
}

/// Checks the witness conditions against every extension of the core of `p`
/// within `depth` steps. The first failure in breadth-first order is reported.
pub fn check_pec(p: &PartialAutomorphism, depth: usize, budget: &Budget) -> Result<PecVerdict, Error> {
    let p = p.core();
    let table = WitnessTable::build(&p);
    let mut level = vec![Node { q: p, trace: Vec::new() }];
    let mut explored = 0;
    for _ in 0..depth {
        let next: Vec<Node> = level.par_iter().flat_map_iter(children).collect();
        budget.charge(next.len() as u64)?;
        explored += next.len();
        let gap = next.par_iter().find_map_first(|n| table.first_gap(&n.q).map(|g| (n, g)));
        if let Some((n, (query, needed, found))) = gap {
            let cx = PecCounterexample { query, needed, found, trace: n.trace.clone(), extension: n.q.clone() };
            return Ok(PecVerdict::Fail(Box::new(cx)));
        }
        level = next;
    }
    Ok(PecVerdict::Pass { depth, explored })
}

/// Breadth-first search from `p` extending only the orbit through `start` for
/// an extension in which that orbit is no longer a quasi-cycle. Spirals and
/// combs are preferred to cycles.
fn leave_quasicycle(p: &PartialAutomorphism, start: Elem, depth: usize, budget: &Budget) -> Result<Option<PartialAutomorphism>, Error> {
    let mut level = vec![p.clone()];
    let mut cycle = None;
    for _ in 0..depth {
        let mut next = Vec::new();
        for q in &level {
            let (run, _) = forward(q, start);
            let end = *run.last().unwrap_or(&start);
            for (r, _) in one_step_extensions(q, end) {
                budget.charge(1)?;
                let mut pts = vec![start];
                pts.extend(forward(&r, start).0);
                let c = classify_points(r.tree(), &pts);
                match c.kind {
                    OrbitKind::QuasiCycle => next.push(r),
                    OrbitKind::Cycle => {
                        cycle.get_or_insert(r);
                    }
                    _ => return Ok(Some(r)),
                }
            }
        }
        level = next;
    }
    Ok(cycle)
}

/// Extends `p` until it passes [`check_pec`] at `depth`.
///
/// Each round first moves some quasi-cyclic open orbit out of its class when
/// the bounded search allows it, and otherwise adopts the extension carried by
/// the current counterexample.
pub fn pec_close(p: &PartialAutomorphism, depth: usize, cap: usize, budget: &Budget) -> Result<PartialAutomorphism, Error> {
    let mut cur = p.core();
    for _ in 0..cap {
        let t = cur.tree();
        let mut moved = None;
        for o in orbit_decomposition(&cur).into_iter().filter(|o| !o.cyclic) {
            if classify_orbit(t, &o).kind == OrbitKind::QuasiCycle {
                if let Some(q) = leave_quasicycle(&cur, o.first(), depth, budget)? {
                    moved = Some(q);
                    break;
                }
            }
        }
        if let Some(q) = moved {
            cur = q.core();
            continue;
        }
        match check_pec(&cur, depth, budget)? {
            PecVerdict::Pass { .. } => return Ok(cur),
            PecVerdict::Fail(cx) => cur = cx.extension.core(),
        }
    }
    Err(Error::IterationCap { rounds: cap })
}

pub const DEFAULT_CAP: usize = 64;

/// Findings of [`consequences_check`]; empty means no orbit changed character in the extension.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConsequenceReport {
    pub violations: Vec<String>,
}

impl ConsequenceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares each orbit of `p` with the orbit of `f` containing it: drift of
/// non-quasi-cyclic extensions must already show in `p`, classes and
/// parameters must agree, and distinct orbits must stay distinct.
/// `f` must extend `p` index-for-index.
pub fn consequences_check(p: &PartialAutomorphism, f: &PartialAutomorphism) -> ConsequenceReport {
    let mut report = ConsequenceReport::default();
    let (tp, tf) = (p.tree(), f.tree());
    let f_orbits = orbit_decomposition(f);
    let mut owner: Vec<usize> = Vec::new();
    for orbit in orbit_decomposition(p) {
        let name = orbit.labels(tp).join(",");
        let Some(idx) = f_orbits.iter().position(|o| o.points.contains(&orbit.first())) else {
            report.violations.push(format!("orbit {name} is not part of an orbit of the extension"));
            continue;
        };
        let fc = classify_orbit(tf, &f_orbits[idx]);
        let pc = classify_orbit(tp, &orbit);
        if !matches!(fc.kind, OrbitKind::QuasiCycle | OrbitKind::Cycle) {
            let n = orbit.n();
            let shown = !orbit.cyclic
                && (1..=n / 2).any(|k| tp.meet(orbit.points[0], orbit.points[k]) != tp.meet(orbit.points[k], orbit.points[2 * k]));
            if !shown {
                report.violations.push(format!("drift: orbit {name} drifts only in the extension"));
            }
        }
        if fc != pc {
            report.violations.push(format!("kind: orbit {name} is {pc:?} but extends to {fc:?}"));
        }
        if owner.contains(&idx) {
            report.violations.push(format!("merge: orbit {name} merges with another orbit"));
        }
        owner.push(idx);
    }
    report
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub endpoint: String,
    pub unique_type: OneType,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeterminismCertificate {
    pub automorphism: crate::json::AutJson,
    pub depth: usize,
    pub per_step: Vec<StepRecord>,
}

/// Result of one step: the valid next types at the end of the shortest open
/// orbit of the core, and the extension by the unique one.
#[derive(Debug, Clone)]
pub struct DeterminedStep {
    pub endpoint: String,
    pub types: Vec<OneType>,
    pub next: Option<PartialAutomorphism>,
}

impl DeterminedStep {
    pub fn count(&self) -> usize {
        self.types.len()
    }
}

pub fn check_determined_step(p: &PartialAutomorphism) -> Result<DeterminedStep, Error> {
    let core = p.core();
    let orbit = shortest_open_orbit(&core).ok_or(Error::NoNonCyclicOrbit)?;
    let endpoint = core.tree().label(orbit.last()).to_string();
    let exts = immediate_extensions(&core)?;
    let next = (exts.len() == 1).then(|| exts[0].0.clone());
    Ok(DeterminedStep { endpoint, types: exts.into_iter().map(|(_, t)| t).collect(), next })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum DeterminismOutcome {
    Certified(DeterminismCertificate),
    Failed { step: usize, count: usize, partial: DeterminismCertificate },
}

impl DeterminismOutcome {
    pub fn certified(&self) -> bool {
        matches!(self, DeterminismOutcome::Certified(_))
    }
}

/// Walks up to `steps` immediate extensions, each required to be unique.
/// Stops early, certified, once no open orbit remains.
pub fn determinism_certificate(p: &PartialAutomorphism, steps: usize) -> Result<DeterminismOutcome, Error> {
    let start = p.core();
    let mut cert = DeterminismCertificate { automorphism: crate::json::AutJson::from_pauto(&start), depth: 0, per_step: Vec::new() };
    let mut cur = start;
    for step in 0..steps {
        if shortest_open_orbit(&cur).is_none() {
            break;
        }
        let s = check_determined_step(&cur)?;
        match s.next {
            Some(next) => {
                cert.per_step.push(StepRecord { endpoint: s.endpoint, unique_type: s.types[0].clone() });
                cert.depth += 1;
                cur = next.core();
            }
            None => return Ok(DeterminismOutcome::Failed { step, count: s.types.len(), partial: cert }),
        }
    }
    Ok(DeterminismOutcome::Certified(cert))
}

/// Classes of the open orbits of `p` that are quasi-cycles.
pub fn quasi_cycles(p: &PartialAutomorphism) -> Vec<OrbitClass> {
    let t = p.tree();
    orbit_decomposition(p)
        .iter()
        .filter(|o| !o.cyclic)
        .map(|o| classify_orbit(t, o))
        .filter(|c| c.kind == OrbitKind::QuasiCycle)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{generated_substructure, marked_code, enumerate_trees};

    fn chain(labels: &[&str]) -> MeetTree {
        let edges: Vec<(&str, &str)> = labels.windows(2).map(|w| (w[0], w[1])).collect();
        MeetTree::from_edges(labels, &edges).unwrap()
    }

    fn fork() -> MeetTree {
        MeetTree::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap()
    }

    fn unlimited() -> Budget {
        Budget::unlimited()
    }

    /// Marked isomorphism type of the generated structure, by canonical coding.
    fn triple_oracle(t: &MeetTree, xs: [Elem; 3]) -> String {
        let (sub, back) = generated_substructure(t, &xs);
        marked_code(&sub, &|e| {
            let orig = back[e];
            xs.iter().enumerate().filter(|(_, &x)| x == orig).map(|(i, _)| i.to_string()).collect::<Vec<_>>().join("")
        })
    }

    #[test]
    fn triple_type_agrees_with_marked_isomorphism() {
        let trees = enumerate_trees(5, &unlimited()).unwrap();
        let mut by_type: HashMap<TripleType, String> = HashMap::new();
        let mut by_code: HashMap<String, TripleType> = HashMap::new();
        for t in &trees {
            for a in t.elements() {
                for b in t.elements() {
                    for c in t.elements() {
                        let ty = triple_type(t, a, b, c);
                        let code = triple_oracle(t, [a, b, c]);
                        assert_eq!(by_type.entry(ty).or_insert_with(|| code.clone()), &code);
                        assert_eq!(*by_code.entry(code).or_insert(ty), ty);
                    }
                }
            }
        }
    }

    #[test]
    fn triple_type_examples() {
        let t = chain(&["c", "b", "a"]);
        assert_eq!(triple_type(&t, 2, 1, 1), triple_type(&t, 2, 0, 0));
        let t = MeetTree::point("a");
        assert_eq!(triple_type(&t, 0, 0, 0), (1u64 << 36) - 1);
    }

    #[test]
    fn identity_on_a_point_passes() {
        let t = MeetTree::point("a");
        let p = PartialAutomorphism::from_labels(&t, &[("a", "a")]).unwrap();
        for w in 1..=3 {
            assert!(check_pec(&p, w, &unlimited()).unwrap().passed());
        }
        assert!(pec_close(&p, 2, DEFAULT_CAP, &unlimited()).unwrap() == p);
    }

    #[test]
    fn single_descending_step_fails() {
        let t = chain(&["b", "a"]);
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        let PecVerdict::Fail(cx) = check_pec(&p, 2, &unlimited()).unwrap() else { panic!("expected a gap") };
        assert!(cx.found < cx.needed);
        assert!(cx.query.first_power >= 2 || cx.query.second_power >= 2);
        // The offending extension adds one point below b.
        let q = &cx.extension;
        let c = q.tree().index_of("a").unwrap();
        let run = forward(q, c);
        assert_eq!(run.0.len(), 2);
    }

    #[test]
    fn descending_four_chain_passes() {
        let t = chain(&["d", "c", "b", "a"]);
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b"), ("b", "c"), ("c", "d")]).unwrap();
        assert!(check_pec(&p, 2, &unlimited()).unwrap().passed());
        let s = check_determined_step(&p).unwrap();
        assert_eq!(s.count(), 1);
        assert_eq!(s.endpoint, "d");
    }

    #[test]
    fn closing_a_descending_step_gives_a_longer_chain() {
        let t = chain(&["b", "a"]);
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        let q = pec_close(&p, 2, DEFAULT_CAP, &unlimited()).unwrap();
        assert!(check_pec(&q, 2, &unlimited()).unwrap().passed());
        let orbits = orbit_decomposition(&q);
        assert_eq!(orbits.len(), 1);
        assert!(orbits[0].length() >= 4);
        assert_eq!(classify_orbit(q.tree(), &orbits[0]), OrbitClass { kind: OrbitKind::DescendingSpiral, parameter: 1 });
        let out = determinism_certificate(&q, 3).unwrap();
        assert!(out.certified(), "{out:?}");
    }

    #[test]
    fn incomparable_step_is_undetermined_until_closed() {
        let t = fork();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        assert!(check_determined_step(&p).unwrap().count() >= 2);
        assert!(matches!(determinism_certificate(&p, 1).unwrap(), DeterminismOutcome::Failed { step: 0, .. }));
        let q = pec_close(&p, 2, DEFAULT_CAP, &unlimited()).unwrap();
        assert!(check_pec(&q, 2, &unlimited()).unwrap().passed());
        assert_eq!(check_determined_step(&q).unwrap().count(), 1);
    }

    #[test]
    fn only_cycles_means_no_step() {
        let t = fork();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b"), ("b", "a")]).unwrap();
        assert_eq!(check_determined_step(&p).unwrap_err(), Error::NoNonCyclicOrbit);
        let out = determinism_certificate(&p, 5).unwrap();
        let DeterminismOutcome::Certified(c) = out else { panic!() };
        assert_eq!(c.depth, 0);
    }

    #[test]
    fn consequences_hold_one_step_past_a_closed_chain() {
        let t = chain(&["d", "c", "b", "a"]);
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b"), ("b", "c"), ("c", "d")]).unwrap();
        let f = check_determined_step(&p).unwrap().next.unwrap();
        assert!(consequences_check(&p, &f).is_clean());
    }

    #[test]
    fn unclosed_incomparable_step_violates_consequences() {
        let t = fork();
        let p = PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap();
        let exts = immediate_extensions(&p).unwrap();
        assert!(exts.iter().any(|(f, _)| !consequences_check(&p, f).is_clean()));
    }
}
