//! Machine-checkable structural laws of meets and orbits.
//!
//! Each checker returns the list of violated instances; an empty list means
//! the law held on the input.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{all_orbits, guided_orbit};
use crate::pauto::{
    classify_orbit, classify_points, one_step_extensions, pseudo_period, time_reverse, validate_pauto, Orbit, OrbitKind,
};
use crate::tree::{enumerate_trees, Elem, MeetTree};
use crate::budget::Budget;
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawViolation {
    pub law: &'static str,
    pub detail: String,
}

fn fail(out: &mut Vec<LawViolation>, law: &'static str, detail: String) {
    out.push(LawViolation { law, detail });
}

/// The three meet identities for every triple of elements.
pub fn meet_law_violations(t: &MeetTree) -> Vec<LawViolation> {
    let mut out = Vec::new();
    let lt = |x: Elem, y: Elem| t.lt(x, y);
    for a in t.elements() {
        for b in t.elements() {
            let ab = t.meet(a, b);
            for c in t.elements() {
                let (ac, bc) = (t.meet(a, c), t.meet(b, c));
                let abc = t.meet(ab, c);
                let tag = || format!("({}, {}, {})", t.label(a), t.label(b), t.label(c));
                if abc != ab && abc != ac {
                    fail(&mut out, "meet-of-three", tag());
                }
                if lt(ac, ab) && ac != bc {
                    fail(&mut out, "strict-meet-transfer", tag());
                }
                if t.leq(ac, ab) && !t.leq(ac, bc) {
                    fail(&mut out, "weak-meet-transfer", tag());
                }
            }
        }
    }
    out
}

fn label_seq(t: &MeetTree, pts: &[Elem]) -> String {
    pts.iter().map(|&e| t.label(e)).collect::<Vec<_>>().join(",")
}

/// Comparability pattern and meet equalities of a `k`-spiral.
fn spiral_laws(t: &MeetTree, pts: &[Elem], k: usize, out: &mut Vec<LawViolation>) {
    let n = pts.len() - 1;
    let name = label_seq(t, pts);
    for i in 0..=n {
        for j in 0..=n {
            if t.comparable(pts[i], pts[j]) != (i % k == j % k) {
                fail(out, "spiral-comparability", format!("{name}: i={i} j={j} k={k}"));
            }
            if i % k != j % k {
                continue;
            }
            for l in (0..=n).filter(|l| l % k != i % k) {
                if t.meet(pts[i], pts[l]) != t.meet(pts[j], pts[l]) {
                    fail(out, "spiral-meets", format!("{name}: i={i} j={j} l={l}"));
                }
            }
        }
    }
    for l in 1..=n / 2 {
        if t.meet(pts[0], pts[l]) != t.meet(pts[l], pts[2 * l]) && l % k != 0 {
            fail(out, "spiral-drift-length", format!("{name}: l={l} k={k}"));
        }
    }
}

fn otp(a: usize, b: usize) -> std::cmp::Ordering {
    a.cmp(&b)
}

fn meet_otp(t: &MeetTree, x: Elem, y: Elem) -> Option<std::cmp::Ordering> {
    if x == y {
        Some(std::cmp::Ordering::Equal)
    } else if t.lt(x, y) {
        Some(std::cmp::Ordering::Less)
    } else if t.lt(y, x) {
        Some(std::cmp::Ordering::Greater)
    } else {
        None
    }
}

/// Meet ordering along residue classes mod `k` whenever `x₀ ∧ xₖ` and
/// `xₖ ∧ x₂ₖ` differ.
fn drift_laws(t: &MeetTree, pts: &[Elem], out: &mut Vec<LawViolation>) {
    let n = pts.len() - 1;
    let name = label_seq(t, pts);
    for k in 1..=n / 2 {
        let (low, high) = (t.meet(pts[0], pts[k]), t.meet(pts[k], pts[2 * k]));
        if low == high {
            continue;
        }
        let ascending = t.lt(low, high);
        for r in 0..k {
            let idx: Vec<usize> = (r..=n).step_by(k).collect();
            for (a, &i1) in idx.iter().enumerate() {
                for &i2 in &idx[a + 1..] {
                    let m = t.meet(pts[i1], pts[i2]);
                    let expected = if ascending { t.meet(pts[i1], pts[i1 + k]) } else { t.meet(pts[i2 - k], pts[i2]) };
                    if m != expected {
                        fail(out, "drift-meet-collapse", format!("{name}: k={k} i1={i1} i2={i2}"));
                    }
                    for (b, &j1) in idx.iter().enumerate() {
                        for &j2 in &idx[b + 1..] {
                            let got = meet_otp(t, m, t.meet(pts[j1], pts[j2]));
                            let want = if ascending { otp(i1, j1) } else { otp(j2, i2) };
                            if got != Some(want) {
                                fail(out, "drift-meet-order", format!("{name}: k={k} ({i1},{i2}) vs ({j1},{j2})"));
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Meets with a point do not distinguish positions congruent mod the pseudo-period.
fn quasi_cycle_laws(t: &MeetTree, pts: &[Elem], u: usize, out: &mut Vec<LawViolation>) {
    let n = pts.len() - 1;
    let name = label_seq(t, pts);
    for i in 0..=n {
        for j in (i % u..=n).step_by(u) {
            for k in (0..=n).filter(|&k| k != i && k != j) {
                if t.meet(pts[i], pts[k]) != t.meet(pts[j], pts[k]) {
                    fail(out, "quasi-cycle-meets", format!("{name}: i={i} j={j} k={k} u={u}"));
                }
            }
        }
    }
}

fn steady_meets(t: &MeetTree, pts: &[Elem], out: &mut Vec<LawViolation>) {
    let n = pts.len() - 1;
    for k in 1..=n / 2 {
        if t.meet(pts[0], pts[k]) != t.meet(pts[k], pts[2 * k]) {
            fail(out, "steady-meets", format!("{}: k={k}", label_seq(t, pts)));
        }
    }
}

/// Every orbit law that applies to `o` given its class.
pub fn orbit_law_violations(t: &MeetTree, o: &Orbit) -> Vec<LawViolation> {
    let mut out = Vec::new();
    let pts = &o.points;
    let class = classify_orbit(t, o);
    let name = label_seq(t, pts);

    let e0 = pts[0];
    if pts.iter().any(|&x| t.lt(e0, x)) && pts.iter().any(|&x| t.lt(x, e0)) {
        fail(&mut out, "single-direction", name.clone());
    }

    let rev = time_reverse(o);
    let rc = classify_orbit(t, &rev);
    if rc.kind != class.kind.reversed() || rc.parameter != class.parameter {
        fail(&mut out, "time-reversal", format!("{name}: {class:?} reversed to {rc:?}"));
    }
    if pseudo_period(t, pts) != pseudo_period(t, &rev.points) {
        fail(&mut out, "pseudo-period-reversal", name.clone());
    }

    match class.kind {
        OrbitKind::Cycle => steady_meets(t, pts, &mut out),
        OrbitKind::QuasiCycle => {
            steady_meets(t, pts, &mut out);
            quasi_cycle_laws(t, pts, class.parameter, &mut out);
            for a in 0..pts.len() {
                for b in a + 2..=pts.len() {
                    if classify_points(t, &pts[a..b]).kind != OrbitKind::QuasiCycle {
                        fail(&mut out, "quasi-cycle-suborbit", format!("{name}: [{a}, {b})"));
                    }
                }
            }
        }
        k => {
            if k.is_spiral() {
                spiral_laws(t, pts, class.parameter, &mut out);
            }
            drift_laws(t, pts, &mut out);
        }
    }
    out
}

/// Extensions of spirals and combs by one point keep the class.
pub fn extension_stability_violations(t: &MeetTree, o: &Orbit) -> Vec<LawViolation> {
    let mut out = Vec::new();
    let class = classify_orbit(t, o);
    if o.cyclic || class.kind == OrbitKind::QuasiCycle {
        return out;
    }
    let p = validate_pauto(t, &o.steps()).expect("orbit is a partial orbit");
    let core = p.core();
    let pts: Vec<Elem> = o.points.iter().map(|&e| core.tree().index_of(t.label(e)).unwrap()).collect();
    for (q, ty) in one_step_extensions(&core, *pts.last().unwrap()) {
        let mut longer = pts.clone();
        longer.push(q.get(*pts.last().unwrap()).unwrap());
        let c = classify_points(q.tree(), &longer);
        if c != class {
            fail(&mut out, "extension-stability", format!("{} by {ty:?}: {class:?} became {c:?}", label_seq(t, &o.points)));
        }
    }
    out
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LawReport {
    pub trees: usize,
    pub triples: usize,
    pub exhaustive_orbits: usize,
    pub guided_orbits: usize,
    /// Guided orbits by class name.
    pub guided_classes: BTreeMap<&'static str, usize>,
    pub violations: Vec<LawViolation>,
}

/// Meet laws on all trees up to `max_size`, orbit laws on every partial orbit
/// of those trees, and orbit laws on `walks` guided orbits of up to
/// `walk_len` points started from every orbit of length two or less.
pub fn check_laws(
    max_size: usize,
    walks: usize,
    walk_len: usize,
    pick: &mut dyn FnMut(usize) -> usize,
    budget: &Budget,
) -> Result<LawReport, Error> {
    let mut report = LawReport::default();
    let trees = enumerate_trees(max_size, budget)?;
    let mut seeds = Vec::new();
    for t in &trees {
        report.trees += 1;
        report.triples += t.len().pow(3);
        report.violations.extend(meet_law_violations(t));
        for o in all_orbits(t) {
            budget.charge(1)?;
            report.exhaustive_orbits += 1;
            report.violations.extend(orbit_law_violations(t, &o));
            report.violations.extend(extension_stability_violations(t, &o));
            if !o.cyclic && o.points.len() == 2 {
                seeds.push((t.clone(), o.points.clone()));
            }
        }
    }
    if !seeds.is_empty() {
        for _ in 0..walks {
            budget.charge(walk_len as u64)?;
            let (t, start) = &seeds[pick(seeds.len()) % seeds.len()];
            let (tree, o) = guided_orbit(t, start, walk_len, pick);
            report.guided_orbits += 1;
            *report.guided_classes.entry(classify_orbit(&tree, &o).kind.name()).or_default() += 1;
            report.violations.extend(orbit_law_violations(&tree, &o));
        }
    }
    Ok(report)
}
