//! Orbit surgery: closing quasi-cycles into cycles, and bounded enumeration of
//! one-orbit extensions.

use serde::Serialize;

use crate::budget::Budget;
use crate::error::Error;
use crate::pauto::{classify_points, one_step_extensions, validate_pauto, OrbitClass, OrbitKind, PartialAutomorphism};
use crate::pauto::Orbit;
use crate::tree::{Elem, MeetTree};
use crate::types::OneType;

/// How an extension was reached: the resulting class, the number of added
/// orbit points, and the sequence of types used, which replays the extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitExtensionPlan {
    pub target_kind: OrbitClass,
    pub added_points: usize,
    pub guard: Vec<OneType>,
}

#[derive(Debug, Clone)]
pub struct OrbitExtension {
    pub tree: MeetTree,
    pub orbit: Orbit,
    pub plan: OrbitExtensionPlan,
}

/// The map `xᵢ ↦ xᵢ₊₁` restricted to the tree its points generate, with the
/// points translated to that tree.
fn orbit_core(t: &MeetTree, o: &Orbit) -> Result<(PartialAutomorphism, Vec<Elem>), Error> {
    let p = validate_pauto(t, &o.steps())?;
    let core = p.core();
    let pos = |e: Elem| core.tree().index_of(t.label(e)).expect("orbit points survive the core");
    let points = o.points.iter().map(|&e| pos(e)).collect();
    Ok((core, points))
}

/// Extends a quasi-cycle of pseudo-period `u` to the least multiple `N` of `u`
/// exceeding `n`, then closes it into an `N`-cycle.
pub fn complete_quasicycle_to_cycle(t: &MeetTree, o: &Orbit, budget: &Budget) -> Result<(MeetTree, Orbit), Error> {
    if o.cyclic || o.points.len() < 2 {
        return Err(Error::NotQuasiCycle);
    }
    let class = classify_points(t, &o.points);
    if class.kind != OrbitKind::QuasiCycle {
        return Err(Error::NotQuasiCycle);
    }
    let u = class.parameter;
    let n = o.n();
    let target = (n / u + 1) * u;
    let (p, points) = orbit_core(t, o)?;
    let found = grow_and_close(&p, points, u, target, budget)?;
    found.ok_or_else(|| Error::NotFound(format!("no closing extension to a {target}-cycle")))
}

fn grow_and_close(
    p: &PartialAutomorphism,
    points: Vec<Elem>,
    u: usize,
    target: usize,
    budget: &Budget,
) -> Result<Option<(MeetTree, Orbit)>, Error> {
    budget.charge(1)?;
    let last = *points.last().unwrap();
    if points.len() == target {
        let Ok(closed) = p.with_pair(p.tree(), last, points[0]) else {
            return Ok(None);
        };
        let mut cycle = points;
        cycle.push(cycle[0]);
        return Ok(Some((closed.tree().clone(), Orbit { points: cycle, cyclic: true })));
    }
    for (q, _) in one_step_extensions(p, last) {
        let next = q.get(last).unwrap();
        if points.contains(&next) {
            continue;
        }
        let mut longer = points.clone();
        longer.push(next);
        let c = classify_points(q.tree(), &longer);
        if c.kind != OrbitKind::QuasiCycle || c.parameter != u {
            continue;
        }
        if let Some(done) = grow_and_close(&q, longer, u, target, budget)? {
            return Ok(Some(done));
        }
    }
    Ok(None)
}

/// Every validated extension of the orbit by `1..=max_added` new images at its
/// end, in search order. Closing back onto `x₀` yields a cycle and is not
/// extended further; a cyclic input has no extensions.
pub fn enumerate_orbit_extensions(
    t: &MeetTree,
    o: &Orbit,
    max_added: usize,
    budget: &Budget,
) -> Result<Vec<OrbitExtension>, Error> {
    if o.cyclic {
        return Ok(Vec::new());
    }
    let (p, points) = orbit_core(t, o)?;
    let mut out = Vec::new();
    walk(&p, points, &mut Vec::new(), max_added, budget, &mut out)?;
    Ok(out)
}

fn walk(
    p: &PartialAutomorphism,
    points: Vec<Elem>,
    guard: &mut Vec<OneType>,
    left: usize,
    budget: &Budget,
    out: &mut Vec<OrbitExtension>,
) -> Result<(), Error> {
    if left == 0 {
        return Ok(());
    }
    let last = *points.last().unwrap();
    for (q, ty) in one_step_extensions(p, last) {
        budget.charge(1)?;
        let next = q.get(last).unwrap();
        let mut longer = points.clone();
        longer.push(next);
        let class = classify_points(q.tree(), &longer);
        let cyclic = next == longer[0];
        guard.push(ty);
        out.push(OrbitExtension {
            tree: q.tree().clone(),
            orbit: Orbit { points: longer.clone(), cyclic },
            plan: OrbitExtensionPlan { target_kind: class, added_points: guard.len(), guard: guard.clone() },
        });
        if !cyclic {
            walk(&q, longer, guard, left - 1, budget, out)?;
        }
        guard.pop();
    }
    Ok(())
}
