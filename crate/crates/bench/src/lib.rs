//! Fixtures shared by the benchmarks.

use meettree::{MeetTree, PartialAutomorphism};

/// `r < a, r < b` with `a ↦ b`.
pub fn fork_step() -> PartialAutomorphism {
    let t = MeetTree::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap();
    PartialAutomorphism::from_labels(&t, &[("a", "b")]).unwrap()
}

/// A descending chain of `n` points with each point mapped to the one below.
pub fn descending_chain(n: usize) -> PartialAutomorphism {
    let labels: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let parents = (0..n).map(|i| i.checked_sub(1)).collect();
    let t = MeetTree::from_parents(labels, parents).unwrap();
    let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i, i - 1)).collect();
    meettree::pauto::validate_pauto(&t, &pairs).unwrap()
}
