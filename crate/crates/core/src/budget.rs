use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::Error;

/// Default node limit for every exhaustive search.
pub const DEFAULT_LIMIT: u64 = 10_000_000;

/// A shared node counter. Searches call [`Budget::charge`] once per node and stop
/// with [`Error::BudgetExceeded`] when the limit is crossed.
#[derive(Debug)]
pub struct Budget {
    used: AtomicU64,
    limit: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { used: AtomicU64::new(0), limit }
    }

    pub fn unlimited() -> Self {
        Budget::new(u64::MAX)
    }

    /// Reads `MEETTREE_BUDGET`, falling back to [`DEFAULT_LIMIT`].
    pub fn from_env() -> Self {
        let limit = std::env::var("MEETTREE_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_LIMIT);
        Budget::new(limit)
    }

    pub fn charge(&self, nodes: u64) -> Result<(), Error> {
        let used = self.used.fetch_add(nodes, Ordering::Relaxed) + nodes;
        if used > self.limit {
            Err(Error::BudgetExceeded { used, limit: self.limit })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_LIMIT)
    }
}
