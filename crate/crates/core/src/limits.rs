//! Search budgets and cooperative cancellation.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

/// Limits on a potentially exponential search. The default is unlimited.
#[derive(Debug, Clone, Default)]
pub struct Budget {
    pub nodes: Option<u64>,
    pub deadline: Option<Instant>,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(nodes: u64) -> Self {
        Budget {
            nodes: Some(nodes),
            ..Budget::default()
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.deadline = Some(Instant::now() + timeout);
        self
    }

    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Exhausted {
    #[error("node budget of {0} exceeded")]
    Nodes(u64),
    #[error("time budget exceeded")]
    Deadline,
    #[error("cancelled")]
    Cancelled,
}

/// Counts search nodes against a [`Budget`].
#[derive(Debug)]
pub(crate) struct Meter<'a> {
    budget: &'a Budget,
    pub(crate) spent: u64,
}

impl<'a> Meter<'a> {
    pub(crate) fn new(budget: &'a Budget) -> Self {
        Meter { budget, spent: 0 }
    }

    pub(crate) fn tick(&mut self) -> Result<(), Exhausted> {
        self.spent += 1;
        if let Some(max) = self.budget.nodes {
            if self.spent > max {
                return Err(Exhausted::Nodes(max));
            }
        }
        // clock and flag are polled every 256 nodes
        if self.spent & 0xff == 0 {
            if let Some(flag) = &self.budget.cancel {
                if flag.load(Ordering::Relaxed) {
                    return Err(Exhausted::Cancelled);
                }
            }
            if let Some(deadline) = self.budget.deadline {
                if Instant::now() >= deadline {
                    return Err(Exhausted::Deadline);
                }
            }
        }
        Ok(())
    }
}
