//! Wall-clock budgets.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use bellslice_core::Budget;

/// Runs out at a fixed instant, or never. Also remembers whether it has.
#[derive(Debug, Clone)]
pub struct Deadline {
    at: Option<Instant>,
    hit: Arc<AtomicBool>,
}

impl Deadline {
    pub fn after(limit: Option<Duration>) -> Self {
        Deadline { at: limit.map(|d| Instant::now() + d), hit: Arc::new(AtomicBool::new(false)) }
    }

    pub fn never() -> Self {
        Self::after(None)
    }

    /// The earlier of `self` and a fresh limit starting now; shares the hit flag.
    pub fn child(&self, limit: Option<Duration>) -> Self {
        let own = limit.map(|d| Instant::now() + d);
        let at = match (self.at, own) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Deadline { at, hit: Arc::new(AtomicBool::new(false)) }
    }

    pub fn expired(&self) -> bool {
        self.at.is_some_and(|t| Instant::now() >= t)
    }

    /// Whether `exhausted` ever returned true.
    pub fn was_hit(&self) -> bool {
        self.hit.load(Ordering::Relaxed)
    }
}

impl Budget for Deadline {
    fn exhausted(&self) -> bool {
        let e = self.expired();
        if e {
            self.hit.store(true, Ordering::Relaxed);
        }
        e
    }
}

pub fn seconds(secs: Option<f64>) -> Option<Duration> {
    secs.filter(|s| *s > 0.0).map(Duration::from_secs_f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadlines() {
        let d = Deadline::never();
        assert!(!d.exhausted());
        let z = Deadline::after(Some(Duration::ZERO));
        assert!(z.exhausted());
        assert!(z.was_hit());
        let c = d.child(Some(Duration::ZERO));
        assert!(c.exhausted());
        assert!(!d.was_hit());
        assert!(!Deadline::after(Some(Duration::from_secs(60))).child(None).exhausted());
    }
}
