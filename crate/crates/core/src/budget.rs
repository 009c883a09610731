//! Cooperative cancellation for long-running enumerations.
//!
//! The core has no clock. Callers that want wall-clock limits implement
//! [`Budget`] on top of whatever timer their platform offers.

/// Polled by enumeration loops; returning `true` aborts the computation.
pub trait Budget {
    fn exhausted(&self) -> bool;
}

/// A budget that never runs out.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unlimited;

impl Budget for Unlimited {
    fn exhausted(&self) -> bool {
        false
    }
}

impl<F: Fn() -> bool> Budget for F {
    fn exhausted(&self) -> bool {
        self()
    }
}
