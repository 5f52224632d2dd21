//! Allocation and copy counters used by leak and copy-discipline tests.
//!
//! Counting is off unless `PORTWAVE_ALLOC_TRACE=1` is set in the environment
//! or [`enable_for_current_thread`] was called. Counters are thread-local: a
//! test observes exactly the allocations and copies issued from its own
//! thread, so concurrently running tests do not disturb each other. A buffer
//! remembers whether its allocation was counted and only then counts its
//! release, which keeps the balance exact when tracing is switched on midway.

use std::cell::Cell;
use std::sync::OnceLock;

/// Environment variable that enables tracing process-wide.
pub const TRACE_ENV: &str = "PORTWAVE_ALLOC_TRACE";

/// Snapshot of the calling thread's counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub allocations: u64,
    pub releases: u64,
    pub live_bytes: i64,
    pub copies_from_host: u64,
    pub copies_to_host: u64,
    pub copies_within: u64,
}

impl Counters {
    /// Allocations not yet matched by a release.
    pub fn live_allocations(&self) -> i64 {
        self.allocations as i64 - self.releases as i64
    }

    pub fn total_copies(&self) -> u64 {
        self.copies_from_host + self.copies_to_host + self.copies_within
    }

    /// Counter-wise difference `self - earlier`.
    pub fn since(&self, earlier: &Counters) -> Counters {
        Counters {
            allocations: self.allocations - earlier.allocations,
            releases: self.releases - earlier.releases,
            live_bytes: self.live_bytes - earlier.live_bytes,
            copies_from_host: self.copies_from_host - earlier.copies_from_host,
            copies_to_host: self.copies_to_host - earlier.copies_to_host,
            copies_within: self.copies_within - earlier.copies_within,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CopyKind {
    FromHost,
    ToHost,
    Within,
}

thread_local! {
    static FORCED: Cell<bool> = const { Cell::new(false) };
    static COUNTERS: Cell<Counters> = const { Cell::new(Counters {
        allocations: 0,
        releases: 0,
        live_bytes: 0,
        copies_from_host: 0,
        copies_to_host: 0,
        copies_within: 0,
    }) };
}

fn env_enabled() -> bool {
    static ENV: OnceLock<bool> = OnceLock::new();
    *ENV.get_or_init(|| std::env::var(TRACE_ENV).is_ok_and(|v| v == "1"))
}

/// Whether allocations and copies on this thread are being counted.
pub fn enabled() -> bool {
    FORCED.with(Cell::get) || env_enabled()
}

/// Turns counting on for the calling thread regardless of the environment.
pub fn enable_for_current_thread() {
    FORCED.with(|f| f.set(true));
}

/// Current counters of the calling thread.
pub fn counters() -> Counters {
    COUNTERS.with(Cell::get)
}

fn update(f: impl FnOnce(&mut Counters)) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

/// Records an allocation; returns whether it was counted.
pub(crate) fn on_allocate(bytes: usize) -> bool {
    if !enabled() {
        return false;
    }
    update(|c| {
        c.allocations += 1;
        c.live_bytes += bytes as i64;
    });
    true
}

pub(crate) fn on_release(bytes: usize, traced: bool) {
    if traced {
        update(|c| {
            c.releases += 1;
            c.live_bytes -= bytes as i64;
        });
    }
}

pub(crate) fn on_copy(kind: CopyKind) {
    if !enabled() {
        return;
    }
    update(|c| match kind {
        CopyKind::FromHost => c.copies_from_host += 1,
        CopyKind::ToHost => c.copies_to_host += 1,
        CopyKind::Within => c.copies_within += 1,
    });
}

/// Scope guard that enables tracing and reports the allocation balance of
/// everything that happened on this thread since it was created.
#[derive(Debug)]
pub struct TraceScope {
    start: Counters,
}

impl TraceScope {
    pub fn begin() -> Self {
        enable_for_current_thread();
        TraceScope { start: counters() }
    }

    /// Counter deltas since [`TraceScope::begin`].
    pub fn delta(&self) -> Counters {
        counters().since(&self.start)
    }

    /// Allocations made in this scope and not released yet.
    pub fn live_allocations(&self) -> i64 {
        self.delta().live_allocations()
    }
}
