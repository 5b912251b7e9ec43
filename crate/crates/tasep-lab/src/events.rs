//! Shared event loop for clock-driven lattice dynamics.
//!
//! All processes in this crate (particles, heights, interfaces) share the
//! same structure: an epoch at site `i` either performs a local move or does
//! nothing, and whether site `i` can move depends only on state within
//! `[i-1, i+2]`. The driver exploits that: it keeps a priority queue over the
//! sites that can currently fire, consults each site's clock lazily, and
//! silently discards the epochs of blocked sites. The realized trajectory is
//! identical to processing every epoch of every site in global time order,
//! because an epoch at a blocked site is a no-op and a site's blocked status
//! only changes when one of its neighbours fires.
//!
//! Optionally the driver also runs the two contamination-front walkers used
//! to certify that closed window boundaries have not influenced the interior:
//! rate-1 walkers started just outside the window, the left one stepping
//! right at every epoch of its current site, the right one stepping left at
//! every epoch of the site to its left.

use crate::error::{Error, Result};
use crate::harris::{Clocks, SiteClock};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const KIND_DYN: u8 = 0;
const KIND_WALK_LEFT: u8 = 1;
const KIND_WALK_RIGHT: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ev {
    t: f64,
    site: i64,
    kind: u8,
}

impl Eq for Ev {}

impl PartialOrd for Ev {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ev {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.site.cmp(&other.site))
            .then(self.kind.cmp(&other.kind))
    }
}

/// Local move rules of one lattice process.
pub trait Dynamics {
    /// Inclusive span of sites whose epochs can trigger a move.
    fn movable_span(&self) -> (i64, i64);
    /// Whether an epoch at `site` would perform a move in the current state.
    fn can_fire(&self, site: i64) -> bool;
    /// Perform the move of an epoch at `site` at time `t`. Only state read
    /// by `can_fire` of sites `site-1 ..= site+1` may change.
    fn fire(&mut self, t: f64, site: i64, fronts: (i64, i64));
}

/// Contamination-front walkers flanking a window.
#[derive(Debug, Clone, Copy)]
pub struct FrontPair {
    pub left: i64,
    pub right: i64,
}

pub struct DriverOutcome {
    pub fronts: Option<FrontPair>,
    /// Number of moves performed (fired events, not counting walker steps).
    pub moves: u64,
}

struct WalkerState {
    pos: i64,
    clock: Option<SiteClock>,
}

/// Run `dyn_` on `clocks` from `t_start` to `t_end`, optionally tracking
/// front walkers. Requires every site of the movable span (and the walkers'
/// paths) to be inside the clock range.
pub fn drive<C: Clocks, D: Dynamics>(
    dynamics: &mut D,
    clocks: &C,
    t_start: f64,
    t_end: f64,
    fronts: Option<FrontPair>,
) -> Result<DriverOutcome> {
    if t_end > clocks.horizon() {
        return Err(Error::invalid(format!(
            "t_end {} exceeds clock horizon {}",
            t_end,
            clocks.horizon()
        )));
    }
    if t_start > t_end {
        return Err(Error::invalid(format!(
            "t_start {t_start} exceeds t_end {t_end}"
        )));
    }
    let (mlo, mhi) = dynamics.movable_span();
    let range = clocks.site_range();
    if mlo <= mhi && (!range.contains(mlo) || !range.contains(mhi)) {
        return Err(Error::OutOfRange(format!(
            "movable span [{mlo}, {mhi}] not covered by clock range [{}, {}]",
            range.lo, range.hi
        )));
    }

    let span_len = if mhi < mlo { 0 } else { (mhi - mlo + 1) as usize };
    let mut cursors: Vec<Option<SiteClock>> = Vec::with_capacity(span_len);
    cursors.resize_with(span_len, || None);
    // NaN = no pending heap entry for this site.
    let mut pending: Vec<f64> = vec![f64::NAN; span_len];
    let mut heap: BinaryHeap<Reverse<Ev>> = BinaryHeap::new();

    let idx = |site: i64| (site - mlo) as usize;

    // Arm one site: make sure its next epoch after `now` sits in the heap.
    macro_rules! arm {
        ($site:expr, $now:expr) => {{
            let site: i64 = $site;
            let i = idx(site);
            if pending[i].is_nan() {
                if cursors[i].is_none() {
                    cursors[i] = Some(clocks.clock(site)?);
                }
                let next = cursors[i].as_mut().unwrap().skip_through($now);
                if let Some(t) = next {
                    if t <= t_end {
                        pending[i] = t;
                        heap.push(Reverse(Ev { t, site, kind: KIND_DYN }));
                    }
                }
            }
        }};
    }

    for site in mlo..=mhi {
        if dynamics.can_fire(site) {
            arm!(site, t_start);
        }
    }

    // Walkers: present only when front tracking was requested.
    let mut left = WalkerState { pos: 0, clock: None };
    let mut right = WalkerState { pos: 0, clock: None };
    if let Some(fp) = fronts {
        left.pos = fp.left;
        right.pos = fp.right;
        schedule_walker(&mut left, KIND_WALK_LEFT, clocks, t_start, t_end, &mut heap);
        schedule_walker(&mut right, KIND_WALK_RIGHT, clocks, t_start, t_end, &mut heap);
    }

    let mut moves: u64 = 0;
    while let Some(Reverse(ev)) = heap.pop() {
        match ev.kind {
            KIND_DYN => {
                let i = idx(ev.site);
                debug_assert_eq!(pending[i], ev.t);
                pending[i] = f64::NAN;
                if dynamics.can_fire(ev.site) {
                    dynamics.fire(ev.t, ev.site, (left.pos, right.pos));
                    moves += 1;
                    // Re-arm the fired site and both neighbours; their
                    // firing status is exactly what the move may have changed.
                    let lo = (ev.site - 1).max(mlo);
                    let hi = (ev.site + 1).min(mhi);
                    for s in lo..=hi {
                        if dynamics.can_fire(s) {
                            arm!(s, ev.t);
                        }
                    }
                }
                // Blocked at pop time: the epoch is a no-op. The cursor has
                // already advanced past it; re-arming at a later activation
                // time only ever skips forward, so nothing is lost.
            }
            KIND_WALK_LEFT => {
                left.pos += 1;
                left.clock = None;
                schedule_walker(&mut left, KIND_WALK_LEFT, clocks, ev.t, t_end, &mut heap);
            }
            KIND_WALK_RIGHT => {
                right.pos -= 1;
                right.clock = None;
                schedule_walker(&mut right, KIND_WALK_RIGHT, clocks, ev.t, t_end, &mut heap);
            }
            _ => unreachable!(),
        }
    }

    let fronts_out = fronts.map(|_| FrontPair {
        left: left.pos,
        right: right.pos,
    });
    Ok(DriverOutcome {
        fronts: fronts_out,
        moves,
    })
}

/// Push the walker's next step, if its clock site is materialized. The left
/// walker listens to the clock at its own position, the right walker to the
/// clock one site to its left (a jump from `pos` to `pos - 1`).
fn schedule_walker<C: Clocks>(
    w: &mut WalkerState,
    kind: u8,
    clocks: &C,
    now: f64,
    t_end: f64,
    heap: &mut BinaryHeap<Reverse<Ev>>,
) {
    let clock_site = if kind == KIND_WALK_LEFT { w.pos } else { w.pos - 1 };
    if !clocks.site_range().contains(clock_site) {
        // Walked off the materialized range: the front has crossed the whole
        // window; stop tracking.
        return;
    }
    if w.clock.is_none() {
        w.clock = clocks.clock(clock_site).ok();
    }
    if let Some(c) = w.clock.as_mut() {
        if let Some(t) = c.skip_through(now) {
            if t <= t_end {
                heap.push(Reverse(Ev { t, site: clock_site, kind }));
            }
        }
    }
}
