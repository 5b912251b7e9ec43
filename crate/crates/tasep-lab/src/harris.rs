//! Per-site Poisson clocks with deterministic, index-addressed streams.
//!
//! A [`HarrisSystem`] carries one rate-1 Poisson process per lattice site,
//! materialized lazily. Each site's epochs come from its own counter-based
//! stream keyed by `(seed, site)`, so enlarging the site range never changes
//! the epochs of sites that were already covered, and several coupled
//! processes can consume the very same clocks. [`ShiftedClockView`] exposes
//! the same system with the site index translated by a constant, which is
//! how the interface processes share clocks with the height process.

use crate::error::{Error, Result};
use crate::rng::{Domain, SplitMix64};
use std::sync::OnceLock;

/// Inclusive interval of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteRange {
    pub lo: i64,
    pub hi: i64,
}

impl SiteRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        SiteRange { lo, hi }
    }

    pub fn len(&self) -> usize {
        if self.hi < self.lo {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, site: i64) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    /// Translate both endpoints by `-k` (the range seen through a shift-k view).
    pub fn shifted(&self, k: i64) -> SiteRange {
        SiteRange::new(self.lo - k, self.hi - k)
    }
}

/// Lazily generated epoch sequence of one site: cumulative sums of unit
/// exponentials, cut off at the horizon.
#[derive(Debug, Clone)]
pub struct EpochStream {
    gen: SplitMix64,
    t: f64,
    horizon: f64,
}

impl EpochStream {
    fn new(seed: u64, site: i64, horizon: f64) -> Self {
        EpochStream {
            gen: SplitMix64::from_parts(seed, Domain::Clocks, site),
            t: 0.0,
            horizon,
        }
    }

    /// Next epoch in (0, horizon], or `None` once the horizon is passed.
    /// Exhaustion is permanent.
    #[inline]
    pub fn next_epoch(&mut self) -> Option<f64> {
        if self.t > self.horizon {
            return None;
        }
        self.t += self.gen.exponential();
        if self.t > self.horizon {
            self.t = f64::INFINITY;
            None
        } else {
            Some(self.t)
        }
    }
}

/// A single site's clock as seen by the event loop. Generated streams are
/// the normal case; explicit lists exist so tests can inject doctored
/// clocks behind the same interface.
#[derive(Debug, Clone)]
pub enum SiteClock {
    Gen(EpochStream),
    List { epochs: Vec<f64>, pos: usize },
}

impl SiteClock {
    #[inline]
    pub fn next_epoch(&mut self) -> Option<f64> {
        match self {
            SiteClock::Gen(s) => s.next_epoch(),
            SiteClock::List { epochs, pos } => {
                let e = epochs.get(*pos).copied();
                if e.is_some() {
                    *pos += 1;
                }
                e
            }
        }
    }

    /// Drop epochs at times <= t; the next draw is strictly later than t.
    #[inline]
    pub fn skip_through(&mut self, t: f64) -> Option<f64> {
        loop {
            match self.next_epoch() {
                Some(e) if e <= t => continue,
                other => return other,
            }
        }
    }
}

/// Read-only source of per-site Poisson clocks.
pub trait Clocks {
    fn site_range(&self) -> SiteRange;
    fn horizon(&self) -> f64;
    fn clock(&self, site: i64) -> Result<SiteClock>;

    fn check_site(&self, site: i64) -> Result<()> {
        let r = self.site_range();
        if r.contains(site) {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!(
                "site {site} outside materialized range [{}, {}]",
                r.lo, r.hi
            )))
        }
    }
}

impl<C: Clocks + ?Sized> Clocks for &C {
    fn site_range(&self) -> SiteRange {
        (**self).site_range()
    }
    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
    fn clock(&self, site: i64) -> Result<SiteClock> {
        (**self).clock(site)
    }
}

/// Mutually independent rate-1 Poisson processes, one per site of
/// `site_range`, on the time window (0, horizon].
///
/// Immutable after construction; the per-site epoch lists are materialized
/// on first access and cached, so sharing a system read-only across threads
/// is safe.
#[derive(Debug)]
pub struct HarrisSystem {
    seed: u64,
    range: SiteRange,
    horizon: f64,
    lists: Vec<OnceLock<Box<[f64]>>>,
}

impl HarrisSystem {
    pub fn build(seed: u64, range: SiteRange, horizon: f64) -> Result<Self> {
        if range.is_empty() {
            return Err(Error::invalid(format!(
                "empty site range [{}, {}]",
                range.lo, range.hi
            )));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        let mut lists = Vec::with_capacity(range.len());
        lists.resize_with(range.len(), OnceLock::new);
        Ok(HarrisSystem {
            seed,
            range,
            horizon,
            lists,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sorted epochs of one site, materialized and cached on first access.
    pub fn epochs(&self, site: i64) -> Result<&[f64]> {
        self.check_site(site)?;
        let idx = (site - self.range.lo) as usize;
        Ok(self.lists[idx].get_or_init(|| {
            let mut s = EpochStream::new(self.seed, site, self.horizon);
            let mut v = Vec::new();
            while let Some(e) = s.next_epoch() {
                v.push(e);
            }
            v.into_boxed_slice()
        }))
    }

    /// View of this system with every site index translated by `k`:
    /// the view's site `i` carries the epochs of base site `i + k`.
    pub fn shifted(&self, k: i64) -> ShiftedClockView<'_, HarrisSystem> {
        ShiftedClockView { base: self, shift: k }
    }
}

impl Clocks for HarrisSystem {
    fn site_range(&self) -> SiteRange {
        self.range
    }
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn clock(&self, site: i64) -> Result<SiteClock> {
        self.check_site(site)?;
        Ok(SiteClock::Gen(EpochStream::new(self.seed, site, self.horizon)))
    }
}

/// Index-shifted view of a clock source. Epoch values are shared exactly:
/// `view.clock(i)` is `base.clock(i + k)`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedClockView<'a, C: Clocks + ?Sized> {
    base: &'a C,
    shift: i64,
}

impl<'a, C: Clocks + ?Sized> ShiftedClockView<'a, C> {
    pub fn new(base: &'a C, shift: i64) -> Self {
        ShiftedClockView { base, shift }
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Composition of shifts: shifting a shift-a view by b views base
    /// sites translated by a+b.
    pub fn shifted(&self, k: i64) -> ShiftedClockView<'a, C> {
        ShiftedClockView {
            base: self.base,
            shift: self.shift + k,
        }
    }
}

impl<'a, C: Clocks + ?Sized> Clocks for ShiftedClockView<'a, C> {
    fn site_range(&self) -> SiteRange {
        self.base.site_range().shifted(self.shift)
    }
    fn horizon(&self) -> f64 {
        self.base.horizon()
    }
    fn clock(&self, site: i64) -> Result<SiteClock> {
        self.base.clock(site + self.shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(clock: &mut SiteClock) -> Vec<f64> {
        let mut v = Vec::new();
        while let Some(e) = clock.next_epoch() {
            v.push(e);
        }
        v
    }

    #[test]
    fn build_rejects_bad_arguments() {
        assert!(HarrisSystem::build(1, SiteRange::new(0, -1), 1.0).is_err());
        assert!(HarrisSystem::build(1, SiteRange::new(0, 0), 0.0).is_err());
        assert!(HarrisSystem::build(1, SiteRange::new(0, 0), -3.0).is_err());
    }

    #[test]
    fn vanishing_horizon_leaves_sites_empty() {
        let h = HarrisSystem::build(1, SiteRange::new(0, 0), 1e-9).unwrap();
        assert!(h.epochs(0).unwrap().is_empty());
    }

    #[test]
    fn same_seed_gives_identical_event_lists() {
        let a = HarrisSystem::build(9, SiteRange::new(-5, 5), 20.0).unwrap();
        let b = HarrisSystem::build(9, SiteRange::new(-5, 5), 20.0).unwrap();
        for site in -5..=5 {
            assert_eq!(a.epochs(site).unwrap(), b.epochs(site).unwrap());
        }
    }

    #[test]
    fn epochs_are_strictly_increasing_and_within_horizon() {
        let h = HarrisSystem::build(3, SiteRange::new(-20, 20), 30.0).unwrap();
        for site in -20..=20 {
            let e = h.epochs(site).unwrap();
            for w in e.windows(2) {
                assert!(w[0] < w[1]);
            }
            if let Some(last) = e.last() {
                assert!(*last <= 30.0);
                assert!(e[0] > 0.0);
            }
        }
    }

    #[test]
    fn stream_matches_materialized_list() {
        let h = HarrisSystem::build(17, SiteRange::new(0, 3), 50.0).unwrap();
        for site in 0..=3 {
            let mut c = h.clock(site).unwrap();
            assert_eq!(collect(&mut c), h.epochs(site).unwrap());
        }
    }

    #[test]
    fn extension_stability() {
        let small = HarrisSystem::build(5, SiteRange::new(0, 10), 40.0).unwrap();
        let large = HarrisSystem::build(5, SiteRange::new(-50, 50), 40.0).unwrap();
        for site in 0..=10 {
            assert_eq!(small.epochs(site).unwrap(), large.epochs(site).unwrap());
        }
    }

    #[test]
    fn access_outside_range_errors() {
        let h = HarrisSystem::build(1, SiteRange::new(0, 4), 1.0).unwrap();
        assert!(h.epochs(5).is_err());
        assert!(h.clock(-1).is_err());
        assert!(h.shifted(3).clock(2).is_err());
    }

    #[test]
    fn shifted_view_matches_base_exactly() {
        let h = HarrisSystem::build(23, SiteRange::new(-10, 10), 25.0).unwrap();
        let v = h.shifted(3);
        let mut c = v.clock(2).unwrap();
        assert_eq!(collect(&mut c), h.epochs(5).unwrap());
        // identity shift
        let mut c0 = h.shifted(0).clock(-4).unwrap();
        assert_eq!(collect(&mut c0), h.epochs(-4).unwrap());
    }

    #[test]
    fn shift_composition() {
        let h = HarrisSystem::build(23, SiteRange::new(-10, 10), 25.0).unwrap();
        let ab = h.shifted(2).shifted(-5);
        let direct = h.shifted(-3);
        assert_eq!(ab.site_range(), direct.site_range());
        let mut x = ab.clock(1).unwrap();
        let mut y = direct.clock(1).unwrap();
        assert_eq!(collect(&mut x), collect(&mut y));
    }

    #[test]
    fn mean_count_matches_horizon_over_many_sites() {
        // 2001 sites at horizon 50: the sample mean of counts sits in [48, 52].
        let h = HarrisSystem::build(1, SiteRange::new(-1000, 1000), 50.0).unwrap();
        let total: usize = (-1000..=1000).map(|s| h.epochs(s).unwrap().len()).sum();
        let mean = total as f64 / 2001.0;
        assert!((48.0..=52.0).contains(&mean), "mean count {mean}");
    }

    #[test]
    fn adjacent_site_counts_are_uncorrelated() {
        let h = HarrisSystem::build(77, SiteRange::new(0, 10_000), 10.0).unwrap();
        let counts: Vec<f64> = (0..=10_000)
            .map(|s| h.epochs(s).unwrap().len() as f64)
            .collect();
        let n = counts.len() - 1;
        let xs = &counts[..n];
        let ys = &counts[1..];
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for i in 0..n {
            cov += (xs[i] - mx) * (ys[i] - my);
            vx += (xs[i] - mx).powi(2);
            vy += (ys[i] - my).powi(2);
        }
        let corr = cov / (vx.sqrt() * vy.sqrt());
        assert!(corr.abs() < 0.05, "adjacent-site correlation {corr}");
    }

    #[test]
    fn no_two_epochs_coincide_across_sites() {
        let h = HarrisSystem::build(13, SiteRange::new(-100, 100), 20.0).unwrap();
        let mut all = Vec::new();
        for s in -100..=100 {
            all.extend_from_slice(h.epochs(s).unwrap());
        }
        all.sort_by(f64::total_cmp);
        for w in all.windows(2) {
            assert!(w[0] < w[1], "coinciding epochs {}", w[0]);
        }
    }
}
