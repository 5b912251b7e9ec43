//! Height (server) representation of the exclusion process and the coupled
//! interface processes.
//!
//! A height function `z` with increments `z(x) - z(x-1)` in {0, 1} encodes a
//! particle configuration; `z(i)` drops by one at an epoch of site `i`
//! whenever the drop keeps both adjacent increments in {0, 1}. Interface
//! processes grow from a wedge and consume the same clocks through an index
//! shift; the running supremum of `z0(k) - xi_k(i - k)` over the shift label
//! `k` reproduces the directly evolved height exactly, event by event, and
//! that identity is what the coupling verifier checks. A pair of heights that
//! differ by a single unit step localizes the second-class particle: the step
//! position moves exactly like the marker in the particle picture.

use crate::error::{Error, Result};
use crate::events::{self, Dynamics};
use crate::harris::{Clocks, ShiftedClockView, SiteRange};
use crate::tasep::{Cell, OccupancyState};

/// Sites beyond which no information can travel from a point within time
/// `t`, with ten standard deviations of slack on the Poisson step count.
pub fn influence_margin(t: f64) -> i64 {
    (t + 10.0 * t.sqrt() + 10.0).ceil() as i64
}

/// Integer height profile on an inclusive site interval, with every
/// adjacent increment in {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightProcess {
    lo: i64,
    z: Vec<i64>,
    t: f64,
}

impl HeightProcess {
    /// Wrap explicit values; rejects profiles with increments outside {0, 1}.
    pub fn new(lo: i64, z: Vec<i64>, t: f64) -> Result<Self> {
        let h = HeightProcess { lo, z, t };
        h.validate()?;
        Ok(h)
    }

    pub fn site_range(&self) -> SiteRange {
        SiteRange::new(self.lo, self.lo + self.z.len() as i64 - 1)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn get(&self, site: i64) -> i64 {
        debug_assert!(self.site_range().contains(site));
        self.z[(site - self.lo) as usize]
    }

    pub fn values(&self) -> &[i64] {
        &self.z
    }

    /// Occupancy indicator recovered by differencing: defined for sites
    /// strictly above the domain's lower end.
    pub fn occupancy(&self, site: i64) -> u8 {
        (self.get(site) - self.get(site - 1)) as u8
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.z.windows(2) {
            let d = w[1] - w[0];
            if !(0..=1).contains(&d) {
                return Err(Error::Internal(format!(
                    "height increment {d} outside {{0, 1}}"
                )));
            }
        }
        Ok(())
    }
}

/// Height of a particle configuration, anchored so that `z(0) = 0`.
/// The domain is `[window.lo - 1, window.hi]`, one site wider to the left
/// than the window so every window site has a well-defined increment.
/// `second_class_as` chooses whether the marker's site counts as occupied.
pub fn height_from_config(state: &OccupancyState, second_class_as: u8) -> HeightProcess {
    assert!(second_class_as <= 1, "second_class_as must be 0 or 1");
    let w = state.window();
    assert!(
        w.contains(0),
        "anchoring at the origin needs the window to contain it"
    );
    let occ = |x: i64| -> i64 {
        match state.cell(x) {
            Cell::Empty => 0,
            Cell::First => 1,
            Cell::Second => second_class_as as i64,
        }
    };
    let mut z = vec![0i64; w.len() + 1];
    // z index i corresponds to site w.lo - 1 + i
    let anchor_idx = (0 - (w.lo - 1)) as usize;
    // forward from the anchor
    for x in 1..=w.hi {
        let i = (x - (w.lo - 1)) as usize;
        z[i] = z[i - 1] + occ(x);
    }
    // backward from the anchor
    for x in (w.lo..=0).rev() {
        let i = (x - (w.lo - 1)) as usize;
        z[i - 1] = z[i] - occ(x);
    }
    debug_assert_eq!(z[anchor_idx], 0);
    HeightProcess {
        lo: w.lo - 1,
        z,
        t: state.time(),
    }
}

/// Occupancy bits recovered from a height profile, one per site strictly
/// above the domain's lower end.
pub fn config_from_height(z: &HeightProcess) -> Vec<u8> {
    let r = z.site_range();
    ((r.lo + 1)..=r.hi).map(|x| z.occupancy(x)).collect()
}

struct HeightDynamics<'a> {
    lo: i64,
    hi: i64,
    z: &'a mut [i64],
}

impl HeightDynamics<'_> {
    #[inline]
    fn v(&self, site: i64) -> i64 {
        self.z[(site - self.lo) as usize]
    }
}

impl Dynamics for HeightDynamics<'_> {
    fn movable_span(&self) -> (i64, i64) {
        (self.lo + 1, self.hi - 1)
    }

    #[inline]
    fn can_fire(&self, site: i64) -> bool {
        // dropping z(site) by one must keep both adjacent increments in {0,1}
        self.v(site) - self.v(site - 1) == 1 && self.v(site + 1) == self.v(site)
    }

    #[inline]
    fn fire(&mut self, _t: f64, site: i64, _fronts: (i64, i64)) {
        self.z[(site - self.lo) as usize] -= 1;
        debug_assert!(self.v(site) - self.v(site - 1) >= 0);
        debug_assert!(self.v(site + 1) - self.v(site) <= 1);
    }
}

/// Advance a height profile to `t_end` on the given clocks. The two edge
/// sites of the domain never move; size the domain so the queried region
/// stays inside the information cone of the interior.
pub fn evolve_height<C: Clocks>(z: &mut HeightProcess, clocks: &C, t_end: f64) -> Result<()> {
    let r = z.site_range();
    let t0 = z.t;
    let mut dynamics = HeightDynamics {
        lo: r.lo,
        hi: r.hi,
        z: &mut z.z,
    };
    events::drive(&mut dynamics, clocks, t0, t_end, None)?;
    z.t = t_end;
    Ok(())
}

/// Growing wedge interface driven by clocks shifted by its label:
/// site `i` of interface `k` listens to base clock `i + k`.
#[derive(Debug, Clone)]
pub struct InterfaceProcess {
    label: i64,
    lo: i64,
    xi: Vec<i64>,
    t: f64,
}

impl InterfaceProcess {
    pub fn label(&self) -> i64 {
        self.label
    }

    pub fn site_range(&self) -> SiteRange {
        SiteRange::new(self.lo, self.lo + self.xi.len() as i64 - 1)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn get(&self, site: i64) -> i64 {
        debug_assert!(self.site_range().contains(site));
        self.xi[(site - self.lo) as usize]
    }

    /// Wedge initial level: 0 on the right half line, a unit staircase on
    /// the left.
    pub fn initial_level(site: i64) -> i64 {
        (-site).max(0)
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.xi.windows(2) {
            let d = w[0] - w[1];
            if !(0..=1).contains(&d) {
                return Err(Error::Internal(format!(
                    "interface increment {d} outside {{0, 1}}"
                )));
            }
        }
        Ok(())
    }
}

struct InterfaceDynamics<'a> {
    lo: i64,
    hi: i64,
    xi: &'a mut [i64],
}

impl InterfaceDynamics<'_> {
    #[inline]
    fn v(&self, site: i64) -> i64 {
        self.xi[(site - self.lo) as usize]
    }
}

impl Dynamics for InterfaceDynamics<'_> {
    fn movable_span(&self) -> (i64, i64) {
        (self.lo + 1, self.hi - 1)
    }

    #[inline]
    fn can_fire(&self, site: i64) -> bool {
        // growth by one must keep both adjacent left-decreasing increments
        // in {0,1}: requires a full step down from the left neighbour and a
        // flat pair with the right neighbour
        self.v(site - 1) - self.v(site) == 1 && self.v(site) == self.v(site + 1)
    }

    #[inline]
    fn fire(&mut self, _t: f64, site: i64, _fronts: (i64, i64)) {
        self.xi[(site - self.lo) as usize] += 1;
    }
}

/// Grow interface `k` from the wedge to time `t_end`, on clocks shifted by
/// `k`. The array is sized so that the frozen edges cannot influence any
/// site of `query` within the horizon.
pub fn evolve_interface<C: Clocks>(
    clocks: &C,
    k: i64,
    t_end: f64,
    query: SiteRange,
) -> Result<InterfaceProcess> {
    if query.is_empty() {
        return Err(Error::invalid("empty interface query range"));
    }
    let w = influence_margin(t_end);
    let lo = query.lo - w;
    let hi = query.hi + w;
    let view = ShiftedClockView::new(clocks, k);
    let vr = view.site_range();
    if !vr.contains(lo + 1) || !vr.contains(hi - 1) {
        return Err(Error::OutOfRange(format!(
            "interface {k} needs shifted clocks on [{}, {}], have [{}, {}]",
            lo + 1,
            hi - 1,
            vr.lo,
            vr.hi
        )));
    }
    let mut xi: Vec<i64> = (lo..=hi).map(InterfaceProcess::initial_level).collect();
    let mut dynamics = InterfaceDynamics {
        lo,
        hi,
        xi: &mut xi,
    };
    events::drive(&mut dynamics, &view, 0.0, t_end, None)?;
    Ok(InterfaceProcess {
        label: k,
        lo,
        xi,
        t: t_end,
    })
}

/// Label span that provably saturates the envelope at `(i, t)`:
/// labels above `i + delta` can never win, labels below `i - t - delta`
/// lose once the interface growth is accounted for.
pub fn required_label_range(i: i64, t: f64) -> SiteRange {
    let delta = (10.0 * t.sqrt()).ceil() as i64 + 10;
    SiteRange::new(i - t.ceil() as i64 - delta, i + delta)
}

/// Envelope evaluation of the height at `(i, t)`: the supremum over labels
/// `k` of `z0(k) - xi_k(i - k)`, every interface grown on clocks shifted by
/// its label. `k_range` must cover [`required_label_range`] and lie inside
/// the domain of `z0`.
pub fn variational_sup<C: Clocks>(
    z0: &HeightProcess,
    clocks: &C,
    i: i64,
    t: f64,
    k_range: SiteRange,
) -> Result<i64> {
    let need = required_label_range(i, t);
    if k_range.lo > need.lo || k_range.hi < need.hi {
        return Err(Error::invalid(format!(
            "label range [{}, {}] narrower than required [{}, {}]",
            k_range.lo, k_range.hi, need.lo, need.hi
        )));
    }
    let zr = z0.site_range();
    if !zr.contains(k_range.lo) || !zr.contains(k_range.hi) {
        return Err(Error::OutOfRange(format!(
            "label range [{}, {}] outside initial height domain [{}, {}]",
            k_range.lo, k_range.hi, zr.lo, zr.hi
        )));
    }
    let mut best = i64::MIN;
    for k in k_range.iter() {
        let site = i - k;
        let xi = evolve_interface(clocks, k, t, SiteRange::new(site, site))?;
        best = best.max(z0.get(k) - xi.get(site));
    }
    Ok(best)
}

/// One disagreement between the direct evolution and the envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMismatch {
    pub site: i64,
    pub t: f64,
    pub direct: i64,
    pub variational: i64,
}

#[derive(Debug, Clone, Default)]
pub struct CouplingReport {
    pub checked: usize,
    pub mismatches: Vec<CouplingMismatch>,
}

impl CouplingReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Check the envelope identity at every site of `query` and every time in
/// `ts`, reusing one interface evolution per label. The identity is exact:
/// any mismatch indicates a bug (or deliberately doctored clocks).
pub fn verify_coupling<C: Clocks>(
    z0: &HeightProcess,
    clocks: &C,
    ts: &[f64],
    query: SiteRange,
) -> Result<CouplingReport> {
    if query.is_empty() {
        return Err(Error::invalid("empty coupling query range"));
    }
    let mut report = CouplingReport::default();
    for &t in ts {
        // direct side, evolved fresh from z0 on the same clocks
        let mut direct = z0.clone();
        evolve_height(&mut direct, clocks, t)?;

        // envelope side: one interface per label, each covering every
        // queried site for its label
        let lo_need = required_label_range(query.lo, t).lo;
        let hi_need = required_label_range(query.hi, t).hi;
        let k_range = SiteRange::new(lo_need, hi_need);
        let zr = z0.site_range();
        if !zr.contains(k_range.lo) || !zr.contains(k_range.hi) {
            return Err(Error::OutOfRange(format!(
                "initial height domain [{}, {}] too narrow for labels [{}, {}]",
                zr.lo, zr.hi, k_range.lo, k_range.hi
            )));
        }
        let mut sup = vec![i64::MIN; query.len()];
        for k in k_range.iter() {
            let sites = SiteRange::new(query.lo - k, query.hi - k);
            let xi = evolve_interface(clocks, k, t, sites)?;
            let zk = z0.get(k);
            for (j, i) in query.iter().enumerate() {
                sup[j] = sup[j].max(zk - xi.get(i - k));
            }
        }
        for (j, i) in query.iter().enumerate() {
            report.checked += 1;
            let d = direct.get(i);
            if d != sup[j] {
                report.mismatches.push(CouplingMismatch {
                    site: i,
                    t,
                    direct: d,
                    variational: sup[j],
                });
            }
        }
    }
    Ok(report)
}

/// Two heights on shared clocks whose difference is the unit step
/// `1[u >= step_site]`; the step position is the second-class location.
#[derive(Debug, Clone)]
pub struct HeightPair {
    z: HeightProcess,
    z_prime: HeightProcess,
    step_site: i64,
}

impl HeightPair {
    /// Build the pair from a configuration carrying the marker: `z` counts
    /// the marker's site as empty and `z_prime` is `z` plus the unit step
    /// at the marker.
    pub fn from_state(state: &OccupancyState) -> Result<Self> {
        let z = height_from_config(state, 0);
        let step_site = state.second_class_site();
        let r = z.site_range();
        let z_prime = HeightProcess {
            lo: r.lo,
            z: r
                .iter()
                .map(|u| z.get(u) + i64::from(u >= step_site))
                .collect(),
            t: z.t,
        };
        let pair = HeightPair {
            z,
            z_prime,
            step_site,
        };
        pair.check_step()?;
        Ok(pair)
    }

    pub fn step_site(&self) -> i64 {
        self.step_site
    }

    pub fn heights(&self) -> (&HeightProcess, &HeightProcess) {
        (&self.z, &self.z_prime)
    }

    /// Full-array check that the difference is exactly the unit step.
    pub fn check_step(&self) -> Result<()> {
        let r = self.z.site_range();
        for u in r.iter() {
            let expect = i64::from(u >= self.step_site);
            if self.z_prime.get(u) - self.z.get(u) != expect {
                return Err(Error::Internal(format!(
                    "step invariant broken at site {u}: z'={} z={} step={}",
                    self.z_prime.get(u),
                    self.z.get(u),
                    self.step_site
                )));
            }
        }
        self.z.validate()?;
        self.z_prime.validate()
    }
}

struct PairDynamics<'a> {
    lo: i64,
    hi: i64,
    z: &'a mut [i64],
    zp: &'a mut [i64],
    step: &'a mut i64,
    moves: &'a mut Vec<(f64, i64)>,
    verify_full: bool,
    violation: &'a mut Option<String>,
}

impl PairDynamics<'_> {
    #[inline]
    fn zi(&self, site: i64) -> i64 {
        self.z[(site - self.lo) as usize]
    }
    #[inline]
    fn zpi(&self, site: i64) -> i64 {
        self.zp[(site - self.lo) as usize]
    }
    #[inline]
    fn can_z(&self, site: i64) -> bool {
        self.zi(site) - self.zi(site - 1) == 1 && self.zi(site + 1) == self.zi(site)
    }
    #[inline]
    fn can_zp(&self, site: i64) -> bool {
        self.zpi(site) - self.zpi(site - 1) == 1 && self.zpi(site + 1) == self.zpi(site)
    }
}

impl Dynamics for PairDynamics<'_> {
    fn movable_span(&self) -> (i64, i64) {
        (self.lo + 1, self.hi - 1)
    }

    #[inline]
    fn can_fire(&self, site: i64) -> bool {
        self.can_z(site) || self.can_zp(site)
    }

    fn fire(&mut self, t: f64, site: i64, _fronts: (i64, i64)) {
        let mz = self.can_z(site);
        let mzp = self.can_zp(site);
        if mz {
            self.z[(site - self.lo) as usize] -= 1;
        }
        if mzp {
            self.zp[(site - self.lo) as usize] -= 1;
        }
        match (mz, mzp) {
            (true, false) => {
                // only the marker-free height dropped: the step slides left
                if site != *self.step - 1 && self.violation.is_none() {
                    *self.violation =
                        Some(format!("left slide fired at {site}, step at {}", *self.step));
                }
                *self.step = site;
                self.moves.push((t, site));
            }
            (false, true) => {
                // only the marker-carrying height dropped: the step slides right
                if site != *self.step && self.violation.is_none() {
                    *self.violation =
                        Some(format!("right slide fired at {site}, step at {}", *self.step));
                }
                *self.step = site + 1;
                self.moves.push((t, site + 1));
            }
            _ => {}
        }
        if self.verify_full && self.violation.is_none() {
            for u in self.lo..=self.hi {
                let d = self.zp[(u - self.lo) as usize] - self.z[(u - self.lo) as usize];
                if d != i64::from(u >= *self.step) {
                    *self.violation = Some(format!(
                        "difference at site {u} is {d} after event at ({t}, {site})"
                    ));
                    break;
                }
            }
        }
    }
}

/// Evolve both heights of the pair on the same clocks and return the step
/// trajectory as `(time, new step position)` samples. With `verify_full`
/// the unit-step difference is re-checked across the whole array after
/// every single event.
pub fn track_second_class<C: Clocks>(
    pair: &mut HeightPair,
    clocks: &C,
    t_end: f64,
    verify_full: bool,
) -> Result<Vec<(f64, i64)>> {
    pair.check_step()?;
    let r = pair.z.site_range();
    let t0 = pair.z.t;
    let mut moves = Vec::new();
    let mut violation = None;
    let mut dynamics = PairDynamics {
        lo: r.lo,
        hi: r.hi,
        z: &mut pair.z.z,
        zp: &mut pair.z_prime.z,
        step: &mut pair.step_site,
        moves: &mut moves,
        verify_full,
        violation: &mut violation,
    };
    events::drive(&mut dynamics, clocks, t0, t_end, None)?;
    if let Some(msg) = violation {
        return Err(Error::Internal(format!("step invariant broken: {msg}")));
    }
    pair.z.t = t_end;
    pair.z_prime.t = t_end;
    pair.check_step()?;
    Ok(moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::HarrisSystem;
    use crate::tasep::{self, ShockInitialCondition};

    fn random_config_state(seed: u64, l: i64, lambda: f64, rho: f64) -> OccupancyState {
        tasep::init_shock(ShockInitialCondition::new(lambda, rho).unwrap(), l, seed).unwrap()
    }

    #[test]
    fn height_of_empty_config_is_flat() {
        let s = random_config_state(1, 10, 0.0, 0.0);
        let z = height_from_config(&s, 0);
        assert!(z.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn height_of_deterministic_shock() {
        // marker counted as occupied: z(x) = x for x < 0, 0 for x >= 0
        let s = random_config_state(1, 10, 1.0, 0.0);
        let z = height_from_config(&s, 1);
        for x in -11..=10 {
            assert_eq!(z.get(x), x.min(0), "z({x})");
        }
        // marker counted as empty: heights left of the origin sit one higher
        let z0 = height_from_config(&s, 0);
        for x in -11..=10 {
            assert_eq!(z0.get(x), if x < 0 { x + 1 } else { 0 }, "z0({x})");
        }
    }

    #[test]
    fn config_round_trips_through_height() {
        for seed in 0..20u64 {
            let s = random_config_state(seed, 30, 0.6, 0.3);
            for conv in [0u8, 1] {
                let z = height_from_config(&s, conv);
                z.validate().unwrap();
                let bits = config_from_height(&z);
                let expect: Vec<u8> = s
                    .window()
                    .iter()
                    .map(|x| match s.cell(x) {
                        Cell::Empty => 0,
                        Cell::First => 1,
                        Cell::Second => conv,
                    })
                    .collect();
                assert_eq!(bits, expect);
            }
        }
    }

    #[test]
    fn empty_height_never_moves() {
        let h = HarrisSystem::build(3, SiteRange::new(-20, 20), 10.0).unwrap();
        let mut z = HeightProcess::new(-20, vec![0; 41], 0.0).unwrap();
        evolve_height(&mut z, &h, 10.0).unwrap();
        assert!(z.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn single_particle_walks_right_at_its_own_epochs() {
        for seed in 0..10u64 {
            let h = HarrisSystem::build(seed, SiteRange::new(-5, 60), 8.0).unwrap();
            // particle at 0: z = 0 below 0, 1 from 0 on
            let z0: Vec<i64> = (-5..=60).map(|x| i64::from(x >= 0)).collect();
            let mut z = HeightProcess::new(-5, z0, 0.0).unwrap();
            evolve_height(&mut z, &h, 8.0).unwrap();

            // oracle: walk right through merged epochs of the visited sites
            let mut pos = 0i64;
            let mut t = 0.0f64;
            loop {
                let next = h
                    .epochs(pos)
                    .unwrap()
                    .iter()
                    .copied()
                    .find(|&e| e > t && e <= 8.0);
                match next {
                    Some(e) => {
                        t = e;
                        pos += 1;
                    }
                    None => break,
                }
            }
            let expect: Vec<i64> = (-5..=60).map(|x| i64::from(x >= pos)).collect();
            assert_eq!(z.values(), &expect[..], "seed {seed}");
        }
    }

    #[test]
    fn height_evolution_commutes_with_particle_picture() {
        // marker counted as occupied makes the combined system itself an
        // exclusion process; evolving the height and differencing must give
        // the evolved configuration. The absolute level differs by the
        // (origin-edge) crossing count, so the comparison is on increments.
        for seed in 0..50u64 {
            let l = 100;
            let h = HarrisSystem::build(seed, SiteRange::new(-l - 1, l), 5.0).unwrap();
            let mut s = random_config_state(seed, l, 0.7, 0.2);
            let mut z = height_from_config(&s, 1);
            tasep::evolve(&mut s, &h, 5.0).unwrap();
            evolve_height(&mut z, &h, 5.0).unwrap();
            let bits = config_from_height(&z);
            let expect: Vec<u8> = s
                .window()
                .iter()
                .map(|x| u8::from(s.cell(x) != Cell::Empty))
                .collect();
            assert_eq!(bits, expect, "seed {seed}");
            // the level offset is constant across the whole domain
            let z_after = height_from_config(&s, 1);
            let offs: Vec<i64> = z
                .values()
                .iter()
                .zip(z_after.values())
                .map(|(a, b)| a - b)
                .collect();
            assert!(offs.windows(2).all(|w| w[0] == w[1]), "seed {seed}");
            assert!(offs[0] <= 0, "crossings cannot raise the height");
        }
    }

    #[test]
    fn interface_initial_condition_and_growth_bounds() {
        let h = HarrisSystem::build(5, SiteRange::new(-200, 200), 12.0).unwrap();
        let xi = evolve_interface(&h, 0, 12.0, SiteRange::new(-40, 40)).unwrap();
        xi.validate().unwrap();
        // nondecreasing in time from the wedge
        for i in -40..=40 {
            assert!(xi.get(i) >= InterfaceProcess::initial_level(i));
        }
        // one growth per epoch at the shifted site
        for i in -40..=40 {
            let cap = h.epochs(i).unwrap().iter().filter(|&&e| e <= 12.0).count() as i64;
            assert!(xi.get(i) - InterfaceProcess::initial_level(i) <= cap);
        }
        // far left of the growth cone the staircase is untouched (reaching
        // site -40 by time 12 needs ~41 epochs along one column)
        assert_eq!(xi.get(-40), 40);
    }

    #[test]
    fn interface_is_nondecreasing_in_time() {
        let h = HarrisSystem::build(9, SiteRange::new(-150, 150), 10.0).unwrap();
        let early = evolve_interface(&h, 0, 5.0, SiteRange::new(-20, 20)).unwrap();
        let late = evolve_interface(&h, 0, 10.0, SiteRange::new(-20, 20)).unwrap();
        for i in -20..=20 {
            assert!(late.get(i) >= early.get(i));
        }
    }

    #[test]
    fn interface_shift_equivariance() {
        // interface with label k on base clocks == interface with label 0
        // on clocks pre-shifted by k, exactly
        let h = HarrisSystem::build(31, SiteRange::new(-200, 200), 9.0).unwrap();
        for k in [-7i64, -1, 0, 3, 12] {
            let direct = evolve_interface(&h, k, 9.0, SiteRange::new(-25, 25)).unwrap();
            let view = h.shifted(k);
            let via_view = evolve_interface(&view, 0, 9.0, SiteRange::new(-25, 25)).unwrap();
            for i in -25..=25 {
                assert_eq!(direct.get(i), via_view.get(i), "k={k} i={i}");
            }
        }
    }

    #[test]
    fn envelope_at_time_zero_returns_initial_height() {
        let s = random_config_state(3, 120, 0.5, 0.1);
        let z0 = height_from_config(&s, 0);
        let h = HarrisSystem::build(3, SiteRange::new(-121, 120), 1.0).unwrap();
        for i in [-10i64, 0, 7] {
            let v = variational_sup(&z0, &h, i, 0.0, required_label_range(i, 0.0)).unwrap();
            assert_eq!(v, z0.get(i));
        }
    }

    #[test]
    fn envelope_matches_direct_evolution() {
        for seed in 0..10u64 {
            let s = random_config_state(seed, 120, 0.6, 0.2);
            let z0 = height_from_config(&s, 0);
            let h = HarrisSystem::build(seed, SiteRange::new(-121, 120), 5.0).unwrap();
            let report =
                verify_coupling(&z0, &h, &[1.0, 5.0], SiteRange::new(-15, 15)).unwrap();
            assert!(report.pass(), "seed {seed}: {:?}", report.mismatches);
            assert_eq!(report.checked, 2 * 31);
        }
    }

    #[test]
    fn envelope_saturates_once_label_range_is_wide_enough() {
        for seed in 0..100u64 {
            let s = random_config_state(seed, 90, 0.5, 0.25);
            let z0 = height_from_config(&s, 0);
            let h = HarrisSystem::build(seed, SiteRange::new(-91, 90), 3.0).unwrap();
            let i = (seed as i64 % 7) - 3;
            let base = required_label_range(i, 3.0);
            let v1 = variational_sup(&z0, &h, i, 3.0, base).unwrap();
            let wide = SiteRange::new(base.lo - 15, base.hi + 15);
            let v2 = variational_sup(&z0, &h, i, 3.0, wide).unwrap();
            assert_eq!(v1, v2, "seed {seed}");
        }
    }

    #[test]
    fn narrow_label_range_is_rejected() {
        let s = random_config_state(3, 60, 0.5, 0.1);
        let z0 = height_from_config(&s, 0);
        let h = HarrisSystem::build(3, SiteRange::new(-61, 60), 4.0).unwrap();
        let narrow = SiteRange::new(-3, 3);
        assert!(variational_sup(&z0, &h, 0, 4.0, narrow).is_err());
    }

    #[test]
    fn pair_without_epochs_keeps_its_step() {
        let s = random_config_state(2, 15, 0.4, 0.2);
        let mut pair = HeightPair::from_state(&s).unwrap();
        let h = HarrisSystem::build(2, SiteRange::new(-16, 15), 1e-9).unwrap();
        let moves = track_second_class(&mut pair, &h, 1e-9, true).unwrap();
        assert!(moves.is_empty());
        assert_eq!(pair.step_site(), 0);
    }

    #[test]
    fn pair_step_follows_particle_marker_exactly() {
        for seed in 0..30u64 {
            let l = 60;
            let s = random_config_state(seed, l, 0.8, 0.1);
            let h = HarrisSystem::build(seed, SiteRange::new(-l - 1, l), 10.0).unwrap();

            let mut pair = HeightPair::from_state(&s).unwrap();
            let pair_moves = track_second_class(&mut pair, &h, 10.0, false).unwrap();

            let mut ps = s.clone();
            let traj = tasep::evolve(&mut ps, &h, 10.0).unwrap();
            let particle_moves: Vec<(f64, i64)> =
                traj.moves.iter().map(|p| (p.time, p.site)).collect();

            assert_eq!(pair_moves, particle_moves, "seed {seed}");
            assert_eq!(pair.step_site(), ps.second_class_site());
        }
    }
}
