//! Totally asymmetric exclusion dynamics on a finite window.
//!
//! Particles jump one site to the right at the epochs of their site's clock,
//! provided the target is empty. One distinguished second-class particle
//! jumps right into empty sites like everyone else but is swapped leftward
//! when a first-class particle jumps onto it. Windows have closed boundaries;
//! two contamination-front walkers certify at runtime how deep any boundary
//! artifact can have reached.

use crate::error::{Error, Result};
use crate::events::{self, Dynamics, FrontPair};
use crate::harris::{Clocks, SiteRange};
use crate::rng::{Domain, SplitMix64};

/// Occupancy of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Empty,
    First,
    Second,
}

/// Two-sided Bernoulli product profile: density `lambda` strictly left of
/// the origin, `rho` strictly right of it.
#[derive(Debug, Clone, Copy)]
pub struct ShockInitialCondition {
    pub lambda: f64,
    pub rho: f64,
}

impl ShockInitialCondition {
    pub fn new(lambda: f64, rho: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("rho", rho)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(ShockInitialCondition { lambda, rho })
    }

    /// The decreasing case is the one whose fan limit and uniform law the
    /// experiments target; `lambda <= rho` still runs but is labelled.
    pub fn is_decreasing(&self) -> bool {
        self.lambda > self.rho
    }

    pub fn label(&self) -> &'static str {
        if self.is_decreasing() {
            "decreasing-shock"
        } else if self.lambda < self.rho {
            "increasing-shock (uniform limit law does not apply)"
        } else {
            "constant-density"
        }
    }
}

/// One recorded second-class move, with the front positions at that instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajPoint {
    pub time: f64,
    pub site: i64,
    pub left_front: i64,
    pub right_front: i64,
}

/// Piecewise-constant second-class path: `site` is the position immediately
/// after each move.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub initial_site: i64,
    pub moves: Vec<TrajPoint>,
}

impl Trajectory {
    pub fn position_at(&self, t: f64) -> i64 {
        let k = self.moves.partition_point(|p| p.time <= t);
        if k == 0 {
            self.initial_site
        } else {
            self.moves[k - 1].site
        }
    }
}

/// Particle configuration on the window `[-L, L]` with one second-class
/// marker, a clock time, and the two contamination fronts.
#[derive(Debug, Clone)]
pub struct OccupancyState {
    window: SiteRange,
    cells: Vec<Cell>,
    t: f64,
    second_class_site: i64,
    left_front: i64,
    right_front: i64,
}

impl OccupancyState {
    pub fn window(&self) -> SiteRange {
        self.window
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn cell(&self, site: i64) -> Cell {
        debug_assert!(self.window.contains(site));
        self.cells[(site - self.window.lo) as usize]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn second_class_site(&self) -> i64 {
        self.second_class_site
    }

    /// Current walker positions `(left, right)`. Sites strictly between them
    /// cannot have felt the window boundary yet.
    pub fn fronts(&self) -> (i64, i64) {
        (self.left_front, self.right_front)
    }

    /// Interior untouched by boundary information, clamped to the window.
    pub fn valid_region(&self) -> SiteRange {
        SiteRange::new(
            (self.left_front + 1).max(self.window.lo),
            (self.right_front - 1).min(self.window.hi),
        )
    }

    pub fn count(&self, kind: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == kind).count()
    }

    /// Drop the second-class marker, leaving the plain first-class TASEP
    /// configuration (its site becomes empty).
    pub fn strip_second_class(&self) -> OccupancyState {
        let mut s = self.clone();
        let idx = (s.second_class_site - s.window.lo) as usize;
        s.cells[idx] = Cell::Empty;
        s
    }
}

/// Build the shock state at time zero: Bernoulli(lambda) on `[-l, -1]`,
/// Bernoulli(rho) on `[1, l]`, the second-class particle at the origin
/// (which carries no first-class particle), fronts resting at `-l-1`
/// and `l+1`.
pub fn init_shock(ic: ShockInitialCondition, l: i64, seed: u64) -> Result<OccupancyState> {
    if l < 1 {
        return Err(Error::invalid(format!("window half-width {l} < 1")));
    }
    let window = SiteRange::new(-l, l);
    let mut cells = Vec::with_capacity(window.len());
    for x in window.iter() {
        let c = if x == 0 {
            Cell::Second
        } else {
            let p = if x < 0 { ic.lambda } else { ic.rho };
            let mut g = SplitMix64::from_parts(seed, Domain::Occupancy, x);
            if g.bernoulli(p) {
                Cell::First
            } else {
                Cell::Empty
            }
        };
        cells.push(c);
    }
    Ok(OccupancyState {
        window,
        cells,
        t: 0.0,
        second_class_site: 0,
        left_front: -l - 1,
        right_front: l + 1,
    })
}

struct ParticleDynamics<'a> {
    lo: i64,
    hi: i64,
    cells: &'a mut [Cell],
    second_site: &'a mut i64,
    moves: &'a mut Vec<TrajPoint>,
}

impl ParticleDynamics<'_> {
    #[inline]
    fn at(&self, site: i64) -> Cell {
        self.cells[(site - self.lo) as usize]
    }

    #[inline]
    fn swap(&mut self, site: i64) {
        let i = (site - self.lo) as usize;
        self.cells.swap(i, i + 1);
    }
}

impl Dynamics for ParticleDynamics<'_> {
    fn movable_span(&self) -> (i64, i64) {
        (self.lo, self.hi - 1)
    }

    #[inline]
    fn can_fire(&self, site: i64) -> bool {
        matches!(
            (self.at(site), self.at(site + 1)),
            (Cell::First, Cell::Empty) | (Cell::First, Cell::Second) | (Cell::Second, Cell::Empty)
        )
    }

    #[inline]
    fn fire(&mut self, t: f64, site: i64, fronts: (i64, i64)) {
        let pair = (self.at(site), self.at(site + 1));
        self.swap(site);
        let new_site = match pair {
            (Cell::First, Cell::Second) => site, // displaced leftward
            (Cell::Second, Cell::Empty) => site + 1,
            _ => return,
        };
        *self.second_site = new_site;
        self.moves.push(TrajPoint {
            time: t,
            site: new_site,
            left_front: fronts.0,
            right_front: fronts.1,
        });
    }
}

/// Advance `state` to `t_end`, consuming every epoch in `(state.t, t_end]`
/// in time order. Returns the second-class trajectory over that span.
///
/// The clock range must cover `[window.lo - 1, window.hi]`: the extra site
/// on the left drives the left front walker before it enters the window.
pub fn evolve<C: Clocks>(
    state: &mut OccupancyState,
    clocks: &C,
    t_end: f64,
) -> Result<Trajectory> {
    if state.t > t_end {
        return Err(Error::invalid(format!(
            "state time {} already past t_end {}",
            state.t, t_end
        )));
    }
    let w = state.window;
    let range = clocks.site_range();
    if !range.contains(w.lo - 1) || !range.contains(w.hi) {
        return Err(Error::OutOfRange(format!(
            "clock range [{}, {}] must cover [{}, {}]",
            range.lo,
            range.hi,
            w.lo - 1,
            w.hi
        )));
    }

    let mut moves = Vec::new();
    let initial_site = state.second_class_site;
    let mut dynamics = ParticleDynamics {
        lo: w.lo,
        hi: w.hi,
        cells: &mut state.cells,
        second_site: &mut state.second_class_site,
        moves: &mut moves,
    };
    let outcome = events::drive(
        &mut dynamics,
        clocks,
        state.t,
        t_end,
        Some(FrontPair {
            left: state.left_front,
            right: state.right_front,
        }),
    )?;
    let fronts = outcome.fronts.expect("fronts were requested");
    state.left_front = fronts.left;
    state.right_front = fronts.right;
    state.t = t_end;
    Ok(Trajectory {
        initial_site,
        moves,
    })
}

/// Weight given to the second-class cell when measuring density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondClassWeight {
    Zero,
    Half,
    One,
}

impl SecondClassWeight {
    fn value(self) -> f64 {
        match self {
            SecondClassWeight::Zero => 0.0,
            SecondClassWeight::Half => 0.5,
            SecondClassWeight::One => 1.0,
        }
    }
}

/// Empirical density over bins of `bin_width` sites tiling the valid region.
/// Returns (bin center, density) pairs; a trailing partial bin is dropped.
pub fn density_profile(
    state: &OccupancyState,
    bin_width: i64,
    second: SecondClassWeight,
) -> Result<Vec<(f64, f64)>> {
    if bin_width < 1 {
        return Err(Error::invalid(format!("bin_width {bin_width} < 1")));
    }
    let region = state.valid_region();
    let mut out = Vec::new();
    let mut start = region.lo;
    while start + bin_width - 1 <= region.hi {
        let mut mass = 0.0;
        for x in start..start + bin_width {
            mass += match state.cell(x) {
                Cell::Empty => 0.0,
                Cell::First => 1.0,
                Cell::Second => second.value(),
            };
        }
        let center = start as f64 + (bin_width - 1) as f64 / 2.0;
        out.push((center, mass / bin_width as f64));
        start += bin_width;
    }
    Ok(out)
}
