//! Experiment harness: replica ensembles of the shock dynamics sampled on a
//! dyadic time grid, the uniform-law statistic for the terminal speed, the
//! per-scale oscillation budget, and the comparison of evolved heights
//! against the integrated hydrodynamic limit.
//!
//! Almost-sure limits cannot be observed; every experiment here measures a
//! finite-scale shadow (a terminal-time distance, a decay across scales)
//! and says both the statistic and the scale in its output.

use crate::error::{Error, Result};
use crate::harris::{HarrisSystem, SiteRange};
use crate::hydro::{HydroSolution, RiemannData};
use crate::rng::replica_seed;
use crate::server::{self, influence_margin};
use crate::stats;
use crate::tasep::{self, ShockInitialCondition};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Times `2^n (1 + i/m)` for `n_min <= n <= n_max`; consecutive scales
/// share their boundary point (`i = m` of one scale is `i = 0` of the
/// next), so only the terminal scale includes `i = m`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub m: u32,
    pub n_min: u32,
    pub n_max: u32,
}

/// One grid time, identified by scale and step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: u32,
    pub i: u32,
    pub t: f64,
}

impl DyadicGrid {
    pub fn new(m: u32, n_min: u32, n_max: u32) -> Result<Self> {
        if !m.is_power_of_two() || m < 16 {
            return Err(Error::invalid(format!(
                "m must be a power of two >= 16, got {m}"
            )));
        }
        if n_min > n_max {
            return Err(Error::invalid(format!("n_min {n_min} > n_max {n_max}")));
        }
        if n_max >= 32 {
            return Err(Error::invalid(format!("n_max {n_max} unaffordably large")));
        }
        Ok(DyadicGrid { m, n_min, n_max })
    }

    pub fn time(&self, n: u32, i: u32) -> f64 {
        (1u64 << n) as f64 * (1.0 + i as f64 / self.m as f64)
    }

    /// Final simulated time, `2^(n_max + 1)`.
    pub fn horizon(&self) -> f64 {
        (1u64 << (self.n_max + 1)) as f64
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut pts = Vec::new();
        for n in self.n_min..=self.n_max {
            let last = if n == self.n_max { self.m } else { self.m - 1 };
            for i in 0..=last {
                pts.push(GridPoint {
                    n,
                    i,
                    t: self.time(n, i),
                });
            }
        }
        pts
    }

    /// Index of `(n, i)` in [`points`](Self::points), resolving the shared
    /// boundary `(n, m) = (n + 1, 0)`.
    pub fn index_of(&self, n: u32, i: u32) -> usize {
        let (n, i) = if i == self.m && n < self.n_max {
            (n + 1, 0)
        } else {
            (n, i)
        };
        let per_scale = self.m as usize;
        ((n - self.n_min) as usize) * per_scale + i as usize
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SllConfig {
    pub lambda: f64,
    pub rho: f64,
    pub m: u32,
    pub n_min: u32,
    pub n_max: u32,
    pub replicas: usize,
    pub base_seed: u64,
}

impl Default for SllConfig {
    fn default() -> Self {
        SllConfig {
            lambda: 1.0,
            rho: 0.0,
            m: 16,
            n_min: 5,
            n_max: 10,
            replicas: 500,
            base_seed: 1,
        }
    }
}

/// One replica's marker positions at every grid time.
#[derive(Debug, Clone)]
pub struct ReplicaTrack {
    pub replica: usize,
    pub seed: u64,
    pub x: Vec<i64>,
}

/// Ensemble of dyadic-grid samples.
#[derive(Debug, Clone)]
pub struct ReplicaStats {
    pub config: SllConfig,
    pub grid: DyadicGrid,
    pub window_half_width: i64,
    pub tracks: Vec<ReplicaTrack>,
}

impl ReplicaStats {
    pub fn points(&self) -> Vec<GridPoint> {
        self.grid.points()
    }

    /// Terminal-time speed samples `X(T)/T`, one per replica.
    pub fn terminal_ratios(&self) -> Vec<f64> {
        let idx = self.grid.index_of(self.grid.n_max, self.grid.m);
        let t = self.grid.horizon();
        self.tracks.iter().map(|r| r.x[idx] as f64 / t).collect()
    }

    /// Speed samples at an interior grid point.
    pub fn ratios_at(&self, n: u32, i: u32) -> Vec<f64> {
        let idx = self.grid.index_of(n, i);
        let t = self.grid.time(n, i);
        self.tracks.iter().map(|r| r.x[idx] as f64 / t).collect()
    }
}

/// Run the replica ensemble: each replica owns its own clock system seeded
/// from `(base_seed, replica)`, simulates the shock dynamics with the
/// marker to the grid horizon, and records the marker position at every
/// grid time. The window takes the default half-width `3 * horizon`; front
/// walkers are checked to certify the samples never felt the boundary.
pub fn run_sll(config: &SllConfig) -> Result<ReplicaStats> {
    let ic = ShockInitialCondition::new(config.lambda, config.rho)?;
    let grid = DyadicGrid::new(config.m, config.n_min, config.n_max)?;
    if config.replicas == 0 {
        return Err(Error::invalid("need at least one replica"));
    }
    let horizon = grid.horizon();
    let l = (3.0 * horizon) as i64;
    let points = grid.points();

    let tracks: Vec<ReplicaTrack> = (0..config.replicas)
        .into_par_iter()
        .map(|r| -> Result<ReplicaTrack> {
            let seed = replica_seed(config.base_seed, r as u64);
            let h = HarrisSystem::build(seed, SiteRange::new(-l - 1, l), horizon)?;
            let mut state = tasep::init_shock(ic, l, seed)?;
            let traj = tasep::evolve(&mut state, &h, horizon)?;
            let (lf, rf) = state.fronts();
            let guard = (1.5 * horizon) as i64;
            if lf >= -guard || rf <= guard {
                return Err(Error::Internal(format!(
                    "boundary information reached the sampling region: fronts ({lf}, {rf})"
                )));
            }
            let x: Vec<i64> = points.iter().map(|p| traj.position_at(p.t)).collect();
            for (p, &xi) in points.iter().zip(&x) {
                let bound = p.t + 10.0 * p.t.sqrt() * p.t.max(std::f64::consts::E).ln();
                if (xi.abs() as f64) > bound {
                    return Err(Error::Internal(format!(
                        "speed bound violated: |X({})| = {} > {bound}",
                        p.t,
                        xi.abs()
                    )));
                }
            }
            Ok(ReplicaTrack {
                replica: r,
                seed,
                x,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ReplicaStats {
        config: config.clone(),
        grid,
        window_half_width: l,
        tracks,
    })
}

/// Terminal-time uniform-law distance: KS statistic of `X(T)/T` against
/// the uniform law on the fan's speed interval.
pub fn terminal_ks(stats_run: &ReplicaStats) -> f64 {
    let a = 1.0 - 2.0 * stats_run.config.lambda;
    let b = 1.0 - 2.0 * stats_run.config.rho;
    stats::ks_uniform(&stats_run.terminal_ratios(), a, b)
}

/// Per-scale oscillation summary of the speed process along the grid.
#[derive(Debug, Clone)]
pub struct OscillationRow {
    pub n: u32,
    pub steps: usize,
    /// budget `2^{-n (1 - beta)}` on the speed increment
    pub budget: f64,
    /// fraction of steps with `|X(t_{i+1})/t_{i+1} - X(t_i)/t_i|` over budget
    pub exceed_fraction: f64,
    /// Poisson budget `1.5 * 2^n / m` on the raw displacement
    pub step_budget: f64,
    pub step_exceed_fraction: f64,
    pub median_osc: f64,
    pub max_osc: f64,
}

/// Tabulate, for every scale, how often the within-scale speed increments
/// exceed the `2^{-n(1-beta)}` budget, and how often the raw displacement
/// exceeds the Poisson clock budget for one grid step.
pub fn dyadic_oscillation(stats_run: &ReplicaStats, beta: f64) -> Result<Vec<OscillationRow>> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::invalid(format!("beta = {beta} outside (0, 1)")));
    }
    let grid = stats_run.grid;
    let mut rows = Vec::new();
    for n in grid.n_min..=grid.n_max {
        let budget = 2f64.powf(-(n as f64) * (1.0 - beta));
        let step_budget = 1.5 * (1u64 << n) as f64 / grid.m as f64;
        let mut oscs = Vec::new();
        let mut exceed = 0usize;
        let mut step_exceed = 0usize;
        for track in &stats_run.tracks {
            for i in 0..grid.m {
                let a = grid.index_of(n, i);
                let b = grid.index_of(n, i + 1);
                let ta = grid.time(n, i);
                let tb = grid.time(n, i + 1);
                let osc = (track.x[b] as f64 / tb - track.x[a] as f64 / ta).abs();
                oscs.push(osc);
                if osc > budget {
                    exceed += 1;
                }
                if (track.x[b] - track.x[a]).abs() as f64 > step_budget {
                    step_exceed += 1;
                }
            }
        }
        let steps = oscs.len();
        rows.push(OscillationRow {
            n,
            steps,
            budget,
            exceed_fraction: exceed as f64 / steps as f64,
            step_budget,
            step_exceed_fraction: step_exceed as f64 / steps as f64,
            median_osc: stats::median(&oscs),
            max_osc: oscs.iter().cloned().fold(0.0, f64::max),
        });
    }
    Ok(rows)
}

/// One replica's height-vs-limit comparison.
#[derive(Debug, Clone, Serialize)]
pub struct HydroCompareRow {
    pub seed: u64,
    pub n: u64,
    pub t: f64,
    pub lambda: f64,
    pub rho: f64,
    /// max over `|y| <= 4n` of `|z_t(y) - t U_1(y/t)|`
    pub max_deviation: f64,
    /// deviation divided by `t^(1 - eps1)`
    pub normalized: f64,
    pub eps1: f64,
}

/// Evolve the shock height (no marker; the origin site starts empty) to
/// `t = t_multiplier * n` and report the worst absolute gap to the
/// integrated limit over `|y| <= 4n`, normalized by `t^(1 - eps1)`.
///
/// `t_multiplier` may also be zero, which measures the initial-data
/// closeness alone.
pub fn hydro_compare(
    lambda: f64,
    rho: f64,
    n: u64,
    t_multiplier: f64,
    eps1: f64,
    seed: u64,
) -> Result<HydroCompareRow> {
    let ic = ShockInitialCondition::new(lambda, rho)?;
    if t_multiplier != 0.0 && !(t_multiplier > 0.5 && t_multiplier <= 2.0) {
        return Err(Error::invalid(format!(
            "t_multiplier {t_multiplier} outside (1/2, 2] (or 0 for the initial check)"
        )));
    }
    if !(0.0 < eps1 && eps1 < 1.0) {
        return Err(Error::invalid(format!("eps1 = {eps1} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let t = t_multiplier * n as f64;
    let query = 4 * n as i64;
    // the window must keep every queried site inside the information cone
    let l = query + influence_margin(t);
    let state = tasep::init_shock(ic, l, seed)?.strip_second_class();
    let mut z = server::height_from_config(&state, 0);
    if t > 0.0 {
        let h = HarrisSystem::build(seed, SiteRange::new(-l - 1, l), t)?;
        server::evolve_height(&mut z, &h, t)?;
    }

    let sol = HydroSolution::new(RiemannData::new(lambda, rho)?);
    let mut worst = 0.0f64;
    for y in -query..=query {
        let limit = if t > 0.0 {
            t * sol.integrated(1.0, y as f64 / t)
        } else {
            sol.integrated(0.0, y as f64)
        };
        worst = worst.max((z.get(y) as f64 - limit).abs());
    }
    let scale = if t > 0.0 {
        t.powf(1.0 - eps1)
    } else {
        (n as f64).powf(1.0 - eps1)
    };
    Ok(HydroCompareRow {
        seed,
        n,
        t,
        lambda,
        rho,
        max_deviation: worst,
        normalized: worst / scale,
        eps1,
    })
}

/// Replica ensemble of [`hydro_compare`] with derived seeds.
pub fn hydro_compare_ensemble(
    lambda: f64,
    rho: f64,
    n: u64,
    t_multiplier: f64,
    eps1: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<HydroCompareRow>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            hydro_compare(
                lambda,
                rho,
                n,
                t_multiplier,
                eps1,
                replica_seed(base_seed, r as u64),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation_and_telescoping() {
        assert!(DyadicGrid::new(12, 3, 5).is_err()); // not a power of two
        assert!(DyadicGrid::new(8, 3, 5).is_err()); // below 16
        assert!(DyadicGrid::new(16, 6, 5).is_err());
        let g = DyadicGrid::new(16, 3, 6).unwrap();
        for n in 3..6 {
            assert_eq!(g.time(n, 16), g.time(n + 1, 0));
            assert_eq!(g.index_of(n, 16), g.index_of(n + 1, 0));
        }
        assert_eq!(g.horizon(), 128.0);
        let pts = g.points();
        assert_eq!(pts.len(), 4 * 16 + 1);
        // times strictly increase along the flattened grid
        for w in pts.windows(2) {
            assert!(w[0].t < w[1].t);
        }
    }

    #[test]
    fn sll_smoke_run_is_deterministic_and_bounded() {
        let cfg = SllConfig {
            lambda: 1.0,
            rho: 0.0,
            m: 16,
            n_min: 4,
            n_max: 5,
            replicas: 8,
            base_seed: 42,
        };
        let a = run_sll(&cfg).unwrap();
        let b = run_sll(&cfg).unwrap();
        for (x, y) in a.tracks.iter().zip(&b.tracks) {
            assert_eq!(x.x, y.x);
            assert_eq!(x.seed, y.seed);
        }
        for r in a.terminal_ratios() {
            assert!((-1.0..=1.0).contains(&r), "terminal ratio {r}");
        }
        // grid telescoping at the sample level: shared boundary is shared data
        let idx_a = a.grid.index_of(4, 16);
        let idx_b = a.grid.index_of(5, 0);
        assert_eq!(idx_a, idx_b);
    }

    #[test]
    fn oscillation_rows_on_constant_trajectory() {
        let cfg = SllConfig {
            lambda: 0.0,
            rho: 0.0,
            m: 16,
            n_min: 4,
            n_max: 5,
            replicas: 2,
            base_seed: 7,
        };
        // lambda = rho = 0: only the marker exists and it walks freely to
        // the right, but with zero density nothing blocks it; we only need
        // the plumbing here, so instead fabricate constant tracks
        let grid = DyadicGrid::new(16, 4, 5).unwrap();
        let pts = grid.points();
        let stats_run = ReplicaStats {
            config: cfg,
            grid,
            window_half_width: 10,
            tracks: vec![ReplicaTrack {
                replica: 0,
                seed: 1,
                x: vec![5; pts.len()],
            }],
        };
        let rows = dyadic_oscillation(&stats_run, 0.9).unwrap();
        for row in rows {
            assert_eq!(row.step_exceed_fraction, 0.0);
            assert!(row.max_osc < 0.4, "ratio drift of a frozen marker");
            assert_eq!(row.steps, 16);
        }
        assert!(dyadic_oscillation(&stats_run, 1.5).is_err());
    }

    #[test]
    fn hydro_compare_initial_data_is_tight() {
        // t = 0: deviation is the Bernoulli fluctuation of the initial sums
        let row = hydro_compare(0.8, 0.2, 512, 0.0, 0.05, 9).unwrap();
        let budget = (512.0f64 * (512.0f64).ln()).sqrt() * 3.0;
        assert!(
            row.max_deviation <= budget,
            "initial closeness {} over {budget}",
            row.max_deviation
        );
        // deterministic data: integer rounding only
        let row = hydro_compare(1.0, 0.0, 256, 0.0, 0.05, 3).unwrap();
        assert!(row.max_deviation <= 1.0, "{}", row.max_deviation);
    }

    #[test]
    fn hydro_compare_small_scale() {
        let row = hydro_compare(1.0, 0.0, 128, 1.0, 0.05, 5).unwrap();
        assert!(row.normalized.is_finite());
        assert!(
            row.normalized <= 1.0,
            "normalized deviation {} at a small scale",
            row.normalized
        );
        assert!(hydro_compare(1.0, 0.0, 128, 3.0, 0.05, 5).is_err());
        assert!(hydro_compare(1.0, 0.0, 0, 1.0, 0.05, 5).is_err());
    }
}
