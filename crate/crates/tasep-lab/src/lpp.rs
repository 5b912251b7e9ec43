//! Last-passage percolation over i.i.d. unit-exponential weights.
//!
//! Two coordinate systems are in play. The up-right model lives on
//! `Z+ x Z+` with steps (1,0) and (0,1) and the dynamic program
//! `T(i,j) = max(T(i-1,j), T(i,j-1)) + w(i,j)`. The wedge model lives on
//! `L = {(x, y) : y >= 1, x >= -y + 1}` with steps (1,0) and (-1,1); the
//! bijection `(x, y) -> (x + y - 1, y - 1)` carries one onto the other.
//! Passage times in the wedge are the hitting times of the growing
//! interface, which ties this module to [`crate::server`]: the level of the
//! interface at site `i` and time `t` is the largest `j` whose passage time
//! is still below `t`.

use crate::error::{Error, Result};
use crate::rng::{Domain, SplitMix64};
use crate::stats;
use rayon::prelude::*;

/// Dense up-right passage grid: weights and passage times for all cells
/// `(i, j)` with `0 <= i < ni`, `0 <= j < nj`.
#[derive(Debug, Clone)]
pub struct PassageGrid {
    ni: usize,
    nj: usize,
    tau: Vec<f64>,
    t: Vec<f64>,
    seed: u64,
}

impl PassageGrid {
    pub fn dims(&self) -> (usize, usize) {
        (self.ni, self.nj)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.nj + j]
    }

    #[inline]
    pub fn time(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.nj + j]
    }
}

/// Weight of cell `(i, j)`: the j-th draw of the row stream keyed by
/// `(seed, i)`, recomputable independently of any grid.
pub fn cell_weight(seed: u64, i: usize, j: usize) -> f64 {
    let mut g = SplitMix64::from_parts(seed, Domain::GridWeights, i as i64);
    let mut w = 0.0;
    for _ in 0..=j {
        w = g.exponential();
    }
    w
}

/// Sample weights and fill passage times by the up-right recursion in
/// row-major order.
pub fn sample_grid(ni: usize, nj: usize, seed: u64) -> Result<PassageGrid> {
    if ni == 0 || nj == 0 {
        return Err(Error::invalid("grid dimensions must be positive"));
    }
    let mut tau = Vec::with_capacity(ni * nj);
    for i in 0..ni {
        let mut g = SplitMix64::from_parts(seed, Domain::GridWeights, i as i64);
        for _ in 0..nj {
            tau.push(g.exponential());
        }
    }
    let mut t = vec![0.0f64; ni * nj];
    for i in 0..ni {
        for j in 0..nj {
            let up = if i > 0 { t[(i - 1) * nj + j] } else { 0.0 };
            let left = if j > 0 { t[i * nj + j - 1] } else { 0.0 };
            t[i * nj + j] = up.max(left) + tau[i * nj + j];
        }
    }
    Ok(PassageGrid { ni, nj, tau, t, seed })
}

/// Passage time to the single corner `(ni-1, nj-1)` with O(nj) memory.
pub fn corner_passage_time(ni: usize, nj: usize, seed: u64) -> Result<f64> {
    if ni == 0 || nj == 0 {
        return Err(Error::invalid("grid dimensions must be positive"));
    }
    let mut row = vec![0.0f64; nj];
    for i in 0..ni {
        let mut g = SplitMix64::from_parts(seed, Domain::GridWeights, i as i64);
        for j in 0..nj {
            let up = if i > 0 { row[j] } else { 0.0 };
            let left = if j > 0 { row[j - 1] } else { 0.0 };
            row[j] = up.max(left) + g.exponential();
        }
    }
    Ok(row[nj - 1])
}

/// Is `(x, y)` in the wedge (strictly above its boundary)?
pub fn in_wedge(x: i64, y: i64) -> bool {
    y >= 1 && x >= -y + 1
}

/// Is `(x, y)` on the wedge boundary?
pub fn on_wedge_boundary(x: i64, y: i64) -> bool {
    (y == 0 && x >= 0) || (x < 0 && y == -x)
}

/// Wedge point to up-right coordinates: `(x, y) -> (x + y - 1, y - 1)`.
pub fn wedge_to_upright(x: i64, y: i64) -> Result<(i64, i64)> {
    if !in_wedge(x, y) {
        return Err(Error::invalid(format!("({x}, {y}) outside the wedge")));
    }
    Ok((x + y - 1, y - 1))
}

/// Inverse map: `(i, j) -> (i - j, j + 1)`.
pub fn upright_to_wedge(i: i64, j: i64) -> (i64, i64) {
    (i - j, j + 1)
}

/// Passage time at a wedge point: zero on the boundary, the grid value
/// inside. Errors if the point maps outside the sampled grid.
pub fn wedge_time(grid: &PassageGrid, x: i64, y: i64) -> Result<f64> {
    if on_wedge_boundary(x, y) {
        return Ok(0.0);
    }
    let (i, j) = wedge_to_upright(x, y)?;
    if i < 0 || j < 0 || i as usize >= grid.ni || j as usize >= grid.nj {
        return Err(Error::GridTooSmall(format!(
            "wedge point ({x}, {y}) maps to ({i}, {j}) outside the {}x{} grid",
            grid.ni, grid.nj
        )));
    }
    Ok(grid.time(i as usize, j as usize))
}

/// Interface level read off the passage grid: the smallest level `j` whose
/// next cell has not been reached by time `t`. Runtime-checks that the
/// minimizer is interior to the sampled grid.
pub fn interface_from_grid(grid: &PassageGrid, t: f64, i: i64) -> Result<i64> {
    let mut j = (-i).max(0);
    loop {
        let cell = (i, j + 1);
        if wedge_time(grid, cell.0, cell.1)? > t {
            return Ok(j);
        }
        j += 1;
    }
}

/// Grid side large enough that interface queries up to time `t` stay
/// interior, with slack beyond the growth cone.
pub fn suggested_grid_side(t: f64) -> usize {
    (t + 4.0 * t.sqrt() * (t + std::f64::consts::E).ln() + 10.0).ceil() as usize
}

/// Limit shape of scaled passage times.
pub fn gamma(x: f64, y: f64) -> Result<f64> {
    if y < 0.0 || x + y < 0.0 {
        return Err(Error::invalid(format!(
            "gamma needs y >= 0 and x + y >= 0, got ({x}, {y})"
        )));
    }
    Ok((y.sqrt() + (x + y).sqrt()).powi(2))
}

/// Unit level curve of the limit shape; also the integrand of the Hopf-Lax
/// formula. The algebraic expression extends beyond `|x| <= 1`; the limit
/// statements only concern the interval itself.
pub fn g_shape(x: f64) -> f64 {
    (1.0 - x) * (1.0 - x) / 4.0
}

/// Diagonal limit profile `f(theta) = (sqrt(theta) + sqrt(1 - theta))^2`.
pub fn f_shape(theta: f64) -> f64 {
    (theta.sqrt() + (1.0 - theta).sqrt()).powi(2)
}

/// Closed-form second derivative of [`f_shape`].
pub fn f_shape_curvature(x: f64) -> f64 {
    -1.0 / (x.sqrt() * (1.0 - x).sqrt())
        - 0.5 * ((1.0 - x) / x.powi(3)).sqrt()
        - 0.5 * (x / (1.0 - x).powi(3)).sqrt()
}

/// Max error of the conjugacy `G(u) = inf_r { u r + g(r) }` evaluated by
/// brute minimization over an `r` grid of step `h`.
pub fn legendre_check(u_grid: &[f64], r_lo: f64, r_hi: f64, h: f64) -> Result<f64> {
    if h <= 0.0 || r_hi <= r_lo {
        return Err(Error::invalid("legendre_check needs h > 0 and r_hi > r_lo"));
    }
    let steps = ((r_hi - r_lo) / h).ceil() as usize;
    let mut worst: f64 = 0.0;
    for &u in u_grid {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!("u = {u} outside [0, 1]")));
        }
        let mut inf = f64::INFINITY;
        for s in 0..=steps {
            let r = r_lo + s as f64 * h;
            inf = inf.min(u * r + g_shape(r));
        }
        let target = u * (1.0 - u);
        worst = worst.max((inf - target).abs());
    }
    Ok(worst)
}

/// One row of the shape / concentration tables.
#[derive(Debug, Clone)]
pub struct ShapeRow {
    pub n: usize,
    pub theta: f64,
    pub replicas: usize,
    pub mean: f64,
    pub std: f64,
    pub target: f64,
    /// Shape table: the asserted upper bound `target + 3 stderr`.
    /// Concentration table: the deviation-scale envelope `3 sqrt(n) ln(n^2)`.
    pub envelope: f64,
    pub seed: u64,
}

impl ShapeRow {
    pub fn stderr(&self) -> f64 {
        self.std / (self.replicas as f64).sqrt()
    }

    /// The one-sided mean bound: the expected passage time never exceeds
    /// the limit shape at any finite size.
    pub fn mean_upper_ok(&self) -> bool {
        self.mean <= self.target + 3.0 * self.stderr()
    }
}

/// Monte Carlo estimate of `T([n theta], n - [n theta]) / n` over replicas.
pub fn limit_shape_experiment(
    n: usize,
    theta: f64,
    replicas: usize,
    seed: u64,
) -> Result<ShapeRow> {
    if !(0.0 < theta && theta < 1.0) {
        return Err(Error::invalid(format!("theta = {theta} outside (0, 1)")));
    }
    let i = ((n as f64) * theta).floor() as usize;
    if i.min(n - i) < 1 {
        return Err(Error::invalid(format!(
            "n * min(theta, 1 - theta) must be >= 1, got n = {n}, theta = {theta}"
        )));
    }
    if replicas < 2 {
        return Err(Error::invalid("need at least 2 replicas"));
    }
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let s = crate::rng::replica_seed(seed, r as u64);
            corner_passage_time(i + 1, n - i + 1, s).map(|t| t / n as f64)
        })
        .collect::<Result<_>>()?;
    let mean = stats::mean(&values);
    let std = stats::std_dev(&values);
    let target = f_shape(theta);
    Ok(ShapeRow {
        n,
        theta,
        replicas,
        mean,
        std,
        target,
        envelope: target + 3.0 * std / (replicas as f64).sqrt(),
        seed,
    })
}

/// Empirical spread of passage times against the concentration envelope
/// `3 sqrt(n) ln(n^2)`. Sizes below 2 are skipped (the envelope degenerates
/// at n = 1 where ln(n^2) = 0).
pub fn concentration_experiment(
    n_list: &[usize],
    theta: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<ShapeRow>> {
    let mut rows = Vec::new();
    for (idx, &n) in n_list.iter().enumerate() {
        if n < 2 {
            continue;
        }
        let row_seed = crate::rng::replica_seed(seed, idx as u64);
        let mut row = limit_shape_experiment(n, theta, replicas, row_seed)?;
        // absolute spread of T itself, not of T/n
        row.std *= n as f64;
        row.mean *= n as f64;
        row.target = n as f64 * f_shape(theta);
        row.envelope = 3.0 * (n as f64).sqrt() * ((n * n) as f64).ln();
        rows.push(row);
    }
    Ok(rows)
}

/// Report of the strict-concavity margin check of [`f_shape`].
#[derive(Debug, Clone)]
pub struct ConcavityReport {
    /// Worst (largest) value of `sum a_i f(x_i) - (f(theta) - 2 delta^2)`;
    /// nonpositive means the inequality held on every sampled configuration.
    pub max_gap: f64,
    /// Worst (largest) finite-difference second derivative on (0, 1/2].
    pub max_curvature: f64,
    pub ran: usize,
    pub skipped: usize,
}

impl ConcavityReport {
    pub fn pass(&self) -> bool {
        self.max_gap <= 0.0 && self.max_curvature <= -4.0 + 1e-3
    }
}

/// Check that averaging `f` over points at least `delta` away from `theta`
/// (with weighted mean exactly `theta`) loses at least `2 delta^2`, and
/// that the curvature bound `f'' <= -4` holds on (0, 1/2].
///
/// Sampled configurations that land entirely on one side of `theta` cannot
/// satisfy the mean constraint and are skipped, not counted.
pub fn f_concavity_check(
    theta: f64,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<ConcavityReport> {
    if !(0.0 < theta && theta <= 0.5) {
        return Err(Error::invalid(format!("theta = {theta} outside (0, 1/2]")));
    }
    if !(0.0 < delta && delta < theta) {
        return Err(Error::invalid(format!(
            "delta = {delta} outside (0, theta = {theta})"
        )));
    }

    // curvature on a grid of (0, 1/2], finite differences
    let mut max_curv = f64::NEG_INFINITY;
    let h = 1e-5;
    let mut x = 0.005;
    while x <= 0.5 + 1e-12 {
        let fd = (f_shape(x + h) - 2.0 * f_shape(x) + f_shape(x - h)) / (h * h);
        max_curv = max_curv.max(fd);
        x += 0.005;
    }

    let mut g = SplitMix64::from_parts(seed, Domain::Aux, 1);
    let mut max_gap = f64::NEG_INFINITY;
    let mut ran = 0usize;
    let mut skipped = 0usize;
    let budget = f_shape(theta) - 2.0 * delta * delta;
    while ran < samples {
        let m = 2 + (g.below(4) as usize);
        let mut left: Vec<(f64, f64)> = Vec::new(); // (x, raw weight)
        let mut right: Vec<(f64, f64)> = Vec::new();
        for _ in 0..m {
            let w = g.uniform_open();
            if g.bernoulli(0.5) {
                let x = g.uniform() * (theta - delta);
                left.push((x, w));
            } else {
                let x = theta + delta + g.uniform() * (1.0 - theta - delta);
                right.push((x, w));
            }
        }
        if left.is_empty() || right.is_empty() {
            skipped += 1;
            continue;
        }
        let wl: f64 = left.iter().map(|p| p.1).sum();
        let wr: f64 = right.iter().map(|p| p.1).sum();
        let mu_l: f64 = left.iter().map(|p| p.0 * p.1).sum::<f64>() / wl;
        let mu_r: f64 = right.iter().map(|p| p.0 * p.1).sum::<f64>() / wr;
        // group weights solving a*mu_l + (1-a)*mu_r = theta
        let a = (mu_r - theta) / (mu_r - mu_l);
        debug_assert!(a > 0.0 && a < 1.0);
        let mut value = 0.0;
        for (x, w) in &left {
            value += a * (w / wl) * f_shape(*x);
        }
        for (x, w) in &right {
            value += (1.0 - a) * (w / wr) * f_shape(*x);
        }
        max_gap = max_gap.max(value - budget);
        ran += 1;
    }

    Ok(ConcavityReport {
        max_gap,
        max_curvature: max_curv,
        ran,
        skipped,
    })
}
