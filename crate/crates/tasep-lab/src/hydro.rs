//! Macroscopic limit objects for Riemann initial data.
//!
//! The conservation law with flux `G(u) = u(1-u)` started from a two-level
//! profile has three regimes: a rarefaction fan when the left density is
//! larger, a traveling shock when it is smaller, and a constant profile when
//! the two densities agree. Both the density `u_t` and its integral `U_t`
//! come in closed form; `U_t` is alternatively evaluated by maximizing
//! `U_0(y) - t g((x-y)/t)` over a grid, and the two routes must agree.
//! The integral solution is positively homogeneous for this data:
//! `U_t(x) = t U_1(x/t)`, which is the normalization used when microscopic
//! heights are compared against the limit.

use crate::error::{Error, Result};
use crate::lpp::g_shape;

/// Flux of the exclusion process.
pub fn flux(u: f64) -> f64 {
    u * (1.0 - u)
}

/// Two-sided Riemann data: density `lambda` for x < 0, `rho` for x > 0,
/// with `U_0(0) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct RiemannData {
    pub lambda: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    RarefactionFan,
    Shock,
    Constant,
}

impl RiemannData {
    pub fn new(lambda: f64, rho: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("rho", rho)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(RiemannData { lambda, rho })
    }

    pub fn kind(&self) -> ProfileKind {
        if self.lambda > self.rho {
            ProfileKind::RarefactionFan
        } else if self.lambda < self.rho {
            ProfileKind::Shock
        } else {
            ProfileKind::Constant
        }
    }

    /// Initial density; the origin takes the left value.
    pub fn u0(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.lambda
        } else {
            self.rho
        }
    }

    /// Initial integral `U_0` with `U_0(0) = 0`.
    pub fn u0_integral(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.lambda * x
        } else {
            self.rho * x
        }
    }
}

/// Entropy solution density for the decreasing case: constant at `lambda`
/// left of the fan, the linear fan in between, constant at `rho` right of
/// it. Errors unless `lambda > rho` and `t > 0`.
pub fn fan_density(data: &RiemannData, t: f64, x: f64) -> Result<f64> {
    if data.lambda <= data.rho {
        return Err(Error::Unsupported(format!(
            "fan profile needs lambda > rho, got ({}, {})",
            data.lambda, data.rho
        )));
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!("fan density needs t > 0, got {t}")));
    }
    Ok(if x <= (1.0 - 2.0 * data.lambda) * t {
        data.lambda
    } else if x <= (1.0 - 2.0 * data.rho) * t {
        (t - x) / (2.0 * t)
    } else {
        data.rho
    })
}

/// Closed-form evaluators for the entropy solution and its integral, all
/// three regimes.
#[derive(Debug, Clone, Copy)]
pub struct HydroSolution {
    pub data: RiemannData,
}

impl HydroSolution {
    pub fn new(data: RiemannData) -> Self {
        HydroSolution { data }
    }

    /// Density at macroscopic time `t >= 0` and position `x`.
    pub fn density(&self, t: f64, x: f64) -> f64 {
        let d = &self.data;
        if t <= 0.0 {
            return d.u0(x);
        }
        match d.kind() {
            ProfileKind::RarefactionFan => fan_density(d, t, x).expect("decreasing case"),
            ProfileKind::Constant => d.lambda,
            ProfileKind::Shock => {
                // labelled plumbing: entropy shock traveling at 1 - lambda - rho
                let s = 1.0 - d.lambda - d.rho;
                if x <= s * t {
                    d.lambda
                } else {
                    d.rho
                }
            }
        }
    }

    /// Integral solution `U_t(x)`, normalized by `U_0(0) = 0`.
    pub fn integrated(&self, t: f64, x: f64) -> f64 {
        let d = &self.data;
        if t <= 0.0 {
            return d.u0_integral(x);
        }
        match d.kind() {
            ProfileKind::RarefactionFan => {
                let left_edge = (1.0 - 2.0 * d.lambda) * t;
                let right_edge = (1.0 - 2.0 * d.rho) * t;
                if x <= left_edge {
                    d.lambda * x - t * flux(d.lambda)
                } else if x <= right_edge {
                    -(t - x) * (t - x) / (4.0 * t)
                } else {
                    d.rho * x - t * flux(d.rho)
                }
            }
            ProfileKind::Constant => d.lambda * x - t * flux(d.lambda),
            ProfileKind::Shock => {
                let s = 1.0 - d.lambda - d.rho;
                if x <= s * t {
                    d.lambda * x - t * flux(d.lambda)
                } else {
                    d.rho * x - t * flux(d.rho)
                }
            }
        }
    }
}

/// Variational evaluation of the integral solution: maximize
/// `U0(y) - t g((x - y)/t)` over a y-grid of step `h` on `[x - t, x + t]`,
/// then sharpen the grid argmax with a golden-section pass.
pub fn hopf_lax<F: Fn(f64) -> f64>(u0_integral: F, t: f64, x: f64, h: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("hopf_lax needs t > 0, got {t}")));
    }
    if !(h > 0.0) {
        return Err(Error::invalid(format!("hopf_lax needs h > 0, got {h}")));
    }
    let value = |y: f64| u0_integral(y) - t * g_shape((x - y) / t);
    let lo = x - t;
    let hi = x + t;
    let steps = ((hi - lo) / h).ceil() as usize;
    let mut best = f64::NEG_INFINITY;
    let mut best_y = lo;
    for k in 0..=steps {
        let y = (lo + k as f64 * h).min(hi);
        let v = value(y);
        if v > best {
            best = v;
            best_y = y;
        }
    }
    // golden-section refinement inside the bracket around the grid argmax
    let mut a = (best_y - h).max(lo);
    let mut b = (best_y + h).min(hi);
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = value(c);
    let mut fd = value(d);
    for _ in 0..60 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = value(d);
        }
    }
    Ok(best.max(fc).max(fd))
}

/// Outcome of the window-sum comparison between a configuration and a
/// macroscopic profile.
#[derive(Debug, Clone, Copy)]
pub struct ClosenessReport {
    pub ok: bool,
    pub max_deviation: f64,
    pub argmax: i64,
}

/// Compare cumulative occupancy sums against `n` times the integral of
/// `u0`, at every integer point of `[-m n, m n]`. `bits` must hold the
/// occupancies of exactly those sites, left to right. The integral is
/// accumulated per unit cell with Simpson substeps, which is exact for the
/// piecewise-linear integrals that arise here away from one kink cell.
pub fn closeness<F: Fn(f64) -> f64>(
    bits: &[u8],
    u0: F,
    m: i64,
    n: i64,
    v: f64,
) -> Result<ClosenessReport> {
    if m < 1 || n < 1 {
        return Err(Error::invalid("closeness needs m >= 1 and n >= 1"));
    }
    let span = (2 * m * n + 1) as usize;
    if bits.len() != span {
        return Err(Error::invalid(format!(
            "window holds {} sites, expected {span} for [-{mn}, {mn}]",
            bits.len(),
            mn = m * n
        )));
    }
    let mn = m * n;
    let nf = n as f64;
    let mut sum = 0.0f64;
    let mut integral = 0.0f64; // integral of u0 from -m to x/n, times n
    let mut worst = f64::NEG_INFINITY;
    let mut argmax = -mn;
    for (k, &b) in bits.iter().enumerate() {
        let x = -mn + k as i64;
        sum += b as f64;
        if k > 0 {
            // n * integral over [(x-1)/n, x/n] via Simpson
            let a = (x - 1) as f64 / nf;
            let c = x as f64 / nf;
            let mid = 0.5 * (a + c);
            integral += (u0(a) + 4.0 * u0(mid) + u0(c)) / 6.0;
        }
        let dev = (sum - integral).abs();
        if dev > worst {
            worst = dev;
            argmax = x;
        }
    }
    Ok(ClosenessReport {
        ok: worst <= v,
        max_deviation: worst,
        argmax,
    })
}

/// Report of the one-step maximizer analysis: where the variational
/// evaluation of `U_s(x s)` from time 1 attains its maximum, and how fast
/// the objective falls off around it.
#[derive(Debug, Clone, Copy)]
pub struct MaximizerReport {
    pub v_star: f64,
    pub argmax_error: f64,
    /// objective at v = x minus `U_s(xs)`; zero when the maximizer claim holds
    pub gap_at_x: f64,
    /// largest violation of `objective(v) <= U_s(xs) - (v - x)^2` on the grid
    pub max_gap_violation: f64,
    /// finite-difference curvature of the objective at the maximizer
    pub curvature_fd: f64,
    /// closed-form curvature `-s / (2 (s - 1))`
    pub curvature_formula: f64,
}

/// For the decreasing case, maximize `v -> U_1(v) - (s-1) g((xs - v)/(s-1))`
/// on a grid and verify the maximizer sits at `v = x`, the quadratic
/// fall-off around it, and the curvature value.
///
/// Valid in the regime `s` in `[1 + 1/(2m), 1 + 1/m]` with `x` at least
/// `10/m` inside the fan's speed interval.
pub fn maximizer_check(
    data: &RiemannData,
    x: f64,
    s: f64,
    m: u32,
    grid_step: f64,
) -> Result<MaximizerReport> {
    if data.lambda <= data.rho {
        return Err(Error::Unsupported(
            "maximizer analysis applies to the decreasing case".into(),
        ));
    }
    if m < 2 {
        return Err(Error::invalid(format!("m = {m} < 2")));
    }
    let mf = m as f64;
    if !(s >= 1.0 + 1.0 / (2.0 * mf) && s <= 1.0 + 1.0 / mf) {
        return Err(Error::invalid(format!(
            "s = {s} outside [1 + 1/(2m), 1 + 1/m] for m = {m}"
        )));
    }
    let delta = 10.0 / mf;
    let lo = 1.0 - 2.0 * data.lambda + delta;
    let hi = 1.0 - 2.0 * data.rho - delta;
    if !(lo < hi) || !(x > lo && x < hi) {
        return Err(Error::invalid(format!(
            "x = {x} outside the admissible interval ({lo}, {hi}) for m = {m}"
        )));
    }
    if !(grid_step > 0.0) {
        return Err(Error::invalid("grid_step must be positive"));
    }

    let sol = HydroSolution::new(*data);
    let objective = |v: f64| sol.integrated(1.0, v) - (s - 1.0) * g_shape((x * s - v) / (s - 1.0));
    let target = sol.integrated(s, x * s);

    // scan the variational window |v - xs| <= s - 1
    let a = x * s - (s - 1.0);
    let b = x * s + (s - 1.0);
    let mut v_star = a;
    let mut best = f64::NEG_INFINITY;
    let mut v = a;
    while v <= b + 1e-15 {
        let val = objective(v);
        if val > best {
            best = val;
            v_star = v;
        }
        v += grid_step;
    }

    // quadratic fall-off on the wider window |v - xs| < 2(s - 1)
    let mut max_violation = f64::NEG_INFINITY;
    let a2 = x * s - 2.0 * (s - 1.0);
    let b2 = x * s + 2.0 * (s - 1.0);
    let mut v = a2 + grid_step;
    while v < b2 {
        let gap = objective(v) - (target - (v - x) * (v - x));
        max_violation = max_violation.max(gap);
        v += grid_step;
    }

    let h = grid_step;
    let curvature_fd = (objective(x + h) - 2.0 * objective(x) + objective(x - h)) / (h * h);

    Ok(MaximizerReport {
        v_star,
        argmax_error: (v_star - x).abs(),
        gap_at_x: objective(x) - target,
        max_gap_violation: max_violation,
        curvature_fd,
        curvature_formula: -s / (2.0 * (s - 1.0)),
    })
}
