//! Isotropic alpha-stable path simulation: exit times, survival
//! probabilities, Feynman-Kac functionals, transition densities, and
//! jump-count balances.
//!
//! Paths are independent and indexed; path `i` draws from the ChaCha
//! stream `(seed, i)`, outputs land in index order, and reductions use a
//! fixed pairwise tree, so every estimate is bit-identical no matter how
//! many workers run the batch.

pub mod rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::fraclap::Potential;
use crate::geometry::Domain;
use crate::grid::{dist, sub, Point};
use crate::special::kernel_constant;
use rng::PathRng;

/// How exits are detected between grid times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitDetection {
    /// Exit at the first step landing outside (jump processes overshoot,
    /// so the landing is exact; the residual bias is O(dt)).
    FirstLanding,
    /// Landing detection plus a Brownian-bridge crossing correction for
    /// continuous paths (alpha = 2).
    BrownianBridge,
}

/// Simulation parameters for one batch of paths.
#[derive(Debug, Clone)]
pub struct PathConfig {
    pub alpha: f64,
    pub d: usize,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub exit_mode: ExitDetection,
}

impl PathConfig {
    /// Defaults: dt = 1e-3, horizon = 1, n = 1e5, seed = 42, exit detection
    /// chosen by alpha.
    pub fn new(alpha: f64, d: usize) -> PathConfig {
        PathConfig {
            alpha,
            d,
            dt: 1e-3,
            horizon: 1.0,
            n_paths: 100_000,
            seed: 42,
            exit_mode: if alpha == 2.0 {
                ExitDetection::BrownianBridge
            } else {
                ExitDetection::FirstLanding
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < dt <= horizon, got dt = {}, horizon = {}",
                self.dt, self.horizon
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
        }
        Ok(())
    }
}

/// One simulated path outcome. `tau` is `f64::INFINITY` when the path
/// survived to the horizon (censored, never extrapolated).
#[derive(Debug, Clone, PartialEq)]
pub struct ExitSample {
    pub tau: f64,
    pub position: Point,
    pub by_jump: bool,
    pub v_integral: f64,
}

impl ExitSample {
    pub fn exited(&self) -> bool {
        self.tau.is_finite()
    }
}

/// Mean-type Monte Carlo estimate with a standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub n: usize,
}

impl Estimate {
    pub fn half_width95(&self) -> f64 {
        1.96 * self.std_err
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.value - self.half_width95(), self.value + self.half_width95())
    }

    fn from_values(values: &[f64]) -> Estimate {
        let n = values.len();
        let mean = exec::pairwise_mean(values);
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 {
            exec::pairwise_sum(&sq) / (n as f64 - 1.0)
        } else {
            0.0
        };
        Estimate { value: mean, std_err: (var / n as f64).sqrt(), n }
    }

    /// Wilson 95% interval for a binomial fraction, reported as a symmetric
    /// half-width around the raw fraction.
    fn wilson(success: usize, n: usize) -> Estimate {
        let z = 1.959963984540054f64;
        let nf = n as f64;
        let p = success as f64 / nf;
        let z2 = z * z;
        let hw = (z / (1.0 + z2 / nf)) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        Estimate { value: p, std_err: hw / z, n }
    }
}

/// Simulate a single path until it exits the domain or reaches
/// `cfg.horizon`. The potential integral uses the left-endpoint rule with
/// each step's actual length.
pub fn simulate_exit(
    domain: &Domain,
    start: Point,
    cfg: &PathConfig,
    potential: Option<&Potential>,
    path_index: u64,
) -> Result<ExitSample> {
    cfg.validate()?;
    if !domain.contains(start) {
        return Err(Error::PointOutsideDomain { point: start });
    }
    let mut rng = PathRng::for_path(cfg.seed, path_index);
    Ok(walk_exit(domain, start, cfg, potential, &mut rng))
}

fn walk_exit(
    domain: &Domain,
    start: Point,
    cfg: &PathConfig,
    potential: Option<&Potential>,
    rng: &mut PathRng,
) -> ExitSample {
    let bridge = cfg.exit_mode == ExitDetection::BrownianBridge && cfg.alpha == 2.0;
    let mut x = start;
    let mut t = 0.0f64;
    let mut v_int = 0.0f64;
    let eps = 1e-12 * cfg.horizon;
    loop {
        if t >= cfg.horizon - eps {
            return ExitSample { tau: f64::INFINITY, position: x, by_jump: false, v_integral: v_int };
        }
        let step = cfg.dt.min(cfg.horizon - t);
        if let Some(v) = potential {
            v_int += v.eval(domain, x) * step;
        }
        let inc = rng.stable_increment(cfg.alpha, cfg.d, step);
        let y = [x[0] + inc[0], x[1] + inc[1], x[2] + inc[2]];
        t += step;
        if !domain.contains(y) {
            return ExitSample {
                tau: t,
                position: y,
                by_jump: cfg.alpha < 2.0,
                v_integral: v_int,
            };
        }
        if bridge {
            // Half-space crossing probability for the bridge between two
            // interior endpoints: exp(-a b / dt) at per-coordinate
            // variance 2 per unit time.
            let a = domain.dist_to_boundary(x).unwrap_or(0.0);
            let b = domain.dist_to_boundary(y).unwrap_or(0.0);
            let p_cross = (-a * b / step).exp();
            if rng.uniform_open() < p_cross {
                let position = domain.nearest_boundary_point(y);
                return ExitSample { tau: t, position, by_jump: false, v_integral: v_int };
            }
        }
        x = y;
    }
}

/// Run `cfg.n_paths` independent paths (parallel dispatch).
pub fn collect_exit_samples(
    domain: &Domain,
    start: Point,
    cfg: &PathConfig,
    potential: Option<&Potential>,
) -> Result<Vec<ExitSample>> {
    cfg.validate()?;
    if !domain.contains(start) {
        return Err(Error::PointOutsideDomain { point: start });
    }
    Ok(exec::map_indexed(cfg.n_paths, |i| {
        let mut rng = PathRng::for_path(cfg.seed, i as u64);
        walk_exit(domain, start, cfg, potential, &mut rng)
    }))
}

/// Sequential twin of [`collect_exit_samples`] for benchmarks and
/// determinism checks.
pub fn collect_exit_samples_seq(
    domain: &Domain,
    start: Point,
    cfg: &PathConfig,
    potential: Option<&Potential>,
) -> Result<Vec<ExitSample>> {
    cfg.validate()?;
    if !domain.contains(start) {
        return Err(Error::PointOutsideDomain { point: start });
    }
    Ok(exec::map_indexed_seq(cfg.n_paths, |i| {
        let mut rng = PathRng::for_path(cfg.seed, i as u64);
        walk_exit(domain, start, cfg, potential, &mut rng)
    }))
}

/// `P_start(tau > t)` with a Wilson 95% interval.
pub fn survival_probability(
    domain: &Domain,
    start: Point,
    t: f64,
    cfg: &PathConfig,
) -> Result<Estimate> {
    if t > cfg.horizon {
        return Err(Error::InvalidConfig(format!(
            "survival time {t} exceeds horizon {}",
            cfg.horizon
        )));
    }
    if t == 0.0 {
        return Ok(Estimate { value: 1.0, std_err: 0.0, n: cfg.n_paths });
    }
    let mut local = cfg.clone();
    local.horizon = t;
    let samples = collect_exit_samples(domain, start, &local, None)?;
    let survived = samples.iter().filter(|s| !s.exited()).count();
    Ok(Estimate::wilson(survived, samples.len()))
}

/// Monte Carlo evaluation of the Feynman-Kac functional
/// `E[ exp(int_0^{t & tau} V) u(X_{t & tau}) ]` with `u` read by
/// nearest-node lookup (zero outside the domain).
pub fn feynman_kac(
    domain: &Domain,
    potential: &Potential,
    terminal: &[f64],
    start: Point,
    t: f64,
    cfg: &PathConfig,
) -> Result<Estimate> {
    assert_eq!(terminal.len(), domain.interior_count());
    if t > cfg.horizon {
        return Err(Error::InvalidConfig(format!(
            "time {t} exceeds horizon {}",
            cfg.horizon
        )));
    }
    if !domain.contains(start) {
        return Err(Error::PointOutsideDomain { point: start });
    }
    if t == 0.0 {
        let v = domain.rank_at(start).map_or(0.0, |r| terminal[r]);
        return Ok(Estimate { value: v, std_err: 0.0, n: cfg.n_paths });
    }
    let mut local = cfg.clone();
    local.horizon = t;
    let samples = collect_exit_samples(domain, start, &local, Some(potential))?;
    let values: Vec<f64> = samples
        .iter()
        .map(|s| {
            if s.exited() {
                0.0
            } else {
                let u = domain.rank_at(s.position).map_or(0.0, |r| terminal[r]);
                s.v_integral.exp() * u
            }
        })
        .collect();
    Ok(Estimate::from_values(&values))
}

/// Kernel-density estimate of the free-space transition density.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub t: f64,
    pub x: Point,
    pub y: Point,
    pub value: f64,
    pub half_width95: f64,
    pub n: usize,
    pub bandwidth: f64,
    /// Set when the bandwidth is too coarse for the density scale t^{1/alpha}.
    pub under_resolved: bool,
}

/// Estimate `p(t, x, y)` from `n` endpoints of exact stable increments.
pub fn transition_density(
    t: f64,
    x: Point,
    y: Point,
    cfg: &PathConfig,
    bandwidth: f64,
) -> Result<DensityEstimate> {
    if t <= 0.0 || bandwidth <= 0.0 {
        return Err(Error::InvalidConfig(
            "transition density needs t > 0 and bandwidth > 0".into(),
        ));
    }
    let d = cfg.d;
    let inv = 1.0 / bandwidth;
    let norm = (2.0 * std::f64::consts::PI).sqrt().powi(d as i32);
    let values = exec::map_indexed(cfg.n_paths, |i| {
        let mut rng = PathRng::for_path(cfg.seed, i as u64);
        // A stable increment over [0, t] is sampled exactly in one draw.
        let incr = rng.stable_increment(cfg.alpha, d, t);
        let mut k = 1.0 / (norm * bandwidth.powi(d as i32));
        for m in 0..d {
            let z = (x[m] + incr[m] - y[m]) * inv;
            k *= (-0.5 * z * z).exp();
        }
        k
    });
    let est = Estimate::from_values(&values);
    Ok(DensityEstimate {
        t,
        x,
        y,
        value: est.value,
        half_width95: est.half_width95(),
        n: est.n,
        bandwidth,
        under_resolved: bandwidth > 0.5 * t.powf(1.0 / cfg.alpha),
    })
}

/// One row of the exit-probability sweep.
#[derive(Debug, Clone)]
pub struct ExitBoundRow {
    pub r: f64,
    pub t: f64,
    pub prob: Estimate,
    /// `P(tau(B_r) <= t) / (t r^{-alpha})` and its 95% bounds.
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
}

#[derive(Debug, Clone)]
pub struct ExitBoundTable {
    pub alpha: f64,
    pub rows: Vec<ExitBoundRow>,
    /// Largest observed ratio: the empirical exit-bound constant.
    pub kappa: f64,
}

/// Sweep `P_0(tau(B_r) <= t) / (t r^{-alpha})` over radii and times.
pub fn exit_bound_sweep(
    radii: &[f64],
    times: &[f64],
    alpha: f64,
    cfg: &PathConfig,
) -> Result<ExitBoundTable> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let t_max = times.iter().cloned().fold(0.0f64, f64::max);
    let mut rows = Vec::new();
    for &r in radii {
        let ball = Domain::ball(cfg.d, [0.0; 3], r, r / 8.0)?;
        let mut local = cfg.clone();
        local.alpha = alpha;
        local.horizon = t_max;
        local.exit_mode = ExitDetection::FirstLanding;
        let samples = collect_exit_samples(&ball, [0.0; 3], &local, None)?;
        for &t in times {
            let hits = samples.iter().filter(|s| s.tau <= t).count();
            let prob = Estimate::wilson(hits, samples.len());
            let scale = t * r.powf(-alpha);
            rows.push(ExitBoundRow {
                r,
                t,
                ratio: prob.value / scale,
                ratio_lo: (prob.value - prob.half_width95()) / scale,
                ratio_hi: (prob.value + prob.half_width95()) / scale,
                prob,
            });
        }
    }
    let kappa = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    Ok(ExitBoundTable { alpha, rows, kappa })
}

/// Write the sweep as CSV with the configuration echoed in header comments.
pub fn write_sweep_csv<W: std::io::Write>(
    table: &ExitBoundTable,
    cfg: &PathConfig,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "# alpha={} d={} dt={} n={} seed={}",
        table.alpha, cfg.d, cfg.dt, cfg.n_paths, cfg.seed
    )?;
    writeln!(w, "r,t,estimate,ci_lo,ci_hi")?;
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{:.8e},{:.8e},{:.8e}",
            row.r, row.t, row.ratio, row.ratio_lo, row.ratio_hi
        )?;
    }
    Ok(())
}

/// Two estimators of the same jump functional (Levy system balance).
#[derive(Debug, Clone)]
pub struct JumpBalance {
    pub jump_count: Estimate,
    pub kernel_integral: Estimate,
    /// Per-path difference (count minus integral): zero in expectation.
    pub paired_diff: Estimate,
}

/// Compare the mean number of jumps into `window` before `t` (stopping at
/// the first entry) against the kernel integral along the path. The
/// `kernel_scale` knob multiplies the integral side only, as a linearity
/// diagnostic; physical runs use 1.
pub fn levy_jump_balance_scaled(
    window: &Domain,
    start: Point,
    t: f64,
    cfg: &PathConfig,
    kernel_scale: f64,
) -> Result<JumpBalance> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 2.0) {
        return Err(Error::AlphaOutOfRange(cfg.alpha));
    }
    let d = cfg.d;
    let h = window.h();
    if window.contains(start) {
        return Err(Error::SingularConfiguration(
            "start point lies inside the window set".into(),
        ));
    }
    let cells: Vec<Point> = (0..window.interior_count())
        .map(|r| window.interior_point(r))
        .collect();
    let min_dist = cells
        .iter()
        .map(|&c| dist(c, start))
        .fold(f64::INFINITY, f64::min);
    if min_dist <= 2.0 * h {
        return Err(Error::SingularConfiguration(format!(
            "window set within 2h of the start point ({min_dist} <= {})",
            2.0 * h
        )));
    }
    let c_kernel = kernel_constant(d, cfg.alpha) * kernel_scale;
    let cell_vol = window.grid().cell_volume();
    let power = -(d as f64) - cfg.alpha;
    let per_path: Vec<(f64, f64)> = exec::map_indexed(cfg.n_paths, |i| {
        let mut rng = PathRng::for_path(cfg.seed, i as u64);
        let mut x = start;
        let mut s = 0.0f64;
        let mut integral = 0.0f64;
        let mut count = 0.0f64;
        while s < t - 1e-12 * t {
            let step = cfg.dt.min(t - s);
            // Left-endpoint kernel integral over the window cells.
            let mut rate = 0.0;
            for z in &cells {
                let dvec = sub(*z, x);
                let r2 = dvec[0] * dvec[0] + dvec[1] * dvec[1] + dvec[2] * dvec[2];
                rate += r2.powf(power / 2.0);
            }
            integral += c_kernel * cell_vol * rate * step;
            let inc = rng.stable_increment(cfg.alpha, d, step);
            x = [x[0] + inc[0], x[1] + inc[1], x[2] + inc[2]];
            s += step;
            if window.contains(x) {
                count = 1.0;
                break;
            }
        }
        (count, integral)
    });
    let counts: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let integrals: Vec<f64> = per_path.iter().map(|p| p.1).collect();
    let diffs: Vec<f64> = per_path.iter().map(|p| p.0 - p.1).collect();
    Ok(JumpBalance {
        jump_count: Estimate::from_values(&counts),
        kernel_integral: Estimate::from_values(&integrals),
        paired_diff: Estimate::from_values(&diffs),
    })
}

pub fn levy_jump_balance(
    window: &Domain,
    start: Point,
    t: f64,
    cfg: &PathConfig,
) -> Result<JumpBalance> {
    levy_jump_balance_scaled(window, start, t, cfg, 1.0)
}
