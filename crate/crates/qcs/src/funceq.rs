//! The perturbed AM-GM functional equation and its relatives.
//!
//! `F` satisfies `F(x) = min_{0 < y < x-1} (F(y) + x/(y+1))` for `x > 1` with
//! `F(x) = x` on `[0, 1]`. It is tabulated by dynamic programming on an
//! ascending grid (uniform on [0,1], log-spaced above) with golden-section
//! refinement around each discrete argmin. The same staircase structure
//! appears three more times:
//! * finite chains `F_n` with explicit minimizing chains,
//! * the pure AM-GM curve `f(x) = min_n n x^{1/n}`,
//! * the chain-with-hub sums `g_n` solved exactly as pinned quotient sums.
//!
//! The variable-window cyclic bound equals `F(n)`, checked against brute
//! force over all window vectors for small n.

use std::io::Write;

use crate::bounds::{PHASE_B, VARIABLE_WINDOW_A};
use crate::error::{QcsError, Result};
use crate::gp::{self, SolveOptions};
use crate::optim::{self, DescentOptions};
use crate::report::{Certificate, OptReport};
use crate::sums::{diananda_sum, CyclicSumSpec};

const E: f64 = std::f64::consts::E;

/// Hard cap on the tabulation range.
pub const X_MAX_CAP: f64 = 1e5;

/// Distance from `y` to the nearest integer.
pub fn dist_to_nearest_int(y: f64) -> f64 {
    (y - y.round()).abs()
}

/// Grid densities for [`build_f_table_with`].
#[derive(Debug, Clone, Copy)]
pub struct TableOptions {
    pub x_max: f64,
    /// Declared refinement-stability target (halving the grid spacing moves
    /// values by less than this).
    pub tol: f64,
    pub unit_points: usize,
    pub points_per_decade: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            x_max: 16.0,
            tol: 1e-6,
            unit_points: 1024,
            points_per_decade: 4096,
        }
    }
}

/// Tabulated `F` on an adaptive grid.
#[derive(Debug, Clone)]
pub struct FuncEqTable {
    grid: Vec<f64>,
    values: Vec<f64>,
    recip: Vec<f64>, // 1/(grid + 1), the DP inner loop is all about these
    x_max: f64,
    tol: f64,
}

/// Builds the table with default grid densities.
pub fn build_f_table(x_max: f64, tol: f64) -> Result<FuncEqTable> {
    build_f_table_with(&TableOptions {
        x_max,
        tol,
        ..Default::default()
    })
}

pub fn build_f_table_with(opts: &TableOptions) -> Result<FuncEqTable> {
    if !opts.x_max.is_finite() || opts.x_max < 1.0 {
        return Err(QcsError::Domain(format!(
            "x_max must be >= 1, got {}",
            opts.x_max
        )));
    }
    if opts.x_max > X_MAX_CAP {
        return Err(QcsError::Capacity(format!(
            "x_max {} exceeds the tabulation cap {X_MAX_CAP}",
            opts.x_max
        )));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(QcsError::Domain("tol must be positive".into()));
    }
    if opts.unit_points < 16 || opts.points_per_decade < 16 {
        return Err(QcsError::Domain("grid too coarse".into()));
    }

    let u = opts.unit_points;
    let mut grid: Vec<f64> = (0..=u).map(|i| i as f64 / u as f64).collect();
    if opts.x_max > 1.0 {
        let decades = opts.x_max.log10();
        let m = (opts.points_per_decade as f64 * decades).ceil() as usize;
        for j in 1..=m {
            grid.push(10f64.powf(decades * j as f64 / m as f64));
        }
        let last = grid.len() - 1;
        grid[last] = opts.x_max;
    }
    let recip: Vec<f64> = grid.iter().map(|y| 1.0 / (y + 1.0)).collect();

    let mut values = vec![0.0; grid.len()];
    values[..=u].copy_from_slice(&grid[..=u]); // initial condition, exact
    for i in (u + 1)..grid.len() {
        let x = grid[i];
        values[i] = dp_step(&grid, &values, &recip, x, i);
    }
    Ok(FuncEqTable {
        grid,
        values,
        recip,
        x_max: opts.x_max,
        tol: opts.tol,
    })
}

/// One Bellman update: `min_{0 < y < x-1} (F(y) + x/(y+1))` using table
/// entries below index `limit` plus local golden-section refinement.
fn dp_step(grid: &[f64], values: &[f64], recip: &[f64], x: f64, limit: usize) -> f64 {
    let cutoff = x - 1.0;
    let scan_end = grid[..limit].partition_point(|&y| y < cutoff);
    debug_assert!(scan_end > 0, "cutoff {cutoff} below the first node");
    let mut best = f64::INFINITY;
    let mut best_j = 0;
    for j in 0..scan_end {
        let cand = values[j] + x * recip[j];
        if cand < best {
            best = cand;
            best_j = j;
        }
    }
    // Refine on the cells adjacent to the discrete argmin, capped by the
    // open right endpoint.
    let lo = grid[best_j.saturating_sub(1)];
    let hi = if best_j + 1 < scan_end {
        grid[best_j + 1]
    } else {
        cutoff
    };
    let hi = hi.min(cutoff);
    if hi > lo {
        let mut h = |y: f64| interp(grid, values, y) + x / (y + 1.0);
        let xtol = 1e-12 * (1.0 + hi);
        let (_, refined) = optim::golden_min(&mut h, lo, hi, xtol);
        if refined < best {
            best = refined;
        }
    }
    best
}

/// Linear interpolation of the tabulated values.
fn interp(grid: &[f64], values: &[f64], y: f64) -> f64 {
    debug_assert!(y >= 0.0 && y <= *grid.last().unwrap());
    if y <= 1.0 {
        return y; // exact on the initial segment
    }
    let j = grid.partition_point(|&g| g <= y);
    if j >= grid.len() {
        return values[grid.len() - 1];
    }
    let (g0, g1) = (grid[j - 1], grid[j]);
    let w = (y - g0) / (g1 - g0);
    values[j - 1] * (1.0 - w) + values[j] * w
}

impl FuncEqTable {
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `F(x)` for any `0 <= x <= x_max`: exact below 1, otherwise a fresh
    /// Bellman step against the table.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(QcsError::Domain(format!("need x >= 0, got {x}")));
        }
        if x <= 1.0 {
            return Ok(x);
        }
        if x > self.x_max {
            return Err(QcsError::Domain(format!(
                "x = {x} beyond the tabulated range {}; rebuild with a larger x_max",
                self.x_max
            )));
        }
        Ok(dp_step(&self.grid, &self.values, &self.recip, x, self.grid.len()))
    }

    /// Verifies the construction invariants: `F(x) = x` exactly on the unit
    /// grid and monotonicity along the whole grid.
    pub fn validate(&self) -> Result<()> {
        for (i, (&x, &v)) in self.grid.iter().zip(&self.values).enumerate() {
            if x <= 1.0 && v != x {
                return Err(QcsError::NonConvergence(format!(
                    "initial condition violated at node {i}: F({x}) = {v}"
                )));
            }
            if i > 0 && v + 1e-12 < self.values[i - 1] {
                return Err(QcsError::NonConvergence(format!(
                    "monotonicity violated at node {i}: {v} < {}",
                    self.values[i - 1]
                )));
            }
        }
        Ok(())
    }

    /// Writes `x,F(x)` rows (15 significant digits).
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,F")?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{x:.14e},{v:.14e}")?;
        }
        Ok(())
    }
}

/// A minimizing chain for the n-stage staircase sum
/// `t_1 + t_2/(t_1+1) + ... + x/(t_{n-1}+1)` over `t >= 0`.
#[derive(Debug, Clone)]
pub struct StaircaseResult {
    pub n: usize,
    pub value: f64,
    /// The minimizing `(t_1, ..., t_{n-1})`; empty for n = 1.
    pub chain: Vec<f64>,
    /// Set when the infimum over the open domain is reached on the closure
    /// (some `t_j = 0`).
    pub boundary: bool,
}

/// Evaluates the staircase sum at a chain.
pub fn staircase_value(x: f64, chain: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut prev = 0.0;
    for &t in chain {
        total += t / (prev + 1.0);
        prev = t;
    }
    total + x / (prev + 1.0)
}

/// Minimizes the n-stage staircase sum by grid dynamic programming over the
/// stages followed by coordinate-wise golden polish of the backtracked
/// chain.
pub fn staircase_min(x: f64, n: usize) -> Result<StaircaseResult> {
    if n < 1 {
        return Err(QcsError::Domain("need n >= 1".into()));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(QcsError::Domain(format!("need x > 0, got {x}")));
    }
    if n == 1 {
        return Ok(StaircaseResult {
            n,
            value: x,
            chain: Vec::new(),
            boundary: false,
        });
    }

    // Stage grid on [0, x].
    let mut grid: Vec<f64> = (0..=512).map(|i| i as f64 / 512.0 * x.min(1.0)).collect();
    if x > 1.0 {
        let decades = x.log10();
        let m = ((1024.0 * decades).ceil() as usize).max(16);
        for j in 1..=m {
            grid.push(10f64.powf(decades * j as f64 / m as f64));
        }
        let last = grid.len() - 1;
        grid[last] = x;
    }

    // stage[m][j] = F_{m+1}(grid[j]) for m = 0 .. n-2.
    let mut stage: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    stage.push(grid.clone()); // F_1(t) = t
    for _ in 2..n {
        let prev = stage.last().unwrap();
        let next: Vec<f64> = grid
            .iter()
            .map(|&s| stage_step(&grid, prev, s))
            .collect();
        stage.push(next);
    }

    // Backtrack the chain from x down the stages.
    let mut chain_rev = Vec::with_capacity(n - 1);
    let mut u = x;
    for m in (0..n - 1).rev() {
        let t = stage_argmin(&grid, &stage[m], u);
        chain_rev.push(t);
        u = t;
    }
    let mut chain: Vec<f64> = chain_rev.into_iter().rev().collect();

    // Coordinate polish: the sum is convex in each coordinate separately.
    let mut value = staircase_value(x, &chain);
    for _ in 0..400 {
        let before = value;
        for j in 0..chain.len() {
            let prev = if j == 0 { 0.0 } else { chain[j - 1] };
            let next_num = if j + 1 < chain.len() { chain[j + 1] } else { x };
            let f = |t: f64| t / (prev + 1.0) + next_num / (t + 1.0);
            let (t, _) = optim::golden_min(f, 0.0, x, 1e-13 * (1.0 + x));
            chain[j] = t;
        }
        value = staircase_value(x, &chain);
        if before - value <= 1e-14 * (1.0 + value.abs()) {
            break;
        }
    }
    // Golden-section x-resolution is ~sqrt(eps) * scale, so boundary
    // contact is detected with a matching threshold.
    let boundary = chain.iter().any(|&t| t <= 1e-6 * (1.0 + x));
    Ok(StaircaseResult {
        n,
        value,
        chain,
        boundary,
    })
}

fn stage_step(grid: &[f64], prev: &[f64], s: f64) -> f64 {
    stage_scan(grid, prev, s).1
}

fn stage_argmin(grid: &[f64], prev: &[f64], s: f64) -> f64 {
    stage_scan(grid, prev, s).0
}

fn stage_scan(grid: &[f64], prev: &[f64], s: f64) -> (f64, f64) {
    let end = grid.partition_point(|&t| t <= s);
    let mut best = f64::INFINITY;
    let mut best_j = 0;
    for j in 0..end.max(1) {
        let cand = prev[j] + s / (grid[j] + 1.0);
        if cand < best {
            best = cand;
            best_j = j;
        }
    }
    let lo = grid[best_j.saturating_sub(1)];
    let hi = grid[(best_j + 1).min(grid.len() - 1)].min(s.max(grid[0]));
    let mut h = |t: f64| interp_stage(grid, prev, t) + s / (t + 1.0);
    if hi > lo {
        let (t, v) = optim::golden_min(&mut h, lo, hi, 1e-12 * (1.0 + hi));
        if v < best {
            return (t, v);
        }
    }
    (grid[best_j], best)
}

fn interp_stage(grid: &[f64], values: &[f64], t: f64) -> f64 {
    let j = grid.partition_point(|&g| g <= t);
    if j == 0 {
        return values[0];
    }
    if j >= grid.len() {
        return values[grid.len() - 1];
    }
    let (g0, g1) = (grid[j - 1], grid[j]);
    let w = (t - g0) / (g1 - g0);
    values[j - 1] * (1.0 - w) + values[j] * w
}

/// `F(x) - [e ln x - A + e ||b + ln x||^2 / (2 ln x)]`, the residual of the
/// two-term asymptotic expansion with the oscillatory correction.
pub fn f_residual(x: f64, table: &FuncEqTable) -> Result<f64> {
    if x.is_nan() || x <= E * E {
        return Err(QcsError::Domain(format!("need x > e^2, got {x}")));
    }
    let fx = table.eval(x)?;
    let lx = x.ln();
    let d = dist_to_nearest_int(PHASE_B.value + lx);
    Ok(fx - (E * lx - VARIABLE_WINDOW_A.value + E * d * d / (2.0 * lx)))
}

/// Same residual with the oscillatory correction dropped (for comparing the
/// quality of the expansion).
pub fn f_residual_uncorrected(x: f64, table: &FuncEqTable) -> Result<f64> {
    if x.is_nan() || x <= E * E {
        return Err(QcsError::Domain(format!("need x > e^2, got {x}")));
    }
    let fx = table.eval(x)?;
    Ok(fx - (E * x.ln() - VARIABLE_WINDOW_A.value))
}

/// The AM-GM curve `f(x) = min_{n in N} n x^{1/n}` by exact integer scan;
/// returns the value and the minimizing n.
pub fn amgm_f(x: f64) -> Result<(f64, u64)> {
    if !x.is_finite() || x <= 0.0 {
        return Err(QcsError::Domain(format!("need x > 0, got {x}")));
    }
    if x <= 1.0 {
        return Ok((x, 1));
    }
    let upper = (3.0 * x.ln()).ceil() as u64 + 2;
    let mut best = (f64::INFINITY, 0u64);
    for n in 1..=upper {
        let v = n as f64 * (x.ln() / n as f64).exp();
        if v < best.0 {
            best = (v, n);
        }
    }
    Ok(best)
}

/// `f(x) - e ln x - e ||ln x||^2 / (2 ln x)`: residual of the AM-GM curve
/// expansion.
pub fn amgm_residual(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 1.0 {
        return Err(QcsError::Domain(format!("need x > 1, got {x}")));
    }
    let (fx, _) = amgm_f(x)?;
    let lx = x.ln();
    let d = dist_to_nearest_int(lx);
    Ok(fx - E * lx - E * d * d / (2.0 * lx))
}

/// Residual without the nearest-integer correction.
pub fn amgm_residual_uncorrected(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 1.0 {
        return Err(QcsError::Domain(format!("need x > 1, got {x}")));
    }
    let (fx, _) = amgm_f(x)?;
    Ok(fx - E * x.ln())
}

/// Result of minimizing the chain-with-hub sum
/// `g_n = sum_j (x_j + 1/x_j) + sum_j x_j/x_{j+1}`.
#[derive(Debug, Clone)]
pub struct ShallitReport {
    pub report: OptReport,
    /// `3n - min g_n`; increases to the asymptotic constant.
    pub c_n: f64,
}

/// Builds the chain-with-hub graph (vertices 0..n; edges j->0, 0->j,
/// j->j+1), pins vertex 0 at 1, and solves the convex quotient sum. The
/// log-coordinate objective is convex, so the attained minimum is global.
pub fn shallit_min(n: usize) -> Result<ShallitReport> {
    if n < 1 {
        return Err(QcsError::Domain("need n >= 1".into()));
    }
    let name = |i: usize| i.to_string();
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for j in 1..=n {
        edges.push((name(j), name(0), 1.0));
        edges.push((name(0), name(j), 1.0));
    }
    for j in 1..n {
        edges.push((name(j), name(j + 1), 1.0));
    }
    let trip: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|(a, b, w)| (a.as_str(), b.as_str(), *w))
        .collect();
    let graph = crate::digraph::WeightedDigraph::from_weighted_edges(trip)?;
    let spec = gp::QuotientSumSpec::pinned(graph, "0", 1.0)?;
    let report = gp::minimize(&spec, &SolveOptions::default())?;
    let c_n = 3.0 * n as f64 - report.value;
    Ok(ShallitReport { report, c_n })
}

/// The uniform variable-window bound as `F(n)`.
pub fn a_n_star(n: usize, table: &FuncEqTable) -> Result<f64> {
    if n < 1 {
        return Err(QcsError::Domain("need n >= 1".into()));
    }
    table.eval(n as f64)
}

/// Brute-force check of the bridge: enumerate every window vector in
/// `[1..n]^n`, numerically minimize each cyclic sum (16 seeded starts), and
/// return the least value with its window vector.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub value: f64,
    pub windows: Vec<usize>,
}

pub fn a_n_star_bruteforce(n: usize, seed: u64) -> Result<BruteForceResult> {
    if n < 1 {
        return Err(QcsError::Domain("need n >= 1".into()));
    }
    if n > 5 {
        return Err(QcsError::Capacity(format!(
            "brute force enumerates n^n window vectors; capped at n = 5, got {n}"
        )));
    }
    let descent = DescentOptions {
        gradient_tol: 1e-8,
        max_iterations: 800,
        fd_step: 1e-6,
    };
    let mut best = BruteForceResult {
        value: f64::INFINITY,
        windows: Vec::new(),
    };
    let mut ks = vec![1usize; n];
    loop {
        let spec = CyclicSumSpec::per_index(n, ks.clone())?;
        let mut local_best = f64::INFINITY;
        for trial in 0..16u64 {
            let t0 = if trial == 0 {
                vec![0.0; n]
            } else {
                optim::random_point(&mut optim::rng_for_trial(seed, trial), n, -1.5, 1.5)
            };
            let mut f = |t: &[f64]| {
                let x: Vec<f64> = t.iter().map(|&v| optim::safe_exp(v)).collect();
                diananda_sum(&spec, &x).expect("positive by construction")
            };
            let out = optim::minimize_smooth(&mut f, &t0, descent);
            local_best = local_best.min(out.value);
        }
        if local_best < best.value {
            best = BruteForceResult {
                value: local_best,
                windows: ks.clone(),
            };
        }
        // Odometer over [1..n]^n.
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(best);
            }
            if ks[pos] < n {
                ks[pos] += 1;
                break;
            }
            ks[pos] = 1;
            pos += 1;
        }
    }
}

/// Staircase certificate wrapped as a generic report (CLI plumbing).
pub fn staircase_report(x: f64, n: usize) -> Result<OptReport> {
    let s = staircase_min(x, n)?;
    Ok(OptReport {
        value: s.value,
        minimizer: s.chain.clone(),
        attained: !s.boundary,
        status: crate::report::SolveStatus::Converged,
        upper_bound_only: false,
        certificate: Some(Certificate::Chain { points: s.chain }),
        iterations: 0,
        gradient_norm: 0.0,
    })
}
