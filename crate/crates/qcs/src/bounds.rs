//! Numeric minimization of cyclic p-sums, the closed-form bounds that are
//! known exactly, reference constants with provenance, and the sharp
//! three-term fraction inequality suite.
//!
//! For p <= 0 the cyclic-sum minimum is exactly n (a rearrangement of the
//! weighted AM-GM); at p = +inf it is floor((n+k-1)/k). No certifying
//! algorithm is known for finite p >= 1, so the numeric path reports the
//! best local minimum as an upper bound and says so.

use crate::error::{QcsError, Result};
use crate::optim::{self, DescentOptions};
use crate::report::{OptReport, SolveStatus};
use crate::sums::{diananda_sum, CyclicSumSpec, PowerOrder};

/// A reference constant with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct NamedConstant {
    pub name: &'static str,
    pub value: f64,
    pub citation: &'static str,
}

/// Optimal constant for the cyclic sum with 2-term denominators.
pub const GAMMA_2: NamedConstant = NamedConstant {
    name: "gamma_2",
    value: 0.98913,
    citation: "Drinfeld (1971): optimal constant in Shapiro's cyclic inequality",
};

/// Bound-sequence value at window length 3.
pub const GAMMA_3: NamedConstant = NamedConstant {
    name: "gamma_3",
    value: 0.97793,
    citation: "root of a transcendental equation bounding A(n,3)/n from above; \
               consistent with the Boarder-Daykin computation",
};

/// Limit of the bound sequence as the window length grows.
pub const GAMMA_LIMIT: NamedConstant = NamedConstant {
    name: "gamma_limit",
    value: 0.930498,
    citation: "limit of the upper-bound sequence gamma_k for cyclic sums with \
               k-term denominators",
};

/// Numerical upper bound on `inf_n A(n,3)/n`.
pub const BOARDER_DAYKIN_K3: NamedConstant = NamedConstant {
    name: "boarder_daykin_k3",
    value: 0.97794,
    citation: "Boarder & Daykin (1973): numerical minimization of cyclic sums \
               with 3-term denominators",
};

/// Asymptotic constant in `min g_n = 3n - C + o(1)` for the chain-with-hub
/// sum `sum (x_j + 1/x_j) + sum x_j/x_{j+1}`.
pub const SHALLIT_C: NamedConstant = NamedConstant {
    name: "shallit_c",
    value: 1.369_451_4,
    citation: "Shallit (1994): asymptotic constant of the chain-with-hub \
               minimization problem",
};

/// Asymptotic constant in the variable-window bound `e ln n - A + O(1/ln n)`.
pub const VARIABLE_WINDOW_A: NamedConstant = NamedConstant {
    name: "variable_window_a",
    value: 1.704_656,
    citation: "additive constant in the asymptotics of the uniform bound for \
               cyclic sums with per-index window lengths",
};

/// Phase constant in the oscillatory correction `e ||b + ln x||^2 / (2 ln x)`.
pub const PHASE_B: NamedConstant = NamedConstant {
    name: "phase_b",
    value: 0.697_39,
    citation: "phase of the nearest-integer correction term in the functional \
               equation asymptotics",
};

/// Lower bound on `sup {p : B(2,p) = 1}`.
pub const NU_2_LOWER: NamedConstant = NamedConstant {
    name: "nu_2_lower",
    value: 0.618_033_988_749_894_9,
    citation: "Diananda (1974): nu_2 >= (sqrt(5)-1)/2",
};

/// Every table entry.
pub fn reference_constants() -> [&'static NamedConstant; 8] {
    [
        &GAMMA_2,
        &GAMMA_3,
        &GAMMA_LIMIT,
        &BOARDER_DAYKIN_K3,
        &SHALLIT_C,
        &VARIABLE_WINDOW_A,
        &PHASE_B,
        &NU_2_LOWER,
    ]
}

/// Multi-start options for the nonconvex numeric paths.
#[derive(Debug, Clone, Copy)]
pub struct MultiStartOptions {
    pub starts: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for MultiStartOptions {
    fn default() -> Self {
        MultiStartOptions {
            starts: 64,
            seed: 0,
            threads: 1,
        }
    }
}

/// Minimizes the cyclic p-sum `S(n,k,p)` over positive vectors.
///
/// Exact fast paths: p <= 0 returns n (attained at ones); p = +inf returns
/// `floor((n+k-1)/k)`. For finite p > 0 the best of `opts.starts` seeded
/// local minimizations is returned with `upper_bound_only = true`: no
/// certifying lower-bound method is known there.
pub fn minimize_diananda(
    n: usize,
    k: usize,
    p: PowerOrder,
    opts: &MultiStartOptions,
) -> Result<OptReport> {
    let spec = CyclicSumSpec::uniform(n, k, p)?;
    let exact_at_ones = match p {
        PowerOrder::NegInf => true,
        PowerOrder::Finite(q) => q <= 0.0,
        PowerOrder::PosInf => false,
    };
    if exact_at_ones {
        return Ok(OptReport {
            value: n as f64,
            minimizer: vec![1.0; n],
            attained: true,
            status: SolveStatus::Converged,
            upper_bound_only: false,
            certificate: None,
            iterations: 0,
            gradient_norm: 0.0,
        });
    }
    if p.is_max() {
        let value = n.div_ceil(k) as f64;
        return Ok(OptReport {
            value,
            minimizer: vec![1.0; n],
            // Attained by ones only in the trivial window case k = 1.
            attained: k == 1,
            status: SolveStatus::Converged,
            upper_bound_only: false,
            certificate: None,
            iterations: 0,
            gradient_norm: 0.0,
        });
    }

    let objective = move |t: &[f64]| {
        let x: Vec<f64> = t.iter().map(|&v| optim::safe_exp(v)).collect();
        diananda_sum(&spec, &x).expect("positive by construction")
    };
    let starts: Vec<Vec<f64>> = (0..opts.starts.max(1))
        .map(|i| optim::random_point(&mut optim::rng_for_trial(opts.seed, i as u64), n, -1.0, 1.0))
        .collect();
    let descent = DescentOptions::default();
    let runs = optim::par_map(starts, opts.threads, |t0| {
        let mut f = &objective;
        optim::minimize_smooth(&mut f, t0, descent)
    });
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    let shift = best.point[0];
    let minimizer: Vec<f64> = best.point.iter().map(|t| (t - shift).exp()).collect();
    Ok(OptReport {
        value: best.value,
        minimizer,
        attained: true,
        status: if best.converged {
            SolveStatus::Converged
        } else {
            SolveStatus::IterationLimit
        },
        upper_bound_only: true,
        certificate: None,
        iterations: best.iterations,
        gradient_norm: best.gradient_norm,
    })
}

/// Numeric cross-check of the p = +inf formula by smoothing continuation:
/// minimize at p = 4, 8, 16, 32, 64 (warm-started), then evaluate the max
/// objective at every candidate and return the least value found. Always an
/// upper bound on the p = +inf infimum.
pub fn diananda_infty_search(n: usize, k: usize, opts: &MultiStartOptions) -> Result<f64> {
    CyclicSumSpec::uniform(n, k, PowerOrder::PosInf)?;
    let max_spec = CyclicSumSpec::uniform(n, k, PowerOrder::PosInf)?;
    let eval_max = |t: &[f64]| {
        let x: Vec<f64> = t.iter().map(|&v| optim::safe_exp(v)).collect();
        diananda_sum(&max_spec, &x).expect("positive by construction")
    };

    // Structured seeds: ones at positions spaced k apart (each shift),
    // small values elsewhere. These are the known near-minimizing shapes.
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for shift in 0..k.min(n) {
        let mut t = vec![-3.0; n];
        let mut j = shift;
        loop {
            t[j % n] = 0.0;
            j += k;
            if j >= n + shift {
                break;
            }
        }
        seeds.push(t);
    }
    for i in 0..opts.starts.max(8) {
        seeds.push(optim::random_point(
            &mut optim::rng_for_trial(opts.seed, 1000 + i as u64),
            n,
            -1.0,
            1.0,
        ));
    }

    let mut best_max = seeds.iter().map(|t| eval_max(t)).fold(f64::INFINITY, f64::min);
    let descent = DescentOptions {
        gradient_tol: 1e-9,
        max_iterations: 3000,
        fd_step: 1e-7,
    };
    for stage_p in [4.0, 8.0, 16.0, 32.0, 64.0] {
        let spec = CyclicSumSpec::uniform(n, k, PowerOrder::Finite(stage_p))?;
        let runs = optim::par_map(seeds.clone(), opts.threads, |t0| {
            let mut f = |t: &[f64]| {
                let x: Vec<f64> = t.iter().map(|&v| optim::safe_exp(v)).collect();
                diananda_sum(&spec, &x).expect("positive by construction")
            };
            optim::minimize_smooth(&mut f, t0, descent)
        });
        let mut ranked: Vec<optim::LocalMin> = runs;
        ranked.sort_by(|a, b| a.value.total_cmp(&b.value));
        for r in &ranked {
            best_max = best_max.min(eval_max(&r.point));
        }
        // Warm starts for the next smoothing stage: the best few points.
        seeds = ranked.into_iter().take(8).map(|r| r.point).collect();
    }
    Ok(best_max)
}

/// Lower bound `k (2^{1/k} - 1)` for `A(n,k)/n`, valid for all n >= k.
pub fn diananda_lb(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(QcsError::Domain("need k >= 1".into()));
    }
    let kf = k as f64;
    Ok(kf * (2f64.powf(1.0 / kf) - 1.0))
}

fn u_factor(t: f64, k: f64) -> f64 {
    (k.powf(t) - 1.0).powf(t) * t.powf(-t)
}

/// Lower bound on `B(k,p)` for p > 1 from a valid lower bound on `B(k,1)`:
/// `Bk1_lb^{1/p} * k^{-1/q^2}/(k-1) * U_{1/p}(k) * U_{1/q}(k)` with
/// `1/p + 1/q = 1` and `U_t(k) = (k^t - 1)^t t^{-t}`. Monotone increasing in
/// `Bk1_lb`, so any valid lower bound plugs in.
pub fn bkp_lower_bound(k: usize, p: f64, bk1_lb: f64) -> Result<f64> {
    if k < 2 {
        return Err(QcsError::Domain("need k >= 2 (the k-1 factor vanishes)".into()));
    }
    if !p.is_finite() || p <= 1.0 {
        return Err(QcsError::Domain(format!("need p > 1, got {p}")));
    }
    if !(bk1_lb > 0.0 && bk1_lb <= 1.0) {
        return Err(QcsError::Domain(format!(
            "B(k,1) lower bound must lie in (0, 1], got {bk1_lb}"
        )));
    }
    let q = p / (p - 1.0);
    let kf = k as f64;
    Ok(bk1_lb.powf(1.0 / p) * kf.powf(-1.0 / (q * q)) / (kf - 1.0)
        * u_factor(1.0 / p, kf)
        * u_factor(1.0 / q, kf))
}

/// The p-dependent factor of [`bkp_lower_bound`] alone (decreases from 1 to
/// 1/k as p runs from 1 to infinity).
pub fn bkp_factor(k: usize, p: f64) -> Result<f64> {
    bkp_lower_bound(k, p, 1.0)
}

/// Left side `a/(b+cx) + b/(c+ax) + c/(a+bx)` of the three-term fraction
/// inequality.
pub fn mavlo_lhs(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    for v in [a, b, c] {
        if !v.is_finite() || v < 0.0 {
            return Err(QcsError::Domain(format!("coefficients must be >= 0, got {v}")));
        }
    }
    if a == 0.0 && b == 0.0 && c == 0.0 {
        return Err(QcsError::Domain("coefficients must not all vanish".into()));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(QcsError::Domain(format!("need x > 0, got {x}")));
    }
    let (da, db, dc) = (b + c * x, c + a * x, a + b * x);
    if da <= 0.0 || db <= 0.0 || dc <= 0.0 {
        return Err(QcsError::Domain("zero denominator".into()));
    }
    Ok(a / da + b / db + c / dc)
}

/// The classical and sharp lower bounds `(3x/(1+x^3), 3/(1+x))`; the second
/// dominates the first, with equality only at x = 1.
pub fn mavlo_bounds(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || x <= 0.0 {
        return Err(QcsError::Domain(format!("need x > 0, got {x}")));
    }
    Ok((3.0 * x / (1.0 + x * x * x), 3.0 / (1.0 + x)))
}

/// Relative residual of the denominator-exchange identity
/// `(1+x^3) L = (B/A) x^2 + A/B + (C/B) x^2 + B/C + (A/C) x^2 + C/A - 3x`
/// with `A = b+cx, B = c+ax, C = a+bx`.
pub fn georgiev_identity_residual(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let lhs = mavlo_lhs(a, b, c, x)?;
    let (aa, bb, cc) = (b + c * x, c + a * x, a + b * x);
    let x2 = x * x;
    let left = (1.0 + x2 * x) * lhs;
    let right = (bb / aa) * x2 + aa / bb + (cc / bb) * x2 + bb / cc + (aa / cc) * x2 + cc / aa
        - 3.0 * x;
    Ok((left - right).abs() / left.abs().max(1.0))
}

/// Inverts the homogenizing substitution: given positive `(u, v, w)`,
/// returns `(a, b, c, x)` with `a = 1`, `x = (uvw)^{1/3}`, and
/// `u = xb/a`, `v = xc/b`, `w = xa/c` holding exactly.
pub fn mavlo_substitution(u: f64, v: f64, w: f64) -> Result<(f64, f64, f64, f64)> {
    for t in [u, v, w] {
        if !t.is_finite() || t <= 0.0 {
            return Err(QcsError::Domain(format!("need positive input, got {t}")));
        }
    }
    let x = (u * v * w).powf(1.0 / 3.0);
    let a = 1.0;
    let b = u / x;
    let c = u * v / (x * x);
    Ok((a, b, c, x))
}
