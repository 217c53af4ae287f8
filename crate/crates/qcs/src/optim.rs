//! Small numeric toolbox shared by the solvers: golden-section search,
//! derivative-free smooth descent with finite-difference gradients, compass
//! pattern search for nonsmooth objectives, seeded multi-start helpers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of a local minimization.
#[derive(Debug, Clone)]
pub struct LocalMin {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the last finite-difference gradient (smooth solver only).
    pub gradient_norm: f64,
}

const GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - GOLDEN_RATIO * (b - a);
    let mut x2 = a + GOLDEN_RATIO * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a) <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN_RATIO * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN_RATIO * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    let fm = f(xm);
    if f1 <= f2 && f1 <= fm {
        (x1, f1)
    } else if f2 <= fm {
        (x2, f2)
    } else {
        (xm, fm)
    }
}

/// Coarse grid scan on `[a, b]` followed by golden-section refinement around
/// the best bracket. Robust for objectives that are not globally unimodal.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    assert!(grid >= 2 && b > a);
    let n = grid;
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(n)];
    let (x, v) = golden_min(&mut f, lo, hi, tol);
    if v <= best_val {
        (x, v)
    } else {
        (xs[best], best_val)
    }
}

/// Central-difference gradient.
pub fn fd_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut work = x.to_vec();
    for i in 0..x.len() {
        let step = h * (1.0 + x[i].abs());
        work[i] = x[i] + step;
        let fp = f(&work);
        work[i] = x[i] - step;
        let fm = f(&work);
        work[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}

/// Options for the smooth local minimizer.
#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub gradient_tol: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            gradient_tol: 1e-9,
            max_iterations: 2000,
            fd_step: 1e-6,
        }
    }
}

/// Gradient descent with Barzilai-Borwein step and Armijo backtracking,
/// gradients by central differences. Intended for smooth low-dimensional
/// objectives where analytic derivatives are not worth the trouble.
pub fn minimize_smooth<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    opts: DescentOptions,
) -> LocalMin {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = fd_gradient(f, &x, opts.fd_step);
    let mut step = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let gnorm = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if gnorm <= opts.gradient_tol {
            converged = true;
            break;
        }
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut alpha = step.clamp(1e-12, 1e6);
        let mut accepted = false;
        let mut xn = vec![0.0; n];
        let mut fxn = fx;
        for _ in 0..60 {
            for i in 0..n {
                xn[i] = x[i] - alpha * g[i];
            }
            fxn = f(&xn);
            if fxn <= fx - 1e-4 * alpha * g2 {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        let gn = fd_gradient(f, &xn, opts.fd_step);
        // Barzilai-Borwein step for the next iteration.
        let mut sy = 0.0;
        let mut ss = 0.0;
        for i in 0..n {
            let s = xn[i] - x[i];
            let y = gn[i] - g[i];
            sy += s * y;
            ss += s * s;
        }
        step = if sy > 1e-300 { (ss / sy).clamp(1e-12, 1e6) } else { alpha * 2.0 };
        x = xn;
        fx = fxn;
        g = gn;
    }
    let gradient_norm = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    LocalMin {
        point: x,
        value: fx,
        iterations,
        converged,
        gradient_norm,
    }
}

/// Compass pattern search: probe +-h along each coordinate, accept
/// improvements, halve the step when a full sweep fails. Works on nonsmooth
/// objectives (min/max terms).
pub fn pattern_search<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    step0: f64,
    step_tol: f64,
    max_sweeps: usize,
) -> LocalMin {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut h = step0;
    let mut sweeps = 0;
    while h > step_tol && sweeps < max_sweeps {
        sweeps += 1;
        let mut improved = false;
        for i in 0..n {
            for s in [h, -h] {
                let old = x[i];
                x[i] = old + s;
                let v = f(&x);
                if v < fx {
                    fx = v;
                    improved = true;
                } else {
                    x[i] = old;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    LocalMin {
        point: x,
        value: fx,
        iterations: sweeps,
        converged: h <= step_tol,
        gradient_norm: f64::NAN,
    }
}

/// `exp` with the argument clamped to a safe range. Objectives in log
/// coordinates stay finite and positive even when a descent step overshoots
/// toward a recession direction.
pub fn safe_exp(t: f64) -> f64 {
    t.clamp(-300.0, 300.0).exp()
}

/// Deterministic per-trial generator: one seed, independent streams.
pub fn rng_for_trial(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform point in `[lo, hi]^n`.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Maps `f` over `items` on up to `threads` workers; the output order is the
/// input order regardless of scheduling.
pub fn par_map<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Vec<R>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let workers = threads.min(items.len());
    let mut indexed: Vec<(usize, R)> = Vec::with_capacity(items.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let f = &f;
            let items = &items;
            handles.push(scope.spawn(move || {
                let mut out = Vec::new();
                let mut i = w;
                while i < items.len() {
                    out.push((i, f(&items[i])));
                    i += workers;
                }
                out
            }));
        }
        for h in handles {
            indexed.extend(h.join().expect("worker panicked"));
        }
    });
    indexed.sort_by_key(|&(i, _)| i);
    indexed.into_iter().map(|(_, r)| r).collect()
}
