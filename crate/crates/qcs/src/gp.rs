//! Minimization of weighted monomial-quotient sums
//! `S(w|y) = sum_u w_u * y_{from(u)} / y_{to(u)}` over positive `y`.
//!
//! In log coordinates `t = ln y` the objective `sum_u w_u exp(t_a - t_b)` is
//! smooth and convex, so a damped Newton iteration with one gauge-fixed
//! coordinate finds the global minimum whenever it is attained. The minimum
//! is attained exactly when the weighted support digraph is strongly
//! connected, and then the minimizer is unique up to a positive multiple;
//! otherwise the infimum decomposes over the condensation: terms crossing
//! condensation levels can be driven to zero, leaving the sum of the attained
//! minima of the per-component subproblems.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::digraph::{check_automorphism, is_strongly_connected, scc, WeightedDigraph};
use crate::error::{QcsError, Result};
use crate::optim;
use crate::report::{Certificate, OptReport, SolveStatus};

/// A quotient-sum objective, optionally inhomogeneous via one pinned vertex.
#[derive(Debug, Clone)]
pub struct QuotientSumSpec {
    graph: WeightedDigraph,
    pin: Option<(usize, f64)>,
}

impl QuotientSumSpec {
    /// Homogeneous spec (scale-invariant objective).
    pub fn new(graph: WeightedDigraph) -> Result<QuotientSumSpec> {
        Self::build(graph, None)
    }

    /// Spec with `vertex` held at the fixed positive `value`.
    pub fn pinned(graph: WeightedDigraph, vertex: &str, value: f64) -> Result<QuotientSumSpec> {
        if !value.is_finite() || value <= 0.0 {
            return Err(QcsError::Validation(format!(
                "pinned value must be positive, got {value}"
            )));
        }
        let v = graph
            .base()
            .index_of(vertex)
            .ok_or_else(|| QcsError::Validation(format!("unknown pinned vertex '{vertex}'")))?;
        Self::build(graph, Some((v, value)))
    }

    fn build(graph: WeightedDigraph, pin: Option<(usize, f64)>) -> Result<QuotientSumSpec> {
        if graph.base().vertex_count() == 0 {
            return Err(QcsError::Validation("empty graph".into()));
        }
        if graph.base().has_self_loop() {
            return Err(QcsError::Structure(
                "quotient sums reject self-loops (the term is constant)".into(),
            ));
        }
        Ok(QuotientSumSpec { graph, pin })
    }

    pub fn graph(&self) -> &WeightedDigraph {
        &self.graph
    }

    pub fn pin(&self) -> Option<(usize, f64)> {
        self.pin
    }

    fn vertex_count(&self) -> usize {
        self.graph.base().vertex_count()
    }

    /// Gauge-fixed coordinate: the pinned vertex, or vertex 0.
    fn fixed(&self) -> (usize, f64) {
        match self.pin {
            Some((v, val)) => (v, val.ln()),
            None => (0, 0.0),
        }
    }
}

/// Exact sum value at a positive assignment.
pub fn evaluate(spec: &QuotientSumSpec, y: &[f64]) -> Result<f64> {
    let base = spec.graph.base();
    if y.len() != base.vertex_count() {
        return Err(QcsError::Domain(format!(
            "{} values for {} vertices",
            y.len(),
            base.vertex_count()
        )));
    }
    for &v in y {
        if !v.is_finite() || v <= 0.0 {
            return Err(QcsError::Domain(format!("nonpositive value {v}")));
        }
    }
    let mut total = 0.0;
    for (i, &(a, b)) in base.edges().iter().enumerate() {
        total += spec.graph.weight(i) * y[a] / y[b];
    }
    Ok(total)
}

fn log_objective(spec: &QuotientSumSpec, t: &[f64]) -> f64 {
    let base = spec.graph.base();
    let mut total = 0.0;
    for (i, &(a, b)) in base.edges().iter().enumerate() {
        total += spec.graph.weight(i) * (t[a] - t[b]).exp();
    }
    total
}

/// Gradient of `t -> sum_u w_u exp(t_a - t_b)`.
pub fn log_gradient(spec: &QuotientSumSpec, t: &[f64]) -> Vec<f64> {
    let base = spec.graph.base();
    let mut g = vec![0.0; base.vertex_count()];
    for (i, &(a, b)) in base.edges().iter().enumerate() {
        let s = spec.graph.weight(i) * (t[a] - t[b]).exp();
        g[a] += s;
        g[b] -= s;
    }
    g
}

/// Solver options. `tolerance` bounds the max-norm of the log gradient.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub threads: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-10,
            max_iterations: 500,
            threads: 1,
        }
    }
}

/// Attainment classification of the infimum.
#[derive(Debug, Clone)]
pub enum Attainment {
    Attained,
    /// Increasing log coordinates along `direction` drives the objective to
    /// its infimum (the direction is constant on components and ascends the
    /// condensation).
    Recession { direction: Vec<f64> },
}

/// The infimum is attained iff the weighted support digraph is strongly
/// connected; otherwise reports a descent direction built from condensation
/// levels.
pub fn attainment_check(spec: &QuotientSumSpec) -> Attainment {
    let base = spec.graph.base();
    if is_strongly_connected(base) {
        return Attainment::Attained;
    }
    let d = scc(base);
    // Level = longest condensation path from the sources; strictly increases
    // along every condensation edge.
    let m = d.count();
    let mut level = vec![0usize; m];
    for c in 0..m {
        for &succ in d.condensation.out(c) {
            level[succ] = level[succ].max(level[c] + 1);
        }
    }
    let direction: Vec<f64> = (0..base.vertex_count())
        .map(|v| level[d.component_of[v]] as f64)
        .collect();
    Attainment::Recession { direction }
}

/// Newton iteration from the gauge-fixed origin.
pub fn minimize(spec: &QuotientSumSpec, opts: &SolveOptions) -> Result<OptReport> {
    let t0 = vec![0.0; spec.vertex_count()];
    minimize_from(spec, &t0, opts)
}

/// Newton iteration from a caller-supplied start (log coordinates; the
/// gauge-fixed coordinate is overwritten).
pub fn minimize_from(spec: &QuotientSumSpec, t0: &[f64], opts: &SolveOptions) -> Result<OptReport> {
    if t0.len() != spec.vertex_count() {
        return Err(QcsError::Domain(format!(
            "{} start coordinates for {} vertices",
            t0.len(),
            spec.vertex_count()
        )));
    }
    match attainment_check(spec) {
        Attainment::Attained => Ok(newton(spec, t0.to_vec(), opts)),
        Attainment::Recession { direction } => recession_report(spec, direction, opts),
    }
}

fn newton(spec: &QuotientSumSpec, mut t: Vec<f64>, opts: &SolveOptions) -> OptReport {
    let base = spec.graph.base();
    let n = base.vertex_count();
    let (fixed, fixed_t) = spec.fixed();
    t[fixed] = fixed_t;

    let free: Vec<usize> = (0..n).filter(|&v| v != fixed).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i;
    }
    let m = free.len();

    let mut value = log_objective(spec, &t);
    let mut iterations = 0;
    let mut gradient_norm = f64::INFINITY;
    let mut status = SolveStatus::IterationLimit;

    while iterations < opts.max_iterations {
        iterations += 1;
        let g_full = log_gradient(spec, &t);
        gradient_norm = free.iter().map(|&v| g_full[v].abs()).fold(0.0, f64::max);
        if gradient_norm <= opts.tolerance {
            status = SolveStatus::Converged;
            break;
        }
        if m == 0 {
            // Nothing to optimize (single vertex).
            status = SolveStatus::Converged;
            gradient_norm = 0.0;
            break;
        }
        let mut h = DMatrix::<f64>::zeros(m, m);
        for (i, &(a, b)) in base.edges().iter().enumerate() {
            let s = spec.graph.weight(i) * (t[a] - t[b]).exp();
            let (fa, fb) = (slot[a], slot[b]);
            if fa != usize::MAX {
                h[(fa, fa)] += s;
            }
            if fb != usize::MAX {
                h[(fb, fb)] += s;
            }
            if fa != usize::MAX && fb != usize::MAX {
                h[(fa, fb)] -= s;
                h[(fb, fa)] -= s;
            }
        }
        let g = DVector::from_iterator(m, free.iter().map(|&v| g_full[v]));

        // Damped Cholesky solve; the Hessian is PD on the gauge-fixed
        // subspace for strongly connected support, damping only covers
        // borderline conditioning.
        let mut ridge = 0.0;
        let mut step: Option<DVector<f64>> = None;
        for _ in 0..12 {
            let mut hd = h.clone();
            if ridge > 0.0 {
                for i in 0..m {
                    hd[(i, i)] += ridge;
                }
            }
            if let Some(ch) = hd.cholesky() {
                step = Some(ch.solve(&(-&g)));
                break;
            }
            ridge = if ridge == 0.0 {
                1e-12 * (1.0 + h.trace() / m as f64)
            } else {
                ridge * 100.0
            };
        }
        let delta = step.unwrap_or_else(|| -&g);
        let dd: f64 = g.dot(&delta);
        let delta = if dd < 0.0 { delta } else { -&g };
        let dd = g.dot(&delta);

        // Armijo with a floating-point noise allowance: near the optimum the
        // theoretical decrease of a full Newton step is far below the f64
        // resolution of the objective, and without the allowance acceptance
        // degenerates into a noise-driven random walk.
        let noise = 4.0 * f64::EPSILON * value.abs().max(1.0);
        let mut alpha = 1.0;
        let mut accepted = false;
        let mut t_new = t.clone();
        for _ in 0..80 {
            for (i, &v) in free.iter().enumerate() {
                t_new[v] = t[v] + alpha * delta[i];
            }
            let v_new = log_objective(spec, &t_new);
            if v_new <= value + 1e-4 * alpha * dd + noise {
                value = v_new;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break; // stalled at numerical precision; status set below
        }
        t.copy_from_slice(&t_new);
    }

    // A stall can leave the loop before the convergence check fired.
    if status != SolveStatus::Converged {
        let g_full = log_gradient(spec, &t);
        gradient_norm = free.iter().map(|&v| g_full[v].abs()).fold(0.0, f64::max);
        if gradient_norm <= opts.tolerance {
            status = SolveStatus::Converged;
        }
    }

    // Normalize: gauge coordinate holds exactly, so y = exp(t) already has
    // the pinned value / first-vertex 1.
    let minimizer: Vec<f64> = t.iter().map(|&ti| ti.exp()).collect();
    OptReport {
        value,
        minimizer,
        attained: true,
        status,
        upper_bound_only: false,
        certificate: None,
        iterations,
        gradient_norm,
    }
}

fn recession_report(
    spec: &QuotientSumSpec,
    direction: Vec<f64>,
    opts: &SolveOptions,
) -> Result<OptReport> {
    let base = spec.graph.base();
    let d = scc(base);
    let mut value = 0.0;
    let mut minimizer = vec![1.0; base.vertex_count()];
    let mut iterations = 0;
    let mut gradient_norm: f64 = 0.0;
    for comp in &d.components {
        let (sub, map) = spec.graph.induced(comp);
        if sub.base().edge_count() == 0 {
            continue;
        }
        // The pin only matters if it lives inside this component.
        let sub_pin = spec.pin.and_then(|(v, val)| {
            map.iter()
                .position(|&g| g == v)
                .map(|local| (sub.base().id(local).to_string(), val))
        });
        let sub_spec = match sub_pin {
            Some((id, val)) => QuotientSumSpec::pinned(sub, &id, val)?,
            None => QuotientSumSpec::new(sub)?,
        };
        let rep = newton(&sub_spec, vec![0.0; map.len()], opts);
        value += rep.value;
        iterations += rep.iterations;
        gradient_norm = gradient_norm.max(rep.gradient_norm);
        for (local, &global) in map.iter().enumerate() {
            minimizer[global] = rep.minimizer[local];
        }
    }
    Ok(OptReport {
        value,
        minimizer,
        attained: false,
        status: SolveStatus::RecessionDetected,
        upper_bound_only: false,
        certificate: Some(Certificate::Recession { direction }),
        iterations,
        gradient_norm,
    })
}

/// Result of the repeated-solve uniqueness check.
#[derive(Debug, Clone)]
pub struct UniquenessCheck {
    pub agrees: bool,
    pub max_discrepancy: f64,
}

/// Runs `trials` minimizations from independent seeded random starts and
/// compares the normalized minimizers coordinate-wise.
pub fn verify_uniqueness(
    spec: &QuotientSumSpec,
    trials: usize,
    seed: u64,
    agree_tol: f64,
    opts: &SolveOptions,
) -> Result<UniquenessCheck> {
    if !matches!(attainment_check(spec), Attainment::Attained) {
        return Err(QcsError::Domain(
            "uniqueness check requires an attained minimum (strongly connected support)".into(),
        ));
    }
    let n = spec.vertex_count();
    let starts: Vec<Vec<f64>> = (0..trials)
        .map(|i| optim::random_point(&mut optim::rng_for_trial(seed, i as u64), n, -1.0, 1.0))
        .collect();
    let reports = optim::par_map(starts, opts.threads, |t0| minimize_from(spec, t0, opts));
    let mut minimizers = Vec::with_capacity(trials);
    for rep in reports {
        let rep = rep?;
        if rep.status != SolveStatus::Converged {
            return Err(QcsError::NonConvergence(format!(
                "trial stopped with status {:?} (gradient norm {})",
                rep.status, rep.gradient_norm
            )));
        }
        minimizers.push(rep.minimizer);
    }
    let mut max_disc: f64 = 0.0;
    if let Some(first) = minimizers.first() {
        for other in &minimizers[1..] {
            for (a, b) in first.iter().zip(other) {
                max_disc = max_disc.max((a - b).abs());
            }
        }
    }
    Ok(UniquenessCheck {
        agrees: max_disc <= agree_tol,
        max_discrepancy: max_disc,
    })
}

/// Checks that the (unique) minimizer is invariant under a weight-preserving
/// automorphism `perm` of the spec's graph.
pub fn verify_symmetry(
    spec: &QuotientSumSpec,
    perm: &HashMap<String, String>,
    tol: f64,
    opts: &SolveOptions,
) -> Result<bool> {
    if !check_automorphism(&spec.graph, perm)? {
        return Err(QcsError::Domain(
            "permutation is not a weight-preserving automorphism".into(),
        ));
    }
    if !matches!(attainment_check(spec), Attainment::Attained) {
        return Err(QcsError::Domain(
            "symmetry check requires an attained minimum".into(),
        ));
    }
    let base = spec.graph.base();
    let rep = minimize(spec, opts)?;
    let y = &rep.minimizer;
    for v in 0..base.vertex_count() {
        let image = base
            .index_of(&perm[base.id(v)])
            .expect("validated automorphism");
        if (y[v] - y[image]).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One multiplicative constraint `prod_u z_u^{sign} = 1` along a basis cycle
/// of the underlying undirected structure; `z_u = y_{from(u)}/y_{to(u)}`.
#[derive(Debug, Clone)]
pub struct CycleConstraint {
    /// `(edge index, +-1)` in traversal order.
    pub edges: Vec<(usize, i8)>,
}

impl CycleConstraint {
    /// `prod z_u^{sign}` at the assignment `y`; equals 1 at any feasible
    /// point, for any basis.
    pub fn product(&self, spec: &QuotientSumSpec, y: &[f64]) -> f64 {
        let base = spec.graph.base();
        let mut p = 1.0;
        for &(e, sign) in &self.edges {
            let (a, b) = base.edges()[e];
            let z = y[a] / y[b];
            p *= if sign > 0 { z } else { 1.0 / z };
        }
        p
    }
}

/// A cycle basis of the underlying undirected multigraph: one fundamental
/// cycle per non-tree edge. The basis has |E| - |V| + 1 elements for a
/// connected structure.
pub fn cycle_constraints(spec: &QuotientSumSpec) -> Result<Vec<CycleConstraint>> {
    let base = spec.graph.base();
    let n = base.vertex_count();
    // Undirected incidence: (edge index, other endpoint, traversing forward).
    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
    for (i, &(a, b)) in base.edges().iter().enumerate() {
        adj[a].push((i, b, true));
        adj[b].push((i, a, false));
    }
    // BFS spanning tree rooted at 0.
    let mut parent: Vec<Option<(usize, usize, bool)>> = vec![None; n]; // (parent, edge, forward)
    let mut depth = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut in_tree = vec![false; base.edge_count()];
    let mut queue = std::collections::VecDeque::new();
    visited[0] = true;
    queue.push_back(0);
    while let Some(u) = queue.pop_front() {
        for &(e, w, fwd) in &adj[u] {
            if !visited[w] {
                visited[w] = true;
                in_tree[e] = true;
                parent[w] = Some((u, e, fwd));
                depth[w] = depth[u] + 1;
                queue.push_back(w);
            }
        }
    }
    if visited.iter().any(|&v| !v) {
        return Err(QcsError::Validation(
            "underlying undirected graph is disconnected".into(),
        ));
    }

    let mut basis = Vec::new();
    for (e, &(a, b)) in base.edges().iter().enumerate() {
        if in_tree[e] {
            continue;
        }
        // Fundamental cycle: cross e from a to b, then tree path b -> a.
        let mut edges: Vec<(usize, i8)> = vec![(e, 1)];
        let (mut u, mut v) = (b, a); // walk u up-tree; collect v side reversed
        let mut up: Vec<(usize, i8)> = Vec::new();
        let mut down: Vec<(usize, i8)> = Vec::new();
        while depth[u] > depth[v] {
            let (p, pe, fwd) = parent[u].unwrap();
            // Traversing child -> parent goes against a forward edge.
            up.push((pe, if fwd { -1 } else { 1 }));
            u = p;
        }
        while depth[v] > depth[u] {
            let (p, pe, fwd) = parent[v].unwrap();
            // This side is later traversed parent -> child.
            down.push((pe, if fwd { 1 } else { -1 }));
            v = p;
        }
        while u != v {
            let (pu, eu, fu) = parent[u].unwrap();
            up.push((eu, if fu { -1 } else { 1 }));
            u = pu;
            let (pv, ev, fv) = parent[v].unwrap();
            down.push((ev, if fv { 1 } else { -1 }));
            v = pv;
        }
        edges.extend(up);
        edges.extend(down.into_iter().rev());
        basis.push(CycleConstraint { edges });
    }
    Ok(basis)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::digraph::Digraph;
    use crate::sums::circulant;
    use approx::assert_relative_eq;

    pub(crate) fn amgm_cycle_spec(n: usize) -> QuotientSumSpec {
        QuotientSumSpec::new(WeightedDigraph::unit(circulant(n, 1).unwrap())).unwrap()
    }

    pub(crate) fn mavlo_spec(x: f64) -> QuotientSumSpec {
        let x2 = x * x;
        let g = WeightedDigraph::from_weighted_edges([
            ("A", "B", 1.0),
            ("B", "C", 1.0),
            ("C", "A", 1.0),
            ("B", "A", x2),
            ("C", "B", x2),
            ("A", "C", x2),
        ])
        .unwrap();
        QuotientSumSpec::new(g).unwrap()
    }

    /// Chain-with-hub graph: vertices 0..n, edges j->0, 0->j and j->j+1.
    pub(crate) fn shallit_spec(n: usize) -> QuotientSumSpec {
        let mut edges: Vec<(String, String, f64)> = Vec::new();
        let name = |i: usize| i.to_string();
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
        let g = WeightedDigraph::from_weighted_edges(trip).unwrap();
        QuotientSumSpec::pinned(g, "0", 1.0).unwrap()
    }

    #[test]
    fn evaluate_amgm_cycle_at_ones() {
        let spec = amgm_cycle_spec(3);
        assert_relative_eq!(evaluate(&spec, &[1.0; 3]).unwrap(), 3.0);
    }

    #[test]
    fn evaluate_and_gradient_two_vertex() {
        let g = WeightedDigraph::from_weighted_edges([("A", "B", 1.0), ("B", "A", 4.0)]).unwrap();
        let spec = QuotientSumSpec::new(g).unwrap();
        assert_relative_eq!(evaluate(&spec, &[1.0, 1.0]).unwrap(), 5.0);
        let grad = log_gradient(&spec, &[0.0, 0.0]);
        assert_relative_eq!(grad[0], 1.0 - 4.0);
        assert_relative_eq!(grad[1], 4.0 - 1.0);
    }

    #[test]
    fn minimize_amgm_cycle_attains_n() {
        let opts = SolveOptions::default();
        let rep = minimize(&amgm_cycle_spec(5), &opts).unwrap();
        assert!(rep.attained);
        assert_eq!(rep.status, SolveStatus::Converged);
        assert_relative_eq!(rep.value, 5.0, epsilon = 1e-12);
        for &y in &rep.minimizer {
            assert_relative_eq!(y, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn minimize_weighted_two_cycle() {
        let g = WeightedDigraph::from_weighted_edges([("A", "B", 1.0), ("B", "A", 4.0)]).unwrap();
        let spec = QuotientSumSpec::new(g).unwrap();
        let rep = minimize(&spec, &SolveOptions::default()).unwrap();
        // 2-term weighted sum: minimum 2 sqrt(1*4) = 4 at y_B/y_A = 1/2.
        assert_relative_eq!(rep.value, 4.0, epsilon = 1e-12);
        assert_relative_eq!(rep.minimizer[1] / rep.minimizer[0], 0.5, epsilon = 1e-8);
        // Gradient at the minimizer is numerically stationary.
        let t: Vec<f64> = rep.minimizer.iter().map(|y| y.ln()).collect();
        let g = log_gradient(&spec, &t);
        assert!(g.iter().all(|v| v.abs() <= 1e-9));
    }

    #[test]
    fn minimize_symmetric_complete_graph() {
        // x = 2: the uniform assignment gives 3 (x^2 + 1) = 15.
        let rep = minimize(&mavlo_spec(2.0), &SolveOptions::default()).unwrap();
        assert_relative_eq!(rep.value, 15.0, epsilon = 1e-8);
        for &y in &rep.minimizer {
            assert_relative_eq!(y, 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn attainment_single_edge_is_recession() {
        let g = WeightedDigraph::from_weighted_edges([("A", "B", 1.0)]).unwrap();
        let spec = QuotientSumSpec::new(g).unwrap();
        match attainment_check(&spec) {
            Attainment::Recession { direction } => {
                // Downstream vertex sits on a higher level.
                assert!(direction[1] > direction[0]);
            }
            Attainment::Attained => panic!("expected recession"),
        }
        let rep = minimize(&spec, &SolveOptions::default()).unwrap();
        assert!(!rep.attained);
        assert_eq!(rep.status, SolveStatus::RecessionDetected);
        assert_relative_eq!(rep.value, 0.0);
    }

    #[test]
    fn recession_decomposes_over_components() {
        // a -> b plus b <-> c: infimum is the {b,c} subproblem value 2.
        let g = WeightedDigraph::from_weighted_edges([
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "b", 1.0),
        ])
        .unwrap();
        let spec = QuotientSumSpec::new(g).unwrap();
        let rep = minimize(&spec, &SolveOptions::default()).unwrap();
        assert!(!rep.attained);
        assert_relative_eq!(rep.value, 2.0, epsilon = 1e-10);
        // Numeric descent cross-check: evaluate along the recession
        // direction far out; the objective approaches the reported infimum.
        if let Some(Certificate::Recession { direction }) = &rep.certificate {
            let t: Vec<f64> = direction.iter().map(|d| d * 40.0).collect();
            let v = log_objective(&spec, &t);
            assert_relative_eq!(v, rep.value, epsilon = 1e-10);
        } else {
            panic!("missing recession certificate");
        }
    }

    #[test]
    fn pinned_chain_hub_matches_direct_descent() {
        let spec = shallit_spec(3);
        let rep = minimize(&spec, &SolveOptions::default()).unwrap();
        assert!(rep.attained);
        // Pin honored exactly (vertex "0" interns after "1").
        let hub = spec.graph().base().index_of("0").unwrap();
        assert_relative_eq!(rep.minimizer[hub], 1.0);
        // Independent check: pattern search on the inhomogeneous form.
        let mut obj = |t: &[f64]| {
            let x: Vec<f64> = t.iter().map(|v| v.exp()).collect();
            let mut s = 0.0;
            for &xj in x.iter().take(3) {
                s += xj + 1.0 / xj;
            }
            s + x[0] / x[1] + x[1] / x[2]
        };
        let out = crate::optim::pattern_search(&mut obj, &[0.1, -0.2, 0.3], 0.5, 1e-10, 100_000);
        assert_relative_eq!(rep.value, out.value, epsilon = 1e-7);
    }

    #[test]
    fn uniqueness_across_random_starts() {
        let opts = SolveOptions::default();
        let u = verify_uniqueness(&amgm_cycle_spec(4), 10, 0, 1e-8, &opts).unwrap();
        assert!(u.agrees, "discrepancy {}", u.max_discrepancy);
        let u = verify_uniqueness(&mavlo_spec(2.0), 10, 1, 1e-6, &opts).unwrap();
        assert!(u.agrees, "discrepancy {}", u.max_discrepancy);
        let u = verify_uniqueness(&shallit_spec(10), 10, 2, 1e-6, &opts).unwrap();
        assert!(u.agrees, "discrepancy {}", u.max_discrepancy);
    }

    #[test]
    fn symmetry_of_minimizer_under_rotation() {
        let rot: HashMap<String, String> = [("A", "B"), ("B", "C"), ("C", "A")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let opts = SolveOptions::default();
        assert!(verify_symmetry(&mavlo_spec(0.5), &rot, 1e-6, &opts).unwrap());
        let cyc: HashMap<String, String> = [("1", "2"), ("2", "3"), ("3", "1")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert!(verify_symmetry(&amgm_cycle_spec(3), &cyc, 1e-6, &opts).unwrap());
        // Non-automorphism is a precondition error.
        let swap: HashMap<String, String> = [("A", "B"), ("B", "A"), ("C", "C")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert!(verify_symmetry(&mavlo_spec(2.0), &swap, 1e-6, &opts).is_err());
    }

    #[test]
    fn identity_automorphism_is_vacuously_symmetric() {
        let g = WeightedDigraph::from_weighted_edges([
            ("a", "b", 1.0),
            ("b", "c", 2.0),
            ("c", "a", 3.0),
        ])
        .unwrap();
        let spec = QuotientSumSpec::new(g).unwrap();
        let id: HashMap<String, String> = ["a", "b", "c"]
            .iter()
            .map(|v| (v.to_string(), v.to_string()))
            .collect();
        assert!(verify_symmetry(&spec, &id, 1e-6, &SolveOptions::default()).unwrap());
    }

    #[test]
    fn cycle_basis_sizes() {
        // Directed 3-cycle: a single constraint z1 z2 z3 = 1.
        let basis = cycle_constraints(&amgm_cycle_spec(3)).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].edges.len(), 3);
        // Mutual pair: one constraint z_AB z_BA = 1.
        let g = WeightedDigraph::from_weighted_edges([("A", "B", 1.0), ("B", "A", 4.0)]).unwrap();
        let spec = QuotientSumSpec::new(g).unwrap();
        let basis = cycle_constraints(&spec).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].edges.len(), 2);
        // Chain-with-hub, n = 2: |E| - |V| + 1 = 5 - 3 + 1 = 3 independent
        // cycles (n of length 2 and n-1 of length 3).
        let basis = cycle_constraints(&shallit_spec(2)).unwrap();
        assert_eq!(basis.len(), 3);
    }

    #[test]
    fn cycle_constraints_hold_at_any_feasible_point() {
        let spec = shallit_spec(4);
        let basis = cycle_constraints(&spec).unwrap();
        let y: Vec<f64> = (0..5).map(|i| 0.5 + 0.37 * i as f64).collect();
        for c in &basis {
            assert_relative_eq!(c.product(&spec, &y), 1.0, epsilon = 1e-12);
        }
        // And at the converged minimizer.
        let rep = minimize(&spec, &SolveOptions::default()).unwrap();
        for c in &basis {
            assert_relative_eq!(c.product(&spec, &rep.minimizer), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn disconnected_structure_has_no_cycle_basis() {
        let g = WeightedDigraph::from_weighted_edges([
            ("a", "b", 1.0),
            ("b", "a", 1.0),
            ("c", "d", 1.0),
            ("d", "c", 1.0),
        ])
        .unwrap();
        let spec = QuotientSumSpec::new(g).unwrap();
        assert!(cycle_constraints(&spec).is_err());
    }

    #[test]
    fn rejects_self_loops_and_bad_pins() {
        let mut b = Digraph::builder().allow_self_loops(true);
        b.add_edge("a", "a").unwrap();
        b.add_edge("a", "b").unwrap();
        b.add_edge("b", "a").unwrap();
        let g = WeightedDigraph::unit(b.build());
        assert!(QuotientSumSpec::new(g.clone()).is_err());
        let ok = WeightedDigraph::from_weighted_edges([("a", "b", 1.0), ("b", "a", 1.0)]).unwrap();
        assert!(QuotientSumSpec::pinned(ok.clone(), "zz", 1.0).is_err());
        assert!(QuotientSumSpec::pinned(ok, "a", -1.0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn log_objective_midpoint_convexity(
                w in proptest::collection::vec(0.1f64..5.0, 6),
                t1 in proptest::collection::vec(-2.0f64..2.0, 3),
                t2 in proptest::collection::vec(-2.0f64..2.0, 3),
            ) {
                let g = WeightedDigraph::from_weighted_edges([
                    ("A", "B", w[0]),
                    ("B", "C", w[1]),
                    ("C", "A", w[2]),
                    ("B", "A", w[3]),
                    ("C", "B", w[4]),
                    ("A", "C", w[5]),
                ]).unwrap();
                let spec = QuotientSumSpec::new(g).unwrap();
                let mid: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| 0.5 * (a + b)).collect();
                let lhs = log_objective(&spec, &mid);
                let rhs = 0.5 * (log_objective(&spec, &t1) + log_objective(&spec, &t2));
                prop_assert!(lhs <= rhs + 1e-9 * rhs.abs());
            }

            #[test]
            fn evaluation_is_scale_invariant(
                y in proptest::collection::vec(0.1f64..10.0, 4),
                lambda in 0.1f64..10.0,
            ) {
                let g = WeightedDigraph::unit(circulant(4, 2).unwrap());
                let spec = QuotientSumSpec::new(g).unwrap();
                let a = evaluate(&spec, &y).unwrap();
                let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
                let b = evaluate(&spec, &scaled).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }
}
