//! Infima of graphic max-sums `S(x) = sum_v x_v / max_{w in out(v)} x_w`.
//!
//! The infimum is the sum of girths of the final strong components, hence
//! always a positive integer; it is generally not attained, so the module
//! also constructs explicit epsilon-witnesses: ones on a shortest cycle of
//! each final component, geometrically decaying values elsewhere.

use crate::digraph::{scc, shortest_cycle, Digraph};
use crate::error::{QcsError, Result};

fn check_shape(g: &Digraph) -> Result<()> {
    if g.vertex_count() == 0 {
        return Err(QcsError::Validation("empty graph".into()));
    }
    if g.min_out_degree() == 0 {
        return Err(QcsError::Structure(
            "every vertex needs out-degree >= 1".into(),
        ));
    }
    Ok(())
}

/// Greatest lower bound of the max-sum: the sum of girths of the final
/// strong components (the girth itself for strongly connected graphs).
/// Self-loops are legal here and count as cycles of length 1.
pub fn maxsum_infimum(g: &Digraph) -> Result<u64> {
    check_shape(g)?;
    let d = scc(g);
    let mut total = 0u64;
    for comp in d.final_components() {
        let (sub, _) = g.induced(&comp);
        let girth = crate::digraph::girth(&sub).ok_or_else(|| {
            QcsError::Structure("final strong component without a cycle".into())
        })?;
        total += girth as u64;
    }
    Ok(total)
}

/// Max-sum value allowing self-loops (a vertex may appear in its own max
/// window). [`crate::sums::graphic_p_sum`] covers the loop-free general-p
/// case.
pub fn maxsum_value(g: &Digraph, x: &[f64]) -> Result<f64> {
    check_shape(g)?;
    if x.len() != g.vertex_count() {
        return Err(QcsError::Domain(format!(
            "{} values for {} vertices",
            x.len(),
            g.vertex_count()
        )));
    }
    for &v in x {
        if !v.is_finite() || v <= 0.0 {
            return Err(QcsError::Domain(format!("nonpositive value {v}")));
        }
    }
    let mut total = 0.0;
    for v in 0..g.vertex_count() {
        let m = g.out(v).iter().map(|&w| x[w]).fold(0.0, f64::max);
        total += x[v] / m;
    }
    Ok(total)
}

/// A positive assignment with max-sum within `epsilon` of the infimum.
///
/// Construction: pick the lexicographically smallest shortest cycle in each
/// final strong component and set those vertices to 1; every other vertex
/// gets `delta^d(v)` where `d(v)` is its directed distance to the chosen
/// cycles and `delta = min(epsilon/(2 |V|), 1/2)`. Each off-cycle vertex then
/// contributes at most `delta`.
pub fn maxsum_witness(g: &Digraph, epsilon: f64) -> Result<Vec<f64>> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(QcsError::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    check_shape(g)?;
    let n = g.vertex_count();
    let d = scc(g);
    let mut on_cycle = vec![false; n];
    for comp in d.final_components() {
        let (sub, map) = g.induced(&comp);
        let cycle = shortest_cycle(&sub).ok_or_else(|| {
            QcsError::Structure("final strong component without a cycle".into())
        })?;
        for local in cycle {
            on_cycle[map[local]] = true;
        }
    }
    // Reverse BFS from the chosen cycles gives the distance d(v).
    let inn = g.in_neighborhoods();
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for v in 0..n {
        if on_cycle[v] {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in &inn[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    if dist.contains(&usize::MAX) {
        return Err(QcsError::Structure(
            "vertex cannot reach a final strong component".into(),
        ));
    }
    let delta = (epsilon / (2.0 * n as f64)).min(0.5);
    Ok(dist.iter().map(|&d| delta.powi(d as i32)).collect())
}

/// Attainment classification: the infimum is a minimum for disjoint unions
/// of pure cycles (take ones); other cases are not classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxSumAttainment {
    Attained,
    Unknown,
}

pub fn maxsum_attainment(g: &Digraph) -> Result<MaxSumAttainment> {
    check_shape(g)?;
    let d = scc(g);
    let pure_cycles =
        g.out(0).len() <= 1 && (0..g.vertex_count()).all(|v| g.out(v).len() == 1)
            && d.final_flags.iter().all(|&f| f);
    Ok(if pure_cycles {
        MaxSumAttainment::Attained
    } else {
        MaxSumAttainment::Unknown
    })
}

/// Ceiling bound `ceil(n/k)` on the girth of any strongly connected digraph
/// with minimum out-degree k. CONDITIONAL: this is a conjectured bound
/// (Caccetta-Haggkvist), not a theorem.
pub fn game_bound(n: u64, k: u64) -> Result<u64> {
    if k < 1 || k >= n {
        return Err(QcsError::Domain(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    Ok(n.div_ceil(k))
}
