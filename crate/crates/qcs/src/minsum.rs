//! Exact global minimization of graphic min-sums
//! `S(x) = sum_v x_v / min_{w in out(v)} x_w`.
//!
//! A minimizer groups vertices of equal value into blocks; ranking the blocks
//! by value turns the min-sum into a weighted quotient sum over the block
//! digraph (each vertex divides by the lowest-ranked block among its
//! out-neighbors). Enumerating every ordered partition of the vertex set,
//! minimizing each reduced quotient sum, and rejecting candidates whose block
//! values do not come out strictly increasing with rank yields the global
//! minimum.
//!
//! Also hosts the closed-form extremal bounds over all strongly connected
//! graphs on n vertices and the one-dimensional gap function behind them.

use itertools::Itertools;

use crate::digraph::{is_strongly_connected, Digraph, DigraphBuilder, WeightedDigraph};
use crate::error::{QcsError, Result};
use crate::gp::{self, QuotientSumSpec, SolveOptions};
use crate::optim;
use crate::report::{Certificate, OptReport, PartitionCertificate, SolveStatus};
use crate::sums::{graphic_p_sum, PowerOrder};

/// Ordered-partition enumeration cap (the count is the Fubini number:
/// 545835 at n = 8).
pub const PARTITION_CAP: usize = 8;

/// Consecutive block values must satisfy `y[r+1]/y[r] >= 1 + RANK_GAP`;
/// equal values belong to a coarser partition.
const RANK_GAP: f64 = 1e-9;

/// An ordered partition of `0..n` into nonempty blocks; the position of a
/// block is its rank, and lower rank means smaller value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl OrderedPartition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<OrderedPartition> {
        let mut block_of = vec![usize::MAX; n];
        let mut total = 0;
        for (rank, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(QcsError::Validation("empty block".into()));
            }
            for &v in block {
                if v >= n || block_of[v] != usize::MAX {
                    return Err(QcsError::Validation(
                        "blocks must partition the vertex set".into(),
                    ));
                }
                block_of[v] = rank;
                total += 1;
            }
        }
        if total != n {
            return Err(QcsError::Validation(
                "blocks must cover every vertex".into(),
            ));
        }
        let mut blocks = blocks;
        for b in &mut blocks {
            b.sort_unstable();
        }
        Ok(OrderedPartition { blocks, block_of })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Per-vertex rank of the lowest-ranked block among out-neighbors.
    pub fn nu(&self, g: &Digraph) -> Result<Vec<usize>> {
        let mut nu = Vec::with_capacity(g.vertex_count());
        for v in 0..g.vertex_count() {
            let r = g
                .out(v)
                .iter()
                .map(|&w| self.block_of[w])
                .min()
                .ok_or_else(|| {
                    QcsError::Structure(format!("vertex '{}' has empty out-neighborhood", g.id(v)))
                })?;
            nu.push(r);
        }
        Ok(nu)
    }
}

/// All set partitions of `0..n`, each as blocks in canonical label order.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        let b = labels.iter().max().copied().unwrap_or(0) + 1;
        let mut blocks = vec![Vec::new(); b];
        for (i, &lab) in labels.iter().enumerate() {
            blocks[lab].push(i);
        }
        out.push(blocks);
        // Next restricted-growth string.
        let mut i = n;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let cap = labels[..i].iter().max().copied().unwrap() + 1;
            if labels[i] < cap {
                break;
            }
        }
        labels[i] += 1;
        for l in labels.iter_mut().skip(i + 1) {
            *l = 0;
        }
    }
}

/// Streams every ordered partition of `0..n` exactly once (count = Fubini
/// number). Capacity error above [`PARTITION_CAP`].
pub fn enumerate_ordered_partitions(
    n: usize,
) -> Result<impl Iterator<Item = OrderedPartition>> {
    if n == 0 {
        return Err(QcsError::Validation("n must be positive".into()));
    }
    if n > PARTITION_CAP {
        return Err(QcsError::Capacity(format!(
            "ordered-partition enumeration capped at n = {PARTITION_CAP}, got {n}"
        )));
    }
    let parts = set_partitions(n);
    Ok(parts.into_iter().flat_map(move |blocks| {
        let b = blocks.len();
        (0..b).permutations(b).map(move |perm| {
            let ordered: Vec<Vec<usize>> = perm.iter().map(|&i| blocks[i].clone()).collect();
            OrderedPartition::new(ordered, n).expect("enumeration yields valid partitions")
        })
    }))
}

/// Quotient-sum reduction of the min-sum restricted to assignments constant
/// on the blocks of `part` and increasing with rank.
pub struct BlockReduction {
    /// Weighted quotient sum on the block digraph (block ids "0", "1", ...
    /// by rank). May have no edges when every vertex divides by its own
    /// block.
    pub spec: QuotientSumSpec,
    /// Number of vertices whose minimum out-neighbor shares their block;
    /// each contributes the constant 1.
    pub offset: f64,
    /// Per-vertex target rank.
    pub nu: Vec<usize>,
}

/// Builds the reduced problem: vertex `v` contributes
/// `y_{rank(v)} / y_{nu(v)}`, aggregated into weighted block edges; terms
/// with `nu(v) = rank(v)` go into the constant offset.
pub fn block_reduction(g: &Digraph, part: &OrderedPartition) -> Result<BlockReduction> {
    if g.has_self_loop() {
        return Err(QcsError::Structure("min-sums reject self-loops".into()));
    }
    let nu = part.nu(g)?;
    let b = part.block_count();
    let mut weight: std::collections::BTreeMap<(usize, usize), f64> =
        std::collections::BTreeMap::new();
    let mut offset = 0.0;
    for (v, &to) in nu.iter().enumerate() {
        let from = part.block_of(v);
        if from == to {
            offset += 1.0;
        } else {
            *weight.entry((from, to)).or_insert(0.0) += 1.0;
        }
    }
    let mut builder = DigraphBuilder::new();
    let names: Vec<String> = (0..b).map(|r| r.to_string()).collect();
    for name in &names {
        builder.add_vertex(name);
    }
    let mut weights = Vec::new();
    for (&(from, to), &w) in &weight {
        builder.add_edge(&names[from], &names[to])?;
        weights.push(w);
    }
    let spec = QuotientSumSpec::new(WeightedDigraph::new(builder.build(), weights)?)?;
    Ok(BlockReduction { spec, offset, nu })
}

/// Options for the exact solver and its numeric oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinSumOptions {
    pub solve: SolveOptions,
}

/// Exact global minimum of the graphic min-sum.
///
/// Requires every out-degree >= 1 and |V| within the enumeration cap. For a
/// strongly connected graph the minimum is attained and certified by the
/// winning ordered partition. Otherwise `attained = false` and the reported
/// value is the least over candidate reductions including their recession
/// infima (a lower estimate of the infimum).
pub fn minsum_exact(g: &Digraph, opts: &MinSumOptions) -> Result<OptReport> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(QcsError::Validation("empty graph".into()));
    }
    if g.min_out_degree() == 0 {
        return Err(QcsError::Structure("every vertex needs out-degree >= 1".into()));
    }
    if g.has_self_loop() {
        return Err(QcsError::Structure("min-sums reject self-loops".into()));
    }

    struct Best {
        value: f64,
        encoding: Vec<Vec<usize>>,
        blocks: Vec<Vec<usize>>,
        block_values: Vec<f64>,
        block_of: Vec<usize>,
    }
    let mut best: Option<Best> = None;
    let mut recession_infimum = f64::INFINITY;
    let mut iterations = 0;

    for part in enumerate_ordered_partitions(n)? {
        let red = block_reduction(g, &part)?;
        let b = part.block_count();
        let (value, block_values) = if red.spec.graph().base().edge_count() == 0 {
            // Every vertex divides by its own block: constant sum, any
            // strictly increasing block values are consistent.
            let y: Vec<f64> = (0..b).map(|r| 2f64.powi(r as i32)).collect();
            (red.offset, y)
        } else {
            let rep = gp::minimize(&red.spec, &opts.solve)?;
            iterations += rep.iterations;
            if !rep.attained {
                recession_infimum = recession_infimum.min(rep.value + red.offset);
                continue;
            }
            if rep.status != SolveStatus::Converged {
                return Err(QcsError::NonConvergence(format!(
                    "block reduction for partition {:?} stopped at gradient norm {}",
                    part.blocks(),
                    rep.gradient_norm
                )));
            }
            let ordered = rep
                .minimizer
                .windows(2)
                .all(|w| w[1] / w[0] >= 1.0 + RANK_GAP);
            if !ordered {
                continue;
            }
            (rep.value + red.offset, rep.minimizer)
        };

        let replace = match &best {
            None => true,
            Some(b) => {
                value < b.value || (value == b.value && part.blocks() < b.encoding.as_slice())
            }
        };
        if replace {
            best = Some(Best {
                value,
                encoding: part.blocks().to_vec(),
                blocks: part.blocks().to_vec(),
                block_values,
                block_of: (0..n).map(|v| part.block_of(v)).collect(),
            });
        }
    }

    let strongly_connected = is_strongly_connected(g);
    let best = best.ok_or_else(|| {
        QcsError::NonConvergence(
            "no consistent ordered partition; inconsistent enumeration".into(),
        )
    })?;

    // Reconstruct the witness assignment and normalize to x[0] = 1.
    let mut x: Vec<f64> = (0..n).map(|v| best.block_values[best.block_of[v]]).collect();
    let scale = x[0];
    for v in x.iter_mut() {
        *v /= scale;
    }
    let block_values: Vec<f64> = best.block_values.iter().map(|y| y / scale).collect();

    if strongly_connected {
        let check = graphic_p_sum(g, &x, PowerOrder::NegInf)?;
        if (check - best.value).abs() > 1e-10 * best.value.abs().max(1.0) {
            return Err(QcsError::NonConvergence(format!(
                "certificate mismatch: reconstructed {check} vs reported {}",
                best.value
            )));
        }
    }

    let certificate = PartitionCertificate {
        blocks: best
            .blocks
            .iter()
            .map(|b| b.iter().map(|&v| g.id(v).to_string()).collect())
            .collect(),
        block_values,
        value: best.value,
    };
    let value = if strongly_connected {
        best.value
    } else {
        best.value.min(recession_infimum)
    };
    Ok(OptReport {
        value,
        minimizer: x,
        attained: strongly_connected,
        status: if strongly_connected {
            SolveStatus::Converged
        } else {
            SolveStatus::RecessionDetected
        },
        upper_bound_only: false,
        certificate: Some(Certificate::Partition(certificate)),
        iterations,
        gradient_norm: 0.0,
    })
}

/// Direct nonsmooth multi-start minimization of the min-sum in log
/// coordinates (compass search). An upper bound on the true minimum; used to
/// cross-validate [`minsum_exact`].
pub fn minsum_oracle(g: &Digraph, restarts: usize, seed: u64) -> Result<f64> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(QcsError::Validation("empty graph".into()));
    }
    if g.min_out_degree() == 0 {
        return Err(QcsError::Structure("every vertex needs out-degree >= 1".into()));
    }
    if g.has_self_loop() {
        return Err(QcsError::Structure("min-sums reject self-loops".into()));
    }
    let mut best = f64::INFINITY;
    for trial in 0..restarts.max(1) {
        let mut rng = optim::rng_for_trial(seed, trial as u64);
        let t0 = optim::random_point(&mut rng, n, -2.0, 2.0);
        let mut f = |t: &[f64]| {
            let x: Vec<f64> = t.iter().map(|&v| optim::safe_exp(v)).collect();
            graphic_p_sum(g, &x, PowerOrder::NegInf).expect("validated graph")
        };
        let out = optim::pattern_search(&mut f, &t0, 0.5, 1e-9, 100_000);
        best = best.min(out.value);
    }
    Ok(best)
}

/// Minimum min-sum over all strongly connected graphs on n vertices:
/// `min_{1 <= k <= n-2} (k+1) (n-k)^{1/(k+1)}`.
pub fn extremal_minsum_value(n: usize) -> Result<f64> {
    extremal_minsum_argmin(n).map(|(v, _)| v)
}

/// Same, returning the minimizing k.
pub fn extremal_minsum_argmin(n: usize) -> Result<(f64, usize)> {
    if n < 3 {
        return Err(QcsError::Domain(format!("need n >= 3, got {n}")));
    }
    let mut best = (f64::INFINITY, 0usize);
    for k in 1..=(n - 2) {
        let v = (k as f64 + 1.0) * ((n - k) as f64).powf(1.0 / (k as f64 + 1.0));
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

/// Lower bound `e ln(n + 1 - ln(n + 1))` for the min-sum of any strongly
/// connected graph on n vertices.
pub fn extremal_lower_bound(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(QcsError::Domain("need n >= 1".into()));
    }
    let n1 = n as f64 + 1.0;
    Ok(std::f64::consts::E * (n1 - n1.ln()).ln())
}

/// Gap `min_{0 < x <= r-1} (ln x + ln(r-x)/x) - ln ln(r - ln r)`, positive
/// for every r >= 2. The minimization runs a dense log-grid scan with
/// golden-section refinement.
pub fn ks_gap(r: f64) -> Result<f64> {
    if !r.is_finite() || r < 2.0 {
        return Err(QcsError::Domain(format!("need r >= 2, got {r}")));
    }
    let f = |x: f64| x.ln() + (r - x).ln() / x;
    // Scan in log space: the minimizer sits near ln r for large r and at the
    // right endpoint for r near 2.
    let hi = r - 1.0;
    let lo = (hi * 1e-8).min(1e-3);
    let (_, m) = optim::grid_then_golden(|u: f64| f(u.exp()), lo.ln(), hi.ln(), 4000, 1e-12);
    let m = m.min(f(hi));
    Ok(m - (r - r.ln()).ln().ln())
}
