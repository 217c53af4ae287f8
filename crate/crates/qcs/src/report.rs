//! Solver reports and structured certificates shared by the minimizers.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    RecessionDetected,
    IterationLimit,
}

/// Witness for an exact min-sum value: the ordered partition, its strictly
/// increasing block values, and the reconstructed sum value.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionCertificate {
    /// Vertex ids per block, ascending rank (lower rank = smaller value).
    pub blocks: Vec<Vec<String>>,
    /// One positive value per block, strictly increasing with rank.
    pub block_values: Vec<f64>,
    /// Sum value reproduced by the induced assignment.
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Partition(PartitionCertificate),
    /// Unbounded-descent direction in log coordinates (per vertex).
    Recession { direction: Vec<f64> },
    /// Minimizing chain of a staircase sum.
    Chain { points: Vec<f64> },
}

/// Common result of a minimization.
#[derive(Debug, Clone, Serialize)]
pub struct OptReport {
    pub value: f64,
    /// Positive assignment per vertex, normalized (pinned vertex at its
    /// value, otherwise first vertex = 1). For recession reports this is the
    /// glued per-component minimizer, not a point achieving `value`.
    pub minimizer: Vec<f64>,
    pub attained: bool,
    pub status: SolveStatus,
    /// Set when the reported value is only known to bound the infimum from
    /// above (nonconvex searches).
    pub upper_bound_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    pub iterations: usize,
    pub gradient_norm: f64,
}
