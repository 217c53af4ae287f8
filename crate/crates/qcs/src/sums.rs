//! Evaluators for every sum family: power means, graphic p-sums over a
//! digraph, cyclic sums with k-term denominators (scalar k with any power
//! order, or per-index window lengths at p = 1), and permutation quotient
//! sums.
//!
//! Two denominator conventions coexist and are never mixed:
//! * cyclic sums use the *normalized* power mean `M_{k,p} = [(sum x^p)/k]^(1/p)`,
//! * graphic sums use the *unnormalized* power sum `(sum x^p)^(1/p)`
//!   (for p = +-inf both reduce to max/min).

use std::str::FromStr;

use crate::digraph::{Digraph, DigraphBuilder};
use crate::error::{QcsError, Result};

/// Extended-real exponent of a power mean. `NegInf`, `Finite(0.0)` and
/// `PosInf` select min, geometric mean and max respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerOrder {
    NegInf,
    Finite(f64),
    PosInf,
}

impl PowerOrder {
    pub fn is_min(self) -> bool {
        matches!(self, PowerOrder::NegInf)
    }

    pub fn is_max(self) -> bool {
        matches!(self, PowerOrder::PosInf)
    }

    pub fn is_geometric(self) -> bool {
        matches!(self, PowerOrder::Finite(p) if p == 0.0)
    }

    /// Finite exponent if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            PowerOrder::Finite(p) => Some(p),
            _ => None,
        }
    }
}

impl FromStr for PowerOrder {
    type Err = QcsError;

    fn from_str(s: &str) -> Result<PowerOrder> {
        match s.trim().to_ascii_lowercase().as_str() {
            "-inf" | "-infinity" | "min" => Ok(PowerOrder::NegInf),
            "inf" | "+inf" | "infinity" | "max" => Ok(PowerOrder::PosInf),
            other => other
                .parse::<f64>()
                .map(PowerOrder::Finite)
                .map_err(|_| QcsError::Validation(format!("bad power order '{s}'"))),
        }
    }
}

impl std::fmt::Display for PowerOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PowerOrder::NegInf => write!(f, "-inf"),
            PowerOrder::PosInf => write!(f, "inf"),
            PowerOrder::Finite(p) => write!(f, "{p}"),
        }
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(QcsError::Domain("empty value list".into()));
    }
    for &v in values {
        if !v.is_finite() || v <= 0.0 {
            return Err(QcsError::Domain(format!("nonpositive value {v}")));
        }
    }
    Ok(())
}

/// Normalized power mean `M_{k,p}(values) = [(sum values^p)/k]^(1/p)`, with
/// min / geometric mean / max at p = -inf / 0 / +inf.
pub fn power_mean(p: PowerOrder, values: &[f64]) -> Result<f64> {
    check_positive(values)?;
    Ok(power_mean_unchecked(p, values))
}

pub(crate) fn power_mean_unchecked(p: PowerOrder, values: &[f64]) -> f64 {
    let k = values.len() as f64;
    match p {
        PowerOrder::NegInf => values.iter().copied().fold(f64::INFINITY, f64::min),
        PowerOrder::PosInf => values.iter().copied().fold(0.0, f64::max),
        PowerOrder::Finite(0.0) => {
            let mean_log: f64 = values.iter().map(|v| v.ln()).sum::<f64>() / k;
            mean_log.exp()
        }
        PowerOrder::Finite(p) => {
            // Scale by the dominant element so the powers never overflow.
            let m = if p > 0.0 {
                values.iter().copied().fold(0.0, f64::max)
            } else {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            };
            let s: f64 = values.iter().map(|&v| (v / m).powf(p)).sum();
            m * (s / k).powf(1.0 / p)
        }
    }
}

/// Unnormalized power sum `(sum values^p)^(1/p)`; max/min at p = +-inf.
/// At p = 0 the unnormalized limit degenerates, so the geometric mean is
/// used there.
pub(crate) fn power_sum_unchecked(p: PowerOrder, values: &[f64]) -> f64 {
    match p {
        PowerOrder::NegInf => values.iter().copied().fold(f64::INFINITY, f64::min),
        PowerOrder::PosInf => values.iter().copied().fold(0.0, f64::max),
        PowerOrder::Finite(0.0) => power_mean_unchecked(p, values),
        PowerOrder::Finite(q) => {
            let m = if q > 0.0 {
                values.iter().copied().fold(0.0, f64::max)
            } else {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            };
            let s: f64 = values.iter().map(|&v| (v / m).powf(q)).sum();
            m * s.powf(1.0 / q)
        }
    }
}

/// Graphic p-sum `sum_v x_v / M_p(x | out(v))` with the unnormalized power
/// sum in the denominator.
///
/// Requires every out-degree >= 1, strictly positive `x`, and no self-loops.
pub fn graphic_p_sum(g: &Digraph, x: &[f64], p: PowerOrder) -> Result<f64> {
    if x.len() != g.vertex_count() {
        return Err(QcsError::Domain(format!(
            "{} values for {} vertices",
            x.len(),
            g.vertex_count()
        )));
    }
    check_positive(x)?;
    if g.has_self_loop() {
        return Err(QcsError::Structure(
            "graphic sums reject self-loops (the term x_v/x_v is constant)".into(),
        ));
    }
    let mut total = 0.0;
    let mut window: Vec<f64> = Vec::new();
    for v in 0..g.vertex_count() {
        let nbrs = g.out(v);
        if nbrs.is_empty() {
            return Err(QcsError::Structure(format!(
                "vertex '{}' has empty out-neighborhood",
                g.id(v)
            )));
        }
        window.clear();
        window.extend(nbrs.iter().map(|&w| x[w]));
        total += x[v] / power_sum_unchecked(p, &window);
    }
    Ok(total)
}

/// Converts the unnormalized cyclic graphic sum (p = 1 on a circulant graph)
/// to the k-normalized cyclic-sum convention: the latter carries an extra
/// factor k.
pub fn cyclic_from_graphic(value: f64, k: usize) -> f64 {
    value * k as f64
}

/// Circulant digraph on vertices `1..n`: edges `i -> i+1, ..., i+k` mod n.
pub fn circulant(n: usize, k: usize) -> Result<Digraph> {
    circulant_vec(n, &vec![k; n])
}

/// Circulant digraph with per-vertex window lengths: vertex `i` points to
/// `i+1, ..., i+k_i` mod n. A window of length n wraps onto the vertex
/// itself, producing a self-loop.
pub fn circulant_vec(n: usize, ks: &[usize]) -> Result<Digraph> {
    if n == 0 {
        return Err(QcsError::Validation("empty circulant".into()));
    }
    if ks.len() != n {
        return Err(QcsError::Validation(format!(
            "{} window lengths for n = {n}",
            ks.len()
        )));
    }
    for &k in ks {
        if k < 1 || k > n {
            return Err(QcsError::Validation(format!(
                "window length {k} out of range [1, {n}]"
            )));
        }
    }
    let mut b = DigraphBuilder::new().allow_self_loops(true);
    let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    for name in &names {
        b.add_vertex(name);
    }
    for i in 0..n {
        for j in 1..=ks[i] {
            b.add_edge(&names[i], &names[(i + j) % n])?;
        }
    }
    Ok(b.build())
}

/// Window lengths of a cyclic sum: one k for all indices, or one per index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WindowLengths {
    Uniform(usize),
    PerIndex(Vec<usize>),
}

/// A cyclic sum `sum_j x_j / M_{k_j,p}(x_{j+1}, ..., x_{j+k_j})` with indices
/// mod n and the normalized power mean in the denominator.
///
/// Per-index window lengths fix p = 1; a window of length n includes `x_j`
/// itself (the literal modular rule).
#[derive(Debug, Clone)]
pub struct CyclicSumSpec {
    n: usize,
    k: WindowLengths,
    p: PowerOrder,
}

impl CyclicSumSpec {
    pub fn uniform(n: usize, k: usize, p: PowerOrder) -> Result<CyclicSumSpec> {
        if n == 0 {
            return Err(QcsError::Validation("n must be positive".into()));
        }
        if k < 1 || k > n {
            return Err(QcsError::Validation(format!(
                "k = {k} out of range [1, {n}]"
            )));
        }
        Ok(CyclicSumSpec {
            n,
            k: WindowLengths::Uniform(k),
            p,
        })
    }

    pub fn per_index(n: usize, ks: Vec<usize>) -> Result<CyclicSumSpec> {
        if n == 0 {
            return Err(QcsError::Validation("n must be positive".into()));
        }
        if ks.len() != n {
            return Err(QcsError::Validation(format!(
                "{} window lengths for n = {n}",
                ks.len()
            )));
        }
        for &k in &ks {
            if k < 1 || k > n {
                return Err(QcsError::Validation(format!(
                    "window length {k} out of range [1, {n}]"
                )));
            }
        }
        Ok(CyclicSumSpec {
            n,
            k: WindowLengths::PerIndex(ks),
            p: PowerOrder::Finite(1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn windows(&self) -> &WindowLengths {
        &self.k
    }

    pub fn power(&self) -> PowerOrder {
        self.p
    }
}

/// Evaluates the cyclic sum of `spec` at the positive n-vector `x`.
pub fn diananda_sum(spec: &CyclicSumSpec, x: &[f64]) -> Result<f64> {
    if x.len() != spec.n {
        return Err(QcsError::Domain(format!(
            "{} values for n = {}",
            x.len(),
            spec.n
        )));
    }
    check_positive(x)?;
    Ok(diananda_sum_unchecked(spec, x))
}

pub(crate) fn diananda_sum_unchecked(spec: &CyclicSumSpec, x: &[f64]) -> f64 {
    let n = spec.n;
    let mut window: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for j in 0..n {
        let k = match &spec.k {
            WindowLengths::Uniform(k) => *k,
            WindowLengths::PerIndex(ks) => ks[j],
        };
        match &spec.k {
            WindowLengths::PerIndex(_) => {
                // p = 1: division by the plain mean of the next k values.
                let mut s = 0.0;
                for i in 1..=k {
                    s += x[(j + i) % n];
                }
                total += x[j] * k as f64 / s;
            }
            WindowLengths::Uniform(_) => {
                window.clear();
                for i in 1..=k {
                    window.push(x[(j + i) % n]);
                }
                total += x[j] / power_mean_unchecked(spec.p, &window);
            }
        }
    }
    total
}

/// `sum_i x_i / x_{sigma(i)}` for a permutation `sigma` of `0..n`.
pub fn permutation_quotient_sum(x: &[f64], sigma: &[usize]) -> Result<f64> {
    check_positive(x)?;
    if sigma.len() != x.len() {
        return Err(QcsError::Validation(format!(
            "permutation length {} for {} values",
            sigma.len(),
            x.len()
        )));
    }
    let mut seen = vec![false; x.len()];
    for &s in sigma {
        if s >= x.len() || seen[s] {
            return Err(QcsError::Validation("not a permutation".into()));
        }
        seen[s] = true;
    }
    Ok(x.iter().zip(sigma).map(|(&xi, &s)| xi / x[s]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_mean_special_orders() {
        assert_relative_eq!(
            power_mean(PowerOrder::Finite(1.0), &[1.0, 3.0]).unwrap(),
            2.0
        );
        assert_relative_eq!(power_mean(PowerOrder::NegInf, &[2.0, 5.0]).unwrap(), 2.0);
        assert_relative_eq!(power_mean(PowerOrder::PosInf, &[2.0, 5.0]).unwrap(), 5.0);
        assert_relative_eq!(
            power_mean(PowerOrder::Finite(0.0), &[1.0, 4.0]).unwrap(),
            2.0
        );
    }

    #[test]
    fn power_mean_rejects_bad_input() {
        assert!(power_mean(PowerOrder::Finite(1.0), &[]).is_err());
        assert!(power_mean(PowerOrder::Finite(1.0), &[1.0, 0.0]).is_err());
        assert!(power_mean(PowerOrder::Finite(1.0), &[1.0, -2.0]).is_err());
    }

    #[test]
    fn power_mean_is_stable_for_large_exponents() {
        let v = power_mean(PowerOrder::Finite(512.0), &[1e200, 1e-200]).unwrap();
        assert!(v.is_finite());
        // Dominated by the max, scaled by (1/k)^(1/p).
        assert_relative_eq!(v, 1e200 * 0.5f64.powf(1.0 / 512.0), max_relative = 1e-12);
    }

    #[test]
    fn graphic_min_sum_on_cycle_of_ones() {
        let g = circulant(5, 1).unwrap();
        let x = vec![1.0; 5];
        assert_relative_eq!(graphic_p_sum(&g, &x, PowerOrder::NegInf).unwrap(), 5.0);
    }

    #[test]
    fn graphic_min_sum_three_vertex_example() {
        // Vertices 1,2 point at 3; vertex 3 points at 1 and 2. Vertices are
        // interned first so that index order matches the labels.
        let mut b = Digraph::builder();
        for v in ["1", "2", "3"] {
            b.add_vertex(v);
        }
        for (u, v) in [("1", "3"), ("2", "3"), ("3", "1"), ("3", "2")] {
            b.add_edge(u, v).unwrap();
        }
        let g = b.build();
        let s2 = 2.0f64.sqrt();
        let x = vec![1.0, 1.0, s2];
        let v = graphic_p_sum(&g, &x, PowerOrder::NegInf).unwrap();
        assert_relative_eq!(v, 2.0 * s2, epsilon = 1e-12);
    }

    #[test]
    fn graphic_max_sum_of_ones_counts_vertices() {
        let g = crate::digraph::tests::problem5_graph();
        let x = vec![1.0; 6];
        assert_relative_eq!(graphic_p_sum(&g, &x, PowerOrder::PosInf).unwrap(), 6.0);
    }

    #[test]
    fn graphic_sum_structure_errors() {
        let g = Digraph::from_edges([("a", "b")]).unwrap();
        // "b" has no out-neighbors.
        assert!(matches!(
            graphic_p_sum(&g, &[1.0, 1.0], PowerOrder::NegInf),
            Err(QcsError::Structure(_))
        ));
        let loops = circulant(2, 2).unwrap(); // wraps onto itself
        assert!(loops.has_self_loop());
        assert!(matches!(
            graphic_p_sum(&loops, &[1.0, 1.0], PowerOrder::PosInf),
            Err(QcsError::Structure(_))
        ));
    }

    #[test]
    fn circulant_shapes() {
        let g = circulant(3, 1).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(crate::digraph::girth(&g), Some(3));
        let g = circulant(4, 2).unwrap();
        assert_eq!(g.edge_count(), 8);
        let v1 = g.index_of("1").unwrap();
        let mut ends: Vec<&str> = g.out(v1).iter().map(|&w| g.id(w)).collect();
        ends.sort_unstable();
        assert_eq!(ends, vec!["2", "3"]);
        // Per-vertex windows with the modular wrap: k_2 = 2 from vertex 2 of
        // n = 2 reaches 1 and itself.
        let g = circulant_vec(2, &[1, 2]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_self_loop());
        assert!(circulant(3, 4).is_err());
    }

    #[test]
    fn diananda_sum_examples() {
        let spec = CyclicSumSpec::uniform(3, 2, PowerOrder::Finite(1.0)).unwrap();
        assert_relative_eq!(diananda_sum(&spec, &[1.0; 3]).unwrap(), 3.0);
        // 2 * (1/5 + 2/4 + 3/3) = 3.4 by hand.
        assert_relative_eq!(
            diananda_sum(&spec, &[1.0, 2.0, 3.0]).unwrap(),
            3.4,
            epsilon = 1e-14
        );
    }

    #[test]
    fn diananda_variable_window_example() {
        // n = 2 with windows (1, 2): x_1/x_2 + 2 x_2/(x_1 + x_2); at
        // (sqrt(2)-1, 1) this is the 1-D minimum t + 2/(t+1) = 2 sqrt(2) - 1.
        let spec = CyclicSumSpec::per_index(2, vec![1, 2]).unwrap();
        let t = 2.0f64.sqrt() - 1.0;
        let v = diananda_sum(&spec, &[t, 1.0]).unwrap();
        assert_relative_eq!(v, 2.0 * 2.0f64.sqrt() - 1.0, epsilon = 1e-12);
        // Independent oracle: dense 1-D scan of t + 2/(t+1).
        let (_, oracle) =
            crate::optim::grid_then_golden(|t| t + 2.0 / (t + 1.0), 1e-9, 3.0, 4096, 1e-12);
        assert_relative_eq!(v, oracle, epsilon = 1e-9);
    }

    #[test]
    fn permutation_quotient_cases() {
        assert_relative_eq!(
            permutation_quotient_sum(&[3.0, 7.0, 11.0], &[0, 1, 2]).unwrap(),
            3.0
        );
        assert_relative_eq!(
            permutation_quotient_sum(&[1.0, 2.0], &[1, 0]).unwrap(),
            2.5
        );
        assert!(permutation_quotient_sum(&[1.0, 2.0], &[0, 0]).is_err());
        assert!(permutation_quotient_sum(&[1.0, 2.0], &[0]).is_err());
    }

    #[test]
    fn graphic_and_cyclic_conventions_agree_on_circulants() {
        let n = 7;
        let k = 3;
        let g = circulant(n, k).unwrap();
        let spec = CyclicSumSpec::uniform(n, k, PowerOrder::Finite(1.0)).unwrap();
        let x: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * (i as f64)).collect();
        let graphic = graphic_p_sum(&g, &x, PowerOrder::Finite(1.0)).unwrap();
        let cyclic = diananda_sum(&spec, &x).unwrap();
        assert_relative_eq!(cyclic_from_graphic(graphic, k), cyclic, epsilon = 1e-12);
    }

    #[test]
    fn power_order_parsing() {
        assert_eq!("-inf".parse::<PowerOrder>().unwrap(), PowerOrder::NegInf);
        assert_eq!("inf".parse::<PowerOrder>().unwrap(), PowerOrder::PosInf);
        assert_eq!(
            "2.5".parse::<PowerOrder>().unwrap(),
            PowerOrder::Finite(2.5)
        );
        assert!("spam".parse::<PowerOrder>().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_positive_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(0.05f64..20.0, n)
        }

        proptest! {
            #[test]
            fn cyclic_sum_is_homogeneous_of_order_zero(
                x in arb_positive_vec(6),
                lambda in 0.1f64..10.0,
                k in 1usize..=6,
            ) {
                let spec = CyclicSumSpec::uniform(6, k, PowerOrder::Finite(1.0)).unwrap();
                let a = diananda_sum(&spec, &x).unwrap();
                let scaled: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                let b = diananda_sum(&spec, &scaled).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }

            #[test]
            fn graphic_sum_is_homogeneous_of_order_zero(
                x in arb_positive_vec(6),
                lambda in 0.1f64..10.0,
            ) {
                let g = circulant(6, 2).unwrap();
                let a = graphic_p_sum(&g, &x, PowerOrder::NegInf).unwrap();
                let scaled: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                let b = graphic_p_sum(&g, &scaled, PowerOrder::NegInf).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }

            #[test]
            fn cyclic_sum_decreases_in_p(x in arb_positive_vec(7), k in 2usize..=5) {
                let orders = [
                    PowerOrder::NegInf,
                    PowerOrder::Finite(-1.0),
                    PowerOrder::Finite(0.0),
                    PowerOrder::Finite(1.0),
                    PowerOrder::Finite(2.0),
                    PowerOrder::PosInf,
                ];
                let mut prev = f64::INFINITY;
                for p in orders {
                    let spec = CyclicSumSpec::uniform(7, k, p).unwrap();
                    let v = diananda_sum(&spec, &x).unwrap();
                    prop_assert!(v <= prev + 1e-9 * prev.abs().max(1.0));
                    prev = v;
                }
            }

            #[test]
            fn harmonic_and_geometric_cyclic_sums_dominate_n(
                x in arb_positive_vec(8),
                k in 1usize..=8,
            ) {
                for p in [PowerOrder::Finite(-1.0), PowerOrder::Finite(0.0)] {
                    let spec = CyclicSumSpec::uniform(8, k, p).unwrap();
                    let v = diananda_sum(&spec, &x).unwrap();
                    prop_assert!(v >= 8.0 - 1e-12, "sum {v} fell below n at p {p}");
                }
            }

            #[test]
            fn permutation_quotient_dominates_n(x in arb_positive_vec(6), seed in 0u64..500) {
                use rand::seq::SliceRandom;
                let mut rng = crate::optim::rng_for_trial(seed, 0);
                let mut sigma: Vec<usize> = (0..6).collect();
                sigma.shuffle(&mut rng);
                let v = permutation_quotient_sum(&x, &sigma).unwrap();
                prop_assert!(v >= 6.0 - 1e-12);
                // Equality iff x is constant on every cycle of sigma.
                let mut constant = true;
                for start in 0..6 {
                    let mut j = sigma[start];
                    while j != start {
                        if (x[j] - x[start]).abs() > 1e-9 {
                            constant = false;
                        }
                        j = sigma[j];
                    }
                }
                if constant {
                    prop_assert!((v - 6.0).abs() <= 1e-9);
                } else {
                    prop_assert!(v > 6.0);
                }
            }
        }
    }
}
