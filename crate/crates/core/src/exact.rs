//! Brute-force reference oracles for small instances. These back the
//! derived expected values in tests and are never on the hot path. Size
//! guards are hard errors: silent exponential blowups poison CI.

use crate::error::{Error, Result};
use crate::flow::CapGraph;
use std::collections::HashMap;

/// Maximum-weight matching by subset DP, exact for n <= 16.
/// Returns (value, matching edges).
pub fn exact_mwm(g: &CapGraph) -> Result<(f64, Vec<(usize, usize)>)> {
    if g.n > 16 {
        return Err(Error::SizeGuard(format!("exact_mwm needs n <= 16, got {}", g.n)));
    }
    let n = g.n;
    let mut adj = vec![Vec::new(); n];
    for &(u, v, w) in g.edges() {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let full: usize = if n == 0 { 0 } else { (1usize << n) - 1 };
    // dp[mask] = best matching weight using only nodes in mask
    let mut dp = vec![0.0f64; full + 1];
    let mut choice: Vec<Option<(usize, usize)>> = vec![None; full + 1];
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        // leave v unmatched
        dp[mask] = dp[rest];
        choice[mask] = None;
        for &(u, w) in &adj[v] {
            if rest & (1 << u) != 0 {
                let cand = dp[rest & !(1 << u)] + w;
                if cand > dp[mask] {
                    dp[mask] = cand;
                    choice[mask] = Some((v, u));
                }
            }
        }
    }
    // reconstruct
    let mut mask = full;
    let mut matching = Vec::new();
    while mask != 0 {
        let v = mask.trailing_zeros() as usize;
        match choice[mask] {
            Some((a, b)) => {
                matching.push((a.min(b), a.max(b)));
                mask &= !(1 << a);
                mask &= !(1 << b);
            }
            None => {
                mask &= !(1 << v);
            }
        }
    }
    Ok((dp[full], matching))
}

/// Exhaustive minimum odd cut: min over all node subsets U with |U ∩ odd|
/// odd of the cut capacity. Exact for n <= 12.
pub fn exact_min_odd_cut(g: &CapGraph, odd: &[bool]) -> Result<(f64, Vec<bool>)> {
    if g.n > 12 {
        return Err(Error::SizeGuard(format!(
            "exact_min_odd_cut needs n <= 12, got {}",
            g.n
        )));
    }
    let n = g.n;
    let mut best_val = f64::INFINITY;
    let mut best: Vec<bool> = Vec::new();
    for mask in 1usize..(1 << n) {
        let mut parity = 0usize;
        for (i, &o) in odd.iter().enumerate() {
            if o && mask & (1 << i) != 0 {
                parity ^= 1;
            }
        }
        if parity == 1 {
            let side: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let val = g.cut_value(&side);
            if val < best_val {
                best_val = val;
                best = side;
            }
        }
    }
    if best.is_empty() {
        return Err(Error::Argument("no odd-intersecting subset exists".into()));
    }
    Ok((best_val, best))
}

/// Per-odd-set table row used by the lambda/L reference oracle.
#[derive(Debug, Clone)]
pub struct OddSetRow {
    pub members: Vec<usize>,
    pub y_sum: f64,
    pub bound: f64,
    pub lambda: f64,
}

/// Enumerate all odd sets of size 3..=max_size over n nodes and tabulate
/// Y_U, b_U = (|U|-1)/2 + f(|U|), lambda_U = Y_U / b_U with the perturbation
/// f(l) = -delta^2 l^2 / 4. Exact for n <= 9.
pub fn exact_lambda_table(
    n: usize,
    y: &HashMap<(usize, usize), f64>,
    delta: f64,
    max_size: usize,
) -> Result<Vec<OddSetRow>> {
    if n > 9 {
        return Err(Error::SizeGuard(format!(
            "exact_lambda_table needs n <= 9, got {n}"
        )));
    }
    let mut rows = Vec::new();
    for mask in 1usize..(1 << n) {
        let size = mask.count_ones() as usize;
        if size < 3 || size % 2 == 0 || size > max_size {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut y_sum = 0.0;
        for (ai, &a) in members.iter().enumerate() {
            for &b in members.iter().skip(ai + 1) {
                if let Some(&w) = y.get(&(a.min(b), a.max(b))) {
                    y_sum += w;
                }
            }
        }
        let l = size as f64;
        let bound = (l - 1.0) / 2.0 - delta * delta * l * l / 4.0;
        rows.push(OddSetRow {
            members,
            y_sum,
            bound,
            lambda: if bound > 0.0 { y_sum / bound } else { 0.0 },
        });
    }
    Ok(rows)
}

/// Reference lambda and L: max_U lambda_U (floored at zero) and the sets
/// within delta^3 of it.
pub fn exact_lambda_l(
    n: usize,
    y: &HashMap<(usize, usize), f64>,
    delta: f64,
) -> Result<(f64, Vec<OddSetRow>)> {
    let max_size = ((1.0 / delta).floor() as usize).min(n);
    let rows = exact_lambda_table(n, y, delta, max_size)?;
    let lambda = rows.iter().map(|r| r.lambda).fold(0.0f64, f64::max);
    let l: Vec<OddSetRow> = rows
        .iter()
        .filter(|r| r.lambda >= lambda - delta.powi(3))
        .cloned()
        .collect();
    Ok((lambda, l))
}

/// Optimum of an LP over an explicitly supplied finite candidate set with a
/// certified feasibility check. Returns None when no candidate is feasible.
pub fn exact_lp_by_enumeration<F, G>(
    candidates: &[Vec<f64>],
    feasible: F,
    objective: G,
    maximize: bool,
) -> Option<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> bool,
    G: Fn(&[f64]) -> f64,
{
    let mut best: Option<(f64, Vec<f64>)> = None;
    for c in candidates {
        if !feasible(c) {
            continue;
        }
        let val = objective(c);
        let better = match &best {
            None => true,
            Some((bv, _)) => {
                if maximize {
                    val > *bv
                } else {
                    val < *bv
                }
            }
        };
        if better {
            best = Some((val, c.clone()));
        }
    }
    best
}

/// Exact strong connectivity of every edge by enumerating induced
/// subgraphs: the strength of e is the largest min-cut value over induced
/// subgraphs containing both endpoints. Exact for n <= 7.
pub fn exact_strong_connectivity(g: &CapGraph) -> Result<HashMap<(usize, usize), f64>> {
    if g.n > 7 {
        return Err(Error::SizeGuard(format!(
            "exact_strong_connectivity needs n <= 7, got {}",
            g.n
        )));
    }
    let n = g.n;
    let mut best: HashMap<(usize, usize), f64> = HashMap::new();
    for mask in 1usize..(1 << n) {
        let nodes: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if nodes.len() < 2 {
            continue;
        }
        let mut remap = vec![usize::MAX; n];
        for (i, &v) in nodes.iter().enumerate() {
            remap[v] = i;
        }
        let mut sub = CapGraph::new(nodes.len());
        let mut sub_edges = Vec::new();
        for &(u, v, w) in g.edges() {
            if remap[u] != usize::MAX && remap[v] != usize::MAX {
                sub.add_edge(remap[u], remap[v], w);
                sub_edges.push((u.min(v), u.max(v)));
            }
        }
        if sub_edges.is_empty() {
            continue;
        }
        // min cut of the induced subgraph (0 if disconnected)
        let (mc, _) = crate::flow::global_min_cut(&sub)?;
        for key in sub_edges {
            let entry = best.entry(key).or_insert(0.0);
            if mc > *entry {
                *entry = mc;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_k3() -> CapGraph {
        let mut g = CapGraph::new(3);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(0, 2, 1.0);
        g
    }

    #[test]
    fn mwm_k3_unit() {
        let (v, m) = exact_mwm(&unit_k3()).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn mwm_petersen_unit() {
        let mut g = CapGraph::new(10);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5, 1.0);
            g.add_edge(5 + i, 5 + (i + 2) % 5, 1.0);
            g.add_edge(i, 5 + i, 1.0);
        }
        let (v, m) = exact_mwm(&g).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn mwm_path_weights() {
        // path 0-1-2-3 with weights 1, 3, 1: optimum is max(3, 1+1) = 3
        let mut g = CapGraph::new(4);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 3.0);
        g.add_edge(2, 3, 1.0);
        let (v, _) = exact_mwm(&g).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn mwm_size_guard() {
        let g = CapGraph::new(17);
        assert!(exact_mwm(&g).is_err());
    }

    #[test]
    fn min_odd_cut_disconnected_component() {
        let mut g = CapGraph::new(4);
        g.add_edge(0, 1, 2.0);
        g.add_edge(2, 3, 2.0);
        let odd = vec![true, false, true, false];
        let (v, _) = exact_min_odd_cut(&g, &odd).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn lambda_k3_half() {
        let mut y = HashMap::new();
        y.insert((0, 1), 0.5);
        y.insert((1, 2), 0.5);
        y.insert((0, 2), 0.5);
        let (lambda, l) = exact_lambda_l(3, &y, 0.1).unwrap();
        // single odd set {0,1,2}: Y = 1.5, b = 1 - 0.0225 = 0.9775
        assert!((lambda - 1.5 / 0.9775).abs() < 1e-12);
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn lp_enumeration_basics() {
        // max x s.t. x <= 1 over candidates
        let cands = vec![vec![0.0], vec![0.5], vec![1.0], vec![1.5]];
        let (v, x) =
            exact_lp_by_enumeration(&cands, |c| c[0] <= 1.0, |c| c[0], true).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(x, vec![1.0]);
        assert!(exact_lp_by_enumeration(&cands, |_| false, |c| c[0], true).is_none());
    }
}
