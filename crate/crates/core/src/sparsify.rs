//! Cut-preserving edge sampling based on strong connectivity, plus the
//! presampling scheme that lets several framework iterations share one
//! pass. Sampling probabilities only ever exceed the required ones
//! (over-sampling preserves the cut guarantees), so the strong-connectivity
//! values are lower bounds.

use crate::config::{SPARSIFY_C, SPARSIFY_C0};
use crate::error::{Error, Result};
use crate::flow::{global_min_cut, CapGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Reweighted sample of an edge-weight assignment that preserves all cut
/// values within (1 +- delta/C) with high probability over the seed.
#[derive(Debug, Clone)]
pub struct Sparsifier {
    pub n: usize,
    pub edges: HashMap<(usize, usize), f64>,
    pub target_error: f64,
    pub seed: u64,
}

impl Sparsifier {
    pub fn cut_value(&self, side: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|(&(u, v), _)| side[u] != side[v])
            .map(|(_, &w)| w)
            .sum()
    }

    pub fn node_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (&(u, v), &w) in &self.edges {
            s[u] += w;
            s[v] += w;
        }
        s
    }

    pub fn words(&self) -> i64 {
        (3 * self.edges.len()) as i64
    }

    /// Serialize to the edge-list text format (reweighted).
    pub fn to_edge_list(&self) -> String {
        let mut keys: Vec<_> = self.edges.keys().copied().collect();
        keys.sort_unstable();
        let mut out = String::new();
        for (u, v) in keys {
            out.push_str(&format!("{} {} {}\n", u, v, self.edges[&(u, v)]));
        }
        out
    }
}

/// Lower-bound strong connectivity per edge by recursive min-cut
/// decomposition: every edge of a component with global min cut c is at
/// least c-strong; splitting along the min cut and recursing refines the
/// bound inside denser parts.
pub fn strong_connectivity(g: &CapGraph) -> HashMap<(usize, usize), f64> {
    let mut out: HashMap<(usize, usize), f64> = HashMap::new();
    for &(u, v, _) in g.edges() {
        out.insert((u.min(v), u.max(v)), 0.0);
    }
    let all: Vec<usize> = (0..g.n).collect();
    decompose(g, &all, &mut out);
    out
}

fn decompose(g: &CapGraph, nodes: &[usize], out: &mut HashMap<(usize, usize), f64>) {
    if nodes.len() < 2 {
        return;
    }
    let mut remap = vec![usize::MAX; g.n];
    for (i, &v) in nodes.iter().enumerate() {
        remap[v] = i;
    }
    let mut sub = CapGraph::new(nodes.len());
    let mut present = false;
    for &(u, v, w) in g.edges() {
        if remap[u] != usize::MAX && remap[v] != usize::MAX {
            sub.add_edge(remap[u], remap[v], w);
            present = true;
        }
    }
    if !present {
        return;
    }
    let (c, side) = match global_min_cut(&sub) {
        Ok(x) => x,
        Err(_) => return,
    };
    if c > 0.0 {
        for &(u, v, _) in g.edges() {
            if remap[u] != usize::MAX && remap[v] != usize::MAX {
                let key = (u.min(v), u.max(v));
                let e = out.entry(key).or_insert(0.0);
                if c > *e {
                    *e = c;
                }
            }
        }
    }
    let left: Vec<usize> = nodes.iter().copied().filter(|&v| side[remap[v]]).collect();
    let right: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&v| !side[remap[v]])
        .collect();
    if left.len() < nodes.len() && right.len() < nodes.len() {
        decompose(g, &left, out);
        decompose(g, &right, out);
    }
}

/// Benczur-Karger inclusion probability for a k-strong edge of weight y.
fn inclusion_prob(y: f64, k: f64, n: usize, delta: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let k = k.max(y); // an edge is always at least y-strong on its own
    (SPARSIFY_C0 * y * (n.max(2) as f64).ln() / (delta * delta * k)).min(1.0)
}

/// Deterministic per-edge coin toss from (seed, edge, salt).
fn edge_coin(seed: u64, u: usize, v: usize, salt: u64) -> f64 {
    let key = ((u as u64) << 32) | (v as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed ^ key.wrapping_mul(0xd1342543de82ef95) ^ salt.wrapping_mul(0x2545f4914f6cdd1d),
    );
    rng.gen::<f64>()
}

/// One-pass cut sparsification of an edge-weight assignment. Included
/// edges are reweighted by their inverse inclusion probability.
pub fn sparsify_weights(
    n: usize,
    weights: &HashMap<(usize, usize), f64>,
    delta: f64,
    seed: u64,
) -> Sparsifier {
    let mut g = CapGraph::new(n);
    for (&(u, v), &w) in weights {
        if w > 0.0 {
            g.add_edge(u, v, w);
        }
    }
    let strength = strong_connectivity(&g);
    let mut edges = HashMap::new();
    for (&(u, v), &w) in weights {
        if w <= 0.0 {
            continue;
        }
        let key = (u.min(v), u.max(v));
        let k = strength.get(&key).copied().unwrap_or(w);
        let p = inclusion_prob(w, k, n, delta);
        if p >= 1.0 || edge_coin(seed, key.0, key.1, 0) < p {
            edges.insert(key, w / p);
        }
    }
    Sparsifier {
        n,
        edges,
        target_error: delta / SPARSIFY_C,
        seed,
    }
}

/// One presampled edge set: candidate edges with the inflated probability
/// they were drawn at.
#[derive(Debug, Clone)]
pub struct PresampleSet {
    pub candidates: HashMap<(usize, usize), f64>,
}

/// k independent presampled edge sets drawn at exp(k*delta) times the base
/// probability, valid to instantiate sparsifiers for k iterations of
/// weights drifting by at most exp(delta/2) per iteration.
#[derive(Debug, Clone)]
pub struct PresampleBundle {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub seed: u64,
    pub sets: Vec<PresampleSet>,
}

impl PresampleBundle {
    pub fn words(&self) -> i64 {
        self.sets
            .iter()
            .map(|s| (3 * s.candidates.len()) as i64)
            .sum()
    }

    /// Instantiate the sparsifier for iteration slot `t` (0-based) given
    /// the iteration's actual weights. Candidate edges are thinned from
    /// the inflated probability down to the probability the weights now
    /// require, keeping the final inclusion probability exact.
    pub fn instantiate(
        &self,
        t: usize,
        weights: &HashMap<(usize, usize), f64>,
        strength: &HashMap<(usize, usize), f64>,
    ) -> Result<Sparsifier> {
        if t >= self.k {
            return Err(Error::Argument(format!(
                "presample slot {t} out of range (k = {})",
                self.k
            )));
        }
        let set = &self.sets[t];
        let mut edges = HashMap::new();
        for (&(u, v), &w) in weights {
            if w <= 0.0 {
                continue;
            }
            let key = (u.min(v), u.max(v));
            let p_infl = match set.candidates.get(&key) {
                Some(&p) => p,
                None => continue,
            };
            let k_str = strength.get(&key).copied().unwrap_or(w);
            let p_need = inclusion_prob(w, k_str, self.n, self.delta);
            if p_need > p_infl + 1e-12 && p_infl < 1.0 {
                return Err(Error::OracleContract(format!(
                    "presample drift exceeded: edge {key:?} needs p {p_need} > drawn {p_infl}"
                )));
            }
            let keep = (p_need / p_infl).min(1.0);
            if p_need >= 1.0 || edge_coin(self.seed, key.0, key.1, ((t as u64) << 20) | 1) < keep
            {
                edges.insert(key, w / p_need);
            }
        }
        Ok(Sparsifier {
            n: self.n,
            edges,
            target_error: self.delta / SPARSIFY_C,
            seed: self.seed,
        })
    }
}

/// Draw k presample sets from the pass-start weights. Requires
/// k * delta <= ln(n) so the exp(k*delta) inflation stays polynomial.
pub fn presample(
    n: usize,
    weights: &HashMap<(usize, usize), f64>,
    k: usize,
    delta: f64,
    seed: u64,
) -> Result<PresampleBundle> {
    if k == 0 {
        return Err(Error::Argument("presample needs k >= 1".into()));
    }
    let kd = k as f64 * delta;
    if kd > (n.max(2) as f64).ln() + 1e-12 {
        return Err(Error::Config(format!(
            "presample inflation too large: k*delta = {kd} > ln n = {}",
            (n.max(2) as f64).ln()
        )));
    }
    let inflation = kd.exp();
    let mut g = CapGraph::new(n);
    for (&(u, v), &w) in weights {
        if w > 0.0 {
            g.add_edge(u, v, w);
        }
    }
    let strength = strong_connectivity(&g);
    let mut sets = Vec::with_capacity(k);
    for t in 0..k {
        let mut candidates = HashMap::new();
        for (&(u, v), &w) in weights {
            if w <= 0.0 {
                continue;
            }
            let key = (u.min(v), u.max(v));
            let k_str = strength.get(&key).copied().unwrap_or(w);
            let p = (inclusion_prob(w, k_str, n, delta) * inflation).min(1.0);
            if p >= 1.0 || edge_coin(seed, key.0, key.1, (t as u64) << 20) < p {
                candidates.insert(key, p);
            }
        }
        sets.push(PresampleSet { candidates });
    }
    Ok(PresampleBundle {
        n,
        k,
        delta,
        seed,
        sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights_of(g: &CapGraph) -> HashMap<(usize, usize), f64> {
        g.edges()
            .iter()
            .map(|&(u, v, w)| ((u.min(v), u.max(v)), w))
            .collect()
    }

    #[test]
    fn strength_single_edge() {
        let mut g = CapGraph::new(2);
        g.add_edge(0, 1, 1.0);
        let s = strong_connectivity(&g);
        assert_eq!(s[&(0, 1)], 1.0);
    }

    #[test]
    fn strength_k4() {
        let mut g = CapGraph::new(4);
        for u in 0..4 {
            for v in (u + 1)..4 {
                g.add_edge(u, v, 1.0);
            }
        }
        let s = strong_connectivity(&g);
        for (_, &k) in &s {
            assert!(k >= 3.0);
        }
    }

    #[test]
    fn strength_bridge_between_triangles() {
        let mut g = CapGraph::new(6);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(0, 2, 1.0);
        g.add_edge(3, 4, 1.0);
        g.add_edge(4, 5, 1.0);
        g.add_edge(3, 5, 1.0);
        g.add_edge(2, 3, 1.0);
        let s = strong_connectivity(&g);
        assert_eq!(s[&(2, 3)], 1.0);
        for &key in &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
            assert!(s[&key] >= 2.0, "edge {key:?} got {}", s[&key]);
        }
    }

    #[test]
    fn strength_lower_bounds_exact_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let n = 4 + rng.gen_range(0..4);
            let mut g = CapGraph::new(n);
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen::<f64>() < 0.6 {
                        g.add_edge(u, v, 1.0 + rng.gen_range(0..3) as f64);
                    }
                }
            }
            if g.m() == 0 {
                continue;
            }
            let approx = strong_connectivity(&g);
            let exact = crate::exact::exact_strong_connectivity(&g).unwrap();
            for (key, &k_hat) in &approx {
                let k_true = exact[key];
                assert!(
                    k_hat <= k_true + 1e-9,
                    "edge {key:?}: estimate {k_hat} exceeds true strength {k_true}"
                );
                assert!(k_hat > 0.0);
            }
        }
    }

    #[test]
    fn small_graph_keeps_everything() {
        // m below the target size: probabilities clamp at 1, weights kept
        let mut g = CapGraph::new(6);
        for u in 0..6 {
            for v in (u + 1)..6 {
                g.add_edge(u, v, 1.0);
            }
        }
        let w = weights_of(&g);
        let sp = sparsify_weights(6, &w, 0.3, 9);
        assert_eq!(sp.edges.len(), 15);
        for (_, &v) in &sp.edges {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_weights_give_empty_sparsifier() {
        let mut w = HashMap::new();
        w.insert((0, 1), 0.0);
        w.insert((1, 2), 0.0);
        let sp = sparsify_weights(3, &w, 0.3, 1);
        assert!(sp.edges.is_empty());
    }

    #[test]
    fn k6_cuts_preserved_across_seeds() {
        let mut g = CapGraph::new(6);
        for u in 0..6 {
            for v in (u + 1)..6 {
                g.add_edge(u, v, 1.0);
            }
        }
        let w = weights_of(&g);
        let delta = 0.3;
        let mut good_seeds = 0;
        for seed in 0..20u64 {
            let sp = sparsify_weights(6, &w, delta, seed);
            let mut ok = true;
            for mask in 1usize..(1 << 5) {
                // node 5 fixed outside so each cut is enumerated once
                let side: Vec<bool> = (0..6).map(|i| i < 5 && mask & (1 << i) != 0).collect();
                let orig = g.cut_value(&side);
                let est = sp.cut_value(&side);
                if (est / orig - 1.0).abs() > delta {
                    ok = false;
                    break;
                }
            }
            if ok {
                good_seeds += 1;
            }
        }
        assert!(good_seeds >= 18, "only {good_seeds}/20 seeds preserved cuts");
    }

    #[test]
    fn oversampling_is_monotone_safe() {
        // doubling all inclusion probabilities never breaks cut
        // preservation: with p clamped at 1 everything is kept exactly
        let mut g = CapGraph::new(5);
        for u in 0..5usize {
            g.add_edge(u, (u + 1) % 5, 2.0);
        }
        let w = weights_of(&g);
        let sp = sparsify_weights(5, &w, 0.3, 4);
        for mask in 1usize..(1 << 4) {
            let side: Vec<bool> = (0..5).map(|i| i < 4 && mask & (1 << i) != 0).collect();
            assert!((sp.cut_value(&side) - g.cut_value(&side)).abs() < 1e-9);
        }
    }

    #[test]
    fn presample_k1_matches_plain_sampling_probabilities() {
        let mut g = CapGraph::new(4);
        g.add_edge(0, 1, 0.002);
        g.add_edge(1, 2, 0.001);
        g.add_edge(2, 3, 0.004);
        let w = weights_of(&g);
        let b = presample(4, &w, 1, 0.3, 3).unwrap();
        let strength = strong_connectivity(&g);
        let sp = b.instantiate(0, &w, &strength).unwrap();
        for (key, &v) in &sp.edges {
            let p = inclusion_prob(w[key], strength[key], 4, 0.3);
            assert!((v - w[key] / p).abs() < 1e-9);
        }
    }

    #[test]
    fn presample_kd_guard() {
        let mut w = HashMap::new();
        w.insert((0, 1), 1.0);
        assert!(presample(4, &w, 50, 0.3, 1).is_err());
    }

    #[test]
    fn presample_tolerates_declared_drift() {
        // weights drifting by exactly exp(delta/2) per iteration stay
        // within the bundle's inflation budget and cuts stay accurate
        let delta = 0.25;
        let mut g = CapGraph::new(6);
        for u in 0..6usize {
            for v in (u + 1)..6 {
                if (u + v) % 2 == 0 || v == u + 1 {
                    g.add_edge(u, v, 0.01 + 0.002 * (u + v) as f64);
                }
            }
        }
        let base = weights_of(&g);
        let bundle = presample(6, &base, 2, delta, 11).unwrap();
        for t in 0..2usize {
            let drift = (delta / 2.0 * (t as f64 + 1.0)).exp();
            let drifted: HashMap<_, _> = base.iter().map(|(&k, &v)| (k, v * drift)).collect();
            let mut dg = CapGraph::new(6);
            for (&(u, v), &w) in &drifted {
                dg.add_edge(u, v, w);
            }
            let sp = bundle
                .instantiate(t, &drifted, &strong_connectivity(&dg))
                .unwrap();
            for mask in 1usize..(1 << 5) {
                let side: Vec<bool> = (0..6).map(|i| i < 5 && mask & (1 << i) != 0).collect();
                let orig = dg.cut_value(&side);
                if orig > 0.0 {
                    let est = sp.cut_value(&side);
                    assert!(
                        (est / orig - 1.0).abs() <= delta,
                        "slot {t} cut off by {}",
                        est / orig - 1.0
                    );
                }
            }
        }
    }

    #[test]
    fn bundle_space_bound() {
        let mut g = CapGraph::new(8);
        for u in 0..8usize {
            g.add_edge(u, (u + 1) % 8, 1.0);
        }
        let w = weights_of(&g);
        let k = 3;
        let delta = 0.2;
        let bundle = presample(8, &w, k, delta, 7).unwrap();
        let single = sparsify_weights(8, &w, delta, 7);
        let bound = (k as f64) * (k as f64 * delta).exp() * (single.words().max(1) as f64) * 2.0;
        assert!((bundle.words() as f64) <= bound);
    }
}
