//! Exact max-flow / min-cut, Gomory-Hu tree construction, and minimum odd
//! cut. These back every odd-set oracle in the pipelines.
//!
//! The Gomory-Hu tree uses Gusfield's variant: n-1 max-flow computations on
//! the original graph against a pivot structure, no node contraction. The
//! minimum odd cut follows Padberg-Rao: it is attained at a tree edge whose
//! side intersects the designated odd node set oddly.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Undirected capacitated graph with at most one edge per unordered pair.
/// Zero-capacity edges are dropped at construction: they cannot affect any
/// cut.
#[derive(Debug, Clone)]
pub struct CapGraph {
    pub n: usize,
    edges: Vec<(usize, usize, f64)>,
    index: HashMap<(usize, usize), usize>,
}

impl CapGraph {
    pub fn new(n: usize) -> Self {
        CapGraph {
            n,
            edges: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Add capacity to the unordered pair {u, v}; accumulates on repeats.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64) {
        assert!(u != v, "self-loop in CapGraph");
        assert!(cap >= 0.0, "negative capacity");
        assert!(u < self.n && v < self.n, "node id out of range");
        if cap == 0.0 {
            return;
        }
        let key = if u <= v { (u, v) } else { (v, u) };
        match self.index.get(&key) {
            Some(&i) => self.edges[i].2 += cap,
            None => {
                self.index.insert(key, self.edges.len());
                self.edges.push((key.0, key.1, cap));
            }
        }
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Total capacity crossing the cut (side, complement).
    pub fn cut_value(&self, side: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(u, v, _)| side[u] != side[v])
            .map(|&(_, _, c)| c)
            .sum()
    }
}

/// Dinic's algorithm on an undirected graph.
struct Dinic {
    // adjacency: per node, list of arc indices into `to`/`cap`
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(g: &CapGraph) -> Self {
        let mut d = Dinic {
            adj: vec![Vec::new(); g.n],
            to: Vec::with_capacity(2 * g.m()),
            cap: Vec::with_capacity(2 * g.m()),
            level: vec![-1; g.n],
            iter: vec![0; g.n],
        };
        for &(u, v, c) in g.edges() {
            // undirected: both residual arcs start at capacity c
            d.adj[u].push(d.to.len());
            d.to.push(v);
            d.cap.push(c);
            d.adj[v].push(d.to.len());
            d.to.push(u);
            d.cap.push(c);
        }
        d
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.cap[a] > 1e-12 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, f: f64) -> f64 {
        if u == t {
            return f;
        }
        while self.iter[u] < self.adj[u].len() {
            let a = self.adj[u][self.iter[u]];
            let v = self.to[a];
            if self.cap[a] > 1e-12 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(self.cap[a]));
                if d > 0.0 {
                    self.cap[a] -= d;
                    self.cap[a ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }

    /// Nodes reachable from s in the final residual network.
    fn min_cut_side(&self, s: usize) -> Vec<bool> {
        let mut side = vec![false; self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        side[s] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.cap[a] > 1e-9 && !side[v] {
                    side[v] = true;
                    queue.push_back(v);
                }
            }
        }
        side
    }
}

/// Exact s-t max flow. Returns the flow value and a minimum-cut side
/// containing `s`.
pub fn max_flow(g: &CapGraph, s: usize, t: usize) -> Result<(f64, Vec<bool>)> {
    if s == t {
        return Err(Error::Argument(format!("max_flow with s == t == {s}")));
    }
    if s >= g.n || t >= g.n {
        return Err(Error::Argument("max_flow node out of range".into()));
    }
    let mut dinic = Dinic::new(g);
    let value = dinic.run(s, t);
    Ok((value, dinic.min_cut_side(s)))
}

/// Gomory-Hu tree: `parent[v]` and `flow[v]` for v in 1..n, rooted at 0.
/// Removing tree edge (v, parent[v]) splits the node set into two sides of
/// a minimum cut of value `flow[v]`.
#[derive(Debug, Clone)]
pub struct GomoryHuTree {
    pub n: usize,
    pub parent: Vec<usize>,
    pub flow: Vec<f64>,
}

impl GomoryHuTree {
    /// Tree edges as (child, parent, flow) triples, child in 1..n.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..self.n).map(move |v| (v, self.parent[v], self.flow[v]))
    }

    /// Fundamental split of tree edge (v, parent[v]): marks the component
    /// containing `v` after the edge is removed from the tree (v's subtree,
    /// since descent never crosses the parent pointer).
    pub fn fundamental_side(&self, v: usize) -> Vec<bool> {
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for u in 1..self.n {
            children[self.parent[u]].push(u);
        }
        let mut side = vec![false; self.n];
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if side[x] {
                continue;
            }
            side[x] = true;
            stack.extend(children[x].iter().copied());
        }
        side
    }

    /// Minimum tree-edge flow along the path u -> v; equals the exact u-v
    /// min cut of the underlying graph.
    pub fn path_min(&self, u: usize, v: usize) -> f64 {
        // depths via parent walks; n is small enough for repeated climbing
        let mut du = self.depth(u);
        let mut dv = self.depth(v);
        let (mut a, mut b) = (u, v);
        let mut best = f64::INFINITY;
        while du > dv {
            best = best.min(self.flow[a]);
            a = self.parent[a];
            du -= 1;
        }
        while dv > du {
            best = best.min(self.flow[b]);
            b = self.parent[b];
            dv -= 1;
        }
        while a != b {
            best = best.min(self.flow[a]);
            best = best.min(self.flow[b]);
            a = self.parent[a];
            b = self.parent[b];
        }
        best
    }

    fn depth(&self, mut v: usize) -> usize {
        let mut d = 0;
        while v != 0 {
            v = self.parent[v];
            d += 1;
        }
        d
    }
}

/// Build a Gomory-Hu tree with n-1 max-flows on the original graph
/// (Gusfield's variant, including the parent-splice correction that keeps
/// the fundamental-cut property).
pub fn gomory_hu(g: &CapGraph) -> Result<GomoryHuTree> {
    let n = g.n;
    if n == 0 {
        return Err(Error::Argument("gomory_hu on empty graph".into()));
    }
    let mut parent = vec![0usize; n];
    let mut flow = vec![f64::INFINITY; n];
    for s in 1..n {
        let t = parent[s];
        let (f, cut) = max_flow(g, s, t)?;
        flow[s] = f;
        for v in 0..n {
            if v != s && v != t && cut[v] && parent[v] == t {
                parent[v] = s;
            }
        }
        if t != 0 && cut[parent[t]] {
            // splice s between t and its former parent
            parent[s] = parent[t];
            parent[t] = s;
            flow[s] = flow[t];
            flow[t] = f;
        }
    }
    Ok(GomoryHuTree { n, parent, flow })
}

/// Minimum odd cut: over all cuts (U, complement) with |U ∩ odd| odd, the
/// minimum capacity one. `odd` must have even cardinality >= 2 so that
/// odd-separating cuts exist on both sides.
///
/// By Padberg-Rao the minimum is attained at a Gomory-Hu tree edge; ties
/// break toward the lowest-index tree edge. The returned side is the
/// recorded cut side of that tree edge containing the child node.
pub fn min_odd_cut(g: &CapGraph, odd: &[bool]) -> Result<(Vec<bool>, f64)> {
    let odd_count = odd.iter().filter(|&&b| b).count();
    if odd_count < 2 || odd_count % 2 != 0 {
        return Err(Error::Argument(format!(
            "min_odd_cut needs an even number (>= 2) of designated nodes, got {odd_count}"
        )));
    }
    if odd.len() != g.n {
        return Err(Error::Argument("odd marker length != n".into()));
    }
    let tree = gomory_hu(g)?;
    min_odd_cut_in_tree(&tree, odd, |_| true)
}

/// Scan a Gomory-Hu tree for the minimum odd-separating fundamental cut,
/// restricted to tree edges accepted by `keep` (used to skip degenerate
/// padding singletons). Ties break toward the lowest-index tree edge.
pub fn min_odd_cut_in_tree<F>(
    tree: &GomoryHuTree,
    odd: &[bool],
    mut keep: F,
) -> Result<(Vec<bool>, f64)>
where
    F: FnMut(&[bool]) -> bool,
{
    let mut best: Option<(Vec<bool>, f64)> = None;
    for (v, _p, f) in tree.edges() {
        let side = tree.fundamental_side(v);
        let cnt = side
            .iter()
            .zip(odd.iter())
            .filter(|(&s, &o)| s && o)
            .count();
        if cnt % 2 == 1 && keep(&side) {
            let better = match &best {
                None => true,
                Some((_, bf)) => f < bf - 1e-12,
            };
            if better {
                best = Some((side, f));
            }
        }
    }
    best.ok_or_else(|| Error::Internal("no odd-separating Gomory-Hu tree edge found".into()))
}

/// Stoer-Wagner global minimum cut. Returns (value, side). For a
/// disconnected graph the value is 0 with one component as the side.
pub fn global_min_cut(g: &CapGraph) -> Result<(f64, Vec<bool>)> {
    let n = g.n;
    if n < 2 {
        return Err(Error::Argument("global_min_cut needs n >= 2".into()));
    }
    // adjacency matrix; merged supernodes tracked by membership lists
    let mut w = vec![vec![0.0f64; n]; n];
    for &(u, v, c) in g.edges() {
        w[u][v] += c;
        w[v][u] += c;
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best_val = f64::INFINITY;
    let mut best_side = vec![false; n];
    while active.len() > 1 {
        // maximum adjacency order
        let mut weights = vec![0.0f64; n];
        let mut order = Vec::with_capacity(active.len());
        let mut in_a = vec![false; n];
        for _ in 0..active.len() {
            let mut pick = None;
            let mut pw = -1.0;
            for &v in &active {
                if !in_a[v] && weights[v] > pw {
                    pw = weights[v];
                    pick = Some(v);
                }
            }
            let v = pick.unwrap();
            in_a[v] = true;
            order.push(v);
            for &u in &active {
                if !in_a[u] {
                    weights[u] += w[v][u];
                }
            }
        }
        let t = *order.last().unwrap();
        let s = order[order.len() - 2];
        let cut_of_phase = weights[t];
        if cut_of_phase < best_val {
            best_val = cut_of_phase;
            best_side = vec![false; n];
            for &m in &members[t] {
                best_side[m] = true;
            }
        }
        // merge t into s
        let tm = std::mem::take(&mut members[t]);
        members[s].extend(tm);
        for &u in &active {
            if u != s && u != t {
                w[s][u] += w[t][u];
                w[u][s] = w[s][u];
            }
        }
        active.retain(|&x| x != t);
    }
    Ok((best_val, best_side))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph() -> CapGraph {
        // 0 -1- 1 -2- 2
        let mut g = CapGraph::new(3);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 2.0);
        g
    }

    #[test]
    fn max_flow_bottleneck() {
        let g = path_graph();
        let (v, side) = max_flow(&g, 0, 2).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(side, vec![true, false, false]);
    }

    #[test]
    fn max_flow_k4() {
        let mut g = CapGraph::new(4);
        for u in 0..4 {
            for v in (u + 1)..4 {
                g.add_edge(u, v, 1.0);
            }
        }
        for s in 0..4 {
            for t in 0..4 {
                if s != t {
                    let (v, _) = max_flow(&g, s, t).unwrap();
                    assert!((v - 3.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn max_flow_disconnected() {
        let mut g = CapGraph::new(4);
        g.add_edge(0, 1, 1.0);
        g.add_edge(2, 3, 1.0);
        let (v, side) = max_flow(&g, 0, 2).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(side, vec![true, true, false, false]);
    }

    #[test]
    fn max_flow_s_equals_t() {
        let g = path_graph();
        assert!(max_flow(&g, 1, 1).is_err());
    }

    #[test]
    fn gomory_hu_star() {
        // star centered at 0 with leaf capacities 1..4: tree is the star
        let mut g = CapGraph::new(5);
        for v in 1..5 {
            g.add_edge(0, v, v as f64);
        }
        let t = gomory_hu(&g).unwrap();
        for (v, p, f) in t.edges() {
            assert_eq!(p, 0);
            assert!((f - v as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn gomory_hu_triangle() {
        let mut g = CapGraph::new(3);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(0, 2, 1.0);
        let t = gomory_hu(&g).unwrap();
        for (_, _, f) in t.edges() {
            assert!((f - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gomory_hu_single_node() {
        let g = CapGraph::new(1);
        let t = gomory_hu(&g).unwrap();
        assert_eq!(t.edges().count(), 0);
    }

    #[test]
    fn min_odd_cut_path_ends() {
        let g = path_graph();
        let odd = vec![true, false, true];
        let (side, val) = min_odd_cut(&g, &odd).unwrap();
        assert!((val - 1.0).abs() < 1e-12);
        let cnt = side
            .iter()
            .zip(odd.iter())
            .filter(|(&s, &o)| s && o)
            .count();
        assert_eq!(cnt % 2, 1);
    }

    #[test]
    fn min_odd_cut_isolated_padding() {
        // K3 plus an isolated padding node; all four designated
        let mut g = CapGraph::new(4);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(0, 2, 1.0);
        let odd = vec![true; 4];
        let (_, val) = min_odd_cut(&g, &odd).unwrap();
        assert_eq!(val, 0.0);
    }

    #[test]
    fn min_odd_cut_parity_guard() {
        let g = path_graph();
        assert!(min_odd_cut(&g, &[true, true, true]).is_err());
        assert!(min_odd_cut(&g, &[false, false, false]).is_err());
    }

    #[test]
    fn stoer_wagner_bridge() {
        // two triangles joined by a bridge: global min cut = bridge = 1
        let mut g = CapGraph::new(6);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(0, 2, 1.0);
        g.add_edge(3, 4, 1.0);
        g.add_edge(4, 5, 1.0);
        g.add_edge(3, 5, 1.0);
        g.add_edge(2, 3, 1.0);
        let (v, side) = global_min_cut(&g).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let cut = g.cut_value(&side);
        assert!((cut - 1.0).abs() < 1e-12);
    }
}
