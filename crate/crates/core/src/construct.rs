//! Construction pipeline: a (1 - eps)-approximate maximum weighted matching
//! in general graphs via the perturbed odd-set packing LP.
//!
//! The odd-set bounds carry the perturbation f(l) = -delta^2 l^2 / 4, which
//! makes the near-violated sets laminar (so the dual state fits in O(n)
//! records) and reduces the most-violated-set search to minimum odd cuts on
//! an apex graph. The subproblem multiplier uses 1 + 2g(l)/l with
//! g(l) = -delta^2 l^2 / 2: this is the variant under which the size
//! thresholds around lambda*(1 - 2h(l)) separate qualifying sets from
//! mismatched ones.

use crate::error::{Error, Result};
use crate::flow::{self, CapGraph};
use crate::frameworks::{pack_solve, ConstraintView, PackParams, PackStatus, PackingProblem};
use crate::graph::{Edge, EdgeStream, ResourceLedger};
use std::collections::{HashMap, HashSet};

pub type EdgeKey = (usize, usize);

pub fn key(u: usize, v: usize) -> EdgeKey {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Sparse fractional matching: edge -> y in [0, 1].
#[derive(Debug, Clone, Default)]
pub struct FractionalMatching {
    pub y: HashMap<EdgeKey, f64>,
}

impl FractionalMatching {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.y.get(&key(u, v)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, u: usize, v: usize, val: f64) {
        if val > 0.0 {
            self.y.insert(key(u, v), val);
        } else {
            self.y.remove(&key(u, v));
        }
    }

    pub fn value(&self, weights: &HashMap<EdgeKey, f64>) -> f64 {
        self.y
            .iter()
            .map(|(k, &v)| v * weights.get(k).copied().unwrap_or(0.0))
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.y.values_mut() {
            *v *= factor;
        }
    }

    /// Per-node degree sums over a node universe of size n.
    pub fn degrees(&self, n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n];
        for (&(u, v), &val) in &self.y {
            d[u] += val;
            d[v] += val;
        }
        d
    }

    /// Sum of y over pairs inside `members`.
    pub fn inside_sum(&self, members: &[usize]) -> f64 {
        let set: HashSet<usize> = members.iter().copied().collect();
        self.y
            .iter()
            .filter(|(&(u, v), _)| set.contains(&u) && set.contains(&v))
            .map(|(_, &v)| v)
            .sum()
    }

    pub fn blend(&self, other: &Self, sigma: f64) -> Self {
        let mut out = HashMap::new();
        for (&k, &v) in &self.y {
            let o = other.y.get(&k).copied().unwrap_or(0.0);
            let nv = (1.0 - sigma) * v + sigma * o;
            if nv > 1e-15 {
                out.insert(k, nv);
            }
        }
        for (&k, &v) in &other.y {
            if !self.y.contains_key(&k) {
                let nv = sigma * v;
                if nv > 1e-15 {
                    out.insert(k, nv);
                }
            }
        }
        FractionalMatching { y: out }
    }

    /// Export as edge-list lines "u v y".
    pub fn to_edge_list(&self) -> String {
        let mut keys: Vec<_> = self.y.keys().copied().collect();
        keys.sort_unstable();
        let mut s = String::new();
        for (u, v) in keys {
            s.push_str(&format!("{} {} {}\n", u, v, self.y[&(u, v)]));
        }
        s
    }
}

/// Perturbations: f = g + h.
pub fn perturb_f(l: f64, delta: f64) -> f64 {
    -delta * delta * l * l / 4.0
}

pub fn perturb_g(l: f64, delta: f64) -> f64 {
    -delta * delta * l * l / 2.0
}

pub fn perturb_h(l: f64, delta: f64) -> f64 {
    delta * delta * l * l / 4.0
}

/// Perturbed odd-set bound b(l) = (l - 1)/2 + f(l) for odd l in [3, 1/delta].
pub fn perturbed_bound(l: usize, delta: f64) -> Result<f64> {
    if l % 2 == 0 || l < 3 {
        return Err(Error::Argument(format!(
            "odd set size must be odd >= 3, got {l}"
        )));
    }
    if (l as f64) > 1.0 / delta + 1e-9 {
        return Err(Error::Argument(format!(
            "odd set size {l} exceeds 1/delta = {}",
            1.0 / delta
        )));
    }
    let lf = l as f64;
    Ok((lf - 1.0) / 2.0 + perturb_f(lf, delta))
}

/// One stored odd set with its dual bookkeeping.
#[derive(Debug, Clone)]
pub struct OddSetRecord {
    pub members: Vec<usize>,
    pub y_sum: f64,
    pub bound: f64,
    pub lambda: f64,
    /// Dual weight (installed by the framework when driving the oracle).
    pub z: f64,
}

/// Nested family of near-violated odd sets.
#[derive(Debug, Clone, Default)]
pub struct LaminarFamily {
    pub sets: Vec<OddSetRecord>,
    pub lambda: f64,
    /// Per node, indices of containing sets (a chain, by laminarity).
    chains: Vec<Vec<usize>>,
}

impl LaminarFamily {
    pub fn new(sets: Vec<OddSetRecord>, lambda: f64, n: usize) -> Self {
        let mut chains = vec![Vec::new(); n];
        for (idx, s) in sets.iter().enumerate() {
            for &i in &s.members {
                chains[i].push(idx);
            }
        }
        LaminarFamily {
            sets,
            lambda,
            chains,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// q_ij = sum of z over sets containing both endpoints; containing
    /// sets form nested chains, so the walk is O(1/delta).
    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        if self.chains.is_empty() || i >= self.chains.len() || j >= self.chains.len() {
            return 0.0;
        }
        let (a, b) = (&self.chains[i], &self.chains[j]);
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        short
            .iter()
            .filter(|idx| long.contains(idx))
            .map(|&idx| self.sets[idx].z)
            .sum()
    }

    /// Pairwise laminarity: any two sets disjoint or nested.
    pub fn check_laminar(&self) -> Result<()> {
        for (i, a) in self.sets.iter().enumerate() {
            let sa: HashSet<usize> = a.members.iter().copied().collect();
            for b in self.sets.iter().skip(i + 1) {
                let inter = b.members.iter().filter(|m| sa.contains(m)).count();
                if inter == 0 || inter == sa.len().min(b.members.len()) {
                    continue;
                }
                return Err(Error::Internal(format!(
                    "laminar violation: {:?} and {:?} cross",
                    a.members, b.members
                )));
            }
        }
        Ok(())
    }

    /// Nested parenthesized export with z annotations.
    pub fn to_nested_string(&self) -> String {
        let mut order: Vec<usize> = (0..self.sets.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.sets[i].members.len()));
        let mut parent: Vec<Option<usize>> = vec![None; self.sets.len()];
        for (pos, &i) in order.iter().enumerate() {
            let si: HashSet<usize> = self.sets[i].members.iter().copied().collect();
            let mut best: Option<usize> = None;
            for &j in order.iter().take(pos) {
                let sj: HashSet<usize> = self.sets[j].members.iter().copied().collect();
                if si.iter().all(|m| sj.contains(m)) && sj.len() > si.len() {
                    let better = match best {
                        None => true,
                        Some(b) => self.sets[j].members.len() < self.sets[b].members.len(),
                    };
                    if better {
                        best = Some(j);
                    }
                }
            }
            parent[i] = best;
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.sets.len()];
        let mut roots = Vec::new();
        for i in 0..self.sets.len() {
            match parent[i] {
                Some(p) => children[p].push(i),
                None => roots.push(i),
            }
        }
        fn emit(out: &mut String, i: usize, sets: &[OddSetRecord], children: &[Vec<usize>]) {
            out.push('(');
            let mut ms = sets[i].members.clone();
            ms.sort_unstable();
            out.push_str(
                &ms.iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push_str(&format!(" | z={}", sets[i].z));
            for &c in &children[i] {
                out.push(' ');
                emit(out, c, sets, children);
            }
            out.push(')');
        }
        let mut out = String::new();
        for r in roots {
            emit(&mut out, r, &self.sets, &children);
            out.push('\n');
        }
        out
    }
}

/// One-pass constant-factor matching: keep a matching, replace the
/// conflicting edges when the new edge outweighs their total. Yields at
/// least a sixth of the optimum in O(n) space.
pub fn greedy_constant_approx(stream: &EdgeStream) -> (Vec<Edge>, f64) {
    let mut at: HashMap<usize, usize> = HashMap::new(); // node -> slot
    let mut slots: Vec<Option<Edge>> = Vec::new();
    for e in stream.next_pass() {
        let mut conflict_w = 0.0;
        let mut conflicts: Vec<usize> = Vec::new();
        for node in [e.u, e.v] {
            if let Some(&s) = at.get(&node) {
                if !conflicts.contains(&s) {
                    conflicts.push(s);
                    conflict_w += slots[s].as_ref().map(|x| x.w).unwrap_or(0.0);
                }
            }
        }
        if e.w > conflict_w {
            for &s in &conflicts {
                if let Some(old) = slots[s].take() {
                    at.remove(&old.u);
                    at.remove(&old.v);
                }
            }
            let s = slots.len();
            slots.push(Some(e));
            at.insert(e.u, s);
            at.insert(e.v, s);
        }
    }
    let matching: Vec<Edge> = slots.into_iter().flatten().collect();
    let value = matching.iter().map(|e| e.w).sum();
    (matching, value)
}

/// Outcome of one apex-graph minimum odd cut search.
#[derive(Debug, Clone)]
pub struct OddCutOutcome {
    /// Real members of the returned set (padding stripped).
    pub members: Vec<usize>,
    /// F(lambda*, l, U) from the closed formula.
    pub f_value: f64,
    /// Raw cut value with any padding contribution removed; equals
    /// `f_value` up to rounding.
    pub cut_value: f64,
}

/// Build the apex graph whose odd cuts avoiding the apex have value
/// exactly F(lambda*, l, U) = sum_{i in U} [lambda*(1 + 2g(l)/l) -
/// deg_y(i)] + y(U, complement), pad the node count odd, and return the
/// minimum odd cut. Nodes in `excluded` are deleted first.
pub fn min_f_odd_set(
    y: &FractionalMatching,
    n: usize,
    lambda_star: f64,
    l: usize,
    delta: f64,
    excluded: &HashSet<usize>,
) -> Result<OddCutOutcome> {
    let active: Vec<usize> = (0..n).filter(|i| !excluded.contains(i)).collect();
    if active.is_empty() {
        return Err(Error::Argument("all nodes excluded".into()));
    }
    let lf = l as f64;
    let mult = lambda_star * (1.0 + 2.0 * perturb_g(lf, delta) / lf); // lambda* (1 - delta^2 l)
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in active.iter().enumerate() {
        pos[v] = i;
    }
    let a = active.len();
    let mut deg = vec![0.0; a];
    let mut inner_edges: Vec<(usize, usize, f64)> = Vec::new();
    for (&(u, v), &val) in &y.y {
        if u < n && v < n && pos[u] != usize::MAX && pos[v] != usize::MAX && val > 0.0 {
            deg[pos[u]] += val;
            deg[pos[v]] += val;
            inner_edges.push((pos[u], pos[v], val));
        }
    }
    for (i, &d) in deg.iter().enumerate() {
        if mult - d < -1e-9 {
            return Err(Error::Argument(format!(
                "apex weight negative at node {}: lambda* {lambda_star} too small for degree {d}",
                active[i]
            )));
        }
    }
    let pad = a % 2 == 0; // pad so the non-apex node count is odd
    let apex = a + usize::from(pad);
    let total = apex + 1;
    let mut g = CapGraph::new(total);
    for &(u, v, val) in &inner_edges {
        g.add_edge(u, v, val);
    }
    for (i, &d) in deg.iter().enumerate() {
        g.add_edge(i, apex, (mult - d).max(0.0));
    }
    if pad {
        g.add_edge(a, apex, mult);
    }
    let odd = vec![true; total];
    let (mut side, cutval) = flow::min_odd_cut(&g, &odd)?;
    if side[apex] {
        for s in side.iter_mut() {
            *s = !*s;
        }
    }
    let members: Vec<usize> = (0..a).filter(|&i| side[i]).map(|i| active[i]).collect();
    let pad_in = pad && side[a];
    let cut_adj = cutval - if pad_in { mult } else { 0.0 };
    let mset: HashSet<usize> = (0..a).filter(|&i| side[i]).collect();
    let mut f_val = 0.0;
    for &i in &mset {
        f_val += mult - deg[i];
    }
    for &(u, v, val) in &inner_edges {
        if mset.contains(&u) != mset.contains(&v) {
            f_val += val;
        }
    }
    debug_assert!(
        (f_val - cut_adj).abs() <= 1e-9 * (1.0 + f_val.abs()),
        "cut/formula mismatch: {f_val} vs {cut_adj}"
    );
    Ok(OddCutOutcome {
        members,
        f_value: f_val,
        cut_value: cut_adj,
    })
}

fn lambda_of(y: &FractionalMatching, members: &[usize], delta: f64) -> Option<f64> {
    let l = members.len();
    if l < 3 || l % 2 == 0 || (l as f64) > 1.0 / delta + 1e-9 {
        return None;
    }
    let b = perturbed_bound(l, delta).ok()?;
    if b <= 0.0 {
        return None;
    }
    Some(y.inside_sum(members) / b)
}

/// Odd set sizes searched: 3, 5, ..., min(floor(1/delta), n).
pub fn size_range(n: usize, delta: f64) -> Vec<usize> {
    let cap = ((1.0 / delta).floor() as usize).min(n);
    (3..=cap).filter(|l| l % 2 == 1).collect()
}

/// Compute lambda = max(1 + 2 delta, max_U lambda_U) by repeated minimum
/// odd cuts: a cut below lambda*(1 - 2h(l)) certifies a set with
/// lambda_U > lambda*, which becomes the new lambda*.
pub fn compute_lambda(y: &FractionalMatching, n: usize, delta: f64) -> Result<f64> {
    let floor = 1.0 + 2.0 * delta;
    let mut lambda_star = floor;
    let none = HashSet::new();
    let guard = 8 * n * size_range(n, delta).len().max(1) + 64;
    let mut spent = 0usize;
    for &l in &size_range(n, delta) {
        loop {
            spent += 1;
            if spent > guard {
                return Err(Error::Internal("compute_lambda failed to stabilize".into()));
            }
            let out = min_f_odd_set(y, n, lambda_star, l, delta, &none)?;
            let threshold = lambda_star * (1.0 - 2.0 * perturb_h(l as f64, delta));
            if out.f_value < threshold - 1e-12 {
                match lambda_of(y, &out.members, delta) {
                    Some(lu) if lu > lambda_star + 1e-15 => lambda_star = lu,
                    _ => break,
                }
            } else {
                break;
            }
        }
    }
    Ok(lambda_star)
}

/// Collect every odd set with lambda_U >= lambda - delta^3 (sizes up to
/// 1/delta). `fast` reuses one Gomory-Hu tree per round and harvests all
/// qualifying tree edges; the plain mode finds one set per cut. The
/// family is checked laminar whenever lambda > 1 + 2 delta.
pub fn compute_l(
    y: &FractionalMatching,
    n: usize,
    lambda: f64,
    delta: f64,
    fast: bool,
) -> Result<LaminarFamily> {
    let lambda_star = lambda - delta.powi(3);
    let mut sets: Vec<OddSetRecord> = Vec::new();
    if lambda <= 1.0 + 2.0 * delta + 1e-12 {
        // below the floor the laminarity guarantee lapses; run with an
        // empty family
        return Ok(LaminarFamily::new(sets, lambda, n));
    }
    for &l in &size_range(n, delta) {
        let mut excluded: HashSet<usize> = HashSet::new();
        let threshold = lambda_star * (1.0 - 2.0 * perturb_h(l as f64, delta));
        if fast {
            let rounds_guard = 4 * (usize::BITS - n.leading_zeros()) as usize + 16;
            for _round in 0..rounds_guard {
                let found = harvest_round(
                    y,
                    n,
                    lambda_star,
                    l,
                    delta,
                    lambda,
                    &mut excluded,
                    threshold,
                    &mut sets,
                )?;
                if !found {
                    break;
                }
            }
        } else {
            loop {
                if (0..n).all(|i| excluded.contains(&i)) {
                    break;
                }
                let out = min_f_odd_set(y, n, lambda_star, l, delta, &excluded)?;
                let lu = lambda_of(y, &out.members, delta);
                let qualifies = out.members.len() == l
                    && lu
                        .map(|v| v >= lambda - delta.powi(3) - 1e-12)
                        .unwrap_or(false);
                if qualifies && out.f_value <= threshold + 1e-12 {
                    sets.push(OddSetRecord {
                        y_sum: y.inside_sum(&out.members),
                        bound: perturbed_bound(l, delta)?,
                        lambda: lu.unwrap(),
                        z: 0.0,
                        members: out.members,
                    });
                    let last = sets.last().unwrap();
                    excluded.extend(last.members.iter().copied());
                } else {
                    break;
                }
            }
        }
    }
    let fam = LaminarFamily::new(sets, lambda, n);
    fam.check_laminar()?;
    Ok(fam)
}

/// One fast-mode round: apex graph once, Gomory-Hu tree once, then harvest
/// every tree edge below the acceptance threshold whose side is a fresh
/// size-l set. Returns whether anything was harvested.
#[allow(clippy::too_many_arguments)]
fn harvest_round(
    y: &FractionalMatching,
    n: usize,
    lambda_star: f64,
    l: usize,
    delta: f64,
    lambda: f64,
    excluded: &mut HashSet<usize>,
    threshold: f64,
    sets: &mut Vec<OddSetRecord>,
) -> Result<bool> {
    let active: Vec<usize> = (0..n).filter(|i| !excluded.contains(i)).collect();
    if active.len() < l {
        return Ok(false);
    }
    let lf = l as f64;
    let mult = lambda_star * (1.0 + 2.0 * perturb_g(lf, delta) / lf);
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in active.iter().enumerate() {
        pos[v] = i;
    }
    let a = active.len();
    let mut deg = vec![0.0; a];
    let mut inner: Vec<(usize, usize, f64)> = Vec::new();
    for (&(u, v), &val) in &y.y {
        if pos[u] != usize::MAX && pos[v] != usize::MAX && val > 0.0 {
            deg[pos[u]] += val;
            deg[pos[v]] += val;
            inner.push((pos[u], pos[v], val));
        }
    }
    let pad = a % 2 == 0;
    let apex = a + usize::from(pad);
    let mut g = CapGraph::new(apex + 1);
    for &(u, v, val) in &inner {
        g.add_edge(u, v, val);
    }
    for (i, &d) in deg.iter().enumerate() {
        g.add_edge(i, apex, (mult - d).max(0.0));
    }
    if pad {
        g.add_edge(a, apex, mult);
    }
    let tree = flow::gomory_hu(&g)?;
    let mut harvested = false;
    let mut fresh: HashSet<usize> = HashSet::new();
    for (v, _p, f) in tree.edges() {
        if f > threshold + 1e-12 {
            continue;
        }
        let mut side = tree.fundamental_side(v);
        if side[apex] {
            for s in side.iter_mut() {
                *s = !*s;
            }
        }
        let members: Vec<usize> = (0..a).filter(|&i| side[i]).map(|i| active[i]).collect();
        if members.len() != l || members.iter().any(|m| fresh.contains(m)) {
            continue;
        }
        if let Some(lu) = lambda_of(y, &members, delta) {
            if lu >= lambda - delta.powi(3) - 1e-12 {
                fresh.extend(members.iter().copied());
                sets.push(OddSetRecord {
                    y_sum: y.inside_sum(&members),
                    bound: perturbed_bound(l, delta)?,
                    lambda: lu,
                    z: 0.0,
                    members,
                });
                harvested = true;
            }
        }
    }
    excluded.extend(fresh);
    Ok(harvested)
}

/// Effective weight w_ij - gamma * q_ij.
pub fn effective_weight(e: &Edge, gamma: f64, fam: &LaminarFamily) -> f64 {
    e.w - gamma * fam.pair_weight(e.u, e.v)
}

// ---------------------------------------------------------------------
// Inner degree-LP solver (bipartite double cover)
// ---------------------------------------------------------------------

/// Exact optimum of max sum w y subject to per-node degree sums <= 1,
/// y >= 0 (negative weights dropped). The optimum is half-integral: half
/// the integral optimum on the bipartite double cover.
pub fn inner_degree_lp(n: usize, weights: &[(EdgeKey, f64)]) -> FractionalMatching {
    let kept: Vec<(EdgeKey, f64)> = weights
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .cloned()
        .collect();
    if kept.is_empty() {
        return FractionalMatching::new();
    }
    let mut arcs: Vec<(usize, usize, f64, EdgeKey)> = Vec::new();
    for &((u, v), w) in &kept {
        arcs.push((u, v, w, (u, v)));
        arcs.push((v, u, w, (u, v)));
    }
    let picked = max_weight_bipartite(n, n, &arcs);
    let mut y = FractionalMatching::new();
    for idx in picked {
        let (_, _, _, k) = arcs[idx];
        let cur = y.get(k.0, k.1);
        y.set(k.0, k.1, cur + 0.5);
    }
    y
}

/// Exact maximum-weight bipartite matching by successive shortest
/// augmenting paths on the min-cost-flow formulation (Bellman-Ford; fine
/// at desk scale). Arcs are (left, right, weight, tag); returns indices of
/// matched arcs.
fn max_weight_bipartite(nl: usize, nr: usize, arcs: &[(usize, usize, f64, EdgeKey)]) -> Vec<usize> {
    let s = 0usize;
    let t = 1 + nl + nr;
    let nn = t + 1;
    struct Arc {
        to: usize,
        cap: f64,
        cost: f64,
        tag: Option<usize>,
    }
    let mut gadj: Vec<Vec<usize>> = vec![Vec::new(); nn];
    let mut garc: Vec<Arc> = Vec::new();
    let add = |gadj: &mut Vec<Vec<usize>>,
               garc: &mut Vec<Arc>,
               a: usize,
               b: usize,
               cap: f64,
               cost: f64,
               tag: Option<usize>| {
        gadj[a].push(garc.len());
        garc.push(Arc { to: b, cap, cost, tag });
        gadj[b].push(garc.len());
        garc.push(Arc {
            to: a,
            cap: 0.0,
            cost: -cost,
            tag: None,
        });
    };
    for l in 0..nl {
        add(&mut gadj, &mut garc, s, 1 + l, 1.0, 0.0, None);
    }
    for r in 0..nr {
        add(&mut gadj, &mut garc, 1 + nl + r, t, 1.0, 0.0, None);
    }
    for (i, &(l, r, w, _)) in arcs.iter().enumerate() {
        add(&mut gadj, &mut garc, 1 + l, 1 + nl + r, 1.0, -w, Some(i));
    }
    loop {
        let mut dist = vec![f64::INFINITY; nn];
        let mut prev: Vec<Option<usize>> = vec![None; nn];
        dist[s] = 0.0;
        for _ in 0..nn {
            let mut changed = false;
            for u in 0..nn {
                if dist[u].is_infinite() {
                    continue;
                }
                for &ai in &gadj[u] {
                    let arc = &garc[ai];
                    if arc.cap > 0.5 && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                        dist[arc.to] = dist[u] + arc.cost;
                        prev[arc.to] = Some(ai);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[t] >= -1e-12 {
            break;
        }
        let mut v = t;
        while v != s {
            let ai = prev[v].unwrap();
            garc[ai].cap -= 1.0;
            garc[ai ^ 1].cap += 1.0;
            v = garc[ai ^ 1].to;
        }
    }
    let mut out = Vec::new();
    for (ai, arc) in garc.iter().enumerate() {
        if ai % 2 == 0 && arc.cap < 0.5 {
            if let Some(tag) = arc.tag {
                out.push(tag);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------
// Lagrangian oracle (gamma grid over effective weights)
// ---------------------------------------------------------------------

pub struct OracleAnswer {
    pub y: FractionalMatching,
    /// Objective sum w y of the returned point.
    pub objective: f64,
    /// False when even the best mix fails to reach (1 - 9 delta) alpha,
    /// signaling that alpha overshoots the optimum.
    pub ok: bool,
}

/// Solve the degree LP at gamma_k = delta alpha k / beta for
/// k = 0..ceil(9/delta)+18 on effective weights w - gamma q; return the
/// gamma = 0 solution when it already satisfies sum y q <= beta, otherwise
/// the convex mix of the first straddling pair (which meets the budget
/// with equality).
pub fn lagrangian_oracle(
    n: usize,
    edges: &[Edge],
    fam: &LaminarFamily,
    alpha: f64,
    beta: f64,
    delta: f64,
) -> Result<OracleAnswer> {
    let weights: HashMap<EdgeKey, f64> = edges.iter().map(|e| (key(e.u, e.v), e.w)).collect();
    let q: HashMap<EdgeKey, f64> = edges
        .iter()
        .map(|e| (key(e.u, e.v), fam.pair_weight(e.u, e.v)))
        .collect();
    let beta = if beta <= 0.0 { 1e-12 } else { beta };
    let k_max = (9.0 / delta).ceil() as usize + 18;
    let solve_at = |gamma: f64| -> (FractionalMatching, f64, f64) {
        let eff: Vec<(EdgeKey, f64)> = edges
            .iter()
            .map(|e| {
                let k = key(e.u, e.v);
                (k, e.w - gamma * q[&k])
            })
            .collect();
        let y = inner_degree_lp(n, &eff);
        let obj = y.value(&weights);
        let yq: f64 = y.y.iter().map(|(k, &v)| v * q[k]).sum();
        (y, obj, yq)
    };
    let (y0, obj0, yq0) = solve_at(0.0);
    if yq0 <= beta + 1e-12 {
        let ok = obj0 >= (1.0 - 9.0 * delta) * alpha - 1e-9;
        return Ok(OracleAnswer {
            y: y0,
            objective: obj0,
            ok,
        });
    }
    let mut prev = (y0, obj0, yq0);
    for k in 1..=k_max {
        let gamma = delta * alpha * k as f64 / beta;
        let cur = solve_at(gamma);
        if prev.2 > beta && cur.2 <= beta + 1e-12 {
            let denom = prev.2 - cur.2;
            let a = if denom.abs() < 1e-15 {
                0.0
            } else {
                ((beta - cur.2) / denom).clamp(0.0, 1.0)
            };
            // a * y_gamma + (1 - a) * y_gamma'
            let mix = cur.0.blend(&prev.0, a);
            let obj = mix.value(&weights);
            let ok = obj >= (1.0 - 9.0 * delta) * alpha - 1e-9;
            return Ok(OracleAnswer {
                y: mix,
                objective: obj,
                ok,
            });
        }
        prev = cur;
    }
    Err(Error::OracleContract(
        "no straddling gamma pair found although gamma = 0 violates the budget".into(),
    ))
}

// ---------------------------------------------------------------------
// Packing instance and the full pipeline
// ---------------------------------------------------------------------

struct MatchPacking<'a> {
    n: usize,
    edges: &'a [Edge],
    weights: HashMap<EdgeKey, f64>,
    alpha: f64,
    delta: f64,
    family: LaminarFamily,
    monitor: bool,
    overshoot: bool,
}

impl MatchPacking<'_> {
    fn set_ratio(&self, members: &[usize], x: &FractionalMatching) -> f64 {
        let b = perturbed_bound(members.len(), self.delta).unwrap_or(1.0);
        x.inside_sum(members) / b
    }
}

impl PackingProblem for MatchPacking<'_> {
    type Point = FractionalMatching;
    type CId = usize;

    fn active_constraints(&mut self, x: &FractionalMatching) -> Result<Vec<ConstraintView<usize>>> {
        let lambda = compute_lambda(x, self.n, self.delta)?;
        self.family = compute_l(x, self.n, lambda, self.delta, true)?;
        Ok(self
            .family
            .sets
            .iter()
            .enumerate()
            .map(|(i, s)| ConstraintView {
                id: i,
                ratio: s.lambda,
                b: s.bound,
            })
            .collect())
    }

    fn eval_ratio(&self, id: &usize, x: &FractionalMatching) -> f64 {
        self.set_ratio(&self.family.sets[*id].members, x)
    }

    fn oracle(
        &mut self,
        x: &FractionalMatching,
        weighted: &[(ConstraintView<usize>, f64)],
    ) -> Result<FractionalMatching> {
        let mut fam = self.family.clone();
        for s in fam.sets.iter_mut() {
            s.z = 0.0;
        }
        let mut z_dot_b = 0.0;
        let mut lambda = 0.0f64;
        for (view, w) in weighted {
            fam.sets[view.id].z = *w / view.b;
            z_dot_b += *w;
            lambda = lambda.max(view.ratio);
        }
        let sy_q: f64 = x
            .y
            .iter()
            .map(|(&(u, v), &val)| val * fam.pair_weight(u, v))
            .sum();
        let beta = (1.0 - self.delta) * sy_q - self.delta * lambda * z_dot_b;
        let ans = lagrangian_oracle(self.n, self.edges, &fam, self.alpha, beta, self.delta)?;
        if !ans.ok {
            self.overshoot = true;
        }
        self.family = fam;
        Ok(ans.y)
    }

    fn in_polytope(&self, x: &FractionalMatching) -> bool {
        let deg = x.degrees(self.n);
        if deg.iter().any(|&d| d > 1.0 + 1e-7) {
            return false;
        }
        // the alpha side is tolerant: an overshooting rung is flagged and
        // aborted rather than treated as an oracle bug
        self.overshoot
            || x.value(&self.weights) >= (1.0 - 10.0 * self.delta) * self.alpha - 1e-7
    }

    fn blend(
        &self,
        x: &FractionalMatching,
        xt: &FractionalMatching,
        sigma: f64,
    ) -> FractionalMatching {
        x.blend(xt, sigma)
    }

    fn monitor_ratios(&mut self, x: &FractionalMatching) -> Option<Vec<f64>> {
        if !self.monitor {
            return None;
        }
        let mut out = Vec::new();
        let sizes = size_range(self.n, self.delta);
        let nodes: Vec<usize> = (0..self.n).collect();
        let mut members = Vec::new();
        enumerate_odd_sets(&nodes, &sizes, &mut members, 0, &mut |set| {
            let b = perturbed_bound(set.len(), self.delta).unwrap_or(1.0);
            out.push(x.inside_sum(set) / b);
        });
        Some(out)
    }
}

/// Enumerate all subsets whose size is in `sizes`.
pub fn enumerate_odd_sets(
    nodes: &[usize],
    sizes: &[usize],
    current: &mut Vec<usize>,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if sizes.contains(&current.len()) {
        f(current);
    }
    let max_size = sizes.iter().copied().max().unwrap_or(0);
    if current.len() >= max_size {
        return;
    }
    for i in start..nodes.len() {
        current.push(nodes[i]);
        enumerate_odd_sets(nodes, sizes, current, i + 1, f);
        current.pop();
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MatchReport {
    pub value: f64,
    pub fractional_value: f64,
    pub alpha: f64,
    pub matching: Vec<(usize, usize)>,
    pub passes: u64,
    pub peak_words: i64,
    pub iterations: usize,
    pub converged: bool,
}

pub struct MatchOutcome {
    pub report: MatchReport,
    pub y: FractionalMatching,
    pub ledger: ResourceLedger,
    pub family: LaminarFamily,
    pub pack_transcript: Vec<crate::frameworks::PackIter>,
}

/// Damp the half-integral odd cycles of a degree-LP point down to the
/// matching polytope: uniform weight (l-1)/(2l) on an odd l-cycle is a
/// convex combination of its maximum matchings.
fn damp_odd_cycles(y: &FractionalMatching, n: usize) -> FractionalMatching {
    let mut half_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut half_edges: Vec<EdgeKey> = Vec::new();
    for (&(u, v), &val) in &y.y {
        if (val - 0.5).abs() < 1e-9 {
            half_adj[u].push(half_edges.len());
            half_adj[v].push(half_edges.len());
            half_edges.push((u, v));
        }
    }
    let mut damp = y.clone();
    let mut seen_edge = vec![false; half_edges.len()];
    for start in 0..half_edges.len() {
        if seen_edge[start] {
            continue;
        }
        let mut comp_edges = vec![start];
        seen_edge[start] = true;
        let mut queue = vec![start];
        let mut comp_nodes: HashSet<usize> = HashSet::new();
        while let Some(ei) = queue.pop() {
            let (u, v) = half_edges[ei];
            for node in [u, v] {
                comp_nodes.insert(node);
                for &other in &half_adj[node] {
                    if !seen_edge[other] {
                        seen_edge[other] = true;
                        comp_edges.push(other);
                        queue.push(other);
                    }
                }
            }
        }
        let is_cycle = comp_edges.len() == comp_nodes.len() && comp_nodes.len() % 2 == 1;
        if is_cycle {
            let l = comp_nodes.len() as f64;
            let factor = (l - 1.0) / l;
            for &ei in &comp_edges {
                let (u, v) = half_edges[ei];
                let cur = damp.get(u, v);
                damp.set(u, v, cur * factor);
            }
        }
    }
    damp
}

/// Exact maximum-weight matching on the stored support (subset DP up to 20
/// touched nodes, greedy beyond).
pub fn extract_matching(edges: &[Edge]) -> (f64, Vec<(usize, usize)>) {
    let used: Vec<usize> = {
        let mut s: HashSet<usize> = HashSet::new();
        for e in edges {
            s.insert(e.u);
            s.insert(e.v);
        }
        let mut v: Vec<usize> = s.into_iter().collect();
        v.sort_unstable();
        v
    };
    if used.len() <= 20 {
        let mut remap = HashMap::new();
        for (i, &v) in used.iter().enumerate() {
            remap.insert(v, i);
        }
        let nn = used.len();
        let mut adj = vec![Vec::new(); nn];
        for e in edges {
            if e.w > 0.0 {
                adj[remap[&e.u]].push((remap[&e.v], e.w));
                adj[remap[&e.v]].push((remap[&e.u], e.w));
            }
        }
        let full = if nn == 0 { 0usize } else { (1usize << nn) - 1 };
        let mut dp = vec![0.0f64; full + 1];
        let mut choice: Vec<Option<(usize, usize)>> = vec![None; full + 1];
        for mask in 1..=full {
            let v = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << v);
            dp[mask] = dp[rest];
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
        let mut mask = full;
        let mut matching = Vec::new();
        while mask != 0 {
            let v = mask.trailing_zeros() as usize;
            match choice[mask] {
                Some((a, b)) => {
                    let (x, y) = (used[a], used[b]);
                    matching.push((x.min(y), x.max(y)));
                    mask &= !(1 << a);
                    mask &= !(1 << b);
                }
                None => mask &= !(1 << v),
            }
        }
        (dp[full], matching)
    } else {
        let mut sorted: Vec<&Edge> = edges.iter().collect();
        sorted.sort_by(|a, b| b.w.partial_cmp(&a.w).unwrap());
        let mut taken: Vec<(usize, usize, f64)> = Vec::new();
        let mut usedn: HashSet<usize> = HashSet::new();
        for e in sorted {
            if !usedn.contains(&e.u) && !usedn.contains(&e.v) {
                usedn.insert(e.u);
                usedn.insert(e.v);
                taken.push((e.u, e.v, e.w));
            }
        }
        let value = taken.iter().map(|t| t.2).sum();
        (
            value,
            taken.iter().map(|t| (t.0.min(t.1), t.0.max(t.1))).collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub eps: f64,
    /// Framework iteration cap per guess rung.
    pub iter_cap: usize,
    /// Phases of (1 - delta) improvement allowed per rung.
    pub phase_cap: usize,
}

impl MatchConfig {
    pub fn new(eps: f64) -> Self {
        MatchConfig {
            eps,
            iter_cap: crate::config::PACK_ITER_CAP,
            phase_cap: 24,
        }
    }
}

/// STREAMMATCH: guess ladder over the packing formulation. Returns the
/// best converged rung's rescaled fractional solution plus an integral
/// matching extracted from the stored support.
pub fn stream_match(stream: &EdgeStream, cfg: &MatchConfig) -> Result<MatchOutcome> {
    let eps = cfg.eps;
    if !(0.0..=0.5).contains(&eps) || eps == 0.0 {
        return Err(Error::Argument(format!("eps must be in (0, 0.5], got {eps}")));
    }
    let delta = eps / crate::config::CONSTRUCT_DELTA_DIV;
    let n = stream.n();
    let mut ledger = ResourceLedger::new();

    // pass 1: constant-factor approximation
    let (greedy, greedy_value) = greedy_constant_approx(stream);
    ledger.charge(3 * greedy.len() as i64)?;
    if greedy_value <= 0.0 {
        ledger.set_passes(stream.pass_count());
        return Ok(MatchOutcome {
            report: MatchReport {
                value: 0.0,
                fractional_value: 0.0,
                alpha: 0.0,
                matching: Vec::new(),
                passes: ledger.passes,
                peak_words: ledger.peak_words,
                iterations: 0,
                converged: true,
            },
            y: FractionalMatching::new(),
            ledger,
            family: LaminarFamily::default(),
            pack_transcript: Vec::new(),
        });
    }

    // pass 2: cache the edge list (desk-scale support store, charged)
    let edges: Vec<Edge> = stream.next_pass().collect();
    ledger.charge(3 * edges.len() as i64)?;
    let weights: HashMap<EdgeKey, f64> = edges.iter().map(|e| (key(e.u, e.v), e.w)).collect();

    // seed points: the degree-LP optimum and its cycle-damped projection
    let all_weights: Vec<(EdgeKey, f64)> = weights.iter().map(|(&k, &w)| (k, w)).collect();
    let y_deg = inner_degree_lp(n, &all_weights);
    let v_deg = y_deg.value(&weights);
    let y_damp = damp_odd_cycles(&y_deg, n);
    let v_damp = y_damp.value(&weights);
    let mut y_greedy = FractionalMatching::new();
    for e in &greedy {
        y_greedy.set(e.u, e.v, 1.0);
    }

    let succ_threshold = 1.0 + 2.0 * delta;
    let mut rungs: Vec<f64> = Vec::new();
    {
        let mut a = 6.0 * greedy_value;
        while a > greedy_value * (1.0 - delta) {
            rungs.push(a);
            a *= 1.0 - delta;
        }
        rungs.reverse();
    }

    let mut best: Option<(f64, FractionalMatching, f64)> = None;
    let mut iterations = 0usize;
    let mut transcript = Vec::new();
    let monitor = n <= crate::config::MONITOR_N_LIMIT;

    for &alpha in &rungs {
        if let Some((ba, _, _)) = &best {
            if alpha <= *ba {
                continue;
            }
        }
        let x0 = if alpha <= v_damp {
            let mut x = y_damp.clone();
            x.scale(alpha / v_damp);
            x
        } else if alpha <= greedy_value {
            let mut x = y_greedy.clone();
            x.scale(alpha / greedy_value);
            x
        } else if alpha <= v_deg {
            let mut x = y_deg.clone();
            x.scale(alpha / v_deg);
            x
        } else {
            break; // above the degree-LP optimum: infeasible
        };
        let mut x = x0;
        let mut lambda = compute_lambda(&x, n, delta)?;
        let mut succeeded = lambda <= succ_threshold + 1e-9;
        if !succeeded {
            let m_hint = odd_set_count(n, delta);
            let rho = width_bound(n, delta);
            let mut phases = 0usize;
            while phases < cfg.phase_cap {
                phases += 1;
                let params = PackParams::with_kappa_scale(
                    delta,
                    rho,
                    lambda,
                    m_hint,
                    1.0 / (delta * delta),
                )?;
                let mut problem = MatchPacking {
                    n,
                    edges: &edges,
                    weights: weights.clone(),
                    alpha,
                    delta,
                    family: LaminarFamily::default(),
                    monitor,
                    overshoot: false,
                };
                let out = pack_solve(&mut problem, x.clone(), &params, cfg.iter_cap)?;
                iterations += out.transcript.len();
                transcript.extend(out.transcript.iter().cloned());
                x = out.x;
                lambda = compute_lambda(&x, n, delta)?;
                if lambda <= succ_threshold + 1e-9 {
                    succeeded = true;
                    break;
                }
                if problem.overshoot || out.status != PackStatus::Improved {
                    break;
                }
            }
        }
        let obj = x.value(&weights);
        if succeeded && obj >= (1.0 - 10.0 * delta) * alpha - 1e-9 {
            best = Some((obj.min(alpha), x, lambda));
        } else {
            break; // first failing rung ends the ascent
        }
    }

    let (alpha, y_raw, lambda_final) = match best {
        Some(b) => b,
        None => (greedy_value, y_greedy.clone(), 1.0),
    };
    ledger.charge(y_raw.y.len() as i64)?;
    let family = compute_l(&y_raw, n, lambda_final.max(1.0 + 2.0 * delta), delta, true)
        .unwrap_or_default();

    // Rescale to full feasibility: divide by the success threshold so the
    // bounded odd sets satisfy the perturbed constraints, then shrink by
    // (1 - delta) to restore the unperturbed constraints for every odd
    // set, including sizes beyond 1/delta.
    let mut y_final = y_raw.clone();
    y_final.scale((1.0 - delta) / succ_threshold);
    let fractional_value = y_final.value(&weights);

    audit_lp1(&y_final, n)?;

    let (value, matching) = extract_matching(&edges);
    ledger.set_passes(stream.pass_count());
    let report = MatchReport {
        value,
        fractional_value,
        alpha,
        matching,
        passes: ledger.passes,
        peak_words: ledger.peak_words,
        iterations,
        converged: true,
    };
    Ok(MatchOutcome {
        report,
        y: y_final,
        ledger,
        family,
        pack_transcript: transcript,
    })
}

/// Number of odd sets of size 3..=min(1/delta, n), capped (only its
/// logarithm feeds kappa).
fn odd_set_count(n: usize, delta: f64) -> usize {
    let mut total: f64 = 0.0;
    for &l in &size_range(n, delta) {
        let mut c = 1.0f64;
        for i in 0..l {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        total += c;
    }
    total.min(1e15) as usize
}

/// Width of the perturbed packing formulation: Y_U <= |U|/2 under the
/// vertex constraints, so the ratio is at most (l/2)/b(l).
fn width_bound(n: usize, delta: f64) -> f64 {
    size_range(n, delta)
        .iter()
        .map(|&l| (l as f64 / 2.0) / perturbed_bound(l, delta).unwrap_or(1.0))
        .fold(1.0f64, f64::max)
}

/// Vertex constraints plus every odd-set constraint (all odd sizes when
/// the instance is small enough to enumerate).
fn audit_lp1(y: &FractionalMatching, n: usize) -> Result<()> {
    let tol = crate::config::FEAS_TOL;
    let deg = y.degrees(n);
    for (i, &d) in deg.iter().enumerate() {
        if d > 1.0 + tol {
            return Err(Error::Internal(format!(
                "vertex constraint violated at {i}: {d}"
            )));
        }
    }
    if n <= crate::config::MONITOR_N_LIMIT {
        let sizes: Vec<usize> = (3..=n).filter(|l| l % 2 == 1).collect();
        let nodes: Vec<usize> = (0..n).collect();
        let mut current = Vec::new();
        let mut bad: Option<String> = None;
        enumerate_odd_sets(&nodes, &sizes, &mut current, 0, &mut |set| {
            let cap = ((set.len() - 1) / 2) as f64;
            let s = y.inside_sum(set);
            if s > cap + tol && bad.is_none() {
                bad = Some(format!("odd set {set:?} holds {s} > {cap}"));
            }
        });
        if let Some(msg) = bad {
            return Err(Error::Internal(msg));
        }
    }
    Ok(())
}
