//! Lower bounds on vertex covers of trade graphs.
//!
//! A defining set meets every trade, so it contains a vertex cover of the trade graph.
//! Two modes:
//!
//! * `Matching`: per component, `⌈len/2⌉` for a component that is a single cycle and a
//!   maximum matching otherwise.
//! * `ExactVc`: per component, a closed form when the maximum degree is at most two and
//!   branch-and-bound otherwise. When the component exceeds the size cap or the node
//!   budget runs out, the component falls back to the rounded LP bound
//!   `⌈ν*⌉` (fractional matching number), which dominates the maximum matching.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

/// Budget and size limits for exact vertex cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VcLimits {
    /// Components larger than this skip branch-and-bound.
    pub max_vertices: usize,
    /// Branch-and-bound nodes per component.
    pub max_nodes: u64,
}

impl Default for VcLimits {
    fn default() -> Self {
        VcLimits {
            max_vertices: 2000,
            max_nodes: 20_000,
        }
    }
}

/// Bound for one connected component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComponentBound {
    pub bound: usize,
    /// True when the value is the exact minimum vertex cover of the component.
    pub exact: bool,
}

/// Component-local simple graph, vertices `0..n`.
#[derive(Clone, Debug)]
pub struct Graph {
    pub adj: Vec<Vec<u32>>,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Connected and 2-regular.
    pub fn is_cycle(&self) -> bool {
        self.n() >= 3 && self.adj.iter().all(|a| a.len() == 2) && self.edge_count() == self.n()
    }
}

/// Minimum vertex cover of a connected graph with maximum degree at most two.
pub fn path_or_cycle_cover(g: &Graph) -> usize {
    if g.is_cycle() {
        g.n().div_ceil(2)
    } else {
        g.n() / 2
    }
}

/// Maximum matching size by Edmonds' blossom algorithm.
pub fn maximum_matching(g: &Graph) -> usize {
    let n = g.n();
    let mut mate = vec![u32::MAX; n];
    // Greedy start.
    for v in 0..n {
        if mate[v] == u32::MAX {
            if let Some(&w) = g.adj[v].iter().find(|&&w| mate[w as usize] == u32::MAX) {
                mate[v] = w;
                mate[w as usize] = v as u32;
            }
        }
    }
    let mut b = Blossom::new(n);
    for root in 0..n {
        if mate[root] == u32::MAX {
            if let Some(end) = b.search(g, &mut mate, root) {
                b.augment(&mut mate, end);
            }
        }
    }
    mate.iter().filter(|&&m| m != u32::MAX).count() / 2
}

struct Blossom {
    parent: Vec<u32>,
    base: Vec<u32>,
    used: Vec<bool>,
    blossom: Vec<bool>,
    mark: Vec<bool>,
}

const NONE: u32 = u32::MAX;

impl Blossom {
    fn new(n: usize) -> Self {
        Blossom {
            parent: vec![NONE; n],
            base: (0..n as u32).collect(),
            used: vec![false; n],
            blossom: vec![false; n],
            mark: vec![false; n],
        }
    }

    fn lca(&mut self, mate: &[u32], mut a: u32, mut b: u32) -> u32 {
        self.mark.iter_mut().for_each(|m| *m = false);
        loop {
            a = self.base[a as usize];
            self.mark[a as usize] = true;
            if mate[a as usize] == NONE {
                break;
            }
            a = self.parent[mate[a as usize] as usize];
        }
        loop {
            b = self.base[b as usize];
            if self.mark[b as usize] {
                return b;
            }
            b = self.parent[mate[b as usize] as usize];
        }
    }

    fn mark_path(&mut self, mate: &[u32], mut v: u32, b: u32, mut child: u32) {
        while self.base[v as usize] != b {
            let m = mate[v as usize];
            self.blossom[self.base[v as usize] as usize] = true;
            self.blossom[self.base[m as usize] as usize] = true;
            self.parent[v as usize] = child;
            child = m;
            v = self.parent[m as usize];
        }
    }

    /// BFS for an augmenting path from `root`; returns its free endpoint.
    fn search(&mut self, g: &Graph, mate: &mut [u32], root: usize) -> Option<u32> {
        let n = g.n();
        self.used.iter_mut().for_each(|u| *u = false);
        self.parent.iter_mut().for_each(|p| *p = NONE);
        for i in 0..n {
            self.base[i] = i as u32;
        }
        self.used[root] = true;
        let mut q = VecDeque::from([root as u32]);
        while let Some(v) = q.pop_front() {
            for &to in &g.adj[v as usize] {
                if self.base[v as usize] == self.base[to as usize] || mate[v as usize] == to {
                    continue;
                }
                if to as usize == root || (mate[to as usize] != NONE && self.parent[mate[to as usize] as usize] != NONE)
                {
                    let cur = self.lca(mate, v, to);
                    self.blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.blossom[self.base[i] as usize] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                q.push_back(i as u32);
                            }
                        }
                    }
                } else if self.parent[to as usize] == NONE {
                    self.parent[to as usize] = v;
                    if mate[to as usize] == NONE {
                        return Some(to);
                    }
                    let m = mate[to as usize];
                    self.used[m as usize] = true;
                    q.push_back(m);
                }
            }
        }
        None
    }

    fn augment(&self, mate: &mut [u32], mut v: u32) {
        while v != NONE {
            let pv = self.parent[v as usize];
            let ppv = mate[pv as usize];
            mate[v as usize] = pv;
            mate[pv as usize] = v;
            v = ppv;
        }
    }
}

/// Twice the fractional matching number: a maximum matching of the bipartite double
/// cover, by Hopcroft-Karp.
pub fn double_cover_matching(g: &Graph) -> usize {
    let n = g.n();
    let mut match_l = vec![NONE; n];
    let mut match_r = vec![NONE; n];
    let mut dist = vec![0u32; n];
    let mut size = 0;
    loop {
        // BFS layers from free left vertices.
        let mut q = VecDeque::new();
        for u in 0..n {
            if match_l[u] == NONE {
                dist[u] = 0;
                q.push_back(u as u32);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = q.pop_front() {
            for &r in &g.adj[u as usize] {
                let w = match_r[r as usize];
                if w == NONE {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    q.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n];
        for u in 0..n {
            if match_l[u] == NONE && hk_dfs(g, u as u32, &mut match_l, &mut match_r, &mut dist, &mut it) {
                size += 1;
            }
        }
    }
    size
}

fn hk_dfs(g: &Graph, u: u32, match_l: &mut [u32], match_r: &mut [u32], dist: &mut [u32], it: &mut [usize]) -> bool {
    // Iterative DFS along the layered graph.
    let mut stack: Vec<u32> = vec![u];
    let mut path_r: Vec<u32> = Vec::new();
    while let Some(&x) = stack.last() {
        let xi = x as usize;
        if it[xi] == g.adj[xi].len() {
            dist[xi] = u32::MAX;
            stack.pop();
            path_r.pop();
            continue;
        }
        let r = g.adj[xi][it[xi]];
        it[xi] += 1;
        let w = match_r[r as usize];
        if w == NONE {
            path_r.push(r);
            // Flip along the stack.
            for (l, r) in stack.iter().zip(path_r.iter()) {
                match_l[*l as usize] = *r;
                match_r[*r as usize] = *l;
            }
            return true;
        }
        if dist[w as usize] == dist[xi] + 1 {
            path_r.push(r);
            stack.push(w);
        }
    }
    false
}

/// `⌈ν*⌉`, a lower bound on the vertex cover number.
pub fn lp_bound(g: &Graph) -> usize {
    double_cover_matching(g).div_ceil(2)
}

/// Minimum vertex cover by branch-and-bound, or `None` when the node budget runs out.
pub fn exact_vertex_cover(g: &Graph, max_nodes: u64) -> Option<usize> {
    let mut s = Solver { nodes: 0, max_nodes };
    let r = s.solve(g, usize::MAX);
    (s.nodes <= s.max_nodes).then_some(r)
}

/// Cover from repeatedly taking the neighbour of a degree-one vertex, else a
/// maximum-degree vertex, then dropping redundant vertices.
fn greedy_cover(g: &Graph) -> usize {
    let n = g.n();
    let mut deg: Vec<usize> = g.adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; n];
    let mut cover = vec![false; n];
    let mut leaves: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = (0..n).map(|v| (deg[v], Reverse(v))).collect();
    loop {
        let v = if let Some(l) = leaves.pop() {
            if !alive[l] || deg[l] != 1 {
                continue;
            }
            *g.adj[l].iter().find(|&&w| alive[w as usize]).unwrap() as usize
        } else {
            match heap.pop() {
                Some((d, Reverse(v))) if d > 0 => {
                    if !alive[v] || deg[v] != d {
                        continue;
                    }
                    v
                }
                _ => break,
            }
        };
        cover[v] = true;
        alive[v] = false;
        for &w in &g.adj[v] {
            let w = w as usize;
            if alive[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    leaves.push(w);
                }
                heap.push((deg[w], Reverse(w)));
            }
        }
    }
    for v in 0..n {
        if cover[v] && g.adj[v].iter().all(|&w| cover[w as usize]) {
            cover[v] = false;
        }
    }
    cover.iter().filter(|&&c| c).count()
}

/// Subgraph induced by the vertices with `keep` set, relabelled in order.
fn induced(g: &Graph, keep: &[bool]) -> Graph {
    let mut id = vec![NONE; g.n()];
    let mut next = 0;
    for v in 0..g.n() {
        if keep[v] {
            id[v] = next;
            next += 1;
        }
    }
    Graph {
        adj: (0..g.n())
            .filter(|&v| keep[v])
            .map(|v| {
                g.adj[v]
                    .iter()
                    .filter(|&&w| keep[w as usize])
                    .map(|&w| id[w as usize])
                    .collect()
            })
            .collect(),
    }
}

/// Connected components as induced subgraphs; isolated vertices are dropped.
fn split(g: &Graph) -> Vec<Graph> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] || g.adj[s].is_empty() {
            continue;
        }
        let mut keep = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        keep[s] = true;
        while let Some(x) = stack.pop() {
            for &y in &g.adj[x] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    keep[y as usize] = true;
                    stack.push(y as usize);
                }
            }
        }
        out.push(induced(g, &keep));
    }
    out
}

/// Degree-zero, degree-one, triangle and degree-two folding reductions. Returns the
/// reduced graph and the amount the cover number dropped by.
fn reduce(g: &Graph) -> (Graph, usize) {
    let n = g.n();
    let mut adj = g.adj.clone();
    let mut alive = vec![true; n];
    let mut taken = 0;
    let mut queue: Vec<usize> = (0..n).rev().collect();
    let detach = |u: usize, adj: &mut Vec<Vec<u32>>, queue: &mut Vec<usize>| {
        for w in std::mem::take(&mut adj[u]) {
            adj[w as usize].retain(|&x| x as usize != u);
            queue.push(w as usize);
        }
    };
    while let Some(v) = queue.pop() {
        if !alive[v] {
            continue;
        }
        match adj[v].len() {
            0 => alive[v] = false,
            1 => {
                let u = adj[v][0] as usize;
                alive[u] = false;
                alive[v] = false;
                detach(u, &mut adj, &mut queue);
                taken += 1;
            }
            2 => {
                let (u, w) = (adj[v][0] as usize, adj[v][1] as usize);
                if adj[u].contains(&(w as u32)) {
                    for x in [u, w] {
                        alive[x] = false;
                        detach(x, &mut adj, &mut queue);
                    }
                    alive[v] = false;
                    taken += 2;
                } else {
                    // Fold v, u, w into u: vc(G) = vc(G') + 1.
                    alive[v] = false;
                    detach(v, &mut adj, &mut queue);
                    alive[w] = false;
                    for y in std::mem::take(&mut adj[w]) {
                        let y = y as usize;
                        adj[y].retain(|&x| x as usize != w);
                        if !adj[y].contains(&(u as u32)) {
                            adj[y].push(u as u32);
                            adj[u].push(y as u32);
                        }
                        queue.push(y);
                    }
                    queue.push(u);
                    taken += 1;
                }
            }
            _ => {}
        }
    }
    (induced(&Graph { adj }, &alive), taken)
}

struct Solver {
    nodes: u64,
    max_nodes: u64,
}

impl Solver {
    /// Minimum cover size if below `limit`, otherwise some value `>= limit`.
    fn solve(&mut self, g: &Graph, limit: usize) -> usize {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return limit;
        }
        let (g, forced) = reduce(g);
        if forced >= limit {
            return limit;
        }
        let mut comps = split(&g);
        comps.sort_by_key(Graph::n);
        let lbs: Vec<usize> = comps.iter().map(lp_bound).collect();
        let mut rest: usize = lbs.iter().sum();
        let mut total = forced;
        if total + rest >= limit {
            return limit;
        }
        for (c, lb) in comps.iter().zip(&lbs) {
            rest -= lb;
            total += self.solve_connected(c, *lb, limit - total - rest);
            if total + rest >= limit {
                return limit;
            }
        }
        total
    }

    fn solve_connected(&mut self, g: &Graph, lower: usize, limit: usize) -> usize {
        if g.max_degree() <= 2 {
            return path_or_cycle_cover(g).min(limit);
        }
        if lower >= limit {
            return limit;
        }
        let mut best = greedy_cover(g).min(limit);
        if best == lower {
            return best;
        }
        let v = (0..g.n())
            .max_by_key(|&v| (g.adj[v].len(), std::cmp::Reverse(v)))
            .unwrap();
        let mut keep = vec![true; g.n()];
        keep[v] = false;
        best = best.min(1 + self.solve(&induced(g, &keep), best - 1));
        let d = g.adj[v].len();
        if best > lower && d < best {
            for &w in &g.adj[v] {
                keep[w as usize] = false;
            }
            best = best.min(d + self.solve(&induced(g, &keep), best - d));
        }
        best
    }
}

/// Bound for one component under either mode.
pub fn component_bound(g: &Graph, exact_mode: bool, limits: VcLimits) -> ComponentBound {
    if g.max_degree() <= 2 {
        return ComponentBound {
            bound: path_or_cycle_cover(g),
            exact: true,
        };
    }
    if !exact_mode {
        return ComponentBound {
            bound: maximum_matching(g),
            exact: false,
        };
    }
    if g.n() <= limits.max_vertices {
        if let Some(b) = exact_vertex_cover(g, limits.max_nodes) {
            return ComponentBound { bound: b, exact: true };
        }
    }
    ComponentBound {
        bound: lp_bound(g),
        exact: false,
    }
}
