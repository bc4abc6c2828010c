//! Volume-two trade search and the trade graph.

use crate::design::{LabeledDesign, OrderedBlock};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::verify::PairIndex;

/// Replacement blocks for a pair of design blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeTwoTrade {
    pub t1: (u32, u32),
    pub t2: (OrderedBlock, OrderedBlock),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeEdge {
    pub i: u32,
    pub j: u32,
    pub witness: (OrderedBlock, OrderedBlock),
}

/// Vertices are block indices; an edge joins two blocks forming a volume-two trade.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TradeGraph {
    pub vertices: usize,
    /// Sorted by `(i, j)` with `i < j`.
    pub edges: Vec<TradeEdge>,
}

impl TradeGraph {
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for e in &self.edges {
            adj[e.i as usize].push(e.j);
            adj[e.j as usize].push(e.i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search_by(|e| (e.i, e.j).cmp(&(a, b))).is_ok()
    }

    /// Connected components with at least one edge, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices];
        let mut out = Vec::new();
        for s in 0..self.vertices {
            if seen[s] || adj[s].is_empty() {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s as u32];
            let mut stack = vec![s as u32];
            while let Some(x) = stack.pop() {
                for &y in &adj[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        comp.push(y);
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Ordered pairs of two blocks as a multiset over a compact local index.
struct Local {
    pts: Vec<u32>,
    /// `count[a * n + b]` = multiplicity of local pair (a, b).
    count: Vec<u8>,
}

impl Local {
    fn new(b1: &OrderedBlock, b2: &OrderedBlock) -> Self {
        let mut pts: Vec<u32> = b1.points().iter().chain(b2.points()).copied().collect();
        pts.sort_unstable();
        pts.dedup();
        let n = pts.len();
        let mut count = vec![0u8; n * n];
        for b in [b1, b2] {
            for (x, y) in b.ordered_pairs() {
                count[self_idx(&pts, x) * n + self_idx(&pts, y)] += 1;
            }
        }
        Local { pts, count }
    }

    fn n(&self) -> usize {
        self.pts.len()
    }
}

fn self_idx(pts: &[u32], p: u32) -> usize {
    pts.binary_search(&p).expect("point of the local support")
}

/// Searches for a volume-two trade replacing `b1, b2`.
///
/// Shared points must occur in both replacement blocks; the remaining points are split
/// in lexicographic order and the first block is enumerated in lexicographic order of
/// its point sequence, so the witness is deterministic.
pub fn find_trade(b1: &OrderedBlock, b2: &OrderedBlock) -> Result<Option<(OrderedBlock, OrderedBlock)>> {
    if b1 == b2 {
        return Err(Error::Precondition("find_trade needs two distinct blocks".into()));
    }
    let k = b1.len();
    if b2.len() != k {
        return Ok(None);
    }
    let shared: Vec<u32> = b1.sorted().into_iter().filter(|&p| b2.contains(p)).collect();
    if shared.len() < 2 {
        return Ok(None);
    }
    let local = Local::new(b1, b2);
    let n = local.n();
    let shared_l: Vec<usize> = shared.iter().map(|&p| self_idx(&local.pts, p)).collect();
    let excl: Vec<usize> = (0..n).filter(|i| !shared_l.contains(i)).collect();
    let take = k - shared.len();

    let mut result = None;
    for_each_combination(excl.len(), take, &mut |pick| {
        let mut set: Vec<usize> = shared_l.clone();
        set.extend(pick.iter().map(|&i| excl[i]));
        set.sort_unstable();
        let other: Vec<usize> = {
            let mut o = shared_l.clone();
            o.extend((0..excl.len()).filter(|i| !pick.contains(i)).map(|i| excl[i]));
            o.sort_unstable();
            o
        };
        let mut found = None;
        permutations_with_pairs(&set, &local.count, n, &mut |c1| {
            let mut rest = local.count.clone();
            for a in 0..c1.len() {
                for b in a + 1..c1.len() {
                    rest[c1[a] * n + c1[b]] -= 1;
                }
            }
            let Some(c2) = tournament_order(&other, &rest, n) else {
                return false;
            };
            let t1 = to_block(&local.pts, c1);
            if &t1 == b1 || &t1 == b2 {
                return false;
            }
            found = Some((t1, to_block(&local.pts, &c2)));
            true
        });
        if found.is_some() {
            result = found;
            return true;
        }
        false
    });
    Ok(result)
}

fn to_block(pts: &[u32], seq: &[usize]) -> OrderedBlock {
    OrderedBlock::new(seq.iter().map(|&i| pts[i]).collect()).expect("distinct local points")
}

/// Calls `f` on each `r`-subset of `0..n` in lexicographic order until it returns true.
fn for_each_combination(n: usize, r: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == r {
            return f(cur);
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            if rec(i + 1, n, r, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    if r > n {
        return false;
    }
    rec(0, n, r, &mut Vec::with_capacity(r), f)
}

/// Lexicographic permutations of `set` whose ordered pairs all occur in `count`.
fn permutations_with_pairs(set: &[usize], count: &[u8], n: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        set: &[usize],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        count: &[u8],
        n: usize,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == set.len() {
            return f(cur);
        }
        for (si, &p) in set.iter().enumerate() {
            if used[si] || cur.iter().any(|&q| count[q * n + p] == 0) {
                continue;
            }
            used[si] = true;
            cur.push(p);
            if rec(set, used, cur, count, n, f) {
                return true;
            }
            cur.pop();
            used[si] = false;
        }
        false
    }
    rec(
        set,
        &mut vec![false; set.len()],
        &mut Vec::with_capacity(set.len()),
        count,
        n,
        f,
    )
}

/// If the remaining pairs are exactly the pairs of some ordering of `set`, returns it.
fn tournament_order(set: &[usize], rest: &[u8], n: usize) -> Option<Vec<usize>> {
    let total: usize = rest.iter().map(|&c| c as usize).sum();
    let k = set.len();
    if total != k * (k - 1) / 2 {
        return None;
    }
    let mut order: Vec<(usize, usize)> = set
        .iter()
        .map(|&p| (set.iter().filter(|&&q| rest[p * n + q] > 0).count(), p))
        .collect();
    order.sort_unstable_by(|a, b| b.cmp(a));
    let seq: Vec<usize> = order.into_iter().map(|(_, p)| p).collect();
    for a in 0..k {
        for b in a + 1..k {
            if rest[seq[a] * n + seq[b]] != 1 {
                return None;
            }
        }
    }
    Some(seq)
}

/// Checks a claimed trade independently of the search: both replacements are valid
/// blocks, neither is one of the originals, and the ordered-pair multisets agree.
pub fn check_witness(b1: &OrderedBlock, b2: &OrderedBlock, w: &(OrderedBlock, OrderedBlock)) -> bool {
    let originals = [b1, b2];
    if originals.contains(&&w.0) || originals.contains(&&w.1) {
        return false;
    }
    let mut lhs: Vec<(u32, u32)> = b1.ordered_pairs().chain(b2.ordered_pairs()).collect();
    let mut rhs: Vec<(u32, u32)> = w.0.ordered_pairs().chain(w.1.ordered_pairs()).collect();
    lhs.sort_unstable();
    rhs.sort_unstable();
    lhs == rhs
}

pub fn trade_graph(d: &LabeledDesign) -> TradeGraph {
    trade_graph_with(d, Exec::default())
}

pub fn trade_graph_with(d: &LabeledDesign, exec: Exec) -> TradeGraph {
    let index = PairIndex::new(d);
    let edges = exec.flat_map_range(d.num_blocks(), |i| {
        index
            .partners(d, i)
            .into_iter()
            .filter_map(|(j, _)| {
                let (bi, bj) = (&d.blocks[i], &d.blocks[j as usize]);
                if bi == bj {
                    return None;
                }
                find_trade(bi, bj).ok().flatten().map(|witness| TradeEdge {
                    i: i as u32,
                    j,
                    witness,
                })
            })
            .collect()
    });
    TradeGraph {
        vertices: d.num_blocks(),
        edges,
    }
}

/// The volume-two trades of a design as `VolumeTwoTrade` values.
pub fn trades_of(g: &TradeGraph) -> Vec<VolumeTwoTrade> {
    g.edges
        .iter()
        .map(|e| VolumeTwoTrade {
            t1: (e.i, e.j),
            t2: e.witness.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(p: &[u32]) -> OrderedBlock {
        OrderedBlock::new(p.to_vec()).unwrap()
    }

    #[test]
    fn example_trade() {
        let w = find_trade(&b(&[0, 1, 4, 14, 16]), &b(&[1, 0, 18, 8, 6]))
            .unwrap()
            .unwrap();
        assert_eq!(w, (b(&[1, 0, 4, 14, 16]), b(&[0, 1, 18, 8, 6])));
        assert!(check_witness(&b(&[0, 1, 4, 14, 16]), &b(&[1, 0, 18, 8, 6]), &w));
    }

    #[test]
    fn disjoint_and_equal_blocks() {
        assert_eq!(find_trade(&b(&[0, 1, 2, 3, 4]), &b(&[5, 6, 7, 8, 9])).unwrap(), None);
        assert!(find_trade(&b(&[0, 1, 2, 3, 4]), &b(&[0, 1, 2, 3, 4])).is_err());
    }

    #[test]
    fn block_and_reverse_trade() {
        let x = b(&[0, 1, 2, 3, 4]);
        let w = find_trade(&x, &x.reversed()).unwrap().unwrap();
        assert_eq!(w, (b(&[0, 1, 2, 4, 3]), b(&[3, 4, 2, 1, 0])));
    }
}
