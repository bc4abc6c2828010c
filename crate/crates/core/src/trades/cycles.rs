//! Cyclical trades: cycles of the trade graph, reported alongside bounds.

use crate::trades::search::TradeGraph;

/// Node budget for the spanning-cycle search in one component.
const SPANNING_BUDGET: u64 = 200_000;

/// One cycle per component where one is found: the component itself when it is
/// 2-regular, otherwise a spanning cycle found by bounded backtracking.
pub fn find_cycles(g: &TradeGraph) -> Vec<Vec<u32>> {
    let adj = g.adjacency();
    g.components()
        .into_iter()
        .filter(|c| c.len() >= 3)
        .filter_map(|c| spanning_cycle(&adj, &c, SPANNING_BUDGET))
        .collect()
}

/// A cycle through every vertex of `comp`, starting at its smallest vertex.
pub fn spanning_cycle(adj: &[Vec<u32>], comp: &[u32], budget: u64) -> Option<Vec<u32>> {
    let n = comp.len();
    if n < 3 || comp.iter().any(|&x| adj[x as usize].len() < 2) {
        return None;
    }
    let local = |x: u32| comp.binary_search(&x).ok();
    let ladj: Vec<Vec<u32>> = comp
        .iter()
        .map(|&x| {
            adj[x as usize]
                .iter()
                .filter_map(|&y| local(y).map(|i| i as u32))
                .collect()
        })
        .collect();
    let mut path = vec![0u32];
    let mut on = vec![false; n];
    on[0] = true;
    let mut nodes = 0u64;
    if extend(&ladj, &mut path, &mut on, &mut nodes, budget) {
        Some(path.into_iter().map(|i| comp[i as usize]).collect())
    } else {
        None
    }
}

fn extend(adj: &[Vec<u32>], path: &mut Vec<u32>, on: &mut [bool], nodes: &mut u64, budget: u64) -> bool {
    *nodes += 1;
    if *nodes > budget {
        return false;
    }
    let n = adj.len();
    let last = *path.last().unwrap() as usize;
    if path.len() == n {
        return adj[last].contains(&0);
    }
    // Fewest onward options first.
    let mut next: Vec<(usize, u32)> = adj[last]
        .iter()
        .filter(|&&w| !on[w as usize])
        .map(|&w| (adj[w as usize].iter().filter(|&&x| !on[x as usize]).count(), w))
        .collect();
    next.sort_unstable();
    for (_, w) in next {
        on[w as usize] = true;
        path.push(w);
        if !dead_end(adj, on, path) && extend(adj, path, on, nodes, budget) {
            return true;
        }
        path.pop();
        on[w as usize] = false;
        if *nodes > budget {
            return false;
        }
    }
    false
}

/// An unvisited vertex with fewer than two usable neighbours cannot be threaded.
fn dead_end(adj: &[Vec<u32>], on: &[bool], path: &[u32]) -> bool {
    let last = *path.last().unwrap();
    adj.iter()
        .enumerate()
        .any(|(v, a)| !on[v] && a.iter().filter(|&&w| !on[w as usize] || w == last || w == 0).count() < 2)
}
