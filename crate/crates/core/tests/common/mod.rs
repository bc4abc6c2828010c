//! Independent reference computations. Nothing here calls into the library's own
//! pair tables or trade search.

#![allow(dead_code)]

use ssdd::{LabeledDesign, OrderedBlock};

/// Ordered-pair counts by a naive triple loop over blocks and position pairs.
pub fn naive_pair_counts(d: &LabeledDesign) -> Vec<Vec<u32>> {
    let v = d.v();
    let mut counts = vec![vec![0u32; v]; v];
    for b in &d.blocks {
        let p = b.points();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                counts[p[i] as usize][p[j] as usize] += 1;
            }
        }
    }
    counts
}

fn pairs_before(seq: &[u32]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            out.push((seq[i], seq[j]));
        }
    }
    out
}

/// Every arrangement of `k` distinct elements of `pool`.
fn arrangements(pool: &[u32], k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &p) in pool.iter().enumerate() {
        let rest: Vec<u32> = pool
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &q)| q)
            .collect();
        for mut tail in arrangements(&rest, k - 1) {
            tail.insert(0, p);
            out.push(tail);
        }
    }
    out
}

/// Whether two blocks `c1, c2`, neither equal to `b1` or `b2`, cover the same
/// multiset of ordered pairs as `b1, b2`. Enumerates every arrangement of the points.
pub fn permutation_trade_exists(b1: &OrderedBlock, b2: &OrderedBlock) -> bool {
    let k = b1.len();
    let mut pool: Vec<u32> = b1.points().iter().chain(b2.points()).copied().collect();
    pool.sort_unstable();
    pool.dedup();
    let mut target = pairs_before(b1.points());
    target.extend(pairs_before(b2.points()));
    target.sort_unstable();
    let originals = [b1.points().to_vec(), b2.points().to_vec()];
    let candidates: Vec<Vec<u32>> = arrangements(&pool, k)
        .into_iter()
        .filter(|c| !originals.contains(c))
        .filter(|c| pairs_before(c).iter().all(|p| target.binary_search(p).is_ok()))
        .collect();
    for c1 in &candidates {
        for c2 in &candidates {
            let mut got = pairs_before(c1);
            got.extend(pairs_before(c2));
            got.sort_unstable();
            if got == target {
                return true;
            }
        }
    }
    false
}
