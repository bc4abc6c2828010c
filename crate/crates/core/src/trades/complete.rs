//! Completion search: counts the 2-(v,5,1) directed designs containing a block set.

use std::time::{Duration, Instant};

use crate::design::{LabeledDesign, OrderedBlock};
use crate::error::{Error, Result};
use crate::par::Exec;

const K: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub nodes: u64,
    pub time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nodes: 100_000_000,
            time: Duration::from_secs(120),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Completion {
    None,
    /// Exactly one completion; its blocks (the given blocks first).
    Unique(Vec<OrderedBlock>),
    /// Two or more completions; the first two found.
    Several(Vec<OrderedBlock>, Vec<OrderedBlock>),
    /// Budget exhausted; completions found so far.
    Indeterminate {
        found: usize,
        nodes: u64,
    },
}

impl Completion {
    /// 0, 1 or 2 (meaning at least two); `None` when indeterminate.
    pub fn count(&self) -> Option<usize> {
        match self {
            Completion::None => Some(0),
            Completion::Unique(_) => Some(1),
            Completion::Several(..) => Some(2),
            Completion::Indeterminate { .. } => None,
        }
    }
}

/// Counts the designs containing `given`, stopping at two.
///
/// The search runs in two stages. The first backtracks over the underlying unordered
/// blocks: every unordered pair must lie in exactly two of them, and each node branches on
/// the pair with the fewest candidate 5-sets, trying them in lexicographic order. Each
/// complete underlying design is then oriented block by block so that every ordered pair
/// is covered once, keeping the orders fixed by `given`.
pub fn completion_search(v: usize, given: &[OrderedBlock], budget: Budget) -> Result<Completion> {
    if v < K || !(v * (v - 1)).is_multiple_of(K * (K - 1) / 2) {
        return Err(Error::Precondition(format!("no 2-({v},5,1) directed design can exist")));
    }
    let mut covered = vec![false; v * v];
    for b in given {
        if b.len() != K || b.points().iter().any(|&p| p as usize >= v) {
            return Err(Error::Precondition(format!(
                "block {:?} is not a 5-block on {v} points",
                b.points()
            )));
        }
        for (x, y) in b.ordered_pairs() {
            let k = x as usize * v + y as usize;
            if covered[k] {
                return Err(Error::Precondition(format!("pair ({x},{y}) covered twice")));
            }
            covered[k] = true;
        }
    }
    // Remaining multiplicity of each unordered pair, indexed x * v + y with x < y.
    let mut need = vec![0u8; v * v];
    for x in 0..v {
        for y in x + 1..v {
            need[x * v + y] = 2 - covered[x * v + y] as u8 - covered[y * v + x] as u8;
        }
    }
    let mut s = State {
        v,
        covered,
        need,
        sets: Vec::new(),
        chosen: Vec::new(),
        oriented: given.to_vec(),
        found: Vec::new(),
        nodes: 0,
        budget,
        start: Instant::now(),
        out_of_budget: false,
    };
    s.generate(&mut Vec::with_capacity(K), 0);
    if !s.out_of_budget {
        let all: Vec<u32> = (0..s.sets.len() as u32).collect();
        s.underlying(&all);
    }
    if s.out_of_budget && s.found.len() < 2 {
        return Ok(Completion::Indeterminate {
            found: s.found.len(),
            nodes: s.nodes,
        });
    }
    let mut found = s.found;
    Ok(match found.len() {
        0 => Completion::None,
        1 => Completion::Unique(found.pop().unwrap()),
        _ => {
            let second = found.pop().unwrap();
            Completion::Several(found.pop().unwrap(), second)
        }
    })
}

/// Outcome of [`defining_floor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Floor {
    /// Every defining set has at least this many blocks.
    pub blocks: usize,
    /// A defining set of exactly `blocks` blocks was found.
    pub attained: bool,
    /// Some search ran out of budget; `blocks` is then the last size fully settled.
    pub indeterminate: bool,
}

/// Lower bound on the smallest defining set of a 2-(v,5,1) directed design, found by
/// running the completion search on every block subset of size `0..=max_size`.
///
/// A subset of a non-defining set is non-defining, so the sizes are settled in
/// increasing order and the scan stops at the first size with a defining subset.
pub fn defining_floor(d: &LabeledDesign, max_size: usize, budget: Budget, exec: Exec) -> Result<Floor> {
    if !d.ordered || d.partition.is_some() {
        return Err(Error::Precondition(
            "defining_floor expects a 2-(v,5,1) directed design".into(),
        ));
    }
    let n = d.num_blocks();
    for size in 0..=max_size.min(n) {
        let subsets = subsets_of(n, size);
        let counts = exec.map_slice(&subsets, |s| {
            let given: Vec<OrderedBlock> = s.iter().map(|&i| d.blocks[i].clone()).collect();
            completion_search(d.v(), &given, budget).map(|c| c.count())
        });
        let mut unsettled = false;
        for c in counts {
            match c? {
                Some(1) => {
                    return Ok(Floor {
                        blocks: size,
                        attained: true,
                        indeterminate: false,
                    })
                }
                Some(_) => {}
                None => unsettled = true,
            }
        }
        if unsettled {
            return Ok(Floor {
                blocks: size,
                attained: false,
                indeterminate: true,
            });
        }
    }
    Ok(Floor {
        blocks: max_size.min(n) + 1,
        attained: false,
        indeterminate: false,
    })
}

fn subsets_of(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..size).rev().find(|&i| cur[i] < n - size + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..size {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

struct State {
    v: usize,
    /// Ordered pairs covered by oriented blocks.
    covered: Vec<bool>,
    need: Vec<u8>,
    /// Candidate 5-sets, ascending, in lexicographic order.
    sets: Vec<[u32; K]>,
    chosen: Vec<u32>,
    oriented: Vec<OrderedBlock>,
    found: Vec<Vec<OrderedBlock>>,
    nodes: u64,
    budget: Budget,
    start: Instant,
    out_of_budget: bool,
}

fn pairs_of(set: &[u32; K], v: usize) -> impl Iterator<Item = usize> + '_ {
    (0..K).flat_map(move |a| (a + 1..K).map(move |b| set[a] as usize * v + set[b] as usize))
}

impl State {
    fn tick(&mut self) {
        self.nodes += 1;
        if self.nodes > self.budget.nodes
            || (self.nodes.is_multiple_of(1024) && self.start.elapsed() > self.budget.time)
        {
            self.out_of_budget = true;
        }
    }

    fn stop(&self) -> bool {
        self.found.len() >= 2 || self.out_of_budget
    }

    fn generate(&mut self, seq: &mut Vec<u32>, from: u32) {
        if self.out_of_budget {
            return;
        }
        if seq.len() == K {
            self.sets.push(seq.as_slice().try_into().expect("five points"));
            return;
        }
        self.tick();
        for p in from..self.v as u32 {
            if seq.iter().any(|&q| self.need[q as usize * self.v + p as usize] == 0) {
                continue;
            }
            seq.push(p);
            self.generate(seq, p + 1);
            seq.pop();
        }
    }

    fn fits(&self, r: u32) -> bool {
        pairs_of(&self.sets[r as usize], self.v).all(|k| self.need[k] > 0)
    }

    fn underlying(&mut self, cands: &[u32]) {
        self.tick();
        if self.stop() {
            return;
        }
        let v = self.v;
        let mut count = vec![0u32; v * v];
        for &r in cands {
            for k in pairs_of(&self.sets[r as usize], v) {
                count[k] += 1;
            }
        }
        let mut pick = None;
        let mut done = true;
        for x in 0..v {
            for y in x + 1..v {
                let k = x * v + y;
                if self.need[k] == 0 {
                    continue;
                }
                done = false;
                if count[k] < self.need[k] as u32 {
                    return;
                }
                if pick.is_none_or(|(_, c)| count[k] < c) {
                    pick = Some((k, count[k]));
                }
            }
        }
        if done {
            let mut blocks: Vec<u32> = self.chosen.clone();
            blocks.sort_unstable();
            self.orient(&blocks, 0);
            return;
        }
        let (col, _) = pick.expect("an uncovered pair");
        let (x, y) = ((col / v) as u32, (col % v) as u32);
        // Branch on the smallest chosen set through the pair; smaller sets through it are
        // then excluded, which keeps repeated sets from being enumerated twice.
        for (i, &r) in cands.iter().enumerate() {
            let set = self.sets[r as usize];
            if !(set.contains(&x) && set.contains(&y)) {
                continue;
            }
            for k in pairs_of(&set, v) {
                self.need[k] -= 1;
            }
            self.chosen.push(r);
            let next: Vec<u32> = cands[i..]
                .iter()
                .copied()
                .chain(cands[..i].iter().copied().filter(|&s| {
                    let t = &self.sets[s as usize];
                    !(t.contains(&x) && t.contains(&y))
                }))
                .filter(|&s| self.fits(s))
                .collect();
            let mut next = next;
            next.sort_unstable();
            self.underlying(&next);
            self.chosen.pop();
            for k in pairs_of(&set, v) {
                self.need[k] += 1;
            }
            if self.stop() {
                return;
            }
        }
    }

    /// Orders the chosen sets from index `i` on; a repeated set takes increasing orders.
    fn orient(&mut self, blocks: &[u32], i: usize) {
        self.tick();
        if self.stop() {
            return;
        }
        if i == blocks.len() {
            self.found.push(self.oriented.clone());
            return;
        }
        let set = self.sets[blocks[i] as usize];
        let v = self.v;
        let floor = (i > 0 && blocks[i - 1] == blocks[i])
            .then(|| self.oriented.last().cloned())
            .flatten();
        let mut perm = set.to_vec();
        loop {
            let free = (0..K).all(|a| (a + 1..K).all(|b| !self.covered[perm[a] as usize * v + perm[b] as usize]));
            let above = floor.as_ref().is_none_or(|f| perm.as_slice() > f.points());
            if free && above {
                self.mark(&perm, true);
                self.oriented
                    .push(OrderedBlock::new(perm.clone()).expect("distinct points"));
                self.orient(blocks, i + 1);
                self.oriented.pop();
                self.mark(&perm, false);
                if self.stop() {
                    return;
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }

    fn mark(&mut self, seq: &[u32], val: bool) {
        for a in 0..seq.len() {
            for b in a + 1..seq.len() {
                self.covered[seq[a] as usize * self.v + seq[b] as usize] = val;
            }
        }
    }
}

fn next_permutation(p: &mut [u32]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
