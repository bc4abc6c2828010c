//! Exact verification of coverage, group divisibility, super-simplicity and resolutions.
//!
//! Reports are total: every violation is recorded (up to [`MAX_VIOLATIONS`]) so a bad
//! catalog entry can be diagnosed in a single pass.

use std::fmt;

use crate::design::{pair_table, DesignKind, LabeledDesign};
use crate::error::{Error, Result};
use crate::par::Exec;

pub const MAX_VIOLATIONS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<(String, bool)>,
    pub blocks: usize,
    pub pairs: u64,
    pub violations: Vec<Violation>,
    /// Violations beyond the cap, counted but not listed.
    pub omitted: usize,
}

impl Report {
    fn new(d: &LabeledDesign) -> Self {
        Report {
            blocks: d.num_blocks(),
            pairs: crate::design::pair_slots(&d.blocks),
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }

    pub fn violation(&mut self, kind: &str, detail: String) {
        if self.violations.len() < MAX_VIOLATIONS {
            self.violations.push(Violation {
                kind: kind.to_string(),
                detail,
            });
        } else {
            self.omitted += 1;
        }
    }

    /// Appends the checks and violations of `other`.
    pub fn merge(mut self, other: Report) -> Report {
        self.checks.extend(other.checks);
        for v in other.violations {
            self.violation(&v.kind, v.detail);
        }
        self.omitted += other.omitted;
        self
    }

    /// Violations of one kind.
    pub fn count_of(&self, kind: &str) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RESULT {}", if self.passed() { "pass" } else { "fail" })?;
        for (name, ok) in &self.checks {
            writeln!(f, "CHECK {name} {}", if *ok { "pass" } else { "fail" })?;
        }
        writeln!(f, "COUNT blocks={} pairs={}", self.blocks, self.pairs)?;
        for v in &self.violations {
            writeln!(f, "VIOLATION {} {}", v.kind, v.detail)?;
        }
        if self.omitted > 0 {
            writeln!(f, "VIOLATION omitted {} more", self.omitted)?;
        }
        Ok(())
    }
}

fn uniform_k(d: &LabeledDesign) -> Option<usize> {
    match d.block_sizes().as_slice() {
        [k] => Some(*k),
        _ => None,
    }
}

/// Every ordered pair of distinct points covered exactly `lambda` times.
pub fn verify_dd(d: &LabeledDesign) -> Result<Report> {
    if !d.ordered {
        return Err(Error::NotOrdered);
    }
    let mut r = Report::new(d);
    let t = pair_table(d);
    let v = d.v() as u32;
    let mut ok = true;
    for x in 0..v {
        for y in 0..v {
            if x != y && t.get(x, y) != d.lambda {
                ok = false;
                r.violation(
                    "pair",
                    format!("({},{}) count={}", d.space.label(x), d.space.label(y), t.get(x, y)),
                );
            }
        }
    }
    r.check("coverage", ok);
    count_check(&mut r, d, (d.v() as u64) * (d.v() as u64 - 1));
    Ok(r)
}

fn count_check(r: &mut Report, d: &LabeledDesign, ordered_slots: u64) {
    // Blocks times C(k,2) must equal lambda times the number of ordered pairs to cover.
    let want = d.lambda as u64 * ordered_slots;
    let ok = match uniform_k(d) {
        Some(k) => d.num_blocks() as u64 * (k * (k - 1) / 2) as u64 == want,
        None => r.pairs == want,
    } || (d.num_blocks() == 0 && want == 0);
    if !ok {
        r.violation(
            "count",
            format!(
                "blocks={} expected pair slots {want}, found {}",
                d.num_blocks(),
                r.pairs
            ),
        );
    }
    r.check("block-count", ok);
}

/// Cross-group ordered pairs covered `lambda` times; no block meets a group twice.
pub fn verify_dgdd(d: &LabeledDesign) -> Result<Report> {
    if !d.ordered {
        return Err(Error::NotOrdered);
    }
    let groups = d.partition.as_ref().ok_or(Error::MissingPartition)?;
    let of = d.group_of().expect("partition present");
    let mut r = Report::new(d);

    let mut within_ok = true;
    for (bi, b) in d.blocks.iter().enumerate() {
        let p = b.points();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if of[p[i] as usize] == of[p[j] as usize] {
                    within_ok = false;
                    r.violation(
                        "group",
                        format!(
                            "block {bi} {} meets group {} in {} and {}",
                            b.display(&d.space),
                            of[p[i] as usize],
                            d.space.label(p[i]),
                            d.space.label(p[j])
                        ),
                    );
                }
            }
        }
    }
    r.check("within-group", within_ok);

    let t = pair_table(d);
    let v = d.v() as u32;
    let mut ok = true;
    for x in 0..v {
        for y in 0..v {
            if x != y && of[x as usize] != of[y as usize] && t.get(x, y) != d.lambda {
                ok = false;
                r.violation(
                    "pair",
                    format!("({},{}) count={}", d.space.label(x), d.space.label(y), t.get(x, y)),
                );
            }
        }
    }
    r.check("cross-coverage", ok);
    let n = d.v() as u64;
    let sq: u64 = groups.iter().map(|g| (g.len() as u64).pow(2)).sum();
    count_check(&mut r, d, n * n - sq);
    Ok(r)
}

/// Dense index from unordered point pairs to the blocks containing them.
pub(crate) struct PairIndex {
    v: usize,
    start: Vec<u32>,
    blocks: Vec<u32>,
}

impl PairIndex {
    pub(crate) fn new(d: &LabeledDesign) -> Self {
        let v = d.v();
        let key = |x: u32, y: u32| {
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            a as usize * v + b as usize
        };
        let mut start = vec![0u32; v * v + 1];
        for b in &d.blocks {
            for (x, y) in b.ordered_pairs() {
                start[key(x, y) + 1] += 1;
            }
        }
        for i in 0..v * v {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut blocks = vec![0u32; *start.last().unwrap_or(&0) as usize];
        for (bi, b) in d.blocks.iter().enumerate() {
            for (x, y) in b.ordered_pairs() {
                let k = key(x, y);
                blocks[fill[k] as usize] = bi as u32;
                fill[k] += 1;
            }
        }
        PairIndex { v, start, blocks }
    }

    /// Blocks containing both `x` and `y`, ascending.
    pub(crate) fn blocks_with(&self, x: u32, y: u32) -> &[u32] {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        let k = a as usize * self.v + b as usize;
        &self.blocks[self.start[k] as usize..self.start[k + 1] as usize]
    }

    /// Blocks `j > i` sharing at least two points with block `i`, ascending, with the shared-pair count.
    pub(crate) fn partners(&self, d: &LabeledDesign, i: usize) -> Vec<(u32, u32)> {
        let mut hits: Vec<u32> = Vec::new();
        for (x, y) in d.blocks[i].ordered_pairs() {
            hits.extend(self.blocks_with(x, y).iter().filter(|&&j| j as usize > i));
        }
        hits.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::new();
        for j in hits {
            match out.last_mut() {
                Some((last, n)) if *last == j => *n += 1,
                _ => out.push((j, 1)),
            }
        }
        out
    }
}

/// Any two blocks of the underlying design share at most two points.
pub fn verify_super_simple(d: &LabeledDesign) -> Report {
    verify_super_simple_with(d, Exec::default())
}

pub fn verify_super_simple_with(d: &LabeledDesign, exec: Exec) -> Report {
    let idx = PairIndex::new(d);
    // Sharing s points means sharing C(s,2) pairs, so three shared pairs flag an offender.
    let offenders: Vec<(usize, u32)> = exec.flat_map_range(d.num_blocks(), |i| {
        idx.partners(d, i)
            .into_iter()
            .filter(|&(_, n)| n >= 3)
            .map(|(j, _)| (i, j))
            .collect()
    });
    let mut r = Report::new(d);
    r.check("super-simple", offenders.is_empty());
    for (i, j) in offenders {
        let bj = &d.blocks[j as usize];
        let mut common: Vec<u32> = d.blocks[i]
            .points()
            .iter()
            .copied()
            .filter(|&p| bj.contains(p))
            .collect();
        common.sort_unstable();
        let labels: Vec<String> = common.iter().map(|&p| d.space.label(p).to_string()).collect();
        r.violation("intersection", format!("blocks {i} {j} share {{{}}}", labels.join(",")));
    }
    r
}

/// Pair coverage for unordered designs; `sizes` restricts block sizes (empty = any).
pub fn verify_unordered(d: &LabeledDesign, sizes: &[usize]) -> Result<Report> {
    if d.ordered {
        return Err(Error::Precondition(
            "verify_unordered expects an unordered design".into(),
        ));
    }
    let of = match d.kind {
        DesignKind::GDD | DesignKind::TD => Some(d.group_of().ok_or(Error::MissingPartition)?),
        DesignKind::PBD | DesignKind::BIBD => {
            if d.partition.is_some() {
                return Err(Error::Precondition(format!("a {} has no groups", d.kind)));
            }
            None
        }
        _ => return Err(Error::NotOrdered),
    };
    let mut r = Report::new(d);
    if !sizes.is_empty() {
        let mut ok = true;
        for (bi, b) in d.blocks.iter().enumerate() {
            if !sizes.contains(&b.len()) {
                ok = false;
                r.violation("size", format!("block {bi} has size {}", b.len()));
            }
        }
        r.check("block-sizes", ok);
    }
    if let Some(of) = &of {
        let mut ok = true;
        for (bi, b) in d.blocks.iter().enumerate() {
            let mut gs: Vec<usize> = b.points().iter().map(|&p| of[p as usize]).collect();
            gs.sort_unstable();
            if gs.windows(2).any(|w| w[0] == w[1]) {
                ok = false;
                r.violation("group", format!("block {bi} meets a group twice"));
            }
        }
        r.check("within-group", ok);
    }
    if d.kind == DesignKind::TD {
        let k = d.partition.as_ref().map_or(0, |g| g.len());
        let ok = d.blocks.iter().all(|b| b.len() == k);
        if !ok {
            r.violation("transversal", format!("some block does not meet all {k} groups"));
        }
        r.check("transversal", ok);
    }
    let t = pair_table(d);
    let v = d.v() as u32;
    let mut ok = true;
    for x in 0..v {
        for y in x + 1..v {
            let same = of.as_ref().is_some_and(|of| of[x as usize] == of[y as usize]);
            let want = if same { 0 } else { d.lambda };
            if t.get(x, y) != want {
                ok = false;
                r.violation(
                    "pair",
                    format!(
                        "{{{},{}}} count={} expected {want}",
                        d.space.label(x),
                        d.space.label(y),
                        t.get(x, y)
                    ),
                );
            }
        }
    }
    r.check("coverage", ok);
    Ok(r)
}

/// Each class must contain every point exactly once.
pub fn verify_resolution(d: &LabeledDesign, classes: &[Vec<usize>]) -> Result<Report> {
    if d.ordered {
        return Err(Error::Precondition(
            "resolutions are checked on unordered designs".into(),
        ));
    }
    for c in classes {
        if let Some(&bad) = c.iter().find(|&&b| b >= d.num_blocks()) {
            return Err(Error::Precondition(format!(
                "class refers to block {bad} of {}",
                d.num_blocks()
            )));
        }
    }
    let mut r = Report::new(d);
    let mut ok = true;
    for (ci, c) in classes.iter().enumerate() {
        let mut seen = vec![0u32; d.v()];
        for &b in c {
            for &p in d.blocks[b].points() {
                seen[p as usize] += 1;
            }
        }
        for (p, &n) in seen.iter().enumerate() {
            if n != 1 {
                ok = false;
                r.violation(
                    "class",
                    format!("class {ci} covers point {} {n} times", d.space.label(p as u32)),
                );
            }
        }
    }
    r.check("resolution", ok);
    Ok(r)
}

/// Coverage check matching the design kind, followed by the super-simple check.
pub fn verify_directed(d: &LabeledDesign) -> Result<Report> {
    let base = match d.kind {
        DesignKind::DD => verify_dd(d)?,
        DesignKind::DGDD => verify_dgdd(d)?,
        _ => return Err(Error::NotOrdered),
    };
    Ok(base.merge(verify_super_simple(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{OrderedBlock, PointSpace};
    use crate::devel::{develop, parse_catalog};

    fn dd21() -> LabeledDesign {
        let t = "design DD(21)\nkind DD\nspace mod 21\ndevelop +1 mod 21\n\
                 base (0,1,4,14,16)\nbase (1,0,18,8,6)\n";
        develop(&parse_catalog(t).unwrap()[0]).unwrap()
    }

    #[test]
    fn dd21_passes_and_deletion_uncovers_ten_pairs() {
        let d = dd21();
        let r = verify_dd(&d).unwrap();
        assert!(r.passed(), "{r}");
        assert!(verify_super_simple(&d).passed());
        let mut cut = d.clone();
        cut.blocks.remove(0);
        let r = verify_dd(&cut).unwrap();
        assert!(!r.passed());
        assert_eq!(r.count_of("pair"), 10);
    }

    #[test]
    fn reverse_block_breaks_super_simplicity() {
        let mut d = dd21();
        let rev = d.blocks[0].reversed();
        d.blocks.push(rev);
        let r = verify_super_simple(&d);
        assert!(!r.passed());
        assert!(r.violations[0].detail.contains("{0,1,4,14,16}"), "{r}");
    }

    #[test]
    fn three_shared_points_named() {
        let blocks = vec![
            OrderedBlock::new(vec![0, 1, 2, 3, 4]).unwrap(),
            OrderedBlock::new(vec![5, 2, 1, 6, 0]).unwrap(),
        ];
        let d = LabeledDesign::new(PointSpace::plain(7), blocks, None, 1, DesignKind::DD).unwrap();
        let r = verify_super_simple(&d);
        assert_eq!(r.violations[0].detail, "blocks 0 1 share {0,1,2}");
    }

    #[test]
    fn dgdd_flags_block_inside_group() {
        let blocks = vec![OrderedBlock::new(vec![0, 1, 2]).unwrap()];
        let d = LabeledDesign::new(
            PointSpace::plain(4),
            blocks,
            Some(vec![vec![0, 1], vec![2, 3]]),
            1,
            DesignKind::DGDD,
        )
        .unwrap();
        let r = verify_dgdd(&d).unwrap();
        assert!(!r.passed());
        assert!(r.violations[0].detail.contains("meets group 0"));
        let mut nog = d.clone();
        nog.partition = None;
        assert!(matches!(verify_dgdd(&nog), Err(Error::MissingPartition)));
    }

    #[test]
    fn pbd_with_doubled_pair_fails() {
        let blocks = vec![
            OrderedBlock::new(vec![0, 1, 2]).unwrap(),
            OrderedBlock::new(vec![0, 1, 2]).unwrap(),
        ];
        let d = LabeledDesign::new(PointSpace::plain(3), blocks, None, 1, DesignKind::PBD).unwrap();
        assert!(!verify_unordered(&d, &[3]).unwrap().passed());
    }

    #[test]
    fn resolution_checks() {
        let blocks = vec![
            OrderedBlock::new(vec![0, 1]).unwrap(),
            OrderedBlock::new(vec![2, 3]).unwrap(),
            OrderedBlock::new(vec![0, 2]).unwrap(),
            OrderedBlock::new(vec![1, 3]).unwrap(),
        ];
        let d = LabeledDesign::new(PointSpace::plain(4), blocks, None, 1, DesignKind::PBD).unwrap();
        assert!(verify_resolution(&d, &[vec![0, 1], vec![2, 3]]).unwrap().passed());
        let r = verify_resolution(&d, &[vec![0], vec![2, 3]]).unwrap();
        assert!(!r.passed());
        assert!(r.violations[0].detail.starts_with("class 0 covers point 2 0 times"));
        assert!(verify_resolution(&d, &[vec![9]]).is_err());
    }

    #[test]
    fn report_text_shape() {
        let r = verify_dd(&dd21()).unwrap();
        let s = r.to_string();
        assert!(s.starts_with("RESULT pass\nCHECK coverage pass\nCHECK block-count pass\nCOUNT blocks=42 pairs=420\n"));
    }
}
