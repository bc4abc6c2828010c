//! Domain types shared by every other module: point labels, point spaces,
//! ordered blocks, labeled designs, group-type signatures and pair tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::text::Cursor;

/// External name of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Residue or plain integer point.
    Int(i64),
    /// Coordinate point `(a, b)`.
    Pair(i64, i64),
    /// Fixed point `∞_j`, written `INFj` in text.
    Inf(u32),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(x) => write!(f, "{x}"),
            Label::Pair(a, b) => write!(f, "({a},{b})"),
            Label::Inf(j) => write!(f, "INF{j}"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut c = Cursor::new(s, 1);
        let l = c.label()?;
        if !c.at_end() {
            return Err(c.err("trailing characters after label"));
        }
        Ok(l)
    }
}

/// Bijection between labels and indices `0..size`.
#[derive(Clone, Debug)]
pub struct PointSpace {
    labels: Vec<Label>,
    index: HashMap<Label, u32>,
}

impl PartialEq for PointSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for PointSpace {}

impl PointSpace {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(*l, i as u32).is_some() {
                return Err(Error::InvalidDesign(format!("duplicate label {l}")));
            }
        }
        Ok(PointSpace { labels, index })
    }

    /// Integer labels `0..n`.
    pub fn plain(n: usize) -> Self {
        Self::new((0..n as i64).map(Label::Int).collect()).expect("distinct")
    }

    /// Residues of `Z_g`.
    pub fn residues(g: u64) -> Self {
        Self::plain(g as usize)
    }

    /// Integer labels `lo..=hi`.
    pub fn int_range(lo: i64, hi: i64) -> Self {
        Self::new((lo..=hi).map(Label::Int).collect()).expect("distinct")
    }

    /// Coordinate labels over `Z_m x Z_n`; `(a, b)` gets index `a*n + b`.
    pub fn grid(m: u64, n: u64) -> Self {
        let mut labels = Vec::with_capacity((m * n) as usize);
        for a in 0..m as i64 {
            for b in 0..n as i64 {
                labels.push(Label::Pair(a, b));
            }
        }
        Self::new(labels).expect("distinct")
    }

    /// Appends `∞_0 .. ∞_{count-1}` after the existing labels.
    pub fn with_infinities(mut self, count: u32) -> Result<Self> {
        for j in 0..count {
            let l = Label::Inf(j);
            let idx = self.labels.len() as u32;
            if self.index.insert(l, idx).is_some() {
                return Err(Error::InvalidDesign(format!("duplicate label {l}")));
            }
            self.labels.push(l);
        }
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: u32) -> Label {
        self.labels[i as usize]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn index_of(&self, l: &Label) -> Option<u32> {
        self.index.get(l).copied()
    }

    pub fn resolve(&self, l: &Label) -> Result<u32> {
        self.index_of(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))
    }

    /// True when the labels are exactly `0..size` in order.
    pub fn is_plain(&self) -> bool {
        self.labels.iter().enumerate().all(|(i, l)| *l == Label::Int(i as i64))
    }
}

/// An ordered tuple of distinct point indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedBlock(Vec<u32>);

impl OrderedBlock {
    pub fn new(points: Vec<u32>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidBlock(format!(
                "block needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::InvalidBlock(format!("repeated point {p} in {points:?}")));
            }
        }
        Ok(OrderedBlock(points))
    }

    pub fn points(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: u32) -> bool {
        self.0.contains(&p)
    }

    /// Points sorted ascending (the underlying unordered block).
    pub fn sorted(&self) -> Vec<u32> {
        let mut s = self.0.clone();
        s.sort_unstable();
        s
    }

    pub fn reversed(&self) -> OrderedBlock {
        let mut r = self.0.clone();
        r.reverse();
        OrderedBlock(r)
    }

    pub fn ordered_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let p = &self.0;
        (0..p.len()).flat_map(move |i| (i + 1..p.len()).map(move |j| (p[i], p[j])))
    }

    pub fn map(&self, f: impl Fn(u32) -> u32) -> Result<OrderedBlock> {
        OrderedBlock::new(self.0.iter().map(|&p| f(p)).collect())
    }

    pub fn display(&self, space: &PointSpace) -> String {
        let parts: Vec<String> = self.0.iter().map(|&p| space.label(p).to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// All `C(k,2)` ordered pairs `(points[i], points[j])`, `i < j`, in position order.
pub fn ordered_pairs_of(block: &OrderedBlock) -> Vec<(u32, u32)> {
    block.ordered_pairs().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DesignKind {
    DD,
    DGDD,
    GDD,
    TD,
    PBD,
    BIBD,
}

impl DesignKind {
    pub fn is_ordered(self) -> bool {
        matches!(self, DesignKind::DD | DesignKind::DGDD)
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DesignKind::DD => "DD",
            DesignKind::DGDD => "DGDD",
            DesignKind::GDD => "GDD",
            DesignKind::TD => "TD",
            DesignKind::PBD => "PBD",
            DesignKind::BIBD => "BIBD",
        };
        f.write_str(s)
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "DD" => DesignKind::DD,
            "DGDD" => DesignKind::DGDD,
            "GDD" => DesignKind::GDD,
            "TD" => DesignKind::TD,
            "PBD" => DesignKind::PBD,
            "BIBD" => DesignKind::BIBD,
            _ => return Err(Error::InvalidDesign(format!("unknown design kind `{s}`"))),
        })
    }
}

/// Multiset of group sizes, e.g. `4^8 6^1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupType(Vec<(u32, u32)>);

impl GroupType {
    pub fn from_sizes(sizes: impl IntoIterator<Item = u32>) -> Self {
        let mut m: BTreeMap<u32, u32> = BTreeMap::new();
        for s in sizes {
            if s > 0 {
                *m.entry(s).or_default() += 1;
            }
        }
        GroupType(m.into_iter().collect())
    }

    pub fn parts(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn points(&self) -> u64 {
        self.0.iter().map(|&(g, u)| g as u64 * u as u64).sum()
    }

    pub fn group_count(&self) -> u32 {
        self.0.iter().map(|&(_, u)| u).sum()
    }

    /// Sum of squared group sizes, the number of ordered within-group slots.
    pub fn sum_sq(&self) -> u64 {
        self.0.iter().map(|&(g, u)| (g as u64).pow(2) * u as u64).sum()
    }

    /// Group sizes expanded, ascending.
    pub fn sizes(&self) -> Vec<u32> {
        self.0
            .iter()
            .flat_map(|&(g, u)| std::iter::repeat_n(g, u as usize))
            .collect()
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(g, u)| format!("{g}^{u}")).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for GroupType {
    type Err = Error;

    /// Accepts `5^7`, `4^8 6^1`, `4^8 6` and `(4^8 6^1)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut m: BTreeMap<u32, u32> = BTreeMap::new();
        for tok in s.split_whitespace() {
            let (g, u) = match tok.split_once('^') {
                Some((g, u)) => (g, u),
                None => (tok, "1"),
            };
            let bad = || Error::InvalidDesign(format!("bad group type term `{tok}`"));
            let g: u32 = g.parse().map_err(|_| bad())?;
            let u: u32 = u.parse().map_err(|_| bad())?;
            if g == 0 || u == 0 {
                return Err(bad());
            }
            *m.entry(g).or_default() += u;
        }
        if m.is_empty() {
            return Err(Error::InvalidDesign("empty group type".into()));
        }
        Ok(GroupType(m.into_iter().collect()))
    }
}

/// A block design over a labeled point space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDesign {
    pub space: PointSpace,
    pub blocks: Vec<OrderedBlock>,
    pub partition: Option<Vec<Vec<u32>>>,
    pub lambda: u32,
    pub kind: DesignKind,
    pub ordered: bool,
}

impl LabeledDesign {
    pub fn new(
        space: PointSpace,
        blocks: Vec<OrderedBlock>,
        partition: Option<Vec<Vec<u32>>>,
        lambda: u32,
        kind: DesignKind,
    ) -> Result<Self> {
        let d = LabeledDesign {
            space,
            blocks,
            partition,
            lambda,
            kind,
            ordered: kind.is_ordered(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.v() as u32;
        if self.lambda == 0 {
            return Err(Error::InvalidDesign("lambda must be positive".into()));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if let Some(p) = b.points().iter().find(|&&p| p >= v) {
                return Err(Error::InvalidDesign(format!(
                    "block {i} uses point index {p} outside a space of size {v}"
                )));
            }
        }
        if let Some(groups) = &self.partition {
            let mut seen = vec![false; v as usize];
            for g in groups {
                for &p in g {
                    if p >= v {
                        return Err(Error::InvalidDesign(format!("group point {p} out of range")));
                    }
                    if std::mem::replace(&mut seen[p as usize], true) {
                        return Err(Error::InvalidDesign(format!(
                            "point {} lies in two groups",
                            self.space.label(p)
                        )));
                    }
                }
            }
            if let Some(p) = seen.iter().position(|s| !s) {
                return Err(Error::InvalidDesign(format!(
                    "point {} is in no group",
                    self.space.label(p as u32)
                )));
            }
        }
        Ok(())
    }

    pub fn v(&self) -> usize {
        self.space.size()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn group_type(&self) -> Option<GroupType> {
        self.partition
            .as_ref()
            .map(|gs| GroupType::from_sizes(gs.iter().map(|g| g.len() as u32)))
    }

    /// Group index of every point, or `None` when there is no partition.
    pub fn group_of(&self) -> Option<Vec<usize>> {
        let groups = self.partition.as_ref()?;
        let mut of = vec![usize::MAX; self.v()];
        for (gi, g) in groups.iter().enumerate() {
            for &p in g {
                of[p as usize] = gi;
            }
        }
        Some(of)
    }

    /// Same blocks with order forgotten, `lambda` doubled; DD becomes BIBD and DGDD becomes GDD.
    pub fn underlying(&self) -> Result<LabeledDesign> {
        if !self.ordered {
            return Err(Error::NotOrdered);
        }
        let kind = match self.kind {
            DesignKind::DD => DesignKind::BIBD,
            DesignKind::DGDD => DesignKind::GDD,
            _ => return Err(Error::NotOrdered),
        };
        let blocks = self.blocks.iter().map(|b| OrderedBlock(b.sorted())).collect();
        Ok(LabeledDesign {
            space: self.space.clone(),
            blocks,
            partition: self.partition.clone(),
            lambda: self.lambda * 2,
            kind,
            ordered: false,
        })
    }

    /// Renames point `p` to `perm[p]` everywhere; labels follow their points.
    pub fn relabel(&self, perm: &[u32]) -> Result<LabeledDesign> {
        let v = self.v();
        if perm.len() != v {
            return Err(Error::SizeMismatch(format!(
                "permutation of {} points for v={v}",
                perm.len()
            )));
        }
        let mut labels = vec![Label::Int(0); v];
        let mut hit = vec![false; v];
        for (p, &q) in perm.iter().enumerate() {
            if q as usize >= v || std::mem::replace(&mut hit[q as usize], true) {
                return Err(Error::Precondition("relabel needs a bijection".into()));
            }
            labels[q as usize] = self.space.label(p as u32);
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.map(|p| perm[p as usize]))
            .collect::<Result<Vec<_>>>()?;
        let partition = self.partition.as_ref().map(|gs| {
            gs.iter()
                .map(|g| g.iter().map(|&p| perm[p as usize]).collect())
                .collect()
        });
        Ok(LabeledDesign {
            space: PointSpace::new(labels)?,
            blocks,
            partition,
            lambda: self.lambda,
            kind: self.kind,
            ordered: self.ordered,
        })
    }

    /// Removes the given points from the space, every block and every group.
    /// Empty groups disappear; blocks keep their remaining points in order.
    pub fn delete_points(&self, doomed: &[u32]) -> Result<LabeledDesign> {
        let v = self.v();
        let mut keep = vec![true; v];
        for &p in doomed {
            if p as usize >= v {
                return Err(Error::Precondition(format!("point index {p} not in design")));
            }
            keep[p as usize] = false;
        }
        let mut new_index = vec![u32::MAX; v];
        let mut labels = Vec::new();
        for p in 0..v {
            if keep[p] {
                new_index[p] = labels.len() as u32;
                labels.push(self.space.label(p as u32));
            }
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                OrderedBlock::new(
                    b.points()
                        .iter()
                        .filter(|&&p| keep[p as usize])
                        .map(|&p| new_index[p as usize])
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let partition = self.partition.as_ref().map(|gs| {
            gs.iter()
                .map(|g| {
                    g.iter()
                        .filter(|&&p| keep[p as usize])
                        .map(|&p| new_index[p as usize])
                        .collect::<Vec<_>>()
                })
                .filter(|g| !g.is_empty())
                .collect()
        });
        Ok(LabeledDesign {
            space: PointSpace::new(labels)?,
            blocks,
            partition,
            lambda: self.lambda,
            kind: self.kind,
            ordered: self.ordered,
        })
    }

    /// Block sizes present in the design, ascending.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(|b| b.len()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Dense `v x v` pair-coverage counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairTable {
    v: usize,
    ordered: bool,
    counts: Vec<u32>,
}

impl PairTable {
    pub fn v(&self) -> usize {
        self.v
    }

    pub fn ordered(&self) -> bool {
        self.ordered
    }

    /// Coverage of `(x, y)`; symmetric for unordered designs.
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.counts[x as usize * self.v + y as usize]
    }

    /// Sum over distinct pairs (ordered pairs when ordered, `x < y` otherwise).
    pub fn total(&self) -> u64 {
        let mut t = 0u64;
        for x in 0..self.v {
            for y in 0..self.v {
                if x != y && (self.ordered || x < y) {
                    t += self.counts[x * self.v + y] as u64;
                }
            }
        }
        t
    }

    /// Nonzero entries in row-major order (`x < y` only for unordered tables).
    pub fn nonzero(&self) -> impl Iterator<Item = ((u32, u32), u32)> + '_ {
        let v = self.v;
        let ordered = self.ordered;
        self.counts.iter().enumerate().filter_map(move |(i, &c)| {
            let (x, y) = (i / v, i % v);
            (c > 0 && x != y && (ordered || x < y)).then_some(((x as u32, y as u32), c))
        })
    }
}

pub fn pair_table(design: &LabeledDesign) -> PairTable {
    let v = design.v();
    let mut counts = vec![0u32; v * v];
    for b in &design.blocks {
        for (x, y) in b.ordered_pairs() {
            counts[x as usize * v + y as usize] += 1;
            if !design.ordered {
                counts[y as usize * v + x as usize] += 1;
            }
        }
    }
    PairTable {
        v,
        ordered: design.ordered,
        counts,
    }
}

fn binom2(n: usize) -> u64 {
    (n as u64) * (n as u64).saturating_sub(1) / 2
}

/// Number of pairs a block list covers, counted with multiplicity.
pub fn pair_slots(blocks: &[OrderedBlock]) -> u64 {
    blocks.iter().map(|b| binom2(b.len())).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(p: &[u32]) -> OrderedBlock {
        OrderedBlock::new(p.to_vec()).unwrap()
    }

    #[test]
    fn pairs_of_first_base_block() {
        let pairs = ordered_pairs_of(&blk(&[0, 1, 4, 14, 16]));
        assert_eq!(
            pairs,
            vec![
                (0, 1),
                (0, 4),
                (0, 14),
                (0, 16),
                (1, 4),
                (1, 14),
                (1, 16),
                (4, 14),
                (4, 16),
                (14, 16)
            ]
        );
        assert_eq!(ordered_pairs_of(&blk(&[7, 3])), vec![(7, 3)]);
    }

    #[test]
    fn block_rejects_repeats_and_short() {
        assert!(OrderedBlock::new(vec![1, 2, 1]).is_err());
        assert!(OrderedBlock::new(vec![1]).is_err());
    }

    #[test]
    fn label_text() {
        for s in ["17", "-3", "(2,11)", "INF4"] {
            let l: Label = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        assert_eq!("\u{221e}_3".parse::<Label>().unwrap(), Label::Inf(3));
        assert_eq!("INF".parse::<Label>().unwrap(), Label::Inf(0));
        assert!("x".parse::<Label>().is_err());
    }

    #[test]
    fn grid_and_infinity_indexing() {
        let s = PointSpace::grid(3, 37).with_infinities(2).unwrap();
        assert_eq!(s.index_of(&Label::Pair(2, 5)), Some(2 * 37 + 5));
        assert_eq!(s.index_of(&Label::Inf(1)), Some(112));
        assert!(
            PointSpace::residues(5)
                .with_infinities(1)
                .unwrap()
                .index_of(&Label::Inf(0))
                == Some(5)
        );
    }

    #[test]
    fn group_type_parse_and_display() {
        let t: GroupType = "4^8 6".parse().unwrap();
        assert_eq!(t.to_string(), "4^8 6^1");
        assert_eq!(t.points(), 38);
        assert_eq!(t.sum_sq(), 8 * 16 + 36);
        assert_eq!("(5^7)".parse::<GroupType>().unwrap(), GroupType::from_sizes([5; 7]));
        assert!("0^3".parse::<GroupType>().is_err());
    }

    #[test]
    fn pair_table_single_block_and_empty() {
        let space = PointSpace::plain(21);
        let d = LabeledDesign::new(space.clone(), vec![blk(&[0, 1, 4, 14, 16])], None, 1, DesignKind::DD).unwrap();
        let t = pair_table(&d);
        assert_eq!(t.nonzero().count(), 10);
        assert_eq!(t.get(0, 16), 1);
        assert_eq!(t.get(16, 0), 0);
        let e = LabeledDesign::new(space, vec![], None, 1, DesignKind::DD).unwrap();
        assert_eq!(pair_table(&e).total(), 0);
    }

    #[test]
    fn underlying_doubles_lambda() {
        let d = LabeledDesign::new(PointSpace::plain(6), vec![blk(&[3, 1, 2])], None, 1, DesignKind::DD).unwrap();
        let u = d.underlying().unwrap();
        assert_eq!(u.lambda, 2);
        assert_eq!(u.kind, DesignKind::BIBD);
        assert_eq!(u.blocks[0].points(), &[1, 2, 3]);
        assert!(u.underlying().is_err());
        let empty = LabeledDesign::new(PointSpace::plain(6), vec![], None, 1, DesignKind::DD).unwrap();
        assert_eq!(empty.underlying().unwrap().num_blocks(), 0);
    }

    #[test]
    fn partition_must_cover() {
        let r = LabeledDesign::new(
            PointSpace::plain(4),
            vec![],
            Some(vec![vec![0, 1], vec![2]]),
            1,
            DesignKind::DGDD,
        );
        assert!(r.is_err());
    }
}
