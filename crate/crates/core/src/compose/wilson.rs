//! Weighting, block replacement and group filling.

use std::collections::BTreeMap;

use crate::compose::td::{checked_directed, checked_unordered};
use crate::design::{DesignKind, GroupType, Label, LabeledDesign, OrderedBlock, PointSpace};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::trades::{defining_bound_with, BoundMode, TradeCertificate, TradeEdge, VcLimits};
use crate::verify::{verify_directed, Report};

/// Per-point weights; points without an explicit weight take the default.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightAssignment {
    pub default: u32,
    pub per_point: BTreeMap<u32, u32>,
}

impl WeightAssignment {
    pub fn uniform(alpha: u32) -> Self {
        WeightAssignment {
            default: alpha,
            per_point: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, point: u32, w: u32) {
        self.per_point.insert(point, w);
    }

    pub fn weight(&self, point: u32) -> u32 {
        self.per_point.get(&point).copied().unwrap_or(self.default)
    }
}

/// Verified ingredients, looked up by group type.
#[derive(Clone, Debug, Default)]
pub struct IngredientRegistry {
    entries: Vec<(String, LabeledDesign)>,
}

impl IngredientRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Verifies `d` and stores it under `name`.
    pub fn insert(&mut self, name: impl Into<String>, d: LabeledDesign) -> Result<()> {
        let d = if d.ordered {
            checked_directed(d)?
        } else {
            checked_unordered(d, &[])?
        };
        if d.partition.is_none() && d.kind != DesignKind::DD {
            return Err(Error::MissingPartition);
        }
        self.entries.push((name.into(), d));
        Ok(())
    }

    /// The ingredient with this group type; directed ones win over undirected ones.
    pub fn find(&self, sig: &GroupType) -> Option<usize> {
        let matching = |ordered: bool| {
            self.entries
                .iter()
                .position(|(_, d)| d.ordered == ordered && d.group_type().as_ref() == Some(sig))
        };
        matching(true).or_else(|| matching(false))
    }

    pub fn get(&self, i: usize) -> &LabeledDesign {
        &self.entries[i].1
    }

    pub fn name(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// How one weighted group is treated after block replacement.
#[derive(Clone, Debug)]
pub enum Filler {
    Keep,
    Design(LabeledDesign),
}

#[derive(Clone, Debug)]
pub struct CompositionRecipe {
    pub master: LabeledDesign,
    pub weights: WeightAssignment,
    pub registry: IngredientRegistry,
    /// New points adjoined before filling.
    pub added: usize,
    /// One entry per master group; empty means every group is kept.
    pub fillers: Vec<Filler>,
}

#[derive(Clone, Debug)]
pub struct Composition {
    pub design: LabeledDesign,
    pub report: Report,
    pub certificate: TradeCertificate,
    /// True when the certificate was assembled from ingredient certificates.
    pub translated: bool,
    /// Distinct group fillers, with their copy counts.
    pub fillers: Vec<FillerUse>,
}

#[derive(Clone, Debug)]
pub struct FillerUse {
    pub design: LabeledDesign,
    pub copies: usize,
    /// The filler's own trade-graph bound, already counted in the certificate.
    pub trade_bound: usize,
}

impl Composition {
    /// Certificate bound with each filler copy counted at `floor(filler)` when that exceeds
    /// its trade-graph bound.
    ///
    /// A defining set meets every filler copy in a defining set of that copy, since any
    /// other design on the copy's points could replace it. So a lower bound for the
    /// filler's defining sets found by other means (such as completion search) adds up
    /// across copies like the trade-graph bounds do.
    /// A directly computed certificate is returned unchanged.
    pub fn bound_with_floors(&self, floor: impl Fn(&LabeledDesign) -> usize) -> usize {
        if !self.translated {
            return self.certificate.bound;
        }
        self.certificate.bound
            + self
                .fillers
                .iter()
                .map(|u| u.copies * floor(&u.design).saturating_sub(u.trade_bound))
                .sum::<usize>()
    }
}

/// A copy of a source design placed into the output.
struct Piece {
    source: Source,
    /// Index of the copy's first block in the output.
    offset: u32,
    /// Source point index to output point index.
    map: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Source {
    Ingredient(usize),
    /// An undirected ingredient ordered along a directed master block.
    Lifted,
    /// Not a directed design, so it contributes no trades.
    Undirected,
    Filler(usize),
    /// Blocks carried over from an input DGDD.
    Base,
}

/// Weights the master, replaces every block by an ingredient and fills the groups.
pub fn wilson_compose(recipe: &CompositionRecipe, exec: Exec) -> Result<Composition> {
    let master = &recipe.master;
    let groups: Vec<Vec<u32>> = match &master.partition {
        Some(g) => g.clone(),
        None => (0..master.v() as u32).map(|p| vec![p]).collect(),
    };
    if !recipe.fillers.is_empty() && recipe.fillers.len() != groups.len() {
        return Err(Error::SizeMismatch(format!(
            "{} fillers for {} master groups",
            recipe.fillers.len(),
            groups.len()
        )));
    }
    if master.ordered && master.lambda != 1 {
        return Err(Error::Precondition("directed master must have lambda 1".into()));
    }

    // Fibers: point (x, j) for j < w(x), in master point order.
    let mut labels = Vec::new();
    let mut fiber = vec![0u32; master.v()];
    for x in 0..master.v() as u32 {
        fiber[x as usize] = labels.len() as u32;
        for j in 0..recipe.weights.weight(x) {
            labels.push(Label::Pair(x as i64, j as i64));
        }
    }
    let w = |x: u32| recipe.weights.weight(x);

    let lift = lift_plan(recipe, exec);
    let per_block = exec.map_range(master.num_blocks(), |i| {
        let bind = lift.as_ref().map(|l| l.bindings[i].as_slice());
        replace_block(recipe, &master.blocks[i], bind, &fiber, &w)
    });
    let mut blocks = Vec::new();
    let mut pieces = Vec::new();
    for r in per_block {
        for (source, map, bs) in r? {
            pieces.push(Piece {
                source,
                offset: blocks.len() as u32,
                map,
            });
            blocks.extend(bs);
        }
    }

    let weighted_groups: Vec<Vec<u32>> = groups
        .iter()
        .map(|g| {
            g.iter()
                .flat_map(|&x| fiber[x as usize]..fiber[x as usize] + w(x))
                .collect()
        })
        .collect();
    let all_kept = recipe.fillers.iter().all(|f| matches!(f, Filler::Keep));
    let any_kept = recipe.fillers.is_empty() || recipe.fillers.iter().any(|f| matches!(f, Filler::Keep));

    let space = PointSpace::new(labels)?;
    let mut ingredient_certs = ingredient_certificates(recipe, &pieces, exec);
    if let Some(l) = &lift {
        ingredient_certs.push((Source::Lifted, l.lifted_certificate(master, &pieces, &blocks)?));
    }
    if all_kept {
        if recipe.added > 0 {
            return Err(Error::Precondition("added points need fillers for every group".into()));
        }
        let design = LabeledDesign::new(space, blocks, Some(weighted_groups), 1, DesignKind::DGDD)?;
        return finish(design, pieces, &ingredient_certs, Vec::new(), exec);
    }
    if any_kept {
        return Err(Error::Precondition("either every group is filled or none is".into()));
    }
    let base = LabeledDesign {
        space,
        blocks,
        partition: Some(weighted_groups),
        lambda: 1,
        kind: DesignKind::DGDD,
        ordered: true,
    };
    let fillers: Vec<LabeledDesign> = recipe
        .fillers
        .iter()
        .map(|f| match f {
            Filler::Design(d) => d.clone(),
            Filler::Keep => unreachable!("checked above"),
        })
        .collect();
    fill_pieces(base, pieces, &ingredient_certs, recipe.added, &fillers, exec)
}

type Replaced = Vec<(Source, Vec<u32>, Vec<OrderedBlock>)>;

fn replace_block(
    recipe: &CompositionRecipe,
    b: &OrderedBlock,
    binding: Option<&[usize]>,
    fiber: &[u32],
    w: &impl Fn(u32) -> u32,
) -> Result<Replaced> {
    let pts: Vec<u32> = b.points().iter().copied().filter(|&x| w(x) > 0).collect();
    if pts.len() < 2 {
        return Ok(Vec::new());
    }
    let sig = GroupType::from_sizes(pts.iter().map(|&x| w(x)));
    let idx = recipe
        .registry
        .find(&sig)
        .ok_or_else(|| Error::MissingIngredient(sig.to_string()))?;
    let ing = recipe.registry.get(idx);
    let igroups = ing.partition.as_ref().ok_or(Error::MissingPartition)?;
    // Bind ingredient groups to master points in block order unless a binding is given.
    let mut used = vec![false; igroups.len()];
    let mut map = vec![u32::MAX; ing.v()];
    let mut rank = vec![usize::MAX; ing.v()];
    for (pos, &x) in pts.iter().enumerate() {
        let fits = |gi: usize| !used[gi] && igroups[gi].len() as u32 == w(x);
        let gi = match binding {
            Some(bind) => Some(bind[pos]).filter(|&gi| fits(gi)),
            None => (0..igroups.len()).find(|&gi| fits(gi)),
        }
        .ok_or_else(|| Error::MissingIngredient(sig.to_string()))?;
        used[gi] = true;
        for (j, &p) in igroups[gi].iter().enumerate() {
            map[p as usize] = fiber[x as usize] + j as u32;
            rank[p as usize] = pos;
        }
    }
    let image = |blk: &OrderedBlock| blk.map(|p| map[p as usize]);
    match (recipe.master.ordered, ing.ordered) {
        (false, true) => {
            let bs = ing.blocks.iter().map(image).collect::<Result<Vec<_>>>()?;
            Ok(vec![(Source::Ingredient(idx), map, bs)])
        }
        (true, false) => {
            // Direction comes from the master block.
            let bs = ing
                .blocks
                .iter()
                .map(|blk| {
                    let mut pts = blk.points().to_vec();
                    pts.sort_by_key(|&p| rank[p as usize]);
                    OrderedBlock::new(pts.iter().map(|&p| map[p as usize]).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![(Source::Lifted, map, bs)])
        }
        (false, false) => {
            let mut bs = Vec::with_capacity(2 * ing.num_blocks());
            for blk in &ing.blocks {
                let fwd = image(blk)?;
                bs.push(fwd.reversed());
                bs.insert(bs.len() - 1, fwd);
            }
            Ok(vec![(Source::Undirected, map, bs)])
        }
        (true, true) => Err(Error::Precondition(
            "a directed master needs undirected ingredients; directed ones would cover pairs twice".into(),
        )),
    }
}

/// Per-block group bindings for an undirected ingredient on a directed master.
///
/// A volume-two trade between master blocks `b1`, `b2` sharing points `P`, `Q` lifts to
/// the ingredient copies: the copy blocks of `b1` and `b2` agreeing on the fibers of `P`
/// and `Q` form a trade, and the replacement blocks follow the master replacement. When
/// both copies bind `P` and `Q` to the same ingredient groups, the copy blocks agree
/// exactly when they are the same ingredient block, so the lifted trade graph is one copy
/// of the master trade graph per ingredient block.
struct LiftPlan {
    bindings: Vec<Vec<usize>>,
    master: TradeCertificate,
    per_copy: usize,
}

fn lift_plan(recipe: &CompositionRecipe, exec: Exec) -> Option<LiftPlan> {
    let master = &recipe.master;
    if !master.ordered || master.kind != DesignKind::DGDD {
        return None;
    }
    let k = master.blocks.first()?.len();
    let w = recipe.weights.weight(0);
    if w == 0
        || master.blocks.iter().any(|b| b.len() != k)
        || (0..master.v() as u32).any(|x| recipe.weights.weight(x) != w)
    {
        return None;
    }
    let ing = recipe
        .registry
        .get(recipe.registry.find(&GroupType::from_sizes(vec![w; k]))?);
    if ing.ordered || ing.blocks.iter().any(|b| b.len() != k) {
        return None;
    }
    let mc = defining_bound_with(master, BoundMode::ExactVc, VcLimits::default(), exec);
    let bindings = align_bindings(master, &mc, k)?;
    Some(LiftPlan {
        bindings,
        master: mc,
        per_copy: ing.num_blocks(),
    })
}

/// Colours block positions with ingredient groups so that every block uses each group
/// once and trade-adjacent blocks agree on their common points.
fn align_bindings(master: &LabeledDesign, mc: &TradeCertificate, k: usize) -> Option<Vec<Vec<usize>>> {
    let n = master.num_blocks();
    let mut parent: Vec<usize> = (0..n * k).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &mc.edges {
        let (bi, bj) = (&master.blocks[e.i as usize], &master.blocks[e.j as usize]);
        for (pi, &x) in bi.points().iter().enumerate() {
            if let Some(pj) = bj.points().iter().position(|&y| y == x) {
                let (a, b) = (
                    root(&mut parent, e.i as usize * k + pi),
                    root(&mut parent, e.j as usize * k + pj),
                );
                parent[a] = b;
            }
        }
    }
    let mut class_of = vec![usize::MAX; n * k];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (inc, slot) in class_of.iter_mut().enumerate() {
        let r = root(&mut parent, inc);
        let c = *index.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        *slot = c;
        classes[c].push(inc);
    }
    // A class meeting one block twice would need two groups at once.
    let mut conflicts: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for b in 0..n {
        let cs: Vec<usize> = (0..k).map(|p| class_of[b * k + p]).collect();
        for (i, &a) in cs.iter().enumerate() {
            for &c in &cs[i + 1..] {
                if a == c {
                    return None;
                }
                conflicts[a].push(c);
                conflicts[c].push(a);
            }
        }
    }
    for c in &mut conflicts {
        c.sort_unstable();
        c.dedup();
    }
    let colour = colour_classes(&conflicts, k, 1_000_000)?;
    Some(
        (0..n)
            .map(|b| (0..k).map(|p| colour[class_of[b * k + p]]).collect())
            .collect(),
    )
}

/// Backtracking colouring, most constrained class first.
fn colour_classes(adj: &[Vec<usize>], k: usize, budget: u64) -> Option<Vec<usize>> {
    fn go(adj: &[Vec<usize>], k: usize, colour: &mut [usize], left: usize, nodes: &mut u64) -> bool {
        if left == 0 {
            return true;
        }
        if *nodes == 0 {
            return false;
        }
        *nodes -= 1;
        let forbidden = |v: usize, colour: &[usize]| {
            let mut f = vec![false; k];
            for &u in &adj[v] {
                if colour[u] < k {
                    f[colour[u]] = true;
                }
            }
            f
        };
        let v = (0..adj.len())
            .filter(|&v| colour[v] == usize::MAX)
            .max_by_key(|&v| {
                (
                    forbidden(v, colour).iter().filter(|&&x| x).count(),
                    adj[v].len(),
                    std::cmp::Reverse(v),
                )
            })
            .expect("uncoloured class");
        let f = forbidden(v, colour);
        for c in (0..k).filter(|&c| !f[c]) {
            colour[v] = c;
            if go(adj, k, colour, left - 1, nodes) {
                return true;
            }
        }
        colour[v] = usize::MAX;
        false
    }
    let mut colour = vec![usize::MAX; adj.len()];
    let mut nodes = budget;
    go(adj, k, &mut colour, adj.len(), &mut nodes).then_some(colour)
}

impl LiftPlan {
    /// Master certificate copied once per ingredient block, in output coordinates.
    fn lifted_certificate(
        &self,
        master: &LabeledDesign,
        pieces: &[Piece],
        blocks: &[OrderedBlock],
    ) -> Result<TradeCertificate> {
        let mut phi = vec![u32::MAX; master.v()];
        let mut edges = Vec::new();
        for e in &self.master.edges {
            let (oi, oj) = (pieces[e.i as usize].offset, pieces[e.j as usize].offset);
            for beta in 0..self.per_copy as u32 {
                for (b, t) in [(e.i, oi + beta), (e.j, oj + beta)] {
                    for (&x, &y) in master.blocks[b as usize]
                        .points()
                        .iter()
                        .zip(blocks[t as usize].points())
                    {
                        phi[x as usize] = y;
                    }
                }
                edges.push(TradeEdge {
                    i: oi + beta,
                    j: oj + beta,
                    witness: (
                        e.witness.0.map(|x| phi[x as usize])?,
                        e.witness.1.map(|x| phi[x as usize])?,
                    ),
                });
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        let cycles = (0..self.per_copy as u32)
            .flat_map(|beta| {
                self.master
                    .cycles
                    .iter()
                    .map(move |c| c.iter().map(|&b| pieces[b as usize].offset + beta).collect())
            })
            .collect();
        Ok(TradeCertificate {
            mode: BoundMode::ExactVc,
            blocks: blocks.len(),
            bound: self.master.bound * self.per_copy,
            fallback: self.master.fallback,
            edges,
            cycles,
        })
    }
}

/// Adds `m` points and fills each group of `dgdd` with the matching filler.
pub fn fill_groups(dgdd: &LabeledDesign, m: usize, fillers: &[LabeledDesign], exec: Exec) -> Result<Composition> {
    if dgdd.kind != DesignKind::DGDD {
        return Err(Error::Precondition(format!(
            "fill_groups expects a DGDD, got {}",
            dgdd.kind
        )));
    }
    let pieces = vec![Piece {
        source: Source::Base,
        offset: 0,
        map: (0..dgdd.v() as u32).collect(),
    }];
    let base_cert = defining_bound_with(dgdd, BoundMode::ExactVc, VcLimits::default(), exec);
    fill_pieces(dgdd.clone(), pieces, &[(Source::Base, base_cert)], m, fillers, exec)
}

fn fill_pieces(
    base: LabeledDesign,
    mut pieces: Vec<Piece>,
    certs: &[(Source, TradeCertificate)],
    m: usize,
    fillers: &[LabeledDesign],
    exec: Exec,
) -> Result<Composition> {
    let groups = base.partition.clone().ok_or(Error::MissingPartition)?;
    if fillers.len() != groups.len() {
        return Err(Error::SizeMismatch(format!(
            "{} fillers for {} groups",
            fillers.len(),
            groups.len()
        )));
    }
    let v = base.v() as u32;
    let extra: Vec<Label> = (0u32..)
        .map(Label::Inf)
        .filter(|l| base.space.index_of(l).is_none())
        .take(m)
        .collect();
    let space = PointSpace::new(base.space.labels().iter().chain(&extra).copied().collect())?;
    let mut blocks = base.blocks;
    let mut certs = certs.to_vec();
    let mut uses: Vec<FillerUse> = Vec::new();
    for (gi, (g, f)) in groups.iter().zip(fillers).enumerate() {
        let map = filler_map(g, v, m, f).map_err(|e| match e {
            Error::SizeMismatch(s) => Error::SizeMismatch(format!("group {gi}: {s}")),
            e => e,
        })?;
        let r = verify_directed(f)?;
        if !r.passed() {
            return Err(Error::Verification(format!("filler for group {gi}:\n{r}")));
        }
        let offset = blocks.len() as u32;
        for b in &f.blocks {
            blocks.push(b.map(|p| map[p as usize])?);
        }
        // Identical fillers share one certificate.
        let key = (0..gi).find(|&h| fillers[h] == *f).unwrap_or(gi);
        if key == gi {
            let c = defining_bound_with(f, BoundMode::ExactVc, VcLimits::default(), exec);
            uses.push(FillerUse {
                design: f.clone(),
                copies: 0,
                trade_bound: c.bound,
            });
            certs.push((Source::Filler(gi), c));
        }
        if let Some(u) = uses.iter_mut().find(|u| u.design == *f) {
            u.copies += 1;
        }
        pieces.push(Piece {
            source: Source::Filler(key),
            offset,
            map,
        });
    }
    let design = LabeledDesign::new(space, blocks, None, 1, DesignKind::DD)?;
    finish(design, pieces, &certs, uses, exec)
}

/// Filler point index to output index: the group's points, then the added points.
fn filler_map(group: &[u32], v: u32, m: usize, f: &LabeledDesign) -> Result<Vec<u32>> {
    let want = group.len() + m;
    if f.v() != want {
        return Err(Error::SizeMismatch(format!(
            "filler has {} points, group of {} plus {m} added needs {want}",
            f.v(),
            group.len()
        )));
    }
    let added: Vec<u32> = (v..v + m as u32).collect();
    let mut map = vec![u32::MAX; f.v()];
    match (&f.kind, &f.partition) {
        (DesignKind::DD, _) => {
            for (p, &q) in group.iter().chain(&added).enumerate() {
                map[p] = q;
            }
        }
        (DesignKind::DGDD, Some(fg)) => {
            let hole = fg
                .iter()
                .position(|h| h.len() == m && fg.iter().filter(|x| x.len() != 1).count() <= 1)
                .filter(|_| fg.iter().all(|h| h.len() == 1 || h.len() == m))
                .ok_or_else(|| {
                    Error::SizeMismatch(format!(
                        "DGDD filler of type {} is not 1^{} {m}^1",
                        f.group_type().map(|t| t.to_string()).unwrap_or_default(),
                        group.len()
                    ))
                })?;
            for (j, &p) in fg[hole].iter().enumerate() {
                map[p as usize] = added[j];
            }
            let mut rest = group.iter();
            for m in map.iter_mut().filter(|m| **m == u32::MAX) {
                *m = *rest.next().expect("sizes checked");
            }
        }
        _ => {
            return Err(Error::Precondition(format!(
                "filler must be a DD or DGDD, got {}",
                f.kind
            )))
        }
    }
    Ok(map)
}

fn ingredient_certificates(
    recipe: &CompositionRecipe,
    pieces: &[Piece],
    exec: Exec,
) -> Vec<(Source, TradeCertificate)> {
    let mut used: Vec<usize> = pieces
        .iter()
        .filter_map(|p| match p.source {
            Source::Ingredient(i) => Some(i),
            _ => None,
        })
        .collect();
    used.sort_unstable();
    used.dedup();
    used.into_iter()
        .map(|i| {
            let c = defining_bound_with(recipe.registry.get(i), BoundMode::ExactVc, VcLimits::default(), exec);
            (Source::Ingredient(i), c)
        })
        .collect()
}

/// Verifies the output and attaches a certificate.
///
/// Trades inside a placed copy of a directed ingredient stay trades in the output, and
/// copies occupy disjoint block ranges, so the translated edge sets form a disjoint union
/// whose bound is the sum of the copies' bounds. Lifted master trades arrive already in
/// output coordinates. Without a certificate for every piece the trade graph of the
/// output is bounded directly instead.
fn finish(
    design: LabeledDesign,
    pieces: Vec<Piece>,
    certs: &[(Source, TradeCertificate)],
    fillers: Vec<FillerUse>,
    exec: Exec,
) -> Result<Composition> {
    let report = verify_directed(&design)?;
    if !report.passed() {
        return Err(Error::Verification(report.to_string()));
    }
    let covered = |s: Source| certs.iter().any(|(c, _)| *c == s);
    if pieces
        .iter()
        .any(|p| p.source == Source::Undirected || (p.source == Source::Lifted && !covered(Source::Lifted)))
    {
        let certificate = defining_bound_with(&design, BoundMode::ExactVc, VcLimits::default(), exec);
        return Ok(Composition {
            design,
            report,
            certificate,
            translated: false,
            fillers,
        });
    }
    let mut edges = Vec::new();
    let mut cycles = Vec::new();
    let mut bound = 0;
    let mut fallback = false;
    let identity = Piece {
        source: Source::Lifted,
        offset: 0,
        map: (0..design.v() as u32).collect(),
    };
    let lifted = pieces.iter().any(|p| p.source == Source::Lifted).then_some(&identity);
    for piece in pieces.iter().filter(|p| p.source != Source::Lifted).chain(lifted) {
        let Some((_, c)) = certs.iter().find(|(s, _)| *s == piece.source) else {
            continue;
        };
        bound += c.bound;
        fallback |= c.fallback;
        for e in &c.edges {
            edges.push(TradeEdge {
                i: e.i + piece.offset,
                j: e.j + piece.offset,
                witness: (
                    e.witness.0.map(|p| piece.map[p as usize])?,
                    e.witness.1.map(|p| piece.map[p as usize])?,
                ),
            });
        }
        for cyc in &c.cycles {
            cycles.push(cyc.iter().map(|&x| x + piece.offset).collect());
        }
    }
    edges.sort_by_key(|e| (e.i, e.j));
    let certificate = TradeCertificate {
        mode: BoundMode::ExactVc,
        blocks: design.num_blocks(),
        bound,
        fallback,
        edges,
        cycles,
    };
    Ok(Composition {
        design,
        report,
        certificate,
        translated: true,
        fillers,
    })
}

/// A verified directed design taken as it is, with a directly computed certificate.
pub fn identity_composition(design: LabeledDesign, exec: Exec) -> Result<Composition> {
    let report = verify_directed(&design)?;
    if !report.passed() {
        return Err(Error::Verification(report.to_string()));
    }
    let certificate = defining_bound_with(&design, BoundMode::ExactVc, VcLimits::default(), exec);
    Ok(Composition {
        design,
        report,
        certificate,
        translated: false,
        fillers: Vec::new(),
    })
}

/// Replaces every block of a directed master by a TD(k, factor) on its fibers, ordered
/// along the master block: a DGDD whose groups are the master groups times `factor`.
pub fn product_expand(dgdd: &LabeledDesign, factor: u32, exec: Exec) -> Result<Composition> {
    if !dgdd.ordered || dgdd.kind != DesignKind::DGDD {
        return Err(Error::Precondition("product_expand expects a DGDD".into()));
    }
    let mut registry = IngredientRegistry::new();
    for k in dgdd.block_sizes() {
        let td = if factor == 1 {
            let groups = (0..k as u32).map(|i| vec![i]).collect();
            let block = OrderedBlock::new((0..k as u32).collect())?;
            LabeledDesign::new(PointSpace::plain(k), vec![block], Some(groups), 1, DesignKind::TD)?
        } else {
            crate::compose::td::td_from_mols(k, factor)?
        };
        registry.insert(format!("TD({k},{factor})"), td)?;
    }
    let recipe = CompositionRecipe {
        master: dgdd.clone(),
        weights: WeightAssignment::uniform(factor),
        registry,
        added: 0,
        fillers: Vec::new(),
    };
    wilson_compose(&recipe, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devel::{develop, parse_catalog};

    fn entry(file: &str, name: &str) -> LabeledDesign {
        let specs = parse_catalog(file).unwrap();
        develop(specs.iter().find(|s| s.name == name).unwrap()).unwrap()
    }

    fn dgdd_2_6() -> LabeledDesign {
        entry(include_str!("../../catalog/dgdd.ssd"), "DGDD(2^6)")
    }

    #[test]
    fn single_block_master_is_the_ingredient() {
        let master = LabeledDesign::new(
            PointSpace::plain(5),
            vec![OrderedBlock::new(vec![0, 1, 2, 3, 4]).unwrap()],
            Some((0..5).map(|i| vec![i]).collect()),
            1,
            DesignKind::GDD,
        )
        .unwrap();
        let mut registry = IngredientRegistry::new();
        let ing = entry(include_str!("../../catalog/dgdd.ssd"), "DGDD(4^5)");
        registry.insert("DGDD(4^5)", ing.clone()).unwrap();
        let recipe = CompositionRecipe {
            master,
            weights: WeightAssignment::uniform(4),
            registry,
            added: 0,
            fillers: Vec::new(),
        };
        let out = wilson_compose(&recipe, Exec::Sequential).unwrap();
        assert_eq!(out.design.num_blocks(), ing.num_blocks());
        assert!(out.translated);
        assert_eq!(
            out.certificate.bound,
            defining_bound_with(&ing, BoundMode::ExactVc, VcLimits::default(), Exec::Sequential).bound
        );
    }

    #[test]
    fn product_of_2_6() {
        let out = product_expand(&dgdd_2_6(), 5, Exec::default()).unwrap();
        assert_eq!(out.design.num_blocks(), 300);
        assert_eq!(out.design.group_type().unwrap().to_string(), "10^6");
        let same = product_expand(&dgdd_2_6(), 1, Exec::default()).unwrap();
        assert_eq!(same.design.num_blocks(), 12);
    }

    #[test]
    fn filler_size_mismatch() {
        let dd11 = entry(include_str!("../../catalog/dd.ssd"), "DD(11)");
        let err = fill_groups(&dgdd_2_6(), 0, &vec![dd11; 6], Exec::Sequential).unwrap_err();
        assert!(matches!(err, Error::SizeMismatch(_)), "{err}");
    }
}
