//! Catalog DSL and base-block development.
//!
//! A catalog text holds one or more `design` sections:
//!
//! ```text
//! design DGDD(5^7)
//! kind DGDD type 5^7
//! space mod 35
//! groups {i, i+7, i+14, i+21, i+28} for i in 0..6
//! develop +7 mod 35
//! base (21,17,5,6,15)
//! claims blocks=105 fnum=53 fden=105
//! ```
//!
//! Statements: `kind`, `k`, `space mod <g>` / `space <m>x<n>` / `space labels <a>..<b>`,
//! `infty <c>`, `groups {..} for i in ..`, `group: <labels>`, `develop <action>`,
//! `sub <rule>`, `base <tuple> [develop <action>] [count <n> [offset <o>]] [sub <rule>]..
//! [patch <tuple> -> <tuple>]..`, `block <tuple>`, `embed <name> on <labels>`,
//! `claims`, `note`. A line starting with `+ ` continues the previous `base`.
//!
//! Actions: `+t mod g`, `(+1 mod 3, +1 mod 37)` or `(-, +1 mod 5)` per coordinate,
//! `cycles 0..21 22..43 +2`. Rules: `INFj mod m {r:LABEL, ..}` (replace by residue of
//! the added value) and `INFj shift mod m` (index shifted by the added value).

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use crate::design::{DesignKind, GroupType, Label, LabeledDesign, OrderedBlock, PointSpace};
use crate::error::{Error, Result};
use crate::text::{strip_comment, Cursor};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitAction {
    /// `+step mod modulus` on integer labels.
    Cyclic { modulus: u64, step: u64 },
    /// One optional `(modulus, step)` per coordinate of pair labels; `None` is a fixed coordinate.
    Product(Vec<Option<(u64, u64)>>),
    /// Disjoint cycles of consecutive integer labels, advanced together by `step`.
    MultiCycle { cycles: Vec<(i64, i64)>, step: u64 },
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl OrbitAction {
    pub fn second_coordinate(modulus: u64) -> Self {
        OrbitAction::Product(vec![None, Some((modulus, 1))])
    }

    /// Number of distinct shifts before the action repeats.
    pub fn orbit_length(&self) -> u64 {
        match self {
            OrbitAction::Cyclic { modulus, step } => modulus / gcd(*modulus, *step),
            OrbitAction::Product(parts) => parts.iter().flatten().map(|(m, t)| m / gcd(*m, *t)).product(),
            OrbitAction::MultiCycle { cycles, step } => {
                let len = (cycles[0].1 - cycles[0].0 + 1) as u64;
                len / gcd(len, *step)
            }
        }
    }

    /// Value added at iteration `s`, the key for substitution rules.
    pub fn added_value(&self, s: u64) -> u64 {
        match self {
            OrbitAction::Cyclic { modulus, step } => (s * step) % modulus,
            OrbitAction::MultiCycle { cycles, step } => {
                let len = (cycles[0].1 - cycles[0].0 + 1) as u64;
                (s * step) % len
            }
            OrbitAction::Product(_) => s,
        }
    }

    fn apply(&self, l: Label, s: u64) -> Result<Label> {
        if s == 0 {
            return Ok(l);
        }
        match (self, l) {
            (_, Label::Inf(_)) => Ok(l),
            (OrbitAction::Cyclic { modulus, .. }, Label::Int(x)) => {
                let g = *modulus as i64;
                if !(0..g).contains(&x) {
                    return Err(Error::Develop(format!("label {x} is not a residue mod {g}")));
                }
                Ok(Label::Int((x + self.added_value(s) as i64) % g))
            }
            (OrbitAction::MultiCycle { cycles, .. }, Label::Int(x)) => {
                let add = self.added_value(s) as i64;
                for &(lo, hi) in cycles {
                    if (lo..=hi).contains(&x) {
                        let len = hi - lo + 1;
                        return Ok(Label::Int(lo + (x - lo + add) % len));
                    }
                }
                Ok(l)
            }
            (OrbitAction::Product(parts), Label::Pair(a, b)) => {
                if parts.len() != 2 {
                    return Err(Error::Develop("product action needs two coordinates".into()));
                }
                // Iteration index decomposes with the first coordinate outermost.
                let lens: Vec<u64> = parts.iter().map(|p| p.map_or(1, |(m, t)| m / gcd(m, t))).collect();
                let s0 = s / lens[1];
                let s1 = s % lens[1];
                let shift = |x: i64, part: Option<(u64, u64)>, k: u64| -> Result<i64> {
                    match part {
                        None => Ok(x),
                        Some((m, t)) => {
                            let m = m as i64;
                            if !(0..m).contains(&x) {
                                return Err(Error::Develop(format!("coordinate {x} is not a residue mod {m}")));
                            }
                            Ok((x + (k * t) as i64) % m)
                        }
                    }
                };
                Ok(Label::Pair(shift(a, parts[0], s0)?, shift(b, parts[1], s1)?))
            }
            _ => Err(Error::Develop(format!("action {self} cannot move label {l}"))),
        }
    }
}

impl fmt::Display for OrbitAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitAction::Cyclic { modulus, step } => write!(f, "+{step} mod {modulus}"),
            OrbitAction::Product(parts) => {
                let s: Vec<String> = parts
                    .iter()
                    .map(|p| match p {
                        None => "-".to_string(),
                        Some((m, t)) => format!("+{t} mod {m}"),
                    })
                    .collect();
                write!(f, "({})", s.join(", "))
            }
            OrbitAction::MultiCycle { cycles, step } => {
                f.write_str("cycles")?;
                for (lo, hi) in cycles {
                    write!(f, " {lo}..{hi}")?;
                }
                write!(f, " +{step}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubKind {
    /// Replace by the label keyed on `added value mod modulus`; unlisted residues keep the target.
    ByResidue { modulus: u64, map: Vec<(u64, Label)> },
    /// `INFj` becomes `INF((j + added value) mod modulus)`.
    ShiftIndex { modulus: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionRule {
    pub target: Label,
    pub kind: SubKind,
}

impl SubstitutionRule {
    fn replacement(&self, value: u64) -> Label {
        match &self.kind {
            SubKind::ByResidue { modulus, map } => {
                let r = value % modulus;
                map.iter().find(|(k, _)| *k == r).map_or(self.target, |(_, l)| *l)
            }
            SubKind::ShiftIndex { modulus } => match self.target {
                Label::Inf(j) => Label::Inf(((j as u64 + value) % modulus) as u32),
                other => other,
            },
        }
    }
}

impl fmt::Display for SubstitutionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SubKind::ByResidue { modulus, map } => {
                let parts: Vec<String> = map.iter().map(|(r, l)| format!("{r}:{l}")).collect();
                write!(f, "{} mod {modulus} {{{}}}", self.target, parts.join(", "))
            }
            SubKind::ShiftIndex { modulus } => write!(f, "{} shift mod {modulus}", self.target),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseBlockDirective {
    pub block: Vec<Label>,
    /// `None` uses the design default.
    pub action: Option<OrbitAction>,
    pub count: Option<u64>,
    pub offset: u64,
    pub subs: Vec<SubstitutionRule>,
    pub patches: Vec<(Vec<Label>, Vec<Label>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Directive {
    Base(BaseBlockDirective),
    /// A block taken verbatim.
    Block(Vec<Label>),
    /// Blocks of an earlier design, relabeled onto `labels` (point `i` goes to `labels[i]`).
    Embed {
        name: String,
        labels: Vec<Label>,
        blocks: Vec<Vec<Label>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceDecl {
    Mod(u64),
    Grid(u64, u64),
    Range(i64, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternTerm {
    /// `i + offset`
    Var(i64),
    /// `(i,*)`: every second coordinate.
    Row,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupDecl {
    Pattern {
        terms: Vec<PatternTerm>,
        iter: Vec<i64>,
        range: Option<(i64, i64)>,
    },
    Explicit(Vec<Label>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Claims {
    pub blocks: Option<usize>,
    pub f: Option<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub name: String,
    pub kind: DesignKind,
    pub signature: Option<GroupType>,
    pub k: usize,
    pub space: SpaceDecl,
    pub infinities: u32,
    pub groups: Vec<GroupDecl>,
    pub default_action: Option<OrbitAction>,
    pub subs: Vec<SubstitutionRule>,
    pub directives: Vec<Directive>,
    pub claims: Claims,
    pub notes: Vec<String>,
}

/// Where a developed block came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub directive: usize,
    pub iteration: u64,
    pub added: u64,
}

impl ConstructionSpec {
    pub fn point_space(&self) -> PointSpace {
        let base = match self.space {
            SpaceDecl::Mod(g) => PointSpace::residues(g),
            SpaceDecl::Grid(m, n) => PointSpace::grid(m, n),
            SpaceDecl::Range(a, b) => PointSpace::int_range(a, b),
        };
        base.with_infinities(self.infinities)
            .expect("declared spaces never contain infinity labels")
    }

    /// Groups as label lists, in declaration order.
    pub fn group_labels(&self) -> Vec<Vec<Label>> {
        let mut out = Vec::new();
        for g in &self.groups {
            match g {
                GroupDecl::Explicit(ls) => out.push(ls.clone()),
                GroupDecl::Pattern { terms, iter, .. } => {
                    for &i in iter {
                        let mut grp = Vec::new();
                        for t in terms {
                            match (t, self.space) {
                                (PatternTerm::Var(o), SpaceDecl::Mod(g)) => {
                                    grp.push(Label::Int((i + o).rem_euclid(g as i64)))
                                }
                                (PatternTerm::Var(o), _) => grp.push(Label::Int(i + o)),
                                (PatternTerm::Row, SpaceDecl::Grid(_, n)) => {
                                    grp.extend((0..n as i64).map(|b| Label::Pair(i, b)))
                                }
                                (PatternTerm::Row, _) => {}
                            }
                        }
                        out.push(grp);
                    }
                }
            }
        }
        out
    }

    pub fn base_count(&self) -> usize {
        self.directives
            .iter()
            .filter(|d| matches!(d, Directive::Base(_)))
            .count()
    }

    fn action_of<'a>(&'a self, d: &'a BaseBlockDirective) -> Option<&'a OrbitAction> {
        d.action.as_ref().or(self.default_action.as_ref())
    }
}

/// Develops every directive and attaches the group partition. Never deduplicates.
pub fn develop(spec: &ConstructionSpec) -> Result<LabeledDesign> {
    develop_with_provenance(spec).map(|(d, _)| d)
}

pub fn develop_with_provenance(spec: &ConstructionSpec) -> Result<(LabeledDesign, Vec<Provenance>)> {
    let space = spec.point_space();
    let mut blocks = Vec::new();
    let mut prov = Vec::new();
    let resolve = |ls: &[Label]| -> Result<OrderedBlock> {
        let pts = ls.iter().map(|l| space.resolve(l)).collect::<Result<Vec<_>>>()?;
        OrderedBlock::new(pts)
    };
    for (di, d) in spec.directives.iter().enumerate() {
        match d {
            Directive::Block(ls) => {
                blocks.push(resolve(ls)?);
                prov.push(Provenance {
                    directive: di,
                    iteration: 0,
                    added: 0,
                });
            }
            Directive::Embed { blocks: bs, .. } => {
                for ls in bs {
                    blocks.push(resolve(ls)?);
                    prov.push(Provenance {
                        directive: di,
                        iteration: 0,
                        added: 0,
                    });
                }
            }
            Directive::Base(b) => {
                let action = spec.action_of(b).ok_or_else(|| {
                    Error::Develop(format!("base block {} has no development action", show(&b.block)))
                })?;
                let len = action.orbit_length();
                let count = b.count.unwrap_or(len);
                let rules: Vec<&SubstitutionRule> = b.subs.iter().chain(spec.subs.iter()).collect();
                let mut developed = Vec::with_capacity(count as usize);
                for j in 0..count {
                    let s = (b.offset + j) % len;
                    let added = action.added_value(s);
                    let mut tuple = Vec::with_capacity(b.block.len());
                    for &l in &b.block {
                        let moved = match rules.iter().find(|r| r.target == l) {
                            Some(r) => r.replacement(added),
                            None => action.apply(l, s)?,
                        };
                        tuple.push(moved);
                    }
                    developed.push((tuple, s, added));
                }
                for (src, dst) in &b.patches {
                    let hit = developed.iter_mut().find(|(t, _, _)| t == src).ok_or_else(|| {
                        Error::Develop(format!(
                            "patch source {} does not occur in the orbit of {}",
                            show(src),
                            show(&b.block)
                        ))
                    })?;
                    hit.0 = dst.clone();
                }
                for (tuple, s, added) in developed {
                    let blk = resolve(&tuple).map_err(|e| {
                        Error::Develop(format!("developing {} gave {}: {e}", show(&b.block), show(&tuple)))
                    })?;
                    blocks.push(blk);
                    prov.push(Provenance {
                        directive: di,
                        iteration: s,
                        added,
                    });
                }
            }
        }
    }
    let partition = if spec.groups.is_empty() {
        None
    } else {
        Some(
            spec.group_labels()
                .iter()
                .map(|g| g.iter().map(|l| space.resolve(l)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let d = LabeledDesign {
        space,
        blocks,
        partition,
        lambda: 1,
        kind: spec.kind,
        ordered: spec.kind.is_ordered(),
    };
    d.validate()?;
    Ok((d, prov))
}

fn show(ls: &[Label]) -> String {
    let parts: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
    format!("({})", parts.join(","))
}

fn label_list_text(ls: &[Label]) -> String {
    // Runs of three or more consecutive labels of one kind collapse to `a..b`.
    let mut parts = Vec::new();
    let mut i = 0;
    while i < ls.len() {
        let mut j = i;
        while j + 1 < ls.len() && successor(ls[j]) == Some(ls[j + 1]) {
            j += 1;
        }
        if j - i >= 2 {
            parts.push(format!("{}..{}", ls[i], ls[j]));
        } else {
            for l in &ls[i..=j] {
                parts.push(l.to_string());
            }
        }
        i = j + 1;
    }
    parts.join(" ")
}

fn successor(l: Label) -> Option<Label> {
    match l {
        Label::Int(x) => Some(Label::Int(x + 1)),
        Label::Inf(j) => Some(Label::Inf(j + 1)),
        Label::Pair(..) => None,
    }
}

fn term_text(t: &PatternTerm) -> String {
    match t {
        PatternTerm::Var(0) => "i".into(),
        PatternTerm::Var(o) if *o > 0 => format!("i+{o}"),
        PatternTerm::Var(o) => format!("i-{}", -o),
        PatternTerm::Row => "(i,*)".into(),
    }
}

/// Canonical text of one spec; `parse_catalog(emit_spec(s))` yields `s` back.
pub fn emit_spec(s: &ConstructionSpec) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "design {}", s.name);
    match &s.signature {
        Some(t) => {
            let _ = writeln!(o, "kind {} type {t}", s.kind);
        }
        None => {
            let _ = writeln!(o, "kind {}", s.kind);
        }
    }
    if s.k != 5 {
        let _ = writeln!(o, "k {}", s.k);
    }
    let _ = match s.space {
        SpaceDecl::Mod(g) => writeln!(o, "space mod {g}"),
        SpaceDecl::Grid(m, n) => writeln!(o, "space {m}x{n}"),
        SpaceDecl::Range(a, b) => writeln!(o, "space labels {a}..{b}"),
    };
    if s.infinities > 0 {
        let _ = writeln!(o, "infty {}", s.infinities);
    }
    for g in &s.groups {
        match g {
            GroupDecl::Explicit(ls) => {
                let _ = writeln!(o, "group: {}", label_list_text(ls));
            }
            GroupDecl::Pattern { terms, iter, range } => {
                let ts: Vec<String> = terms.iter().map(term_text).collect();
                let it = match range {
                    Some((a, b)) => format!("{a}..{b}"),
                    None => iter.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
                };
                let _ = writeln!(o, "groups {{{}}} for i in {it}", ts.join(", "));
            }
        }
    }
    if let Some(a) = &s.default_action {
        let _ = writeln!(o, "develop {a}");
    }
    for r in &s.subs {
        let _ = writeln!(o, "sub {r}");
    }
    for d in &s.directives {
        match d {
            Directive::Block(ls) => {
                let _ = writeln!(o, "block {}", show(ls));
            }
            Directive::Embed { name, labels, .. } => {
                let _ = writeln!(o, "embed {name} on {}", label_list_text(labels));
            }
            Directive::Base(b) => {
                o.push_str("base ");
                o.push_str(&show(&b.block));
                if let Some(a) = &b.action {
                    let _ = write!(o, " develop {a}");
                }
                if let Some(c) = b.count {
                    let _ = write!(o, " count {c}");
                    if b.offset != 0 {
                        let _ = write!(o, " offset {}", b.offset);
                    }
                }
                for r in &b.subs {
                    let _ = write!(o, " sub {r}");
                }
                o.push('\n');
                for (src, dst) in &b.patches {
                    let _ = writeln!(o, "+ patch {} -> {}", show(src), show(dst));
                }
            }
        }
    }
    if s.claims.blocks.is_some() || s.claims.f.is_some() {
        o.push_str("claims");
        if let Some(b) = s.claims.blocks {
            let _ = write!(o, " blocks={b}");
        }
        if let Some((p, q)) = s.claims.f {
            let _ = write!(o, " fnum={p} fden={q}");
        }
        o.push('\n');
    }
    for n in &s.notes {
        let _ = writeln!(o, "note {n}");
    }
    o
}

/// Emits a whole catalog, sections separated by a blank line.
pub fn emit_catalog(specs: &[ConstructionSpec]) -> String {
    specs.iter().map(emit_spec).collect::<Vec<_>>().join("\n")
}

/// Emission followed by parsing; identity on valid specs.
pub fn roundtrip(specs: &[ConstructionSpec]) -> Result<Vec<ConstructionSpec>> {
    parse_catalog(&emit_catalog(specs))
}

/// Parses a catalog text; `embed` may refer to designs earlier in the same text.
pub fn parse_catalog(text: &str) -> Result<Vec<ConstructionSpec>> {
    parse_catalog_with(text, &[])
}

/// Like [`parse_catalog`], with extra designs available to `embed`.
pub fn parse_catalog_with(text: &str, known: &[ConstructionSpec]) -> Result<Vec<ConstructionSpec>> {
    let mut out: Vec<ConstructionSpec> = Vec::new();
    let mut cur: Option<Builder> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = strip_comment(raw);
        let mut c = Cursor::new(line, line_no);
        if c.at_end() {
            continue;
        }
        if c.eat_str("design ") || line.trim() == "design" {
            if let Some(b) = cur.take() {
                out.push(b.finish()?);
            }
            let name = c.rest().trim();
            if name.is_empty() {
                return Err(c.err("design needs a name"));
            }
            if out.iter().any(|s| s.name == name) {
                return Err(c.err(format!("duplicate design name `{name}`")));
            }
            cur = Some(Builder::new(name.to_string(), line_no));
            continue;
        }
        let b = cur
            .as_mut()
            .ok_or_else(|| c.err("statement outside of a `design` section"))?;
        b.statement(&mut c, &out, known)?;
    }
    if let Some(b) = cur.take() {
        out.push(b.finish()?);
    }
    Ok(out)
}

struct Builder {
    line: usize,
    name: String,
    kind: Option<DesignKind>,
    signature: Option<GroupType>,
    k: usize,
    space: Option<SpaceDecl>,
    infinities: u32,
    point_space: Option<PointSpace>,
    groups: Vec<GroupDecl>,
    default_action: Option<OrbitAction>,
    subs: Vec<SubstitutionRule>,
    directives: Vec<Directive>,
    claims: Claims,
    notes: Vec<String>,
}

impl Builder {
    fn new(name: String, line: usize) -> Self {
        Builder {
            line,
            name,
            kind: None,
            signature: None,
            k: 5,
            space: None,
            infinities: 0,
            point_space: None,
            groups: Vec::new(),
            default_action: None,
            subs: Vec::new(),
            directives: Vec::new(),
            claims: Claims::default(),
            notes: Vec::new(),
        }
    }

    fn space(&mut self, c: &Cursor<'_>) -> Result<&PointSpace> {
        if self.point_space.is_none() {
            let decl = self.space.ok_or_else(|| c.err("`space` must be declared first"))?;
            let base = match decl {
                SpaceDecl::Mod(g) => PointSpace::residues(g),
                SpaceDecl::Grid(m, n) => PointSpace::grid(m, n),
                SpaceDecl::Range(a, b) => PointSpace::int_range(a, b),
            };
            self.point_space = Some(base.with_infinities(self.infinities)?);
        }
        Ok(self.point_space.as_ref().expect("just set"))
    }

    fn check_labels(&mut self, c: &Cursor<'_>, ls: &[Label]) -> Result<()> {
        let sp = self.space(c)?;
        for l in ls {
            if sp.index_of(l).is_none() {
                return Err(c.err(format!("unknown label {l}")));
            }
        }
        Ok(())
    }

    fn block_tuple(&mut self, c: &mut Cursor<'_>) -> Result<Vec<Label>> {
        let t = c.tuple()?;
        if t.len() != self.k {
            return Err(c.err(format!("tuple has {} entries, expected {}", t.len(), self.k)));
        }
        let distinct: HashSet<&Label> = t.iter().collect();
        if distinct.len() != t.len() {
            return Err(c.err("tuple repeats a point"));
        }
        self.check_labels(c, &t)?;
        Ok(t)
    }

    fn statement(&mut self, c: &mut Cursor<'_>, done: &[ConstructionSpec], known: &[ConstructionSpec]) -> Result<()> {
        if c.eat('+') {
            return self.continuation(c);
        }
        let kw = c.word().ok_or_else(|| c.err("expected a statement keyword"))?;
        match kw {
            "kind" => {
                let w = c.word().ok_or_else(|| c.err("expected design kind"))?;
                let kind: DesignKind = w.parse().map_err(|e: Error| c.err(e.to_string()))?;
                if !kind.is_ordered() {
                    return Err(c.err("catalog designs must be DD or DGDD"));
                }
                self.kind = Some(kind);
                if c.eat_str("type") {
                    let sig: GroupType = c.rest().parse().map_err(|e: Error| c.err(e.to_string()))?;
                    self.signature = Some(sig);
                } else if !c.at_end() {
                    return Err(c.err("expected `type` or end of line"));
                }
                Ok(())
            }
            "k" => {
                self.k = c.uint()? as usize;
                if self.k < 2 {
                    return Err(c.err("block size must be at least 2"));
                }
                self.end(c)
            }
            "space" => {
                if self.space.is_some() {
                    return Err(c.err("space declared twice"));
                }
                let decl = if c.eat_str("mod") {
                    SpaceDecl::Mod(c.uint()?)
                } else if c.eat_str("labels") {
                    let a = c.int()?;
                    c.expect_str("..")?;
                    let b = c.int()?;
                    if b < a {
                        return Err(c.err("empty label range"));
                    }
                    SpaceDecl::Range(a, b)
                } else {
                    let m = c.uint()?;
                    c.expect('x')?;
                    SpaceDecl::Grid(m, c.uint()?)
                };
                if matches!(decl, SpaceDecl::Mod(0) | SpaceDecl::Grid(0, _) | SpaceDecl::Grid(_, 0)) {
                    return Err(c.err("space must be nonempty"));
                }
                self.space = Some(decl);
                self.end(c)
            }
            "infty" => {
                if self.point_space.is_some() {
                    return Err(c.err("`infty` must precede groups and blocks"));
                }
                self.infinities = c.uint()? as u32;
                self.end(c)
            }
            "groups" => {
                c.expect('{')?;
                let mut terms = Vec::new();
                loop {
                    if c.eat('(') {
                        c.expect_str("i")?;
                        c.expect(',')?;
                        c.expect('*')?;
                        c.expect(')')?;
                        terms.push(PatternTerm::Row);
                    } else {
                        c.expect_str("i")?;
                        let off = if c.eat('+') {
                            c.int()?
                        } else if c.eat('-') {
                            -c.int()?
                        } else {
                            0
                        };
                        terms.push(PatternTerm::Var(off));
                    }
                    if c.eat('}') {
                        break;
                    }
                    c.expect(',')?;
                }
                c.expect_str("for")?;
                c.expect_str("i")?;
                c.expect_str("in")?;
                let first = c.int()?;
                let (iter, range) = if c.eat_str("..") {
                    let last = c.int()?;
                    if last < first {
                        return Err(c.err("empty index range"));
                    }
                    ((first..=last).collect(), Some((first, last)))
                } else {
                    let mut v = vec![first];
                    while c.eat(',') {
                        v.push(c.int()?);
                    }
                    (v, None)
                };
                self.end(c)?;
                let decl = GroupDecl::Pattern { terms, iter, range };
                let tmp = self.probe();
                let mut probe = tmp;
                probe.groups = vec![decl.clone()];
                for g in probe.group_labels() {
                    self.check_labels(c, &g)?;
                }
                self.groups.push(decl);
                Ok(())
            }
            "group" => {
                c.expect(':')?;
                let ls = label_list(c)?;
                self.check_labels(c, &ls)?;
                self.groups.push(GroupDecl::Explicit(ls));
                Ok(())
            }
            "develop" => {
                if self.default_action.is_some() {
                    return Err(c.err("default action declared twice"));
                }
                self.default_action = Some(action(c)?);
                self.end(c)
            }
            "sub" => {
                let r = rule(c)?;
                self.check_rule(c, &r)?;
                self.subs.push(r);
                self.end(c)
            }
            "base" => {
                let block = self.block_tuple(c)?;
                let mut d = BaseBlockDirective {
                    block,
                    action: None,
                    count: None,
                    offset: 0,
                    subs: Vec::new(),
                    patches: Vec::new(),
                };
                while !c.at_end() {
                    let w = c.word().ok_or_else(|| c.err("expected a directive option"))?;
                    self.option(c, w, &mut d)?;
                }
                self.check_directive(c, &d)?;
                self.directives.push(Directive::Base(d));
                Ok(())
            }
            "block" => {
                let t = self.block_tuple(c)?;
                self.directives.push(Directive::Block(t));
                self.end(c)
            }
            "embed" => {
                let rest = c.rest();
                let at = rest
                    .find(" on ")
                    .ok_or_else(|| c.err("expected `embed <name> on <labels>`"))?;
                let name = rest[..at].trim().to_string();
                let mut lc = Cursor::new(&rest[at + 4..], 0);
                let labels = label_list(&mut lc).map_err(|_| c.err("bad label list in embed"))?;
                self.check_labels(c, &labels)?;
                let src = done
                    .iter()
                    .chain(known.iter())
                    .find(|s| s.name == name)
                    .ok_or_else(|| c.err(format!("embed refers to unknown design `{name}`")))?;
                let inner = develop(src).map_err(|e| c.err(format!("embedding `{name}`: {e}")))?;
                if inner.v() != labels.len() {
                    return Err(c.err(format!(
                        "`{name}` has {} points but {} labels were given",
                        inner.v(),
                        labels.len()
                    )));
                }
                let blocks = inner
                    .blocks
                    .iter()
                    .map(|b| b.points().iter().map(|&p| labels[p as usize]).collect())
                    .collect();
                self.directives.push(Directive::Embed { name, labels, blocks });
                Ok(())
            }
            "claims" => {
                let (mut fnum, mut fden) = (None, None);
                while !c.at_end() {
                    let key = c.word().ok_or_else(|| c.err("expected key=value"))?;
                    c.expect('=')?;
                    let val = c.uint()?;
                    match key {
                        "blocks" => self.claims.blocks = Some(val as usize),
                        "fnum" => fnum = Some(val),
                        "fden" => fden = Some(val),
                        _ => return Err(c.err(format!("unknown claim `{key}`"))),
                    }
                }
                match (fnum, fden) {
                    (Some(p), Some(q)) if q > 0 => self.claims.f = Some((p, q)),
                    (None, None) => {}
                    _ => return Err(c.err("fnum and fden go together")),
                }
                Ok(())
            }
            "note" => {
                self.notes.push(c.rest().trim().to_string());
                Ok(())
            }
            other => Err(c.err(format!("unknown statement `{other}`"))),
        }
    }

    fn continuation(&mut self, c: &mut Cursor<'_>) -> Result<()> {
        let Some(Directive::Base(mut d)) = self.directives.pop() else {
            return Err(c.err("continuation line without a preceding `base`"));
        };
        while !c.at_end() {
            let w = c.word().ok_or_else(|| c.err("expected `patch` or `sub`"))?;
            if w != "patch" && w != "sub" {
                return Err(c.err("continuation lines may only add `patch` or `sub`"));
            }
            self.option(c, w, &mut d)?;
        }
        self.check_directive(c, &d)?;
        self.directives.push(Directive::Base(d));
        Ok(())
    }

    fn option(&mut self, c: &mut Cursor<'_>, w: &str, d: &mut BaseBlockDirective) -> Result<()> {
        match w {
            "develop" => d.action = Some(action(c)?),
            "count" => d.count = Some(c.uint()?),
            "offset" => d.offset = c.uint()?,
            "sub" => {
                let r = rule(c)?;
                self.check_rule(c, &r)?;
                d.subs.push(r);
            }
            "patch" => {
                let src = c.tuple()?;
                c.expect_str("->")?;
                let dst = self.block_tuple(c)?;
                if src.len() != self.k {
                    return Err(c.err("patch source has the wrong length"));
                }
                d.patches.push((src, dst));
            }
            other => return Err(c.err(format!("unknown option `{other}`"))),
        }
        Ok(())
    }

    fn check_rule(&mut self, c: &Cursor<'_>, r: &SubstitutionRule) -> Result<()> {
        if !matches!(r.target, Label::Inf(_)) {
            return Err(c.err("substitution rules may only target infinity labels"));
        }
        let mut ls = vec![r.target];
        match &r.kind {
            SubKind::ByResidue { map, .. } => ls.extend(map.iter().map(|(_, l)| *l)),
            SubKind::ShiftIndex { modulus } => {
                ls.extend((0..*modulus as u32).map(Label::Inf));
            }
        }
        self.check_labels(c, &ls)
    }

    fn check_directive(&self, c: &Cursor<'_>, d: &BaseBlockDirective) -> Result<()> {
        let a = d.action.as_ref().or(self.default_action.as_ref());
        let Some(a) = a else {
            return Err(c.err("base block without a development action"));
        };
        let len = a.orbit_length();
        if let Some(n) = d.count {
            if n == 0 || n > len {
                return Err(c.err(format!("count {n} outside 1..={len} (orbit length)")));
            }
        }
        if d.offset >= len {
            return Err(c.err(format!("offset {} not below orbit length {len}", d.offset)));
        }
        let mut seen = HashSet::new();
        for r in d.subs.iter().chain(self.subs.iter()) {
            if !seen.insert(r.target) && d.subs.iter().any(|x| x.target == r.target) {
                return Err(c.err(format!("conflicting substitution rules for {}", r.target)));
            }
        }
        Ok(())
    }

    fn end(&self, c: &mut Cursor<'_>) -> Result<()> {
        if c.at_end() {
            Ok(())
        } else {
            Err(c.err("unexpected trailing text"))
        }
    }

    fn probe(&self) -> ConstructionSpec {
        ConstructionSpec {
            name: self.name.clone(),
            kind: self.kind.unwrap_or(DesignKind::DD),
            signature: None,
            k: self.k,
            space: self.space.unwrap_or(SpaceDecl::Mod(1)),
            infinities: self.infinities,
            groups: Vec::new(),
            default_action: None,
            subs: Vec::new(),
            directives: Vec::new(),
            claims: Claims::default(),
            notes: Vec::new(),
        }
    }

    fn finish(self) -> Result<ConstructionSpec> {
        let here = |msg: String| Error::parse(self.line, 1, format!("design `{}`: {msg}", self.name));
        let kind = self.kind.ok_or_else(|| here("missing `kind`".into()))?;
        let space = self.space.ok_or_else(|| here("missing `space`".into()))?;
        let spec = ConstructionSpec {
            name: self.name.clone(),
            kind,
            signature: self.signature.clone(),
            k: self.k,
            space,
            infinities: self.infinities,
            groups: self.groups,
            default_action: self.default_action,
            subs: self.subs,
            directives: self.directives,
            claims: self.claims,
            notes: self.notes,
        };
        let v = spec.point_space().size();
        match kind {
            DesignKind::DGDD => {
                let groups = spec.group_labels();
                if groups.is_empty() {
                    return Err(here("a DGDD needs groups".into()));
                }
                let mut seen = HashSet::new();
                for l in groups.iter().flatten() {
                    if !seen.insert(*l) {
                        return Err(here(format!("label {l} lies in two groups")));
                    }
                }
                if seen.len() != v {
                    return Err(here(format!("groups cover {} of {v} points", seen.len())));
                }
                let t = GroupType::from_sizes(groups.iter().map(|g| g.len() as u32));
                if let Some(sig) = &spec.signature {
                    if *sig != t {
                        return Err(here(format!("declared type {sig} but groups give {t}")));
                    }
                }
            }
            _ => {
                if !spec.groups.is_empty() {
                    return Err(here("a DD has no groups".into()));
                }
            }
        }
        Ok(spec)
    }
}

fn label_list(c: &mut Cursor<'_>) -> Result<Vec<Label>> {
    let mut out = Vec::new();
    while !c.at_end() {
        let a = c.label()?;
        if c.eat_str("..") {
            let b = c.label()?;
            match (a, b) {
                (Label::Int(x), Label::Int(y)) if x <= y => out.extend((x..=y).map(Label::Int)),
                (Label::Inf(x), Label::Inf(y)) if x <= y => out.extend((x..=y).map(Label::Inf)),
                _ => return Err(c.err(format!("bad label range {a}..{b}"))),
            }
        } else {
            out.push(a);
        }
    }
    Ok(out)
}

fn step_mod(c: &mut Cursor<'_>) -> Result<(u64, u64)> {
    c.expect('+')?;
    let t = c.uint()?;
    c.expect_str("mod")?;
    let g = c.uint()?;
    if g == 0 || t == 0 {
        return Err(c.err("step and modulus must be positive"));
    }
    Ok((g, t))
}

fn action(c: &mut Cursor<'_>) -> Result<OrbitAction> {
    c.skip_ws();
    if c.eat('(') {
        let mut parts = Vec::new();
        loop {
            if c.eat('-') {
                parts.push(None);
            } else {
                parts.push(Some(step_mod(c)?));
            }
            if c.eat(')') {
                break;
            }
            c.expect(',')?;
        }
        if parts.len() != 2 {
            return Err(c.err("product actions have exactly two coordinates"));
        }
        return Ok(OrbitAction::Product(parts));
    }
    if c.eat_str("cycles") {
        let mut cycles = Vec::new();
        while !c.eat('+') {
            let a = c.int()?;
            c.expect_str("..")?;
            let b = c.int()?;
            if b <= a {
                return Err(c.err("cycle range must contain two or more labels"));
            }
            cycles.push((a, b));
        }
        let step = c.uint()?;
        if cycles.is_empty() || step == 0 {
            return Err(c.err("cycles need at least one range and a positive step"));
        }
        let len = cycles[0].1 - cycles[0].0;
        if cycles.iter().any(|(a, b)| b - a != len) {
            return Err(c.err("all cycles must have the same length"));
        }
        for (i, x) in cycles.iter().enumerate() {
            for y in &cycles[..i] {
                if x.0 <= y.1 && y.0 <= x.1 {
                    return Err(c.err("cycles overlap"));
                }
            }
        }
        return Ok(OrbitAction::MultiCycle { cycles, step });
    }
    let (g, t) = step_mod(c)?;
    Ok(OrbitAction::Cyclic { modulus: g, step: t })
}

fn rule(c: &mut Cursor<'_>) -> Result<SubstitutionRule> {
    let target = c.label()?;
    if c.eat_str("shift") {
        c.expect_str("mod")?;
        let modulus = c.uint()?;
        if modulus == 0 {
            return Err(c.err("modulus must be positive"));
        }
        return Ok(SubstitutionRule {
            target,
            kind: SubKind::ShiftIndex { modulus },
        });
    }
    c.expect_str("mod")?;
    let modulus = c.uint()?;
    if modulus == 0 {
        return Err(c.err("modulus must be positive"));
    }
    c.expect('{')?;
    let mut map = Vec::new();
    loop {
        let r = c.uint()?;
        if r >= modulus {
            return Err(c.err(format!("residue {r} not below {modulus}")));
        }
        c.expect(':')?;
        let l = c.label()?;
        if map.iter().any(|(k, _)| *k == r) {
            return Err(c.err(format!("residue {r} listed twice")));
        }
        map.push((r, l));
        if c.eat('}') {
            break;
        }
        c.expect(',')?;
    }
    Ok(SubstitutionRule {
        target,
        kind: SubKind::ByResidue { modulus, map },
    })
}
