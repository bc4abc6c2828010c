//! The built-in catalog: developed designs, composed designs, errata records, the audit
//! and the spectrum planner.
//!
//! Designs are built lazily and cached. Names are either catalog entries such as
//! `DGDD(4^8 6^1)` or `DD(61)`, or generated ingredients:
//!
//! * `TD(k,q)`: transversal design from GF(q);
//! * `twotd(k,q)`: DGDD of type q^k from two TD(k,q);
//! * `adjoin(X)`: add a point to every group of the TD `X`, then delete its point 0;
//! * `truncate(X,y)`: delete the last `y` points of the last group of the TD `X`;
//! * `delete(X)`: delete point 0 of the TD `X` read as a PBD whose groups are blocks.

mod audit;
mod plan;

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use crate::compose::{
    adjoin_and_delete, delete_point, dgdd_from_two_tds, parse_recipe, td_from_mols, truncate_td, Composition,
    DesignRef, RecipeSpec, Resolver,
};
use crate::design::{DesignKind, GroupType, LabeledDesign, OrderedBlock};
use crate::devel::{develop, parse_catalog_with, Claims, ConstructionSpec, Directive};
use crate::error::{Error, Result};
use crate::format::read_design;
use crate::par::Exec;
use crate::text::{strip_comment, Cursor};
use crate::trades::{defining_bound_with, defining_floor, BoundMode, Budget, Floor, TradeCertificate, VcLimits};

pub use audit::{audit_all, audit_entry, render_audit, AuditRow};
pub use plan::{spectrum_plan, PlanInput, PlanStatus, PlanStep, SpectrumPlan, INFERRED_RESIDUALS};

pub const DGDD_TEXT: &str = include_str!("../../catalog/dgdd.ssd");
pub const DD_TEXT: &str = include_str!("../../catalog/dd.ssd");
pub const COMPOSED_TEXT: &str = include_str!("../../catalog/composed.rcp");
pub const ERRATA_TEXT: &str = include_str!("../../catalog/errata.tsv");

/// Largest `v` for which the audit runs completion searches.
const COMPLETION_MAX_V: usize = 16;
/// Largest subset size the audit's completion searches enumerate.
const COMPLETION_MAX_SIZE: usize = 2;

/// A printed tuple that had to be corrected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Errata {
    pub entry: String,
    /// The tuple as printed, kept verbatim.
    pub printed: String,
    pub stored: String,
    pub justification: String,
}

#[derive(Clone, Debug)]
pub enum EntrySource {
    Spec(ConstructionSpec),
    Recipe(RecipeSpec),
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub source: EntrySource,
    pub claims: Claims,
    pub notes: Vec<String>,
    pub errata: Vec<Errata>,
}

impl CatalogEntry {
    pub fn is_composed(&self) -> bool {
        matches!(self.source, EntrySource::Recipe(_))
    }

    /// Group type of a DGDD entry.
    pub fn signature(&self) -> Option<GroupType> {
        if let EntrySource::Spec(s) = &self.source {
            if s.signature.is_some() {
                return s.signature.clone();
            }
        }
        self.name.strip_prefix("DGDD(")?.strip_suffix(')')?.parse().ok()
    }

    /// `v` of a `DD(v)` entry.
    pub fn dd_order(&self) -> Option<usize> {
        self.name.strip_prefix("DD(")?.strip_suffix(')')?.parse().ok()
    }

    pub fn family(&self) -> &'static str {
        match (self.is_composed(), self.dd_order().is_some()) {
            (false, false) => "DGDD",
            (false, true) => "DD",
            (true, false) => "composed DGDD",
            (true, true) => "composed DD",
        }
    }
}

/// A developed or composed entry.
#[derive(Clone, Debug)]
pub struct Built {
    pub design: LabeledDesign,
    /// Present for composed entries.
    pub composition: Option<Composition>,
}

/// The best lower bound the catalog knows for an entry's smallest defining set.
#[derive(Clone, Debug)]
pub struct LowerBound {
    pub certificate: TradeCertificate,
    /// The certificate bound, raised by completion floors where they are larger.
    pub bound: usize,
    /// Completion search on small block subsets, when it was run.
    pub completion: Option<Floor>,
}

type Cached<T> = OnceLock<std::result::Result<Arc<T>, String>>;

/// The catalog with its caches. Building entries is lazy and each entry is built once.
///
/// Composed entries resolve other entries while they are built, so building them from
/// several rayon jobs at once could block a worker on a cache that the same worker is
/// filling. [`audit_all`] therefore builds composed entries one at a time.
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    errata: Vec<Errata>,
    dirs: Vec<PathBuf>,
    exec: Exec,
    limits: VcLimits,
    budget: Budget,
    built: Vec<Cached<Built>>,
    bounds: Vec<Cached<LowerBound>>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Result<Catalog> {
        Catalog::from_texts(&[DGDD_TEXT, DD_TEXT], COMPOSED_TEXT, ERRATA_TEXT)
    }

    /// A catalog from design DSL texts, a composed-recipe text and an errata table.
    pub fn from_texts(spec_texts: &[&str], composed: &str, errata: &str) -> Result<Catalog> {
        let mut entries = Vec::new();
        let mut known: Vec<ConstructionSpec> = Vec::new();
        for text in spec_texts {
            let specs = parse_catalog_with(text, &known)?;
            known.extend(specs.iter().cloned());
            for s in specs {
                entries.push(CatalogEntry {
                    name: s.name.clone(),
                    claims: s.claims.clone(),
                    notes: s.notes.clone(),
                    source: EntrySource::Spec(s),
                    errata: Vec::new(),
                });
            }
        }
        entries.extend(parse_composed(composed)?);
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|f| f.name == e.name) {
                return Err(Error::Entry {
                    name: e.name.clone(),
                    msg: "defined twice".into(),
                });
            }
        }
        let errata = parse_errata(errata)?;
        for r in &errata {
            let e = entries
                .iter_mut()
                .find(|e| e.name == r.entry)
                .ok_or_else(|| Error::Entry {
                    name: r.entry.clone(),
                    msg: "errata row for an unknown entry".into(),
                })?;
            e.errata.push(r.clone());
        }
        let n = entries.len();
        Ok(Catalog {
            entries,
            errata,
            dirs: Vec::new(),
            exec: Exec::default(),
            limits: VcLimits::default(),
            budget: Budget::default(),
            built: (0..n).map(|_| OnceLock::new()).collect(),
            bounds: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_limits(mut self, limits: VcLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    /// Adds a directory searched for file references that are not found as given.
    pub fn with_search_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dirs.push(dir.into());
        self
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn errata(&self) -> &[Errata] {
        &self.errata
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn entry(&self, name: &str) -> Option<&CatalogEntry> {
        self.index(name).map(|i| &self.entries[i])
    }

    /// Finds an entry by name, by `v` or by group type. Misses list the nearest entries.
    pub fn lookup(&self, query: &str) -> Result<&CatalogEntry> {
        let q = query.trim();
        if let Some(e) = self.entry(q) {
            return Ok(e);
        }
        if let Ok(v) = q.parse::<usize>() {
            if let Some(e) = self.entries.iter().find(|e| e.dd_order() == Some(v)) {
                return Ok(e);
            }
            if v == 5 || v == 15 {
                return Err(Error::NotFound(format!("v={v}: no design exists")));
            }
            let mut near: Vec<usize> = self.entries.iter().filter_map(|e| e.dd_order()).collect();
            near.sort_by_key(|&w| (w.abs_diff(v), w));
            near.truncate(3);
            let near: Vec<String> = near.iter().map(|w| format!("DD({w})")).collect();
            return Err(Error::NotFound(format!(
                "no entry for v={v}; nearest: {}",
                near.join(", ")
            )));
        }
        let sig_text = q.strip_prefix("DGDD(").and_then(|s| s.strip_suffix(')')).unwrap_or(q);
        let sig: GroupType = sig_text
            .parse()
            .map_err(|_| Error::NotFound(format!("`{q}` is not an entry name, a v or a group type")))?;
        if let Some(e) = self.entries.iter().find(|e| e.signature().as_ref() == Some(&sig)) {
            return Ok(e);
        }
        let mut near: Vec<(u64, &str)> = self
            .entries
            .iter()
            .filter_map(|e| {
                e.signature()
                    .map(|t| (t.points().abs_diff(sig.points()), e.name.as_str()))
            })
            .collect();
        near.sort();
        let near: Vec<&str> = near.iter().take(3).map(|(_, n)| *n).collect();
        Err(Error::NotFound(format!(
            "no entry of type {sig}; nearest: {}",
            near.join(", ")
        )))
    }

    /// Develops or composes entry `i`.
    pub fn built(&self, i: usize) -> Result<Arc<Built>> {
        let name = &self.entries[i].name;
        self.built[i]
            .get_or_init(|| self.build(i).map(Arc::new).map_err(|e| e.to_string()))
            .clone()
            .map_err(|msg| Error::Entry {
                name: name.clone(),
                msg,
            })
    }

    fn build(&self, i: usize) -> Result<Built> {
        match &self.entries[i].source {
            EntrySource::Spec(s) => Ok(Built {
                design: develop(s)?,
                composition: None,
            }),
            EntrySource::Recipe(r) => {
                let c = r.run(self, self.exec)?;
                Ok(Built {
                    design: c.design.clone(),
                    composition: Some(c),
                })
            }
        }
    }

    /// The design for an entry or a generated name.
    pub fn design(&self, name: &str) -> Result<LabeledDesign> {
        let name = name.trim();
        if let Some(i) = self.index(name) {
            return Ok(self.built(i)?.design.clone());
        }
        self.generated(name)
    }

    fn generated(&self, name: &str) -> Result<LabeledDesign> {
        let (f, args) = split_call(name).ok_or_else(|| Error::NotFound(format!("no catalog design `{name}`")))?;
        let int = |s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::NotFound(format!("`{s}` is not a number in `{name}`")))
        };
        let td = |s: &str| -> Result<LabeledDesign> {
            let d = self.design(s)?;
            if d.kind != DesignKind::TD {
                return Err(Error::Precondition(format!("`{s}` is not a TD")));
            }
            Ok(d)
        };
        match (f, args.as_slice()) {
            ("TD", [k, q]) => td_from_mols(int(k)? as usize, int(q)?),
            ("twotd", [k, q]) => dgdd_from_two_tds(int(k)? as usize, int(q)?),
            ("adjoin", [x]) => adjoin_and_delete(&td(x)?, 0),
            ("truncate", [x, y]) => {
                let t = td(x)?;
                let last = t.partition.as_ref().map_or(0, |g| g.len().saturating_sub(1));
                truncate_td(&t, last, int(y)? as usize)
            }
            ("delete", [x]) => {
                let t = td(x)?;
                let mut blocks = t.blocks.clone();
                for g in t.partition.as_deref().unwrap_or_default() {
                    blocks.push(OrderedBlock::new(g.clone())?);
                }
                let pbd = LabeledDesign::new(t.space.clone(), blocks, None, 1, DesignKind::PBD)?;
                delete_point(&pbd, 0)
            }
            _ => Err(Error::NotFound(format!("no catalog design `{name}`"))),
        }
    }

    fn file(&self, path: &str) -> Result<LabeledDesign> {
        let direct = Path::new(path);
        let found = std::iter::once(direct.to_path_buf())
            .chain(self.dirs.iter().map(|d| d.join(path)))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::NotFound(format!("ingredient file `{path}`")))?;
        read_design(&std::fs::read_to_string(found)?)
    }

    /// Lower bound for entry `i`'s smallest defining set.
    ///
    /// Developed entries use their trade-graph certificate. When that falls short of the
    /// claimed fraction on a small directed design, the completion search settles block
    /// subsets of up to two blocks. Composed entries count each filler copy at the bound
    /// known for the matching catalog entry.
    pub fn lower_bound(&self, i: usize) -> Result<Arc<LowerBound>> {
        let name = &self.entries[i].name;
        self.bounds[i]
            .get_or_init(|| self.compute_bound(i).map(Arc::new).map_err(|e| e.to_string()))
            .clone()
            .map_err(|msg| Error::Entry {
                name: name.clone(),
                msg,
            })
    }

    fn compute_bound(&self, i: usize) -> Result<LowerBound> {
        let built = self.built(i)?;
        if let Some(c) = &built.composition {
            let bound = c.bound_with_floors(|d| self.floor_for(d));
            return Ok(LowerBound {
                certificate: c.certificate.clone(),
                bound,
                completion: None,
            });
        }
        let d = &built.design;
        let certificate = defining_bound_with(d, BoundMode::ExactVc, self.limits, self.exec);
        let mut bound = certificate.bound;
        let mut completion = None;
        let needed = claimed_numerator(&self.entries[i].claims, d.num_blocks());
        if d.kind == DesignKind::DD && d.v() <= COMPLETION_MAX_V && needed.is_some_and(|n| n > bound) {
            let size = (needed.unwrap_or(0) - 1).min(COMPLETION_MAX_SIZE);
            let floor = defining_floor(d, size, self.budget, self.exec)?;
            bound = bound.max(floor.blocks);
            completion = Some(floor);
        }
        Ok(LowerBound {
            certificate,
            bound,
            completion,
        })
    }

    /// Known lower bound for a filler design: the bound of the `DD(v)` entry equal to it.
    fn floor_for(&self, d: &LabeledDesign) -> usize {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.dd_order() == Some(d.v()))
            .find(|(i, _)| self.built(*i).is_ok_and(|b| b.design == *d))
            .and_then(|(i, _)| self.lower_bound(i).ok())
            .map_or(0, |b| b.bound)
    }

    /// Whether the stored tuple of an errata row occurs in the entry's directives.
    pub fn errata_applied(&self, r: &Errata) -> Result<bool> {
        let e = self
            .entry(&r.entry)
            .ok_or_else(|| Error::NotFound(format!("entry {}", r.entry)))?;
        let mut c = Cursor::new(&r.stored, 1);
        let stored = c.tuple()?;
        let EntrySource::Spec(s) = &e.source else {
            return Ok(false);
        };
        Ok(s.directives.iter().any(|d| match d {
            Directive::Base(b) => {
                b.block == stored || b.patches.iter().any(|(from, to)| *from == stored || *to == stored)
            }
            Directive::Block(b) => *b == stored,
            Directive::Embed { .. } => false,
        }))
    }
}

impl Resolver for Catalog {
    fn resolve(&self, r: &DesignRef) -> Result<LabeledDesign> {
        match r {
            DesignRef::Catalog(name) => self.design(name),
            DesignRef::File(path) => self.file(path),
        }
    }
}

/// `fnum/fden` of the claim scaled to `blocks`, rounded up.
pub fn claimed_numerator(c: &Claims, blocks: usize) -> Option<usize> {
    let (num, den) = c.f?;
    if den == 0 {
        return None;
    }
    Some(((num as u128 * blocks as u128).div_ceil(den as u128)) as usize)
}

/// `name(arg, arg, ...)` with arguments split at top-level commas.
fn split_call(s: &str) -> Option<(&str, Vec<&str>)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let f = &s[..open];
    if f.is_empty() || !f.chars().all(|c| c.is_ascii_alphanumeric()) {
        return None;
    }
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return None;
        }
    }
    args.push(inner[start..].trim());
    Some((f, args))
}

fn parse_claims(words: &[&str], line: usize) -> Result<Claims> {
    let mut c = Claims::default();
    let (mut num, mut den) = (None, None);
    for w in words {
        let (k, val) = w
            .split_once('=')
            .ok_or_else(|| Error::parse(line, 1, format!("expected key=value, got `{w}`")))?;
        let n: u64 = val
            .parse()
            .map_err(|_| Error::parse(line, 1, format!("expected a number in `{w}`")))?;
        match k {
            "blocks" => c.blocks = Some(n as usize),
            "fnum" => num = Some(n),
            "fden" => den = Some(n),
            _ => return Err(Error::parse(line, 1, format!("unknown claim `{k}`"))),
        }
    }
    match (num, den) {
        (Some(a), Some(b)) => c.f = Some((a, b)),
        (None, None) => {}
        _ => return Err(Error::parse(line, 1, "fnum and fden go together")),
    }
    Ok(c)
}

/// Splits the composed-recipe text into entries.
///
/// ```text
/// entry DD(141) blocks=1974 fnum=987 fden=1974
/// note free text
/// master catalog:DGDD(5^7)
/// ...
/// ```
pub fn parse_composed(text: &str) -> Result<Vec<CatalogEntry>> {
    struct Open {
        name: String,
        claims: Claims,
        notes: Vec<String>,
        body: String,
    }
    let mut out = Vec::new();
    let mut cur: Option<Open> = None;
    let finish = |o: Open| -> Result<CatalogEntry> {
        let r = parse_recipe(&o.body).map_err(|e| Error::Entry {
            name: o.name.clone(),
            msg: e.to_string(),
        })?;
        Ok(CatalogEntry {
            name: o.name,
            source: EntrySource::Recipe(r),
            claims: o.claims,
            notes: o.notes,
            errata: Vec::new(),
        })
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if let Some(rest) = line.strip_prefix("entry ") {
            if let Some(o) = cur.take() {
                out.push(finish(o)?);
            }
            let words: Vec<&str> = rest.split_whitespace().collect();
            let cut = words.iter().position(|w| w.contains('=')).unwrap_or(words.len());
            if cut == 0 {
                return Err(Error::parse(ln + 1, 1, "entry without a name"));
            }
            cur = Some(Open {
                name: words[..cut].join(" "),
                claims: parse_claims(&words[cut..], ln + 1)?,
                notes: Vec::new(),
                body: String::new(),
            });
        } else if let Some(note) = line.strip_prefix("note ") {
            let o = cur
                .as_mut()
                .ok_or_else(|| Error::parse(ln + 1, 1, "note outside an entry"))?;
            o.notes.push(note.trim().to_string());
        } else if !line.is_empty() {
            let o = cur
                .as_mut()
                .ok_or_else(|| Error::parse(ln + 1, 1, "recipe line outside an entry"))?;
            o.body.push_str(line);
            o.body.push('\n');
        }
    }
    if let Some(o) = cur.take() {
        out.push(finish(o)?);
    }
    Ok(out)
}

/// Tab-separated rows `entry printed stored justification`, after a header row.
pub fn parse_errata(text: &str) -> Result<Vec<Errata>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') || line.starts_with("entry\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let [entry, printed, stored, justification] = f.as_slice() else {
            return Err(Error::parse(
                ln + 1,
                1,
                format!("expected 4 tab-separated fields, got {}", f.len()),
            ));
        };
        out.push(Errata {
            entry: entry.to_string(),
            printed: printed.to_string(),
            stored: stored.to_string(),
            justification: justification.to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn call_syntax() {
        assert_eq!(split_call("TD(6,9)"), Some(("TD", vec!["6", "9"])));
        assert_eq!(
            split_call("truncate(TD(6,9),6)"),
            Some(("truncate", vec!["TD(6,9)", "6"]))
        );
        assert_eq!(split_call("adjoin(TD(5,5))"), Some(("adjoin", vec!["TD(5,5)"])));
        assert_eq!(split_call("TD 6"), None);
        assert_eq!(split_call("a(b))"), None);
    }

    #[test]
    fn builtin_parses() {
        let c = Catalog::builtin().unwrap();
        assert!(c.entry("DGDD(5^7)").is_some());
        assert!(c.entry("DD(141)").unwrap().is_composed());
        assert_eq!(c.entry("DGDD(5^9)").unwrap().errata.len(), 1);
        assert_eq!(c.entry("DD(115)").unwrap().errata.len(), 2);
        for r in c.errata() {
            assert!(c.errata_applied(r).unwrap(), "{r:?}");
        }
    }

    #[test]
    fn generated_names() {
        let c = Catalog::builtin().unwrap();
        let sig = |n: &str| c.design(n).unwrap().group_type().unwrap().to_string();
        assert_eq!(sig("TD(6,5)"), "5^6");
        assert_eq!(sig("adjoin(TD(6,9))"), "5^9 9^1");
        assert_eq!(sig("truncate(TD(6,7),5)"), "2^1 7^5");
        assert_eq!(sig("delete(TD(6,11))"), "5^11 10^1");
        assert_eq!(sig("twotd(5,7)"), "7^5");
        assert!(c.design("adjoin(DGDD(5^7))").is_err());
        assert!(c.design("nothing(1)").is_err());
    }

    #[test]
    fn lookups() {
        let c = Catalog::builtin().unwrap();
        assert_eq!(c.lookup("4^8 6^1").unwrap().name, "DGDD(4^8 6^1)");
        assert_eq!(c.lookup("61").unwrap().name, "DD(61)");
        let miss = c.lookup("15").unwrap_err().to_string();
        assert!(miss.contains("no design exists"), "{miss}");
        let miss = c.lookup("7^5").unwrap_err().to_string();
        assert!(miss.contains("nearest"), "{miss}");
        let miss = c.lookup("101").unwrap_err().to_string();
        assert!(miss.contains("DD(105)"), "{miss}");
    }

    #[test]
    fn composed_parsing_errors() {
        assert!(parse_composed("master catalog:DD(21)\n").is_err());
        assert!(parse_composed("entry DD(21) blocks=x\nmaster y\n").is_err());
        assert!(parse_composed("entry DD(21) fnum=1\nmaster y\n").is_err());
        let e = parse_composed("entry DGDD(6^5 8^1) blocks=120\nnote n\nmaster y\n").unwrap();
        assert_eq!(e[0].name, "DGDD(6^5 8^1)");
        assert_eq!(e[0].notes, vec!["n".to_string()]);
        assert!(parse_errata("entry\tprinted\tstored\tjustification\nX\ty\n").is_err());
    }
}
