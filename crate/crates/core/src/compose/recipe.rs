//! Recipe files.
//!
//! ```text
//! master catalog:DGDD(5^7)
//! weight default 4
//! weight point 3 0
//! ingredient sig=4^5 catalog:TD(5,4)
//! add 1
//! fill group all catalog:DD(21)
//! fill group 2 extra/dd21.txt
//! ```
//!
//! A reference is `catalog:<name>` or a path to a file in the design exchange format.

use std::fmt;
use std::str::FromStr;

use crate::compose::wilson::{
    fill_groups, identity_composition, wilson_compose, Composition, CompositionRecipe, Filler, IngredientRegistry,
    WeightAssignment,
};
use crate::design::{DesignKind, GroupType, Label, LabeledDesign};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::text::strip_comment;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DesignRef {
    Catalog(String),
    File(String),
}

impl fmt::Display for DesignRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignRef::Catalog(n) => write!(f, "catalog:{n}"),
            DesignRef::File(p) => f.write_str(p),
        }
    }
}

impl FromStr for DesignRef {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Precondition("empty design reference".into()));
        }
        Ok(match s.strip_prefix("catalog:") {
            Some(n) => DesignRef::Catalog(n.trim().to_string()),
            None => DesignRef::File(s.to_string()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupSel {
    All,
    Index(usize),
}

/// A parsed recipe whose references are not yet resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecipeSpec {
    pub master: DesignRef,
    pub default_weight: u32,
    pub point_weights: Vec<(Label, u32)>,
    pub ingredients: Vec<(GroupType, DesignRef)>,
    pub added: usize,
    pub fills: Vec<(GroupSel, DesignRef)>,
}

impl fmt::Display for RecipeSpec {
    /// The recipe in its text form; parsing it gives back the same spec.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "master {}", self.master)?;
        if self.default_weight != 1 {
            writeln!(f, "weight default {}", self.default_weight)?;
        }
        for (l, a) in &self.point_weights {
            writeln!(f, "weight point {l} {a}")?;
        }
        for (sig, r) in &self.ingredients {
            writeln!(f, "ingredient sig={sig} {r}")?;
        }
        if self.added > 0 {
            writeln!(f, "add {}", self.added)?;
        }
        for (sel, r) in &self.fills {
            match sel {
                GroupSel::All => writeln!(f, "fill group all {r}")?,
                GroupSel::Index(i) => writeln!(f, "fill group {i} {r}")?,
            }
        }
        Ok(())
    }
}

/// Turns references into designs.
pub trait Resolver {
    fn resolve(&self, r: &DesignRef) -> Result<LabeledDesign>;
}

/// Splits `sig=<type> <ref>`; the type may contain spaces, the reference starts at
/// `catalog:` or is the last word.
fn split_signature(rest: &str) -> Option<(&str, &str)> {
    let rest = rest.trim().strip_prefix("sig=")?;
    let cut = match rest.find("catalog:") {
        Some(i) => i,
        None => rest.rfind(char::is_whitespace)? + 1,
    };
    Some((rest[..cut].trim(), rest[cut..].trim()))
}

pub fn parse_recipe(text: &str) -> Result<RecipeSpec> {
    let mut master = None;
    let mut spec = RecipeSpec {
        master: DesignRef::File(String::new()),
        default_weight: 1,
        point_weights: Vec::new(),
        ingredients: Vec::new(),
        added: 0,
        fills: Vec::new(),
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::parse(ln + 1, 1, msg);
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let num = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| err(format!("expected a number, got `{s}`")))
        };
        match head {
            "master" => master = Some(rest.parse().map_err(|e: Error| err(e.to_string()))?),
            "weight" => {
                let words: Vec<&str> = rest.split_whitespace().collect();
                match words.as_slice() {
                    ["default", a] => spec.default_weight = num(a)?,
                    ["point", l, a] => {
                        let label: Label = l.parse().map_err(|e: Error| err(e.to_string()))?;
                        spec.point_weights.push((label, num(a)?));
                    }
                    _ => return Err(err("expected `weight default <a>` or `weight point <label> <a>`".into())),
                }
            }
            "ingredient" => {
                let (sig, r) =
                    split_signature(rest).ok_or_else(|| err("expected `ingredient sig=<type> <ref>`".into()))?;
                let sig: GroupType = sig.parse().map_err(|e: Error| err(e.to_string()))?;
                spec.ingredients
                    .push((sig, r.parse().map_err(|e: Error| err(e.to_string()))?));
            }
            "add" => spec.added = num(rest)? as usize,
            "fill" => {
                let mut it = rest.splitn(3, char::is_whitespace);
                let (Some("group"), Some(sel), Some(r)) = (it.next(), it.next(), it.next()) else {
                    return Err(err("expected `fill group <i|all> <ref>`".into()));
                };
                let sel = match sel {
                    "all" | "*" => GroupSel::All,
                    s => GroupSel::Index(num(s)? as usize),
                };
                spec.fills
                    .push((sel, r.parse().map_err(|e: Error| err(e.to_string()))?));
            }
            _ => return Err(err(format!("unknown recipe statement `{head}`"))),
        }
    }
    spec.master = master.ok_or_else(|| Error::parse(1, 1, "recipe has no master"))?;
    Ok(spec)
}

impl RecipeSpec {
    /// Resolves every reference. Later `fill` lines override earlier ones.
    pub fn build(&self, resolver: &dyn Resolver) -> Result<CompositionRecipe> {
        let master = resolver.resolve(&self.master)?;
        let mut weights = WeightAssignment::uniform(self.default_weight);
        for (l, a) in &self.point_weights {
            weights.set(master.space.resolve(l)?, *a);
        }
        let mut registry = IngredientRegistry::new();
        for (sig, r) in &self.ingredients {
            let d = resolver.resolve(r)?;
            if d.group_type().as_ref() != Some(sig) {
                return Err(Error::SizeMismatch(format!(
                    "ingredient {r} has type {}, recipe says {sig}",
                    d.group_type().map(|t| t.to_string()).unwrap_or_else(|| "none".into())
                )));
            }
            registry.insert(r.to_string(), d)?;
        }
        let groups = master.partition.as_ref().map_or(master.v(), |g| g.len());
        let mut fillers = Vec::new();
        if !self.fills.is_empty() {
            fillers = vec![Filler::Keep; groups];
            for (sel, r) in &self.fills {
                let d = resolver.resolve(r)?;
                match *sel {
                    GroupSel::All => fillers.iter_mut().for_each(|f| *f = Filler::Design(d.clone())),
                    GroupSel::Index(i) if i < groups => fillers[i] = Filler::Design(d),
                    GroupSel::Index(i) => {
                        return Err(Error::Precondition(format!(
                            "fill group {i}: master has {groups} groups"
                        )))
                    }
                }
            }
        }
        Ok(CompositionRecipe {
            master,
            weights,
            registry,
            added: self.added,
            fillers,
        })
    }
}

impl RecipeSpec {
    /// True when the recipe only fills the groups of its master (or takes it unchanged).
    fn is_plain_fill(&self) -> bool {
        self.ingredients.is_empty() && self.default_weight == 1 && self.point_weights.iter().all(|(_, a)| *a == 1)
    }

    /// Builds and runs the recipe.
    ///
    /// With no ingredients and unit weights the master is used as it is: without fills it
    /// must be a directed design, with fills it must be a DGDD whose every group is filled.
    pub fn run(&self, resolver: &dyn Resolver, exec: Exec) -> Result<Composition> {
        let recipe = self.build(resolver)?;
        if !self.is_plain_fill() {
            return wilson_compose(&recipe, exec);
        }
        if recipe.fillers.is_empty() {
            if recipe.added > 0 {
                return Err(Error::Precondition("added points need group fills".into()));
            }
            return identity_composition(recipe.master, exec);
        }
        if recipe.master.kind != DesignKind::DGDD {
            return Err(Error::Precondition(format!(
                "filling groups needs a DGDD master, got {}",
                recipe.master.kind
            )));
        }
        let fillers = recipe
            .fillers
            .into_iter()
            .enumerate()
            .map(|(i, f)| match f {
                Filler::Design(d) => Ok(d),
                Filler::Keep => Err(Error::Precondition(format!("group {i} has no fill"))),
            })
            .collect::<Result<Vec<_>>>()?;
        fill_groups(&recipe.master, recipe.added, &fillers, exec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_statements() {
        let r = parse_recipe(
            "# v=211\nmaster catalog:DGDD(5^7)\nweight default 4\nweight point INF0 0\n\
             ingredient sig=6^5 8^1 catalog:DGDD(6^5 8^1)\ningredient sig=4^5 td45.txt\n\
             add 3\nfill group all catalog:DD(21)\nfill group 2 dd.txt\n",
        )
        .unwrap();
        assert_eq!(r.master, DesignRef::Catalog("DGDD(5^7)".into()));
        assert_eq!(r.default_weight, 4);
        assert_eq!(r.point_weights, vec![(Label::Inf(0), 0)]);
        assert_eq!(r.ingredients[0].0.to_string(), "6^5 8^1");
        assert_eq!(r.ingredients[0].1, DesignRef::Catalog("DGDD(6^5 8^1)".into()));
        assert_eq!(r.ingredients[1].1, DesignRef::File("td45.txt".into()));
        assert_eq!(r.added, 3);
        assert_eq!(r.fills[1], (GroupSel::Index(2), DesignRef::File("dd.txt".into())));
        assert_eq!(parse_recipe(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_recipe("weight default 4\n").is_err());
        assert!(parse_recipe("master x\nfill grp 1 y\n").is_err());
        assert!(parse_recipe("master x\nblend 3\n").is_err());
        assert!(parse_recipe("master x\ningredient 4^5 y\n").is_err());
    }
}
