//! Construction routes for every admissible `v`.

use std::fmt::Write as _;

use crate::catalog::{Catalog, EntrySource};
use crate::compose::{DesignRef, GroupSel, RecipeSpec};
use crate::error::{Error, Result};

/// Values left over by the general residue-class constructions, stepping by 20 between
/// the listed ends. The planner flags plans for these values as inferred.
pub const INFERRED_RESIDUALS: [&[usize]; 2] = [
    &[125, 145, 165, 185, 205, 225, 245, 265, 325, 345, 425],
    &[155, 195, 215, 235, 255, 275, 295, 315, 335, 355, 375, 395, 515],
];

/// `n = (v + 4) / 5` for which no PBD(n, {5,7,9}) is available.
const NO_PBD: &[usize] = &[
    11, 13, 15, 17, 19, 23, 27, 29, 31, 33, 39, 43, 51, 59, 71, 75, 83, 87, 95, 99, 107, 111, 113, 115, 119, 139, 179,
];

/// `n` for which the {5,6}-GDDs of type 5^(4n+1) x^1 are not available.
const NO_GDD: &[usize] = &[2, 11, 17, 23, 32];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanStatus {
    /// Developed from base blocks in the catalog.
    Direct,
    /// A composed catalog entry; running it needs nothing outside the catalog.
    Executable,
    /// The route needs designs the catalog does not contain.
    NeedsExternal,
    /// No construction is known.
    Unresolved,
}

#[derive(Clone, Debug)]
pub enum PlanInput {
    Catalog(String),
    External(String),
    Plan(Box<SpectrumPlan>),
}

#[derive(Clone, Debug)]
pub struct PlanStep {
    pub action: String,
    pub inputs: Vec<PlanInput>,
}

#[derive(Clone, Debug)]
pub struct SpectrumPlan {
    pub v: usize,
    pub status: PlanStatus,
    pub route: String,
    pub steps: Vec<PlanStep>,
    /// The catalog entry that realizes the plan.
    pub entry: Option<String>,
    /// Recipe text of a composed entry.
    pub recipe: Option<String>,
    /// `v` comes from an inferred residual list.
    pub inferred: bool,
}

impl SpectrumPlan {
    /// External designs the plan needs, including those of nested plans.
    pub fn external(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_external(&mut out);
        out
    }

    fn collect_external(&self, out: &mut Vec<String>) {
        for s in &self.steps {
            for i in &s.inputs {
                match i {
                    PlanInput::External(n) if !out.contains(n) => out.push(n.clone()),
                    PlanInput::Plan(p) => p.collect_external(out),
                    _ => {}
                }
            }
        }
    }

    pub fn is_executable(&self) -> bool {
        matches!(self.status, PlanStatus::Direct | PlanStatus::Executable)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let status = match self.status {
            PlanStatus::Direct => "direct",
            PlanStatus::Executable => "executable",
            PlanStatus::NeedsExternal => "needs external ingredients",
            PlanStatus::Unresolved => "unresolved",
        };
        let _ = write!(out, "{pad}v={}: {status}", self.v);
        if let Some(e) = &self.entry {
            let _ = write!(out, " (catalog {e})");
        }
        if self.inferred {
            out.push_str(" [inferred residual]");
        }
        out.push('\n');
        let _ = writeln!(out, "{pad}  route: {}", self.route);
        for s in &self.steps {
            let _ = writeln!(out, "{pad}  step: {}", s.action);
            for i in &s.inputs {
                match i {
                    PlanInput::Catalog(n) => {
                        let _ = writeln!(out, "{pad}    catalog {n}");
                    }
                    PlanInput::External(n) => {
                        let _ = writeln!(out, "{pad}    external {n}");
                    }
                    PlanInput::Plan(p) => p.render_into(out, depth + 2),
                }
            }
        }
        if depth == 0 {
            let ext = self.external();
            if !ext.is_empty() {
                let _ = writeln!(out, "  external ingredients: {}", ext.join("; "));
            }
            if let Some(r) = &self.recipe {
                out.push_str("  recipe:\n");
                for line in r.lines() {
                    let _ = writeln!(out, "    {line}");
                }
            }
        }
    }
}

/// The construction route for a 2-(v,5,1) directed design.
pub fn spectrum_plan(cat: &Catalog, v: usize) -> Result<SpectrumPlan> {
    if v % 10 != 1 && v % 10 != 5 {
        return Err(Error::Inadmissible {
            v,
            reason: "v must be 1 or 5 mod 10".into(),
        });
    }
    if v < 11 || v == 15 {
        return Err(Error::Inadmissible {
            v,
            reason: "excluded: no super-simple 2-(v,5,1)DD exists".into(),
        });
    }
    let inferred = INFERRED_RESIDUALS.iter().any(|l| l.contains(&v));
    let mut plan = if let Some(p) = from_entry(cat, v) {
        p
    } else if v % 10 == 1 {
        one_mod_ten(cat, v)?
    } else if v % 20 == 5 {
        five_mod_twenty(cat, v)?
    } else {
        fifteen_mod_twenty(cat, v)?
    };
    plan.inferred = inferred;
    Ok(plan)
}

fn from_entry(cat: &Catalog, v: usize) -> Option<SpectrumPlan> {
    let name = format!("DD({v})");
    let e = cat.entry(&name)?;
    let (status, route, steps, recipe) = match &e.source {
        EntrySource::Spec(s) => (
            PlanStatus::Direct,
            format!("develop {} base blocks", s.base_count()),
            Vec::new(),
            None,
        ),
        EntrySource::Recipe(r) => (
            PlanStatus::Executable,
            describe(r),
            vec![PlanStep {
                action: "compose".into(),
                inputs: recipe_inputs(r),
            }],
            Some(r.to_string()),
        ),
    };
    Some(SpectrumPlan {
        v,
        status,
        route,
        steps,
        entry: Some(name),
        recipe,
        inferred: false,
    })
}

fn ref_name(r: &DesignRef) -> String {
    match r {
        DesignRef::Catalog(n) => n.clone(),
        DesignRef::File(p) => p.clone(),
    }
}

fn recipe_inputs(r: &RecipeSpec) -> Vec<PlanInput> {
    let mut names = vec![ref_name(&r.master)];
    names.extend(r.ingredients.iter().map(|(_, d)| ref_name(d)));
    names.extend(r.fills.iter().map(|(_, d)| ref_name(d)));
    let mut out: Vec<PlanInput> = Vec::new();
    for n in names {
        if !out.iter().any(|i| matches!(i, PlanInput::Catalog(m) if *m == n)) {
            out.push(PlanInput::Catalog(n));
        }
    }
    out
}

fn describe(r: &RecipeSpec) -> String {
    let mut s = String::new();
    let plain = r.ingredients.is_empty() && r.default_weight == 1 && r.point_weights.is_empty();
    if plain {
        let _ = write!(s, "take {}", ref_name(&r.master));
    } else {
        let _ = write!(s, "weight {} on {}", r.default_weight, ref_name(&r.master));
        if !r.point_weights.is_empty() {
            let mut w: Vec<String> = r.point_weights.iter().map(|(l, a)| format!("{l}:{a}")).collect();
            w.dedup();
            let _ = write!(s, " (points {})", w.join(" "));
        }
        let ing: Vec<String> = r.ingredients.iter().map(|(_, d)| ref_name(d)).collect();
        let _ = write!(s, ", blocks replaced by {}", ing.join(", "));
    }
    if r.added > 0 {
        let _ = write!(s, ", {} added point{}", r.added, if r.added == 1 { "" } else { "s" });
    }
    if !r.fills.is_empty() {
        let fills: Vec<String> = r
            .fills
            .iter()
            .map(|(sel, d)| match sel {
                GroupSel::All => format!("{} in every group", ref_name(d)),
                GroupSel::Index(i) => format!("{} in group {i}", ref_name(d)),
            })
            .collect();
        let _ = write!(s, ", filled with {}", fills.join(", then "));
    }
    s
}

fn unresolved(v: usize, route: &str) -> SpectrumPlan {
    SpectrumPlan {
        v,
        status: PlanStatus::Unresolved,
        route: route.into(),
        steps: Vec::new(),
        entry: None,
        recipe: None,
        inferred: false,
    }
}

fn cat(n: &str) -> PlanInput {
    PlanInput::Catalog(n.into())
}

fn ext(n: impl Into<String>) -> PlanInput {
    PlanInput::External(n.into())
}

fn sub(c: &Catalog, v: usize) -> Result<PlanInput> {
    Ok(PlanInput::Plan(Box::new(spectrum_plan(c, v)?)))
}

/// A plan built from the given steps; its status follows from its inputs.
fn assembled(v: usize, route: String, steps: Vec<PlanStep>) -> SpectrumPlan {
    let mut status = PlanStatus::Executable;
    for i in steps.iter().flat_map(|s| &s.inputs) {
        match i {
            PlanInput::External(_) if status == PlanStatus::Executable => status = PlanStatus::NeedsExternal,
            PlanInput::Plan(p) if p.status == PlanStatus::Unresolved => status = PlanStatus::Unresolved,
            PlanInput::Plan(p) if p.status == PlanStatus::NeedsExternal && status == PlanStatus::Executable => {
                status = PlanStatus::NeedsExternal
            }
            _ => {}
        }
    }
    SpectrumPlan {
        v,
        status,
        route,
        steps,
        entry: None,
        recipe: None,
        inferred: false,
    }
}

/// Weight 4 on a {5,6}-GDD with one group of size `last`, `added` new points.
fn weight_four(c: &Catalog, v: usize, gdd: String, groups: usize, last: usize, added: usize) -> Result<SpectrumPlan> {
    let big = 4 * last + added;
    let mut fills = vec![cat(if added == 1 { "DD(21)" } else { "DGDD(1^20 3^1)" })];
    fills.push(sub(c, big)?);
    let steps = vec![
        PlanStep {
            action: "weight 4 on every point".into(),
            inputs: vec![ext(gdd.clone()), cat("DGDD(4^5)"), cat("DGDD(4^6)")],
        },
        PlanStep {
            action: format!(
                "add {added} point(s); fill {groups} groups of 20 and the group of {}",
                4 * last
            ),
            inputs: fills,
        },
    ];
    Ok(assembled(
        v,
        format!("{gdd} with weight 4, {added} added point(s)"),
        steps,
    ))
}

fn one_mod_ten(c: &Catalog, v: usize) -> Result<SpectrumPlan> {
    if v == 91 {
        return Ok(unresolved(91, "no construction with these ingredients; left open"));
    }
    let n = v.div_ceil(5);
    if !NO_PBD.contains(&n) {
        let gdd = format!("PBD({n},{{5,7,9}})");
        let steps = vec![
            PlanStep {
                action: "delete a point: {5,7,9}-GDD of type 4^a 6^b 8^c; weight 5".into(),
                inputs: vec![ext(gdd.clone()), cat("DGDD(5^5)"), cat("DGDD(5^7)"), cat("DGDD(5^9)")],
            },
            PlanStep {
                action: "add 1 point; fill groups of 20, 30, 40".into(),
                inputs: vec![cat("DD(21)"), cat("DD(31)"), cat("DD(41)")],
            },
        ];
        return Ok(assembled(
            v,
            format!("{gdd} less a point, weight 5, one added point"),
            steps,
        ));
    }
    if n == 71 {
        let steps = vec![
            PlanStep {
                action: "weight 5 on every point".into(),
                inputs: vec![ext("5-GDD of type 14^5"), cat("DGDD(5^5)")],
            },
            PlanStep {
                action: "add 1 point; fill the groups of 70".into(),
                inputs: vec![sub(c, 71)?],
            },
        ];
        return Ok(assembled(
            v,
            "5-GDD of type 14^5 with weight 5, one added point".into(),
            steps,
        ));
    }
    let mut fallback = None;
    for x in [13usize, 17, 21, 25] {
        if v < 30 * x + 21 {
            continue;
        }
        let g = v - 30 * x - 1;
        if g.is_multiple_of(10) && (20..=10 * (x - 1)).contains(&g) && g != 90 {
            let gdd = format!("{{5,6}}-GDD of type 5^{x} k^1");
            let steps = vec![
                PlanStep {
                    action: format!(
                        "weight 6 on the first {x} groups, 0, 6 or 8 on the last: DGDD of type 30^{x} {g}^1"
                    ),
                    inputs: vec![
                        ext(gdd.clone()),
                        cat("DGDD(6^5 8^1)"),
                        cat("DGDD(6^5)"),
                        cat("DGDD(6^6)"),
                    ],
                },
                PlanStep {
                    action: "add 1 point; fill the groups".into(),
                    inputs: vec![cat("DD(31)"), sub(c, g + 1)?],
                },
            ];
            let p = assembled(v, format!("{gdd}, weights 6 and 8, one added point"), steps);
            if p.status != PlanStatus::Unresolved {
                return Ok(p);
            }
            fallback.get_or_insert(p);
        }
    }
    Ok(fallback.unwrap_or_else(|| unresolved(v, "no route found")))
}

fn five_mod_twenty(c: &Catalog, v: usize) -> Result<SpectrumPlan> {
    // {5,6}-GDDs with weight 4 and one added point: (groups of 5, count, last group).
    let special: &[(usize, &str, usize, usize)] = &[
        (145, "{5,6}-GDD of type 6^6", 5, 6),
        (185, "{5,6}-GDD of type 5^8 6^1", 8, 6),
        (265, "{5,6}-GDD of type 11^6", 5, 11),
        (325, "{5,6}-GDD of type 15^5 6^1", 5, 6),
        (345, "{5,6}-GDD of type 15^5 11^1", 5, 11),
        (425, "{5,6}-GDD of type 20^5 6^1", 5, 6),
    ];
    if let Some(&(_, gdd, groups, last)) = special.iter().find(|s| s.0 == v) {
        let steps = vec![
            PlanStep {
                action: "weight 4 on every point".into(),
                inputs: vec![ext(gdd), cat("DGDD(4^5)"), cat("DGDD(4^6)")],
            },
            PlanStep {
                action: format!("add 1 point; fill {groups} large groups and the group of {}", 4 * last),
                inputs: vec![sub(c, (v - 1 - 4 * last) / groups + 1)?, sub(c, 4 * last + 1)?],
            },
        ];
        return Ok(assembled(v, format!("{gdd} with weight 4, one added point"), steps));
    }
    let mut fallback = None;
    for n in 1..=v / 80 {
        if NO_GDD.contains(&n) || v < 80 * n + 21 {
            continue;
        }
        let rest = v - 80 * n - 21;
        if !rest.is_multiple_of(4) {
            continue;
        }
        let x = rest / 4;
        if x % 5 == 1 && (6..=5 * n).contains(&x) {
            let gdd = format!("{{5,6}}-GDD of type 5^{} {x}^1", 4 * n + 1);
            let p = weight_four(c, v, gdd, 4 * n + 1, x, 1)?;
            if p.status != PlanStatus::Unresolved {
                return Ok(p);
            }
            fallback.get_or_insert(p);
        }
    }
    Ok(fallback.unwrap_or_else(|| unresolved(v, "no route found")))
}

fn fifteen_mod_twenty(c: &Catalog, v: usize) -> Result<SpectrumPlan> {
    match v {
        235 | 395 => return Ok(unresolved(v, "no construction with these ingredients; left open")),
        375 => {
            let steps = vec![
                PlanStep {
                    action: "weight 5 on every point".into(),
                    inputs: vec![ext("TD(5,15)"), cat("DGDD(5^5)")],
                },
                PlanStep {
                    action: "fill the groups of 75".into(),
                    inputs: vec![cat("DD(75)")],
                },
            ];
            return Ok(assembled(v, "TD(5,15) with weight 5".into(), steps));
        }
        515 => {
            let steps = vec![
                PlanStep {
                    action: "weight 4 on every point".into(),
                    inputs: vec![ext("{5,6}-GDD of type 5^21 23^1"), cat("DGDD(4^5)"), cat("DGDD(4^6)")],
                },
                PlanStep {
                    action: "add 3 points; fill 21 groups of 20 and the group of 92".into(),
                    inputs: vec![cat("DGDD(1^20 3^1)"), cat("DD(95)")],
                },
            ];
            return Ok(assembled(
                v,
                "{5,6}-GDD of type 5^21 23^1 with weight 4, three added points".into(),
                steps,
            ));
        }
        _ => {}
    }
    let mut fallback = None;
    for n in 1..=v / 120 {
        if NO_GDD.contains(&n) || v < 120 * n + 31 + 24 {
            continue;
        }
        let g = v - 120 * n - 31;
        if g % 20 == 4 && g <= 40 * n {
            let gdd = format!("{{5,6}}-GDD of type 5^{} x^1", 4 * n + 1);
            let steps = vec![
                PlanStep {
                    action: format!(
                        "weight 6 on the first {} groups, 0, 6 or 8 on the last: DGDD of type 30^{} {g}^1",
                        4 * n + 1,
                        4 * n + 1
                    ),
                    inputs: vec![
                        ext(gdd.clone()),
                        cat("DGDD(6^5 8^1)"),
                        cat("DGDD(6^5)"),
                        cat("DGDD(6^6)"),
                    ],
                },
                PlanStep {
                    action: "add 1 point; fill the groups".into(),
                    inputs: vec![cat("DD(31)"), sub(c, g + 1)?],
                },
            ];
            let p = assembled(v, format!("{gdd}, weights 6 and 8, one added point"), steps);
            if p.status != PlanStatus::Unresolved {
                return Ok(p);
            }
            fallback.get_or_insert(p);
        }
    }
    Ok(fallback.unwrap_or_else(|| unresolved(v, "no route found")))
}
