//! Develops, verifies and bounds every catalog entry.

use std::fmt::Write as _;
use std::time::Instant;

use crate::catalog::{claimed_numerator, Catalog};
use crate::trades::Floor;
use crate::verify::verify_directed;

#[derive(Clone, Debug)]
pub struct AuditRow {
    pub name: String,
    pub family: &'static str,
    pub v: usize,
    pub blocks: usize,
    pub expected_blocks: Option<usize>,
    pub verified: bool,
    /// First violations of a failed verification.
    pub violations: Vec<String>,
    pub bound: Option<usize>,
    /// Claimed fraction as `(num, den)`.
    pub claim: Option<(u64, u64)>,
    /// Claimed fraction scaled to the block count.
    pub needed: Option<usize>,
    pub completion: Option<Floor>,
    pub errata: usize,
    pub errata_ok: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

impl AuditRow {
    fn new(cat: &Catalog, i: usize) -> AuditRow {
        let e = &cat.entries()[i];
        AuditRow {
            name: e.name.clone(),
            family: e.family(),
            v: 0,
            blocks: 0,
            expected_blocks: e.claims.blocks,
            verified: false,
            violations: Vec::new(),
            bound: None,
            claim: e.claims.f,
            needed: None,
            completion: None,
            errata: e.errata.len(),
            errata_ok: e.errata.iter().all(|r| cat.errata_applied(r).unwrap_or(false)),
            error: None,
            seconds: 0.0,
        }
    }

    pub fn claim_met(&self) -> Option<bool> {
        Some(self.bound? >= self.needed?)
    }

    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.verified
            && self.expected_blocks.is_none_or(|b| b == self.blocks)
            && self.claim_met() != Some(false)
            && (self.needed.is_none() || self.bound.is_some())
            && self.errata_ok
    }
}

const SHOWN_VIOLATIONS: usize = 3;

/// Audits entry `i`.
pub fn audit_entry(cat: &Catalog, i: usize) -> AuditRow {
    let start = Instant::now();
    let mut row = AuditRow::new(cat, i);
    let built = match cat.built(i) {
        Ok(b) => b,
        Err(e) => {
            row.error = Some(e.to_string());
            row.seconds = start.elapsed().as_secs_f64();
            return row;
        }
    };
    row.v = built.design.v();
    row.blocks = built.design.num_blocks();
    row.needed = claimed_numerator(&cat.entries()[i].claims, row.blocks);
    let report = match &built.composition {
        Some(c) => Ok(c.report.clone()),
        None => verify_directed(&built.design),
    };
    match report {
        Ok(r) => {
            row.verified = r.passed();
            row.violations = r
                .violations
                .iter()
                .take(SHOWN_VIOLATIONS)
                .map(|v| format!("{}: {}", v.kind, v.detail))
                .collect();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    if row.verified {
        match cat.lower_bound(i) {
            Ok(b) => {
                row.bound = Some(b.bound);
                row.completion = b.completion;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    row.seconds = start.elapsed().as_secs_f64();
    row
}

/// Audits every entry; rows are sorted by entry name.
///
/// Developed entries are independent and run in parallel. Composed entries draw on
/// other entries through the catalog caches and run one after another.
pub fn audit_all(cat: &Catalog) -> Vec<AuditRow> {
    let (composed, direct): (Vec<usize>, Vec<usize>) =
        (0..cat.entries().len()).partition(|&i| cat.entries()[i].is_composed());
    let mut rows = cat.exec().map_slice(&direct, |&i| audit_entry(cat, i));
    rows.extend(composed.iter().map(|&i| audit_entry(cat, i)));
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    rows
}

/// One line per row plus a summary line.
pub fn render_audit(rows: &[AuditRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<14} {:>4} {:>6} {:<6} {:>12} {:>11} {:<7} {:<6}",
        "entry", "family", "v", "blocks", "verify", "bound", "claim", "errata", "status"
    );
    for r in rows {
        let bound = match (r.bound, &r.completion) {
            (Some(b), Some(_)) => format!("{b}*"),
            (Some(b), None) => b.to_string(),
            (None, _) => "-".into(),
        };
        let claim = r.claim.map_or("-".into(), |(n, d)| format!("{n}/{d}"));
        let errata = match (r.errata, r.errata_ok) {
            (0, _) => "-".to_string(),
            (n, true) => format!("{n} ok"),
            (n, false) => format!("{n} BAD"),
        };
        let _ = writeln!(
            out,
            "{:<16} {:<14} {:>4} {:>6} {:<6} {:>12} {:>11} {:<7} {:<6}",
            r.name,
            r.family,
            r.v,
            r.blocks,
            if r.verified { "pass" } else { "FAIL" },
            bound,
            claim,
            errata,
            if r.passed() { "pass" } else { "FAIL" }
        );
        if let Some(e) = &r.error {
            let _ = writeln!(out, "    error: {}", e.lines().next().unwrap_or(""));
        }
        for v in &r.violations {
            let _ = writeln!(out, "    violation: {v}");
        }
        if let Some(b) = r.expected_blocks.filter(|&b| b != r.blocks && r.error.is_none()) {
            let _ = writeln!(out, "    expected {b} blocks");
        }
        if let Some(f) = &r.completion {
            let _ = writeln!(
                out,
                "    * completion search: no defining set of fewer than {} blocks{}",
                f.blocks,
                if f.indeterminate { " (budget exhausted)" } else { "" }
            );
        }
    }
    let failed = rows.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(
        out,
        "{} entries, {} passed, {} failed",
        rows.len(),
        rows.len() - failed,
        failed
    );
    out
}
