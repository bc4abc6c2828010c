//! Design exchange format.
//!
//! ```text
//! design v=21 lambda=1 kind=DD ordered=1
//! labels: 0 1 2 ...          (omitted when the labels are 0..v-1)
//! group: 0 7 14
//! (0,1,4,14,16)
//! ```

use std::fmt::Write as _;

use crate::design::{DesignKind, Label, LabeledDesign, OrderedBlock, PointSpace};
use crate::error::{Error, Result};
use crate::text::{strip_comment, Cursor};

pub fn write_design(d: &LabeledDesign) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "design v={} lambda={} kind={} ordered={}",
        d.v(),
        d.lambda,
        d.kind,
        d.ordered as u8
    );
    if !d.space.is_plain() {
        out.push_str("labels:");
        for l in d.space.labels() {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
    }
    if let Some(groups) = &d.partition {
        for g in groups {
            out.push_str("group:");
            for &p in g {
                let _ = write!(out, " {}", d.space.label(p));
            }
            out.push('\n');
        }
    }
    for b in &d.blocks {
        out.push_str(&b.display(&d.space));
        out.push('\n');
    }
    out
}

pub fn read_design(text: &str) -> Result<LabeledDesign> {
    let mut header: Option<(usize, u32, DesignKind, bool)> = None;
    let mut space: Option<PointSpace> = None;
    let mut groups: Vec<Vec<u32>> = Vec::new();
    let mut blocks = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = strip_comment(raw);
        let mut c = Cursor::new(line, line_no);
        if c.at_end() {
            continue;
        }
        if header.is_none() {
            header = Some(parse_header(&mut c)?);
            continue;
        }
        let (v, _, _, _) = header.expect("header");
        if c.eat_str("labels:") {
            if space.is_some() || !groups.is_empty() || !blocks.is_empty() {
                return Err(c.err("`labels:` must directly follow the header"));
            }
            let mut labels = Vec::with_capacity(v);
            while !c.at_end() {
                labels.push(c.label()?);
            }
            if labels.len() != v {
                return Err(c.err(format!("expected {v} labels, found {}", labels.len())));
            }
            space = Some(PointSpace::new(labels).map_err(|e| c.err(e.to_string()))?);
            continue;
        }
        let sp = space.get_or_insert_with(|| PointSpace::plain(v));
        if c.eat_str("group:") {
            let mut g = Vec::new();
            while !c.at_end() {
                let l = c.label()?;
                g.push(sp.resolve(&l).map_err(|e| c.err(e.to_string()))?);
            }
            groups.push(g);
            continue;
        }
        let tuple = c.tuple()?;
        if !c.at_end() {
            return Err(c.err("trailing characters after block"));
        }
        let pts = tuple
            .iter()
            .map(|l| sp.resolve(l))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| c.err(e.to_string()))?;
        blocks.push(OrderedBlock::new(pts).map_err(|e| c.err(e.to_string()))?);
    }

    let (v, lambda, kind, ordered) = header.ok_or_else(|| Error::parse(1, 1, "missing `design` header"))?;
    let space = space.unwrap_or_else(|| PointSpace::plain(v));
    let partition = (!groups.is_empty()).then_some(groups);
    let d = LabeledDesign {
        space,
        blocks,
        partition,
        lambda,
        kind,
        ordered,
    };
    d.validate()?;
    Ok(d)
}

fn parse_header(c: &mut Cursor<'_>) -> Result<(usize, u32, DesignKind, bool)> {
    if c.word() != Some("design") {
        return Err(c.err("expected `design` header"));
    }
    let (mut v, mut lambda, mut kind, mut ordered) = (None, None, None, None);
    while !c.at_end() {
        let key = c.word().ok_or_else(|| c.err("expected key=value"))?;
        c.expect('=')?;
        match key {
            "v" => v = Some(c.uint()? as usize),
            "lambda" => lambda = Some(c.uint()? as u32),
            "kind" => {
                let w = c.word().ok_or_else(|| c.err("expected design kind"))?;
                kind = Some(w.parse::<DesignKind>().map_err(|e| c.err(e.to_string()))?);
            }
            "ordered" => ordered = Some(c.uint()? != 0),
            _ => return Err(c.err(format!("unknown header key `{key}`"))),
        }
    }
    let v = v.ok_or_else(|| c.err("header lacks v="))?;
    let kind = kind.ok_or_else(|| c.err("header lacks kind="))?;
    Ok((
        v,
        lambda.unwrap_or(1),
        kind,
        ordered.unwrap_or_else(|| kind.is_ordered()),
    ))
}

/// Labels of a block, for callers that work on label tuples.
pub fn block_labels(d: &LabeledDesign, b: &OrderedBlock) -> Vec<Label> {
    b.points().iter().map(|&p| d.space.label(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_labels_and_groups() {
        let space = PointSpace::grid(2, 3).with_infinities(1).unwrap();
        let blocks = vec![OrderedBlock::new(vec![0, 3, 6]).unwrap()];
        let d = LabeledDesign::new(
            space,
            blocks,
            Some(vec![vec![0, 1, 2], vec![3, 4, 5], vec![6]]),
            1,
            DesignKind::DGDD,
        )
        .unwrap();
        let text = write_design(&d);
        assert!(text.contains("labels: (0,0)"));
        let back = read_design(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(write_design(&back), text);
    }

    #[test]
    fn plain_labels_are_implicit() {
        let text = "design v=3 lambda=1 kind=DD ordered=1\n(0,1)\n(1,0)\n";
        let d = read_design(text).unwrap();
        assert_eq!(d.num_blocks(), 2);
        assert_eq!(write_design(&d), text);
    }

    #[test]
    fn errors_carry_positions() {
        let e = read_design("design v=5 kind=DD\n(0,1 2)\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(read_design("design v=5 kind=DD\n(0,9)\n").is_err());
        assert!(read_design("(0,1)\n").is_err());
    }
}
