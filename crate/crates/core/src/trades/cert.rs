//! Defining-set bound certificates.
//!
//! ```text
//! BOUND 53 OF 105 MODE exactVC
//! EDGE 0 7 : (21,5,17,6,15) (..)
//! CYCLE 3 10 17
//! ```
//!
//! Edge witnesses are stored so that a checker can confirm every trade against the
//! design without searching; the bound is then recomputed on the certified edge set.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::design::{LabeledDesign, OrderedBlock};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::text::{strip_comment, Cursor};
use crate::trades::bound::{component_bound, Graph, VcLimits};
use crate::trades::search::{check_witness, trade_graph_with, TradeEdge, TradeGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BoundMode {
    Matching,
    #[default]
    ExactVc,
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::Matching => "matching",
            BoundMode::ExactVc => "exactVC",
        })
    }
}

impl FromStr for BoundMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matching" => Ok(BoundMode::Matching),
            "exactvc" => Ok(BoundMode::ExactVc),
            _ => Err(Error::Precondition(format!("unknown bound mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeCertificate {
    pub mode: BoundMode,
    pub blocks: usize,
    pub bound: usize,
    /// Some component fell back from exact vertex cover to the LP bound.
    pub fallback: bool,
    pub edges: Vec<TradeEdge>,
    /// Components of the trade graph that are cycles, or carry a spanning cycle.
    pub cycles: Vec<Vec<u32>>,
}

impl TradeCertificate {
    pub fn fraction(&self) -> f64 {
        if self.blocks == 0 {
            0.0
        } else {
            self.bound as f64 / self.blocks as f64
        }
    }

    /// Display of the certificate with block labels from `d`.
    pub fn render(&self, d: &LabeledDesign) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "BOUND {} OF {} MODE {}", self.bound, self.blocks, self.mode);
        if self.fallback {
            out.push_str("# some components use the LP bound after exceeding the exact-cover budget\n");
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "EDGE {} {} : {} {}",
                e.i,
                e.j,
                e.witness.0.display(&d.space),
                e.witness.1.display(&d.space)
            );
        }
        for c in &self.cycles {
            out.push_str("CYCLE");
            for v in c {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Per-component bounds over a trade graph.
pub(crate) fn bound_of_graph(g: &TradeGraph, mode: BoundMode, limits: VcLimits, exec: Exec) -> (usize, bool) {
    let adj = g.adjacency();
    let comps = g.components();
    let results = exec.map_slice(&comps, |comp| {
        let local = |x: u32| comp.binary_search(&x).expect("vertex of component") as u32;
        let sub = Graph {
            adj: comp
                .iter()
                .map(|&x| adj[x as usize].iter().map(|&y| local(y)).collect())
                .collect(),
        };
        component_bound(&sub, mode == BoundMode::ExactVc, limits)
    });
    let bound = results.iter().map(|r| r.bound).sum();
    let fallback = mode == BoundMode::ExactVc && results.iter().any(|r| !r.exact);
    (bound, fallback)
}

pub fn defining_bound(d: &LabeledDesign, mode: BoundMode) -> TradeCertificate {
    defining_bound_with(d, mode, VcLimits::default(), Exec::default())
}

pub fn defining_bound_with(d: &LabeledDesign, mode: BoundMode, limits: VcLimits, exec: Exec) -> TradeCertificate {
    let g = trade_graph_with(d, exec);
    certificate_for_graph(d.num_blocks(), g, mode, limits, exec)
}

pub(crate) fn certificate_for_graph(
    blocks: usize,
    g: TradeGraph,
    mode: BoundMode,
    limits: VcLimits,
    exec: Exec,
) -> TradeCertificate {
    let (bound, fallback) = bound_of_graph(&g, mode, limits, exec);
    let cycles = crate::trades::cycles::find_cycles(&g);
    TradeCertificate {
        mode,
        blocks,
        bound,
        fallback,
        edges: g.edges,
        cycles,
    }
}

/// Outcome of re-checking a certificate against a design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateCheck {
    pub witnesses_ok: bool,
    pub bad_edges: Vec<(u32, u32)>,
    pub cycles_ok: bool,
    pub recomputed: usize,
    pub claimed: usize,
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        self.witnesses_ok && self.cycles_ok && self.recomputed >= self.claimed
    }
}

/// Re-verifies every witness and recomputes the bound on the certified edges.
pub fn check_certificate(d: &LabeledDesign, cert: &TradeCertificate, limits: VcLimits) -> CertificateCheck {
    let n = d.num_blocks() as u32;
    let mut bad = Vec::new();
    let mut edges = cert.edges.clone();
    edges.sort_by_key(|e| (e.i, e.j));
    for e in &edges {
        let ok = e.i < e.j && e.j < n && check_witness(&d.blocks[e.i as usize], &d.blocks[e.j as usize], &e.witness);
        if !ok {
            bad.push((e.i, e.j));
        }
    }
    let duplicate = edges.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j));
    let g = TradeGraph {
        vertices: d.num_blocks(),
        edges,
    };
    let cycles_ok = cert.cycles.iter().all(|c| {
        c.len() >= 3 && c.iter().all(|&x| x < n) && (0..c.len()).all(|i| g.has_edge(c[i], c[(i + 1) % c.len()]))
    });
    let recomputed = if bad.is_empty() && !duplicate && d.num_blocks() == cert.blocks {
        bound_of_graph(&g, cert.mode, limits, Exec::default()).0
    } else {
        0
    };
    CertificateCheck {
        witnesses_ok: bad.is_empty() && !duplicate,
        bad_edges: bad,
        cycles_ok,
        recomputed,
        claimed: cert.bound,
    }
}

/// Parses the text produced by [`TradeCertificate::render`].
pub fn parse_certificate(text: &str, d: &LabeledDesign) -> Result<TradeCertificate> {
    let mut head: Option<(usize, usize, BoundMode)> = None;
    let mut edges = Vec::new();
    let mut cycles = Vec::new();
    let block = |c: &mut Cursor<'_>| -> Result<OrderedBlock> {
        let t = c.tuple()?;
        let pts = t
            .iter()
            .map(|l| d.space.resolve(l))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| c.err(e.to_string()))?;
        OrderedBlock::new(pts).map_err(|e| c.err(e.to_string()))
    };
    for (ln, raw) in text.lines().enumerate() {
        let mut c = Cursor::new(strip_comment(raw), ln + 1);
        if c.at_end() {
            continue;
        }
        match c.word() {
            Some("BOUND") => {
                let bound = c.uint()? as usize;
                c.expect_str("OF")?;
                let blocks = c.uint()? as usize;
                c.expect_str("MODE")?;
                let m = c.token().ok_or_else(|| c.err("expected mode"))?;
                let mode = m.parse().map_err(|e: Error| c.err(e.to_string()))?;
                head = Some((bound, blocks, mode));
            }
            Some("EDGE") => {
                let i = c.uint()? as u32;
                let j = c.uint()? as u32;
                c.expect(':')?;
                let w0 = block(&mut c)?;
                let w1 = block(&mut c)?;
                edges.push(TradeEdge {
                    i,
                    j,
                    witness: (w0, w1),
                });
            }
            Some("CYCLE") => {
                let mut cyc = Vec::new();
                while !c.at_end() {
                    cyc.push(c.uint()? as u32);
                }
                cycles.push(cyc);
            }
            _ => return Err(c.err("expected BOUND, EDGE or CYCLE")),
        }
        if !c.at_end() {
            return Err(c.err("trailing characters"));
        }
    }
    let (bound, blocks, mode) = head.ok_or_else(|| Error::parse(1, 1, "missing BOUND line"))?;
    Ok(TradeCertificate {
        mode,
        blocks,
        bound,
        fallback: false,
        edges,
        cycles,
    })
}
