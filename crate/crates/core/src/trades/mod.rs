//! Directed trades, trade graphs and defining-set bounds.

pub mod bound;
mod cert;
mod complete;
mod cycles;
mod search;

pub use bound::VcLimits;
pub use cert::{
    check_certificate, defining_bound, defining_bound_with, parse_certificate, BoundMode, CertificateCheck,
    TradeCertificate,
};
pub use complete::{completion_search, defining_floor, Budget, Completion, Floor};
pub use cycles::{find_cycles, spanning_cycle};
pub use search::{
    check_witness, find_trade, trade_graph, trade_graph_with, trades_of, TradeEdge, TradeGraph, VolumeTwoTrade,
};

use crate::design::LabeledDesign;
use crate::error::{Error, Result};

/// Whether `s` meets every edge of the trade graph. This is necessary for `s` to be a
/// defining set; trades that are not built from volume-two trades are not examined.
pub fn hits_all_trades(d: &LabeledDesign, g: &TradeGraph, s: &[usize]) -> Result<bool> {
    let n = d.num_blocks();
    if let Some(&bad) = s.iter().find(|&&i| i >= n) {
        return Err(Error::Precondition(format!("block index {bad} out of range 0..{n}")));
    }
    let mut inside = vec![false; n];
    for &i in s {
        inside[i] = true;
    }
    Ok(g.edges.iter().all(|e| inside[e.i as usize] || inside[e.j as usize]))
}
