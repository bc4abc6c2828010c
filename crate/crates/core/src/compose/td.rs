//! Transversal designs and the GDD surgery built on them.

use crate::compose::gf::Field;
use crate::design::{DesignKind, Label, LabeledDesign, OrderedBlock, PointSpace};
use crate::error::{Error, Result};
use crate::verify::{verify_directed, verify_resolution, verify_unordered};

pub(crate) fn checked_unordered(d: LabeledDesign, sizes: &[usize]) -> Result<LabeledDesign> {
    let r = verify_unordered(&d, sizes)?;
    if r.passed() {
        Ok(d)
    } else {
        Err(Error::Verification(r.to_string()))
    }
}

pub(crate) fn checked_directed(d: LabeledDesign) -> Result<LabeledDesign> {
    let r = verify_directed(&d)?;
    if r.passed() {
        Ok(d)
    } else {
        Err(Error::Verification(r.to_string()))
    }
}

/// First `count` labels `INFj` not already present in `space`.
fn fresh_infinities(space: &PointSpace, count: usize) -> Vec<Label> {
    (0u32..)
        .map(Label::Inf)
        .filter(|l| space.index_of(l).is_none())
        .take(count)
        .collect()
}

fn extended_space(space: &PointSpace, extra: &[Label]) -> Result<PointSpace> {
    PointSpace::new(space.labels().iter().chain(extra).copied().collect())
}

/// TD(k,q) from the field GF(q): point `(i,x)` has index `i*q + x`, and the block for
/// `(x,y)` meets group 0 in `x`, group 1 in `y` and group `i >= 2` in `x + a_{i-1} y`,
/// where `a_j` is the field element numbered `j`.
pub fn td_from_mols(k: usize, q: u32) -> Result<LabeledDesign> {
    let f = Field::new(q)?;
    if k < 2 || k > q as usize + 1 {
        return Err(Error::Precondition(format!("TD({k},{q}) needs 2 <= k <= {}", q + 1)));
    }
    let mut blocks = Vec::with_capacity((q * q) as usize);
    for x in 0..q {
        for y in 0..q {
            let pts = (0..k as u32)
                .map(|i| {
                    let coord = match i {
                        0 => x,
                        1 => y,
                        _ => f.add(x, f.mul(i - 1, y)),
                    };
                    i * q + coord
                })
                .collect();
            blocks.push(OrderedBlock::new(pts)?);
        }
    }
    let groups = (0..k as u32).map(|i| (i * q..(i + 1) * q).collect()).collect();
    let d = LabeledDesign::new(
        PointSpace::grid(k as u64, q as u64),
        blocks,
        Some(groups),
        1,
        DesignKind::TD,
    )?;
    checked_unordered(d, &[k])
}

/// Deletes the last `y` points of group `group`; blocks keep size k or drop to k-1.
pub fn truncate_td(td: &LabeledDesign, group: usize, y: usize) -> Result<LabeledDesign> {
    if td.kind != DesignKind::TD {
        return Err(Error::Precondition(format!(
            "truncate_td expects a TD, got {}",
            td.kind
        )));
    }
    let groups = td.partition.as_ref().ok_or(Error::MissingPartition)?;
    let g = groups
        .get(group)
        .ok_or_else(|| Error::Precondition(format!("group {group} of {}", groups.len())))?;
    if y > g.len() {
        return Err(Error::Precondition(format!(
            "cannot remove {y} points from a group of {}",
            g.len()
        )));
    }
    if y == 0 {
        return Ok(td.clone());
    }
    let k = groups.len();
    let mut d = td.delete_points(&g[g.len() - y..])?;
    d.kind = DesignKind::GDD;
    checked_unordered(d, &[k - 1, k])
}

/// Removes point `p` from a PBD; the blocks through `p` become the groups.
pub fn delete_point(pbd: &LabeledDesign, p: u32) -> Result<LabeledDesign> {
    if pbd.ordered || pbd.partition.is_some() {
        return Err(Error::Precondition("delete_point expects a PBD without groups".into()));
    }
    if p as usize >= pbd.v() {
        return Err(Error::Precondition(format!("point index {p} not in design")));
    }
    let mut groups = Vec::new();
    let mut blocks = Vec::new();
    for b in &pbd.blocks {
        if b.contains(p) {
            groups.push(b.points().iter().copied().filter(|&x| x != p).collect::<Vec<_>>());
        } else {
            blocks.push(b.clone());
        }
    }
    // The deleted point sits alone in a group that delete_points then drops.
    groups.push(vec![p]);
    let full = LabeledDesign::new(pbd.space.clone(), blocks, Some(groups), pbd.lambda, DesignKind::GDD)?;
    let d = full.delete_points(&[p])?;
    checked_unordered(d, &[])
}

/// Adds a point `y` to every group of a TD(k,n), then deletes `z`: a {k, n+1}-GDD of
/// type (k-1)^n n^1.
pub fn adjoin_and_delete(td: &LabeledDesign, z: u32) -> Result<LabeledDesign> {
    if td.kind != DesignKind::TD {
        return Err(Error::Precondition(format!(
            "adjoin_and_delete expects a TD, got {}",
            td.kind
        )));
    }
    let groups = td.partition.as_ref().ok_or(Error::MissingPartition)?;
    let k = groups.len();
    let n = groups.first().map_or(0, |g| g.len());
    let r = verify_unordered(td, &[k])?;
    if !r.passed() {
        return Err(Error::Verification(r.to_string()));
    }
    if z as usize >= td.v() {
        return Err(Error::Precondition(format!("point index {z} not in design")));
    }
    let y = td.v() as u32;
    let space = extended_space(&td.space, &fresh_infinities(&td.space, 1))?;
    let mut blocks: Vec<OrderedBlock> = td.blocks.iter().filter(|b| !b.contains(z)).cloned().collect();
    let mut new_groups: Vec<Vec<u32>> = td
        .blocks
        .iter()
        .filter(|b| b.contains(z))
        .map(|b| b.points().iter().copied().filter(|&x| x != z).collect())
        .collect();
    for g in groups {
        if g.contains(&z) {
            let mut h: Vec<u32> = g.iter().copied().filter(|&x| x != z).collect();
            h.push(y);
            new_groups.push(h);
        } else {
            let mut b = g.clone();
            b.push(y);
            blocks.push(OrderedBlock::new(b)?);
        }
    }
    new_groups.push(vec![z]);
    let full = LabeledDesign::new(space, blocks, Some(new_groups), 1, DesignKind::GDD)?;
    let d = full.delete_points(&[z])?;
    checked_unordered(d, &[k, n + 1])
}

/// Adds `x` new points forming a new group; new point `i` joins every block of class `i`.
pub fn extend_resolvable(rgdd: &LabeledDesign, classes: &[Vec<usize>], x: usize) -> Result<LabeledDesign> {
    if x > classes.len() {
        return Err(Error::Precondition(format!(
            "cannot add {x} points with only {} parallel classes",
            classes.len()
        )));
    }
    let r = verify_resolution(rgdd, classes)?;
    if !r.passed() {
        return Err(Error::Verification(r.to_string()));
    }
    if x == 0 {
        return Ok(rgdd.clone());
    }
    let groups = rgdd.partition.as_ref().ok_or(Error::MissingPartition)?;
    let v = rgdd.v() as u32;
    let space = extended_space(&rgdd.space, &fresh_infinities(&rgdd.space, x))?;
    let mut blocks = rgdd.blocks.clone();
    for (i, class) in classes.iter().take(x).enumerate() {
        for &b in class {
            let mut pts = blocks[b].points().to_vec();
            pts.push(v + i as u32);
            blocks[b] = OrderedBlock::new(pts)?;
        }
    }
    let mut new_groups = groups.clone();
    new_groups.push((v..v + x as u32).collect());
    let d = LabeledDesign::new(space, blocks, Some(new_groups), rgdd.lambda, DesignKind::GDD)?;
    let mut sizes = rgdd.block_sizes();
    sizes.extend(sizes.clone().iter().map(|s| s + 1));
    checked_unordered(d, &sizes)
}

/// A DGDD of type q^k from two TD(k,q) on the same groups.
///
/// The first TD has blocks `{(i, x + a_i y)}` read in group order. The second has blocks
/// `{(i, x + a_i y + c a_i^2)}` read in reverse group order, so together they cover every
/// ordered cross-group pair once. A block of one meets a block of the other where a
/// quadratic in `a_i` vanishes, which happens at most twice. The shift `c` is the first
/// nonzero element for which the result verifies.
pub fn dgdd_from_two_tds(k: usize, q: u32) -> Result<LabeledDesign> {
    let f = Field::new(q)?;
    if k < 2 || k > q as usize {
        return Err(Error::Precondition(format!(
            "two TD({k},{q}) arrangement needs 2 <= k <= {q}"
        )));
    }
    let groups: Vec<Vec<u32>> = (0..k as u32).map(|i| (i * q..(i + 1) * q).collect()).collect();
    let mut last = None;
    for c in 1..q {
        let mut blocks = Vec::with_capacity(2 * (q * q) as usize);
        for shift in [0, c] {
            for x in 0..q {
                for y in 0..q {
                    let mut pts: Vec<u32> = (0..k as u32)
                        .map(|i| {
                            let a = i;
                            let quad = f.mul(shift, f.mul(a, a));
                            i * q + f.add(f.add(x, f.mul(a, y)), quad)
                        })
                        .collect();
                    if shift != 0 {
                        pts.reverse();
                    }
                    blocks.push(OrderedBlock::new(pts)?);
                }
            }
        }
        let d = LabeledDesign::new(
            PointSpace::grid(k as u64, q as u64),
            blocks,
            Some(groups.clone()),
            1,
            DesignKind::DGDD,
        )?;
        match checked_directed(d) {
            Ok(d) => return Ok(d),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Precondition(format!("no arrangement for q={q}"))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::gf::prime_power;

    #[test]
    fn td_all_small_prime_powers() {
        for q in 2..=16u32 {
            if prime_power(q).is_none() {
                continue;
            }
            for k in 2..=q as usize + 1 {
                let td = td_from_mols(k, q).unwrap();
                assert_eq!(td.num_blocks(), (q * q) as usize);
            }
        }
        assert!(matches!(td_from_mols(8, 6), Err(Error::NotPrimePower(6))));
        assert!(td_from_mols(7, 5).is_err());
    }

    #[test]
    fn td_9_uses_extension_field() {
        let td = td_from_mols(6, 9).unwrap();
        assert_eq!(td.group_type().unwrap().to_string(), "9^6");
    }

    #[test]
    fn truncation() {
        let td = td_from_mols(6, 7).unwrap();
        let g = truncate_td(&td, 5, 5).unwrap();
        assert_eq!(g.group_type().unwrap().to_string(), "2^1 7^5");
        assert_eq!(g.block_sizes(), vec![5, 6]);
        let full = truncate_td(&td, 5, 7).unwrap();
        assert_eq!(full.group_type().unwrap().to_string(), "7^5");
        assert_eq!(full.block_sizes(), vec![5]);
        assert_eq!(truncate_td(&td, 0, 0).unwrap(), td);
        assert!(truncate_td(&td, 6, 1).is_err());
        assert!(truncate_td(&td, 0, 8).is_err());
    }

    #[test]
    fn adjoin_signatures() {
        for (k, n, want) in [(6, 9, "5^9 9^1"), (6, 8, "5^8 8^1"), (5, 5, "4^5 5^1")] {
            let td = td_from_mols(k, n).unwrap();
            for z in [0, td.v() as u32 - 1] {
                let g = adjoin_and_delete(&td, z).unwrap();
                assert_eq!(g.group_type().unwrap().to_string(), want);
            }
        }
    }

    #[test]
    fn delete_point_of_single_block() {
        let pbd = LabeledDesign::new(
            PointSpace::plain(5),
            vec![OrderedBlock::new(vec![0, 1, 2, 3, 4]).unwrap()],
            None,
            1,
            DesignKind::PBD,
        )
        .unwrap();
        let g = delete_point(&pbd, 2).unwrap();
        assert_eq!(g.num_blocks(), 0);
        assert_eq!(g.group_type().unwrap().to_string(), "4^1");
        assert!(delete_point(&pbd, 5).is_err());
    }

    #[test]
    fn two_td_dgdd_small() {
        let d = dgdd_from_two_tds(5, 7).unwrap();
        assert_eq!(d.num_blocks(), 98);
    }
}
