mod common;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use common::{naive_pair_counts, permutation_trade_exists};
use ssdd::catalog::Catalog;
use ssdd::trades::{check_witness, find_trade};
use ssdd::{pair_table, OrderedBlock};

#[test]
fn naive_pair_counter_matches_pair_table_on_v21() {
    let d = Catalog::builtin().unwrap().design("DD(21)").unwrap();
    let naive = naive_pair_counts(&d);
    let table = pair_table(&d);
    for x in 0..21u32 {
        for y in 0..21u32 {
            assert_eq!(naive[x as usize][y as usize], table.get(x, y), "pair ({x},{y})");
        }
    }
}

fn shared(a: &OrderedBlock, b: &OrderedBlock) -> usize {
    a.points().iter().filter(|&&p| b.contains(p)).count()
}

/// Ten pairs of DD(41) blocks sharing two points, and ten pairs of random 5-tuples on
/// eight points.
fn random_pairs(seed: u64) -> Vec<(OrderedBlock, OrderedBlock)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let d = Catalog::builtin().unwrap().design("DD(41)").unwrap();
    let mut out = Vec::new();
    while out.len() < 10 {
        let a = &d.blocks[rng.gen_range(0..d.num_blocks())];
        let partners: Vec<&OrderedBlock> = d.blocks.iter().filter(|b| *b != a && shared(a, b) >= 2).collect();
        out.push((a.clone(), (*partners.choose(&mut rng).unwrap()).clone()));
    }
    let pool: Vec<u32> = (0..8).collect();
    while out.len() < 20 {
        let a: Vec<u32> = pool.choose_multiple(&mut rng, 5).copied().collect();
        let b: Vec<u32> = pool.choose_multiple(&mut rng, 5).copied().collect();
        if a != b {
            out.push((OrderedBlock::new(a).unwrap(), OrderedBlock::new(b).unwrap()));
        }
    }
    out
}

#[test]
fn permutation_oracle_agrees_with_find_trade() {
    let mut found = 0;
    for (a, b) in random_pairs(20) {
        let fast = find_trade(&a, &b).unwrap();
        let slow = permutation_trade_exists(&a, &b);
        assert_eq!(fast.is_some(), slow, "{:?} {:?}", a.points(), b.points());
        if let Some(w) = fast {
            assert!(check_witness(&a, &b, &w));
            found += 1;
        }
    }
    println!("{found} of 20 pairs trade");
}

#[test]
fn permutation_oracle_on_known_cases() {
    let b = |p: [u32; 5]| OrderedBlock::new(p.to_vec()).unwrap();
    // A block and its reverse swap order on every pair between them.
    assert!(permutation_trade_exists(&b([0, 1, 2, 3, 4]), &b([4, 3, 2, 1, 0])));
    assert!(!permutation_trade_exists(&b([0, 1, 2, 3, 4]), &b([5, 6, 7, 8, 9])));
}
