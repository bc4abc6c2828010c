use ssdd::compose::{adjoin_and_delete, extend_resolvable, td_from_mols, truncate_td};
use ssdd::verify::verify_unordered;
use ssdd::{Error, GroupType};

const PRIME_POWERS: [u32; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

#[test]
fn adjoin_and_delete_on_every_small_td() {
    for n in PRIME_POWERS {
        for k in 2..=n as usize + 1 {
            let td = td_from_mols(k, n).unwrap();
            for z in [0, td.v() as u32 - 1] {
                let d = adjoin_and_delete(&td, z).unwrap();
                assert!(
                    verify_unordered(&d, &[k, n as usize + 1]).unwrap().passed(),
                    "TD({k},{n}) z={z}"
                );
                let mut sizes = vec![k as u32 - 1; n as usize];
                sizes.push(n);
                assert_eq!(d.group_type().unwrap(), GroupType::from_sizes(sizes), "TD({k},{n})");
            }
        }
    }
}

#[test]
fn truncating_a_whole_group_leaves_a_uniform_gdd() {
    for n in [5u32, 7, 8, 9, 11] {
        let d = truncate_td(&td_from_mols(6, n).unwrap(), 5, n as usize).unwrap();
        assert!(verify_unordered(&d, &[5]).unwrap().passed());
        assert_eq!(d.group_type().unwrap().to_string(), format!("{n}^5"));
        assert_eq!(d.num_blocks(), (n * n) as usize);
    }
}

#[test]
fn resolvable_extension_respects_class_count() {
    let q = 7u32;
    let big = td_from_mols(6, q).unwrap();
    let last = 5 * q;
    let mut classes = vec![Vec::new(); q as usize];
    for (i, b) in big.blocks.iter().enumerate() {
        let p = b.points().iter().find(|&&p| p >= last).unwrap();
        classes[(p - last) as usize].push(i);
    }
    let rgdd = truncate_td(&big, 5, q as usize).unwrap();
    for x in 0..=classes.len() {
        let d = extend_resolvable(&rgdd, &classes, x).unwrap();
        assert_eq!(d.v(), rgdd.v() + x);
        if x > 0 {
            assert_eq!(
                d.group_type().unwrap().to_string(),
                format!("{x}^1 7^5").replace("7^1 7^5", "7^6")
            );
        }
    }
    assert!(matches!(
        extend_resolvable(&rgdd, &classes, classes.len() + 1),
        Err(Error::Precondition(_))
    ));
}
