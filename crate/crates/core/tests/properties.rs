use std::sync::OnceLock;

use proptest::prelude::*;

use ssdd::catalog::{parse_composed, Catalog, EntrySource, DD_TEXT, DGDD_TEXT};
use ssdd::compose::parse_recipe;
use ssdd::devel::{develop, emit_catalog, parse_catalog, roundtrip};
use ssdd::format::{read_design, write_design};
use ssdd::trades::{check_witness, defining_bound, find_trade, trade_graph, BoundMode};
use ssdd::verify::{verify_directed, verify_super_simple, verify_unordered};
use ssdd::{LabeledDesign, OrderedBlock};

fn catalog() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| Catalog::builtin().unwrap())
}

/// Small designs of each kind, plus one with a swapped pair so that some verdicts fail.
fn samples() -> &'static [LabeledDesign] {
    static S: OnceLock<Vec<LabeledDesign>> = OnceLock::new();
    S.get_or_init(|| {
        let cat = catalog();
        let mut out: Vec<LabeledDesign> = [
            "DD(11)",
            "DD(21)",
            "DGDD(5^5)",
            "DGDD(4^5)",
            "DGDD(1^16 5^1)",
            "TD(5,5)",
        ]
        .iter()
        .map(|n| cat.design(n).unwrap())
        .collect();
        let mut broken = cat.design("DD(25)").unwrap();
        let mut p = broken.blocks[3].points().to_vec();
        p.swap(1, 3);
        broken.blocks[3] = OrderedBlock::new(p).unwrap();
        out.push(broken);
        out
    })
}

/// Verdicts that must not depend on point names.
fn verdicts(d: &LabeledDesign) -> Vec<(String, bool, usize)> {
    let mut out = Vec::new();
    let r = if d.ordered {
        verify_directed(d).unwrap()
    } else {
        verify_unordered(d, &[]).unwrap()
    };
    for (name, ok) in &r.checks {
        out.push((
            name.clone(),
            *ok,
            r.violations.iter().filter(|v| v.kind == *name).count(),
        ));
    }
    out.push(("violations".into(), r.passed(), r.violations.len() + r.omitted));
    let s = verify_super_simple(d);
    out.push(("super-simple".into(), s.passed(), s.violations.len() + s.omitted));
    if d.ordered {
        let g = trade_graph(d);
        out.push(("trade-edges".into(), true, g.edges.len()));
        out.push(("bound".into(), true, defining_bound(d, BoundMode::ExactVc).bound));
    }
    out
}

fn design_and_perm() -> impl Strategy<Value = (usize, Vec<u32>)> {
    (0..samples().len()).prop_flat_map(|i| {
        let v = samples()[i].v() as u32;
        (Just(i), Just((0..v).collect::<Vec<u32>>()).prop_shuffle())
    })
}

fn block_on(points: u32) -> impl Strategy<Value = OrderedBlock> {
    Just((0..points).collect::<Vec<u32>>())
        .prop_shuffle()
        .prop_map(|p| OrderedBlock::new(p[..5].to_vec()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verifiers_ignore_point_names((i, perm) in design_and_perm()) {
        let d = &samples()[i];
        let e = d.relabel(&perm).unwrap();
        prop_assert_eq!(verdicts(d), verdicts(&e));
    }

    #[test]
    fn find_trade_is_symmetric(a in block_on(8), b in block_on(8)) {
        prop_assume!(a != b);
        let ab = find_trade(&a, &b).unwrap();
        let ba = find_trade(&b, &a).unwrap();
        prop_assert_eq!(ab.is_some(), ba.is_some());
        if let Some(w) = ab {
            prop_assert!(check_witness(&a, &b, &w));
            prop_assert!(check_witness(&b, &a, &w));
        }
    }

    #[test]
    fn find_trade_ignores_point_names(a in block_on(9), b in block_on(9), perm in Just((0..9u32).collect::<Vec<_>>()).prop_shuffle()) {
        prop_assume!(a != b);
        let f = |x: &OrderedBlock| x.map(|p| perm[p as usize]).unwrap();
        prop_assert_eq!(find_trade(&a, &b).unwrap().is_some(), find_trade(&f(&a), &f(&b)).unwrap().is_some());
    }
}

#[test]
fn every_trade_edge_witness_rechecks() {
    let cat = catalog();
    let mut edges = 0;
    for e in cat.entries().iter().filter(|e| !e.is_composed()) {
        let d = cat.design(&e.name).unwrap();
        let g = trade_graph(&d);
        for t in &g.edges {
            let (a, b) = (&d.blocks[t.i as usize], &d.blocks[t.j as usize]);
            assert!(check_witness(a, b, &t.witness), "{} edge {} {}", e.name, t.i, t.j);
        }
        edges += g.edges.len();
    }
    assert!(edges > 0);
}

#[test]
fn catalog_text_roundtrips() {
    let text = format!("{DGDD_TEXT}\n{DD_TEXT}");
    let specs = parse_catalog(&text).unwrap();
    let again = roundtrip(&specs).unwrap();
    assert_eq!(specs, again);
    assert_eq!(emit_catalog(&specs), emit_catalog(&again));
    for s in &specs {
        assert_eq!(
            develop(s).unwrap(),
            develop(again.iter().find(|t| t.name == s.name).unwrap()).unwrap()
        );
    }
}

#[test]
fn composed_recipes_roundtrip() {
    for e in parse_composed(ssdd::catalog::COMPOSED_TEXT).unwrap() {
        let EntrySource::Recipe(r) = &e.source else {
            panic!("{} is not a recipe", e.name)
        };
        assert_eq!(&parse_recipe(&r.to_string()).unwrap(), r, "{}", e.name);
    }
}

#[test]
fn design_files_roundtrip() {
    let cat = catalog();
    for e in cat.entries().iter().filter(|e| !e.is_composed()) {
        let d = cat.design(&e.name).unwrap();
        let text = write_design(&d);
        let back = read_design(&text).unwrap();
        assert_eq!(back, d, "{}", e.name);
        assert_eq!(write_design(&back), text);
    }
}
