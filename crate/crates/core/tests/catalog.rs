use ssdd::catalog::{
    audit_all, audit_entry, render_audit, spectrum_plan, Catalog, PlanStatus, COMPOSED_TEXT, DD_TEXT, DGDD_TEXT,
    ERRATA_TEXT,
};

#[test]
fn builtin_catalog_audit_passes() {
    let cat = Catalog::builtin().unwrap();
    let rows = audit_all(&cat);
    let text = render_audit(&rows);
    assert_eq!(rows.len(), cat.entries().len());
    assert!(rows.iter().all(|r| r.passed()), "{text}");
    assert!(text.ends_with(&format!("{n} entries, {n} passed, 0 failed\n", n = rows.len())));
}

#[test]
fn uncorrected_tuple_fails_its_audit_row() {
    let corrupted = DGDD_TEXT.replace("base (0,38,37,13,12)", "base (0,38,37,12,13)");
    assert_ne!(corrupted, DGDD_TEXT);
    let cat = Catalog::from_texts(&[&corrupted, DD_TEXT], COMPOSED_TEXT, ERRATA_TEXT).unwrap();
    let i = cat.index("DGDD(5^9)").unwrap();
    let row = audit_entry(&cat, i);
    assert!(!row.errata_ok);
    assert!(!row.verified);
    assert!(!row.passed());
    let text = render_audit(&[row]);
    assert!(text.contains("1 BAD"), "{text}");
    assert!(text.contains("violation:"), "{text}");
    assert!(text.ends_with("1 entries, 0 passed, 1 failed\n"));
}

#[test]
fn errata_rows_must_name_entries() {
    let errata = format!("{ERRATA_TEXT}DGDD(7^7)\t(1)\t(1,2,3,4,5)\tno such entry\n");
    assert!(Catalog::from_texts(&[DGDD_TEXT, DD_TEXT], COMPOSED_TEXT, &errata).is_err());
}

#[test]
fn every_catalog_order_has_an_executable_plan() {
    let cat = Catalog::builtin().unwrap();
    for e in cat.entries() {
        let Some(v) = e.dd_order() else { continue };
        let plan = spectrum_plan(&cat, v).unwrap();
        assert!(plan.is_executable(), "{}", plan.render());
        assert!(matches!(plan.status, PlanStatus::Direct | PlanStatus::Executable));
    }
}
