use std::io::Write;
use std::process::{Command, Output, Stdio};

fn ssdd(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ssdd"))
        .args(args)
        .env_remove("SSDD_INGREDIENTS")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn ssdd");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(s) = stdin {
            pipe.write_all(s.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn show(name: &str) -> String {
    let o = ssdd(&["catalog", "show", name], None);
    assert!(o.status.success(), "{}", stderr(&o));
    stdout(&o)
}

#[test]
fn show_then_verify_from_stdin() {
    let design = show("DGDD(5^7)");
    let o = ssdd(&["verify", "-"], Some(&design));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("RESULT pass\n"), "{out}");
    assert!(out.contains("CHECK super-simple pass"));
    assert!(out.contains("COUNT blocks=105 "));
}

#[test]
fn corrupted_design_fails_verification() {
    let design = show("DD(21)");
    let mut lines: Vec<String> = design.lines().map(String::from).collect();
    // Swap the first two points of the first block: the ordered pairs it covers change.
    let first = lines.iter().position(|l| l.starts_with('(')).unwrap();
    let inner = lines[first].trim_start_matches('(').trim_end_matches(')').to_string();
    let mut pts: Vec<&str> = inner.split(',').collect();
    pts.swap(0, 1);
    lines[first] = format!("({})", pts.join(","));
    let o = ssdd(&["verify", "-"], Some(&(lines.join("\n") + "\n")));
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.starts_with("RESULT fail\n"));
    assert!(out.contains("VIOLATION"));
}

#[test]
fn bound_on_dd85_reaches_claim() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dd85.txt");
    std::fs::write(&path, show("DD(85)")).unwrap();
    let p = path.to_str().unwrap();
    let o = ssdd(&["bound", p, "--at-least", "357"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let head = out.lines().next().unwrap();
    let bound: usize = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(bound >= 357, "{head}");

    // The certificate re-checks independently.
    let cert = dir.path().join("dd85.cert");
    std::fs::write(&cert, &out).unwrap();
    let o = ssdd(&["bound", p, "--check", cert.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("RESULT pass\n"));
}

#[test]
fn tampered_certificate_is_rejected() {
    let design = show("DD(21)");
    let dir = tempfile::tempdir().unwrap();
    let dpath = dir.path().join("d.txt");
    std::fs::write(&dpath, &design).unwrap();
    let o = ssdd(&["bound", dpath.to_str().unwrap()], None);
    let cert = stdout(&o).replacen("BOUND 21 ", "BOUND 22 ", 1);
    let cpath = dir.path().join("c.txt");
    std::fs::write(&cpath, cert).unwrap();
    let o = ssdd(
        &["bound", dpath.to_str().unwrap(), "--check", cpath.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("RESULT fail\n"));
}

#[test]
fn inadmissible_order_is_a_usage_error() {
    let o = ssdd(&["spectrum", "12"], None);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("v must be 1 or 5 mod 10"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = ssdd(&["verify", "/nonexistent/design.txt"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: reading /nonexistent/design.txt"));
    let o = ssdd(&["frobnicate"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compose_writes_design_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let recipe = dir.path().join("r.rcp");
    std::fs::write(
        &recipe,
        "master catalog:DGDD(5^5)\nweight default 5\ningredient sig=5^5 catalog:TD(5,5)\nfill group all catalog:DD(25)\n",
    )
    .unwrap();
    let out = dir.path().join("d.txt");
    let cert = dir.path().join("c.txt");
    let o = ssdd(
        &[
            "compose",
            recipe.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
            "--cert",
            cert.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("RESULT pass\n"));
    let o = ssdd(&["verify", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("COUNT blocks=1550 "));
    let o = ssdd(
        &[
            "bound",
            out.to_str().unwrap(),
            "--check",
            cert.to_str().unwrap(),
            "--at-least",
            "775",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn compose_finds_ingredients_beside_the_recipe() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("dd25.txt"), show("DD(25)")).unwrap();
    let recipe = dir.path().join("r.rcp");
    std::fs::write(
        &recipe,
        "master catalog:DGDD(5^5)\nweight default 5\ningredient sig=5^5 catalog:TD(5,5)\nfill group all dd25.txt\n",
    )
    .unwrap();
    let o = ssdd(&["compose", recipe.to_str().unwrap(), "-o", "-"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("RESULT pass\n"));
    assert!(stdout(&o).starts_with("design v=125 "));
}

#[test]
fn sequential_and_parallel_output_agree() {
    let design = show("DD(41)");
    let a = ssdd(&["--threads", "1", "trades", "-"], Some(&design));
    let b = ssdd(&["--threads", "2", "trades", "-"], Some(&design));
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn spectrum_reports_open_and_external_cases() {
    let o = ssdd(&["spectrum", "91"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("v=91: unresolved"), "{}", stdout(&o));
    let o = ssdd(&["spectrum", "15"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no super-simple 2-(v,5,1)DD exists"));
}

#[test]
fn develop_matches_catalog_show() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("d.ssd");
    std::fs::write(
        &spec,
        "design DD(11)\nkind DD\nspace mod 11\nblock (1,2,3,4,5)\nblock (5,1,6,7,8)\nblock (6,3,1,9,10)\n\
         block (9,8,4,1,0)\nblock (2,7,0,10,1)\nblock (3,0,2,8,6)\nblock (8,5,10,2,9)\nblock (7,4,9,6,2)\n\
         block (4,10,8,3,7)\nblock (0,9,7,5,3)\nblock (10,6,5,0,4)\n",
    )
    .unwrap();
    let o = ssdd(&["develop", spec.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), show("DD(11)"));
}
