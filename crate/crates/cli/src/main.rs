//! `ssdd`: develop, verify, bound and compose super-simple directed designs.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ssdd::catalog::{audit_all, audit_entry, render_audit, spectrum_plan, Catalog};
use ssdd::compose::parse_recipe;
use ssdd::devel::{develop, parse_catalog_with};
use ssdd::format::{read_design, write_design};
use ssdd::trades::{
    check_certificate, completion_search, defining_bound_with, find_cycles, hits_all_trades, parse_certificate,
    trade_graph_with, BoundMode, Budget, Completion, VcLimits,
};
use ssdd::verify::{verify_dd, verify_dgdd, verify_directed, verify_super_simple_with, verify_unordered};
use ssdd::{DesignKind, Error, Exec, LabeledDesign};

/// Directory list searched for ingredient files named in recipes.
const INGREDIENTS_ENV: &str = "SSDD_INGREDIENTS";

#[derive(Parser)]
#[command(name = "ssdd", version, about = "Super-simple 2-(v,5,1) directed designs")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially. Defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Branch-and-bound nodes per trade-graph component for exact vertex cover, and the
    /// node budget of completion searches.
    #[arg(long, global = true)]
    budget_nodes: Option<u64>,
    /// Time budget of each completion search.
    #[arg(long, global = true)]
    budget_seconds: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Develop a design from a catalog DSL file.
    Develop {
        spec: String,
        /// Which design of a multi-design file; defaults to the only (or last) one.
        #[arg(long)]
        name: Option<String>,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Verify a design file.
    Verify {
        design: String,
        #[arg(long, value_enum, default_value_t = KindArg::Auto)]
        kind: KindArg,
    },
    /// Lower-bound the smallest defining set through volume-two trades.
    Bound {
        design: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Exactvc)]
        mode: ModeArg,
        /// Re-check a certificate instead of computing one.
        #[arg(long)]
        check: Option<String>,
        /// Fail unless the bound reaches this many blocks.
        #[arg(long)]
        at_least: Option<usize>,
    },
    /// List the volume-two trades of a design.
    Trades {
        design: String,
        /// Also list cycles of the trade graph.
        #[arg(long)]
        cycles: bool,
    },
    /// Test whether a set of blocks can be a defining set.
    Defining {
        design: String,
        /// Comma-separated block indices.
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        /// Count completions of the blocks instead of only checking trades.
        #[arg(long)]
        complete: bool,
    },
    /// Run a composition recipe.
    Compose {
        recipe: String,
        /// Where to write the design; the report then goes to standard error if this is `-`.
        #[arg(short, long)]
        output: Option<String>,
        /// Where to write the trade certificate.
        #[arg(long)]
        cert: Option<String>,
    },
    /// The built-in catalog.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// Construction route for a 2-(v,5,1) directed design.
    Spectrum {
        v: usize,
        /// Build the design and verify it.
        #[arg(long)]
        run: bool,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Develop, verify and bound every entry.
    Audit {
        /// Audit only these entries.
        #[arg(long)]
        entry: Vec<String>,
    },
    /// List the entries.
    List,
    /// Print a design by entry name, v, group type or generated name such as TD(6,7).
    Show { name: String },
    /// Print the errata table.
    Errata,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Coverage matching the design's kind, plus super-simplicity for directed designs.
    Auto,
    Dd,
    Dgdd,
    Unordered,
    SuperSimple,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Matching,
    Exactvc,
}

/// Failed checks exit with 1; errors exit with 2.
enum Outcome {
    Pass,
    Fail,
}

struct Ctx {
    exec: Exec,
    limits: VcLimits,
    budget: Budget,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::from(2)
        }
    }
}

fn one_line(e: &anyhow::Error) -> String {
    format!("{e:#}").lines().next().unwrap_or_default().to_string()
}

fn run(cli: Cli) -> Result<Outcome> {
    let exec = configure_threads(cli.threads)?;
    let mut limits = VcLimits::default();
    let mut budget = Budget::default();
    if let Some(n) = cli.budget_nodes {
        limits.max_nodes = n;
        budget.nodes = n;
    }
    if let Some(s) = cli.budget_seconds {
        budget.time = Duration::from_secs(s);
    }
    let ctx = Ctx { exec, limits, budget };
    match cli.cmd {
        Cmd::Develop { spec, name, output } => develop_cmd(&spec, name.as_deref(), &output),
        Cmd::Verify { design, kind } => verify_cmd(&ctx, &design, kind),
        Cmd::Bound {
            design,
            mode,
            check,
            at_least,
        } => bound_cmd(&ctx, &design, mode, check.as_deref(), at_least),
        Cmd::Trades { design, cycles } => trades_cmd(&ctx, &design, cycles),
        Cmd::Defining {
            design,
            blocks,
            complete,
        } => defining_cmd(&ctx, &design, &blocks, complete),
        Cmd::Compose { recipe, output, cert } => compose_cmd(&ctx, &recipe, output.as_deref(), cert.as_deref()),
        Cmd::Catalog { cmd } => catalog_cmd(&ctx, cmd),
        Cmd::Spectrum { v, run } => spectrum_cmd(&ctx, v, run),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> Result<Exec> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Ok(Exec::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the thread pool")?;
            Ok(Exec::Parallel)
        }
        None => Ok(Exec::Parallel),
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) -> Result<Exec> {
    if threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    Ok(Exec::Sequential)
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn write_output(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
        Ok(())
    } else {
        std::fs::write(path, text).with_context(|| format!("writing {path}"))
    }
}

fn load_design(path: &str) -> Result<LabeledDesign> {
    read_design(&read_input(path)?).with_context(|| format!("parsing design {path}"))
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn develop_cmd(spec: &str, name: Option<&str>, output: &str) -> Result<Outcome> {
    let text = read_input(spec)?;
    // Embedded designs may refer to built-in catalog entries.
    let known = ssdd::devel::parse_catalog(ssdd::catalog::DD_TEXT)?;
    let specs = parse_catalog_with(&text, &known).with_context(|| format!("parsing {spec}"))?;
    let chosen = match name {
        Some(n) => specs
            .iter()
            .find(|s| s.name == n)
            .ok_or_else(|| anyhow!("no design named {n} in {spec}"))?,
        None => specs.last().ok_or_else(|| anyhow!("{spec} contains no design"))?,
    };
    let d = develop(chosen)?;
    write_output(output, &write_design(&d))?;
    Ok(Outcome::Pass)
}

fn verify_cmd(ctx: &Ctx, path: &str, kind: KindArg) -> Result<Outcome> {
    let d = load_design(path)?;
    let report = match kind {
        KindArg::Auto if d.ordered => verify_directed(&d)?,
        KindArg::Auto | KindArg::Unordered => verify_unordered(&d, &[])?,
        KindArg::Dd => verify_dd(&d)?.merge(verify_super_simple_with(&d, ctx.exec)),
        KindArg::Dgdd => verify_dgdd(&d)?.merge(verify_super_simple_with(&d, ctx.exec)),
        KindArg::SuperSimple => verify_super_simple_with(&d, ctx.exec),
    };
    print!("{report}");
    Ok(verdict(report.passed()))
}

fn bound_cmd(ctx: &Ctx, path: &str, mode: ModeArg, check: Option<&str>, at_least: Option<usize>) -> Result<Outcome> {
    let d = load_design(path)?;
    if !d.ordered {
        bail!("bound needs a directed design");
    }
    if let Some(cert_path) = check {
        let cert = parse_certificate(&read_input(cert_path)?, &d).with_context(|| format!("parsing {cert_path}"))?;
        let c = check_certificate(&d, &cert, ctx.limits);
        println!("RESULT {}", if c.passed() { "pass" } else { "fail" });
        println!("CLAIMED {} RECOMPUTED {}", c.claimed, c.recomputed);
        println!("WITNESSES {}", if c.witnesses_ok { "pass" } else { "fail" });
        println!("CYCLES {}", if c.cycles_ok { "pass" } else { "fail" });
        for (i, j) in &c.bad_edges {
            println!("BAD EDGE {i} {j}");
        }
        return Ok(verdict(c.passed() && at_least.is_none_or(|n| c.claimed >= n)));
    }
    let mode = match mode {
        ModeArg::Matching => BoundMode::Matching,
        ModeArg::Exactvc => BoundMode::ExactVc,
    };
    let cert = defining_bound_with(&d, mode, ctx.limits, ctx.exec);
    print!("{}", cert.render(&d));
    Ok(verdict(at_least.is_none_or(|n| cert.bound >= n)))
}

fn trades_cmd(ctx: &Ctx, path: &str, cycles: bool) -> Result<Outcome> {
    let d = load_design(path)?;
    if !d.ordered {
        bail!("trades needs a directed design");
    }
    let g = trade_graph_with(&d, ctx.exec);
    println!("TRADES {} BLOCKS {}", g.edges.len(), d.num_blocks());
    for e in &g.edges {
        println!(
            "TRADE {} {} : {} {} -> {} {}",
            e.i,
            e.j,
            d.blocks[e.i as usize].display(&d.space),
            d.blocks[e.j as usize].display(&d.space),
            e.witness.0.display(&d.space),
            e.witness.1.display(&d.space)
        );
    }
    let comps = g.components();
    println!("COMPONENTS {}", comps.len());
    if cycles {
        for c in find_cycles(&g) {
            let ids: Vec<String> = c.iter().map(u32::to_string).collect();
            println!("CYCLE {}", ids.join(" "));
        }
    }
    Ok(Outcome::Pass)
}

fn defining_cmd(ctx: &Ctx, path: &str, blocks: &[usize], complete: bool) -> Result<Outcome> {
    let d = load_design(path)?;
    if !d.ordered {
        bail!("defining needs a directed design");
    }
    let g = trade_graph_with(&d, ctx.exec);
    let hits = hits_all_trades(&d, &g, blocks)?;
    println!("HITS_ALL_TRADES {}", if hits { "yes" } else { "no" });
    if !complete {
        return Ok(verdict(hits));
    }
    if d.kind != DesignKind::DD {
        bail!("--complete needs a 2-(v,5,1) directed design");
    }
    let given: Vec<_> = blocks.iter().map(|&i| d.blocks[i].clone()).collect();
    let c = completion_search(d.v(), &given, ctx.budget)?;
    let (count, defining) = match &c {
        Completion::None => ("0".to_string(), "no"),
        Completion::Unique(_) => ("1".to_string(), "yes"),
        Completion::Several(..) => (">=2".to_string(), "no"),
        Completion::Indeterminate { found, nodes } => {
            (format!("indeterminate ({found} found, {nodes} nodes)"), "unknown")
        }
    };
    println!("COMPLETIONS {count}");
    println!("DEFINING {defining}");
    if let Completion::Several(a, b) = &c {
        let differ = b.iter().filter(|blk| !a.contains(blk)).count();
        println!("SECOND_COMPLETION_DIFFERS_IN {differ} BLOCKS");
    }
    Ok(verdict(defining == "yes"))
}

fn catalog_for(ctx: &Ctx, recipe_dir: Option<&Path>) -> Result<Catalog> {
    let mut cat = Catalog::builtin()?
        .with_exec(ctx.exec)
        .with_limits(ctx.limits)
        .with_budget(ctx.budget);
    if let Some(d) = recipe_dir {
        cat = cat.with_search_dir(d);
    }
    if let Some(dirs) = std::env::var_os(INGREDIENTS_ENV) {
        for d in std::env::split_paths(&dirs) {
            cat = cat.with_search_dir(d);
        }
    }
    Ok(cat)
}

fn compose_cmd(ctx: &Ctx, path: &str, output: Option<&str>, cert_path: Option<&str>) -> Result<Outcome> {
    let spec = parse_recipe(&read_input(path)?).with_context(|| format!("parsing recipe {path}"))?;
    let dir = (path != "-")
        .then(|| Path::new(path).parent().map(PathBuf::from))
        .flatten();
    let cat = catalog_for(ctx, dir.as_deref())?;
    let comp = match spec.run(&cat, ctx.exec) {
        Ok(c) => c,
        Err(Error::Verification(report)) => {
            println!("{report}");
            return Ok(Outcome::Fail);
        }
        Err(e) => return Err(e.into()),
    };
    let bound = comp.bound_with_floors(|d| floor_of(&cat, d));
    let mut report = comp.report.to_string();
    report.push_str(&format!(
        "BOUND {} OF {} ({}{})\n",
        bound,
        comp.design.num_blocks(),
        if comp.translated { "translated" } else { "direct" },
        if bound > comp.certificate.bound {
            ", with filler floors"
        } else {
            ""
        }
    ));
    if let Some(o) = output {
        write_output(o, &write_design(&comp.design))?;
    }
    if let Some(c) = cert_path {
        write_output(c, &comp.certificate.render(&comp.design))?;
    }
    if output == Some("-") {
        eprint!("{report}");
    } else {
        print!("{report}");
    }
    Ok(verdict(comp.report.passed()))
}

/// Bound of the catalog `DD(v)` entry equal to `d`, if any.
fn floor_of(cat: &Catalog, d: &LabeledDesign) -> usize {
    let Some(i) = cat.index(&format!("DD({})", d.v())) else {
        return 0;
    };
    match cat.built(i) {
        Ok(b) if b.design == *d => cat.lower_bound(i).map_or(0, |b| b.bound),
        _ => 0,
    }
}

fn catalog_cmd(ctx: &Ctx, cmd: CatalogCmd) -> Result<Outcome> {
    let cat = catalog_for(ctx, None)?;
    match cmd {
        CatalogCmd::Audit { entry } => {
            let rows = if entry.is_empty() {
                audit_all(&cat)
            } else {
                let mut rows = Vec::new();
                for n in &entry {
                    let i = cat.index(n).ok_or_else(|| anyhow!("no catalog entry {n}"))?;
                    rows.push(audit_entry(&cat, i));
                }
                rows
            };
            print!("{}", render_audit(&rows));
            Ok(verdict(rows.iter().all(|r| r.passed())))
        }
        CatalogCmd::List => {
            println!(
                "{:<16} {:<14} {:>8} {:>11} {:>6}",
                "entry", "family", "blocks", "claim", "errata"
            );
            for e in cat.entries() {
                let blocks = e.claims.blocks.map_or("-".into(), |b| b.to_string());
                let claim = e.claims.f.map_or("-".into(), |(n, d)| format!("{n}/{d}"));
                println!(
                    "{:<16} {:<14} {:>8} {:>11} {:>6}",
                    e.name,
                    e.family(),
                    blocks,
                    claim,
                    e.errata.len()
                );
            }
            Ok(Outcome::Pass)
        }
        CatalogCmd::Show { name } => {
            let d = match cat.index(&name) {
                Some(i) => cat.built(i)?.design.clone(),
                None => match cat.design(&name) {
                    Ok(d) => d,
                    Err(Error::NotFound(_)) => {
                        let e = cat.lookup(&name)?;
                        cat.design(&e.name)?
                    }
                    Err(e) => return Err(e.into()),
                },
            };
            write_output("-", &write_design(&d))?;
            Ok(Outcome::Pass)
        }
        CatalogCmd::Errata => {
            for r in cat.errata() {
                println!("{}\t{}\t{}\t{}", r.entry, r.printed, r.stored, r.justification);
            }
            Ok(Outcome::Pass)
        }
    }
}

fn spectrum_cmd(ctx: &Ctx, v: usize, run: bool) -> Result<Outcome> {
    let cat = catalog_for(ctx, None)?;
    let plan = spectrum_plan(&cat, v)?;
    print!("{}", plan.render());
    if !run {
        return Ok(Outcome::Pass);
    }
    let Some(name) = plan.entry.as_deref().filter(|_| plan.is_executable()) else {
        println!("RUN not executable: {}", plan.external().join("; "));
        return Ok(Outcome::Fail);
    };
    let i = cat.index(name).ok_or_else(|| anyhow!("no catalog entry {name}"))?;
    let row = audit_entry(&cat, i);
    print!("{}", render_audit(std::slice::from_ref(&row)));
    Ok(verdict(row.passed()))
}
