//! Command implementations behind the `roundtrip` binary.
//!
//! Every command reads its inputs from the run configuration, writes its
//! artifacts into the output directory and records itself in that
//! directory's `manifest.json`. Results never depend on the thread count:
//! molecules are processed in parallel and written back in input order.

pub mod config;
pub mod error;

use anyhow::{Context as _, Result};
use config::{Layer, RunConfig};
use error::Failure;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use roundtrip::chem::{parse_smiles, Molecule};
use roundtrip::corpus::closed_world;
use roundtrip::metrics::{
    classify_route, confusion_stats, match_starting_materials, search_success_rate, summarize, Cell,
    ConfusionCounts, ConfusionStats, EvalRecord,
};
use roundtrip::network::{
    build_network, default_stock, extract_routes, find_targets, split_dataset, RouteOptions, StockSet,
    SyntheticRoute,
};
use roundtrip::planner::PlannerConfig;
use roundtrip::reaction::{deduplicate, ingest_lines, ReactionDataset};
use roundtrip::simulate::score_molecule;
use roundtrip::templates::{extract_templates, Direction, TemplateLibrary};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// A validated configuration together with its raw layer and hash.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub layer: Layer,
    pub hash: String,
}

impl Context {
    /// Merges defaults, the optional config file and flag overrides.
    pub fn load(config_file: Option<&Path>, flags: &Layer) -> Result<Context> {
        let file = match config_file {
            Some(p) => config::read_layer(p)?,
            None => Layer::new(),
        };
        let layer = config::merge(&[&file, flags]);
        let cfg = RunConfig::from_layer(&layer)?;
        let hash = RunConfig::hash(&layer);
        Ok(Context { cfg, layer, hash })
    }

    fn planner(&self, stock: StockSet) -> PlannerConfig {
        let mut p = PlannerConfig::new(stock);
        p.beam_width = self.cfg.beam_width;
        p.max_depth = self.cfg.max_depth;
        p.call_budget = self.cfg.call_budget;
        p
    }
}

/// Human-readable lines a command prints on success.
pub type Report = Vec<String>;

// ---------------------------------------------------------------------------
// file helpers

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, Failure> {
    let p = p
        .as_deref()
        .ok_or_else(|| Failure::Input(format!("no {key} file given (--{})", key.replace('_', "-"))))?;
    if !p.is_file() {
        return Err(Failure::Input(format!("{key} file {} does not exist", p.display())));
    }
    Ok(p)
}

fn open(p: &Path) -> Result<BufReader<fs::File>, Failure> {
    fs::File::open(p)
        .map(BufReader::new)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))
}

fn file_sha256(p: &Path) -> Result<String> {
    let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
    Ok(config::hex(&Sha256::digest(&bytes)))
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Outputs> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn jsonl<T: Serialize>(&mut self, name: &str, items: impl IntoIterator<Item = T>) -> Result<()> {
        let mut buf = Vec::new();
        for item in items {
            serde_json::to_writer(&mut buf, &item)?;
            buf.push(b'\n');
        }
        self.write(name, &buf)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut buf = serde_json::to_vec_pretty(value)?;
        buf.push(b'\n');
        self.write(name, &buf)
    }

    /// Records the command in `manifest.json`, keeping entries of other
    /// commands that wrote to the same directory.
    fn manifest(self, ctx: &Context, command: &str, inputs: &[(&str, &Path)], counts: Value) -> Result<()> {
        let path = self.dir.join("manifest.json");
        let mut manifest: BTreeMap<String, Value> = fs::read(&path)
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok())
            .unwrap_or_default();
        manifest.insert("tool".into(), json!("roundtrip"));
        manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        let mut ins = BTreeMap::new();
        for (k, p) in inputs {
            ins.insert(k.to_string(), json!({ "path": p.display().to_string(), "sha256": file_sha256(p)? }));
        }
        let settings: BTreeMap<&String, &String> =
            ctx.layer.iter().filter(|(k, _)| *k != "out" && *k != "jobs").collect();
        let entry = json!({
            "config_hash": ctx.hash,
            "seed": ctx.cfg.seed,
            "settings": settings,
            "inputs": ins,
            "outputs": self.written,
            "counts": counts,
        });
        let commands = manifest.entry("commands".into()).or_insert_with(|| json!({}));
        commands[command] = entry;
        let mut buf = serde_json::to_vec_pretty(&manifest)?;
        buf.push(b'\n');
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn read_stock(ctx: &Context) -> Result<(StockSet, &Path)> {
    let p = required(&ctx.cfg.stock, "stock")?;
    let stock = StockSet::read(open(p)?)
        .map_err(|(line, e)| Failure::Input(format!("{}:{line}: {e}", p.display())))?;
    Ok((stock, p))
}

fn read_library(ctx: &Context, direction: Direction) -> Result<(TemplateLibrary, &Path)> {
    let (key, p) = match direction {
        Direction::Retro => ("retro", &ctx.cfg.retro),
        Direction::Forward => ("forward", &ctx.cfg.forward),
    };
    let p = required(p, key)?;
    let lib = TemplateLibrary::read_jsonl(direction, open(p)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    if lib.is_empty() {
        return Err(Failure::EmptyModel(format!("{} holds no templates", p.display())).into());
    }
    Ok((lib, p))
}

fn read_dataset(ctx: &Context) -> Result<(ReactionDataset, &Path)> {
    let p = required(&ctx.cfg.dataset, "dataset")?;
    let ds = ReactionDataset::read_jsonl(open(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    Ok((ds, p))
}

/// One line of a routes file: a target and its reference routes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteEntry {
    pub target: Molecule,
    pub split: String,
    pub routes: Vec<SyntheticRoute>,
}

fn read_routes(p: &Path) -> Result<Vec<RouteEntry>> {
    let mut out = Vec::new();
    for (n, line) in open(p)?.lines().enumerate() {
        let line = line.map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let e: RouteEntry = serde_json::from_str(&line)
            .map_err(|e| Failure::Input(format!("{}:{}: {e}", p.display(), n + 1)))?;
        out.push(e);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// generate

/// Writes a closed-world reaction corpus (mapped reaction SMILES), its
/// stock and its targets as an evaluation molecule list.
pub fn cmd_generate(ctx: &Context) -> Result<Report> {
    let c = closed_world(ctx.cfg.size, 6, ctx.cfg.seed);
    let mut out = Outputs::new(&ctx.cfg.out)?;
    let mut text = String::new();
    for r in &c.reactions {
        text.push_str(&r.mapped_text().expect("generated reactions are mapped"));
        text.push('\n');
    }
    out.write("reactions.smi", text.as_bytes())?;
    let mut stock = Vec::new();
    c.stock.write(&mut stock)?;
    out.write("stock.txt", &stock)?;
    let targets: String = c.targets.iter().map(|t| format!("{t} closed_world\n")).collect();
    out.write("molecules.smi", targets.as_bytes())?;
    let counts = json!({ "reactions": c.reactions.len(), "stock": c.stock.len(), "targets": c.targets.len() });
    out.manifest(ctx, "generate", &[], counts)?;
    Ok(vec![format!(
        "generated {} reactions, {} stock molecules, {} targets",
        c.reactions.len(),
        c.stock.len(),
        c.targets.len()
    )])
}

// ---------------------------------------------------------------------------
// ingest

pub fn cmd_ingest(ctx: &Context) -> Result<Report> {
    let p = required(&ctx.cfg.reactions, "reactions")?;
    let report = ingest_lines(open(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    let parsed = report.reactions.len();
    let ds = deduplicate(report.reactions);
    let mut out = Outputs::new(&ctx.cfg.out)?;
    let mut buf = Vec::new();
    ds.write_jsonl(&mut buf)?;
    out.write("dataset.jsonl", &buf)?;
    let dropped: Vec<Value> = report
        .dropped
        .iter()
        .map(|(line, e)| json!({ "line": line, "error": e }))
        .collect();
    let stats = json!({
        "parsed": parsed,
        "dropped": report.dropped.len(),
        "removed_by_dedup": parsed - ds.len(),
        "retained": ds.len(),
        "mappable": ds.mappable_count(),
        "dropped_lines": dropped,
    });
    out.json("ingest.json", &stats)?;
    for (line, e) in &report.dropped {
        eprintln!("dropped line {line}: {e}");
    }
    let counts = json!({ "parsed": parsed, "dropped": report.dropped.len(), "retained": ds.len() });
    out.manifest(ctx, "ingest", &[("reactions", p)], counts)?;
    Ok(vec![format!(
        "parsed {parsed}, dropped {}, kept {} after deduplication",
        report.dropped.len(),
        ds.len()
    )])
}

// ---------------------------------------------------------------------------
// build

pub fn cmd_build(ctx: &Context) -> Result<Report> {
    let (ds, p) = read_dataset(ctx)?;
    let net = build_network(&ds);
    let targets = find_targets(&net);
    let opts = RouteOptions {
        max_depth: ctx.cfg.max_depth,
        budget: Some(ctx.cfg.route_budget),
        stock: None,
    };
    let routed: Vec<(Molecule, Vec<SyntheticRoute>)> = pool(ctx.cfg.jobs)?.install(|| {
        targets
            .par_iter()
            .map(|t| (t.clone(), extract_routes(&net, t, opts).expect("targets are in the network")))
            .filter(|(_, rs)| !rs.is_empty())
            .collect()
    });
    // split targets (with all of their routes) 98/1/1; with fewer than three
    // there is nothing to hold out, and everything is kept for testing
    let names: Vec<String> = routed.iter().map(|(t, _)| t.to_string()).collect();
    let mut split_of: BTreeMap<String, &str> = BTreeMap::new();
    match split_dataset(names.clone(), [98, 1, 1], ctx.cfg.seed) {
        Ok(s) => {
            for (bucket, items) in [("train", s.train), ("validation", s.validation), ("test", s.test)] {
                for t in items {
                    split_of.insert(t, bucket);
                }
            }
        }
        Err(_) => {
            for t in &names {
                split_of.insert(t.clone(), "test");
            }
        }
    }
    let entries: Vec<RouteEntry> = routed
        .into_iter()
        .map(|(target, routes)| RouteEntry {
            split: split_of[target.canonical_smiles()].to_string(),
            target,
            routes,
        })
        .collect();
    let stock = default_stock(entries.iter().flat_map(|e| &e.routes));
    let route_count: usize = entries.iter().map(|e| e.routes.len()).sum();
    let bucket = |b: &str| entries.iter().filter(|e| e.split == b).count();

    let mut out = Outputs::new(&ctx.cfg.out)?;
    out.jsonl("routes.jsonl", &entries)?;
    let text: String = targets.iter().map(|t| format!("{t}\n")).collect();
    out.write("targets.txt", text.as_bytes())?;
    let mut buf = Vec::new();
    stock.write(&mut buf)?;
    out.write("default_stock.txt", &buf)?;
    let stats = json!({
        "molecules": net.molecule_count(),
        "reactions": net.reaction_count(),
        "edges": net.edge_count(),
        "targets": targets.len(),
        "targets_with_routes": entries.len(),
        "routes": route_count,
        "stock": stock.len(),
        "split": { "train": bucket("train"), "validation": bucket("validation"), "test": bucket("test") },
    });
    out.json("network.json", &stats)?;
    out.manifest(ctx, "build", &[("dataset", p)], stats)?;
    Ok(vec![format!(
        "{} molecules, {} reactions, {} targets, {} routes",
        net.molecule_count(),
        net.reaction_count(),
        targets.len(),
        route_count
    )])
}

// ---------------------------------------------------------------------------
// fit

pub fn cmd_fit(ctx: &Context) -> Result<Report> {
    let (ds, p) = read_dataset(ctx)?;
    let ex = extract_templates(&ds, ctx.cfg.template_radius);
    if ex.mappable == 0 {
        return Err(Failure::EmptyModel(format!("{} has no atom-mapped reactions", p.display())).into());
    }
    if ex.retro.is_empty() {
        return Err(Failure::EmptyModel("no template could be extracted".into()).into());
    }
    let mut out = Outputs::new(&ctx.cfg.out)?;
    let mut buf = Vec::new();
    ex.retro.write_jsonl(&mut buf)?;
    out.write("retro.jsonl", &buf)?;
    buf.clear();
    ex.forward.write_jsonl(&mut buf)?;
    out.write("forward.jsonl", &buf)?;
    let failed: Vec<Value> = ex
        .failed
        .iter()
        .map(|(id, e)| json!({ "id": id, "error": e.to_string() }))
        .collect();
    let total = ex.mappable + ex.unmapped;
    let stats = json!({
        "reactions": total,
        "mappable": ex.mappable,
        "unmapped": ex.unmapped,
        "mappable_fraction": ex.mappable as f64 / total as f64,
        "failed": failed.len(),
        "templates": ex.retro.len(),
        "radius": ctx.cfg.template_radius,
        "failures": failed,
    });
    out.json("fit.json", &stats)?;
    let counts = json!({ "mappable": ex.mappable, "unmapped": ex.unmapped, "templates": ex.retro.len() });
    out.manifest(ctx, "fit", &[("dataset", p)], counts)?;
    Ok(vec![format!(
        "{} templates from {} mapped reactions ({} unmapped, {} failed)",
        ex.retro.len(),
        ex.mappable,
        ex.unmapped,
        ex.failed.len()
    )])
}

// ---------------------------------------------------------------------------
// eval

/// One line of a molecule file.
#[derive(Debug, Clone)]
struct Input {
    index: usize,
    line: usize,
    text: String,
    group: String,
}

const DEFAULT_GROUP: &str = "all";

/// `SMILES [group]` per line; blank lines and `#` comments are skipped.
fn read_molecules(p: &Path) -> Result<Vec<Input>> {
    let mut out = Vec::new();
    for (n, line) in open(p)?.lines().enumerate() {
        let line = line.map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut fields = t.split_whitespace();
        let text = fields.next().unwrap_or_default().to_string();
        let group = fields.next().unwrap_or(DEFAULT_GROUP).to_string();
        out.push(Input {
            index: out.len(),
            line: n + 1,
            text,
            group,
        });
    }
    if out.is_empty() {
        return Err(Failure::Input(format!("{} lists no molecules", p.display())).into());
    }
    Ok(out)
}

/// Keeps up to `n` molecules per group, drawn with the seed, in input order.
fn sample(inputs: Vec<Input>, n: usize, seed: u64) -> Vec<Input> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, x) in inputs.iter().enumerate() {
        groups.entry(x.group.clone()).or_default().push(i);
    }
    let mut keep = vec![false; inputs.len()];
    for idx in groups.values_mut() {
        idx.shuffle(&mut rng);
        for &i in idx.iter().take(n) {
            keep[i] = true;
        }
    }
    inputs
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .enumerate()
        .map(|(i, (mut x, _))| {
            x.index = i;
            x
        })
        .collect()
}

/// A molecule the harness could not evaluate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalError {
    pub index: usize,
    pub line: usize,
    pub input: String,
    pub error: String,
}

/// Short per-route view of a record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteScore {
    pub rank: usize,
    pub score: f64,
    pub shortcircuit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_step: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreLine {
    pub index: usize,
    pub smiles: String,
    pub group: String,
    pub records: Vec<RouteScore>,
}

impl ScoreLine {
    fn of(r: &EvalRecord) -> ScoreLine {
        ScoreLine {
            index: r.index,
            smiles: r.molecule.to_string(),
            group: r.group.clone(),
            records: r
                .records
                .iter()
                .enumerate()
                .map(|(i, x)| RouteScore {
                    rank: i + 1,
                    score: x.score,
                    shortcircuit: x.is_stock_shortcircuit,
                    failure_step: x.reproduction.as_ref().and_then(|rr| rr.failure_step),
                })
                .collect(),
        }
    }
}

struct Models {
    retro: TemplateLibrary,
    forward: TemplateLibrary,
    planner: PlannerConfig,
}

/// Plans, reproduces and scores one molecule.
fn evaluate(
    ctx: &Context,
    models: &Models,
    index: usize,
    group: &str,
    m: &Molecule,
    refs: Option<&[SyntheticRoute]>,
) -> EvalRecord {
    let scored = score_molecule(
        m,
        &models.planner,
        &models.retro,
        &models.forward,
        ctx.cfg.topk,
        ctx.cfg.fingerprint_params(),
    );
    let trace = scored.trace.unwrap_or_default();
    let matched = refs.map(|refs| {
        scored
            .records
            .first()
            .and_then(|r| r.route.as_ref())
            .is_some_and(|route| match_starting_materials(route, refs))
    });
    EvalRecord {
        index,
        molecule: m.clone(),
        group: group.to_string(),
        heavy_atoms: m.heavy_atom_count(),
        in_stock: models.planner.stock.contains(m),
        solved: !scored.records.is_empty(),
        retro_calls: trace.retro_calls,
        budget_exhausted: trace.budget_exhausted,
        records: scored.records,
        matched,
    }
}

fn load_models(ctx: &Context) -> Result<(Models, Vec<(&'static str, &Path)>)> {
    let (retro, rp) = read_library(ctx, Direction::Retro)?;
    let (forward, fp) = read_library(ctx, Direction::Forward)?;
    let (stock, sp) = read_stock(ctx)?;
    let planner = ctx.planner(stock);
    Ok((Models { retro, forward, planner }, vec![("retro", rp), ("forward", fp), ("stock", sp)]))
}

/// Fails when any planning run spent more retro calls than allowed.
fn check_budget(records: &[EvalRecord], budget: usize) -> Result<usize> {
    let max = records.iter().map(|r| r.retro_calls).max().unwrap_or(0);
    if let Some(r) = records.iter().find(|r| r.retro_calls > budget) {
        anyhow::bail!("{} used {} retro calls, over the budget of {budget}", r.molecule, r.retro_calls);
    }
    Ok(max)
}

pub fn cmd_eval(ctx: &Context) -> Result<Report> {
    let mp = required(&ctx.cfg.molecules, "molecules")?;
    let mut inputs = read_molecules(mp)?;
    if let Some(n) = ctx.cfg.sample {
        inputs = sample(inputs, n, ctx.cfg.seed);
    }
    let (models, mut used) = load_models(ctx)?;
    let refs: Option<BTreeMap<Molecule, Vec<SyntheticRoute>>> = match &ctx.cfg.routes {
        Some(_) => {
            let p = required(&ctx.cfg.routes, "routes")?;
            used.push(("routes", p));
            Some(read_routes(p)?.into_iter().map(|e| (e.target, e.routes)).collect())
        }
        None => None,
    };
    used.push(("molecules", mp));

    let results: Vec<(Result<EvalRecord, EvalError>, f64)> = pool(ctx.cfg.jobs)?.install(|| {
        inputs
            .par_iter()
            .map(|x| {
                let start = Instant::now();
                let out = match parse_smiles(&x.text) {
                    Ok(m) => {
                        let r = refs.as_ref().map(|refs| refs.get(&m).map_or(&[][..], Vec::as_slice));
                        Ok(evaluate(ctx, &models, x.index, &x.group, &m, r))
                    }
                    Err(e) => Err(EvalError {
                        index: x.index,
                        line: x.line,
                        input: x.text.clone(),
                        error: e.to_string(),
                    }),
                };
                (out, start.elapsed().as_secs_f64() * 1000.0)
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut timings = Vec::new();
    for (i, (r, ms)) in results.into_iter().enumerate() {
        timings.push(json!({ "index": i, "millis": ms }));
        match r {
            Ok(r) => records.push(r),
            Err(e) => {
                eprintln!("line {}: {}: {}", e.line, e.input, e.error);
                errors.push(e);
            }
        }
    }
    let max_calls = check_budget(&records, ctx.cfg.call_budget)?;
    let summary = summarize(&records, &ctx.cfg.groups);

    let mut out = Outputs::new(&ctx.cfg.out)?;
    out.jsonl("records.jsonl", &records)?;
    out.jsonl("scores.jsonl", records.iter().map(ScoreLine::of))?;
    out.jsonl("errors.jsonl", &errors)?;
    out.write("summary.csv", summary.to_csv().as_bytes())?;
    out.write("summary.txt", summary.to_text().as_bytes())?;
    out.json("summary.json", &json!({ "config_hash": ctx.hash, "rows": summary.rows }))?;
    // wall-clock times differ between runs, so they stay out of the manifest
    // and the records
    let mut buf = Vec::new();
    for t in &timings {
        serde_json::to_writer(&mut buf, t)?;
        buf.push(b'\n');
    }
    fs::write(ctx.cfg.out.join("timings.jsonl"), buf)?;
    let counts = json!({
        "molecules": inputs.len(),
        "evaluated": records.len(),
        "errors": errors.len(),
        "max_retro_calls": max_calls,
        "call_budget": ctx.cfg.call_budget,
    });
    out.manifest(ctx, "eval", &used, counts)?;
    let mut report = vec![format!("evaluated {} molecules ({} failed to parse)", records.len(), errors.len())];
    report.extend(summary.to_text().lines().map(String::from));
    Ok(report)
}

// ---------------------------------------------------------------------------
// bench

fn parse_label(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "feasible" => Some(true),
        "0" | "false" | "no" | "infeasible" => Some(false),
        _ => None,
    }
}

/// One feasibility label per target, as `label` or `SMILES label` lines.
fn read_labels(p: &Path, targets: &[Molecule]) -> Result<Vec<bool>> {
    let mut labels = Vec::new();
    for (n, line) in open(p)?.lines().enumerate() {
        let line = line.map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let bad = || Failure::Input(format!("{}:{}: expected '[SMILES] label', got '{t}'", p.display(), n + 1));
        let (smiles, label) = match fields.as_slice() {
            [l] => (None, *l),
            [s, l] => (Some(*s), *l),
            _ => return Err(bad().into()),
        };
        let label = parse_label(label).ok_or_else(bad)?;
        if let (Some(s), Some(t)) = (smiles, targets.get(labels.len())) {
            let m = parse_smiles(s).map_err(|e| Failure::Input(format!("{}:{}: {e}", p.display(), n + 1)))?;
            if m != *t {
                return Err(Failure::Schema(format!(
                    "{}:{}: label is for {m}, but target {} is {t}",
                    p.display(),
                    n + 1,
                    labels.len() + 1
                ))
                .into());
            }
        }
        labels.push(label);
    }
    if labels.len() != targets.len() {
        return Err(Failure::Schema(format!(
            "{} has {} labels for {} targets",
            p.display(),
            labels.len(),
            targets.len()
        ))
        .into());
    }
    Ok(labels)
}

/// Confusion cells with their statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub counts: ConfusionCounts,
    pub stats: ConfusionStats<f64>,
}

impl CellReport {
    fn of(counts: ConfusionCounts) -> CellReport {
        CellReport {
            stats: confusion_stats(&counts),
            counts,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_hash: String,
    pub targets: usize,
    pub solved: usize,
    pub search_success_rate: f64,
    /// Where feasibility came from: `labels` or `matching` (top-1 starting
    /// materials equal those of a reference route).
    pub feasibility: String,
    pub matched: usize,
    pub max_retro_calls: usize,
    pub round_trip: CellReport,
    pub search_success: CellReport,
}

fn pct(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{:.1}%", v * 100.0))
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let row = |name: &str, s: &ConfusionStats<f64>| {
            format!(
                "{name:<20} {:>9} {:>9} {:>9} {:>9}\n",
                pct(s.accuracy),
                pct(s.precision),
                pct(s.recall),
                pct(s.f1)
            )
        };
        let mut out = format!(
            "targets {}, solved {} ({:.2}%), feasibility from {}, matched {}\n",
            self.targets,
            self.solved,
            self.search_success_rate * 100.0,
            self.feasibility,
            self.matched
        );
        let c = &self.round_trip.counts;
        out.push_str(&format!("round trip: TP {} TN {} FP {} FN {}\n", c.tp, c.tn, c.fp, c.fn_));
        out.push_str(&format!("{:<20} {:>9} {:>9} {:>9} {:>9}\n", "metric", "accuracy", "precision", "recall", "f1"));
        // search success has no meaningful negatives; only precision is shown
        let s = &self.search_success.stats;
        out.push_str(&row(
            "search success rate",
            &ConfusionStats {
                accuracy: None,
                precision: s.precision,
                recall: None,
                f1: None,
            },
        ));
        out.push_str(&row("round-trip score", &self.round_trip.stats));
        out
    }
}

/// Feasibility-detection benchmark over reference targets: plan each one,
/// take the top-1 route of the solved ones, and compare its round-trip
/// verdict (score 1 or not) with its feasibility.
pub fn cmd_bench(ctx: &Context) -> Result<Report> {
    let rp = required(&ctx.cfg.routes, "routes")?;
    let mut entries = read_routes(rp)?;
    if let Some(split) = &ctx.cfg.split {
        entries.retain(|e| &e.split == split);
    }
    if entries.is_empty() {
        return Err(Failure::Input(format!("{} has no targets to benchmark", rp.display())).into());
    }
    let targets: Vec<Molecule> = entries.iter().map(|e| e.target.clone()).collect();
    let labels = match &ctx.cfg.labels {
        Some(_) => Some(read_labels(required(&ctx.cfg.labels, "labels")?, &targets)?),
        None => None,
    };
    let (models, mut used) = load_models(ctx)?;
    used.push(("routes", rp));
    if let Some(p) = &ctx.cfg.labels {
        used.push(("labels", p.as_path()));
    }

    let records: Vec<EvalRecord> = pool(ctx.cfg.jobs)?.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| evaluate(ctx, &models, i, &e.split, &e.target, Some(&e.routes)))
            .collect()
    });
    let max_calls = check_budget(&records, ctx.cfg.call_budget)?;
    let mut round_trip = ConfusionCounts::default();
    let mut search = ConfusionCounts::default();
    for (i, r) in records.iter().enumerate() {
        if !r.solved {
            continue;
        }
        let feasible = match &labels {
            Some(l) => l[i],
            None => r.matched == Some(true),
        };
        round_trip.add(classify_route(r, feasible));
        search.add(if feasible { Cell::TP } else { Cell::FP });
    }
    let report = BenchReport {
        config_hash: ctx.hash.clone(),
        targets: records.len(),
        solved: records.iter().filter(|r| r.solved).count(),
        search_success_rate: search_success_rate(&records),
        feasibility: if labels.is_some() { "labels" } else { "matching" }.to_string(),
        matched: records.iter().filter(|r| r.matched == Some(true)).count(),
        max_retro_calls: max_calls,
        round_trip: CellReport::of(round_trip),
        search_success: CellReport::of(search),
    };
    let mut out = Outputs::new(&ctx.cfg.out)?;
    out.jsonl("bench_records.jsonl", &records)?;
    out.json("bench.json", &report)?;
    out.write("bench.txt", report.to_text().as_bytes())?;
    let counts = json!({
        "targets": report.targets,
        "solved": report.solved,
        "max_retro_calls": max_calls,
        "call_budget": ctx.cfg.call_budget,
    });
    out.manifest(ctx, "bench", &used, counts)?;
    Ok(report.to_text().lines().map(String::from).collect())
}

// ---------------------------------------------------------------------------
// report

/// Re-summarizes saved evaluation records, and/or turns confusion counts
/// into the statistics table.
pub fn cmd_report(ctx: &Context) -> Result<Report> {
    if ctx.cfg.records.is_none() && ctx.cfg.counts.is_none() {
        return Err(Failure::Input("report needs --records or --counts".into()).into());
    }
    let mut out = Outputs::new(&ctx.cfg.out)?;
    let mut lines = Vec::new();
    let mut used = Vec::new();
    let mut value = json!({ "config_hash": ctx.hash });
    if let Some(c) = ctx.cfg.counts {
        let counts = ConfusionCounts::new(c[0], c[1], c[2], c[3]);
        let s: ConfusionStats<f64> = confusion_stats(&counts);
        lines.push(format!(
            "TP {} TN {} FP {} FN {}: accuracy {} precision {} recall {} f1 {}",
            c[0],
            c[1],
            c[2],
            c[3],
            pct(s.accuracy),
            pct(s.precision),
            pct(s.recall),
            pct(s.f1)
        ));
        value["confusion"] = json!(CellReport::of(counts));
    }
    if ctx.cfg.records.is_some() {
        let p = required(&ctx.cfg.records, "records")?;
        let mut records = Vec::new();
        for (n, line) in open(p)?.lines().enumerate() {
            let line = line.map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: EvalRecord = serde_json::from_str(&line)
                .map_err(|e| Failure::Input(format!("{}:{}: {e}", p.display(), n + 1)))?;
            records.push(r);
        }
        let summary = summarize(&records, &ctx.cfg.groups);
        out.write("report.csv", summary.to_csv().as_bytes())?;
        lines.extend(summary.to_text().lines().map(String::from));
        value["rows"] = json!(summary.rows);
        used.push(("records", p));
    }
    out.json("report.json", &value)?;
    out.write("report.txt", format!("{}\n", lines.join("\n")).as_bytes())?;
    out.manifest(ctx, "report", &used, json!({}))?;
    Ok(lines)
}

/// Writes a flag layer's entry; used by the binary and tests alike.
pub fn set(layer: &mut Layer, key: &str, value: impl ToString) {
    layer.insert(config::normalize_key(key), value.to_string());
}
