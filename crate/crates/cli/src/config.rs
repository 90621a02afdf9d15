//! Run configuration: built-in defaults, overridden by a `key=value` file,
//! overridden by command-line flags.

use crate::error::Failure;
use roundtrip::network::{DEFAULT_MAX_DEPTH, DEFAULT_ROUTE_BUDGET};
use roundtrip::planner::{DEFAULT_BEAM_WIDTH, DEFAULT_CALL_BUDGET};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One configuration layer: raw `key -> value` text.
pub type Layer = BTreeMap<String, String>;

/// Every knob the pipeline reads.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub reactions: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub stock: Option<PathBuf>,
    pub retro: Option<PathBuf>,
    pub forward: Option<PathBuf>,
    pub routes: Option<PathBuf>,
    pub molecules: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub out: PathBuf,
    pub beam_width: usize,
    pub max_depth: usize,
    pub call_budget: usize,
    pub route_budget: usize,
    pub template_radius: u32,
    pub fp_radius: u32,
    pub fp_width: usize,
    pub topk: usize,
    /// Molecules drawn per group in `eval`; all when absent.
    pub sample: Option<usize>,
    /// Route split `bench` evaluates; all routes when absent.
    pub split: Option<String>,
    /// Report group order; order of appearance when empty.
    pub groups: Vec<String>,
    /// `tp,tn,fp,fn` for `report`.
    pub counts: Option<[u64; 4]>,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub seed: u64,
    /// Reactions `generate` writes.
    pub size: usize,
}

/// Keys that only locate outputs or set the thread count; they cannot
/// change any result and are left out of the config hash.
const UNHASHED: &[&str] = &["out", "jobs"];

pub const KEYS: &[&str] = &[
    "reactions",
    "dataset",
    "stock",
    "retro",
    "forward",
    "routes",
    "molecules",
    "labels",
    "records",
    "out",
    "beam_width",
    "max_depth",
    "call_budget",
    "route_budget",
    "template_radius",
    "fp_radius",
    "fp_width",
    "topk",
    "sample",
    "split",
    "groups",
    "counts",
    "jobs",
    "seed",
    "size",
];

pub fn defaults() -> Layer {
    [
        ("out", "out".to_string()),
        ("beam_width", DEFAULT_BEAM_WIDTH.to_string()),
        ("max_depth", DEFAULT_MAX_DEPTH.to_string()),
        ("call_budget", DEFAULT_CALL_BUDGET.to_string()),
        ("route_budget", DEFAULT_ROUTE_BUDGET.to_string()),
        ("template_radius", "1".to_string()),
        ("fp_radius", "2".to_string()),
        ("fp_width", "2048".to_string()),
        ("topk", "5".to_string()),
        ("jobs", "0".to_string()),
        ("seed", "0".to_string()),
        ("size", "200".to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Parses a `key=value` file. Blank lines and `#` comments are skipped;
/// keys may use `-` or `_`.
pub fn parse_layer(text: &str, origin: &str) -> Result<Layer, Failure> {
    let mut layer = Layer::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Input(format!("{origin}:{}: expected key=value", n + 1)));
        };
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(Failure::Input(format!("{origin}:{}: unknown key '{}'", n + 1, k.trim())));
        }
        layer.insert(key, v.trim().to_string());
    }
    Ok(layer)
}

pub fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

pub fn read_layer(path: &Path) -> Result<Layer, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
    parse_layer(&text, &path.display().to_string())
}

/// `defaults <- file <- flags`.
pub fn merge(layers: &[&Layer]) -> Layer {
    let mut out = defaults();
    for l in layers {
        out.extend(l.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    out
}

fn number<T: std::str::FromStr>(layer: &Layer, key: &str) -> Result<T, Failure> {
    let v = &layer[key];
    v.parse()
        .map_err(|_| Failure::Input(format!("{key}: '{v}' is not a valid number")))
}

fn in_range<T: PartialOrd + std::fmt::Display + Copy>(key: &str, v: T, lo: T, hi: T) -> Result<T, Failure> {
    if v < lo || v > hi {
        return Err(Failure::Input(format!("{key} must be within {lo}..={hi}, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Validates a merged layer.
    pub fn from_layer(layer: &Layer) -> Result<RunConfig, Failure> {
        for k in layer.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(Failure::Input(format!("unknown key '{k}'")));
            }
        }
        let path = |k: &str| layer.get(k).filter(|v| !v.is_empty()).map(PathBuf::from);
        let fp_width = number::<usize>(layer, "fp_width")?;
        if !fp_width.is_power_of_two() {
            return Err(Failure::Input(format!("fp_width must be a power of two, got {fp_width}")));
        }
        let beam_width = in_range("beam_width", number(layer, "beam_width")?, 1, 50)?;
        let topk = in_range("topk", number(layer, "topk")?, 1, 5)?;
        if topk > beam_width {
            return Err(Failure::Input(format!("topk ({topk}) cannot exceed beam_width ({beam_width})")));
        }
        let counts = match layer.get("counts") {
            None => None,
            Some(v) => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                let parsed: Result<Vec<u64>, _> = parts.iter().map(|p| p.parse::<u64>()).collect();
                match parsed {
                    Ok(c) if c.len() == 4 => Some([c[0], c[1], c[2], c[3]]),
                    _ => return Err(Failure::Input(format!("counts must be tp,tn,fp,fn, got '{v}'"))),
                }
            }
        };
        Ok(RunConfig {
            reactions: path("reactions"),
            dataset: path("dataset"),
            stock: path("stock"),
            retro: path("retro"),
            forward: path("forward"),
            routes: path("routes"),
            molecules: path("molecules"),
            labels: path("labels"),
            records: path("records"),
            out: PathBuf::from(&layer["out"]),
            beam_width,
            max_depth: in_range("max_depth", number(layer, "max_depth")?, 1, 64)?,
            call_budget: in_range("call_budget", number(layer, "call_budget")?, 1, 1_000_000)?,
            route_budget: in_range("route_budget", number(layer, "route_budget")?, 1, 1_000_000)?,
            template_radius: in_range("template_radius", number(layer, "template_radius")?, 0, 4)?,
            fp_radius: in_range("fp_radius", number(layer, "fp_radius")?, 0, 8)?,
            fp_width: in_range("fp_width", fp_width, 64, 1 << 20)?,
            topk,
            sample: match layer.get("sample") {
                Some(_) => Some(in_range("sample", number(layer, "sample")?, 1, usize::MAX)?),
                None => None,
            },
            split: layer.get("split").filter(|s| !s.is_empty()).cloned(),
            groups: layer
                .get("groups")
                .map(|g| g.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
                .unwrap_or_default(),
            counts,
            jobs: number(layer, "jobs")?,
            seed: number(layer, "seed")?,
            size: in_range("size", number(layer, "size")?, 1, 100_000)?,
        })
    }

    /// Hex SHA-256 of every result-affecting setting, as sorted
    /// `key=value` lines.
    pub fn hash(layer: &Layer) -> String {
        let mut text = String::new();
        for (k, v) in layer {
            if !UNHASHED.contains(&k.as_str()) {
                let _ = writeln!(text, "{k}={v}");
            }
        }
        hex(&Sha256::digest(text.as_bytes()))
    }

    pub fn fingerprint_params(&self) -> roundtrip::chem::FingerprintParams {
        roundtrip::chem::FingerprintParams {
            radius: self.fp_radius,
            width: self.fp_width,
        }
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
