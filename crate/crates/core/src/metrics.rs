//! Evaluation arithmetic: starting-material matching, search success,
//! confusion statistics and top-k round-trip aggregation.

use crate::chem::Molecule;
use crate::network::SyntheticRoute;
use crate::num::Scalar;
use crate::simulate::RoundTripRecord;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Number of top-k columns in a summary.
pub const SUMMARY_TOP_K: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    TP,
    TN,
    FP,
    FN,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn add(&mut self, cell: Cell) {
        match cell {
            Cell::TP => self.tp += 1,
            Cell::TN => self.tn += 1,
            Cell::FP => self.fp += 1,
            Cell::FN => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl FromIterator<Cell> for ConfusionCounts {
    fn from_iter<I: IntoIterator<Item = Cell>>(cells: I) -> Self {
        let mut c = ConfusionCounts::default();
        for cell in cells {
            c.add(cell);
        }
        c
    }
}

/// Statistics of a confusion matrix; `None` where a denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionStats<S> {
    pub accuracy: Option<S>,
    pub precision: Option<S>,
    pub recall: Option<S>,
    pub f1: Option<S>,
}

fn checked_ratio<S: Scalar>(num: u64, den: u64) -> Option<S> {
    (den != 0).then(|| S::ratio(num, den))
}

pub fn confusion_stats<S: Scalar>(c: &ConfusionCounts) -> ConfusionStats<S> {
    let precision = checked_ratio(c.tp, c.tp + c.fp);
    let recall = checked_ratio(c.tp, c.tp + c.fn_);
    // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); it needs both P and R and a
    // nonzero P+R, i.e. tp > 0.
    let f1 = if precision.is_some() && recall.is_some() && c.tp > 0 {
        Some(S::ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_))
    } else {
        None
    };
    ConfusionStats {
        accuracy: checked_ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
    }
}

/// Everything the harness knows about one evaluated molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// Position in the input list.
    pub index: usize,
    pub molecule: Molecule,
    pub group: String,
    pub heavy_atoms: usize,
    pub in_stock: bool,
    /// A route was found (stock molecules count as solved).
    pub solved: bool,
    pub retro_calls: usize,
    pub budget_exhausted: bool,
    /// Round-trip records in planner order.
    pub records: Vec<RoundTripRecord>,
    /// Whether the top-1 route's starting materials match a reference
    /// route; present only when references were supplied.
    pub matched: Option<bool>,
}

impl EvalRecord {
    /// Round-trip score of the best-ranked route, 0 when there is none.
    pub fn top1_score(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.score)
    }

    /// Whether any of the first `k` records has a perfect round trip.
    pub fn perfect_within(&self, k: usize) -> bool {
        self.records.iter().take(k).any(|r| r.score == 1.0)
    }
}

/// True iff the leaf set of `pred` equals that of some reference route.
pub fn match_starting_materials(pred: &SyntheticRoute, refs: &[SyntheticRoute]) -> bool {
    let leaves = pred.leaf_set();
    refs.iter().any(|r| r.leaf_set() == leaves)
}

/// Fraction of records with a route found.
pub fn search_success_rate<S: Scalar>(records: &[EvalRecord]) -> S {
    fraction(records.iter().filter(|r| r.solved).count(), records.len())
}

/// Places a record in the confusion matrix by its top-1 round-trip score.
/// A molecule with no route counts as scoring below 1.
pub fn classify_route(record: &EvalRecord, feasible: bool) -> Cell {
    match (feasible, record.top1_score() == 1.0) {
        (true, true) => Cell::TP,
        (false, false) => Cell::TN,
        (false, true) => Cell::FP,
        (true, false) => Cell::FN,
    }
}

/// Fraction of molecules with a perfect round trip among their first `k`
/// routes; stock short-circuits count as perfect.
pub fn topk_success<S: Scalar>(records: &[EvalRecord], k: usize) -> S {
    assert!(k >= 1, "k starts at 1");
    fraction(records.iter().filter(|r| r.perfect_within(k)).count(), records.len())
}

fn fraction<S: Scalar>(num: usize, den: usize) -> S {
    if den == 0 {
        S::zero()
    } else {
        S::ratio(num as u64, den as u64)
    }
}

/// One report row. Ratios are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub n: usize,
    pub avg_atoms: f64,
    pub stock_ratio: f64,
    pub topk: [f64; SUMMARY_TOP_K],
    pub search_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

/// Aggregates records per group. Groups are reported in the given order;
/// with no groups given, in order of first appearance.
pub fn summarize(records: &[EvalRecord], groups: &[String]) -> Summary {
    let mut order: Vec<String> = groups.to_vec();
    if order.is_empty() {
        for r in records {
            if !order.contains(&r.group) {
                order.push(r.group.clone());
            }
        }
    }
    let rows = order
        .into_iter()
        .map(|g| {
            let rs: Vec<EvalRecord> = records.iter().filter(|r| r.group == g).cloned().collect();
            let n = rs.len();
            let atoms: usize = rs.iter().map(|r| r.heavy_atoms).sum();
            let in_stock = rs.iter().filter(|r| r.in_stock).count();
            let mut topk = [0.0; SUMMARY_TOP_K];
            for (k, slot) in topk.iter_mut().enumerate() {
                *slot = topk_success::<f64>(&rs, k + 1) * 100.0;
            }
            SummaryRow {
                group: g,
                n,
                avg_atoms: if n == 0 { 0.0 } else { atoms as f64 / n as f64 },
                stock_ratio: fraction::<f64>(in_stock, n) * 100.0,
                topk,
                search_success: search_success_rate::<f64>(&rs) * 100.0,
            }
        })
        .collect();
    Summary { rows }
}

const CSV_HEADER: &str = "group,n,avg_atoms,stock_ratio,top1,top2,top3,top4,top5,search_success";

impl Summary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{:.2},{:.2}", r.group, r.n, r.avg_atoms, r.stock_ratio);
            for t in r.topk {
                let _ = write!(out, ",{t:.2}");
            }
            let _ = writeln!(out, ",{:.2}", r.search_success);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.group.len()).max().unwrap_or(0).max(5);
        let mut out = format!(
            "{:<width$} {:>6} {:>9} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}\n",
            "group", "n", "avg_atoms", "stock%", "top1%", "top2%", "top3%", "top4%", "top5%", "search%"
        );
        for r in &self.rows {
            let _ = write!(
                out,
                "{:<width$} {:>6} {:>9.2} {:>7.2}",
                r.group, r.n, r.avg_atoms, r.stock_ratio
            );
            for t in r.topk {
                let _ = write!(out, " {t:>7.2}");
            }
            let _ = writeln!(out, " {:>7.2}", r.search_success);
        }
        out
    }
}

/// Differences between consecutive rows, `(from, to, to - from)`.
pub fn consecutive_gaps<const K: usize>(rows: &[(&str, [f64; K])]) -> Vec<(String, String, [f64; K])> {
    rows.windows(2)
        .map(|w| {
            let mut d = [0.0; K];
            for (i, slot) in d.iter_mut().enumerate() {
                *slot = w[1].1[i] - w[0].1[i];
            }
            (w[0].0.to_string(), w[1].0.to_string(), d)
        })
        .collect()
}
