//! Aggregated Jaccard Index, global IoU and Dice.
//!
//! `aji ≤ iou ≤ dice` holds for every input: the matched intersections are
//! disjoint pieces of `G ∩ P`, and the matched unions plus unmatched
//! predictions cover `G ∪ P`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::LabelMap;

/// How predictions may be matched to ground-truth instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AjiMode {
    /// Each ground-truth instance takes its best IoU prediction independently;
    /// one prediction may serve several instances.
    #[default]
    Literal,
    /// Ground-truth instances are visited in ascending label order and a
    /// prediction, once matched, is no longer a candidate.
    UsedFlag,
}

impl std::str::FromStr for AjiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(AjiMode::Literal),
            "used-flag" | "used_flag" => Ok(AjiMode::UsedFlag),
            other => Err(Error::InvalidParameter(format!("unknown AJI mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchPair {
    pub gt_label: u32,
    /// `None` when the instance overlaps no available prediction.
    pub pred_label: Option<u32>,
    pub intersection: u64,
    pub union: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MatchAssignment {
    pub pairs: Vec<MatchPair>,
    pub unmatched_preds: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub aji: f64,
    pub iou: f64,
    pub dice: f64,
    pub assignment: MatchAssignment,
}

/// Pixel counts gathered in one pass over a pair of label maps.
#[derive(Clone, Debug, Default)]
pub struct OverlapTable {
    pub gt_area: BTreeMap<u32, u64>,
    pub pred_area: BTreeMap<u32, u64>,
    /// gt label -> (pred label -> overlap)
    pub overlap: BTreeMap<u32, BTreeMap<u32, u64>>,
    /// |G ∩ P| over foreground sets.
    pub fg_intersection: u64,
}

impl OverlapTable {
    pub fn build(gt: &LabelMap, pred: &LabelMap) -> Result<Self> {
        gt.shape().ensure_same(&pred.shape())?;
        let mut t = OverlapTable::default();
        let mut pairs: HashMap<(u32, u32), u64> = HashMap::new();
        for (&g, &p) in gt.data().iter().zip(pred.data()) {
            if g != 0 {
                *t.gt_area.entry(g).or_default() += 1;
            }
            if p != 0 {
                *t.pred_area.entry(p).or_default() += 1;
            }
            if g != 0 && p != 0 {
                *pairs.entry((g, p)).or_default() += 1;
                t.fg_intersection += 1;
            }
        }
        for ((g, p), n) in pairs {
            t.overlap.entry(g).or_default().insert(p, n);
        }
        Ok(t)
    }

    fn gt_total(&self) -> u64 {
        self.gt_area.values().sum()
    }

    fn pred_total(&self) -> u64 {
        self.pred_area.values().sum()
    }
}

fn assign(table: &OverlapTable, mode: AjiMode) -> MatchAssignment {
    let mut used = BTreeSet::new();
    let mut pairs = Vec::with_capacity(table.gt_area.len());
    for (&g, &g_area) in &table.gt_area {
        let mut best: Option<(u32, u64, u64)> = None;
        if let Some(row) = table.overlap.get(&g) {
            // ascending pred label, so strict `>` keeps the smaller label on ties
            for (&p, &inter) in row {
                if mode == AjiMode::UsedFlag && used.contains(&p) {
                    continue;
                }
                let union = g_area + table.pred_area[&p] - inter;
                let better = match best {
                    None => true,
                    // inter/union > b_inter/b_union
                    Some((_, bi, bu)) => u128::from(inter) * u128::from(bu) > u128::from(bi) * u128::from(union),
                };
                if better {
                    best = Some((p, inter, union));
                }
            }
        }
        pairs.push(match best {
            Some((p, inter, union)) => {
                used.insert(p);
                MatchPair {
                    gt_label: g,
                    pred_label: Some(p),
                    intersection: inter,
                    union,
                }
            }
            None => MatchPair {
                gt_label: g,
                pred_label: None,
                intersection: 0,
                union: g_area,
            },
        });
    }
    let unmatched_preds = table.pred_area.keys().copied().filter(|p| !used.contains(p)).collect();
    MatchAssignment { pairs, unmatched_preds }
}

/// Best-IoU prediction for every ground-truth instance (literal matching).
pub fn best_match(gt: &LabelMap, pred: &LabelMap) -> Result<MatchAssignment> {
    best_match_with(gt, pred, AjiMode::Literal)
}

pub fn best_match_with(gt: &LabelMap, pred: &LabelMap, mode: AjiMode) -> Result<MatchAssignment> {
    let table = OverlapTable::build(gt, pred)?;
    if table.gt_area.is_empty() {
        return Err(Error::NoInstances);
    }
    Ok(assign(&table, mode))
}

fn aji_from(table: &OverlapTable, a: &MatchAssignment) -> f64 {
    let num: u64 = a.pairs.iter().map(|p| p.intersection).sum();
    let den: u64 = a.pairs.iter().map(|p| p.union).sum::<u64>()
        + a.unmatched_preds.iter().map(|p| table.pred_area[p]).sum::<u64>();
    num as f64 / den as f64
}

pub fn aji(gt: &LabelMap, pred: &LabelMap, mode: AjiMode) -> Result<f64> {
    let table = OverlapTable::build(gt, pred)?;
    if table.gt_area.is_empty() {
        return Err(Error::NoInstances);
    }
    Ok(aji_from(&table, &assign(&table, mode)))
}

fn iou_from(table: &OverlapTable) -> f64 {
    let union = table.gt_total() + table.pred_total() - table.fg_intersection;
    if union == 0 {
        1.0
    } else {
        table.fg_intersection as f64 / union as f64
    }
}

fn dice_from(table: &OverlapTable) -> f64 {
    let total = table.gt_total() + table.pred_total();
    if total == 0 {
        1.0
    } else {
        2.0 * table.fg_intersection as f64 / total as f64
    }
}

/// Foreground IoU ignoring instance identity; 1.0 when both maps are empty.
pub fn global_iou(gt: &LabelMap, pred: &LabelMap) -> Result<f64> {
    Ok(iou_from(&OverlapTable::build(gt, pred)?))
}

/// Foreground Dice; 1.0 when both maps are empty.
pub fn dice(gt: &LabelMap, pred: &LabelMap) -> Result<f64> {
    Ok(dice_from(&OverlapTable::build(gt, pred)?))
}

pub fn evaluate(gt: &LabelMap, pred: &LabelMap) -> Result<MetricReport> {
    evaluate_with(gt, pred, AjiMode::Literal)
}

pub fn evaluate_with(gt: &LabelMap, pred: &LabelMap, mode: AjiMode) -> Result<MetricReport> {
    let table = OverlapTable::build(gt, pred)?;
    if table.gt_area.is_empty() {
        return Err(Error::NoInstances);
    }
    let assignment = assign(&table, mode);
    let report = MetricReport {
        aji: aji_from(&table, &assignment),
        iou: iou_from(&table),
        dice: dice_from(&table),
        assignment,
    };
    debug_assert!(report.aji <= report.iou + 1e-12 && report.iou <= report.dice + 1e-12);
    Ok(report)
}
