//! Split evaluation and search: scores partitions of a pattern's members by
//! recomputing the count statistics per part, ranks single-node removals,
//! proposes a split from the node-level count test, and provides an
//! exhaustive two-part enumeration for cross-checking.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cohesion::{
    node_cohesion_count, pattern_cohesion, CohesionError, CohesionReport, CohesionThreshold,
};
use crate::model::{NodeId, PatternInstance};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("count list is empty")]
    EmptyCounts,
    #[error("count {value} for node {node} is negative or not finite")]
    InvalidCount { node: NodeId, value: f64 },
    #[error("invalid partition: {message}")]
    InvalidPartition { message: String },
    #[error("pattern must have at least {needed} nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },
    #[error("exhaustive enumeration is limited to {max} nodes, got {got}")]
    TooManyNodes { max: usize, got: usize },
    #[error("pattern has no recorded group events")]
    NoGroupEvents,
    #[error(transparent)]
    Cohesion(#[from] CohesionError),
}

/// Disjoint non-empty node sets covering a pattern's members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPartition {
    parts: Vec<BTreeSet<NodeId>>,
}

impl SplitPartition {
    pub fn new(parts: Vec<BTreeSet<NodeId>>) -> Result<Self, SplitError> {
        if parts.is_empty() {
            return Err(SplitError::InvalidPartition { message: "no parts".into() });
        }
        let mut seen = BTreeSet::new();
        for (idx, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(SplitError::InvalidPartition {
                    message: format!("part {idx} is empty"),
                });
            }
            for &node in part {
                if !seen.insert(node) {
                    return Err(SplitError::InvalidPartition {
                        message: format!("node {node} appears in more than one part"),
                    });
                }
            }
        }
        Ok(Self { parts })
    }

    pub fn two(a: BTreeSet<NodeId>, b: BTreeSet<NodeId>) -> Result<Self, SplitError> {
        Self::new(vec![a, b])
    }

    pub fn parts(&self) -> &[BTreeSet<NodeId>] {
        &self.parts
    }

    pub fn covered_nodes(&self) -> BTreeSet<NodeId> {
        self.parts.iter().flatten().copied().collect()
    }

    /// Parts sorted by their smallest member, for order-insensitive
    /// comparison of partitions.
    pub fn canonical(&self) -> Vec<Vec<NodeId>> {
        let mut parts: Vec<Vec<NodeId>> =
            self.parts.iter().map(|p| p.iter().copied().collect()).collect();
        parts.sort();
        parts
    }
}

/// Scores for one partition: per-part reports, the size-weighted mean of the
/// part cohesions, and the cohesion of the largest part (the remainder left
/// behind by a removal).
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEvaluation {
    pub per_part: Vec<CohesionReport>,
    pub composite: f64,
    pub remainder_cohesion: f64,
}

/// A proposed split together with its scores and the score it must beat.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSuggestion {
    pub partition: SplitPartition,
    pub evaluation: SplitEvaluation,
    pub unsplit_cohesion: f64,
}

/// Post-split statistics: the local mean is the arithmetic mean of the counts
/// and the global mean is their maximum.
pub fn recalc_stats(counts: &[f64]) -> Result<(f64, f64), SplitError> {
    if counts.is_empty() {
        return Err(SplitError::EmptyCounts);
    }
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &c in counts {
        if !c.is_finite() || c < 0.0 {
            return Err(SplitError::InvalidCount { node: NodeId(0), value: c });
        }
        sum += c;
        if c > max {
            max = c;
        }
    }
    Ok((sum / counts.len() as f64, max))
}

/// Scores one part. A part whose counts are all zero carries no spread and no
/// count deficit, so it scores a perfect 1.0 with zeroed means.
fn score_part(counts: &[f64]) -> Result<CohesionReport, SplitError> {
    let (lav, gav) = recalc_stats(counts)?;
    if lav == 0.0 {
        return Ok(CohesionReport {
            var_coefficient: 1.0,
            count_factor: 1.0,
            cohesion: 1.0,
            local_mean: 0.0,
            global_mean: 0.0,
        });
    }
    Ok(pattern_cohesion(counts, lav, gav)?)
}

/// Scores every part of `partition` against `pattern_counts` and aggregates.
pub fn evaluate_split(
    pattern_counts: &BTreeMap<NodeId, f64>,
    partition: &SplitPartition,
) -> Result<SplitEvaluation, SplitError> {
    for (&node, &value) in pattern_counts {
        if !value.is_finite() || value < 0.0 {
            return Err(SplitError::InvalidCount { node, value });
        }
    }
    let members: BTreeSet<NodeId> = pattern_counts.keys().copied().collect();
    let covered = partition.covered_nodes();
    if covered != members {
        return Err(SplitError::InvalidPartition {
            message: "parts must cover exactly the pattern's members".into(),
        });
    }

    let mut per_part = Vec::with_capacity(partition.parts().len());
    let mut weighted = 0.0;
    let mut total = 0usize;
    let mut largest: Option<(usize, f64)> = None;
    for part in partition.parts() {
        let counts: Vec<f64> = part.iter().map(|n| pattern_counts[n]).collect();
        let report = score_part(&counts)?;
        weighted += part.len() as f64 * report.cohesion;
        total += part.len();
        if largest.is_none_or(|(size, _)| part.len() > size) {
            largest = Some((part.len(), report.cohesion));
        }
        per_part.push(report);
    }
    let (_, remainder_cohesion) = largest.expect("partition has at least one part");
    Ok(SplitEvaluation {
        per_part,
        composite: weighted / total as f64,
        remainder_cohesion,
    })
}

/// Evaluates every single-node removal and orders them best first: descending
/// cohesion of the remaining part, ties broken by ascending node id.
pub fn rank_single_removals(
    pattern_counts: &BTreeMap<NodeId, f64>,
) -> Result<Vec<(NodeId, SplitEvaluation)>, SplitError> {
    if pattern_counts.len() < 2 {
        return Err(SplitError::TooFewNodes { needed: 2, got: pattern_counts.len() });
    }
    let members: BTreeSet<NodeId> = pattern_counts.keys().copied().collect();
    let mut ranked = Vec::with_capacity(members.len());
    for &node in &members {
        let mut rest = members.clone();
        rest.remove(&node);
        let partition = SplitPartition::two(rest, BTreeSet::from([node]))?;
        let eval = evaluate_split(pattern_counts, &partition)?;
        ranked.push((node, eval));
    }
    ranked.sort_by(|(na, ea), (nb, eb)| {
        eb.remainder_cohesion
            .partial_cmp(&ea.remainder_cohesion)
            .expect("cohesion values are finite")
            .then(na.cmp(nb))
    });
    Ok(ranked)
}

/// Splits the members into count-cohesive and non-cohesive groups at the
/// given threshold. Returns the two-part split only when both groups are
/// non-empty and the split strictly improves on the unsplit score.
pub fn suggest_split(
    p: &PatternInstance,
    thr: CohesionThreshold,
) -> Result<Option<SplitSuggestion>, SplitError> {
    if p.group_events() == 0 {
        return Err(SplitError::NoGroupEvents);
    }
    let mut cohesive = BTreeSet::new();
    let mut outliers = BTreeSet::new();
    for node in p.members() {
        if node_cohesion_count(p, node, thr)? {
            cohesive.insert(node);
        } else {
            outliers.insert(node);
        }
    }
    if cohesive.is_empty() || outliers.is_empty() {
        return Ok(None);
    }

    let counts = p.count_map();
    let whole = SplitPartition::new(vec![counts.keys().copied().collect()])?;
    let unsplit = evaluate_split(&counts, &whole)?;
    let partition = SplitPartition::two(cohesive, outliers)?;
    let evaluation = evaluate_split(&counts, &partition)?;
    if evaluation.composite > unsplit.composite {
        Ok(Some(SplitSuggestion {
            partition,
            evaluation,
            unsplit_cohesion: unsplit.composite,
        }))
    } else {
        Ok(None)
    }
}

/// Enumerates every two-part partition (up to 12 nodes) and returns the one
/// with the highest composite score. Ties go to the partition whose first
/// part (the one holding the smallest node) is lexicographically smallest.
pub fn brute_force_best_split(
    pattern_counts: &BTreeMap<NodeId, f64>,
) -> Result<(SplitPartition, SplitEvaluation), SplitError> {
    let n = pattern_counts.len();
    if n < 2 {
        return Err(SplitError::TooFewNodes { needed: 2, got: n });
    }
    if n > 12 {
        return Err(SplitError::TooManyNodes { max: 12, got: n });
    }
    let members: Vec<NodeId> = pattern_counts.keys().copied().collect();
    let full = (1u32 << (n - 1)) - 1;

    let mut best: Option<(SplitPartition, SplitEvaluation, Vec<NodeId>)> = None;
    for mask in 0..full {
        let mut first = BTreeSet::from([members[0]]);
        let mut second = BTreeSet::new();
        for (bit, &node) in members[1..].iter().enumerate() {
            if mask & (1 << bit) != 0 {
                first.insert(node);
            } else {
                second.insert(node);
            }
        }
        let partition = SplitPartition::two(first.clone(), second)?;
        let eval = evaluate_split(pattern_counts, &partition)?;
        let key: Vec<NodeId> = first.into_iter().collect();
        let better = match &best {
            None => true,
            Some((_, cur, cur_key)) => {
                eval.composite > cur.composite
                    || (eval.composite == cur.composite && key < *cur_key)
            }
        };
        if better {
            best = Some((partition, eval, key));
        }
    }
    let (partition, eval, _) = best.expect("n >= 2 yields at least one partition");
    Ok((partition, eval))
}
