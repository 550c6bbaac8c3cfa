//! Node-level cohesion predicates and the pattern-level cohesion measure.
//!
//! A node is cohesive with its pattern when the per-event gap between its
//! group and individual counts stays under a threshold, or when its
//! reinforcement weight sits close to a peer's. A whole pattern is scored by
//! a spread coefficient over its counts scaled by a local/global count ratio;
//! 1.0 is the best score and values can go negative for very incoherent data.

use thiserror::Error;

use crate::model::{NodeId, PatternInstance};

/// Allowed difference for the node-level cohesion predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohesionThreshold {
    delta: f64,
}

impl CohesionThreshold {
    pub fn new(delta: f64) -> Result<Self, CohesionError> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(CohesionError::InvalidThreshold { delta });
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for CohesionThreshold {
    fn default() -> Self {
        Self { delta: 0.5 }
    }
}

/// How the spread of counts around the local mean is turned into a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadMode {
    /// sqrt of the summed squared deviations, divided by the count of values.
    /// This is the scheme behind every published score this library targets.
    #[default]
    RootSumOverCount,
    /// Textbook standard deviation, kept for sensitivity comparisons.
    StandardDeviation,
}

/// Source of the scaling factor multiplying the spread coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountFactorMode {
    /// local mean count / global mean count.
    #[default]
    CountRatio,
    /// Mean reinforcement weight of the members.
    MeanReinforcement,
}

/// Scores for one pattern: the spread coefficient, the count factor, their
/// product, and the means they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohesionReport {
    pub var_coefficient: f64,
    pub count_factor: f64,
    pub cohesion: f64,
    pub local_mean: f64,
    pub global_mean: f64,
}

#[derive(Debug, Error)]
pub enum CohesionError {
    #[error("threshold must be positive and finite, got {delta}")]
    InvalidThreshold { delta: f64 },
    #[error("node {node} is not a member of the pattern")]
    NotAMember { node: NodeId },
    #[error("pattern has no recorded group events; the count test is undefined")]
    NoGroupEvents,
    #[error("count list is empty")]
    EmptyCounts,
    #[error("local mean must be positive, got {local_mean}")]
    NonPositiveLocalMean { local_mean: f64 },
    #[error("global mean must be positive, got {global_mean}")]
    NonPositiveGlobalMean { global_mean: f64 },
}

/// Count-based node test: `(CG - CI) / N_g < delta`. True means the node has
/// kept pace with its pattern's presentations.
pub fn node_cohesion_count(
    p: &PatternInstance,
    node: NodeId,
    thr: CohesionThreshold,
) -> Result<bool, CohesionError> {
    let rec = p.record(node).ok_or(CohesionError::NotAMember { node })?;
    if p.group_events() == 0 {
        return Err(CohesionError::NoGroupEvents);
    }
    let gap = (rec.group_count - rec.individual_count) / p.group_events() as f64;
    Ok(gap < thr.delta)
}

/// Weight-based node test: `|R_i - R_j| < delta`. Symmetric in its arguments.
pub fn node_cohesion_weight(
    p: &PatternInstance,
    i: NodeId,
    j: NodeId,
    thr: CohesionThreshold,
) -> Result<bool, CohesionError> {
    let ri = p.record(i).ok_or(CohesionError::NotAMember { node: i })?.reinforcement;
    let rj = p.record(j).ok_or(CohesionError::NotAMember { node: j })?.reinforcement;
    Ok((ri - rj).abs() < thr.delta)
}

fn spread_ratio(counts: &[f64], local_mean: f64, mode: SpreadMode) -> f64 {
    let sum_sq: f64 = counts.iter().map(|c| (c - local_mean).powi(2)).sum();
    let n = counts.len() as f64;
    let spread = match mode {
        SpreadMode::RootSumOverCount => sum_sq.sqrt() / n,
        SpreadMode::StandardDeviation => (sum_sq / n).sqrt(),
    };
    spread / local_mean
}

/// Spread coefficient: 1 minus the ratio of the count spread to the local
/// mean. 1.0 when all counts equal the mean; can go negative when the spread
/// exceeds the mean.
pub fn variance_coefficient(counts: &[f64], local_mean: f64) -> Result<f64, CohesionError> {
    variance_coefficient_with(counts, local_mean, SpreadMode::default())
}

pub fn variance_coefficient_with(
    counts: &[f64],
    local_mean: f64,
    mode: SpreadMode,
) -> Result<f64, CohesionError> {
    if counts.is_empty() {
        return Err(CohesionError::EmptyCounts);
    }
    if local_mean <= 0.0 || !local_mean.is_finite() {
        return Err(CohesionError::NonPositiveLocalMean { local_mean });
    }
    Ok(1.0 - spread_ratio(counts, local_mean, mode))
}

/// Count factor: local mean over global mean.
pub fn count_factor(local_mean: f64, global_mean: f64) -> Result<f64, CohesionError> {
    if global_mean <= 0.0 || !global_mean.is_finite() {
        return Err(CohesionError::NonPositiveGlobalMean { global_mean });
    }
    Ok(local_mean / global_mean)
}

/// Alternative count factor: the mean reinforcement weight of the members.
pub fn mean_reinforcement(weights: &[f64]) -> Result<f64, CohesionError> {
    if weights.is_empty() {
        return Err(CohesionError::EmptyCounts);
    }
    Ok(weights.iter().sum::<f64>() / weights.len() as f64)
}

/// Whole-pattern cohesion: spread coefficient times count factor.
pub fn pattern_cohesion(
    counts: &[f64],
    local_mean: f64,
    global_mean: f64,
) -> Result<CohesionReport, CohesionError> {
    pattern_cohesion_with(counts, local_mean, global_mean, SpreadMode::default())
}

pub fn pattern_cohesion_with(
    counts: &[f64],
    local_mean: f64,
    global_mean: f64,
    mode: SpreadMode,
) -> Result<CohesionReport, CohesionError> {
    let var_coefficient = variance_coefficient_with(counts, local_mean, mode)?;
    let cf = count_factor(local_mean, global_mean)?;
    Ok(CohesionReport {
        var_coefficient,
        count_factor: cf,
        cohesion: var_coefficient * cf,
        local_mean,
        global_mean,
    })
}

/// Scores a stored instance from its own records: counts are the individual
/// counts, the local mean is their mean, and the global mean is the mean
/// group count. The count factor can instead come from the mean
/// reinforcement weight.
pub fn instance_cohesion(
    p: &PatternInstance,
    cf_mode: CountFactorMode,
) -> Result<CohesionReport, CohesionError> {
    let counts = p.individual_counts();
    let n = counts.len() as f64;
    let local_mean = counts.iter().sum::<f64>() / n;
    let global_mean = p.group_counts().iter().sum::<f64>() / n;
    let var_coefficient = variance_coefficient(&counts, local_mean)?;
    let cf = match cf_mode {
        CountFactorMode::CountRatio => count_factor(local_mean, global_mean)?,
        CountFactorMode::MeanReinforcement => mean_reinforcement(&p.reinforcements())?,
    };
    Ok(CohesionReport {
        var_coefficient,
        count_factor: cf,
        cohesion: var_coefficient * cf,
        local_mean,
        global_mean,
    })
}
