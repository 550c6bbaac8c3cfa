//! Presentation-driven updates: weight reinforcement, individual and group
//! count updates, instance creation on novel inputs, and multiplicative decay.
//!
//! A presentation touches every stored instance it overlaps. Members that
//! appear in the input are reinforced and counted individually; members that
//! do not appear lose reinforcement (clamped at zero) but still receive the
//! group count, which is what lets the individual/group gap flag them later.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{InputPattern, ModelError, PatternId, PatternInstance, PatternStore};

/// Increment weights, decay factor and the instance-creation threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateConfig {
    /// Individual increment applied to reinforcement and individual counts.
    pub individual_increment: f64,
    /// Group increment applied to every member's group count per presentation.
    pub group_increment: f64,
    /// Multiplicative reinforcement decay per [`decay`] call; 1.0 disables it.
    pub decay_factor: f64,
    /// A new instance is created when the best overlap fraction across the
    /// store falls below this. 1.0 means "create unless an exact match exists".
    pub new_instance_overlap_threshold: f64,
    /// When set, reinforcement increments are scaled by the input signal.
    /// Counts always use the plain increments.
    pub signal_scaled: bool,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            individual_increment: 1.0,
            group_increment: 1.0,
            decay_factor: 1.0,
            new_instance_overlap_threshold: 1.0,
            signal_scaled: false,
        }
    }
}

impl UpdateConfig {
    pub fn validate(&self) -> Result<(), ReinforceError> {
        let fail = |message: String| Err(ReinforceError::InvalidConfig { message });
        if self.individual_increment <= 0.0 || !self.individual_increment.is_finite() {
            return fail(format!(
                "individual increment must be positive and finite, got {}",
                self.individual_increment
            ));
        }
        if self.group_increment <= 0.0 || !self.group_increment.is_finite() {
            return fail(format!(
                "group increment must be positive and finite, got {}",
                self.group_increment
            ));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return fail(format!("decay factor must lie in (0, 1], got {}", self.decay_factor));
        }
        if !(0.0..=1.0).contains(&self.new_instance_overlap_threshold) {
            return fail(format!(
                "overlap threshold must lie in [0, 1], got {}",
                self.new_instance_overlap_threshold
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ReinforceError {
    #[error("invalid update config: {message}")]
    InvalidConfig { message: String },
    #[error("presentation input is empty")]
    EmptyInput,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Result of [`update_counts`]: either the counts were applied or the input
/// did not touch the pattern at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountUpdate {
    Applied { shared: usize },
    NoOverlap,
}

/// One instance touched by a presentation: how many members were shared and
/// whether this presentation created the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TouchedInstance {
    pub pattern: PatternId,
    pub shared: usize,
    pub created: bool,
}

/// Summary of one presentation applied through [`present`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PresentOutcome {
    /// Instances that received this presentation, in ascending id order.
    pub touched: Vec<TouchedInstance>,
    /// Id of the instance created for this input, if any.
    pub created: Option<PatternId>,
}

/// Adds the individual increment to the reinforcement of every member of `p`
/// that appears in `ip`. In signal-scaled mode the increment is multiplied by
/// the node's input signal. Other members are untouched.
pub fn reinforce(p: &mut PatternInstance, ip: &InputPattern, cfg: &UpdateConfig) {
    for (node, rec) in p.records_mut() {
        if let Some(signal) = ip.signal(node) {
            let scale = if cfg.signal_scaled { signal } else { 1.0 };
            rec.reinforcement += cfg.individual_increment * scale;
        }
    }
}

/// Applies the counting rule for one presentation: members present in `ip`
/// gain the individual increment on their individual count, every member
/// gains the group increment on its group count, and the group-event counter
/// advances. An input with no shared members is a distinct no-op.
pub fn update_counts(
    p: &mut PatternInstance,
    ip: &InputPattern,
    cfg: &UpdateConfig,
) -> CountUpdate {
    let mut shared = 0usize;
    for (node, _) in p.records() {
        if ip.signal(node).is_some() {
            shared += 1;
        }
    }
    if shared == 0 {
        return CountUpdate::NoOverlap;
    }
    for (node, rec) in p.records_mut() {
        if ip.signal(node).is_some() {
            rec.individual_count += cfg.individual_increment;
        }
        rec.group_count += cfg.group_increment;
    }
    p.bump_group_events();
    CountUpdate::Applied { shared }
}

fn overlap_fraction(p: &PatternInstance, input_nodes: &BTreeSet<crate::model::NodeId>) -> f64 {
    let shared = p.members().filter(|n| input_nodes.contains(n)).count();
    let union = p.member_count() + input_nodes.len() - shared;
    shared as f64 / union as f64
}

/// Applies `ip` to every overlapping instance in the store and, when no
/// instance matches closely enough, creates a new instance from the input's
/// nodes and gives it one presentation.
///
/// Per touched instance: shared members receive reinforcement plus both count
/// updates; absent members have their reinforcement reduced by the individual
/// increment (clamped at zero) and receive only the group count.
pub fn present(
    store: &mut PatternStore,
    ip: &InputPattern,
    cfg: &UpdateConfig,
) -> Result<PresentOutcome, ReinforceError> {
    cfg.validate()?;
    if ip.is_empty() {
        return Err(ReinforceError::EmptyInput);
    }

    let input_nodes = ip.node_set();
    let mut best_fraction = 0.0f64;
    let mut touch_ids = Vec::new();
    for p in store.patterns() {
        let fraction = overlap_fraction(p, &input_nodes);
        if fraction > best_fraction {
            best_fraction = fraction;
        }
        if fraction > 0.0 {
            touch_ids.push(p.id());
        }
    }

    let mut outcome = PresentOutcome::default();
    for id in touch_ids {
        let p = store.pattern_mut(id).expect("id collected from live store");
        let mut shared = 0usize;
        for (node, rec) in p.records_mut() {
            match ip.signal(node) {
                Some(signal) => {
                    shared += 1;
                    let scale = if cfg.signal_scaled { signal } else { 1.0 };
                    rec.reinforcement += cfg.individual_increment * scale;
                    rec.individual_count += cfg.individual_increment;
                }
                None => {
                    rec.reinforcement = (rec.reinforcement - cfg.individual_increment).max(0.0);
                }
            }
            rec.group_count += cfg.group_increment;
        }
        p.bump_group_events();
        outcome.touched.push(TouchedInstance { pattern: id, shared, created: false });
    }

    let novel = store.is_empty() || best_fraction < cfg.new_instance_overlap_threshold;
    if novel {
        let id = store.create_pattern(&input_nodes)?;
        let p = store.pattern_mut(id).expect("just created");
        for (node, rec) in p.records_mut() {
            let signal = ip.signal(node).expect("members come from the input");
            let scale = if cfg.signal_scaled { signal } else { 1.0 };
            rec.reinforcement += cfg.individual_increment * scale;
            rec.individual_count += cfg.individual_increment;
            rec.group_count += cfg.group_increment;
        }
        p.bump_group_events();
        outcome.touched.push(TouchedInstance {
            pattern: id,
            shared: input_nodes.len(),
            created: true,
        });
        outcome.created = Some(id);
    }

    store.advance_clock(ip.timestamp());
    Ok(outcome)
}

/// Multiplies every reinforcement value in the store by the decay factor.
/// Counts and group-event totals are untouched.
pub fn decay(store: &mut PatternStore, cfg: &UpdateConfig) -> Result<(), ReinforceError> {
    cfg.validate()?;
    for p in store.patterns_mut() {
        for (_, rec) in p.records_mut() {
            rec.reinforcement *= cfg.decay_factor;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeId;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn nodes(ids: &[u64]) -> BTreeSet<NodeId> {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    fn input(ts: u64, pairs: &[(u64, f64)]) -> InputPattern {
        InputPattern::new(ts, pairs.iter().map(|&(n, v)| (NodeId(n), v))).unwrap()
    }

    fn unit_input(ts: u64, ids: &[u64]) -> InputPattern {
        let pairs: Vec<(u64, f64)> = ids.iter().map(|&i| (i, 1.0)).collect();
        input(ts, &pairs)
    }

    fn instance(ids: &[u64]) -> PatternInstance {
        PatternInstance::new(PatternId(0), &nodes(ids)).unwrap()
    }

    #[test]
    fn reinforce_single_increment() {
        let mut p = instance(&[1, 2]);
        reinforce(&mut p, &unit_input(0, &[1]), &UpdateConfig::default());
        assert_eq!(p.record(NodeId(1)).unwrap().reinforcement, 1.0);
        assert_eq!(p.record(NodeId(2)).unwrap().reinforcement, 0.0);
    }

    #[test]
    fn reinforce_is_additive() {
        let mut p = instance(&[1, 2]);
        let ip = unit_input(0, &[1, 2]);
        for _ in 0..3 {
            reinforce(&mut p, &ip, &UpdateConfig::default());
        }
        assert_eq!(p.reinforcements(), vec![3.0, 3.0]);
    }

    #[test]
    fn reinforce_scales_by_signal_when_enabled() {
        let mut p = instance(&[1]);
        let cfg = UpdateConfig { signal_scaled: true, ..UpdateConfig::default() };
        reinforce(&mut p, &input(0, &[(1, 0.5)]), &cfg);
        assert_eq!(p.record(NodeId(1)).unwrap().reinforcement, 0.5);
    }

    #[test]
    fn update_counts_direct_case() {
        let mut p = instance(&[1, 2, 3]);
        let got = update_counts(&mut p, &unit_input(0, &[1, 2]), &UpdateConfig::default());
        assert_eq!(got, CountUpdate::Applied { shared: 2 });
        assert_eq!(p.individual_counts(), vec![1.0, 1.0, 0.0]);
        assert_eq!(p.group_counts(), vec![1.0, 1.0, 1.0]);
        assert_eq!(p.group_events(), 1);
    }

    #[test]
    fn repeated_partial_presentations_open_a_gap() {
        let mut p = instance(&[1, 2, 3]);
        let ip = unit_input(0, &[1, 2]);
        for _ in 0..5 {
            update_counts(&mut p, &ip, &UpdateConfig::default());
        }
        let c = p.record(NodeId(3)).unwrap();
        assert_eq!(p.record(NodeId(1)).unwrap().individual_count, 5.0);
        assert_eq!(c.individual_count, 0.0);
        assert_eq!(c.group_count, 5.0);
        assert_eq!((c.group_count - c.individual_count) / p.group_events() as f64, 1.0);
    }

    #[test]
    fn update_counts_signals_disjoint_input() {
        let mut p = instance(&[1, 2]);
        let before = p.clone();
        let got = update_counts(&mut p, &unit_input(0, &[8, 9]), &UpdateConfig::default());
        assert_eq!(got, CountUpdate::NoOverlap);
        assert_eq!(p, before);
    }

    #[test]
    fn present_on_empty_store_creates_one_instance() {
        let mut store = PatternStore::new();
        let out = present(&mut store, &unit_input(1, &[1, 2]), &UpdateConfig::default()).unwrap();
        assert_eq!(store.len(), 1);
        let id = out.created.unwrap();
        let p = store.pattern(id).unwrap();
        assert_eq!(p.group_events(), 1);
        assert_eq!(p.individual_counts(), vec![1.0, 1.0]);
        assert_eq!(p.group_counts(), vec![1.0, 1.0]);
        assert_eq!(store.clock(), 1);
    }

    #[test]
    fn present_exact_match_creates_nothing() {
        let mut store = PatternStore::new();
        let ip = unit_input(1, &[1, 2]);
        present(&mut store, &ip, &UpdateConfig::default()).unwrap();
        let out = present(&mut store, &ip, &UpdateConfig::default()).unwrap();
        assert_eq!(store.len(), 1);
        assert!(out.created.is_none());
        let p = store.patterns().next().unwrap();
        assert_eq!(p.individual_counts(), vec![2.0, 2.0]);
        assert_eq!(p.group_counts(), vec![2.0, 2.0]);
        assert_eq!(p.reinforcements(), vec![2.0, 2.0]);
    }

    #[test]
    fn present_updates_shared_and_demotes_absent_members() {
        let mut store = PatternStore::new();
        present(&mut store, &unit_input(1, &[1, 2, 3, 4]), &UpdateConfig::default()).unwrap();
        let out = present(&mut store, &unit_input(2, &[1, 2, 3, 5]), &UpdateConfig::default())
            .unwrap();

        assert_eq!(store.len(), 2);
        let b = store.pattern(PatternId(0)).unwrap();
        for n in [1, 2, 3] {
            let rec = b.record(NodeId(n)).unwrap();
            assert_eq!((rec.reinforcement, rec.individual_count, rec.group_count), (2.0, 2.0, 2.0));
        }
        let blue = b.record(NodeId(4)).unwrap();
        assert_eq!(blue.reinforcement, 0.0);
        assert_eq!(blue.individual_count, 1.0);
        assert_eq!(blue.group_count, 2.0);
        assert_eq!(b.group_events(), 2);

        let new_id = out.created.unwrap();
        let fresh = store.pattern(new_id).unwrap();
        assert_eq!(fresh.member_set(), nodes(&[1, 2, 3, 5]));
        assert_eq!(fresh.individual_counts(), vec![1.0; 4]);
        assert_eq!(fresh.group_events(), 1);
        assert_eq!(out.touched.len(), 2);
        assert_eq!(out.touched[0].shared, 3);
        assert!(!out.touched[0].created);
        assert!(out.touched[1].created);
    }

    #[test]
    fn present_clamps_reinforcement_at_zero() {
        let mut store = PatternStore::new();
        present(&mut store, &unit_input(1, &[1, 2]), &UpdateConfig::default()).unwrap();
        for ts in 2..5 {
            present(&mut store, &unit_input(ts, &[1]), &UpdateConfig::default()).unwrap();
        }
        let rec = store.pattern(PatternId(0)).unwrap().record(NodeId(2)).unwrap();
        assert_eq!(rec.reinforcement, 0.0);
        assert!(rec.group_count > rec.individual_count);
    }

    #[test]
    fn present_rejects_empty_input() {
        let mut store = PatternStore::new();
        let ip = InputPattern::new(0, std::iter::empty()).unwrap();
        assert!(matches!(
            present(&mut store, &ip, &UpdateConfig::default()),
            Err(ReinforceError::EmptyInput)
        ));
    }

    #[test]
    fn lower_threshold_reuses_partial_matches() {
        let cfg = UpdateConfig { new_instance_overlap_threshold: 0.5, ..UpdateConfig::default() };
        let mut store = PatternStore::new();
        present(&mut store, &unit_input(1, &[1, 2, 3]), &cfg).unwrap();
        // overlap fraction 2/4 = 0.5, not below threshold: no new instance
        let out = present(&mut store, &unit_input(2, &[1, 2, 9]), &cfg).unwrap();
        assert!(out.created.is_none());
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn decay_scales_reinforcement_only() {
        let mut store = PatternStore::new();
        present(&mut store, &unit_input(1, &[1, 2]), &UpdateConfig::default()).unwrap();
        present(&mut store, &unit_input(2, &[1, 2]), &UpdateConfig::default()).unwrap();
        present(&mut store, &unit_input(3, &[1]), &UpdateConfig::default()).unwrap();
        let before = store.pattern(PatternId(0)).unwrap().clone();

        // after three presentations node 1 holds R=3 and the once-absent
        // node 2 holds R=1 (2 incremented twice, then decremented once)
        let cfg = UpdateConfig { decay_factor: 0.5, ..UpdateConfig::default() };
        decay(&mut store, &cfg).unwrap();
        let after = store.pattern(PatternId(0)).unwrap();
        assert_eq!(after.reinforcements(), vec![1.5, 0.5]);
        assert_eq!(after.individual_counts(), before.individual_counts());
        assert_eq!(after.group_counts(), before.group_counts());
        assert_eq!(after.group_events(), before.group_events());
    }

    #[test]
    fn decay_factor_one_is_identity() {
        let mut store = PatternStore::new();
        present(&mut store, &unit_input(1, &[1, 2]), &UpdateConfig::default()).unwrap();
        let before = store.clone();
        decay(&mut store, &UpdateConfig::default()).unwrap();
        assert_eq!(store, before);
    }

    #[test]
    fn repeated_decay_matches_closed_form() {
        let mut store = PatternStore::new();
        present(&mut store, &unit_input(1, &[1]), &UpdateConfig::default()).unwrap();
        let cfg = UpdateConfig { decay_factor: 0.9, ..UpdateConfig::default() };
        for _ in 0..10 {
            decay(&mut store, &cfg).unwrap();
        }
        let r = store.pattern(PatternId(0)).unwrap().record(NodeId(1)).unwrap().reinforcement;
        assert!((r - 0.9f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut store = PatternStore::new();
        let cfg = UpdateConfig { individual_increment: 0.0, ..UpdateConfig::default() };
        assert!(present(&mut store, &unit_input(1, &[1]), &cfg).is_err());
        let cfg = UpdateConfig { decay_factor: 0.0, ..UpdateConfig::default() };
        assert!(decay(&mut store, &cfg).is_err());
        let cfg = UpdateConfig { new_instance_overlap_threshold: 1.5, ..UpdateConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn counting_invariants_hold_over_random_sequences() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0101);
        let cfg = UpdateConfig::default();
        for _ in 0..200 {
            let mut store = PatternStore::new();
            let mut presentations = 0u64;
            let mut events_per_instance = std::collections::BTreeMap::new();
            for ts in 0..rng.gen_range(1..20) {
                let n = rng.gen_range(1..5);
                let mut ids = BTreeSet::new();
                while ids.len() < n {
                    ids.insert(rng.gen_range(0..8u64));
                }
                let ids: Vec<u64> = ids.into_iter().collect();
                let ip = unit_input(ts, &ids);
                let out = present(&mut store, &ip, &cfg).unwrap();
                presentations += 1;
                for t in &out.touched {
                    *events_per_instance.entry(t.pattern).or_insert(0u64) += 1;
                }
            }
            assert!(presentations > 0);
            for p in store.patterns() {
                let cgs = p.group_counts();
                for (_, rec) in p.records() {
                    assert!(rec.is_valid());
                    assert!(rec.individual_count <= rec.group_count + 1e-12);
                    assert_eq!(rec.group_count, cgs[0]);
                }
                assert_eq!(p.group_events(), events_per_instance[&p.id()]);
                assert_eq!(p.group_counts()[0], p.group_events() as f64);
            }
        }
    }
}
