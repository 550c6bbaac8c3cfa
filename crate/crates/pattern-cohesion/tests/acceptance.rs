//! Acceptance gate: every headline behavior of the crate, checked at pinned
//! tolerances against values computed independently of the library code.
//! Each criterion prints one `criterion NN PASS/FAIL` line.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use pattern_cohesion::activation::ActivationState;
use pattern_cohesion::bench::{
    build_report, chi_square_group, synthetic_segment_table, DatasetTable, GroupRef,
    Normalization, ReportMode,
};
use pattern_cohesion::cohesion::{count_factor, pattern_cohesion};
use pattern_cohesion::model::{InputPattern, NodeId, PatternStore};
use pattern_cohesion::reinforcement::{present, UpdateConfig};
use pattern_cohesion::split::{
    evaluate_split, rank_single_removals, recalc_stats, SplitPartition,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn criterion(number: u32, ok: bool, description: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number:02} {verdict}: {description}");
    assert!(ok, "criterion {number:02} failed: {description}");
}

fn reference_counts() -> BTreeMap<NodeId, f64> {
    [(1, 2.0), (2, 4.0), (3, 2.0), (4, 4.0), (5, 3.0)]
        .into_iter()
        .map(|(n, v)| (NodeId(n), v))
        .collect()
}

fn set(ids: &[u64]) -> BTreeSet<NodeId> {
    ids.iter().map(|&i| NodeId(i)).collect()
}

#[test]
fn criterion_01_original_pattern_cohesion() {
    let rep = pattern_cohesion(&[2.0, 4.0, 2.0, 4.0, 3.0], 3.0, 5.0).unwrap();
    let ok = (rep.cohesion - 0.52).abs() <= 0.005;
    criterion(1, ok, &format!("counts [2,4,2,4,3] at lav=3 gav=5 score {:.6} (0.52 +/- 0.005)", rep.cohesion));
}

#[test]
fn criterion_02_split_scores_and_ranking() {
    let counts = reference_counts();
    let remove_1 = evaluate_split(
        &counts,
        &SplitPartition::two(set(&[2, 3, 4, 5]), set(&[1])).unwrap(),
    )
    .unwrap();
    let remove_5 = evaluate_split(
        &counts,
        &SplitPartition::two(set(&[1, 2, 3, 4]), set(&[5])).unwrap(),
    )
    .unwrap();
    let singletons_exact =
        remove_1.per_part[1].cohesion == 1.0 && remove_5.per_part[1].cohesion == 1.0;

    let ranked = rank_single_removals(&counts).unwrap();
    let pos = |id: u64| ranked.iter().position(|(n, _)| *n == NodeId(id)).unwrap();
    let ranking_holds = pos(1) < pos(5)
        && remove_1.remainder_cohesion > remove_5.remainder_cohesion;

    let ok = (remove_1.remainder_cohesion - 0.707).abs() <= 0.01
        && (remove_5.remainder_cohesion - 0.623).abs() <= 0.01
        && singletons_exact
        && ranking_holds;
    criterion(
        2,
        ok,
        &format!(
            "removal remainders {:.6} (0.707 +/- 0.01) and {:.6} (0.623 +/- 0.01), singletons exactly 1.0, node-1 removal outranks node-5",
            remove_1.remainder_cohesion, remove_5.remainder_cohesion
        ),
    );
}

#[test]
fn criterion_03_recalculated_stats() {
    let ok = recalc_stats(&[2.0]).unwrap() == (2.0, 2.0)
        && recalc_stats(&[4.0, 2.0, 4.0, 3.0]).unwrap() == (3.25, 4.0)
        && recalc_stats(&[3.0]).unwrap() == (3.0, 3.0)
        && recalc_stats(&[2.0, 4.0, 2.0, 4.0]).unwrap() == (3.0, 4.0);
    criterion(3, ok, "post-split (lav, gav) pairs are exactly (2,2), (3.25,4), (3,3), (3,4)");
}

#[test]
fn criterion_04_keyword_presence_fixture() {
    // five documents; every keyword present in three of them
    let presence: [[f64; 3]; 5] = [
        [1.0, 1.0, 0.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
        [0.0, 0.0, 0.0],
    ];
    let counts: Vec<f64> = (0..3).map(|k| presence.iter().map(|r| r[k]).sum()).collect();
    let lav = counts.iter().sum::<f64>() / counts.len() as f64;
    let cf = count_factor(lav, presence.len() as f64).unwrap();
    let partial = pattern_cohesion(&counts, lav, presence.len() as f64).unwrap();
    let full = pattern_cohesion(&[5.0, 5.0, 5.0], 5.0, 5.0).unwrap();
    let ok = counts == vec![3.0, 3.0, 3.0]
        && cf == 0.6
        && partial.count_factor == 0.6
        && full.cohesion == 1.0;
    criterion(4, ok, "presence counts of 3 against extent 5 give count factor exactly 0.6; counts of 5 give cohesion exactly 1.0");
}

#[test]
fn criterion_05_dataset_directional_claim() {
    let start = Instant::now();
    let table = synthetic_segment_table(7);
    let report = build_report(&table, Normalization::MinMax).unwrap();
    let elapsed = start.elapsed();

    let normalized = report
        .sections
        .iter()
        .find(|s| s.mode == ReportMode::Normalized)
        .expect("minmax report carries a normalized section");
    let raw = report
        .sections
        .iter()
        .find(|s| s.mode == ReportMode::Raw)
        .expect("report carries a raw section");

    let all_categories_beat_whole = normalized.categories.len() == 7
        && normalized
            .categories
            .iter()
            .all(|c| c.cohesion.cohesion > normalized.whole.cohesion.cohesion);

    // the raw whole-dataset score is reported with its sign made explicit
    let raw_whole = raw.whole.cohesion.cohesion;
    let sign_reported = raw_whole.is_finite()
        && (raw_whole >= 0.0) != report.render_text().contains("cohesion is negative in raw mode");

    // a dataset with a negative raw node value must trip the sign flag
    let skewed = DatasetTable::new(
        "skewed",
        vec!["v1".into()],
        vec![vec![-5.0], vec![10.0], vec![2.0], vec![2.0]],
        vec!["a".into(), "a".into(), "b".into(), "b".into()],
        None,
    )
    .unwrap();
    let skewed_report = build_report(&skewed, Normalization::Off).unwrap();
    let flag_fires = skewed_report.sections[0].whole.cohesion.cohesion < 0.0
        && skewed_report.render_text().contains("cohesion is negative in raw mode");

    let ok = all_categories_beat_whole
        && sign_reported
        && flag_fires
        && elapsed.as_secs_f64() < 10.0;
    criterion(
        5,
        ok,
        &format!(
            "all 7 normalized category cohesions exceed the whole ({:.6}); raw whole {:.6} sign-flagged; report built in {:.2}s",
            normalized.whole.cohesion.cohesion, raw_whole, elapsed.as_secs_f64()
        ),
    );
}

/// Counting oracle: replays a presentation sequence with plain set algebra
/// and integer counters, independent of the store implementation.
#[derive(Debug)]
struct ShadowInstance {
    members: BTreeSet<u64>,
    individual: BTreeMap<u64, u64>,
    group: u64,
    events: u64,
}

fn shadow_present(instances: &mut Vec<ShadowInstance>, input: &BTreeSet<u64>) {
    let mut best = 0.0f64;
    for inst in instances.iter() {
        let shared = inst.members.intersection(input).count();
        let union = inst.members.union(input).count();
        best = best.max(shared as f64 / union as f64);
    }
    for inst in instances.iter_mut() {
        let shared: Vec<u64> = inst.members.intersection(input).copied().collect();
        if shared.is_empty() {
            continue;
        }
        for node in shared {
            *inst.individual.get_mut(&node).expect("member") += 1;
        }
        inst.group += 1;
        inst.events += 1;
    }
    if instances.is_empty() || best < 1.0 {
        instances.push(ShadowInstance {
            members: input.clone(),
            individual: input.iter().map(|&n| (n, 1)).collect(),
            group: 1,
            events: 1,
        });
    }
}

#[test]
fn criterion_06_counting_invariant_suite() {
    let mut rng = StdRng::seed_from_u64(0x0acc_0006);
    let cfg = UpdateConfig::default();
    let mut violations = 0usize;
    let mut sequences = 0usize;

    for _ in 0..1000 {
        sequences += 1;
        let mut store = PatternStore::new();
        let mut shadow: Vec<ShadowInstance> = Vec::new();
        for ts in 0..rng.gen_range(1..12u64) {
            let size = rng.gen_range(1..5usize);
            let mut nodes = BTreeSet::new();
            while nodes.len() < size {
                nodes.insert(rng.gen_range(0..9u64));
            }
            let ip = InputPattern::new(ts, nodes.iter().map(|&n| (NodeId(n), 1.0))).unwrap();
            present(&mut store, &ip, &cfg).unwrap();
            shadow_present(&mut shadow, &nodes);
        }

        if store.len() != shadow.len() {
            violations += 1;
            continue;
        }
        for (p, s) in store.patterns().zip(shadow.iter()) {
            let members: BTreeSet<u64> = p.members().map(|n| n.0).collect();
            if members != s.members || p.group_events() != s.events {
                violations += 1;
            }
            let group_counts = p.group_counts();
            for (node, rec) in p.records() {
                let expected_ci = s.individual[&node.0] as f64;
                if rec.individual_count != expected_ci
                    || rec.group_count != s.group as f64
                    || rec.individual_count > rec.group_count
                    || rec.group_count != group_counts[0]
                {
                    violations += 1;
                }
            }
        }
    }
    let ok = violations == 0 && sequences >= 1000;
    criterion(
        6,
        ok,
        &format!("{sequences} random presentation sequences replayed against a set-algebra oracle with {violations} violations"),
    );
}

#[test]
fn criterion_07_cohesion_scale_invariance() {
    let mut rng = StdRng::seed_from_u64(0x0acc_0007);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(1..9);
        let counts: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..25.0)).collect();
        let lav = rng.gen_range(0.1..25.0);
        let gav = rng.gen_range(0.1..25.0);
        let base = pattern_cohesion(&counts, lav, gav).unwrap().cohesion;
        for c in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = counts.iter().map(|v| v * c).collect();
            let got = pattern_cohesion(&scaled, lav * c, gav * c).unwrap().cohesion;
            worst = worst.max((got - base).abs());
        }
    }
    let ok = worst <= 1e-12;
    criterion(7, ok, &format!("500 random count sets rescaled by 0.5/2/10 drift at most {worst:.3e} (limit 1e-12)"));
}

/// Removal oracle: straight-line arithmetic over the remaining counts,
/// independent of the split module.
fn oracle_removal_remainder(counts: &BTreeMap<NodeId, f64>, removed: NodeId) -> f64 {
    let rest: Vec<f64> =
        counts.iter().filter(|(n, _)| **n != removed).map(|(_, &v)| v).collect();
    let n = rest.len() as f64;
    let lav = rest.iter().sum::<f64>() / n;
    if lav == 0.0 {
        return 1.0;
    }
    let gav = rest.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_sq: f64 = rest.iter().map(|c| (c - lav) * (c - lav)).sum();
    let var = 1.0 - (sum_sq.sqrt() / n) / lav;
    var * (lav / gav)
}

#[test]
fn criterion_08_removal_ranking_matches_exhaustive_oracle() {
    let mut rng = StdRng::seed_from_u64(0x0acc_0008);
    let mut checked = 0usize;
    let mut agreed = 0usize;
    for _ in 0..200 {
        let n = rng.gen_range(2..9usize);
        let counts: BTreeMap<NodeId, f64> =
            (0..n as u64).map(|i| (NodeId(i), f64::from(rng.gen_range(0..11)))).collect();

        // exhaustive oracle over every removal-shaped partition: best
        // remainder, ties to the smallest node id
        let mut best: Option<(NodeId, f64)> = None;
        for &node in counts.keys() {
            let remainder = oracle_removal_remainder(&counts, node);
            let better = match best {
                None => true,
                Some((_, cur)) => remainder > cur,
            };
            if better {
                best = Some((node, remainder));
            }
        }
        let (oracle_node, oracle_remainder) = best.expect("two or more nodes");

        let ranked = rank_single_removals(&counts).unwrap();
        let (top_node, top_eval) = &ranked[0];
        checked += 1;
        if *top_node == oracle_node && top_eval.remainder_cohesion == oracle_remainder {
            agreed += 1;
        }
    }
    let ok = checked == 200 && agreed == checked;
    criterion(8, ok, &format!("top-ranked removal agreed with the exhaustive removal oracle on {agreed}/{checked} random patterns"));
}

fn contest_state(delta: f64) -> ActivationState {
    let mut s =
        ActivationState::new(vec![set(&[1, 2]), set(&[3, 4])], delta, 3, 1.5).unwrap();
    s.set_excitation(NodeId(1), 1, 1.0).unwrap();
    s.set_excitation(NodeId(2), 1, 1.0).unwrap();
    s.set_excitation(NodeId(3), 1, 0.5).unwrap();
    s.set_excitation(NodeId(4), 1, 0.25).unwrap();
    for t in 1..=3 {
        s.set_inhibition(NodeId(1), t, 0.5).unwrap();
        s.set_inhibition(NodeId(2), t, 0.5).unwrap();
        s.set_inhibition(NodeId(3), t, 0.25).unwrap();
        s.set_inhibition(NodeId(4), t, 0.25).unwrap();
    }
    s
}

/// Input oracle: literal triple sum over patterns, intervals and neurons.
fn oracle_total_input(state: &ActivationState, neuron: NodeId, t: u32) -> f64 {
    let own = state
        .patterns()
        .iter()
        .position(|p| p.contains(&neuron))
        .expect("neuron belongs to a pattern");
    let mut excitation = 0.0;
    for &member in &state.patterns()[own] {
        excitation += state.excitation(member, t);
    }
    let mut inhibition = 0.0;
    for (k, pattern) in state.patterns().iter().enumerate() {
        if k == own {
            continue;
        }
        for &j in pattern {
            for y in 1..=state.horizon() {
                if y != t {
                    inhibition += state.inhibition(j, y);
                }
            }
        }
    }
    excitation - state.delta() * inhibition
}

#[test]
fn criterion_09_activation_input_checks() {
    // delta = 0 equals the excitatory-only run, exactly
    let zero_delta = contest_state(0.0).run().unwrap();
    let mut cleared = contest_state(0.5);
    cleared.clear_inhibition();
    let excitatory_only = cleared.run().unwrap();
    let delta_zero_ok = zero_delta == excitatory_only;

    // linear in delta at three weights
    let s0 = contest_state(0.0);
    let s1 = contest_state(1.0);
    let s2 = contest_state(2.0);
    let mut linear_ok = true;
    for id in 1..=4u64 {
        for t in 1..=3 {
            let x0 = s0.total_input(NodeId(id), t).unwrap();
            let x1 = s1.total_input(NodeId(id), t).unwrap();
            let x2 = s2.total_input(NodeId(id), t).unwrap();
            let slope = x0 - x1;
            linear_ok &= (x2 - (x0 - 2.0 * slope)).abs() <= 1e-12;
        }
    }

    // the two-pattern three-interval fixture matches the triple-sum oracle
    // bitwise, and the run's hand-computed values hold exactly
    let state = contest_state(0.5);
    let mut oracle_ok = true;
    for id in 1..=4u64 {
        for t in 1..=3 {
            oracle_ok &= state.total_input(NodeId(id), t).unwrap()
                == oracle_total_input(&state, NodeId(id), t);
        }
    }
    let trace = contest_state(0.5).run().unwrap();
    let mut hand_ok = true;
    for t in 1..=3 {
        hand_ok &= trace.value(NodeId(1), t).unwrap() == 1.5;
        hand_ok &= trace.value(NodeId(2), t).unwrap() == 1.5;
        hand_ok &= trace.fired_at(t) == [0];
    }
    hand_ok &= trace.value(NodeId(3), 1).unwrap() == -0.25;
    hand_ok &= trace.value(NodeId(4), 1).unwrap() == -0.25;
    for t in 2..=3 {
        hand_ok &= trace.value(NodeId(3), t).unwrap() == -1.0;
        hand_ok &= trace.value(NodeId(4), t).unwrap() == -1.0;
    }

    let ok = delta_zero_ok && linear_ok && oracle_ok && hand_ok;
    criterion(9, ok, "delta=0 equals excitatory-only exactly, inputs are linear in delta (1e-12), and the two-pattern fixture matches the triple-sum oracle bitwise");
}

#[test]
fn criterion_10_chi_square_baseline() {
    // constant groups score exactly zero
    let mut constant_ok = true;
    for (rows, vars) in [(2usize, 1usize), (5, 3), (1, 4)] {
        let table = DatasetTable::new(
            "constant",
            (1..=vars).map(|i| format!("v{i}")).collect(),
            vec![vec![3.5; vars]; rows],
            vec!["a".to_string(); rows],
            None,
        )
        .unwrap();
        constant_ok &= chi_square_group(&table, GroupRef::Whole).unwrap() == 0.0;
    }

    // non-negative on random groups
    let mut rng = StdRng::seed_from_u64(0x0acc_0010);
    let mut nonneg_ok = true;
    let mut groups = 0;
    for _ in 0..1000 {
        groups += 1;
        let rows = rng.gen_range(1..7usize);
        let vars = rng.gen_range(1..5usize);
        let table = DatasetTable::new(
            "random",
            (1..=vars).map(|i| format!("v{i}")).collect(),
            (0..rows).map(|_| (0..vars).map(|_| rng.gen_range(0.0..40.0)).collect()).collect(),
            vec!["a".to_string(); rows],
            None,
        )
        .unwrap();
        nonneg_ok &= chi_square_group(&table, GroupRef::Whole).unwrap() >= 0.0;
    }

    // the two-row single-variable example is exactly one third
    let table = DatasetTable::new(
        "pair",
        vec!["v1".into()],
        vec![vec![2.0], vec![4.0]],
        vec!["a".into(), "a".into()],
        None,
    )
    .unwrap();
    let exact_ok = chi_square_group(&table, GroupRef::Whole).unwrap() == 1.0 / 3.0;

    let ok = constant_ok && nonneg_ok && groups == 1000 && exact_ok;
    criterion(10, ok, "chi-square is 0 on constant groups, non-negative on 1000 random groups, and exactly 1/3 on the [2],[4] pair");
}
