//! Asks which member a weakly coherent pattern should shed: ranks every
//! single-node removal, compares the threshold-driven suggestion with an
//! exhaustive search, and shows a pattern that is better left whole.

use std::collections::BTreeMap;
use std::error::Error;

use pattern_cohesion::{
    brute_force_best_split, evaluate_split, instance_cohesion, present, rank_single_removals,
    recalc_stats, suggest_split, CohesionThreshold, CountFactorMode, InputPattern, NodeId,
    PatternStore, SplitPartition, UpdateConfig,
};

fn fmt_parts(partition: &SplitPartition) -> String {
    partition
        .canonical()
        .iter()
        .map(|part| {
            let ids: Vec<String> = part.iter().map(|n| n.to_string()).collect();
            format!("{{{}}}", ids.join(","))
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

fn store_from_events(events: &[&[u64]]) -> Result<PatternStore, Box<dyn Error>> {
    let cfg = UpdateConfig { new_instance_overlap_threshold: 0.0, ..UpdateConfig::default() };
    let mut store = PatternStore::new();
    for (t, nodes) in events.iter().enumerate() {
        let ip = InputPattern::new(t as u64 + 1, nodes.iter().map(|&n| (NodeId(n), 1.0)))?;
        present(&mut store, &ip, &cfg)?;
    }
    Ok(store)
}

fn main() -> Result<(), Box<dyn Error>> {
    let counts: BTreeMap<NodeId, f64> =
        [(1, 2.0), (2, 4.0), (3, 2.0), (4, 4.0), (5, 3.0)].map(|(n, c)| (NodeId(n), c)).into();

    println!("counts: {:?}", counts.values().collect::<Vec<_>>());
    println!("removal ranking (best remainder first):");
    for (node, eval) in rank_single_removals(&counts)? {
        let (lav, gav) = {
            let rest: Vec<f64> =
                counts.iter().filter(|(n, _)| **n != node).map(|(_, &c)| c).collect();
            recalc_stats(&rest)?
        };
        println!(
            "  drop node {node}: remainder={:.4} composite={:.4}  (rest lav={lav} gav={gav})",
            eval.remainder_cohesion, eval.composite
        );
    }

    // any partition can be scored directly
    let by_count = SplitPartition::two(
        [NodeId(2), NodeId(4)].into(),
        [NodeId(1), NodeId(3), NodeId(5)].into(),
    )?;
    let eval = evaluate_split(&counts, &by_count)?;
    println!("\nsplitting the 4s from the rest scores {:.4}", eval.composite);

    let (best_partition, best_eval) = brute_force_best_split(&counts)?;
    println!(
        "exhaustive best two-part split: {} at {:.4}",
        fmt_parts(&best_partition),
        best_eval.composite
    );

    // a live pattern whose outliers miss most events: the count test at
    // delta 0.5 puts nodes 1 and 3 on their own side
    let store = store_from_events(&[&[1, 2, 3, 4, 5], &[2, 4, 5], &[2, 4], &[1, 3, 5], &[2, 4]])?;
    let p = store.patterns().next().expect("one instance");
    let thr = CohesionThreshold::new(0.5)?;
    match suggest_split(p, thr)? {
        Some(s) => {
            let unsplit = instance_cohesion(p, CountFactorMode::CountRatio)?;
            println!(
                "\nsuggested split {}: composite {:.4} beats the whole's {:.4} (cohesion {:.4})",
                fmt_parts(&s.partition),
                s.evaluation.composite,
                s.unsplit_cohesion,
                unsplit.cohesion
            );
        }
        None => println!("\nno split suggested"),
    }

    // a tight pattern stays whole: everyone shows up every time
    let tight = store_from_events(&[&[7, 8, 9], &[7, 8, 9], &[7, 8, 9]])?;
    let p = tight.patterns().next().expect("one instance");
    assert!(suggest_split(p, thr)?.is_none());
    println!("a pattern whose members always appear together yields no suggestion");
    Ok(())
}
