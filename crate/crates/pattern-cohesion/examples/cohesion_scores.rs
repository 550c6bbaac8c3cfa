//! Scores one five-node pattern whose members were seen 2, 4, 2, 4 and 3
//! times across five group events, then runs the node-level tests that tell
//! cohesive members from outliers.

use std::error::Error;

use pattern_cohesion::cohesion::{
    count_factor, node_cohesion_count, node_cohesion_weight, variance_coefficient,
};
use pattern_cohesion::{instance_cohesion, pattern_cohesion, CohesionThreshold, CountFactorMode};
use pattern_cohesion::{present, InputPattern, NodeId, PatternStore, UpdateConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let counts = [2.0, 4.0, 2.0, 4.0, 3.0];
    let lav = 3.0; // local mean of the counts
    let gav = 5.0; // group events, the ceiling any count could reach

    let var = variance_coefficient(&counts, lav)?;
    let cf = count_factor(lav, gav)?;
    let report = pattern_cohesion(&counts, lav, gav)?;
    println!("counts {counts:?} with lav={lav} gav={gav}");
    println!("  spread keeps {var:.4} of the score, the count ratio {cf:.4}");
    println!("  cohesion = {:.4} * {:.4} = {:.4}\n", report.var_coefficient, report.count_factor, report.cohesion);

    // the same pattern built live: five presentations whose memberships add
    // up to exactly those counts
    let events: [&[u64]; 5] = [&[1, 2, 3, 4, 5], &[2, 4, 5], &[2, 4], &[1, 3, 5], &[2, 4]];
    let cfg = UpdateConfig { new_instance_overlap_threshold: 0.0, ..UpdateConfig::default() };
    let mut store = PatternStore::new();
    for (t, nodes) in events.iter().enumerate() {
        let ip = InputPattern::new(t as u64 + 1, nodes.iter().map(|&n| (NodeId(n), 1.0)))?;
        present(&mut store, &ip, &cfg)?;
    }
    let p = store.patterns().next().expect("one instance");
    let live = instance_cohesion(p, CountFactorMode::CountRatio)?;
    println!("live store reaches cohesion {:.4} after {} events", live.cohesion, p.group_events());

    // count test: a node is cohesive when it misses fewer than delta events
    // per presentation on average
    let thr = CohesionThreshold::new(0.5)?;
    for node in p.members() {
        let verdict = if node_cohesion_count(p, node, thr)? { "cohesive" } else { "outlier" };
        let rec = p.record(node).expect("member");
        println!("  node {node}: CI={} CG={} -> {verdict}", rec.individual_count, rec.group_count);
    }

    // weight test: two nodes cohere when their reinforcement weights sit
    // within delta of each other
    let close = node_cohesion_weight(p, NodeId(2), NodeId(4), thr)?;
    let far = node_cohesion_weight(p, NodeId(1), NodeId(2), thr)?;
    println!("  weights of 2 and 4 within 0.5 of each other: {close}");
    println!("  weights of 1 and 2 within 0.5 of each other: {far}");
    Ok(())
}
