//! Presents a handful of inputs to an empty store and prints how the
//! per-node counters move: weights and individual counts rise for present
//! members, weights fall for absent ones, and the group count advances for
//! every member of a touched instance.

use std::error::Error;

use pattern_cohesion::reinforcement::decay;
use pattern_cohesion::{present, InputPattern, NodeId, PatternStore, UpdateConfig};

fn dump(store: &PatternStore, heading: &str) {
    println!("{heading}");
    for p in store.patterns() {
        println!("  pattern {} ({} events):", p.id(), p.group_events());
        for (node, rec) in p.records() {
            println!(
                "    node {node}: R={:<5} CI={:<5} CG={:<5}",
                rec.reinforcement, rec.individual_count, rec.group_count
            );
        }
    }
    println!();
}

fn main() -> Result<(), Box<dyn Error>> {
    let cfg = UpdateConfig::default();
    let mut store = PatternStore::new();

    let full = InputPattern::new(1, [(NodeId(1), 1.0), (NodeId(2), 1.0), (NodeId(3), 1.0)])?;
    present(&mut store, &full, &cfg)?;
    dump(&store, "input {1,2,3} lands in an empty store and becomes instance 0:");

    // node 3 misses the second event: its weight drops while the group count
    // still advances, and the partial input also spawns its own instance
    // because no stored pattern matches it exactly
    let partial = InputPattern::new(2, [(NodeId(1), 1.0), (NodeId(2), 1.0)])?;
    let outcome = present(&mut store, &partial, &cfg)?;
    let created = |o: &pattern_cohesion::reinforcement::PresentOutcome| {
        o.created.map_or("none".to_string(), |id| format!("pattern {id}"))
    };
    println!(
        "input {{1,2}} touched {} instance(s), created: {}",
        outcome.touched.len(),
        created(&outcome)
    );
    dump(&store, "after the partial repeat:");

    let outcome = present(&mut store, &full, &cfg)?;
    println!(
        "input {{1,2,3}} touched {} instance(s), created: {}",
        outcome.touched.len(),
        created(&outcome)
    );
    dump(&store, "an exact repeat reinforces both instances, creating nothing:");

    // decay halves every weight but leaves the counts alone
    let half = UpdateConfig { decay_factor: 0.5, ..cfg };
    decay(&mut store, &half)?;
    dump(&store, "after a 0.5 decay sweep:");

    let mut buf = Vec::new();
    store.save(&mut buf)?;
    println!("store serialized to {} bytes; round-trips via PatternStore::load", buf.len());
    Ok(())
}
