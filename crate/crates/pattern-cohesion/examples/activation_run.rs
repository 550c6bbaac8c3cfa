//! Runs two competing neuron patterns over three intervals: a strongly
//! excited pair suppresses a weaker one through inhibition, fires at every
//! step, and keeps itself alive by re-exciting its members.

use std::collections::BTreeSet;
use std::error::Error;

use pattern_cohesion::model::NodeId;
use pattern_cohesion::ActivationState;

fn main() -> Result<(), Box<dyn Error>> {
    let strong: BTreeSet<NodeId> = [NodeId(1), NodeId(2)].into();
    let weak: BTreeSet<NodeId> = [NodeId(3), NodeId(4)].into();

    let mut state = ActivationState::new(vec![strong, weak], 0.5, 3, 1.5)?;

    // external drive arrives in the first interval only
    state.set_excitation(NodeId(1), 1, 1.0)?;
    state.set_excitation(NodeId(2), 1, 1.0)?;
    state.set_excitation(NodeId(3), 1, 0.5)?;
    state.set_excitation(NodeId(4), 1, 0.25)?;

    // a steady hum of inhibition from every neuron
    for t in 1..=3 {
        state.set_inhibition(NodeId(1), t, 0.5)?;
        state.set_inhibition(NodeId(2), t, 0.5)?;
        state.set_inhibition(NodeId(3), t, 0.25)?;
        state.set_inhibition(NodeId(4), t, 0.25)?;
    }

    println!(
        "delta={} horizon={} firing threshold={}\n",
        state.delta(),
        state.horizon(),
        state.firing_threshold()
    );

    // a member's input is its pattern's excitation minus the weighted
    // inhibition every *other* pattern emits at the other intervals
    println!("input X by neuron and interval:");
    let trace = state.clone().run()?;
    print!("{:>8}", "neuron");
    for t in 1..=3 {
        print!(" {t:>8}");
    }
    println!();
    for neuron in [1u64, 2, 3, 4] {
        print!("{neuron:>8}");
        for t in 1..=3 {
            print!(" {:>8.2}", trace.value(NodeId(neuron), t).expect("traced"));
        }
        println!();
    }

    for t in 1..=3 {
        let fired = trace.fired_at(t);
        if fired.is_empty() {
            println!("interval {t}: nothing fired");
        } else {
            println!("interval {t}: pattern(s) {fired:?} fired");
        }
    }

    // the same setup as a parsable scenario, as the CLI's `simulate` reads it
    let scenario = "\
horizon 3
delta 0.5
threshold 1.5
pattern 1 2
pattern 3 4
E 1 1 1.0
E 2 1 1.0
E 3 1 0.5
E 4 1 0.25
H 1 1 0.5
H 1 2 0.5
H 1 3 0.5
H 2 1 0.5
H 2 2 0.5
H 2 3 0.5
H 3 1 0.25
H 3 2 0.25
H 3 3 0.25
H 4 1 0.25
H 4 2 0.25
H 4 3 0.25
";
    let parsed = ActivationState::parse_scenario(scenario.as_bytes())?;
    assert_eq!(parsed.run()?, trace);
    println!("\nthe equivalent text scenario parses to the same trace");

    // without inhibition the weak pair still falls short of the threshold
    let mut quiet = state.clone();
    quiet.clear_inhibition();
    let open = quiet.run()?;
    println!(
        "with inhibition cleared, the weak pair's first-interval input rises to {:.2} but never fires",
        open.value(NodeId(3), 1).expect("traced")
    );
    Ok(())
}
