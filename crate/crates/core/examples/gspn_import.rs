//! Imports a confused Petri net and prints the resulting automaton.
//!
//! `cargo run --example gspn_import [net.gspn]`

use markov_automata::gspn::{build_ma, parse_gspn};
use markov_automata::io::write_ma;
use markov_automata::GoalSet;

const FIG1: &str = include_str!("../tests/fixtures/fig1.gspn");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => FIG1.to_string(),
    };
    let net = parse_gspn(&text)?;
    let ma = build_ma(&net, None, 1_000_000)?;
    println!(
        "{} states, {} probabilistic transitions, {} Markovian edges",
        ma.num_states(),
        ma.num_prob_transitions(),
        ma.num_markov_edges()
    );
    for s in 0..ma.num_states() {
        for t in ma.prob_transitions(s) {
            let targets: Vec<String> = t
                .distribution
                .entries()
                .iter()
                .map(|&(u, p)| format!("{}:{p}", ma.state_name(u)))
                .collect();
            println!("  {} --{}--> {}", ma.state_name(s), ma.action_name(t.action), targets.join(" "));
        }
    }
    print!("{}", write_ma(&ma, &GoalSet::new([], "none")));
    Ok(())
}
