//! Maximal end components and the quotient built for long-run averages.
//!
//! `cargo run --example end_components`

use markov_automata::graph::mec_decompose;
use markov_automata::io::parse_ma;
use markov_automata::objectives::{lra_quotient, prepare};

const MODEL: &str = include_str!("../tests/fixtures/appendix_e.ma");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (ma, _) = parse_ma(MODEL)?;
    let prepared = prepare(&ma).ma;
    let mecs = mec_decompose(&prepared);
    for (i, mec) in mecs.iter().enumerate() {
        let names: Vec<&str> = mec.states.iter().map(|&s| ma.state_name(s)).collect();
        println!("S{}: {{{}}}", i + 1, names.join(", "));
    }
    // Any per-component values will do to show the structure.
    let values: Vec<f64> = (0..mecs.len()).map(|i| i as f64).collect();
    let q = lra_quotient(&ma, &mecs, &values);
    println!("quotient states: {}", q.names.join(" "));
    Ok(())
}
