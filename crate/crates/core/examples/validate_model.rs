//! Parses a `.ma` file and lists every diagnostic.
//!
//! `cargo run --example validate_model -- model.ma`

use markov_automata::io::parse_ma;
use markov_automata::model::{is_clean, validate};

const ZENO: &str = include_str!("../tests/fixtures/zeno.ma");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => ZENO.to_string(),
    };
    let (ma, goal) = parse_ma(&text)?;
    println!("{} states, {} goal states", ma.num_states(), goal.len());
    let diagnostics = validate(&ma);
    for d in &diagnostics {
        println!("  {d}");
    }
    println!("clean: {}", is_clean(&diagnostics));

    // A broken distribution is reported with its line.
    if let Err(e) = parse_ma(include_str!("../tests/fixtures/bad.ma")) {
        println!("bad.ma: {e}");
    }
    Ok(())
}
