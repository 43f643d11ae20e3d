//! Unbounded reachability and expected time on a hand-written model.
//!
//! `cargo run --example reachability [model.ma]`

use markov_automata::io::parse_ma;
use markov_automata::{expected_time, unbounded_reachability, Direction, ExpectedTimeQuery};

const MODEL: &str = include_str!("../tests/fixtures/appendix_e.ma");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => MODEL.to_string(),
    };
    let (ma, goal) = parse_ma(&text)?;
    for dir in [Direction::Min, Direction::Max] {
        let p = unbounded_reachability(&ma, &goal, dir)?;
        let et = expected_time(&ma, &ExpectedTimeQuery::new(goal.clone(), dir))?;
        println!("{dir}: reach {:.6}, expected time {}", p.value, et.value);
        if let Some(policy) = &et.policy {
            for (s, a) in policy.iter().enumerate() {
                if let Some(a) = a {
                    println!("  {} -> {a}", ma.state_name(s));
                }
            }
        }
    }
    Ok(())
}
