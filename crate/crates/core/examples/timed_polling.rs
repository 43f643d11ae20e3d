//! Interval-bounded reachability on the polling system.
//!
//! `cargo run --release --example timed_polling -- 0 1 1e-3`

use std::time::Instant;

use markov_automata::generators::{gen_polling, PollingParams};
use markov_automata::{timed_reachability, Direction, GoalSet, Interval, TimedQuery};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let a = args.first().map(String::as_str).unwrap_or("0");
    let b = args.get(1).map(String::as_str).unwrap_or("1");
    let epsilon: f64 = args.get(2).map(|e| e.parse()).transpose()?.unwrap_or(1e-3);
    let ma = gen_polling(PollingParams { q: 2, n: 3 });
    let goal = GoalSet::new(ma.label("bothFull").into_iter().flatten().copied(), "bothFull");
    for direction in [Direction::Min, Direction::Max] {
        let t = Instant::now();
        let query = TimedQuery {
            goal: goal.clone(),
            direction,
            interval: Interval::parse(a, b)?,
            epsilon,
        };
        let r = timed_reachability(&ma, &query)?;
        println!(
            "p{direction}(<>[{a},{b}] bothFull) = {:.4} (bound {:.1e}, {:.1}s)",
            r.value,
            r.error_bound.unwrap_or(0.0),
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
