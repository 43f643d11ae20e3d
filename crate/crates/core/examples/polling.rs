//! Expected time and long-run average for the polling system.
//!
//! `cargo run --release --example polling -- 2 3`

use std::time::Instant;

use markov_automata::generators::{gen_polling, PollingParams};
use markov_automata::{expected_time, lra, Direction, ExpectedTimeQuery, GoalSet, LraQuery};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let q = args.next().transpose()?.unwrap_or(2);
    let n = args.next().transpose()?.unwrap_or(3);
    let ma = gen_polling(PollingParams { q, n });
    let goal = GoalSet::new(ma.label("bothFull").into_iter().flatten().copied(), "bothFull");
    println!("Q={q} N={n}: {} states, {} goal states", ma.num_states(), goal.len());
    for dir in [Direction::Min, Direction::Max] {
        let t = Instant::now();
        let r = expected_time(&ma, &ExpectedTimeQuery::new(goal.clone(), dir))?;
        println!("eT-{dir}  = {:.4}  ({:.2}s)", r.value, t.elapsed().as_secs_f64());
        let t = Instant::now();
        let r = lra(&ma, &LraQuery::new(goal.clone(), dir))?;
        println!("lra-{dir} = {:.4}  ({:.2}s)", r.value, t.elapsed().as_secs_f64());
    }
    Ok(())
}
