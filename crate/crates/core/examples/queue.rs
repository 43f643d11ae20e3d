//! The two-class queue with a nondeterministic server.
//!
//! `cargo run --example queue -- 1 2 3`

use markov_automata::generators::{gen_queueing, QueueParams};
use markov_automata::{expected_time, lra, Direction, ExpectedTimeQuery, GoalSet, LraQuery};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let lambda1 = args.next().transpose()?.unwrap_or(1.0);
    let lambda2 = args.next().transpose()?.unwrap_or(2.0);
    let mu = args.next().transpose()?.unwrap_or(3.0);
    let ma = gen_queueing(QueueParams { lambda1, lambda2, mu });
    let goal = GoalSet::new(ma.label("full").into_iter().flatten().copied(), "full");
    println!("{} states", ma.num_states());
    for dir in [Direction::Min, Direction::Max] {
        let et = expected_time(&ma, &ExpectedTimeQuery::new(goal.clone(), dir))?;
        let avg = lra(&ma, &LraQuery::new(goal.clone(), dir))?;
        println!("{dir}: time to full {:.4}, share of time full {:.4}", et.value, avg.value);
    }
    Ok(())
}
