//! Time-bounded reachability on a single exponential delay, compared with
//! the closed form.
//!
//! `cargo run --example exponential_bracket -- 1e-4`

use markov_automata::{timed_reachability, Direction, GoalSet, Interval, MaBuilder, TimedQuery};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epsilon = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1e-3);
    let mut b = MaBuilder::new();
    let s0 = b.add_state("s0");
    let s1 = b.add_state("s1");
    b.set_initial(s0).add_rate(s0, s1, 1.0).add_rate(s1, s1, 1.0);
    let ma = b.build()?;
    for bound in ["0.5", "1", "2"] {
        let q = TimedQuery {
            goal: GoalSet::new([s1], "s1"),
            direction: Direction::Max,
            interval: Interval::parse("0", bound)?,
            epsilon,
        };
        let r = timed_reachability(&ma, &q)?;
        let exact = 1.0 - (-bound.parse::<f64>()?).exp();
        let err = r.error_bound.unwrap_or(0.0);
        println!("t <= {bound}: [{:.7}, {:.7}]  exact {exact:.7}", r.value, r.value + err);
    }
    Ok(())
}
