//! Direct state-space constructors for two case studies: a two-station
//! queue with an unreliable server and a polling system with typed jobs.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use crate::model::{Distribution, MaBuilder, MarkovAutomaton};

/// Probability that a fetched job is really removed from its station.
pub const FETCH_SUCCESS: f64 = 0.9;

/// Local behaviour of one global state: `tau` alternatives, each a list of
/// weighted successors, and Markovian edges.
struct Moves<S> {
    taus: Vec<Vec<(S, f64)>>,
    rates: Vec<(S, f64)>,
}

/// Breadth-first exploration; states are numbered in discovery order.
fn explore<S, F, N, L>(
    initial: S,
    moves: F,
    name: N,
    labels: L,
    declared: &[&str],
) -> MarkovAutomaton
where
    S: Clone + Eq + Hash,
    F: Fn(&S) -> Moves<S>,
    N: Fn(usize, &S) -> String,
    L: Fn(&S) -> Vec<&'static str>,
{
    let mut b = MaBuilder::new();
    for l in declared {
        b.declare_label(l);
    }
    let mut index: HashMap<S, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut visit = |s: S, b: &mut MaBuilder, queue: &mut VecDeque<S>| -> usize {
        if let Some(&i) = index.get(&s) {
            return i;
        }
        let i = b.add_state(name(b.num_states(), &s));
        for l in labels(&s) {
            b.add_label(l, i);
        }
        index.insert(s.clone(), i);
        queue.push_back(s);
        i
    };
    let s0 = visit(initial, &mut b, &mut queue);
    b.set_initial(s0);
    let mut current = 0;
    while let Some(s) = queue.pop_front() {
        let m = moves(&s);
        for alt in m.taus {
            let entries: Vec<(usize, f64)> = alt
                .into_iter()
                .map(|(t, p)| (visit(t, &mut b, &mut queue), p))
                .collect();
            b.add_tau(current, Distribution::new(entries).expect("generator distributions are normalised"));
        }
        for (t, r) in m.rates {
            let target = visit(t, &mut b, &mut queue);
            b.add_rate(current, target, r);
        }
        current += 1;
    }
    b.build_unchecked()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueueParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu: f64,
}

/// The queue: state `(s1, s2, j)` with one slot per station and one in the
/// server. Labels `s1`, `s2`, `busy` mark occupied slots, `full` the state
/// with all three occupied. States are named `s_<s1><s2><j>`.
pub fn gen_queueing(p: QueueParams) -> MarkovAutomaton {
    type St = [u8; 3];
    let moves = |&[s1, s2, j]: &St| {
        let mut taus = Vec::new();
        if j == 0 {
            if s1 == 1 {
                taus.push(vec![([0, s2, 1], FETCH_SUCCESS), ([1, s2, 1], 1.0 - FETCH_SUCCESS)]);
            }
            if s2 == 1 {
                taus.push(vec![([s1, 0, 1], FETCH_SUCCESS), ([s1, 1, 1], 1.0 - FETCH_SUCCESS)]);
            }
        }
        let mut rates = Vec::new();
        if taus.is_empty() {
            if s1 == 0 {
                rates.push(([1, s2, j], p.lambda1));
            }
            if s2 == 0 {
                rates.push(([s1, 1, j], p.lambda2));
            }
            if j == 1 {
                rates.push(([s1, s2, 0], p.mu));
            }
        }
        Moves { taus, rates }
    };
    explore(
        [0, 0, 0],
        moves,
        |_, &[a, b, c]| format!("s_{a}{b}{c}"),
        |&[a, b, c]| {
            let mut l = Vec::new();
            if a == 1 {
                l.push("s1");
            }
            if b == 1 {
                l.push("s2");
            }
            if c == 1 {
                l.push("busy");
            }
            if a + b + c == 3 {
                l.push("full");
            }
            l
        },
        &["s1", "s2", "busy", "full"],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PollingParams {
    /// Queue capacity per station.
    pub q: usize,
    /// Number of job types.
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Server {
    Idle,
    Busy(u8),
    Finished(u8),
}

/// A station: its queue (head first) and whether a job is being delivered,
/// i.e. its type still has to be chosen.
type Station = (Vec<u8>, bool);
type PollState = ([Station; 2], Server);

/// Arrival rate at station `i` (0-based).
fn arrival_rate(i: usize) -> f64 {
    2.0 * (i as f64 + 1.0) + 1.0
}

/// The polling system: two stations with queues of capacity `q` and one
/// server. An arriving job's type `1..=n` is chosen nondeterministically;
/// the idle server polls a nonempty station, fetching its head job (which
/// stays queued by mistake with probability 1/10); type `j` is served at
/// rate `2j`. States are named `s<k>` in breadth-first order; label
/// `bothFull` marks states with both queues full.
pub fn gen_polling(p: PollingParams) -> MarkovAutomaton {
    assert!(p.q >= 1 && p.n >= 1, "polling needs Q >= 1 and N >= 1");
    let q = p.q;
    let n = p.n as u8;
    let moves = |(stations, server): &PollState| {
        let mut taus = Vec::new();
        for i in 0..2 {
            let (queue, arriving) = &stations[i];
            if *arriving {
                for j in 1..=n {
                    let mut next = stations.clone();
                    let mut grown = queue.clone();
                    grown.push(j);
                    next[i] = (grown, false);
                    taus.push(vec![((next, *server), 1.0)]);
                }
            }
        }
        match *server {
            Server::Finished(_) => taus.push(vec![((stations.clone(), Server::Idle), 1.0)]),
            Server::Idle => {
                for i in 0..2 {
                    let (queue, arriving) = &stations[i];
                    if !arriving && !queue.is_empty() {
                        let head = queue[0];
                        let mut fetched = stations.clone();
                        fetched[i] = (queue[1..].to_vec(), false);
                        taus.push(vec![
                            ((fetched, Server::Busy(head)), FETCH_SUCCESS),
                            ((stations.clone(), Server::Busy(head)), 1.0 - FETCH_SUCCESS),
                        ]);
                    }
                }
            }
            Server::Busy(_) => {}
        }
        let mut rates = Vec::new();
        if taus.is_empty() {
            for i in 0..2 {
                let (queue, arriving) = &stations[i];
                if !arriving && queue.len() < q {
                    let mut next = stations.clone();
                    next[i].1 = true;
                    rates.push(((next, *server), arrival_rate(i)));
                }
            }
            if let Server::Busy(j) = *server {
                rates.push(((stations.clone(), Server::Finished(j)), 2.0 * j as f64));
            }
        }
        Moves { taus, rates }
    };
    explore(
        ([(Vec::new(), false), (Vec::new(), false)], Server::Idle),
        moves,
        |k, _| format!("s{k}"),
        |(stations, _)| {
            if stations.iter().all(|(queue, _)| queue.len() == q) {
                vec!["bothFull"]
            } else {
                Vec::new()
            }
        },
        &["bothFull"],
    )
}
