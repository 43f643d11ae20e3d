//! Structural analysis: strongly connected components, maximal end
//! components, Zeno detection and qualitative reachability.
//!
//! Everything here is a pure graph fixpoint; no floating point values are
//! inspected beyond the support of each choice.

use std::collections::{BTreeMap, BTreeSet};

use crate::matrix::{ChoiceMatrix, ChoiceOrigin, MdpView};
use crate::model::{GoalSet, MarkovAutomaton};

/// Tarjan's algorithm on the subgraph induced by `active` states.
///
/// Components are returned in reverse topological order: a component is
/// emitted only after every component reachable from it.
pub fn tarjan(succ: &[Vec<usize>], active: &[bool]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0;
    // (node, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if !active[root] || index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, pos)) = call.last() {
            if pos < succ[v].len() {
                let w = succ[v][pos];
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if !active[w] {
                    continue;
                }
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }
    components
}

/// SCCs of the full transition graph of `ma` (all actions and rates),
/// in reverse topological order.
pub fn scc_decompose(ma: &MarkovAutomaton) -> Vec<Vec<usize>> {
    let succ: Vec<Vec<usize>> = (0..ma.num_states())
        .map(|s| {
            let mut v: Vec<usize> = ma.successors(s).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    tarjan(&succ, &vec![true; ma.num_states()])
}

/// An end component of a choice matrix: states plus the retained choices
/// (global choice indices) of each state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndComponent {
    pub states: Vec<usize>,
    pub choices: BTreeMap<usize, Vec<usize>>,
}

/// Maximal end components of `m` restricted to `candidate` states, by
/// iterated SCC refinement.
pub fn maximal_end_components(m: &ChoiceMatrix, candidate: &[bool]) -> Vec<EndComponent> {
    let n = m.num_states();
    let mut in_set: Vec<bool> = candidate.to_vec();
    let mut allowed = vec![false; m.num_choices()];
    for s in (0..n).filter(|&s| in_set[s]) {
        for c in m.choices(s) {
            allowed[c] = m.targets(c).iter().all(|&t| candidate[t]);
        }
    }

    let mut comp = vec![usize::MAX; n];
    loop {
        for s in 0..n {
            if in_set[s] && !m.choices(s).any(|c| allowed[c]) {
                in_set[s] = false;
            }
        }
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                if !in_set[s] {
                    return Vec::new();
                }
                let mut v: Vec<usize> = m
                    .choices(s)
                    .filter(|&c| allowed[c])
                    .flat_map(|c| m.targets(c).iter().copied())
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let sccs = tarjan(&succ, &in_set);
        comp.iter_mut().for_each(|c| *c = usize::MAX);
        for (i, scc) in sccs.iter().enumerate() {
            for &s in scc {
                comp[s] = i;
            }
        }

        let mut changed = false;
        for s in 0..n {
            if !in_set[s] {
                continue;
            }
            for c in m.choices(s) {
                if allowed[c]
                    && m
                        .targets(c)
                        .iter()
                        .any(|&t| !in_set[t] || comp[t] != comp[s])
                {
                    allowed[c] = false;
                    changed = true;
                }
            }
            if !m.choices(s).any(|c| allowed[c]) {
                in_set[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut result: Vec<EndComponent> = sccs
                .into_iter()
                .map(|states| {
                    let choices = states
                        .iter()
                        .map(|&s| (s, m.choices(s).filter(|&c| allowed[c]).collect()))
                        .collect();
                    EndComponent { states, choices }
                })
                .collect();
            result.sort_by_key(|ec| ec.states[0]);
            return result;
        }
    }
}

/// A maximal end component of a Markov automaton. Markovian states retain
/// their whole rate bundle as a single choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxEndComponent {
    pub states: Vec<usize>,
    pub actions: BTreeMap<usize, Vec<ChoiceOrigin>>,
}

impl MaxEndComponent {
    pub fn contains(&self, s: usize) -> bool {
        self.states.binary_search(&s).is_ok()
    }
}

/// Maximal end component decomposition of a closed model.
pub fn mec_decompose(ma: &MarkovAutomaton) -> Vec<MaxEndComponent> {
    let view = MdpView::new(ma);
    mec_decompose_view(&view)
}

pub(crate) fn mec_decompose_view(view: &MdpView) -> Vec<MaxEndComponent> {
    let n = view.matrix.num_states();
    maximal_end_components(&view.matrix, &vec![true; n])
        .into_iter()
        .map(|ec| MaxEndComponent {
            actions: ec
                .choices
                .into_iter()
                .map(|(s, cs)| (s, cs.into_iter().map(|c| view.origin[c]).collect()))
                .collect(),
            states: ec.states,
        })
        .collect()
}

/// States in end components made solely of probabilistic states that are
/// reachable from the initial state. An empty result certifies non-Zenoness.
pub fn zeno_check(ma: &MarkovAutomaton) -> BTreeSet<usize> {
    let hidden = ma.hide_all_actions();
    let n = hidden.num_states();
    let mut b = ChoiceMatrix::builder();
    for s in 0..n {
        for t in hidden.prob_transitions(s) {
            b.push_choice(t.distribution.entries().iter().copied());
        }
        b.finish_state();
    }
    let matrix = b.build();
    let probabilistic: Vec<bool> = (0..n).map(|s| hidden.is_probabilistic(s)).collect();
    let reachable = hidden.reachable();
    maximal_end_components(&matrix, &probabilistic)
        .into_iter()
        .flat_map(|ec| ec.states)
        .filter(|&s| reachable[s])
        .collect()
}

/// Choices grouped by target, for backward searches.
fn predecessor_choices(m: &ChoiceMatrix) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); m.num_states()];
    for c in 0..m.num_choices() {
        for &t in m.targets(c) {
            if pred[t].last() != Some(&c) {
                pred[t].push(c);
            }
        }
    }
    pred
}

fn state_of_choices(m: &ChoiceMatrix) -> Vec<usize> {
    let mut owner = vec![0; m.num_choices()];
    for s in 0..m.num_states() {
        for c in m.choices(s) {
            owner[c] = s;
        }
    }
    owner
}

/// States from which some policy reaches `goal` with probability one.
pub fn prob1_exists(m: &ChoiceMatrix, goal: &[bool]) -> Vec<bool> {
    let n = m.num_states();
    let pred = predecessor_choices(m);
    let owner = state_of_choices(m);
    let mut region = vec![true; n];
    loop {
        let usable: Vec<bool> = (0..m.num_choices())
            .map(|c| region[owner[c]] && m.targets(c).iter().all(|&t| region[t]))
            .collect();
        let mut reach = vec![false; n];
        let mut queue: Vec<usize> = (0..n).filter(|&s| goal[s]).collect();
        for &s in &queue {
            reach[s] = true;
        }
        while let Some(t) = queue.pop() {
            for &c in &pred[t] {
                let s = owner[c];
                if !reach[s] && usable[c] {
                    reach[s] = true;
                    queue.push(s);
                }
            }
        }
        if reach == region {
            return region;
        }
        region = reach;
    }
}

/// States from which some policy avoids `goal` forever. States without any
/// choice count as absorbing.
pub fn prob0_exists(m: &ChoiceMatrix, goal: &[bool]) -> Vec<bool> {
    let n = m.num_states();
    let mut avoid: Vec<bool> = goal.iter().map(|g| !g).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if avoid[s]
                && !m.choices(s).is_empty()
                && !m
                    .choices(s)
                    .any(|c| m.targets(c).iter().all(|&t| avoid[t]))
            {
                avoid[s] = false;
                changed = true;
            }
        }
        if !changed {
            return avoid;
        }
    }
}

/// States from which every policy reaches `goal` with probability one.
pub fn prob1_forall(m: &ChoiceMatrix, goal: &[bool]) -> Vec<bool> {
    let n = m.num_states();
    let pred = predecessor_choices(m);
    let owner = state_of_choices(m);
    // States that can, with positive probability, get into a goal-avoiding
    // end component are exactly those with min probability below one.
    let mut bad = prob0_exists(m, goal);
    let mut queue: Vec<usize> = (0..n).filter(|&s| bad[s]).collect();
    while let Some(t) = queue.pop() {
        for &c in &pred[t] {
            let s = owner[c];
            if !bad[s] && !goal[s] {
                bad[s] = true;
                queue.push(s);
            }
        }
    }
    bad.iter().map(|b| !b).collect()
}

/// States that can reach `goal` at all (under some policy, with positive
/// probability).
pub fn can_reach(m: &ChoiceMatrix, goal: &[bool]) -> Vec<bool> {
    let pred = predecessor_choices(m);
    let owner = state_of_choices(m);
    let mut reach = goal.to_vec();
    let mut queue: Vec<usize> = (0..m.num_states()).filter(|&s| goal[s]).collect();
    while let Some(t) = queue.pop() {
        for &c in &pred[t] {
            let s = owner[c];
            if !reach[s] {
                reach[s] = true;
                queue.push(s);
            }
        }
    }
    reach
}

/// States of a closed model with max-policy probability one of reaching `goal`.
pub fn almost_sure_reach_exists(ma: &MarkovAutomaton, goal: &GoalSet) -> BTreeSet<usize> {
    let view = MdpView::new(ma);
    let mask = goal.mask(ma.num_states());
    collect(&prob1_exists(&view.matrix, &mask))
}

/// States of a closed model with min-policy probability one of reaching `goal`.
pub fn almost_sure_reach_forall(ma: &MarkovAutomaton, goal: &GoalSet) -> BTreeSet<usize> {
    let view = MdpView::new(ma);
    let mask = goal.mask(ma.num_states());
    collect(&prob1_forall(&view.matrix, &mask))
}

fn collect(mask: &[bool]) -> BTreeSet<usize> {
    mask.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(s, _)| s)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Distribution, MaBuilder};

    fn graph(edges: &[(usize, usize)], n: usize) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in edges {
            succ[a].push(b);
        }
        succ
    }

    #[test]
    fn cycle_is_one_component() {
        let succ = graph(&[(0, 1), (1, 2), (2, 0)], 3);
        assert_eq!(tarjan(&succ, &[true; 3]), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn dag_yields_singletons_sinks_first() {
        let succ = graph(&[(0, 1), (1, 2), (0, 2)], 3);
        assert_eq!(tarjan(&succ, &[true; 3]), vec![vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn self_loop_is_singleton_mec() {
        let mut b = MaBuilder::with_states(2);
        b.add_rate(0, 1, 1.0).add_rate(1, 1, 1.0);
        let mecs = mec_decompose(&b.build().unwrap());
        assert_eq!(mecs.len(), 1);
        assert_eq!(mecs[0].states, vec![1]);
        assert_eq!(mecs[0].actions[&1], vec![ChoiceOrigin::Markovian]);
    }

    #[test]
    fn leaking_action_is_dropped_from_mec() {
        // 0 <-> 1 via tau; 0 also has an action to absorbing 2.
        let mut b = MaBuilder::with_states(3);
        b.add_tau(0, Distribution::dirac(1));
        b.add_tau(0, Distribution::new([(2, 0.5), (1, 0.5)]).unwrap());
        b.add_rate(1, 0, 1.0);
        b.add_rate(2, 2, 1.0);
        let mecs = mec_decompose(&b.build().unwrap());
        assert_eq!(mecs.len(), 2);
        assert_eq!(mecs[0].states, vec![0, 1]);
        assert_eq!(mecs[0].actions[&0], vec![ChoiceOrigin::Transition(0)]);
        assert_eq!(mecs[1].states, vec![2]);
    }

    #[test]
    fn zeno_pair_is_flagged() {
        let mut b = MaBuilder::with_states(2);
        b.add_tau(0, Distribution::dirac(1)).add_tau(1, Distribution::dirac(0));
        let z = zeno_check(&b.build().unwrap());
        assert_eq!(z.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn ctmc_is_not_zeno() {
        let mut b = MaBuilder::with_states(2);
        b.add_rate(0, 1, 1.0).add_rate(1, 0, 2.0);
        assert!(zeno_check(&b.build().unwrap()).is_empty());
    }

    #[test]
    fn unreachable_probabilistic_cycle_is_ignored() {
        let mut b = MaBuilder::with_states(3);
        b.add_rate(0, 0, 1.0);
        b.add_tau(1, Distribution::dirac(2)).add_tau(2, Distribution::dirac(1));
        assert!(zeno_check(&b.build().unwrap()).is_empty());
    }

    #[test]
    fn qualitative_reachability() {
        // 0: a -> 1 (goal), b -> 2 (trap). 3 -> 0 by rate.
        let mut b = MaBuilder::with_states(4);
        b.add_tau(0, Distribution::dirac(1)).add_tau(0, Distribution::dirac(2));
        b.add_rate(1, 1, 1.0).add_rate(2, 2, 1.0).add_rate(3, 0, 1.0);
        let ma = b.build().unwrap();
        let g = GoalSet::new([1], "g");
        let exists = almost_sure_reach_exists(&ma, &g);
        let forall = almost_sure_reach_forall(&ma, &g);
        assert_eq!(exists.into_iter().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(forall.into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn unreachable_goal_gives_empty_sets() {
        let mut b = MaBuilder::with_states(2);
        b.add_rate(0, 0, 1.0).add_rate(1, 1, 1.0);
        let ma = b.build().unwrap();
        let g = GoalSet::new([1], "g");
        assert_eq!(almost_sure_reach_exists(&ma, &g).len(), 1);
        assert!(!almost_sure_reach_exists(&ma, &g).contains(&0));
    }
}
