//! Generalized stochastic Petri nets and their Markov automaton semantics.
//!
//! ```text
//! # the confused net
//! place p1 1
//! place p2 1
//! immediate t1 - ; p1 ; p3
//! immediate t2 2 ; p2 ; p5
//! timed l1 1.5 ; p4 ; p6
//! bound 1
//! ```
//!
//! In a vanishing marking (some immediate transition enabled) all enabled
//! weighted immediates together form one `tau` distribution proportional
//! to their weights, and every enabled unweighted immediate forms its own
//! Dirac `tau` alternative. Timed transitions only fire in tangible
//! markings.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Distribution, MaBuilder, MarkovAutomaton};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GspnError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("firing {transition} in marking {marking} puts {tokens} tokens on {place} (bound {bound})")]
    TokenBound {
        marking: String,
        transition: String,
        place: String,
        tokens: u32,
        bound: u32,
    },
    #[error("initial marking exceeds the token bound on {place}")]
    InitialBound { place: String },
    #[error("state limit of {limit} markings exceeded")]
    StateLimit { limit: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Place {
    pub name: String,
    pub tokens: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransitionKind {
    Timed { rate: f64 },
    /// `weight: None` is an unweighted (nondeterministic) transition.
    Immediate { weight: Option<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub name: String,
    pub kind: TransitionKind,
    /// Place index per token consumed; repetition encodes multiplicity.
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GspnNet {
    pub places: Vec<Place>,
    pub transitions: Vec<Transition>,
    pub bound: u32,
}

pub type Marking = Vec<u32>;

fn perr<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, GspnError> {
    Err(GspnError::Parse {
        line,
        column,
        message: message.into(),
    })
}

/// Byte offset of `part` within `line`, as a 1-based column.
fn column_of(line: &str, part: &str) -> usize {
    let offset = part.as_ptr() as usize - line.as_ptr() as usize;
    line[..offset].chars().count() + 1
}

pub fn parse_gspn(text: &str) -> Result<GspnNet, GspnError> {
    let mut places: Vec<Place> = Vec::new();
    let mut place_index: HashMap<String, usize> = HashMap::new();
    let mut transitions = Vec::new();
    let mut names = HashSet::new();
    let mut bound = 1;
    // Arcs are resolved after all places are known.
    let mut pending: Vec<(usize, String, TransitionKind, Vec<(String, usize)>, Vec<(String, usize)>)> =
        Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let line = raw.split('#').next().unwrap_or("");
        let mut segments = line.split(';');
        let head = segments.next().unwrap_or("");
        let words: Vec<&str> = head.split_whitespace().collect();
        let Some(&keyword) = words.first() else {
            if line.trim().is_empty() {
                continue;
            }
            return perr(line_no, 1, "missing keyword");
        };
        let col = |w: &str| column_of(raw, w);
        match keyword {
            "place" => {
                if words.len() != 3 || segments.next().is_some() {
                    return perr(line_no, col(keyword), "expected `place <name> <tokens>`");
                }
                let tokens: u32 = match words[2].parse() {
                    Ok(t) => t,
                    Err(_) => return perr(line_no, col(words[2]), "token count must be a non-negative integer"),
                };
                if !crate::io::is_identifier(words[1]) {
                    return perr(line_no, col(words[1]), format!("invalid place name `{}`", words[1]));
                }
                if place_index.contains_key(words[1]) {
                    return perr(line_no, col(words[1]), format!("duplicate place `{}`", words[1]));
                }
                place_index.insert(words[1].to_string(), places.len());
                places.push(Place {
                    name: words[1].to_string(),
                    tokens,
                });
            }
            "bound" => {
                match words.get(1).and_then(|w| w.parse::<u32>().ok()) {
                    Some(k) if k > 0 && words.len() == 2 => bound = k,
                    _ => return perr(line_no, col(keyword), "expected `bound <k>` with k > 0"),
                }
            }
            "timed" | "immediate" => {
                if words.len() != 3 {
                    return perr(line_no, col(keyword), format!("expected `{keyword} <name> <value> ; <inputs> ; <outputs>`"));
                }
                let name = words[1];
                if !names.insert(name.to_string()) {
                    return perr(line_no, col(name), format!("duplicate transition `{name}`"));
                }
                let value = words[2];
                let kind = if keyword == "timed" {
                    match value.parse::<f64>() {
                        Ok(r) if r > 0.0 && r.is_finite() => TransitionKind::Timed { rate: r },
                        _ => return perr(line_no, col(value), format!("rate `{value}` must be positive")),
                    }
                } else if value == "-" {
                    TransitionKind::Immediate { weight: None }
                } else {
                    match value.parse::<f64>() {
                        Ok(w) if w > 0.0 && w.is_finite() => TransitionKind::Immediate { weight: Some(w) },
                        _ => return perr(line_no, col(value), format!("weight `{value}` must be positive or `-`")),
                    }
                };
                let (Some(ins), Some(outs), None) = (segments.next(), segments.next(), segments.next()) else {
                    return perr(line_no, col(keyword), "expected exactly two `;`-separated place lists");
                };
                let list = |seg: &str| -> Vec<(String, usize)> {
                    seg.split_whitespace().map(|p| (p.to_string(), col(p))).collect()
                };
                pending.push((line_no, name.to_string(), kind, list(ins), list(outs)));
            }
            other => return perr(line_no, col(other), format!("unknown keyword `{other}`")),
        }
    }

    for (line_no, name, kind, ins, outs) in pending {
        let resolve = |arcs: Vec<(String, usize)>| -> Result<Vec<usize>, GspnError> {
            arcs.into_iter()
                .map(|(p, c)| match place_index.get(&p) {
                    Some(&i) => Ok(i),
                    None => perr(line_no, c, format!("undeclared place `{p}`")),
                })
                .collect()
        };
        transitions.push(Transition {
            name,
            kind,
            inputs: resolve(ins)?,
            outputs: resolve(outs)?,
        });
    }
    Ok(GspnNet {
        places,
        transitions,
        bound,
    })
}

impl GspnNet {
    pub fn initial_marking(&self) -> Marking {
        self.places.iter().map(|p| p.tokens).collect()
    }

    pub fn enabled(&self, t: &Transition, m: &Marking) -> bool {
        let mut need = vec![0u32; self.places.len()];
        for &p in &t.inputs {
            need[p] += 1;
        }
        need.iter().zip(m).all(|(n, have)| n <= have)
    }

    fn fire(&self, t: &Transition, m: &Marking, bound: u32) -> Result<Marking, GspnError> {
        let mut next = m.clone();
        for &p in &t.inputs {
            next[p] -= 1;
        }
        for &p in &t.outputs {
            next[p] += 1;
        }
        if let Some(p) = (0..next.len()).find(|&p| next[p] > bound) {
            return Err(GspnError::TokenBound {
                marking: self.marking_label(m),
                transition: t.name.clone(),
                place: self.places[p].name.clone(),
                tokens: next[p],
                bound,
            });
        }
        Ok(next)
    }

    /// Marked places separated by commas, e.g. `p2,p3` (`p1x2` for two
    /// tokens). Empty for the empty marking.
    pub fn marking_label(&self, m: &Marking) -> String {
        let mut out = String::new();
        for (p, &k) in m.iter().enumerate().filter(|(_, k)| **k > 0) {
            if !out.is_empty() {
                out.push(',');
            }
            out.push_str(&self.places[p].name);
            if k > 1 {
                let _ = write!(out, "x{k}");
            }
        }
        out
    }

    fn state_name(&self, m: &Marking) -> String {
        format!("s_{}", self.marking_label(m).replace(',', ""))
    }
}

/// Explores the reachability graph breadth first. `bound` overrides the
/// net's own token bound.
pub fn build_ma(
    net: &GspnNet,
    bound: Option<u32>,
    state_limit: usize,
) -> Result<MarkovAutomaton, GspnError> {
    let bound = bound.unwrap_or(net.bound);
    let initial = net.initial_marking();
    if let Some(p) = (0..initial.len()).find(|&p| initial[p] > bound) {
        return Err(GspnError::InitialBound {
            place: net.places[p].name.clone(),
        });
    }
    let mut b = MaBuilder::new();
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut used_names: HashSet<String> = HashSet::new();
    let mut queue = VecDeque::new();

    let mut visit = |m: Marking, b: &mut MaBuilder, queue: &mut VecDeque<Marking>| -> Result<usize, GspnError> {
        if let Some(&s) = index.get(&m) {
            return Ok(s);
        }
        if index.len() >= state_limit {
            return Err(GspnError::StateLimit { limit: state_limit });
        }
        let mut name = net.state_name(&m);
        if !used_names.insert(name.clone()) {
            let mut k = 2;
            while !used_names.insert(format!("{name}_{k}")) {
                k += 1;
            }
            name = format!("{name}_{k}");
        }
        let s = b.add_state(name);
        let label = net.marking_label(&m);
        if !label.is_empty() {
            b.add_label(&label, s);
        }
        index.insert(m.clone(), s);
        queue.push_back(m);
        Ok(s)
    };

    let s0 = visit(initial, &mut b, &mut queue)?;
    b.set_initial(s0);
    // FIFO order: the k-th dequeued marking is state k.
    let mut s = 0;
    while let Some(m) = queue.pop_front() {
        let enabled: Vec<&Transition> = net.transitions.iter().filter(|t| net.enabled(t, &m)).collect();
        let vanishing = enabled
            .iter()
            .any(|t| matches!(t.kind, TransitionKind::Immediate { .. }));
        if vanishing {
            let weighted: Vec<(&Transition, f64)> = enabled
                .iter()
                .filter_map(|t| match t.kind {
                    TransitionKind::Immediate { weight: Some(w) } => Some((*t, w)),
                    _ => None,
                })
                .collect();
            let total: f64 = weighted.iter().map(|(_, w)| w).sum();
            let mut group_done = false;
            for t in &enabled {
                match t.kind {
                    TransitionKind::Immediate { weight: None } => {
                        let next = net.fire(t, &m, bound)?;
                        let target = visit(next, &mut b, &mut queue)?;
                        b.add_tau(s, Distribution::dirac(target));
                    }
                    TransitionKind::Immediate { weight: Some(_) } if !group_done => {
                        group_done = true;
                        let mut entries = Vec::with_capacity(weighted.len());
                        for (wt, w) in &weighted {
                            let next = net.fire(wt, &m, bound)?;
                            entries.push((visit(next, &mut b, &mut queue)?, w / total));
                        }
                        let dist = Distribution::new(entries).expect("weights normalise to one");
                        b.add_tau(s, dist);
                    }
                    _ => {}
                }
            }
        } else {
            for t in &enabled {
                if let TransitionKind::Timed { rate } = t.kind {
                    let next = net.fire(t, &m, bound)?;
                    let target = visit(next, &mut b, &mut queue)?;
                    b.add_rate(s, target, rate);
                }
            }
        }
        s += 1;
    }
    Ok(b.build_unchecked())
}
