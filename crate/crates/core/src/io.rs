//! The explicit-state `.ma` text format.
//!
//! ```text
//! ; comment
//! #INITIAL
//! s0
//! #GOALS
//! s2
//! #LABELS
//! busy s1 s2
//! #TRANSITIONS
//! s0 !
//! * s1 2.5
//! s1 tau
//! * s2 0.5
//! * s0 0.5
//! ```
//!
//! A block with action `!` lists Markovian rates, any other action a
//! probability distribution. `#GOALS` and `#LABELS` are optional; goal
//! states become the label `goal`. States are numbered in the order in
//! which they first open a block, then by first mention anywhere, so a
//! written document re-reads with identical indices. A state without any
//! transition is written as an empty `!` block.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;


use crate::model::{Distribution, GoalSet, MaBuilder, MarkovAutomaton, ModelError};
use crate::{Error, Result};

/// Label under which `#GOALS` states are stored.
pub const GOAL_LABEL: &str = "goal";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        column,
        message: message.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    None,
    Initial,
    Goals,
    Labels,
    Transitions,
}

/// A whitespace-separated word with its 1-based position.
#[derive(Clone, Copy, Debug)]
struct Word<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn words(line_no: usize, line: &str) -> Vec<Word<'_>> {
    let line = line.split(';').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Word {
                    text: &line[s..i],
                    line: line_no,
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

/// `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn identifier<'a>(w: &Word<'a>, what: &str) -> Result<&'a str, ParseError> {
    if is_identifier(w.text) {
        Ok(w.text)
    } else {
        err(w.line, w.column, format!("invalid {what} `{}`", w.text))
    }
}

fn number(w: &Word<'_>) -> Result<f64, ParseError> {
    let ok = w
        .text
        .bytes()
        .all(|c| c.is_ascii_digit() || matches!(c, b'.' | b'e' | b'E' | b'+' | b'-'));
    match w.text.parse::<f64>() {
        Ok(x) if ok && x.is_finite() => Ok(x),
        _ => err(w.line, w.column, format!("invalid number `{}`", w.text)),
    }
}

struct Block<'a> {
    source: Word<'a>,
    action: Word<'a>,
    branches: Vec<(Word<'a>, Word<'a>)>,
}

/// Parses a document into a model plus its `#GOALS` set.
pub fn parse_ma(text: &str) -> Result<(MarkovAutomaton, GoalSet)> {
    Ok(parse_document(text)?)
}

fn parse_document(text: &str) -> Result<(MarkovAutomaton, GoalSet), ParseError> {
    let mut section = Section::None;
    let mut initial: Option<Word> = None;
    let mut goals: Vec<Word> = Vec::new();
    let mut labels: Vec<(Word, Vec<Word>)> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut seen_transitions = false;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let ws = words(line_no, raw.strip_suffix('\r').unwrap_or(raw));
        let Some(first) = ws.first() else { continue };
        if let Some(name) = first.text.strip_prefix('#') {
            if ws.len() > 1 {
                return err(line_no, ws[1].column, "unexpected text after section header");
            }
            let next = match name {
                "INITIAL" => Section::Initial,
                "GOALS" => Section::Goals,
                "LABELS" => Section::Labels,
                "TRANSITIONS" => Section::Transitions,
                _ => return err(line_no, first.column, format!("unknown section `{}`", first.text)),
            };
            if next == Section::Initial && section != Section::None {
                return err(line_no, first.column, "duplicate #INITIAL section");
            }
            if next <= section {
                return err(line_no, first.column, format!("section {} out of order", first.text));
            }
            if section == Section::None && next != Section::Initial {
                return err(line_no, first.column, "document must start with #INITIAL");
            }
            if next > Section::Initial && initial.is_none() {
                return err(line_no, first.column, "#INITIAL names no state");
            }
            seen_transitions |= next == Section::Transitions;
            section = next;
            continue;
        }
        match section {
            Section::None => return err(line_no, first.column, "expected #INITIAL"),
            Section::Initial => {
                if initial.is_some() || ws.len() > 1 {
                    let w = if initial.is_some() { first } else { &ws[1] };
                    return err(line_no, w.column, "duplicate initial state");
                }
                identifier(first, "state name")?;
                initial = Some(*first);
            }
            Section::Goals => {
                for w in &ws {
                    identifier(w, "state name")?;
                    goals.push(*w);
                }
            }
            Section::Labels => {
                // Labels may also hold commas, e.g. GSPN markings `p2,p3`.
                if first.text.contains('|') {
                    return err(line_no, first.column, format!("invalid label `{}`", first.text));
                }
                for w in &ws[1..] {
                    identifier(w, "state name")?;
                }
                labels.push((*first, ws[1..].to_vec()));
            }
            Section::Transitions => {
                if first.text == "*" {
                    let Some(block) = blocks.last_mut() else {
                        return err(line_no, first.column, "branch outside of a block");
                    };
                    if ws.len() != 3 {
                        return err(line_no, first.column, "expected `* <state> <value>`");
                    }
                    identifier(&ws[1], "state name")?;
                    block.branches.push((ws[1], ws[2]));
                } else {
                    if ws.len() != 2 {
                        return err(line_no, first.column, "expected `<state> <action>`");
                    }
                    identifier(first, "state name")?;
                    if ws[1].text != "!" {
                        identifier(&ws[1], "action")?;
                    }
                    blocks.push(Block {
                        source: *first,
                        action: ws[1],
                        branches: Vec::new(),
                    });
                }
            }
        }
    }
    if !seen_transitions {
        return err(last_line.max(1), 1, "missing #TRANSITIONS section");
    }
    let initial = initial.expect("checked when leaving #INITIAL");

    // Number states: block sources first, then everything else.
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut b = MaBuilder::new();
    let mut intern = |name: &str, b: &mut MaBuilder| -> usize {
        if let Some(&i) = index.get(name) {
            return i;
        }
        let i = b.add_state(name);
        index.insert(name.to_string(), i);
        i
    };
    for block in &blocks {
        intern(block.source.text, &mut b);
    }
    intern(initial.text, &mut b);
    for w in &goals {
        intern(w.text, &mut b);
    }
    for (_, states) in &labels {
        for w in states {
            intern(w.text, &mut b);
        }
    }
    for block in &blocks {
        for (t, _) in &block.branches {
            intern(t.text, &mut b);
        }
    }
    let idx = |w: &Word| index[w.text];

    let s0 = idx(&initial);
    b.set_initial(s0);
    let goal: BTreeSet<usize> = goals.iter().map(idx).collect();
    if !goals.is_empty() {
        b.declare_label(GOAL_LABEL);
    }
    for &g in &goal {
        b.add_label(GOAL_LABEL, g);
    }
    for (label, states) in &labels {
        if label.text == GOAL_LABEL {
            return err(label.line, label.column, "label `goal` is reserved for #GOALS");
        }
        b.declare_label(label.text);
        for w in states {
            b.add_label(label.text, idx(w));
        }
    }

    for block in &blocks {
        let s = idx(&block.source);
        if block.action.text == "!" {
            for (t, v) in &block.branches {
                let rate = number(v)?;
                if rate <= 0.0 {
                    return err(v.line, v.column, format!("rate {} is not positive", v.text));
                }
                b.add_rate(s, idx(t), rate);
            }
        } else {
            let mut entries = Vec::with_capacity(block.branches.len());
            let mut targets = BTreeSet::new();
            for (t, v) in &block.branches {
                let p = number(v)?;
                if !(0.0..=1.0).contains(&p) {
                    return err(v.line, v.column, format!("probability {} outside [0, 1]", v.text));
                }
                if !targets.insert(idx(t)) {
                    return err(t.line, t.column, format!("duplicate target `{}`", t.text));
                }
                entries.push((idx(t), p));
            }
            let dist = Distribution::new(entries).map_err(|e| {
                let at = &block.action;
                let message = match e {
                    ModelError::Unnormalized { sum } => format!("distribution sums to {sum}"),
                    other => other.to_string(),
                };
                ParseError {
                    line: at.line,
                    column: at.column,
                    message,
                }
            })?;
            let action = b.action(block.action.text);
            b.add_prob(s, action, dist);
        }
    }
    let ma = b.build_unchecked();
    Ok((ma, GoalSet::new(goal, GOAL_LABEL)))
}

fn write_number(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

/// Canonical serialisation: states in index order, branches sorted by
/// target, 17 significant digits. All labels except `goal` go to
/// `#LABELS`; `goal` is written as `#GOALS`.
pub fn write_ma(ma: &MarkovAutomaton, goal: &GoalSet) -> String {
    let name = |s: usize| ma.state_name(s);
    let mut out = String::new();
    out.push_str("#INITIAL\n");
    let _ = writeln!(out, "{}", name(ma.initial()));
    if !goal.is_empty() {
        out.push_str("#GOALS\n");
        for &g in &goal.states {
            let _ = writeln!(out, "{}", name(g));
        }
    }
    let labels: Vec<_> = ma.labels().iter().filter(|(l, _)| *l != GOAL_LABEL).collect();
    if !labels.is_empty() {
        out.push_str("#LABELS\n");
        for (label, states) in labels {
            out.push_str(label);
            for &s in states {
                out.push(' ');
                out.push_str(name(s));
            }
            out.push('\n');
        }
    }
    out.push_str("#TRANSITIONS\n");
    for s in 0..ma.num_states() {
        let prob = ma.prob_transitions(s);
        let markov = ma.markov_edges(s);
        for t in prob {
            let _ = writeln!(out, "{} {}", name(s), ma.action_name(t.action));
            for &(target, p) in t.distribution.entries() {
                let _ = write!(out, "* {} ", name(target));
                write_number(&mut out, p);
                out.push('\n');
            }
        }
        if !markov.is_empty() || prob.is_empty() {
            let _ = writeln!(out, "{} !", name(s));
            for e in markov {
                let _ = write!(out, "* {} ", name(e.target));
                write_number(&mut out, e.rate);
                out.push('\n');
            }
        }
    }
    out
}

/// Union of the labels in `expr` (`l1|l2|...`).
pub fn resolve_goal(ma: &MarkovAutomaton, expr: &str) -> Result<GoalSet> {
    let mut states = BTreeSet::new();
    for part in expr.split('|').map(str::trim) {
        match ma.label(part) {
            Some(set) => states.extend(set.iter().copied()),
            None => return Err(Error::UnknownLabel(part.to_string())),
        }
    }
    Ok(GoalSet::new(states, expr))
}
