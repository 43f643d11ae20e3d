mod common;

use markov_automata::gspn::{build_ma, parse_gspn, GspnError, TransitionKind};
use markov_automata::StateClass;

use common::read_fixture;

#[test]
fn confused_net_semantics() {
    let net = parse_gspn(&read_fixture("fig1.gspn")).unwrap();
    assert_eq!(net.places.len(), 7);
    assert_eq!(net.transitions[0].kind, TransitionKind::Immediate { weight: None });
    let ma = build_ma(&net, None, 100).unwrap();
    let names: Vec<&str> = ma.state_names().iter().map(String::as_str).collect();
    assert_eq!(names, ["s_p1p2", "s_p2p3", "s_p1p5", "s_p3p5", "s_p4", "s_p3p7", "s_p6"]);
    // Confusion: two Dirac alternatives in the initial marking.
    let init = ma.prob_transitions(0);
    assert_eq!(init.len(), 2);
    assert!(init.iter().all(|t| t.distribution.len() == 1));
    assert_eq!(ma.state_class(4), StateClass::Markovian);
    assert_eq!(ma.state_class(6), StateClass::Deadlock);
    assert_eq!(ma.label("p2,p3").unwrap().iter().copied().collect::<Vec<_>>(), [1]);
}

#[test]
fn token_bound_is_enforced() {
    let text = "place p 1\nplace q 1\ntimed t 1 ; p ; q\ntimed back 1 ; q ; p\n";
    let net = parse_gspn(text).unwrap();
    match build_ma(&net, None, 100) {
        Err(GspnError::TokenBound { place, tokens, bound, .. }) => {
            assert_eq!((place.as_str(), tokens, bound), ("q", 2, 1));
        }
        other => panic!("{other:?}"),
    }
    let ma = build_ma(&net, Some(2), 100).unwrap();
    assert_eq!(ma.num_states(), 3);
    assert!(ma.state_index("s_qx2").is_some());
}

#[test]
fn unweighted_and_weighted_mix() {
    let text = "\
place a 1
immediate x - ; a ; b
immediate y - ; a ; c
immediate w1 1 ; a ; d
immediate w2 3 ; a ; e
place b 0
place c 0
place d 0
place e 0
";
    let net = parse_gspn(text).unwrap();
    let ma = build_ma(&net, None, 100).unwrap();
    let alts = ma.prob_transitions(0);
    assert_eq!(alts.len(), 3);
    let weighted = &alts[2].distribution;
    let d = ma.state_index("s_d").unwrap();
    let e = ma.state_index("s_e").unwrap();
    assert_eq!(weighted.prob(d), 0.25);
    assert_eq!(weighted.prob(e), 0.75);
}

#[test]
fn timed_transitions_wait_in_vanishing_markings() {
    let text = "place a 1\nplace b 0\nimmediate go - ; a ; b\ntimed slow 5 ; a ; b\n";
    let ma = build_ma(&parse_gspn(text).unwrap(), None, 10).unwrap();
    assert!(ma.markov_edges(0).is_empty());
    assert_eq!(ma.prob_transitions(0).len(), 1);
}

#[test]
fn parse_errors_are_positioned() {
    let cases = [
        ("place p 1\ntimed t 0 ; p ; p\n", 2, 9),
        ("place p 1\nimmediate t 1 ; p ; nowhere\n", 2, 21),
        ("place 9p 1\n", 1, 7),
        ("arc p q\n", 1, 1),
    ];
    for (text, line, column) in cases {
        match parse_gspn(text) {
            Err(GspnError::Parse { line: l, column: c, .. }) => {
                assert_eq!((l, c), (line, column), "{text:?}");
            }
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn state_limit() {
    let net = parse_gspn(&read_fixture("fig1.gspn")).unwrap();
    assert!(matches!(build_ma(&net, None, 5), Err(GspnError::StateLimit { limit: 5 })));
}
