//! Property suites for the compatibility algebra, the matching rules and the
//! review workflow, each checked against a test-local brute-force oracle.

use std::collections::BTreeSet;

use lemmalink_core::heuristics::{discover, h1_verb_match, h2_noun_match, Heuristic};
use lemmalink_core::mapping::{filter_by_precision, Decision, MappingStore, Provenance, Status};
use lemmalink_core::orthography::{
    analyze, diacritic_compatible, sets_compatible, skeleton_key, AnalyzedWord, WordSet, SHADDA,
};
use lemmalink_core::{LemmaRef, MatchProfile, PosCategory, RelationCode};
use proptest::prelude::*;

const LETTERS: [char; 5] = ['ك', 'ت', 'ب', 'ي', 'م'];
const VOWELS: [char; 7] = [
    '\u{064E}', '\u{064F}', '\u{0650}', '\u{0652}', '\u{064B}', '\u{064C}', '\u{064D}',
];

/// One letter with optional shadda and optional vowel, as raw text.
fn letter_strategy(density: f64) -> impl Strategy<Value = String> {
    (
        prop::sample::select(LETTERS.to_vec()),
        prop::bool::weighted(density / 3.0),
        prop::option::weighted(density, prop::sample::select(VOWELS.to_vec())),
        any::<bool>(),
    )
        .prop_map(|(letter, shadda, vowel, shadda_first)| {
            let mut s = String::from(letter);
            // shadda + sukun is invalid input
            let shadda = shadda && vowel != Some('\u{0652}');
            match (shadda, vowel, shadda_first) {
                (true, Some(v), true) => {
                    s.push(SHADDA);
                    s.push(v);
                }
                (true, Some(v), false) => {
                    s.push(v);
                    s.push(SHADDA);
                }
                (true, None, _) => s.push(SHADDA),
                (false, Some(v), _) => s.push(v),
                (false, None, _) => {}
            }
            s
        })
}

fn word_strategy(density: f64) -> impl Strategy<Value = AnalyzedWord> {
    prop::collection::vec(letter_strategy(density), 1..4)
        .prop_map(|parts| analyze(&parts.concat()).unwrap())
}

fn set_strategy(max: usize) -> impl Strategy<Value = WordSet> {
    prop::collection::vec(word_strategy(0.4), 0..=max).prop_map(|ws| ws.into_iter().collect())
}

// ---- oracles: work on the raw text, not on the analyzed representation ----

/// Splits raw text into (letter, vowel marks, has shadda) per letter.
fn oracle_letters(raw: &str) -> Vec<(char, Vec<char>, bool)> {
    let mut out: Vec<(char, Vec<char>, bool)> = Vec::new();
    for c in raw.chars() {
        if c == '\u{0640}' {
            continue;
        }
        if c == SHADDA {
            out.last_mut().unwrap().2 = true;
        } else if VOWELS.contains(&c) {
            out.last_mut().unwrap().1.push(c);
        } else {
            out.push((c, Vec::new(), false));
        }
    }
    out
}

fn oracle_compatible(a: &str, b: &str) -> bool {
    let (la, lb) = (oracle_letters(a), oracle_letters(b));
    if la.len() != lb.len() {
        return false;
    }
    la.iter()
        .zip(&lb)
        .all(|(x, y)| x.0 == y.0 && (x.1.is_empty() || y.1.is_empty() || x.1 == y.1))
}

fn oracle_sets(a: &WordSet, b: &WordSet) -> bool {
    a.iter()
        .any(|x| b.iter().any(|y| oracle_compatible(x.raw(), y.raw())))
}

fn oracle_rule(required: (&WordSet, &WordSet), optional: [(&WordSet, &WordSet); 3]) -> bool {
    !required.0.is_empty()
        && !required.1.is_empty()
        && oracle_sets(required.0, required.1)
        && optional
            .iter()
            .all(|(x, y)| x.is_empty() || y.is_empty() || oracle_sets(x, y))
}

fn verbal(p: &MatchProfile) -> bool {
    p.category == Some(PosCategory::Verb) || (p.category.is_none() && !p.forms.pv.is_empty())
}

fn nominal(p: &MatchProfile) -> bool {
    p.category == Some(PosCategory::Nominal)
        || (p.category.is_none() && !p.forms.singulars.is_empty())
}

fn oracle_pair(a: &MatchProfile, b: &MatchProfile) -> Option<Heuristic> {
    if verbal(a)
        && verbal(b)
        && oracle_rule(
            (&a.forms.pv, &b.forms.pv),
            [
                (&a.roots, &b.roots),
                (&a.forms.iv, &b.forms.iv),
                (&a.forms.cv, &b.forms.cv),
            ],
        )
    {
        return Some(Heuristic::H1);
    }
    if nominal(a)
        && nominal(b)
        && oracle_rule(
            (&a.forms.singulars, &b.forms.singulars),
            [
                (&a.roots, &b.roots),
                (&a.forms.duals, &b.forms.duals),
                (&a.forms.plurals, &b.forms.plurals),
            ],
        )
    {
        return Some(Heuristic::H2);
    }
    None
}

fn profile_strategy() -> impl Strategy<Value = MatchProfile> {
    (
        prop::option::of(prop::sample::select(vec![
            PosCategory::Nominal,
            PosCategory::Verb,
        ])),
        prop::collection::vec(set_strategy(2), 7),
    )
        .prop_map(|(category, mut sets)| {
            let mut p = MatchProfile {
                category,
                ..Default::default()
            };
            p.roots = sets.pop().unwrap();
            p.forms.cv = sets.pop().unwrap();
            p.forms.iv = sets.pop().unwrap();
            p.forms.pv = sets.pop().unwrap();
            p.forms.plurals = sets.pop().unwrap();
            p.forms.duals = sets.pop().unwrap();
            p.forms.singulars = sets.pop().unwrap();
            p
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn compatibility_matches_oracle(a in word_strategy(0.5), b in word_strategy(0.5)) {
        prop_assert_eq!(diacritic_compatible(&a, &b), oracle_compatible(a.raw(), b.raw()));
    }

    #[test]
    fn compatibility_reflexive_symmetric(a in word_strategy(0.5), b in word_strategy(0.5)) {
        prop_assert!(diacritic_compatible(&a, &a));
        prop_assert_eq!(diacritic_compatible(&a, &b), diacritic_compatible(&b, &a));
    }

    #[test]
    fn compatibility_implies_equal_keys(a in word_strategy(0.3), b in word_strategy(0.3)) {
        if diacritic_compatible(&a, &b) {
            prop_assert_eq!(skeleton_key(&a), skeleton_key(&b));
        }
    }

    #[test]
    fn stripped_forms(a in word_strategy(0.7)) {
        prop_assert!(diacritic_compatible(&a, &a.stripped()));
        let bare = a.stripped();
        let again = analyze(&skeleton_key(&a)).unwrap();
        prop_assert!(diacritic_compatible(&bare, &again));
    }

    #[test]
    fn analyze_round_trip(a in word_strategy(0.6)) {
        let back = analyze(&a.serialize()).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.skeleton().len(), back.clusters().len());
    }

    #[test]
    fn skeleton_key_is_char_filter(a in word_strategy(0.6)) {
        let filtered: String = a.raw().chars().filter(|c| LETTERS.contains(c)).collect();
        prop_assert_eq!(skeleton_key(&a), filtered);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sets_match_brute_force(a in set_strategy(20), b in set_strategy(20)) {
        prop_assert_eq!(sets_compatible(&a, &b), oracle_sets(&a, &b));
        prop_assert_eq!(sets_compatible(&a, &b), sets_compatible(&b, &a));
    }

    #[test]
    fn sets_monotone_under_union(a in set_strategy(6), b in set_strategy(6), extra in set_strategy(6)) {
        if sets_compatible(&a, &b) {
            let mut grown = a.clone();
            grown.extend_from(&extra);
            prop_assert!(sets_compatible(&grown, &b));
        }
    }

    #[test]
    fn heuristics_symmetric(a in profile_strategy(), b in profile_strategy()) {
        if let (Ok(x), Ok(y)) = (h1_verb_match(&a, &b), h1_verb_match(&b, &a)) {
            prop_assert_eq!(x, y);
        }
        if let (Ok(x), Ok(y)) = (h2_noun_match(&a, &b), h2_noun_match(&b, &a)) {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn dropping_non_witness_keeps_match(a in profile_strategy(), b in profile_strategy(), pick in any::<prop::sample::Index>()) {
        // remove a singular from `a` that is not the only compatible witness
        if h2_noun_match(&a, &b) != Ok(true) || a.forms.singulars.len() < 2 {
            return Ok(());
        }
        let victim = pick.get(a.forms.singulars.as_slice()).raw().to_string();
        let mut smaller = a.clone();
        smaller.forms.singulars.remove(&victim);
        let still_witnessed = sets_compatible(&smaller.forms.singulars, &b.forms.singulars);
        if still_witnessed {
            prop_assert_eq!(h2_noun_match(&smaller, &b), Ok(true));
        }
    }

    #[test]
    fn discovery_equals_all_pairs(
        src in prop::collection::vec(profile_strategy(), 0..12),
        tgt in prop::collection::vec(profile_strategy(), 0..12),
    ) {
        let blocked: BTreeSet<(usize, usize, Heuristic)> =
            discover(&src, &tgt).pairs.into_iter().map(|p| (p.source, p.target, p.heuristic)).collect();
        let mut brute = BTreeSet::new();
        for (i, s) in src.iter().enumerate() {
            for (j, t) in tgt.iter().enumerate() {
                if let Some(h) = oracle_pair(s, t) {
                    brute.insert((i, j, h));
                }
            }
        }
        prop_assert_eq!(blocked, brute);
    }
}

#[derive(Debug, Clone)]
enum Op {
    Auto(u8, u8),
    Confirm(usize, usize, bool),
    Reject(usize, bool),
    Manual(u8, u8, usize),
}

fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u8..6, 0u8..6).prop_map(|(a, b)| Op::Auto(a, b)),
        (any::<usize>(), 0usize..11, any::<bool>()).prop_map(|(i, r, f)| Op::Confirm(i, r, f)),
        (any::<usize>(), any::<bool>()).prop_map(|(i, f)| Op::Reject(i, f)),
        (0u8..6, 0u8..6, 0usize..11).prop_map(|(a, b, r)| Op::Manual(a, b, r)),
    ]
}

fn lemma(side: &str, n: u8) -> LemmaRef {
    LemmaRef::external(side, n.to_string())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn workflow_keeps_pair_invariant(ops in prop::collection::vec(op_strategy(), 1..60)) {
        let mut store = MappingStore::default();
        for op in ops {
            let ids: Vec<_> = store.iter().map(|c| c.id).collect();
            match op {
                Op::Auto(a, b) => {
                    let _ = store.add_auto(lemma("s", a), lemma("t", b), Provenance::HeuristicH2);
                }
                Op::Confirm(i, r, force) if !ids.is_empty() => {
                    let id = ids[i % ids.len()];
                    let _ = store.review(id, Decision::Confirm(RelationCode::ALL[r]), "A1", force);
                }
                Op::Reject(i, force) if !ids.is_empty() => {
                    let id = ids[i % ids.len()];
                    let _ = store.review(id, Decision::Reject, "A2", force);
                }
                Op::Manual(a, b, r) => {
                    let _ = store.manual_map(lemma("s", a), lemma("t", b), RelationCode::ALL[r], "A3");
                }
                _ => {}
            }
            prop_assert!(store.invariant_violations().is_empty(), "{:?}", store.invariant_violations());
        }
        let confirmed = store.iter().filter(|c| c.status == Status::Confirmed).count() as u64;
        prop_assert_eq!(store.relation_counts(None).total, confirmed);
    }

    #[test]
    fn precision_filter_monotone(codes in prop::collection::vec(0usize..11, 0..30), t1 in 0u8..=100, t2 in 0u8..=100) {
        let mut store = MappingStore::default();
        for (i, r) in codes.iter().enumerate() {
            store.manual_map(lemma("s", i as u8), lemma("t", 0), RelationCode::ALL[*r], "A").unwrap();
        }
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let loose: BTreeSet<_> = filter_by_precision(store.iter(), lo).into_iter().map(|c| c.id).collect();
        let tight: BTreeSet<_> = filter_by_precision(store.iter(), hi).into_iter().map(|c| c.id).collect();
        prop_assert!(tight.is_subset(&loose));
        prop_assert_eq!(filter_by_precision(store.iter(), 0).len(), store.len());
    }
}
