mod common;

use std::collections::BTreeMap;

use common::{fragment_sentence, sentence, Builder};
use contra_forge::logic::{constants_of, rename_all, Constant, Formula};
use contra_forge::semantics::{brute_force_consistent, consistent, SemanticsError, UniverseBounds};
use proptest::prelude::*;

fn oracle(fs: &[Formula]) -> Option<bool> {
    match brute_force_consistent(fs, UniverseBounds::default()) {
        Ok(b) => Some(b),
        Err(SemanticsError::GuardExceeded { .. }) => None,
        Err(e) => panic!("oracle failed: {e}"),
    }
}

fn renaming(fs: &[Formula], offset: usize) -> BTreeMap<Constant, Constant> {
    let (people, places) = constants_of(fs);
    let mut map = BTreeMap::new();
    // reverse the order so the map is not monotone in the ids
    for (k, c) in people.iter().rev().enumerate() {
        map.insert(c.clone(), Constant::person(offset + k));
    }
    for (k, c) in places.iter().rev().enumerate() {
        map.insert(c.clone(), Constant::place(offset + k));
    }
    map
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3_000))]

    #[test]
    fn decision_procedure_matches_enumeration(fs in prop::collection::vec(fragment_sentence(3, 3, 2), 1..6)) {
        if let (Ok(fast), Some(slow)) = (consistent(&fs), oracle(&fs)) {
            prop_assert_eq!(fast, slow, "{:?}", fs.iter().map(|f| f.to_string()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn verdicts_survive_renaming(fs in prop::collection::vec(fragment_sentence(4, 4, 3), 1..6), offset in 5usize..50) {
        let renamed = rename_all(&fs, &renaming(&fs, offset)).unwrap();
        match (consistent(&fs), consistent(&renamed)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// Arbitrary nesting: when the decision procedure answers, it agrees.
    #[test]
    fn answers_on_nested_sentences_are_sound(fs in prop::collection::vec(sentence(Builder { people: 2, places: 2, max_count: 2 }, 3), 1..3)) {
        if let (Ok(fast), Some(slow)) = (consistent(&fs), oracle(&fs)) {
            prop_assert_eq!(fast, slow, "{:?}", fs.iter().map(|f| f.to_string()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn oracle_is_invariant_under_renaming(fs in prop::collection::vec(fragment_sentence(2, 2, 2), 1..4)) {
        let renamed = rename_all(&fs, &renaming(&fs, 7)).unwrap();
        prop_assert_eq!(oracle(&fs), oracle(&renamed));
    }
}

#[test]
fn fragment_sets_are_mostly_decided_by_both_sides() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;

    let strategy = prop::collection::vec(fragment_sentence(3, 3, 2), 1..6);
    let mut runner = TestRunner::deterministic();
    let (mut compared, mut inconsistent) = (0, 0);
    for _ in 0..1_000 {
        let fs = strategy.new_tree(&mut runner).unwrap().current();
        if let (Ok(fast), Some(slow)) = (consistent(&fs), oracle(&fs)) {
            assert_eq!(fast, slow);
            compared += 1;
            inconsistent += usize::from(!fast);
        }
    }
    assert!(compared >= 800, "only {compared} of 1000 sets compared");
    assert!(inconsistent >= 100, "only {inconsistent} inconsistent sets");
}
