use std::collections::BTreeSet;

use ewire_core::denote::{denote_circuit, Config};
use ewire_core::fuzz::{corpus, gen_circuit, FuzzConfig};
use ewire_core::normalize::{apply_rule, normalize, replay, Rule};
use ewire_core::rng::SplitMix64;
use ewire_core::typecheck::check_circuit;
use proptest::prelude::*;

#[test]
fn normalization_preserves_denotation_in_both_modes() {
    let mut fired = BTreeSet::new();
    for case in corpus(2024, 150, &FuzzConfig::default()) {
        let n = normalize(&case.term, 10_000, Rule::rules(false));
        assert!(n.complete, "structural rules did not terminate on\n{}", case.term);
        fired.extend(n.trace.iter().map(|e| e.rule));
        let ty = check_circuit(&vec![], &case.omega, &case.term).unwrap();
        assert_eq!(check_circuit(&vec![], &case.omega, &n.term).unwrap(), ty);
        for config in [Config::default(), Config::cpsu()] {
            let before = denote_circuit(&case.omega, &case.term, &config).unwrap();
            let after = denote_circuit(&case.omega, &n.term, &config).unwrap();
            let d = before.distance(&after).unwrap();
            assert!(d < 1e-9, "distance {d} for\n{}\n=>\n{}", case.term, n.term);
        }
    }
    for r in Rule::STRUCTURAL {
        assert!(fired.contains(&r), "{r} never fired");
    }
}

#[test]
fn copower_rules_are_sound_on_the_corpus() {
    let mut fired = BTreeSet::new();
    for case in corpus(99, 120, &FuzzConfig::default()) {
        let n = normalize(&case.term, 10_000, Rule::rules(true));
        fired.extend(n.trace.iter().map(|e| e.rule));
        let cfg = Config::default();
        let before = denote_circuit(&case.omega, &case.term, &cfg).unwrap();
        let after = denote_circuit(&case.omega, &n.term, &cfg).unwrap();
        assert!(before.distance(&after).unwrap() < 1e-9, "{}\n=>\n{}", case.term, n.term);
    }
    assert!(fired.contains(&Rule::InitLift) || fired.contains(&Rule::LiftInit));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn each_rule_step_keeps_type_and_meaning(seed in any::<u64>()) {
        let case = gen_circuit(&mut SplitMix64::new(seed), &FuzzConfig::default());
        let ty = check_circuit(&vec![], &case.omega, &case.term).unwrap();
        let cfg = Config::default();
        let base = denote_circuit(&case.omega, &case.term, &cfg).unwrap();
        for r in Rule::ALL {
            if let Some(next) = apply_rule(r, &case.term) {
                prop_assert_eq!(check_circuit(&vec![], &case.omega, &next).unwrap(), ty.clone());
                let d = base.distance(&denote_circuit(&case.omega, &next, &cfg).unwrap()).unwrap();
                prop_assert!(d < 1e-9, "{} broke meaning: {}", r, d);
            }
        }
    }

    #[test]
    fn trace_replays(seed in any::<u64>()) {
        let case = gen_circuit(&mut SplitMix64::new(seed), &FuzzConfig::default());
        let n = normalize(&case.term, 10_000, Rule::rules(true));
        prop_assert_eq!(replay(&case.term, &n.trace), Some(n.term.clone()));
    }

    #[test]
    fn normal_forms_are_fixed_points(seed in any::<u64>()) {
        let case = gen_circuit(&mut SplitMix64::new(seed), &FuzzConfig::default());
        let n = normalize(&case.term, 10_000, Rule::rules(false));
        let again = normalize(&n.term, 10_000, Rule::rules(false));
        prop_assert!(again.trace.is_empty());
    }
}
