mod common;

use genn::rules::{evaluate_rules, parse_rules, RuleSet, DEFAULT_RULES};
use genn::rng::Rng;
use proptest::prelude::*;

fn one_rule(cond: &str) -> RuleSet {
    parse_rules(&format!("rule r -> \"hit\" {{ {cond} }}")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn agrees_with_tree_walker(seed: u64) {
        let mut rng = Rng::new(seed);
        let tree = common::random_tree(&mut rng, 5);
        let values = common::random_values(&mut rng);
        let a = common::attribute_set(&values);
        for src in [tree.source(), tree.minimal_source()] {
            let rs = one_rule(&src);
            prop_assert_eq!(rs.evaluate(&a).is_some(), tree.eval(&values), "{}", src);
        }
    }

    #[test]
    fn de_morgan(seed: u64) {
        let mut rng = Rng::new(seed);
        let a = common::random_tree(&mut rng, 0).source();
        let b = common::random_tree(&mut rng, 0).source();
        let values = common::attribute_set(&common::random_values(&mut rng));
        let lhs = one_rule(&format!("not ({a} and {b})"));
        let rhs = one_rule(&format!("(not {a}) or (not {b})"));
        prop_assert_eq!(lhs.evaluate(&values).is_some(), rhs.evaluate(&values).is_some());
    }

    #[test]
    fn evaluation_is_pure(seed: u64) {
        let mut rng = Rng::new(seed);
        let rs = RuleSet::default_rules();
        let a = common::attribute_set(&common::random_values(&mut rng));
        let first = evaluate_rules(&rs, &a).map(|d| (d.label.to_string(), d.rule_name.to_string()));
        let second = evaluate_rules(&rs, &a).map(|d| (d.label.to_string(), d.rule_name.to_string()));
        prop_assert_eq!(first, second);
    }

    #[test]
    fn print_reparse_is_identity(seed: u64) {
        let mut rng = Rng::new(seed);
        let text: String = (0..1 + rng.below(5))
            .map(|i| {
                let t = common::random_tree(&mut rng, 4);
                format!("rule r{i} -> \"l{}\" priority {} {{ {} }}\n", rng.below(3), rng.below(4) as i64 - 1, t.minimal_source())
            })
            .collect();
        let rs = parse_rules(&text).unwrap();
        let again = parse_rules(&rs.to_string()).unwrap();
        prop_assert_eq!(again.rules(), rs.rules());
    }
}

#[test]
fn shipped_rules_round_trip() {
    let rs = parse_rules(DEFAULT_RULES).unwrap();
    assert_eq!(parse_rules(&rs.to_string()).unwrap().rules(), rs.rules());
}
