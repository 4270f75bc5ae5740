//! Declarative rules that label or reject extracted objects by their shape
//! and radiometric attributes.
//!
//! ```text
//! # vehicles are small and elongated
//! rule vehicle -> "vehicle" priority 10 { area < 100 and elongation >= 1.3 }
//! ```
//!
//! Among the rules whose condition holds, the highest priority wins; equal
//! priorities fall back to declaration order. The label `reject` is reserved
//! by the extraction pipeline for removing objects.

mod ast;
mod parser;

use std::fmt;

pub use ast::{Attribute, AttributeSet, CmpOp, Comparison, Expr, Rule};

use crate::error::{Error, Result};

/// Label that removes an object from the extraction output.
pub const REJECT_LABEL: &str = "reject";

/// Rules shipped with the crate.
pub const DEFAULT_RULES: &str = include_str!("../../rules/default.rules");

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision<'a> {
    pub label: &'a str,
    pub rule_name: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub rule_name: String,
    pub matched: bool,
    /// First false comparison in evaluation order, for rules that did not match.
    pub failing_comparison: Option<String>,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for r in &rules {
            if !seen.insert(r.name.as_str()) {
                return Err(Error::DuplicateRule(r.name.clone()));
            }
        }
        Ok(RuleSet { rules })
    }

    pub fn default_rules() -> Self {
        parse_rules(DEFAULT_RULES).expect("shipped default rules parse")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn evaluate(&self, a: &AttributeSet) -> Option<Decision<'_>> {
        let mut best: Option<&Rule> = None;
        for r in &self.rules {
            if r.condition.eval(a) && best.is_none_or(|b| r.priority > b.priority) {
                best = Some(r);
            }
        }
        best.map(|r| Decision {
            label: &r.label,
            rule_name: &r.name,
        })
    }

    pub fn explain(&self, a: &AttributeSet) -> Vec<TraceEntry> {
        self.rules
            .iter()
            .map(|r| {
                let matched = r.condition.eval(a);
                TraceEntry {
                    rule_name: r.name.clone(),
                    matched,
                    failing_comparison: (!matched).then(|| r.condition.failing_leaf(a)),
                }
            })
            .collect()
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

pub fn parse_rules(text: &str) -> Result<RuleSet> {
    Ok(RuleSet {
        rules: parser::parse(text)?,
    })
}

pub fn evaluate_rules<'a>(rs: &'a RuleSet, a: &AttributeSet) -> Option<Decision<'a>> {
    rs.evaluate(a)
}

pub fn explain(rs: &RuleSet, a: &AttributeSet) -> Vec<TraceEntry> {
    rs.explain(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs(area: f64, elongation: f64) -> AttributeSet {
        AttributeSet {
            area,
            perimeter: 20.0,
            width: 4.0,
            elongation,
            compactness: 0.8,
            mean_intensity: 200.0,
            class_prob: 0.9,
            som_cell: 0,
        }
    }

    const VEHICLE: &str = r#"rule v -> "vehicle" { area < 60 and elongation > 1.4 }"#;

    #[test]
    fn parses_single_rule() {
        let rs = parse_rules(VEHICLE).unwrap();
        assert_eq!(rs.len(), 1);
        let r = &rs.rules()[0];
        assert_eq!((r.name.as_str(), r.label.as_str(), r.priority), ("v", "vehicle", 0));
        assert_eq!(
            r.condition,
            Expr::and(
                Expr::cmp(Attribute::Area, CmpOp::Lt, 60.0),
                Expr::cmp(Attribute::Elongation, CmpOp::Gt, 1.4)
            )
        );
    }

    #[test]
    fn empty_and_comment_only_inputs() {
        assert!(parse_rules("").unwrap().is_empty());
        assert!(parse_rules("  # nothing here\n\n").unwrap().is_empty());
        assert_eq!(parse_rules("").unwrap().evaluate(&attrs(1.0, 1.0)), None);
    }

    #[test]
    fn unknown_attribute_is_located() {
        let err = parse_rules("rule x -> \"y\" {\n  speed > 3 }").unwrap_err();
        match err {
            Error::UnknownAttribute { name, line, column } => {
                assert_eq!((name.as_str(), line, column), ("speed", 2, 3));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_rules("rule a -> \"b\" { area < }").unwrap_err();
        assert!(matches!(err, Error::RuleSyntax { line: 1, column: 24, .. }), "{err}");
        assert!(matches!(
            parse_rules("rule a \"b\" { area < 1 }"),
            Err(Error::RuleSyntax { .. })
        ));
        assert!(matches!(
            parse_rules("rule a -> \"b\" priority 1.5 { area < 1 }"),
            Err(Error::RuleSyntax { .. })
        ));
        assert!(matches!(
            parse_rules("rule a -> \"b\" { (area < 1 }"),
            Err(Error::RuleSyntax { .. })
        ));
        assert!(matches!(
            parse_rules("rule a -> \"b\" { area < 1 } @"),
            Err(Error::RuleSyntax { .. })
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = "rule a -> \"x\" { area < 1 }\nrule a -> \"y\" { area > 1 }";
        assert!(matches!(parse_rules(text), Err(Error::DuplicateRule(n)) if n == "a"));
    }

    #[test]
    fn precedence_and_grouping() {
        let rs = parse_rules("rule a -> \"x\" { not area < 1 or width > 2 and som_cell == 3 }").unwrap();
        let expected = Expr::or(
            Expr::not(Expr::cmp(Attribute::Area, CmpOp::Lt, 1.0)),
            Expr::and(
                Expr::cmp(Attribute::Width, CmpOp::Gt, 2.0),
                Expr::cmp(Attribute::SomCell, CmpOp::Eq, 3.0),
            ),
        );
        assert_eq!(rs.rules()[0].condition, expected);
    }

    #[test]
    fn numbers_in_various_forms() {
        let rs = parse_rules(
            "rule a -> \"x\" { area > -2.5 and width < 1e3 and class_prob >= .5 and perimeter != +4 }",
        )
        .unwrap();
        let text = rs.to_string();
        assert_eq!(parse_rules(&text).unwrap(), rs);
    }

    #[test]
    fn evaluation_examples() {
        let rs = parse_rules(VEHICLE).unwrap();
        let d = rs.evaluate(&attrs(40.0, 2.0)).unwrap();
        assert_eq!((d.label, d.rule_name), ("vehicle", "v"));
        assert_eq!(evaluate_rules(&rs, &attrs(400.0, 2.0)), None);
    }

    #[test]
    fn priority_then_declaration_order() {
        let rs = parse_rules(
            "rule low -> \"a\" priority 1 { area > 0 }\n\
             rule high -> \"b\" priority 5 { area > 0 }\n\
             rule high2 -> \"c\" priority 5 { area > 0 }",
        )
        .unwrap();
        assert_eq!(rs.evaluate(&attrs(1.0, 1.0)).unwrap().label, "b");
    }

    #[test]
    fn explain_examples() {
        let rs = parse_rules(VEHICLE).unwrap();
        assert_eq!(
            explain(&rs, &attrs(40.0, 2.0)),
            vec![TraceEntry {
                rule_name: "v".into(),
                matched: true,
                failing_comparison: None
            }]
        );
        let t = explain(&rs, &attrs(100.0, 2.0));
        assert_eq!(t[0].failing_comparison.as_deref(), Some("area < 60"));
        let t = explain(&rs, &attrs(10.0, 1.0));
        assert_eq!(t[0].failing_comparison.as_deref(), Some("elongation > 1.4"));
        assert!(explain(&RuleSet::default(), &attrs(1.0, 1.0)).is_empty());
    }

    #[test]
    fn explain_through_negation() {
        let rs = parse_rules("rule n -> \"x\" { not (area > 5 or width > 100) }").unwrap();
        let t = explain(&rs, &attrs(10.0, 1.0));
        assert_eq!(t[0].failing_comparison.as_deref(), Some("not area > 5"));
    }

    #[test]
    fn attribute_set_from_pairs() {
        let names = Attribute::ALL.map(|a| a.name());
        let a = AttributeSet::from_pairs(names.iter().map(|&n| (n, 1.0))).unwrap();
        assert_eq!(a.som_cell, 1);
        assert!(AttributeSet::from_pairs(names.iter().skip(1).map(|&n| (n, 1.0))).is_err());
        assert!(AttributeSet::from_pairs(
            names.iter().map(|&n| (n, if n == "area" { f64::NAN } else { 1.0 }))
        )
        .is_err());
    }

    #[test]
    fn default_rules_parse_and_round_trip() {
        let rs = RuleSet::default_rules();
        assert!(!rs.is_empty());
        assert_eq!(parse_rules(&rs.to_string()).unwrap(), rs);
    }

    #[test]
    fn label_escapes_round_trip() {
        let rs = parse_rules(r#"rule q -> "say \"hi\" \\ there" { area > 1 }"#).unwrap();
        assert_eq!(rs.rules()[0].label, "say \"hi\" \\ there");
        assert_eq!(parse_rules(&rs.to_string()).unwrap(), rs);
    }
}
