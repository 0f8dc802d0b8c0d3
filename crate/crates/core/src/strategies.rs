//! Proptest strategies for rule sets, scenes and event sequences.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::subsequence;

use crate::context::{ContextCategory, ContextStore, FeatureId};
use crate::expr::{CmpOp, Expr};
use crate::rules::{Action, Category, ConditionDef, RuleDef, RuleSet};
use crate::scene::{Color, DetailLevel, Modality, ModalitySet, Property, SceneElement, SceneModel};
use crate::value::{ContextValue, Vec3};

/// Small integer-valued features the generated conditions read.
pub const FEATURES: [&str; 3] = ["env.f0", "env.f1", "env.f2"];
/// Elements of the generated scene.
pub const ELEMENTS: [&str; 2] = ["e0", "e1"];

pub fn feature(i: usize) -> FeatureId {
    FeatureId::parse(FEATURES[i]).expect("valid feature id")
}

/// A generated engine run: rules, starting scene and context, and events.
#[derive(Debug, Clone)]
pub struct EngineCase {
    pub rules: RuleSet,
    pub scene: SceneModel,
    pub store: ContextStore,
    pub events: Vec<Vec<(FeatureId, ContextValue)>>,
}

pub fn small_scene() -> SceneModel {
    let mut scene = SceneModel::new();
    for id in ELEMENTS {
        scene.insert(SceneElement::new(id, Vec3::ZERO)).expect("distinct ids");
    }
    scene
}

fn arb_cmp() -> impl Strategy<Value = CmpOp> {
    proptest::sample::select(CmpOp::ALL.to_vec())
}

fn arb_atom() -> impl Strategy<Value = Expr> {
    (0..FEATURES.len(), arb_cmp(), 0i64..4)
        .prop_map(|(f, op, lit)| Expr::compare(op, Expr::feature(feature(f)), Expr::Literal(ContextValue::Int(lit))))
}

fn arb_condition_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => arb_atom(),
        1 => (arb_atom(), arb_atom()).prop_map(|(a, b)| Expr::and(a, b)),
        1 => (arb_atom(), arb_atom()).prop_map(|(a, b)| Expr::or(a, b)),
        1 => arb_atom().prop_map(Expr::not),
    ]
}

/// Actions over the small scene and integer features.
fn arb_engine_action(allow_features: bool) -> impl Strategy<Value = Action> {
    let el = || proptest::sample::select(ELEMENTS.to_vec()).prop_map(String::from);
    let feature_weight = if allow_features { 1 } else { 0 };
    prop_oneof![
        2 => (el(), any::<bool>()).prop_map(|(element, value)| Action::SetVisible { element, value }),
        3 => (el(), proptest::sample::select(alloc::vec![10.0, 14.0, 24.0, 30.0]))
            .prop_map(|(element, value)| Action::SetTextSize { element, value }),
        2 => (el(), any::<bool>()).prop_map(|(element, reduced)| Action::SetDetail {
            element,
            value: if reduced { DetailLevel::Reduced } else { DetailLevel::Full },
        }),
        1 => (el(), "[a-c]{0,2}").prop_map(|(element, value)| Action::SetText { element, value }),
        feature_weight => (0..FEATURES.len(), 0i64..4).prop_map(|(f, v)| Action::SetFeature {
            feature: feature(f),
            value: ContextValue::Int(v),
        }),
    ]
}

/// Rule sets over [`FEATURES`] and [`small_scene`]. With `cascades`, rules
/// may write features and trigger one another.
pub fn arb_engine_rules(cascades: bool) -> impl Strategy<Value = RuleSet> {
    (1usize..5)
        .prop_flat_map(move |n_conds| {
            let conds = vec(arb_condition_expr(), n_conds);
            let rule = (
                subsequence((0..n_conds).collect::<Vec<_>>(), 1..=n_conds.min(2)),
                vec(arb_engine_action(cascades), 1..4),
                -1i64..3,
            );
            (conds, vec(rule, 1..6))
        })
        .prop_map(|(conds, rules)| {
            let conditions = conds
                .into_iter()
                .enumerate()
                .map(|(i, e)| ConditionDef::new(&format!("c{}", i), e))
                .collect();
            let rules = rules
                .into_iter()
                .enumerate()
                .map(|(i, (cs, actions, priority))| {
                    let names: Vec<String> = cs.iter().map(|c| format!("c{}", c)).collect();
                    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                    RuleDef::new(&format!("r{}", i), &refs, actions, Category::Style).with_priority(priority)
                })
                .collect();
            RuleSet::new(conditions, rules).expect("generated rule sets are well-formed")
        })
}

fn arb_event() -> impl Strategy<Value = Vec<(FeatureId, ContextValue)>> {
    subsequence((0..FEATURES.len()).collect::<Vec<_>>(), 1..=FEATURES.len()).prop_flat_map(|fs| {
        let n = fs.len();
        (Just(fs), vec(0i64..4, n)).prop_map(|(fs, vals)| {
            fs.into_iter()
                .zip(vals)
                .map(|(f, v)| (feature(f), ContextValue::Int(v)))
                .collect()
        })
    })
}

pub fn arb_engine_case(cascades: bool) -> impl Strategy<Value = EngineCase> {
    (
        arb_engine_rules(cascades),
        vec(0i64..4, FEATURES.len()),
        vec(arb_event(), 0..6),
    )
        .prop_map(|(rules, initial, events)| {
            let mut store = ContextStore::new();
            for (i, v) in initial.into_iter().enumerate() {
                store
                    .set_feature(&feature(i), ContextValue::Int(v))
                    .expect("fresh store");
            }
            store.drain_dirty();
            EngineCase {
                rules,
                scene: small_scene(),
                store,
                events,
            }
        })
}

// ---- rule sets covering the whole surface syntax, for printer/parser checks

fn arb_ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,6}".prop_filter("keywords read ambiguously", |s| {
        !matches!(
            s.as_str(),
            "true" | "false" | "dist" | "env" | "user" | "platform" | "scene"
        )
    })
}

fn arb_feature_id() -> impl Strategy<Value = FeatureId> {
    (
        proptest::sample::select(ContextCategory::ALL.to_vec()),
        "[a-z][a-z0-9_]{0,6}",
    )
        .prop_map(|(c, n)| FeatureId::new(c, &n).expect("name matches the feature pattern"))
}

fn arb_float() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1_000_000i64..1_000_000).prop_map(|v| v as f64 / 1000.0),
        -1e6f64..1e6,
        Just(1e-7),
        Just(2.5e20),
    ]
}

fn arb_text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 #\"\\\\.,:;()!-]{0,12}"
}

pub fn arb_literal() -> impl Strategy<Value = ContextValue> {
    prop_oneof![
        any::<bool>().prop_map(ContextValue::Bool),
        any::<i64>().prop_map(ContextValue::Int),
        arb_float().prop_map(ContextValue::Float),
        arb_text().prop_map(ContextValue::Text),
        (arb_float(), arb_float(), arb_float()).prop_map(|(x, y, z)| ContextValue::Vec3(Vec3::new(x, y, z))),
    ]
}

fn arb_readable_property() -> impl Strategy<Value = Property> {
    proptest::sample::select(alloc::vec![
        Property::Position,
        Property::Yaw,
        Property::Visible,
        Property::Text,
        Property::TextSize,
        Property::Billboard,
        Property::Detail,
    ])
}

fn arb_vec3_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        arb_feature_id().prop_map(Expr::Feature),
        arb_ident().prop_map(|e| Expr::scene(&e, Property::Position)),
        (arb_float(), arb_float(), arb_float())
            .prop_map(|(x, y, z)| Expr::Literal(ContextValue::Vec3(Vec3::new(x, y, z)))),
    ]
}

fn arb_value_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        arb_literal().prop_map(Expr::Literal),
        arb_feature_id().prop_map(Expr::Feature),
        (arb_ident(), arb_readable_property()).prop_map(|(e, p)| Expr::scene(&e, p)),
        (arb_vec3_expr(), arb_vec3_expr()).prop_map(|(a, b)| Expr::dist(a, b)),
    ]
}

/// Arbitrary well-typed boolean expressions.
pub fn arb_bool_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (arb_value_expr(), arb_cmp(), arb_value_expr()).prop_map(|(a, op, b)| Expr::compare(op, a, b)),
        arb_feature_id().prop_map(Expr::Feature),
        any::<bool>().prop_map(|b| Expr::Literal(ContextValue::Bool(b))),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::or(a, b)),
            inner.clone().prop_map(Expr::not),
            (
                inner.clone(),
                proptest::sample::select(alloc::vec![CmpOp::Eq, CmpOp::Ne]),
                inner
            )
                .prop_map(|(a, op, b)| Expr::compare(op, a, b)),
        ]
    })
    .prop_filter("well-typed", |e| e.check_condition().is_ok())
}

pub fn arb_action() -> impl Strategy<Value = Action> {
    let modalities = subsequence(Modality::ALL.to_vec(), 1..=3).prop_map(|m| ModalitySet::new(m).expect("non-empty"));
    prop_oneof![
        (arb_ident(), any::<bool>()).prop_map(|(element, value)| Action::SetVisible { element, value }),
        (arb_ident(), arb_text()).prop_map(|(element, value)| Action::SetText { element, value }),
        (arb_ident(), 0.5f64..200.0).prop_map(|(element, value)| Action::SetTextSize { element, value }),
        (arb_ident(), any::<bool>()).prop_map(|(element, r)| Action::SetDetail {
            element,
            value: if r { DetailLevel::Reduced } else { DetailLevel::Full },
        }),
        (arb_ident(), modalities).prop_map(|(element, value)| Action::SetModality { element, value }),
        (arb_ident(), any::<bool>()).prop_map(|(element, value)| Action::SetBillboard { element, value }),
        (arb_ident(), any::<(u8, u8, u8)>()).prop_map(|(element, (r, g, b))| Action::Highlight {
            element,
            color: Color::new(r, g, b),
        }),
        arb_ident().prop_map(|element| Action::ClearHighlight { element }),
        (arb_feature_id(), arb_literal()).prop_map(|(feature, value)| Action::SetFeature { feature, value }),
    ]
}

/// Arbitrary valid rule sets exercising every expression form and effector.
pub fn arb_rule_set() -> impl Strategy<Value = RuleSet> {
    (1usize..5)
        .prop_flat_map(|n_conds| {
            let rule = (
                subsequence((0..n_conds).collect::<Vec<_>>(), 1..=n_conds),
                vec(arb_action(), 1..4),
                any::<i64>(),
                proptest::sample::select(Category::ALL.to_vec()),
            );
            (vec(arb_bool_expr(), n_conds), vec(rule, 0..5))
        })
        .prop_map(|(conds, rules)| {
            let conditions = conds
                .into_iter()
                .enumerate()
                .map(|(i, e)| ConditionDef::new(&format!("cond_{}", i), e))
                .collect();
            let rules = rules
                .into_iter()
                .enumerate()
                .map(|(i, (cs, actions, priority, category))| {
                    let names: Vec<String> = cs.iter().map(|c| format!("cond_{}", c)).collect();
                    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                    RuleDef::new(&format!("Rule{}", i), &refs, actions, category).with_priority(priority)
                })
                .collect();
            RuleSet::new(conditions, rules).expect("generated rule sets are well-formed")
        })
}
