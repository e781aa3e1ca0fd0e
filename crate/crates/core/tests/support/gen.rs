//! Proptest strategies for manifests and schedule constraint sets.

use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use thornflesh::ccl::*;

const RESERVED: &[&str] = &[
    "thorn", "implements", "inherits", "group", "param", "schedule", "at", "in", "before", "after", "default",
    "steerable", "reads", "writes", "sync", "kind", "timelevels", "ghost", "parity",
];

pub fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,7}".prop_filter("reserved word", |s| !RESERVED.contains(&s.as_str()))
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[ -~]{0,24}",
        "[a-z \"\\\\\t\n]{0,12}",
        Just("phase space \u{3c6}\u{2032}".to_string()),
    ]
}

fn group_ref() -> impl Strategy<Value = GroupRef> {
    (ident(), ident()).prop_map(|(i, g)| GroupRef::new(i, g))
}

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

fn group(name: String) -> impl Strategy<Value = GroupDecl> {
    (
        prop_oneof![Just(GroupKind::GridFunction), Just(GroupKind::Scalar)],
        1u8..=3,
        0u8..=4,
        parity(),
        btree_set(ident(), 1..4),
        vec(parity(), 4),
    )
        .prop_map(move |(kind, timelevels, ghost, parity, names, parities)| GroupDecl {
            name: name.clone(),
            kind,
            timelevels,
            ghost: if kind == GroupKind::Scalar { 0 } else { ghost },
            parity,
            members: names
                .into_iter()
                .zip(parities)
                .map(|(name, parity)| MemberDecl { name, parity })
                .collect(),
        })
}

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        Just(0.0),
        Just(0.1),
        Just(1e-300),
        Just(-2.5e17),
        Just(f64::MAX),
    ]
}

/// Bounds around `d`: unbounded, inclusive at `d`, or strictly outside it.
fn real_bound(d: f64, below: bool) -> impl Strategy<Value = Bound<f64>> {
    prop_oneof![
        Just(Bound::unbounded()),
        Just(Bound { value: Some(d), inclusive: true }),
        (1.0..1e3f64, any::<bool>()).prop_map(move |(gap, inclusive)| {
            let v = if below { d - gap } else { d + gap };
            if v.is_finite() && v != d {
                Bound { value: Some(v), inclusive }
            } else {
                Bound::unbounded()
            }
        }),
    ]
}

fn int_bound(d: i64, below: bool) -> impl Strategy<Value = Bound<i64>> {
    prop_oneof![
        Just(Bound::unbounded()),
        Just(Bound { value: Some(d), inclusive: true }),
        (1i64..1000, any::<bool>()).prop_map(move |(gap, inclusive)| Bound {
            value: Some(if below { d - gap } else { d + gap }),
            inclusive,
        }),
    ]
}

fn typed(ptype: ParamType) -> BoxedStrategy<(ParamRange, ParamValue)> {
    match ptype {
        ParamType::Real => real()
            .prop_flat_map(|d| (real_bound(d, true), real_bound(d, false), Just(d)))
            .prop_map(|(lo, hi, d)| (ParamRange::Real { lo, hi }, ParamValue::Real(d)))
            .boxed(),
        ParamType::Int => (-1_000_000i64..1_000_000)
            .prop_flat_map(|d| (int_bound(d, true), int_bound(d, false), Just(d)))
            .prop_map(|(lo, hi, d)| (ParamRange::Int { lo, hi }, ParamValue::Int(d)))
            .boxed(),
        ParamType::Keyword => (btree_set("[a-z][a-z ]{0,6}", 1..5), any::<prop::sample::Index>())
            .prop_map(|(set, pick)| {
                let set: Vec<String> = set.into_iter().collect();
                let d = pick.get(&set).clone();
                (ParamRange::Keywords(set), ParamValue::Keyword(d))
            })
            .boxed(),
        ParamType::Boolean => any::<bool>()
            .prop_map(|b| (ParamRange::Any, ParamValue::Boolean(b)))
            .boxed(),
        ParamType::String => text().prop_map(|s| (ParamRange::Any, ParamValue::Str(s))).boxed(),
    }
}

fn param(name: String) -> impl Strategy<Value = ParamDecl> {
    let ptype = prop_oneof![
        Just(ParamType::Real),
        Just(ParamType::Int),
        Just(ParamType::Keyword),
        Just(ParamType::Boolean),
        Just(ParamType::String),
    ];
    let steerable = prop_oneof![Just(Steerable::Never), Just(Steerable::Always), Just(Steerable::Recover)];
    (ptype.prop_flat_map(|t| (Just(t), typed(t))), text(), steerable).prop_map(
        move |((ptype, (range, default)), description, steerable)| ParamDecl {
            name: name.clone(),
            ptype,
            description,
            range,
            default,
            steerable,
        },
    )
}

fn location() -> impl Strategy<Value = ScheduleLocation> {
    prop_oneof![
        prop::sample::select(Bin::ALL.to_vec()).prop_map(ScheduleLocation::Bin),
        "[A-Z][a-z]{1,5}_[A-Za-z]{1,6}".prop_map(ScheduleLocation::Group),
    ]
}

fn schedule(routine: String) -> impl Strategy<Value = ScheduleDecl> {
    (
        location(),
        vec(ident(), 0..3),
        vec(ident(), 0..3),
        vec(group_ref(), 0..3),
        vec(group_ref(), 0..3),
        vec(group_ref(), 0..2),
        text(),
    )
        .prop_map(move |(location, before, after, reads, writes, sync, description)| ScheduleDecl {
            routine: routine.clone(),
            location,
            before,
            after,
            reads,
            writes,
            sync,
            description,
        })
}

fn each<T: std::fmt::Debug, S: Strategy<Value = T> + 'static>(
    names: std::collections::BTreeSet<String>,
    f: impl Fn(String) -> S,
) -> BoxedStrategy<Vec<T>> {
    names.into_iter().map(f).collect::<Vec<_>>().boxed()
}

/// Manifests satisfying every declaration invariant, in any shape the grammar allows.
pub fn manifest() -> impl Strategy<Value = ThornManifest> {
    (
        "[A-Z][A-Za-z0-9]{0,9}",
        ident(),
        vec(ident(), 0..3),
        btree_set(ident(), 0..4),
        btree_set(ident(), 0..5),
        btree_set("[A-Z][A-Za-z]{0,4}_[A-Za-z0-9]{1,6}", 0..5),
    )
        .prop_flat_map(|(thorn_name, implementation, inherits, groups, params, routines)| {
            (
                Just(thorn_name),
                Just(implementation),
                Just(inherits),
                each(groups, group),
                each(params, param),
                each(routines, schedule),
            )
        })
        .prop_map(|(thorn_name, implementation, inherits, groups, params, schedule_items)| ThornManifest {
            thorn_name,
            implementation,
            inherits,
            groups,
            params,
            schedule_items,
        })
}

/// A bin's worth of routines spread over up to three thorns, with before/after constraints.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    /// (thorn, routine) per routine; routine names are distinct.
    pub routines: Vec<(String, String)>,
    /// (a, b, a_declares_before): `a before b` when true, `b after a` otherwise.
    pub constraints: Vec<(usize, usize, bool)>,
}

impl ConstraintSet {
    pub fn keys(&self) -> Vec<String> {
        self.routines.iter().map(|(t, r)| format!("{t}::{r}")).collect()
    }

    /// Edges `a runs before b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.constraints.iter().map(|&(a, b, _)| (a, b)).collect()
    }

    pub fn manifests(&self, bin: Bin) -> Vec<ThornManifest> {
        let mut out: Vec<ThornManifest> = Vec::new();
        for (i, (thorn, routine)) in self.routines.iter().enumerate() {
            let mut item = ScheduleDecl {
                routine: routine.clone(),
                location: ScheduleLocation::Bin(bin),
                before: Vec::new(),
                after: Vec::new(),
                reads: Vec::new(),
                writes: Vec::new(),
                sync: Vec::new(),
                description: String::new(),
            };
            for &(a, b, declared_before) in &self.constraints {
                if declared_before && a == i {
                    item.before.push(self.routines[b].1.clone());
                }
                if !declared_before && b == i {
                    item.after.push(self.routines[a].1.clone());
                }
            }
            match out.iter_mut().find(|m| &m.thorn_name == thorn) {
                Some(m) => m.schedule_items.push(item),
                None => out.push(ThornManifest {
                    thorn_name: thorn.clone(),
                    implementation: thorn.to_lowercase(),
                    inherits: Vec::new(),
                    groups: Vec::new(),
                    params: Vec::new(),
                    schedule_items: vec![item],
                }),
            }
        }
        out
    }
}

pub fn constraint_set() -> impl Strategy<Value = ConstraintSet> {
    (1usize..=8)
        .prop_flat_map(|n| {
            (
                btree_set("[a-zA-Z][a-z0-9]{0,3}", n..=n),
                vec(prop::sample::select(vec!["Alpha", "Beta", "Gamma"]), n..=n),
                vec((0..n, 0..n, any::<bool>()), 0..=12),
            )
        })
        .prop_flat_map(|(names, thorns, constraints)| {
            let routines: Vec<(String, String)> = thorns.into_iter().map(String::from).zip(names).collect();
            (Just(routines).prop_shuffle(), Just(constraints))
        })
        .prop_map(|(routines, constraints)| ConstraintSet { routines, constraints })
}
