//! Proptest strategies for names, descriptors and signatures.

use proptest::prelude::*;

pub fn internal_name() -> impl Strategy<Value = String> {
    proptest::collection::vec("[a-z][a-z0-9_$]{0,6}", 1..4).prop_map(|v| v.join("/"))
}

pub fn field_descriptor() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        "[BCDFIJSZ]".prop_map(String::from),
        internal_name().prop_map(|n| format!("L{n};")),
    ];
    (0usize..4, leaf).prop_map(|(dims, t)| format!("{}{t}", "[".repeat(dims)))
}

pub fn method_descriptor() -> impl Strategy<Value = String> {
    (proptest::collection::vec(field_descriptor(), 0..5), prop_oneof![Just("V".to_string()), field_descriptor()])
        .prop_map(|(ps, r)| format!("({}){r}", ps.concat()))
}

pub fn reference_signature(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        "[A-Z]".prop_map(|v| format!("T{v};")),
        internal_name().prop_map(|n| format!("L{n};")),
    ];
    leaf.prop_recursive(depth, 24, 4, |inner| {
        let arg = prop_oneof![
            Just("*".to_string()),
            inner.clone(),
            inner.clone().prop_map(|s| format!("+{s}")),
            inner.clone().prop_map(|s| format!("-{s}")),
        ];
        prop_oneof![
            (internal_name(), proptest::collection::vec(arg, 1..3))
                .prop_map(|(n, args)| format!("L{n}<{}>;", args.concat())),
            inner.clone().prop_map(|s| format!("[{s}")),
            (internal_name(), inner.clone(), "[A-Z][a-z]{0,4}")
                .prop_map(|(n, arg, suffix)| format!("L{n}<{arg}>.{suffix};")),
        ]
    })
    .boxed()
}

pub fn method_signature() -> impl Strategy<Value = String> {
    (
        proptest::collection::vec(("[A-Z]", reference_signature(2)), 0..3),
        proptest::collection::vec(prop_oneof!["[IJZ]".prop_map(String::from), reference_signature(2)], 0..4),
        prop_oneof![Just("V".to_string()), reference_signature(2)],
    )
        .prop_map(|(tps, ps, r)| {
            let tp = if tps.is_empty() {
                String::new()
            } else {
                format!("<{}>", tps.iter().map(|(n, b)| format!("{n}:{b}")).collect::<String>())
            };
            format!("{tp}({}){r}", ps.concat())
        })
}
