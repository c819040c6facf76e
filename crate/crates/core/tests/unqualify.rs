use std::collections::BTreeSet;

use proptest::prelude::*;
use unshade_core::classfile::{parse_class, parse_descriptor, parse_signature, ClassFile};
use unshade_core::unqualify::{
    canonical_encode, relocate, relocate_archive, simple_name, unqualify_descriptor, unqualify_signature,
    validate_rules, RelocationRule, UnqualifyError,
};
use unshade_testkit::asm::{ACC_FINAL, ACC_PRIVATE, ACC_PUBLIC, ACC_STATIC};
use unshade_testkit::gen::{field_descriptor, internal_name, method_descriptor, method_signature, reference_signature};
use unshade_testkit::{corpus, library, ClassBuilder, Code, JarBuilder, Layout};

fn parse(bytes: &[u8]) -> ClassFile {
    parse_class(bytes).expect("fixture parses")
}

fn rules(pairs: &[(&str, &str)]) -> Vec<RelocationRule> {
    pairs.iter().map(|(f, t)| RelocationRule::new(f, t).unwrap()).collect()
}

fn rule_sets() -> Vec<Vec<RelocationRule>> {
    vec![
        rules(&[("com/example", "org/shaded")]),
        rules(&[("com/example", "shaded/com/example"), ("org/acme", "shaded/org/acme"), ("net/demo", "shaded/net/demo")]),
        rules(&[("com/example/utils", "x/u"), ("org/acme/lib/core", "y"), ("net/demo/model", "z/m/q")]),
        rules(&[("com", "relocated/com"), ("org", "relocated/org"), ("net", "relocated/net")]),
        rules(&[("com/example", "a"), ("org/acme/lib", "b/c/d/e/f/g"), ("net/demo/io", "io")]),
        rules(&[("java/lang", "shadow/jdk/lang")]),
    ]
}

#[test]
fn relocation_preserves_canonical_encoding() {
    for fixture in corpus() {
        let class = parse(&fixture.bytes());
        let original = canonical_encode(&class).unwrap();
        for set in rule_sets() {
            let moved = relocate(&class, &set).unwrap();
            assert_eq!(canonical_encode(&moved).unwrap(), original, "{} under {set:?}", fixture.internal_name);
        }
    }
}

#[test]
fn relocation_changes_raw_bytes() {
    for fixture in corpus() {
        let class = parse(&fixture.bytes());
        for set in rule_sets().into_iter().take(5) {
            let moved = relocate(&class, &set).unwrap();
            assert_ne!(moved.raw_bytes, class.raw_bytes, "{} under {set:?}", fixture.internal_name);
        }
    }
}

#[test]
fn foo_moves_to_modified_package() {
    let foo = library("com/example", 0).into_iter().find(|f| f.internal_name == "com/example/utils/Foo").unwrap();
    let moved = relocate(&parse(&foo.bytes()), &rules(&[("com/example", "org/modified")])).unwrap();
    assert_eq!(moved.this_class_name(), "org/modified/utils/Foo");
    assert_eq!(moved.to_bytes(), moved.raw_bytes);
}

#[test]
fn empty_rule_set_rebuilds_the_pool_only() {
    for fixture in corpus() {
        let bytes = fixture.builder.build_with(&Layout { reverse: true, ..Layout::default() });
        let class = parse(&bytes);
        let moved = relocate(&class, &[]).unwrap();
        assert_eq!(moved.this_class_name(), class.this_class_name());
        assert_ne!(moved.raw_bytes, class.raw_bytes, "{}", fixture.internal_name);
        assert_eq!(canonical_encode(&moved).unwrap(), canonical_encode(&class).unwrap());
    }
}

#[test]
fn pool_layout_does_not_affect_encoding() {
    let layouts = [
        Layout { reverse: true, ..Layout::default() },
        Layout { duplicate_utf8: true, ..Layout::default() },
        Layout { extra_unused: vec!["unused".into(), "com/example/Nope".into()], ..Layout::default() },
        Layout { minor_version: 3, major_version: Some(65), ..Layout::default() },
    ];
    for fixture in corpus() {
        let base = canonical_encode(&parse(&fixture.bytes())).unwrap();
        for layout in &layouts {
            let other = canonical_encode(&parse(&fixture.builder.build_with(layout))).unwrap();
            assert_eq!(other, base, "{} with {layout:?}", fixture.internal_name);
        }
    }
}

#[test]
fn encoding_is_deterministic() {
    for fixture in corpus() {
        let class = parse(&fixture.bytes());
        assert_eq!(canonical_encode(&class).unwrap(), canonical_encode(&class).unwrap());
    }
}

#[test]
fn corpus_encodings_are_distinct() {
    let all: Vec<_> = corpus().iter().map(|f| canonical_encode(&parse(&f.bytes())).unwrap()).collect();
    let distinct: BTreeSet<_> = all.iter().map(|e| e.bytes.clone()).collect();
    assert_eq!(distinct.len(), all.len());
}

/// Moving every package of a library into the default package yields a class
/// whose names are already unqualified.
#[test]
fn encoding_an_unqualified_class_is_idempotent() {
    let packages = ["utils", "core", "io", "annotations", "model"];
    let set: Vec<RelocationRule> =
        packages.iter().map(|p| RelocationRule::new(&format!("com/example/{p}"), "").unwrap()).collect();
    for fixture in library("com/example", 0) {
        let class = parse(&fixture.bytes());
        let flat = relocate(&class, &set).unwrap();
        assert!(!flat.this_class_name().contains('/'));
        assert_eq!(canonical_encode(&flat).unwrap(), canonical_encode(&class).unwrap());
    }
}

fn sample(configure: impl FnOnce(&mut ClassBuilder, &mut Code)) -> Vec<u8> {
    let mut cb = ClassBuilder::new("com/example/Sample");
    cb.field(ACC_PRIVATE, "count", "I");
    let mut code = Code::new(2, 2);
    configure(&mut cb, &mut code);
    cb.method(ACC_PUBLIC, "run", "()I").code(code);
    cb.build()
}

fn body(c: &mut Code) {
    c.aload(0).getfield("com/example/Sample", "count", "I").ireturn();
}

#[test]
fn retained_differences_change_the_encoding() {
    let encode = |b: Vec<u8>| canonical_encode(&parse(&b)).unwrap();
    let base = encode(sample(|_, c| body(c)));
    let variants = [
        (
            "instruction",
            sample(|_, c| {
                c.aload(0).getfield("com/example/Sample", "count", "I").iconst(1).op(0x60).ireturn();
            }),
        ),
        (
            "flags",
            sample(|cb, c| {
                cb.field(ACC_PRIVATE | ACC_FINAL, "extra", "J");
                body(c);
            }),
        ),
        (
            "member set",
            sample(|cb, c| {
                cb.field(ACC_PUBLIC | ACC_STATIC, "flag", "Z");
                body(c);
            }),
        ),
        (
            "exception table",
            sample(|_, c| {
                let (s, e, h) = (c.label(), c.label(), c.label());
                c.mark(s).aload(0).getfield("com/example/Sample", "count", "I").mark(e).ireturn();
                c.mark(h).pop().iconst(0).ireturn();
                c.handler(s, e, h, Some("java/lang/RuntimeException"));
            }),
        ),
        (
            "string literal",
            sample(|_, c| {
                c.ldc_str("com.example.Sample").pop();
                body(c);
            }),
        ),
    ];
    let mut seen = BTreeSet::from([base.bytes.clone()]);
    for (what, bytes) in variants {
        let enc = encode(bytes);
        assert_ne!(enc, base, "{what}");
        assert!(seen.insert(enc.bytes), "{what} collides with another variant");
    }
}

#[test]
fn string_literals_are_kept_qualified() {
    let with = |s: &str| {
        let mut cb = ClassBuilder::new("com/example/Lit");
        let mut c = Code::new(1, 1);
        c.ldc_str(s).areturn();
        cb.method(ACC_PUBLIC | ACC_STATIC, "name", "()Ljava/lang/String;").code(c);
        canonical_encode(&parse(&cb.build())).unwrap()
    };
    assert_ne!(with("com/example/Lit"), with("org/other/Lit"));
}

#[test]
fn overlapping_rules_conflict() {
    let set = rules(&[("com/example", "a"), ("com/example/utils", "b")]);
    assert!(matches!(validate_rules(&set), Err(UnqualifyError::RelocationConflict { .. })));
    let class = parse(&library("com/example", 0)[0].bytes());
    assert!(matches!(relocate(&class, &set), Err(UnqualifyError::RelocationConflict { .. })));
    assert!(validate_rules(&rules(&[("com/example", "a"), ("com/examples", "b")])).is_ok());
}

#[test]
fn invalid_rules_are_rejected() {
    assert!(RelocationRule::new("", "x").is_err());
    assert!(RelocationRule::new("com//x", "y").is_err());
    assert!(RelocationRule::new("com.example", "y").is_err());
    assert!(RelocationRule::new("com/example", "").is_ok());
}

#[test]
fn archive_relocation_renames_entries() {
    let lib = library("com/example", 0);
    let jar = JarBuilder::new().manifest("test").classes(&lib).build();
    let moved = relocate_archive(&jar, &rules(&[("com/example", "org/shaded")])).unwrap();
    let mut zip = zip::ZipArchive::new(std::io::Cursor::new(moved)).unwrap();
    let names: BTreeSet<String> = zip.file_names().map(String::from).collect();
    assert!(names.contains("META-INF/MANIFEST.MF"));
    assert!(names.contains("org/shaded/utils/Foo.class"));
    assert!(!names.iter().any(|n| n.starts_with("com/")));
    let mut entry = zip.by_name("org/shaded/utils/Foo.class").unwrap();
    let mut bytes = Vec::new();
    std::io::Read::read_to_end(&mut entry, &mut bytes).unwrap();
    assert_eq!(parse(&bytes).this_class_name(), "org/shaded/utils/Foo");
}

#[test]
fn spec_examples() {
    assert_eq!(simple_name("com/example/utils/Foo"), "Foo");
    assert_eq!(simple_name("Foo"), "Foo");
    assert_eq!(simple_name("com/example/Foo$Bar"), "Foo$Bar");
    let d = |s: &str| unqualify_descriptor(&parse_descriptor(s).unwrap()).to_string();
    assert_eq!(d("(Lcom/example/utils/Foo;I)Ljava/lang/String;"), "(LFoo;I)LString;");
    assert_eq!(d("(II)V"), "(II)V");
    assert_eq!(d("[Lcom/example/utils/Foo;"), "[LFoo;");
    let s = |s: &str| unqualify_signature(&parse_signature(s).unwrap()).to_string();
    assert_eq!(s("Ljava/util/List<Lcom/example/utils/Foo;>;"), "LList<LFoo;>;");
    assert_eq!(s("TT;"), "TT;");
    assert_eq!(s("<T:Lcom/example/Base;>()V"), "<T:LBase;>()V");
}

proptest! {
    #[test]
    fn simple_name_is_idempotent(n in internal_name()) {
        let once = simple_name(&n);
        prop_assert_eq!(simple_name(once), once);
        prop_assert!(!once.contains('/'));
    }

    #[test]
    fn descriptor_unqualification_is_idempotent(d in prop_oneof![field_descriptor(), method_descriptor()]) {
        let once = unqualify_descriptor(&parse_descriptor(&d).unwrap());
        prop_assert_eq!(unqualify_descriptor(&once), once.clone());
        prop_assert!(!once.to_string().contains('/'));
    }

    #[test]
    fn signature_unqualification_is_idempotent(s in prop_oneof![reference_signature(3), method_signature()]) {
        let once = unqualify_signature(&parse_signature(&s).unwrap());
        prop_assert_eq!(unqualify_signature(&once), once.clone());
        prop_assert!(!once.to_string().contains('/'));
        prop_assert_eq!(parse_signature(&once.to_string()).unwrap(), once);
    }

    #[test]
    fn relocating_a_name_and_back_restores_it(n in internal_name()) {
        let there = rules(&[("com/example", "org/shaded/x")]);
        let back = rules(&[("org/shaded/x", "com/example")]);
        let name = format!("com/example/{n}");
        let moved = unshade_core::unqualify::relocate_class_name(&name, &there);
        prop_assert_eq!(unshade_core::unqualify::relocate_class_name(&moved, &back), name);
    }
}
