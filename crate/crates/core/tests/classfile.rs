use proptest::prelude::*;
use unshade_core::classfile::{parse_class, parse_descriptor, parse_signature, MalformedClassFile};
use unshade_testkit::asm::ACC_PUBLIC;
use unshade_testkit::gen::{field_descriptor, method_descriptor, method_signature, reference_signature};
use unshade_testkit::{corpus, ClassBuilder, Layout};

#[test]
fn corpus_round_trips_losslessly() {
    let classes = corpus();
    assert!(classes.len() >= 30);
    for fixture in &classes {
        let bytes = fixture.bytes();
        let class = parse_class(&bytes).unwrap_or_else(|e| panic!("{}: {e}", fixture.internal_name));
        assert_eq!(class.to_bytes(), bytes, "{}", fixture.internal_name);
        assert_eq!(class.this_class_name(), fixture.internal_name);
    }
}

#[test]
fn pool_layout_variants_round_trip() {
    let layouts = [
        Layout { reverse: true, ..Layout::default() },
        Layout { duplicate_utf8: true, ..Layout::default() },
        Layout { extra_unused: vec!["unused".into(), "com/example/Nope".into()], ..Layout::default() },
        Layout { minor_version: 3, major_version: Some(65), ..Layout::default() },
    ];
    for fixture in corpus() {
        for layout in &layouts {
            let bytes = fixture.builder.build_with(layout);
            let class = parse_class(&bytes).unwrap_or_else(|e| panic!("{}: {e}", fixture.internal_name));
            assert_eq!(class.to_bytes(), bytes);
        }
    }
}

#[test]
fn foo_this_class_is_package_qualified() {
    let foo = corpus().into_iter().find(|c| c.internal_name == "com/example/utils/Foo").unwrap();
    let class = parse_class(&foo.bytes()).unwrap();
    assert_eq!(class.this_class_name(), "com/example/utils/Foo");
}

#[test]
fn empty_class_fixture_matches_committed_bytes() {
    let committed = include_bytes!("fixtures/classes/Empty.class");
    let class = parse_class(committed).unwrap();
    assert!(class.fields.is_empty());
    assert!(class.methods.is_empty());
    assert_eq!(class.this_class_name(), "Empty");
    assert_eq!(class.to_bytes(), committed.to_vec());
    let rebuilt = ClassBuilder::new("Empty").access(ACC_PUBLIC | 0x20).build();
    assert_eq!(rebuilt, committed.to_vec(), "assembler output drifted from the committed fixture");
}

#[test]
fn zero_prefix_is_bad_magic() {
    assert_eq!(parse_class(&[0, 0, 0, 0, 0, 0, 0, 0x34]), Err(MalformedClassFile::BadMagic(0)));
}

#[test]
fn every_truncation_of_a_fixture_is_rejected() {
    let bytes = corpus()[0].bytes();
    for len in 0..bytes.len() {
        assert!(parse_class(&bytes[..len]).is_err(), "prefix of length {len} accepted");
    }
    let mut extended = bytes.clone();
    extended.push(0);
    assert_eq!(parse_class(&extended), Err(MalformedClassFile::TrailingBytes(1)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn random_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_class(&bytes);
    }

    #[test]
    fn random_bytes_after_magic_never_panic(tail in proptest::collection::vec(any::<u8>(), 0..512)) {
        let mut bytes = vec![0xca, 0xfe, 0xba, 0xbe];
        bytes.extend(tail);
        if let Ok(c) = parse_class(&bytes) {
            prop_assert_eq!(c.to_bytes(), bytes);
        }
    }

    #[test]
    fn mutated_fixtures_never_panic(idx in 0usize..36, pos in any::<prop::sample::Index>(), val in any::<u8>()) {
        let mut bytes = corpus()[idx].bytes();
        let at = pos.index(bytes.len());
        bytes[at] = val;
        if let Ok(c) = parse_class(&bytes) {
            prop_assert_eq!(c.to_bytes(), bytes);
        }
    }
}

proptest! {
    #[test]
    fn field_descriptors_round_trip(d in field_descriptor()) {
        prop_assert_eq!(parse_descriptor(&d).unwrap().to_string(), d);
    }

    #[test]
    fn method_descriptors_round_trip(d in method_descriptor()) {
        prop_assert_eq!(parse_descriptor(&d).unwrap().to_string(), d);
    }

    #[test]
    fn reference_signatures_round_trip(s in reference_signature(4)) {
        prop_assert_eq!(parse_signature(&s).unwrap().to_string(), s);
    }

    #[test]
    fn method_signatures_round_trip(s in method_signature()) {
        prop_assert_eq!(parse_signature(&s).unwrap().to_string(), s);
    }

    #[test]
    fn arbitrary_strings_never_panic(s in "\\PC{0,40}") {
        let _ = parse_descriptor(&s);
        let _ = parse_signature(&s);
    }
}
