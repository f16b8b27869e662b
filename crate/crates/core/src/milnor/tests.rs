use proptest::prelude::*;

use num_traits::Signed;

use super::*;

fn word(s: &str) -> GroupWord {
    s.parse().unwrap()
}

fn bi(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Expansion by expanding every letter into its own series and multiplying
/// them all, with no shortcut through right multiplication.
fn expand_by_products(w: &GroupWord, q: usize) -> MagnusSeries {
    let mut acc = MagnusSeries::one(q);
    for l in &w.letters {
        let mut s = MagnusSeries::one(q);
        let mut m = Vec::new();
        for k in 1..=q {
            m.push(l.generator);
            let c = if l.exponent > 0 {
                if k > 1 {
                    break;
                }
                1
            } else if k % 2 == 0 {
                1
            } else {
                -1
            };
            s.coefficients.insert(m.clone(), bi(c));
        }
        acc = acc.mul(&s);
    }
    acc
}

#[test]
fn word_basics() {
    let w = word("m1 M2 m3");
    assert_eq!(w.to_string(), "m1 M2 m3");
    assert_eq!(w.inverse().to_string(), "M3 m2 M1");
    assert_eq!(w.inverse().inverse(), w);
    assert_eq!(word("m1m2M2M1").reduce(), GroupWord::identity());
    assert_eq!(word("1"), GroupWord::identity());
    assert_eq!(
        GroupWord::commutator(&word("m1"), &word("m2")),
        word("m1 m2 M1 M2")
    );
    assert_eq!(
        word("m1 m2 M1").substitute(1, &word("m3 m4")),
        word("m3 m4 m2 M4 M3")
    );
    assert!("m0".parse::<GroupWord>().is_err());
    assert!("x1".parse::<GroupWord>().is_err());
}

#[test]
fn expansion_examples() {
    let s = magnus_expand(&word("m1"), 3).unwrap();
    assert_eq!(s.to_string(), "1 + X1");
    let inv = magnus_expand(&word("M1"), 3).unwrap();
    assert_eq!(inv.to_string(), "1 - X1 + X1X1 - X1X1X1");
    assert!(magnus_expand(&word("m1 m2 M2 M1"), 4).unwrap().is_one());
    let c = magnus_expand(&word("m1 m2 M1 M2"), 2).unwrap();
    assert_eq!(c.to_string(), "1 + X1X2 - X2X1");
    assert!(matches!(
        magnus_expand(&word("m1"), 0),
        Err(MilnorError::ZeroTruncation)
    ));
}

#[test]
fn commutator_at_degree_two_matches_four_factors() {
    let q = 2;
    let x = expand_by_products(&word("m1"), q);
    let y = expand_by_products(&word("m2"), q);
    let xi = expand_by_products(&word("M1"), q);
    let yi = expand_by_products(&word("M2"), q);
    let direct = x.mul(&y).mul(&xi).mul(&yi);
    assert_eq!(direct, magnus_expand(&word("m1 m2 M1 M2"), q).unwrap());
}

#[test]
fn hopf_and_borromean_invariants() {
    let hopf = LinkPresentation::hopf();
    assert_eq!(mu_bar(&hopf, &[1, 2], 1).unwrap(), bi(1));
    assert_eq!(mu_bar(&hopf, &[2, 1], 1).unwrap(), bi(1));
    let borromean: LinkPresentation = "1: m2 m3 M2 M3\n2: m3 m1 M3 M1\n3: m1 m2 M1 M2".parse().unwrap();
    assert_eq!(mu_bar(&borromean, &[1, 2, 3], 2).unwrap(), bi(1));
    assert_eq!(mu_bar(&borromean, &[2, 1, 3], 2).unwrap(), bi(-1));
    for seq in [[1, 2], [2, 3], [3, 1]] {
        assert_eq!(mu_bar(&borromean, &seq, 2).unwrap(), bi(0));
    }
    let split = LinkPresentation::unlink(3);
    assert_eq!(mu_bar(&split, &[1, 2, 3], 2).unwrap(), bi(0));
    assert!(matches!(
        mu_bar(&hopf, &[1, 1], 2),
        Err(MilnorError::RepeatingSequence(_))
    ));
    assert!(matches!(
        mu_bar(&hopf, &[1, 3], 2),
        Err(MilnorError::UnknownComponent(3))
    ));
    assert!(matches!(
        mu_bar(&borromean, &[1, 2, 3], 1),
        Err(MilnorError::SequenceTooLong { .. })
    ));
}

#[test]
fn link_text_round_trip() {
    let text = "# Hopf\n1: m2\n\n2: m1\n";
    let l: LinkPresentation = text.parse().unwrap();
    assert_eq!(l, LinkPresentation::hopf());
    assert_eq!(l.to_string().parse::<LinkPresentation>().unwrap(), l);
    assert!(matches!(
        "1: m2\n1: m3".parse::<LinkPresentation>(),
        Err(MilnorError::DuplicateComponent(1))
    ));
}

#[test]
fn bing_double_of_hopf_is_borromean() {
    let l = bing_double(&LinkPresentation::hopf(), 1).unwrap();
    assert_eq!(l.len(), 3);
    assert!(l.is_non_repeating());
    assert_eq!(mu_bar(&l, &[1, 2, 3], 2).unwrap(), bi(1));
    // Cyclic rotations agree; transposing the first two entries flips sign.
    assert_eq!(mu_bar(&l, &[2, 3, 1], 2).unwrap(), bi(1));
    assert_eq!(mu_bar(&l, &[3, 1, 2], 2).unwrap(), bi(1));
    assert_eq!(mu_bar(&l, &[2, 1, 3], 2).unwrap(), bi(-1));
    for seq in [[1, 2], [2, 1], [1, 3], [3, 1], [2, 3], [3, 2]] {
        assert_eq!(mu_bar(&l, &seq, 2).unwrap(), bi(0));
    }
}

#[test]
fn doubling_a_split_component_stays_trivial() {
    let l = bing_double(&LinkPresentation::unlink(2), 1).unwrap();
    for seq in itertools::Itertools::permutations(1..=3usize, 3) {
        assert_eq!(mu_bar(&l, &seq, 3).unwrap(), bi(0));
    }
    for seq in itertools::Itertools::permutations(1..=3usize, 2) {
        assert_eq!(mu_bar(&l, &seq, 3).unwrap(), bi(0));
    }
}

#[test]
fn doubling_both_hopf_components() {
    let l = bing_double(&bing_double(&LinkPresentation::hopf(), 1).unwrap(), 2).unwrap();
    assert_eq!(l.len(), 4);
    let mut nonzero_len4 = 0;
    for len in 2..=4 {
        for seq in itertools::Itertools::permutations(1..=4usize, len) {
            let v = mu_bar(&l, &seq, 3).unwrap();
            if len < 4 {
                assert_eq!(v, bi(0), "{seq:?}");
            } else if !v.is_zero() {
                assert_eq!(v.abs(), bi(1));
                nonzero_len4 += 1;
                // A first nonvanishing invariant is invariant under rotation.
                let mut rot = seq.clone();
                rot.rotate_left(1);
                assert_eq!(mu_bar(&l, &rot, 3).unwrap(), v, "{seq:?}");
            }
        }
    }
    assert!(nonzero_len4 > 0);
}

#[test]
fn pattern_parsing() {
    let p: DoublingPattern = "(H (d 1) (d 1a))".parse().unwrap();
    assert_eq!(p.doublings, vec!["1", "1a"]);
    let nested: DoublingPattern = "(H (d 1 (d 1a)))".parse().unwrap();
    assert_eq!(nested, p);
    assert_eq!("H".parse::<DoublingPattern>().unwrap(), DoublingPattern::hopf());
    assert_eq!(p.to_string(), "(H (d 1) (d 1a))");
    assert!("(H (d 3))".parse::<DoublingPattern>().unwrap().build().is_err());
    assert!("(H (x 1))".parse::<DoublingPattern>().is_err());
    assert!("(H (d 1)".parse::<DoublingPattern>().is_err());
    let named = p.build().unwrap();
    assert_eq!(named.names, vec!["1aa", "2", "1b", "1ab"]);
    assert_eq!(named.name_of(4), Some("1ab"));
}

#[test]
fn certificate_examples() {
    let hopf = essentiality_certificate(&DoublingPattern::hopf(), 1).unwrap();
    assert_eq!((hopf.sequence, hopf.value), (vec![1, 2], 1));
    let one: DoublingPattern = "(H (d 1))".parse().unwrap();
    let c = essentiality_certificate(&one, 3).unwrap();
    assert_eq!((c.sequence.clone(), c.value), (vec![1, 2, 3], 1));
    assert!(matches!(
        essentiality_certificate(&one, 1),
        Err(MilnorError::NoCertificate { max_len: 2 })
    ));
    let same_side: DoublingPattern = "(H (d 1) (d 1a))".parse().unwrap();
    let c = essentiality_certificate(&same_side, 3).unwrap();
    assert_eq!(c.sequence.len(), 4);
    assert_eq!(c.value.abs(), 1);
}

#[test]
fn packed_expansion_matches_full_expansion() {
    let l = DoublingPattern {
        doublings: vec!["1".into(), "2".into(), "1a".into()],
    }
    .build()
    .unwrap()
    .link;
    for c in &l.components {
        let full = magnus_expand(&c.longitude, 4).unwrap();
        let packed = expand_nonrepeating(&c.longitude, 4).unwrap();
        let gens: Vec<usize> = l.meridians();
        let mut checked = 0;
        for len in 1..=4 {
            for m in itertools::Itertools::permutations(gens.iter().copied(), len) {
                let v = packed.get(&pack(&m).unwrap()).map_or(0, |t| t.coefficient);
                assert_eq!(full.coefficient(&m), BigInt::from(v), "{m:?}");
                assert_eq!(nonrepeating_coefficient(&c.longitude, &m), BigInt::from(v));
                checked += usize::from(v != 0);
            }
        }
        assert!(checked > 0);
    }
    assert_eq!(pack(&[1, 2]), Some(34));
    assert_eq!(pack(&[32]), None);
}

#[test]
fn pattern_enumeration_counts() {
    // Pairs of binary trees with n leaves in total: Catalan(n - 1).
    let counts: Vec<usize> = (2..=6).map(|n| DoublingPattern::enumerate(n).len()).collect();
    assert_eq!(counts, vec![1, 3, 8, 22, 64]);
}

#[test]
fn bing_cell_quotient() {
    let rel = RelationSystem::bing_cell_pair();
    assert!(rel.respects_forbidden(&[(1, 2), (3, 4), (5, 6), (7, 8)]));
    let v = quotient_nonvanishing(&rel, &RelationSystem::bing_cell_target(), 4).unwrap();
    assert!(v.nonzero);
    assert_eq!(v.witness.as_ref().unwrap().len(), 4);
    let mut full = rel.clone();
    for (i, j) in [(1, 2), (3, 4), (5, 6), (7, 8)] {
        full.add_commuting(i, j);
    }
    let v = quotient_nonvanishing(&full, &RelationSystem::bing_cell_target(), 4).unwrap();
    assert!(!v.nonzero);
    assert!(matches!(
        quotient_nonvanishing(&rel, &RelationSystem::bing_cell_target(), 3),
        Err(MilnorError::TruncationTooSmall { q: 3, needed: 4 })
    ));
}

#[test]
fn quotient_trivial_cases() {
    let empty = RelationSystem::default();
    let v = quotient_nonvanishing(&empty, &word("m1"), 4).unwrap();
    assert_eq!((v.nonzero, v.witness), (true, Some(vec![1])));
    let v = quotient_nonvanishing(&empty, &word("m1 M1"), 4).unwrap();
    assert!(!v.nonzero);
    // A commuting pair kills its commutator outright.
    let mut rel = RelationSystem::default();
    rel.add_commuting(1, 2);
    assert!(
        !quotient_nonvanishing(&rel, &word("m1 m2 M1 M2"), 4)
            .unwrap()
            .nonzero
    );
    // Identifying a generator with the identity kills it.
    let rel = RelationSystem {
        commuting: BTreeSet::new(),
        identifications: vec![(word("m1"), word("1"))],
    };
    assert!(!quotient_nonvanishing(&rel, &word("m1"), 4).unwrap().nonzero);
    assert!(quotient_nonvanishing(&rel, &word("m2"), 4).unwrap().nonzero);
    let many: GroupWord = (1..=9)
        .map(|i| format!("m{i}"))
        .collect::<Vec<_>>()
        .join(" ")
        .parse()
        .unwrap();
    assert!(matches!(
        quotient_nonvanishing(&empty, &many, 4),
        Err(MilnorError::TooManyGenerators { count: 9, .. })
    ));
}

#[test]
fn saturated_ideal_is_two_sided() {
    let rel = RelationSystem::bing_cell_pair();
    let alg = QuotientAlgebra::new(&rel, &BTreeSet::new(), 4).unwrap();
    assert!(alg.ideal_dimension() > 0);
    assert!(alg.ideal_is_two_sided());
}

fn letters(gens: usize, max: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec((1..=gens, prop::bool::ANY), 0..max).prop_map(|v| GroupWord {
        letters: v
            .into_iter()
            .map(|(g, p)| Letter {
                generator: g,
                exponent: if p { 1 } else { -1 },
            })
            .collect(),
    })
}

proptest! {
    #[test]
    fn expansion_is_multiplicative(u in letters(3, 8), v in letters(3, 8), q in 1usize..=5) {
        let uv = magnus_expand(&u.concat(&v), q).unwrap();
        let prod = magnus_expand(&u, q).unwrap().mul(&magnus_expand(&v, q).unwrap());
        prop_assert_eq!(&uv, &prod);
        prop_assert_eq!(uv, expand_by_products(&u.concat(&v), q));
    }

    #[test]
    fn expansion_ignores_free_reduction(u in letters(3, 12), q in 1usize..=5) {
        prop_assert_eq!(magnus_expand(&u, q).unwrap(), magnus_expand(&u.reduce(), q).unwrap());
        prop_assert_eq!(magnus_expand(&u, q).unwrap().coefficient(&[]), BigInt::one());
        prop_assert!(magnus_expand(&u.concat(&u.inverse()), q).unwrap().is_one());
    }

    #[test]
    fn length_two_invariant_is_exponent_sum(longitude in letters(4, 12), j in 2usize..=4) {
        let l = LinkPresentation::new(vec![
            LinkComponent { meridian: 1, longitude: longitude.clone() },
            LinkComponent { meridian: j, longitude: GroupWord::identity() },
        ]).unwrap();
        prop_assert_eq!(mu_bar(&l, &[j, 1], 1).unwrap(), BigInt::from(longitude.exponent_sum(j)));
    }

    #[test]
    fn adding_commuting_pairs_never_revives(
        pairs in prop::collection::btree_set((1usize..=4, 1usize..=4), 0..4),
        extra in (1usize..=4, 1usize..=4),
        target in letters(4, 10),
    ) {
        let mut rel = RelationSystem::default();
        for (i, j) in pairs { rel.add_commuting(i, j); }
        rel.identifications.push((word("m1 m2 M1 M2"), word("m3 m4 M3 M4")));
        let before = quotient_nonvanishing(&rel, &target, 4).unwrap().nonzero;
        rel.add_commuting(extra.0, extra.1);
        let after = quotient_nonvanishing(&rel, &target, 4).unwrap().nonzero;
        prop_assert!(before || !after);
    }
}
