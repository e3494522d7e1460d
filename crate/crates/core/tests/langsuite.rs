use ptlc::langsuite::{corpus, generate, membership, membership_str, reference_dfa, LangError, LanguageId};

#[test]
fn membership_examples() {
    assert!(membership_str(LanguageId::Dyck11, "abab").unwrap());
    assert!(membership_str(LanguageId::Last, "ab").unwrap());
    assert!(!membership_str(LanguageId::Last, "ba").unwrap());
    assert!(!membership_str(LanguageId::Cnt, "aab").unwrap());
    assert!(membership_str(LanguageId::Cnt, "aabb").unwrap());
    assert!(membership_str(LanguageId::Rdp1, "b1 a a b0").unwrap());
    assert!(membership_str(LanguageId::Ldp2, "b1 a1 b0 a2 b1").unwrap());
    assert!(membership_str(LanguageId::Cnt, "abc").is_err());
    assert!(membership(LanguageId::Parity, &[0, 5]).is_err());
}

#[test]
fn reference_dfas_agree_with_membership() {
    for id in LanguageId::ALL.into_iter().filter(|id| id.is_regular()) {
        let d = reference_dfa(id).unwrap();
        let max_len = if id.symbols().len() > 3 { 6 } else { 10 };
        for w in id.alphabet().shortlex(max_len) {
            assert_eq!(d.accepts(&w).unwrap(), membership(id, &w).unwrap(), "{id} on {w:?}");
        }
    }
}

#[test]
fn reference_dfa_sizes() {
    assert_eq!(reference_dfa(LanguageId::Ldp1).unwrap().num_states(), 2);
    assert_eq!(reference_dfa(LanguageId::Rdp1).unwrap().num_states(), 3);
    assert_eq!(reference_dfa(LanguageId::Ldp2).unwrap().num_states(), 3);
    assert_eq!(reference_dfa(LanguageId::Rdp1).unwrap().minimize().num_states(), 3);
    assert!(matches!(reference_dfa(LanguageId::Cnt), Err(LangError::NotRegular(_))));
}

#[test]
fn generator_examples() {
    let w = generate(LanguageId::Parity, 6, true, 1).unwrap();
    assert_eq!(w.len(), 6);
    assert_eq!(w.iter().filter(|&&s| s == 1).count() % 2, 0);
    assert!(generate(LanguageId::Dyck11, 5, true, 1).is_err());
    assert!(generate(LanguageId::Dyck11, 5, false, 1).is_err());
    for seed in 0..20 {
        let w = generate(LanguageId::Lt2, 10, true, seed).unwrap();
        assert_eq!(w.windows(2).filter(|p| *p == [0, 1]).count(), 1);
        let w = generate(LanguageId::Lt1, 10, true, seed).unwrap();
        assert_eq!(w.iter().filter(|&&s| s == 0).count(), 1);
    }
}

#[test]
fn generators_are_deterministic() {
    for id in LanguageId::ALL {
        for positive in [true, false] {
            assert_eq!(generate(id, 9, positive, 42).ok(), generate(id, 9, positive, 42).ok());
        }
    }
}

#[test]
fn adversarial_negatives_are_close_to_positives() {
    // CNT negatives drop exactly one symbol
    for seed in 0..10 {
        let w = generate(LanguageId::Cnt, 9, false, seed).unwrap();
        let a = w.iter().filter(|&&s| s == 0).count();
        assert_eq!(a.abs_diff(9 - a), 1);
    }
    // FIRST / LAST negatives flip the anchor
    assert_eq!(generate(LanguageId::First, 7, false, 3).unwrap()[0], 0);
    assert_eq!(generate(LanguageId::Last, 7, false, 3).unwrap()[6], 0);
}

#[test]
fn generator_oracle_agreement() {
    let mut total = 0;
    for id in LanguageId::ALL {
        let mut per_lang = 0;
        for len in 0..=60 {
            for positive in [true, false] {
                for seed in 0..9 {
                    match generate(id, len, positive, seed) {
                        Ok(w) => {
                            assert_eq!(w.len(), len);
                            assert_eq!(membership(id, &w).unwrap(), positive, "{id} len {len}");
                            per_lang += 1;
                        }
                        Err(LangError::Infeasible { .. }) => {}
                        Err(e) => panic!("{id}: {e}"),
                    }
                }
            }
        }
        assert!(per_lang >= 500, "{id}: only {per_lang} samples");
        total += per_lang;
    }
    println!("generator/oracle agreement on {total} samples");
}

#[test]
fn corpus_jsonl_shape() {
    let c = corpus(LanguageId::Ldp2, &[4, 5], 3, 7);
    assert_eq!(c.len(), 12);
    let line = serde_json::to_string(&c[0]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    for key in ["lang", "string", "label", "seed"] {
        assert!(v.get(key).is_some(), "{line}");
    }
    assert_eq!(v["lang"], "LDP2");
    assert_eq!(c[0].length(), 4);
    assert_eq!(c[0].to_tsv().split('\t').count(), 4);
}

#[test]
fn reference_formulas_define_the_languages() {
    use ptlc::langsuite::reference_ptl;
    use ptlc::logic::{satisfies_ltl, Mode};
    for id in LanguageId::ALL {
        let Some(phi) = reference_ptl(id) else {
            assert_ne!(id.expected_class(), Some("left-deterministic polynomial"), "{id}");
            continue;
        };
        assert!(phi.is_ptl());
        let max_len = if id.symbols().len() > 3 { 6 } else { 9 };
        for w in id.alphabet().shortlex(max_len) {
            assert_eq!(
                satisfies_ltl(&phi, &id.alphabet(), &w, Mode::AfterEnd).unwrap(),
                membership(id, &w).unwrap(),
                "{id} {w:?}"
            );
        }
    }
}
