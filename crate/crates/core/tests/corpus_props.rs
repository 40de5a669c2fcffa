use halq::corpus::{build_vocabulary, normalize_text, tokenize, Corpus};
use proptest::prelude::*;

fn french_text() -> impl Strategy<Value = String> {
    let words = prop::sample::select(vec![
        "tomate", "tomates", "Fruit", "fruits", "légume", "Légumes", "chou", "choux", "bus",
        "l'ail", "chou-fleur", "42", "plante", "PLANTES", "a", "as",
    ]);
    let seps = prop::sample::select(vec![" ", ", ", ".\n\n", "; ", "?", "  ", "\t", "-"]);
    proptest::collection::vec((words, seps), 0..40)
        .prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
}

proptest! {
    #[test]
    fn token_count_matches_word_count(text in french_text()) {
        let normalized = normalize_text(&text);
        prop_assert_eq!(tokenize(&normalized).len(), normalized.split(' ').filter(|w| !w.is_empty()).count());
        prop_assert!(!normalized.contains("  "));
        prop_assert_eq!(normalize_text(&normalized), normalized.clone());
    }

    #[test]
    fn folding_is_idempotent(docs in proptest::collection::vec(french_text(), 1..4)) {
        let streams: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&normalize_text(d))).collect();
        prop_assume!(streams.iter().any(|s| !s.is_empty()));
        let v = build_vocabulary(&streams).unwrap();
        for token in streams.iter().flatten() {
            let once = v.fold(token);
            prop_assert_eq!(v.fold(&once), once.clone());
            prop_assert!(v.id(&once).is_some());
        }
        for (k, t) in v.terms().iter().enumerate() {
            prop_assert_eq!(v.id(t), Some(k as u32));
        }
    }

    #[test]
    fn ingestion_is_deterministic(docs in proptest::collection::vec(french_text(), 1..4)) {
        let texts: Vec<(String, String)> =
            docs.iter().enumerate().map(|(k, d)| (format!("d{k}"), d.clone())).collect();
        match (Corpus::from_texts(texts.clone()), Corpus::from_texts(texts)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.vocabulary, b.vocabulary);
                prop_assert_eq!(a.documents, b.documents);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "nondeterministic ingestion"),
        }
    }
}
