//! Text ingestion: normalization, tokenization, singular/plural folding and
//! the shared vocabulary that indexes every HAL matrix of a corpus.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TermId = u32;

/// A combining diacritical mark left over from decomposed input
/// (e.g. `e` + U+0301). Kept attached to its base letter.
fn is_combining_mark(c: char) -> bool {
    matches!(c, '\u{0300}'..='\u{036F}' | '\u{1AB0}'..='\u{1AFF}' | '\u{1DC0}'..='\u{1DFF}')
}

/// Lowercases `raw`, replaces every punctuation or line break with a space and
/// collapses runs of whitespace. Letters keep their diacritics and digits are
/// kept, so `"Légume;Fruit"` becomes `"légume fruit"`.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if c.is_alphanumeric() || (is_combining_mark(c) && !pending_space && !out.is_empty()) {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// Decodes a document's bytes, naming the document on invalid UTF-8.
pub fn decode_document(doc_id: &str, bytes: Vec<u8>) -> Result<String> {
    String::from_utf8(bytes).map_err(|e| Error::Ingestion {
        doc_id: doc_id.to_string(),
        reason: format!("invalid UTF-8 at byte {}", e.utf8_error().valid_up_to()),
    })
}

pub fn tokenize(normalized: &str) -> Vec<String> {
    normalized.split_whitespace().map(str::to_string).collect()
}

/// Stem of a regular plural: the token minus a final `s`/`x`, provided the
/// stem keeps at least three characters.
fn plural_stem(token: &str) -> Option<&str> {
    let last = token.chars().last()?;
    if last != 's' && last != 'x' {
        return None;
    }
    let stem = &token[..token.len() - 1];
    (stem.chars().count() >= 3).then_some(stem)
}

/// The term basis of a corpus.
///
/// Canonical terms get dense ids in order of first appearance. `fold_table`
/// maps every surface form seen during construction to its canonical term,
/// canonical terms included (mapped to themselves).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, TermId>,
    fold_table: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    fold_table: BTreeMap<String, String>,
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            fold_table: v.fold_table,
        }
    }
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(repr: VocabularyRepr) -> Result<Self> {
        let mut ids = HashMap::with_capacity(repr.terms.len());
        for (i, t) in repr.terms.iter().enumerate() {
            if ids.insert(t.clone(), i as TermId).is_some() {
                return Err(Error::Data(format!("duplicate vocabulary term `{t}`")));
            }
        }
        for (surface, canonical) in &repr.fold_table {
            if !ids.contains_key(canonical) {
                return Err(Error::Data(format!(
                    "fold table maps `{surface}` to unknown term `{canonical}`"
                )));
            }
        }
        Ok(Vocabulary {
            terms: repr.terms,
            ids,
            fold_table: repr.fold_table,
        })
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: TermId) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, canonical: &str) -> Option<TermId> {
        self.ids.get(canonical).copied()
    }

    pub fn fold_table(&self) -> &BTreeMap<String, String> {
        &self.fold_table
    }

    /// Folds a surface token onto its canonical term. Tokens seen during
    /// construction use the recorded fold; unseen tokens get the plural rule
    /// against the canonical terms, or come back unchanged.
    pub fn fold(&self, token: &str) -> String {
        if let Some(canonical) = self.fold_table.get(token) {
            return canonical.clone();
        }
        match plural_stem(token) {
            Some(stem) if self.ids.contains_key(stem) => stem.to_string(),
            _ => token.to_string(),
        }
    }

    /// Normalizes and folds a query word, then looks it up.
    pub fn resolve(&self, word: &str) -> Option<TermId> {
        self.id(&self.fold(&normalize_text(word)))
    }
}

/// Free-function form of [`Vocabulary::fold`].
pub fn fold_morphology(token: &str, vocabulary: &Vocabulary) -> String {
    vocabulary.fold(token)
}

/// Builds the vocabulary from per-document surface token streams.
///
/// All surface forms are collected first and decided shortest-first, so a
/// singular is always registered before its plural is considered, whatever
/// order they appear in the text.
pub fn build_vocabulary<S: AsRef<str>>(documents: &[Vec<S>]) -> Result<Vocabulary> {
    let mut surface: Vec<&str> = documents
        .iter()
        .flatten()
        .map(AsRef::as_ref)
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    if surface.is_empty() {
        return Err(Error::Config("corpus contains no tokens".into()));
    }
    surface.sort_by(|a, b| a.chars().count().cmp(&b.chars().count()).then(a.cmp(b)));

    let mut canonical: HashSet<&str> = HashSet::new();
    let mut fold_table = BTreeMap::new();
    for token in surface {
        let target = match plural_stem(token) {
            Some(stem) if canonical.contains(stem) => stem,
            _ => {
                canonical.insert(token);
                token
            }
        };
        fold_table.insert(token.to_string(), target.to_string());
    }

    let mut terms = Vec::new();
    let mut ids = HashMap::new();
    for token in documents.iter().flatten() {
        let c = &fold_table[token.as_ref()];
        if !ids.contains_key(c) {
            ids.insert(c.clone(), terms.len() as TermId);
            terms.push(c.clone());
        }
    }
    Ok(Vocabulary {
        terms,
        ids,
        fold_table,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub raw_text: String,
    pub tokens: Vec<TermId>,
}

/// One entry of a corpus manifest. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocabulary: Vocabulary,
    pub documents: Vec<Document>,
}

impl Corpus {
    /// Ingests `(id, raw_text)` pairs.
    pub fn from_texts<I, A, B>(texts: I) -> Result<Corpus>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let raw: Vec<(String, String)> = texts
            .into_iter()
            .map(|(id, text)| (id.into(), text.into()))
            .collect();
        if raw.is_empty() {
            return Err(Error::Config("corpus has no documents".into()));
        }
        let surface: Vec<Vec<String>> = raw
            .iter()
            .map(|(_, text)| tokenize(&normalize_text(text)))
            .collect();
        let vocabulary = build_vocabulary(&surface)?;
        let documents = raw
            .into_iter()
            .zip(surface)
            .map(|((id, raw_text), tokens)| Document {
                id,
                raw_text,
                tokens: tokens
                    .iter()
                    .map(|t| vocabulary.id(&vocabulary.fold(t)).expect("folded token in vocabulary"))
                    .collect(),
            })
            .collect();
        Ok(Corpus {
            vocabulary,
            documents,
        })
    }

    pub fn from_manifest(path: &Path) -> Result<Corpus> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let entries: Vec<ManifestEntry> = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if entries.is_empty() {
            return Err(Error::Config(format!("{}: manifest lists no documents", path.display())));
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut texts = Vec::with_capacity(entries.len());
        for entry in entries {
            let doc_path = base.join(&entry.path);
            let bytes = fs::read(&doc_path).map_err(|e| Error::io(&doc_path, e))?;
            let text = decode_document(&entry.id, bytes)?;
            texts.push((entry.id, text));
        }
        Corpus::from_texts(texts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("La tomate, un fruit?\n\nOui."), "la tomate un fruit oui");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("Légume;Fruit"), "légume fruit");
    }

    #[test]
    fn normalize_splits_apostrophes_and_hyphens() {
        assert_eq!(normalize_text("l'ail chou-fleur"), "l ail chou fleur");
        assert_eq!(normalize_text("  12 tomates\t"), "12 tomates");
    }

    #[test]
    fn normalize_keeps_decomposed_accents() {
        assert_eq!(normalize_text("Le\u{0301}gume"), "le\u{0301}gume");
    }

    #[test]
    fn invalid_utf8_names_document() {
        let err = decode_document("doc7", vec![0x61, 0xff, 0x62]).unwrap_err();
        assert!(err.to_string().contains("doc7"));
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("la tomate un fruit"), toks(&["la", "tomate", "un", "fruit"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize(" a  b "), toks(&["a", "b"]));
    }

    #[test]
    fn fold_examples() {
        let v = build_vocabulary(&[toks(&["tomate", "bus", "fruit"])]).unwrap();
        assert_eq!(fold_morphology("tomates", &v), "tomate");
        assert_eq!(fold_morphology("tomate", &v), "tomate");
        assert_eq!(fold_morphology("bus", &v), "bus");
        // stem too short
        assert_eq!(fold_morphology("ais", &v), "ais");
    }

    #[test]
    fn vocabulary_folds_plurals() {
        let v = build_vocabulary(&[toks(&["tomate", "tomates", "fruit"])]).unwrap();
        assert_eq!(v.terms(), &toks(&["tomate", "fruit"])[..]);
        assert_eq!(v.fold_table()["tomates"], "tomate");
    }

    #[test]
    fn plural_before_singular_still_folds() {
        let v = build_vocabulary(&[toks(&["choux", "fruits"]), toks(&["fruit", "chou"])]).unwrap();
        assert_eq!(v.terms(), &toks(&["chou", "fruit"])[..]);
    }

    #[test]
    fn vocabulary_union_first_appearance() {
        let v = build_vocabulary(&[toks(&["a", "b"]), toks(&["b", "c"])]).unwrap();
        assert_eq!(v.terms(), &toks(&["a", "b", "c"])[..]);
        assert_eq!(v.id("c"), Some(2));
    }

    #[test]
    fn empty_corpus_is_config_error() {
        let empty: Vec<Vec<String>> = vec![vec![]];
        assert!(matches!(build_vocabulary(&empty), Err(Error::Config(_))));
        assert!(matches!(
            Corpus::from_texts(Vec::<(String, String)>::new()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fold_table_is_idempotent() {
        let v = build_vocabulary(&[toks(&["fruits", "fruit", "tomates", "tomate", "bus", "choux"])])
            .unwrap();
        for canonical in v.fold_table().values() {
            assert_eq!(&v.fold(canonical), canonical);
        }
    }

    #[test]
    fn corpus_tokens_reference_vocabulary() {
        let c = Corpus::from_texts([("d1", "Les tomates; la tomate."), ("d2", "Un fruit")]).unwrap();
        assert_eq!(c.documents[0].tokens, vec![0, 1, 2, 1]);
        assert_eq!(c.vocabulary.resolve("Tomates"), Some(1));
        assert_eq!(c.vocabulary.resolve("poivre"), None);
    }

    #[test]
    fn vocabulary_serde_round_trip() {
        let v = build_vocabulary(&[toks(&["tomate", "tomates", "fruit"])]).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(v, back);
        assert_eq!(back.id("fruit"), Some(1));
    }
}
