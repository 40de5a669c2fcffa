//! A persisted corpus index: the vocabulary plus one HAL matrix per document.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::hal::{build_hal_matrix, HalMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pub window: usize,
    pub vocabulary: Vocabulary,
    pub matrices: Vec<HalMatrix>,
}

impl Index {
    /// Builds one matrix per document. Documents with no tokens are rejected.
    pub fn build(corpus: &Corpus, window: usize) -> Result<Index> {
        let dim = corpus.vocabulary.len();
        let matrices = corpus
            .documents
            .iter()
            .map(|doc| {
                build_hal_matrix(doc.id.as_str(), &doc.tokens, dim, window).map_err(|e| {
                    Error::Ingestion {
                        doc_id: doc.id.clone(),
                        reason: e.to_string(),
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Index {
            window,
            vocabulary: corpus.vocabulary.clone(),
            matrices,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Index> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let index: Index = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if let Some(m) = index.matrices.iter().find(|m| m.dim() != index.vocabulary.len()) {
            return Err(Error::Data(format!(
                "{}: matrix `{}` has dimension {} but the vocabulary has {} terms",
                path.display(),
                m.doc_id(),
                m.dim(),
                index.vocabulary.len()
            )));
        }
        Ok(index)
    }
}
