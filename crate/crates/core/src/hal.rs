//! Per-document HAL co-occurrence matrices.
//!
//! A window of length `l` slides over the token stream. Two occurrences at
//! distance `d <= l` add `l + 1 - d` to the pair, in both orientations, and
//! every occurrence adds `l + 1` to its own diagonal entry (the window is
//! widened to include the word itself). Order is discarded: the matrix is
//! symmetric and stored once per unordered pair.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::corpus::TermId;
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 10;

#[inline]
fn canonical(i: TermId, j: TermId) -> (TermId, TermId) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Weight of a pair at distance `d` for window `l`.
#[inline]
pub fn pair_weight(window: usize, distance: usize) -> f64 {
    debug_assert!(distance <= window);
    (window + 1 - distance) as f64
}

/// Symmetric sparse term×term matrix of one document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "HalMatrixRepr", into = "HalMatrixRepr")]
pub struct HalMatrix {
    doc_id: String,
    dim: usize,
    window: usize,
    /// Keyed by `(i, j)` with `i <= j`.
    entries: BTreeMap<(TermId, TermId), f64>,
    /// Column view derived from `entries`, each sorted by row id.
    columns: Vec<Vec<(TermId, f64)>>,
}

impl PartialEq for HalMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.doc_id == other.doc_id
            && self.dim == other.dim
            && self.window == other.window
            && self.entries == other.entries
    }
}

#[derive(Serialize, Deserialize)]
struct HalMatrixRepr {
    doc_id: String,
    dim: usize,
    window: usize,
    /// `(i, j, weight)` with `i <= j`, ascending.
    triplets: Vec<(TermId, TermId, f64)>,
}

impl From<HalMatrix> for HalMatrixRepr {
    fn from(m: HalMatrix) -> Self {
        HalMatrixRepr {
            triplets: m.entries.iter().map(|(&(i, j), &w)| (i, j, w)).collect(),
            doc_id: m.doc_id,
            dim: m.dim,
            window: m.window,
        }
    }
}

impl TryFrom<HalMatrixRepr> for HalMatrix {
    type Error = Error;

    fn try_from(r: HalMatrixRepr) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, j, w) in r.triplets {
            if i > j || (j as usize) >= r.dim {
                return Err(Error::Data(format!(
                    "document `{}`: bad triplet ({i}, {j}) for dimension {}",
                    r.doc_id, r.dim
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Data(format!(
                    "document `{}`: weight {w} at ({i}, {j}) is not a non-negative number",
                    r.doc_id
                )));
            }
            if entries.insert((i, j), w).is_some() {
                return Err(Error::Data(format!(
                    "document `{}`: duplicate triplet ({i}, {j})",
                    r.doc_id
                )));
            }
        }
        Ok(HalMatrix::from_entries(r.doc_id, r.dim, r.window, entries))
    }
}

fn check_args(tokens: &[TermId], dim: usize, window: usize) -> Result<()> {
    if window < 1 {
        return Err(Error::Argument("window length must be at least 1".into()));
    }
    if tokens.is_empty() {
        return Err(Error::Argument("token stream is empty".into()));
    }
    if let Some(&t) = tokens.iter().find(|&&t| t as usize >= dim) {
        return Err(Error::Argument(format!(
            "term id {t} out of range for dimension {dim}"
        )));
    }
    Ok(())
}

/// Builds the HAL matrix of `tokens` over a vocabulary of size `dim`.
pub fn build_hal_matrix(
    doc_id: impl Into<String>,
    tokens: &[TermId],
    dim: usize,
    window: usize,
) -> Result<HalMatrix> {
    check_args(tokens, dim, window)?;
    let mut acc: HashMap<(TermId, TermId), f64> = HashMap::new();
    let mut recent: VecDeque<TermId> = VecDeque::with_capacity(window);
    for &t in tokens {
        *acc.entry((t, t)).or_default() += pair_weight(window, 0);
        for (k, &prev) in recent.iter().rev().enumerate() {
            let w = pair_weight(window, k + 1);
            // both orientations land on the diagonal for a repeated word
            let add = if prev == t { 2.0 * w } else { w };
            *acc.entry(canonical(prev, t)).or_default() += add;
        }
        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back(t);
    }
    Ok(HalMatrix::from_entries(
        doc_id.into(),
        dim,
        window,
        acc.into_iter().collect(),
    ))
}

pub mod oracle {
    //! Reference HAL builder used to check [`super::build_hal_matrix`]:
    //! a dense double loop over every ordered position pair.

    use super::*;

    pub fn brute_force_hal(
        doc_id: impl Into<String>,
        tokens: &[TermId],
        dim: usize,
        window: usize,
    ) -> Result<HalMatrix> {
        check_args(tokens, dim, window)?;
        let mut dense = vec![vec![0.0f64; dim]; dim];
        let n = tokens.len();
        for p in 0..n {
            for q in 0..n {
                if q < p || q - p > window {
                    continue;
                }
                let w = (window + 1 - (q - p)) as f64;
                let (a, b) = (tokens[p] as usize, tokens[q] as usize);
                dense[a][b] += w;
                if p != q {
                    dense[b][a] += w;
                }
            }
        }
        let mut entries = BTreeMap::new();
        for (i, row) in dense.iter().enumerate() {
            for (j, &w) in row.iter().enumerate().skip(i) {
                assert_eq!(w, dense[j][i], "dense oracle lost symmetry");
                if w != 0.0 {
                    entries.insert((i as TermId, j as TermId), w);
                }
            }
        }
        Ok(HalMatrix::from_entries(doc_id.into(), dim, window, entries))
    }
}

impl HalMatrix {
    fn from_entries(
        doc_id: String,
        dim: usize,
        window: usize,
        entries: BTreeMap<(TermId, TermId), f64>,
    ) -> HalMatrix {
        let mut columns = vec![Vec::new(); dim];
        for (&(i, j), &w) in &entries {
            columns[j as usize].push((i, w));
            if i != j {
                columns[i as usize].push((j, w));
            }
        }
        for col in &mut columns {
            col.sort_unstable_by_key(|&(r, _)| r);
        }
        HalMatrix {
            doc_id,
            dim,
            window,
            entries,
            columns,
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of stored (unordered) pairs.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: TermId, j: TermId) -> f64 {
        self.entries.get(&canonical(i, j)).copied().unwrap_or(0.0)
    }

    /// Stored entries as `(i, j, weight)` with `i <= j`, ascending.
    pub fn triplets(&self) -> impl Iterator<Item = (TermId, TermId, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    /// Sparse column `term`; empty when the term does not occur.
    pub fn column(&self, term: TermId) -> Result<&[(TermId, f64)]> {
        self.columns
            .get(term as usize)
            .map(Vec::as_slice)
            .ok_or_else(|| self.out_of_range(term))
    }

    pub fn contains(&self, term: TermId) -> bool {
        self.columns.get(term as usize).is_some_and(|c| !c.is_empty())
    }

    /// Unit-normalized column `term`, or the zero vector for an absent term.
    pub fn context_vector(&self, term: TermId) -> Result<SemanticVector> {
        let column = self.column(term)?;
        let norm = column.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        let components = if norm > 0.0 {
            column.iter().map(|&(r, w)| (r, w / norm)).collect()
        } else {
            Vec::new()
        };
        Ok(SemanticVector {
            term,
            dim: self.dim,
            components,
        })
    }

    /// Every weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<HalMatrix> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Argument(format!("scale factor {factor} must be positive")));
        }
        let entries = self.entries.iter().map(|(&k, &w)| (k, w * factor)).collect();
        Ok(HalMatrix::from_entries(
            self.doc_id.clone(),
            self.dim,
            self.window,
            entries,
        ))
    }

    fn out_of_range(&self, term: TermId) -> Error {
        Error::Argument(format!(
            "term id {term} out of range for dimension {}",
            self.dim
        ))
    }
}

/// A context vector: unit Euclidean norm, or identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticVector {
    term: TermId,
    dim: usize,
    /// Non-zero components sorted by term id.
    components: Vec<(TermId, f64)>,
}

impl SemanticVector {
    pub fn term(&self) -> TermId {
        self.term
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[(TermId, f64)] {
        &self.components
    }

    pub fn component(&self, id: TermId) -> f64 {
        self.components
            .binary_search_by_key(&id, |&(r, _)| r)
            .map(|k| self.components[k].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|&(_, x)| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SemanticVector) -> f64 {
        let (mut a, mut b) = (self.components.iter(), other.components.iter());
        let (mut x, mut y) = (a.next(), b.next());
        let mut sum = 0.0;
        while let (Some(&(i, u)), Some(&(j, v))) = (x, y) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => x = a.next(),
                std::cmp::Ordering::Greater => y = b.next(),
                std::cmp::Ordering::Equal => {
                    sum += u * v;
                    x = a.next();
                    y = b.next();
                }
            }
        }
        sum
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(r, x) in &self.components {
            v[r as usize] = x;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::brute_force_hal;
    use super::*;

    // a=0, b=1, c=2
    fn abc() -> HalMatrix {
        build_hal_matrix("d", &[0, 1, 2], 3, 2).unwrap()
    }

    #[test]
    fn abc_window_two() {
        // frozen from brute_force_hal
        let m = abc();
        let expected = [[3.0, 2.0, 1.0], [2.0, 3.0, 2.0], [1.0, 2.0, 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), expected[i as usize][j as usize], "({i},{j})");
            }
        }
        assert_eq!(m, brute_force_hal("d", &[0, 1, 2], 3, 2).unwrap());
    }

    #[test]
    fn single_token() {
        let m = build_hal_matrix("d", &[0], 1, 5).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 6.0);
        assert_eq!(brute_force_hal("d", &[0], 1, 1).unwrap().get(0, 0), 2.0);
    }

    #[test]
    fn repeated_token_counts_both_orientations() {
        let m = build_hal_matrix("d", &[0, 0], 1, 1).unwrap();
        assert_eq!(m.get(0, 0), 6.0);
        assert_eq!(brute_force_hal("d", &[0, 0], 1, 1).unwrap().get(0, 0), 6.0);
    }

    #[test]
    fn bad_arguments() {
        assert!(matches!(build_hal_matrix("d", &[0], 1, 0), Err(Error::Argument(_))));
        assert!(matches!(build_hal_matrix("d", &[], 1, 2), Err(Error::Argument(_))));
        assert!(matches!(build_hal_matrix("d", &[3], 2, 2), Err(Error::Argument(_))));
        assert!(matches!(brute_force_hal("d", &[], 1, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn context_vector_examples() {
        let m = abc();
        let v = m.context_vector(0).unwrap();
        let s = 14f64.sqrt();
        assert_eq!(v.to_dense(), vec![3.0 / s, 2.0 / s, 1.0 / s]);

        let m = build_hal_matrix("d", &[0, 2], 4, 3).unwrap();
        assert!(m.context_vector(1).unwrap().is_zero());
        assert!(matches!(m.context_vector(4), Err(Error::Argument(_))));

        let m = build_hal_matrix("d", &[0], 2, 5).unwrap();
        assert_eq!(m.context_vector(0).unwrap().to_dense(), vec![1.0, 0.0]);
    }

    #[test]
    fn dot_matches_dense() {
        let m = build_hal_matrix("d", &[0, 3, 1, 0, 2, 3, 3, 1], 5, 3).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let (u, v) = (m.context_vector(i).unwrap(), m.context_vector(j).unwrap());
                let dense: f64 = u.to_dense().iter().zip(v.to_dense()).map(|(a, b)| a * b).sum();
                assert!((u.dot(&v) - dense).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn serde_round_trip_is_exact() {
        let m = build_hal_matrix("doc", &[0, 3, 1, 0, 2, 3, 3, 1], 5, 3).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: HalMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert_eq!(m.column(3).unwrap(), back.column(3).unwrap());
    }

    #[test]
    fn rejects_malformed_triplets() {
        let bad = r#"{"doc_id":"d","dim":2,"window":1,"triplets":[[1,0,2.0]]}"#;
        assert!(serde_json::from_str::<HalMatrix>(bad).is_err());
        let bad = r#"{"doc_id":"d","dim":2,"window":1,"triplets":[[0,0,-1.0]]}"#;
        assert!(serde_json::from_str::<HalMatrix>(bad).is_err());
    }
}
