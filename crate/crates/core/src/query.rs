//! Contextual queries over a document's HAL matrix.
//!
//! `A AND B` (`ET`) scores the scalar product of the two unit context
//! vectors. `A WITHOUT B` (`SANS`) removes the component of `u_A` along `u_B`
//! and scores the squared norm of what is left. The refined WITHOUT further
//! reduces the residual along words strongly correlated with `B`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{TermId, Vocabulary};
use crate::error::{Error, Result};
use crate::hal::{HalMatrix, SemanticVector};

pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    And,
    Without,
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_uppercase().as_str() {
            "ET" | "AND" => Ok(Operator::And),
            "SANS" | "WITHOUT" => Ok(Operator::Without),
            _ => Err(Error::Argument(format!(
                "unknown operator `{s}` (expected ET, SANS, AND or WITHOUT)"
            ))),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::And => "ET",
            Operator::Without => "SANS",
        })
    }
}

/// Two terms joined by one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub operator: Operator,
    pub left: String,
    pub right: String,
    /// Only meaningful for WITHOUT.
    pub refined: bool,
    pub tau: f64,
}

impl Query {
    pub fn new(operator: Operator, left: impl Into<String>, right: impl Into<String>) -> Query {
        Query {
            operator,
            left: left.into(),
            right: right.into(),
            refined: false,
            tau: DEFAULT_TAU,
        }
    }

    pub fn refined(mut self, tau: f64) -> Query {
        self.refined = true;
        self.tau = tau;
        self
    }

    /// Parses `"tomate ET fruit"` style queries.
    pub fn parse(text: &str) -> Result<Query> {
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            [left, op, right] => Ok(Query::new(op.parse()?, *left, *right)),
            _ => Err(Error::Argument(format!(
                "query `{text}` must have the form `<term> ET|SANS <term>`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryScore {
    pub doc_id: String,
    pub score: f64,
}

/// Documents in descending score order, ties by ascending `doc_id`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub query: Query,
    pub scores: Vec<QueryScore>,
    /// Query words that are not in the corpus vocabulary.
    pub warnings: Vec<String>,
}

fn vector_or_zero(matrix: &HalMatrix, term: Option<TermId>) -> Result<Option<SemanticVector>> {
    term.map(|t| matrix.context_vector(t)).transpose()
}

fn and_of(ui: Option<&SemanticVector>, uj: Option<&SemanticVector>) -> f64 {
    match (ui, uj) {
        (Some(a), Some(b)) => a.dot(b).clamp(0.0, 1.0),
        _ => 0.0,
    }
}

/// Residual `u_i - <u_i|u_j> u_j` as a dense vector, with the overlap.
fn residual(ui: &SemanticVector, uj: &SemanticVector) -> (Vec<f64>, f64) {
    let mut x = ui.to_dense();
    let overlap = ui.dot(uj);
    for &(r, c) in uj.components() {
        x[r as usize] -= overlap * c;
    }
    (x, overlap)
}

fn squared_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn without_of(ui: Option<&SemanticVector>, uj: Option<&SemanticVector>) -> f64 {
    match (ui, uj) {
        (Some(ui), _) if ui.is_zero() => 0.0,
        (None, _) => 0.0,
        (Some(ui), Some(uj)) if !uj.is_zero() => squared_norm(&residual(ui, uj).0).clamp(0.0, 1.0),
        // nothing to project out
        _ => 1.0,
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::Argument(format!("tau {tau} must lie in [0, 1]")))
    }
}

fn refined_of(
    matrix: &HalMatrix,
    i: Option<TermId>,
    j: Option<TermId>,
    tau: f64,
) -> Result<f64> {
    check_tau(tau)?;
    let ui = match vector_or_zero(matrix, i)? {
        Some(v) if !v.is_zero() => v,
        _ => return Ok(0.0),
    };
    let uj = vector_or_zero(matrix, j)?;
    let Some(uj) = uj.filter(|v| !v.is_zero()) else {
        return Ok(1.0);
    };
    let (mut x, overlap) = residual(&ui, &uj);

    let mut related = Vec::new();
    for w in 0..matrix.dim() as TermId {
        if Some(w) == i || Some(w) == j || !matrix.contains(w) {
            continue;
        }
        let uw = matrix.context_vector(w)?;
        let rho = uj.dot(&uw);
        if rho >= tau {
            related.push((rho, uw));
        }
    }
    related.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.term().cmp(&b.1.term())));

    for (rho, uw) in &related {
        let along: f64 = uw.components().iter().map(|&(r, c)| x[r as usize] * c).sum();
        let k = overlap * rho * along;
        for &(r, c) in uw.components() {
            x[r as usize] -= k * c;
        }
    }
    Ok(squared_norm(&x).clamp(0.0, 1.0))
}

/// Scalar product of the unit context vectors of `i` and `j`.
pub fn score_and(matrix: &HalMatrix, i: TermId, j: TermId) -> Result<f64> {
    let ui = matrix.context_vector(i)?;
    let uj = matrix.context_vector(j)?;
    Ok(and_of(Some(&ui), Some(&uj)))
}

/// Squared norm of `u_i` after projecting out `u_j`: 0 when `i` is absent,
/// 1 when only `j` is absent.
pub fn score_without(matrix: &HalMatrix, i: TermId, j: TermId) -> Result<f64> {
    let ui = matrix.context_vector(i)?;
    let uj = matrix.context_vector(j)?;
    Ok(without_of(Some(&ui), Some(&uj)))
}

/// WITHOUT with the correlation-weighted refinement.
///
/// Starting from `X = u_i - s u_j` with `s = <u_i|u_j>`, every other present
/// term `w` with `rho_w = <u_j|u_w> >= tau` is visited in descending `rho_w`
/// (ties by term id) and `X <- X - s rho_w <X|u_w> u_w`. Each step scales the
/// component along `u_w` by `1 - s rho_w`, which lies in `[0, 1]`, so the
/// result never exceeds [`score_without`].
pub fn score_without_refined(matrix: &HalMatrix, i: TermId, j: TermId, tau: f64) -> Result<f64> {
    matrix.column(i)?;
    matrix.column(j)?;
    refined_of(matrix, Some(i), Some(j), tau)
}

/// Scores one document for a query whose terms were already resolved; an
/// unresolved term behaves as a zero vector.
pub fn score_query(
    matrix: &HalMatrix,
    query: &Query,
    left: Option<TermId>,
    right: Option<TermId>,
) -> Result<f64> {
    let ui = vector_or_zero(matrix, left)?;
    let uj = vector_or_zero(matrix, right)?;
    match query.operator {
        Operator::And => Ok(and_of(ui.as_ref(), uj.as_ref())),
        Operator::Without if query.refined => refined_of(matrix, left, right, query.tau),
        Operator::Without => Ok(without_of(ui.as_ref(), uj.as_ref())),
    }
}

pub fn rank_documents(
    index: &[HalMatrix],
    vocabulary: &Vocabulary,
    query: &Query,
) -> Result<Ranking> {
    if index.is_empty() {
        return Err(Error::Argument("cannot rank an empty index".into()));
    }
    if query.refined {
        check_tau(query.tau)?;
    }
    let mut warnings = Vec::new();
    let mut resolve = |word: &str| {
        let id = vocabulary.resolve(word);
        if id.is_none() {
            warnings.push(format!("term `{word}` is not in the corpus vocabulary; scoring it as a zero vector"));
        }
        id
    };
    let left = resolve(&query.left);
    let right = resolve(&query.right);

    let mut scores = index
        .iter()
        .map(|m| {
            Ok(QueryScore {
                doc_id: m.doc_id().to_string(),
                score: score_query(m, query, left, right)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_scores(&mut scores);
    Ok(Ranking {
        query: query.clone(),
        scores,
        warnings,
    })
}

pub fn sort_scores(scores: &mut [QueryScore]) {
    scores.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::hal::build_hal_matrix;

    fn abc() -> HalMatrix {
        build_hal_matrix("d", &[0, 1, 2], 3, 2).unwrap()
    }

    #[test]
    fn and_example() {
        let s = score_and(&abc(), 0, 1).unwrap();
        assert!((s - 14.0 / 238f64.sqrt()).abs() < 1e-15);
        assert!((s - 0.9075).abs() < 1e-4);
        assert!((score_and(&abc(), 2, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn and_absent_is_zero() {
        let m = build_hal_matrix("d", &[0, 2], 3, 2).unwrap();
        assert_eq!(score_and(&m, 1, 0).unwrap(), 0.0);
        assert_eq!(score_and(&m, 0, 1).unwrap(), 0.0);
        assert!(matches!(score_and(&m, 0, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn without_examples() {
        let m = abc();
        let s = score_without(&m, 0, 1).unwrap();
        assert!((s - (1.0 - 196.0 / 238.0)).abs() < 1e-12);
        assert!((s - 0.1765).abs() < 1e-4);
        assert!(score_without(&m, 1, 1).unwrap() < 1e-12);

        let m = build_hal_matrix("d", &[0, 2], 3, 2).unwrap();
        assert_eq!(score_without(&m, 0, 1).unwrap(), 1.0);
        assert_eq!(score_without(&m, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn refined_example() {
        let m = abc();
        // reference loop: the only related term is c with rho = 14/sqrt(238)
        let r = score_without_refined(&m, 0, 1, 0.0).unwrap();
        assert!((r - 0.1649080556301495).abs() < 1e-12);
        assert!(r <= score_without(&m, 0, 1).unwrap());
        assert_eq!(
            score_without_refined(&m, 0, 1, 1.0).unwrap(),
            score_without(&m, 0, 1).unwrap()
        );
    }

    #[test]
    fn refined_edge_cases() {
        let m = build_hal_matrix("d", &[0, 2], 3, 2).unwrap();
        assert_eq!(score_without_refined(&m, 1, 0, 0.5).unwrap(), 0.0);
        assert_eq!(score_without_refined(&m, 0, 1, 0.0).unwrap(), 1.0);
        assert!(matches!(score_without_refined(&m, 0, 2, 1.5), Err(Error::Argument(_))));
        assert!(matches!(score_without_refined(&m, 0, 2, -0.1), Err(Error::Argument(_))));
        assert!(matches!(score_without_refined(&m, 0, 2, f64::NAN), Err(Error::Argument(_))));
    }

    #[test]
    fn operator_parsing() {
        assert_eq!("ET".parse::<Operator>().unwrap(), Operator::And);
        assert_eq!("sans".parse::<Operator>().unwrap(), Operator::Without);
        assert_eq!("WITHOUT".parse::<Operator>().unwrap(), Operator::Without);
        assert!("OU".parse::<Operator>().is_err());
        let q = Query::parse("Tomate SANS Légume").unwrap();
        assert_eq!((q.left.as_str(), q.right.as_str()), ("Tomate", "Légume"));
        assert!(Query::parse("tomate ET").is_err());
    }

    fn ranked(scores: &[(&str, f64)]) -> Vec<String> {
        let mut v: Vec<QueryScore> = scores
            .iter()
            .map(|&(d, s)| QueryScore { doc_id: d.into(), score: s })
            .collect();
        sort_scores(&mut v);
        v.into_iter().map(|s| s.doc_id).collect()
    }

    #[test]
    fn ranking_order_and_ties() {
        // Tomate ET Fruit column of the three-document table
        assert_eq!(ranked(&[("doc2", 0.581), ("doc3", 0.373), ("doc1", 0.788)]), ["doc1", "doc2", "doc3"]);
        assert_eq!(ranked(&[("b", 0.5), ("a", 0.5)]), ["a", "b"]);
    }

    #[test]
    fn rank_documents_warns_on_unknown_terms() {
        let c = Corpus::from_texts([("d2", "tomate fruit rouge"), ("d1", "tomate légume vert")]).unwrap();
        let mats: Vec<_> = c
            .documents
            .iter()
            .map(|d| build_hal_matrix(d.id.as_str(), &d.tokens, c.vocabulary.len(), 2).unwrap())
            .collect();
        let r = rank_documents(&mats, &c.vocabulary, &Query::new(Operator::And, "Tomates", "fruit")).unwrap();
        assert!(r.warnings.is_empty());
        assert_eq!(r.scores[0].doc_id, "d2");
        assert_eq!(r.scores[1].score, 0.0);

        let r = rank_documents(&mats, &c.vocabulary, &Query::new(Operator::Without, "tomate", "poivre")).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.scores.iter().all(|s| s.score == 1.0));
        assert_eq!(r.scores[0].doc_id, "d1");

        let single = rank_documents(&mats[..1], &c.vocabulary, &Query::new(Operator::And, "x", "y")).unwrap();
        assert_eq!(single.scores.len(), 1);
        assert!(rank_documents(&[], &c.vocabulary, &Query::new(Operator::And, "x", "y")).is_err());
    }
}
