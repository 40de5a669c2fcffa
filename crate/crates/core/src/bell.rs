//! Quantum-likeness analytics on score tables.
//!
//! Everything here works on the unit scale: poll data given on a 0..scale
//! range is divided by its scale when loaded.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound of the classical (local) regime.
pub const CLASSICAL_BOUND: f64 = 2.0;
/// Cirel'son bound, `2√2`.
pub const CIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Absolute tolerance of the regime boundaries.
pub const REGIME_TOLERANCE: f64 = 1e-9;

fn check_unit(name: &str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::Data(format!("{name} = {x} is outside [0, 1]")))
    }
}

/// Mean of `responses` divided by `scale`.
pub fn mean_score(responses: &[f64], scale: f64) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Data(format!("scale {scale} must be positive")));
    }
    if responses.is_empty() {
        return Err(Error::Data("no responses to average".into()));
    }
    if let Some(r) = responses.iter().find(|r| !(0.0..=scale).contains(*r)) {
        return Err(Error::Data(format!("response {r} is outside [0, {scale}]")));
    }
    Ok(responses.iter().sum::<f64>() / responses.len() as f64 / scale)
}

/// Aggregated membership of one object in categories A, B and "A or B".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollRecord {
    pub object: String,
    pub mu_a: f64,
    pub mu_b: f64,
    pub mu_a_or_b: f64,
}

impl PollRecord {
    pub fn new(object: impl Into<String>, mu_a: f64, mu_b: f64, mu_a_or_b: f64) -> Result<Self> {
        let r = PollRecord {
            object: object.into(),
            mu_a,
            mu_b,
            mu_a_or_b,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = |e: Error| match e {
            Error::Data(m) => Error::Data(format!("`{}`: {m}", self.object)),
            other => other,
        };
        check_unit("mu_a", self.mu_a).map_err(ctx)?;
        check_unit("mu_b", self.mu_b).map_err(ctx)?;
        check_unit("mu_a_or_b", self.mu_a_or_b).map_err(ctx)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionFlag {
    /// μ(A or B) above both memberships.
    Over,
    /// μ(A or B) below both memberships.
    Sub,
    Normal,
}

impl fmt::Display for ExtensionFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtensionFlag::Over => "over",
            ExtensionFlag::Sub => "sub",
            ExtensionFlag::Normal => "normal",
        })
    }
}

/// Decomposition of μ(A or B) into the classical average plus an
/// interference term `c √(μA μB) cos φ`. Only the product `c cos φ` is
/// identifiable from one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceReport {
    pub object: String,
    pub classical_average: f64,
    pub interference_term: f64,
    /// `cos φ` assuming `c = 1`; `None` when `μA μB = 0`.
    pub cos_phi_unit_c: Option<f64>,
    /// Smallest `c` keeping `|cos φ| <= 1`; `None` when `μA μB = 0`.
    pub required_c: Option<f64>,
    pub extension_flag: ExtensionFlag,
}

impl InterferenceReport {
    /// Rebuilds μ(A or B) from the decomposition.
    pub fn reconstruct(&self, record: &PollRecord) -> Option<f64> {
        let amplitude = (record.mu_a * record.mu_b).sqrt();
        let c = self.required_c?;
        Some(self.classical_average + c * amplitude * self.interference_term.signum())
    }
}

pub fn interference_analysis(record: &PollRecord) -> Result<InterferenceReport> {
    record.validate()?;
    let classical_average = (record.mu_a + record.mu_b) / 2.0;
    let interference_term = record.mu_a_or_b - classical_average;
    let amplitude = (record.mu_a * record.mu_b).sqrt();
    let (cos_phi_unit_c, required_c) = if amplitude > 0.0 {
        (
            Some(interference_term / amplitude),
            Some(interference_term.abs() / amplitude),
        )
    } else {
        (None, None)
    };
    let extension_flag = if record.mu_a_or_b > record.mu_a.max(record.mu_b) {
        ExtensionFlag::Over
    } else if record.mu_a_or_b < record.mu_a.min(record.mu_b) {
        ExtensionFlag::Sub
    } else {
        ExtensionFlag::Normal
    };
    Ok(InterferenceReport {
        object: record.object.clone(),
        classical_average,
        interference_term,
        cos_phi_unit_c,
        required_c,
        extension_flag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Classical,
    Quantum,
    BeyondCirelson,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Classical => "classical",
            Regime::Quantum => "quantum",
            Regime::BeyondCirelson => "beyond_cirelson",
        })
    }
}

/// `s <= 2` classical, `2 < s <= 2√2` quantum, above that beyond Cirel'son.
pub fn classify_regime(s: f64) -> Result<Regime> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Argument(format!("Bell parameter {s} must be non-negative")));
    }
    Ok(if s <= CLASSICAL_BOUND + REGIME_TOLERANCE {
        Regime::Classical
    } else if s <= CIRELSON_BOUND + REGIME_TOLERANCE {
        Regime::Quantum
    } else {
        Regime::BeyondCirelson
    })
}

/// Which Bell formula produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellFormula {
    Poll,
    HalPrinted,
    HalTable,
}

impl fmt::Display for BellFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellFormula::Poll => "poll",
            BellFormula::HalPrinted => "hal-printed",
            BellFormula::HalTable => "hal-table",
        })
    }
}

/// Sign convention for the second term of the HAL Bell parameter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalVariant {
    /// `|E(x_af) - E(x_al)| + |E(x_bf) - E(x_bl)|`.
    Printed,
    /// `|E(x_af) - E(x_al)| + |E(x_bf) + E(x_bl)|`, which reproduces the
    /// published HAL tables.
    #[default]
    Table,
}

impl FromStr for HalVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(HalVariant::Printed),
            "table" => Ok(HalVariant::Table),
            _ => Err(Error::Argument(format!("unknown variant `{s}` (printed|table)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellReport {
    pub s_value: f64,
    /// The four expectation terms, in the order the formula lists them.
    pub terms: [f64; 4],
    pub regime: Regime,
    pub formula_variant: BellFormula,
}

/// Bell parameter of a poll record:
/// `μA μB + μA (1 - μB) + |(1 - μ(A or B)) - (1 - μA) μB|`.
pub fn bell_poll(record: &PollRecord) -> Result<BellReport> {
    record.validate()?;
    let (a, b, ab) = (record.mu_a, record.mu_b, record.mu_a_or_b);
    let terms = [a * b, a * (1.0 - b), 1.0 - ab, (1.0 - a) * b];
    let s_value = terms[0] + terms[1] + (terms[2] - terms[3]).abs();
    Ok(BellReport {
        s_value,
        terms,
        regime: classify_regime(s_value.abs())?,
        formula_variant: BellFormula::Poll,
    })
}

/// `E(x) = 2x - 1`: a score in `[0, 1]` as the mean of a ±1 outcome.
pub fn expectation(x: f64) -> f64 {
    2.0 * x - 1.0
}

/// Bell parameter from four AND-query scores: `x_af` = A ET F,
/// `x_al` = A ET L, `x_bf` = B ET F, `x_bl` = B ET L.
pub fn bell_hal(x_af: f64, x_al: f64, x_bf: f64, x_bl: f64, variant: HalVariant) -> Result<BellReport> {
    check_unit("x_af", x_af)?;
    check_unit("x_al", x_al)?;
    check_unit("x_bf", x_bf)?;
    check_unit("x_bl", x_bl)?;
    let terms = [x_af, x_al, x_bf, x_bl].map(expectation);
    let first = (terms[0] - terms[1]).abs();
    let (second, formula_variant) = match variant {
        HalVariant::Printed => ((terms[2] - terms[3]).abs(), BellFormula::HalPrinted),
        HalVariant::Table => ((terms[2] + terms[3]).abs(), BellFormula::HalTable),
    };
    let s_value = first + second;
    Ok(BellReport {
        s_value,
        terms,
        regime: classify_regime(s_value)?,
        formula_variant,
    })
}

pub const DEFAULT_EXCLUSIVITY_EPSILON: f64 = 1e-9;

/// `(label, score_a, score_b)` on a common raw scale.
pub type ScorePair = (String, f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusivityRow {
    pub label: String,
    pub score_a: f64,
    pub score_b: f64,
    /// `score_a + score_b - scale`; zero for mutually exclusive categories.
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusivityStats {
    pub scale: f64,
    pub epsilon: f64,
    pub rows: Vec<ExclusivityRow>,
    pub zero_deficit_count: usize,
    pub mean_deficit: f64,
}

/// How far each pair of category scores is from summing to `scale`.
pub fn exclusivity_stats(rows: &[ScorePair], scale: f64, epsilon: f64) -> Result<ExclusivityStats> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Data(format!("scale {scale} must be positive")));
    }
    if rows.is_empty() {
        return Err(Error::Data("no rows".into()));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (label, a, b) in rows {
        for x in [a, b] {
            if !(0.0..=scale).contains(x) {
                return Err(Error::Data(format!("`{label}`: score {x} is outside [0, {scale}]")));
            }
        }
        out.push(ExclusivityRow {
            label: label.clone(),
            score_a: *a,
            score_b: *b,
            deficit: a + b - scale,
        });
    }
    let zero_deficit_count = out.iter().filter(|r| r.deficit.abs() <= epsilon).count();
    let mean_deficit = out.iter().map(|r| r.deficit).sum::<f64>() / out.len() as f64;
    Ok(ExclusivityStats {
        scale,
        epsilon,
        rows: out,
        zero_deficit_count,
        mean_deficit,
    })
}

// ---------------------------------------------------------------------------
// CSV tables

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader)
}

fn headers<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Vec<String>> {
    Ok(rdr.headers()?.iter().map(str::to_string).collect())
}

fn non_empty<T>(rows: Vec<T>, what: &str) -> Result<Vec<T>> {
    if rows.is_empty() {
        Err(Error::Data(format!("{what}: no data rows")))
    } else {
        Ok(rows)
    }
}

#[derive(Deserialize)]
struct RawPollRow {
    object: String,
    score_a: f64,
    score_b: f64,
    score_a_or_b: Option<f64>,
    scale: f64,
}

/// Reads poll records from either `object,mu_a,mu_b,mu_a_or_b` (unit scale)
/// or `object,score_a,score_b,score_a_or_b,scale` (raw scale).
pub fn read_poll_csv<R: Read>(reader: R) -> Result<Vec<PollRecord>> {
    let mut rdr = csv_reader(reader);
    let h = headers(&mut rdr)?;
    let rows = if h == ["object", "mu_a", "mu_b", "mu_a_or_b"] {
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<PollRecord>() {
            let rec = rec?;
            rec.validate()?;
            rows.push(rec);
        }
        rows
    } else if h.first().map(String::as_str) == Some("object") && h.contains(&"score_a".to_string()) {
        let mut rows = Vec::new();
        for raw in rdr.deserialize::<RawPollRow>() {
            let raw = raw?;
            let joint = raw.score_a_or_b.ok_or_else(|| {
                Error::Data(format!("`{}`: poll records need score_a_or_b", raw.object))
            })?;
            rows.push(PollRecord::new(
                raw.object,
                mean_score(&[raw.score_a], raw.scale)?,
                mean_score(&[raw.score_b], raw.scale)?,
                mean_score(&[joint], raw.scale)?,
            )?);
        }
        rows
    } else {
        return Err(Error::Data(format!("unrecognized poll header `{}`", h.join(","))));
    };
    non_empty(rows, "poll table")
}

/// Reads `(label, score_a, score_b)` rows and their common scale from an
/// `object,score_a,score_b[,score_a_or_b],scale` table.
pub fn read_exclusivity_csv<R: Read>(reader: R) -> Result<(Vec<ScorePair>, f64)> {
    let mut rdr = csv_reader(reader);
    let mut rows = Vec::new();
    let mut scale = None;
    for raw in rdr.deserialize::<RawPollRow>() {
        let raw = raw?;
        match scale {
            None => scale = Some(raw.scale),
            Some(s) if s != raw.scale => {
                return Err(Error::Data(format!(
                    "`{}`: scale {} differs from {s}",
                    raw.object, raw.scale
                )))
            }
            _ => {}
        }
        rows.push((raw.object, raw.score_a, raw.score_b));
    }
    let rows = non_empty(rows, "exclusivity table")?;
    Ok((rows, scale.unwrap_or(1.0)))
}

/// Four AND-query scores of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalScoreRow {
    pub doc_id: String,
    pub x_af: f64,
    pub x_al: f64,
    pub x_bf: f64,
    pub x_bl: f64,
}

impl HalScoreRow {
    pub fn bell(&self, variant: HalVariant) -> Result<BellReport> {
        bell_hal(self.x_af, self.x_al, self.x_bf, self.x_bl, variant)
            .map_err(|e| Error::Data(format!("`{}`: {e}", self.doc_id)))
    }
}

/// Reads a `doc_id,x_af,x_al,x_bf,x_bl` table.
pub fn read_scores_csv<R: Read>(reader: R) -> Result<Vec<HalScoreRow>> {
    let mut rdr = csv_reader(reader);
    let h = headers(&mut rdr)?;
    if h != ["doc_id", "x_af", "x_al", "x_bf", "x_bl"] {
        return Err(Error::Data(format!("unrecognized score header `{}`", h.join(","))));
    }
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<HalScoreRow>, _>>()?;
    non_empty(rows, "score table")
}

/// Per-respondent answers for one sense of a polysemous word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolysemyRow {
    pub word: String,
    pub sense: String,
    pub responses: Vec<f64>,
    pub mean: f64,
}

#[derive(Deserialize)]
struct RawPolysemyRow {
    word: String,
    sense: String,
    scale: f64,
    scores: String,
}

/// Reads a `word,sense,scale,scores` table where `scores` holds the
/// space-separated raw answers.
pub fn read_polysemy_csv<R: Read>(reader: R) -> Result<Vec<PolysemyRow>> {
    let mut rdr = csv_reader(reader);
    let mut rows = Vec::new();
    for raw in rdr.deserialize::<RawPolysemyRow>() {
        let raw = raw?;
        let responses = raw
            .scores
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Data(format!("`{}`: bad score `{s}`", raw.word)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mean = mean_score(&responses, raw.scale)?;
        rows.push(PolysemyRow {
            word: raw.word,
            sense: raw.sense,
            responses,
            mean,
        });
    }
    non_empty(rows, "polysemy table")
}
