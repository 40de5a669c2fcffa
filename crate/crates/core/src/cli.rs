//! The `halq` command line: `index`, `query`, `bell`, `interference`, `stats`.
//!
//! Every command prints one JSON document (or a TSV table) that embeds the
//! full [`RunConfig`]. Floats are written with exactly six decimals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::bell::{
    self, interference_analysis, read_exclusivity_csv, read_poll_csv, read_scores_csv, BellReport,
    HalVariant, Regime, DEFAULT_EXCLUSIVITY_EPSILON,
};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::hal::DEFAULT_WINDOW;
use crate::index::Index;
use crate::query::{rank_documents, Query, DEFAULT_TAU};

/// Environment variable naming the directory searched for relative data
/// paths that do not exist from the working directory.
pub const FIXTURES_ENV: &str = "HALQ_FIXTURES";
pub const DEFAULT_INDEX_PATH: &str = "halq-index.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BellMode {
    Poll,
    Hal,
}

#[derive(Debug, Parser)]
#[command(name = "halq", version, about = "HAL contextual queries and Bell/CHSH analytics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// For `index`: where to write the index. Otherwise: write the report
    /// here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Recorded in the output header for replaying randomized runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build HAL matrices for every document of a corpus manifest.
    Index {
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Rank indexed documents for `<term> ET|SANS <term>`.
    Query {
        /// ET, SANS, AND or WITHOUT.
        operator: String,
        left: String,
        right: String,
        #[arg(long, default_value = DEFAULT_INDEX_PATH)]
        index: PathBuf,
        /// Apply the correlation-weighted reduction to SANS queries.
        #[arg(long)]
        refined: bool,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Bell parameters of a poll table or a HAL score table.
    Bell {
        #[arg(value_enum)]
        mode: BellMode,
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = VariantArg::Table)]
        variant: VariantArg,
    },
    /// Interference decomposition of a poll table.
    Interference { data: PathBuf },
    /// Exclusivity deficits of a two-category score table.
    Stats {
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EXCLUSIVITY_EPSILON)]
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Printed,
    Table,
}

impl From<VariantArg> for HalVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Printed => HalVariant::Printed,
            VariantArg::Table => HalVariant::Table,
        }
    }
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub window: usize,
    pub tau: f64,
    pub refined: bool,
    pub variant: HalVariant,
    pub epsilon: f64,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: String::new(),
            inputs: Vec::new(),
            window: DEFAULT_WINDOW,
            tau: DEFAULT_TAU,
            refined: false,
            variant: HalVariant::default(),
            epsilon: DEFAULT_EXCLUSIVITY_EPSILON,
            format: Format::Json,
            seed: 0,
        }
    }
}

fn fixtures_dir() -> PathBuf {
    std::env::var_os(FIXTURES_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

/// `path` as given if it exists, else the same relative path (or file name)
/// under the fixture directory.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    let dir = fixtures_dir();
    [Some(dir.join(path)), path.file_name().map(|f| dir.join(f))]
        .into_iter()
        .flatten()
        .find(|p| p.exists())
        .unwrap_or_else(|| path.to_path_buf())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Rendered output of one command plus diagnostics for stderr.
#[derive(Debug, Default)]
pub struct Output {
    pub body: String,
    pub diagnostics: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    let mut config = RunConfig {
        format: g.format,
        seed: g.seed,
        ..RunConfig::default()
    };
    match &cli.command {
        Command::Index { manifest, window } => {
            config.subcommand = "index".into();
            config.window = *window;
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_INDEX_PATH));
            config.inputs = vec![manifest.display().to_string(), out.display().to_string()];
            cmd_index(&config, manifest, &out)
        }
        Command::Query {
            operator,
            left,
            right,
            index,
            refined,
            tau,
        } => {
            config.subcommand = "query".into();
            config.inputs = vec![index.display().to_string()];
            config.tau = *tau;
            config.refined = *refined;
            let mut query = Query::new(operator.parse()?, left, right);
            query.refined = *refined;
            query.tau = *tau;
            cmd_query(&config, index, &query)
        }
        Command::Bell { mode, data, variant } => {
            config.subcommand = "bell".into();
            config.inputs = vec![data.display().to_string()];
            config.variant = (*variant).into();
            cmd_bell(&config, *mode, data)
        }
        Command::Interference { data } => {
            config.subcommand = "interference".into();
            config.inputs = vec![data.display().to_string()];
            cmd_interference(&config, data)
        }
        Command::Stats { data, epsilon } => {
            config.subcommand = "stats".into();
            config.inputs = vec![data.display().to_string()];
            config.epsilon = *epsilon;
            cmd_stats(&config, data)
        }
    }
}

pub fn cmd_index(config: &RunConfig, manifest: &Path, out: &Path) -> Result<Output> {
    let corpus = Corpus::from_manifest(&resolve_data_path(manifest))?;
    let index = Index::build(&corpus, config.window)?;
    index.save(out)?;
    let docs = index.matrices.len();
    let terms = index.vocabulary.len();
    let summary = format!("{docs} docs, {terms} terms");
    let body = match config.format {
        Format::Json => render_json(config, &serde_json::json!({
            "summary": summary,
            "documents": docs,
            "terms": terms,
            "index_path": out.display().to_string(),
        }))?,
        Format::Tsv => tsv(config, &["documents", "terms", "index_path"], [vec![
            docs.to_string(),
            terms.to_string(),
            out.display().to_string(),
        ]])?,
    };
    Ok(Output {
        body,
        diagnostics: vec![summary],
    })
}

pub fn cmd_query(config: &RunConfig, index_path: &Path, query: &Query) -> Result<Output> {
    let index = Index::load(index_path)?;
    let ranking = rank_documents(&index.matrices, &index.vocabulary, query)?;
    let body = match config.format {
        Format::Json => render_json(config, &serde_json::json!({
            "query": &ranking.query,
            "ranking": &ranking.scores,
            "warnings": &ranking.warnings,
        }))?,
        Format::Tsv => tsv(
            config,
            &["doc_id", "score"],
            ranking.scores.iter().map(|s| vec![s.doc_id.clone(), fixed(s.score)]),
        )?,
    };
    Ok(Output {
        body,
        diagnostics: ranking.warnings,
    })
}

#[derive(Serialize)]
struct LabeledBell {
    label: String,
    #[serde(flatten)]
    report: BellReport,
}

pub fn cmd_bell(config: &RunConfig, mode: BellMode, data: &Path) -> Result<Output> {
    let file = open(&resolve_data_path(data))?;
    let reports: Vec<LabeledBell> = match mode {
        BellMode::Poll => read_poll_csv(file)?
            .into_iter()
            .map(|r| {
                Ok(LabeledBell {
                    report: bell::bell_poll(&r)?,
                    label: r.object,
                })
            })
            .collect::<Result<_>>()?,
        BellMode::Hal => read_scores_csv(file)?
            .into_iter()
            .map(|r| {
                Ok(LabeledBell {
                    report: r.bell(config.variant)?,
                    label: r.doc_id,
                })
            })
            .collect::<Result<_>>()?,
    };
    let mut counts: BTreeMap<String, usize> = [Regime::Classical, Regime::Quantum, Regime::BeyondCirelson]
        .iter()
        .map(|r| (r.to_string(), 0))
        .collect();
    for r in &reports {
        *counts.entry(r.report.regime.to_string()).or_default() += 1;
    }
    let body = match config.format {
        Format::Json => render_json(config, &serde_json::json!({
            "mode": mode,
            "reports": reports,
            "regime_counts": counts,
        }))?,
        Format::Tsv => tsv(
            config,
            &["label", "s_value", "e1", "e2", "e3", "e4", "regime", "formula_variant"],
            reports.iter().map(|r| {
                let mut row = vec![r.label.clone(), fixed(r.report.s_value)];
                row.extend(r.report.terms.iter().map(|&t| fixed(t)));
                row.push(r.report.regime.to_string());
                row.push(r.report.formula_variant.to_string());
                row
            }),
        )?,
    };
    Ok(Output {
        body,
        diagnostics: Vec::new(),
    })
}

pub fn cmd_interference(config: &RunConfig, data: &Path) -> Result<Output> {
    let records = read_poll_csv(open(&resolve_data_path(data))?)?;
    let reports = records
        .iter()
        .map(interference_analysis)
        .collect::<Result<Vec<_>>>()?;
    let diagnostics = reports
        .iter()
        .filter(|r| r.cos_phi_unit_c.is_none())
        .map(|r| format!("`{}`: mu_a * mu_b = 0, phase undefined", r.object))
        .collect();
    let body = match config.format {
        Format::Json => render_json(config, &serde_json::json!({ "reports": reports }))?,
        Format::Tsv => tsv(
            config,
            &[
                "object",
                "classical_average",
                "interference_term",
                "cos_phi_unit_c",
                "required_c",
                "extension_flag",
            ],
            reports.iter().map(|r| {
                let opt = |x: Option<f64>| x.map(fixed).unwrap_or_default();
                vec![
                    r.object.clone(),
                    fixed(r.classical_average),
                    fixed(r.interference_term),
                    opt(r.cos_phi_unit_c),
                    opt(r.required_c),
                    r.extension_flag.to_string(),
                ]
            }),
        )?,
    };
    Ok(Output { body, diagnostics })
}

pub fn cmd_stats(config: &RunConfig, data: &Path) -> Result<Output> {
    let (rows, scale) = read_exclusivity_csv(open(&resolve_data_path(data))?)?;
    let stats = bell::exclusivity_stats(&rows, scale, config.epsilon)?;
    let body = match config.format {
        Format::Json => render_json(config, &stats)?,
        Format::Tsv => tsv(
            config,
            &["label", "score_a", "score_b", "deficit"],
            stats.rows.iter().map(|r| {
                vec![r.label.clone(), fixed(r.score_a), fixed(r.score_b), fixed(r.deficit)]
            }),
        )?,
    };
    Ok(Output {
        body,
        diagnostics: Vec::new(),
    })
}

/// Writes the command output to `--out` or returns it for stdout.
pub fn emit(cli: &Cli, output: &Output) -> Result<Option<String>> {
    match (&cli.command, &cli.global.out) {
        (Command::Index { .. }, _) | (_, None) => Ok(Some(output.body.clone())),
        (_, Some(path)) => {
            fs::write(path, &output.body).map_err(|e| Error::io(path, e))?;
            Ok(None)
        }
    }
}

pub fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

fn tsv<I>(config: &RunConfig, header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut s = format!("# config: {}\n", serde_json::to_string(config)?);
    s.push_str(&header.join("\t"));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join("\t"));
        s.push('\n');
    }
    Ok(s)
}

/// `{"config": ..., <payload fields>}` pretty-printed with fixed six-decimal
/// floats.
pub fn render_json<T: Serialize>(config: &RunConfig, payload: &T) -> Result<String> {
    let mut root = serde_json::Map::new();
    root.insert("config".into(), serde_json::to_value(config)?);
    match serde_json::to_value(payload)? {
        Value::Object(fields) => root.extend(fields),
        other => {
            root.insert("result".into(), other);
        }
    }
    let mut out = String::new();
    write_value(&Value::Object(root), 0, false, &mut out);
    out.push('\n');
    Ok(out)
}

/// `exact` keeps the shortest round-trip form of floats (used for the
/// config block, where rounding would lose settings such as `1e-9`).
fn write_value(v: &Value, depth: usize, exact: bool, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Number(n) if n.is_f64() && !exact => out.push_str(&fixed(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(item, depth, exact, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(item, depth + 1, exact, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(depth + 1, out);
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_value(item, depth + 1, exact || (depth == 0 && key == "config"), out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
        scalar => {
            let _ = write!(out, "{scalar}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_six_decimals() {
        let cfg = RunConfig::default();
        let s = render_json(&cfg, &serde_json::json!({"score": 0.5, "n": 3, "xs": [1.0, 0.25], "none": null}))
            .unwrap();
        assert!(s.contains("\"score\": 0.500000"));
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("[1.000000, 0.250000]"));
        assert!(s.contains("\"tau\": 0.5,"));
        assert!(s.contains("\"epsilon\": 1e-9,"));
        assert!(s.contains("\"none\": null"));
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["config"]["window"], 10);
    }

    #[test]
    fn operator_errors_are_user_errors() {
        let cli = Cli::try_parse_from(["halq", "query", "OU", "a", "b"]).unwrap();
        let err = run(&cli).unwrap_err();
        assert!(err.is_user_error());
        assert!(Cli::try_parse_from(["halq", "query", "ET", "tomate"]).is_err());
    }

    #[test]
    fn fixture_paths_resolve() {
        let p = resolve_data_path(Path::new("fixtures/table3.csv"));
        assert!(p.exists(), "{}", p.display());
    }
}
