//! Report files. Every report starts with a block of `# key=value` lines
//! carrying the full parameter set; an optional `generated_at_unix` line is
//! the only run-dependent content.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use smearkit_core::metrics::MetricValue;
use smearkit_core::quantify::{CountCorrelation, FilmCounts, ParasitemiaResult};
use smearkit_core::{DensityFormula, EvalReport};

use crate::error::{read_to_string, Error, Result};

pub const EVAL_FORMAT: &str = "smearkit-eval";
pub const REPORT_VERSION: u32 = 1;

/// Seconds since the Unix epoch, or `None` when timestamps are suppressed.
pub fn timestamp(enabled: bool) -> Option<u64> {
    enabled.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

struct HeaderBlock(String);

impl HeaderBlock {
    fn new(title: &str, generated_at: Option<u64>) -> Self {
        let mut s = format!("# smearkit {title} v{REPORT_VERSION}\n");
        if let Some(t) = generated_at {
            let _ = writeln!(s, "# generated_at_unix={t}");
        }
        HeaderBlock(s)
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.0, "# {key}={value}");
        self
    }
}

fn csv_rows(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalDocument {
    pub format: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub report: EvalReport,
}

pub fn eval_json(report: &EvalReport, generated_at: Option<u64>) -> String {
    let doc = EvalDocument {
        format: EVAL_FORMAT.into(),
        version: REPORT_VERSION,
        generated_at_unix: generated_at,
        report: report.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn read_eval_json(path: &Path) -> Result<EvalDocument> {
    let doc: EvalDocument =
        serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::parse(path, None, e))?;
    if doc.format != EVAL_FORMAT || doc.version != REPORT_VERSION {
        return Err(Error::parse(
            path,
            None,
            format!("unsupported report {} v{}", doc.format, doc.version),
        ));
    }
    Ok(doc)
}

pub const EVAL_CSV_COLUMNS: [&str; 13] = [
    "class",
    "ap",
    "precision",
    "recall",
    "tp",
    "fp",
    "fn",
    "ground_truth",
    "detections",
    "map",
    "iou_threshold",
    "score_threshold",
    "interpolation",
];

pub fn eval_csv(report: &EvalReport, generated_at: Option<u64>) -> String {
    let p = &report.params;
    let mut h = HeaderBlock::new("evaluation report", generated_at);
    h.kv("iou_threshold", p.iou_threshold)
        .kv("score_threshold", p.score_threshold)
        .kv("interpolation", p.interpolation)
        .kv("ap_ranking", "all detections regardless of score_threshold")
        .kv("images", report.images)
        .kv("map", report.map)
        .kv(
            "map_classes_excluded",
            join_or_none(report.undefined_classes.iter().map(|c| c.to_string())),
        )
        .kv(
            "orphan_images",
            join_or_none(report.orphan_images.iter().cloned()),
        );
    let rows: Vec<Vec<String>> = report
        .classes
        .iter()
        .map(|c| {
            vec![
                c.class.to_string(),
                c.ap.to_string(),
                c.precision.to_string(),
                c.recall.to_string(),
                c.tp.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                c.ground_truth.to_string(),
                c.detections.to_string(),
                report.map.to_string(),
                p.iou_threshold.to_string(),
                p.score_threshold.to_string(),
                p.interpolation.to_string(),
            ]
        })
        .collect();
    h.0 + &csv_rows(&EVAL_CSV_COLUMNS, &rows)
}

fn join_or_none(items: impl Iterator<Item = String>) -> String {
    let v: Vec<String> = items.collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(";")
    }
}

/// Human-readable summary of an evaluation.
pub fn eval_summary(report: &EvalReport) -> String {
    let p = &report.params;
    let mut s = format!(
        "mAP@{} = {:.4} ({}, {} images)\n",
        p.iou_threshold, report.map, p.interpolation, report.images
    );
    let _ = writeln!(s, "precision/recall at score >= {}:", p.score_threshold);
    for c in &report.classes {
        let _ = writeln!(
            s,
            "  {:<12} AP {:<10.4} precision {:<10.4} recall {:<10.4} (TP {} FP {} FN {})",
            c.class.as_str(),
            c.ap,
            c.precision,
            c.recall,
            c.tp,
            c.fp,
            c.fn_
        );
    }
    for c in &report.undefined_classes {
        let _ = writeln!(s, "  note: {c} has no ground truth; excluded from mAP");
    }
    s
}

/// Parameters echoed in the quantification header.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantParams {
    pub formula: DensityFormula,
    pub assumed_wbc_per_ul: u32,
    pub score_threshold: f64,
    pub nms_iou: Option<f64>,
    pub interpretation_table: String,
    pub film_source: String,
    pub density_source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantRow {
    pub film_id: String,
    pub images: u32,
    pub model: Option<FilmCounts>,
    pub expert: Option<FilmCounts>,
    /// `None` when no WBCs were counted.
    pub density: Option<ParasitemiaResult>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSummary {
    pub rho: CountCorrelation,
    pub p_trophozoites: MetricValue,
    pub p_wbcs: MetricValue,
    pub p_method: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantReport {
    pub params: QuantParams,
    pub rows: Vec<QuantRow>,
    pub correlation: Option<CorrelationSummary>,
}

pub const QUANT_CSV_COLUMNS: [&str; 10] = [
    "film_id",
    "images",
    "model_trophozoites",
    "model_wbcs",
    "expert_trophozoites",
    "expert_wbcs",
    "parasites_per_ul",
    "formula",
    "assumed_wbc_per_ul",
    "category",
];

pub const NO_WBC_CATEGORY: &str = "undefined: no WBCs counted, count more fields";

pub fn quant_csv(q: &QuantReport, generated_at: Option<u64>) -> String {
    let p = &q.params;
    let mut h = HeaderBlock::new("quantification report", generated_at);
    h.kv("formula", p.formula)
        .kv("assumed_wbc_per_ul", p.assumed_wbc_per_ul)
        .kv("score_threshold", p.score_threshold)
        .kv(
            "nms_iou",
            p.nms_iou.map_or("none".into(), |v| v.to_string()),
        )
        .kv("interpretation_table", &p.interpretation_table)
        .kv("film_source", &p.film_source)
        .kv("density_source", &p.density_source)
        .kv("counting", "film totals across member images");
    match &q.correlation {
        Some(c) => {
            h.kv("spearman_rho_trophozoites", c.rho.trophozoites)
                .kv("spearman_rho_wbcs", c.rho.wbcs)
                .kv("spearman_films", c.rho.films)
                .kv("permutation_p_trophozoites", c.p_trophozoites)
                .kv("permutation_p_wbcs", c.p_wbcs)
                .kv("permutation_method", c.p_method)
                .kv("note", "rho is the rank correlation coefficient; p values are two-sided permutation tests");
        }
        None => {
            h.kv(
                "spearman",
                "not computed (needs model and expert counts for at least 2 films)",
            );
        }
    }
    let opt = |v: Option<u64>| v.map_or(String::new(), |v| v.to_string());
    let rows: Vec<Vec<String>> = q
        .rows
        .iter()
        .map(|r| {
            let (density, category) = match &r.density {
                Some(d) => (d.parasites_per_ul.to_string(), d.interpretation.clone()),
                None => ("undefined".into(), NO_WBC_CATEGORY.into()),
            };
            vec![
                r.film_id.clone(),
                r.images.to_string(),
                opt(r.model.as_ref().map(|c| c.trophozoites)),
                opt(r.model.as_ref().map(|c| c.wbcs)),
                opt(r.expert.as_ref().map(|c| c.trophozoites)),
                opt(r.expert.as_ref().map(|c| c.wbcs)),
                density,
                p.formula.to_string(),
                p.assumed_wbc_per_ul.to_string(),
                category,
            ]
        })
        .collect();
    h.0 + &csv_rows(&QUANT_CSV_COLUMNS, &rows)
}

pub fn quant_summary(q: &QuantReport) -> String {
    let mut s = format!(
        "{} films; density = {} formula, assumed {} WBC/ul\n",
        q.rows.len(),
        q.params.formula,
        q.params.assumed_wbc_per_ul
    );
    for r in &q.rows {
        match &r.density {
            Some(d) => {
                let _ = writeln!(
                    s,
                    "  {:<12} {:>12.1} /ul  {}",
                    r.film_id, d.parasites_per_ul, d.interpretation
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "  {:<12} {:>12} /ul  {}",
                    r.film_id, "undefined", NO_WBC_CATEGORY
                );
            }
        }
    }
    if let Some(c) = &q.correlation {
        let _ = writeln!(
            s,
            "Spearman rho: trophozoites {:.4} (p {:.4}), WBCs {:.4} (p {:.4}) over {} films",
            c.rho.trophozoites, c.p_trophozoites, c.rho.wbcs, c.p_wbcs, c.rho.films
        );
    }
    s
}

/// `# key=value` pairs from a report header.
pub type HeaderPairs = Vec<(String, String)>;

/// Splits a report CSV into its `# key=value` header pairs and data rows.
pub fn read_report_csv(path: &Path) -> Result<(HeaderPairs, Vec<Vec<String>>)> {
    let text = read_to_string(path)?;
    let mut header = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix("# ") {
            Some(kv) => {
                if let Some((k, v)) = kv.split_once('=') {
                    header.push((k.to_string(), v.to_string()));
                }
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(|e| Error::parse(path, None, e))?;
    Ok((header, rows))
}
