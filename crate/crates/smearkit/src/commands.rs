//! Subcommand definitions and their implementations.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use smearkit_core::augment::expand_records;
use smearkit_core::metrics::{
    evaluate, spearman_permutation_p, EvalParams, Interpolation, PermutationMode,
};
use smearkit_core::quantify::{
    count_film_detections, count_film_ground_truth, CountSource, FilmCounts, FilmMap,
    DEFAULT_ASSUMED_WBC_PER_UL,
};
use smearkit_core::rng::Rng;
use smearkit_core::synthetic::{detect_blobs, generate, BlobParams, OverlapPolicy, SyntheticSpec};
use smearkit_core::{
    count_correlation, filter_by_score, nms, parasitemia, split_dataset, CaptureMetadata,
    ClassLabel, Dataset, DensityFormula, DetectionSet, ImageRecord, InterpretationTable,
    SplitGrouping,
};

use crate::config::{
    config_args, counts_csv, label_aliases, load_config, metadata_csv, read_counts, read_film_map,
    read_interpretation_table, read_metadata, CONFIG_ENV,
};
use crate::detfile::{read_detections, write_detections};
use crate::error::{write_file, Error, Result};
use crate::manifest::{read_manifest, write_manifest};
use crate::pgm::{read_pgm, write_pgm, PgmFormat};
use crate::report::{
    eval_csv, eval_json, eval_summary, quant_csv, quant_summary, read_eval_json, read_report_csv,
    timestamp, CorrelationSummary, QuantParams, QuantReport, QuantRow,
};
use crate::voc::{parse_voc, write_voc, VocOptions};

/// Slide id given to images that have no metadata row.
pub const UNASSIGNED_SLIDE: &str = "unassigned";

#[derive(Debug, Parser)]
#[command(
    name = "smearkit",
    version,
    about = "Evaluate and quantify parasite/WBC detections on thick blood smears"
)]
pub struct Cli {
    /// TOML file providing defaults for any flag.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Parse a directory of Pascal VOC files into a manifest.
    Ingest(IngestArgs),
    /// Seeded train/test split of a manifest.
    Split(SplitArgs),
    /// Expand a manifest with randomly flipped copies.
    Augment(AugmentArgs),
    /// Generate synthetic smear images with exact ground truth.
    Synth(SynthArgs),
    /// Run the classical blob detector over PGM images.
    Detect(DetectArgs),
    /// Score detections against a manifest (mAP, precision, recall).
    Evaluate(EvaluateArgs),
    /// Per-film counts, parasite density and count correlation.
    Quantify(QuantifyArgs),
    /// Print a previously written report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub voc_dir: PathBuf,
    /// Output manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of capture metadata: image_id,slide_id,stage_x,stage_y,phone_zoom,objective_magnification,stain
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Skip unknown labels and unreadable files, clamp out-of-image boxes.
    #[arg(long)]
    pub lenient: bool,
    /// VOC coordinates are 1-based inclusive.
    #[arg(long)]
    pub voc_one_based: bool,
    /// Extra label spelling, as name=class (repeatable).
    #[arg(long)]
    pub label_alias: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Keep all images of a slide on the same side.
    #[arg(long)]
    pub group_by_slide: bool,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV recording which flips fired for each copy.
    #[arg(long)]
    pub flips_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub p_h: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p_v: f64,
    /// Augmented copies per image.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Write only the augmented copies.
    #[arg(long)]
    pub no_originals: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub images: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub width: u32,
    #[arg(long, default_value_t = 256)]
    pub height: u32,
    #[arg(long, default_value_t = 5)]
    pub trophozoites: u32,
    #[arg(long, default_value_t = 2)]
    pub wbcs: u32,
    #[arg(long, default_value_t = 3)]
    pub trophozoite_radius_min: u32,
    #[arg(long, default_value_t = 6)]
    pub trophozoite_radius_max: u32,
    #[arg(long, default_value_t = 10)]
    pub wbc_radius_min: u32,
    #[arg(long, default_value_t = 15)]
    pub wbc_radius_max: u32,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long)]
    pub allow_overlap: bool,
    /// Group images into this many films (writes films.csv).
    #[arg(long, default_value_t = 0)]
    pub films: usize,
    /// Write plain-text (P2) graymaps instead of binary (P5).
    #[arg(long)]
    pub plain_pgm: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub images_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub intensity_threshold: f64,
    /// Component area (pixels) at or above which a blob is a WBC.
    #[arg(long, default_value_t = 200)]
    pub size_split: u64,
    #[arg(long, default_value_t = 4)]
    pub min_area: u64,
    /// Apply class-wise NMS at this IoU.
    #[arg(long)]
    pub nms: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub iou_threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    pub score_threshold: f64,
    #[arg(long, default_value = "all-point")]
    pub interpolation: Interpolation,
    /// Warn instead of failing on detections for unknown images.
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long)]
    pub label_alias: Vec<String>,
}

#[derive(Debug, Args)]
pub struct QuantifyArgs {
    /// Manifest; its annotations act as expert counts unless --expert-counts is given.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, conflicts_with = "model_counts")]
    pub detections: Option<PathBuf>,
    /// Precomputed model counts: film_id,trophozoites,wbcs,images
    #[arg(long)]
    pub model_counts: Option<PathBuf>,
    #[arg(long)]
    pub expert_counts: Option<PathBuf>,
    /// image_id,film_id rows; defaults to each image's slide_id.
    #[arg(long)]
    pub film_map: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the model counts in counts-file format.
    #[arg(long)]
    pub counts_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub score_threshold: f64,
    #[arg(long)]
    pub nms: Option<f64>,
    #[arg(long, default_value = "standard")]
    pub formula: DensityFormula,
    #[arg(long, default_value_t = DEFAULT_ASSUMED_WBC_PER_UL)]
    pub assumed_wbc: u32,
    /// Density bands as `lower_bound = label` lines.
    #[arg(long)]
    pub interpretation_table: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub permutation_seed: u64,
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long)]
    pub label_alias: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation report (JSON).
    #[arg(long)]
    pub eval: Option<PathBuf>,
    /// Quantification report (CSV).
    #[arg(long)]
    pub quant: Option<PathBuf>,
}

/// Failure before a command runs: either clap rejected the arguments or
/// the config file could not be applied.
#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Config(Error),
}

/// Parses `argv`, filling unset flags from the config file.
pub fn parse_cli<I, T>(argv: I) -> std::result::Result<Cli, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cmd = Cli::command();
    let matches = cmd
        .clone()
        .try_get_matches_from(&argv)
        .map_err(CliError::Usage)?;
    let Some(config_path) = matches.get_one::<PathBuf>("config") else {
        return Cli::try_parse_from(&argv).map_err(CliError::Usage);
    };
    let config = load_config(config_path).map_err(CliError::Config)?;
    let (name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub = cmd
        .find_subcommand(name)
        .expect("matched subcommand exists");
    let extra = config_args(sub, sub_matches, &config, config_path).map_err(CliError::Config)?;
    let mut full = argv;
    full.extend(extra);
    Cli::try_parse_from(full).map_err(CliError::Usage)
}

/// Runs a parsed command and returns the text to print.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Commands::Ingest(a) => ingest(&a),
        Commands::Split(a) => split(&a),
        Commands::Augment(a) => augment(&a),
        Commands::Synth(a) => synth(&a),
        Commands::Detect(a) => detect(&a),
        Commands::Evaluate(a) => evaluate_cmd(&a),
        Commands::Quantify(a) => quantify_cmd(&a),
        Commands::Report(a) => report(&a),
    }
}

fn require_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not found"),
        ))
    }
}

/// Files in `dir` with extension `ext` (case-insensitive), sorted by name.
fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case(ext))
        {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn histogram_line(d: &Dataset) -> String {
    let h = d.class_histogram();
    format!(
        "{} images, {} objects (trophozoite {}, wbc {})",
        d.len(),
        h[0] + h[1],
        h[ClassLabel::Trophozoite as usize],
        h[ClassLabel::Wbc as usize]
    )
}

pub fn ingest(a: &IngestArgs) -> Result<String> {
    require_exists(&a.voc_dir)?;
    let opts = VocOptions {
        strict: !a.lenient,
        one_based: a.voc_one_based,
        aliases: label_aliases(&a.label_alias)?,
    };
    let mut metadata = match &a.metadata {
        Some(p) => read_metadata(p)?,
        None => BTreeMap::new(),
    };
    let files = list_files(&a.voc_dir, "xml")?;
    if files.is_empty() {
        return Err(Error::Validation(format!(
            "no annotation files found in {}",
            a.voc_dir.display()
        )));
    }
    let mut warnings = Vec::new();
    let mut records = Vec::with_capacity(files.len());
    for path in &files {
        let text = crate::error::read_to_string(path)?;
        let ann = match parse_voc(&text, &opts) {
            Ok(ann) => ann,
            Err(e) if a.lenient => {
                warnings.push(format!("{}: {e}; file skipped", path.display()));
                continue;
            }
            Err(e) => return Err(Error::parse(path, None, e)),
        };
        warnings.extend(
            ann.warnings
                .iter()
                .map(|w| format!("{}: {w}", path.display())),
        );
        let image_id = file_stem(path);
        let meta = metadata
            .remove(&image_id)
            .unwrap_or_else(|| CaptureMetadata::for_slide(UNASSIGNED_SLIDE));
        records.push(ImageRecord {
            image_id,
            width: ann.width,
            height: ann.height,
            metadata: meta,
            objects: ann.objects,
        });
    }
    for id in metadata.keys() {
        warnings.push(format!("metadata row for {id:?} has no annotation file"));
    }
    let dataset = Dataset::new(records)?;
    write_manifest(&dataset, &a.out)?;
    let mut s = format!(
        "ingested {} -> {}\n",
        histogram_line(&dataset),
        a.out.display()
    );
    for w in warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    Ok(s)
}

pub fn split(a: &SplitArgs) -> Result<String> {
    require_exists(&a.manifest)?;
    let d = read_manifest(&a.manifest)?;
    let grouping = if a.group_by_slide {
        SplitGrouping::Slide
    } else {
        SplitGrouping::Image
    };
    let (train, test) = split_dataset(&d, a.train_fraction, a.seed, grouping)?;
    write_manifest(&train, &a.train_out)?;
    write_manifest(&test, &a.test_out)?;
    Ok(format!(
        "train: {}\ntest: {}\n",
        histogram_line(&train),
        histogram_line(&test)
    ))
}

pub fn augment(a: &AugmentArgs) -> Result<String> {
    require_exists(&a.manifest)?;
    let d = read_manifest(&a.manifest)?;
    let copies = expand_records(d.records(), a.seed, a.p_h, a.p_v, a.copies)?;
    let mut records = if a.no_originals {
        Vec::new()
    } else {
        d.records().to_vec()
    };
    records.extend(copies.iter().map(|c| c.record.clone()));
    let out = Dataset::new(records)?;
    write_manifest(&out, &a.out)?;
    if let Some(path) = &a.flips_out {
        let mut csv = String::from("source_id,image_id,horizontal,vertical\n");
        for c in &copies {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                c.source_id, c.record.image_id, c.flips.horizontal, c.flips.vertical
            );
        }
        write_file(path, csv)?;
    }
    let mut tags: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &copies {
        *tags.entry(c.flips.tag()).or_default() += 1;
    }
    let tags: Vec<String> = tags.iter().map(|(k, v)| format!("{k}={v}")).collect();
    Ok(format!(
        "{} augmented copies ({}); wrote {}\n",
        copies.len(),
        tags.join(", "),
        histogram_line(&out)
    ))
}

/// Paths written by [`synth`].
pub struct SynthLayout {
    pub images: PathBuf,
    pub annotations: PathBuf,
    pub manifest: PathBuf,
    pub metadata: PathBuf,
    pub films: PathBuf,
}

impl SynthLayout {
    pub fn new(root: &Path) -> Self {
        Self {
            images: root.join("images"),
            annotations: root.join("annotations"),
            manifest: root.join("manifest.jsonl"),
            metadata: root.join("metadata.csv"),
            films: root.join("films.csv"),
        }
    }
}

/// Film of image `i` out of `n` when split into `films` contiguous blocks.
fn film_for(i: usize, n: usize, films: usize) -> String {
    format!("film-{}", i * films / n + 1)
}

pub fn synth(a: &SynthArgs) -> Result<String> {
    let layout = SynthLayout::new(&a.out_dir);
    let format = if a.plain_pgm {
        PgmFormat::Plain
    } else {
        PgmFormat::Binary
    };
    let mut master = Rng::new(a.seed);
    let mut records = Vec::with_capacity(a.images);
    let mut film_rows = String::from("image_id,film_id\n");
    for i in 0..a.images {
        let spec = SyntheticSpec {
            width: a.width,
            height: a.height,
            n_trophozoites: a.trophozoites,
            n_wbcs: a.wbcs,
            trophozoite_radius: (a.trophozoite_radius_min, a.trophozoite_radius_max),
            wbc_radius: (a.wbc_radius_min, a.wbc_radius_max),
            noise: a.noise,
            overlap: if a.allow_overlap {
                OverlapPolicy::Allow
            } else {
                OverlapPolicy::Forbid
            },
            seed: master.next_u64(),
        };
        let (img, mut rec) = generate(&spec)?;
        rec.image_id = format!("synth-{i:04}");
        if a.films > 0 {
            let film = film_for(i, a.images, a.films);
            let _ = writeln!(film_rows, "{},{}", rec.image_id, film);
            rec.metadata.slide_id = film;
        }
        let pgm_name = format!("{}.pgm", rec.image_id);
        write_pgm(&layout.images.join(&pgm_name), &img, format)?;
        write_file(
            &layout.annotations.join(format!("{}.xml", rec.image_id)),
            write_voc(&pgm_name, rec.width, rec.height, &rec.objects, false),
        )?;
        records.push(rec);
    }
    let dataset = Dataset::new(records)?;
    write_manifest(&dataset, &layout.manifest)?;
    write_file(
        &layout.metadata,
        metadata_csv(
            dataset
                .records()
                .iter()
                .map(|r| (r.image_id.as_str(), &r.metadata)),
        ),
    )?;
    if a.films > 0 {
        write_file(&layout.films, film_rows)?;
    }
    Ok(format!(
        "generated {} in {}\n",
        histogram_line(&dataset),
        a.out_dir.display()
    ))
}

pub fn detect(a: &DetectArgs) -> Result<String> {
    require_exists(&a.images_dir)?;
    if !(a.intensity_threshold > 0.0 && a.intensity_threshold < 1.0) {
        return Err(Error::Validation(
            "intensity threshold must lie in (0, 1)".into(),
        ));
    }
    let params = BlobParams {
        intensity_threshold: a.intensity_threshold,
        size_split: a.size_split,
        min_area: a.min_area,
    };
    let files = list_files(&a.images_dir, "pgm")?;
    let mut all = Vec::new();
    for path in &files {
        let img = read_pgm(path)?;
        let mut dets = detect_blobs(&img, &file_stem(path), &params);
        if let Some(t) = a.nms {
            dets = nms(&dets, t)?;
        }
        all.extend(dets);
    }
    write_detections(&a.out, &all)?;
    Ok(format!(
        "{} detections over {} images -> {}\n",
        all.len(),
        files.len(),
        a.out.display()
    ))
}

pub const EVAL_JSON_NAME: &str = "eval_report.json";
pub const EVAL_CSV_NAME: &str = "eval_report.csv";

pub fn evaluate_cmd(a: &EvaluateArgs) -> Result<String> {
    require_exists(&a.manifest)?;
    require_exists(&a.detections)?;
    let dataset = read_manifest(&a.manifest)?;
    let dets = read_detections(&a.detections, &label_aliases(&a.label_alias)?)?;
    let orphans = dets.orphans(&dataset);
    if !orphans.is_empty() && !a.lenient {
        return Err(Error::Validation(format!(
            "detections reference unknown images: {}",
            orphans.join(", ")
        )));
    }
    let params = EvalParams {
        iou_threshold: a.iou_threshold,
        score_threshold: a.score_threshold,
        interpolation: a.interpolation,
    };
    let report = evaluate(&dataset, &dets, params)?;
    let ts = timestamp(!a.no_timestamp);
    write_file(&a.out_dir.join(EVAL_JSON_NAME), eval_json(&report, ts))?;
    write_file(&a.out_dir.join(EVAL_CSV_NAME), eval_csv(&report, ts))?;
    let mut s = eval_summary(&report);
    for o in &orphans {
        let _ = writeln!(s, "warning: detections for unknown image {o:?} ignored");
    }
    Ok(s)
}

/// Inputs for [`quantify`]. Model counts come from `detections` or
/// `model_counts`; expert counts from `expert_counts` or the dataset's
/// annotations.
#[derive(Debug, Default)]
pub struct QuantInputs {
    pub dataset: Option<Dataset>,
    pub detections: Option<DetectionSet>,
    pub model_counts: Option<Vec<FilmCounts>>,
    pub expert_counts: Option<Vec<FilmCounts>>,
    pub film_map: Option<FilmMap>,
}

#[derive(Debug, Clone)]
pub struct QuantSettings {
    pub score_threshold: f64,
    pub nms_iou: Option<f64>,
    pub formula: DensityFormula,
    pub assumed_wbc_per_ul: u32,
    pub table: InterpretationTable,
    pub table_source: String,
    pub permutation_seed: u64,
    pub lenient: bool,
}

impl Default for QuantSettings {
    fn default() -> Self {
        Self {
            score_threshold: smearkit_core::detection::DEFAULT_SCORE_THRESHOLD,
            nms_iou: None,
            formula: DensityFormula::Standard,
            assumed_wbc_per_ul: DEFAULT_ASSUMED_WBC_PER_UL,
            table: InterpretationTable::default(),
            table_source: "default".into(),
            permutation_seed: 0,
            lenient: false,
        }
    }
}

pub fn quantify(
    inputs: QuantInputs,
    settings: &QuantSettings,
) -> Result<(QuantReport, Vec<String>)> {
    let mut warnings = Vec::new();
    let (film_map, film_source) = match (inputs.film_map, &inputs.dataset) {
        (Some(m), _) => (Some(m), "film-map"),
        (None, Some(d)) => (Some(FilmMap::from_slides(d.records())), "slide_id"),
        (None, None) => (None, "counts files"),
    };

    // film -> member images, over the dataset's images when there is one
    let mut members: BTreeMap<String, Vec<String>> = BTreeMap::new();
    if let Some(map) = &film_map {
        let universe: Vec<String> = match &inputs.dataset {
            Some(d) => d.records().iter().map(|r| r.image_id.clone()).collect(),
            None => map
                .films()
                .values()
                .flatten()
                .map(|s| s.to_string())
                .collect(),
        };
        for img in universe {
            let film = map.film_of(&img).ok_or_else(|| {
                Error::Validation(format!("image {img:?} is not assigned to a film"))
            })?;
            members.entry(film.to_string()).or_default().push(img);
        }
    }

    let model = match (inputs.detections, inputs.model_counts) {
        (Some(dets), _) => {
            if film_map.is_none() {
                return Err(Error::Validation(
                    "detections need a manifest or a film map".into(),
                ));
            }
            let dets = filter_by_score(&dets, settings.score_threshold);
            let dets = match settings.nms_iou {
                Some(t) => dets.try_map_groups(|g| nms(g, t))?,
                None => dets,
            };
            let known: std::collections::BTreeSet<&str> =
                members.values().flatten().map(String::as_str).collect();
            let orphans: Vec<&str> = dets.image_ids().filter(|id| !known.contains(id)).collect();
            if !orphans.is_empty() {
                let msg = format!(
                    "detections for images outside every film: {}",
                    orphans.join(", ")
                );
                if settings.lenient {
                    warnings.push(msg);
                } else {
                    return Err(Error::Validation(msg));
                }
            }
            let mut counts = Vec::with_capacity(members.len());
            for (film, images) in &members {
                let slices: Vec<&[smearkit_core::Detection]> =
                    images.iter().map(|i| dets.get(i)).collect();
                counts.push(count_film_detections(
                    film,
                    &slices,
                    settings.score_threshold,
                )?);
            }
            Some(counts)
        }
        (None, Some(c)) => Some(c),
        (None, None) => None,
    };

    let expert = match (inputs.expert_counts, &inputs.dataset) {
        (Some(c), _) => Some(c),
        (None, Some(d)) => {
            let mut counts = Vec::with_capacity(members.len());
            for (film, images) in &members {
                let recs: Vec<&ImageRecord> = images
                    .iter()
                    .map(|i| d.get(i).expect("member images come from the dataset"))
                    .collect();
                counts.push(count_film_ground_truth(film, &recs)?);
            }
            Some(counts)
        }
        (None, None) => None,
    };

    let density_source =
        match (&model, &expert) {
            (Some(_), _) => "model",
            (None, Some(_)) => "expert",
            (None, None) => return Err(Error::Validation(
                "nothing to quantify: supply detections, model counts, expert counts or a manifest"
                    .into(),
            )),
        };

    let correlation = match (&model, &expert) {
        (Some(m), Some(e)) if m.len() >= 2 => {
            let rho = count_correlation(m, e)?;
            let by_id = |v: &[FilmCounts]| -> BTreeMap<String, FilmCounts> {
                v.iter().map(|c| (c.film_id.clone(), c.clone())).collect()
            };
            let (mm, em) = (by_id(m), by_id(e));
            let column = |map: &BTreeMap<String, FilmCounts>,
                          f: fn(&FilmCounts) -> u64|
             -> Vec<f64> { map.values().map(|c| f(c) as f64).collect() };
            let mode = PermutationMode::auto(mm.len(), settings.permutation_seed);
            let troph = |c: &FilmCounts| c.trophozoites;
            let wbc = |c: &FilmCounts| c.wbcs;
            Some(CorrelationSummary {
                rho,
                p_trophozoites: spearman_permutation_p(
                    &column(&mm, troph),
                    &column(&em, troph),
                    mode,
                )?,
                p_wbcs: spearman_permutation_p(&column(&mm, wbc), &column(&em, wbc), mode)?,
                p_method: match mode {
                    PermutationMode::Exact => "exact",
                    PermutationMode::MonteCarlo { .. } => "monte-carlo (10000 shuffles)",
                },
            })
        }
        (Some(m), Some(e)) => {
            // still insist on matching film sets
            count_correlation(m, e).or_else(|err| match err {
                smearkit_core::Error::TooFewObservations(_) => {
                    Ok(smearkit_core::quantify::CountCorrelation {
                        trophozoites: smearkit_core::MetricValue::Undefined,
                        wbcs: smearkit_core::MetricValue::Undefined,
                        films: m.len(),
                    })
                }
                other => Err(other),
            })?;
            None
        }
        _ => None,
    };

    let mut rows: BTreeMap<String, QuantRow> = BTreeMap::new();
    for (counts, is_model) in [(&model, true), (&expert, false)] {
        for c in counts.iter().flatten() {
            let row = rows.entry(c.film_id.clone()).or_insert_with(|| QuantRow {
                film_id: c.film_id.clone(),
                images: c.images_counted,
                model: None,
                expert: None,
                density: None,
            });
            if is_model {
                row.model = Some(c.clone());
            } else {
                row.expert = Some(c.clone());
            }
        }
    }
    for row in rows.values_mut() {
        let basis = row
            .model
            .as_ref()
            .or(row.expert.as_ref())
            .expect("row has counts");
        row.images = basis.images_counted;
        match parasitemia(
            basis,
            settings.assumed_wbc_per_ul,
            settings.formula,
            &settings.table,
        ) {
            Ok(d) => row.density = Some(d),
            Err(smearkit_core::Error::NoWbcs(_)) => {
                warnings.push(format!(
                    "film {:?}: no WBCs counted; density undefined, count more fields",
                    row.film_id
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let report = QuantReport {
        params: QuantParams {
            formula: settings.formula,
            assumed_wbc_per_ul: settings.assumed_wbc_per_ul,
            score_threshold: settings.score_threshold,
            nms_iou: settings.nms_iou,
            interpretation_table: settings.table_source.clone(),
            film_source: film_source.into(),
            density_source: density_source.into(),
        },
        rows: rows.into_values().collect(),
        correlation,
    };
    Ok((report, warnings))
}

pub fn quantify_cmd(a: &QuantifyArgs) -> Result<String> {
    for p in [
        &a.manifest,
        &a.detections,
        &a.model_counts,
        &a.expert_counts,
        &a.film_map,
        &a.interpretation_table,
    ]
    .into_iter()
    .flatten()
    {
        require_exists(p)?;
    }
    let inputs = QuantInputs {
        dataset: a.manifest.as_deref().map(read_manifest).transpose()?,
        detections: match &a.detections {
            Some(p) => Some(read_detections(p, &label_aliases(&a.label_alias)?)?),
            None => None,
        },
        model_counts: a
            .model_counts
            .as_deref()
            .map(|p| read_counts(p, CountSource::Model))
            .transpose()?,
        expert_counts: a
            .expert_counts
            .as_deref()
            .map(|p| read_counts(p, CountSource::Expert))
            .transpose()?,
        film_map: a.film_map.as_deref().map(read_film_map).transpose()?,
    };
    let (table, table_source) = match &a.interpretation_table {
        Some(p) => (read_interpretation_table(p)?, p.display().to_string()),
        None => (InterpretationTable::default(), "default".to_string()),
    };
    let settings = QuantSettings {
        score_threshold: a.score_threshold,
        nms_iou: a.nms,
        formula: a.formula,
        assumed_wbc_per_ul: a.assumed_wbc,
        table,
        table_source,
        permutation_seed: a.permutation_seed,
        lenient: a.lenient,
    };
    if !(0.0..=1.0).contains(&settings.score_threshold) {
        return Err(Error::Validation(
            "score threshold must lie in [0, 1]".into(),
        ));
    }
    if settings.assumed_wbc_per_ul == 0 {
        return Err(Error::Validation(
            "assumed WBC count must be positive".into(),
        ));
    }
    let (report, warnings) = quantify(inputs, &settings)?;
    write_file(&a.out, quant_csv(&report, timestamp(!a.no_timestamp)))?;
    if let Some(p) = &a.counts_out {
        let model: Vec<FilmCounts> = report.rows.iter().filter_map(|r| r.model.clone()).collect();
        write_file(p, counts_csv(&model))?;
    }
    let mut s = quant_summary(&report);
    for w in warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    Ok(s)
}

pub fn report(a: &ReportArgs) -> Result<String> {
    if a.eval.is_none() && a.quant.is_none() {
        return Err(Error::Validation("pass --eval and/or --quant".into()));
    }
    let mut s = String::new();
    if let Some(p) = &a.eval {
        require_exists(p)?;
        let doc = read_eval_json(p)?;
        s.push_str(&eval_summary(&doc.report));
    }
    if let Some(p) = &a.quant {
        require_exists(p)?;
        let (header, rows) = read_report_csv(p)?;
        for (k, v) in &header {
            let _ = writeln!(s, "{k:<28} {v}");
        }
        for row in &rows {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:<14}")).collect();
            let _ = writeln!(s, "{}", cells.join(" ").trim_end());
        }
    }
    Ok(s)
}
