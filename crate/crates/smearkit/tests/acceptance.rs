//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits nonzero if any failed.

mod oracles;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use smearkit::commands::{quantify, QuantInputs, QuantSettings};
use smearkit::manifest::{manifest_to_string, parse_manifest, read_manifest};
use smearkit::report::read_report_csv;
use smearkit::voc::{parse_voc, write_voc, VocOptions};
use smearkit_core::metrics::{
    average_precision, evaluate, match_detections, EvalParams, Interpolation, ScoredOutcome,
};
use smearkit_core::quantify::{CountSource, FilmCounts, FilmMap, BAND_MAXIMUM};
use smearkit_core::rng::Rng;
use smearkit_core::synthetic::{detect_blobs, generate, BlobParams, OverlapPolicy, SyntheticSpec};
use smearkit_core::{
    flip_bbox, iou, parasitemia, spearman_rho, BBox, CaptureMetadata, ClassLabel, Dataset,
    DensityFormula, Detection, DetectionSet, FlipKind, GroundTruthObject, ImageRecord,
    InterpretationTable, MetricValue,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        // a NaN comparison is false and therefore fails
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn random_box(rng: &mut Rng, w: u32, h: u32) -> BBox {
    let (x0, x1) = (
        rng.below(u64::from(w)) as u32,
        rng.below(u64::from(w)) as u32,
    );
    let (y0, y1) = (
        rng.below(u64::from(h)) as u32,
        rng.below(u64::from(h)) as u32,
    );
    BBox::new(x0.min(x1), y0.min(y1), x0.max(x1) + 1, y0.max(y1) + 1).unwrap()
}

fn label(rng: &mut Rng) -> ClassLabel {
    if rng.below(2) == 0 {
        ClassLabel::Trophozoite
    } else {
        ClassLabel::Wbc
    }
}

fn c1_iou_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng::new(1);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        // mostly small boxes so overlaps are common, some large ones
        let side = if i % 10 == 0 { 200 } else { 40 };
        let (a, b) = (
            random_box(&mut rng, side, side),
            random_box(&mut rng, side, side),
        );
        let got = iou(&a, &b);
        let want = oracles::iou_by_rasterization(&a, &b);
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() <= 1e-9, "{a} vs {b}: {got} != {want}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("10000 pairs, max |diff| {worst:e}, {elapsed:.2?}"))
}

fn c2_matching_oracle() -> Outcome {
    let mut rng = Rng::new(2);
    let thresholds = [0.3, 0.5, 0.7];
    let mut total = oracles::Tally::default();
    for case in 0..1000 {
        let n_gt = rng.below(7) as usize;
        let n_det = rng.below(7) as usize;
        let gt: Vec<GroundTruthObject> = (0..n_gt)
            .map(|_| GroundTruthObject {
                label: label(&mut rng),
                bbox: random_box(&mut rng, 12, 12),
            })
            .collect();
        let dets: Vec<Detection> = (0..n_det)
            .map(|_| {
                let l = label(&mut rng);
                let b = if !gt.is_empty() && rng.below(2) == 0 {
                    // perturb a ground-truth box to get high overlaps
                    let g = gt[rng.below(gt.len() as u64) as usize].bbox;
                    let dx = rng.below(3) as u32;
                    BBox::new(
                        g.xmin() + dx,
                        g.ymin(),
                        g.xmax() + dx,
                        g.ymax() + rng.below(2) as u32,
                    )
                    .unwrap()
                } else {
                    random_box(&mut rng, 12, 12)
                };
                Detection::new("img", l, b, rng.below(4) as f64 / 4.0 + 0.25).unwrap()
            })
            .collect();
        let thr = thresholds[case % 3];
        let m = match_detections(&gt, &dets, thr);
        for c in ClassLabel::ALL {
            let (g, d) = oracles::of_class(&gt, &dets, c);
            let want = oracles::brute_force_matching(&g, &d, thr);
            let got = m.class_counts(c);
            ensure!(
                (got.tp, got.fp, got.fn_) == (want.tp, want.fp, want.fn_),
                "case {case} class {c}: got {:?}, oracle {want:?}",
                (got.tp, got.fp, got.fn_)
            );
            total.tp += want.tp;
            total.fp += want.fp;
            total.fn_ += want.fn_;
        }
    }
    Ok(format!(
        "1000 micro-instances, totals TP {} FP {} FN {}",
        total.tp, total.fp, total.fn_
    ))
}

fn ap(outcomes: &[(f64, bool)], n_gt: u64, mode: Interpolation) -> f64 {
    let o: Vec<ScoredOutcome> = outcomes
        .iter()
        .map(|&(score, tp)| ScoredOutcome { score, tp })
        .collect();
    average_precision(&o, n_gt, mode).value().expect("defined")
}

fn c3_ap_hand_cases() -> Outcome {
    let tol = 1e-12;
    let hand = ap(
        &[(0.9, true), (0.8, false), (0.7, true)],
        2,
        Interpolation::AllPoint,
    );
    ensure!(
        (hand - 5.0 / 6.0).abs() <= tol,
        "3-detection case gave {hand}"
    );

    // same case through the full evaluator
    let gt = [
        BBox::new(0, 0, 10, 10).unwrap(),
        BBox::new(20, 20, 30, 30).unwrap(),
    ];
    let rec = ImageRecord {
        image_id: "a".into(),
        width: 50,
        height: 50,
        metadata: CaptureMetadata::for_slide("s"),
        objects: gt
            .iter()
            .map(|&bbox| GroundTruthObject {
                label: ClassLabel::Trophozoite,
                bbox,
            })
            .collect(),
    };
    let dets: DetectionSet = [
        (gt[0], 0.9),
        (BBox::new(40, 40, 45, 45).unwrap(), 0.8),
        (gt[1], 0.7),
    ]
    .into_iter()
    .map(|(b, s)| Detection::new("a", ClassLabel::Trophozoite, b, s).unwrap())
    .collect();
    let report = evaluate(
        &Dataset::new(vec![rec]).unwrap(),
        &dets,
        EvalParams::default(),
    )
    .map_err(|e| e.to_string())?;
    let via_eval = report
        .class(ClassLabel::Trophozoite)
        .unwrap()
        .ap
        .value()
        .unwrap();
    ensure!(
        (via_eval - 5.0 / 6.0).abs() <= tol,
        "evaluator gave {via_eval}"
    );

    for n in 1..=6 {
        let perfect: Vec<(f64, bool)> = (0..n).map(|i| (1.0 - i as f64 * 0.1, true)).collect();
        for mode in [Interpolation::AllPoint, Interpolation::ElevenPoint] {
            let v = ap(&perfect, n as u64, mode);
            ensure!((v - 1.0).abs() <= tol, "perfect n={n} {mode}: {v}");
            let none: Vec<(f64, bool)> = perfect.iter().map(|&(s, _)| (s, false)).collect();
            let z = ap(&none, n as u64, mode);
            ensure!(z.abs() <= tol, "zero-TP n={n} {mode}: {z}");
        }
    }
    Ok(format!(
        "all-point AP {hand:.15} = 5/6; perfect 1.0; zero-TP 0.0"
    ))
}

fn c4_reported_ratio() -> Outcome {
    // 100 trophozoites over 10 images; 93 found, 43 spurious
    let mut records = Vec::new();
    let mut dets = DetectionSet::new();
    let mut found = 0;
    let mut spurious = 0;
    for i in 0..10 {
        let id = format!("img{i:02}");
        let objects: Vec<GroundTruthObject> = (0..10)
            .map(|k| GroundTruthObject {
                label: ClassLabel::Trophozoite,
                bbox: BBox::new(k * 20, 0, k * 20 + 10, 10).unwrap(),
            })
            .collect();
        for o in &objects {
            if found < 93 {
                dets.push(
                    Detection::new(id.clone(), ClassLabel::Trophozoite, o.bbox, 0.9).unwrap(),
                );
                found += 1;
            }
        }
        for k in 0..5 {
            if spurious < 43 {
                let b = BBox::new(k * 20, 100, k * 20 + 10, 110).unwrap();
                dets.push(Detection::new(id.clone(), ClassLabel::Trophozoite, b, 0.8).unwrap());
                spurious += 1;
            }
        }
        records.push(ImageRecord {
            image_id: id,
            width: 200,
            height: 200,
            metadata: CaptureMetadata::for_slide("s"),
            objects,
        });
    }
    let report = evaluate(
        &Dataset::new(records).unwrap(),
        &dets,
        EvalParams::default(),
    )
    .map_err(|e| e.to_string())?;
    let c = report.class(ClassLabel::Trophozoite).unwrap();
    ensure!(
        (c.tp, c.fp, c.fn_) == (93, 43, 7),
        "fixture gave TP {} FP {} FN {}",
        c.tp,
        c.fp,
        c.fn_
    );
    let precision = c.precision.value().unwrap();
    let recall = c.recall.value().unwrap();
    ensure!(recall == 0.93, "recall {recall} is not 0.930");
    ensure!(
        (precision - 0.686).abs() <= 0.002,
        "precision 93/136 = {precision:.6} differs from 0.686 by {:.6} > 0.002 (recall {recall} ok)",
        (precision - 0.686).abs()
    );
    Ok(format!("precision {precision:.6}, recall {recall}"))
}

fn c5_spearman_oracle() -> Outcome {
    let mut rng = Rng::new(5);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = 2 + rng.below(11) as usize;
        let range = 2 + rng.below(8);
        let x: Vec<f64> = (0..n).map(|_| rng.below(range) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.below(range) as f64).collect();
        let got = spearman_rho(&x, &y).map_err(|e| e.to_string())?;
        match (got, oracles::spearman_oracle(&x, &y)) {
            (MetricValue::Defined(g), Some(w)) => {
                worst = worst.max((g - w).abs());
                ensure!(
                    (g - w).abs() <= 1e-9,
                    "case {case}: {g} vs {w} for {x:?} {y:?}"
                );
            }
            (MetricValue::Undefined, None) => {}
            (g, w) => return Err(format!("case {case}: {g:?} vs {w:?} for {x:?} {y:?}")),
        }
    }
    let x = [1.0, 5.0, 9.0, 12.0];
    let rev = [12.0, 9.0, 5.0, 1.0];
    let same = spearman_rho(&x, &x).unwrap();
    let opposite = spearman_rho(&x, &rev).unwrap();
    ensure!(same == MetricValue::Defined(1.0), "identical gave {same:?}");
    ensure!(
        opposite == MetricValue::Defined(-1.0),
        "reversed gave {opposite:?}"
    );
    Ok(format!(
        "1000 tied vectors, max |diff| {worst:e}; identical 1, reversed -1"
    ))
}

fn counts(t: u64, w: u64) -> FilmCounts {
    FilmCounts {
        film_id: "f".into(),
        trophozoites: t,
        wbcs: w,
        images_counted: 1,
        source: CountSource::Model,
    }
}

fn density(t: u64, w: u64) -> f64 {
    parasitemia(
        &counts(t, w),
        8000,
        DensityFormula::Standard,
        &InterpretationTable::default(),
    )
    .unwrap()
    .parasites_per_ul
}

fn c6_parasitemia() -> Outcome {
    let d = density(1200, 200);
    ensure!(d == 48_000.0, "1200/200 gave {d}");
    let mut rng = Rng::new(6);
    for _ in 0..1000 {
        let t = rng.below(1_000_000);
        let w = 1 + rng.below(100_000);
        let base = density(t, w);
        ensure!(
            density(2 * t, w) == 2.0 * base,
            "doubling trophozoites at ({t}, {w})"
        );
        ensure!(
            density(t, 2 * w) == base / 2.0,
            "doubling WBCs at ({t}, {w})"
        );
        ensure!(density(2 * t, 2 * w) == base, "scaling both at ({t}, {w})");
    }
    let table = InterpretationTable::default();
    let r = parasitemia(&counts(1200, 200), 8000, DensityFormula::Standard, &table).unwrap();
    ensure!(
        r.interpretation == BAND_MAXIMUM,
        "48000/ul interpreted as {:?}",
        r.interpretation
    );
    let slide8 = parasitemia(
        &counts(47_982, 8000),
        8000,
        DensityFormula::Standard,
        &table,
    )
    .unwrap();
    ensure!(
        slide8.parasites_per_ul == 47_982.0,
        "slide-8 counts gave {}",
        slide8.parasites_per_ul
    );
    ensure!(
        (d - 47_982.0).abs() / 47_982.0 < 0.001,
        "48000 is not on the 47982 scale"
    );
    Ok("48000/ul exact; 1000 homogeneity triples exact; maximum-parasitemia band".into())
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_smearkit"));
    c.env_remove("SMEARKIT_CONFIG");
    c
}

fn run_bin(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Result<String, String> {
    let mut c = bin();
    for a in args {
        c.arg(a);
    }
    let o = c.output().map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(String::from_utf8_lossy(&o.stdout).into_owned())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).into_owned())
    }
}

fn column<'a>(cols: &[String], row: &'a [String], name: &str) -> &'a str {
    &row[cols.iter().position(|c| c == name).unwrap()]
}

fn c7_end_to_end() -> Outcome {
    let start = Instant::now();

    // library path
    let mut records = Vec::new();
    let mut dets = DetectionSet::new();
    let mut master = Rng::new(7);
    for i in 0..50 {
        let spec = SyntheticSpec {
            noise: 0.0,
            overlap: OverlapPolicy::Forbid,
            seed: master.next_u64(),
            ..Default::default()
        };
        let (img, mut rec) = generate(&spec).map_err(|e| e.to_string())?;
        rec.image_id = format!("im{i:02}");
        rec.metadata.slide_id = format!("film-{}", i / 25 + 1);
        for d in detect_blobs(&img, &rec.image_id, &BlobParams::default()) {
            dets.push(d);
        }
        records.push(rec);
    }
    let dataset = Dataset::new(records).unwrap();
    let report = evaluate(&dataset, &dets, EvalParams::default()).map_err(|e| e.to_string())?;
    ensure!(report.map == 1.0, "library mAP {}", report.map);
    for c in &report.classes {
        ensure!(
            c.precision == MetricValue::Defined(1.0) && c.recall == MetricValue::Defined(1.0),
            "{}: precision {} recall {}",
            c.class,
            c.precision,
            c.recall
        );
    }
    let (q, _) = quantify(
        QuantInputs {
            film_map: Some(FilmMap::from_slides(dataset.records())),
            dataset: Some(dataset),
            detections: Some(dets),
            ..Default::default()
        },
        &QuantSettings::default(),
    )
    .map_err(|e| e.to_string())?;
    // 25 images x (5 trophozoites, 2 WBCs) per film: 125 x 8000 / 50
    for row in &q.rows {
        let d = row.density.as_ref().ok_or("missing density")?;
        ensure!(
            d.parasites_per_ul == 20_000.0,
            "{} density {}",
            row.film_id,
            d.parasites_per_ul
        );
    }

    // command-line path
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let s = root.join("synth");
    run_bin(&[
        &"synth",
        &"--out-dir",
        &s,
        &"--images",
        &"50",
        &"--films",
        &"2",
        &"--seed",
        &"11",
        &"--noise",
        &"0",
    ])?;
    run_bin(&[
        &"detect",
        &"--images-dir",
        &s.join("images"),
        &"--out",
        &root.join("d.csv"),
    ])?;
    run_bin(&[
        &"evaluate",
        &"--manifest",
        &s.join("manifest.jsonl"),
        &"--detections",
        &root.join("d.csv"),
        &"--out-dir",
        &root.join("ev"),
    ])?;
    let (_, mut rows) =
        read_report_csv(&root.join("ev/eval_report.csv")).map_err(|e| e.to_string())?;
    let cols = rows.remove(0);
    for row in &rows {
        for name in ["ap", "precision", "recall", "map"] {
            ensure!(
                column(&cols, row, name) == "1",
                "cli {} {name} = {}",
                row[0],
                column(&cols, row, name)
            );
        }
    }
    run_bin(&[
        &"quantify",
        &"--manifest",
        &s.join("manifest.jsonl"),
        &"--detections",
        &root.join("d.csv"),
        &"--film-map",
        &s.join("films.csv"),
        &"--out",
        &root.join("q.csv"),
    ])?;
    let (_, mut rows) = read_report_csv(&root.join("q.csv")).map_err(|e| e.to_string())?;
    let cols = rows.remove(0);
    ensure!(rows.len() == 2, "{} films", rows.len());
    for row in &rows {
        ensure!(column(&cols, row, "model_trophozoites") == "125", "{row:?}");
        ensure!(column(&cols, row, "model_wbcs") == "50", "{row:?}");
        ensure!(column(&cols, row, "parasites_per_ul") == "20000", "{row:?}");
    }

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "mAP 1, P=R=1 both classes, 2 films at 20000/ul, {elapsed:.2?}"
    ))
}

fn voc_fixtures() -> Vec<PathBuf> {
    let mut files = Vec::new();
    for dir in ["voc", "voc_bad"] {
        for e in std::fs::read_dir(fixtures().join(dir)).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "xml") && p.file_name().unwrap() != "broken.xml" {
                files.push(p);
            }
        }
    }
    files.sort();
    files
}

fn run_pipeline(root: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let s = root.join("synth");
    run_bin(&[
        &"synth",
        &"--out-dir",
        &s,
        &"--images",
        &"12",
        &"--films",
        &"3",
        &"--seed",
        &"99",
        &"--noise",
        &"0.1",
    ])?;
    let m = s.join("manifest.jsonl");
    run_bin(&[
        &"split",
        &"--manifest",
        &m,
        &"--train-out",
        &root.join("train.jsonl"),
        &"--test-out",
        &root.join("test.jsonl"),
        &"--seed",
        &"4",
    ])?;
    run_bin(&[
        &"augment",
        &"--manifest",
        &root.join("train.jsonl"),
        &"--out",
        &root.join("aug.jsonl"),
        &"--flips-out",
        &root.join("flips.csv"),
        &"--seed",
        &"8",
        &"--copies",
        &"2",
    ])?;
    run_bin(&[
        &"detect",
        &"--images-dir",
        &s.join("images"),
        &"--out",
        &root.join("d.csv"),
        &"--nms",
        &"0.5",
    ])?;
    run_bin(&[
        &"evaluate",
        &"--manifest",
        &m,
        &"--detections",
        &root.join("d.csv"),
        &"--out-dir",
        &root.join("ev"),
        &"--no-timestamp",
    ])?;
    run_bin(&[
        &"quantify",
        &"--manifest",
        &m,
        &"--detections",
        &root.join("d.csv"),
        &"--film-map",
        &s.join("films.csv"),
        &"--out",
        &root.join("q.csv"),
        &"--no-timestamp",
        &"--permutation-seed",
        &"1",
    ])?;
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let p = e.map_err(|e| e.to_string())?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                files.push((rel, std::fs::read(&p).map_err(|e| e.to_string())?));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn c8_round_trip_and_determinism() -> Outcome {
    let opts = VocOptions::default();
    let files = voc_fixtures();
    for path in &files {
        let text = std::fs::read_to_string(path).unwrap();
        let first = parse_voc(&text, &opts).map_err(|e| format!("{}: {e}", path.display()))?;
        let written = write_voc("x.jpg", first.width, first.height, &first.objects, false);
        let second = parse_voc(&written, &opts).map_err(|e| e.to_string())?;
        ensure!(
            (second.width, second.height, &second.objects)
                == (first.width, first.height, &first.objects),
            "{} is not a fixed point",
            path.display()
        );
        let rewritten = write_voc("x.jpg", second.width, second.height, &second.objects, false);
        ensure!(
            rewritten == written,
            "{} serializes differently the second time",
            path.display()
        );
    }

    let origin = Path::new("fixture");
    let fixture =
        read_manifest(&fixtures().join("eval/manifest.jsonl")).map_err(|e| e.to_string())?;
    let mut datasets = vec![fixture, Dataset::new(vec![]).unwrap()];
    let mut master = Rng::new(8);
    let mut synthetic = Vec::new();
    for i in 0..20 {
        let spec = SyntheticSpec {
            noise: 0.2,
            seed: master.next_u64(),
            ..Default::default()
        };
        let (_, mut rec) = generate(&spec).unwrap();
        rec.image_id = format!("r{i}");
        rec.metadata = CaptureMetadata {
            slide_id: format!("slide \"{}\"", i % 3),
            stage_x: Some(i as f64 * 0.1),
            stage_y: None,
            phone_zoom: Some(1.5),
            objective_magnification: Some(100),
            stain: Some("Giemsa, 10%".into()),
        };
        synthetic.push(rec);
    }
    datasets.push(Dataset::new(synthetic).unwrap());
    for d in &datasets {
        let text = manifest_to_string(d);
        let back = parse_manifest(&text, origin).map_err(|e| e.to_string())?;
        ensure!(
            &back == d,
            "manifest round trip changed a dataset of {} records",
            d.len()
        );
    }

    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run_a = run_pipeline(a.path())?;
    let run_b = run_pipeline(b.path())?;
    ensure!(run_a.len() == run_b.len(), "runs wrote different file sets");
    for ((na, da), (nb, db)) in run_a.iter().zip(&run_b) {
        ensure!(na == nb && da == db, "{na} differs between identical runs");
    }
    Ok(format!(
        "{} VOC fixtures fixed; {} manifests round-trip; {} output files byte-identical",
        files.len(),
        datasets.len(),
        run_a.len()
    ))
}

fn c9_flip_involution() -> Outcome {
    let mut rng = Rng::new(9);
    for _ in 0..10_000 {
        let w = 1 + rng.below(4000) as u32;
        let h = 1 + rng.below(4000) as u32;
        let b = random_box(&mut rng, w, h);
        let kind = if rng.below(2) == 0 {
            FlipKind::Horizontal
        } else {
            FlipKind::Vertical
        };
        let once = flip_bbox(b, kind, w, h).map_err(|e| e.to_string())?;
        let twice = flip_bbox(once, kind, w, h).map_err(|e| e.to_string())?;
        ensure!(twice == b, "{b} in {w}x{h} {kind:?} came back as {twice}");
        ensure!(once.area() == b.area(), "area changed for {b}");
    }
    Ok("10000 triples".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("IoU agrees with pixel rasterization", c1_iou_oracle),
        (
            "matching agrees with exhaustive greedy search",
            c2_matching_oracle,
        ),
        ("AP hand cases", c3_ap_hand_cases),
        (
            "TP=93 FP=43 FN=7 gives precision 0.686 +- 0.002, recall 0.930",
            c4_reported_ratio,
        ),
        ("Spearman agrees with rank-then-Pearson", c5_spearman_oracle),
        ("parasite density formula and homogeneity", c6_parasitemia),
        ("end-to-end synthetic run", c7_end_to_end),
        ("round trips and determinism", c8_round_trip_and_determinism),
        ("flip involution", c9_flip_involution),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
