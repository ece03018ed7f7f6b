//! Brute-force reference implementations used by the acceptance suite.
//! Each one works from first principles and shares no code with the
//! library beyond the input types.

use smearkit_core::{BBox, ClassLabel, Detection, GroundTruthObject};

/// IoU by counting pixels of the half-open boxes on a grid.
pub fn iou_by_rasterization(a: &BBox, b: &BBox) -> f64 {
    let x1 = a.xmax().max(b.xmax());
    let y1 = a.ymax().max(b.ymax());
    let inside = |bb: &BBox, x: u32, y: u32| {
        x >= bb.xmin() && x < bb.xmax() && y >= bb.ymin() && y < bb.ymax()
    };
    let (mut inter, mut union) = (0u64, 0u64);
    for y in a.ymin().min(b.ymin())..y1 {
        for x in a.xmin().min(b.xmin())..x1 {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += u64::from(ia && ib);
            union += u64::from(ia || ib);
        }
    }
    inter as f64 / union as f64
}

fn overlap_ratio(a: &BBox, b: &BBox) -> f64 {
    iou_by_rasterization(a, b)
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

/// Greedy-by-score matching recovered by exhaustive search.
///
/// Detections are ranked by score (then xmin, ymin, xmax, ymax, label).
/// Every one-to-one assignment of detections to admissible ground truth
/// (same class, IoU at or above the threshold and nonzero) is enumerated,
/// and the assignment whose per-detection outcome sequence is
/// lexicographically largest wins, where an outcome is better when it is
/// a match, then when its IoU is higher, then when its GT index is lower.
/// That maximum is exactly what greedy processing produces.
pub fn brute_force_matching(gt: &[GroundTruthObject], dets: &[Detection], threshold: f64) -> Tally {
    let mut ranked: Vec<&Detection> = dets.iter().collect();
    ranked.sort_by(|a, b| {
        b.score()
            .partial_cmp(&a.score())
            .unwrap()
            .then(a.bbox.xmin().cmp(&b.bbox.xmin()))
            .then(a.bbox.ymin().cmp(&b.bbox.ymin()))
            .then(a.bbox.xmax().cmp(&b.bbox.xmax()))
            .then(a.bbox.ymax().cmp(&b.bbox.ymax()))
            .then((a.label as u8).cmp(&(b.label as u8)))
    });
    let admissible: Vec<Vec<(usize, f64)>> = ranked
        .iter()
        .map(|d| {
            gt.iter()
                .enumerate()
                .filter(|(_, g)| g.label == d.label)
                .map(|(j, g)| (j, overlap_ratio(&d.bbox, &g.bbox)))
                .filter(|&(_, v)| v >= threshold && v > 0.0)
                .collect()
        })
        .collect();

    // outcome key: (matched, iou, -index); unmatched is (0, 0, 0)
    type Key = Vec<(u8, f64, i64)>;
    fn search(
        k: usize,
        adm: &[Vec<(usize, f64)>],
        used: &mut Vec<bool>,
        cur: &mut Key,
        best: &mut Option<Key>,
    ) {
        if k == adm.len() {
            let better = match best {
                None => true,
                Some(b) => (**cur).partial_cmp(b.as_slice()) == Some(std::cmp::Ordering::Greater),
            };
            if better {
                *best = Some(cur.clone());
            }
            return;
        }
        cur.push((0, 0.0, 0));
        search(k + 1, adm, used, cur, best);
        cur.pop();
        for &(j, v) in &adm[k] {
            if !used[j] {
                used[j] = true;
                cur.push((1, v, -(j as i64)));
                search(k + 1, adm, used, cur, best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = None;
    search(
        0,
        &admissible,
        &mut vec![false; gt.len()],
        &mut Vec::new(),
        &mut best,
    );
    let tp = best.unwrap().iter().filter(|o| o.0 == 1).count() as u64;
    Tally {
        tp,
        fp: dets.len() as u64 - tp,
        fn_: gt.len() as u64 - tp,
    }
}

/// Class-restricted view of an instance.
pub fn of_class(
    gt: &[GroundTruthObject],
    dets: &[Detection],
    c: ClassLabel,
) -> (Vec<GroundTruthObject>, Vec<Detection>) {
    (
        gt.iter().filter(|g| g.label == c).cloned().collect(),
        dets.iter().filter(|d| d.label == c).cloned().collect(),
    )
}

/// Rank of each value counting strictly smaller values, ties averaged.
pub fn brute_force_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Textbook Pearson correlation; `None` when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&brute_force_ranks(x), &brute_force_ranks(y))
}
