//! Per-film counting, parasite density and clinical banding.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dataset::ImageRecord;
use crate::detection::Detection;
use crate::error::{Error, Result};
use crate::label::ClassLabel;
use crate::metrics::{spearman_rho, MetricValue};

/// Conventional WBC count per microlitre used when the patient's own count
/// is unknown.
pub const DEFAULT_ASSUMED_WBC_PER_UL: u32 = 8000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CountSource {
    Model,
    Expert,
}

impl CountSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CountSource::Model => "model",
            CountSource::Expert => "expert",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilmCounts {
    pub film_id: String,
    pub trophozoites: u64,
    pub wbcs: u64,
    pub images_counted: u32,
    pub source: CountSource,
}

impl FilmCounts {
    /// Combines counts of two disjoint image groups of the same film.
    pub fn merge(&self, other: &FilmCounts) -> FilmCounts {
        FilmCounts {
            film_id: self.film_id.clone(),
            trophozoites: self.trophozoites + other.trophozoites,
            wbcs: self.wbcs + other.wbcs,
            images_counted: self.images_counted + other.images_counted,
            source: self.source,
        }
    }
}

fn images_counted(film_id: &str, n: usize) -> Result<u32> {
    if n == 0 {
        return Err(Error::EmptyFilm(film_id.to_string()));
    }
    Ok(n as u32)
}

/// Model counts: detections with `score >= score_threshold`, summed over the
/// film's images (one slice per image).
pub fn count_film_detections(
    film_id: &str,
    images: &[&[Detection]],
    score_threshold: f64,
) -> Result<FilmCounts> {
    let images_counted = images_counted(film_id, images.len())?;
    let mut n = [0u64; 2];
    for d in images.iter().flat_map(|dets| dets.iter()) {
        if d.score() >= score_threshold {
            n[d.label as usize] += 1;
        }
    }
    Ok(FilmCounts {
        film_id: film_id.to_string(),
        trophozoites: n[ClassLabel::Trophozoite as usize],
        wbcs: n[ClassLabel::Wbc as usize],
        images_counted,
        source: CountSource::Model,
    })
}

/// Expert counts straight from the annotations.
pub fn count_film_ground_truth(film_id: &str, records: &[&ImageRecord]) -> Result<FilmCounts> {
    let images_counted = images_counted(film_id, records.len())?;
    let sum = |label| records.iter().map(|r| r.count(label) as u64).sum();
    Ok(FilmCounts {
        film_id: film_id.to_string(),
        trophozoites: sum(ClassLabel::Trophozoite),
        wbcs: sum(ClassLabel::Wbc),
        images_counted,
        source: CountSource::Expert,
    })
}

/// Which density equation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DensityFormula {
    /// parasites x assumed WBC/ul / counted WBCs.
    #[default]
    Standard,
    /// parasites x counted WBCs / assumed WBC/ul, kept for auditing the
    /// equation as it was published.
    AsPrinted,
}

impl DensityFormula {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityFormula::Standard => "standard",
            DensityFormula::AsPrinted => "as-printed",
        }
    }
}

impl fmt::Display for DensityFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DensityFormula {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "standard" => Ok(DensityFormula::Standard),
            "as-printed" => Ok(DensityFormula::AsPrinted),
            _ => Err("expected standard or as-printed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Band {
    pub lower_bound: f64,
    pub label: String,
}

/// Ordered density bands. The first band starts at 0 and the last one is
/// open-ended, so every non-negative density has a category.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpretationTable {
    bands: Vec<Band>,
}

pub const BAND_BELOW: &str = "below attested symptomatic range";
pub const BAND_SYMPTOMATIC: &str = "immune patients exhibit symptoms";
pub const BAND_MAXIMUM: &str = "maximum parasitemia";

impl Default for InterpretationTable {
    /// Provisional bands anchored on the only published data points: the
    /// symptomatic band starts at 1906/ul and the maximum band at 47982/ul.
    /// Load a full clinical table for real use.
    fn default() -> Self {
        Self {
            bands: alloc::vec![
                Band {
                    lower_bound: 0.0,
                    label: BAND_BELOW.into()
                },
                Band {
                    lower_bound: 1906.0,
                    label: BAND_SYMPTOMATIC.into()
                },
                Band {
                    lower_bound: 47982.0,
                    label: BAND_MAXIMUM.into()
                },
            ],
        }
    }
}

impl InterpretationTable {
    pub fn new(bands: Vec<Band>) -> Result<Self> {
        let first = bands
            .first()
            .ok_or(Error::InvalidInterpretationTable("no bands"))?;
        if first.lower_bound != 0.0 {
            return Err(Error::InvalidInterpretationTable(
                "first band must start at 0",
            ));
        }
        for w in bands.windows(2) {
            if w[1].lower_bound <= w[0].lower_bound || !w[1].lower_bound.is_finite() {
                return Err(Error::InvalidInterpretationTable(
                    "lower bounds must be finite and strictly increasing",
                ));
            }
        }
        if bands.iter().any(|b| b.label.trim().is_empty()) {
            return Err(Error::InvalidInterpretationTable("empty band label"));
        }
        Ok(Self { bands })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }
}

/// Category of the highest band whose lower bound is at most `parasites_per_ul`.
pub fn interpret(parasites_per_ul: f64, table: &InterpretationTable) -> &str {
    table
        .bands
        .iter()
        .rev()
        .find(|b| b.lower_bound <= parasites_per_ul)
        .unwrap_or(&table.bands[0])
        .label
        .as_str()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParasitemiaResult {
    pub film_id: String,
    pub parasites_per_ul: f64,
    pub assumed_wbc_per_ul: u32,
    pub formula: DensityFormula,
    pub interpretation: String,
}

pub fn parasitemia(
    fc: &FilmCounts,
    assumed_wbc_per_ul: u32,
    formula: DensityFormula,
    table: &InterpretationTable,
) -> Result<ParasitemiaResult> {
    if fc.wbcs == 0 {
        return Err(Error::NoWbcs(fc.film_id.clone()));
    }
    let parasites = fc.trophozoites as f64;
    let counted_wbc = fc.wbcs as f64;
    let assumed = f64::from(assumed_wbc_per_ul);
    let parasites_per_ul = match formula {
        DensityFormula::Standard => parasites * assumed / counted_wbc,
        DensityFormula::AsPrinted => parasites * counted_wbc / assumed,
    };
    Ok(ParasitemiaResult {
        film_id: fc.film_id.clone(),
        parasites_per_ul,
        assumed_wbc_per_ul,
        formula,
        interpretation: interpret(parasites_per_ul, table).to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountCorrelation {
    pub trophozoites: MetricValue,
    pub wbcs: MetricValue,
    pub films: usize,
}

fn index_by_film(counts: &[FilmCounts]) -> Result<BTreeMap<&str, &FilmCounts>> {
    let mut map = BTreeMap::new();
    for c in counts {
        if map.insert(c.film_id.as_str(), c).is_some() {
            return Err(Error::DuplicateFilm(c.film_id.clone()));
        }
    }
    Ok(map)
}

/// Spearman's rho between model and expert counts, per class, pairing
/// films by id.
pub fn count_correlation(model: &[FilmCounts], expert: &[FilmCounts]) -> Result<CountCorrelation> {
    let m = index_by_film(model)?;
    let e = index_by_film(expert)?;
    if let Some(id) = m
        .keys()
        .find(|k| !e.contains_key(*k))
        .or_else(|| e.keys().find(|k| !m.contains_key(*k)))
    {
        return Err(Error::FilmSetMismatch(id.to_string()));
    }
    let column = |map: &BTreeMap<&str, &FilmCounts>, f: fn(&FilmCounts) -> u64| -> Vec<f64> {
        map.values().map(|c| f(c) as f64).collect()
    };
    let troph = |c: &FilmCounts| c.trophozoites;
    let wbc = |c: &FilmCounts| c.wbcs;
    Ok(CountCorrelation {
        trophozoites: spearman_rho(&column(&m, troph), &column(&e, troph))?,
        wbcs: spearman_rho(&column(&m, wbc), &column(&e, wbc))?,
        films: m.len(),
    })
}

/// Assignment of images to films.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilmMap {
    by_image: BTreeMap<String, String>,
}

impl FilmMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails if the image already belongs to a different film.
    pub fn assign(&mut self, image_id: &str, film_id: &str) -> Result<()> {
        match self.by_image.get(image_id) {
            Some(existing) if existing != film_id => {
                Err(Error::DuplicateImageId(image_id.to_string()))
            }
            _ => {
                self.by_image
                    .insert(image_id.to_string(), film_id.to_string());
                Ok(())
            }
        }
    }

    /// Films from each record's `slide_id`.
    pub fn from_slides(records: &[ImageRecord]) -> Self {
        Self {
            by_image: records
                .iter()
                .map(|r| (r.image_id.clone(), r.metadata.slide_id.clone()))
                .collect(),
        }
    }

    pub fn film_of(&self, image_id: &str) -> Option<&str> {
        self.by_image.get(image_id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_image.is_empty()
    }

    /// Film id -> member image ids, both sorted.
    pub fn films(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (img, film) in &self.by_image {
            out.entry(film.as_str()).or_default().push(img.as_str());
        }
        out
    }
}
