//! Configuration file and auxiliary input files.
//!
//! The config file is TOML. Top-level keys apply to every subcommand that
//! has a flag of that name; a `[<subcommand>]` table applies to that
//! subcommand only. Keys are flag names with `_` for `-`. Flags given on
//! the command line always win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};
use smearkit_core::dataset::CaptureMetadata;
use smearkit_core::quantify::{Band, CountSource, FilmCounts, FilmMap, InterpretationTable};
use smearkit_core::{ClassLabel, LabelAliases};

use crate::error::{read_to_string, Error, Result};

pub const CONFIG_ENV: &str = "SMEARKIT_CONFIG";

pub fn load_config(path: &Path) -> Result<toml::Table> {
    read_to_string(path)?
        .parse::<toml::Table>()
        .map_err(|e| Error::parse(path, None, e.message()))
}

fn value_args(flag: &str, v: &toml::Value, origin: &Path) -> Result<Vec<OsString>> {
    let scalar = |v: &toml::Value| -> Result<String> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            other => Err(Error::parse(
                origin,
                None,
                format!("{flag}: unsupported value {other}"),
            )),
        }
    };
    Ok(match v {
        toml::Value::Boolean(true) => vec![flag.into()],
        toml::Value::Boolean(false) => vec![],
        toml::Value::Array(items) => items
            .iter()
            .map(|i| scalar(i).map(|s| OsString::from(format!("{flag}={s}"))))
            .collect::<Result<_>>()?,
        other => vec![format!("{flag}={}", scalar(other)?).into()],
    })
}

/// Extra arguments that inject config values for flags the user did not
/// pass on the command line. Append them after the user's own arguments.
pub fn config_args(
    sub: &Command,
    sub_matches: &ArgMatches,
    config: &toml::Table,
    origin: &Path,
) -> Result<Vec<OsString>> {
    let name = sub.get_name();
    let mut entries: BTreeMap<&str, (&toml::Value, bool)> = BTreeMap::new();
    for (k, v) in config {
        if !v.is_table() {
            entries.insert(k, (v, false));
        }
    }
    if let Some(section) = config.get(name) {
        let table = section
            .as_table()
            .ok_or_else(|| Error::parse(origin, None, format!("[{name}] must be a table")))?;
        for (k, v) in table {
            entries.insert(k, (v, true));
        }
    }
    let mut out = Vec::new();
    for (key, (value, scoped)) in entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_id() == key) else {
            if scoped {
                return Err(Error::Validation(format!(
                    "{}: [{name}] has no option {key:?}",
                    origin.display()
                )));
            }
            continue;
        };
        if sub_matches.value_source(key) == Some(ValueSource::CommandLine) {
            continue;
        }
        let flag = format!("--{}", arg.get_long().unwrap_or(key));
        out.extend(value_args(&flag, value, origin)?);
    }
    Ok(out)
}

/// Interpretation table from `lower_bound = label` lines; `#` starts a
/// comment.
pub fn parse_interpretation_table(text: &str, origin: &Path) -> Result<InterpretationTable> {
    let mut bands = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (bound, label) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(origin, Some(i + 1), "expected `lower_bound = label`"))?;
        let lower_bound: f64 = bound.trim().parse().map_err(|_| {
            Error::parse(
                origin,
                Some(i + 1),
                format!("bad lower bound {:?}", bound.trim()),
            )
        })?;
        bands.push(Band {
            lower_bound,
            label: label.trim().trim_matches('"').to_string(),
        });
    }
    Ok(InterpretationTable::new(bands)?)
}

pub fn read_interpretation_table(path: &Path) -> Result<InterpretationTable> {
    parse_interpretation_table(&read_to_string(path)?, path)
}

fn csv_records(
    text: &str,
    origin: &Path,
    header: &[&str],
) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(origin, None, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if out.is_empty() && rec.get(0) == header.first().copied() {
            continue;
        }
        if rec.len() < header.len() {
            return Err(Error::parse(
                origin,
                Some(line),
                format!("expected columns {}", header.join(",")),
            ));
        }
        out.push((line, rec));
    }
    Ok(out)
}

/// `image_id,film_id` rows; a header row with those names is optional.
pub fn parse_film_map(text: &str, origin: &Path) -> Result<FilmMap> {
    let mut map = FilmMap::new();
    for (line, rec) in csv_records(text, origin, &["image_id", "film_id"])? {
        let (img, film) = (&rec[0], &rec[1]);
        if img.is_empty() || film.is_empty() {
            return Err(Error::parse(origin, Some(line), "empty image or film id"));
        }
        map.assign(img, film).map_err(|_| {
            Error::parse(
                origin,
                Some(line),
                format!("image {img:?} assigned to two films"),
            )
        })?;
    }
    Ok(map)
}

pub fn read_film_map(path: &Path) -> Result<FilmMap> {
    parse_film_map(&read_to_string(path)?, path)
}

pub const COUNTS_COLUMNS: [&str; 4] = ["film_id", "trophozoites", "wbcs", "images"];

/// Per-film counts as `film_id,trophozoites,wbcs,images`.
pub fn parse_counts(text: &str, source: CountSource, origin: &Path) -> Result<Vec<FilmCounts>> {
    let mut out: Vec<FilmCounts> = Vec::new();
    for (line, rec) in csv_records(text, origin, &COUNTS_COLUMNS)? {
        let num = |i: usize| -> Result<u64> {
            rec[i].parse().map_err(|_| {
                Error::parse(
                    origin,
                    Some(line),
                    format!("{}: {:?} is not a count", COUNTS_COLUMNS[i], &rec[i]),
                )
            })
        };
        let images = num(3)?;
        if images == 0 || images > u64::from(u32::MAX) {
            return Err(Error::parse(
                origin,
                Some(line),
                "images must be a positive count",
            ));
        }
        let film_id = rec[0].to_string();
        if out.iter().any(|c| c.film_id == film_id) {
            return Err(Error::parse(
                origin,
                Some(line),
                format!("duplicate film {film_id:?}"),
            ));
        }
        out.push(FilmCounts {
            film_id,
            trophozoites: num(1)?,
            wbcs: num(2)?,
            images_counted: images as u32,
            source,
        });
    }
    Ok(out)
}

pub fn read_counts(path: &Path, source: CountSource) -> Result<Vec<FilmCounts>> {
    parse_counts(&read_to_string(path)?, source, path)
}

pub fn counts_csv(counts: &[FilmCounts]) -> String {
    let mut s = COUNTS_COLUMNS.join(",") + "\n";
    for c in counts {
        s.push_str(&format!(
            "{},{},{},{}\n",
            c.film_id, c.trophozoites, c.wbcs, c.images_counted
        ));
    }
    s
}

pub const METADATA_COLUMNS: [&str; 7] = [
    "image_id",
    "slide_id",
    "stage_x",
    "stage_y",
    "phone_zoom",
    "objective_magnification",
    "stain",
];

/// Capture metadata keyed by image id. Empty cells mean "not recorded".
pub fn parse_metadata(text: &str, origin: &Path) -> Result<BTreeMap<String, CaptureMetadata>> {
    let mut out = BTreeMap::new();
    for (line, rec) in csv_records(text, origin, &METADATA_COLUMNS)? {
        let bad = |m: String| Error::parse(origin, Some(line), m);
        let dec = |i: usize| -> Result<Option<f64>> {
            let s = &rec[i];
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| bad(format!("{}: {s:?} is not a number", METADATA_COLUMNS[i])))
        };
        let magnification =
            match &rec[5] {
                "" => None,
                s => Some(s.trim_end_matches(['x', 'X']).parse::<u32>().map_err(|_| {
                    bad(format!("objective_magnification: {s:?} is not an integer"))
                })?),
            };
        let meta = CaptureMetadata {
            slide_id: rec[1].to_string(),
            stage_x: dec(2)?,
            stage_y: dec(3)?,
            phone_zoom: dec(4)?,
            objective_magnification: magnification,
            stain: Some(rec[6].to_string()).filter(|s| !s.is_empty()),
        };
        meta.validate().map_err(|e| bad(e.to_string()))?;
        if out.insert(rec[0].to_string(), meta).is_some() {
            return Err(bad(format!("duplicate image {:?}", &rec[0])));
        }
    }
    Ok(out)
}

pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, CaptureMetadata>> {
    parse_metadata(&read_to_string(path)?, path)
}

pub fn metadata_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a CaptureMetadata)>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(METADATA_COLUMNS).expect("in-memory write");
    let opt = |v: Option<String>| v.unwrap_or_default();
    for (id, m) in rows {
        w.write_record([
            id.to_string(),
            m.slide_id.clone(),
            opt(m.stage_x.map(|v| v.to_string())),
            opt(m.stage_y.map(|v| v.to_string())),
            opt(m.phone_zoom.map(|v| v.to_string())),
            opt(m.objective_magnification.map(|v| v.to_string())),
            opt(m.stain.clone()),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Default aliases plus `name=class` overrides, e.g. `troph=trophozoite`.
pub fn label_aliases(extra: &[String]) -> Result<LabelAliases> {
    let mut aliases = LabelAliases::default();
    for spec in extra {
        let (name, class) = spec.split_once('=').ok_or_else(|| {
            Error::Validation(format!("label alias {spec:?} must look like name=class"))
        })?;
        let class: ClassLabel = class.parse()?;
        aliases.insert(name, class);
    }
    Ok(aliases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpretation_table_file() {
        let t = parse_interpretation_table(
            "# density bands\n0 = none seen\n100 = low   # comment\n10000=high\n",
            Path::new("t"),
        )
        .unwrap();
        assert_eq!(t.bands().len(), 3);
        assert_eq!(smearkit_core::interpret(150.0, &t), "low");
        assert!(parse_interpretation_table("5 = x\n", Path::new("t")).is_err());
        assert!(parse_interpretation_table("0 x\n", Path::new("t")).is_err());
    }

    #[test]
    fn film_map_with_and_without_header() {
        let a = parse_film_map("image_id,film_id\nimg1,f1\nimg2,f1\n", Path::new("m")).unwrap();
        let b = parse_film_map("img1,f1\nimg2,f1\n", Path::new("m")).unwrap();
        assert_eq!(a, b);
        assert!(parse_film_map("img1,f1\nimg1,f2\n", Path::new("m")).is_err());
    }

    #[test]
    fn counts_round_trip() {
        let c = parse_counts(
            "film_id,trophozoites,wbcs,images\ns1,10,20,3\ns2,0,5,1\n",
            CountSource::Expert,
            Path::new("c"),
        )
        .unwrap();
        assert_eq!(c[0].trophozoites, 10);
        assert_eq!(
            parse_counts(&counts_csv(&c), CountSource::Expert, Path::new("c")).unwrap(),
            c
        );
        assert!(parse_counts("s1,1,2,0\n", CountSource::Model, Path::new("c")).is_err());
        assert!(parse_counts("s1,1,2\n", CountSource::Model, Path::new("c")).is_err());
        assert!(parse_counts("s1,1,2,1\ns1,1,2,1\n", CountSource::Model, Path::new("c")).is_err());
    }

    #[test]
    fn metadata_round_trip() {
        let text = "image_id,slide_id,stage_x,stage_y,phone_zoom,objective_magnification,stain\n\
                    a,slide1,12.5,,10,1000x,\"Giemsa, 3%\"\nb,slide2,,,,,\n";
        let m = parse_metadata(text, Path::new("m")).unwrap();
        assert_eq!(m["a"].objective_magnification, Some(1000));
        assert_eq!(m["a"].stain.as_deref(), Some("Giemsa, 3%"));
        assert_eq!(m["b"].stage_x, None);
        let again = parse_metadata(
            &metadata_csv(m.iter().map(|(k, v)| (k.as_str(), v))),
            Path::new("m"),
        )
        .unwrap();
        assert_eq!(again, m);
        assert!(parse_metadata("a,,1,1,1,1,x\n", Path::new("m")).is_err());
        assert!(parse_metadata("a,s,-1,1,1,1,x\n", Path::new("m")).is_err());
    }

    #[test]
    fn aliases() {
        let a = label_aliases(&["troph=trophozoite".into()]).unwrap();
        assert_eq!(a.resolve("Troph").unwrap(), ClassLabel::Trophozoite);
        assert!(label_aliases(&["troph".into()]).is_err());
        assert!(label_aliases(&["x=rbc".into()]).is_err());
    }
}
