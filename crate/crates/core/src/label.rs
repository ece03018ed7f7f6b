use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// The two object classes annotated on thick smears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassLabel {
    Trophozoite,
    Wbc,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Trophozoite, ClassLabel::Wbc];

    /// Canonical spelling used in every file this toolkit writes.
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Trophozoite => "trophozoite",
            ClassLabel::Wbc => "wbc",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    /// Accepts only the canonical spellings (case-insensitive). Use
    /// [`LabelAliases`] for annotation-tool specific names.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("trophozoite") {
            Ok(ClassLabel::Trophozoite)
        } else if s.eq_ignore_ascii_case("wbc") {
            Ok(ClassLabel::Wbc)
        } else {
            Err(Error::UnknownLabel(s.to_string()))
        }
    }
}

/// Case-insensitive mapping from annotation label strings to classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAliases {
    map: BTreeMap<String, ClassLabel>,
}

impl Default for LabelAliases {
    fn default() -> Self {
        let mut aliases = Self::empty();
        aliases.insert("trophozoite", ClassLabel::Trophozoite);
        aliases.insert("wbc", ClassLabel::Wbc);
        aliases.insert("white blood cell", ClassLabel::Wbc);
        aliases
    }
}

impl LabelAliases {
    pub fn empty() -> Self {
        Self {
            map: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: &str, label: ClassLabel) {
        self.map.insert(normalize(name), label);
    }

    pub fn resolve(&self, name: &str) -> Result<ClassLabel> {
        self.map
            .get(&normalize(name))
            .copied()
            .ok_or_else(|| Error::UnknownLabel(name.trim().to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ClassLabel)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

fn normalize(name: &str) -> String {
    name.trim().to_lowercase()
}
