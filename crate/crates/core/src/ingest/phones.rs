//! Phone label sets and scoring-equivalence groups.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// The standard 48-phone TIMIT folding.
pub const TIMIT_48: [&str; 48] = [
    "iy", "ih", "eh", "ae", "ix", "ax", "ah", "uw", "uh", "ao", "aa", "ey", "ay", "oy", "aw", "ow",
    "l", "el", "r", "y", "w", "er", "m", "n", "en", "ng", "ch", "jh", "dh", "b", "d", "dx", "g",
    "p", "t", "k", "z", "zh", "v", "f", "th", "s", "sh", "hh", "cl", "vcl", "epi", "sil",
];

/// Confusions inside these groups are not counted as errors.
pub const TIMIT_GROUPS: [&[&str]; 7] = [
    &["sil", "cl", "vcl", "epi"],
    &["el", "l"],
    &["en", "n"],
    &["sh", "zh"],
    &["ao", "aa"],
    &["ih", "ix"],
    &["ah", "ax"],
];

/// Folding of the 61 TIMIT transcription labels onto [`TIMIT_48`]. Labels
/// mapped to `None` are dropped.
pub const TIMIT_61_TO_48: [(&str, Option<&str>); 16] = [
    ("ax-h", Some("ax")),
    ("axr", Some("er")),
    ("em", Some("m")),
    ("eng", Some("ng")),
    ("nx", Some("n")),
    ("hv", Some("hh")),
    ("ux", Some("uw")),
    ("bcl", Some("vcl")),
    ("dcl", Some("vcl")),
    ("gcl", Some("vcl")),
    ("pcl", Some("cl")),
    ("tcl", Some("cl")),
    ("kcl", Some("cl")),
    ("h#", Some("sil")),
    ("pau", Some("sil")),
    ("q", None),
];

#[derive(Debug, Clone, PartialEq)]
pub struct PhoneSet {
    labels: Vec<String>,
    groups: Vec<Vec<String>>,
    index: HashMap<String, usize>,
    group_of: Vec<Option<usize>>,
}

impl PhoneSet {
    /// Builds a phone set, rejecting duplicate labels, unknown group members
    /// and overlapping groups.
    pub fn new(labels: Vec<String>, groups: Vec<Vec<String>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("phone set is empty".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(Error::Validation(format!("invalid phone label `{l}`")));
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate phone label `{l}`")));
            }
        }
        let mut group_of = vec![None; labels.len()];
        for (g, members) in groups.iter().enumerate() {
            for m in members {
                let &i = index.get(m).ok_or_else(|| {
                    Error::Validation(format!("group member `{m}` is not in the phone set"))
                })?;
                if group_of[i].is_some() {
                    return Err(Error::Validation(format!(
                        "phone `{m}` appears in more than one equivalence group"
                    )));
                }
                group_of[i] = Some(g);
            }
        }
        Ok(PhoneSet {
            labels,
            groups,
            index,
            group_of,
        })
    }

    /// The 48-phone set with its seven equivalence groups.
    pub fn timit48() -> Self {
        let labels = TIMIT_48.iter().map(|s| s.to_string()).collect();
        let groups = TIMIT_GROUPS
            .iter()
            .map(|g| g.iter().map(|s| s.to_string()).collect())
            .collect();
        PhoneSet::new(labels, groups).expect("built-in phone set is valid")
    }

    /// A phone set over `labels`, keeping the parts of the default groups that
    /// still have at least two members.
    pub fn with_default_groups(labels: Vec<String>) -> Result<Self> {
        let groups = TIMIT_GROUPS
            .iter()
            .map(|g| {
                g.iter()
                    .filter(|m| labels.iter().any(|l| l == *m))
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
            })
            .filter(|g| g.len() >= 2)
            .collect();
        PhoneSet::new(labels, groups)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    /// True iff `a == b` or both labels share an equivalence group.
    pub fn scoring_equivalent(&self, a: &str, b: &str) -> Result<bool> {
        let ia = self.require(a)?;
        let ib = self.require(b)?;
        Ok(self.equivalent_index(ia, ib))
    }

    pub fn equivalent_index(&self, a: usize, b: usize) -> bool {
        a == b || matches!((self.group_of[a], self.group_of[b]), (Some(x), Some(y)) if x == y)
    }

    /// Parses a labels file (one label per line) and an optional groups file
    /// (one comma-joined group per line). Blank lines and `#` comments are
    /// ignored.
    pub fn parse(labels_text: &str, groups_text: Option<&str>) -> Result<Self> {
        let labels = content_lines(labels_text).map(str::to_string).collect();
        let groups = groups_text
            .map(|t| {
                content_lines(t)
                    .map(|line| {
                        line.split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect()
                    })
                    .collect()
            })
            .unwrap_or_default();
        PhoneSet::new(labels, groups)
    }

    pub fn read(labels_path: &Path, groups_path: Option<&Path>) -> Result<Self> {
        let labels = fs::read_to_string(labels_path).map_err(|e| Error::io(labels_path, e))?;
        let groups = groups_path
            .map(|p| fs::read_to_string(p).map_err(|e| Error::io(p, e)))
            .transpose()?;
        PhoneSet::parse(&labels, groups.as_deref())
    }

    pub fn labels_text(&self) -> String {
        self.labels.iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn groups_text(&self) -> String {
        self.groups.iter().map(|g| format!("{}\n", g.join(","))).collect()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}

/// Label renaming applied before validation, e.g. the 61→48 TIMIT folding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhoneMap {
    map: HashMap<String, Option<String>>,
}

impl PhoneMap {
    pub fn timit61() -> Self {
        PhoneMap {
            map: TIMIT_61_TO_48
                .iter()
                .map(|(k, v)| (k.to_string(), v.map(str::to_string)))
                .collect(),
        }
    }

    /// Each line is `from to` (rename) or `from` alone (drop).
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [from] => map.insert(from.to_string(), None),
                [from, to] => map.insert(from.to_string(), Some(to.to_string())),
                _ => {
                    return Err(Error::Format(format!(
                        "phone map line {}: expected `from [to]`",
                        n + 1
                    )))
                }
            };
        }
        Ok(PhoneMap { map })
    }

    /// `None` means the label is dropped.
    pub fn apply<'a>(&'a self, label: &'a str) -> Option<&'a str> {
        match self.map.get(label) {
            Some(target) => target.as_deref(),
            None => Some(label),
        }
    }
}
