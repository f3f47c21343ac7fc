//! TIMIT `.phn`-style segmentation files: one `start end label` per line,
//! in sample-index units with `end` exclusive.

use std::fs;
use std::path::Path;

use super::{PhoneMap, PhoneSegment, PhoneSet};
use crate::{Error, Result};

/// One parsed line, before label validation. `label` is absent for
/// unlabeled `start end` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentLine {
    pub line: usize,
    pub start: usize,
    pub end: usize,
    pub label: Option<String>,
}

/// Parses every non-empty line; checks numeric fields and `start < end`.
pub fn parse_segment_lines(text: &str) -> Result<Vec<SegmentLine>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Validation(format!(
                "line {line}: expected `start end [label]`, got `{}`",
                raw.trim()
            )));
        }
        let num = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| {
                Error::Validation(format!("line {line}: {what} `{s}` is not a sample index"))
            })
        };
        let start = num(fields[0], "start")?;
        let end = num(fields[1], "end")?;
        if start >= end {
            return Err(Error::Validation(format!(
                "line {line}: start {start} is not before end {end}"
            )));
        }
        out.push(SegmentLine {
            line,
            start,
            end,
            label: fields.get(2).map(|s| s.to_string()),
        });
    }
    Ok(out)
}

/// Parses and validates a labeled segmentation, in file order.
pub fn parse_segmentation(text: &str, phone_set: &PhoneSet) -> Result<Vec<PhoneSegment>> {
    parse_segmentation_mapped(text, phone_set, None)
}

/// As [`parse_segmentation`], renaming labels through `map` first. Segments
/// whose label maps to nothing are skipped.
pub fn parse_segmentation_mapped(
    text: &str,
    phone_set: &PhoneSet,
    map: Option<&PhoneMap>,
) -> Result<Vec<PhoneSegment>> {
    let mut out = Vec::new();
    for seg in parse_segment_lines(text)? {
        let label = seg.label.ok_or_else(|| {
            Error::Validation(format!("line {}: missing phone label", seg.line))
        })?;
        let label = match map {
            Some(m) => match m.apply(&label) {
                Some(l) => l.to_string(),
                None => continue,
            },
            None => label,
        };
        if !phone_set.contains(&label) {
            return Err(Error::Validation(format!(
                "line {}: unknown phone label `{label}`",
                seg.line
            )));
        }
        out.push(PhoneSegment {
            start: seg.start,
            end: seg.end,
            label,
        });
    }
    Ok(out)
}

pub fn read_segmentation(path: impl AsRef<Path>, phone_set: &PhoneSet) -> Result<Vec<PhoneSegment>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_segmentation(&text, phone_set)
}

pub fn format_segmentation(segments: &[PhoneSegment]) -> String {
    segments
        .iter()
        .map(|s| format!("{} {} {}\n", s.start, s.end, s.label))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let segs = parse_segmentation("0 1600 sil\n", &PhoneSet::timit48()).unwrap();
        assert_eq!(
            segs,
            vec![PhoneSegment {
                start: 0,
                end: 1600,
                label: "sil".into()
            }]
        );
    }

    #[test]
    fn file_order_preserved() {
        let segs = parse_segmentation("500 900 aa\n0 500 sil\n\n900 1000 s\n", &PhoneSet::timit48())
            .unwrap();
        let starts: Vec<_> = segs.iter().map(|s| s.start).collect();
        assert_eq!(starts, vec![500, 0, 900]);
    }

    #[test]
    fn inverted_interval_names_line() {
        let err = parse_segmentation("0 10 sil\n100 50 aa\n", &PhoneSet::timit48()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_label_names_line() {
        let err = parse_segmentation("0 10 sil\n\n10 20 qq\n", &PhoneSet::timit48()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(err.to_string().contains("qq"));
    }

    #[test]
    fn timit_labels_fold_through_map() {
        let text = "0 100 h#\n100 200 q\n200 300 ux\n";
        let segs =
            parse_segmentation_mapped(text, &PhoneSet::timit48(), Some(&PhoneMap::timit61()))
                .unwrap();
        let labels: Vec<_> = segs.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, vec!["sil", "uw"]);
    }

    #[test]
    fn unlabeled_lines_parse_without_labels() {
        let lines = parse_segment_lines("0 10\n10 20 aa\n").unwrap();
        assert_eq!(lines[0].label, None);
        assert_eq!(lines[1].label.as_deref(), Some("aa"));
    }
}
