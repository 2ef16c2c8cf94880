use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One image-caption pair from a corpus, stored as a JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub id: String,
    pub caption: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_caption: Option<String>,
}

/// Parses a JSON-lines caption corpus. Blank lines are skipped; line numbers
/// in errors are 1-based.
pub fn parse_captions(text: &str, path: &Path) -> Result<Vec<CaptionRecord>> {
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CaptionRecord = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.caption.trim().is_empty() {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                message: "empty caption".into(),
            });
        }
        if let Some(&first) = seen.get(&rec.id) {
            return Err(Error::DuplicateId {
                id: rec.id,
                first,
                second: line_no,
            });
        }
        seen.insert(rec.id.clone(), line_no);
        records.push(rec);
    }
    Ok(records)
}

pub fn read_captions(path: impl AsRef<Path>) -> Result<Vec<CaptionRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_captions(&text, path)
}

pub fn write_captions(records: &[CaptionRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::json(path, e))?;
        out.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str) -> String {
        format!(r#"{{"id":"{id}","caption":"caption {id}","source":"fixture"}}"#)
    }

    #[test]
    fn three_lines_in_order() {
        let text = [rec("a"), rec("b"), rec("c")].join("\n");
        let recs = parse_captions(&text, Path::new("x")).unwrap();
        let ids: Vec<_> = recs.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(recs[0].parent_caption.is_none());
    }

    #[test]
    fn empty_file() {
        assert!(parse_captions("", Path::new("x")).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_names_both_lines() {
        let text = [rec("a"), rec("dup"), rec("b"), rec("c"), rec("dup")].join("\n");
        match parse_captions(&text, Path::new("x")) {
            Err(Error::DuplicateId { id, first, second }) => {
                assert_eq!(id, "dup");
                assert_eq!((first, second), (2, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = format!("{}\n{{not json\n", rec("a"));
        match parse_captions(&text, Path::new("x")) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let recs = vec![
            CaptionRecord {
                id: "1".into(),
                caption: "Breast carcinoma.".into(),
                source: "arch".into(),
                parent_caption: None,
            },
            CaptionRecord {
                id: "1#A".into(),
                caption: "low grade.".into(),
                source: "arch".into(),
                parent_caption: Some("(A) low grade.".into()),
            },
        ];
        write_captions(&recs, &path).unwrap();
        assert_eq!(read_captions(&path).unwrap(), recs);
    }
}
