use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::meta::GridMeta;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Diversity,
    ProtoStandard,
    ProtoAdaptive,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Random,
        Strategy::Diversity,
        Strategy::ProtoStandard,
        Strategy::ProtoAdaptive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Diversity => "diversity",
            Strategy::ProtoStandard => "proto_standard",
            Strategy::ProtoAdaptive => "proto_adaptive",
        }
    }

    /// Accepts both `proto_standard` and the CLI spelling `proto-standard`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.replace('-', "_").as_str() {
            "random" => Some(Strategy::Random),
            "diversity" => Some(Strategy::Diversity),
            "proto_standard" => Some(Strategy::ProtoStandard),
            "proto_adaptive" => Some(Strategy::ProtoAdaptive),
            _ => None,
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned annotation region in level-0 pixels; covers
/// `[x_px, x_px + w_px) x [y_px, y_px + h_px)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub wsi_id: String,
    pub x_px: u64,
    pub y_px: u64,
    pub w_px: u64,
    pub h_px: u64,
    pub score: f64,
    pub rank: usize,
    pub strategy: Strategy,
}

impl Region {
    pub fn overlaps(&self, other: &Region) -> bool {
        self.wsi_id == other.wsi_id
            && self.x_px < other.x_px + other.w_px
            && other.x_px < self.x_px + self.w_px
            && self.y_px < other.y_px + other.h_px
            && other.y_px < self.y_px + self.h_px
    }

    pub fn area_px(&self) -> u64 {
        self.w_px * self.h_px
    }

    pub fn check_bounds(&self, meta: &GridMeta) -> Result<()> {
        if self.x_px + self.w_px > meta.level0_w || self.y_px + self.h_px > meta.level0_h {
            return Err(Error::InvalidRegion(format!(
                "region at ({}, {}) size {}x{} exceeds slide {} bounds {}x{}",
                self.x_px, self.y_px, self.w_px, self.h_px, meta.wsi_id, meta.level0_w, meta.level0_h
            )));
        }
        Ok(())
    }
}

/// Checks region sizes and pairwise disjointness (per slide).
pub fn validate_regions(regions: &[Region]) -> Result<()> {
    for (i, r) in regions.iter().enumerate() {
        if r.w_px == 0 || r.h_px == 0 {
            return Err(Error::InvalidRegion(format!("region {i} has zero size")));
        }
        if !r.score.is_finite() {
            return Err(Error::InvalidRegion(format!("region {i} has non-finite score")));
        }
    }
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            if regions[i].overlaps(&regions[j]) {
                return Err(Error::Overlap { first: i, second: j });
            }
        }
    }
    Ok(())
}

pub fn regions_to_jsonl(regions: &[Region]) -> Result<String> {
    validate_regions(regions)?;
    let mut out = String::new();
    for r in regions {
        out.push_str(&serde_json::to_string(r).expect("region serializes"));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_regions(regions: &[Region], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = regions_to_jsonl(regions)?;
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_regions(path: impl AsRef<Path>) -> Result<Vec<Region>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut regions = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: Region = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        regions.push(r);
    }
    validate_regions(&regions)?;
    Ok(regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(x: u64, y: u64, w: u64) -> Region {
        Region {
            wsi_id: "s".into(),
            x_px: x,
            y_px: y,
            w_px: w,
            h_px: w,
            score: 1.0,
            rank: 0,
            strategy: Strategy::ProtoStandard,
        }
    }

    #[test]
    fn single_region_line_has_fixed_field_order() {
        let text = regions_to_jsonl(&[region(0, 0, 4096)]).unwrap();
        assert_eq!(
            text,
            "{\"wsi_id\":\"s\",\"x_px\":0,\"y_px\":0,\"w_px\":4096,\"h_px\":4096,\"score\":1.0,\"rank\":0,\"strategy\":\"proto_standard\"}\n"
        );
    }

    #[test]
    fn overlapping_pair_rejected() {
        let err = regions_to_jsonl(&[region(0, 0, 100), region(50, 50, 100)]).unwrap_err();
        assert!(matches!(err, Error::Overlap { first: 0, second: 1 }));
    }

    #[test]
    fn touching_regions_do_not_overlap() {
        assert!(regions_to_jsonl(&[region(0, 0, 100), region(100, 0, 100)]).is_ok());
    }

    #[test]
    fn same_coordinates_on_different_slides_allowed() {
        let mut b = region(0, 0, 100);
        b.wsi_id = "t".into();
        assert!(validate_regions(&[region(0, 0, 100), b]).is_ok());
    }

    #[test]
    fn empty_list_writes_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        write_regions(&[], &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap().len(), 0);
        assert!(read_regions(&p).unwrap().is_empty());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let mut b = region(200, 0, 100);
        b.rank = 1;
        b.score = 0.25;
        let regions = vec![region(0, 0, 100), b];
        write_regions(&regions, &p).unwrap();
        assert_eq!(read_regions(&p).unwrap(), regions);
    }

    #[test]
    fn strategy_spellings() {
        assert_eq!(Strategy::parse("proto-adaptive"), Some(Strategy::ProtoAdaptive));
        assert_eq!(Strategy::parse("proto_standard"), Some(Strategy::ProtoStandard));
        assert_eq!(Strategy::parse("kmeans"), None);
    }
}
