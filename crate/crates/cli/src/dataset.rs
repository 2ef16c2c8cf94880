//! On-disk dataset layout shared by `gen-fixtures` and `sweep`.
//!
//! A dataset directory holds `dataset.json` (`{"slides": [...]}`) and, per
//! slide id: `<id>.emb` with `<id>.grid.json`, the map `<id>.map` with its
//! sidecars, `<id>.tissue.pgm`, and optionally `<id>.class.pgm` and
//! `<id>.points.csv`.

use std::path::{Path, PathBuf};

use protosample::eval::{GroundTruth, SweepWsi};
use protosample::io::{load_grid, read_json, read_mask, sidecar_path, write_json};
use protosample::simmap::read_map;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetIndex {
    pub slides: Vec<String>,
}

pub struct SlidePaths {
    pub grid: PathBuf,
    pub map: PathBuf,
    pub tissue: PathBuf,
    pub class: PathBuf,
    pub points: PathBuf,
}

pub fn slide_paths(dir: &Path, id: &str) -> SlidePaths {
    SlidePaths {
        grid: dir.join(format!("{id}.emb")),
        map: dir.join(format!("{id}.map")),
        tissue: dir.join(format!("{id}.tissue.pgm")),
        class: dir.join(format!("{id}.class.pgm")),
        points: dir.join(format!("{id}.points.csv")),
    }
}

pub fn write_index(dir: &Path, slides: Vec<String>) -> Result<PathBuf, Failure> {
    let path = dir.join("dataset.json");
    write_json(&DatasetIndex { slides }, &path)?;
    Ok(path)
}

/// `x_px,y_px` rows; a non-numeric first line is taken as a header.
pub fn read_points(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Option<(f64, f64)> = line
            .split_once(',')
            .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)));
        match parsed {
            Some(p) => out.push(p),
            None if i == 0 => {}
            None => {
                return Err(Failure::Data(format!("{}:{}: expected x_px,y_px", path.display(), i + 1)));
            }
        }
    }
    Ok(out)
}

pub fn write_points(path: &Path, points: &[(f64, f64)]) -> Result<(), Failure> {
    let mut text = String::from("x_px,y_px\n");
    for (x, y) in points {
        text.push_str(&format!("{x},{y}\n"));
    }
    std::fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Loads every slide listed in `<dir>/dataset.json`, returning the slides and
/// the list of files read.
pub fn load_dataset(dir: &Path) -> Result<(Vec<SweepWsi>, Vec<PathBuf>), Failure> {
    let index_path = dir.join("dataset.json");
    let index: DatasetIndex = read_json(&index_path)?;
    let mut files = vec![index_path];
    let mut slides = Vec::with_capacity(index.slides.len());
    for id in &index.slides {
        let p = slide_paths(dir, id);
        let (grid, meta) = load_grid(&p.grid, None)?;
        let map = read_map(&p.map)?;
        let tissue_mask = read_mask(&p.tissue)?;
        files.extend([
            p.grid.clone(),
            sidecar_path(&p.grid, ".grid.json"),
            p.map.clone(),
            sidecar_path(&p.map, ".map.json"),
            sidecar_path(&p.map, ".excluded.pgm"),
            p.tissue.clone(),
            sidecar_path(&p.tissue, ".mask.json"),
        ]);
        let class_mask = if p.class.exists() {
            files.extend([p.class.clone(), sidecar_path(&p.class, ".mask.json")]);
            Some(read_mask(&p.class)?)
        } else {
            None
        };
        let points = if p.points.exists() {
            files.push(p.points.clone());
            Some(read_points(&p.points)?)
        } else {
            None
        };
        let gt = GroundTruth::new(tissue_mask, class_mask, points)?;
        slides.push(SweepWsi { grid, meta, map, gt });
    }
    Ok((slides, files))
}
