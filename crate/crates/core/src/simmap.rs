//! Per-slide similarity maps: each grid cell holds the best cosine
//! similarity between its patch embedding and a class prototype set,
//! clamped to `[0, 1]`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{
    read_container, read_json, read_pgm, sidecar_path, write_container, write_json, write_pgm,
    BinaryMask, EmbeddingContainer, GrayImage, GridMeta, Region, RgbImage,
};
use crate::retrieval::PrototypeSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    wsi_id: String,
    grid_h: usize,
    grid_w: usize,
    values: Vec<f32>,
    excluded: Vec<bool>,
}

impl SimilarityMap {
    /// Values must lie in `[0, 1]`; excluded cells are forced to 0.
    pub fn new(
        wsi_id: impl Into<String>,
        grid_h: usize,
        grid_w: usize,
        mut values: Vec<f32>,
        excluded: Vec<bool>,
    ) -> Result<Self> {
        let cells = grid_h * grid_w;
        if values.len() != cells || excluded.len() != cells {
            return Err(Error::Shape(format!(
                "{grid_h}x{grid_w} map needs {cells} values and flags, got {} and {}",
                values.len(),
                excluded.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "map value {} at cell {i} is outside [0, 1]",
                values[i]
            )));
        }
        for (v, &e) in values.iter_mut().zip(&excluded) {
            if e {
                *v = 0.0;
            }
        }
        Ok(Self {
            wsi_id: wsi_id.into(),
            grid_h,
            grid_w,
            values,
            excluded,
        })
    }

    /// Map without excluded cells.
    pub fn from_values(wsi_id: impl Into<String>, grid_h: usize, grid_w: usize, values: Vec<f32>) -> Result<Self> {
        let n = values.len();
        Self::new(wsi_id, grid_h, grid_w, values, vec![false; n])
    }

    pub fn wsi_id(&self) -> &str {
        &self.wsi_id
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.values[y * self.grid_w + x]
    }

    pub fn is_excluded(&self, y: usize, x: usize) -> bool {
        self.excluded[y * self.grid_w + x]
    }

    pub fn check_meta(&self, meta: &GridMeta) -> Result<()> {
        if (self.grid_h, self.grid_w) != (meta.grid_h, meta.grid_w) {
            return Err(Error::Shape(format!(
                "map is {}x{} but grid metadata for {} is {}x{}",
                self.grid_h, self.grid_w, meta.wsi_id, meta.grid_h, meta.grid_w
            )));
        }
        Ok(())
    }
}

/// Cells flagged while building a map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MapReport {
    /// Cells whose embedding is the zero vector.
    pub zero_cells: Vec<usize>,
    /// Cells outside the tissue mask.
    pub masked_cells: usize,
}

/// Max cosine similarity of `patch` against the prototypes, clamped to `[0, 1]`.
pub fn patch_similarity(patch: &[f32], prototypes: &PrototypeSet) -> Result<f64> {
    if patch.len() != prototypes.dim() {
        return Err(Error::DimensionMismatch {
            left: patch.len(),
            right: prototypes.dim(),
        });
    }
    let pn = patch
        .iter()
        .map(|&v| f64::from(v) * f64::from(v))
        .sum::<f64>()
        .sqrt();
    if pn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let best = prototypes
        .embeddings()
        .iter_rows()
        .map(|p| {
            let (d, n2) = p.iter().zip(patch).fold((0.0f64, 0.0f64), |(d, n2), (&a, &b)| {
                (d + f64::from(a) * f64::from(b), n2 + f64::from(a) * f64::from(a))
            });
            d / (pn * n2.sqrt())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best.clamp(0.0, 1.0))
}

/// Scores every grid cell (row `gy * grid_w + gx`) against the prototypes.
/// Zero embeddings and, when a tissue mask is given, cells whose centre falls
/// off tissue are excluded with value 0.
pub fn build_similarity_map(
    grid: &EmbeddingContainer,
    meta: &GridMeta,
    prototypes: &PrototypeSet,
    tissue_mask: Option<&BinaryMask>,
) -> Result<(SimilarityMap, MapReport)> {
    meta.validate()?;
    meta.check_container(grid)?;
    if prototypes.is_empty() {
        return Err(Error::InvalidArgument("empty prototype set".into()));
    }
    if grid.cols() != prototypes.dim() {
        return Err(Error::DimensionMismatch {
            left: grid.cols(),
            right: prototypes.dim(),
        });
    }
    let half = meta.patch_px as f64 / 2.0;
    let cells: Vec<(f32, bool, bool)> = (0..meta.cells())
        .into_par_iter()
        .map(|i| {
            let (gy, gx) = (i / meta.grid_w, i % meta.grid_w);
            if let Some(mask) = tissue_mask {
                let cx = (gx as u64 * meta.stride_px) as f64 + half;
                let cy = (gy as u64 * meta.stride_px) as f64 + half;
                if !mask.at_level0(cx, cy) {
                    return (0.0, true, false);
                }
            }
            match patch_similarity(grid.row(i), prototypes) {
                Ok(v) => (v as f32, false, false),
                Err(_) => (0.0, true, true),
            }
        })
        .collect();
    let mut report = MapReport::default();
    let mut values = Vec::with_capacity(cells.len());
    let mut excluded = Vec::with_capacity(cells.len());
    for (i, (v, ex, zero)) in cells.into_iter().enumerate() {
        if zero {
            report.zero_cells.push(i);
        } else if ex {
            report.masked_cells += 1;
        }
        values.push(v);
        excluded.push(ex);
    }
    let map = SimilarityMap::new(meta.wsi_id.clone(), meta.grid_h, meta.grid_w, values, excluded)?;
    Ok((map, report))
}

/// Summed-area table in double precision with a zero guard row and column.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    h: usize,
    w: usize,
    table: Vec<f64>,
}

impl IntegralImage {
    pub fn new(values: &[f32], h: usize, w: usize) -> Self {
        assert_eq!(values.len(), h * w, "values do not match {h}x{w}");
        let stride = w + 1;
        let mut table = vec![0.0f64; (h + 1) * stride];
        for y in 0..h {
            let mut row_sum = 0.0f64;
            for x in 0..w {
                row_sum += f64::from(values[y * w + x]);
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row_sum;
            }
        }
        Self { h, w, table }
    }

    pub fn from_map(map: &SimilarityMap) -> Self {
        Self::new(map.values(), map.grid_h(), map.grid_w())
    }

    /// Sum over `[0, y] x [0, x]` inclusive.
    pub fn at(&self, y: usize, x: usize) -> f64 {
        self.table[(y + 1) * (self.w + 1) + x + 1]
    }

    /// Sum over the `h x w` window with top-left `(y, x)`.
    pub fn window_sum(&self, y: usize, x: usize, h: usize, w: usize) -> f64 {
        debug_assert!(y + h <= self.h && x + w <= self.w);
        let s = self.w + 1;
        let t = &self.table;
        t[(y + h) * s + x + w] - t[y * s + x + w] - t[(y + h) * s + x] + t[y * s + x]
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapSidecar {
    wsi_id: String,
    grid_h: usize,
    grid_w: usize,
}

/// Writes `<name>.emb` (values, `grid_h` rows x `grid_w` cols), the
/// `<name>.map.json` sidecar and the `<name>.excluded.pgm` bitmap.
pub fn write_map(map: &SimilarityMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let c = EmbeddingContainer::new(map.grid_h, map.grid_w, map.values.clone(), false)?;
    write_container(&c, path)?;
    write_json(
        &MapSidecar {
            wsi_id: map.wsi_id.clone(),
            grid_h: map.grid_h,
            grid_w: map.grid_w,
        },
        sidecar_path(path, ".map.json"),
    )?;
    let bitmap = GrayImage::new(
        map.grid_w,
        map.grid_h,
        map.excluded.iter().map(|&e| if e { 255 } else { 0 }).collect(),
    )?;
    write_pgm(&bitmap, sidecar_path(path, ".excluded.pgm"))
}

pub fn read_map(path: impl AsRef<Path>) -> Result<SimilarityMap> {
    let path = path.as_ref();
    let c = read_container(path)?;
    let side: MapSidecar = read_json(sidecar_path(path, ".map.json"))?;
    if (c.rows(), c.cols()) != (side.grid_h, side.grid_w) {
        return Err(Error::Shape(format!(
            "map container is {}x{}, sidecar says {}x{}",
            c.rows(),
            c.cols(),
            side.grid_h,
            side.grid_w
        )));
    }
    let bitmap = read_pgm(sidecar_path(path, ".excluded.pgm"))?;
    if (bitmap.height, bitmap.width) != (side.grid_h, side.grid_w) {
        return Err(Error::Shape("excluded bitmap does not match map shape".into()));
    }
    let excluded = bitmap.data.iter().map(|&b| b != 0).collect();
    SimilarityMap::new(side.wsi_id, side.grid_h, side.grid_w, c.into_values(), excluded)
}

/// 8-bit visualization, one pixel per cell (value x 255).
pub fn render_gray(map: &SimilarityMap) -> GrayImage {
    GrayImage {
        width: map.grid_w,
        height: map.grid_h,
        data: map
            .values
            .iter()
            .map(|&v| (f64::from(v) * 255.0).round() as u8)
            .collect(),
    }
}

/// Map visualization with region outlines drawn in red at map resolution.
pub fn render_overlay(map: &SimilarityMap, regions: &[Region], meta: &GridMeta) -> RgbImage {
    let mut img = RgbImage::from_gray(&render_gray(map));
    let s = meta.stride_px;
    for r in regions.iter().filter(|r| r.wsi_id == map.wsi_id) {
        let x0 = (r.x_px / s) as usize;
        let y0 = (r.y_px / s) as usize;
        let x1 = (r.x_px + r.w_px).div_ceil(s).min(map.grid_w as u64) as usize;
        let y1 = (r.y_px + r.h_px).div_ceil(s).min(map.grid_h as u64) as usize;
        if x0 >= x1 || y0 >= y1 {
            continue;
        }
        for x in x0..x1 {
            img.put(y0, x, [255, 0, 0]);
            img.put(y1 - 1, x, [255, 0, 0]);
        }
        for y in y0..y1 {
            img.put(y, x0, [255, 0, 0]);
            img.put(y, x1 - 1, [255, 0, 0]);
        }
    }
    img
}
