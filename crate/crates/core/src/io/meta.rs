use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::container::{read_container, EmbeddingContainer};
use crate::error::{Error, Result};

/// Patch-grid geometry of one slide. Serialized as `<name>.grid.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMeta {
    pub wsi_id: String,
    pub grid_h: usize,
    pub grid_w: usize,
    pub stride_px: u64,
    pub patch_px: u64,
    pub mpp: f64,
    pub level0_h: u64,
    pub level0_w: u64,
}

impl GridMeta {
    /// Geometry for a slide, deriving the grid shape from the level-0 size.
    pub fn for_slide(
        wsi_id: impl Into<String>,
        level0_h: u64,
        level0_w: u64,
        stride_px: u64,
        patch_px: u64,
        mpp: f64,
    ) -> Result<Self> {
        if stride_px == 0 {
            return Err(Error::GridMeta("stride_px must be >= 1".into()));
        }
        let meta = Self {
            wsi_id: wsi_id.into(),
            grid_h: (level0_h / stride_px) as usize,
            grid_w: (level0_w / stride_px) as usize,
            stride_px,
            patch_px,
            mpp,
            level0_h,
            level0_w,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride_px < 1 {
            return Err(Error::GridMeta("stride_px must be >= 1".into()));
        }
        if self.patch_px < 1 {
            return Err(Error::GridMeta("patch_px must be >= 1".into()));
        }
        if !(self.mpp > 0.0 && self.mpp.is_finite()) {
            return Err(Error::GridMeta(format!("mpp must be positive, got {}", self.mpp)));
        }
        let (gh, gw) = (
            self.level0_h / self.stride_px,
            self.level0_w / self.stride_px,
        );
        if gh != self.grid_h as u64 || gw != self.grid_w as u64 {
            return Err(Error::GridMeta(format!(
                "grid {}x{} inconsistent with level-0 {}x{} at stride {} (expected {gh}x{gw})",
                self.grid_h, self.grid_w, self.level0_h, self.level0_w, self.stride_px
            )));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.grid_h * self.grid_w
    }

    /// Checks that a container holds one embedding per grid cell.
    pub fn check_container(&self, container: &EmbeddingContainer) -> Result<()> {
        if container.rows() != self.cells() {
            return Err(Error::Shape(format!(
                "{}: container has {} rows, grid {}x{} needs {}",
                self.wsi_id,
                container.rows(),
                self.grid_h,
                self.grid_w,
                self.cells()
            )));
        }
        Ok(())
    }
}

/// `dir/name.emb` -> `dir/name<suffix>`.
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_grid_meta(path: impl AsRef<Path>) -> Result<GridMeta> {
    let meta: GridMeta = read_json(path)?;
    meta.validate()?;
    Ok(meta)
}

pub fn write_grid_meta(meta: &GridMeta, path: impl AsRef<Path>) -> Result<()> {
    meta.validate()?;
    write_json(meta, path)
}

/// Loads a grid container together with its metadata and checks they agree.
/// When `meta_path` is `None` the `<name>.grid.json` sidecar is used.
pub fn load_grid(
    emb_path: impl AsRef<Path>,
    meta_path: Option<&Path>,
) -> Result<(EmbeddingContainer, GridMeta)> {
    let emb_path = emb_path.as_ref();
    let meta_path = meta_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| sidecar_path(emb_path, ".grid.json"));
    let container = read_container(emb_path)?;
    let meta = read_grid_meta(&meta_path)?;
    meta.check_container(&container)?;
    Ok((container, meta))
}
