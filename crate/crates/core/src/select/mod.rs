//! Annotation region selection strategies.
//!
//! All strategies work on the patch grid of a slide and convert their picks
//! to level-0 pixel rectangles at the end. Within one result the regions
//! never overlap.

mod adaptive;
mod components;
mod diversity;
mod kmeans;
mod otsu;
mod random;
mod standard;

pub use adaptive::{adaptive_picks, select_adaptive, AdaptivePick, BisectOutcome};
pub use components::{component_bbox_where, connected_component_at, ComponentBox};
pub use diversity::{mean_pool, partition_regions, select_diversity, WsiRegions};
pub use kmeans::{kmeans, KMeansResult};
pub use otsu::{detect_tissue, otsu_threshold, tissue_mask, OtsuResult};
pub use random::select_random;
pub use standard::{select_standard, standard_windows};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{GridMeta, Region, Strategy};

/// Half-open box of grid cells: rows `y0..y1`, columns `x0..x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridBox {
    pub y0: usize,
    pub x0: usize,
    pub y1: usize,
    pub x1: usize,
}

impl GridBox {
    pub fn new(y0: usize, x0: usize, y1: usize, x1: usize) -> Self {
        debug_assert!(y0 <= y1 && x0 <= x1);
        Self { y0, x0, y1, x1 }
    }

    /// `size x size` box with top-left `(y, x)`.
    pub fn square(y: usize, x: usize, size: usize) -> Self {
        Self::new(y, x, y + size, x + size)
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn area(&self) -> usize {
        self.height() * self.width()
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        (self.y0..self.y1).contains(&y) && (self.x0..self.x1).contains(&x)
    }

    pub fn intersects(&self, other: &GridBox) -> bool {
        self.y0 < other.y1 && other.y0 < self.y1 && self.x0 < other.x1 && other.x0 < self.x1
    }

    pub fn intersection(&self, other: &GridBox) -> Option<GridBox> {
        let b = GridBox {
            y0: self.y0.max(other.y0),
            x0: self.x0.max(other.x0),
            y1: self.y1.min(other.y1),
            x1: self.x1.min(other.x1),
        };
        (b.y0 < b.y1 && b.x0 < b.x1).then_some(b)
    }

    pub fn hull(&self, other: &GridBox) -> GridBox {
        GridBox {
            y0: self.y0.min(other.y0),
            x0: self.x0.min(other.x0),
            y1: self.y1.max(other.y1),
            x1: self.x1.max(other.x1),
        }
    }

    /// `side x side` box centred on `(cy, cx)`, shifted to lie inside a
    /// `grid_h x grid_w` grid and clipped if the grid is smaller.
    pub fn centered(cy: usize, cx: usize, side: usize, grid_h: usize, grid_w: usize) -> GridBox {
        Self::centered_within(cy, cx, side, &GridBox::new(0, 0, grid_h, grid_w))
    }

    /// Like [`GridBox::centered`] but confined to `bounds`, which must
    /// contain `(cy, cx)`.
    pub fn centered_within(cy: usize, cx: usize, side: usize, bounds: &GridBox) -> GridBox {
        let place = |c: usize, lo: usize, hi: usize| {
            let side = side.min(hi - lo);
            let start = c.saturating_sub(side / 2).clamp(lo, hi - side);
            (start, start + side)
        };
        let (y0, y1) = place(cy, bounds.y0, bounds.y1);
        let (x0, x1) = place(cx, bounds.x0, bounds.x1);
        GridBox { y0, x0, y1, x1 }
    }
}

/// Grid box to level-0 pixels: multiply by the stride, clamp to the slide.
/// Returns `(x_px, y_px, w_px, h_px)`.
pub fn to_level0(b: &GridBox, meta: &GridMeta) -> (u64, u64, u64, u64) {
    let s = meta.stride_px;
    let x = (b.x0 as u64 * s).min(meta.level0_w);
    let y = (b.y0 as u64 * s).min(meta.level0_h);
    let x_end = (b.x1 as u64 * s).min(meta.level0_w);
    let y_end = (b.y1 as u64 * s).min(meta.level0_h);
    (x, y, x_end - x, y_end - y)
}

pub(crate) fn make_region(meta: &GridMeta, b: &GridBox, score: f64, rank: usize, strategy: Strategy) -> Region {
    let (x_px, y_px, w_px, h_px) = to_level0(b, meta);
    Region {
        wsi_id: meta.wsi_id.clone(),
        x_px,
        y_px,
        w_px,
        h_px,
        score,
        rank,
        strategy,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Regions per slide.
    pub n: usize,
    /// Region side at level 0.
    pub l_px: u64,
    pub seed: u64,
    pub strategy: Strategy,
    pub min_tissue_fraction: f64,
    pub bisect_max_iters: usize,
    pub bisect_tol: f64,
    pub kmeans_max_iters: usize,
    pub kmeans_tol: f64,
}

impl SelectionConfig {
    pub fn new(strategy: Strategy, n: usize, l_px: u64, seed: u64) -> Self {
        Self {
            n,
            l_px,
            seed,
            strategy,
            min_tissue_fraction: 0.10,
            bisect_max_iters: 50,
            bisect_tol: 1e-6,
            kmeans_max_iters: 300,
            kmeans_tol: 1e-4,
        }
    }

    pub fn validate(&self, meta: &GridMeta) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if self.l_px < meta.stride_px {
            return Err(Error::InvalidArgument(format!(
                "region side l_px = {} must be >= stride_px = {}",
                self.l_px, meta.stride_px
            )));
        }
        if !(0.0..=1.0).contains(&self.min_tissue_fraction) {
            return Err(Error::InvalidArgument(format!(
                "min_tissue_fraction must be in [0, 1], got {}",
                self.min_tissue_fraction
            )));
        }
        if !(self.bisect_tol > 0.0 && self.kmeans_tol >= 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Region side in grid cells, `round(l_px / stride_px)`.
    pub fn side_cells(&self, stride_px: u64) -> usize {
        ((self.l_px as f64 / stride_px as f64).round() as usize).max(1)
    }
}

/// Regions picked by a strategy plus any shortfall warnings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub regions: Vec<Region>,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(stride: u64, size: u64) -> GridMeta {
        GridMeta::for_slide("s", size, size, stride, stride, 0.25).unwrap()
    }

    #[test]
    fn level0_conversion() {
        assert_eq!(to_level0(&GridBox::new(0, 0, 4, 4), &meta(256, 4096)), (0, 0, 1024, 1024));
        assert_eq!(to_level0(&GridBox::new(1, 1, 2, 2), &meta(64, 4096)), (64, 64, 64, 64));
    }

    #[test]
    fn level0_clamps_to_slide() {
        // 1000 px slide at stride 256 -> 3x3 grid; full-grid box clamps to 768
        let m = GridMeta::for_slide("s", 1000, 1000, 256, 256, 0.25).unwrap();
        assert_eq!(to_level0(&GridBox::new(0, 0, 3, 3), &m), (0, 0, 768, 768));
        assert_eq!(to_level0(&GridBox::new(0, 0, 5, 5), &m), (0, 0, 1000, 1000));
    }

    #[test]
    fn centered_box_shifts_inside_grid() {
        assert_eq!(GridBox::centered(0, 0, 3, 10, 10), GridBox::new(0, 0, 3, 3));
        assert_eq!(GridBox::centered(5, 5, 3, 10, 10), GridBox::new(4, 4, 7, 7));
        assert_eq!(GridBox::centered(9, 9, 4, 10, 10), GridBox::new(6, 6, 10, 10));
        assert_eq!(GridBox::centered(1, 1, 8, 3, 3), GridBox::new(0, 0, 3, 3));
        let bounds = GridBox::new(2, 2, 14, 14);
        assert_eq!(GridBox::centered_within(2, 2, 6, &bounds), GridBox::new(2, 2, 8, 8));
        assert_eq!(GridBox::centered_within(13, 8, 6, &bounds), GridBox::new(8, 5, 14, 11));
    }

    #[test]
    fn config_rejects_small_regions() {
        let cfg = SelectionConfig::new(Strategy::ProtoStandard, 1, 128, 0);
        let err = cfg.validate(&meta(256, 4096)).unwrap_err();
        assert!(err.to_string().contains("stride_px"));
        assert_eq!(SelectionConfig::new(Strategy::Random, 1, 8192, 0).side_cells(256), 32);
    }
}
