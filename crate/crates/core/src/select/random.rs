use super::{Selection, SelectionConfig};
use crate::error::Result;
use crate::io::{BinaryMask, GridMeta, Region, Strategy};
use crate::rng::SeededRng;
use crate::simmap::IntegralImage;

/// Rejection-sampling budget per requested region.
pub const ATTEMPTS_PER_REGION: usize = 1000;

/// Tissue fraction lookup backed by a summed-area table over the mask.
struct TissueIndex<'a> {
    mask: &'a BinaryMask,
    sat: IntegralImage,
}

impl<'a> TissueIndex<'a> {
    fn new(mask: &'a BinaryMask) -> Self {
        let values: Vec<f32> = mask.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self {
            mask,
            sat: IntegralImage::new(&values, mask.height, mask.width),
        }
    }

    fn fraction(&self, x: u64, y: u64, w: u64, h: u64) -> f64 {
        let (y0, x0, y1, x1) = self.mask.cell_span(x, y, w, h);
        let cells = (y1 - y0) * (x1 - x0);
        if cells == 0 {
            return 0.0;
        }
        self.sat.window_sum(y0, x0, y1 - y0, x1 - x0) / cells as f64
    }
}

/// `n` non-overlapping `l x l` regions at uniformly random level-0 positions,
/// each with at least `min_tissue_fraction` tissue. Without a mask the whole
/// slide counts as tissue. Fewer regions come back (with a warning) when the
/// attempt budget runs out.
pub fn select_random(meta: &GridMeta, tissue: Option<&BinaryMask>, cfg: &SelectionConfig) -> Result<Selection> {
    cfg.validate(meta)?;
    let l = cfg.l_px;
    let mut out = Selection::default();
    if l > meta.level0_w || l > meta.level0_h {
        out.warnings.push(format!(
            "{}: region side {l} exceeds slide {}x{}; no region selected",
            meta.wsi_id, meta.level0_w, meta.level0_h
        ));
        return Ok(out);
    }
    let index = tissue.map(TissueIndex::new);
    let mut rng = SeededRng::new(cfg.seed);
    let max_attempts = ATTEMPTS_PER_REGION * cfg.n;
    let mut attempts = 0;
    while out.regions.len() < cfg.n && attempts < max_attempts {
        attempts += 1;
        let x = rng.below(meta.level0_w - l + 1);
        let y = rng.below(meta.level0_h - l + 1);
        let candidate = Region {
            wsi_id: meta.wsi_id.clone(),
            x_px: x,
            y_px: y,
            w_px: l,
            h_px: l,
            score: 0.0,
            rank: out.regions.len(),
            strategy: Strategy::Random,
        };
        if out.regions.iter().any(|r| r.overlaps(&candidate)) {
            continue;
        }
        let fraction = index.as_ref().map_or(1.0, |t| t.fraction(x, y, l, l));
        if fraction < cfg.min_tissue_fraction {
            continue;
        }
        out.regions.push(Region {
            score: fraction,
            ..candidate
        });
    }
    if out.regions.len() < cfg.n {
        out.warnings.push(format!(
            "{}: only {} of {} random regions found after {max_attempts} attempts",
            meta.wsi_id,
            out.regions.len(),
            cfg.n
        ));
    }
    Ok(out)
}
