//! Variable-size regions grown around similarity peaks.
//!
//! For each region: take the highest remaining cell as seed, threshold the
//! map, and bisect the threshold until the bounding box of the seed's
//! 4-connected component has an area between `side^2 / 4` and
//! `9 side^2 / 4` cells. Cells of earlier regions are removed from the map
//! before the next seed is chosen.

use serde::{Deserialize, Serialize};

use super::{component_bbox_where, make_region, GridBox, Selection, SelectionConfig};
use crate::error::{Error, Result};
use crate::io::{GridMeta, Strategy};
use crate::simmap::{IntegralImage, SimilarityMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BisectOutcome {
    /// Bounding-box area landed inside the bounds.
    Converged,
    /// Bisection gave up with a box that was too large; cropped around the seed.
    SnappedOver,
    /// Bisection gave up with a box that was too small; grown around the seed.
    SnappedUnder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivePick {
    pub seed: (usize, usize),
    pub bbox: GridBox,
    pub threshold: f64,
    pub outcome: BisectOutcome,
    pub iterations: usize,
    /// Sum of map values inside `bbox`.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fit {
    Ok,
    Over,
    Under,
}

/// Runs adaptive selection on the grid. `side` is the nominal region side
/// in cells.
pub fn adaptive_picks(
    map: &SimilarityMap,
    side: usize,
    n: usize,
    max_iters: usize,
    tol: f64,
) -> Result<Vec<AdaptivePick>> {
    let (h, w) = (map.grid_h(), map.grid_w());
    if side == 0 || side > h || side > w {
        return Err(Error::InvalidArgument(format!(
            "region side {side} cells does not fit the {h}x{w} map"
        )));
    }
    let values = map.values();
    let mut available: Vec<bool> = map.excluded().iter().map(|&e| !e).collect();
    let sat = IntegralImage::from_map(map);
    let side_f = side as f64;
    let (min_area, max_area) = (side_f * side_f / 4.0, 9.0 * side_f * side_f / 4.0);
    let mut picks: Vec<AdaptivePick> = Vec::with_capacity(n);

    while picks.len() < n {
        let Some(seed_idx) = (0..h * w)
            .filter(|&i| available[i])
            .fold(None::<usize>, |best, i| match best {
                Some(b) if values[i] <= values[b] => best,
                _ => Some(i),
            })
        else {
            break;
        };
        let seed = (seed_idx / w, seed_idx % w);
        let peak = f64::from(values[seed_idx]);

        let component = |t: f64| {
            component_bbox_where(h, w, seed, |y, x| {
                let i = y * w + x;
                available[i] && f64::from(values[i]) >= t
            })
            .0
        };
        let fit = |b: &GridBox| {
            let area = b.area() as f64;
            if area > max_area || picks.iter().any(|p| p.bbox.intersects(b)) {
                Fit::Over
            } else if area < min_area {
                Fit::Under
            } else {
                Fit::Ok
            }
        };

        let (mut lo, mut hi) = (0.0f64, peak);
        let mut last = None;
        let mut iterations = 0;
        let mut accepted = None;
        while iterations < max_iters {
            iterations += 1;
            let t = if peak > 0.0 { 0.5 * (lo + hi) } else { 0.0 };
            let b = component(t);
            match fit(&b) {
                Fit::Ok => {
                    accepted = Some((b, t));
                    break;
                }
                Fit::Over => lo = t,
                Fit::Under => hi = t,
            }
            last = Some((b, t, fit(&b)));
            if hi - lo < tol || peak <= 0.0 {
                break;
            }
        }

        let (bbox, threshold, outcome) = match (accepted, last) {
            (Some((b, t)), _) => (b, t, BisectOutcome::Converged),
            (None, Some((b, t, Fit::Over))) => {
                let crop = GridBox::centered_within(seed.0, seed.1, (1.5 * side_f).round() as usize, &b);
                (crop, t, BisectOutcome::SnappedOver)
            }
            (None, Some((b, t, _))) => {
                let grow = GridBox::centered(seed.0, seed.1, ((0.5 * side_f).round() as usize).max(1), h, w);
                (b.hull(&grow), t, BisectOutcome::SnappedUnder)
            }
            (None, None) => {
                // max_iters == 0: fall back to the nominal square around the seed
                let b = GridBox::centered(seed.0, seed.1, side, h, w);
                (b, peak, BisectOutcome::SnappedUnder)
            }
        };
        let bbox = shrink_until_disjoint(bbox, seed, &picks, h, w);

        for y in bbox.y0..bbox.y1 {
            for x in bbox.x0..bbox.x1 {
                available[y * w + x] = false;
            }
        }
        picks.push(AdaptivePick {
            seed,
            bbox,
            threshold,
            outcome,
            iterations,
            score: sat.window_sum(bbox.y0, bbox.x0, bbox.height(), bbox.width()),
        });
    }
    Ok(picks)
}

/// Shrinks `bbox` around the seed until it misses every earlier pick. The
/// seed cell itself is never part of an earlier pick.
fn shrink_until_disjoint(bbox: GridBox, seed: (usize, usize), picks: &[AdaptivePick], h: usize, w: usize) -> GridBox {
    if !picks.iter().any(|p| p.bbox.intersects(&bbox)) {
        return bbox;
    }
    let largest = bbox.height().max(bbox.width());
    (1..largest)
        .rev()
        .filter_map(|s| bbox.intersection(&GridBox::centered(seed.0, seed.1, s, h, w)))
        .find(|b| !picks.iter().any(|p| p.bbox.intersects(b)))
        .unwrap_or(GridBox::new(seed.0, seed.1, seed.0 + 1, seed.1 + 1))
}

/// Adaptive-size regions; snapped picks are reported as warnings.
pub fn select_adaptive(map: &SimilarityMap, meta: &GridMeta, cfg: &SelectionConfig) -> Result<Selection> {
    cfg.validate(meta)?;
    map.check_meta(meta)?;
    let side = cfg.side_cells(meta.stride_px);
    let picks = adaptive_picks(map, side, cfg.n, cfg.bisect_max_iters, cfg.bisect_tol)?;
    let mut out = Selection::default();
    for (rank, p) in picks.iter().enumerate() {
        if p.outcome != BisectOutcome::Converged {
            out.warnings.push(format!(
                "{}: region {rank} did not converge ({:?}), box {}x{} cells",
                meta.wsi_id,
                p.outcome,
                p.bbox.height(),
                p.bbox.width()
            ));
        }
        out.regions
            .push(make_region(meta, &p.bbox, p.score, rank, Strategy::ProtoAdaptive));
    }
    if picks.len() < cfg.n {
        out.warnings.push(format!(
            "{}: only {} adaptive regions found",
            meta.wsi_id,
            picks.len()
        ));
    }
    Ok(out)
}
