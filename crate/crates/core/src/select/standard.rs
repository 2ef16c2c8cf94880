use super::{make_region, GridBox, Selection, SelectionConfig};
use crate::error::{Error, Result};
use crate::io::{GridMeta, Strategy};
use crate::simmap::{IntegralImage, SimilarityMap};

/// Greedy non-maximum suppression over all `side x side` windows of the map:
/// repeatedly take the highest-sum window (smallest `(row, col)` on ties)
/// that does not overlap an earlier pick. Window sums come from a
/// summed-area table. Returns at most `n` `(window, sum)` pairs.
pub fn standard_windows(map: &SimilarityMap, side: usize, n: usize) -> Result<Vec<(GridBox, f64)>> {
    let (h, w) = (map.grid_h(), map.grid_w());
    if side == 0 || side > h || side > w {
        return Err(Error::InvalidArgument(format!(
            "window side {side} cells does not fit the {h}x{w} map"
        )));
    }
    let sat = IntegralImage::from_map(map);
    let (rows, cols) = (h - side + 1, w - side + 1);
    let sums: Vec<f64> = (0..rows * cols)
        .map(|i| sat.window_sum(i / cols, i % cols, side, side))
        .collect();

    let mut picks: Vec<(GridBox, f64)> = Vec::with_capacity(n);
    while picks.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for (i, &s) in sums.iter().enumerate() {
            if best.is_some_and(|(_, bs)| s <= bs) {
                continue;
            }
            let b = GridBox::square(i / cols, i % cols, side);
            if picks.iter().any(|(p, _)| p.intersects(&b)) {
                continue;
            }
            best = Some((i, s));
        }
        match best {
            Some((i, s)) => picks.push((GridBox::square(i / cols, i % cols, side), s)),
            None => break,
        }
    }
    Ok(picks)
}

/// Fixed-size `l x l` regions by sliding-window scoring and greedy NMS.
pub fn select_standard(map: &SimilarityMap, meta: &GridMeta, cfg: &SelectionConfig) -> Result<Selection> {
    cfg.validate(meta)?;
    map.check_meta(meta)?;
    let side = cfg.side_cells(meta.stride_px);
    let picks = standard_windows(map, side, cfg.n)?;
    let mut out = Selection::default();
    if picks.len() < cfg.n {
        out.warnings.push(format!(
            "{}: only {} non-overlapping windows fit",
            meta.wsi_id,
            picks.len()
        ));
    }
    out.regions = picks
        .iter()
        .enumerate()
        .map(|(rank, (b, s))| make_region(meta, b, *s, rank, Strategy::ProtoStandard))
        .collect();
    Ok(out)
}
