use super::{kmeans, make_region, GridBox, Selection, SelectionConfig};
use crate::error::{Error, Result};
use crate::io::{EmbeddingContainer, GridMeta, Strategy};

/// Candidate regions of one slide with one embedding each.
#[derive(Debug, Clone, PartialEq)]
pub struct WsiRegions {
    pub meta: GridMeta,
    pub boxes: Vec<GridBox>,
    pub embeddings: Vec<Vec<f64>>,
}

impl WsiRegions {
    /// Grid-aligned `side x side` blocks with mean-pooled patch embeddings.
    pub fn from_grid(grid: &EmbeddingContainer, meta: &GridMeta, side: usize) -> Result<Self> {
        meta.check_container(grid)?;
        let boxes = partition_regions(meta, side);
        let embeddings = mean_pool(grid, meta, &boxes);
        Ok(Self {
            meta: meta.clone(),
            boxes,
            embeddings,
        })
    }

    /// Blocks with externally computed embeddings (row `i` for block `i` in
    /// row-major block order).
    pub fn with_embeddings(meta: &GridMeta, side: usize, embeddings: &EmbeddingContainer) -> Result<Self> {
        let boxes = partition_regions(meta, side);
        if embeddings.rows() != boxes.len() {
            return Err(Error::Shape(format!(
                "{}: {} region embeddings for {} regions",
                meta.wsi_id,
                embeddings.rows(),
                boxes.len()
            )));
        }
        Ok(Self {
            meta: meta.clone(),
            boxes,
            embeddings: embeddings
                .iter_rows()
                .map(|r| r.iter().map(|&v| f64::from(v)).collect())
                .collect(),
        })
    }
}

/// Non-overlapping `side x side` blocks tiling the grid from the origin;
/// partial blocks at the right and bottom edges are dropped.
pub fn partition_regions(meta: &GridMeta, side: usize) -> Vec<GridBox> {
    let side = side.max(1);
    let (rows, cols) = (meta.grid_h / side, meta.grid_w / side);
    (0..rows)
        .flat_map(|by| (0..cols).map(move |bx| GridBox::square(by * side, bx * side, side)))
        .collect()
}

/// Mean of the patch embeddings inside each box.
pub fn mean_pool(grid: &EmbeddingContainer, meta: &GridMeta, boxes: &[GridBox]) -> Vec<Vec<f64>> {
    boxes
        .iter()
        .map(|b| {
            let mut acc = vec![0.0f64; grid.cols()];
            for y in b.y0..b.y1 {
                for x in b.x0..b.x1 {
                    for (a, &v) in acc.iter_mut().zip(grid.row(y * meta.grid_w + x)) {
                        *a += f64::from(v);
                    }
                }
            }
            let n = b.area() as f64;
            acc.iter_mut().for_each(|a| *a /= n);
            acc
        })
        .collect()
}

/// Pools candidate regions of all slides, clusters them into
/// `slides x n` groups and keeps the member nearest each centroid (lowest
/// global index on ties). Per-slide counts may be uneven. Scores are the
/// negated distance to the centroid.
pub fn select_diversity(wsis: &[WsiRegions], cfg: &SelectionConfig) -> Result<Selection> {
    for w in wsis {
        cfg.validate(&w.meta)?;
    }
    let k = wsis.len() * cfg.n;
    let mut owners = Vec::new();
    let mut points = Vec::new();
    for (wi, w) in wsis.iter().enumerate() {
        for (bi, e) in w.embeddings.iter().enumerate() {
            owners.push((wi, bi));
            points.push(e.clone());
        }
    }
    if points.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} candidate regions cannot fill {k} clusters",
            points.len()
        )));
    }
    let km = kmeans(&points, k, cfg.seed, cfg.kmeans_max_iters, cfg.kmeans_tol)?;

    let mut best: Vec<Option<(usize, f64)>> = vec![None; k];
    for (i, (&c, p)) in km.assignments.iter().zip(&points).enumerate() {
        let d = p
            .iter()
            .zip(&km.centroids[c])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if best[c].is_none_or(|(_, bd)| d < bd) {
            best[c] = Some((i, d));
        }
    }

    let mut out = Selection::default();
    let empty = best.iter().filter(|b| b.is_none()).count();
    if empty > 0 {
        out.warnings.push(format!("{empty} of {k} clusters ended empty"));
    }
    let mut picks: Vec<(usize, usize, usize, f64)> = best
        .iter()
        .enumerate()
        .filter_map(|(c, b)| b.map(|(i, d)| (owners[i].0, c, owners[i].1, d)))
        .collect();
    picks.sort_by_key(|p| (p.0, p.1));
    let mut rank = 0;
    let mut prev_wsi = usize::MAX;
    for (wi, _, bi, d) in picks {
        if wi != prev_wsi {
            rank = 0;
            prev_wsi = wi;
        }
        let w = &wsis[wi];
        out.regions.push(make_region(&w.meta, &w.boxes[bi], -d, rank, Strategy::Diversity));
        rank += 1;
    }
    Ok(out)
}
