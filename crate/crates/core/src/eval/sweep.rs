//! Hyperparameter sweep over strategies, region counts, region sizes and
//! seeds. Each row pools coverage counts over every slide of the dataset.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coverage::{coverage_counts, CoverageCounts, Denominator, GroundTruth};
use crate::error::{Error, Result};
use crate::io::{EmbeddingContainer, GridMeta, Region, Strategy};
use crate::select::{
    select_adaptive, select_diversity, select_random, select_standard, Selection, SelectionConfig, WsiRegions,
};
use crate::simmap::SimilarityMap;

pub const CSV_HEADER: &str = "strategy,n,l_px,seed,annotated_tissue_pct,class_area_pct,point_capture_ratio";

#[derive(Debug, Clone)]
pub struct SweepWsi {
    pub grid: EmbeddingContainer,
    pub meta: GridMeta,
    pub map: SimilarityMap,
    pub gt: GroundTruth,
}

/// Sweep axes plus the shared selection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub strategies: Vec<Strategy>,
    pub n_set: Vec<usize>,
    pub l_set: Vec<u64>,
    pub seeds: Vec<u64>,
    pub min_tissue_fraction: f64,
    pub bisect_max_iters: usize,
    pub bisect_tol: f64,
    pub kmeans_max_iters: usize,
    pub kmeans_tol: f64,
    pub denominator_slide: bool,
}

impl SweepSpec {
    pub fn new(strategies: Vec<Strategy>, n_set: Vec<usize>, l_set: Vec<u64>, seeds: Vec<u64>) -> Self {
        let d = SelectionConfig::new(Strategy::Random, 1, 1, 0);
        Self {
            strategies,
            n_set,
            l_set,
            seeds,
            min_tissue_fraction: d.min_tissue_fraction,
            bisect_max_iters: d.bisect_max_iters,
            bisect_tol: d.bisect_tol,
            kmeans_max_iters: d.kmeans_max_iters,
            kmeans_tol: d.kmeans_tol,
            denominator_slide: false,
        }
    }

    pub fn config(&self, strategy: Strategy, n: usize, l_px: u64, seed: u64) -> SelectionConfig {
        SelectionConfig {
            n,
            l_px,
            seed,
            strategy,
            min_tissue_fraction: self.min_tissue_fraction,
            bisect_max_iters: self.bisect_max_iters,
            bisect_tol: self.bisect_tol,
            kmeans_max_iters: self.kmeans_max_iters,
            kmeans_tol: self.kmeans_tol,
        }
    }

    fn denominator(&self) -> Denominator {
        if self.denominator_slide {
            Denominator::Slide
        } else {
            Denominator::Tissue
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub strategy: Strategy,
    pub n: usize,
    pub l_px: u64,
    /// `None` marks a median row.
    pub seed: Option<u64>,
    pub annotated_tissue_pct: f64,
    pub class_area_pct: Option<f64>,
    pub point_capture_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub medians: Vec<SweepRow>,
}

impl SweepTable {
    pub fn median_for(&self, strategy: Strategy, n: usize, l_px: u64) -> Option<&SweepRow> {
        self.medians
            .iter()
            .find(|r| r.strategy == strategy && r.n == n && r.l_px == l_px)
    }
}

/// Lower median (element `(len - 1) / 2` of the sorted values).
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

fn check_dataset(dataset: &[SweepWsi]) -> Result<()> {
    let mut ids = HashSet::new();
    for w in dataset {
        w.meta.validate()?;
        w.meta.check_container(&w.grid)?;
        w.map.check_meta(&w.meta)?;
        if w.map.wsi_id() != w.meta.wsi_id {
            return Err(Error::InvalidArgument(format!(
                "map of {} paired with metadata of {}",
                w.map.wsi_id(),
                w.meta.wsi_id
            )));
        }
        if !ids.insert(w.meta.wsi_id.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate slide id {}", w.meta.wsi_id)));
        }
    }
    Ok(())
}

/// Runs one strategy over the whole dataset.
pub fn select_for_strategy(dataset: &[SweepWsi], cfg: &SelectionConfig) -> Result<Selection> {
    let mut out = Selection::default();
    match cfg.strategy {
        Strategy::Diversity => {
            let wsis = dataset
                .iter()
                .map(|w| WsiRegions::from_grid(&w.grid, &w.meta, cfg.side_cells(w.meta.stride_px)))
                .collect::<Result<Vec<_>>>()?;
            out = select_diversity(&wsis, cfg)?;
        }
        s => {
            for w in dataset {
                let sel = match s {
                    Strategy::Random => select_random(&w.meta, Some(&w.gt.tissue_mask), cfg)?,
                    Strategy::ProtoStandard => select_standard(&w.map, &w.meta, cfg)?,
                    Strategy::ProtoAdaptive => select_adaptive(&w.map, &w.meta, cfg)?,
                    Strategy::Diversity => unreachable!(),
                };
                out.regions.extend(sel.regions);
                out.warnings.extend(sel.warnings);
            }
        }
    }
    Ok(out)
}

fn pooled(dataset: &[SweepWsi], regions: &[Region]) -> CoverageCounts {
    dataset
        .iter()
        .map(|w| coverage_counts(regions, &w.gt, Some(&w.meta.wsi_id)))
        .fold(CoverageCounts::default(), |a, b| a + b)
}

/// One row per (strategy, n, l, seed) in canonical order, plus one
/// lower-median row per (strategy, n, l). Deterministic strategies yield
/// identical rows across seeds.
pub fn run_sweep(dataset: &[SweepWsi], spec: &SweepSpec) -> Result<SweepTable> {
    check_dataset(dataset)?;
    let mut tuples = Vec::new();
    for &s in &spec.strategies {
        for &n in &spec.n_set {
            for &l in &spec.l_set {
                for &seed in &spec.seeds {
                    tuples.push((s, n, l, seed));
                }
            }
        }
    }
    let mut rows = tuples
        .par_iter()
        .map(|&(s, n, l, seed)| {
            let cfg = spec.config(s, n, l, seed);
            let sel = select_for_strategy(dataset, &cfg)?;
            for w in &sel.warnings {
                log::debug!("{s} n={n} l={l} seed={seed}: {w}");
            }
            let r = pooled(dataset, &sel.regions).ratios(spec.denominator());
            Ok(SweepRow {
                strategy: s,
                n,
                l_px: l,
                seed: Some(seed),
                annotated_tissue_pct: r.annotated_tissue_pct,
                class_area_pct: r.class_area_pct,
                point_capture_ratio: r.point_capture_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.strategy, r.n, r.l_px, r.seed));

    let mut groups: BTreeMap<(Strategy, usize, u64), Vec<&SweepRow>> = BTreeMap::new();
    for r in &rows {
        groups.entry((r.strategy, r.n, r.l_px)).or_default().push(r);
    }
    let medians = groups
        .into_iter()
        .map(|((strategy, n, l_px), g)| {
            let col = |f: &dyn Fn(&SweepRow) -> Option<f64>| {
                let v: Vec<f64> = g.iter().filter_map(|r| f(r)).collect();
                lower_median(&v)
            };
            SweepRow {
                strategy,
                n,
                l_px,
                seed: None,
                annotated_tissue_pct: col(&|r| Some(r.annotated_tissue_pct)).unwrap_or(0.0),
                class_area_pct: col(&|r| r.class_area_pct),
                point_capture_ratio: col(&|r| r.point_capture_ratio),
            }
        })
        .collect();
    Ok(SweepTable { rows, medians })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with per-seed rows first, then median rows (seed column `median`).
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in table.rows.iter().chain(&table.medians) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.strategy,
            r.n,
            r.l_px,
            r.seed.map(|s| s.to_string()).unwrap_or_else(|| "median".into()),
            r.annotated_tissue_pct,
            fmt_opt(r.class_area_pct),
            fmt_opt(r.point_capture_ratio),
        ));
    }
    out
}

/// Parses CSV written by [`sweep_csv`].
pub fn read_sweep_csv(text: &str) -> Result<SweepTable> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidArgument("unexpected sweep CSV header".into()));
    }
    let bad = |l: &str| Error::InvalidArgument(format!("bad sweep CSV row: {l}"));
    let mut table = SweepTable {
        rows: vec![],
        medians: vec![],
    };
    for line in lines.filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(line));
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(line))
            }
        };
        let row = SweepRow {
            strategy: Strategy::parse(f[0]).ok_or_else(|| bad(line))?,
            n: f[1].parse().map_err(|_| bad(line))?,
            l_px: f[2].parse().map_err(|_| bad(line))?,
            seed: if f[3] == "median" {
                None
            } else {
                Some(f[3].parse().map_err(|_| bad(line))?)
            },
            annotated_tissue_pct: f[4].parse().map_err(|_| bad(line))?,
            class_area_pct: opt(f[5])?,
            point_capture_ratio: opt(f[6])?,
        };
        if row.seed.is_some() {
            table.rows.push(row);
        } else {
            table.medians.push(row);
        }
    }
    Ok(table)
}
