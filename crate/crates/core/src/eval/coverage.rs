use crate::error::{Error, Result};
use crate::io::{BinaryMask, Region};

/// Ground truth for one slide. Masks are evaluated at their own resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub tissue_mask: BinaryMask,
    pub class_mask: Option<BinaryMask>,
    /// Level-0 `(x, y)` pixel positions, e.g. mitotic figures.
    pub points: Option<Vec<(f64, f64)>>,
}

impl GroundTruth {
    pub fn new(tissue_mask: BinaryMask, class_mask: Option<BinaryMask>, points: Option<Vec<(f64, f64)>>) -> Result<Self> {
        if class_mask.is_none() && points.is_none() {
            return Err(Error::MissingGroundTruth("need a class mask or annotated points"));
        }
        Ok(Self {
            tissue_mask,
            class_mask,
            points,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// Annotated tissue over all tissue.
    #[default]
    Tissue,
    /// Annotated tissue over the whole slide area.
    Slide,
}

impl std::str::FromStr for Denominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tissue" => Ok(Denominator::Tissue),
            "slide" => Ok(Denominator::Slide),
            _ => Err(Error::InvalidArgument(format!("unknown denominator {s:?}"))),
        }
    }
}

/// Raw counts; sums of counts over slides give dataset-level ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoverageCounts {
    pub tissue_covered: u64,
    pub tissue_total: u64,
    pub slide_cells: u64,
    pub class_covered: Option<u64>,
    pub class_total: Option<u64>,
    pub points_captured: Option<u64>,
    pub points_total: Option<u64>,
}

fn add_opt(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    match (a, b) {
        (None, None) => None,
        (x, y) => Some(x.unwrap_or(0) + y.unwrap_or(0)),
    }
}

impl std::ops::Add for CoverageCounts {
    type Output = CoverageCounts;

    fn add(self, o: CoverageCounts) -> CoverageCounts {
        CoverageCounts {
            tissue_covered: self.tissue_covered + o.tissue_covered,
            tissue_total: self.tissue_total + o.tissue_total,
            slide_cells: self.slide_cells + o.slide_cells,
            class_covered: add_opt(self.class_covered, o.class_covered),
            class_total: add_opt(self.class_total, o.class_total),
            points_captured: add_opt(self.points_captured, o.points_captured),
            points_total: add_opt(self.points_total, o.points_total),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRatios {
    pub annotated_tissue_pct: f64,
    pub class_area_pct: Option<f64>,
    pub point_capture_ratio: Option<f64>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl CoverageCounts {
    pub fn ratios(&self, denominator: Denominator) -> CoverageRatios {
        let den = match denominator {
            Denominator::Tissue => self.tissue_total,
            Denominator::Slide => self.slide_cells,
        };
        CoverageRatios {
            annotated_tissue_pct: ratio(self.tissue_covered, den),
            class_area_pct: self.class_total.map(|t| ratio(self.class_covered.unwrap_or(0), t)),
            point_capture_ratio: self.points_total.map(|t| ratio(self.points_captured.unwrap_or(0), t)),
        }
    }
}

/// Marks mask cells under any region, rounding region edges outward.
fn covered_cells(mask: &BinaryMask, regions: &[&Region]) -> Vec<bool> {
    let mut covered = vec![false; mask.height * mask.width];
    for r in regions {
        let (y0, x0, y1, x1) = mask.cell_span(r.x_px, r.y_px, r.w_px, r.h_px);
        for y in y0..y1 {
            covered[y * mask.width + x0..y * mask.width + x1].fill(true);
        }
    }
    covered
}

fn mask_counts(mask: &BinaryMask, regions: &[&Region]) -> (u64, u64) {
    let covered = covered_cells(mask, regions);
    let mut hit = 0;
    let mut total = 0;
    for (&m, &c) in mask.bits.iter().zip(&covered) {
        if m {
            total += 1;
            if c {
                hit += 1;
            }
        }
    }
    (hit, total)
}

/// Coverage counts of `regions` on one slide. Regions of other slides are
/// ignored when `wsi_id` is given.
pub fn coverage_counts(regions: &[Region], gt: &GroundTruth, wsi_id: Option<&str>) -> CoverageCounts {
    let regions: Vec<&Region> = regions
        .iter()
        .filter(|r| wsi_id.is_none_or(|id| r.wsi_id == id))
        .collect();
    let (tissue_covered, tissue_total) = mask_counts(&gt.tissue_mask, &regions);
    let class = gt.class_mask.as_ref().map(|m| mask_counts(m, &regions));
    let points = gt.points.as_ref().map(|pts| {
        let inside = pts
            .iter()
            .filter(|&&(x, y)| {
                regions.iter().any(|r| {
                    x >= r.x_px as f64
                        && x <= (r.x_px + r.w_px) as f64
                        && y >= r.y_px as f64
                        && y <= (r.y_px + r.h_px) as f64
                })
            })
            .count() as u64;
        (inside, pts.len() as u64)
    });
    CoverageCounts {
        tissue_covered,
        tissue_total,
        slide_cells: (gt.tissue_mask.height * gt.tissue_mask.width) as u64,
        class_covered: class.map(|c| c.0),
        class_total: class.map(|c| c.1),
        points_captured: points.map(|p| p.0),
        points_total: points.map(|p| p.1),
    }
}

pub fn coverage_metrics(regions: &[Region], gt: &GroundTruth, denominator: Denominator) -> CoverageRatios {
    coverage_counts(regions, gt, None).ratios(denominator)
}
