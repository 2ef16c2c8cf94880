//! Coverage metrics, hyperparameter sweeps and synthetic slides with known
//! ground truth.

mod coverage;
mod sweep;
mod synth;

pub use coverage::{coverage_counts, coverage_metrics, CoverageCounts, CoverageRatios, Denominator, GroundTruth};
pub use sweep::{
    lower_median, read_sweep_csv, run_sweep, select_for_strategy, sweep_csv, SweepRow, SweepSpec, SweepTable,
    SweepWsi, CSV_HEADER,
};
pub use synth::{fixture_dataset, fixture_slides, gen_synthetic_wsi, Blob, Ellipse, SyntheticSpec, SyntheticWsi};

/// Area in mm² of an `l_px x l_px` region at `mpp` microns per pixel.
pub fn region_area_mm2(l_px: u64, mpp: f64) -> f64 {
    let side_mm = l_px as f64 * mpp / 1000.0;
    side_mm * side_mm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_grows_with_side() {
        let a: Vec<f64> = [1024, 4096, 8192, 12288].iter().map(|&l| region_area_mm2(l, 0.25)).collect();
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!((region_area_mm2(4000, 0.25) - 1.0).abs() < 1e-12);
    }
}
