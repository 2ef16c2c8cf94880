use crate::error::{Error, Result};
use crate::io::{BinaryMask, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtsuResult {
    /// Bins `< threshold` form the dark class.
    pub threshold: usize,
    /// All mass sits in one bin; `threshold` is that bin.
    pub degenerate: bool,
}

/// Between-class variance (up to the constant `1 / N^2`) for the split
/// `[0, t) | [t, 256)` computed from class counts and intensity sums.
fn between_class(n0: u64, s0: u64, n1: u64, s1: u64) -> f64 {
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let d = s0 as f64 / n0 as f64 - s1 as f64 / n1 as f64;
    n0 as f64 * n1 as f64 * d * d
}

/// Otsu's threshold: the split maximizing between-class variance, smallest
/// threshold on ties.
pub fn otsu_threshold(histogram: &[u64; 256]) -> Result<OtsuResult> {
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let nonzero: Vec<usize> = (0..256).filter(|&i| histogram[i] > 0).collect();
    if nonzero.len() == 1 {
        return Ok(OtsuResult {
            threshold: nonzero[0],
            degenerate: true,
        });
    }
    let sum: u64 = histogram.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
    let (mut n0, mut s0) = (0u64, 0u64);
    let mut best = (0usize, f64::NEG_INFINITY);
    for t in 1..256 {
        n0 += histogram[t - 1];
        s0 += (t as u64 - 1) * histogram[t - 1];
        let v = between_class(n0, s0, total - n0, sum - s0);
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(OtsuResult {
        threshold: best.0,
        degenerate: false,
    })
}

/// Tissue is darker than the glass background: pixels `< threshold`.
pub fn tissue_mask(thumbnail: &GrayImage, threshold: usize, scale_to_level0: f64) -> Result<BinaryMask> {
    BinaryMask::new(
        thumbnail.height,
        thumbnail.width,
        thumbnail.data.iter().map(|&v| (v as usize) < threshold).collect(),
        scale_to_level0,
    )
}

/// Otsu threshold of the thumbnail followed by [`tissue_mask`].
pub fn detect_tissue(thumbnail: &GrayImage, scale_to_level0: f64) -> Result<(BinaryMask, OtsuResult)> {
    let otsu = otsu_threshold(&thumbnail.histogram())?;
    Ok((tissue_mask(thumbnail, otsu.threshold, scale_to_level0)?, otsu))
}
