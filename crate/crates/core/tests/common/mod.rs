//! Brute-force reference implementations and random instance generators
//! shared by the integration tests.
#![allow(dead_code)]

use protosample::rng::SeededRng;
use protosample::simmap::SimilarityMap;

/// Map whose values are multiples of 1/256 so every window sum is exact.
pub fn dyadic_map(rng: &mut SeededRng, h: usize, w: usize) -> SimilarityMap {
    let values = (0..h * w).map(|_| rng.below(257) as f32 / 256.0).collect();
    SimilarityMap::from_values("m", h, w, values).unwrap()
}

/// Map built from a few Gaussian bumps, rescaled to peak at 1.
pub fn smooth_map(rng: &mut SeededRng, h: usize, w: usize) -> SimilarityMap {
    let bumps: Vec<(f64, f64, f64, f64)> = (0..1 + rng.below(3))
        .map(|_| {
            (
                rng.unit() * h as f64,
                rng.unit() * w as f64,
                1.5 + rng.unit() * 5.0,
                0.3 + rng.unit() * 0.7,
            )
        })
        .collect();
    let mut values: Vec<f64> = (0..h * w)
        .map(|i| {
            let (y, x) = ((i / w) as f64, (i % w) as f64);
            bumps
                .iter()
                .map(|&(cy, cx, s, a)| a * (-((y - cy).powi(2) + (x - cx).powi(2)) / (2.0 * s * s)).exp())
                .sum()
        })
        .collect();
    let peak = values.iter().cloned().fold(0.0, f64::max);
    for v in &mut values {
        *v /= peak;
    }
    SimilarityMap::from_values("m", h, w, values.iter().map(|&v| v as f32).collect()).unwrap()
}

/// Direct summation of a window, row by row.
pub fn window_sum(values: &[f32], w: usize, y: usize, x: usize, wh: usize, ww: usize) -> f64 {
    let mut s = 0.0;
    for yy in y..y + wh {
        for xx in x..x + ww {
            s += f64::from(values[yy * w + xx]);
        }
    }
    s
}

/// Greedy NMS by full enumeration: `(row, col, sum)` per pick.
pub fn brute_standard(values: &[f32], h: usize, w: usize, side: usize, n: usize) -> Vec<(usize, usize, f64)> {
    let mut cands: Vec<(usize, usize, f64)> = Vec::new();
    for y in 0..=h - side {
        for x in 0..=w - side {
            cands.push((y, x, window_sum(values, w, y, x, side, side)));
        }
    }
    // stable sort keeps row-major order among equal sums
    cands.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    let mut picks: Vec<(usize, usize, f64)> = Vec::new();
    for c in cands {
        if picks.len() == n {
            break;
        }
        let clash = picks
            .iter()
            .any(|p| c.0 < p.0 + side && p.0 < c.0 + side && c.1 < p.1 + side && p.1 < c.1 + side);
        if !clash {
            picks.push(c);
        }
    }
    picks
}

/// Between-class variance of every split `[0, t) | [t, 256)` from
/// probabilities; `None` for splits with an empty side.
pub fn otsu_variances(hist: &[u64; 256]) -> Vec<Option<f64>> {
    let total: f64 = hist.iter().map(|&c| c as f64).sum();
    (0..=256)
        .map(|t| {
            let w0: f64 = hist[..t].iter().map(|&c| c as f64).sum::<f64>() / total;
            let w1 = 1.0 - w0;
            if hist[..t].iter().all(|&c| c == 0) || hist[t..].iter().all(|&c| c == 0) {
                return None;
            }
            let m0 = hist[..t].iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum::<f64>()
                / hist[..t].iter().map(|&c| c as f64).sum::<f64>();
            let m1 = hist[t..].iter().enumerate().map(|(i, &c)| (i + t) as f64 * c as f64).sum::<f64>()
                / hist[t..].iter().map(|&c| c as f64).sum::<f64>();
            Some(w0 * w1 * (m0 - m1).powi(2))
        })
        .collect()
}

/// Smallest split reaching the maximum variance (relative slack `1e-12`
/// absorbs summation-order rounding).
pub fn brute_otsu(hist: &[u64; 256]) -> usize {
    let v = otsu_variances(hist);
    let best = v.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    v.iter()
        .position(|x| x.is_some_and(|x| x >= best * (1.0 - 1e-12)))
        .unwrap()
}

pub fn random_histogram(rng: &mut SeededRng) -> [u64; 256] {
    let mut h = [0u64; 256];
    match rng.below(3) {
        0 => {
            for c in h.iter_mut() {
                *c = rng.below(1000);
            }
        }
        1 => {
            // two noisy modes, the typical thumbnail shape
            let (a, b) = (rng.below(120) as f64, 130.0 + rng.below(120) as f64);
            for _ in 0..5000 {
                let m = if rng.below(3) == 0 { a } else { b };
                let v = (m + 12.0 * rng.normal()).round().clamp(0.0, 255.0);
                h[v as usize] += 1;
            }
        }
        _ => {
            for _ in 0..2 + rng.below(6) {
                h[rng.below(256) as usize] += 1 + rng.below(50);
            }
        }
    }
    h
}

/// Cosine of two vectors in double precision.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum();
    let na: f64 = a.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Full sort by descending cosine, ascending index on ties.
pub fn brute_top_k(query: &[f32], rows: &[Vec<f32>], k: usize) -> Vec<usize> {
    let mut s: Vec<(usize, f64)> = rows.iter().enumerate().map(|(i, r)| (i, cosine(query, r))).collect();
    s.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    s.into_iter().take(k).map(|(i, _)| i).collect()
}

pub fn random_vector(rng: &mut SeededRng, dim: usize) -> Vec<f32> {
    loop {
        let v: Vec<f32> = (0..dim).map(|_| rng.normal() as f32).collect();
        if v.iter().any(|&x| x != 0.0) {
            return v;
        }
    }
}

/// Literal reading of the keyword rule: lowercase both sides, then look for
/// the term at every position preceded by a non-letter or the start.
pub fn brute_matches(caption: &str, with: &[Vec<&str>], without: &[Vec<&str>]) -> bool {
    let text = caption.to_lowercase();
    let hit = |term: &str| {
        let term = term.to_lowercase();
        let chars: Vec<char> = text.chars().collect();
        let tc: Vec<char> = term.chars().collect();
        (0..chars.len()).any(|i| {
            (i == 0 || !chars[i - 1].is_alphabetic()) && chars[i..].starts_with(&tc)
        })
    };
    with.iter().all(|g| g.iter().any(|t| hit(t))) && !without.iter().any(|g| g.iter().any(|t| hit(t)))
}

pub fn breast_with() -> Vec<Vec<&'static str>> {
    vec![
        vec!["breast"],
        vec!["tumor", "cancer", "carcinoma", "metastases", "metastasis", "metastatic"],
    ]
}

pub fn breast_without() -> Vec<Vec<&'static str>> {
    vec![
        vec!["IHC", "immunohistochemical", "immunohistochemistry", "immunostain"],
        vec!["photomicrograph", "photomicrography"],
    ]
}

pub fn mitotic_with() -> Vec<Vec<&'static str>> {
    vec![vec!["arrow", "arrowhead", "circle"], vec!["mitotic", "mitoses"]]
}

/// Ids checked by reading each fixture caption against the keyword sets.
pub const BREAST_IDS: [&str; 3] = ["c01", "c05", "c08"];
pub const MITOTIC_IDS: [&str; 4] = ["c06", "c08", "c11", "c12"];

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    // resolves from both this crate and its sibling crates
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

/// Fraction of set mask pixels touched by any region, by visiting every
/// pixel. A pixel spans `[x * s, (x + 1) * s)` at level 0; it counts when
/// that span overlaps a region with positive area.
pub fn brute_mask_coverage(mask: &protosample::io::BinaryMask, regions: &[protosample::io::Region]) -> (u64, u64) {
    let s = mask.scale_to_level0;
    let (mut hit, mut total) = (0, 0);
    for y in 0..mask.height {
        for x in 0..mask.width {
            if !mask.get(y, x) {
                continue;
            }
            total += 1;
            let (px0, py0, px1, py1) = (x as f64 * s, y as f64 * s, (x + 1) as f64 * s, (y + 1) as f64 * s);
            if regions.iter().any(|r| {
                let (rx0, ry0) = (r.x_px as f64, r.y_px as f64);
                let (rx1, ry1) = (rx0 + r.w_px as f64, ry0 + r.h_px as f64);
                px0 < rx1 && rx0 < px1 && py0 < ry1 && ry0 < py1
            }) {
                hit += 1;
            }
        }
    }
    (hit, total)
}
