mod common;

use common::*;
use protosample::io::{GridMeta, Strategy};
use protosample::rng::SeededRng;
use protosample::select::{
    adaptive_picks, component_bbox_where, kmeans, otsu_threshold, select_standard, standard_windows, to_level0,
    BisectOutcome, GridBox, SelectionConfig,
};
use protosample::simmap::IntegralImage;

#[test]
fn standard_matches_greedy_enumeration() {
    let mut rng = SeededRng::new(1);
    for case in 0..200 {
        let h = 8 + rng.below(25) as usize;
        let w = 8 + rng.below(25) as usize;
        let side = [2, 4, 8][rng.below(3) as usize];
        let n = 1 + rng.below(4) as usize;
        let map = dyadic_map(&mut rng, h, w);
        let got: Vec<(usize, usize, f64)> = standard_windows(&map, side, n)
            .unwrap()
            .into_iter()
            .map(|(b, s)| (b.y0, b.x0, s))
            .collect();
        assert_eq!(got, brute_standard(map.values(), h, w, side, n), "case {case}");
    }
}

#[test]
fn standard_regions_are_windows_in_pixels() {
    let mut rng = SeededRng::new(2);
    let map = dyadic_map(&mut rng, 20, 24);
    let meta = GridMeta::for_slide("m", 20 * 128, 24 * 128, 128, 128, 0.5).unwrap();
    let cfg = SelectionConfig::new(Strategy::ProtoStandard, 3, 512, 0);
    let sel = select_standard(&map, &meta, &cfg).unwrap();
    let want = brute_standard(map.values(), 20, 24, 4, 3);
    assert_eq!(sel.regions.len(), 3);
    for (i, (r, (y, x, s))) in sel.regions.iter().zip(want).enumerate() {
        assert_eq!(
            (r.x_px, r.y_px, r.w_px, r.h_px),
            to_level0(&GridBox::square(y, x, 4), &meta)
        );
        assert_eq!(r.score, s);
        assert_eq!(r.rank, i);
    }
}

#[test]
fn sat_matches_direct_sums() {
    let mut rng = SeededRng::new(3);
    let (h, w) = (64, 80);
    let values: Vec<f32> = (0..h * w).map(|_| rng.unit() as f32).collect();
    let sat = IntegralImage::new(&values, h, w);
    for _ in 0..1000 {
        let (y, x) = (rng.below(h as u64) as usize, rng.below(w as u64) as usize);
        let wh = 1 + rng.below((h - y) as u64) as usize;
        let ww = 1 + rng.below((w - x) as u64) as usize;
        let want = window_sum(&values, w, y, x, wh, ww);
        let got = sat.window_sum(y, x, wh, ww);
        assert!((got - want).abs() <= 1e-6 * want.abs().max(1e-12), "{got} vs {want}");
    }
}

#[test]
fn adaptive_converged_boxes_within_bounds() {
    let mut rng = SeededRng::new(4);
    for case in 0..100 {
        let (h, w) = (24 + rng.below(17) as usize, 24 + rng.below(17) as usize);
        let side = [3, 4, 6][rng.below(3) as usize];
        let map = smooth_map(&mut rng, h, w);
        let picks = adaptive_picks(&map, side, 3, 50, 1e-6).unwrap();
        let l2 = (side * side) as f64;
        for p in &picks {
            assert!(p.bbox.contains(p.seed.0, p.seed.1), "case {case}");
            if p.outcome == BisectOutcome::Converged {
                let a = p.bbox.area() as f64;
                assert!(a >= l2 / 4.0 && a <= 9.0 * l2 / 4.0, "case {case}: area {a}, side {side}");
            }
        }
        for (i, a) in picks.iter().enumerate() {
            for b in &picks[i + 1..] {
                assert!(!a.bbox.intersects(&b.bbox), "case {case}");
            }
        }
    }
}

#[test]
fn component_area_non_increasing_in_threshold() {
    let mut rng = SeededRng::new(5);
    for _ in 0..100 {
        let (h, w) = (32, 32);
        let map = smooth_map(&mut rng, h, w);
        let v = map.values();
        let seed_idx = (0..h * w).fold(0, |b, i| if v[i] > v[b] { i } else { b });
        let peak = f64::from(v[seed_idx]);
        let mut prev = usize::MAX;
        for k in 1..=50 {
            let t = peak * k as f64 / 50.0;
            let (b, _) = component_bbox_where(h, w, (seed_idx / w, seed_idx % w), |y, x| f64::from(v[y * w + x]) >= t);
            assert!(b.area() <= prev);
            prev = b.area();
        }
    }
}

fn random_points(rng: &mut SeededRng, m: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..dim).map(|_| rng.normal() * 3.0).collect()).collect()
}

#[test]
fn kmeans_inertia_non_increasing() {
    let mut rng = SeededRng::new(6);
    for _ in 0..100 {
        let m = 10 + rng.below(60) as usize;
        let dim = 1 + rng.below(5) as usize;
        let pts = random_points(&mut rng, m, dim);
        let k = 1 + rng.below(6.min(m as u64)) as usize;
        let r = kmeans(&pts, k, rng.next_u64(), 300, 1e-4).unwrap();
        for win in r.inertia_history.windows(2) {
            assert!(win[1] <= win[0] * (1.0 + 1e-12) + 1e-12, "{:?}", r.inertia_history);
        }
    }
}

#[test]
fn kmeans_zero_inertia_with_k_distinct() {
    let mut rng = SeededRng::new(7);
    for _ in 0..50 {
        let d = 2 + rng.below(6) as usize;
        let distinct = random_points(&mut rng, d, 3);
        let pts: Vec<Vec<f64>> = (0..d * 3).map(|i| distinct[if i < d { i } else { rng.below(d as u64) as usize }].clone()).collect();
        let r = kmeans(&pts, d, rng.next_u64(), 300, 1e-4).unwrap();
        assert_eq!(r.inertia(), 0.0);
    }
}

#[test]
fn otsu_matches_exhaustive_search() {
    let mut rng = SeededRng::new(8);
    for _ in 0..500 {
        let hist = random_histogram(&mut rng);
        let got = otsu_threshold(&hist).unwrap();
        if got.degenerate {
            assert_eq!(hist.iter().filter(|&&c| c > 0).count(), 1);
        } else {
            assert_eq!(got.threshold, brute_otsu(&hist), "{hist:?}");
        }
    }
}

#[test]
fn dyadic_map_scaling_keeps_geometry() {
    use protosample::simmap::SimilarityMap;
    let mut rng = SeededRng::new(9);
    for _ in 0..50 {
        let map = smooth_map(&mut rng, 24, 28);
        for f in [0.5f32, 0.25] {
            let scaled = SimilarityMap::from_values("m", 24, 28, map.values().iter().map(|v| v * f).collect()).unwrap();
            let a = standard_windows(&map, 4, 3).unwrap();
            let b = standard_windows(&scaled, 4, 3).unwrap();
            assert_eq!(a.iter().map(|p| p.0).collect::<Vec<_>>(), b.iter().map(|p| p.0).collect::<Vec<_>>());
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.1 * f64::from(f), y.1);
            }
            let pa = adaptive_picks(&map, 4, 3, 50, 1e-6).unwrap();
            let pb = adaptive_picks(&scaled, 4, 3, 50, 1e-6 * f64::from(f)).unwrap();
            assert_eq!(pa.iter().map(|p| p.bbox).collect::<Vec<_>>(), pb.iter().map(|p| p.bbox).collect::<Vec<_>>());
        }
    }
}
